//! Strang-split propagator shared by real-time evolution and imaginary-time
//! relaxation.
//!
//! One step applies the position-diagonal 2×2 block for dt/2, the
//! momentum-diagonal 2×2 block for dt between spectral transforms, then the
//! position block again for dt/2. Both blocks are exponentiated exactly.
//!
//! The Ωσ_x/2 term goes into the block that carries the dominant coupling:
//! the position block for λ ≥ 0 (σ_z x) and the momentum block for λ < 0
//! (σ_y p). This keeps the large commutator [σ_x, coupling] out of the
//! splitting error and makes the scheme for −λ the exact mirror image of
//! the scheme for λ.

use num_complex::Complex64;

use crate::model::{Grid, ModelParams, SpinBasis, SpinorState};

/// `f(r·h)/r`, with its r → 0 limit `h`.
fn sinc(f_rh: f64, r: f64, h: f64) -> f64 {
    if r > 0.0 {
        f_rh / r
    } else {
        h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Clock {
    Real,
    Imaginary,
}

/// Coefficients of `kin·(c·I + m·(a σ_x + b σ_z))` at one grid point.
#[derive(Clone, Copy, Default)]
struct XCoeff {
    c: Complex64,
    m: Complex64,
    b: f64,
}

/// Coefficients of `U' = c U + qu D`, `D' = c D + qd U` at one momentum,
/// with the kinetic phase and the inverse-transform 1/N folded in.
#[derive(Clone, Copy, Default)]
struct PCoeff {
    c: Complex64,
    qu: Complex64,
    qd: Complex64,
}

pub(crate) struct SplitStepper<'g> {
    grid: &'g Grid,
    clock: Clock,
    dt: f64,
    /// Ω/2 in the position block, or zero when it sits in the momentum block.
    x_spin: f64,
    p_spin: f64,
    unit: f64,
    x_kinetic: Vec<Complex64>,
    p_kinetic: Vec<Complex64>,
    x_coeff: Vec<XCoeff>,
    p_coeff: Vec<PCoeff>,
    scratch: Vec<Complex64>,
    cached_xi: Option<f64>,
    cached_xi_prime: Option<f64>,
}

impl<'g> SplitStepper<'g> {
    pub(crate) fn new(grid: &'g Grid, params: &ModelParams, clock: Clock, dt: f64) -> Self {
        let w = params.omega;
        let factor = |energy: f64, h: f64| match clock {
            Clock::Real => Complex64::from_polar(1.0, -energy * h),
            Clock::Imaginary => Complex64::new((-energy * h).exp(), 0.0),
        };
        let inv_n = 1.0 / grid.len() as f64;
        let x_kinetic = grid
            .x()
            .iter()
            .map(|&x| factor(0.5 * w * x * x, dt / 2.0))
            .collect();
        let p_kinetic = grid
            .k()
            .iter()
            .map(|&k| factor(0.5 * w * k * k, dt) * inv_n)
            .collect();
        Self {
            grid,
            clock,
            dt,
            x_spin: if params.lambda < 0.0 {
                0.0
            } else {
                params.big_omega / 2.0
            },
            p_spin: if params.lambda < 0.0 {
                params.big_omega / 2.0
            } else {
                0.0
            },
            unit: params.coupling_unit(),
            x_kinetic,
            p_kinetic,
            x_coeff: vec![XCoeff::default(); grid.len()],
            p_coeff: vec![PCoeff::default(); grid.len()],
            scratch: vec![Complex64::default(); grid.scratch_len()],
            cached_xi: None,
            cached_xi_prime: None,
        }
    }

    fn refresh(&mut self, xi: f64, xi_prime: f64) {
        let h = self.dt / 2.0;
        if self.cached_xi != Some(xi) {
            let a = self.x_spin;
            let cx = self.unit * xi;
            for ((coeff, &x), &kin) in self
                .x_coeff
                .iter_mut()
                .zip(self.grid.x())
                .zip(&self.x_kinetic)
            {
                let b = cx * x;
                let r = (a * a + b * b).sqrt();
                let (c, m) = match self.clock {
                    Clock::Real => {
                        let (s, c) = (r * h).sin_cos();
                        (c, Complex64::new(0.0, -sinc(s, r, h)))
                    }
                    Clock::Imaginary => (
                        (r * h).cosh(),
                        Complex64::new(-sinc((r * h).sinh(), r, h), 0.0),
                    ),
                };
                *coeff = XCoeff {
                    c: kin * c,
                    m: kin * m,
                    b,
                };
            }
            self.cached_xi = Some(xi);
        }
        if self.cached_xi_prime != Some(xi_prime) {
            let cp = self.unit * xi_prime;
            let alpha = self.p_spin * self.dt;
            for ((coeff, &k), &kin) in self
                .p_coeff
                .iter_mut()
                .zip(self.grid.k())
                .zip(&self.p_kinetic)
            {
                let beta = cp * k * self.dt;
                let r = (alpha * alpha + beta * beta).sqrt();
                // (ασ_x + βσ_y)(U, D) = ((α − iβ) D, (α + iβ) U)
                let (lo, hi) = (Complex64::new(alpha, -beta), Complex64::new(alpha, beta));
                let (c, f) = match self.clock {
                    // exp(−iG) = cos r − i sin r G/r
                    Clock::Real => {
                        let (s, c) = r.sin_cos();
                        (c, Complex64::new(0.0, -sinc(s, r, 1.0)))
                    }
                    // exp(−G) = cosh r − sinh r G/r
                    Clock::Imaginary => (r.cosh(), Complex64::new(-sinc(r.sinh(), r, 1.0), 0.0)),
                };
                *coeff = PCoeff {
                    c: kin * c,
                    qu: kin * f * lo,
                    qd: kin * f * hi,
                };
            }
            self.cached_xi_prime = Some(xi_prime);
        }
    }

    fn x_half_step(&self, state: &mut SpinorState) {
        let a = self.x_spin;
        let SpinorState { up, down, .. } = state;
        for ((u, d), co) in up.iter_mut().zip(down.iter_mut()).zip(&self.x_coeff) {
            let (uu, dd) = (*u, *d);
            *u = co.c * uu + co.m * (co.b * uu + a * dd);
            *d = co.c * dd + co.m * (a * uu - co.b * dd);
        }
    }

    fn p_step(&mut self, state: &mut SpinorState) {
        let SpinorState { up, down, .. } = state;
        self.grid.forward_with(up, &mut self.scratch);
        self.grid.forward_with(down, &mut self.scratch);
        for ((u, d), co) in up.iter_mut().zip(down.iter_mut()).zip(&self.p_coeff) {
            let (uu, dd) = (*u, *d);
            *u = co.c * uu + co.qu * dd;
            *d = co.c * dd + co.qd * uu;
        }
        self.grid.inverse_unscaled_with(up, &mut self.scratch);
        self.grid.inverse_unscaled_with(down, &mut self.scratch);
    }

    /// Advances `state` (σ_z basis) by one step with couplings held at
    /// (`xi`, `xi_prime`).
    pub(crate) fn step(&mut self, state: &mut SpinorState, xi: f64, xi_prime: f64) {
        debug_assert_eq!(state.basis(), SpinBasis::SigmaZ);
        self.refresh(xi, xi_prime);
        self.x_half_step(state);
        self.p_step(state);
        self.x_half_step(state);
    }
}
