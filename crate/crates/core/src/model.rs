//! Model parameters, the position grid, spinor wavefunctions, and the action
//! of the anisotropic Rabi Hamiltonian
//!
//! ```text
//! H = ω/2 (p² + x²) + Ω/2 σ_x + √(Ωω/2) (ξ σ_z x + ξ′ σ_y p)
//! ```
//!
//! on the grid, together with its truncated Fock-basis matrix
//! `ω a†a + Ω/2 σ_x + g[(σ₊a + σ₋a†) + λ(σ₊a† + σ₋a)]`. The two forms differ
//! by the constant ω/2 (zero-point energy of the oscillator).

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::analytics::critical_coupling;
use crate::error::{RabiError, Result};

/// Physical parameters in units with ħ = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Oscillator frequency ω.
    pub omega: f64,
    /// Two-level transition frequency Ω.
    pub big_omega: f64,
    /// Anisotropy ratio between rotating and counter-rotating couplings.
    pub lambda: f64,
    /// Dimensionless coupling g̃ = 2g/√(Ωω).
    pub g_tilde: f64,
}

/// Derived coupling scales of a parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingScales {
    pub xi: f64,
    pub xi_prime: f64,
    pub g_c: f64,
    /// Unsigned distance |g̃ − g̃_c| / g̃_c.
    pub epsilon: f64,
}

impl ModelParams {
    pub fn new(omega: f64, big_omega: f64, lambda: f64, g_tilde: f64) -> Result<Self> {
        let params = Self {
            omega,
            big_omega,
            lambda,
            g_tilde,
        };
        params.validate()?;
        Ok(params)
    }

    /// Parameters at coupling `ratio · g̃_c(λ)`.
    pub fn at_ratio(omega: f64, big_omega: f64, lambda: f64, ratio: f64) -> Result<Self> {
        Self::new(omega, big_omega, lambda, ratio * critical_coupling(lambda))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(RabiError::InvalidParams(format!(
                "omega must be positive, got {}",
                self.omega
            )));
        }
        if !(self.big_omega.is_finite() && self.big_omega > 0.0) {
            return Err(RabiError::InvalidParams(format!(
                "Omega must be positive, got {}",
                self.big_omega
            )));
        }
        if !self.lambda.is_finite() {
            return Err(RabiError::InvalidParams("lambda must be finite".into()));
        }
        if !(self.g_tilde.is_finite() && self.g_tilde >= 0.0) {
            return Err(RabiError::InvalidParams(format!(
                "g_tilde must be non-negative, got {}",
                self.g_tilde
            )));
        }
        Ok(())
    }

    pub fn with_coupling(&self, g_tilde: f64) -> Self {
        Self { g_tilde, ..*self }
    }

    pub fn scales(&self) -> CouplingScales {
        coupling_scales(self)
    }

    /// √(Ωω/2), the prefactor of both spin-oscillator couplings.
    pub fn coupling_unit(&self) -> f64 {
        (self.big_omega * self.omega / 2.0).sqrt()
    }
}

pub fn coupling_scales(params: &ModelParams) -> CouplingScales {
    let g = params.g_tilde;
    let g_c = critical_coupling(params.lambda);
    CouplingScales {
        xi: g * (1.0 + params.lambda) / 2.0,
        xi_prime: g * (1.0 - params.lambda) / 2.0,
        g_c,
        epsilon: (g - g_c).abs() / g_c,
    }
}

/// Uniform periodic position grid with cached spectral transforms.
#[derive(Clone)]
pub struct Grid {
    half_width: f64,
    dx: f64,
    x: Vec<f64>,
    k: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("half_width", &self.half_width)
            .field("n_points", &self.x.len())
            .field("dx", &self.dx)
            .finish()
    }
}

impl Grid {
    pub const DEFAULT_HALF_WIDTH: f64 = 48.0;
    pub const DEFAULT_POINTS: usize = 1024;

    pub fn new(half_width: f64, n_points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(RabiError::InvalidParams(format!(
                "half_width must be positive, got {half_width}"
            )));
        }
        if n_points < 4 || !n_points.is_power_of_two() {
            return Err(RabiError::InvalidParams(format!(
                "n_points must be a power of two >= 4, got {n_points}"
            )));
        }
        let dx = 2.0 * half_width / n_points as f64;
        let x = (0..n_points).map(|j| -half_width + j as f64 * dx).collect();
        let dk = 2.0 * std::f64::consts::PI / (n_points as f64 * dx);
        let k = (0..n_points)
            .map(|m| {
                let signed = if m < n_points / 2 {
                    m as i64
                } else {
                    m as i64 - n_points as i64
                };
                signed as f64 * dk
            })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            half_width,
            dx,
            x,
            k,
            forward: planner.plan_fft_forward(n_points),
            inverse: planner.plan_fft_inverse(n_points),
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Momenta in FFT (wrap-around) order.
    pub fn k(&self) -> &[f64] {
        &self.k
    }

    /// Largest representable |p|.
    pub fn k_max(&self) -> f64 {
        std::f64::consts::PI / self.dx
    }

    /// Index of the mirror point x → −x on the periodic grid.
    pub fn mirror_index(&self, j: usize) -> usize {
        (self.len() - j) % self.len()
    }

    /// Unnormalized forward transform in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.forward.process(data);
    }

    /// Inverse transform in place, including the 1/N normalization.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.inverse.process(data);
        let scale = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }

    /// Scratch length needed by the `*_with` transforms.
    pub(crate) fn scratch_len(&self) -> usize {
        self.forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len())
    }

    pub(crate) fn forward_with(&self, data: &mut [Complex64], scratch: &mut [Complex64]) {
        self.forward.process_with_scratch(data, scratch);
    }

    /// Inverse transform without the 1/N factor.
    pub(crate) fn inverse_unscaled_with(&self, data: &mut [Complex64], scratch: &mut [Complex64]) {
        self.inverse.process_with_scratch(data, scratch);
    }

    pub(crate) fn check(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(RabiError::GridMismatch {
                state: len,
                grid: self.len(),
            });
        }
        Ok(())
    }
}

/// Which spin basis the two components of a [`SpinorState`] refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinBasis {
    /// Components are (σ_z = +1, σ_z = −1).
    SigmaZ,
    /// Components are (σ_x = +1, σ_x = −1).
    SigmaX,
}

/// Spin ⊗ oscillator wavefunction sampled on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorState {
    pub up: Vec<Complex64>,
    pub down: Vec<Complex64>,
    basis: SpinBasis,
}

impl SpinorState {
    /// State with components in the σ_z eigenbasis.
    pub fn new(up: Vec<Complex64>, down: Vec<Complex64>) -> Result<Self> {
        if up.len() != down.len() {
            return Err(RabiError::GridMismatch {
                state: up.len(),
                grid: down.len(),
            });
        }
        Ok(Self {
            up,
            down,
            basis: SpinBasis::SigmaZ,
        })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            up: vec![Complex64::new(0.0, 0.0); n],
            down: vec![Complex64::new(0.0, 0.0); n],
            basis: SpinBasis::SigmaZ,
        }
    }

    /// `orbital ⊗ |−⟩`, with |−⟩ the σ_x = −1 eigenstate, stored in the σ_z basis.
    pub fn with_spin_minus(orbital: &[Complex64]) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            up: orbital.iter().map(|&z| z * s).collect(),
            down: orbital.iter().map(|&z| -z * s).collect(),
            basis: SpinBasis::SigmaZ,
        }
    }

    pub fn basis(&self) -> SpinBasis {
        self.basis
    }

    pub fn len(&self) -> usize {
        self.up.len()
    }

    pub fn is_empty(&self) -> bool {
        self.up.is_empty()
    }

    /// Re-express the components in `basis` (a unitary 2×2 rotation).
    pub fn to_basis(&self, basis: SpinBasis) -> Self {
        if basis == self.basis {
            return self.clone();
        }
        // The Hadamard rotation is its own inverse.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (up, down) = self
            .up
            .iter()
            .zip(&self.down)
            .map(|(&a, &b)| ((a + b) * s, (a - b) * s))
            .unzip();
        Self { up, down, basis }
    }

    /// Pointwise |ψ₁|² + |ψ₂|²; independent of the spin basis.
    pub fn density(&self) -> Vec<f64> {
        self.up
            .iter()
            .zip(&self.down)
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .collect()
    }

    pub fn norm_sqr(&self, grid: &Grid) -> f64 {
        grid.dx() * self.density().iter().sum::<f64>()
    }

    pub fn normalize(&mut self, grid: &Grid) -> Result<()> {
        grid.check(self.len())?;
        let n = self.norm_sqr(grid);
        if !(n.is_finite() && n > 0.0) {
            return Err(RabiError::Domain(format!(
                "cannot normalize state of norm² {n}"
            )));
        }
        let s = 1.0 / n.sqrt();
        self.scale(Complex64::new(s, 0.0));
        Ok(())
    }

    pub fn scale(&mut self, factor: Complex64) {
        self.up
            .iter_mut()
            .chain(self.down.iter_mut())
            .for_each(|z| *z *= factor);
    }

    /// ⟨self|other⟩ with the grid quadrature weight.
    pub fn inner(&self, other: &Self, grid: &Grid) -> Complex64 {
        let other = other.to_basis(self.basis);
        let sum: Complex64 = self
            .up
            .iter()
            .zip(&other.up)
            .chain(self.down.iter().zip(&other.down))
            .map(|(a, b)| a.conj() * b)
            .sum();
        sum * grid.dx()
    }

    /// `a·self + b·other`, in the basis of `self`.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Self {
        let other = other.to_basis(self.basis);
        let mix = |x: &[Complex64], y: &[Complex64]| -> Vec<Complex64> {
            x.iter().zip(y).map(|(&p, &q)| a * p + b * q).collect()
        };
        Self {
            up: mix(&self.up, &other.up),
            down: mix(&self.down, &other.down),
            basis: self.basis,
        }
    }

    /// Applies the spatial reflection x → −x combined with σ_x, the discrete
    /// symmetry of the Hamiltonian for every λ.
    pub fn parity_image(&self, grid: &Grid) -> Self {
        let z = self.to_basis(SpinBasis::SigmaZ);
        let n = z.len();
        let mut out = Self::zeros(n);
        for j in 0..n {
            let m = grid.mirror_index(j);
            out.up[j] = z.down[m];
            out.down[j] = z.up[m];
        }
        out.to_basis(self.basis)
    }
}

/// H|ψ⟩ on the grid: position-diagonal terms pointwise, momentum terms
/// through the spectral transform. The result is in the σ_z basis.
pub fn apply_hamiltonian(
    params: &ModelParams,
    state: &SpinorState,
    grid: &Grid,
) -> Result<SpinorState> {
    grid.check(state.len())?;
    let psi = state.to_basis(SpinBasis::SigmaZ);
    let scales = params.scales();
    let unit = params.coupling_unit();
    let w = params.omega;
    let half_big = params.big_omega / 2.0;
    let cx = unit * scales.xi;
    let cp = unit * scales.xi_prime;

    let mut up_k = psi.up.clone();
    let mut down_k = psi.down.clone();
    grid.forward(&mut up_k);
    grid.forward(&mut down_k);
    let i = Complex64::new(0.0, 1.0);
    for (m, &k) in grid.k().iter().enumerate() {
        let (u, d) = (up_k[m], down_k[m]);
        let kin = 0.5 * w * k * k;
        // σ_y = [[0, −i], [i, 0]]
        up_k[m] = kin * u - i * cp * k * d;
        down_k[m] = kin * d + i * cp * k * u;
    }
    grid.inverse(&mut up_k);
    grid.inverse(&mut down_k);

    let mut out = SpinorState::zeros(psi.len());
    for (j, &x) in grid.x().iter().enumerate() {
        let (u, d) = (psi.up[j], psi.down[j]);
        let pot = 0.5 * w * x * x;
        let b = cx * x;
        out.up[j] = up_k[j] + (pot + b) * u + half_big * d;
        out.down[j] = down_k[j] + (pot - b) * d + half_big * u;
    }
    Ok(out)
}

/// ⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩.
pub fn energy(params: &ModelParams, state: &SpinorState, grid: &Grid) -> Result<f64> {
    let h = apply_hamiltonian(params, state, grid)?;
    Ok(state.inner(&h, grid).re / state.norm_sqr(grid))
}

/// Matrix of the Fock-form Hamiltonian in the basis |s⟩ ⊗ |n⟩, index
/// `s·(n_max+1) + n` with s = 0 (σ_z = +1) and s = 1 (σ_z = −1).
pub fn fock_hamiltonian(params: &ModelParams, n_max: usize) -> Result<DMatrix<f64>> {
    params.validate()?;
    if n_max < 1 {
        return Err(RabiError::InvalidParams("n_max must be at least 1".into()));
    }
    let n = n_max + 1;
    let dim = 2 * n;
    let g = params.g_tilde * (params.big_omega * params.omega).sqrt() / 2.0;
    let lam = params.lambda;
    // σ₊ = (σ_z − iσ_y)/2 and σ₋ = σ₊ᵀ, both real.
    let sigma_plus = [[0.5, -0.5], [0.5, -0.5]];

    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for s in 0..2 {
        for m in 0..n {
            h[(s * n + m, s * n + m)] = params.omega * m as f64;
            // Ω/2 σ_x couples s = 0 and s = 1 at equal photon number.
            h[(s * n + m, (1 - s) * n + m)] = params.big_omega / 2.0;
        }
    }
    for (s, row) in sigma_plus.iter().enumerate() {
        for (t, &sp) in row.iter().enumerate() {
            for m in 1..n {
                let amp = (m as f64).sqrt();
                // <s, m−1| σ₊ a |t, m>  and  <s, m| σ₊ a† |t, m−1>
                let rotating = g * sp * amp;
                let counter = g * lam * sp * amp;
                h[(s * n + m - 1, t * n + m)] += rotating;
                h[(s * n + m, t * n + m - 1)] += counter;
                // Hermitian partners: σ₋ a† and σ₋ a.
                h[(t * n + m, s * n + m - 1)] += rotating;
                h[(t * n + m - 1, s * n + m)] += counter;
            }
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gaussian(grid: &Grid, shift: f64) -> Vec<Complex64> {
        let norm = std::f64::consts::PI.powf(-0.25);
        grid.x()
            .iter()
            .map(|&x| Complex64::new(norm * (-(x - shift).powi(2) / 2.0).exp(), 0.0))
            .collect()
    }

    #[test]
    fn coupling_scale_examples() {
        let s = ModelParams::new(1.0, 1000.0, 1.0, 1.0).unwrap().scales();
        assert_eq!((s.xi, s.xi_prime, s.g_c, s.epsilon), (1.0, 0.0, 1.0, 0.0));
        let s = ModelParams::new(1.0, 1000.0, 0.0, 0.0).unwrap().scales();
        assert_eq!((s.xi, s.xi_prime, s.g_c, s.epsilon), (0.0, 0.0, 2.0, 1.0));
        let s = ModelParams::new(1.0, 1000.0, -1.0, 0.5).unwrap().scales();
        assert_eq!((s.xi, s.xi_prime, s.g_c, s.epsilon), (0.0, 0.5, 1.0, 0.5));
    }

    #[test]
    fn xi_swap_under_lambda_mirror() {
        for &lam in &[0.3, 1.0, 1.7, 2.5] {
            let a = ModelParams::new(1.0, 100.0, lam, 0.8).unwrap().scales();
            let b = ModelParams::new(1.0, 100.0, -lam, 0.8).unwrap().scales();
            assert_eq!(a.xi, b.xi_prime);
            assert_eq!(a.xi_prime, b.xi);
        }
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(ModelParams::new(0.0, 1.0, 1.0, 0.1).is_err());
        assert!(ModelParams::new(1.0, -1.0, 1.0, 0.1).is_err());
        assert!(ModelParams::new(1.0, 1.0, 1.0, -0.1).is_err());
        assert!(Grid::new(48.0, 1000).is_err());
        assert!(Grid::new(-1.0, 1024).is_err());
    }

    #[test]
    fn grid_layout() {
        let grid = Grid::new(48.0, 1024).unwrap();
        assert_relative_eq!(grid.dx(), 96.0 / 1024.0);
        assert_eq!(grid.x()[0], -48.0);
        assert_relative_eq!(grid.x()[1023], 48.0 - grid.dx());
        let dk = 2.0 * std::f64::consts::PI / 96.0;
        assert_eq!(grid.k()[0], 0.0);
        assert_relative_eq!(grid.k()[1], dk);
        assert_relative_eq!(grid.k()[1023], -dk);
        assert_relative_eq!(grid.k()[512], -512.0 * dk);
        assert_eq!(grid.mirror_index(0), 0);
        assert_eq!(grid.mirror_index(1), 1023);
        assert_relative_eq!(
            grid.x()[grid.mirror_index(300)],
            -grid.x()[300],
            epsilon = 1e-12
        );
    }

    #[test]
    fn basis_rotation_preserves_density() {
        let grid = Grid::new(10.0, 128).unwrap();
        let mut s = SpinorState::new(gaussian(&grid, 1.0), gaussian(&grid, -0.5)).unwrap();
        s.up.iter_mut().for_each(|z| *z *= Complex64::new(0.3, 0.7));
        s.normalize(&grid).unwrap();
        let x = s.to_basis(SpinBasis::SigmaX);
        for (a, b) in s.density().iter().zip(x.density()) {
            assert!((a - b).abs() < 1e-14);
        }
        let back = x.to_basis(SpinBasis::SigmaZ);
        for (a, b) in s.up.iter().zip(&back.up) {
            assert!((a - b).norm() < 1e-15);
        }
        assert!((x.norm_sqr(&grid) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn decoupled_ground_state_is_eigenstate() {
        let grid = Grid::new(48.0, 1024).unwrap();
        let params = ModelParams::new(1.0, 1000.0, 1.0, 0.0).unwrap();
        let mut psi = SpinorState::with_spin_minus(&gaussian(&grid, 0.0));
        psi.normalize(&grid).unwrap();
        let h = apply_hamiltonian(&params, &psi, &grid).unwrap();
        let e = 0.5 - 500.0;
        for j in 0..grid.len() {
            assert!((h.up[j] - e * psi.up[j]).norm() < 1e-10);
            assert!((h.down[j] - e * psi.down[j]).norm() < 1e-10);
        }
    }

    #[test]
    fn hamiltonian_is_linear() {
        let grid = Grid::new(20.0, 256).unwrap();
        let params = ModelParams::new(1.0, 50.0, 0.4, 0.9).unwrap();
        let a = SpinorState::new(gaussian(&grid, 1.0), gaussian(&grid, -2.0)).unwrap();
        let b = SpinorState::new(gaussian(&grid, 0.5), gaussian(&grid, 3.0)).unwrap();
        let ca = Complex64::new(0.7, -0.2);
        let cb = Complex64::new(-1.1, 0.4);
        let lhs = apply_hamiltonian(&params, &a.combine(ca, &b, cb), &grid).unwrap();
        let rhs = apply_hamiltonian(&params, &a, &grid).unwrap().combine(
            ca,
            &apply_hamiltonian(&params, &b, &grid).unwrap(),
            cb,
        );
        for j in 0..grid.len() {
            assert!((lhs.up[j] - rhs.up[j]).norm() < 1e-12);
            assert!((lhs.down[j] - rhs.down[j]).norm() < 1e-12);
        }
    }

    #[test]
    fn grid_mismatch_is_error() {
        let grid = Grid::new(20.0, 256).unwrap();
        let params = ModelParams::new(1.0, 50.0, 0.4, 0.9).unwrap();
        let s = SpinorState::zeros(128);
        assert!(matches!(
            apply_hamiltonian(&params, &s, &grid),
            Err(RabiError::GridMismatch { .. })
        ));
    }

    #[test]
    fn fock_matrix_is_exactly_symmetric() {
        let params = ModelParams::new(1.0, 50.0, 0.37, 1.3).unwrap();
        let h = fock_hamiltonian(&params, 40).unwrap();
        assert_eq!(h.nrows(), 82);
        let diff = (&h - h.transpose()).abs().max();
        assert_eq!(diff, 0.0);
    }

    #[test]
    fn fock_decoupled_spectrum() {
        let params = ModelParams::new(1.0, 10.0, 0.5, 0.0).unwrap();
        let h = fock_hamiltonian(&params, 8).unwrap();
        let mut ev: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut expect: Vec<f64> = (0..=8)
            .flat_map(|n| [n as f64 - 5.0, n as f64 + 5.0])
            .collect();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in ev.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((ev[1] - ev[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parity_commutes_with_hamiltonian() {
        let grid = Grid::new(16.0, 256).unwrap();
        let params = ModelParams::new(1.0, 20.0, -0.6, 1.1).unwrap();
        let s = SpinorState::new(gaussian(&grid, 1.3), gaussian(&grid, -0.4)).unwrap();
        let lhs = apply_hamiltonian(&params, &s.parity_image(&grid), &grid).unwrap();
        let rhs = apply_hamiltonian(&params, &s, &grid)
            .unwrap()
            .parity_image(&grid);
        for j in 0..grid.len() {
            assert!((lhs.up[j] - rhs.up[j]).norm() < 1e-10);
            assert!((lhs.down[j] - rhs.down[j]).norm() < 1e-10);
        }
    }
}
