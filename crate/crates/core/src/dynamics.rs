//! Real-time evolution under a linear coupling ramp.
//!
//! The coupling follows g̃(t) = g̃_c (1 + s(t)) with s(t) = eps_start + t/τ_Q,
//! so the critical point is crossed at t_c = −eps_start·τ_Q. Each step is a
//! Strang split with the coupling evaluated at the step midpoint. The
//! initial state is the relaxed ground state at g̃(0).

use std::io::Write;

use num_complex::Complex64;

use crate::analytics::critical_coupling;
use crate::error::{RabiError, Result};
use crate::io::{csv_writer, fmt_float};
use crate::model::{self, Grid, ModelParams, SpinBasis, SpinorState};
use crate::propagator::{Clock, SplitStepper};
use crate::solver::{ground_state, GroundStateOptions};

pub const TIME_SERIES_HEADER: [&str; 10] = [
    "t", "s", "g_tilde", "n_c", "dx", "dp", "mean_x", "mean_p", "norm", "energy",
];

/// Default step 2π/(20Ω): twenty steps per period of the fastest scale.
pub fn default_dt(big_omega: f64) -> f64 {
    2.0 * std::f64::consts::PI / (20.0 * big_omega)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuenchSchedule {
    pub tau_q: f64,
    pub eps_start: f64,
    pub eps_end: f64,
    /// Model constants; `g_tilde` is overridden by the ramp.
    pub params: ModelParams,
}

impl QuenchSchedule {
    pub fn new(params: ModelParams, tau_q: f64, eps_start: f64, eps_end: f64) -> Result<Self> {
        let schedule = Self {
            tau_q,
            eps_start,
            eps_end,
            params,
        };
        schedule.validate()?;
        Ok(schedule)
    }

    /// Ramp from g̃ = 0 to 2 g̃_c.
    pub fn full(params: ModelParams, tau_q: f64) -> Result<Self> {
        Self::new(params, tau_q, -1.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_q.is_finite() && self.tau_q > 0.0) {
            return Err(RabiError::InvalidParams(format!(
                "tau_q must be positive, got {}",
                self.tau_q
            )));
        }
        if !(self.eps_start >= -1.0
            && self.eps_start < 0.0
            && self.eps_end > 0.0
            && self.eps_end.is_finite())
        {
            return Err(RabiError::InvalidParams(format!(
                "need -1 <= eps_start < 0 < eps_end, got {} and {}",
                self.eps_start, self.eps_end
            )));
        }
        if self.params.lambda == 0.0 {
            return Err(RabiError::LambdaZero);
        }
        self.params.validate()
    }

    pub fn g_c(&self) -> f64 {
        critical_coupling(self.params.lambda)
    }

    pub fn s_at(&self, t: f64) -> f64 {
        self.eps_start + t / self.tau_q
    }

    pub fn g_tilde_at(&self, t: f64) -> f64 {
        (self.g_c() * (1.0 + self.s_at(t))).max(0.0)
    }

    pub fn params_at(&self, t: f64) -> ModelParams {
        self.params.with_coupling(self.g_tilde_at(t))
    }

    pub fn t_c(&self) -> f64 {
        -self.eps_start * self.tau_q
    }

    /// Time at which s reaches `s`.
    pub fn time_of(&self, s: f64) -> f64 {
        (s - self.eps_start) * self.tau_q
    }

    pub fn duration(&self) -> f64 {
        self.time_of(self.eps_end)
    }
}

/// When an evolution ends.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Stop {
    /// At eps_end.
    #[default]
    End,
    /// When s reaches the given value (may lie before the critical point).
    AtS(f64),
    /// `extra` samples after n_c first exceeds `n_c` past t_c, or at eps_end.
    AfterCrossing { n_c: f64, extra: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOptions {
    pub dt: f64,
    /// Steps between recorded samples.
    pub observer_stride: usize,
    /// Times at which the density is recorded (nearest step at or after).
    pub snapshot_times: Vec<f64>,
    pub stop: Stop,
    pub norm_tol: f64,
    pub edge_tol: f64,
    pub ground: GroundStateOptions,
}

impl EvolveOptions {
    pub fn new(big_omega: f64) -> Self {
        Self {
            dt: default_dt(big_omega),
            observer_stride: 50,
            snapshot_times: Vec::new(),
            stop: Stop::End,
            norm_tol: 1e-8,
            edge_tol: 1e-6,
            ground: GroundStateOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    /// ω(⟨x²⟩ + ⟨p²⟩)/2, zero-point included.
    pub n_c: f64,
    pub mean_x: f64,
    pub mean_p: f64,
    pub dx: f64,
    pub dp: f64,
    pub norm: f64,
    pub energy: f64,
}

/// Moments of a state; momentum moments come from the spectral transform.
pub fn observe(state: &SpinorState, grid: &Grid, params: &ModelParams) -> Result<Observables> {
    grid.check(state.len())?;
    let psi = state.to_basis(SpinBasis::SigmaZ);
    let rho = psi.density();
    let dxw = grid.dx();
    let norm = rho.iter().sum::<f64>() * dxw;
    let (mut x1, mut x2) = (0.0, 0.0);
    for (&x, &r) in grid.x().iter().zip(&rho) {
        x1 += x * r;
        x2 += x * x * r;
    }
    let mut up = psi.up.clone();
    let mut down = psi.down.clone();
    grid.forward(&mut up);
    grid.forward(&mut down);
    let (mut p1, mut p2, mut pn) = (0.0, 0.0, 0.0);
    for ((&k, u), d) in grid.k().iter().zip(&up).zip(&down) {
        let r = u.norm_sqr() + d.norm_sqr();
        pn += r;
        p1 += k * r;
        p2 += k * k * r;
    }
    let (x1, x2) = (x1 * dxw / norm, x2 * dxw / norm);
    let (p1, p2) = (p1 / pn, p2 / pn);
    Ok(Observables {
        n_c: params.omega * (x2 + p2) / 2.0,
        mean_x: x1,
        mean_p: p1,
        dx: (x2 - x1 * x1).max(0.0).sqrt(),
        dp: (p2 - p1 * p1).max(0.0).sqrt(),
        norm,
        energy: model::energy(params, &psi, grid)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub s: f64,
    pub g_tilde: f64,
    pub n_c: f64,
    pub dx: f64,
    pub dp: f64,
    pub mean_x: f64,
    pub mean_p: f64,
    pub norm: f64,
    pub energy: f64,
}

impl Sample {
    fn fields(&self) -> [f64; 10] {
        [
            self.t,
            self.s,
            self.g_tilde,
            self.n_c,
            self.dx,
            self.dp,
            self.mean_x,
            self.mean_p,
            self.norm,
            self.energy,
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub lambda: f64,
    pub tau_q: f64,
    pub t_c: f64,
    pub samples: Vec<Sample>,
}

impl TimeSeries {
    pub fn write_csv(&self, w: &mut dyn Write) -> Result<()> {
        let mut out = csv_writer(w);
        out.write_record(TIME_SERIES_HEADER)?;
        for sample in &self.samples {
            out.write_record(sample.fields().iter().map(|&v| fmt_float(v)))?;
        }
        out.flush()?;
        Ok(())
    }

    /// Largest |norm − 1| over the run.
    pub fn max_norm_drift(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.norm - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Density snapshots on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshots {
    pub x: Vec<f64>,
    pub times: Vec<f64>,
    pub densities: Vec<Vec<f64>>,
}

impl Snapshots {
    /// Long format: `t,x,density`.
    pub fn write_long_csv(&self, w: &mut dyn Write) -> Result<()> {
        let mut out = csv_writer(w);
        out.write_record(["t", "x", "density"])?;
        for (t, rho) in self.times.iter().zip(&self.densities) {
            for (x, r) in self.x.iter().zip(rho) {
                out.write_record([fmt_float(*t), fmt_float(*x), fmt_float(*r)])?;
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Space-time matrix: header `t` then the grid points, one row per snapshot.
    pub fn write_matrix_csv(&self, w: &mut dyn Write) -> Result<()> {
        let mut out = csv_writer(w);
        out.write_record(
            std::iter::once("t".to_string()).chain(self.x.iter().map(|&x| fmt_float(x))),
        )?;
        for (t, rho) in self.times.iter().zip(&self.densities) {
            out.write_record(
                std::iter::once(fmt_float(*t)).chain(rho.iter().map(|&r| fmt_float(r))),
            )?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub series: TimeSeries,
    pub snapshots: Option<Snapshots>,
    pub final_state: SpinorState,
}

fn edge_mass(state: &SpinorState, grid: &Grid) -> f64 {
    let n = state.len();
    let rho = state.density();
    (rho[..3].iter().sum::<f64>() + rho[n - 3..].iter().sum::<f64>()) * grid.dx()
}

pub fn evolve(schedule: &QuenchSchedule, grid: &Grid, opts: &EvolveOptions) -> Result<Evolution> {
    schedule.validate()?;
    if !(opts.dt.is_finite() && opts.dt > 0.0) || opts.observer_stride == 0 {
        return Err(RabiError::InvalidParams(
            "dt and observer_stride must be positive".into(),
        ));
    }
    let t_end = match opts.stop {
        Stop::AtS(s) => {
            if !(s > schedule.eps_start && s <= schedule.eps_end) {
                return Err(RabiError::InvalidParams(format!(
                    "stop at s = {s} lies outside the ramp"
                )));
            }
            schedule.time_of(s)
        }
        _ => schedule.duration(),
    };
    let n_steps = (t_end / opts.dt).ceil().max(1.0) as usize;
    let dt = t_end / n_steps as f64;

    let initial = schedule.params_at(0.0);
    let mut state = ground_state(&initial, grid, &opts.ground)?
        .state
        .to_basis(SpinBasis::SigmaZ);
    let mut stepper = SplitStepper::new(grid, &schedule.params, Clock::Real, dt);

    let mut snap_times: Vec<f64> = opts
        .snapshot_times
        .iter()
        .copied()
        .filter(|t| *t <= t_end)
        .collect();
    snap_times.sort_by(f64::total_cmp);
    let mut snapshots = (!snap_times.is_empty()).then(|| Snapshots {
        x: grid.x().to_vec(),
        times: Vec::new(),
        densities: Vec::new(),
    });
    let mut next_snap = 0usize;

    let t_c = schedule.t_c();
    let mut samples = Vec::with_capacity(n_steps / opts.observer_stride + 2);
    let mut remaining: Option<usize> = None;

    for step in 0..=n_steps {
        let t = step as f64 * dt;
        if let Some(snaps) = snapshots.as_mut() {
            while next_snap < snap_times.len() && snap_times[next_snap] <= t + 0.5 * dt {
                snaps.times.push(t);
                snaps.densities.push(state.density());
                next_snap += 1;
            }
        }
        if step % opts.observer_stride == 0 || step == n_steps {
            let params = schedule.params_at(t);
            let obs = observe(&state, grid, &params)?;
            if (obs.norm - 1.0).abs() > opts.norm_tol {
                return Err(RabiError::Stability { t, norm: obs.norm });
            }
            let edge = edge_mass(&state, grid);
            if edge > opts.edge_tol {
                return Err(RabiError::GridOverflow { t, edge_mass: edge });
            }
            samples.push(Sample {
                t,
                s: schedule.s_at(t),
                g_tilde: params.g_tilde,
                n_c: obs.n_c,
                dx: obs.dx,
                dp: obs.dp,
                mean_x: obs.mean_x,
                mean_p: obs.mean_p,
                norm: obs.norm,
                energy: obs.energy,
            });
            if let Stop::AfterCrossing { n_c, extra } = opts.stop {
                match remaining.as_mut() {
                    Some(0) => break,
                    Some(r) => *r -= 1,
                    None if t > t_c && obs.n_c > n_c => {
                        if extra == 0 {
                            break;
                        }
                        remaining = Some(extra - 1);
                    }
                    None => {}
                }
            }
        }
        if step == n_steps {
            break;
        }
        let mid = schedule.params_at(t + 0.5 * dt).scales();
        stepper.step(&mut state, mid.xi, mid.xi_prime);
    }

    Ok(Evolution {
        series: TimeSeries {
            lambda: schedule.params.lambda,
            tau_q: schedule.tau_q,
            t_c,
            samples,
        },
        snapshots,
        final_state: state,
    })
}

/// Holds the coupling fixed and propagates for `duration`, returning the final state.
pub fn evolve_static(
    params: &ModelParams,
    state: &SpinorState,
    grid: &Grid,
    dt: f64,
    duration: f64,
) -> Result<SpinorState> {
    grid.check(state.len())?;
    let n_steps = (duration / dt).ceil().max(1.0) as usize;
    let dt = duration / n_steps as f64;
    let scales = params.scales();
    let mut stepper = SplitStepper::new(grid, params, Clock::Real, dt);
    let mut psi = state.to_basis(SpinBasis::SigmaZ);
    for _ in 0..n_steps {
        stepper.step(&mut psi, scales.xi, scales.xi_prime);
    }
    Ok(psi)
}

/// |⟨a|b⟩|² for normalized states.
pub fn fidelity(a: &SpinorState, b: &SpinorState, grid: &Grid) -> f64 {
    let ov: Complex64 = a.inner(b, grid);
    ov.norm_sqr() / (a.norm_sqr(grid) * b.norm_sqr(grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::gaussian_orbital;
    use approx::assert_relative_eq;

    fn vacuum(grid: &Grid, shift: f64) -> SpinorState {
        let mut s = SpinorState::with_spin_minus(&gaussian_orbital(grid, 1.0, shift, 0.0).unwrap());
        s.normalize(grid).unwrap();
        s
    }

    #[test]
    fn vacuum_observables() {
        let grid = Grid::new(24.0, 512).unwrap();
        let p = ModelParams::new(1.0, 50.0, 1.0, 0.0).unwrap();
        let o = observe(&vacuum(&grid, 0.0), &grid, &p).unwrap();
        assert_relative_eq!(o.n_c, 0.5, epsilon = 1e-12);
        assert_relative_eq!(o.dx, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_relative_eq!(o.dp, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_relative_eq!(o.energy, 0.5 - 25.0, epsilon = 1e-10);
    }

    #[test]
    fn displaced_vacuum_observables() {
        let grid = Grid::new(24.0, 512).unwrap();
        let p = ModelParams::new(1.0, 50.0, 1.0, 0.0).unwrap();
        let a = 3.0;
        let o = observe(&vacuum(&grid, a), &grid, &p).unwrap();
        assert_relative_eq!(o.n_c, (1.0 + a * a) / 2.0, epsilon = 1e-12);
        assert_relative_eq!(o.mean_x, a, epsilon = 1e-12);
        assert_relative_eq!(o.dx, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
        assert!(o.mean_p.abs() < 1e-12);
    }

    #[test]
    fn schedule_invariants() {
        let p = ModelParams::new(1.0, 1000.0, 1.0, 0.0).unwrap();
        let q = QuenchSchedule::full(p, 10.0).unwrap();
        assert_eq!(q.t_c(), 10.0);
        assert_eq!(q.g_tilde_at(0.0), 0.0);
        assert_eq!(q.g_tilde_at(10.0), 1.0);
        assert_eq!(q.g_tilde_at(20.0), 2.0);
        assert_eq!(q.duration(), 20.0);
        assert!(QuenchSchedule::new(p, 10.0, 0.1, 1.0).is_err());
        assert!(QuenchSchedule::new(p, 10.0, -1.5, 1.0).is_err());
        assert!(QuenchSchedule::new(p, -1.0, -1.0, 1.0).is_err());
        let zero = ModelParams::new(1.0, 1000.0, 0.0, 0.0).unwrap();
        assert!(matches!(
            QuenchSchedule::full(zero, 10.0),
            Err(RabiError::LambdaZero)
        ));
    }

    #[test]
    fn samples_and_snapshots_are_ordered() {
        let grid = Grid::new(16.0, 256).unwrap();
        let p = ModelParams::new(1.0, 20.0, 1.0, 0.0).unwrap();
        let q = QuenchSchedule::new(p, 2.0, -1.0, 0.5).unwrap();
        let mut opts = EvolveOptions::new(20.0);
        opts.observer_stride = 7;
        opts.snapshot_times = vec![1.0, 0.0, 2.5];
        let ev = evolve(&q, &grid, &opts).unwrap();
        let s = &ev.series.samples;
        assert!(s.windows(2).all(|w| w[1].t > w[0].t));
        assert_eq!(s[0].t, 0.0);
        assert_relative_eq!(s.last().unwrap().t, 3.0, epsilon = 1e-12);
        let snaps = ev.snapshots.unwrap();
        assert_eq!(snaps.times.len(), 3);
        assert!(snaps.times.windows(2).all(|w| w[1] > w[0]));
        assert!(ev.series.max_norm_drift() < 1e-10);
    }

    #[test]
    fn csv_header_and_width() {
        let grid = Grid::new(16.0, 256).unwrap();
        let p = ModelParams::new(1.0, 20.0, -1.0, 0.0).unwrap();
        let q = QuenchSchedule::new(p, 1.0, -1.0, 0.2).unwrap();
        let ev = evolve(&q, &grid, &EvolveOptions::new(20.0)).unwrap();
        let mut buf = Vec::new();
        ev.series.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,s,g_tilde,n_c,dx,dp,mean_x,mean_p,norm,energy"
        );
        assert!(lines.all(|l| l.split(',').count() == 10));
    }

    #[test]
    fn grid_overflow_is_detected() {
        // The vacuum tail at |x| = 8 carries about e^{-64} of the mass.
        let grid = Grid::new(8.0, 128).unwrap();
        let p = ModelParams::new(1.0, 20.0, 1.0, 0.2).unwrap();
        let q = QuenchSchedule::new(p, 50.0, -1.0, 1.0).unwrap();
        let mut opts = EvolveOptions::new(20.0);
        opts.edge_tol = 1e-30;
        assert!(matches!(
            evolve(&q, &grid, &opts),
            Err(RabiError::GridOverflow { .. })
        ));
    }
}
