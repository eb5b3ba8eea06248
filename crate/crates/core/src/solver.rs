//! Non-perturbative ground states and spectra.
//!
//! Grid ground states come from imaginary-time split-step relaxation with a
//! decreasing sequence of steps. Spectra come from dense diagonalization of
//! the truncated Fock-basis matrix, with the cutoff checked by extending it
//! by 20 photons.
//!
//! In the superradiant phase the two lowest levels form a quasi-degenerate
//! parity doublet whose splitting is exponentially small in the squared
//! displacement. There `gap_physical` is E₂ − E₀, the excitation inside one
//! symmetry-broken well, which is what the closed-form ϖ₁ and ϖ₂ describe.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::analytics::{self, gaussian_orbital, PhaseLabel};
use crate::error::{RabiError, Result};
use crate::model::{
    self, apply_hamiltonian, fock_hamiltonian, Grid, ModelParams, SpinBasis, SpinorState,
};
use crate::propagator::{Clock, SplitStepper};

/// Which ground state [`ground_state`] returns in the superradiant phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Seed {
    /// The parity eigenstate (Π = −1), a symmetric cat of the two wells.
    #[default]
    Symmetric,
    /// Equal superposition of the two doublet members, localized at +α_g
    /// (x type) or +β_g (p type).
    Broken,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateOptions {
    /// Relative energy change per unit imaginary time that ends a stage.
    pub energy_tol: f64,
    /// Largest accepted ‖Hψ − Eψ‖ after relaxation.
    pub residual_tol: f64,
    /// Cap on the total number of imaginary-time steps.
    pub max_iter: usize,
    /// Imaginary-time steps, used in order.
    pub dtau_stages: Vec<f64>,
    /// Imaginary time between energy checks.
    pub check_interval: f64,
    pub seed: Seed,
}

impl Default for GroundStateOptions {
    fn default() -> Self {
        Self {
            energy_tol: 1e-12,
            residual_tol: 1e-6,
            max_iter: 2_000_000,
            dtau_stages: vec![1e-3, 1e-4],
            check_interval: 0.5,
            seed: Seed::Symmetric,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundStateResult {
    pub state: SpinorState,
    pub energy: f64,
    pub residual: f64,
    pub iterations: usize,
    /// Energy after every check, in order.
    pub energy_trace: Vec<f64>,
}

/// Total density |ψ₁|² + |ψ₂|² over the grid.
pub fn density(state: &SpinorState) -> Vec<f64> {
    state.density()
}

/// Seed in the parity sector `sector` (±1): a Gaussian or a two-packet
/// superposition at the analytic displacement, attached to |−⟩.
fn seed_state(params: &ModelParams, grid: &Grid, sector: f64) -> Result<SpinorState> {
    let osc = analytics::effective_oscillator(params)?;
    // Π acts as −1 on (φ_R + φ_L)|−⟩ and +1 on (φ_R − φ_L)|−⟩.
    let sign = -sector;
    let orbital: Vec<Complex64> = match osc.phase {
        PhaseLabel::Normal => {
            // At exactly g_c the analytic width vanishes; any broad profile relaxes.
            let alpha = if osc.width > 0.0 { osc.width } else { 0.5 };
            gaussian_orbital(grid, alpha, 0.0, 0.0)?
        }
        PhaseLabel::SuperradiantX | PhaseLabel::SuperradiantP => {
            let d = osc.displacement;
            let (right, left) = if osc.phase == PhaseLabel::SuperradiantX {
                (
                    gaussian_orbital(grid, osc.width, d, 0.0)?,
                    gaussian_orbital(grid, osc.width, -d, 0.0)?,
                )
            } else {
                (
                    gaussian_orbital(grid, osc.width, 0.0, d)?,
                    gaussian_orbital(grid, osc.width, 0.0, -d)?,
                )
            };
            right.iter().zip(&left).map(|(a, b)| a + sign * b).collect()
        }
    };
    let mut state = SpinorState::with_spin_minus(&orbital);
    state.normalize(grid)?;
    Ok(state)
}

/// ‖Hψ − Eψ‖ in the grid L² norm, with E the Rayleigh quotient.
pub fn residual(params: &ModelParams, state: &SpinorState, grid: &Grid) -> Result<(f64, f64)> {
    let psi = state.to_basis(SpinBasis::SigmaZ);
    let h = apply_hamiltonian(params, &psi, grid)?;
    let e = psi.inner(&h, grid).re / psi.norm_sqr(grid);
    let r = h.combine(Complex64::new(1.0, 0.0), &psi, Complex64::new(-e, 0.0));
    Ok((e, r.norm_sqr(grid).sqrt()))
}

/// (ψ + s·Πψ)/2, keeping ψ inside the sector Π = s.
fn project(state: &SpinorState, grid: &Grid, sector: f64) -> SpinorState {
    let image = state.parity_image(grid);
    state.combine(
        Complex64::new(0.5, 0.0),
        &image,
        Complex64::new(0.5 * sector, 0.0),
    )
}

struct Relaxed {
    state: SpinorState,
    iterations: usize,
    last_change: f64,
    trace: Vec<f64>,
}

/// Imaginary-time relaxation inside one parity sector. Projecting after
/// every step stops round-off in the other sector from being amplified
/// while the seed is still far above the ground energy.
fn relax(
    params: &ModelParams,
    grid: &Grid,
    opts: &GroundStateOptions,
    sector: f64,
) -> Result<Relaxed> {
    let mut state = seed_state(params, grid, sector)?;
    let scales = params.scales();
    let mut e_prev = model::energy(params, &state, grid)?;
    let mut trace = vec![e_prev];
    let mut iterations = 0usize;
    let mut last_change = f64::INFINITY;

    for &dtau in &opts.dtau_stages {
        let mut stepper = SplitStepper::new(grid, params, Clock::Imaginary, dtau);
        let per_check = ((opts.check_interval / dtau).round() as usize).max(1);
        loop {
            for _ in 0..per_check {
                stepper.step(&mut state, scales.xi, scales.xi_prime);
                state = project(&state, grid, sector);
                state.normalize(grid)?;
            }
            iterations += per_check;
            let e = model::energy(params, &state, grid)?;
            trace.push(e);
            last_change = (e - e_prev).abs() / (per_check as f64 * dtau) / e.abs().max(1.0);
            e_prev = e;
            if last_change < opts.energy_tol {
                break;
            }
            if iterations >= opts.max_iter {
                return Err(RabiError::NotConverged {
                    iterations,
                    last_change,
                });
            }
        }
    }
    let state = polish(params, grid, state, sector, 0.1 * opts.residual_tol)?;
    Ok(Relaxed {
        state,
        iterations,
        last_change,
        trace,
    })
}

/// Restarted Lanczos refinement with the exact grid Hamiltonian. Removes
/// the O(dτ²) splitting bias that imaginary-time relaxation leaves in the
/// high-energy components, then re-projects onto the parity sector.
fn polish(
    params: &ModelParams,
    grid: &Grid,
    state: SpinorState,
    sector: f64,
    tol: f64,
) -> Result<SpinorState> {
    const KRYLOV: usize = 24;
    const RESTARTS: usize = 12;
    let one = Complex64::new(1.0, 0.0);
    let mut psi = state.to_basis(SpinBasis::SigmaZ);
    for _ in 0..RESTARTS {
        psi.normalize(grid)?;
        if residual(params, &psi, grid)?.1 <= tol {
            break;
        }
        let mut basis = vec![psi.clone()];
        let mut alpha = Vec::with_capacity(KRYLOV);
        let mut beta: Vec<f64> = Vec::with_capacity(KRYLOV);
        for j in 0..KRYLOV {
            let mut w = apply_hamiltonian(params, &basis[j], grid)?;
            alpha.push(basis[j].inner(&w, grid).re);
            // Full reorthogonalization, twice for stability.
            for _ in 0..2 {
                for v in &basis {
                    let c = v.inner(&w, grid);
                    w = w.combine(one, v, -c);
                }
            }
            let b = w.norm_sqr(grid).sqrt();
            if j + 1 == KRYLOV || b < 1e-12 {
                break;
            }
            beta.push(b);
            w.scale(Complex64::new(1.0 / b, 0.0));
            basis.push(w);
        }
        let m = alpha.len();
        let t = nalgebra::DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let low = eig.eigenvalues.imin();
        let mut next = SpinorState::zeros(psi.len());
        for (i, v) in basis.iter().take(m).enumerate() {
            next = next.combine(one, v, Complex64::new(eig.eigenvectors[(i, low)], 0.0));
        }
        psi = project(&next, grid, sector);
    }
    psi.normalize(grid)?;
    Ok(psi)
}

/// ⟨a|x|b⟩ and ⟨a|p|b⟩.
fn quadrature_elements(a: &SpinorState, b: &SpinorState, grid: &Grid) -> (Complex64, Complex64) {
    let a = a.to_basis(SpinBasis::SigmaZ);
    let b = b.to_basis(SpinBasis::SigmaZ);
    let mut x_elem = Complex64::new(0.0, 0.0);
    for (j, &x) in grid.x().iter().enumerate() {
        x_elem += (a.up[j].conj() * b.up[j] + a.down[j].conj() * b.down[j]) * x;
    }
    let spectral = |v: &[Complex64]| {
        let mut v = v.to_vec();
        grid.forward(&mut v);
        v
    };
    let (au, ad, bu, bd) = (
        spectral(&a.up),
        spectral(&a.down),
        spectral(&b.up),
        spectral(&b.down),
    );
    let mut p_elem = Complex64::new(0.0, 0.0);
    for (m, &k) in grid.k().iter().enumerate() {
        p_elem += (au[m].conj() * bu[m] + ad[m].conj() * bd[m]) * k;
    }
    (x_elem * grid.dx(), p_elem * grid.dx() / grid.len() as f64)
}

pub fn ground_state(
    params: &ModelParams,
    grid: &Grid,
    opts: &GroundStateOptions,
) -> Result<GroundStateResult> {
    params.validate()?;
    if opts.dtau_stages.is_empty() || opts.dtau_stages.iter().any(|&d| !(d > 0.0)) {
        return Err(RabiError::InvalidParams(
            "dtau_stages must be positive and non-empty".into(),
        ));
    }
    let phase = analytics::phase_label(params)?;
    let odd = relax(params, grid, opts, -1.0)?;
    let (state, iterations, last_change, trace) =
        if opts.seed == Seed::Broken && phase.is_superradiant() {
            let even = relax(params, grid, opts, 1.0)?;
            let (xe, pe) = quadrature_elements(&odd.state, &even.state, grid);
            // The cross term 2 Re(c·m) is the displaced quadrature; this phase maximizes it.
            let m = if phase == PhaseLabel::SuperradiantX {
                xe
            } else {
                pe
            };
            let c = m.conj() / m.norm();
            let mut broken = odd.state.combine(Complex64::new(1.0, 0.0), &even.state, c);
            broken.normalize(grid)?;
            let mut trace = odd.trace;
            trace.extend(even.trace);
            (
                broken,
                odd.iterations + even.iterations,
                odd.last_change.max(even.last_change),
                trace,
            )
        } else {
            (odd.state, odd.iterations, odd.last_change, odd.trace)
        };

    let (energy, residual) = residual(params, &state, grid)?;
    if residual > opts.residual_tol {
        return Err(RabiError::NotConverged {
            iterations,
            last_change: residual.max(last_change),
        });
    }
    Ok(GroundStateResult {
        state,
        energy,
        residual,
        iterations,
        energy_trace: trace,
    })
}

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Lowest eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    /// E₁ − E₀.
    pub gap_normal: f64,
    /// E₁ − E₀ in the normal phase, E₂ − E₀ in the superradiant phases.
    pub gap_physical: f64,
    /// ⟨σ_x (−1)^{a†a}⟩ for each returned eigenstate.
    pub parity_markers: Vec<f64>,
    pub n_max: usize,
}

/// Photon-number cutoff from the expected occupation: 4⟨n⟩ + 50.
pub fn default_cutoff(params: &ModelParams) -> usize {
    let shift = analytics::displacement(params).unwrap_or(0.0);
    let fluct = analytics::variances(params)
        .map(|v| ((v.dx * v.dx + v.dp * v.dp - 1.0) / 2.0).max(0.0))
        .unwrap_or(0.0);
    let photons = shift * shift / 2.0 + fluct;
    (4.0 * photons).ceil() as usize + 50
}

/// Lowest `k` levels at cutoff `n_max`, failing if extending the cutoff by
/// 20 moves any of the three lowest levels by 1e-8 or more.
pub fn spectrum(params: &ModelParams, n_max: usize, k: usize) -> Result<SpectrumResult> {
    let k = k.max(3);
    let phase = analytics::phase_label(params)?;
    let h = fock_hamiltonian(params, n_max)?;
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let k = k.min(order.len());

    let check = fock_hamiltonian(params, n_max + 20)?.symmetric_eigenvalues();
    let mut reference: Vec<f64> = check.iter().copied().collect();
    reference.sort_by(f64::total_cmp);
    let shift = (0..3)
        .map(|i| (eig.eigenvalues[order[i]] - reference[i]).abs())
        .fold(0.0, f64::max);
    if shift >= 1e-8 {
        return Err(RabiError::CutoffNotConverged { n_max, shift });
    }

    let n = n_max + 1;
    let eigenvalues: Vec<f64> = order[..k].iter().map(|&i| eig.eigenvalues[i]).collect();
    let parity_markers = order[..k]
        .iter()
        .map(|&i| {
            let v = eig.eigenvectors.column(i);
            2.0 * (0..n)
                .map(|m| if m % 2 == 0 { 1.0 } else { -1.0 } * v[m] * v[n + m])
                .sum::<f64>()
        })
        .collect();
    let gap_normal = eigenvalues[1] - eigenvalues[0];
    let gap_physical = if phase.is_superradiant() {
        eigenvalues[2] - eigenvalues[0]
    } else {
        gap_normal
    };
    Ok(SpectrumResult {
        eigenvalues,
        gap_normal,
        gap_physical,
        parity_markers,
        n_max,
    })
}

/// [`spectrum`] starting from [`default_cutoff`] and raising the cutoff in
/// steps of 20 until converged or `max_n` is exceeded.
pub fn converged_spectrum(params: &ModelParams, k: usize, max_n: usize) -> Result<SpectrumResult> {
    let mut n_max = default_cutoff(params);
    loop {
        match spectrum(params, n_max, k) {
            Err(RabiError::CutoffNotConverged { .. }) if n_max + 20 <= max_n => n_max += 20,
            other => return other,
        }
    }
}
