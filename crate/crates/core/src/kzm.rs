//! Kibble-Zurek analysis of quench time series: freeze detection, the
//! phase-transition delay, frozen length scales, power-law fits and the
//! exponents (ν, z) they imply.
//!
//! With b_d ∝ τ_Q^a and ζ̂ ∝ τ_Q^b the exponents follow from
//! a = −1/(1+νz) and b = ν/(1+νz):
//! νz = −1/a − 1, ν = −b/a, z = (1+a)/b.

use std::io::Write;

use rayon::prelude::*;

use crate::dynamics::{evolve, EvolveOptions, QuenchSchedule, Sample, Stop, TimeSeries};
use crate::error::{RabiError, Result};
use crate::io::{csv_writer, fmt_float};
use crate::model::{Grid, ModelParams};
use crate::solver::GroundStateOptions;

pub const SCAN_HEADER: [&str; 6] = [
    "lambda",
    "tau_q",
    "t_hat",
    "b_d",
    "length_at_freeze",
    "length_kind",
];
pub const EXPONENT_HEADER: [&str; 9] = [
    "lambda",
    "z",
    "z_err",
    "nu",
    "nu_err",
    "slope_delay",
    "slope_length",
    "r2_delay",
    "r2_length",
];

/// Minimum number of samples between t_c and the threshold crossing.
const MIN_SAMPLES: usize = 10;

/// The quadrature playing the role of the diverging length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LengthKind {
    /// Δx, for λ > 0.
    Dx,
    /// Δp, for λ < 0.
    Dp,
}

impl LengthKind {
    pub fn for_lambda(lambda: f64) -> Self {
        if lambda > 0.0 {
            LengthKind::Dx
        } else {
            LengthKind::Dp
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LengthKind::Dx => "dx",
            LengthKind::Dp => "dp",
        }
    }

    fn of(self, sample: &Sample) -> f64 {
        match self {
            LengthKind::Dx => sample.dx,
            LengthKind::Dp => sample.dp,
        }
    }
}

/// Where along the trajectory the frozen length is read off.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum LengthInstant {
    /// At the critical crossing t_c, the centre of the impulse window.
    #[default]
    Critical,
    /// At the interpolated threshold crossing t_c + t̂.
    Freeze,
    /// At a fixed signed distance s.
    AtS(f64),
}

impl LengthInstant {
    pub fn as_str(self) -> String {
        match self {
            LengthInstant::Critical => "critical".into(),
            LengthInstant::Freeze => "freeze".into(),
            LengthInstant::AtS(s) => format!("s={s}"),
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text.trim() {
            "critical" => Some(LengthInstant::Critical),
            "freeze" => Some(LengthInstant::Freeze),
            other => other
                .strip_prefix("s=")
                .and_then(|v| v.parse().ok())
                .map(LengthInstant::AtS),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreezeEvent {
    /// Time from t_c to the threshold crossing.
    pub t_hat: f64,
    pub s_hat: f64,
    /// |g̃(t̂) − g̃_c| / g̃_c = |s_hat|.
    pub b_d: f64,
    pub length_at_freeze: f64,
    pub length_kind: LengthKind,
}

fn interpolate(samples: &[Sample], t: f64, value: impl Fn(&Sample) -> f64) -> Option<f64> {
    let i = samples.partition_point(|s| s.t < t);
    if i == samples.len() {
        return None;
    }
    if i == 0 {
        return (samples[0].t == t).then(|| value(&samples[0]));
    }
    let (a, b) = (&samples[i - 1], &samples[i]);
    let f = (t - a.t) / (b.t - a.t);
    Some(value(a) + f * (value(b) - value(a)))
}

/// First upward crossing of `n_fix` after t_c, with the length read at the
/// default instant (t_c).
pub fn freeze_time(series: &TimeSeries, n_fix: f64) -> Result<FreezeEvent> {
    freeze_event(series, n_fix, LengthInstant::default())
}

pub fn freeze_event(
    series: &TimeSeries,
    n_fix: f64,
    instant: LengthInstant,
) -> Result<FreezeEvent> {
    let samples = &series.samples;
    let start = samples.partition_point(|s| s.t <= series.t_c);
    if start == samples.len() {
        return Err(RabiError::NoCrossing { n_fix });
    }
    if start > 0 && samples[start - 1].n_c > n_fix || samples[start].n_c > n_fix {
        return Err(RabiError::CrossingBeforeCritical { n_fix });
    }
    let offset = samples[start..]
        .iter()
        .position(|s| s.n_c > n_fix)
        .ok_or(RabiError::NoCrossing { n_fix })?;
    if offset < MIN_SAMPLES {
        return Err(RabiError::Undersampled { samples: offset });
    }
    let (a, b) = (&samples[start + offset - 1], &samples[start + offset]);
    let f = (n_fix - a.n_c) / (b.n_c - a.n_c);
    let t_cross = a.t + f * (b.t - a.t);
    let s_hat = a.s + f * (b.s - a.s);
    let kind = LengthKind::for_lambda(series.lambda);
    let t_len = match instant {
        LengthInstant::Critical => series.t_c,
        LengthInstant::Freeze => t_cross,
        LengthInstant::AtS(s) => series.t_c + s * series.tau_q,
    };
    let length = interpolate(samples, t_len, |s| kind.of(s)).ok_or_else(|| {
        RabiError::InvalidParams(format!(
            "length instant t = {t_len} lies outside the series"
        ))
    })?;
    Ok(FreezeEvent {
        t_hat: t_cross - series.t_c,
        s_hat,
        b_d: s_hat.abs(),
        length_at_freeze: length,
        length_kind: kind,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub slope: f64,
    /// Intercept of log10 y against log10 x.
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

/// Ordinary least squares of log10 y on log10 x.
pub fn loglog_fit(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(RabiError::TooFewPoints(points.len()));
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(RabiError::NonPositive { x, y });
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.log10()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.log10()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(RabiError::InvalidParams("all x values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let slope_stderr = (sse / (n - 2.0) / sxx).sqrt();
    let r_squared = if syy > 0.0 {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(ScalingFit {
        slope,
        intercept,
        slope_stderr,
        r_squared,
        n_points: points.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentReport {
    pub lambda: f64,
    pub z: f64,
    pub z_err: f64,
    pub nu: f64,
    pub nu_err: f64,
    pub slope_delay: f64,
    pub slope_length: f64,
    pub r2_delay: f64,
    pub r2_length: f64,
}

impl ExponentReport {
    pub const TARGET_Z: f64 = 2.0;
    pub const TARGET_NU: f64 = 0.25;
}

pub fn extract_exponents(
    lambda: f64,
    fit_delay: &ScalingFit,
    fit_length: &ScalingFit,
) -> Result<ExponentReport> {
    let (a, b) = (fit_delay.slope, fit_length.slope);
    let (sa, sb) = (fit_delay.slope_stderr, fit_length.slope_stderr);
    if !(a < 0.0) {
        return Err(RabiError::NonPhysical(format!(
            "delay slope {a} must be negative"
        )));
    }
    let nu_z = -1.0 / a - 1.0;
    let nu = -b / a;
    if !(nu > 0.0) {
        return Err(RabiError::NonPhysical(format!(
            "nu = {nu} must be positive"
        )));
    }
    if !(nu_z > 0.0) {
        return Err(RabiError::NonPhysical(format!(
            "nu z = {nu_z} must be positive"
        )));
    }
    let z = (1.0 + a) / b;
    let nu_err = ((b / (a * a) * sa).powi(2) + (sb / a).powi(2)).sqrt();
    let z_err = ((sa / b).powi(2) + ((1.0 + a) / (b * b) * sb).powi(2)).sqrt();
    Ok(ExponentReport {
        lambda,
        z,
        z_err,
        nu,
        nu_err,
        slope_delay: a,
        slope_length: b,
        r2_delay: fit_delay.r_squared,
        r2_length: fit_length.r_squared,
    })
}

/// Pairwise sup-distance between n_c curves in the rescaled time
/// u = (t − t_c)/τ_Q^exponent, over u ∈ [0, u*] where u* is the earliest
/// rescaled threshold crossing among the curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Collapse {
    pub distance: f64,
    pub window: (f64, f64),
}

pub fn collapse(series: &[&TimeSeries], n_fix: f64, exponent: f64) -> Result<Collapse> {
    if series.len() < 2 {
        return Err(RabiError::TooFewPoints(series.len()));
    }
    const POINTS: usize = 400;
    let mut curves = Vec::with_capacity(series.len());
    let mut u_hi = f64::INFINITY;
    for ts in series {
        let scale = ts.tau_q.powf(exponent);
        let curve: Vec<Sample> = ts
            .samples
            .iter()
            .map(|s| Sample {
                t: (s.t - ts.t_c) / scale,
                ..*s
            })
            .collect();
        let ev = freeze_event(ts, n_fix, LengthInstant::Freeze)?;
        u_hi = u_hi.min(ev.t_hat / scale);
        curves.push(curve);
    }
    let mut distance: f64 = 0.0;
    for k in 0..POINTS {
        let u = u_hi * k as f64 / (POINTS - 1) as f64;
        let values: Vec<f64> = curves
            .iter()
            .map(|c| interpolate(c, u, |s| s.n_c).unwrap_or(f64::NAN))
            .collect();
        for i in 0..values.len() {
            for j in i + 1..values.len() {
                distance = distance.max((values[i] - values[j]).abs());
            }
        }
    }
    Ok(Collapse {
        distance,
        window: (0.0, u_hi),
    })
}

/// (λ, τ_Q) scan specification.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub lambdas: Vec<f64>,
    pub tau_qs: Vec<f64>,
    pub omega: f64,
    pub big_omega: f64,
    pub half_width: f64,
    pub n_points: usize,
    pub dt: f64,
    pub observer_stride: usize,
    pub eps_start: f64,
    pub eps_end: f64,
    pub n_fix: f64,
    /// Runs stop a few samples after n_c passes this value (at least `n_fix`).
    pub stop_n_c: f64,
    pub length_instant: LengthInstant,
    pub keep_series: bool,
}

impl ScanConfig {
    /// λ ∈ {±0.5, ±1, ±1.5, ±2}, ω = 1, Ω = 1000, τ_Q at 7 points over 10^[1, 2.5].
    pub fn standard() -> Self {
        Self {
            lambdas: vec![-2.0, -1.5, -1.0, -0.5, 0.5, 1.0, 1.5, 2.0],
            tau_qs: log_spaced(1.0, 2.5, 7),
            omega: 1.0,
            big_omega: 1000.0,
            half_width: Grid::DEFAULT_HALF_WIDTH,
            n_points: Grid::DEFAULT_POINTS,
            dt: crate::dynamics::default_dt(1000.0),
            observer_stride: 50,
            eps_start: -1.0,
            eps_end: 1.0,
            n_fix: 5.0,
            stop_n_c: 5.0,
            length_instant: LengthInstant::Critical,
            keep_series: false,
        }
    }
}

/// `count` points 10^e with e evenly spaced over [lo, hi].
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![10f64.powf(lo)],
        _ => (0..count)
            .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (count - 1) as f64))
            .collect(),
    }
}

#[derive(Debug)]
pub struct ScanRow {
    pub lambda: f64,
    pub tau_q: f64,
    pub event: Result<FreezeEvent>,
    pub series: Option<TimeSeries>,
    pub max_norm_drift: f64,
}

#[derive(Debug)]
pub struct LambdaSummary {
    pub lambda: f64,
    pub fit_delay: Result<ScalingFit>,
    pub fit_length: Result<ScalingFit>,
    pub exponents: Result<ExponentReport>,
}

#[derive(Debug)]
pub struct ScanReport {
    pub rows: Vec<ScanRow>,
    pub summaries: Vec<LambdaSummary>,
}

impl ScanReport {
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.event.is_err()).count()
    }

    pub fn write_rows_csv(&self, w: &mut dyn Write) -> Result<()> {
        let mut out = csv_writer(w);
        out.write_record(SCAN_HEADER)?;
        for row in &self.rows {
            if let Ok(ev) = &row.event {
                out.write_record([
                    fmt_float(row.lambda),
                    fmt_float(row.tau_q),
                    fmt_float(ev.t_hat),
                    fmt_float(ev.b_d),
                    fmt_float(ev.length_at_freeze),
                    ev.length_kind.as_str().to_string(),
                ])?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_exponents_csv(&self, w: &mut dyn Write) -> Result<()> {
        let mut out = csv_writer(w);
        out.write_record(EXPONENT_HEADER)?;
        for s in &self.summaries {
            if let Ok(r) = &s.exponents {
                out.write_record(
                    [
                        r.lambda,
                        r.z,
                        r.z_err,
                        r.nu,
                        r.nu_err,
                        r.slope_delay,
                        r.slope_length,
                        r.r2_delay,
                        r.r2_length,
                    ]
                    .map(fmt_float),
                )?;
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Failed rows and failed per-λ fits, one `lambda,tau_q,error` line each
    /// (`tau_q` empty for fit failures).
    pub fn write_errors_csv(&self, w: &mut dyn Write) -> Result<()> {
        let mut out = csv_writer(w);
        out.write_record(["lambda", "tau_q", "error"])?;
        for row in &self.rows {
            if let Err(e) = &row.event {
                out.write_record([fmt_float(row.lambda), fmt_float(row.tau_q), e.to_string()])?;
            }
        }
        for s in &self.summaries {
            if let Err(e) = &s.exponents {
                out.write_record([fmt_float(s.lambda), String::new(), e.to_string()])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Runs one quench for (λ, τ_Q) with the scan settings.
pub fn run_one(config: &ScanConfig, lambda: f64, tau_q: f64) -> Result<TimeSeries> {
    let grid = Grid::new(config.half_width, config.n_points)?;
    let params = ModelParams::new(config.omega, config.big_omega, lambda, 0.0)?;
    let schedule = QuenchSchedule::new(params, tau_q, config.eps_start, config.eps_end)?;
    let opts = EvolveOptions {
        dt: config.dt,
        observer_stride: config.observer_stride,
        snapshot_times: Vec::new(),
        stop: Stop::AfterCrossing {
            n_c: config.stop_n_c.max(config.n_fix),
            extra: 2,
        },
        norm_tol: 1e-8,
        edge_tol: 1e-6,
        ground: GroundStateOptions::default(),
    };
    Ok(evolve(&schedule, &grid, &opts)?.series)
}

/// Fits and exponents for each λ from the rows that succeeded.
pub fn summarize(rows: &[ScanRow], lambdas: &[f64]) -> Vec<LambdaSummary> {
    let mut lambdas = lambdas.to_vec();
    lambdas.sort_by(f64::total_cmp);
    lambdas.dedup();
    lambdas
        .into_iter()
        .map(|lambda| {
            let events: Vec<(f64, FreezeEvent)> = rows
                .iter()
                .filter(|r| r.lambda == lambda)
                .filter_map(|r| r.event.as_ref().ok().map(|e| (r.tau_q, *e)))
                .collect();
            let delay: Vec<(f64, f64)> = events.iter().map(|(t, e)| (*t, e.b_d)).collect();
            let length: Vec<(f64, f64)> = events
                .iter()
                .map(|(t, e)| (*t, e.length_at_freeze))
                .collect();
            let exponents = loglog_fit(&delay)
                .and_then(|d| loglog_fit(&length).and_then(|l| extract_exponents(lambda, &d, &l)));
            LambdaSummary {
                lambda,
                fit_delay: loglog_fit(&delay),
                fit_length: loglog_fit(&length),
                exponents,
            }
        })
        .collect()
}

/// Runs every (λ, τ_Q) pair on `workers` threads (all cores if `None`).
/// Row order is sorted by (λ, τ_Q) and does not depend on scheduling.
pub fn scan(config: &ScanConfig, workers: Option<usize>) -> Result<ScanReport> {
    if config.lambdas.is_empty() || config.tau_qs.is_empty() {
        return Err(RabiError::InvalidParams(
            "scan needs at least one lambda and one tau_q".into(),
        ));
    }
    let mut tasks: Vec<(f64, f64)> = config
        .lambdas
        .iter()
        .flat_map(|&l| config.tau_qs.iter().map(move |&t| (l, t)))
        .collect();
    tasks.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    tasks.dedup();

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| RabiError::InvalidParams(format!("cannot start worker pool: {e}")))?;
    let rows: Vec<ScanRow> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(lambda, tau_q)| {
                let series = run_one(config, lambda, tau_q);
                let (event, drift, series) = match series {
                    Ok(ts) => {
                        let ev = freeze_event(&ts, config.n_fix, config.length_instant);
                        let drift = ts.max_norm_drift();
                        (ev, drift, config.keep_series.then_some(ts))
                    }
                    Err(e) => (Err(e), f64::NAN, None),
                };
                ScanRow {
                    lambda,
                    tau_q,
                    event,
                    series,
                    max_norm_drift: drift,
                }
            })
            .collect()
    });
    let summaries = summarize(&rows, &config.lambdas);
    Ok(ScanReport { rows, summaries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn synthetic(t_c: f64, stride: f64, f: impl Fn(f64) -> f64) -> TimeSeries {
        let samples = (0..4000)
            .map(|i| {
                let t = i as f64 * stride;
                Sample {
                    t,
                    s: -1.0 + t / t_c,
                    g_tilde: 0.0,
                    n_c: f(t),
                    dx: 1.0 + t,
                    dp: 2.0 + t,
                    mean_x: 0.0,
                    mean_p: 0.0,
                    norm: 1.0,
                    energy: 0.0,
                }
            })
            .collect();
        TimeSeries {
            lambda: 1.0,
            tau_q: t_c,
            t_c,
            samples,
        }
    }

    #[test]
    fn quadratic_crossing() {
        let t_c = 10.0;
        let stride = 0.01;
        let ts = synthetic(
            t_c,
            stride,
            |t| if t > t_c { (t - t_c).powi(2) } else { 0.0 },
        );
        let ev = freeze_event(&ts, 5.0, LengthInstant::Freeze).unwrap();
        // Chord error of a parabola over one stride.
        assert!((ev.t_hat - 5f64.sqrt()).abs() < stride * stride);
        assert_relative_eq!(ev.b_d, ev.t_hat / t_c, epsilon = 1e-12);
        assert_relative_eq!(ev.length_at_freeze, 1.0 + t_c + ev.t_hat, epsilon = 1e-9);
        let at_c = freeze_time(&ts, 5.0).unwrap();
        assert_relative_eq!(at_c.length_at_freeze, 1.0 + t_c, epsilon = 1e-9);
        let at_s = freeze_event(&ts, 5.0, LengthInstant::AtS(0.1)).unwrap();
        assert_relative_eq!(at_s.length_at_freeze, 1.0 + 11.0, epsilon = 1e-9);
    }

    #[test]
    fn crossing_errors() {
        let never = synthetic(10.0, 0.01, |t| t * 1e-4);
        assert!(matches!(
            freeze_time(&never, 5.0),
            Err(RabiError::NoCrossing { .. })
        ));
        let early = synthetic(10.0, 0.01, |t| t);
        assert!(matches!(
            freeze_time(&early, 5.0),
            Err(RabiError::CrossingBeforeCritical { .. })
        ));
        let coarse = synthetic(10.0, 0.5, |t| if t > 10.0 { 5.0 * (t - 10.0) } else { 0.0 });
        assert!(matches!(
            freeze_time(&coarse, 5.0),
            Err(RabiError::Undersampled { .. })
        ));
    }

    #[test]
    fn length_kind_follows_lambda_sign() {
        let mut ts = synthetic(
            10.0,
            0.01,
            |t| if t > 10.0 { (t - 10.0).powi(2) } else { 0.0 },
        );
        ts.lambda = -0.5;
        let ev = freeze_time(&ts, 5.0).unwrap();
        assert_eq!(ev.length_kind, LengthKind::Dp);
        assert_relative_eq!(ev.length_at_freeze, 12.0, epsilon = 1e-9);
    }

    #[test]
    fn fit_examples() {
        let fit = loglog_fit(&[(1.0, 1.0), (10.0, 100.0), (100.0, 1e4)]).unwrap();
        assert_relative_eq!(fit.slope, 2.0, epsilon = 1e-12);
        assert_relative_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
        let flat = loglog_fit(&[(1.0, 3.0), (2.0, 3.0), (5.0, 3.0)]).unwrap();
        assert!(flat.slope.abs() < 1e-12);
        assert!(matches!(
            loglog_fit(&[(1.0, 1.0), (2.0, 2.0)]),
            Err(RabiError::TooFewPoints(2))
        ));
        assert!(matches!(
            loglog_fit(&[(1.0, 1.0), (2.0, -2.0), (3.0, 1.0)]),
            Err(RabiError::NonPositive { .. })
        ));
    }

    #[test]
    fn exponent_algebra() {
        let d = ScalingFit {
            slope: -2.0 / 3.0,
            intercept: 0.0,
            slope_stderr: 0.0,
            r_squared: 1.0,
            n_points: 7,
        };
        let l = ScalingFit {
            slope: 1.0 / 6.0,
            ..d
        };
        let r = extract_exponents(1.0, &d, &l).unwrap();
        assert_relative_eq!(r.nu, 0.25, epsilon = 1e-14);
        assert_relative_eq!(r.z, 2.0, epsilon = 1e-14);
        let bad = ScalingFit { slope: 0.1, ..d };
        assert!(matches!(
            extract_exponents(1.0, &bad, &l),
            Err(RabiError::NonPhysical(_))
        ));
        let neg = ScalingFit { slope: -0.1, ..d };
        assert!(matches!(
            extract_exponents(1.0, &d, &neg),
            Err(RabiError::NonPhysical(_))
        ));
    }

    #[test]
    fn instant_parsing() {
        assert_eq!(
            LengthInstant::parse("critical"),
            Some(LengthInstant::Critical)
        );
        assert_eq!(LengthInstant::parse("freeze"), Some(LengthInstant::Freeze));
        assert_eq!(
            LengthInstant::parse("s=0.05"),
            Some(LengthInstant::AtS(0.05))
        );
        assert_eq!(LengthInstant::parse("later"), None);
        for i in [
            LengthInstant::Critical,
            LengthInstant::Freeze,
            LengthInstant::AtS(0.25),
        ] {
            assert_eq!(LengthInstant::parse(&i.as_str()), Some(i));
        }
    }

    #[test]
    fn log_spacing() {
        let t = log_spaced(1.0, 2.5, 7);
        assert_eq!(t.len(), 7);
        assert_relative_eq!(t[0], 10.0, epsilon = 1e-12);
        assert_relative_eq!(t[6], 10f64.powf(2.5), epsilon = 1e-9);
        assert_relative_eq!(t[2], 10f64.powf(1.5), epsilon = 1e-9);
    }

    #[test]
    fn identical_curves_collapse_exactly() {
        let a = synthetic(
            10.0,
            0.01,
            |t| if t > 10.0 { (t - 10.0).powi(2) } else { 0.0 },
        );
        let c = collapse(&[&a, &a], 5.0, 2.0 / 3.0).unwrap();
        assert_eq!(c.distance, 0.0);
        assert!(c.window.1 > 0.0);
    }
}
