//! Subcommand drivers. Each one computes everything first, then writes its
//! files from this thread in a fixed order.

use std::io::Write;
use std::path::{Path, PathBuf};

use rabi_kzm::analytics::{excitation_gap, kz_prediction, phase_label};
use rabi_kzm::dynamics::{
    evolve, observe, Evolution, EvolveOptions, QuenchSchedule, Stop, TimeSeries,
};
use rabi_kzm::io::{fmt_float, write_file};
use rabi_kzm::kzm::{freeze_event, log_spaced, scan, LengthKind, ScanConfig, ScanReport};
use rabi_kzm::solver::{
    converged_spectrum, ground_state, GroundStateOptions, GroundStateResult, SpectrumResult,
};
use rabi_kzm::RabiError;
use rayon::prelude::*;

use crate::config::{Resolved, RunConfig};
use crate::plots::{self, Axes, Series};
use crate::{CliError, Command};

/// Largest n_max tried when converging an ED spectrum.
const ED_MAX_CUTOFF: usize = 2000;

pub fn run(command: Command, resolved: &Resolved) -> Result<(), CliError> {
    let cfg = &resolved.config;
    let pool = pool(cfg)?;
    std::fs::create_dir_all(&cfg.out)
        .map_err(|e| CliError::Output(format!("cannot create {}: {e}", cfg.out.display())))?;
    let result = pool.install(|| match command {
        Command::Ground => ground(cfg),
        Command::Gap => gap(cfg),
        Command::Quench => quench(cfg),
        Command::Kzscan => kzscan(cfg),
    });
    // The resolved config is written even when the run fails part way.
    let text = format!(
        "# rabi-kzm {} resolved configuration\n{}",
        command.name(),
        resolved.to_text()
    );
    std::fs::write(cfg.out.join("resolved_config.txt"), text)
        .map_err(|e| CliError::Output(format!("cannot write resolved config: {e}")))?;
    result
}

fn pool(cfg: &RunConfig) -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.workers {
        b = b.num_threads(n);
    }
    b.build()
        .map_err(|e| CliError::Config(format!("cannot start {:?} workers: {e}", cfg.workers)))
}

fn out(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.out.join(name)
}

fn write_rows(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), CliError> {
    write_file(path, |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(header)?;
        for row in rows {
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    })
    .map_err(CliError::from)
}

fn write_with(
    path: &Path,
    body: impl FnOnce(&mut dyn Write) -> rabi_kzm::Result<()>,
) -> Result<(), CliError> {
    write_file(path, body).map_err(CliError::from)
}

/// Short decimal tag for file names: 1.02 → "1.02", 31.6227766 → "31.62".
fn tag(x: f64) -> String {
    let s = format!("{x:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn ground_one(cfg: &RunConfig, ratio: f64) -> Result<GroundStateResult, CliError> {
    let params = cfg.params(cfg.lambda, cfg.big_omega, ratio);
    let opts = GroundStateOptions {
        seed: cfg.seed,
        ..GroundStateOptions::default()
    };
    ground_state(&params, &cfg.grid(), &opts).map_err(|e| {
        CliError::numerical(
            format!("ground state at lambda={}, g/g_c={ratio}", cfg.lambda),
            e,
        )
    })
}

fn ground(cfg: &RunConfig) -> Result<(), CliError> {
    let grid = cfg.grid();
    let states: Vec<GroundStateResult> = cfg
        .ratios
        .par_iter()
        .map(|&r| ground_one(cfg, r))
        .collect::<Result<_, _>>()?;
    let sweep_ratios: Vec<f64> = match cfg.sweep_points {
        0 => Vec::new(),
        1 => vec![0.0],
        n => {
            let hi = cfg.ratios.iter().copied().fold(1.5, f64::max);
            (0..n).map(|i| hi * i as f64 / (n - 1) as f64).collect()
        }
    };
    let sweep: Vec<Vec<f64>> = sweep_ratios
        .par_iter()
        .map(|&r| ground_one(cfg, r).map(|g| g.state.density()))
        .collect::<Result<_, _>>()?;

    let mut summary = Vec::new();
    for (&ratio, g) in cfg.ratios.iter().zip(&states) {
        let params = cfg.params(cfg.lambda, cfg.big_omega, ratio);
        let obs = observe(&g.state, &grid, &params)?;
        let rho = g.state.density();
        write_rows(
            &out(cfg, &format!("ground_density_{}.csv", tag(ratio))),
            &["x", "density"],
            grid.x()
                .iter()
                .zip(&rho)
                .map(|(x, r)| vec![fmt_float(*x), fmt_float(*r)]),
        )?;
        let phase = phase_label(&params)?;
        summary.push(vec![
            fmt_float(ratio),
            fmt_float(params.g_tilde),
            fmt_float(g.energy),
            fmt_float(g.residual),
            fmt_float(obs.mean_x),
            fmt_float(obs.mean_p),
            fmt_float(obs.dx),
            fmt_float(obs.dp),
            format!("{phase:?}"),
        ]);
    }
    write_rows(
        &out(cfg, "ground_summary.csv"),
        &[
            "ratio", "g_tilde", "energy", "residual", "mean_x", "mean_p", "dx", "dp", "phase",
        ],
        summary,
    )?;
    if !sweep.is_empty() {
        let header: Vec<String> = std::iter::once("ratio".to_string())
            .chain(grid.x().iter().map(|&x| fmt_float(x)))
            .collect();
        let rows = sweep_ratios.iter().zip(&sweep).map(|(r, rho)| {
            std::iter::once(fmt_float(*r))
                .chain(rho.iter().map(|&v| fmt_float(v)))
                .collect()
        });
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        write_rows(&out(cfg, "ground_sweep.csv"), &header, rows)?;
    }

    if cfg.plots {
        let series: Vec<Series> = cfg
            .ratios
            .iter()
            .zip(&states)
            .map(|(r, g)| {
                let pts = grid.x().iter().copied().zip(g.state.density()).collect();
                Series::line(format!("g/g_c = {r}"), pts)
            })
            .collect();
        let title = format!("ground-state density, lambda = {}", cfg.lambda);
        plots::xy(
            &out(cfg, "ground_density.svg"),
            &Axes {
                title: &title,
                x_label: "x",
                y_label: "density",
                log: false,
            },
            &series,
        )?;
        if !sweep.is_empty() {
            plots::heatmap(
                &out(cfg, "ground_sweep.svg"),
                &Axes {
                    title: &title,
                    x_label: "x",
                    y_label: "g/g_c",
                    log: false,
                },
                grid.x(),
                &sweep_ratios,
                &sweep,
            )?;
        }
    }
    Ok(())
}

fn gap(cfg: &RunConfig) -> Result<(), CliError> {
    let n = cfg.gap_points.max(2);
    let ratios: Vec<f64> = (0..n).map(|i| 2.0 * i as f64 / (n - 1) as f64).collect();
    let ed: Vec<Result<SpectrumResult, RabiError>> = ratios
        .par_iter()
        .map(|&r| {
            converged_spectrum(
                &cfg.params(cfg.lambda, cfg.ed_big_omega, r),
                4,
                ED_MAX_CUTOFF,
            )
        })
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut curve = Vec::new();
    let mut ed_points = Vec::new();
    for (&r, spec) in ratios.iter().zip(&ed) {
        let analytic = excitation_gap(&cfg.params(cfg.lambda, cfg.big_omega, r))?;
        let g_tilde = cfg.params(cfg.lambda, cfg.big_omega, r).g_tilde;
        curve.push((r, analytic));
        let (gap_ed, n_max, status) = match spec {
            Ok(s) => {
                ed_points.push((r, s.gap_physical));
                (
                    fmt_float(s.gap_physical),
                    s.n_max.to_string(),
                    "ok".to_string(),
                )
            }
            Err(e) => {
                failures.push(format!("g/g_c={r}: {e}"));
                (String::new(), String::new(), e.to_string())
            }
        };
        rows.push(vec![
            fmt_float(r),
            fmt_float(g_tilde),
            fmt_float(analytic),
            gap_ed,
            n_max,
            status,
        ]);
    }
    write_rows(
        &out(cfg, "gap.csv"),
        &[
            "ratio",
            "g_tilde",
            "gap_analytic",
            "gap_ed",
            "n_max",
            "status",
        ],
        rows,
    )?;

    let eps = log_spaced(-4.0, -1.0, cfg.inset_points);
    let mut inset = Vec::new();
    let mut inset_series = vec![Vec::new(), Vec::new()];
    for (k, (side, sign)) in [("normal", -1.0), ("superradiant", 1.0)]
        .into_iter()
        .enumerate()
    {
        for &e in &eps {
            let g = excitation_gap(&cfg.params(cfg.lambda, cfg.big_omega, 1.0 + sign * e))?;
            inset_series[k].push((e, g));
            inset.push(vec![side.to_string(), fmt_float(e), fmt_float(g)]);
        }
    }
    write_rows(
        &out(cfg, "gap_inset.csv"),
        &["side", "abs_eps", "gap_analytic"],
        inset,
    )?;

    if cfg.plots {
        let title = format!("excitation gap, lambda = {}", cfg.lambda);
        plots::xy(
            &out(cfg, "gap.svg"),
            &Axes {
                title: &title,
                x_label: "g/g_c",
                y_label: "gap / omega",
                log: false,
            },
            &[
                Series::line("analytic", curve),
                Series::points(format!("ED, Omega = {}", cfg.ed_big_omega), ed_points),
            ],
        )?;
        let [normal, superradiant] =
            <[Vec<(f64, f64)>; 2]>::try_from(inset_series).expect("two sides");
        plots::xy(
            &out(cfg, "gap_inset.svg"),
            &Axes {
                title: &title,
                x_label: "|eps|",
                y_label: "gap",
                log: true,
            },
            &[
                Series::line("normal", normal),
                Series::line("superradiant", superradiant),
            ],
        )?;
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Partial(format!(
            "ED did not converge at {} point(s): {}",
            failures.len(),
            failures.join("; ")
        )))
    }
}

fn quench_one(cfg: &RunConfig, tau_q: f64) -> Result<Evolution, CliError> {
    let context = || format!("quench at lambda={}, tau_q={tau_q}", cfg.lambda);
    let params = cfg.params(cfg.lambda, cfg.big_omega, 0.0);
    let schedule = QuenchSchedule::new(params, tau_q, cfg.eps_start, cfg.eps_end)
        .map_err(|e| CliError::numerical(context(), e))?;
    let duration = schedule.duration();
    let n = cfg.snapshots;
    let opts = EvolveOptions {
        dt: cfg.dt,
        observer_stride: cfg.observer_stride,
        snapshot_times: (0..n)
            .map(|i| {
                if n > 1 {
                    duration * i as f64 / (n - 1) as f64
                } else {
                    0.0
                }
            })
            .collect(),
        stop: Stop::End,
        ..EvolveOptions::new(cfg.big_omega)
    };
    evolve(&schedule, &cfg.grid(), &opts).map_err(|e| CliError::numerical(context(), e))
}

fn quench(cfg: &RunConfig) -> Result<(), CliError> {
    let runs: Vec<Evolution> = cfg
        .tau_q
        .par_iter()
        .map(|&t| quench_one(cfg, t))
        .collect::<Result<_, _>>()?;
    let mut summary = Vec::new();
    for (&tau_q, run) in cfg.tau_q.iter().zip(&runs) {
        let name = format!("quench_tau_{}", tag(tau_q));
        write_with(&out(cfg, &format!("{name}_series.csv")), |w| {
            run.series.write_csv(w)
        })?;
        if let Some(snap) = &run.snapshots {
            write_with(&out(cfg, &format!("{name}_density_long.csv")), |w| {
                snap.write_long_csv(w)
            })?;
            write_with(&out(cfg, &format!("{name}_density_matrix.csv")), |w| {
                snap.write_matrix_csv(w)
            })?;
        }
        let ev = freeze_event(&run.series, cfg.n_fix, cfg.length_instant);
        let (t_hat, b_d, length, kind) = match &ev {
            Ok(e) => (
                fmt_float(e.t_hat),
                fmt_float(e.b_d),
                fmt_float(e.length_at_freeze),
                e.length_kind.as_str(),
            ),
            Err(_) => (
                String::new(),
                String::new(),
                String::new(),
                LengthKind::for_lambda(cfg.lambda).as_str(),
            ),
        };
        summary.push(vec![
            fmt_float(cfg.lambda),
            fmt_float(tau_q),
            fmt_float(run.series.t_c),
            t_hat,
            b_d,
            length,
            kind.to_string(),
            fmt_float(run.series.max_norm_drift()),
        ]);
    }
    write_rows(
        &out(cfg, "quench_summary.csv"),
        &[
            "lambda",
            "tau_q",
            "t_c",
            "t_hat",
            "b_d",
            "length",
            "length_kind",
            "max_norm_drift",
        ],
        summary,
    )?;

    if cfg.plots {
        quench_plots(cfg, &runs)?;
    }
    Ok(())
}

fn quench_plots(cfg: &RunConfig, runs: &[Evolution]) -> Result<(), CliError> {
    let title = format!("photon number, lambda = {}", cfg.lambda);
    let raw: Vec<Series> = runs
        .iter()
        .map(|r| {
            let pts = r.series.samples.iter().map(|s| (s.t, s.n_c)).collect();
            Series::line(format!("tau_q = {}", tag(r.series.tau_q)), pts)
        })
        .collect();
    plots::xy(
        &out(cfg, "quench_nc.svg"),
        &Axes {
            title: &title,
            x_label: "t",
            y_label: "n_c",
            log: false,
        },
        &raw,
    )?;
    let slope = kz_prediction(0.25, 2.0)?.slope_freeze;
    let rescaled: Vec<Series> = runs
        .iter()
        .map(|r| {
            let scale = r.series.tau_q.powf(slope);
            let pts = r
                .series
                .samples
                .iter()
                .filter(|s| s.t >= r.series.t_c)
                .map(|s| ((s.t - r.series.t_c) / scale, s.n_c))
                .collect();
            Series::line(format!("tau_q = {}", tag(r.series.tau_q)), pts)
        })
        .collect();
    plots::xy(
        &out(cfg, "quench_nc_rescaled.svg"),
        &Axes {
            title: &title,
            x_label: "(t - t_c) / tau_q^(1/3)",
            y_label: "n_c",
            log: false,
        },
        &rescaled,
    )?;
    for r in runs {
        if let Some(snap) = &r.snapshots {
            let title = format!(
                "density, lambda = {}, tau_q = {}",
                cfg.lambda,
                tag(r.series.tau_q)
            );
            plots::heatmap(
                &out(
                    cfg,
                    &format!("quench_tau_{}_density.svg", tag(r.series.tau_q)),
                ),
                &Axes {
                    title: &title,
                    x_label: "x",
                    y_label: "t",
                    log: false,
                },
                &snap.x,
                &snap.times,
                &snap.densities,
            )?;
        }
    }
    Ok(())
}

fn scan_config(cfg: &RunConfig) -> ScanConfig {
    ScanConfig {
        lambdas: cfg.lambdas.clone(),
        tau_qs: cfg.tau_q.clone(),
        omega: cfg.omega,
        big_omega: cfg.big_omega,
        half_width: cfg.half_width,
        n_points: cfg.n_points,
        dt: cfg.dt,
        observer_stride: cfg.observer_stride,
        eps_start: cfg.eps_start,
        eps_end: cfg.eps_end,
        n_fix: cfg.n_fix,
        stop_n_c: cfg.stop_n_c,
        length_instant: cfg.length_instant,
        keep_series: true,
    }
}

/// Length scale against time since t_c, both divided by their predicted
/// τ_Q powers (ν = 1/4, z = 2).
fn rescaled_rows(report: &ScanReport) -> Result<Vec<Vec<String>>, CliError> {
    let pred = kz_prediction(0.25, 2.0)?;
    let mut rows = Vec::new();
    for row in &report.rows {
        let Some(series) = &row.series else { continue };
        let kind = LengthKind::for_lambda(row.lambda);
        let t_scale = row.tau_q.powf(pred.slope_freeze);
        let l_scale = row.tau_q.powf(pred.slope_length);
        for s in series.samples.iter().filter(|s| s.t >= series.t_c) {
            let length = match kind {
                LengthKind::Dx => s.dx,
                LengthKind::Dp => s.dp,
            };
            rows.push(vec![
                fmt_float(row.lambda),
                fmt_float(row.tau_q),
                fmt_float((s.t - series.t_c) / t_scale),
                fmt_float(length / l_scale),
            ]);
        }
    }
    Ok(rows)
}

fn kzscan(cfg: &RunConfig) -> Result<(), CliError> {
    let report =
        scan(&scan_config(cfg), cfg.workers).map_err(|e| CliError::numerical("scan", e))?;
    write_with(&out(cfg, "kz_scan.csv"), |w| report.write_rows_csv(w))?;
    write_with(&out(cfg, "kz_exponents.csv"), |w| {
        report.write_exponents_csv(w)
    })?;
    write_with(&out(cfg, "kz_errors.csv"), |w| report.write_errors_csv(w))?;
    write_rows(
        &out(cfg, "kz_rescaled.csv"),
        &["lambda", "tau_q", "rescaled_time", "rescaled_length"],
        rescaled_rows(&report)?,
    )?;
    let drifts: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                fmt_float(r.lambda),
                fmt_float(r.tau_q),
                fmt_float(r.max_norm_drift),
            ]
        })
        .collect();
    write_rows(
        &out(cfg, "kz_norm_drift.csv"),
        &["lambda", "tau_q", "max_norm_drift"],
        drifts,
    )?;

    if cfg.plots {
        scan_plots(cfg, &report)?;
    }
    let failed_fits = report
        .summaries
        .iter()
        .filter(|s| s.exponents.is_err())
        .count();
    let failed_rows = report.failed_rows();
    if failed_rows + failed_fits > 0 {
        return Err(CliError::Partial(format!(
            "{failed_rows} run(s) and {failed_fits} fit(s) failed; see kz_errors.csv"
        )));
    }
    Ok(())
}

fn series_of(series: &TimeSeries) -> Vec<(f64, f64)> {
    series
        .samples
        .iter()
        .map(|s| (s.t - series.t_c, s.n_c))
        .collect()
}

fn scan_plots(cfg: &RunConfig, report: &ScanReport) -> Result<(), CliError> {
    for (what, file) in [("b_d", "kz_delay.svg"), ("length", "kz_length.svg")] {
        let mut series = Vec::new();
        for s in &report.summaries {
            let pts: Vec<(f64, f64)> = report
                .rows
                .iter()
                .filter(|r| r.lambda == s.lambda)
                .filter_map(|r| r.event.as_ref().ok().map(|e| (r.tau_q, e)))
                .map(|(t, e)| {
                    (
                        t,
                        if what == "b_d" {
                            e.b_d
                        } else {
                            e.length_at_freeze
                        },
                    )
                })
                .collect();
            let fit = if what == "b_d" {
                &s.fit_delay
            } else {
                &s.fit_length
            };
            if let Ok(f) = fit {
                let line = pts
                    .iter()
                    .map(|&(t, _)| (t, 10f64.powf(f.intercept) * t.powf(f.slope)))
                    .collect();
                series.push(Series::line(
                    format!("lambda = {}, slope {:.3}", s.lambda, f.slope),
                    line,
                ));
            }
            series.push(Series::points("", pts));
        }
        plots::xy(
            &out(cfg, file),
            &Axes {
                title: &format!("{what} at freeze-out"),
                x_label: "tau_q",
                y_label: what,
                log: true,
            },
            &series,
        )?;
    }
    let onset: Vec<Series> = report
        .rows
        .iter()
        .filter_map(|r| {
            let s = r.series.as_ref()?;
            Some(Series::line(
                format!("lambda = {}, tau_q = {}", r.lambda, tag(r.tau_q)),
                series_of(s),
            ))
        })
        .take(8)
        .collect();
    plots::xy(
        &out(cfg, "kz_onset.svg"),
        &Axes {
            title: "photon number after the critical point",
            x_label: "t - t_c",
            y_label: "n_c",
            log: false,
        },
        &onset,
    )?;
    let _ = cfg;
    Ok(())
}
