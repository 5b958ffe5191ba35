use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use tumorflow_core::linear::{fit_growth_rate, linear_trajectory, theta_grid, write_trajectory_csv, ShapeState};
use tumorflow_core::nonlinear::{evolve_nonlinear, write_diagnostics_csv, Outcome, Snapshot};
use tumorflow_core::radial::{self, AppendixSeries};
use tumorflow_core::spectrum::{ModelParameters, Regime, SpectrumReport, SpectrumTable};
use tumorflow_core::NutrientModel;

use crate::config::{EvolveMode, RunConfig};
use crate::error::{CliError, CliResult};

fn out_dir(c: &RunConfig) -> CliResult<&Path> {
    fs::create_dir_all(&c.out).map_err(CliError::io(&c.out))?;
    Ok(&c.out)
}

fn write_with<F>(path: PathBuf, f: F) -> CliResult<()>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let file = File::create(&path).map_err(CliError::io(&path))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(CliError::io(&path))
}

fn write_json<T: Serialize>(path: PathBuf, value: &T) -> CliResult<()> {
    write_with(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(std::io::Error::from)?;
        writeln!(w)
    })
}

/// Parameters at `R` if given, else at the steady radius of `A`.
fn parameters(c: &RunConfig) -> CliResult<(ModelParameters, Option<f64>)> {
    let a = c.require_a()?;
    match c.r {
        Some(r) => Ok((ModelParameters::new(a, c.g, r, c.model.clone())?, None)),
        None => {
            let st = radial::steady_radius(a, &c.model, &c.solver)?;
            Ok((ModelParameters::new(a, c.g, st.radius, c.model.clone())?, Some(st.radius)))
        }
    }
}

#[derive(Serialize)]
struct SteadyReport<'a> {
    command: &'static str,
    model: &'a NutrientModel,
    a: f64,
    r_a: f64,
    alpha_a: f64,
    residual: f64,
    dv0_dr_at_1: f64,
    v0_at_0: f64,
    profile_file: &'static str,
}

pub fn steady(c: &RunConfig) -> CliResult<()> {
    let a = c.require_a()?;
    let st = radial::steady_radius(a, &c.model, &c.solver)?;
    let dir = out_dir(c)?;
    let p = &st.profile;
    write_with(dir.join("v0_profile.csv"), |w| {
        writeln!(w, "r,v0,dv0_dr")?;
        for ((r, v), d) in p.grid().iter().zip(p.values()).zip(p.slopes()) {
            writeln!(w, "{r:.16e},{v:.16e},{d:.16e}")?;
        }
        Ok(())
    })?;
    write_json(
        dir.join("report.json"),
        &SteadyReport {
            command: "steady",
            model: &c.model,
            a,
            r_a: st.radius,
            alpha_a: st.alpha,
            residual: st.residual,
            dv0_dr_at_1: p.deriv_at_1(),
            v0_at_0: p.value_at_0(),
            profile_file: "v0_profile.csv",
        },
    )?;
    println!("R_A = {:.12}  alpha_A = {:.12}", st.radius, st.alpha);
    Ok(())
}

#[derive(Serialize)]
struct SpectrumOutput {
    command: &'static str,
    /// Steady radius when `R` was not overridden.
    r_a: Option<f64>,
    /// `mu[k]` for `0 <= k <= k_max`.
    mu: Vec<f64>,
    #[serde(flatten)]
    report: SpectrumReport,
}

pub fn spectrum(c: &RunConfig) -> CliResult<()> {
    let (params, r_a) = parameters(c)?;
    let table = SpectrumTable::build(&params, c.k_max, &c.solver)?;
    let dir = out_dir(c)?;
    write_with(dir.join("spectrum.csv"), |w| table.write_csv(w))?;
    let report = table.report();
    match &report.g_star {
        Some(gs) => println!("G* = {:.10} at k0 = {}", gs.value, gs.k0),
        None => println!("G* unavailable: {}", report.g_star_error.as_deref().unwrap_or("")),
    }
    println!("regime: {:?}", report.classification.regime);
    write_json(
        dir.join("report.json"),
        &SpectrumOutput {
            command: "spectrum",
            r_a,
            mu: table.mu_values().to_vec(),
            report,
        },
    )
}

#[derive(Serialize)]
struct GrowthRow {
    k: usize,
    fitted_rate: f64,
    mu_k: f64,
    relative_error: f64,
    samples: usize,
}

#[derive(Serialize)]
struct EvolveReport<'a> {
    command: &'static str,
    mode: EvolveMode,
    model: &'a NutrientModel,
    a: f64,
    g: f64,
    r: f64,
    t_end: f64,
    outcome: Outcome,
    accepted_steps: usize,
    final_sup_norm: f64,
    fit_max_sup_norm: f64,
    growth: Vec<GrowthRow>,
}

fn growth_rows(c: &RunConfig, states: &[(f64, ShapeState)], table: &SpectrumTable) -> CliResult<Vec<GrowthRow>> {
    let mut ks: Vec<usize> = c.seed_shape.iter().map(|s| s.k).collect();
    ks.sort_unstable();
    ks.dedup();
    let mut rows = Vec::new();
    for k in ks {
        let series: Vec<(f64, f64)> = states
            .iter()
            .take_while(|(_, s)| s.sup_norm() <= c.fit_max_sup_norm)
            .map(|(t, s)| (*t, s.coeff(k as i64).norm()))
            .collect();
        if series.len() < 3 || series.iter().any(|(_, a)| *a <= 0.0) {
            continue;
        }
        let fit = fit_growth_rate(&series)?;
        let mu = table.mu(k as i64)?;
        rows.push(GrowthRow {
            k,
            fitted_rate: fit.rate,
            mu_k: mu,
            relative_error: (fit.rate - mu).abs() / mu.abs().max(f64::MIN_POSITIVE),
            samples: series.len(),
        });
    }
    Ok(rows)
}

pub fn evolve(c: &RunConfig) -> CliResult<()> {
    let (params, _) = parameters(c)?;
    let shape = ShapeState::from_seeds(&c.seed_shape, c.k_max, params.r)?;
    shape.check_admissible()?;
    let table = SpectrumTable::build(&params, c.k_max, &c.solver)?;
    let n_theta = c.grid.n_theta;
    let (states, snapshots, outcome, diagnostics) = match c.mode {
        EvolveMode::Linear => {
            let mut times: Vec<f64> =
                (0..c.samples).map(|i| c.t_end * i as f64 / (c.samples - 1) as f64).collect();
            let snap_times: Vec<f64> =
                c.stepper.snapshot_times.iter().copied().filter(|t| *t <= c.t_end).collect();
            times.extend(&snap_times);
            times.sort_by(f64::total_cmp);
            times.dedup();
            let states = linear_trajectory(&shape, &times, &table)?;
            let theta = theta_grid(n_theta);
            let mut snaps: Vec<Snapshot> = Vec::new();
            for (t, s) in &states {
                if snap_times.contains(t) && !snaps.iter().any(|x| x.t == *t) {
                    snaps.push(Snapshot { t: *t, theta: theta.clone(), rho: s.to_grid(n_theta) });
                }
            }
            (states, snaps, Outcome::Completed, None)
        }
        EvolveMode::Nonlinear => {
            let keep = c.stepper.n_modes.min(n_theta / 3);
            if let Some(s) = c.seed_shape.iter().find(|s| s.k > keep) {
                return Err(CliError::Validation(format!(
                    "seed mode {} is not resolved on n_theta = {n_theta} (keeps |k| <= {keep})",
                    s.k
                )));
            }
            let tr = evolve_nonlinear(&shape, c.t_end, &params, &c.model, &c.grid, &c.stepper)?;
            (tr.states, tr.snapshots, tr.outcome, Some(tr.steps))
        }
    };

    let dir = out_dir(c)?;
    write_with(dir.join("trajectory.csv"), |w| write_trajectory_csv(w, &states))?;
    if let Some(steps) = &diagnostics {
        write_with(dir.join("diagnostics.csv"), |w| write_diagnostics_csv(w, steps))?;
    }
    write_json(dir.join("snapshots.json"), &snapshots)?;
    let (_, last) = states.last().expect("trajectory holds the initial state");
    let report = EvolveReport {
        command: "evolve",
        mode: c.mode,
        model: &c.model,
        a: params.a,
        g: params.g,
        r: params.r,
        t_end: c.t_end,
        outcome: outcome.clone(),
        accepted_steps: states.len() - 1,
        final_sup_norm: last.sup_norm(),
        fit_max_sup_norm: c.fit_max_sup_norm,
        growth: growth_rows(c, &states, &table)?,
    };
    for row in &report.growth {
        println!("k = {}: fitted rate {:.8} vs mu_k {:.8}", row.k, row.fitted_rate, row.mu_k);
    }
    write_json(dir.join("report.json"), &report)?;
    match outcome {
        Outcome::Completed => Ok(()),
        Outcome::LeftNeighbourhood { t, sup_norm } => Err(CliError::LeftNeighbourhood { t, sup_norm }),
    }
}

#[derive(Serialize)]
struct Check {
    name: String,
    value: String,
    expected: String,
    pass: bool,
}

#[derive(Serialize)]
struct AppendixReport {
    command: &'static str,
    ratios: Vec<f64>,
    series_max_difference: f64,
    checks: Vec<Check>,
    pass: bool,
}

/// The constants of the identity model at unit radius.
pub fn appendix_check(c: &RunConfig) -> CliResult<()> {
    let model = NutrientModel::identity();
    let s = &c.solver;
    let v0 = radial::solve_U(1.0, &model, s)?;
    let ratios = (0..=13)
        .into_par_iter()
        .map(|n| radial::boundary_ratio(n, 1.0, &v0, &model, s))
        .collect::<Result<Vec<_>, _>>()?;
    let mut checks = Vec::new();
    for (n, expect) in [(0usize, "0.446"), (1, "0.240")] {
        let value = format!("{:.3}", ratios[n]);
        checks.push(Check {
            name: format!("u{n}'(1)/u{n}(1)"),
            pass: value == expect,
            value,
            expected: expect.into(),
        });
    }
    let mut worst = 0.0f64;
    for (n, which) in [(0usize, AppendixSeries::U0), (1, AppendixSeries::U1)] {
        let u = radial::solve_u_n(n, 1.0, &v0, &model, s)?;
        for i in 1..=10 {
            let r = i as f64 / 10.0;
            worst = worst.max((radial::appendix_series(which, r, 30)? - u.value_at(r)).abs());
        }
    }
    checks.push(Check {
        name: "series vs solver, r in 0.1..1.0".into(),
        value: format!("{worst:.3e}"),
        expected: "<= 1e-8".into(),
        pass: worst <= 1e-8,
    });
    let monotone = ratios.windows(2).all(|w| w[1] < w[0]);
    checks.push(Check {
        name: "r_(n+1) < r_n for n = 0..12".into(),
        value: monotone.to_string(),
        expected: "true".into(),
        pass: monotone,
    });
    checks.push(Check {
        name: "r_12".into(),
        value: format!("{:.6}", ratios[12]),
        expected: "< 0.05".into(),
        pass: ratios[12] < 0.05,
    });
    let pass = checks.iter().all(|c| c.pass);
    for ch in &checks {
        println!("{} {}: {} (expected {})", if ch.pass { "PASS" } else { "FAIL" }, ch.name, ch.value, ch.expected);
    }
    let dir = out_dir(c)?;
    let failed: Vec<String> = checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
    write_json(
        dir.join("report.json"),
        &AppendixReport {
            command: "appendix-check",
            ratios,
            series_max_difference: worst,
            checks,
            pass,
        },
    )?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Check(failed.join("; ")))
    }
}

struct SweepRow {
    a: f64,
    g: f64,
    r_a: f64,
    g_star: Option<(f64, usize)>,
    l_g: Option<usize>,
    regime: Regime,
    spectral_bound: f64,
    unstable: usize,
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Unstable => "unstable",
        Regime::HeleShaw => "hele_shaw",
        Regime::InconclusiveBelowThreshold => "inconclusive_below_threshold",
    }
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Spectrum summaries over a grid of `(A, G)`; one table per `A`, built in parallel.
pub fn sweep(c: &RunConfig) -> CliResult<()> {
    let a_values = if c.sweep.a_values.is_empty() {
        vec![c.require_a()?]
    } else {
        c.sweep.a_values.clone()
    };
    let g_values = if c.sweep.g_values.is_empty() { vec![c.g] } else { c.sweep.g_values.clone() };
    let f1 = c.model.f_at_one();
    if let Some(a) = a_values.iter().find(|a| !(**a > 0.0 && **a < f1)) {
        return Err(CliError::Validation(format!("A = {a} must lie in (0, f(1)) = (0, {f1})")));
    }
    if g_values.iter().any(|g| !g.is_finite()) {
        return Err(CliError::Validation("G values must be finite".into()));
    }
    let blocks = a_values
        .par_iter()
        .map(|&a| -> CliResult<Vec<SweepRow>> {
            let params = ModelParameters::at_steady_state(a, 0.0, c.model.clone(), &c.solver)?;
            let base = SpectrumTable::build(&params, c.k_max, &c.solver)?;
            let g_star = base.g_star().ok().map(|g| (g.value, g.k0));
            Ok(g_values
                .iter()
                .map(|&g| {
                    let t = base.with_g(g);
                    let cls = t.classify_stability();
                    SweepRow {
                        a,
                        g,
                        r_a: params.r,
                        g_star,
                        l_g: t.l_g_index().ok(),
                        regime: cls.regime,
                        spectral_bound: cls.spectral_bound,
                        unstable: cls.unstable_modes.len(),
                    }
                })
                .collect())
        })
        .collect::<CliResult<Vec<_>>>()?;
    let dir = out_dir(c)?;
    write_with(dir.join("sweep.csv"), |w| {
        writeln!(w, "a,g,r_a,g_star,k0,l_g,regime,spectral_bound,unstable_modes")?;
        for r in blocks.iter().flatten() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{},{},{},{},{:.16e},{}",
                r.a,
                r.g,
                r.r_a,
                opt(r.g_star.map(|g| format!("{:.16e}", g.0))),
                opt(r.g_star.map(|g| g.1)),
                opt(r.l_g),
                regime_name(r.regime),
                r.spectral_bound,
                r.unstable
            )?;
        }
        Ok(())
    })?;
    println!("{} rows written", blocks.iter().map(Vec::len).sum::<usize>());
    Ok(())
}
