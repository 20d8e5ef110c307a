use num_complex::Complex64;
use rayon::prelude::*;

use super::{row, Contract, ExperimentConfig, Failure, NamedFit, Report};
use crate::envelope::{
    bona_smith, bona_smith_rate, build_envelope, envelope_diagnostic, summability_constant, tail_bound_check,
};
use crate::error::{Error, Result};
use crate::evolver::{
    conservation_report, solve_direct, solve_gauged, solve_regularized, to_gauged_frame, SolverConfig, Termination,
    Trajectory,
};
use crate::fit::fit_loglog;
use crate::gauge::Coefficients;
use crate::initial_data::InitialData;
use crate::semigroup::strichartz_check;
use crate::spectral::{l2_norm, sobolev_norm, xs_norm, Field, Grid};

/// `||J_{eta,s} f||_{X^s} <= C ||f||_{X^s}`; sweeps over random windowed data never exceed 1.
pub const BONA_SMITH_XS_CONSTANT: f64 = 1.5;
/// Bound on the space-time Strichartz ratio; 24 seeded ensembles peak at 1.88.
pub const STRICHARTZ_CONSTANT: f64 = 2.5;
/// Bound on the envelope tail ratio across shells. Small-data statement: Gaussians of
/// amplitude at most 1 and random data of `L^2` norm at most 1.25 peak at 8.5; the ratio
/// grows with the data.
pub const TAIL_CONSTANT: f64 = 10.0;
/// `M(T) / M(0+)` over the short horizon.
pub const ENVELOPE_GROWTH_LIMIT: f64 = 3.0;
/// Spread allowed between Lipschitz ratios across perturbation sizes.
pub const LIPSCHITZ_SPREAD: f64 = 2.0;
/// Relative `L^2` gap at which direct and gauged runs are declared to diverge.
pub const DIVERGENCE_TOL: f64 = 1e-3;

fn setup(cfg: &ExperimentConfig) -> Result<(Grid, Field)> {
    let grid = cfg.grid.build()?;
    let phi = cfg.initial_data.build(&grid)?;
    Ok((grid, phi))
}

fn final_field(traj: &Trajectory) -> Result<Field> {
    traj.last()
        .map(|(_, f)| f.clone())
        .ok_or_else(|| Error::TrajectoryMismatch("empty trajectory".into()))
}

fn xs_distance(a: &Field, b: &Field, s: f64) -> Result<f64> {
    Ok(xs_norm(&a.sub(b)?, s).value)
}

/// Undamped runs go through the gauge; damped runs through the regularized solver.
pub(crate) fn solve(phi: &Field, c: &Coefficients, solver: &SolverConfig) -> Result<Trajectory> {
    if solver.epsilon == 0.0 {
        solve_gauged(phi, c, solver)
    } else {
        solve_regularized(phi, c, solver)
    }
}

fn with_epsilon(solver: &SolverConfig, epsilon: f64) -> SolverConfig {
    SolverConfig {
        epsilon,
        ..solver.clone()
    }
}

fn record_failure(report: &mut Report, point: String, e: &Error) {
    report.failures.push(Failure {
        point,
        error: e.to_string(),
    });
}

/// Number of strict increases along a sequence that should not increase.
fn increases(values: &[f64]) -> usize {
    values.windows(2).filter(|w| w[1] > w[0]).count()
}

pub fn run_eps_convergence(cfg: &ExperimentConfig) -> Result<Report> {
    let (_, phi) = setup(cfg)?;
    let c = cfg.coefficients;
    let s = cfg.sobolev_index;
    let mut report = Report::new(cfg);
    let reference = final_field(&solve_gauged(&phi, &c, &with_epsilon(&cfg.solver, 0.0))?)?;
    let results: Vec<Result<f64>> = cfg
        .epsilons
        .par_iter()
        .map(|&eps| {
            let traj = solve_regularized(&phi, &c, &with_epsilon(&cfg.solver, eps))?;
            xs_distance(&final_field(&traj)?, &reference, s)
        })
        .collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&eps, r) in cfg.epsilons.iter().zip(results) {
        match r {
            Ok(d) => {
                report.points.push(row(&[("epsilon", eps), ("distance", d)]));
                if eps > 0.0 {
                    xs.push(eps);
                    ys.push(d);
                }
            }
            Err(e) => record_failure(&mut report, format!("epsilon = {eps}"), &e),
        }
    }
    match fit_loglog(&xs, &ys) {
        Ok(fit) => {
            report.contracts.push(Contract::at_least("slope", fit.slope, 0.4));
            report.fits.push(NamedFit {
                name: "distance vs epsilon".into(),
                fit,
            });
        }
        Err(e) => record_failure(&mut report, "fit".into(), &e),
    }
    Ok(report.finish())
}

pub fn run_joint_limit(cfg: &ExperimentConfig) -> Result<Report> {
    let (_, phi) = setup(cfg)?;
    let c = cfg.coefficients;
    let s = cfg.sobolev_index;
    let mollifier_s = s.max(1.0);
    let mut report = Report::new(cfg);
    let undamped = with_epsilon(&cfg.solver, 0.0);
    let reference = final_field(&solve_gauged(&phi, &c, &undamped)?)?;
    report.points.push(row(&[
        ("epsilon", 0.0),
        ("eta", 0.0),
        ("distance", 0.0),
        ("diagonal", 0.0),
    ]));

    let mut etas = cfg.etas.clone();
    etas.sort_by(|a, b| b.total_cmp(a));
    let mut epsilons = cfg.epsilons.clone();
    epsilons.sort_by(|a, b| b.total_cmp(a));

    // (eta, epsilon, diagonal flag); epsilon = 0 is the undamped mollified run
    let mut jobs: Vec<(f64, f64, bool)> = Vec::new();
    for &eta in &etas {
        for &eps in &epsilons {
            jobs.push((eta, eps, false));
        }
        jobs.push((eta, eta.powi(3), true));
        jobs.push((eta, 0.0, false));
    }
    let results: Vec<Result<Field>> = jobs
        .par_iter()
        .map(|&(eta, eps, _)| {
            let data = bona_smith(&phi, eta, mollifier_s)?;
            final_field(&solve(&data, &c, &with_epsilon(&cfg.solver, eps))?)
        })
        .collect();
    let mut table: Vec<(f64, f64, bool, Field, f64)> = Vec::new();
    for (&(eta, eps, diag), r) in jobs.iter().zip(results) {
        match r.and_then(|u| xs_distance(&u, &reference, s).map(|d| (u, d))) {
            Ok((u, d)) => {
                report.points.push(row(&[
                    ("epsilon", eps),
                    ("eta", eta),
                    ("distance", d),
                    ("diagonal", if diag { 1.0 } else { 0.0 }),
                ]));
                table.push((eta, eps, diag, u, d));
            }
            Err(e) => record_failure(&mut report, format!("eta = {eta}, epsilon = {eps}"), &e),
        }
    }
    if !report.failures.is_empty() {
        return Ok(report.finish());
    }
    let grid_value = |eta: f64, eps: f64| {
        table
            .iter()
            .find(|t| t.0 == eta && t.1 == eps && !t.2)
            .map(|t| t.4)
            .expect("every grid point was solved")
    };
    let mut violations = 0;
    for &eta in &etas {
        let mut along: Vec<f64> = epsilons.iter().map(|&e| grid_value(eta, e)).collect();
        along.push(grid_value(eta, 0.0));
        violations += increases(&along);
    }
    for &eps in epsilons.iter().chain(std::iter::once(&0.0)) {
        let along: Vec<f64> = etas.iter().map(|&eta| grid_value(eta, eps)).collect();
        violations += increases(&along);
    }
    let diagonal: Vec<&(f64, f64, bool, Field, f64)> = table.iter().filter(|t| t.2).collect();
    violations += increases(&diagonal.iter().map(|t| t.4).collect::<Vec<_>>());
    report
        .contracts
        .push(Contract::at_most("monotonicity violations", violations as f64, 0.0));

    let finest = *etas.last().expect("validated nonempty");
    let diag = diagonal.last().expect("one diagonal point per eta");
    let sequential = table
        .iter()
        .find(|t| t.0 == finest && t.1 == 0.0)
        .expect("sequential limit solved");
    let gap = xs_distance(&diag.3, &sequential.3, s)?;
    report
        .points
        .push(row(&[("eta", finest), ("diagonal_vs_sequential", gap)]));
    report
        .contracts
        .push(Contract::at_most("diagonal vs sequential limit", gap, 2.0 * diag.4));
    Ok(report.finish())
}

/// Unit `X^s` direction for perturbations, windowed on the datum's scale.
fn perturbation_direction(grid: &Grid, seed: u64, s: f64) -> Result<Field> {
    let raw = InitialData::Random {
        seed,
        decay: 4.0,
        norm: 1.0,
        window_width: 2.0,
    }
    .build(grid)?;
    let n = xs_norm(&raw, s).value;
    Ok(raw.scale(Complex64::new(1.0 / n, 0.0)))
}

pub fn run_lipschitz_flow(cfg: &ExperimentConfig) -> Result<Report> {
    let (grid, phi) = setup(cfg)?;
    let c = cfg.coefficients;
    let s = cfg.sobolev_index;
    let mut report = Report::new(cfg);
    let direction = perturbation_direction(&grid, cfg.seed, s)?;
    let base = solve(&phi, &c, &cfg.solver)?;
    let sizes: Vec<f64> = cfg.perturbations.iter().cloned().filter(|&d| d > 0.0).collect();
    let results: Vec<Result<(f64, f64)>> = sizes
        .par_iter()
        .map(|&delta| {
            let data = phi.add(&direction.scale(Complex64::new(delta, 0.0)))?;
            let traj = solve(&data, &c, &cfg.solver)?;
            if traj.len() != base.len() {
                return Err(Error::TrajectoryMismatch("perturbed run has a different length".into()));
            }
            let initial = xs_distance(&data, &phi, s)?;
            let mut worst: f64 = 0.0;
            for (a, b) in traj.fields().iter().zip(base.fields()) {
                worst = worst.max(xs_distance(a, b, s)?);
            }
            Ok((initial, worst / initial))
        })
        .collect();
    let mut ratios = Vec::new();
    for (&delta, r) in sizes.iter().zip(results) {
        match r {
            Ok((initial, ratio)) => {
                report.points.push(row(&[
                    ("perturbation", delta),
                    ("initial_gap", initial),
                    ("ratio", ratio),
                ]));
                ratios.push(ratio);
            }
            Err(e) => record_failure(&mut report, format!("perturbation = {delta}"), &e),
        }
    }
    if !ratios.is_empty() {
        let max = ratios.iter().cloned().fold(0.0, f64::max);
        let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        report
            .contracts
            .push(Contract::at_most("ratio spread", max / min, LIPSCHITZ_SPREAD));
    }
    Ok(report.finish())
}

pub fn run_conservation(cfg: &ExperimentConfig) -> Result<Report> {
    let (_, phi) = setup(cfg)?;
    let c = cfg.coefficients;
    let mut report = Report::new(cfg);
    let traj = match solve_gauged(&phi, &c, &with_epsilon(&cfg.solver, 0.0)) {
        Ok(t) => t,
        Err(Error::SolveAborted { t, source, partial }) => {
            record_failure(&mut report, format!("t = {t}"), &source);
            *partial
        }
        Err(e) => return Err(e),
    };
    let r = conservation_report(&traj, &c)?;
    for sample in &r.samples {
        report.points.push(row(&[
            ("t", sample.t),
            ("mass", sample.mass),
            ("gauged_energy", sample.energy),
            ("mass_drift", sample.mass_drift),
            ("energy_drift", sample.energy_drift),
        ]));
    }
    report
        .contracts
        .push(Contract::at_most("mass drift", r.max_mass_drift, 1e-6));
    report
        .contracts
        .push(Contract::at_most("energy drift", r.max_energy_drift, 1e-4));
    Ok(report.finish())
}

pub fn run_bona_smith(cfg: &ExperimentConfig) -> Result<Report> {
    let (_, f) = setup(cfg)?;
    let s = cfg.sobolev_index;
    let j = cfg.smoothing_gain.unwrap_or(1.0);
    let mut report = Report::new(cfg);
    let mut etas = cfg.etas.clone();
    etas.sort_by(|a, b| b.total_cmp(a));
    let base = xs_norm(&f, s);
    let mut gaps = Vec::new();
    let mut worst_ratio: f64 = 0.0;
    for &eta in &etas {
        let g = bona_smith(&f, eta, s)?;
        let gap = xs_norm(&g.sub(&f)?, s).value;
        let ratio = if base.value > 0.0 {
            xs_norm(&g, s).value / base.value
        } else {
            0.0
        };
        worst_ratio = worst_ratio.max(ratio);
        gaps.push(gap);
        report.points.push(row(&[
            ("eta", eta),
            ("hs_plus_j", sobolev_norm(&g, s + j)),
            ("xs_gap", gap),
            ("xs_ratio", ratio),
        ]));
    }
    match bona_smith_rate(&f, s, j, &etas) {
        Ok(fit) => {
            report
                .contracts
                .push(Contract::at_least("rate slope", fit.slope, -j / s - 0.1));
            report.fits.push(NamedFit {
                name: "H^{s+j} norm vs eta".into(),
                fit,
            });
        }
        Err(e) => record_failure(&mut report, "rate".into(), &e),
    }
    report
        .contracts
        .push(Contract::at_most("X^s gap increases", increases(&gaps) as f64, 0.0));
    report
        .contracts
        .push(Contract::at_most("X^s ratio", worst_ratio, BONA_SMITH_XS_CONSTANT));
    Ok(report.finish())
}

pub fn run_envelope(cfg: &ExperimentConfig) -> Result<Report> {
    let (_, phi) = setup(cfg)?;
    let c = cfg.coefficients;
    let s = cfg.sobolev_index;
    let mut report = Report::new(cfg);
    let radius = cfg.envelope_radius.unwrap_or_else(|| sobolev_norm(&phi, s));
    let env = build_envelope(&phi, s, cfg.envelope_delta, radius)?;
    let traj = solve_gauged(&phi, &c, &with_epsilon(&cfg.solver, 0.0))?;
    let traj_v = to_gauged_frame(&traj, &c)?;
    let diag = envelope_diagnostic(&traj_v, &env, s)?;
    let tails = cfg
        .shells
        .par_iter()
        .map(|&k| tail_bound_check(&traj_v, &env, s, k))
        .collect::<Result<Vec<_>>>()?;
    for p in &diag.profile {
        report.points.push(row(&[
            ("k", p.k as f64),
            ("c", p.c),
            ("st_norm", p.norm.value()),
            ("weighted", p.weighted.unwrap_or(f64::NAN)),
        ]));
    }
    let mut worst_tail: f64 = 0.0;
    let mut tail_violations = 0;
    for t in &tails {
        report.points.push(row(&[
            ("tail_k", t.k as f64),
            ("tail_lhs", t.lhs),
            ("tail_envelope", t.tail_envelope),
            ("tail_ratio", t.ratio.unwrap_or(f64::NAN)),
        ]));
        match t.ratio {
            Some(r) => worst_tail = worst_tail.max(r),
            None => tail_violations += 1,
        }
    }
    report.points.push(row(&[("m", diag.m), ("m_initial", diag.m_initial)]));
    report.contracts.push(Contract::at_most(
        "sum of squares",
        env.sum_of_squares(),
        summability_constant(env.delta),
    ));
    report.contracts.push(Contract::at_most(
        "slow variation excess",
        env.slow_variation_excess(),
        1e-14,
    ));
    report
        .contracts
        .push(Contract::at_most("domination excess", env.domination_excess(&phi), 0.0));
    let growth = if diag.m_initial > 0.0 {
        diag.m / diag.m_initial
    } else {
        0.0
    };
    report
        .contracts
        .push(Contract::at_most("M(T) / M(0+)", growth, ENVELOPE_GROWTH_LIMIT));
    report
        .contracts
        .push(Contract::at_most("flagged shells", diag.flagged.len() as f64, 0.0));
    report
        .contracts
        .push(Contract::at_most("tail violations", tail_violations as f64, 0.0));
    report
        .contracts
        .push(Contract::at_most("tail ratio", worst_tail, TAIL_CONSTANT));
    Ok(report.finish())
}

pub fn run_strichartz(cfg: &ExperimentConfig) -> Result<Report> {
    let grid = cfg.grid.build()?;
    let mut report = Report::new(cfg);
    let members: Vec<u64> = (0..cfg.ensemble_size as u64).collect();
    let results: Vec<Result<(f64, f64, f64)>> = members
        .par_iter()
        .map(|&m| {
            let phi = InitialData::Random {
                seed: cfg.seed.wrapping_add(m),
                decay: 2.0,
                norm: 1.0,
                window_width: 1.0 + (m % 4) as f64,
            }
            .build(&grid)?;
            let r = strichartz_check(&phi, cfg.solver.t_final, 201)?;
            Ok((r.linf_l2, r.l4_linf, r.ratio))
        })
        .collect();
    let mut worst: f64 = 0.0;
    for (&m, r) in members.iter().zip(results) {
        match r {
            Ok((a, b, ratio)) => {
                worst = worst.max(ratio);
                report.points.push(row(&[
                    ("member", m as f64),
                    ("linf_l2", a),
                    ("l4_linf", b),
                    ("ratio", ratio),
                ]));
            }
            Err(e) => record_failure(&mut report, format!("member {m}"), &e),
        }
    }
    report
        .contracts
        .push(Contract::at_most("Strichartz ratio", worst, STRICHARTZ_CONSTANT));
    Ok(report.finish())
}

pub fn run_direct_vs_gauged(cfg: &ExperimentConfig) -> Result<Report> {
    let (_, phi) = setup(cfg)?;
    let c = cfg.coefficients;
    let mut report = Report::new(cfg);
    let undamped = with_epsilon(&cfg.solver, 0.0);
    let direct = solve_direct(&phi, &c, &undamped)?;
    let gauged = solve_gauged(&phi, &c, &undamped)?;
    let scale = l2_norm(&phi).max(f64::MIN_POSITIVE);
    let mut divergence = f64::NAN;
    let shared = direct.len().min(gauged.len());
    for k in 0..shared {
        let gap = l2_norm(&direct.fields()[k].sub(&gauged.fields()[k])?) / scale;
        if divergence.is_nan() && gap > DIVERGENCE_TOL {
            divergence = direct.times()[k];
        }
        report.points.push(row(&[
            ("t", direct.times()[k]),
            ("relative_gap", gap),
            ("direct_l2", l2_norm(&direct.fields()[k])),
            ("gauged_l2", l2_norm(&gauged.fields()[k])),
        ]));
    }
    let blowup = match direct.termination() {
        Termination::Completed => f64::NAN,
        Termination::BlowUp { t, .. } => t,
    };
    report
        .points
        .push(row(&[("divergence_time", divergence), ("blowup_time", blowup)]));
    // the runs must agree on the first recorded step
    let first_gap = if shared > 1 {
        l2_norm(&direct.fields()[1].sub(&gauged.fields()[1])?) / scale
    } else {
        f64::INFINITY
    };
    report
        .contracts
        .push(Contract::at_most("gap at first output", first_gap, DIVERGENCE_TOL));
    Ok(report.finish())
}
