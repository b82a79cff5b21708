//! The subcommands. Each writes its artifacts plus the resolved
//! configuration into the output directory and returns a one-line summary.

use std::path::Path;

use pressgame_core::equilibria::{check_epsilon_nash, find_all, rational_approximation};
use pressgame_core::exec::Executor;
use pressgame_core::harness::{growth_lln_experiment, initial_counts, lln_experiment, LimitSide, RateReport, Verdict};
use pressgame_core::kinetic::{integrate, IntegrationStats};
use pressgame_core::markov::{ensemble_mean, simulate};
use pressgame_core::principal::{discounted_value, value_iterate, ValueTable};
use pressgame_core::{Dynamics, OccupationState};
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::error::CliError;
use crate::output::{prepare_dir, write_iteration_log, write_json, write_rate_csv, write_trajectory};
use crate::scenario::{validate, Scenario};

/// Parse, apply a seed override and build the scenario.
pub fn load(path: &Path, seed: Option<u64>) -> Result<Scenario, CliError> {
    let mut config = ScenarioConfig::load(path)?;
    if let Some(s) = seed {
        config.experiment.master_seed = s;
    }
    Scenario::new(config)
}

/// Parse and cross-check without running anything.
pub fn cmd_validate(path: &Path) -> Result<String, CliError> {
    let config = ScenarioConfig::load(path)?;
    let errors = validate(&config);
    if errors.is_empty() {
        Ok(format!("{}: ok", path.display()))
    } else {
        Err(CliError::Config(errors))
    }
}

fn start_state(s: &Scenario) -> Result<OccupationState, CliError> {
    let e = &s.config.experiment;
    if s.dynamics.is_simplex() {
        Ok(initial_counts(&s.dynamics, &s.initial, e.population)?)
    } else {
        let counts = s.initial.iter().map(|x| (x / e.scale).round() as u64).collect();
        Ok(OccupationState::new(counts, e.scale)?)
    }
}

#[derive(Serialize)]
struct SimulationSummary {
    seed: u64,
    t_end: f64,
    events: u64,
    absorbed: bool,
    blocked_rate_max: f64,
    clamped: usize,
    final_state: Vec<f64>,
}

pub fn cmd_simulate(s: &Scenario, out: &Path, exec: &dyn Executor) -> Result<String, CliError> {
    prepare_dir(out, &s.config)?;
    let e = &s.config.experiment;
    let x0 = start_state(s)?;
    let path = simulate(&s.dynamics, &x0, &s.principal, e.t_end, e.master_seed)?;
    write_trajectory(&out.join("trajectory.csv"), &path.trajectory)?;
    let summary = SimulationSummary {
        seed: e.master_seed,
        t_end: e.t_end,
        events: path.end.events,
        absorbed: path.end.absorbed,
        blocked_rate_max: path.end.blocked_rate_max,
        clamped: path.end.clamped,
        final_state: s.dynamics.observe(path.end.state.counts(), path.end.state.scale()),
    };
    write_json(&out.join("summary.json"), &summary)?;
    let mut line = format!("{} events up to t = {}", summary.events, e.t_end);
    if e.n_runs >= 2 {
        let g = s.observable()?;
        let stats = ensemble_mean(&s.dynamics, &x0, &s.principal, e.t_end, &*g, e.n_runs, e.master_seed, exec)?;
        write_json(&out.join("ensemble.json"), &stats)?;
        line.push_str(&format!("; ensemble mean {} +/- {}", stats.mean, stats.std_error));
    }
    Ok(line)
}

#[derive(Serialize)]
struct IntegrationSummary {
    t_end: f64,
    final_state: Vec<f64>,
    stats: IntegrationStats,
}

pub fn cmd_integrate(s: &Scenario, out: &Path) -> Result<String, CliError> {
    prepare_dir(out, &s.config)?;
    let t_end = s.config.experiment.t_end;
    let run = integrate(&s.dynamics, &s.initial, &s.principal, t_end, s.stepper)?;
    write_trajectory(&out.join("trajectory.csv"), &run.trajectory)?;
    let final_state = run.trajectory.final_state().map(<[f64]>::to_vec).unwrap_or_default();
    let summary = IntegrationSummary {
        t_end,
        final_state,
        stats: run.stats,
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(format!(
        "{} steps, {} renormalizations",
        summary.stats.accepted, summary.stats.renormalizations
    ))
}

pub fn cmd_equilibria(s: &Scenario, out: &Path) -> Result<String, CliError> {
    let Dynamics::Replicator { payoff, .. } = &s.dynamics else {
        return Err(CliError::Config(vec![
            "equilibria needs model.family = \"replicator\"".into(),
        ]));
    };
    prepare_dir(out, &s.config)?;
    let n = s.config.experiment.population;
    let mut records = find_all(payoff, &s.principal, &s.solver_options())?;
    for rec in records.iter_mut().filter(|r| r.dominant) {
        let x_n = rational_approximation(&rec.x, n)?;
        rec.nash_eps = Some(check_epsilon_nash(&x_n, n, payoff, &s.principal)?);
    }
    write_json(&out.join("equilibria.json"), &records)?;
    let interior = records.iter().filter(|r| r.support.len() == payoff.strategies()).count();
    Ok(format!("{} rest points ({interior} interior)", records.len()))
}

pub fn cmd_plan(s: &Scenario, out: &Path) -> Result<String, CliError> {
    prepare_dir(out, &s.config)?;
    let e = &s.config.experiment;
    let terminal = s.terminal();
    let v0 = ValueTable::on_simplex(s.dynamics.state_dim(), s.config.numerics.grid_points, |x| terminal(x))?;
    let opts = s.shapley_options();
    let (value, log) = match e.beta {
        Some(beta) => {
            let plan = discounted_value(&v0, &s.dynamics, &s.principal, beta, &opts, e.tol, e.max_sweeps)?;
            write_json(&out.join("policy.json"), &plan.policy)?;
            (plan.value, plan.log)
        }
        None => {
            let plan = value_iterate(&v0, e.horizon, &s.dynamics, &s.principal, &opts)?;
            write_json(&out.join("policy.json"), &plan.policies)?;
            (plan.value, plan.log)
        }
    };
    write_json(&out.join("value.json"), &value)?;
    write_iteration_log(&out.join("iterations.csv"), &log)?;
    Ok(format!("{} sweeps, last change {}", log.len(), log.last().copied().unwrap_or(0.0)))
}

pub fn cmd_lln(s: &Scenario, out: &Path, exec: &dyn Executor) -> Result<RateReport, CliError> {
    let e = &s.config.experiment;
    let g = s.observable()?;
    let limit = LimitSide::Integrate(s.stepper);
    if s.dynamics.is_simplex() {
        if e.n_values.len() < 2 {
            return Err(CliError::Config(vec!["experiment.n_values needs at least two sizes".into()]));
        }
    } else if e.h_values.len() < 2 {
        return Err(CliError::Config(vec!["experiment.h_values needs at least two scales".into()]));
    }
    if e.n_runs < 2 {
        return Err(CliError::Config(vec!["experiment.n_runs must be at least 2 for rate experiments".into()]));
    }
    prepare_dir(out, &s.config)?;
    let report = if s.dynamics.is_simplex() {
        lln_experiment(
            &s.dynamics,
            &s.initial,
            &s.principal,
            &*g,
            e.t_end,
            &e.n_values,
            e.n_runs,
            e.master_seed,
            e.regularity,
            limit,
            exec,
        )?
    } else {
        growth_lln_experiment(
            &s.dynamics,
            &s.initial,
            &s.principal,
            &*g,
            e.t_end,
            &e.h_values,
            e.n_runs,
            e.master_seed,
            e.regularity,
            e.smooth_rates,
            limit,
            exec,
        )?
    };
    write_json(&out.join("rate_report.json"), &report)?;
    write_rate_csv(&out.join("rate_report.csv"), &report)?;
    Ok(report)
}

/// Map a rate report onto success or an experiment failure.
pub fn verdict_outcome(report: &RateReport) -> Result<String, CliError> {
    let order = report
        .fitted_order
        .map_or_else(|| "none".to_string(), |p| format!("{p:.3}"));
    let line = format!(
        "verdict {:?}: fitted order {order}, bound {:.3}, monotone {}",
        report.verdict, report.bound_order, report.monotone
    );
    match report.verdict {
        Verdict::Pass | Verdict::Inconclusive => Ok(line),
        Verdict::Fail | Verdict::Invalid => Err(CliError::Failed(line)),
    }
}
