//! Cross-checking a parsed configuration and turning it into core model
//! objects.

use pressgame_core::equilibria::SolverOptions;
use pressgame_core::kinetic::Stepper;
use pressgame_core::model::{
    Attachment, ClassStructure, Coefficients, CommMode, ControlAffine, ControlBox, ControlRate, Detection,
    Dynamics, Fine, GroupRate, GrowthChannel, GrowthCoefficients, GrowthTerm, KernelSpec, PayoffModel,
    PrincipalMode, PrincipalModel, PrincipalReward, RateKernel, RateLaw, SizePayoff, TabularPayoff,
};
use pressgame_core::principal::ShapleyOptions;
use pressgame_core::Result as CoreResult;

use crate::config::{
    Communication, DetectionConfig, FineConfig, KernelConfig, KernelKind, ModeConfig, ModelConfig,
    ObservableConfig, PayoffConfig, RewardConfig, ScenarioConfig, StepperKind, TermConfig,
};
use crate::error::CliError;

/// Observable evaluated on macroscopic states.
pub type Observable = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A validated configuration with its model objects built.
pub struct Scenario {
    pub config: ScenarioConfig,
    pub dynamics: Dynamics,
    pub principal: PrincipalModel,
    pub initial: Vec<f64>,
    pub stepper: Stepper,
}

impl Scenario {
    pub fn new(config: ScenarioConfig) -> Result<Self, CliError> {
        let errors = validate(&config);
        if !errors.is_empty() {
            return Err(CliError::Config(errors));
        }
        let dynamics = build_dynamics(&config.model)?;
        let principal = build_principal(&config)?;
        let initial = initial_state(&config, &dynamics).map_err(|e| CliError::Config(vec![e]))?;
        let stepper = stepper(&config);
        Ok(Scenario {
            config,
            dynamics,
            principal,
            initial,
            stepper,
        })
    }

    pub fn observable(&self) -> Result<Observable, CliError> {
        match &self.config.experiment.observable {
            Some(o) => Ok(observable(o)),
            None => Err(CliError::Config(vec!["experiment.observable is required by this command".into()])),
        }
    }

    pub fn terminal(&self) -> Observable {
        match &self.config.experiment.terminal {
            Some(o) => observable(o),
            None => Box::new(|_| 0.0),
        }
    }

    pub fn shapley_options(&self) -> ShapleyOptions {
        ShapleyOptions {
            tau: self.config.experiment.tau,
            b_points: self.config.numerics.b_points,
            refine: self.config.numerics.refine,
            stepper: self.stepper,
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        let kappa = match &self.config.model {
            ModelConfig::Replicator { kappa, .. } => *kappa,
            _ => 1.0,
        };
        SolverOptions {
            starts: self.config.numerics.starts,
            seed: self.config.experiment.master_seed,
            support_tol: self.config.numerics.support_tol,
            kappa,
        }
    }
}

pub fn stepper(config: &ScenarioConfig) -> Stepper {
    let n = &config.numerics;
    match n.stepper {
        StepperKind::Rk45 => Stepper::Rk45 {
            rtol: n.rtol,
            atol: n.atol,
        },
        StepperKind::Rk4 => Stepper::Rk4 { h: n.h_ode },
    }
}

pub fn observable(o: &ObservableConfig) -> Observable {
    match o.clone() {
        ObservableConfig::Constant { value } => Box::new(move |_| value),
        ObservableConfig::Coordinate { index } => Box::new(move |x| x[index]),
        ObservableConfig::Linear { weights } => Box::new(move |x| weights.iter().zip(x).map(|(w, v)| w * v).sum()),
        ObservableConfig::Moment { order } => Box::new(move |x| {
            x.iter()
                .enumerate()
                .map(|(k, v)| ((k + 1) as f64).powi(order as i32) * v)
                .sum()
        }),
    }
}

fn detection(d: &DetectionConfig) -> Detection {
    match *d {
        DetectionConfig::Constant(p) => Detection::Constant(p),
        DetectionConfig::Saturating { theta } => Detection::Saturating { theta },
        DetectionConfig::Logistic { a, c, d } => Detection::Logistic { a, c, d },
    }
}

fn fine(f: &FineConfig) -> Fine {
    match f {
        FineConfig::Constant(c) => Fine::Constant(*c),
        FineConfig::Affine { intercept, slope } => Fine::Affine {
            intercept: *intercept,
            slope: *slope,
        },
        FineConfig::Table(t) => Fine::Table(t.clone()),
    }
}

fn affine(pairs: &[[f64; 2]]) -> Vec<ControlAffine> {
    pairs
        .iter()
        .map(|[intercept, slope]| ControlAffine {
            intercept: *intercept,
            slope: *slope,
        })
        .collect()
}

pub fn build_payoff(p: &PayoffConfig) -> CoreResult<PayoffModel> {
    match p {
        PayoffConfig::Tabular {
            values,
            b_axes,
            interaction,
        } => {
            let nodes: usize = b_axes.iter().map(Vec::len).product();
            let d = values.len().checked_div(nodes).unwrap_or(0);
            let table = TabularPayoff::new(d, b_axes.clone(), values.clone(), interaction.clone())?;
            Ok(PayoffModel::tabular(table))
        }
        PayoffConfig::Inspection {
            legal,
            levels,
            fine: f,
            detection: d,
        } => PayoffModel::inspection(*legal, levels.clone(), fine(f), detection(d)),
        PayoffConfig::Corruption {
            wage,
            reservation_wage,
            levels,
            fine: f,
            detection: d,
        } => PayoffModel::corruption(*wage, *reservation_wage, levels.clone(), fine(f), detection(d)),
        PayoffConfig::Cyber {
            infection_cost,
            levels,
            detection: d,
        } => PayoffModel::cyber(*infection_cost, levels.clone(), detection(d)),
        PayoffConfig::Terror {
            gains,
            fail,
            success,
            detection: d,
        } => PayoffModel::terror(gains.clone(), affine(fail), affine(success), detection(d)),
    }
}

fn term(t: TermConfig) -> GrowthTerm {
    match t {
        TermConfig::Birth { to } => GrowthTerm::Birth { to },
        TermConfig::Death { from } => GrowthTerm::Death { from },
        TermConfig::Mutation { from, to } => GrowthTerm::Mutation { from, to },
        TermConfig::Split { from, into } => GrowthTerm::Split {
            from,
            into: (into[0], into[1]),
        },
        TermConfig::Merge { from, to } => GrowthTerm::Merge {
            from: (from[0], from[1]),
            to,
        },
        TermConfig::Regroup { from, to } => GrowthTerm::Regroup {
            from: (from[0], from[1]),
            to: (to[0], to[1]),
        },
    }
}

fn rate_kernel(k: &KernelConfig) -> RateKernel {
    match k.kind {
        KernelKind::Strategic => RateKernel::Strategic,
        KernelKind::Constant if k.rate == 0.0 => RateKernel::Zero,
        KernelKind::Constant => RateKernel::Constant(k.rate),
    }
}

fn control_rate(lambda: f64, slope: f64) -> ControlRate {
    if slope == 0.0 {
        ControlRate::Constant(lambda)
    } else {
        ControlRate::Affine {
            intercept: lambda,
            slope,
        }
    }
}

pub fn build_dynamics(m: &ModelConfig) -> CoreResult<Dynamics> {
    let dynamics = match m {
        ModelConfig::Replicator { payoff, kappa } => Dynamics::Replicator {
            payoff: build_payoff(payoff)?,
            kappa: *kappa,
        },
        ModelConfig::KthOrder {
            payoff,
            kappa,
            max_order,
        } => Dynamics::KthOrder {
            payoff: build_payoff(payoff)?,
            kappa: *kappa,
            max_order: *max_order,
            group_rate: GroupRate::Spread,
        },
        ModelConfig::Multiclass {
            payoffs,
            communication,
            class_fractions,
            class_kappas,
        } => {
            let mode = match communication {
                Communication::Full => CommMode::FullCommunication,
                Communication::None => CommMode::NoCommunication,
            };
            Dynamics::Multiclass {
                payoffs: payoffs.iter().map(build_payoff).collect::<CoreResult<_>>()?,
                classes: ClassStructure::new(mode, class_fractions.clone(), class_kappas.clone())?,
            }
        }
        ModelConfig::Growth { max_index, channels } => {
            let channels = channels
                .iter()
                .map(|c| {
                    let law = if c.mass_action {
                        RateLaw::MassAction {
                            c: c.rate,
                            control_slope: c.control_slope,
                        }
                    } else {
                        RateLaw::Constant(c.rate)
                    };
                    GrowthChannel::new(term(c.term), law)
                })
                .collect();
            Dynamics::Growth {
                coeffs: GrowthCoefficients::new(channels),
                max_index: *max_index,
            }
        }
        ModelConfig::Coalition {
            max_index,
            merge,
            split,
            size_payoff,
            attachment,
        } => {
            let mut kernel = KernelSpec::new(
                rate_kernel(merge),
                rate_kernel(split),
                Coefficients::Uniform(merge.weight),
                Coefficients::Uniform(split.weight),
                size_payoff.clone().map(SizePayoff::Table),
            )?;
            if let Some(a) = attachment {
                kernel = kernel.with_attachment(Attachment::new(a.alpha, control_rate(a.lambda, a.lambda_slope))?);
            }
            Dynamics::Coalition {
                kernel,
                max_index: *max_index,
            }
        }
        ModelConfig::Attachment {
            max_index,
            alpha,
            lambda,
            lambda_slope,
        } => Dynamics::Attachment {
            attach: Attachment::new(*alpha, control_rate(*lambda, *lambda_slope))?,
            max_index: *max_index,
        },
    };
    dynamics.validate()?;
    Ok(dynamics)
}

fn model_payoff(m: &ModelConfig) -> Option<&PayoffConfig> {
    match m {
        ModelConfig::Replicator { payoff, .. } | ModelConfig::KthOrder { payoff, .. } => Some(payoff),
        ModelConfig::Multiclass { payoffs, .. } => payoffs.first(),
        _ => None,
    }
}

pub fn build_principal(config: &ScenarioConfig) -> CoreResult<PrincipalModel> {
    let p = &config.principal;
    let reward = match &p.reward {
        RewardConfig::Constant { value } => PrincipalReward::Constant(*value),
        RewardConfig::Quadratic {
            x_weights,
            b_linear,
            b_quadratic,
            cross,
        } => PrincipalReward::Quadratic {
            x_weights: x_weights.clone(),
            b_linear: b_linear.clone(),
            b_quadratic: b_quadratic.clone(),
            cross: cross.clone(),
        },
        RewardConfig::TerrorCost => match model_payoff(&config.model) {
            Some(payoff @ PayoffConfig::Terror { .. }) => PrincipalReward::TerrorCost(build_payoff(payoff)?),
            _ => {
                return Err(pressgame_core::Error::config(
                    "principal.reward terror_cost needs a terror payoff in the model",
                ))
            }
        },
    };
    let control = if p.control.is_empty() { vec![0.0] } else { p.control.clone() };
    let control_box = if p.bounds.is_empty() {
        ControlBox::new(control.iter().map(|c| (*c, *c)).collect())?
    } else {
        ControlBox::new(p.bounds.iter().map(|[lo, hi]| (*lo, *hi)).collect())?
    };
    let mode = match p.mode {
        ModeConfig::Fixed => PrincipalMode::Fixed(control),
        ModeConfig::BestResponse => PrincipalMode::BestResponse,
    };
    PrincipalModel::new(reward, control_box, mode)
}

fn initial_state(config: &ScenarioConfig, dynamics: &Dynamics) -> Result<Vec<f64>, String> {
    let dim = dynamics.state_dim();
    let given = &config.experiment.initial;
    if dynamics.is_simplex() {
        if given.is_empty() {
            let mut x = vec![0.0; dim];
            for (start, len) in dynamics.simplex_blocks() {
                x[start..start + len].fill(1.0 / len as f64);
            }
            return Ok(x);
        }
        if given.len() != dim {
            return Err(format!(
                "experiment.initial has {} entries, the model state has {dim}",
                given.len()
            ));
        }
        for (start, len) in dynamics.simplex_blocks() {
            let block = &given[start..start + len];
            let s: f64 = block.iter().sum();
            if block.iter().any(|v| v.is_nan() || *v < 0.0) || (s - 1.0).abs() > 1e-9 {
                return Err(format!(
                    "experiment.initial entries {start}..{} must be non-negative and sum to 1 (sum is {s})",
                    start + len
                ));
            }
        }
        Ok(given.clone())
    } else {
        if given.is_empty() {
            return Err("experiment.initial is required for countable-state models".into());
        }
        if given.len() > dim {
            return Err(format!(
                "experiment.initial has {} entries, more than max_index = {dim}",
                given.len()
            ));
        }
        if given.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err("experiment.initial densities must be finite and non-negative".into());
        }
        let mut x = given.clone();
        x.resize(dim, 0.0);
        Ok(x)
    }
}

fn check(errors: &mut Vec<String>, ok: bool, msg: impl FnOnce() -> String) {
    if !ok {
        errors.push(msg());
    }
}

/// Every problem with the configuration; empty when it is usable.
pub fn validate(config: &ScenarioConfig) -> Vec<String> {
    let mut errors = Vec::new();
    let mut model_ok = true;

    match &config.model {
        ModelConfig::Multiclass {
            payoffs,
            class_fractions,
            class_kappas,
            ..
        } => {
            let s: f64 = class_fractions.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                errors.push(format!("model.class_fractions must sum to 1 (sum is {s})"));
                model_ok = false;
            }
            if class_fractions.len() != class_kappas.len() || class_fractions.len() != payoffs.len() {
                errors.push(format!(
                    "model.class_fractions, model.class_kappas and model.payoffs must have equal lengths (got {}, {}, {})",
                    class_fractions.len(),
                    class_kappas.len(),
                    payoffs.len()
                ));
                model_ok = false;
            }
        }
        ModelConfig::Growth { max_index, channels } => {
            for (i, c) in channels.iter().enumerate() {
                if let Some(k) = term(c.term).produced().into_iter().chain(term(c.term).consumed()).max() {
                    check(&mut errors, k < *max_index, || {
                        format!("model.channels[{i}] touches slot {k}, beyond max_index = {max_index}")
                    });
                }
                check(&mut errors, c.rate >= 0.0 && c.rate.is_finite(), || {
                    format!("model.channels[{i}].rate must be finite and non-negative")
                });
                check(&mut errors, c.mass_action || c.control_slope == 0.0, || {
                    format!("model.channels[{i}].control_slope needs mass_action = true")
                });
            }
            model_ok = errors.is_empty();
        }
        _ => {}
    }

    let dynamics = if model_ok {
        match build_dynamics(&config.model) {
            Ok(d) => Some(d),
            Err(e) => {
                errors.push(format!("model: {e}"));
                None
            }
        }
    } else {
        None
    };

    if let Err(e) = build_principal(config) {
        errors.push(format!("principal: {e}"));
    }
    let p = &config.principal;
    check(&mut errors, p.mode != ModeConfig::BestResponse || !p.bounds.is_empty(), || {
        "principal.bounds are required in best_response mode".into()
    });

    let n = &config.numerics;
    check(&mut errors, n.h_ode > 0.0 && n.h_ode.is_finite(), || {
        format!("numerics.h_ode must be positive (got {})", n.h_ode)
    });
    check(&mut errors, n.rtol > 0.0 && n.atol > 0.0, || {
        "numerics.rtol and numerics.atol must be positive".into()
    });
    check(&mut errors, n.grid_points >= 2, || "numerics.grid_points must be at least 2".into());
    check(&mut errors, n.b_points >= 1, || "numerics.b_points must be at least 1".into());
    check(&mut errors, n.starts >= 1, || "numerics.starts must be at least 1".into());
    check(&mut errors, n.support_tol > 0.0, || "numerics.support_tol must be positive".into());

    let e = &config.experiment;
    check(&mut errors, e.t_end > 0.0 && e.t_end.is_finite(), || {
        format!("experiment.t_end must be positive (got {})", e.t_end)
    });
    check(&mut errors, e.population >= 1, || "experiment.population must be at least 1".into());
    check(&mut errors, e.scale > 0.0 && e.scale <= 1.0, || {
        format!("experiment.scale must lie in (0, 1] (got {})", e.scale)
    });
    check(&mut errors, e.n_runs >= 1, || "experiment.n_runs must be at least 1".into());
    check(
        &mut errors,
        e.n_values.iter().all(|v| *v >= 1) && e.n_values.windows(2).all(|w| w[0] < w[1]),
        || "experiment.n_values must be positive and strictly increasing".into(),
    );
    check(
        &mut errors,
        e.h_values.iter().all(|h| *h > 0.0 && *h <= 1.0) && e.h_values.windows(2).all(|w| w[0] > w[1]),
        || "experiment.h_values must lie in (0, 1] and strictly decrease".into(),
    );
    check(&mut errors, e.tau > 0.0 && e.tau.is_finite(), || {
        format!("experiment.tau must be positive (got {})", e.tau)
    });
    if let Some(beta) = e.beta {
        check(&mut errors, beta > 0.0 && beta < 1.0, || {
            format!("experiment.beta must lie in (0, 1) (got {beta})")
        });
    }
    check(&mut errors, e.tol > 0.0, || "experiment.tol must be positive".into());

    if let Some(d) = &dynamics {
        if let Err(msg) = initial_state(config, d) {
            errors.push(msg);
        }
        let dim = d.state_dim();
        for (name, o) in [("observable", &e.observable), ("terminal", &e.terminal)] {
            match o {
                Some(ObservableConfig::Coordinate { index }) => check(&mut errors, *index < dim, || {
                    format!("experiment.{name}.index {index} is outside the state of dimension {dim}")
                }),
                Some(ObservableConfig::Linear { weights }) => check(&mut errors, weights.len() == dim, || {
                    format!("experiment.{name}.weights has {} entries, the state has {dim}", weights.len())
                }),
                _ => {}
            }
        }
    }
    errors
}
