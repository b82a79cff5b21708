//! Convergence-rate experiments on instances with known limits.

use pressgame_core::exec::Sequential;
use pressgame_core::harness::{
    growth_lln_experiment, lln_experiment, value_convergence_experiment, LimitSide, Regularity, Verdict,
};
use pressgame_core::kinetic::Stepper;
use pressgame_core::model::{
    ControlBox, Dynamics, KernelSpec, PayoffModel, PrincipalMode, PrincipalModel, PrincipalReward, TabularPayoff,
};
use pressgame_core::principal::{ShapleyOptions, ValueTable};

fn fixed() -> PrincipalModel {
    PrincipalModel::fixed(vec![0.0])
}

fn gap_model(c: f64) -> Dynamics {
    Dynamics::replicator(PayoffModel::tabular(TabularPayoff::linear(vec![0.0, c], None).unwrap()), 1.0).unwrap()
}

#[test]
fn constant_observable_has_no_error() {
    let g = |_: &[f64]| 2.5;
    let r = lln_experiment(
        &gap_model(2.0),
        &[0.9, 0.1],
        &fixed(),
        &g,
        1.0,
        &[20, 40, 80],
        50,
        1,
        Regularity::Lipschitz,
        LimitSide::Integrate(Stepper::default()),
        &Sequential,
    )
    .unwrap();
    assert_eq!(r.errors, vec![0.0; 3]);
    assert!(r.noise_dominated.iter().all(|b| *b));
    assert_eq!(r.fitted_order, None);
    assert_eq!(r.verdict, Verdict::Inconclusive);
}

#[test]
fn zero_drift_errors_sit_in_the_noise() {
    let g = |x: &[f64]| x[1];
    let r = lln_experiment(
        &gap_model(0.0),
        &[0.5, 0.5],
        &fixed(),
        &g,
        1.0,
        &[20, 40, 80],
        200,
        4,
        Regularity::Lipschitz,
        LimitSide::Integrate(Stepper::default()),
        &Sequential,
    )
    .unwrap();
    assert!(r.noise_dominated.iter().all(|b| *b));
    assert!(r.fitted_order.is_none());
}

#[test]
fn logistic_errors_decay() {
    let exact = |x0: &[f64]| {
        let e = 2.0f64.exp();
        x0[1] * e / (x0[0] + x0[1] * e)
    };
    let g = |x: &[f64]| x[1];
    let r = lln_experiment(
        &gap_model(2.0),
        &[0.9, 0.1],
        &fixed(),
        &g,
        1.0,
        &[50, 200, 800],
        4000,
        17,
        Regularity::Lipschitz,
        LimitSide::Exact(&exact),
        &Sequential,
    )
    .unwrap();
    assert!(r.monotone, "{r:?}");
    assert_eq!(r.bound_order, 1.0 / 3.0);
    assert_eq!(r.reference_orders, vec![0.5, 1.0 / 3.0]);
}

#[test]
fn coagulation_number_density_converges() {
    let kernel = KernelSpec::constant(1.0, 0.0).unwrap();
    let dy = Dynamics::Coalition { kernel, max_index: 128 };
    let mut x0 = vec![0.0; 128];
    x0[0] = 1.0;
    let m0 = |x: &[f64]| x.iter().sum::<f64>();
    let exact = |x: &[f64]| {
        let n0: f64 = x.iter().sum();
        n0 / (1.0 + n0)
    };
    let r = growth_lln_experiment(
        &dy,
        &x0,
        &fixed(),
        &m0,
        1.0,
        &[1.0 / 50.0, 1.0 / 200.0, 1.0 / 800.0],
        1000,
        8,
        Regularity::Smooth,
        false,
        LimitSide::Exact(&exact),
        &Sequential,
    )
    .unwrap();
    assert_eq!(r.n_values, vec![50, 200, 800]);
    assert!(r.monotone, "{r:?}");
    assert_ne!(r.verdict, Verdict::Invalid);

    // Mass is conserved on both sides.
    let m1 = |x: &[f64]| x.iter().enumerate().map(|(k, v)| (k + 1) as f64 * v).sum::<f64>();
    let r = growth_lln_experiment(
        &dy,
        &x0,
        &fixed(),
        &m1,
        1.0,
        &[1.0 / 50.0, 1.0 / 100.0],
        50,
        8,
        Regularity::Lipschitz,
        false,
        LimitSide::Integrate(Stepper::default()),
        &Sequential,
    )
    .unwrap();
    assert!(r.errors.iter().all(|e| *e < 1e-9), "{:?}", r.errors);
}

#[test]
fn truncated_runs_are_marked_invalid() {
    let kernel = KernelSpec::constant(5.0, 0.0).unwrap();
    let dy = Dynamics::Coalition { kernel, max_index: 4 };
    let x0 = vec![1.0, 0.0, 0.0, 0.0];
    let m0 = |x: &[f64]| x.iter().sum::<f64>();
    let r = growth_lln_experiment(
        &dy,
        &x0,
        &fixed(),
        &m0,
        1.0,
        &[1.0 / 20.0, 1.0 / 40.0],
        20,
        2,
        Regularity::Smooth,
        false,
        LimitSide::Integrate(Stepper::default()),
        &Sequential,
    )
    .unwrap();
    assert_eq!(r.verdict, Verdict::Invalid);
}

fn planning_instance() -> (Dynamics, PrincipalModel) {
    let table = TabularPayoff::new(2, vec![vec![0.0, 1.0]], vec![0.0, 0.0, 1.0, -1.0], None).unwrap();
    let dy = Dynamics::replicator(PayoffModel::tabular(table), 1.0).unwrap();
    let p = PrincipalModel::new(
        PrincipalReward::custom(|x, b| 0.4 * b[0] - 0.5 * b[0] * b[0] + 1.5 * x[1]),
        ControlBox::interval(0.0, 1.0).unwrap(),
        PrincipalMode::BestResponse,
    )
    .unwrap();
    (dy, p)
}

#[test]
fn value_convergence_without_steps_is_exact() {
    let (dy, p) = planning_instance();
    let v0 = ValueTable::on_simplex(2, 5, |x| x[1] * x[1]).unwrap();
    let opts = ShapleyOptions { refine: false, b_points: 3, ..ShapleyOptions::new(0.5) };
    let r = value_convergence_experiment(&dy, &p, &v0, 0, &opts, 2, &[10, 20], 10, 0, &Sequential).unwrap();
    assert_eq!(r.errors, vec![0.0, 0.0]);
}

#[test]
fn value_convergence_decays() {
    let (dy, p) = planning_instance();
    let v0 = ValueTable::on_simplex(2, 5, |x| x[1]).unwrap();
    let opts = ShapleyOptions { refine: false, b_points: 3, ..ShapleyOptions::new(0.5) };
    let r = value_convergence_experiment(&dy, &p, &v0, 3, &opts, 2, &[100, 400, 1600], 2000, 5, &Sequential).unwrap();
    assert!(r.monotone, "{r:?}");
    assert_eq!(r.bound_order, 1.0 / 3.0);
}
