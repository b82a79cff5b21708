//! Kinetic limits: closed-form oracles, invariants of the flow and the
//! moment bounds for growth models.

use std::sync::Arc;

use pressgame_core::kinetic::{
    drift, drift_attachment, drift_growth, drift_smoluchowski, integrate, lyapunov_check, LyapunovMode,
    LyapunovWeight, Stepper,
};
use pressgame_core::model::{
    Attachment, ClassStructure, CommMode, ControlRate, Dynamics, GroupRate, GrowthChannel, GrowthCoefficients,
    GrowthTerm, KernelSpec, PayoffModel, PrincipalModel, RateLaw, TabularPayoff,
};
use proptest::prelude::*;

fn fixed() -> PrincipalModel {
    PrincipalModel::fixed(vec![0.0])
}

fn linear_payoff(constants: Vec<f64>, coeffs: Vec<f64>) -> PayoffModel {
    PayoffModel::tabular(TabularPayoff::linear(constants, Some(coeffs)).unwrap())
}

fn simplex_point(raw: &[f64]) -> Vec<f64> {
    let s: f64 = raw.iter().sum();
    raw.iter().map(|v| v / s).collect()
}

fn logistic(x0: f64, c: f64, t: f64) -> f64 {
    let e = (c * t).exp();
    x0 * e / (1.0 - x0 + x0 * e)
}

#[test]
fn logistic_endpoint_matches_closed_form() {
    let p = PayoffModel::tabular(TabularPayoff::linear(vec![0.0, 2.0], None).unwrap());
    let dy = Dynamics::replicator(p, 1.0).unwrap();
    let run = integrate(&dy, &[0.9, 0.1], &fixed(), 1.0, Stepper::default()).unwrap();
    let x2 = run.trajectory.final_state().unwrap()[1];
    let oracle = logistic(0.1, 2.0, 1.0);
    assert!((x2 - oracle).abs() <= 1e-6 * oracle);
    assert_eq!(run.stats.renormalizations, 0);
}

#[test]
fn constant_coagulation_halves_the_number_density() {
    let kernel = KernelSpec::constant(1.0, 0.0).unwrap();
    let dy = Dynamics::Coalition { kernel, max_index: 256 };
    let mut x0 = vec![0.0; 256];
    x0[0] = 1.0;
    let run = integrate(&dy, &x0, &fixed(), 1.0, Stepper::default()).unwrap();
    let x = run.trajectory.final_state().unwrap();
    let m0: f64 = x.iter().sum();
    assert!((m0 - 0.5).abs() < 1e-6, "m0 = {m0}");
    assert!(run.stats.mass_lost < 1e-6);
    let m1: f64 = x.iter().enumerate().map(|(k, v)| (k + 1) as f64 * v).sum();
    assert!((m1 - 1.0).abs() < 1e-6);
}

#[test]
fn attachment_first_moment_closed_form() {
    let attach = Attachment::new(0.5, ControlRate::Constant(1.0)).unwrap();
    let dy = Dynamics::Attachment { attach, max_index: 96 };
    let mut x0 = vec![0.0; 96];
    x0[0] = 1.0;
    let run = integrate(&dy, &x0, &fixed(), 1.0, Stepper::default()).unwrap();
    let x = run.trajectory.final_state().unwrap();
    let m1: f64 = x.iter().enumerate().map(|(k, v)| (k + 1) as f64 * v).sum();
    let oracle = 2.0 * 0.5f64.exp() - 1.0;
    assert!((m1 - oracle).abs() < 1e-6, "m1 = {m1}");
    let report = lyapunov_check(
        &run.trajectory,
        &LyapunovWeight::sizes(96),
        LyapunovMode::Exact { a: 0.5, b: 0.5 },
        1e-6,
    )
    .unwrap();
    assert!(report.holds, "{report:?}");
}

/// Birth into size 1, upward mutation, splitting and death: the mass moment
/// grows at most like `a (L, x) + b` with `a = mu`, `b = beta`.
fn subcritical_growth(beta: f64, mu: f64, split: f64, death: f64) -> Dynamics {
    let mut channels = vec![GrowthChannel::new(GrowthTerm::Birth { to: 0 }, RateLaw::Constant(beta))];
    for k in 0..11 {
        channels.push(GrowthChannel::new(
            GrowthTerm::Mutation { from: k, to: k + 1 },
            RateLaw::MassAction { c: mu / (k + 1) as f64, control_slope: 0.0 },
        ));
        channels.push(GrowthChannel::new(
            GrowthTerm::Death { from: k },
            RateLaw::MassAction { c: death, control_slope: 0.0 },
        ));
    }
    for k in 1..12 {
        channels.push(GrowthChannel::new(
            GrowthTerm::Split { from: k, into: (0, k - 1) },
            RateLaw::MassAction { c: split, control_slope: 0.0 },
        ));
    }
    Dynamics::Growth { coeffs: GrowthCoefficients::new(channels), max_index: 48 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn subcritical_growth_respects_the_moment_bound(
        beta in 0.0f64..2.0,
        mu in 0.0f64..1.0,
        split in 0.0f64..1.0,
        death in 0.0f64..0.5,
        raw in prop::collection::vec(0.0f64..1.0, 12),
    ) {
        let dy = subcritical_growth(beta, mu, split, death);
        let mut x0 = raw.clone();
        x0.resize(48, 0.0);
        let run = integrate(&dy, &x0, &fixed(), 5.0, Stepper::default()).unwrap();
        let report = lyapunov_check(
            &run.trajectory,
            &LyapunovWeight::sizes(48),
            LyapunovMode::Subcritical { a: mu, b: beta },
            1e-9,
        ).unwrap();
        prop_assert!(report.holds, "{:?}", report);
    }

    #[test]
    fn replicator_flow_stays_on_the_simplex(
        raw in prop::collection::vec(0.01f64..1.0, 3),
        c in prop::collection::vec(-1.0f64..1.0, 3),
        a in prop::collection::vec(-2.0f64..2.0, 9),
    ) {
        let dy = Dynamics::replicator(linear_payoff(c, a), 1.0).unwrap();
        let x0 = simplex_point(&raw);
        let run = integrate(&dy, &x0, &fixed(), 10.0, Stepper::default()).unwrap();
        for x in &run.trajectory.states {
            prop_assert!((x.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            prop_assert!(x.iter().all(|v| *v >= -1e-12));
        }
    }

    #[test]
    fn kth_order_and_multiclass_flows_stay_on_the_simplex(
        raw in prop::collection::vec(0.01f64..1.0, 4),
        c in prop::collection::vec(-1.0f64..1.0, 4),
        a in prop::collection::vec(-1.0f64..1.0, 16),
        full in any::<bool>(),
    ) {
        let payoff = linear_payoff(c.clone(), a.clone());
        let dy = Dynamics::KthOrder { payoff, kappa: 1.0, max_order: 3, group_rate: GroupRate::Spread };
        let run = integrate(&dy, &simplex_point(&raw), &fixed(), 10.0, Stepper::default()).unwrap();
        for x in &run.trajectory.states {
            prop_assert!((x.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            prop_assert!(x.iter().all(|v| *v >= -1e-12));
        }

        let mode = if full { CommMode::FullCommunication } else { CommMode::NoCommunication };
        let p1 = linear_payoff(c[..2].to_vec(), a[..4].to_vec());
        let p2 = linear_payoff(c[2..].to_vec(), a[4..8].to_vec());
        let classes = ClassStructure::new(mode, vec![0.4, 0.6], vec![1.0, 0.5]).unwrap();
        let dy = Dynamics::Multiclass { payoffs: vec![p1, p2], classes };
        let x0 = if full {
            simplex_point(&raw)
        } else {
            let mut v = simplex_point(&raw[..2]);
            v.extend(simplex_point(&raw[2..]));
            v
        };
        let run = integrate(&dy, &x0, &fixed(), 10.0, Stepper::default()).unwrap();
        for x in &run.trajectory.states {
            let sums: Vec<f64> = if full { vec![x.iter().sum()] } else { vec![x[0] + x[1], x[2] + x[3]] };
            for s in sums {
                prop_assert!((s - 1.0).abs() <= 1e-9);
            }
            prop_assert!(x.iter().all(|v| *v >= -1e-12));
        }
    }

    #[test]
    fn vertices_are_rest_points(
        c in prop::collection::vec(-3.0f64..3.0, 4),
        a in prop::collection::vec(-3.0f64..3.0, 16),
        order in 2usize..=4,
    ) {
        let payoff = linear_payoff(c, a);
        let rep = Dynamics::replicator(payoff.clone(), 2.0).unwrap();
        let kth = Dynamics::KthOrder { payoff, kappa: 1.0, max_order: order, group_rate: GroupRate::Spread };
        for j in 0..4 {
            let mut x = vec![0.0; 4];
            x[j] = 1.0;
            prop_assert!(drift(&rep, &x, &[0.0]).unwrap().iter().all(|v| *v == 0.0));
            prop_assert!(drift(&kth, &x, &[0.0]).unwrap().iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn kth_order_drift_sums_to_zero(
        raw in prop::collection::vec(0.0f64..1.0, 4),
        c in prop::collection::vec(-3.0f64..3.0, 4),
        a in prop::collection::vec(-3.0f64..3.0, 16),
    ) {
        prop_assume!(raw.iter().sum::<f64>() > 0.1);
        let payoff = linear_payoff(c, a);
        let kth = Dynamics::KthOrder { payoff, kappa: 1.0, max_order: 4, group_rate: GroupRate::Spread };
        let v = drift(&kth, &simplex_point(&raw), &[0.0]).unwrap();
        prop_assert!(v.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn growth_drift_matches_the_ungrouped_generator(
        rates in prop::collection::vec(0.0f64..2.0, 6),
        slopes in prop::collection::vec(-1.0f64..1.0, 6),
        raw in prop::collection::vec(0.01f64..2.0, 8),
        g in prop::collection::vec(-1.0f64..1.0, 8),
        b in 0.0f64..1.0,
    ) {
        let terms = [
            GrowthTerm::Birth { to: 2 },
            GrowthTerm::Death { from: 1 },
            GrowthTerm::Mutation { from: 0, to: 3 },
            GrowthTerm::Split { from: 5, into: (1, 2) },
            GrowthTerm::Merge { from: (0, 1), to: 4 },
            GrowthTerm::Regroup { from: (2, 2), to: (6, 7) },
        ];
        let channels: Vec<GrowthChannel> = terms
            .iter()
            .zip(rates.iter().zip(&slopes))
            .map(|(t, (c, s))| GrowthChannel::new(*t, RateLaw::MassAction { c: *c, control_slope: *s }))
            .collect();
        let coeffs = GrowthCoefficients::new(channels);
        let v = drift_growth(&raw, &coeffs, &[b]).unwrap();
        let paired: f64 = v.iter().zip(&g).map(|(a, b)| a * b).sum();
        // Each bracket contributes coefficient * (sum over produced g - sum over consumed g).
        let mut oracle = 0.0;
        for (t, (c, s)) in terms.iter().zip(rates.iter().zip(&slopes)) {
            let mut coef = (c + s * b).max(0.0);
            let (gain, loss): (Vec<usize>, Vec<usize>) = match *t {
                GrowthTerm::Birth { to } => (vec![to], vec![]),
                GrowthTerm::Death { from } => (vec![], vec![from]),
                GrowthTerm::Mutation { from, to } => (vec![to], vec![from]),
                GrowthTerm::Split { from, into } => (vec![into.0, into.1], vec![from]),
                GrowthTerm::Merge { from, to } => (vec![to], vec![from.0, from.1]),
                GrowthTerm::Regroup { from, to } => (vec![to.0, to.1], vec![from.0, from.1]),
            };
            for i in &loss {
                coef *= raw[*i];
            }
            let dg: f64 = gain.iter().map(|i| g[*i]).sum::<f64>() - loss.iter().map(|i| g[*i]).sum::<f64>();
            oracle += coef * dg;
        }
        prop_assert!((paired - oracle).abs() <= 1e-12 * oracle.abs().max(1.0));
    }

    #[test]
    fn smoluchowski_conserves_mass_inside_the_truncation(
        raw in prop::collection::vec(0.0f64..1.0, 8),
        merge in 0.0f64..2.0,
        split in 0.0f64..2.0,
    ) {
        let kernel = KernelSpec::constant(merge, split).unwrap();
        let mut x = raw.clone();
        x.resize(32, 0.0);
        let (v, lost) = drift_smoluchowski(&x, &kernel, &[0.0]).unwrap();
        prop_assert_eq!(lost, 0.0);
        let m: f64 = v.iter().enumerate().map(|(k, d)| (k + 1) as f64 * d).sum();
        prop_assert!(m.abs() < 1e-12);
    }

    #[test]
    fn attachment_first_moment_rate(
        raw in prop::collection::vec(0.0f64..1.0, 10),
        alpha in 0.0f64..1.0,
        lambda in 0.0f64..3.0,
    ) {
        let attach = Attachment::new(alpha, ControlRate::Custom(Arc::new(move |_, _| lambda))).unwrap();
        let mut x = raw.clone();
        x.resize(20, 0.0);
        let v = drift_attachment(&x, &attach, &[0.0]).unwrap();
        let lhs: f64 = v.iter().enumerate().map(|(k, d)| (k + 1) as f64 * d).sum();
        let m1: f64 = x.iter().enumerate().map(|(k, d)| (k + 1) as f64 * d).sum();
        let rhs = alpha * lambda + (1.0 - alpha) * lambda * m1;
        prop_assert!((lhs - rhs).abs() < 1e-12 * rhs.max(1.0));
    }
}

#[test]
fn coalition_mass_is_conserved_along_the_flow() {
    let kernel = KernelSpec::constant(0.5, 1.0).unwrap();
    let dy = Dynamics::Coalition { kernel, max_index: 64 };
    let mut x0 = vec![0.0; 64];
    x0[..4].copy_from_slice(&[0.3, 0.2, 0.1, 0.05]);
    let run = integrate(&dy, &x0, &fixed(), 2.0, Stepper::default()).unwrap();
    let report = lyapunov_check(&run.trajectory, &LyapunovWeight::sizes(64), LyapunovMode::Exact { a: 0.0, b: 0.0 }, 1e-8)
        .unwrap();
    assert!(report.holds, "{report:?}");
}
