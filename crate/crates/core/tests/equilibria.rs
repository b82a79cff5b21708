//! Rest points of the imitation dynamics and the approximate Nash property
//! of their lattice approximations.

use pressgame_core::equilibria::{
    check_epsilon_nash, find_all, find_fixed_points, lipschitz_estimate, rational_approximation, residual,
    turnpike_scan, SolverOptions,
};
use pressgame_core::kinetic::drift_replicator;
use pressgame_core::model::{
    ControlBox, PayoffModel, PrincipalMode, PrincipalModel, PrincipalReward, TabularPayoff,
};
use pressgame_core::rng::Stream;
use proptest::prelude::*;

fn fixed() -> PrincipalModel {
    PrincipalModel::fixed(vec![0.0])
}

fn linear(c: Vec<f64>, a: Vec<f64>) -> PayoffModel {
    PayoffModel::tabular(TabularPayoff::linear(c, Some(a)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn returned_points_are_rest_points_with_flat_payoffs(
        d in 2usize..=4,
        seed in any::<u64>(),
    ) {
        let mut rng = Stream::new(seed);
        let c: Vec<f64> = (0..d).map(|_| 2.0 * rng.uniform() - 1.0).collect();
        let a: Vec<f64> = (0..d * d).map(|_| 4.0 * rng.uniform() - 2.0).collect();
        let payoff = linear(c, a);
        let opts = SolverOptions { seed, ..SolverOptions::default() };
        let all = find_all(&payoff, &fixed(), &opts).unwrap();
        for rec in &all {
            prop_assert!(rec.residual < 1e-9);
            prop_assert!(rec.payoff_spread < 1e-7, "spread {}", rec.payoff_spread);
            let fresh = drift_replicator(&rec.x, &payoff, &rec.control, 1.0).unwrap();
            let fresh = fresh.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assert!((fresh - rec.residual).abs() <= 1e-12);
            let expected: Vec<usize> = (0..d).filter(|k| rec.x[*k] >= opts.support_tol).collect();
            prop_assert_eq!(&rec.support, &expected);
        }
        for j in 0..d {
            prop_assert!(all.iter().any(|r| r.support == vec![j]), "vertex {} missing", j);
        }
    }
}

#[test]
fn every_zero_set_yields_only_sound_points() {
    let mut rng = Stream::new(5);
    for _ in 0..20 {
        let d = 3;
        let c: Vec<f64> = (0..d).map(|_| rng.uniform()).collect();
        let a: Vec<f64> = (0..d * d).map(|_| 2.0 * rng.uniform() - 1.0).collect();
        let payoff = linear(c, a);
        for zero in [vec![], vec![0], vec![1], vec![2], vec![0, 1], vec![0, 2], vec![1, 2]] {
            for rec in find_fixed_points(&payoff, &fixed(), &zero, &SolverOptions::default()).unwrap() {
                assert!(zero.iter().all(|k| rec.x[*k] == 0.0));
                assert!(rec.residual < 1e-9 && rec.payoff_spread < 1e-7);
            }
        }
    }
}

#[test]
fn anti_coordination_rest_point_and_residual() {
    let payoff = linear(vec![0.0, 0.0], vec![0.0, 1.0, 1.0, 0.0]);
    let found = find_fixed_points(&payoff, &fixed(), &[], &SolverOptions::default()).unwrap();
    assert_eq!(found.len(), 1);
    assert!((found[0].x[0] - 0.5).abs() < 1e-9);

    let gap = PayoffModel::tabular(TabularPayoff::linear(vec![0.0, 2.0], None).unwrap());
    assert!((residual(&[0.5, 0.5], &gap, &fixed(), 1.0).unwrap() - 0.5).abs() < 1e-15);
    assert!(find_fixed_points(&gap, &fixed(), &[], &SolverOptions::default()).unwrap().is_empty());
}

#[test]
fn lattice_approximants_are_epsilon_nash() {
    let mut rng = Stream::new(77);
    let mut checked = 0;
    for instance in 0..100u64 {
        let d = 2 + (instance % 3) as usize;
        let c: Vec<f64> = (0..d).map(|_| rng.uniform()).collect();
        let a: Vec<f64> = (0..d * d).map(|_| 2.0 * rng.uniform() - 1.0).collect();
        let payoff = linear(c, a);
        let principal = fixed();
        let r_hat = lipschitz_estimate(&payoff, &principal).unwrap();
        let opts = SolverOptions { seed: instance, ..SolverOptions::default() };
        let all = find_all(&payoff, &principal, &opts).unwrap();
        let dominant: Vec<_> = all.iter().filter(|r| r.dominant).collect();
        assert!(!dominant.is_empty(), "instance {instance} has no dominant rest point");
        for rec in dominant {
            for n in [50u64, 100, 200] {
                let x_n = rational_approximation(&rec.x, n).unwrap();
                for (a, b) in x_n.iter().zip(&rec.x) {
                    assert!((a - b).abs() <= 1.0 / n as f64 + 1e-15);
                }
                let eps = check_epsilon_nash(&x_n, n, &payoff, &principal).unwrap();
                let bound = 2.0 * r_hat * d as f64 / n as f64 + 1e-9;
                assert!(eps <= bound, "instance {instance}, N = {n}: eps {eps} > {bound}");
                checked += 1;
            }
        }
    }
    assert!(checked >= 300);
}

#[test]
fn deviation_check_rejects_off_lattice_states() {
    let payoff = linear(vec![0.0, 0.0], vec![0.0; 4]);
    assert!(check_epsilon_nash(&[0.3333, 0.6667], 3, &payoff, &fixed()).is_err());
    assert_eq!(check_epsilon_nash(&[1.0 / 3.0, 2.0 / 3.0], 3, &payoff, &fixed()).unwrap(), 0.0);
    assert_eq!(rational_approximation(&[0.5, 0.5], 3).unwrap(), vec![2.0 / 3.0, 1.0 / 3.0]);
}

#[test]
fn turnpike_scan_picks_the_better_vertex() {
    // Constant payoff gap: only vertices are rest points for every b.
    let payoff = PayoffModel::tabular(TabularPayoff::linear(vec![0.0, 1.0], None).unwrap());
    let reward = PrincipalReward::custom(|x, b| x[0] * b[0] + x[1] * (1.0 - b[0]));
    let principal = PrincipalModel::new(reward, ControlBox::interval(0.0, 1.0).unwrap(), PrincipalMode::BestResponse)
        .unwrap();
    let scan = turnpike_scan(&payoff, &principal, 5, &SolverOptions::default()).unwrap();
    assert_eq!(scan.len(), 10);
    for w in scan.windows(2) {
        assert!(w[0].value >= w[1].value);
    }
    for cand in &scan {
        assert!(cand.x == vec![1.0, 0.0] || cand.x == vec![0.0, 1.0]);
        let expected = if cand.x[0] == 1.0 { cand.b[0] } else { 1.0 - cand.b[0] };
        assert_eq!(cand.value, expected);
    }
    assert_eq!(scan[0].value, 1.0);
}
