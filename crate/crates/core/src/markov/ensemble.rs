use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exec::{Executor, Sample};
use crate::model::{Dynamics, OccupationState, PrincipalModel};
use crate::rng::Stream;

use super::simulate::simulate_final;

/// Monte-Carlo estimate of `E g(X(t))`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnsembleStats {
    #[cfg_attr(feature = "serde", serde(rename = "g_mean"))]
    pub mean: f64,
    #[cfg_attr(feature = "serde", serde(rename = "g_stderr"))]
    pub std_error: f64,
    pub n_runs: usize,
    pub master_seed: u64,
    pub blocked_rate_max: f64,
}

/// Runs `n_runs` replicates, replicate `r` on stream `r` of `master_seed`,
/// and reduces them in replicate order.
#[allow(clippy::too_many_arguments)]
pub fn ensemble_mean(
    dynamics: &Dynamics,
    x0: &OccupationState,
    principal: &PrincipalModel,
    t: f64,
    g: &(dyn Fn(&[f64]) -> f64 + Sync),
    n_runs: usize,
    master_seed: u64,
    executor: &dyn Executor,
) -> Result<EnsembleStats> {
    if n_runs < 2 {
        return Err(Error::input("an ensemble needs at least two runs"));
    }
    let job = |r: usize| -> Result<Sample> {
        let mut rng = Stream::replicate(master_seed, r as u64);
        let end = simulate_final(dynamics, x0, principal, t, &mut rng)?;
        let x = dynamics.observe(end.state.counts(), end.state.scale());
        Ok(Sample {
            value: g(&x),
            blocked_rate_max: end.blocked_rate_max,
        })
    };
    let samples = executor.run(n_runs, &job);
    reduce(samples, master_seed)
}

/// Mean and standard error of per-replicate samples, in index order.
pub(crate) fn reduce(samples: Vec<Result<Sample>>, master_seed: u64) -> Result<EnsembleStats> {
    let n = samples.len();
    let mut values = Vec::with_capacity(n);
    let mut blocked: f64 = 0.0;
    for (r, s) in samples.into_iter().enumerate() {
        let s = s.map_err(|e| Error::Replicate {
            replicate: r,
            source: Box::new(e),
        })?;
        values.push(s.value);
        blocked = blocked.max(s.blocked_rate_max);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    Ok(EnsembleStats {
        mean,
        std_error: libm::sqrt(var / n as f64),
        n_runs: n,
        master_seed,
        blocked_rate_max: blocked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::model::{PayoffModel, TabularPayoff};

    #[test]
    fn constant_observable_has_zero_error() {
        let p = PayoffModel::tabular(TabularPayoff::linear(alloc::vec![0.0, 1.0], None).unwrap());
        let dy = Dynamics::replicator(p, 1.0).unwrap();
        let x0 = OccupationState::population(alloc::vec![3, 3]).unwrap();
        let s = ensemble_mean(&dy, &x0, &PrincipalModel::fixed(alloc::vec![0.0]), 1.0, &|_| 2.5, 8, 4, &Sequential)
            .unwrap();
        assert_eq!(s.mean, 2.5);
        assert_eq!(s.std_error, 0.0);
    }

    #[test]
    fn failures_carry_replicate_index() {
        let samples = alloc::vec![
            Ok(Sample { value: 1.0, blocked_rate_max: 0.0 }),
            Err(Error::input("boom")),
        ];
        match reduce(samples, 0) {
            Err(Error::Replicate { replicate, .. }) => assert_eq!(replicate, 1),
            other => panic!("unexpected {other:?}"),
        }
    }
}
