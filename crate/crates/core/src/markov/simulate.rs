use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{Dynamics, OccupationState, PrincipalModel};
use crate::rng::Stream;
use crate::trajectory::Trajectory;

use super::build::transitions;
use super::transitions::TransitionList;

/// A recorded sample path.
#[derive(Debug, Clone)]
pub struct ChainPath {
    /// One row per event (plus the initial and final rows); states are the
    /// observed macroscopic state, controls the `b` in force from that time.
    pub trajectory: Trajectory,
    pub end: ChainEnd,
}

/// Terminal data of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainEnd {
    pub state: OccupationState,
    pub events: u64,
    /// Largest rate suppressed by the truncation over the run.
    pub blocked_rate_max: f64,
    /// Jumps dropped because they would have made a count negative.
    pub clamped: usize,
    /// Whether the chain reached a state with zero total rate.
    pub absorbed: bool,
}

/// Exact event-driven simulation on `[0, t_end]`, recording every event.
pub fn simulate(
    dynamics: &Dynamics,
    x0: &OccupationState,
    principal: &PrincipalModel,
    t_end: f64,
    seed: u64,
) -> Result<ChainPath> {
    let mut rng = Stream::new(seed);
    let mut trajectory = Trajectory::new();
    let end = run(dynamics, x0, principal, t_end, &mut rng, |t, x, b| {
        trajectory.push(t, x.to_vec(), b.to_vec());
    })?;
    if trajectory.final_time().is_some_and(|t| t < t_end) {
        let x = dynamics.observe(end.state.counts(), end.state.scale());
        let b = trajectory.controls.last().cloned().unwrap_or_default();
        trajectory.push(t_end, x, b);
    }
    Ok(ChainPath { trajectory, end })
}

/// Same path law as [`simulate`] without recording; the stream is supplied
/// by the caller.
pub fn simulate_final(
    dynamics: &Dynamics,
    x0: &OccupationState,
    principal: &PrincipalModel,
    t_end: f64,
    rng: &mut Stream,
) -> Result<ChainEnd> {
    run(dynamics, x0, principal, t_end, rng, |_, _, _| {})
}

fn run(
    dynamics: &Dynamics,
    x0: &OccupationState,
    principal: &PrincipalModel,
    t_end: f64,
    rng: &mut Stream,
    mut record: impl FnMut(f64, &[f64], &[f64]),
) -> Result<ChainEnd> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::input(alloc::format!("t_end must be positive, got {t_end}")));
    }
    dynamics.validate()?;
    let mut state = x0.clone();
    let mut x = dynamics.observe(state.counts(), state.scale());
    let mut t = 0.0;
    let mut b: Vec<f64> = principal.control(&x, t)?;
    record(t, &x, &b);
    let mut list = TransitionList::new();
    let mut end = ChainEnd {
        state: x0.clone(),
        events: 0,
        blocked_rate_max: 0.0,
        clamped: 0,
        absorbed: false,
    };
    loop {
        transitions(dynamics, &state, &b, &mut list)?;
        let total = list.total_rate();
        if !total.is_finite() {
            return Err(Error::numerical(
                alloc::format!("total jump rate is {total} at t = {t}"),
                &x,
            ));
        }
        end.blocked_rate_max = end.blocked_rate_max.max(list.blocked_rate());
        end.clamped += list.clamped();
        let switch = principal.next_switch(t).filter(|s| *s < t_end);
        let dt = if total > 0.0 { rng.exponential(total) } else { f64::INFINITY };
        if let Some(s) = switch {
            if t + dt >= s {
                t = s;
                b = principal.control(&x, t)?;
                record(t, &x, &b);
                continue;
            }
        }
        if total == 0.0 {
            end.absorbed = true;
            break;
        }
        if t + dt >= t_end {
            break;
        }
        let next_t = t + dt;
        t = if next_t > t { next_t } else { t.next_up() };
        let pick = list.get(list.sample(rng.uniform()));
        state.apply(pick.delta)?;
        end.events += 1;
        x = dynamics.observe(state.counts(), state.scale());
        if principal.is_feedback() {
            b = principal.control(&x, t)?;
        }
        record(t, &x, &b);
    }
    end.state = state;
    Ok(end)
}
