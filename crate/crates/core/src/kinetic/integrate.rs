use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::renormalize_simplex;
use crate::model::{Dynamics, PrincipalMode, PrincipalModel, TOL_POS, TOL_SUM};
use crate::trajectory::Trajectory;

use super::drift::drift_into;

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Stepper {
    /// Classical fourth-order Runge-Kutta with (at most) step `h`.
    Rk4 { h: f64 },
    /// Dormand-Prince 5(4) with per-step error control.
    Rk45 { rtol: f64, atol: f64 },
}

impl Default for Stepper {
    fn default() -> Self {
        Stepper::Rk45 {
            rtol: 1e-8,
            atol: 1e-10,
        }
    }
}

/// Bookkeeping of one integration.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    /// Steps after which a simplex block sum had drifted by more than 1e-12.
    pub renormalizations: usize,
    pub max_correction: f64,
    /// Mass carried past the truncation by dropped coagulation gains.
    pub mass_lost: f64,
    pub best_response_solves: usize,
}

#[derive(Debug, Clone)]
pub struct Integration {
    pub trajectory: Trajectory,
    pub stats: IntegrationStats,
}

/// Solve `x' = f(x, b)` on `[0, t_end]`, recording every accepted step.
pub fn integrate(
    dynamics: &Dynamics,
    x0: &[f64],
    principal: &PrincipalModel,
    t_end: f64,
    stepper: Stepper,
) -> Result<Integration> {
    let mut trajectory = Trajectory::new();
    let mut solver = Solver::new(dynamics, stepper, true)?;
    solver.run(x0, principal, t_end, Some(&mut trajectory))?;
    Ok(Integration {
        trajectory,
        stats: solver.stats,
    })
}

/// State at `t_end` without recording the path.
pub fn integrate_final(
    dynamics: &Dynamics,
    x0: &[f64],
    principal: &PrincipalModel,
    t_end: f64,
    stepper: Stepper,
) -> Result<(Vec<f64>, IntegrationStats)> {
    let mut solver = Solver::new(dynamics, stepper, true)?;
    let x = solver.run(x0, principal, t_end, None)?;
    Ok((x, solver.stats))
}

/// `X(t, x0, b)`: the flow with `b` held fixed.
pub fn flow(dynamics: &Dynamics, x0: &[f64], b: &[f64], t: f64, stepper: Stepper) -> Result<Vec<f64>> {
    let mut solver = Solver::new(dynamics, stepper, false)?;
    check_state(dynamics, x0)?;
    solver.control = Control::Constant(b.to_vec());
    let mut x = x0.to_vec();
    if t > 0.0 {
        solver.segment(&mut x, 0.0, t, None)?;
    }
    Ok(x)
}

fn check_state(dynamics: &Dynamics, x: &[f64]) -> Result<()> {
    if x.len() != dynamics.state_dim() {
        return Err(Error::input(alloc::format!(
            "initial state has {} coordinates, model expects {}",
            x.len(),
            dynamics.state_dim()
        )));
    }
    if let Some((j, v)) = x.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < -TOL_POS) {
        return Err(Error::input(alloc::format!("coordinate {j} of the initial state is {v}")));
    }
    for (start, len) in dynamics.simplex_blocks() {
        let s: f64 = x[start..start + len].iter().sum();
        if (s - 1.0).abs() > TOL_SUM {
            return Err(Error::input(alloc::format!(
                "simplex block at {start} sums to {s}, expected 1"
            )));
        }
    }
    Ok(())
}

enum Control<'a> {
    Constant(Vec<f64>),
    BestResponse(&'a PrincipalModel),
}

// Dormand-Prince tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct Solver<'a> {
    dynamics: &'a Dynamics,
    stepper: Stepper,
    control: Control<'a>,
    memo: BTreeMap<Vec<i64>, Vec<f64>>,
    blocks: Vec<(usize, usize)>,
    stats: IntegrationStats,
    h_next: Option<f64>,
    k: Vec<Vec<f64>>,
    stage: Vec<f64>,
    lost: [f64; 7],
    checked: bool,
}

impl<'a> Solver<'a> {
    fn new(dynamics: &'a Dynamics, stepper: Stepper, checked: bool) -> Result<Self> {
        dynamics.validate()?;
        match stepper {
            Stepper::Rk4 { h } if !(h > 0.0 && h.is_finite()) => {
                return Err(Error::config(alloc::format!("ODE step must be positive, got {h}")))
            }
            Stepper::Rk45 { rtol, atol } if !(rtol > 0.0 && atol > 0.0) => {
                return Err(Error::config("rtol and atol must be positive"))
            }
            _ => {}
        }
        let n = dynamics.state_dim();
        Ok(Solver {
            dynamics,
            stepper,
            control: Control::Constant(Vec::new()),
            memo: BTreeMap::new(),
            blocks: dynamics.simplex_blocks(),
            stats: IntegrationStats::default(),
            h_next: None,
            k: vec![vec![0.0; n]; 7],
            stage: vec![0.0; n],
            lost: [0.0; 7],
            checked,
        })
    }

    fn run(
        &mut self,
        x0: &[f64],
        principal: &'a PrincipalModel,
        t_end: f64,
        mut record: Option<&mut Trajectory>,
    ) -> Result<Vec<f64>> {
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::input(alloc::format!("t_end must be positive, got {t_end}")));
        }
        if self.checked {
            check_state(self.dynamics, x0)?;
        }
        let mut x = x0.to_vec();
        let mut t = 0.0;
        match &principal.mode {
            PrincipalMode::BestResponse => self.control = Control::BestResponse(principal),
            _ => self.control = Control::Constant(principal.control(&x, 0.0)?),
        }
        if let Some(tr) = record.as_deref_mut() {
            let b = self.current_b(&x)?;
            tr.push(0.0, x.clone(), b);
        }
        while t < t_end {
            let stop = principal.next_switch(t).map_or(t_end, |s| s.min(t_end));
            self.segment(&mut x, t, stop, record.as_deref_mut())?;
            t = stop;
            if t < t_end {
                let b = principal.control(&x, t)?;
                if let Some(tr) = record.as_deref_mut() {
                    if let Some(last) = tr.controls.last_mut() {
                        *last = b.clone();
                    }
                }
                self.control = Control::Constant(b);
            }
        }
        Ok(x)
    }

    fn current_b(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        match &self.control {
            Control::Constant(b) => Ok(b.clone()),
            Control::BestResponse(p) => {
                let key: Vec<i64> = x.iter().map(|v| libm::round(v * 1e12) as i64).collect();
                if let Some(b) = self.memo.get(&key) {
                    return Ok(b.clone());
                }
                let b = p.control(x, 0.0)?;
                self.stats.best_response_solves += 1;
                self.memo.insert(key, b.clone());
                Ok(b)
            }
        }
    }

    fn eval(&mut self, x: &[f64], slot: usize) -> Result<()> {
        let b = self.current_b(x)?;
        let mut v = core::mem::take(&mut self.k[slot]);
        let r = drift_into(self.dynamics, x, &b, &mut v);
        self.k[slot] = v;
        self.lost[slot] = r?;
        if let Some(bad) = self.k[slot].iter().find(|a| !a.is_finite()) {
            return Err(Error::numerical(alloc::format!("drift evaluated to {bad}"), x));
        }
        Ok(())
    }

    fn stage_state(&mut self, x: &[f64], h: f64, s: usize, a: &[f64]) {
        for i in 0..x.len() {
            let mut acc = 0.0;
            for (j, aj) in a.iter().enumerate().take(s) {
                if *aj != 0.0 {
                    acc += aj * self.k[j][i];
                }
            }
            self.stage[i] = x[i] + h * acc;
        }
    }

    fn segment(
        &mut self,
        x: &mut Vec<f64>,
        t0: f64,
        t1: f64,
        mut record: Option<&mut Trajectory>,
    ) -> Result<()> {
        match self.stepper {
            Stepper::Rk4 { h } => {
                let n = libm::ceil((t1 - t0) / h - 1e-9).max(1.0) as usize;
                let hh = (t1 - t0) / n as f64;
                for step in 0..n {
                    let t = if step + 1 == n { t1 } else { t0 + (step + 1) as f64 * hh };
                    self.rk4_step(x, hh, 0)?;
                    self.accept(x, t, record.as_deref_mut())?;
                }
            }
            Stepper::Rk45 { rtol, atol } => {
                let mut t = t0;
                let mut h = self.h_next.unwrap_or(1e-2).min(t1 - t0);
                let mut x_new = vec![0.0; x.len()];
                while t < t1 {
                    let last = t + h >= t1;
                    if last {
                        h = t1 - t;
                    }
                    let err = self.dopri_step(x, h, &mut x_new, rtol, atol)?;
                    let h_min = 1e-14 * t1.abs().max(1.0);
                    if err > 1.0 {
                        self.stats.rejected += 1;
                        h *= f64::max(0.2, 0.9 * libm::pow(err, -0.2));
                        if h < h_min {
                            return Err(Error::numerical("step size underflow", x));
                        }
                        continue;
                    }
                    if x_new.iter().any(|v| *v < -TOL_POS) {
                        self.stats.rejected += 1;
                        h *= 0.5;
                        if h < h_min {
                            return Err(Error::numerical(
                                "state left the admissible region at the minimum step",
                                &x_new,
                            ));
                        }
                        continue;
                    }
                    self.stats.mass_lost += h * B5.iter().zip(&self.lost).map(|(b, l)| b * l).sum::<f64>();
                    core::mem::swap(x, &mut x_new);
                    t = if last { t1 } else { t + h };
                    self.accept(x, t, record.as_deref_mut())?;
                    let grow = if err == 0.0 { 5.0 } else { (0.9 * libm::pow(err, -0.2)).clamp(0.2, 5.0) };
                    if !last {
                        h *= grow;
                        self.h_next = Some(h);
                    } else {
                        self.h_next = Some(self.h_next.unwrap_or(h).max(h));
                    }
                    h = h.min(t1 - t);
                }
            }
        }
        Ok(())
    }

    fn rk4_step(&mut self, x: &mut [f64], h: f64, depth: usize) -> Result<()> {
        let x0 = x.to_vec();
        self.eval(&x0, 0)?;
        for (s, c) in [(1usize, 0.5), (2, 0.5), (3, 1.0)] {
            for i in 0..x0.len() {
                self.stage[i] = x0[i] + c * h * self.k[s - 1][i];
            }
            let stage = core::mem::take(&mut self.stage);
            let r = self.eval(&stage, s);
            self.stage = stage;
            r?;
        }
        let mut out = vec![0.0; x0.len()];
        for i in 0..x0.len() {
            out[i] = x0[i] + h / 6.0 * (self.k[0][i] + 2.0 * self.k[1][i] + 2.0 * self.k[2][i] + self.k[3][i]);
        }
        if out.iter().any(|v| *v < -TOL_POS) {
            if depth >= 40 {
                return Err(Error::numerical(
                    "state left the admissible region at the minimum step",
                    &out,
                ));
            }
            self.stats.rejected += 1;
            self.rk4_step(x, 0.5 * h, depth + 1)?;
            self.safeguard(x);
            return self.rk4_step(x, 0.5 * h, depth + 1);
        }
        self.stats.mass_lost +=
            h / 6.0 * (self.lost[0] + 2.0 * self.lost[1] + 2.0 * self.lost[2] + self.lost[3]);
        x.copy_from_slice(&out);
        Ok(())
    }

    fn dopri_step(&mut self, x: &[f64], h: f64, out: &mut [f64], rtol: f64, atol: f64) -> Result<f64> {
        self.eval(x, 0)?;
        for s in 1..7 {
            self.stage_state(x, h, s, &A[s]);
            let stage = core::mem::take(&mut self.stage);
            let r = self.eval(&stage, s);
            self.stage = stage;
            r?;
        }
        let mut acc = 0.0;
        for i in 0..x.len() {
            let mut hi = 0.0;
            let mut lo = 0.0;
            for s in 0..7 {
                hi += B5[s] * self.k[s][i];
                lo += B4[s] * self.k[s][i];
            }
            out[i] = x[i] + h * hi;
            let scale = atol + rtol * x[i].abs().max(out[i].abs());
            let e = h * (hi - lo) / scale;
            acc += e * e;
        }
        Ok(libm::sqrt(acc / x.len() as f64))
    }

    fn safeguard(&mut self, x: &mut [f64]) {
        for v in x.iter_mut() {
            if *v < 0.0 && *v >= -TOL_POS {
                *v = 0.0;
            }
        }
        for &(start, len) in &self.blocks {
            let c = renormalize_simplex(&mut x[start..start + len], TOL_POS);
            if c > 1e-12 {
                self.stats.renormalizations += 1;
            }
            self.stats.max_correction = self.stats.max_correction.max(c);
        }
    }

    fn accept(&mut self, x: &mut [f64], t: f64, record: Option<&mut Trajectory>) -> Result<()> {
        self.safeguard(x);
        self.stats.accepted += 1;
        if let Some(tr) = record {
            let b = self.current_b(x)?;
            tr.push(t, x.to_vec(), b);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{KernelSpec, PayoffModel, TabularPayoff};

    fn logistic() -> Dynamics {
        let p = PayoffModel::tabular(TabularPayoff::linear(vec![0.0, 2.0], None).unwrap());
        Dynamics::replicator(p, 1.0).unwrap()
    }

    fn oracle() -> f64 {
        let e2 = libm::exp(2.0);
        0.1 * e2 / (0.9 + 0.1 * e2)
    }

    #[test]
    fn logistic_endpoint() {
        let (x, stats) =
            integrate_final(&logistic(), &[0.9, 0.1], &PrincipalModel::fixed(vec![0.0]), 1.0, Stepper::default())
                .unwrap();
        assert!((x[1] - oracle()).abs() / oracle() < 1e-6);
        assert_eq!(stats.renormalizations, 0);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let p = PrincipalModel::fixed(vec![0.0]);
        let e = |h: f64| {
            let (x, _) = integrate_final(&logistic(), &[0.9, 0.1], &p, 1.0, Stepper::Rk4 { h }).unwrap();
            (x[1] - oracle()).abs()
        };
        let ratio = e(0.1) / e(0.05);
        assert!((14.0..=18.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn coagulation_number_density() {
        let k = KernelSpec::constant(1.0, 0.0).unwrap();
        let dy = Dynamics::Coalition { kernel: k, max_index: 64 };
        let mut x0 = vec![0.0; 64];
        x0[0] = 1.0;
        let (x, stats) = integrate_final(&dy, &x0, &PrincipalModel::fixed(vec![0.0]), 1.0, Stepper::default()).unwrap();
        let m0: f64 = x.iter().sum();
        assert!((m0 - 0.5).abs() < 1e-6);
        assert!(stats.mass_lost < 1e-6);
    }

    #[test]
    fn recorded_path_is_well_formed() {
        let run = integrate(&logistic(), &[0.5, 0.5], &PrincipalModel::fixed(vec![0.0]), 2.0, Stepper::default())
            .unwrap();
        run.trajectory.check().unwrap();
        assert_eq!(run.trajectory.final_time(), Some(2.0));
    }
}
