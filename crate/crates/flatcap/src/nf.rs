//! The nonautonomous pitchfork normal form ẋ = (σ₀(εt) + εσ₁(εt))x + C₀(εt)x³.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{dopri5, Tolerances};
use crate::reduction::NormalFormTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NfSolveConfig {
    pub epsilon: f64,
    pub x0: f64,
    pub gamma_start: f64,
    pub gamma_end: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Number of equally spaced γ values reported, endpoints included.
    pub outputs: usize,
}

impl NfSolveConfig {
    pub fn new(epsilon: f64, x0: f64, gamma_start: f64, gamma_end: f64) -> Self {
        let t = Tolerances::default();
        Self { epsilon, x0, gamma_start, gamma_end, rel_tol: t.rel, abs_tol: t.abs, outputs: 801 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        for g in [self.gamma_start, self.gamma_end] {
            if !(g > 0.0 && g < 1.0) {
                return Err(Error::Config(format!("curvature {g} outside (0, 1)")));
            }
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.outputs < 2 {
            return Err(Error::Config("need at least two outputs".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub tau: f64,
    pub gamma: f64,
    pub x: f64,
    pub x_branch: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub epsilon: f64,
    pub points: Vec<TrajectoryPoint>,
}

const BLOW_UP: f64 = 1e3;

pub fn integrate_nf(table: &NormalFormTable, cfg: &NfSolveConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let sched = &table.schedule;
    let tau0 = sched.tau_of_gamma(cfg.gamma_start)?;
    let tau1 = sched.tau_of_gamma(cfg.gamma_end)?;
    if !(tau1 > tau0) {
        return Err(Error::Config("the curvature span must move forward in slow time".into()));
    }
    if !table.covers(tau0) || !table.covers(tau1) {
        let (a, b) = table.tau_window();
        return Err(Error::Config(format!(
            "table covers gamma in [{}, {}], requested [{}, {}]",
            sched.gamma(b),
            sched.gamma(a),
            cfg.gamma_end,
            cfg.gamma_start
        )));
    }
    let eps = cfg.epsilon;
    let t_end = (tau1 - tau0) / eps;
    let outputs: Vec<f64> = (0..cfg.outputs)
        .map(|i| {
            let g = cfg.gamma_start + (cfg.gamma_end - cfg.gamma_start) * i as f64 / (cfg.outputs - 1) as f64;
            ((sched.tau_of_gamma(g).unwrap_or(tau0) - tau0) / eps).clamp(0.0, t_end)
        })
        .collect();
    let rhs = |t: f64, x: f64| {
        let tau = tau0 + eps * t;
        table.sigma(tau, eps) * x + table.c0(tau) * x * x * x
    };
    let tol = Tolerances { rel: cfg.rel_tol, abs: cfg.abs_tol };
    let raw = dopri5(rhs, 0.0, cfg.x0, t_end, &outputs, tol, |t, x| {
        if !x.is_finite() || x.abs() > BLOW_UP {
            Err(Error::Integration(format!("blow-up: |x| = {} at t = {t}", x.abs())))
        } else {
            Ok(())
        }
    })?;
    let mut points: Vec<TrajectoryPoint> = Vec::with_capacity(raw.len());
    for (t, x) in raw {
        if points.last().map_or(false, |p| t <= p.t) {
            continue;
        }
        let tau = tau0 + eps * t;
        points.push(TrajectoryPoint {
            t,
            tau,
            gamma: sched.gamma(tau),
            x,
            x_branch: branch_value(table.sigma0(tau), table.c0(tau)),
        });
    }
    Ok(Trajectory { epsilon: eps, points })
}

/// Runs several ε in parallel; results keep the input order.
pub fn sweep(table: &NormalFormTable, base: &NfSolveConfig, epsilons: &[f64]) -> Result<Vec<Trajectory>> {
    epsilons
        .par_iter()
        .map(|&e| integrate_nf(table, &NfSolveConfig { epsilon: e, ..base.clone() }))
        .collect()
}

/// √(−σ₀/C₀) on the post-critical side, else 0.
pub fn branch_value(sigma0: f64, c0: f64) -> f64 {
    if sigma0 <= 0.0 || c0 >= 0.0 {
        0.0
    } else {
        (-sigma0 / c0).sqrt()
    }
}

/// Stable constant-domain branch at curvature γ.
pub fn pitchfork_branch(table: &NormalFormTable, gamma: f64) -> Result<f64> {
    let tau = table.schedule.tau_of_gamma(gamma)?;
    Ok(branch_value(table.sigma0(tau), table.c0(tau)))
}

impl Trajectory {
    /// γ of the last upward crossing of x = fraction·x_branch: the point after
    /// which the solution has joined the branch. Near the static transition the
    /// branch itself is close to zero, so any early crossing there is spurious;
    /// the last crossing is the meaningful departure.
    pub fn departure_gamma(&self, fraction: f64) -> Option<f64> {
        let mut found = None;
        let mut prev: Option<(f64, f64)> = None;
        for p in &self.points {
            if p.x_branch <= 0.0 {
                prev = None;
                continue;
            }
            let r = p.x.abs() / p.x_branch - fraction;
            if let Some((g0, r0)) = prev {
                if r0 < 0.0 && r >= 0.0 {
                    found = Some(g0 + (p.gamma - g0) * (-r0) / (r - r0));
                }
            }
            prev = Some((p.gamma, r));
        }
        found
    }

    pub fn last(&self) -> &TrajectoryPoint {
        self.points.last().expect("trajectories are never empty")
    }
}
