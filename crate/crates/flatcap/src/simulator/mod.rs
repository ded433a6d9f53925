//! Direct solution of the deviation system on the evolving cap.
//!
//! The cap is mapped to the fixed unit disk, where the only traces of the
//! motion are the chart factor c(w, τ) in front of the Laplacian, the
//! dilution field Q(w, τ) and the drifting-state fields. Diffusion is
//! implicit (FFT in φ, tridiagonal in w), everything else explicit.

mod convergence;
mod grid;
mod operator;
mod project;
mod step;

pub use convergence::{convergence_study, fit_order, ConvergenceConfig, ConvergenceReport, ConvergenceRow};
pub use grid::{SimGrid, SurfaceField};
pub use operator::{assemble_operator, DiffusionOperator, ImplicitSolver};
pub use project::{eigenmode_ic, noise_ic, project_mode, ring_weights, ModeProjector, TrackedModes};
pub use step::{ring_coefficients, step_imex, RingCoefficients, Stepper};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CapSchedule;
use crate::kinetics::BrusselatorParams;
use crate::reduction::{GapCheck, ReductionConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialCondition {
    /// u₀Φ of the critical mode with max U = `peak`.
    Eigenmode { peak: f64 },
    Noise { amp_u: f64, amp_v: f64, seed: u64 },
    Zero,
    /// Full fields in storage order (ring-major, boundary ring included).
    Custom { u: Vec<f64>, v: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub params: BrusselatorParams,
    pub radius: f64,
    pub grid: SimGrid,
    pub dt: f64,
    pub epsilon: f64,
    pub gamma_start: f64,
    pub gamma_end: f64,
    /// Run length in time units when ε = 0.
    pub duration: f64,
    /// Steps between geometry refreshes.
    pub cadence: usize,
    pub ic: InitialCondition,
    pub affine_mode: bool,
    /// Critical mode, truncations and amplitude convention for extraction.
    pub reduction: ReductionConfig,
    /// Steps between series samples.
    pub sample_every: usize,
    pub snapshot_gammas: Vec<f64>,
    /// Track projections onto all modes with m ≤ .0, n ≤ .1.
    pub track: Option<(u32, u32)>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            params: BrusselatorParams::default(),
            radius: 1.0,
            grid: SimGrid { nw: 64, nphi: 40 },
            dt: 0.1,
            epsilon: 1e-6,
            gamma_start: 0.4915,
            gamma_end: 0.4515,
            duration: 0.0,
            cadence: 50,
            ic: InitialCondition::Eigenmode { peak: 0.021 },
            affine_mode: false,
            reduction: ReductionConfig { gap: GapCheck { enabled: false, ..GapCheck::default() }, ..ReductionConfig::default() },
            sample_every: 500,
            snapshot_gammas: Vec::new(),
            track: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.grid.validate()?;
        self.reduction.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if self.cadence == 0 || self.sample_every == 0 {
            return Err(Error::Config("cadence and sample interval must be >= 1".into()));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::Config(format!("epsilon must be >= 0, got {}", self.epsilon)));
        }
        if !(self.gamma_start > 0.0 && self.gamma_start < 1.0) {
            return Err(Error::Config(format!("gamma_start {} outside (0, 1)", self.gamma_start)));
        }
        if self.epsilon > 0.0 {
            if !(self.gamma_end > 0.0 && self.gamma_end < self.gamma_start) {
                return Err(Error::Config(format!(
                    "gamma must decrease: {} -> {}",
                    self.gamma_start, self.gamma_end
                )));
            }
        } else if !(self.duration > 0.0) {
            return Err(Error::Config("a frozen run (epsilon = 0) needs a positive duration".into()));
        }
        if let InitialCondition::Custom { u, v } = &self.ic {
            if u.len() != self.grid.len() || v.len() != self.grid.len() {
                return Err(Error::Config(format!("custom fields must have {} values", self.grid.len())));
            }
        }
        Ok(())
    }

    pub fn schedule(&self) -> CapSchedule {
        CapSchedule::linear(self.radius, self.epsilon, self.gamma_start)
    }

    pub fn steps(&self) -> usize {
        let t = if self.epsilon > 0.0 {
            (self.gamma_start - self.gamma_end) / self.epsilon
        } else {
            self.duration
        };
        (t / self.dt).round() as usize
    }

    pub fn initial_state(&self) -> Result<SurfaceField> {
        let g = self.grid;
        let sched = self.schedule();
        Ok(match &self.ic {
            InitialCondition::Eigenmode { peak } => {
                eigenmode_ic(g, &self.params, &sched, 0.0, (self.reduction.m0, self.reduction.n0), *peak)?
            }
            InitialCondition::Noise { amp_u, amp_v, seed } => noise_ic(g, 0.0, self.gamma_start, *amp_u, *amp_v, *seed)?,
            InitialCondition::Zero => SurfaceField::zeros(g, 0.0, self.gamma_start),
            InitialCondition::Custom { u, v } => {
                let mut s = SurfaceField { grid: g, u: u.clone(), v: v.clone(), tau: 0.0, gamma: self.gamma_start };
                s.zero_boundary();
                s
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub t: f64,
    pub tau: f64,
    pub gamma: f64,
    pub x: f64,
    pub a_cos: f64,
    pub a_sin: f64,
    /// Amplitudes of `SimOutput::tracked_modes`, when tracking is on.
    pub tracked: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimOutput {
    pub steps: usize,
    pub series: Vec<SeriesPoint>,
    pub tracked_modes: Vec<(u32, u32)>,
    pub snapshots: Vec<SurfaceField>,
    pub final_state: SurfaceField,
}

fn sample(cfg: &SimConfig, sched: &CapSchedule, state: &SurfaceField, t: f64, tracked_modes: &mut Vec<(u32, u32)>) -> Result<SeriesPoint> {
    let proj = ModeProjector::new(&cfg.params, sched, state.tau, cfg.grid, &cfg.reduction)?;
    let [a_cos, a_sin] = proj.amplitudes(state)?;
    let tracked = match cfg.track {
        Some((m, n)) => {
            let tm = TrackedModes::new(cfg.grid, &sched.geometry(state.tau)?, m, n)?;
            *tracked_modes = tm.modes.clone();
            tm.amplitudes(state)
        }
        None => Vec::new(),
    };
    Ok(SeriesPoint { t, tau: state.tau, gamma: state.gamma, x: a_cos.hypot(a_sin), a_cos, a_sin, tracked })
}

pub fn run(cfg: &SimConfig) -> Result<SimOutput> {
    cfg.validate()?;
    let sched = cfg.schedule();
    let steps = cfg.steps();
    let mut state = cfg.initial_state()?;
    let mut stepper = Stepper::new(cfg.params, sched, cfg.grid, cfg.dt, cfg.affine_mode, cfg.reduction.qp_terms, 0.0)?;
    let mut series = Vec::new();
    let mut tracked_modes = Vec::new();
    let mut snapshots = Vec::new();
    let mut targets: Vec<f64> = cfg.snapshot_gammas.clone();
    targets.sort_by(|a, b| b.total_cmp(a));
    let mut next_target = 0;
    for n in 0..steps {
        let t = n as f64 * cfg.dt;
        if n > 0 && n % cfg.cadence == 0 {
            stepper.refresh(state.tau)?;
        }
        if n % cfg.sample_every == 0 {
            series.push(sample(cfg, &sched, &state, t, &mut tracked_modes)?);
        }
        while next_target < targets.len() && state.gamma <= targets[next_target] + 0.5 * cfg.epsilon * cfg.dt {
            snapshots.push(state.clone());
            next_target += 1;
        }
        stepper.step(&mut state)?;
        state.tau = cfg.epsilon * ((n + 1) as f64 * cfg.dt);
        state.gamma = sched.gamma(state.tau);
    }
    series.push(sample(cfg, &sched, &state, steps as f64 * cfg.dt, &mut tracked_modes)?);
    while next_target < targets.len() && state.gamma <= targets[next_target] + 0.5 * cfg.epsilon * cfg.dt {
        snapshots.push(state.clone());
        next_target += 1;
    }
    Ok(SimOutput { steps, series, tracked_modes, snapshots, final_state: state })
}
