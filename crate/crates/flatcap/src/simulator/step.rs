use serde::Serialize;

use super::grid::{SimGrid, SurfaceField};
use super::operator::{assemble_operator, DiffusionOperator, ImplicitSolver};
use crate::error::{Error, Result};
use crate::geometry::{dilution_q_w, zeta_of_w, CapSchedule};
use crate::kinetics::{BrusselatorParams, Vec2};
use crate::quasipattern::{self, K1Matrix};

/// Slow-time coefficient fields per interior ring, frozen between refreshes.
#[derive(Debug, Clone, Serialize)]
pub struct RingCoefficients {
    pub tau: f64,
    pub gamma: f64,
    pub gamma_prime: f64,
    pub q: Vec<f64>,
    pub x01: Vec<Vec2>,
    pub k1: Vec<K1Matrix>,
}

pub fn ring_coefficients(
    p: &BrusselatorParams,
    schedule: &CapSchedule,
    tau: f64,
    grid: &SimGrid,
    qp_terms: usize,
) -> Result<RingCoefficients> {
    let geom = schedule.geometry(tau)?;
    let c = geom.cos_theta_max();
    let gp = schedule.gamma_prime(tau);
    let q: Vec<f64> = (0..grid.nw).map(|i| dilution_q_w(geom.gamma, c, grid.w(i))).collect();
    let x01: Vec<Vec2> = if schedule.epsilon == 0.0 {
        vec![[0.0, 0.0]; grid.nw]
    } else {
        let corr = quasipattern::qp_correction(p, &geom, tau, gp, qp_terms)?;
        (0..grid.nw).map(|i| corr.x01(zeta_of_w(c, grid.w(i)))).collect()
    };
    let k1 = x01.iter().map(|x| K1Matrix::from_x01(p, *x)).collect();
    Ok(RingCoefficients { tau, gamma: geom.gamma, gamma_prime: gp, q, x01, k1 })
}

/// One IMEX Euler integrator: reaction, quadratic/cubic terms and dilution
/// forward, diffusion backward. Rebuild with `refresh` to move the geometry.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub params: BrusselatorParams,
    pub schedule: CapSchedule,
    pub grid: SimGrid,
    pub dt: f64,
    pub affine: bool,
    pub qp_terms: usize,
    pub coeffs: RingCoefficients,
    pub operator: DiffusionOperator,
    solver: ImplicitSolver,
    scratch: [Vec<f64>; 2],
}

impl Stepper {
    pub fn new(
        params: BrusselatorParams,
        schedule: CapSchedule,
        grid: SimGrid,
        dt: f64,
        affine: bool,
        qp_terms: usize,
        tau: f64,
    ) -> Result<Self> {
        params.validate()?;
        schedule.validate()?;
        grid.validate()?;
        let geom = schedule.geometry(tau)?;
        let operator = assemble_operator(grid, &geom, &params)?;
        let solver = operator.implicit(dt)?;
        let coeffs = ring_coefficients(&params, &schedule, tau, &grid, qp_terms)?;
        Ok(Self {
            params,
            schedule,
            grid,
            dt,
            affine,
            qp_terms,
            coeffs,
            operator,
            solver,
            scratch: [vec![0.0; grid.len()], vec![0.0; grid.len()]],
        })
    }

    /// Recomputes geometry, coefficient fields and solver factors at τ.
    pub fn refresh(&mut self, tau: f64) -> Result<()> {
        let geom = self.schedule.geometry(tau)?;
        self.operator = assemble_operator(self.grid, &geom, &self.params)?;
        self.solver = self.operator.implicit(self.dt)?;
        self.coeffs = ring_coefficients(&self.params, &self.schedule, tau, &self.grid, self.qp_terms)?;
        Ok(())
    }

    /// Pointwise explicit right-hand side (everything except diffusion).
    pub fn explicit_rhs(&self, u: f64, v: f64, ring: usize) -> Vec2 {
        let p = &self.params;
        let eps = self.schedule.epsilon;
        let k0 = p.k0();
        let k1 = self.coeffs.k1[ring];
        let x01 = self.coeffs.x01[ring];
        let lin_u = k0[0][0] * u + k0[0][1] * v;
        let lin_v = k0[1][0] * u + k0[1][1] * v;
        let drift = eps * (k1.r1 * u + k1.r2 * v);
        let quad = (p.beta1() + eps * p.c * x01[1]) * u * u + 2.0 * (p.beta2() + eps * p.c * x01[0]) * u * v;
        let cubic = p.c * u * u * v;
        let dil = eps * self.coeffs.gamma_prime * self.coeffs.q[ring];
        let (su, sv) = if self.affine { (u + p.x00(), v + p.y00()) } else { (u, v) };
        let s = drift + quad + cubic;
        [lin_u + s - dil * su, lin_v - s - dil * sv]
    }

    /// Advances `state` by one step of length dt using the current coefficients.
    pub fn step(&mut self, state: &mut SurfaceField) -> Result<()> {
        let g = self.grid;
        if state.grid != g {
            return Err(Error::Config("state grid does not match the stepper".into()));
        }
        let [mut su, mut sv] = std::mem::take(&mut self.scratch);
        for i in 0..g.nw {
            for j in 0..g.nphi {
                let k = g.idx(i, j);
                let (u, v) = (state.u[k], state.v[k]);
                let f = self.explicit_rhs(u, v, i);
                su[k] = u + self.dt * f[0];
                sv[k] = v + self.dt * f[1];
            }
        }
        self.solver.solve(0, &mut su);
        self.solver.solve(1, &mut sv);
        let n = g.nw * g.nphi;
        state.u[..n].copy_from_slice(&su[..n]);
        state.v[..n].copy_from_slice(&sv[..n]);
        self.scratch = [su, sv];
        state.zero_boundary();
        if !state.is_finite() {
            return Err(Error::NonFinite(format!("state is not finite at tau = {}", state.tau)));
        }
        Ok(())
    }
}

/// One step from `state`, returning the new field.
pub fn step_imex(state: &SurfaceField, stepper: &mut Stepper) -> Result<SurfaceField> {
    let mut next = state.clone();
    stepper.step(&mut next)?;
    next.tau = state.tau + stepper.schedule.epsilon * stepper.dt;
    next.gamma = stepper.schedule.gamma(next.tau);
    Ok(next)
}
