use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{SimGrid, SurfaceField};
use super::project::{ring_weights, ModeProjector};
use super::{run, SimConfig};
use crate::error::{Error, Result};
use crate::geometry::zeta_of_w;
use crate::nf::{integrate_nf, NfSolveConfig};
use crate::reduction::{build_table, reduce};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    /// Template run; its grid's `nw` is replaced by each resolution.
    pub base: SimConfig,
    pub resolutions: Vec<usize>,
    /// Samples of the normal-form coefficient table.
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub grid: SimGrid,
    pub h: f64,
    pub x_start: f64,
    pub x_end_sim: f64,
    pub x_end_nf: f64,
    /// |x_sim − x_nf| / x_nf at the final γ.
    pub endpoint_rel: f64,
    pub err_l2: f64,
    pub err_linf: f64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub slope_l2: f64,
    pub slope_linf: f64,
    pub slope_endpoint: f64,
}

/// Least-squares slope of ln e against ln h.
pub fn fit_order(h: &[f64], e: &[f64]) -> f64 {
    let n = h.len() as f64;
    let lx: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Runs the template at each resolution and compares the final state with
/// the centre-manifold field x·U₀ + x²·U⁽¹⁾, x from the normal form started
/// at the run's own extracted x(0).
pub fn convergence_study(cfg: &ConvergenceConfig) -> Result<ConvergenceReport> {
    if cfg.resolutions.len() < 3 {
        return Err(Error::Config("a convergence study needs at least 3 resolutions".into()));
    }
    let base = &cfg.base;
    base.validate()?;
    if !(base.epsilon > 0.0) {
        return Err(Error::Config("the convergence study follows a moving domain (epsilon > 0)".into()));
    }
    let sched = base.schedule();
    let tau_end = sched.tau_of_gamma(base.gamma_end)?;
    let table = build_table(&base.params, &sched, (0.0, tau_end), cfg.samples, &base.reduction)?;
    let red = reduce(&base.params, &sched, tau_end, &base.reduction)?;
    let rows: Vec<ConvergenceRow> = cfg
        .resolutions
        .par_iter()
        .map(|&nw| {
            let started = std::time::Instant::now();
            let grid = SimGrid { nw, nphi: base.grid.nphi };
            let run_cfg = SimConfig { grid, snapshot_gammas: Vec::new(), track: None, ..base.clone() };
            let out = run(&run_cfg)?;
            let x_start = out.series[0].x;
            let last = out.series.last().expect("run records the final sample");
            let nf = integrate_nf(&table, &NfSolveConfig::new(base.epsilon, x_start, base.gamma_start, base.gamma_end))?;
            let x_nf = nf.last().x;
            let proj = ModeProjector::new(&base.params, &sched, tau_end, grid, &base.reduction)?;
            let alpha = last.a_sin.atan2(last.a_cos) / red.crit.basis.m as f64;
            let pred = predicted_field(grid, &red, &proj, x_nf, alpha, tau_end);
            let (err_l2, err_linf) = field_errors(&out.final_state, &pred, &ring_weights(&grid, &red.geom)?);
            Ok(ConvergenceRow {
                grid,
                h: grid.dw(),
                x_start,
                x_end_sim: last.x,
                x_end_nf: x_nf,
                endpoint_rel: (last.x - x_nf).abs() / x_nf,
                err_l2,
                err_linf,
                wall_seconds: started.elapsed().as_secs_f64(),
            })
        })
        .collect::<Result<_>>()?;
    let h: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let col = |f: fn(&ConvergenceRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    Ok(ConvergenceReport {
        slope_l2: fit_order(&h, &col(|r| r.err_l2)),
        slope_linf: fit_order(&h, &col(|r| r.err_linf)),
        slope_endpoint: fit_order(&h, &col(|r| r.endpoint_rel)),
        rows,
    })
}

fn predicted_field(
    grid: SimGrid,
    red: &crate::reduction::Reduction,
    proj: &ModeProjector,
    x: f64,
    alpha: f64,
    tau: f64,
) -> SurfaceField {
    let m = red.crit.basis.m as f64;
    let mut out = proj.field([x * (m * alpha).cos(), x * (m * alpha).sin()], tau);
    let c = red.geom.cos_theta_max();
    for i in 0..grid.nw {
        let z = zeta_of_w(c, grid.w(i));
        for j in 0..grid.nphi {
            let u1 = red.cm.eval(z, grid.phi(j) - alpha);
            let k = grid.idx(i, j);
            out.u[k] += x * x * u1[0];
            out.v[k] += x * x * u1[1];
        }
    }
    out
}

/// Solid-angle L² norm and max norm of the difference, both species together.
fn field_errors(a: &SurfaceField, b: &SurfaceField, weight: &[f64]) -> (f64, f64) {
    let g = a.grid;
    let (mut l2, mut linf) = (0.0f64, 0.0f64);
    for i in 0..g.nw {
        for j in 0..g.nphi {
            let k = g.idx(i, j);
            let du = a.u[k] - b.u[k];
            let dv = a.v[k] - b.v[k];
            l2 += weight[i] * (du * du + dv * dv);
            linf = linf.max(du.abs()).max(dv.abs());
        }
    }
    (l2.sqrt(), linf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_power_laws() {
        let h = [0.1, 0.05, 0.025];
        let e: Vec<f64> = h.iter().map(|x: &f64| 3.0 * x.powi(2)).collect();
        assert!((fit_order(&h, &e) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn needs_three_resolutions() {
        let cfg = ConvergenceConfig { base: SimConfig::default(), resolutions: vec![16, 32], samples: 12 };
        assert!(convergence_study(&cfg).unwrap_err().is_validation());
    }
}
