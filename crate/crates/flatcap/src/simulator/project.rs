use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::grid::{SimGrid, SurfaceField};
use crate::error::{Error, Result};
use crate::geometry::{self, disk_chart_factor, zeta_of_w, CapGeometry, CapQuadrature, CapSchedule};
use crate::kinetics::{self, BrusselatorParams, Vec2};
use crate::reduction::{critical_pair, CriticalPair, ReductionConfig};

/// Solid-angle weight per ring, γ² w Δw Δφ / (R² c(w)): midpoint rule in w
/// on interior cells, the trapezoid rule in φ. The boundary ring closes the
/// half cell next to the rim.
pub fn ring_weights(grid: &SimGrid, geom: &CapGeometry) -> Result<Vec<f64>> {
    let g2 = geom.gamma * geom.gamma / (geom.radius * geom.radius);
    (0..=grid.nw)
        .map(|i| {
            let w = grid.w(i);
            let width = if i == grid.nw { 0.5 * grid.dw() } else { grid.dw() };
            Ok(g2 * w * width * grid.dphi() / disk_chart_factor(geom, w)?)
        })
        .collect()
}

/// u₀·cos(mφ)·P^m_λ for mode (m, n), scaled so the largest grid value of U is `peak`.
pub fn eigenmode_ic(
    grid: SimGrid,
    p: &BrusselatorParams,
    schedule: &CapSchedule,
    tau: f64,
    mode: (u32, u32),
    peak: f64,
) -> Result<SurfaceField> {
    grid.validate()?;
    let geom = schedule.geometry(tau)?;
    let b = geometry::mode_basis(mode.0, mode.1, &geom)?;
    let sigma = kinetics::sigma_pair(p, b.mu)?.sigma_plus;
    let u0 = p.u0(b.mu, sigma);
    let c = geom.cos_theta_max();
    let raw = SurfaceField::from_fn(grid, tau, geom.gamma, |w, phi| {
        let f = (mode.0 as f64 * phi).cos() * b.legendre(zeta_of_w(c, w));
        [u0[0] * f, u0[1] * f]
    });
    let top = raw.u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(top > 0.0) {
        return Err(Error::Singular(format!("mode ({},{}) has no positive grid value", mode.0, mode.1)));
    }
    let s = peak / top;
    let mut out = raw;
    out.u.iter_mut().chain(out.v.iter_mut()).for_each(|x| *x *= s);
    Ok(out)
}

/// Independent uniform values on [−amp, amp] per interior node.
pub fn noise_ic(grid: SimGrid, tau: f64, gamma: f64, amp_u: f64, amp_v: f64, seed: u64) -> Result<SurfaceField> {
    grid.validate()?;
    if !(amp_u >= 0.0 && amp_v >= 0.0) {
        return Err(Error::Config("noise amplitudes must be non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SurfaceField::zeros(grid, tau, gamma);
    for k in 0..grid.nw * grid.nphi {
        out.u[k] = if amp_u > 0.0 { rng.gen_range(-amp_u..=amp_u) } else { 0.0 };
        out.v[k] = if amp_v > 0.0 { rng.gen_range(-amp_v..=amp_v) } else { 0.0 };
    }
    Ok(out)
}

/// Applies the critical-mode projector P₀ᶜ on the grid. The cos and sin
/// copies of the critical mode give amplitudes (a_c, a_s); the pattern
/// amplitude x is their modulus, which equals the maximum of the projected
/// U-field divided by k₂ and by the peak of Φ.
#[derive(Debug, Clone)]
pub struct ModeProjector {
    pub crit: CriticalPair,
    pub grid: SimGrid,
    /// Φ's radial factor P/s on each interior ring.
    profile: Vec<f64>,
    weight: Vec<f64>,
}

impl ModeProjector {
    pub fn new(p: &BrusselatorParams, schedule: &CapSchedule, tau: f64, grid: SimGrid, cfg: &ReductionConfig) -> Result<Self> {
        let geom = schedule.geometry(tau)?;
        let crit = critical_pair(p, schedule, tau, cfg)?;
        let c = geom.cos_theta_max();
        let profile: Vec<f64> = (0..grid.nw).map(|i| crit.basis.legendre(zeta_of_w(c, grid.w(i))) / crit.scale).collect();
        let weight = ring_weights(&grid, &geom)?;
        let m = crit.basis.m as f64;
        let discrete: f64 = (0..grid.nw)
            .map(|i| {
                let ang: f64 = (0..grid.nphi).map(|j| (m * grid.phi(j)).cos().powi(2)).sum();
                weight[i] * profile[i] * profile[i] * ang
            })
            .sum();
        let exact = crit.basis.norm_sq / (crit.scale * crit.scale);
        if !((discrete - exact).abs() < 0.5 * exact) {
            return Err(Error::Singular(format!(
                "grid {}x{} cannot resolve mode ({},{}): norm {discrete:e} vs {exact:e}",
                grid.nw, grid.nphi, crit.basis.m, crit.basis.n
            )));
        }
        Ok(Self { crit, grid, profile, weight })
    }

    /// (a_c, a_s) = (⟨U₀*_cos, U⟩, ⟨U₀*_sin, U⟩).
    pub fn amplitudes(&self, state: &SurfaceField) -> Result<Vec2> {
        let g = self.grid;
        if state.grid != g {
            return Err(Error::Config("state grid does not match the projector".into()));
        }
        let m = self.crit.basis.m as f64;
        let us = self.crit.u0_star;
        let (mut ac, mut as_) = (0.0, 0.0);
        for i in 0..g.nw {
            let f = self.weight[i] * self.profile[i];
            for j in 0..g.nphi {
                let k = g.idx(i, j);
                let pair = us[0] * state.u[k] + us[1] * state.v[k];
                let a = m * g.phi(j);
                ac += f * pair * a.cos();
                as_ += f * pair * a.sin();
            }
        }
        Ok([self.crit.n_star * ac, self.crit.n_star * as_])
    }

    pub fn extract(&self, state: &SurfaceField) -> Result<f64> {
        let [a, b] = self.amplitudes(state)?;
        Ok(a.hypot(b))
    }

    /// a_c·U₀(cos) + a_s·U₀(sin) sampled on the grid.
    pub fn field(&self, amps: Vec2, tau: f64) -> SurfaceField {
        let g = self.grid;
        let m = self.crit.basis.m as f64;
        let u0 = self.crit.u0;
        let mut out = SurfaceField::zeros(g, tau, self.crit.gamma);
        for i in 0..g.nw {
            for j in 0..g.nphi {
                let a = m * g.phi(j);
                let f = self.profile[i] * (amps[0] * a.cos() + amps[1] * a.sin());
                out.u[g.idx(i, j)] = u0[0] * f;
                out.v[g.idx(i, j)] = u0[1] * f;
            }
        }
        out
    }
}

/// x extracted from `state` with the critical projector.
pub fn project_mode(state: &SurfaceField, projector: &ModeProjector) -> Result<f64> {
    projector.extract(state)
}

/// L²-normalised projections of U onto cos/sin(mφ)·P_mn for a block of modes.
#[derive(Debug, Clone)]
pub struct TrackedModes {
    pub modes: Vec<(u32, u32)>,
    grid: SimGrid,
    profiles: Vec<Vec<f64>>,
    weight: Vec<f64>,
}

impl TrackedModes {
    pub fn new(grid: SimGrid, geom: &CapGeometry, m_max: u32, n_max: u32) -> Result<Self> {
        let quad = CapQuadrature::standard(geom);
        let c = geom.cos_theta_max();
        let mut modes = Vec::new();
        let mut profiles = Vec::new();
        for m in 0..=m_max {
            for b in geometry::modes_for_order(m, n_max as usize, geom, &quad)? {
                let norm = b.norm_sq.sqrt();
                profiles.push((0..grid.nw).map(|i| b.legendre(zeta_of_w(c, grid.w(i))) / norm).collect());
                modes.push((m, b.n));
            }
        }
        Ok(Self { modes, grid, profiles, weight: ring_weights(&grid, geom)? })
    }

    /// Phase-free amplitude √(c² + s²) of the U-component for each mode.
    pub fn amplitudes(&self, state: &SurfaceField) -> Vec<f64> {
        let g = self.grid;
        self.modes
            .iter()
            .zip(&self.profiles)
            .map(|(&(m, _), prof)| {
                let (mut c, mut s) = (0.0, 0.0);
                for i in 0..g.nw {
                    let f = self.weight[i] * prof[i];
                    for j in 0..g.nphi {
                        let a = m as f64 * g.phi(j);
                        let u = state.u[g.idx(i, j)];
                        c += f * u * a.cos();
                        s += f * u * a.sin();
                    }
                }
                c.hypot(s)
            })
            .collect()
    }
}
