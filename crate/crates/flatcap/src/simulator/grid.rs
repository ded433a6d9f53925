use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polar grid on the unit disk. Rings sit at w_i = (i + ½)Δw with
/// Δw = 1/(Nw + ½), so ring Nw lands exactly on the boundary w = 1 and no
/// node sits on the pole. Columns are uniform in φ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimGrid {
    pub nw: usize,
    pub nphi: usize,
}

impl SimGrid {
    pub fn new(nw: usize, nphi: usize) -> Result<Self> {
        let g = Self { nw, nphi };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nw < 4 {
            return Err(Error::Config(format!("need at least 4 radial cells, got {}", self.nw)));
        }
        if self.nphi < 4 || self.nphi % 4 != 0 {
            return Err(Error::Config(format!("angular cells must be a positive multiple of 4, got {}", self.nphi)));
        }
        Ok(())
    }

    pub fn dw(&self) -> f64 {
        1.0 / (self.nw as f64 + 0.5)
    }

    /// Radius of ring i; ring `nw` is the boundary.
    pub fn w(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dw()
    }

    pub fn phi(&self, j: usize) -> f64 {
        2.0 * std::f64::consts::PI * j as f64 / self.nphi as f64
    }

    pub fn dphi(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.nphi as f64
    }

    /// Storage length including the boundary ring.
    pub fn len(&self) -> usize {
        (self.nw + 1) * self.nphi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.nphi + j
    }
}

/// Deviation fields (U, V) on a grid, with the slow time and curvature they belong to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceField {
    pub grid: SimGrid,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub tau: f64,
    pub gamma: f64,
}

impl SurfaceField {
    pub fn zeros(grid: SimGrid, tau: f64, gamma: f64) -> Self {
        Self { grid, u: vec![0.0; grid.len()], v: vec![0.0; grid.len()], tau, gamma }
    }

    /// Samples f(w, φ) on interior rings; the boundary ring stays zero.
    pub fn from_fn(grid: SimGrid, tau: f64, gamma: f64, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        let mut s = Self::zeros(grid, tau, gamma);
        for i in 0..grid.nw {
            let w = grid.w(i);
            for j in 0..grid.nphi {
                let k = grid.idx(i, j);
                let val = f(w, grid.phi(j));
                s.u[k] = val[0];
                s.v[k] = val[1];
            }
        }
        s
    }

    pub fn boundary_is_zero(&self) -> bool {
        let g = &self.grid;
        (0..g.nphi).all(|j| self.u[g.idx(g.nw, j)] == 0.0 && self.v[g.idx(g.nw, j)] == 0.0)
    }

    pub fn zero_boundary(&mut self) {
        let g = self.grid;
        for j in 0..g.nphi {
            let k = g.idx(g.nw, j);
            self.u[k] = 0.0;
            self.v[k] = 0.0;
        }
    }

    /// Rotates by `shift` columns: new(φ_j) = old(φ_{j−shift}).
    pub fn rotated(&self, shift: usize) -> Self {
        let g = self.grid;
        let mut out = self.clone();
        for i in 0..=g.nw {
            for j in 0..g.nphi {
                let src = g.idx(i, (j + g.nphi - shift % g.nphi) % g.nphi);
                out.u[g.idx(i, j)] = self.u[src];
                out.v[g.idx(i, j)] = self.v[src];
            }
        }
        out
    }

    /// Reflects φ ↦ −φ.
    pub fn reflected(&self) -> Self {
        let g = self.grid;
        let mut out = self.clone();
        for i in 0..=g.nw {
            for j in 0..g.nphi {
                let src = g.idx(i, (g.nphi - j) % g.nphi);
                out.u[g.idx(i, j)] = self.u[src];
                out.v[g.idx(i, j)] = self.v[src];
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.u.iter().chain(&self.v).fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|x| x.is_finite())
    }
}
