use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::grid::{SimGrid, SurfaceField};
use crate::error::{Error, Result};
use crate::geometry::{disk_chart_factor, CapGeometry};
use crate::kinetics::BrusselatorParams;

/// D·c(w)·Δ_disk on a `SimGrid`. Radially a conservative three-point stencil
/// (the innermost cell has a zero-area face at the pole, so nothing crosses
/// w = 0); in φ the second derivative is exact per Fourier bin.
#[derive(Debug, Clone)]
pub struct DiffusionOperator {
    pub grid: SimGrid,
    /// c(w_i) on interior rings.
    pub c: Vec<f64>,
    pub diffusion: [f64; 2],
}

pub fn assemble_operator(grid: SimGrid, geom: &CapGeometry, p: &BrusselatorParams) -> Result<DiffusionOperator> {
    grid.validate()?;
    let mut c = Vec::with_capacity(grid.nw);
    for i in 0..grid.nw {
        let v = disk_chart_factor(geom, grid.w(i))?;
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Singular(format!("chart factor {v} at w = {}", grid.w(i))));
        }
        c.push(v);
    }
    Ok(DiffusionOperator { grid, c, diffusion: [p.dx, p.dy] })
}

/// Radial stencil weights (west, east) of Δ_disk at ring i.
fn radial(grid: &SimGrid, i: usize) -> (f64, f64) {
    let h = grid.dw();
    let s = (i as f64 + 0.5) * h * h;
    (i as f64 / s, (i + 1) as f64 / s)
}

/// Angular wavenumber carried by FFT bin j.
fn wavenumber(grid: &SimGrid, j: usize) -> f64 {
    j.min(grid.nphi - j) as f64
}

/// Batched FFTs along φ, one row per interior ring.
#[derive(Clone)]
pub(crate) struct RingFft {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex<f64>>,
}

impl std::fmt::Debug for RingFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RingFft").field("len", &self.fwd.len()).finish()
    }
}

impl RingFft {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        Self { fwd, inv, scratch: vec![Complex::default(); len] }
    }

    pub(crate) fn forward(&mut self, grid: &SimGrid, src: &[f64], buf: &mut Vec<Complex<f64>>) {
        let n = grid.nw * grid.nphi;
        buf.clear();
        buf.extend(src[..n].iter().map(|&x| Complex::new(x, 0.0)));
        self.fwd.process_with_scratch(buf, &mut self.scratch);
    }

    pub(crate) fn inverse(&mut self, grid: &SimGrid, buf: &mut [Complex<f64>], dst: &mut [f64]) {
        self.inv.process_with_scratch(buf, &mut self.scratch);
        let s = 1.0 / grid.nphi as f64;
        for (d, z) in dst.iter_mut().zip(buf.iter()) {
            *d = z.re * s;
        }
    }
}

impl DiffusionOperator {
    /// c·Δ_disk (the Laplace–Beltrami operator of the cap) applied to one scalar field.
    pub fn laplace_beltrami(&self, u: &[f64]) -> Vec<f64> {
        let g = self.grid;
        let mut fft = RingFft::new(g.nphi);
        let mut buf = Vec::new();
        fft.forward(&g, u, &mut buf);
        let mut out_spec = vec![Complex::default(); buf.len()];
        for j in 0..g.nphi {
            let k = wavenumber(&g, j);
            for i in 0..g.nw {
                let (aw, ae) = radial(&g, i);
                let w = g.w(i);
                let here = buf[g.idx(i, j)];
                let west = if i > 0 { buf[g.idx(i - 1, j)] } else { here };
                let east = if i + 1 < g.nw { buf[g.idx(i + 1, j)] } else { Complex::default() };
                let lap = (west - here) * aw + (east - here) * ae - here * (k * k / (w * w));
                out_spec[g.idx(i, j)] = lap * self.c[i];
            }
        }
        let mut out = vec![0.0; g.len()];
        fft.inverse(&g, &mut out_spec, &mut out);
        out
    }

    /// D·c·Δ_disk applied to both species; the boundary ring of the result is 0.
    pub fn apply(&self, field: &SurfaceField) -> SurfaceField {
        let mut out = field.clone();
        for (s, src) in [(0, &field.u), (1, &field.v)] {
            let mut r = self.laplace_beltrami(src);
            r.iter_mut().for_each(|x| *x *= self.diffusion[s]);
            if s == 0 {
                out.u = r;
            } else {
                out.v = r;
            }
        }
        out
    }

    /// Backward-Euler factors of I − dt·D·c·Δ_disk for every species and wavenumber.
    pub fn implicit(&self, dt: f64) -> Result<ImplicitSolver> {
        if !(dt > 0.0) {
            return Err(Error::Config(format!("time step must be positive, got {dt}")));
        }
        let g = self.grid;
        let kmax = g.nphi / 2;
        let mut factors = Vec::with_capacity(2 * (kmax + 1));
        for s in 0..2 {
            for k in 0..=kmax {
                let kk = (k * k) as f64;
                let mut lower = vec![0.0; g.nw];
                let mut cp = vec![0.0; g.nw];
                let mut inv_den = vec![0.0; g.nw];
                for i in 0..g.nw {
                    let (aw, ae) = radial(&g, i);
                    let w = g.w(i);
                    let f = dt * self.diffusion[s] * self.c[i];
                    let diag = 1.0 + f * (aw + ae + kk / (w * w));
                    let lo = -f * aw;
                    let up = if i + 1 < g.nw { -f * ae } else { 0.0 };
                    let den = if i == 0 { diag } else { diag - lo * cp[i - 1] };
                    if !(den.abs() > 0.0) {
                        return Err(Error::Singular(format!("zero pivot in ring {i}, wavenumber {k}")));
                    }
                    lower[i] = lo;
                    inv_den[i] = 1.0 / den;
                    cp[i] = up / den;
                }
                factors.push(Thomas { lower, cp, inv_den });
            }
        }
        Ok(ImplicitSolver { grid: g, kmax, factors, fft: RingFft::new(g.nphi), buf: Vec::new() })
    }
}

#[derive(Debug, Clone)]
struct Thomas {
    lower: Vec<f64>,
    cp: Vec<f64>,
    inv_den: Vec<f64>,
}

/// Direct solver for the implicit diffusion half-step: one FFT pair per
/// species plus a tridiagonal sweep per Fourier bin.
#[derive(Debug, Clone)]
pub struct ImplicitSolver {
    grid: SimGrid,
    kmax: usize,
    factors: Vec<Thomas>,
    fft: RingFft,
    buf: Vec<Complex<f64>>,
}

impl ImplicitSolver {
    /// Overwrites the interior of `field` (species 0 or 1) with the solution.
    pub fn solve(&mut self, species: usize, field: &mut [f64]) {
        let g = self.grid;
        let mut buf = std::mem::take(&mut self.buf);
        self.fft.forward(&g, field, &mut buf);
        for j in 0..g.nphi {
            let k = j.min(g.nphi - j);
            let t = &self.factors[species * (self.kmax + 1) + k];
            let mut prev = Complex::default();
            for i in 0..g.nw {
                let at = g.idx(i, j);
                prev = (buf[at] - prev * t.lower[i]) * t.inv_den[i];
                buf[at] = prev;
            }
            let mut next = Complex::default();
            for i in (0..g.nw).rev() {
                let at = g.idx(i, j);
                next = buf[at] - next * t.cp[i];
                buf[at] = next;
            }
        }
        let n = g.nw * g.nphi;
        self.fft.inverse(&g, &mut buf, &mut field[..n]);
        self.buf = buf;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{zeta_of_w, CapGeometry};

    fn op(nw: usize, nphi: usize, gamma: f64) -> (DiffusionOperator, CapGeometry) {
        let geom = CapGeometry::new(1.0, gamma).unwrap();
        let g = SimGrid::new(nw, nphi).unwrap();
        (assemble_operator(g, &geom, &BrusselatorParams::default()).unwrap(), geom)
    }

    #[test]
    fn constant_field_is_annihilated_away_from_the_boundary() {
        let (o, _) = op(32, 16, 0.5);
        let g = o.grid;
        let u = vec![1.0; g.len()];
        let r = o.laplace_beltrami(&u);
        for i in 0..g.nw - 1 {
            for j in 0..g.nphi {
                assert!(r[g.idx(i, j)].abs() < 1e-9, "ring {i}: {}", r[g.idx(i, j)]);
            }
        }
    }

    #[test]
    fn polynomial_in_the_disk_is_exact() {
        // w² − 1 vanishes on the rim and the stencil differentiates quadratics exactly.
        let (o, _) = op(16, 8, 0.5);
        let g = o.grid;
        let mut u = vec![0.0; g.len()];
        for i in 0..g.nw {
            for j in 0..g.nphi {
                u[g.idx(i, j)] = g.w(i).powi(2) - 1.0;
            }
        }
        let r = o.laplace_beltrami(&u);
        for i in 0..g.nw {
            let want = 4.0 * o.c[i];
            assert!((r[g.idx(i, 3)] - want).abs() < 1e-9 * want, "ring {i}");
        }
    }

    #[test]
    fn implicit_solve_inverts_the_operator() {
        let (o, _) = op(24, 16, 0.45);
        let g = o.grid;
        let dt = 0.7;
        let mut u: Vec<f64> = (0..g.len()).map(|k| ((k * 37 % 101) as f64 / 101.0) - 0.5).collect();
        for j in 0..g.nphi {
            u[g.idx(g.nw, j)] = 0.0;
        }
        let lu = o.laplace_beltrami(&u);
        let rhs: Vec<f64> = u.iter().zip(&lu).map(|(a, b)| a - dt * o.diffusion[1] * b).collect();
        let mut solver = o.implicit(dt).unwrap();
        let mut x = rhs.clone();
        solver.solve(1, &mut x);
        for k in 0..g.nw * g.nphi {
            assert!((x[k] - u[k]).abs() < 1e-11, "{k}: {} vs {}", x[k], u[k]);
        }
    }

    #[test]
    fn axisymmetric_eigenfunction_residual_shrinks() {
        let mut prev = f64::INFINITY;
        for nw in [16, 32, 64] {
            let (o, geom) = op(nw, 8, 0.5);
            let b = crate::geometry::mode_basis(0, 1, &geom).unwrap();
            let c = geom.cos_theta_max();
            let g = o.grid;
            let mut u = vec![0.0; g.len()];
            for i in 0..g.nw {
                for j in 0..g.nphi {
                    u[g.idx(i, j)] = b.legendre(zeta_of_w(c, g.w(i)));
                }
            }
            let r = o.laplace_beltrami(&u);
            let err = (0..g.nw).map(|i| (r[g.idx(i, 0)] + b.mu * u[g.idx(i, 0)]).abs()).fold(0.0, f64::max);
            assert!(err < prev / 3.0, "nw {nw}: {err} vs {prev}");
            prev = err;
        }
    }
}
