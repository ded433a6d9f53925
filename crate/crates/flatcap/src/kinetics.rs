//! Brusselator kinetics, the Taylor tensors about the patternless state, and
//! per-mode growth rates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CapGeometry;
use crate::specfun;

pub type Vec2 = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];

/// Rate constants. `b_b` is the product bB; b and B never appear separately.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrusselatorParams {
    pub a: f64,
    pub b_b: f64,
    pub c: f64,
    pub d: f64,
    #[serde(rename = "A")]
    pub big_a: f64,
    pub dx: f64,
    pub dy: f64,
}

impl Default for BrusselatorParams {
    fn default() -> Self {
        Self { a: 0.01, b_b: 1.5, c: 1.8, d: 0.375, big_a: 76.51981, dx: 0.005, dy: 0.1 }
    }
}

impl BrusselatorParams {
    pub fn with_a(self, big_a: f64) -> Self {
        Self { big_a, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.a, self.b_b, self.c, self.d, self.big_a, self.dx, self.dy];
        if all.iter().all(|v| *v > 0.0 && v.is_finite()) {
            Ok(())
        } else {
            Err(Error::Config(format!("all Brusselator constants must be positive: {self:?}")))
        }
    }

    pub fn x00(&self) -> f64 {
        self.a * self.big_a / self.d
    }
    pub fn y00(&self) -> f64 {
        self.b_b * self.d / (self.a * self.big_a * self.c)
    }
    pub fn equilibrium(&self) -> Vec2 {
        [self.x00(), self.y00()]
    }

    pub fn k1(&self) -> f64 {
        self.b_b - self.d
    }
    pub fn k2(&self) -> f64 {
        let aa = self.a * self.big_a;
        aa * aa * self.c / (self.d * self.d)
    }
    pub fn k3(&self) -> f64 {
        -self.b_b
    }
    pub fn k4(&self) -> f64 {
        -self.k2()
    }

    /// Coefficient of U₁U₂ in B₀: bBd/(aA) = c·Y₀₀.
    pub fn beta1(&self) -> f64 {
        self.b_b * self.d / (self.a * self.big_a)
    }
    /// Coefficient of U₁V₂ + V₁U₂ in B₀: aAc/d = c·X₀₀.
    pub fn beta2(&self) -> f64 {
        self.a * self.big_a * self.c / self.d
    }

    pub fn k0(&self) -> Mat2 {
        [[self.k1(), self.k2()], [self.k3(), self.k4()]]
    }

    /// B₀(U₁, U₂), always along (1, −1).
    pub fn b0(&self, u1: Vec2, u2: Vec2) -> Vec2 {
        let s = self.beta1() * u1[0] * u2[0] + self.beta2() * (u1[0] * u2[1] + u1[1] * u2[0]);
        [s, -s]
    }

    /// C₀(U₁, U₂, U₃), always along (1, −1).
    pub fn c0(&self, u1: Vec2, u2: Vec2, u3: Vec2) -> Vec2 {
        let s = self.c / 3.0 * (u1[0] * u2[0] * u3[1] + u1[0] * u2[1] * u3[0] + u1[1] * u2[0] * u3[0]);
        [s, -s]
    }

    /// Diffusion-shifted mode matrix K₀ − μ diag(D_X, D_Y).
    pub fn mode_matrix(&self, mu: f64) -> Mat2 {
        [[self.k1() - self.dx * mu, self.k2()], [self.k3(), self.k4() - self.dy * mu]]
    }

    /// Right eigenvector for growth rate σ, as (k₂, D_Xμ − k₁ + σ).
    pub fn u0(&self, mu: f64, sigma: f64) -> Vec2 {
        [self.k2(), self.dx * mu - self.k1() + sigma]
    }

    /// Left eigenvector for growth rate σ, as (k₃, D_Xμ − k₁ + σ).
    pub fn u0_star(&self, mu: f64, sigma: f64) -> Vec2 {
        [self.k3(), self.dx * mu - self.k1() + sigma]
    }
}

pub fn reaction(p: &BrusselatorParams, x: f64, y: f64) -> (f64, f64) {
    let auto = p.c * x * x * y;
    (p.a * p.big_a - p.d * x - p.b_b * x + auto, p.b_b * x - auto)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaPair {
    pub sigma_plus: f64,
    pub sigma_minus: f64,
}

pub fn sigma_pair(p: &BrusselatorParams, mu: f64) -> Result<SigmaPair> {
    eigen2(&p.mode_matrix(mu)).ok_or(Error::ComplexRoots { mu })
}

/// Real eigenvalues of a 2×2 matrix, descending; None when complex.
pub fn eigen2(m: &Mat2) -> Option<SigmaPair> {
    let tr = m[0][0] + m[1][1];
    let half_diff = 0.5 * (m[0][0] - m[1][1]);
    let disc = half_diff * half_diff + m[0][1] * m[1][0];
    if disc < 0.0 {
        return None;
    }
    let r = disc.sqrt();
    let plus = 0.5 * tr + r;
    // Product form avoids cancellation in the smaller root.
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let minus = if plus != 0.0 { det / plus } else { 0.5 * tr - r };
    Some(SigmaPair { sigma_plus: plus.max(minus), sigma_minus: plus.min(minus) })
}

pub fn solve2(m: &Mat2, rhs: Vec2) -> Result<Vec2> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = m.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
    if det.abs() <= 1e-12 * scale * scale {
        return Err(Error::Singular(format!("2x2 determinant {det:e} relative to scale {scale:e}")));
    }
    Ok([
        (m[1][1] * rhs[0] - m[0][1] * rhs[1]) / det,
        (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det,
    ])
}

pub fn matvec(m: &Mat2, v: Vec2) -> Vec2 {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Configurable bisection window for A.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ABracket {
    pub lo: f64,
    pub hi: f64,
}

impl Default for ABracket {
    fn default() -> Self {
        Self { lo: 76.0, hi: 77.0 }
    }
}

/// Laplace–Beltrami eigenvalue of mode (m, n) on a unit-radius cap of curvature γ.
pub fn mode_mu(m: u32, n: u32, gamma: f64, radius: f64) -> Result<f64> {
    let l = specfun::find_degree(m, n, gamma, crate::geometry::ROOT_TOL)?.lambda;
    Ok(l * (l + 1.0) * gamma * gamma / (radius * radius))
}

/// A at which σ⁺ of mode (m, n) vanishes, by bisection on A.
pub fn marginal_a(m: u32, n: u32, gamma: f64, p: &BrusselatorParams, bracket: ABracket) -> Result<f64> {
    CapGeometry::new(1.0, gamma)?;
    let mu = mode_mu(m, n, gamma, 1.0)?;
    marginal_a_for_mu(mu, p, bracket)
}

pub fn marginal_a_for_mu(mu: f64, p: &BrusselatorParams, bracket: ABracket) -> Result<f64> {
    let s = |a: f64| sigma_pair(&p.with_a(a), mu).map(|s| s.sigma_plus);
    let probes = 9;
    let vals: Vec<f64> = (0..probes)
        .map(|i| s(bracket.lo + (bracket.hi - bracket.lo) * i as f64 / (probes - 1) as f64))
        .collect::<Result<_>>()?;
    let increasing = vals.windows(2).all(|w| w[1] > w[0]);
    let decreasing = vals.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(Error::Bracket(format!("sigma+ not monotone in A on [{}, {}] at mu = {mu}", bracket.lo, bracket.hi)));
    }
    let (mut lo, mut hi) = (bracket.lo, bracket.hi);
    let (mut f_lo, f_hi) = (vals[0], vals[probes - 1]);
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracket(format!("no marginal A in [{lo}, {hi}] at mu = {mu}")));
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        let f = s(mid)?;
        if f == 0.0 {
            return Ok(mid);
        }
        if f.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Closed-form marginal A: det(K₀ − Dμ) = 0 gives k₂ = (k₁ − D_Xμ)D_Yμ/(D_Xμ + d).
/// None when no positive A makes the determinant vanish.
pub fn marginal_a_closed(mu: f64, p: &BrusselatorParams) -> Option<f64> {
    let k2 = (p.k1() - p.dx * mu) * p.dy * mu / (p.dx * mu + p.d);
    if k2 <= 0.0 {
        return None;
    }
    Some(p.d / p.a * (k2 / p.c).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveHit {
    pub m: u32,
    pub n: u32,
    pub samples: Vec<(f64, f64)>,
}

/// Modes whose marginal curve A_mn(γ) enters the box, with the curve sampled
/// on `gamma_samples` points. Enumerates m ≤ m_max, n ≤ n_max.
pub fn scan_region(
    p: &BrusselatorParams,
    a_range: (f64, f64),
    gamma_range: (f64, f64),
    m_max: u32,
    n_max: u32,
    gamma_samples: usize,
) -> Result<Vec<CurveHit>> {
    let mut hits = Vec::new();
    for m in 0..=m_max {
        for n in 1..=n_max {
            let mut samples = Vec::with_capacity(gamma_samples);
            let mut inside = false;
            for i in 0..gamma_samples {
                let g = gamma_range.0 + (gamma_range.1 - gamma_range.0) * i as f64 / (gamma_samples - 1) as f64;
                let mu = mode_mu(m, n, g, 1.0)?;
                if let Some(a) = marginal_a_closed(mu, p) {
                    if a >= a_range.0 && a <= a_range.1 {
                        inside = true;
                    }
                    samples.push((g, a));
                }
            }
            if inside {
                hits.push(CurveHit { m, n, samples });
            }
        }
    }
    Ok(hits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilibrium_and_arithmetic() {
        let p = BrusselatorParams::default().with_a(76.5198);
        let (f, g) = reaction(&p, p.x00(), p.y00());
        assert!(f.abs() < 1e-12 && g.abs() < 1e-12);
        let (f, g) = reaction(&p, 0.0, 3.3);
        assert!((f - p.a * p.big_a).abs() < 1e-15 && g == 0.0);
        let (f, g) = reaction(&p, 1.0, 1.0);
        assert!((f - 0.690198).abs() < 1e-12);
        assert!((g + 0.3).abs() < 1e-12);
    }

    #[test]
    fn tensor_entries() {
        let p = BrusselatorParams::default().with_a(76.5198);
        assert!((p.k1() - 1.125).abs() < 1e-15);
        assert_eq!(p.k3(), -1.5);
        assert!((p.k2() - 7.4948).abs() < 1e-4);
        assert_eq!(p.k4(), -p.k2());
    }

    #[test]
    fn tensors_match_taylor_expansion() {
        // f(X00+u) − f(X00) = K₀u + B₀(u,u) + C₀(u,u,u) exactly (cubic polynomial).
        let p = BrusselatorParams::default();
        let u = [0.013, -0.021];
        let (f0, _) = reaction(&p, p.x00(), p.y00());
        let (f1, g1) = reaction(&p, p.x00() + u[0], p.y00() + u[1]);
        let lin = matvec(&p.k0(), u);
        let b = p.b0(u, u);
        let c = p.c0(u, u, u);
        assert!((f1 - f0 - (lin[0] + b[0] + c[0])).abs() < 1e-13);
        assert!((g1 - (lin[1] + b[1] + c[1])).abs() < 1e-13);
    }

    #[test]
    fn mu_zero_is_stable() {
        let p = BrusselatorParams::default().with_a(76.5198);
        let s = sigma_pair(&p, 0.0).unwrap();
        assert!(s.sigma_plus < 0.0 && s.sigma_minus < 0.0);
        let m = p.mode_matrix(0.0);
        assert!((m[0][0] + m[1][1] + 6.3698).abs() < 1e-4);
        assert!((m[0][0] * m[1][1] - m[0][1] * m[1][0] - 2.8106).abs() < 1e-4);
    }

    #[test]
    fn eigenvectors() {
        let p = BrusselatorParams::default();
        let mu = 70.0;
        let s = sigma_pair(&p, mu).unwrap().sigma_plus;
        let m = p.mode_matrix(mu);
        let u = p.u0(mu, s);
        let r = matvec(&m, u);
        assert!((r[0] - s * u[0]).abs() < 1e-10 && (r[1] - s * u[1]).abs() < 1e-10);
        let v = p.u0_star(mu, s);
        let l = [v[0] * m[0][0] + v[1] * m[1][0], v[0] * m[0][1] + v[1] * m[1][1]];
        assert!((l[0] - s * v[0]).abs() < 1e-10 && (l[1] - s * v[1]).abs() < 1e-10);
    }

    #[test]
    fn bisection_matches_closed_form() {
        let p = BrusselatorParams::default();
        for mu in [60.0, 72.2, 80.0] {
            let a = marginal_a_for_mu(mu, &p, ABracket { lo: 70.0, hi: 80.0 }).unwrap();
            let b = marginal_a_closed(mu, &p).unwrap();
            assert!((a - b).abs() < 1e-8, "{a} {b}");
        }
        assert!(matches!(
            marginal_a_for_mu(72.2, &p, ABracket { lo: 80.0, hi: 81.0 }),
            Err(Error::Bracket(_))
        ));
    }

    #[test]
    fn singular_solve_is_reported() {
        assert!(matches!(solve2(&[[1.0, 2.0], [2.0, 4.0]], [1.0, 0.0]), Err(Error::Singular(_))));
    }
}
