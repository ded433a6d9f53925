//! Cap geometry, curvature schedules, the three coordinate charts, the
//! dilution factor and quadrature on the cap.
//!
//! A cap of base radius R and curvature γ sits on a sphere of radius R/γ and
//! spans θ ∈ [0, arcsin γ]. The toroidal chart uses (η, φ) with the boundary
//! at η = ∞; the disk chart compactifies it with w = tanh(η/2), so the cap is
//! always the closed unit disk and Δ_Ω = c(w)·Δ_disk.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    Linear,
    Arctan,
}

/// γ(τ) with τ = εt. Linear: γ0 − τ. Arctan: γ0 − (δ/2)·atan τ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapSchedule {
    pub radius: f64,
    pub epsilon: f64,
    pub kind: ScheduleKind,
    pub gamma0: f64,
    pub delta: f64,
}

impl CapSchedule {
    pub fn linear(radius: f64, epsilon: f64, gamma0: f64) -> Self {
        Self { radius, epsilon, kind: ScheduleKind::Linear, gamma0, delta: 0.0 }
    }

    /// A domain that does not move: arctan kind with zero range.
    pub fn frozen(radius: f64, gamma: f64) -> Self {
        Self { radius, epsilon: 0.0, kind: ScheduleKind::Arctan, gamma0: gamma, delta: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) {
            return Err(Error::Config(format!("radius {} must be positive", self.radius)));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::Config(format!("epsilon {} must be non-negative", self.epsilon)));
        }
        if !(self.gamma0 > 0.0 && self.gamma0 <= 1.0) {
            return Err(Error::Config(format!("gamma0 {} not in (0, 1]", self.gamma0)));
        }
        Ok(())
    }

    pub fn gamma(&self, tau: f64) -> f64 {
        match self.kind {
            ScheduleKind::Linear => self.gamma0 - tau,
            ScheduleKind::Arctan => self.gamma0 - 0.5 * self.delta * tau.atan(),
        }
    }

    pub fn gamma_prime(&self, tau: f64) -> f64 {
        match self.kind {
            ScheduleKind::Linear => -1.0,
            ScheduleKind::Arctan => -0.5 * self.delta / (1.0 + tau * tau),
        }
    }

    pub fn tau_of_gamma(&self, gamma: f64) -> Result<f64> {
        match self.kind {
            ScheduleKind::Linear => Ok(self.gamma0 - gamma),
            ScheduleKind::Arctan => {
                let s = 2.0 * (self.gamma0 - gamma) / self.delta;
                if self.delta == 0.0 || s.abs() >= PI / 2.0 {
                    return Err(Error::Domain(format!("gamma {gamma} outside the arctan range")));
                }
                Ok(s.tan())
            }
        }
    }

    pub fn geometry(&self, tau: f64) -> Result<CapGeometry> {
        CapGeometry::new(self.radius, self.gamma(tau))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapGeometry {
    pub radius: f64,
    pub gamma: f64,
    pub theta_max: f64,
    pub xi: f64,
    pub sphere_radius: f64,
}

impl CapGeometry {
    pub fn new(radius: f64, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::Domain(format!("curvature {gamma} not in (0, 1]")));
        }
        if !(radius > 0.0) {
            return Err(Error::Domain(format!("radius {radius} must be positive")));
        }
        let theta_max = gamma.asin();
        Ok(Self { radius, gamma, theta_max, xi: PI - theta_max, sphere_radius: radius / gamma })
    }

    /// √(1−γ²) = cos θ_max = −cos ξ.
    pub fn cos_theta_max(&self) -> f64 {
        (1.0 - self.gamma * self.gamma).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    Spherical,
    Toroidal,
    Disk,
}

/// (c1, c2) are (θ, φ), (η, φ) or (w, φ) depending on the chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub chart: Chart,
    pub c1: f64,
    pub c2: f64,
}

impl SurfacePoint {
    pub fn spherical(theta: f64, phi: f64) -> Self {
        Self { chart: Chart::Spherical, c1: theta, c2: phi }
    }
    pub fn toroidal(eta: f64, phi: f64) -> Self {
        Self { chart: Chart::Toroidal, c1: eta, c2: phi }
    }
    pub fn disk(w: f64, phi: f64) -> Self {
        Self { chart: Chart::Disk, c1: w, c2: phi }
    }

    pub fn check(&self, geom: &CapGeometry) -> Result<()> {
        let ok = match self.chart {
            Chart::Spherical => self.c1 >= 0.0 && self.c1 <= geom.theta_max * (1.0 + 1e-14),
            Chart::Toroidal => self.c1 >= 0.0 && !self.c1.is_nan(),
            Chart::Disk => (0.0..=1.0).contains(&self.c1),
        };
        if !ok || !self.c2.is_finite() {
            return Err(Error::Domain(format!("{:?} point ({}, {}) outside the cap", self.chart, self.c1, self.c2)));
        }
        Ok(())
    }

    /// cos θ, the Legendre argument ζ.
    pub fn zeta(&self, geom: &CapGeometry) -> f64 {
        let c = geom.cos_theta_max();
        match self.chart {
            Chart::Spherical => self.c1.cos(),
            Chart::Toroidal => {
                if self.c1.is_infinite() {
                    return c;
                }
                let ch = self.c1.cosh();
                (1.0 + c * ch) / (ch + c)
            }
            Chart::Disk => zeta_of_w(c, self.c1),
        }
    }

    pub fn to_chart(&self, geom: &CapGeometry, chart: Chart) -> SurfacePoint {
        let phi = self.c2;
        if chart == self.chart {
            return *self;
        }
        let c = geom.cos_theta_max();
        let w = match self.chart {
            Chart::Disk => self.c1,
            Chart::Toroidal => (0.5 * self.c1).tanh(),
            Chart::Spherical => w_of_theta(c, self.c1),
        };
        match chart {
            Chart::Disk => SurfacePoint::disk(w, phi),
            Chart::Toroidal => SurfacePoint::toroidal(2.0 * w.atanh(), phi),
            Chart::Spherical => SurfacePoint::spherical(theta_of_w(c, w), phi),
        }
    }
}

/// cos θ in the disk chart: (1 + c coshη)/(coshη + c) with coshη = (1+w²)/(1−w²).
pub fn zeta_of_w(c: f64, w: f64) -> f64 {
    let w2 = w * w;
    ((1.0 - w2) + c * (1.0 + w2)) / ((1.0 + w2) + c * (1.0 - w2))
}

/// Polar angle in the disk chart; uses sin θ to stay accurate near the pole.
pub fn theta_of_w(c: f64, w: f64) -> f64 {
    let w2 = w * w;
    let den = (1.0 + w2) + c * (1.0 - w2);
    let sin = 2.0 * w * (1.0 - c * c).sqrt() / den;
    let cos = ((1.0 - w2) + c * (1.0 + w2)) / den;
    sin.atan2(cos)
}

/// Inverse of `theta_of_w`: w = tan(θ/2)·√((1+c)/(1−c)).
pub fn w_of_theta(c: f64, theta: f64) -> f64 {
    (0.5 * theta).tan() * ((1.0 + c) / (1.0 - c)).sqrt()
}

/// Q = (2/γ)(cos θ/√(1−γ²) − 1), the φ-independent dilution factor.
pub fn dilution_q(geom: &CapGeometry, p: &SurfacePoint) -> Result<f64> {
    p.check(geom)?;
    let c = geom.cos_theta_max();
    if c == 0.0 {
        return Err(Error::Domain("dilution factor is singular at gamma = 1".into()));
    }
    let g = geom.gamma;
    Ok(match p.chart {
        Chart::Spherical => 2.0 / g * (p.c1.cos() / c - 1.0),
        Chart::Toroidal => {
            if p.c1.is_infinite() {
                0.0
            } else {
                2.0 * g / (c * (p.c1.cosh() + c))
            }
        }
        Chart::Disk => dilution_q_w(g, c, p.c1),
    })
}

pub(crate) fn dilution_q_w(gamma: f64, c: f64, w: f64) -> f64 {
    let w2 = w * w;
    2.0 * gamma * (1.0 - w2) / (c * ((1.0 + w2) + c * (1.0 - w2)))
}

/// c(w) with Δ_Ω = c(w)·Δ_disk.
pub fn disk_chart_factor(geom: &CapGeometry, w: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::Domain(format!("w = {w} not in [0, 1]")));
    }
    let c = geom.cos_theta_max();
    let b = ((1.0 + w * w) + c * (1.0 - w * w)) / (2.0 * geom.radius);
    Ok(b * b)
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order {
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if order == 1 {
                p0 = 1.0;
                p1 = x;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    /// sin θ dθ dφ, the weight of every projection in this crate.
    SolidAngle,
    /// Physical area, (R/γ)² sin θ dθ dφ.
    PhysicalArea,
}

/// Composite Gauss–Legendre rule in θ over [0, θ_max]; weights include sin θ.
#[derive(Debug, Clone)]
pub struct CapQuadrature {
    pub theta: Vec<f64>,
    pub cos_theta: Vec<f64>,
    pub weight: Vec<f64>,
}

impl CapQuadrature {
    pub const DEFAULT_PANELS: usize = 64;
    pub const DEFAULT_ORDER: usize = 8;

    pub fn new(geom: &CapGeometry, panels: usize, order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let h = geom.theta_max / panels as f64;
        let mut theta = Vec::with_capacity(panels * order);
        let mut weight = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let a = p as f64 * h;
            for (xi, wi) in x.iter().zip(&w) {
                let t = a + 0.5 * h * (xi + 1.0);
                theta.push(t);
                weight.push(0.5 * h * wi * t.sin());
            }
        }
        let cos_theta = theta.iter().map(|t| t.cos()).collect();
        Self { theta, cos_theta, weight }
    }

    pub fn standard(geom: &CapGeometry) -> Self {
        Self::new(geom, Self::DEFAULT_PANELS, Self::DEFAULT_ORDER)
    }

    /// ∫ f(θ) sin θ dθ over [0, θ_max].
    pub fn axial(&self, f: impl Fn(usize, f64) -> f64) -> f64 {
        self.theta.iter().enumerate().zip(&self.weight).map(|((i, &t), w)| w * f(i, t)).sum()
    }

    /// Dot product of two sampled axial profiles.
    pub fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        self.weight.iter().zip(a).zip(b).map(|((w, x), y)| w * x * y).sum()
    }
}

/// ∫∫ f(θ, φ) over the cap with a 64-point trapezoid rule in φ (exact for
/// trigonometric polynomials of degree below 64).
pub fn area_integral(geom: &CapGeometry, measure: Measure, f: impl Fn(f64, f64) -> f64) -> f64 {
    area_integral_with(&CapQuadrature::standard(geom), geom, measure, 64, f)
}

pub fn area_integral_with(
    quad: &CapQuadrature,
    geom: &CapGeometry,
    measure: Measure,
    n_phi: usize,
    f: impl Fn(f64, f64) -> f64,
) -> f64 {
    let dphi = 2.0 * PI / n_phi as f64;
    let s = quad.axial(|_, t| (0..n_phi).map(|j| f(t, j as f64 * dphi)).sum::<f64>() * dphi);
    match measure {
        Measure::SolidAngle => s,
        Measure::PhysicalArea => s * geom.sphere_radius * geom.sphere_radius,
    }
}

/// ∫₀^{2π} Π cos(m_i φ) dφ, exactly.
pub fn cos_product_integral(ms: &[i64]) -> f64 {
    if ms.is_empty() {
        return 2.0 * PI;
    }
    let mut count = 0u64;
    let rest = &ms[1..];
    for mask in 0..(1u64 << rest.len()) {
        let mut s = ms[0];
        for (i, m) in rest.iter().enumerate() {
            if mask >> i & 1 == 1 {
                s -= m;
            } else {
                s += m;
            }
        }
        if s == 0 {
            count += 1;
        }
    }
    2.0 * PI * count as f64 / (1u64 << rest.len()) as f64
}

/// Laplace–Beltrami mode data. `norm_sq` is ∫∫ cos²(mφ) P² sin θ dθ dφ and
/// `peak` is max |P^m_λ| over the cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeBasis {
    pub m: u32,
    pub n: u32,
    pub gamma: f64,
    pub lambda: f64,
    pub mu: f64,
    pub norm_sq: f64,
    pub peak: f64,
    pub peak_zeta: f64,
}

impl ModeBasis {
    pub fn legendre(&self, zeta: f64) -> f64 {
        specfun::ferrers(self.m, self.lambda, zeta).unwrap_or(f64::NAN)
    }

    /// ∫ cos²(mφ) dφ.
    pub fn phi_norm(&self) -> f64 {
        if self.m == 0 {
            2.0 * PI
        } else {
            PI
        }
    }
}

pub const ROOT_TOL: f64 = 1e-10;

pub fn mode_basis(m: u32, n: u32, geom: &CapGeometry) -> Result<ModeBasis> {
    mode_basis_with(m, n, geom, &CapQuadrature::standard(geom))
}

pub fn mode_basis_with(m: u32, n: u32, geom: &CapGeometry, quad: &CapQuadrature) -> Result<ModeBasis> {
    let root = specfun::find_degree(m, n, geom.gamma, ROOT_TOL)?;
    mode_from_degree(m, n, root.lambda, geom, quad)
}

pub fn modes_for_order(m: u32, count: usize, geom: &CapGeometry, quad: &CapQuadrature) -> Result<Vec<ModeBasis>> {
    specfun::degree_roots(m, count, geom.gamma, ROOT_TOL)?
        .into_iter()
        .map(|r| mode_from_degree(m, r.n, r.lambda, geom, quad))
        .collect()
}

pub(crate) fn mode_from_degree(m: u32, n: u32, lambda: f64, geom: &CapGeometry, quad: &CapQuadrature) -> Result<ModeBasis> {
    let mut sq = 0.0;
    for (z, w) in quad.cos_theta.iter().zip(&quad.weight) {
        let p = specfun::ferrers(m, lambda, *z)?;
        sq += w * p * p;
    }
    let phi = if m == 0 { 2.0 * PI } else { PI };
    let (peak, peak_zeta) = legendre_peak(m, lambda, geom)?;
    Ok(ModeBasis {
        m,
        n,
        gamma: geom.gamma,
        lambda,
        mu: lambda * (lambda + 1.0) * geom.gamma * geom.gamma / (geom.radius * geom.radius),
        norm_sq: phi * sq,
        peak,
        peak_zeta,
    })
}

/// max over θ ∈ [0, θ_max] of |P^m_λ(cos θ)|, and the cos θ where it occurs.
pub fn legendre_peak(m: u32, lambda: f64, geom: &CapGeometry) -> Result<(f64, f64)> {
    let samples = 400;
    let h = geom.theta_max / samples as f64;
    let f = |t: f64| specfun::ferrers(m, lambda, t.cos()).map(f64::abs);
    let mut best = (0usize, -1.0);
    for i in 0..=samples {
        let v = f(i as f64 * h)?;
        if v > best.1 {
            best = (i, v);
        }
    }
    let mut a = (best.0 as f64 - 1.0).max(0.0) * h;
    let mut b = ((best.0 + 1) as f64 * h).min(geom.theta_max);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while b - a > 1e-12 {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2)?;
        }
    }
    let t = 0.5 * (a + b);
    let v = f(t)?;
    let end = f(0.0)?;
    if end >= v && end >= best.1 {
        return Ok((end, 1.0));
    }
    if v >= best.1 {
        Ok((v, t.cos()))
    } else {
        Ok((best.1, (best.0 as f64 * h).cos()))
    }
}

/// cos(mφ)·P^m_λ(ζ(p)).
pub fn eigenfunction_eval(basis: &ModeBasis, geom: &CapGeometry, p: &SurfacePoint) -> Result<f64> {
    p.check(geom)?;
    let z = p.zeta(geom).min(1.0);
    Ok((basis.m as f64 * p.c2).cos() * specfun::ferrers(basis.m, basis.lambda, z)?)
}
