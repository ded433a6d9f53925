//! The slowly drifting axisymmetric state X₀₀ + εX₀₁(τ): eigenfunction
//! expansion of the dilution factor and the first-order correction.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{self, CapGeometry, CapQuadrature, ModeBasis, SurfacePoint};
use crate::kinetics::{matvec, solve2, BrusselatorParams, Mat2, Vec2};
use crate::specfun;

pub const DEFAULT_TERMS: usize = 5;

#[derive(Debug, Clone, Serialize)]
pub struct QExpansion {
    pub tau: f64,
    pub gamma: f64,
    pub modes: Vec<ModeBasis>,
    pub q: Vec<f64>,
}

/// q_n = ⟨Φ₀ₙ, Q⟩/⟨Φ₀ₙ, Φ₀ₙ⟩.
pub fn q_coefficients(geom: &CapGeometry, tau: f64, terms: usize) -> Result<QExpansion> {
    q_coefficients_with(geom, &CapQuadrature::standard(geom), tau, terms)
}

pub fn q_coefficients_with(geom: &CapGeometry, quad: &CapQuadrature, tau: f64, terms: usize) -> Result<QExpansion> {
    let c = geom.cos_theta_max();
    if c == 0.0 {
        return Err(Error::Domain("dilution factor is singular at gamma = 1".into()));
    }
    let modes = geometry::modes_for_order(0, terms, geom, quad)?;
    let qvals: Vec<f64> = quad.cos_theta.iter().map(|z| 2.0 / geom.gamma * (z / c - 1.0)).collect();
    let mut q = Vec::with_capacity(terms);
    for b in &modes {
        let phi: Vec<f64> = quad.cos_theta.iter().map(|&z| specfun::ferrers(0, b.lambda, z)).collect::<Result<_>>()?;
        q.push(quad.dot(&phi, &qvals) / quad.dot(&phi, &phi));
    }
    Ok(QExpansion { tau, gamma: geom.gamma, modes, q })
}

impl QExpansion {
    pub fn eval(&self, zeta: f64) -> f64 {
        self.modes.iter().zip(&self.q).map(|(b, q)| q * b.legendre(zeta)).sum()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QpCorrection {
    pub tau: f64,
    pub gamma: f64,
    pub gamma_prime: f64,
    pub expansion: QExpansion,
    /// (α₀ₙ, β₀ₙ) per n.
    pub coeffs: Vec<Vec2>,
    pub residuals: Vec<f64>,
}

/// (α₀ₙ, β₀ₙ) = γ′ qₙ A₀,₀ₙ⁻¹ (X₀₀, Y₀₀).
pub fn qp_correction(p: &BrusselatorParams, geom: &CapGeometry, tau: f64, gamma_prime: f64, terms: usize) -> Result<QpCorrection> {
    qp_correction_with(p, geom, &CapQuadrature::standard(geom), tau, gamma_prime, terms)
}

pub fn qp_correction_with(
    p: &BrusselatorParams,
    geom: &CapGeometry,
    quad: &CapQuadrature,
    tau: f64,
    gamma_prime: f64,
    terms: usize,
) -> Result<QpCorrection> {
    let expansion = q_coefficients_with(geom, quad, tau, terms)?;
    let x00 = p.equilibrium();
    let mut coeffs = Vec::with_capacity(terms);
    let mut residuals = Vec::with_capacity(terms);
    for (b, q) in expansion.modes.iter().zip(&expansion.q) {
        let a = p.mode_matrix(b.mu);
        check_conditioning(&a, b)?;
        let rhs = [gamma_prime * q * x00[0], gamma_prime * q * x00[1]];
        let v = solve2(&a, rhs)?;
        let r = matvec(&a, v);
        residuals.push(((r[0] - rhs[0]).abs()).max((r[1] - rhs[1]).abs()));
        coeffs.push(v);
    }
    Ok(QpCorrection { tau, gamma: geom.gamma, gamma_prime, expansion, coeffs, residuals })
}

fn check_conditioning(a: &Mat2, b: &ModeBasis) -> Result<()> {
    let norm = |m: &Mat2| (m[0][0].abs() + m[1][0].abs()).max(m[0][1].abs() + m[1][1].abs());
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det == 0.0 {
        return Err(Error::Singular(format!("axisymmetric mode (0,{}) is exactly critical", b.n)));
    }
    let inv = [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]];
    let cond = norm(a) * norm(&inv);
    if cond > 1e12 {
        return Err(Error::Singular(format!("axisymmetric mode (0,{}) is resonant, condition {cond:e}", b.n)));
    }
    Ok(())
}

impl QpCorrection {
    /// (X₀₁, Y₀₁) at cos θ = ζ.
    pub fn x01(&self, zeta: f64) -> Vec2 {
        let mut out = [0.0, 0.0];
        for (b, ab) in self.expansion.modes.iter().zip(&self.coeffs) {
            let phi = b.legendre(zeta);
            out[0] += ab[0] * phi;
            out[1] += ab[1] * phi;
        }
        out
    }

    pub fn x01_at(&self, geom: &CapGeometry, p: &SurfacePoint) -> Result<Vec2> {
        p.check(geom)?;
        Ok(self.x01(p.zeta(geom).min(1.0)))
    }
}

/// Rows (r₁, r₂) and (−r₁, −r₂) of K₁ = 2B₀(X₀₁, ·).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct K1Matrix {
    pub r1: f64,
    pub r2: f64,
}

impl K1Matrix {
    pub fn from_x01(p: &BrusselatorParams, x01: Vec2) -> Self {
        Self {
            r1: 2.0 * p.beta1() * x01[0] + 2.0 * p.beta2() * x01[1],
            r2: 2.0 * p.beta2() * x01[0],
        }
    }

    pub fn matrix(&self) -> Mat2 {
        [[self.r1, self.r2], [-self.r1, -self.r2]]
    }
}

pub fn k1_matrix(p: &BrusselatorParams, corr: &QpCorrection, geom: &CapGeometry, point: &SurfacePoint) -> Result<K1Matrix> {
    Ok(K1Matrix::from_x01(p, corr.x01_at(geom, point)?))
}
