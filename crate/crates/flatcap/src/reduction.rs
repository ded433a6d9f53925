//! WKB linearisation about the drifting state, the order-ε growth-rate
//! correction, the quadratic centre-manifold terms and the cubic coefficient.
//!
//! The critical mode is Φ = cos(m₀φ)·P/s where s is the amplitude scale:
//! the peak of |P| on the cap by default, so that x measures the peak of the
//! pattern in units of u₀. Every coefficient here follows from that choice;
//! C·x² and the reconstructed fields do not depend on it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, cos_product_integral, CapGeometry, CapQuadrature, CapSchedule, ModeBasis};
use crate::kinetics::{self, dot, solve2, BrusselatorParams, Mat2, Vec2};
use crate::quasipattern::{self, K1Matrix, QpCorrection};
use crate::specfun::{self, FdSteps};
use crate::spline::CubicSpline;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AmplitudeConvention {
    /// Φ scaled so max |Φ| = 1 on the cap.
    #[default]
    PeakNormalized,
    /// Φ = cos(mφ)·P^m_λ exactly as evaluated.
    Unnormalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapCheck {
    pub enabled: bool,
    pub m_max: u32,
    pub n_max: u32,
}

impl Default for GapCheck {
    fn default() -> Self {
        Self { enabled: true, m_max: 12, n_max: 4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionConfig {
    pub m0: u32,
    pub n0: u32,
    /// Truncation N of the Φ′ and quadratic-term series.
    pub terms: usize,
    /// Truncation of the drifting-state series.
    pub qp_terms: usize,
    pub steps: FdSteps,
    pub convention: AmplitudeConvention,
    pub gap: GapCheck,
    pub panels: usize,
    pub order: usize,
}

impl Default for ReductionConfig {
    fn default() -> Self {
        Self {
            m0: 5,
            n0: 1,
            terms: 5,
            qp_terms: quasipattern::DEFAULT_TERMS,
            steps: FdSteps::default(),
            convention: AmplitudeConvention::default(),
            gap: GapCheck::default(),
            panels: CapQuadrature::DEFAULT_PANELS,
            order: CapQuadrature::DEFAULT_ORDER,
        }
    }
}

impl ReductionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m0 == 0 {
            return Err(Error::Config("axisymmetric critical modes (m0 = 0) are not supported".into()));
        }
        if self.n0 == 0 || self.terms == 0 || self.qp_terms == 0 {
            return Err(Error::Config("mode index and truncations must be >= 1".into()));
        }
        FdSteps::new(self.steps.h1, self.steps.h2)?;
        Ok(())
    }

    fn scale(&self, b: &ModeBasis) -> f64 {
        match self.convention {
            AmplitudeConvention::PeakNormalized => b.peak,
            AmplitudeConvention::Unnormalized => 1.0,
        }
    }

    fn quad(&self, geom: &CapGeometry) -> CapQuadrature {
        CapQuadrature::new(geom, self.panels, self.order)
    }
}

/// Critical eigenpair, U₀ = u0·Φ and U₀* = n_star·u0_star·Φ with ⟨U₀*, U₀⟩ = 1.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalPair {
    pub tau: f64,
    pub gamma: f64,
    pub gamma_prime: f64,
    pub basis: ModeBasis,
    /// s in Φ = cos(m₀φ)·P/s.
    pub scale: f64,
    pub sigma0: f64,
    pub sigma_minus: f64,
    pub u0: Vec2,
    pub u0_star: Vec2,
    pub n_star: f64,
}

impl CriticalPair {
    /// Φ at (cos θ, φ).
    pub fn phi(&self, zeta: f64, phi: f64) -> f64 {
        (self.basis.m as f64 * phi).cos() * self.basis.legendre(zeta) / self.scale
    }

    /// Largest |Φ| on the cap.
    pub fn phi_peak(&self) -> f64 {
        self.basis.peak / self.scale
    }
}

pub fn critical_pair(p: &BrusselatorParams, schedule: &CapSchedule, tau: f64, cfg: &ReductionConfig) -> Result<CriticalPair> {
    let geom = schedule.geometry(tau)?;
    critical_pair_with(p, schedule, tau, &geom, &cfg.quad(&geom), cfg)
}

fn critical_pair_with(
    p: &BrusselatorParams,
    schedule: &CapSchedule,
    tau: f64,
    geom: &CapGeometry,
    quad: &CapQuadrature,
    cfg: &ReductionConfig,
) -> Result<CriticalPair> {
    cfg.validate()?;
    let basis = geometry::mode_basis_with(cfg.m0, cfg.n0, geom, quad)?;
    let sp = kinetics::sigma_pair(p, basis.mu)?;
    let sigma0 = sp.sigma_plus;
    if cfg.gap.enabled {
        spectral_gap(p, geom, cfg, sigma0)?;
    }
    let scale = cfg.scale(&basis);
    let u0 = p.u0(basis.mu, sigma0);
    let u0_star = p.u0_star(basis.mu, sigma0);
    let pairing = dot(u0_star, u0);
    if pairing.abs() < 1e-14 * (dot(u0, u0) * dot(u0_star, u0_star)).sqrt() {
        return Err(Error::Singular("eigenvector and adjoint are orthogonal".into()));
    }
    let n_star = scale * scale / (pairing * basis.norm_sq);
    Ok(CriticalPair {
        tau,
        gamma: geom.gamma,
        gamma_prime: schedule.gamma_prime(tau),
        basis,
        scale,
        sigma0,
        sigma_minus: sp.sigma_minus,
        u0,
        u0_star,
        n_star,
    })
}

/// Every other mode must be stable and decay faster than the critical one grows or decays.
fn spectral_gap(p: &BrusselatorParams, geom: &CapGeometry, cfg: &ReductionConfig, sigma0: f64) -> Result<()> {
    for m in 0..=cfg.gap.m_max {
        let roots = specfun::degree_roots(m, cfg.gap.n_max as usize, geom.gamma, geometry::ROOT_TOL)?;
        for r in roots {
            if m == cfg.m0 && r.n == cfg.n0 {
                continue;
            }
            let mu = r.lambda * (r.lambda + 1.0) * geom.gamma * geom.gamma / (geom.radius * geom.radius);
            let s = kinetics::sigma_pair(p, mu)?.sigma_plus;
            if s >= 0.0 || s.abs() <= sigma0.abs() {
                return Err(Error::SpectralGap(format!(
                    "mode ({m},{}) has sigma+ = {s:e} against critical {sigma0:e} at gamma = {}",
                    r.n, geom.gamma
                )));
            }
        }
    }
    Ok(())
}

/// Coefficients of Φ′ = Σ dᵢ Φ_{m₀ i} (τ-derivative at fixed material point).
#[derive(Debug, Clone, Serialize)]
pub struct PhiDerivative {
    pub tau: f64,
    pub d: Vec<f64>,
    pub lambda_prime: f64,
    pub scale_log_derivative: f64,
}

pub fn phi_prime_coeffs(schedule: &CapSchedule, tau: f64, cfg: &ReductionConfig) -> Result<PhiDerivative> {
    let geom = schedule.geometry(tau)?;
    phi_prime_with(schedule, tau, &geom, &cfg.quad(&geom), cfg)
}

fn degree_at(schedule: &CapSchedule, tau: f64, m: u32, n: u32) -> Result<f64> {
    Ok(specfun::find_degree(m, n, schedule.gamma(tau), geometry::ROOT_TOL)?.lambda)
}

fn phi_prime_with(
    schedule: &CapSchedule,
    tau: f64,
    geom: &CapGeometry,
    quad: &CapQuadrature,
    cfg: &ReductionConfig,
) -> Result<PhiDerivative> {
    let gp = schedule.gamma_prime(tau);
    let h = cfg.steps.h2;
    let lambda_prime = if gp == 0.0 {
        0.0
    } else {
        (degree_at(schedule, tau + h, cfg.m0, cfg.n0)? - degree_at(schedule, tau - h, cfg.m0, cfg.n0)?) / (2.0 * h)
    };
    let modes = geometry::modes_for_order(cfg.m0, cfg.terms.max(cfg.n0 as usize), geom, quad)?;
    let crit = &modes[cfg.n0 as usize - 1];
    let g = geom.gamma;
    let c = geom.cos_theta_max();
    // ∂ζ/∂τ at fixed η is −γ′ sin²θ/(γ√(1−γ²)).
    let dtau_p: Vec<f64> = quad
        .cos_theta
        .iter()
        .map(|&z| {
            if gp == 0.0 {
                return Ok(0.0);
            }
            let zeta_prime = -gp * (1.0 - z * z) / (g * c);
            let dl = specfun::dlambda_raw(cfg.m0, crit.lambda, z, cfg.steps.h1)?;
            let dz = specfun::dx_raw(cfg.m0, crit.lambda, z)?;
            Ok(dl * lambda_prime + dz * zeta_prime)
        })
        .collect::<Result<_>>()?;
    let s_n = cfg.scale(crit);
    let scale_log_derivative = match cfg.convention {
        AmplitudeConvention::Unnormalized => 0.0,
        AmplitudeConvention::PeakNormalized => {
            // Envelope theorem: the peak moves with ∂λ|P| at the maximiser.
            let pz = crit.peak_zeta;
            if pz >= 1.0 || gp == 0.0 {
                0.0
            } else {
                let sign = crit.legendre(pz).signum();
                sign * specfun::dlambda_raw(cfg.m0, crit.lambda, pz, cfg.steps.h1)? * lambda_prime / crit.peak
            }
        }
    };
    let mut d = Vec::with_capacity(modes.len());
    for b in &modes {
        let pi: Vec<f64> = quad.cos_theta.iter().map(|&z| b.legendre(z)).collect();
        let e = quad.dot(&pi, &dtau_p) / quad.dot(&pi, &pi);
        let mut di = e * cfg.scale(b) / s_n;
        if b.n == cfg.n0 {
            di -= scale_log_derivative;
        }
        d.push(di);
    }
    d.truncate(cfg.terms);
    Ok(PhiDerivative { tau, d, lambda_prime, scale_log_derivative })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sigma1Parts {
    pub sigma1: f64,
    pub a1_term: f64,
    pub phi_term: f64,
    pub u0_term: f64,
}

/// Order-ε growth-rate correction from the solvability condition
/// u*·(A₁,ₙₙu₀ − dₙu₀ − u₀′) / (u*·u₀).
pub fn sigma1(
    p: &BrusselatorParams,
    schedule: &CapSchedule,
    tau: f64,
    crit: &CriticalPair,
    pd: &PhiDerivative,
    qp: &QpCorrection,
    cfg: &ReductionConfig,
) -> Result<Sigma1Parts> {
    let geom = schedule.geometry(tau)?;
    sigma1_with(p, schedule, tau, &cfg.quad(&geom), &geom, crit, pd, qp, cfg)
}

#[allow(clippy::too_many_arguments)]
fn sigma1_with(
    p: &BrusselatorParams,
    schedule: &CapSchedule,
    tau: f64,
    quad: &CapQuadrature,
    geom: &CapGeometry,
    crit: &CriticalPair,
    pd: &PhiDerivative,
    qp: &QpCorrection,
    cfg: &ReductionConfig,
) -> Result<Sigma1Parts> {
    let gp = schedule.gamma_prime(tau);
    let c = geom.cos_theta_max();
    let (mut norm, mut r1, mut r2, mut q) = (0.0, 0.0, 0.0, 0.0);
    for ((&z, &w), _) in quad.cos_theta.iter().zip(&quad.weight).zip(&quad.theta) {
        let pv = crit.basis.legendre(z);
        let p2 = w * pv * pv;
        let k1 = K1Matrix::from_x01(p, qp.x01(z));
        norm += p2;
        r1 += p2 * k1.r1;
        r2 += p2 * k1.r2;
        if gp != 0.0 {
            q += p2 * 2.0 / geom.gamma * (z / c - 1.0);
        }
    }
    let (r1, r2, q) = (r1 / norm, r2 / norm, q / norm);
    let a1: Mat2 = [[r1 - gp * q, r2], [-r1, -r2 - gp * q]];
    let us = crit.u0_star;
    let u0 = crit.u0;
    let pairing = dot(us, u0);
    if pairing.abs() < 1e-14 {
        return Err(Error::Singular("degenerate eigenvector pairing".into()));
    }
    let u0_prime = if gp == 0.0 {
        [0.0, 0.0]
    } else {
        let h = cfg.steps.h2;
        let at = |t: f64| -> Result<Vec2> {
            let l = degree_at(schedule, t, cfg.m0, cfg.n0)?;
            let g = schedule.gamma(t);
            let mu = l * (l + 1.0) * g * g / (geom.radius * geom.radius);
            Ok(p.u0(mu, kinetics::sigma_pair(p, mu)?.sigma_plus))
        };
        let (a, b) = (at(tau + h)?, at(tau - h)?);
        [(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h)]
    };
    let dn = pd.d[cfg.n0 as usize - 1];
    let a1u = kinetics::matvec(&a1, u0);
    let a1_term = dot(us, a1u) / pairing;
    let phi_term = -dn;
    let u0_term = -dot(us, u0_prime) / pairing;
    Ok(Sigma1Parts { sigma1: a1_term + phi_term + u0_term, a1_term, phi_term, u0_term })
}

/// One slaved mode of the quadratic centre-manifold term.
#[derive(Debug, Clone, Serialize)]
pub struct SlavedMode {
    pub basis: ModeBasis,
    /// Projection of B₀(U₀, U₀) onto the mode, along (1, −1).
    pub forcing: f64,
    pub coeff: Vec2,
    pub residual: f64,
}

/// U⁽¹⁾ = Σⱼ u₀ⱼ P₀ⱼ + cos(2m₀φ) Σⱼ u₂ₘ₀ⱼ P₂ₘ₀ⱼ.
#[derive(Debug, Clone, Serialize)]
pub struct QuadraticCM {
    pub zero: Vec<SlavedMode>,
    pub double: Vec<SlavedMode>,
}

impl QuadraticCM {
    pub fn eval(&self, zeta: f64, phi: f64) -> Vec2 {
        let mut out = [0.0, 0.0];
        let m2 = self.double.first().map(|s| s.basis.m).unwrap_or(0) as f64;
        let cphi = (m2 * phi).cos();
        for (set, f) in [(&self.zero, 1.0), (&self.double, cphi)] {
            for s in set.iter() {
                let v = s.basis.legendre(zeta) * f;
                out[0] += s.coeff[0] * v;
                out[1] += s.coeff[1] * v;
            }
        }
        out
    }
}

pub fn quadratic_cm(p: &BrusselatorParams, schedule: &CapSchedule, tau: f64, crit: &CriticalPair, cfg: &ReductionConfig) -> Result<QuadraticCM> {
    let geom = schedule.geometry(tau)?;
    quadratic_cm_with(p, &geom, &cfg.quad(&geom), crit, cfg)
}

fn quadratic_cm_with(
    p: &BrusselatorParams,
    geom: &CapGeometry,
    quad: &CapQuadrature,
    crit: &CriticalPair,
    cfg: &ReductionConfig,
) -> Result<QuadraticCM> {
    let u = crit.u0;
    let beta = p.beta1() * u[0] * u[0] + 2.0 * p.beta2() * u[0] * u[1];
    let p_sq: Vec<f64> = quad
        .cos_theta
        .iter()
        .map(|&z| {
            let v = crit.basis.legendre(z) / crit.scale;
            v * v
        })
        .collect();
    let m0 = crit.basis.m as i64;
    let build = |k: u32| -> Result<Vec<SlavedMode>> {
        let modes = geometry::modes_for_order(k, cfg.terms, geom, quad)?;
        let ki = k as i64;
        let phi_ratio = cos_product_integral(&[ki, m0, m0]) / cos_product_integral(&[ki, ki]);
        modes
            .into_iter()
            .map(|b| {
                let pk: Vec<f64> = quad.cos_theta.iter().map(|&z| b.legendre(z)).collect();
                let forcing = beta * phi_ratio * quad.dot(&pk, &p_sq) / quad.dot(&pk, &pk);
                let a = p.mode_matrix(b.mu);
                let s2 = 2.0 * crit.sigma0;
                let m: Mat2 = [[s2 - a[0][0], -a[0][1]], [-a[1][0], s2 - a[1][1]]];
                let rhs = [forcing, -forcing];
                let coeff = solve2(&m, rhs).map_err(|_| {
                    Error::Singular(format!("2:1 resonance between ({},{}) and the critical mode", b.m, b.n))
                })?;
                let r = kinetics::matvec(&m, coeff);
                let residual = (r[0] - rhs[0]).abs().max((r[1] - rhs[1]).abs());
                Ok(SlavedMode { basis: b, forcing, coeff, residual })
            })
            .collect()
    };
    let zero = build(0)?;
    let double = build(2 * crit.basis.m)?;
    Ok(QuadraticCM { zero, double })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CubicParts {
    pub c0: f64,
    pub quadratic: f64,
    pub cubic: f64,
}

/// C₀ = ⟨U₀*, 2B₀(U₀, U⁽¹⁾) + C₀(U₀, U₀, U₀)⟩.
pub fn cubic_coefficient(p: &BrusselatorParams, schedule: &CapSchedule, tau: f64, crit: &CriticalPair, cm: &QuadraticCM, cfg: &ReductionConfig) -> Result<CubicParts> {
    let geom = schedule.geometry(tau)?;
    Ok(cubic_with(p, &cfg.quad(&geom), crit, cm))
}

fn cubic_with(p: &BrusselatorParams, quad: &CapQuadrature, crit: &CriticalPair, cm: &QuadraticCM) -> CubicParts {
    let m0 = crit.basis.m as i64;
    let u = crit.u0;
    let star = crit.n_star * (crit.u0_star[0] - crit.u0_star[1]);
    let i_two = cos_product_integral(&[m0, m0]);
    let i_three = cos_product_integral(&[m0, m0, 2 * m0]);
    let i_four = cos_product_integral(&[m0, m0, m0, m0]);
    let (b1, b2) = (p.beta1(), p.beta2());
    let (mut quadratic, mut cubic) = (0.0, 0.0);
    for (&z, &w) in quad.cos_theta.iter().zip(&quad.weight) {
        let ph = crit.basis.legendre(z) / crit.scale;
        let mut a = [0.0, 0.0];
        let mut b = [0.0, 0.0];
        for s in &cm.zero {
            let v = s.basis.legendre(z);
            a[0] += s.coeff[0] * v;
            a[1] += s.coeff[1] * v;
        }
        for s in &cm.double {
            let v = s.basis.legendre(z);
            b[0] += s.coeff[0] * v;
            b[1] += s.coeff[1] * v;
        }
        let bil = |x: Vec2| b1 * u[0] * x[0] + b2 * (u[0] * x[1] + u[1] * x[0]);
        quadratic += w * ph * ph * 2.0 * (bil(a) * i_two + bil(b) * i_three);
        cubic += w * ph.powi(4) * p.c * u[0] * u[0] * u[1] * i_four;
    }
    CubicParts { c0: star * (quadratic + cubic), quadratic: star * quadratic, cubic: star * cubic }
}

/// All reduced coefficients at one τ.
#[derive(Debug, Clone, Serialize)]
pub struct CoefficientSample {
    pub tau: f64,
    pub gamma: f64,
    pub sigma0: f64,
    pub sigma1: f64,
    pub c0: f64,
    pub sigma1_parts: Sigma1Parts,
    pub cubic_parts: CubicParts,
}

/// Everything the reduction produces at one τ, for callers that need fields.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub geom: CapGeometry,
    pub crit: CriticalPair,
    pub qp: QpCorrection,
    pub phi_prime: PhiDerivative,
    pub cm: QuadraticCM,
    pub sample: CoefficientSample,
}

pub fn reduce(p: &BrusselatorParams, schedule: &CapSchedule, tau: f64, cfg: &ReductionConfig) -> Result<Reduction> {
    let geom = schedule.geometry(tau)?;
    let quad = cfg.quad(&geom);
    let crit = critical_pair_with(p, schedule, tau, &geom, &quad, cfg)?;
    let gp = schedule.gamma_prime(tau);
    let qp = quasipattern::qp_correction_with(p, &geom, &quad, tau, gp, cfg.qp_terms)?;
    let phi_prime = phi_prime_with(schedule, tau, &geom, &quad, cfg)?;
    let s1 = sigma1_with(p, schedule, tau, &quad, &geom, &crit, &phi_prime, &qp, cfg)?;
    let cm = quadratic_cm_with(p, &geom, &quad, &crit, cfg)?;
    let cubic = cubic_with(p, &quad, &crit, &cm);
    let sample = CoefficientSample {
        tau,
        gamma: geom.gamma,
        sigma0: crit.sigma0,
        sigma1: s1.sigma1,
        c0: cubic.c0,
        sigma1_parts: s1,
        cubic_parts: cubic,
    };
    Ok(Reduction { geom, crit, qp, phi_prime, cm, sample })
}

pub fn coefficients_at(p: &BrusselatorParams, schedule: &CapSchedule, tau: f64, cfg: &ReductionConfig) -> Result<CoefficientSample> {
    Ok(reduce(p, schedule, tau, cfg)?.sample)
}

/// Sampled σ₀, σ₁, C₀ over a τ window with natural-spline interpolants.
#[derive(Debug, Clone, Serialize)]
pub struct NormalFormTable {
    pub schedule: CapSchedule,
    pub samples: Vec<CoefficientSample>,
    #[serde(skip)]
    splines: Option<[CubicSpline; 3]>,
}

pub const DEFAULT_SAMPLES: usize = 36;

pub fn build_table(
    p: &BrusselatorParams,
    schedule: &CapSchedule,
    tau_window: (f64, f64),
    samples: usize,
    cfg: &ReductionConfig,
) -> Result<NormalFormTable> {
    if samples < 4 {
        return Err(Error::Config(format!("need at least 4 samples, got {samples}")));
    }
    if !(tau_window.1 > tau_window.0) {
        return Err(Error::Config(format!("empty tau window {tau_window:?}")));
    }
    let taus: Vec<f64> = (0..samples)
        .map(|i| tau_window.0 + (tau_window.1 - tau_window.0) * i as f64 / (samples - 1) as f64)
        .collect();
    let rows: Vec<CoefficientSample> = taus
        .par_iter()
        .map(|&t| coefficients_at(p, schedule, t, cfg))
        .collect::<Result<_>>()?;
    let table = NormalFormTable::from_samples(*schedule, rows)?;
    table.check_invariants()?;
    Ok(table)
}

impl NormalFormTable {
    pub fn from_samples(schedule: CapSchedule, samples: Vec<CoefficientSample>) -> Result<Self> {
        let t: Vec<f64> = samples.iter().map(|s| s.tau).collect();
        let col = |f: fn(&CoefficientSample) -> f64| samples.iter().map(f).collect::<Vec<_>>();
        let splines = [
            CubicSpline::natural(&t, &col(|s| s.sigma0))?,
            CubicSpline::natural(&t, &col(|s| s.sigma1))?,
            CubicSpline::natural(&t, &col(|s| s.c0))?,
        ];
        Ok(Self { schedule, samples, splines: Some(splines) })
    }

    pub fn check_invariants(&self) -> Result<()> {
        if self.samples.windows(2).any(|w| !(w[1].sigma0 > w[0].sigma0)) {
            return Err(Error::SpectralGap("sigma0 is not strictly increasing over the window".into()));
        }
        if let Some(s) = self.samples.iter().find(|s| !(s.c0 < 0.0)) {
            return Err(Error::SpectralGap(format!("cubic coefficient {} >= 0 at gamma = {}", s.c0, s.gamma)));
        }
        Ok(())
    }

    fn spline(&self, i: usize) -> &CubicSpline {
        &self.splines.as_ref().expect("table splines are built on construction")[i]
    }

    pub fn tau_window(&self) -> (f64, f64) {
        self.spline(0).domain()
    }

    pub fn covers(&self, tau: f64) -> bool {
        let (a, b) = self.tau_window();
        let slack = 1e-12 * (b - a);
        tau >= a - slack && tau <= b + slack
    }

    pub fn sigma0(&self, tau: f64) -> f64 {
        self.spline(0).eval(tau)
    }
    pub fn sigma1(&self, tau: f64) -> f64 {
        self.spline(1).eval(tau)
    }
    pub fn c0(&self, tau: f64) -> f64 {
        self.spline(2).eval(tau)
    }

    /// σ₀ + εσ₁.
    pub fn sigma(&self, tau: f64, epsilon: f64) -> f64 {
        self.sigma0(tau) + epsilon * self.sigma1(tau)
    }

    /// Zero of σ₀ + εσ₁ inside the window, if any.
    pub fn transition_tau(&self, epsilon: f64) -> Option<f64> {
        let (a, b) = self.tau_window();
        let f = |t: f64| self.sigma(t, epsilon);
        let n = 400;
        let mut prev = (a, f(a));
        for i in 1..=n {
            let t = a + (b - a) * i as f64 / n as f64;
            let v = f(t);
            if prev.1.signum() != v.signum() {
                let (mut lo, mut hi) = (prev.0, t);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if f(mid).signum() == prev.1.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                return Some(0.5 * (lo + hi));
            }
            prev = (t, v);
        }
        None
    }
}
