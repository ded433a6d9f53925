//! Ferrers functions P^m_λ(x) of integer order and real degree, with the
//! Condon–Shortley phase, plus degree roots for Dirichlet caps.
//!
//! Small degrees come straight from the hypergeometric series
//! prefactor · ₂F₁(m−λ, λ+m+1; m+1; (1−x)/2). For large degrees that series
//! cancels catastrophically (terms of size 1e30 summing to O(1)), so the
//! value is carried up from the base degrees λ−j and λ−j+1 in [m, m+2) by the
//! three-term degree recurrence, which is stable for |x| < 1.

use serde::Serialize;

use crate::error::{Error, Result};

const SERIES_CAP: usize = 100_000;
const SERIES_RTOL: f64 = 1e-16;
const SCAN_STEP: f64 = 0.25;
const SCAN_LIMIT: f64 = 4000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendreQuery {
    pub m: u32,
    pub lambda: f64,
    pub x: f64,
}

impl LegendreQuery {
    pub fn new(m: u32, lambda: f64, x: f64) -> Result<Self> {
        if !(x > -1.0 && x <= 1.0) {
            return Err(Error::Domain(format!("x = {x} not in (-1, 1]")));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::Domain(format!("degree {lambda} must be >= 0")));
        }
        Ok(Self { m, lambda, x })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DegreeRoot {
    pub m: u32,
    pub n: u32,
    pub gamma: f64,
    pub lambda: f64,
    pub residual: f64,
}

/// Finite-difference steps: `h1` for ∂/∂λ, `h2` for ∂/∂τ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct FdSteps {
    pub h1: f64,
    pub h2: f64,
}

impl FdSteps {
    pub fn new(h1: f64, h2: f64) -> Result<Self> {
        for (name, h) in [("h1", h1), ("h2", h2)] {
            if !(h > 0.0 && h <= 1e-4) {
                return Err(Error::Config(format!("{name} = {h} must lie in (0, 1e-4]")));
            }
        }
        Ok(Self { h1, h2 })
    }
}

impl Default for FdSteps {
    fn default() -> Self {
        Self { h1: 1e-5, h2: 1e-5 }
    }
}

pub fn legendre_p(q: &LegendreQuery) -> Result<f64> {
    ferrers(q.m, q.lambda, q.x)
}

/// P^m_ν(x) for any real ν, using P^m_{−ν−1} = P^m_ν below ν = −1/2.
pub fn ferrers(m: u32, nu: f64, x: f64) -> Result<f64> {
    if !(x > -1.0 && x <= 1.0) {
        return Err(Error::Domain(format!("x = {x} not in (-1, 1]")));
    }
    if !nu.is_finite() {
        return Err(Error::Domain(format!("degree {nu} is not finite")));
    }
    let nu = if nu < -0.5 { -nu - 1.0 } else { nu };
    if x == 1.0 {
        return Ok(if m == 0 { 1.0 } else { 0.0 });
    }
    let mf = m as f64;
    if nu < mf + 2.0 {
        return series(m, nu, x);
    }
    let j = (nu - mf).floor() as usize;
    let base = nu - j as f64;
    let mut p_prev = series(m, base, x)?;
    let mut p = series(m, base + 1.0, x)?;
    let mut v = base + 1.0;
    for _ in 1..j {
        let next = ((2.0 * v + 1.0) * x * p - (v + mf) * p_prev) / (v - mf + 1.0);
        p_prev = p;
        p = next;
        v += 1.0;
    }
    Ok(p)
}

fn series(m: u32, nu: f64, x: f64) -> Result<f64> {
    let mf = m as f64;
    let z = 0.5 * (1.0 - x);
    let (a, b, c) = (mf - nu, nu + mf + 1.0, mf + 1.0);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0usize;
    loop {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        sum += term;
        k += 1;
        if term.abs() <= SERIES_RTOL * sum.abs() || term == 0.0 {
            break;
        }
        if k >= SERIES_CAP {
            return Err(Error::NonConvergence(format!(
                "2F1 series for m={m}, nu={nu}, x={x} after {SERIES_CAP} terms"
            )));
        }
    }
    // Γ(ν+m+1)/Γ(ν−m+1) as a finite product, divided by 2^m m!.
    let mut pref = 1.0;
    for i in 1..=m {
        let i = i as f64;
        pref *= (nu + i) * (nu - i + 1.0) / (2.0 * i);
    }
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * pref * (1.0 - x * x).powf(0.5 * mf) * sum)
}

/// ∂P^m_λ/∂x from (x²−1)P′ = λxP^m_λ − (λ+m)P^m_{λ−1}.
pub fn legendre_dx(q: &LegendreQuery) -> Result<f64> {
    dx_raw(q.m, q.lambda, q.x)
}

pub(crate) fn dx_raw(m: u32, lambda: f64, x: f64) -> Result<f64> {
    if !(x.abs() < 1.0) {
        return Err(Error::Domain(format!("derivative identity needs |x| < 1, got {x}")));
    }
    let p = ferrers(m, lambda, x)?;
    let pm1 = ferrers(m, lambda - 1.0, x)?;
    Ok((lambda * x * p - (lambda + m as f64) * pm1) / (x * x - 1.0))
}

/// Central difference in the degree. Degrees just below zero are fine thanks
/// to the reflection P_{−ν−1} = P_ν, so only λ − h1 > −1 is required.
pub fn legendre_dlambda(q: &LegendreQuery, steps: &FdSteps) -> Result<f64> {
    dlambda_raw(q.m, q.lambda, q.x, steps.h1)
}

pub(crate) fn dlambda_raw(m: u32, lambda: f64, x: f64, h: f64) -> Result<f64> {
    if lambda - h <= -1.0 {
        return Err(Error::Domain(format!("lambda - h1 = {} must exceed -1", lambda - h)));
    }
    let hi = ferrers(m, lambda + h, x)?;
    let lo = ferrers(m, lambda - h, x)?;
    Ok((hi - lo) / (2.0 * h))
}

/// n-th positive degree with P^m_λ(√(1−γ²)) = 0.
pub fn find_degree(m: u32, n: u32, gamma: f64, tol: f64) -> Result<DegreeRoot> {
    if n == 0 {
        return Err(Error::Domain("root index n starts at 1".into()));
    }
    let roots = degree_roots(m, n as usize, gamma, tol)?;
    Ok(roots[n as usize - 1])
}

/// First `count` degree roots in increasing order, from a single scan.
pub fn degree_roots(m: u32, count: usize, gamma: f64, tol: f64) -> Result<Vec<DegreeRoot>> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::Domain(format!("curvature {gamma} not in (0, 1]")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance {tol} must be positive")));
    }
    let x = (1.0 - gamma * gamma).sqrt();
    let f = |l: f64| ferrers(m, l, x);
    let mut roots = Vec::with_capacity(count);
    let mut lo = (m as f64).max(1e-3);
    let mut f_lo = f(lo)?;
    let push = |lambda: f64, roots: &mut Vec<DegreeRoot>| -> Result<()> {
        let residual = f(lambda)?.abs();
        roots.push(DegreeRoot { m, n: roots.len() as u32 + 1, gamma, lambda, residual });
        Ok(())
    };
    while roots.len() < count {
        let hi = lo + SCAN_STEP;
        if hi > SCAN_LIMIT {
            return Err(Error::Bracket(format!(
                "found {} of {count} roots for m={m}, gamma={gamma} below degree {SCAN_LIMIT}",
                roots.len()
            )));
        }
        let f_hi = f(hi)?;
        if f_hi == 0.0 {
            push(hi, &mut roots)?;
            // Step past the exact zero so it is not counted twice.
            lo = hi + 1e-9;
            f_lo = f(lo)?;
            continue;
        }
        if f_lo.signum() != f_hi.signum() {
            let lambda = bisect(&f, lo, hi, f_lo, tol)?;
            push(lambda, &mut roots)?;
        }
        lo = hi;
        f_lo = f_hi;
    }
    Ok(roots)
}

fn bisect(f: &impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, fa: f64, tol: f64) -> Result<f64> {
    let sa = fa.signum();
    // Bisect past `tol` down to machine resolution; it is cheap and keeps the
    // residual of unnormalised functions small.
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == sa {
            a = mid;
        } else {
            b = mid;
        }
        if b - a <= tol * 1e-3 {
            break;
        }
    }
    Ok(0.5 * (a + b))
}
