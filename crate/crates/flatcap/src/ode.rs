//! Adaptive Dormand–Prince 5(4) for scalar ODEs with dense output.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rel: 1e-9, abs: 1e-12 }
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// Continuous extension coefficients (Hairer, Nørsett & Wanner).
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Integrates y′ = f(t, y) from t0 to t1 (t1 > t0), reporting y at each
/// requested output time (ascending, inside [t0, t1]). `guard` may abort the
/// integration by returning an error for a state.
pub fn dopri5(
    f: impl Fn(f64, f64) -> f64,
    t0: f64,
    y0: f64,
    t1: f64,
    outputs: &[f64],
    tol: Tolerances,
    guard: impl Fn(f64, f64) -> Result<()>,
) -> Result<Vec<(f64, f64)>> {
    if !(t1 > t0) {
        return Err(Error::Config(format!("integration interval [{t0}, {t1}] is empty")));
    }
    let mut out = Vec::with_capacity(outputs.len());
    let mut next_out = 0;
    while next_out < outputs.len() && outputs[next_out] <= t0 {
        if outputs[next_out] == t0 {
            out.push((t0, y0));
        }
        next_out += 1;
    }
    let span = t1 - t0;
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, y);
    let mut h = initial_step(&f, t, y, k1, span, tol);
    let min_step = 1e-14 * span.max(t.abs());
    let mut k = [0.0; 7];
    let mut accepted_factor_cap = 10.0;
    while t < t1 {
        if t + h > t1 {
            h = t1 - t;
        }
        if h < min_step {
            return Err(Error::Integration(format!("step size underflow at t = {t}")));
        }
        k[0] = k1;
        for s in 1..7 {
            let mut acc = y;
            for j in 0..s {
                acc += h * A[s][j] * k[j];
            }
            k[s] = f(t + C[s] * h, acc);
        }
        let mut y_new = y;
        for j in 0..6 {
            y_new += h * A[6][j] * k[j];
        }
        let err_est: f64 = h * E.iter().zip(&k).map(|(e, kk)| e * kk).sum::<f64>();
        let sc = tol.abs + tol.rel * y.abs().max(y_new.abs());
        let err = (err_est / sc).abs();
        if err <= 1.0 && y_new.is_finite() {
            let t_new = t + h;
            while next_out < outputs.len() && outputs[next_out] <= t_new {
                let s = (outputs[next_out] - t) / h;
                out.push((outputs[next_out], dense(y, y_new, h, &k, s)));
                next_out += 1;
            }
            t = t_new;
            y = y_new;
            k1 = k[6];
            guard(t, y)?;
            let fac = if err == 0.0 { accepted_factor_cap } else { (0.9 * err.powf(-0.2)).min(accepted_factor_cap) };
            h *= fac.max(0.2);
            accepted_factor_cap = 10.0;
        } else {
            let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).max(0.1) } else { 0.1 };
            h *= fac.min(0.9);
            accepted_factor_cap = 1.0;
        }
    }
    Ok(out)
}

fn dense(y0: f64, y1: f64, h: f64, k: &[f64; 7], s: f64) -> f64 {
    let r2 = y1 - y0;
    let r3 = h * k[0] - r2;
    let r4 = r2 - h * k[6] - r3;
    let r5 = h * D.iter().zip(k).map(|(d, kk)| d * kk).sum::<f64>();
    let s1 = 1.0 - s;
    y0 + s * (r2 + s1 * (r3 + s * (r4 + s1 * r5)))
}

fn initial_step(f: &impl Fn(f64, f64) -> f64, t: f64, y: f64, dy: f64, span: f64, tol: Tolerances) -> f64 {
    let sc = tol.abs + tol.rel * y.abs();
    let d0 = y.abs() / sc;
    let d1 = dy.abs() / sc;
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1 = y + h0 * dy;
    let d2 = (f(t + h0, y1) - dy).abs() / sc / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1).min(span)
}
