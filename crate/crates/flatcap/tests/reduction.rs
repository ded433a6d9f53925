use std::f64::consts::PI;

use flatcap::geometry::{mode_basis, CapGeometry, CapSchedule};
use flatcap::kinetics::BrusselatorParams;
use flatcap::reduction::{build_table, coefficients_at, reduce, AmplitudeConvention, Reduction, ReductionConfig};
use flatcap::specfun::FdSteps;

fn at(gamma: f64, cfg: &ReductionConfig) -> (BrusselatorParams, CapSchedule, Reduction) {
    let p = BrusselatorParams::default();
    let s = CapSchedule::linear(1.0, 1e-6, 0.51);
    let tau = s.tau_of_gamma(gamma).unwrap();
    let r = reduce(&p, &s, tau, cfg).unwrap();
    (p, s, r)
}

/// Composite Simpson in θ times a uniform rule in φ, with the solid-angle weight.
fn brute_integral(theta_max: f64, f: impl Fn(f64, f64) -> f64) -> f64 {
    let (nt, np) = (2000, 64);
    let h = theta_max / nt as f64;
    let dphi = 2.0 * PI / np as f64;
    let mut total = 0.0;
    for i in 0..=nt {
        let t = i as f64 * h;
        let w = if i == 0 || i == nt { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        let ring: f64 = (0..np).map(|j| f(t, j as f64 * dphi)).sum::<f64>() * dphi;
        total += w * h / 3.0 * ring * t.sin();
    }
    total
}

#[test]
fn adjoint_pairing_is_one() {
    let (_, _, r) = at(0.5, &ReductionConfig::default());
    let c = &r.crit;
    let u = c.u0;
    let us = c.u0_star;
    let v = brute_integral(r.geom.theta_max, |t, ph| {
        let f = c.phi(t.cos(), ph);
        c.n_star * (us[0] * u[0] + us[1] * u[1]) * f * f
    });
    assert!((v - 1.0).abs() < 1e-8, "<U0*, U0> = {v}");
    assert!((c.phi_peak() - 1.0).abs() < 1e-12);
}

#[test]
fn cubic_coefficient_matches_a_direct_surface_integral() {
    for gamma in [0.5, 0.4715] {
        let (p, _, r) = at(gamma, &ReductionConfig::default());
        let c = &r.crit;
        let brute = brute_integral(r.geom.theta_max, |t, ph| {
            let z = t.cos();
            let f = c.phi(z, ph);
            let u0 = [c.u0[0] * f, c.u0[1] * f];
            let u1 = r.cm.eval(z, ph);
            let b = p.b0(u0, u1);
            let cc = p.c0(u0, u0, u0);
            let star = [c.n_star * c.u0_star[0] * f, c.n_star * c.u0_star[1] * f];
            star[0] * (2.0 * b[0] + cc[0]) + star[1] * (2.0 * b[1] + cc[1])
        });
        let c0 = r.sample.c0;
        assert!((c0 - brute).abs() < 1e-6 * brute.abs(), "gamma {gamma}: {c0} vs {brute}");
        assert!(c0 < 0.0);
    }
}

#[test]
fn slaved_modes_follow_from_galerkin_projection() {
    let (p, _, r) = at(0.5, &ReductionConfig::default());
    let c = &r.crit;
    for s in r.cm.zero.iter().chain(&r.cm.double) {
        let k = s.basis.m as f64;
        let mode = |t: f64, ph: f64| (k * ph).cos() * s.basis.legendre(t.cos());
        let num = brute_integral(r.geom.theta_max, |t, ph| {
            let f = c.phi(t.cos(), ph);
            mode(t, ph) * p.b0([c.u0[0] * f, c.u0[1] * f], [c.u0[0] * f, c.u0[1] * f])[0]
        });
        let den = brute_integral(r.geom.theta_max, |t, ph| mode(t, ph).powi(2));
        let forcing = num / den;
        let scale = r.cm.zero[0].forcing.abs();
        assert!((s.forcing - forcing).abs() < 1e-7 * scale, "({},{}): {} vs {forcing}", s.basis.m, s.basis.n, s.forcing);
        // (2σ₀ − K₀ + μD) u = forcing·(1, −1).
        let a = p.mode_matrix(s.basis.mu);
        let s2 = 2.0 * c.sigma0;
        let r0 = (s2 - a[0][0]) * s.coeff[0] - a[0][1] * s.coeff[1];
        let r1 = -a[1][0] * s.coeff[0] + (s2 - a[1][1]) * s.coeff[1];
        assert!((r0 - s.forcing).abs() < 1e-10 * scale && (r1 + s.forcing).abs() < 1e-10 * scale);
    }
}

#[test]
fn quadratic_terms_only_excite_symmetric_harmonics() {
    let (p, _, r) = at(0.5, &ReductionConfig::default());
    assert!(r.cm.zero.iter().all(|s| s.basis.m == 0));
    assert!(r.cm.double.iter().all(|s| s.basis.m == 10));
    // Every other harmonic receives no forcing: B₀(U₀,U₀) ∝ cos²(5φ) has only 0 and 10.
    let c = &r.crit;
    for k in [1.0, 3.0, 5.0, 7.0, 15.0] {
        let v = brute_integral(r.geom.theta_max, |t, ph| {
            let f = c.phi(t.cos(), ph);
            (k * ph).cos() * p.b0([c.u0[0] * f, c.u0[1] * f], [c.u0[0] * f, c.u0[1] * f])[0]
        });
        assert!(v.abs() < 1e-10, "harmonic {k}: {v}");
    }
    // U⁽¹⁾ is invariant under the rotations that fix the critical mode up to sign.
    let rot = 2.0 * PI / 10.0;
    for (z, ph) in [(0.95, 0.2), (0.9, 1.1), (0.88, 2.9)] {
        let a = r.cm.eval(z, ph);
        let b = r.cm.eval(z, ph + rot);
        assert!((a[0] - b[0]).abs() < 1e-12 * a[0].abs().max(1.0));
    }
}

#[test]
fn truncation_change_is_small() {
    let (_, _, five) = at(0.5, &ReductionConfig::default());
    let (_, _, eight) = at(0.5, &ReductionConfig { terms: 8, ..ReductionConfig::default() });
    let rel = (five.sample.c0 - eight.sample.c0).abs() / eight.sample.c0.abs();
    assert!(rel < 0.01, "N = 5 vs 8: {rel}");
    let rel1 = (five.sample.sigma1 - eight.sample.sigma1).abs() / eight.sample.sigma1.abs();
    assert!(rel1 < 0.01, "sigma1: {rel1}");
}

#[test]
fn drift_rate_is_insensitive_to_the_difference_step() {
    let base = ReductionConfig::default();
    let (_, _, a) = at(0.49, &base);
    let (_, _, b) = at(0.49, &ReductionConfig { steps: FdSteps::new(1e-5, 5e-5).unwrap(), ..base });
    let (_, _, c) = at(0.49, &ReductionConfig { steps: FdSteps::new(5e-6, 1e-5).unwrap(), ..base });
    for other in [&b, &c] {
        let rel = (a.sample.sigma1 - other.sample.sigma1).abs() / a.sample.sigma1.abs();
        assert!(rel < 1e-4, "sigma1 {} vs {}", a.sample.sigma1, other.sample.sigma1);
    }
}

#[test]
fn amplitude_convention_rescales_consistently() {
    // x scales with the peak, so C scales with its square.
    let (_, _, peak) = at(0.5, &ReductionConfig::default());
    let (_, _, raw) = at(0.5, &ReductionConfig { convention: AmplitudeConvention::Unnormalized, ..ReductionConfig::default() });
    let s = peak.crit.basis.peak;
    let rel = (raw.sample.c0 - peak.sample.c0 * s * s).abs() / raw.sample.c0.abs();
    assert!(rel < 1e-10, "C0 raw {} peak {} s {s}", raw.sample.c0, peak.sample.c0);
    assert_eq!(raw.sample.sigma0, peak.sample.sigma0);
    // Rescaling Φ by s(τ) shifts the slow rate by (ln s)′, here from a central difference in γ.
    let h = 1e-5;
    let peak_at = |g: f64| mode_basis(5, 1, &CapGeometry::new(1.0, g).unwrap()).unwrap().peak;
    let log_rate = -(peak_at(0.5 + h).ln() - peak_at(0.5 - h).ln()) / (2.0 * h);
    let shift = peak.sample.sigma1 - raw.sample.sigma1;
    assert!((shift - log_rate).abs() < 1e-5 * log_rate.abs(), "shift {shift} vs {log_rate}");
}

#[test]
fn linear_rate_crosses_zero_at_the_critical_curvature() {
    let p = BrusselatorParams::default();
    let s = CapSchedule::linear(1.0, 1e-6, 0.51);
    let cfg = ReductionConfig::default();
    let at_half = coefficients_at(&p, &s, s.tau_of_gamma(0.5).unwrap(), &cfg).unwrap();
    assert!(at_half.sigma0.abs() < 1e-4);
    let before = coefficients_at(&p, &s, s.tau_of_gamma(0.505).unwrap(), &cfg).unwrap();
    let after = coefficients_at(&p, &s, s.tau_of_gamma(0.495).unwrap(), &cfg).unwrap();
    assert!(before.sigma0 < 0.0 && after.sigma0 > 0.0);
}

#[test]
fn table_refinement_changes_little() {
    let p = BrusselatorParams::default();
    let s = CapSchedule::linear(1.0, 1e-6, 0.51);
    let cfg = ReductionConfig::default();
    let win = (0.0, s.tau_of_gamma(0.4515).unwrap());
    let coarse = build_table(&p, &s, win, 36, &cfg).unwrap();
    let fine = build_table(&p, &s, win, 72, &cfg).unwrap();
    let (mut ds, mut dc) = (0.0f64, 0.0f64);
    for k in 0..=500 {
        let t = win.0 + (win.1 - win.0) * k as f64 / 500.0;
        ds = ds.max((coarse.sigma0(t) - fine.sigma0(t)).abs());
        dc = dc.max(((coarse.c0(t) - fine.c0(t)) / fine.c0(t)).abs());
    }
    let sigma_scale = fine.samples.iter().map(|x| x.sigma0.abs()).fold(0.0, f64::max);
    assert!(ds < 1e-6 * sigma_scale.max(1.0) && dc < 1e-6, "sigma0 {ds}, C0 {dc}");
    let tc = coarse.transition_tau(1e-6).unwrap();
    let tf = fine.transition_tau(1e-6).unwrap();
    assert!((tc - tf).abs() < 1e-6);
}

#[test]
fn misconfigured_reductions_are_rejected() {
    let p = BrusselatorParams::default();
    let s = CapSchedule::linear(1.0, 1e-6, 0.51);
    assert!(reduce(&p, &s, 0.0, &ReductionConfig { m0: 0, ..ReductionConfig::default() }).unwrap_err().is_validation());
    assert!(reduce(&p, &s, 0.0, &ReductionConfig { terms: 0, ..ReductionConfig::default() }).unwrap_err().is_validation());
    assert!(build_table(&p, &s, (0.0, 0.01), 3, &ReductionConfig::default()).is_err());
}
