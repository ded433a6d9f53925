use std::path::Path;

use flatcap::geometry::{dilution_q, mode_basis, zeta_of_w, CapGeometry, CapSchedule, SurfacePoint};
use flatcap::kinetics::{marginal_a_closed, mode_mu, scan_region, sigma_pair};
use flatcap::nf::{integrate_nf, sweep, NfSolveConfig, Trajectory};
use flatcap::quasipattern::qp_correction;
use flatcap::reduction::{build_table, NormalFormTable, ReductionConfig, DEFAULT_SAMPLES};
use flatcap::simulator::{
    convergence_study, run, ConvergenceConfig, InitialCondition, ModeProjector, SimConfig, SimGrid, SurfaceField,
    TrackedModes,
};
use serde_json::{json, Value};

use crate::error::CliError;
use crate::output::{num, Outputs};
use crate::settings::{IcKind, Preset, Resolved};

pub struct Report {
    pub results: Value,
    pub notes: Vec<String>,
}

/// A-window used to decide which marginal curves belong to the region.
const A_WINDOW: (f64, f64) = (76.1, 76.7);

fn gamma_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn reduction_cfg(r: &Resolved) -> ReductionConfig {
    ReductionConfig { terms: r.terms(), ..ReductionConfig::default() }
}

pub fn curves(r: &Resolved, out: &mut Outputs) -> Result<Report, CliError> {
    let p = r.params();
    let (lo, hi) = (r.gamma0().min(r.gamma_end()), r.gamma0().max(r.gamma_end()));
    let samples = r.samples();
    if samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    let modes = match &r.0.modes {
        Some(m) if m.is_empty() => return Err(CliError::Usage("empty mode list".into())),
        Some(m) => m.clone(),
        None => scan_region(&p, A_WINDOW, (lo, hi), 12, 8, samples.max(2))?.iter().map(|h| (h.m, h.n)).collect(),
    };
    let mut notes = Vec::new();
    let mut written = Vec::new();
    for &(m, n) in &modes {
        let mut rows = Vec::new();
        for g in gamma_grid(lo, hi, samples) {
            match mode_mu(m, n, g, r.radius()) {
                Ok(mu) => match marginal_a_closed(mu, &p) {
                    Some(a) => rows.push(vec![num(g), num(mu), num(a)]),
                    None => notes.push(format!("mode ({m},{n}) at gamma {g}: no real marginal A")),
                },
                Err(e) => notes.push(format!("mode ({m},{n}) at gamma {g}: {e}")),
            }
        }
        if rows.is_empty() {
            notes.push(format!("mode ({m},{n}): no curve points"));
            continue;
        }
        out.table(&format!("curve_m{m}_n{n}.csv"), None, &["gamma", "mu", "A"], &rows)?;
        written.push((m, n));
    }
    if written.is_empty() {
        return Err(flatcap::Error::NonConvergence("no marginal curve could be evaluated".into()).into());
    }
    Ok(Report { results: json!({ "modes": written, "a_window": A_WINDOW }), notes })
}

pub fn eigen(r: &Resolved, out: &mut Outputs) -> Result<Report, CliError> {
    let p = r.params();
    let geom = CapGeometry::new(r.radius(), r.gamma0())?;
    let modes = r.0.modes.clone().unwrap_or_default();
    if modes.is_empty() {
        return Err(CliError::Usage("empty mode list".into()));
    }
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for &(m, n) in &modes {
        let b = mode_basis(m, n, &geom)?;
        let (sp, sm) = match sigma_pair(&p, b.mu) {
            Ok(s) => (s.sigma_plus, s.sigma_minus),
            Err(e) => {
                notes.push(format!("mode ({m},{n}): {e}"));
                (f64::NAN, f64::NAN)
            }
        };
        rows.push(vec![
            m.to_string(),
            n.to_string(),
            num(geom.gamma),
            num(b.lambda),
            num(b.mu),
            num(b.norm_sq),
            num(b.peak),
            num(b.peak_zeta),
            num(sp),
            num(sm),
        ]);
        let profile: Vec<Vec<String>> = gamma_grid(0.0, geom.theta_max, 201)
            .into_iter()
            .map(|t| {
                let v = b.legendre(t.cos());
                vec![num(t), num(t.cos()), num(v), num(v / b.peak)]
            })
            .collect();
        out.table(&format!("eigen_m{m}_n{n}.csv"), None, &["theta", "zeta", "legendre", "normalized"], &profile)?;
    }
    out.table(
        "eigen.csv",
        None,
        &["m", "n", "gamma", "lambda", "mu", "norm_sq", "peak", "peak_zeta", "sigma_plus", "sigma_minus"],
        &rows,
    )?;
    Ok(Report { results: json!({ "modes": modes }), notes })
}

pub fn qp(r: &Resolved, out: &mut Outputs) -> Result<Report, CliError> {
    let p = r.params();
    let eps = r.single_epsilon()?;
    let sched = CapSchedule::linear(r.radius(), eps, r.gamma0());
    let geom = sched.geometry(0.0)?;
    let corr = qp_correction(&p, &geom, 0.0, sched.gamma_prime(0.0), r.terms())?;
    let rows: Vec<Vec<String>> = corr
        .expansion
        .modes
        .iter()
        .zip(&corr.expansion.q)
        .zip(corr.coeffs.iter().zip(&corr.residuals))
        .map(|((b, q), (c, res))| vec![b.n.to_string(), num(b.lambda), num(*q), num(c[0]), num(c[1]), num(*res)])
        .collect();
    out.table("qp_coefficients.csv", None, &["n", "lambda", "q", "alpha", "beta", "residual"], &rows)?;
    let mut profile = Vec::new();
    for t in gamma_grid(0.0, geom.theta_max, 201) {
        let z = t.cos();
        let x = corr.x01(z);
        let q = dilution_q(&geom, &SurfacePoint::spherical(t, 0.0))?;
        profile.push(vec![num(t), num(z), num(q), num(corr.expansion.eval(z)), num(x[0]), num(x[1]), num(eps * x[0]), num(eps * x[1])]);
    }
    out.table(
        "qp_profile.csv",
        None,
        &["theta", "zeta", "q", "q_series", "x01_u", "x01_v", "eps_x01_u", "eps_x01_v"],
        &profile,
    )?;
    Ok(Report { results: json!({ "gamma_prime": corr.gamma_prime, "terms": r.terms() }), notes: Vec::new() })
}

fn table_for(r: &Resolved, schedule_eps: f64, samples: usize) -> Result<NormalFormTable, CliError> {
    let sched = CapSchedule::linear(r.radius(), schedule_eps, r.gamma0());
    let tau_end = sched.tau_of_gamma(r.gamma_end())?;
    Ok(build_table(&r.params(), &sched, (0.0, tau_end), samples, &reduction_cfg(r))?)
}

pub fn nfcoef(r: &Resolved, out: &mut Outputs) -> Result<Report, CliError> {
    let table = table_for(r, r.epsilon()[0], r.samples())?;
    let rows: Vec<Vec<String>> = table
        .samples
        .iter()
        .map(|s| vec![num(s.tau), num(s.gamma), num(s.sigma0), num(s.sigma1), num(s.c0)])
        .collect();
    out.table("nf_coefficients.csv", None, &["tau", "gamma", "sigma0", "sigma1", "c0"], &rows)?;
    let onset: Vec<Value> = r
        .epsilon()
        .iter()
        .map(|&e| json!({ "epsilon": e, "gamma": table.transition_tau(e).map(|t| table.schedule.gamma(t)) }))
        .collect();
    Ok(Report { results: json!({ "transition": onset }), notes: Vec::new() })
}

fn trajectory_rows(tr: &Trajectory) -> Vec<Vec<String>> {
    tr.points.iter().map(|p| vec![num(p.t), num(p.tau), num(p.gamma), num(p.x), num(p.x_branch)]).collect()
}

const TRAJ_HEADER: [&str; 5] = ["t", "tau", "gamma", "x", "x_branch"];

pub fn nf(r: &Resolved, out: &mut Outputs) -> Result<Report, CliError> {
    let eps = r.epsilon();
    if eps.is_empty() {
        return Err(CliError::Usage("no epsilon given".into()));
    }
    let base = NfSolveConfig::new(1.0, r.x0(), r.gamma0(), r.gamma_end());
    // Reject bad input before the (slow) coefficient table is built.
    for &e in &eps {
        NfSolveConfig { epsilon: e, ..base.clone() }.validate()?;
    }
    let samples = r.samples();
    let table = table_for(r, eps[0], samples)?;
    let trs = sweep(&table, &base, &eps)?;
    let mut summary = Vec::new();
    for tr in &trs {
        out.table(&format!("nf_eps_{:e}.csv", tr.epsilon), None, &TRAJ_HEADER, &trajectory_rows(tr))?;
        summary.push(json!({
            "epsilon": tr.epsilon,
            "x_end": tr.last().x,
            "departure_gamma_50": tr.departure_gamma(0.5),
            "departure_gamma_10": tr.departure_gamma(0.1),
            "transition_gamma": table.transition_tau(tr.epsilon).map(|t| table.schedule.gamma(t)),
        }));
    }
    let branch: Vec<Vec<String>> = trs[0].points.iter().map(|p| vec![num(p.gamma), num(p.x_branch)]).collect();
    out.table("nf_branch.csv", None, &["gamma", "x_branch"], &branch)?;
    let mut results = json!({ "trajectories": summary });
    if samples != DEFAULT_SAMPLES {
        results["refinement"] = refinement(r, out, &table, &trs, &base, &eps)?;
    }
    Ok(Report { results, notes: Vec::new() })
}

/// Compares a table of `samples` points against the default sampling.
fn refinement(
    r: &Resolved,
    out: &mut Outputs,
    table: &NormalFormTable,
    trs: &[Trajectory],
    base: &NfSolveConfig,
    eps: &[f64],
) -> Result<Value, CliError> {
    let reference = table_for(r, eps[0], DEFAULT_SAMPLES)?;
    let (t0, t1) = table.tau_window();
    let mut coef = Vec::new();
    let (mut ds0, mut ds1, mut dc) = (0.0f64, 0.0f64, 0.0f64);
    for t in gamma_grid(t0, t1, 501) {
        let d = [
            table.sigma0(t) - reference.sigma0(t),
            table.sigma1(t) - reference.sigma1(t),
            (table.c0(t) - reference.c0(t)) / table.c0(t),
        ];
        ds0 = ds0.max(d[0].abs());
        ds1 = ds1.max(d[1].abs());
        dc = dc.max(d[2].abs());
        coef.push(vec![num(t), num(table.schedule.gamma(t)), num(d[0]), num(d[1]), num(d[2])]);
    }
    out.table(
        "nf_refinement_coefficients.csv",
        Some(&format!("{} samples minus {DEFAULT_SAMPLES} samples", table.samples.len())),
        &["tau", "gamma", "d_sigma0", "d_sigma1", "d_c0_rel"],
        &coef,
    )?;
    let coarse = sweep(&reference, base, eps)?;
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for (a, b) in trs.iter().zip(&coarse) {
        let (xa, xb) = (a.last().x, b.last().x);
        let rel = (xa - xb).abs() / xa.abs();
        worst = worst.max(rel);
        rows.push(vec![num(a.epsilon), num(xa), num(xb), num(rel)]);
    }
    out.table("nf_refinement.csv", None, &["epsilon", "x_end", "x_end_reference", "rel_diff"], &rows)?;
    Ok(json!({
        "samples": table.samples.len(),
        "reference_samples": DEFAULT_SAMPLES,
        "max_abs_d_sigma0": ds0,
        "max_abs_d_sigma1": ds1,
        "max_rel_d_c0": dc,
        "max_rel_d_x_end": worst,
    }))
}

fn sim_grid(r: &Resolved) -> Result<SimGrid, CliError> {
    let (nw, nphi) = r.grid();
    Ok(SimGrid::new(nw, nphi)?)
}

fn initial_condition(r: &Resolved) -> InitialCondition {
    match r.ic() {
        IcKind::Eigenmode => InitialCondition::Eigenmode { peak: 0.021 },
        IcKind::Noise => InitialCondition::Noise { amp_u: 0.05, amp_v: 0.005, seed: r.seed() },
        IcKind::Zero => InitialCondition::Zero,
    }
}

fn write_field(out: &mut Outputs, name: &str, s: &SurfaceField) -> Result<(), CliError> {
    let g = s.grid;
    let mut rows = Vec::with_capacity(g.len());
    for i in 0..=g.nw {
        for j in 0..g.nphi {
            let k = g.idx(i, j);
            rows.push(vec![i.to_string(), j.to_string(), num(g.w(i)), num(g.phi(j)), num(s.u[k]), num(s.v[k])]);
        }
    }
    let comment = format!("gamma={} tau={} nw={} nphi={}", num(s.gamma), num(s.tau), g.nw, g.nphi);
    out.table(name, Some(&comment), &["i", "j", "w", "phi", "u", "v"], &rows)
}

/// Reads a field written by `write_field`.
pub fn read_field(path: &Path) -> Result<SurfaceField, CliError> {
    let text = std::fs::read_to_string(path)?;
    let bad = |why: &str| CliError::Usage(format!("{}: {why}", path.display()));
    let first = text.lines().next().ok_or_else(|| bad("empty file"))?;
    let meta = first.strip_prefix("# ").ok_or_else(|| bad("missing '# gamma=... tau=... nw=... nphi=...' line"))?;
    let field = |key: &str| -> Result<&str, CliError> {
        meta.split_whitespace()
            .find_map(|kv| kv.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
            .ok_or_else(|| bad(&format!("header lacks {key}")))
    };
    let parse_f = |s: &str| s.parse::<f64>().map_err(|_| bad("bad number in header"));
    let parse_u = |s: &str| s.parse::<usize>().map_err(|_| bad("bad size in header"));
    let grid = SimGrid::new(parse_u(field("nw")?)?, parse_u(field("nphi")?)?)?;
    let mut s = SurfaceField::zeros(grid, parse_f(field("tau")?)?, parse_f(field("gamma")?)?);
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let mut seen = 0;
    for rec in rd.records() {
        let rec = rec?;
        let get = |k: usize| rec.get(k).ok_or_else(|| bad("short row"));
        let (i, j) = (parse_u(get(0)?)?, parse_u(get(1)?)?);
        if i > grid.nw || j >= grid.nphi {
            return Err(bad("node index outside the grid"));
        }
        let k = grid.idx(i, j);
        s.u[k] = parse_f(get(4)?)?;
        s.v[k] = parse_f(get(5)?)?;
        seen += 1;
    }
    if seen != grid.len() {
        return Err(bad(&format!("expected {} nodes, found {seen}", grid.len())));
    }
    Ok(s)
}

pub fn sim(r: &Resolved, out: &mut Outputs) -> Result<Report, CliError> {
    if r.0.preset == Some(Preset::Fig8) {
        return converge(r, out);
    }
    let eps = r.single_epsilon()?;
    let mut cfg = SimConfig {
        params: r.params(),
        radius: r.radius(),
        grid: sim_grid(r)?,
        dt: r.dt(),
        epsilon: eps,
        gamma_start: r.gamma0(),
        gamma_end: r.gamma_end(),
        duration: r.duration(),
        cadence: r.cadence(),
        ic: initial_condition(r),
        affine_mode: r.affine(),
        snapshot_gammas: r.0.snapshot_gammas.clone().unwrap_or_default(),
        track: r.0.track,
        ..SimConfig::default()
    };
    cfg.reduction.terms = r.terms();
    cfg.validate()?;
    let samples = r.samples().max(1);
    cfg.sample_every = cfg.steps().div_ceil(samples).max(1);
    let res = run(&cfg)?;

    let mut header: Vec<String> = ["t", "tau", "gamma", "x", "a_cos", "a_sin"].iter().map(|s| s.to_string()).collect();
    header.extend(res.tracked_modes.iter().map(|(m, n)| format!("m{m}_n{n}")));
    let rows: Vec<Vec<String>> = res
        .series
        .iter()
        .map(|s| {
            let mut row = vec![num(s.t), num(s.tau), num(s.gamma), num(s.x), num(s.a_cos), num(s.a_sin)];
            row.extend(s.tracked.iter().map(|v| num(*v)));
            row
        })
        .collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    out.table("series.csv", None, &header_refs, &rows)?;
    for (k, snap) in res.snapshots.iter().enumerate() {
        write_field(out, &format!("snapshot_{k:02}.csv"), snap)?;
    }
    write_field(out, "snapshot_final.csv", &res.final_state)?;

    let last = res.series.last().expect("run records a final sample");
    let mut results = json!({ "steps": res.steps, "x_start": res.series[0].x, "x_end": last.x, "gamma_end": last.gamma });
    if cfg.affine_mode {
        results["affine"] = affine_overlay(&cfg, &res.final_state, out)?;
    } else if eps > 0.0 && matches!(cfg.ic, InitialCondition::Eigenmode { .. }) {
        let sched = cfg.schedule();
        let tau_end = sched.tau_of_gamma(cfg.gamma_end)?;
        let table = build_table(&cfg.params, &sched, (0.0, tau_end), DEFAULT_SAMPLES, &ReductionConfig { terms: r.terms(), ..ReductionConfig::default() })?;
        let tr = integrate_nf(&table, &NfSolveConfig::new(eps, res.series[0].x, cfg.gamma_start, cfg.gamma_end))?;
        out.table("nf_reference.csv", None, &TRAJ_HEADER, &trajectory_rows(&tr))?;
        let x_nf = tr.last().x;
        results["normal_form"] = json!({ "x_end": x_nf, "endpoint_rel": (last.x - x_nf).abs() / x_nf });
    }
    if !res.tracked_modes.is_empty() {
        let mut ranked: Vec<((u32, u32), f64)> = res.tracked_modes.iter().copied().zip(last.tracked.iter().copied()).collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
        let rows: Vec<Vec<String>> = ranked.iter().map(|((m, n), a)| vec![m.to_string(), n.to_string(), num(*a)]).collect();
        out.table("tracked_final.csv", None, &["m", "n", "amplitude"], &rows)?;
        results["dominant_mode"] = json!(ranked[0].0);
        if ranked.len() > 1 {
            results["dominance_ratio"] = json!(ranked[0].1 / ranked[1].1);
        }
    }
    Ok(Report { results, notes: Vec::new() })
}

/// Ring-averaged affine run against εX₀₁ from the series.
fn affine_overlay(cfg: &SimConfig, st: &SurfaceField, out: &mut Outputs) -> Result<Value, CliError> {
    let sched = cfg.schedule();
    let geom = sched.geometry(st.tau)?;
    let corr = qp_correction(&cfg.params, &geom, st.tau, sched.gamma_prime(st.tau), cfg.reduction.qp_terms)?;
    let c = geom.cos_theta_max();
    let g = st.grid;
    let eps = cfg.epsilon;
    let mut rows = Vec::new();
    let (mut eu, mut ev, mut su, mut sv) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..g.nw {
        let z = zeta_of_w(c, g.w(i));
        let x = corr.x01(z);
        let (mut u, mut v) = (0.0, 0.0);
        for j in 0..g.nphi {
            let k = g.idx(i, j);
            u += st.u[k];
            v += st.v[k];
            eu = eu.max((st.u[k] - eps * x[0]).abs());
            ev = ev.max((st.v[k] - eps * x[1]).abs());
        }
        su = su.max((eps * x[0]).abs());
        sv = sv.max((eps * x[1]).abs());
        let n = g.nphi as f64;
        rows.push(vec![num(g.w(i)), num(z.acos()), num(z), num(u / n), num(v / n), num(eps * x[0]), num(eps * x[1])]);
    }
    out.table("qp_overlay.csv", None, &["w", "theta", "zeta", "u_sim", "v_sim", "u_series", "v_series"], &rows)?;
    Ok(json!({ "sup_rel_err_u": eu / su, "sup_rel_err_v": ev / sv }))
}

pub fn project(r: &Resolved, input: Option<&Path>, out: &mut Outputs) -> Result<Report, CliError> {
    let p = r.params();
    let state = match input {
        Some(path) => read_field(path)?,
        None => {
            let cfg = SimConfig {
                params: p,
                radius: r.radius(),
                grid: sim_grid(r)?,
                gamma_start: r.gamma0(),
                ic: initial_condition(r),
                ..SimConfig::default()
            };
            cfg.initial_state()?
        }
    };
    // The projection only needs the geometry at the state's curvature.
    let sched = CapSchedule::frozen(r.radius(), state.gamma);
    let proj = ModeProjector::new(&p, &sched, 0.0, state.grid, &ReductionConfig::default())?;
    let [ac, as_] = proj.amplitudes(&state)?;
    let (mm, nn) = r.0.track.unwrap_or((8, 3));
    let tracked = TrackedModes::new(state.grid, &sched.geometry(0.0)?, mm, nn)?;
    let amps = tracked.amplitudes(&state);
    let rows: Vec<Vec<String>> = tracked.modes.iter().zip(&amps).map(|((m, n), a)| vec![m.to_string(), n.to_string(), num(*a)]).collect();
    out.table("projections.csv", Some(&format!("gamma={}", num(state.gamma))), &["m", "n", "amplitude"], &rows)?;
    Ok(Report {
        results: json!({ "gamma": state.gamma, "x": ac.hypot(as_), "a_cos": ac, "a_sin": as_ }),
        notes: Vec::new(),
    })
}

pub fn converge(r: &Resolved, out: &mut Outputs) -> Result<Report, CliError> {
    let (_, nphi) = r.grid();
    let base = SimConfig {
        params: r.params(),
        radius: r.radius(),
        grid: SimGrid::new(r.resolutions().first().copied().unwrap_or(0), nphi)?,
        dt: r.dt(),
        epsilon: r.single_epsilon()?,
        gamma_start: r.gamma0(),
        gamma_end: r.gamma_end(),
        cadence: r.cadence(),
        ..SimConfig::default()
    };
    let rep = convergence_study(&ConvergenceConfig { base, resolutions: r.resolutions(), samples: r.samples() })?;
    let rows: Vec<Vec<String>> = rep
        .rows
        .iter()
        .map(|c| {
            vec![
                c.grid.nw.to_string(),
                c.grid.nphi.to_string(),
                num(c.h),
                num(c.x_start),
                num(c.x_end_sim),
                num(c.x_end_nf),
                num(c.endpoint_rel),
                num(c.err_l2),
                num(c.err_linf),
            ]
        })
        .collect();
    out.table(
        "convergence.csv",
        None,
        &["nw", "nphi", "h", "x_start", "x_end_sim", "x_end_nf", "endpoint_rel", "err_l2", "err_linf"],
        &rows,
    )?;
    let order = vec![
        vec!["l2".to_string(), num(rep.slope_l2)],
        vec!["linf".to_string(), num(rep.slope_linf)],
        vec!["endpoint".to_string(), num(rep.slope_endpoint)],
    ];
    out.table("convergence_order.csv", None, &["norm", "slope"], &order)?;
    let walls: Vec<f64> = rep.rows.iter().map(|c| c.wall_seconds).collect();
    Ok(Report {
        results: json!({
            "slope_l2": rep.slope_l2,
            "slope_linf": rep.slope_linf,
            "slope_endpoint": rep.slope_endpoint,
            "wall_seconds_per_grid": walls,
        }),
        notes: Vec::new(),
    })
}
