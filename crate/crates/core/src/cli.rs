//! Command-line driver.
//!
//! Exit codes: 0 success, 1 verification failure (or a numerical failure),
//! 2 configuration error.

use std::ffi::OsString;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::bound::bound_report;
use crate::config::{parse_external, read_pairs, FieldKind, RunConfig};
use crate::error::{Error, Result};
use crate::expansion::{self, from_solution, hessian_check, remainder, select_coords};
use crate::gap::{critical_coupling, solve_gap, solve_gap_external, GapSolution};
use crate::gaussian::{self, free_bubble, lambda2, pair_factor, pair_quadrature, representatives, stiffness};
use crate::model::{bcs_config, field_norm, nondegeneracy_check, random_config, random_direction, FieldConfig, Lattice};
use crate::potential::{potential_external, potential_full, potential_reduced, propagators, vbcs_sum};

#[derive(Parser, Debug)]
#[command(name = "bcs-landscape", version, about = "Effective potential of the BCS model on a finite lattice")]
struct Cli {
    /// key = value configuration file
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    #[arg(long, global = true, value_name = "N")]
    count: Option<usize>,
    #[arg(long, global = true, value_name = "X")]
    tol: Option<f64>,
    /// CSV table (scalar report goes next to it as .json), or the JSON report
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_name = "MAG[,PHASE]")]
    external: Option<String>,
    #[arg(long, global = true, value_name = "BOOL")]
    include_zero_mode: Option<String>,
    #[arg(long, global = true, value_name = "KEY=START:STOP:STEPS")]
    sweep: Option<String>,
    /// Any configuration key, repeatable
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Format of the report on standard output
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Sizes of the cutoff and transfer sets, critical coupling
    LatticeInfo,
    /// Solve the gap equation (external-field variant with --external)
    Gap,
    /// Evaluate the potential on one configuration by both determinant routes
    Eval,
    /// Check the Hadamard bound chain on seeded random configurations
    VerifyBound,
    /// Expansion coefficients per transfer momentum
    Expand,
    /// Finite-difference Hessian and remainder scaling at the minimum
    HessianCheck,
    /// Gaussian pair factors, Z2, Lambda_2 and eps_int2
    Gaussian,
    /// Sweep one parameter
    Scan,
    /// External-field minimum, zero-mode lift and propagators
    External,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::LatticeInfo => "lattice-info",
            Command::Gap => "gap",
            Command::Eval => "eval",
            Command::VerifyBound => "verify-bound",
            Command::Expand => "expand",
            Command::HessianCheck => "hessian-check",
            Command::Gaussian => "gaussian",
            Command::Scan => "scan",
            Command::External => "external",
        }
    }
}

/// CSV table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: vec![] }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
        w.write_record(&self.header).map_err(|e| Error::Io(e.to_string()))?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Result of one command: scalar report, optional table, pass/fail.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Map<String, Value>,
    pub table: Option<Table>,
    pub ok: bool,
}

/// 17 significant digits.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn fnum(x: f64) -> Value {
    // JSON has no NaN or infinity
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

fn insert(m: &mut Map<String, Value>, k: &str, v: Value) {
    m.insert(k.to_string(), v);
}

fn solve(lat: &Lattice, cfg: &RunConfig) -> Result<GapSolution> {
    if cfg.external.is_zero() {
        solve_gap(lat, cfg.tol)
    } else {
        solve_gap_external(lat, &cfg.external, cfg.tol)
    }
}

fn lattice_report(lat: &Lattice) -> Map<String, Value> {
    let mut m = Map::new();
    insert(&mut m, "n_m", json!(lat.n()));
    insert(&mut m, "n_q", json!(lat.q.len()));
    insert(&mut m, "kappa", fnum(lat.kappa()));
    insert(&mut m, "lambda", fnum(lat.spec.lambda));
    insert(&mut m, "lambda_c", fnum(critical_coupling(lat)));
    m
}

fn cmd_lattice_info(cfg: &RunConfig) -> Result<Outcome> {
    let lat = cfg.lattice()?;
    let mut m = lattice_report(&lat);
    insert(&mut m, "d", json!(lat.spec.d));
    insert(&mut m, "L", fnum(lat.spec.l));
    insert(&mut m, "beta", fnum(lat.spec.beta));
    insert(&mut m, "nu", fnum(lat.spec.nu));
    insert(&mut m, "mu", fnum(lat.spec.mu));
    insert(&mut m, "nondegenerate", json!(nondegeneracy_check(&lat.spec, &lat.q)));
    Ok(Outcome { report: m, table: None, ok: true })
}

fn gap_fields(m: &mut Map<String, Value>, sol: &GapSolution) {
    insert(m, "r0", fnum(sol.r0));
    insert(m, "y0", sol.y0.map_or(Value::Null, fnum));
    insert(m, "delta_sq", fnum(sol.delta_sq));
    insert(m, "residual", fnum(sol.residual));
    insert(m, "v_min_sum", fnum(sol.v_min_sum));
    insert(m, "v_min_cosh", fnum(sol.v_min_cosh));
    insert(m, "trivial", json!(sol.trivial));
    insert(m, "iterations", json!(sol.iterations));
}

fn cmd_gap(cfg: &RunConfig) -> Result<Outcome> {
    let lat = cfg.lattice()?;
    let sol = solve(&lat, cfg)?;
    let mut m = lattice_report(&lat);
    gap_fields(&mut m, &sol);
    let ok = sol.trivial || sol.residual <= cfg.tol;
    Ok(Outcome { report: m, table: None, ok })
}

fn cmd_eval(cfg: &RunConfig) -> Result<Outcome> {
    let lat = cfg.lattice()?;
    let phi = match cfg.field {
        FieldKind::Bcs => bcs_config(&lat, solve_gap(&lat, cfg.tol)?.r0, cfg.theta),
        FieldKind::Random => random_config(&lat, cfg.field_scale, cfg.seed),
        FieldKind::Zero => FieldConfig::zeros(&lat),
    };
    let full = potential_full(&lat, &phi)?;
    let red = potential_reduced(&lat, &phi)?;
    let diff = (full.total.re - red.total.re).abs();
    let mut m = Map::new();
    insert(&mut m, "field", serde_json::to_value(cfg.field).unwrap());
    insert(&mut m, "field_norm", fnum(field_norm(&phi)));
    insert(&mut m, "v_full_re", fnum(full.total.re));
    insert(&mut m, "v_full_im", fnum(full.total.im));
    insert(&mut m, "v_reduced_re", fnum(red.total.re));
    insert(&mut m, "v_reduced_im", fnum(red.total.im));
    insert(&mut m, "route_diff", fnum(diff));
    insert(&mut m, "vbcs_at_norm", fnum(vbcs_sum(&lat, field_norm(&phi).sqrt())));
    insert(&mut m, "principal_branch", json!(full.principal_branch));
    if !cfg.external.is_zero() {
        let u = potential_external(&lat, &phi, &cfg.external)?;
        insert(&mut m, "u_external_re", fnum(u.total.re));
        insert(&mut m, "u_external_im", fnum(u.total.im));
    }
    Ok(Outcome { report: m, table: None, ok: diff <= 1e-10 * (1.0 + full.total.re.abs()) })
}

/// Per-row scale multipliers cycled over the random configurations.
const BOUND_SCALES: [f64; 4] = [0.1, 0.3, 1.0, 3.0];

fn cmd_verify_bound(cfg: &RunConfig) -> Result<Outcome> {
    let lat = cfg.lattice()?;
    let slack = cfg.slack * lat.kappa();
    let mut t = Table::new(&["seed", "scale", "re_v", "rhs26", "vbcs_norm", "argmax_t", "clamped", "chain_ok"]);
    let (mut fails, mut margin_v, mut margin_b) = (0usize, f64::INFINITY, f64::INFINITY);
    let mut row = |label: String, scale: f64, phi: &FieldConfig, t: &mut Table| {
        let r = bound_report(&lat, phi, slack);
        fails += usize::from(!r.chain_ok);
        margin_v = margin_v.min(r.re_v - r.rhs26);
        margin_b = margin_b.min(r.rhs26 - r.vbcs_at_norm);
        t.rows.push(vec![
            label,
            fmt(scale),
            fmt(r.re_v),
            fmt(r.rhs26),
            fmt(r.vbcs_at_norm),
            r.argmax_t.label(lat.spec.d),
            r.clamped.to_string(),
            r.chain_ok.to_string(),
        ]);
        r
    };
    for i in 0..cfg.count {
        let seed = cfg.seed + i as u64;
        let scale = cfg.field_scale * BOUND_SCALES[i % BOUND_SCALES.len()];
        row(seed.to_string(), scale, &random_config(&lat, scale, seed), &mut t);
    }
    let sol = solve_gap(&lat, cfg.tol)?;
    let b = row("bcs".into(), sol.r0, &bcs_config(&lat, sol.r0, cfg.theta), &mut t);
    let triple = (b.re_v - sol.v_min_sum).abs().max((b.rhs26 - sol.v_min_sum).abs()).max((b.vbcs_at_norm - sol.v_min_sum).abs());
    let mut m = lattice_report(&lat);
    insert(&mut m, "configurations", json!(cfg.count + 1));
    insert(&mut m, "failures", json!(fails));
    insert(&mut m, "slack", fnum(slack));
    insert(&mut m, "min_re_v_minus_rhs26", fnum(margin_v));
    insert(&mut m, "min_rhs26_minus_vbcs", fnum(margin_b));
    insert(&mut m, "bcs_triple_spread", fnum(triple));
    let ok = fails == 0 && triple <= slack;
    Ok(Outcome { report: m, table: Some(t), ok })
}

fn cmd_expand(cfg: &RunConfig) -> Result<Outcome> {
    let lat = cfg.lattice()?;
    let sol = solve(&lat, cfg)?;
    let qf = from_solution(&lat, &sol, cfg.theta, &cfg.external)?;
    let mut t = Table::new(&["q", "q0", "q_sq", "alpha", "edge", "alpha_eff", "beta", "gamma", "identity_residual"]);
    let (mut id_max, mut odd, mut even, mut amin) = (0.0f64, 0.0f64, 0.0f64, f64::INFINITY);
    for q in 0..lat.q.len() {
        let mq = lat.q.q[q];
        let res = expansion::identity_residual(&lat, &qf, q);
        let n = lat.q.neg[q];
        id_max = id_max.max(res);
        odd = odd.max((qf.gamma[q] + qf.gamma[n]).abs());
        even = even.max((qf.beta_coef[q] - qf.beta_coef[n]).abs()).max((qf.alpha[q] - qf.alpha[n]).abs());
        amin = amin.min(qf.alpha[q]);
        t.rows.push(vec![
            mq.label(lat.spec.d),
            fmt(mq.k0(lat.spec.beta)),
            fmt(mq.norm_sq(lat.spec.beta, lat.spec.l)),
            fmt(qf.alpha[q]),
            fmt(qf.edge[q]),
            fmt(qf.alpha_eff(q)),
            fmt(qf.beta_coef[q]),
            fmt(qf.gamma[q]),
            fmt(res),
        ]);
    }
    let z = lat.q.zero;
    let mut m = lattice_report(&lat);
    gap_fields(&mut m, &sol);
    insert(&mut m, "theta0", fnum(qf.theta0));
    insert(&mut m, "beta0", fnum(qf.beta0));
    insert(&mut m, "v_min", fnum(qf.v_min));
    insert(&mut m, "shift", fnum(qf.shift));
    insert(&mut m, "max_identity_residual", fnum(id_max));
    insert(&mut m, "max_gamma_odd_violation", fnum(odd));
    insert(&mut m, "max_even_violation", fnum(even));
    insert(&mut m, "min_alpha", fnum(amin));
    let ok = id_max <= 1e-12 && odd <= 1e-12 && even <= 1e-12 && amin >= -1e-12 && qf.alpha[z] == 0.0 && qf.gamma[z] == 0.0;
    Ok(Outcome { report: m, table: Some(t), ok })
}

/// Remainder ratios `R(t)/R(t/2)` at `t = 1e-2 sqrt(kappa)`.
pub fn remainder_ratios(lat: &Lattice, qf: &expansion::QuadraticForm, directions: usize, seed: u64) -> Result<Vec<f64>> {
    let t = 1e-2 * lat.kappa().sqrt();
    (0..directions)
        .map(|i| {
            let xi = random_direction(lat, seed + i as u64);
            Ok(remainder(lat, qf, &xi, t)? / remainder(lat, qf, &xi, 0.5 * t)?)
        })
        .collect()
}

fn cmd_hessian_check(cfg: &RunConfig) -> Result<Outcome> {
    let lat = cfg.lattice()?;
    let sol = solve(&lat, cfg)?;
    let qf = from_solution(&lat, &sol, cfg.theta, &cfg.external)?;
    let coords = select_coords(&lat, cfg.fd_small, cfg.fd_random, cfg.seed);
    let chk = hessian_check(&lat, &qf, &coords, expansion::default_step(&lat, &qf))?;
    let cubic = !sol.trivial;
    let ratios = if cubic { remainder_ratios(&lat, &qf, cfg.directions, cfg.seed)? } else { vec![] };
    let (rmin, rmax) = ratios.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &r| (a.min(r), b.max(r)));
    let external = !cfg.external.is_zero();
    let lift_rel = if external { (chk.lift / chk.shift - 1.0).abs() } else { f64::NAN };
    let mut m = lattice_report(&lat);
    gap_fields(&mut m, &sol);
    insert(&mut m, "coords", json!(chk.coords));
    insert(&mut m, "step", fnum(chk.step));
    insert(&mut m, "rel_err_re", fnum(chk.rel_err_re));
    insert(&mut m, "rel_err_im", fnum(chk.rel_err_im));
    insert(&mut m, "zero_mode", fnum(chk.zero_mode));
    insert(&mut m, "lift", fnum(chk.lift));
    insert(&mut m, "shift", fnum(chk.shift));
    insert(&mut m, "lift_rel_err", fnum(lift_rel));
    insert(&mut m, "directions", json!(ratios.len()));
    insert(&mut m, "remainder_ratio_min", fnum(rmin));
    insert(&mut m, "remainder_ratio_max", fnum(rmax));
    let mut ok = chk.rel_err_re <= 1e-4 && chk.rel_err_im <= 1e-4;
    if external {
        ok &= lift_rel <= 1e-4;
    } else if !sol.trivial {
        ok &= chk.zero_mode <= 1e-6;
    }
    if cubic && !ratios.is_empty() {
        ok &= rmin >= 6.0 && rmax <= 10.0;
    }
    Ok(Outcome { report: m, table: None, ok })
}

/// Oracle spot checks on this many of the smallest representatives.
const ORACLE_SPOTS: usize = 3;

fn cmd_gaussian(cfg: &RunConfig) -> Result<Outcome> {
    let lat = cfg.lattice()?;
    if lat.spec.lambda == 0.0 {
        return Err(Error::Invalid("lambda = 0: Lambda_2 is undefined, use the free bubble".into()));
    }
    let sol = solve(&lat, cfg)?;
    let qf = from_solution(&lat, &sol, cfg.theta, &cfg.external)?;
    let rep = gaussian::report(&lat, &qf, cfg.include_zero_mode)?;
    let mut t = Table::new(&["q", "lambda2_re", "lambda2_im", "pair_factor", "bubble_re", "bubble_im"]);
    for q in 0..lat.q.len() {
        if q == lat.q.zero {
            continue;
        }
        let l2 = lambda2(&lat, &qf, q)?;
        let b = free_bubble(&lat, q);
        t.rows.push(vec![lat.q.q[q].label(lat.spec.d), fmt(l2.re), fmt(l2.im), fmt(pair_factor(&qf, q)?), fmt(b.re), fmt(b.im)]);
    }
    let (b, l) = (lat.spec.beta, lat.spec.l);
    let mut reps = representatives(&lat);
    reps.sort_by(|&i, &j| lat.q.q[i].norm_sq(b, l).partial_cmp(&lat.q.q[j].norm_sq(b, l)).unwrap().then(i.cmp(&j)));
    let mut oracle = 0.0f64;
    for &q in reps.iter().take(ORACLE_SPOTS) {
        let pq = pair_quadrature(stiffness(&qf, q), qf.beta_coef[q], qf.gamma[q], qf.pair_phase(), 1e-9)?;
        let pf = pair_factor(&qf, q)?;
        oracle = oracle.max((pq.value.re - pf).abs() / pf);
    }
    let qmin = lat.q_min().ok_or_else(|| Error::Invalid("no nonzero transfer".into()))?;
    let mut m = lattice_report(&lat);
    gap_fields(&mut m, &sol);
    insert(&mut m, "z2", fnum(rep.z2));
    insert(&mut m, "log_z2", fnum(rep.log_z2));
    insert(&mut m, "log_z2_beta0_sq", fnum(rep.log_z2_beta0_sq));
    insert(&mut m, "eps_int2", fnum(rep.eps_int2));
    insert(&mut m, "eps_int2_imag_residue", fnum(rep.eps_int2_imag_residue));
    insert(&mut m, "lambda2_zero", rep.lambda2_zero.map_or(Value::Null, fnum));
    insert(&mut m, "q0_zero_handling", serde_json::to_value(rep.q0_zero_handling).unwrap());
    insert(&mut m, "q_min", json!(lat.q.q[qmin].label(lat.spec.d)));
    insert(&mut m, "lambda2_qmin_abs", fnum(lambda2(&lat, &qf, qmin)?.norm()));
    insert(&mut m, "oracle_max_rel_err", fnum(oracle));
    let ok = rep.eps_int2_imag_residue <= 1e-10 && oracle <= 1e-6;
    Ok(Outcome { report: m, table: Some(t), ok })
}

fn scan_point(cfg: &RunConfig) -> Result<Vec<f64>> {
    let lat = cfg.lattice()?;
    let sol = solve_gap(&lat, cfg.tol)?;
    let gauss = || -> Result<(f64, f64)> {
        let qf = expansion::coefficients(&lat, sol.r0, cfg.theta);
        let qmin = lat.q_min().ok_or_else(|| Error::Invalid("no nonzero transfer".into()))?;
        Ok((lambda2(&lat, &qf, qmin)?.norm(), gaussian::eps_int2(&lat, &qf, cfg.include_zero_mode)?.value))
    };
    let (l2, eps) = gauss().unwrap_or((f64::NAN, f64::NAN));
    Ok(vec![
        lat.spec.lambda,
        critical_coupling(&lat),
        lat.n() as f64,
        lat.q.len() as f64,
        sol.r0,
        sol.delta_sq,
        sol.v_min_sum,
        l2,
        eps,
    ])
}

fn cmd_scan(cfg: &RunConfig) -> Result<Outcome> {
    let sweep = cfg.sweep.clone().ok_or_else(|| Error::Config("scan needs --sweep KEY=START:STOP:STEPS".into()))?;
    let grid = sweep.grid();
    if grid.is_empty() {
        return Err(Error::Config("sweep: empty grid".into()));
    }
    let mut t = Table::new(&[&sweep.key, "lambda", "lambda_c", "n_m", "n_q", "r0", "delta_sq", "v_min", "lambda2_qmin_abs", "eps_int2"]);
    let mut r0s = Vec::new();
    for v in grid {
        let row = scan_point(&cfg.with_value(&sweep.key, v)?)?;
        r0s.push(row[4]);
        let mut cells = vec![fmt(v)];
        for (i, x) in row.iter().enumerate() {
            cells.push(if i == 2 || i == 3 { format!("{}", *x as usize) } else { fmt(*x) });
        }
        t.rows.push(cells);
    }
    let mut m = Map::new();
    insert(&mut m, "key", json!(sweep.key));
    insert(&mut m, "points", json!(t.rows.len()));
    insert(&mut m, "r0_nondecreasing", json!(r0s.windows(2).all(|w| w[1] >= w[0])));
    Ok(Outcome { report: m, table: Some(t), ok: true })
}

fn cmd_external(cfg: &RunConfig) -> Result<Outcome> {
    if cfg.external.is_zero() {
        return Err(Error::Config("external needs --external MAG[,PHASE] with MAG > 0".into()));
    }
    let lat = cfg.lattice()?;
    let r = cfg.external;
    let sol = solve_gap_external(&lat, &r, cfg.tol)?;
    let free = solve_gap(&lat, cfg.tol)?;
    let qf = from_solution(&lat, &sol, cfg.theta, &r)?;
    let z = lat.q.zero;
    let chk = hessian_check(&lat, &qf, &[2 * z, 2 * z + 1], expansion::default_step(&lat, &qf))?;
    let lift_rel = (chk.lift / chk.shift - 1.0).abs();
    let props = propagators(&lat, &qf.minimum(&lat), &r)?;
    let k = (0..lat.n()).min_by(|&i, &j| lat.m.abs_a_sq(i).partial_cmp(&lat.m.abs_a_sq(j)).unwrap().then(i.cmp(&j))).unwrap();
    let lam = lat.spec.lambda;
    let mut m = lattice_report(&lat);
    gap_fields(&mut m, &sol);
    insert(&mut m, "r_magnitude", fnum(r.magnitude));
    insert(&mut m, "r_phase", fnum(r.phase));
    insert(&mut m, "r0_zero_field", fnum(free.r0));
    insert(&mut m, "gap_shift", fnum((lam * sol.r0 * sol.r0 - lam * free.r0 * free.r0).abs()));
    insert(&mut m, "shift", fnum(chk.shift));
    insert(&mut m, "lift", fnum(chk.lift));
    insert(&mut m, "lift_rel_err", fnum(lift_rel));
    insert(&mut m, "propagator_k", json!(lat.m.momenta[k].label(lat.spec.d)));
    let c = |m: &mut Map<String, Value>, name: &str, z: Complex64| {
        insert(m, &format!("{name}_re"), fnum(z.re));
        insert(m, &format!("{name}_im"), fnum(z.im));
    };
    c(&mut m, "propagator_f", props[k].f);
    c(&mut m, "propagator_g", props[k].g);
    Ok(Outcome { report: m, table: None, ok: lift_rel <= 1e-4 })
}

fn build_config(cli: &Cli) -> Result<RunConfig> {
    let mut pairs = match &cli.config {
        Some(p) => read_pairs(p)?,
        None => vec![],
    };
    let mut push = |k: &str, v: String| pairs.push((k.to_string(), v));
    if let Some(x) = cli.seed {
        push("seed", x.to_string());
    }
    if let Some(x) = cli.count {
        push("count", x.to_string());
    }
    if let Some(x) = cli.tol {
        push("tol", x.to_string());
    }
    if let Some(x) = &cli.output {
        push("output", x.display().to_string());
    }
    if let Some(x) = &cli.external {
        parse_external(x)?;
        push("external", x.clone());
    }
    if let Some(x) = &cli.include_zero_mode {
        push("include_zero_mode", x.clone());
    }
    if let Some(x) = &cli.sweep {
        push("sweep", x.clone());
    }
    for s in &cli.set {
        let (k, v) = s.split_once('=').ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got '{s}'")))?;
        push(k.trim(), v.trim().to_string());
    }
    RunConfig::from_pairs(&pairs)
}

/// Runs one subcommand on a resolved configuration.
pub fn run_command(name: &str, cfg: &RunConfig) -> Result<Outcome> {
    match name {
        "lattice-info" => cmd_lattice_info(cfg),
        "gap" => cmd_gap(cfg),
        "eval" => cmd_eval(cfg),
        "verify-bound" => cmd_verify_bound(cfg),
        "expand" => cmd_expand(cfg),
        "hessian-check" => cmd_hessian_check(cfg),
        "gaussian" => cmd_gaussian(cfg),
        "scan" => cmd_scan(cfg),
        "external" => cmd_external(cfg),
        _ => Err(Error::Config(format!("unknown command '{name}'"))),
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidSpec(_) | Error::EmptyCutoffSet | Error::Invalid(_) | Error::Io(_) => 2,
        Error::Singular | Error::NoConvergence { .. } | Error::FlatMode(_) => 1,
    }
}

fn render_text(name: &str, o: &Outcome) -> String {
    let mut s = format!("{name}: {}\n", if o.ok { "ok" } else { "FAILED" });
    for (k, v) in &o.report {
        let v = match v {
            Value::String(x) => x.clone(),
            other => other.to_string(),
        };
        s.push_str(&format!("  {k} = {v}\n"));
    }
    if let Some(t) = &o.table {
        s.push_str(&format!("  rows = {}\n", t.rows.len()));
    }
    s
}

fn write_outputs(path: &Path, name: &str, o: &Outcome) -> Result<()> {
    let mut doc = o.report.clone();
    insert(&mut doc, "command", json!(name));
    insert(&mut doc, "ok", json!(o.ok));
    let text = serde_json::to_string_pretty(&Value::Object(doc)).unwrap() + "\n";
    match &o.table {
        Some(t) => {
            t.write_csv(path)?;
            File::create(path.with_extension("json"))?.write_all(text.as_bytes())?;
        }
        None => File::create(path)?.write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let name = cli.command.name();
    let outcome = match run_command(name, &cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    match cli.format {
        Format::Text => print!("{}", render_text(name, &outcome)),
        Format::Json => {
            let mut doc = outcome.report.clone();
            insert(&mut doc, "command", json!(name));
            insert(&mut doc, "ok", json!(outcome.ok));
            println!("{}", serde_json::to_string_pretty(&Value::Object(doc)).unwrap());
        }
    }
    if let Some(p) = &cfg.output {
        if let Err(e) = write_outputs(p, name, &outcome) {
            eprintln!("error: {e}");
            return 2;
        }
    }
    if outcome.ok {
        0
    } else {
        1
    }
}
