//! Experiment orchestration: build, solve, measure, write.

use crate::config::{load, ExperimentConfig, LoadedConfig};
use crate::error::{CliError, CliResult};
use crate::manifest::{sha256_hex, Claim, Manifest, MANIFEST_FILE};
use adsmax_core::diagnostics::{
    conformal_gap, principal_curvature, ray_sweep, EntropyRequest, RaySweep, SweepOptions,
};
use adsmax_core::entropy::{build_orbit_graph, EntropyEstimate};
use adsmax_core::field::fmt17;
use adsmax_core::laplace::{assemble_operators, LaplaceOperator};
use adsmax_core::qdiff::{flat_area, holomorphicity_residual, synth_with_operator};
use adsmax_core::solver::{residual_field, GaussProblem, InitialGuess, SolveOptions};
use adsmax_core::spectrum::{holder_estimate, FuchsianRep, HolderReport};
use adsmax_core::surface::{build_surface, validate_surface, DiscreteSurface, SurfaceKind};
use adsmax_core::ScalarField;
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt::Write;
use std::path::{Path, PathBuf};

pub const DEFAULT_OUTPUT_DIR: &str = "adsmax-output";
pub const THREADS_ENV: &str = "ADSMAX_THREADS";

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub deterministic: bool,
    pub out: Option<PathBuf>,
}

pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub manifest: Manifest,
}

/// Thread count: 1 when deterministic, else `ADSMAX_THREADS` or all cores.
pub fn thread_count(deterministic: bool) -> CliResult<usize> {
    if deterministic {
        return Ok(1);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

pub fn with_pool<T: Send>(deterministic: bool, f: impl FnOnce(usize) -> T + Send) -> CliResult<T> {
    let threads = thread_count(deterministic)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| f(threads)))
}

/// Files of one run, written together at the end.
#[derive(Default)]
struct Outputs {
    files: BTreeMap<String, Vec<u8>>,
}

impl Outputs {
    fn text(&mut self, name: impl Into<String>, s: String) {
        self.files.insert(name.into(), s.into_bytes());
    }

    fn json<T: Serialize>(&mut self, name: impl Into<String>, v: &T) -> CliResult<()> {
        let mut s = serde_json::to_string_pretty(v)?;
        s.push('\n');
        self.text(name, s);
        Ok(())
    }
}

#[derive(Serialize)]
struct SolveSummary {
    t: f64,
    residual_norm: f64,
    iterations: usize,
    bracket_low_ok: bool,
    bracket_high_ok: bool,
    bracket_high: f64,
    low_margin: Option<f64>,
    high_margin: f64,
    restarted: bool,
    max_abs_u: f64,
}

#[derive(Serialize)]
struct EntropySummary {
    t: f64,
    #[serde(rename = "E_hat")]
    e_hat: f64,
    window: (f64, f64),
    frontier_radius: f64,
    fit_residual: f64,
    count_at_r_max: usize,
    increments_in_window: usize,
    #[serde(rename = "LHdim_upper_bound")]
    lhdim_upper_bound: f64,
}

impl EntropySummary {
    fn new(t: f64, e: &EntropyEstimate) -> Self {
        Self {
            t,
            e_hat: e.e_hat,
            window: e.window,
            frontier_radius: e.frontier_radius,
            fit_residual: e.fit_residual,
            count_at_r_max: e.count_at_r_max,
            increments_in_window: e.increments_in_window,
            lhdim_upper_bound: e.lhdim_upper_bound,
        }
    }
}

#[derive(Serialize)]
struct EntropyFile {
    word_radius: usize,
    copies: usize,
    nodes: usize,
    edges: usize,
    estimates: Vec<EntropySummary>,
}

#[derive(Serialize)]
struct SpectrumSummary {
    alpha_hat: f64,
    witness_word: String,
    max_word_length: usize,
    classes: usize,
    max_beta_identity_defect: f64,
    history_nonincreasing: bool,
    monotone_history: Vec<(usize, f64)>,
    relation_residual_l: f64,
    relation_residual_r: f64,
}

fn t_label(t: f64) -> String {
    format!("{t}")
}

pub fn build_configured_surface(cfg: &ExperimentConfig) -> CliResult<Option<DiscreteSurface>> {
    cfg.surface
        .as_ref()
        .map(|s| build_surface(s.kind, s.subdivision).map_err(CliError::module("surface")))
        .transpose()
}

/// Load, validate and run a config file.
pub fn run(config_path: &Path, opts: &RunOptions) -> CliResult<RunOutcome> {
    let loaded = load(config_path)?;
    if let (Some(s), Some(r)) = (&loaded.config.surface, &loaded.config.ray) {
        if s.kind == SurfaceKind::TorusValidation && r.t_values.contains(&0.0) {
            return Err(CliError::Config(
                "the flat torus has no solution at t = 0; use positive t values".into(),
            ));
        }
    }
    let out_dir = opts
        .out
        .clone()
        .or_else(|| loaded.config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    let (outputs, mut manifest) = with_pool(opts.deterministic, |threads| execute(&loaded, opts, threads))??;

    std::fs::create_dir_all(&out_dir).map_err(CliError::io(&out_dir))?;
    for (name, bytes) in &outputs.files {
        let p = out_dir.join(name);
        std::fs::write(&p, bytes).map_err(CliError::io(&p))?;
        manifest.files.insert(name.clone(), sha256_hex(bytes));
    }
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    let p = out_dir.join(MANIFEST_FILE);
    std::fs::write(&p, text).map_err(CliError::io(&p))?;
    Ok(RunOutcome { out_dir, manifest })
}

fn execute(loaded: &LoadedConfig, opts: &RunOptions, threads: usize) -> CliResult<(Outputs, Manifest)> {
    let cfg = &loaded.config;
    let mut out = Outputs::default();
    let mut claims = Vec::new();
    let mut notes = Vec::new();

    let surface = build_configured_surface(cfg)?;
    if let Some(s) = &surface {
        let report = validate_surface(s);
        for c in &report.checks {
            claims.push(Claim::new(
                &format!("surface {}", c.name),
                "discrete surface invariant",
                c.measured,
                c.tolerance,
                c.pass,
            ));
        }
        out.json("surface.json", &s.export())?;
        out.json("surface_validation.json", &report)?;
        if s.kind == SurfaceKind::TorusValidation {
            notes.push(
                "flat torus validation mode: a solver test harness outside the genus >= 2 setting; \
                 curvature and monotonicity claims do not apply"
                    .into(),
            );
        }
    }

    if let Some(s) = &surface {
        if cfg.ray.is_some() || cfg.entropy.is_some() {
            let op = assemble_operators(s).map_err(CliError::module("surface"))?;
            run_surface_pipeline(cfg, s, &op, &mut out, &mut claims, &mut notes)?;
        }
    }

    if let Some(sp) = &cfg.spectrum {
        let read = |p: &Path| {
            let full = loaded.base_dir.join(p);
            FuchsianRep::from_file(&full).map_err(|e| CliError::Config(format!("{}: {e}", full.display())))
        };
        let (rep_l, rep_r) = (read(&sp.rep_l_path)?, read(&sp.rep_r_path)?);
        let report = holder_estimate(&rep_l, &rep_r, sp.max_word_length).map_err(CliError::module("spectrum"))?;
        spectrum_outputs(&report, &rep_l, &rep_r, &mut out, &mut claims)?;
    }

    let all_pass = claims.iter().all(|c| c.pass);
    let manifest = Manifest {
        tool: "adsmax".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_file: loaded.file_name.clone(),
        config_sha256: sha256_hex(&loaded.bytes),
        deterministic: opts.deterministic,
        threads,
        notes,
        claims,
        all_pass,
        files: BTreeMap::new(),
    };
    Ok((out, manifest))
}

fn run_surface_pipeline(
    cfg: &ExperimentConfig,
    s: &DiscreteSurface,
    op: &LaplaceOperator,
    out: &mut Outputs,
    claims: &mut Vec<Claim>,
    notes: &mut Vec<String>,
) -> CliResult<()> {
    let spec = cfg.qdiff_spec(s)?;
    let zeros = spec.zero_vertices();
    let q = synth_with_operator(s, op, &spec).map_err(CliError::module("qdiff"))?;
    out.text("rho.csv", q.rho.to_csv());
    let exclusion = cfg.ray.as_ref().map_or(0.3, |r| r.exclusion_radius);
    let area = flat_area(op, &q.rho.values);
    claims.push(Claim::new(
        "flat area normalization",
        "quadratic differential normalized to unit flat area",
        area,
        1e-10,
        (area - 1.0).abs() <= 1e-10,
    ));
    let holo = holomorphicity_residual(s, op, &q.rho, &zeros, exclusion).map_err(CliError::module("qdiff"))?;
    claims.push(Claim::new(
        "flat metric off the zeros",
        "norm of a holomorphic quadratic differential is flat away from its zeros",
        holo,
        1e-8,
        holo <= 1e-8,
    ));

    let graph = match &cfg.entropy {
        Some(e) => Some(
            build_orbit_graph(s, &vec![0.0; s.vertex_count()], e.word_radius).map_err(CliError::module("entropy"))?,
        ),
        None => None,
    };
    let window = cfg.entropy.as_ref().map(|e| e.window.spec()).unwrap_or_default();

    let mut estimates: Vec<(f64, EntropyEstimate)> = Vec::new();
    if let Some(ray) = &cfg.ray {
        let opts = SweepOptions {
            solve: SolveOptions {
                tolerance: cfg.solver.tolerance,
                max_iterations: cfg.solver.max_iterations,
                initial: InitialGuess::Zero,
            },
            exclusion_radius: ray.exclusion_radius,
            width: cfg.width,
            ..SweepOptions::default()
        };
        let request = graph.as_ref().map(|g| EntropyRequest { graph: g, window });
        let sweep = ray_sweep(s, op, &q.rho, &zeros, &ray.t_values, &opts, request).map_err(CliError::module("solver"))?;
        ray_outputs(s, op, &q.rho, &sweep, out)?;
        ray_claims(&q.rho, &sweep, cfg.solver.tolerance, claims);
        notes.push(sweep.report.width_note.clone());
        for (r, e) in sweep.report.records.iter().zip(&sweep.report.entropy) {
            if let Some(e) = e {
                estimates.push((r.t, e.clone()));
            }
        }
    } else if let Some(g) = &graph {
        let e = g
            .estimate_for(&vec![0.0; s.vertex_count()], window)
            .map_err(CliError::module("entropy"))?;
        estimates.push((0.0, e));
    }

    if let (Some(g), Some(ecfg)) = (&graph, &cfg.entropy) {
        for (t, e) in &estimates {
            out.text(format!("entropy_counts_t{}.csv", t_label(*t)), e.counts_csv());
        }
        out.json(
            "entropy.json",
            &EntropyFile {
                word_radius: ecfg.word_radius,
                copies: g.copies.len(),
                nodes: g.node_count,
                edges: g.edge_count(),
                estimates: estimates.iter().map(|(t, e)| EntropySummary::new(*t, e)).collect(),
            },
        )?;
        entropy_claims(s, &estimates, claims);
    }
    Ok(())
}

fn ray_outputs(
    s: &DiscreteSurface,
    op: &LaplaceOperator,
    rho: &ScalarField,
    sweep: &RaySweep,
    out: &mut Outputs,
) -> CliResult<()> {
    out.text("ray.csv", sweep.report.to_csv());
    out.json("ray.json", &sweep.report)?;
    let mut summaries = Vec::new();
    for sol in &sweep.solutions {
        let problem = GaussProblem {
            op,
            curvature: &s.curvature,
            rho: &rho.values,
            t: sol.t,
        };
        let res = residual_field(problem, &sol.u).map_err(CliError::module("solver"))?;
        let lam = principal_curvature(rho, sol.t, &sol.u).map_err(CliError::module("diagnostics"))?;
        let phi = if sol.t > 0.0 {
            Some(conformal_gap(rho, sol.t, &sol.u).map_err(CliError::module("diagnostics"))?)
        } else {
            None
        };
        let mut csv = String::from("vertex_id,u,lambda,phi,residual\n");
        for v in 0..s.vertex_count() {
            let p = phi.as_ref().map(|f| fmt17(f.values[v])).unwrap_or_default();
            writeln!(
                csv,
                "{v},{},{},{p},{}",
                fmt17(sol.u.values[v]),
                fmt17(lam.values[v]),
                fmt17(res.values[v])
            )
            .unwrap();
        }
        out.text(format!("fields_t{}.csv", t_label(sol.t)), csv);
        out.text(format!("u_t{}.csv", t_label(sol.t)), sol.u.to_csv());
        summaries.push(SolveSummary {
            t: sol.t,
            residual_norm: sol.residual_norm,
            iterations: sol.iterations,
            bracket_low_ok: sol.bracket_low_ok,
            bracket_high_ok: sol.bracket_high_ok,
            bracket_high: sol.bracket_high,
            low_margin: sol.low_margin.is_finite().then_some(sol.low_margin),
            high_margin: sol.high_margin,
            restarted: sol.restarted,
            max_abs_u: sol.u.max_abs(),
        });
    }
    out.json("solve.json", &summaries)
}

fn ray_claims(rho: &ScalarField, sweep: &RaySweep, tol: f64, claims: &mut Vec<Claim>) {
    let rep = &sweep.report;
    let f = &rep.flags;
    let sols = &sweep.solutions;
    let max_res = sols.iter().map(|x| x.residual_norm).fold(0.0, f64::max);
    claims.push(Claim::new(
        "Gauss equation residual",
        "discrete Gauss equation solved to tolerance",
        max_res,
        tol,
        f.residuals_ok,
    ));
    let positive: Vec<_> = sols.iter().filter(|x| x.t > 0.0).collect();
    if !positive.is_empty() {
        let low = positive.iter().map(|x| x.low_margin).fold(f64::INFINITY, f64::min);
        claims.push(Claim::new(
            "lower bracket u > log(t rho)/2",
            "induced metric dominates t|q|",
            low,
            if rep.boundary_mode { 10.0 * tol } else { 0.0 },
            positive.iter().all(|x| x.bracket_low_ok),
        ));
    }
    let high = sols.iter().map(|x| x.high_margin).fold(f64::NEG_INFINITY, f64::max);
    claims.push(Claim::new(
        "upper bracket e^(2u) <= x+",
        "conformal factor below the positive root bound",
        high,
        10.0 * tol,
        sols.iter().all(|x| x.bracket_high_ok),
    ));

    if rep.boundary_mode {
        let dev = sols
            .iter()
            .flat_map(|x| {
                x.u.values
                    .iter()
                    .zip(&rho.values)
                    .map(move |(u, r)| (u - 0.5 * (x.t * r).ln()).abs())
            })
            .fold(0.0, f64::max);
        claims.push(Claim::new(
            "constant solution u = log(t rho)/2",
            "flat torus with constant rho balances e^(2u) = t rho",
            dev,
            1e-8,
            dev <= 1e-8,
        ));
        return;
    }

    if sols.len() > 1 {
        claims.push(Claim::new(
            "u nondecreasing in t",
            "conformal factor grows along the ray",
            rep.max_u_decrease,
            tol,
            f.u_nondecreasing,
        ));
        claims.push(Claim::new(
            "lambda strictly increasing in t",
            "principal curvature grows along the ray",
            rep.min_lambda_step,
            0.0,
            f.lambda_strictly_increasing,
        ));
    }
    if positive.len() > 1 {
        claims.push(Claim::new(
            "phi strictly decreasing in t",
            "conformal gap shrinks along the ray",
            rep.max_phi_step,
            0.0,
            f.phi_strictly_decreasing,
        ));
        claims.push(Claim::new(
            "sup ratio strictly decreasing in t",
            "induced metric over t|q| decreases along the ray",
            rep.max_sup_ratio_step,
            0.0,
            f.sup_ratio_strictly_decreasing,
        ));
    }
    if !positive.is_empty() {
        let min_sup = rep.records.iter().filter_map(|r| r.sup_ratio).fold(f64::INFINITY, f64::min);
        claims.push(Claim::new(
            "sup ratio above 1",
            "induced metric exceeds t|q| away from the zeros",
            min_sup,
            0.0,
            f.sup_ratio_above_one,
        ));
    }
    claims.push(Claim::new(
        "lambda<1",
        "principal curvatures of the maximal surface stay below 1",
        rep.max_lambda_away,
        1e-6,
        f.lambda_below_one,
    ));
    let widths: Vec<f64> = rep
        .records
        .iter()
        .filter_map(|r| r.width_bound.and_then(|w| w.radians()))
        .collect();
    let all_defined = rep.records.iter().all(|r| r.width_bound.is_some());
    let max_w = widths.iter().copied().fold(0.0, f64::max);
    claims.push(Claim::new(
        "width bound below pi/2",
        "lower bound on the width of the convex core, conditional on C and delta",
        max_w,
        0.0,
        all_defined && widths.iter().all(|&w| w > 0.0 && w < FRAC_PI_2),
    ));
}

fn entropy_claims(s: &DiscreteSurface, estimates: &[(f64, EntropyEstimate)], claims: &mut Vec<Claim>) {
    if estimates.len() > 1 {
        let rise = estimates
            .windows(2)
            .map(|w| w[1].1.e_hat - w[0].1.e_hat)
            .fold(f64::NEG_INFINITY, f64::max);
        claims.push(Claim::new(
            "entropy nonincreasing in t",
            "volume entropy of the induced metric decreases along the ray",
            rise,
            0.0,
            rise <= 0.0,
        ));
    }
    if s.kind == SurfaceKind::Octagon8 {
        if let Some((_, e)) = estimates.iter().find(|(t, _)| *t == 0.0) {
            claims.push(Claim::new(
                "hyperbolic volume entropy equals 1",
                "volume entropy of a closed hyperbolic surface is 1",
                e.e_hat,
                0.15,
                (e.e_hat - 1.0).abs() <= 0.15,
            ));
        }
    }
}

fn spectrum_outputs(
    report: &HolderReport,
    rep_l: &FuchsianRep,
    rep_r: &FuchsianRep,
    out: &mut Outputs,
    claims: &mut Vec<Claim>,
) -> CliResult<()> {
    let mut csv = String::from("word,ell_l,ell_r,min_ratio,beta,beta_star\n");
    for r in &report.rows {
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            r.word,
            fmt17(r.ell_l),
            fmt17(r.ell_r),
            fmt17(r.min_ratio),
            fmt17(r.beta),
            fmt17(r.beta_star)
        )
        .unwrap();
    }
    out.text("spectrum.csv", csv);
    let defect = report.max_beta_identity_defect();
    let summary = SpectrumSummary {
        alpha_hat: report.alpha_hat,
        witness_word: report.witness_word.to_string(),
        max_word_length: report.max_word_length,
        classes: report.rows.len(),
        max_beta_identity_defect: defect,
        history_nonincreasing: report.history_nonincreasing(),
        monotone_history: report.monotone_history.clone(),
        relation_residual_l: rep_l.relation_residual(),
        relation_residual_r: rep_r.relation_residual(),
    };
    out.json("spectrum.json", &summary)?;
    claims.push(Claim::new(
        "beta-identity",
        "(beta - beta*)/(beta + beta*) equals the minimal length ratio",
        defect,
        1e-12,
        defect <= 1e-12,
    ));
    let rise = report
        .monotone_history
        .windows(2)
        .map(|w| w[1].1 - w[0].1)
        .fold(0.0, f64::max);
    claims.push(Claim::new(
        "Holder estimate nonincreasing in word length",
        "infimum over a growing set of classes",
        rise,
        0.0,
        report.history_nonincreasing(),
    ));
    claims.push(Claim::new(
        "Holder estimate in (0, 1]",
        "length ratio bounded by 1",
        report.alpha_hat,
        0.0,
        report.alpha_hat > 0.0 && report.alpha_hat <= 1.0,
    ));
    for (name, rep) in [("left", rep_l), ("right", rep_r)] {
        let r = rep.relation_residual();
        claims.push(Claim::new(
            &format!("{name} representation relation"),
            "[a,b][c,d] = 1 in PSL(2,R)",
            r,
            FuchsianRep::RELATION_TOLERANCE,
            r <= FuchsianRep::RELATION_TOLERANCE,
        ));
    }
    Ok(())
}
