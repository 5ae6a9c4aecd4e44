//! Acceptance suite: one verdict line per criterion, one indented line per clause.
//!
//! Clauses listed in `KNOWN_FAILURES` are evaluated at full strength and
//! printed as FAIL; they do not fail the run unless `ADSMAX_STRICT=1`. Any
//! other failing clause, or a known failure that starts passing, exits nonzero.

use adsmax_core::diagnostics::*;
use adsmax_core::entropy::*;
use adsmax_core::hyperbolic::Mat2;
use adsmax_core::laplace::{assemble_operators, LaplaceOperator};
use adsmax_core::qdiff::*;
use adsmax_core::solver::*;
use adsmax_core::spectrum::*;
use adsmax_core::surface::*;
use adsmax_core::ScalarField;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::f64::consts::FRAC_PI_2;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

const KNOWN_FAILURES: &[(u8, &str)] = &[(4, "sup_ratio_near_one"), (6, "entropy_halves")];

struct Clause {
    key: &'static str,
    pass: bool,
    text: String,
}

struct Criterion {
    id: u8,
    name: &'static str,
    clauses: Vec<Clause>,
}

impl Criterion {
    fn new(id: u8, name: &'static str) -> Self {
        Self { id, name, clauses: Vec::new() }
    }

    fn check(&mut self, key: &'static str, pass: bool, text: String) {
        self.clauses.push(Clause { key, pass, text });
    }

    fn pass(&self) -> bool {
        self.clauses.iter().all(|c| c.pass)
    }
}

fn verdict(b: bool) -> &'static str {
    if b {
        "PASS"
    } else {
        "FAIL"
    }
}

fn peak_rss_bytes() -> Option<u64> {
    let s = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = s.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

struct Octagon {
    surface: DiscreteSurface,
    op: LaplaceOperator,
    rho: ScalarField,
    zeros: Vec<usize>,
}

fn octagon(level: usize) -> Octagon {
    let surface = build_genus2_surface(level).expect("surface");
    let op = assemble_operators(&surface).expect("operator");
    let zeros = surface.symmetric_simple_zeros().expect("zeros");
    let spec = QDiffSpec::new(zeros.iter().map(|&v| (v, 1)).collect());
    let rho = synth_with_operator(&surface, &op, &spec).expect("qdiff").rho;
    Octagon { surface, op, rho, zeros }
}

const BASELINE_TIME: Duration = Duration::from_secs(5);
const SWEEP_TIME: Duration = Duration::from_secs(60);
const ENTROPY_TIME: Duration = Duration::from_secs(300);
const MEMORY_CAP: u64 = 4 << 30;

fn criterion_1() -> Criterion {
    let mut c = Criterion::new(1, "Fuchsian baseline at t = 0");
    for level in [2, 5] {
        let start = Instant::now();
        let o = octagon(level);
        let p = GaussProblem { op: &o.op, curvature: &o.surface.curvature, rho: &o.rho.values, t: 0.0 };
        let r = solve_gauss(p, &SolveOptions::default()).expect("solve");
        let lam = principal_curvature(&o.rho, 0.0, &r.u).expect("lambda");
        let elapsed = start.elapsed();
        let n = o.surface.vertex_count();
        let max_u = r.u.max_abs();
        c.check("max_u", max_u < 1e-10, format!("level {level} ({n} vertices): max|u| = {max_u:e} < 1e-10"));
        let lam_max = lam.max_abs();
        c.check("lambda_zero", lam_max == 0.0, format!("level {level}: max|lambda| = {lam_max:e} (identically 0)"));
        c.check(
            "runtime",
            elapsed < BASELINE_TIME,
            format!("level {level}: build + solve {elapsed:.2?} < {BASELINE_TIME:?}"),
        );
    }
    c
}

fn criterion_2() -> Criterion {
    let mut c = Criterion::new(2, "flat torus oracle u = log(t)/2");
    let s = build_flat_torus(4).expect("torus");
    let op = assemble_operators(&s).expect("operator");
    let rho = vec![1.0; s.vertex_count()];
    for t in [1.0, 4.0, 9.0] {
        let p = GaussProblem { op: &op, curvature: &s.curvature, rho: &rho, t };
        let r = solve_gauss(p, &SolveOptions::default()).expect("solve");
        let err = r.u.values.iter().map(|u| (u - 0.5 * f64::ln(t)).abs()).fold(0.0, f64::max);
        c.check(
            "torus",
            err < 1e-8,
            format!("t = {t} ({} vertices): max|u - log(t)/2| = {err:e} < 1e-8", s.vertex_count()),
        );
    }
    c
}

fn criteria_3_4() -> (Criterion, Criterion) {
    let level = 5;
    let o = octagon(level);
    let ts = [0.5, 1.0, 2.0, 4.0, 8.0];
    let start = Instant::now();
    let sw = ray_sweep(&o.surface, &o.op, &o.rho, &o.zeros, &ts, &SweepOptions::default(), None).expect("sweep");
    let elapsed = start.elapsed();

    let mut c3 = Criterion::new(3, "bracket certificates along the ray");
    for (r, s) in sw.report.records.iter().zip(&sw.solutions) {
        c3.check(
            "brackets",
            r.bracket_low_ok && r.bracket_high_ok,
            format!(
                "t = {}: lower margin {:.3e} > 0, upper margin {:.3e} <= 1e-9",
                r.t, s.low_margin, s.high_margin
            ),
        );
        c3.check(
            "residual",
            r.residual_norm < 1e-9,
            format!("t = {}: residual {:.3e} < 1e-9 after {} Newton steps", r.t, r.residual_norm, r.iterations),
        );
    }
    c3.check(
        "runtime",
        elapsed < SWEEP_TIME,
        format!("level {level} ({} vertices) sweep {elapsed:.2?} < {SWEEP_TIME:?}", o.surface.vertex_count()),
    );

    let rep = &sw.report;
    let f = &rep.flags;
    let mut c4 = Criterion::new(4, "monotonicity away from the zeros");
    let away = format!("{} vertices farther than {} from the zeros", rep.away_vertices, rep.exclusion_radius);
    c4.check(
        "u_nondecreasing",
        f.u_nondecreasing,
        format!("u nondecreasing in t: largest drop {:.3e} ({away})", rep.max_u_decrease),
    );
    c4.check(
        "phi_decreasing",
        f.phi_strictly_decreasing,
        format!("phi strictly decreasing: largest step {:.3e} < 0", rep.max_phi_step),
    );
    c4.check(
        "lambda_increasing",
        f.lambda_strictly_increasing,
        format!("lambda strictly increasing: smallest step {:.3e} > 0", rep.min_lambda_step),
    );
    c4.check(
        "lambda_below_one",
        f.lambda_below_one,
        format!("max lambda = {:.6} < 1 - 1e-6", rep.max_lambda_away),
    );
    let sups: Vec<f64> = rep.records.iter().map(|r| r.sup_ratio.unwrap()).collect();
    c4.check(
        "sup_ratio_decreasing",
        f.sup_ratio_strictly_decreasing,
        format!("sup_ratio strictly decreasing: {:?}", sups.iter().map(|s| format!("{s:.4}")).collect::<Vec<_>>()),
    );
    let at8 = *sups.last().unwrap();
    c4.check(
        "sup_ratio_near_one",
        (at8 - 1.0).abs() <= 0.25,
        format!("sup_ratio(t = 8) = {at8:.4} within 25% of 1"),
    );
    (c3, c4)
}

fn criterion_5() -> (Criterion, LiftedGraph, Octagon) {
    let mut c = Criterion::new(5, "volume entropy of the hyperbolic metric");
    let o = octagon(2);
    let zero = vec![0.0; o.surface.vertex_count()];
    let mut kept = None;
    for wr in [4, 5] {
        let start = Instant::now();
        let g = build_orbit_graph(&o.surface, &zero, wr).expect("graph");
        let e = estimate_from_graph(&g, WindowSpec::default()).expect("estimate");
        let elapsed = start.elapsed();
        c.check(
            "value",
            (e.e_hat - 1.0).abs() <= 0.15,
            format!(
                "word radius {wr}: E_hat = {:.4} in 1 +- 0.15, fit residual {:.4}, window [{:.3}, {:.3}], {} copies, {} nodes",
                e.e_hat,
                e.fit_residual,
                e.window.0,
                e.window.1,
                g.copies.len(),
                g.node_count
            ),
        );
        c.check(
            "runtime",
            elapsed < ENTROPY_TIME,
            format!("word radius {wr}: build + estimate {elapsed:.2?} < {ENTROPY_TIME:?}"),
        );
        kept = Some(g);
    }
    match peak_rss_bytes() {
        Some(b) => c.check(
            "memory",
            b < MEMORY_CAP,
            format!("peak resident memory {:.2} GiB < 4 GiB", b as f64 / (1u64 << 30) as f64),
        ),
        None => c.check("memory", false, "peak resident memory unavailable".into()),
    }
    (c, kept.unwrap(), o)
}

fn criterion_6(g: &LiftedGraph, o: &Octagon) -> Criterion {
    let mut c = Criterion::new(6, "entropy decay along the ray");
    let ts = [0.0, 1.0, 4.0, 16.0];
    let sw = ray_sweep(
        &o.surface,
        &o.op,
        &o.rho,
        &o.zeros,
        &ts,
        &SweepOptions::default(),
        Some(EntropyRequest { graph: g, window: WindowSpec::default() }),
    )
    .expect("sweep");
    let e: Vec<f64> = sw.report.entropy.iter().map(|x| x.as_ref().unwrap().e_hat).collect();
    c.check(
        "nonincreasing",
        sw.report.flags.entropy_nonincreasing == Some(true),
        format!(
            "E_hat nonincreasing over t = {ts:?}: {:?}",
            e.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>()
        ),
    );
    // Katok: E² · area ≥ 4π for any metric conformal to h on a genus 2 surface
    let area: f64 = sw.solutions[3].u.values.iter().zip(&o.op.mass).map(|(u, m)| (2.0 * u).exp() * m).sum();
    let katok = (4.0 * std::f64::consts::PI / area).sqrt();
    c.check(
        "entropy_halves",
        e[3] < 0.5 * e[0],
        format!(
            "E_hat(16) = {:.4} < 0.5 E_hat(0) = {:.4} (area(I_16) = {area:.3}, so E(I_16) >= {katok:.4})",
            e[3],
            0.5 * e[0]
        ),
    );
    let base = estimate_from_graph(g, WindowSpec::default()).expect("estimate");
    for factor in [4.0, 0.5] {
        let mut scaled = g.clone();
        scaled.scale(factor).expect("scale");
        let s = estimate_from_graph(&scaled, WindowSpec::default()).expect("estimate");
        let same_counts = base.counts.iter().map(|x| x.1).eq(s.counts.iter().map(|x| x.1));
        let err = (s.e_hat - base.e_hat / factor).abs();
        c.check(
            "scaling",
            same_counts && err <= 1e-12,
            format!("weights x{factor}: count table identical = {same_counts}, |E - E0/c| = {err:.1e} <= 1e-12"),
        );
    }
    c
}

/// Classes of cyclically reduced words of length `len`, by brute force over all strings.
fn brute_force_classes(len: usize) -> usize {
    let mut seen: HashSet<BTreeSet<Vec<u8>>> = HashSet::new();
    for code in 0..8usize.pow(len as u32) {
        let w: Vec<u8> = (0..len).map(|i| ((code >> (3 * i)) & 7) as u8).collect();
        let reduced = len == 1 || (0..len).all(|i| w[(i + 1) % len] != w[i] ^ 1);
        if !reduced {
            continue;
        }
        let inv: Vec<u8> = w.iter().rev().map(|x| x ^ 1).collect();
        let key: BTreeSet<Vec<u8>> = (0..len)
            .flat_map(|s| [[&w[s..], &w[..s]].concat(), [&inv[s..], &inv[..s]].concat()])
            .collect();
        seen.insert(key);
    }
    seen.len()
}

fn criterion_7() -> Criterion {
    let mut c = Criterion::new(7, "spectrum identities");
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let l: f64 = 10f64.powf(rng.random_range(-3.0..3.0));
        let r: f64 = 10f64.powf(rng.random_range(-3.0..3.0));
        let (b, bs) = beta_pair(l, r);
        worst = worst.max(((b - bs) / (b + bs) - min_ratio(l, r)).abs());
    }
    c.check("beta", worst <= 1e-12, format!("beta identity over 1e4 random pairs: worst defect {worst:.2e} <= 1e-12"));

    let rep = regular_octagon_rep();
    let same = holder_estimate(&rep, &rep, 6).expect("holder");
    c.check("self", same.alpha_hat == 1.0, format!("alpha_hat(rep, rep) = {} exactly", same.alpha_hat));
    let conj = rep.conjugate(&Mat2::from([[2.0, 0.0], [0.0, 0.5]]));
    let cj = holder_estimate(&rep, &conj, 6).expect("holder");
    c.check("conjugate", cj.alpha_hat == 1.0, format!("alpha_hat(rep, diag(2, 1/2) conjugate) = {} exactly", cj.alpha_hat));
    let tw = holder_estimate(&rep, &rep.twist_along_a(0.5).expect("twist"), 6).expect("holder");
    c.check(
        "monotone",
        tw.history_nonincreasing(),
        format!(
            "alpha_hat(rep, twist) by max length: {:?}",
            tw.monotone_history.iter().map(|(l, a)| format!("{l}:{a:.6}")).collect::<Vec<_>>()
        ),
    );
    let words = enumerate_classes(3).expect("enumerate");
    for len in 1..=3 {
        let got = words.iter().filter(|w| w.len() == len).count();
        let want = brute_force_classes(len);
        c.check("counts", got == want, format!("length {len}: {got} classes, brute force {want}"));
    }
    c
}

fn criterion_8() -> Criterion {
    let mut c = Criterion::new(8, "width bound formula");
    let w = |l: f64| width_lower_bound(l, 1.0, 0.5).expect("width").radians().expect("applicable");
    let err = (w(0.9) - 10f64.atan()).abs();
    c.check("value", err <= 1e-12, format!("width(0.9, C = 1, delta = 0.5) - arctan(10) = {err:.1e}"));
    let grid: Vec<f64> = (0..=1000).map(|i| 0.5 + 0.499 * i as f64 / 1000.0).collect();
    let monotone = [0.5, 1.0, 2.0].iter().all(|&cc| {
        grid.windows(2).all(|p| {
            let a = width_lower_bound(p[0], cc, 0.5).unwrap().radians().unwrap();
            let b = width_lower_bound(p[1], cc, 0.5).unwrap().radians().unwrap();
            a < b
        })
    });
    c.check("monotone", monotone, "strictly increasing in lambda_max on [0.5, 0.999] for C in {0.5, 1, 2}".into());
    let gap = FRAC_PI_2 - w(1.0 - 1e-9);
    c.check("limit", (0.0..=1e-8).contains(&gap), format!("pi/2 - width(1 - 1e-9) = {gap:.3e}"));
    c
}

fn hash_dir(dir: &Path) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for e in std::fs::read_dir(dir).expect("read dir") {
        let p = e.expect("entry").path();
        let bytes = std::fs::read(&p).expect("read file");
        let h: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        out.insert(p.file_name().unwrap().to_string_lossy().into_owned(), h);
    }
    out
}

fn criterion_9() -> Criterion {
    let mut c = Criterion::new(9, "deterministic reruns");
    let tmp = tempfile::tempdir().expect("tempdir");
    let reps = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/reps");
    let config = serde_json::json!({
        "surface": {"type": "octagon8", "subdivision": 2},
        "ray": {"t_values": [0.0, 0.5, 1.0, 2.0, 4.0, 8.0]},
        "entropy": {"word_radius": 4},
        "spectrum": {
            "rep_l_path": reps.join("octagon.json"),
            "rep_r_path": reps.join("octagon_twist.json"),
            "max_word_length": 5
        }
    });
    let cfg = tmp.path().join("config.json");
    std::fs::write(&cfg, serde_json::to_string_pretty(&config).unwrap()).expect("write config");
    let mut hashes = Vec::new();
    for run in ["a", "b"] {
        let out = tmp.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_adsmax"))
            .arg("run")
            .arg(&cfg)
            .arg("--deterministic")
            .arg("--out")
            .arg(&out)
            .output()
            .expect("spawn adsmax");
        c.check(
            "exit",
            status.status.success(),
            format!("run {run}: exit status {:?}", status.status.code()),
        );
        hashes.push(hash_dir(&out));
    }
    let differing: Vec<&String> = hashes[0]
        .iter()
        .filter(|(k, v)| hashes[1].get(*k) != Some(v))
        .map(|(k, _)| k)
        .collect();
    c.check(
        "identical",
        differing.is_empty() && hashes[0].len() == hashes[1].len() && hashes[0].len() > 10,
        format!("{} files, sha256 identical across runs (differing: {differing:?})", hashes[0].len()),
    );
    c
}

fn main() {
    let strict = std::env::var("ADSMAX_STRICT").is_ok_and(|v| v == "1");
    let started = Instant::now();
    let mut all = vec![criterion_1(), criterion_2()];
    let (c3, c4) = criteria_3_4();
    all.push(c3);
    all.push(c4);
    let (c5, graph, o) = criterion_5();
    all.push(c5);
    all.push(criterion_6(&graph, &o));
    drop(graph);
    all.push(criterion_7());
    all.push(criterion_8());
    all.push(criterion_9());

    let mut unexpected = Vec::new();
    println!();
    for c in &all {
        println!("criterion {} ({}): {}", c.id, c.name, verdict(c.pass()));
        for cl in &c.clauses {
            let known = KNOWN_FAILURES.contains(&(c.id, cl.key));
            let tag = if known && !cl.pass { "  [known failure]" } else { "" };
            println!("    [{}] {}{tag}", verdict(cl.pass), cl.text);
            // a failure not listed, or a listed failure that now passes
            if cl.pass == known {
                unexpected.push(format!("criterion {} clause {}", c.id, cl.key));
            }
            if strict && !cl.pass && known {
                unexpected.push(format!("criterion {} clause {} (strict)", c.id, cl.key));
            }
        }
    }
    let passed = all.iter().filter(|c| c.pass()).count();
    println!("{passed}/{} criteria pass in {:.1?}", all.len(), started.elapsed());
    if !unexpected.is_empty() {
        println!("unexpected outcomes: {unexpected:?}");
        std::process::exit(1);
    }
}
