use crate::manifest::{Claim, Manifest};
use std::fmt::Write;

fn num(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6e}")).unwrap_or_else(|| "-".into())
}

pub fn claim_line(c: &Claim) -> String {
    format!(
        "{} ({}): {}  measured {}  tolerance {}",
        c.claim,
        c.reference,
        if c.pass { "PASS" } else { "FAIL" },
        num(c.measured),
        num(c.tolerance)
    )
}

pub fn render(m: &Manifest) -> String {
    let mut s = String::new();
    writeln!(s, "{} {}  config {} (sha256 {})", m.tool, m.version, m.config_file, m.config_sha256).unwrap();
    writeln!(
        s,
        "mode: {}, threads {}",
        if m.deterministic { "deterministic" } else { "parallel" },
        m.threads
    )
    .unwrap();
    for n in &m.notes {
        writeln!(s, "note: {n}").unwrap();
    }
    for c in &m.claims {
        writeln!(s, "{}", claim_line(c)).unwrap();
    }
    let failed = m.claims.iter().filter(|c| !c.pass).count();
    writeln!(s, "{} claims, {} failed: {}", m.claims.len(), failed, if m.all_pass { "ALL PASS" } else { "FAILURES" })
        .unwrap();
    s
}
