//! Principal curvature, conformal gap and width bound of the maximal surface,
//! and warm-started sweeps along a ray `t q₀`.

use crate::entropy::{EntropyEstimate, LiftedGraph, WindowSpec};
use crate::error::{Error, Result};
use crate::field::{fmt17, ScalarField};
use crate::laplace::LaplaceOperator;
use crate::solver::{solve_gauss, GaussProblem, InitialGuess, SolveOptions, SolveResult, RHO_FLOOR};
use crate::surface::DiscreteSurface;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write;

/// `λ = t ρ e^{−2u}`.
pub fn principal_curvature(rho: &ScalarField, t: f64, u: &ScalarField) -> Result<ScalarField> {
    u.expect_len(rho.len())?;
    Ok(ScalarField::new(
        "lambda",
        rho.values
            .iter()
            .zip(&u.values)
            .map(|(r, x)| t * r * (-2.0 * x).exp())
            .collect(),
    ))
}

/// `φ = u − ½ log(tρ)`; `+inf` where `ρ` vanishes.
pub fn conformal_gap(rho: &ScalarField, t: f64, u: &ScalarField) -> Result<ScalarField> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("conformal gap needs t > 0, got {t}")));
    }
    u.expect_len(rho.len())?;
    Ok(ScalarField::new(
        "phi",
        rho.values
            .iter()
            .zip(&u.values)
            .map(|(&r, &x)| if r < RHO_FLOOR { f64::INFINITY } else { x - 0.5 * (t * r).ln() })
            .collect(),
    ))
}

/// Curvature `−1 + λ²` of the induced metric.
pub fn induced_curvature(lambda: &ScalarField) -> ScalarField {
    ScalarField::new("K_induced", lambda.values.iter().map(|l| -1.0 + l * l).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WidthBound {
    Radians(f64),
    Inapplicable,
}

impl WidthBound {
    pub fn radians(&self) -> Option<f64> {
        match self {
            WidthBound::Radians(x) => Some(*x),
            WidthBound::Inapplicable => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidthParams {
    #[serde(rename = "C")]
    pub c: f64,
    pub delta: f64,
}

impl Default for WidthParams {
    fn default() -> Self {
        Self { c: 1.0, delta: 0.5 }
    }
}

/// `arctan((1/(1 − λ_max))^{1/C})` when `λ_max ≥ δ`; conditional on the
/// constants `C` and `δ`.
pub fn width_lower_bound(lambda_max: f64, c: f64, delta: f64) -> Result<WidthBound> {
    if !(0.0..1.0).contains(&lambda_max) {
        return Err(Error::Domain(format!("lambda_max must lie in [0, 1), got {lambda_max}")));
    }
    if !(c > 0.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("need C > 0 and 0 < delta < 1, got C = {c}, delta = {delta}")));
    }
    if lambda_max < delta {
        return Ok(WidthBound::Inapplicable);
    }
    Ok(WidthBound::Radians((1.0 / (1.0 - lambda_max)).powf(1.0 / c).atan()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RayRecord {
    pub t: f64,
    pub lambda_max: f64,
    pub lambda_min_away: f64,
    /// Undefined at `t = 0`.
    pub min_phi: Option<f64>,
    pub sup_ratio: Option<f64>,
    pub entropy: Option<f64>,
    pub width_bound: Option<WidthBound>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub bracket_low_ok: bool,
    pub bracket_high_ok: bool,
    pub max_abs_u: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct MonotonicityFlags {
    pub u_nondecreasing: bool,
    pub phi_strictly_decreasing: bool,
    pub lambda_strictly_increasing: bool,
    pub lambda_below_one: bool,
    pub sup_ratio_above_one: bool,
    pub sup_ratio_strictly_decreasing: bool,
    pub entropy_nonincreasing: Option<bool>,
    pub brackets_ok: bool,
    pub residuals_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RayReport {
    pub records: Vec<RayRecord>,
    pub flags: MonotonicityFlags,
    pub exclusion_radius: f64,
    pub away_vertices: usize,
    /// Largest `λ` over away-vertices and positive `t`.
    pub max_lambda_away: f64,
    /// Largest drop `u(t₁) − u(t₂)` over away-vertices and `t₁ < t₂`.
    pub max_u_decrease: f64,
    /// Largest `φ(t₂) − φ(t₁)` over away-vertices, consecutive positive `t`.
    pub max_phi_step: f64,
    /// Smallest `λ(t₂) − λ(t₁)` over away-vertices, consecutive `t`.
    pub min_lambda_step: f64,
    /// Largest consecutive change of `sup_ratio`.
    pub max_sup_ratio_step: f64,
    pub width_params: WidthParams,
    pub width_note: String,
    /// Torus validation runs sit on the flat boundary case.
    pub boundary_mode: bool,
    pub entropy: Vec<Option<EntropyEstimate>>,
}

#[derive(Clone, Debug)]
pub struct SweepOptions {
    pub solve: SolveOptions,
    pub exclusion_radius: f64,
    pub width: WidthParams,
    pub lambda_margin: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            solve: SolveOptions::default(),
            exclusion_radius: 0.3,
            width: WidthParams::default(),
            lambda_margin: 1e-6,
        }
    }
}

pub struct RaySweep {
    pub report: RayReport,
    pub solutions: Vec<SolveResult>,
}

/// Optional entropy evaluation of each `I_t` on a prebuilt lifted graph.
pub struct EntropyRequest<'a> {
    pub graph: &'a LiftedGraph,
    pub window: WindowSpec,
}

/// Warm-started solves along increasing `t_values`, followed by the
/// per-record diagnostics and monotonicity flags.
pub fn ray_sweep(
    surface: &DiscreteSurface,
    op: &LaplaceOperator,
    rho: &ScalarField,
    zeros: &[usize],
    t_values: &[f64],
    opts: &SweepOptions,
    entropy: Option<EntropyRequest<'_>>,
) -> Result<RaySweep> {
    let n = surface.vertex_count();
    rho.expect_len(n)?;
    if t_values.is_empty() {
        return Err(Error::Domain("empty list of t values".into()));
    }
    if !(t_values[0] >= 0.0) || t_values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("t values must be nonnegative and strictly increasing".into()));
    }
    let dist = surface.distance_to_set(zeros);
    let away: Vec<usize> = (0..n).filter(|&v| dist[v] > opts.exclusion_radius).collect();
    if away.is_empty() {
        return Err(Error::EmptyDomain(format!(
            "no vertex lies farther than {} from the zeros",
            opts.exclusion_radius
        )));
    }

    let mut solutions: Vec<SolveResult> = Vec::with_capacity(t_values.len());
    for &t in t_values {
        let mut so = opts.solve.clone();
        if let (InitialGuess::Zero, Some(prev)) = (&so.initial, solutions.last()) {
            so.initial = InitialGuess::WarmStart(prev.u.values.clone());
        }
        let problem = GaussProblem {
            op,
            curvature: &surface.curvature,
            rho: &rho.values,
            t,
        };
        let r = solve_gauss(problem, &so).map_err(|e| e.at_t(t))?;
        solutions.push(r);
    }

    let entropy_estimates: Vec<Option<EntropyEstimate>> = match &entropy {
        None => vec![None; solutions.len()],
        Some(req) => solutions
            .par_iter()
            .map(|s| req.graph.estimate_for(&s.u.values, req.window).map(Some).map_err(|e| e.at_t(s.t)))
            .collect::<Result<Vec<_>>>()?,
    };

    let mut records = Vec::with_capacity(solutions.len());
    let mut lambdas = Vec::with_capacity(solutions.len());
    let mut phis = Vec::with_capacity(solutions.len());
    for (s, est) in solutions.iter().zip(&entropy_estimates) {
        let lam = principal_curvature(rho, s.t, &s.u)?;
        let lambda_max = lam.max();
        let lambda_min_away = away.iter().map(|&v| lam.values[v]).fold(f64::INFINITY, f64::min);
        let (min_phi, sup_ratio, phi) = if s.t > 0.0 {
            let phi = conformal_gap(rho, s.t, &s.u)?;
            let min_phi = away.iter().map(|&v| phi.values[v]).fold(f64::INFINITY, f64::min);
            let sup = away
                .iter()
                .map(|&v| (2.0 * s.u.values[v]).exp() / (s.t * rho.values[v]))
                .fold(f64::NEG_INFINITY, f64::max);
            (Some(min_phi), Some(sup), Some(phi))
        } else {
            (None, None, None)
        };
        let width_bound = if lambda_max < 1.0 {
            Some(width_lower_bound(lambda_max, opts.width.c, opts.width.delta)?)
        } else {
            None
        };
        records.push(RayRecord {
            t: s.t,
            lambda_max,
            lambda_min_away,
            min_phi,
            sup_ratio,
            entropy: est.as_ref().map(|e| e.e_hat),
            width_bound,
            residual_norm: s.residual_norm,
            iterations: s.iterations,
            bracket_low_ok: s.bracket_low_ok,
            bracket_high_ok: s.bracket_high_ok,
            max_abs_u: s.u.max_abs(),
        });
        lambdas.push(lam);
        phis.push(phi);
    }

    let tol = opts.solve.tolerance;
    let mut flags = MonotonicityFlags {
        u_nondecreasing: true,
        phi_strictly_decreasing: true,
        lambda_strictly_increasing: true,
        lambda_below_one: true,
        sup_ratio_above_one: true,
        sup_ratio_strictly_decreasing: true,
        entropy_nonincreasing: None,
        brackets_ok: records.iter().all(|r| r.bracket_low_ok && r.bracket_high_ok),
        residuals_ok: records.iter().all(|r| r.residual_norm <= tol),
    };
    let mut max_u_decrease = f64::NEG_INFINITY;
    let mut max_phi_step = f64::NEG_INFINITY;
    let mut min_lambda_step = f64::INFINITY;
    let mut max_sup_ratio_step = f64::NEG_INFINITY;
    let mut max_lambda_away: f64 = 0.0;
    for k in 0..solutions.len() {
        if solutions[k].t > 0.0 {
            for &v in &away {
                max_lambda_away = max_lambda_away.max(lambdas[k].values[v]);
            }
        }
        if let Some(s) = records[k].sup_ratio {
            flags.sup_ratio_above_one &= s > 1.0;
        }
        if k == 0 {
            continue;
        }
        let (a, b) = (&solutions[k - 1], &solutions[k]);
        for &v in &away {
            let drop = a.u.values[v] - b.u.values[v];
            max_u_decrease = max_u_decrease.max(drop);
            flags.u_nondecreasing &= drop <= tol;
            let dl = lambdas[k].values[v] - lambdas[k - 1].values[v];
            min_lambda_step = min_lambda_step.min(dl);
            flags.lambda_strictly_increasing &= dl > 0.0;
            if let (Some(p0), Some(p1)) = (&phis[k - 1], &phis[k]) {
                let dp = p1.values[v] - p0.values[v];
                max_phi_step = max_phi_step.max(dp);
                flags.phi_strictly_decreasing &= dp < 0.0;
            }
        }
        if let (Some(s0), Some(s1)) = (records[k - 1].sup_ratio, records[k].sup_ratio) {
            max_sup_ratio_step = max_sup_ratio_step.max(s1 - s0);
            flags.sup_ratio_strictly_decreasing &= s1 < s0;
        }
    }
    let boundary_mode = surface.curvature.iter().all(|&k| k == 0.0);
    flags.lambda_below_one = max_lambda_away < 1.0 - opts.lambda_margin;
    if entropy.is_some() {
        flags.entropy_nonincreasing = Some(
            records
                .windows(2)
                .all(|w| w[1].entropy.unwrap_or(f64::NAN) <= w[0].entropy.unwrap_or(f64::NAN)),
        );
    }

    Ok(RaySweep {
        report: RayReport {
            records,
            flags,
            exclusion_radius: opts.exclusion_radius,
            away_vertices: away.len(),
            max_lambda_away,
            max_u_decrease: if solutions.len() > 1 { max_u_decrease } else { 0.0 },
            max_phi_step,
            min_lambda_step,
            max_sup_ratio_step,
            width_params: opts.width,
            width_note: format!(
                "conditional on C = {}, delta = {} (unspecified universal constants)",
                opts.width.c, opts.width.delta
            ),
            boundary_mode,
            entropy: entropy_estimates,
        },
        solutions,
    })
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt17).unwrap_or_default()
}

impl RayReport {
    /// `t,lambda_max,lambda_min_away,min_phi,sup_ratio,entropy,width_bound`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,lambda_max,lambda_min_away,min_phi,sup_ratio,entropy,width_bound\n");
        for r in &self.records {
            let width = match r.width_bound {
                Some(WidthBound::Radians(x)) => fmt17(x),
                Some(WidthBound::Inapplicable) => "inapplicable".into(),
                None => String::new(),
            };
            writeln!(
                s,
                "{},{},{},{},{},{},{}",
                fmt17(r.t),
                fmt17(r.lambda_max),
                fmt17(r.lambda_min_away),
                opt(r.min_phi),
                opt(r.sup_ratio),
                opt(r.entropy),
                width
            )
            .unwrap();
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn width_examples() {
        let w = width_lower_bound(0.9, 1.0, 0.5).unwrap();
        assert!((w.radians().unwrap() - 10f64.atan()).abs() < 1e-12);
        assert!((w.radians().unwrap() - 1.471_127_674_303_735).abs() < 1e-12);
        assert_eq!(width_lower_bound(0.3, 1.0, 0.5).unwrap(), WidthBound::Inapplicable);
        assert!(width_lower_bound(1.0, 1.0, 0.5).is_err());
        let near = width_lower_bound(1.0 - 1e-9, 1.0, 0.5).unwrap().radians().unwrap();
        assert!(FRAC_PI_2 - near < 1e-8);
    }

    #[test]
    fn gap_and_lambda_agree() {
        let rho = ScalarField::new("rho", vec![0.2, 0.05, 1.0]);
        let u = ScalarField::new("u", vec![0.3, -0.1, 0.9]);
        let lam = principal_curvature(&rho, 2.0, &u).unwrap();
        let phi = conformal_gap(&rho, 2.0, &u).unwrap();
        for i in 0..3 {
            assert!((lam.values[i] - (-2.0 * phi.values[i]).exp()).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn width_bound_is_monotone(a in 0.5f64..0.999, b in 0.5f64..0.999, c in 0.2f64..5.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let wl = width_lower_bound(lo, c, 0.5).unwrap().radians().unwrap();
            let wh = width_lower_bound(hi, c, 0.5).unwrap().radians().unwrap();
            prop_assert!(wl <= wh);
            prop_assert!(wh < FRAC_PI_2 && wl > 0.0);
        }
    }
}
