//! Norm of a holomorphic quadratic differential from its zero divisor: the
//! flat cone metric `ρ h` with `ρ = e^{2σ}` and `Δσ = K + π Σ k_i δ_{p_i}`.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::laplace::{assemble_operators, LaplaceOperator};
use crate::linalg::{pcg, CgOptions};
use crate::surface::DiscreteSurface;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    #[default]
    #[serde(rename = "unit-flat-area")]
    UnitFlatArea,
}

/// Zeros as `(vertex, order)` pairs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QDiffSpec {
    pub zeros: Vec<(usize, u32)>,
    #[serde(default)]
    pub normalization: Normalization,
}

impl QDiffSpec {
    pub fn new(zeros: Vec<(usize, u32)>) -> Self {
        Self {
            zeros,
            normalization: Normalization::UnitFlatArea,
        }
    }

    pub fn zero_vertices(&self) -> Vec<usize> {
        self.zeros.iter().map(|z| z.0).collect()
    }

    pub fn total_order(&self) -> u32 {
        self.zeros.iter().map(|z| z.1).sum()
    }

    pub fn validate(&self, genus: usize, vertex_count: usize) -> Result<()> {
        let expected = (4 * genus).saturating_sub(4) as u32;
        let mut seen = HashSet::new();
        for &(v, k) in &self.zeros {
            if v >= vertex_count {
                return Err(Error::Spec(format!("zero vertex {v} out of range (n = {vertex_count})")));
            }
            if k == 0 {
                return Err(Error::Spec(format!("zero at vertex {v} has order 0")));
            }
            if !seen.insert(v) {
                return Err(Error::Spec(format!("duplicate zero vertex {v}")));
            }
        }
        if self.total_order() != expected {
            return Err(Error::Solvability {
                got: self.total_order(),
                expected,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct QDiffNorm {
    pub rho: ScalarField,
    pub sigma: ScalarField,
    /// `Σ_v K_v m_v + π Σ k_i` before balancing.
    pub charge_defect: f64,
    pub cg_iterations: usize,
}

pub fn synth_qdiff_norm(surface: &DiscreteSurface, spec: &QDiffSpec) -> Result<ScalarField> {
    let op = assemble_operators(surface)?;
    Ok(synth_with_operator(surface, &op, spec)?.rho)
}

/// Solves `W σ = M K + charges`, with charges `π k_i` at the zeros rescaled
/// by a factor within 1e-8 of one so the source sums to zero, then sets
/// `ρ = e^{2σ}` with `Σ ρ m = 1`.
pub fn synth_with_operator(surface: &DiscreteSurface, op: &LaplaceOperator, spec: &QDiffSpec) -> Result<QDiffNorm> {
    let n = surface.vertex_count();
    spec.validate(surface.genus, n)?;
    let mk: Vec<f64> = op.mass.iter().zip(&surface.curvature).map(|(m, k)| m * k).collect();
    let total_mk: f64 = mk.iter().sum();
    let total_k = spec.total_order() as f64;
    let charge_defect = total_mk + PI * total_k;
    if charge_defect.abs() > 1e-8 {
        return Err(Error::Solvability {
            got: spec.total_order(),
            expected: (4 * surface.genus).saturating_sub(4) as u32,
        });
    }
    let mut b = mk;
    for &(v, k) in &spec.zeros {
        b[v] -= total_mk * k as f64 / total_k;
    }
    // -W σ = -b on the complement of constants
    let rhs: Vec<f64> = b.iter().map(|x| -x).collect();
    let mut sigma = vec![0.0; n];
    let mut cg_iterations = 0;
    if rhs.iter().any(|&x| x != 0.0) {
        let apply = |x: &[f64], y: &mut [f64]| {
            op.apply(x, y);
            y.iter_mut().for_each(|v| *v = -*v);
        };
        let opts = CgOptions {
            project_constants: true,
            ..CgOptions::default()
        };
        cg_iterations = pcg(apply, &op.degree, &rhs, &mut sigma, opts)?.iterations;
    }
    let top = sigma.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let area: f64 = sigma
        .iter()
        .zip(&op.mass)
        .map(|(s, m)| (2.0 * (s - top)).exp() * m)
        .sum();
    let shift = top + 0.5 * area.ln();
    sigma.iter_mut().for_each(|s| *s -= shift);
    let rho: Vec<f64> = sigma.iter().map(|s| (2.0 * s).exp()).collect();
    Ok(QDiffNorm {
        rho: ScalarField::new("rho", rho),
        sigma: ScalarField::new("sigma", sigma),
        charge_defect,
        cg_iterations,
    })
}

/// `Σ ρ m`.
pub fn flat_area(op: &LaplaceOperator, rho: &[f64]) -> f64 {
    rho.iter().zip(&op.mass).map(|(r, m)| r * m).sum()
}

/// Max of `|Δ(½ log ρ) − K|` over vertices farther than `exclusion_radius`
/// from every zero.
pub fn holomorphicity_residual(
    surface: &DiscreteSurface,
    op: &LaplaceOperator,
    rho: &ScalarField,
    zeros: &[usize],
    exclusion_radius: f64,
) -> Result<f64> {
    let n = surface.vertex_count();
    rho.expect_len(n)?;
    let dist = surface.distance_to_set(zeros);
    let away: Vec<usize> = (0..n).filter(|&v| dist[v] > exclusion_radius).collect();
    if away.is_empty() {
        return Err(Error::EmptyDomain(format!(
            "no vertex lies farther than {exclusion_radius} from the zeros"
        )));
    }
    let mut needed = vec![false; n];
    for &v in &away {
        needed[v] = true;
        for (j, _) in op.weights.row(v) {
            needed[j] = true;
        }
    }
    if let Some(v) = (0..n).find(|&v| needed[v] && !(rho.values[v] > 0.0)) {
        return Err(Error::Domain(format!("rho is not positive at vertex {v}")));
    }
    let half_log: Vec<f64> = rho.values.iter().map(|r| if *r > 0.0 { 0.5 * r.ln() } else { 0.0 }).collect();
    let lap = op.pointwise(&half_log);
    Ok(away
        .iter()
        .map(|&v| (lap[v] - surface.curvature[v]).abs())
        .fold(0.0, f64::max))
}
