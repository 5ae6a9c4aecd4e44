//! Intrinsic cotangent Laplacian with lumped mass.

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::mesh::IntrinsicTriangulation;
use crate::surface::DiscreteSurface;

/// `(W u)_i = Σ_j w_ij (u_j − u_i)`, so `W u ≤ 0` at a maximum when the
/// weights are nonnegative. `mass` holds the lumped vertex areas.
#[derive(Clone, Debug)]
pub struct LaplaceOperator {
    pub weights: CsrMatrix,
    pub degree: Vec<f64>,
    pub mass: Vec<f64>,
}

pub fn assemble_operators(surface: &DiscreteSurface) -> Result<LaplaceOperator> {
    assemble_from_mesh(&surface.mesh, surface.vertex_area.clone())
}

/// Cotangent weights `(cot α + cot β) / 2` from edge lengths. Self-loops carry
/// no coupling and are dropped.
pub fn assemble_from_mesh(mesh: &IntrinsicTriangulation, mass: Vec<f64>) -> Result<LaplaceOperator> {
    let n = mesh.vertex_count;
    if mass.len() != n {
        return Err(Error::Shape {
            expected: n,
            got: mass.len(),
        });
    }
    let g = mesh.geometry;
    let mut trip = Vec::with_capacity(mesh.faces.len() * 6);
    for (f, t) in mesh.faces.iter().enumerate() {
        let l = mesh.face_sides(f);
        match g.area(l[0], l[1], l[2]) {
            Some(a) if a > 0.0 => {}
            _ => {
                return Err(Error::DegenerateFace {
                    face: f,
                    reason: format!("side lengths {:?} enclose no area", l),
                })
            }
        }
        for k in 0..3 {
            // side k joins corners k, k+1 and faces corner k+2
            let cot = g
                .cot_angle(l[k], l[(k + 1) % 3], l[(k + 2) % 3])
                .ok_or_else(|| Error::DegenerateFace {
                    face: f,
                    reason: "undefined corner angle".into(),
                })?;
            let (i, j) = (t[k], t[(k + 1) % 3]);
            if i != j {
                trip.push((i, j, 0.5 * cot));
                trip.push((j, i, 0.5 * cot));
            }
        }
    }
    let weights = CsrMatrix::from_triplets(n, trip);
    let degree = (0..n).map(|i| weights.row(i).map(|(_, w)| w).sum()).collect();
    Ok(LaplaceOperator {
        weights,
        degree,
        mass,
    })
}

impl LaplaceOperator {
    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    /// `out = W u`, summed as differences so constants map to exact zeros.
    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        for i in 0..self.len() {
            out[i] = self.weights.row(i).map(|(j, w)| w * (u[j] - u[i])).sum();
        }
    }

    /// Pointwise Laplacian `(W u)_i / m_i`.
    pub fn pointwise(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.apply(u, &mut out);
        out.iter_mut().zip(&self.mass).for_each(|(o, m)| *o /= m);
        out
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.val.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest `|w_ij − w_ji|`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.len() {
            for (j, w) in self.weights.row(i) {
                d = d.max((w - self.weights.get(j, i)).abs());
            }
        }
        d
    }

    /// Largest row sum of the assembled matrix `W − diag(degree)`.
    pub fn max_row_sum(&self) -> f64 {
        (0..self.len())
            .map(|i| {
                let s: f64 = self.weights.row(i).map(|(_, w)| w).sum();
                (s - self.degree[i]).abs()
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::C64;
    use crate::surface::lumped_areas;

    fn grid(n: usize, h: f64) -> (Vec<C64>, Vec<[usize; 3]>) {
        let idx = |i: usize, j: usize| j * (n + 1) + i;
        let mut p = Vec::new();
        for j in 0..=n {
            for i in 0..=n {
                p.push(C64::new(i as f64 * h, j as f64 * h));
            }
        }
        let mut f = Vec::new();
        for j in 0..n {
            for i in 0..n {
                f.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
                f.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
            }
        }
        (p, f)
    }

    fn interior(n: usize) -> impl Iterator<Item = usize> {
        (1..n).flat_map(move |j| (1..n).map(move |i| j * (n + 1) + i))
    }

    #[test]
    fn linear_functions_are_harmonic_on_flat_patch() {
        let n = 8;
        let (p, f) = grid(n, 0.125);
        let mesh = IntrinsicTriangulation::from_planar(&p, &f).unwrap();
        let op = assemble_from_mesh(&mesh, lumped_areas(&mesh).unwrap()).unwrap();
        let u: Vec<f64> = p.iter().map(|z| 2.0 * z.re - 3.0 * z.im + 1.0).collect();
        let lu = op.pointwise(&u);
        for v in interior(n) {
            assert!(lu[v].abs() < 1e-12, "vertex {v}: {}", lu[v]);
        }
    }

    #[test]
    fn quadratic_matches_five_point_stencil() {
        // the five-point stencil gives exactly 4 for x^2 + y^2 on a square grid
        let n = 8;
        let h = 0.125;
        let (p, f) = grid(n, h);
        let mesh = IntrinsicTriangulation::from_planar(&p, &f).unwrap();
        let op = assemble_from_mesh(&mesh, lumped_areas(&mesh).unwrap()).unwrap();
        let u: Vec<f64> = p.iter().map(|z| z.norm_sqr()).collect();
        let lu = op.pointwise(&u);
        for v in interior(n) {
            let (i, j) = (v % (n + 1), v / (n + 1));
            let at = |i: usize, j: usize| u[j * (n + 1) + i];
            let fd = (at(i + 1, j) + at(i - 1, j) + at(i, j + 1) + at(i, j - 1) - 4.0 * at(i, j)) / (h * h);
            assert!((lu[v] - fd).abs() < 1e-10);
            assert!((lu[v] - 4.0).abs() < 1e-10);
        }
    }

    #[test]
    fn degenerate_face_is_named() {
        let p = [C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.5, 1.0)];
        let mut mesh = IntrinsicTriangulation::from_planar(&p, &[[0, 1, 2]]).unwrap();
        mesh.edge_lengths[0] = 10.0;
        let err = assemble_from_mesh(&mesh, vec![1.0; 3]).unwrap_err();
        assert!(matches!(err, Error::DegenerateFace { face: 0, .. }));
    }
}
