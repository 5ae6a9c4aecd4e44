//! Intrinsic triangulations: faces over (identified) vertices, edge lengths,
//! and halfedge adjacency. Supports closed surfaces with multi-edges and
//! open flat patches, and Delaunay edge flipping.

use crate::error::{Error, Result};
use crate::hyperbolic::{Geometry, C64};
use std::collections::HashMap;

pub const NO_TWIN: usize = usize::MAX;

/// Triangulation described by edge lengths only. Halfedge `3f + k` runs from
/// corner `k` to corner `k + 1` of face `f`.
#[derive(Clone, Debug)]
pub struct IntrinsicTriangulation {
    pub geometry: Geometry,
    pub vertex_count: usize,
    pub faces: Vec<[usize; 3]>,
    pub twin: Vec<usize>,
    pub halfedge_edge: Vec<usize>,
    pub edge_lengths: Vec<f64>,
}

impl IntrinsicTriangulation {
    /// Assemble from faces plus halfedge twins; edge ids are assigned in
    /// halfedge order and lengths taken from `length_of(halfedge)`.
    pub fn from_twins(
        geometry: Geometry,
        vertex_count: usize,
        faces: Vec<[usize; 3]>,
        twin: Vec<usize>,
        length_of: impl Fn(usize) -> f64,
    ) -> Result<Self> {
        let nh = faces.len() * 3;
        if twin.len() != nh {
            return Err(Error::Mesh("twin table has wrong length".into()));
        }
        let mut halfedge_edge = vec![usize::MAX; nh];
        let mut edge_lengths = Vec::new();
        for h in 0..nh {
            if halfedge_edge[h] != usize::MAX {
                continue;
            }
            let t = twin[h];
            if t != NO_TWIN && twin[t] != h {
                return Err(Error::Mesh(format!("halfedge {h} twin is not involutive")));
            }
            let e = edge_lengths.len();
            edge_lengths.push(length_of(h));
            halfedge_edge[h] = e;
            if t != NO_TWIN {
                halfedge_edge[t] = e;
            }
        }
        Ok(Self {
            geometry,
            vertex_count,
            faces,
            twin,
            halfedge_edge,
            edge_lengths,
        })
    }

    /// Open mesh embedded in the plane (flat test patches).
    pub fn from_planar(positions: &[C64], faces: &[[usize; 3]]) -> Result<Self> {
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for (f, tri) in faces.iter().enumerate() {
            for k in 0..3 {
                if directed.insert((tri[k], tri[(k + 1) % 3]), 3 * f + k).is_some() {
                    return Err(Error::Mesh(format!("face {f} repeats a directed edge")));
                }
            }
        }
        let twin: Vec<usize> = (0..faces.len() * 3)
            .map(|h| {
                let tri = faces[h / 3];
                let (a, b) = (tri[h % 3], tri[(h % 3 + 1) % 3]);
                directed.get(&(b, a)).copied().unwrap_or(NO_TWIN)
            })
            .collect();
        let len = |h: usize| {
            let tri = faces[h / 3];
            (positions[tri[h % 3]] - positions[tri[(h % 3 + 1) % 3]]).norm()
        };
        Self::from_twins(Geometry::Euclidean, positions.len(), faces.to_vec(), twin, len)
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_lengths.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count as i64 - self.edge_count() as i64 + self.face_count() as i64
    }

    pub fn halfedge_length(&self, h: usize) -> f64 {
        self.edge_lengths[self.halfedge_edge[h]]
    }

    /// Side lengths of face `f`: entry `k` is the side from corner `k` to `k + 1`.
    pub fn face_sides(&self, f: usize) -> [f64; 3] {
        [
            self.halfedge_length(3 * f),
            self.halfedge_length(3 * f + 1),
            self.halfedge_length(3 * f + 2),
        ]
    }

    /// Interior angle at each corner, `None` for a degenerate face.
    pub fn corner_angles(&self, f: usize) -> Option<[f64; 3]> {
        let l = self.face_sides(f);
        let g = self.geometry;
        Some([
            g.angle(l[1], l[2], l[0])?,
            g.angle(l[2], l[0], l[1])?,
            g.angle(l[0], l[1], l[2])?,
        ])
    }

    pub fn face_area(&self, f: usize) -> Option<f64> {
        let l = self.face_sides(f);
        self.geometry.area(l[0], l[1], l[2])
    }

    /// Smallest `b + c - a` over all faces and sides (negative when violated).
    pub fn triangle_inequality_margin(&self) -> f64 {
        (0..self.faces.len())
            .map(|f| {
                let l = self.face_sides(f);
                (l[1] + l[2] - l[0]).min(l[2] + l[0] - l[1]).min(l[0] + l[1] - l[2])
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Positive when edge `e` violates the Delaunay condition
    /// `alpha + beta <= theta_u + theta_v` (opposite angles vs. angles at the
    /// endpoints of the quadrilateral). Boundary edges return `None`.
    fn delaunay_excess(&self, h: usize) -> Option<f64> {
        let t = self.twin[h];
        if t == NO_TWIN || t / 3 == h / 3 {
            return None;
        }
        let (f, k) = (h / 3, h % 3);
        let (g, m) = (t / 3, t % 3);
        let af = self.corner_angles(f)?;
        let ag = self.corner_angles(g)?;
        let alpha = af[(k + 2) % 3];
        let beta = ag[(m + 2) % 3];
        let theta_u = af[k] + ag[(m + 1) % 3];
        let theta_v = af[(k + 1) % 3] + ag[m];
        Some(alpha + beta - theta_u - theta_v)
    }

    /// Flip edges until every interior edge is locally Delaunay.
    /// Returns the number of flips performed.
    pub fn make_delaunay(&mut self, max_flips: usize) -> Result<usize> {
        const TOL: f64 = 1e-12;
        let mut rep = vec![usize::MAX; self.edge_count()];
        for h in 0..self.twin.len() {
            let e = self.halfedge_edge[h];
            if rep[e] == usize::MAX {
                rep[e] = h;
            }
        }
        let mut stack: Vec<usize> = (0..self.edge_count()).rev().collect();
        let mut queued = vec![true; self.edge_count()];
        let mut flips = 0;
        while let Some(e) = stack.pop() {
            queued[e] = false;
            let h = rep[e];
            match self.delaunay_excess(h) {
                Some(x) if x > TOL => {}
                _ => continue,
            }
            if flips >= max_flips {
                return Err(Error::Mesh(format!(
                    "Delaunay flipping exceeded {max_flips} flips"
                )));
            }
            let (outer, flipped) = self.flip(h);
            flips += 1;
            for oh in outer {
                let oe = self.halfedge_edge[oh];
                rep[oe] = oh;
                if !queued[oe] {
                    queued[oe] = true;
                    stack.push(oe);
                }
            }
            rep[e] = flipped;
        }
        Ok(flips)
    }

    /// Flip the edge carried by halfedge `h`; returns the four outer halfedges
    /// and one halfedge of the new diagonal.
    fn flip(&mut self, h: usize) -> ([usize; 4], usize) {
        let t = self.twin[h];
        let (f, k) = (h / 3, h % 3);
        let (g, m) = (t / 3, t % 3);
        let u = self.faces[f][k];
        let v = self.faces[f][(k + 1) % 3];
        let a = self.faces[f][(k + 2) % 3];
        let b = self.faces[g][(m + 2) % 3];

        let af = self.corner_angles(f).expect("non-degenerate face");
        let ag = self.corner_angles(g).expect("non-degenerate face");
        let theta_u = af[k] + ag[(m + 1) % 3];

        let h_va = 3 * f + (k + 1) % 3;
        let h_au = 3 * f + (k + 2) % 3;
        let h_ub = 3 * g + (m + 1) % 3;
        let h_bv = 3 * g + (m + 2) % 3;
        let x_ua = self.halfedge_length(h_au);
        let x_ub = self.halfedge_length(h_ub);
        let new_len = self.geometry.third_side(x_ua, x_ub, theta_u);

        // new f = [a, u, b], new g = [b, v, a]
        let (nf0, nf1, nf2) = (3 * f, 3 * f + 1, 3 * f + 2);
        let (ng0, ng1, ng2) = (3 * g, 3 * g + 1, 3 * g + 2);
        let moves = [(h_au, nf0), (h_ub, nf1), (h_bv, ng0), (h_va, ng1)];
        let saved: Vec<(usize, usize)> = moves
            .iter()
            .map(|&(old, _)| (self.twin[old], self.halfedge_edge[old]))
            .collect();
        let remap = |x: usize| {
            moves
                .iter()
                .find(|&&(old, _)| old == x)
                .map(|&(_, new)| new)
                .unwrap_or(x)
        };
        let e = self.halfedge_edge[h];
        self.faces[f] = [a, u, b];
        self.faces[g] = [b, v, a];
        for (i, &(_, new)) in moves.iter().enumerate() {
            let (tw, edge) = saved[i];
            let tw = if tw == NO_TWIN { NO_TWIN } else { remap(tw) };
            self.twin[new] = tw;
            self.halfedge_edge[new] = edge;
            if tw != NO_TWIN {
                self.twin[tw] = new;
            }
        }
        self.twin[nf2] = ng2;
        self.twin[ng2] = nf2;
        self.halfedge_edge[nf2] = e;
        self.halfedge_edge[ng2] = e;
        self.edge_lengths[e] = new_len;
        ([nf0, nf1, ng0, ng1], nf2)
    }

    /// Largest Delaunay excess over interior edges (<= 0 when Delaunay).
    pub fn max_delaunay_excess(&self) -> f64 {
        (0..self.twin.len())
            .filter_map(|h| self.delaunay_excess(h))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_with_bad_diagonal() -> IntrinsicTriangulation {
        // Thin rhombus where the long diagonal is not Delaunay.
        let p = [
            C64::new(-2.0, 0.0),
            C64::new(0.0, -0.5),
            C64::new(2.0, 0.0),
            C64::new(0.0, 0.5),
        ];
        IntrinsicTriangulation::from_planar(&p, &[[0, 1, 2], [0, 2, 3]]).unwrap()
    }

    #[test]
    fn planar_patch_counts() {
        let t = square_with_bad_diagonal();
        assert_eq!(t.edge_count(), 5);
        assert_eq!(t.euler_characteristic(), 1);
    }

    #[test]
    fn flip_restores_delaunay() {
        let mut t = square_with_bad_diagonal();
        assert!(t.max_delaunay_excess() > 0.0);
        let area_before: f64 = (0..2).map(|f| t.face_area(f).unwrap()).sum();
        let flips = t.make_delaunay(10).unwrap();
        assert_eq!(flips, 1);
        assert!(t.max_delaunay_excess() <= 1e-12);
        let area_after: f64 = (0..2).map(|f| t.face_area(f).unwrap()).sum();
        assert!((area_before - area_after).abs() < 1e-12);
        // the new diagonal joins (0, -0.5) and (0, 0.5)
        let e = t.halfedge_edge[2];
        assert!((t.edge_lengths[e] - 1.0).abs() < 1e-12);
    }
}
