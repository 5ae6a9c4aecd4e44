//! Closed surfaces built from a triangulated fundamental domain with side
//! pairings: the regular octagon with interior angles π/4 (genus 2), and a
//! flat square torus used to test the solver.

use crate::error::{Error, Result};
use crate::hyperbolic::{
    disk_distance, disk_midpoint, klein, orient, regular_polygon_circumradius,
    regular_polygon_inradius, Geometry, Mobius, C64,
};
use crate::mesh::{IntrinsicTriangulation, NO_TWIN};
use crate::spectrum::FuchsianRep;
use crate::tiling::TileSet;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;

/// Largest accepted subdivision level (about 65k vertices for the octagon).
pub const MAX_SUBDIVISION_LEVEL: usize = 7;

pub const OCTAGON_SIDES: usize = 8;

/// Side `i` of the octagon is glued to side `OCTAGON_PARTNER[i]`.
pub const OCTAGON_PARTNER: [usize; 8] = [2, 3, 0, 1, 6, 7, 4, 5];

/// Letter (see [`crate::spectrum::LETTERS`]) of the element carrying the base
/// copy across side `i`: `a, B, A, b, c, D, C, d`.
pub const OCTAGON_SIDE_LETTER: [u8; 8] = [0, 3, 1, 2, 4, 7, 5, 6];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SurfaceKind {
    #[serde(rename = "octagon8")]
    Octagon8,
    #[serde(rename = "torus-validation")]
    TorusValidation,
}

/// Gluing of side `side` to side `partner`: `map` sends the partner side onto
/// `side` and carries the base copy to its neighbour across `side`.
#[derive(Clone, Debug)]
pub struct SidePairing {
    pub side: usize,
    pub partner: usize,
    pub label: String,
    pub map: Mobius,
    /// `(raw vertex on partner side, raw vertex on this side)`.
    pub vertex_map: Vec<(usize, usize)>,
}

#[derive(Clone, Debug)]
pub struct DiscreteSurface {
    pub kind: SurfaceKind,
    pub geometry: Geometry,
    pub genus: usize,
    pub subdivision_level: usize,
    /// Vertices of one fundamental copy; boundary vertices appear once per side copy.
    pub raw_positions: Vec<C64>,
    pub raw_faces: Vec<[usize; 3]>,
    /// Raw vertices of each side, ordered from corner `i` to corner `i + 1`.
    pub side_vertices: Vec<Vec<usize>>,
    pub vertex_of_raw: Vec<usize>,
    pub representative: Vec<usize>,
    pub center_raw: usize,
    /// Mate of each raw half-edge `3f + k` and the side crossed to reach it.
    pub raw_twin: Vec<(usize, Option<usize>)>,
    pub side_pairings: Vec<SidePairing>,
    pub generators: Option<FuchsianRep>,
    /// Delaunay triangulation of the identified surface.
    pub mesh: IntrinsicTriangulation,
    pub vertex_area: Vec<f64>,
    pub curvature: Vec<f64>,
    star: Vec<Mobius>,
}

/// Side-pairing maps of the regular octagon centred at the origin.
pub fn octagon_side_maps() -> [Mobius; 8] {
    let r = regular_polygon_inradius(OCTAGON_SIDES, PI / 4.0);
    std::array::from_fn(|i| {
        let phi = i as f64 * PI / 4.0;
        let phi_p = OCTAGON_PARTNER[i] as f64 * PI / 4.0;
        Mobius::translation(phi, 2.0 * r) * Mobius::rotation(phi + PI - phi_p)
    })
}

/// Generators `a, b, c, d` of the regular octagon group in SL(2,R).
pub fn regular_octagon_rep() -> FuchsianRep {
    let p = octagon_side_maps();
    let find = |letter: u8| {
        let side = OCTAGON_SIDE_LETTER.iter().position(|&x| x == letter).unwrap();
        p[side].to_upper_half_plane()
    };
    FuchsianRep {
        generators: [find(0), find(2), find(4), find(6)],
    }
}

fn octagon_corner(k: usize) -> C64 {
    let rc = (regular_polygon_circumradius(OCTAGON_SIDES, PI / 4.0) / 2.0).tanh();
    C64::from_polar(rc, k as f64 * PI / 4.0 - PI / 8.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Tag {
    Center,
    Corner(usize),
    Side(usize, usize),
    Spoke(usize, usize),
    Interior(usize, usize, usize),
}

struct RawBuilder {
    positions: Vec<C64>,
    faces: Vec<[usize; 3]>,
    ids: HashMap<Tag, usize>,
}

impl RawBuilder {
    fn vertex(&mut self, tag: Tag, z: C64) -> usize {
        let next = self.positions.len();
        let id = *self.ids.entry(tag).or_insert(next);
        if id == next {
            self.positions.push(z);
        }
        id
    }
}

/// Fills grid positions of a sector (j toward `a`, l toward `b`) by recursive
/// geodesic midpoints.
fn subdivide(grid: &mut [C64], n: usize, idx: [(usize, usize); 3], z: [C64; 3], level: usize) {
    for k in 0..3 {
        grid[idx[k].0 * (n + 1) + idx[k].1] = z[k];
    }
    if level == 0 {
        return;
    }
    let mid = |p: (usize, usize), q: (usize, usize)| ((p.0 + q.0) / 2, (p.1 + q.1) / 2);
    let (i01, i12, i20) = (mid(idx[0], idx[1]), mid(idx[1], idx[2]), mid(idx[2], idx[0]));
    let (z01, z12, z20) = (
        disk_midpoint(z[0], z[1]),
        disk_midpoint(z[1], z[2]),
        disk_midpoint(z[2], z[0]),
    );
    subdivide(grid, n, [idx[0], i01, i20], [z[0], z01, z20], level - 1);
    subdivide(grid, n, [i01, idx[1], i12], [z01, z[1], z12], level - 1);
    subdivide(grid, n, [i20, i12, idx[2]], [z20, z12, z[2]], level - 1);
    subdivide(grid, n, [i01, i12, i20], [z01, z12, z20], level - 1);
}

fn check_level(level: usize) -> Result<()> {
    if level > MAX_SUBDIVISION_LEVEL {
        return Err(Error::Resource {
            what: "subdivision level",
            requested: level,
            cap: MAX_SUBDIVISION_LEVEL,
        });
    }
    Ok(())
}

/// Regular octagon with angles π/4, split into 8 sectors from the centre and
/// refined `level` times by geodesic midpoint subdivision.
pub fn build_genus2_surface(level: usize) -> Result<DiscreteSurface> {
    check_level(level)?;
    let n = 1usize << level;
    let mut raw = RawBuilder {
        positions: Vec::new(),
        faces: Vec::new(),
        ids: HashMap::new(),
    };
    let mut grid = vec![C64::new(0.0, 0.0); (n + 1) * (n + 1)];
    for k in 0..OCTAGON_SIDES {
        let k1 = (k + 1) % OCTAGON_SIDES;
        let corners = [C64::new(0.0, 0.0), octagon_corner(k), octagon_corner(k + 1)];
        subdivide(&mut grid, n, [(0, 0), (n, 0), (0, n)], corners, level);
        let tag = |j: usize, l: usize| {
            let i = n - j - l;
            if j == n {
                Tag::Corner(k)
            } else if l == n {
                Tag::Corner(k1)
            } else if i == n {
                Tag::Center
            } else if i == 0 {
                Tag::Side(k, l)
            } else if l == 0 {
                Tag::Spoke(k, i)
            } else if j == 0 {
                Tag::Spoke(k1, i)
            } else {
                Tag::Interior(k, j, l)
            }
        };
        let mut id = vec![usize::MAX; (n + 1) * (n + 1)];
        for j in 0..=n {
            for l in 0..=n - j {
                id[j * (n + 1) + l] = raw.vertex(tag(j, l), grid[j * (n + 1) + l]);
            }
        }
        let at = |j: usize, l: usize| id[j * (n + 1) + l];
        for j in 0..n {
            for l in 0..n - j {
                raw.faces.push([at(j, l), at(j + 1, l), at(j, l + 1)]);
                if j + l + 2 <= n {
                    raw.faces.push([at(j + 1, l), at(j + 1, l + 1), at(j, l + 1)]);
                }
            }
        }
    }
    let side_vertices: Vec<Vec<usize>> = (0..OCTAGON_SIDES)
        .map(|k| {
            let mut v = vec![raw.ids[&Tag::Corner(k)]];
            v.extend((1..n).map(|l| raw.ids[&Tag::Side(k, l)]));
            v.push(raw.ids[&Tag::Corner((k + 1) % OCTAGON_SIDES)]);
            v
        })
        .collect();
    let maps = octagon_side_maps();
    let labels = ["a", "b^-1", "a^-1", "b", "c", "d^-1", "c^-1", "d"];
    let pairings: Vec<(usize, usize, String, Mobius)> = (0..OCTAGON_SIDES)
        .map(|i| (i, OCTAGON_PARTNER[i], labels[i].to_string(), maps[i]))
        .collect();
    let star = octagon_star(&maps)?;
    let center = raw.ids[&Tag::Center];
    assemble(
        SurfaceKind::Octagon8,
        Geometry::Hyperbolic,
        2,
        level,
        raw.positions,
        raw.faces,
        side_vertices,
        center,
        pairings,
        Some(regular_octagon_rep()),
        star,
    )
}

/// Copies of the octagon sharing at least a corner with the base copy.
fn octagon_star(maps: &[Mobius; 8]) -> Result<Vec<Mobius>> {
    let tiles = TileSet::ball(maps, 4, 100_000)?;
    let corners: Vec<C64> = (0..OCTAGON_SIDES).map(octagon_corner).collect();
    Ok(tiles
        .tiles
        .iter()
        .filter(|t| {
            corners.iter().any(|&c| {
                let img = t.map.apply(c);
                corners.iter().any(|&d| (img - d).norm() < 1e-9)
            })
        })
        .map(|t| t.map)
        .collect())
}

fn translation(w: C64) -> Mobius {
    Mobius {
        a: C64::new(1.0, 0.0),
        b: w,
        c: C64::new(0.0, 0.0),
        d: C64::new(1.0, 0.0),
    }
}

/// Flat unit square torus with a `2^(level+1)` grid; solver test harness
/// with `K = 0` (outside the hyperbolic setting).
pub fn build_flat_torus(level: usize) -> Result<DiscreteSurface> {
    check_level(level)?;
    let n = 2usize << level;
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut positions = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            positions.push(C64::new(i as f64 / n as f64, j as f64 / n as f64));
        }
    }
    let mut faces = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v11, v01) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            faces.push([v00, v10, v11]);
            faces.push([v00, v11, v01]);
        }
    }
    let side_vertices = vec![
        (0..=n).map(|i| idx(i, 0)).collect(),
        (0..=n).map(|j| idx(n, j)).collect(),
        (0..=n).rev().map(|i| idx(i, n)).collect(),
        (0..=n).rev().map(|j| idx(0, j)).collect(),
    ];
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let pairings = vec![
        (0, 2, "y^-1".to_string(), translation(-i)),
        (1, 3, "x".to_string(), translation(one)),
        (2, 0, "y".to_string(), translation(i)),
        (3, 1, "x^-1".to_string(), translation(-one)),
    ];
    let mut star = Vec::new();
    for dx in -1..=1 {
        for dy in -1..=1 {
            star.push(translation(C64::new(dx as f64, dy as f64)));
        }
    }
    assemble(
        SurfaceKind::TorusValidation,
        Geometry::Euclidean,
        1,
        level,
        positions,
        faces,
        side_vertices,
        idx(n / 2, n / 2),
        pairings,
        None,
        star,
    )
}

pub fn build_surface(kind: SurfaceKind, level: usize) -> Result<DiscreteSurface> {
    match kind {
        SurfaceKind::Octagon8 => build_genus2_surface(level),
        SurfaceKind::TorusValidation => build_flat_torus(level),
    }
}

fn find_root(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    kind: SurfaceKind,
    geometry: Geometry,
    genus: usize,
    level: usize,
    positions: Vec<C64>,
    faces: Vec<[usize; 3]>,
    side_vertices: Vec<Vec<usize>>,
    center_raw: usize,
    pairings: Vec<(usize, usize, String, Mobius)>,
    generators: Option<FuchsianRep>,
    star: Vec<Mobius>,
) -> Result<DiscreteSurface> {
    for (f, t) in faces.iter().enumerate() {
        let (a, b, c) = (positions[t[0]], positions[t[1]], positions[t[2]]);
        let o = match geometry {
            Geometry::Hyperbolic => orient(klein(a), klein(b), klein(c)),
            Geometry::Euclidean => orient(a, b, c),
        };
        if !(o > 0.0) {
            return Err(Error::DegenerateFace {
                face: f,
                reason: "not positively oriented in the fundamental domain".into(),
            });
        }
    }

    let mut side_pairings = Vec::with_capacity(pairings.len());
    for (side, partner, label, map) in pairings {
        let mut vertex_map = Vec::with_capacity(side_vertices[partner].len());
        for &x in &side_vertices[partner] {
            let w = map.apply(positions[x]);
            let (y, err) = side_vertices[side]
                .iter()
                .map(|&y| (y, (positions[y] - w).norm()))
                .min_by(|p, q| p.1.total_cmp(&q.1))
                .expect("non-empty side");
            if err > 1e-9 {
                return Err(Error::Mesh(format!(
                    "side {partner} does not map onto side {side} (mismatch {err:.2e})"
                )));
            }
            vertex_map.push((x, y));
        }
        side_pairings.push(SidePairing {
            side,
            partner,
            label,
            map,
            vertex_map,
        });
    }

    let mut parent: Vec<usize> = (0..positions.len()).collect();
    for p in &side_pairings {
        for &(x, y) in &p.vertex_map {
            let (rx, ry) = (find_root(&mut parent, x), find_root(&mut parent, y));
            if rx != ry {
                parent[rx.max(ry)] = rx.min(ry);
            }
        }
    }
    let mut vertex_of_raw = vec![usize::MAX; positions.len()];
    let mut representative = Vec::new();
    let mut id_of_root = HashMap::new();
    for (r, slot) in vertex_of_raw.iter_mut().enumerate() {
        let root = find_root(&mut parent, r);
        let id = *id_of_root.entry(root).or_insert_with(|| {
            representative.push(r);
            representative.len() - 1
        });
        *slot = id;
    }
    let vertex_count = representative.len();

    // Twins: inside the domain by reversed raw edge, across a side through
    // the pairing of that side.
    let mut directed = HashMap::with_capacity(faces.len() * 3);
    for (f, t) in faces.iter().enumerate() {
        for k in 0..3 {
            directed.insert((t[k], t[(k + 1) % 3]), 3 * f + k);
        }
    }
    let mut to_partner: Vec<HashMap<usize, usize>> = vec![HashMap::new(); side_vertices.len()];
    for p in &side_pairings {
        for &(x, y) in &p.vertex_map {
            to_partner[p.side].insert(y, x);
        }
    }
    let mut twin = vec![NO_TWIN; faces.len() * 3];
    let mut crossed = vec![None; faces.len() * 3];
    for (f, t) in faces.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            let h = 3 * f + k;
            if let Some(&g) = directed.get(&(b, a)) {
                twin[h] = g;
                continue;
            }
            for (s, partner) in to_partner.iter().enumerate() {
                if let (Some(&pa), Some(&pb)) = (partner.get(&a), partner.get(&b)) {
                    if let Some(&g) = directed.get(&(pb, pa)) {
                        twin[h] = g;
                        crossed[h] = Some(s);
                        break;
                    }
                }
            }
            if twin[h] == NO_TWIN {
                return Err(Error::Mesh(format!("raw edge ({a}, {b}) has no mate")));
            }
        }
    }
    let raw_twin = twin.iter().copied().zip(crossed).collect();
    let id_faces: Vec<[usize; 3]> = faces.iter().map(|t| t.map(|r| vertex_of_raw[r])).collect();
    let raw_len = |h: usize| {
        let t = faces[h / 3];
        let (p, q) = (positions[t[h % 3]], positions[t[(h % 3 + 1) % 3]]);
        match geometry {
            Geometry::Hyperbolic => disk_distance(p, q),
            Geometry::Euclidean => (p - q).norm(),
        }
    };
    let mut mesh = IntrinsicTriangulation::from_twins(geometry, vertex_count, id_faces, twin, raw_len)?;
    let max_flips = 100 * mesh.edge_count() + 100;
    mesh.make_delaunay(max_flips)?;

    let vertex_area = lumped_areas(&mesh)?;
    let curvature = vec![geometry.curvature(); vertex_count];
    Ok(DiscreteSurface {
        kind,
        geometry,
        genus,
        subdivision_level: level,
        raw_positions: positions,
        raw_faces: faces,
        side_vertices,
        vertex_of_raw,
        representative,
        center_raw,
        raw_twin,
        side_pairings,
        generators,
        mesh,
        vertex_area,
        curvature,
        star,
    })
}

/// Barycentric lumped areas: each face gives a third of its area to each corner.
pub fn lumped_areas(mesh: &IntrinsicTriangulation) -> Result<Vec<f64>> {
    let mut area = vec![0.0; mesh.vertex_count];
    for (f, t) in mesh.faces.iter().enumerate() {
        let a = mesh.face_area(f).ok_or_else(|| Error::DegenerateFace {
            face: f,
            reason: "side lengths violate the triangle inequality".into(),
        })?;
        if !(a > 0.0) {
            return Err(Error::DegenerateFace {
                face: f,
                reason: "zero area".into(),
            });
        }
        for &v in t {
            area[v] += a / 3.0;
        }
    }
    Ok(area)
}

impl DiscreteSurface {
    pub fn vertex_count(&self) -> usize {
        self.mesh.vertex_count
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.mesh.euler_characteristic()
    }

    pub fn expected_euler_characteristic(&self) -> i64 {
        2 - 2 * self.genus as i64
    }

    pub fn total_area(&self) -> f64 {
        self.vertex_area.iter().sum()
    }

    pub fn position(&self, v: usize) -> C64 {
        self.raw_positions[self.representative[v]]
    }

    pub fn center_vertex(&self) -> usize {
        self.vertex_of_raw[self.center_raw]
    }

    /// Letter naming the element that carries the base copy across `side`.
    pub fn side_letter(&self, side: usize) -> char {
        match self.kind {
            SurfaceKind::Octagon8 => crate::spectrum::LETTERS[OCTAGON_SIDE_LETTER[side] as usize],
            SurfaceKind::TorusValidation => ['Y', 'x', 'y', 'X'][side],
        }
    }

    pub fn side_maps(&self) -> Vec<Mobius> {
        self.side_pairings.iter().map(|p| p.map).collect()
    }

    pub fn max_edge_length(&self) -> f64 {
        self.mesh.edge_lengths.iter().copied().fold(0.0, f64::max)
    }

    pub fn model_distance(&self, p: C64, q: C64) -> f64 {
        match self.geometry {
            Geometry::Hyperbolic => disk_distance(p, q),
            Geometry::Euclidean => (p - q).norm(),
        }
    }

    /// Distance on the surface between two vertices, exact for pairs whose
    /// shortest connection stays within the copies adjacent to the base copy.
    pub fn distance(&self, v: usize, w: usize) -> f64 {
        let p = self.position(v);
        let q = self.position(w);
        self.star
            .iter()
            .map(|g| self.model_distance(p, g.apply(q)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance from each vertex to the nearest of `sources` (infinite when empty).
    pub fn distance_to_set(&self, sources: &[usize]) -> Vec<f64> {
        (0..self.vertex_count())
            .map(|v| {
                sources
                    .iter()
                    .map(|&s| self.distance(v, s))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    /// Midpoint vertices of sides 0, 1, 4, 5 of the octagon: four distinct
    /// points spread over the surface. Requires level >= 1.
    pub fn symmetric_simple_zeros(&self) -> Result<Vec<usize>> {
        if self.kind != SurfaceKind::Octagon8 || self.subdivision_level == 0 {
            return Err(Error::Spec(
                "symmetric zeros need the octagon surface at subdivision level >= 1".into(),
            ));
        }
        Ok([0, 1, 4, 5]
            .iter()
            .map(|&s| {
                let side = &self.side_vertices[s];
                self.vertex_of_raw[side[side.len() / 2]]
            })
            .collect())
    }

    /// Largest displacement between a pairing's image of a side vertex and
    /// its recorded mate.
    pub fn pairing_mismatch(&self) -> f64 {
        self.side_pairings
            .iter()
            .flat_map(|p| {
                p.vertex_map
                    .iter()
                    .map(move |&(x, y)| (p.map.apply(self.raw_positions[x]) - self.raw_positions[y]).norm())
            })
            .fold(0.0, f64::max)
    }

    pub fn export(&self) -> SurfaceExport {
        SurfaceExport {
            kind: self.kind,
            genus: self.genus,
            subdivision_level: self.subdivision_level,
            vertices: self.raw_positions.iter().map(|z| [z.re, z.im]).collect(),
            faces: self.raw_faces.clone(),
            vertex_ids: self.vertex_of_raw.clone(),
            pairings: self
                .side_pairings
                .iter()
                .map(|p| PairingExport {
                    side: p.side,
                    partner: p.partner,
                    label: p.label.clone(),
                    vertex_map: p.vertex_map.clone(),
                })
                .collect(),
            generators: self.generators.clone(),
            intrinsic_faces: self.mesh.faces.clone(),
            edge_lengths: self.mesh.edge_lengths.clone(),
            vertex_area: self.vertex_area.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PairingExport {
    pub side: usize,
    pub partner: usize,
    pub label: String,
    pub vertex_map: Vec<(usize, usize)>,
}

/// Mesh dump: fundamental-domain vertices and faces, pairings, generator
/// matrices (row-major) and the intrinsic triangulation used by the solver.
#[derive(Clone, Debug, Serialize)]
pub struct SurfaceExport {
    pub kind: SurfaceKind,
    pub genus: usize,
    pub subdivision_level: usize,
    pub vertices: Vec<[f64; 2]>,
    pub faces: Vec<[usize; 3]>,
    pub vertex_ids: Vec<usize>,
    pub pairings: Vec<PairingExport>,
    pub generators: Option<FuchsianRep>,
    pub intrinsic_faces: Vec<[usize; 3]>,
    pub edge_lengths: Vec<f64>,
    pub vertex_area: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const RELATION_TOLERANCE: f64 = 1e-10;

/// Report-only check of the surface invariants.
pub fn validate_surface(s: &DiscreteSurface) -> ValidationReport {
    let mut checks = Vec::new();
    let mut push = |name: &str, measured: f64, tolerance: f64, pass: bool| {
        checks.push(Check {
            name: name.into(),
            pass,
            measured,
            tolerance,
        })
    };
    let chi = s.euler_characteristic();
    let expected = s.expected_euler_characteristic();
    push("euler_characteristic", chi as f64, 0.0, chi == expected);

    let min_len = s.mesh.edge_lengths.iter().copied().fold(f64::INFINITY, f64::min);
    push("edge_lengths_positive", min_len, 0.0, min_len > 0.0);

    let margin = s.mesh.triangle_inequality_margin();
    push("triangle_inequality_margin", margin, 0.0, margin > 0.0);

    let target = 2.0 * PI * expected as f64;
    let gb: f64 = match lumped_areas(&s.mesh) {
        Ok(area) => area.iter().zip(&s.curvature).map(|(a, k)| a * k).sum(),
        Err(_) => f64::NAN,
    };
    let gb_tol = 1e-6 * target.abs().max(1.0);
    let gb_defect = (gb - target).abs();
    push("gauss_bonnet_defect", gb_defect, gb_tol, gb_defect <= gb_tol);

    if let Some(rep) = &s.generators {
        let res = rep.relation_residual();
        push("relation_residual", res, RELATION_TOLERANCE, res <= RELATION_TOLERANCE);
        let det = rep
            .generators
            .iter()
            .map(|g| (g.det() - 1.0).abs())
            .fold(0.0, f64::max);
        push("generator_determinant", det, FuchsianRep::DET_TOLERANCE, det <= FuchsianRep::DET_TOLERANCE);
    }

    let mismatch = s.pairing_mismatch();
    push("side_pairing_mismatch", mismatch, 1e-9, mismatch <= 1e-9);

    let excess = s.mesh.max_delaunay_excess();
    push("delaunay_excess", excess, 1e-9, excess <= 1e-9);

    ValidationReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Side of the regular octagon with angle π/4 from the right triangle
    /// (centre, side midpoint, corner): cos(π/8) = cosh(s/2) sin(π/8), by bisection.
    fn octagon_side_oracle() -> f64 {
        let f = |s: f64| (s / 2.0).cosh() * (PI / 8.0).sin() - (PI / 8.0).cos();
        let (mut lo, mut hi) = (0.0, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn level_zero_counts_and_side() {
        let s = build_genus2_surface(0).unwrap();
        assert_eq!(s.euler_characteristic(), -2);
        assert_eq!(s.vertex_count(), 2);
        let side = disk_distance(octagon_corner(0), octagon_corner(1));
        assert!((side - octagon_side_oracle()).abs() < 1e-12);
        assert!((octagon_side_oracle() - 3.057_141_838_962).abs() < 1e-9);
    }

    #[test]
    fn vertex_counts_grow_fourfold() {
        let counts: Vec<usize> = (0..4).map(|l| build_genus2_surface(l).unwrap().vertex_count()).collect();
        assert_eq!(counts, vec![2, 14, 62, 254]);
    }

    #[test]
    fn relation_holds() {
        let rep = regular_octagon_rep();
        assert!(rep.relation_residual() < 1e-12);
    }

    #[test]
    fn star_has_forty_nine_copies() {
        let s = build_genus2_surface(0).unwrap();
        assert_eq!(s.star.len(), 49);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            build_genus2_surface(MAX_SUBDIVISION_LEVEL + 1),
            Err(Error::Resource { .. })
        ));
    }

    #[test]
    fn torus_is_flat_with_unit_area() {
        let s = build_flat_torus(1).unwrap();
        assert_eq!(s.euler_characteristic(), 0);
        assert_eq!(s.vertex_count(), 16);
        assert!((s.total_area() - 1.0).abs() < 1e-14);
        assert!(validate_surface(&s).all_pass());
    }
}
