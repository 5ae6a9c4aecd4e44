//! Volume entropy by orbit counting: the fundamental mesh is copied over a
//! ball of the tiling, glued along paired sides, weighted by the conformal
//! metric `e^{2u} h`, and the growth rate of `#{γ : d(x₀, γx₀) ≤ R}` is fitted.

use crate::error::{Error, Result};
use crate::field::fmt17;
use crate::hyperbolic::Mobius;
use crate::surface::DiscreteSurface;
use crate::tiling::TileSet;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write;

pub const MAX_WORD_RADIUS: usize = 6;
pub const MAX_COPIES: usize = 400_000;
pub const MAX_NODES: usize = 30_000_000;

#[derive(Clone, Debug, Serialize)]
pub struct CopyInfo {
    /// Sides crossed from the base copy.
    pub sides: Vec<usize>,
    pub word: String,
    #[serde(skip)]
    pub map: Mobius,
}

/// Graph over `(copy, vertex)` nodes with adjacency in CSR form. Edge `e`
/// carries its hyperbolic length and the surface vertices of its endpoints,
/// so the same graph can be reweighted for any conformal factor.
#[derive(Clone, Debug)]
pub struct LiftedGraph {
    pub copies: Vec<CopyInfo>,
    pub node_count: usize,
    pub offsets: Vec<usize>,
    pub targets: Vec<usize>,
    pub edge_of: Vec<usize>,
    pub base_length: Vec<f64>,
    pub edge_vertices: Vec<(usize, usize)>,
    pub weights: Vec<f64>,
    pub base_node: usize,
    /// Image of the base vertex in each copy.
    pub orbit_nodes: Vec<usize>,
    pub frontier: Vec<bool>,
    /// Nodes of the base copy with an edge leaving its interior.
    pub base_boundary: Vec<usize>,
    /// Distance from the base node to the nearest frontier node.
    pub frontier_distance: f64,
    /// Distance from the base node to the boundary of its own copy.
    pub inner_radius: f64,
    /// `frontier_distance + inner_radius`: orbit distances and counts below
    /// this radius equal those of the untruncated cover.
    pub frontier_radius: f64,
}

/// Upper estimate of the number of copies for a word radius (free-group ball).
pub fn copy_count_estimate(word_radius: usize) -> usize {
    (0..word_radius).fold(1usize, |acc, k| acc.saturating_add(8usize.saturating_mul(7usize.saturating_pow(k as u32))))
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Edge of the lifted graph in the frame of one copy: `b` lies in the same
/// copy or in the neighbour across `side`.
struct Link {
    a: usize,
    b: usize,
    side: Option<usize>,
    length: f64,
}

/// Mesh edges plus the diagonal of every pair of adjacent triangles, each
/// with its exact model length.
fn link_templates(surface: &DiscreteSurface, maps: &[Mobius]) -> Vec<Link> {
    let pos = &surface.raw_positions;
    let faces = &surface.raw_faces;
    let mut links = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for t in faces {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            if seen.insert((a.min(b), a.max(b))) {
                links.push(Link {
                    a,
                    b,
                    side: None,
                    length: surface.model_distance(pos[a], pos[b]),
                });
            }
        }
    }
    for (h, &(g, side)) in surface.raw_twin.iter().enumerate() {
        let p = faces[h / 3][(h % 3 + 2) % 3];
        let q = faces[g / 3][(g % 3 + 2) % 3];
        match side {
            None if h < g => links.push(Link {
                a: p,
                b: q,
                side: None,
                length: surface.model_distance(pos[p], pos[q]),
            }),
            None => {}
            Some(s) => links.push(Link {
                a: p,
                b: q,
                side: Some(s),
                length: surface.model_distance(pos[p], maps[s].apply(pos[q])),
            }),
        }
    }
    links
}

/// Lift the mesh to every copy reachable in `word_radius` side crossings.
pub fn build_orbit_graph(surface: &DiscreteSurface, u: &[f64], word_radius: usize) -> Result<LiftedGraph> {
    if word_radius > MAX_WORD_RADIUS {
        return Err(Error::Resource {
            what: "entropy word radius (copy-count estimate in `requested`)",
            requested: copy_count_estimate(word_radius),
            cap: copy_count_estimate(MAX_WORD_RADIUS),
        });
    }
    if u.len() != surface.vertex_count() {
        return Err(Error::Shape {
            expected: surface.vertex_count(),
            got: u.len(),
        });
    }
    let maps = surface.side_maps();
    let tiles = TileSet::ball(&maps, word_radius, MAX_COPIES)?;
    let raw = surface.raw_positions.len();
    let total = tiles.len().saturating_mul(raw);
    if total > MAX_NODES {
        return Err(Error::Resource {
            what: "lifted graph nodes",
            requested: total,
            cap: MAX_NODES,
        });
    }

    let sides = maps.len();
    let mut neighbour = vec![None; tiles.len() * sides];
    for (c, tile) in tiles.tiles.iter().enumerate() {
        for (s, m) in maps.iter().enumerate() {
            neighbour[c * sides + s] = tiles.find(&(tile.map * *m));
        }
    }

    let mut parent: Vec<usize> = (0..total).collect();
    let mut open_side = vec![false; total];
    for c in 0..tiles.len() {
        for p in &surface.side_pairings {
            match neighbour[c * sides + p.side] {
                Some(d) => {
                    for &(x, y) in &p.vertex_map {
                        let (a, b) = (find(&mut parent, c * raw + y), find(&mut parent, d * raw + x));
                        if a != b {
                            parent[a.max(b)] = a.min(b);
                        }
                    }
                }
                None => {
                    for &r in &surface.side_vertices[p.side] {
                        open_side[c * raw + r] = true;
                    }
                }
            }
        }
    }
    let mut node_of = vec![usize::MAX; total];
    let mut node_count = 0;
    for i in 0..total {
        let r = find(&mut parent, i);
        if node_of[r] == usize::MAX {
            node_of[r] = node_count;
            node_count += 1;
        }
        node_of[i] = node_of[r];
    }

    let links = link_templates(surface, &maps);
    let mut frontier = vec![false; node_count];
    for i in 0..total {
        if open_side[i] {
            frontier[node_of[i]] = true;
        }
    }
    let mut edges: Vec<(usize, usize, usize)> = Vec::with_capacity(tiles.len() * links.len());
    for c in 0..tiles.len() {
        for (k, l) in links.iter().enumerate() {
            let na = node_of[c * raw + l.a];
            let target = match l.side {
                None => Some(c),
                Some(s) => neighbour[c * sides + s],
            };
            let Some(d) = target else {
                frontier[na] = true;
                continue;
            };
            let nb = node_of[d * raw + l.b];
            if na != nb {
                edges.push((na.min(nb), na.max(nb), k));
            }
        }
    }
    edges.sort_unstable();
    edges.dedup_by(|x, y| x.0 == y.0 && x.1 == y.1);

    let mut base_length = Vec::with_capacity(edges.len());
    let mut edge_vertices = Vec::with_capacity(edges.len());
    let mut degree = vec![0usize; node_count + 1];
    for &(a, b, k) in &edges {
        let l = &links[k];
        base_length.push(l.length);
        edge_vertices.push((surface.vertex_of_raw[l.a], surface.vertex_of_raw[l.b]));
        degree[a + 1] += 1;
        degree[b + 1] += 1;
    }
    for i in 0..node_count {
        degree[i + 1] += degree[i];
    }
    let offsets = degree;
    let mut fill = offsets.clone();
    let mut targets = vec![0usize; 2 * edges.len()];
    let mut edge_of = vec![0usize; 2 * edges.len()];
    for (e, &(a, b, _)) in edges.iter().enumerate() {
        targets[fill[a]] = b;
        edge_of[fill[a]] = e;
        fill[a] += 1;
        targets[fill[b]] = a;
        edge_of[fill[b]] = e;
        fill[b] += 1;
    }

    // Every edge leaving the interior of the base copy starts at a gate.
    let mut base_boundary: Vec<usize> = surface
        .side_vertices
        .iter()
        .flatten()
        .copied()
        .chain(links.iter().filter(|l| l.side.is_some()).map(|l| l.a))
        .map(|r| node_of[r])
        .collect();
    base_boundary.sort_unstable();
    base_boundary.dedup();
    let center = surface.center_raw;
    let orbit_nodes: Vec<usize> = (0..tiles.len()).map(|c| node_of[c * raw + center]).collect();
    let copies = tiles
        .tiles
        .iter()
        .map(|t| CopyInfo {
            sides: t.word.clone(),
            word: if t.word.is_empty() {
                "1".to_string()
            } else {
                t.word.iter().map(|&s| surface.side_letter(s)).collect()
            },
            map: t.map,
        })
        .collect();
    let mut g = LiftedGraph {
        copies,
        node_count,
        offsets,
        targets,
        edge_of,
        weights: base_length.clone(),
        base_length,
        edge_vertices,
        base_node: orbit_nodes[0],
        orbit_nodes,
        frontier,
        base_boundary,
        frontier_distance: 0.0,
        inner_radius: 0.0,
        frontier_radius: 0.0,
    };
    g.reweight(u)?;
    Ok(g)
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then_with(|| o.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitDistance {
    pub word: String,
    pub distance: f64,
    pub trusted: bool,
}

impl LiftedGraph {
    pub fn edge_count(&self) -> usize {
        self.base_length.len()
    }

    /// Weights `ℓ_h(e) · exp((u(a) + u(b)) / 2)`.
    pub fn conformal_weights(&self, u: &[f64]) -> Result<Vec<f64>> {
        let w: Vec<f64> = self
            .edge_vertices
            .iter()
            .zip(&self.base_length)
            .map(|(&(a, b), l)| l * (0.5 * (u[a] + u[b])).exp())
            .collect();
        if let Some(e) = w.iter().position(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::Domain(format!("lifted edge {e} has weight {}", w[e])));
        }
        Ok(w)
    }

    /// Replace the weights by the conformal ones of `u`; refreshes the frontier radius.
    pub fn reweight(&mut self, u: &[f64]) -> Result<()> {
        self.weights = self.conformal_weights(u)?;
        self.refresh_frontier()
    }

    /// Multiply every weight by `c`.
    pub fn scale(&mut self, c: f64) -> Result<()> {
        self.weights.iter_mut().for_each(|w| *w *= c);
        self.refresh_frontier()
    }

    fn refresh_frontier(&mut self) -> Result<()> {
        let d = self.dijkstra(&self.weights)?;
        (self.frontier_distance, self.inner_radius, self.frontier_radius) = self.radii(&d);
        Ok(())
    }

    /// `(frontier distance, inner radius, their sum)` for distances `d`.
    fn radii(&self, d: &[f64]) -> (f64, f64, f64) {
        let fd = d
            .iter()
            .zip(&self.frontier)
            .filter(|(_, &f)| f)
            .map(|(&x, _)| x)
            .fold(f64::INFINITY, f64::min);
        // Deck transformations preserve weights, so every copy has the same
        // inner radius; it is exact here when the frontier lies beyond it.
        let inner = self.base_boundary.iter().map(|&v| d[v]).fold(f64::INFINITY, f64::min).min(fd);
        (fd, inner, fd + inner)
    }

    /// Single-source distances from the base node.
    pub fn shortest_paths(&self) -> Result<Vec<f64>> {
        self.dijkstra(&self.weights)
    }

    fn dijkstra(&self, weights: &[f64]) -> Result<Vec<f64>> {
        let mut dist = vec![f64::INFINITY; self.node_count];
        let mut heap = BinaryHeap::new();
        dist[self.base_node] = 0.0;
        heap.push(Entry(0.0, self.base_node));
        while let Some(Entry(d, v)) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for k in self.offsets[v]..self.offsets[v + 1] {
                let w = self.targets[k];
                let nd = d + weights[self.edge_of[k]];
                if nd < dist[w] {
                    dist[w] = nd;
                    heap.push(Entry(nd, w));
                }
            }
        }
        if let Some(v) = dist.iter().position(|d| d.is_infinite()) {
            return Err(Error::Disconnected(format!("node {v} is unreachable from the base node")));
        }
        Ok(dist)
    }

    fn orbit_from(&self, d: &[f64], frontier_radius: f64) -> Vec<OrbitDistance> {
        let mut out: Vec<OrbitDistance> = self
            .copies
            .iter()
            .zip(&self.orbit_nodes)
            .map(|(c, &n)| OrbitDistance {
                word: c.word.clone(),
                distance: d[n],
                trusted: d[n] <= frontier_radius,
            })
            .collect();
        out.sort_by(|a, b| a.distance.total_cmp(&b.distance));
        out
    }

    /// Entropy of the conformal metric `e^{2u} h` without touching the stored weights.
    pub fn estimate_for(&self, u: &[f64], window: WindowSpec) -> Result<EntropyEstimate> {
        let w = self.conformal_weights(u)?;
        let d = self.dijkstra(&w)?;
        let (_, _, fr) = self.radii(&d);
        let od: Vec<f64> = self.orbit_from(&d, fr).into_iter().map(|o| o.distance).collect();
        entropy_estimate(&od, fr, window.resolve(fr))
    }
}

/// Distances from the base point to every orbit point, ascending; entries
/// beyond the frontier radius are marked untrusted.
pub fn orbit_distances(graph: &LiftedGraph) -> Result<Vec<OrbitDistance>> {
    let d = graph.shortest_paths()?;
    Ok(graph.orbit_from(&d, graph.frontier_radius))
}

/// Fit window: absolute radii, or fractions of the frontier radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WindowSpec {
    Absolute { r_min: f64, r_max: f64 },
    FrontierFraction { lower: f64, upper: f64 },
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec::FrontierFraction { lower: 0.5, upper: 1.0 }
    }
}

impl WindowSpec {
    pub fn resolve(&self, frontier_radius: f64) -> (f64, f64) {
        match *self {
            WindowSpec::Absolute { r_min, r_max } => (r_min, r_max),
            WindowSpec::FrontierFraction { lower, upper } => (lower * frontier_radius, upper * frontier_radius),
        }
    }
}

pub const FIT_POINTS: usize = 256;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyEstimate {
    pub e_hat: f64,
    pub window: (f64, f64),
    pub frontier_radius: f64,
    /// RMS residual of the linear fit of `log N(R)`.
    pub fit_residual: f64,
    pub count_at_r_max: usize,
    pub increments_in_window: usize,
    /// `(R, N(R))` at the fit grid.
    pub counts: Vec<(f64, usize)>,
    /// Upper bound on the Lorentzian Hausdorff dimension.
    pub lhdim_upper_bound: f64,
}

/// Least-squares slope of `log N(R)` on a uniform grid over `window`.
pub fn entropy_estimate(distances: &[f64], frontier_radius: f64, window: (f64, f64)) -> Result<EntropyEstimate> {
    let (r_min, r_max) = window;
    if !(r_min < r_max) || !(r_min >= 0.0) {
        return Err(Error::Window(format!("empty window [{r_min}, {r_max}]")));
    }
    if r_max > frontier_radius {
        return Err(Error::Window(format!(
            "window end {r_max} lies beyond the frontier radius {frontier_radius}"
        )));
    }
    let mut d: Vec<f64> = distances.to_vec();
    d.sort_by(f64::total_cmp);
    let count = |r: f64| d.partition_point(|&x| x <= r);
    let increments = {
        let mut v: Vec<f64> = d.iter().copied().filter(|&x| x > r_min && x <= r_max).collect();
        v.dedup();
        v.len()
    };
    if increments < 3 {
        return Err(Error::Window(format!(
            "window [{r_min}, {r_max}] holds {increments} count increments, need 3"
        )));
    }
    let m = FIT_POINTS;
    let step = (r_max - r_min) / (m - 1) as f64;
    let counts: Vec<(f64, usize)> = (0..m)
        .map(|i| {
            let r = if i + 1 == m { r_max } else { r_min + step * i as f64 };
            (r, count(r))
        })
        .collect();
    if counts[0].1 == 0 {
        return Err(Error::Window(format!("no orbit point within R = {r_min}")));
    }
    let xs: Vec<f64> = counts.iter().map(|c| c.0).collect();
    let ys: Vec<f64> = counts.iter().map(|c| (c.1 as f64).ln()).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    let fit_residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / m as f64)
        .sqrt();
    Ok(EntropyEstimate {
        e_hat: slope,
        window,
        frontier_radius,
        fit_residual,
        count_at_r_max: count(r_max),
        increments_in_window: increments,
        counts,
        lhdim_upper_bound: slope,
    })
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Orbit distances of `graph` fitted over the resolved window.
pub fn estimate_from_graph(graph: &LiftedGraph, window: WindowSpec) -> Result<EntropyEstimate> {
    let d: Vec<f64> = orbit_distances(graph)?.into_iter().map(|o| o.distance).collect();
    entropy_estimate(&d, graph.frontier_radius, window.resolve(graph.frontier_radius))
}

impl EntropyEstimate {
    /// `R,count` rows.
    pub fn counts_csv(&self) -> String {
        let mut s = String::from("R,count\n");
        for (r, c) in &self.counts {
            writeln!(s, "{},{c}", fmt17(*r)).unwrap();
        }
        s
    }
}
