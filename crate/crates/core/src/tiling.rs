//! Copies of the fundamental domain in the disk, enumerated breadth-first by
//! crossing sides. Duplicate copies are detected by the image of the origin
//! and confirmed by comparing matrices.

use crate::error::{Error, Result};
use crate::hyperbolic::{Mobius, C64};
use std::collections::HashMap;

const CELL: f64 = 1e-8;
const MATRIX_MATCH: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct Tile {
    /// Sides crossed from the base copy, in order.
    pub word: Vec<usize>,
    pub map: Mobius,
    pub center: C64,
}

#[derive(Clone, Debug, Default)]
pub struct TileSet {
    pub tiles: Vec<Tile>,
    index: HashMap<(i64, i64), Vec<usize>>,
}

fn cell(z: C64) -> (i64, i64) {
    ((z.re / CELL).floor() as i64, (z.im / CELL).floor() as i64)
}

impl TileSet {
    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    /// Index of the copy carried by `m`, if present.
    pub fn find(&self, m: &Mobius) -> Option<usize> {
        let z = m.apply(C64::new(0.0, 0.0));
        let (cx, cy) = cell(z);
        let scale = m.max_abs_entry().max(1.0);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.index.get(&(cx + dx, cy + dy)) {
                    for &i in ids {
                        let t = &self.tiles[i];
                        if (t.center - z).norm() < CELL
                            && t.map.projective_distance(m) <= MATRIX_MATCH * scale
                        {
                            return Some(i);
                        }
                    }
                }
            }
        }
        None
    }

    fn push(&mut self, word: Vec<usize>, map: Mobius) -> usize {
        let center = map.apply(C64::new(0.0, 0.0));
        let id = self.tiles.len();
        self.index.entry(cell(center)).or_default().push(id);
        self.tiles.push(Tile { word, map, center });
        id
    }

    /// All distinct copies reachable by crossing at most `radius` sides.
    /// `side_maps[i]` carries the base copy across side `i`.
    pub fn ball(side_maps: &[Mobius], radius: usize, cap: usize) -> Result<TileSet> {
        let mut set = TileSet::default();
        set.push(Vec::new(), Mobius::identity());
        let mut layer = vec![0usize];
        for _ in 0..radius {
            let mut next = Vec::new();
            for &i in &layer {
                for (s, p) in side_maps.iter().enumerate() {
                    let m = set.tiles[i].map * *p;
                    if set.find(&m).is_none() {
                        if set.len() >= cap {
                            return Err(Error::Resource {
                                what: "fundamental-domain copies",
                                requested: set.len() + 1,
                                cap,
                            });
                        }
                        let mut w = set.tiles[i].word.clone();
                        w.push(s);
                        next.push(set.push(w, m));
                    }
                }
            }
            layer = next;
        }
        Ok(set)
    }
}
