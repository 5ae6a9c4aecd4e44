//! Surface-group words, Fuchsian representations and translation-length
//! spectra. The Hölder exponent of the boundary homeomorphism between two
//! Fuchsian structures is estimated as the smallest length ratio over an
//! enumerated set of conjugacy classes.

use crate::error::{Error, Result};
use crate::hyperbolic::Mat2;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;

/// Largest word length accepted by [`enumerate_classes`] (about 10^6 classes).
pub const MAX_WORD_LENGTH: usize = 8;

/// Letters `a, A, b, B, c, C, d, D`; capitals are inverses. Letter `x` has
/// inverse `x ^ 1` and generator index `x / 2`.
pub const LETTERS: [char; 8] = ['a', 'A', 'b', 'B', 'c', 'C', 'd', 'D'];

#[inline]
pub fn inverse_letter(x: u8) -> u8 {
    x ^ 1
}

/// Word in the four surface-group generators and their inverses.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|&x| inverse_letter(x)).collect())
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[1] != inverse_letter(w[0]))
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.is_reduced()
            && match (self.0.first(), self.0.last()) {
                (Some(&f), Some(&l)) => self.0.len() == 1 || f != inverse_letter(l),
                _ => true,
            }
    }

    /// Lexicographically smallest rotation of the word or of its inverse.
    pub fn canonical_class(&self) -> Word {
        let n = self.0.len();
        let inv = self.inverse();
        let mut best = self.0.clone();
        for src in [&self.0, &inv.0] {
            for s in 0..n {
                let rot: Vec<u8> = src[s..].iter().chain(&src[..s]).copied().collect();
                if rot < best {
                    best = rot;
                }
            }
        }
        Word(best)
    }

    pub fn parse(s: &str) -> Result<Word> {
        s.chars()
            .map(|c| {
                LETTERS
                    .iter()
                    .position(|&l| l == c)
                    .map(|p| p as u8)
                    .ok_or_else(|| Error::Representation(format!("unknown letter {c:?} in word {s:?}")))
            })
            .collect::<Result<Vec<u8>>>()
            .map(Word)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for &x in &self.0 {
            write!(f, "{}", LETTERS[x as usize])?;
        }
        Ok(())
    }
}

impl From<Word> for String {
    fn from(w: Word) -> String {
        w.to_string()
    }
}

impl TryFrom<String> for Word {
    type Error = Error;
    fn try_from(s: String) -> Result<Word> {
        if s == "1" {
            return Ok(Word(Vec::new()));
        }
        Word::parse(&s)
    }
}

/// Representation of the genus-2 surface group in PSL(2,R), given by the
/// images of `a, b, c, d` with `[a,b][c,d] = ±1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuchsianRep {
    pub generators: [Mat2; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonHyperbolicWord {
    pub word: Word,
    pub trace_abs: f64,
}

impl FuchsianRep {
    pub const DET_TOLERANCE: f64 = 1e-12;
    pub const RELATION_TOLERANCE: f64 = 1e-8;

    /// Checked constructor: unit determinants and the surface relation.
    pub fn new(generators: [Mat2; 4]) -> Result<Self> {
        let rep = Self { generators };
        rep.validate()?;
        Ok(rep)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, g) in self.generators.iter().enumerate() {
            if !g.det().is_finite() || (g.det() - 1.0).abs() > Self::DET_TOLERANCE {
                return Err(Error::Representation(format!(
                    "generator {} has determinant {}",
                    LETTERS[2 * i],
                    g.det()
                )));
            }
        }
        let res = self.relation_residual();
        if !(res <= Self::RELATION_TOLERANCE) {
            return Err(Error::Representation(format!(
                "relation [a,b][c,d] residual {res:.3e} exceeds {:.0e}",
                Self::RELATION_TOLERANCE
            )));
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let rep: FuchsianRep = serde_json::from_str(s)?;
        rep.validate()?;
        Ok(rep)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrices serialize")
    }

    pub fn letter(&self, x: u8) -> Mat2 {
        let g = self.generators[(x / 2) as usize];
        if x.is_multiple_of(2) {
            g
        } else {
            g.inverse_unimodular()
        }
    }

    pub fn evaluate(&self, w: &Word) -> Mat2 {
        w.0.iter()
            .fold(Mat2::identity(), |acc, &x| acc * self.letter(x))
    }

    /// Max-entry defect of `[a,b][c,d]` from `±I`.
    pub fn relation_residual(&self) -> f64 {
        let w = Word::parse("abABcdCD").expect("static word");
        self.evaluate(&w).projective_distance(&Mat2::identity())
    }

    /// `g ρ g⁻¹`.
    pub fn conjugate(&self, g: &Mat2) -> Self {
        let gi = g.inverse();
        Self {
            generators: self.generators.map(|m| *g * m * gi),
        }
    }

    /// Twist deformation along the axis of `a`: `b -> b a^s`. Since `a^s`
    /// commutes with `a`, the relation is preserved and the result stays
    /// Fuchsian for every real `s`.
    pub fn twist_along_a(&self, s: f64) -> Result<Self> {
        let a = self.generators[0];
        let p = a
            .hyperbolic_power(s)
            .ok_or_else(|| Error::Representation("generator a is not hyperbolic".into()))?;
        let mut g = self.generators;
        g[1] = g[1] * p;
        Ok(Self { generators: g })
    }

    /// Words up to `max_len` whose image is not hyperbolic (|trace| <= 2).
    pub fn screen(&self, max_len: usize) -> Result<Vec<NonHyperbolicWord>> {
        Ok(enumerate_classes(max_len)?
            .into_iter()
            .filter_map(|w| {
                let t = self.evaluate(&w).trace().abs();
                (t <= 2.0 + HYPERBOLIC_MARGIN).then_some(NonHyperbolicWord { word: w, trace_abs: t })
            })
            .collect())
    }
}

const HYPERBOLIC_MARGIN: f64 = 1e-12;

/// Cyclically reduced words up to `max_len`, one per class under rotation and
/// inversion, ordered by length and then lexicographically.
pub fn enumerate_classes(max_len: usize) -> Result<Vec<Word>> {
    if max_len > MAX_WORD_LENGTH {
        return Err(Error::Resource {
            what: "word length for class enumeration",
            requested: max_len,
            cap: MAX_WORD_LENGTH,
        });
    }
    let mut out = Vec::new();
    for len in 1..=max_len {
        let mut buf = Vec::with_capacity(len);
        extend_reduced(&mut buf, len, &mut out);
    }
    Ok(out)
}

fn extend_reduced(buf: &mut Vec<u8>, len: usize, out: &mut Vec<Word>) {
    if buf.len() == len {
        let w = Word(buf.clone());
        if w.is_cyclically_reduced() && w.canonical_class() == w {
            out.push(w);
        }
        return;
    }
    for x in 0..8u8 {
        if let Some(&last) = buf.last() {
            if x == inverse_letter(last) {
                continue;
            }
        }
        // A canonical word starts with its smallest letter; prune early.
        if let Some(&first) = buf.first() {
            if x < first {
                continue;
            }
        }
        buf.push(x);
        extend_reduced(buf, len, out);
        buf.pop();
    }
}

/// `ℓ = 2 arccosh(|tr| / 2)` for a hyperbolic element.
pub fn length_from_trace(trace: f64) -> Option<f64> {
    let t = trace.abs();
    (t > 2.0 + HYPERBOLIC_MARGIN).then(|| 2.0 * (t / 2.0).acosh())
}

pub fn translation_length(rep: &FuchsianRep, w: &Word) -> Result<f64> {
    let tr = rep.evaluate(w).trace();
    length_from_trace(tr).ok_or_else(|| Error::NonHyperbolic {
        word: w.to_string(),
        trace_abs: tr.abs(),
    })
}

/// `min(l/r, r/l)`.
pub fn min_ratio(ell_l: f64, ell_r: f64) -> f64 {
    (ell_l / ell_r).min(ell_r / ell_l)
}

/// Lengths `(β, β*) = ((ℓ_l + ℓ_r)/2, |ℓ_l − ℓ_r|/2)` of the two invariant
/// space-like geodesics of a pair of hyperbolic isometries.
pub fn beta_pair(ell_l: f64, ell_r: f64) -> (f64, f64) {
    (0.5 * (ell_l + ell_r), 0.5 * (ell_l - ell_r).abs())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolderRow {
    pub word: Word,
    pub ell_l: f64,
    pub ell_r: f64,
    pub min_ratio: f64,
    pub beta: f64,
    pub beta_star: f64,
}

impl HolderRow {
    /// `(β − β*) / (β + β*)`, which equals `min_ratio` identically.
    pub fn beta_ratio(&self) -> f64 {
        (self.beta - self.beta_star) / (self.beta + self.beta_star)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolderReport {
    pub alpha_hat: f64,
    pub witness_word: Word,
    pub max_word_length: usize,
    pub rows: Vec<HolderRow>,
    /// `(L, alpha_hat over words of length <= L)`.
    pub monotone_history: Vec<(usize, f64)>,
}

impl HolderReport {
    pub fn max_beta_identity_defect(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.beta_ratio() - r.min_ratio).abs())
            .fold(0.0, f64::max)
    }

    pub fn history_nonincreasing(&self) -> bool {
        self.monotone_history.windows(2).all(|w| w[1].1 <= w[0].1)
    }
}

/// Finite-class estimate of the Hölder exponent; an upper bound for the
/// infimum over the whole group.
pub fn holder_estimate(rep_l: &FuchsianRep, rep_r: &FuchsianRep, max_len: usize) -> Result<HolderReport> {
    if max_len == 0 {
        return Err(Error::Domain("max word length must be at least 1".into()));
    }
    let words = enumerate_classes(max_len)?;
    let mut rows = Vec::with_capacity(words.len());
    for w in words {
        let ell_l = translation_length(rep_l, &w)?;
        let ell_r = translation_length(rep_r, &w)?;
        let (beta, beta_star) = beta_pair(ell_l, ell_r);
        rows.push(HolderRow {
            word: w,
            ell_l,
            ell_r,
            min_ratio: min_ratio(ell_l, ell_r),
            beta,
            beta_star,
        });
    }
    let mut alpha_hat = f64::INFINITY;
    let mut witness = 0;
    let mut history = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        if r.min_ratio < alpha_hat {
            alpha_hat = r.min_ratio;
            witness = i;
        }
        let last_of_length = rows.get(i + 1).is_none_or(|n| n.word.len() != r.word.len());
        if last_of_length {
            history.push((r.word.len(), alpha_hat));
        }
    }
    Ok(HolderReport {
        alpha_hat,
        witness_word: rows[witness].word.clone(),
        max_word_length: max_len,
        rows,
        monotone_history: history,
    })
}
