//! Sparse storage and a Jacobi-preconditioned conjugate gradient solver.

use crate::error::{Error, Result};

/// Compressed sparse rows without the diagonal. Used for the symmetric
/// off-diagonal coupling of the mesh Laplacian.
#[derive(Clone, Debug, Default)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<f64>,
}

impl CsrMatrix {
    /// Build from triplets; duplicate entries are summed, rows sorted by column.
    pub fn from_triplets(n: usize, mut trip: Vec<(usize, usize, f64)>) -> Self {
        trip.sort_by_key(|x| (x.0, x.1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col = Vec::with_capacity(trip.len());
        let mut val: Vec<f64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in trip {
            if last == Some((i, j)) {
                *val.last_mut().unwrap() += v;
            } else {
                col.push(j);
                val.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, col, val }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col[r.clone()].iter().copied().zip(self.val[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col[r.clone()].binary_search(&j) {
            Ok(k) => self.val[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn nnz(&self) -> usize {
        self.col.len()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CgOptions {
    pub relative_tolerance: f64,
    pub absolute_tolerance: f64,
    pub max_iterations: usize,
    /// Project iterates onto the complement of the constants (singular Neumann-type systems).
    pub project_constants: bool,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            relative_tolerance: 1e-13,
            absolute_tolerance: 1e-300,
            max_iterations: 20_000,
            project_constants: false,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CgStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn remove_mean(v: &mut [f64]) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= m);
}

/// Preconditioned conjugate gradient for a symmetric positive (semi)definite
/// operator given as a matrix-vector closure, with diagonal preconditioner.
pub fn pcg<F>(
    apply: F,
    diag: &[f64],
    rhs: &[f64],
    x: &mut [f64],
    opts: CgOptions,
) -> Result<CgStats>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = rhs.len();
    let mut b = rhs.to_vec();
    if opts.project_constants {
        remove_mean(&mut b);
        remove_mean(x);
    }
    let bnorm = dot(&b, &b).sqrt();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgStats {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut ax = vec![0.0; n];
    apply(x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let precond = |r: &[f64], z: &mut [f64]| {
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
    };
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    if opts.project_constants {
        remove_mean(&mut z);
    }
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let target = (opts.relative_tolerance * bnorm).max(opts.absolute_tolerance);
    for it in 0..opts.max_iterations {
        let rnorm = dot(&r, &r).sqrt();
        if rnorm <= target {
            return Ok(CgStats {
                iterations: it,
                relative_residual: rnorm / bnorm,
            });
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::LinearSolve {
                iterations: it,
                residual: rnorm / bnorm,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        precond(&r, &mut z);
        if opts.project_constants {
            remove_mean(&mut z);
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rnorm = dot(&r, &r).sqrt();
    if rnorm <= 1e3 * target {
        // Stagnation at round-off level; accept.
        return Ok(CgStats {
            iterations: opts.max_iterations,
            relative_residual: rnorm / bnorm,
        });
    }
    Err(Error::LinearSolve {
        iterations: opts.max_iterations,
        residual: rnorm / bnorm,
    })
}
