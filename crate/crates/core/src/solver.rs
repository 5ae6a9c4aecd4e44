//! Damped Newton solver for `Δu = e^{2u} − t²ρ²e^{−2u} + K` on a closed
//! surface, with constant super-solution and `½ log(tρ)` sub-solution checks.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::laplace::LaplaceOperator;
use crate::linalg::{pcg, CgOptions};
use serde::Serialize;

/// Vertices with `ρ` below this carry no lower bound.
pub const RHO_FLOOR: f64 = 1e-14;

#[derive(Clone, Debug, Default)]
pub enum InitialGuess {
    #[default]
    Zero,
    BracketMidpoint,
    WarmStart(Vec<f64>),
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub initial: InitialGuess,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 100,
            initial: InitialGuess::Zero,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveResult {
    pub t: f64,
    pub u: ScalarField,
    pub residual_norm: f64,
    pub iterations: usize,
    pub bracket_low_ok: bool,
    pub bracket_high_ok: bool,
    /// `½ log x₊`.
    pub bracket_high: f64,
    /// Smallest `u − ½ log(tρ)` over checked vertices (infinite when none).
    pub low_margin: f64,
    /// Largest `e^{2u} − x₊`.
    pub high_margin: f64,
    pub restarted: bool,
}

/// Data of one Gauss equation: operator, background curvature, `ρ` and `t`.
#[derive(Clone, Copy)]
pub struct GaussProblem<'a> {
    pub op: &'a LaplaceOperator,
    pub curvature: &'a [f64],
    pub rho: &'a [f64],
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bracket {
    /// `½ log(tρ)`, `-inf` where `ρ < RHO_FLOOR`.
    pub lower: ScalarField,
    pub upper: f64,
    pub x_plus: f64,
}

/// Positive root of `x² + K x − t²ρ² = 0`.
fn quadratic_root(k: f64, t_rho: f64) -> f64 {
    let disc = (k * k + 4.0 * t_rho * t_rho).sqrt();
    if k <= 0.0 {
        0.5 * (disc - k)
    } else {
        // avoid cancellation
        2.0 * t_rho * t_rho / (disc + k)
    }
}

/// Brackets for background curvature `-1`: `x₊ = (1 + √(1 + 4t² max ρ²)) / 2`.
pub fn analytic_bracket(rho: &ScalarField, t: f64) -> Result<Bracket> {
    let k = vec![-1.0; rho.len()];
    analytic_bracket_with_curvature(rho, &k, t)
}

/// Brackets for a general background curvature: `x₊` is the largest positive
/// root of `x² + K_v x − t²ρ_v² = 0` over vertices.
pub fn analytic_bracket_with_curvature(rho: &ScalarField, curvature: &[f64], t: f64) -> Result<Bracket> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("bracket needs t > 0, got {t}")));
    }
    rho.expect_len(curvature.len())?;
    let lower = rho
        .values
        .iter()
        .map(|&r| if r < RHO_FLOOR { f64::NEG_INFINITY } else { 0.5 * (t * r).ln() })
        .collect();
    let x_plus = upper_root(curvature, &rho.values, t);
    Ok(Bracket {
        lower: ScalarField::new("bracket_lower", lower),
        upper: 0.5 * x_plus.ln(),
        x_plus,
    })
}

fn upper_root(curvature: &[f64], rho: &[f64], t: f64) -> f64 {
    curvature
        .iter()
        .zip(rho)
        .map(|(&k, &r)| quadratic_root(k, t * r))
        .fold(0.0, f64::max)
}

impl GaussProblem<'_> {
    fn n(&self) -> usize {
        self.op.len()
    }

    fn check(&self) -> Result<()> {
        let n = self.n();
        if self.curvature.len() != n {
            return Err(Error::Shape {
                expected: n,
                got: self.curvature.len(),
            });
        }
        if self.rho.len() != n {
            return Err(Error::Shape {
                expected: n,
                got: self.rho.len(),
            });
        }
        if !(self.t >= 0.0) || !self.t.is_finite() {
            return Err(Error::Domain(format!("ray parameter must be finite and nonnegative, got {}", self.t)));
        }
        if let Some(v) = self.rho.iter().position(|r| !(*r >= 0.0) || !r.is_finite()) {
            return Err(Error::Domain(format!("rho is negative or not finite at vertex {v}")));
        }
        Ok(())
    }

    /// `F(u) = W u − M (e^{2u} − t²ρ²e^{−2u} + K)`.
    fn assembled_residual(&self, u: &[f64], out: &mut [f64]) {
        self.op.apply(u, out);
        let t2 = self.t * self.t;
        for i in 0..self.n() {
            let e = (2.0 * u[i]).exp();
            let q = t2 * self.rho[i] * self.rho[i] / e;
            out[i] -= self.op.mass[i] * (e - q + self.curvature[i]);
        }
    }

    /// Pointwise residual `F(u) / m`.
    pub fn residual(&self, u: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; self.n()];
        self.assembled_residual(u, &mut r);
        r.iter_mut().zip(&self.op.mass).for_each(|(x, m)| *x /= m);
        r
    }

    fn max_norm(r: &[f64]) -> f64 {
        r.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    fn bracket_midpoint(&self) -> Vec<f64> {
        if self.t == 0.0 {
            return vec![0.0; self.n()];
        }
        let x_plus = upper_root(self.curvature, self.rho, self.t);
        let upper = 0.5 * x_plus.ln();
        self.rho
            .iter()
            .map(|&r| {
                if r < RHO_FLOOR {
                    upper
                } else {
                    0.5 * (0.5 * (self.t * r).ln() + upper)
                }
            })
            .collect()
    }

    /// Ok: `(u, residual, iterations)`. Err: `(u, residual, iterations, stalled)`.
    #[allow(clippy::type_complexity)]
    fn newton(
        &self,
        mut u: Vec<f64>,
        opts: &SolveOptions,
        budget: usize,
    ) -> std::result::Result<(Vec<f64>, f64, usize), (Vec<f64>, f64, usize, bool)> {
        let n = self.n();
        let mut r = vec![0.0; n];
        let mut delta = vec![0.0; n];
        let mut trial = vec![0.0; n];
        let mut res = Self::max_norm(&self.residual(&u));
        let t2 = self.t * self.t;
        for it in 0..budget {
            if res <= opts.tolerance {
                return Ok((u, res, it));
            }
            self.assembled_residual(&u, &mut r);
            // (−W + M D) δ = F with D = 2e^{2u} + 2t²ρ²e^{−2u} > 0
            let react: Vec<f64> = (0..n)
                .map(|i| {
                    let e = (2.0 * u[i]).exp();
                    self.op.mass[i] * (2.0 * e + 2.0 * t2 * self.rho[i] * self.rho[i] / e)
                })
                .collect();
            if react.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
                return Err((u, res, it, false));
            }
            let diag: Vec<f64> = (0..n).map(|i| self.op.degree[i] + react[i]).collect();
            let apply = |x: &[f64], y: &mut [f64]| {
                self.op.apply(x, y);
                for i in 0..n {
                    y[i] = react[i] * x[i] - y[i];
                }
            };
            delta.iter_mut().for_each(|d| *d = 0.0);
            if pcg(apply, &diag, &r, &mut delta, CgOptions::default()).is_err() {
                return Err((u, res, it, true));
            }
            let mut step = 1.0;
            let mut accepted = false;
            while step >= 1.0 / 1024.0 {
                for i in 0..n {
                    trial[i] = u[i] + step * delta[i];
                }
                let tr = Self::max_norm(&self.residual(&trial));
                if tr.is_finite() && (tr < (1.0 - 1e-4 * step) * res || tr <= opts.tolerance) {
                    std::mem::swap(&mut u, &mut trial);
                    res = tr;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                return Err((u, res, it + 1, true));
            }
        }
        if res <= opts.tolerance {
            return Ok((u, res, budget));
        }
        Err((u, res, budget, false))
    }

    /// Sub/super-solution certificates for a candidate solution.
    pub fn certify(&self, u: &[f64], tolerance: f64) -> (bool, bool, f64, f64, f64) {
        let strict = self.curvature.iter().all(|&k| k < 0.0);
        let mut low_margin = f64::INFINITY;
        if self.t > 0.0 {
            for (i, &r) in self.rho.iter().enumerate() {
                if r >= RHO_FLOOR {
                    low_margin = low_margin.min(u[i] - 0.5 * (self.t * r).ln());
                }
            }
        }
        // On a flat background the sub-solution is itself the solution.
        let low_ok = if strict {
            low_margin > 0.0
        } else {
            low_margin >= -10.0 * tolerance
        };
        let x_plus = upper_root(self.curvature, self.rho, self.t);
        let high_margin = u
            .iter()
            .map(|&x| (2.0 * x).exp() - x_plus)
            .fold(f64::NEG_INFINITY, f64::max);
        let high_ok = high_margin <= 10.0 * tolerance;
        (low_ok, high_ok, low_margin, high_margin, 0.5 * x_plus.ln())
    }
}

/// Solve the Gauss equation at ray parameter `t`.
pub fn solve_gauss(problem: GaussProblem<'_>, opts: &SolveOptions) -> Result<SolveResult> {
    problem.check()?;
    if !(opts.tolerance > 0.0) {
        return Err(Error::Domain("solver tolerance must be positive".into()));
    }
    let n = problem.n();
    let start = match &opts.initial {
        InitialGuess::Zero => vec![0.0; n],
        InitialGuess::BracketMidpoint => problem.bracket_midpoint(),
        InitialGuess::WarmStart(u) => {
            if u.len() != n {
                return Err(Error::Shape {
                    expected: n,
                    got: u.len(),
                });
            }
            u.clone()
        }
    };
    let (u, res, iterations, restarted) = match problem.newton(start, opts, opts.max_iterations) {
        Ok((u, res, it)) => (u, res, it, false),
        Err((_, res, it, stalled)) => {
            let left = opts.max_iterations.saturating_sub(it);
            if !stalled || left == 0 {
                return Err(Error::NonConvergence {
                    iterations: it,
                    residual: res,
                });
            }
            match problem.newton(problem.bracket_midpoint(), opts, left) {
                Ok((u, res, it2)) => (u, res, it + it2, true),
                Err((_, res, it2, _)) => {
                    return Err(Error::NonConvergence {
                        iterations: it + it2,
                        residual: res,
                    })
                }
            }
        }
    };
    let (bracket_low_ok, bracket_high_ok, low_margin, high_margin, bracket_high) = problem.certify(&u, opts.tolerance);
    Ok(SolveResult {
        t: problem.t,
        u: ScalarField::new("u", u),
        residual_norm: res,
        iterations,
        bracket_low_ok,
        bracket_high_ok,
        bracket_high,
        low_margin,
        high_margin,
        restarted,
    })
}

/// Pointwise residual `Δu − (e^{2u} − t²ρ²e^{−2u} + K)`.
pub fn residual_field(problem: GaussProblem<'_>, u: &ScalarField) -> Result<ScalarField> {
    problem.check()?;
    u.expect_len(problem.n())?;
    Ok(ScalarField::new("residual", problem.residual(&u.values)))
}
