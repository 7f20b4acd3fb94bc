//! Dinkelbach's parametric iteration for `max f(x)/g(x)` over a
//! semialgebraic set, with each subproblem `max f − λg` solved by the moment
//! relaxation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lasserre::{solve_relaxation, PolyProblem, RelaxError, RelaxOptions, Sense};
use crate::polycore::{PolyError, Polynomial};
use crate::scalar::Real;

/// `|bound − F|` above this marks an iteration whose relaxation is not tight.
pub const DIVERGENCE_FLAG: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DinkelbachError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("denominator is identically zero")]
    ZeroDenominator,
    #[error("eps must lie in (0, 1), got {0}")]
    InvalidEps(f64),
    #[error(
        "g(x_{k}) = {value} is not positive; rewrite the ratio with \
         transform_positive_denominator"
    )]
    DenominatorNonPositive { k: usize, value: f64 },
    #[error("inner relaxation at iteration {k}: {source}")]
    Inner { k: usize, source: RelaxError },
    #[error("reference value is zero")]
    ZeroReference,
}

/// `max f(x)/g(x)` subject to `h_i(x) ≥ 0`.
#[derive(Clone, Debug)]
pub struct FractionalProblem<T = f64> {
    pub numerator: Polynomial<T>,
    pub denominator: Polynomial<T>,
    pub constraints: Vec<Polynomial<T>>,
}

impl<T: Real> FractionalProblem<T> {
    pub fn new(
        numerator: Polynomial<T>,
        denominator: Polynomial<T>,
        constraints: Vec<Polynomial<T>>,
    ) -> Result<Self, DinkelbachError> {
        let n = numerator.n();
        for p in std::iter::once(&denominator).chain(&constraints) {
            if p.n() != n {
                return Err(PolyError::DimensionMismatch {
                    expected: n,
                    found: p.n(),
                }
                .into());
            }
        }
        if denominator.is_zero() {
            return Err(DinkelbachError::ZeroDenominator);
        }
        Ok(FractionalProblem {
            numerator,
            denominator,
            constraints,
        })
    }

    pub fn n(&self) -> usize {
        self.numerator.n()
    }

    pub fn max_degree(&self) -> usize {
        self.constraints
            .iter()
            .map(Polynomial::degree)
            .fold(self.numerator.degree().max(self.denominator.degree()), usize::max)
    }

    /// `⌈v/2⌉ + 1` over `f`, `g` and every `h_i`.
    pub fn default_order(&self) -> usize {
        self.max_degree().div_ceil(2) + 1
    }

    pub fn ratio(&self, x: &[T]) -> Result<T, PolyError> {
        Ok(self.numerator.eval(x)? / self.denominator.eval(x)?)
    }

    /// `f − λ g` to be maximized over the same set.
    pub fn parametric(&self, lambda: T) -> PolyProblem<T> {
        let p = &self.numerator - &self.denominator.scale(lambda);
        PolyProblem {
            sense: Sense::Maximize,
            objective: p,
            constraints: self.constraints.clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DinkelbachOptions {
    pub eps: f64,
    /// Relaxation order; `None` picks [`FractionalProblem::default_order`].
    pub d: Option<usize>,
    pub max_outer: usize,
    /// Starting parameter; the previous value is taken as `λ₀ − 1`.
    pub lambda0: f64,
    pub relax: RelaxOptions,
}

impl Default for DinkelbachOptions {
    fn default() -> Self {
        DinkelbachOptions {
            eps: 1e-6,
            d: None,
            max_outer: 50,
            lambda0: 0.0,
            relax: RelaxOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OuterStatus {
    Converged,
    MaxOuter,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub lambda: f64,
    pub x: Vec<f64>,
    /// `F(λ_k) = f(x_k) − λ_k g(x_k)`.
    #[serde(rename = "F")]
    pub f_value: f64,
    /// `f(x_k)/g(x_k)`, which becomes `λ_{k+1}`.
    pub ratio: f64,
    /// Relaxation bound on `max f − λ_k g`.
    pub bound: f64,
    pub rank_ratio: f64,
    pub certified: bool,
    pub inner_iterations: usize,
    /// `|bound − F| > DIVERGENCE_FLAG`.
    pub bound_diverges: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DinkelbachTrace {
    pub records: Vec<IterationRecord>,
    pub status: OuterStatus,
}

#[derive(Clone, Debug)]
pub struct DinkelbachResult<T = f64> {
    pub x: Vec<T>,
    pub lambda: T,
    pub order_d: usize,
    pub status: OuterStatus,
    /// The last inner relaxation certified its maximizer, so `λ` is the
    /// global maximum of `f/g` (up to the tolerances).
    pub certified: bool,
    pub trace: DinkelbachTrace,
}

pub fn solve<T: Real>(
    prob: &FractionalProblem<T>,
    opts: &DinkelbachOptions,
) -> Result<DinkelbachResult<T>, DinkelbachError> {
    if !(opts.eps > 0.0 && opts.eps < 1.0) {
        return Err(DinkelbachError::InvalidEps(opts.eps));
    }
    let d = opts.d.unwrap_or_else(|| prob.default_order());
    let eps = T::lit(opts.eps);
    let mut lambda = T::lit(opts.lambda0);
    let mut lambda_prev = lambda - T::one();
    let mut records = Vec::new();
    let mut x = Vec::new();
    let mut k = 0;

    while (lambda - lambda_prev).abs() >= eps {
        if k == opts.max_outer {
            break;
        }
        let sub = prob.parametric(lambda);
        let r = solve_relaxation(&sub, d, &opts.relax)
            .map_err(|source| DinkelbachError::Inner { k, source })?;
        x = r.point().to_vec();
        let fx = prob.numerator.eval(&x)?;
        let gx = prob.denominator.eval(&x)?;
        if !(gx > T::zero()) {
            return Err(DinkelbachError::DenominatorNonPositive {
                k,
                value: gx.as_f64(),
            });
        }
        let f_value = fx - lambda * gx;
        let ratio = fx / gx;
        records.push(IterationRecord {
            k,
            lambda: lambda.as_f64(),
            x: x.iter().map(|v| v.as_f64()).collect(),
            f_value: f_value.as_f64(),
            ratio: ratio.as_f64(),
            bound: r.bound.as_f64(),
            rank_ratio: r.rank_ratio.as_f64(),
            certified: r.certified,
            inner_iterations: r.solver.iterations,
            bound_diverges: (r.bound - f_value).abs().as_f64() > DIVERGENCE_FLAG,
        });
        lambda_prev = lambda;
        lambda = ratio;
        k += 1;
    }
    let status = if (lambda - lambda_prev).abs() < eps {
        OuterStatus::Converged
    } else {
        OuterStatus::MaxOuter
    };
    Ok(DinkelbachResult {
        x,
        lambda,
        order_d: d,
        status,
        certified: status == OuterStatus::Converged && records.last().is_some_and(|r| r.certified),
        trace: DinkelbachTrace { records, status },
    })
}

/// `(f·g, g²)`: same ratio wherever `g ≠ 0`, with a nonnegative denominator.
pub fn transform_positive_denominator<T: Real>(
    f: &Polynomial<T>,
    g: &Polynomial<T>,
) -> Result<(Polynomial<T>, Polynomial<T>), PolyError> {
    Ok((f.try_mul(g)?, g.try_mul(g)?))
}

/// `ε_k = 1 − ratio_k / reference` for every recorded iteration.
pub fn relative_error(trace: &DinkelbachTrace, reference: f64) -> Result<Vec<f64>, DinkelbachError> {
    if reference == 0.0 {
        return Err(DinkelbachError::ZeroReference);
    }
    Ok(trace
        .records
        .iter()
        .map(|r| 1.0 - r.ratio / reference)
        .collect())
}
