//! Small dense SDP solver for problems of the shape produced by the moment
//! relaxation: minimize `cᵀy` subject to affine PSD blocks `F_j(y) ⪰ 0` and
//! fixed coordinates `y_k = v_k`.
//!
//! The problem is handed to [`engine`] as the dual side of a standard-form
//! pair, so the engine's primal matrices `X` are the multipliers (SOS Gram
//! matrices) of the blocks.

pub mod engine;

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

use crate::momentidx::{assemble, MatrixSpec};
use crate::scalar::Real;

pub use engine::{
    solve_standard, EngineOptions, EngineResult, EngineStatus, IterationLog, SparseSym,
    StandardSdp,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SdpError {
    #[error("objective has length {found}, problem has {expected} variables")]
    ObjectiveLength { expected: usize, found: usize },
    #[error("block {block} references y[{position}] beyond {num_vars} variables")]
    BlockOutOfRange {
        block: usize,
        position: usize,
        num_vars: usize,
    },
    #[error("equality index {index} out of range")]
    EqualityOutOfRange { index: usize },
    #[error("conflicting equalities on y[{index}]")]
    ConflictingEquality { index: usize },
    #[error("problem has no normalization equality")]
    NoEquality,
    #[error("solution vector has length {found}, expected {expected}")]
    SolutionLength { expected: usize, found: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Solved to reduced accuracy.
    NearOptimal,
    IterLimit,
    NumericalFailure,
}

impl SdpStatus {
    /// `Optimal` or `NearOptimal`.
    pub fn is_solved(self) -> bool {
        matches!(self, SdpStatus::Optimal | SdpStatus::NearOptimal)
    }
}

#[derive(Clone, Debug)]
pub struct SdpOptions {
    pub feas_tol: f64,
    pub gap_tol: f64,
    pub max_iter: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions {
            feas_tol: 1e-8,
            gap_tol: 1e-8,
            max_iter: 200,
        }
    }
}

impl SdpOptions {
    pub fn engine(&self) -> EngineOptions {
        EngineOptions {
            feas_tol: self.feas_tol,
            gap_tol: self.gap_tol,
            max_iter: self.max_iter,
            ..EngineOptions::default()
        }
    }
}

/// `min cᵀy` s.t. every block is PSD and each `(k, v)` equality holds.
#[derive(Clone, Debug)]
pub struct SdpProblem<T = f64> {
    pub num_vars: usize,
    pub objective: Vec<T>,
    pub blocks: Vec<MatrixSpec<T>>,
    pub equalities: Vec<(usize, T)>,
}

#[derive(Clone, Debug)]
pub struct SdpSolution<T = f64> {
    pub status: SdpStatus,
    pub y: Vec<T>,
    /// `cᵀy` at the returned point.
    pub objective_value: T,
    /// Lower bound certified by the block multipliers.
    pub dual_objective: T,
    /// `|primal − dual| / (1 + |primal| + |dual|)`.
    pub duality_gap: T,
    pub iterations: usize,
    /// One PSD multiplier per block.
    pub multipliers: Vec<DMatrix<T>>,
    pub history: Vec<IterationLog>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsdReport<T = f64> {
    pub is_psd: bool,
    pub min_eigenvalue: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residuals<T = f64> {
    /// Largest absolute violation of the fixed-coordinate equalities.
    pub primal_infeas: T,
    /// Smallest eigenvalue over all assembled blocks.
    pub min_block_eig: T,
    pub gap: T,
}

impl<T: Real> SdpProblem<T> {
    fn validate(&self) -> Result<(), SdpError> {
        if self.objective.len() != self.num_vars {
            return Err(SdpError::ObjectiveLength {
                expected: self.num_vars,
                found: self.objective.len(),
            });
        }
        for (b, spec) in self.blocks.iter().enumerate() {
            if spec.max_position() > self.num_vars {
                return Err(SdpError::BlockOutOfRange {
                    block: b,
                    position: spec.max_position() - 1,
                    num_vars: self.num_vars,
                });
            }
        }
        if self.equalities.is_empty() {
            return Err(SdpError::NoEquality);
        }
        for (i, &(k, v)) in self.equalities.iter().enumerate() {
            if k >= self.num_vars {
                return Err(SdpError::EqualityOutOfRange { index: k });
            }
            if self.equalities[..i].iter().any(|&(k2, v2)| k2 == k && v2 != v) {
                return Err(SdpError::ConflictingEquality { index: k });
            }
        }
        Ok(())
    }
}

/// Assembled standard form plus the bookkeeping needed to map back.
struct Lowered<T> {
    std: StandardSdp<T>,
    /// Original index of each free variable.
    free: Vec<usize>,
    fixed: Vec<Option<T>>,
    /// Objective contribution of the fixed coordinates.
    constant: T,
    /// A free variable with nonzero cost appears in no block.
    unbounded_free: bool,
}

fn lower<T: Real>(prob: &SdpProblem<T>) -> Lowered<T> {
    let mut fixed: Vec<Option<T>> = vec![None; prob.num_vars];
    for &(k, v) in &prob.equalities {
        fixed[k] = Some(v);
    }
    let per_block: Vec<Vec<Vec<(usize, usize, T)>>> = prob
        .blocks
        .iter()
        .map(|b| b.by_position(prob.num_vars))
        .collect();
    let used: Vec<bool> = (0..prob.num_vars)
        .map(|k| per_block.iter().any(|pb| !pb[k].is_empty()))
        .collect();

    let mut unbounded_free = false;
    let mut free = Vec::new();
    for k in 0..prob.num_vars {
        if fixed[k].is_some() {
            continue;
        }
        if used[k] {
            free.push(k);
        } else {
            // Pinned to zero; it cannot affect feasibility.
            if prob.objective[k] != T::zero() {
                unbounded_free = true;
            }
            fixed[k] = Some(T::zero());
        }
    }

    let block_sizes: Vec<usize> = prob.blocks.iter().map(|b| b.side()).collect();
    let mut c: Vec<DMatrix<T>> = block_sizes.iter().map(|&s| DMatrix::zeros(s, s)).collect();
    let mut constant = T::zero();
    for k in 0..prob.num_vars {
        if let Some(v) = fixed[k] {
            constant += prob.objective[k] * v;
            for (bl, pb) in per_block.iter().enumerate() {
                for &(i, j, coef) in &pb[k] {
                    c[bl][(i, j)] += coef * v;
                    if i != j {
                        c[bl][(j, i)] += coef * v;
                    }
                }
            }
        }
    }
    let a: Vec<SparseSym<T>> = free
        .iter()
        .map(|&k| {
            let mut ents = Vec::new();
            for (bl, pb) in per_block.iter().enumerate() {
                for &(i, j, coef) in &pb[k] {
                    ents.push((bl, i, j, -coef));
                }
            }
            ents
        })
        .collect();
    let b: Vec<T> = free.iter().map(|&k| -prob.objective[k]).collect();
    Lowered {
        std: StandardSdp {
            block_sizes,
            c,
            a,
            b,
            shift: constant,
        },
        free,
        fixed,
        constant,
        unbounded_free,
    }
}

/// Solves `prob` with the interior-point engine.
pub fn solve<T: Real>(prob: &SdpProblem<T>, opts: &SdpOptions) -> Result<SdpSolution<T>, SdpError> {
    prob.validate()?;
    let low = lower(prob);
    let res = solve_standard(&low.std, &opts.engine());

    let mut y: Vec<T> = low.fixed.iter().map(|v| v.unwrap_or_else(T::zero)).collect();
    for (&k, &v) in low.free.iter().zip(&res.y) {
        y[k] = v;
    }
    let objective_value = prob
        .objective
        .iter()
        .zip(&y)
        .fold(T::zero(), |a, (&c, &v)| a + c * v);
    let dual_objective = low.constant - res.primal_obj;
    let mut status = match res.status {
        EngineStatus::Optimal => SdpStatus::Optimal,
        EngineStatus::DualInfeasible => SdpStatus::Infeasible,
        EngineStatus::PrimalInfeasible => SdpStatus::Unbounded,
        EngineStatus::NearOptimal => SdpStatus::NearOptimal,
        EngineStatus::IterLimit => SdpStatus::IterLimit,
        EngineStatus::NumericalFailure => SdpStatus::NumericalFailure,
    };
    if low.unbounded_free && status.is_solved() {
        status = SdpStatus::Unbounded;
    }
    Ok(SdpSolution {
        status,
        y,
        objective_value,
        dual_objective,
        duality_gap: res.rel_gap,
        iterations: res.iterations,
        multipliers: res.x,
        history: res.history,
    })
}

pub fn psd_check<T: Real>(m: &DMatrix<T>, tol: T) -> Result<PsdReport<T>, SdpError> {
    if m.nrows() != m.ncols() {
        return Err(SdpError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(SdpError::NonFinite);
    }
    let min_eigenvalue = min_eigenvalue(m);
    Ok(PsdReport {
        is_psd: min_eigenvalue >= -tol,
        min_eigenvalue,
    })
}

/// Smallest eigenvalue of the symmetric part of `m` (`+∞` for an empty matrix).
pub fn min_eigenvalue<T: Real>(m: &DMatrix<T>) -> T {
    let sym = (m + m.transpose()) * T::lit(0.5);
    SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .fold(T::max_value().unwrap(), |a, b| a.min(b))
}

pub fn residuals<T: Real>(prob: &SdpProblem<T>, sol: &SdpSolution<T>) -> Result<Residuals<T>, SdpError> {
    if sol.y.len() != prob.num_vars {
        return Err(SdpError::SolutionLength {
            expected: prob.num_vars,
            found: sol.y.len(),
        });
    }
    let primal_infeas = prob
        .equalities
        .iter()
        .fold(T::zero(), |a, &(k, v)| a.max((sol.y[k] - v).abs()));
    let mut min_block_eig = T::max_value().unwrap();
    for spec in &prob.blocks {
        let m = assemble(spec, &sol.y).map_err(|_| SdpError::SolutionLength {
            expected: spec.max_position(),
            found: sol.y.len(),
        })?;
        min_block_eig = min_block_eig.min(min_eigenvalue(&m));
    }
    let obj = prob
        .objective
        .iter()
        .zip(&sol.y)
        .fold(T::zero(), |a, (&c, &v)| a + c * v);
    let gap = (obj - sol.dual_objective).abs()
        / (T::one() + obj.abs() + sol.dual_objective.abs());
    Ok(Residuals {
        primal_infeas,
        min_block_eig,
        gap,
    })
}
