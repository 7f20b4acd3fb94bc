//! Order-`d` moment relaxation of a polynomial optimization problem, with
//! rank-one minimizer extraction and a certification check.

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::momentidx::{
    assemble, localizing_matrix_spec, moment_matrix_spec, MomentError, MomentIndexMap,
};
use crate::polycore::{basis_size, PolyError, Polynomial};
use crate::scalar::Real;
use crate::sdpsolve::{self, SdpError, SdpOptions, SdpProblem, SdpStatus};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RelaxError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Moment(#[from] MomentError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error("relaxation order d = {d} too small: 2d must cover degree {degree}")]
    OrderTooSmall { d: usize, degree: usize },
    #[error("SDP solver stopped with status {0:?}")]
    Solver(SdpStatus),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    #[serde(alias = "min")]
    Minimize,
    #[serde(alias = "max")]
    Maximize,
}

/// Optimize `objective` over `{x : h(x) ≥ 0 for every h in constraints}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyProblem<T = f64> {
    pub sense: Sense,
    pub objective: Polynomial<T>,
    pub constraints: Vec<Polynomial<T>>,
}

impl<T: Real> PolyProblem<T> {
    pub fn new(
        sense: Sense,
        objective: Polynomial<T>,
        constraints: Vec<Polynomial<T>>,
    ) -> Result<Self, PolyError> {
        let n = objective.n();
        if let Some(h) = constraints.iter().find(|h| h.n() != n) {
            return Err(PolyError::DimensionMismatch {
                expected: n,
                found: h.n(),
            });
        }
        Ok(PolyProblem {
            sense,
            objective,
            constraints,
        })
    }

    pub fn n(&self) -> usize {
        self.objective.n()
    }

    /// Largest degree among the objective and the constraints.
    pub fn max_degree(&self) -> usize {
        self.constraints
            .iter()
            .map(Polynomial::degree)
            .fold(self.objective.degree(), usize::max)
    }

    /// `⌈v/2⌉ + 1`.
    pub fn default_order(&self) -> usize {
        self.max_degree().div_ceil(2) + 1
    }

    pub fn is_feasible(&self, x: &[T], tol: T) -> bool {
        self.constraints
            .iter()
            .all(|h| h.eval(x).map(|v| v >= -tol).unwrap_or(false))
    }
}

#[derive(Clone, Debug)]
pub struct RelaxOptions {
    pub sdp: SdpOptions,
    /// `λ₂/λ₁` of the moment matrix at or below which it counts as rank one.
    pub rank_tol: f64,
    /// Constraint slack allowed at a certified point.
    pub feas_tol: f64,
    /// Relative mismatch allowed between `p(x̂)` and the bound.
    pub value_tol: f64,
}

impl Default for RelaxOptions {
    fn default() -> Self {
        RelaxOptions {
            sdp: SdpOptions {
                gap_tol: 1e-10,
                ..SdpOptions::default()
            },
            rank_tol: 1e-6,
            feas_tol: 1e-6,
            value_tol: 1e-5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub status: SdpStatus,
    pub iterations: usize,
    pub duality_gap: f64,
}

#[derive(Clone, Debug)]
pub struct RelaxationResult<T = f64> {
    pub n: usize,
    pub order_d: usize,
    /// Lower bound for minimization, upper bound for maximization.
    pub bound: T,
    pub y: Vec<T>,
    pub rank_ratio: T,
    /// Present only when the moment matrix is numerically rank one.
    pub extracted: Option<Vec<T>>,
    /// First-order moments `(y_{e_1}, …, y_{e_n})`.
    pub fallback: Vec<T>,
    pub certified: bool,
    pub solver: SolverSummary,
}

impl<T: Real> RelaxationResult<T> {
    /// The extracted point if any, otherwise the first-order moments.
    pub fn point(&self) -> &[T] {
        self.extracted.as_deref().unwrap_or(&self.fallback)
    }
}

/// The moment SDP: `min Σ p_α y_α` (with `p ↦ −p` for maximization) subject
/// to `M_d(y) ⪰ 0`, one localizing block per constraint and `y_0 = 1`.
pub fn build_relaxation<T: Real>(prob: &PolyProblem<T>, d: usize) -> Result<SdpProblem<T>, RelaxError> {
    let n = prob.n();
    let degree = prob.max_degree();
    if d == 0 || 2 * d < degree {
        return Err(RelaxError::OrderTooSmall { d, degree });
    }
    let index = MomentIndexMap::new(n, d)?;
    let mut objective = prob.objective.to_coeff_vector(index.y_basis())?;
    if prob.sense == Sense::Maximize {
        objective.iter_mut().for_each(|c| *c = -*c);
    }
    let mut blocks = vec![moment_matrix_spec(n, d)?];
    for h in &prob.constraints {
        blocks.push(localizing_matrix_spec(h, n, d)?);
    }
    Ok(SdpProblem {
        num_vars: index.len(),
        objective,
        blocks,
        equalities: vec![(0, T::one())],
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Extraction<T> {
    pub rank_ratio: T,
    pub point: Option<Vec<T>>,
    pub fallback: Vec<T>,
}

/// Reads a minimizer off `M_d(y) = v vᵀ`: `v = √λ₁ u₁` scaled so `v₀ = 1`,
/// then `x̂ = v[1..=n]`. Returns no point when `λ₂/λ₁ > rank_tol`.
pub fn extract_minimizer<T: Real>(
    y: &[T],
    n: usize,
    d: usize,
    rank_tol: f64,
) -> Result<Extraction<T>, RelaxError> {
    let spec = moment_matrix_spec::<T>(n, d)?;
    let m = assemble(&spec, y)?;
    let fallback = y[1..=n].to_vec();
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let l1 = eig.eigenvalues[order[0]];
    let l2 = order
        .get(1)
        .map(|&i| eig.eigenvalues[i].max(T::zero()))
        .unwrap_or_else(T::zero);
    if l1 <= T::zero() || !l1.is_finite() {
        return Ok(Extraction {
            rank_ratio: T::max_value().unwrap(),
            point: None,
            fallback,
        });
    }
    let rank_ratio = l2 / l1;
    let mut point = None;
    if rank_ratio <= T::lit(rank_tol) {
        let u = eig.eigenvectors.column(order[0]);
        let v0 = u[0] * l1.sqrt();
        if v0.abs() > T::lit(1e-12) {
            point = Some((1..=n).map(|i| u[i] * l1.sqrt() / v0).collect());
        }
    }
    Ok(Extraction {
        rank_ratio,
        point,
        fallback,
    })
}

/// `x̂` is feasible within `tol` and `p(x̂)` matches `bound` to `tol` relative.
pub fn certify<T: Real>(prob: &PolyProblem<T>, x: &[T], bound: T, tol: T) -> bool {
    certify_with(prob, x, bound, tol, tol)
}

fn certify_with<T: Real>(prob: &PolyProblem<T>, x: &[T], bound: T, feas_tol: T, value_tol: T) -> bool {
    if x.len() != prob.n() || !prob.is_feasible(x, feas_tol) {
        return false;
    }
    match prob.objective.eval(x) {
        Ok(v) => (v - bound).abs() <= value_tol * T::one().max(bound.abs()),
        Err(_) => false,
    }
}

pub fn solve_relaxation<T: Real>(
    prob: &PolyProblem<T>,
    d: usize,
    opts: &RelaxOptions,
) -> Result<RelaxationResult<T>, RelaxError> {
    let sdp = build_relaxation(prob, d)?;
    let sol = sdpsolve::solve(&sdp, &opts.sdp)?;
    if !sol.status.is_solved() {
        return Err(RelaxError::Solver(sol.status));
    }
    let bound = match prob.sense {
        Sense::Minimize => sol.objective_value,
        Sense::Maximize => -sol.objective_value,
    };
    let n = prob.n();
    let ext = extract_minimizer(&sol.y, n, d, opts.rank_tol)?;
    let certified = ext.point.as_ref().is_some_and(|x| {
        certify_with(prob, x, bound, T::lit(opts.feas_tol), T::lit(opts.value_tol))
    });
    Ok(RelaxationResult {
        n,
        order_d: d,
        bound,
        y: sol.y,
        rank_ratio: ext.rank_ratio,
        extracted: ext.point,
        fallback: ext.fallback,
        certified,
        solver: SolverSummary {
            status: sol.status,
            iterations: sol.iterations,
            duality_gap: sol.duality_gap.as_f64(),
        },
    })
}

/// Interior-point work estimate `n²·m·s³ + n·m·s⁴` with `s = s_{n,d}`,
/// saturating at `u128::MAX`.
pub fn estimate_cost(n: usize, m: usize, d: usize) -> u128 {
    match basis_size(n, d) {
        Ok(s) => cost_with_basis(n, m, s as u128),
        Err(_) => u128::MAX,
    }
}

/// Same formula with an explicit basis size.
pub fn cost_with_basis(n: usize, m: usize, s: u128) -> u128 {
    let (n, m) = (n as u128, m as u128);
    let s3 = s.saturating_mul(s).saturating_mul(s);
    let s4 = s3.saturating_mul(s);
    n.saturating_mul(n)
        .saturating_mul(m)
        .saturating_mul(s3)
        .saturating_add(n.saturating_mul(m).saturating_mul(s4))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::momentidx::moments_from_point;

    fn example1() -> PolyProblem<f64> {
        let p = Polynomial::from_pairs(
            2,
            &[
                (&[0, 0], 9.0),
                (&[0, 1], -4.0),
                (&[2, 0], 2.0),
                (&[1, 1], 1.0),
                (&[0, 2], 1.0),
            ],
        )
        .unwrap();
        PolyProblem::new(Sense::Minimize, p, vec![]).unwrap()
    }

    fn interval_max_x() -> PolyProblem<f64> {
        let x = Polynomial::var(1, 0);
        let h = Polynomial::from_pairs(1, &[(&[1], 2.0), (&[2], -1.0)]).unwrap();
        PolyProblem::new(Sense::Maximize, x, vec![h]).unwrap()
    }

    #[test]
    fn builds_example1_sdp() {
        let sdp = build_relaxation(&example1(), 1).unwrap();
        assert_eq!(sdp.num_vars, 6);
        assert_eq!(sdp.objective, vec![9.0, 0.0, -4.0, 2.0, 1.0, 1.0]);
        assert_eq!(sdp.blocks.len(), 1);
        assert_eq!(sdp.blocks[0].side(), 3);
        assert_eq!(sdp.equalities, vec![(0, 1.0)]);
    }

    #[test]
    fn builds_interval_sdp() {
        let sdp = build_relaxation(&interval_max_x(), 1).unwrap();
        assert_eq!(sdp.objective, vec![0.0, -1.0, 0.0]);
        assert_eq!(sdp.blocks.len(), 2);
        assert_eq!(sdp.blocks[0].side(), 2);
        assert_eq!(sdp.blocks[1].side(), 1);
        let mut terms = sdp.blocks[1].entry(0, 0).to_vec();
        terms.sort_by_key(|t| t.1);
        assert_eq!(terms, vec![(2.0, 1), (-1.0, 2)]);
    }

    #[test]
    fn order_too_small() {
        let p = Polynomial::from_pairs(1, &[(&[4], 1.0)]).unwrap();
        let prob = PolyProblem::new(Sense::Minimize, p, vec![]).unwrap();
        assert!(matches!(
            build_relaxation(&prob, 1),
            Err(RelaxError::OrderTooSmall { d: 1, degree: 4 })
        ));
    }

    #[test]
    fn example1_solved_and_certified() {
        let r = solve_relaxation(&example1(), 1, &RelaxOptions::default()).unwrap();
        assert!((r.bound - 31.0 / 7.0).abs() < 1e-6, "{}", r.bound);
        let x = r.extracted.as_ref().unwrap();
        assert!((x[0] + 4.0 / 7.0).abs() < 1e-6, "{x:?}");
        assert!((x[1] - 16.0 / 7.0).abs() < 1e-6, "{x:?}");
        assert!(r.certified);
    }

    #[test]
    fn constant_objective() {
        let p = Polynomial::constant(2, 1.0);
        let prob = PolyProblem::new(Sense::Minimize, p, vec![]).unwrap();
        for d in 1..=3 {
            let r: RelaxationResult<f64> = solve_relaxation(&prob, d, &RelaxOptions::default()).unwrap();
            assert!((r.bound - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn interval_endpoint_maximum() {
        let r = solve_relaxation(&interval_max_x(), 1, &RelaxOptions::default()).unwrap();
        assert!((r.bound - 2.0).abs() < 1e-6, "{}", r.bound);
        let x = r.extracted.as_ref().unwrap();
        assert!((x[0] - 2.0).abs() < 1e-5, "{x:?}");
        assert!(r.certified);
    }

    #[test]
    fn circle_of_minimizers_is_not_rank_one() {
        // (x1² + x2² − 1)²
        let q = Polynomial::from_pairs(2, &[(&[2, 0], 1.0), (&[0, 2], 1.0), (&[0, 0], -1.0)])
            .unwrap();
        let p = &q * &q;
        let prob = PolyProblem::new(Sense::Minimize, p, vec![]).unwrap();
        let r: RelaxationResult<f64> = solve_relaxation(&prob, 2, &RelaxOptions::default()).unwrap();
        assert!(r.bound.abs() < 1e-6, "{}", r.bound);
        assert!(r.rank_ratio > 1e-6);
        assert!(r.extracted.is_none());
        assert!(!r.certified);
    }

    #[test]
    fn extraction_from_printed_moments() {
        let y = moments_from_point(&[-1.0f64, 2.0], 1).unwrap();
        let e = extract_minimizer(&y, 2, 1, 1e-6).unwrap();
        let x = e.point.unwrap();
        assert!((x[0] + 1.0).abs() < 1e-9 && (x[1] - 2.0).abs() < 1e-9);

        let y = moments_from_point(&[0.5f64], 2).unwrap();
        let x = extract_minimizer(&y, 1, 2, 1e-6).unwrap().point.unwrap();
        assert!((x[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn certify_cases() {
        let prob = interval_max_x();
        assert!(certify(&prob, &[2.0], 2.0, 1e-5));
        // h(2.05) = 4.1 − 4.2025 ≈ −0.1
        assert!(!certify(&prob, &[2.05], 2.05, 1e-5));
        assert!(!certify(&prob, &[2.0], 3.0, 1e-5));
        let e1 = example1();
        assert!(certify(&e1, &[-4.0 / 7.0, 16.0 / 7.0], 31.0 / 7.0, 1e-5));
    }

    #[test]
    fn sense_duality_is_exact() {
        let prob = interval_max_x();
        let neg = PolyProblem::new(
            Sense::Minimize,
            -&prob.objective,
            prob.constraints.clone(),
        )
        .unwrap();
        let a = solve_relaxation(&prob, 2, &RelaxOptions::default()).unwrap();
        let b = solve_relaxation(&neg, 2, &RelaxOptions::default()).unwrap();
        assert_eq!(a.bound, -b.bound);
        assert_eq!(a.y, b.y);
    }

    #[test]
    fn infeasible_constraints_propagate() {
        let x = Polynomial::<f64>::var(1, 0);
        let h1 = &x - &Polynomial::constant(1, 1.0);
        let h2 = -&x;
        let prob = PolyProblem::new(Sense::Minimize, x, vec![h1, h2]).unwrap();
        assert_eq!(
            solve_relaxation(&prob, 1, &RelaxOptions::default()).unwrap_err(),
            RelaxError::Solver(SdpStatus::Infeasible)
        );
    }

    #[test]
    fn cost_estimates() {
        assert_eq!(estimate_cost(1, 1, 1), 24);
        assert_eq!(estimate_cost(2, 0, 6), 0);
        assert_eq!(estimate_cost(2, 3, 6), 3_951_360);
        assert_eq!(cost_with_basis(2, 3, 15), 344_250);
        assert_eq!(estimate_cost(1000, 1000, 60), u128::MAX);
    }
}
