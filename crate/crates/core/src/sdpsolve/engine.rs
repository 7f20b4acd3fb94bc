//! Dense primal-dual interior-point method for block-diagonal SDPs in
//! standard form:
//!
//! ```text
//! (P)  min ⟨C, X⟩   s.t. ⟨A_k, X⟩ = b_k,  X ⪰ 0
//! (D)  max bᵀy      s.t. Σ y_k A_k + S = C,  S ⪰ 0
//! ```
//!
//! Infeasible start, HKM search direction, Mehrotra predictor-corrector,
//! separate primal and dual step lengths.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen, LU};

use crate::scalar::Real;

/// Symmetric sparse matrix data for one constraint: upper-triangle entries
/// `(block, i, j, value)` with `i <= j`.
pub type SparseSym<T> = Vec<(usize, usize, usize, T)>;

#[derive(Clone, Debug)]
pub struct StandardSdp<T> {
    pub block_sizes: Vec<usize>,
    pub c: Vec<DMatrix<T>>,
    pub a: Vec<SparseSym<T>>,
    pub b: Vec<T>,
    /// The caller's objective is `shift − ⟨C, X⟩` (resp. `shift − bᵀy`);
    /// only used to normalize the relative gap.
    pub shift: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EngineStatus {
    Optimal,
    /// No `X` satisfies the equality constraints with `X ⪰ 0`; a `y` with
    /// `Σ y_k A_k ⪯ 0`, `bᵀy > 0` was found.
    PrimalInfeasible,
    /// No `(y, S)` is feasible; an `X ⪰ 0` with `A(X) = 0`, `⟨C, X⟩ < 0` was
    /// found.
    DualInfeasible,
    /// Tolerances were not met, but the best iterate is within `near_tol`.
    NearOptimal,
    IterLimit,
    NumericalFailure,
}

#[derive(Clone, Debug)]
pub struct EngineOptions {
    pub feas_tol: f64,
    pub gap_tol: f64,
    pub max_iter: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
    /// Normalized residual below which an infeasibility ray is accepted.
    pub infeas_tol: f64,
    /// Growth of the iterate norm (relative to the starting point) required
    /// before an infeasibility ray is accepted.
    pub divergence_ratio: f64,
    /// Reduced-accuracy tolerance on residuals and gap.
    pub near_tol: f64,
    /// Iterations without improvement of the best iterate before stopping.
    pub stall_iters: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            feas_tol: 1e-8,
            gap_tol: 1e-8,
            max_iter: 200,
            step_fraction: 0.98,
            infeas_tol: 1e-7,
            divergence_ratio: 1e6,
            near_tol: 1e-5,
            stall_iters: 10,
        }
    }
}

/// Diagnostics of iterate `iter` and the step taken from it.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationLog {
    pub iter: usize,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub primal_infeas: f64,
    pub dual_infeas: f64,
    pub rel_gap: f64,
    pub mu: f64,
    pub step_primal: f64,
    pub step_dual: f64,
}

#[derive(Clone, Debug)]
pub struct EngineResult<T> {
    pub status: EngineStatus,
    pub x: Vec<DMatrix<T>>,
    pub y: Vec<T>,
    pub s: Vec<DMatrix<T>>,
    pub primal_obj: T,
    pub dual_obj: T,
    pub primal_infeas: T,
    pub dual_infeas: T,
    pub rel_gap: T,
    pub iterations: usize,
    pub history: Vec<IterationLog>,
}

// Constraint data regrouped per block, both triangles expanded.
struct BlockView<T> {
    // (constraint index, full entry list (i, j, v))
    cons: Vec<(usize, Vec<(usize, usize, T)>)>,
}

struct Prepared<T> {
    views: Vec<BlockView<T>>,
    total_dim: usize,
}

fn prepare<T: Real>(p: &StandardSdp<T>) -> Prepared<T> {
    let mut views: Vec<BlockView<T>> = p
        .block_sizes
        .iter()
        .map(|_| BlockView { cons: Vec::new() })
        .collect();
    for (k, ak) in p.a.iter().enumerate() {
        let mut per_block: Vec<Vec<(usize, usize, T)>> = vec![Vec::new(); p.block_sizes.len()];
        for &(bl, i, j, v) in ak {
            per_block[bl].push((i, j, v));
            if i != j {
                per_block[bl].push((j, i, v));
            }
        }
        for (bl, ents) in per_block.into_iter().enumerate() {
            if !ents.is_empty() {
                views[bl].cons.push((k, ents));
            }
        }
    }
    Prepared {
        views,
        total_dim: p.block_sizes.iter().sum(),
    }
}

fn inner<T: Real>(a: &[DMatrix<T>], b: &[DMatrix<T>]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + x.dot(y))
}

fn frob<T: Real>(a: &[DMatrix<T>]) -> T {
    inner(a, a).sqrt()
}

fn vec_norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
}

/// `A(W)_k = ⟨A_k, W⟩` (W need not be symmetric).
fn apply_a<T: Real>(p: &StandardSdp<T>, w: &[DMatrix<T>]) -> Vec<T> {
    p.a.iter()
        .map(|ak| {
            ak.iter().fold(T::zero(), |acc, &(bl, i, j, v)| {
                let m = &w[bl];
                if i == j {
                    acc + v * m[(i, i)]
                } else {
                    acc + v * (m[(i, j)] + m[(j, i)])
                }
            })
        })
        .collect()
}

/// `Σ_k y_k A_k`.
fn apply_at<T: Real>(p: &StandardSdp<T>, y: &[T]) -> Vec<DMatrix<T>> {
    let mut out: Vec<DMatrix<T>> = p
        .block_sizes
        .iter()
        .map(|&s| DMatrix::zeros(s, s))
        .collect();
    for (ak, &yk) in p.a.iter().zip(y) {
        if yk == T::zero() {
            continue;
        }
        for &(bl, i, j, v) in ak {
            out[bl][(i, j)] += yk * v;
            if i != j {
                out[bl][(j, i)] += yk * v;
            }
        }
    }
    out
}

fn symmetrize<T: Real>(m: &mut DMatrix<T>) {
    let half = T::lit(0.5);
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (m[(i, j)] + m[(j, i)]) * half;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Largest `α` with `X + α D ⪰ 0`, given the Cholesky factor of `X ≻ 0`.
fn max_step<T: Real>(chol: &Cholesky<T, Dyn>, d: &DMatrix<T>) -> Option<T> {
    let l = chol.l_dirty();
    let ld = l.solve_lower_triangular(d)?;
    let mut w = l.solve_lower_triangular(&ld.transpose())?;
    symmetrize(&mut w);
    let eig = SymmetricEigen::new(w);
    let lmin = eig.eigenvalues.iter().copied().fold(T::max_value().unwrap(), |a, b| a.min(b));
    if lmin >= T::zero() {
        Some(T::max_value().unwrap())
    } else {
        Some(-T::one() / lmin)
    }
}

fn max_eigenvalue<T: Real>(m: &DMatrix<T>) -> T {
    let mut m = m.clone();
    symmetrize(&mut m);
    SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .copied()
        .fold(T::min_value().unwrap(), |a, b| a.max(b))
}

struct Factored<T: Real> {
    x_chol: Vec<Cholesky<T, Dyn>>,
    s_chol: Vec<Cholesky<T, Dyn>>,
    s_inv: Vec<DMatrix<T>>,
}

enum SchurKind<T: Real> {
    Chol(Cholesky<T, Dyn>),
    Lu(LU<T, Dyn, Dyn>),
}

/// Factorization of the Schur matrix `M`, possibly of a shifted copy; solves
/// are refined against the unshifted `M`.
struct SchurFactor<T: Real> {
    m: DMatrix<T>,
    kind: SchurKind<T>,
}

impl<T: Real> SchurFactor<T> {
    fn raw_solve(&self, rhs: &DVector<T>) -> Option<DVector<T>> {
        match &self.kind {
            SchurKind::Chol(c) => Some(c.solve(rhs)),
            SchurKind::Lu(lu) => lu.solve(rhs),
        }
    }

    fn solve(&self, rhs: &DVector<T>) -> Option<DVector<T>> {
        let mut x = self.raw_solve(rhs)?;
        let mut r = rhs - &self.m * &x;
        let mut rn = r.norm();
        for _ in 0..REFINE_STEPS {
            if !(rn > T::zero()) {
                break;
            }
            let cand = &x + self.raw_solve(&r)?;
            let r2 = rhs - &self.m * &cand;
            let n2 = r2.norm();
            if !(n2 < rn) {
                break;
            }
            x = cand;
            r = r2;
            rn = n2;
        }
        Some(x)
    }
}

const REFINE_STEPS: usize = 3;

fn factor_schur<T: Real>(m: DMatrix<T>) -> Option<SchurFactor<T>> {
    if let Some(c) = Cholesky::new(m.clone()) {
        return Some(SchurFactor {
            m,
            kind: SchurKind::Chol(c),
        });
    }
    let n = m.nrows();
    let scale = (0..n).fold(T::zero(), |a, i| a.max(m[(i, i)].abs())).max(T::one());
    for shift in [1e-14, 1e-12, 1e-10] {
        let mut reg = m.clone();
        for i in 0..n {
            reg[(i, i)] += scale * T::lit(shift);
        }
        if let Some(c) = Cholesky::new(reg) {
            return Some(SchurFactor {
                m,
                kind: SchurKind::Chol(c),
            });
        }
    }
    let lu = LU::new(m.clone());
    if lu.is_invertible() {
        Some(SchurFactor {
            m,
            kind: SchurKind::Lu(lu),
        })
    } else {
        None
    }
}

fn schur<T: Real>(prep: &Prepared<T>, m: usize, x: &[DMatrix<T>], s_inv: &[DMatrix<T>]) -> DMatrix<T> {
    let mut out = DMatrix::<T>::zeros(m, m);
    for (bl, view) in prep.views.iter().enumerate() {
        let side = x[bl].nrows();
        for (l, ents_l) in &view.cons {
            // G = X A_l S⁻¹
            let mut xa = DMatrix::<T>::zeros(side, side);
            for &(i, j, v) in ents_l {
                let col = x[bl].column(i) * v;
                let mut dst = xa.column_mut(j);
                dst += col;
            }
            let g = &xa * &s_inv[bl];
            for (k, ents_k) in &view.cons {
                let t = ents_k
                    .iter()
                    .fold(T::zero(), |acc, &(p, q, a)| acc + a * g[(q, p)]);
                out[(*k, *l)] += t;
            }
        }
    }
    let half = T::lit(0.5);
    for i in 0..m {
        for j in (i + 1)..m {
            let v = (out[(i, j)] + out[(j, i)]) * half;
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

fn factor_iterate<T: Real>(x: &[DMatrix<T>], s: &[DMatrix<T>]) -> Option<Factored<T>> {
    let mut x_chol = Vec::with_capacity(x.len());
    let mut s_chol = Vec::with_capacity(s.len());
    let mut s_inv = Vec::with_capacity(s.len());
    for (xb, sb) in x.iter().zip(s) {
        x_chol.push(Cholesky::new(xb.clone())?);
        let sc = Cholesky::new(sb.clone())?;
        let mut inv = sc.inverse();
        symmetrize(&mut inv);
        s_inv.push(inv);
        s_chol.push(sc);
    }
    Some(Factored {
        x_chol,
        s_chol,
        s_inv,
    })
}

struct Direction<T> {
    dx: Vec<DMatrix<T>>,
    dy: Vec<T>,
    ds: Vec<DMatrix<T>>,
}

#[allow(clippy::too_many_arguments)]
fn direction<T: Real>(
    p: &StandardSdp<T>,
    schur_f: &SchurFactor<T>,
    x: &[DMatrix<T>],
    f: &Factored<T>,
    rp: &[T],
    rd: &[DMatrix<T>],
    mu_target: T,
    corr: Option<&[DMatrix<T>]>,
) -> Option<Direction<T>> {
    // H = μ S⁻¹ − X − X R_d S⁻¹ − corr; then M Δy = r_p − A(H).
    let h: Vec<DMatrix<T>> = (0..x.len())
        .map(|bl| {
            let mut h = &f.s_inv[bl] * mu_target - &x[bl] - &x[bl] * &rd[bl] * &f.s_inv[bl];
            if let Some(c) = corr {
                h -= &c[bl];
            }
            h
        })
        .collect();
    let ah = apply_a(p, &h);
    let rhs = DVector::from_iterator(rp.len(), rp.iter().zip(&ah).map(|(&r, &a)| r - a));
    let dy = schur_f.solve(&rhs)?;
    if dy.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let mut dy: Vec<T> = dy.iter().copied().collect();
    let build_dx = |dy: &[T]| -> Vec<DMatrix<T>> {
        let at_dy = apply_at(p, dy);
        (0..x.len())
            .map(|bl| {
                let mut dx = &h[bl] + &x[bl] * &at_dy[bl] * &f.s_inv[bl];
                symmetrize(&mut dx);
                dx
            })
            .collect()
    };
    let residual = |dx: &[DMatrix<T>]| -> Vec<T> {
        rp.iter().zip(apply_a(p, dx)).map(|(&r, a)| r - a).collect()
    };
    let mut dx = build_dx(&dy);
    // Refine against the true residual rp − A(ΔX), not the formed M.
    let mut e = residual(&dx);
    let mut en = vec_norm(&e);
    for _ in 0..REFINE_STEPS {
        if !(en > T::zero()) {
            break;
        }
        let delta = schur_f.solve(&DVector::from_vec(e.clone()))?;
        let cand_y: Vec<T> = dy.iter().zip(delta.iter()).map(|(&a, &b)| a + b).collect();
        let cand_x = build_dx(&cand_y);
        let ce = residual(&cand_x);
        let cn = vec_norm(&ce);
        if !(cn < en) {
            break;
        }
        dy = cand_y;
        dx = cand_x;
        e = ce;
        en = cn;
    }
    let at_dy = apply_at(p, &dy);
    let ds: Vec<DMatrix<T>> = rd.iter().zip(&at_dy).map(|(r, a)| r - a).collect();
    Some(Direction { dx, dy, ds })
}

fn step_lengths<T: Real>(f: &Factored<T>, dir: &Direction<T>, fraction: T) -> Option<(T, T)> {
    let mut ap = T::max_value().unwrap();
    let mut ad = T::max_value().unwrap();
    for bl in 0..f.x_chol.len() {
        ap = ap.min(max_step(&f.x_chol[bl], &dir.dx[bl])?);
        ad = ad.min(max_step(&f.s_chol[bl], &dir.ds[bl])?);
    }
    Some((
        (ap * fraction).min(T::one()),
        (ad * fraction).min(T::one()),
    ))
}

pub fn solve_standard<T: Real>(p: &StandardSdp<T>, opts: &EngineOptions) -> EngineResult<T> {
    let m = p.b.len();
    let prep = prepare(p);
    let n_total = T::from_usize(prep.total_dim.max(1)).unwrap();

    let b_norm = vec_norm(&p.b);
    let c_norm = frob(&p.c);
    let a_norms: Vec<T> = p
        .a
        .iter()
        .map(|ak| {
            ak.iter()
                .fold(T::zero(), |acc, &(_, i, j, v)| {
                    acc + if i == j { v * v } else { T::lit(2.0) * v * v }
                })
                .sqrt()
        })
        .collect();

    // Starting point scaled to the data.
    let sqrt_n = n_total.sqrt();
    let mut xi = T::lit(10.0).max(sqrt_n);
    for (bk, an) in p.b.iter().zip(&a_norms) {
        xi = xi.max(n_total * (T::one() + bk.abs()) / (T::one() + *an));
    }
    let mut eta = T::lit(10.0).max(sqrt_n).max(c_norm);
    for an in &a_norms {
        eta = eta.max(*an);
    }
    let mut x: Vec<DMatrix<T>> = p
        .block_sizes
        .iter()
        .map(|&s| DMatrix::identity(s, s) * xi)
        .collect();
    let mut s: Vec<DMatrix<T>> = p
        .block_sizes
        .iter()
        .map(|&s| DMatrix::identity(s, s) * eta)
        .collect();
    let mut y = vec![T::zero(); m];
    let x0_norm = frob(&x);
    let s0_norm = frob(&s);

    let fraction = T::lit(opts.step_fraction);
    let feas_tol = T::lit(opts.feas_tol);
    let gap_tol = T::lit(opts.gap_tol);
    let infeas_tol = T::lit(opts.infeas_tol);
    let div_ratio = T::lit(opts.divergence_ratio);

    let mut history = Vec::new();
    let mut status = EngineStatus::IterLimit;
    let mut iterations = 0;
    // (merit, pinf, dinf, gap, x, y, s) of the best iterate seen so far
    let mut best: Option<(T, T, T, T, Vec<DMatrix<T>>, Vec<T>, Vec<DMatrix<T>>)> = None;
    let mut since_best = 0;

    let finish = |status: EngineStatus,
                  x: Vec<DMatrix<T>>,
                  y: Vec<T>,
                  s: Vec<DMatrix<T>>,
                  iterations: usize,
                  history: Vec<IterationLog>| {
        let ax = apply_a(p, &x);
        let rp: Vec<T> = p.b.iter().zip(&ax).map(|(&b, &a)| b - a).collect();
        let aty = apply_at(p, &y);
        let rd: Vec<DMatrix<T>> = (0..x.len()).map(|bl| &p.c[bl] - &s[bl] - &aty[bl]).collect();
        let pobj = inner(&p.c, &x);
        let dobj = p.b.iter().zip(&y).fold(T::zero(), |a, (&b, &yy)| a + b * yy);
        EngineResult {
            status,
            primal_infeas: vec_norm(&rp) / (T::one() + b_norm),
            dual_infeas: frob(&rd) / (T::one() + c_norm),
            rel_gap: (pobj - dobj).abs()
                / (T::one() + (p.shift - pobj).abs() + (p.shift - dobj).abs()),
            primal_obj: pobj,
            dual_obj: dobj,
            x,
            y,
            s,
            iterations,
            history,
        }
    };

    for iter in 0..=opts.max_iter {
        let ax = apply_a(p, &x);
        let rp: Vec<T> = p.b.iter().zip(&ax).map(|(&b, &a)| b - a).collect();
        let aty = apply_at(p, &y);
        let rd: Vec<DMatrix<T>> = (0..x.len()).map(|bl| &p.c[bl] - &s[bl] - &aty[bl]).collect();
        let pobj = inner(&p.c, &x);
        let dobj = p.b.iter().zip(&y).fold(T::zero(), |a, (&b, &yy)| a + b * yy);
        let xs = inner(&x, &s);
        let mu = xs / n_total;
        let pinf = vec_norm(&rp) / (T::one() + b_norm);
        let dinf = frob(&rd) / (T::one() + c_norm);
        let gap = (pobj - dobj).abs().max(xs.abs())
            / (T::one() + (p.shift - pobj).abs() + (p.shift - dobj).abs());

        if !(pobj.is_finite() && dobj.is_finite() && mu.is_finite()) {
            status = EngineStatus::NumericalFailure;
            break;
        }
        if pinf <= feas_tol && dinf <= feas_tol && gap <= gap_tol {
            status = EngineStatus::Optimal;
            break;
        }
        let merit = pinf.max(dinf).max(gap);
        if best.as_ref().is_none_or(|b| merit < b.0) {
            best = Some((merit, pinf, dinf, gap, x.clone(), y.clone(), s.clone()));
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= opts.stall_iters {
                status = EngineStatus::NumericalFailure;
                break;
            }
        }

        // Infeasibility rays, accepted only once the iterate has diverged.
        if pobj < T::zero() && frob(&x) >= div_ratio * x0_norm {
            let cert = vec_norm(&ax) / (-pobj);
            if cert <= infeas_tol {
                status = EngineStatus::DualInfeasible;
                break;
            }
        }
        if dobj > T::zero() && frob(&s) >= div_ratio * s0_norm {
            let worst = aty
                .iter()
                .map(max_eigenvalue)
                .fold(T::zero(), |a, b| a.max(b));
            if worst / dobj <= infeas_tol {
                status = EngineStatus::PrimalInfeasible;
                break;
            }
        }

        if iter == opts.max_iter {
            break;
        }
        iterations = iter + 1;

        let Some(fact) = factor_iterate(&x, &s) else {
            status = EngineStatus::NumericalFailure;
            break;
        };
        let Some(schur_f) = factor_schur(schur(&prep, m, &x, &fact.s_inv)) else {
            status = EngineStatus::NumericalFailure;
            break;
        };

        // Predictor.
        let Some(aff) = direction(p, &schur_f, &x, &fact, &rp, &rd, T::zero(), None) else {
            status = EngineStatus::NumericalFailure;
            break;
        };
        let Some((ap_a, ad_a)) = step_lengths(&fact, &aff, T::one()) else {
            status = EngineStatus::NumericalFailure;
            break;
        };
        let x_aff: Vec<DMatrix<T>> = x.iter().zip(&aff.dx).map(|(a, d)| a + d * ap_a).collect();
        let s_aff: Vec<DMatrix<T>> = s.iter().zip(&aff.ds).map(|(a, d)| a + d * ad_a).collect();
        let mu_aff = inner(&x_aff, &s_aff) / n_total;
        let sigma = if mu > T::zero() {
            let r = (mu_aff / mu).max(T::zero()).min(T::one());
            r * r * r
        } else {
            T::zero()
        };

        // Corrector: second-order term ΔX_a ΔS_a S⁻¹.
        let corr: Vec<DMatrix<T>> = (0..x.len())
            .map(|bl| &aff.dx[bl] * &aff.ds[bl] * &fact.s_inv[bl])
            .collect();
        let Some(dir) = direction(p, &schur_f, &x, &fact, &rp, &rd, sigma * mu, Some(&corr)) else {
            status = EngineStatus::NumericalFailure;
            break;
        };
        let Some((ap, ad)) = step_lengths(&fact, &dir, fraction) else {
            status = EngineStatus::NumericalFailure;
            break;
        };
        if ap.max(ad) < T::lit(1e-12) {
            status = EngineStatus::NumericalFailure;
            break;
        }

        for bl in 0..x.len() {
            x[bl] += &dir.dx[bl] * ap;
            symmetrize(&mut x[bl]);
            s[bl] += &dir.ds[bl] * ad;
            symmetrize(&mut s[bl]);
        }
        for (yk, dk) in y.iter_mut().zip(&dir.dy) {
            *yk += *dk * ad;
        }

        history.push(IterationLog {
            iter,
            primal_obj: pobj.as_f64(),
            dual_obj: dobj.as_f64(),
            primal_infeas: pinf.as_f64(),
            dual_infeas: dinf.as_f64(),
            rel_gap: gap.as_f64(),
            mu: mu.as_f64(),
            step_primal: ap.as_f64(),
            step_dual: ad.as_f64(),
        });
    }

    if matches!(status, EngineStatus::IterLimit | EngineStatus::NumericalFailure) {
        if let Some((_, bp, bd, bg, bx, by, bs)) = best {
            let near = T::lit(opts.near_tol);
            if bp <= near && bd <= near && bg <= near {
                status = EngineStatus::NearOptimal;
            }
            return finish(status, bx, by, bs, iterations, history);
        }
    }
    finish(status, x, y, s, iterations, history)
}
