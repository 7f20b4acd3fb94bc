//! Gram-matrix SOS decomposition, Putinar certificate checks and the SOS
//! side of the moment relaxation.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lasserre::{solve_relaxation, PolyProblem, RelaxError, RelaxOptions, Sense};
use crate::polycore::{enumerate_basis, MonomialBasis, MultiIndex, PolyError, Polynomial};
use crate::scalar::Real;
use crate::sdpsolve::{
    min_eigenvalue, solve_standard, EngineOptions, EngineStatus, SdpStatus, SparseSym,
    StandardSdp,
};

/// Eigenvalues of `W` at or below this are dropped when forming squares.
pub const EIG_CLIP: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-8;
pub const RECONSTRUCTION_TOL: f64 = 1e-7;
pub const IDENTITY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NotSosReason {
    OddDegree,
    /// The engine returned an infeasibility certificate for the Gram SDP.
    Infeasible,
    /// The engine stopped without a decision.
    Inconclusive(SdpStatus),
    /// A Gram matrix was found but failed the PSD or reconstruction check.
    Inaccurate,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SosError {
    #[error("polynomial is not SOS: {0:?}")]
    NotSos(NotSosReason),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("{which}: degree {found} exceeds the bound {bound}")]
    DegreeBound {
        which: String,
        found: usize,
        bound: i64,
    },
    #[error("certificate has {found} constraint multipliers, expected {expected}")]
    MultiplierCount { expected: usize, found: usize },
    #[error("malformed certificate: {0}")]
    Malformed(String),
    #[error(transparent)]
    Relax(#[from] RelaxError),
}

/// `p(x) = m(x)ᵀ W m(x)` with `W ⪰ 0` over `basis`.
#[derive(Clone, Debug)]
pub struct SosCertificate<T = f64> {
    pub basis: MonomialBasis,
    pub gram: DMatrix<T>,
    pub squares: Option<Vec<Polynomial<T>>>,
}

impl<T: Real> SosCertificate<T> {
    pub fn from_gram(basis: MonomialBasis, gram: DMatrix<T>) -> Result<Self, SosError> {
        if gram.nrows() != basis.len() || gram.ncols() != basis.len() {
            return Err(SosError::Malformed(format!(
                "gram is {}x{}, basis has {} entries",
                gram.nrows(),
                gram.ncols(),
                basis.len()
            )));
        }
        Ok(SosCertificate {
            basis,
            gram,
            squares: None,
        })
    }

    /// The zero polynomial in `n` variables.
    pub fn zero(n: usize) -> Self {
        SosCertificate {
            basis: enumerate_basis(n, 0).expect("degree-0 basis"),
            gram: DMatrix::zeros(1, 1),
            squares: Some(Vec::new()),
        }
    }

    pub fn n(&self) -> usize {
        self.basis.n()
    }

    /// `m(x)ᵀ W m(x)` expanded.
    pub fn polynomial(&self) -> Polynomial<T> {
        let s = self.basis.len();
        let mut terms = Vec::with_capacity(s * s);
        for i in 0..s {
            for j in 0..s {
                terms.push((self.basis.get(i).plus(self.basis.get(j)), self.gram[(i, j)]));
            }
        }
        Polynomial::from_terms(self.n(), terms).expect("basis dimension")
    }

    pub fn min_eigenvalue(&self) -> T {
        min_eigenvalue(&self.gram)
    }

    /// Largest coefficient mismatch between `m ᵀ W m` and `p`.
    pub fn reconstruction_error(&self, p: &Polynomial<T>) -> T {
        let diff = &self.polynomial() - p;
        diff.terms().fold(T::zero(), |a, (_, c)| a.max(c.abs()))
    }

    /// Squares `θ_k = √λ_k u_kᵀ m(x)` over the eigenpairs with `λ_k > EIG_CLIP`.
    pub fn factor(&self) -> Vec<Polynomial<T>> {
        let eig = SymmetricEigen::new(self.gram.clone());
        let mut out = Vec::new();
        for (k, &lam) in eig.eigenvalues.iter().enumerate() {
            if lam <= T::lit(EIG_CLIP) {
                continue;
            }
            let r = lam.sqrt();
            let terms = (0..self.basis.len())
                .map(|a| (self.basis.get(a).clone(), r * eig.eigenvectors[(a, k)]));
            out.push(Polynomial::from_terms(self.n(), terms).expect("basis dimension"));
        }
        out
    }

    /// Polynomial degree with coefficients below `EIG_CLIP` ignored.
    fn effective_degree(&self) -> usize {
        self.polynomial()
            .terms()
            .filter(|(_, c)| c.abs() > T::lit(EIG_CLIP))
            .map(|(a, _)| a.degree())
            .max()
            .unwrap_or(0)
    }

    /// Membership in `SOS_q`: PSD Gram, basis degree `≤ ⌈q/2⌉`, degree `≤ q`.
    fn check_degree(&self, which: &str, q: i64) -> Result<(), SosError> {
        let deg = self.effective_degree();
        let zero = self.gram.iter().all(|v| v.abs() <= T::lit(EIG_CLIP));
        if zero {
            return Ok(());
        }
        let half = if q < 0 { -1 } else { (q + 1) / 2 };
        if (self.basis.max_degree() as i64) > half {
            return Err(SosError::DegreeBound {
                which: format!("{which} basis"),
                found: self.basis.max_degree(),
                bound: half,
            });
        }
        if deg as i64 > q {
            return Err(SosError::DegreeBound {
                which: which.to_string(),
                found: deg,
                bound: q,
            });
        }
        Ok(())
    }
}

/// `σ₀ h₀ = σ + Σ σ_i h_i` of order `ℓ`.
#[derive(Clone, Debug)]
pub struct PutinarCertificate<T = f64> {
    pub sigma: SosCertificate<T>,
    pub sigma_0: SosCertificate<T>,
    pub sigma_i: Vec<SosCertificate<T>>,
    pub order: usize,
}

/// Coefficient rows `coeff_γ(Σ_b h_b · m_bᵀ W_b m_b)` for every `γ` in
/// `target`, as sparse symmetric functionals over the blocks.
fn gram_rows<T: Real>(
    target: &MonomialBasis,
    blocks: &[(Polynomial<T>, MonomialBasis)],
) -> Vec<SparseSym<T>> {
    let mut rows: Vec<SparseSym<T>> = vec![Vec::new(); target.len()];
    for (bl, (h, basis)) in blocks.iter().enumerate() {
        for a in 0..basis.len() {
            for b in a..basis.len() {
                let ab = basis.get(a).plus(basis.get(b));
                for (alpha, &c) in h.terms() {
                    let pos = target
                        .position(&alpha.plus(&ab))
                        .expect("target covers every product");
                    rows[pos].push((bl, a, b, c));
                }
            }
        }
    }
    rows
}

fn sos_engine_options() -> EngineOptions {
    EngineOptions {
        feas_tol: 1e-10,
        gap_tol: 1e-10,
        ..EngineOptions::default()
    }
}

/// Finds `W ⪰ 0` with `m_dᵀ W m_d = p`, `d = deg p / 2`.
pub fn sos_decompose<T: Real>(p: &Polynomial<T>) -> Result<SosCertificate<T>, SosError> {
    let n = p.n();
    if p.is_zero() {
        return Ok(SosCertificate::zero(n));
    }
    if p.degree() % 2 == 1 {
        return Err(SosError::NotSos(NotSosReason::OddDegree));
    }
    let d = p.degree() / 2;
    let basis = enumerate_basis(n, d)?;
    let target = enumerate_basis(n, 2 * d)?;
    let s = basis.len();
    let a = gram_rows(&target, &[(Polynomial::constant(n, T::one()), basis.clone())]);
    let b = p.to_coeff_vector(&target)?;
    let std = StandardSdp {
        block_sizes: vec![s],
        c: vec![DMatrix::identity(s, s)],
        a,
        b,
        shift: T::zero(),
    };
    let res = solve_standard(&std, &sos_engine_options());
    match res.status {
        EngineStatus::Optimal | EngineStatus::NearOptimal => {}
        EngineStatus::PrimalInfeasible => return Err(SosError::NotSos(NotSosReason::Infeasible)),
        EngineStatus::DualInfeasible => {
            return Err(SosError::NotSos(NotSosReason::Inconclusive(SdpStatus::Unbounded)))
        }
        EngineStatus::IterLimit => {
            return Err(SosError::NotSos(NotSosReason::Inconclusive(SdpStatus::IterLimit)))
        }
        EngineStatus::NumericalFailure => {
            return Err(SosError::NotSos(NotSosReason::Inconclusive(
                SdpStatus::NumericalFailure,
            )))
        }
    }
    let w = &res.x[0];
    let gram = (w + w.transpose()) * T::lit(0.5);
    let mut cert = SosCertificate {
        basis,
        gram,
        squares: None,
    };
    if cert.min_eigenvalue() < -T::lit(PSD_TOL)
        || cert.reconstruction_error(p) > T::lit(RECONSTRUCTION_TOL)
    {
        return Err(SosError::NotSos(NotSosReason::Inaccurate));
    }
    cert.squares = Some(cert.factor());
    Ok(cert)
}

/// Checks `σ₀ h₀ ≡ σ + Σ σ_i h_i` within `IDENTITY_TOL` per coefficient, with
/// `σ ∈ SOS_ℓ`, `σ₀ ∈ SOS_{ℓ−v}` (nonzero), `σ_i ∈ SOS_{ℓ−deg h_i}` and
/// `v = max(deg h₀, deg h_i)`. Degree violations are errors.
pub fn verify_putinar<T: Real>(
    cert: &PutinarCertificate<T>,
    h_list: &[Polynomial<T>],
    h0: &Polynomial<T>,
) -> Result<bool, SosError> {
    if cert.sigma_i.len() != h_list.len() {
        return Err(SosError::MultiplierCount {
            expected: h_list.len(),
            found: cert.sigma_i.len(),
        });
    }
    let n = h0.n();
    let all = std::iter::once(&cert.sigma)
        .chain(std::iter::once(&cert.sigma_0))
        .chain(&cert.sigma_i);
    for c in all {
        if c.n() != n {
            return Err(PolyError::DimensionMismatch {
                expected: n,
                found: c.n(),
            }
            .into());
        }
    }
    let v = h_list.iter().map(Polynomial::degree).fold(h0.degree(), usize::max) as i64;
    let l = cert.order as i64;
    cert.sigma.check_degree("sigma", l)?;
    cert.sigma_0.check_degree("sigma_0", l - v)?;
    for (i, (s, h)) in cert.sigma_i.iter().zip(h_list).enumerate() {
        s.check_degree(&format!("sigma_{}", i + 1), l - h.degree() as i64)?;
    }

    let psd = |c: &SosCertificate<T>| c.min_eigenvalue() >= -T::lit(PSD_TOL);
    if !psd(&cert.sigma) || !psd(&cert.sigma_0) || !cert.sigma_i.iter().all(psd) {
        return Ok(false);
    }
    let s0 = cert.sigma_0.polynomial();
    if s0.terms().all(|(_, c)| c.abs() <= T::lit(EIG_CLIP)) {
        return Ok(false);
    }
    let mut rhs = cert.sigma.polynomial();
    for (s, h) in cert.sigma_i.iter().zip(h_list) {
        rhs = &rhs + &(&s.polynomial() * h);
    }
    let diff = &(&s0 * h0) - &rhs;
    let ok = diff.terms().all(|(_, c)| c.abs() <= T::lit(IDENTITY_TOL));
    Ok(ok)
}

/// Outcome of one side of the relaxation pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideResult {
    pub status: SdpStatus,
    /// Bound in the problem's own sense; `None` unless optimal.
    pub value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub d: usize,
    pub sos: SideResult,
    pub mom: SideResult,
    pub gap: Option<f64>,
}

impl DualityReport {
    pub fn r_sos(&self) -> Option<f64> {
        self.sos.value
    }

    pub fn r_mom(&self) -> Option<f64> {
        self.mom.value
    }

    /// Both solved, or one side infeasible exactly when the other is unbounded.
    pub fn consistent(&self) -> bool {
        use SdpStatus::*;
        (self.sos.status.is_solved() && self.mom.status.is_solved())
            || matches!(
                (self.sos.status, self.mom.status),
                (Unbounded, Infeasible) | (Infeasible, Unbounded)
            )
    }
}

/// Solves `max t  s.t.  p − t = σ + Σ σ_i h_i` (for minimization; the
/// objective is negated for maximization) with `σ` over `ℕⁿ_d` and `σ_i`
/// over `ℕⁿ_{d−⌈deg h_i/2⌉}`. The free scalar `t` is eliminated: the SDP
/// minimizes the constant coefficient of the right-hand side subject to
/// matching every other coefficient of `p`.
pub fn solve_sos_side<T: Real>(prob: &PolyProblem<T>, d: usize, opts: &RelaxOptions) -> Result<SideResult, SosError> {
    let n = prob.n();
    let degree = prob.max_degree();
    if d == 0 || 2 * d < degree {
        return Err(RelaxError::OrderTooSmall { d, degree }.into());
    }
    let p = match prob.sense {
        Sense::Minimize => prob.objective.clone(),
        Sense::Maximize => -&prob.objective,
    };
    let target = enumerate_basis(n, 2 * d)?;
    let mut blocks = vec![(Polynomial::constant(n, T::one()), enumerate_basis(n, d)?)];
    for h in &prob.constraints {
        blocks.push((h.clone(), enumerate_basis(n, d - h.degree().div_ceil(2))?));
    }
    let rows = gram_rows(&target, &blocks);
    let coeffs = p.to_coeff_vector(&target)?;
    let zero = MultiIndex::zero(n);
    debug_assert_eq!(target.position(&zero), Some(0));

    let block_sizes: Vec<usize> = blocks.iter().map(|(_, b)| b.len()).collect();
    let c: Vec<DMatrix<T>> = blocks
        .iter()
        .map(|(h, b)| {
            let mut m = DMatrix::zeros(b.len(), b.len());
            m[(0, 0)] = h.coeff(&zero);
            m
        })
        .collect();
    let std = StandardSdp {
        block_sizes,
        c,
        a: rows[1..].to_vec(),
        b: coeffs[1..].to_vec(),
        shift: coeffs[0],
    };
    let engine = EngineOptions {
        feas_tol: opts.sdp.feas_tol,
        gap_tol: opts.sdp.gap_tol,
        max_iter: opts.sdp.max_iter,
        ..EngineOptions::default()
    };
    let res = solve_standard(&std, &engine);
    let status = match res.status {
        EngineStatus::Optimal => SdpStatus::Optimal,
        // t can grow without bound.
        EngineStatus::DualInfeasible => SdpStatus::Unbounded,
        EngineStatus::PrimalInfeasible => SdpStatus::Infeasible,
        EngineStatus::NearOptimal => SdpStatus::NearOptimal,
        EngineStatus::IterLimit => SdpStatus::IterLimit,
        EngineStatus::NumericalFailure => SdpStatus::NumericalFailure,
    };
    let value = status.is_solved().then(|| {
        let t = (coeffs[0] - res.primal_obj).as_f64();
        match prob.sense {
            Sense::Minimize => t,
            Sense::Maximize => -t,
        }
    });
    Ok(SideResult { status, value })
}

/// Solves both sides at order `d` and reports `|r_sos − r_mom|`.
pub fn strong_duality_check<T: Real>(
    prob: &PolyProblem<T>,
    d: usize,
    opts: &RelaxOptions,
) -> Result<DualityReport, SosError> {
    let sos = solve_sos_side(prob, d, opts)?;
    let mom = match solve_relaxation(prob, d, opts) {
        Ok(r) => SideResult {
            status: r.solver.status,
            value: Some(r.bound.as_f64()),
        },
        Err(RelaxError::Solver(status)) => SideResult {
            status,
            value: None,
        },
        Err(e) => return Err(e.into()),
    };
    let gap = match (sos.value, mom.value) {
        (Some(a), Some(b)) => Some((a - b).abs()),
        _ => None,
    };
    Ok(DualityReport { d, sos, mom, gap })
}

/// On-disk SOS certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SosCertificateDoc {
    pub order: usize,
    pub n: usize,
    pub basis: Vec<Vec<u32>>,
    /// Row-major.
    pub gram: Vec<f64>,
}

impl SosCertificateDoc {
    pub fn from_certificate<T: Real>(c: &SosCertificate<T>) -> Self {
        let s = c.basis.len();
        SosCertificateDoc {
            order: 2 * c.basis.max_degree(),
            n: c.n(),
            basis: c.basis.entries().iter().map(|e| e.exponents().to_vec()).collect(),
            gram: (0..s * s).map(|k| c.gram[(k / s, k % s)].as_f64()).collect(),
        }
    }

    pub fn to_certificate(&self) -> Result<SosCertificate<f64>, SosError> {
        let basis = enumerate_basis(self.n, self.order / 2)?;
        let listed: Vec<MultiIndex> = self.basis.iter().map(|e| MultiIndex::new(e.clone())).collect();
        if listed != basis.entries() {
            return Err(SosError::Malformed(
                "basis is not the graded basis of the stated order".into(),
            ));
        }
        let s = basis.len();
        if self.gram.len() != s * s {
            return Err(SosError::Malformed(format!(
                "gram has {} entries, expected {}",
                self.gram.len(),
                s * s
            )));
        }
        if self.gram.iter().any(|v| !v.is_finite()) {
            return Err(SosError::Malformed("non-finite gram entry".into()));
        }
        SosCertificate::from_gram(basis, DMatrix::from_row_slice(s, s, &self.gram))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PutinarCertificateDoc {
    pub order: usize,
    pub sigma: SosCertificateDoc,
    pub sigma_0: SosCertificateDoc,
    pub sigma_i: Vec<SosCertificateDoc>,
}

impl PutinarCertificateDoc {
    pub fn from_certificate<T: Real>(c: &PutinarCertificate<T>) -> Self {
        PutinarCertificateDoc {
            order: c.order,
            sigma: SosCertificateDoc::from_certificate(&c.sigma),
            sigma_0: SosCertificateDoc::from_certificate(&c.sigma_0),
            sigma_i: c.sigma_i.iter().map(SosCertificateDoc::from_certificate).collect(),
        }
    }

    pub fn to_certificate(&self) -> Result<PutinarCertificate<f64>, SosError> {
        Ok(PutinarCertificate {
            sigma: self.sigma.to_certificate()?,
            sigma_0: self.sigma_0.to_certificate()?,
            sigma_i: self
                .sigma_i
                .iter()
                .map(SosCertificateDoc::to_certificate)
                .collect::<Result<_, _>>()?,
            order: self.order,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(n: usize, pairs: &[(&[u32], f64)]) -> Polynomial<f64> {
        Polynomial::from_pairs(n, pairs).unwrap()
    }

    fn motzkin() -> Polynomial<f64> {
        poly(
            2,
            &[
                (&[4, 2], 1.0),
                (&[2, 4], 1.0),
                (&[2, 2], -3.0),
                (&[0, 0], 1.0),
            ],
        )
    }

    fn gram(n: usize, d: usize, rows: &[f64]) -> SosCertificate<f64> {
        let b = enumerate_basis(n, d).unwrap();
        let s = b.len();
        SosCertificate::from_gram(b, DMatrix::from_row_slice(s, s, rows)).unwrap()
    }

    #[test]
    fn perfect_square() {
        let p = poly(1, &[(&[2], 1.0), (&[1], -2.0), (&[0], 1.0)]);
        let c = sos_decompose(&p).unwrap();
        let want = [1.0, -1.0, -1.0, 1.0];
        for (k, w) in want.iter().enumerate() {
            assert!((c.gram[(k / 2, k % 2)] - w).abs() < 1e-6, "{}", c.gram);
        }
        assert!(c.reconstruction_error(&p) <= 1e-7);
        let squares = c.squares.as_ref().unwrap();
        assert_eq!(squares.len(), 1);
        let mut sum = Polynomial::zero(1);
        for q in squares {
            sum = &sum + &(q * q);
        }
        assert!((&sum - &p).terms().all(|(_, c)| c.abs() < 1e-7));
    }

    #[test]
    fn motzkin_rejected() {
        assert_eq!(
            sos_decompose(&motzkin()).unwrap_err(),
            SosError::NotSos(NotSosReason::Infeasible)
        );
    }

    #[test]
    fn negative_constant_rejected() {
        assert_eq!(
            sos_decompose(&Polynomial::constant(1, -1.0)).unwrap_err(),
            SosError::NotSos(NotSosReason::Infeasible)
        );
    }

    #[test]
    fn odd_degree_rejected() {
        let p = poly(1, &[(&[3], 1.0)]);
        assert_eq!(
            sos_decompose(&p).unwrap_err(),
            SosError::NotSos(NotSosReason::OddDegree)
        );
    }

    #[test]
    fn zero_is_sos() {
        let c = sos_decompose(&Polynomial::<f64>::zero(2)).unwrap();
        assert!(c.polynomial().is_zero());
    }

    #[test]
    fn example1_objective_minus_bound_is_sos() {
        let p = poly(
            2,
            &[
                (&[0, 0], 9.0 - 31.0 / 7.0),
                (&[0, 1], -4.0),
                (&[2, 0], 2.0),
                (&[1, 1], 1.0),
                (&[0, 2], 1.0),
            ],
        );
        let c = sos_decompose(&p).unwrap();
        assert!(c.reconstruction_error(&p) <= 1e-7);
        assert!(c.min_eigenvalue() >= -1e-8);
    }

    #[test]
    fn degenerate_identity() {
        let one = gram(1, 0, &[1.0]);
        let cert = PutinarCertificate {
            sigma: one.clone(),
            sigma_0: one.clone(),
            sigma_i: vec![],
            order: 0,
        };
        assert!(verify_putinar(&cert, &[], &Polynomial::constant(1, 1.0)).unwrap());
        assert!(!verify_putinar(&cert, &[], &Polynomial::constant(1, -1.0)).unwrap());
    }

    #[test]
    fn interval_certificate() {
        // x = x²/2 + ½·x(2 − x)
        let x = Polynomial::var(1, 0);
        let h1 = poly(1, &[(&[1], 2.0), (&[2], -1.0)]);
        let residual = &x - &h1.scale(0.5);
        let sigma = sos_decompose(&residual).unwrap();
        let cert = PutinarCertificate {
            sigma,
            sigma_0: gram(1, 0, &[1.0]),
            sigma_i: vec![gram(1, 0, &[0.5])],
            order: 2,
        };
        assert!(verify_putinar(&cert, &[h1.clone()], &x).unwrap());

        let mut wrong = cert.clone();
        wrong.sigma_i = vec![gram(1, 0, &[0.25])];
        assert!(!verify_putinar(&wrong, &[h1.clone()], &x).unwrap());

        let mut zero_s0 = cert.clone();
        zero_s0.sigma_0 = gram(1, 0, &[0.0]);
        assert!(!verify_putinar(&zero_s0, &[h1], &x).unwrap());
    }

    #[test]
    fn sigma0_degree_bound() {
        let x = Polynomial::var(1, 0);
        let h1 = poly(1, &[(&[1], 2.0), (&[2], -1.0)]);
        // ℓ = 2, v = 2, so σ₀ must be constant; give it degree 2.
        let cert = PutinarCertificate {
            sigma: gram(1, 1, &[0.0, 0.0, 0.0, 0.5]),
            sigma_0: gram(1, 1, &[1.0, 0.0, 0.0, 1.0]),
            sigma_i: vec![gram(1, 0, &[0.5])],
            order: 2,
        };
        assert!(matches!(
            verify_putinar(&cert, &[h1], &x),
            Err(SosError::DegreeBound { .. })
        ));
    }

    #[test]
    fn multiplier_count_mismatch() {
        let one = gram(1, 0, &[1.0]);
        let cert = PutinarCertificate {
            sigma: one.clone(),
            sigma_0: one.clone(),
            sigma_i: vec![one],
            order: 0,
        };
        assert!(matches!(
            verify_putinar(&cert, &[], &Polynomial::constant(1, 1.0)),
            Err(SosError::MultiplierCount { .. })
        ));
    }

    #[test]
    fn duality_example1() {
        let p = poly(
            2,
            &[
                (&[0, 0], 9.0),
                (&[0, 1], -4.0),
                (&[2, 0], 2.0),
                (&[1, 1], 1.0),
                (&[0, 2], 1.0),
            ],
        );
        let prob = PolyProblem::new(Sense::Minimize, p, vec![]).unwrap();
        let r = strong_duality_check(&prob, 1, &RelaxOptions::default()).unwrap();
        assert!((r.r_sos().unwrap() - 31.0 / 7.0).abs() < 1e-6, "{r:?}");
        assert!((r.r_mom().unwrap() - 31.0 / 7.0).abs() < 1e-6, "{r:?}");
        assert!(r.gap.unwrap() <= 1e-6);
        assert!(r.consistent());
    }

    #[test]
    fn duality_interval_max() {
        let x = Polynomial::var(1, 0);
        let h = poly(1, &[(&[1], 2.0), (&[2], -1.0)]);
        let prob = PolyProblem::new(Sense::Maximize, x, vec![h]).unwrap();
        let r = strong_duality_check(&prob, 1, &RelaxOptions::default()).unwrap();
        assert!((r.r_sos().unwrap() - 2.0).abs() < 1e-6, "{r:?}");
        assert!((r.r_mom().unwrap() - 2.0).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn duality_infeasible_set() {
        let x = Polynomial::<f64>::var(1, 0);
        let h1 = &x - &Polynomial::constant(1, 1.0);
        let h2 = -&x;
        let prob = PolyProblem::new(Sense::Minimize, x, vec![h1, h2]).unwrap();
        let r = strong_duality_check(&prob, 1, &RelaxOptions::default()).unwrap();
        assert_eq!(r.mom.status, SdpStatus::Infeasible);
        assert_eq!(r.sos.status, SdpStatus::Unbounded);
        assert!(r.consistent());
        assert!(r.gap.is_none());
    }

    #[test]
    fn certificate_round_trip() {
        let p = poly(1, &[(&[2], 1.0), (&[1], -2.0), (&[0], 1.0)]);
        let c = sos_decompose(&p).unwrap();
        let doc = SosCertificateDoc::from_certificate(&c);
        assert_eq!(doc.order, 2);
        assert_eq!(doc.basis, vec![vec![0], vec![1]]);
        let text = serde_json::to_string(&doc).unwrap();
        let back: SosCertificateDoc = serde_json::from_str(&text).unwrap();
        let c2 = back.to_certificate().unwrap();
        assert_eq!(c2.gram, c.gram);

        let mut bad = doc.clone();
        bad.gram.pop();
        assert!(matches!(bad.to_certificate(), Err(SosError::Malformed(_))));
        let mut bad = doc;
        bad.basis.swap(0, 1);
        assert!(matches!(bad.to_certificate(), Err(SosError::Malformed(_))));
    }
}
