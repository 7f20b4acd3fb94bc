//! Multivariate polynomials over a graded monomial basis.
//!
//! Exponent vectors are ordered by total degree first and then
//! lexicographically *descending*, so for two variables the degree-2 block
//! reads `(2,0), (1,1), (0,2)`. Every coefficient vector, moment vector and
//! moment matrix in the crate uses this order.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Coeff;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("basis size C({n}+{v}, {v}) overflows u64")]
    Range { n: usize, v: usize },
    #[error("ambient dimension must be at least 1")]
    ZeroDimension,
    #[error("polynomial degree {degree} exceeds basis degree {basis_degree}")]
    DegreeExceedsBasis { degree: usize, basis_degree: usize },
    #[error("coefficient vector has length {found}, basis has {expected} entries")]
    CoeffLength { expected: usize, found: usize },
    #[error("term {term}: negative exponent {value}")]
    NegativeExponent { term: usize, value: i64 },
    #[error("term {term}: exponent array has length {found}, expected n = {expected}")]
    ExponentLength { term: usize, expected: usize, found: usize },
    #[error("term {term}: coefficient is not finite")]
    NonFinite { term: usize },
    #[error("malformed polynomial: {0}")]
    Malformed(String),
}

/// Exponent vector `α ∈ ℕⁿ`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// Unit vector `e_i` in dimension `n`.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&a| a as usize).sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// Componentwise sum; panics on dimension mismatch.
    pub fn plus(&self, other: &MultiIndex) -> MultiIndex {
        assert_eq!(self.dim(), other.dim(), "multi-index dimension mismatch");
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `x^α` by repeated multiplication.
    pub fn eval_monomial<T: Coeff>(&self, x: &[T]) -> T {
        let mut acc = T::one();
        for (xi, &a) in x.iter().zip(&self.0) {
            for _ in 0..a {
                acc = acc * xi.clone();
            }
        }
        acc
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// `s_{n,v} = C(n+v, v)`, the number of monomials of degree at most `v` in
/// `n` variables.
pub fn basis_size(n: usize, v: usize) -> Result<u64, PolyError> {
    if n == 0 {
        return Err(PolyError::ZeroDimension);
    }
    // C(n+v, k) with k = min(n, v); each partial product is itself a binomial.
    let k = n.min(v) as u128;
    let top = (n + v) as u128;
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc
            .checked_mul(top - k + i)
            .ok_or(PolyError::Range { n, v })?
            / i;
        if acc > u64::MAX as u128 {
            return Err(PolyError::Range { n, v });
        }
    }
    Ok(acc as u64)
}

/// All multi-indices of `ℕⁿ_v`, graded and descending-lex within each degree.
#[derive(Clone, Debug, PartialEq)]
pub struct MonomialBasis {
    n: usize,
    max_degree: usize,
    entries: Vec<MultiIndex>,
}

impl MonomialBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[MultiIndex] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> &MultiIndex {
        &self.entries[i]
    }

    /// Position of `alpha`, by binary search over the sorted entries.
    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        if alpha.dim() != self.n || alpha.degree() > self.max_degree {
            return None;
        }
        self.entries.binary_search(alpha).ok()
    }

    /// Evaluates `m_v(x)`.
    pub fn eval<T: Coeff>(&self, x: &[T]) -> Vec<T> {
        self.entries.iter().map(|a| a.eval_monomial(x)).collect()
    }
}

pub fn enumerate_basis(n: usize, v: usize) -> Result<MonomialBasis, PolyError> {
    let size = basis_size(n, v)?;
    let mut entries = Vec::with_capacity(size as usize);
    let mut scratch = vec![0u32; n];
    for deg in 0..=v {
        push_compositions(&mut scratch, 0, deg as u32, &mut entries);
    }
    debug_assert_eq!(entries.len() as u64, size);
    Ok(MonomialBasis {
        n,
        max_degree: v,
        entries,
    })
}

// Writes every split of `remaining` over scratch[pos..], leading coordinate
// largest first.
fn push_compositions(scratch: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == scratch.len() {
        scratch[pos] = remaining;
        out.push(MultiIndex(scratch.to_vec()));
        return;
    }
    for a in (0..=remaining).rev() {
        scratch[pos] = a;
        push_compositions(scratch, pos + 1, remaining - a, out);
    }
    scratch[pos] = 0;
}

/// Sparse polynomial `Σ p_α x^α`, kept in canonical form (no stored zeros).
#[derive(Clone, PartialEq, Debug)]
pub struct Polynomial<T = f64> {
    n: usize,
    terms: BTreeMap<MultiIndex, T>,
}

impl<T: Coeff> Polynomial<T> {
    pub fn zero(n: usize) -> Self {
        Polynomial {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: T) -> Self {
        Self::monomial(MultiIndex::zero(n), c)
    }

    /// The coordinate function `x_i` (zero-based).
    pub fn var(n: usize, i: usize) -> Self {
        Self::monomial(MultiIndex::unit(n, i), T::one())
    }

    pub fn monomial(alpha: MultiIndex, c: T) -> Self {
        let n = alpha.dim();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(alpha, c);
        }
        Polynomial { n, terms }
    }

    /// Builds from `(α, c)` pairs; repeated exponents are summed and exact
    /// zeros dropped.
    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (MultiIndex, T)>,
    {
        let mut p = Polynomial::zero(n);
        for (alpha, c) in terms {
            if alpha.dim() != n {
                return Err(PolyError::DimensionMismatch {
                    expected: n,
                    found: alpha.dim(),
                });
            }
            p.add_term(alpha, c);
        }
        Ok(p)
    }

    /// Convenience constructor from raw exponent slices.
    pub fn from_pairs(n: usize, pairs: &[(&[u32], T)]) -> Result<Self, PolyError> {
        Self::from_terms(
            n,
            pairs
                .iter()
                .map(|(e, c)| (MultiIndex::new(e.to_vec()), c.clone())),
        )
    }

    fn add_term(&mut self, alpha: MultiIndex, c: T) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&alpha) {
            Some(old) => {
                let sum = old + c;
                if !sum.is_zero() {
                    self.terms.insert(alpha, sum);
                }
            }
            None => {
                self.terms.insert(alpha, c);
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &T)> {
        self.terms.iter()
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> T {
        self.terms.get(alpha).cloned().unwrap_or_else(T::zero)
    }

    pub fn eval(&self, x: &[T]) -> Result<T, PolyError> {
        self.check_dim(x.len())?;
        Ok(self.terms.iter().fold(T::zero(), |acc, (alpha, c)| {
            acc + c.clone() * alpha.eval_monomial(x)
        }))
    }

    fn check_dim(&self, found: usize) -> Result<(), PolyError> {
        if found != self.n {
            return Err(PolyError::DimensionMismatch {
                expected: self.n,
                found,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_dim(other.n)?;
        let mut out = self.clone();
        for (alpha, c) in &other.terms {
            out.add_term(alpha.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.try_add(&other.scale(-T::one()))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_dim(other.n)?;
        let mut out = Polynomial::zero(self.n);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.add_term(a.plus(b), ca.clone() * cb.clone());
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: T) -> Self {
        let mut out = Polynomial::zero(self.n);
        for (alpha, v) in &self.terms {
            out.add_term(alpha.clone(), v.clone() * c.clone());
        }
        out
    }

    /// `p(D x)` for the diagonal substitution `x_i ↦ factors[i] · x_i`.
    pub fn scale_variables(&self, factors: &[T]) -> Result<Self, PolyError> {
        self.check_dim(factors.len())?;
        let mut out = Polynomial::zero(self.n);
        for (alpha, c) in &self.terms {
            out.add_term(alpha.clone(), c.clone() * alpha.eval_monomial(factors));
        }
        Ok(out)
    }

    /// `p(s + D x)` for the affine substitution `x_i ↦ shift[i] + factors[i] · x_i`.
    pub fn affine_substitute(&self, shift: &[T], factors: &[T]) -> Result<Self, PolyError> {
        self.check_dim(shift.len())?;
        self.check_dim(factors.len())?;
        let n = self.n;
        let images: Vec<Polynomial<T>> = (0..n)
            .map(|i| {
                let mut lin = Polynomial::constant(n, shift[i].clone());
                lin.add_term(MultiIndex::unit(n, i), factors[i].clone());
                lin
            })
            .collect();
        let mut out = Polynomial::zero(n);
        for (alpha, c) in &self.terms {
            let mut term = Polynomial::constant(n, c.clone());
            for (i, &e) in alpha.exponents().iter().enumerate() {
                for _ in 0..e {
                    term = &term * &images[i];
                }
            }
            out = &out + &term;
        }
        Ok(out)
    }

    /// Dense coordinates on `basis`, zero where a monomial is absent.
    pub fn to_coeff_vector(&self, basis: &MonomialBasis) -> Result<Vec<T>, PolyError> {
        self.check_dim(basis.n())?;
        if self.degree() > basis.max_degree() {
            return Err(PolyError::DegreeExceedsBasis {
                degree: self.degree(),
                basis_degree: basis.max_degree(),
            });
        }
        let mut out = vec![T::zero(); basis.len()];
        for (alpha, c) in &self.terms {
            // Present by the degree check above.
            let pos = basis.position(alpha).expect("monomial within basis degree");
            out[pos] = c.clone();
        }
        Ok(out)
    }

    pub fn from_coeff_vector(basis: &MonomialBasis, coeffs: &[T]) -> Result<Self, PolyError> {
        if coeffs.len() != basis.len() {
            return Err(PolyError::CoeffLength {
                expected: basis.len(),
                found: coeffs.len(),
            });
        }
        Self::from_terms(
            basis.n(),
            basis.entries().iter().cloned().zip(coeffs.iter().cloned()),
        )
    }

    /// Converts the coefficient type, re-canonicalizing afterwards.
    pub fn map_coeffs<U: Coeff>(&self, mut f: impl FnMut(&T) -> U) -> Polynomial<U> {
        let mut out = Polynomial::zero(self.n);
        for (alpha, c) in &self.terms {
            out.add_term(alpha.clone(), f(c));
        }
        out
    }
}

impl<T: Coeff> Add for &Polynomial<T> {
    type Output = Polynomial<T>;

    fn add(self, rhs: Self) -> Polynomial<T> {
        self.try_add(rhs).expect("polynomial dimension mismatch")
    }
}

impl<T: Coeff> Sub for &Polynomial<T> {
    type Output = Polynomial<T>;

    fn sub(self, rhs: Self) -> Polynomial<T> {
        self.try_sub(rhs).expect("polynomial dimension mismatch")
    }
}

impl<T: Coeff> Mul for &Polynomial<T> {
    type Output = Polynomial<T>;

    fn mul(self, rhs: Self) -> Polynomial<T> {
        self.try_mul(rhs).expect("polynomial dimension mismatch")
    }
}

impl<T: Coeff> Neg for &Polynomial<T> {
    type Output = Polynomial<T>;

    fn neg(self) -> Polynomial<T> {
        self.scale(-T::one())
    }
}

impl<T: Coeff + fmt::Display> fmt::Display for Polynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (alpha, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for (j, &a) in alpha.exponents().iter().enumerate() {
                match a {
                    0 => {}
                    1 => write!(f, "*x{}", j + 1)?,
                    _ => write!(f, "*x{}^{}", j + 1, a)?,
                }
            }
        }
        Ok(())
    }
}

/// On-disk term: `{"exp": [..], "c": ..}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    pub exp: Vec<i64>,
    pub c: f64,
}

/// On-disk polynomial: `{"n": .., "terms": [..]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PolynomialDoc {
    pub n: usize,
    pub terms: Vec<TermDoc>,
}

impl PolynomialDoc {
    pub fn to_polynomial(&self) -> Result<Polynomial<f64>, PolyError> {
        if self.n == 0 {
            return Err(PolyError::ZeroDimension);
        }
        let mut p = Polynomial::zero(self.n);
        for (i, t) in self.terms.iter().enumerate() {
            if t.exp.len() != self.n {
                return Err(PolyError::ExponentLength {
                    term: i,
                    expected: self.n,
                    found: t.exp.len(),
                });
            }
            if !t.c.is_finite() {
                return Err(PolyError::NonFinite { term: i });
            }
            let mut exps = Vec::with_capacity(self.n);
            for &e in &t.exp {
                if e < 0 {
                    return Err(PolyError::NegativeExponent { term: i, value: e });
                }
                let e = u32::try_from(e)
                    .map_err(|_| PolyError::Malformed(format!("term {i}: exponent {e} too large")))?;
                exps.push(e);
            }
            p.add_term(MultiIndex(exps), t.c);
        }
        Ok(p)
    }

    pub fn from_polynomial(p: &Polynomial<f64>) -> Self {
        PolynomialDoc {
            n: p.n(),
            terms: p
                .terms()
                .map(|(alpha, &c)| TermDoc {
                    exp: alpha.exponents().iter().map(|&a| a as i64).collect(),
                    c,
                })
                .collect(),
        }
    }
}

pub fn parse_polynomial(text: &str) -> Result<Polynomial<f64>, PolyError> {
    let doc: PolynomialDoc =
        serde_json::from_str(text).map_err(|e| PolyError::Malformed(e.to_string()))?;
    doc.to_polynomial()
}

pub fn serialize_polynomial(p: &Polynomial<f64>) -> String {
    serde_json::to_string(&PolynomialDoc::from_polynomial(p)).expect("polynomial serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    fn example1() -> Polynomial<f64> {
        // (x2 - 2)^2 + 2 x1^2 + x1 x2 + 5, expanded
        Polynomial::from_pairs(
            2,
            &[
                (&[0, 0], 9.0),
                (&[0, 1], -4.0),
                (&[2, 0], 2.0),
                (&[1, 1], 1.0),
                (&[0, 2], 1.0),
            ],
        )
        .unwrap()
    }

    fn mi(e: &[u32]) -> MultiIndex {
        MultiIndex::new(e.to_vec())
    }

    #[test]
    fn basis_sizes() {
        assert_eq!(basis_size(2, 2).unwrap(), 6);
        assert_eq!(basis_size(1, 0).unwrap(), 1);
        assert_eq!(basis_size(2, 6).unwrap(), 28);
        assert_eq!(basis_size(32, 32).unwrap(), 1_832_624_140_942_590_534);
        assert_eq!(basis_size(1, 10_000).unwrap(), 10_001);
        assert!(matches!(basis_size(40, 40), Err(PolyError::Range { .. })));
        assert_eq!(basis_size(0, 3), Err(PolyError::ZeroDimension));
    }

    #[test]
    fn enumerates_graded_order() {
        let b = enumerate_basis(2, 2).unwrap();
        let want: Vec<MultiIndex> = [[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]]
            .iter()
            .map(|e| mi(e))
            .collect();
        assert_eq!(b.entries(), &want[..]);

        let b = enumerate_basis(1, 2).unwrap();
        assert_eq!(b.entries(), &[mi(&[0]), mi(&[1]), mi(&[2])]);

        let b = enumerate_basis(3, 1).unwrap();
        assert_eq!(
            b.entries(),
            &[mi(&[0, 0, 0]), mi(&[1, 0, 0]), mi(&[0, 1, 0]), mi(&[0, 0, 1])]
        );
    }

    #[test]
    fn eval_example1() {
        let p = example1();
        assert_eq!(p.eval(&[0.0, 0.0]).unwrap(), 9.0);
        assert_eq!(Polynomial::<f64>::zero(2).eval(&[3.0, -1.0]).unwrap(), 0.0);

        // exact: p(-4/7, 16/7) = 31/7
        let q = p.map_coeffs(|&c| Rational64::from_integer(c as i64));
        let x = [Rational64::new(-4, 7), Rational64::new(16, 7)];
        assert_eq!(q.eval(&x).unwrap(), Rational64::new(31, 7));
        assert!(matches!(
            p.eval(&[1.0]),
            Err(PolyError::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn arithmetic() {
        let p = example1();
        assert!((&p + &p.scale(-1.0)).is_zero());

        let x1 = Polynomial::<f64>::var(2, 0);
        let x2 = Polynomial::<f64>::var(2, 1);
        let prod = &x1 * &x2;
        assert_eq!(prod.num_terms(), 1);
        assert_eq!(prod.coeff(&mi(&[1, 1])), 1.0);

        // f - 0.4 g with f = x, g = x^2 + 1
        let f = Polynomial::<f64>::var(1, 0);
        let g = Polynomial::from_pairs(1, &[(&[2], 1.0), (&[0], 1.0)]).unwrap();
        let p = &f - &g.scale(0.4);
        assert_eq!(p.coeff(&mi(&[0])), -0.4);
        assert_eq!(p.coeff(&mi(&[1])), 1.0);
        assert_eq!(p.coeff(&mi(&[2])), -0.4);
        assert_eq!(p.num_terms(), 3);

        assert_eq!((&example1() * &example1()).degree(), 4);
        assert!(x1.try_mul(&Polynomial::var(3, 0)).is_err());
    }

    #[test]
    fn coefficient_vectors() {
        let b = enumerate_basis(2, 2).unwrap();
        assert_eq!(
            example1().to_coeff_vector(&b).unwrap(),
            vec![9.0, 0.0, -4.0, 2.0, 1.0, 1.0]
        );
        assert_eq!(
            Polynomial::constant(2, 1.0).to_coeff_vector(&b).unwrap(),
            vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]
        );
        let x1sq = Polynomial::monomial(mi(&[2, 0]), 1.0);
        assert_eq!(
            x1sq.to_coeff_vector(&b).unwrap(),
            vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0]
        );
        let cubic = Polynomial::monomial(mi(&[3, 0]), 1.0);
        assert!(matches!(
            cubic.to_coeff_vector(&b),
            Err(PolyError::DegreeExceedsBasis { degree: 3, basis_degree: 2 })
        ));
    }

    #[test]
    fn zero_degree_and_canonical_form() {
        let z = Polynomial::<f64>::zero(3);
        assert_eq!(z.degree(), 0);
        let p = Polynomial::from_pairs(1, &[(&[1], 2.0), (&[1], -2.0), (&[0], 0.0)]).unwrap();
        assert!(p.is_zero());
    }

    #[test]
    fn parse_and_serialize() {
        let p = parse_polynomial(r#"{"n":2,"terms":[{"exp":[0,0],"c":9},{"exp":[0,1],"c":-4}]}"#)
            .unwrap();
        assert_eq!(p.coeff(&mi(&[0, 0])), 9.0);
        assert_eq!(p.coeff(&mi(&[0, 1])), -4.0);
        assert_eq!(p.num_terms(), 2);

        let e1 = example1();
        assert_eq!(parse_polynomial(&serialize_polynomial(&e1)).unwrap(), e1);

        let dup = parse_polynomial(r#"{"n":1,"terms":[{"exp":[1],"c":1.5},{"exp":[1],"c":2}]}"#)
            .unwrap();
        assert_eq!(dup.coeff(&mi(&[1])), 3.5);

        assert!(matches!(
            parse_polynomial(r#"{"n":2,"terms":[{"exp":[1],"c":1}]}"#),
            Err(PolyError::ExponentLength { term: 0, expected: 2, found: 1 })
        ));
        assert!(matches!(
            parse_polynomial(r#"{"n":1,"terms":[{"exp":[-1],"c":1}]}"#),
            Err(PolyError::NegativeExponent { term: 0, value: -1 })
        ));
        assert!(matches!(
            parse_polynomial(r#"{"n":1,"terms":[{"exp":[1]}]}"#),
            Err(PolyError::Malformed(_))
        ));
    }

    #[test]
    fn scale_variables_substitutes() {
        let p = example1();
        let q = p.scale_variables(&[2.0, 3.0]).unwrap();
        let x = [0.3, -0.7];
        assert!((q.eval(&x).unwrap() - p.eval(&[0.6, -2.1]).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn affine_substitute_composes() {
        let p = example1();
        let q = p.affine_substitute(&[1.0, -2.0], &[0.5, 3.0]).unwrap();
        assert_eq!(q.degree(), p.degree());
        for x in [[0.3, -0.7], [0.0, 0.0], [-1.0, 1.0]] {
            let y = [1.0 + 0.5 * x[0], -2.0 + 3.0 * x[1]];
            assert!((q.eval(&x).unwrap() - p.eval(&y).unwrap()).abs() < 1e-10);
        }
        // (1 + x)² = 1 + 2x + x²
        let sq = Polynomial::from_pairs(1, &[(&[2], 1.0)]).unwrap().affine_substitute(&[1.0], &[1.0]).unwrap();
        assert_eq!(sq, Polynomial::from_pairs(1, &[(&[0], 1.0), (&[1], 2.0), (&[2], 1.0)]).unwrap());
        assert!(p.affine_substitute(&[0.0], &[1.0, 1.0]).is_err());
    }
}
