//! Moment and localizing matrices as affine functions of the moment vector.
//!
//! The moment vector `y` of a half-order `d` relaxation is indexed by
//! `ℕⁿ_{2d}` in graded order, so `y[0]` is always the mass `y_{0…0}`.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::polycore::{enumerate_basis, MonomialBasis, MultiIndex, PolyError, Polynomial};
use crate::scalar::Coeff;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MomentError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("relaxation half-order must be at least 1")]
    ZeroOrder,
    #[error("order d = {d} too small for a constraint of degree {degree}")]
    OrderTooSmall { d: usize, degree: usize },
    #[error("moment vector has length {found}, spec needs at least {needed}")]
    LengthMismatch { needed: usize, found: usize },
}

/// Positions of the linearized monomials `y_α`, `α ∈ ℕⁿ_{2d}`.
#[derive(Clone, Debug)]
pub struct MomentIndexMap {
    d: usize,
    y_basis: MonomialBasis,
}

impl MomentIndexMap {
    pub fn new(n: usize, d: usize) -> Result<Self, MomentError> {
        Ok(MomentIndexMap {
            d,
            y_basis: enumerate_basis(n, 2 * d)?,
        })
    }

    pub fn n(&self) -> usize {
        self.y_basis.n()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.y_basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y_basis.is_empty()
    }

    pub fn y_basis(&self) -> &MonomialBasis {
        &self.y_basis
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.y_basis.position(alpha)
    }
}

/// Symmetric matrix whose `(i, j)` entry is `Σ c · y[pos]` over its term list.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSpec<T = f64> {
    side: usize,
    entries: Vec<Vec<(T, usize)>>,
}

impl<T: Coeff> MatrixSpec<T> {
    /// Builds a spec from a generator for the upper triangle; the lower
    /// triangle is a copy, so symmetry holds exactly.
    pub fn from_upper(side: usize, mut entry: impl FnMut(usize, usize) -> Vec<(T, usize)>) -> Self {
        let mut entries = vec![Vec::new(); side * side];
        for i in 0..side {
            for j in i..side {
                let terms = entry(i, j);
                if i != j {
                    entries[j * side + i] = terms.clone();
                }
                entries[i * side + j] = terms;
            }
        }
        MatrixSpec { side, entries }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn entry(&self, i: usize, j: usize) -> &[(T, usize)] {
        &self.entries[i * self.side + j]
    }

    /// One past the largest referenced moment position (0 if none).
    pub fn max_position(&self) -> usize {
        self.entries
            .iter()
            .flat_map(|e| e.iter().map(|&(_, p)| p + 1))
            .max()
            .unwrap_or(0)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.side).all(|i| (0..i).all(|j| self.entry(i, j) == self.entry(j, i)))
    }

    /// Upper-triangle entries `(i, j, coeff)` grouped by moment position.
    pub fn by_position(&self, num_vars: usize) -> Vec<Vec<(usize, usize, T)>> {
        let mut out = vec![Vec::new(); num_vars];
        for i in 0..self.side {
            for j in i..self.side {
                for (c, p) in self.entry(i, j) {
                    out[*p].push((i, j, c.clone()));
                }
            }
        }
        out
    }
}

/// `M_d(y)`: entry `(i, j)` is `y_{β_i + β_j}` over the degree-`d` basis.
pub fn moment_matrix_spec<T: Coeff>(n: usize, d: usize) -> Result<MatrixSpec<T>, MomentError> {
    localizing_matrix_spec(&Polynomial::constant(n, T::one()), n, d)
}

/// `M_{d−⌈deg h/2⌉}(h y)`: entry `(i, j)` is `Σ_α h_α y_{α+β_i+β_j}`.
pub fn localizing_matrix_spec<T: Coeff>(
    h: &Polynomial<T>,
    n: usize,
    d: usize,
) -> Result<MatrixSpec<T>, MomentError> {
    if d == 0 {
        return Err(MomentError::ZeroOrder);
    }
    if h.n() != n {
        return Err(PolyError::DimensionMismatch {
            expected: n,
            found: h.n(),
        }
        .into());
    }
    let half = h.degree().div_ceil(2);
    if half > d {
        return Err(MomentError::OrderTooSmall {
            d,
            degree: h.degree(),
        });
    }
    let index = MomentIndexMap::new(n, d)?;
    let basis = enumerate_basis(n, d - half)?;
    let spec = MatrixSpec::from_upper(basis.len(), |i, j| {
        let bij = basis.get(i).plus(basis.get(j));
        h.terms()
            .map(|(alpha, c)| {
                let pos = index
                    .position(&alpha.plus(&bij))
                    .expect("degree bounded by 2d");
                (c.clone(), pos)
            })
            .collect()
    });
    Ok(spec)
}

/// `y_α = x^α` for all `α ∈ ℕⁿ_{2d}`.
pub fn moments_from_point<T: Coeff>(x: &[T], d: usize) -> Result<Vec<T>, MomentError> {
    let basis = enumerate_basis(x.len(), 2 * d)?;
    Ok(basis.eval(x))
}

pub fn assemble<T: Coeff>(spec: &MatrixSpec<T>, y: &[T]) -> Result<DMatrix<T>, MomentError> {
    let needed = spec.max_position();
    if y.len() < needed {
        return Err(MomentError::LengthMismatch {
            needed,
            found: y.len(),
        });
    }
    Ok(DMatrix::from_fn(spec.side, spec.side, |i, j| {
        spec.entry(i, j)
            .iter()
            .fold(T::zero(), |acc, (c, p)| acc + c.clone() * y[*p].clone())
    }))
}
