//! Finite-dimensional operator algebra on weighted inner-product spaces.
//!
//! Every operator carries its domain and codomain tags; composing across
//! unequal tags is an error rather than a silent reinterpretation.

mod dense;
mod matrix;
mod space;

pub use dense::{sym_eigen, sym_min_eigenvalue, DenseLu, FACTOR_LIMIT};
pub use matrix::{MatrixOperator, DENSE_LIMIT};
pub use space::SpaceTag;

use nalgebra::DMatrix;

use crate::error::{OpError, Result};

/// Default relative threshold below which a singular value counts as zero.
pub const RANK_TOL: f64 = 1e-10;

/// Weighted adjoint: `<T u, v>_cod = <u, T* v>_dom`.
pub fn adjoint(t: &MatrixOperator) -> MatrixOperator {
    t.adjoint()
}

/// The skew block operator `[[0, -C*], [C, 0]]` on `H0 ⊕ H1`.
#[derive(Clone, Debug)]
pub struct BlockSkewOperator {
    c: MatrixOperator,
    a: MatrixOperator,
}

impl BlockSkewOperator {
    pub fn c(&self) -> &MatrixOperator {
        &self.c
    }

    pub fn a(&self) -> &MatrixOperator {
        &self.a
    }

    pub fn into_a(self) -> MatrixOperator {
        self.a
    }

    /// `H0`, the domain of `C`.
    pub fn first(&self) -> &SpaceTag {
        self.c.domain()
    }

    /// `H1`, the codomain of `C`.
    pub fn second(&self) -> &SpaceTag {
        self.c.codomain()
    }
}

pub fn make_block_skew(c: &MatrixOperator) -> BlockSkewOperator {
    let h0 = c.domain().clone();
    let h1 = c.codomain().clone();
    let neg_cstar = c.adjoint().neg();
    let a = MatrixOperator::from_blocks(&[&h0, &h1], &[&h0, &h1], &[(0, 1, &neg_cstar), (1, 0, c)])
        .expect("block tags are consistent by construction");
    BlockSkewOperator { c: c.clone(), a }
}

/// True iff `max |A + A*| <= tol`.
pub fn is_skew_selfadjoint(a: &MatrixOperator, tol: f64) -> Result<bool> {
    a.domain()
        .ensure_same(a.codomain(), "skew-selfadjointness check")?;
    Ok(a.add(&a.adjoint())?.max_abs() <= tol)
}

/// Entries of `T` in orthonormal coordinates: `W_cod^{1/2} T W_dom^{-1/2}`.
pub fn orthonormal_entries(t: &MatrixOperator) -> DMatrix<f64> {
    let mut m = t.to_dense();
    let (dom, cod) = (t.domain(), t.codomain());
    for j in 0..m.ncols() {
        let wd = dom.weight(j).sqrt();
        for i in 0..m.nrows() {
            m[(i, j)] *= cod.weight(i).sqrt() / wd;
        }
    }
    m
}

/// Inverse of [`orthonormal_entries`].
pub fn from_orthonormal_entries(
    m: DMatrix<f64>,
    domain: SpaceTag,
    codomain: SpaceTag,
) -> Result<MatrixOperator> {
    let mut m = m;
    if m.nrows() == codomain.dim() && m.ncols() == domain.dim() {
        for j in 0..m.ncols() {
            let wd = domain.weight(j).sqrt();
            for i in 0..m.nrows() {
                m[(i, j)] *= wd / codomain.weight(i).sqrt();
            }
        }
    }
    MatrixOperator::from_dense(m, domain, codomain)
}

/// Singular values of `T` measured in the weighted norms, descending.
pub fn singular_values(t: &MatrixOperator) -> Vec<f64> {
    let mut s: Vec<f64> = orthonormal_entries(t)
        .singular_values()
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompatibilityReport {
    /// Always true in finite dimensions.
    pub dense_definedness: bool,
    /// Whether `B*` has a bounded left inverse (full column rank).
    pub left_invertible: bool,
    /// Smallest singular value of `B*` (zero if `B*` has more columns than rows).
    pub smallest_singular_value: f64,
    /// Absolute threshold used for the rank decision.
    pub rank_tol: f64,
}

/// Compatibility of `B: H0 -> X` with `C: H0 -> H1`.
pub fn check_compatibility(c: &MatrixOperator, b: &MatrixOperator) -> Result<CompatibilityReport> {
    c.domain()
        .ensure_same(b.domain(), "compatibility (B and C share a domain)")?;
    let sv = singular_values(b);
    let largest = sv.first().copied().unwrap_or(0.0);
    // B*: X -> H0 needs dim X independent columns
    let smallest = if b.nrows() > b.ncols() {
        0.0
    } else {
        sv.get(b.nrows() - 1).copied().unwrap_or(0.0)
    };
    let rank_tol = RANK_TOL * largest;
    Ok(CompatibilityReport {
        dense_definedness: true,
        left_invertible: largest > 0.0 && smallest > rank_tol,
        smallest_singular_value: smallest,
        rank_tol,
    })
}

/// Checks `(C B*)* = B C*` entrywise within `tol`.
pub fn verify_adjoint_theorem(c: &MatrixOperator, b: &MatrixOperator, tol: f64) -> Result<bool> {
    let lhs = c.compose(&b.adjoint())?.adjoint();
    let rhs = b.compose(&c.adjoint())?;
    Ok(lhs.max_abs_diff(&rhs)? <= tol)
}

/// The relative `[[0, -(B1 C B0*)*], [B1 C B0*, 0]]` on `X ⊕ Y`, with
/// `B0: H0 -> X` and `B1: H1 -> Y`.
pub fn make_relative(
    a: &BlockSkewOperator,
    b0: &MatrixOperator,
    b1: &MatrixOperator,
) -> Result<BlockSkewOperator> {
    let c = a.c();
    let r0 = check_compatibility(c, b0)?;
    if !r0.left_invertible {
        return Err(OpError::Precondition(format!(
            "B0* has no bounded left inverse (smallest singular value {:e})",
            r0.smallest_singular_value
        )));
    }
    let cstar = c.adjoint();
    let r1 = check_compatibility(&cstar, b1)?;
    if !r1.left_invertible {
        return Err(OpError::Precondition(format!(
            "B1 is not compatible with C* (smallest singular value {:e})",
            r1.smallest_singular_value
        )));
    }
    Ok(make_block_skew(&b1.compose(c)?.compose(&b0.adjoint())?))
}
