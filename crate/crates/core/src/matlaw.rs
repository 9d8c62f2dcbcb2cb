//! Affine material laws `M0 + ∂₀⁻¹ M1`, their well-posedness test,
//! normalization and null-space elimination.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{OpError, Result};
use crate::linops::{
    from_orthonormal_entries, orthonormal_entries, sym_eigen, sym_min_eigenvalue, DenseLu,
    MatrixOperator, SpaceTag, RANK_TOL,
};
use crate::subspaces::ProjectionPair;

#[derive(Clone, Debug)]
pub struct MaterialLaw {
    pub m0: MatrixOperator,
    pub m1: MatrixOperator,
}

impl MaterialLaw {
    pub fn new(m0: MatrixOperator, m1: MatrixOperator) -> Result<Self> {
        m0.domain()
            .ensure_same(m0.codomain(), "material law (M0 square)")?;
        m0.domain()
            .ensure_same(m1.domain(), "material law (M1 domain)")?;
        m0.domain()
            .ensure_same(m1.codomain(), "material law (M1 codomain)")?;
        Ok(Self { m0, m1 })
    }

    /// `M0 = I`, `M1 = 0`.
    pub fn identity(space: &SpaceTag) -> Self {
        Self {
            m0: MatrixOperator::identity(space),
            m1: MatrixOperator::zeros(space, space),
        }
    }

    pub fn from_diagonals(space: &SpaceTag, m0: &[f64], m1: &[f64]) -> Result<Self> {
        Self::new(
            MatrixOperator::diagonal(space, m0)?,
            MatrixOperator::diagonal(space, m1)?,
        )
    }

    pub fn space(&self) -> &SpaceTag {
        self.m0.domain()
    }

    /// `(B M0 B*, B M1 B*)` on the codomain of `B`.
    pub fn congruence(&self, b: &MatrixOperator) -> Result<Self> {
        let bs = b.adjoint();
        Self::new(
            b.compose(&self.m0)?.compose(&bs)?,
            b.compose(&self.m1)?.compose(&bs)?,
        )
    }

    pub fn block_diag(laws: &[&MaterialLaw]) -> Result<Self> {
        couple(laws, &BTreeMap::new())
    }
}

/// Result of the structural positivity test.
#[derive(Clone, Debug, PartialEq)]
pub struct WellposednessReport {
    pub m0_selfadjoint: bool,
    pub m0_nonneg: bool,
    pub kernel_block_positive: bool,
    /// `min(λ_min(M0 on its range), λ_min(sym M1 on ker M0))`, or 0 on failure.
    pub c0_estimate: f64,
    /// For `ν >= nu_threshold`, `ν M0 + sym M1 >= c0 / 2`, and `>= c0` when
    /// `sym M1` does not couple range and kernel of `M0`.
    pub nu_threshold: f64,
    pub range_dim: usize,
    pub kernel_dim: usize,
}

impl WellposednessReport {
    pub fn passed(&self) -> bool {
        self.m0_selfadjoint
            && self.m0_nonneg
            && self.kernel_block_positive
            && self.c0_estimate > 0.0
    }
}

struct M0Split {
    vals: DVector<f64>,
    vecs: DMatrix<f64>,
    range: Vec<usize>,
    kernel: Vec<usize>,
    selfadjoint: bool,
}

fn split_m0(law: &MaterialLaw, tol: f64) -> M0Split {
    let m0 = orthonormal_entries(&law.m0);
    let scale = m0.amax().max(1.0);
    let selfadjoint = (&m0 - m0.transpose()).amax() <= tol * scale;
    let (vals, vecs) = sym_eigen(&m0);
    let top = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let cut = tol.max(RANK_TOL * top);
    let range = (0..vals.len()).filter(|i| vals[*i] > cut).collect();
    let kernel = (0..vals.len()).filter(|i| vals[*i] <= cut).collect();
    M0Split {
        vals,
        vecs,
        range,
        kernel,
        selfadjoint,
    }
}

fn columns(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), idx.len(), |i, j| m[(i, idx[j])])
}

/// Checks positivity of `M0` on its range and of `sym M1` on `ker M0`.
pub fn check_wellposed(law: &MaterialLaw, tol: f64) -> Result<WellposednessReport> {
    let split = split_m0(law, tol);
    if !split.selfadjoint {
        return Err(OpError::Structural("M0 is not selfadjoint".into()));
    }
    let min_eig = split.vals.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    let top = split
        .vals
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(1.0);
    let m0_nonneg = min_eig >= -tol * top;

    let m1 = orthonormal_entries(&law.m1);
    let s1 = (&m1 + m1.transpose()) * 0.5;
    let vr = columns(&split.vecs, &split.range);
    let vk = columns(&split.vecs, &split.kernel);
    let c_r = split
        .range
        .iter()
        .fold(f64::INFINITY, |m, i| m.min(split.vals[*i]));
    let c_k = sym_min_eigenvalue(&(vk.transpose() * &s1 * &vk));
    let kernel_block_positive = split.kernel.is_empty() || c_k > tol;

    let passed = m0_nonneg && kernel_block_positive;
    let c0 = if passed { c_r.min(c_k) } else { 0.0 };
    let nu_threshold = if !passed || split.range.is_empty() {
        0.0
    } else {
        let m_r = (-sym_min_eigenvalue(&(vr.transpose() * &s1 * &vr))).max(0.0);
        let coupling = if split.kernel.is_empty() {
            0.0
        } else {
            let b = (vr.transpose() * &s1 * &vk).norm();
            2.0 * b * b / c_k
        };
        (c0 + m_r + coupling) / c_r
    };
    Ok(WellposednessReport {
        m0_selfadjoint: true,
        m0_nonneg,
        kernel_block_positive,
        c0_estimate: c0,
        nu_threshold,
        range_dim: split.range.len(),
        kernel_dim: split.kernel.len(),
    })
}

/// Replaces `M0` by the orthogonal projector onto its range.
///
/// With `M̃0 = M0|range ⊕ I|kernel` and `S = M̃0^{-1/2}`, returns the law
/// `(S M0 S, S M1 S)`, the operator `S A S` and `S`.
pub fn normalize_m0(
    law: &MaterialLaw,
    a: &MatrixOperator,
) -> Result<(MaterialLaw, MatrixOperator, MatrixOperator)> {
    let report = check_wellposed(law, 1e-12)?;
    if !report.passed() {
        return Err(OpError::NotWellPosed(format!("{report:?}")));
    }
    let split = split_m0(law, 1e-12);
    let n = split.vals.len();
    let mut d = DVector::from_element(n, 1.0);
    for i in &split.range {
        d[*i] = 1.0 / split.vals[*i].sqrt();
    }
    let s_on = &split.vecs * DMatrix::from_diagonal(&d) * split.vecs.transpose();
    let s_on = (&s_on + s_on.transpose()) * 0.5;
    let h = law.space().clone();
    let s = from_orthonormal_entries(s_on, h.clone(), h)?;
    let m0 = s.compose(&law.m0)?.compose(&s)?;
    let m1 = s.compose(&law.m1)?.compose(&s)?;
    let sas = s.compose(a)?.compose(&s)?;
    let a_new = sas.sub(&sas.adjoint())?.scale(0.5);
    Ok((MaterialLaw::new(m0, m1)?, a_new, s))
}

/// `M0 / τ + M1 + A`.
pub fn implicit_step_matrix(
    law: &MaterialLaw,
    a: &MatrixOperator,
    tau: f64,
) -> Result<MatrixOperator> {
    if !(tau > 0.0) {
        return Err(OpError::InvalidArgument(format!(
            "time step must be positive, got {tau}"
        )));
    }
    law.m0.scale(1.0 / tau).add(&law.m1)?.add(a)
}

/// What is needed to recover the kernel component after a reduced solve.
#[derive(Clone, Debug)]
pub struct ReconstructionRecipe {
    range: ProjectionPair,
    kernel: ProjectionPair,
    s_kk: DenseLu,
    s_kr: DMatrix<f64>,
    s_rk: DMatrix<f64>,
}

impl ReconstructionRecipe {
    pub fn range(&self) -> &ProjectionPair {
        &self.range
    }

    pub fn kernel(&self) -> &ProjectionPair {
        &self.kernel
    }

    /// `x_k = S_kk⁻¹ (f_k - S_kr x_r)`.
    pub fn reconstruct(&self, f_k: &DVector<f64>, x_r: &DVector<f64>) -> DVector<f64> {
        self.s_kk.solve(&(f_k - &self.s_kr * x_r))
    }

    /// Right-hand side of the reduced system, `f_r - S_rk S_kk⁻¹ f_k`.
    pub fn reduce_rhs(&self, f_r: &DVector<f64>, f_k: &DVector<f64>) -> DVector<f64> {
        f_r - &self.s_rk * self.s_kk.solve(f_k)
    }

    /// Splits `f` on the full space into range and kernel parts.
    pub fn split(&self, f: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
        Ok((self.range.pi().apply(f)?, self.kernel.pi().apply(f)?))
    }

    /// `π_r* x_r + π_k* x_k`.
    pub fn assemble(&self, x_r: &DVector<f64>, x_k: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.range.embedding().apply(x_r)? + self.kernel.embedding().apply(x_k)?)
    }
}

/// Schur complement `S_rr - S_rk S_kk⁻¹ S_kr` on the range part.
pub fn schur_reduce(
    s: &MatrixOperator,
    p_range: &ProjectionPair,
    p_kernel: &ProjectionPair,
) -> Result<(MatrixOperator, ReconstructionRecipe)> {
    let block = |p: &ProjectionPair, q: &ProjectionPair| -> Result<MatrixOperator> {
        p.pi().compose(s)?.compose(q.embedding())
    };
    let s_rr = block(p_range, p_range)?;
    let s_rk = block(p_range, p_kernel)?.to_dense();
    let s_kr = block(p_kernel, p_range)?.to_dense();
    let s_kk = DenseLu::new(block(p_kernel, p_kernel)?.to_dense(), "kernel block").map_err(
        |e| match e {
            OpError::Singular { rcond, .. } => OpError::Singular {
                what: "kernel block (the reduced law must stay strictly positive on the kernel)"
                    .into(),
                rcond,
            },
            other => other,
        },
    )?;
    let correction = &s_rk * s_kk.solve_mat(&s_kr);
    let reduced = MatrixOperator::from_dense(
        s_rr.to_dense() - correction,
        p_range.subspace().clone(),
        p_range.subspace().clone(),
    )?;
    let recipe = ReconstructionRecipe {
        range: p_range.clone(),
        kernel: p_kernel.clone(),
        s_kk,
        s_kr,
        s_rk,
    };
    Ok((reduced, recipe))
}

/// Off-diagonal coupling entries of a block law.
#[derive(Clone, Debug, Default)]
pub struct OffBlock {
    pub m0: Option<MatrixOperator>,
    pub m1: Option<MatrixOperator>,
}

/// Block law on the direct sum of the laws' spaces; `off_blocks[(i, j)]`
/// maps space `j` into space `i`.
pub fn couple(
    laws: &[&MaterialLaw],
    off_blocks: &BTreeMap<(usize, usize), OffBlock>,
) -> Result<MaterialLaw> {
    if laws.is_empty() {
        return Err(OpError::InvalidArgument("no laws to couple".into()));
    }
    for (&(i, j), blk) in off_blocks {
        if i == j || i >= laws.len() || j >= laws.len() {
            return Err(OpError::InvalidArgument(format!(
                "off-diagonal block ({i}, {j}) is invalid"
            )));
        }
        let Some(m0) = &blk.m0 else { continue };
        let mirror = off_blocks.get(&(j, i)).and_then(|b| b.m0.as_ref());
        let ok = match mirror {
            Some(t) => {
                let diff = t.max_abs_diff(&m0.adjoint())?;
                diff <= 1e-14 * m0.max_abs().max(1.0)
            }
            None => m0.max_abs() == 0.0,
        };
        if !ok {
            return Err(OpError::Structural(format!(
                "M0 block ({j}, {i}) is not the adjoint of block ({i}, {j})"
            )));
        }
    }
    let spaces: Vec<&SpaceTag> = laws.iter().map(|l| l.space()).collect();
    let assemble = |diag: &dyn Fn(&MaterialLaw) -> &MatrixOperator,
                    off: &dyn Fn(&OffBlock) -> Option<&MatrixOperator>|
     -> Result<MatrixOperator> {
        let mut blocks: Vec<(usize, usize, &MatrixOperator)> = laws
            .iter()
            .enumerate()
            .map(|(k, l)| (k, k, diag(l)))
            .collect();
        for (&(i, j), b) in off_blocks {
            if let Some(m) = off(b) {
                blocks.push((i, j, m));
            }
        }
        MatrixOperator::from_blocks(&spaces, &spaces, &blocks)
    };
    let m0 = assemble(&|l| &l.m0, &|b| b.m0.as_ref())?;
    let m1 = assemble(&|l| &l.m1, &|b| b.m1.as_ref())?;
    MaterialLaw::new(m0, m1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(n: usize) -> SpaceTag {
        SpaceTag::euclidean("h", n).unwrap()
    }

    #[test]
    fn identity_law_passes_with_unit_constant() {
        let r = check_wellposed(&MaterialLaw::identity(&sp(3)), 1e-12).unwrap();
        assert!(r.passed());
        assert_eq!(r.c0_estimate, 1.0);
        assert_eq!(r.nu_threshold, 1.0);
    }

    #[test]
    fn heat_pattern_passes_and_degenerate_fails() {
        let heat = MaterialLaw::from_diagonals(&sp(2), &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!(check_wellposed(&heat, 1e-12).unwrap().passed());
        let bad = MaterialLaw::from_diagonals(&sp(2), &[1.0, 0.0], &[0.0, 0.0]).unwrap();
        let r = check_wellposed(&bad, 1e-12).unwrap();
        assert!(!r.kernel_block_positive && !r.passed());
        assert_eq!(r.c0_estimate, 0.0);
    }

    #[test]
    fn non_selfadjoint_m0_is_structural_error() {
        let h = sp(2);
        let m0 =
            MatrixOperator::from_rows(&[&[1.0, 1.0], &[0.0, 1.0]], h.clone(), h.clone()).unwrap();
        let law = MaterialLaw::new(m0, MatrixOperator::zeros(&h, &h)).unwrap();
        assert!(matches!(
            check_wellposed(&law, 1e-12),
            Err(OpError::Structural(_))
        ));
    }

    #[test]
    fn normalize_hand_case() {
        let h = sp(2);
        let law = MaterialLaw::from_diagonals(&h, &[4.0, 0.0], &[0.0, 1.0]).unwrap();
        let a =
            MatrixOperator::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]], h.clone(), h.clone()).unwrap();
        let (n, a2, s) = normalize_m0(&law, &a).unwrap();
        assert_eq!(
            s.to_dense(),
            DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 1.0])
        );
        assert_eq!(
            n.m0.to_dense(),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])
        );
        assert_eq!(
            a2.to_dense(),
            DMatrix::from_row_slice(2, 2, &[0.0, -0.5, 0.5, 0.0])
        );
    }

    #[test]
    fn step_matrix_trivial() {
        let h = sp(3);
        let s = implicit_step_matrix(
            &MaterialLaw::identity(&h),
            &MatrixOperator::zeros(&h, &h),
            0.5,
        )
        .unwrap();
        assert_eq!(s.to_dense(), DMatrix::identity(3, 3) * 2.0);
        assert!(implicit_step_matrix(
            &MaterialLaw::identity(&h),
            &MatrixOperator::zeros(&h, &h),
            0.0
        )
        .is_err());
    }

    #[test]
    fn schur_hand_case() {
        let h = sp(2);
        let s =
            MatrixOperator::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]], h.clone(), h.clone()).unwrap();
        let r = ProjectionPair::selection(&h, &[0], "r").unwrap();
        let k = ProjectionPair::selection(&h, &[1], "k").unwrap();
        let (red, recipe) = schur_reduce(&s, &r, &k).unwrap();
        assert_eq!(red.to_dense()[(0, 0)], 1.5);
        let xk = recipe.reconstruct(&DVector::from_vec(vec![3.0]), &DVector::from_vec(vec![1.0]));
        assert_eq!(xk[0], 1.0);
    }

    #[test]
    fn couple_checks_m0_symmetry() {
        let a = MaterialLaw::identity(&SpaceTag::euclidean("a", 1).unwrap());
        let b = MaterialLaw::identity(&SpaceTag::euclidean("b", 1).unwrap());
        let g = MatrixOperator::from_rows(&[&[0.5]], a.space().clone(), b.space().clone()).unwrap();
        let mut off = BTreeMap::new();
        off.insert(
            (1, 0),
            OffBlock {
                m0: Some(g.clone()),
                m1: None,
            },
        );
        assert!(matches!(
            couple(&[&a, &b], &off),
            Err(OpError::Structural(_))
        ));
        off.insert(
            (0, 1),
            OffBlock {
                m0: Some(g.adjoint()),
                m1: None,
            },
        );
        let law = couple(&[&a, &b], &off).unwrap();
        assert_eq!(
            law.m0.to_dense(),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0])
        );
    }
}
