use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};

use super::SpaceTag;
use crate::error::{OpError, Result};

/// Operators with this many rows or columns (or more) are kept in compressed
/// sparse row form; smaller ones are dense.
pub const DENSE_LIMIT: usize = 4096;

#[derive(Clone, Debug)]
pub(crate) enum Store {
    Dense(DMatrix<f64>),
    Sparse(CsrMatrix<f64>),
}

impl Store {
    fn nrows(&self) -> usize {
        match self {
            Store::Dense(m) => m.nrows(),
            Store::Sparse(m) => m.nrows(),
        }
    }

    fn ncols(&self) -> usize {
        match self {
            Store::Dense(m) => m.ncols(),
            Store::Sparse(m) => m.ncols(),
        }
    }

    fn wants_sparse(rows: usize, cols: usize) -> bool {
        rows >= DENSE_LIMIT || cols >= DENSE_LIMIT
    }

    fn from_triplets(rows: usize, cols: usize, triplets: Vec<(usize, usize, f64)>) -> Self {
        if Self::wants_sparse(rows, cols) {
            let mut coo = CooMatrix::new(rows, cols);
            for (i, j, v) in triplets {
                if v != 0.0 {
                    coo.push(i, j, v);
                }
            }
            Store::Sparse(CsrMatrix::from(&coo))
        } else {
            let mut m = DMatrix::zeros(rows, cols);
            for (i, j, v) in triplets {
                m[(i, j)] += v;
            }
            Store::Dense(m)
        }
    }

    fn to_csr(&self) -> CsrMatrix<f64> {
        match self {
            Store::Sparse(m) => m.clone(),
            Store::Dense(m) => {
                let mut coo = CooMatrix::new(m.nrows(), m.ncols());
                for j in 0..m.ncols() {
                    for i in 0..m.nrows() {
                        let v = m[(i, j)];
                        if v != 0.0 {
                            coo.push(i, j, v);
                        }
                    }
                }
                CsrMatrix::from(&coo)
            }
        }
    }

    fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Store::Dense(m) => m.clone(),
            Store::Sparse(m) => {
                let mut d = DMatrix::zeros(m.nrows(), m.ncols());
                for (i, j, v) in m.triplet_iter() {
                    d[(i, j)] += *v;
                }
                d
            }
        }
    }

    fn normalized(self) -> Self {
        let sparse = Self::wants_sparse(self.nrows(), self.ncols());
        match (self, sparse) {
            (Store::Dense(m), true) => Store::Sparse(Store::Dense(m).to_csr()),
            (s @ Store::Sparse(_), false) => Store::Dense(s.to_dense()),
            (s, _) => s,
        }
    }

    fn for_each_nonzero(&self, mut f: impl FnMut(usize, usize, f64)) {
        match self {
            Store::Dense(m) => {
                for j in 0..m.ncols() {
                    for i in 0..m.nrows() {
                        let v = m[(i, j)];
                        if v != 0.0 {
                            f(i, j, v);
                        }
                    }
                }
            }
            Store::Sparse(m) => {
                for (i, j, v) in m.triplet_iter() {
                    if *v != 0.0 {
                        f(i, j, *v);
                    }
                }
            }
        }
    }
}

// Dense products of large stencil-like matrices are far cheaper through the
// sparse kernel; the result is converted back by `normalized`.
fn mostly_zero(m: &DMatrix<f64>) -> bool {
    let size = m.nrows() * m.ncols();
    size >= 64 * 64 && m.iter().filter(|v| **v != 0.0).count() * 8 < size
}

/// A real matrix together with the labeled spaces it maps between.
///
/// Cloning is cheap: entries are shared.
#[derive(Clone)]
pub struct MatrixOperator {
    store: Arc<Store>,
    domain: SpaceTag,
    codomain: SpaceTag,
    // Entries of the weighted adjoint when this operator was itself produced
    // by `adjoint`, so that taking the adjoint twice returns the original
    // entries bit for bit.
    adjoint_store: Option<Arc<Store>>,
}

impl fmt::Debug for MatrixOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatrixOperator")
            .field("domain", &self.domain.to_string())
            .field("codomain", &self.codomain.to_string())
            .field("sparse", &self.is_sparse())
            .finish()
    }
}

impl MatrixOperator {
    fn from_store(store: Store, domain: SpaceTag, codomain: SpaceTag) -> Self {
        debug_assert_eq!(store.nrows(), codomain.dim());
        debug_assert_eq!(store.ncols(), domain.dim());
        Self {
            store: Arc::new(store.normalized()),
            domain,
            codomain,
            adjoint_store: None,
        }
    }

    pub fn from_dense(entries: DMatrix<f64>, domain: SpaceTag, codomain: SpaceTag) -> Result<Self> {
        if entries.nrows() != codomain.dim() || entries.ncols() != domain.dim() {
            return Err(OpError::Shape(format!(
                "{}x{} matrix does not map {} to {}",
                entries.nrows(),
                entries.ncols(),
                domain,
                codomain
            )));
        }
        Ok(Self::from_store(Store::Dense(entries), domain, codomain))
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(
        triplets: Vec<(usize, usize, f64)>,
        domain: SpaceTag,
        codomain: SpaceTag,
    ) -> Result<Self> {
        let (rows, cols) = (codomain.dim(), domain.dim());
        if let Some(&(i, j, _)) = triplets.iter().find(|(i, j, _)| *i >= rows || *j >= cols) {
            return Err(OpError::Shape(format!(
                "triplet ({i}, {j}) outside {rows}x{cols}"
            )));
        }
        Ok(Self::from_store(
            Store::from_triplets(rows, cols, triplets),
            domain,
            codomain,
        ))
    }

    /// Row-major convenience constructor for small operators.
    pub fn from_rows(rows: &[&[f64]], domain: SpaceTag, codomain: SpaceTag) -> Result<Self> {
        let ncols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(OpError::Shape("ragged rows".into()));
        }
        let m = DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]);
        Self::from_dense(m, domain, codomain)
    }

    pub fn identity(space: &SpaceTag) -> Self {
        let n = space.dim();
        Self::from_store(
            Store::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)).collect()),
            space.clone(),
            space.clone(),
        )
    }

    pub fn zeros(domain: &SpaceTag, codomain: &SpaceTag) -> Self {
        Self::from_store(
            Store::from_triplets(codomain.dim(), domain.dim(), Vec::new()),
            domain.clone(),
            codomain.clone(),
        )
    }

    pub fn diagonal(space: &SpaceTag, diag: &[f64]) -> Result<Self> {
        if diag.len() != space.dim() {
            return Err(OpError::Shape(format!(
                "diagonal of length {} on {}",
                diag.len(),
                space
            )));
        }
        Ok(Self::from_store(
            Store::from_triplets(
                diag.len(),
                diag.len(),
                diag.iter().enumerate().map(|(i, d)| (i, i, *d)).collect(),
            ),
            space.clone(),
            space.clone(),
        ))
    }

    pub fn domain(&self) -> &SpaceTag {
        &self.domain
    }

    pub fn codomain(&self) -> &SpaceTag {
        &self.codomain
    }

    pub fn nrows(&self) -> usize {
        self.codomain.dim()
    }

    pub fn ncols(&self) -> usize {
        self.domain.dim()
    }

    pub fn is_sparse(&self) -> bool {
        matches!(*self.store, Store::Sparse(_))
    }

    pub fn is_square(&self) -> bool {
        self.domain == self.codomain
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.store.to_dense()
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        self.store.for_each_nonzero(|i, j, v| out.push((i, j, v)));
        out
    }

    pub fn nnz(&self) -> usize {
        let mut n = 0;
        self.store.for_each_nonzero(|_, _, _| n += 1);
        n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &*self.store {
            Store::Dense(m) => m[(i, j)],
            Store::Sparse(m) => m.get_entry(i, j).map_or(0.0, |e| e.into_value()),
        }
    }

    /// Replaces both tags; dimensions must agree.
    pub fn retagged(&self, domain: SpaceTag, codomain: SpaceTag) -> Result<Self> {
        if domain.dim() != self.ncols() || codomain.dim() != self.nrows() {
            return Err(OpError::Shape(format!(
                "cannot retag {}x{} operator as {} -> {}",
                self.nrows(),
                self.ncols(),
                domain,
                codomain
            )));
        }
        Ok(Self {
            store: self.store.clone(),
            domain,
            codomain,
            adjoint_store: None,
        })
    }

    pub fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.ncols() {
            return Err(OpError::Shape(format!(
                "vector of length {} applied to {}x{} operator",
                x.len(),
                self.nrows(),
                self.ncols()
            )));
        }
        Ok(match &*self.store {
            Store::Dense(m) => m * x,
            Store::Sparse(m) => {
                let mut y = DVector::zeros(m.nrows());
                for (i, row) in m.row_iter().enumerate() {
                    y[i] = row
                        .col_indices()
                        .iter()
                        .zip(row.values())
                        .map(|(j, v)| v * x[*j])
                        .sum();
                }
                y
            }
        })
    }

    /// `self ∘ rhs`.
    pub fn compose(&self, rhs: &MatrixOperator) -> Result<Self> {
        self.domain.ensure_same(&rhs.codomain, "composition")?;
        let store = match (&*self.store, &*rhs.store) {
            (Store::Dense(a), Store::Dense(b)) if !(mostly_zero(a) || mostly_zero(b)) => {
                Store::Dense(a * b)
            }
            (a, b) => Store::Sparse(&a.to_csr() * &b.to_csr()),
        };
        Ok(Self::from_store(
            store,
            rhs.domain.clone(),
            self.codomain.clone(),
        ))
    }

    fn check_same_tags(&self, other: &MatrixOperator, context: &'static str) -> Result<()> {
        self.domain.ensure_same(&other.domain, context)?;
        self.codomain.ensure_same(&other.codomain, context)
    }

    fn combine(&self, other: &MatrixOperator, sign: f64) -> Self {
        let store = match (&*self.store, &*other.store) {
            (Store::Dense(a), Store::Dense(b)) => Store::Dense(a + b * sign),
            (a, b) => Store::Sparse(&a.to_csr() + &(&b.to_csr() * sign)),
        };
        Self::from_store(store, self.domain.clone(), self.codomain.clone())
    }

    pub fn add(&self, other: &MatrixOperator) -> Result<Self> {
        self.check_same_tags(other, "sum")?;
        Ok(self.combine(other, 1.0))
    }

    pub fn sub(&self, other: &MatrixOperator) -> Result<Self> {
        self.check_same_tags(other, "difference")?;
        Ok(self.combine(other, -1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        let store = match &*self.store {
            Store::Dense(m) => Store::Dense(m * s),
            Store::Sparse(m) => Store::Sparse(m * s),
        };
        let adjoint_store = match (&self.adjoint_store, s == -1.0) {
            // negation commutes with taking adjoints exactly
            (Some(adj), true) => Some(Arc::new(match &**adj {
                Store::Dense(m) => Store::Dense(-m),
                Store::Sparse(m) => Store::Sparse(m * -1.0),
            })),
            _ => None,
        };
        Self {
            store: Arc::new(store),
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            adjoint_store,
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        self.store.for_each_nonzero(|_, _, v| m = m.max(v.abs()));
        m
    }

    /// Largest absolute entry of `self - other`; only shapes must agree.
    pub fn max_abs_diff(&self, other: &MatrixOperator) -> Result<f64> {
        if self.nrows() != other.nrows() || self.ncols() != other.ncols() {
            return Err(OpError::Shape(format!(
                "{}x{} vs {}x{}",
                self.nrows(),
                self.ncols(),
                other.nrows(),
                other.ncols()
            )));
        }
        let diff = match (&*self.store, &*other.store) {
            (Store::Dense(a), Store::Dense(b)) => return Ok((a - b).amax()),
            (a, b) => &a.to_csr() - &b.to_csr(),
        };
        Ok(diff.values().iter().fold(0.0, |m, v| m.max(v.abs())))
    }

    /// Frobenius-type size used for relative tolerances.
    pub fn frobenius(&self) -> f64 {
        let mut s = 0.0;
        self.store.for_each_nonzero(|_, _, v| s += v * v);
        s.sqrt()
    }

    /// Weighted adjoint `W_dom^{-1} T^T W_cod`.
    pub fn adjoint(&self) -> Self {
        if let Some(adj) = &self.adjoint_store {
            return Self {
                store: adj.clone(),
                domain: self.codomain.clone(),
                codomain: self.domain.clone(),
                adjoint_store: Some(self.store.clone()),
            };
        }
        let (dom, cod) = (&self.domain, &self.codomain);
        let mut triplets = Vec::new();
        self.store.for_each_nonzero(|i, j, v| {
            let (wc, wd) = (cod.weight(i), dom.weight(j));
            let entry = if wc == wd { v } else { v * wc / wd };
            triplets.push((j, i, entry));
        });
        let store = Store::from_triplets(dom.dim(), cod.dim(), triplets).normalized();
        Self {
            store: Arc::new(store),
            domain: cod.clone(),
            codomain: dom.clone(),
            adjoint_store: Some(self.store.clone()),
        }
    }

    /// Extracts the block with the given row/column ranges, tagged with the
    /// supplied spaces.
    pub fn block(
        &self,
        rows: Range<usize>,
        cols: Range<usize>,
        domain: SpaceTag,
        codomain: SpaceTag,
    ) -> Result<Self> {
        if rows.end > self.nrows() || cols.end > self.ncols() {
            return Err(OpError::Shape("block outside operator".into()));
        }
        if domain.dim() != cols.len() || codomain.dim() != rows.len() {
            return Err(OpError::Shape("block tags do not match ranges".into()));
        }
        let store = match &*self.store {
            Store::Dense(m) => Store::Dense(
                m.view((rows.start, cols.start), (rows.len(), cols.len()))
                    .into_owned(),
            ),
            Store::Sparse(m) => {
                let mut t = Vec::new();
                for i in rows.clone() {
                    let row = m.row(i);
                    for (j, v) in row.col_indices().iter().zip(row.values()) {
                        if cols.contains(j) {
                            t.push((i - rows.start, j - cols.start, *v));
                        }
                    }
                }
                Store::from_triplets(rows.len(), cols.len(), t)
            }
        };
        Ok(Self::from_store(store, domain, codomain))
    }

    /// Assembles a block operator from `(block_row, block_col, op)` entries.
    /// Missing blocks are zero.
    pub fn from_blocks(
        row_spaces: &[&SpaceTag],
        col_spaces: &[&SpaceTag],
        blocks: &[(usize, usize, &MatrixOperator)],
    ) -> Result<Self> {
        let codomain = SpaceTag::direct_sum(row_spaces)?;
        let domain = SpaceTag::direct_sum(col_spaces)?;
        let offsets = |spaces: &[&SpaceTag]| {
            let mut acc = 0;
            spaces
                .iter()
                .map(|s| {
                    let o = acc;
                    acc += s.dim();
                    o
                })
                .collect::<Vec<_>>()
        };
        let (ro, co) = (offsets(row_spaces), offsets(col_spaces));
        let mut triplets = Vec::new();
        for (bi, bj, op) in blocks {
            let (rs, cs) = (
                row_spaces
                    .get(*bi)
                    .ok_or_else(|| OpError::Shape(format!("block row {bi} out of range")))?,
                col_spaces
                    .get(*bj)
                    .ok_or_else(|| OpError::Shape(format!("block column {bj} out of range")))?,
            );
            rs.ensure_same(op.codomain(), "block assembly (rows)")?;
            cs.ensure_same(op.domain(), "block assembly (columns)")?;
            let (r0, c0) = (ro[*bi], co[*bj]);
            op.store
                .for_each_nonzero(|i, j, v| triplets.push((r0 + i, c0 + j, v)));
        }
        Self::from_triplets(triplets, domain, codomain)
    }

    pub fn block_diag(ops: &[&MatrixOperator]) -> Result<Self> {
        let rows: Vec<&SpaceTag> = ops.iter().map(|o| o.codomain()).collect();
        let cols: Vec<&SpaceTag> = ops.iter().map(|o| o.domain()).collect();
        let blocks: Vec<(usize, usize, &MatrixOperator)> =
            ops.iter().enumerate().map(|(k, o)| (k, k, *o)).collect();
        Self::from_blocks(&rows, &cols, &blocks)
    }

    /// Kronecker product `self ⊗ other` with explicitly supplied tags.
    pub fn kron(
        &self,
        other: &MatrixOperator,
        domain: SpaceTag,
        codomain: SpaceTag,
    ) -> Result<Self> {
        let (r2, c2) = (other.nrows(), other.ncols());
        if domain.dim() != self.ncols() * c2 || codomain.dim() != self.nrows() * r2 {
            return Err(OpError::Shape("kronecker tags do not match".into()));
        }
        let b = other.triplets();
        let mut triplets = Vec::new();
        self.store.for_each_nonzero(|i, j, a| {
            for &(k, l, v) in &b {
                triplets.push((i * r2 + k, j * c2 + l, a * v));
            }
        });
        Self::from_triplets(triplets, domain, codomain)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(name: &str, n: usize) -> SpaceTag {
        SpaceTag::euclidean(name, n).unwrap()
    }

    #[test]
    fn compose_checks_tags() {
        let a = MatrixOperator::identity(&sp("a", 2));
        let b = MatrixOperator::identity(&sp("b", 2));
        assert!(a.compose(&b).is_err());
        assert!(a.compose(&a).is_ok());
    }

    #[test]
    fn large_operators_are_sparse() {
        let s = sp("big", DENSE_LIMIT);
        let i = MatrixOperator::identity(&s);
        assert!(i.is_sparse());
        let small = MatrixOperator::identity(&sp("small", 3));
        assert!(!small.is_sparse());
        let x = DVector::from_element(DENSE_LIMIT, 2.0);
        assert_eq!(i.apply(&x).unwrap(), x);
        let ii = i.compose(&i).unwrap();
        assert_eq!(ii.max_abs_diff(&i).unwrap(), 0.0);
    }

    #[test]
    fn weighted_adjoint_scalar() {
        let dom = SpaceTag::uniform("d", 1, 2.0).unwrap();
        let cod = SpaceTag::uniform("c", 1, 1.0).unwrap();
        let t = MatrixOperator::from_rows(&[&[1.0]], dom, cod).unwrap();
        assert_eq!(t.adjoint().get(0, 0), 0.5);
    }

    #[test]
    fn blocks_round_trip() {
        let a = sp("a", 2);
        let b = sp("b", 1);
        let m = MatrixOperator::from_rows(&[&[1.0, 2.0]], a.clone(), b.clone()).unwrap();
        let full = MatrixOperator::from_blocks(&[&a, &b], &[&a, &b], &[(1, 0, &m)]).unwrap();
        assert_eq!(full.nrows(), 3);
        let back = full.block(2..3, 0..2, a, b).unwrap();
        assert_eq!(back.max_abs_diff(&m).unwrap(), 0.0);
    }

    #[test]
    fn kron_of_identity() {
        let a = sp("a", 2);
        let m =
            MatrixOperator::from_rows(&[&[0.0, 1.0], &[2.0, 0.0]], a.clone(), a.clone()).unwrap();
        let i = MatrixOperator::identity(&sp("i", 2));
        let s = sp("ia", 4);
        let k = i.kron(&m, s.clone(), s).unwrap();
        assert_eq!(k.get(0, 1), 1.0);
        assert_eq!(k.get(3, 2), 2.0);
        assert_eq!(k.get(0, 3), 0.0);
    }
}
