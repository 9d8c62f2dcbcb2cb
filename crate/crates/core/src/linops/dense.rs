use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{OpError, Result};

/// Largest system the dense factorization accepts.
pub const FACTOR_LIMIT: usize = 4096;

/// Pivoted LU factors with a cheap reciprocal condition estimate.
#[derive(Clone, Debug)]
pub struct DenseLu {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    rcond: f64,
}

impl DenseLu {
    pub fn new(m: DMatrix<f64>, what: &str) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(OpError::Shape(format!("{what} is not square")));
        }
        if m.nrows() > FACTOR_LIMIT {
            return Err(OpError::InvalidArgument(format!(
                "{what} has {} rows, above the dense factorization limit {FACTOR_LIMIT}",
                m.nrows()
            )));
        }
        let lu = m.lu();
        let diag = lu.u().diagonal();
        let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), d| {
            (lo.min(d.abs()), hi.max(d.abs()))
        });
        let rcond = if diag.is_empty() {
            1.0
        } else if hi > 0.0 {
            lo / hi
        } else {
            0.0
        };
        if !(rcond > 1e-14) {
            return Err(OpError::Singular {
                what: what.to_string(),
                rcond,
            });
        }
        Ok(Self { lu, rcond })
    }

    pub fn rcond(&self) -> f64 {
        self.rcond
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.lu.solve(b).expect("factor is nonsingular")
    }

    pub fn solve_mat(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.lu.solve(b).expect("factor is nonsingular")
    }
}

/// Eigen-decomposition of the symmetric part of `m`, eigenvalues ascending.
pub fn sym_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let s = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(s);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]));
    let vals = DVector::from_iterator(order.len(), order.iter().map(|i| eig.eigenvalues[*i]));
    let vecs = DMatrix::from_columns(
        &order
            .iter()
            .map(|i| eig.eigenvectors.column(*i))
            .collect::<Vec<_>>(),
    );
    (vals, vecs)
}

/// Smallest eigenvalue of the symmetric part, `+∞` for an empty matrix.
pub fn sym_min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return f64::INFINITY;
    }
    sym_eigen(m).0[0]
}
