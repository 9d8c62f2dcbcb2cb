//! Uniform grids on products of intervals and circles, tensor fields on them,
//! and the exactly adjoint difference operators built from one 1D stencil.
//!
//! Field layout is component-major: entry `c * P + p` holds component `c` at
//! grid point `p`, where points are numbered row-major (axis 0 slowest) and a
//! rank-k component is the multi-index `(a_0, .., a_{k-1})` read as a base-n
//! number with `a_0` most significant. `a_0` is the most recently applied
//! derivative direction.

use std::fmt;
use std::ops::Range;

use crate::error::{OpError, Result};
use crate::linops::{make_block_skew, BlockSkewOperator, MatrixOperator, SpaceTag};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Bc {
    /// Homogeneous Dirichlet ghost value past the last point.
    Dirichlet,
    Periodic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub n: usize,
    pub h: f64,
    pub bc: Bc,
    /// Coordinate of point 0.
    pub origin: f64,
}

impl Axis {
    pub fn new(n: usize, h: f64, bc: Bc) -> Result<Self> {
        if n < 2 {
            return Err(OpError::InvalidArgument(format!(
                "axis needs n >= 2, got {n}"
            )));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(OpError::InvalidArgument(format!(
                "axis spacing must be positive, got {h}"
            )));
        }
        Ok(Self {
            n,
            h,
            bc,
            origin: 0.0,
        })
    }

    pub fn dirichlet(n: usize, h: f64) -> Result<Self> {
        Self::new(n, h, Bc::Dirichlet)
    }

    pub fn periodic(n: usize, h: f64) -> Result<Self> {
        Self::new(n, h, Bc::Periodic)
    }

    /// A circle of unit length with `n` points.
    pub fn torus(n: usize) -> Result<Self> {
        Self::new(n, 1.0 / n as f64, Bc::Periodic)
    }

    /// Dirichlet axis with points `±h/2, ±3h/2, ..`; `n` must be even.
    pub fn symmetric(n: usize, h: f64) -> Result<Self> {
        if !n.is_multiple_of(2) {
            return Err(OpError::InvalidArgument(format!(
                "symmetric axis needs an even point count, got {n}"
            )));
        }
        let mut a = Self::dirichlet(n, h)?;
        a.origin = -0.5 * (n as f64 - 1.0) * h;
        Ok(a)
    }

    pub fn with_origin(mut self, origin: f64) -> Self {
        self.origin = origin;
        self
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.h
    }

    /// Whether the axis can serve as a torus factor of total measure 1.
    pub fn is_unit_torus(&self) -> bool {
        self.bc == Bc::Periodic && (self.n as f64 * self.h - 1.0).abs() <= 1e-14
    }

    /// Whether the points are mirror images of each other about 0.
    pub fn is_symmetric(&self) -> bool {
        self.bc == Bc::Dirichlet
            && self.n.is_multiple_of(2)
            && (0..self.n)
                .all(|i| (self.coord(i) + self.coord(self.n - 1 - i)).abs() <= 1e-12 * self.h)
    }

    /// Forward difference `(u_{i+1} - u_i) / h` as `(row, col, value)` entries.
    fn d1_triplets(&self) -> Vec<(usize, usize, f64)> {
        let inv = 1.0 / self.h;
        let mut t = Vec::with_capacity(2 * self.n);
        for i in 0..self.n {
            t.push((i, i, -inv));
            if i + 1 < self.n {
                t.push((i, i + 1, inv));
            } else if self.bc == Bc::Periodic {
                t.push((i, 0, inv));
            }
        }
        t
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bc = match self.bc {
            Bc::Dirichlet => "d",
            Bc::Periodic => "p",
        };
        write!(f, "{}{}", self.n, bc)
    }
}

/// A tensor product of axes.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    axes: Vec<Axis>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(OpError::InvalidArgument(
                "grid needs at least one axis".into(),
            ));
        }
        Ok(Self { axes })
    }

    pub fn cube(dim: usize, n: usize, h: f64, bc: Bc) -> Result<Self> {
        Self::new(vec![Axis::new(n, h, bc)?; dim])
    }

    /// `dim`-dimensional unit torus with `n` points per axis.
    pub fn unit_torus(dim: usize, n: usize) -> Result<Self> {
        Self::new(vec![Axis::torus(n)?; dim])
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> &Axis {
        &self.axes[i]
    }

    /// Spatial dimension.
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn points(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    /// Volume element of the discrete inner product.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.h).product()
    }

    pub fn label(&self) -> String {
        self.axes
            .iter()
            .map(|a| a.to_string())
            .collect::<Vec<_>>()
            .join("×")
    }

    fn stride(&self, axis: usize) -> usize {
        self.axes[axis + 1..].iter().map(|a| a.n).product()
    }

    /// Per-axis indices of point `p`.
    pub fn multi_index(&self, mut p: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            idx[k] = p % self.axes[k].n;
            p /= self.axes[k].n;
        }
        idx
    }

    pub fn point_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.axes)
            .fold(0, |acc, (i, a)| acc * a.n + i)
    }

    pub fn coords(&self, p: usize) -> Vec<f64> {
        self.multi_index(p)
            .iter()
            .zip(&self.axes)
            .map(|(i, a)| a.coord(*i))
            .collect()
    }

    /// Samples `f` at every grid point.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        (0..self.points()).map(|p| f(&self.coords(p))).collect()
    }

    /// Forward partial along `axis` on scalar grid functions, as entries.
    pub(crate) fn partial_triplets(&self, axis: usize) -> Vec<(usize, usize, f64)> {
        let ax = &self.axes[axis];
        let stride = self.stride(axis);
        let d1 = ax.d1_triplets();
        let mut rows_of: Vec<Vec<(usize, f64)>> = vec![Vec::new(); ax.n];
        for (i, j, v) in d1 {
            rows_of[i].push((j, v));
        }
        let mut t = Vec::with_capacity(2 * self.points());
        for p in 0..self.points() {
            let c = (p / stride) % ax.n;
            let base = p - c * stride;
            for &(j, v) in &rows_of[c] {
                t.push((p, base + j * stride, v));
            }
        }
        t
    }

    pub fn scalar_space(&self) -> TensorFieldSpace {
        TensorFieldSpace::new(self.clone(), 0)
    }

    /// Forward partial `∂̊_axis` on scalar fields.
    pub fn partial(&self, axis: usize) -> MatrixOperator {
        let s = self.scalar_space().tag();
        MatrixOperator::from_triplets(self.partial_triplets(axis), s.clone(), s)
            .expect("stencil entries lie inside the grid")
    }

    /// Backward partial, the negative adjoint of [`Grid::partial`].
    pub fn backward_partial(&self, axis: usize) -> MatrixOperator {
        self.partial(axis).adjoint().neg()
    }
}

/// Discretized rank-k covariant tensor fields on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorFieldSpace {
    pub grid: Grid,
    pub rank: usize,
}

impl TensorFieldSpace {
    pub fn new(grid: Grid, rank: usize) -> Self {
        Self { grid, rank }
    }

    /// Components per grid point, `n^rank`.
    pub fn components(&self) -> usize {
        self.grid.dim().pow(self.rank as u32)
    }

    pub fn dim(&self) -> usize {
        self.components() * self.grid.points()
    }

    pub fn tag(&self) -> SpaceTag {
        SpaceTag::uniform(
            format!("L2_{}[{}]", self.rank, self.grid.label()),
            self.dim(),
            self.grid.cell_volume(),
        )
        .expect("grid dimensions are positive")
    }

    /// Component number of a multi-index (first slot most significant).
    pub fn component(&self, alpha: &[usize]) -> usize {
        debug_assert_eq!(alpha.len(), self.rank);
        alpha.iter().fold(0, |acc, a| acc * self.grid.dim() + a)
    }

    pub fn multi_index(&self, mut c: usize) -> Vec<usize> {
        let n = self.grid.dim();
        let mut alpha = vec![0; self.rank];
        for k in (0..self.rank).rev() {
            alpha[k] = c % n;
            c /= n;
        }
        alpha
    }

    pub fn index(&self, alpha: &[usize], point: usize) -> usize {
        self.component(alpha) * self.grid.points() + point
    }

    pub fn raised(&self) -> Self {
        Self::new(self.grid.clone(), self.rank + 1)
    }
}

/// 1D forward difference with a Dirichlet ghost past the end or a periodic wrap.
pub fn build_d1(axis: &Axis) -> MatrixOperator {
    let grid = Grid::new(vec![*axis]).expect("one axis");
    grid.partial(0)
}

/// `∇̊` from rank k to rank k+1, derivative index prepended.
pub fn build_nabla(space: &TensorFieldSpace) -> MatrixOperator {
    let grid = &space.grid;
    let p = grid.points();
    let comps = space.components();
    let target = space.raised();
    let mut t = Vec::new();
    for i in 0..grid.dim() {
        let partial = grid.partial_triplets(i);
        for alpha in 0..comps {
            let row0 = (i * comps + alpha) * p;
            let col0 = alpha * p;
            t.extend(partial.iter().map(|&(r, c, v)| (row0 + r, col0 + c, v)));
        }
    }
    MatrixOperator::from_triplets(t, space.tag(), target.tag()).expect("stencil entries in range")
}

/// `div = -∇̊*` from rank k+1 down to rank k.
pub fn build_div(space_kplus1: &TensorFieldSpace) -> Result<MatrixOperator> {
    if space_kplus1.rank == 0 {
        return Err(OpError::InvalidArgument(
            "div needs a field of rank >= 1".into(),
        ));
    }
    let lower = TensorFieldSpace::new(space_kplus1.grid.clone(), space_kplus1.rank - 1);
    Ok(build_nabla(&lower).adjoint().neg())
}

/// The space `(⊕_{k≤K} L²_k) ⊕ (⊕_{k≤K} L²_k)` of the mother operator.
#[derive(Clone, Debug, PartialEq)]
pub struct MotherSpace {
    pub grid: Grid,
    pub k_max: usize,
}

/// Which half of the mother space a block lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Half {
    First,
    Second,
}

impl MotherSpace {
    pub fn new(grid: Grid, k_max: usize) -> Result<Self> {
        if k_max < 1 {
            return Err(OpError::InvalidArgument("mother space needs K >= 1".into()));
        }
        Ok(Self { grid, k_max })
    }

    /// Default truncation at rank 3.
    pub fn standard(grid: Grid) -> Self {
        Self { grid, k_max: 3 }
    }

    pub fn rank_space(&self, rank: usize) -> TensorFieldSpace {
        TensorFieldSpace::new(self.grid.clone(), rank)
    }

    /// `⊕_{k≤K} L²_k`, the tag of either half.
    pub fn half_tag(&self) -> SpaceTag {
        let tags: Vec<SpaceTag> = (0..=self.k_max).map(|k| self.rank_space(k).tag()).collect();
        SpaceTag::direct_sum(&tags.iter().collect::<Vec<_>>()).expect("nonempty")
    }

    pub fn tag(&self) -> SpaceTag {
        let h = self.half_tag();
        SpaceTag::direct_sum(&[&h, &h]).expect("nonempty")
    }

    pub fn half_dim(&self) -> usize {
        (0..=self.k_max).map(|k| self.rank_space(k).dim()).sum()
    }

    pub fn dim(&self) -> usize {
        2 * self.half_dim()
    }

    /// Index range of rank `k` in the given half.
    pub fn block_range(&self, half: Half, rank: usize) -> Result<Range<usize>> {
        if rank > self.k_max {
            return Err(OpError::InvalidArgument(format!(
                "rank {rank} exceeds truncation K = {}",
                self.k_max
            )));
        }
        let start: usize = (0..rank).map(|k| self.rank_space(k).dim()).sum::<usize>()
            + match half {
                Half::First => 0,
                Half::Second => self.half_dim(),
            };
        Ok(start..start + self.rank_space(rank).dim())
    }
}

/// `C = ⊕_{k<K} ∇̊_k` from the first half to the second, rank K sent to zero.
pub fn build_mother_c(ms: &MotherSpace) -> MatrixOperator {
    let half = ms.half_tag();
    let mut t = Vec::new();
    for k in 0..ms.k_max {
        let nabla = build_nabla(&ms.rank_space(k));
        let r0 = ms.block_range(Half::Second, k + 1).unwrap().start - ms.half_dim();
        let c0 = ms.block_range(Half::First, k).unwrap().start;
        t.extend(
            nabla
                .triplets()
                .into_iter()
                .map(|(i, j, v)| (r0 + i, c0 + j, v)),
        );
    }
    MatrixOperator::from_triplets(t, half.clone(), half).expect("blocks fit")
}

/// The mother operator `[[0, -∇̊*], [∇̊, 0]]`.
pub fn build_mother_a(ms: &MotherSpace) -> BlockSkewOperator {
    make_block_skew(&build_mother_c(ms))
}
