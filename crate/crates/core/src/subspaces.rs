//! Canonical projections `π_V : H → V` and the descendant construction.

use std::collections::BTreeSet;

use nalgebra::DMatrix;

use crate::error::{OpError, Result};
use crate::flatgrid::{Half, MotherSpace, TensorFieldSpace};
use crate::linops::{
    from_orthonormal_entries, orthonormal_entries, MatrixOperator, SpaceTag, RANK_TOL,
};

const FRAC_1_SQRT_6: f64 = 0.408_248_290_463_863_f64;

/// A surjective partial isometry together with its adjoint embedding.
#[derive(Clone, Debug)]
pub struct ProjectionPair {
    pi: MatrixOperator,
    embedding: MatrixOperator,
}

impl ProjectionPair {
    /// Wraps `pi`, checking `π π* = I` to `1e-12`.
    pub fn new(pi: MatrixOperator) -> Result<Self> {
        let pair = Self::new_unchecked(pi);
        let defect = pair.isometry_defect();
        if defect > 1e-12 {
            return Err(OpError::Precondition(format!(
                "not a partial isometry (|π π* - I| = {defect:e})"
            )));
        }
        Ok(pair)
    }

    pub(crate) fn new_unchecked(pi: MatrixOperator) -> Self {
        let embedding = pi.adjoint();
        Self { pi, embedding }
    }

    pub fn identity(space: &SpaceTag) -> Self {
        Self::new_unchecked(MatrixOperator::identity(space))
    }

    /// Coordinate selection; `V` carries the selected weights.
    pub fn selection(space: &SpaceTag, indices: &[usize], name: impl Into<String>) -> Result<Self> {
        if let Some(bad) = indices.iter().find(|i| **i >= space.dim()) {
            return Err(OpError::InvalidArgument(format!(
                "index {bad} outside {space}"
            )));
        }
        let v = SpaceTag::new(name, indices.iter().map(|i| space.weight(*i)).collect())?;
        let t = indices
            .iter()
            .enumerate()
            .map(|(r, c)| (r, *c, 1.0))
            .collect();
        Ok(Self::new_unchecked(MatrixOperator::from_triplets(
            t,
            space.clone(),
            v,
        )?))
    }

    pub fn pi(&self) -> &MatrixOperator {
        &self.pi
    }

    pub fn embedding(&self) -> &MatrixOperator {
        &self.embedding
    }

    /// The ambient space `H`.
    pub fn space(&self) -> &SpaceTag {
        self.pi.domain()
    }

    /// The subspace `V`.
    pub fn subspace(&self) -> &SpaceTag {
        self.pi.codomain()
    }

    /// `P_V = π* π`.
    pub fn projector(&self) -> MatrixOperator {
        self.embedding
            .compose(&self.pi)
            .expect("tags agree by construction")
    }

    /// `max |π π* - I|`.
    pub fn isometry_defect(&self) -> f64 {
        let id = MatrixOperator::identity(self.subspace());
        self.pi
            .compose(&self.embedding)
            .and_then(|p| p.max_abs_diff(&id))
            .expect("tags agree by construction")
    }

    /// Orthogonal direct sum `π_1 ⊕ π_2 ⊕ ..`.
    pub fn direct_sum(parts: &[&ProjectionPair]) -> Result<Self> {
        let pis: Vec<&MatrixOperator> = parts.iter().map(|p| p.pi()).collect();
        Ok(Self::new_unchecked(MatrixOperator::block_diag(&pis)?))
    }

    /// Renames `V`.
    pub fn with_subspace_name(&self, name: impl Into<String>) -> Self {
        let v = self.subspace().renamed(name);
        Self::new_unchecked(
            self.pi
                .retagged(self.space().clone(), v)
                .expect("same dims"),
        )
    }
}

/// `outer` applied after `inner`, as a projection on `inner`'s ambient space.
pub fn follow_on(outer: &ProjectionPair, inner: &ProjectionPair) -> Result<ProjectionPair> {
    Ok(ProjectionPair::new_unchecked(
        outer.pi().compose(inner.pi())?,
    ))
}

/// Selects tensor ranks from each half of the mother space.
pub fn rank_block(ms: &MotherSpace, ranks0: &[usize], ranks1: &[usize]) -> Result<ProjectionPair> {
    let mut indices = Vec::new();
    let mut names = Vec::new();
    for (half, ranks) in [(Half::First, ranks0), (Half::Second, ranks1)] {
        let set: BTreeSet<usize> = ranks.iter().copied().collect();
        for k in set {
            indices.extend(ms.block_range(half, k)?);
            names.push(ms.rank_space(k).tag().name().to_string());
        }
    }
    if indices.is_empty() {
        return Err(OpError::InvalidArgument("rank selection is empty".into()));
    }
    ProjectionPair::selection(&ms.tag(), &indices, names.join("⊕"))
}

/// Index pairs `(i, j)` labelling off-diagonal basis elements; the cyclic
/// order `(1,2), (2,0), (0,1)` in 3D, lexicographic `i < j` otherwise.
pub fn offdiag_pairs(n: usize) -> Vec<(usize, usize)> {
    if n == 3 {
        vec![(1, 2), (2, 0), (0, 1)]
    } else {
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect()
    }
}

fn rank_two_projection(space2: &TensorFieldSpace, symmetric: bool) -> Result<ProjectionPair> {
    if space2.rank != 2 {
        return Err(OpError::InvalidArgument(format!(
            "(anti)symmetrization needs rank 2, got {}",
            space2.rank
        )));
    }
    let n = space2.grid.dim();
    let p = space2.grid.points();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // rows of the per-point basis as (component, coefficient) lists
    let mut basis: Vec<Vec<(usize, f64)>> = Vec::new();
    if symmetric {
        for i in 0..n {
            basis.push(vec![(space2.component(&[i, i]), 1.0)]);
        }
    }
    let sign = if symmetric { 1.0 } else { -1.0 };
    for (i, j) in offdiag_pairs(n) {
        basis.push(vec![
            (space2.component(&[i, j]), s),
            (space2.component(&[j, i]), sign * s),
        ]);
    }
    let mut t = Vec::new();
    for (b, row) in basis.iter().enumerate() {
        for &(c, v) in row {
            t.extend((0..p).map(|q| (b * p + q, c * p + q, v)));
        }
    }
    let prefix = if symmetric { "sym" } else { "asym" };
    let h = space2.tag();
    let v = SpaceTag::uniform(
        format!("{prefix} {}", h.name()),
        basis.len() * p,
        space2.grid.cell_volume(),
    )?;
    Ok(ProjectionPair::new_unchecked(
        MatrixOperator::from_triplets(t, h, v)?,
    ))
}

/// Onto symmetric rank-2 tensors, basis `e_ii` and `(e_ij + e_ji)/√2`.
pub fn sym_projection(space2: &TensorFieldSpace) -> Result<ProjectionPair> {
    rank_two_projection(space2, true)
}

/// Onto antisymmetric rank-2 tensors, basis `(e_ij - e_ji)/√2`.
pub fn asym_projection(space2: &TensorFieldSpace) -> Result<ProjectionPair> {
    rank_two_projection(space2, false)
}

/// Onto totally antisymmetric rank-3 tensors in 3D, basis `Σ sgn(σ) e_σ / √6`.
pub fn alt3_projection(space3: &TensorFieldSpace) -> Result<ProjectionPair> {
    if space3.rank != 3 || space3.grid.dim() != 3 {
        return Err(OpError::InvalidArgument(
            "alternating projection needs rank 3 on a 3D grid".into(),
        ));
    }
    let p = space3.grid.points();
    let perms: [([usize; 3], f64); 6] = [
        ([0, 1, 2], 1.0),
        ([1, 2, 0], 1.0),
        ([2, 0, 1], 1.0),
        ([0, 2, 1], -1.0),
        ([2, 1, 0], -1.0),
        ([1, 0, 2], -1.0),
    ];
    let mut t = Vec::new();
    for (alpha, sgn) in perms {
        let c = space3.component(&alpha);
        t.extend((0..p).map(|q| (q, c * p + q, sgn * FRAC_1_SQRT_6)));
    }
    let h = space3.tag();
    let v = SpaceTag::uniform(format!("alt {}", h.name()), p, space3.grid.cell_volume())?;
    Ok(ProjectionPair::new_unchecked(
        MatrixOperator::from_triplets(t, h, v)?,
    ))
}

/// Even and odd parts on a single symmetric axis. Row `k` of each pairs the
/// points `±x_k`, ordered by increasing `|x|`, as `(e_{+x} ± e_{-x})/√2`.
pub fn even_odd(space: &TensorFieldSpace) -> Result<(ProjectionPair, ProjectionPair)> {
    let grid = &space.grid;
    if grid.dim() != 1 || !grid.axis(0).is_symmetric() {
        return Err(OpError::InvalidArgument(
            "even/odd split needs one Dirichlet axis symmetric about 0 with an even point count"
                .into(),
        ));
    }
    let n = grid.axis(0).n;
    let half = n / 2;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let h = space.tag();
    let build = |sign: f64, label: &str| -> Result<ProjectionPair> {
        let t = (0..half)
            .flat_map(|k| [(k, half + k, s), (k, half - 1 - k, sign * s)])
            .collect();
        let v = SpaceTag::uniform(format!("{label} {}", h.name()), half, grid.cell_volume())?;
        Ok(ProjectionPair::new_unchecked(
            MatrixOperator::from_triplets(t, h.clone(), v)?,
        ))
    };
    Ok((build(1.0, "even")?, build(-1.0, "odd")?))
}

/// Averages over the listed unit-torus axes and keeps only the components
/// whose indices all point along the remaining axes.
pub fn torus_average(
    space: &TensorFieldSpace,
    torus_axes: &[usize],
) -> Result<(ProjectionPair, TensorFieldSpace)> {
    let grid = &space.grid;
    let torus: BTreeSet<usize> = torus_axes.iter().copied().collect();
    if let Some(bad) = torus.iter().find(|a| **a >= grid.dim()) {
        return Err(OpError::InvalidArgument(format!(
            "axis {bad} outside the grid"
        )));
    }
    if let Some(bad) = torus.iter().find(|a| !grid.axis(**a).is_unit_torus()) {
        return Err(OpError::InvalidArgument(format!(
            "axis {bad} is not periodic with total length 1"
        )));
    }
    let kept: Vec<usize> = (0..grid.dim()).filter(|a| !torus.contains(a)).collect();
    if kept.is_empty() {
        return Err(OpError::InvalidArgument(
            "cannot average over every axis".into(),
        ));
    }
    let reduced_grid = crate::flatgrid::Grid::new(kept.iter().map(|a| *grid.axis(*a)).collect())?;
    let reduced = TensorFieldSpace::new(reduced_grid.clone(), space.rank);
    let n_torus: usize = torus.iter().map(|a| grid.axis(*a).n).product();
    let weight = 1.0 / n_torus as f64;
    let mut t = Vec::new();
    for c in 0..space.components() {
        let alpha = space.multi_index(c);
        let Some(beta) = alpha
            .iter()
            .map(|a| kept.iter().position(|k| k == a))
            .collect::<Option<Vec<usize>>>()
        else {
            continue;
        };
        let row_c = reduced.component(&beta);
        for p in 0..grid.points() {
            let idx = grid.multi_index(p);
            let rp = reduced_grid.point_index(&kept.iter().map(|k| idx[*k]).collect::<Vec<_>>());
            t.push((
                row_c * reduced_grid.points() + rp,
                c * grid.points() + p,
                weight,
            ));
        }
    }
    let pi = MatrixOperator::from_triplets(t, space.tag(), reduced.tag())?;
    Ok((ProjectionPair::new_unchecked(pi), reduced))
}

/// Realification `[[Re, -Im], [Im, Re]]` of `Re + i Im`.
pub fn realify(re: &MatrixOperator, im: &MatrixOperator) -> Result<MatrixOperator> {
    if re.domain() != im.domain() || re.codomain() != im.codomain() {
        return Err(OpError::Shape(
            "real and imaginary parts act between different spaces".into(),
        ));
    }
    let (d, c) = (realified_tag(re.domain())?, realified_tag(re.codomain())?);
    let neg_im = im.neg();
    let t: Vec<(usize, usize, f64)> = [(0, 0, re), (0, 1, &neg_im), (1, 0, im), (1, 1, re)]
        .iter()
        .flat_map(|&(bi, bj, op)| {
            let (r0, c0) = (bi * re.nrows(), bj * re.ncols());
            op.triplets()
                .into_iter()
                .map(move |(i, j, v)| (r0 + i, c0 + j, v))
        })
        .collect();
    MatrixOperator::from_triplets(t, d, c)
}

/// `X ⊕ X` named as real and imaginary parts of `X`.
pub fn realified_tag(x: &SpaceTag) -> Result<SpaceTag> {
    SpaceTag::direct_sum(&[
        &x.renamed(format!("Re {}", x.name())),
        &x.renamed(format!("Im {}", x.name())),
    ])
}

/// Range and kernel of a square operator from its singular value
/// decomposition; `rank_tol` is relative to the largest singular value.
///
/// Either pair may be `None` when the corresponding subspace is `{0}`.
pub fn range_kernel_split(
    a: &MatrixOperator,
    rank_tol: Option<f64>,
) -> Result<(Option<ProjectionPair>, Option<ProjectionPair>)> {
    if a.nrows() != a.ncols() {
        return Err(OpError::Shape(
            "range/kernel split needs a square operator".into(),
        ));
    }
    let tol = rank_tol.unwrap_or(RANK_TOL);
    let h = a.codomain().clone();
    let n = h.dim();
    let svd = orthonormal_entries(a).svd(true, false);
    let u = svd.u.expect("requested");
    let sigma = svd.singular_values;
    let smax = sigma.iter().fold(0.0_f64, |m, s| m.max(*s));
    let range_idx: Vec<usize> = (0..sigma.len())
        .filter(|i| smax > 0.0 && sigma[*i] > tol * smax)
        .collect();
    let r = range_idx.len();
    // complete U to an orthonormal basis when the decomposition is thin
    let basis: DMatrix<f64> = if u.ncols() == n {
        u
    } else {
        complete_basis(&u)
    };
    let kernel_idx: Vec<usize> = (0..n).filter(|i| !range_idx.contains(i)).collect();
    let make = |cols: &[usize], label: &str| -> Result<Option<ProjectionPair>> {
        if cols.is_empty() {
            return Ok(None);
        }
        let q = DMatrix::from_fn(cols.len(), n, |i, j| basis[(j, cols[i])]);
        let v = SpaceTag::euclidean(format!("{label}({})", h.name()), cols.len())?;
        Ok(Some(ProjectionPair::new_unchecked(
            from_orthonormal_entries(q, h.clone(), v)?,
        )))
    };
    debug_assert_eq!(r + kernel_idx.len(), n);
    Ok((make(&range_idx, "range")?, make(&kernel_idx, "ker")?))
}

fn complete_basis(u: &DMatrix<f64>) -> DMatrix<f64> {
    let n = u.nrows();
    let mut cols: Vec<nalgebra::DVector<f64>> = u.column_iter().map(|c| c.into_owned()).collect();
    for e in 0..n {
        if cols.len() == n {
            break;
        }
        let mut v = nalgebra::DVector::zeros(n);
        v[e] = 1.0;
        for _ in 0..2 {
            for c in &cols {
                let d = c.dot(&v);
                v -= c * d;
            }
        }
        let nv = v.norm();
        if nv > 1e-8 {
            cols.push(v / nv);
        }
    }
    DMatrix::from_columns(&cols)
}

/// The descendant `π A π*`.
pub fn descend(a: &MatrixOperator, pv: &ProjectionPair) -> Result<MatrixOperator> {
    pv.pi().compose(a)?.compose(pv.embedding())
}

/// `π_1 C π_0*` for `C: H0 → H1`.
pub fn descend_between(
    c: &MatrixOperator,
    p0: &ProjectionPair,
    p1: &ProjectionPair,
) -> Result<MatrixOperator> {
    p1.pi().compose(c)?.compose(p0.embedding())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flatgrid::{build_mother_a, Axis, Bc, Grid};
    use crate::linops::is_skew_selfadjoint;
    use nalgebra::DVector;

    #[test]
    fn sym_asym_dimensions_and_completeness() {
        let g = Grid::unit_torus(3, 2).unwrap();
        let s2 = TensorFieldSpace::new(g, 2);
        let sym = sym_projection(&s2).unwrap();
        let asym = asym_projection(&s2).unwrap();
        assert_eq!(sym.subspace().dim(), 6 * 8);
        assert_eq!(asym.subspace().dim(), 3 * 8);
        let total = sym.projector().add(&asym.projector()).unwrap();
        let id = MatrixOperator::identity(&s2.tag());
        assert!(total.max_abs_diff(&id).unwrap() <= 1e-15);
        assert!(sym.isometry_defect() <= 4.0 * f64::EPSILON);
        assert!(TensorFieldSpace::new(Grid::unit_torus(3, 2).unwrap(), 1).rank == 1);
        assert!(
            sym_projection(&TensorFieldSpace::new(Grid::unit_torus(3, 2).unwrap(), 1)).is_err()
        );
    }

    #[test]
    fn asym_kills_symmetric_tensors() {
        let g = Grid::unit_torus(2, 2).unwrap();
        let s2 = TensorFieldSpace::new(g.clone(), 2);
        let mut t = DVector::zeros(s2.dim());
        for p in 0..g.points() {
            t[s2.index(&[0, 1], p)] = 3.0 + p as f64;
            t[s2.index(&[1, 0], p)] = 3.0 + p as f64;
            t[s2.index(&[1, 1], p)] = -1.0;
        }
        let out = asym_projection(&s2).unwrap().pi().apply(&t).unwrap();
        assert_eq!(out.amax(), 0.0);
    }

    #[test]
    fn even_odd_rows_pair_reflections() {
        let g = Grid::new(vec![Axis::symmetric(4, 1.0).unwrap()]).unwrap();
        let s = g.scalar_space();
        let (e, o) = even_odd(&s).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(e.pi().get(0, 2), r);
        assert_eq!(e.pi().get(0, 1), r);
        assert_eq!(o.pi().get(0, 1), -r);
        let even = DVector::from_vec(g.sample(|x| x[0] * x[0]));
        assert_eq!(o.pi().apply(&even).unwrap().amax(), 0.0);
        let sum = e.projector().add(&o.projector()).unwrap();
        assert!(
            sum.max_abs_diff(&MatrixOperator::identity(&s.tag()))
                .unwrap()
                <= 1e-15
        );
        let d = g.partial(0);
        let eo = o.pi().compose(&d).unwrap().compose(e.embedding()).unwrap();
        assert_eq!(eo.to_dense().rank(1e-12), 2);
        let skew = Grid::new(vec![Axis::dirichlet(4, 1.0).unwrap()]).unwrap();
        assert!(even_odd(&skew.scalar_space()).is_err());
    }

    #[test]
    fn torus_average_examples() {
        let g = Grid::new(vec![
            Axis::dirichlet(3, 0.5).unwrap(),
            Axis::torus(4).unwrap(),
        ])
        .unwrap();
        let s1 = TensorFieldSpace::new(g.clone(), 1);
        let (p, reduced) = torus_average(&s1, &[1]).unwrap();
        assert_eq!(reduced.dim(), 3);
        assert!(p.isometry_defect() <= 1e-15);
        // sin over the torus averages to zero; constants survive
        let mut u = DVector::zeros(s1.dim());
        for q in 0..g.points() {
            let x = g.coords(q);
            u[s1.index(&[0], q)] = 2.0 + (2.0 * std::f64::consts::PI * x[1]).sin();
            u[s1.index(&[1], q)] = 7.0;
        }
        let avg = p.pi().apply(&u).unwrap();
        for v in avg.iter() {
            assert!((v - 2.0).abs() < 1e-15);
        }
        let bad = Grid::new(vec![
            Axis::dirichlet(3, 0.5).unwrap(),
            Axis::periodic(4, 0.5).unwrap(),
        ])
        .unwrap();
        assert!(torus_average(&bad.scalar_space(), &[1]).is_err());
    }

    #[test]
    fn realify_unit_imaginary() {
        let x = SpaceTag::euclidean("c", 1).unwrap();
        let zero = MatrixOperator::zeros(&x, &x);
        let one = MatrixOperator::identity(&x);
        let i = realify(&zero, &one).unwrap();
        assert_eq!(
            i.to_dense(),
            DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])
        );
        let sq = i.compose(&i).unwrap();
        assert_eq!(
            sq.add(&MatrixOperator::identity(i.domain()))
                .unwrap()
                .max_abs(),
            0.0
        );
    }

    #[test]
    fn periodic_acoustics_kernel_is_two_dimensional() {
        let g = Grid::new(vec![Axis::periodic(4, 0.25).unwrap()]).unwrap();
        let ms = MotherSpace::new(g, 1).unwrap();
        let a = build_mother_a(&ms).into_a();
        let p = rank_block(&ms, &[0], &[1]).unwrap();
        let ac = descend(&a, &p).unwrap();
        let (range, kernel) = range_kernel_split(&ac, None).unwrap();
        assert_eq!(kernel.unwrap().subspace().dim(), 2);
        assert_eq!(range.unwrap().subspace().dim(), 6);
        let (r, k) =
            range_kernel_split(&MatrixOperator::zeros(ac.domain(), ac.domain()), None).unwrap();
        assert!(r.is_none() && k.is_some());
    }

    #[test]
    fn descend_examples() {
        let x = SpaceTag::euclidean("x", 2).unwrap();
        let a =
            MatrixOperator::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]], x.clone(), x.clone()).unwrap();
        let p = ProjectionPair::selection(&x, &[1], "v").unwrap();
        assert_eq!(descend(&a, &p).unwrap().to_dense()[(0, 0)], 0.0);
        let id = ProjectionPair::identity(&x);
        assert_eq!(descend(&a, &id).unwrap().max_abs_diff(&a).unwrap(), 0.0);
        let g = Grid::cube(2, 3, 0.5, Bc::Dirichlet).unwrap();
        let ms = MotherSpace::standard(g);
        let ac = descend(
            build_mother_a(&ms).a(),
            &rank_block(&ms, &[0], &[1]).unwrap(),
        )
        .unwrap();
        assert!(is_skew_selfadjoint(&ac, 1e-12).unwrap());
        assert!(rank_block(&ms, &[4], &[]).is_err());
    }

    #[test]
    fn alt3_is_isometric() {
        let g = Grid::unit_torus(3, 2).unwrap();
        let p = alt3_projection(&TensorFieldSpace::new(g, 3)).unwrap();
        assert!(p.isometry_defect() <= 4.0 * f64::EPSILON);
    }
}
