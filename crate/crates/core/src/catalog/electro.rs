//! Maxwell's equations, the extended Maxwell system and its relative, the
//! Dirac operator.
//!
//! Antisymmetric rank-2 fields are stored in the orthonormal basis of
//! [`asym_projection`], ordered `(1,2), (2,0), (0,1)`, so that component `k`
//! is the `k`-th Cartesian component of the dual vector up to a factor
//! `1/√2`; the rank-3 field carries a factor `1/√6` against `1/√2` for the
//! scalar it represents after the divergence. The derivations fold these
//! factors back in with an explicit diagonal step, so the final operators
//! act on Cartesian components.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use nalgebra::DMatrix;

use super::{
    block_op, block_scaling, blocks_of, finish, permutation, require_dims, scalar_blocks,
    state_tag, CatalogEntry, Check, Coef, Derivation, Sign, Source,
};
use crate::error::{OpError, Result};
use crate::flatgrid::{build_nabla, Bc, Grid, MotherSpace};
use crate::linops::{singular_values, MatrixOperator, SpaceTag};
use crate::matlaw::MaterialLaw;
use crate::subspaces::{
    alt3_projection, asym_projection, descend, descend_between, rank_block, ProjectionPair,
};

/// Forward `curl̊` from vector fields to the asym basis, by hand.
fn curl_forward(grid: &Grid, e: &SpaceTag, h: &SpaceTag) -> Result<MatrixOperator> {
    let d: Vec<MatrixOperator> = (0..3).map(|k| grid.partial(k)).collect();
    let entries = [
        (0, 1, -1.0, &d[2]),
        (0, 2, 1.0, &d[1]),
        (1, 0, 1.0, &d[2]),
        (1, 2, -1.0, &d[0]),
        (2, 0, -1.0, &d[1]),
        (2, 1, 1.0, &d[0]),
    ];
    scalar_blocks(grid.points(), &entries, e.clone(), h.clone())
}

/// Forward `grad̊` from scalars to vectors and `div̊` from the dual vector
/// of the asym basis to the alternating scalar, by hand.
fn grad_div_forward(
    grid: &Grid,
    s0: &SpaceTag,
    e: &SpaceTag,
    h: &SpaceTag,
    s3: &SpaceTag,
) -> Result<(MatrixOperator, MatrixOperator)> {
    let d: Vec<MatrixOperator> = (0..3).map(|k| grid.partial(k)).collect();
    let p = grid.points();
    let grad = scalar_blocks(
        p,
        &[(0, 0, 1.0, &d[0]), (1, 0, 1.0, &d[1]), (2, 0, 1.0, &d[2])],
        s0.clone(),
        e.clone(),
    )?;
    let div = scalar_blocks(
        p,
        &[(0, 0, 1.0, &d[0]), (0, 1, 1.0, &d[1]), (0, 2, 1.0, &d[2])],
        h.clone(),
        s3.clone(),
    )?;
    Ok((grad, div))
}

/// Maxwell's equations `∂₀ diag(ε, μ) + diag(σ, 0) + [[0, -curl], [curl̊, 0]]`
/// on `E ⊕ H`.
pub fn maxwell(grid: &Grid, epsilon: &Coef, mu: &Coef, sigma: &Coef) -> Result<CatalogEntry> {
    let name = "maxwell";
    require_dims(grid, &[3], name)?;
    let ms = MotherSpace::new(grid.clone(), 2)?;
    let e = ms.rank_space(1).tag();
    let asym = asym_projection(&ms.rank_space(2))?;
    let h = asym.subspace().clone();
    epsilon.require(&e, "epsilon", Sign::Positive)?;
    mu.require(&h, "mu", Sign::Positive)?;
    sigma.require(&e, "sigma", Sign::NonNegative)?;
    let rb = rank_block(&ms, &[1], &[2])?;
    let forms = ProjectionPair::direct_sum(&[&ProjectionPair::identity(&e), &asym])?;
    let np = e.dim();
    let scale = block_scaling(forms.subspace(), &[np, np], &[1.0, SQRT_2])?;
    let derivation = Derivation::mother(ms)
        .then_projection(
            "π onto L²₁ ⊕ L²₂",
            "vector fields and rank-2 tensors of the mother operator",
            &rb,
        )
        .then_projection(
            "I ⊕ asym",
            "antisymmetric part: the exterior derivative on 1-forms",
            &forms,
        )
        .then(
            "diag(1, √2)",
            "asym basis to Cartesian components of H",
            scale,
        );
    let parts = [&e, &h];
    let state = state_tag(name, grid, &parts)?;
    let m0 = block_op(
        &state,
        &parts,
        &[(0, 0, &epsilon.on(&e)?), (1, 1, &mu.on(&h)?)],
    )?;
    let m1 = block_op(&state, &parts, &[(0, 0, &sigma.on(&e)?)])?;
    let curl = curl_forward(grid, &e, &h)?;
    let classical = block_op(
        &state,
        &parts,
        &[(0, 1, &curl.adjoint().neg()), (1, 0, &curl)],
    )?;
    finish(
        name,
        derivation,
        state,
        blocks_of(&["E", "H"], &parts),
        (m0, m1),
        Some(classical),
    )
}

/// The forward `curl̊` assembled stencil by stencil, from vector fields to
/// the asym basis of antisymmetric 2-tensors.
pub fn assembled_curl(grid: &Grid) -> Result<MatrixOperator> {
    require_dims(grid, &[3], "curl assembly")?;
    let s1 = crate::flatgrid::TensorFieldSpace::new(grid.clone(), 1);
    let asym = asym_projection(&s1.raised())?;
    curl_forward(grid, &s1.tag(), asym.subspace())
}

/// `asym ∇̊₁` against the hand-assembled `curl̊ / √2`.
pub fn verify_curl_identification(grid: &Grid) -> Result<Check> {
    verify_curl_against(grid, &assembled_curl(grid)?)
}

/// `asym ∇̊₁` against `curl / √2` for a caller supplied `curl`.
pub fn verify_curl_against(grid: &Grid, curl: &MatrixOperator) -> Result<Check> {
    require_dims(grid, &[3], "curl identification")?;
    let s1 = crate::flatgrid::TensorFieldSpace::new(grid.clone(), 1);
    let asym = asym_projection(&s1.raised())?;
    let descended = descend_between(
        &build_nabla(&s1),
        &ProjectionPair::identity(&s1.tag()),
        &asym,
    )?;
    Ok(Check::new(
        "asym ∇̊ = curl̊/√2",
        descended.max_abs_diff(&curl.scale(FRAC_1_SQRT_2))?,
        1e-14,
    ))
}

/// Alternating forms of all orders on a 3D grid, laid out as
/// `(s3, E, s0, H)`: odd orders first, even orders second.
struct Forms {
    grid: Grid,
    ms: MotherSpace,
    s0: SpaceTag,
    e: SpaceTag,
    asym: ProjectionPair,
    alt: ProjectionPair,
}

impl Forms {
    fn new(grid: &Grid) -> Result<Self> {
        require_dims(grid, &[3], "alternating forms")?;
        let ms = MotherSpace::new(grid.clone(), 3)?;
        Ok(Self {
            grid: grid.clone(),
            s0: ms.rank_space(0).tag(),
            e: ms.rank_space(1).tag(),
            asym: asym_projection(&ms.rank_space(2))?,
            alt: alt3_projection(&ms.rank_space(3))?,
            ms,
        })
    }

    fn h(&self) -> &SpaceTag {
        self.asym.subspace()
    }

    fn s3(&self) -> &SpaceTag {
        self.alt.subspace()
    }

    fn parts(&self) -> [&SpaceTag; 4] {
        [self.s3(), &self.e, &self.s0, self.h()]
    }

    fn sizes(&self) -> [usize; 4] {
        let p = self.grid.points();
        [p, 3 * p, p, 3 * p]
    }

    fn state(&self, name: &str) -> Result<SpaceTag> {
        state_tag(name, &self.grid, &self.parts())
    }

    fn normalization(&self, state: &SpaceTag) -> Result<MatrixOperator> {
        block_scaling(state, &self.sizes(), &[(1.5_f64).sqrt(), 1.0, 1.0, SQRT_2])
    }

    /// `[[0, -curl], [curl̊, 0]]` between `E` and `H`, zero elsewhere.
    fn curl_part(&self, state: &SpaceTag) -> Result<Derivation> {
        let rb = rank_block(&self.ms, &[1, 3], &[0, 2])?;
        let forms = ProjectionPair::direct_sum(&[
            &ProjectionPair::identity(&self.e),
            &self.alt,
            &ProjectionPair::identity(&self.s0),
            &self.asym,
        ])?;
        let [p1, p3, p0, p2] = [self.e.dim(), self.s3().dim(), self.s0.dim(), self.h().dim()];
        let order = permutation(
            forms.subspace(),
            &[p1, p3, p0, p2],
            &[1, 0, 2, 3],
            Some(state.clone()),
        )?;
        Ok(Derivation::mother(self.ms.clone())
            .then_projection(
                "π onto L²₁ ⊕ L²₃ | L²₀ ⊕ L²₂",
                "odd ranks against even ranks",
                &rb,
            )
            .then_projection(
                "I ⊕ alt ⊕ I ⊕ asym",
                "alternating parts: the exterior derivative on odd forms",
                &forms,
            )
            .then(
                "reorder to (s3, E, s0, H)",
                "block order of the extended Maxwell system",
                order,
            )
            .then(
                "normalize alternating bases",
                "alternating bases to Cartesian components",
                self.normalization(state)?,
            ))
    }

    /// `[[0, X], [-X*, 0]]` with `X` carrying `div̊: H → s3` and
    /// `grad̊: s0 → E`.
    fn grad_div_part(&self, state: &SpaceTag) -> Result<Derivation> {
        let rb = rank_block(&self.ms, &[0, 2], &[1, 3])?;
        let forms = ProjectionPair::direct_sum(&[
            &ProjectionPair::identity(&self.s0),
            &self.asym,
            &ProjectionPair::identity(&self.e),
            &self.alt,
        ])?;
        let [p0, p2, p1, p3] = [self.s0.dim(), self.h().dim(), self.e.dim(), self.s3().dim()];
        let swap = permutation(forms.subspace(), &[p0, p2, p1, p3], &[2, 3, 0, 1], None)?;
        let order = permutation(
            swap.codomain(),
            &[p1, p3, p0, p2],
            &[1, 0, 2, 3],
            Some(state.clone()),
        )?;
        Ok(Derivation::mother(self.ms.clone())
            .then_projection(
                "π onto L²₀ ⊕ L²₂ | L²₁ ⊕ L²₃",
                "even ranks against odd ranks",
                &rb,
            )
            .then_projection(
                "I ⊕ asym ⊕ I ⊕ alt",
                "alternating parts: the exterior derivative on even forms",
                &forms,
            )
            .then(
                "swap halves",
                "[[0, 1], [1, 0]] relative of the even-form descendant",
                swap,
            )
            .then(
                "reorder to (s3, E, s0, H)",
                "block order of the extended Maxwell system",
                order,
            )
            .then(
                "normalize alternating bases",
                "alternating bases to Cartesian components",
                self.normalization(state)?,
            ))
    }

    /// Both parts assembled directly from 1D stencils.
    fn cartesian(&self, state: &SpaceTag) -> Result<(MatrixOperator, MatrixOperator)> {
        let parts = self.parts();
        let curl = curl_forward(&self.grid, &self.e, self.h())?;
        let curl_part = block_op(
            state,
            &parts,
            &[(1, 3, &curl.adjoint().neg()), (3, 1, &curl)],
        )?;
        let (grad, div) = grad_div_forward(&self.grid, &self.s0, &self.e, self.h(), self.s3())?;
        let gd_part = block_op(
            state,
            &parts,
            &[
                (0, 3, &div),
                (1, 2, &grad),
                (2, 1, &grad.adjoint().neg()),
                (3, 0, &div.adjoint().neg()),
            ],
        )?;
        Ok((curl_part, gd_part))
    }

    /// Drops the order-0 block.
    fn without_s0(&self, state: &SpaceTag, name: &str) -> Result<(ProjectionPair, SpaceTag)> {
        let [p3, p1, p0, _] = self.sizes();
        let keep: Vec<usize> = (0..state.dim())
            .filter(|i| !(p3 + p1..p3 + p1 + p0).contains(i))
            .collect();
        let reduced = state_tag(name, &self.grid, &[self.s3(), &self.e, self.h()])?;
        let sel = ProjectionPair::selection(state, &keep, reduced.name())?;
        Ok((sel, reduced))
    }
}

fn conjugated(
    parts: [Derivation; 2],
    m0: &Coef,
    space: &SpaceTag,
) -> Result<(Derivation, MatrixOperator, MatrixOperator)> {
    m0.require(space, "M0", Sign::Positive)?;
    let (inv_root, root) = (m0.power_on(space, -0.5)?, m0.power_on(space, 0.5)?);
    let [curl, gd] = parts;
    let derivation = Derivation::from_source(Source::Sum(vec![
        curl.then(
            "M0^{-1/2}",
            "curl part weighted by the inverse root of M0",
            inv_root.clone(),
        ),
        gd.then(
            "M0^{1/2}",
            "grad/div part weighted by the root of M0",
            root.clone(),
        ),
    ]));
    Ok((derivation, inv_root, root))
}

/// `∂₀ + M0^{-1/2} Curl M0^{-1/2} + M0^{1/2} GD M0^{1/2}` on `(s3, E, s0, H)`
/// with the two parts as displayed in Cartesian coordinates.
pub fn extended_maxwell(grid: &Grid, m0: &Coef) -> Result<CatalogEntry> {
    let name = "extended_maxwell";
    let forms = Forms::new(grid)?;
    let state = forms.state(name)?;
    let (derivation, inv_root, root) = conjugated(
        [forms.curl_part(&state)?, forms.grad_div_part(&state)?],
        m0,
        &state,
    )?;
    let (curl, gd) = forms.cartesian(&state)?;
    let classical = inv_root
        .compose(&curl)?
        .compose(&inv_root)?
        .add(&root.compose(&gd)?.compose(&root)?)?;
    let law = MaterialLaw::identity(&state);
    finish(
        name,
        derivation,
        state,
        blocks_of(&["s3", "E", "s0", "H"], &forms.parts()),
        (law.m0, law.m1),
        Some(classical),
    )
}

/// The extended Maxwell system without the order-0 field; `m0` acts on the
/// remaining `(s3, E, H)`.
pub fn reduced_extended_maxwell(grid: &Grid, m0: &Coef) -> Result<CatalogEntry> {
    let name = "reduced_extended_maxwell";
    let forms = Forms::new(grid)?;
    let full = forms.state("extended_maxwell")?;
    let (sel, state) = forms.without_s0(&full, name)?;
    let drop =
        |d: Derivation| d.then_projection("drop s0", "third row and column eliminated", &sel);
    let (derivation, inv_root, root) = conjugated(
        [
            drop(forms.curl_part(&full)?),
            drop(forms.grad_div_part(&full)?),
        ],
        m0,
        &state,
    )?;
    let (curl, gd) = forms.cartesian(&full)?;
    let (curl, gd) = (descend(&curl, &sel)?, descend(&gd, &sel)?);
    let classical = inv_root
        .compose(&curl)?
        .compose(&inv_root)?
        .add(&root.compose(&gd)?.compose(&root)?)?;
    let parts = [forms.s3(), &forms.e, forms.h()];
    let law = MaterialLaw::identity(&state);
    finish(
        name,
        derivation,
        state.clone(),
        blocks_of(&["s3", "E", "H"], &parts),
        (law.m0, law.m1),
        Some(classical),
    )
}

/// Products of the two spatial parts of the extended Maxwell system with
/// `M0 = I`, in both orders.
pub fn verify_annihilation(grid: &Grid) -> Result<Check> {
    let forms = Forms::new(grid)?;
    let state = forms.state("extended_maxwell")?;
    let curl = forms.curl_part(&state)?.evaluate()?;
    let gd = forms.grad_div_part(&state)?.evaluate()?;
    let residual = curl
        .compose(&gd)?
        .max_abs()
        .max(gd.compose(&curl)?.max_abs());
    Ok(Check::new("curl part · grad/div part = 0", residual, 1e-12))
}

/// The `(E, H)` rows and columns of extended Maxwell (`M0 = I`) against
/// [`maxwell`] with unit coefficients.
pub fn verify_maxwell_restriction(grid: &Grid) -> Result<Check> {
    let ext = extended_maxwell(grid, &Coef::Scalar(1.0))?;
    let mx = maxwell(
        grid,
        &Coef::Scalar(1.0),
        &Coef::Scalar(1.0),
        &Coef::Scalar(0.0),
    )?;
    let keep: Vec<usize> = ["E", "H"]
        .iter()
        .flat_map(|l| ext.block(l).expect("labelled block"))
        .collect();
    let sel = ProjectionPair::selection(ext.space(), &keep, "E⊕H")?;
    let restricted = descend(&ext.problem.a, &sel)?;
    Ok(Check::new(
        "extended Maxwell restricted to (E, H) = Maxwell",
        restricted.max_abs_diff(&mx.problem.a)?,
        1e-12,
    ))
}

/// Realification of a complex 2×2 matrix, ordered `(Re z1, Im z1, Re z2, Im z2)`.
fn realify_c2(m: [[(f64, f64); 2]; 2]) -> DMatrix<f64> {
    let mut r = DMatrix::zeros(4, 4);
    for (i, row) in m.iter().enumerate() {
        for (j, &(a, b)) in row.iter().enumerate() {
            r[(2 * i, 2 * j)] = a;
            r[(2 * i, 2 * j + 1)] = -b;
            r[(2 * i + 1, 2 * j)] = b;
            r[(2 * i + 1, 2 * j + 1)] = a;
        }
    }
    r
}

/// The Pauli matrices, realified in the interleaved ordering.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSet {
    pub pi: [DMatrix<f64>; 3],
    /// Multiplication by `i`.
    pub unit: DMatrix<f64>,
}

impl Default for PauliSet {
    fn default() -> Self {
        let (o, l, i) = ((0.0, 0.0), (1.0, 0.0), (0.0, 1.0));
        let (ml, mi) = ((-1.0, 0.0), (0.0, -1.0));
        Self {
            pi: [
                realify_c2([[o, l], [l, o]]),
                realify_c2([[o, mi], [i, o]]),
                realify_c2([[l, o], [o, ml]]),
            ],
            unit: realify_c2([[i, o], [o, i]]),
        }
    }
}

impl PauliSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Largest deviation from `Π_k² = I`, `Π_j Π_k = -Π_k Π_j` and the
    /// cyclic products `Π_1 Π_2 = i Π_3`.
    pub fn identity_defect(&self) -> f64 {
        let id = DMatrix::<f64>::identity(4, 4);
        let mut worst: f64 = 0.0;
        for j in 0..3 {
            worst = worst.max((&self.pi[j] * &self.pi[j] - &id).amax());
            let (k, l) = ((j + 1) % 3, (j + 2) % 3);
            let prod = &self.pi[j] * &self.pi[k];
            worst = worst.max((&prod + &self.pi[k] * &self.pi[j]).amax());
            worst = worst.max((prod - &self.unit * &self.pi[l]).amax());
        }
        worst
    }
}

/// Stencil choice for the realified Dirac block `W`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiracStencil {
    /// Backward partials in row and column 1, forward elsewhere; the choice
    /// under which `W` is a relative of the extended Maxwell system.
    Mixed,
    /// Forward partials everywhere, as in `i + i Σ Π_k ∂̊_k`.
    Forward,
}

/// `(row, column, sign, axis)` of the derivative part of realified `W`.
const W_DERIVATIVES: [(usize, usize, f64, usize); 12] = [
    (0, 1, -1.0, 2),
    (0, 2, 1.0, 1),
    (0, 3, -1.0, 0),
    (1, 0, 1.0, 2),
    (1, 2, 1.0, 0),
    (1, 3, 1.0, 1),
    (2, 0, -1.0, 1),
    (2, 1, -1.0, 0),
    (2, 3, 1.0, 2),
    (3, 0, 1.0, 0),
    (3, 1, -1.0, 1),
    (3, 2, -1.0, 2),
];

/// Zero-order part of realified `W`, the image of the mass term `i`.
const W_MASS: [(usize, usize, f64); 4] = [(0, 1, -1.0), (1, 0, 1.0), (2, 3, -1.0), (3, 2, 1.0)];

fn spinor_tag(grid: &Grid) -> Result<SpaceTag> {
    SpaceTag::uniform(
        format!("C² realified[{}]", grid.label()),
        4 * grid.points(),
        grid.cell_volume(),
    )
}

/// Realified `W = i + i C(∂)`; `with_mass = false` keeps only the
/// derivative part.
fn w_operator(grid: &Grid, stencil: DiracStencil, with_mass: bool) -> Result<MatrixOperator> {
    let q = spinor_tag(grid)?;
    let fwd: Vec<MatrixOperator> = (0..3).map(|k| grid.partial(k)).collect();
    let bwd: Vec<MatrixOperator> = (0..3).map(|k| grid.backward_partial(k)).collect();
    let mut entries: Vec<(usize, usize, f64, &MatrixOperator)> = W_DERIVATIVES
        .iter()
        .map(|&(r, c, s, ax)| {
            let backward = stencil == DiracStencil::Mixed && (r == 1 || c == 1);
            (r, c, s, if backward { &bwd[ax] } else { &fwd[ax] })
        })
        .collect();
    let id = MatrixOperator::identity(&grid.scalar_space().tag());
    if with_mass {
        entries.extend(W_MASS.iter().map(|&(r, c, s)| (r, c, s, &id)));
    }
    scalar_blocks(grid.points(), &entries, q.clone(), q)
}

/// Realified `W` including the zero-order part.
pub fn dirac_w(grid: &Grid, stencil: DiracStencil) -> Result<MatrixOperator> {
    require_dims(grid, &[3], "Dirac operator")?;
    w_operator(grid, stencil, true)
}

fn require_periodic(grid: &Grid) -> Result<()> {
    require_dims(grid, &[3], "Dirac operator")?;
    if grid.axes().iter().any(|a| a.bc != Bc::Periodic) {
        return Err(OpError::InvalidArgument(
            "the Dirac operator is only set up on periodic grids".into(),
        ));
    }
    Ok(())
}

const L1: [[f64; 4]; 4] = [
    [0.0, 0.0, 0.0, 1.0],
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
];
const L2: [[f64; 4]; 4] = [
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, -1.0, 0.0],
    [0.0, 0.0, 0.0, -1.0],
    [-1.0, 0.0, 0.0, 0.0],
];
const CHI: [[f64; 4]; 4] = [
    [0.0, 0.0, 0.0, 1.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, -1.0, 0.0, 0.0],
    [1.0, 0.0, 0.0, 0.0],
];

/// `m ⊗ I_P` for an 8×8 matrix given as four 4×4 blocks.
fn kron8(
    grid: &Grid,
    blocks: [[Option<[[f64; 4]; 4]>; 2]; 2],
    domain: &SpaceTag,
    codomain: &SpaceTag,
) -> Result<MatrixOperator> {
    let mut m = DMatrix::zeros(8, 8);
    for (bi, row) in blocks.iter().enumerate() {
        for (bj, b) in row.iter().enumerate() {
            if let Some(b) = b {
                for i in 0..4 {
                    for j in 0..4 {
                        m[(4 * bi + i, 4 * bj + j)] = b[i][j];
                    }
                }
            }
        }
    }
    let e8 = SpaceTag::euclidean("R⁸", 8)?;
    let small_op = MatrixOperator::from_dense(m, e8.clone(), e8)?;
    let id = MatrixOperator::identity(&grid.scalar_space().tag());
    small_op.kron(&id, domain.clone(), codomain.clone())
}

fn transpose4(m: [[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut t = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            t[j][i] = m[i][j];
        }
    }
    t
}

fn neg4(m: [[f64; 4]; 4]) -> [[f64; 4]; 4] {
    m.map(|r| r.map(|v| -v))
}

/// Shared pieces of the Dirac construction on a periodic 3D grid.
struct DiracParts {
    forms: Forms,
    ext_state: SpaceTag,
    state: SpaceTag,
    spinor: SpaceTag,
    /// `diag(L1ᵀ, L2) ⊗ I` from the Dirac state to the extended Maxwell state.
    u: MatrixOperator,
    /// `[[0, -χᵀ], [χ, 0]] ⊗ I` on the extended Maxwell state.
    chiral: MatrixOperator,
}

impl DiracParts {
    fn new(grid: &Grid) -> Result<Self> {
        require_periodic(grid)?;
        let forms = Forms::new(grid)?;
        let ext_state = forms.state("extended_maxwell")?;
        let spinor = spinor_tag(grid)?;
        let state = state_tag("dirac", grid, &[&spinor, &spinor])?;
        let u = kron8(
            grid,
            [[Some(transpose4(L1)), None], [None, Some(L2)]],
            &state,
            &ext_state,
        )?;
        let chiral = kron8(
            grid,
            [[None, Some(neg4(transpose4(CHI)))], [Some(CHI), None]],
            &ext_state,
            &ext_state,
        )?;
        Ok(Self {
            forms,
            ext_state,
            state,
            spinor,
            u,
            chiral,
        })
    }

    fn cartesian_ext(&self) -> Derivation {
        let parts = || -> Result<Vec<Derivation>> {
            Ok(vec![
                self.forms.curl_part(&self.ext_state)?,
                self.forms.grad_div_part(&self.ext_state)?,
            ])
        };
        Derivation::from_source(Source::Sum(parts().expect("forms built for this grid")))
    }

    /// `[[0, -W*], [W, 0]]` on the Dirac state.
    fn hamiltonian(&self, w: &MatrixOperator) -> Result<MatrixOperator> {
        let q = &self.spinor;
        block_op(
            &self.state,
            &[q, q],
            &[(0, 1, &w.adjoint().neg()), (1, 0, w)],
        )
    }
}

/// The free Dirac operator `∂₀ + [[0, -W*], [W, 0]]`, derived as the
/// relative `Uᵀ (extended Maxwell) U` with the chiral zero-order term as `M1`.
pub fn dirac(grid: &Grid) -> Result<CatalogEntry> {
    let parts = DiracParts::new(grid)?;
    let ut = parts.u.adjoint();
    let derivation = parts.cartesian_ext().then(
        "Uᵀ = diag(L1, L2ᵀ)",
        "signed permutations relating extended Maxwell and the Dirac operator",
        ut.clone(),
    );
    let m1 = ut.compose(&parts.chiral)?.compose(&parts.u)?;
    let m0 = MatrixOperator::identity(&parts.state);
    let classical = parts.hamiltonian(&w_operator(grid, DiracStencil::Mixed, false)?)?;
    let q = &parts.spinor;
    finish(
        "dirac",
        derivation,
        parts.state.clone(),
        blocks_of(&["upper", "lower"], &[q, q]),
        (m0, m1),
        Some(classical),
    )
}

/// `U [[0, -W*], [W, 0]] Uᵀ` against the Cartesian extended Maxwell part
/// plus the chiral term.
pub fn verify_dirac_equivalence(grid: &Grid) -> Result<Check> {
    let parts = DiracParts::new(grid)?;
    let x = parts.hamiltonian(&dirac_w(grid, DiracStencil::Mixed)?)?;
    let lhs = parts.u.compose(&x)?.compose(&parts.u.adjoint())?;
    let rhs = parts.cartesian_ext().evaluate()?.add(&parts.chiral)?;
    Ok(Check::new(
        "Dirac conjugated = extended Maxwell + chiral M1",
        lhs.max_abs_diff(&rhs)?,
        1e-12,
    ))
}

/// Sorted singular values of the Dirac spatial part (with mass) and of the
/// extended Maxwell part plus chiral term.
pub fn verify_dirac_spectra(grid: &Grid) -> Result<Check> {
    let parts = DiracParts::new(grid)?;
    let x = parts.hamiltonian(&dirac_w(grid, DiracStencil::Mixed)?)?;
    let y = parts.cartesian_ext().evaluate()?.add(&parts.chiral)?;
    let (sx, sy) = (singular_values(&x), singular_values(&y));
    let residual = sx
        .iter()
        .zip(&sy)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(Check::new(
        "Dirac and extended Maxwell spectra",
        residual,
        1e-8,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn torus(n: usize) -> Grid {
        Grid::unit_torus(3, n).unwrap()
    }

    #[test]
    fn pauli_identities_are_exact() {
        assert_eq!(PauliSet::new().identity_defect(), 0.0);
    }

    #[test]
    fn w_matches_realified_pauli_sum() {
        let g = torus(3);
        let ps = PauliSet::new();
        let p = g.points();
        let q = spinor_tag(&g).unwrap();
        let e4 = SpaceTag::euclidean("R⁴", 4).unwrap();
        let as_op = |m: &DMatrix<f64>| {
            MatrixOperator::from_dense(m.clone(), e4.clone(), e4.clone()).unwrap()
        };
        let mut sum = MatrixOperator::identity(&q);
        for k in 0..3 {
            let term = as_op(&ps.pi[k])
                .kron(&g.partial(k), q.clone(), q.clone())
                .unwrap();
            sum = sum.add(&term).unwrap();
        }
        let id = MatrixOperator::identity(&g.scalar_space().tag());
        let unit = as_op(&ps.unit).kron(&id, q.clone(), q.clone()).unwrap();
        let w = unit.compose(&sum).unwrap();
        assert_eq!(
            w.max_abs_diff(&dirac_w(&g, DiracStencil::Forward).unwrap())
                .unwrap(),
            0.0
        );
        assert_eq!(p * 4, q.dim());
    }

    #[test]
    fn dirac_mass_term_is_the_chiral_law() {
        let g = torus(2);
        let entry = dirac(&g).unwrap();
        let mass = w_operator(&g, DiracStencil::Mixed, true)
            .unwrap()
            .sub(&w_operator(&g, DiracStencil::Mixed, false).unwrap())
            .unwrap();
        let parts = DiracParts::new(&g).unwrap();
        let expected = parts.hamiltonian(&mass).unwrap();
        assert_eq!(entry.problem.law.m1.max_abs_diff(&expected).unwrap(), 0.0);
    }

    #[test]
    fn dirac_rejects_dirichlet_grids() {
        let g = Grid::cube(3, 3, 1.0 / 3.0, Bc::Dirichlet).unwrap();
        assert!(dirac(&g).is_err());
        assert!(maxwell(
            &Grid::unit_torus(2, 3).unwrap(),
            &1.0.into(),
            &1.0.into(),
            &0.0.into()
        )
        .is_err());
    }

    #[test]
    fn curl_of_gradient_vanishes() {
        let g = torus(4);
        let s0 = g.scalar_space();
        let grad = build_nabla(&s0);
        let asym = asym_projection(&s0.raised().raised()).unwrap();
        let curl = curl_forward(&g, grad.codomain(), asym.subspace()).unwrap();
        assert_eq!(curl.compose(&grad).unwrap().max_abs(), 0.0);
    }
}
