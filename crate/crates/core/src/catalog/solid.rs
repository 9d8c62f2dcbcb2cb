//! Elasticity and the models obtained from it: thermo-elasticity, the
//! Reissner–Mindlin plate, the Timoshenko beam and their Kirchhoff–Love and
//! Euler–Bernoulli limits.
//!
//! Symmetric stresses are stored in the orthonormal basis of
//! [`sym_projection`] (diagonal entries first, then `√2 T_ij` for the
//! off-diagonal pairs), so Frobenius norms are Euclidean norms of the
//! coordinates and `C` acts on these coordinates.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DVector;

use super::{
    block_op, block_scaling, blocks_of, finish, require_dims, scalar_blocks, state_tag,
    CatalogEntry, Check, Coef, Derivation, Sign, Source, VerificationReport,
};
use crate::error::{OpError, Result};
use crate::evolve::{solve, Forcing, Scheme, SolverConfig};
use crate::flatgrid::{Axis, Grid, MotherSpace};
use crate::linops::{DenseLu, MatrixOperator, SpaceTag};
use crate::matlaw::{couple, MaterialLaw, OffBlock};
use crate::subspaces::{offdiag_pairs, rank_block, sym_projection, torus_average, ProjectionPair};

/// Parameters of the plate and beam models.
#[derive(Clone, Debug)]
pub struct PlateParams {
    pub nu1: Coef,
    pub nu2: Coef,
    pub kappa: Coef,
    pub stiffness: Coef,
    /// Damping of the deflection velocity.
    pub d: Coef,
}

/// `grad̊` from 1D stencils.
fn grad_stencil(grid: &Grid, s0: &SpaceTag, s1: &SpaceTag) -> Result<MatrixOperator> {
    let d: Vec<MatrixOperator> = (0..grid.dim()).map(|k| grid.partial(k)).collect();
    let entries: Vec<_> = d
        .iter()
        .enumerate()
        .map(|(i, di)| (i, 0, 1.0, di))
        .collect();
    scalar_blocks(grid.points(), &entries, s0.clone(), s1.clone())
}

/// `Grad̊ v = ½(∂_i v_j + ∂_j v_i)` from 1D stencils, in the orthonormal
/// symmetric basis.
fn sym_grad_stencil(grid: &Grid, s1: &SpaceTag, t: &SpaceTag) -> Result<MatrixOperator> {
    let n = grid.dim();
    let d: Vec<MatrixOperator> = (0..n).map(|k| grid.partial(k)).collect();
    let mut entries: Vec<(usize, usize, f64, &MatrixOperator)> =
        (0..n).map(|i| (i, i, 1.0, &d[i])).collect();
    for (b, (i, j)) in offdiag_pairs(n).into_iter().enumerate() {
        // √2 · ½ (∂_i v_j + ∂_j v_i)
        entries.push((n + b, j, FRAC_1_SQRT_2, &d[i]));
        entries.push((n + b, i, FRAC_1_SQRT_2, &d[j]));
    }
    scalar_blocks(grid.points(), &entries, s1.clone(), t.clone())
}

/// Scalar, vector and symmetric tensor fields of one grid with the two
/// first-order descendants linking them.
struct Fields {
    grid: Grid,
    s0: SpaceTag,
    s1: SpaceTag,
    sym: ProjectionPair,
}

impl Fields {
    fn new(grid: &Grid) -> Result<Self> {
        let ms = MotherSpace::new(grid.clone(), 2)?;
        Ok(Self {
            grid: grid.clone(),
            s0: ms.rank_space(0).tag(),
            s1: ms.rank_space(1).tag(),
            sym: sym_projection(&ms.rank_space(2))?,
        })
    }

    fn t(&self) -> &SpaceTag {
        self.sym.subspace()
    }

    /// `[[0, div], [grad̊, 0]]` on `L²₀ ⊕ L²₁`.
    fn scalar_vector(&self) -> Result<Derivation> {
        let ms = MotherSpace::new(self.grid.clone(), 1)?;
        let rb = rank_block(&ms, &[0], &[1])?;
        Ok(Derivation::mother(ms).then_projection(
            "π onto L²₀ ⊕ L²₁",
            "scalars against vector fields",
            &rb,
        ))
    }

    /// `[[0, Div], [Grad̊, 0]]` on `L²₁ ⊕ sym[L²₂]`.
    fn vector_stress(&self) -> Result<Derivation> {
        let ms = MotherSpace::new(self.grid.clone(), 2)?;
        let rb = rank_block(&ms, &[1], &[2])?;
        let forms = ProjectionPair::direct_sum(&[&ProjectionPair::identity(&self.s1), &self.sym])?;
        Ok(Derivation::mother(ms)
            .then_projection(
                "π onto L²₁ ⊕ L²₂",
                "vector fields against rank-2 tensors",
                &rb,
            )
            .then_projection(
                "I ⊕ sym",
                "symmetric part: the symmetrized gradient",
                &forms,
            ))
    }

    /// The relative under `diag(1, -1)`, flipping the sign of both blocks.
    fn flipped(d: Derivation, first: usize, second: usize) -> Result<Derivation> {
        let space = match d.steps.last() {
            Some(s) => s.map.codomain().clone(),
            None => {
                return Err(OpError::InvalidArgument(
                    "derivation without a projection".into(),
                ))
            }
        };
        let flip = block_scaling(&space, &[first, second], &[1.0, -1.0])?;
        Ok(d.then(
            "diag(1, -1)",
            "relative with the sign of the second component reversed",
            flip,
        ))
    }

    /// `[[0, -div, 0, 0], [-grad̊, 0, 0, 0], [0, 0, 0, -Div], [0, 0, -Grad̊, 0]]`
    /// on `(η, ζ, s, T)`.
    fn coupled_pattern(&self) -> Result<Derivation> {
        let (p0, p1, pt) = (self.s0.dim(), self.s1.dim(), self.t().dim());
        Ok(Derivation::from_source(Source::DirectSum(vec![
            Self::flipped(self.scalar_vector()?, p0, p1)?,
            Self::flipped(self.vector_stress()?, p1, pt)?,
        ])))
    }

    fn coupled_classical(&self, state: &SpaceTag) -> Result<MatrixOperator> {
        let grad = grad_stencil(&self.grid, &self.s0, &self.s1)?;
        let sgrad = sym_grad_stencil(&self.grid, &self.s1, self.t())?;
        let parts = self.parts4();
        // -div = grad̊*, -Div = Grad̊*
        block_op(
            state,
            &parts,
            &[
                (0, 1, &grad.adjoint()),
                (1, 0, &grad.neg()),
                (2, 3, &sgrad.adjoint()),
                (3, 2, &sgrad.neg()),
            ],
        )
    }

    fn parts4(&self) -> [&SpaceTag; 4] {
        [&self.s0, &self.s1, &self.s1, self.t()]
    }
}

/// Elastic waves `∂₀ diag(ρ, C⁻¹) + [[0, Div], [Grad̊, 0]]` on `(v, T)`.
pub fn elasticity(grid: &Grid, rho: &Coef, stiffness: &Coef) -> Result<CatalogEntry> {
    let name = "elasticity";
    require_dims(grid, &[2, 3], name)?;
    let f = Fields::new(grid)?;
    rho.require(&f.s1, "rho", Sign::Positive)?;
    stiffness.require(f.t(), "stiffness", Sign::Positive)?;
    let parts = [&f.s1, f.t()];
    let state = state_tag(name, grid, &parts)?;
    let m0 = block_op(
        &state,
        &parts,
        &[
            (0, 0, &rho.on(&f.s1)?),
            (1, 1, &stiffness.inverse_on(f.t())?),
        ],
    )?;
    let m1 = MatrixOperator::zeros(&state, &state);
    let sgrad = sym_grad_stencil(grid, &f.s1, f.t())?;
    let classical = block_op(
        &state,
        &parts,
        &[(0, 1, &sgrad.adjoint().neg()), (1, 0, &sgrad)],
    )?;
    finish(
        name,
        f.vector_stress()?,
        state,
        blocks_of(&["v", "T"], &parts),
        (m0, m1),
        Some(classical),
    )
}

/// `Γ: L²₀ → sym[L²₂]`; a scalar or per-point value multiplies the
/// identity tensor, an operator is used as given.
fn thermal_coupling(gamma: &Coef, f: &Fields) -> Result<MatrixOperator> {
    let p = f.grid.points();
    let n = f.grid.dim();
    let values: Vec<f64> = match gamma {
        Coef::Scalar(g) => vec![*g; p],
        Coef::Diagonal(d) if d.len() == p => d.clone(),
        Coef::Diagonal(d) => {
            return Err(OpError::Shape(format!(
                "gamma has {} values, the grid has {p} points",
                d.len()
            )));
        }
        Coef::Operator(op) => return op.retagged(f.s0.clone(), f.t().clone()),
    };
    let t = (0..n)
        .flat_map(|i| {
            values
                .iter()
                .enumerate()
                .map(move |(q, v)| (i * p + q, q, *v))
        })
        .collect();
    MatrixOperator::from_triplets(t, f.s0.clone(), f.t().clone())
}

/// Thermo-elasticity on `(η, ζ, s, T)`: heat conduction coupled to elastic
/// waves through `Γ` in `M0` only.
pub fn thermo_elasticity(
    grid: &Grid,
    nu1: &Coef,
    nu2: &Coef,
    kappa: &Coef,
    stiffness: &Coef,
    gamma: &Coef,
) -> Result<CatalogEntry> {
    let name = "thermo_elasticity";
    require_dims(grid, &[3], name)?;
    let f = Fields::new(grid)?;
    let t = f.t();
    nu1.require(&f.s0, "nu1", Sign::Positive)?;
    kappa.require(&f.s1, "kappa", Sign::Positive)?;
    nu2.require(&f.s1, "nu2", Sign::Positive)?;
    stiffness.require(t, "stiffness", Sign::Positive)?;
    let c_inv = stiffness.inverse_on(t)?;
    let g = thermal_coupling(gamma, &f)?;
    let c_inv_g = c_inv.compose(&g)?;
    let g_c_inv = c_inv_g.adjoint();

    let heat_parts = [&f.s0, &f.s1];
    let heat = MaterialLaw::new(
        MatrixOperator::from_blocks(
            &heat_parts,
            &heat_parts,
            &[(0, 0, &nu1.on(&f.s0)?.add(&g_c_inv.compose(&g)?)?)],
        )?,
        MatrixOperator::from_blocks(
            &heat_parts,
            &heat_parts,
            &[(1, 1, &kappa.inverse_on(&f.s1)?)],
        )?,
    )?;
    let elastic_parts = [&f.s1, t];
    let elastic_space = SpaceTag::direct_sum(&elastic_parts)?;
    let elastic = MaterialLaw::new(
        MatrixOperator::from_blocks(
            &elastic_parts,
            &elastic_parts,
            &[(0, 0, &nu2.on(&f.s1)?), (1, 1, &c_inv)],
        )?,
        MatrixOperator::zeros(&elastic_space, &elastic_space),
    )?;
    let mut off = BTreeMap::new();
    off.insert(
        (0, 1),
        OffBlock {
            m0: Some(MatrixOperator::from_blocks(
                &heat_parts,
                &elastic_parts,
                &[(0, 1, &g_c_inv)],
            )?),
            m1: None,
        },
    );
    off.insert(
        (1, 0),
        OffBlock {
            m0: Some(MatrixOperator::from_blocks(
                &elastic_parts,
                &heat_parts,
                &[(1, 0, &c_inv_g)],
            )?),
            m1: None,
        },
    );
    let law = couple(&[&heat, &elastic], &off)?;

    let parts = f.parts4();
    let state = state_tag(name, grid, &parts)?;
    let m0 = law.m0.retagged(state.clone(), state.clone())?;
    let m1 = law.m1.retagged(state.clone(), state.clone())?;
    let classical = f.coupled_classical(&state)?;
    finish(
        name,
        f.coupled_pattern()?,
        state,
        blocks_of(&["eta", "zeta", "s", "T"], &parts),
        (m0, m1),
        Some(classical),
    )
}

fn plate_pattern(name: &str, grid: &Grid, p: &PlateParams) -> Result<CatalogEntry> {
    let f = Fields::new(grid)?;
    let t = f.t();
    p.nu1.require(&f.s0, "nu1", Sign::Positive)?;
    p.kappa.require(&f.s1, "kappa", Sign::Positive)?;
    p.nu2.require(&f.s1, "nu2", Sign::Positive)?;
    p.stiffness.require(t, "stiffness", Sign::Positive)?;
    p.d.require(&f.s0, "d", Sign::NonNegative)?;
    let parts = f.parts4();
    let state = state_tag(name, grid, &parts)?;
    let m0 = block_op(
        &state,
        &parts,
        &[
            (0, 0, &p.nu1.on(&f.s0)?),
            (1, 1, &p.kappa.on(&f.s1)?),
            (2, 2, &p.nu2.on(&f.s1)?),
            (3, 3, &p.stiffness.inverse_on(t)?),
        ],
    )?;
    let id = MatrixOperator::identity(&f.s1);
    let m1 = block_op(
        &state,
        &parts,
        &[(0, 0, &p.d.on(&f.s0)?), (1, 2, &id.neg()), (2, 1, &id)],
    )?;
    let classical = f.coupled_classical(&state)?;
    finish(
        name,
        f.coupled_pattern()?,
        state,
        blocks_of(&["eta", "zeta", "s", "T"], &parts),
        (m0, m1),
        Some(classical),
    )
}

/// Reissner–Mindlin plate on a 2D grid; the shear coupling sits in `M1`.
pub fn reissner_mindlin(grid: &Grid, params: &PlateParams) -> Result<CatalogEntry> {
    require_dims(grid, &[2], "reissner_mindlin")?;
    plate_pattern("reissner_mindlin", grid, params)
}

/// Timoshenko beam: the Reissner–Mindlin pattern on a 1D grid.
pub fn timoshenko(grid: &Grid, params: &PlateParams) -> Result<CatalogEntry> {
    require_dims(grid, &[1], "timoshenko")?;
    plate_pattern("timoshenko", grid, params)
}

fn limit_pattern(
    name: &str,
    grid: &Grid,
    nu1: &Coef,
    stiffness: &Coef,
    d: &Coef,
) -> Result<CatalogEntry> {
    let f = Fields::new(grid)?;
    let t = f.t();
    nu1.require(&f.s0, "nu1", Sign::Positive)?;
    stiffness.require(t, "stiffness", Sign::Positive)?;
    d.require(&f.s0, "d", Sign::NonNegative)?;
    let derivation = Derivation::from_source(Source::ComposeLower {
        inner: Box::new(f.scalar_vector()?),
        inner_split: f.s0.dim(),
        outer: Box::new(f.vector_stress()?),
        outer_split: f.s1.dim(),
    });
    let parts = [&f.s0, t];
    let state = state_tag(name, grid, &parts)?;
    let m0 = block_op(
        &state,
        &parts,
        &[(0, 0, &nu1.on(&f.s0)?), (1, 1, &stiffness.inverse_on(t)?)],
    )?;
    let m1 = block_op(&state, &parts, &[(0, 0, &d.on(&f.s0)?)])?;
    let lower = sym_grad_stencil(grid, &f.s1, t)?.compose(&grad_stencil(grid, &f.s0, &f.s1)?)?;
    let classical = block_op(
        &state,
        &parts,
        &[(0, 1, &lower.adjoint().neg()), (1, 0, &lower)],
    )?;
    finish(
        name,
        derivation,
        state,
        blocks_of(&["eta", "T"], &parts),
        (m0, m1),
        Some(classical),
    )
}

/// Kirchhoff–Love plate `∂₀ diag(ν₁, C⁻¹) + diag(d, 0) + [[0, -div Div], [Grad̊ grad̊, 0]]`.
pub fn kirchhoff_love(grid: &Grid, nu1: &Coef, stiffness: &Coef, d: &Coef) -> Result<CatalogEntry> {
    require_dims(grid, &[2], "kirchhoff_love")?;
    limit_pattern("kirchhoff_love", grid, nu1, stiffness, d)
}

/// Euler–Bernoulli beam: the Kirchhoff–Love pattern on a 1D grid.
pub fn euler_bernoulli(
    grid: &Grid,
    nu1: &Coef,
    stiffness: &Coef,
    d: &Coef,
) -> Result<CatalogEntry> {
    require_dims(grid, &[1], "euler_bernoulli")?;
    limit_pattern("euler_bernoulli", grid, nu1, stiffness, d)
}

fn block_vec(u: &DVector<f64>, r: &std::ops::Range<usize>) -> DVector<f64> {
    u.rows(r.start, r.len()).into_owned()
}

/// Solves a plate or beam entry with implicit Euler from rest under a
/// smooth load, eliminates the `ζ` and `T` rows and measures the residual
/// of the second-order form
///
/// `ν₁ ∂₀²η̃ − div κ⁻¹(grad̊ η̃ + s̃) + d ∂₀η̃ = f`,
/// `ν₂ ∂₀²s̃ − Div C Grad̊ s̃ + κ⁻¹(grad̊ η̃ + s̃) = g`,
///
/// with `∂₀⁻¹` the running sum `τ Σ u_k` and `∂₀` the backward difference,
/// relative to the largest term.
pub fn verify_second_order(entry: &CatalogEntry, tau: f64, steps: usize) -> Result<Check> {
    if entry.name != "reissner_mindlin" && entry.name != "timoshenko" {
        return Err(OpError::InvalidArgument(format!(
            "second-order form is defined for plate and beam entries, not {}",
            entry.name
        )));
    }
    let blk = |l: &str| entry.block(l).expect("plate blocks");
    let (re, rs) = (blk("eta"), blk("s"));
    let a = &entry.problem.a;
    let law = &entry.problem.law;
    let sub = |op: &MatrixOperator, r: &str, c: &str| entry.sub_block(op, r, c);
    let grad = sub(a, "zeta", "eta")?.neg();
    let div = sub(a, "eta", "zeta")?.neg();
    let sgrad = sub(a, "T", "s")?.neg();
    let sdiv = sub(a, "s", "T")?.neg();
    let nu1 = sub(&law.m0, "eta", "eta")?;
    let nu2 = sub(&law.m0, "s", "s")?;
    let d = sub(&law.m1, "eta", "eta")?;
    let kappa = DenseLu::new(sub(&law.m0, "zeta", "zeta")?.to_dense(), "kappa")?;
    let c_inv = DenseLu::new(sub(&law.m0, "T", "T")?.to_dense(), "C⁻¹")?;

    let n = entry.space().dim();
    let mut profile = DVector::zeros(n);
    for i in re.clone() {
        profile[i] = (0.37 * i as f64).sin();
    }
    for i in rs.clone() {
        profile[i] = (0.37 * i as f64 + 1.3).sin();
    }
    let load = profile.clone();
    let forcing = Forcing::from_fn(move |t| &load * (t * (1.0 - t)).max(0.0));
    let problem = entry.problem.clone().with_forcing(forcing.clone());
    let traj = solve(
        &problem,
        &SolverConfig::new(tau, tau * steps as f64, Scheme::ImplicitEuler),
    )?;

    // running integrals η̃, s̃ and their backward differences
    let mut tilde = vec![DVector::zeros(n)];
    for u in &traj.states[1..] {
        let last = tilde.last().expect("nonempty");
        tilde.push(last + u * tau);
    }
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for k in 2..tilde.len() {
        let (t0, t1, t2) = (&tilde[k], &tilde[k - 1], &tilde[k - 2]);
        let eta = block_vec(t0, &re);
        let s = block_vec(t0, &rs);
        let d1 = |r: &std::ops::Range<usize>| (block_vec(t0, r) - block_vec(t1, r)) / tau;
        let d2 = |r: &std::ops::Range<usize>| {
            (block_vec(t0, r) - block_vec(t1, r) * 2.0 + block_vec(t2, r)) / (tau * tau)
        };
        let shear = kappa.solve(&(grad.apply(&eta)? + &s));
        let moment = c_inv.solve(&sgrad.apply(&s)?);
        let f = forcing.eval(traj.times[k], n);
        let terms1 = [
            nu1.apply(&d2(&re))?,
            -div.apply(&shear)?,
            d.apply(&d1(&re))?,
        ];
        let terms2 = [nu2.apply(&d2(&rs))?, -sdiv.apply(&moment)?, shear.clone()];
        let r1 = terms1.iter().fold(-block_vec(&f, &re), |acc, t| acc + t);
        let r2 = terms2.iter().fold(-block_vec(&f, &rs), |acc, t| acc + t);
        worst = worst.max(r1.amax()).max(r2.amax());
        scale = terms1
            .iter()
            .chain(&terms2)
            .fold(scale, |m, t| m.max(t.amax()));
    }
    Ok(Check::new(
        format!("{} second-order form", entry.name),
        worst / scale.max(f64::MIN_POSITIVE),
        1e-8,
    ))
}

/// Reissner–Mindlin on `Ω₁ × T` (`nx` Dirichlet points, `ny` torus points)
/// with torus-constant initial data, averaged over the torus, against
/// Timoshenko on `Ω₁`; Crank–Nicolson, `steps` steps.
pub fn verify_dimension_reduction(
    nx: usize,
    ny: usize,
    steps: usize,
) -> Result<VerificationReport> {
    let h = 1.0 / (nx as f64 + 1.0);
    let line = Axis::dirichlet(nx, h)?;
    let plate_grid = Grid::new(vec![line, Axis::torus(ny)?])?;
    let beam_grid = Grid::new(vec![line])?;
    let params = PlateParams {
        nu1: Coef::Scalar(1.0),
        nu2: Coef::Scalar(0.5),
        kappa: Coef::Scalar(2.0),
        stiffness: Coef::Scalar(1.5),
        d: Coef::Scalar(0.0),
    };
    let plate = reissner_mindlin(&plate_grid, &params)?;
    let beam = timoshenko(&beam_grid, &params)?;
    let red = torus_reduction_map(&plate_grid, &plate, &beam)?;

    let x: Vec<f64> = (0..nx).map(|i| line.coord(i)).collect();
    let mut u0 = DVector::zeros(beam.space().dim());
    let bump = |c: f64, w: f64| x.iter().map(move |xi| (-((xi - c) / w).powi(2)).exp());
    for (b, (c, w)) in
        ["eta", "zeta", "s", "T"]
            .iter()
            .zip([(0.4, 0.1), (0.5, 0.15), (0.6, 0.1), (0.45, 0.2)])
    {
        let r = beam.block(b).expect("beam blocks");
        for (i, v) in r.zip(bump(c, w)) {
            u0[i] = v;
        }
    }
    let lifted = red.embedding().apply(&u0)?;
    let tau = 0.5 * h;
    let config = SolverConfig::new(tau, tau * steps as f64, Scheme::CrankNicolson);
    let beam_traj = solve(&beam.problem.clone().with_initial(u0)?, &config)?;
    let plate_traj = solve(&plate.problem.clone().with_initial(lifted)?, &config)?;
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (b, p) in beam_traj.states.iter().zip(&plate_traj.states) {
        diff = diff.max((red.pi().apply(p)? - b).amax());
        scale = scale.max(b.amax());
    }
    let mut report = VerificationReport::default();
    report.push(Check::new(
        "torus-averaged plate = beam",
        diff / scale,
        1e-10,
    ));
    report.push(Check::new(
        "torus embedding isometry",
        red.isometry_defect(),
        1e-13,
    ));
    Ok(report)
}

/// Block-wise average over the torus axis of a plate grid `Ω₁ × T`, from
/// the Reissner–Mindlin state onto the Timoshenko state on `Ω₁`.
pub fn torus_reduction_map(
    grid: &Grid,
    plate: &CatalogEntry,
    beam: &CatalogEntry,
) -> Result<ProjectionPair> {
    if grid.dim() != 2 || !grid.axis(1).is_unit_torus() {
        return Err(OpError::InvalidArgument(
            "plate grid must be Ω₁ × T with the torus as second axis".into(),
        ));
    }
    let ms = MotherSpace::new(grid.clone(), 2)?;
    let (avg0, _) = torus_average(&ms.rank_space(0), &[1])?;
    let (avg1, _) = torus_average(&ms.rank_space(1), &[1])?;
    let (avg2, reduced2) = torus_average(&ms.rank_space(2), &[1])?;
    let sym2 = sym_projection(&ms.rank_space(2))?;
    let sym1 = sym_projection(&reduced2)?;
    let avg_t = sym1.pi().compose(avg2.pi())?.compose(sym2.embedding())?;
    let pi = MatrixOperator::block_diag(&[avg0.pi(), avg1.pi(), avg1.pi(), &avg_t])?
        .retagged(plate.space().clone(), beam.space().clone())?;
    ProjectionPair::new(pi)
}
