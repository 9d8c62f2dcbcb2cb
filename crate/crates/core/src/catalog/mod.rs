//! Named descendants of the mother operator.
//!
//! Every entry records how its spatial operator is obtained from
//! [`build_mother_a`]: a [`Derivation`] is a source operator followed by a
//! chain of maps `B`, each acting as `A ↦ B A B*`. Projections give
//! descendants, bijections give relatives. Entries also carry a classical
//! form assembled directly from 1D stencils, so the two constructions can be
//! compared.

mod acoustic;
mod electro;
mod solid;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::error::{OpError, Result};
use crate::evolve::{EvolutionaryProblem, Forcing};
use crate::flatgrid::{build_mother_a, Axis, Bc, Grid, MotherSpace};
use crate::linops::{
    from_orthonormal_entries, make_block_skew, orthonormal_entries, sym_eigen, DenseLu,
    MatrixOperator, SpaceTag,
};
use crate::matlaw::MaterialLaw;
use crate::subspaces::ProjectionPair;

pub use acoustic::{
    acoustics, heat, polar_decompose, relativistic_schrodinger, second_order_wave_relative,
    transport, transport_descendant, transport_law, verify_polar, verify_transport_equivalence,
};
pub use electro::{
    assembled_curl, dirac, dirac_w, extended_maxwell, maxwell, reduced_extended_maxwell,
    verify_annihilation, verify_curl_against, verify_curl_identification, verify_dirac_equivalence,
    verify_dirac_spectra, verify_maxwell_restriction, DiracStencil, PauliSet,
};
pub use solid::{
    elasticity, euler_bernoulli, kirchhoff_love, reissner_mindlin, thermo_elasticity, timoshenko,
    torus_reduction_map, verify_dimension_reduction, verify_second_order, PlateParams,
};

/// A material coefficient acting on one block of the state.
#[derive(Clone, Debug)]
pub enum Coef {
    /// A multiple of the identity.
    Scalar(f64),
    /// One value per coordinate of the block.
    Diagonal(Vec<f64>),
    /// A general operator; its tags are replaced by the block's.
    Operator(MatrixOperator),
}

impl From<f64> for Coef {
    fn from(c: f64) -> Self {
        Coef::Scalar(c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Sign {
    Positive,
    NonNegative,
}

impl Coef {
    /// The coefficient as an operator on `space`.
    pub fn on(&self, space: &SpaceTag) -> Result<MatrixOperator> {
        match self {
            Coef::Scalar(c) => MatrixOperator::diagonal(space, &vec![*c; space.dim()]),
            Coef::Diagonal(d) => {
                if d.len() != space.dim() {
                    return Err(OpError::Shape(format!(
                        "diagonal coefficient has {} values, block {} needs {}",
                        d.len(),
                        space,
                        space.dim()
                    )));
                }
                MatrixOperator::diagonal(space, d)
            }
            Coef::Operator(op) => op.retagged(space.clone(), space.clone()),
        }
    }

    /// `c^p` on `space` for a selfadjoint nonnegative coefficient.
    pub fn power_on(&self, space: &SpaceTag, p: f64) -> Result<MatrixOperator> {
        match self {
            Coef::Scalar(c) => Coef::Scalar(c.powf(p)).on(space),
            Coef::Diagonal(d) => Coef::Diagonal(d.iter().map(|v| v.powf(p)).collect()).on(space),
            Coef::Operator(_) => spectral_map(&self.on(space)?, |v| v.max(0.0).powf(p)),
        }
    }

    pub fn inverse_on(&self, space: &SpaceTag) -> Result<MatrixOperator> {
        match self {
            Coef::Operator(_) => {
                let op = self.on(space)?;
                let lu = DenseLu::new(op.to_dense(), "coefficient")?;
                let inv = lu.solve_mat(&DMatrix::identity(op.nrows(), op.ncols()));
                MatrixOperator::from_dense(inv, space.clone(), space.clone())
            }
            _ => self.power_on(space, -1.0),
        }
    }

    pub(crate) fn require(&self, space: &SpaceTag, what: &str, sign: Sign) -> Result<()> {
        let ok = |v: f64| match sign {
            Sign::Positive => v > 0.0,
            Sign::NonNegative => v >= 0.0,
        };
        let kind = match sign {
            Sign::Positive => "positive definite",
            Sign::NonNegative => "nonnegative",
        };
        let bad = || {
            OpError::NotWellPosed(format!(
                "coefficient `{what}` must be selfadjoint and {kind}"
            ))
        };
        match self {
            Coef::Scalar(c) => {
                if !(c.is_finite() && ok(*c)) {
                    return Err(bad());
                }
            }
            Coef::Diagonal(d) => {
                self.on(space)?;
                if !d.iter().all(|v| v.is_finite() && ok(*v)) {
                    return Err(bad());
                }
            }
            Coef::Operator(_) => {
                let m = orthonormal_entries(&self.on(space)?);
                let scale = m.amax().max(f64::MIN_POSITIVE);
                if !m.iter().all(|v| v.is_finite()) || (&m - m.transpose()).amax() > 1e-12 * scale {
                    return Err(bad());
                }
                let low = sym_eigen(&m).0.iter().fold(f64::INFINITY, |a, v| a.min(*v));
                let pass = match sign {
                    Sign::Positive => low > 1e-12 * scale,
                    Sign::NonNegative => low >= -1e-12 * scale,
                };
                if !pass {
                    return Err(bad());
                }
            }
        }
        Ok(())
    }
}

/// Named coefficients of a catalog entry.
pub type Params = BTreeMap<String, Coef>;

/// `f(T)` for a selfadjoint `T`, through its eigendecomposition in
/// orthonormal coordinates.
pub(crate) fn spectral_map(op: &MatrixOperator, f: impl Fn(f64) -> f64) -> Result<MatrixOperator> {
    let m = orthonormal_entries(op);
    let (vals, vecs) = sym_eigen(&m);
    let d = DVector::from_iterator(vals.len(), vals.iter().map(|v| f(*v)));
    let r = &vecs * DMatrix::from_diagonal(&d) * vecs.transpose();
    from_orthonormal_entries(
        (&r + r.transpose()) * 0.5,
        op.domain().clone(),
        op.codomain().clone(),
    )
}

/// One map of a derivation chain, applied as `A ↦ B A B*`.
#[derive(Clone, Debug)]
pub struct Step {
    pub label: String,
    pub reference: String,
    pub map: MatrixOperator,
}

/// Where a derivation chain starts.
#[derive(Clone, Debug)]
pub enum Source {
    Mother(MotherSpace),
    /// Sum of derivations ending in the same space.
    Sum(Vec<Derivation>),
    /// Block diagonal operator of independent derivations.
    DirectSum(Vec<Derivation>),
    /// `[[0, -(C2 C1)*], [C2 C1, 0]]` from the lower blocks `C1` of `inner`
    /// and `C2` of `outer`; each split is the dimension of the first half.
    ComposeLower {
        inner: Box<Derivation>,
        inner_split: usize,
        outer: Box<Derivation>,
        outer_split: usize,
    },
}

#[derive(Clone, Debug)]
pub struct Derivation {
    pub source: Source,
    pub steps: Vec<Step>,
}

impl Derivation {
    pub fn mother(ms: MotherSpace) -> Self {
        Self::from_source(Source::Mother(ms))
    }

    pub fn from_source(source: Source) -> Self {
        Self {
            source,
            steps: Vec::new(),
        }
    }

    pub fn then(
        mut self,
        label: impl Into<String>,
        reference: impl Into<String>,
        map: MatrixOperator,
    ) -> Self {
        self.steps.push(Step {
            label: label.into(),
            reference: reference.into(),
            map,
        });
        self
    }

    pub fn then_projection(
        self,
        label: impl Into<String>,
        reference: impl Into<String>,
        p: &ProjectionPair,
    ) -> Self {
        self.then(label, reference, p.pi().clone())
    }

    /// The operator at the end of the chain.
    pub fn evaluate(&self) -> Result<MatrixOperator> {
        let mut a = match &self.source {
            Source::Mother(ms) => build_mother_a(ms).into_a(),
            Source::Sum(parts) => {
                let mut it = parts.iter();
                let first = it
                    .next()
                    .ok_or_else(|| OpError::InvalidArgument("empty sum of derivations".into()))?;
                let mut acc = first.evaluate()?;
                for p in it {
                    acc = acc.add(&p.evaluate()?)?;
                }
                acc
            }
            Source::DirectSum(parts) => {
                let ops = parts
                    .iter()
                    .map(|p| p.evaluate())
                    .collect::<Result<Vec<_>>>()?;
                MatrixOperator::block_diag(&ops.iter().collect::<Vec<_>>())?
            }
            Source::ComposeLower {
                inner,
                inner_split,
                outer,
                outer_split,
            } => {
                let c1 = lower_block(&inner.evaluate()?, *inner_split)?;
                let c2 = lower_block(&outer.evaluate()?, *outer_split)?;
                if c1.codomain().weights() != c2.domain().weights() {
                    return Err(OpError::Shape(
                        "lower blocks of a composition do not chain".into(),
                    ));
                }
                let c1 = c1.retagged(c1.domain().clone(), c2.domain().clone())?;
                make_block_skew(&c2.compose(&c1)?).into_a()
            }
        };
        for step in &self.steps {
            a = step.map.compose(&a)?.compose(&step.map.adjoint())?;
        }
        Ok(a)
    }

    /// `(label, reference)` pairs, sources first, nested parts indented.
    pub fn provenance(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        self.collect_provenance("", &mut out);
        out
    }

    fn collect_provenance(&self, indent: &str, out: &mut Vec<(String, String)>) {
        let deeper = format!("{indent}  ");
        match &self.source {
            Source::Mother(ms) => out.push((
                format!(
                    "{indent}mother operator, ranks 0..={} on {}",
                    ms.k_max,
                    ms.grid.label()
                ),
                "A = [[0, -∇̊*], [∇̊, 0]] on the full tensor-field space".into(),
            )),
            Source::Sum(parts) | Source::DirectSum(parts) => {
                let what = if matches!(self.source, Source::Sum(_)) {
                    "sum"
                } else {
                    "direct sum"
                };
                out.push((
                    format!("{indent}{what} of {} derivations", parts.len()),
                    String::new(),
                ));
                for p in parts {
                    p.collect_provenance(&deeper, out);
                }
            }
            Source::ComposeLower { inner, outer, .. } => {
                out.push((
                    format!("{indent}composition of lower blocks, outer ∘ inner"),
                    "block skew operator of a composite".into(),
                ));
                inner.collect_provenance(&deeper, out);
                outer.collect_provenance(&deeper, out);
            }
        }
        out.extend(
            self.steps
                .iter()
                .map(|s| (format!("{indent}{}", s.label), s.reference.clone())),
        );
    }
}

fn lower_block(a: &MatrixOperator, split: usize) -> Result<MatrixOperator> {
    let n = a.nrows();
    if split == 0 || split >= n {
        return Err(OpError::InvalidArgument(format!(
            "split {split} does not divide a {n}-dimensional space"
        )));
    }
    let w = a.domain().weights();
    let dom = SpaceTag::new(
        format!("{}[..{split}]", a.domain().name()),
        w[..split].to_vec(),
    )?;
    let cod = SpaceTag::new(
        format!("{}[{split}..]", a.domain().name()),
        w[split..].to_vec(),
    )?;
    a.block(split..n, 0..split, dom, cod)
}

/// A labelled block of the state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub label: String,
    pub range: Range<usize>,
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: String,
    pub problem: EvolutionaryProblem,
    pub derivation: Derivation,
    /// The spatial operator assembled directly from 1D stencils.
    pub classical_form: Option<MatrixOperator>,
    pub blocks: Vec<Block>,
}

impl CatalogEntry {
    pub fn provenance(&self) -> Vec<(String, String)> {
        self.derivation.provenance()
    }

    /// `max |derivation(mother) - A|`.
    pub fn derivation_residual(&self) -> Result<f64> {
        self.derivation.evaluate()?.max_abs_diff(&self.problem.a)
    }

    /// `max |classical - A|`, if a classical form is recorded.
    pub fn classical_residual(&self) -> Result<Option<f64>> {
        self.classical_form
            .as_ref()
            .map(|c| c.max_abs_diff(&self.problem.a))
            .transpose()
    }

    pub fn block(&self, label: &str) -> Option<Range<usize>> {
        self.blocks
            .iter()
            .find(|b| b.label == label)
            .map(|b| b.range.clone())
    }

    pub fn space(&self) -> &SpaceTag {
        self.problem.space()
    }

    /// Block `(row, col)` of `op`, tagged with sub-spaces of the state.
    pub fn sub_block(&self, op: &MatrixOperator, row: &str, col: &str) -> Result<MatrixOperator> {
        let find = |l: &str| {
            self.block(l).ok_or_else(|| {
                OpError::InvalidArgument(format!("{} has no block `{l}`", self.name))
            })
        };
        let (r, c) = (find(row)?, find(col)?);
        let w = self.space().weights();
        let dom = SpaceTag::new(format!("{}.{col}", self.name), w[c.clone()].to_vec())?;
        let cod = SpaceTag::new(format!("{}.{row}", self.name), w[r.clone()].to_vec())?;
        op.block(r, c, dom, cod)
    }
}

/// Outcome of one numerical identity check.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tol: f64,
}

impl Check {
    pub fn new(name: impl Into<String>, residual: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            residual,
            tol,
        }
    }

    /// False for NaN residuals.
    pub fn passed(&self) -> bool {
        self.residual <= self.tol
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{verdict} {} (residual {:.3e}, tol {:.1e})",
            self.name, self.residual, self.tol
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(Check::passed)
    }

    pub fn worst(&self) -> Option<&Check> {
        self.checks
            .iter()
            .max_by(|a, b| (a.residual / a.tol).total_cmp(&(b.residual / b.tol)))
    }
}

/// `max |a - b| / max(1, max |b|)` for equally shaped matrices.
pub(crate) fn rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / b.amax().max(1.0)
}

// ---- assembly helpers shared by the families ----

/// Direct sum of the block tags, renamed after the entry.
pub(crate) fn state_tag(name: &str, grid: &Grid, parts: &[&SpaceTag]) -> Result<SpaceTag> {
    Ok(SpaceTag::direct_sum(parts)?.renamed(format!("{name}[{}]", grid.label())))
}

pub(crate) fn blocks_of(labels: &[&str], parts: &[&SpaceTag]) -> Vec<Block> {
    let mut start = 0;
    labels
        .iter()
        .zip(parts)
        .map(|(l, s)| {
            let b = Block {
                label: l.to_string(),
                range: start..start + s.dim(),
            };
            start += s.dim();
            b
        })
        .collect()
}

/// Block operator on `parts`, retagged onto `state`.
pub(crate) fn block_op(
    state: &SpaceTag,
    parts: &[&SpaceTag],
    entries: &[(usize, usize, &MatrixOperator)],
) -> Result<MatrixOperator> {
    MatrixOperator::from_blocks(parts, parts, entries)?.retagged(state.clone(), state.clone())
}

/// Reorders consecutive blocks of `from`: output block `k` is input block
/// `order[k]`. The result maps into a fresh tag named `name`.
pub(crate) fn permutation(
    from: &SpaceTag,
    sizes: &[usize],
    order: &[usize],
    to: Option<SpaceTag>,
) -> Result<MatrixOperator> {
    if sizes.iter().sum::<usize>() != from.dim() || order.len() != sizes.len() {
        return Err(OpError::Shape(
            "permutation blocks do not cover the space".into(),
        ));
    }
    let starts: Vec<usize> = sizes
        .iter()
        .scan(0, |acc, s| {
            let o = *acc;
            *acc += s;
            Some(o)
        })
        .collect();
    let mut t = Vec::with_capacity(from.dim());
    let mut weights = Vec::with_capacity(from.dim());
    let mut row = 0;
    for &b in order {
        for j in starts[b]..starts[b] + sizes[b] {
            t.push((row, j, 1.0));
            weights.push(from.weight(j));
            row += 1;
        }
    }
    let to = match to {
        Some(to) => to,
        None => SpaceTag::new(format!("permuted {}", from.name()), weights)?,
    };
    MatrixOperator::from_triplets(t, from.clone(), to)
}

/// Operator assembled from scalar `points × points` blocks: entry
/// `(r, c, s, op)` places `s · op` at component row `r`, column `c`.
pub(crate) fn scalar_blocks(
    points: usize,
    entries: &[(usize, usize, f64, &MatrixOperator)],
    domain: SpaceTag,
    codomain: SpaceTag,
) -> Result<MatrixOperator> {
    let mut t = Vec::new();
    for &(r, c, s, op) in entries {
        if op.nrows() != points || op.ncols() != points {
            return Err(OpError::Shape(format!(
                "scalar block must be {points}x{points}"
            )));
        }
        t.extend(
            op.triplets()
                .into_iter()
                .map(|(i, j, v)| (r * points + i, c * points + j, s * v)),
        );
    }
    MatrixOperator::from_triplets(t, domain, codomain)
}

/// Diagonal map scaling consecutive blocks by the given factors.
pub(crate) fn block_scaling(
    space: &SpaceTag,
    sizes: &[usize],
    factors: &[f64],
) -> Result<MatrixOperator> {
    let d: Vec<f64> = sizes
        .iter()
        .zip(factors)
        .flat_map(|(s, f)| std::iter::repeat_n(*f, *s))
        .collect();
    MatrixOperator::diagonal(space, &d)
}

pub(crate) fn require_dims(grid: &Grid, dims: &[usize], what: &str) -> Result<()> {
    if dims.contains(&grid.dim()) {
        Ok(())
    } else {
        Err(OpError::InvalidArgument(format!(
            "{what} needs a grid of dimension {dims:?}, got {}",
            grid.dim()
        )))
    }
}

pub(crate) fn finish(
    name: &str,
    derivation: Derivation,
    state: SpaceTag,
    blocks: Vec<Block>,
    law: (MatrixOperator, MatrixOperator),
    classical: Option<MatrixOperator>,
) -> Result<CatalogEntry> {
    let a = derivation
        .evaluate()?
        .retagged(state.clone(), state.clone())?;
    let law = MaterialLaw::new(law.0, law.1)?;
    let n = state.dim();
    let problem = EvolutionaryProblem::new(law, a, Forcing::zero(), DVector::zeros(n))?;
    let classical_form = classical
        .map(|c| c.retagged(state.clone(), state.clone()))
        .transpose()?;
    Ok(CatalogEntry {
        name: name.to_string(),
        problem,
        derivation,
        classical_form,
        blocks,
    })
}

// ---- registry ----

/// A catalog entry as seen by front ends: parameter names, admissible grid
/// dimensions and small default instances.
pub struct Registration {
    pub name: &'static str,
    pub summary: &'static str,
    pub params: &'static [&'static str],
    pub grid_dims: &'static [usize],
    build: fn(&Grid, &Params) -> Result<CatalogEntry>,
    default_grid: fn() -> Grid,
    defaults: &'static [(&'static str, f64)],
}

impl fmt::Debug for Registration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Registration")
            .field("name", &self.name)
            .finish()
    }
}

impl Registration {
    /// Builds the entry; every listed parameter must be present and no
    /// other names are accepted.
    pub fn build(&self, grid: &Grid, params: &Params) -> Result<CatalogEntry> {
        require_dims(grid, self.grid_dims, self.name)?;
        if let Some(missing) = self.params.iter().find(|p| !params.contains_key(**p)) {
            return Err(OpError::InvalidArgument(format!(
                "{} needs parameter `{missing}`",
                self.name
            )));
        }
        if let Some(extra) = params.keys().find(|k| !self.params.contains(&k.as_str())) {
            return Err(OpError::InvalidArgument(format!(
                "{} has no parameter `{extra}` (expected {:?})",
                self.name, self.params
            )));
        }
        (self.build)(grid, params)
    }

    pub fn default_grid(&self) -> Grid {
        (self.default_grid)()
    }

    pub fn default_params(&self) -> Params {
        self.defaults
            .iter()
            .map(|(k, v)| (k.to_string(), Coef::Scalar(*v)))
            .collect()
    }

    pub fn build_default(&self) -> Result<CatalogEntry> {
        self.build(&self.default_grid(), &self.default_params())
    }
}

fn param<'a>(params: &'a Params, key: &str) -> Result<&'a Coef> {
    params
        .get(key)
        .ok_or_else(|| OpError::InvalidArgument(format!("missing parameter `{key}`")))
}

fn cube(dim: usize, n: usize, bc: Bc) -> Grid {
    Grid::cube(dim, n, 1.0 / n as f64, bc).expect("valid default grid")
}

fn plate_params(p: &Params) -> Result<PlateParams> {
    Ok(PlateParams {
        nu1: param(p, "nu1")?.clone(),
        nu2: param(p, "nu2")?.clone(),
        kappa: param(p, "kappa")?.clone(),
        stiffness: param(p, "stiffness")?.clone(),
        d: param(p, "d")?.clone(),
    })
}

static REGISTRY: [Registration; 14] = [
    Registration {
        name: "acoustics",
        summary: "pressure/velocity waves, optional damping of the velocity",
        params: &["rho", "kappa", "sigma"],
        grid_dims: &[1, 2, 3],
        build: |g, p| acoustics(g, param(p, "rho")?, param(p, "kappa")?, param(p, "sigma")?),
        default_grid: || cube(2, 6, Bc::Dirichlet),
        defaults: &[("rho", 1.0), ("kappa", 1.0), ("sigma", 0.0)],
    },
    Registration {
        name: "heat",
        summary: "heat conduction with Fourier's law (acoustics with kappa = 0)",
        params: &["rho", "sigma"],
        grid_dims: &[1, 2, 3],
        build: |g, p| heat(g, param(p, "rho")?, param(p, "sigma")?),
        default_grid: || cube(2, 6, Bc::Dirichlet),
        defaults: &[("rho", 1.0), ("sigma", 1.0)],
    },
    Registration {
        name: "relativistic_schrodinger",
        summary: "real form of ∂₀ + i|grad̊|, a relative of acoustics through polar decomposition",
        params: &[],
        grid_dims: &[1, 2, 3],
        build: |g, _| relativistic_schrodinger(g),
        default_grid: || cube(1, 8, Bc::Dirichlet),
        defaults: &[],
    },
    Registration {
        name: "elasticity",
        summary: "elastic waves, velocity and symmetric stress",
        params: &["rho", "stiffness"],
        grid_dims: &[2, 3],
        build: |g, p| elasticity(g, param(p, "rho")?, param(p, "stiffness")?),
        default_grid: || cube(3, 3, Bc::Periodic),
        defaults: &[("rho", 1.0), ("stiffness", 1.0)],
    },
    Registration {
        name: "maxwell",
        summary: "electromagnetic waves with conductivity",
        params: &["epsilon", "mu", "sigma"],
        grid_dims: &[3],
        build: |g, p| maxwell(g, param(p, "epsilon")?, param(p, "mu")?, param(p, "sigma")?),
        default_grid: || cube(3, 4, Bc::Periodic),
        defaults: &[("epsilon", 1.0), ("mu", 1.0), ("sigma", 0.0)],
    },
    Registration {
        name: "extended_maxwell",
        summary: "Maxwell system extended by scalar fields of order 0 and 3",
        params: &["m0"],
        grid_dims: &[3],
        build: |g, p| extended_maxwell(g, param(p, "m0")?),
        default_grid: || cube(3, 4, Bc::Periodic),
        defaults: &[("m0", 1.0)],
    },
    Registration {
        name: "reduced_extended_maxwell",
        summary: "extended Maxwell system without the order-0 scalar field",
        params: &["m0"],
        grid_dims: &[3],
        build: |g, p| reduced_extended_maxwell(g, param(p, "m0")?),
        default_grid: || cube(3, 4, Bc::Periodic),
        defaults: &[("m0", 1.0)],
    },
    Registration {
        name: "dirac",
        summary: "free Dirac operator in Hamiltonian form, unitarily equivalent to extended Maxwell with a chiral law",
        params: &[],
        grid_dims: &[3],
        build: |g, _| dirac(g),
        default_grid: || cube(3, 4, Bc::Periodic),
        defaults: &[],
    },
    Registration {
        name: "transport",
        summary: "one-way transport from the even/odd split of a symmetric 1D wave system",
        params: &["m00", "m11"],
        grid_dims: &[1],
        build: |g, p| {
            let law = transport_law(g, param(p, "m00")?, param(p, "m11")?)?;
            transport(g, &law)
        },
        default_grid: || Grid::new(vec![Axis::symmetric(16, 0.125).expect("valid axis")]).expect("one axis"),
        defaults: &[("m00", 1.0), ("m11", 1.0)],
    },
    Registration {
        name: "thermo_elasticity",
        summary: "coupled heat conduction and elasticity (also Biot's porous media model)",
        params: &["nu1", "nu2", "kappa", "stiffness", "gamma"],
        grid_dims: &[3],
        build: |g, p| {
            thermo_elasticity(
                g,
                param(p, "nu1")?,
                param(p, "nu2")?,
                param(p, "kappa")?,
                param(p, "stiffness")?,
                param(p, "gamma")?,
            )
        },
        default_grid: || cube(3, 3, Bc::Dirichlet),
        defaults: &[("nu1", 1.0), ("nu2", 1.0), ("kappa", 1.0), ("stiffness", 1.0), ("gamma", 0.5)],
    },
    Registration {
        name: "reissner_mindlin",
        summary: "Reissner–Mindlin plate, coupling through the zero-order term",
        params: &["nu1", "nu2", "kappa", "stiffness", "d"],
        grid_dims: &[2],
        build: |g, p| reissner_mindlin(g, &plate_params(p)?),
        default_grid: || cube(2, 6, Bc::Dirichlet),
        defaults: &[("nu1", 1.0), ("nu2", 1.0), ("kappa", 1.0), ("stiffness", 1.0), ("d", 0.0)],
    },
    Registration {
        name: "kirchhoff_love",
        summary: "Kirchhoff–Love plate, second-order composite in space",
        params: &["nu1", "stiffness", "d"],
        grid_dims: &[2],
        build: |g, p| kirchhoff_love(g, param(p, "nu1")?, param(p, "stiffness")?, param(p, "d")?),
        default_grid: || cube(2, 6, Bc::Dirichlet),
        defaults: &[("nu1", 1.0), ("stiffness", 1.0), ("d", 0.0)],
    },
    Registration {
        name: "timoshenko",
        summary: "Timoshenko beam, the one-dimensional Reissner–Mindlin pattern",
        params: &["nu1", "nu2", "kappa", "stiffness", "d"],
        grid_dims: &[1],
        build: |g, p| timoshenko(g, &plate_params(p)?),
        default_grid: || cube(1, 16, Bc::Dirichlet),
        defaults: &[("nu1", 1.0), ("nu2", 1.0), ("kappa", 1.0), ("stiffness", 1.0), ("d", 0.0)],
    },
    Registration {
        name: "euler_bernoulli",
        summary: "Euler–Bernoulli beam, the one-dimensional Kirchhoff–Love pattern",
        params: &["nu1", "stiffness", "d"],
        grid_dims: &[1],
        build: |g, p| euler_bernoulli(g, param(p, "nu1")?, param(p, "stiffness")?, param(p, "d")?),
        default_grid: || cube(1, 16, Bc::Dirichlet),
        defaults: &[("nu1", 1.0), ("stiffness", 1.0), ("d", 0.0)],
    },
];

/// Every registered entry, in a fixed order.
pub fn registry() -> &'static [Registration] {
    &REGISTRY
}

pub fn lookup(name: &str) -> Option<&'static Registration> {
    REGISTRY.iter().find(|r| r.name == name)
}
