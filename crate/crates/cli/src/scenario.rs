//! Scenario files: a TOML description of one catalog system, its grid,
//! coefficients, initial state, solver and outputs.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use evolop_core::catalog::{lookup, CatalogEntry, Coef, Params, Registration};
use evolop_core::evolve::{Scheme, SolverConfig};
use evolop_core::flatgrid::{Axis, Bc, Grid};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Environment variable capping the number of grid points a scenario may use.
pub const MAX_POINTS_VAR: &str = "EVOLOP_MAX_POINTS";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Stem of the output files.
    pub name: String,
    /// Registered catalog entry.
    pub catalog: String,
    pub grid: GridSpec,
    #[serde(default)]
    pub params: BTreeMap<String, ParamValue>,
    pub solver: SolverSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub initial: Vec<InitialSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub axes: Vec<AxisSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub n: usize,
    /// Spacing; ignored (and optional) for `torus`, where it is `1/n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    pub bc: BcSpec,
    /// Coordinate of the first point; `symmetric` axes fix their own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcSpec {
    Dirichlet,
    Periodic,
    Torus,
    Symmetric,
}

/// A coefficient: one number, or one number per coordinate of its block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Scalar(f64),
    Diagonal(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "default_scheme")]
    pub scheme: SchemeSpec,
    pub tau: f64,
    pub t_end: f64,
    /// Exponential weight of the reported norm.
    #[serde(default)]
    pub nu: f64,
    /// Step the Schur complement on the range of the spatial operator.
    #[serde(default)]
    pub reduced: bool,
}

fn default_scheme() -> SchemeSpec {
    SchemeSpec::CrankNicolson
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeSpec {
    CrankNicolson,
    ImplicitEuler,
}

/// One contribution to the initial state, sampled on the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    /// Block label of the catalog entry, as listed by `evolop catalog`.
    pub block: String,
    /// Component inside the block; all components when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub component: Option<usize>,
    pub profile: ProfileKind,
    #[serde(default = "one")]
    pub amplitude: f64,
    /// `sine`/`cosine`: factors `k_i` of `π x_i`, one per axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavenumber: Option<Vec<f64>>,
    /// `gaussian`: centre, one coordinate per axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    /// `gaussian`: standard deviation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    /// `a ∏ sin(π k_i x_i)`.
    Sine,
    /// `a ∏ cos(π k_i x_i)`.
    Cosine,
    /// `a exp(-|x - c|² / (2 w²))`.
    Gaussian,
    Constant,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Write `<name>_energy.csv`.
    #[serde(default = "yes")]
    pub energy: bool,
    /// Times of the field snapshots, rounded to the nearest step.
    #[serde(default)]
    pub snapshots: Vec<f64>,
    /// Print the final weighted norm.
    #[serde(default = "yes")]
    pub norms: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            energy: true,
            snapshots: Vec::new(),
            norms: true,
        }
    }
}

/// Parses a scenario, reporting syntax and schema errors with their line
/// and column.
pub fn parse(text: &str) -> Result<Scenario, CliError> {
    toml::from_str(text).map_err(|e| {
        let at = e
            .span()
            .map(|s| {
                let (line, col) = line_col(text, s.start);
                format!(" at line {line}, column {col}")
            })
            .unwrap_or_default();
        CliError::Parse(format!("{}{at}", e.message()))
    })
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.chars().rev().take_while(|c| *c != '\n').count() + 1;
    (line, col)
}

impl Scenario {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario types serialize to TOML")
    }

    pub fn registration(&self) -> Result<&'static Registration, CliError> {
        lookup(&self.catalog).ok_or_else(|| CliError::UnknownCatalog(self.catalog.clone()))
    }

    pub fn build_grid(&self) -> Result<Grid, CliError> {
        let invalid = |e: evolop_core::OpError| CliError::Invalid(format!("grid: {e}"));
        let mut axes = Vec::with_capacity(self.grid.axes.len());
        for (i, a) in self.grid.axes.iter().enumerate() {
            let spacing = || {
                a.h.ok_or_else(|| {
                    CliError::Invalid(format!("grid axis {i}: `{:?}` needs `h`", a.bc))
                })
            };
            let axis = match a.bc {
                BcSpec::Torus => Axis::torus(a.n).map_err(invalid)?,
                BcSpec::Symmetric => Axis::symmetric(a.n, spacing()?).map_err(invalid)?,
                BcSpec::Dirichlet => Axis::new(a.n, spacing()?, Bc::Dirichlet).map_err(invalid)?,
                BcSpec::Periodic => Axis::new(a.n, spacing()?, Bc::Periodic).map_err(invalid)?,
            };
            axes.push(match (a.origin, a.bc) {
                (Some(_), BcSpec::Symmetric) => {
                    return Err(CliError::Invalid(format!(
                        "grid axis {i}: symmetric axes are centred at 0 and take no origin"
                    )))
                }
                (Some(o), _) => axis.with_origin(o),
                (None, _) => axis,
            });
        }
        let grid = Grid::new(axes).map_err(invalid)?;
        if let Some(cap) = point_cap()? {
            if grid.points() > cap {
                return Err(CliError::Invalid(format!(
                    "grid has {} points, above the {MAX_POINTS_VAR} cap of {cap}",
                    grid.points()
                )));
            }
        }
        Ok(grid)
    }

    pub fn core_params(&self) -> Params {
        self.params
            .iter()
            .map(|(k, v)| {
                let c = match v {
                    ParamValue::Scalar(s) => Coef::Scalar(*s),
                    ParamValue::Diagonal(d) => Coef::Diagonal(d.clone()),
                };
                (k.clone(), c)
            })
            .collect()
    }

    pub fn solver_config(&self) -> SolverConfig {
        let scheme = match self.solver.scheme {
            SchemeSpec::CrankNicolson => Scheme::CrankNicolson,
            SchemeSpec::ImplicitEuler => Scheme::ImplicitEuler,
        };
        let mut config = SolverConfig::new(self.solver.tau, self.solver.t_end, scheme);
        config.nu = self.solver.nu;
        config
    }

    /// Builds the catalog entry with the scenario's initial state.
    pub fn instantiate(&self) -> Result<CatalogEntry, CliError> {
        let reg = self.registration()?;
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(CliError::Invalid(format!(
                "`{}` is not a usable file stem",
                self.name
            )));
        }
        let grid = self.build_grid()?;
        let mut entry = reg.build(&grid, &self.core_params()).map_err(|e| match e {
            evolop_core::OpError::NotWellPosed(m) => {
                CliError::NotWellPosed(format!("{}: {m}", self.catalog))
            }
            e => CliError::Invalid(format!("{}: {e}", self.catalog)),
        })?;
        let u0 = self.initial_state(&entry, &grid)?;
        entry.problem = entry
            .problem
            .with_initial(u0)
            .map_err(|e| CliError::Invalid(format!("initial state: {e}")))?;
        Ok(entry)
    }

    fn initial_state(&self, entry: &CatalogEntry, grid: &Grid) -> Result<DVector<f64>, CliError> {
        let mut u = DVector::zeros(entry.space().dim());
        let points = grid.points();
        for (i, init) in self.initial.iter().enumerate() {
            let ctx = |msg: String| CliError::Invalid(format!("initial[{i}]: {msg}"));
            let range = entry.block(&init.block).ok_or_else(|| {
                let labels: Vec<&str> = entry.blocks.iter().map(|b| b.label.as_str()).collect();
                ctx(format!(
                    "no block `{}` (blocks: {})",
                    init.block,
                    labels.join(", ")
                ))
            })?;
            if range.len() % points != 0 {
                return Err(ctx(format!(
                    "block `{}` is not a field over the grid",
                    init.block
                )));
            }
            let comps = range.len() / points;
            let targets: Vec<usize> = match init.component {
                Some(c) if c < comps => vec![c],
                Some(c) => {
                    return Err(ctx(format!(
                        "block `{}` has {comps} components, not {}",
                        init.block,
                        c + 1
                    )))
                }
                None => (0..comps).collect(),
            };
            let values = grid.sample(profile(init, grid.dim()).map_err(ctx)?);
            for c in targets {
                let start = range.start + c * points;
                for (p, v) in values.iter().enumerate() {
                    u[start + p] += v;
                }
            }
        }
        Ok(u)
    }
}

fn profile(init: &InitialSpec, dim: usize) -> Result<impl Fn(&[f64]) -> f64, String> {
    let per_axis = |v: &Option<Vec<f64>>, what: &str| -> Result<Vec<f64>, String> {
        match v {
            Some(v) if v.len() == dim => Ok(v.clone()),
            Some(v) => Err(format!(
                "`{what}` has {} entries for a {dim}D grid",
                v.len()
            )),
            None => Err(format!("{:?} profile needs `{what}`", init.profile)),
        }
    };
    let a = init.amplitude;
    let (kind, k, c, w) = match init.profile {
        ProfileKind::Sine | ProfileKind::Cosine => (
            init.profile,
            per_axis(&init.wavenumber, "wavenumber")?,
            vec![],
            0.0,
        ),
        ProfileKind::Gaussian => {
            let w = init.width.ok_or("gaussian profile needs `width`")?;
            if !(w > 0.0) {
                return Err(format!("gaussian width must be positive, got {w}"));
            }
            (init.profile, vec![], per_axis(&init.center, "center")?, w)
        }
        ProfileKind::Constant => (init.profile, vec![], vec![], 0.0),
    };
    Ok(move |x: &[f64]| match kind {
        ProfileKind::Sine => {
            a * x
                .iter()
                .zip(&k)
                .map(|(x, k)| (PI * k * x).sin())
                .product::<f64>()
        }
        ProfileKind::Cosine => {
            a * x
                .iter()
                .zip(&k)
                .map(|(x, k)| (PI * k * x).cos())
                .product::<f64>()
        }
        ProfileKind::Gaussian => {
            let r2: f64 = x.iter().zip(&c).map(|(x, c)| (x - c) * (x - c)).sum();
            a * (-r2 / (2.0 * w * w)).exp()
        }
        ProfileKind::Constant => a,
    })
}

fn point_cap() -> Result<Option<usize>, CliError> {
    match std::env::var(MAX_POINTS_VAR) {
        Err(_) => Ok(None),
        Ok(v) => v.trim().parse().map(Some).map_err(|_| {
            CliError::Invalid(format!("{MAX_POINTS_VAR} must be a point count, got `{v}`"))
        }),
    }
}
