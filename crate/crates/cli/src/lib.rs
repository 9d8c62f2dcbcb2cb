//! Batch front end: scenario files in, CSV out, plus the verification suite
//! and a listing of the catalog.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod scenario;
pub mod verify;

use std::io::Write;
use std::path::{Path, PathBuf};

use evolop_core::catalog::{registry, CatalogEntry};
use evolop_core::evolve::{solve, solve_reduced, weighted_partial_norms, Trajectory};
use evolop_core::matlaw::check_wellposed;
use evolop_core::OpError;

pub use scenario::{parse, Scenario};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("unknown catalog entry `{0}` (see `evolop catalog`)")]
    UnknownCatalog(String),
    #[error("material law is not well-posed: {0}")]
    NotWellPosed(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Core(#[from] OpError),
}

impl CliError {
    /// 2 for unreadable or invalid scenarios, 3 for unknown catalog names,
    /// 4 for laws failing the well-posedness gate, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::Invalid(_) => 2,
            CliError::UnknownCatalog(_) => 3,
            CliError::NotWellPosed(_) | CliError::Core(OpError::NotWellPosed(_)) => 4,
            _ => 1,
        }
    }
}

/// Prints the PASS/FAIL table; returns 0 iff every selected check passed.
pub fn cmd_verify(
    filter: Option<&str>,
    faults: &verify::Faults,
    out: &mut impl Write,
) -> std::io::Result<u8> {
    let results = verify::run(filter, faults);
    if results.is_empty() {
        writeln!(out, "no check group matches {:?}", filter.unwrap_or(""))?;
        return Ok(1);
    }
    let (mut passed, mut total) = (0, 0);
    for group in &results {
        match &group.outcome {
            Ok(checks) => {
                for c in checks {
                    let verdict = if c.passed() { "PASS" } else { "FAIL" };
                    writeln!(
                        out,
                        "{verdict}  {:<30} {:<48} {:>10.3e} <= {:.0e}",
                        group.name, c.name, c.residual, c.tol
                    )?;
                    total += 1;
                    passed += usize::from(c.passed());
                }
            }
            Err(e) => {
                writeln!(out, "FAIL  {:<30} error: {e}", group.name)?;
                total += 1;
            }
        }
    }
    writeln!(out, "{passed}/{total} checks passed")?;
    Ok(if results.iter().all(verify::GroupResult::passed) {
        0
    } else {
        1
    })
}

/// Lists every catalog entry with its parameters and derivation chain.
pub fn cmd_catalog(out: &mut impl Write) -> Result<u8, CliError> {
    for reg in registry() {
        let entry = reg.build_default()?;
        let dims: Vec<String> = reg.grid_dims.iter().map(|d| format!("{d}D")).collect();
        let blocks: Vec<&str> = entry.blocks.iter().map(|b| b.label.as_str()).collect();
        writeln!(out, "{}: {}", reg.name, reg.summary)?;
        writeln!(
            out,
            "  grids: {}; params: [{}]; blocks: [{}]",
            dims.join(", "),
            reg.params.join(", "),
            blocks.join(", ")
        )?;
        let chain: Vec<String> = entry
            .provenance()
            .into_iter()
            .map(|(step, reference)| match reference.is_empty() {
                true => step,
                false => format!("{step} [{reference}]"),
            })
            .collect();
        writeln!(out, "  provenance: {}", chain.join(" -> "))?;
    }
    writeln!(out, "{} entries", registry().len())?;
    Ok(0)
}

/// Files written by [`cmd_solve`].
#[derive(Debug, Default)]
pub struct SolveOutput {
    pub energy: Option<PathBuf>,
    pub snapshots: Option<PathBuf>,
    /// Final weighted norm, when the scenario asks for norms.
    pub final_norm: Option<f64>,
}

/// Reads, validates and runs a scenario, writing CSV files into `out_dir`.
pub fn cmd_solve(path: &Path, reduced: bool, out_dir: &Path) -> Result<SolveOutput, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    run_scenario(&parse(&text)?, reduced, out_dir)
}

pub fn run_scenario(
    scenario: &Scenario,
    reduced: bool,
    out_dir: &Path,
) -> Result<SolveOutput, CliError> {
    let entry = scenario.instantiate()?;
    let report = check_wellposed(&entry.problem.law, 1e-12)?;
    if !report.passed() {
        return Err(CliError::NotWellPosed(format!("{report:?}")));
    }
    let config = scenario.solver_config();
    if !(config.tau > 0.0) || !(config.t_end >= 0.0) || !(config.nu >= 0.0) {
        return Err(CliError::Invalid(
            "solver needs tau > 0, t_end >= 0 and nu >= 0".into(),
        ));
    }
    let traj = if reduced || scenario.solver.reduced {
        solve_reduced(&entry.problem, &config, None)?
    } else {
        solve(&entry.problem, &config)?
    };
    let norms = weighted_partial_norms(&traj, entry.space(), config.nu);
    let mut output = SolveOutput {
        final_norm: scenario
            .output
            .norms
            .then(|| norms.last().copied().unwrap_or(0.0)),
        ..Default::default()
    };
    std::fs::create_dir_all(out_dir)?;
    if scenario.output.energy {
        let path = out_dir.join(format!("{}_energy.csv", scenario.name));
        write_energy(&path, &traj, &norms)?;
        output.energy = Some(path);
    }
    if !scenario.output.snapshots.is_empty() {
        let path = out_dir.join(format!("{}_snapshots.csv", scenario.name));
        write_snapshots(&path, &traj, &entry, &scenario.output.snapshots)?;
        output.snapshots = Some(path);
    }
    Ok(output)
}

/// Shortest form is not enough for the tolerances downstream; always 17
/// significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_energy(path: &Path, traj: &Trajectory, norms: &[f64]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "energy", "weighted_partial_norm"])?;
    for ((t, e), n) in traj.times.iter().zip(&traj.energies).zip(norms) {
        w.write_record([num(*t), num(*e), num(*n)])?;
    }
    w.flush()?;
    Ok(())
}

fn write_snapshots(
    path: &Path,
    traj: &Trajectory,
    entry: &CatalogEntry,
    times: &[f64],
) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "block", "index", "value"])?;
    let last = traj.states.len() - 1;
    for &t in times {
        let k = ((t / traj.tau).round().max(0.0) as usize).min(last);
        let u = &traj.states[k];
        for block in &entry.blocks {
            for (i, j) in block.range.clone().enumerate() {
                w.write_record([
                    num(traj.times[k]),
                    block.label.clone(),
                    i.to_string(),
                    num(u[j]),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
