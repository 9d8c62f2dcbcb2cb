//! The structural verification suite run by `evolop verify`.

use evolop_core::catalog::*;
use evolop_core::evolve::{dissipation_check, solve, solve_reduced, Scheme, SolverConfig};
use evolop_core::flatgrid::{
    build_div, build_mother_a, build_nabla, Axis, Bc, Grid, MotherSpace, TensorFieldSpace,
};
use evolop_core::linops::MatrixOperator;
use evolop_core::Result;
use nalgebra::DVector;

/// Deliberate faults for mutation testing of the suite itself.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Faults {
    /// Flip the sign of the hand-assembled curl.
    pub curl_sign: bool,
}

/// One named group of checks.
pub struct Group {
    pub name: &'static str,
    run: fn(&Faults) -> Result<Vec<Check>>,
}

/// A finished group: its checks, or the error that stopped it.
pub struct GroupResult {
    pub name: &'static str,
    pub outcome: std::result::Result<Vec<Check>, String>,
}

impl GroupResult {
    pub fn passed(&self) -> bool {
        matches!(&self.outcome, Ok(c) if c.iter().all(Check::passed))
    }
}

pub fn groups() -> Vec<Group> {
    vec![
        Group {
            name: "adjointness.grad_div",
            run: grad_div,
        },
        Group {
            name: "skew.mother",
            run: mother_skew,
        },
        Group {
            name: "skew.catalog",
            run: catalog_skew,
        },
        Group {
            name: "curl.identification",
            run: curl,
        },
        Group {
            name: "maxwell.annihilation",
            run: |_| Ok(vec![verify_annihilation(&Grid::unit_torus(3, 4)?)?]),
        },
        Group {
            name: "maxwell.restriction",
            run: |_| Ok(vec![verify_maxwell_restriction(&Grid::unit_torus(3, 4)?)?]),
        },
        Group {
            name: "dirac.equivalence",
            run: |_| Ok(vec![verify_dirac_equivalence(&Grid::unit_torus(3, 4)?)?]),
        },
        Group {
            name: "dirac.spectra",
            run: |_| Ok(vec![verify_dirac_spectra(&Grid::unit_torus(3, 2)?)?]),
        },
        Group {
            name: "schur.equivalence",
            run: schur,
        },
        Group {
            name: "reduction.plate_to_beam",
            run: |_| Ok(verify_dimension_reduction(10, 4, 100)?.checks),
        },
        Group {
            name: "even_odd.transport",
            run: even_odd,
        },
        Group {
            name: "second_order.reissner_mindlin",
            run: rm_second_order,
        },
        Group {
            name: "second_order.timoshenko",
            run: beam_second_order,
        },
        Group {
            name: "polar.decomposition",
            run: polar,
        },
        Group {
            name: "energy.conservation",
            run: energy,
        },
    ]
}

/// Runs every group whose name contains `filter` (case-insensitive).
pub fn run(filter: Option<&str>, faults: &Faults) -> Vec<GroupResult> {
    let filter = filter.map(str::to_lowercase);
    groups()
        .into_iter()
        .filter(|g| filter.as_deref().is_none_or(|f| g.name.contains(f)))
        .map(|g| GroupResult {
            name: g.name,
            outcome: (g.run)(faults).map_err(|e| e.to_string()),
        })
        .collect()
}

/// Deterministic, generic-looking state.
fn probe(n: usize) -> DVector<f64> {
    DVector::from_fn(n, |i, _| {
        (1.7 * i as f64 + 0.3).sin() + 0.5 * (0.61 * (i * i) as f64).cos()
    })
}

fn grad_div(_: &Faults) -> Result<Vec<Check>> {
    let grid = Grid::new(vec![
        Axis::dirichlet(4, 0.25)?,
        Axis::periodic(3, 0.4)?,
        Axis::dirichlet(5, 0.2)?,
    ])?;
    (0..=2)
        .map(|rank| {
            let low = TensorFieldSpace::new(grid.clone(), rank);
            let grad = build_nabla(&low);
            let div = build_div(&low.raised())?;
            let r = div.max_abs_diff(&grad.adjoint().neg())? / grad.max_abs();
            Ok(Check::new(format!("div = -∇̊* on rank {rank}"), r, 1e-12))
        })
        .collect()
}

fn skewness(a: &MatrixOperator) -> Result<f64> {
    Ok(a.add(&a.adjoint())?.max_abs() / a.max_abs().max(1.0))
}

fn mother_skew(_: &Faults) -> Result<Vec<Check>> {
    let grid = Grid::new(vec![
        Axis::dirichlet(4, 0.25)?,
        Axis::periodic(4, 0.25)?,
        Axis::dirichlet(4, 0.25)?,
    ])?;
    let a = build_mother_a(&MotherSpace::new(grid, 3)?).into_a();
    Ok(vec![Check::new(
        "A + A* = 0 (K = 3, 4³ mixed)",
        skewness(&a)?,
        1e-12,
    )])
}

fn catalog_skew(_: &Faults) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for reg in registry() {
        let entry = reg.build_default()?;
        let scale = entry.problem.a.max_abs().max(1.0);
        checks.push(Check::new(
            format!("{} skew", reg.name),
            skewness(&entry.problem.a)?,
            1e-12,
        ));
        checks.push(Check::new(
            format!("{} derivation", reg.name),
            entry.derivation_residual()? / scale,
            1e-12,
        ));
    }
    Ok(checks)
}

fn curl(faults: &Faults) -> Result<Vec<Check>> {
    [
        Grid::unit_torus(3, 4)?,
        Grid::cube(3, 3, 0.25, Bc::Dirichlet)?,
    ]
    .iter()
    .map(|g| {
        let mut c = assembled_curl(g)?;
        if faults.curl_sign {
            c = c.neg();
        }
        let mut check = verify_curl_against(g, &c)?;
        check.name = format!("{} on {}", check.name, g.label());
        Ok(check)
    })
    .collect()
}

fn schur(_: &Faults) -> Result<Vec<Check>> {
    let torus = Grid::unit_torus(2, 6)?;
    let one = Coef::Scalar(1.0);
    let cases = [
        (
            "acoustics on torus",
            acoustics(&torus, &one, &Coef::Scalar(2.0), &Coef::Scalar(0.0))?,
        ),
        ("heat with kernel", heat(&torus, &one, &one)?),
    ];
    let config = SolverConfig::new(0.02, 4.0, Scheme::CrankNicolson);
    cases
        .iter()
        .map(|(name, entry)| {
            let problem = entry
                .problem
                .clone()
                .with_initial(probe(entry.space().dim()))?;
            let full = solve(&problem, &config)?;
            let reduced = solve_reduced(&problem, &config, None)?;
            let scale = full.states.iter().fold(0.0_f64, |m, u| m.max(u.amax()));
            let diff = full
                .states
                .iter()
                .zip(&reduced.states)
                .fold(0.0_f64, |m, (a, b)| m.max((a - b).amax()));
            Ok(Check::new(
                format!("reduced = full, {name}"),
                diff / scale,
                1e-10,
            ))
        })
        .collect()
}

fn even_odd(_: &Faults) -> Result<Vec<Check>> {
    let grid = Grid::new(vec![Axis::symmetric(32, 1.0 / 16.0)?])?;
    let law = transport_law(&grid, &Coef::Scalar(1.0), &Coef::Scalar(1.0))?;
    Ok(vec![verify_transport_equivalence(&grid, &law, 64)?])
}

fn rm_second_order(_: &Faults) -> Result<Vec<Check>> {
    let plate = lookup("reissner_mindlin").expect("registered");
    let rm = plate.build(
        &Grid::cube(2, 8, 1.0 / 9.0, Bc::Dirichlet)?,
        &plate.default_params(),
    )?;
    Ok(vec![verify_second_order(&rm, 0.01, 100)?])
}

fn beam_second_order(_: &Faults) -> Result<Vec<Check>> {
    let beam = lookup("timoshenko").expect("registered").build_default()?;
    Ok(vec![verify_second_order(&beam, 0.01, 100)?])
}

fn polar(_: &Faults) -> Result<Vec<Check>> {
    let g = Grid::cube(1, 16, 1.0 / 17.0, Bc::Dirichlet)?;
    let mut checks = verify_polar(&build_nabla(&g.scalar_space()))?.checks;
    for eps in [0.25, 1.0] {
        let r = second_order_wave_relative(&Grid::cube(1, 12, 1.0 / 13.0, Bc::Dirichlet)?, eps)?;
        checks.extend(r.checks.into_iter().map(|mut c| {
            c.name = format!("{} (ε = {eps})", c.name);
            c
        }));
    }
    Ok(checks)
}

fn energy(_: &Faults) -> Result<Vec<Check>> {
    let (zero, one) = (Coef::Scalar(0.0), Coef::Scalar(1.0));
    let cases = [
        (
            "acoustics",
            acoustics(
                &Grid::cube(2, 6, 1.0 / 6.0, Bc::Dirichlet)?,
                &one,
                &one,
                &zero,
            )?,
        ),
        (
            "maxwell",
            maxwell(&Grid::unit_torus(3, 4)?, &one, &one, &zero)?,
        ),
    ];
    cases
        .iter()
        .map(|(name, entry)| {
            let problem = entry
                .problem
                .clone()
                .with_initial(probe(entry.space().dim()))?;
            let traj = solve(
                &problem,
                &SolverConfig::new(0.01, 5.0, Scheme::CrankNicolson),
            )?;
            let r = dissipation_check(&traj, &problem.law)?;
            Ok(Check::new(
                format!("CN energy drift, {name}"),
                r.max_relative_drift,
                1e-10,
            ))
        })
        .collect()
}
