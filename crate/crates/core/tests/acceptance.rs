//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Built with `harness = false` so the lines are visible in
//! plain `cargo test` output.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use evolop_core::catalog::*;
use evolop_core::evolve::{
    causality_check, dissipation_check, solve, solve_reduced, Forcing, Scheme, SolverConfig,
};
use evolop_core::flatgrid::{
    build_div, build_mother_a, build_nabla, Axis, Bc, Grid, MotherSpace, TensorFieldSpace,
};
use evolop_core::linops::{
    make_block_skew, make_relative, verify_adjoint_theorem, MatrixOperator, SpaceTag,
};
use evolop_core::matlaw::{check_wellposed, MaterialLaw};
use evolop_core::Result;

type Verdict = Result<(bool, String)>;

struct Outcome {
    id: usize,
    name: &'static str,
    passed: bool,
    detail: String,
    elapsed: Duration,
}

fn run(id: usize, name: &'static str, f: fn() -> Verdict) -> Outcome {
    let start = Instant::now();
    let (passed, detail) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(v)) => v,
        Ok(Err(e)) => (false, format!("error: {e}")),
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panic: {msg}"))
        }
    };
    Outcome {
        id,
        name,
        passed,
        detail,
        elapsed: start.elapsed(),
    }
}

fn within(start: Instant, limit_s: f64) -> (bool, String) {
    let s = start.elapsed().as_secs_f64();
    (s < limit_s, format!("{s:.2}s of {limit_s}s"))
}

fn random_vec(rng: &mut StdRng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
}

fn random_mat(rng: &mut StdRng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0))
}

fn random_tag(rng: &mut StdRng, name: &str, n: usize) -> SpaceTag {
    SpaceTag::new(name, (0..n).map(|_| rng.gen_range(0.5..2.0)).collect())
        .expect("positive weights")
}

/// Orthonormal rows, `rows <= cols`.
fn coisometry(rng: &mut StdRng, rows: usize, cols: usize) -> DMatrix<f64> {
    let q = random_mat(rng, cols, rows).qr().q();
    q.transpose()
}

fn max_skew(a: &MatrixOperator) -> Result<f64> {
    Ok(a.add(&a.adjoint())?.max_abs())
}

fn c01_exact_adjointness() -> Verdict {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let dim = rng.gen_range(1..=3);
        let axes = (0..dim)
            .map(|_| {
                let n = rng.gen_range(2..=8);
                let bc = if rng.gen_bool(0.5) {
                    Bc::Dirichlet
                } else {
                    Bc::Periodic
                };
                Axis::new(n, rng.gen_range(0.05..0.5), bc)
            })
            .collect::<Result<Vec<_>>>()?;
        let grid = Grid::new(axes)?;
        let rank = rng.gen_range(0..=3);
        let low = TensorFieldSpace::new(grid.clone(), rank);
        let high = low.raised();
        let (grad, div) = (build_nabla(&low), build_div(&high)?);
        let u = random_vec(&mut rng, low.dim());
        let v = random_vec(&mut rng, high.dim());
        let (lt, ht) = (low.tag(), high.tag());
        let defect = (ht.inner(&grad.apply(&u)?, &v) + lt.inner(&u, &div.apply(&v)?)).abs();
        worst = worst.max(defect / (lt.norm(&u) * ht.norm(&v)));
    }
    let (fast, time) = within(start, 5.0);
    Ok((
        worst <= 1e-12 && fast,
        format!("max |<∇u,v> + <u,div v>|/(|u||v|) = {worst:.2e}, {time}"),
    ))
}

fn c02_skew() -> Verdict {
    let start = Instant::now();
    let grid = Grid::new(vec![
        Axis::dirichlet(4, 0.25)?,
        Axis::periodic(4, 0.3)?,
        Axis::torus(4)?,
    ])?;
    let mother = build_mother_a(&MotherSpace::new(grid, 3)?).into_a();
    let mut worst = max_skew(&mother)?;
    let mut count = 0;
    for reg in registry() {
        let entry = reg.build_default()?;
        worst = worst.max(max_skew(&entry.problem.a)?);
        count += 1;
    }
    let (fast, time) = within(start, 10.0);
    Ok((
        worst <= 1e-12 && count >= 13 && fast,
        format!(
            "mother (dim {}) and {count} entries: max |A + A*| = {worst:.2e}, {time}",
            mother.nrows()
        ),
    ))
}

fn c03_adjoint_theorem() -> Verdict {
    let mut rng = StdRng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let mut all = true;
    for _ in 0..50 {
        let (n0, n1, nx) = (
            rng.gen_range(1..=8),
            rng.gen_range(1..=8),
            rng.gen_range(1..=8),
        );
        let (h0, h1, x) = (
            random_tag(&mut rng, "H0", n0),
            random_tag(&mut rng, "H1", n1),
            random_tag(&mut rng, "X", nx),
        );
        let c = MatrixOperator::from_dense(random_mat(&mut rng, n1, n0), h0.clone(), h1)?;
        let b = MatrixOperator::from_dense(random_mat(&mut rng, nx, n0), h0, x)?;
        all &= verify_adjoint_theorem(&c, &b, 1e-12)?;
        let lhs = c.compose(&b.adjoint())?.adjoint();
        worst = worst.max(lhs.max_abs_diff(&b.compose(&c.adjoint())?)?);
    }
    Ok((
        all && worst <= 1e-12,
        format!("50 pairs, max |(CB*)* - BC*| = {worst:.2e}"),
    ))
}

fn c04_relatives() -> Verdict {
    let mut rng = StdRng::seed_from_u64(4);
    let (mut skew, mut conj): (f64, f64) = (0.0, 0.0);
    for k in 0..50 {
        let (n0, n1) = (rng.gen_range(2..=8), rng.gen_range(2..=8));
        let unitary = k % 2 == 0;
        let (nx, ny) = if unitary {
            (n0, n1)
        } else {
            (rng.gen_range(1..=n0), rng.gen_range(1..=n1))
        };
        let (h0, h1) = (
            SpaceTag::euclidean("H0", n0)?,
            SpaceTag::euclidean("H1", n1)?,
        );
        let (x, y) = (SpaceTag::euclidean("X", nx)?, SpaceTag::euclidean("Y", ny)?);
        let c = MatrixOperator::from_dense(random_mat(&mut rng, n1, n0), h0.clone(), h1.clone())?;
        let a = make_block_skew(&c);
        let b0 = MatrixOperator::from_dense(coisometry(&mut rng, nx, n0), h0, x)?;
        let b1 = MatrixOperator::from_dense(coisometry(&mut rng, ny, n1), h1, y)?;
        let rel = make_relative(&a, &b0, &b1)?.into_a();
        skew = skew.max(max_skew(&rel)?);
        if unitary {
            let b = MatrixOperator::block_diag(&[&b0, &b1])?;
            let full = b.compose(&a.a().clone())?.compose(&b.adjoint())?;
            conj = conj.max(full.max_abs_diff(&rel)?);
        }
    }
    Ok((
        skew <= 1e-12 && conj <= 1e-12,
        format!("50 pairs, max |R + R*| = {skew:.2e}, unitary conjugate defect {conj:.2e}"),
    ))
}

fn reduced_deviation(entry: &CatalogEntry, seed: u64) -> Result<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    let u0 = random_vec(&mut rng, entry.space().dim());
    let problem = entry.problem.clone().with_initial(u0)?;
    let config = SolverConfig::new(0.02, 4.0, Scheme::CrankNicolson);
    let full = solve(&problem, &config)?;
    let reduced = solve_reduced(&problem, &config, None)?;
    let scale = full.states.iter().fold(0.0_f64, |m, u| m.max(u.amax()));
    let diff = full
        .states
        .iter()
        .zip(&reduced.states)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).amax()));
    Ok(diff / scale)
}

fn c05_schur() -> Verdict {
    let start = Instant::now();
    let torus = Grid::unit_torus(2, 6)?;
    let one = Coef::Scalar(1.0);
    let ac = reduced_deviation(
        &acoustics(&torus, &one, &Coef::Scalar(2.0), &Coef::Scalar(0.0))?,
        5,
    )?;
    let ht = reduced_deviation(&heat(&torus, &one, &one)?, 6)?;
    let (fast, time) = within(start, 10.0);
    Ok((
        ac <= 1e-10 && ht <= 1e-10 && fast,
        format!("200 steps, relative deviation acoustics {ac:.2e}, heat {ht:.2e}, {time}"),
    ))
}

fn c06_dirac() -> Verdict {
    let eq = verify_dirac_equivalence(&Grid::unit_torus(3, 4)?)?;
    let sp = verify_dirac_spectra(&Grid::unit_torus(3, 2)?)?;
    Ok((eq.passed() && sp.passed(), format!("{eq}; {sp}")))
}

fn c07_annihilation() -> Verdict {
    let c = verify_annihilation(&Grid::unit_torus(3, 4)?)?;
    Ok((c.passed(), c.to_string()))
}

fn c08_curl() -> Verdict {
    let c = verify_curl_identification(&Grid::unit_torus(3, 4)?)?;
    let exact = c.residual == 0.0;
    Ok((c.passed(), format!("{c}, bitwise equal: {exact}")))
}

fn energy_run(entry: &CatalogEntry, seed: u64) -> Result<(f64, bool)> {
    let mut rng = StdRng::seed_from_u64(seed);
    let problem = entry
        .problem
        .clone()
        .with_initial(random_vec(&mut rng, entry.space().dim()))?;
    let traj = solve(
        &problem,
        &SolverConfig::new(0.01, 10.0, Scheme::CrankNicolson),
    )?;
    assert_eq!(traj.states.len(), 1001);
    let r = dissipation_check(&traj, &problem.law)?;
    Ok((r.max_relative_drift, r.strictly_decreasing))
}

fn c09_energy() -> Verdict {
    let (zero, one) = (Coef::Scalar(0.0), Coef::Scalar(1.0));
    let plate = lookup("reissner_mindlin").expect("registered");
    let mut params = plate.default_params();
    let rm = |d: f64, params: &mut Params| -> Result<CatalogEntry> {
        params.insert("d".into(), Coef::Scalar(d));
        plate.build(&plate.default_grid(), params)
    };
    let square = Grid::cube(2, 6, 1.0 / 6.0, Bc::Dirichlet)?;
    let torus3 = Grid::unit_torus(3, 4)?;
    let conservative = [
        acoustics(&square, &one, &one, &zero)?,
        maxwell(&torus3, &one, &one, &zero)?,
        rm(0.0, &mut params)?,
    ];
    let dissipative = [
        acoustics(&square, &one, &one, &one)?,
        maxwell(&torus3, &one, &one, &one)?,
        rm(1.0, &mut params)?,
    ];
    let mut drift: f64 = 0.0;
    for (k, e) in conservative.iter().enumerate() {
        drift = drift.max(energy_run(e, 90 + k as u64)?.0);
    }
    let mut decreasing = true;
    for (k, e) in dissipative.iter().enumerate() {
        decreasing &= energy_run(e, 95 + k as u64)?.1;
    }
    Ok((
        drift <= 1e-10 && decreasing,
        format!("1000 CN steps, max relative drift {drift:.2e}, dissipative strictly decreasing: {decreasing}"),
    ))
}

/// L² error at `t = 3/4` of 1D acoustics on a periodic axis of length 2
/// against `p = sin(πx)cos(πt)`, `v = -cos(πx)sin(πt)` (velocity staggered
/// by `h/2`), with `τ = h/2`.
fn wave_error(n: usize) -> Result<f64> {
    use std::f64::consts::PI;
    let h = 2.0 / n as f64;
    let grid = Grid::new(vec![Axis::periodic(n, h)?])?;
    let one = Coef::Scalar(1.0);
    let entry = acoustics(&grid, &one, &one, &Coef::Scalar(0.0))?;
    let (rp, rv) = (entry.block("p").expect("p"), entry.block("v").expect("v"));
    let x: Vec<f64> = (0..n).map(|i| grid.axis(0).coord(i)).collect();
    let mut u0 = DVector::zeros(2 * n);
    for (i, xi) in rp.clone().zip(&x) {
        u0[i] = (PI * xi).sin();
    }
    let t_end = 0.75;
    let traj = solve(
        &entry.problem.clone().with_initial(u0)?,
        &SolverConfig::new(h / 2.0, t_end, Scheme::CrankNicolson),
    )?;
    let (t, u) = (
        traj.times.last().copied().unwrap_or(0.0),
        traj.states.last().expect("states"),
    );
    let mut exact = DVector::zeros(2 * n);
    for (k, xi) in x.iter().enumerate() {
        exact[rp.start + k] = (PI * xi).sin() * (PI * t).cos();
        exact[rv.start + k] = -(PI * (xi + h / 2.0)).cos() * (PI * t).sin();
    }
    Ok(entry.space().norm(&(u - exact)))
}

fn c10_convergence() -> Verdict {
    let start = Instant::now();
    let errors = [16, 32, 64, 128]
        .iter()
        .map(|&n| wave_error(n))
        .collect::<Result<Vec<_>>>()?;
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let min = orders.iter().copied().fold(f64::INFINITY, f64::min);
    let (fast, time) = within(start, 30.0);
    Ok((
        min >= 1.8 && fast,
        format!(
            "errors [{}], observed orders {orders:.3?}, {time}",
            errors
                .iter()
                .map(|e| format!("{e:.2e}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    ))
}

fn c11_dimension_reduction() -> Verdict {
    let r = verify_dimension_reduction(12, 4, 100)?;
    let lines: Vec<String> = r.checks.iter().map(|c| c.to_string()).collect();
    Ok((r.passed(), lines.join("; ")))
}

fn c12_transport() -> Verdict {
    let grid = Grid::new(vec![Axis::symmetric(32, 1.0 / 16.0)?])?;
    let law = transport_law(&grid, &Coef::Scalar(1.0), &Coef::Scalar(1.0))?;
    let c = verify_transport_equivalence(&grid, &law, 64)?;
    Ok((c.passed(), c.to_string()))
}

fn c13_second_order() -> Verdict {
    let plate = lookup("reissner_mindlin").expect("registered");
    let rm = plate.build(
        &Grid::cube(2, 8, 1.0 / 9.0, Bc::Dirichlet)?,
        &plate.default_params(),
    )?;
    let beam = lookup("timoshenko").expect("registered").build_default()?;
    let a = verify_second_order(&rm, 0.01, 100)?;
    let b = verify_second_order(&beam, 0.01, 100)?;
    Ok((a.passed() && b.passed(), format!("{a}; {b}")))
}

fn c14_wellposedness_gate() -> Verdict {
    let heat = lookup("heat").expect("registered").build_default()?;
    let good = check_wellposed(&heat.problem.law, 1e-12)?;
    let s = SpaceTag::euclidean("R²", 2)?;
    let bad = check_wellposed(
        &MaterialLaw::from_diagonals(&s, &[1.0, 0.0], &[0.0, 0.0])?,
        1e-12,
    )?;
    Ok((
        good.passed() && !bad.passed() && !bad.kernel_block_positive,
        format!(
            "heat passes: {}, diag(1,0)/0 passes: {}, kernel_block_positive: {}",
            good.passed(),
            bad.passed(),
            bad.kernel_block_positive
        ),
    ))
}

fn c15_polar() -> Verdict {
    let mut polar: f64 = 0.0;
    let mut ok = true;
    for n in 8..=32 {
        let g = Grid::cube(1, n, 1.0 / (n as f64 + 1.0), Bc::Dirichlet)?;
        let r = verify_polar(&build_nabla(&g.scalar_space()))?;
        ok &= r.passed();
        polar = polar.max(r.checks[0].residual);
    }
    let mut wave: f64 = 0.0;
    for grid in [
        Grid::cube(1, 12, 1.0 / 13.0, Bc::Dirichlet)?,
        Grid::cube(3, 3, 0.25, Bc::Dirichlet)?,
    ] {
        for eps in [0.25, 1.0] {
            let r = second_order_wave_relative(&grid, eps)?;
            ok &= r.passed();
            wave = wave.max(r.worst().map(|c| c.residual).unwrap_or(f64::NAN));
        }
    }
    Ok((
        ok,
        format!("max |∇̊ - U|∇̊|| = {polar:.2e} (n = 8..32), wave relative identities {wave:.2e}"),
    ))
}

fn c16_causality() -> Verdict {
    let mut rng = StdRng::seed_from_u64(16);
    let mut failures = Vec::new();
    for reg in registry() {
        let entry = reg.build_default()?;
        let profile = random_vec(&mut rng, entry.space().dim());
        let problem = entry
            .problem
            .clone()
            .with_forcing(Forcing::switched_on(0.5, profile));
        for scheme in [Scheme::ImplicitEuler, Scheme::CrankNicolson] {
            if !causality_check(&problem, &SolverConfig::new(0.05, 1.0, scheme), 0.5)? {
                failures.push(format!("{} ({scheme:?})", reg.name));
            }
        }
    }
    Ok((
        failures.is_empty(),
        if failures.is_empty() {
            format!(
                "{} entries, both schemes, zero states before t0 = 0.5",
                registry().len()
            )
        } else {
            format!("nonzero states before onset: {}", failures.join(", "))
        },
    ))
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 16] = [
        ("exact adjointness of ∇̊ and div", c01_exact_adjointness),
        ("mother operator and catalog entries are skew", c02_skew),
        ("adjoint of compatible compositions", c03_adjoint_theorem),
        (
            "relatives are skew, unitary relatives are conjugates",
            c04_relatives,
        ),
        ("Schur reduction reproduces full solves", c05_schur),
        (
            "Dirac is unitarily equivalent to extended Maxwell",
            c06_dirac,
        ),
        (
            "extended Maxwell parts annihilate each other",
            c07_annihilation,
        ),
        ("curl identification", c08_curl),
        ("energy conservation and dissipation", c09_energy),
        ("Crank–Nicolson convergence order", c10_convergence),
        ("dimension reduction plate to beam", c11_dimension_reduction),
        ("even/odd transport equivalence", c12_transport),
        ("second-order plate and beam forms", c13_second_order),
        ("well-posedness gate", c14_wellposedness_gate),
        (
            "polar decomposition and wave relative identities",
            c15_polar,
        ),
        ("causality", c16_causality),
    ];
    let outcomes: Vec<Outcome> = criteria
        .iter()
        .enumerate()
        .map(|(k, (name, f))| {
            let o = run(k + 1, name, *f);
            println!(
                "{} [{:02}] {} :: {} ({:.2}s)",
                if o.passed { "PASS" } else { "FAIL" },
                o.id,
                o.name,
                o.detail,
                o.elapsed.as_secs_f64()
            );
            o
        })
        .collect();
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!(
        "acceptance: {} passed, {failed} failed",
        outcomes.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
