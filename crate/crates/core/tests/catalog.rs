use evolop_core::catalog::*;
use evolop_core::flatgrid::{Axis, Bc, Grid};
use evolop_core::linops::is_skew_selfadjoint;
use evolop_core::matlaw::check_wellposed;

#[test]
fn every_entry_matches_its_derivation_and_classical_form() {
    for reg in registry() {
        let entry = reg
            .build_default()
            .unwrap_or_else(|e| panic!("{}: {e}", reg.name));
        let a = &entry.problem.a;
        let scale = a.max_abs().max(1.0);
        let derived = entry.derivation_residual().unwrap();
        assert!(
            derived <= 1e-12 * scale,
            "{}: derivation residual {derived}",
            reg.name
        );
        let classical = entry.classical_residual().unwrap().expect("classical form");
        assert!(
            classical <= 1e-12 * scale,
            "{}: classical residual {classical}",
            reg.name
        );
        assert!(
            is_skew_selfadjoint(a, 1e-12).unwrap(),
            "{} is not skew",
            reg.name
        );
        let report = check_wellposed(&entry.problem.law, 1e-10).unwrap();
        assert!(report.passed(), "{}: {report:?}", reg.name);
        assert!(!entry.provenance().is_empty());
    }
}

#[test]
fn electromagnetic_identities() {
    let g = Grid::unit_torus(3, 4).unwrap();
    for check in [
        verify_curl_identification(&g).unwrap(),
        verify_annihilation(&g).unwrap(),
        verify_maxwell_restriction(&g).unwrap(),
        verify_dirac_equivalence(&g).unwrap(),
        verify_dirac_spectra(&Grid::unit_torus(3, 2).unwrap()).unwrap(),
    ] {
        assert!(check.passed(), "{check}");
    }
}

#[test]
fn dirichlet_curl_identification() {
    let g = Grid::cube(3, 3, 0.25, Bc::Dirichlet).unwrap();
    let c = verify_curl_identification(&g).unwrap();
    assert_eq!(c.residual, 0.0, "{c}");
}

#[test]
fn plate_and_beam_second_order_forms() {
    let plate = lookup("reissner_mindlin").unwrap();
    let rm = plate
        .build(
            &Grid::cube(2, 8, 1.0 / 9.0, Bc::Dirichlet).unwrap(),
            &plate.default_params(),
        )
        .unwrap();
    let c = verify_second_order(&rm, 0.01, 60).unwrap();
    assert!(c.passed(), "{c}");
    let beam = lookup("timoshenko").unwrap();
    let tm = beam.build_default().unwrap();
    let c = verify_second_order(&tm, 0.01, 60).unwrap();
    assert!(c.passed(), "{c}");
    assert!(verify_second_order(&beam_free(), 0.01, 5).is_err());
}

fn beam_free() -> CatalogEntry {
    lookup("euler_bernoulli").unwrap().build_default().unwrap()
}

#[test]
fn plate_reduces_to_beam() {
    let report = verify_dimension_reduction(10, 4, 100).unwrap();
    assert!(report.passed(), "{report:?}");
}

#[test]
fn symmetric_axis_transport() {
    let g = Grid::new(vec![Axis::symmetric(16, 0.125).unwrap()]).unwrap();
    let law = transport_law(&g, &Coef::Scalar(1.0), &Coef::Scalar(2.0)).unwrap();
    let c = verify_transport_equivalence(&g, &law, 40).unwrap();
    assert!(c.passed(), "{c}");
}
