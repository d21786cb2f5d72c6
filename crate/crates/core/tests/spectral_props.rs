mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use resolvent_lab::generate::random_isometry;
use resolvent_lab::numkernel::{c64, hermitian_eigen, max_abs, CMatrix, ZERO};
use resolvent_lab::random::{self, haar_unitary, uniform};
use resolvent_lab::resolvents::{dilation_boundary_parameter, dilation_parameter};
use resolvent_lab::spectral::{
    boundary_probe, decomposition_check, eigen_vector_structure, gap_report, spectral_measure, w_zeta, AtomKind,
    GapOperator, Region,
};
use resolvent_lab::Point;

use common::{iso_case, iso_case_proper, sym_case, tol};

fn check_atoms(atoms: &resolvent_lab::spectral::SpectralAtoms, n: usize) -> Result<(), TestCaseError> {
    let locs = atoms.locations();
    prop_assert!(!atoms.atoms.is_empty());
    prop_assert!(locs.windows(2).all(|w| w[0] < w[1]));
    prop_assert!(atoms.completeness_defect(n) < 1e-9);
    for a in &atoms.atoms {
        let (vals, _) = hermitian_eigen(&a.weight);
        prop_assert!(vals.iter().all(|&x| x > -1e-10));
        prop_assert!(max_abs(&(&a.weight - a.weight.adjoint())) < 1e-10);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn isometric_atoms_are_a_resolution_of_identity(seed in any::<u64>()) {
        let (v, model) = iso_case(seed);
        let atoms = spectral_measure(&model, &tol()).unwrap();
        prop_assert_eq!(atoms.kind, AtomKind::Circle);
        prop_assert!(atoms.locations().iter().all(|&t| (0.0..std::f64::consts::TAU).contains(&t)));
        check_atoms(&atoms, v.ambient_dim())?;
    }

    #[test]
    fn symmetric_atoms_are_a_resolution_of_identity(seed in any::<u64>()) {
        let c = sym_case(seed, seed % 2 == 0);
        let atoms = spectral_measure(&c.model, &tol()).unwrap();
        prop_assert_eq!(atoms.kind, AtomKind::Line);
        check_atoms(&atoms, c.a.ambient_dim())?;
    }

    #[test]
    fn w_zeta_is_isometric(seed in any::<u64>(), n in 1usize..8, d in 0usize..7) {
        let mut rng = random::rng(seed);
        let v = random_isometry(&mut rng, n, d.min(n - 1));
        let zeta = Complex64::from_polar(1.0, uniform(&mut rng, 0.0, std::f64::consts::TAU));
        let w = w_zeta(&v, zeta, &tol()).unwrap();
        prop_assert!(w.isometry_defect() < 1e-10);
        let n0 = v.defect(Point::Finite(ZERO), &tol()).n_space;
        prop_assert_eq!(w.dim(), n0.dim());
    }

    #[test]
    fn generic_isometries_split_the_space(seed in any::<u64>(), n in 1usize..8, d in 0usize..7) {
        let mut rng = random::rng(seed);
        let v = random_isometry(&mut rng, n, d.min(n - 1));
        let zeta = Complex64::from_polar(1.0, uniform(&mut rng, 0.0, std::f64::consts::TAU));
        let check = decomposition_check(&v, zeta, &tol()).unwrap();
        prop_assert!(check.dom_split && check.ran_split);
    }

    #[test]
    fn eigenvectors_of_the_extension_live_in_the_defect(seed in any::<u64>(), n in 1usize..7, d in 0usize..6) {
        let mut rng = random::rng(seed);
        let v = random_isometry(&mut rng, n, d.min(n - 1));
        let n0 = v.defect(Point::Finite(ZERO), &tol()).n_space;
        let ninf = v.defect(Point::Infinity, &tol()).n_space;
        let c = haar_unitary(&mut rng, n0.dim());
        let vc = v.full() + ninf.basis() * &c * n0.basis().adjoint();
        let parts = resolvent_lab::numkernel::eig_normal(&vc, resolvent_lab::numkernel::NormalKind::Unitary, &tol()).unwrap();
        let mu = parts[0].value;
        let data = eigen_vector_structure(&v, &c, mu.conj(), &tol()).unwrap();
        let data = data.expect("eigenvalue hit");
        prop_assert!(data.eigen_residual < 1e-9);
        prop_assert!(data.defect_residual < 1e-9);
        prop_assert!(data.parameter_identity < 1e-9 && data.operator_identity < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn probe_agrees_with_gap_verdict(seed in any::<u64>(), start in 0.0f64..5.5, len in 0.3f64..2.0) {
        let (v, model) = iso_case_proper(seed);
        let end = (start + len).min(std::f64::consts::TAU - 0.01);
        let region = Region::arc(start, end).unwrap();
        let atoms = spectral_measure(&model, &tol()).unwrap();
        // Atoms sitting on the region boundary are a matter of convention, not of continuation.
        prop_assume!(atoms.locations().iter().all(|&t| (t - start).abs() > 0.05 && (t - end).abs() > 0.05));
        let param = dilation_parameter(&model, &tol()).unwrap();
        let gap = gap_report(&GapOperator::Isometric { v, z0: ZERO }, &param, &region, 64, &tol()).unwrap();
        let probe = boundary_probe(&model, &region, 64, &tol()).unwrap();
        prop_assert_eq!(gap.analytic, probe.bounded);
        prop_assert_eq!(gap.analytic, atoms.in_region(&region).is_empty());
    }

    #[test]
    fn symmetric_gap_verdict_matches_atoms(seed in any::<u64>(), lo in -3.0f64..2.0, len in 0.3f64..2.5) {
        let c = sym_case(seed, seed % 2 == 1);
        let atoms = spectral_measure(&c.model, &tol()).unwrap();
        let hi = lo + len;
        prop_assume!(atoms.locations().iter().all(|&t| (t - lo).abs() > 0.05 && (t - hi).abs() > 0.05));
        let region = Region::interval(lo, hi).unwrap();
        let param = dilation_boundary_parameter(&c.model, c.lambda0, &tol()).unwrap();
        let op = GapOperator::Symmetric { a: c.a.clone(), lambda0: c.lambda0 };
        match gap_report(&op, &param, &region, 64, &tol()) {
            Ok(gap) => prop_assert_eq!(gap.analytic, atoms.in_region(&region).is_empty()),
            // Eigenvalues of A itself are atoms too.
            Err(resolvent_lab::Error::NotRegularType { .. }) => prop_assert!(!atoms.in_region(&region).is_empty()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }
}

#[test]
fn atom_integral_recovers_the_resolvent_at_the_origin() {
    for seed in 0..10 {
        let (v, model) = iso_case(seed);
        let atoms = spectral_measure(&model, &tol()).unwrap();
        let n = v.ambient_dim();
        let at_zero = atoms.integral(n, ZERO);
        assert!(max_abs(&(at_zero - CMatrix::identity(n, n))) < 1e-9);
        let z = c64(0.2, -0.3);
        let r = resolvent_lab::resolvents::ResolventModel::dilation(model, tol()).unwrap();
        assert!(max_abs(&(atoms.integral(n, z) - r.eval(z).unwrap())) < 1e-10);
    }
}
