mod common;

use common::{random_qc, random_strain, rng, symmetric_strain};
use qcf_core::conjugate::{check_no_resultant, psi_e, psi_f, psi_f_hat, psi_g_hat};
use qcf_core::models::{force_qce, force_qcf};
use qcf_core::solvers::{equilibrium_defect, newton_solve};
use qcf_core::{lennard_jones, Centered, Load, PairPotential, QcGeometry, SolverConfig, Strain};

fn prefix_sums(f: &Centered<f64>) -> Centered<f64> {
    let mut acc = 0.0;
    f.map(|v| {
        acc += v;
        acc
    })
}

#[test]
fn conjugate_forces_are_left_sums_of_forces() {
    let lj = lennard_jones();
    let mut rng = rng(21);
    for _ in 0..100 {
        let g = random_qc(&mut rng, 4);
        let r = random_strain(&mut rng, g.n(), 0.9, 1.2);
        let e = psi_e(&lj, &g, &r).unwrap();
        let f = psi_f(&lj, &g, &r).unwrap();
        let qce = force_qce(&lj, &g, &r).unwrap();
        let qcf = force_qcf(&lj, &g, &r).unwrap();
        assert!(e.values.max_abs_diff(&prefix_sums(&qce.values)) < 1e-12);
        assert!(f.values.max_abs_diff(&prefix_sums(&qcf.values)) < 1e-12);
        assert!(e.differences().max_abs_diff(&qce.values) < 1e-12);
        assert!(f.differences().max_abs_diff(&qcf.values) < 1e-12);
        assert!((f.end_value() - qcf.sum()).abs() < 1e-12);
    }
}

#[test]
fn hat_tables_split_into_energy_and_ghost_parts() {
    let lj = lennard_jones();
    let mut rng = rng(22);
    for _ in 0..100 {
        let g = random_qc(&mut rng, 4);
        let r = random_strain(&mut rng, g.n(), 0.9, 1.2);
        let f = psi_f_hat(&lj, &g, &r).unwrap();
        let e = psi_e(&lj, &g, &r).unwrap();
        let h = psi_g_hat(&lj, &g, &r).unwrap();
        for j in f.values.indices() {
            assert!((f[j] - e[j] - h[j]).abs() < 1e-13);
        }
    }
}

#[test]
fn symmetric_strain_has_no_resultant_and_symmetric_tables() {
    let lj = lennard_jones();
    let mut rng = rng(23);
    for _ in 0..100 {
        let g = random_qc(&mut rng, 4);
        let r = symmetric_strain(&mut rng, g.n(), 0.9, 1.2);
        assert_eq!(check_no_resultant(&lj, &g, &r).unwrap(), 0.0);
        let f = psi_f(&lj, &g, &r).unwrap();
        let fh = psi_f_hat(&lj, &g, &r).unwrap();
        assert!(f.interior().max_abs_diff(&fh.interior()) < 1e-13);
        for psi in [
            fh,
            psi_e(&lj, &g, &r).unwrap(),
            psi_g_hat(&lj, &g, &r).unwrap(),
        ] {
            assert_eq!(psi.interior().symmetry_defect(), 0.0);
        }
    }
}

#[test]
fn resultant_of_a_right_interface_perturbation() {
    let lj = lennard_jones();
    let g = QcGeometry::uniform(9, 4).unwrap();
    for bump in [-0.03, 0.01, 0.05] {
        let mut v = vec![1.01; 19];
        v[9 + 4] += bump;
        let r = Strain::from_vec(v).unwrap();
        let bracket =
            |k: isize| 2.0 * lj.eta(2.0 * r[k]) - lj.eta(r[k] + r[k - 1]) - lj.eta(r[k] + r[k + 1]);
        let expected = -(bracket(4) - bracket(-4));
        assert!((check_no_resultant(&lj, &g, &r).unwrap() - expected).abs() < 1e-14);
    }
}

#[test]
fn equilibrium_forms_are_equivalent_at_a_solution() {
    let lj = lennard_jones();
    let g = QcGeometry::with_coarsening(12, 4, 2).unwrap();
    for tension in [-1.5, 0.4, 2.2] {
        let load = Load::end_tension(&g, tension).unwrap();
        let rep = newton_solve(&lj, &g, &load.phi, &SolverConfig::default()).unwrap();
        assert!(rep.converged());
        let r = &rep.strain;
        assert!(equilibrium_defect(&lj, &g, r, &load).unwrap() <= 1e-10);
        let f = psi_f(&lj, &g, r).unwrap();
        assert!(f.interior().max_abs_diff(&load.phi) <= 1e-10);
        assert!(f.end_value().abs() <= 1e-12);
    }
}
