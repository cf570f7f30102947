mod common;

use std::io::Write;
use std::time::{Duration, Instant};

use common::{
    close, fd_gradient, positions, random_chain, random_qc, random_strain, rng, symmetric_load,
    symmetric_strain,
};
use nalgebra::DMatrix;
use qcf_core::analysis::{contraction_bound, lj_contraction_region, lj_existence_region};
use qcf_core::conjugate::{conjugate, psi_e, psi_f, psi_f_hat, psi_g_hat, ConjugateKind};
use qcf_core::models::{
    energy_atomistic, energy_constrained, energy_local, energy_qce, force_atomistic,
    force_constrained, force_local, force_qce, force_qcf, nonconservativity_witness,
};
use qcf_core::solvers::{equilibrium_defect, jacobian, JacobianVariant, SolveStatus};
use qcf_core::{
    ghost_force_iteration, homotopy_solve, lennard_jones, newton_solve, Centered, ChainGeometry,
    CriticalRadii, Load, PairPotential, QcGeometry, SolverConfig, Strain,
};
use rand::Rng;

struct Criterion {
    number: usize,
    title: &'static str,
    checks: Vec<(String, bool)>,
}

impl Criterion {
    fn new(number: usize, title: &'static str) -> Self {
        Self {
            number,
            title,
            checks: Vec::new(),
        }
    }

    fn check(&mut self, what: impl Into<String>, ok: bool) {
        self.checks.push((what.into(), ok));
    }

    /// Prints the verdict past the test harness capture, then fails on any failed check.
    fn finish(self) {
        let failed: Vec<&str> = self
            .checks
            .iter()
            .filter(|c| !c.1)
            .map(|c| c.0.as_str())
            .collect();
        let verdict = if failed.is_empty() { "PASS" } else { "FAIL" };
        let mut line = format!("criterion {} [{}]: {verdict}", self.number, self.title);
        if !failed.is_empty() {
            line.push_str(&format!(" ({})", failed.join("; ")));
        }
        let mut out = std::io::stdout().lock();
        let _ = writeln!(out, "{line}");
        let _ = out.flush();
        assert!(failed.is_empty(), "{line}");
    }
}

fn neg(v: &Centered<f64>) -> Centered<f64> {
    v.map(|x| -x)
}

fn prefix_sums(f: &Centered<f64>) -> Centered<f64> {
    let mut acc = 0.0;
    f.map(|v| {
        acc += v;
        acc
    })
}

#[test]
fn criterion_1_critical_constants() {
    let mut c = Criterion::new(1, "critical constants");
    let lj = lennard_jones();
    let start = Instant::now();
    let radii = CriticalRadii::lennard_jones();
    let eta_hat_a1 = lj.eta_hat(radii.stability_limit);
    let elapsed = start.elapsed();
    let a1 = radii.stability_limit;
    let half = radii.half_curvature_zero();
    c.check(
        format!("a₁ = {a1} ∉ 1.1059 ± 5e-4"),
        (a1 - 1.1059).abs() <= 5e-4,
    );
    c.check(
        format!("r̃₂/2 = {half} ∉ 0.6085 ± 5e-4"),
        (half - 0.6085).abs() <= 5e-4,
    );
    c.check(
        format!("η̂(a₁) = {eta_hat_a1} ∉ 2.781 ± 5e-3"),
        (eta_hat_a1 - 2.781).abs() <= 5e-3,
    );
    c.check(
        format!("runtime {elapsed:?} ≥ 1 s"),
        elapsed < Duration::from_secs(1),
    );
    c.finish();
}

#[test]
fn criterion_2_ghost_force_table() {
    let mut c = Criterion::new(2, "ghost-force table");
    let lj = lennard_jones();
    let (n, k) = (8isize, 4isize);
    let g = QcGeometry::uniform(n as usize, k as usize).unwrap();
    let a = CriticalRadii::lennard_jones().zero_load;
    let r = Strain::uniform(n as usize, a).unwrap();
    let half = 0.5 * lj.eta(2.0 * a);
    let end = lj.eta(a) + 2.0 * lj.eta(2.0 * a);
    let expected = |j: isize| -> f64 {
        match j {
            _ if j == -n => end,
            _ if j == n + 1 => -end,
            _ if j == -k - 1 || j == -k + 2 || j == k || j == k + 1 => half,
            _ if j == -k || j == -k + 1 || j == k - 1 || j == k + 2 => -half,
            _ => 0.0,
        }
    };
    let qce = force_qce(&lj, &g, &r).unwrap();
    for j in -n..=n + 1 {
        c.check(
            format!("F^QCE row {j}: {} vs {}", qce[j], expected(j)),
            (qce[j] - expected(j)).abs() <= 1e-12,
        );
    }
    let qcf = force_qcf(&lj, &g, &r).unwrap();
    for j in -n + 1..=n {
        c.check(format!("F^QCF row {j} = {}", qcf[j]), qcf[j].abs() <= 1e-12);
    }
    c.finish();
}

#[test]
fn criterion_3_nonconservativity() {
    let mut c = Criterion::new(3, "nonconservativity");
    let lj = lennard_jones();
    let mut rng = rng(103);
    for _ in 0..50 {
        let g = random_qc(&mut rng, 3);
        let r = random_strain(&mut rng, g.n(), 0.9, 1.1);
        let z = positions(&g, &r, 0.0);
        let k = g.ki();
        let force = |z: &Centered<f64>, j: isize| {
            force_qcf(&lj, &g, &g.strain_from_positions(z).unwrap()).unwrap()[j]
        };
        let partial = |row: isize, col: isize| {
            let h = 1e-6;
            let mut zp = z.clone();
            zp[col] += h;
            let mut zm = z.clone();
            zm[col] -= h;
            (force(&zp, row) - force(&zm, row)) / (2.0 * h)
        };
        let (a, b) = nonconservativity_witness(&lj, &g, &r).unwrap();
        let rk = r[k];
        let scale = a.abs().max(b.abs()).max(1.0);
        c.check(
            format!("analytic ∂F_K/∂z_K+1 at r_K = {rk}"),
            (a - lj.eta_prime(rk)).abs() <= 1e-14 * scale,
        );
        c.check(
            format!("analytic ∂F_K+1/∂z_K at r_K = {rk}"),
            (b - (lj.eta_prime(rk) + 4.0 * lj.eta_prime(2.0 * rk))).abs() <= 1e-14 * scale,
        );
        c.check(
            format!("FD ∂F_K/∂z_K+1 at r_K = {rk}"),
            (partial(k, k + 1) - a).abs() <= 1e-6 * scale,
        );
        c.check(
            format!("FD ∂F_K+1/∂z_K at r_K = {rk}"),
            (partial(k + 1, k) - b).abs() <= 1e-6 * scale,
        );
    }
    for i in 1..1000 {
        let rk = 0.9 + 0.2 * i as f64 / 1000.0;
        let gap = 4.0 * lj.eta_prime(2.0 * rk);
        c.check(
            format!("4η'(2r_K) = 0 at r_K = {rk}"),
            gap != 0.0 && gap.is_finite(),
        );
    }
    c.finish();
}

#[test]
fn criterion_4_existence_region() {
    let mut c = Criterion::new(4, "existence region");
    let lj = lennard_jones();
    let start = Instant::now();
    let cert = lj_existence_region(1.0883).unwrap();
    c.check(
        format!("r_L = {} > 0.9701", cert.r_lower),
        cert.r_lower <= 0.9700 + 1e-4,
    );
    c.check(
        format!(
            "Φ interval ({}, {}) does not contain (−2.62, 2.62)",
            cert.phi_lo, cert.phi_hi
        ),
        cert.phi_lo <= -2.62 && cert.phi_hi >= 2.62,
    );

    let (n, k) = (12usize, 4usize);
    let g = QcGeometry::uniform(n, k).unwrap();
    let half_width = cert.symmetric_half_width;
    let mut rng = rng(104);
    let newton_cfg = SolverConfig::default();
    let homotopy_cfg = SolverConfig {
        certificate: Some(cert.clone()),
        ..SolverConfig::default()
    };
    for i in 0..20 {
        let phi = symmetric_load(&mut rng, n, -half_width, half_width);
        let load = Load::from_conjugate(&g, phi.clone()).unwrap();
        let newton = newton_solve(&lj, &g, &phi, &newton_cfg).unwrap();
        let homotopy = homotopy_solve(&lj, &g, &phi, &homotopy_cfg);
        c.check(
            format!("instance {i}: Newton {:?}", newton.status),
            newton.converged(),
        );
        let homotopy = match homotopy {
            Ok(rep) => rep,
            Err(e) => {
                c.check(format!("instance {i}: homotopy error {e}"), false);
                continue;
            }
        };
        c.check(
            format!("instance {i}: homotopy {:?}", homotopy.status),
            homotopy.converged(),
        );
        let diff = newton
            .strain
            .values()
            .max_abs_diff(homotopy.strain.values());
        c.check(
            format!("instance {i}: solvers differ by {diff:e}"),
            diff <= 1e-10,
        );
        for (name, rep) in [("Newton", &newton), ("homotopy", &homotopy)] {
            let defect = equilibrium_defect(&lj, &g, &rep.strain, &load).unwrap();
            c.check(
                format!("instance {i}: {name} ‖F^QCF + f‖∞ = {defect:e}"),
                defect <= 1e-10,
            );
        }
    }
    let elapsed = start.elapsed();
    c.check(
        format!("runtime {elapsed:?} ≥ 10 s"),
        elapsed < Duration::from_secs(10),
    );
    c.finish();
}

#[test]
fn criterion_5_contraction_region() {
    let mut c = Criterion::new(5, "contraction region");
    let lj = lennard_jones();
    let (cert, estimate) = lj_contraction_region(0.5, None).unwrap();
    c.check(
        format!("r_L = {} > 0.9706", cert.r_lower),
        cert.r_lower <= 0.9706,
    );
    c.check(
        format!("r_U = {} < 1.0771", cert.r_upper),
        cert.r_upper >= 1.0771,
    );
    c.check(
        format!(
            "Φ interval ({}, {}) does not contain (−2.56, 2.56)",
            cert.phi_lo, cert.phi_hi
        ),
        cert.phi_lo <= -2.56 && cert.phi_hi >= 2.56,
    );
    let tail = lj.eta_prime(2.0 * cert.r_lower).abs();
    let bound = 8.0 * tail / (lj.eta_prime(cert.r_upper) - 5.0 * tail);
    c.check(format!("bound {bound} > 0.5"), bound > 0.0 && bound <= 0.5);
    c.check(
        "reported bound disagrees with the formula",
        (estimate.bound - bound).abs() <= 1e-14
            && (contraction_bound(&lj, cert.r_lower, cert.r_upper) - bound).abs() <= 1e-14,
    );

    let half_width = cert.symmetric_half_width;
    let mut rng = rng(105);
    for i in 0..20 {
        let g = random_qc(&mut rng, 3);
        let phi = symmetric_load(&mut rng, g.n(), -half_width, half_width);
        let cfg = SolverConfig {
            certificate: Some(cert.clone()),
            initial_strain: Some(symmetric_strain(
                &mut rng,
                g.n(),
                cert.r_lower,
                cert.r_upper,
            )),
            ..SolverConfig::default()
        };
        let rep = ghost_force_iteration(&lj, &g, &phi, &cfg).unwrap();
        c.check(
            format!("instance {i}: GFI {:?}", rep.status),
            rep.converged(),
        );
        c.check(
            format!("instance {i}: no ratios recorded"),
            rep.ratios_to_limit().count() > 0,
        );
        for ratio in rep.ratios_to_limit() {
            c.check(
                format!("instance {i}: ratio {ratio} > 0.5 + 1e-9"),
                ratio <= 0.5 + 1e-9,
            );
        }
        c.check(
            format!("instance {i}: history leaves the box"),
            rep.all_in_box() == Some(true),
        );
        for (n, r) in rep.iterates.iter().enumerate() {
            c.check(
                format!("instance {i}: iterate {n} outside the box"),
                cert.contains_strain(r),
            );
        }
    }
    c.finish();
}

#[test]
fn criterion_6_constrained_partition() {
    let mut c = Criterion::new(6, "constrained-model partition");
    let lj = lennard_jones();
    let mut rng = rng(106);
    for i in 0..200 {
        let g = random_chain(&mut rng, 10, 4);
        let r = random_strain(&mut rng, g.n(), 0.85, 1.3);
        let z = positions(&g, &r, rng.gen_range(-5.0..5.0));
        let partition = energy_constrained(&lj, &g, &z).unwrap();
        let direct = energy_atomistic(&lj, &g.interpolate_positions(&z).unwrap()).unwrap();
        c.check(
            format!("geometry {i}: {partition} vs {direct}"),
            (partition - direct).abs() <= 1e-12 * direct.abs().max(1.0),
        );
    }
    c.finish();
}

fn conjugate_kind(v: JacobianVariant) -> ConjugateKind {
    match v {
        JacobianVariant::FHat => ConjugateKind::FHat,
        JacobianVariant::E => ConjugateKind::E,
        JacobianVariant::GHat => ConjugateKind::GHat,
        JacobianVariant::Local => ConjugateKind::Local,
    }
}

fn fd_jacobian(g: &QcGeometry, r: &Strain, v: JacobianVariant) -> DMatrix<f64> {
    let lj = lennard_jones();
    let n = g.ni();
    let size = g.strain_len();
    let h = 1e-6;
    let eval = |x: &Centered<f64>| {
        conjugate(&lj, g, &Strain::new(x.clone()).unwrap(), conjugate_kind(v))
            .unwrap()
            .interior()
    };
    let mut m = DMatrix::zeros(size, size);
    for col in -n..=n {
        let mut x = r.values().clone();
        x[col] += h;
        let plus = eval(&x);
        x[col] -= 2.0 * h;
        let minus = eval(&x);
        for row in -n..=n {
            m[((row + n) as usize, (col + n) as usize)] = (plus[row] - minus[row]) / (2.0 * h);
        }
    }
    m
}

#[test]
fn criterion_7_gradient_suite() {
    let mut c = Criterion::new(7, "gradient suite");
    let lj = lennard_jones();
    let (h, tol) = (1e-6, 1e-6);
    let mut rng = rng(107);
    for i in 0..200 {
        let n = rng.gen_range(1..=10);
        let g = ChainGeometry::atomistic(n).unwrap();
        let r = random_strain(&mut rng, n, 0.9, 1.2);
        let y = positions(&g, &r, rng.gen_range(-3.0..3.0));
        let grad = fd_gradient(&y, h, |y| energy_atomistic(&lj, y).unwrap());
        let f = force_atomistic(&lj, &r);
        c.check(
            format!("atomistic state {i}"),
            close(&f.values, &neg(&grad), tol),
        );
    }
    for i in 0..200 {
        let g = random_chain(&mut rng, 10, 4);
        let r = random_strain(&mut rng, g.n(), 0.9, 1.2);
        let z = positions(&g, &r, 0.0);
        let grad = fd_gradient(&z, h, |z| energy_constrained(&lj, &g, z).unwrap());
        let f = force_constrained(&lj, &g, &r).unwrap();
        c.check(
            format!("constrained state {i}"),
            close(&f.values, &neg(&grad), tol),
        );
    }
    for i in 0..200 {
        let g = random_chain(&mut rng, 10, 4);
        let r = random_strain(&mut rng, g.n(), 0.9, 1.2);
        let z = positions(&g, &r, 0.0);
        let grad = fd_gradient(&z, h, |z| {
            energy_local(&lj, &g, &g.strain_from_positions(z).unwrap()).unwrap()
        });
        let f = force_local(&lj, &g, &r).unwrap();
        c.check(
            format!("local state {i}"),
            close(&f.values, &neg(&grad), tol),
        );
    }
    for i in 0..200 {
        let g = random_qc(&mut rng, 4);
        let r = random_strain(&mut rng, g.n(), 0.9, 1.2);
        let z = positions(&g, &r, 0.0);
        let grad = fd_gradient(&z, h, |z| {
            energy_qce(&lj, &g, &g.strain_from_positions(z).unwrap()).unwrap()
        });
        let f = force_qce(&lj, &g, &r).unwrap();
        c.check(
            format!("energy-based QC state {i}"),
            close(&f.values, &neg(&grad), tol),
        );
    }
    for i in 0..50 {
        let g = random_qc(&mut rng, 3);
        let r = random_strain(&mut rng, g.n(), 0.9, 1.2);
        for v in [
            JacobianVariant::FHat,
            JacobianVariant::E,
            JacobianVariant::GHat,
        ] {
            let a = jacobian(&lj, &g, &r, v).unwrap();
            let b = fd_jacobian(&g, &r, v);
            c.check(
                format!("{v:?} Jacobian state {i}"),
                (&a - b).amax() <= tol * a.amax().max(1.0),
            );
        }
    }
    c.finish();
}

#[test]
fn criterion_8_symmetry() {
    let mut c = Criterion::new(8, "symmetry");
    let lj = lennard_jones();
    let (cert, _) = lj_contraction_region(0.5, None).unwrap();
    let geometries = [
        QcGeometry::uniform(8, 4).unwrap(),
        QcGeometry::with_coarsening(12, 4, 2).unwrap(),
        QcGeometry::with_coarsening(10, 3, 3).unwrap(),
    ];
    for g in &geometries {
        for tension in [-2.0, -0.7, 0.3, 1.5, 2.4] {
            let load = Load::end_tension(g, tension).unwrap();
            let label = format!("N = {}, K = {}, T = {tension}", g.n(), g.k());
            c.check(
                format!("{label}: Φ not symmetric"),
                load.phi.symmetry_defect() == 0.0,
            );
            let newton = newton_solve(&lj, g, &load.phi, &SolverConfig::default()).unwrap();
            c.check(
                format!("{label}: Newton {:?}", newton.status),
                newton.converged(),
            );
            let defect = newton.strain.values().symmetry_defect();
            c.check(
                format!("{label}: Newton solution defect {defect:e}"),
                defect <= 1e-13,
            );
            let cfg = SolverConfig {
                certificate: Some(cert.clone()),
                ..SolverConfig::default()
            };
            let gfi = ghost_force_iteration(&lj, g, &load.phi, &cfg).unwrap();
            c.check(format!("{label}: GFI {:?}", gfi.status), gfi.converged());
            for (n, r) in gfi.iterates.iter().enumerate() {
                let defect = r.values().symmetry_defect();
                c.check(
                    format!("{label}: GFI iterate {n} defect {defect:e}"),
                    defect <= 1e-13,
                );
            }
        }
    }
    c.finish();
}

#[test]
fn criterion_9_conjugate_identities() {
    let mut c = Criterion::new(9, "conjugate identities");
    let lj = lennard_jones();
    let mut rng = rng(109);
    let mut solved = 0;
    for i in 0..40 {
        let g = random_qc(&mut rng, 3);
        let load = if i % 2 == 0 {
            Load::end_tension(&g, rng.gen_range(-2.5..2.5)).unwrap()
        } else {
            let phi = symmetric_load(&mut rng, g.n(), -2.5, 2.5);
            Load::from_conjugate(&g, phi).unwrap()
        };
        let rep = newton_solve(&lj, &g, &load.phi, &SolverConfig::default()).unwrap();
        if rep.status != SolveStatus::Converged {
            c.check(format!("instance {i}: Newton {:?}", rep.status), false);
            continue;
        }
        solved += 1;
        let r = &rep.strain;
        let qce = force_qce(&lj, &g, r).unwrap();
        let qcf = force_qcf(&lj, &g, r).unwrap();
        let e = psi_e(&lj, &g, r).unwrap();
        let f = psi_f(&lj, &g, r).unwrap();
        c.check(
            format!("instance {i}: ψ^E is not the prefix sum of F^QCE"),
            e.values.max_abs_diff(&prefix_sums(&qce.values)) <= 1e-12,
        );
        c.check(
            format!("instance {i}: ψ^F is not the prefix sum of F^QCF"),
            f.values.max_abs_diff(&prefix_sums(&qcf.values)) <= 1e-12,
        );
        c.check(
            format!("instance {i}: differences of ψ^E are not F^QCE"),
            e.differences().max_abs_diff(&qce.values) <= 1e-12,
        );
        c.check(
            format!("instance {i}: differences of ψ^F are not F^QCF"),
            f.differences().max_abs_diff(&qcf.values) <= 1e-12,
        );
        let fh = psi_f_hat(&lj, &g, r).unwrap();
        let gh = psi_g_hat(&lj, &g, r).unwrap();
        let split = fh
            .values
            .indices()
            .map(|j| (fh[j] - e[j] - gh[j]).abs())
            .fold(0.0, f64::max);
        c.check(
            format!("instance {i}: ψ̂^F − ψ̂^E − ψ̂^G = {split:e}"),
            split <= 1e-12,
        );
        c.check(
            format!("instance {i}: ψ^F_N+1 = {:e}", f.end_value()),
            f.end_value().abs() <= 1e-12,
        );
        c.check(
            format!("instance {i}: ψ^F and ψ̂^F differ at equilibrium"),
            f.interior().max_abs_diff(&fh.interior()) <= 1e-12,
        );
    }
    c.check(format!("only {solved} instances solved"), solved >= 20);
    c.finish();
}
