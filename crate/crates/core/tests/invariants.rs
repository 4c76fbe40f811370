use cavityspec_core::critical::critical_pump;
use cavityspec_core::fit::power_law_fit;
use cavityspec_core::matsubara::{BathToggles, QuadraticForm};
use cavityspec_core::spectral::{cusp_coefficients, spectral_density};
use cavityspec_core::{dispersion, validate_and_derive, Branch, Channel, Execution, PhysicalParams};

fn fig2() -> PhysicalParams {
    PhysicalParams {
        n_u: 0.016,
        beta: 1710.0,
        ..Default::default()
    }
}

/// Above the cusp the densities approach their limit as √W.
#[test]
fn cusp_approach_is_square_root_in_radial_energy() {
    let d = validate_and_derive(&PhysicalParams::default()).unwrap();
    for ch in Channel::ALL {
        let k = cusp_coefficients(ch, &d).unwrap();
        let limit = d.prefactor * d.gamma(ch) * k.norm * k.c;
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for i in 0..=20 {
            let w = 1e-9 * 1e3f64.powf(i as f64 / 20.0);
            let (omega, _) = dispersion(w, Branch::Beliaev, &d).unwrap();
            x.push(w);
            y.push(spectral_density(ch, omega, &d, f64::INFINITY).unwrap() - limit);
        }
        let slope = power_law_fit(&x, &y).unwrap().slope;
        assert!((slope - 0.5).abs() < 0.02, "{ch}: {slope}");
    }
}

#[test]
fn matsubara_matrix_is_positive_below_threshold() {
    let p = fig2();
    let pcr = critical_pump(&p, BathToggles::FULL).unwrap().pump;
    let form = QuadraticForm::new(&p.with_pump(0.9 * pcr), BathToggles::FULL).unwrap();
    for n in [0usize, 1, 2, 5, 10, 100, 1000, 10_000] {
        let nu = 2.0 * std::f64::consts::PI * n as f64 / p.beta;
        let m = form.matrix(nu);
        assert!(m.min_eigenvalue() > 0.0, "n = {n}");
        assert!(m.m_aa > 0.0);
    }
}

#[test]
fn truncation_tail_is_converged() {
    let p = fig2().with_pump(0.02);
    let short = QuadraticForm::new(&p, BathToggles::FULL).unwrap().variances(Execution::Parallel).unwrap();
    let long_params = PhysicalParams { n_max: 100_000, ..p };
    let long = QuadraticForm::new(&long_params, BathToggles::FULL)
        .unwrap()
        .variances(Execution::Parallel)
        .unwrap();
    assert!(((short.q_c2 - long.q_c2) / long.q_c2).abs() < 1e-7);
    assert!(((short.q_a2 - long.q_a2) / long.q_a2).abs() < 1e-7);
}

#[test]
fn bath_raises_both_variances() {
    let p = fig2().with_pump(0.02);
    let with = QuadraticForm::new(&p, BathToggles::FULL).unwrap().variances(Execution::Parallel).unwrap();
    let without = QuadraticForm::new(&p, BathToggles::NAKED).unwrap().variances(Execution::Parallel).unwrap();
    assert!(with.q_c2 > without.q_c2);
    assert!(with.q_a2 > without.q_a2);
}

#[test]
fn critical_root_stays_between_scan_bounds() {
    for beta in [1.71, 1710.0, f64::INFINITY] {
        let p = PhysicalParams { beta, ..fig2() };
        let root = critical_pump(&p, BathToggles::FULL).unwrap();
        assert!(root.pump > 0.0 && root.pump < p.delta_c);
        assert!(root.residual.abs() < 1e-10);
    }
}

#[test]
fn overdamped_cavity_sum_converges() {
    let p = PhysicalParams {
        delta_c: 2000.0,
        kappa: 1250.0,
        beta: 1.71,
        ..fig2()
    };
    let pcr = critical_pump(&p, BathToggles::FULL).unwrap().pump;
    for x in [0.0, 0.5, 0.99] {
        let v = QuadraticForm::new(&p.with_pump(x * pcr), BathToggles::FULL)
            .unwrap()
            .variances(Execution::Parallel)
            .unwrap();
        assert!(((v.q_a2 - v.refined_q_a2) / v.q_a2).abs() < 1e-9);
    }
}
