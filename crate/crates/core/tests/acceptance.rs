//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit status
//! if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use cavityspec_core::critical::{
    critical_point, critical_pump, open_dicke_fixed_point, stokes_shift_sweep, CriticalResult,
};
use cavityspec_core::fit::{linear_fit, power_law_fit};
use cavityspec_core::lattice::{compare_binned, LatticeSpec};
use cavityspec_core::matsubara::{variances, BathToggles, QuadraticForm};
use cavityspec_core::spectral::{cusp_coefficients, spectral_density};
use cavityspec_core::{
    dispersion, validate_and_derive, Branch, Channel, DerivedParams, Execution, PhysicalParams,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn fig1() -> PhysicalParams {
    PhysicalParams::default()
}

fn fig2() -> PhysicalParams {
    PhysicalParams {
        n_u: 0.016,
        beta: 1710.0,
        ..Default::default()
    }
}

fn open_dicke_limit() -> Outcome {
    let p = fig2();
    let root = critical_pump(&p, BathToggles::NAKED).unwrap();
    let (fixed, iterations) = open_dicke_fixed_point(&p).unwrap();
    let rel = ((root.pump - fixed) / fixed).abs();
    let near_quoted = (root.pump - 2.79e-2).abs() < 5e-5;
    Outcome {
        pass: rel < 1e-10 && near_quoted,
        detail: format!(
            "root {:.12e}, fixed point {:.12e} ({iterations} iterations), relative difference {rel:.2e}",
            root.pump, fixed
        ),
    }
}

fn stokes_shifts() -> Outcome {
    let base = fig2();
    let cases = [
        ("Fig. 2", base.clone(), 2.3e-4),
        ("Fig. S2 left", PhysicalParams { beta: 1.71, ..base.clone() }, 8.7e-2),
        (
            "Fig. S2 right",
            PhysicalParams {
                beta: 1.71,
                delta_c: 20.0,
                ..base.clone()
            },
            8.0e-2,
        ),
        (
            "Fig. S3",
            PhysicalParams {
                beta: 1.71,
                delta_c: 2000.0,
                kappa: 1250.0,
                ..base.clone()
            },
            2.6e-3,
        ),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    let mut finite_at_naked = None;
    for (name, p, quoted) in cases {
        let t = Instant::now();
        let r = critical_point(&p).unwrap();
        let ratio = r.rel_shift.abs() / quoted;
        if finite_at_naked.is_none() {
            // reported only: whether the dressed system is still stable at the naked threshold
            let q = p.with_pump(r.pump_naked);
            finite_at_naked = Some(variances(&q, BathToggles::FULL, Execution::Parallel).is_ok());
        }
        let ok = (0.5..=2.0).contains(&ratio) && t.elapsed() < Duration::from_secs(60);
        pass &= ok;
        parts.push(format!(
            "{name}: {:+.3e} vs {quoted:.1e} (ratio {ratio:.2}{})",
            r.rel_shift,
            if ok { "" } else { ", outside [0.5, 2]" }
        ));
    }
    Outcome {
        pass,
        detail: format!(
            "{}; Fig. 2 variances finite at the naked critical pump: {}",
            parts.join("; "),
            finite_at_naked.unwrap()
        ),
    }
}

/// Beliaev density divided by its cusp normalisation, at radial energy `w`.
fn reduced_density(ch: Channel, w: f64, d: &DerivedParams) -> (f64, f64) {
    let (omega, _) = dispersion(w, Branch::Beliaev, d).unwrap();
    let g = spectral_density(ch, omega, d, f64::INFINITY).unwrap();
    let norm = cusp_coefficients(ch, d).unwrap().norm;
    (omega, g / (d.prefactor * d.gamma(ch) * norm))
}

fn sub_ohmic_exponent() -> Outcome {
    let d = validate_and_derive(&fig1()).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for ch in Channel::ALL {
        let k = cusp_coefficients(ch, &d).unwrap();
        let limit = d.prefactor * d.gamma(ch) * k.norm * k.c;
        // (ω − ω₀) ∈ [1e-7, 1e-4]: ω − ω₀ ≈ √(2nU·W)
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for i in 0..=30 {
            let target = 1e-7 * 1e3f64.powf(i as f64 / 30.0);
            let w = target * target / (2.0 * d.n_u);
            let (omega, _) = dispersion(w, Branch::Beliaev, &d).unwrap();
            let g = spectral_density(ch, omega, &d, f64::INFINITY).unwrap();
            x.push(omega - d.omega_0);
            y.push(g - limit);
        }
        let slope = power_law_fit(&x, &y).unwrap().slope;
        let ok = (slope - 0.5).abs() <= 0.02;
        pass &= ok;
        parts.push(format!("{ch} {slope:.3}"));
    }
    Outcome {
        pass,
        detail: format!("log-log slopes of G − G(ω₀⁺) against ω − ω₀: {}", parts.join(", ")),
    }
}

fn cusp_limits() -> Outcome {
    let d = validate_and_derive(&fig1()).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for ch in Channel::ALL {
        let k = cusp_coefficients(ch, &d).unwrap();
        // Richardson extrapolation in h = √W, eliminating the h and h² terms
        let h = 1e-4;
        let f = |h: f64| reduced_density(ch, h * h, &d).1;
        let (f1, f2, f4) = (f(h), f(h / 2.0), f(h / 4.0));
        let r1 = 2.0 * f2 - f1;
        let r2 = 2.0 * f4 - f2;
        let limit = (4.0 * r2 - r1) / 3.0;
        let rel = ((limit - k.c) / k.c).abs();
        pass &= rel < 1e-6;
        parts.push(format!("{ch} {limit:.9} vs {:.9} ({rel:.1e})", k.c));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn oracle_equivalence() -> Outcome {
    let d = validate_and_derive(&fig1()).unwrap();
    let beta = f64::INFINITY;
    let coarse = LatticeSpec::disc(512).unwrap();
    let fine = LatticeSpec::disc(1024).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for branch in Branch::ALL {
        for ch in Channel::ALL {
            let a = compare_binned(ch, branch, &coarse, 32, &d, beta, Execution::Parallel).unwrap();
            let b = compare_binned(ch, branch, &fine, 32, &d, beta, Execution::Parallel).unwrap();
            let (da, db) = (a.max_rel_deviation, b.max_rel_deviation);
            let improves = db < da || (da == 0.0 && db == 0.0);
            pass &= da < 0.02 && improves;
            parts.push(format!("{branch}/{ch} {da:.2e}→{db:.2e}"));
        }
    }
    Outcome {
        pass,
        detail: format!("max bin deviation, scale 512→1024: {}", parts.join(", ")),
    }
}

fn free_oscillators() -> Outcome {
    let mut worst = 0.0f64;
    for omega in [0.5, 2.0, 20.0] {
        for beta in [1.0, 1.71, 1710.0] {
            let p = PhysicalParams {
                delta_c: omega,
                kappa: 0.0,
                beta,
                ..fig1()
            };
            let v = variances(&p, BathToggles::FREE, Execution::Parallel).unwrap();
            let exact = 1.0 / (2.0 * omega * (0.5 * beta * omega).tanh());
            worst = worst.max((v.q_c2 - exact).abs());
            // the atomic mode is free at its own ω₀
            let w0 = validate_and_derive(&p).unwrap().omega_0;
            let exact_a = 1.0 / (2.0 * w0 * (0.5 * beta * w0).tanh());
            worst = worst.max((v.q_a2 - exact_a).abs());
        }
    }
    Outcome {
        pass: worst < 1e-8,
        detail: format!("max |⟨q²⟩ − coth(βΩ/2)/(2Ω)| = {worst:.2e}"),
    }
}

fn divergence_consistency() -> Outcome {
    let p = fig2();
    let shifted = critical_pump(&p, BathToggles::FULL).unwrap().pump;
    let points = 50;
    let x: Vec<f64> = (0..points)
        .map(|i| 0.999 * i as f64 / (points - 1) as f64)
        .collect();
    let rows: Vec<(f64, f64)> = cavityspec_core::exec::map_slice(Execution::Parallel, &x, |&xi| {
        let q = p.with_pump(xi * shifted);
        let with = QuadraticForm::new(&q, BathToggles::FULL).unwrap().variances(Execution::Sequential).unwrap();
        let without = QuadraticForm::new(&q, BathToggles::NAKED).unwrap().variances(Execution::Sequential).unwrap();
        (with.q_c2 / without.q_c2 - 1.0, with.q_a2 / without.q_a2 - 1.0)
    });
    let mid = x.iter().position(|&v| v >= 0.5).unwrap();
    let upper = &rows[mid..];
    let increasing_c = upper.windows(2).all(|w| w[1].0 > w[0].0);
    let increasing_a = upper.windows(2).all(|w| w[1].1 > w[0].1);
    let last = rows[points - 1];
    let grows_c = last.0 > 10.0 * rows[mid].0;
    let grows_a = last.1 > 10.0 * rows[mid].1;
    let zero_at_origin = rows[0].0 == 0.0;
    Outcome {
        pass: increasing_c && increasing_a && grows_c && grows_a && zero_at_origin,
        detail: format!(
            "cavity {:.3e}→{:.3e}, atom {:.3e}→{:.3e} (x = {:.3} → 0.999); monotone {increasing_c}/{increasing_a}; cavity at ω̄_P = 0: {:e}",
            rows[mid].0, last.0, rows[mid].1, last.1, x[mid], rows[0].0
        ),
    }
}

fn sign_structure() -> Outcome {
    let d = validate_and_derive(&fig1()).unwrap();
    // grid uniform in √W so that the cusp region is resolved
    let n = 20_000;
    let mut changes = 0;
    let mut negative = [0usize; 4];
    let mut previous: Option<f64> = None;
    for i in 1..=n {
        let u = (0.5f64).sqrt() * i as f64 / n as f64;
        let w = (u * u).min(0.5);
        let (omega, _) = dispersion(w, Branch::Beliaev, &d).unwrap();
        let omega = omega.min(d.beliaev.hi * (1.0 - 1e-15));
        for ch in Channel::ALL {
            let g = spectral_density(ch, omega, &d, f64::INFINITY).unwrap();
            if ch == Channel::AC {
                if let Some(prev) = previous {
                    if (prev > 0.0) != (g > 0.0) {
                        changes += 1;
                    }
                }
                previous = Some(g);
            } else if g < 0.0 {
                negative[ch.index()] += 1;
            }
        }
    }
    let nonneg = negative.iter().all(|&c| c == 0);
    Outcome {
        pass: changes == 1 && nonneg,
        detail: format!("AC sign changes: {changes}; negative samples C/A/Adot: {}/{}/{}", negative[0], negative[2], negative[3]),
    }
}

fn stokes_linearity() -> Outcome {
    let grid: Vec<f64> = (1..=20).map(|k| 0.005 * k as f64).collect();
    let results: Vec<CriticalResult> = stokes_shift_sweep(&fig2(), &grid, Execution::Parallel)
        .into_iter()
        .map(|r| r.unwrap())
        .collect();
    let shifts: Vec<f64> = results.iter().map(|r| r.rel_shift).collect();
    let fit = linear_fit(&grid, &shifts).unwrap();
    // doubling nU in the linear regime: 0.025 → 0.05
    let ratio = shifts[9] / shifts[4];
    Outcome {
        pass: fit.r2 > 0.99,
        detail: format!(
            "nU ∈ [0.005, 0.1], 20 points: slope {:.4e}, R² = {:.5}; shift(0.05)/shift(0.025) = {ratio:.3}",
            fit.slope, fit.r2
        ),
    }
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome, Duration);
    let criteria: [Criterion; 9] = [
        ("open-dicke-limit", open_dicke_limit, Duration::from_secs(1)),
        ("stokes-shifts", stokes_shifts, Duration::from_secs(240)),
        ("sub-ohmic-exponent", sub_ohmic_exponent, Duration::from_secs(1)),
        ("cusp-limits", cusp_limits, Duration::from_secs(1)),
        ("oracle-equivalence", oracle_equivalence, Duration::from_secs(30)),
        ("free-oscillator", free_oscillators, Duration::from_secs(1)),
        ("divergence-consistency", divergence_consistency, Duration::from_secs(120)),
        ("sign-structure", sign_structure, Duration::from_secs(1)),
        ("stokes-linearity", stokes_linearity, Duration::from_secs(300)),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run, budget) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let outcome = run();
        let elapsed = t.elapsed();
        let in_time = elapsed <= budget;
        let pass = outcome.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "{} {name} [{:.2?} / {:?}{}]: {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed,
            budget,
            if in_time { "" } else { ", over budget" },
            outcome.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
