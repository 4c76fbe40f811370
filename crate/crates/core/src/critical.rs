//! Dicke critical pump strength with and without quasiparticle baths.
//!
//! The critical point is the zero of det M(0) as a function of the pump. Every
//! pump-dependent quantity (ω₀, φ₀, λ, supports, spectral densities) is
//! re-derived at each trial pump, so the baths enter self-consistently.

use crate::error::{Error, Result};
use crate::exec::{map_slice, Execution};
use crate::kernel::KERNEL_TOL;
use crate::matsubara::{BathToggles, QuadraticForm};
use crate::model::{validate_and_derive, PhysicalParams};
use crate::spectral::Channel;

/// Absolute tolerance on the critical pump, in ω_R.
pub const PUMP_TOL: f64 = 1e-12;
/// Bound on |det M(0)|/((Δ_C² + κ²) ω₀²) at an accepted root.
pub const DET_TOL: f64 = 1e-10;
/// Kernel tolerance used while polishing a root.
pub const ROOT_KERNEL_TOL: f64 = KERNEL_TOL / 100.0;

/// det M(0) at the given pump, all quantities re-derived there.
pub fn det_zero(pump: f64, params: &PhysicalParams, toggles: BathToggles) -> Result<f64> {
    det_zero_with(pump, params, toggles, KERNEL_TOL).map(|(d, _)| d)
}

/// det M(0) and the normalisation (Δ_C² + κ²)·ω₀².
fn det_zero_with(
    pump: f64,
    params: &PhysicalParams,
    toggles: BathToggles,
    tol: f64,
) -> Result<(f64, f64)> {
    let form = QuadraticForm::with_tolerance(&params.with_pump(pump), toggles, tol)?;
    let kappa = if toggles.cavity_loss { params.kappa } else { 0.0 };
    let w0 = form.derived.omega_0;
    let norm = (params.delta_c * params.delta_c + kappa * kappa) * w0 * w0;
    Ok((form.static_matrix().det(), norm))
}

/// Root of det M(0) with solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Root {
    pub pump: f64,
    /// det M(0)/((Δ_C² + κ²) ω₀²) at `pump`.
    pub residual: f64,
    /// Number of determinant evaluations.
    pub evaluations: usize,
    /// Whether the coarse scan had to be replaced by a dense one.
    pub dense_scan: bool,
}

fn scan_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (0..=24).map(|k| 10f64.powf(-6.0 + k as f64 / 4.0)).collect();
    // approach 2 geometrically from below
    grid.extend((1..=24).map(|k| 2.0 - 10f64.powf(-(k as f64) / 4.0)));
    grid
}

/// Critical pump: geometric scan for a sign change of det M(0), bisection,
/// then secant steps kept inside the bracket.
///
/// The scanned determinant is checked to decrease monotonically up to the
/// bracket; otherwise a dense linear scan is merged in and its first sign
/// change is used.
pub fn critical_pump(params: &PhysicalParams, toggles: BathToggles) -> Result<Root> {
    params.validate()?;
    let eval = |p: f64, tol: f64| -> Result<f64> {
        let (d, n) = det_zero_with(p, params, toggles, tol)?;
        Ok(d / n)
    };
    let mut grid = scan_grid();
    let mut values = grid
        .iter()
        .map(|&p| eval(p, KERNEL_TOL))
        .collect::<Result<Vec<_>>>()?;
    let mut evaluations = grid.len();
    let mut dense_scan = false;
    let monotone = first_sign_change(&values)
        .filter(|&i| values[..=i + 1].windows(2).all(|w| w[1] < w[0]));
    let i = match monotone {
        Some(i) => i,
        None => {
            dense_scan = true;
            let dense: Vec<f64> = (1..400).map(|k| 2.0 * k as f64 / 400.0).collect();
            let mut merged: Vec<(f64, f64)> = grid.iter().copied().zip(values.iter().copied()).collect();
            for &p in &dense {
                merged.push((p, eval(p, KERNEL_TOL)?));
            }
            evaluations += dense.len();
            merged.sort_by(|a, b| a.0.total_cmp(&b.0));
            merged.dedup_by(|a, b| a.0 == b.0);
            (grid, values) = merged.into_iter().unzip();
            first_sign_change(&values).ok_or_else(|| {
                let trace: Vec<String> = grid
                    .iter()
                    .zip(&values)
                    .map(|(p, d)| format!("{p:.3e}:{d:+.3e}"))
                    .collect();
                Error::NoRoot(format!(
                    "det M(0) has no sign change on (0, 2); scan {}",
                    trace.join(" ")
                ))
            })?
        }
    };
    let mut root = polish(grid[i], grid[i + 1], &eval)?;
    root.evaluations += evaluations;
    root.dense_scan = dense_scan;
    Ok(root)
}

fn first_sign_change(values: &[f64]) -> Option<usize> {
    (0..values.len().saturating_sub(1)).find(|&i| values[i] > 0.0 && values[i + 1] <= 0.0)
}

fn polish<F>(mut lo: f64, mut hi: f64, eval: &F) -> Result<Root>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    let mut count = 0;
    while hi - lo > 1e-4 * hi {
        let mid = 0.5 * (lo + hi);
        count += 1;
        if eval(mid, ROOT_KERNEL_TOL)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut f_lo = eval(lo, ROOT_KERNEL_TOL)?;
    let mut f_hi = eval(hi, ROOT_KERNEL_TOL)?;
    count += 2;
    let mut best = if f_lo.abs() < f_hi.abs() { (lo, f_lo) } else { (hi, f_hi) };
    // Illinois variant of regula falsi: halve the stale end's value when the
    // same end is retained twice
    let mut side = 0i8;
    for _ in 0..200 {
        if best.1 == 0.0 || (hi - lo <= PUMP_TOL && best.1.abs() < DET_TOL) {
            break;
        }
        let mut x = hi - f_hi * (hi - lo) / (f_hi - f_lo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let f = eval(x, ROOT_KERNEL_TOL)?;
        count += 1;
        if f.abs() < best.1.abs() {
            best = (x, f);
        }
        if f > 0.0 {
            lo = x;
            f_lo = f;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            f_hi = f;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
        if x == lo && x == hi {
            break;
        }
    }
    if best.1.abs() >= DET_TOL {
        return Err(Error::non_convergence(
            "critical_pump",
            format!("normalised det M(0) = {:e} at ω̄_P = {}", best.1, best.0),
        ));
    }
    Ok(Root {
        pump: best.0,
        residual: best.1,
        evaluations: count,
        dense_scan: false,
    })
}

/// Closed-form open-Dicke threshold without quasiparticle baths:
/// `U₀ ω̄_P = (Δ_C² + κ²)(2 − ω̄_P + 2nU)/(4 Δ_C N_C)` solved for ω̄_P.
pub fn open_dicke_closed_form(params: &PhysicalParams) -> f64 {
    let loss = params.delta_c * params.delta_c + params.kappa * params.kappa;
    loss * (2.0 + 2.0 * params.n_u) / (4.0 * params.delta_c * params.n_c * params.u0_mag + loss)
}

/// Open-Dicke threshold as the fixed point of
/// `λ² = (Δ_C² + κ²) ω₀ / (4 Δ_C N_C φ₀²)` with ω₀, φ₀ re-derived at each
/// iterate. Secant-accelerated so that it also converges when the plain
/// iteration would not contract. Returns the pump and the iteration count.
pub fn open_dicke_fixed_point(params: &PhysicalParams) -> Result<(f64, usize)> {
    let loss = params.delta_c * params.delta_c + params.kappa * params.kappa;
    let map = |p: f64| -> Result<f64> {
        let d = validate_and_derive(&params.with_pump(p))?;
        let lambda_sq = loss * d.omega_0 / (4.0 * params.delta_c * params.n_c * d.phi_0 * d.phi_0);
        Ok(lambda_sq / params.u0_mag)
    };
    let residual = |p: f64| -> Result<f64> { Ok(map(p)? - p) };
    let mut x0 = 0.0;
    let mut r0 = residual(x0)?;
    let mut x1 = map(0.0)?.min(1.999_999);
    for it in 1..=100 {
        let r1 = residual(x1)?;
        if r1 == 0.0 || (x1 - x0).abs() <= 1e-15 * x1.abs() {
            return Ok((x1, it));
        }
        let x2 = (x1 - r1 * (x1 - x0) / (r1 - r0)).clamp(0.0, 1.999_999_999);
        x0 = x1;
        r0 = r1;
        x1 = x2;
    }
    Err(Error::non_convergence("open_dicke_fixed_point", "no convergence in 100 iterations"))
}

/// Critical points with and without quasiparticle baths.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalResult {
    pub n_u: f64,
    pub pump_naked: f64,
    pub pump_shifted: f64,
    /// (pump_shifted − pump_naked)/pump_naked.
    pub rel_shift: f64,
    /// λ at the shifted critical pump.
    pub lambda_cr: f64,
    pub naked: Root,
    pub shifted: Root,
}

/// Solves for the naked and the bath-dressed critical pump.
pub fn critical_point(params: &PhysicalParams) -> Result<CriticalResult> {
    let naked = critical_pump(params, BathToggles::NAKED)?;
    let shifted = critical_pump(params, BathToggles::FULL)?;
    Ok(CriticalResult {
        n_u: params.n_u,
        pump_naked: naked.pump,
        pump_shifted: shifted.pump,
        rel_shift: (shifted.pump - naked.pump) / naked.pump,
        lambda_cr: (params.u0_mag * shifted.pump).sqrt(),
        naked,
        shifted,
    })
}

/// Critical points along a grid of interaction energies. Failures are kept
/// per point; the sweep itself always completes.
pub fn stokes_shift_sweep(
    params: &PhysicalParams,
    n_u_grid: &[f64],
    exec: Execution,
) -> Vec<Result<CriticalResult>> {
    map_slice(exec, n_u_grid, |&n_u| critical_point(&params.with_n_u(n_u)))
}

/// Right-hand side of the implicit threshold condition
///
/// ```text
/// λ² = (Δ_C² + κ²)/Δ_C · (ω₀ − R_A) / (R̃_C (ω₀ − R_A) + (2φ₀√N_C − R̃_AC)²)
/// ```
///
/// with R_x = ξ_x(0), R̃_C = R_C/λ² and R̃_AC = R_AC/λ, evaluated at `pump`.
pub fn implicit_lambda_sq(pump: f64, params: &PhysicalParams) -> Result<f64> {
    let form = QuadraticForm::with_tolerance(&params.with_pump(pump), BathToggles::FULL, ROOT_KERNEL_TOL)?;
    let d = &form.derived;
    let r = form.measure().expect("baths are on").reorganization();
    let lambda = d.lambda;
    let r_c = r[Channel::C.index()] / (lambda * lambda);
    let r_ac = r[Channel::AC.index()] / lambda;
    let r_a = r[Channel::A.index()];
    let loss = params.delta_c * params.delta_c + params.kappa * params.kappa;
    let soft = d.omega_0 - r_a;
    let cross = 2.0 * d.phi_0 * d.n_c.sqrt() - r_ac;
    Ok(loss / params.delta_c * soft / (r_c * soft + cross * cross))
}
