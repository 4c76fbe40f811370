//! Physical parameters, derived model constants and Bogoliubov quasiparticles.
//!
//! Everything is expressed in recoil units: ω_R = 1, k = 1, ħ = 1, hence the
//! atomic mass is 1/2 and the radial kinetic energy of a quasimomentum ρ is
//! `W = ρ²`. Physical SI constants only enter through the condensate area
//! `V_2D·k²`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spectral::{Branch, Channel};

/// Reduced Planck constant in J·s.
pub const HBAR_SI: f64 = 1.054_571_817e-34;
/// Mass of a ⁸⁷Rb atom in kg.
pub const RB87_MASS_KG: f64 = 1.443_160_895_112_755e-25;

/// Lower end of the radial-energy integration used by kernel integrals.
///
/// The continuum spectral densities at finite temperature carry a
/// non-integrable `1/W` tail at the cusp (the excluded zero mode), so kernels
/// need an infrared limit.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum IrCutoff {
    /// Exclude the momentum cell of area `(2π)²/V_2D` around `p = 0`.
    #[default]
    ZeroModeCell,
    /// Integrate down to `W = 0`; only convergent at zero temperature.
    None,
    /// Explicit lower limit in ω_R.
    Fixed(f64),
}

/// Dial settings of the experiment. All energies in ω_R, β in 1/ω_R.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalParams {
    /// Interaction energy nU.
    pub n_u: f64,
    /// Pump strength ω̄_P.
    pub omega_bar_p: f64,
    /// Magnitude of the single-atom cavity shift, −U₀.
    pub u0_mag: f64,
    /// Atom number N_C.
    pub n_c: f64,
    /// Condensate extent along the cavity axis, μm.
    pub l_x_um: f64,
    /// Condensate extent along the pump axis, μm.
    pub l_y_um: f64,
    /// Cavity detuning Δ_C.
    pub delta_c: f64,
    /// Cavity loss κ.
    pub kappa: f64,
    /// Drude cutoff of the cavity loss bath.
    pub omega_d: f64,
    /// Inverse temperature; `f64::INFINITY` means T = 0.
    pub beta: f64,
    /// Matsubara truncation index.
    pub n_max: usize,
    /// Recoil frequency in Hz (unit conversion only).
    pub omega_r_hz: f64,
    /// Atom mass in kg (unit conversion only).
    pub atom_mass_kg: f64,
    pub ir_cutoff: IrCutoff,
}

impl Default for PhysicalParams {
    /// Fig. 1 experiment: ω̄_P = 0.01, nU = 0.1, U₀ = −10⁻³, N_C = 5·10⁴,
    /// 60 μm × 11 μm, ⁸⁷Rb at ω_R = 2π·3.56 kHz, T = 0. Cavity settings follow
    /// the recoil-resolved setup (Δ_C = 2, κ = 1.25, ω_D = 10⁹, n_max = 10⁴).
    fn default() -> Self {
        Self {
            n_u: 0.1,
            omega_bar_p: 0.01,
            u0_mag: 1e-3,
            n_c: 5e4,
            l_x_um: 60.0,
            l_y_um: 11.0,
            delta_c: 2.0,
            kappa: 1.25,
            omega_d: 1e9,
            beta: f64::INFINITY,
            n_max: 10_000,
            omega_r_hz: 3.56e3,
            atom_mass_kg: RB87_MASS_KG,
            ir_cutoff: IrCutoff::ZeroModeCell,
        }
    }
}

impl PhysicalParams {
    /// Photon recoil momentum k = √(2 m ω_R)/ħ in 1/m.
    pub fn k_phys(&self) -> f64 {
        (2.0 * self.atom_mass_kg * 2.0 * PI * self.omega_r_hz / HBAR_SI).sqrt()
    }

    /// Condensate area in units of 1/k².
    pub fn area_natural(&self) -> f64 {
        let k = self.k_phys();
        (self.l_x_um * 1e-6 * k) * (self.l_y_um * 1e-6 * k)
    }

    pub fn validate(&self) -> Result<()> {
        fn finite(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::validation(name, format!("must be finite, got {v}")))
            }
        }
        for (name, v) in [
            ("nU", self.n_u),
            ("omega_bar_P", self.omega_bar_p),
            ("U0_mag", self.u0_mag),
            ("N_C", self.n_c),
            ("L_x", self.l_x_um),
            ("L_y", self.l_y_um),
            ("Delta_C", self.delta_c),
            ("kappa", self.kappa),
            ("omega_R_Hz", self.omega_r_hz),
            ("atom_mass_kg", self.atom_mass_kg),
        ] {
            finite(name, v)?;
        }
        let nonneg = [
            ("nU", self.n_u),
            ("U0_mag", self.u0_mag),
            ("omega_bar_P", self.omega_bar_p),
            ("kappa", self.kappa),
        ];
        for (name, v) in nonneg {
            if v < 0.0 {
                return Err(Error::validation(name, format!("must be >= 0, got {v}")));
            }
        }
        let positive = [
            ("N_C", self.n_c),
            ("Delta_C", self.delta_c),
            ("L_x", self.l_x_um),
            ("L_y", self.l_y_um),
            ("omega_R_Hz", self.omega_r_hz),
            ("atom_mass_kg", self.atom_mass_kg),
        ];
        for (name, v) in positive {
            if v <= 0.0 {
                return Err(Error::validation(name, format!("must be > 0, got {v}")));
            }
        }
        if self.omega_bar_p >= 2.0 {
            return Err(Error::validation(
                "omega_bar_P",
                format!(
                    "pump {} must stay below 2 ω_R so that ω'_c0 = 2 − ω̄_P > 0",
                    self.omega_bar_p
                ),
            ));
        }
        if !(self.omega_d > 0.0) {
            return Err(Error::validation("omega_D", "must be > 0"));
        }
        if !(self.beta > 0.0) {
            return Err(Error::validation("beta", "must be > 0 (inf for T = 0)"));
        }
        if self.n_max < 1 {
            return Err(Error::validation("n_max", "must be >= 1"));
        }
        if let IrCutoff::Fixed(w) = self.ir_cutoff {
            if !(w.is_finite() && (0.0..W_EDGE).contains(&w)) {
                return Err(Error::validation(
                    "ir_cutoff",
                    format!("must lie in [0, {W_EDGE}), got {w}"),
                ));
            }
        }
        Ok(())
    }

    /// Same parameters at a different pump strength.
    pub fn with_pump(&self, pump: f64) -> Self {
        Self {
            omega_bar_p: pump,
            ..self.clone()
        }
    }

    pub fn with_n_u(&self, n_u: f64) -> Self {
        Self {
            n_u,
            ..self.clone()
        }
    }
}

/// Radial band edge: ρ ≤ k/√2 gives W ≤ 1/2.
pub const W_EDGE: f64 = 0.5;

/// An open frequency interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub lo: f64,
    pub hi: f64,
}

impl Support {
    pub fn contains(&self, omega: f64) -> bool {
        omega > self.lo && omega < self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Scalar model constants derived from [`PhysicalParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedParams {
    pub n_u: f64,
    pub n_c: f64,
    /// ω'_{c,0} = 2 − ω̄_P.
    pub omega_c0p: f64,
    /// Checkerboard-mode frequency ω₀.
    pub omega_0: f64,
    /// Zero-momentum rotation angle α.
    pub alpha0: f64,
    /// φ₀ = cosh α − sinh α.
    pub phi_0: f64,
    /// Atom–cavity coupling λ = √(|U₀| ω̄_P).
    pub lambda: f64,
    /// Checkerboard–bath coupling η = 2nU/√N_C.
    pub eta: f64,
    /// Collective coupling λ₀ = √N_C φ₀ λ.
    pub lambda_0: f64,
    /// Channel couplings (γ_C, γ_AC, γ_A, γ_Ȧ).
    pub gamma: [f64; 4],
    /// Continuum prefactor P₀ = V_2D m / 2π.
    pub prefactor: f64,
    /// Condensate area V_2D·k².
    pub area: f64,
    pub w_edge: f64,
    /// Lower W limit for kernel integrals.
    pub w_cutoff: f64,
    pub landau: Support,
    pub beliaev: Support,
}

/// Validates `params` and computes every derived constant.
pub fn validate_and_derive(params: &PhysicalParams) -> Result<DerivedParams> {
    params.validate()?;
    let n_u = params.n_u;
    let omega_c0p = 2.0 - params.omega_bar_p;
    let omega_0 = quasiparticle_frequency(0.0, omega_c0p, n_u);
    let alpha0 = half_artanh(n_u, omega_c0p);
    let phi_0 = (-alpha0).exp();
    let lambda = (params.u0_mag * params.omega_bar_p).sqrt();
    let eta = 2.0 * n_u / params.n_c.sqrt();
    let lambda_0 = params.n_c.sqrt() * phi_0 * lambda;
    let gamma = [
        lambda * lambda,
        lambda * eta * phi_0,
        eta * eta * phi_0 * phi_0 / 2.0,
        eta * eta / (2.0 * phi_0 * phi_0),
    ];
    let area = params.area_natural();
    let prefactor = area * 0.5 / (2.0 * PI);
    let w_cutoff = match params.ir_cutoff {
        IrCutoff::ZeroModeCell => 4.0 * PI / area,
        IrCutoff::None => 0.0,
        IrCutoff::Fixed(w) => w,
    };
    if w_cutoff >= W_EDGE {
        return Err(Error::validation(
            "ir_cutoff",
            format!("cutoff {w_cutoff} exceeds the band edge; condensate too small"),
        ));
    }
    let mut derived = DerivedParams {
        n_u,
        n_c: params.n_c,
        omega_c0p,
        omega_0,
        alpha0,
        phi_0,
        lambda,
        eta,
        lambda_0,
        gamma,
        prefactor,
        area,
        w_edge: W_EDGE,
        w_cutoff,
        landau: Support { lo: 0.0, hi: 0.0 },
        beliaev: Support { lo: 0.0, hi: 0.0 },
    };
    let (landau_lo, _) = dispersion(W_EDGE, Branch::Landau, &derived)?;
    let (beliaev_hi, _) = dispersion(W_EDGE, Branch::Beliaev, &derived)?;
    derived.landau = Support {
        lo: landau_lo,
        hi: omega_0,
    };
    derived.beliaev = Support {
        lo: omega_0,
        hi: beliaev_hi,
    };
    Ok(derived)
}

impl DerivedParams {
    pub fn gamma(&self, channel: Channel) -> f64 {
        self.gamma[channel.index()]
    }

    pub fn support(&self, branch: Branch) -> Support {
        match branch {
            Branch::Landau => self.landau,
            Branch::Beliaev => self.beliaev,
        }
    }
}

/// ½ artanh(x / (d + x)) = ¼ ln((d + 2x)/d), written so that `d → 0` loses no
/// precision. Requires `d > 0`.
fn half_artanh(x: f64, d: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    0.25 * (2.0 * x / d).ln_1p()
}

/// Bogoliubov frequency √(ω'(ω' + 2nU)) of a band with bare energy ω'.
fn quasiparticle_frequency(y: f64, shift: f64, n_u: f64) -> f64 {
    let e = y + shift;
    (e * (e + 2.0 * n_u)).sqrt()
}

fn quasiparticle_slope(y: f64, shift: f64, n_u: f64, omega: f64) -> f64 {
    let e = y + shift;
    if omega == 0.0 {
        // ω_b at y = 0: slope is 1 without interaction, unbounded with it.
        return if n_u == 0.0 { 1.0 } else { f64::INFINITY };
    }
    (e + n_u) / omega
}

/// Process frequency ω^{L/B}(y) and its derivative with respect to y.
pub fn dispersion(y: f64, branch: Branch, derived: &DerivedParams) -> Result<(f64, f64)> {
    if !(0.0..=derived.w_edge).contains(&y) {
        return Err(Error::domain(
            "dispersion",
            format!("radial energy {y} outside [0, {}]", derived.w_edge),
        ));
    }
    let n_u = derived.n_u;
    let omega_b = quasiparticle_frequency(y, 0.0, n_u);
    let omega_c = quasiparticle_frequency(y, derived.omega_c0p, n_u);
    let d_b = quasiparticle_slope(y, 0.0, n_u, omega_b);
    let d_c = quasiparticle_slope(y, derived.omega_c0p, n_u, omega_c);
    Ok(match branch {
        Branch::Landau => (omega_c - omega_b, d_c - d_b),
        Branch::Beliaev => (omega_c + omega_b, d_c + d_b),
    })
}

/// Rotation coefficients and quasiparticle frequencies at radial energy W.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BogoliubovFactors {
    pub y: f64,
    pub alpha_b: f64,
    pub alpha_c: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub theta1: f64,
    pub theta2: f64,
    /// φ₁ + φ₂ = cosh(α_b + α_c).
    pub phi: f64,
    /// θ₁ + θ₂ = sinh(α_b + α_c).
    pub theta: f64,
    pub omega_b: f64,
    pub omega_c: f64,
    pub d_omega_b: f64,
    pub d_omega_c: f64,
}

impl BogoliubovFactors {
    /// φ₁ − φ₂ = cosh(α_b − α_c).
    pub fn phi_minus(&self) -> f64 {
        (self.alpha_b - self.alpha_c).cosh()
    }

    /// θ₁ − θ₂ = sinh(α_c − α_b).
    pub fn theta_minus(&self) -> f64 {
        (self.alpha_c - self.alpha_b).sinh()
    }

    pub fn omega(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Landau => self.omega_c - self.omega_b,
            Branch::Beliaev => self.omega_c + self.omega_b,
        }
    }

    /// |dω^{L/B}/dy|, the Jacobian between frequency and radial energy.
    pub fn jacobian(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Landau => (self.d_omega_c - self.d_omega_b).abs(),
            Branch::Beliaev => self.d_omega_c + self.d_omega_b,
        }
    }
}

/// Evaluates the Bogoliubov coefficients at radial energy `y > 0`.
pub fn bogoliubov_factors(y: f64, derived: &DerivedParams) -> Result<BogoliubovFactors> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(Error::domain(
            "bogoliubov_factors",
            format!("radial energy must be positive and finite, got {y} (α_b diverges at 0)"),
        ));
    }
    let n_u = derived.n_u;
    let shift_c = derived.omega_c0p;
    let alpha_b = half_artanh(n_u, y);
    let alpha_c = half_artanh(n_u, y + shift_c);
    let (sb, cb) = (alpha_b.sinh(), alpha_b.cosh());
    let (sc, cc) = (alpha_c.sinh(), alpha_c.cosh());
    let sum = alpha_b + alpha_c;
    let omega_b = quasiparticle_frequency(y, 0.0, n_u);
    let omega_c = quasiparticle_frequency(y, shift_c, n_u);
    Ok(BogoliubovFactors {
        y,
        alpha_b,
        alpha_c,
        phi1: cb * cc,
        phi2: sb * sc,
        theta1: cb * sc,
        theta2: sb * cc,
        phi: sum.cosh(),
        theta: sum.sinh(),
        omega_b,
        omega_c,
        d_omega_b: quasiparticle_slope(y, 0.0, n_u, omega_b),
        d_omega_c: quasiparticle_slope(y, shift_c, n_u, omega_c),
    })
}
