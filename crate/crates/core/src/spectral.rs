//! Continuum Landau/Beliaev spectral densities and their cusp expansions.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{bogoliubov_factors, dispersion, BogoliubovFactors, DerivedParams, Support};

/// Below this radial energy the Beliaev densities are evaluated from the cusp
/// series instead of the closed-form angles.
pub const W_SWITCH: f64 = 1e-10;

/// Dissipation channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    /// Cavity–cavity.
    C,
    /// Cavity–atom cross channel.
    AC,
    /// Atom coordinate.
    A,
    /// Atom velocity.
    Adot,
}

impl Channel {
    pub const ALL: [Channel; 4] = [Channel::C, Channel::AC, Channel::A, Channel::Adot];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::C => "C",
            Channel::AC => "AC",
            Channel::A => "A",
            Channel::Adot => "Adot",
        }
    }

    /// Normalisation of the characteristic function used by the cusp series:
    /// the A and Ȧ expansions are written for `f/(2|g'|)`.
    pub fn cusp_norm(self) -> f64 {
        match self {
            Channel::C | Channel::AC => 1.0,
            Channel::A | Channel::Adot => 2.0,
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "C" | "c" => Ok(Channel::C),
            "AC" | "ac" => Ok(Channel::AC),
            "A" | "a" => Ok(Channel::A),
            "Adot" | "adot" | "Ȧ" => Ok(Channel::Adot),
            _ => Err(Error::validation("channel", format!("unknown channel `{s}`"))),
        }
    }
}

/// Process type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    Landau,
    Beliaev,
}

impl Branch {
    pub const ALL: [Branch; 2] = [Branch::Landau, Branch::Beliaev];

    pub fn name(self) -> &'static str {
        match self {
            Branch::Landau => "Landau",
            Branch::Beliaev => "Beliaev",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "landau" | "l" => Ok(Branch::Landau),
            "beliaev" | "b" => Ok(Branch::Beliaev),
            _ => Err(Error::validation("branch", format!("unknown branch `{s}`"))),
        }
    }
}

/// Landau and Beliaev frequency supports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Supports {
    pub landau: Support,
    pub beliaev: Support,
}

pub fn supports(derived: &DerivedParams) -> Supports {
    Supports {
        landau: derived.landau,
        beliaev: derived.beliaev,
    }
}

/// One evaluation of a spectral density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    pub omega: f64,
    pub w: f64,
    pub f_value: f64,
    pub n_value: f64,
    pub g: f64,
}

/// Radial energy W at which the process frequency equals `omega`.
///
/// Uses the closed form `W = (ω² − ω₀²)² / (2D(X + Y))` with `D = ω² − ω'²`,
/// `X = ω√(1 + 4nU²/D)`, `Y = ω' + 2nU`, which is algebraically identical to
/// `−Y/2 + X/2` but free of cancellation at the cusp. The result is checked
/// against the dispersion and refined by bisection when necessary.
pub fn invert_branch(omega: f64, branch: Branch, derived: &DerivedParams) -> Result<f64> {
    let support = derived.support(branch);
    if !(omega > support.lo && omega < support.hi) {
        let on_edge = match branch {
            Branch::Landau => omega == support.lo,
            Branch::Beliaev => omega == support.hi,
        };
        if on_edge {
            return Ok(derived.w_edge);
        }
        return Err(Error::domain(
            "invert_branch",
            format!(
                "ω = {omega} outside the {branch} support ({}, {})",
                support.lo, support.hi
            ),
        ));
    }
    let c = derived.omega_c0p;
    let n = derived.n_u;
    let d = (omega - c) * (omega + c);
    let x = omega * (1.0 + 4.0 * n * n / d).sqrt();
    let y = c + 2.0 * n;
    let s = (omega - derived.omega_0) * (omega + derived.omega_0);
    let w = (s * s / (2.0 * d * (x + y))).min(derived.w_edge);
    if w > 0.0 && round_trip_ok(w, omega, branch, derived) {
        return Ok(w);
    }
    bisect_branch(omega, branch, derived)
}

fn round_trip_ok(w: f64, omega: f64, branch: Branch, derived: &DerivedParams) -> bool {
    match dispersion(w, branch, derived) {
        Ok((back, slope)) => {
            // Relative agreement, or agreement to within one ulp of W mapped
            // through the slope (matters where dω/dW is huge at the cusp).
            let err = (back - omega).abs();
            err <= 1e-10 * omega || err <= 4.0 * f64::EPSILON * (w * slope).abs()
        }
        Err(_) => false,
    }
}

fn bisect_branch(omega: f64, branch: Branch, derived: &DerivedParams) -> Result<f64> {
    let increasing = branch == Branch::Beliaev;
    let (mut lo, mut hi) = (0.0, derived.w_edge);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (v, _) = dispersion(mid, branch, derived)?;
        if (v < omega) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let w = 0.5 * (lo + hi);
    if w > 0.0 && round_trip_ok(w, omega, branch, derived) {
        Ok(w)
    } else {
        Err(Error::non_convergence(
            "invert_branch",
            format!("round trip failed at ω = {omega} on the {branch} branch"),
        ))
    }
}

/// Shape function f_x^{L/B}.
pub fn channel_shape(channel: Channel, branch: Branch, f: &BogoliubovFactors) -> f64 {
    let (phi, theta) = (f.phi, f.theta);
    match (channel, branch) {
        (Channel::C, Branch::Beliaev) => 2.0 * theta * theta,
        (Channel::C, Branch::Landau) => 2.0 * phi * phi,
        (Channel::AC, Branch::Beliaev) => theta * (2.0 * theta - phi),
        (Channel::AC, Branch::Landau) => phi * (2.0 * phi - theta),
        (Channel::A, Branch::Beliaev) => 5.0 * theta * theta - 4.0 * phi * theta + 1.0,
        (Channel::A, Branch::Landau) => 5.0 * phi * phi - 4.0 * phi * theta - 1.0,
        (Channel::Adot, Branch::Beliaev) => {
            let d = f.phi_minus();
            d * d
        }
        (Channel::Adot, Branch::Landau) => {
            let d = f.theta_minus();
            d * d
        }
    }
}

/// Bose–Einstein occupation 1/(e^{βω} − 1); zero at β = ∞.
pub fn bose(omega: f64, beta: f64) -> f64 {
    if beta == f64::INFINITY {
        return 0.0;
    }
    1.0 / (beta * omega).exp_m1()
}

/// N^L = n(ω_b) − n(ω_c), N^B = 1 + n(ω_b) + n(ω_c).
pub fn thermal_weight(branch: Branch, f: &BogoliubovFactors, beta: f64) -> f64 {
    thermal_weight_at(branch, f.omega_b, f.omega_c, beta)
}

pub(crate) fn thermal_weight_at(branch: Branch, omega_b: f64, omega_c: f64, beta: f64) -> f64 {
    let nb = bose(omega_b, beta);
    let nc = bose(omega_c, beta);
    match branch {
        Branch::Landau => nb - nc,
        Branch::Beliaev => 1.0 + nb + nc,
    }
}

/// Spectral density G_x(ω): zero outside both supports.
pub fn spectral_density(
    channel: Channel,
    omega: f64,
    derived: &DerivedParams,
    beta: f64,
) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::domain(
            "spectral_density",
            format!("frequency must be positive, got {omega}"),
        ));
    }
    match branch_of(omega, derived) {
        Some(branch) => Ok(spectral_point(channel, branch, omega, derived, beta)?.g),
        None => Ok(0.0),
    }
}

/// Branch whose support contains `omega`; ω₀ itself is assigned to Beliaev.
pub fn branch_of(omega: f64, derived: &DerivedParams) -> Option<Branch> {
    if omega > derived.landau.lo && omega < derived.landau.hi {
        Some(Branch::Landau)
    } else if omega >= derived.beliaev.lo && omega < derived.beliaev.hi {
        Some(Branch::Beliaev)
    } else {
        None
    }
}

/// Full evaluation of G on one branch, including intermediate quantities.
///
/// At ω = ω₀ and T > 0 the thermal weight has a pole; it is clipped at
/// [`W_SWITCH`] so plotted curves stay finite.
pub fn spectral_point(
    channel: Channel,
    branch: Branch,
    omega: f64,
    derived: &DerivedParams,
    beta: f64,
) -> Result<SpectralPoint> {
    let w = if omega == derived.omega_0 {
        0.0
    } else {
        invert_branch(omega, branch, derived)?
    };
    let scale = derived.prefactor * derived.gamma(channel);
    if w < W_SWITCH {
        let wn = w.max(W_SWITCH);
        let omega_b = (wn * (wn + 2.0 * derived.n_u)).sqrt();
        let omega_c = ((wn + derived.omega_c0p) * (wn + derived.omega_c0p + 2.0 * derived.n_u)).sqrt();
        let n_value = thermal_weight_at(branch, omega_b, omega_c, beta);
        let (ratio, f_value) = match branch {
            Branch::Beliaev if derived.n_u > 0.0 => {
                let cusp = cusp_coefficients(channel, derived)?;
                (cusp.characteristic(w), f64::NAN)
            }
            _ => {
                let f = bogoliubov_factors(wn, derived)?;
                let shape = channel_shape(channel, branch, &f);
                (shape / f.jacobian(branch), shape)
            }
        };
        return Ok(SpectralPoint {
            omega,
            w,
            f_value,
            n_value,
            g: scale * ratio * n_value,
        });
    }
    let f = bogoliubov_factors(w, derived)?;
    let shape = channel_shape(channel, branch, &f);
    let n_value = thermal_weight(branch, &f, beta);
    let g = if n_value == 0.0 || shape == 0.0 {
        0.0
    } else {
        scale * shape * n_value / f.jacobian(branch)
    };
    Ok(SpectralPoint {
        omega,
        w,
        f_value: shape,
        n_value,
        g,
    })
}

/// Cusp expansion of the Beliaev characteristic function near W = 0.
///
/// `a`, `b` and `c` are the standard closed forms. The closed-form linear
/// coefficients `b` do not match the Taylor expansion of the exact functions;
/// the exact linear coefficient is kept separately in `linear` and is the one
/// used by [`CuspCoefficients::characteristic`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CuspCoefficients {
    pub channel: Channel,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Exact coefficient of W in the expansion of `f/(norm·|g'|)`.
    pub linear: f64,
    /// +1 for Ȧ, −1 otherwise: sign of the `2a√W` term.
    pub sqrt_sign: f64,
    /// 1 for C and AC, 2 for A and Ȧ.
    pub norm: f64,
}

impl CuspCoefficients {
    /// `f/(norm·|g'|)` approximated as `±2a√W + linear·W + C`.
    pub fn normalized(&self, w: f64) -> f64 {
        self.sqrt_sign * 2.0 * self.a * w.sqrt() + self.linear * w + self.c
    }

    /// Series for `f/|g'|`.
    pub fn characteristic(&self, w: f64) -> f64 {
        self.norm * self.normalized(w)
    }

    /// Series using the closed-form linear coefficient `b`.
    pub fn with_closed_form_b(&self, w: f64) -> f64 {
        let linear_sign = match self.channel {
            Channel::C | Channel::AC => 1.0,
            Channel::A | Channel::Adot => -1.0,
        };
        self.norm * (self.sqrt_sign * 2.0 * self.a * w.sqrt() + linear_sign * self.b * w + self.c)
    }
}

pub fn cusp_coefficients(channel: Channel, derived: &DerivedParams) -> Result<CuspCoefficients> {
    let n = derived.n_u;
    if !(n > 0.0) {
        return Err(Error::domain(
            "cusp_coefficients",
            "nU = 0: the cusp coefficients diverge",
        ));
    }
    let c = derived.omega_c0p;
    let w0 = derived.omega_0;
    let w02 = w0 * w0;
    let w03 = w02 * w0;
    let r = (2.0 * n).sqrt();
    let p = (c + n) * (c + 2.0 * n);
    // common denominator of the exact linear coefficients
    let den = c.powf(1.5) * n * (c + 2.0 * n).sqrt();
    let (a, b, cc, linear, sqrt_sign, norm) = match channel {
        Channel::C => (
            (1.0 + p / w02) / r,
            (c / n + 1.0) / w0 - p / w03,
            (c + 2.0 * n) / w0,
            (c + n) * (4.0 * c + n) / den,
            -1.0,
            1.0,
        ),
        Channel::AC => (
            (1.0 + p / (2.0 * w02)) / r,
            c / (2.0 * w0 * n) - p / (2.0 * w03),
            (c + 2.0 * n) / (2.0 * w0),
            (7.0 * c * c + 7.0 * c * n + n * n) / (2.0 * den),
            -1.0,
            1.0,
        ),
        Channel::A => (
            (3.0 + p / w02) / (4.0 * r),
            (c / n - 1.0) / (2.0 * w0) - p / (4.0 * w03),
            (c + 2.0 * n) / (4.0 * w0),
            (12.0 * c * c + 9.0 * c * n + n * n) / (4.0 * den),
            -1.0,
            2.0,
        ),
        Channel::Adot => (
            (1.0 - c * (c + n) / w02) / (4.0 * r),
            (c / n - 1.0) / (4.0 * w0) + c * (c + n) / (4.0 * w03),
            c / (4.0 * w0),
            (n - c) / (4.0 * c.sqrt() * (c + 2.0 * n).powf(1.5)),
            1.0,
            2.0,
        ),
    };
    Ok(CuspCoefficients {
        channel,
        a,
        b,
        c: cc,
        linear,
        sqrt_sign,
        norm,
    })
}

/// Cusp approximation of the zero-temperature Beliaev density at `omega`.
pub fn cusp_approximant(channel: Channel, omega: f64, derived: &DerivedParams) -> Result<f64> {
    let coeffs = cusp_coefficients(channel, derived)?;
    let w = if omega == derived.omega_0 {
        0.0
    } else {
        invert_branch(omega, Branch::Beliaev, derived)?
    };
    Ok(derived.prefactor * derived.gamma(channel) * coeffs.characteristic(w))
}
