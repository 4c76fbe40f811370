//! Gaussian imaginary-time quadratic form of the (q_C, q_A) system and its
//! equilibrium variances.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::exec::{block_partials, Execution};
use crate::kernel::{BathMeasure, KERNEL_TOL};
use crate::model::{validate_and_derive, DerivedParams, PhysicalParams};
use crate::quadrature::integrate_doubling;
use crate::spectral::Channel;

/// Which couplings enter the quadratic form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BathToggles {
    /// The four quasiparticle channels, jointly.
    pub quasiparticle_channels: bool,
    pub cavity_loss: bool,
    /// The collective atom–cavity coupling 2λ₀.
    pub direct_coupling: bool,
}

impl Default for BathToggles {
    fn default() -> Self {
        Self::FULL
    }
}

impl BathToggles {
    pub const FULL: Self = Self {
        quasiparticle_channels: true,
        cavity_loss: true,
        direct_coupling: true,
    };

    /// Reference model without quasiparticle damping.
    pub const NAKED: Self = Self {
        quasiparticle_channels: false,
        cavity_loss: true,
        direct_coupling: true,
    };

    /// Two uncoupled oscillators.
    pub const FREE: Self = Self {
        quasiparticle_channels: false,
        cavity_loss: false,
        direct_coupling: false,
    };
}

/// Inverse propagator at one Matsubara frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatsubaraMatrix {
    pub nu: f64,
    pub m_cc: f64,
    pub m_aa: f64,
    pub m_ca: f64,
}

impl MatsubaraMatrix {
    pub fn det(&self) -> f64 {
        self.m_cc * self.m_aa - self.m_ca * self.m_ca
    }

    /// [M⁻¹]_cc written as a Schur complement, so that m_ca = 0 returns
    /// exactly 1/m_cc.
    pub fn inverse_cc(&self) -> f64 {
        1.0 / (self.m_cc - self.m_ca * self.m_ca / self.m_aa)
    }

    pub fn inverse_aa(&self) -> f64 {
        1.0 / (self.m_aa - self.m_ca * self.m_ca / self.m_cc)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let mean = 0.5 * (self.m_cc + self.m_aa);
        let half = 0.5 * (self.m_cc - self.m_aa);
        mean - half.hypot(self.m_ca)
    }
}

/// Drude-softened loss rate κ ω_D/(|ν| + ω_D) entering the cavity diagonal
/// `(|ν| + κ_D(ν))² + Δ_C²`.
pub fn cavity_loss_term(nu: f64, params: &PhysicalParams) -> f64 {
    params.kappa * params.omega_d / (nu.abs() + params.omega_d)
}

/// Cavity diagonal without bath self-energy.
fn cavity_diagonal(nu: f64, params: &PhysicalParams, toggles: BathToggles) -> f64 {
    let d = params.delta_c;
    if toggles.cavity_loss {
        let s = nu.abs() + cavity_loss_term(nu, params);
        s * s + d * d
    } else {
        nu * nu + d * d
    }
}

fn assemble(
    nu: f64,
    xi: [f64; 4],
    derived: &DerivedParams,
    params: &PhysicalParams,
    toggles: BathToggles,
) -> MatsubaraMatrix {
    let d = params.delta_c;
    let w0 = derived.omega_0;
    let nu2 = nu * nu;
    let [xc, xac, xa, xad] = xi;
    let coupling = if toggles.direct_coupling {
        2.0 * derived.lambda_0
    } else {
        0.0
    };
    MatsubaraMatrix {
        nu,
        m_cc: cavity_diagonal(nu, params, toggles) - d * xc,
        m_aa: nu2 + w0 * w0 - w0 * xa - nu2 / w0 * xad,
        m_ca: (d * w0).sqrt() * (coupling - xac),
    }
}

/// Builds M(ν) from scratch, evaluating the kernels at ν.
pub fn build_matrix(
    nu: f64,
    derived: &DerivedParams,
    params: &PhysicalParams,
    toggles: BathToggles,
) -> Result<MatsubaraMatrix> {
    let xi = if toggles.quasiparticle_channels {
        BathMeasure::build(derived, params.beta, KERNEL_TOL)?.xi(nu)
    } else {
        [0.0; 4]
    };
    Ok(assemble(nu, xi, derived, params, toggles))
}

/// The quadratic form at fixed parameters, with its bath measure prepared.
#[derive(Debug, Clone)]
pub struct QuadraticForm {
    pub params: PhysicalParams,
    pub derived: DerivedParams,
    pub toggles: BathToggles,
    measure: Option<BathMeasure>,
}

impl QuadraticForm {
    pub fn new(params: &PhysicalParams, toggles: BathToggles) -> Result<Self> {
        Self::with_tolerance(params, toggles, KERNEL_TOL)
    }

    pub fn with_tolerance(params: &PhysicalParams, toggles: BathToggles, rel_tol: f64) -> Result<Self> {
        let derived = validate_and_derive(params)?;
        let measure = if toggles.quasiparticle_channels {
            Some(BathMeasure::build(&derived, params.beta, rel_tol)?)
        } else {
            None
        };
        Ok(Self {
            params: params.clone(),
            derived,
            toggles,
            measure,
        })
    }

    pub fn measure(&self) -> Option<&BathMeasure> {
        self.measure.as_ref()
    }

    pub fn xi(&self, nu: f64) -> [f64; 4] {
        match &self.measure {
            Some(m) => m.xi(nu),
            None => [0.0; 4],
        }
    }

    pub fn matrix(&self, nu: f64) -> MatsubaraMatrix {
        assemble(nu, self.xi(nu), &self.derived, &self.params, self.toggles)
    }

    /// Static matrix M(0).
    pub fn static_matrix(&self) -> MatsubaraMatrix {
        let xi = match &self.measure {
            Some(m) => m.reorganization(),
            None => [0.0; 4],
        };
        assemble(0.0, xi, &self.derived, &self.params, self.toggles)
    }

    fn check_subcritical(&self) -> Result<()> {
        let m0 = self.static_matrix();
        if !(m0.det() > 0.0 && m0.m_cc > 0.0 && m0.m_aa > 0.0) {
            return Err(Error::Supercritical(format!(
                "det M(0) = {:e} at ω̄_P = {}; the normal phase is unstable",
                m0.det(),
                self.params.omega_bar_p
            )));
        }
        Ok(())
    }

    /// ⟨q_C²⟩ and ⟨q_A²⟩ from (1/β) Σ_n [M(ν_n)⁻¹]_jj.
    pub fn variances(&self, exec: Execution) -> Result<Variances> {
        self.check_subcritical()?;
        let beta = self.params.beta;
        if beta.is_infinite() {
            return self.zero_temperature_variances();
        }
        let n_max = self.params.n_max;
        let a = 2.0 * PI / beta;
        let m0 = self.matrix(0.0);
        let head = [m0.inverse_cc(), m0.inverse_aa()];
        let sums = |from: usize, count: usize| -> [f64; 2] {
            block_partials(
                exec,
                count,
                || [0.0; 2],
                |acc, k| {
                    let m = self.matrix(a * (from + k) as f64);
                    acc[0] += m.inverse_cc();
                    acc[1] += m.inverse_aa();
                },
            )
            .into_iter()
            .fold([0.0; 2], |t, p| [t[0] + p[0], t[1] + p[1]])
        };
        let first = sums(1, n_max);
        let second = sums(n_max + 1, n_max);
        let mut out = [0.0; 2];
        let mut refined = [0.0; 2];
        let picks: [fn(&MatsubaraMatrix) -> f64; 2] =
            [MatsubaraMatrix::inverse_cc, MatsubaraMatrix::inverse_aa];
        for j in 0..2 {
            let g = |n: f64| picks[j](&self.matrix(a * n));
            let drude = self.params.omega_d / a;
            let tail_n = tail_sum(&g, n_max, drude)?;
            let tail_2n = tail_sum(&g, 2 * n_max, drude)?;
            out[j] = (head[j] + 2.0 * (first[j] + tail_n)) / beta;
            refined[j] = (head[j] + 2.0 * (first[j] + second[j] + tail_2n)) / beta;
            if (out[j] - refined[j]).abs() > 1e-6 * refined[j].abs() {
                return Err(Error::non_convergence(
                    "variances",
                    format!(
                        "Matsubara sum changes by {:e} (relative) when n_max doubles from {n_max}",
                        ((out[j] - refined[j]) / refined[j]).abs()
                    ),
                ));
            }
        }
        Ok(Variances {
            q_c2: out[0],
            q_a2: out[1],
            refined_q_c2: refined[0],
            refined_q_a2: refined[1],
        })
    }

    /// β = ∞: the Matsubara sum becomes (1/π) ∫₀^∞ dν, taken with ν = s·tan θ.
    fn zero_temperature_variances(&self) -> Result<Variances> {
        let s = self
            .params
            .delta_c
            .max(self.derived.omega_0)
            .max(self.params.kappa);
        let half_pi = 0.5 * PI;
        let edges: Vec<f64> = (0..=32).map(|k| half_pi * k as f64 / 32.0).collect();
        let integrate = |pick: fn(&MatsubaraMatrix) -> f64| {
            integrate_doubling("variances", &edges, 16, 1e-11, |t| {
                if t >= half_pi {
                    return 0.0;
                }
                let c = t.cos();
                pick(&self.matrix(s * t.tan())) * s / (c * c)
            })
        };
        let q_c2 = integrate(MatsubaraMatrix::inverse_cc)? / PI;
        let q_a2 = integrate(MatsubaraMatrix::inverse_aa)? / PI;
        Ok(Variances {
            q_c2,
            q_a2,
            refined_q_c2: q_c2,
            refined_q_a2: q_a2,
        })
    }
}

/// Σ_{n > N} g(n): the integral of `g` from N + ½ to ∞ plus the leading
/// Euler–Maclaurin correction g'(N + ½)/24 of the midpoint rule.
///
/// The integral uses x = x₀/t on t ∈ (0, 1], which maps the 1/x² decay of
/// the summand onto a bounded integrand. Panels are refined around the
/// cavity-loss cutoff `x_drude`, where the summand has a shoulder.
fn tail_sum<G: Fn(f64) -> f64>(g: &G, n: usize, x_drude: f64) -> Result<f64> {
    let x0 = n as f64 + 0.5;
    let mut edges = vec![0.0, 0.125, 0.25, 0.5, 1.0];
    let t_drude = x0 / x_drude;
    edges.extend(
        (-8..=8)
            .map(|k| t_drude * 2f64.powf(k as f64 / 2.0))
            .filter(|&t| t > 0.0 && t < 1.0),
    );
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let integral = integrate_doubling("variances", &edges, 16, 1e-13, |t| g(x0 / t) * x0 / (t * t))?;
    let h = 0.25;
    let dg = (g(x0 + h) - g(x0 - h)) / (2.0 * h);
    Ok(integral + dg / 24.0)
}

/// Equilibrium variances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Variances {
    pub q_c2: f64,
    pub q_a2: f64,
    /// Same sums with 2·n_max terms (equal to the above at T = 0).
    pub refined_q_c2: f64,
    pub refined_q_a2: f64,
}

/// Convenience wrapper around [`QuadraticForm::variances`].
pub fn variances(params: &PhysicalParams, toggles: BathToggles, exec: Execution) -> Result<Variances> {
    QuadraticForm::new(params, toggles)?.variances(exec)
}

/// Static kernel ξ_x(0), which enters the critical determinant, next to the
/// plain frequency integral ∫ G_x dω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reorganization {
    pub channel: Channel,
    pub xi0: f64,
    pub literal: f64,
}

pub fn reorganization(channel: Channel, derived: &DerivedParams, beta: f64) -> Result<Reorganization> {
    let m = BathMeasure::build(derived, beta, KERNEL_TOL)?;
    Ok(Reorganization {
        channel,
        xi0: m.reorganization()[channel.index()],
        literal: m.literal_integral()[channel.index()],
    })
}
