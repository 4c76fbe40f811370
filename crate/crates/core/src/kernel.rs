//! Matsubara transforms of the bath spectral densities.
//!
//! `ξ_x(ν) = ∫ dω G_x(ω) 2ω/(ν² + ω²)` is evaluated in the radial-energy
//! variable, where `dω = |g'| dW` cancels the Jacobian of `G`:
//!
//! ```text
//! ξ_x(ν) = P₀ γ_x Σ_branch ∫ f_x(W) N(W) 2ω(W)/(ν² + ω(W)²) dW
//! ```
//!
//! With `W = u²` the endpoint behaviour at the cusp becomes regular. A
//! [`BathMeasure`] stores the quadrature nodes once, so that evaluating all four
//! channels at a new ν costs one division per node.

use crate::error::{Error, Result};
use crate::model::{bogoliubov_factors, DerivedParams};
use crate::quadrature::cached_rule;
use crate::spectral::{channel_shape, thermal_weight, Branch, Channel};

/// Default relative tolerance of the kernel quadrature.
pub const KERNEL_TOL: f64 = 1e-9;

const START_ORDER: usize = 16;

/// Point masses `P₀γ_x f_x N dW` at the process frequencies of the quadrature
/// nodes, for all four channels.
#[derive(Debug, Clone, PartialEq)]
pub struct BathMeasure {
    omega: Vec<f64>,
    mass: Vec<[f64; 4]>,
    order: usize,
}

impl BathMeasure {
    /// Builds the measure with order doubling until ξ(0) and ∫G dω of every
    /// channel change by less than `rel_tol` (relative to the integral of the
    /// absolute integrand).
    pub fn build(derived: &DerivedParams, beta: f64, rel_tol: f64) -> Result<Self> {
        let edges = u_edges(derived, beta)?;
        let mut prev = Self::at_order(derived, beta, &edges, START_ORDER)?;
        for _ in 0..2 {
            let next = Self::at_order(derived, beta, &edges, prev.order * 2)?;
            if next.agrees_with(&prev, rel_tol) {
                return Ok(next);
            }
            prev = next;
        }
        Err(Error::non_convergence(
            "bath measure",
            format!("ξ(0) not converged to {rel_tol:e} at order {}", prev.order),
        ))
    }

    fn at_order(derived: &DerivedParams, beta: f64, edges: &[f64], order: usize) -> Result<Self> {
        let rule = cached_rule(order);
        let thermal = beta.is_finite();
        let mut omega = Vec::with_capacity(edges.len() * order * 2);
        let mut mass = Vec::with_capacity(edges.len() * order * 2);
        let scale: [f64; 4] = std::array::from_fn(|i| derived.prefactor * derived.gamma[i]);
        for pair in edges.windows(2) {
            for (u, wt) in rule.mapped(pair[0], pair[1]) {
                let w = u * u;
                let f = bogoliubov_factors(w, derived)?;
                let jac = 2.0 * u * wt;
                for branch in Branch::ALL {
                    if branch == Branch::Landau && !thermal {
                        continue;
                    }
                    let n = thermal_weight(branch, &f, beta);
                    if n == 0.0 {
                        continue;
                    }
                    omega.push(f.omega(branch));
                    mass.push(std::array::from_fn(|i| {
                        scale[i] * channel_shape(Channel::ALL[i], branch, &f) * n * jac
                    }));
                }
            }
        }
        Ok(Self { omega, mass, order })
    }

    fn agrees_with(&self, other: &Self, rel_tol: f64) -> bool {
        let (a, a_abs) = (self.static_moments(), self.static_abs());
        let b = other.static_moments();
        (0..4).all(|i| {
            let d0 = (a.0[i] - b.0[i]).abs();
            let d1 = (a.1[i] - b.1[i]).abs();
            d0 <= rel_tol * a_abs.0[i] && d1 <= rel_tol * a_abs.1[i]
        })
    }

    /// (ξ(0), ∫G dω) per channel.
    fn static_moments(&self) -> ([f64; 4], [f64; 4]) {
        let mut xi = [0.0; 4];
        let mut lit = [0.0; 4];
        for (m, &w) in self.mass.iter().zip(&self.omega) {
            let k = 2.0 / w;
            for i in 0..4 {
                xi[i] += m[i] * k;
                lit[i] += m[i];
            }
        }
        (xi, lit)
    }

    fn static_abs(&self) -> ([f64; 4], [f64; 4]) {
        let mut xi = [0.0; 4];
        let mut lit = [0.0; 4];
        for (m, &w) in self.mass.iter().zip(&self.omega) {
            for i in 0..4 {
                xi[i] += (m[i] * 2.0 / w).abs();
                lit[i] += m[i].abs();
            }
        }
        (xi, lit)
    }

    /// ξ_x(ν) for all four channels, in [`Channel::ALL`] order.
    pub fn xi(&self, nu: f64) -> [f64; 4] {
        let nu2 = nu * nu;
        let mut out = [0.0; 4];
        for (m, &w) in self.mass.iter().zip(&self.omega) {
            let k = 2.0 * w / (nu2 + w * w);
            for i in 0..4 {
                out[i] += m[i] * k;
            }
        }
        out
    }

    /// ξ_x(0) for all channels.
    pub fn reorganization(&self) -> [f64; 4] {
        self.static_moments().0
    }

    /// `∫ G_x dω` for all channels.
    pub fn literal_integral(&self) -> [f64; 4] {
        self.static_moments().1
    }

    /// `∫ ω G_x dω`, the coefficient of the 1/ν² tail of ξ/2.
    pub fn first_moment(&self) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (m, &w) in self.mass.iter().zip(&self.omega) {
            for i in 0..4 {
                out[i] += m[i] * w;
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// Gauss–Legendre order per panel that met the tolerance.
    pub fn order(&self) -> usize {
        self.order
    }
}

/// Panel edges in u = √W.
///
/// With a positive cutoff the panels are geometric, two per octave, because
/// the thermal integrand behaves as 1/u near the cusp. Without cutoff they are
/// dyadic towards u = 0, where the zero-temperature integrand is bounded.
fn u_edges(derived: &DerivedParams, beta: f64) -> Result<Vec<f64>> {
    let u_hi = derived.w_edge.sqrt();
    if derived.w_cutoff > 0.0 {
        let u_lo = derived.w_cutoff.sqrt();
        let panels = (2.0 * (u_hi / u_lo).log2()).ceil().max(4.0) as usize;
        let ratio = u_hi / u_lo;
        let mut e: Vec<f64> = (0..=panels)
            .map(|k| u_lo * ratio.powf(k as f64 / panels as f64))
            .collect();
        e[0] = u_lo;
        e[panels] = u_hi;
        Ok(e)
    } else {
        if beta.is_finite() {
            return Err(Error::domain(
                "bath measure",
                "at finite temperature the kernels diverge logarithmically at the cusp; \
                 an infrared cutoff is required",
            ));
        }
        let mut e = vec![0.0];
        for k in (0..24).rev() {
            e.push(u_hi / 2f64.powi(k));
        }
        Ok(e)
    }
}

/// ξ_x(ν) for a single channel with its own order-doubling check.
pub fn kernel_transform(channel: Channel, nu: f64, derived: &DerivedParams, beta: f64) -> Result<f64> {
    let edges = u_edges(derived, beta)?;
    let i = channel.index();
    let eval = |order| -> Result<(f64, f64)> {
        let m = BathMeasure::at_order(derived, beta, &edges, order)?;
        let nu2 = nu * nu;
        let (mut v, mut a) = (0.0, 0.0);
        for (mass, &w) in m.mass.iter().zip(&m.omega) {
            let t = mass[i] * 2.0 * w / (nu2 + w * w);
            v += t;
            a += t.abs();
        }
        Ok((v, a))
    };
    let (mut prev, _) = eval(START_ORDER)?;
    let mut order = START_ORDER;
    for _ in 0..2 {
        order *= 2;
        let (next, abs) = eval(order)?;
        if (next - prev).abs() <= KERNEL_TOL * abs || abs == 0.0 {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::non_convergence(
        "kernel_transform",
        format!("ξ_{channel}({nu}) not converged at order {order}"),
    ))
}
