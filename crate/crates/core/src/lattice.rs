//! Brute-force discrete-momentum spectral weights.
//!
//! Each lattice site `p` carries the weight `γ_x f_x(W_p) N(W_p)` at the
//! process frequency `ω_p`. The sites form a grid of spacing `k/scale`, so one
//! site stands for `V_2D/(4π² scale²)` physical modes; with that factor the
//! binned weights converge to the continuum bin integrals of `G_x`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::model::{bogoliubov_factors, DerivedParams};
use crate::quadrature::integrate_doubling;
use crate::spectral::{channel_shape, invert_branch, thermal_weight, Branch, Channel};

/// Region of momentum space that is summed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Geometry {
    /// `|p| ≤ k/√2`, the region covered by the continuum formulas.
    #[default]
    Disc,
    /// `|p_x|, |p_y| < k/2`.
    Square,
}

/// Placement of the sites relative to the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Offset {
    /// `p = j/scale`, the origin removed.
    Integer,
    /// `p = (j + ½)/scale`; no site at the origin, and a smaller bias near the
    /// cusp where the density of states is sampled most coarsely.
    #[default]
    CellCentered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeSpec {
    pub scale: usize,
    pub geometry: Geometry,
    pub offset: Offset,
}

impl LatticeSpec {
    pub fn new(scale: usize, geometry: Geometry, offset: Offset) -> Result<Self> {
        if scale < 8 {
            return Err(Error::validation("scale", format!("must be >= 8, got {scale}")));
        }
        Ok(Self {
            scale,
            geometry,
            offset,
        })
    }

    pub fn disc(scale: usize) -> Result<Self> {
        Self::new(scale, Geometry::Disc, Offset::CellCentered)
    }

    pub fn refined(&self) -> Self {
        Self {
            scale: 2 * self.scale,
            ..*self
        }
    }

    /// Coordinates of the sites along one axis, including negative ones.
    fn axis(&self) -> Vec<f64> {
        let s = self.scale as f64;
        let half_extent = match self.geometry {
            Geometry::Disc => std::f64::consts::FRAC_1_SQRT_2,
            Geometry::Square => 0.5,
        };
        let reach = (half_extent * s).ceil() as i64 + 1;
        let shift = match self.offset {
            Offset::Integer => 0.0,
            Offset::CellCentered => 0.5,
        };
        (-reach..=reach)
            .map(|j| (j as f64 + shift) / s)
            .filter(|p| p.abs() <= half_extent)
            .collect()
    }

    fn contains(&self, px: f64, py: f64) -> bool {
        if px == 0.0 && py == 0.0 {
            return false;
        }
        match self.geometry {
            Geometry::Disc => px * px + py * py <= 0.5,
            Geometry::Square => px.abs() < 0.5 && py.abs() < 0.5,
        }
    }

    /// Physical modes represented by a single site.
    pub fn modes_per_site(&self, derived: &DerivedParams) -> f64 {
        let s = self.scale as f64;
        derived.area / (4.0 * PI * PI * s * s)
    }
}

/// Spectral weight of one lattice site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteWeight {
    pub px: f64,
    pub py: f64,
    pub w: f64,
    pub omega: f64,
    /// γ_x f_x N.
    pub weight: f64,
}

fn site_weight(
    channel: Channel,
    branch: Branch,
    w: f64,
    derived: &DerivedParams,
    beta: f64,
) -> Result<(f64, f64)> {
    let f = bogoliubov_factors(w, derived)?;
    let n = thermal_weight(branch, &f, beta);
    let shape = channel_shape(channel, branch, &f);
    Ok((f.omega(branch), derived.gamma(channel) * shape * n))
}

/// One weight per lattice site, rows ordered by `p_y`, then `p_x`.
pub fn discrete_weights(
    channel: Channel,
    branch: Branch,
    lattice: &LatticeSpec,
    derived: &DerivedParams,
    beta: f64,
    exec: Execution,
) -> Result<Vec<DiscreteWeight>> {
    let axis = lattice.axis();
    let rows = map_indexed(exec, axis.len(), |iy| -> Result<Vec<DiscreteWeight>> {
        let py = axis[iy];
        let mut out = Vec::new();
        for &px in &axis {
            if !lattice.contains(px, py) {
                continue;
            }
            let w = px * px + py * py;
            let (omega, weight) = site_weight(channel, branch, w, derived, beta)?;
            out.push(DiscreteWeight {
                px,
                py,
                w,
                omega,
                weight,
            });
        }
        Ok(out)
    });
    let mut all = Vec::new();
    for row in rows {
        all.extend(row?);
    }
    Ok(all)
}

/// Binned lattice weights next to the matching continuum bin integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedComparison {
    pub edges: Vec<f64>,
    /// Σ weights per bin, in continuum units.
    pub lattice: Vec<f64>,
    /// ∫_bin G dω.
    pub continuum: Vec<f64>,
    /// Bins taking part in the deviation.
    pub compared: Vec<bool>,
    pub max_rel_deviation: f64,
    /// Relative difference of the totals.
    pub total_rel_deviation: f64,
}

impl BinnedComparison {
    pub fn relative_deviation(&self, bin: usize) -> f64 {
        (self.lattice[bin] - self.continuum[bin]).abs() / self.continuum[bin].abs()
    }
}

/// Compares binned lattice weights with continuum bin integrals of `G_x`.
///
/// Bins partition the exact branch support into equal widths. Bins whose
/// continuum integral is below 1e-12 of the total are skipped. At finite
/// temperature the bin touching ω₀ is skipped as well: its continuum integral
/// diverges logarithmically while the lattice sum is finite.
pub fn compare_binned(
    channel: Channel,
    branch: Branch,
    lattice: &LatticeSpec,
    bins: usize,
    derived: &DerivedParams,
    beta: f64,
    exec: Execution,
) -> Result<BinnedComparison> {
    if bins < 16 {
        return Err(Error::validation("bins", format!("must be >= 16, got {bins}")));
    }
    let support = derived.support(branch);
    if !(support.hi > support.lo) {
        return Err(Error::domain("compare_binned", format!("empty {branch} support")));
    }
    let edges: Vec<f64> = (0..=bins)
        .map(|i| support.lo + support.width() * i as f64 / bins as f64)
        .collect();
    let lattice_bins = binned_lattice(channel, branch, lattice, &edges, derived, beta, exec)?;
    let cusp_bin = match branch {
        Branch::Landau => bins - 1,
        Branch::Beliaev => 0,
    };
    let continuum: Vec<f64> = map_indexed(exec, bins, |i| {
        if beta.is_finite() && i == cusp_bin {
            return Ok(f64::NAN);
        }
        continuum_bin(channel, branch, edges[i], edges[i + 1], derived, beta)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let total_abs: f64 = continuum.iter().filter(|c| c.is_finite()).map(|c| c.abs()).sum();
    let compared: Vec<bool> = continuum
        .iter()
        .map(|c| c.is_finite() && total_abs > 0.0 && c.abs() > 1e-12 * total_abs)
        .collect();
    let mut max_rel = 0.0f64;
    for i in 0..bins {
        if compared[i] {
            max_rel = max_rel.max((lattice_bins[i] - continuum[i]).abs() / continuum[i].abs());
        }
    }
    let (mut lat_total, mut cont_total) = (0.0, 0.0);
    for i in 0..bins {
        if continuum[i].is_finite() {
            lat_total += lattice_bins[i];
            cont_total += continuum[i];
        }
    }
    let total_rel_deviation = if cont_total == 0.0 {
        if lat_total == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        ((lat_total - cont_total) / cont_total).abs()
    };
    Ok(BinnedComparison {
        edges,
        lattice: lattice_bins,
        continuum,
        compared,
        max_rel_deviation: max_rel,
        total_rel_deviation,
    })
}

/// Deviations at `lattice` and at twice its scale; errors if refinement does
/// not reduce the deviation.
pub fn check_refinement(
    channel: Channel,
    branch: Branch,
    lattice: &LatticeSpec,
    bins: usize,
    derived: &DerivedParams,
    beta: f64,
    exec: Execution,
) -> Result<(f64, f64)> {
    let coarse = compare_binned(channel, branch, lattice, bins, derived, beta, exec)?;
    let fine = compare_binned(channel, branch, &lattice.refined(), bins, derived, beta, exec)?;
    let (a, b) = (coarse.max_rel_deviation, fine.max_rel_deviation);
    if a > 0.0 && b >= a {
        return Err(Error::non_convergence(
            "compare_binned",
            format!("deviation {b:e} at scale {} not below {a:e} at scale {}", 2 * lattice.scale, lattice.scale),
        ));
    }
    Ok((a, b))
}

/// Σ weights per frequency bin. Rows of the lattice are reduced in parallel
/// and merged in row order.
fn binned_lattice(
    channel: Channel,
    branch: Branch,
    lattice: &LatticeSpec,
    edges: &[f64],
    derived: &DerivedParams,
    beta: f64,
    exec: Execution,
) -> Result<Vec<f64>> {
    let bins = edges.len() - 1;
    let lo = edges[0];
    let width = (edges[bins] - lo) / bins as f64;
    let axis = lattice.axis();
    let per_site = lattice.modes_per_site(derived);
    let rows = map_indexed(exec, axis.len(), |iy| -> Result<Vec<f64>> {
        let py = axis[iy];
        let mut acc = vec![0.0; bins];
        for &px in &axis {
            if !lattice.contains(px, py) {
                continue;
            }
            let (omega, weight) = site_weight(channel, branch, px * px + py * py, derived, beta)?;
            if weight == 0.0 {
                continue;
            }
            let bin = (((omega - lo) / width).floor().max(0.0) as usize).min(bins - 1);
            acc[bin] += weight;
        }
        Ok(acc)
    });
    let mut total = vec![0.0; bins];
    for row in rows {
        for (t, v) in total.iter_mut().zip(row?) {
            *t += v;
        }
    }
    for t in &mut total {
        *t *= per_site;
    }
    Ok(total)
}

/// ∫ G dω over [ω_a, ω_b] evaluated as P₀γ ∫ f N dW with W = u².
fn continuum_bin(
    channel: Channel,
    branch: Branch,
    omega_a: f64,
    omega_b: f64,
    derived: &DerivedParams,
    beta: f64,
) -> Result<f64> {
    let to_w = |omega: f64| -> Result<f64> {
        if omega == derived.omega_0 {
            Ok(0.0)
        } else {
            invert_branch(omega, branch, derived)
        }
    };
    let (wa, wb) = (to_w(omega_a)?, to_w(omega_b)?);
    let (w_lo, w_hi) = if wa < wb { (wa, wb) } else { (wb, wa) };
    let (u_lo, u_hi) = (w_lo.sqrt(), w_hi.sqrt());
    let panels = 8;
    let edges: Vec<f64> = (0..=panels)
        .map(|k| u_lo + (u_hi - u_lo) * k as f64 / panels as f64)
        .collect();
    let integrand = |u: f64| {
        let w = u * u;
        match bogoliubov_factors(w, derived) {
            Ok(f) => channel_shape(channel, branch, &f) * thermal_weight(branch, &f, beta) * 2.0 * u,
            Err(_) => 0.0,
        }
    };
    let value = integrate_doubling("compare_binned", &edges, 32, 1e-10, integrand)?;
    Ok(derived.prefactor * derived.gamma(channel) * value)
}
