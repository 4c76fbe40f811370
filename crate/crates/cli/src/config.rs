//! Run configuration: TOML on disk, fully resolved before anything is computed.
//!
//! The resolved configuration is echoed as the manifest of every output file,
//! so a manifest parses back into a configuration that reproduces the file.

use std::path::Path;

use cavityspec_core::matsubara::BathToggles;
use cavityspec_core::{Branch, Channel, IrCutoff, PhysicalParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub params: ParamsSection,
    #[serde(default)]
    pub toggles: TogglesSection,
    #[serde(default)]
    pub grid: GridSection,
    /// Scalar results of the run. Output only; ignored when read back.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<toml::Table>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub figure: Option<String>,
    /// Output file stem.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    #[serde(rename = "nU", skip_serializing_if = "Option::is_none")]
    pub n_u: Option<f64>,
    #[serde(rename = "omega_bar_P", skip_serializing_if = "Option::is_none")]
    pub omega_bar_p: Option<f64>,
    #[serde(rename = "U0_mag", skip_serializing_if = "Option::is_none")]
    pub u0_mag: Option<f64>,
    #[serde(rename = "N_C", skip_serializing_if = "Option::is_none")]
    pub n_c: Option<f64>,
    #[serde(rename = "L_x", skip_serializing_if = "Option::is_none")]
    pub l_x: Option<f64>,
    #[serde(rename = "L_y", skip_serializing_if = "Option::is_none")]
    pub l_y: Option<f64>,
    #[serde(rename = "Delta_C", skip_serializing_if = "Option::is_none")]
    pub delta_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(rename = "omega_D", skip_serializing_if = "Option::is_none")]
    pub omega_d: Option<f64>,
    /// `inf` selects zero temperature.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(rename = "omega_R_Hz", skip_serializing_if = "Option::is_none")]
    pub omega_r_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atom_mass_kg: Option<f64>,
    /// `"zero_mode_cell"`, `"none"` or an explicit W in ω_R.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ir_cutoff: Option<CutoffValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CutoffValue {
    Fixed(f64),
    Named(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TogglesSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quasiparticle_channels: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cavity_loss: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direct_coupling: Option<bool>,
}

/// Command-specific settings. Each command fills in the fields it uses.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<String>,
    /// `"pump"` or `"nU"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<String>,
    /// Grid endpoints are fractions of the critical pump.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative: Option<bool>,
    /// `"linear"` or `"log"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// Explicit grid; overrides start/stop/points.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    /// `"disc"` or `"square"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<String>,
    /// `"cell_centered"` or `"integer"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset: Option<String>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))
    }

    /// Reads a TOML file, or the manifest at the top of an emitted CSV file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        if text.starts_with('#') {
            Self::from_toml(&manifest_text(&text))
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn physical_params(&self) -> Result<PhysicalParams, CliError> {
        self.params.resolve(PhysicalParams::default())
    }

    pub fn bath_toggles(&self) -> BathToggles {
        let full = BathToggles::FULL;
        BathToggles {
            quasiparticle_channels: self.toggles.quasiparticle_channels.unwrap_or(full.quasiparticle_channels),
            cavity_loss: self.toggles.cavity_loss.unwrap_or(full.cavity_loss),
            direct_coupling: self.toggles.direct_coupling.unwrap_or(full.direct_coupling),
        }
    }

    /// Replaces params and toggles with their fully resolved values.
    pub fn resolve_common(&mut self) -> Result<PhysicalParams, CliError> {
        let p = self.physical_params()?;
        let t = self.bath_toggles();
        self.params = ParamsSection::from_params(&p);
        self.toggles = TogglesSection {
            quasiparticle_channels: Some(t.quasiparticle_channels),
            cavity_loss: Some(t.cavity_loss),
            direct_coupling: Some(t.direct_coupling),
        };
        self.run.version = Some(env!("CARGO_PKG_VERSION").to_string());
        Ok(p)
    }
}

/// Strips the `# ` prefix from the leading comment block of an output file.
pub fn manifest_text(text: &str) -> String {
    let mut out = String::new();
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        let body = line.strip_prefix('#').unwrap_or(line);
        out.push_str(body.strip_prefix(' ').unwrap_or(body));
        out.push('\n');
    }
    out
}

impl ParamsSection {
    pub fn resolve(&self, base: PhysicalParams) -> Result<PhysicalParams, CliError> {
        let ir_cutoff = match &self.ir_cutoff {
            None => base.ir_cutoff,
            Some(CutoffValue::Fixed(w)) => IrCutoff::Fixed(*w),
            Some(CutoffValue::Named(s)) => match s.as_str() {
                "zero_mode_cell" => IrCutoff::ZeroModeCell,
                "none" => IrCutoff::None,
                other => {
                    return Err(CliError::Config(format!(
                        "ir_cutoff: expected \"zero_mode_cell\", \"none\" or a number, got \"{other}\""
                    )))
                }
            },
        };
        Ok(PhysicalParams {
            n_u: self.n_u.unwrap_or(base.n_u),
            omega_bar_p: self.omega_bar_p.unwrap_or(base.omega_bar_p),
            u0_mag: self.u0_mag.unwrap_or(base.u0_mag),
            n_c: self.n_c.unwrap_or(base.n_c),
            l_x_um: self.l_x.unwrap_or(base.l_x_um),
            l_y_um: self.l_y.unwrap_or(base.l_y_um),
            delta_c: self.delta_c.unwrap_or(base.delta_c),
            kappa: self.kappa.unwrap_or(base.kappa),
            omega_d: self.omega_d.unwrap_or(base.omega_d),
            beta: self.beta.unwrap_or(base.beta),
            n_max: self.n_max.unwrap_or(base.n_max),
            omega_r_hz: self.omega_r_hz.unwrap_or(base.omega_r_hz),
            atom_mass_kg: self.atom_mass_kg.unwrap_or(base.atom_mass_kg),
            ir_cutoff,
        })
    }

    pub fn from_params(p: &PhysicalParams) -> Self {
        Self {
            n_u: Some(p.n_u),
            omega_bar_p: Some(p.omega_bar_p),
            u0_mag: Some(p.u0_mag),
            n_c: Some(p.n_c),
            l_x: Some(p.l_x_um),
            l_y: Some(p.l_y_um),
            delta_c: Some(p.delta_c),
            kappa: Some(p.kappa),
            omega_d: Some(p.omega_d),
            beta: Some(p.beta),
            n_max: Some(p.n_max),
            omega_r_hz: Some(p.omega_r_hz),
            atom_mass_kg: Some(p.atom_mass_kg),
            ir_cutoff: Some(match p.ir_cutoff {
                IrCutoff::ZeroModeCell => CutoffValue::Named("zero_mode_cell".into()),
                IrCutoff::None => CutoffValue::Named("none".into()),
                IrCutoff::Fixed(w) => CutoffValue::Fixed(w),
            }),
        }
    }
}

/// Channel selection; `"all"` expands to the four channels.
pub fn parse_channels(s: &str) -> Result<Vec<Channel>, CliError> {
    if s == "all" {
        Ok(Channel::ALL.to_vec())
    } else {
        Ok(vec![s.parse::<Channel>()?])
    }
}

pub fn parse_branches(s: &str) -> Result<Vec<Branch>, CliError> {
    if s == "all" {
        Ok(Branch::ALL.to_vec())
    } else {
        Ok(vec![s.parse::<Branch>()?])
    }
}

impl GridSection {
    /// Grid values: `values` if given, else `points` samples from `start` to `stop`.
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        if let Some(v) = &self.values {
            return Ok(v.clone());
        }
        let (start, stop, n) = match (self.start, self.stop, self.points) {
            (Some(a), Some(b), Some(n)) => (a, b, n),
            _ => return Err(CliError::Config("grid needs start, stop and points, or values".into())),
        };
        let log = match self.spacing.as_deref().unwrap_or("linear") {
            "linear" => false,
            "log" => true,
            other => return Err(CliError::Config(format!("grid.spacing: unknown spacing \"{other}\""))),
        };
        if log && !(start > 0.0 && stop > 0.0) {
            return Err(CliError::Config("grid: log spacing needs positive endpoints".into()));
        }
        Ok(match n {
            0 => Vec::new(),
            1 => vec![start],
            _ => (0..n)
                .map(|i| {
                    let t = i as f64 / (n - 1) as f64;
                    if log {
                        start * (stop / start).powf(t)
                    } else {
                        start + (stop - start) * t
                    }
                })
                .collect(),
        })
    }

    /// Sets the endpoints and point count unless already present.
    pub fn default_range(&mut self, start: f64, stop: f64, points: usize) {
        if self.values.is_none() {
            self.start.get_or_insert(start);
            self.stop.get_or_insert(stop);
            self.points.get_or_insert(points);
        }
    }
}
