//! Canned configurations for the figure presets.

use crate::config::{GridSection, ParamsSection, RunConfig, RunSection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Figure {
    #[value(name = "fig1")]
    Fig1,
    #[value(name = "fig2")]
    Fig2,
    #[value(name = "fig3")]
    Fig3,
    #[value(name = "figS1")]
    FigS1,
    #[value(name = "figS2")]
    FigS2,
    #[value(name = "figS3")]
    FigS3,
    #[value(name = "figS4")]
    FigS4,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::FigS1 => "figS1",
            Figure::FigS2 => "figS2",
            Figure::FigS3 => "figS3",
            Figure::FigS4 => "figS4",
        }
    }
}

/// ω̄_P = 0.01, nU = 0.1, U₀ = −10⁻³, N_C = 5·10⁴, 60 μm × 11 μm, T = 0.
fn fig1_params() -> ParamsSection {
    ParamsSection {
        n_u: Some(0.1),
        omega_bar_p: Some(0.01),
        u0_mag: Some(1e-3),
        n_c: Some(5e4),
        l_x: Some(60.0),
        l_y: Some(11.0),
        omega_r_hz: Some(3560.0),
        beta: Some(f64::INFINITY),
        ..Default::default()
    }
}

/// Fig. 1 values with Δ_C = 2, nU = 0.016, κ = 1.25, ω_D = 10⁹, n_max = 10⁴, β = 1710.
fn fig2_params() -> ParamsSection {
    ParamsSection {
        n_u: Some(0.016),
        delta_c: Some(2.0),
        kappa: Some(1.25),
        omega_d: Some(1e9),
        n_max: Some(10_000),
        beta: Some(1710.0),
        ..fig1_params()
    }
}

fn job(figure: Figure, command: &str, output: &str, params: ParamsSection, grid: GridSection) -> RunConfig {
    RunConfig {
        run: RunSection {
            command: Some(command.into()),
            figure: Some(figure.name().into()),
            output: Some(output.into()),
            version: None,
        },
        params,
        grid,
        ..Default::default()
    }
}

fn pump_sweep() -> GridSection {
    GridSection {
        sweep: Some("pump".into()),
        relative: Some(true),
        start: Some(0.0),
        stop: Some(0.999),
        points: Some(200),
        ..Default::default()
    }
}

/// Unexpanded jobs for `figure`.
pub fn jobs(figure: Figure) -> Vec<RunConfig> {
    let name = figure.name();
    match figure {
        Figure::Fig1 => vec![job(
            figure,
            "spectral",
            name,
            fig1_params(),
            GridSection {
                branch: Some("beliaev".into()),
                points: Some(2001),
                ..Default::default()
            },
        )],
        Figure::FigS1 => vec![job(figure, "cusp", name, fig1_params(), GridSection::default())],
        Figure::Fig2 => vec![job(figure, "observe", name, fig2_params(), pump_sweep())],
        Figure::Fig3 => [0.01, 0.02]
            .into_iter()
            .map(|pump| {
                job(
                    figure,
                    "observe",
                    &format!("fig3_pump_{pump}"),
                    ParamsSection {
                        omega_bar_p: Some(pump),
                        ..fig2_params()
                    },
                    GridSection {
                        sweep: Some("nU".into()),
                        start: Some(0.001),
                        stop: Some(0.1),
                        points: Some(100),
                        ..Default::default()
                    },
                )
            })
            .collect(),
        Figure::FigS2 => {
            let left = ParamsSection {
                beta: Some(1.71),
                ..fig2_params()
            };
            let right = ParamsSection {
                delta_c: Some(20.0),
                ..left.clone()
            };
            vec![
                job(figure, "observe", "figS2_left", left, pump_sweep()),
                job(figure, "observe", "figS2_right", right, pump_sweep()),
            ]
        }
        Figure::FigS3 => vec![job(
            figure,
            "observe",
            name,
            ParamsSection {
                delta_c: Some(2000.0),
                kappa: Some(1250.0),
                beta: Some(1.71),
                ..fig2_params()
            },
            pump_sweep(),
        )],
        Figure::FigS4 => vec![job(
            figure,
            "critical",
            name,
            fig2_params(),
            GridSection {
                start: Some(0.005),
                stop: Some(0.1),
                points: Some(20),
                ..Default::default()
            },
        )],
    }
}
