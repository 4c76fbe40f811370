//! Subcommands. Each resolved job produces exactly one table.

use std::str::FromStr;

use cavityspec_core::critical::{critical_pump, open_dicke_closed_form};
use cavityspec_core::exec::map_slice;
use cavityspec_core::fit::{linear_fit, power_law_fit};
use cavityspec_core::kernel::{BathMeasure, KERNEL_TOL};
use cavityspec_core::lattice::{compare_binned, Geometry, LatticeSpec, Offset};
use cavityspec_core::matsubara::{BathToggles, QuadraticForm, Variances};
use cavityspec_core::spectral::{cusp_coefficients, spectral_point};
use cavityspec_core::{
    dispersion, validate_and_derive, Branch, Channel, Error as CoreError, Execution, PhysicalParams,
};

use crate::config::{parse_branches, parse_channels, RunConfig};
use crate::emit::{Cell, Table};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Derive,
    Spectral,
    Cusp,
    Kernels,
    Observe,
    Critical,
    Oracle,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Derive => "derive",
            Command::Spectral => "spectral",
            Command::Cusp => "cusp",
            Command::Kernels => "kernels",
            Command::Observe => "observe",
            Command::Critical => "critical",
            Command::Oracle => "oracle",
        }
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "derive" => Command::Derive,
            "spectral" => Command::Spectral,
            "cusp" => Command::Cusp,
            "kernels" => Command::Kernels,
            "observe" => Command::Observe,
            "critical" => Command::Critical,
            "oracle" => Command::Oracle,
            other => return Err(CliError::Config(format!("run.command: unknown command \"{other}\""))),
        })
    }
}

/// Output of one job.
#[derive(Debug, Clone)]
pub struct Output {
    pub stem: String,
    pub manifest: RunConfig,
    pub table: Table,
    /// Rows whose status is a numerical failure.
    pub failed_rows: usize,
}

fn command_of(config: &RunConfig) -> Result<Command, CliError> {
    config
        .run
        .command
        .as_deref()
        .ok_or_else(|| CliError::Config("run.command is not set".into()))?
        .parse()
}

/// Fills in defaults and splits per-channel commands into one job per channel.
pub fn expand(mut config: RunConfig) -> Result<Vec<RunConfig>, CliError> {
    let command = command_of(&config)?;
    let params = config.resolve_common()?;
    let stem = config.run.output.clone().unwrap_or_else(|| command.name().to_string());
    config.result = None;
    let g = &mut config.grid;
    match command {
        Command::Derive => {}
        Command::Spectral | Command::Cusp => {
            let channel = g.channel.get_or_insert_with(|| "all".into()).clone();
            if command == Command::Spectral {
                g.branch.get_or_insert_with(|| "all".into());
                parse_branches(g.branch.as_deref().unwrap())?;
                g.points.get_or_insert(2001);
            } else {
                g.spacing.get_or_insert_with(|| "log".into());
                g.default_range(1e-10, 1e-2, 161);
            }
            let channels = parse_channels(&channel)?;
            if channels.len() > 1 {
                return Ok(channels
                    .into_iter()
                    .map(|ch| {
                        let mut c = config.clone();
                        c.grid.channel = Some(ch.name().to_string());
                        c.run.output = Some(format!("{stem}_{}", ch.name()));
                        c
                    })
                    .collect());
            }
        }
        Command::Kernels => {
            g.spacing.get_or_insert_with(|| "log".into());
            g.default_range(1e-3, 1e3, 121);
        }
        Command::Observe => {
            let sweep = g.sweep.get_or_insert_with(|| "pump".into()).clone();
            match sweep.as_str() {
                "pump" => {
                    let relative = *g.relative.get_or_insert(true);
                    let stop = if relative { 0.999 } else { params.omega_bar_p };
                    g.default_range(0.0, stop, 100);
                }
                "nU" => {
                    g.relative = None;
                    g.default_range(0.001, 0.1, 100);
                }
                other => {
                    return Err(CliError::Config(format!(
                        "grid.sweep: expected \"pump\" or \"nU\", got \"{other}\""
                    )))
                }
            }
        }
        Command::Critical => {
            if g.values.is_none() && g.points.is_none() {
                g.values = Some(vec![params.n_u]);
            }
        }
        Command::Oracle => {
            g.channel.get_or_insert_with(|| "all".into());
            g.branch.get_or_insert_with(|| "all".into());
            g.scale.get_or_insert(512);
            g.bins.get_or_insert(32);
            g.geometry.get_or_insert_with(|| "disc".into());
            g.offset.get_or_insert_with(|| "cell_centered".into());
        }
    }
    if command != Command::Derive && command != Command::Spectral && command != Command::Oracle {
        g.values()?;
    }
    config.run.output = Some(stem);
    Ok(vec![config])
}

/// Runs one resolved job.
pub fn execute(config: &RunConfig) -> Result<Output, CliError> {
    let command = command_of(config)?;
    let params = config.physical_params()?;
    let mut manifest = config.clone();
    let mut result = toml::Table::new();
    let (table, failed_rows) = match command {
        Command::Derive => (derive(&params)?, 0),
        Command::Spectral => (spectral(config, &params)?, 0),
        Command::Cusp => (cusp(config, &params, &mut result)?, 0),
        Command::Kernels => (kernels(config, &params, &mut result)?, 0),
        Command::Observe => observe(config, &params, &mut result)?,
        Command::Critical => critical(config, &params, &mut result)?,
        Command::Oracle => (oracle(config, &params, &mut result)?, 0),
    };
    manifest.result = (!result.is_empty()).then_some(result);
    Ok(Output {
        stem: config.run.output.clone().unwrap_or_else(|| command.name().to_string()),
        manifest,
        table,
        failed_rows,
    })
}

fn status(e: &CoreError) -> &'static str {
    match e {
        CoreError::Validation { .. } => "invalid",
        CoreError::Domain { .. } => "domain",
        CoreError::NonConvergence { .. } => "non_convergence",
        CoreError::Supercritical(_) => "supercritical",
        CoreError::NoRoot(_) => "no_root",
    }
}

fn is_failure(e: &CoreError) -> bool {
    matches!(e, CoreError::NonConvergence { .. } | CoreError::NoRoot(_))
}

fn single_channel(config: &RunConfig) -> Result<Channel, CliError> {
    Ok(config.grid.channel.as_deref().unwrap_or("C").parse::<Channel>()?)
}

fn derive(params: &PhysicalParams) -> Result<Table, CliError> {
    let d = validate_and_derive(params)?;
    let mut t = Table::new(&["quantity", "value"]);
    let mut rows: Vec<(&str, f64)> = vec![
        ("omega_c0p", d.omega_c0p),
        ("omega_0", d.omega_0),
        ("alpha0", d.alpha0),
        ("phi_0", d.phi_0),
        ("lambda", d.lambda),
        ("eta", d.eta),
        ("lambda_0", d.lambda_0),
    ];
    let gamma_names = ["gamma_C", "gamma_AC", "gamma_A", "gamma_Adot"];
    rows.extend(gamma_names.iter().zip(d.gamma).map(|(n, g)| (*n, g)));
    rows.extend([
        ("prefactor", d.prefactor),
        ("area", d.area),
        ("w_edge", d.w_edge),
        ("w_cutoff", d.w_cutoff),
        ("landau_lo", d.landau.lo),
        ("landau_hi", d.landau.hi),
        ("beliaev_lo", d.beliaev.lo),
        ("beliaev_hi", d.beliaev.hi),
        ("k_phys_per_m", params.k_phys()),
    ]);
    for (name, v) in rows {
        t.push(vec![name.into(), v.into()]);
    }
    Ok(t)
}

fn spectral(config: &RunConfig, params: &PhysicalParams) -> Result<Table, CliError> {
    let d = validate_and_derive(params)?;
    let channel = single_channel(config)?;
    let branches = parse_branches(config.grid.branch.as_deref().unwrap_or("all"))?;
    let points = config.grid.points.unwrap_or(2001);
    // uniform in √W, strictly inside the band so that the inversion is defined
    let mut samples = Vec::new();
    for branch in branches {
        for i in 1..=points {
            let u = i as f64 / (points + 1) as f64;
            samples.push((branch, 0.5 * u * u));
        }
    }
    let rows = map_slice(Execution::Parallel, &samples, |&(branch, w)| {
        let (omega, _) = dispersion(w, branch, &d)?;
        let point = spectral_point(channel, branch, omega, &d, params.beta)?;
        Ok::<_, CoreError>((branch, point))
    });
    let mut rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    rows.sort_by(|a, b| a.1.omega.total_cmp(&b.1.omega));
    let mut t = Table::new(&["omega", "w", "branch", "f", "n", "g"]);
    for (branch, p) in rows {
        t.push(vec![
            p.omega.into(),
            p.w.into(),
            branch.name().into(),
            p.f_value.into(),
            p.n_value.into(),
            p.g.into(),
        ]);
    }
    Ok(t)
}

fn cusp(config: &RunConfig, params: &PhysicalParams, result: &mut toml::Table) -> Result<Table, CliError> {
    let d = validate_and_derive(params)?;
    let channel = single_channel(config)?;
    let k = cusp_coefficients(channel, &d)?;
    let scale = d.prefactor * d.gamma(channel);
    let limit = scale * k.characteristic(0.0);
    let grid = config.grid.values()?;
    let mut t = Table::new(&["w", "omega", "exact", "approximant", "approximant_closed_form_b", "rel_error"]);
    let (mut fx, mut fy) = (Vec::new(), Vec::new());
    for &w in &grid {
        let (omega, _) = dispersion(w, Branch::Beliaev, &d)?;
        // zero temperature: the approximant describes the T = 0 Beliaev density
        let exact = if w == 0.0 {
            limit
        } else {
            spectral_point(channel, Branch::Beliaev, omega, &d, f64::INFINITY)?.g
        };
        let approx = scale * k.characteristic(w);
        let closed_form_b = scale * k.with_closed_form_b(w);
        if w > 0.0 && w <= 1e-4 && exact != limit {
            fx.push(w);
            fy.push(exact - limit);
        }
        t.push(vec![
            w.into(),
            omega.into(),
            exact.into(),
            approx.into(),
            closed_form_b.into(),
            ((approx - exact) / exact).into(),
        ]);
    }
    result.insert("limit".into(), limit.into());
    result.insert("a".into(), k.a.into());
    result.insert("b_closed_form".into(), k.b.into());
    result.insert("c".into(), k.c.into());
    result.insert("linear".into(), k.linear.into());
    result.insert("norm".into(), k.norm.into());
    if let Some(fit) = power_law_fit(&fx, &fy) {
        result.insert("exponent_in_w".into(), fit.slope.into());
        result.insert("exponent_r2".into(), fit.r2.into());
    }
    Ok(t)
}

fn kernels(config: &RunConfig, params: &PhysicalParams, result: &mut toml::Table) -> Result<Table, CliError> {
    let d = validate_and_derive(params)?;
    let measure = BathMeasure::build(&d, params.beta, KERNEL_TOL)?;
    let grid = config.grid.values()?;
    let xi = map_slice(Execution::Parallel, &grid, |&nu| measure.xi(nu));
    let mut t = Table::new(&["nu", "xi_C", "xi_AC", "xi_A", "xi_Adot"]);
    for (nu, x) in grid.iter().zip(xi) {
        let mut row = vec![Cell::Num(*nu)];
        row.extend(x.iter().map(|&v| Cell::Num(v)));
        t.push(row);
    }
    let xi0 = measure.reorganization();
    let literal = measure.literal_integral();
    for ch in Channel::ALL {
        result.insert(format!("xi0_{}", ch.name()), xi0[ch.index()].into());
        result.insert(format!("integral_{}", ch.name()), literal[ch.index()].into());
    }
    result.insert("nodes".into(), (measure.len() as i64).into());
    Ok(t)
}

fn without_bath(t: BathToggles) -> BathToggles {
    BathToggles {
        quasiparticle_channels: false,
        ..t
    }
}

fn variances_at(params: &PhysicalParams, toggles: BathToggles) -> Result<Variances, CoreError> {
    QuadraticForm::new(params, toggles)?.variances(Execution::Sequential)
}

fn pair(v: &Result<Variances, CoreError>) -> (f64, f64) {
    match v {
        Ok(v) => (v.q_c2, v.q_a2),
        Err(_) => (f64::NAN, f64::NAN),
    }
}

fn first_error<'a>(results: impl IntoIterator<Item = Option<&'a CoreError>>) -> Option<&'a CoreError> {
    results.into_iter().flatten().next()
}

fn observe(
    config: &RunConfig,
    params: &PhysicalParams,
    result: &mut toml::Table,
) -> Result<(Table, usize), CliError> {
    validate_and_derive(params)?;
    let with_t = config.bath_toggles();
    let without_t = without_bath(with_t);
    let grid = config.grid.values()?;
    let mut failed = 0;
    if config.grid.sweep.as_deref() == Some("nU") {
        let rows = map_slice(Execution::Parallel, &grid, |&n_u| {
            let q = params.with_n_u(n_u);
            let cr = critical_pump(&q, with_t);
            let cr0 = critical_pump(&q, without_t);
            let with = variances_at(&q, with_t);
            let without = variances_at(&q, without_t);
            let err = first_error([with.as_ref().err(), without.as_ref().err(), cr.as_ref().err(), cr0.as_ref().err()]);
            let pump = q.omega_bar_p;
            let x = cr.as_ref().map_or(f64::NAN, |r| pump / r.pump);
            let x0 = cr0.as_ref().map_or(f64::NAN, |r| pump / r.pump);
            let (c, a) = pair(&with);
            let (c0, a0) = pair(&without);
            (
                err.is_some_and(is_failure),
                vec![
                    n_u.into(),
                    x.into(),
                    x0.into(),
                    c.into(),
                    a.into(),
                    c0.into(),
                    a0.into(),
                    (c / c0 - 1.0).into(),
                    (a / a0 - 1.0).into(),
                    err.map_or("ok", status).into(),
                ],
            )
        });
        let mut t = Table::new(&[
            "nU", "pump_over_cr", "pump_over_cr_0", "q_c2", "q_a2", "q_c2_0", "q_a2_0", "rel_c", "rel_a", "status",
        ]);
        for (fail, row) in rows {
            failed += fail as usize;
            t.push(row);
        }
        return Ok((t, failed));
    }

    let pcr = critical_pump(params, with_t)?.pump;
    let pcr0 = critical_pump(params, without_t)?.pump;
    result.insert("pump_cr".into(), pcr.into());
    result.insert("pump_cr_0".into(), pcr0.into());
    result.insert("rel_shift".into(), ((pcr - pcr0) / pcr0).into());
    let pumps: Vec<f64> = if config.grid.relative.unwrap_or(false) {
        grid.iter().map(|x| x * pcr).collect()
    } else {
        grid
    };
    let rows = map_slice(Execution::Parallel, &pumps, |&pump| {
        let x = pump / pcr;
        let with = variances_at(&params.with_pump(pump), with_t);
        let without = variances_at(&params.with_pump(pump), without_t);
        // naked system at the same distance from its own threshold
        let scaled = variances_at(&params.with_pump(x * pcr0), without_t);
        let err = first_error([with.as_ref().err(), without.as_ref().err(), scaled.as_ref().err()]);
        let (c, a) = pair(&with);
        let (c0, a0) = pair(&without);
        let (cs, as_) = pair(&scaled);
        (
            err.is_some_and(is_failure),
            vec![
                pump.into(),
                x.into(),
                (pump / pcr0).into(),
                c.into(),
                a.into(),
                c0.into(),
                a0.into(),
                (c / c0 - 1.0).into(),
                (a / a0 - 1.0).into(),
                cs.into(),
                as_.into(),
                (c / cs - 1.0).into(),
                (a / as_ - 1.0).into(),
                err.map_or("ok", status).into(),
            ],
        )
    });
    let mut t = Table::new(&[
        "pump",
        "pump_over_cr",
        "pump_over_cr_0",
        "q_c2",
        "q_a2",
        "q_c2_0",
        "q_a2_0",
        "rel_c",
        "rel_a",
        "q_c2_0_normalized",
        "q_a2_0_normalized",
        "rel_c_normalized",
        "rel_a_normalized",
        "status",
    ]);
    for (fail, row) in rows {
        failed += fail as usize;
        t.push(row);
    }
    Ok((t, failed))
}

fn critical(
    config: &RunConfig,
    params: &PhysicalParams,
    result: &mut toml::Table,
) -> Result<(Table, usize), CliError> {
    validate_and_derive(params)?;
    let with_t = config.bath_toggles();
    let without_t = without_bath(with_t);
    let grid = config.grid.values()?;
    let rows = map_slice(Execution::Parallel, &grid, |&n_u| {
        let q = params.with_n_u(n_u);
        let naked = critical_pump(&q, without_t);
        let shifted = critical_pump(&q, with_t);
        (n_u, open_dicke_closed_form(&q), naked, shifted)
    });
    let mut t = Table::new(&[
        "nU",
        "pump_cr_0",
        "pump_cr",
        "rel_shift",
        "lambda_cr",
        "pump_cr_0_closed_form",
        "residual",
        "evaluations",
        "status",
    ]);
    let (mut fx, mut fy) = (Vec::new(), Vec::new());
    let mut failed = 0;
    for (n_u, closed, naked, shifted) in rows {
        let err = first_error([naked.as_ref().err(), shifted.as_ref().err()]);
        failed += err.is_some_and(is_failure) as usize;
        let p0 = naked.as_ref().map_or(f64::NAN, |r| r.pump);
        let (p, residual, evaluations) = shifted
            .as_ref()
            .map_or((f64::NAN, f64::NAN, f64::NAN), |r| (r.pump, r.residual, r.evaluations as f64));
        let rel = (p - p0) / p0;
        if err.is_none() {
            fx.push(n_u);
            fy.push(rel);
        }
        t.push(vec![
            n_u.into(),
            p0.into(),
            p.into(),
            rel.into(),
            (params.u0_mag * p).sqrt().into(),
            closed.into(),
            residual.into(),
            evaluations.into(),
            err.map_or("ok", status).into(),
        ]);
    }
    if let Some(fit) = linear_fit(&fx, &fy) {
        result.insert("fit_slope".into(), fit.slope.into());
        result.insert("fit_intercept".into(), fit.intercept.into());
        result.insert("fit_r2".into(), fit.r2.into());
    }
    Ok((t, failed))
}

fn oracle(config: &RunConfig, params: &PhysicalParams, result: &mut toml::Table) -> Result<Table, CliError> {
    let d = validate_and_derive(params)?;
    let g = &config.grid;
    let geometry = match g.geometry.as_deref().unwrap_or("disc") {
        "disc" => Geometry::Disc,
        "square" => Geometry::Square,
        other => return Err(CliError::Config(format!("grid.geometry: unknown geometry \"{other}\""))),
    };
    let offset = match g.offset.as_deref().unwrap_or("cell_centered") {
        "cell_centered" => Offset::CellCentered,
        "integer" => Offset::Integer,
        other => return Err(CliError::Config(format!("grid.offset: unknown offset \"{other}\""))),
    };
    let lattice = LatticeSpec::new(g.scale.unwrap_or(512), geometry, offset)?;
    let bins = g.bins.unwrap_or(32);
    let channels = parse_channels(g.channel.as_deref().unwrap_or("all"))?;
    let branches = parse_branches(g.branch.as_deref().unwrap_or("all"))?;
    let mut t = Table::new(&[
        "branch",
        "channel",
        "bin",
        "omega_lo",
        "omega_hi",
        "lattice",
        "continuum",
        "rel_deviation",
        "compared",
    ]);
    let mut max_dev = toml::Table::new();
    for &branch in &branches {
        for &ch in &channels {
            let c = compare_binned(ch, branch, &lattice, bins, &d, params.beta, Execution::Parallel)?;
            for bin in 0..bins {
                t.push(vec![
                    branch.name().into(),
                    ch.name().into(),
                    (bin as f64).into(),
                    c.edges[bin].into(),
                    c.edges[bin + 1].into(),
                    c.lattice[bin].into(),
                    c.continuum[bin].into(),
                    c.relative_deviation(bin).into(),
                    (c.compared[bin] as u8 as f64).into(),
                ]);
            }
            max_dev.insert(format!("{}_{}", branch.name(), ch.name()), c.max_rel_deviation.into());
        }
    }
    result.insert("max_rel_deviation".into(), max_dev.into());
    Ok(t)
}
