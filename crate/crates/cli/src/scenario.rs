//! Scenario execution: runs the requested simulation, emits CSV files and a
//! summary text file into the output directory.
//!
//! All numbers are written with 17 significant digits; the same config and
//! seed produce byte-identical files.

use std::path::{Path, PathBuf};

use cwmeas_core::dephasing::DephasingParams;
use cwmeas_core::error::{Error, Result};
use cwmeas_core::oracle;
use cwmeas_core::params::Sector;
use cwmeas_core::registration::{
    self, build_generator, classify, evolve, run_measurement, sample_trajectories,
    MagnetizationDistribution,
};
use cwmeas_core::table::{format_float, Cell, Table};
use cwmeas_core::thermo;

use crate::config::{Scenario, ScenarioConfig, ThetaChoice};

pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub summary_path: PathBuf,
}

/// Ordered key-value lines for the summary file.
struct Summary {
    lines: Vec<(String, String)>,
}

impl Summary {
    fn new() -> Self {
        Summary { lines: Vec::new() }
    }

    fn text(&mut self, key: &str, value: impl Into<String>) {
        self.lines.push((key.to_string(), value.into()));
    }

    fn float(&mut self, key: &str, value: f64) {
        self.text(key, format_float(value));
    }

    fn int(&mut self, key: &str, value: u64) {
        self.text(key, value.to_string());
    }

    fn write(&self, path: &Path) -> Result<()> {
        let mut body = String::new();
        for (key, value) in &self.lines {
            body.push_str(key);
            body.push_str(" = ");
            body.push_str(value);
            body.push('\n');
        }
        body.push_str(&format!("version = {}\n", env!("CARGO_PKG_VERSION")));
        std::fs::write(path, body)?;
        Ok(())
    }
}

fn echo_params(summary: &mut Summary, config: &ScenarioConfig) {
    let p = &config.params;
    summary.text("scenario", config.scenario.name());
    summary.int("params.N", p.n as u64);
    summary.float("params.J", p.j);
    summary.float("params.T", p.temperature);
    summary.float("params.gamma", p.gamma);
    summary.float("params.Gamma", p.debye_cutoff);
    summary.float("params.g", p.g);
    summary.int("params.n", p.n_tested as u64);
    summary.float("params.b_x", p.b_x);
    summary.float("rho0.r_uu", config.rho0.r_uu());
    summary.float("rho0.re_r_ud", config.rho0.r_ud().re);
    summary.float("rho0.im_r_ud", config.rho0.r_ud().im);
}

/// Key scalars of the configured model, emitted wherever they exist.
fn echo_scalars(summary: &mut Summary, config: &ScenarioConfig) {
    let p = &config.params;
    if p.g > 0.0 {
        if let Ok(dephasing) = DephasingParams::new(p.n, p.g) {
            summary.float("tau", dephasing.tau());
            summary.float("t_1", std::f64::consts::PI / p.g);
        }
    }
    if let Ok(g_c) = thermo::critical_coupling(p.j, p.temperature) {
        summary.float("g_c", g_c);
    }
    if let Ok(m_f) = thermo::ferromagnetic_magnetization(p.j, p.temperature, 0.0, Sector::Up) {
        summary.float("m_F", m_f);
    }
}

fn resolved_threshold(config: &ScenarioConfig) -> Result<f64> {
    match config.register.m_threshold {
        Some(threshold) => Ok(threshold),
        None => {
            let m_f = thermo::ferromagnetic_magnetization(
                config.params.j,
                config.params.temperature,
                0.0,
                Sector::Up,
            )
            .map_err(|_| {
                Error::Validation(
                    "no ferromagnetic phase at this temperature: set register.m_threshold explicitly"
                        .into(),
                )
            })?;
            Ok(m_f / 2.0)
        }
    }
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<RunReport> {
    std::fs::create_dir_all(&config.output_dir)?;
    let mut summary = Summary::new();
    echo_params(&mut summary, config);
    echo_scalars(&mut summary, config);
    let mut files = Vec::new();

    match config.scenario {
        Scenario::FreeEnergy => run_free_energy(config, &mut summary, &mut files)?,
        Scenario::CriticalCoupling => run_critical_coupling(config, &mut summary, &mut files)?,
        Scenario::Dephase => run_dephase(config, &mut summary, &mut files)?,
        Scenario::Register => run_register(config, &mut summary, &mut files)?,
        Scenario::Measure => run_measure(config, &mut summary, &mut files)?,
        Scenario::OracleCheck => run_oracle_check(config, &mut summary, &mut files)?,
    }

    let summary_path = config.output_dir.join("summary.txt");
    summary.write(&summary_path)?;
    Ok(RunReport {
        files,
        summary_path,
    })
}

fn emit(table: &Table, path: PathBuf, files: &mut Vec<PathBuf>) -> Result<()> {
    table.write_csv(&path)?;
    files.push(path);
    Ok(())
}

fn run_free_energy(
    config: &ScenarioConfig,
    summary: &mut Summary,
    files: &mut Vec<PathBuf>,
) -> Result<()> {
    let p = &config.params;
    for (index, &g) in config.curve.g_values.iter().enumerate() {
        if !(g >= 0.0) {
            return Err(Error::Validation(format!(
                "curve.g_values entry {g} must be non-negative"
            )));
        }
        let curve = thermo::export_curve(
            p.j,
            p.temperature,
            g,
            config.curve.sector,
            config.curve.grid_size,
        )?;
        let name = format!("free_energy_{}.csv", index + 1);
        summary.float(&format!("curve_{}.g", index + 1), g);
        summary.text(&format!("curve_{}.file", index + 1), name.clone());
        emit(&curve.to_table(), config.output_dir.join(name), files)?;
    }
    Ok(())
}

fn run_critical_coupling(
    config: &ScenarioConfig,
    summary: &mut Summary,
    files: &mut Vec<PathBuf>,
) -> Result<()> {
    let p = &config.params;
    let g_c = thermo::critical_coupling(p.j, p.temperature)?;
    let m_star = thermo::spinodal_magnetization(p.j, p.temperature)?;
    summary.float("m_star", m_star);
    let mut table = Table::new(["T", "g_c", "m_star"]);
    table.push_row(vec![
        Cell::Float(p.temperature),
        Cell::Float(g_c),
        Cell::Float(m_star),
    ]);
    emit(
        &table,
        config.output_dir.join("critical_coupling.csv"),
        files,
    )
}

fn run_dephase(
    config: &ScenarioConfig,
    summary: &mut Summary,
    files: &mut Vec<PathBuf>,
) -> Result<()> {
    let p = &config.params;
    let mut dephasing = DephasingParams::new(p.n, p.g)?;
    dephasing.n_tested = p.n_tested;
    let theta = match config.dephase.theta {
        ThetaChoice::Default => Some(p.default_bath_theta()),
        ThetaChoice::Disabled => None,
        ThetaChoice::Value(theta) => Some(theta),
    };
    if let Some(theta) = theta {
        dephasing = dephasing.with_bath(theta)?;
    }

    let t_1 = std::f64::consts::PI / p.g;
    let t_max = config.dephase.t_max.unwrap_or(2.5 * t_1);
    summary.float("dephase.t_max", t_max);
    if let Some(theta) = theta {
        summary.float("dephase.theta", theta);
        summary.float("t_B", dephasing.bath_onset_time()?);
        summary.text(
            "recurrences_suppressed",
            if dephasing.recurrences_suppressed()? {
                "true"
            } else {
                "false"
            },
        );
    }
    if p.n_tested > 1 {
        summary.float(
            "collective_characteristic_time",
            dephasing.characteristic_time(p.n_tested),
        );
    }

    let headers: Vec<&str> = if theta.is_some() {
        vec!["t", "exact", "gaussian", "damped"]
    } else {
        vec!["t", "exact", "gaussian"]
    };
    let mut table = Table::new(headers);
    let samples = config.dephase.samples;
    for i in 0..samples {
        let t = t_max * i as f64 / (samples - 1) as f64;
        let mut row = vec![
            Cell::Float(t),
            Cell::Float(dephasing.truncation_factor(t)),
            Cell::Float(dephasing.gaussian_envelope(t)),
        ];
        if theta.is_some() {
            row.push(Cell::Float(dephasing.damped_truncation_factor(t)?));
        }
        table.push_row(row);
    }
    emit(&table, config.output_dir.join("dephase.csv"), files)
}

fn run_register(
    config: &ScenarioConfig,
    summary: &mut Summary,
    files: &mut Vec<PathBuf>,
) -> Result<()> {
    let p = &config.params;
    let schedule = &config.schedule;
    let threshold = resolved_threshold(config)?;
    summary.float("m_threshold", threshold);
    summary.float("schedule.t_couple", schedule.t_couple);
    summary.float("schedule.t_relax", schedule.t_relax);
    summary.float("schedule.dt", schedule.dt);

    // snapshot times spread uniformly over the whole protocol
    let total = schedule.total();
    let count = config.register.snapshots;
    let times: Vec<f64> = (0..count)
        .map(|i| total * i as f64 / (count - 1) as f64)
        .collect();

    let outcome = run_measurement(&config.rho0, p, schedule)?;
    summary.float("off_diagonal_weight", outcome.off_diagonal_weight);

    for (slot, sector) in Sector::BOTH.into_iter().enumerate() {
        let label = match sector {
            Sector::Up => "up",
            Sector::Down => "down",
        };
        // walk the protocol again, recording the requested snapshots
        let coupled = build_generator(p, sector, p.g);
        let relaxed = build_generator(p, sector, 0.0);
        let mut dist = MagnetizationDistribution::metastable_paramagnet(p);
        let mut held: Vec<(f64, MagnetizationDistribution)> = Vec::new();
        let mut t_done = 0.0;
        for &target in &times {
            if target > t_done {
                if t_done < schedule.t_couple {
                    let coupled_span = (target.min(schedule.t_couple)) - t_done;
                    dist = evolve(&dist, &coupled, coupled_span, schedule.dt)?;
                    t_done += coupled_span;
                }
                if target > t_done {
                    dist = evolve(&dist, &relaxed, target - t_done, schedule.dt)?;
                    t_done = target;
                }
            }
            held.push((target, dist.clone()));
        }
        let snapshots: Vec<(f64, &MagnetizationDistribution)> =
            held.iter().map(|(t, d)| (*t, d)).collect();
        let table = registration::snapshot_table(&snapshots);
        emit(
            &table,
            config.output_dir.join(format!("register_{label}.csv")),
            files,
        )?;

        let final_dist = &outcome.distributions[slot];
        let status = classify(final_dist, threshold)?;
        summary.float(&format!("sector_{label}.weight"), outcome.weights[slot]);
        summary.float(&format!("sector_{label}.mean_m"), final_dist.mean());
        summary.float(&format!("sector_{label}.mean_abs_m"), final_dist.mean_abs());
        summary.text(&format!("sector_{label}.status"), status.to_string());
        summary.float(
            &format!("sector_{label}.dissipated_F"),
            outcome.dissipated_free_energy[slot],
        );
    }
    Ok(())
}

fn run_measure(
    config: &ScenarioConfig,
    summary: &mut Summary,
    files: &mut Vec<PathBuf>,
) -> Result<()> {
    let threshold = resolved_threshold(config)?;
    summary.float("m_threshold", threshold);
    summary.float("schedule.t_couple", config.schedule.t_couple);
    summary.float("schedule.t_relax", config.schedule.t_relax);
    summary.float("schedule.dt", config.schedule.dt);
    summary.int("sampling.n_runs", config.n_runs as u64);
    summary.int("sampling.seed", config.seed);

    let outcome = sample_trajectories(
        &config.rho0,
        &config.params,
        &config.schedule,
        threshold,
        config.n_runs,
        config.seed,
    )?;

    let counts = &outcome.counts;
    let n = config.n_runs as f64;
    summary.int("counts.registered_up", counts.registered_up as u64);
    summary.int("counts.registered_down", counts.registered_down as u64);
    summary.int("counts.relaxed", counts.relaxed as u64);
    summary.int("counts.undecided", counts.undecided as u64);
    summary.float("fraction.registered_up", counts.registered_up as f64 / n);
    summary.float(
        "fraction.registered_down",
        counts.registered_down as f64 / n,
    );

    let mut counts_table = Table::new(["outcome", "count"]);
    for (label, value) in [
        ("Registered(+1)", counts.registered_up),
        ("Registered(-1)", counts.registered_down),
        ("Relaxed", counts.relaxed),
        ("Undecided", counts.undecided),
    ] {
        counts_table.push_row(vec![Cell::Text(label.into()), Cell::Int(value as i64)]);
    }
    emit(
        &counts_table,
        config.output_dir.join("measure_counts.csv"),
        files,
    )?;

    let records = registration::records_table(&outcome.records);
    emit(
        &records,
        config.output_dir.join("measure_records.csv"),
        files,
    )
}

fn run_oracle_check(
    config: &ScenarioConfig,
    summary: &mut Summary,
    files: &mut Vec<PathBuf>,
) -> Result<()> {
    let opts = &config.oracle;
    let g = config.params.g;

    // enumeration vs closed form, with and without the quartic phases
    let analytic = DephasingParams::new(opts.n_enum, g)?;
    let t_max = 1.5 * std::f64::consts::PI / g;
    let mut table = Table::new(["t", "enumerated", "analytic"]);
    let mut max_dev: f64 = 0.0;
    let mut max_quartic_dev: f64 = 0.0;
    for i in 0..opts.samples {
        let t = t_max * i as f64 / (opts.samples - 1) as f64;
        let brute = oracle::enumerate_truncation_factor(opts.n_enum, g, t, false)?;
        let exact = analytic.truncation_factor(t);
        max_dev = max_dev.max((brute - exact).abs());
        if opts.include_quartic {
            let with = oracle::enumerate_truncation_factor(opts.n_enum, g, t, true)?;
            max_quartic_dev = max_quartic_dev.max((with - brute).abs());
        }
        table.push_row(vec![Cell::Float(t), Cell::Float(brute), Cell::Float(exact)]);
    }
    summary.float("enumeration.max_deviation", max_dev);
    if opts.include_quartic {
        summary.float("enumeration.max_quartic_effect", max_quartic_dev);
    }
    emit(
        &table,
        config.output_dir.join("oracle_enumeration.csv"),
        files,
    )?;

    // correlation cascade vs brute force
    let n_corr = opts.n_enum.min(oracle::MAX_CORRELATION_N);
    let cascade = DephasingParams::new(n_corr, g)?;
    let mut corr_dev: f64 = 0.0;
    for k in 1..=oracle::MAX_CORRELATION_K.min(n_corr - 1) {
        for i in 0..opts.samples {
            let t = t_max * i as f64 / (opts.samples - 1) as f64;
            let brute = oracle::correlation_oracle(k, n_corr, g, t)?;
            corr_dev = corr_dev.max((brute - cascade.correlation_cascade(k, t)?).abs());
        }
    }
    summary.int("correlation.N", n_corr as u64);
    summary.float("correlation.max_deviation", corr_dev);

    // nonideal evolution and the Born-deviation measure
    let mut nonideal_params = config.params;
    nonideal_params.n = opts.n_evolve;
    let trajectory = oracle::evolve_nonideal(
        &nonideal_params,
        &config.rho0,
        opts.t_final,
        opts.dt,
        opts.include_quartic,
        opts.samples,
    )?;
    let mut traj_table = Table::new(["t", "r_uu", "re_r_ud", "im_r_ud", "delta"]);
    for ((t, state), delta) in trajectory
        .times
        .iter()
        .zip(&trajectory.states)
        .zip(&trajectory.born_deviation)
    {
        traj_table.push_row(vec![
            Cell::Float(*t),
            Cell::Float(state.r_uu),
            Cell::Float(state.r_ud.re),
            Cell::Float(state.r_ud.im),
            Cell::Float(*delta),
        ]);
    }
    summary.float(
        "nonideal.max_born_deviation",
        trajectory
            .born_deviation
            .iter()
            .cloned()
            .fold(0.0, f64::max),
    );
    summary.float("nonideal.max_norm_drift", trajectory.max_norm_drift);
    emit(
        &traj_table,
        config.output_dir.join("oracle_nonideal.csv"),
        files,
    )
}
