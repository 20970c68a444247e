//! Flat key-value scenario configuration.
//!
//! The document is plain text, one `key = value` per line, `#` comment lines,
//! dotted section prefixes (`params.T = 0.2`). Unknown keys are rejected with
//! the offending line; all values are validated against the module invariants
//! before a config is returned.

use std::path::PathBuf;

use cwmeas_core::error::{Error, Result};
use cwmeas_core::params::{ModelParams, Sector};
use cwmeas_core::registration::Schedule;
use cwmeas_core::spin::{DensityEntries, SpinDensityMatrix};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Scenario {
    #[value(name = "free-energy")]
    FreeEnergy,
    #[value(name = "critical-coupling")]
    CriticalCoupling,
    #[value(name = "dephase")]
    Dephase,
    #[value(name = "register")]
    Register,
    #[value(name = "measure")]
    Measure,
    #[value(name = "oracle-check")]
    OracleCheck,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::FreeEnergy => "free-energy",
            Scenario::CriticalCoupling => "critical-coupling",
            Scenario::Dephase => "dephase",
            Scenario::Register => "register",
            Scenario::Measure => "measure",
            Scenario::OracleCheck => "oracle-check",
        }
    }

    fn parse(text: &str) -> Option<Scenario> {
        match text {
            "free-energy" => Some(Scenario::FreeEnergy),
            "critical-coupling" => Some(Scenario::CriticalCoupling),
            "dephase" => Some(Scenario::Dephase),
            "register" => Some(Scenario::Register),
            "measure" => Some(Scenario::Measure),
            "oracle-check" => Some(Scenario::OracleCheck),
            _ => None,
        }
    }
}

/// Bath time for the dephase scenario: the documented default 1/(gamma T),
/// explicitly disabled, or an explicit value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaChoice {
    Default,
    Disabled,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveOptions {
    pub g_values: Vec<f64>,
    pub grid_size: usize,
    pub sector: Sector,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephaseOptions {
    /// Defaults to 2.5 t_1 when absent.
    pub t_max: Option<f64>,
    pub samples: usize,
    pub theta: ThetaChoice,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegisterOptions {
    /// Classification threshold; defaults to m_F/2 when absent.
    pub m_threshold: Option<f64>,
    pub snapshots: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub n_enum: usize,
    pub n_evolve: usize,
    pub t_final: f64,
    pub dt: f64,
    pub samples: usize,
    pub include_quartic: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub params: ModelParams,
    pub rho0: SpinDensityMatrix,
    pub schedule: Schedule,
    pub n_runs: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub curve: CurveOptions,
    pub dephase: DephaseOptions,
    pub register: RegisterOptions,
    pub oracle: OracleOptions,
}

#[derive(Debug, Default)]
struct RawRho {
    bloch: Option<[f64; 3]>,
    r_uu: Option<f64>,
    r_dd: Option<f64>,
    re_r_ud: Option<f64>,
    im_r_ud: Option<f64>,
}

impl RawRho {
    fn any_entry(&self) -> bool {
        self.r_uu.is_some()
            || self.r_dd.is_some()
            || self.re_r_ud.is_some()
            || self.im_r_ud.is_some()
    }

    fn resolve(&self) -> Result<SpinDensityMatrix> {
        if self.bloch.is_some() && self.any_entry() {
            return Err(Error::Validation(
                "rho0 given both as a Bloch vector and as explicit entries".into(),
            ));
        }
        if let Some(direction) = self.bloch {
            return SpinDensityMatrix::pure_state(direction);
        }
        if self.any_entry() {
            let r_uu = self.r_uu.ok_or_else(|| {
                Error::Validation("rho0 entries require at least rho0.r_uu".into())
            })?;
            let r_dd = self.r_dd.unwrap_or(1.0 - r_uu);
            let r_ud = Complex64::new(self.re_r_ud.unwrap_or(0.0), self.im_r_ud.unwrap_or(0.0));
            return SpinDensityMatrix::from_entries(DensityEntries {
                r_uu,
                r_dd,
                r_ud,
                r_du: r_ud.conj(),
            });
        }
        SpinDensityMatrix::pure_state([0.0, 0.0, 1.0])
    }
}

fn parse_number(value: &str, key: &str, line: usize) -> Result<f64> {
    value.trim().parse::<f64>().map_err(|_| {
        Error::Config(format!(
            "line {line}: cannot parse `{value}` as a number for key `{key}`"
        ))
    })
}

fn parse_integer(value: &str, key: &str, line: usize) -> Result<u64> {
    value.trim().parse::<u64>().map_err(|_| {
        Error::Config(format!(
            "line {line}: cannot parse `{value}` as an integer for key `{key}`"
        ))
    })
}

fn parse_bool(value: &str, key: &str, line: usize) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::Config(format!(
            "line {line}: cannot parse `{other}` as a boolean for key `{key}`"
        ))),
    }
}

fn parse_list(value: &str, key: &str, line: usize) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|item| parse_number(item, key, line))
        .collect()
}

fn parse_sector(value: &str, key: &str, line: usize) -> Result<Sector> {
    match value.trim() {
        "+1" | "1" | "up" => Ok(Sector::Up),
        "-1" | "down" => Ok(Sector::Down),
        other => Err(Error::Config(format!(
            "line {line}: cannot parse `{other}` as a sector (+1 or -1) for key `{key}`"
        ))),
    }
}

/// Parse and fully validate a scenario document. `cli_scenario`, when given,
/// supplies the scenario selected on the command line; a `scenario` key in
/// the document must agree with it.
pub fn parse_config(text: &str, cli_scenario: Option<Scenario>) -> Result<ScenarioConfig> {
    let mut scenario_key: Option<Scenario> = None;
    let mut params = ModelParams::default();
    let mut raw_rho = RawRho::default();
    let mut schedule = Schedule::default();
    let mut n_runs: usize = 10_000;
    let mut seed: u64 = 1;
    let mut output_dir = PathBuf::from("out");
    let mut curve = CurveOptions {
        g_values: vec![0.0, 0.02, 0.05],
        grid_size: 2001,
        sector: Sector::Up,
    };
    let mut dephase = DephaseOptions {
        t_max: None,
        samples: 2000,
        theta: ThetaChoice::Default,
    };
    let mut register = RegisterOptions {
        m_threshold: None,
        snapshots: 6,
    };
    let mut oracle = OracleOptions {
        n_enum: 10,
        n_evolve: 8,
        t_final: 200.0,
        dt: 0.005,
        samples: 50,
        include_quartic: true,
    };

    for (index, raw_line) in text.lines().enumerate() {
        let line = index + 1;
        let trimmed = raw_line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((key, value)) = trimmed.split_once('=') else {
            return Err(Error::Config(format!(
                "line {line}: expected `key = value`, got `{trimmed}`"
            )));
        };
        let key = key.trim();
        let value = value.trim();
        match key {
            "scenario" => {
                scenario_key = Some(Scenario::parse(value).ok_or_else(|| {
                    Error::Config(format!("line {line}: unknown scenario `{value}`"))
                })?);
            }
            "params.N" => params.n = parse_integer(value, key, line)? as usize,
            "params.J" => params.j = parse_number(value, key, line)?,
            "params.T" => params.temperature = parse_number(value, key, line)?,
            "params.gamma" => params.gamma = parse_number(value, key, line)?,
            "params.Gamma" => params.debye_cutoff = parse_number(value, key, line)?,
            "params.g" => params.g = parse_number(value, key, line)?,
            "params.n" => params.n_tested = parse_integer(value, key, line)? as usize,
            "params.b_x" => params.b_x = parse_number(value, key, line)?,
            "rho0.bloch" => {
                let items = parse_list(value, key, line)?;
                if items.len() != 3 {
                    return Err(Error::Config(format!(
                        "line {line}: rho0.bloch needs exactly three components"
                    )));
                }
                raw_rho.bloch = Some([items[0], items[1], items[2]]);
            }
            "rho0.r_uu" => raw_rho.r_uu = Some(parse_number(value, key, line)?),
            "rho0.r_dd" => raw_rho.r_dd = Some(parse_number(value, key, line)?),
            "rho0.re_r_ud" => raw_rho.re_r_ud = Some(parse_number(value, key, line)?),
            "rho0.im_r_ud" => raw_rho.im_r_ud = Some(parse_number(value, key, line)?),
            "schedule.t_couple" => schedule.t_couple = parse_number(value, key, line)?,
            "schedule.t_relax" => schedule.t_relax = parse_number(value, key, line)?,
            "schedule.dt" => schedule.dt = parse_number(value, key, line)?,
            "sampling.n_runs" => n_runs = parse_integer(value, key, line)? as usize,
            "sampling.seed" => seed = parse_integer(value, key, line)?,
            "output.dir" => output_dir = PathBuf::from(value),
            "curve.g_values" => curve.g_values = parse_list(value, key, line)?,
            "curve.grid_size" => curve.grid_size = parse_integer(value, key, line)? as usize,
            "curve.sector" => curve.sector = parse_sector(value, key, line)?,
            "dephase.t_max" => dephase.t_max = Some(parse_number(value, key, line)?),
            "dephase.samples" => dephase.samples = parse_integer(value, key, line)? as usize,
            "dephase.theta" => {
                dephase.theta = if value == "none" {
                    ThetaChoice::Disabled
                } else {
                    ThetaChoice::Value(parse_number(value, key, line)?)
                };
            }
            "register.m_threshold" => register.m_threshold = Some(parse_number(value, key, line)?),
            "register.snapshots" => register.snapshots = parse_integer(value, key, line)? as usize,
            "oracle.n_enum" => oracle.n_enum = parse_integer(value, key, line)? as usize,
            "oracle.n_evolve" => oracle.n_evolve = parse_integer(value, key, line)? as usize,
            "oracle.t_final" => oracle.t_final = parse_number(value, key, line)?,
            "oracle.dt" => oracle.dt = parse_number(value, key, line)?,
            "oracle.samples" => oracle.samples = parse_integer(value, key, line)? as usize,
            "oracle.include_quartic" => oracle.include_quartic = parse_bool(value, key, line)?,
            other => {
                return Err(Error::Config(format!("line {line}: unknown key `{other}`")));
            }
        }
    }

    let scenario = match (cli_scenario, scenario_key) {
        (Some(cli), Some(doc)) if cli != doc => {
            return Err(Error::Validation(format!(
                "scenario mismatch: command line says `{}`, config says `{}`",
                cli.name(),
                doc.name()
            )));
        }
        (Some(cli), _) => cli,
        (None, Some(doc)) => doc,
        (None, None) => {
            return Err(Error::Validation(
                "no scenario selected (config key `scenario` or command line)".into(),
            ));
        }
    };

    params.validate()?;
    schedule.validate()?;
    let rho0 = raw_rho.resolve()?;
    if n_runs < 1 {
        return Err(Error::Validation("sampling.n_runs must be >= 1".into()));
    }
    if curve.grid_size < 3 {
        return Err(Error::Validation("curve.grid_size must be >= 3".into()));
    }
    if dephase.samples < 2 || oracle.samples < 2 {
        return Err(Error::Validation("sample counts must be >= 2".into()));
    }
    if let Some(threshold) = register.m_threshold {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::Validation(format!(
                "register.m_threshold = {threshold} outside (0, 1)"
            )));
        }
    }
    if register.snapshots < 2 {
        return Err(Error::Validation("register.snapshots must be >= 2".into()));
    }
    if let ThetaChoice::Value(theta) = dephase.theta {
        if !(theta > 0.0) {
            return Err(Error::Validation(format!(
                "dephase.theta = {theta} must be positive"
            )));
        }
    }
    if let Some(t_max) = dephase.t_max {
        if !(t_max > 0.0) {
            return Err(Error::Validation(format!(
                "dephase.t_max = {t_max} must be positive"
            )));
        }
    }
    if !(oracle.t_final > 0.0) || !(oracle.dt > 0.0) {
        return Err(Error::Validation(
            "oracle.t_final and oracle.dt must be positive".into(),
        ));
    }

    Ok(ScenarioConfig {
        scenario,
        params,
        rho0,
        schedule,
        n_runs,
        seed,
        output_dir,
        curve,
        dephase,
        register,
        oracle,
    })
}
