//! Run settings layered from an optional TOML file and command-line
//! flags (flags win).

use std::path::{Path, PathBuf};

use bdg_core::{RawConfig, SeedSpec, Temperature};
use clap::Parser;

use crate::error::{io_error, CliError, Result};

/// Atom count of the named scenarios.
pub const SCENARIO_ATOMS: u64 = 100_000;
/// Bare coupling of the named scenarios.
pub const SCENARIO_INTERACTION: f64 = -5.0;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub scenario: Option<String>,
    pub n_total: Option<u64>,
    pub n_up: Option<u64>,
    pub n_down: Option<u64>,
    pub polarization: Option<f64>,
    pub temperature: Option<Temperature>,
    pub interaction: Option<f64>,
    pub cutoff: Option<f64>,
    pub grid_points: Option<usize>,
    pub r_max: Option<f64>,
    pub mixing: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub hartree: Option<bool>,
    pub delta_floor: Option<f64>,
    pub fluc_prefactor: Option<f64>,
    pub seed_amplitude: Option<f64>,
    pub seed_width: Option<f64>,
    pub threads: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

/// `0.05tf` (Fermi units) or `3ho` (trap units).
pub fn parse_temperature(s: &str) -> std::result::Result<Temperature, String> {
    let s = s.trim();
    let lower = s.to_ascii_lowercase();
    let (number, make): (&str, fn(f64) -> Temperature) = if let Some(n) = lower.strip_suffix("tf") {
        (n, Temperature::Fermi)
    } else if let Some(n) = lower.strip_suffix("ho") {
        (n, Temperature::Trap)
    } else {
        return Err(format!("`{s}` needs a unit suffix, tf or ho"));
    };
    let value: f64 = number.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    Ok(make(value))
}

fn parse_bool(s: &str) -> std::result::Result<bool, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => Err(format!("`{other}` is not a boolean")),
    }
}

fn parse_number<T: std::str::FromStr>(s: &str) -> std::result::Result<T, String> {
    let s = s.trim();
    if let Ok(v) = s.parse() {
        return Ok(v);
    }
    // integer fields also accept 1e5-style literals
    match s.parse::<f64>() {
        Ok(f) if f.fract() == 0.0 && f >= 0.0 => f.to_string().parse().map_err(|_| format!("`{s}` out of range")),
        _ => Err(format!("`{s}` is not a valid number")),
    }
}

impl Settings {
    /// Sets one key; dashes and underscores are interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let bad = |message: String| CliError::InvalidValue { key: key.clone(), message };
        let value = value.trim();
        match key.as_str() {
            "scenario" => self.scenario = Some(value.to_string()),
            "n_total" => self.n_total = Some(parse_number(value).map_err(bad)?),
            "n_up" => self.n_up = Some(parse_number(value).map_err(bad)?),
            "n_down" => self.n_down = Some(parse_number(value).map_err(bad)?),
            "polarization" => self.polarization = Some(parse_number(value).map_err(bad)?),
            "temperature" => self.temperature = Some(parse_temperature(value).map_err(bad)?),
            "interaction" => self.interaction = Some(parse_number(value).map_err(bad)?),
            "cutoff" => self.cutoff = Some(parse_number(value).map_err(bad)?),
            "grid_points" => self.grid_points = Some(parse_number(value).map_err(bad)?),
            "r_max" => self.r_max = Some(parse_number(value).map_err(bad)?),
            "mixing" => self.mixing = Some(parse_number(value).map_err(bad)?),
            "tol" => self.tol = Some(parse_number(value).map_err(bad)?),
            "max_iter" => self.max_iter = Some(parse_number(value).map_err(bad)?),
            "hartree" => self.hartree = Some(parse_bool(value).map_err(bad)?),
            "delta_floor" => self.delta_floor = Some(parse_number(value).map_err(bad)?),
            "fluc_prefactor" => self.fluc_prefactor = Some(parse_number(value).map_err(bad)?),
            "seed_amplitude" => self.seed_amplitude = Some(parse_number(value).map_err(bad)?),
            "seed_width" => self.seed_width = Some(parse_number(value).map_err(bad)?),
            "threads" => self.threads = Some(parse_number(value).map_err(bad)?),
            "out_dir" => self.out_dir = Some(PathBuf::from(value)),
            _ => return Err(bad("unknown key".into())),
        }
        Ok(())
    }

    /// Parses a TOML table of settings, e.g. `temperature = "0.05tf"`.
    pub fn parse_file_contents(text: &str, path: &Path) -> Result<Settings> {
        let at = |line: usize, message: String| CliError::ConfigFile { path: path.to_path_buf(), line, message };
        let line_of = |offset: usize| text[..offset.min(text.len())].matches('\n').count() + 1;
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            at(e.span().map_or(0, |s| line_of(s.start)), e.message().to_string())
        })?;
        let mut s = Settings::default();
        for (key, value) in &table {
            let line = text
                .lines()
                .position(|l| l.trim_start().starts_with(key.as_str()))
                .map_or(0, |i| i + 1);
            let value = match value {
                toml::Value::String(v) => v.clone(),
                toml::Value::Integer(_) | toml::Value::Float(_) | toml::Value::Boolean(_) => value.to_string(),
                other => return Err(at(line, format!("`{key}` has unsupported type {}", other.type_str()))),
            };
            s.set(key, &value).map_err(|e| at(line, e.to_string()))?;
        }
        Ok(s)
    }

    pub fn from_file(path: &Path) -> Result<Settings> {
        let text = std::fs::read_to_string(path).map_err(io_error(path))?;
        Settings::parse_file_contents(&text, path)
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overridden_by(self, other: Settings) -> Settings {
        macro_rules! pick {
            ($($f:ident),*) => { Settings { $($f: other.$f.or(self.$f)),* } };
        }
        pick!(
            scenario, n_total, n_up, n_down, polarization, temperature, interaction, cutoff,
            grid_points, r_max, mixing, tol, max_iter, hartree, delta_floor, fluc_prefactor,
            seed_amplitude, seed_width, threads, out_dir
        )
    }

    /// Solver parameters other than atom numbers and temperature.
    pub fn raw_config(&self) -> RawConfig {
        let seed = match (self.seed_amplitude, self.seed_width) {
            (None, None) => None,
            (a, w) => {
                let d = SeedSpec::default();
                Some(SeedSpec {
                    amplitude: a.unwrap_or(d.amplitude),
                    width: w.unwrap_or(d.width),
                })
            }
        };
        RawConfig {
            n_up: self.n_up,
            n_down: self.n_down,
            interaction: self.interaction,
            cutoff: self.cutoff,
            temperature: self.temperature,
            grid_points: self.grid_points,
            r_max: self.r_max,
            mixing: self.mixing,
            scf_tolerance: self.tol,
            max_iterations: self.max_iter,
            include_hartree: self.hartree,
            delta_floor: self.delta_floor,
            fluc_prefactor: self.fluc_prefactor,
            seed,
        }
    }
}

/// Solve the trapped-gas BdG problem and write radial profiles as CSV.
#[derive(Debug, Parser)]
#[command(name = "bdg", version, about)]
pub struct Args {
    /// fig1-balanced, fig1-imbalanced, fig2-core or custom.
    #[arg(long)]
    pub scenario: Option<String>,
    /// TOML settings file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Total atom number, split by --polarization.
    #[arg(long)]
    pub n_total: Option<u64>,
    #[arg(long)]
    pub n_up: Option<u64>,
    #[arg(long)]
    pub n_down: Option<u64>,
    /// (N_up - N_down)/N; needs --n-total.
    #[arg(long, allow_hyphen_values = true)]
    pub polarization: Option<f64>,
    /// With unit suffix, e.g. 0.05tf or 3ho.
    #[arg(long, value_parser = parse_temperature)]
    pub temperature: Option<Temperature>,
    /// Bare contact coupling U (trap units).
    #[arg(long, allow_hyphen_values = true)]
    pub interaction: Option<f64>,
    /// Energy cutoff E_c in hbar*omega.
    #[arg(long)]
    pub cutoff: Option<f64>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub mixing: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Include the Hartree term.
    #[arg(long)]
    pub hartree: bool,
    #[arg(long)]
    pub delta_floor: Option<f64>,
    #[arg(long)]
    pub fluc_prefactor: Option<f64>,
    /// Initial gap peak in units of E_F.
    #[arg(long)]
    pub seed_amplitude: Option<f64>,
    /// Initial gap width in units of R_TF.
    #[arg(long)]
    pub seed_width: Option<f64>,
    /// Worker threads per point (0 = all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

impl Args {
    pub fn to_settings(&self) -> Settings {
        Settings {
            scenario: self.scenario.clone(),
            n_total: self.n_total,
            n_up: self.n_up,
            n_down: self.n_down,
            polarization: self.polarization,
            temperature: self.temperature,
            interaction: self.interaction,
            cutoff: self.cutoff,
            grid_points: self.grid_points,
            r_max: self.r_max,
            mixing: self.mixing,
            tol: self.tol,
            max_iter: self.max_iter,
            hartree: self.hartree.then_some(true),
            delta_floor: self.delta_floor,
            fluc_prefactor: self.fluc_prefactor,
            seed_amplitude: self.seed_amplitude,
            seed_width: self.seed_width,
            threads: self.threads,
            out_dir: self.out_dir.clone(),
        }
    }

    /// File settings (if any) overridden by the flags.
    pub fn resolve(&self) -> Result<Settings> {
        let base = match &self.config {
            Some(p) => Settings::from_file(p)?,
            None => Settings::default(),
        };
        Ok(base.overridden_by(self.to_settings()))
    }
}
