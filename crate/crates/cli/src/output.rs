//! CSV writers. Every file starts with `# key = value` lines echoing the
//! resolved configuration; nothing that varies between identical runs (wall
//! time, worker count) goes into the profile or journal files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use bdg_core::SolverConfig;

use crate::error::{io_error, CliError, Result};
use crate::scenario::{PointSpec, ProfileTable, ScenarioResult};

pub const PROFILE_COLUMNS: [&str; 9] = [
    "r",
    "r_over_rtf",
    "delta",
    "delta_over_ef",
    "n_up",
    "n_down",
    "pair_fluctuation",
    "f",
    "valid",
];

pub const JOURNAL_COLUMNS: [&str; 6] = [
    "iteration",
    "residual_pairing",
    "residual_numbers",
    "mu_up",
    "mu_down",
    "delta_at_origin",
];

pub const SUMMARY_COLUMNS: [&str; 19] = [
    "label",
    "temperature",
    "polarization_requested",
    "polarization",
    "n_up",
    "n_down",
    "converged",
    "iterations",
    "mu_up",
    "mu_down",
    "delta0_over_ef",
    "max_f",
    "core_mean_f",
    "validity",
    "fflo",
    "fflo_nodes_over_rtf",
    "residual_pairing",
    "residual_numbers",
    "wall_time_s",
];

fn float(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_else(|| "nan".to_string())
}

/// `# key = value` lines for a configuration.
pub fn config_header(spec: &PointSpec) -> String {
    let c: &SolverConfig = &spec.config;
    let mut h = String::new();
    let mut line = |k: &str, v: String| {
        let _ = writeln!(h, "# {k} = {v}");
    };
    line("scenario", spec.scenario.to_string());
    line("n_up", c.n_up.to_string());
    line("n_down", c.n_down.to_string());
    if let Some(p) = spec.polarization {
        line("polarization", p.to_string());
        line("atom_split", "n_up = round(N (1 + P) / 2)".into());
    }
    line("temperature", c.temperature.to_string());
    line("interaction", c.interaction.to_string());
    line("cutoff", c.cutoff.to_string());
    line("grid_points", c.grid_points.to_string());
    line("r_max", c.r_max.to_string());
    line("mixing", c.mixing.to_string());
    line("tol", c.scf_tolerance.to_string());
    line("max_iter", c.max_iterations.to_string());
    line("hartree", c.include_hartree.to_string());
    line("delta_floor", c.delta_floor.to_string());
    line("fluc_prefactor", c.fluc_prefactor.to_string());
    line("seed_amplitude", c.seed.amplitude.to_string());
    line("seed_width", c.seed.width.to_string());
    h
}

fn result_header(res: &ScenarioResult) -> String {
    let s = &res.scales;
    let mut h = config_header(&res.spec);
    let mut line = |k: &str, v: String| {
        let _ = writeln!(h, "# {k} = {v}");
    };
    line("fermi_energy", s.fermi_energy.to_string());
    line("thomas_fermi_radius", s.thomas_fermi_radius.to_string());
    line("fermi_momentum", s.fermi_momentum.to_string());
    line("inverse_kf_as", s.inverse_kf_as().to_string());
    line("converged", res.converged.to_string());
    line("iterations", res.iterations.to_string());
    line("mu_up", float(res.mu_up));
    line("mu_down", float(res.mu_down));
    line("fflo", res.fflo.class.to_string());
    h
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_error(path))
}

/// Comment header followed by a CSV table.
fn table<R, I>(header: &str, columns: &[&str], rows: R) -> String
where
    R: IntoIterator<Item = I>,
    I: IntoIterator<Item = String>,
{
    let mut out = csv::Writer::from_writer(header.as_bytes().to_vec());
    // writes to a Vec cannot fail
    out.write_record(columns).expect("in-memory csv");
    for row in rows {
        out.write_record(row).expect("in-memory csv");
    }
    let bytes = out.into_inner().expect("in-memory csv");
    String::from_utf8(bytes).expect("csv output is utf-8")
}

pub fn format_profile(header: &str, t: &ProfileTable) -> String {
    let rows = (0..t.len()).map(|i| {
        [
            float(t.r[i]),
            float(t.r_scaled[i]),
            float(t.delta[i]),
            float(t.delta_scaled[i]),
            float(t.n_up[i]),
            float(t.n_down[i]),
            float(t.pair_fluctuation[i]),
            float(t.relative[i]),
            u8::from(t.valid[i]).to_string(),
        ]
    });
    table(header, &PROFILE_COLUMNS, rows)
}

/// Parses a profile file written by [`format_profile`].
pub fn read_profile(path: &Path) -> Result<ProfileTable> {
    let file = fs::File::open(path).map_err(io_error(path))?;
    let bad = |line: u64| CliError::MalformedProfile { path: path.to_path_buf(), line: line as usize };
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file);
    let headers = reader.headers().map_err(|_| bad(0))?.clone();
    if headers.iter().ne(PROFILE_COLUMNS) {
        return Err(bad(headers.position().map_or(0, |p| p.line())));
    }
    let mut t = ProfileTable::default();
    for record in reader.records() {
        let record = record.map_err(|e| bad(e.position().map_or(0, |p| p.line())))?;
        let line = record.position().map_or(0, |p| p.line());
        let num = |k: usize| record[k].parse::<f64>().map_err(|_| bad(line));
        t.r.push(num(0)?);
        t.r_scaled.push(num(1)?);
        t.delta.push(num(2)?);
        t.delta_scaled.push(num(3)?);
        t.n_up.push(num(4)?);
        t.n_down.push(num(5)?);
        t.pair_fluctuation.push(num(6)?);
        t.relative.push(num(7)?);
        t.valid.push(match &record[8] {
            "1" => true,
            "0" => false,
            _ => return Err(bad(line)),
        });
    }
    Ok(t)
}

/// Files written for one point.
#[derive(Debug, Clone)]
pub struct PointFiles {
    pub profile: PathBuf,
    pub journal: PathBuf,
}

pub fn write_point(res: &ScenarioResult, dir: &Path) -> Result<PointFiles> {
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    let label = res.spec.label();
    let header = result_header(res);
    let profile = dir.join(format!("{label}.csv"));
    write(&profile, &format_profile(&header, &res.profile))?;

    let rows = res.journal.iter().map(|e| {
        [
            e.iteration.to_string(),
            float(e.residual_pairing),
            float(e.residual_numbers),
            float(e.mu_up),
            float(e.mu_down),
            float(e.delta_at_origin),
        ]
    });
    let journal = dir.join(format!("{label}_journal.csv"));
    write(&journal, &table(&header, &JOURNAL_COLUMNS, rows))?;
    Ok(PointFiles { profile, journal })
}

pub fn format_summary(results: &[ScenarioResult]) -> String {
    let header = "# validity: f >= 1 is conclusive (violated); f < 1 is conditional, \
                  since fluctuations above the cutoff are omitted\n";
    let rows = results.iter().map(|r| {
        let c = &r.spec.config;
        let last = r.journal.last();
        let nodes: Vec<String> = r.fflo.scaled_nodes(&r.scales).iter().map(|x| format!("{x:.6}")).collect();
        [
            r.spec.label(),
            c.temperature.to_string(),
            r.spec.polarization.map(|p| p.to_string()).unwrap_or_default(),
            float(r.scales.polarization),
            c.n_up.to_string(),
            c.n_down.to_string(),
            r.converged.to_string(),
            r.iterations.to_string(),
            float(r.mu_up),
            float(r.mu_down),
            float(r.delta_at_origin_scaled()),
            opt_float(r.max_relative),
            opt_float(r.core_relative),
            r.validity().to_string(),
            r.fflo.class.to_string(),
            nodes.join(";"),
            opt_float(last.map(|e| e.residual_pairing)),
            opt_float(last.map(|e| e.residual_numbers)),
            format!("{:.3}", r.wall_time.as_secs_f64()),
        ]
    });
    table(header, &SUMMARY_COLUMNS, rows)
}

pub fn write_summary(results: &[ScenarioResult], dir: &Path, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    let path = dir.join(format!("{name}_summary.csv"));
    write(&path, &format_summary(results))?;
    Ok(path)
}
