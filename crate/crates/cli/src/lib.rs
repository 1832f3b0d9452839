//! Scenario runner for the trapped-gas BdG solver: settings, named parameter
//! sets and CSV output.

pub mod error;
pub mod output;
pub mod scenario;
pub mod settings;

use std::path::{Path, PathBuf};

pub use error::{CliError, Result};
pub use output::{read_profile, write_point, write_summary, PointFiles};
pub use scenario::{resolve_points, run_point, split_atoms, PointSpec, ProfileTable, Scenario, ScenarioResult};
pub use settings::{Args, Settings};

/// Results and files of one scenario invocation.
#[derive(Debug)]
pub struct Report {
    pub results: Vec<ScenarioResult>,
    pub files: Vec<PointFiles>,
    pub summary: PathBuf,
}

impl Report {
    pub fn all_converged(&self) -> bool {
        self.results.iter().all(|r| r.converged)
    }
}

/// Runs every point of the configured scenario in turn, writing each point's
/// files as soon as it finishes, then the summary.
pub fn run_scenario(settings: &Settings) -> Result<Report> {
    let points = resolve_points(settings)?;
    let dir: &Path = settings.out_dir.as_deref().unwrap_or(Path::new("."));
    let threads = settings.threads.unwrap_or(0);
    let name = points.first().map(|p| p.scenario.name()).unwrap_or("custom");
    let mut results = Vec::with_capacity(points.len());
    let mut files = Vec::with_capacity(points.len());
    for p in &points {
        let res = run_point(p, threads)?;
        if !res.converged {
            log::warn!("{} did not converge in {} iterations", p.label(), res.iterations);
        }
        files.push(write_point(&res, dir)?);
        results.push(res);
    }
    let summary = write_summary(&results, dir, name)?;
    Ok(Report { results, files, summary })
}
