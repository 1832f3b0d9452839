//! Named parameter sets and single-point runs.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use bdg_core::{
    derive_scales, solve, DerivedScales, FfloReport, JournalEntry, ScfContext, ScfOutcome,
    SolverConfig, Temperature,
};
use log::info;

use crate::error::{CliError, Result};
use crate::settings::{Settings, SCENARIO_ATOMS, SCENARIO_INTERACTION};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Fig1Balanced,
    Fig1Imbalanced,
    Fig2Core,
    Custom,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Fig1Balanced => "fig1-balanced",
            Scenario::Fig1Imbalanced => "fig1-imbalanced",
            Scenario::Fig2Core => "fig2-core",
            Scenario::Custom => "custom",
        }
    }

    /// `(T / T_F, P)` of each point of a named scenario.
    pub fn grid(self) -> &'static [(f64, f64)] {
        match self {
            Scenario::Fig1Balanced => &[(0.01, 0.0), (0.05, 0.0), (0.1, 0.0)],
            Scenario::Fig1Imbalanced => &[(0.01, 0.5), (0.05, 0.5), (0.1, 0.5)],
            Scenario::Fig2Core => &[(0.01, 0.895), (0.05, 0.874), (0.1, 0.841)],
            Scenario::Custom => &[],
        }
    }
}

impl FromStr for Scenario {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "fig1-balanced" => Ok(Scenario::Fig1Balanced),
            "fig1-imbalanced" => Ok(Scenario::Fig1Imbalanced),
            "fig2-core" => Ok(Scenario::Fig2Core),
            "custom" => Ok(Scenario::Custom),
            other => Err(CliError::UnknownScenario(other.to_string())),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `(n_up, n_down)` with `n_up = round(N (1 + P) / 2)`.
pub fn split_atoms(total: u64, polarization: f64) -> Result<(u64, u64)> {
    if !(-1.0..=1.0).contains(&polarization) {
        return Err(CliError::InvalidValue {
            key: "polarization".into(),
            message: format!("{polarization} is outside [-1, 1]"),
        });
    }
    let up = (total as f64 * (1.0 + polarization) / 2.0).round() as u64;
    let up = up.min(total);
    Ok((up, total - up))
}

/// One fully resolved run.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSpec {
    pub scenario: Scenario,
    /// Requested polarization, when the counts came from a split.
    pub polarization: Option<f64>,
    pub config: SolverConfig,
}

impl PointSpec {
    /// File-name stem, e.g. `fig1-balanced_T0.05tf_P0`.
    pub fn label(&self) -> String {
        let p = match self.polarization {
            Some(p) => format!("{p}"),
            None => format!("{}-{}", self.config.n_up, self.config.n_down),
        };
        format!("{}_T{}_P{}", self.scenario, self.config.temperature, p)
    }
}

/// Expands settings into the points of the selected scenario.
pub fn resolve_points(settings: &Settings) -> Result<Vec<PointSpec>> {
    let scenario: Scenario = settings.scenario.as_deref().unwrap_or("custom").parse()?;
    if scenario == Scenario::Custom {
        return Ok(vec![custom_point(settings)?]);
    }
    let total = settings.n_total.unwrap_or(SCENARIO_ATOMS);
    scenario
        .grid()
        .iter()
        .map(|&(t, p)| {
            let (n_up, n_down) = split_atoms(total, p)?;
            let mut raw = settings.raw_config();
            raw.n_up = Some(n_up);
            raw.n_down = Some(n_down);
            raw.temperature = Some(Temperature::Fermi(t));
            raw.interaction = Some(settings.interaction.unwrap_or(SCENARIO_INTERACTION));
            Ok(PointSpec {
                scenario,
                polarization: Some(p),
                config: raw.validate()?,
            })
        })
        .collect()
}

fn custom_point(settings: &Settings) -> Result<PointSpec> {
    let mut raw = settings.raw_config();
    let mut polarization = None;
    if let Some(p) = settings.polarization {
        let total = settings.n_total.ok_or_else(|| CliError::InvalidValue {
            key: "polarization".into(),
            message: "needs n_total".into(),
        })?;
        let (up, down) = split_atoms(total, p)?;
        raw.n_up = Some(up);
        raw.n_down = Some(down);
        polarization = Some(p);
    } else if let (Some(total), None) = (settings.n_total, settings.n_up) {
        let (up, down) = split_atoms(total, 0.0)?;
        raw.n_up = Some(up);
        raw.n_down = Some(down);
    }
    Ok(PointSpec {
        scenario: Scenario::Custom,
        polarization,
        config: raw.validate()?,
    })
}

/// Tabulated radial profile of a converged (or abandoned) run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProfileTable {
    pub r: Vec<f64>,
    pub r_scaled: Vec<f64>,
    pub delta: Vec<f64>,
    pub delta_scaled: Vec<f64>,
    pub n_up: Vec<f64>,
    pub n_down: Vec<f64>,
    pub pair_fluctuation: Vec<f64>,
    /// `f(r)`, NaN where masked.
    pub relative: Vec<f64>,
    pub valid: Vec<bool>,
}

impl ProfileTable {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub spec: PointSpec,
    pub scales: DerivedScales,
    pub profile: ProfileTable,
    pub fflo: FfloReport,
    pub journal: Vec<JournalEntry>,
    pub converged: bool,
    pub iterations: usize,
    pub mu_up: f64,
    pub mu_down: f64,
    /// Largest defined f(r).
    pub max_relative: Option<f64>,
    /// Mean f(r) inside 0.15 R_TF.
    pub core_relative: Option<f64>,
    pub wall_time: Duration,
}

impl ScenarioResult {
    pub fn delta_at_origin_scaled(&self) -> f64 {
        self.profile.delta_scaled.first().copied().unwrap_or(0.0)
    }

    /// f >= 1 somewhere is conclusive; f < 1 everywhere only holds up to the
    /// omitted above-cutoff fluctuations.
    pub fn validity(&self) -> &'static str {
        match self.max_relative {
            Some(f) if f >= 1.0 => "violated",
            Some(_) => "conditional",
            None => "undefined",
        }
    }
}

/// Runs one point on a dedicated pool of `threads` workers (0 = default).
pub fn run_point(spec: &PointSpec, threads: usize) -> Result<ScenarioResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::ThreadPool(e.to_string()))?;
    pool.install(|| run_point_here(spec))
}

fn run_point_here(spec: &PointSpec) -> Result<ScenarioResult> {
    let start = Instant::now();
    info!("running {}", spec.label());
    let (ctx, outcome) = solve(spec.config.clone())?;
    tabulate(spec, &ctx, &outcome, start.elapsed())
}

fn tabulate(spec: &PointSpec, ctx: &ScfContext, out: &ScfOutcome, wall_time: Duration) -> Result<ScenarioResult> {
    let scales = derive_scales(&ctx.config)?;
    let fluct = out.fluctuations(ctx)?;
    let grid = ctx.grid();
    let state = &out.state;
    let (ef, rtf) = (scales.fermi_energy, scales.thomas_fermi_radius);
    let relative: Vec<f64> = fluct.relative.values.iter().map(|v| v.unwrap_or(f64::NAN)).collect();
    let profile = ProfileTable {
        r: grid.nodes.clone(),
        r_scaled: grid.nodes.iter().map(|r| r / rtf).collect(),
        delta: state.pairing.values.clone(),
        delta_scaled: state.pairing.values.iter().map(|d| d / ef).collect(),
        n_up: state.n_up.values.clone(),
        n_down: state.n_down.values.clone(),
        pair_fluctuation: fluct.pairing.values.clone(),
        relative,
        valid: fluct.valid_mask(),
    };
    let max_relative = fluct.relative.values.iter().flatten().copied().reduce(f64::max);
    Ok(ScenarioResult {
        spec: spec.clone(),
        scales,
        profile,
        fflo: out.fflo(ctx),
        journal: out.journal.clone(),
        converged: out.converged(),
        iterations: out.iterations(),
        mu_up: state.mu_up,
        mu_down: state.mu_down,
        max_relative,
        core_relative: fluct.relative.core_mean,
        wall_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_names_round_trip() {
        for s in [Scenario::Fig1Balanced, Scenario::Fig1Imbalanced, Scenario::Fig2Core, Scenario::Custom] {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
        }
        assert!(matches!("fig3".parse::<Scenario>(), Err(CliError::UnknownScenario(_))));
    }

    #[test]
    fn atom_split_rounds() {
        assert_eq!(split_atoms(100_000, 0.5).unwrap(), (75_000, 25_000));
        assert_eq!(split_atoms(100_000, 0.895).unwrap(), (94_750, 5_250));
        assert_eq!(split_atoms(100_000, 0.874).unwrap(), (93_700, 6_300));
        assert_eq!(split_atoms(100_000, 0.841).unwrap(), (92_050, 7_950));
        assert_eq!(split_atoms(7, 0.0).unwrap(), (4, 3));
        assert!(split_atoms(10, 1.5).is_err());
    }

    #[test]
    fn named_scenarios_resolve() {
        let pts = resolve_points(&Settings { scenario: Some("fig2-core".into()), ..Default::default() }).unwrap();
        assert_eq!(pts.len(), 3);
        assert_eq!(pts[0].config.n_up + pts[0].config.n_down, 100_000);
        assert_eq!(pts[0].config.interaction, -5.0);
        assert_eq!(pts[0].config.cutoff, 180.0);
        assert_eq!(pts[2].config.temperature, Temperature::Fermi(0.1));
        assert_eq!(pts[1].label(), "fig2-core_T0.05tf_P0.874");
    }

    #[test]
    fn custom_needs_total_for_polarization() {
        let s = Settings { polarization: Some(0.2), ..Default::default() };
        assert!(resolve_points(&s).is_err());
        let s = Settings { polarization: Some(0.2), n_total: Some(100), ..Default::default() };
        let p = resolve_points(&s).unwrap();
        assert_eq!((p[0].config.n_up, p[0].config.n_down), (60, 40));
    }
}
