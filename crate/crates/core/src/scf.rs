//! Self-consistency loop.
//!
//! Each step evaluates the hybrid gap `Delta^BdG + Delta^LDA` from the current
//! state, linearly mixes it into the pairing field, rediagonalizes with
//! chemical potentials re-solved for the target atom numbers, and refreshes
//! the densities, the regularized coupling and `Delta^BdG`.
//!
//! The chemical potentials are found by a nested search: the average
//! `mu = (mu_up + mu_down)/2` fixes the total number and needs a fresh
//! diagonalization per trial, while the splitting `dmu = (mu_up - mu_down)/2`
//! only shifts every BdG eigenvalue by `-dmu` and is solved on the spectrum.

use log::{debug, info};

use crate::basis::{tabulate_basis, BasisTable};
use crate::bdg::{compute_fields, fermi_occupation, solve_blocks, HartreeFields, LBlockSpectrum};
use crate::config::{derive_scales, DerivedScales, SolverConfig};
use crate::error::{BdgError, Result};
use crate::fflo::{detect_fflo, FfloReport};
use crate::field::{FieldKind, RadialField};
use crate::fluctuations::{fluctuation_profile, FluctuationProfile};
use crate::grid::{build_grid, RadialGrid};
use crate::regularization::{hybrid_gap, lda_gap_tail, regularized_coupling, LocalMomenta};
use crate::roots::solve_increasing;

/// Atom numbers are matched to this fraction of the smallest nonzero target.
const NUMBER_RTOL: f64 = 5e-9;
const MAX_MU_EVALUATIONS: usize = 60;
const MAX_DMU_EVALUATIONS: usize = 200;
/// Consecutive rising residuals before the mixing weight is cut.
const RISING_LIMIT: usize = 3;
const FALLBACK_MIXING: f64 = 0.2;

/// Everything fixed for the duration of one run.
#[derive(Debug, Clone)]
pub struct ScfContext {
    pub config: SolverConfig,
    pub scales: DerivedScales,
    /// In hbar*omega.
    pub temperature: f64,
    pub basis: BasisTable,
}

impl ScfContext {
    pub fn new(config: SolverConfig) -> Result<Self> {
        let scales = derive_scales(&config)?;
        let temperature = config.temperature.in_trap_units(scales.fermi_temperature);
        let grid = build_grid(config.grid_points, config.r_max)?;
        let basis = tabulate_basis(&grid, config.cutoff)?;
        Ok(ScfContext {
            config,
            scales,
            temperature,
            basis,
        })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.basis.grid
    }

    /// `(N_up, N_down)` as reals.
    pub fn targets(&self) -> (f64, f64) {
        (self.config.n_up as f64, self.config.n_down as f64)
    }

    /// Cold-start pairing field; zero when pairing is impossible.
    pub fn seed_pairing(&self) -> RadialField {
        let c = &self.config;
        if c.interaction == 0.0 || c.n_up == 0 || c.n_down == 0 {
            return RadialField::zeros(FieldKind::Pairing, self.grid().len());
        }
        let peak = c.seed.amplitude * self.scales.fermi_energy;
        let width = c.seed.width * self.scales.thomas_fermi_radius;
        RadialField::from_fn(FieldKind::Pairing, self.grid(), |r| {
            peak * (-(r / width).powi(2)).exp()
        })
    }

    fn number_tolerance(&self) -> f64 {
        let (a, b) = self.targets();
        let smallest = if b > 0.0 { a.min(b) } else { a };
        NUMBER_RTOL * smallest.max(1.0)
    }
}

/// Chemical potentials reproducing the target atom numbers for a fixed
/// pairing field, with the spectra they generate.
#[derive(Debug, Clone)]
pub struct MuSolution {
    pub mu_up: f64,
    pub mu_down: f64,
    /// Spectra at `(mu_up, mu_down)`.
    pub spectra: Vec<LBlockSpectrum>,
    pub numbers: (f64, f64),
    /// `dN/dmu` near the root, reused as the next starting slope.
    pub slope: Option<f64>,
    pub diagonalizations: usize,
}

/// Solves `N_up(mu_up, mu_down) = n_up` and `N_down = n_down` at fixed
/// `pairing`, starting from `guess = (mu_up, mu_down)`.
pub fn solve_chemical_potentials(
    ctx: &ScfContext,
    pairing: &RadialField,
    hartree: Option<&HartreeFields<'_>>,
    guess: (f64, f64),
    slope: Option<f64>,
) -> Result<MuSolution> {
    let (n_up, n_down) = ctx.targets();
    let total = n_up + n_down;
    let tol = ctx.number_tolerance();
    let t = ctx.temperature;
    let balanced = n_up == n_down;
    let mu0 = 0.5 * (guess.0 + guess.1);
    let mut dmu = if balanced { 0.0 } else { 0.5 * (guess.0 - guess.1) };
    // ideal trapped gas: N = mu^3 / 3, so dN/dmu = 3 N / mu
    let ideal_slope = 3.0 * total / mu0.max(1.0);
    let found = solve_increasing(
        |mu| {
            let spectra = solve_blocks(&ctx.basis, pairing, mu, mu, hartree)?;
            let (d, numbers) = if balanced {
                (0.0, level_numbers(&levels(&spectra), 0.0, t))
            } else {
                let d = balance_spins(&spectra, n_up - n_down, t, dmu, ideal_slope, 0.5 * tol)?;
                dmu = d.0;
                d
            };
            Ok((numbers.0 + numbers.1 - total, (spectra, d, numbers)))
        },
        mu0,
        slope.unwrap_or(ideal_slope),
        0.5 * tol,
        MAX_MU_EVALUATIONS,
    )?;
    let (mu, (spectra, d, numbers)) = (found.best.x, &*found.best.payload);
    let spectra = if *d == 0.0 {
        spectra.clone()
    } else {
        spectra.iter().map(|s| s.shifted(*d)).collect()
    };
    Ok(MuSolution {
        mu_up: mu + d,
        mu_down: mu - d,
        spectra,
        numbers: *numbers,
        slope: found.slope,
        diagonalizations: found.evaluations,
    })
}

/// `(E, (2l+1)|u|^2, (2l+1)|v|^2)` for every eigenvector.
fn levels(spectra: &[LBlockSpectrum]) -> Vec<(f64, f64, f64)> {
    spectra
        .iter()
        .flat_map(|s| {
            let deg = s.degeneracy();
            s.eigenvalues
                .iter()
                .zip(&s.u_weights)
                .zip(&s.v_weights)
                .map(move |((&e, &wu), &wv)| (e, deg * wu, deg * wv))
        })
        .collect()
}

/// Atom numbers after shifting every level by `-dmu`.
fn level_numbers(levels: &[(f64, f64, f64)], dmu: f64, temperature: f64) -> (f64, f64) {
    let (mut up, mut down) = (0.0, 0.0);
    for &(e, a, b) in levels {
        let x = e - dmu;
        up += a * fermi_occupation(x, temperature);
        down += b * fermi_occupation(-x, temperature);
    }
    (up, down)
}

/// Splitting `dmu` with `N_up - N_down = difference` on a fixed spectrum.
fn balance_spins(
    spectra: &[LBlockSpectrum],
    difference: f64,
    temperature: f64,
    guess: f64,
    slope: f64,
    tol: f64,
) -> Result<(f64, (f64, f64))> {
    let lv = levels(spectra);
    let found = solve_increasing(
        |d| {
            let n = level_numbers(&lv, d, temperature);
            Ok((n.0 - n.1 - difference, n))
        },
        guess,
        slope,
        tol,
        MAX_DMU_EVALUATIONS,
    )?;
    Ok((found.best.x, *found.best.payload))
}

/// One point of the convergence history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JournalEntry {
    pub iteration: usize,
    pub residual_pairing: f64,
    pub residual_numbers: f64,
    pub mu_up: f64,
    pub mu_down: f64,
    /// Pairing field at the innermost grid node.
    pub delta_at_origin: f64,
}

/// A pairing field together with everything derived from it.
#[derive(Debug, Clone)]
pub struct ScfState {
    pub iteration: usize,
    pub mu_up: f64,
    pub mu_down: f64,
    /// The field the current spectra were built from.
    pub pairing: RadialField,
    /// `Delta^BdG` generated by the current spectra.
    pub pairing_bdg: RadialField,
    pub coupling: RadialField,
    pub n_up: RadialField,
    pub n_down: RadialField,
    pub spectra: Vec<LBlockSpectrum>,
    pub numbers: (f64, f64),
    pub residual_pairing: f64,
    pub residual_numbers: f64,
    pub converged: bool,
    /// Current linear-mixing weight.
    pub mixing: f64,
    rising: usize,
    slope: Option<f64>,
}

impl ScfState {
    pub fn journal_entry(&self) -> JournalEntry {
        JournalEntry {
            iteration: self.iteration,
            residual_pairing: self.residual_pairing,
            residual_numbers: self.residual_numbers,
            mu_up: self.mu_up,
            mu_down: self.mu_down,
            delta_at_origin: self.pairing.values.first().copied().unwrap_or(0.0),
        }
    }
}

fn hartree_fields<'a>(ctx: &ScfContext, n_up: &'a RadialField, n_down: &'a RadialField) -> Option<HartreeFields<'a>> {
    ctx.config.include_hartree.then_some(HartreeFields {
        coupling: ctx.config.interaction,
        n_up,
        n_down,
    })
}

/// Builds the fields of a state whose spectra are already known.
fn finish_state(
    ctx: &ScfContext,
    pairing: RadialField,
    sol: MuSolution,
    iteration: usize,
    mixing: f64,
) -> Result<ScfState> {
    let momenta = LocalMomenta::new(ctx.grid(), sol.mu_up, sol.mu_down, ctx.config.cutoff);
    let coupling = regularized_coupling(&momenta, ctx.config.interaction)?;
    let fields = compute_fields(&sol.spectra, &ctx.basis, &coupling, ctx.temperature)?;
    Ok(ScfState {
        iteration,
        mu_up: sol.mu_up,
        mu_down: sol.mu_down,
        pairing,
        pairing_bdg: fields.pairing,
        coupling,
        n_up: fields.n_up,
        n_down: fields.n_down,
        spectra: sol.spectra,
        numbers: sol.numbers,
        residual_pairing: f64::INFINITY,
        residual_numbers: f64::INFINITY,
        converged: false,
        mixing,
        rising: 0,
        slope: sol.slope,
    })
}

/// State generated by `pairing`, with chemical potentials seeded from the
/// ideal-gas values `(6 N_s)^(1/3)`.
pub fn initial_state(ctx: &ScfContext, pairing: RadialField) -> Result<ScfState> {
    pairing.check_len(ctx.grid().len())?;
    let (n_up, n_down) = ctx.targets();
    let guess = ((6.0 * n_up).cbrt(), (6.0 * n_down).cbrt());
    let zeros = RadialField::zeros(FieldKind::DensityUp, ctx.grid().len());
    let hartree = hartree_fields(ctx, &zeros, &zeros);
    let sol = solve_chemical_potentials(ctx, &pairing, hartree.as_ref(), guess, None)?;
    finish_state(ctx, pairing, sol, 0, ctx.config.mixing)
}

/// Hybrid gap `Delta^BdG + Delta^LDA` implied by a state.
pub fn gap_update(ctx: &ScfContext, state: &ScfState) -> Result<RadialField> {
    let momenta = LocalMomenta::new(ctx.grid(), state.mu_up, state.mu_down, ctx.config.cutoff);
    let lda = lda_gap_tail(&state.pairing, &momenta, ctx.config.interaction, ctx.temperature)?;
    hybrid_gap(&state.pairing_bdg, &lda)
}

/// One mixing step.
pub fn scf_step(ctx: &ScfContext, state: &ScfState) -> Result<ScfState> {
    let calc = gap_update(ctx, state)?;
    let theta = state.mixing;
    let mixed = RadialField::new(
        FieldKind::Pairing,
        calc.values
            .iter()
            .zip(&state.pairing.values)
            .map(|(c, o)| theta * c + (1.0 - theta) * o)
            .collect(),
    );
    let hartree = hartree_fields(ctx, &state.n_up, &state.n_down);
    let sol = solve_chemical_potentials(
        ctx,
        &mixed,
        hartree.as_ref(),
        (state.mu_up, state.mu_down),
        state.slope,
    )?;
    let grid = ctx.grid();
    let change = RadialField::new(
        FieldKind::Pairing,
        mixed.values.iter().zip(&state.pairing.values).map(|(a, b)| a - b).collect(),
    );
    let scale = state.pairing.norm_3d(grid).max(1e-6 * ctx.scales.fermi_energy);
    let residual_pairing = change.norm_3d(grid) / scale;
    let (t_up, t_down) = ctx.targets();
    let relative = |new: f64, old: f64, target: f64| {
        (new - old).abs() / if target > 0.0 { target } else { t_up + t_down }
    };
    let residual_numbers = relative(sol.numbers.0, state.numbers.0, t_up)
        .max(relative(sol.numbers.1, state.numbers.1, t_down));

    let mut rising = if residual_pairing > state.residual_pairing { state.rising + 1 } else { 0 };
    let mut mixing = theta;
    if rising >= RISING_LIMIT {
        mixing = mixing.min(FALLBACK_MIXING);
        rising = 0;
    }
    let diagonalizations = sol.diagonalizations;
    let mut next = finish_state(ctx, mixed, sol, state.iteration + 1, mixing)?;
    next.residual_pairing = residual_pairing;
    next.residual_numbers = residual_numbers;
    next.rising = rising;
    let tol = ctx.config.scf_tolerance;
    next.converged = residual_pairing <= tol && residual_numbers <= tol;
    debug!(
        "iteration {}: dDelta {:.3e}, dN {:.3e}, mu = ({:.10}, {:.10}), Delta(0) = {:.6}, {} diagonalizations",
        next.iteration,
        residual_pairing,
        residual_numbers,
        next.mu_up,
        next.mu_down,
        next.pairing[0],
        diagonalizations
    );
    Ok(next)
}

/// Final state and convergence history of a run.
#[derive(Debug, Clone)]
pub struct ScfOutcome {
    pub state: ScfState,
    pub journal: Vec<JournalEntry>,
}

impl ScfOutcome {
    pub fn converged(&self) -> bool {
        self.state.converged
    }

    pub fn iterations(&self) -> usize {
        self.state.iteration
    }

    pub fn fluctuations(&self, ctx: &ScfContext) -> Result<FluctuationProfile> {
        fluctuation_profile(
            &self.state.spectra,
            &ctx.basis,
            &self.state.coupling,
            &self.state.pairing,
            ctx.temperature,
            ctx.config.fluc_prefactor,
            ctx.config.delta_floor,
            ctx.scales.thomas_fermi_radius,
        )
    }

    pub fn fflo(&self, ctx: &ScfContext) -> FfloReport {
        detect_fflo(&self.state.pairing, ctx.grid(), &ctx.scales, ctx.config.delta_floor)
    }
}

/// Iterates from `state` until converged or out of iterations.
pub fn iterate(ctx: &ScfContext, mut state: ScfState) -> Result<ScfOutcome> {
    let mut journal = Vec::new();
    while !state.converged && state.iteration < ctx.config.max_iterations {
        state = scf_step(ctx, &state)?;
        journal.push(state.journal_entry());
    }
    if state.converged {
        info!("converged after {} iterations", state.iteration);
    } else {
        info!(
            "not converged after {} iterations (residual {:.3e})",
            state.iteration, state.residual_pairing
        );
    }
    Ok(ScfOutcome { state, journal })
}

/// Cold-start run from the configured seed.
pub fn run_scf(ctx: &ScfContext) -> Result<ScfOutcome> {
    let state = initial_state(ctx, ctx.seed_pairing())?;
    iterate(ctx, state)
}

/// Convenience wrapper building the context first.
pub fn solve(config: SolverConfig) -> Result<(ScfContext, ScfOutcome)> {
    if config.max_iterations == 0 {
        return Err(BdgError::InvalidConfig("max_iterations must be positive".into()));
    }
    let ctx = ScfContext::new(config)?;
    let outcome = run_scf(&ctx)?;
    Ok((ctx, outcome))
}
