//! Run parameters and the trap-unit scales derived from them.
//!
//! Everything is expressed in trap units: hbar = m = omega = k_B = 1, so
//! lengths are in oscillator lengths a_ho and energies in hbar*omega.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{BdgError, Result};

/// Default number of radial quadrature nodes.
pub const DEFAULT_GRID_POINTS: usize = 600;
/// Default linear-mixing weight.
pub const DEFAULT_MIXING: f64 = 0.5;
/// Default relative-change convergence threshold.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;
/// Default energy cutoff in hbar*omega.
pub const DEFAULT_CUTOFF: f64 = 180.0;
/// Default iteration budget.
pub const DEFAULT_MAX_ITERATIONS: usize = 2000;
/// Extra room (in a_ho) beyond the classical turning point of the highest
/// basis state, so the evanescent tails of the cutoff states fit on the grid.
pub const TURNING_POINT_MARGIN: f64 = 4.0;

/// Temperature with an explicit unit tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Temperature {
    /// In hbar*omega / k_B.
    Trap(f64),
    /// In units of the Fermi temperature T_F.
    Fermi(f64),
}

impl Temperature {
    pub fn in_trap_units(self, fermi_temperature: f64) -> f64 {
        match self {
            Temperature::Trap(t) => t,
            Temperature::Fermi(t) => t * fermi_temperature,
        }
    }

    fn raw(self) -> f64 {
        match self {
            Temperature::Trap(t) | Temperature::Fermi(t) => t,
        }
    }
}

impl fmt::Display for Temperature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Temperature::Trap(t) => write!(f, "{t}ho"),
            Temperature::Fermi(t) => write!(f, "{t}tf"),
        }
    }
}

/// Initial pairing guess `amplitude * E_F * exp(-(r / (width * R_TF))^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedSpec {
    /// Peak value in units of E_F.
    pub amplitude: f64,
    /// Gaussian width in units of R_TF.
    pub width: f64,
}

impl Default for SeedSpec {
    fn default() -> Self {
        SeedSpec {
            amplitude: 0.5,
            width: 1.0,
        }
    }
}

/// Fully validated run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Majority-component atom count.
    pub n_up: u64,
    /// Minority-component atom count.
    pub n_down: u64,
    /// Bare contact coupling U (negative is attractive).
    pub interaction: f64,
    /// Single-particle energy cutoff E_c of the discrete basis.
    pub cutoff: f64,
    pub temperature: Temperature,
    pub grid_points: usize,
    pub r_max: f64,
    pub mixing: f64,
    pub scf_tolerance: f64,
    pub max_iterations: usize,
    pub include_hartree: bool,
    /// Smallest |Delta| (in hbar*omega) for which f(r) is reported.
    pub delta_floor: f64,
    /// Overall scale applied to the fluctuation fields.
    pub fluc_prefactor: f64,
    pub seed: SeedSpec,
}

/// Unvalidated input; `None` means "use the default".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    pub n_up: Option<u64>,
    pub n_down: Option<u64>,
    pub interaction: Option<f64>,
    pub cutoff: Option<f64>,
    pub temperature: Option<Temperature>,
    pub grid_points: Option<usize>,
    pub r_max: Option<f64>,
    pub mixing: Option<f64>,
    pub scf_tolerance: Option<f64>,
    pub max_iterations: Option<usize>,
    pub include_hartree: Option<bool>,
    pub delta_floor: Option<f64>,
    pub fluc_prefactor: Option<f64>,
    pub seed: Option<SeedSpec>,
}

impl RawConfig {
    /// Apply defaults and check every invariant.
    pub fn validate(&self) -> Result<SolverConfig> {
        let bad = |msg: String| Err(BdgError::InvalidConfig(msg));

        let n_up = self.n_up.ok_or_else(|| BdgError::InvalidConfig("n_up is required".into()))?;
        let n_down = self.n_down.unwrap_or(n_up);
        if n_up + n_down == 0 {
            return Err(BdgError::NoParticles);
        }
        if n_down > n_up {
            return bad(format!(
                "n_up ({n_up}) must be the majority component, got n_down = {n_down}"
            ));
        }
        let interaction = self.interaction.unwrap_or(0.0);
        if !interaction.is_finite() {
            return bad(format!("interaction must be finite, got {interaction}"));
        }
        let cutoff = self.cutoff.unwrap_or(DEFAULT_CUTOFF);
        if !(cutoff > 1.5) {
            return bad(format!(
                "cutoff {cutoff} leaves no basis states (must exceed the 3/2 ground level)"
            ));
        }
        let temperature = self.temperature.unwrap_or(Temperature::Fermi(0.0));
        if !(temperature.raw() >= 0.0) || !temperature.raw().is_finite() {
            return bad(format!("temperature must be finite and >= 0, got {temperature}"));
        }
        let grid_points = self.grid_points.unwrap_or(DEFAULT_GRID_POINTS);
        if grid_points < 2 {
            return bad(format!("grid_points must be >= 2, got {grid_points}"));
        }
        let mixing = self.mixing.unwrap_or(DEFAULT_MIXING);
        if !(mixing > 0.0 && mixing <= 1.0) {
            return bad(format!("mixing must lie in (0, 1], got {mixing}"));
        }
        let scf_tolerance = self.scf_tolerance.unwrap_or(DEFAULT_TOLERANCE);
        if !(scf_tolerance > 0.0) {
            return bad(format!("scf_tolerance must be positive, got {scf_tolerance}"));
        }
        let max_iterations = self.max_iterations.unwrap_or(DEFAULT_MAX_ITERATIONS);
        if max_iterations == 0 {
            return bad("max_iterations must be >= 1".into());
        }
        let fluc_prefactor = self.fluc_prefactor.unwrap_or(1.0);
        if !(fluc_prefactor >= 0.0) || !fluc_prefactor.is_finite() {
            return bad(format!("fluc_prefactor must be finite and >= 0, got {fluc_prefactor}"));
        }
        let seed = self.seed.unwrap_or_default();
        if !(seed.amplitude >= 0.0) || !(seed.width > 0.0) {
            return bad(format!(
                "seed needs amplitude >= 0 and width > 0, got {} / {}",
                seed.amplitude, seed.width
            ));
        }

        let scales = DerivedScales::for_counts(n_up as f64, n_down as f64, interaction)?;
        let r_max = match self.r_max {
            Some(r) if r > 0.0 && r.is_finite() => r,
            Some(r) => return bad(format!("r_max must be positive, got {r}")),
            None => default_r_max(scales.thomas_fermi_radius, cutoff),
        };
        let delta_floor = match self.delta_floor {
            Some(d) if d >= 0.0 => d,
            Some(d) => return bad(format!("delta_floor must be >= 0, got {d}")),
            None => 1e-3 * scales.fermi_energy,
        };

        Ok(SolverConfig {
            n_up,
            n_down,
            interaction,
            cutoff,
            temperature,
            grid_points,
            r_max,
            mixing,
            scf_tolerance,
            max_iterations,
            include_hartree: self.include_hartree.unwrap_or(false),
            delta_floor,
            fluc_prefactor,
            seed,
        })
    }
}

/// Grid extent covering the superfluid cloud and the turning point of the
/// highest retained basis state.
pub fn default_r_max(thomas_fermi_radius: f64, cutoff: f64) -> f64 {
    (1.6 * thomas_fermi_radius).max((2.0 * cutoff).sqrt() + TURNING_POINT_MARGIN)
}

impl SolverConfig {
    pub fn total_particles(&self) -> u64 {
        self.n_up + self.n_down
    }

    /// Temperature in hbar*omega / k_B.
    pub fn temperature_trap_units(&self) -> f64 {
        let scales = derive_scales(self).expect("validated config has particles");
        self.temperature.in_trap_units(scales.fermi_temperature)
    }
}

/// Ideal-gas LDA scales of the trapped cloud.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedScales {
    /// E_F = (3N)^(1/3), in hbar*omega.
    pub fermi_energy: f64,
    /// T_F = E_F / k_B, numerically equal to `fermi_energy`.
    pub fermi_temperature: f64,
    /// R_TF = (24N)^(1/6), in a_ho.
    pub thomas_fermi_radius: f64,
    /// k_F = sqrt(2 E_F), in 1/a_ho.
    pub fermi_momentum: f64,
    /// P = (N_up - N_down) / N.
    pub polarization: f64,
    /// a_s = U / (4 pi), in a_ho.
    pub scattering_length: f64,
}

impl DerivedScales {
    /// Scales for (possibly fractional) component counts.
    pub fn for_counts(n_up: f64, n_down: f64, interaction: f64) -> Result<Self> {
        let n = n_up + n_down;
        if !(n > 0.0) {
            return Err(BdgError::NoParticles);
        }
        let fermi_energy = (3.0 * n).cbrt();
        Ok(DerivedScales {
            fermi_energy,
            fermi_temperature: fermi_energy,
            thomas_fermi_radius: (24.0 * n).powf(1.0 / 6.0),
            fermi_momentum: (2.0 * fermi_energy).sqrt(),
            polarization: (n_up - n_down) / n,
            scattering_length: interaction / (4.0 * PI),
        })
    }

    /// 1 / (k_F a_s); `-inf`/`+inf` for a vanishing coupling.
    pub fn inverse_kf_as(&self) -> f64 {
        1.0 / (self.fermi_momentum * self.scattering_length)
    }
}

pub fn derive_scales(config: &SolverConfig) -> Result<DerivedScales> {
    DerivedScales::for_counts(config.n_up as f64, config.n_down as f64, config.interaction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn raw(n_up: u64, n_down: u64) -> RawConfig {
        RawConfig {
            n_up: Some(n_up),
            n_down: Some(n_down),
            interaction: Some(-5.0),
            cutoff: Some(180.0),
            ..Default::default()
        }
    }

    #[test]
    fn fermi_energy_cube_root_identity() {
        let s = DerivedScales::for_counts(1.0 / 3.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(s.fermi_energy, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn large_cloud_scales() {
        let s = DerivedScales::for_counts(5e4, 5e4, -5.0).unwrap();
        // (3e5)^(1/3) and (2.4e6)^(1/6)
        assert_relative_eq!(s.fermi_energy, 66.943_295_008_216_94, max_relative = 1e-12);
        assert_relative_eq!(s.thomas_fermi_radius, 11.570_937_300_687_177, max_relative = 1e-12);
        assert!((s.inverse_kf_as() - (-0.22)).abs() < 0.005, "{}", s.inverse_kf_as());
        // k_F a_ho equals R_TF / a_ho for the ideal trapped gas
        assert_relative_eq!(s.fermi_momentum, s.thomas_fermi_radius, max_relative = 1e-12);
    }

    #[test]
    fn zero_particles_rejected() {
        assert_eq!(DerivedScales::for_counts(0.0, 0.0, -1.0), Err(BdgError::NoParticles));
        assert_eq!(raw(0, 0).validate(), Err(BdgError::NoParticles));
    }

    #[test]
    fn balanced_production_config_is_valid() {
        let cfg = raw(50_000, 50_000).validate().unwrap();
        let s = derive_scales(&cfg).unwrap();
        assert_eq!(s.polarization, 0.0);
        assert_eq!(cfg.grid_points, 600);
        assert_eq!(cfg.mixing, 0.5);
        assert!(cfg.r_max >= 1.6 * s.thomas_fermi_radius);
        assert!(cfg.r_max >= (2.0f64 * 180.0).sqrt());
        assert_relative_eq!(cfg.delta_floor, 1e-3 * s.fermi_energy);
        assert!(!cfg.include_hartree);
    }

    #[test]
    fn cutoff_without_states_rejected() {
        let mut r = raw(10, 10);
        r.cutoff = Some(1.0);
        assert!(matches!(r.validate(), Err(BdgError::InvalidConfig(_))));
        r.cutoff = Some(1.5);
        assert!(matches!(r.validate(), Err(BdgError::InvalidConfig(_))));
    }

    #[test]
    fn mixing_bounds() {
        let mut r = raw(10, 10);
        r.mixing = Some(0.0);
        assert!(r.validate().is_err());
        r.mixing = Some(1.0);
        assert!(r.validate().is_ok());
        r.mixing = Some(1.01);
        assert!(r.validate().is_err());
    }

    #[test]
    fn other_invariants_rejected() {
        let mut r = raw(5, 10);
        assert!(r.validate().is_err(), "minority larger than majority");
        r = raw(10, 10);
        r.grid_points = Some(1);
        assert!(r.validate().is_err());
        r = raw(10, 10);
        r.scf_tolerance = Some(0.0);
        assert!(r.validate().is_err());
        r = raw(10, 10);
        r.r_max = Some(-2.0);
        assert!(r.validate().is_err());
        r = raw(10, 10);
        r.temperature = Some(Temperature::Trap(-0.1));
        assert!(r.validate().is_err());
    }

    #[test]
    fn temperature_units() {
        let cfg = RawConfig {
            temperature: Some(Temperature::Fermi(0.1)),
            ..raw(4, 4)
        }
        .validate()
        .unwrap();
        assert_relative_eq!(cfg.temperature_trap_units(), 0.1 * 24f64.cbrt());
        assert_eq!(Temperature::Trap(0.3).in_trap_units(100.0), 0.3);
    }

    #[test]
    fn doubling_counts_scales_fermi_energy_by_cube_root_two() {
        for &(u, d) in &[(1.0, 1.0), (7.0, 3.0), (5e4, 5e4), (123.0, 0.0)] {
            let a = DerivedScales::for_counts(u, d, -1.0).unwrap();
            let b = DerivedScales::for_counts(2.0 * u, 2.0 * d, -1.0).unwrap();
            assert_relative_eq!(b.fermi_energy / a.fermi_energy, 2f64.cbrt(), max_relative = 1e-15);
            assert_relative_eq!(a.fermi_momentum.powi(2) / 2.0, a.fermi_energy, max_relative = 1e-15);
            assert!((0.0..=1.0).contains(&a.polarization));
        }
    }
}
