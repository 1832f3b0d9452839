//! Self-consistent Bogoliubov-de Gennes solver for a two-component Fermi gas
//! in a spherical harmonic trap, with zero-frequency fluctuation diagnostics
//! that measure where the meanfield solution can be trusted.
//!
//! All quantities are in trap units (hbar = m = omega = k_B = 1).

pub mod basis;
pub mod bdg;
pub mod config;
pub mod error;
pub mod fflo;
pub mod fluctuations;
pub mod field;
pub mod grid;
pub mod regularization;
mod roots;
pub mod scf;

pub use basis::{states_per_l, tabulate_basis, BasisTable};
pub use bdg::{
    assemble_lblock, compute_fields, diagonalize, fermi_occupation, particle_numbers,
    solve_blocks, BdgFields, HartreeFields, LBlockSpectrum,
};
pub use config::{derive_scales, DerivedScales, RawConfig, SeedSpec, SolverConfig, Temperature};
pub use error::{BdgError, Result};
pub use field::{FieldKind, RadialField};
pub use grid::{build_grid, RadialGrid};
pub use fflo::{detect_fflo, FfloClass, FfloReport};
pub use regularization::{hybrid_gap, lda_gap_tail, regularized_coupling, LocalMomenta};
pub use fluctuations::{
    density_fluctuations, fluctuation_profile, pairing_fluctuations, relative_fluctuation,
    FluctuationProfile, RelativeFluctuation,
};
pub use scf::{
    initial_state, iterate, run_scf, scf_step, solve, solve_chemical_potentials, JournalEntry,
    MuSolution, ScfContext, ScfOutcome, ScfState,
};
