//! Fixtures shared by the criterion benchmarks.

use bdg_core::{build_grid, tabulate_basis, BasisTable, FieldKind, RadialField};

/// Basis for a cloud of `n` atoms at cutoff `cutoff`, on the default grid.
pub fn fixture_basis(n: f64, cutoff: f64) -> BasisTable {
    let r_tf = (24.0 * n).powf(1.0 / 6.0);
    let grid = build_grid(600, bdg_core::config::default_r_max(r_tf, cutoff)).expect("grid");
    tabulate_basis(&grid, cutoff).expect("basis")
}

/// Smooth trial pairing field of height `amplitude` and width `width`.
pub fn trial_pairing(basis: &BasisTable, amplitude: f64, width: f64) -> RadialField {
    RadialField::from_fn(FieldKind::Pairing, &basis.grid, |r| {
        amplitude * (-(r / width).powi(2)).exp()
    })
}
