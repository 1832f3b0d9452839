//! Zero-frequency quasiparticle fluctuations of the pairing field and of the
//! spin densities, and the relative pairing fluctuation
//! `f(r) = sqrt(<delta^dag delta>) / |Delta|`.
//!
//! Every quasiparticle state contributes with the thermal weight
//! `f(E) f(-E) = f(E) (1 - f(E))`, so all fluctuations vanish at T = 0.

use std::f64::consts::PI;

use crate::basis::BasisTable;
use crate::bdg::{fermi_occupation, reduce_blocks, LBlockSpectrum};
use crate::error::Result;
use crate::field::{FieldKind, RadialField};
use crate::grid::RadialGrid;

/// Core average of f(r) is taken over r < `CORE_RADIUS * R_TF`.
pub const CORE_RADIUS: f64 = 0.15;

/// Raw fluctuation sums of one set of spectra (no coupling, no prefactor).
struct RawSums {
    anomalous: Vec<f64>,
    u_fourth: Vec<f64>,
    v_fourth: Vec<f64>,
}

fn raw_sums(spectra: &[LBlockSpectrum], basis: &BasisTable, temperature: f64) -> Result<RawSums> {
    let sums = reduce_blocks(spectra, basis, 3, |s, u, v, out| {
        let weight: Vec<f64> = s
            .eigenvalues
            .iter()
            .map(|&e| {
                2.0 * PI * s.degeneracy() * fermi_occupation(e, temperature) * fermi_occupation(-e, temperature)
            })
            .collect();
        if weight.iter().all(|&w| w == 0.0) {
            return;
        }
        for i in 0..u.ncols() {
            let uc = u.column(i);
            let vc = v.column(i);
            let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
            for (j, &w) in weight.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let (u2, v2) = (uc[j] * uc[j], vc[j] * vc[j]);
                a += w * u2 * v2;
                b += w * u2 * u2;
                c += w * v2 * v2;
            }
            out[0][i] = a;
            out[1][i] = b;
            out[2][i] = c;
        }
    })?;
    let mut it = sums.into_iter();
    Ok(RawSums {
        anomalous: it.next().unwrap_or_default(),
        u_fourth: it.next().unwrap_or_default(),
        v_fourth: it.next().unwrap_or_default(),
    })
}

/// Pairing-field fluctuation
/// `<delta^dag delta>(r) = prefactor * U~(r)^2 * sum 2pi (2l+1) u^2 v^2 f(E) f(-E)`.
pub fn pairing_fluctuations(
    spectra: &[LBlockSpectrum],
    basis: &BasisTable,
    coupling: &RadialField,
    temperature: f64,
    prefactor: f64,
) -> Result<RadialField> {
    coupling.check_len(basis.grid_points())?;
    let raw = raw_sums(spectra, basis, temperature)?;
    Ok(scaled_pairing(&raw.anomalous, coupling, prefactor))
}

fn scaled_pairing(anomalous: &[f64], coupling: &RadialField, prefactor: f64) -> RadialField {
    RadialField::new(
        FieldKind::Fluctuation,
        anomalous
            .iter()
            .zip(&coupling.values)
            .map(|(a, u)| prefactor * u * u * a)
            .collect(),
    )
}

/// Density fluctuations `(up, down)`:
/// `up = prefactor * sum 2pi (2l+1) v^4 f(E) f(-E)`,
/// `down = prefactor * sum 2pi (2l+1) u^4 f(E) f(-E)`.
pub fn density_fluctuations(
    spectra: &[LBlockSpectrum],
    basis: &BasisTable,
    temperature: f64,
    prefactor: f64,
) -> Result<(RadialField, RadialField)> {
    let raw = raw_sums(spectra, basis, temperature)?;
    let scale = |v: Vec<f64>| {
        RadialField::new(FieldKind::Fluctuation, v.into_iter().map(|x| prefactor * x).collect())
    };
    Ok((scale(raw.v_fourth), scale(raw.u_fourth)))
}

/// `f(r)` where `|Delta| > delta_floor`, absent elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeFluctuation {
    pub values: Vec<Option<f64>>,
    /// Quadrature-weighted mean of the defined values inside 0.15 R_TF.
    pub core_mean: Option<f64>,
}

impl RelativeFluctuation {
    /// `f < 1` where defined; false where masked.
    pub fn valid_mask(&self) -> Vec<bool> {
        self.values
            .iter()
            .map(|v| matches!(v, Some(f) if *f < 1.0))
            .collect()
    }
}

pub fn relative_fluctuation(
    pairing_fluc: &RadialField,
    pairing: &RadialField,
    grid: &RadialGrid,
    delta_floor: f64,
    thomas_fermi_radius: f64,
) -> Result<RelativeFluctuation> {
    pairing_fluc.check_len(grid.len())?;
    pairing.check_len(grid.len())?;
    let values: Vec<Option<f64>> = pairing_fluc
        .values
        .iter()
        .zip(&pairing.values)
        .map(|(&s, &d)| (d.abs() > delta_floor).then(|| s.max(0.0).sqrt() / d.abs()))
        .collect();
    let (mut num, mut den) = (0.0, 0.0);
    for ((&r, &w), v) in grid.nodes.iter().zip(&grid.weights).zip(&values) {
        if r >= CORE_RADIUS * thomas_fermi_radius {
            break;
        }
        if let Some(f) = v {
            num += w * f;
            den += w;
        }
    }
    let core_mean = (den > 0.0).then(|| num / den);
    Ok(RelativeFluctuation { values, core_mean })
}

/// All fluctuation diagnostics of one converged state.
#[derive(Debug, Clone, PartialEq)]
pub struct FluctuationProfile {
    pub pairing: RadialField,
    pub density_up: RadialField,
    pub density_down: RadialField,
    pub relative: RelativeFluctuation,
}

impl FluctuationProfile {
    pub fn valid_mask(&self) -> Vec<bool> {
        self.relative.valid_mask()
    }
}

#[allow(clippy::too_many_arguments)]
pub fn fluctuation_profile(
    spectra: &[LBlockSpectrum],
    basis: &BasisTable,
    coupling: &RadialField,
    pairing: &RadialField,
    temperature: f64,
    prefactor: f64,
    delta_floor: f64,
    thomas_fermi_radius: f64,
) -> Result<FluctuationProfile> {
    coupling.check_len(basis.grid_points())?;
    let raw = raw_sums(spectra, basis, temperature)?;
    let pairing_fluc = scaled_pairing(&raw.anomalous, coupling, prefactor);
    let scale = |v: Vec<f64>| {
        RadialField::new(FieldKind::Fluctuation, v.into_iter().map(|x| prefactor * x).collect())
    };
    let relative = relative_fluctuation(&pairing_fluc, pairing, &basis.grid, delta_floor, thomas_fermi_radius)?;
    Ok(FluctuationProfile {
        pairing: pairing_fluc,
        density_up: scale(raw.v_fourth),
        density_down: scale(raw.u_fourth),
        relative,
    })
}
