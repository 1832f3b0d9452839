//! Normalized radial eigenfunctions of the isotropic 3D harmonic oscillator.
//!
//! `R_nl(r) = sqrt(2 n! / Gamma(n + l + 3/2)) r^l L_n^(l+1/2)(r^2) exp(-r^2/2)`
//! with single-particle energies `2n + l + 3/2`. The functions are evaluated
//! through the three-term Laguerre recurrence rewritten for the normalized
//! polynomials, so no factorial or Gamma value is ever formed directly; the
//! `r^l exp(-r^2/2) / sqrt(Gamma(l + 3/2))` seed is carried in log space.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{BdgError, Result};
use crate::grid::RadialGrid;

/// Orthonormality deviation above which tabulation is rejected.
pub const ORTHONORMALITY_LIMIT: f64 = 1e-6;

const RESCALE_ABOVE: f64 = 1e150;

/// Oscillator energy `2n + l + 3/2`.
pub fn oscillator_energy(n: usize, l: usize) -> f64 {
    2.0 * n as f64 + l as f64 + 1.5
}

/// Number of radial quantum numbers n with `2n + l + 3/2 < cutoff`.
pub fn states_per_l(cutoff: f64, l: usize) -> usize {
    let x = (cutoff - l as f64 - 1.5) / 2.0;
    if x > 0.0 {
        x.ceil() as usize
    } else {
        0
    }
}

/// Largest l with at least one state below the cutoff, or `None`.
pub fn max_angular_momentum(cutoff: f64) -> Option<usize> {
    if states_per_l(cutoff, 0) == 0 {
        return None;
    }
    let mut l = (cutoff - 1.5).floor().max(0.0) as usize;
    while states_per_l(cutoff, l) == 0 {
        l -= 1;
    }
    Some(l)
}

/// `ln Gamma(l + 3/2)` by the half-integer recursion from `Gamma(3/2) = sqrt(pi)/2`.
fn ln_gamma_l_three_halves(l: usize) -> f64 {
    let mut acc = (std::f64::consts::PI.sqrt() / 2.0).ln();
    for k in 1..=l {
        acc += (k as f64 + 0.5).ln();
    }
    acc
}

/// Writes `R_nl(r)` for n = 0..out.len() into `out`.
pub fn radial_functions_into(l: usize, r: f64, out: &mut [f64]) {
    radial_functions_seeded(l, r, ln_gamma_l_three_halves(l), out);
}

fn radial_functions_seeded(l: usize, r: f64, ln_gamma: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    let alpha = l as f64 + 0.5;
    let x = r * r;
    let mut log_scale = 0.5 * std::f64::consts::LN_2 - 0.5 * x - 0.5 * ln_gamma;
    if l > 0 {
        log_scale += l as f64 * r.ln();
    }
    // q_n = sqrt(n! Gamma(alpha+1) / Gamma(n+alpha+1)) L_n^alpha(x), up to exp(log_scale)
    let mut q_prev = 0.0;
    let mut q = 1.0;
    out[0] = q * log_scale.exp();
    for n in 0..out.len() - 1 {
        let nf = n as f64;
        let next = ((2.0 * nf + alpha + 1.0 - x) * q - (nf * (nf + alpha)).sqrt() * q_prev)
            / ((nf + 1.0) * (nf + alpha + 1.0)).sqrt();
        q_prev = q;
        q = next;
        if q.abs() > RESCALE_ABOVE {
            q /= RESCALE_ABOVE;
            q_prev /= RESCALE_ABOVE;
            log_scale += RESCALE_ABOVE.ln();
        }
        out[n + 1] = q * log_scale.exp();
    }
}

/// Convenience single-value evaluation of `R_nl(r)`.
pub fn radial_function(n: usize, l: usize, r: f64) -> f64 {
    let mut buf = vec![0.0; n + 1];
    radial_functions_into(l, r, &mut buf);
    buf[n]
}

/// Tabulated `R_nl(r_i)` for every state below the cutoff.
#[derive(Debug, Clone)]
pub struct BasisTable {
    pub cutoff: f64,
    pub l_max: usize,
    /// `states_per_l[l]` = N_l.
    pub states_per_l: Vec<usize>,
    /// `values[l]` is N_l x grid_points with entry (n, i) = R_nl(r_i).
    pub values: Vec<DMatrix<f64>>,
    /// `energies[l][n]` = 2n + l + 3/2.
    pub energies: Vec<Vec<f64>>,
    pub grid: RadialGrid,
}

impl BasisTable {
    pub fn num_blocks(&self) -> usize {
        self.values.len()
    }

    pub fn grid_points(&self) -> usize {
        self.grid.len()
    }

    /// Total number of (n, l) pairs, not counting the m degeneracy.
    pub fn num_states(&self) -> usize {
        self.states_per_l.iter().sum()
    }

    /// `<nl|n'l>` on the grid for block `l`.
    pub fn overlap(&self, l: usize) -> DMatrix<f64> {
        self.weighted_overlap(l, &self.grid.volume_weights())
    }

    /// `sum_i R_nl(r_i) weight_i R_n'l(r_i)`.
    pub fn weighted_overlap(&self, l: usize, weight: &[f64]) -> DMatrix<f64> {
        let r = &self.values[l];
        let mut scaled = r.clone();
        for (i, mut col) in scaled.column_iter_mut().enumerate() {
            col *= weight[i];
        }
        let m = &scaled * r.transpose();
        symmetrized(m)
    }

    /// Largest `|<nl|n'l> - delta_nn'|` for block `l`.
    pub fn orthonormality_error(&self, l: usize) -> f64 {
        let s = self.overlap(l);
        let mut worst: f64 = 0.0;
        for i in 0..s.nrows() {
            for j in 0..s.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s[(i, j)] - target).abs());
            }
        }
        worst
    }

    /// Largest orthonormality error over all blocks.
    pub fn max_orthonormality_error(&self) -> f64 {
        (0..self.num_blocks())
            .into_par_iter()
            .map(|l| self.orthonormality_error(l))
            .collect::<Vec<_>>()
            .into_iter()
            .fold(0.0, f64::max)
    }
}

pub(crate) fn symmetrized(mut m: DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Tabulate all states with `2n + l + 3/2 < cutoff` on `grid`.
///
/// Fails with [`BdgError::BasisNotOrthonormal`] when the grid is too short
/// or too coarse to keep any block orthonormal within 1e-6.
pub fn tabulate_basis(grid: &RadialGrid, cutoff: f64) -> Result<BasisTable> {
    let l_max = max_angular_momentum(cutoff).ok_or_else(|| {
        BdgError::InvalidConfig(format!("cutoff {cutoff} leaves no basis states"))
    })?;
    let states: Vec<usize> = (0..=l_max).map(|l| states_per_l(cutoff, l)).collect();
    let values: Vec<DMatrix<f64>> = states
        .par_iter()
        .enumerate()
        .map(|(l, &n_l)| {
            let ln_gamma = ln_gamma_l_three_halves(l);
            let mut m = DMatrix::zeros(n_l, grid.len());
            let mut buf = vec![0.0; n_l];
            for (i, &r) in grid.nodes.iter().enumerate() {
                radial_functions_seeded(l, r, ln_gamma, &mut buf);
                for (n, v) in buf.iter().enumerate() {
                    m[(n, i)] = *v;
                }
            }
            m
        })
        .collect();
    let energies = states
        .iter()
        .enumerate()
        .map(|(l, &n_l)| (0..n_l).map(|n| oscillator_energy(n, l)).collect())
        .collect();
    let table = BasisTable {
        cutoff,
        l_max,
        states_per_l: states,
        values,
        energies,
        grid: grid.clone(),
    };
    let errors: Vec<f64> = (0..table.num_blocks())
        .into_par_iter()
        .map(|l| table.orthonormality_error(l))
        .collect();
    if let Some((l, &deviation)) = errors
        .iter()
        .enumerate()
        .find(|(_, e)| !(**e <= ORTHONORMALITY_LIMIT))
    {
        return Err(BdgError::BasisNotOrthonormal { l, deviation });
    }
    Ok(table)
}
