//! Per-l Bogoliubov-de Gennes blocks in the oscillator basis.
//!
//! For angular momentum l the BdG matrix acting on (u_n, v_n), n = 0..N_l, is
//!
//! ```text
//! [ diag(e_nl - mu_up) + H_up        D   ]
//! [ D                        -diag(e_nl - mu_down) - H_down ]
//! ```
//!
//! with `D_nn' = int dr r^2 R_nl Delta R_n'l` and optional Hartree blocks
//! `H_s = int dr r^2 R_nl U n_sbar R_n'l`. The (2l+1) members of an l
//! multiplet are identical, so they enter every sum through a degeneracy
//! factor.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::basis::{symmetrized, BasisTable};
use crate::error::{BdgError, Result};
use crate::field::{FieldKind, RadialField};

/// Densities feeding the optional Hartree term `U n_sbar(r)`.
#[derive(Debug, Clone, Copy)]
pub struct HartreeFields<'a> {
    pub coupling: f64,
    pub n_up: &'a RadialField,
    pub n_down: &'a RadialField,
}

/// Eigen-decomposition of one l block.
#[derive(Debug, Clone, PartialEq)]
pub struct LBlockSpectrum {
    pub l: usize,
    /// Ascending; length 2 N_l.
    pub eigenvalues: Vec<f64>,
    /// Row j holds the u-sector coefficients of eigenvector j (2 N_l x N_l).
    pub u_coeffs: DMatrix<f64>,
    /// Row j holds the v-sector coefficients of eigenvector j (2 N_l x N_l).
    pub v_coeffs: DMatrix<f64>,
    /// `sum_n u_jn^2` per eigenvector.
    pub u_weights: Vec<f64>,
    /// `sum_n v_jn^2` per eigenvector.
    pub v_weights: Vec<f64>,
}

impl LBlockSpectrum {
    pub fn degeneracy(&self) -> f64 {
        (2 * self.l + 1) as f64
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Spectrum after `mu_up += shift, mu_down -= shift`, which subtracts
    /// `shift` times the identity from the BdG matrix.
    pub fn shifted(&self, shift: f64) -> LBlockSpectrum {
        let mut s = self.clone();
        for e in &mut s.eigenvalues {
            *e -= shift;
        }
        s
    }

    /// Residual `max |A x - lambda x|` over all eigenpairs.
    pub fn eigen_residual(&self, matrix: &DMatrix<f64>) -> f64 {
        let n = self.u_coeffs.ncols();
        let mut worst: f64 = 0.0;
        for j in 0..self.dim() {
            let x: Vec<f64> = (0..n)
                .map(|k| self.u_coeffs[(j, k)])
                .chain((0..n).map(|k| self.v_coeffs[(j, k)]))
                .collect();
            for row in 0..2 * n {
                let ax: f64 = (0..2 * n).map(|c| matrix[(row, c)] * x[c]).sum();
                worst = worst.max((ax - self.eigenvalues[j] * x[row]).abs());
            }
        }
        worst
    }
}

/// Fermi function `1 / (exp(E/T) + 1)`; a step (1/2 at E = 0) when T = 0.
pub fn fermi_occupation(energy: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return if energy < 0.0 {
            1.0
        } else if energy > 0.0 {
            0.0
        } else {
            0.5
        };
    }
    let x = energy / temperature;
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// Per-node weights shared by every block of one assembly pass.
struct BlockWeights {
    pairing: Vec<f64>,
    hartree_up: Option<Vec<f64>>,
    hartree_down: Option<Vec<f64>>,
}

impl BlockWeights {
    fn new(
        basis: &BasisTable,
        pairing: &RadialField,
        hartree: Option<&HartreeFields<'_>>,
    ) -> Result<Self> {
        let g = basis.grid_points();
        pairing.check_len(g)?;
        let vw = basis.grid.volume_weights();
        let scaled = |f: &RadialField, c: f64| -> Vec<f64> {
            vw.iter().zip(&f.values).map(|(w, v)| w * c * v).collect()
        };
        let (hartree_up, hartree_down) = match hartree {
            Some(h) => {
                h.n_up.check_len(g)?;
                h.n_down.check_len(g)?;
                // spin up feels the down density and vice versa
                (
                    Some(scaled(h.n_down, h.coupling)),
                    Some(scaled(h.n_up, h.coupling)),
                )
            }
            None => (None, None),
        };
        Ok(BlockWeights {
            pairing: scaled(pairing, 1.0),
            hartree_up,
            hartree_down,
        })
    }

    fn assemble(&self, l: usize, mu_up: f64, mu_down: f64, basis: &BasisTable) -> DMatrix<f64> {
        let n = basis.states_per_l[l];
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        let energies = &basis.energies[l];
        for k in 0..n {
            m[(k, k)] = energies[k] - mu_up;
            m[(n + k, n + k)] = -(energies[k] - mu_down);
        }
        let d = basis.weighted_overlap(l, &self.pairing);
        m.view_mut((0, n), (n, n)).copy_from(&d);
        m.view_mut((n, 0), (n, n)).copy_from(&d.transpose());
        if let Some(w) = &self.hartree_up {
            let h = basis.weighted_overlap(l, w);
            let mut block = m.view_mut((0, 0), (n, n));
            block += &h;
        }
        if let Some(w) = &self.hartree_down {
            let h = basis.weighted_overlap(l, w);
            let mut block = m.view_mut((n, n), (n, n));
            block -= &h;
        }
        symmetrized(m)
    }
}

/// BdG matrix of block `l`, exactly symmetric.
pub fn assemble_lblock(
    l: usize,
    pairing: &RadialField,
    mu_up: f64,
    mu_down: f64,
    basis: &BasisTable,
    hartree: Option<&HartreeFields<'_>>,
) -> Result<DMatrix<f64>> {
    if l >= basis.num_blocks() {
        return Err(BdgError::InvalidConfig(format!(
            "l = {l} has no states below the cutoff"
        )));
    }
    let weights = BlockWeights::new(basis, pairing, hartree)?;
    Ok(weights.assemble(l, mu_up, mu_down, basis))
}

/// Full eigen-decomposition of a symmetric block, eigenvalues ascending.
pub fn diagonalize(l: usize, matrix: DMatrix<f64>) -> Result<LBlockSpectrum> {
    let dim = matrix.nrows();
    if dim % 2 != 0 || matrix.ncols() != dim {
        return Err(BdgError::DimensionMismatch {
            expected: 2 * (dim / 2),
            found: dim,
        });
    }
    let n = dim / 2;
    let eig = SymmetricEigen::try_new(matrix, f64::EPSILON, 200 * dim.max(1))
        .ok_or(BdgError::EigenNotConverged { l })?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut eigenvalues = Vec::with_capacity(dim);
    let mut u_coeffs = DMatrix::zeros(dim, n);
    let mut v_coeffs = DMatrix::zeros(dim, n);
    let mut u_weights = Vec::with_capacity(dim);
    let mut v_weights = Vec::with_capacity(dim);
    for (j, &src) in order.iter().enumerate() {
        let value = eig.eigenvalues[src];
        if !value.is_finite() {
            return Err(BdgError::EigenNotConverged { l });
        }
        eigenvalues.push(value);
        let col = eig.eigenvectors.column(src);
        let (mut su, mut sv) = (0.0, 0.0);
        for k in 0..n {
            u_coeffs[(j, k)] = col[k];
            v_coeffs[(j, k)] = col[n + k];
            su += col[k] * col[k];
            sv += col[n + k] * col[n + k];
        }
        u_weights.push(su);
        v_weights.push(sv);
    }
    Ok(LBlockSpectrum {
        l,
        eigenvalues,
        u_coeffs,
        v_coeffs,
        u_weights,
        v_weights,
    })
}

/// Assemble and diagonalize every block (parallel over l).
pub fn solve_blocks(
    basis: &BasisTable,
    pairing: &RadialField,
    mu_up: f64,
    mu_down: f64,
    hartree: Option<&HartreeFields<'_>>,
) -> Result<Vec<LBlockSpectrum>> {
    let weights = BlockWeights::new(basis, pairing, hartree)?;
    (0..basis.num_blocks())
        .into_par_iter()
        .map(|l| diagonalize(l, weights.assemble(l, mu_up, mu_down, basis)))
        .collect()
}

/// Radial amplitudes `u_jl(r_i)` and `v_jl(r_i)` of every eigenvector of a
/// block, as (2 N_l) x grid_points matrices.
pub fn block_amplitudes(
    spectrum: &LBlockSpectrum,
    basis: &BasisTable,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let r = &basis.values[spectrum.l];
    (&spectrum.u_coeffs * r, &spectrum.v_coeffs * r)
}

/// Sums per-block contributions to `n_out` radial profiles.
///
/// Blocks are evaluated in parallel but accumulated in ascending l, so the
/// result is bitwise independent of the worker count.
pub(crate) fn reduce_blocks<F>(
    spectra: &[LBlockSpectrum],
    basis: &BasisTable,
    n_out: usize,
    per_block: F,
) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&LBlockSpectrum, &DMatrix<f64>, &DMatrix<f64>, &mut [Vec<f64>]) + Sync,
{
    let g = basis.grid_points();
    for s in spectra {
        if s.l >= basis.num_blocks() || s.u_coeffs.ncols() != basis.states_per_l[s.l] {
            return Err(BdgError::DimensionMismatch {
                expected: basis.states_per_l.get(s.l).copied().unwrap_or(0),
                found: s.u_coeffs.ncols(),
            });
        }
    }
    let partials: Vec<Vec<Vec<f64>>> = spectra
        .par_iter()
        .map(|s| {
            let (u, v) = block_amplitudes(s, basis);
            let mut out = vec![vec![0.0; g]; n_out];
            per_block(s, &u, &v, &mut out);
            out
        })
        .collect();
    let mut total = vec![vec![0.0; g]; n_out];
    for part in &partials {
        for (acc, p) in total.iter_mut().zip(part) {
            for (a, b) in acc.iter_mut().zip(p) {
                *a += b;
            }
        }
    }
    Ok(total)
}

/// Pairing field and spin densities generated by a set of block spectra.
#[derive(Debug, Clone, PartialEq)]
pub struct BdgFields {
    /// `Delta^BdG(r) = U~(r) kappa(r)`.
    pub pairing: RadialField,
    /// Anomalous density `kappa(r) = sum (2l+1)/(4 pi) u v f(E)`.
    pub anomalous: RadialField,
    pub n_up: RadialField,
    pub n_down: RadialField,
}

/// Densities and the below-cutoff pairing field, summed over the full
/// spectrum of every block:
///
/// `n_up = sum (2l+1)/(4pi) u^2 f(E)`, `n_down = sum (2l+1)/(4pi) v^2 f(-E)`,
/// `Delta^BdG = U~ sum (2l+1)/(4pi) u v f(E)`.
pub fn compute_fields(
    spectra: &[LBlockSpectrum],
    basis: &BasisTable,
    coupling: &RadialField,
    temperature: f64,
) -> Result<BdgFields> {
    coupling.check_len(basis.grid_points())?;
    let sums = reduce_blocks(spectra, basis, 3, |s, u, v, out| {
        let deg = s.degeneracy() / (4.0 * PI);
        let occ: Vec<(f64, f64)> = s
            .eigenvalues
            .iter()
            .map(|&e| {
                (
                    deg * fermi_occupation(e, temperature),
                    deg * fermi_occupation(-e, temperature),
                )
            })
            .collect();
        for i in 0..u.ncols() {
            let uc = u.column(i);
            let vc = v.column(i);
            let (mut nu, mut nd, mut k) = (0.0, 0.0, 0.0);
            for (j, &(fp, fm)) in occ.iter().enumerate() {
                let (a, b) = (uc[j], vc[j]);
                nu += a * a * fp;
                nd += b * b * fm;
                k += a * b * fp;
            }
            out[0][i] = nu;
            out[1][i] = nd;
            out[2][i] = k;
        }
    })?;
    let mut it = sums.into_iter();
    let n_up = it.next().unwrap_or_default();
    let n_down = it.next().unwrap_or_default();
    let kappa = it.next().unwrap_or_default();
    let pairing = kappa
        .iter()
        .zip(&coupling.values)
        .map(|(k, u)| k * u)
        .collect();
    Ok(BdgFields {
        pairing: RadialField::new(FieldKind::Pairing, pairing),
        anomalous: RadialField::new(FieldKind::Pairing, kappa),
        n_up: RadialField::new(FieldKind::DensityUp, n_up),
        n_down: RadialField::new(FieldKind::DensityDown, n_down),
    })
}

/// `(N_up, N_down)` from the spectra alone, using basis orthonormality:
/// `N_up = sum (2l+1) |u_j|^2 f(E_j)`, `N_down = sum (2l+1) |v_j|^2 f(-E_j)`.
pub fn particle_numbers(spectra: &[LBlockSpectrum], temperature: f64) -> (f64, f64) {
    let mut up = 0.0;
    let mut down = 0.0;
    for s in spectra {
        let deg = s.degeneracy();
        let (mut bu, mut bd) = (0.0, 0.0);
        for ((&e, &wu), &wv) in s.eigenvalues.iter().zip(&s.u_weights).zip(&s.v_weights) {
            bu += wu * fermi_occupation(e, temperature);
            bd += wv * fermi_occupation(-e, temperature);
        }
        up += deg * bu;
        down += deg * bd;
    }
    (up, down)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::tabulate_basis;
    use crate::grid::build_grid;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn basis(cutoff: f64) -> BasisTable {
        tabulate_basis(&build_grid(400, 12.0).unwrap(), cutoff).unwrap()
    }

    fn field(basis: &BasisTable, f: impl Fn(f64) -> f64) -> RadialField {
        RadialField::from_fn(FieldKind::Pairing, &basis.grid, f)
    }

    #[test]
    fn occupation_values() {
        assert_eq!(fermi_occupation(0.0, 0.7), 0.5);
        assert_eq!(fermi_occupation(0.0, 0.0), 0.5);
        assert_eq!(fermi_occupation(-1.0, 0.0), 1.0);
        assert_eq!(fermi_occupation(1.0, 0.0), 0.0);
        assert_eq!(fermi_occupation(0.0, 3.0) * fermi_occupation(-0.0, 3.0), 0.25);
        assert_relative_eq!(fermi_occupation(2.0, 2.0), 0.268_941_421_369_995_1, max_relative = 1e-15);
        assert_eq!(fermi_occupation(1e6, 1e-3), 0.0);
        assert_eq!(fermi_occupation(-1e6, 1e-3), 1.0);
        let x = fermi_occupation(0.3, 0.1);
        assert_relative_eq!(x + fermi_occupation(-0.3, 0.1), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn decoupled_blocks_without_pairing() {
        let b = basis(20.0);
        let zero = field(&b, |_| 0.0);
        let mu = 6.3;
        for l in [0usize, 2, 5] {
            let s = diagonalize(l, assemble_lblock(l, &zero, mu, mu, &b, None).unwrap()).unwrap();
            let mut expect: Vec<f64> = b.energies[l]
                .iter()
                .flat_map(|&e| [e - mu, -(e - mu)])
                .collect();
            expect.sort_by(f64::total_cmp);
            for (a, e) in s.eigenvalues.iter().zip(&expect) {
                assert_relative_eq!(a, e, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn single_state_closed_form() {
        // l = 0, N_l = 1: xi_up = 2, xi_down = 4, Delta = 4
        let b = tabulate_basis(&build_grid(600, 10.0).unwrap(), 2.0).unwrap();
        assert_eq!(b.states_per_l, vec![1]);
        let delta = field(&b, |_| 4.0);
        let m = assemble_lblock(0, &delta, 1.5 - 2.0, 1.5 - 4.0, &b, None).unwrap();
        let s = diagonalize(0, m.clone()).unwrap();
        assert!((s.eigenvalues[0] + 6.0).abs() < 1e-10);
        assert!((s.eigenvalues[1] - 4.0).abs() < 1e-10);
        // -h +/- sqrt(xi^2 + Delta^2) with xi = 3, h = 1
        assert!((s.eigenvalues[1] - (-1.0 + 5.0)).abs() < 1e-10);
        assert!(s.eigen_residual(&m) < 1e-10);
    }

    #[test]
    fn constant_pairing_gives_identity_overlap() {
        let b = basis(30.0);
        let delta = field(&b, |_| 2.5);
        let l = 1;
        let n = b.states_per_l[l];
        let m = assemble_lblock(l, &delta, 0.0, 0.0, &b, None).unwrap();
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { 2.5 } else { 0.0 };
                assert!((m[(i, n + j)] - expect).abs() < 1e-10);
            }
        }
        assert_eq!(m, m.transpose());
    }

    #[test]
    fn random_symmetric_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 40;
        let mut a = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let x: f64 = rng.random_range(-1.0..1.0);
                a[(i, j)] = x;
                a[(j, i)] = x;
            }
        }
        let s = diagonalize(0, a.clone()).unwrap();
        assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let half = n / 2;
        let mut rec = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let x: Vec<f64> = (0..half)
                .map(|k| s.u_coeffs[(j, k)])
                .chain((0..half).map(|k| s.v_coeffs[(j, k)]))
                .collect();
            assert_relative_eq!(s.u_weights[j] + s.v_weights[j], 1.0, epsilon = 1e-10);
            for r in 0..n {
                for c in 0..n {
                    rec[(r, c)] += s.eigenvalues[j] * x[r] * x[c];
                }
            }
        }
        assert!((rec - a).abs().max() < 1e-9);
    }

    #[test]
    fn identity_matrix_spectrum() {
        let s = diagonalize(0, DMatrix::identity(6, 6)).unwrap();
        assert!(s.eigenvalues.iter().all(|&e| (e - 1.0).abs() < 1e-14));
    }

    #[test]
    fn balanced_spectrum_is_symmetric() {
        let b = basis(25.0);
        let delta = field(&b, |r| 3.0 * (-r * r / 9.0).exp());
        for l in [0usize, 4] {
            let s = solve_blocks(&b, &delta, 7.0, 7.0, None).unwrap()[l].clone();
            let d = s.dim();
            for j in 0..d {
                assert_relative_eq!(s.eigenvalues[j], -s.eigenvalues[d - 1 - j], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn shell_filling_free_gas() {
        // mu between 5/2 and 7/2 at low T: 1 + 3 states per spin
        let b = basis(20.0);
        let zero = field(&b, |_| 0.0);
        let coupling = RadialField::zeros(FieldKind::Coupling, b.grid_points());
        let spectra = solve_blocks(&b, &zero, 3.0, 3.0, None).unwrap();
        let (nu, nd) = particle_numbers(&spectra, 0.01);
        assert_relative_eq!(nu, 4.0, epsilon = 1e-12);
        assert_relative_eq!(nd, 4.0, epsilon = 1e-12);
        let f = compute_fields(&spectra, &b, &coupling, 0.01).unwrap();
        assert_relative_eq!(b.grid.integrate_3d(&f.n_up.values), 4.0, epsilon = 1e-8);
        assert_relative_eq!(b.grid.integrate_3d(&f.n_down.values), 4.0, epsilon = 1e-8);
        assert!(f.pairing.is_identically_zero());
    }

    #[test]
    fn half_spectrum_textbook_formulas_agree() {
        let b = basis(25.0);
        let delta = field(&b, |r| 4.0 * (-r * r / 16.0).exp());
        let coupling = RadialField::from_fn(FieldKind::Coupling, &b.grid, |r| -1.0 - 0.01 * r);
        let t = 0.8;
        let spectra = solve_blocks(&b, &delta, 8.0, 8.0, None).unwrap();
        let full = compute_fields(&spectra, &b, &coupling, t).unwrap();
        // sum over E > 0 only: n = u^2 f + v^2 (1 - f), kappa = -u v (1 - 2f)
        let g = b.grid_points();
        let (mut n_up, mut n_down, mut delta_half) = (vec![0.0; g], vec![0.0; g], vec![0.0; g]);
        for s in &spectra {
            let (u, v) = block_amplitudes(s, &b);
            let deg = s.degeneracy() / (4.0 * PI);
            for (j, &e) in s.eigenvalues.iter().enumerate().filter(|(_, e)| **e > 0.0) {
                let f = fermi_occupation(e, t);
                for i in 0..g {
                    n_up[i] += deg * (u[(j, i)].powi(2) * f + v[(j, i)].powi(2) * (1.0 - f));
                    n_down[i] += deg * (u[(j, i)].powi(2) * f + v[(j, i)].powi(2) * (1.0 - f));
                    delta_half[i] -= deg * coupling[i] * u[(j, i)] * v[(j, i)] * (1.0 - 2.0 * f);
                }
            }
        }
        for i in 0..g {
            assert!((full.n_up[i] - n_up[i]).abs() < 1e-8);
            assert!((full.n_down[i] - n_down[i]).abs() < 1e-8);
            assert!((full.pairing[i] - delta_half[i]).abs() < 1e-8);
            assert!((full.n_up[i] - full.n_down[i]).abs() < 1e-8);
        }
        // attractive coupling with positive Delta gives a positive gap response
        assert!(full.pairing[0] > 0.0);
    }

    #[test]
    fn infinite_temperature_equalizes_spins() {
        let b = basis(15.0);
        let delta = field(&b, |r| 2.0 * (-r * r / 4.0).exp());
        let coupling = RadialField::zeros(FieldKind::Coupling, b.grid_points());
        let spectra = solve_blocks(&b, &delta, 5.0, 2.0, None).unwrap();
        let f = compute_fields(&spectra, &b, &coupling, f64::INFINITY).unwrap();
        for i in 0..b.grid_points() {
            assert!((f.n_up[i] - f.n_down[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn number_trace_matches_grid_integral() {
        let b = basis(25.0);
        let delta = field(&b, |r| 3.0 * (-r * r / 10.0).exp());
        let coupling = RadialField::zeros(FieldKind::Coupling, b.grid_points());
        let spectra = solve_blocks(&b, &delta, 7.5, 5.5, None).unwrap();
        let t = 0.4;
        let (nu, nd) = particle_numbers(&spectra, t);
        let f = compute_fields(&spectra, &b, &coupling, t).unwrap();
        assert_relative_eq!(b.grid.integrate_3d(&f.n_up.values), nu, max_relative = 1e-8);
        assert_relative_eq!(b.grid.integrate_3d(&f.n_down.values), nd, max_relative = 1e-8);
        // sector norms: each eigenvector splits its unit norm between the spins
        let total: f64 = spectra
            .iter()
            .map(|s| {
                s.degeneracy()
                    * s.eigenvalues
                        .iter()
                        .zip(s.u_weights.iter().zip(&s.v_weights))
                        .map(|(&e, (wu, wv))| wu * fermi_occupation(e, t) + wv * fermi_occupation(-e, t))
                        .sum::<f64>()
            })
            .sum();
        assert_relative_eq!(nu + nd, total, max_relative = 1e-12);
    }

    #[test]
    fn spin_shift_is_identity_shift() {
        let b = basis(20.0);
        let delta = field(&b, |r| 1.5 * (-r * r / 6.0).exp());
        let base = solve_blocks(&b, &delta, 6.0, 6.0, None).unwrap();
        let moved = solve_blocks(&b, &delta, 6.7, 5.3, None).unwrap();
        for (s0, s1) in base.iter().zip(&moved) {
            let sh = s0.shifted(0.7);
            for (a, c) in sh.eigenvalues.iter().zip(&s1.eigenvalues) {
                assert_relative_eq!(a, c, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn hartree_shifts_diagonal_blocks() {
        let b = basis(12.0);
        let zero = field(&b, |_| 0.0);
        let n_up = RadialField::from_fn(FieldKind::DensityUp, &b.grid, |_| 0.0);
        let n_down = RadialField::from_fn(FieldKind::DensityDown, &b.grid, |_| 0.1);
        let h = HartreeFields {
            coupling: -2.0,
            n_up: &n_up,
            n_down: &n_down,
        };
        let m = assemble_lblock(0, &zero, 1.0, 1.0, &b, Some(&h)).unwrap();
        let plain = assemble_lblock(0, &zero, 1.0, 1.0, &b, None).unwrap();
        let n = b.states_per_l[0];
        for k in 0..n {
            assert!((m[(k, k)] - plain[(k, k)] + 0.2).abs() < 1e-10);
            assert!((m[(n + k, n + k)] - plain[(n + k, n + k)]).abs() < 1e-12);
        }
    }

    #[test]
    fn mismatched_field_rejected() {
        let b = basis(8.0);
        let short = RadialField::zeros(FieldKind::Pairing, 3);
        assert!(matches!(
            assemble_lblock(0, &short, 0.0, 0.0, &b, None),
            Err(BdgError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn eigenvectors_are_orthonormal() {
        let b = basis(20.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a: f64 = rng.random_range(1.0..4.0);
        let delta = field(&b, |r| a * (-r * r / 8.0).exp() * (1.0 - r / 5.0));
        let s = solve_blocks(&b, &delta, 6.0, 4.0, None).unwrap();
        for sp in &s {
            let d = sp.dim();
            let n = d / 2;
            for i in 0..d {
                for j in 0..d {
                    let dot: f64 = (0..n)
                        .map(|k| sp.u_coeffs[(i, k)] * sp.u_coeffs[(j, k)] + sp.v_coeffs[(i, k)] * sp.v_coeffs[(j, k)])
                        .sum();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - expect).abs() < 1e-10);
                }
            }
        }
    }
}
