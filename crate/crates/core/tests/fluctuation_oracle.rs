mod support;

use bdg_core::{
    assemble_lblock, density_fluctuations, pairing_fluctuations, solve_blocks, tabulate_basis,
    build_grid, BasisTable, FieldKind, RadialField,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use support::fock::{zero_frequency_variances, BlockProblem};

fn random_pairing(basis: &BasisTable, rng: &mut ChaCha8Rng) -> RadialField {
    let (a, b, w) = (rng.random_range(-3.0..3.0), rng.random_range(-1.0..1.0), rng.random_range(0.5..3.0));
    RadialField::from_fn(FieldKind::Pairing, &basis.grid, |r| (a + b * r) * (-(r / w).powi(2)).exp())
}

fn block_problem(basis: &BasisTable, l: usize, pairing: &RadialField, mu: (f64, f64), node: usize) -> BlockProblem {
    let n = basis.states_per_l[l];
    let m = assemble_lblock(l, pairing, mu.0, mu.1, basis, None).unwrap();
    let e = &basis.energies[l];
    BlockProblem {
        h_up: nalgebra::DMatrix::from_fn(n, n, |i, j| if i == j { e[i] - mu.0 } else { 0.0 }),
        h_down: nalgebra::DMatrix::from_fn(n, n, |i, j| if i == j { e[i] - mu.1 } else { 0.0 }),
        pairing: m.view((0, n), (n, n)).into_owned(),
        radial: (0..n).map(|k| basis.values[l][(k, node)]).collect(),
    }
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-12 * scale
}

/// Every block with at most two radial states, against many-body enumeration.
#[test]
fn small_blocks_match_exact_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for cutoff in [3.0, 5.0] {
        let basis = tabulate_basis(&build_grid(48, 6.0).unwrap(), cutoff).unwrap();
        assert!(basis.states_per_l.iter().all(|&n| n <= 2));
        for _ in 0..4 {
            let pairing = random_pairing(&basis, &mut rng);
            let mu = (rng.random_range(0.0..6.0), rng.random_range(0.0..6.0));
            let u = rng.random_range(-4.0..-0.5);
            let coupling = RadialField::from_fn(FieldKind::Coupling, &basis.grid, |_| u);
            let spectra = solve_blocks(&basis, &pairing, mu.0, mu.1, None).unwrap();
            for t in [0.1, 1.0, 10.0] {
                for (l, spectrum) in spectra.iter().enumerate() {
                    let one = std::slice::from_ref(spectrum);
                    let pair = pairing_fluctuations(one, &basis, &coupling, t, 1.0).unwrap();
                    let (dens_up, dens_down) = density_fluctuations(one, &basis, t, 1.0).unwrap();
                    let angular = 2.0 * PI * (2 * l + 1) as f64;
                    for node in (0..basis.grid_points()).step_by(7) {
                        let p = block_problem(&basis, l, &pairing, mu, node);
                        let amp: f64 = p.radial.iter().map(|r| r * r).sum();
                        let exact = zero_frequency_variances(&p, t);
                        let scale = angular * amp * amp;
                        assert!(close(pair[node], u * u * angular * exact.pair, u * u * scale),
                            "pair l={l} T={t} node={node}: {} vs {}", pair[node], u * u * angular * exact.pair);
                        // up/down labels follow the printed u^4 <-> down, v^4 <-> up pairing
                        assert!(close(dens_down[node], angular * exact.density_up, scale),
                            "u^4 l={l} T={t}: {} vs {}", dens_down[node], angular * exact.density_up);
                        assert!(close(dens_up[node], angular * exact.density_down, scale),
                            "v^4 l={l} T={t}: {} vs {}", dens_up[node], angular * exact.density_down);
                        checked += 1;
                    }
                }
            }
        }
    }
    assert!(checked > 100);
}

#[test]
fn zero_temperature_fields_vanish() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let basis = tabulate_basis(&build_grid(48, 6.0).unwrap(), 5.0).unwrap();
    let pairing = random_pairing(&basis, &mut rng);
    let coupling = RadialField::from_fn(FieldKind::Coupling, &basis.grid, |_| -2.0);
    let spectra = solve_blocks(&basis, &pairing, 3.1, 2.2, None).unwrap();
    assert!(pairing_fluctuations(&spectra, &basis, &coupling, 0.0, 1.0).unwrap().is_identically_zero());
    let (a, b) = density_fluctuations(&spectra, &basis, 0.0, 1.0).unwrap();
    assert!(a.is_identically_zero() && b.is_identically_zero());
}
