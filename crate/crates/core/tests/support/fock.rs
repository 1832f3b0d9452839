//! Exact many-body enumeration of one mean-field block.
//!
//! The block is written in terms of physical fermion modes (a_{n,up},
//! a_{n,down}), its Hamiltonian is built in the full Fock space by the
//! Jordan-Wigner construction and diagonalized, and zero-frequency
//! fluctuations are read off the thermal ensemble of many-body eigenstates.

#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};

/// Mean-field block in the oscillator basis.
pub struct BlockProblem {
    /// Single-particle matrix of spin up (`e_n - mu_up` on the diagonal).
    pub h_up: DMatrix<f64>,
    /// Single-particle matrix of spin down.
    pub h_down: DMatrix<f64>,
    /// Pairing matrix `D_nn'`.
    pub pairing: DMatrix<f64>,
    /// Radial functions `R_n(r)` at the probe radius.
    pub radial: Vec<f64>,
}

/// Zero-frequency variances of one block at one radius (no coupling or
/// angular factors).
#[derive(Debug, Clone, Copy)]
pub struct Variances {
    /// Of `psi_down psi_up`.
    pub pair: f64,
    /// Of `psi_up^dag psi_up`.
    pub density_up: f64,
    /// Of `psi_down^dag psi_down`.
    pub density_down: f64,
}

/// Annihilation operator of mode `k` among `modes`, as a dense matrix.
fn annihilator(k: usize, modes: usize) -> DMatrix<f64> {
    let dim = 1usize << modes;
    let mut c = DMatrix::zeros(dim, dim);
    for state in 0..dim {
        if state & (1 << k) != 0 {
            let below = (state & ((1 << k) - 1)).count_ones();
            let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
            c[(state ^ (1 << k), state)] = sign;
        }
    }
    c
}

pub fn zero_frequency_variances(p: &BlockProblem, temperature: f64) -> Variances {
    let n = p.radial.len();
    let modes = 2 * n;
    let dim = 1usize << modes;
    let c: Vec<DMatrix<f64>> = (0..modes).map(|k| annihilator(k, modes)).collect();
    let cd: Vec<DMatrix<f64>> = c.iter().map(|m| m.transpose()).collect();

    let mut h = DMatrix::zeros(dim, dim);
    for i in 0..n {
        for j in 0..n {
            h += &cd[i] * &c[j] * p.h_up[(i, j)];
            h += &cd[n + i] * &c[n + j] * p.h_down[(i, j)];
            let pair = &cd[i] * &cd[n + j];
            h += (&pair + pair.transpose()) * p.pairing[(i, j)];
        }
    }
    let eig = SymmetricEigen::new(h);
    let e0 = eig.eigenvalues.min();
    let weights: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&e| {
            if temperature > 0.0 {
                (-(e - e0) / temperature).exp()
            } else if e - e0 < 1e-9 {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let z: f64 = weights.iter().sum();
    let prob: Vec<f64> = weights.iter().map(|w| w / z).collect();

    let field = |offset: usize| -> DMatrix<f64> {
        let mut m = DMatrix::zeros(dim, dim);
        for (k, r) in p.radial.iter().enumerate() {
            m += &c[offset + k] * *r;
        }
        m
    };
    let psi_up = field(0);
    let psi_down = field(n);
    let pair_op = &psi_down * &psi_up;
    let n_up_op = psi_up.transpose() * &psi_up;
    let n_down_op = psi_down.transpose() * &psi_down;

    let vecs = &eig.eigenvectors;
    let energies = &eig.eigenvalues;
    let variance = |op: &DMatrix<f64>| -> f64 {
        let m = vecs.transpose() * op * vecs;
        let mean: f64 = (0..dim).map(|a| prob[a] * m[(a, a)]).sum();
        let mut second = 0.0;
        for a in 0..dim {
            if prob[a] == 0.0 {
                continue;
            }
            for b in 0..dim {
                if (energies[a] - energies[b]).abs() < 1e-9 {
                    second += prob[a] * m[(b, a)] * m[(b, a)];
                }
            }
        }
        second - mean * mean
    };
    Variances {
        pair: variance(&pair_op),
        density_up: variance(&n_up_op),
        density_down: variance(&n_down_op),
    }
}
