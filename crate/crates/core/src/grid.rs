//! Radial quadrature grid on (0, r_max).

use std::f64::consts::PI;

use crate::error::{BdgError, Result};

/// Gauss-Legendre nodes and weights on (0, r_max).
///
/// `sum_i weights[i] * g(nodes[i])` approximates `int_0^r_max g(r) dr`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub r_max: f64,
}

impl RadialGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Radial measure `w_i r_i^2` for three-dimensional integrals `int dr r^2`.
    pub fn volume_weights(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(r, w)| w * r * r)
            .collect()
    }

    /// `int_0^r_max g(r) dr` for `g` sampled on the nodes.
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        debug_assert_eq!(samples.len(), self.len());
        samples.iter().zip(&self.weights).map(|(g, w)| g * w).sum()
    }

    /// `4 pi int_0^r_max g(r) r^2 dr`.
    pub fn integrate_3d(&self, samples: &[f64]) -> f64 {
        debug_assert_eq!(samples.len(), self.len());
        4.0 * PI
            * samples
                .iter()
                .zip(self.nodes.iter().zip(&self.weights))
                .map(|(g, (r, w))| g * w * r * r)
                .sum::<f64>()
    }
}

pub fn build_grid(grid_points: usize, r_max: f64) -> Result<RadialGrid> {
    if grid_points < 2 || !(r_max > 0.0) || !r_max.is_finite() {
        return Err(BdgError::InvalidGrid {
            points: grid_points,
            r_max,
        });
    }
    let (x, w) = gauss_legendre(grid_points);
    let half = 0.5 * r_max;
    Ok(RadialGrid {
        nodes: x.iter().map(|&x| half * (x + 1.0)).collect(),
        weights: w.iter().map(|&w| half * w).collect(),
        r_max,
    })
}

/// Gauss-Legendre rule on [-1, 1], nodes in ascending order.
///
/// Newton iteration on P_n with the three-term recurrence, seeded by the
/// Tricomi asymptotic node estimate.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // i-th largest root
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos()
            * (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
        nodes[i] = -x;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let (p, pm1) = if n == 0 { (1.0, 0.0) } else { (p1, p0) };
    let d = n as f64 * (x * p - pm1) / (x * x - 1.0);
    (p, d)
}
