//! Position-dependent regularized coupling and the semiclassical gap
//! contribution of states above the basis cutoff.

use std::f64::consts::PI;

use crate::bdg::fermi_occupation;
use crate::error::{BdgError, Result};
use crate::field::{FieldKind, RadialField};
use crate::grid::{gauss_legendre, RadialGrid};

/// Nodes of the base Gauss-Legendre rule for the tail integral.
const TAIL_NODES: usize = 200;
/// The quadrature runs to `TAIL_EXTENT * k_c`; beyond that a closed form is used.
const TAIL_EXTENT: f64 = 40.0;
const TAIL_RTOL: f64 = 1e-8;
const TAIL_MAX_DEPTH: usize = 12;

/// Harmonic trap potential `r^2 / 2`.
pub fn trap_potential(r: f64) -> f64 {
    0.5 * r * r
}

/// Local Fermi and cutoff momenta on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalMomenta {
    /// `sqrt(2 (mu - V))` where positive, else 0.
    pub k_fermi: Vec<f64>,
    /// `sqrt(2 (E_c - V))` where positive, else 0.
    pub k_cut: Vec<f64>,
    pub potential: Vec<f64>,
    pub nodes: Vec<f64>,
    /// `(mu_up + mu_down) / 2`.
    pub mu_avg: f64,
    /// `(mu_up - mu_down) / 2`.
    pub dmu: f64,
    pub cutoff: f64,
}

impl LocalMomenta {
    pub fn new(grid: &RadialGrid, mu_up: f64, mu_down: f64, cutoff: f64) -> Self {
        let mu = 0.5 * (mu_up + mu_down);
        let potential: Vec<f64> = grid.nodes.iter().map(|&r| trap_potential(r)).collect();
        let local = |e: f64| -> Vec<f64> {
            potential
                .iter()
                .map(|&v| if e > v { (2.0 * (e - v)).sqrt() } else { 0.0 })
                .collect()
        };
        LocalMomenta {
            k_fermi: local(mu),
            k_cut: local(cutoff),
            potential,
            nodes: grid.nodes.clone(),
            mu_avg: mu,
            dmu: 0.5 * (mu_up - mu_down),
            cutoff,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `1/U~ = 1/U + (1/2pi^2) [ (k_F/2) ln((k_c+k_F)/(k_c-k_F)) - k_c ]`.
pub fn inverse_regularized_coupling(interaction: f64, k_fermi: f64, k_cut: f64) -> f64 {
    let log_term = if k_fermi > 0.0 {
        0.5 * k_fermi * ((k_cut + k_fermi) / (k_cut - k_fermi)).ln()
    } else {
        0.0
    };
    1.0 / interaction + (log_term - k_cut) / (2.0 * PI * PI)
}

/// Regularized contact coupling `U~(r)`.
///
/// Beyond the cutoff turning point (`k_c = 0`) the bare coupling is used.
/// A vanishing bare coupling gives `U~ = 0` everywhere.
pub fn regularized_coupling(momenta: &LocalMomenta, interaction: f64) -> Result<RadialField> {
    let n = momenta.len();
    if interaction == 0.0 {
        return Ok(RadialField::zeros(FieldKind::Coupling, n));
    }
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let (kf, kc) = (momenta.k_fermi[i], momenta.k_cut[i]);
        if kc == 0.0 {
            values.push(interaction);
            continue;
        }
        if kf > 0.0 && kc <= kf {
            return Err(BdgError::CutoffBelowFermiLevel {
                r: momenta.nodes[i],
                cutoff: momenta.cutoff,
                mu: momenta.mu_avg,
            });
        }
        values.push(1.0 / inverse_regularized_coupling(interaction, kf, kc));
    }
    Ok(RadialField::new(FieldKind::Coupling, values))
}

/// Parameters of the local semiclassical gap integral at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailPoint {
    pub delta: f64,
    pub potential: f64,
    pub mu_avg: f64,
    pub dmu: f64,
    pub cutoff: f64,
    pub temperature: f64,
}

impl TailPoint {
    /// Integrand in k of the above-cutoff anomalous density, including the
    /// `k^2 / (2 pi^2)` phase-space factor. Uses the cancellation-free form
    /// `1/(2E) - 1/(2 xi) = -Delta^2 / (2 E xi (E + xi))`.
    pub fn integrand(&self, k: f64) -> f64 {
        let xi = 0.5 * k * k + self.potential - self.mu_avg;
        let d = self.delta;
        let e = (xi * xi + d * d).sqrt();
        let occ = fermi_occupation(e - self.dmu, self.temperature)
            + fermi_occupation(e + self.dmu, self.temperature);
        let bracket = -d * d / (2.0 * e * xi * (e + xi)) - occ / (2.0 * e);
        k * k / (2.0 * PI * PI) * d * bracket
    }

    /// `int_{k_c}^inf integrand(k) dk`.
    pub fn integral(&self, r: f64) -> Result<f64> {
        let kc2 = 2.0 * (self.cutoff - self.potential);
        if self.delta == 0.0 || kc2 <= 0.0 {
            return Ok(0.0);
        }
        if self.cutoff <= self.mu_avg {
            return Err(BdgError::CutoffBelowFermiLevel {
                r,
                cutoff: self.cutoff,
                mu: self.mu_avg,
            });
        }
        let kc = kc2.sqrt();
        // k = k_c / t on t in [1/TAIL_EXTENT, 1]
        let g = |t: f64| self.integrand(kc / t) * kc / (t * t);
        let (x, w) = rule();
        let panel = |a: f64, b: f64| -> f64 {
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            x.iter().zip(w).map(|(x, w)| w * g(mid + half * x)).sum::<f64>() * half
        };
        let body = adaptive(&panel, 1.0 / TAIL_EXTENT, 1.0, TAIL_MAX_DEPTH)
            .map_err(|error| BdgError::QuadratureNotConverged { r, error })?;
        let k_big = TAIL_EXTENT * kc;
        let tail = -self.delta.powi(3) / (3.0 * PI * PI * k_big.powi(3));
        Ok(body + tail)
    }
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: std::sync::OnceLock<(Vec<f64>, Vec<f64>)> = std::sync::OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(TAIL_NODES))
}

fn adaptive(panel: &dyn Fn(f64, f64) -> f64, a: f64, b: f64, depth: usize) -> std::result::Result<f64, f64> {
    let whole = panel(a, b);
    let m = 0.5 * (a + b);
    let split = panel(a, m) + panel(m, b);
    let err = (split - whole).abs();
    if err <= TAIL_RTOL * split.abs() || err <= f64::MIN_POSITIVE {
        return Ok(split);
    }
    if depth == 0 {
        return Err(err);
    }
    Ok(adaptive(panel, a, m, depth - 1)? + adaptive(panel, m, b, depth - 1)?)
}

/// Gap contribution of states above the cutoff in the local density
/// approximation:
///
/// `Delta^LDA(r) = -U int_{k>k_c(r)} d^3k/(2pi)^3 [ Delta/(2E) (1 - f(E - dmu) - f(E + dmu)) - Delta/(2(eps - mu)) ]`.
///
/// Zero wherever `k_c(r) = 0` or `Delta(r) = 0`.
pub fn lda_gap_tail(
    pairing: &RadialField,
    momenta: &LocalMomenta,
    interaction: f64,
    temperature: f64,
) -> Result<RadialField> {
    pairing.check_len(momenta.len())?;
    let mut values = vec![0.0; momenta.len()];
    if interaction == 0.0 {
        return Ok(RadialField::new(FieldKind::Pairing, values));
    }
    for (i, out) in values.iter_mut().enumerate() {
        if momenta.k_cut[i] == 0.0 {
            continue;
        }
        let point = TailPoint {
            delta: pairing[i],
            potential: momenta.potential[i],
            mu_avg: momenta.mu_avg,
            dmu: momenta.dmu,
            cutoff: momenta.cutoff,
            temperature,
        };
        *out = -interaction * point.integral(momenta.nodes[i])?;
    }
    Ok(RadialField::new(FieldKind::Pairing, values))
}

/// `Delta = Delta^BdG + Delta^LDA`.
pub fn hybrid_gap(bdg_part: &RadialField, lda_part: &RadialField) -> Result<RadialField> {
    lda_part.check_len(bdg_part.len())?;
    Ok(RadialField::new(
        FieldKind::Pairing,
        bdg_part
            .values
            .iter()
            .zip(&lda_part.values)
            .map(|(a, b)| a + b)
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use approx::assert_relative_eq;

    /// Naive integrand (direct subtraction) for the brute-force oracle.
    fn naive(p: &TailPoint, k: f64) -> f64 {
        let xi = 0.5 * k * k + p.potential - p.mu_avg;
        let e = (xi * xi + p.delta * p.delta).sqrt();
        let occ = fermi_occupation(e - p.dmu, p.temperature) + fermi_occupation(e + p.dmu, p.temperature);
        k * k / (2.0 * PI * PI) * (p.delta / (2.0 * e) * (1.0 - occ) - p.delta / (2.0 * xi))
    }

    /// Trapezoid rule on k = k_c / t over t in (0, 1] with a million panels.
    fn trapezoid_oracle(p: &TailPoint) -> f64 {
        let kc = (2.0 * (p.cutoff - p.potential)).sqrt();
        let panels = 1_000_000usize;
        let h = 1.0 / panels as f64;
        let g = |t: f64| if t == 0.0 { 0.0 } else { naive(p, kc / t) * kc / (t * t) };
        let mut s = 0.5 * (g(0.0) + g(1.0));
        for i in 1..panels {
            s += g(i as f64 * h);
        }
        s * h
    }

    #[test]
    fn coupling_scalar_value() {
        let inv = inverse_regularized_coupling(-5.0, 0.0, 10.0);
        assert_relative_eq!(inv, -0.2 - 10.0 / (2.0 * PI * PI), epsilon = 1e-15);
        assert!((inv - (-0.70661)).abs() < 1e-4);
        assert!((1.0 / inv - (-1.4152)).abs() < 1e-3);
    }

    #[test]
    fn unitarity_limit_drops_bare_term() {
        let (kf, kc) = (3.0, 9.0);
        let inv = inverse_regularized_coupling(f64::INFINITY, kf, kc);
        let expect = (0.5 * kf * ((kc + kf) / (kc - kf)).ln() - kc) / (2.0 * PI * PI);
        assert_relative_eq!(inv, expect, epsilon = 1e-15);
    }

    #[test]
    fn large_cutoff_renormalizes_to_zero() {
        let mut prev = f64::NEG_INFINITY;
        for &kc in &[10.0, 1e2, 1e4, 1e6] {
            let u = 1.0 / inverse_regularized_coupling(-5.0, 4.0, kc);
            assert!(u < 0.0 && u > prev);
            prev = u;
        }
        assert!(prev > -1e-4);
    }

    #[test]
    fn coupling_field_regions() {
        let grid = build_grid(300, 25.0).unwrap();
        let m = LocalMomenta::new(&grid, 30.0, 30.0, 180.0);
        let u = regularized_coupling(&m, -5.0).unwrap();
        for i in 0..grid.len() {
            if m.k_cut[i] == 0.0 {
                assert_eq!(u[i], -5.0);
            } else {
                assert!(u[i] < 0.0 && u[i] > -5.0);
            }
        }
        // continuity across the Fermi turning point r = sqrt(60)
        let i = grid.nodes.iter().position(|&r| r > 60f64.sqrt()).unwrap();
        assert!((u[i] - u[i - 1]).abs() < 1e-2);
        assert!(regularized_coupling(&m, 0.0).unwrap().is_identically_zero());
    }

    #[test]
    fn cutoff_below_fermi_level_is_reported() {
        let grid = build_grid(50, 5.0).unwrap();
        let m = LocalMomenta::new(&grid, 12.0, 12.0, 10.0);
        assert!(matches!(
            regularized_coupling(&m, -1.0),
            Err(BdgError::CutoffBelowFermiLevel { .. })
        ));
    }

    #[test]
    fn tail_vanishes_without_pairing() {
        let grid = build_grid(100, 22.0).unwrap();
        let m = LocalMomenta::new(&grid, 40.0, 30.0, 180.0);
        let zero = RadialField::zeros(FieldKind::Pairing, grid.len());
        assert!(lda_gap_tail(&zero, &m, -5.0, 0.5).unwrap().is_identically_zero());
    }

    #[test]
    fn tail_sign_at_zero_temperature() {
        let p = TailPoint {
            delta: 10.0,
            potential: 0.0,
            mu_avg: 50.0,
            dmu: 0.0,
            cutoff: 180.0,
            temperature: 0.0,
        };
        let integral = p.integral(0.0).unwrap();
        assert!(integral < 0.0);
        // -U * integral has the sign of U
        assert!(-(-5.0) * integral < 0.0);
    }

    #[test]
    fn tail_matches_trapezoid_oracle() {
        let p = TailPoint {
            delta: 10.0,
            potential: 0.0,
            mu_avg: 50.0,
            dmu: 0.0,
            cutoff: 180.0,
            temperature: 0.0,
        };
        let got = -(-5.0) * p.integral(0.0).unwrap();
        let oracle = -(-5.0) * trapezoid_oracle(&p);
        assert_relative_eq!(got, oracle, max_relative = 1e-6);
    }

    #[test]
    fn tail_matches_oracle_with_imbalance_and_temperature() {
        let p = TailPoint {
            delta: 7.0,
            potential: 12.0,
            mu_avg: 40.0,
            dmu: 6.0,
            cutoff: 120.0,
            temperature: 30.0,
        };
        assert_relative_eq!(p.integral(1.0).unwrap(), trapezoid_oracle(&p), max_relative = 1e-6);
    }

    #[test]
    fn tail_zero_beyond_cutoff_turning_point() {
        let grid = build_grid(200, 25.0).unwrap();
        let m = LocalMomenta::new(&grid, 50.0, 50.0, 180.0);
        let d = RadialField::from_fn(FieldKind::Pairing, &grid, |_| 5.0);
        let t = lda_gap_tail(&d, &m, -5.0, 0.3).unwrap();
        for i in 0..grid.len() {
            if m.k_cut[i] == 0.0 {
                assert_eq!(t[i], 0.0);
            } else {
                assert!(t[i] < 0.0);
            }
        }
    }

    #[test]
    fn hybrid_is_pointwise_sum() {
        let a = RadialField::new(FieldKind::Pairing, vec![1.0, 2.0, 3.0, 4.0]);
        let b = RadialField::new(FieldKind::Pairing, vec![0.5, -1.0, 0.25, 8.0]);
        let z = RadialField::zeros(FieldKind::Pairing, 4);
        assert_eq!(hybrid_gap(&a, &z).unwrap(), a);
        assert_eq!(hybrid_gap(&z, &b).unwrap(), b);
        let h = hybrid_gap(&a, &b).unwrap();
        for i in [0usize, 2, 3] {
            assert_eq!(h[i], a[i] + b[i]);
        }
        assert!(hybrid_gap(&a, &RadialField::zeros(FieldKind::Pairing, 3)).is_err());
    }
}
