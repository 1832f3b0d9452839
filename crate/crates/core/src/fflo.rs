//! Classification of sign oscillations in the pairing field.

use std::fmt;

use crate::config::DerivedScales;
use crate::field::RadialField;
use crate::grid::RadialGrid;

/// Nodes are searched for inside `SEARCH_EXTENT * R_TF`.
pub const SEARCH_EXTENT: f64 = 1.2;
/// An innermost node below this fraction of R_TF marks a core oscillation.
pub const CORE_LIMIT: f64 = 0.2;
/// Edge oscillations sit beyond this fraction of R_TF.
pub const EDGE_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FfloClass {
    None,
    EdgeOscillation,
    CoreOscillation,
}

impl FfloClass {
    pub fn as_str(self) -> &'static str {
        match self {
            FfloClass::None => "none",
            FfloClass::EdgeOscillation => "edge_oscillation",
            FfloClass::CoreOscillation => "core_oscillation",
        }
    }
}

impl fmt::Display for FfloClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FfloReport {
    pub class: FfloClass,
    /// Radii (a_ho) of the sign changes, ascending.
    pub node_radii: Vec<f64>,
}

impl FfloReport {
    /// Node radii in units of R_TF.
    pub fn scaled_nodes(&self, scales: &DerivedScales) -> Vec<f64> {
        self.node_radii
            .iter()
            .map(|r| r / scales.thomas_fermi_radius)
            .collect()
    }
}

/// Finds the sign changes of `pairing` inside 1.2 R_TF, skipping nodes where
/// `|Delta| <= delta_floor`, and classifies them by the innermost node.
pub fn detect_fflo(
    pairing: &RadialField,
    grid: &RadialGrid,
    scales: &DerivedScales,
    delta_floor: f64,
) -> FfloReport {
    let r_tf = scales.thomas_fermi_radius;
    let limit = SEARCH_EXTENT * r_tf;
    let values = &pairing.values;
    let mut node_radii = Vec::new();
    let mut last: Option<(usize, bool)> = None;
    for (i, (&r, &d)) in grid.nodes.iter().zip(values).enumerate() {
        if r >= limit {
            break;
        }
        if d.abs() <= delta_floor {
            continue;
        }
        let positive = d > 0.0;
        if let Some((j, was_positive)) = last {
            if positive != was_positive {
                node_radii.push(crossing(&grid.nodes, values, j, i));
            }
        }
        last = Some((i, positive));
    }
    let class = match node_radii.first() {
        None => FfloClass::None,
        Some(&r) if r / r_tf < CORE_LIMIT => FfloClass::CoreOscillation,
        Some(_) => FfloClass::EdgeOscillation,
    };
    FfloReport { class, node_radii }
}

/// Linear interpolation of the first sign change between nodes `from` and `to`.
fn crossing(nodes: &[f64], values: &[f64], from: usize, to: usize) -> f64 {
    let sign = values[from] > 0.0;
    for i in from..to {
        let (a, b) = (values[i], values[i + 1]);
        if (b > 0.0) != sign || b == 0.0 {
            if a == b {
                return nodes[i];
            }
            return nodes[i] - a * (nodes[i + 1] - nodes[i]) / (b - a);
        }
    }
    nodes[to]
}
