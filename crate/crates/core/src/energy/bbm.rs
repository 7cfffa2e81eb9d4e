use std::sync::Arc;

use super::{resolution_floor, threshold_energies};
use crate::maps::{gradient_norm, sample_map, DEFAULT_GRADIENT_STEP};
use crate::reduce::pairwise_sum;
use crate::{LabError, QuadratureGrid, Result, SphereMap};
use rayon::prelude::*;

/// `∫ |∇g|^d` by grid quadrature, with `|∇g|` the Frobenius norm.
pub fn dirichlet_energy(map: &SphereMap, grid: &QuadratureGrid, h: f64) -> Result<f64> {
    if map.dim() != grid.dim() {
        return Err(LabError::invalid("map and grid dimensions differ"));
    }
    let d = map.dim() as i32;
    let terms = grid
        .points()
        .par_iter()
        .zip(grid.weights())
        .map(|(p, w)| gradient_norm(map, p, h).map(|g| w * g.powi(d)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&terms))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BbmEstimate {
    /// Intercept of the linear fit `r(δ) ≈ K + a δ`.
    pub k_estimate: f64,
    pub slope: f64,
    pub deltas: Vec<f64>,
    /// `r(δ) = E_δ / ∫|∇g|^d`.
    pub ratios: Vec<f64>,
    pub energies: Vec<f64>,
    pub dirichlet: f64,
    /// Largest deviation of a ratio from the fitted line.
    pub residual: f64,
}

/// Extrapolates `E_δ(g) / ∫|∇g|^d` linearly to `δ = 0`.
pub fn bbm_limit_estimate(map: &SphereMap, grid: &Arc<QuadratureGrid>, deltas: &[f64]) -> Result<BbmEstimate> {
    if deltas.len() < 2 {
        return Err(LabError::invalid("the limit fit needs at least two deltas"));
    }
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(LabError::invalid("deltas must be strictly decreasing"));
    }
    let dirichlet = dirichlet_energy(map, grid, DEFAULT_GRADIENT_STEP)?;
    if dirichlet <= 1e-12 * grid.total_weight() {
        return Err(LabError::UndefinedRatio("Dirichlet energy vanishes (constant map)".into()));
    }
    let sm = sample_map(map, grid)?;
    if let Some(f) = resolution_floor(&sm) {
        let last = deltas[deltas.len() - 1];
        if last < f {
            log::warn!("smallest delta {last} is below the resolution floor {f:.4}");
        }
    }
    let pe = threshold_energies(&sm, deltas)?;
    let energies: Vec<f64> = (0..deltas.len()).map(|k| pe.report(k, true).value).collect();
    let ratios: Vec<f64> = energies.iter().map(|e| e / dirichlet).collect();
    let (k_estimate, slope) = linear_fit(deltas, &ratios);
    let residual = deltas
        .iter()
        .zip(&ratios)
        .map(|(d, r)| (r - k_estimate - slope * d).abs())
        .fold(0.0, f64::max);
    Ok(BbmEstimate { k_estimate, slope, deltas: deltas.to_vec(), ratios, energies, dirichlet, residual })
}

/// Least-squares line through `(x, y)`; returns `(intercept, slope)`.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}
