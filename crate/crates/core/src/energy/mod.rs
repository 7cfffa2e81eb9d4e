//! Thresholded nonlocal energy
//!
//! ```text
//! E_δ(g) = ∬_{|g(x)-g(y)| > δ} δ^d / |x-y|^{2d} dx dy
//! ```
//!
//! evaluated as a pair sum over a quadrature grid (all ordered pairs `i ≠ j`),
//! by Monte Carlo, and in the `δ → 0` limit against the Dirichlet energy.
//!
//! The pair sum visits each unordered pair once. Every pair is binned by the
//! number of thresholds it exceeds, so a whole list of `δ` values costs one
//! pass. Rows are grouped into fixed blocks; block results are combined in
//! block order by pairwise summation, so values do not depend on the number
//! of worker threads.

mod bbm;
mod monte_carlo;

use std::fmt;

pub use bbm::{bbm_limit_estimate, dirichlet_energy, BbmEstimate};
pub use monte_carlo::{monte_carlo_energy, MC_BATCH, MIN_MC_SAMPLES};

use crate::maps::SampledMap;
use crate::reduce::{pairwise_sum, par_blocks, ROW_BLOCK};
use crate::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    PairwiseQuadrature,
    MonteCarlo,
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Estimator::PairwiseQuadrature => "pairwise-quadrature",
            Estimator::MonteCarlo => "monte-carlo",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub delta: f64,
    /// Whether `value` includes the `δ^d` factor.
    pub scaled: bool,
    pub value: f64,
    pub estimator: Estimator,
    /// Grid points for quadrature, samples for Monte Carlo.
    pub n: usize,
    pub stderr: f64,
    pub pair_fraction: f64,
    /// `δ` is below the resolution floor of the grid.
    pub under_resolved: bool,
    pub(crate) dim: usize,
}

impl EnergyReport {
    /// The same report in the other scaling convention.
    pub fn with_scaling(&self, scaled: bool) -> EnergyReport {
        if scaled == self.scaled {
            return self.clone();
        }
        let f = self.delta.powi(self.dim as i32);
        let factor = if scaled { f } else { 1.0 / f };
        EnergyReport { scaled, value: self.value * factor, stderr: self.stderr * factor, ..self.clone() }
    }
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if delta.is_finite() && delta > 0.0 && delta <= 2.0 {
        Ok(())
    } else {
        Err(LabError::invalid(format!("delta must lie in (0, 2], got {delta}")))
    }
}

/// Smallest `δ` the grid resolves: `4 · spacing · Lipschitz`. `None` for
/// grids without adjacency.
pub fn resolution_floor(sm: &SampledMap) -> Option<f64> {
    sm.lipschitz_estimate().map(|l| 4.0 * sm.grid().spacing() * l)
}

/// Unscaled pair sums for several thresholds at once.
#[derive(Debug, Clone, PartialEq)]
pub struct PairEnergies {
    pub deltas: Vec<f64>,
    pub unscaled: Vec<f64>,
    pub pair_fraction: Vec<f64>,
    pub n: usize,
    pub dim: usize,
    floor: Option<f64>,
}

impl PairEnergies {
    pub fn report(&self, k: usize, scaled: bool) -> EnergyReport {
        let delta = self.deltas[k];
        let factor = if scaled { delta.powi(self.dim as i32) } else { 1.0 };
        EnergyReport {
            delta,
            scaled,
            value: self.unscaled[k] * factor,
            estimator: Estimator::PairwiseQuadrature,
            n: self.n,
            stderr: 0.0,
            pair_fraction: self.pair_fraction[k],
            under_resolved: self.floor.is_some_and(|f| delta < f),
            dim: self.dim,
        }
    }

    pub fn reports(&self, scaled: bool) -> Vec<EnergyReport> {
        (0..self.deltas.len()).map(|k| self.report(k, scaled)).collect()
    }
}

/// Structure-of-arrays copy of a sampled map for the pair loop.
struct PairData {
    x: [Vec<f64>; 3],
    g: [Vec<f64>; 3],
    w: Vec<f64>,
    dim: usize,
}

impl PairData {
    fn new(sm: &SampledMap, values: impl Fn(usize) -> [f64; 3]) -> Self {
        let pts = sm.grid().points();
        let n = pts.len();
        let mut x: [Vec<f64>; 3] = Default::default();
        let mut g: [Vec<f64>; 3] = Default::default();
        for c in 0..3 {
            x[c] = pts.iter().map(|p| p.0[c]).collect();
            g[c] = (0..n).map(|i| values(i)[c]).collect();
        }
        PairData { x, g, w: sm.grid().weights().to_vec(), dim: sm.dim() }
    }

    fn len(&self) -> usize {
        self.w.len()
    }

    /// Accumulates `Σ_{j>i} w_j / |x_i - x_j|^{2d}` into `acc[c]`, where `c`
    /// counts the squared thresholds (ascending) exceeded by `|g_i - g_j|²`.
    fn row(&self, i: usize, thr2: &[f64], acc: &mut [f64], cnt: &mut [u64]) {
        let [xs, ys, zs] = &self.x;
        let [gx, gy, gz] = &self.g;
        let (xi, yi, zi) = (xs[i], ys[i], zs[i]);
        let (ai, bi, ci) = (gx[i], gy[i], gz[i]);
        let squared = self.dim == 2;
        for j in i + 1..self.len() {
            let (dx, dy, dz) = (xs[j] - xi, ys[j] - yi, zs[j] - zi);
            let (ga, gb, gc) = (gx[j] - ai, gy[j] - bi, gz[j] - ci);
            let dg2 = (ga * ga + gb * gb + gc * gc).min(4.0);
            let dx2 = dx * dx + dy * dy + dz * dz;
            let k = self.w[j] / if squared { dx2 * dx2 } else { dx2 };
            let mut c = 0;
            for &s in thr2 {
                c += usize::from(dg2 > s);
            }
            acc[c] += k;
            cnt[c] += 1;
        }
    }

    /// Unscaled energies for `deltas` (any order) and their pair fractions.
    fn energies(&self, deltas: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut order: Vec<usize> = (0..deltas.len()).collect();
        order.sort_by(|&a, &b| deltas[a].total_cmp(&deltas[b]));
        let thr2: Vec<f64> = order.iter().map(|&k| deltas[k] * deltas[k]).collect();
        let bins = thr2.len() + 1;
        let n = self.len();
        let blocks = par_blocks(n, ROW_BLOCK, |range| {
            let mut rows = Vec::with_capacity(range.len() * bins);
            let mut cnt = vec![0u64; bins];
            let mut acc = vec![0.0; bins];
            for i in range {
                acc.iter_mut().for_each(|a| *a = 0.0);
                self.row(i, &thr2, &mut acc, &mut cnt);
                rows.extend(acc.iter().map(|a| a * self.w[i]));
            }
            (rows, cnt)
        });
        let mut per_bin = vec![Vec::with_capacity(n); bins];
        let mut counts = vec![0u64; bins];
        for (rows, cnt) in &blocks {
            for row in rows.chunks_exact(bins) {
                for (b, v) in row.iter().enumerate() {
                    per_bin[b].push(*v);
                }
            }
            for (t, c) in counts.iter_mut().zip(cnt) {
                *t += c;
            }
        }
        let bin_sums: Vec<f64> = per_bin.iter().map(|v| pairwise_sum(v)).collect();
        // Energy for the k-th smallest threshold sums bins k+1..; suffix sums
        // of non-negative terms keep the result monotone in δ.
        let mut sorted_e = vec![0.0; thr2.len()];
        let mut sorted_c = vec![0u64; thr2.len()];
        let (mut run, mut run_c) = (0.0, 0u64);
        for k in (0..thr2.len()).rev() {
            run += bin_sums[k + 1];
            run_c += counts[k + 1];
            sorted_e[k] = run;
            sorted_c[k] = run_c;
        }
        let total_pairs = (n as f64) * (n as f64 - 1.0) / 2.0;
        let mut e = vec![0.0; deltas.len()];
        let mut f = vec![0.0; deltas.len()];
        for (pos, &k) in order.iter().enumerate() {
            e[k] = 2.0 * sorted_e[pos];
            f[k] = sorted_c[pos] as f64 / total_pairs;
        }
        (e, f)
    }
}

fn check_grid(sm: &SampledMap) -> Result<()> {
    if sm.grid().len() < 3 {
        return Err(LabError::invalid("energy needs a grid with at least 3 points"));
    }
    Ok(())
}

/// Unscaled threshold energies for several `δ` values in one pass.
pub fn threshold_energies(sm: &SampledMap, deltas: &[f64]) -> Result<PairEnergies> {
    check_grid(sm)?;
    if deltas.is_empty() {
        return Err(LabError::invalid("at least one delta is required"));
    }
    for &d in deltas {
        check_delta(d)?;
    }
    let floor = resolution_floor(sm);
    if let Some(f) = floor {
        if let Some(d) = deltas.iter().copied().filter(|&d| d < f).reduce(f64::min) {
            log::warn!("delta {d} is below the grid resolution floor {f:.4}; the threshold shell is under-resolved");
        }
    }
    let data = PairData::new(sm, |i| sm.values()[i].0);
    let (unscaled, pair_fraction) = data.energies(deltas);
    Ok(PairEnergies { deltas: deltas.to_vec(), unscaled, pair_fraction, n: sm.grid().len(), dim: sm.dim(), floor })
}

/// `E_δ` on the grid, with or without the `δ^d` factor.
pub fn threshold_energy(sm: &SampledMap, delta: f64, scaled: bool) -> Result<EnergyReport> {
    Ok(threshold_energies(sm, &[delta])?.report(0, scaled))
}

/// Scaled energy with the threshold applied to the single component
/// `g_j` (`j` is 1-based).
pub fn component_threshold_energy(sm: &SampledMap, j: usize, delta: f64) -> Result<EnergyReport> {
    check_grid(sm)?;
    check_delta(delta)?;
    let d = sm.dim();
    if j == 0 || j > d + 1 {
        return Err(LabError::invalid(format!("component index must lie in 1..={}, got {j}", d + 1)));
    }
    let data = PairData::new(sm, |i| [sm.values()[i].0[j - 1], 0.0, 0.0]);
    let (e, f) = data.energies(&[delta]);
    let pe = PairEnergies { deltas: vec![delta], unscaled: e, pair_fraction: f, n: sm.grid().len(), dim: d, floor: resolution_floor(sm) };
    Ok(pe.report(0, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{uniform_circle_grid, GridSpec};
    use crate::maps::{sample_map, SphereMap};
    use std::sync::Arc;

    fn circle(spec: &str, n: usize) -> SampledMap {
        let grid = Arc::new(uniform_circle_grid(n).unwrap());
        sample_map(&SphereMap::parse(spec, 1).unwrap(), &grid).unwrap()
    }

    /// `∫∫_{|x-y|>δ} |x-y|^{-2}` on the unit circle, by the substitution
    /// `t = |x - y| = 2 sin(φ/2)`, `dφ = dt / sqrt(1 - t²/4)`:
    /// `2π · 2 ∫_δ^2 dt / (t² sqrt(1 - t²/4))`, evaluated by Simpson's rule
    /// after `t = 2 sin s` removes the endpoint singularity.
    fn circle_identity_unscaled(delta: f64) -> f64 {
        let (a, b) = ((delta / 2.0).asin(), std::f64::consts::FRAC_PI_2);
        let m = 20_000;
        let h = (b - a) / m as f64;
        // With t = 2 sin s: dt / (t² sqrt(1 - t²/4)) = ds / (2 sin² s).
        let f = |s: f64| 1.0 / (2.0 * s.sin().powi(2));
        let mut acc = f(a) + f(b);
        for i in 1..m {
            acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        4.0 * std::f64::consts::PI * acc * h / 3.0
    }

    #[test]
    fn closed_form_matches_numeric_integral() {
        for delta in [0.1f64, 0.25, 0.5, 1.0, 1.9] {
            let closed = 4.0 * std::f64::consts::PI * (1.0 - delta * delta / 4.0).sqrt();
            let numeric = delta * circle_identity_unscaled(delta);
            assert!((closed - numeric).abs() < 1e-9 * closed, "{delta}: {closed} vs {numeric}");
        }
    }

    #[test]
    fn identity_circle_energy() {
        let sm = circle("identity", 8192);
        let r = threshold_energy(&sm, 0.5, true).unwrap();
        let exact = 4.0 * std::f64::consts::PI * (1.0f64 - 0.0625).sqrt();
        assert!((r.value / exact - 1.0).abs() < 5e-3, "{} vs {exact}", r.value);
        assert!(r.pair_fraction > 0.0 && r.pair_fraction < 1.0);
        assert_eq!(r.estimator, Estimator::PairwiseQuadrature);
    }

    #[test]
    fn trivial_zeros() {
        let sm = circle("constant", 256);
        assert_eq!(threshold_energy(&sm, 0.1, true).unwrap().value, 0.0);
        let sm = circle("power:k=3", 256);
        assert_eq!(threshold_energy(&sm, 2.0, true).unwrap().value, 0.0);
        let disc = GridSpec::Icosphere(2).build().unwrap();
        let sm = sample_map(&SphereMap::antipodal(2).unwrap(), &disc.grid).unwrap();
        assert_eq!(threshold_energy(&sm, 2.0, false).unwrap().value, 0.0);
    }

    #[test]
    fn delta_domain() {
        let sm = circle("identity", 16);
        for d in [0.0, -1.0, 2.000001, f64::NAN] {
            assert!(threshold_energy(&sm, d, true).is_err());
        }
        assert!(component_threshold_energy(&sm, 0, 0.5).is_err());
        assert!(component_threshold_energy(&sm, 3, 0.5).is_err());
        assert!(component_threshold_energy(&sm, 2, 0.5).is_ok());
    }

    #[test]
    fn multi_delta_matches_single_passes() {
        let sm = circle("perturb:base=power:k=2,amp=0.3,seed=4", 512);
        let deltas = [0.3, 1.2, 0.05, 0.7];
        let multi = threshold_energies(&sm, &deltas).unwrap();
        for (k, &d) in deltas.iter().enumerate() {
            let single = threshold_energy(&sm, d, false).unwrap().value;
            assert!((multi.unscaled[k] - single).abs() <= 1e-12 * single);
        }
        assert!(multi.unscaled[2] >= multi.unscaled[0]);
        assert!(multi.unscaled[0] >= multi.unscaled[3]);
        assert!(multi.unscaled[3] >= multi.unscaled[1]);
    }

    #[test]
    fn component_energy_bounded_by_full() {
        let disc = GridSpec::Icosphere(3).build().unwrap();
        let sm = sample_map(&SphereMap::parse("rational:num=0,0,1;den=1", 2).unwrap(), &disc.grid).unwrap();
        let full = threshold_energy(&sm, 0.4, true).unwrap().value;
        for j in 1..=3 {
            let c = component_threshold_energy(&sm, j, 0.4).unwrap().value;
            assert!(c > 0.0 && c <= full);
        }
    }

    #[test]
    fn scaling_conversion() {
        let sm = circle("identity", 256);
        let s = threshold_energy(&sm, 0.5, true).unwrap();
        let u = threshold_energy(&sm, 0.5, false).unwrap();
        assert!((s.with_scaling(false).value - u.value).abs() < 1e-12 * u.value);
        assert_eq!(u.with_scaling(true).value, s.value);
    }

    #[test]
    fn thread_count_does_not_change_bits() {
        let sm = circle("power:k=3", 2000);
        let run = |t| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .unwrap()
                .install(|| threshold_energies(&sm, &[0.2, 0.9]).unwrap())
        };
        assert_eq!(run(1), run(3));
    }
}
