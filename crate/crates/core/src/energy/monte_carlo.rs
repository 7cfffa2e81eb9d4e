use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_delta, EnergyReport, Estimator};
use crate::geometry::sphere_measure;
use crate::reduce::{par_blocks, tree_reduce};
use crate::seed::derive_seed;
use crate::{chordal_distance, LabError, Result, SphereMap, SpherePoint};

pub const MIN_MC_SAMPLES: usize = 1000;
/// Samples per independently seeded stream.
pub const MC_BATCH: usize = 1 << 14;

fn uniform_point(rng: &mut ChaCha8Rng, dim: usize) -> SpherePoint {
    if dim == 1 {
        SpherePoint::from_angle(2.0 * PI * rng.random::<f64>())
    } else {
        let z = 2.0 * rng.random::<f64>() - 1.0;
        let phi = 2.0 * PI * rng.random::<f64>();
        let r = (1.0 - z * z).max(0.0).sqrt();
        SpherePoint::normalized([r * phi.cos(), r * phi.sin(), z])
    }
}

/// Count, mean and sum of squared deviations of a batch.
#[derive(Clone, Copy)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
    hits: u64,
}

fn merge(a: &Moments, b: &Moments) -> Moments {
    let n = a.n + b.n;
    if n == 0.0 {
        return *a;
    }
    let d = b.mean - a.mean;
    Moments {
        n,
        mean: a.mean + d * b.n / n,
        m2: a.m2 + b.m2 + d * d * a.n * b.n / n,
        hits: a.hits + b.hits,
    }
}

/// Scaled `E_δ` from i.i.d. uniform pairs on `S^d × S^d`. Batch `b` draws
/// from stream `b` of a generator seeded with `derive_seed(seed, "monte-carlo")`,
/// so the estimate depends only on `(map, δ, n_samples, seed)`.
pub fn monte_carlo_energy(map: &SphereMap, delta: f64, n_samples: usize, seed: u64) -> Result<EnergyReport> {
    check_delta(delta)?;
    if n_samples < MIN_MC_SAMPLES {
        return Err(LabError::invalid(format!("Monte Carlo needs at least {MIN_MC_SAMPLES} samples")));
    }
    let dim = map.dim();
    let measure2 = sphere_measure(dim).powi(2);
    let scale = measure2 * delta.powi(dim as i32);
    let base = derive_seed(seed, "monte-carlo");
    let n_batches = n_samples.div_ceil(MC_BATCH);
    let batches = par_blocks(n_batches, 1, |r| {
        let b = r.start;
        let mut rng = ChaCha8Rng::seed_from_u64(base);
        rng.set_stream(b as u64);
        let count = MC_BATCH.min(n_samples - b * MC_BATCH);
        let mut m = Moments { n: 0.0, mean: 0.0, m2: 0.0, hits: 0 };
        for _ in 0..count {
            let x = uniform_point(&mut rng, dim);
            let y = uniform_point(&mut rng, dim);
            let v = if chordal_distance(&map.eval(&x), &map.eval(&y)) > delta {
                m.hits += 1;
                scale / chordal_distance(&x, &y).powi(2 * dim as i32)
            } else {
                0.0
            };
            m.n += 1.0;
            let d = v - m.mean;
            m.mean += d / m.n;
            m.m2 += d * (v - m.mean);
        }
        m
    });
    let total = tree_reduce(&batches, &Moments { n: 0.0, mean: 0.0, m2: 0.0, hits: 0 }, &merge);
    let var = if total.n > 1.0 { total.m2 / (total.n - 1.0) } else { 0.0 };
    Ok(EnergyReport {
        delta,
        scaled: true,
        value: total.mean,
        estimator: Estimator::MonteCarlo,
        n: n_samples,
        stderr: (var / total.n).sqrt(),
        pair_fraction: total.hits as f64 / total.n,
        under_resolved: false,
        dim,
    })
}
