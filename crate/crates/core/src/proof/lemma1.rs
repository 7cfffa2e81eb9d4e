//! Mean increments of a scalar function on a ball against the thresholded
//! double integral:
//!
//! ```text
//! lhs      = |B|^{-2} ∬_{B×B} |f(x) - f(y)|^p
//! rhs_core = |B|^{p/d - 1} ∬_{|f(x)-f(y)| > δ} δ^p / |x - y|^{d+p}
//! ratio    = lhs / (rhs_core + δ^p)
//! ```

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::reduce::{pairwise_sum, par_blocks, ROW_BLOCK};
use crate::seed::derive_seed;
use crate::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Domain {
    Interval { a: f64, b: f64 },
    Disk { center: [f64; 2], radius: f64 },
}

impl Domain {
    pub fn unit_interval() -> Self {
        Domain::Interval { a: 0.0, b: 1.0 }
    }

    pub fn unit_disk() -> Self {
        Domain::Disk { center: [0.0, 0.0], radius: 1.0 }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Disk { .. } => 2,
        }
    }

    pub fn measure(&self) -> f64 {
        match *self {
            Domain::Interval { a, b } => b - a,
            Domain::Disk { radius, .. } => PI * radius * radius,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Domain::Interval { a, b } => a.is_finite() && b.is_finite() && a < b,
            Domain::Disk { center, radius } => center.iter().all(|c| c.is_finite()) && radius.is_finite() && radius > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(LabError::invalid(format!("degenerate domain {self:?}")))
        }
    }

    /// Equal-weight nodes: `n` midpoints on an interval, `n²` sunflower
    /// points on a disk.
    fn nodes(&self, n: usize) -> Vec<[f64; 2]> {
        match *self {
            Domain::Interval { a, b } => {
                let h = (b - a) / n as f64;
                (0..n).map(|i| [a + (i as f64 + 0.5) * h, 0.0]).collect()
            }
            Domain::Disk { center, radius } => {
                let total = n * n;
                let golden = PI * (3.0 - 5f64.sqrt());
                (0..total)
                    .map(|k| {
                        let r = radius * ((k as f64 + 0.5) / total as f64).sqrt();
                        let th = golden * k as f64;
                        [center[0] + r * th.cos(), center[1] + r * th.sin()]
                    })
                    .collect()
            }
        }
    }

    /// Range of the first coordinate.
    fn x_range(&self) -> (f64, f64) {
        match *self {
            Domain::Interval { a, b } => (a, b),
            Domain::Disk { center, radius } => (center[0] - radius, center[0] + radius),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ScalarFn {
    /// `c + a · x`.
    Affine { c: f64, a: [f64; 2] },
    /// Linear interpolation in the first coordinate through sorted knots,
    /// constant beyond the end knots.
    PiecewiseLinear { knots: Vec<(f64, f64)> },
    /// `c + Σ amp · sin(k · x + phase)`.
    Trig { c: f64, terms: Vec<([f64; 2], f64, f64)> },
}

impl ScalarFn {
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        match self {
            ScalarFn::Affine { c, a } => c + a[0] * x[0] + a[1] * x[1],
            ScalarFn::PiecewiseLinear { knots } => {
                let t = x[0];
                let i = knots.partition_point(|k| k.0 <= t);
                if i == 0 {
                    knots[0].1
                } else if i == knots.len() {
                    knots[i - 1].1
                } else {
                    let ((x0, y0), (x1, y1)) = (knots[i - 1], knots[i]);
                    y0 + (y1 - y0) * (t - x0) / (x1 - x0)
                }
            }
            ScalarFn::Trig { c, terms } => {
                c + terms.iter().map(|(k, amp, ph)| amp * (k[0] * x[0] + k[1] * x[1] + ph).sin()).sum::<f64>()
            }
        }
    }

    /// `f + s`.
    pub fn shifted(&self, s: f64) -> ScalarFn {
        match self {
            ScalarFn::Affine { c, a } => ScalarFn::Affine { c: c + s, a: *a },
            ScalarFn::PiecewiseLinear { knots } => {
                ScalarFn::PiecewiseLinear { knots: knots.iter().map(|&(x, y)| (x, y + s)).collect() }
            }
            ScalarFn::Trig { c, terms } => ScalarFn::Trig { c: c + s, terms: terms.clone() },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionKind {
    PiecewiseLinear,
    Trig,
}

/// A random test function: 8 interior knots with values in `[-1, 1]`, or 4
/// sine terms with wave numbers up to 10.
pub fn random_function(kind: FunctionKind, domain: &Domain, rng: &mut ChaCha8Rng) -> ScalarFn {
    match kind {
        FunctionKind::PiecewiseLinear => {
            let (lo, hi) = domain.x_range();
            let mut xs: Vec<f64> = (0..8).map(|_| rng.random_range(lo..hi)).collect();
            xs.push(lo);
            xs.push(hi);
            xs.sort_by(f64::total_cmp);
            ScalarFn::PiecewiseLinear { knots: xs.into_iter().map(|x| (x, rng.random_range(-1.0..=1.0))).collect() }
        }
        FunctionKind::Trig => {
            let dim = domain.dim();
            let terms = (0..4)
                .map(|_| {
                    let k = [rng.random_range(-10.0..10.0), if dim == 2 { rng.random_range(-10.0..10.0) } else { 0.0 }];
                    (k, rng.random_range(-1.0..=1.0), rng.random_range(0.0..2.0 * PI))
                })
                .collect();
            ScalarFn::Trig { c: 0.0, terms }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma1Report {
    pub p: f64,
    pub delta: f64,
    pub measure: f64,
    pub lhs: f64,
    pub rhs_core: f64,
    pub ratio_bound: f64,
    pub n_points: usize,
}

/// Both sides for several thresholds in one pass over the node pairs.
pub fn lemma1_checks(f: &ScalarFn, domain: &Domain, p: f64, deltas: &[f64], n: usize) -> Result<Vec<Lemma1Report>> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(LabError::invalid(format!("p must be at least 1, got {p}")));
    }
    if deltas.is_empty() || deltas.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(LabError::invalid("deltas must be positive"));
    }
    if n < 2 {
        return Err(LabError::invalid("need at least 2 nodes per dimension"));
    }
    domain.validate()?;
    let d = domain.dim();
    let nodes = domain.nodes(n);
    let m = nodes.len();
    if m > crate::geometry::MAX_POINTS {
        return Err(LabError::ResourceLimit(format!("{m} nodes exceed the limit")));
    }
    let vals: Vec<f64> = nodes.iter().map(|&x| f.eval(x)).collect();
    let kernel_exp = (d as f64 + p) / 2.0;
    let unit_p = p == 1.0;
    let width = 1 + deltas.len();
    let blocks = par_blocks(m, ROW_BLOCK, |range| {
        let mut rows = Vec::with_capacity(range.len() * width);
        for i in range {
            let mut acc = vec![0.0; width];
            for j in i + 1..m {
                let df = (vals[i] - vals[j]).abs();
                acc[0] += if unit_p { df } else { df.powf(p) };
                let (dx, dy) = (nodes[i][0] - nodes[j][0], nodes[i][1] - nodes[j][1]);
                let dist2 = dx * dx + dy * dy;
                let mut kern = None;
                for (k, &delta) in deltas.iter().enumerate() {
                    if df > delta {
                        let kv = *kern.get_or_insert_with(|| dist2.powf(-kernel_exp));
                        acc[k + 1] += kv;
                    }
                }
            }
            rows.extend(acc);
        }
        rows
    });
    let mut cols = vec![Vec::with_capacity(m); width];
    for rows in &blocks {
        for row in rows.chunks_exact(width) {
            for (c, v) in row.iter().enumerate() {
                cols[c].push(*v);
            }
        }
    }
    let sums: Vec<f64> = cols.iter().map(|c| 2.0 * pairwise_sum(c)).collect();
    let measure = domain.measure();
    let w = measure / m as f64;
    let lhs = sums[0] * w * w / (measure * measure);
    Ok(deltas
        .iter()
        .enumerate()
        .map(|(k, &delta)| {
            let dp = delta.powf(p);
            let rhs_core = measure.powf(p / d as f64 - 1.0) * dp * sums[k + 1] * w * w;
            Lemma1Report { p, delta, measure, lhs, rhs_core, ratio_bound: lhs / (rhs_core + dp), n_points: m }
        })
        .collect())
}

pub fn lemma1_check(f: &ScalarFn, domain: &Domain, p: f64, delta: f64, n: usize) -> Result<Lemma1Report> {
    Ok(lemma1_checks(f, domain, p, &[delta], n)?.remove(0))
}

/// Reports for `trials` random functions; trial `i` draws from stream `i`
/// of a generator seeded by `derive_seed(seed, "lemma1")`.
pub fn lemma1_population(
    kind: FunctionKind,
    domain: &Domain,
    trials: usize,
    seed: u64,
    p: f64,
    deltas: &[f64],
    n: usize,
) -> Result<Vec<Vec<Lemma1Report>>> {
    let base = derive_seed(seed, "lemma1");
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(base);
            rng.set_stream(t as u64);
            let f = random_function(kind, domain, &mut rng);
            lemma1_checks(&f, domain, p, deltas, n)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_fn() -> ScalarFn {
        ScalarFn::Affine { c: 0.0, a: [1.0, 0.0] }
    }

    /// `∫_0^1∫_0^1 |x - y| = 1/3` and
    /// `∬_{|x-y|>δ} δ/|x-y|² = 2δ ∫_δ^1 (1-s)/s² ds = 2(1-δ) + 2δ ln δ`,
    /// checked here by Simpson's rule on the inner 1-D integral.
    #[test]
    fn oracle_closed_forms() {
        let delta: f64 = 0.1;
        let m = 10_000;
        let h = (1.0 - delta) / m as f64;
        let g = |s: f64| (1.0 - s) / (s * s);
        let mut acc = g(delta) + g(1.0);
        for i in 1..m {
            acc += g(delta + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let numeric = 2.0 * delta * acc * h / 3.0;
        let closed = 2.0 * (1.0 - delta) + 2.0 * delta * delta.ln();
        assert!((numeric - closed).abs() < 1e-9);
        assert!((closed - 1.339483).abs() < 1e-6);
    }

    #[test]
    fn identity_interval_case() {
        let r = lemma1_check(&identity_fn(), &Domain::unit_interval(), 1.0, 0.1, 4000).unwrap();
        assert!((r.lhs * 3.0 - 1.0).abs() < 1e-2);
        assert!((r.rhs_core / 1.339483 - 1.0).abs() < 1e-2, "{}", r.rhs_core);
        assert!((r.ratio_bound / 0.231565 - 1.0).abs() < 1e-2);
    }

    #[test]
    fn constant_function_gives_zero() {
        let f = ScalarFn::Affine { c: 2.5, a: [0.0, 0.0] };
        for dom in [Domain::unit_interval(), Domain::unit_disk()] {
            let r = lemma1_check(&f, &dom, 1.5, 0.2, 30).unwrap();
            assert_eq!((r.lhs, r.rhs_core, r.ratio_bound), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn rejects_small_p() {
        assert!(lemma1_check(&identity_fn(), &Domain::unit_interval(), 0.5, 0.1, 10).is_err());
        assert!(lemma1_check(&identity_fn(), &Domain::unit_interval(), 1.0, 0.0, 10).is_err());
    }

    #[test]
    fn shift_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dom in [Domain::unit_interval(), Domain::unit_disk()] {
            let f = random_function(FunctionKind::Trig, &dom, &mut rng);
            let a = lemma1_check(&f, &dom, 1.0, 0.3, 40).unwrap();
            let b = lemma1_check(&f.shifted(0.75), &dom, 1.0, 0.3, 40).unwrap();
            assert!((a.ratio_bound - b.ratio_bound).abs() <= 1e-12 * a.ratio_bound);
        }
    }

    #[test]
    fn disk_affine_lhs() {
        // Mean |x1 - y1| over the unit disk squared is 256/(45π²).
        let r = lemma1_check(&identity_fn(), &Domain::unit_disk(), 1.0, 0.5, 60).unwrap();
        let exact = 256.0 / (45.0 * PI * PI);
        assert!((r.lhs / exact - 1.0).abs() < 5e-3, "{} vs {exact}", r.lhs);
        assert_eq!(r.n_points, 3600);
    }

    #[test]
    fn piecewise_linear_eval() {
        let f = ScalarFn::PiecewiseLinear { knots: vec![(0.0, 0.0), (0.5, 1.0), (1.0, -1.0)] };
        assert_eq!(f.eval([0.25, 0.0]), 0.5);
        assert_eq!(f.eval([0.75, 0.0]), 0.0);
        assert_eq!(f.eval([-1.0, 0.0]), 0.0);
        assert_eq!(f.eval([2.0, 0.0]), -1.0);
    }

    #[test]
    fn population_is_reproducible() {
        let dom = Domain::unit_interval();
        let a = lemma1_population(FunctionKind::PiecewiseLinear, &dom, 5, 3, 1.0, &[0.1, 0.2], 100).unwrap();
        let b = lemma1_population(FunctionKind::PiecewiseLinear, &dom, 5, 3, 1.0, &[0.1, 0.2], 100).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().flatten().all(|r| r.ratio_bound.is_finite() && r.lhs >= 0.0));
    }
}
