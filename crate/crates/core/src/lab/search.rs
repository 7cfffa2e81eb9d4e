//! Simulated annealing over parametric families at fixed degree.
//!
//! `d = 1` searches finite Blaschke products (zeros inside the disc) and
//! `d = 2` polynomials `c · Π (z - a_i)`, both optionally perturbed by a
//! fixed random field with tunable amplitude. Negative degrees compose with
//! a reflection. The chain starts at `z^k`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::{check_open_delta, ratio, SweepRecord};
use crate::degree::degree_of;
use crate::energy::threshold_energy;
use crate::geometry::{Discretization, GridSpec};
use crate::maps::sample_map;
use crate::seed::derive_seed;
use crate::{LabError, Result, SphereMap};

pub const MAX_SEARCH_BUDGET: usize = 100_000;
const MAX_SEARCH_DEGREE: i64 = 8;
const STEP: f64 = 0.1;
const T_START: f64 = 0.05;
const T_END: f64 = 1e-4;
/// Blaschke zeros stay inside this radius so the search grid resolves them.
const MAX_ZERO_RADIUS: f64 = 0.9;
const MAX_AMP: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub dim: usize,
    pub target_degree: i64,
    pub delta: f64,
    /// Number of evaluations, the seed state included.
    pub budget: usize,
    pub seed: u64,
    pub search_grid: GridSpec,
    pub verify_grid: GridSpec,
}

impl SearchConfig {
    pub fn new(dim: usize, target_degree: i64, delta: f64, budget: usize, seed: u64) -> Self {
        let (search_grid, verify_grid) = if dim == 1 {
            (GridSpec::Circle(1024), GridSpec::Circle(8192))
        } else {
            (GridSpec::Icosphere(3), GridSpec::Icosphere(5))
        };
        SearchConfig { dim, target_degree, delta, budget, seed, search_grid, verify_grid }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub best_map: String,
    /// The reported map evaluated on the verification grid.
    pub record: SweepRecord,
    /// The starting map on the verification grid.
    pub seed_record: SweepRecord,
    pub evaluations: usize,
    pub accepted: usize,
    pub rejected: usize,
    /// Best ratio seen on the search grid.
    pub search_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct State {
    /// `(r, θ)` for Blaschke zeros, `(re, im)` for polynomial zeros.
    zeros: Vec<(f64, f64)>,
    /// `(ln|c|, arg c)`; unused for `d = 1`.
    scale: (f64, f64),
    amp: f64,
}

impl State {
    fn seed(k: usize) -> Self {
        State { zeros: vec![(0.0, 0.0); k], scale: (0.0, 0.0), amp: 0.0 }
    }

    fn propose(&self, dim: usize, rng: &mut ChaCha8Rng) -> State {
        let mut g = || -> f64 { STEP * rng.sample::<f64, _>(StandardNormal) };
        let mut s = self.clone();
        for z in &mut s.zeros {
            if dim == 1 {
                z.0 = (z.0 + g()).abs().min(MAX_ZERO_RADIUS);
                z.1 += std::f64::consts::PI * g();
            } else {
                z.0 += g();
                z.1 += g();
                let r = z.0.hypot(z.1);
                if r > 2.0 {
                    (z.0, z.1) = (2.0 * z.0 / r, 2.0 * z.1 / r);
                }
            }
        }
        if dim == 2 {
            s.scale.0 = (s.scale.0 + g()).clamp(-(10f64.ln()), 10f64.ln());
            s.scale.1 += g();
        }
        s.amp = (s.amp + 0.5 * g()).abs().min(MAX_AMP);
        s
    }

    fn build(&self, dim: usize, degree: i64, field_seed: u64) -> Result<SphereMap> {
        let mut map = if dim == 1 {
            SphereMap::blaschke(self.zeros.clone())?
        } else {
            let c = Complex64::from_polar(self.scale.0.exp(), self.scale.1);
            SphereMap::poly(c, self.zeros.iter().map(|&(a, b)| Complex64::new(a, b)).collect())?
        };
        if degree < 0 {
            map = SphereMap::reflect(map);
        }
        if self.amp > 0.0 {
            map = SphereMap::perturb(map, self.amp, field_seed)?;
        }
        Ok(map)
    }
}

/// Ratio on the search grid, or `None` when the candidate is rejected.
fn score(map: &SphereMap, disc: &Discretization, cfg: &SearchConfig) -> Option<f64> {
    let run = || -> Result<Option<f64>> {
        let sm = sample_map(map, &disc.grid)?;
        let deg = degree_of(&sm, disc.mesh.as_deref())?;
        if deg.degree != cfg.target_degree {
            log::debug!("rejected {map}: degree {} drifted from {}", deg.degree, cfg.target_degree);
            return Ok(None);
        }
        let e = threshold_energy(&sm, cfg.delta, true)?.value;
        Ok((e > 0.0).then(|| deg.degree.unsigned_abs() as f64 / e))
    };
    run().unwrap_or_else(|e| {
        log::debug!("rejected {map}: {e}");
        None
    })
}

/// Maximises `|deg g| / E_δ(g)` at fixed degree by simulated annealing with
/// geometric cooling. The reported map is the better of the chain's best
/// state and the starting map, judged on the verification grid.
pub fn extremal_search(cfg: &SearchConfig) -> Result<SearchResult> {
    check_open_delta(cfg.delta)?;
    if cfg.dim != 1 && cfg.dim != 2 {
        return Err(LabError::invalid("dimension must be 1 or 2"));
    }
    if cfg.target_degree == 0 || cfg.target_degree.abs() > MAX_SEARCH_DEGREE {
        return Err(LabError::invalid(format!("target degree must be nonzero with |k| ≤ {MAX_SEARCH_DEGREE}")));
    }
    if cfg.budget == 0 || cfg.budget > MAX_SEARCH_BUDGET {
        return Err(LabError::invalid(format!("budget must lie in 1..={MAX_SEARCH_BUDGET}")));
    }
    if cfg.search_grid.dim() != cfg.dim || cfg.verify_grid.dim() != cfg.dim {
        return Err(LabError::invalid("search grids must match the dimension"));
    }
    let k = cfg.target_degree;
    let field_seed = derive_seed(cfg.seed, "search-field");
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "search"));
    let disc = cfg.search_grid.build()?;

    let start = State::seed(k.unsigned_abs() as usize);
    let start_map = start.build(cfg.dim, k, field_seed)?;
    let start_score = score(&start_map, &disc, cfg)
        .ok_or_else(|| LabError::resolution("the starting map fails on the search grid"))?;
    let (mut cur, mut cur_score) = (start.clone(), start_score);
    let (mut best, mut best_score) = (start.clone(), start_score);
    let (mut accepted, mut rejected) = (0, 0);
    for step in 1..cfg.budget {
        let frac = step as f64 / (cfg.budget - 1).max(1) as f64;
        let temp = T_START * (T_END / T_START).powf(frac);
        let cand = cur.propose(cfg.dim, &mut rng);
        let u: f64 = rng.random();
        let Some(s) = score(&cand.build(cfg.dim, k, field_seed)?, &disc, cfg) else {
            rejected += 1;
            continue;
        };
        if s >= cur_score || u < ((s - cur_score) / (temp * cur_score)).exp() {
            accepted += 1;
            (cur, cur_score) = (cand, s);
            if s > best_score {
                (best, best_score) = (cur.clone(), s);
            }
        }
    }

    let verify = cfg.verify_grid.build()?;
    let seed_record = ratio(&start_map, &verify, cfg.delta)?;
    let best_map = best.build(cfg.dim, k, field_seed)?;
    let mut record = seed_record.clone();
    let mut chosen = start_map;
    if best != start {
        match ratio(&best_map, &verify, cfg.delta) {
            Ok(r) if r.degree == Some(k) && r.finite_ratio() > seed_record.finite_ratio() => {
                record = r;
                chosen = best_map;
            }
            Ok(r) => log::info!("search optimum {best_map} not kept on the verification grid (degree {:?})", r.degree),
            Err(e) => log::info!("search optimum {best_map} failed verification: {e}"),
        }
    }
    Ok(SearchResult {
        best_map: chosen.spec(),
        record,
        seed_record,
        evaluations: cfg.budget,
        accepted,
        rejected,
        search_ratio: best_score,
    })
}
