//! Empirical tests of `|deg g| ≤ C · E_δ(g)`.
//!
//! The empirical constant `C(δ)` is the largest ratio `|deg g| / E_δ(g)` over
//! a tested population of maps. It is a lower bound for the best constant,
//! never an estimate of it from above.

mod probe;
mod search;

use std::time::Instant;

use serde::Serialize;

pub use probe::{failure_probe, ProbeReport};
pub use search::{extremal_search, SearchConfig, SearchResult, MAX_SEARCH_BUDGET};

use crate::degree::{degree_of, DegreeResult};
use crate::energy::threshold_energies;
use crate::geometry::Discretization;
use crate::maps::sample_map;
use crate::{LabError, Result, SphereMap};

/// `ℓ_d = sqrt(2 + 2/(d+1))`.
pub fn ell(dim: usize) -> f64 {
    (2.0 + 2.0 / (dim as f64 + 1.0)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecordFlag {
    Ok,
    /// Zero energy and zero degree; the ratio is reported as 0.
    Degenerate,
    /// Zero energy with nonzero degree.
    ViolationWitness,
    /// Degree residual of at least 0.1.
    SuspectDegree,
    Error,
}

impl std::fmt::Display for RecordFlag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RecordFlag::Ok => "ok",
            RecordFlag::Degenerate => "degenerate",
            RecordFlag::ViolationWitness => "violation-witness",
            RecordFlag::SuspectDegree => "suspect-degree",
            RecordFlag::Error => "error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub map: String,
    pub d: usize,
    pub n: usize,
    pub delta: f64,
    pub degree: Option<i64>,
    pub energy_scaled: Option<f64>,
    pub ratio: Option<f64>,
    /// Wall time of the map's evaluation, shared by all its rows.
    pub runtime_ms: Option<f64>,
    pub flag: RecordFlag,
    pub message: Option<String>,
}

impl SweepRecord {
    fn from_parts(map: String, d: usize, n: usize, delta: f64, deg: &DegreeResult, energy: f64) -> Self {
        let (ratio, flag) = if energy > 0.0 {
            let f = if deg.is_suspect() { RecordFlag::SuspectDegree } else { RecordFlag::Ok };
            (deg.degree.unsigned_abs() as f64 / energy, f)
        } else if deg.degree == 0 {
            (0.0, RecordFlag::Degenerate)
        } else {
            (f64::INFINITY, RecordFlag::ViolationWitness)
        };
        SweepRecord {
            map,
            d,
            n,
            delta,
            degree: Some(deg.degree),
            energy_scaled: Some(energy),
            ratio: Some(ratio),
            runtime_ms: None,
            flag,
            message: None,
        }
    }

    fn failed(map: String, d: usize, n: usize, delta: f64, err: &LabError) -> Self {
        SweepRecord {
            map,
            d,
            n,
            delta,
            degree: None,
            energy_scaled: None,
            ratio: None,
            runtime_ms: None,
            flag: RecordFlag::Error,
            message: Some(err.to_string()),
        }
    }

    /// Finite ratio usable for the empirical constant.
    pub fn finite_ratio(&self) -> Option<f64> {
        self.ratio.filter(|r| r.is_finite())
    }
}

fn check_open_delta(delta: f64) -> Result<()> {
    if delta.is_finite() && delta > 0.0 && delta < 2.0 {
        Ok(())
    } else {
        Err(LabError::invalid(format!("delta must lie in (0, 2), got {delta}")))
    }
}

/// Degree and scaled energies of one map at several thresholds.
fn evaluate(map: &SphereMap, disc: &Discretization, deltas: &[f64]) -> Result<Vec<SweepRecord>> {
    let start = Instant::now();
    let sm = sample_map(map, &disc.grid)?;
    let deg = degree_of(&sm, disc.mesh.as_deref())?;
    let pe = threshold_energies(&sm, deltas)?;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    let spec = map.spec();
    Ok((0..deltas.len())
        .map(|k| {
            let energy = pe.report(k, true).value;
            let mut r = SweepRecord::from_parts(spec.clone(), map.dim(), disc.grid.len(), deltas[k], &deg, energy);
            r.runtime_ms = Some(ms);
            r
        })
        .collect())
}

/// `|deg g| / E_δ(g)` on the given discretization.
pub fn ratio(map: &SphereMap, disc: &Discretization, delta: f64) -> Result<SweepRecord> {
    check_open_delta(delta)?;
    if map.dim() != disc.dim() {
        return Err(LabError::invalid("map and grid dimensions differ"));
    }
    Ok(evaluate(map, disc, &[delta])?.remove(0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaSummary {
    pub delta: f64,
    /// Largest finite ratio at this δ, `None` when every row failed.
    pub empirical_c: Option<f64>,
    pub argmax: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub records: Vec<SweepRecord>,
    pub empirical_c_per_delta: Vec<DeltaSummary>,
    /// Maximum over δ of the empirical constant.
    pub headline_c: Option<f64>,
    /// `max_δ C(δ) / min_δ C(δ)` over the positive entries.
    pub spread: Option<f64>,
}

/// Evaluates every map at every δ. Rows come out in (map, δ) order; a
/// failing map yields error rows and the sweep continues.
pub fn sweep(families: &[SphereMap], deltas: &[f64], disc: &Discretization) -> Result<SweepReport> {
    if families.is_empty() || deltas.is_empty() {
        return Err(LabError::invalid("sweep needs at least one map and one delta"));
    }
    for &d in deltas {
        check_open_delta(d)?;
    }
    if let Some(m) = families.iter().find(|m| m.dim() != disc.dim()) {
        return Err(LabError::invalid(format!("map {m} does not match the grid dimension {}", disc.dim())));
    }
    let n = disc.grid.len();
    let mut records = Vec::with_capacity(families.len() * deltas.len());
    for map in families {
        match evaluate(map, disc, deltas) {
            Ok(rows) => records.extend(rows),
            Err(e) => {
                log::warn!("{map}: {e}");
                records.extend(deltas.iter().map(|&d| SweepRecord::failed(map.spec(), map.dim(), n, d, &e)));
            }
        }
    }
    let empirical_c_per_delta: Vec<DeltaSummary> = deltas
        .iter()
        .enumerate()
        .map(|(k, &delta)| {
            let best = records
                .iter()
                .skip(k)
                .step_by(deltas.len())
                .filter_map(|r| r.finite_ratio().map(|v| (v, &r.map)))
                .fold(None::<(f64, &String)>, |acc, (v, m)| match acc {
                    Some((b, _)) if b >= v => acc,
                    _ => Some((v, m)),
                });
            DeltaSummary { delta, empirical_c: best.map(|b| b.0), argmax: best.map(|b| b.1.clone()) }
        })
        .collect();
    let cs: Vec<f64> = empirical_c_per_delta.iter().filter_map(|s| s.empirical_c).collect();
    let headline_c = cs.iter().copied().reduce(f64::max);
    let positive: Vec<f64> = cs.iter().copied().filter(|&c| c > 0.0).collect();
    let spread = match (positive.iter().copied().reduce(f64::max), positive.iter().copied().reduce(f64::min)) {
        (Some(hi), Some(lo)) => Some(hi / lo),
        _ => None,
    };
    Ok(SweepReport { records, empirical_c_per_delta, headline_c, spread })
}

fn parse_all(specs: &[&str], dim: usize) -> Vec<SphereMap> {
    specs.iter().map(|s| SphereMap::parse(s, dim).expect("built-in family spec")).collect()
}

/// The default test population for `d ∈ {1, 2}`.
pub fn default_families(dim: usize) -> Result<Vec<SphereMap>> {
    let specs: &[&str] = match dim {
        1 => &[
            "constant",
            "identity",
            "power:k=2",
            "power:k=-3",
            "bubble:k=1,lambda=1",
            "bubble:k=1,lambda=10",
            "bubble:k=1,lambda=100",
            "bubble:k=2,lambda=10",
            "perturb:base=power:k=1,amp=0.3,seed=1",
            "perturb:base=power:k=-2,amp=0.2,seed=2",
        ],
        2 => &[
            "constant",
            "identity",
            "antipodal",
            "rational:num=0,0,1;den=1",
            "rational:num=0,0,0,1;den=1",
            "bubble:k=1,lambda=1",
            "bubble:k=1,lambda=10",
            "bubble:k=1,lambda=100",
            "bubble:k=2,lambda=10",
            "perturb:base=identity,amp=0.3,seed=3",
        ],
        _ => return Err(LabError::invalid(format!("dimension must be 1 or 2, got {dim}"))),
    };
    Ok(parse_all(specs, dim))
}

/// Parses a δ list: `log:a:b:n` (log-spaced), `lin:a:b:n`, or `v1,v2,...`.
pub fn parse_deltas(s: &str) -> Result<Vec<f64>> {
    let bad = || LabError::invalid(format!("bad delta grid `{s}`"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    let out = if let Some(rest) = s.strip_prefix("log:").or_else(|| s.strip_prefix("lin:")) {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let (a, b) = (num(parts[0])?, num(parts[1])?);
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if n == 0 || (n == 1 && a != b) {
            return Err(bad());
        }
        let log = s.starts_with("log:");
        if log && (a <= 0.0 || b <= 0.0) {
            return Err(bad());
        }
        (0..n)
            .map(|i| {
                let t = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
                if i + 1 == n {
                    b
                } else if log {
                    a * (b / a).powf(t)
                } else {
                    a + (b - a) * t
                }
            })
            .collect()
    } else {
        s.split(',').map(num).collect::<Result<Vec<f64>>>()?
    };
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}
