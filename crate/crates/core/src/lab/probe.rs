use serde::Serialize;

use super::{ell, ratio, SweepRecord};
use crate::geometry::Discretization;
use crate::{LabError, Result, SphereMap};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRow {
    #[serde(flatten)]
    pub record: SweepRecord,
    pub energy_unscaled: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub d: usize,
    pub delta: f64,
    pub ell: f64,
    pub rows: Vec<ProbeRow>,
    /// Finite ratios strictly increase along the given family order.
    pub ratios_increasing: bool,
}

/// Tabulates degree, energy and ratio for `families` (typically a
/// λ-escalation) at a threshold in the regime `ℓ_d ≤ δ < 2`.
pub fn failure_probe(delta: f64, families: &[SphereMap], disc: &Discretization) -> Result<ProbeReport> {
    let d = disc.dim();
    let l = ell(d);
    if !(delta >= l && delta < 2.0) {
        return Err(LabError::invalid(format!("probe delta must lie in [ℓ_{d}, 2) = [{l:.5}, 2), got {delta}")));
    }
    let mut rows = Vec::with_capacity(families.len());
    for map in families {
        let record = ratio(map, disc, delta)?;
        let energy_unscaled = record.energy_scaled.map(|e| e / delta.powi(d as i32));
        rows.push(ProbeRow { record, energy_unscaled });
    }
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.record.finite_ratio()).collect();
    let ratios_increasing = ratios.len() == rows.len() && ratios.windows(2).all(|w| w[1] > w[0]);
    Ok(ProbeReport { d, delta, ell: l, rows, ratios_increasing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GridSpec;

    #[test]
    fn domain_is_the_failure_regime() {
        let disc = GridSpec::Icosphere(2).build().unwrap();
        let id = [SphereMap::identity(2).unwrap()];
        assert!(failure_probe(1.6, &id, &disc).is_err());
        assert!(failure_probe(2.0, &id, &disc).is_err());
        let rep = failure_probe(1.9, &id, &disc).unwrap();
        let row = &rep.rows[0];
        assert_eq!(row.record.degree, Some(1));
        assert!(row.energy_unscaled.unwrap() > 0.0 && row.record.ratio.unwrap().is_finite());
    }
}
