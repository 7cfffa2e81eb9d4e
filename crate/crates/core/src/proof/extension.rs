use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::Serialize;

use crate::degree::degree_of;
use crate::geometry::vec3::norm;
use crate::geometry::TriangleMesh;
use crate::maps::SampledMap;
use crate::reduce::pairwise_sum;
use crate::{chordal_distance, LabError, Result, SpherePoint};

/// Level at which the extension is considered to have lost the boundary data.
pub const ALPHA: f64 = 0.5;
pub const RHO_STEP_RANGE: RangeInclusive<f64> = 1e-4..=1e-1;

fn under_resolved(x: &SpherePoint, r: f64) -> LabError {
    LabError::CapUnderResolved { radius: r, x: x.0[0], y: x.0[1], z: x.0[2] }
}

/// Weighted mean of the sampled values over the closed cap `|y - x| ≤ r`.
pub fn cap_average(sm: &SampledMap, x: &SpherePoint, r: f64) -> Result<[f64; 3]> {
    let grid = sm.grid();
    let (mut w, mut v) = (0.0, [0.0; 3]);
    for ((p, wi), g) in grid.points().iter().zip(grid.weights()).zip(sm.values()) {
        if chordal_distance(p, x) <= r {
            w += wi;
            for (vc, gc) in v.iter_mut().zip(g.0) {
                *vc += wi * gc;
            }
        }
    }
    if w == 0.0 {
        return Err(under_resolved(x, r));
    }
    Ok(v.map(|c| c / w))
}

/// `u(X)`: the average of `g` over the cap of chordal radius `2(1 - |X|)`
/// around `X / |X|`. Not renormalized.
pub fn average_extension(sm: &SampledMap, big_x: [f64; 3]) -> Result<[f64; 3]> {
    let len = norm(&big_x);
    if !len.is_finite() || len >= 1.0 {
        return Err(LabError::invalid(format!("extension point must satisfy |X| < 1, got {len}")));
    }
    if sm.dim() == 1 && big_x[2] != 0.0 {
        return Err(LabError::invalid("extension point for d = 1 must lie in the plane z = 0"));
    }
    if len == 0.0 {
        // The cap of radius 2 is the whole sphere; its center is immaterial.
        return cap_average(sm, &SpherePoint([1.0, 0.0, 0.0]), 2.0);
    }
    let x = SpherePoint::normalized(big_x);
    cap_average(sm, &x, 2.0 * (1.0 - len))
}

/// The radial march from `x`, with enough detail to check the crossing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhoMarch {
    pub rho: f64,
    pub step: f64,
    /// `|u|` at `t = step, 2 step, ...` up to the crossing (or to `t = 1`).
    pub norms: Vec<f64>,
    /// Largest `| |u(t)| - |u(t - step)| | / step` along the march, with
    /// `|u(0)| = 1`.
    pub modulus: f64,
}

impl RhoMarch {
    pub fn crossed(&self) -> bool {
        self.rho < 1.0
    }
}

fn check_step(step: f64) -> Result<()> {
    if RHO_STEP_RANGE.contains(&step) {
        Ok(())
    } else {
        Err(LabError::invalid(format!("rho step must lie in [1e-4, 1e-1], got {step}")))
    }
}

/// Marches `t = step, 2 step, ...` along `X = (1 - t) x` and stops at the
/// first `t` with `|u(X)| ≤ 1/2`; `ρ = 1` when no such `t ≤ 1` exists.
///
/// Caps grow with `t`, so each grid node is binned once by the first step
/// whose cap contains it and the cap sums are prefix sums over bins.
pub fn rho_march(sm: &SampledMap, x: &SpherePoint, step: f64) -> Result<RhoMarch> {
    check_step(step)?;
    let steps = (1.0 / step + 1e-9).floor() as usize;
    let radius = |m: usize| 2.0 * ((m as f64) * step);
    let grid = sm.grid();
    let mut bin_w = vec![0.0; steps + 1];
    let mut bin_v = vec![[0.0; 3]; steps + 1];
    for ((p, wi), g) in grid.points().iter().zip(grid.weights()).zip(sm.values()) {
        let dist = chordal_distance(p, x);
        let mut m = ((dist / (2.0 * step)).ceil() as usize).max(1);
        while m > 1 && dist <= radius(m - 1) {
            m -= 1;
        }
        while m <= steps && dist > radius(m) {
            m += 1;
        }
        if m <= steps {
            bin_w[m] += wi;
            for (vc, gc) in bin_v[m].iter_mut().zip(g.0) {
                *vc += wi * gc;
            }
        }
    }
    let (mut w, mut v) = (0.0, [0.0; 3]);
    let mut norms = Vec::new();
    let (mut prev, mut modulus) = (1.0, 0.0f64);
    for m in 1..=steps {
        w += bin_w[m];
        for c in 0..3 {
            v[c] += bin_v[m][c];
        }
        if w == 0.0 {
            return Err(under_resolved(x, radius(m)));
        }
        let u = norm(&v.map(|c| c / w));
        norms.push(u);
        modulus = modulus.max((u - prev).abs() / step);
        prev = u;
        if u <= ALPHA {
            return Ok(RhoMarch { rho: (m as f64) * step, step, norms, modulus });
        }
    }
    Ok(RhoMarch { rho: 1.0, step, norms, modulus })
}

pub fn rho(sm: &SampledMap, x: &SpherePoint, step: f64) -> Result<f64> {
    Ok(rho_march(sm, x, step)?.rho)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhoField {
    pub step: f64,
    /// `ρ` at each grid node, in grid order.
    pub rho: Vec<f64>,
}

/// `ρ` at every grid node.
pub fn rho_field(sm: &SampledMap, step: f64) -> Result<RhoField> {
    check_step(step)?;
    let rho = sm.grid().points().par_iter().map(|x| rho(sm, x, step)).collect::<Result<Vec<f64>>>()?;
    Ok(RhoField { step, rho })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhoBound {
    /// `|deg g|`.
    pub lhs: u64,
    /// `∫_{ρ<1} ρ^{-d}` by grid quadrature.
    pub rhs: f64,
    pub ratio: f64,
    /// `rhs = 0` while the degree is nonzero.
    pub violation: bool,
    pub field: RhoField,
}

/// Both sides of `|deg g| ≤ C ∫_{ρ<1} ρ^{-d}`.
pub fn rho_degree_bound(sm: &SampledMap, mesh: Option<&TriangleMesh>, step: f64) -> Result<RhoBound> {
    let lhs = degree_of(sm, mesh)?.degree.unsigned_abs();
    let field = rho_field(sm, step)?;
    let d = sm.dim() as i32;
    let terms: Vec<f64> = field
        .rho
        .iter()
        .zip(sm.grid().weights())
        .map(|(&r, w)| if r < 1.0 { w * r.powi(-d) } else { 0.0 })
        .collect();
    let rhs = pairwise_sum(&terms);
    let (ratio, violation) = match (lhs, rhs > 0.0) {
        (0, false) => (0.0, false),
        (_, false) => (f64::INFINITY, true),
        (l, true) => (l as f64 / rhs, false),
    };
    Ok(RhoBound { lhs, rhs, ratio, violation, field })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GridSpec;
    use crate::maps::{sample_map, SphereMap};

    fn sampled(spec: &str, grid: GridSpec) -> SampledMap {
        let disc = grid.build().unwrap();
        sample_map(&SphereMap::parse(spec, disc.dim()).unwrap(), &disc.grid).unwrap()
    }

    /// `|u|` for the identity on `S^2` over a cap of chordal radius `r`:
    /// the cap is `z ≥ 1 - r²/2` around the north pole, and the mean of
    /// `z` over it is `1 - r²/4`.
    fn identity_cap_norm_s2(r: f64) -> f64 {
        1.0 - r * r / 4.0
    }

    #[test]
    fn cap_oracle_by_quadrature() {
        // Mean of cos φ over the polar cap φ ≤ φ_r, by Simpson's rule.
        for r in [0.3, 1.0, 1.7] {
            let phi_r = 2.0 * (r / 2.0f64).asin();
            let m = 2000;
            let h = phi_r / m as f64;
            let (mut num, mut den) = (0.0, 0.0);
            for i in 0..=m {
                let phi = i as f64 * h;
                let c = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                num += c * phi.cos() * phi.sin();
                den += c * phi.sin();
            }
            assert!((num / den - identity_cap_norm_s2(r)).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_extension() {
        let sm = sampled("constant", GridSpec::Icosphere(2));
        let u = average_extension(&sm, [0.1, -0.3, 0.2]).unwrap();
        assert!((u[0] - 1.0).abs() < 1e-12 && u[1].abs() < 1e-12 && u[2].abs() < 1e-12);
        let f = rho_field(&sm, 1e-2).unwrap();
        assert!(f.rho.iter().all(|&r| r == 1.0));
    }

    #[test]
    fn center_average_of_identity_vanishes() {
        let sm = sampled("identity", GridSpec::Icosphere(4));
        let u = average_extension(&sm, [0.0; 3]).unwrap();
        assert!(norm(&u) < 1e-6);
        assert!(average_extension(&sm, [1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn near_boundary_extension_of_identity() {
        let sm = sampled("identity", GridSpec::Icosphere(6));
        // A cap of radius 0.002 is resolved only around a grid node.
        let x0 = sm.grid().points()[777];
        let u = average_extension(&sm, x0.0.map(|c| 0.999 * c)).unwrap();
        assert!(norm(&u) > 0.9);
        assert!(crate::geometry::vec3::dot(&u, &x0.0) / norm(&u) > 0.999);
    }

    #[test]
    fn under_resolved_cap_errors() {
        let sm = sampled("identity", GridSpec::Icosphere(1));
        let x = SpherePoint::new([0.3, 0.2, 0.9]).unwrap();
        assert!(matches!(cap_average(&sm, &x, 1e-3), Err(LabError::CapUnderResolved { .. })));
        assert!(matches!(rho(&sm, &x, 1e-3), Err(LabError::CapUnderResolved { .. })));
    }

    #[test]
    fn identity_rho_matches_closed_form() {
        // 1 - t² = 1/2 at t = 1/sqrt(2).
        let sm = sampled("identity", GridSpec::Icosphere(5));
        let step = 1e-3;
        for &i in &[0usize, 17, 4000, 10241] {
            let x = sm.grid().points()[i];
            let r = rho(&sm, &x, step).unwrap();
            assert!((r - std::f64::consts::FRAC_1_SQRT_2).abs() <= 2.0 * step, "{r}");
        }
    }

    #[test]
    fn identity_rho_on_circle() {
        // Arc of half-angle θ: |u| = sin θ / θ, which is 1/2 at θ* below;
        // the cap radius 2t is the chord 2 sin(θ*/2).
        let mut theta: f64 = 1.9;
        for _ in 0..50 {
            let f = theta.sin() / theta - 0.5;
            let df = (theta * theta.cos() - theta.sin()) / (theta * theta);
            theta -= f / df;
        }
        let t_star = (theta / 2.0).sin();
        let sm = sampled("identity", GridSpec::Circle(8192));
        let x = sm.grid().points()[123];
        let r = rho(&sm, &x, 1e-3).unwrap();
        assert!((r - t_star).abs() <= 2e-3, "{r} vs {t_star}");
    }

    #[test]
    fn march_agrees_with_direct_caps() {
        let sm = sampled("perturb:base=identity,amp=0.4,seed=2", GridSpec::Icosphere(3));
        let x = sm.grid().points()[5];
        let m = rho_march(&sm, &x, 0.02).unwrap();
        for (k, &u) in m.norms.iter().enumerate() {
            let direct = norm(&cap_average(&sm, &x, 2.0 * (((k + 1) as f64) * 0.02)).unwrap());
            assert!((u - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn bubble_stops_earlier_in_its_cap() {
        let sm = sampled("bubble:k=1,lambda=100", GridSpec::Icosphere(5));
        let pts = sm.grid().points();
        let south = (0..pts.len()).min_by(|&a, &b| pts[a].0[2].total_cmp(&pts[b].0[2])).unwrap();
        let north = (0..pts.len()).max_by(|&a, &b| pts[a].0[2].total_cmp(&pts[b].0[2])).unwrap();
        let r_in = rho(&sm, &pts[south], 1e-3).unwrap();
        let r_out = rho(&sm, &pts[north], 1e-3).unwrap();
        assert!(r_in < r_out, "{r_in} vs {r_out}");
    }

    #[test]
    fn degree_bound_cases() {
        let sm = sampled("constant", GridSpec::Icosphere(2));
        let disc = GridSpec::Icosphere(2).build().unwrap();
        let b = rho_degree_bound(&sm, disc.mesh.as_deref(), 1e-2).unwrap();
        assert_eq!((b.lhs, b.rhs, b.ratio, b.violation), (0, 0.0, 0.0, false));
        let sm = sampled("identity", GridSpec::Circle(2048));
        let b = rho_degree_bound(&sm, None, 1e-2).unwrap();
        assert_eq!(b.lhs, 1);
        assert!(b.rhs > 0.0 && b.ratio.is_finite() && !b.violation);
    }

    #[test]
    fn step_domain() {
        let sm = sampled("identity", GridSpec::Circle(64));
        let x = sm.grid().points()[0];
        assert!(rho(&sm, &x, 0.5).is_err());
        assert!(rho(&sm, &x, 1e-5).is_err());
    }
}
