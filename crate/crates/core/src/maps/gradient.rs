use super::SphereMap;
use crate::geometry::vec3::dot;
use crate::geometry::{tangent_frame, SpherePoint};
use crate::{LabError, Result};

pub const GRADIENT_STEP_RANGE: (f64, f64) = (1e-7, 1e-2);

/// Frobenius norm of the differential of `map` at `point`.
///
/// Central differences along an orthonormal tangent frame with geodesic steps
/// of length `h`; the ambient difference quotients are projected onto the
/// tangent plane at the image point.
pub fn gradient_norm(map: &SphereMap, point: &SpherePoint, h: f64) -> Result<f64> {
    if !(GRADIENT_STEP_RANGE.0..=GRADIENT_STEP_RANGE.1).contains(&h) {
        return Err(LabError::invalid(format!("finite-difference step {h} outside [1e-7, 1e-2]")));
    }
    let x = point.0;
    let gx = map.eval(point).0;
    let (c, s) = (h.cos(), h.sin());
    let mut frob_sq = 0.0;
    for e in tangent_frame(point, map.dim()) {
        let step = |sign: f64| {
            SpherePoint::normalized([
                c * x[0] + sign * s * e[0],
                c * x[1] + sign * s * e[1],
                c * x[2] + sign * s * e[2],
            ])
        };
        let gp = map.eval(&step(1.0)).0;
        let gm = map.eval(&step(-1.0)).0;
        let d = [(gp[0] - gm[0]) / (2.0 * h), (gp[1] - gm[1]) / (2.0 * h), (gp[2] - gm[2]) / (2.0 * h)];
        let radial = dot(&d, &gx);
        let t = [d[0] - radial * gx[0], d[1] - radial * gx[1], d[2] - radial * gx[2]];
        frob_sq += dot(&t, &t);
    }
    Ok(frob_sq.sqrt())
}

/// Default step for [`gradient_norm`].
pub const DEFAULT_GRADIENT_STEP: f64 = 1e-5;

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn identity_on_s2() {
        let id = SphereMap::identity(2).unwrap();
        let p = SpherePoint::new([0.2, -0.4, 0.7]).unwrap();
        assert!((gradient_norm(&id, &p, 1e-4).unwrap() - SQRT_2).abs() < 1e-5);
    }

    #[test]
    fn power_map_on_s1() {
        for k in [-3, 2, 5] {
            let m = SphereMap::power(k).unwrap();
            let g = gradient_norm(&m, &SpherePoint::from_angle(0.7), 1e-5).unwrap();
            assert!((g - f64::from(k.abs())).abs() < 1e-5, "k={k}: {g}");
        }
    }

    #[test]
    fn constant_map() {
        let m = SphereMap::constant(2).unwrap();
        let g = gradient_norm(&m, &SpherePoint::new([1.0, 2.0, 3.0]).unwrap(), 1e-5).unwrap();
        assert!(g < 1e-8);
    }

    #[test]
    fn bubble_gradient_grows_with_lambda() {
        let south = SpherePoint([0.0, 0.0, -1.0]);
        let g: Vec<f64> = [1.0, 10.0, 100.0]
            .iter()
            .map(|&l| gradient_norm(&SphereMap::bubble(2, 1, l).unwrap(), &south, 1e-5).unwrap())
            .collect();
        assert!(g[0] < g[1] && g[1] < g[2], "{g:?}");
        assert!((g[2] - 100.0 * SQRT_2).abs() < 1e-2 * g[2]);
    }

    #[test]
    fn step_range_is_checked() {
        let id = SphereMap::identity(1).unwrap();
        assert!(gradient_norm(&id, &SpherePoint::from_angle(0.0), 0.5).is_err());
    }
}
