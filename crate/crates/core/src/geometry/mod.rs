//! Discretizations of `S^1` and `S^2`.
//!
//! Distances are always chordal: `|x - y|` is the Euclidean norm in the
//! ambient space, never the geodesic distance.

mod grid;
mod io;
mod mesh;
mod spec;
pub mod vec3;

pub use grid::{fibonacci_sphere_grid, sphere_measure, uniform_circle_grid, QuadratureGrid, MAX_POINTS};
pub use io::{parse_grid_text, write_grid_text};
pub use mesh::{icosphere_mesh, TriangleMesh, MAX_ICOSPHERE_LEVEL};
pub use spec::{Discretization, GridSpec};

use crate::{LabError, Result};
use vec3::{dot, norm};

/// Unit vector of `R^{d+1}`. Points of `S^1` have a zero third coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint(pub [f64; 3]);

impl SpherePoint {
    /// Normalizes `coords` onto the sphere.
    pub fn new(coords: [f64; 3]) -> Result<Self> {
        let n = norm(&coords);
        if !n.is_finite() || n < 1e-300 {
            return Err(LabError::invalid(format!(
                "cannot normalize {coords:?} onto the sphere"
            )));
        }
        Ok(SpherePoint([coords[0] / n, coords[1] / n, coords[2] / n]))
    }

    /// Point of `S^1` at angle `theta`.
    pub fn from_angle(theta: f64) -> Self {
        SpherePoint([theta.cos(), theta.sin(), 0.0])
    }

    /// Normalizes without validation. Callers guarantee a nonzero finite input.
    pub(crate) fn normalized(c: [f64; 3]) -> Self {
        let n = norm(&c);
        SpherePoint([c[0] / n, c[1] / n, c[2] / n])
    }

    pub fn coords(&self) -> &[f64; 3] {
        &self.0
    }

    /// Polar angle in `(-π, π]` of the first two coordinates.
    pub fn angle(&self) -> f64 {
        self.0[1].atan2(self.0[0])
    }

    pub fn dot(&self, other: &SpherePoint) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn antipode(&self) -> SpherePoint {
        SpherePoint([-self.0[0], -self.0[1], -self.0[2]])
    }
}

/// Euclidean distance in the ambient space, clamped to `[0, 2]`.
pub fn chordal_distance(p: &SpherePoint, q: &SpherePoint) -> f64 {
    chordal_distance_sq(&p.0, &q.0).sqrt()
}

/// Squared chordal distance, clamped to `[0, 4]`.
#[inline(always)]
pub fn chordal_distance_sq(p: &[f64; 3], q: &[f64; 3]) -> f64 {
    let dx = p[0] - q[0];
    let dy = p[1] - q[1];
    let dz = p[2] - q[2];
    (dx * dx + dy * dy + dz * dz).min(4.0)
}

/// Signed solid angle of the geodesic triangle `abc` from the half-tangent
/// formula `tan(Ω/2) = det[a b c] / (1 + a·b + b·c + c·a)`.
///
/// Positive for counter-clockwise orientation seen from outside. The value lies
/// in `(-2π, 2π]`.
pub fn signed_solid_angle(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    let (num, den) = solid_angle_parts(a, b, c);
    2.0 * num.atan2(den)
}

/// Numerator and denominator of the half-tangent formula.
#[inline]
pub fn solid_angle_parts(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> (f64, f64) {
    let num = vec3::det(a, b, c);
    let den = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
    (num, den)
}

/// Orthonormal tangent frame at `p`. For `dim = 1` one vector (counter-clockwise);
/// for `dim = 2` two vectors `e1, e2` with `e1 × e2 = p`.
pub fn tangent_frame(p: &SpherePoint, dim: usize) -> Vec<[f64; 3]> {
    let x = &p.0;
    if dim == 1 {
        return vec![[-x[1], x[0], 0.0]];
    }
    // Helper axis least aligned with p.
    let ax = x.iter().map(|c| c.abs()).collect::<Vec<_>>();
    let helper = if ax[0] <= ax[1] && ax[0] <= ax[2] {
        [1.0, 0.0, 0.0]
    } else if ax[1] <= ax[2] {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let h = dot(&helper, x);
    let e1 = vec3::normalize(&[helper[0] - h * x[0], helper[1] - h * x[1], helper[2] - h * x[2]]);
    let e2 = vec3::cross(x, &e1);
    vec![e1, e2]
}
