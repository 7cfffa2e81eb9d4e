use std::f64::consts::PI;

use super::{chordal_distance_sq, SpherePoint};
use crate::{LabError, Result};

/// Largest accepted point count for the explicit grids.
pub const MAX_POINTS: usize = 1 << 24;

/// Surface measure `|S^d|`.
pub fn sphere_measure(dim: usize) -> f64 {
    match dim {
        1 => 2.0 * PI,
        2 => 4.0 * PI,
        _ => panic!("only d = 1, 2 are supported"),
    }
}

/// Quadrature nodes and positive weights on `S^d` (the measures `dx`, `dy`).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    dim: usize,
    points: Vec<SpherePoint>,
    weights: Vec<f64>,
    /// Maximum chordal distance between neighbouring nodes (nominal for grids
    /// without adjacency).
    spacing: f64,
    /// Neighbour pairs used for Lipschitz estimates; empty when unknown.
    edges: Vec<[u32; 2]>,
}

impl QuadratureGrid {
    /// Validating constructor.
    pub fn from_parts(
        dim: usize,
        points: Vec<SpherePoint>,
        weights: Vec<f64>,
        edges: Vec<[u32; 2]>,
    ) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(LabError::invalid(format!("dimension {dim} not in {{1, 2}}")));
        }
        if points.len() != weights.len() {
            return Err(LabError::invalid("points and weights differ in length"));
        }
        if points.len() < 3 {
            return Err(LabError::invalid("a grid needs at least 3 points"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(LabError::invalid("weights must be positive"));
        }
        if dim == 1 && points.iter().any(|p| p.0[2] != 0.0) {
            return Err(LabError::invalid("S^1 points must have zero third coordinate"));
        }
        let n = points.len() as u32;
        if edges.iter().any(|e| e[0] >= n || e[1] >= n) {
            return Err(LabError::invalid("edge index out of range"));
        }
        // Points already unit up to rounding are kept bit-for-bit.
        let points: Vec<SpherePoint> = points
            .iter()
            .map(|p| {
                if (super::vec3::norm(&p.0) - 1.0).abs() > 1e-14 {
                    SpherePoint::normalized(p.0)
                } else {
                    *p
                }
            })
            .collect();
        let spacing = if edges.is_empty() {
            (sphere_measure(dim) / points.len() as f64).powf(1.0 / dim as f64)
        } else {
            edges
                .iter()
                .map(|e| chordal_distance_sq(&points[e[0] as usize].0, &points[e[1] as usize].0))
                .fold(0.0_f64, f64::max)
                .sqrt()
        };
        Ok(QuadratureGrid { dim, points, weights, spacing, edges })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[SpherePoint] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn edges(&self) -> &[[u32; 2]] {
        &self.edges
    }

    /// Quadrature of `f` over the grid.
    pub fn integrate(&self, f: impl Fn(&SpherePoint) -> f64) -> f64 {
        let terms: Vec<f64> = self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p)).collect();
        crate::reduce::pairwise_sum(&terms)
    }

    pub fn total_weight(&self) -> f64 {
        crate::reduce::pairwise_sum(&self.weights)
    }
}

/// `n` equispaced points at angles `2πi/n` with weights `2π/n`.
pub fn uniform_circle_grid(n: usize) -> Result<QuadratureGrid> {
    if n < 3 {
        return Err(LabError::invalid(format!("circle grid needs n >= 3, got {n}")));
    }
    if n > MAX_POINTS {
        return Err(LabError::ResourceLimit(format!("circle grid with {n} points")));
    }
    let points = (0..n)
        .map(|i| SpherePoint::from_angle(2.0 * PI * i as f64 / n as f64))
        .collect();
    let weights = vec![2.0 * PI / n as f64; n];
    let edges = (0..n as u32).map(|i| [i, (i + 1) % n as u32]).collect();
    QuadratureGrid::from_parts(1, points, weights, edges)
}

/// Fibonacci spiral with `n` equal-weight points.
pub fn fibonacci_sphere_grid(n: usize) -> Result<QuadratureGrid> {
    if n < 12 {
        return Err(LabError::invalid(format!("Fibonacci grid needs n >= 12, got {n}")));
    }
    if n > MAX_POINTS {
        return Err(LabError::ResourceLimit(format!("Fibonacci grid with {n} points")));
    }
    let golden_angle = PI * (3.0 - 5.0_f64.sqrt());
    let points = (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden_angle * i as f64;
            SpherePoint::normalized([r * phi.cos(), r * phi.sin(), z])
        })
        .collect();
    let weights = vec![4.0 * PI / n as f64; n];
    QuadratureGrid::from_parts(2, points, weights, Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_n4() {
        let g = uniform_circle_grid(4).unwrap();
        let angles: Vec<f64> = g.points().iter().map(|p| p.angle().rem_euclid(2.0 * PI)).collect();
        for (a, e) in angles.iter().zip([0.0, PI / 2.0, PI, 3.0 * PI / 2.0]) {
            assert!((a - e).abs() < 1e-15);
        }
        assert!(g.weights().iter().all(|&w| w == PI / 2.0));
    }

    #[test]
    fn circle_n3_weight_sum() {
        let g = uniform_circle_grid(3).unwrap();
        assert!((g.total_weight() - 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn circle_rejects_small_n() {
        assert!(matches!(uniform_circle_grid(2), Err(LabError::InvalidArgument(_))));
    }

    #[test]
    fn circle_max_gap() {
        let n = 4096;
        let g = uniform_circle_grid(n).unwrap();
        let mut angles: Vec<f64> = g.points().iter().map(|p| p.angle().rem_euclid(2.0 * PI)).collect();
        angles.sort_by(f64::total_cmp);
        let mut gap = angles.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        gap = gap.max(2.0 * PI - angles[n - 1] + angles[0]);
        assert!((gap - 2.0 * PI / n as f64).abs() < 1e-12);
    }

    #[test]
    fn fibonacci_weights() {
        let g = fibonacci_sphere_grid(100).unwrap();
        assert!(g.weights().iter().all(|&w| w == 4.0 * PI / 100.0));
        let g = fibonacci_sphere_grid(1000).unwrap();
        assert!((g.total_weight() - 4.0 * PI).abs() < 1e-12);
        assert!(fibonacci_sphere_grid(11).is_err());
    }

    #[test]
    fn fibonacci_points_distinct() {
        let g = fibonacci_sphere_grid(1000).unwrap();
        let p = g.points();
        let mut min = f64::INFINITY;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                min = min.min(chordal_distance_sq(&p[i].0, &p[j].0));
            }
        }
        assert!(min > 0.0);
    }
}
