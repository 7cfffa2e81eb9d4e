//! Parametric maps `S^d -> S^d` with known degrees.
//!
//! Every family is addressed by a spec string (see [`SphereMap::parse`]):
//!
//! | spec | d | map | degree |
//! |------|---|-----|--------|
//! | `identity` | 1, 2 | `x ↦ x` | 1 |
//! | `constant` | 1, 2 | `x ↦ e1` | 0 |
//! | `antipodal` | 1, 2 | `x ↦ -x` | `(-1)^(d+1)` |
//! | `power:k=K` | 1 | `θ ↦ Kθ` | K |
//! | `rational:num=a0,a1,..;den=b0,..` | 2 | `z ↦ P(z)/Q(z)` | `max(deg P, deg Q)` |
//! | `bubble:k=K,lambda=L` | 1, 2 | degree-K map after a Möbius dilation by L | K |
//! | `blaschke:zeros=r@t;..` | 1 | `∏ (z - a)/(1 - ā z)`, `a = r e^{it}` | number of zeros |
//! | `poly:c=C,zeros=a;..` | 2 | `z ↦ C ∏ (z - a)` | number of zeros |
//! | `perturb:base=SPEC,amp=A,seed=S` | 1, 2 | `(g + A V)/|g + A V|` | degree of base |
//! | `rotate:base=SPEC,alpha=..,beta=..,gamma=..` | 1, 2 | `R ∘ g` | degree of base |
//! | `prerotate:base=SPEC,alpha=..,beta=..,gamma=..` | 1, 2 | `g ∘ R` | degree of base |
//! | `reflect:base=SPEC` | 1, 2 | `g` followed by `x2 ↦ -x2` | minus degree of base |
//!
//! Complex numbers are written `3`, `-0.5i`, `1+2i`. Rotations are ZYZ Euler
//! angles; on `S^1` only `alpha` may be nonzero. On `S^2`, `z` is the
//! stereographic coordinate from the north pole, so bubbles concentrate at the
//! south pole `z = 0`. On `S^1` the dilation is `tan(φ/2) = L tan(θ/2)` and
//! concentrates at `θ = 0`.

mod gradient;
mod harmonics;
mod spec;
pub mod stereo;

pub use gradient::{gradient_norm, DEFAULT_GRADIENT_STEP, GRADIENT_STEP_RANGE};
pub use harmonics::{real_harmonics, PerturbField};

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::geometry::vec3::{mat_vec, norm};
use crate::geometry::{QuadratureGrid, SpherePoint};
use crate::{LabError, Result};

pub const MAX_POWER: i32 = 64;
pub const MAX_BUBBLE_DEGREE: i32 = 16;
pub const MAX_PERTURB_AMPLITUDE: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub enum MapFamily {
    Identity,
    Constant,
    Antipodal,
    Power { k: i32 },
    Rational { num: Vec<Complex64>, den: Vec<Complex64> },
    Bubble { k: i32, lambda: f64 },
    Blaschke { zeros: Vec<(f64, f64)> },
    Poly { c: Complex64, zeros: Vec<Complex64> },
    Perturb { base: Box<SphereMap>, amp: f64, seed: u64, field: PerturbField },
    Rotate { base: Box<SphereMap>, angles: [f64; 3], matrix: [[f64; 3]; 3] },
    PreRotate { base: Box<SphereMap>, angles: [f64; 3], matrix: [[f64; 3]; 3] },
    Reflect { base: Box<SphereMap> },
}

/// An analytic map `S^d -> S^d`. Evaluation is pure and thread-safe.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereMap {
    dim: usize,
    family: MapFamily,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(LabError::invalid(format!("dimension {dim} not in {{1, 2}}")))
    }
}

fn degree_of_poly(c: &[Complex64]) -> Option<usize> {
    c.iter().rposition(|a| a.norm_sqr() > 0.0)
}

/// ZYZ rotation matrix `Rz(alpha) Ry(beta) Rz(gamma)`.
pub fn rotation_matrix(alpha: f64, beta: f64, gamma: f64) -> [[f64; 3]; 3] {
    let rz = |t: f64| [[t.cos(), -t.sin(), 0.0], [t.sin(), t.cos(), 0.0], [0.0, 0.0, 1.0]];
    let ry = |t: f64| [[t.cos(), 0.0, t.sin()], [0.0, 1.0, 0.0], [-t.sin(), 0.0, t.cos()]];
    let mul = |a: [[f64; 3]; 3], b: [[f64; 3]; 3]| {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        m
    };
    mul(mul(rz(alpha), ry(beta)), rz(gamma))
}

impl SphereMap {
    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(SphereMap { dim, family: MapFamily::Identity })
    }

    pub fn constant(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(SphereMap { dim, family: MapFamily::Constant })
    }

    pub fn antipodal(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(SphereMap { dim, family: MapFamily::Antipodal })
    }

    /// `θ ↦ kθ` on `S^1`; `k = 0` is the constant map at angle 0.
    pub fn power(k: i32) -> Result<Self> {
        if k.abs() > MAX_POWER {
            return Err(LabError::invalid(format!("|k| = {} exceeds {MAX_POWER}", k.abs())));
        }
        Ok(SphereMap { dim: 1, family: MapFamily::Power { k } })
    }

    /// `z ↦ P(z)/Q(z)` on `S^2` with ascending coefficient lists.
    pub fn rational(num: Vec<Complex64>, den: Vec<Complex64>) -> Result<Self> {
        if num.is_empty() || den.is_empty() {
            return Err(LabError::invalid("empty coefficient list"));
        }
        if num.iter().chain(&den).any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(LabError::invalid("non-finite coefficient"));
        }
        let dq = degree_of_poly(&den).ok_or_else(|| LabError::invalid("zero denominator polynomial"))?;
        if dq + 1 != den.len() {
            return Err(LabError::invalid("leading denominator coefficient is zero"));
        }
        match degree_of_poly(&num) {
            Some(dp) if dp + 1 != num.len() => {
                return Err(LabError::invalid("leading numerator coefficient is zero"))
            }
            None if num.len() != 1 => return Err(LabError::invalid("zero numerator must be written `0`")),
            _ => {}
        }
        let map = SphereMap { dim: 2, family: MapFamily::Rational { num, den } };
        map.check_no_common_root()?;
        Ok(map)
    }

    fn check_no_common_root(&self) -> Result<()> {
        let MapFamily::Rational { num, den } = &self.family else { return Ok(()) };
        let deg = num.len().max(den.len()) - 1;
        let scale: f64 = num.iter().chain(den).map(|c| c.norm()).sum();
        let (_, grid) = crate::geometry::icosphere_mesh(2)?;
        for p in grid.points() {
            let (z0, z1) = stereo::to_homogeneous(&p.0);
            let a = stereo::homogeneous_poly(num, deg, z0, z1);
            let b = stereo::homogeneous_poly(den, deg, z0, z1);
            if a.norm() + b.norm() < 1e-12 * scale {
                return Err(LabError::invalid("numerator and denominator share a root"));
            }
        }
        Ok(())
    }

    /// Degree-`k` map composed with a Möbius dilation of factor `lambda`.
    pub fn bubble(dim: usize, k: i32, lambda: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(1.0..=1e4).contains(&lambda) {
            return Err(LabError::invalid(format!("lambda = {lambda} outside [1, 1e4]")));
        }
        if k.abs() > MAX_BUBBLE_DEGREE {
            return Err(LabError::invalid(format!("|k| = {} exceeds {MAX_BUBBLE_DEGREE}", k.abs())));
        }
        Ok(SphereMap { dim, family: MapFamily::Bubble { k, lambda } })
    }

    /// Finite Blaschke product on `S^1` with zeros `r e^{it}`, `0 <= r < 1`.
    pub fn blaschke(zeros: Vec<(f64, f64)>) -> Result<Self> {
        if zeros.is_empty() {
            return Err(LabError::invalid("Blaschke product needs at least one zero"));
        }
        if zeros.iter().any(|&(r, t)| !(0.0..1.0).contains(&r) || !t.is_finite()) {
            return Err(LabError::invalid("Blaschke zeros need 0 <= r < 1"));
        }
        Ok(SphereMap { dim: 1, family: MapFamily::Blaschke { zeros } })
    }

    /// `z ↦ c ∏ (z - a_i)` on `S^2`.
    pub fn poly(c: Complex64, zeros: Vec<Complex64>) -> Result<Self> {
        if c.norm_sqr() == 0.0 || !c.re.is_finite() || !c.im.is_finite() {
            return Err(LabError::invalid("poly scale must be finite and nonzero"));
        }
        if zeros.is_empty() {
            return Err(LabError::invalid("poly needs at least one zero"));
        }
        if zeros.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(LabError::invalid("non-finite zero"));
        }
        Ok(SphereMap { dim: 2, family: MapFamily::Poly { c, zeros } })
    }

    /// `(g + amp·V)/|g + amp·V|` with a seeded smooth field `|V| <= 1`.
    pub fn perturb(base: SphereMap, amp: f64, seed: u64) -> Result<Self> {
        if !(0.0..MAX_PERTURB_AMPLITUDE).contains(&amp) {
            return Err(LabError::invalid(format!(
                "perturbation amplitude {amp} outside [0, {MAX_PERTURB_AMPLITUDE})"
            )));
        }
        let dim = base.dim;
        let field = PerturbField::new(dim, seed);
        Ok(SphereMap { dim, family: MapFamily::Perturb { base: Box::new(base), amp, seed, field } })
    }

    fn rotation_parts(dim: usize, angles: [f64; 3]) -> Result<[[f64; 3]; 3]> {
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(LabError::invalid("non-finite rotation angle"));
        }
        if dim == 1 && (angles[1] != 0.0 || angles[2] != 0.0) {
            return Err(LabError::invalid("rotations of S^1 take only alpha"));
        }
        Ok(rotation_matrix(angles[0], angles[1], angles[2]))
    }

    /// Codomain rotation `R ∘ g`.
    pub fn rotate(base: SphereMap, angles: [f64; 3]) -> Result<Self> {
        let matrix = Self::rotation_parts(base.dim, angles)?;
        Ok(SphereMap { dim: base.dim, family: MapFamily::Rotate { base: Box::new(base), angles, matrix } })
    }

    /// Domain rotation `g ∘ R`.
    pub fn prerotate(base: SphereMap, angles: [f64; 3]) -> Result<Self> {
        let matrix = Self::rotation_parts(base.dim, angles)?;
        Ok(SphereMap { dim: base.dim, family: MapFamily::PreRotate { base: Box::new(base), angles, matrix } })
    }

    /// `g` followed by the reflection `x2 ↦ -x2`.
    pub fn reflect(base: SphereMap) -> Self {
        SphereMap { dim: base.dim, family: MapFamily::Reflect { base: Box::new(base) } }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> &MapFamily {
        &self.family
    }

    /// Canonical spec string; parses back to an equal map.
    pub fn spec(&self) -> String {
        self.to_string()
    }

    /// Degree known from the construction, when the family determines it.
    pub fn nominal_degree(&self) -> Option<i64> {
        Some(match &self.family {
            MapFamily::Identity => 1,
            MapFamily::Constant => 0,
            MapFamily::Antipodal => {
                if self.dim == 1 {
                    1
                } else {
                    -1
                }
            }
            MapFamily::Power { k } => i64::from(*k),
            MapFamily::Rational { num, den } => {
                degree_of_poly(num).unwrap_or(0).max(degree_of_poly(den).unwrap_or(0)) as i64
            }
            MapFamily::Bubble { k, .. } => i64::from(*k),
            MapFamily::Blaschke { zeros } => zeros.len() as i64,
            MapFamily::Poly { zeros, .. } => zeros.len() as i64,
            MapFamily::Perturb { base, .. }
            | MapFamily::Rotate { base, .. }
            | MapFamily::PreRotate { base, .. } => return base.nominal_degree(),
            MapFamily::Reflect { base } => return base.nominal_degree().map(|d| -d),
        })
    }

    /// Evaluates the map at a unit vector; the result is unit-norm.
    pub fn eval(&self, p: &SpherePoint) -> SpherePoint {
        SpherePoint::normalized(self.eval_raw(&p.0))
    }

    fn eval_raw(&self, x: &[f64; 3]) -> [f64; 3] {
        match &self.family {
            MapFamily::Identity => *x,
            MapFamily::Constant => [1.0, 0.0, 0.0],
            MapFamily::Antipodal => [-x[0], -x[1], -x[2]],
            MapFamily::Power { k } => {
                let t = x[1].atan2(x[0]) * f64::from(*k);
                [t.cos(), t.sin(), 0.0]
            }
            MapFamily::Rational { num, den } => {
                let deg = num.len().max(den.len()) - 1;
                let (z0, z1) = stereo::to_homogeneous(x);
                stereo::from_homogeneous(
                    stereo::homogeneous_poly(num, deg, z0, z1),
                    stereo::homogeneous_poly(den, deg, z0, z1),
                )
            }
            MapFamily::Bubble { k, lambda } => {
                if self.dim == 1 {
                    let half = 0.5 * x[1].atan2(x[0]);
                    let w = Complex64::new(half.cos(), lambda * half.sin()).powu(2);
                    let t = w.arg() * f64::from(*k);
                    [t.cos(), t.sin(), 0.0]
                } else {
                    let (mut z0, mut z1) = stereo::to_homogeneous(x);
                    if *k < 0 {
                        z0 = z0.conj();
                        z1 = z1.conj();
                    }
                    let n = k.unsigned_abs();
                    stereo::from_homogeneous((z0 * lambda).powu(n), z1.powu(n))
                }
            }
            MapFamily::Blaschke { zeros } => {
                let z = Complex64::new(x[0], x[1]);
                let w = zeros.iter().fold(Complex64::new(1.0, 0.0), |acc, &(r, t)| {
                    let a = Complex64::from_polar(r, t);
                    acc * (z - a) / (Complex64::new(1.0, 0.0) - a.conj() * z)
                });
                let w = w / w.norm();
                [w.re, w.im, 0.0]
            }
            MapFamily::Poly { c, zeros } => {
                let (z0, z1) = stereo::to_homogeneous(x);
                let a = zeros.iter().fold(*c, |acc, a| acc * (z0 - a * z1));
                stereo::from_homogeneous(a, z1.powu(zeros.len() as u32))
            }
            MapFamily::Perturb { base, amp, field, .. } => {
                let g = base.eval(&SpherePoint(*x)).0;
                let v = field.eval(x);
                [g[0] + amp * v[0], g[1] + amp * v[1], g[2] + amp * v[2]]
            }
            MapFamily::Rotate { base, matrix, .. } => mat_vec(matrix, &base.eval(&SpherePoint(*x)).0),
            MapFamily::PreRotate { base, matrix, .. } => {
                base.eval(&SpherePoint::normalized(mat_vec(matrix, x))).0
            }
            MapFamily::Reflect { base } => {
                let g = base.eval(&SpherePoint(*x)).0;
                [g[0], -g[1], g[2]]
            }
        }
    }
}

impl fmt::Display for SphereMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        spec::format_map(self, f)
    }
}

/// A map evaluated on the nodes of a grid.
#[derive(Debug, Clone)]
pub struct SampledMap {
    grid: Arc<QuadratureGrid>,
    values: Vec<SpherePoint>,
}

impl SampledMap {
    pub fn from_values(grid: Arc<QuadratureGrid>, values: Vec<SpherePoint>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LabError::invalid("sample count differs from grid size"));
        }
        if values.iter().any(|v| (norm(&v.0) - 1.0).abs() > 1e-10) {
            return Err(LabError::invalid("sampled values must be unit vectors"));
        }
        if grid.dim() == 1 && values.iter().any(|v| v.0[2] != 0.0) {
            return Err(LabError::invalid("S^1 values must have zero third coordinate"));
        }
        Ok(SampledMap { grid, values })
    }

    pub fn grid(&self) -> &Arc<QuadratureGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[SpherePoint] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// Largest ratio `|g_a - g_b| / |x_a - x_b|` over the grid edges; `None`
    /// when the grid has no adjacency.
    pub fn lipschitz_estimate(&self) -> Option<f64> {
        let pts = self.grid.points();
        let edges = self.grid.edges();
        if edges.is_empty() {
            return None;
        }
        Some(edges.iter().fold(0.0_f64, |m, e| {
            let (a, b) = (e[0] as usize, e[1] as usize);
            let dx = crate::chordal_distance(&pts[a], &pts[b]);
            let dg = crate::chordal_distance(&self.values[a], &self.values[b]);
            if dx > 0.0 {
                m.max(dg / dx)
            } else {
                m
            }
        }))
    }
}

/// Evaluates `map` at every grid node (in parallel, order preserved).
pub fn sample_map(map: &SphereMap, grid: &Arc<QuadratureGrid>) -> Result<SampledMap> {
    if map.dim() != grid.dim() {
        return Err(LabError::invalid(format!(
            "map dimension {} does not match grid dimension {}",
            map.dim(),
            grid.dim()
        )));
    }
    let values = grid.points().par_iter().map(|p| map.eval(p)).collect();
    Ok(SampledMap { grid: Arc::clone(grid), values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{icosphere_mesh, uniform_circle_grid};
    use std::f64::consts::PI;

    fn angle_close(a: f64, b: f64) -> bool {
        let d = (a - b).rem_euclid(2.0 * PI);
        d.min(2.0 * PI - d) < 1e-12
    }

    #[test]
    fn power_map_examples() {
        let id = SphereMap::power(1).unwrap();
        assert!(angle_close(id.eval(&SpherePoint::from_angle(PI / 3.0)).angle(), PI / 3.0));
        let p3 = SphereMap::power(3).unwrap();
        assert!(angle_close(p3.eval(&SpherePoint::from_angle(PI / 2.0)).angle(), 3.0 * PI / 2.0));
        let p0 = SphereMap::power(0).unwrap();
        assert!(angle_close(p0.eval(&SpherePoint::from_angle(1.234)).angle(), 0.0));
        assert!(SphereMap::power(65).is_err());
    }

    #[test]
    fn rational_identity_and_square() {
        let c = |re| Complex64::new(re, 0.0);
        let id = SphereMap::rational(vec![c(0.0), c(1.0)], vec![c(1.0)]).unwrap();
        let (_, grid) = icosphere_mesh(2).unwrap();
        for p in grid.points() {
            let q = id.eval(p);
            assert!(crate::chordal_distance(p, &q) < 1e-14);
        }
        let sq = SphereMap::rational(vec![c(0.0), c(0.0), c(1.0)], vec![c(1.0)]).unwrap();
        let one = SpherePoint([1.0, 0.0, 0.0]);
        assert!(crate::chordal_distance(&sq.eval(&one), &one) < 1e-15);
        assert_eq!(sq.nominal_degree(), Some(2));
        assert!(SphereMap::rational(vec![c(1.0)], vec![c(0.0)]).is_err());
        // (z - 1)/(z - 1) has a common root
        assert!(SphereMap::rational(vec![c(-1.0), c(1.0)], vec![c(-1.0), c(1.0)]).is_err());
    }

    #[test]
    fn poles_map_to_north() {
        let c = |re| Complex64::new(re, 0.0);
        let inv = SphereMap::rational(vec![c(1.0)], vec![c(0.0), c(1.0)]).unwrap();
        let south = SpherePoint([0.0, 0.0, -1.0]);
        assert!(crate::chordal_distance(&inv.eval(&south), &SpherePoint([0.0, 0.0, 1.0])) < 1e-15);
    }

    #[test]
    fn bubble_unit_lambda_is_identity() {
        let b = SphereMap::bubble(2, 1, 1.0).unwrap();
        let (_, grid) = icosphere_mesh(2).unwrap();
        for p in grid.points() {
            assert!(crate::chordal_distance(p, &b.eval(p)) < 1e-14);
        }
        let b1 = SphereMap::bubble(1, 1, 1.0).unwrap();
        for i in 0..50 {
            let p = SpherePoint::from_angle(0.1 + i as f64 * 0.12);
            assert!(crate::chordal_distance(&p, &b1.eval(&p)) < 1e-14);
        }
    }

    #[test]
    fn bubble_dilates_stereographic_coordinate() {
        let b = SphereMap::bubble(2, 1, 100.0).unwrap();
        let (_, grid) = icosphere_mesh(3).unwrap();
        for p in grid.points() {
            match stereo::project(&p.0) {
                Some(z) if z.norm() >= 1.0 => {
                    let w = stereo::project(&b.eval(p).0);
                    assert!(w.is_none_or(|w| w.norm() >= 100.0 * (1.0 - 1e-9)));
                }
                _ => {}
            }
        }
        assert!(SphereMap::bubble(2, 1, 0.5).is_err());
        assert!(SphereMap::bubble(2, 17, 2.0).is_err());
    }

    #[test]
    fn perturb_zero_amplitude_and_determinism() {
        let grid = Arc::new(uniform_circle_grid(256).unwrap());
        let base = SphereMap::power(2).unwrap();
        let zero = SphereMap::perturb(base.clone(), 0.0, 3).unwrap();
        let a = sample_map(&base, &grid).unwrap();
        let b = sample_map(&zero, &grid).unwrap();
        assert_eq!(a.values(), b.values());
        let p1 = sample_map(&SphereMap::perturb(base.clone(), 0.3, 9).unwrap(), &grid).unwrap();
        let p2 = sample_map(&SphereMap::perturb(base.clone(), 0.3, 9).unwrap(), &grid).unwrap();
        assert_eq!(p1.values(), p2.values());
        assert!(SphereMap::perturb(base, 0.9, 1).is_err());
    }

    #[test]
    fn sample_map_examples() {
        let grid = Arc::new(uniform_circle_grid(4).unwrap());
        let sm = sample_map(&SphereMap::power(2).unwrap(), &grid).unwrap();
        for (v, e) in sm.values().iter().zip([0.0, PI, 0.0, PI]) {
            assert!(angle_close(v.angle(), e));
        }
        let ids = sample_map(&SphereMap::identity(1).unwrap(), &grid).unwrap();
        assert_eq!(ids.values(), grid.points());
        let cs = sample_map(&SphereMap::constant(1).unwrap(), &grid).unwrap();
        assert!(cs.values().iter().all(|v| *v == cs.values()[0]));
        assert!(sample_map(&SphereMap::identity(2).unwrap(), &grid).is_err());
    }

    #[test]
    fn reflect_and_rotation() {
        let r = rotation_matrix(0.3, 1.1, -0.4);
        let v = [0.2, -0.7, 0.5];
        let w = mat_vec(&r, &v);
        assert!((norm(&w) - norm(&v)).abs() < 1e-15);
        let refl = SphereMap::reflect(SphereMap::identity(2).unwrap());
        assert_eq!(refl.nominal_degree(), Some(-1));
        assert!(SphereMap::rotate(SphereMap::identity(1).unwrap(), [0.1, 0.2, 0.0]).is_err());
    }
}
