//! Topological degree of sampled maps.
//!
//! * `d = 1`: winding number, the total wrapped angle swept by consecutive
//!   images divided by `2π`.
//! * `d = 2`: discrete Kronecker integral, the sum of signed solid angles of
//!   the image triangles divided by `4π`. The piecewise-geodesic extension of
//!   the vertex map is continuous, so the sum is an integer multiple of `4π` up
//!   to rounding as long as every image triangle has a well-defined
//!   orientation.
//! * A signed preimage count of a regular value, used as an independent oracle.

use std::f64::consts::PI;

use crate::geometry::vec3::{det, dot, norm, normalize, sub};
use crate::geometry::{icosphere_mesh, solid_angle_parts, tangent_frame, TriangleMesh};
use crate::maps::{sample_map, SampledMap, SphereMap};
use crate::reduce::{pairwise_sum, par_blocks};
use crate::{chordal_distance, LabError, Result, SpherePoint};

/// Residual at or above which a degree is reported as suspect.
pub const SUSPECT_RESIDUAL: f64 = 0.1;

/// Consecutive images closer than this to antipodal make the winding number
/// ambiguous.
const ANTIPODAL_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeResult {
    pub raw: f64,
    pub degree: i64,
    pub residual: f64,
}

impl DegreeResult {
    fn from_raw(raw: f64) -> Self {
        let degree = raw.round();
        let residual = (raw - degree).abs();
        if residual >= SUSPECT_RESIDUAL {
            log::warn!("degree residual {residual:.3} suggests an under-resolved grid");
        }
        DegreeResult { raw, degree: degree as i64, residual }
    }

    pub fn is_suspect(&self) -> bool {
        self.residual >= SUSPECT_RESIDUAL
    }
}

/// Winding number of a sampled map on `S^1`. Grid nodes are visited in order
/// of increasing angle.
pub fn winding_number(sm: &SampledMap) -> Result<DegreeResult> {
    if sm.dim() != 1 {
        return Err(LabError::invalid("winding number needs a map on S^1"));
    }
    let pts = sm.grid().points();
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&a, &b| pts[a].angle().total_cmp(&pts[b].angle()));
    let vals = sm.values();
    let n = order.len();
    let mut increments = Vec::with_capacity(n);
    for k in 0..n {
        let a = &vals[order[k]];
        let b = &vals[order[(k + 1) % n]];
        if chordal_distance(a, b) >= 2.0 - ANTIPODAL_MARGIN {
            return Err(LabError::resolution(format!(
                "consecutive images at nodes {} and {} are antipodal; refine the grid",
                order[k],
                order[(k + 1) % n]
            )));
        }
        let c = a.0[0] * b.0[1] - a.0[1] * b.0[0];
        increments.push(c.atan2(a.dot(b)));
    }
    Ok(DegreeResult::from_raw(pairwise_sum(&increments) / (2.0 * PI)))
}

/// Signed solid angle of an image triangle, or an error when its orientation
/// is ambiguous (collinear on a great circle spanning at least a half circle,
/// or containing an antipodal pair).
fn image_triangle_angle(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> Option<f64> {
    const TOL: f64 = 1e-12;
    let (num, den) = solid_angle_parts(a, b, c);
    if num.abs() <= TOL && den <= TOL {
        None
    } else {
        Some(2.0 * num.atan2(den))
    }
}

/// Discrete Kronecker integral of a map sampled on the vertices of `mesh`.
pub fn kronecker_degree(mesh: &TriangleMesh, sm: &SampledMap) -> Result<DegreeResult> {
    if sm.dim() != 2 {
        return Err(LabError::invalid("Kronecker degree needs a map on S^2"));
    }
    if mesh.vertices().len() != sm.values().len() {
        return Err(LabError::invalid("map was not sampled on the mesh vertices"));
    }
    if !mesh.is_outward() {
        return Err(LabError::invalid("mesh triangles are not outward oriented"));
    }
    let tris = mesh.triangles();
    let vals = sm.values();
    let blocks: Vec<Result<f64>> = par_blocks(tris.len(), 1024, |range| {
        let mut parts = Vec::with_capacity(range.len());
        for t in &tris[range] {
            let [a, b, c] = t.map(|i| &vals[i as usize].0);
            parts.push(image_triangle_angle(a, b, c).ok_or_else(|| {
                LabError::resolution(format!("degenerate image of triangle {t:?}; refine the mesh"))
            })?);
        }
        Ok(pairwise_sum(&parts))
    });
    let sums = blocks.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(DegreeResult::from_raw(pairwise_sum(&sums) / (4.0 * PI)))
}

/// Degree of a sampled map on either sphere; `mesh` is required for `d = 2`.
pub fn degree_of(sm: &SampledMap, mesh: Option<&TriangleMesh>) -> Result<DegreeResult> {
    match (sm.dim(), mesh) {
        (1, _) => winding_number(sm),
        (2, Some(m)) => kronecker_degree(m, sm),
        _ => Err(LabError::invalid("degree on S^2 needs a triangle mesh (use an `ico:L` grid)")),
    }
}

/// Minimum `|Jacobian|` at a preimage for the target to count as regular.
pub const REGULAR_JACOBIAN_MIN: f64 = 1e-6;
/// Preimages are located to this chordal accuracy.
pub const PREIMAGE_TOLERANCE: f64 = 1e-10;

/// Signed count of preimages of `target`. `resolution` is the number of scan
/// samples for `d = 1` and the icosphere level for `d = 2`.
pub fn preimage_count(map: &SphereMap, target: &SpherePoint, resolution: usize) -> Result<i64> {
    let t = SpherePoint::new(target.0)?;
    match map.dim() {
        1 => {
            if t.0[2] != 0.0 {
                return Err(LabError::invalid("target must lie on S^1"));
            }
            preimages_circle(map, &t, resolution)
        }
        _ => preimages_sphere(map, &t, resolution),
    }
}

/// Signed angle from `t` to `g(θ)`.
fn angle_to(map: &SphereMap, t: &SpherePoint, theta: f64) -> f64 {
    let g = map.eval(&SpherePoint::from_angle(theta));
    (t.0[0] * g.0[1] - t.0[1] * g.0[0]).atan2(t.dot(&g))
}

fn preimages_circle(map: &SphereMap, t: &SpherePoint, n: usize) -> Result<i64> {
    if n < 3 {
        return Err(LabError::invalid("preimage scan needs at least 3 samples"));
    }
    let theta = |i: usize| 2.0 * PI * i as f64 / n as f64;
    let f: Vec<f64> = (0..n).map(|i| angle_to(map, t, theta(i))).collect();
    let mut count = 0;
    for i in 0..n {
        let (a, b) = (f[i], f[(i + 1) % n]);
        // A jump of about 2π passes through the antipode of the target, not the target.
        if (b - a).abs() >= PI || (a < 0.0) == (b < 0.0) {
            continue;
        }
        let (mut lo, mut hi) = (theta(i), theta(i) + 2.0 * PI / n as f64);
        let rising = b > a;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fm = angle_to(map, t, mid);
            if (fm >= 0.0) == rising {
                hi = mid;
            } else {
                lo = mid;
            }
            // |g - t| ≈ |F| for small angles.
            if hi - lo < 1e-15 || fm.abs() < 0.1 * PREIMAGE_TOLERANCE {
                break;
            }
        }
        let root = 0.5 * (lo + hi);
        let h = 1e-6;
        let jac = (angle_to(map, t, root + h) - angle_to(map, t, root - h)) / (2.0 * h);
        if jac.abs() < REGULAR_JACOBIAN_MIN {
            return Err(LabError::NotRegularValue { jacobian: jac.abs() });
        }
        count += if jac > 0.0 { 1 } else { -1 };
    }
    Ok(count)
}

/// Gnomonic coordinates of `g` in the tangent frame `(f1, f2)` at `t`.
fn gnomonic(g: &[f64; 3], t: &[f64; 3], f: &[[f64; 3]]) -> Option<[f64; 2]> {
    let c = dot(g, t);
    (c > 1e-3).then(|| [dot(g, &f[0]) / c, dot(g, &f[1]) / c])
}

struct Preimage {
    point: [f64; 3],
    jacobian: f64,
}

/// Newton iteration for `g(x) = t` in a local chart, started at `x0`.
fn refine_preimage(map: &SphereMap, t: &SpherePoint, x0: [f64; 3]) -> Option<Preimage> {
    let f = tangent_frame(t, 2);
    let mut x = normalize(&x0);
    let h = 1e-7;
    for _ in 0..60 {
        let p = SpherePoint(x);
        let e = tangent_frame(&p, 2);
        let chart = |u: f64, v: f64| {
            let q = normalize(&[x[0] + u * e[0][0] + v * e[1][0], x[1] + u * e[0][1] + v * e[1][1], x[2] + u * e[0][2] + v * e[1][2]]);
            gnomonic(&map.eval(&SpherePoint(q)).0, &t.0, &f)
        };
        let g0 = chart(0.0, 0.0)?;
        let (du_p, du_m, dv_p, dv_m) = (chart(h, 0.0)?, chart(-h, 0.0)?, chart(0.0, h)?, chart(0.0, -h)?);
        let j = [
            [(du_p[0] - du_m[0]) / (2.0 * h), (dv_p[0] - dv_m[0]) / (2.0 * h)],
            [(du_p[1] - du_m[1]) / (2.0 * h), (dv_p[1] - dv_m[1]) / (2.0 * h)],
        ];
        let detj = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let dist = chordal_distance(&map.eval(&p), t);
        if dist < 0.1 * PREIMAGE_TOLERANCE {
            return Some(Preimage { point: x, jacobian: detj });
        }
        if detj.abs() < 1e-300 {
            // Singular chart; the caller reports the point as irregular.
            return (dist < PREIMAGE_TOLERANCE).then_some(Preimage { point: x, jacobian: 0.0 });
        }
        let du = -(j[1][1] * g0[0] - j[0][1] * g0[1]) / detj;
        let dv = -(-j[1][0] * g0[0] + j[0][0] * g0[1]) / detj;
        // Damp steps larger than a quarter radian.
        let len = du.hypot(dv);
        let s = if len > 0.25 { 0.25 / len } else { 1.0 };
        x = normalize(&[
            x[0] + s * (du * e[0][0] + dv * e[1][0]),
            x[1] + s * (du * e[0][1] + dv * e[1][1]),
            x[2] + s * (du * e[0][2] + dv * e[1][2]),
        ]);
    }
    let p = SpherePoint(x);
    (chordal_distance(&map.eval(&p), t) < PREIMAGE_TOLERANCE).then(|| {
        let jac = local_jacobian(map, &p, t);
        Preimage { point: x, jacobian: jac }
    })
}

/// Jacobian determinant of `g` at `p` in oriented orthonormal frames.
fn local_jacobian(map: &SphereMap, p: &SpherePoint, t: &SpherePoint) -> f64 {
    let e = tangent_frame(p, 2);
    let f = tangent_frame(t, 2);
    let h = 1e-6;
    let d = |k: usize| {
        let step = |s: f64| {
            let x = p.0;
            SpherePoint::normalized([x[0] + s * e[k][0], x[1] + s * e[k][1], x[2] + s * e[k][2]])
        };
        let (gp, gm) = (map.eval(&step(h)).0, map.eval(&step(-h)).0);
        let v = [(gp[0] - gm[0]) / (2.0 * h), (gp[1] - gm[1]) / (2.0 * h), (gp[2] - gm[2]) / (2.0 * h)];
        [dot(&v, &f[0]), dot(&v, &f[1])]
    };
    let (a, b) = (d(0), d(1));
    a[0] * b[1] - a[1] * b[0]
}

fn preimages_sphere(map: &SphereMap, t: &SpherePoint, level: usize) -> Result<i64> {
    let (mesh, grid) = icosphere_mesh(level as u32)?;
    let sm = sample_map(map, &std::sync::Arc::new(grid))?;
    let vals = sm.values();
    let verts = mesh.vertices();
    let mut roots: Vec<Preimage> = Vec::new();
    const EPS: f64 = 1e-12;
    for tri in mesh.triangles() {
        let [a, b, c] = tri.map(|i| &vals[i as usize].0);
        let orient = det(a, b, c);
        if orient == 0.0 {
            continue;
        }
        let s = orient.signum();
        let w = [s * det(&t.0, b, c), s * det(a, &t.0, c), s * det(a, b, &t.0)];
        if w.iter().any(|&wi| wi < -EPS) {
            continue;
        }
        let total: f64 = w.iter().sum::<f64>().max(1e-300);
        let [xa, xb, xc] = tri.map(|i| verts[i as usize].0);
        let start = [
            (w[0] * xa[0] + w[1] * xb[0] + w[2] * xc[0]) / total,
            (w[0] * xa[1] + w[1] * xb[1] + w[2] * xc[1]) / total,
            (w[0] * xa[2] + w[1] * xb[2] + w[2] * xc[2]) / total,
        ];
        let start = if norm(&start) > 1e-12 { start } else { xa };
        let root = refine_preimage(map, t, start).ok_or_else(|| {
            LabError::resolution(format!("preimage refinement failed near triangle {tri:?}"))
        })?;
        if !roots.iter().any(|r| norm(&sub(&r.point, &root.point)) < 1e-7) {
            roots.push(root);
        }
    }
    // Steep maps can produce image triangles too large for the containment
    // test; the vertex whose image is nearest the target is always tried.
    let nearest = (0..vals.len())
        .min_by(|&i, &j| chordal_distance(&vals[i], t).total_cmp(&chordal_distance(&vals[j], t)));
    if let Some(root) = nearest.and_then(|i| refine_preimage(map, t, verts[i].0)) {
        if !roots.iter().any(|r| norm(&sub(&r.point, &root.point)) < 1e-7) {
            roots.push(root);
        }
    }
    let mut count = 0;
    for r in &roots {
        if r.jacobian.abs() < REGULAR_JACOBIAN_MIN {
            return Err(LabError::NotRegularValue { jacobian: r.jacobian.abs() });
        }
        count += if r.jacobian > 0.0 { 1 } else { -1 };
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{uniform_circle_grid, GridSpec};
    use std::sync::Arc;

    fn sampled(spec: &str, grid: GridSpec) -> (SampledMap, Option<Arc<TriangleMesh>>) {
        let disc = grid.build().unwrap();
        let map = SphereMap::parse(spec, disc.dim()).unwrap();
        (sample_map(&map, &disc.grid).unwrap(), disc.mesh)
    }

    #[test]
    fn winding_power_three() {
        let (sm, _) = sampled("power:k=3", GridSpec::Circle(64));
        let r = winding_number(&sm).unwrap();
        assert_eq!(r.degree, 3);
        assert!(r.residual < 1e-12);
    }

    #[test]
    fn winding_constant() {
        let (sm, _) = sampled("constant", GridSpec::Circle(16));
        assert_eq!(winding_number(&sm).unwrap().degree, 0);
    }

    #[test]
    fn winding_detects_antipodal_steps() {
        // power:k=2 on 4 nodes jumps by π between neighbours.
        let (sm, _) = sampled("power:k=2", GridSpec::Circle(4));
        assert!(matches!(winding_number(&sm), Err(LabError::ResolutionInsufficient(_))));
    }

    #[test]
    fn winding_perturbed_negative_two() {
        let spec = "perturb:base=power:k=-2,amp=0.05,seed=1";
        let (sm, _) = sampled(spec, GridSpec::Circle(4096));
        assert_eq!(winding_number(&sm).unwrap().degree, -2);
        let map = SphereMap::parse(spec, 1).unwrap();
        assert_eq!(preimage_count(&map, &SpherePoint::from_angle(0.4), 512).unwrap(), -2);
    }

    #[test]
    fn kronecker_identity_and_antipodal() {
        let (sm, mesh) = sampled("identity", GridSpec::Icosphere(3));
        let r = kronecker_degree(&mesh.clone().unwrap(), &sm).unwrap();
        assert_eq!(r.degree, 1);
        assert!(r.residual < 1e-9);
        let (sm, _) = sampled("antipodal", GridSpec::Icosphere(3));
        let r = kronecker_degree(&mesh.unwrap(), &sm).unwrap();
        assert_eq!(r.degree, -1);
        assert!(r.residual < 1e-9);
    }

    #[test]
    fn kronecker_constant_is_zero() {
        let (sm, mesh) = sampled("constant", GridSpec::Icosphere(2));
        assert_eq!(kronecker_degree(&mesh.unwrap(), &sm).unwrap().degree, 0);
    }

    #[test]
    fn kronecker_square_matches_preimages() {
        let (sm, mesh) = sampled("rational:num=0,0,1;den=1", GridSpec::Icosphere(5));
        let r = kronecker_degree(&mesh.unwrap(), &sm).unwrap();
        assert_eq!(r.degree, 2);
        assert!(r.residual < 0.01);
        let map = SphereMap::parse("rational:num=0,0,1;den=1", 2).unwrap();
        let target = SpherePoint::new([0.3, -0.2, 0.5]).unwrap();
        assert_eq!(preimage_count(&map, &target, 3).unwrap(), 2);
    }

    #[test]
    fn preimage_basic() {
        let id = SphereMap::identity(2).unwrap();
        assert_eq!(preimage_count(&id, &SpherePoint::new([1.0, 2.0, 3.0]).unwrap(), 2).unwrap(), 1);
        let anti = SphereMap::antipodal(2).unwrap();
        assert_eq!(preimage_count(&anti, &SpherePoint::new([1.0, 2.0, 3.0]).unwrap(), 2).unwrap(), -1);
        for k in [-4, 1, 5] {
            let m = SphereMap::power(k).unwrap();
            assert_eq!(preimage_count(&m, &SpherePoint::from_angle(0.3), 256).unwrap(), i64::from(k));
        }
    }

    #[test]
    fn bubble_preimages() {
        let m = SphereMap::bubble(2, 2, 50.0).unwrap();
        let south = SpherePoint([0.0, 0.0, -1.0]);
        // z = 0 is a double root of (λz)^2: the south pole is a critical value.
        assert!(matches!(preimage_count(&m, &south, 4), Err(LabError::NotRegularValue { .. })));
        let generic = SpherePoint::new([0.4, 0.1, -0.9]).unwrap();
        assert_eq!(preimage_count(&m, &generic, 4).unwrap(), 2);
    }

    #[test]
    fn degree_needs_mesh_on_s2() {
        let (sm, _) = sampled("identity", GridSpec::Fibonacci(100));
        assert!(degree_of(&sm, None).is_err());
        let grid = Arc::new(uniform_circle_grid(32).unwrap());
        let sm = sample_map(&SphereMap::identity(1).unwrap(), &grid).unwrap();
        assert_eq!(degree_of(&sm, None).unwrap().degree, 1);
    }
}
