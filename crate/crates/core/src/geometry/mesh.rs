use std::collections::HashMap;

use super::vec3::{det, normalize};
use super::{signed_solid_angle, QuadratureGrid, SpherePoint};
use crate::{LabError, Result};

pub const MAX_ICOSPHERE_LEVEL: u32 = 8;

/// Closed triangulated sphere with outward-oriented triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<SpherePoint>,
    triangles: Vec<[u32; 3]>,
    outward: bool,
}

impl TriangleMesh {
    /// Builds a mesh and records whether every triangle satisfies
    /// `det(v_a, v_b, v_c) > 0`.
    pub fn new(vertices: Vec<SpherePoint>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        let n = vertices.len() as u32;
        if triangles.iter().flatten().any(|&i| i >= n) {
            return Err(LabError::invalid("triangle references a missing vertex"));
        }
        let outward = triangles.iter().all(|t| {
            det(&vertices[t[0] as usize].0, &vertices[t[1] as usize].0, &vertices[t[2] as usize].0) > 0.0
        });
        Ok(TriangleMesh { vertices, triangles, outward })
    }

    pub fn vertices(&self) -> &[SpherePoint] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn is_outward(&self) -> bool {
        self.outward
    }

    pub fn edges(&self) -> Vec<[u32; 2]> {
        let mut e: Vec<[u32; 2]> = self
            .triangles
            .iter()
            .flat_map(|t| [[t[0], t[1]], [t[1], t[2]], [t[2], t[0]]])
            .map(|[a, b]| [a.min(b), a.max(b)])
            .collect();
        e.sort_unstable();
        e.dedup();
        e
    }

    /// `V - E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges().len() as i64 + self.triangles.len() as i64
    }

    /// Quadrature grid with one third of the incident spherical triangle
    /// areas lumped onto each vertex.
    pub fn lumped_grid(&self) -> Result<QuadratureGrid> {
        let mut weights = vec![0.0; self.vertices.len()];
        for t in &self.triangles {
            let [a, b, c] = t.map(|i| &self.vertices[i as usize].0);
            let area = signed_solid_angle(a, b, c).abs() / 3.0;
            for &i in t {
                weights[i as usize] += area;
            }
        }
        QuadratureGrid::from_parts(2, self.vertices.clone(), weights, self.edges())
    }
}

fn icosahedron() -> (Vec<[f64; 3]>, Vec<[u32; 3]>) {
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let v = vec![
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let f = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (v.iter().map(normalize).collect(), f)
}

/// Subdivided icosahedron projected to `S^2`, with its lumped quadrature grid.
///
/// Level `L` has `20·4^L` triangles and `10·4^L + 2` vertices.
pub fn icosphere_mesh(level: u32) -> Result<(TriangleMesh, QuadratureGrid)> {
    if level > MAX_ICOSPHERE_LEVEL {
        return Err(LabError::ResourceLimit(format!(
            "icosphere level {level} exceeds the maximum {MAX_ICOSPHERE_LEVEL}"
        )));
    }
    let (mut verts, mut faces) = icosahedron();
    for _ in 0..level {
        let mut midpoint: HashMap<(u32, u32), u32> = HashMap::with_capacity(faces.len() * 3 / 2);
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut mid = |a: u32, b: u32, verts: &mut Vec<[f64; 3]>| -> u32 {
            *midpoint.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (p, q) = (verts[a as usize], verts[b as usize]);
                verts.push(normalize(&[p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                (verts.len() - 1) as u32
            })
        };
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let vertices = verts.into_iter().map(SpherePoint::normalized).collect();
    let mesh = TriangleMesh::new(vertices, faces)?;
    let grid = mesh.lumped_grid()?;
    Ok((mesh, grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn level_zero_is_icosahedron() {
        let (m, g) = icosphere_mesh(0).unwrap();
        assert_eq!(m.vertices().len(), 12);
        assert_eq!(m.triangles().len(), 20);
        assert!(m.is_outward());
        assert_eq!(g.len(), 12);
    }

    #[test]
    fn subdivision_counts_and_euler() {
        for level in 0..=4u32 {
            let (m, _) = icosphere_mesh(level).unwrap();
            let p = 4usize.pow(level);
            assert_eq!(m.triangles().len(), 20 * p);
            assert_eq!(m.vertices().len(), 10 * p + 2);
            assert_eq!(m.euler_characteristic(), 2);
            assert!(m.is_outward());
        }
    }

    #[test]
    fn weights_partition_sphere() {
        let (_, g) = icosphere_mesh(3).unwrap();
        assert!((g.total_weight() / (4.0 * PI) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn linear_coordinates_integrate_to_zero() {
        let (_, g) = icosphere_mesh(3).unwrap();
        for i in 0..3 {
            assert!(g.integrate(|p| p.0[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn level_limit() {
        assert!(matches!(icosphere_mesh(9), Err(LabError::ResourceLimit(_))));
    }
}
