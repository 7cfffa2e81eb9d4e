//! Smooth random vector fields used by `perturb` maps: Fourier modes up to
//! order 8 on `S^1`, real spherical harmonics of degree 1..=4 on `S^2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FOURIER_ORDER: usize = 8;
pub const HARMONIC_DEGREE: usize = 4;

/// Ascending coefficients of the Legendre polynomials `P_0..P_4`.
const LEGENDRE: [&[f64]; 5] = [
    &[1.0],
    &[0.0, 1.0],
    &[-0.5, 0.0, 1.5],
    &[0.0, -1.5, 0.0, 2.5],
    &[0.375, 0.0, -3.75, 0.0, 4.375],
];

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `d^m/dz^m P_l` evaluated at `z`.
fn legendre_derivative(l: usize, m: usize, z: f64) -> f64 {
    let mut c: Vec<f64> = LEGENDRE[l].to_vec();
    for _ in 0..m {
        c = c.iter().enumerate().skip(1).map(|(k, a)| k as f64 * a).collect();
    }
    c.iter().rev().fold(0.0, |acc, a| acc * z + a)
}

/// Orthonormal real spherical harmonics of degrees `1..=4` at a unit vector,
/// written as polynomials in `(x, y, z)` so the poles are regular.
pub fn real_harmonics(x: &[f64; 3]) -> Vec<f64> {
    let mut out = Vec::with_capacity(24);
    let xy = Complex64::new(x[0], x[1]);
    for l in 1..=HARMONIC_DEGREE {
        for m in 0..=l {
            let k = ((2 * l + 1) as f64 / (4.0 * PI) * factorial(l - m) / factorial(l + m)).sqrt();
            let radial = legendre_derivative(l, m, x[2]);
            if m == 0 {
                out.push(k * radial);
            } else {
                // (1 - z^2)^{m/2} e^{imφ} = (x + iy)^m
                let e = xy.powu(m as u32);
                out.push(std::f64::consts::SQRT_2 * k * radial * e.re);
                out.push(std::f64::consts::SQRT_2 * k * radial * e.im);
            }
        }
    }
    out
}

/// Sup bound of each basis function returned by [`real_harmonics`].
fn harmonic_bounds() -> Vec<f64> {
    (1..=HARMONIC_DEGREE)
        .flat_map(|l| std::iter::repeat_n(((2 * l + 1) as f64 / (4.0 * PI)).sqrt(), 2 * l + 1))
        .collect()
}

/// `cos(mθ), sin(mθ)` for `m = 1..=8`.
pub fn fourier_modes(x: &[f64; 3]) -> Vec<f64> {
    let e = Complex64::new(x[0], x[1]);
    let mut p = Complex64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(2 * FOURIER_ORDER);
    for _ in 0..FOURIER_ORDER {
        p *= e;
        out.push(p.re);
        out.push(p.im);
    }
    out
}

/// Seeded vector field with `sup |V| <= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbField {
    dim: usize,
    coeffs: Vec<[f64; 3]>,
}

impl PerturbField {
    pub fn new(dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n_basis, bounds) = if dim == 1 {
            (2 * FOURIER_ORDER, vec![1.0; 2 * FOURIER_ORDER])
        } else {
            let b = harmonic_bounds();
            (b.len(), b)
        };
        let comps = if dim == 1 { 2 } else { 3 };
        let mut coeffs: Vec<[f64; 3]> = (0..n_basis)
            .map(|_| {
                let mut c = [0.0; 3];
                for v in c.iter_mut().take(comps) {
                    *v = rng.random_range(-1.0..1.0);
                }
                c
            })
            .collect();
        let sup_sq: f64 = (0..3)
            .map(|j| coeffs.iter().zip(&bounds).map(|(c, b)| c[j].abs() * b).sum::<f64>().powi(2))
            .sum();
        let s = 1.0 / sup_sq.sqrt();
        for c in &mut coeffs {
            for v in c.iter_mut() {
                *v *= s;
            }
        }
        PerturbField { dim, coeffs }
    }

    pub fn eval(&self, x: &[f64; 3]) -> [f64; 3] {
        let basis = if self.dim == 1 { fourier_modes(x) } else { real_harmonics(x) };
        let mut v = [0.0; 3];
        for (b, c) in basis.iter().zip(&self.coeffs) {
            for j in 0..3 {
                v[j] += b * c[j];
            }
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::icosphere_mesh;

    #[test]
    fn harmonics_are_orthonormal_on_fine_grid() {
        let (_, grid) = icosphere_mesh(5).unwrap();
        let n = real_harmonics(&[0.0, 0.0, 1.0]).len();
        assert_eq!(n, 24);
        let vals: Vec<Vec<f64>> = grid.points().iter().map(|p| real_harmonics(&p.0)).collect();
        for a in 0..n {
            for b in 0..n {
                let ip: f64 = vals.iter().zip(grid.weights()).map(|(v, w)| w * v[a] * v[b]).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 2e-3, "<Y{a}, Y{b}> = {ip}");
            }
        }
    }

    #[test]
    fn field_is_bounded_and_deterministic() {
        for dim in [1, 2] {
            let f = PerturbField::new(dim, 42);
            assert_eq!(f, PerturbField::new(dim, 42));
            let (_, grid) = icosphere_mesh(3).unwrap();
            for p in grid.points().iter().filter(|p| p.0[0].hypot(p.0[1]) > 1e-3) {
                let x = if dim == 1 { crate::SpherePoint::normalized([p.0[0], p.0[1], 0.0]).0 } else { p.0 };
                let v = f.eval(&x);
                assert!(crate::geometry::vec3::norm(&v) <= 1.0 + 1e-12);
                if dim == 1 {
                    assert_eq!(v[2], 0.0);
                }
            }
        }
    }
}
