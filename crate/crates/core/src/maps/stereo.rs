//! Stereographic chart from the north pole `(0, 0, 1)` onto the equatorial
//! plane, in homogeneous coordinates so that both poles are regular points.

use num_complex::Complex64;

/// Homogeneous coordinates `(z0 : z1)` of the stereographic image
/// `z = (x1 + i x2) / (1 - x3)`. The north pole is `(2 : 0)`, i.e. `z = ∞`.
#[inline]
pub fn to_homogeneous(x: &[f64; 3]) -> (Complex64, Complex64) {
    if x[2] <= 0.0 {
        (Complex64::new(x[0], x[1]), Complex64::new(1.0 - x[2], 0.0))
    } else {
        (Complex64::new(1.0 + x[2], 0.0), Complex64::new(x[0], -x[1]))
    }
}

/// Inverse stereographic projection of `w = a / b`. `b = 0` maps to the north
/// pole; `a = b = 0` (a common root) also does.
#[inline]
pub fn from_homogeneous(a: Complex64, b: Complex64) -> [f64; 3] {
    if a.norm_sqr() <= b.norm_sqr() {
        let w = a / b;
        let m = w.norm_sqr();
        [2.0 * w.re / (m + 1.0), 2.0 * w.im / (m + 1.0), (m - 1.0) / (m + 1.0)]
    } else {
        let o = b / a;
        let m = o.norm_sqr();
        [2.0 * o.re / (1.0 + m), -2.0 * o.im / (1.0 + m), (1.0 - m) / (1.0 + m)]
    }
}

/// `Σ c_k z0^k z1^(deg-k)` for ascending coefficients `c` (`deg >= c.len() - 1`).
pub fn homogeneous_poly(coeffs: &[Complex64], deg: usize, z0: Complex64, z1: Complex64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut z0p = Complex64::new(1.0, 0.0);
    for (k, c) in coeffs.iter().enumerate() {
        sum += c * z0p * z1.powu((deg - k) as u32);
        z0p *= z0;
    }
    sum
}

/// Stereographic coordinate of a point, `None` at the north pole.
pub fn project(x: &[f64; 3]) -> Option<Complex64> {
    let (z0, z1) = to_homogeneous(x);
    if z1.norm_sqr() == 0.0 {
        None
    } else {
        Some(z0 / z1)
    }
}
