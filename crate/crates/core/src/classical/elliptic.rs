//! Jacobi amplitude and incomplete elliptic integral of the first kind.
//!
//! Both take the parameter `m` together with its complement `m1 = 1 − m`
//! so callers that know `m1` more accurately than `1 − m` (orbits close to
//! the separatrix) can pass it directly.

use std::f64::consts::PI;

/// Carlson's symmetric integral R_F(x, y, z) by duplication.
pub fn carlson_rf(mut x: f64, mut y: f64, mut z: f64) -> f64 {
    const TOL: f64 = 1e-3;
    let mut a;
    let (mut dx, mut dy, mut dz);
    loop {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * (sy + sz) + sy * sz;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
        a = (x + y + z) / 3.0;
        dx = 1.0 - x / a;
        dy = 1.0 - y / a;
        dz = 1.0 - z / a;
        if dx.abs().max(dy.abs()).max(dz.abs()) < TOL {
            break;
        }
    }
    let e2 = dx * dy - dz * dz;
    let e3 = dx * dy * dz;
    (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / a.sqrt()
}

/// Complete elliptic integral K(m), `0 ≤ m < 1`.
pub fn complete_k(m1: f64) -> f64 {
    carlson_rf(0.0, m1, 1.0)
}

/// Incomplete elliptic integral F(φ | m) for any real φ, given the
/// complementary parameter `m1 = 1 − m`, `0 < m1 ≤ 1`.| m) for any real φ, `0 ≤ m < 1`.
pub fn incomplete_f(phi: f64, m1: f64) -> f64 {
    let n = (phi / PI).round();
    let r = phi - n * PI;
    let (s, c) = r.sin_cos();
    let base = s * carlson_rf(c * c, c * c + m1 * s * s, 1.0);
    if n == 0.0 {
        base
    } else {
        base + 2.0 * n * complete_k(m1)
    }
}

/// Jacobi amplitude am(u | m) by the arithmetic-geometric mean,
/// `0 ≤ m < 1`.
pub fn amplitude(u: f64, m: f64, m1: f64) -> f64 {
    const MAX_LEVELS: usize = 40;
    let mut a = [0.0f64; MAX_LEVELS + 1];
    let mut c = [0.0f64; MAX_LEVELS + 1];
    a[0] = 1.0;
    c[0] = m.sqrt();
    let mut b = m1.sqrt();
    let mut n = 0;
    while c[n].abs() > f64::EPSILON * a[n] && n < MAX_LEVELS {
        let an = a[n];
        a[n + 1] = 0.5 * (an + b);
        // c_{n+1} = (a_n − b_n)/2 = c_n² / (4 a_{n+1}), free of cancellation.
        c[n + 1] = c[n] * c[n] / (4.0 * a[n + 1]);
        b = (an * b).sqrt();
        n += 1;
    }
    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for level in (1..=n).rev() {
        phi = 0.5 * (phi + (c[level] / a[level] * phi.sin()).asin());
    }
    phi
}
