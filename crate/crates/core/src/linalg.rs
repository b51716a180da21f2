//! Small fixed-size matrix helpers for 3x3 metrics.

use crate::error::{Error, Result};
use crate::real::Real;

pub type Mat3<T> = [[T; 3]; 3];
pub type Vec3<T> = [T; 3];

pub fn det3<T: Real>(m: &Mat3<T>) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub fn adjugate3<T: Real>(m: &Mat3<T>) -> Mat3<T> {
    let c = |r1: usize, r2: usize, c1: usize, c2: usize| {
        m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1]
    };
    [
        [c(1, 2, 1, 2), -c(0, 2, 1, 2), c(0, 1, 1, 2)],
        [-c(1, 2, 0, 2), c(0, 2, 0, 2), -c(0, 1, 0, 2)],
        [c(1, 2, 0, 1), -c(0, 2, 0, 1), c(0, 1, 0, 1)],
    ]
}

/// Minimum determinant accepted for a metric before it is declared singular.
pub fn det_guard<T: Real>() -> T {
    T::of(1e-12)
}

/// Cofactor inverse of a 3x3 matrix with a determinant guard.
pub fn inverse3<T: Real>(m: &Mat3<T>) -> Result<Mat3<T>> {
    let det = det3(m);
    if !det.is_finite() || det.abs() < det_guard() {
        return Err(Error::SingularMetric {
            det: det.to_f64().unwrap_or(f64::NAN),
        });
    }
    let adj = adjugate3(m);
    let mut inv = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            inv[i][j] = adj[i][j] / det;
        }
    }
    Ok(inv)
}

pub fn mat_vec<T: Real>(m: &Mat3<T>, v: &Vec3<T>) -> Vec3<T> {
    let mut out = [T::zero(); 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i] = out[i] + m[i][j] * v[j];
        }
    }
    out
}

/// `v^T m w`.
pub fn bilinear<T: Real>(m: &Mat3<T>, v: &Vec3<T>, w: &Vec3<T>) -> T {
    let mut out = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            out = out + v[i] * m[i][j] * w[j];
        }
    }
    out
}

/// Frobenius-type squared norm of a covariant 2-tensor under a metric
/// inverse: `g^{ia} g^{jb} t_ij t_ab`.
pub fn norm2_sym2<T: Real>(g_inv: &Mat3<T>, t: &Mat3<T>) -> T {
    let mut out = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            for a in 0..3 {
                for b in 0..3 {
                    out = out + g_inv[i][a] * g_inv[j][b] * t[i][j] * t[a][b];
                }
            }
        }
    }
    out
}

/// Metric trace `g^{ij} t_ij`.
pub fn trace_sym2<T: Real>(g_inv: &Mat3<T>, t: &Mat3<T>) -> T {
    let mut out = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            out = out + g_inv[i][j] * t[i][j];
        }
    }
    out
}

/// Eigenvalues of a symmetric 3x3 matrix by the cyclic Jacobi method,
/// returned in ascending order.
pub fn sym3_eigenvalues<T: Real>(m: &Mat3<T>) -> Vec3<T> {
    let mut a = *m;
    for _ in 0..64 {
        let off = (a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2]).sqrt();
        if off < T::of(1e-300).max(T::epsilon() * T::of(1e-2)) {
            break;
        }
        for p in 0..3 {
            for q in (p + 1)..3 {
                if a[p][q].abs() <= T::epsilon() * T::of(1e-3) {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (T::two() * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = (t * t + T::one()).sqrt().recip();
                let s = t * c;
                let mut rot = [[T::zero(); 3]; 3];
                for (i, row) in rot.iter_mut().enumerate() {
                    row[i] = T::one();
                }
                rot[p][p] = c;
                rot[q][q] = c;
                rot[p][q] = s;
                rot[q][p] = -s;
                // a = rot^T a rot
                let mut tmp = [[T::zero(); 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        let mut acc = T::zero();
                        for k in 0..3 {
                            acc = acc + a[i][k] * rot[k][j];
                        }
                        tmp[i][j] = acc;
                    }
                }
                let mut next = [[T::zero(); 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        let mut acc = T::zero();
                        for k in 0..3 {
                            acc = acc + rot[k][i] * tmp[k][j];
                        }
                        next[i][j] = acc;
                    }
                }
                a = next;
            }
        }
    }
    let mut ev = [a[0][0], a[1][1], a[2][2]];
    ev.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    ev
}
