//! Pointwise Riemannian operators on a 3-metric jet.
//!
//! All functions here are pure in their jet inputs, so the caller decides
//! whether derivatives come from closed forms or finite differences.  Index
//! conventions: `Gamma_ij^k` has the lower pair symmetric, the Riemann tensor
//! is stored as `R_ijk^l`, the Ricci tensor is the trace over the first lower
//! and the upper index, and the round sphere has positive Ricci curvature.

use crate::error::{Error, Result};
use crate::fields::Sym2Jet;
use crate::jet::ScalarJet;
use crate::linalg::{self, Mat3, Vec3};
use crate::real::Real;

/// Christoffel symbols `Gamma_ij^k` at a point.
#[derive(Clone, Copy, Debug)]
pub struct Christoffel3<T> {
    pub gamma: [[[T; 3]; 3]; 3],
}

/// Riemann, Ricci and scalar curvature at a point.
#[derive(Clone, Copy, Debug)]
pub struct CurvatureAtPoint<T> {
    /// `riemann[i][j][k][l]` holds `R_ijk^l`.
    pub riemann: [[[[T; 3]; 3]; 3]; 3],
    pub ricci: [[T; 3]; 3],
    pub scalar: T,
}

/// Jet-level inverse of a metric jet via the adjugate and determinant.
pub fn inverse_jets<T: Real>(g: &Sym2Jet<T>) -> Result<Sym2Jet<T>> {
    let m = &g.comp;
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if !det.value.is_finite() || det.value.abs() < linalg::det_guard() {
        return Err(Error::SingularMetric {
            det: det.value.to_f64().unwrap_or(f64::NAN),
        });
    }
    let cof = |r1: usize, r2: usize, c1: usize, c2: usize| {
        m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1]
    };
    let adj = [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ];
    let det_inv = det.recip();
    let mut comp = [[ScalarJet::constant(T::zero()); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            comp[i][j] = adj[i][j] * det_inv;
        }
    }
    Ok(Sym2Jet { comp })
}

/// Jets of the Christoffel symbols; one order below the metric jet.
pub fn christoffel_jets<T: Real>(g: &Sym2Jet<T>) -> Result<[[[ScalarJet<T>; 3]; 3]; 3]> {
    require_order(g, 1)?;
    let g_inv = inverse_jets(g)?;
    let half = T::half();
    let mut gamma = [[[ScalarJet::constant(T::zero()); 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let mut acc = ScalarJet::constant(T::zero());
                for m in 0..3 {
                    let term = g.comp[i][m].derivative_jet(j) + g.comp[j][m].derivative_jet(i)
                        - g.comp[i][j].derivative_jet(m);
                    acc = acc + g_inv.comp[k][m] * term;
                }
                gamma[i][j][k] = acc.scale(half);
            }
        }
    }
    Ok(gamma)
}

/// Christoffel symbols `Gamma_ij^k = (1/2) g^{km} (g_im,j + g_jm,i - g_ij,m)`.
pub fn christoffel<T: Real>(g: &Sym2Jet<T>) -> Result<Christoffel3<T>> {
    require_order(g, 1)?;
    let g_inv = linalg::inverse3(&g.values())?;
    let half = T::half();
    let mut gamma = [[[T::zero(); 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let mut acc = T::zero();
                for m in 0..3 {
                    acc = acc + g_inv[k][m] * (g.d1(i, m, j) + g.d1(j, m, i) - g.d1(i, j, m));
                }
                gamma[i][j][k] = half * acc;
            }
        }
    }
    Ok(Christoffel3 { gamma })
}

/// Riemann, Ricci and scalar curvature from a metric jet of order two:
/// `R_ijk^l = Gamma_jk^l,i - Gamma_ik^l,j + sum_a (Gamma_jk^a Gamma_ia^l - Gamma_ik^a Gamma_ja^l)`.
pub fn riemann_ricci_scalar<T: Real>(g: &Sym2Jet<T>) -> Result<CurvatureAtPoint<T>> {
    require_order(g, 2)?;
    let gamma = christoffel_jets(g)?;
    let g_inv = linalg::inverse3(&g.values())?;

    let mut riemann = [[[[T::zero(); 3]; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let mut r = gamma[j][k][l].grad[i] - gamma[i][k][l].grad[j];
                    for a in 0..3 {
                        r = r + gamma[j][k][a].value * gamma[i][a][l].value
                            - gamma[i][k][a].value * gamma[j][a][l].value;
                    }
                    riemann[i][j][k][l] = r;
                }
            }
        }
    }

    let mut ricci = [[T::zero(); 3]; 3];
    for j in 0..3 {
        for k in 0..3 {
            let mut acc = T::zero();
            for a in 0..3 {
                acc = acc + riemann[a][j][k][a];
            }
            ricci[j][k] = acc;
        }
    }

    let scalar = linalg::trace_sym2(&g_inv, &ricci);
    Ok(CurvatureAtPoint {
        riemann,
        ricci,
        scalar,
    })
}

/// Hessian `s_ij - Gamma_ij^k s_k` and Laplacian of a scalar jet.
pub fn hessian_laplacian<T: Real>(
    g: &Sym2Jet<T>,
    s: &ScalarJet<T>,
) -> Result<(Mat3<T>, T)> {
    let gamma = christoffel(g)?;
    let g_inv = linalg::inverse3(&g.values())?;
    let mut hess = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = s.hess[i][j];
            for k in 0..3 {
                acc = acc - gamma.gamma[i][j][k] * s.grad[k];
            }
            hess[i][j] = acc;
        }
    }
    Ok((hess, linalg::trace_sym2(&g_inv, &hess)))
}

/// Jets of the covariant Hessian of a scalar; one order below `min(g, s)`.
pub fn hessian_jets<T: Real>(
    g: &Sym2Jet<T>,
    s: &ScalarJet<T>,
) -> Result<[[ScalarJet<T>; 3]; 3]> {
    let gamma = christoffel_jets(g)?;
    let mut hess = [[ScalarJet::constant(T::zero()); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = s.derivative_jet(i).derivative_jet(j);
            for k in 0..3 {
                acc = acc - gamma[i][j][k] * s.derivative_jet(k);
            }
            hess[i][j] = acc;
        }
    }
    Ok(hess)
}

/// Covariant divergence of a symmetric 2-tensor:
/// `(div T)_j = g^{im} (T_mj,i - Gamma_im^k T_kj - Gamma_ij^k T_mk)`.
pub fn divergence_sym2<T: Real>(g: &Sym2Jet<T>, t: &Sym2Jet<T>) -> Result<Vec3<T>> {
    let gamma = christoffel(g)?;
    let g_inv = linalg::inverse3(&g.values())?;
    let tv = t.values();
    let mut div = [T::zero(); 3];
    for j in 0..3 {
        let mut acc = T::zero();
        for i in 0..3 {
            for m in 0..3 {
                let mut term = t.d1(m, j, i);
                for k in 0..3 {
                    term = term - gamma.gamma[i][m][k] * tv[k][j] - gamma.gamma[i][j][k] * tv[m][k];
                }
                acc = acc + g_inv[i][m] * term;
            }
        }
        div[j] = acc;
    }
    Ok(div)
}

/// Covariant divergence of a covector given as component jets:
/// `div w = g^{ij} (w_j,i - Gamma_ij^k w_k)`.
pub fn divergence_covector<T: Real>(g: &Sym2Jet<T>, w: &[ScalarJet<T>; 3]) -> Result<T> {
    let gamma = christoffel(g)?;
    let g_inv = linalg::inverse3(&g.values())?;
    let mut acc = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            let mut term = w[j].grad[i];
            for k in 0..3 {
                term = term - gamma.gamma[i][j][k] * w[k].value;
            }
            acc = acc + g_inv[i][j] * term;
        }
    }
    Ok(acc)
}

/// Mean curvature of the level set of `s` through the point, positive for a
/// round sphere in flat space with outward-increasing `s`:
/// `H = (lap s - Hess s(grad s, grad s) / |grad s|^2) / |grad s|`.
pub fn level_set_mean_curvature<T: Real>(g: &Sym2Jet<T>, s: &ScalarJet<T>) -> Result<T> {
    let g_inv = linalg::inverse3(&g.values())?;
    let grad_up = linalg::mat_vec(&g_inv, &s.grad);
    let grad_norm2 = linalg::bilinear(&g_inv, &s.grad, &s.grad);
    if grad_norm2 <= T::of(1e-24) {
        return Err(Error::VanishingGradient);
    }
    let (hess, lap) = hessian_laplacian(g, s)?;
    let mut hnn = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            hnn = hnn + hess[i][j] * grad_up[i] * grad_up[j];
        }
    }
    let norm = grad_norm2.sqrt();
    Ok((lap - hnn / grad_norm2) / norm)
}

/// Unit normal (covector and vector forms) of the level set of `s`.
pub fn level_set_normal<T: Real>(
    g: &Sym2Jet<T>,
    s: &ScalarJet<T>,
) -> Result<(Vec3<T>, Vec3<T>)> {
    let g_inv = linalg::inverse3(&g.values())?;
    let grad_norm2 = linalg::bilinear(&g_inv, &s.grad, &s.grad);
    if grad_norm2 <= T::of(1e-24) {
        return Err(Error::VanishingGradient);
    }
    let norm = grad_norm2.sqrt();
    let mut lower = [T::zero(); 3];
    for i in 0..3 {
        lower[i] = s.grad[i] / norm;
    }
    let upper = linalg::mat_vec(&g_inv, &lower);
    Ok((lower, upper))
}

fn require_order<T: Real>(g: &Sym2Jet<T>, order: usize) -> Result<()> {
    if g.order() < order {
        return Err(Error::UnsupportedOrder {
            requested: order,
            supported: g.order(),
        });
    }
    Ok(())
}
