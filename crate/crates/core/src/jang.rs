//! The metric deformation `gbar = g + phi^2 df^2` and everything built from
//! it: the graph second fundamental form `h` in both metric representations,
//! the vector `v`, the covector `q = (h - k)(v, .)`, the generalized Jang
//! residual `tr_gbar(h - k)`, the eight conversion identities between barred
//! and unbarred quantities, the generalized Schoen-Yau identity, the
//! zero-divergence residual, the transformation of mean curvature under the
//! deformation, and the near-horizon quantities that stay finite as
//! `phi -> 0`.

use std::sync::Arc;

use crate::constraints::{self, CauchyData, SurfaceClass};
use crate::curvature;
use crate::error::{Error, Result};
use crate::fields::{ScalarField, Sym2Field, Sym2Jet};
use crate::jet::{Point3, ScalarJet};
use crate::linalg::{self, Mat3, Vec3};
use crate::real::Real;
use crate::surface::{Surface, SphereGrid};

/// The two scalar fields defining the deformation: the graph function `f`
/// and the warping factor `phi`.
pub struct JangPair<T: Real> {
    pub f: Arc<dyn ScalarField<T>>,
    pub phi: Arc<dyn ScalarField<T>>,
}

impl<T: Real> JangPair<T> {
    pub fn new(f: Arc<dyn ScalarField<T>>, phi: Arc<dyn ScalarField<T>>) -> Self {
        Self { f, phi }
    }
}

/// Guard below which divisions by `phi` are refused.
pub fn eps_phi<T: Real>() -> T {
    T::of(1e-8)
}

/// Pointwise bundle of deformation quantities, kept as jets so one
/// construction serves values, first derivatives and curvature.
pub struct DeformedGeometry<T: Real> {
    pub order: usize,
    pub g: Sym2Jet<T>,
    pub g_inv: Sym2Jet<T>,
    pub k: Sym2Jet<T>,
    pub f: ScalarJet<T>,
    pub phi: ScalarJet<T>,
    /// `w = 1 + phi^2 |df|^2_g`.
    pub w: ScalarJet<T>,
    pub gbar: Sym2Jet<T>,
    pub gbar_inv: Sym2Jet<T>,
    /// Components `v^i = phi f^i / w^{1/2}` (the same components serve `v`
    /// and `vbar`, which differ only in their time legs).
    pub v: [ScalarJet<T>; 3],
    /// Second fundamental form of the graph, in the `g` representation
    /// `h = (phi Hess f + df dphi + dphi df) / w^{1/2}`.
    pub h: Sym2Jet<T>,
    /// `q_j = v^i (h - k)_ij`.
    pub q: [ScalarJet<T>; 3],
}

/// Construct the deformation bundle at `p`; `order` is the derivative order
/// carried by `gbar` (2 suffices for curvature).  Requires `phi > 0`.
pub fn deformation_at_point<T: Real>(
    data: &CauchyData<T>,
    pair: &JangPair<T>,
    p: Point3<T>,
    order: usize,
) -> Result<DeformedGeometry<T>> {
    let geom = deformation_limit(data, pair, p, order)?;
    if !(geom.phi.value > T::zero()) {
        return Err(Error::NonPositivePhi {
            phi: geom.phi.value.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(geom)
}

/// Like [`deformation_at_point`] but admits `phi = 0` for evaluating the
/// limit toward a horizon.  Every field of the bundle is polynomial in
/// `phi`, so nothing here divides by it.
pub fn deformation_limit<T: Real>(
    data: &CauchyData<T>,
    pair: &JangPair<T>,
    p: Point3<T>,
    order: usize,
) -> Result<DeformedGeometry<T>> {
    let g = data.g.jet(p, order.max(1))?;
    let k = data.k.jet(p, order.saturating_sub(1))?;
    let f = pair.f.jet(p, (order + 1).min(3))?;
    let phi = pair.phi.jet(p, order.max(1))?;
    if phi.value < T::zero() {
        return Err(Error::NonPositivePhi {
            phi: phi.value.to_f64().unwrap_or(f64::NAN),
        });
    }

    let g_inv = curvature::inverse_jets(&g)?;
    let df = [
        f.derivative_jet(0),
        f.derivative_jet(1),
        f.derivative_jet(2),
    ];
    let zero = ScalarJet::constant(T::zero());
    let mut df_up = [zero; 3];
    for i in 0..3 {
        let mut acc = zero;
        for j in 0..3 {
            acc = acc + g_inv.comp[i][j] * df[j];
        }
        df_up[i] = acc;
    }
    let mut df2 = zero;
    for i in 0..3 {
        df2 = df2 + df_up[i] * df[i];
    }
    let phi2 = phi.sq();
    let w = phi2 * df2 + T::one();
    let sqrt_w = w.sqrt();

    let mut v = [zero; 3];
    for i in 0..3 {
        v[i] = phi * df_up[i] / sqrt_w;
    }

    let mut gbar = Sym2Jet::zero();
    for i in 0..3 {
        for j in 0..3 {
            gbar.comp[i][j] = g.comp[i][j] + phi2 * df[i] * df[j];
        }
    }
    let gbar_inv = curvature::inverse_jets(&gbar)?;

    let hess = curvature::hessian_jets(&g, &f)?;
    let dphi = [
        phi.derivative_jet(0),
        phi.derivative_jet(1),
        phi.derivative_jet(2),
    ];
    let mut h = Sym2Jet::zero();
    for i in 0..3 {
        for j in 0..3 {
            h.comp[i][j] = (phi * hess[i][j] + df[i] * dphi[j] + dphi[i] * df[j]) / sqrt_w;
        }
    }

    let mut q = [zero; 3];
    for j in 0..3 {
        let mut acc = zero;
        for i in 0..3 {
            acc = acc + v[i] * (h.comp[i][j] - k.comp[i][j]);
        }
        q[j] = acc;
    }

    Ok(DeformedGeometry {
        order,
        g,
        g_inv,
        k,
        f,
        phi,
        w,
        gbar,
        gbar_inv,
        v,
        h,
        q,
    })
}

impl<T: Real> DeformedGeometry<T> {
    pub fn gbar_values(&self) -> Mat3<T> {
        self.gbar.values()
    }

    pub fn gbar_inv_values(&self) -> Mat3<T> {
        self.gbar_inv.values()
    }

    pub fn h_values(&self) -> Mat3<T> {
        self.h.values()
    }

    pub fn v_values(&self) -> Vec3<T> {
        [self.v[0].value, self.v[1].value, self.v[2].value]
    }

    pub fn q_values(&self) -> Vec3<T> {
        [self.q[0].value, self.q[1].value, self.q[2].value]
    }

    pub fn w_value(&self) -> T {
        self.w.value
    }

    /// `|vbar|^2_gbar`.
    pub fn vbar_norm2(&self) -> T {
        linalg::bilinear(&self.gbar_values(), &self.v_values(), &self.v_values())
    }

    /// `|(1 - phi^2 |df|^2_gbar)(1 + phi^2 |df|^2_g) - 1|`, both norms taken
    /// with their own metric.
    pub fn reciprocal_norm_residual(&self) -> T {
        let df = [self.f.grad[0], self.f.grad[1], self.f.grad[2]];
        let df2_bar = linalg::bilinear(&self.gbar_inv_values(), &df, &df);
        let phi2 = self.phi.value * self.phi.value;
        ((T::one() - phi2 * df2_bar) * self.w_value() - T::one()).abs()
    }

    /// The `gbar` representation of the second fundamental form,
    /// `(phi Hessbar f + df dphi + dphi df - phi^2 <df, dphi>_gbar df df)
    ///  / (1 - phi^2 |df|^2_gbar)^{1/2}`,
    /// which must agree with the `g` representation.
    pub fn hbar_representation(&self) -> Result<Mat3<T>> {
        let (hess_bar, _) = curvature::hessian_laplacian(&self.gbar, &self.f)?;
        let gbar_inv = self.gbar_inv_values();
        let df = [self.f.grad[0], self.f.grad[1], self.f.grad[2]];
        let dphi = [self.phi.grad[0], self.phi.grad[1], self.phi.grad[2]];
        let phi = self.phi.value;
        let phi2 = phi * phi;
        let df_dphi_bar = linalg::bilinear(&gbar_inv, &df, &dphi);
        let df2_bar = linalg::bilinear(&gbar_inv, &df, &df);
        let denom = (T::one() - phi2 * df2_bar).sqrt();
        let mut out = [[T::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = (phi * hess_bar[i][j] + df[i] * dphi[j] + dphi[i] * df[j]
                    - phi2 * df_dphi_bar * df[i] * df[j])
                    / denom;
            }
        }
        Ok(out)
    }
}

/// `tr_gbar(h - k)`: the generalized Jang residual at the point.
pub fn generalized_jang_residual<T: Real>(geom: &DeformedGeometry<T>) -> T {
    let gbar_inv = geom.gbar_inv_values();
    let h = geom.h_values();
    let k = geom.k.values();
    let mut diff = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            diff[i][j] = h[i][j] - k[i][j];
        }
    }
    linalg::trace_sym2(&gbar_inv, &diff)
}

pub fn generalized_jang_residual_at<T: Real>(
    data: &CauchyData<T>,
    pair: &JangPair<T>,
    p: Point3<T>,
) -> Result<T> {
    Ok(generalized_jang_residual(&deformation_at_point(
        data, pair, p, 1,
    )?))
}

/// One named residual with the tolerance it was tested against.
#[derive(Clone, Debug)]
pub struct ResidualEntry<T> {
    pub name: String,
    pub value: T,
    pub tolerance: T,
}

impl<T: Real> ResidualEntry<T> {
    pub fn pass(&self) -> bool {
        self.value.abs() <= self.tolerance
    }
}

#[derive(Clone, Debug)]
pub struct ResidualVector<T> {
    pub entries: Vec<ResidualEntry<T>>,
}

impl<T> Default for ResidualVector<T> {
    fn default() -> Self {
        Self {
            entries: Vec::new(),
        }
    }
}

impl<T: Real> ResidualVector<T> {
    pub fn push(&mut self, name: impl Into<String>, value: T, tolerance: T) {
        self.entries.push(ResidualEntry {
            name: name.into(),
            value,
            tolerance,
        });
    }

    pub fn max_abs(&self) -> T {
        self.entries
            .iter()
            .fold(T::zero(), |m, e| m.max(e.value.abs()))
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass())
    }
}

/// Scalar jet of `g^{ij} t_ij` from component jets.
fn trace_jets<T: Real>(g_inv: &Sym2Jet<T>, t: &Sym2Jet<T>) -> ScalarJet<T> {
    let mut acc = ScalarJet::constant(T::zero());
    for i in 0..3 {
        for j in 0..3 {
            acc = acc + g_inv.comp[i][j] * t.comp[i][j];
        }
    }
    acc
}

/// Helper carrying every contraction the identity suite needs for one
/// arbitrary symmetric test tensor.
struct IdentityWork<T: Real> {
    v: Vec3<T>,
    gbar_inv_v: Mat3<T>,
    h_v: Mat3<T>,
    kt_v: Mat3<T>,
    gamma: [[[T; 3]; 3]; 3],
    gamma_bar: [[[T; 3]; 3]; 3],
    /// `(grad_bar phi / phi)^j` (upper, barred).
    dphi_over_phi_up: Vec3<T>,
    /// `k(vbar, .)_j` and `h(vbar, .)_j`.
    kv: Vec3<T>,
    hv: Vec3<T>,
    kvv: T,
    hvv: T,
    vbar2: T,
    tr_bar_h: T,
}

impl<T: Real> IdentityWork<T> {
    fn build(geom: &DeformedGeometry<T>, kt: &Sym2Jet<T>) -> Result<Self> {
        let v = geom.v_values();
        let gbar_v = geom.gbar_values();
        let gbar_inv_v = geom.gbar_inv_values();
        let vbar2 = linalg::bilinear(&gbar_v, &v, &v);
        let h_v = geom.h_values();
        let kt_v = kt.values();
        let gamma = curvature::christoffel(&geom.g)?.gamma;
        let gamma_bar = curvature::christoffel(&geom.gbar)?.gamma;
        let phi = geom.phi.value;
        if phi.abs() < eps_phi() {
            return Err(Error::NonPositivePhi {
                phi: phi.to_f64().unwrap_or(f64::NAN),
            });
        }
        let dphi = [geom.phi.grad[0], geom.phi.grad[1], geom.phi.grad[2]];
        let dphi_up = linalg::mat_vec(&gbar_inv_v, &dphi);
        let dphi_over_phi_up = [dphi_up[0] / phi, dphi_up[1] / phi, dphi_up[2] / phi];
        let mut kv = [T::zero(); 3];
        let mut hv = [T::zero(); 3];
        for j in 0..3 {
            for i in 0..3 {
                kv[j] = kv[j] + v[i] * kt_v[i][j];
                hv[j] = hv[j] + v[i] * h_v[i][j];
            }
        }
        let kvv = linalg::bilinear(&kt_v, &v, &v);
        let hvv = linalg::bilinear(&h_v, &v, &v);
        let tr_bar_h = linalg::trace_sym2(&gbar_inv_v, &h_v);
        Ok(Self {
            v,
            gbar_inv_v,
            h_v,
            kt_v,
            gamma,
            gamma_bar,
            dphi_over_phi_up,
            kv,
            hv,
            kvv,
            hvv,
            vbar2,
            tr_bar_h,
        })
    }

    /// `k(vbar, grad_bar phi / phi)`.
    fn k_v_dphi(&self) -> T {
        let mut acc = T::zero();
        for j in 0..3 {
            acc = acc + self.kv[j] * self.dphi_over_phi_up[j];
        }
        // kv has a lower index; contract against the upper-index vector.
        // (kv_j is already k_ij v^i, so this is k(vbar, dphi^bar)/phi.)
        acc
    }

    /// `<h(vbar,.), k(vbar,.)>_gbar`.
    fn hv_dot_kv(&self) -> T {
        linalg::bilinear(&self.gbar_inv_v, &self.hv, &self.kv)
    }

    /// `(nabla_bar_vbar k)(vbar, vbar)`.
    fn nabla_v_kvv(&self, kt: &Sym2Jet<T>) -> T {
        let mut acc = T::zero();
        for m in 0..3 {
            for a in 0..3 {
                for b in 0..3 {
                    let mut cov = kt.d1(a, b, m);
                    for c in 0..3 {
                        cov = cov
                            - self.gamma_bar[m][a][c] * self.kt_v[c][b]
                            - self.gamma_bar[m][b][c] * self.kt_v[a][c];
                    }
                    acc = acc + self.v[m] * cov * self.v[a] * self.v[b];
                }
            }
        }
        acc
    }
}

/// Residuals of the eight conversion identities, evaluated for an arbitrary
/// symmetric test tensor `k_test`.  Each entry is `|LHS - RHS|` with every
/// barred object built from `gbar` and every unbarred one from `g`.
pub fn appendix_identities_residuals<T: Real>(
    data: &CauchyData<T>,
    pair: &JangPair<T>,
    k_test: &dyn Sym2Field<T>,
    p: Point3<T>,
    tol: T,
) -> Result<ResidualVector<T>> {
    let geom = deformation_at_point(data, pair, p, 2)?;
    let kt = k_test.jet(p, 1)?;
    let work = IdentityWork::build(&geom, &kt)?;
    let g_inv_v = linalg::inverse3(&geom.g.values())?;
    let mut out = ResidualVector::default();

    // Identity 1: (tr_g k)^2 - |k|_g^2 against barred quantities.
    {
        let tr_g = linalg::trace_sym2(&g_inv_v, &work.kt_v);
        let n_g = linalg::norm2_sym2(&g_inv_v, &work.kt_v);
        let lhs = tr_g * tr_g - n_g;
        let tr_bar = linalg::trace_sym2(&work.gbar_inv_v, &work.kt_v);
        let n_bar = linalg::norm2_sym2(&work.gbar_inv_v, &work.kt_v);
        let kv2 = linalg::bilinear(&work.gbar_inv_v, &work.kv, &work.kv);
        let rhs = tr_bar * tr_bar - n_bar + T::two() * work.kvv * tr_bar - T::two() * kv2;
        out.push("identity-1", lhs - rhs, tol);
    }

    // Identity 2: v(tr_g k) = vbar(tr_gbar k + k(vbar, vbar)).
    {
        let tr_g_jet = trace_jets(&geom.g_inv, &kt);
        let mut lhs = T::zero();
        for i in 0..3 {
            lhs = lhs + work.v[i] * tr_g_jet.grad[i];
        }
        let mut kvv_jet = ScalarJet::constant(T::zero());
        for i in 0..3 {
            for j in 0..3 {
                kvv_jet = kvv_jet + kt.comp[i][j] * geom.v[i] * geom.v[j];
            }
        }
        let bar_jet = trace_jets(&geom.gbar_inv, &kt) + kvv_jet;
        let mut rhs = T::zero();
        for i in 0..3 {
            rhs = rhs + work.v[i] * bar_jet.grad[i];
        }
        out.push("identity-2", lhs - rhs, tol);
    }

    // Identity 3: Gammabar_ij^k - Gamma_ij^k = h_ij v^k - phi f_i f_j phi^{bar k}.
    {
        let phi = geom.phi.value;
        let dphi = [geom.phi.grad[0], geom.phi.grad[1], geom.phi.grad[2]];
        let dphi_bar_up = linalg::mat_vec(&work.gbar_inv_v, &dphi);
        let df = [geom.f.grad[0], geom.f.grad[1], geom.f.grad[2]];
        let mut worst = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let lhs = work.gamma_bar[i][j][k] - work.gamma[i][j][k];
                    let rhs = work.h_v[i][j] * work.v[k] - phi * df[i] * df[j] * dphi_bar_up[k];
                    worst = worst.max((lhs - rhs).abs());
                }
            }
        }
        out.push("identity-3", worst, tol);
    }

    let div_k_v = {
        let div = curvature::divergence_sym2(&geom.g, &kt)?;
        let mut acc = T::zero();
        for j in 0..3 {
            acc = acc + div[j] * work.v[j];
        }
        acc
    };
    let div_bar_k_v = {
        let div = curvature::divergence_sym2(&geom.gbar, &kt)?;
        let mut acc = T::zero();
        for j in 0..3 {
            acc = acc + div[j] * work.v[j];
        }
        acc
    };
    let nabla_v_kvv = work.nabla_v_kvv(&kt);
    let k_v_dphi = work.k_v_dphi();
    let hv_dot_kv = work.hv_dot_kv();
    let h_dot_k = {
        let mut acc = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                for a in 0..3 {
                    for b in 0..3 {
                        acc = acc
                            + work.gbar_inv_v[i][a]
                                * work.gbar_inv_v[j][b]
                                * work.h_v[i][j]
                                * work.kt_v[a][b];
                    }
                }
            }
        }
        acc
    };
    // div_bar(k(vbar, .)) via covector jets.
    let div_bar_kv = {
        let zero = ScalarJet::constant(T::zero());
        let mut omega = [zero; 3];
        for j in 0..3 {
            let mut acc = zero;
            for i in 0..3 {
                acc = acc + geom.v[i] * kt.comp[i][j];
            }
            omega[j] = acc;
        }
        curvature::divergence_covector(&geom.gbar, &omega)?
    };
    // vbar(k(vbar, vbar)).
    let vbar_of_kvv = {
        let mut kvv_jet = ScalarJet::constant(T::zero());
        for i in 0..3 {
            for j in 0..3 {
                kvv_jet = kvv_jet + kt.comp[i][j] * geom.v[i] * geom.v[j];
            }
        }
        let mut acc = T::zero();
        for i in 0..3 {
            acc = acc + work.v[i] * kvv_jet.grad[i];
        }
        acc
    };

    // Identity 4.
    {
        let rhs = div_bar_k_v + nabla_v_kvv - T::two() * work.vbar2 * k_v_dphi
            + hv_dot_kv
            + T::two() * work.hvv * work.kvv
            + work.tr_bar_h * work.kvv;
        out.push("identity-4", div_k_v - rhs, tol);
    }

    // Identity 5: nabla_bar_j (v-flat)_i = h_ij + v_i h(vbar,.)_j - phi_i v_j / phi.
    {
        let zero = ScalarJet::constant(T::zero());
        let mut v_flat = [zero; 3];
        for i in 0..3 {
            let mut acc = zero;
            for a in 0..3 {
                acc = acc + geom.gbar.comp[i][a] * geom.v[a];
            }
            v_flat[i] = acc;
        }
        let phi = geom.phi.value;
        let dphi = [geom.phi.grad[0], geom.phi.grad[1], geom.phi.grad[2]];
        let mut worst = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                let mut lhs = v_flat[i].grad[j];
                for c in 0..3 {
                    lhs = lhs - work.gamma_bar[j][i][c] * v_flat[c].value;
                }
                let rhs = work.h_v[i][j] + v_flat[i].value * work.hv[j]
                    - dphi[i] * v_flat[j].value / phi;
                worst = worst.max((lhs - rhs).abs());
            }
        }
        out.push("identity-5", worst, tol);
    }

    // Identity 6.
    {
        let rhs = div_bar_kv - h_dot_k - hv_dot_kv + k_v_dphi;
        out.push("identity-6", div_bar_k_v - rhs, tol);
    }

    // Identity 7.
    {
        let rhs = vbar_of_kvv - T::two() * hv_dot_kv - T::two() * work.hvv * work.kvv
            + T::two() * work.vbar2 * k_v_dphi;
        out.push("identity-7", nabla_v_kvv - rhs, tol);
    }

    // Identity 8.
    {
        let rhs = div_bar_kv + vbar_of_kvv + k_v_dphi
            - h_dot_k
            - T::two() * hv_dot_kv
            + work.tr_bar_h * work.kvv;
        out.push("identity-8", div_k_v - rhs, tol);
    }

    Ok(out)
}

/// Both sides of the generalized Schoen-Yau identity at a point.
#[derive(Clone, Copy, Debug)]
pub struct SchoenYauSides<T> {
    /// Scalar curvature of `gbar`, computed directly from the chain-rule
    /// jet of `gbar` through the curvature pipeline.
    pub rbar_direct: T,
    /// The identity's right-hand side, assembled from constraint and
    /// deformation quantities.
    pub rhs: T,
}

impl<T: Real> SchoenYauSides<T> {
    pub fn residual(&self) -> T {
        (self.rbar_direct - self.rhs).abs()
    }
}

/// Evaluate both sides of
/// `Rbar = 16 pi (mu - J(v)) + |h-k|^2_gbar + 2|q|^2_gbar
///         - (2/phi) div_bar(phi q)
///         + (tr_gbar h)^2 - (tr_gbar k)^2
///         + 2 vbar(tr_gbar h - tr_gbar k)
///         + 2 k(vbar,vbar) (tr_gbar h - tr_gbar k)`.
pub fn schoen_yau_sides<T: Real>(
    data: &CauchyData<T>,
    pair: &JangPair<T>,
    p: Point3<T>,
) -> Result<SchoenYauSides<T>> {
    let geom = deformation_at_point(data, pair, p, 2)?;
    if geom.phi.value < eps_phi() {
        return Err(Error::NonPositivePhi {
            phi: geom.phi.value.to_f64().unwrap_or(f64::NAN),
        });
    }
    let rbar_direct = curvature::riemann_ricci_scalar(&geom.gbar)?.scalar;

    let em = constraints::energy_momentum_from_jets(&geom.g, &geom.k)?;
    let v = geom.v_values();
    let jv = em.j[0] * v[0] + em.j[1] * v[1] + em.j[2] * v[2];

    let gbar_inv_v = geom.gbar_inv_values();
    let h_v = geom.h_values();
    let k_v = geom.k.values();
    let mut diff = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            diff[i][j] = h_v[i][j] - k_v[i][j];
        }
    }
    let hk2 = linalg::norm2_sym2(&gbar_inv_v, &diff);
    let qv = geom.q_values();
    let q2 = linalg::bilinear(&gbar_inv_v, &qv, &qv);

    let zero = ScalarJet::constant(T::zero());
    let mut phi_q = [zero; 3];
    for j in 0..3 {
        phi_q[j] = geom.phi * geom.q[j];
    }
    let div_phi_q = curvature::divergence_covector(&geom.gbar, &phi_q)?;

    let tr_h = linalg::trace_sym2(&gbar_inv_v, &h_v);
    let tr_k = linalg::trace_sym2(&gbar_inv_v, &k_v);
    let s_jet = trace_jets(&geom.gbar_inv, &geom.h) - trace_jets(&geom.gbar_inv, &geom.k);
    let mut vbar_s = T::zero();
    for i in 0..3 {
        vbar_s = vbar_s + v[i] * s_jet.grad[i];
    }
    let kvv = linalg::bilinear(&k_v, &v, &v);

    let rhs = T::sixteen_pi() * (em.mu - jv) + hk2 + T::two() * q2
        - T::two() / geom.phi.value * div_phi_q
        + tr_h * tr_h
        - tr_k * tr_k
        + T::two() * vbar_s
        + T::two() * kvv * (tr_h - tr_k);

    Ok(SchoenYauSides { rbar_direct, rhs })
}

pub fn schoen_yau_residual<T: Real>(
    data: &CauchyData<T>,
    pair: &JangPair<T>,
    p: Point3<T>,
) -> Result<T> {
    Ok(schoen_yau_sides(data, pair, p)?.residual())
}

/// The reduced identity, valid where `tr_gbar(h - k) = 0`.
#[derive(Clone, Copy, Debug)]
pub struct ReducedIdentity<T> {
    pub rbar_direct: T,
    pub rhs: T,
    /// The three individually nonnegative pieces of the right-hand side.
    pub energy_term: T,
    pub hk_term: T,
    pub q_term: T,
    pub residual: T,
}

/// `|Rbar - [16 pi (mu - J(v)) + |h-k|^2 + 2|q|^2 - (2/phi) div_bar(phi q)]|`
/// at a point where the generalized Jang equation holds to `jang_tol`.
pub fn jang_reduced_residual<T: Real>(
    data: &CauchyData<T>,
    pair: &JangPair<T>,
    p: Point3<T>,
    jang_tol: T,
) -> Result<ReducedIdentity<T>> {
    let geom = deformation_at_point(data, pair, p, 2)?;
    let jang = generalized_jang_residual(&geom);
    if jang.abs() > jang_tol {
        return Err(Error::Precondition(format!(
            "generalized Jang residual {jang:?} exceeds {jang_tol:?}; the reduced identity only holds on solutions"
        )));
    }
    if geom.phi.value < eps_phi() {
        return Err(Error::NonPositivePhi {
            phi: geom.phi.value.to_f64().unwrap_or(f64::NAN),
        });
    }
    let rbar_direct = curvature::riemann_ricci_scalar(&geom.gbar)?.scalar;
    let em = constraints::energy_momentum_from_jets(&geom.g, &geom.k)?;
    let v = geom.v_values();
    let jv = em.j[0] * v[0] + em.j[1] * v[1] + em.j[2] * v[2];
    let gbar_inv_v = geom.gbar_inv_values();
    let h_v = geom.h_values();
    let k_v = geom.k.values();
    let mut diff = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            diff[i][j] = h_v[i][j] - k_v[i][j];
        }
    }
    let hk2 = linalg::norm2_sym2(&gbar_inv_v, &diff);
    let qv = geom.q_values();
    let q2 = linalg::bilinear(&gbar_inv_v, &qv, &qv);
    let zero = ScalarJet::constant(T::zero());
    let mut phi_q = [zero; 3];
    for j in 0..3 {
        phi_q[j] = geom.phi * geom.q[j];
    }
    let div_phi_q = curvature::divergence_covector(&geom.gbar, &phi_q)?;
    let energy_term = T::sixteen_pi() * (em.mu - jv);
    let q_term = T::two() * q2;
    let rhs = energy_term + hk2 + q_term - T::two() / geom.phi.value * div_phi_q;
    Ok(ReducedIdentity {
        rbar_direct,
        rhs,
        energy_term,
        hk_term: hk2,
        q_term,
        residual: (rbar_direct - rhs).abs(),
    })
}

/// `div_bar(phi q)` and the static-spacetime divergence
/// `div_ST(q) = (1/phi) div_bar(phi q)`.
#[derive(Clone, Copy, Debug)]
pub struct ZeroDivergence<T> {
    pub div_phi_q: T,
    pub div_st_q: T,
}

pub fn zero_divergence_residual<T: Real>(
    data: &CauchyData<T>,
    pair: &JangPair<T>,
    p: Point3<T>,
) -> Result<ZeroDivergence<T>> {
    let geom = deformation_at_point(data, pair, p, 2)?;
    if geom.phi.value < eps_phi() {
        return Err(Error::NonPositivePhi {
            phi: geom.phi.value.to_f64().unwrap_or(f64::NAN),
        });
    }
    let zero = ScalarJet::constant(T::zero());
    let mut phi_q = [zero; 3];
    for j in 0..3 {
        phi_q[j] = geom.phi * geom.q[j];
    }
    let div_phi_q = curvature::divergence_covector(&geom.gbar, &phi_q)?;
    Ok(ZeroDivergence {
        div_phi_q,
        div_st_q: div_phi_q / geom.phi.value,
    })
}

/// Mean curvature of the level set of `level` through `p`, under `gbar`,
/// computed two ways: from the transformation formula in terms of `g`
/// quantities, and directly from the level-set operator under `gbar`.
pub fn mean_curvature_transform<T: Real>(
    data: &CauchyData<T>,
    pair: &JangPair<T>,
    level: &dyn ScalarField<T>,
    p: Point3<T>,
) -> Result<(T, T)> {
    let geom = deformation_at_point(data, pair, p, 2)?;
    let w_jet = level.jet(p, 2)?;

    // Quantities of the surface under g.
    let g_v = geom.g.values();
    let (nu_low, nu_up) = curvature::level_set_normal(&geom.g, &w_jet)?;
    let h_surface = curvature::level_set_mean_curvature(&geom.g, &w_jet)?;
    let g_inv_v = linalg::inverse3(&g_v)?;

    let v = geom.v_values();
    let nu_dot_v = nu_low[0] * v[0] + nu_low[1] * v[1] + nu_low[2] * v[2];

    // Tangential gradient of f and the correction vector.  The trace over
    // the deformed induced metric contracts the tangential part of the
    // deformation, so the correction vector carries the tangential
    // normalization `(1 + phi^2 |grad_S f|^2)^{-1/2}`; it coincides with
    // tan_S(v) exactly when f restricts to a constant on the surface.
    let df = [geom.f.grad[0], geom.f.grad[1], geom.f.grad[2]];
    let df_up = linalg::mat_vec(&g_inv_v, &df);
    let nu_f = nu_low[0] * df_up[0] + nu_low[1] * df_up[1] + nu_low[2] * df_up[2];
    let mut grad_sigma_f = [T::zero(); 3];
    for i in 0..3 {
        grad_sigma_f[i] = df_up[i] - nu_f * nu_up[i];
    }
    let grad_sigma_f2 = linalg::bilinear(&g_v, &grad_sigma_f, &grad_sigma_f);
    let phi_val = geom.phi.value;
    let tangential_norm = (T::one() + phi_val * phi_val * grad_sigma_f2).sqrt();
    let mut t_vec = [T::zero(); 3];
    for i in 0..3 {
        t_vec[i] = phi_val * grad_sigma_f[i] / tangential_norm;
    }

    // Second fundamental form of the level set under g applied to T:
    // II(X, Y) = Hess(level)(X, Y) / |grad level|_g for tangent X, Y.
    let (hess_w, _) = curvature::hessian_laplacian(&geom.g, &w_jet)?;
    let grad_w_norm = linalg::bilinear(&g_inv_v, &w_jet.grad, &w_jet.grad).sqrt();
    let two_ff = |x: &Vec3<T>, y: &Vec3<T>| {
        let mut acc = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                acc = acc + hess_w[i][j] * x[i] * y[j];
            }
        }
        acc / grad_w_norm
    };

    let h_v = geom.h_values();
    let mut tr_sigma_h = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            tr_sigma_h = tr_sigma_h + (g_inv_v[i][j] - nu_up[i] * nu_up[j]) * h_v[i][j];
        }
    }
    let h_tt = linalg::bilinear(&h_v, &t_vec, &t_vec);
    let ii_tt = two_ff(&t_vec, &t_vec);
    let t2 = linalg::bilinear(&g_v, &t_vec, &t_vec);

    let phi = phi_val;
    let dphi = [geom.phi.grad[0], geom.phi.grad[1], geom.phi.grad[2]];
    let dphi_up = linalg::mat_vec(&g_inv_v, &dphi);
    let nu_phi = nu_low[0] * dphi_up[0] + nu_low[1] * dphi_up[1] + nu_low[2] * dphi_up[2];
    let df_dphi = linalg::bilinear(&g_inv_v, &df, &dphi);
    let w = geom.w_value();

    // Prefactor (1 + phi^2 |grad f|^2) / (1 + phi^2 |grad_S f|^2).
    let w_sigma = T::one() + phi * phi * grad_sigma_f2;
    let a = w / w_sigma;
    let formula = a.sqrt()
        * ((h_surface - ii_tt) - (tr_sigma_h - h_tt) * nu_dot_v
            + phi * grad_sigma_f2
                * (T::one() - t2)
                * (nu_phi - phi * phi * nu_f * df_dphi / w));

    let direct = curvature::level_set_mean_curvature(&geom.gbar, &w_jet)?;
    Ok((formula, direct))
}

/// `h(nu, nu) = nabla_nu(phi^2 df)(nu) / (phi^2 + |phi^2 df|_g^2)^{1/2}`,
/// which stays finite as `phi -> 0` with `phi^2 df` smooth and nonzero.
/// `nu` is any nonvanishing normal direction (upper components); it is
/// normalized internally with respect to `g`.
pub fn boundary_hnn<T: Real>(
    data: &CauchyData<T>,
    pair: &JangPair<T>,
    p: Point3<T>,
    nu_dir: Vec3<T>,
) -> Result<T> {
    let g = data.g.jet(p, 1)?;
    let f = pair.f.jet(p, 2)?;
    let phi = pair.phi.jet(p, 1)?;
    let g_v = g.values();
    let g_inv_v = linalg::inverse3(&g_v)?;

    let len2 = linalg::bilinear(&g_v, &nu_dir, &nu_dir);
    if len2 < T::of(1e-24) {
        return Err(Error::VanishingGradient);
    }
    let len = len2.sqrt();
    let nu = [nu_dir[0] / len, nu_dir[1] / len, nu_dir[2] / len];

    // gamma_j = (phi^2 f_j) as jets of the product field.
    let phi2 = phi.sq();
    let gamma_jets = [
        phi2 * f.derivative_jet(0),
        phi2 * f.derivative_jet(1),
        phi2 * f.derivative_jet(2),
    ];
    let gamma_v = [
        gamma_jets[0].value,
        gamma_jets[1].value,
        gamma_jets[2].value,
    ];
    let christoffel = curvature::christoffel(&g)?.gamma;

    // nabla_nu gamma (nu) = nu^i nu^j (gamma_j,i - Gamma_ij^k gamma_k).
    let mut num = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            let mut cov = gamma_jets[j].grad[i];
            for k in 0..3 {
                cov = cov - christoffel[i][j][k] * gamma_v[k];
            }
            num = num + nu[i] * nu[j] * cov;
        }
    }
    let gamma2 = linalg::bilinear(&g_inv_v, &gamma_v, &gamma_v);
    let denom2 = phi.value * phi.value + gamma2;
    if denom2 < T::of(1e-28) {
        return Err(Error::Precondition(
            "both phi and phi^2 df vanish; h(nu, nu) is undetermined here".into(),
        ));
    }
    Ok(num / denom2.sqrt())
}

/// On a level set of `f`, the combination
/// `<nu, v> H - tr_S(k) + (h - k)(nu, nu) / (1 + phi^2 |df|^2)`
/// which re-derives `tr_gbar(h - k)` and must therefore vanish on solutions
/// of the generalized Jang equation.
#[derive(Clone, Copy, Debug)]
pub struct BlowupRelation<T> {
    pub expression: T,
    pub trbar_h_minus_k: T,
}

pub fn blowup_level_set_relation<T: Real>(
    data: &CauchyData<T>,
    pair: &JangPair<T>,
    p: Point3<T>,
    jang_tol: T,
) -> Result<BlowupRelation<T>> {
    let geom = deformation_at_point(data, pair, p, 2)?;
    let trbar = generalized_jang_residual(&geom);
    if trbar.abs() > jang_tol {
        return Err(Error::Precondition(format!(
            "generalized Jang residual {trbar:?} exceeds {jang_tol:?} at the probe point"
        )));
    }
    let (nu_low, nu_up) = curvature::level_set_normal(&geom.g, &geom.f)?;
    let h_sigma = curvature::level_set_mean_curvature(&geom.g, &geom.f)?;
    let g_inv_v = linalg::inverse3(&geom.g.values())?;
    let k_v = geom.k.values();
    let mut tr_sigma_k = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            tr_sigma_k = tr_sigma_k + (g_inv_v[i][j] - nu_up[i] * nu_up[j]) * k_v[i][j];
        }
    }
    let v = geom.v_values();
    let nu_dot_v = nu_low[0] * v[0] + nu_low[1] * v[1] + nu_low[2] * v[2];
    let h_v = geom.h_values();
    let mut hknn = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            hknn = hknn + (h_v[i][j] - k_v[i][j]) * nu_up[i] * nu_up[j];
        }
    }
    let expression = nu_dot_v * h_sigma - tr_sigma_k + hknn / geom.w_value();
    Ok(BlowupRelation {
        expression,
        trbar_h_minus_k: trbar,
    })
}

/// Sampled boundary behavior on a horizon surface: the sups of `|phi|` and
/// of `|<nu, v> - sign(tr_S(k))|` over the surface nodes (with the
/// convention that `sign(0)` asks for `v -> 0`).
#[derive(Clone, Copy, Debug)]
pub struct BoundaryReport<T> {
    pub sup_phi: T,
    pub sup_normal_deviation: T,
    pub samples: usize,
}

pub fn boundary_condition_check<T: Real>(
    data: &CauchyData<T>,
    pair: &JangPair<T>,
    surface: &Surface<T>,
    grid: &SphereGrid,
    class_tol: T,
) -> Result<BoundaryReport<T>> {
    let nodes = surface.nodes(grid)?;
    let mut sup_phi = T::zero();
    let mut sup_dev = T::zero();
    for node in &nodes {
        let expansion = constraints::surface_expansion(data, surface, node.point, class_tol)?;
        let horizon_like = expansion.is(SurfaceClass::GeneralizedApparentHorizon)
            || expansion.is(SurfaceClass::FutureApparentHorizon)
            || expansion.is(SurfaceClass::PastApparentHorizon)
            || expansion.is(SurfaceClass::FutureAndPastApparentHorizon);
        if !horizon_like {
            return Err(Error::Precondition(format!(
                "surface point is not a generalized apparent horizon within {class_tol:?} (H = {:?}, tr_S k = {:?})",
                expansion.h, expansion.trk
            )));
        }
        let geom = deformation_limit(data, pair, node.point, 1)?;
        sup_phi = sup_phi.max(geom.phi.value.abs());
        let (nu_low, _) = curvature::level_set_normal(&geom.g, &surface.level_jet(node.point, 1)?)?;
        let v = geom.v_values();
        let nu_dot_v = nu_low[0] * v[0] + nu_low[1] * v[1] + nu_low[2] * v[2];
        let target = if expansion.trk.abs() <= class_tol {
            T::zero()
        } else {
            expansion.trk.signum()
        };
        sup_dev = sup_dev.max((nu_dot_v - target).abs());
    }
    Ok(BoundaryReport {
        sup_phi,
        sup_normal_deviation: sup_dev,
        samples: nodes.len(),
    })
}

/// The deformed metric `gbar = g + phi^2 df^2` packaged as a tensor field,
/// with jets assembled by the chain rule from jets of `g`, `f` and `phi`.
pub struct DeformedMetric<T: Real> {
    pub g: Arc<dyn Sym2Field<T>>,
    pub f: Arc<dyn ScalarField<T>>,
    pub phi: Arc<dyn ScalarField<T>>,
}

impl<T: Real> DeformedMetric<T> {
    pub fn new(data: &CauchyData<T>, pair: &JangPair<T>) -> Self {
        Self {
            g: data.g.clone(),
            f: pair.f.clone(),
            phi: pair.phi.clone(),
        }
    }
}

impl<T: Real> Sym2Field<T> for DeformedMetric<T> {
    fn jet(&self, p: Point3<T>, order: usize) -> Result<Sym2Jet<T>> {
        let g = self.g.jet(p, order)?;
        let f = self.f.jet(p, (order + 1).min(3))?;
        let phi = self.phi.jet(p, order)?;
        let phi2 = phi.sq();
        let mut out = Sym2Jet::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.comp[i][j] =
                    g.comp[i][j] + phi2 * f.derivative_jet(i) * f.derivative_jet(j);
            }
        }
        Ok(out)
    }
}

/// The second fundamental form induced by a pair `(f, phi)` over the data's
/// metric, packaged as a tensor field.  Setting `k` to this field makes the
/// pair an exact solution of the generalized Jang equation, which several
/// tests and model constructions rely on.
pub struct InducedH<T: Real> {
    pub g: Arc<dyn Sym2Field<T>>,
    pub f: Arc<dyn ScalarField<T>>,
    pub phi: Arc<dyn ScalarField<T>>,
}

impl<T: Real> Sym2Field<T> for InducedH<T> {
    fn jet(&self, p: Point3<T>, order: usize) -> Result<Sym2Jet<T>> {
        if order > 1 {
            return Err(Error::UnsupportedOrder {
                requested: order,
                supported: 1,
            });
        }
        let g = self.g.jet(p, order + 1)?;
        let f = self.f.jet(p, order + 2)?;
        let phi = self.phi.jet(p, order + 1)?;
        let g_inv = curvature::inverse_jets(&g)?;
        let df = [
            f.derivative_jet(0),
            f.derivative_jet(1),
            f.derivative_jet(2),
        ];
        let dphi = [
            phi.derivative_jet(0),
            phi.derivative_jet(1),
            phi.derivative_jet(2),
        ];
        let zero = ScalarJet::constant(T::zero());
        let mut df2 = zero;
        for i in 0..3 {
            for j in 0..3 {
                df2 = df2 + g_inv.comp[i][j] * df[i] * df[j];
            }
        }
        let sqrt_w = (phi.sq() * df2 + T::one()).sqrt();
        let hess = curvature::hessian_jets(&g, &f)?;
        let mut out = Sym2Jet::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.comp[i][j] = (phi * hess[i][j] + df[i] * dphi[j] + dphi[i] * df[j]) / sqrt_w;
            }
        }
        Ok(out)
    }
}
