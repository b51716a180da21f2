//! Energy and momentum densities of Cauchy data, the dominant energy
//! condition, and classification of surfaces by mean curvature against the
//! trace of the second fundamental form.

use std::sync::Arc;

use crate::curvature;
use crate::error::{Error, Result};
use crate::fields::{Sym2Field, Sym2Jet};
use crate::jet::Point3;
use crate::linalg::{self, Vec3};
use crate::real::Real;
use crate::surface::Surface;

/// Which chart convention the data lives in.  Cartesian-like charts use
/// `|x|` spheres; radial charts read `(x1, x2, x3)` as `(r, theta, phi)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chart {
    Cartesian,
    Radial,
}

/// Region of the chart on which the data is defined.
#[derive(Clone, Copy, Debug)]
pub enum ChartDomain<T> {
    All,
    /// Chart radius range, interpreted through the chart convention.
    RadiusRange { min: T, max: T },
}

impl<T: Real> ChartDomain<T> {
    pub fn contains(&self, chart: Chart, p: Point3<T>) -> bool {
        match self {
            ChartDomain::All => true,
            ChartDomain::RadiusRange { min, max } => {
                let r = match chart {
                    Chart::Cartesian => p.chart_radius(),
                    Chart::Radial => p.coords[0],
                };
                r >= *min && r <= *max
            }
        }
    }
}

/// Asymptotic metadata for one end.
#[derive(Clone, Copy, Debug)]
pub struct Asymptotics<T> {
    pub mass_hint: Option<T>,
    pub end_radius: T,
}

/// The triple `(M, g, k)`: a chart, a Riemannian metric and a symmetric
/// 2-tensor, with asymptotics metadata.
pub struct CauchyData<T: Real> {
    pub chart: Chart,
    pub domain: ChartDomain<T>,
    pub g: Arc<dyn Sym2Field<T>>,
    pub k: Arc<dyn Sym2Field<T>>,
    pub asymptotics: Asymptotics<T>,
}

impl<T: Real> CauchyData<T> {
    pub fn new(g: Arc<dyn Sym2Field<T>>, k: Arc<dyn Sym2Field<T>>) -> Self {
        Self {
            chart: Chart::Cartesian,
            domain: ChartDomain::All,
            g,
            k,
            asymptotics: Asymptotics {
                mass_hint: None,
                end_radius: T::one(),
            },
        }
    }
}

/// Energy density, momentum density and dominant-energy margin at a point.
#[derive(Clone, Copy, Debug)]
pub struct ConstraintAtPoint<T> {
    pub mu: T,
    pub j: Vec3<T>,
    /// `mu - |J|_g`; nonnegative exactly when the dominant energy condition
    /// holds at the point.
    pub margin: T,
}

/// Constraint quantities from explicit jets:
/// `16 pi mu = R + tr(k)^2 - |k|^2` and `8 pi J = div(k - tr(k) g)`.
pub fn energy_momentum_from_jets<T: Real>(
    g: &Sym2Jet<T>,
    k: &Sym2Jet<T>,
) -> Result<ConstraintAtPoint<T>> {
    let curv = curvature::riemann_ricci_scalar(g)?;
    let g_inv_val = linalg::inverse3(&g.values())?;
    let kv = k.values();
    let trk = linalg::trace_sym2(&g_inv_val, &kv);
    let k2 = linalg::norm2_sym2(&g_inv_val, &kv);
    let mu = (curv.scalar + trk * trk - k2) / T::sixteen_pi();

    // T = k - tr(k) g, assembled with jet arithmetic so its first partials
    // include the derivative of the trace.
    let g_inv = curvature::inverse_jets(g)?;
    let mut trk_jet = crate::jet::ScalarJet::constant(T::zero());
    for i in 0..3 {
        for j in 0..3 {
            trk_jet = trk_jet + g_inv.comp[i][j] * k.comp[i][j];
        }
    }
    let mut t = Sym2Jet::zero();
    for i in 0..3 {
        for j in 0..3 {
            t.comp[i][j] = k.comp[i][j] - trk_jet * g.comp[i][j];
        }
    }
    let div = curvature::divergence_sym2(g, &t)?;
    let eight_pi = T::of(8.0) * T::PI();
    let j_cov = [div[0] / eight_pi, div[1] / eight_pi, div[2] / eight_pi];

    let j_norm = linalg::bilinear(&g_inv_val, &j_cov, &j_cov).max(T::zero()).sqrt();
    Ok(ConstraintAtPoint {
        mu,
        j: j_cov,
        margin: mu - j_norm,
    })
}

/// Constraint quantities of the data at `p`.
pub fn energy_momentum_density<T: Real>(
    data: &CauchyData<T>,
    p: Point3<T>,
) -> Result<ConstraintAtPoint<T>> {
    if !data.domain.contains(data.chart, p) {
        return Err(Error::Domain(format!(
            "point {:?} outside the data domain",
            p.coords
        )));
    }
    let g = data.g.jet(p, 2)?;
    let k = data.k.jet(p, 1)?;
    energy_momentum_from_jets(&g, &k)
}

/// `mu - |J|_g` at `p`.
pub fn dominant_energy_margin<T: Real>(data: &CauchyData<T>, p: Point3<T>) -> Result<T> {
    Ok(energy_momentum_density(data, p)?.margin)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SurfaceClass {
    FutureApparentHorizon,
    PastApparentHorizon,
    FutureAndPastApparentHorizon,
    GeneralizedApparentHorizon,
    GeneralizedTrapped,
    Untrapped,
}

/// Default tolerance for horizon classification, in chart units.
pub fn default_classification_tol<T: Real>() -> T {
    T::of(1e-6)
}

/// Mean curvature, trace of `k` over the surface, and the set of matching
/// classifications at tolerance `eps` (more than one entry when the point
/// sits within tolerance of several defining equations).
#[derive(Clone, Debug)]
pub struct SurfaceExpansion<T> {
    pub h: T,
    pub trk: T,
    pub classes: Vec<SurfaceClass>,
}

impl<T: Real> SurfaceExpansion<T> {
    pub fn is(&self, class: SurfaceClass) -> bool {
        self.classes.contains(&class)
    }

    pub fn ambiguous(&self) -> bool {
        self.classes.len() > 1
    }
}

/// Classify a surface point of the data: `H` is the level-set mean curvature
/// and `tr_S(k) = (g^{ij} - nu^i nu^j) k_ij` with `nu` the outward unit
/// normal.  `|H + trk| < eps` marks a future horizon, `|H - trk| < eps` a
/// past horizon, both a future-and-past horizon, `|H - |trk|| < eps` a
/// generalized horizon, and otherwise the sign of `H - |trk|` separates
/// generalized trapped from untrapped.
pub fn surface_expansion<T: Real>(
    data: &CauchyData<T>,
    surface: &Surface<T>,
    p: Point3<T>,
    eps: T,
) -> Result<SurfaceExpansion<T>> {
    let g = data.g.jet(p, 1)?;
    let k = data.k.jet(p, 0)?;
    let level = surface.level_jet(p, 2)?;
    let h = curvature::level_set_mean_curvature(&g, &level)?;
    let (_, nu_up) = curvature::level_set_normal(&g, &level)?;

    let g_inv = linalg::inverse3(&g.values())?;
    let kv = k.values();
    let mut trk = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            trk = trk + (g_inv[i][j] - nu_up[i] * nu_up[j]) * kv[i][j];
        }
    }

    let future = (h + trk).abs() < eps;
    let past = (h - trk).abs() < eps;
    let generalized = (h - trk.abs()).abs() < eps;
    let mut classes = Vec::new();
    if future && past {
        classes.push(SurfaceClass::FutureAndPastApparentHorizon);
    } else {
        if future {
            classes.push(SurfaceClass::FutureApparentHorizon);
        }
        if past {
            classes.push(SurfaceClass::PastApparentHorizon);
        }
        if generalized {
            classes.push(SurfaceClass::GeneralizedApparentHorizon);
        }
    }
    if classes.is_empty() {
        classes.push(if h < trk.abs() - eps {
            SurfaceClass::GeneralizedTrapped
        } else {
            SurfaceClass::Untrapped
        });
    }
    Ok(SurfaceExpansion { h, trk, classes })
}
