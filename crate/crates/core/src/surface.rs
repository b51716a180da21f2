//! Sphere-topology surfaces and quadrature of surface integrals.
//!
//! Surfaces are latitude-longitude parameterized: Gauss-Legendre nodes in
//! `u = cos(theta)` and a uniform (trapezoidal, spectrally accurate) grid in
//! longitude.  The area element comes from the induced metric at each node,
//! so the same machinery integrates with respect to `g` or `gbar`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{ScalarField, Sym2Field};
use crate::jet::{radius_jet, Point3, ScalarJet};
use crate::linalg::{self, Vec3};
use crate::real::Real;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre<T: Real>(n: usize) -> Vec<(T, T)> {
    assert!(n >= 2);
    let mut out = Vec::with_capacity(n);
    let nf = T::of(n as f64);
    for i in 1..=n {
        // Tricomi-style initial guess.
        let mut x = (T::PI() * (T::of(i as f64) - T::of(0.25)) / (nf + T::half())).cos();
        for _ in 0..100 {
            // Evaluate P_n and P_n' by upward recurrence.
            let mut p0 = T::one();
            let mut p1 = x;
            for k in 2..=n {
                let kf = T::of(k as f64);
                let p2 = ((T::two() * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = nf * (x * p1 - p0) / (x * x - T::one());
            let dx = p1 / dp;
            x = x - dx;
            if dx.abs() < T::epsilon() * T::of(4.0) {
                break;
            }
        }
        // Weight 2 / ((1 - x^2) P_n'(x)^2).
        let mut p0 = T::one();
        let mut p1 = x;
        for k in 2..=n {
            let kf = T::of(k as f64);
            let p2 = ((T::two() * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = nf * (x * p1 - p0) / (x * x - T::one());
        let w = T::two() / ((T::one() - x * x) * dp * dp);
        out.push((x, w));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite nodes"));
    out
}

/// Quadrature resolution for latitude-longitude surface grids.
#[derive(Clone, Copy, Debug)]
pub struct SphereGrid {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for SphereGrid {
    fn default() -> Self {
        Self {
            n_theta: 64,
            n_phi: 128,
        }
    }
}

/// One quadrature node of a parameterized surface.
#[derive(Clone, Copy, Debug)]
pub struct SurfaceNode<T> {
    pub point: Point3<T>,
    /// Product quadrature weight for the `(u, phi)` parameter measure.
    pub weight: T,
    /// Chart tangent `dp/du`.
    pub t_u: [T; 3],
    /// Chart tangent `dp/dphi`.
    pub t_phi: [T; 3],
}

/// A closed sphere-topology surface over a chart.
pub enum Surface<T: Real> {
    /// Coordinate sphere `|x - center| = radius` in a Cartesian-like chart.
    Round { center: Point3<T>, radius: T },
    /// Coordinate sphere `x1 = radius` in a radial chart `(r, theta, phi)`.
    ChartRadial { radius: T },
    /// Star-shaped level set `field = iso`, located by radial root finding
    /// from `center` within the bracket `radii`.
    LevelSet {
        field: Arc<dyn ScalarField<T>>,
        iso: T,
        center: Point3<T>,
        radii: (T, T),
    },
}

impl<T: Real> Surface<T> {
    pub fn round(center: Point3<T>, radius: T) -> Self {
        Surface::Round { center, radius }
    }

    /// Jet of the scalar whose level set this surface is.
    pub fn level_jet(&self, p: Point3<T>, order: usize) -> Result<ScalarJet<T>> {
        match self {
            Surface::Round { center, .. } => {
                let xs = ScalarJet::coords(p);
                let c = *center;
                let shifted = [
                    xs[0] - c.coords[0],
                    xs[1] - c.coords[1],
                    xs[2] - c.coords[2],
                ];
                Ok(radius_jet(&shifted).truncated(order))
            }
            Surface::ChartRadial { .. } => Ok(ScalarJet::coords(p)[0].truncated(order)),
            Surface::LevelSet { field, .. } => field.jet(p, order),
        }
    }

    /// Quadrature nodes covering the surface.
    pub fn nodes(&self, grid: &SphereGrid) -> Result<Vec<SurfaceNode<T>>> {
        let lat = gauss_legendre::<T>(grid.n_theta);
        let n_phi = grid.n_phi;
        let w_phi = T::two() * T::PI() / T::of(n_phi as f64);
        let mut nodes = Vec::with_capacity(grid.n_theta * n_phi);
        for &(u, w_u) in &lat {
            let s = (T::one() - u * u).sqrt();
            for jp in 0..n_phi {
                let phi = T::two() * T::PI() * T::of(jp as f64) / T::of(n_phi as f64);
                let (sp, cp) = (phi.sin(), phi.cos());
                let nhat = [s * cp, s * sp, u];
                let dn_du = [-(u / s) * cp, -(u / s) * sp, T::one()];
                let dn_dphi = [-s * sp, s * cp, T::zero()];
                let weight = w_u * w_phi;
                let node = match self {
                    Surface::Round { center, radius } => {
                        let rho = *radius;
                        let point = Point3::new(
                            center.coords[0] + rho * nhat[0],
                            center.coords[1] + rho * nhat[1],
                            center.coords[2] + rho * nhat[2],
                        );
                        SurfaceNode {
                            point,
                            weight,
                            t_u: [rho * dn_du[0], rho * dn_du[1], rho * dn_du[2]],
                            t_phi: [rho * dn_dphi[0], rho * dn_dphi[1], rho * dn_dphi[2]],
                        }
                    }
                    Surface::ChartRadial { radius } => {
                        // theta = acos(u): d(theta)/du = -1/sin(theta).
                        let theta = u.acos();
                        SurfaceNode {
                            point: Point3::new(*radius, theta, phi),
                            weight,
                            t_u: [T::zero(), -s.recip(), T::zero()],
                            t_phi: [T::zero(), T::zero(), T::one()],
                        }
                    }
                    Surface::LevelSet {
                        field,
                        iso,
                        center,
                        radii,
                    } => {
                        let rho = radial_root(field.as_ref(), *iso, *center, nhat, *radii)?;
                        let point = Point3::new(
                            center.coords[0] + rho * nhat[0],
                            center.coords[1] + rho * nhat[1],
                            center.coords[2] + rho * nhat[2],
                        );
                        let grad = field.jet(point, 1)?.grad;
                        let gn = dot3(&grad, &nhat);
                        if gn.abs() < T::of(1e-14) {
                            return Err(Error::VanishingGradient);
                        }
                        let rho_u = -rho * dot3(&grad, &dn_du) / gn;
                        let rho_phi = -rho * dot3(&grad, &dn_dphi) / gn;
                        let mut t_u = [T::zero(); 3];
                        let mut t_phi = [T::zero(); 3];
                        for a in 0..3 {
                            t_u[a] = rho_u * nhat[a] + rho * dn_du[a];
                            t_phi[a] = rho_phi * nhat[a] + rho * dn_dphi[a];
                        }
                        SurfaceNode {
                            point,
                            weight,
                            t_u,
                            t_phi,
                        }
                    }
                };
                nodes.push(node);
            }
        }
        Ok(nodes)
    }
}

fn dot3<T: Real>(a: &[T; 3], b: &[T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Find `rho` in the bracket with `field(center + rho * nhat) = iso` by
/// bisection.
fn radial_root<T: Real>(
    field: &dyn ScalarField<T>,
    iso: T,
    center: Point3<T>,
    nhat: [T; 3],
    bracket: (T, T),
) -> Result<T> {
    let eval = |rho: T| -> Result<T> {
        let p = Point3::new(
            center.coords[0] + rho * nhat[0],
            center.coords[1] + rho * nhat[1],
            center.coords[2] + rho * nhat[2],
        );
        Ok(field.value(p)? - iso)
    };
    let (mut lo, mut hi) = bracket;
    let mut flo = eval(lo)?;
    let fhi = eval(hi)?;
    if flo == T::zero() {
        return Ok(lo);
    }
    if fhi == T::zero() {
        return Ok(hi);
    }
    if flo * fhi > T::zero() {
        return Err(Error::NoConvergence(
            "level-set value does not change sign over the radial bracket".into(),
        ));
    }
    for _ in 0..200 {
        let mid = (lo + hi) * T::half();
        let fmid = eval(mid)?;
        if fmid == T::zero() || (hi - lo) * T::half() < T::of(1e-15) * mid.abs().max(T::one()) {
            return Ok(mid);
        }
        if flo * fmid < T::zero() {
            hi = mid;
        } else {
            lo = mid;
            flo = fmid;
        }
    }
    Ok((lo + hi) * T::half())
}

/// Integrate `integrand * dA` over the nodes, with the area element induced
/// by the tensor field `g`.
pub fn integrate<T: Real>(
    g: &dyn Sym2Field<T>,
    nodes: &[SurfaceNode<T>],
    mut integrand: impl FnMut(&SurfaceNode<T>) -> Result<T>,
) -> Result<T> {
    let mut acc = T::zero();
    for node in nodes {
        let gv = g.jet(node.point, 0)?.values();
        let e = linalg::bilinear(&gv, &node.t_u, &node.t_u);
        let f = linalg::bilinear(&gv, &node.t_u, &node.t_phi);
        let gg = linalg::bilinear(&gv, &node.t_phi, &node.t_phi);
        let da = (e * gg - f * f).sqrt();
        if !da.is_finite() {
            return Err(Error::NonFinite {
                context: "surface area element",
            });
        }
        acc = acc + node.weight * da * integrand(node)?;
    }
    Ok(acc)
}

/// Area of the surface under the metric field `g`.
pub fn area<T: Real>(g: &dyn Sym2Field<T>, surface: &Surface<T>, grid: &SphereGrid) -> Result<T> {
    let nodes = surface.nodes(grid)?;
    integrate(g, &nodes, |_| Ok(T::one()))
}

/// `\int H^2 dA` over the surface, with `H` the level-set mean curvature of
/// the surface's defining function under `g`.
pub fn mean_curvature_sq_integral<T: Real>(
    g: &dyn Sym2Field<T>,
    surface: &Surface<T>,
    grid: &SphereGrid,
) -> Result<T> {
    let nodes = surface.nodes(grid)?;
    integrate(g, &nodes, |node| {
        let gj = g.jet(node.point, 1)?;
        let s = surface.level_jet(node.point, 2)?;
        let h = crate::curvature::level_set_mean_curvature(&gj, &s)?;
        Ok(h * h)
    })
}

/// Outward unit normal (lower and upper components) of the surface at `p`.
pub fn unit_normal<T: Real>(
    g: &dyn Sym2Field<T>,
    surface: &Surface<T>,
    p: Point3<T>,
) -> Result<(Vec3<T>, Vec3<T>)> {
    let gj = g.jet(p, 0)?;
    let s = surface.level_jet(p, 1)?;
    crate::curvature::level_set_normal(&gj, &s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{AnalyticScalar, AnalyticSym2};

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let nodes = gauss_legendre::<f64>(8);
        let total: f64 = nodes.iter().map(|&(_, w)| w).sum();
        assert!((total - 2.0).abs() < 1e-14);
        // Exact for degree <= 15: try x^10.
        let int_x10: f64 = nodes.iter().map(|&(x, w)| w * x.powi(10)).sum();
        assert!((int_x10 - 2.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn flat_sphere_area() {
        let g = AnalyticSym2::<f64>::flat();
        let s = Surface::round(Point3::origin(), 2.0);
        let a = area(&g, &s, &SphereGrid::default()).unwrap();
        assert!((a - 16.0 * std::f64::consts::PI).abs() < 1e-9, "area {a}");
    }

    #[test]
    fn chart_radial_sphere_area() {
        // Radial chart metric diag(1, r^2, r^2 sin^2 theta): coordinate
        // spheres have area 4 pi r^2.
        let g = AnalyticSym2::new(|x: &[ScalarJet<f64>; 3]| {
            let zero = ScalarJet::constant(0.0);
            let mut out = [[zero; 3]; 3];
            out[0][0] = ScalarJet::constant(1.0);
            out[1][1] = x[0].sq();
            out[2][2] = x[0].sq() * x[1].sin().sq();
            out
        });
        let s = Surface::ChartRadial { radius: 3.0 };
        let a = area(&g, &s, &SphereGrid::default()).unwrap();
        assert!((a - 36.0 * std::f64::consts::PI).abs() < 1e-8, "area {a}");
    }

    #[test]
    fn level_set_sphere_matches_round_sphere() {
        let g = AnalyticSym2::<f64>::flat();
        let field = Arc::new(AnalyticScalar::new(|x: &[ScalarJet<f64>; 3]| {
            radius_jet(x)
        }));
        let s = Surface::LevelSet {
            field,
            iso: 1.5,
            center: Point3::origin(),
            radii: (0.5, 3.0),
        };
        let a = area(&g, &s, &SphereGrid::default()).unwrap();
        assert!((a - 9.0 * std::f64::consts::PI).abs() < 1e-8);
    }

    #[test]
    fn willmore_integrand_of_flat_sphere() {
        // For a round sphere of radius rho in flat space,
        // int H^2 dA = (2/rho)^2 * 4 pi rho^2 = 16 pi.
        let g = AnalyticSym2::<f64>::flat();
        let s = Surface::round(Point3::origin(), 1.7);
        let w = mean_curvature_sq_integral(&g, &s, &SphereGrid::default()).unwrap();
        assert!((w - 16.0 * std::f64::consts::PI).abs() < 1e-8);
    }
}
