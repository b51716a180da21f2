//! Exact Schwarzschild data: the isotropic, standard and Kruskal charts, the
//! exterior isometry between them, and spacelike graph slices of the
//! exterior region realizing equality of the Penrose comparison.

use std::sync::Arc;

use crate::constraints::{Asymptotics, CauchyData, Chart, ChartDomain};
use crate::error::{Error, Result};
use crate::fields::{AnalyticScalar, AnalyticSym2, ScalarField};
use crate::jang::{InducedH, JangPair};
use crate::jet::{radius_jet, ScalarJet};
use crate::real::Real;

/// Mass parameter of the family.
#[derive(Clone, Copy, Debug)]
pub struct SchwarzschildParams<T> {
    pub m: T,
}

impl<T: Real> SchwarzschildParams<T> {
    pub fn new(m: T) -> Result<Self> {
        if !(m > T::zero()) {
            return Err(Error::Domain(format!("mass must be positive, got {m}")));
        }
        Ok(Self { m })
    }
}

/// `alpha(r) = (r - 2m) e^{r/2m - 1}`; `u v = alpha(r)` in the Kruskal chart.
pub fn kruskal_alpha<T: Real>(m: T, r: T) -> T {
    (r - T::two() * m) * (r / (T::two() * m) - T::one()).exp()
}

/// `beta(r) = (8 m^2 / r) e^{1 - r/2m}`; the `du dv` coefficient is `2 beta`.
pub fn kruskal_beta<T: Real>(m: T, r: T) -> T {
    T::of(8.0) * m * m / r * (T::one() - r / (T::two() * m)).exp()
}

/// `alpha'(r) = (r / 2m) e^{r/2m - 1}`.
fn kruskal_alpha_prime<T: Real>(m: T, r: T) -> T {
    r / (T::two() * m) * (r / (T::two() * m) - T::one()).exp()
}

/// Principal branch of the Lambert W function on `[-1/e, inf)`.  A series
/// start near the branch point, Halley iteration elsewhere; the caller
/// polishes the result against its own equation, so a residual-level answer
/// suffices here.
fn lambert_w0<T: Real>(y: T) -> Result<T> {
    let e = T::one().exp();
    let q = e * y + T::one();
    if q < T::zero() {
        if q > -T::of(1e-12) {
            return Ok(-T::one());
        }
        return Err(Error::Domain(format!("Lambert W argument {y} below -1/e")));
    }
    if q < T::of(1e-2) {
        // Branch-point series in p = sqrt(2(ey + 1)).
        let p = (T::two() * q).sqrt();
        return Ok(-T::one() + p - p * p / T::of(3.0)
            + T::of(11.0 / 72.0) * p * p * p);
    }
    let mut w = if y > T::of(2.0) {
        let l = y.ln();
        l - l.ln()
    } else {
        (T::one() + y).ln()
    };
    for _ in 0..200 {
        let ew = w.exp();
        let f = w * ew - y;
        if f.abs() <= T::epsilon() * (y.abs() + T::of(1e-3)) {
            return Ok(w);
        }
        let wp1 = w + T::one();
        let denom = ew * wp1 - (w + T::two()) * f / (T::two() * wp1);
        if denom == T::zero() {
            break;
        }
        let dw = f / denom;
        w = w - dw;
        if dw.abs() <= T::epsilon() * (T::one() + w.abs()) {
            return Ok(w);
        }
    }
    Ok(w)
}

/// Invert `alpha(r) = uv` on `uv > -2m/e`.  The substitution `z = r/2m - 1`
/// turns the equation into `z e^z = uv/2m`, so the principal Lambert branch
/// provides the starting point, then Newton polishes against `alpha`
/// directly to `1e-13 * max(1, |uv|)`.
pub fn r_from_uv<T: Real>(m: T, uv: T) -> Result<T> {
    let boundary = -T::two() * m / T::one().exp();
    if uv <= boundary {
        return Err(Error::Domain(format!(
            "uv = {uv} outside the chart (uv must exceed -2m/e = {boundary})"
        )));
    }
    let z = lambert_w0(uv / (T::two() * m))?;
    let mut r = T::two() * m * (T::one() + z);
    if !(r > T::zero()) {
        r = T::of(1e-12) * m;
    }
    let tol = T::of(1e-13) * T::one().max(uv.abs());
    for _ in 0..100 {
        let f = kruskal_alpha(m, r) - uv;
        if f.abs() <= tol {
            return Ok(r);
        }
        let df = kruskal_alpha_prime(m, r);
        let mut next = r - f / df;
        if !(next > T::zero()) {
            next = r * T::half();
        }
        r = next;
    }
    // Newton can stall only in pathological float corners; fall back to
    // bisection over a generous bracket.
    let (mut lo, mut hi) = (T::of(1e-6) * m, T::of(100.0) * m);
    for _ in 0..200 {
        let mid = (lo + hi) * T::half();
        if kruskal_alpha(m, mid) < uv {
            lo = mid;
        } else {
            hi = mid;
        }
        if (kruskal_alpha(m, mid) - uv).abs() <= tol {
            return Ok(mid);
        }
    }
    Err(Error::NoConvergence(format!(
        "radius inversion failed for uv = {uv}"
    )))
}

/// The exterior isometry into the first Kruskal quadrant:
/// `u = sqrt(alpha) e^{-t/4m}`, `v = sqrt(alpha) e^{t/4m}` for `r > 2m`.
pub fn exterior_isometry<T: Real>(m: T, t: T, r: T) -> Result<(T, T)> {
    if !(r > T::two() * m) {
        return Err(Error::Domain(format!(
            "exterior chart needs r > 2m (r = {r}, m = {m})"
        )));
    }
    let sqrt_alpha = kruskal_alpha(m, r).sqrt();
    let quarter = t / (T::of(4.0) * m);
    Ok((sqrt_alpha * (-quarter).exp(), sqrt_alpha * quarter.exp()))
}

/// Residual of the isometry: pull the `2 beta(r) du dv` block back through
/// finite differences of the chart map and compare with
/// `-(1 - 2m/r) dt^2 + (1 - 2m/r)^{-1} dr^2`.  The spherical factors agree
/// identically (`r` is preserved), so only the 2x2 block is checked.
pub fn exterior_isometry_pullback_residual<T: Real>(m: T, t: T, r: T) -> Result<T> {
    let step_t = T::of(1e-4) * (T::one() + t.abs());
    let step_r = T::of(1e-5) * r;
    // 4th-order central first derivatives of the map (t, r) -> (u, v).
    let d_dt = |g: &dyn Fn(T, T) -> Result<(T, T)>| -> Result<(T, T)> {
        let c1 = T::of(8.0);
        let (up1, vp1) = g(t + step_t, r)?;
        let (um1, vm1) = g(t - step_t, r)?;
        let (up2, vp2) = g(t + T::two() * step_t, r)?;
        let (um2, vm2) = g(t - T::two() * step_t, r)?;
        let denom = T::of(12.0) * step_t;
        Ok((
            (c1 * (up1 - um1) - (up2 - um2)) / denom,
            (c1 * (vp1 - vm1) - (vp2 - vm2)) / denom,
        ))
    };
    let d_dr = |g: &dyn Fn(T, T) -> Result<(T, T)>| -> Result<(T, T)> {
        let c1 = T::of(8.0);
        let (up1, vp1) = g(t, r + step_r)?;
        let (um1, vm1) = g(t, r - step_r)?;
        let (up2, vp2) = g(t, r + T::two() * step_r)?;
        let (um2, vm2) = g(t, r - T::two() * step_r)?;
        let denom = T::of(12.0) * step_r;
        Ok((
            (c1 * (up1 - um1) - (up2 - um2)) / denom,
            (c1 * (vp1 - vm1) - (vp2 - vm2)) / denom,
        ))
    };
    let map = |tt: T, rr: T| exterior_isometry(m, tt, rr);
    let (ut, vt) = d_dt(&map)?;
    let (ur, vr) = d_dr(&map)?;
    let beta = kruskal_beta(m, r);
    // Pullback of 2 beta du dv: P_ab = beta (u_a v_b + u_b v_a).
    let p_tt = T::two() * beta * ut * vt;
    let p_tr = beta * (ut * vr + ur * vt);
    let p_rr = T::two() * beta * ur * vr;
    let lapse2 = T::one() - T::two() * m / r;
    let worst = (p_tt + lapse2)
        .abs()
        .max(p_tr.abs())
        .max((p_rr - lapse2.recip()).abs());
    Ok(worst)
}

/// Time-symmetric isotropic slice: `g = (1 + m/2r)^4 delta`, `k = 0` on a
/// Cartesian chart.
pub fn isotropic_slice<T: Real>(m: T) -> Result<CauchyData<T>> {
    SchwarzschildParams::new(m)?;
    let g = AnalyticSym2::new(move |x: &[ScalarJet<T>; 3]| {
        let w = (radius_jet(x).recip().scale(m * T::half()) + T::one()).powi(4);
        let zero = ScalarJet::constant(T::zero());
        let mut out = [[zero; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            row[i] = w;
        }
        out
    });
    let mut data = CauchyData::new(Arc::new(g), Arc::new(AnalyticSym2::zero()));
    data.chart = Chart::Cartesian;
    data.domain = ChartDomain::RadiusRange {
        min: T::of(1e-9),
        max: T::of(1e12),
    };
    data.asymptotics = Asymptotics {
        mass_hint: Some(m),
        end_radius: T::of(10.0) * m,
    };
    Ok(data)
}

/// Time-symmetric standard-chart slice on a Cartesian chart:
/// `g_ij = delta_ij + 2m x_i x_j / (r^2 (r - 2m))` for `r > 2m`.
pub fn standard_slice_cartesian<T: Real>(m: T) -> Result<CauchyData<T>> {
    SchwarzschildParams::new(m)?;
    let g = AnalyticSym2::new(move |x: &[ScalarJet<T>; 3]| {
        let r = radius_jet(x);
        let fac = (r - T::two() * m) * r.sq();
        let zero = ScalarJet::constant(T::zero());
        let mut out = [[zero; 3]; 3];
        for i in 0..3 {
            for j in i..3 {
                let mut e = x[i] * x[j] * ScalarJet::constant(T::two() * m) / fac;
                if i == j {
                    e = e + T::one();
                }
                out[i][j] = e;
            }
        }
        out
    });
    let mut data = CauchyData::new(Arc::new(g), Arc::new(AnalyticSym2::zero()));
    data.chart = Chart::Cartesian;
    data.domain = ChartDomain::RadiusRange {
        min: T::two() * m + T::of(1e-9),
        max: T::of(1e12),
    };
    data.asymptotics = Asymptotics {
        mass_hint: Some(m),
        end_radius: T::of(10.0) * m,
    };
    Ok(data)
}

/// The Schwarzschild warping factor `phi0 = sqrt(1 - 2m/r)` on the radial
/// chart.
pub fn lapse_radial<T: Real>(m: T) -> AnalyticScalar<T> {
    AnalyticScalar::new(move |x: &[ScalarJet<T>; 3]| {
        (ScalarJet::constant(T::one()) - x[0].recip().scale(T::two() * m)).sqrt()
    })
}

/// A univariate profile applied to the radial coordinate of a chart.
pub type RadialProfile<T> = Arc<dyn Fn(ScalarJet<T>) -> ScalarJet<T> + Send + Sync>;

/// A spacelike slice of the Schwarzschild exterior, axisymmetric and given
/// as a radial graph `t = F(r)` over the standard chart, restricted to
/// `r_min < r < r_max`.  Radial graphs always meet the chart boundary in a
/// single regime, so the mixed `u = 0` / `v = 0` boundary (which is not a
/// traditional horizon) cannot arise here.
pub struct CoESliceSpec<T: Real> {
    pub graph: RadialProfile<T>,
    pub r_min: T,
    pub r_max: T,
    /// Number of radial samples used for the spacelike validation sweep.
    pub resolution: usize,
}

impl<T: Real> CoESliceSpec<T> {
    pub fn new(graph: RadialProfile<T>, r_min: T, r_max: T) -> Self {
        Self {
            graph,
            r_min,
            r_max,
            resolution: 256,
        }
    }

    /// Time-symmetric slice `t = 0`.
    pub fn time_symmetric(r_min: T, r_max: T) -> Self {
        Self::new(
            Arc::new(|_r: ScalarJet<T>| ScalarJet::constant(T::zero())),
            r_min,
            r_max,
        )
    }

    fn graph_jet(&self, r: T) -> ScalarJet<T> {
        (self.graph)(ScalarJet::variable(0, r))
    }

    /// Kruskal image of the slice point at radius `r`.
    pub fn uv_at(&self, m: T, r: T) -> Result<(T, T)> {
        exterior_isometry(m, self.graph_jet(r).value, r)
    }
}

/// A case-of-equality slice: induced Cauchy data on the radial chart
/// `(r, theta, phi)`, the pair `(f, phi0)` realizing it as a graph, and the
/// ambient warping factor `phi0` separately.
pub struct CoESlice<T: Real> {
    pub data: CauchyData<T>,
    pub pair: JangPair<T>,
    pub phi0: Arc<dyn ScalarField<T>>,
    pub m: T,
}

/// Build the induced data of the graph `t = F(r)`: the slice metric is
/// `g = [(1-2m/r)^{-1} - (1-2m/r) F'^2] dr^2 + r^2 dsigma^2` and `k` is the
/// second fundamental form of the graph, which by construction equals the
/// `h` induced by `(f, phi0) = (F, sqrt(1-2m/r))` over `g`.
pub fn coe_slice<T: Real>(m: T, spec: CoESliceSpec<T>) -> Result<CoESlice<T>> {
    SchwarzschildParams::new(m)?;
    if !(spec.r_min > T::two() * m) {
        return Err(Error::Domain(format!(
            "slice must stay in the exterior: r_min = {} <= 2m",
            spec.r_min
        )));
    }
    // Spacelike sweep: (1-2m/r)^{-1} - (1-2m/r) F'(r)^2 > 0.
    let n = spec.resolution.max(2);
    for i in 0..=n {
        let frac = T::of(i as f64) / T::of(n as f64);
        let r = spec.r_min + (spec.r_max - spec.r_min) * frac;
        let lapse2 = T::one() - T::two() * m / r;
        let fp = self_prime(&spec, r);
        let grr = lapse2.recip() - lapse2 * fp * fp;
        if !(grr > T::zero()) {
            return Err(Error::NotSpacelike {
                r: r.to_f64().unwrap_or(f64::NAN),
            });
        }
    }

    let graph = spec.graph.clone();
    let g = AnalyticSym2::new(move |x: &[ScalarJet<T>; 3]| {
        let r = x[0];
        let lapse2 = ScalarJet::constant(T::one()) - r.recip().scale(T::two() * m);
        let fp = graph(r).derivative_jet(0);
        let grr = lapse2.recip() - lapse2 * fp.sq();
        let zero = ScalarJet::constant(T::zero());
        let mut out = [[zero; 3]; 3];
        out[0][0] = grr;
        out[1][1] = r.sq();
        out[2][2] = r.sq() * x[1].sin().sq();
        out
    });
    let g: Arc<dyn crate::fields::Sym2Field<T>> = Arc::new(g);

    let graph = spec.graph.clone();
    let f: Arc<dyn ScalarField<T>> =
        Arc::new(AnalyticScalar::new(move |x: &[ScalarJet<T>; 3]| graph(x[0])));
    let phi0: Arc<dyn ScalarField<T>> = Arc::new(AnalyticScalar::new(
        move |x: &[ScalarJet<T>; 3]| {
            (ScalarJet::constant(T::one()) - x[0].recip().scale(T::two() * m)).sqrt()
        },
    ));

    let k = InducedH {
        g: g.clone(),
        f: f.clone(),
        phi: phi0.clone(),
    };
    let mut data = CauchyData::new(g, Arc::new(k));
    data.chart = Chart::Radial;
    data.domain = ChartDomain::RadiusRange {
        min: spec.r_min,
        max: spec.r_max,
    };
    data.asymptotics = Asymptotics {
        mass_hint: Some(m),
        end_radius: spec.r_max,
    };
    Ok(CoESlice {
        data,
        pair: JangPair::new(f, phi0.clone()),
        phi0,
        m,
    })
}

fn self_prime<T: Real>(spec: &CoESliceSpec<T>, r: T) -> T {
    spec.graph_jet(r).grad[0]
}

/// Map an isotropic radius to the standard (areal) radius:
/// `r_std = r_iso (1 + m/2 r_iso)^2`.
pub fn standard_radius_from_isotropic<T: Real>(m: T, r_iso: T) -> T {
    let w = T::one() + m / (T::two() * r_iso);
    r_iso * w * w
}

/// Residual of the isometry between the isotropic and standard radial
/// charts at one isotropic radius, using exact univariate jets of the chart
/// map: the pullback of `(1-2m/r_std)^{-1} dr_std^2 + r_std^2 dsigma^2`
/// must reproduce `(1 + m/2r)^4 (dr^2 + r^2 dsigma^2)`.
pub fn iso_standard_pullback_residual<T: Real>(m: T, r_iso: T) -> T {
    let r = ScalarJet::<T>::variable(0, r_iso);
    let w = r.recip().scale(m * T::half()) + T::one();
    let r_std = r * w.sq();
    let dr_std = r_std.grad[0];
    let lapse2 = T::one() - T::two() * m / r_std.value;
    let conf = w.value.powi(4);
    let radial = (dr_std * dr_std / lapse2 - conf).abs();
    let sphere = (r_std.value * r_std.value - conf * r_iso * r_iso).abs();
    radial.max(sphere)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Point3;
    use crate::constraints::energy_momentum_density;
    use crate::curvature;
    use crate::jang;
    use crate::surface::{area, SphereGrid, Surface};

    #[test]
    fn kruskal_function_values() {
        let m: f64 = 1.0;
        assert_eq!(kruskal_alpha(m, 2.0 * m), 0.0);
        assert!((kruskal_beta(m, 2.0 * m) - 4.0 * m).abs() < 1e-15);
        assert!((kruskal_alpha(m, 4.0 * m) - 2.0 * m * std::f64::consts::E).abs() < 1e-14);
    }

    #[test]
    fn radius_inversion_round_trips() {
        let m: f64 = 1.0;
        assert!((r_from_uv(m, 0.0).unwrap() - 2.0 * m).abs() < 1e-13);
        assert!(
            (r_from_uv(m, 2.0 * m * std::f64::consts::E).unwrap() - 4.0 * m).abs() < 1e-12
        );
        for uv in [-0.7, -0.1, 0.3, 1.0, 10.0, 1e4, 3e6] {
            let r = r_from_uv(m, uv).unwrap();
            assert!(
                (kruskal_alpha(m, r) - uv).abs() <= 1e-12 * uv.abs().max(1.0),
                "round trip at uv = {uv}"
            );
        }
    }

    #[test]
    fn radius_monotone_down_to_boundary() {
        // uv -> -2m/e gives r -> 0+ along the monotone branch; compare with
        // a bisection oracle.
        let m: f64 = 0.7;
        let boundary = -2.0 * m / std::f64::consts::E;
        for eps in [1e-2, 1e-4, 1e-6] {
            let uv = boundary + eps;
            let r = r_from_uv(m, uv).unwrap();
            let (mut lo, mut hi) = (1e-12, 2.0 * m);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if kruskal_alpha(m, mid) < uv {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            assert!((r - 0.5 * (lo + hi)).abs() < 1e-9, "eps = {eps}");
            assert!(r < 0.5 * m, "r should approach 0, got {r}");
        }
        assert!(r_from_uv(m, boundary - 1e-9).is_err());
    }

    #[test]
    fn isometry_basic_properties() {
        let m: f64 = 1.3;
        let r = 5.0;
        let (u, v) = exterior_isometry(m, 0.0, r).unwrap();
        assert!((u - v).abs() < 1e-15);
        for t in [-2.0, 0.4, 7.0] {
            let (u, v) = exterior_isometry(m, t, r).unwrap();
            assert!(u > 0.0 && v > 0.0);
            assert!((u * v - kruskal_alpha(m, r)).abs() < 1e-12);
        }
        assert!(exterior_isometry(m, 0.0, 2.0 * m).is_err());
    }

    #[test]
    fn isometry_pullback_matches_static_form() {
        for m in [0.5_f64, 1.0, 2.0] {
            for (t, r) in [(0.0, 3.0 * m), (1.5, 2.5 * m), (-4.0, 8.0 * m)] {
                let res = exterior_isometry_pullback_residual(m, t, r).unwrap();
                assert!(res < 1e-8, "pullback residual {res} at m={m}, t={t}, r={r}");
            }
        }
    }

    #[test]
    fn isotropic_slice_is_vacuum_and_neck_area_matches() {
        let m: f64 = 1.0;
        let data = isotropic_slice(m).unwrap();
        let c = energy_momentum_density(&data, Point3::new(1.2, -0.4, 0.8)).unwrap();
        assert!(c.mu.abs() < 1e-9 && c.margin.abs() < 1e-9);

        // Horizon sphere r = m/2 has area 16 pi m^2.
        let s = Surface::round(Point3::origin(), 0.5 * m);
        let a = area(data.g.as_ref(), &s, &SphereGrid::default()).unwrap();
        assert!(
            (a - 16.0 * std::f64::consts::PI * m * m).abs() < 1e-9,
            "area {a}"
        );
    }

    #[test]
    fn time_symmetric_slice_recovers_standard_data() {
        let m: f64 = 1.0;
        let slice = coe_slice(m, CoESliceSpec::time_symmetric(2.2, 20.0)).unwrap();
        let p = Point3::new(4.0, 1.1, 0.7);
        let g = slice.data.g.jet(p, 0).unwrap().values();
        assert!((g[0][0] - 1.0 / (1.0 - 2.0 * m / 4.0)).abs() < 1e-14);
        assert!((g[1][1] - 16.0).abs() < 1e-14);
        let k = slice.data.k.jet(p, 0).unwrap().values();
        for row in k {
            for e in row {
                assert!(e.abs() < 1e-14, "time-symmetric slice must have k = 0");
            }
        }
        // f is constant along the slice.
        assert_eq!(slice.pair.f.jet(p, 1).unwrap().grad, [0.0; 3]);
    }

    #[test]
    fn boosted_slice_solves_the_jang_equation() {
        // t = a(r - 3m) smoothly cut off: k = h holds by construction, the
        // constraints vanish, and the deformed metric is the standard slice.
        let m: f64 = 1.0;
        let a = 0.35;
        let graph: RadialProfile<f64> = Arc::new(move |r: ScalarJet<f64>| {
            // a (r - 3m) exp(-((r-3m)/4)^2): decays toward both ends.
            let s = r - 3.0 * m;
            s.scale(a) * (-(s.scale(0.25)).sq()).exp()
        });
        let slice = coe_slice(m, CoESliceSpec::new(graph, 2.05, 40.0)).unwrap();
        for p in [
            Point3::new(3.0, 1.2, 0.4),
            Point3::new(5.5, 0.8, 2.0),
            Point3::new(2.4, 1.9, 5.0),
        ] {
            let res = jang::generalized_jang_residual_at(&slice.data, &slice.pair, p).unwrap();
            assert!(res.abs() < 1e-12, "Jang residual {res} at {:?}", p.coords);
            let c = energy_momentum_density(&slice.data, p).unwrap();
            assert!(c.mu.abs() < 1e-6, "mu = {} at {:?}", c.mu, p.coords);
            for j in c.j {
                assert!(j.abs() < 1e-6, "J = {j} at {:?}", p.coords);
            }
            // The reconstructed deformed metric is the standard spatial
            // Schwarzschild slice, which is scalar flat.
            let geom = jang::deformation_at_point(&slice.data, &slice.pair, p, 2).unwrap();
            let rbar = curvature::riemann_ricci_scalar(&geom.gbar).unwrap().scalar;
            assert!(rbar.abs() < 1e-7, "Rbar = {rbar} at {:?}", p.coords);
        }
    }

    #[test]
    fn non_spacelike_slice_rejected() {
        let m: f64 = 1.0;
        let graph: RadialProfile<f64> =
            Arc::new(move |r: ScalarJet<f64>| r.scale(50.0));
        assert!(matches!(
            coe_slice(m, CoESliceSpec::new(graph, 2.5, 10.0)),
            Err(Error::NotSpacelike { .. })
        ));
    }

    #[test]
    fn near_horizon_blowup_asymptotics() {
        // Along a slice with bounded graph function, u and v both vanish at
        // the horizon; with f = 2m log(v/u) + const the Kruskal image obeys
        // u v = alpha(r), and phi^2 = 1 - 2m/r vanishes linearly in uv near
        // the bifurcation while f stays the graph value.
        let m: f64 = 1.0;
        let spec = CoESliceSpec::time_symmetric(2.0 + 1e-3, 10.0);
        // alpha(r) ~ alpha'(2m) (r - 2m) near the horizon.
        for dr in [1e-2, 1e-3, 1e-4] {
            let r: f64 = 2.0 * m + dr;
            let (u, v) = spec.uv_at(m, r).unwrap();
            let phi2 = 1.0 - 2.0 * m / r;
            // phi^2 = (r - 2m)/r and uv = (r-2m) e^{r/2m - 1}: the ratio
            // phi^2/(uv) tends to 1/(2m e^0) = 1/(2m) as r -> 2m.
            let ratio = phi2 / (u * v);
            assert!(
                (ratio - 1.0 / (2.0 * m)).abs() < 1e-2 * (1.0 / (2.0 * m)),
                "linear vanishing ratio {ratio} at dr={dr}"
            );
        }
        // A boosted slice reaching toward the horizon: f = 2m log(v/u)
        // diverges logarithmically when only u -> 0.
        let graph: RadialProfile<f64> = Arc::new(move |r: ScalarJet<f64>| {
            // t = -2m log(alpha(r)) + const: v stays bounded away from zero.
            let alpha = (r - 2.0 * m) * (r.scale(0.5 / m) - 1.0).exp();
            alpha.ln().scale(-2.0 * m)
        });
        let spec = CoESliceSpec::new(graph, 2.0 + 1e-6, 4.0);
        let mut prev_f = f64::NEG_INFINITY;
        for dr in [1e-1, 1e-2, 1e-3] {
            let r = 2.0 * m + dr;
            let (u, v) = spec.uv_at(m, r).unwrap();
            let f = 2.0 * m * (v / u).ln();
            assert!(u > 0.0 && v > 0.0);
            assert!(f > prev_f, "f must diverge upward as u -> 0");
            prev_f = f;
            // v stays order one while u -> 0.
            assert!(v > 0.5 && u < dr.sqrt());
        }
    }

    #[test]
    fn iso_standard_isometry() {
        let m: f64 = 1.0;
        for r_iso in [0.6, 1.0, 3.0, 10.0, 50.0] {
            let res = iso_standard_pullback_residual(m, r_iso);
            assert!(res.abs() < 1e-10 * (1.0 + r_iso * r_iso), "residual {res} at {r_iso}");
        }
        // r_iso = m/2 maps to the horizon r_std = 2m.
        assert!((standard_radius_from_isotropic(m, 0.5 * m) - 2.0 * m).abs() < 1e-15);
    }

    #[test]
    fn alpha_strictly_increasing() {
        let m: f64 = 1.0;
        let mut prev = f64::NEG_INFINITY;
        for i in 1..200 {
            let r = 0.05 * i as f64;
            let a = kruskal_alpha(m, r);
            assert!(a > prev);
            prev = a;
        }
    }
}
