//! Field providers: scalar and symmetric 2-tensor fields over a chart that
//! report jets at points.
//!
//! Two backends exist.  Closed-form fields are closures over seeded
//! coordinate jets and give derivatives exact to rounding.  Finite-difference
//! fields wrap a plain point sampler and build the jet from central-difference
//! stencils; they serve as the independent oracle everything else is checked
//! against.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jet::{Point3, ScalarJet, MAX_ORDER};
use crate::real::Real;

/// A scalar field able to produce its jet at chart points.
pub trait ScalarField<T: Real>: Send + Sync {
    fn jet(&self, p: Point3<T>, order: usize) -> Result<ScalarJet<T>>;

    fn value(&self, p: Point3<T>) -> Result<T> {
        Ok(self.jet(p, 0)?.value)
    }
}

/// A symmetric 2-tensor field able to produce component jets.
pub trait Sym2Field<T: Real>: Send + Sync {
    fn jet(&self, p: Point3<T>, order: usize) -> Result<Sym2Jet<T>>;
}

/// Component jets of a symmetric 2-tensor; `comp[i][j]` is the jet of the
/// `(i,j)` component, with `comp[i][j] = comp[j][i]` by construction.
#[derive(Clone, Copy, Debug)]
pub struct Sym2Jet<T> {
    pub comp: [[ScalarJet<T>; 3]; 3],
}

impl<T: Real> Sym2Jet<T> {
    pub fn from_upper(entries: [[ScalarJet<T>; 3]; 3]) -> Self {
        let mut comp = entries;
        for i in 0..3 {
            for j in 0..i {
                comp[i][j] = comp[j][i];
            }
        }
        Self { comp }
    }

    pub fn zero() -> Self {
        Self {
            comp: [[ScalarJet::constant(T::zero()); 3]; 3],
        }
    }

    pub fn values(&self) -> [[T; 3]; 3] {
        let mut m = [[T::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = self.comp[i][j].value;
            }
        }
        m
    }

    /// First coordinate partial `∂_k T_ij`.
    pub fn d1(&self, i: usize, j: usize, k: usize) -> T {
        self.comp[i][j].grad[k]
    }

    /// Second coordinate partial `∂_k ∂_l T_ij`.
    pub fn d2(&self, i: usize, j: usize, k: usize, l: usize) -> T {
        self.comp[i][j].hess[k][l]
    }

    pub fn order(&self) -> usize {
        self.comp
            .iter()
            .flatten()
            .map(|j| j.order())
            .min()
            .unwrap_or(0)
    }

    pub fn is_finite(&self) -> bool {
        self.comp.iter().flatten().all(|j| j.is_finite())
    }
}

/// Closed-form scalar field defined by a jet expression.
pub struct AnalyticScalar<T: Real> {
    expr: Arc<dyn Fn(&[ScalarJet<T>; 3]) -> ScalarJet<T> + Send + Sync>,
}

impl<T: Real> Clone for AnalyticScalar<T> {
    fn clone(&self) -> Self {
        Self {
            expr: self.expr.clone(),
        }
    }
}

impl<T: Real> AnalyticScalar<T> {
    pub fn new(expr: impl Fn(&[ScalarJet<T>; 3]) -> ScalarJet<T> + Send + Sync + 'static) -> Self {
        Self {
            expr: Arc::new(expr),
        }
    }

    pub fn constant(c: T) -> Self {
        Self::new(move |_| ScalarJet::constant(c))
    }
}

impl<T: Real> ScalarField<T> for AnalyticScalar<T> {
    fn jet(&self, p: Point3<T>, order: usize) -> Result<ScalarJet<T>> {
        check_order(order, MAX_ORDER)?;
        let j = (self.expr)(&ScalarJet::coords(p)).truncated(order);
        ensure_finite_scalar(&j)
    }
}

/// Closed-form symmetric 2-tensor field defined by a jet expression for each
/// component (only the upper triangle of the returned array is read).
pub struct AnalyticSym2<T: Real> {
    expr: Arc<dyn Fn(&[ScalarJet<T>; 3]) -> [[ScalarJet<T>; 3]; 3] + Send + Sync>,
}

impl<T: Real> Clone for AnalyticSym2<T> {
    fn clone(&self) -> Self {
        Self {
            expr: self.expr.clone(),
        }
    }
}

impl<T: Real> AnalyticSym2<T> {
    pub fn new(
        expr: impl Fn(&[ScalarJet<T>; 3]) -> [[ScalarJet<T>; 3]; 3] + Send + Sync + 'static,
    ) -> Self {
        Self {
            expr: Arc::new(expr),
        }
    }

    /// The flat metric `delta_ij`.
    pub fn flat() -> Self {
        Self::new(|_| {
            let mut m = [[ScalarJet::constant(T::zero()); 3]; 3];
            for (i, row) in m.iter_mut().enumerate() {
                row[i] = ScalarJet::constant(T::one());
            }
            m
        })
    }

    pub fn zero() -> Self {
        Self::new(|_| [[ScalarJet::constant(T::zero()); 3]; 3])
    }
}

impl<T: Real> Sym2Field<T> for AnalyticSym2<T> {
    fn jet(&self, p: Point3<T>, order: usize) -> Result<Sym2Jet<T>> {
        check_order(order, MAX_ORDER)?;
        let raw = (self.expr)(&ScalarJet::coords(p));
        let mut comp = raw;
        for i in 0..3 {
            for j in 0..3 {
                comp[i][j] = raw[i.min(j)][i.max(j)].truncated(order);
            }
        }
        let jet = Sym2Jet { comp };
        if !jet.is_finite() {
            return Err(Error::NonFinite {
                context: "analytic tensor field",
            });
        }
        Ok(jet)
    }
}

fn check_order(requested: usize, supported: usize) -> Result<()> {
    if requested > supported {
        return Err(Error::UnsupportedOrder {
            requested,
            supported,
        });
    }
    Ok(())
}

fn ensure_finite_scalar<T: Real>(j: &ScalarJet<T>) -> Result<ScalarJet<T>> {
    if j.is_finite() {
        Ok(*j)
    } else {
        Err(Error::NonFinite {
            context: "scalar field jet",
        })
    }
}

/// Accuracy order of the central-difference stencils.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StencilOrder {
    Second,
    Fourth,
}

impl StencilOrder {
    pub fn accuracy(&self) -> usize {
        match self {
            StencilOrder::Second => 2,
            StencilOrder::Fourth => 4,
        }
    }

    /// Offsets and weights for the k-th derivative, to be divided by h^k.
    fn stencil<T: Real>(&self, deriv: usize) -> Vec<(i32, T)> {
        let w = |pairs: &[(i32, f64)]| {
            pairs
                .iter()
                .map(|&(o, c)| (o, T::of(c)))
                .collect::<Vec<_>>()
        };
        match (self, deriv) {
            (StencilOrder::Second, 1) => w(&[(-1, -0.5), (1, 0.5)]),
            (StencilOrder::Second, 2) => w(&[(-1, 1.0), (0, -2.0), (1, 1.0)]),
            (StencilOrder::Second, 3) => w(&[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)]),
            (StencilOrder::Fourth, 1) => w(&[
                (-2, 1.0 / 12.0),
                (-1, -8.0 / 12.0),
                (1, 8.0 / 12.0),
                (2, -1.0 / 12.0),
            ]),
            (StencilOrder::Fourth, 2) => w(&[
                (-2, -1.0 / 12.0),
                (-1, 16.0 / 12.0),
                (0, -30.0 / 12.0),
                (1, 16.0 / 12.0),
                (2, -1.0 / 12.0),
            ]),
            (StencilOrder::Fourth, 3) => w(&[
                (-3, 0.125),
                (-2, -1.0),
                (-1, 1.625),
                (1, -1.625),
                (2, 1.0),
                (3, -0.125),
            ]),
            _ => unreachable!("derivative order 1..=3"),
        }
    }
}

/// Default finite-difference step in chart units.
pub fn default_fd_step<T: Real>() -> T {
    T::of(1e-3)
}

/// Central-difference jet of a plain point sampler.
///
/// This is the independent oracle used by the residual tests: it never sees
/// closed-form derivatives, only samples.  Its error scales as
/// `step^accuracy` for smooth samplers.
pub fn fd_jet_oracle<T: Real>(
    sampler: &dyn Fn(Point3<T>) -> T,
    p: Point3<T>,
    order: usize,
    step: T,
    stencil: StencilOrder,
) -> Result<ScalarJet<T>> {
    check_order(order, MAX_ORDER)?;
    if !(step > T::zero()) {
        return Err(Error::StepUnderflow {
            step: step.to_f64().unwrap_or(f64::NAN),
        });
    }
    for c in p.coords {
        if c.abs() + step == c.abs() {
            return Err(Error::StepUnderflow {
                step: step.to_f64().unwrap_or(f64::NAN),
            });
        }
    }

    let value = sampler(p);
    if order == 0 {
        return ensure_finite_scalar(&ScalarJet::constant(value).truncated(0));
    }

    // Every stencil has weights summing to zero, so differencing against the
    // center sample is exact; it also makes constants produce exact zeros.
    let at = |offsets: [i32; 3]| -> T {
        if offsets == [0, 0, 0] {
            return T::zero();
        }
        let mut q = p;
        for (axis, &o) in offsets.iter().enumerate() {
            q.coords[axis] = q.coords[axis] + T::of(o as f64) * step;
        }
        sampler(q) - value
    };

    let d1 = stencil.stencil::<T>(1);
    let d2 = stencil.stencil::<T>(2);
    let d3 = stencil.stencil::<T>(3);
    let h = step;

    let mut grad = [T::zero(); 3];
    for axis in 0..3 {
        let mut acc = T::zero();
        for &(o, c) in &d1 {
            let mut off = [0i32; 3];
            off[axis] = o;
            acc = acc + c * at(off);
        }
        grad[axis] = acc / h;
    }

    let mut hess = [[T::zero(); 3]; 3];
    if order >= 2 {
        for i in 0..3 {
            let mut acc = T::zero();
            for &(o, c) in &d2 {
                let mut off = [0i32; 3];
                off[i] = o;
                acc = acc + c * at(off);
            }
            hess[i][i] = acc / (h * h);
        }
        for i in 0..3 {
            for j in (i + 1)..3 {
                let mut acc = T::zero();
                for &(oi, ci) in &d1 {
                    for &(oj, cj) in &d1 {
                        let mut off = [0i32; 3];
                        off[i] = oi;
                        off[j] = oj;
                        acc = acc + ci * cj * at(off);
                    }
                }
                let v = acc / (h * h);
                hess[i][j] = v;
                hess[j][i] = v;
            }
        }
    }

    let mut third = [[[T::zero(); 3]; 3]; 3];
    if order >= 3 {
        let h3 = h * h * h;
        // Pure derivatives d^3/dx_i^3.
        for i in 0..3 {
            let mut acc = T::zero();
            for &(o, c) in &d3 {
                let mut off = [0i32; 3];
                off[i] = o;
                acc = acc + c * at(off);
            }
            third[i][i][i] = acc / h3;
        }
        // Repeated-index derivatives d^3/dx_i^2 dx_j, i != j.
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    continue;
                }
                let mut acc = T::zero();
                for &(oi, ci) in &d2 {
                    for &(oj, cj) in &d1 {
                        let mut off = [0i32; 3];
                        off[i] = oi;
                        off[j] = oj;
                        acc = acc + ci * cj * at(off);
                    }
                }
                let v = acc / h3;
                third[i][i][j] = v;
                third[i][j][i] = v;
                third[j][i][i] = v;
            }
        }
        // Fully mixed derivative d^3/dx_1 dx_2 dx_3.
        let mut acc = T::zero();
        for &(o1, c1) in &d1 {
            for &(o2, c2) in &d1 {
                for &(o3, c3) in &d1 {
                    acc = acc + c1 * c2 * c3 * at([o1, o2, o3]);
                }
            }
        }
        let v = acc / h3;
        for perm in [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ] {
            third[perm[0]][perm[1]][perm[2]] = v;
        }
    }

    ensure_finite_scalar(&ScalarJet::raw(order, value, grad, hess, third))
}

/// Finite-difference scalar field wrapping a point sampler.
pub struct FdScalar<T: Real> {
    sampler: Arc<dyn Fn(Point3<T>) -> T + Send + Sync>,
    pub step: T,
    pub stencil: StencilOrder,
}

impl<T: Real> Clone for FdScalar<T> {
    fn clone(&self) -> Self {
        Self {
            sampler: self.sampler.clone(),
            step: self.step,
            stencil: self.stencil,
        }
    }
}

impl<T: Real> FdScalar<T> {
    pub fn new(sampler: impl Fn(Point3<T>) -> T + Send + Sync + 'static) -> Self {
        Self {
            sampler: Arc::new(sampler),
            step: default_fd_step(),
            stencil: StencilOrder::Fourth,
        }
    }

    pub fn with_step(mut self, step: T) -> Self {
        self.step = step;
        self
    }

    pub fn with_stencil(mut self, stencil: StencilOrder) -> Self {
        self.stencil = stencil;
        self
    }
}

impl<T: Real> ScalarField<T> for FdScalar<T> {
    fn jet(&self, p: Point3<T>, order: usize) -> Result<ScalarJet<T>> {
        fd_jet_oracle(&*self.sampler, p, order, self.step, self.stencil)
    }
}

/// Finite-difference symmetric 2-tensor field wrapping a component sampler.
pub struct FdSym2<T: Real> {
    sampler: Arc<dyn Fn(Point3<T>) -> [[T; 3]; 3] + Send + Sync>,
    pub step: T,
    pub stencil: StencilOrder,
}

impl<T: Real> FdSym2<T> {
    pub fn new(sampler: impl Fn(Point3<T>) -> [[T; 3]; 3] + Send + Sync + 'static) -> Self {
        Self {
            sampler: Arc::new(sampler),
            step: default_fd_step(),
            stencil: StencilOrder::Fourth,
        }
    }

    pub fn with_step(mut self, step: T) -> Self {
        self.step = step;
        self
    }
}

impl<T: Real> Sym2Field<T> for FdSym2<T> {
    fn jet(&self, p: Point3<T>, order: usize) -> Result<Sym2Jet<T>> {
        let mut comp = [[ScalarJet::constant(T::zero()); 3]; 3];
        for i in 0..3 {
            for j in i..3 {
                let sampler = self.sampler.clone();
                let f = move |q: Point3<T>| sampler(q)[i][j];
                let jet = fd_jet_oracle(&f, p, order, self.step, self.stencil)?;
                comp[i][j] = jet;
                comp[j][i] = jet;
            }
        }
        Ok(Sym2Jet { comp })
    }
}
