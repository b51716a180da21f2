//! Truncated Taylor data ("jets") of scalar fields on a 3-dimensional chart.
//!
//! A [`ScalarJet`] carries the value of a field at a point together with its
//! coordinate partial derivatives up to a requested order (at most three).
//! Jets form a commutative ring with division away from zero, and all of the
//! elementary functions used by the geometric formulas in this crate
//! (`sqrt`, `exp`, `ln`, `sin`, `cos`, powers) propagate through them by the
//! chain rule.  Seeding the three coordinate jets at a point and evaluating a
//! closed-form expression therefore produces derivatives that are exact to
//! rounding, which is what every residual check in the higher modules relies
//! on.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::real::Real;

/// Highest derivative order a jet can carry.
pub const MAX_ORDER: usize = 3;

/// A point of a 3-dimensional coordinate chart (geometrized units).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point3<T> {
    pub coords: [T; 3],
}

impl<T: Real> Point3<T> {
    pub fn new(x1: T, x2: T, x3: T) -> Self {
        Self {
            coords: [x1, x2, x3],
        }
    }

    pub fn origin() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    /// Euclidean chart distance to the chart origin.
    pub fn chart_radius(&self) -> T {
        let [x, y, z] = self.coords;
        (x * x + y * y + z * z).sqrt()
    }
}

/// Value and partial derivatives of a scalar field at a point.
///
/// Derivative arrays above `order` are kept at zero.  `hess` is symmetric and
/// `third` is symmetric in all index pairs by construction.
#[derive(Clone, Copy, Debug)]
pub struct ScalarJet<T> {
    order: usize,
    pub value: T,
    pub grad: [T; 3],
    pub hess: [[T; 3]; 3],
    pub third: [[[T; 3]; 3]; 3],
}

fn zero3<T: Real>() -> [T; 3] {
    [T::zero(); 3]
}

fn zero33<T: Real>() -> [[T; 3]; 3] {
    [[T::zero(); 3]; 3]
}

fn zero333<T: Real>() -> [[[T; 3]; 3]; 3] {
    [[[T::zero(); 3]; 3]; 3]
}

impl<T: Real> ScalarJet<T> {
    /// Jet of a constant.  Constants have all derivatives, so the order is
    /// maximal and never truncates a computation.
    pub fn constant(value: T) -> Self {
        Self {
            order: MAX_ORDER,
            value,
            grad: zero3(),
            hess: zero33(),
            third: zero333(),
        }
    }

    /// Jet of the coordinate function `x^axis` seeded at a point.
    pub fn variable(axis: usize, value: T) -> Self {
        let mut grad = zero3();
        grad[axis] = T::one();
        Self {
            order: MAX_ORDER,
            value,
            grad,
            hess: zero33(),
            third: zero333(),
        }
    }

    /// The three coordinate jets seeded at `p`.
    pub fn coords(p: Point3<T>) -> [Self; 3] {
        [
            Self::variable(0, p.coords[0]),
            Self::variable(1, p.coords[1]),
            Self::variable(2, p.coords[2]),
        ]
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Reduce the carried order, zeroing the discarded arrays.
    pub fn truncated(mut self, order: usize) -> Self {
        if order < self.order {
            self.order = order;
        }
        if self.order < 3 {
            self.third = zero333();
        }
        if self.order < 2 {
            self.hess = zero33();
        }
        if self.order < 1 {
            self.grad = zero3();
        }
        self
    }

    /// Jet of the partial derivative field `∂_axis f`, one order lower.
    pub fn derivative_jet(&self, axis: usize) -> Self {
        let mut out = Self::constant(self.grad[axis]);
        out.order = self.order.saturating_sub(1);
        if out.order >= 1 {
            out.grad = self.hess[axis];
        }
        if out.order >= 2 {
            out.hess = self.third[axis];
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        if !self.value.is_finite() {
            return false;
        }
        let g = self.grad.iter().all(|v| v.is_finite());
        let h = self.hess.iter().flatten().all(|v| v.is_finite());
        let t = self.third.iter().flatten().flatten().all(|v| v.is_finite());
        g && h && t
    }

    /// Largest absolute discrepancy against another jet, over all carried
    /// entries up to the smaller order.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let order = self.order.min(other.order);
        let mut worst = (self.value - other.value).abs();
        if order >= 1 {
            for i in 0..3 {
                worst = worst.max((self.grad[i] - other.grad[i]).abs());
            }
        }
        if order >= 2 {
            for i in 0..3 {
                for j in 0..3 {
                    worst = worst.max((self.hess[i][j] - other.hess[i][j]).abs());
                }
            }
        }
        if order >= 3 {
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        worst = worst.max((self.third[i][j][k] - other.third[i][j][k]).abs());
                    }
                }
            }
        }
        worst
    }

    fn binary(order: usize, value: T) -> Self {
        Self {
            order,
            value,
            grad: zero3(),
            hess: zero33(),
            third: zero333(),
        }
    }

    /// Assemble a jet from explicitly computed derivative arrays.
    pub fn raw(
        order: usize,
        value: T,
        grad: [T; 3],
        hess: [[T; 3]; 3],
        third: [[[T; 3]; 3]; 3],
    ) -> Self {
        Self {
            order: order.min(MAX_ORDER),
            value,
            grad,
            hess,
            third,
        }
        .truncated(order.min(MAX_ORDER))
    }

    /// Chain rule through a univariate function with derivatives
    /// `c1 = F'(value)`, `c2 = F''(value)`, `c3 = F'''(value)`.
    ///
    /// Entries are computed once per canonical index set and mirrored, so the
    /// declared symmetries hold bit-exactly.
    pub fn compose(&self, f0: T, c1: T, c2: T, c3: T) -> Self {
        let u = self;
        let mut w = Self::binary(u.order, f0);
        if u.order >= 1 {
            for i in 0..3 {
                w.grad[i] = c1 * u.grad[i];
            }
        }
        if u.order >= 2 {
            for i in 0..3 {
                for j in i..3 {
                    let e = c2 * u.grad[i] * u.grad[j] + c1 * u.hess[i][j];
                    w.hess[i][j] = e;
                    w.hess[j][i] = e;
                }
            }
        }
        if u.order >= 3 {
            for i in 0..3 {
                for j in i..3 {
                    for k in j..3 {
                        let e = c3 * u.grad[i] * u.grad[j] * u.grad[k]
                            + c2 * (u.hess[i][j] * u.grad[k]
                                + u.hess[i][k] * u.grad[j]
                                + u.hess[j][k] * u.grad[i])
                            + c1 * u.third[i][j][k];
                        set_sym3(&mut w.third, i, j, k, e);
                    }
                }
            }
        }
        w
    }

    pub fn recip(&self) -> Self {
        let v = self.value;
        let v2 = v * v;
        self.compose(
            v.recip(),
            -(v2).recip(),
            T::two() / (v2 * v),
            -T::of(6.0) / (v2 * v2),
        )
    }

    pub fn sqrt(&self) -> Self {
        let s = self.value.sqrt();
        let c1 = T::half() / s;
        let c2 = -T::of(0.25) / (s * self.value);
        let c3 = T::of(0.375) / (s * self.value * self.value);
        self.compose(s, c1, c2, c3)
    }

    pub fn exp(&self) -> Self {
        let e = self.value.exp();
        self.compose(e, e, e, e)
    }

    pub fn ln(&self) -> Self {
        let v = self.value;
        self.compose(v.ln(), v.recip(), -(v * v).recip(), T::two() / (v * v * v))
    }

    pub fn sin(&self) -> Self {
        let (s, c) = (self.value.sin(), self.value.cos());
        self.compose(s, c, -s, -c)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = (self.value.sin(), self.value.cos());
        self.compose(c, -s, -c, s)
    }

    pub fn powi(&self, n: i32) -> Self {
        let v = self.value;
        let nf = T::of(n as f64);
        let c1 = nf * v.powi(n - 1);
        let c2 = nf * T::of((n - 1) as f64) * v.powi(n - 2);
        let c3 = nf * T::of((n - 1) as f64) * T::of((n - 2) as f64) * v.powi(n - 3);
        self.compose(v.powi(n), c1, c2, c3)
    }

    /// Real power for positive base.
    pub fn powf(&self, a: T) -> Self {
        let v = self.value;
        let c1 = a * v.powf(a - T::one());
        let c2 = a * (a - T::one()) * v.powf(a - T::two());
        let c3 = a * (a - T::one()) * (a - T::two()) * v.powf(a - T::of(3.0));
        self.compose(v.powf(a), c1, c2, c3)
    }

    pub fn sq(&self) -> Self {
        *self * *self
    }

    pub fn scale(&self, c: T) -> Self {
        self.compose(self.value * c, c, T::zero(), T::zero())
    }
}

impl<T: Real> Add for ScalarJet<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut w = Self::binary(self.order.min(rhs.order), self.value + rhs.value);
        if w.order >= 1 {
            for i in 0..3 {
                w.grad[i] = self.grad[i] + rhs.grad[i];
            }
        }
        if w.order >= 2 {
            for i in 0..3 {
                for j in 0..3 {
                    w.hess[i][j] = self.hess[i][j] + rhs.hess[i][j];
                }
            }
        }
        if w.order >= 3 {
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        w.third[i][j][k] = self.third[i][j][k] + rhs.third[i][j][k];
                    }
                }
            }
        }
        w
    }
}

impl<T: Real> Sub for ScalarJet<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<T: Real> Neg for ScalarJet<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-T::one())
    }
}

impl<T: Real> Mul for ScalarJet<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (u, v) = (self, rhs);
        let mut w = Self::binary(u.order.min(v.order), u.value * v.value);
        if w.order >= 1 {
            for i in 0..3 {
                w.grad[i] = u.grad[i] * v.value + u.value * v.grad[i];
            }
        }
        if w.order >= 2 {
            for i in 0..3 {
                for j in i..3 {
                    let e = u.hess[i][j] * v.value
                        + u.grad[i] * v.grad[j]
                        + u.grad[j] * v.grad[i]
                        + u.value * v.hess[i][j];
                    w.hess[i][j] = e;
                    w.hess[j][i] = e;
                }
            }
        }
        if w.order >= 3 {
            for i in 0..3 {
                for j in i..3 {
                    for k in j..3 {
                        let e = u.third[i][j][k] * v.value
                            + u.hess[i][j] * v.grad[k]
                            + u.hess[i][k] * v.grad[j]
                            + u.hess[j][k] * v.grad[i]
                            + u.grad[i] * v.hess[j][k]
                            + u.grad[j] * v.hess[i][k]
                            + u.grad[k] * v.hess[i][j]
                            + u.value * v.third[i][j][k];
                        set_sym3(&mut w.third, i, j, k, e);
                    }
                }
            }
        }
        w
    }
}

/// Write one value into every permutation slot of a symmetric rank-3 array.
fn set_sym3<T: Copy>(a: &mut [[[T; 3]; 3]; 3], i: usize, j: usize, k: usize, e: T) {
    a[i][j][k] = e;
    a[i][k][j] = e;
    a[j][i][k] = e;
    a[j][k][i] = e;
    a[k][i][j] = e;
    a[k][j][i] = e;
}

impl<T: Real> Div for ScalarJet<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl<T: Real> Add<T> for ScalarJet<T> {
    type Output = Self;
    fn add(self, rhs: T) -> Self {
        self + Self::constant(rhs)
    }
}

impl<T: Real> Sub<T> for ScalarJet<T> {
    type Output = Self;
    fn sub(self, rhs: T) -> Self {
        self + Self::constant(-rhs)
    }
}

impl<T: Real> Mul<T> for ScalarJet<T> {
    type Output = Self;
    fn mul(self, rhs: T) -> Self {
        self.scale(rhs)
    }
}

impl<T: Real> Div<T> for ScalarJet<T> {
    type Output = Self;
    fn div(self, rhs: T) -> Self {
        self.scale(rhs.recip())
    }
}

/// Jet of the chart radius `|x|` at the seeded coordinates.
pub fn radius_jet<T: Real>(xs: &[ScalarJet<T>; 3]) -> ScalarJet<T> {
    (xs[0].sq() + xs[1].sq() + xs[2].sq()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    type J = ScalarJet<f64>;

    fn xs(p: [f64; 3]) -> [J; 3] {
        ScalarJet::coords(Point3 { coords: p })
    }

    #[test]
    fn linear_field_jet() {
        let x = xs([2.0, 0.0, 0.0]);
        let j = x[0];
        assert_eq!(j.value, 2.0);
        assert_eq!(j.grad, [1.0, 0.0, 0.0]);
        assert_eq!(j.hess, [[0.0; 3]; 3]);
    }

    #[test]
    fn constant_jet_all_orders_zero() {
        let j = J::constant(7.5);
        assert_eq!(j.order(), MAX_ORDER);
        assert_eq!(j.grad, [0.0; 3]);
        assert_eq!(j.third, [[[0.0; 3]; 3]; 3]);
    }

    #[test]
    fn bilinear_hessian() {
        let x = xs([1.0, 1.0, 0.0]);
        let j = x[0] * x[1];
        assert_eq!(j.value, 1.0);
        assert_eq!(j.hess[0][1], 1.0);
        assert_eq!(j.hess[1][0], 1.0);
        assert_eq!(j.hess[0][0], 0.0);
        assert_eq!(j.third, [[[0.0; 3]; 3]; 3]);
    }

    #[test]
    fn chain_rule_matches_hand_expansion() {
        // w = exp(sin(x1 * x2) + x3^2); third derivatives checked against a
        // symbolic hand expansion at a generic point.
        let p = [0.3, -0.7, 0.2];
        let x = xs(p);
        let w = ((x[0] * x[1]).sin() + x[2].sq()).exp();

        let f = |x: [f64; 3]| ((x[0] * x[1]).sin() + x[2] * x[2]).exp();
        assert!((w.value - f(p)).abs() < 1e-15);

        let h = 1e-5;
        let num_grad0 = (f([p[0] + h, p[1], p[2]]) - f([p[0] - h, p[1], p[2]])) / (2.0 * h);
        assert!((w.grad[0] - num_grad0).abs() < 1e-9);

        // d^3/dx1^2 dx3 via nested central differences; the nested scheme
        // amplifies rounding as eps/h^3, so a larger step is needed here.
        let h = 2e-3;
        let g = |x1: f64, x3: f64| f([x1, p[1], x3]);
        let d2x1 =
            |x3: f64| (g(p[0] + h, x3) - 2.0 * g(p[0], x3) + g(p[0] - h, x3)) / (h * h);
        let num_third = (d2x1(p[2] + h) - d2x1(p[2] - h)) / (2.0 * h);
        assert!((w.third[0][0][2] - num_third).abs() < 1e-4);
    }

    #[test]
    fn symmetry_of_derivative_arrays() {
        let x = xs([0.9, 0.4, -1.3]);
        let w = (x[0] * x[1] * x[2]).sin() * (x[0].sq() + 1.0).ln() / (x[2].sq() + 2.0);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(w.hess[i][j], w.hess[j][i]);
                for k in 0..3 {
                    let t = w.third[i][j][k];
                    assert_eq!(t, w.third[j][i][k]);
                    assert_eq!(t, w.third[k][j][i]);
                    assert_eq!(t, w.third[i][k][j]);
                }
            }
        }
    }

    #[test]
    fn derivative_jet_demotes_order() {
        let x = xs([0.5, 0.25, -0.1]);
        let w = (x[0].sq() * x[1]).exp();
        let d0 = w.derivative_jet(0);
        assert_eq!(d0.order(), 2);
        assert_eq!(d0.value, w.grad[0]);
        assert_eq!(d0.grad[1], w.hess[0][1]);
        assert_eq!(d0.hess[1][2], w.third[0][1][2]);
    }

    #[test]
    fn division_and_reciprocal_agree() {
        let x = xs([1.2, 0.3, 0.7]);
        let a = (x[0] + x[1].sin()).exp();
        let b = x[2].sq() + 1.5;
        let q = a / b;
        let r = a * b.recip();
        assert!(q.max_abs_diff(&r) < 1e-14);
    }

    #[test]
    fn radius_jet_is_harmonic_reciprocal() {
        // 1/r has vanishing flat Laplacian away from the origin.
        let x = xs([1.0, 2.0, -2.0]);
        let inv_r = radius_jet(&x).recip();
        let lap = inv_r.hess[0][0] + inv_r.hess[1][1] + inv_r.hess[2][2];
        assert!(lap.abs() < 1e-14);
    }
}
