//! Truncated multivariate Taylor jets.
//!
//! A [`Jet`] carries a value together with its exact partial derivatives up
//! to order three with respect to `dim` independent variables. Arithmetic
//! propagates derivatives through the product and chain rules, so anything
//! composed from jets is differentiated to machine precision.
//!
//! Derivative storage is dense: `d2[i][j]` and `d3[i][j][k]` keep every index
//! permutation. The symmetric duplicates cost memory but keep the indexing
//! trivial for the small dimensions this crate targets (at most 8).

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// Highest derivative order a jet can carry.
pub const MAX_ORDER: usize = 3;

#[derive(Clone, PartialEq)]
pub struct Jet {
    dim: usize,
    order: usize,
    // [value, d1 (dim), d2 (dim^2), d3 (dim^3)], truncated after `order`.
    coef: Vec<f64>,
}

fn len_for(dim: usize, order: usize) -> usize {
    let mut len = 1;
    let mut block = 1;
    for _ in 0..order {
        block *= dim;
        len += block;
    }
    len
}

impl Jet {
    pub fn constant(dim: usize, order: usize, value: f64) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let mut coef = vec![0.0; len_for(dim, order)];
        coef[0] = value;
        Jet { dim, order, coef }
    }

    pub fn zero(dim: usize, order: usize) -> Self {
        Self::constant(dim, order, 0.0)
    }

    /// The coordinate function `x_index` seeded at `value`.
    pub fn variable(dim: usize, order: usize, index: usize, value: f64) -> Self {
        assert!(index < dim);
        let mut jet = Self::constant(dim, order, value);
        if order >= 1 {
            jet.coef[1 + index] = 1.0;
        }
        jet
    }

    /// Seeds every coordinate of `point` as an independent variable.
    pub fn seed(point: &[f64], order: usize) -> Vec<Jet> {
        let dim = point.len();
        point
            .iter()
            .enumerate()
            .map(|(i, &x)| Jet::variable(dim, order, i, x))
            .collect()
    }

    /// Builds a jet from explicit derivative arrays (dense, row-major).
    pub fn from_parts(dim: usize, value: f64, d1: &[f64], d2: &[f64], d3: &[f64]) -> Self {
        let order = if !d3.is_empty() {
            3
        } else if !d2.is_empty() {
            2
        } else if !d1.is_empty() {
            1
        } else {
            0
        };
        let mut jet = Self::constant(dim, order, value);
        let o1 = 1;
        let o2 = o1 + dim;
        let o3 = o2 + dim * dim;
        if order >= 1 {
            assert_eq!(d1.len(), dim);
            jet.coef[o1..o2].copy_from_slice(d1);
        }
        if order >= 2 {
            assert_eq!(d2.len(), dim * dim);
            jet.coef[o2..o3].copy_from_slice(d2);
        }
        if order >= 3 {
            assert_eq!(d3.len(), dim * dim * dim);
            jet.coef[o3..].copy_from_slice(d3);
        }
        jet
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.coef[0]
    }

    #[inline]
    fn o2(&self) -> usize {
        1 + self.dim
    }

    #[inline]
    fn o3(&self) -> usize {
        1 + self.dim + self.dim * self.dim
    }

    #[inline]
    pub fn d1(&self, i: usize) -> f64 {
        if self.order < 1 {
            return 0.0;
        }
        self.coef[1 + i]
    }

    #[inline]
    pub fn d2(&self, i: usize, j: usize) -> f64 {
        if self.order < 2 {
            return 0.0;
        }
        self.coef[self.o2() + i * self.dim + j]
    }

    #[inline]
    pub fn d3(&self, i: usize, j: usize, k: usize) -> f64 {
        if self.order < 3 {
            return 0.0;
        }
        let n = self.dim;
        self.coef[self.o3() + (i * n + j) * n + k]
    }

    pub fn gradient(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.d1(i)).collect()
    }

    /// Drops derivative information above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order {
            return self.clone();
        }
        Jet {
            dim: self.dim,
            order,
            coef: self.coef[..len_for(self.dim, order)].to_vec(),
        }
    }

    /// `∂_a` of this jet, one order lower.
    pub fn partial(&self, a: usize) -> Jet {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let n = self.dim;
        let order = self.order - 1;
        let mut out = Jet::zero(n, order);
        out.coef[0] = self.d1(a);
        if order >= 1 {
            for i in 0..n {
                out.coef[1 + i] = self.d2(a, i);
            }
        }
        if order >= 2 {
            let o2 = out.o2();
            for i in 0..n {
                for j in 0..n {
                    out.coef[o2 + i * n + j] = self.d3(a, i, j);
                }
            }
        }
        out
    }

    /// Re-expresses the jet in a larger variable set: variable `i` becomes
    /// variable `offset + i` of `new_dim`, the new variables enter trivially.
    pub fn embed(&self, new_dim: usize, offset: usize) -> Jet {
        assert!(offset + self.dim <= new_dim);
        if new_dim == self.dim {
            return self.clone();
        }
        let n = self.dim;
        let mut out = Jet::constant(new_dim, self.order, self.value());
        if self.order >= 1 {
            for i in 0..n {
                out.coef[1 + offset + i] = self.d1(i);
            }
        }
        if self.order >= 2 {
            let o2 = out.o2();
            for i in 0..n {
                for j in 0..n {
                    out.coef[o2 + (offset + i) * new_dim + offset + j] = self.d2(i, j);
                }
            }
        }
        if self.order >= 3 {
            let o3 = out.o3();
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let idx = ((offset + i) * new_dim + offset + j) * new_dim + offset + k;
                        out.coef[o3 + idx] = self.d3(i, j, k);
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            dim: self.dim,
            order: self.order,
            coef: self.coef.iter().map(|c| c * s).collect(),
        }
    }

    /// `self + s * other`, truncated to the lower of the two orders.
    pub fn add_scaled(&self, s: f64, other: &Jet) -> Jet {
        self.check_dim(other);
        let order = self.order.min(other.order);
        let len = len_for(self.dim, order);
        let coef = self.coef[..len]
            .iter()
            .zip(&other.coef[..len])
            .map(|(a, b)| a + s * b)
            .collect();
        Jet { dim: self.dim, order, coef }
    }

    #[inline]
    fn check_dim(&self, other: &Jet) {
        assert_eq!(
            self.dim, other.dim,
            "jet dimension mismatch ({} vs {})",
            self.dim, other.dim
        );
    }

    fn product(&self, other: &Jet) -> Jet {
        self.check_dim(other);
        let n = self.dim;
        let order = self.order.min(other.order);
        let (f, g) = (self, other);
        let f0 = f.value();
        let g0 = g.value();
        let mut out = Jet::zero(n, order);
        out.coef[0] = f0 * g0;
        if order >= 1 {
            for i in 0..n {
                out.coef[1 + i] = f.d1(i) * g0 + f0 * g.d1(i);
            }
        }
        if order >= 2 {
            let o2 = out.o2();
            for i in 0..n {
                for j in 0..n {
                    out.coef[o2 + i * n + j] = f.d2(i, j) * g0
                        + f.d1(i) * g.d1(j)
                        + f.d1(j) * g.d1(i)
                        + f0 * g.d2(i, j);
                }
            }
        }
        if order >= 3 {
            let o3 = out.o3();
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        out.coef[o3 + (i * n + j) * n + k] = f.d3(i, j, k) * g0
                            + f.d2(i, j) * g.d1(k)
                            + f.d2(i, k) * g.d1(j)
                            + f.d2(j, k) * g.d1(i)
                            + f.d1(i) * g.d2(j, k)
                            + f.d1(j) * g.d2(i, k)
                            + f.d1(k) * g.d2(i, j)
                            + f0 * g.d3(i, j, k);
                    }
                }
            }
        }
        out
    }

    /// Composes a univariate function with this jet, given the function's
    /// value and first three derivatives at `self.value()`.
    pub fn compose(&self, p0: f64, p1: f64, p2: f64, p3: f64) -> Jet {
        let n = self.dim;
        let u = self;
        let mut out = Jet::zero(n, self.order);
        out.coef[0] = p0;
        if self.order >= 1 {
            for i in 0..n {
                out.coef[1 + i] = p1 * u.d1(i);
            }
        }
        if self.order >= 2 {
            let o2 = out.o2();
            for i in 0..n {
                for j in 0..n {
                    out.coef[o2 + i * n + j] = p2 * u.d1(i) * u.d1(j) + p1 * u.d2(i, j);
                }
            }
        }
        if self.order >= 3 {
            let o3 = out.o3();
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        out.coef[o3 + (i * n + j) * n + k] = p3 * u.d1(i) * u.d1(j) * u.d1(k)
                            + p2 * (u.d2(i, j) * u.d1(k) + u.d2(i, k) * u.d1(j) + u.d2(j, k) * u.d1(i))
                            + p1 * u.d3(i, j, k);
                    }
                }
            }
        }
        out
    }

    pub fn recip(&self) -> Jet {
        let x = self.value();
        let r = 1.0 / x;
        self.compose(r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r)
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose(s, c, -s, -c)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose(c, -s, -c, s)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose(e, e, e, e)
    }

    pub fn ln(&self) -> Jet {
        let x = self.value();
        self.compose(x.ln(), 1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x))
    }

    pub fn sqrt(&self) -> Jet {
        let x = self.value();
        let s = x.sqrt();
        self.compose(s, 0.5 / s, -0.25 / (s * x), 0.375 / (s * x * x))
    }

    pub fn powi(&self, k: i32) -> Jet {
        let x = self.value();
        let kf = k as f64;
        let pw = |e: i32| if e == 0 { 1.0 } else { x.powi(e) };
        self.compose(
            pw(k),
            kf * pw(k - 1),
            kf * (kf - 1.0) * pw(k - 2),
            kf * (kf - 1.0) * (kf - 2.0) * pw(k - 3),
        )
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("dim", &self.dim)
            .field("order", &self.order)
            .field("value", &self.value())
            .field("d1", &self.gradient())
            .finish()
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                let f: fn(&Jet, &Jet) -> Jet = $body;
                f(self, rhs)
            }
        }
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                (&self).$method(rhs)
            }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| a.add_scaled(1.0, b));
binop!(Sub, sub, |a, b| a.add_scaled(-1.0, b));
binop!(Mul, mul, |a, b| a.product(b));
binop!(Div, div, |a, b| a.product(&b.recip()));

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        let mut out = self.clone();
        out.coef[0] += rhs;
        out
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.coef[0] += rhs;
        self
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        self.check_dim(rhs);
        if rhs.order < self.order {
            *self = self.truncate(rhs.order);
        }
        let len = self.coef.len();
        for (a, b) in self.coef.iter_mut().zip(&rhs.coef[..len]) {
            *a += b;
        }
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        self.check_dim(rhs);
        if rhs.order < self.order {
            *self = self.truncate(rhs.order);
        }
        let len = self.coef.len();
        for (a, b) in self.coef.iter_mut().zip(&rhs.coef[..len]) {
            *a -= b;
        }
    }
}

impl Jet {
    /// `self += s * a * b` without materialising the product twice.
    pub fn add_product(&mut self, s: f64, a: &Jet, b: &Jet) {
        let p = a.product(b);
        if s == 1.0 {
            *self += &p;
        } else {
            *self += &p.scale(s);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn variable_has_unit_gradient() {
        let x = Jet::variable(3, 3, 1, 0.7);
        assert_eq!(x.value(), 0.7);
        assert_eq!(x.gradient(), vec![0.0, 1.0, 0.0]);
        assert_eq!(x.d2(1, 1), 0.0);
    }

    #[test]
    fn cubic_polynomial_derivatives() {
        // f = x^2 y + y^3 at (2, 3)
        let v = Jet::seed(&[2.0, 3.0], 3);
        let f = &(&v[0] * &v[0]) * &v[1] + v[1].powi(3);
        assert_abs_diff_eq!(f.value(), 4.0 * 3.0 + 27.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.d1(0), 2.0 * 2.0 * 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.d1(1), 4.0 + 27.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.d2(0, 1), 4.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.d2(1, 0), 4.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.d2(1, 1), 18.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.d3(0, 0, 1), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.d3(1, 0, 0), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.d3(1, 1, 1), 6.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.d3(0, 0, 0), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn sin_squared_third_derivative() {
        // d/dθ sin²θ = sin 2θ, d² = 2 cos 2θ, d³ = -4 sin 2θ
        let th = 0.8;
        let x = Jet::variable(1, 3, 0, th);
        let s = x.sin();
        let f = &s * &s;
        assert_abs_diff_eq!(f.d1(0), (2.0 * th).sin(), epsilon = 1e-14);
        assert_abs_diff_eq!(f.d2(0, 0), 2.0 * (2.0 * th).cos(), epsilon = 1e-14);
        assert_abs_diff_eq!(f.d3(0, 0, 0), -4.0 * (2.0 * th).sin(), epsilon = 1e-13);
    }

    #[test]
    fn reciprocal_and_quotient() {
        let x = Jet::variable(1, 3, 0, 2.0);
        let r = x.recip();
        assert_abs_diff_eq!(r.d1(0), -0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(r.d2(0, 0), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(r.d3(0, 0, 0), -6.0 / 16.0, epsilon = 1e-15);
        let q = &x / &x;
        assert_abs_diff_eq!(q.value(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.d3(0, 0, 0), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn partial_shifts_order() {
        let v = Jet::seed(&[1.5, -0.5], 3);
        let f = &v[0] * &v[0] * &v[1];
        let fx = f.partial(0);
        assert_eq!(fx.order(), 2);
        assert_abs_diff_eq!(fx.value(), 2.0 * 1.5 * -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(fx.d1(1), 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(fx.d2(0, 1), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn embed_moves_variables() {
        let v = Jet::seed(&[0.3, 0.4], 3);
        let f = (&v[0] * &v[1]).sin();
        let e = f.embed(4, 1);
        assert_eq!(e.dim(), 4);
        assert_eq!(e.d1(0), 0.0);
        assert_eq!(e.d1(1), f.d1(0));
        assert_eq!(e.d2(1, 2), f.d2(0, 1));
        assert_eq!(e.d3(2, 1, 2), f.d3(1, 0, 1));
        assert_eq!(e.d3(3, 1, 2), 0.0);
    }

    #[test]
    fn mixed_orders_truncate() {
        let a = Jet::variable(2, 3, 0, 1.0);
        let b = Jet::variable(2, 1, 1, 2.0);
        let p = &a * &b;
        assert_eq!(p.order(), 1);
        assert_eq!(p.d2(0, 1), 0.0);
    }
}
