//! Truncated bivariate Taylor jets in the independent variables `t` and `x`.
//!
//! A jet carries the value of a quantity together with its mixed partial
//! derivatives up to a per-problem order (at most `t`-order 2 and `x`-order 3,
//! which covers second time derivatives and third space derivatives).
//!
//! Storage convention: coefficients are Taylor-normalized,
//! `c[i][j] = (1/(i! j!)) * d^{i+j} u / dt^i dx^j`. Use [`Jet::deriv`] to read
//! raw derivatives; the factorials are applied there. Multiplication is then a
//! plain truncated polynomial product and elementary functions compose via a
//! truncated univariate series in the nilpotent part.
//!
//! The scalar type `S` is either `f64` or a tape variable, so the same jet
//! code serves gradient-free evaluation and reverse-mode training.

use crate::error::Error;
use crate::scalar::Scalar;

/// Highest supported `t`-order.
pub const MAX_ORDER_T: usize = 2;
/// Highest supported `x`-order.
pub const MAX_ORDER_X: usize = 3;
const COLS: usize = MAX_ORDER_X + 1;
const SLOTS: usize = (MAX_ORDER_T + 1) * COLS;

const FACT: [f64; 6] = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0];

/// Derivative orders carried by a jet: partials `(i, j)` with
/// `i <= t` and `j <= x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct JetOrder {
    pub t: u8,
    pub x: u8,
}

impl JetOrder {
    pub fn new(t: usize, x: usize) -> Self {
        assert!(
            t <= MAX_ORDER_T && x <= MAX_ORDER_X,
            "jet order ({t},{x}) exceeds supported ({MAX_ORDER_T},{MAX_ORDER_X})"
        );
        JetOrder { t: t as u8, x: x as u8 }
    }

    /// Total polynomial degree representable at this order.
    pub fn total_degree(self) -> usize {
        self.t as usize + self.x as usize
    }

    pub fn slots(self) -> usize {
        (self.t as usize + 1) * (self.x as usize + 1)
    }
}

#[inline(always)]
fn idx(i: usize, j: usize) -> usize {
    i * COLS + j
}

/// Truncated Taylor expansion: value plus mixed partials up to `order`.
#[derive(Clone, Copy)]
pub struct Jet<S> {
    order: JetOrder,
    c: [S; SLOTS],
}

impl<S: Scalar> Jet<S> {
    /// Constant jet: value `v`, all derivatives zero.
    pub fn constant(ctx: S::Ctx, v: f64, order: JetOrder) -> Self {
        let zero = S::constant(ctx, 0.0);
        let mut c = [zero; SLOTS];
        c[0] = S::constant(ctx, v);
        Jet { order, c }
    }

    /// Jet from an already-tracked scalar value (derivatives zero).
    pub fn from_scalar(ctx: S::Ctx, v: S, order: JetOrder) -> Self {
        let zero = S::constant(ctx, 0.0);
        let mut c = [zero; SLOTS];
        c[0] = v;
        Jet { order, c }
    }

    /// Identity seed in `t`: value `t`, `d/dt = 1`.
    pub fn var_t(ctx: S::Ctx, t: f64, order: JetOrder) -> Result<Self, Error> {
        if order.t < 1 {
            return Err(Error::JetOrderTooLow { axis: 't', order: (order.t, order.x) });
        }
        let mut jet = Self::constant(ctx, t, order);
        jet.c[idx(1, 0)] = S::constant(ctx, 1.0);
        Ok(jet)
    }

    /// Identity seed in `x`: value `x`, `d/dx = 1`.
    pub fn var_x(ctx: S::Ctx, x: f64, order: JetOrder) -> Result<Self, Error> {
        if order.x < 1 {
            return Err(Error::JetOrderTooLow { axis: 'x', order: (order.t, order.x) });
        }
        let mut jet = Self::constant(ctx, x, order);
        jet.c[idx(0, 1)] = S::constant(ctx, 1.0);
        Ok(jet)
    }

    pub fn order(&self) -> JetOrder {
        self.order
    }

    /// The value coefficient.
    pub fn value(&self) -> S {
        self.c[0]
    }

    pub fn set_value(&mut self, v: S) {
        self.c[0] = v;
    }

    /// Adds a plain constant to the value coefficient.
    pub fn add_const(&self, b: f64) -> Self {
        let mut r = *self;
        r.c[0] = self.c[0].affine(1.0, b);
        r
    }

    /// Constant jet sharing this jet's scalar context.
    pub fn const_like(&self, v: f64) -> Self {
        let mut r = self.sub(self);
        r.c[0] = self.c[0].affine(0.0, v);
        r
    }

    /// Raw mixed partial `d^{i+j} / dt^i dx^j` (factorials applied).
    pub fn deriv(&self, i: usize, j: usize) -> S {
        assert!(
            i <= self.order.t as usize && j <= self.order.x as usize,
            "derivative ({i},{j}) beyond jet order ({},{})",
            self.order.t,
            self.order.x
        );
        let f = FACT[i] * FACT[j];
        if f == 1.0 {
            self.c[idx(i, j)]
        } else {
            self.c[idx(i, j)].scale(f)
        }
    }

    /// Normalized Taylor coefficient at `(i, j)`.
    pub fn coeff(&self, i: usize, j: usize) -> S {
        assert!(i <= self.order.t as usize && j <= self.order.x as usize);
        self.c[idx(i, j)]
    }

    pub fn is_finite(&self) -> bool {
        let (nt, nx) = (self.order.t as usize, self.order.x as usize);
        for i in 0..=nt {
            for j in 0..=nx {
                if !self.c[idx(i, j)].val().is_finite() {
                    return false;
                }
            }
        }
        true
    }

    fn zip(&self, o: &Self, f: impl Fn(S, S) -> S) -> Self {
        assert_eq!(self.order, o.order, "jet order mismatch");
        let mut r = *self;
        let (nt, nx) = (self.order.t as usize, self.order.x as usize);
        for i in 0..=nt {
            for j in 0..=nx {
                let k = idx(i, j);
                r.c[k] = f(self.c[k], o.c[k]);
            }
        }
        r
    }

    fn map(&self, f: impl Fn(S) -> S) -> Self {
        let mut r = *self;
        let (nt, nx) = (self.order.t as usize, self.order.x as usize);
        for i in 0..=nt {
            for j in 0..=nx {
                let k = idx(i, j);
                r.c[k] = f(self.c[k]);
            }
        }
        r
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a.add(b))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a.sub(b))
    }

    pub fn neg(&self) -> Self {
        self.map(|a| a.neg())
    }

    /// `k * jet` for a plain constant `k`.
    pub fn scale(&self, k: f64) -> Self {
        self.map(|a| a.scale(k))
    }

    /// `a * jet + b` for plain constants.
    pub fn affine(&self, a: f64, b: f64) -> Self {
        let mut r = self.map(|c| c.scale(a));
        r.c[0] = self.c[0].affine(a, b);
        r
    }

    /// `s * jet` for a (possibly tracked) scalar `s`.
    pub fn mul_scalar(&self, s: S) -> Self {
        self.map(|a| a.mul(s))
    }

    /// Adds `s` to the value coefficient.
    pub fn add_scalar(&self, s: S) -> Self {
        let mut r = *self;
        r.c[0] = r.c[0].add(s);
        r
    }

    /// `self + s * o` fused accumulate, the hot operation in affine layers.
    pub fn add_scaled(&self, o: &Self, s: S) -> Self {
        assert_eq!(self.order, o.order, "jet order mismatch");
        let mut r = *self;
        let (nt, nx) = (self.order.t as usize, self.order.x as usize);
        for i in 0..=nt {
            for j in 0..=nx {
                let k = idx(i, j);
                r.c[k] = o.c[k].mul_add(s, self.c[k]);
            }
        }
        r
    }

    /// Truncated product (Leibniz rule through the carried order).
    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.order, o.order, "jet order mismatch");
        let mut r = *self;
        let (nt, nx) = (self.order.t as usize, self.order.x as usize);
        for i in 0..=nt {
            for j in 0..=nx {
                let mut acc = self.c[idx(0, 0)].mul(o.c[idx(i, j)]);
                for i1 in 0..=i {
                    for j1 in 0..=j {
                        if i1 == 0 && j1 == 0 {
                            continue;
                        }
                        acc = self.c[idx(i1, j1)].mul_add(o.c[idx(i - i1, j - j1)], acc);
                    }
                }
                r.c[idx(i, j)] = acc;
            }
        }
        r
    }

    /// Composes a univariate series `f(v0 + s) = sum f_k s^k` with this jet.
    /// `series[k]` must hold `f^(k)(value)/k!` for `k = 0..=total_degree`.
    fn compose(&self, series: &[S]) -> Self {
        let d = self.order.total_degree();
        debug_assert!(series.len() > d);
        if d == 0 {
            let mut r = *self;
            r.c[0] = series[0];
            return r;
        }
        // Nilpotent part: same coefficients with the value zeroed out.
        let mut delta = *self;
        delta.c[0] = self.c[0].sub(self.c[0]);
        // Horner: (((f_d * delta + f_{d-1}) * delta + ...) * delta + f_0).
        let mut acc = delta.mul_scalar(series[d]);
        acc.c[0] = acc.c[0].add(series[d - 1]);
        for k in (0..d - 1).rev() {
            acc = acc.mul(&delta);
            acc.c[0] = acc.c[0].add(series[k]);
        }
        acc
    }

    pub fn tanh(&self) -> Self {
        let d = self.order.total_degree();
        // a_{k+1} = (delta_{k0} - sum_m a_m a_{k-m}) / (k+1), from T' = 1 - T^2.
        let mut a = Vec::with_capacity(d + 1);
        a.push(self.c[0].tanh());
        for k in 0..d {
            let mut s = a[0].mul(a[k]);
            for m in 1..=k {
                s = a[m].mul_add(a[k - m], s);
            }
            let inv = 1.0 / (k as f64 + 1.0);
            let next = if k == 0 { s.affine(-inv, inv) } else { s.scale(-inv) };
            a.push(next);
        }
        self.compose(&a)
    }

    /// `sech^2 = 1 - tanh^2`, the derivative of `tanh`.
    pub fn sech2(&self) -> Self {
        let t = self.tanh();
        t.mul(&t).affine(-1.0, 1.0)
    }

    pub fn sin(&self) -> Self {
        let d = self.order.total_degree();
        let s = self.c[0].sin();
        let c = self.c[0].cos();
        let mut a = Vec::with_capacity(d + 1);
        for k in 0..=d {
            let inv = 1.0 / FACT[k];
            a.push(match k % 4 {
                0 => s.scale(inv),
                1 => c.scale(inv),
                2 => s.scale(-inv),
                _ => c.scale(-inv),
            });
        }
        self.compose(&a)
    }

    pub fn cos(&self) -> Self {
        let d = self.order.total_degree();
        let s = self.c[0].sin();
        let c = self.c[0].cos();
        let mut a = Vec::with_capacity(d + 1);
        for k in 0..=d {
            let inv = 1.0 / FACT[k];
            a.push(match k % 4 {
                0 => c.scale(inv),
                1 => s.scale(-inv),
                2 => c.scale(-inv),
                _ => s.scale(inv),
            });
        }
        self.compose(&a)
    }

    pub fn sinh(&self) -> Self {
        let d = self.order.total_degree();
        let sh = self.c[0].sinh();
        let ch = self.c[0].cosh();
        let mut a = Vec::with_capacity(d + 1);
        for k in 0..=d {
            let inv = 1.0 / FACT[k];
            a.push(if k % 2 == 0 { sh.scale(inv) } else { ch.scale(inv) });
        }
        self.compose(&a)
    }

    pub fn cosh(&self) -> Self {
        let d = self.order.total_degree();
        let sh = self.c[0].sinh();
        let ch = self.c[0].cosh();
        let mut a = Vec::with_capacity(d + 1);
        for k in 0..=d {
            let inv = 1.0 / FACT[k];
            a.push(if k % 2 == 0 { ch.scale(inv) } else { sh.scale(inv) });
        }
        self.compose(&a)
    }

    pub fn exp(&self) -> Self {
        let d = self.order.total_degree();
        let e = self.c[0].exp();
        let mut a = Vec::with_capacity(d + 1);
        for k in 0..=d {
            a.push(e.scale(1.0 / FACT[k]));
        }
        self.compose(&a)
    }

    /// Reciprocal; the value must be nonzero.
    pub fn recip(&self) -> Result<Self, Error> {
        if self.c[0].val() == 0.0 {
            return Err(Error::JetDivisionByZero);
        }
        let d = self.order.total_degree();
        let r = self.c[0].recip();
        let mut a = Vec::with_capacity(d + 1);
        a.push(r);
        for k in 1..=d {
            a.push(a[k - 1].mul(r).neg());
        }
        Ok(self.compose(&a))
    }

    /// Quotient rule through the carried order; errors on zero denominator value.
    pub fn div(&self, o: &Self) -> Result<Self, Error> {
        Ok(self.mul(&o.recip()?))
    }

    /// Integer power by repeated multiplication (negative `n` via reciprocal).
    pub fn pow_int(&self, n: i32) -> Result<Self, Error> {
        if n < 0 {
            return self.pow_int(-n)?.recip();
        }
        let mut ctx_like = *self;
        // x^0 = 1 with zero derivatives, built from existing coefficients.
        ctx_like = ctx_like.sub(&ctx_like);
        ctx_like.c[0] = ctx_like.c[0].affine(1.0, 1.0);
        let mut acc = ctx_like;
        for _ in 0..n {
            acc = acc.mul(self);
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ord(t: usize, x: usize) -> JetOrder {
        JetOrder::new(t, x)
    }

    #[test]
    fn constant_jets() {
        let j = Jet::<f64>::constant((), 5.0, ord(1, 0));
        assert_eq!(j.value(), 5.0);
        assert_eq!(j.deriv(1, 0), 0.0);

        let j = Jet::<f64>::constant((), 0.0, ord(0, 3));
        for k in 0..=3 {
            assert_eq!(j.deriv(0, k), 0.0);
        }

        let j = Jet::<f64>::constant((), -2.5, ord(2, 3));
        assert_eq!(j.value(), -2.5);
        let mut zeros = 0;
        for i in 0..=2 {
            for j2 in 0..=3 {
                if (i, j2) != (0, 0) {
                    assert_eq!(j.deriv(i, j2), 0.0);
                    zeros += 1;
                }
            }
        }
        assert_eq!(zeros, 11);
    }

    #[test]
    fn variable_seeds() {
        let t = Jet::<f64>::var_t((), 0.3, ord(2, 0)).unwrap();
        assert_eq!(t.value(), 0.3);
        assert_eq!(t.deriv(1, 0), 1.0);
        assert_eq!(t.deriv(2, 0), 0.0);

        let x = Jet::<f64>::var_x((), 1.0, ord(0, 1)).unwrap();
        assert_eq!(x.value(), 1.0);
        assert_eq!(x.deriv(0, 1), 1.0);

        let x = Jet::<f64>::var_x((), 0.0, ord(1, 3)).unwrap();
        assert_eq!(x.value(), 0.0);
        assert_eq!(x.deriv(0, 1), 1.0);
        assert_eq!(x.deriv(1, 0), 0.0);
        assert_eq!(x.deriv(0, 2), 0.0);
        assert_eq!(x.deriv(1, 3), 0.0);
    }

    #[test]
    fn seeding_requires_order() {
        assert!(Jet::<f64>::var_t((), 0.0, ord(0, 2)).is_err());
        assert!(Jet::<f64>::var_x((), 0.0, ord(2, 0)).is_err());
    }

    #[test]
    fn square_of_t() {
        let t = Jet::<f64>::var_t((), 2.0, ord(2, 0)).unwrap();
        let sq = t.mul(&t);
        assert_eq!(sq.value(), 4.0);
        assert_eq!(sq.deriv(1, 0), 4.0);
        assert_eq!(sq.deriv(2, 0), 2.0);
    }

    #[test]
    fn cube_structure_of_x_squared() {
        let x = Jet::<f64>::var_x((), 3.0, ord(0, 3)).unwrap();
        let sq = x.mul(&x);
        assert_eq!(sq.value(), 9.0);
        assert_eq!(sq.deriv(0, 1), 6.0);
        assert_eq!(sq.deriv(0, 2), 2.0);
        assert_eq!(sq.deriv(0, 3), 0.0);
    }

    #[test]
    fn reciprocal_of_x() {
        // d/dx (1/x) = -1/x^2, d2/dx2 = 2/x^3; at x=2: -0.25, 0.25.
        let x = Jet::<f64>::var_x((), 2.0, ord(0, 2)).unwrap();
        let one = Jet::<f64>::constant((), 1.0, ord(0, 2));
        let r = one.div(&x).unwrap();
        assert!((r.value() - 0.5).abs() < 1e-15);
        assert!((r.deriv(0, 1) + 0.25).abs() < 1e-15);
        assert!((r.deriv(0, 2) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn division_by_zero_value() {
        let x = Jet::<f64>::var_x((), 0.0, ord(0, 1)).unwrap();
        let one = Jet::<f64>::constant((), 1.0, ord(0, 1));
        assert!(matches!(one.div(&x), Err(Error::JetDivisionByZero)));
    }

    #[test]
    fn tanh_at_zero() {
        let t = Jet::<f64>::var_t((), 0.0, ord(1, 0)).unwrap();
        let u = t.tanh();
        assert_eq!(u.value(), 0.0);
        assert!((u.deriv(1, 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sin_of_3x() {
        // sin(3x) at x=0: value 0, d=3, d2=0, d3=-27.
        let x = Jet::<f64>::var_x((), 0.0, ord(0, 3)).unwrap();
        let u = x.scale(3.0).sin();
        assert!(u.value().abs() < 1e-15);
        assert!((u.deriv(0, 1) - 3.0).abs() < 1e-12);
        assert!(u.deriv(0, 2).abs() < 1e-12);
        assert!((u.deriv(0, 3) + 27.0).abs() < 1e-12);
    }

    #[test]
    fn sech2_is_even_with_unit_peak() {
        let t = Jet::<f64>::var_t((), 0.0, ord(1, 0)).unwrap();
        let u = t.sech2();
        assert!((u.value() - 1.0).abs() < 1e-15);
        assert!(u.deriv(1, 0).abs() < 1e-15);
    }

    #[test]
    fn pow_int_matches_repeated_mul() {
        let x = Jet::<f64>::var_x((), 1.3, ord(1, 2)).unwrap();
        let p = x.pow_int(4).unwrap();
        let m = x.mul(&x).mul(&x).mul(&x);
        for i in 0..=1 {
            for j in 0..=2 {
                assert!((p.deriv(i, j) - m.deriv(i, j)).abs() < 1e-12);
            }
        }
        let p0 = x.pow_int(0).unwrap();
        assert_eq!(p0.value(), 1.0);
        assert_eq!(p0.deriv(0, 1), 0.0);
    }

    #[test]
    fn constants_annihilated_by_derivatives() {
        let c = Jet::<f64>::constant((), 1.7, ord(2, 3));
        let u = c.sin().mul(&c.exp()).add(&c.tanh());
        for i in 0..=2 {
            for j in 0..=3 {
                if (i, j) != (0, 0) {
                    assert_eq!(u.deriv(i, j), 0.0, "({i},{j})");
                }
            }
        }
    }
}
