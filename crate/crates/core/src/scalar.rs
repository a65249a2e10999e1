//! Scalar abstraction shared by the plain-`f64` and tape-recorded evaluation paths.
//!
//! Everything downstream (jets, networks, ansatzes, residuals) is written once
//! against [`Scalar`] and instantiated either with `f64` (fast, gradient-free
//! evaluation) or with [`crate::tape::Var`] (reverse-mode parameter gradients).

/// A differentiable scalar value.
///
/// `Ctx` is whatever is needed to mint new constants: `()` for `f64`,
/// a tape handle for tracked variables.
pub trait Scalar: Copy {
    type Ctx: Copy;

    fn constant(ctx: Self::Ctx, v: f64) -> Self;

    /// The primal value.
    fn val(self) -> f64;

    fn add(self, o: Self) -> Self;
    fn sub(self, o: Self) -> Self;
    fn mul(self, o: Self) -> Self;
    fn neg(self) -> Self;

    /// `k * self`.
    fn scale(self, k: f64) -> Self;

    /// `a * self + b`.
    fn affine(self, a: f64, b: f64) -> Self;

    /// `a*self + b*o` fused.
    fn lincomb(self, a: f64, o: Self, b: f64) -> Self {
        self.scale(a).add(o.scale(b))
    }

    /// `self * o + acc` fused where the backend supports it.
    fn mul_add(self, o: Self, acc: Self) -> Self {
        self.mul(o).add(acc)
    }

    fn recip(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tanh(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn exp(self) -> Self;
}

impl Scalar for f64 {
    type Ctx = ();

    #[inline(always)]
    fn constant(_: (), v: f64) -> Self {
        v
    }

    #[inline(always)]
    fn val(self) -> f64 {
        self
    }

    #[inline(always)]
    fn add(self, o: Self) -> Self {
        self + o
    }

    #[inline(always)]
    fn sub(self, o: Self) -> Self {
        self - o
    }

    #[inline(always)]
    fn mul(self, o: Self) -> Self {
        self * o
    }

    #[inline(always)]
    fn neg(self) -> Self {
        -self
    }

    #[inline(always)]
    fn scale(self, k: f64) -> Self {
        k * self
    }

    #[inline(always)]
    fn affine(self, a: f64, b: f64) -> Self {
        a * self + b
    }

    #[inline(always)]
    fn lincomb(self, a: f64, o: Self, b: f64) -> Self {
        a * self + b * o
    }

    #[inline(always)]
    fn mul_add(self, o: Self, acc: Self) -> Self {
        self * o + acc
    }

    #[inline(always)]
    fn recip(self) -> Self {
        1.0 / self
    }

    #[inline(always)]
    fn sin(self) -> Self {
        f64::sin(self)
    }

    #[inline(always)]
    fn cos(self) -> Self {
        f64::cos(self)
    }

    #[inline(always)]
    fn tanh(self) -> Self {
        f64::tanh(self)
    }

    #[inline(always)]
    fn sinh(self) -> Self {
        f64::sinh(self)
    }

    #[inline(always)]
    fn cosh(self) -> Self {
        f64::cosh(self)
    }

    #[inline(always)]
    fn exp(self) -> Self {
        f64::exp(self)
    }
}
