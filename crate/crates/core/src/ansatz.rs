//! Hard-constraint output ansatzes and the soft-constraint pass-through.
//!
//! A hard ansatz wraps the trainable operator-network output `G_t` so the
//! constrained output satisfies the problem's initial/boundary data
//! identically, e.g. `G = F_i0(t) x0 + F_i1(t) xt0 + F_nn(t) G_t` with
//! coefficient functions pinned at the data locus. The coefficient tuples
//! here are the tested families for the five benchmark problems, plus
//! trainable affine blends of them.
//!
//! Everything is generic over the scalar type so the same formulas serve
//! plain evaluation, the condition validator, and tape-recorded training
//! (including gradients into the blend coefficients).

use crate::error::Error;
use crate::jet::{Jet, JetOrder};
use crate::scalar::Scalar;

/// Time normalization `t_n = (t - t0)/(tf - t0)` as a jet map.
pub fn normalized_time<S: Scalar>(t: &Jet<S>, t0: f64, tf: f64) -> Jet<S> {
    let span = tf - t0;
    t.affine(1.0 / span, -t0 / span)
}

/// Horner evaluation of `sum coeffs[k] * j^k` (ascending coefficients).
fn poly<S: Scalar>(j: &Jet<S>, coeffs: &[f64]) -> Jet<S> {
    debug_assert!(coeffs.len() >= 2);
    let n = coeffs.len();
    let mut acc = j.scale(coeffs[n - 1]).add_const(coeffs[n - 2]);
    for k in (0..n - 2).rev() {
        acc = acc.mul(j).add_const(coeffs[k]);
    }
    acc
}

/// First-order initial-value coefficient families for the damped pendulum,
/// also reused for vector systems with derivative seeding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PendulumTuple {
    /// `(1, t - t0, t_n^2)`.
    V1,
    /// `(1 - 3t_n^2 + 2t_n^3, (t-t0)(1-t_n)^2, t_n^2 (3 - 2t_n))`.
    V2,
    /// Quintic family.
    V3,
}

impl PendulumTuple {
    pub fn index(self) -> u8 {
        match self {
            PendulumTuple::V1 => 1,
            PendulumTuple::V2 => 2,
            PendulumTuple::V3 => 3,
        }
    }

    pub fn from_index(i: u8) -> Option<Self> {
        match i {
            1 => Some(PendulumTuple::V1),
            2 => Some(PendulumTuple::V2),
            3 => Some(PendulumTuple::V3),
            _ => None,
        }
    }
}

/// `(F_i0, F_i1, F_nn)` for the selected variant.
pub fn pendulum_coeffs<S: Scalar>(
    variant: PendulumTuple,
    t: &Jet<S>,
    t0: f64,
    tf: f64,
) -> (Jet<S>, Jet<S>, Jet<S>) {
    let tn = normalized_time(t, t0, tf);
    let dt = t.add_const(-t0);
    match variant {
        PendulumTuple::V1 => {
            let f_i0 = t.const_like(1.0);
            let f_nn = tn.mul(&tn);
            (f_i0, dt, f_nn)
        }
        PendulumTuple::V2 => {
            let f_i0 = poly(&tn, &[1.0, 0.0, -3.0, 2.0]);
            let f_i1 = dt.mul(&poly(&tn, &[1.0, -2.0, 1.0]));
            let f_nn = poly(&tn, &[0.0, 0.0, 3.0, -2.0]);
            (f_i0, f_i1, f_nn)
        }
        PendulumTuple::V3 => {
            let f_i0 = poly(&tn, &[1.0, 0.0, 0.0, -10.0, 15.0, -6.0]);
            let f_i1 = dt.mul(&poly(&tn, &[1.0, 0.0, -6.0, 8.0, -3.0]));
            let f_nn = poly(&tn, &[0.0, 0.0, 10.0, -20.0, 15.0, -4.0]);
            (f_i0, f_i1, f_nn)
        }
    }
}

/// `(F_i0, F_i1, F_i2, F_nn)` for the second-order pendulum ansatz.
pub fn pendulum_second_order_coeffs<S: Scalar>(
    t: &Jet<S>,
    t0: f64,
    tf: f64,
) -> (Jet<S>, Jet<S>, Jet<S>, Jet<S>) {
    let tn = normalized_time(t, t0, tf);
    let dt = t.add_const(-t0);
    let f_i0 = poly(&tn, &[1.0, 0.0, 0.0, -10.0, 15.0, -6.0]);
    let f_i1 = dt.mul(&poly(&tn, &[1.0, 0.0, -6.0, 8.0, -3.0]));
    let f_i2 = dt.mul(&dt).scale(0.5).mul(&poly(&tn, &[1.0, -3.0, 3.0, -1.0]));
    let f_nn = poly(&tn, &[0.0, 0.0, 0.0, 10.0, -15.0, 6.0]);
    (f_i0, f_i1, f_i2, f_nn)
}

/// Endpoint-residual coefficient `F_m = (1/2) t_n^3 (t - tf)^2`.
pub fn pendulum_fm<S: Scalar>(t: &Jet<S>, t0: f64, tf: f64) -> Jet<S> {
    let tn = normalized_time(t, t0, tf);
    let dtf = t.add_const(-tf);
    poly(&tn, &[0.0, 0.0, 0.0, 0.5]).mul(&dtf).mul(&dtf)
}

/// Subtracts `F_m(t) * residual_at_tf` so the equation holds exactly at the
/// training-interval endpoint.
pub fn endpoint_residual_modifier<S: Scalar>(
    base: &Jet<S>,
    residual_at_tf: S,
    t: &Jet<S>,
    t0: f64,
    tf: f64,
) -> Jet<S> {
    base.sub(&pendulum_fm(t, t0, tf).mul_scalar(residual_at_tf))
}

/// Which trainable blend of the pendulum tuples to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlendFamily {
    /// Componentwise `a*v3 + (1-a)*v2`, three trainable coefficients.
    Blend23,
    /// Componentwise `a*v3 + a'*v2 + (1-a-a')*v1`, six trainable coefficients.
    Blend123,
}

impl BlendFamily {
    pub fn coeff_count(self) -> usize {
        match self {
            BlendFamily::Blend23 => 3,
            BlendFamily::Blend123 => 6,
        }
    }
}

/// Blended `(F_i0, F_i1, F_nn)`; gradients flow into `a`.
pub fn adaptive_blend_coeffs<S: Scalar>(
    family: BlendFamily,
    a: &[S],
    t: &Jet<S>,
    t0: f64,
    tf: f64,
) -> (Jet<S>, Jet<S>, Jet<S>) {
    let (v2_i0, v2_i1, v2_nn) = pendulum_coeffs(PendulumTuple::V2, t, t0, tf);
    let (v3_i0, v3_i1, v3_nn) = pendulum_coeffs(PendulumTuple::V3, t, t0, tf);
    match family {
        BlendFamily::Blend23 => {
            assert_eq!(a.len(), 3, "blend23 takes three coefficients");
            let mix = |v3: &Jet<S>, v2: &Jet<S>, ak: S| {
                v3.mul_scalar(ak).add(&v2.mul_scalar(ak.affine(-1.0, 1.0)))
            };
            (
                mix(&v3_i0, &v2_i0, a[0]),
                mix(&v3_i1, &v2_i1, a[1]),
                mix(&v3_nn, &v2_nn, a[2]),
            )
        }
        BlendFamily::Blend123 => {
            assert_eq!(a.len(), 6, "blend123 takes six coefficients");
            let (v1_i0, v1_i1, v1_nn) = pendulum_coeffs(PendulumTuple::V1, t, t0, tf);
            let mix = |v3: &Jet<S>, v2: &Jet<S>, v1: &Jet<S>, ai: S, aj: S| {
                let rest = ai.add(aj).affine(-1.0, 1.0);
                v3.mul_scalar(ai)
                    .add(&v2.mul_scalar(aj))
                    .add(&v1.mul_scalar(rest))
            };
            (
                mix(&v3_i0, &v2_i0, &v1_i0, a[0], a[3]),
                mix(&v3_i1, &v2_i1, &v1_i1, a[1], a[4]),
                mix(&v3_nn, &v2_nn, &v1_nn, a[2], a[5]),
            )
        }
    }
}

/// Poisson Dirichlet coefficients `(F_l, F_r, F_nn)` for variants 1..3.
pub fn poisson_coeffs<S: Scalar>(variant: u8, x: &Jet<S>) -> (Jet<S>, Jet<S>, Jet<S>) {
    let f_nn = x.mul(x).affine(-1.0, 1.0);
    match variant {
        1 => (x.affine(-0.5, 0.5), x.affine(0.5, 0.5), f_nn),
        2 => {
            let f_l = x.affine(0.25, 0.5).mul(&poly(x, &[1.0, -2.0, 1.0]));
            let f_r = x.affine(-0.25, 0.5).mul(&poly(x, &[1.0, 2.0, 1.0]));
            (f_l, f_r, f_nn)
        }
        3 => (
            poly(x, &[0.25, -0.5, 0.25]),
            poly(x, &[0.25, 0.5, 0.25]),
            f_nn,
        ),
        _ => unreachable!("poisson variant {variant}"),
    }
}

/// Poisson coefficients for the derivative-augmented ansatz:
/// `(F_l0, F_l1, F_l2, F_r0, F_r1, F_r2, F_nn)`.
pub fn poisson_deriv_coeffs<S: Scalar>(x: &Jet<S>) -> [Jet<S>; 7] {
    let one_minus_cubed = poly(x, &[1.0, -3.0, 3.0, -1.0]); // (1-x)^3
    let one_plus_cubed = poly(x, &[1.0, 3.0, 3.0, 1.0]); // (1+x)^3
    let f_l0 = poly(x, &[0.5, 9.0 / 16.0, 3.0 / 16.0]).mul(&one_minus_cubed);
    let f_l1 = poly(x, &[5.0 / 16.0, 0.5, 3.0 / 16.0]).mul(&one_minus_cubed);
    let f_l2 = poly(x, &[1.0 / 16.0, 2.0 / 16.0, 1.0 / 16.0]).mul(&one_minus_cubed);
    let f_r0 = poly(x, &[0.5, -9.0 / 16.0, 3.0 / 16.0]).mul(&one_plus_cubed);
    let f_r1 = poly(x, &[5.0 / 16.0, -0.5, 3.0 / 16.0]).mul(&one_plus_cubed);
    let f_r2 = poly(x, &[1.0 / 16.0, -2.0 / 16.0, 1.0 / 16.0]).mul(&one_plus_cubed);
    let omx2 = x.mul(x).affine(-1.0, 1.0);
    let f_nn = omx2.mul(&omx2).mul(&omx2);
    [f_l0, f_l1, f_l2, f_r0, f_r1, f_r2, f_nn]
}

/// Wave coefficients `(F_i0(t), F_nn(t, x))` for variants 1..2.
pub fn wave_coeffs<S: Scalar>(variant: u8, t: &Jet<S>, x: &Jet<S>) -> (Jet<S>, Jet<S>) {
    match variant {
        1 => {
            let f_i0 = poly(t, &[1.0, 0.0, -3.0, 2.0]); // (1-t)^2 (2t+1)
            let f_nn = poly(t, &[0.0, 0.0, 3.0, -2.0]).mul(&x.mul(&x.add_const(-1.0)));
            (f_i0, f_nn)
        }
        2 => {
            let t4 = t.scale(4.0);
            let f_i0 = t4.sech2();
            let th = t4.tanh();
            let f_nn = th.mul(&th).mul(&x.scale(std::f64::consts::PI).sin());
            (f_i0, f_nn)
        }
        _ => unreachable!("wave variant {variant}"),
    }
}

/// Time modulations `(T_i, T_nn)` as functions of `t_n` for variants 0..3.
pub fn kdv_time_coeffs<S: Scalar>(variant: u8, tn: &Jet<S>) -> (Jet<S>, Jet<S>) {
    match variant {
        0 => (tn.const_like(1.0), *tn),
        1 => (poly(tn, &[1.0, 0.0, -3.0, 2.0]), *tn),
        2 => (
            poly(tn, &[1.0, 0.0, -3.0, 2.0]),
            poly(tn, &[0.0, 1.0, 1.0, -1.0]),
        ),
        3 => (tn.scale(5.0).sech2(), tn.scale(4.0).tanh()),
        _ => unreachable!("kdv variant {variant}"),
    }
}

/// The fixed spatial shapes of the boundary-correction terms on `[0, 5]`:
/// left value, right value, right slope, trainable modulation.
pub fn kdv_space_polys<S: Scalar>(x: &Jet<S>) -> [Jet<S>; 4] {
    let p_left = poly(x, &[1.0, -0.4, 0.04]); // (x-5)^2 / 25
    let p_right = poly(x, &[0.0, 0.4, -0.04]); // (10x - x^2) / 25
    let p_slope = poly(x, &[0.0, -1.0, 0.2]); // x(x-5) / 5
    let p_nn = poly(x, &[0.0, 25.0 / 18.0, -10.0 / 18.0, 1.0 / 18.0]); // x(x-5)^2 / 18
    [p_left, p_right, p_slope, p_nn]
}

/// Per-row constraint data supplied by the problem definitions.
#[derive(Clone, Debug)]
pub enum BoundaryData {
    /// Initial angle, angular velocity, and the equation-derived second
    /// derivative at `t0`.
    Pendulum { x0: f64, xt0: f64, xtt0: f64 },
    /// Initial state and its equation-derived time derivative.
    Lorenz { f: [f64; 3], fd: [f64; 3] },
    Poisson { g_left: f64, g_right: f64 },
    Wave { init: WaveInit },
    Kdv {
        /// Soliton speed parameter.
        c: f64,
        /// Parameter used for the analytic boundary functions (time-shifted
        /// during rollout).
        a_boundary: f64,
        init: KdvInit,
    },
}

#[derive(Clone, Debug)]
pub enum WaveInit {
    /// Truncated Fourier coefficients of the initial condition.
    Fourier([f64; 3]),
    /// Fed-back initial value at the queried `x` (value-only evaluation).
    Value(f64),
}

#[derive(Clone, Debug)]
pub enum KdvInit {
    /// Analytic initial soliton with parameter `a`.
    Analytic { a: f64 },
    /// Fed-back initial value at the queried `x` (value-only evaluation).
    Value(f64),
}

/// Wave initial profile `u0(x)` as a jet.
pub fn wave_initial_profile<S: Scalar>(init: &WaveInit, x: &Jet<S>) -> Jet<S> {
    match init {
        WaveInit::Fourier(a) => {
            let pi = std::f64::consts::PI;
            let mut u0 = x.scale(pi).sin().scale(a[0]);
            for (n, &an) in a.iter().enumerate().skip(1) {
                u0 = u0.add(&x.scale((n + 1) as f64 * pi).sin().scale(an));
            }
            u0
        }
        WaveInit::Value(v) => {
            debug_assert_eq!(
                x.order().total_degree(),
                0,
                "fed-back initial values carry no derivatives"
            );
            x.const_like(*v)
        }
    }
}

/// Soliton phase `z = (sqrt(c)/2)(5(x - a) - c t / 10)` pieces for KdV.
pub mod kdv_ref {
    use super::*;

    /// `u_ref(0, x; a, c)` as a jet in `x`.
    pub fn initial<S: Scalar>(a: f64, c: f64, x: &Jet<S>) -> Jet<S> {
        let k = c.sqrt() / 2.0;
        let z = x.affine(5.0 * k, -5.0 * k * a);
        z.sech2().scale(c / 2.0)
    }

    /// `u_ref(t, x_b; a, c)` as a jet in `t` at fixed spatial boundary `x_b`.
    pub fn boundary_value<S: Scalar>(a: f64, c: f64, x_b: f64, t: &Jet<S>) -> Jet<S> {
        let k = c.sqrt() / 2.0;
        let z = t.affine(-k * c / 10.0, k * 5.0 * (x_b - a));
        z.sech2().scale(c / 2.0)
    }

    /// `du_ref/dx (t, 5; a, c)` as a jet in `t`.
    pub fn right_slope<S: Scalar>(a: f64, c: f64, t: &Jet<S>) -> Jet<S> {
        let k = c.sqrt() / 2.0;
        let z = t.affine(-k * c / 10.0, k * 5.0 * (5.0 - a));
        z.sech2().mul(&z.tanh()).scale(-5.0 * c * k)
    }

    /// Plain values of the boundary functions at local `t`.
    pub fn boundary_value_f64(a: f64, c: f64, x_b: f64, t: f64) -> f64 {
        let k = c.sqrt() / 2.0;
        let z = k * (5.0 * (x_b - a) - c * t / 10.0);
        c / 2.0 * sech2_f64(z)
    }

    pub fn right_slope_f64(a: f64, c: f64, t: f64) -> f64 {
        let k = c.sqrt() / 2.0;
        let z = k * (5.0 * (5.0 - a) - c * t / 10.0);
        -5.0 * c * k * sech2_f64(z) * z.tanh()
    }

    fn sech2_f64(z: f64) -> f64 {
        let c = z.cosh();
        1.0 / (c * c)
    }
}

/// The ansatz attached to a network output.
#[derive(Clone, Debug, PartialEq)]
pub enum Ansatz {
    /// Pass-through; constraints live in the loss.
    Soft,
    PendulumFirstOrder(PendulumTuple),
    /// Second-order pendulum form with the `F_i2 x_tt0` term.
    PendulumSecondOrder,
    /// Second-order form plus the endpoint-residual modifier.
    PendulumSecondOrderModified,
    PendulumBlend { family: BlendFamily, init: Vec<f64> },
    LorenzBasic,
    LorenzFirstDeriv(PendulumTuple),
    PoissonDirichlet(u8),
    PoissonWithDerivatives,
    Wave(u8),
    Kdv(u8),
}

impl Ansatz {
    pub fn by_name(name: &str) -> Result<Ansatz, Error> {
        let a = match name {
            "soft" => Ansatz::Soft,
            "pendulum.honet1" => Ansatz::PendulumFirstOrder(PendulumTuple::V1),
            "pendulum.honet2" => Ansatz::PendulumFirstOrder(PendulumTuple::V2),
            "pendulum.honet3" => Ansatz::PendulumFirstOrder(PendulumTuple::V3),
            "pendulum.honet4" => Ansatz::PendulumSecondOrder,
            "pendulum.honet4m" => Ansatz::PendulumSecondOrderModified,
            "pendulum.ahonet1" => Ansatz::PendulumBlend {
                family: BlendFamily::Blend23,
                init: vec![0.5, 0.5, 0.5],
            },
            "pendulum.ahonet2" => Ansatz::PendulumBlend {
                family: BlendFamily::Blend23,
                init: vec![0.75, 0.75, 0.75],
            },
            "pendulum.ahonet3" => Ansatz::PendulumBlend {
                family: BlendFamily::Blend123,
                init: vec![0.5; 6],
            },
            "lorenz.honet" => Ansatz::LorenzBasic,
            "lorenz.honet_d1" => Ansatz::LorenzFirstDeriv(PendulumTuple::V2),
            "poisson.honet1" => Ansatz::PoissonDirichlet(1),
            "poisson.honet2" => Ansatz::PoissonDirichlet(2),
            "poisson.honet3" => Ansatz::PoissonDirichlet(3),
            "poisson.honet4" => Ansatz::PoissonWithDerivatives,
            "wave.honet1" => Ansatz::Wave(1),
            "wave.honet2" => Ansatz::Wave(2),
            "kdv.honet0" => Ansatz::Kdv(0),
            "kdv.honet1" => Ansatz::Kdv(1),
            "kdv.honet2" => Ansatz::Kdv(2),
            "kdv.honet3" => Ansatz::Kdv(3),
            _ => return Err(Error::UnknownAnsatz(name.to_string())),
        };
        Ok(a)
    }

    pub fn name(&self) -> String {
        match self {
            Ansatz::Soft => "soft".into(),
            Ansatz::PendulumFirstOrder(v) => format!("pendulum.honet{}", v.index()),
            Ansatz::PendulumSecondOrder => "pendulum.honet4".into(),
            Ansatz::PendulumSecondOrderModified => "pendulum.honet4m".into(),
            Ansatz::PendulumBlend { family: BlendFamily::Blend23, init } => {
                if init == &vec![0.75, 0.75, 0.75] {
                    "pendulum.ahonet2".into()
                } else {
                    "pendulum.ahonet1".into()
                }
            }
            Ansatz::PendulumBlend { family: BlendFamily::Blend123, .. } => "pendulum.ahonet3".into(),
            Ansatz::LorenzBasic => "lorenz.honet".into(),
            Ansatz::LorenzFirstDeriv(_) => "lorenz.honet_d1".into(),
            Ansatz::PoissonDirichlet(v) => format!("poisson.honet{v}"),
            Ansatz::PoissonWithDerivatives => "poisson.honet4".into(),
            Ansatz::Wave(v) => format!("wave.honet{v}"),
            Ansatz::Kdv(v) => format!("kdv.honet{v}"),
        }
    }

    /// Every named hard ansatz, for validation sweeps.
    pub fn registry() -> Vec<&'static str> {
        vec![
            "pendulum.honet1",
            "pendulum.honet2",
            "pendulum.honet3",
            "pendulum.honet4",
            "pendulum.honet4m",
            "pendulum.ahonet1",
            "pendulum.ahonet2",
            "pendulum.ahonet3",
            "lorenz.honet",
            "lorenz.honet_d1",
            "poisson.honet1",
            "poisson.honet2",
            "poisson.honet3",
            "poisson.honet4",
            "wave.honet1",
            "wave.honet2",
            "kdv.honet0",
            "kdv.honet1",
            "kdv.honet2",
            "kdv.honet3",
        ]
    }

    pub fn is_soft(&self) -> bool {
        matches!(self, Ansatz::Soft)
    }

    /// Number of trainable coefficients the ansatz adds to the store.
    pub fn adaptive_len(&self) -> usize {
        match self {
            Ansatz::PendulumBlend { family, .. } => family.coeff_count(),
            _ => 0,
        }
    }

    pub fn adaptive_init(&self) -> Vec<f64> {
        match self {
            Ansatz::PendulumBlend { init, .. } => init.clone(),
            _ => Vec::new(),
        }
    }

    /// Whether the ansatz uses auxiliary trainable subnetworks.
    pub fn uses_aux_nets(&self) -> bool {
        matches!(self, Ansatz::PoissonWithDerivatives)
    }
}

/// Everything the algebraic ansatz application needs for one row.
pub struct AnsatzInputs<'a, S: Scalar> {
    pub raw: &'a [Jet<S>],
    pub t: Option<&'a Jet<S>>,
    pub x: Option<&'a Jet<S>>,
    pub t0: f64,
    pub tf: f64,
    pub data: &'a BoundaryData,
    /// Trainable blend coefficients (empty unless the ansatz is adaptive).
    pub adaptive: &'a [S],
    /// Auxiliary subnetwork outputs (empty unless the ansatz uses them).
    pub aux: &'a [S],
    /// Equation residual evaluated at `tf` (endpoint-modified ansatz only).
    pub residual_at_tf: Option<S>,
}

impl Ansatz {
    /// Applies the constraint transformation to the trainable outputs.
    pub fn apply<S: Scalar>(&self, inp: &AnsatzInputs<'_, S>) -> Result<Vec<Jet<S>>, Error> {
        match self {
            Ansatz::Soft => Ok(inp.raw.to_vec()),

            Ansatz::PendulumFirstOrder(variant) => {
                let t = inp.t.ok_or(Error::MissingBoundaryData("time coordinate"))?;
                let (x0, xt0) = match inp.data {
                    BoundaryData::Pendulum { x0, xt0, .. } => (*x0, *xt0),
                    _ => return Err(Error::MissingBoundaryData("pendulum initial data")),
                };
                let (f_i0, f_i1, f_nn) = pendulum_coeffs(*variant, t, inp.t0, inp.tf);
                Ok(vec![f_i0
                    .scale(x0)
                    .add(&f_i1.scale(xt0))
                    .add(&f_nn.mul(&inp.raw[0]))])
            }

            Ansatz::PendulumBlend { family, .. } => {
                let t = inp.t.ok_or(Error::MissingBoundaryData("time coordinate"))?;
                let (x0, xt0) = match inp.data {
                    BoundaryData::Pendulum { x0, xt0, .. } => (*x0, *xt0),
                    _ => return Err(Error::MissingBoundaryData("pendulum initial data")),
                };
                let (f_i0, f_i1, f_nn) =
                    adaptive_blend_coeffs(*family, inp.adaptive, t, inp.t0, inp.tf);
                Ok(vec![f_i0
                    .scale(x0)
                    .add(&f_i1.scale(xt0))
                    .add(&f_nn.mul(&inp.raw[0]))])
            }

            Ansatz::PendulumSecondOrder | Ansatz::PendulumSecondOrderModified => {
                let t = inp.t.ok_or(Error::MissingBoundaryData("time coordinate"))?;
                let (x0, xt0, xtt0) = match inp.data {
                    BoundaryData::Pendulum { x0, xt0, xtt0 } => (*x0, *xt0, *xtt0),
                    _ => return Err(Error::MissingBoundaryData("pendulum initial data")),
                };
                let (f_i0, f_i1, f_i2, f_nn) = pendulum_second_order_coeffs(t, inp.t0, inp.tf);
                let base = f_i0
                    .scale(x0)
                    .add(&f_i1.scale(xt0))
                    .add(&f_i2.scale(xtt0))
                    .add(&f_nn.mul(&inp.raw[0]));
                if matches!(self, Ansatz::PendulumSecondOrder) {
                    return Ok(vec![base]);
                }
                let r = inp
                    .residual_at_tf
                    .ok_or(Error::MissingBoundaryData("endpoint residual"))?;
                Ok(vec![endpoint_residual_modifier(&base, r, t, inp.t0, inp.tf)])
            }

            Ansatz::LorenzBasic => {
                let t = inp.t.ok_or(Error::MissingBoundaryData("time coordinate"))?;
                let f = match inp.data {
                    BoundaryData::Lorenz { f, .. } => f,
                    _ => return Err(Error::MissingBoundaryData("lorenz initial data")),
                };
                let tn = normalized_time(t, inp.t0, inp.tf);
                let one_m = tn.affine(-1.0, 1.0);
                Ok((0..3)
                    .map(|k| one_m.scale(f[k]).add(&tn.mul(&inp.raw[k])))
                    .collect())
            }

            Ansatz::LorenzFirstDeriv(variant) => {
                let t = inp.t.ok_or(Error::MissingBoundaryData("time coordinate"))?;
                let (f, fd) = match inp.data {
                    BoundaryData::Lorenz { f, fd } => (f, fd),
                    _ => return Err(Error::MissingBoundaryData("lorenz initial data")),
                };
                let (f_i0, f_i1, f_nn) = pendulum_coeffs(*variant, t, inp.t0, inp.tf);
                Ok((0..3)
                    .map(|k| {
                        f_i0.scale(f[k])
                            .add(&f_i1.scale(fd[k]))
                            .add(&f_nn.mul(&inp.raw[k]))
                    })
                    .collect())
            }

            Ansatz::PoissonDirichlet(variant) => {
                let x = inp.x.ok_or(Error::MissingBoundaryData("space coordinate"))?;
                let (gl, gr) = match inp.data {
                    BoundaryData::Poisson { g_left, g_right } => (*g_left, *g_right),
                    _ => return Err(Error::MissingBoundaryData("poisson boundary data")),
                };
                let (f_l, f_r, f_nn) = poisson_coeffs(*variant, x);
                Ok(vec![f_l
                    .scale(gl)
                    .add(&f_r.scale(gr))
                    .add(&f_nn.mul(&inp.raw[0]))])
            }

            Ansatz::PoissonWithDerivatives => {
                let x = inp.x.ok_or(Error::MissingBoundaryData("space coordinate"))?;
                let (gl, gr) = match inp.data {
                    BoundaryData::Poisson { g_left, g_right } => (*g_left, *g_right),
                    _ => return Err(Error::MissingBoundaryData("poisson boundary data")),
                };
                if inp.aux.len() != 2 {
                    return Err(Error::MissingBoundaryData("auxiliary derivative networks"));
                }
                let [f_l0, f_l1, f_l2, f_r0, f_r1, f_r2, f_nn] = poisson_deriv_coeffs(x);
                // Known boundary curvature from the forcing: u'' = -9 sin(3x).
                let u2l = -9.0 * (-3.0f64).sin();
                let u2r = -9.0 * (3.0f64).sin();
                Ok(vec![f_l0
                    .scale(gl)
                    .add(&f_r0.scale(gr))
                    .add(&f_l1.mul_scalar(inp.aux[0]))
                    .add(&f_r1.mul_scalar(inp.aux[1]))
                    .add(&f_l2.scale(u2l))
                    .add(&f_r2.scale(u2r))
                    .add(&f_nn.mul(&inp.raw[0]))])
            }

            Ansatz::Wave(variant) => {
                let t = inp.t.ok_or(Error::MissingBoundaryData("time coordinate"))?;
                let x = inp.x.ok_or(Error::MissingBoundaryData("space coordinate"))?;
                let init = match inp.data {
                    BoundaryData::Wave { init } => init,
                    _ => return Err(Error::MissingBoundaryData("wave initial data")),
                };
                let (f_i0, f_nn) = wave_coeffs(*variant, t, x);
                let u0 = wave_initial_profile(init, x);
                Ok(vec![u0.mul(&f_i0).add(&f_nn.mul(&inp.raw[0]))])
            }

            Ansatz::Kdv(variant) => {
                let t = inp.t.ok_or(Error::MissingBoundaryData("time coordinate"))?;
                let x = inp.x.ok_or(Error::MissingBoundaryData("space coordinate"))?;
                let (c, a_bc, init) = match inp.data {
                    BoundaryData::Kdv { c, a_boundary, init } => (*c, *a_boundary, init),
                    _ => return Err(Error::MissingBoundaryData("kdv boundary data")),
                };
                let tn = normalized_time(t, inp.t0, inp.tf);
                let (t_i, t_nn) = kdv_time_coeffs(*variant, &tn);
                let [p_l, p_r, p_h, p_nn] = kdv_space_polys(x);

                let u0 = match init {
                    KdvInit::Analytic { a } => kdv_ref::initial(*a, c, x),
                    KdvInit::Value(v) => {
                        debug_assert_eq!(x.order().total_degree(), 0);
                        x.const_like(*v)
                    }
                };
                let gl_t = kdv_ref::boundary_value(a_bc, c, 0.0, t);
                let gr_t = kdv_ref::boundary_value(a_bc, c, 5.0, t);
                let h_t = kdv_ref::right_slope(a_bc, c, t);
                let gl0 = kdv_ref::boundary_value_f64(a_bc, c, 0.0, 0.0);
                let gr0 = kdv_ref::boundary_value_f64(a_bc, c, 5.0, 0.0);
                let h0 = kdv_ref::right_slope_f64(a_bc, c, 0.0);

                let out = t_i
                    .mul(&u0)
                    .add(&gl_t.sub(&t_i.scale(gl0)).mul(&p_l))
                    .add(&gr_t.sub(&t_i.scale(gr0)).mul(&p_r))
                    .add(&h_t.sub(&t_i.scale(h0)).mul(&p_h))
                    .add(&t_nn.mul(&p_nn).mul(&inp.raw[0]));
                Ok(vec![out])
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tjet(v: f64) -> Jet<f64> {
        Jet::var_t((), v, JetOrder::new(2, 0)).unwrap()
    }

    #[test]
    fn pendulum_variant_endpoints() {
        // Variant 2 at t_n = 1: (0, 0, 1); at t_n = 0: (1, 0, 0) with F_i1' = 1.
        let (i0, i1, nn) = pendulum_coeffs(PendulumTuple::V2, &tjet(1.0), 0.0, 1.0);
        assert!(i0.value().abs() < 1e-15);
        assert!(i1.value().abs() < 1e-15);
        assert!((nn.value() - 1.0).abs() < 1e-15);

        for variant in [PendulumTuple::V1, PendulumTuple::V2, PendulumTuple::V3] {
            let (i0, i1, nn) = pendulum_coeffs(variant, &tjet(0.0), 0.0, 1.0);
            assert!((i0.value() - 1.0).abs() < 1e-15);
            assert!(i1.value().abs() < 1e-15);
            assert!(nn.value().abs() < 1e-15);
            assert!((i1.deriv(1, 0) - 1.0).abs() < 1e-15, "{variant:?}");
        }
    }

    #[test]
    fn pendulum_variant3_midpoint() {
        let (i0, _, _) = pendulum_coeffs(PendulumTuple::V3, &tjet(0.5), 0.0, 1.0);
        assert!((i0.value() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn second_order_coeff_seeds() {
        let (i0, i1, i2, nn) = pendulum_second_order_coeffs(&tjet(0.0), 0.0, 1.0);
        assert!((i0.value() - 1.0).abs() < 1e-15);
        assert!((i1.deriv(1, 0) - 1.0).abs() < 1e-15);
        assert!(i2.value().abs() < 1e-15);
        assert!((i2.deriv(2, 0) - 1.0).abs() < 1e-15);
        assert!(nn.value().abs() < 1e-15);

        let (i0, i1, i2, nn) = pendulum_second_order_coeffs(&tjet(1.0), 0.0, 1.0);
        assert!(i0.value().abs() < 1e-15);
        assert!(i1.value().abs() < 1e-15);
        assert!(i2.value().abs() < 1e-14);
        assert!((nn.value() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fm_second_derivative_at_tf() {
        let fm = pendulum_fm(&tjet(1.0), 0.0, 1.0);
        assert!(fm.value().abs() < 1e-15);
        assert!(fm.deriv(1, 0).abs() < 1e-14);
        assert!((fm.deriv(2, 0) - 1.0).abs() < 1e-13);
        let fm0 = pendulum_fm(&tjet(0.0), 0.0, 1.0);
        assert!(fm0.value().abs() < 1e-15);
        assert!(fm0.deriv(1, 0).abs() < 1e-15);
        assert!(fm0.deriv(2, 0).abs() < 1e-15);
    }

    #[test]
    fn blend_endpoints_reduce_to_tuples() {
        let t = tjet(0.37);
        for (a_val, variant) in [(1.0, PendulumTuple::V3), (0.0, PendulumTuple::V2)] {
            let a = [a_val; 3];
            let (b0, b1, b2) = adaptive_blend_coeffs(BlendFamily::Blend23, &a, &t, 0.0, 1.0);
            let (v0, v1, v2) = pendulum_coeffs(variant, &t, 0.0, 1.0);
            for (b, v) in [(b0, v0), (b1, v1), (b2, v2)] {
                for i in 0..=2 {
                    assert!((b.deriv(i, 0) - v.deriv(i, 0)).abs() < 1e-14);
                }
            }
        }
        // blend123 with all-zero coefficients is variant 1.
        let a = [0.0; 6];
        let (b0, b1, b2) = adaptive_blend_coeffs(BlendFamily::Blend123, &a, &t, 0.0, 1.0);
        let (v0, v1, v2) = pendulum_coeffs(PendulumTuple::V1, &t, 0.0, 1.0);
        for (b, v) in [(b0, v0), (b1, v1), (b2, v2)] {
            for i in 0..=2 {
                assert!((b.deriv(i, 0) - v.deriv(i, 0)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn poisson_coeffs_at_center_and_boundary() {
        let x = Jet::<f64>::var_x((), 0.0, JetOrder::new(0, 2)).unwrap();
        let (l, r, nn) = poisson_coeffs(1, &x);
        assert_eq!(l.value(), 0.5);
        assert_eq!(r.value(), 0.5);
        assert_eq!(nn.value(), 1.0);

        let xb = Jet::<f64>::var_x((), -1.0, JetOrder::new(0, 2)).unwrap();
        for v in 1..=3u8 {
            let (l, r, nn) = poisson_coeffs(v, &xb);
            assert_eq!(l.value(), 1.0, "variant {v}");
            assert_eq!(r.value(), 0.0);
            assert_eq!(nn.value(), 0.0);
        }
    }

    #[test]
    fn kdv_variant0_freezes_initial_profile() {
        let order = JetOrder::new(1, 3);
        let t = Jet::<f64>::var_t((), 0.0, order).unwrap();
        let x = Jet::<f64>::var_x((), 1.7, order).unwrap();
        let data = BoundaryData::Kdv { c: 1.0, a_boundary: 2.0, init: KdvInit::Analytic { a: 2.0 } };
        let raw = [Jet::<f64>::constant((), 123.456, order)];
        let out = Ansatz::Kdv(0)
            .apply(&AnsatzInputs {
                raw: &raw,
                t: Some(&t),
                x: Some(&x),
                t0: 0.0,
                tf: 1.0,
                data: &data,
                adaptive: &[],
                aux: &[],
                residual_at_tf: None,
            })
            .unwrap();
        let want = kdv_ref::initial(2.0, 1.0, &x).value();
        assert!((out[0].value() - want).abs() < 1e-12);
    }

    #[test]
    fn kdv_crest_value() {
        // u_ref(0, a; a, c) = c/2.
        let order = JetOrder::new(0, 1);
        let x = Jet::<f64>::var_x((), 2.0, order).unwrap();
        let u = kdv_ref::initial(2.0, 1.4, &x);
        assert!((u.value() - 0.7).abs() < 1e-15);
    }
}
