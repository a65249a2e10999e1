//! Reverse-mode gradient tape over scalar operations.
//!
//! The tape is a Wengert list: every primitive result is a node holding up to
//! three parent indices and the local partial derivative with respect to each
//! parent. [`Tape::backward`] replays the list in reverse, which makes the
//! gradient accumulation order deterministic (tape order) and therefore
//! bitwise reproducible for a fixed seed and batch order.
//!
//! Parameters of a [`ParameterStore`](crate::net::ParameterStore) occupy the
//! first `n` node slots; [`Tape::rewind`] truncates everything after them so
//! one tape can be reused across batch rows without reallocating.

use std::cell::RefCell;

use crate::error::Error;
use crate::net::ParameterStore;
use crate::scalar::Scalar;

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct Node {
    parent: [u32; 3],
    partial: [f64; 3],
}

struct TapeInner {
    nodes: Vec<Node>,
    vals: Vec<f64>,
    n_params: usize,
    adj: Vec<f64>,
}

/// Single-writer operation record. One tape per worker; merge gradients in
/// worker-index order.
pub struct Tape {
    inner: RefCell<TapeInner>,
}

impl Tape {
    /// Tape with the store's parameters registered as leaf nodes 0..n.
    pub fn new(store: &ParameterStore) -> Self {
        let n = store.len();
        let mut nodes = Vec::with_capacity(n + 1024);
        let mut vals = Vec::with_capacity(n + 1024);
        for &v in store.values() {
            nodes.push(Node { parent: [NONE; 3], partial: [0.0; 3] });
            vals.push(v);
        }
        Tape {
            inner: RefCell::new(TapeInner { nodes, vals, n_params: n, adj: Vec::new() }),
        }
    }

    /// Tape without parameters (free variables only).
    pub fn empty() -> Self {
        Tape {
            inner: RefCell::new(TapeInner {
                nodes: Vec::new(),
                vals: Vec::new(),
                n_params: 0,
                adj: Vec::new(),
            }),
        }
    }

    pub fn len(&self) -> usize {
        self.inner.borrow().nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_params(&self) -> usize {
        self.inner.borrow().n_params
    }

    /// Drop all non-parameter nodes, keeping the registered parameters.
    pub fn rewind(&self) {
        let mut t = self.inner.borrow_mut();
        let n = t.n_params;
        t.nodes.truncate(n);
        t.vals.truncate(n);
    }

    /// Refresh registered parameter values from the store (after an optimizer
    /// step) without rebuilding the tape.
    pub fn reload_params(&self, store: &ParameterStore) {
        let mut t = self.inner.borrow_mut();
        assert_eq!(t.n_params, store.len(), "parameter count changed");
        t.vals[..store.len()].copy_from_slice(store.values());
    }

    /// Tracked view of parameter `index`.
    pub fn param(&self, index: usize) -> Result<Var<'_>, Error> {
        let t = self.inner.borrow();
        if index >= t.n_params {
            return Err(Error::ParamIndex { index, len: t.n_params });
        }
        Ok(Var { tape: self, idx: index as u32 })
    }

    /// New leaf that is not a parameter (an input held fixed during backward).
    pub fn leaf(&self, v: f64) -> Var<'_> {
        self.push0(v)
    }

    fn push0(&self, v: f64) -> Var<'_> {
        let mut t = self.inner.borrow_mut();
        let idx = t.nodes.len() as u32;
        t.nodes.push(Node { parent: [NONE; 3], partial: [0.0; 3] });
        t.vals.push(v);
        Var { tape: self, idx }
    }

    fn push1(&self, v: f64, p: u32, d: f64) -> Var<'_> {
        let mut t = self.inner.borrow_mut();
        let idx = t.nodes.len() as u32;
        t.nodes.push(Node { parent: [p, NONE, NONE], partial: [d, 0.0, 0.0] });
        t.vals.push(v);
        Var { tape: self, idx }
    }

    fn push2(&self, v: f64, p0: u32, d0: f64, p1: u32, d1: f64) -> Var<'_> {
        let mut t = self.inner.borrow_mut();
        let idx = t.nodes.len() as u32;
        t.nodes.push(Node { parent: [p0, p1, NONE], partial: [d0, d1, 0.0] });
        t.vals.push(v);
        Var { tape: self, idx }
    }

    fn push3(&self, v: f64, p: [u32; 3], d: [f64; 3]) -> Var<'_> {
        let mut t = self.inner.borrow_mut();
        let idx = t.nodes.len() as u32;
        t.nodes.push(Node { parent: p, partial: d });
        t.vals.push(v);
        Var { tape: self, idx }
    }

    fn value_of(&self, idx: u32) -> f64 {
        self.inner.borrow().vals[idx as usize]
    }

    /// Reverse pass from `loss`, accumulating `d loss / d theta_i` into
    /// `grad[i] += scale * ...` for every registered parameter.
    ///
    /// The adjoint buffer is zeroed as the sweep consumes it, so repeated
    /// calls on a rewound tape cost no extra clearing.
    pub fn backward_into(&self, loss: Var<'_>, scale: f64, grad: &mut [f64]) -> Result<(), Error> {
        let mut t = self.inner.borrow_mut();
        let n = t.nodes.len();
        let li = loss.idx as usize;
        if li >= n {
            return Err(Error::LossNotOnTape);
        }
        assert_eq!(grad.len(), t.n_params, "gradient buffer length mismatch");
        if t.adj.len() < n {
            t.adj.resize(n, 0.0);
        }
        t.adj[li] = scale;
        let n_params = t.n_params;
        let TapeInner { nodes, adj, .. } = &mut *t;
        for i in (0..=li).rev() {
            let a = adj[i];
            adj[i] = 0.0;
            if a == 0.0 {
                continue;
            }
            if i < n_params {
                let g = &mut grad[i];
                *g += a;
                if !g.is_finite() {
                    return Err(Error::NonFiniteGradient { node: i });
                }
                continue;
            }
            let node = nodes[i];
            for k in 0..3 {
                let p = node.parent[k];
                if p == NONE {
                    break;
                }
                adj[p as usize] += node.partial[k] * a;
            }
        }
        Ok(())
    }

    /// Gradient of `loss` with respect to every registered parameter.
    pub fn backward(&self, loss: Var<'_>) -> Result<Vec<f64>, Error> {
        let mut grad = vec![0.0; self.n_params()];
        self.backward_into(loss, 1.0, &mut grad)?;
        for (i, g) in grad.iter().enumerate() {
            if !g.is_finite() {
                return Err(Error::NonFiniteGradient { node: i });
            }
        }
        Ok(grad)
    }
}

/// A value recorded on a [`Tape`]. Cheap to copy; all arithmetic appends nodes.
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    idx: u32,
}

impl<'t> Var<'t> {
    pub fn index(self) -> usize {
        self.idx as usize
    }
}

impl<'t> Scalar for Var<'t> {
    type Ctx = &'t Tape;

    #[inline]
    fn constant(tape: &'t Tape, v: f64) -> Self {
        tape.push0(v)
    }

    #[inline]
    fn val(self) -> f64 {
        self.tape.value_of(self.idx)
    }

    #[inline]
    fn add(self, o: Self) -> Self {
        let v = self.val() + o.val();
        self.tape.push2(v, self.idx, 1.0, o.idx, 1.0)
    }

    #[inline]
    fn sub(self, o: Self) -> Self {
        let v = self.val() - o.val();
        self.tape.push2(v, self.idx, 1.0, o.idx, -1.0)
    }

    #[inline]
    fn mul(self, o: Self) -> Self {
        let a = self.val();
        let b = o.val();
        self.tape.push2(a * b, self.idx, b, o.idx, a)
    }

    #[inline]
    fn neg(self) -> Self {
        let v = -self.val();
        self.tape.push1(v, self.idx, -1.0)
    }

    #[inline]
    fn scale(self, k: f64) -> Self {
        self.tape.push1(k * self.val(), self.idx, k)
    }

    #[inline]
    fn affine(self, a: f64, b: f64) -> Self {
        self.tape.push1(a * self.val() + b, self.idx, a)
    }

    #[inline]
    fn lincomb(self, a: f64, o: Self, b: f64) -> Self {
        let v = a * self.val() + b * o.val();
        self.tape.push2(v, self.idx, a, o.idx, b)
    }

    #[inline]
    fn mul_add(self, o: Self, acc: Self) -> Self {
        let a = self.val();
        let b = o.val();
        let v = a * b + acc.val();
        self.tape
            .push3(v, [self.idx, o.idx, acc.idx], [b, a, 1.0])
    }

    #[inline]
    fn recip(self) -> Self {
        let r = 1.0 / self.val();
        self.tape.push1(r, self.idx, -r * r)
    }

    #[inline]
    fn sin(self) -> Self {
        let x = self.val();
        self.tape.push1(x.sin(), self.idx, x.cos())
    }

    #[inline]
    fn cos(self) -> Self {
        let x = self.val();
        self.tape.push1(x.cos(), self.idx, -x.sin())
    }

    #[inline]
    fn tanh(self) -> Self {
        let u = self.val().tanh();
        self.tape.push1(u, self.idx, 1.0 - u * u)
    }

    #[inline]
    fn sinh(self) -> Self {
        let x = self.val();
        self.tape.push1(x.sinh(), self.idx, x.cosh())
    }

    #[inline]
    fn cosh(self) -> Self {
        let x = self.val();
        self.tape.push1(x.cosh(), self.idx, x.sinh())
    }

    #[inline]
    fn exp(self) -> Self {
        let e = self.val().exp();
        self.tape.push1(e, self.idx, e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::ParameterStore;

    fn store(vals: &[f64]) -> ParameterStore {
        ParameterStore::from_segments(vec![("theta".to_string(), vals.to_vec())])
    }

    #[test]
    fn param_read_and_square_gradient() {
        let s = store(&[0.7]);
        let tape = Tape::new(&s);
        let th = tape.param(0).unwrap();
        assert_eq!(th.val(), 0.7);
        let loss = th.mul(th);
        let g = tape.backward(loss).unwrap();
        assert!((g[0] - 1.4).abs() < 1e-15);
    }

    #[test]
    fn param_index_out_of_range() {
        let s = store(&[1.0, 2.0]);
        let tape = Tape::new(&s);
        assert!(tape.param(2).is_err());
    }

    #[test]
    fn gradient_of_sum_is_all_ones() {
        let s = store(&[1.0, -2.0, 3.5, 0.0]);
        let tape = Tape::new(&s);
        let mut acc = tape.param(0).unwrap();
        for i in 1..4 {
            acc = acc.add(tape.param(i).unwrap());
        }
        let g = tape.backward(acc).unwrap();
        assert_eq!(g, vec![1.0; 4]);
    }

    #[test]
    fn zero_loss_zero_gradient() {
        let s = store(&[1.0, 2.0]);
        let tape = Tape::new(&s);
        let zero = Var::constant(&tape, 0.0);
        let g = tape.backward(zero).unwrap();
        assert_eq!(g, vec![0.0, 0.0]);
    }

    #[test]
    fn rewind_reuses_parameter_slots() {
        let s = store(&[2.0]);
        let tape = Tape::new(&s);
        let th = tape.param(0).unwrap();
        let _ = th.mul(th);
        assert_eq!(tape.len(), 2);
        tape.rewind();
        assert_eq!(tape.len(), 1);
        let loss = th.scale(3.0);
        let g = tape.backward(loss).unwrap();
        assert_eq!(g[0], 3.0);
    }

    #[test]
    fn backward_linearity() {
        // backward(a*L1 + b*L2) == a*backward(L1) + b*backward(L2)
        let s = store(&[0.3, -1.2, 2.0]);
        let build = |tape: &Tape| {
            let x = tape.param(0).unwrap();
            let y = tape.param(1).unwrap();
            let z = tape.param(2).unwrap();
            let l1 = x.mul(y).add(z.sin());
            let l2 = x.exp().mul(z).sub(y.mul(y));
            (l1, l2)
        };
        let (a, b) = (0.5, -2.0);

        let t1 = Tape::new(&s);
        let (l1, _) = build(&t1);
        let g1 = t1.backward(l1).unwrap();
        let t2 = Tape::new(&s);
        let (_, l2) = build(&t2);
        let g2 = t2.backward(l2).unwrap();

        let t3 = Tape::new(&s);
        let (l1c, l2c) = build(&t3);
        let combined = l1c.lincomb(a, l2c, b);
        let g = t3.backward(combined).unwrap();

        for i in 0..3 {
            let want = a * g1[i] + b * g2[i];
            assert!(
                (g[i] - want).abs() <= 1e-14 * want.abs().max(1.0),
                "component {i}: {} vs {}",
                g[i],
                want
            );
        }
    }

    #[test]
    fn deterministic_accumulation() {
        let s = store(&[1.1, 0.9]);
        let run = || {
            let tape = Tape::new(&s);
            let x = tape.param(0).unwrap();
            let y = tape.param(1).unwrap();
            let mut loss = Var::constant(&tape, 0.0);
            for k in 0..50 {
                let term = x.scale(k as f64).mul(y.sin());
                loss = loss.add(term);
            }
            tape.backward(loss).unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a, b, "same tape order must give bitwise-equal gradients");
    }
}
