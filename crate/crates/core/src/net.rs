//! MLPs, the branch-trunk contraction, parameter storage and checkpoints.
//!
//! Forward evaluation is generic over the element algebra: the branch net runs
//! on plain scalars (sensor inputs carry no coordinate derivatives), the trunk
//! net on jets. Both paths share [`mlp_forward`].

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::jet::Jet;
use crate::scalar::Scalar;
use crate::tape::{Tape, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    /// C-infinity, needed for third-order residuals.
    Tanh,
}

/// Shape of one perceptron: `hidden_layers` tanh layers of `hidden_width`
/// units followed by a linear map to `output_dim`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MlpSpec {
    pub input_dim: usize,
    pub hidden_width: usize,
    pub hidden_layers: usize,
    pub output_dim: usize,
    pub activation: Activation,
}

impl MlpSpec {
    pub fn new(input_dim: usize, hidden_width: usize, hidden_layers: usize, output_dim: usize) -> Self {
        assert!(hidden_width >= 1 && hidden_layers >= 1);
        MlpSpec { input_dim, hidden_width, hidden_layers, output_dim, activation: Activation::Tanh }
    }

    pub fn param_count(&self) -> usize {
        let w = self.hidden_width;
        let mut n = self.input_dim * w + w;
        n += (self.hidden_layers - 1) * (w * w + w);
        n += w * self.output_dim + self.output_dim;
        n
    }
}

/// Per-axis affine input normalization `(lo, hi) -> [-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct InputNorm {
    pub ranges: Vec<(f64, f64)>,
}

impl InputNorm {
    pub fn identity() -> Self {
        InputNorm { ranges: Vec::new() }
    }

    pub fn from_ranges(ranges: Vec<(f64, f64)>) -> Self {
        InputNorm { ranges }
    }

    fn params(&self, axis: usize) -> Option<(f64, f64)> {
        let (lo, hi) = *self.ranges.get(axis)?;
        let a = 2.0 / (hi - lo);
        Some((a, -1.0 - a * lo))
    }
}

/// Branch-trunk operator network: `out_k = sum_ij w_kij B_i(phi) T_j(coords)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeepOnetSpec {
    pub branch: MlpSpec,
    pub trunk: MlpSpec,
    /// Shared embedding width of the branch and trunk outputs.
    pub rank: usize,
    /// Number of output components (1 except for vector-valued systems).
    pub output_dim: usize,
    /// Optional bias added after the contraction; off by default to match the
    /// plain bilinear form.
    pub contraction_bias: bool,
    pub branch_norm: InputNorm,
    pub trunk_norm: InputNorm,
}

impl DeepOnetSpec {
    pub fn new(sensor_dim: usize, trunk_dim: usize, width: usize, depth: usize, rank: usize, output_dim: usize) -> Self {
        DeepOnetSpec {
            branch: MlpSpec::new(sensor_dim, width, depth, rank),
            trunk: MlpSpec::new(trunk_dim, width, depth, rank),
            rank,
            output_dim,
            contraction_bias: false,
            branch_norm: InputNorm::identity(),
            trunk_norm: InputNorm::identity(),
        }
    }

    pub fn contraction_len(&self) -> usize {
        let n = self.output_dim * self.rank * self.rank;
        if self.contraction_bias { n + self.output_dim } else { n }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.branch.output_dim != self.rank {
            return Err(Error::DimensionMismatch {
                what: "branch output vs rank",
                expected: self.rank,
                got: self.branch.output_dim,
            });
        }
        if self.trunk.output_dim != self.rank {
            return Err(Error::DimensionMismatch {
                what: "trunk output vs rank",
                expected: self.rank,
                got: self.trunk.output_dim,
            });
        }
        Ok(())
    }
}

/// Flat, ordered float64 parameter vector with named segments.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterStore {
    segments: Vec<(String, usize, usize)>, // name, offset, len
    values: Vec<f64>,
}

impl ParameterStore {
    pub fn from_segments(parts: Vec<(String, Vec<f64>)>) -> Self {
        let mut segments = Vec::with_capacity(parts.len());
        let mut values = Vec::new();
        for (name, vals) in parts {
            segments.push((name, values.len(), vals.len()));
            values.extend_from_slice(&vals);
        }
        ParameterStore { segments, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn segments(&self) -> impl Iterator<Item = (&str, usize, usize)> {
        self.segments.iter().map(|(n, o, l)| (n.as_str(), *o, *l))
    }

    pub fn segment(&self, name: &str) -> Option<(usize, usize)> {
        self.segments
            .iter()
            .find(|(n, _, _)| n == name)
            .map(|(_, o, l)| (*o, *l))
    }

    pub fn segment_values(&self, name: &str) -> Option<&[f64]> {
        let (o, l) = self.segment(name)?;
        Some(&self.values[o..o + l])
    }
}

/// Access to parameters as tracked or plain scalars.
pub trait ParamReader<S: Scalar> {
    fn read(&self, flat: usize) -> S;
}

impl ParamReader<f64> for ParameterStore {
    #[inline]
    fn read(&self, flat: usize) -> f64 {
        self.values[flat]
    }
}

impl<'t> ParamReader<Var<'t>> for &'t Tape {
    #[inline]
    fn read(&self, flat: usize) -> Var<'t> {
        self.param(flat).expect("parameter index within registered range")
    }
}

/// What an MLP needs from its value type: scalars and jets both qualify.
pub trait Element<S: Scalar>: Copy {
    fn from_const(ctx: S::Ctx, v: f64) -> Self;
    /// `self + s * o`.
    fn madd(self, o: Self, s: S) -> Self;
    /// `self * s`.
    fn mul_s(self, s: S) -> Self;
    /// `self + s`.
    fn add_s(self, s: S) -> Self;
    /// `a * self + b` with plain constants.
    fn affine_const(self, a: f64, b: f64) -> Self;
    fn activate(self, act: Activation) -> Self;
}

impl<S: Scalar> Element<S> for S {
    #[inline]
    fn from_const(ctx: S::Ctx, v: f64) -> Self {
        S::constant(ctx, v)
    }

    #[inline]
    fn madd(self, o: Self, s: S) -> Self {
        o.mul_add(s, self)
    }

    #[inline]
    fn mul_s(self, s: S) -> Self {
        self.mul(s)
    }

    #[inline]
    fn add_s(self, s: S) -> Self {
        self.add(s)
    }

    #[inline]
    fn affine_const(self, a: f64, b: f64) -> Self {
        self.affine(a, b)
    }

    #[inline]
    fn activate(self, act: Activation) -> Self {
        match act {
            Activation::Tanh => self.tanh(),
        }
    }
}

impl<S: Scalar> Element<S> for Jet<S> {
    #[inline]
    fn from_const(ctx: S::Ctx, v: f64) -> Self {
        // Order is irrelevant for a bare constant fed to madd/add chains only
        // through same-order jets; callers construct inputs with the right
        // order, so this is unused in practice.
        Jet::constant(ctx, v, crate::jet::JetOrder::new(0, 0))
    }

    #[inline]
    fn madd(self, o: Self, s: S) -> Self {
        self.add_scaled(&o, s)
    }

    #[inline]
    fn mul_s(self, s: S) -> Self {
        self.mul_scalar(s)
    }

    #[inline]
    fn add_s(self, s: S) -> Self {
        self.add_scalar(s)
    }

    #[inline]
    fn affine_const(self, a: f64, b: f64) -> Self {
        self.affine(a, b)
    }

    #[inline]
    fn activate(self, act: Activation) -> Self {
        match act {
            Activation::Tanh => self.tanh(),
        }
    }
}

/// Affine layers interleaved with the activation; the final layer is linear.
///
/// `base` is the flat offset of this MLP's weights inside the parameter store.
/// Layout per layer: row-major weight matrix, then biases.
pub fn mlp_forward<S: Scalar, E: Element<S>, R: ParamReader<S>>(
    spec: &MlpSpec,
    reader: &R,
    base: usize,
    input: &[E],
) -> Result<Vec<E>, Error> {
    if input.len() != spec.input_dim {
        return Err(Error::DimensionMismatch {
            what: "mlp input",
            expected: spec.input_dim,
            got: input.len(),
        });
    }
    let w = spec.hidden_width;
    let mut off = base;
    let mut h: Vec<E> = Vec::with_capacity(w.max(spec.output_dim));

    let mut layer = |inp: &[E], out_dim: usize, off: &mut usize, act: bool, h: &mut Vec<E>| {
        h.clear();
        let n_in = inp.len();
        for u in 0..out_dim {
            let wrow = *off + u * n_in;
            let mut acc = inp[0].mul_s(reader.read(wrow));
            for (k, e) in inp.iter().enumerate().skip(1) {
                acc = acc.madd(*e, reader.read(wrow + k));
            }
            acc = acc.add_s(reader.read(*off + out_dim * n_in + u));
            h.push(if act { acc.activate(spec.activation) } else { acc });
        }
        *off += out_dim * n_in + out_dim;
    };

    let mut cur: Vec<E> = input.to_vec();
    for _ in 0..spec.hidden_layers {
        layer(&cur, w, &mut off, true, &mut h);
        std::mem::swap(&mut cur, &mut h);
    }
    layer(&cur, spec.output_dim, &mut off, false, &mut h);
    Ok(h)
}

fn apply_norm<S: Scalar, E: Element<S>>(norm: &InputNorm, input: &mut [E]) {
    for (axis, e) in input.iter_mut().enumerate() {
        if let Some((a, b)) = norm.params(axis) {
            *e = e.affine_const(a, b);
        }
    }
}

/// Branch and trunk offsets inside the canonical store layout.
pub const SEG_BRANCH: &str = "branch";
pub const SEG_TRUNK: &str = "trunk";
pub const SEG_CONTRACTION: &str = "contraction";

/// Full operator-network evaluation: branch on plain sensor values, trunk on
/// coordinate jets, bilinear contraction into `output_dim` jets.
///
/// The branch input is not jet-seeded: derivatives are taken with respect to
/// trunk coordinates only.
pub fn deeponet_forward<S: Scalar, R: ParamReader<S>>(
    spec: &DeepOnetSpec,
    reader: &R,
    ctx: S::Ctx,
    layout: &StoreLayout,
    phi: &[f64],
    coords: &[Jet<S>],
) -> Result<Vec<Jet<S>>, Error> {
    spec.validate()?;
    if phi.len() != spec.branch.input_dim {
        return Err(Error::DimensionMismatch {
            what: "sensor vector",
            expected: spec.branch.input_dim,
            got: phi.len(),
        });
    }
    if coords.len() != spec.trunk.input_dim {
        return Err(Error::DimensionMismatch {
            what: "trunk coords",
            expected: spec.trunk.input_dim,
            got: coords.len(),
        });
    }

    let mut branch_in: Vec<S> = phi.iter().map(|&v| S::constant(ctx, v)).collect();
    apply_norm::<S, S>(&spec.branch_norm, &mut branch_in);
    let b = mlp_forward::<S, S, R>(&spec.branch, reader, layout.branch, &branch_in)?;

    let mut trunk_in = coords.to_vec();
    apply_norm::<S, Jet<S>>(&spec.trunk_norm, &mut trunk_in);
    let t = mlp_forward::<S, Jet<S>, R>(&spec.trunk, reader, layout.trunk, &trunk_in)?;

    let p = spec.rank;
    let mut out = Vec::with_capacity(spec.output_dim);
    for k in 0..spec.output_dim {
        // s_j = sum_i w_kij B_i, then sum_j s_j T_j.
        let kbase = layout.contraction + k * p * p;
        let mut acc: Option<Jet<S>> = None;
        for j in 0..p {
            let mut s = b[0].mul(reader.read(kbase + j));
            for (i, bi) in b.iter().enumerate().skip(1) {
                s = bi.mul_add(reader.read(kbase + i * p + j), s);
            }
            acc = Some(match acc {
                None => t[j].mul_scalar(s),
                Some(a) => a.add_scaled(&t[j], s),
            });
        }
        let mut jet = acc.expect("rank >= 1");
        if spec.contraction_bias {
            let bias = reader.read(layout.contraction + spec.output_dim * p * p + k);
            jet = jet.add_scalar(bias);
        }
        out.push(jet);
    }
    Ok(out)
}

/// Flat offsets of the canonical segments.
#[derive(Clone, Copy, Debug, Default)]
pub struct StoreLayout {
    pub branch: usize,
    pub trunk: usize,
    pub contraction: usize,
    pub aux_left: Option<usize>,
    pub aux_right: Option<usize>,
    pub ansatz: Option<usize>,
}

impl StoreLayout {
    pub fn from_store(store: &ParameterStore) -> Self {
        StoreLayout {
            branch: store.segment(SEG_BRANCH).map(|(o, _)| o).unwrap_or(0),
            trunk: store.segment(SEG_TRUNK).map(|(o, _)| o).unwrap_or(0),
            contraction: store.segment(SEG_CONTRACTION).map(|(o, _)| o).unwrap_or(0),
            aux_left: store.segment("aux_left").map(|(o, _)| o),
            aux_right: store.segment("aux_right").map(|(o, _)| o),
            ansatz: store.segment("ansatz").map(|(o, _)| o),
        }
    }
}

fn glorot_fill(rng: &mut ChaCha8Rng, out: &mut Vec<f64>, fan_in: usize, fan_out: usize, n: usize) {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    for _ in 0..n {
        out.push(rng.gen_range(-limit..limit));
    }
}

/// Glorot-uniform weights, zero biases, for one MLP.
pub fn init_mlp(spec: &MlpSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let w = spec.hidden_width;
    let mut vals = Vec::with_capacity(spec.param_count());
    let mut dims = Vec::with_capacity(spec.hidden_layers + 1);
    dims.push((spec.input_dim, w));
    for _ in 1..spec.hidden_layers {
        dims.push((w, w));
    }
    dims.push((w, spec.output_dim));
    for (fi, fo) in dims {
        glorot_fill(rng, &mut vals, fi, fo, fi * fo);
        vals.extend(std::iter::repeat(0.0).take(fo));
    }
    vals
}

/// Branch, trunk and contraction segments for a fresh network.
pub fn init_deeponet(spec: &DeepOnetSpec, rng: &mut ChaCha8Rng) -> Vec<(String, Vec<f64>)> {
    let branch = init_mlp(&spec.branch, rng);
    let trunk = init_mlp(&spec.trunk, rng);
    let p = spec.rank;
    let mut contraction = Vec::with_capacity(spec.contraction_len());
    glorot_fill(rng, &mut contraction, p * p, spec.output_dim, spec.output_dim * p * p);
    if spec.contraction_bias {
        contraction.extend(std::iter::repeat(0.0).take(spec.output_dim));
    }
    vec![
        (SEG_BRANCH.to_string(), branch),
        (SEG_TRUNK.to_string(), trunk),
        (SEG_CONTRACTION.to_string(), contraction),
    ]
}

/// FNV-1a 64 over a canonical description; stable across runs and platforms.
pub fn fnv1a64(text: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Writes `HONET1 <spec-hash> <name>:<len>...` then little-endian float64
/// payload in segment order.
pub fn save_params(store: &ParameterStore, spec_hash: u64, path: &Path) -> Result<(), Error> {
    let mut header = format!("HONET1 {spec_hash:016x}");
    for (name, _, len) in store.segments() {
        header.push_str(&format!(" {name}:{len}"));
    }
    header.push('\n');
    let mut buf = Vec::with_capacity(header.len() + store.len() * 8);
    buf.extend_from_slice(header.as_bytes());
    for v in store.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, buf)?;
    Ok(())
}

/// Reads a checkpoint, verifying the spec hash and the segment layout.
pub fn load_params(expected: &ParameterStore, spec_hash: u64, path: &Path) -> Result<ParameterStore, Error> {
    let mut file = fs::File::open(path)?;
    let mut data = Vec::new();
    file.read_to_end(&mut data)?;
    let nl = data
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::CheckpointMismatch("missing header line".into()))?;
    let header = std::str::from_utf8(&data[..nl])
        .map_err(|_| Error::CheckpointMismatch("header is not UTF-8".into()))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some("HONET1") {
        return Err(Error::CheckpointMismatch("bad magic".into()));
    }
    let hash = parts
        .next()
        .and_then(|h| u64::from_str_radix(h, 16).ok())
        .ok_or_else(|| Error::CheckpointMismatch("bad spec hash".into()))?;
    if hash != spec_hash {
        return Err(Error::CheckpointMismatch(format!(
            "spec hash {hash:016x} does not match expected {spec_hash:016x}"
        )));
    }
    let mut segs = Vec::new();
    for p in parts {
        let (name, len) = p
            .split_once(':')
            .ok_or_else(|| Error::CheckpointMismatch(format!("bad segment entry `{p}`")))?;
        let len: usize = len
            .parse()
            .map_err(|_| Error::CheckpointMismatch(format!("bad segment length in `{p}`")))?;
        segs.push((name.to_string(), len));
    }
    let want: Vec<(String, usize)> = expected
        .segments()
        .map(|(n, _, l)| (n.to_string(), l))
        .collect();
    if segs != want {
        return Err(Error::CheckpointMismatch(format!(
            "segment layout {segs:?} does not match expected {want:?}"
        )));
    }
    let total: usize = segs.iter().map(|(_, l)| l).sum();
    let payload = &data[nl + 1..];
    if payload.len() != total * 8 {
        return Err(Error::CheckpointMismatch(format!(
            "payload holds {} bytes, expected {}",
            payload.len(),
            total * 8
        )));
    }
    let mut values = Vec::with_capacity(total);
    for chunk in payload.chunks_exact(8) {
        values.push(f64::from_le_bytes(chunk.try_into().unwrap()));
    }
    let mut parts = Vec::new();
    let mut off = 0;
    for (name, len) in segs {
        parts.push((name, values[off..off + len].to_vec()));
        off += len;
    }
    Ok(ParameterStore::from_segments(parts))
}

/// Writes store values into a tape-free copy (used by optimizer tests).
pub fn store_with_values(store: &ParameterStore, values: Vec<f64>) -> ParameterStore {
    assert_eq!(store.len(), values.len());
    let mut out = store.clone();
    out.values_mut().copy_from_slice(&values);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::JetOrder;

    #[test]
    fn param_counts() {
        // width 40, depth 4, input 2, output 40 (pendulum-sized).
        let m = MlpSpec::new(2, 40, 4, 40);
        assert_eq!(m.param_count(), 2 * 40 + 40 + 3 * (40 * 40 + 40) + 40 * 40 + 40);
    }

    #[test]
    fn same_seed_same_store() {
        let spec = DeepOnetSpec::new(2, 1, 8, 2, 8, 1);
        let mut r1 = ChaCha8Rng::seed_from_u64(7);
        let mut r2 = ChaCha8Rng::seed_from_u64(7);
        let a = ParameterStore::from_segments(init_deeponet(&spec, &mut r1));
        let b = ParameterStore::from_segments(init_deeponet(&spec, &mut r2));
        assert_eq!(a, b);
    }

    #[test]
    fn zero_net_zero_output() {
        let spec = MlpSpec::new(1, 4, 2, 3);
        let store = ParameterStore::from_segments(vec![("w".into(), vec![0.0; spec.param_count()])]);
        let t = Jet::<f64>::var_t((), 0.4, JetOrder::new(1, 0)).unwrap();
        let out = mlp_forward::<f64, Jet<f64>, _>(&spec, &store, 0, &[t]).unwrap();
        for o in out {
            assert_eq!(o.value(), 0.0);
            assert_eq!(o.deriv(1, 0), 0.0);
        }
    }

    #[test]
    fn single_tanh_unit() {
        // 1 hidden layer, w=1, b=0 everywhere: output = tanh(t).
        let spec = MlpSpec::new(1, 1, 1, 1);
        let vals = vec![1.0, 0.0, 1.0, 0.0];
        let store = ParameterStore::from_segments(vec![("w".into(), vals)]);
        let t = Jet::<f64>::var_t((), 0.0, JetOrder::new(1, 0)).unwrap();
        let out = mlp_forward::<f64, Jet<f64>, _>(&spec, &store, 0, &[t]).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out[0].value().abs() < 1e-15);
        assert!((out[0].deriv(1, 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scalar_contraction() {
        // p = 1; B = 2 (weights force it), T = 3, w = 5 -> output 30.
        let mut spec = DeepOnetSpec::new(1, 1, 1, 1, 1, 1);
        spec.branch.activation = Activation::Tanh;
        // branch: W=[0], b=[2] -> hidden tanh(2); make linear out W=[x] ...
        // Simpler: drive through explicit parameter values.
        // branch hidden: w=0,b=atanh? Avoid: set hidden output via bias then out layer.
        // hidden = tanh(0*phi + b0); choose b0 = atanh(0.5) so hidden = 0.5;
        // out = w1*0.5 + b1 = 2 with w1=4, b1=0.
        let b0 = 0.5f64.atanh();
        let branch = vec![0.0, b0, 4.0, 0.0];
        // trunk: hidden = tanh(0*t + b0) = 0.5, out = 6*0.5 = 3.
        let trunk = vec![0.0, b0, 6.0, 0.0];
        let contraction = vec![5.0];
        let store = ParameterStore::from_segments(vec![
            (SEG_BRANCH.into(), branch),
            (SEG_TRUNK.into(), trunk),
            (SEG_CONTRACTION.into(), contraction),
        ]);
        let layout = StoreLayout::from_store(&store);
        let t = Jet::<f64>::var_t((), 0.3, JetOrder::new(1, 0)).unwrap();
        let out = deeponet_forward(&spec, &store, (), &layout, &[1.0], &[t]).unwrap();
        assert!((out[0].value() - 30.0).abs() < 1e-12);
    }

    #[test]
    fn zero_contraction_zero_output() {
        let spec = DeepOnetSpec::new(2, 1, 6, 2, 6, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut segs = init_deeponet(&spec, &mut rng);
        for v in &mut segs[2].1 {
            *v = 0.0;
        }
        let store = ParameterStore::from_segments(segs);
        let layout = StoreLayout::from_store(&store);
        let t = Jet::<f64>::var_t((), 0.5, JetOrder::new(2, 0)).unwrap();
        let out = deeponet_forward(&spec, &store, (), &layout, &[0.3, -0.7], &[t]).unwrap();
        assert_eq!(out[0].value(), 0.0);
        assert_eq!(out[0].deriv(2, 0), 0.0);
    }

    #[test]
    fn checkpoint_round_trip() {
        let spec = DeepOnetSpec::new(3, 1, 5, 2, 5, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let store = ParameterStore::from_segments(init_deeponet(&spec, &mut rng));
        let dir = std::env::temp_dir().join("honet_ckpt_test");
        let path = dir.join("net.ckpt");
        save_params(&store, 0xabcd, &path).unwrap();
        let loaded = load_params(&store, 0xabcd, &path).unwrap();
        assert_eq!(store, loaded);

        // Wrong hash rejected.
        assert!(load_params(&store, 0xabce, &path).is_err());

        // Wrong layout rejected.
        let other = DeepOnetSpec::new(3, 1, 6, 2, 6, 3);
        let other_store = ParameterStore::from_segments(init_deeponet(&other, &mut rng));
        assert!(load_params(&other_store, 0xabcd, &path).is_err());

        // Truncated payload rejected.
        let data = std::fs::read(&path).unwrap();
        std::fs::write(&path, &data[..data.len() - 8]).unwrap();
        assert!(load_params(&store, 0xabcd, &path).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn contraction_linearity_in_weights() {
        let spec = DeepOnetSpec::new(2, 1, 5, 2, 5, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let segs = init_deeponet(&spec, &mut rng);
        let store = ParameterStore::from_segments(segs);
        let layout = StoreLayout::from_store(&store);
        let t = Jet::<f64>::var_t((), 0.7, JetOrder::new(1, 0)).unwrap();
        let phi = [0.2, -0.4];

        let out1 = deeponet_forward(&spec, &store, (), &layout, &phi, &[t]).unwrap()[0].value();
        let mut doubled = store.clone();
        let (o, l) = doubled.segment(SEG_CONTRACTION).unwrap();
        for v in &mut doubled.values_mut()[o..o + l] {
            *v *= 2.0;
        }
        let out2 = deeponet_forward(&spec, &doubled, (), &layout, &phi, &[t]).unwrap()[0].value();
        assert!((out2 - 2.0 * out1).abs() <= 1e-12 * out1.abs().max(1.0));
    }
}
