//! Compact CSI feedback autoencoder with a quantized bottleneck.
//!
//! Dense MLP encoder and decoder over the real/imaginary split of the CSI
//! matrix. The encoder ends in a tanh squash to (-1, 1); each latent
//! dimension is quantized to a `bits_per_dim`-bit uniform mid-rise level and
//! the concatenated level indices form the feedback bitstream. The loss is
//! the negative mean SGCS between targets and the raw (pre-normalization)
//! decoder output; gradients are exact for every differentiable piece and
//! pass straight through the quantizer.

use crate::cmatrix::{C64, CMatrix};
use crate::csi::{sgcs, CsiMatrix};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Hidden-layer nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
        }
    }

    fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Bottleneck behaviour: the uniform quantizer of the feedback path, or a
/// pass-through used by gradient checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantizerMode {
    Uniform,
    Identity,
}

/// Model hyperparameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelConfig {
    pub n_tx: usize,
    pub n_subbands: usize,
    /// Encoder hidden widths; the decoder mirrors them.
    pub hidden: Vec<usize>,
    /// Feedback bits `B`.
    pub feedback_bits: usize,
    /// Bits per latent dimension `B_q`.
    pub bits_per_dim: usize,
    pub activation: Activation,
    pub quantizer: QuantizerMode,
}

impl ModelConfig {
    pub fn input_dim(&self) -> usize {
        2 * self.n_tx * self.n_subbands
    }

    pub fn latent_dim(&self) -> usize {
        self.feedback_bits / self.bits_per_dim
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_tx == 0 || self.n_subbands == 0 {
            return Err(Error::invalid_config("matrix dimensions must be >= 1"));
        }
        if self.bits_per_dim == 0 || self.bits_per_dim > 16 {
            return Err(Error::invalid_config("bits_per_dim must be in 1..=16"));
        }
        if self.feedback_bits == 0 || self.feedback_bits % self.bits_per_dim != 0 {
            return Err(Error::invalid_config(
                "feedback_bits must be a positive multiple of bits_per_dim",
            ));
        }
        if self.hidden.iter().any(|&h| h == 0) {
            return Err(Error::invalid_config("hidden widths must be >= 1"));
        }
        Ok(())
    }

    /// Layer widths of the encoder, input to latent.
    fn encoder_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.input_dim()];
        dims.extend_from_slice(&self.hidden);
        dims.push(self.latent_dim());
        dims
    }

    /// Layer widths of the decoder, latent to output.
    fn decoder_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.latent_dim()];
        dims.extend(self.hidden.iter().rev());
        dims.push(self.input_dim());
        dims
    }
}

/// One dense layer's parameters (or an identically-shaped gradient/moment
/// block). Weights are row-major `[out][in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamBlock {
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl ParamBlock {
    fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            w: vec![0.0; in_dim * out_dim],
            b: vec![0.0; out_dim],
            in_dim,
            out_dim,
        }
    }

    fn forward(&self, x: &[f64], out: &mut Vec<f64>) {
        debug_assert_eq!(x.len(), self.in_dim);
        out.clear();
        out.reserve(self.out_dim);
        for o in 0..self.out_dim {
            let row = &self.w[o * self.in_dim..(o + 1) * self.in_dim];
            let mut acc = self.b[o];
            for (wi, xi) in row.iter().zip(x.iter()) {
                acc += wi * xi;
            }
            out.push(acc);
        }
    }

    pub fn zero_like(&self) -> Self {
        Self::zeros(self.in_dim, self.out_dim)
    }
}

/// Encoder and decoder parameter stacks.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub encoder: Vec<ParamBlock>,
    pub decoder: Vec<ParamBlock>,
}

impl ModelParams {
    pub fn blocks(&self) -> impl Iterator<Item = &ParamBlock> {
        self.encoder.iter().chain(self.decoder.iter())
    }

    pub fn blocks_mut(&mut self) -> impl Iterator<Item = &mut ParamBlock> {
        self.encoder.iter_mut().chain(self.decoder.iter_mut())
    }

    pub fn zero_like(&self) -> Self {
        Self {
            encoder: self.encoder.iter().map(ParamBlock::zero_like).collect(),
            decoder: self.decoder.iter().map(ParamBlock::zero_like).collect(),
        }
    }

    pub fn n_parameters(&self) -> usize {
        self.blocks().map(|b| b.w.len() + b.b.len()).sum()
    }
}

/// Gradients in the same layout as [`ModelParams`].
pub type ModelGrads = ModelParams;

/// Autoencoder: configuration plus parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub cfg: ModelConfig,
    pub params: ModelParams,
}

fn glorot_block(rng: &mut RngStream, in_dim: usize, out_dim: usize) -> ParamBlock {
    let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
    let mut block = ParamBlock::zeros(in_dim, out_dim);
    for w in block.w.iter_mut() {
        *w = (rng.uniform_f64() * 2.0 - 1.0) * limit;
    }
    block
}

impl Model {
    /// Fresh model with Glorot-uniform weights and zero biases from the
    /// given stream.
    pub fn init(cfg: ModelConfig, rng: &mut RngStream) -> Result<Self> {
        cfg.validate()?;
        let make = |dims: &[usize], rng: &mut RngStream| -> Vec<ParamBlock> {
            dims.windows(2).map(|w| glorot_block(rng, w[0], w[1])).collect()
        };
        let encoder = make(&cfg.encoder_dims(), rng);
        let decoder = make(&cfg.decoder_dims(), rng);
        Ok(Self {
            cfg,
            params: ModelParams { encoder, decoder },
        })
    }

    /// Flattens a CSI matrix to the real input vector: matrix entries in
    /// row-major order, each contributing `(re, im)`.
    pub fn flatten(&self, w: &CsiMatrix) -> Result<Vec<f64>> {
        if w.n_tx() != self.cfg.n_tx || w.n_subbands() != self.cfg.n_subbands {
            return Err(Error::invalid_argument(format!(
                "sample is {}x{}, model expects {}x{}",
                w.n_tx(),
                w.n_subbands(),
                self.cfg.n_tx,
                self.cfg.n_subbands
            )));
        }
        let mut x = Vec::with_capacity(self.cfg.input_dim());
        for z in w.matrix().entries() {
            x.push(z.re);
            x.push(z.im);
        }
        Ok(x)
    }

    fn unflatten(&self, x: &[f64]) -> CMatrix {
        CMatrix::from_fn(self.cfg.n_tx, self.cfg.n_subbands, |r, c| {
            let k = 2 * (r * self.cfg.n_subbands + c);
            C64::new(x[k], x[k + 1])
        })
    }

    /// Encoder forward to the squashed latent vector in (-1, 1).
    fn latent(&self, x: &[f64]) -> Vec<f64> {
        let mut a = x.to_vec();
        let mut z = Vec::new();
        let last = self.params.encoder.len() - 1;
        for (i, layer) in self.params.encoder.iter().enumerate() {
            layer.forward(&a, &mut z);
            let act = if i == last { Activation::Tanh } else { self.cfg.activation };
            a.clear();
            a.extend(z.iter().map(|&v| act.apply(v)));
        }
        a
    }

    fn decode_levels(&self, levels: &[f64]) -> Vec<f64> {
        let mut a = levels.to_vec();
        let mut z = Vec::new();
        let last = self.params.decoder.len() - 1;
        for (i, layer) in self.params.decoder.iter().enumerate() {
            layer.forward(&a, &mut z);
            if i == last {
                a.clear();
                a.extend_from_slice(&z);
            } else {
                a.clear();
                a.extend(z.iter().map(|&v| self.cfg.activation.apply(v)));
            }
        }
        a
    }

    /// Compresses a CSI matrix to its feedback bits; also returns the
    /// pre-quantization latent vector.
    pub fn encode(&self, w: &CsiMatrix) -> Result<(Vec<u8>, Vec<f64>)> {
        let x = self.flatten(w)?;
        let latent = self.latent(&x);
        let indices = quantize_indices(&latent, self.cfg.bits_per_dim);
        Ok((indices_to_bits(&indices, self.cfg.bits_per_dim), latent))
    }

    /// Reconstructs a CSI matrix from feedback bits (dequantize, decoder
    /// MLP, per-subband normalization).
    pub fn decode(&self, bits: &[u8]) -> Result<CsiMatrix> {
        if bits.len() != self.cfg.feedback_bits {
            return Err(Error::invalid_argument(format!(
                "bitstream length {} != {}",
                bits.len(),
                self.cfg.feedback_bits
            )));
        }
        let indices = bits_to_indices(bits, self.cfg.bits_per_dim)?;
        let levels: Vec<f64> = indices
            .iter()
            .map(|&i| level_center(i, self.cfg.bits_per_dim))
            .collect();
        let raw = self.decode_levels(&levels);
        CsiMatrix::from_unnormalized(self.unflatten(&raw))
    }

    /// Full feedback round trip: encode, quantize per config, decode,
    /// normalize.
    pub fn autoencode(&self, w: &CsiMatrix) -> Result<CsiMatrix> {
        let x = self.flatten(w)?;
        let latent = self.latent(&x);
        let levels = match self.cfg.quantizer {
            QuantizerMode::Uniform => quantize_values(&latent, self.cfg.bits_per_dim),
            QuantizerMode::Identity => latent,
        };
        let raw = self.decode_levels(&levels);
        CsiMatrix::from_unnormalized(self.unflatten(&raw))
    }

    /// Mean SGCS of the full feedback round trip over a dataset.
    pub fn mean_sgcs(&self, data: &[CsiMatrix]) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::invalid_argument("empty evaluation set"));
        }
        let mut acc = 0.0;
        for w in data {
            acc += sgcs(w, &self.autoencode(w)?)?;
        }
        Ok(acc / data.len() as f64)
    }

    /// Negative mean SGCS over the batch (computed on the raw decoder
    /// output), plus exact gradients for all parameters. The quantizer
    /// contributes a straight-through pass in the backward sweep.
    pub fn loss_and_grad(&self, batch: &[&CsiMatrix]) -> Result<(f64, ModelGrads)> {
        if batch.is_empty() {
            return Err(Error::invalid_argument("empty batch"));
        }
        let mut grads = self.params.zero_like();
        let mut loss = 0.0;
        let inv_batch = 1.0 / batch.len() as f64;
        for w in batch {
            loss += inv_batch * self.backprop_sample(w, inv_batch, &mut grads)?;
        }
        Ok((loss, grads))
    }

    fn backprop_sample(&self, w: &CsiMatrix, weight: f64, grads: &mut ModelGrads) -> Result<f64> {
        let x = self.flatten(w)?;
        let n_enc = self.params.encoder.len();
        let n_dec = self.params.decoder.len();

        // Forward, keeping pre-activations and activations.
        let mut enc_pre: Vec<Vec<f64>> = Vec::with_capacity(n_enc);
        let mut enc_act: Vec<Vec<f64>> = Vec::with_capacity(n_enc);
        let mut a = x.clone();
        for (i, layer) in self.params.encoder.iter().enumerate() {
            let mut z = Vec::new();
            layer.forward(&a, &mut z);
            let act = if i == n_enc - 1 { Activation::Tanh } else { self.cfg.activation };
            a = z.iter().map(|&v| act.apply(v)).collect();
            enc_pre.push(z);
            enc_act.push(a.clone());
        }
        let latent = a;
        let levels = match self.cfg.quantizer {
            QuantizerMode::Uniform => quantize_values(&latent, self.cfg.bits_per_dim),
            QuantizerMode::Identity => latent.clone(),
        };
        let mut dec_pre: Vec<Vec<f64>> = Vec::with_capacity(n_dec);
        let mut dec_act: Vec<Vec<f64>> = Vec::with_capacity(n_dec);
        let mut a = levels.clone();
        for (i, layer) in self.params.decoder.iter().enumerate() {
            let mut z = Vec::new();
            layer.forward(&a, &mut z);
            a = if i == n_dec - 1 {
                z.clone()
            } else {
                z.iter().map(|&v| self.cfg.activation.apply(v)).collect()
            };
            dec_pre.push(z);
            dec_act.push(a.clone());
        }
        let raw = &dec_act[n_dec - 1];

        // Loss and its gradient with respect to the raw output.
        let (n_sb, n_t) = (self.cfg.n_subbands, self.cfg.n_tx);
        let mut d_raw = vec![0.0f64; raw.len()];
        let mut mean_rho = 0.0;
        let inv_sb = 1.0 / n_sb as f64;
        for l in 0..n_sb {
            let mut c = C64::new(0.0, 0.0);
            let mut s = 0.0f64;
            for r in 0..n_t {
                let k = 2 * (r * n_sb + l);
                let what = C64::new(raw[k], raw[k + 1]);
                let target = w.matrix().get(r, l);
                c += target.conj() * what;
                s += what.norm_sqr();
            }
            if s < 1e-30 {
                // Zero reconstruction column: no similarity, no usable
                // direction.
                continue;
            }
            let c2 = c.norm_sqr();
            mean_rho += inv_sb * c2 / s;
            // d(rho)/d(re, im) of each reconstructed entry; the loss is
            // -mean, so the sign flips and the batch/subband weights fold in.
            let scale = -weight * inv_sb;
            for r in 0..n_t {
                let k = 2 * (r * n_sb + l);
                let what = C64::new(raw[k], raw[k + 1]);
                let g = c.conj() * w.matrix().get(r, l).conj();
                d_raw[k] += scale * (2.0 * g.re / s - c2 / (s * s) * 2.0 * what.re);
                d_raw[k + 1] += scale * (-2.0 * g.im / s - c2 / (s * s) * 2.0 * what.im);
            }
        }
        let sample_loss = -mean_rho;

        // Decoder backward.
        let mut d_out = d_raw;
        for i in (0..n_dec).rev() {
            let layer = &self.params.decoder[i];
            let gblock = &mut grads.decoder[i];
            let mut dz = d_out;
            if i != n_dec - 1 {
                for (v, z) in dz.iter_mut().zip(dec_pre[i].iter()) {
                    *v *= self.cfg.activation.derivative(*z);
                }
            }
            let a_in: &[f64] = if i == 0 { &levels } else { &dec_act[i - 1] };
            accumulate_layer(layer, gblock, &dz, a_in);
            d_out = back_input(layer, &dz);
        }

        // Straight-through quantizer: gradient passes unchanged, then the
        // tanh squash of the last encoder layer.
        let mut d_latent = d_out;
        for (v, z) in d_latent.iter_mut().zip(enc_pre[n_enc - 1].iter()) {
            *v *= Activation::Tanh.derivative(*z);
        }

        // Encoder backward.
        let mut dz = d_latent;
        for i in (0..n_enc).rev() {
            let layer = &self.params.encoder[i];
            let gblock = &mut grads.encoder[i];
            if i != n_enc - 1 {
                for (v, z) in dz.iter_mut().zip(enc_pre[i].iter()) {
                    *v *= self.cfg.activation.derivative(*z);
                }
            }
            let a_in: &[f64] = if i == 0 { &x } else { &enc_act[i - 1] };
            accumulate_layer(layer, gblock, &dz, a_in);
            if i > 0 {
                dz = back_input(layer, &dz);
            }
        }

        Ok(sample_loss)
    }
}

fn accumulate_layer(layer: &ParamBlock, grad: &mut ParamBlock, dz: &[f64], a_in: &[f64]) {
    for o in 0..layer.out_dim {
        let g = dz[o];
        if g == 0.0 {
            continue;
        }
        let row = &mut grad.w[o * layer.in_dim..(o + 1) * layer.in_dim];
        for (gw, ai) in row.iter_mut().zip(a_in.iter()) {
            *gw += g * ai;
        }
        grad.b[o] += g;
    }
}

fn back_input(layer: &ParamBlock, dz: &[f64]) -> Vec<f64> {
    let mut d_in = vec![0.0f64; layer.in_dim];
    for o in 0..layer.out_dim {
        let g = dz[o];
        if g == 0.0 {
            continue;
        }
        let row = &layer.w[o * layer.in_dim..(o + 1) * layer.in_dim];
        for (di, wi) in d_in.iter_mut().zip(row.iter()) {
            *di += g * wi;
        }
    }
    d_in
}

/// Mid-rise level index of a value in (-1, 1): `2^bits` uniform cells.
pub fn quantize_index(x: f64, bits: usize) -> usize {
    let levels = 1usize << bits;
    let idx = ((x + 1.0) * 0.5 * levels as f64).floor() as isize;
    idx.clamp(0, levels as isize - 1) as usize
}

/// Center of a quantizer cell: `(2i + 1) / 2^bits - 1`.
pub fn level_center(index: usize, bits: usize) -> f64 {
    let levels = (1usize << bits) as f64;
    (2 * index + 1) as f64 / levels - 1.0
}

pub fn quantize_indices(xs: &[f64], bits: usize) -> Vec<usize> {
    xs.iter().map(|&x| quantize_index(x, bits)).collect()
}

pub fn quantize_values(xs: &[f64], bits: usize) -> Vec<f64> {
    xs.iter().map(|&x| level_center(quantize_index(x, bits), bits)).collect()
}

/// Concatenates level indices MSB-first into a 0/1 byte vector.
pub fn indices_to_bits(indices: &[usize], bits: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(indices.len() * bits);
    for &idx in indices {
        for b in (0..bits).rev() {
            out.push(((idx >> b) & 1) as u8);
        }
    }
    out
}

pub fn bits_to_indices(bitstream: &[u8], bits: usize) -> Result<Vec<usize>> {
    if bitstream.len() % bits != 0 {
        return Err(Error::invalid_argument("bitstream length not a multiple of bits_per_dim"));
    }
    if let Some(bad) = bitstream.iter().find(|&&b| b > 1) {
        return Err(Error::invalid_argument(format!("bit value {bad} is not 0/1")));
    }
    Ok(bitstream
        .chunks(bits)
        .map(|chunk| chunk.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize))
        .collect())
}

/// Negative mean SGCS between raw reconstructions and targets; the loss that
/// [`Model::loss_and_grad`] optimizes, exposed for direct checks.
pub fn batch_sgcs_loss(outputs: &[CMatrix], targets: &[CsiMatrix]) -> Result<f64> {
    if outputs.len() != targets.len() || outputs.is_empty() {
        return Err(Error::invalid_argument("batch size mismatch or empty"));
    }
    let mut acc = 0.0;
    for (o, t) in outputs.iter().zip(targets.iter()) {
        acc += crate::csi::sgcs_raw(t.matrix(), o)?;
    }
    Ok(-acc / outputs.len() as f64)
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Adam first/second moments, shaped like the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: ModelParams,
    pub v: ModelParams,
}

impl AdamState {
    pub fn new(params: &ModelParams) -> Self {
        Self {
            m: params.zero_like(),
            v: params.zero_like(),
        }
    }
}

/// Mutable training state: model, optimizer moments, step counter, learning
/// rate, and the stream that drives batch sampling.
#[derive(Debug, Clone)]
pub struct TrainState {
    pub model: Model,
    pub opt: AdamState,
    pub step: u64,
    pub lr: f64,
    pub rng: RngStream,
}

impl TrainState {
    pub fn new(model: Model, lr: f64, rng: RngStream) -> Self {
        let opt = AdamState::new(&model.params);
        Self {
            model,
            opt,
            step: 0,
            lr,
            rng,
        }
    }

    /// Resets the optimizer moments and step counter, keeping the model.
    pub fn reset_optimizer(&mut self) {
        self.opt = AdamState::new(&self.model.params);
        self.step = 0;
    }

    /// Runs `steps` Adam steps on batches sampled (uniformly, with
    /// replacement) from `data` using this state's stream. `steps = 0` is a
    /// bit-exact no-op. Returns the mean of the per-step batch losses, or
    /// the current loss estimate on a zero-step call.
    pub fn train_steps(&mut self, data: &[CsiMatrix], steps: usize, batch_size: usize) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::invalid_argument("empty training set"));
        }
        if batch_size == 0 {
            return Err(Error::invalid_argument("batch_size must be >= 1"));
        }
        if steps == 0 {
            return Ok(f64::NAN);
        }
        let mut loss_acc = 0.0;
        for _ in 0..steps {
            let batch: Vec<&CsiMatrix> = (0..batch_size)
                .map(|_| &data[self.rng.uniform_below(data.len())])
                .collect();
            let (loss, grads) = self.model.loss_and_grad(&batch)?;
            loss_acc += loss;
            self.apply_adam(&grads);
        }
        Ok(loss_acc / steps as f64)
    }

    fn apply_adam(&mut self, grads: &ModelGrads) {
        self.step += 1;
        let t = self.step as f64;
        let bc1 = 1.0 - ADAM_BETA1.powf(t);
        let bc2 = 1.0 - ADAM_BETA2.powf(t);
        let lr = self.lr;
        for (((p, g), m), v) in self
            .model
            .params
            .blocks_mut()
            .zip(grads.blocks())
            .zip(self.opt.m.blocks_mut())
            .zip(self.opt.v.blocks_mut())
        {
            for k in 0..p.w.len() {
                let grad = g.w[k];
                m.w[k] = ADAM_BETA1 * m.w[k] + (1.0 - ADAM_BETA1) * grad;
                v.w[k] = ADAM_BETA2 * v.w[k] + (1.0 - ADAM_BETA2) * grad * grad;
                p.w[k] -= lr * (m.w[k] / bc1) / ((v.w[k] / bc2).sqrt() + ADAM_EPS);
            }
            for k in 0..p.b.len() {
                let grad = g.b[k];
                m.b[k] = ADAM_BETA1 * m.b[k] + (1.0 - ADAM_BETA1) * grad;
                v.b[k] = ADAM_BETA2 * v.b[k] + (1.0 - ADAM_BETA2) * grad * grad;
                p.b[k] -= lr * (m.b[k] / bc1) / ((v.b[k] / bc2).sqrt() + ADAM_EPS);
            }
        }
    }
}
