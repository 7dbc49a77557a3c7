//! The condensed-graph encoder and its contrastive training loop.
//!
//! Each condensed path contributes the concatenation of three segment
//! embeddings (prefix, via edge, suffix), pushed through a two-layer
//! feed-forward network `y = W2 relu(W1 x + b1) + b2`. The graph embedding
//! is the mean of the per-path outputs. Training pulls that mean toward the
//! frozen all-paths embedding of the same (s, t) pair and pushes it away
//! from the other pairs in the batch; all gradients are written out by hand
//! and checked against central finite differences.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::condense::{build_condensed_graph, CondensedGraph};
use crate::embed::{embed_segment, Embedder, EmbeddingVector};
use crate::error::{Error, Result};
use crate::kg::{EntityId, KnowledgeGraph};
use crate::linalg::{cosine, kahan_mean, Matrix, NORM_EPS};
use crate::transition::{enumerate_paths, extract_transition_graph, textualize_path, textualize_steps, Path as TgPath};

const PARAMS_MAGIC: &[u8; 4] = b"CGEP";
const PARAMS_VERSION: u32 = 1;
const SHUFFLE_SALT: u64 = 0x73687566; // distinct stream from parameter init

/// Feed-forward encoder weights: `W1 (hidden x 3d)`, `b1`, `W2 (d x hidden)`, `b2`.
#[derive(Clone, Debug, PartialEq)]
pub struct EncoderParams {
    w1: Matrix,
    b1: Vec<f64>,
    w2: Matrix,
    b2: Vec<f64>,
}

impl EncoderParams {
    /// Seeded He-style initialization; a pure function of (d, hidden, seed).
    pub fn seeded_init(d: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let s1 = (2.0 / (3 * d) as f64).sqrt();
        let s2 = (2.0 / hidden as f64).sqrt();
        let mut sample = |scale: f64| -> f64 {
            let z: f64 = StandardNormal.sample(&mut rng);
            z * scale
        };
        let w1 = Matrix::from_fn(hidden, 3 * d, |_, _| sample(s1));
        let w2 = Matrix::from_fn(d, hidden, |_, _| sample(s2));
        Self {
            w1,
            b1: vec![0.0; hidden],
            w2,
            b2: vec![0.0; d],
        }
    }

    pub fn zeros(d: usize, hidden: usize) -> Self {
        Self {
            w1: Matrix::zeros(hidden, 3 * d),
            b1: vec![0.0; hidden],
            w2: Matrix::zeros(d, hidden),
            b2: vec![0.0; d],
        }
    }

    pub fn from_parts(w1: Matrix, b1: Vec<f64>, w2: Matrix, b2: Vec<f64>) -> Result<Self> {
        let hidden = b1.len();
        let d = b2.len();
        if w1.rows() != hidden || w1.cols() != 3 * d || w2.rows() != d || w2.cols() != hidden {
            return Err(Error::Shape(format!(
                "inconsistent encoder shapes: W1 {}x{}, b1 {}, W2 {}x{}, b2 {}",
                w1.rows(),
                w1.cols(),
                hidden,
                w2.rows(),
                w2.cols(),
                d
            )));
        }
        Ok(Self { w1, b1, w2, b2 })
    }

    /// Output (and per-segment input) dimension.
    pub fn d(&self) -> usize {
        self.b2.len()
    }

    pub fn hidden(&self) -> usize {
        self.b1.len()
    }

    pub fn w1(&self) -> &Matrix {
        &self.w1
    }

    pub fn w2(&self) -> &Matrix {
        &self.w2
    }

    /// Versioned binary serialization: magic, version, dims, then row-major
    /// little-endian f64 tensors in the order W1, b1, W2, b2.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(PARAMS_MAGIC)?;
        w.write_u32::<LittleEndian>(PARAMS_VERSION)?;
        w.write_u32::<LittleEndian>(self.d() as u32)?;
        w.write_u32::<LittleEndian>(self.hidden() as u32)?;
        for &v in self
            .w1
            .data()
            .iter()
            .chain(&self.b1)
            .chain(self.w2.data())
            .chain(&self.b2)
        {
            w.write_f64::<LittleEndian>(v)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut r = BufReader::new(File::open(path.as_ref())?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != PARAMS_MAGIC {
            return Err(Error::Config(format!(
                "`{}` is not an encoder parameter file",
                path.as_ref().display()
            )));
        }
        let version = r.read_u32::<LittleEndian>()?;
        if version != PARAMS_VERSION {
            return Err(Error::Config(format!(
                "unsupported encoder parameter version {version}"
            )));
        }
        let d = r.read_u32::<LittleEndian>()? as usize;
        let hidden = r.read_u32::<LittleEndian>()? as usize;
        let mut read_vec = |len: usize| -> Result<Vec<f64>> {
            let mut v = Vec::with_capacity(len);
            for _ in 0..len {
                v.push(r.read_f64::<LittleEndian>()?);
            }
            Ok(v)
        };
        let w1 = Matrix::from_vec(hidden, 3 * d, read_vec(hidden * 3 * d)?)?;
        let b1 = read_vec(hidden)?;
        let w2 = Matrix::from_vec(d, hidden, read_vec(d * hidden)?)?;
        let b2 = read_vec(d)?;
        Self::from_parts(w1, b1, w2, b2)
    }
}

/// Which aggregate a [`GraphEmbedding`] holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmbeddingKind {
    /// Mean of per-edge condensed-path encodings.
    Condensed,
    /// Mean of path-text embeddings over all enumerated paths.
    AllPaths,
}

/// A graph-level embedding for one (s, t) pair.
#[derive(Clone, Debug)]
pub struct GraphEmbedding {
    pub vector: EmbeddingVector,
    pub pair: (EntityId, EntityId),
    pub kind: EmbeddingKind,
    /// Set when the underlying graph or path set was empty; the vector is
    /// then the zero vector and such pairs are excluded from training.
    pub empty: bool,
}

/// Forward pass for one condensed path: concatenate the three segment
/// embeddings and apply the two-layer network.
pub fn encode_condensed_path(
    params: &EncoderParams,
    h_su: &[f64],
    h_uv: &[f64],
    h_vt: &[f64],
) -> Result<Vec<f64>> {
    let d = params.d();
    if h_su.len() != d || h_uv.len() != d || h_vt.len() != d {
        return Err(Error::Shape(format!(
            "segment embeddings must all have dim {d}, got {}/{}/{}",
            h_su.len(),
            h_uv.len(),
            h_vt.len()
        )));
    }
    let mut x = Vec::with_capacity(3 * d);
    x.extend_from_slice(h_su);
    x.extend_from_slice(h_uv);
    x.extend_from_slice(h_vt);
    let (y, _, _) = forward(params, &x)?;
    Ok(y)
}

fn forward(params: &EncoderParams, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut z1 = params.w1.matvec(x)?;
    for (z, b) in z1.iter_mut().zip(&params.b1) {
        *z += b;
    }
    let a: Vec<f64> = z1.iter().map(|&z| if z > 0.0 { z } else { 0.0 }).collect();
    let mut y = params.w2.matvec(&a)?;
    for (v, b) in y.iter_mut().zip(&params.b2) {
        *v += b;
    }
    Ok((y, z1, a))
}

fn segment_inputs(
    cg: &CondensedGraph,
    embedder: &Embedder,
    kg: &KnowledgeGraph,
) -> Result<Vec<PathInput>> {
    let mut inputs = Vec::with_capacity(cg.paths.len());
    for cp in &cg.paths {
        let (u, r, v) = cp.via;
        let prefix = embed_segment(embedder, &cp.prefix, kg)?;
        let edge = embedder.embed_text(&textualize_steps(&[u, v], &[r], kg)?)?;
        let suffix = embed_segment(embedder, &cp.suffix, kg)?;
        inputs.push(PathInput {
            prefix: prefix.into_values(),
            edge: edge.into_values(),
            suffix: suffix.into_values(),
        });
    }
    Ok(inputs)
}

/// Mean of per-path encodings over the condensed graph. An empty condensed
/// graph yields the zero vector with the `empty` flag set.
pub fn encode_condensed_graph(
    params: &EncoderParams,
    cg: &CondensedGraph,
    embedder: &Embedder,
    kg: &KnowledgeGraph,
) -> Result<GraphEmbedding> {
    let d = params.d();
    if embedder.dim() != d {
        return Err(Error::Shape(format!(
            "embedder dim {} does not match encoder dim {d}",
            embedder.dim()
        )));
    }
    if cg.is_empty() {
        return Ok(GraphEmbedding {
            vector: EmbeddingVector::zeros(d),
            pair: (cg.source, cg.target),
            kind: EmbeddingKind::Condensed,
            empty: true,
        });
    }
    let inputs = segment_inputs(cg, embedder, kg)?;
    let encodings: Vec<Vec<f64>> = inputs
        .iter()
        .map(|p| encode_condensed_path(params, &p.prefix, &p.edge, &p.suffix))
        .collect::<Result<_>>()?;
    let mean = kahan_mean(encodings.iter().map(Vec::as_slice), d);
    Ok(GraphEmbedding {
        vector: EmbeddingVector::new(mean)?,
        pair: (cg.source, cg.target),
        kind: EmbeddingKind::Condensed,
        empty: false,
    })
}

/// Mean of path-text embeddings over all enumerated paths. An empty path
/// set yields the zero vector with the `empty` flag set.
pub fn all_paths_embedding(
    embedder: &Embedder,
    paths: &[TgPath],
    kg: &KnowledgeGraph,
    pair: (EntityId, EntityId),
) -> Result<GraphEmbedding> {
    if paths.is_empty() {
        return Ok(GraphEmbedding {
            vector: EmbeddingVector::zeros(embedder.dim()),
            pair,
            kind: EmbeddingKind::AllPaths,
            empty: true,
        });
    }
    let mut embeddings = Vec::with_capacity(paths.len());
    for p in paths {
        let text = textualize_path(p, kg)?;
        embeddings.push(embedder.embed_text(&text)?.into_values());
    }
    let mean = kahan_mean(embeddings.iter().map(Vec::as_slice), embedder.dim());
    Ok(GraphEmbedding {
        vector: EmbeddingVector::new(mean)?,
        pair,
        kind: EmbeddingKind::AllPaths,
        empty: false,
    })
}

/// In-batch contrastive loss over (condensed, all-paths) embedding pairs.
///
/// `loss = -(1/B) sum_i log( exp(cos(p_i, t_i)/tau) / sum_j exp(cos(p_i, t_j)/tau) )`
///
/// Returns the loss and its analytic gradient with respect to each `p_i`;
/// the targets are frozen. Zero-norm vectors are handled by the norm floor,
/// never by an error.
pub fn contrastive_loss(
    predictions: &[Vec<f64>],
    targets: &[Vec<f64>],
    tau: f64,
) -> Result<(f64, Vec<Vec<f64>>)> {
    let b = predictions.len();
    if b < 2 {
        return Err(Error::Precondition(
            "contrastive batch needs at least 2 pairs".into(),
        ));
    }
    if targets.len() != b {
        return Err(Error::Shape("predictions/targets length mismatch".into()));
    }
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::Precondition("temperature must be positive".into()));
    }
    let d = predictions[0].len();
    if predictions.iter().chain(targets).any(|v| v.len() != d) {
        return Err(Error::Shape("ragged contrastive batch".into()));
    }

    let mut loss = 0.0;
    let mut grads = vec![vec![0.0; d]; b];
    for i in 0..b {
        let u = &predictions[i];
        let nu = crate::linalg::l2_norm(u).max(NORM_EPS);
        let sims: Vec<f64> = (0..b).map(|j| cosine(u, &targets[j])).collect();
        let logits: Vec<f64> = sims.iter().map(|s| s / tau).collect();
        let max_logit = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exp_sum: f64 = logits.iter().map(|&z| (z - max_logit).exp()).sum();
        loss += -(logits[i] - max_logit - exp_sum.ln());

        for j in 0..b {
            let p_ij = (logits[j] - max_logit).exp() / exp_sum;
            let coeff = (p_ij - if i == j { 1.0 } else { 0.0 }) / (b as f64 * tau);
            if coeff == 0.0 {
                continue;
            }
            let h = &targets[j];
            let nh = crate::linalg::l2_norm(h).max(NORM_EPS);
            // d cos(u, h)/du = h/(|u||h|) - cos * u/|u|^2
            for idx in 0..d {
                grads[i][idx] += coeff * (h[idx] / (nu * nh) - sims[j] * u[idx] / (nu * nu));
            }
        }
    }
    Ok((loss / b as f64, grads))
}

/// One training pair: per-condensed-path segment embeddings plus the frozen
/// all-paths target.
#[derive(Clone, Debug)]
pub struct PairExample {
    pub pair: (EntityId, EntityId),
    pub inputs: Vec<PathInput>,
    pub target: Vec<f64>,
}

/// The three segment embeddings feeding one condensed-path encoding.
#[derive(Clone, Debug)]
pub struct PathInput {
    pub prefix: Vec<f64>,
    pub edge: Vec<f64>,
    pub suffix: Vec<f64>,
}

impl PathInput {
    fn concat(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.prefix.len() * 3);
        x.extend_from_slice(&self.prefix);
        x.extend_from_slice(&self.edge);
        x.extend_from_slice(&self.suffix);
        x
    }
}

/// Builds the training example for one pair, or `None` when the pair has no
/// transition graph within `k` hops.
pub fn prepare_pair_example(
    kg: &KnowledgeGraph,
    embedder: &Embedder,
    s: EntityId,
    t: EntityId,
    k: usize,
    cap: usize,
) -> Result<Option<PairExample>> {
    let tg = extract_transition_graph(kg, s, t, k)?;
    if tg.is_empty() {
        return Ok(None);
    }
    let cg = build_condensed_graph(&tg)?;
    let inputs = segment_inputs(&cg, embedder, kg)?;
    let enumeration = enumerate_paths(&tg, cap)?;
    let target = all_paths_embedding(embedder, &enumeration.paths, kg, (s, t))?;
    Ok(Some(PairExample {
        pair: (s, t),
        inputs,
        target: target.vector.into_values(),
    }))
}

/// Optimizer selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Optimizer {
    Sgd,
    Adam,
}

/// Training hyperparameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub temperature: f64,
    pub seed: u64,
    pub optimizer: Optimizer,
    pub hidden: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            epochs: 200,
            batch_size: 16,
            temperature: 0.07,
            seed: 42,
            optimizer: Optimizer::Adam,
            hidden: 128,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::Config("learning rate must be finite and >= 0".into()));
        }
        if self.batch_size < 2 {
            return Err(Error::Config(
                "batch size must be >= 2 (in-batch negatives)".into(),
            ));
        }
        if !(self.temperature > 0.0) {
            return Err(Error::Config("temperature must be > 0".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be >= 1".into()));
        }
        if self.hidden == 0 {
            return Err(Error::Config("hidden width must be >= 1".into()));
        }
        Ok(())
    }
}

/// Gradient (or moment) storage mirroring [`EncoderParams`].
#[derive(Clone, Debug)]
pub struct ParamGrads {
    pub w1: Matrix,
    pub b1: Vec<f64>,
    pub w2: Matrix,
    pub b2: Vec<f64>,
}

impl ParamGrads {
    fn zeros_like(p: &EncoderParams) -> Self {
        Self {
            w1: Matrix::zeros(p.w1.rows(), p.w1.cols()),
            b1: vec![0.0; p.b1.len()],
            w2: Matrix::zeros(p.w2.rows(), p.w2.cols()),
            b2: vec![0.0; p.b2.len()],
        }
    }
}

/// Forward pass over a batch: per-pair mean encodings.
fn batch_means(params: &EncoderParams, batch: &[&PairExample]) -> Result<Vec<Vec<f64>>> {
    let d = params.d();
    batch
        .iter()
        .map(|ex| {
            if ex.inputs.is_empty() {
                return Err(Error::Precondition(
                    "training pair with empty condensed graph".into(),
                ));
            }
            let encodings: Vec<Vec<f64>> = ex
                .inputs
                .iter()
                .map(|p| {
                    let (y, _, _) = forward(params, &p.concat())?;
                    Ok(y)
                })
                .collect::<Result<_>>()?;
            Ok(kahan_mean(encodings.iter().map(Vec::as_slice), d))
        })
        .collect()
}

/// Loss over a batch, forward only.
pub fn batch_loss(params: &EncoderParams, batch: &[&PairExample], tau: f64) -> Result<f64> {
    let means = batch_means(params, batch)?;
    let targets: Vec<Vec<f64>> = batch.iter().map(|ex| ex.target.clone()).collect();
    Ok(contrastive_loss(&means, &targets, tau)?.0)
}

/// Loss and analytic parameter gradients over a batch.
pub fn batch_loss_and_grads(
    params: &EncoderParams,
    batch: &[&PairExample],
    tau: f64,
) -> Result<(f64, ParamGrads)> {
    let means = batch_means(params, batch)?;
    let targets: Vec<Vec<f64>> = batch.iter().map(|ex| ex.target.clone()).collect();
    let (loss, mean_grads) = contrastive_loss(&means, &targets, tau)?;

    let mut grads = ParamGrads::zeros_like(params);
    for (ex, g_mean) in batch.iter().zip(&mean_grads) {
        let scale = 1.0 / ex.inputs.len() as f64;
        for p in &ex.inputs {
            let x = p.concat();
            let (_, z1, a) = forward(params, &x)?;
            // dL/dy for this path is the mean gradient scaled by 1/paths
            let g_y: Vec<f64> = g_mean.iter().map(|g| g * scale).collect();
            for (gb, gy) in grads.b2.iter_mut().zip(&g_y) {
                *gb += gy;
            }
            grads.w2.add_outer(&g_y, &a, 1.0);
            let g_a = params.w2.matvec_transpose(&g_y)?;
            let g_z: Vec<f64> = g_a
                .iter()
                .zip(&z1)
                .map(|(&g, &z)| if z > 0.0 { g } else { 0.0 })
                .collect();
            for (gb, gz) in grads.b1.iter_mut().zip(&g_z) {
                *gb += gz;
            }
            grads.w1.add_outer(&g_z, &x, 1.0);
        }
    }
    Ok((loss, grads))
}

enum OptimizerState {
    Sgd,
    Adam {
        m: ParamGrads,
        v: ParamGrads,
        t: usize,
    },
}

impl OptimizerState {
    fn new(kind: Optimizer, params: &EncoderParams) -> Self {
        match kind {
            Optimizer::Sgd => Self::Sgd,
            Optimizer::Adam => Self::Adam {
                m: ParamGrads::zeros_like(params),
                v: ParamGrads::zeros_like(params),
                t: 0,
            },
        }
    }

    fn step(&mut self, params: &mut EncoderParams, grads: &ParamGrads, lr: f64) {
        match self {
            Self::Sgd => {
                for (p, g) in param_slices_mut(params).into_iter().zip(grad_slices(grads)) {
                    for (pv, gv) in p.iter_mut().zip(g) {
                        *pv -= lr * gv;
                    }
                }
            }
            Self::Adam { m, v, t } => {
                const B1: f64 = 0.9;
                const B2: f64 = 0.999;
                const EPS: f64 = 1e-8;
                *t += 1;
                let bc1 = 1.0 - B1.powi(*t as i32);
                let bc2 = 1.0 - B2.powi(*t as i32);
                let params_slices = param_slices_mut(params);
                let m_slices = grad_slices_mut(m);
                let v_slices = grad_slices_mut(v);
                for ((p, ms), (vs, g)) in params_slices
                    .into_iter()
                    .zip(m_slices)
                    .zip(v_slices.into_iter().zip(grad_slices(grads)))
                {
                    for i in 0..p.len() {
                        ms[i] = B1 * ms[i] + (1.0 - B1) * g[i];
                        vs[i] = B2 * vs[i] + (1.0 - B2) * g[i] * g[i];
                        let m_hat = ms[i] / bc1;
                        let v_hat = vs[i] / bc2;
                        p[i] -= lr * m_hat / (v_hat.sqrt() + EPS);
                    }
                }
            }
        }
    }
}

fn param_slices_mut(p: &mut EncoderParams) -> [&mut [f64]; 4] {
    let EncoderParams { w1, b1, w2, b2 } = p;
    [w1.data_mut(), b1.as_mut_slice(), w2.data_mut(), b2.as_mut_slice()]
}

fn grad_slices(g: &ParamGrads) -> [&[f64]; 4] {
    [g.w1.data(), &g.b1, g.w2.data(), &g.b2]
}

fn grad_slices_mut(g: &mut ParamGrads) -> [&mut [f64]; 4] {
    let ParamGrads { w1, b1, w2, b2 } = g;
    [w1.data_mut(), b1.as_mut_slice(), w2.data_mut(), b2.as_mut_slice()]
}

/// Training result: final parameters plus the per-epoch loss trace.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub params: EncoderParams,
    pub loss_trace: Vec<f64>,
}

/// Trains the encoder with mini-batch optimization of the contrastive loss.
/// Deterministic given the config seed; the backbone embeddings inside the
/// examples stay frozen.
pub fn train_encoder(cfg: &TrainConfig, examples: &[PairExample]) -> Result<TrainOutcome> {
    cfg.validate()?;
    if examples.is_empty() {
        return Err(Error::Precondition("no trainable pairs".into()));
    }
    if examples.len() < cfg.batch_size {
        return Err(Error::Precondition(format!(
            "need at least batch_size ({}) trainable pairs, got {}",
            cfg.batch_size,
            examples.len()
        )));
    }
    let d = examples[0].target.len();
    for ex in examples {
        if ex.target.len() != d
            || ex
                .inputs
                .iter()
                .any(|p| p.prefix.len() != d || p.edge.len() != d || p.suffix.len() != d)
        {
            return Err(Error::Shape("inconsistent example dimensions".into()));
        }
    }

    let mut params = EncoderParams::seeded_init(d, cfg.hidden, cfg.seed);
    let mut opt = OptimizerState::new(cfg.optimizer, &params);
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed ^ SHUFFLE_SALT);
    let mut indices: Vec<usize> = (0..examples.len()).collect();
    let mut loss_trace = Vec::with_capacity(cfg.epochs);

    for _epoch in 0..cfg.epochs {
        indices.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for chunk in indices.chunks(cfg.batch_size) {
            if chunk.len() < 2 {
                continue; // a single-pair remainder has no in-batch negatives
            }
            let batch: Vec<&PairExample> = chunk.iter().map(|&i| &examples[i]).collect();
            let (loss, grads) = batch_loss_and_grads(&params, &batch, cfg.temperature)?;
            opt.step(&mut params, &grads, cfg.learning_rate);
            epoch_loss += loss;
            batches += 1;
        }
        if batches == 0 {
            return Err(Error::Precondition(
                "every batch degenerated below 2 pairs".into(),
            ));
        }
        loss_trace.push(epoch_loss / batches as f64);
    }

    Ok(TrainOutcome { params, loss_trace })
}

/// Mean cosine between matched (prediction, target) pairs versus mismatched
/// ones; the gap is the training sanity signal.
pub fn cosine_separation(params: &EncoderParams, examples: &[PairExample]) -> Result<(f64, f64)> {
    let batch: Vec<&PairExample> = examples.iter().collect();
    let means = batch_means(params, &batch)?;
    let n = examples.len();
    let mut matched = 0.0;
    let mut mismatched = 0.0;
    let mut mismatched_count = 0usize;
    for i in 0..n {
        matched += cosine(&means[i], &examples[i].target);
        for j in 0..n {
            if i != j {
                mismatched += cosine(&means[i], &examples[j].target);
                mismatched_count += 1;
            }
        }
    }
    Ok((
        matched / n as f64,
        mismatched / mismatched_count.max(1) as f64,
    ))
}

fn max_relative_error(analytic: f64, numeric: f64) -> f64 {
    const ATOL: f64 = 1e-10;
    if analytic.abs() < ATOL && numeric.abs() < ATOL {
        0.0
    } else {
        (analytic - numeric).abs() / numeric.abs().max(ATOL)
    }
}

fn gradient_check_inner(
    params: &EncoderParams,
    batch: &[&PairExample],
    tau: f64,
    step: f64,
    analytic_scale: f64,
) -> Result<f64> {
    let (_, analytic) = batch_loss_and_grads(params, batch, tau)?;
    let analytic_flat: Vec<f64> = grad_slices(&analytic)
        .into_iter()
        .flatten()
        .map(|&g| g * analytic_scale)
        .collect();

    let mut probe = params.clone();
    let mut worst = 0.0f64;
    let mut flat_idx = 0usize;
    for slice_idx in 0..4 {
        let len = param_slices_mut(&mut probe)[slice_idx].len();
        for i in 0..len {
            let original = param_slices_mut(&mut probe)[slice_idx][i];
            param_slices_mut(&mut probe)[slice_idx][i] = original + step;
            let plus = batch_loss(&probe, batch, tau)?;
            param_slices_mut(&mut probe)[slice_idx][i] = original - step;
            let minus = batch_loss(&probe, batch, tau)?;
            param_slices_mut(&mut probe)[slice_idx][i] = original;
            let numeric = (plus - minus) / (2.0 * step);
            worst = worst.max(max_relative_error(analytic_flat[flat_idx], numeric));
            flat_idx += 1;
        }
    }
    Ok(worst)
}

/// Compares analytic parameter gradients against central finite differences
/// on one batch; returns the worst relative error over every entry of every
/// parameter tensor.
pub fn gradient_check(
    params: &EncoderParams,
    batch: &[&PairExample],
    tau: f64,
    step: f64,
) -> Result<f64> {
    gradient_check_inner(params, batch, tau, step, 1.0)
}

/// Self-test of the checker: doubles the analytic gradients, so a healthy
/// checker must report a relative error near 1.
pub fn gradient_check_self_test(
    params: &EncoderParams,
    batch: &[&PairExample],
    tau: f64,
    step: f64,
) -> Result<f64> {
    gradient_check_inner(params, batch, tau, step, 2.0)
}

/// Writes an `epoch,loss` CSV trace.
pub fn write_loss_trace(mut w: impl Write, trace: &[f64]) -> Result<()> {
    writeln!(w, "epoch,loss")?;
    for (i, loss) in trace.iter().enumerate() {
        writeln!(w, "{i},{loss}")?;
    }
    Ok(())
}
