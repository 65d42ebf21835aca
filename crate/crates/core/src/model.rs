//! GPT-2 architecture on the CPU.
//!
//! Pre-layernorm blocks, learned positional embeddings, tanh-approximated
//! GELU and an output projection tied to the token embedding. Weight names
//! follow the Hugging Face GPT-2 checkpoint layout (a leading `transformer.`
//! prefix is accepted and stripped):
//!
//! | tensor                       | shape           |
//! |------------------------------|-----------------|
//! | `wte.weight`                 | `[vocab, d]`    |
//! | `wpe.weight`                 | `[context, d]`  |
//! | `h.{i}.ln_1.{weight,bias}`   | `[d]`           |
//! | `h.{i}.attn.c_attn.weight`   | `[d, 3d]`       |
//! | `h.{i}.attn.c_attn.bias`     | `[3d]`          |
//! | `h.{i}.attn.c_proj.weight`   | `[d, d]`        |
//! | `h.{i}.attn.c_proj.bias`     | `[d]`           |
//! | `h.{i}.ln_2.{weight,bias}`   | `[d]`           |
//! | `h.{i}.mlp.c_fc.weight`      | `[d, 4d]`       |
//! | `h.{i}.mlp.c_fc.bias`        | `[4d]`          |
//! | `h.{i}.mlp.c_proj.weight`    | `[4d, d]`       |
//! | `h.{i}.mlp.c_proj.bias`      | `[d]`           |
//! | `ln_f.{weight,bias}`         | `[d]`           |
//!
//! Linear weights are stored `[in, out]` (the checkpoint's Conv1D layout), so
//! a projection is `x · W + b`. `lm_head.weight` and the causal-mask buffers
//! (`h.{i}.attn.bias`, `h.{i}.attn.masked_bias`) are ignored on load.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::TensorMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    #[serde(alias = "n_layer")]
    pub n_layers: usize,
    #[serde(alias = "n_head")]
    pub n_heads: usize,
    #[serde(alias = "n_embd")]
    pub d_model: usize,
    pub vocab_size: usize,
    #[serde(alias = "n_positions", alias = "n_ctx")]
    pub max_context: usize,
    #[serde(alias = "layer_norm_epsilon", default = "default_eps")]
    pub layernorm_eps: f32,
}

fn default_eps() -> f32 {
    1e-5
}

impl ModelConfig {
    /// The 124M-parameter GPT-2 release.
    pub fn gpt2_small() -> Self {
        Self {
            n_layers: 12,
            n_heads: 12,
            d_model: 768,
            vocab_size: 50257,
            max_context: 1024,
            layernorm_eps: 1e-5,
        }
    }

    /// Reads a Hugging Face style `config.json`.
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("n_layers", self.n_layers),
            ("n_heads", self.n_heads),
            ("d_model", self.d_model),
            ("vocab_size", self.vocab_size),
            ("max_context", self.max_context),
        ];
        for (name, v) in dims {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if !self.d_model.is_multiple_of(self.n_heads) {
            return Err(Error::Config(format!(
                "d_model {} not divisible by n_heads {}",
                self.d_model, self.n_heads
            )));
        }
        if !(self.layernorm_eps > 0.0 && self.layernorm_eps.is_finite()) {
            return Err(Error::Config("layernorm_eps must be positive".into()));
        }
        Ok(())
    }

    pub fn head_dim(&self) -> usize {
        self.d_model / self.n_heads
    }

    /// Every parameter tensor the architecture needs, with its shape.
    pub fn parameter_shapes(&self) -> Vec<(String, Vec<usize>)> {
        let d = self.d_model;
        let mut out = vec![
            ("wte.weight".to_string(), vec![self.vocab_size, d]),
            ("wpe.weight".to_string(), vec![self.max_context, d]),
        ];
        for i in 0..self.n_layers {
            let p = |s: &str| format!("h.{i}.{s}");
            out.extend([
                (p("ln_1.weight"), vec![d]),
                (p("ln_1.bias"), vec![d]),
                (p("attn.c_attn.weight"), vec![d, 3 * d]),
                (p("attn.c_attn.bias"), vec![3 * d]),
                (p("attn.c_proj.weight"), vec![d, d]),
                (p("attn.c_proj.bias"), vec![d]),
                (p("ln_2.weight"), vec![d]),
                (p("ln_2.bias"), vec![d]),
                (p("mlp.c_fc.weight"), vec![d, 4 * d]),
                (p("mlp.c_fc.bias"), vec![4 * d]),
                (p("mlp.c_proj.weight"), vec![4 * d, d]),
                (p("mlp.c_proj.bias"), vec![d]),
            ]);
        }
        out.push(("ln_f.weight".to_string(), vec![d]));
        out.push(("ln_f.bias".to_string(), vec![d]));
        out
    }

    pub fn num_parameters(&self) -> usize {
        self.parameter_shapes()
            .iter()
            .map(|(_, s)| s.iter().product::<usize>())
            .sum()
    }
}

fn canonical_name(name: &str) -> Option<&str> {
    let name = name.strip_prefix("transformer.").unwrap_or(name);
    if name == "lm_head.weight" || name.ends_with(".attn.bias") || name.ends_with(".attn.masked_bias")
    {
        None
    } else {
        Some(name)
    }
}

/// Loads and validates a GPT-2 parameter set from a safetensors file.
///
/// The returned map holds exactly the tensors listed by
/// [`ModelConfig::parameter_shapes`]; extra tensors in the file are dropped.
pub fn load_weights(path: impl AsRef<Path>, config: &ModelConfig) -> Result<TensorMap> {
    config.validate()?;
    let raw = TensorMap::load_safetensors(path)?;
    select_parameters(raw, config)
}

/// Applies the same name normalization and shape checks as [`load_weights`]
/// to an in-memory map.
pub fn select_parameters(raw: TensorMap, config: &ModelConfig) -> Result<TensorMap> {
    let mut renamed = TensorMap::new();
    let mut raw = raw;
    let names: Vec<String> = raw.names().map(str::to_string).collect();
    for name in names {
        let tensor = raw.remove(&name).expect("name listed above");
        match canonical_name(&name) {
            Some(canon) => renamed.insert(canon, tensor)?,
            None => log::debug!("ignoring tensor {name}"),
        }
    }
    let mut out = TensorMap::new();
    for (name, shape) in config.parameter_shapes() {
        let tensor = renamed
            .remove(&name)
            .ok_or_else(|| Error::MissingTensor(name.clone()))?;
        if tensor.shape() != shape.as_slice() {
            return Err(Error::ShapeMismatch {
                name,
                expected: shape,
                actual: tensor.shape().to_vec(),
            });
        }
        out.insert(name, tensor)?;
    }
    for extra in renamed.names() {
        log::debug!("dropping unused tensor {extra}");
    }
    out.validate_finite()?;
    Ok(out)
}

/// Pre-softmax next-token scores.
#[derive(Debug, Clone, PartialEq)]
pub struct Logits(Vec<f32>);

impl Logits {
    pub fn new(values: Vec<f32>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[f32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f32> {
        self.0
    }

    fn log_normalizer(&self) -> f64 {
        let max = self.0.iter().copied().fold(f32::NEG_INFINITY, f32::max) as f64;
        let sum: f64 = self.0.iter().map(|&v| (v as f64 - max).exp()).sum();
        max + sum.ln()
    }

    pub fn log_softmax(&self) -> Vec<f64> {
        let z = self.log_normalizer();
        self.0.iter().map(|&v| v as f64 - z).collect()
    }

    pub fn log_prob(&self, index: usize) -> f64 {
        self.0[index] as f64 - self.log_normalizer()
    }

    pub fn softmax(&self) -> Vec<f64> {
        softmax(&self.0.iter().map(|&v| v as f64).collect::<Vec<_>>())
    }

    /// Index of the largest logit, lowest index on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.0.iter().enumerate() {
            if v > self.0[best] {
                best = i;
            }
        }
        best
    }
}

/// Max-subtracted softmax in f64.
pub fn softmax(values: &[f64]) -> Vec<f64> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = values.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// A next-token predictor usable by the decoder and the entropy probes.
pub trait LanguageModel: Sync {
    fn vocab_size(&self) -> usize;

    fn max_context(&self) -> usize;

    /// Logits for the token following `tokens`.
    fn next_token_logits(&self, tokens: &[u32]) -> Result<Logits>;

    /// Teacher-forced per-token log-probabilities of `continuation` after `prefix`.
    fn continuation_logprobs(&self, prefix: &[u32], continuation: &[u32]) -> Result<Vec<f64>>;

    /// Scores several continuations of one prefix.
    fn score_continuations(&self, prefix: &[u32], continuations: &[Vec<u32>]) -> Result<Vec<Vec<f64>>> {
        continuations
            .iter()
            .map(|c| self.continuation_logprobs(prefix, c))
            .collect()
    }

    /// Sum of the continuation's token log-probabilities; always ≤ 0.
    fn sequence_logprob(&self, prefix: &[u32], continuation: &[u32]) -> Result<f64> {
        Ok(self.continuation_logprobs(prefix, continuation)?.iter().sum())
    }
}

struct Norm<'p> {
    gain: &'p [f32],
    shift: &'p [f32],
}

struct Linear<'p> {
    weight: &'p [f32],
    bias: &'p [f32],
    n_in: usize,
    n_out: usize,
}

struct Block<'p> {
    ln_1: Norm<'p>,
    qkv: Linear<'p>,
    attn_out: Linear<'p>,
    ln_2: Norm<'p>,
    fc: Linear<'p>,
    proj: Linear<'p>,
}

/// Per-layer attention keys and values for already processed positions.
#[derive(Debug, Clone)]
pub struct KvCache {
    keys: Vec<Vec<f32>>,
    values: Vec<Vec<f32>>,
    len: usize,
}

impl KvCache {
    pub fn new(config: &ModelConfig) -> Self {
        Self {
            keys: vec![Vec::new(); config.n_layers],
            values: vec![Vec::new(); config.n_layers],
            len: 0,
        }
    }

    /// Number of cached positions.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// A GPT-2 forward pass borrowing its parameters from a [`TensorMap`].
pub struct Gpt2<'p> {
    config: ModelConfig,
    wte: &'p [f32],
    wpe: &'p [f32],
    blocks: Vec<Block<'p>>,
    ln_f: Norm<'p>,
}

impl<'p> Gpt2<'p> {
    pub fn new(params: &'p TensorMap, config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        for (name, shape) in config.parameter_shapes() {
            let t = params.require(&name)?;
            if t.shape() != shape.as_slice() {
                return Err(Error::ShapeMismatch {
                    name,
                    expected: shape,
                    actual: t.shape().to_vec(),
                });
            }
        }
        let get = |name: &str| params.require(name).map(|t| t.data());
        let d = config.d_model;
        let norm = |prefix: &str| -> Result<Norm<'p>> {
            Ok(Norm {
                gain: get(&format!("{prefix}.weight"))?,
                shift: get(&format!("{prefix}.bias"))?,
            })
        };
        let linear = |prefix: &str, n_in: usize, n_out: usize| -> Result<Linear<'p>> {
            Ok(Linear {
                weight: get(&format!("{prefix}.weight"))?,
                bias: get(&format!("{prefix}.bias"))?,
                n_in,
                n_out,
            })
        };
        let mut blocks = Vec::with_capacity(config.n_layers);
        for i in 0..config.n_layers {
            blocks.push(Block {
                ln_1: norm(&format!("h.{i}.ln_1"))?,
                qkv: linear(&format!("h.{i}.attn.c_attn"), d, 3 * d)?,
                attn_out: linear(&format!("h.{i}.attn.c_proj"), d, d)?,
                ln_2: norm(&format!("h.{i}.ln_2"))?,
                fc: linear(&format!("h.{i}.mlp.c_fc"), d, 4 * d)?,
                proj: linear(&format!("h.{i}.mlp.c_proj"), 4 * d, d)?,
            });
        }
        Ok(Self {
            config: config.clone(),
            wte: get("wte.weight")?,
            wpe: get("wpe.weight")?,
            blocks,
            ln_f: norm("ln_f")?,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn new_cache(&self) -> KvCache {
        KvCache::new(&self.config)
    }

    fn check_tokens(&self, tokens: &[u32], already: usize) -> Result<()> {
        if tokens.is_empty() {
            return Err(Error::EmptySequence);
        }
        let required = already + tokens.len();
        if required > self.config.max_context {
            return Err(Error::ContextOverflow {
                required,
                available: self.config.max_context,
            });
        }
        if let Some(&id) = tokens.iter().find(|&&t| t as usize >= self.config.vocab_size) {
            return Err(Error::TokenOutOfRange {
                id,
                vocab_size: self.config.vocab_size,
            });
        }
        Ok(())
    }

    /// Runs `tokens` after the cached positions, appending their keys and
    /// values to `cache`. Returns the final-layernormed hidden states,
    /// `tokens.len() × d_model`, row-major.
    pub fn hidden_states(&self, tokens: &[u32], cache: &mut KvCache) -> Result<Vec<f32>> {
        self.check_tokens(tokens, cache.len)?;
        let d = self.config.d_model;
        let t_new = tokens.len();
        let start = cache.len;

        let mut x = vec![0f32; t_new * d];
        for (t, &tok) in tokens.iter().enumerate() {
            let emb = &self.wte[tok as usize * d..(tok as usize + 1) * d];
            let pos = &self.wpe[(start + t) * d..(start + t + 1) * d];
            for ((o, e), p) in x[t * d..(t + 1) * d].iter_mut().zip(emb).zip(pos) {
                *o = e + p;
            }
        }

        let mut normed = vec![0f32; t_new * d];
        let mut qkv = vec![0f32; t_new * 3 * d];
        let mut attn = vec![0f32; t_new * d];
        let mut tmp = vec![0f32; t_new * d];
        let mut hidden = vec![0f32; t_new * 4 * d];
        for (layer, block) in self.blocks.iter().enumerate() {
            layer_norm(&x, &block.ln_1, self.config.layernorm_eps, &mut normed);
            block.qkv.apply(&normed, t_new, &mut qkv);
            for t in 0..t_new {
                let row = &qkv[t * 3 * d..(t + 1) * 3 * d];
                cache.keys[layer].extend_from_slice(&row[d..2 * d]);
                cache.values[layer].extend_from_slice(&row[2 * d..]);
            }
            self.attention(&qkv, &cache.keys[layer], &cache.values[layer], start, &mut attn);
            block.attn_out.apply(&attn, t_new, &mut tmp);
            add_assign(&mut x, &tmp);

            layer_norm(&x, &block.ln_2, self.config.layernorm_eps, &mut normed);
            block.fc.apply(&normed, t_new, &mut hidden);
            hidden.iter_mut().for_each(|v| *v = gelu(*v));
            block.proj.apply(&hidden, t_new, &mut tmp);
            add_assign(&mut x, &tmp);
        }
        cache.len += t_new;

        layer_norm(&x, &self.ln_f, self.config.layernorm_eps, &mut normed);
        Ok(normed)
    }

    fn attention(&self, qkv: &[f32], keys: &[f32], values: &[f32], start: usize, out: &mut [f32]) {
        let d = self.config.d_model;
        let hd = self.config.head_dim();
        let scale = 1.0 / (hd as f32).sqrt();
        let t_new = out.len() / d;
        let mut scores = vec![0f32; start + t_new];
        for t in 0..t_new {
            let visible = start + t + 1;
            let q_row = &qkv[t * 3 * d..t * 3 * d + d];
            for h in 0..self.config.n_heads {
                let q = &q_row[h * hd..(h + 1) * hd];
                let mut max = f32::NEG_INFINITY;
                for (s, score) in scores[..visible].iter_mut().enumerate() {
                    let k = &keys[s * d + h * hd..s * d + (h + 1) * hd];
                    *score = dot(q, k) * scale;
                    max = max.max(*score);
                }
                let mut sum = 0f64;
                for score in scores[..visible].iter_mut() {
                    *score = (*score - max).exp();
                    sum += *score as f64;
                }
                let inv = (1.0 / sum) as f32;
                let o = &mut out[t * d + h * hd..t * d + (h + 1) * hd];
                o.iter_mut().for_each(|v| *v = 0.0);
                for (s, &w) in scores[..visible].iter().enumerate() {
                    let v = &values[s * d + h * hd..s * d + (h + 1) * hd];
                    let w = w * inv;
                    for (acc, &vv) in o.iter_mut().zip(v) {
                        *acc += w * vv;
                    }
                }
            }
        }
    }

    /// Projects one final hidden row onto the (tied) token embedding.
    pub fn logits_from_hidden(&self, row: &[f32]) -> Logits {
        let d = self.config.d_model;
        let v = self.config.vocab_size;
        let mut out = vec![0f32; v];
        // out[1×V] = row[1×D] · wteᵀ[D×V]
        unsafe {
            matrixmultiply::sgemm(
                1,
                d,
                v,
                1.0,
                row.as_ptr(),
                d as isize,
                1,
                self.wte.as_ptr(),
                1,
                d as isize,
                0.0,
                out.as_mut_ptr(),
                v as isize,
                1,
            );
        }
        Logits(out)
    }

    /// Next-token logits after `tokens`.
    pub fn forward(&self, tokens: &[u32]) -> Result<Logits> {
        let mut cache = self.new_cache();
        let h = self.hidden_states(tokens, &mut cache)?;
        let d = self.config.d_model;
        Ok(self.logits_from_hidden(&h[h.len() - d..]))
    }

    /// Logits at every position of `tokens`.
    pub fn forward_all(&self, tokens: &[u32]) -> Result<Vec<Logits>> {
        let mut cache = self.new_cache();
        let h = self.hidden_states(tokens, &mut cache)?;
        Ok(h.chunks_exact(self.config.d_model)
            .map(|row| self.logits_from_hidden(row))
            .collect())
    }

    /// Continues a cached sequence and returns the logits at each new position.
    pub fn extend(&self, cache: &mut KvCache, tokens: &[u32]) -> Result<Vec<Logits>> {
        let h = self.hidden_states(tokens, cache)?;
        Ok(h.chunks_exact(self.config.d_model)
            .map(|row| self.logits_from_hidden(row))
            .collect())
    }

    fn check_continuation(&self, prefix: &[u32], continuation: &[u32]) -> Result<()> {
        if prefix.is_empty() || continuation.is_empty() {
            return Err(Error::EmptySequence);
        }
        let required = prefix.len() + continuation.len() - 1;
        if required > self.config.max_context {
            return Err(Error::ContextOverflow {
                required,
                available: self.config.max_context,
            });
        }
        Ok(())
    }
}

impl LanguageModel for Gpt2<'_> {
    fn vocab_size(&self) -> usize {
        self.config.vocab_size
    }

    fn max_context(&self) -> usize {
        self.config.max_context
    }

    fn next_token_logits(&self, tokens: &[u32]) -> Result<Logits> {
        self.forward(tokens)
    }

    fn continuation_logprobs(&self, prefix: &[u32], continuation: &[u32]) -> Result<Vec<f64>> {
        self.check_continuation(prefix, continuation)?;
        // the last continuation token is only scored, never fed
        let mut full = prefix.to_vec();
        full.extend_from_slice(&continuation[..continuation.len() - 1]);
        let mut cache = self.new_cache();
        let h = self.hidden_states(&full, &mut cache)?;
        let d = self.config.d_model;
        let vocab = self.config.vocab_size;
        continuation
            .iter()
            .enumerate()
            .map(|(i, &tok)| {
                if tok as usize >= vocab {
                    return Err(Error::TokenOutOfRange { id: tok, vocab_size: vocab });
                }
                let row = prefix.len() - 1 + i;
                Ok(self.logits_from_hidden(&h[row * d..(row + 1) * d]).log_prob(tok as usize))
            })
            .collect()
    }

    fn score_continuations(&self, prefix: &[u32], continuations: &[Vec<u32>]) -> Result<Vec<Vec<f64>>> {
        for c in continuations {
            self.check_continuation(prefix, c)?;
        }
        let mut base = self.new_cache();
        let h = self.hidden_states(prefix, &mut base)?;
        let d = self.config.d_model;
        let first = self.logits_from_hidden(&h[h.len() - d..]);
        let vocab = self.config.vocab_size;
        continuations
            .iter()
            .map(|cont| {
                if let Some(&id) = cont.iter().find(|&&t| t as usize >= vocab) {
                    return Err(Error::TokenOutOfRange { id, vocab_size: vocab });
                }
                let mut scores = vec![first.log_prob(cont[0] as usize)];
                if cont.len() > 1 {
                    let mut cache = base.clone();
                    let rest = self.extend(&mut cache, &cont[..cont.len() - 1])?;
                    for (logits, &tok) in rest.iter().zip(&cont[1..]) {
                        scores.push(logits.log_prob(tok as usize));
                    }
                }
                Ok(scores)
            })
            .collect()
    }
}

/// Next-token logits for `tokens` under `params`.
pub fn forward(params: &TensorMap, config: &ModelConfig, tokens: &[u32]) -> Result<Logits> {
    Gpt2::new(params, config)?.forward(tokens)
}

/// Σ log P(continuationᵢ | prefix · continuation₍<ᵢ₎).
pub fn sequence_logprob(
    params: &TensorMap,
    config: &ModelConfig,
    prefix: &[u32],
    continuation: &[u32],
) -> Result<f64> {
    Gpt2::new(params, config)?.sequence_logprob(prefix, continuation)
}

impl Linear<'_> {
    /// out[rows × n_out] = x[rows × n_in] · W + b
    fn apply(&self, x: &[f32], rows: usize, out: &mut [f32]) {
        debug_assert_eq!(x.len(), rows * self.n_in);
        debug_assert_eq!(out.len(), rows * self.n_out);
        for row in out.chunks_exact_mut(self.n_out) {
            row.copy_from_slice(self.bias);
        }
        unsafe {
            matrixmultiply::sgemm(
                rows,
                self.n_in,
                self.n_out,
                1.0,
                x.as_ptr(),
                self.n_in as isize,
                1,
                self.weight.as_ptr(),
                self.n_out as isize,
                1,
                1.0,
                out.as_mut_ptr(),
                self.n_out as isize,
                1,
            );
        }
    }
}

fn layer_norm(x: &[f32], norm: &Norm<'_>, eps: f32, out: &mut [f32]) {
    let d = norm.gain.len();
    for (row, o) in x.chunks_exact(d).zip(out.chunks_exact_mut(d)) {
        let mean = row.iter().map(|&v| v as f64).sum::<f64>() / d as f64;
        let var = row.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / d as f64;
        let inv = 1.0 / (var + eps as f64).sqrt();
        for i in 0..d {
            o[i] = (((row[i] as f64 - mean) * inv) as f32) * norm.gain[i] + norm.shift[i];
        }
    }
}

#[inline]
fn gelu(x: f32) -> f32 {
    const SQRT_2_OVER_PI: f32 = 0.797_884_6;
    0.5 * x * (1.0 + (SQRT_2_OVER_PI * (x + 0.044715 * x * x * x)).tanh())
}

#[inline]
fn dot(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn add_assign(x: &mut [f32], y: &[f32]) {
    x.iter_mut().zip(y).for_each(|(a, b)| *a += b);
}

/// Random GPT-2 parameters for tests and examples that must run without a
/// checkpoint. Weights ~ N(0, scale²), layernorm gains 1, other biases 0.
pub fn random_parameters(config: &ModelConfig, seed: u64, scale: f32) -> Result<TensorMap> {
    use crate::perturbation::gaussian_fill;
    use crate::tensor::Tensor;
    let mut map = TensorMap::new();
    for (name, shape) in config.parameter_shapes() {
        let n: usize = shape.iter().product();
        let data = if name.contains("ln_") && name.ends_with(".weight") {
            vec![1.0; n]
        } else if name.ends_with(".bias") {
            vec![0.0; n]
        } else {
            let mut v = vec![0f32; n];
            gaussian_fill(crate::rng::derive_seed(seed, &name), scale as f64, &mut v);
            v
        };
        map.insert(name, Tensor::new(shape, data)?)?;
    }
    Ok(map)
}
