//! Gaussian noise interpolation of model parameters.
//!
//! Every selected element becomes `(1 - λ)·θ + λ·n` with `n ~ N(0, σ²)`.
//!
//! Noise is generated per tensor from `derive_tensor_seed(master_seed, name)`,
//! and per element from a counter-based stream: elements `2p` and `2p + 1`
//! take the Box–Muller pair built from SplitMix64 outputs `2p` and `2p + 1`
//! of the tensor stream. Transcendentals come from `libm`, so the noise is
//! identical across platforms, thread counts and tensor visiting orders.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{closed_open_unit, derive_seed, open_closed_unit, SplitMix64};
use crate::tensor::{Tensor, TensorMap};

/// Noise standard deviation used when none is configured.
pub const DEFAULT_SIGMA: f64 = 0.02;

const CHUNK: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Interpolation weight λ ∈ [0, 1].
    pub lambda: f64,
    /// Noise standard deviation σ > 0.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    pub master_seed: u64,
    /// Glob patterns over tensor names; `None` selects every tensor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub include: Option<Vec<String>>,
}

fn default_sigma() -> f64 {
    DEFAULT_SIGMA
}

impl NoiseConfig {
    pub fn new(lambda: f64, master_seed: u64) -> Self {
        Self {
            lambda,
            sigma: DEFAULT_SIGMA,
            master_seed,
            include: None,
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_include(mut self, patterns: Vec<String>) -> Self {
        self.include = Some(patterns);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::invalid(format!("lambda {} outside [0, 1]", self.lambda)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid(format!("sigma {} must be positive", self.sigma)));
        }
        if let Some(patterns) = &self.include {
            for p in patterns {
                glob::Pattern::new(p)
                    .map_err(|e| Error::invalid(format!("bad include pattern `{p}`: {e}")))?;
            }
        }
        Ok(())
    }

    fn selector(&self) -> Result<Option<Vec<glob::Pattern>>> {
        self.include
            .as_ref()
            .map(|ps| {
                ps.iter()
                    .map(|p| glob::Pattern::new(p).map_err(|e| Error::invalid(e.to_string())))
                    .collect()
            })
            .transpose()
    }
}

/// Seed of the noise stream for one tensor.
pub fn derive_tensor_seed(master_seed: u64, tensor_name: &str) -> u64 {
    derive_seed(master_seed, tensor_name)
}

#[inline]
fn normal_pair(seed: u64, pair: u64) -> (f64, f64) {
    let u1 = open_closed_unit(SplitMix64::output_at(seed, 2 * pair));
    let u2 = closed_open_unit(SplitMix64::output_at(seed, 2 * pair + 1));
    let r = libm::sqrt(-2.0 * libm::log(u1));
    let angle = TAU * u2;
    (r * libm::cos(angle), r * libm::sin(angle))
}

/// Standard normal draw number `index` of the stream `seed`.
pub fn standard_normal_at(seed: u64, index: u64) -> f64 {
    let (a, b) = normal_pair(seed, index / 2);
    if index.is_multiple_of(2) {
        a
    } else {
        b
    }
}

/// Applies `f(element, z)` over `data` where `z` is the matching standard
/// normal draw of stream `seed`. Chunks run in parallel.
fn map_with_noise(seed: u64, data: &mut [f32], f: impl Fn(f32, f64) -> f32 + Sync) {
    data.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
        let base = (c * CHUNK) as u64;
        for (p, pair) in chunk.chunks_mut(2).enumerate() {
            let (z0, z1) = normal_pair(seed, base / 2 + p as u64);
            pair[0] = f(pair[0], z0);
            if let Some(second) = pair.get_mut(1) {
                *second = f(*second, z1);
            }
        }
    });
}

/// Fills `out` with N(0, sigma²) draws from stream `seed`.
pub fn gaussian_fill(seed: u64, sigma: f64, out: &mut [f32]) {
    map_with_noise(seed, out, |_, z| (sigma * z) as f32);
}

/// Returns the interpolated copy of `params`; the input is left untouched.
pub fn perturb(params: &TensorMap, cfg: &NoiseConfig) -> Result<TensorMap> {
    cfg.validate()?;
    if cfg.lambda == 0.0 {
        return Ok(params.clone());
    }
    let selector = cfg.selector()?;
    let keep = 1.0 - cfg.lambda;
    let scale = cfg.lambda * cfg.sigma;

    let updated: Vec<(String, Tensor)> = params
        .iter()
        .filter(|(name, _)| match &selector {
            None => true,
            Some(ps) => ps.iter().any(|p| p.matches(name)),
        })
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(name, tensor)| {
            let mut t = tensor.clone();
            let seed = derive_tensor_seed(cfg.master_seed, name);
            map_with_noise(seed, t.data_mut(), |e, z| (keep * e as f64 + scale * z) as f32);
            (name.to_string(), t)
        })
        .collect();

    let mut out = params.clone();
    for (name, t) in updated {
        out.replace(&name, t);
    }
    Ok(out)
}

/// [`perturb`] on a dedicated pool of `threads` workers. The result does not
/// depend on `threads`.
pub fn perturb_with_threads(params: &TensorMap, cfg: &NoiseConfig, threads: usize) -> Result<TensorMap> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    pool.install(|| perturb(params, cfg))
}
