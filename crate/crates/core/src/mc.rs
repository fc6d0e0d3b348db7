//! Seeded Monte Carlo estimation.
//!
//! Every estimator draws from `ChaCha8Rng` streams derived from a single
//! seed. Samples are split across `workers` contiguous blocks; block `w`
//! uses stream `w` of the seeded generator. Results are therefore a pure
//! function of `(seed, samples, workers)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self { samples, seed, workers: 1 }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { mean: value, std_error: 0.0 }
    }

    /// True when `value` lies within `k` standard errors of the mean.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_error + 1e-12
    }
}

/// Running mean/variance (Welford), mergeable across workers.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(&mut self, o: &Moments) {
        if o.n == 0.0 {
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        self.mean += d * o.n / n;
        self.m2 += o.m2 + d * d * self.n * o.n / n;
        self.n = n;
    }

    fn estimate(&self) -> Estimate {
        let var = if self.n > 1.0 { self.m2 / (self.n - 1.0) } else { 0.0 };
        Estimate { mean: self.mean, std_error: (var.max(0.0) / self.n).sqrt() }
    }
}

/// Estimates the mean of `f` over `cfg.samples` draws.
pub fn estimate<F>(cfg: &McConfig, f: F) -> Result<Estimate>
where
    F: Fn(&mut SimRng) -> f64 + Sync,
{
    let out = estimate_many(cfg, 1, |rng, out| out[0] = f(rng))?;
    Ok(out[0])
}

/// Estimates `dims` means at once; `f` fills one sample of every dimension
/// (common random numbers across dimensions).
pub fn estimate_many<F>(cfg: &McConfig, dims: usize, f: F) -> Result<Vec<Estimate>>
where
    F: Fn(&mut SimRng, &mut [f64]) + Sync,
{
    if cfg.samples == 0 {
        return Err(Error::Empty("Monte Carlo sample count"));
    }
    let workers = cfg.workers.max(1).min(cfg.samples as usize);
    let run_block = |w: usize| -> Vec<Moments> {
        let base = cfg.samples / workers as u64;
        let count = base + u64::from((w as u64) < cfg.samples % workers as u64);
        let mut rng = stream(cfg.seed, w as u64);
        let mut acc = vec![Moments::default(); dims];
        let mut buf = vec![0.0; dims];
        for _ in 0..count {
            f(&mut rng, &mut buf);
            for (m, &x) in acc.iter_mut().zip(&buf) {
                m.push(x);
            }
        }
        acc
    };
    let blocks: Vec<Vec<Moments>> = if workers == 1 {
        vec![run_block(0)]
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers).map(|w| s.spawn(move || run_block(w))).collect();
            handles.into_iter().map(|h| h.join().expect("Monte Carlo worker panicked")).collect()
        })
    };
    let mut total = vec![Moments::default(); dims];
    for block in &blocks {
        for (t, b) in total.iter_mut().zip(block) {
            t.merge(b);
        }
    }
    Ok(total.iter().map(Moments::estimate).collect())
}

/// Generator for substream `stream_id` of `seed`.
pub fn stream(seed: u64, stream_id: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}
