//! Monte Carlo estimate of `E[ln det(I_m + H H'/t)]` over i.i.d. unit-variance
//! circularly-symmetric complex Gaussian channel matrices.
//!
//! Sample `i` draws its entries from its own ChaCha8 stream (`stream = i`,
//! key derived from the seed), so every sample is fixed by `(seed, i)` alone.
//! Workers own contiguous index ranges and their partial statistics are merged
//! in worker order, which makes the report a pure function of
//! `(seed, samples, workers)`.

use std::f64::consts::TAU;
use std::thread;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coefficients::ChannelDims;
use crate::error::{Error, Result};
use crate::evaluator::check_t;
use crate::oracles::linalg::hermitian_logdet;

pub const MIN_SAMPLES: u64 = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub dims: ChannelDims,
    pub t: f64,
    pub samples: u64,
    /// Sample mean of the mutual information, nats.
    pub mean: f64,
    /// Sample standard deviation over `sqrt(samples)`.
    pub std_error: f64,
    pub seed: u64,
    pub worker_count: usize,
}

impl McReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if other.count == 0 {
            return self;
        }
        if self.count == 0 {
            return other;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / count as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.count as f64 * other.count as f64 / count as f64);
        Moments { count, mean, m2 }
    }
}

/// One `CN(0, 1)` entry by Box-Muller: real and imaginary parts each `N(0, 1/2)`.
fn complex_gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    let u1: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
    let u2: f64 = rng.random();
    let r = (-u1.ln()).sqrt();
    let (s, c) = (TAU * u2).sin_cos();
    Complex64::new(r * c, r * s)
}

/// Mutual information `ln det(I_m + H H'/t)` of one channel draw.
pub fn sample_mutual_information(h: &[Complex64], dims: ChannelDims, t: f64) -> Result<f64> {
    let (m, n) = (dims.m(), dims.n());
    let mut g = vec![Complex64::new(0.0, 0.0); m * m];
    for i in 0..m {
        for j in 0..=i {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..n {
                s += h[i * n + k] * h[j * n + k].conj();
            }
            s /= t;
            if i == j {
                g[i * m + i] = Complex64::new(1.0 + s.re, 0.0);
            } else {
                g[i * m + j] = s;
                g[j * m + i] = s.conj();
            }
        }
    }
    hermitian_logdet(&g, m)
}

fn run_range(dims: ChannelDims, t: f64, seed: u64, range: std::ops::Range<u64>) -> Result<Moments> {
    let base = ChaCha8Rng::seed_from_u64(seed);
    let mut h = vec![Complex64::new(0.0, 0.0); dims.m() * dims.n()];
    let mut acc = Moments::default();
    for index in range {
        let mut rng = base.clone();
        rng.set_stream(index);
        for z in h.iter_mut() {
            *z = complex_gaussian(&mut rng);
        }
        acc.push(sample_mutual_information(&h, dims, t)?);
    }
    Ok(acc)
}

/// Monte Carlo estimate of the ergodic mutual information.
pub fn monte_carlo_mi(dims: ChannelDims, t: f64, samples: u64, seed: u64, workers: usize) -> Result<McReport> {
    check_t(t)?;
    if samples < MIN_SAMPLES {
        return Err(Error::domain(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
    }
    if workers == 0 {
        return Err(Error::domain("worker count must be positive"));
    }
    let w = workers as u64;
    let (chunk, extra) = (samples / w, samples % w);
    let ranges: Vec<_> = (0..w)
        .map(|k| {
            let start = k * chunk + k.min(extra);
            let len = chunk + u64::from(k < extra);
            start..start + len
        })
        .collect();
    let partials: Vec<Result<Moments>> = thread::scope(|scope| {
        let handles: Vec<_> = ranges
            .into_iter()
            .map(|r| scope.spawn(move || run_range(dims, t, seed, r)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("Monte Carlo worker panicked"))
            .collect()
    });
    let mut total = Moments::default();
    for p in partials {
        total = total.merge(p?);
    }
    let variance = total.m2 / (total.count - 1) as f64;
    Ok(McReport {
        dims,
        t,
        samples,
        mean: total.mean,
        std_error: (variance / total.count as f64).sqrt(),
        seed,
        worker_count: workers,
    })
}
