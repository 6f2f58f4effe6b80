//! Sample-mean accumulators and the batch runner shared by all oracles.
//!
//! Samples are split into fixed-size batches. Batch `b` draws from
//! `rng::substream(seed, b)` and partial results are merged in batch order, so
//! estimates are bit-identical regardless of the thread count.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::rng::{self, SimRng};

pub const BATCH_SIZE: usize = 4096;

/// Welford mean/variance of a real sample.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RealMean {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RealMean {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &RealMean) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }

    pub fn estimate(&self) -> Estimate {
        Estimate {
            mean: self.mean(),
            std_error: self.std_error(),
        }
    }
}

/// Independent real/imaginary accumulators for a complex sample.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ComplexMean {
    pub re: RealMean,
    pub im: RealMean,
}

impl ComplexMean {
    pub fn push(&mut self, z: Complex64) {
        self.re.push(z.re);
        self.im.push(z.im);
    }

    pub fn merge(&mut self, other: &ComplexMean) {
        self.re.merge(&other.re);
        self.im.merge(&other.im);
    }

    pub fn mean(&self) -> Complex64 {
        Complex64::new(self.re.mean(), self.im.mean())
    }
}

/// A sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    /// `(mean − reference)/std_error`. A zero standard error yields 0 when the
    /// difference is at round-off level and ±∞ otherwise.
    pub fn z_score(&self, reference: f64) -> f64 {
        let diff = self.mean - reference;
        if self.std_error > 0.0 {
            diff / self.std_error
        } else if diff.abs() <= 1e-12 * (self.mean.abs() + reference.abs()) || diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        }
    }
}

/// Runs `samples` draws in deterministic batches and merges the accumulators.
///
/// `init` builds an empty accumulator, `step` consumes one sample from the
/// batch's RNG, and `merge` folds batch results in index order.
pub fn run_batched<A, I, S, M>(seed: u64, samples: usize, init: I, step: S, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    S: Fn(&mut A, &mut SimRng) + Sync,
    M: Fn(&mut A, A),
{
    let batches = samples.div_ceil(BATCH_SIZE);
    let parts: Vec<A> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng::substream(seed, b as u64);
            let mut acc = init();
            let len = BATCH_SIZE.min(samples - b * BATCH_SIZE);
            for _ in 0..len {
                step(&mut acc, &mut rng);
            }
            acc
        })
        .collect();
    let mut total = init();
    for part in parts {
        merge(&mut total, part);
    }
    total
}
