//! Deterministic Monte Carlo plumbing.
//!
//! Every random quantity in the crate is drawn from a [`Stream`]: a seed plus
//! a 64-bit key selecting one ChaCha8 keystream. Streams split by hashing a
//! tag into the key, so a computation can hand independent children to its
//! sub-computations without sharing mutable state.
//!
//! Sample loops are cut into fixed-size chunks; chunk `i` always draws from
//! `stream.child(i)` and partial statistics are merged in chunk order. The
//! result is therefore bit-identical whatever the size of the rayon pool.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type McRng = ChaCha8Rng;

/// Samples per chunk.
pub const DEFAULT_CHUNK: usize = 4096;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based random stream identifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Stream {
    seed: u64,
    key: u64,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream { seed, key: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    /// Independent child stream selected by `tag`.
    pub fn child(&self, tag: u64) -> Stream {
        let key = splitmix64(splitmix64(self.key).rotate_left(17) ^ splitmix64(tag ^ 0xA5A5_5A5A_C3C3_3C3C));
        Stream { seed: self.seed, key }
    }

    pub fn rng(&self) -> McRng {
        let mut bytes = [0u8; 32];
        let mut s = self.seed;
        for chunk in bytes.chunks_mut(8) {
            s = splitmix64(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(bytes);
        rng.set_stream(self.key);
        rng
    }
}

/// Monte Carlo budget and the stream it draws from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: usize,
    pub stream: Stream,
    pub chunk_size: usize,
}

impl McConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        McConfig { samples, stream: Stream::new(seed), chunk_size: DEFAULT_CHUNK }
    }

    pub fn child(&self, tag: u64) -> Self {
        McConfig { stream: self.stream.child(tag), ..*self }
    }

    pub fn with_samples(&self, samples: usize) -> Self {
        McConfig { samples, ..*self }
    }

    pub fn seed(&self) -> u64 {
        self.stream.seed()
    }
}

/// A Monte Carlo answer with its uncertainty.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

impl McEstimate {
    pub fn exact(value: f64) -> Self {
        McEstimate { mean: value, stderr: 0.0, samples: 0, seed: 0 }
    }

    pub fn scale(&self, factor: f64) -> Self {
        McEstimate { mean: self.mean * factor, stderr: self.stderr * factor.abs(), ..*self }
    }

    /// Sum of two independent estimates.
    pub fn add(&self, other: &McEstimate) -> Self {
        McEstimate {
            mean: self.mean + other.mean,
            stderr: self.stderr.hypot(other.stderr),
            samples: self.samples + other.samples,
            seed: self.seed,
        }
    }

    pub fn add_exact(&self, value: f64) -> Self {
        McEstimate { mean: self.mean + value, ..*self }
    }

    /// `Σ w_i e_i` for independent estimates.
    pub fn linear_combination(terms: &[(f64, McEstimate)]) -> Self {
        let mut mean = 0.0;
        let mut var = 0.0;
        let mut samples = 0;
        let mut seed = 0;
        for (w, e) in terms {
            mean += w * e.mean;
            var += (w * e.stderr).powi(2);
            samples += e.samples;
            seed = e.seed;
        }
        McEstimate { mean, stderr: var.sqrt(), samples, seed }
    }

    /// |a − b| / combined stderr; infinite when both are exact and differ.
    pub fn z_score(&self, other: &McEstimate) -> f64 {
        let diff = (self.mean - other.mean).abs();
        let se = self.stderr.hypot(other.stderr);
        if se == 0.0 {
            if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            diff / se
        }
    }

    pub fn z_against(&self, value: f64) -> f64 {
        self.z_score(&McEstimate::exact(value))
    }
}

/// Streaming mean/variance (Welford, merged with Chan's rule).
#[derive(Clone, Copy, Debug, Default)]
pub struct Accumulator {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Accumulator) {
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
        self.m2 += other.m2 + delta * delta * (self.n as f64) * (other.n as f64) / n as f64;
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

    pub fn stderr(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }

    pub fn estimate(&self, seed: u64) -> McEstimate {
        McEstimate { mean: self.mean, stderr: self.stderr(), samples: self.n as usize, seed }
    }
}

/// Runs `cfg.samples` draws of a vector-valued sampler with `width`
/// components and returns one estimate per component.
pub fn run_mc_vec<F>(cfg: &McConfig, width: usize, sampler: F) -> Result<Vec<McEstimate>>
where
    F: Fn(&mut McRng, &mut [f64]) -> Result<()> + Sync,
{
    if cfg.samples == 0 {
        return Err(Error::InvalidArgument("Monte Carlo budget must be positive".into()));
    }
    let chunk = cfg.chunk_size.max(1);
    let n_chunks = cfg.samples.div_ceil(chunk);
    let partials: Vec<Result<Vec<Accumulator>>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = cfg.stream.child(c as u64).rng();
            let len = chunk.min(cfg.samples - c * chunk);
            let mut accs = vec![Accumulator::default(); width];
            let mut out = vec![0.0; width];
            for _ in 0..len {
                out.iter_mut().for_each(|v| *v = 0.0);
                sampler(&mut rng, &mut out)?;
                for (acc, &v) in accs.iter_mut().zip(&out) {
                    acc.push(v);
                }
            }
            Ok(accs)
        })
        .collect();
    let mut total = vec![Accumulator::default(); width];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part?) {
            t.merge(&p);
        }
    }
    Ok(total.iter().map(|a| a.estimate(cfg.seed())).collect())
}

/// Scalar version of [`run_mc_vec`].
pub fn run_mc<F>(cfg: &McConfig, sampler: F) -> Result<McEstimate>
where
    F: Fn(&mut McRng) -> Result<f64> + Sync,
{
    let v = run_mc_vec(cfg, 1, |rng, out| {
        out[0] = sampler(rng)?;
        Ok(())
    })?;
    Ok(v[0])
}

/// Uniform point in the axis-aligned box `[lo, hi]`.
pub fn uniform_in_box(rng: &mut McRng, lo: &[f64], hi: &[f64], out: &mut [f64]) {
    for ((o, l), h) in out.iter_mut().zip(lo).zip(hi) {
        *o = l + (h - l) * rng.random::<f64>();
    }
}

pub fn box_volume(lo: &[f64], hi: &[f64]) -> f64 {
    lo.iter().zip(hi).map(|(l, h)| h - l).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn children_are_distinct_and_reproducible() {
        let s = Stream::new(42);
        assert_ne!(s.child(0), s.child(1));
        assert_eq!(s.child(3).child(7), Stream::new(42).child(3).child(7));
        let a: f64 = s.child(5).rng().random();
        let b: f64 = s.child(5).rng().random();
        assert_eq!(a, b);
    }

    #[test]
    fn chunking_does_not_change_the_answer_across_pools() {
        let cfg = McConfig::new(50_000, 9);
        let f = |rng: &mut McRng| Ok(rng.random::<f64>());
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| run_mc(&cfg, f)).unwrap();
        let b = four.install(|| run_mc(&cfg, f)).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
        assert!((a.mean - 0.5).abs() < 4.0 * a.stderr);
    }

    #[test]
    fn accumulator_merge_matches_sequential() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64).sin()).collect();
        let mut whole = Accumulator::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut left = Accumulator::default();
        let mut right = Accumulator::default();
        xs[..37].iter().for_each(|&x| left.push(x));
        xs[37..].iter().for_each(|&x| right.push(x));
        left.merge(&right);
        assert!((left.mean() - whole.mean()).abs() < 1e-14);
        assert!((left.variance() - whole.variance()).abs() < 1e-13);
    }

    #[test]
    fn zero_budget_is_rejected() {
        let cfg = McConfig::new(0, 1);
        assert!(run_mc(&cfg, |_| Ok(1.0)).is_err());
    }
}
