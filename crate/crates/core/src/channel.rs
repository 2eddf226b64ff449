//! Symbol-level samples of the true received signal
//! `y = Σ_i √P γ_i x_i + w`, with `w ~ CN(0, N)`.
//!
//! Draws are generated in fixed-size chunks; chunk `c` of a run with seed `s`
//! uses its own generator seeded from `derive_seed(s, &[c])`. Results therefore
//! do not depend on how many workers process the chunks.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::scenario::Scenario;

/// Samples per independently seeded chunk.
pub const CHUNK_LEN: usize = 1 << 14;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable sub-seed for a tuple of integers: fold each word through SplitMix64.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(mix64(master), |acc, &w| mix64(acc ^ mix64(w)))
}

pub(crate) fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, &[chunk as u64]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDraw<T> {
    pub y: Complex<T>,
    /// Transmitted symbol index per user; `None` for Gaussian inputs.
    pub x_indices: Vec<Option<usize>>,
    /// Unit-energy transmitted symbols (before gain and power scaling).
    pub symbols: Vec<Complex<T>>,
    pub noise_var_n: T,
}

/// Per-scenario draw generator; owns nothing mutable, so it is shared by workers.
#[derive(Debug, Clone)]
pub struct ChannelSampler<'a, T> {
    scenario: &'a Scenario<T>,
    amplitudes: Vec<Complex<T>>,
    noise_std: T,
    noise_var: T,
}

impl<'a, T: Real> ChannelSampler<'a, T> {
    pub fn new(scenario: &'a Scenario<T>, n_thermal: T) -> Result<Self> {
        if !(n_thermal > T::zero()) || !n_thermal.is_finite() {
            return Err(Error::config(
                "noise",
                format!("thermal noise power must be finite and > 0, got {n_thermal}"),
            ));
        }
        let sp = scenario.power().sqrt();
        Ok(ChannelSampler {
            scenario,
            amplitudes: scenario.gains().iter().map(|g| g * sp).collect(),
            noise_std: (n_thermal / T::lit(2.0)).sqrt(),
            noise_var: n_thermal,
        })
    }

    /// `√P γ_i` per user.
    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn empty_draw(&self) -> ChannelDraw<T> {
        let k = self.scenario.k();
        ChannelDraw {
            y: Complex::new(T::zero(), T::zero()),
            x_indices: vec![None; k],
            symbols: vec![Complex::new(T::zero(), T::zero()); k],
            noise_var_n: self.noise_var,
        }
    }

    /// Overwrites `out` with a fresh draw; no allocation.
    pub fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut ChannelDraw<T>) {
        let mut y = Complex::new(T::zero(), T::zero());
        for (i, c) in self.scenario.constellations().iter().enumerate() {
            let (idx, x) = c.draw(rng);
            out.x_indices[i] = idx;
            out.symbols[i] = x;
            y += self.amplitudes[i] * x;
        }
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        out.y = y + Complex::new(T::lit(re), T::lit(im)) * self.noise_std;
        out.noise_var_n = self.noise_var;
    }
}

/// Deterministic stream of `n` draws for `(scenario, n_thermal, n, seed)`.
pub struct ChannelStream<'a, T> {
    sampler: ChannelSampler<'a, T>,
    seed: u64,
    remaining: usize,
    produced: usize,
    rng: ChaCha8Rng,
}

impl<T: Real> Iterator for ChannelStream<'_, T> {
    type Item = ChannelDraw<T>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 {
            return None;
        }
        if self.produced.is_multiple_of(CHUNK_LEN) {
            self.rng = chunk_rng(self.seed, self.produced / CHUNK_LEN);
        }
        let mut d = self.sampler.empty_draw();
        self.sampler.draw_into(&mut self.rng, &mut d);
        self.remaining -= 1;
        self.produced += 1;
        Some(d)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

pub fn sample_channel<T: Real>(
    scenario: &Scenario<T>,
    n_thermal: T,
    n: usize,
    seed: u64,
) -> Result<ChannelStream<'_, T>> {
    if n == 0 {
        return Err(Error::config("n_samples", "at least one draw is required"));
    }
    Ok(ChannelStream {
        sampler: ChannelSampler::new(scenario, n_thermal)?,
        seed,
        remaining: n,
        produced: 0,
        rng: chunk_rng(seed, 0),
    })
}

/// `P·Σ_{i ≥ first_modeled} |γ_i|²` with 1-based user numbering.
pub fn residual_interference_power<T: Real>(scenario: &Scenario<T>, first_modeled: usize) -> T {
    let skip = first_modeled.saturating_sub(1);
    scenario
        .gains()
        .iter()
        .skip(skip)
        .fold(T::zero(), |acc, g| acc + g.norm_sqr())
        * scenario.power()
}

/// First and second moments of a vector of per-draw statistics.
#[derive(Debug, Clone)]
pub(crate) struct Moments<T> {
    pub n: usize,
    pub sum: Vec<T>,
    pub sum_sq: Vec<T>,
}

impl<T: Real> Moments<T> {
    fn new(k: usize) -> Self {
        Moments {
            n: 0,
            sum: vec![T::zero(); k],
            sum_sq: vec![T::zero(); k],
        }
    }

    fn push(&mut self, v: &[T]) {
        self.n += 1;
        for ((s, q), &x) in self.sum.iter_mut().zip(self.sum_sq.iter_mut()).zip(v) {
            *s += x;
            *q += x * x;
        }
    }

    fn merge(mut self, other: &Self) -> Self {
        self.n += other.n;
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += *b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += *b;
        }
        self
    }

    pub fn mean(&self, i: usize) -> T {
        self.sum[i] / T::lit(self.n as f64)
    }

    /// Sample standard deviation over √n.
    pub fn std_err(&self, i: usize) -> T {
        let n = T::lit(self.n as f64);
        if self.n < 2 {
            return T::zero();
        }
        let mean = self.sum[i] / n;
        let var = ((self.sum_sq[i] - n * mean * mean) / (n - T::one())).max(T::zero());
        (var / n).sqrt()
    }
}

/// Averages `k` per-draw statistics over `n` draws.
///
/// `eval` receives the draw, a reusable scratch buffer and the output slice. Chunks
/// are evaluated in parallel and merged in chunk order, so the result is
/// bit-identical for any thread count.
pub(crate) fn monte_carlo<T, F>(
    sampler: &ChannelSampler<'_, T>,
    n: usize,
    seed: u64,
    k: usize,
    eval: F,
) -> Moments<T>
where
    T: Real,
    F: Fn(&ChannelDraw<T>, &mut Vec<T>, &mut [T]) + Sync,
{
    let chunks = n.div_ceil(CHUNK_LEN);
    let partial: Vec<Moments<T>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK_LEN.min(n - c * CHUNK_LEN);
            let mut rng = chunk_rng(seed, c);
            let mut draw = sampler.empty_draw();
            let mut scratch = Vec::with_capacity(64);
            let mut out = vec![T::zero(); k];
            let mut m = Moments::new(k);
            for _ in 0..len {
                sampler.draw_into(&mut rng, &mut draw);
                eval(&draw, &mut scratch, &mut out);
                m.push(&out);
            }
            m
        })
        .collect();
    partial.iter().fold(Moments::new(k), |acc, m| acc.merge(m))
}
