//! Mismatched-decoding information-rate estimates.
//!
//! The receiver decodes with an auxiliary Gaussian law
//! `q(y|x1,x2) = CN(y; √P(γ1 x1 + γ2 x2), σ²)` where σ² lumps the thermal noise
//! with every interferer it does not model. Each rate is the sample mean, over
//! true-channel draws, of `log2` of a ratio of `q` and its marginals evaluated
//! at the transmitted symbols. All rates of one call share a single draw
//! stream, so chain-rule identities hold per draw.
//!
//! Marginalising a discrete user sums over its alphabet (M(1)·M(2) terms for the
//! joint marginal); marginalising a Gaussian user adds `P|γ|²` to the variance.

use num_complex::Complex;

use crate::channel::{monte_carlo, residual_interference_power, ChannelDraw, ChannelSampler};
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::real::{log_sum_exp, Real};
use crate::scenario::Scenario;

/// Smallest sample count accepted by the public estimators.
pub const MIN_SAMPLES: usize = 10_000;
pub const DEFAULT_SAMPLES: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuxKind {
    /// Reference user only; every interferer is Gaussian noise.
    Sud,
    /// Reference user and user 2; users 3..K are Gaussian noise.
    Mud2,
}

/// Auxiliary channel law used by the decoder metric.
#[derive(Debug, Clone)]
pub struct AuxModel<T> {
    kind: AuxKind,
    amplitudes: Vec<Complex<T>>,
    laws: Vec<Constellation<T>>,
    noise_var: T,
}

impl<T: Real> AuxModel<T> {
    pub fn for_scenario(kind: AuxKind, s: &Scenario<T>, n_thermal: T) -> Result<Self> {
        let modeled = match kind {
            AuxKind::Sud => 1,
            AuxKind::Mud2 => 2,
        };
        if s.k() < modeled {
            return Err(Error::config(
                "k",
                format!("{kind:?} needs at least {modeled} users"),
            ));
        }
        let sp = s.power().sqrt();
        Ok(AuxModel {
            kind,
            amplitudes: s.gains()[..modeled].iter().map(|g| g * sp).collect(),
            laws: s.constellations()[..modeled].to_vec(),
            noise_var: n_thermal + residual_interference_power(s, modeled + 1),
        })
    }

    pub fn kind(&self) -> AuxKind {
        self.kind
    }

    /// `γ_2` scaled by `√P` (MUD×2 only).
    pub fn gamma(&self) -> Option<Complex<T>> {
        self.amplitudes.get(1).copied()
    }

    pub fn noise_var(&self) -> T {
        self.noise_var
    }

    pub(crate) fn with_law(mut self, user: usize, law: Constellation<T>) -> Self {
        self.laws[user] = law;
        self
    }

    /// `ln q(y | known)` where `None` entries are marginalised.
    pub fn log_q(&self, y: Complex<T>, known: &[Option<Complex<T>>], buf: &mut Vec<T>) -> T {
        let mut base = y;
        let mut var = self.noise_var;
        let mut enumerate = [usize::MAX; 2];
        let mut n_enum = 0;
        for (i, k) in known.iter().enumerate() {
            match k {
                Some(x) => base -= self.amplitudes[i] * x,
                None if self.laws[i].is_discrete() => {
                    enumerate[n_enum] = i;
                    n_enum += 1;
                }
                None => var += self.amplitudes[i].norm_sqr(),
            }
        }
        let inv = T::one() / var;
        let norm = -(T::PI() * var).ln();
        let lse = match n_enum {
            0 => -base.norm_sqr() * inv,
            1 => {
                let (a, law) = (self.amplitudes[enumerate[0]], &self.laws[enumerate[0]]);
                buf.clear();
                buf.extend(
                    law.points()
                        .iter()
                        .zip(law.log_prior())
                        .map(|(p, &lp)| lp - (base - a * p).norm_sqr() * inv),
                );
                log_sum_exp(buf)
            }
            _ => {
                let (a, la) = (self.amplitudes[enumerate[0]], &self.laws[enumerate[0]]);
                let (b, lb) = (self.amplitudes[enumerate[1]], &self.laws[enumerate[1]]);
                buf.clear();
                for (p, &lpa) in la.points().iter().zip(la.log_prior()) {
                    let r = base - a * p;
                    for (q, &lpb) in lb.points().iter().zip(lb.log_prior()) {
                        buf.push(lpa + lpb - (r - b * q).norm_sqr() * inv);
                    }
                }
                log_sum_exp(buf)
            }
        };
        lse + norm
    }
}

/// Monte-Carlo rate estimate in bits/symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiEstimate<T> {
    /// Clamped to `[0, H]`, with `H` the entropy of the decoded inputs when discrete.
    pub value: T,
    /// Unclamped sample mean.
    pub raw: T,
    pub std_err: T,
    pub n_samples: usize,
    pub seed: u64,
}

impl<T: Real> MiEstimate<T> {
    pub(crate) fn from_nats(mean: T, std_err: T, n: usize, seed: u64) -> Self {
        let raw = mean / T::LN_2();
        MiEstimate {
            value: raw.max(T::zero()),
            raw,
            std_err: std_err / T::LN_2(),
            n_samples: n,
            seed,
        }
    }

    /// Caps `value` at `bits`; the per-sample log ratio never exceeds it, so any excess
    /// is rounding.
    pub(crate) fn capped(mut self, bits: Option<T>) -> Self {
        if let Some(b) = bits {
            self.value = self.value.min(b);
        }
        self
    }
}

/// `sqrt(a² + b²)`: error budget for comparing two estimates.
pub fn combined_std_err<T: Real>(a: T, b: T) -> T {
    (a * a + b * b).sqrt()
}

/// The four MUD×2 rates of one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateQuad<T> {
    /// I(x1; y | x2)
    pub i1: MiEstimate<T>,
    /// I(x2; y | x1)
    pub i2: MiEstimate<T>,
    /// I(x1, x2; y)
    pub ij: MiEstimate<T>,
    /// I(x2; y)
    pub ix2y: MiEstimate<T>,
}

impl<T: Real> RateQuad<T> {
    /// `|Î_J − Î(x2;y) − Î_1|` on the raw means.
    pub fn chain_rule_residual(&self) -> T {
        (self.ij.raw - self.ix2y.raw - self.i1.raw).abs()
    }
}

/// Quad plus `I_S = I(x1; y)` with x2's alphabet marginalised, from one draw stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MudEstimate<T> {
    pub quad: RateQuad<T>,
    pub i_s: MiEstimate<T>,
}

impl<T: Real> MudEstimate<T> {
    /// `|Î_J − Î_S − Î_2|` on the raw means.
    pub fn symmetric_chain_rule_residual(&self) -> T {
        (self.quad.ij.raw - self.i_s.raw - self.quad.i2.raw).abs()
    }
}

fn check_samples(n: usize) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(Error::config(
            "n_samples",
            format!("need at least {MIN_SAMPLES} samples, got {n}"),
        ));
    }
    Ok(())
}

fn require_discrete<T: Real>(s: &Scenario<T>, users: usize) -> Result<()> {
    match s
        .constellations()
        .iter()
        .take(users)
        .position(|c| !c.is_discrete())
    {
        Some(i) => Err(Error::GaussianInput { user: i + 1 }),
        None => Ok(()),
    }
}

/// One-pass MUD×2 estimation; Gaussian inputs allowed (closed-form marginals).
pub(crate) fn estimate_mud_any<T: Real>(
    s: &Scenario<T>,
    n_thermal: T,
    n: usize,
    seed: u64,
) -> Result<MudEstimate<T>> {
    check_samples(n)?;
    let sampler = ChannelSampler::new(s, n_thermal)?;
    let aux = AuxModel::for_scenario(AuxKind::Mud2, s, n_thermal)?;
    let eval = |d: &ChannelDraw<T>, buf: &mut Vec<T>, out: &mut [T]| {
        let (x1, x2) = (Some(d.symbols[0]), Some(d.symbols[1]));
        let q12 = aux.log_q(d.y, &[x1, x2], buf);
        let q_given2 = aux.log_q(d.y, &[None, x2], buf);
        let q_given1 = aux.log_q(d.y, &[x1, None], buf);
        let q0 = aux.log_q(d.y, &[None, None], buf);
        out[0] = q12 - q_given2;
        out[1] = q12 - q_given1;
        out[2] = q12 - q0;
        out[3] = q_given2 - q0;
        out[4] = q_given1 - q0;
    };
    let m = monte_carlo(&sampler, n, seed, 5, eval);
    let h1 = s.constellations()[0].entropy_bits();
    let h2 = s.constellations()[1].entropy_bits();
    let hj = h1.zip(h2).map(|(a, b)| a + b);
    let est = |i, cap| MiEstimate::from_nats(m.mean(i), m.std_err(i), n, seed).capped(cap);
    Ok(MudEstimate {
        quad: RateQuad {
            i1: est(0, h1),
            i2: est(1, h2),
            ij: est(2, hj),
            ix2y: est(3, h2),
        },
        i_s: est(4, h1),
    })
}

/// All MUD×2 quantities (quad and I_S) on one draw stream.
pub fn estimate_mud<T: Real>(
    s: &Scenario<T>,
    n_thermal: T,
    n_samples: usize,
    seed: u64,
) -> Result<MudEstimate<T>> {
    require_discrete(s, 2)?;
    estimate_mud_any(s, n_thermal, n_samples, seed)
}

pub fn estimate_quad<T: Real>(
    s: &Scenario<T>,
    n_thermal: T,
    n_samples: usize,
    seed: u64,
) -> Result<RateQuad<T>> {
    Ok(estimate_mud(s, n_thermal, n_samples, seed)?.quad)
}

/// `I_S`: rate of user 1 when x2's alphabet is exploited but its data is not decoded.
pub fn estimate_is_mud<T: Real>(
    s: &Scenario<T>,
    n_thermal: T,
    n_samples: usize,
    seed: u64,
) -> Result<MiEstimate<T>> {
    Ok(estimate_mud(s, n_thermal, n_samples, seed)?.i_s)
}

/// Single-user detector: every interferer lumped into Gaussian noise.
pub fn estimate_sud<T: Real>(
    s: &Scenario<T>,
    n_thermal: T,
    n_samples: usize,
    seed: u64,
) -> Result<MiEstimate<T>> {
    require_discrete(s, 1)?;
    check_samples(n_samples)?;
    let sampler = ChannelSampler::new(s, n_thermal)?;
    let aux = AuxModel::for_scenario(AuxKind::Sud, s, n_thermal)?;
    let eval = |d: &ChannelDraw<T>, buf: &mut Vec<T>, out: &mut [T]| {
        out[0] = aux.log_q(d.y, &[Some(d.symbols[0])], buf) - aux.log_q(d.y, &[None], buf);
    };
    let m = monte_carlo(&sampler, n_samples, seed, 1, eval);
    Ok(
        MiEstimate::from_nats(m.mean(0), m.std_err(0), n_samples, seed)
            .capped(s.constellations()[0].entropy_bits()),
    )
}
