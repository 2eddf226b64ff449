//! Achievable rate of the reference user when the strongest interferer keeps a fixed rate.
//!
//! With the MAC region `R1 < I1`, `R2 < I2`, `R1 + R2 < IJ` and R2 pinned:
//!
//! * `R2 < I(x2;y)`          → `I_A = I1`           (user 2 decodable, no sum-rate cost)
//! * `I(x2;y) ≤ R2 < I2`     → `I_A = IJ − R2`      (sum-rate limited)
//! * `R2 ≥ I2`               → `I_A = 0`            (user 2 cannot be decoded)
//!
//! Treating user 2 as structured interference instead gives `I_S = I(x1;y)`, and
//! the achievable rate is `max{I_S, I_A}`. `I_A` jumps from 0 at the cut-off SNR,
//! where `I2 = R2`; the maximum is continuous.

use std::fmt;

use crate::error::{Error, Result};
use crate::estimator::{estimate_mud, MiEstimate, RateQuad};
use crate::real::{db_to_linear, Real};
use crate::roots::bisect_increasing;
use crate::scenario::Scenario;

/// Tolerance on the quad's chain-rule identity before it is considered corrupt.
pub const CHAIN_RULE_TOL: f64 = 1e-6;
pub const DEFAULT_CUTOFF_TOL_BITS: f64 = 1e-3;
pub const MAX_BISECTION_ITERS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `R2 < I(x2;y)`
    Full,
    /// `I(x2;y) ≤ R2 < I(x2;y|x1)`
    SumRateLimited,
    /// `R2 ≥ I(x2;y|x1)`
    Zero,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Full => "full",
            Regime::SumRateLimited => "sumrate",
            Regime::Zero => "zero",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma1Result<T> {
    pub i_a: T,
    pub regime: Regime,
}

/// Piecewise `I_A` from the quad's clamped values.
///
/// The zero branch is tested first, so an estimate with `I(x2;y) > I2` (possible only
/// through Monte-Carlo noise) still never claims a rate for an undecodable user 2.
pub fn lemma1_rate<T: Real>(q: &RateQuad<T>, r2: T) -> Result<Lemma1Result<T>> {
    if !(r2 >= T::zero()) {
        return Err(Error::config(
            "r2",
            format!("R_2 = {r2} must be non-negative"),
        ));
    }
    if q.chain_rule_residual() > T::lit(CHAIN_RULE_TOL) {
        return Err(Error::Internal(format!(
            "rate quad violates I_J = I(x2;y) + I_1 by {}",
            q.chain_rule_residual()
        )));
    }
    let res = if r2 >= q.i2.value {
        Lemma1Result {
            i_a: T::zero(),
            regime: Regime::Zero,
        }
    } else if r2 < q.ix2y.value {
        Lemma1Result {
            i_a: q.i1.value,
            regime: Regime::Full,
        }
    } else {
        Lemma1Result {
            i_a: (q.ij.value - r2).max(T::zero()),
            regime: Regime::SumRateLimited,
        }
    };
    Ok(res)
}

/// `max{I_S, I_A}`.
pub fn theorem1_rate<T: Real>(q: &RateQuad<T>, i_s: &MiEstimate<T>, r2: T) -> Result<T> {
    Ok(i_s.value.max(lemma1_rate(q, r2)?.i_a))
}

/// `max{I_S, I_A}` together with the `I_A` branch and the standard error of the
/// estimate that attains the maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AchievableRate<T> {
    pub rate: T,
    pub std_err: T,
    pub lemma1: Lemma1Result<T>,
    /// True when `I_S` attains the maximum.
    pub interference_as_noise: bool,
}

pub fn achievable_rate<T: Real>(
    q: &RateQuad<T>,
    i_s: &MiEstimate<T>,
    r2: T,
) -> Result<AchievableRate<T>> {
    let l = lemma1_rate(q, r2)?;
    let use_s = i_s.value >= l.i_a;
    let std_err = if use_s {
        i_s.std_err
    } else {
        match l.regime {
            Regime::Full => q.i1.std_err,
            _ => q.ij.std_err,
        }
    };
    Ok(AchievableRate {
        rate: i_s.value.max(l.i_a),
        std_err,
        lemma1: l,
        interference_as_noise: use_s,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffResult<T> {
    pub snr_c_db: T,
    pub residual_bits: T,
    pub iterations: usize,
    /// Standard error of `Î(x2;y|x1)` at the reported SNR.
    pub std_err: T,
    /// `R2` is already decodable at the lower bracket edge; `snr_c_db` is that edge.
    pub below_bracket: bool,
}

/// Bisection in dB on `P/N ↦ Î(x2;y|x1)` for the SNR where it equals `r2`.
///
/// Every evaluation uses the same seed, which makes the objective a deterministic,
/// continuous function of the SNR.
pub fn find_cutoff_snr<T: Real>(
    s: &Scenario<T>,
    r2: T,
    bracket_db: (T, T),
    n_samples: usize,
    seed: u64,
    tol_bits: T,
) -> Result<CutoffResult<T>> {
    if !(tol_bits > T::zero()) {
        return Err(Error::config("tol_bits", "tolerance must be positive"));
    }
    let (lo, hi) = bracket_db;
    if !(lo < hi) {
        return Err(Error::config(
            "bracket",
            format!("empty bracket [{lo}, {hi}] dB"),
        ));
    }
    if let Some(cap) = s.constellations().get(1).and_then(|c| c.bits_per_symbol()) {
        if r2 >= cap {
            return Err(Error::Bracketing(format!(
                "R2 = {r2} bits is not below the {cap}-bit entropy of user 2's alphabet; no finite cut-off"
            )));
        }
    }
    let i2_at = |db: T| -> Result<MiEstimate<T>> {
        let n_thermal = s.power() / db_to_linear(db);
        Ok(estimate_mud(s, n_thermal, n_samples, seed)?.quad.i2)
    };
    let f_lo = i2_at(lo)?;
    if r2 <= f_lo.value {
        return Ok(CutoffResult {
            snr_c_db: lo,
            residual_bits: (f_lo.value - r2).max(T::zero()),
            iterations: 0,
            std_err: f_lo.std_err,
            below_bracket: true,
        });
    }
    let f_hi = i2_at(hi)?;
    if r2 >= f_hi.value {
        return Err(Error::Bracketing(format!(
            "I(x2;y|x1) reaches only {:.6} bits at {hi} dB, below R2 = {r2}; no finite cut-off in [{lo}, {hi}] dB",
            f_hi.value
        )));
    }
    let slack = T::lit(3.0) * f_lo.std_err.max(f_hi.std_err);
    let mut last_se = T::zero();
    let result = bisect_increasing(
        |db| {
            let e = i2_at(db)?;
            if e.value < f_lo.value - slack || e.value > f_hi.value + slack {
                return Err(Error::Precision(format!(
                    "I(x2;y|x1) estimate {} at {db} dB leaves the bracket values [{}, {}]; increase n_samples",
                    e.value, f_lo.value, f_hi.value
                )));
            }
            last_se = e.std_err;
            Ok(e.value)
        },
        lo,
        hi,
        r2,
        tol_bits,
        T::lit(1e-9),
        MAX_BISECTION_ITERS,
    )?;
    let residual = (result.fx - r2).abs();
    if residual > tol_bits {
        return Err(Error::Precision(format!(
            "bisection stalled at {} dB with residual {residual} bits; increase n_samples",
            result.x
        )));
    }
    Ok(CutoffResult {
        snr_c_db: result.x,
        residual_bits: residual,
        iterations: result.iterations,
        std_err: last_se,
        below_bracket: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::Label;
    use proptest::prelude::*;

    fn est(v: f64) -> MiEstimate<f64> {
        MiEstimate {
            value: v,
            raw: v,
            std_err: 0.001,
            n_samples: 10_000,
            seed: 0,
        }
    }

    fn quad(i1: f64, i2: f64, ij: f64) -> RateQuad<f64> {
        RateQuad {
            i1: est(i1),
            i2: est(i2),
            ij: est(ij),
            ix2y: est(ij - i1),
        }
    }

    #[test]
    fn ia_branches() {
        let q = quad(2.0, 1.0, 2.5);
        assert_eq!(
            lemma1_rate(&q, 0.3).unwrap(),
            Lemma1Result {
                i_a: 2.0,
                regime: Regime::Full
            }
        );
        let mid = lemma1_rate(&q, 0.7).unwrap();
        assert_eq!(mid.regime, Regime::SumRateLimited);
        assert!((mid.i_a - 1.8).abs() < 1e-12);
        assert_eq!(
            lemma1_rate(&q, 1.2).unwrap(),
            Lemma1Result {
                i_a: 0.0,
                regime: Regime::Zero
            }
        );
    }

    #[test]
    fn ties_go_to_the_lower_regime() {
        let q = quad(2.0, 1.0, 2.5);
        assert_eq!(lemma1_rate(&q, 0.5).unwrap().regime, Regime::SumRateLimited);
        assert_eq!(lemma1_rate(&q, 1.0).unwrap().regime, Regime::Zero);
    }

    #[test]
    fn rejects_broken_quad() {
        let mut q = quad(2.0, 1.0, 2.5);
        q.ix2y.raw += 1e-3;
        assert!(matches!(lemma1_rate(&q, 0.3), Err(Error::Internal(_))));
        assert!(matches!(
            lemma1_rate(&quad(2.0, 1.0, 2.5), -0.1),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn achievable_rate_takes_the_larger_branch() {
        let q = quad(2.0, 1.0, 2.5);
        assert_eq!(theorem1_rate(&q, &est(0.4), 1.2).unwrap(), 0.4);
        assert_eq!(theorem1_rate(&q, &est(1.5), 0.3).unwrap(), 2.0);
        // I_S = IJ − I2 = 1.5 just below the sum-rate branch value IJ − R2 for R2 < I2
        let r = achievable_rate(&q, &est(1.5), 0.9).unwrap();
        assert!((r.rate - 1.6).abs() < 1e-12);
        assert!(!r.interference_as_noise);
    }

    #[test]
    fn cutoff_zero_rate_is_below_bracket() {
        let s = Scenario::<f64>::two_user(0.0, 0.0, Label::Qpsk, Label::Qpsk).unwrap();
        let c = find_cutoff_snr(&s, 0.0, (-10.0, 20.0), 20_000, 1, 1e-3).unwrap();
        assert!(c.below_bracket);
        assert_eq!(c.snr_c_db, -10.0);
    }

    #[test]
    fn cutoff_unreachable_rate_is_bracketing_error() {
        let s = Scenario::<f64>::two_user(0.0, 0.0, Label::Qpsk, Label::Qpsk).unwrap();
        let e = find_cutoff_snr(&s, 2.0, (-10.0, 20.0), 20_000, 1, 1e-3).unwrap_err();
        assert!(matches!(e, Error::Bracketing(_)));
        assert_eq!(e.exit_code(), 3);
    }

    #[test]
    fn cutoff_residual_within_tolerance() {
        let s = Scenario::<f64>::two_user(0.0, 0.0, Label::Qpsk, Label::Qpsk).unwrap();
        let c = find_cutoff_snr(&s, 1.2, (-10.0, 20.0), 50_000, 3, 1e-3).unwrap();
        assert!(c.residual_bits <= 1e-3);
        assert!(!c.below_bracket);
        assert!((c.snr_c_db - 1.47).abs() < 0.3, "{c:?}");
    }

    proptest! {
        #[test]
        fn ia_is_pure_and_monotone_in_r2(i1 in 0.0f64..2.0, extra in 0.0f64..2.0, frac in 0.0f64..1.0,
                                            a in 0.0f64..4.0, b in 0.0f64..4.0) {
            // valid quads: I(x2;y) = IJ − I1 ≤ I2
            let i2 = extra;
            let ij = i1 + frac * i2;
            let q = quad(i1, i2, ij);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let r_lo = lemma1_rate(&q, lo).unwrap();
            prop_assert_eq!(r_lo, lemma1_rate(&q, lo).unwrap());
            prop_assert!(r_lo.i_a >= lemma1_rate(&q, hi).unwrap().i_a - 1e-12);
            prop_assert!(r_lo.i_a >= 0.0);
        }
    }
}
