//! Closed-form rate bound for Gaussian inputs with one interferer of gain |γ|.
//!
//! With `C(x) = log2(1 + x)` and `s = P/N`:
//!
//! ```text
//! R1 < C(s)                      if R2 < C(γ²s/(1+s))
//!      C(s(1+γ²)) − R2           if C(γ²s/(1+s)) ≤ R2 < C(γ²s)
//!      C(s/(1+γ²s))              if R2 ≥ C(γ²s)
//! ```

use std::convert::Infallible;
use std::fmt;

use crate::constellation::Label;
use crate::error::{Error, Result};
use crate::estimator::{estimate_mud_any, MudEstimate};
use crate::real::{db_to_linear, Real};
use crate::roots::bisect_increasing;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GaussianRegime {
    Full,
    SumRateLimited,
    InterferenceLimited,
}

impl GaussianRegime {
    pub fn as_str(self) -> &'static str {
        match self {
            GaussianRegime::Full => "full",
            GaussianRegime::SumRateLimited => "sumrate",
            GaussianRegime::InterferenceLimited => "interference",
        }
    }
}

impl fmt::Display for GaussianRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn capacity<T: Real>(x: T) -> T {
    x.ln_1p() / T::LN_2()
}

/// Values of the three branches at one SNR, whichever is active.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branches<T> {
    /// `C(s)`
    pub full: T,
    /// `C(s(1+γ²)) − R2`
    pub sum_rate: T,
    /// `C(s/(1+γ²s))`
    pub interference: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianExampleResult<T> {
    pub r1_bound: T,
    pub regime: GaussianRegime,
    /// `(C(γ²s/(1+s)), C(γ²s))`
    pub thresholds: (T, T),
    pub branches: Branches<T>,
}

pub fn gaussian_rate<T: Real>(snr: T, gamma_abs: T, r2: T) -> GaussianExampleResult<T> {
    let g2 = gamma_abs * gamma_abs;
    let low = capacity(g2 * snr / (T::one() + snr));
    let high = capacity(g2 * snr);
    let branches = Branches {
        full: capacity(snr),
        sum_rate: capacity(snr * (T::one() + g2)) - r2,
        interference: capacity(snr / (T::one() + g2 * snr)),
    };
    let (r1_bound, regime) = if r2 < low {
        (branches.full, GaussianRegime::Full)
    } else if r2 < high {
        (branches.sum_rate, GaussianRegime::SumRateLimited)
    } else {
        (branches.interference, GaussianRegime::InterferenceLimited)
    };
    GaussianExampleResult {
        r1_bound,
        regime,
        thresholds: (low, high),
        branches,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianCurve<T> {
    pub gamma_abs: T,
    pub r2: T,
    /// `(snr_db, result)` in grid order.
    pub points: Vec<(T, GaussianExampleResult<T>)>,
    /// SNR (dB) where `C(γ²s) = R2`: interference-limited below, sum-rate limited above.
    pub lower_boundary_db: Option<T>,
    /// SNR (dB) where `C(γ²s/(1+s)) = R2`: full rate above.
    pub upper_boundary_db: Option<T>,
}

const BOUNDARY_SEARCH_DB: (f64, f64) = (-150.0, 150.0);

fn boundary_db<T: Real, F: Fn(T) -> T>(threshold: F, r2: T) -> Option<T> {
    let (lo, hi) = (T::lit(BOUNDARY_SEARCH_DB.0), T::lit(BOUNDARY_SEARCH_DB.1));
    let f = |db: T| threshold(db_to_linear(db));
    if r2 <= f(lo) || r2 >= f(hi) {
        return None;
    }
    let r = bisect_increasing(
        |db| Ok::<_, Infallible>(f(db)),
        lo,
        hi,
        r2,
        T::zero(),
        T::lit(1e-10),
        200,
    )
    .expect("infallible");
    Some(r.x)
}

pub fn gaussian_curve<T: Real>(gamma_abs: T, r2: T, snr_grid_db: &[T]) -> Result<GaussianCurve<T>> {
    if snr_grid_db.is_empty() {
        return Err(Error::config("snr_grid_db", "grid is empty"));
    }
    if snr_grid_db.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::config(
            "snr_grid_db",
            "grid must be strictly ascending",
        ));
    }
    if !(gamma_abs >= T::zero()) || !(r2 >= T::zero()) {
        return Err(Error::config("gamma", "|γ| and R2 must be non-negative"));
    }
    let g2 = gamma_abs * gamma_abs;
    Ok(GaussianCurve {
        gamma_abs,
        r2,
        points: snr_grid_db
            .iter()
            .map(|&db| (db, gaussian_rate(db_to_linear(db), gamma_abs, r2)))
            .collect(),
        lower_boundary_db: boundary_db(|s| capacity(g2 * s), r2),
        upper_boundary_db: boundary_db(|s| capacity(g2 * s / (T::one() + s)), r2),
    })
}

/// Two-user Gaussian-input scenario (`P = 1`, zero phases, explicit R2 in bits).
pub fn gaussian_scenario<T: Real>(gamma_abs: T, r2_bits: T) -> Result<Scenario<T>> {
    let lambda_db = if gamma_abs > T::zero() {
        -T::lit(20.0) * gamma_abs.log10()
    } else {
        T::infinity()
    };
    if lambda_db < T::zero() {
        return Err(Error::config(
            "gamma",
            format!("|γ| = {gamma_abs} exceeds the reference gain 1"),
        ));
    }
    Scenario::two_user(lambda_db, T::zero(), Label::Gaussian, Label::Gaussian)?
        .with_r2_bits(r2_bits)
}

/// Monte-Carlo counterpart: the MUD×2 estimator run with Gaussian inputs and exact
/// Gaussian marginal densities.
pub fn estimate_gaussian_mud<T: Real>(
    gamma_abs: T,
    snr: T,
    n_samples: usize,
    seed: u64,
) -> Result<MudEstimate<T>> {
    let s = gaussian_scenario(gamma_abs, T::zero())?;
    estimate_mud_any(&s, s.power() / snr, n_samples, seed)
}
