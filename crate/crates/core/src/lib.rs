//! Achievable information rates of a reference user in a multibeam satellite
//! forward link, under single-user decoding, joint decoding of the two strongest
//! signals, and time-shared cooperative service.
//!
//! The numerical core is generic over the scalar ([`Real`] is implemented for
//! `f32` and `f64`); the `*64` aliases below are the concrete types used by the
//! sweep harness and the command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod constellation;
pub mod error;
pub mod estimator;
pub mod gaussian;
pub mod harness;
pub mod oracle;
pub mod plot;
pub mod real;
pub mod roots;
pub mod scenario;
pub mod strategy2;
pub mod theory;

pub use channel::{
    derive_seed, residual_interference_power, sample_channel, ChannelDraw, ChannelSampler,
};
pub use constellation::{Constellation, Label};
pub use error::{Error, Result};
pub use estimator::{
    estimate_is_mud, estimate_mud, estimate_quad, estimate_sud, MiEstimate, MudEstimate, RateQuad,
};
pub use gaussian::{
    gaussian_curve, gaussian_rate, GaussianCurve, GaussianExampleResult, GaussianRegime,
};
pub use harness::{run_sweep, RateCurvePoint, Strategy, SweepConfig};
pub use oracle::mi_oracle_awgn;
pub use real::Real;
pub use scenario::{CodeRate, PowerProfile, Scenario, ScenarioFile};
pub use strategy2::{optimize_phase, scenario2_rate, PhaseSearchResult, Scenario2Rate};
pub use theory::{
    achievable_rate, find_cutoff_snr, lemma1_rate, theorem1_rate, AchievableRate, CutoffResult,
    Lemma1Result, Regime,
};

pub type Constellation64 = Constellation<f64>;
pub type Scenario64 = Scenario<f64>;
pub type MiEstimate64 = MiEstimate<f64>;
pub type RateQuad64 = RateQuad<f64>;
pub type MudEstimate64 = MudEstimate<f64>;
pub type CutoffResult64 = CutoffResult<f64>;
pub type GaussianCurve64 = GaussianCurve<f64>;
pub type PhaseSearchResult64 = PhaseSearchResult<f64>;

pub type Constellation32 = Constellation<f32>;
pub type Scenario32 = Scenario<f32>;
pub type MiEstimate32 = MiEstimate<f32>;
pub type RateQuad32 = RateQuad<f32>;
