//! K-user interference scenarios and their file format.
//!
//! Scenario files are TOML with one scenario per file:
//!
//! ```toml
//! k = 6
//! lambdas_db = [0, 25, 25, 27, 30]            # λ_2..λ_K, dB
//! phases_deg = [0, 0, 0, 0, 0, 0]             # optional, one per user, default 0
//! modulations = ["qpsk", "qpsk", "8psk", "8psk", "16apsk", "8psk"]
//! r2 = "3/5"                                   # code rate of user 2 ("n/d" or a float)
//! alpha = 0.5                                  # time fraction served in scenario 2
//! # optional:
//! # r2_bits = 0.5                             # explicit R_2, required when user 2 is gaussian
//! # apsk_ring_ratio = 3.15
//! # random_phases = true                      # interferer phases drawn from the master seed
//! ```
//!
//! The reference user always has `|γ_1| = 1` and power `P = 1`; the noise power is
//! varied by the caller.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constellation::{Constellation, Label, DEFAULT_APSK16_RING_RATIO};
use crate::error::{Error, Result};
use crate::real::{db_to_linear, Real};

/// Binary code rate `r` in (0, 1], stored exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CodeRate(Ratio<u32>);

impl CodeRate {
    pub fn new(numer: u32, denom: u32) -> Result<Self> {
        if denom == 0 || numer > denom {
            return Err(Error::config(
                "r2",
                format!("code rate {numer}/{denom} must lie in [0, 1]"),
            ));
        }
        Ok(CodeRate(Ratio::new(numer, denom)))
    }

    pub fn from_f64(v: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::config(
                "r2",
                format!("code rate {v} must lie in [0, 1]"),
            ));
        }
        let r = Ratio::<i64>::approximate_float(v)
            .ok_or_else(|| Error::config("r2", format!("cannot represent code rate {v}")))?;
        CodeRate::new(*r.numer() as u32, *r.denom() as u32)
    }

    pub fn numer(&self) -> u32 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u32 {
        *self.0.denom()
    }

    pub fn value<T: Real>(&self) -> T {
        T::lit(self.numer() as f64) / T::lit(self.denom() as f64)
    }

    /// Column-name fragment, e.g. `3_5`.
    pub fn tag(&self) -> String {
        format!("{}_{}", self.numer(), self.denom())
    }
}

impl fmt::Display for CodeRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl FromStr for CodeRate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let parse = |t: &str| {
                t.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::config("r2", format!("bad code rate `{s}`")))
            };
            CodeRate::new(parse(n)?, parse(d)?)
        } else {
            let v = s
                .parse::<f64>()
                .map_err(|_| Error::config("r2", format!("bad code rate `{s}`")))?;
            CodeRate::from_f64(v)
        }
    }
}

/// Signal-to-interference ratios λ_2..λ_K in dB.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerProfile<T> {
    lambdas_db: Vec<T>,
}

impl<T: Real> PowerProfile<T> {
    /// `+∞` dB is accepted and means a silent interferer.
    pub fn new(lambdas_db: Vec<T>) -> Result<Self> {
        for (i, &l) in lambdas_db.iter().enumerate() {
            if l.is_nan() || l < T::zero() {
                return Err(Error::config(
                    "lambdas_db",
                    format!(
                        "λ_{} = {l} dB is negative; the reference user must be the strongest",
                        i + 2
                    ),
                ));
            }
        }
        if let Some((&first, rest)) = lambdas_db.split_first() {
            if let Some(pos) = rest.iter().position(|&l| l < first) {
                return Err(Error::config(
                    "lambdas_db",
                    format!(
                        "λ_{} is below λ_2; user 2 must be the strongest interferer",
                        pos + 3
                    ),
                ));
            }
        }
        Ok(PowerProfile { lambdas_db })
    }

    pub fn lambdas_db(&self) -> &[T] {
        &self.lambdas_db
    }

    /// `|γ_i|² = 10^(−λ_i/10)` for i = 2..K.
    pub fn interferer_powers(&self) -> impl Iterator<Item = T> + '_ {
        self.lambdas_db.iter().map(|&l| db_to_linear(-l))
    }
}

#[derive(Debug, Clone)]
pub struct Scenario<T> {
    profile: PowerProfile<T>,
    gains: Vec<Complex<T>>,
    constellations: Vec<Constellation<T>>,
    power: T,
    code_rate: CodeRate,
    r2_bits_override: Option<T>,
    alpha: T,
    random_phases: bool,
}

impl<T: Real> Scenario<T> {
    /// Builds a scenario with `P = 1`; `phases_deg` holds one phase per user.
    pub fn new(
        profile: PowerProfile<T>,
        phases_deg: &[T],
        constellations: Vec<Constellation<T>>,
        code_rate: CodeRate,
        alpha: T,
    ) -> Result<Self> {
        let k = profile.lambdas_db.len() + 1;
        if constellations.len() != k {
            return Err(Error::config(
                "modulations",
                format!("expected {k} modulations, got {}", constellations.len()),
            ));
        }
        if phases_deg.len() != k {
            return Err(Error::config(
                "phases_deg",
                format!("expected {k} phases, got {}", phases_deg.len()),
            ));
        }
        if !(alpha >= T::zero() && alpha <= T::one()) {
            return Err(Error::config(
                "alpha",
                format!("α = {alpha} must lie in [0, 1]"),
            ));
        }
        let amps = std::iter::once(T::one()).chain(profile.interferer_powers().map(T::sqrt));
        let gains = amps
            .zip(phases_deg)
            .map(|(a, &deg)| Complex::from_polar(a, deg.to_radians()))
            .collect();
        Ok(Scenario {
            profile,
            gains,
            constellations,
            power: T::one(),
            code_rate,
            r2_bits_override: None,
            alpha,
            random_phases: false,
        })
    }

    /// Built-in power profiles: users 1–2 QPSK, users 3, 4 and 6 8PSK, user 5 16APSK.
    pub fn builtin_case(n: u32) -> Result<Self> {
        let lambdas: [f64; 5] = match n {
            1 => [0.0, 25.0, 25.0, 27.0, 30.0],
            2 => [2.0, 26.0, 26.0, 27.0, 30.0],
            3 => [4.0, 27.0, 26.0, 27.0, 30.0],
            _ => {
                return Err(Error::config(
                    "case",
                    format!("builtin case {n} does not exist (1, 2 or 3)"),
                ))
            }
        };
        let labels = [
            Label::Qpsk,
            Label::Qpsk,
            Label::Psk8,
            Label::Psk8,
            Label::Apsk16,
            Label::Psk8,
        ];
        Self::new(
            PowerProfile::new(lambdas.iter().map(|&l| T::lit(l)).collect())?,
            &[T::zero(); 6],
            labels.iter().map(|&l| Constellation::new(l)).collect(),
            CodeRate::new(3, 5)?,
            T::lit(0.5),
        )
    }

    /// Two-user scenario with interferer at `lambda_db` below the reference and phase `phase_deg`.
    pub fn two_user(lambda_db: T, phase_deg: T, user1: Label, user2: Label) -> Result<Self> {
        Self::new(
            PowerProfile::new(vec![lambda_db])?,
            &[T::zero(), phase_deg],
            vec![Constellation::new(user1), Constellation::new(user2)],
            CodeRate::new(1, 2)?,
            T::lit(0.5),
        )
    }

    pub fn single_user(label: Label) -> Self {
        Self::new(
            PowerProfile {
                lambdas_db: Vec::new(),
            },
            &[T::zero()],
            vec![Constellation::new(label)],
            CodeRate(Ratio::new(1, 2)),
            T::lit(0.5),
        )
        .expect("single-user scenario is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let field = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.contains("missing field") || msg.contains("unknown field"))
                .unwrap_or("<file>")
                .to_string();
            Error::config(field, msg)
        })?;
        file.into_scenario()
    }

    pub fn to_file(&self) -> ScenarioFile {
        let phases: Vec<f64> = self
            .gains
            .iter()
            .map(|g| g.arg().as_f64().to_degrees())
            .collect();
        let ring = self
            .constellations
            .iter()
            .find(|c| c.label() == Label::Apsk16)
            .map(|c| (c.points()[4].norm() / c.points()[0].norm()).as_f64())
            .filter(|r| (r - DEFAULT_APSK16_RING_RATIO).abs() > 1e-9);
        ScenarioFile {
            k: self.k(),
            lambdas_db: self.profile.lambdas_db.iter().map(|l| l.as_f64()).collect(),
            phases_deg: Some(phases),
            modulations: self
                .constellations
                .iter()
                .map(|c| c.label().to_string())
                .collect(),
            r2: RateSpec::Text(self.code_rate.to_string()),
            alpha: self.alpha.as_f64(),
            r2_bits: self.r2_bits_override.map(Real::as_f64),
            apsk_ring_ratio: ring,
            random_phases: self.random_phases.then_some(true),
        }
    }

    pub fn k(&self) -> usize {
        self.gains.len()
    }

    pub fn gains(&self) -> &[Complex<T>] {
        &self.gains
    }

    pub fn constellations(&self) -> &[Constellation<T>] {
        &self.constellations
    }

    pub fn profile(&self) -> &PowerProfile<T> {
        &self.profile
    }

    pub fn power(&self) -> T {
        self.power
    }

    pub fn code_rate(&self) -> CodeRate {
        self.code_rate
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn with_code_rate(mut self, r: CodeRate) -> Self {
        self.code_rate = r;
        self
    }

    pub fn with_alpha(mut self, alpha: T) -> Result<Self> {
        if !(alpha >= T::zero() && alpha <= T::one()) {
            return Err(Error::config(
                "alpha",
                format!("α = {alpha} must lie in [0, 1]"),
            ));
        }
        self.alpha = alpha;
        Ok(self)
    }

    /// Sets R_2 directly in bits/symbol, bypassing `r·log2 M`.
    pub fn with_r2_bits(mut self, bits: T) -> Result<Self> {
        if !(bits >= T::zero()) {
            return Err(Error::config(
                "r2_bits",
                format!("R_2 = {bits} must be non-negative"),
            ));
        }
        self.r2_bits_override = Some(bits);
        Ok(self)
    }

    /// Replaces user `user`'s alphabet (0-based index).
    pub fn with_constellation(mut self, user: usize, c: Constellation<T>) -> Self {
        self.constellations[user] = c;
        self
    }

    /// Multiplies the gain of every interferer (users 2..K) by a uniformly random phase
    /// drawn from `seed`; the reference user's phase is left untouched.
    pub fn with_random_phases(mut self, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for g in self.gains.iter_mut().skip(1) {
            let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            *g *= Complex::from_polar(T::one(), T::lit(phi));
        }
        self
    }

    /// True when the file asked for interferer phases drawn per run.
    pub fn wants_random_phases(&self) -> bool {
        self.random_phases
    }

    /// Applies per-run random phases if the scenario requested them.
    pub fn resolve_phases(self, run_seed: u64) -> Self {
        if self.random_phases {
            let mut s = self.with_random_phases(run_seed);
            s.random_phases = false;
            s
        } else {
            self
        }
    }

    /// `R_2 = r^(2)·log2 M^(2)` in bits/symbol.
    pub fn interferer_rate_bits(&self) -> Result<T> {
        if let Some(bits) = self.r2_bits_override {
            return Ok(bits);
        }
        let c = self
            .constellations
            .get(1)
            .ok_or_else(|| Error::config("k", "scenario has no interferer"))?;
        let bits = c.bits_per_symbol().ok_or_else(|| {
            Error::config("r2_bits", "user 2 is gaussian; set r2_bits explicitly")
        })?;
        Ok(self.code_rate.value::<T>() * bits)
    }

    /// Same R_2 formula for an arbitrary code rate.
    pub fn rate_bits_for(&self, r: CodeRate) -> Result<T> {
        self.clone().with_code_rate(r).interferer_rate_bits()
    }
}

/// On-disk representation of a scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub k: usize,
    pub lambdas_db: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases_deg: Option<Vec<f64>>,
    pub modulations: Vec<String>,
    pub r2: RateSpec,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r2_bits: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub apsk_ring_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_phases: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RateSpec {
    Text(String),
    Number(f64),
}

impl ScenarioFile {
    pub fn into_scenario<T: Real>(self) -> Result<Scenario<T>> {
        if self.k < 1 {
            return Err(Error::config("k", "at least one user is required"));
        }
        if self.lambdas_db.len() + 1 != self.k {
            return Err(Error::config(
                "lambdas_db",
                format!(
                    "k = {} needs {} values, got {}",
                    self.k,
                    self.k - 1,
                    self.lambdas_db.len()
                ),
            ));
        }
        let ring = self.apsk_ring_ratio.unwrap_or(DEFAULT_APSK16_RING_RATIO);
        let constellations = self
            .modulations
            .iter()
            .map(|m| match m.parse::<Label>()? {
                Label::Apsk16 => Constellation::apsk16(T::lit(ring)),
                l => Ok(Constellation::new(l)),
            })
            .collect::<Result<Vec<_>>>()?;
        let phases: Vec<T> = match self.phases_deg {
            Some(p) => p.into_iter().map(T::lit).collect(),
            None => vec![T::zero(); self.k],
        };
        let code_rate = match self.r2 {
            RateSpec::Text(s) => s.parse()?,
            RateSpec::Number(v) => CodeRate::from_f64(v)?,
        };
        let profile = PowerProfile::new(self.lambdas_db.into_iter().map(T::lit).collect())?;
        let mut s = Scenario::new(
            profile,
            &phases,
            constellations,
            code_rate,
            T::lit(self.alpha),
        )?;
        if let Some(b) = self.r2_bits {
            s = s.with_r2_bits(T::lit(b))?;
        }
        s.random_phases = self.random_phases.unwrap_or(false);
        Ok(s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario file serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::linear_to_db;
    use proptest::prelude::*;

    const CASE1: &str = r#"
k = 6
lambdas_db = [0, 25, 25, 27, 30]
modulations = ["qpsk", "qpsk", "8psk", "8psk", "16apsk", "8psk"]
r2 = "3/5"
alpha = 0.5
"#;

    fn field_of(e: Error) -> String {
        match e {
            Error::Config { field, .. } => field,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn case1_file_gains() {
        let s = Scenario::<f64>::from_toml(CASE1).unwrap();
        assert_eq!(s.k(), 6);
        assert!((s.gains()[0].norm() - 1.0).abs() < 1e-15);
        assert!((s.gains()[1].norm() - 1.0).abs() < 1e-15);
        assert!((s.gains()[5].norm() - 10f64.powf(-1.5)).abs() < 1e-15);
        assert!((s.gains()[5].norm() - 0.03162).abs() < 1e-5);
    }

    #[test]
    fn case3_interferer_power() {
        let s = Scenario::<f64>::builtin_case(3).unwrap();
        assert!((s.gains()[1].norm_sqr() - 10f64.powf(-0.4)).abs() < 1e-15);
        assert!((s.gains()[1].norm_sqr() - 0.3981).abs() < 1e-4);
    }

    #[test]
    fn two_user_equal_power_with_phase() {
        let text = r#"
k = 2
lambdas_db = [0]
phases_deg = [0, 30]
modulations = ["qpsk", "qpsk"]
r2 = 0.6
alpha = 1
"#;
        let s = Scenario::<f64>::from_toml(text).unwrap();
        assert_eq!(s.gains()[0], Complex::new(1.0, 0.0));
        let expect = Complex::from_polar(1.0, 30f64.to_radians());
        assert!((s.gains()[1] - expect).norm() < 1e-15);
        assert_eq!(s.code_rate(), CodeRate::new(3, 5).unwrap());
    }

    #[test]
    fn builtin_profiles() {
        let rows = [
            [0.0, 25.0, 25.0, 27.0, 30.0],
            [2.0, 26.0, 26.0, 27.0, 30.0],
            [4.0, 27.0, 26.0, 27.0, 30.0],
        ];
        for (n, row) in (1..=3).zip(rows) {
            let s = Scenario::<f64>::builtin_case(n).unwrap();
            assert_eq!(s.profile().lambdas_db(), &row);
            let labels: Vec<Label> = s.constellations().iter().map(|c| c.label()).collect();
            assert_eq!(
                labels,
                [
                    Label::Qpsk,
                    Label::Qpsk,
                    Label::Psk8,
                    Label::Psk8,
                    Label::Apsk16,
                    Label::Psk8
                ]
            );
            assert!((s.gains()[0].norm() - 1.0).abs() < 1e-15);
            for (g, l) in s.gains()[1..].iter().zip(row) {
                assert!((g.norm_sqr() - 10f64.powf(-l / 10.0)).abs() < 1e-15);
            }
        }
        assert!(Scenario::<f64>::builtin_case(4).is_err());
        assert!(Scenario::<f64>::builtin_case(0).is_err());
    }

    #[test]
    fn interferer_rates() {
        let s = Scenario::<f64>::builtin_case(1).unwrap();
        assert!((s.interferer_rate_bits().unwrap() - 1.2).abs() < 1e-12);
        let hi = s.rate_bits_for(CodeRate::new(8, 9).unwrap()).unwrap();
        assert!((hi - 16.0 / 9.0).abs() < 1e-12);
        let g = Scenario::<f64>::two_user(0.0, 0.0, Label::Gaussian, Label::Gaussian).unwrap();
        assert_eq!(field_of(g.interferer_rate_bits().unwrap_err()), "r2_bits");
        let g = g.with_r2_bits(0.5).unwrap();
        assert_eq!(g.interferer_rate_bits().unwrap(), 0.5);
    }

    #[test]
    fn config_errors_name_the_field() {
        let missing = CASE1.replace("alpha = 0.5", "");
        assert_eq!(
            field_of(Scenario::<f64>::from_toml(&missing).unwrap_err()),
            "alpha"
        );
        let neg = CASE1.replace("[0, 25", "[-1, 25");
        assert_eq!(
            field_of(Scenario::<f64>::from_toml(&neg).unwrap_err()),
            "lambdas_db"
        );
        let bad = CASE1.replace("\"16apsk\"", "\"64qam\"");
        assert_eq!(
            field_of(Scenario::<f64>::from_toml(&bad).unwrap_err()),
            "modulations"
        );
        let alpha = CASE1.replace("alpha = 0.5", "alpha = 1.5");
        assert_eq!(
            field_of(Scenario::<f64>::from_toml(&alpha).unwrap_err()),
            "alpha"
        );
        let k = CASE1.replace("k = 6", "k = 5");
        assert_eq!(
            field_of(Scenario::<f64>::from_toml(&k).unwrap_err()),
            "lambdas_db"
        );
        let rate = CASE1.replace("\"3/5\"", "\"7/5\"");
        assert_eq!(
            field_of(Scenario::<f64>::from_toml(&rate).unwrap_err()),
            "r2"
        );
        let order = CASE1.replace("[0, 25", "[26, 25");
        assert_eq!(
            field_of(Scenario::<f64>::from_toml(&order).unwrap_err()),
            "lambdas_db"
        );
    }

    #[test]
    fn profile_allows_case3_non_monotone_tail() {
        assert!(PowerProfile::new(vec![4.0f64, 27.0, 26.0, 27.0, 30.0]).is_ok());
    }

    #[test]
    fn file_round_trip() {
        let s = Scenario::<f64>::builtin_case(2).unwrap();
        let text = s.to_file().to_toml();
        let back = Scenario::<f64>::from_toml(&text).unwrap();
        assert_eq!(back.profile().lambdas_db(), s.profile().lambdas_db());
        assert_eq!(back.code_rate(), s.code_rate());
        for (a, b) in back.gains().iter().zip(s.gains()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn random_phases_are_seeded() {
        let a = Scenario::<f64>::builtin_case(1)
            .unwrap()
            .with_random_phases(5);
        let b = Scenario::<f64>::builtin_case(1)
            .unwrap()
            .with_random_phases(5);
        assert_eq!(a.gains(), b.gains());
        assert_eq!(a.gains()[0], Complex::new(1.0, 0.0));
        assert!((a.gains()[1].norm() - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn lambda_gain_round_trip(l in 0.0f64..60.0) {
            let s = Scenario::<f64>::two_user(l, 0.0, Label::Qpsk, Label::Qpsk).unwrap();
            let back = -linear_to_db(s.gains()[1].norm_sqr());
            prop_assert!((back - l).abs() < 1e-12);
        }
    }
}
