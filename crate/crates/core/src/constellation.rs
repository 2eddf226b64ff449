//! Modulation alphabets.
//!
//! Every alphabet has unit average energy; transmit power enters through the
//! user gain. Point ordering is fixed and part of the CSV/debug contract:
//!
//! * QPSK: `exp(j(π/4 + kπ/2))`, k = 0..3 (adjacent points are neighbours).
//! * 8PSK: `exp(j2πk/8)`, k = 0..7.
//! * 16APSK: the 4 inner-ring points `r₁·exp(j(π/4 + kπ/2))` first, then the
//!   12 outer-ring points `ρr₁·exp(j(π/12 + kπ/6))`.
//!
//! Rotated alphabets are re-sorted by (ring, angle) so that a rotation by a
//! symmetry angle reproduces the original indexing.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::real::Real;

/// Default 16APSK outer/inner ring ratio.
pub const DEFAULT_APSK16_RING_RATIO: f64 = 3.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Qpsk,
    Psk8,
    Apsk16,
    Gaussian,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Qpsk => "qpsk",
            Label::Psk8 => "8psk",
            Label::Apsk16 => "16apsk",
            Label::Gaussian => "gaussian",
        }
    }

    pub fn is_discrete(self) -> bool {
        self != Label::Gaussian
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "qpsk" => Ok(Label::Qpsk),
            "8psk" | "psk8" => Ok(Label::Psk8),
            "16apsk" | "apsk16" => Ok(Label::Apsk16),
            "gaussian" => Ok(Label::Gaussian),
            other => Err(Error::config(
                "modulations",
                format!(
                    "unknown modulation label `{other}` (expected qpsk, 8psk, 16apsk or gaussian)"
                ),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation<T> {
    label: Label,
    points: Vec<Complex<T>>,
    prior: Vec<T>,
    log_prior: Vec<T>,
    /// Phase factor applied to Gaussian draws (discrete alphabets carry rotation in `points`).
    rotation: Complex<T>,
}

impl<T: Real> Constellation<T> {
    pub fn new(label: Label) -> Self {
        match label {
            Label::Qpsk => Self::psk(label, 4, T::FRAC_PI_4()),
            Label::Psk8 => Self::psk(label, 8, T::zero()),
            Label::Apsk16 => Self::apsk16(T::lit(DEFAULT_APSK16_RING_RATIO))
                .expect("default ring ratio is valid"),
            Label::Gaussian => Constellation {
                label,
                points: Vec::new(),
                prior: Vec::new(),
                log_prior: Vec::new(),
                rotation: Complex::new(T::one(), T::zero()),
            },
        }
    }

    /// Parses a scenario-file label and builds the alphabet.
    pub fn parse(label: &str) -> Result<Self> {
        Ok(Self::new(label.parse()?))
    }

    /// 16APSK with 4 + 12 points and the given outer/inner ring ratio.
    pub fn apsk16(ring_ratio: T) -> Result<Self> {
        if !(ring_ratio > T::one()) || !ring_ratio.is_finite() {
            return Err(Error::config(
                "apsk_ring_ratio",
                format!("ring ratio must be finite and > 1, got {ring_ratio}"),
            ));
        }
        // (4 r² + 12 (ρ r)²) / 16 = 1
        let inner = (T::lit(16.0) / (T::lit(4.0) + T::lit(12.0) * ring_ratio * ring_ratio)).sqrt();
        let outer = ring_ratio * inner;
        let mut points = Vec::with_capacity(16);
        for k in 0..4 {
            let phi = T::FRAC_PI_4() + T::lit(k as f64) * T::FRAC_PI_2();
            points.push(Complex::from_polar(inner, phi));
        }
        for k in 0..12 {
            let phi = T::PI() / T::lit(12.0) + T::lit(k as f64) * T::PI() / T::lit(6.0);
            points.push(Complex::from_polar(outer, phi));
        }
        Ok(Self::discrete(Label::Apsk16, points))
    }

    fn psk(label: Label, m: usize, offset: T) -> Self {
        let step = T::TAU() / T::lit(m as f64);
        let points = (0..m)
            .map(|k| Complex::from_polar(T::one(), offset + T::lit(k as f64) * step))
            .collect();
        Self::discrete(label, points)
    }

    fn discrete(label: Label, points: Vec<Complex<T>>) -> Self {
        let m = T::lit(points.len() as f64);
        let p = T::one() / m;
        Constellation {
            label,
            prior: vec![p; points.len()],
            log_prior: vec![-m.ln(); points.len()],
            points,
            rotation: Complex::new(T::one(), T::zero()),
        }
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn is_discrete(&self) -> bool {
        self.label.is_discrete()
    }

    /// Alphabet size M; zero for Gaussian inputs.
    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Complex<T>] {
        &self.points
    }

    pub fn prior(&self) -> &[T] {
        &self.prior
    }

    pub fn log_prior(&self) -> &[T] {
        &self.log_prior
    }

    /// `log2 M`, or `None` for Gaussian inputs.
    pub fn bits_per_symbol(&self) -> Option<T> {
        self.is_discrete()
            .then(|| T::lit(self.points.len() as f64).log2())
    }

    /// `H(x) = −Σ p·log2 p`, or `None` for Gaussian inputs.
    pub fn entropy_bits(&self) -> Option<T> {
        self.is_discrete().then(|| {
            -self
                .prior
                .iter()
                .zip(&self.log_prior)
                .fold(T::zero(), |acc, (&p, &lp)| acc + p * lp)
                / T::LN_2()
        })
    }

    /// `Σ prior·|x|²`; exactly one for Gaussian inputs.
    pub fn average_energy(&self) -> T {
        if !self.is_discrete() {
            return T::one();
        }
        self.points
            .iter()
            .zip(&self.prior)
            .fold(T::zero(), |acc, (x, &p)| acc + p * x.norm_sqr())
    }

    /// Largest n such that rotating by 2π/n maps the point set onto itself.
    /// `None` for Gaussian inputs (invariant under every rotation).
    pub fn rotational_symmetry(&self) -> Option<usize> {
        if !self.is_discrete() {
            return None;
        }
        let tol = T::lit(1e-9);
        let m = self.points.len();
        (1..=m).rev().find(|&n| {
            if !m.is_multiple_of(n) && n != 1 {
                // a symmetric finite set has orbits of size n, except the origin
                return false;
            }
            let r = Complex::from_polar(T::one(), T::TAU() / T::lit(n as f64));
            self.points.iter().all(|&p| {
                let q = p * r;
                self.points.iter().any(|&s| (s - q).norm() < tol)
            })
        })
    }

    /// Alphabet multiplied by `exp(jφ)`.
    pub fn rotated(&self, phase: T) -> Self {
        let r = Complex::from_polar(T::one(), phase);
        if !self.is_discrete() {
            let mut out = self.clone();
            out.rotation *= r;
            return out;
        }
        let mut points: Vec<Complex<T>> = self.points.iter().map(|&p| p * r).collect();
        points.sort_by_key(canonical_key);
        Self::discrete(self.label, points)
    }

    /// Draws a symbol: `(Some(index), point)` for discrete alphabets, `(None, sample)` with
    /// `E|x|² = 1` for Gaussian inputs.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (Option<usize>, Complex<T>) {
        if self.is_discrete() {
            let k = rng.random_range(0..self.points.len());
            (Some(k), self.points[k])
        } else {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let s = std::f64::consts::FRAC_1_SQRT_2;
            (
                None,
                Complex::new(T::lit(re * s), T::lit(im * s)) * self.rotation,
            )
        }
    }
}

fn canonical_key<T: Real>(p: &Complex<T>) -> (i64, i64) {
    let quantum = 1e-9;
    let radius = (p.norm().as_f64() / quantum).round() as i64;
    let tau = std::f64::consts::TAU;
    let mut angle = p.arg().as_f64();
    if angle < 0.0 {
        angle += tau;
    }
    if angle >= tau - quantum {
        angle = 0.0;
    }
    (radius, (angle / quantum).round() as i64)
}
