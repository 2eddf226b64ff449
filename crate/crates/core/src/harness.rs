//! SNR sweeps and CSV output.
//!
//! Sweep CSV columns, in order (groups present only for the selected strategies):
//!
//! ```text
//! snr_db
//! sud, sud_se                                  SUD
//! mud_<n>_<d>, mud_<n>_<d>_se    per code rate MUD×2, max{I_S, I_A}
//! s2, s2_se, s2_phase                          scenario 2 (α·max_φ I_J), best phase in rad
//! gauss_<n>_<d>                  per code rate Gaussian-input closed form
//! regime_<n>_<d>                 per code rate I_A branch (full, sumrate, zero) of the MUD×2 column
//! ```
//!
//! Floats are printed with six significant digits. Sub-seeds come from
//! `derive_seed(master, [snr_db bits, strategy tag])` with tags SUD = 1, MUD×2 = 2,
//! S2 = 3; the phase grid of one SNR point shares one seed.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Mutex;

use rayon::prelude::*;

use crate::channel::{derive_seed, residual_interference_power};
use crate::error::{Error, Result};
use crate::estimator::{estimate_mud, estimate_sud, MudEstimate, DEFAULT_SAMPLES};
use crate::gaussian::{gaussian_rate, GaussianCurve, GaussianRegime};
use crate::real::db_to_linear;
use crate::scenario::{CodeRate, Scenario};
use crate::strategy2::{scenario2_rate_with_phases, PhaseSearchResult, DEFAULT_PHASES};
use crate::theory::{achievable_rate, CutoffResult, Regime};

const TAG_SUD: u64 = 1;
const TAG_MUD2: u64 = 2;
const TAG_S2: u64 = 3;
const TAG_PHASES: u64 = 0x5048_4153;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    Sud,
    Mud2,
    S2,
    Gauss,
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sud" => Ok(Strategy::Sud),
            "mud2" | "mud" => Ok(Strategy::Mud2),
            "s2" => Ok(Strategy::S2),
            "gauss" | "gaussian" => Ok(Strategy::Gauss),
            other => Err(Error::config(
                "strategies",
                format!("unknown strategy `{other}`"),
            )),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Sud => "sud",
            Strategy::Mud2 => "mud2",
            Strategy::S2 => "s2",
            Strategy::Gauss => "gauss",
        })
    }
}

/// `-10, -9, …, 20` dB.
pub fn default_snr_grid() -> Vec<f64> {
    (-10..=20).map(f64::from).collect()
}

pub fn default_code_rates() -> Vec<CodeRate> {
    [(3, 5), (5, 6), (8, 9)]
        .iter()
        .map(|&(n, d)| CodeRate::new(n, d).expect("valid rate"))
        .collect()
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub scenario: Scenario<f64>,
    pub snr_grid_db: Vec<f64>,
    pub strategies: Vec<Strategy>,
    pub code_rates: Vec<CodeRate>,
    pub n_samples: usize,
    pub master_seed: u64,
    pub phase_count: usize,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl SweepConfig {
    pub fn new(scenario: Scenario<f64>) -> Self {
        SweepConfig {
            scenario,
            snr_grid_db: default_snr_grid(),
            strategies: vec![Strategy::Sud, Strategy::Mud2, Strategy::S2],
            code_rates: default_code_rates(),
            n_samples: DEFAULT_SAMPLES,
            master_seed: 1,
            phase_count: DEFAULT_PHASES,
            workers: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.snr_grid_db.is_empty() {
            return Err(Error::config("snr_grid_db", "grid is empty"));
        }
        if self.snr_grid_db.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::config(
                "snr_grid_db",
                "grid must be strictly ascending",
            ));
        }
        if self.snr_grid_db.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("snr_grid_db", "grid values must be finite"));
        }
        if self.strategies.is_empty() {
            return Err(Error::config("strategies", "select at least one strategy"));
        }
        let needs_rates = self.has(Strategy::Mud2) || self.has(Strategy::Gauss);
        if needs_rates && self.code_rates.is_empty() {
            return Err(Error::config(
                "r2",
                "MUD2 and GAUSS need at least one code rate",
            ));
        }
        if self.scenario.k() < 2 && self.strategies.iter().any(|&s| s != Strategy::Sud) {
            return Err(Error::config("k", "only SUD is defined for a single user"));
        }
        if self.workers == Some(0) {
            return Err(Error::config("workers", "need at least one worker"));
        }
        for &r in &self.code_rates {
            if needs_rates {
                self.scenario.rate_bits_for(r)?;
            }
        }
        Ok(())
    }

    fn has(&self, s: Strategy) -> bool {
        self.strategies.contains(&s)
    }

    fn normalized(&self) -> SweepConfig {
        let mut c = self.clone();
        c.strategies.sort();
        c.strategies.dedup();
        c.scenario = c
            .scenario
            .resolve_phases(derive_seed(self.master_seed, &[TAG_PHASES]));
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateValue {
    pub rate: f64,
    pub std_err: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MudPoint {
    pub code_rate: CodeRate,
    pub r2_bits: f64,
    pub rate: f64,
    pub std_err: f64,
    pub regime: Regime,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct S2Point {
    pub rate: f64,
    pub std_err: f64,
    pub best_phase_rad: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussPoint {
    pub code_rate: CodeRate,
    pub r1_bound: f64,
    pub regime: GaussianRegime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateCurvePoint {
    pub snr_db: f64,
    pub sud: Option<RateValue>,
    pub mud: Vec<MudPoint>,
    pub s2: Option<S2Point>,
    pub gauss: Vec<GaussPoint>,
}

impl RateCurvePoint {
    /// Largest MUD×2 rate over the configured code rates.
    pub fn best_mud(&self) -> Option<f64> {
        self.mud.iter().map(|m| m.rate).reduce(f64::max)
    }

    pub fn mud_for(&self, r: CodeRate) -> Option<&MudPoint> {
        self.mud.iter().find(|m| m.code_rate == r)
    }
}

/// Header matching [`csv_row`] for this configuration.
pub fn csv_header(cfg: &SweepConfig) -> Vec<String> {
    let cfg = cfg.normalized();
    let mut h = vec!["snr_db".to_string()];
    if cfg.has(Strategy::Sud) {
        h.extend(["sud".into(), "sud_se".into()]);
    }
    if cfg.has(Strategy::Mud2) {
        for r in &cfg.code_rates {
            h.push(format!("mud_{}", r.tag()));
            h.push(format!("mud_{}_se", r.tag()));
        }
    }
    if cfg.has(Strategy::S2) {
        h.extend(["s2".into(), "s2_se".into(), "s2_phase".into()]);
    }
    if cfg.has(Strategy::Gauss) {
        h.extend(cfg.code_rates.iter().map(|r| format!("gauss_{}", r.tag())));
    }
    if cfg.has(Strategy::Mud2) {
        h.extend(cfg.code_rates.iter().map(|r| format!("regime_{}", r.tag())));
    }
    h
}

pub fn csv_row(p: &RateCurvePoint) -> Vec<String> {
    let mut row = vec![format_g6(p.snr_db)];
    if let Some(s) = p.sud {
        row.extend([format_g6(s.rate), format_g6(s.std_err)]);
    }
    for m in &p.mud {
        row.extend([format_g6(m.rate), format_g6(m.std_err)]);
    }
    if let Some(s) = p.s2 {
        row.extend([
            format_g6(s.rate),
            format_g6(s.std_err),
            format_g6(s.best_phase_rad),
        ]);
    }
    row.extend(p.gauss.iter().map(|g| format_g6(g.r1_bound)));
    row.extend(p.mud.iter().map(|m| m.regime.to_string()));
    row
}

/// `%g`-style formatting with six significant digits.
pub fn format_g6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-4..6).contains(&exp) {
        let mant = trim_zeros(mant);
        return format!("{mant}e{exp}");
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn compute_point(cfg: &SweepConfig, snr_db: f64) -> Result<RateCurvePoint> {
    let s = &cfg.scenario;
    let n_thermal = s.power() / db_to_linear(snr_db);
    let seed = |tag| derive_seed(cfg.master_seed, &[snr_db.to_bits(), tag]);

    let sud = if cfg.has(Strategy::Sud) {
        let e = estimate_sud(s, n_thermal, cfg.n_samples, seed(TAG_SUD))?;
        Some(RateValue {
            rate: e.value,
            std_err: e.std_err,
        })
    } else {
        None
    };

    let mut mud = Vec::new();
    if cfg.has(Strategy::Mud2) {
        let MudEstimate { quad, i_s } = estimate_mud(s, n_thermal, cfg.n_samples, seed(TAG_MUD2))?;
        for &r in &cfg.code_rates {
            let r2_bits = s.rate_bits_for(r)?;
            let a = achievable_rate(&quad, &i_s, r2_bits)?;
            mud.push(MudPoint {
                code_rate: r,
                r2_bits,
                rate: a.rate,
                std_err: a.std_err,
                regime: a.lemma1.regime,
            });
        }
    }

    let s2 = if cfg.has(Strategy::S2) {
        let r =
            scenario2_rate_with_phases(s, n_thermal, cfg.phase_count, cfg.n_samples, seed(TAG_S2))?;
        Some(S2Point {
            rate: r.rate,
            std_err: r.std_err,
            best_phase_rad: r.search.best_phase_rad,
        })
    } else {
        None
    };

    let mut gauss = Vec::new();
    if cfg.has(Strategy::Gauss) {
        let snr_eff = s.power() / (n_thermal + residual_interference_power(s, 3));
        for &r in &cfg.code_rates {
            let g = gaussian_rate(snr_eff, s.gains()[1].norm(), s.rate_bits_for(r)?);
            gauss.push(GaussPoint {
                code_rate: r,
                r1_bound: g.r1_bound,
                regime: g.regime,
            });
        }
    }

    Ok(RateCurvePoint {
        snr_db,
        sud,
        mud,
        s2,
        gauss,
    })
}

struct Collector<W> {
    next: usize,
    pending: BTreeMap<usize, RateCurvePoint>,
    done: Vec<RateCurvePoint>,
    out: W,
}

impl<W: Write> Collector<W> {
    fn accept(&mut self, idx: usize, p: RateCurvePoint) -> Result<()> {
        self.pending.insert(idx, p);
        while let Some(p) = self.pending.remove(&self.next) {
            writeln!(self.out, "{}", csv_row(&p).join(","))?;
            self.out.flush()?;
            self.done.push(p);
            self.next += 1;
        }
        Ok(())
    }
}

/// Runs the sweep, streaming CSV rows to `out` in grid order as they complete.
pub fn run_sweep<W: Write + Send>(cfg: &SweepConfig, mut out: W) -> Result<Vec<RateCurvePoint>> {
    cfg.validate()?;
    let cfg = cfg.normalized();
    writeln!(out, "{}", csv_header(&cfg).join(","))?;
    out.flush()?;
    let collector = Mutex::new(Collector {
        next: 0,
        pending: BTreeMap::new(),
        done: Vec::with_capacity(cfg.snr_grid_db.len()),
        out,
    });
    let work = || {
        cfg.snr_grid_db
            .par_iter()
            .enumerate()
            .try_for_each(|(i, &db)| {
                let p = compute_point(&cfg, db)?;
                collector.lock().expect("collector poisoned").accept(i, p)
            })
    };
    with_workers(cfg.workers, work)??;
    Ok(collector.into_inner().expect("collector poisoned").done)
}

/// Runs `f` on a dedicated pool of `workers` threads, or on the global pool for `None`.
pub fn with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match workers {
        Some(0) => Err(Error::config("workers", "need at least one worker")),
        Some(w) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::config("workers", e.to_string()))?
            .install(f)),
        None => Ok(f()),
    }
}

/// Gaussian-example CSV: `snr_db, r1_bound, regime, c_full, c_sumrate, c_interference`,
/// followed by `mc_bound, mc_se` when Monte-Carlo estimates are supplied.
pub fn write_gaussian_csv<W: Write>(
    curve: &GaussianCurve<f64>,
    mc: Option<&[MudEstimate<f64>]>,
    mut out: W,
) -> Result<()> {
    let mut header = "snr_db,r1_bound,regime,c_full,c_sumrate,c_interference".to_string();
    if mc.is_some() {
        header.push_str(",mc_bound,mc_se");
    }
    writeln!(out, "{header}")?;
    for (i, (db, r)) in curve.points.iter().enumerate() {
        let mut row = vec![
            format_g6(*db),
            format_g6(r.r1_bound),
            r.regime.to_string(),
            format_g6(r.branches.full),
            format_g6(r.branches.sum_rate),
            format_g6(r.branches.interference),
        ];
        if let Some(mc) = mc {
            let e = &mc[i];
            let a = achievable_rate(&e.quad, &e.i_s, curve.r2)?;
            row.extend([format_g6(a.rate), format_g6(a.std_err)]);
        }
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_phase_csv<W: Write>(res: &PhaseSearchResult<f64>, mut out: W) -> Result<()> {
    writeln!(out, "phase_rad,sum_rate,sum_rate_se,best")?;
    for p in &res.grid {
        writeln!(
            out,
            "{},{},{},{}",
            format_g6(p.phase_rad),
            format_g6(p.sum_rate.value),
            format_g6(p.sum_rate.std_err),
            u8::from(p.phase_rad == res.best_phase_rad)
        )?;
    }
    Ok(())
}

pub fn write_cutoff_csv<W: Write>(r2_bits: f64, c: &CutoffResult<f64>, mut out: W) -> Result<()> {
    writeln!(
        out,
        "r2_bits,snr_c_db,residual_bits,std_err,iterations,below_bracket"
    )?;
    writeln!(
        out,
        "{},{},{},{},{},{}",
        format_g6(r2_bits),
        format_g6(c.snr_c_db),
        format_g6(c.residual_bits),
        format_g6(c.std_err),
        c.iterations,
        c.below_bracket
    )?;
    Ok(())
}
