#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mudrate::estimator::DEFAULT_SAMPLES;
use mudrate::gaussian::{estimate_gaussian_mud, gaussian_curve};
use mudrate::harness::{with_workers, write_cutoff_csv, write_gaussian_csv, write_phase_csv};
use mudrate::plot::{emit_plot_script, Figure};
use mudrate::real::db_to_linear;
use mudrate::strategy2::{optimize_phase, DEFAULT_PHASES};
use mudrate::theory::DEFAULT_CUTOFF_TOL_BITS;
use mudrate::{
    derive_seed, find_cutoff_snr, run_sweep, sample_channel, CodeRate, Error, Result, Scenario64,
    Strategy, SweepConfig,
};

#[derive(Parser)]
#[command(
    name = "mudrate",
    version,
    about = "Information rates of a reference user under co-channel interference"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rate curves over an SNR grid, one CSV row per point.
    Sweep(SweepArgs),
    /// SNR at which user 2's rate becomes decodable by the joint receiver.
    Cutoff(CutoffArgs),
    /// Closed-form Gaussian-input bound, optionally with Monte-Carlo checks.
    Gaussian(GaussianArgs),
    /// Joint rate of users 1 and 2 over a grid of user-2 phase offsets.
    Phases(PhasesArgs),
    /// Print the resolved scenario file, optionally with raw channel draws.
    DumpScenario(DumpArgs),
    /// Write a matplotlib script for a CSV produced by this tool.
    Plot(PlotArgs),
}

#[derive(Args)]
struct ScenarioArgs {
    /// Built-in interference pattern.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=3), conflicts_with = "scenario")]
    case: Option<u32>,
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Time fraction of cooperative service.
    #[arg(long)]
    alpha: Option<f64>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<Scenario64> {
        let s = match (&self.scenario, self.case) {
            (Some(p), _) => Scenario64::load(p)?,
            (None, c) => Scenario64::builtin_case(c.unwrap_or(1))?,
        };
        match self.alpha {
            Some(a) => s.with_alpha(a),
            None => Ok(s),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Monte-Carlo samples per estimate.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    /// Master seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
    snr_min: f64,
    #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
    snr_max: f64,
    #[arg(long, default_value_t = 1.0)]
    snr_step: f64,
}

impl GridArgs {
    fn grid(&self) -> Result<Vec<f64>> {
        if !(self.snr_step > 0.0) || !self.snr_step.is_finite() {
            return Err(Error::config("snr_step", "step must be positive"));
        }
        if !(self.snr_min <= self.snr_max) {
            return Err(Error::config("snr_min", "snr_min must not exceed snr_max"));
        }
        let n = ((self.snr_max - self.snr_min) / self.snr_step + 1e-9).floor() as usize + 1;
        Ok((0..n)
            .map(|i| {
                let v = self.snr_min + i as f64 * self.snr_step;
                (v * 1e9).round() / 1e9
            })
            .collect())
    }
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated subset of sud, mud2, s2, gauss.
    #[arg(long, value_delimiter = ',', default_value = "sud,mud2,s2")]
    strategies: Vec<Strategy>,
    /// Comma-separated code rates of user 2 (`n/d` or decimal).
    #[arg(long, value_delimiter = ',', default_value = "3/5,5/6,8/9")]
    r2: Vec<CodeRate>,
    /// Phase grid size for the cooperative strategy.
    #[arg(long, default_value_t = DEFAULT_PHASES)]
    phases: usize,
}

#[derive(Args)]
struct CutoffArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    run: RunArgs,
    /// Code rate of user 2; R2 = r·log2 M.
    #[arg(long, conflicts_with = "r2_bits")]
    r2: Option<CodeRate>,
    /// R2 in bits/symbol, overriding the code rate.
    #[arg(long)]
    r2_bits: Option<f64>,
    /// Tolerance on the bisection residual, bits.
    #[arg(long, default_value_t = DEFAULT_CUTOFF_TOL_BITS)]
    tol: f64,
}

#[derive(Args)]
struct GaussianArgs {
    #[arg(long, default_value_t = 0.79)]
    gamma: f64,
    #[arg(long, default_value_t = 0.5)]
    r2_bits: f64,
    #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
    snr_min: f64,
    #[arg(long, default_value_t = 15.0, allow_negative_numbers = true)]
    snr_max: f64,
    #[arg(long, default_value_t = 1.0)]
    snr_step: f64,
    /// Also run the Monte-Carlo estimator with this many samples per point.
    #[arg(long)]
    mc_samples: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PhasesArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    run: RunArgs,
    /// P/N in dB.
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    snr: f64,
    #[arg(long, default_value_t = DEFAULT_PHASES)]
    phases: usize,
}

#[derive(Args)]
struct DumpArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Write this many channel draws as CSV to --draws-out.
    #[arg(long, requires = "draws_out")]
    draws: Option<usize>,
    #[arg(long)]
    draws_out: Option<PathBuf>,
    /// P/N in dB for the draws.
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    snr: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// CSV written by `sweep` (fig5-fig7) or `gaussian` (fig4).
    #[arg(long)]
    csv: PathBuf,
    #[arg(long)]
    figure: Figure,
    /// Script path; the figure is saved next to it as PNG.
    #[arg(long)]
    out: PathBuf,
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write + Send>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout()),
    })
}

fn sweep(a: SweepArgs) -> Result<()> {
    let mut cfg = SweepConfig::new(a.scenario.load()?);
    cfg.snr_grid_db = a.grid.grid()?;
    cfg.strategies = a.strategies;
    cfg.code_rates = a.r2;
    cfg.n_samples = a.run.samples;
    cfg.master_seed = a.run.seed;
    cfg.phase_count = a.phases;
    cfg.workers = a.run.workers;
    let mut out = open_out(a.run.out.as_deref())?;
    run_sweep(&cfg, &mut out)?;
    out.flush()?;
    Ok(())
}

fn cutoff(a: CutoffArgs) -> Result<()> {
    let s = a.scenario.load()?.resolve_phases(a.run.seed);
    let r2 = match (a.r2_bits, a.r2) {
        (Some(b), _) => b,
        (None, Some(r)) => s.rate_bits_for(r)?,
        (None, None) => s.interferer_rate_bits()?,
    };
    let grid = a.grid.grid()?;
    let bracket = (grid[0], *grid.last().expect("non-empty grid"));
    let (samples, seed) = (a.run.samples, a.run.seed);
    let c = with_workers(a.run.workers, || {
        find_cutoff_snr(&s, r2, bracket, samples, seed, a.tol)
    })??;
    if c.below_bracket {
        eprintln!(
            "no finite cutoff above bracket floor ({} dB): R2 = {r2} bits is decodable there",
            bracket.0
        );
    } else {
        eprintln!(
            "SNR_c = {:.4} dB for R2 = {r2} bits (residual {:.2e} bits, {} iterations)",
            c.snr_c_db, c.residual_bits, c.iterations
        );
    }
    let mut out = open_out(a.run.out.as_deref())?;
    write_cutoff_csv(r2, &c, &mut out)?;
    out.flush()?;
    Ok(())
}

fn gaussian(a: GaussianArgs) -> Result<()> {
    let grid = GridArgs {
        snr_min: a.snr_min,
        snr_max: a.snr_max,
        snr_step: a.snr_step,
    }
    .grid()?;
    let curve = gaussian_curve(a.gamma, a.r2_bits, &grid)?;
    let mc = match a.mc_samples {
        Some(n) => Some(
            grid.iter()
                .map(|&db| {
                    estimate_gaussian_mud(
                        a.gamma,
                        db_to_linear(db),
                        n,
                        derive_seed(a.seed, &[db.to_bits()]),
                    )
                })
                .collect::<Result<Vec<_>>>()?,
        ),
        None => None,
    };
    for (name, b) in [
        ("lower", curve.lower_boundary_db),
        ("upper", curve.upper_boundary_db),
    ] {
        if let Some(db) = b {
            eprintln!(
                "{name} regime boundary: {db:.4} dB (s = {:.4})",
                db_to_linear(db)
            );
        }
    }
    let mut out = open_out(a.out.as_deref())?;
    write_gaussian_csv(&curve, mc.as_deref(), &mut out)?;
    out.flush()?;
    Ok(())
}

fn phases(a: PhasesArgs) -> Result<()> {
    let s = a.scenario.load()?.resolve_phases(a.run.seed);
    let n_thermal = s.power() / db_to_linear(a.snr);
    let (count, samples, seed) = (a.phases, a.run.samples, a.run.seed);
    let res = with_workers(a.run.workers, || {
        optimize_phase(&s, n_thermal, count, samples, seed)
    })??;
    eprintln!(
        "best phase {:.6} rad: I(x1,x2;y) = {:.6} ± {:.1e} bits",
        res.best_phase_rad, res.best_sum_rate.value, res.best_sum_rate.std_err
    );
    let mut out = open_out(a.run.out.as_deref())?;
    write_phase_csv(&res, &mut out)?;
    out.flush()?;
    Ok(())
}

fn dump_scenario(a: DumpArgs) -> Result<()> {
    let s = a.scenario.load()?.resolve_phases(a.seed);
    let mut out = open_out(a.out.as_deref())?;
    out.write_all(s.to_file().to_toml().as_bytes())?;
    out.flush()?;
    if let (Some(n), Some(path)) = (a.draws, a.draws_out.as_deref()) {
        let mut w = BufWriter::new(File::create(path)?);
        let mut header = vec!["i".to_string(), "y_re".into(), "y_im".into()];
        for k in 1..=s.k() {
            header.extend([format!("x{k}_idx"), format!("x{k}_re"), format!("x{k}_im")]);
        }
        writeln!(w, "{}", header.join(","))?;
        for (i, d) in sample_channel(&s, s.power() / db_to_linear(a.snr), n, a.seed)?.enumerate() {
            write!(w, "{i},{:e},{:e}", d.y.re, d.y.im)?;
            for (idx, x) in d.x_indices.iter().zip(&d.symbols) {
                let idx = idx.map(|v| v.to_string()).unwrap_or_default();
                write!(w, ",{idx},{:e},{:e}", x.re, x.im)?;
            }
            writeln!(w)?;
        }
        w.flush()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep(a) => sweep(a),
        Command::Cutoff(a) => cutoff(a),
        Command::Gaussian(a) => gaussian(a),
        Command::Phases(a) => phases(a),
        Command::DumpScenario(a) => dump_scenario(a),
        Command::Plot(a) => emit_plot_script(&a.csv, a.figure, &a.out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
