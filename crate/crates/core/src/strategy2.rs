//! Cooperative time-division service: for a fraction α of the time both beams carry
//! independent streams for user 1, with user 2's signal phase-shifted to maximise the
//! joint rate `I(x1, x2; y)`.

use num_complex::Complex;

use crate::channel::{monte_carlo, ChannelDraw, ChannelSampler};
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::estimator::{AuxKind, AuxModel, MiEstimate, MIN_SAMPLES};
use crate::real::{log_sum_exp, Real};
use crate::scenario::Scenario;

pub const DEFAULT_PHASES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint<T> {
    pub phase_rad: T,
    pub sum_rate: MiEstimate<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSearchResult<T> {
    pub best_phase_rad: T,
    pub best_sum_rate: MiEstimate<T>,
    /// Length of the searched interval `[0, period)`.
    pub period_rad: T,
    pub grid: Vec<PhasePoint<T>>,
}

/// Smallest phase period of `I(x1, x2; y)` under rotation of user 2:
/// `2π / lcm(n1, n2)` for discrete alphabets with n-fold symmetry, `2π` for two
/// Gaussian inputs.
pub fn symmetry_period<T: Real>(c1: &Constellation<T>, c2: &Constellation<T>) -> Result<T> {
    match (c1.rotational_symmetry(), c2.rotational_symmetry()) {
        (Some(a), Some(b)) => Ok(T::TAU() / T::lit(lcm(a, b) as f64)),
        (None, None) => Ok(T::TAU()),
        _ => Err(Error::config(
            "modulations",
            "phase search needs users 1 and 2 both discrete or both gaussian",
        )),
    }
}

fn lcm(a: usize, b: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

/// `Î(x1, x2; y)` with user 2 rotated by each phase, all on one shared draw stream.
pub fn joint_rate_at_phases<T: Real>(
    s: &Scenario<T>,
    n_thermal: T,
    phases: &[T],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<MiEstimate<T>>> {
    if n_samples < MIN_SAMPLES {
        return Err(Error::config(
            "n_samples",
            format!("need at least {MIN_SAMPLES} samples, got {n_samples}"),
        ));
    }
    symmetry_period(&s.constellations()[0], &s.constellations()[1])?;
    let sampler = ChannelSampler::new(s, n_thermal)?;
    let base_aux = AuxModel::for_scenario(AuxKind::Mud2, s, n_thermal)?;
    let (a1, a2) = (sampler.amplitudes()[0], sampler.amplitudes()[1]);
    let user2 = &s.constellations()[1];
    let laws: Vec<Constellation<T>> = phases.iter().map(|&p| user2.rotated(p)).collect();
    let rotors: Vec<Complex<T>> = phases
        .iter()
        .map(|&p| Complex::from_polar(T::one(), p))
        .collect();
    let auxes: Vec<AuxModel<T>> = laws
        .iter()
        .map(|l| base_aux.clone().with_law(1, l.clone()))
        .collect();

    let book = |l: &Constellation<T>| -> Option<(Vec<Complex<T>>, Vec<T>)> {
        let (c1, a1) = (&s.constellations()[0], sampler.amplitudes()[0]);
        if !c1.is_discrete() {
            return None;
        }
        let mut pts = Vec::with_capacity(c1.order() * l.order());
        let mut lp = Vec::with_capacity(pts.capacity());
        for (p, &lpa) in c1.points().iter().zip(c1.log_prior()) {
            for (q, &lpb) in l.points().iter().zip(l.log_prior()) {
                pts.push(a1 * p + a2 * q);
                lp.push(lpa + lpb);
            }
        }
        Some((pts, lp))
    };
    let books: Option<Vec<_>> = laws.iter().map(book).collect();
    let inv = T::one() / base_aux.noise_var();

    let eval = |d: &ChannelDraw<T>, buf: &mut Vec<T>, out: &mut [T]| {
        let without2 = d.y - a2 * d.symbols[1];
        for (k, aux) in auxes.iter().enumerate() {
            let x2 = match d.x_indices[1] {
                Some(i) => laws[k].points()[i],
                None => d.symbols[1] * rotors[k],
            };
            let y = without2 + a2 * x2;
            out[k] = match &books {
                // the Gaussian normalisation cancels between numerator and denominator
                Some(books) => {
                    let (pts, lp) = &books[k];
                    buf.clear();
                    buf.extend(
                        pts.iter()
                            .zip(lp)
                            .map(|(c, &l)| l - (y - c).norm_sqr() * inv),
                    );
                    -(without2 - a1 * d.symbols[0]).norm_sqr() * inv - log_sum_exp(buf)
                }
                None => {
                    aux.log_q(y, &[Some(d.symbols[0]), Some(x2)], buf)
                        - aux.log_q(y, &[None, None], buf)
                }
            };
        }
    };
    let m = monte_carlo(&sampler, n_samples, seed, phases.len(), eval);
    let cap = s.constellations()[0]
        .entropy_bits()
        .zip(user2.entropy_bits())
        .map(|(a, b)| a + b);
    Ok((0..phases.len())
        .map(|k| MiEstimate::from_nats(m.mean(k), m.std_err(k), n_samples, seed).capped(cap))
        .collect())
}

/// Uniform phase grid over one symmetry period; argmax of the joint rate.
pub fn optimize_phase<T: Real>(
    s: &Scenario<T>,
    n_thermal: T,
    phase_count: usize,
    n_samples: usize,
    seed: u64,
) -> Result<PhaseSearchResult<T>> {
    if phase_count < 4 {
        return Err(Error::config(
            "phases",
            format!("need at least 4 phases, got {phase_count}"),
        ));
    }
    if s.k() < 2 {
        return Err(Error::config("k", "phase search needs two users"));
    }
    let period = symmetry_period(&s.constellations()[0], &s.constellations()[1])?;
    let phases: Vec<T> = (0..phase_count)
        .map(|k| period * T::lit(k as f64) / T::lit(phase_count as f64))
        .collect();
    let rates = joint_rate_at_phases(s, n_thermal, &phases, n_samples, seed)?;
    let grid: Vec<PhasePoint<T>> = phases
        .iter()
        .zip(rates)
        .map(|(&phase_rad, sum_rate)| PhasePoint {
            phase_rad,
            sum_rate,
        })
        .collect();
    let best = grid
        .iter()
        .copied()
        .reduce(|a, b| {
            if b.sum_rate.value > a.sum_rate.value {
                b
            } else {
                a
            }
        })
        .expect("grid is non-empty");
    Ok(PhaseSearchResult {
        best_phase_rad: best.phase_rad,
        best_sum_rate: best.sum_rate,
        period_rad: period,
        grid,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario2Rate<T> {
    /// `α · max_φ Î_J(φ)`
    pub rate: T,
    pub std_err: T,
    pub search: PhaseSearchResult<T>,
}

pub fn scenario2_rate_with_phases<T: Real>(
    s: &Scenario<T>,
    n_thermal: T,
    phase_count: usize,
    n_samples: usize,
    seed: u64,
) -> Result<Scenario2Rate<T>> {
    let search = optimize_phase(s, n_thermal, phase_count, n_samples, seed)?;
    Ok(Scenario2Rate {
        rate: s.alpha() * search.best_sum_rate.value,
        std_err: s.alpha() * search.best_sum_rate.std_err,
        search,
    })
}

/// User 1's long-run rate with the default phase grid.
pub fn scenario2_rate<T: Real>(
    s: &Scenario<T>,
    n_thermal: T,
    n_samples: usize,
    seed: u64,
) -> Result<Scenario2Rate<T>> {
    scenario2_rate_with_phases(s, n_thermal, DEFAULT_PHASES, n_samples, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::Label;
    use crate::estimator::{combined_std_err, estimate_mud};
    use crate::real::db_to_linear;
    use std::f64::consts::{FRAC_PI_2, TAU};

    fn qq() -> Scenario<f64> {
        Scenario::two_user(0.0, 0.0, Label::Qpsk, Label::Qpsk).unwrap()
    }

    #[test]
    fn periods() {
        let q = Constellation::<f64>::new(Label::Qpsk);
        let p = Constellation::<f64>::new(Label::Psk8);
        let g = Constellation::<f64>::new(Label::Gaussian);
        assert!((symmetry_period(&q, &q).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((symmetry_period(&p, &q).unwrap() - TAU / 8.0).abs() < 1e-15);
        assert_eq!(symmetry_period(&g, &g).unwrap(), TAU);
        assert!(symmetry_period(&q, &g).is_err());
    }

    #[test]
    fn zero_phase_matches_joint_rate_of_the_quad() {
        let s = qq();
        let n = db_to_linear(-5.0);
        let r = joint_rate_at_phases(&s, n, &[0.0], 20_000, 4).unwrap();
        let q = estimate_mud(&s, n, 20_000, 4).unwrap().quad;
        assert!((r[0].raw - q.ij.raw).abs() < 1e-9);
    }

    #[test]
    fn symmetric_phases_agree_on_shared_draws() {
        let r = joint_rate_at_phases(&qq(), 0.1, &[0.0, FRAC_PI_2], 20_000, 8).unwrap();
        assert!((r[0].raw - r[1].raw).abs() < 1e-9);
    }

    #[test]
    fn best_phase_dominates_grid() {
        let res = optimize_phase(&qq(), 0.1, 16, 20_000, 3).unwrap();
        assert_eq!(res.grid.len(), 16);
        assert_eq!(res.grid[0].phase_rad, 0.0);
        assert!(res.grid.iter().all(|p| p.phase_rad < FRAC_PI_2));
        assert!(res
            .grid
            .iter()
            .all(|p| res.best_sum_rate.value >= p.sum_rate.value));
        assert!(res.best_sum_rate.value <= 4.0);
    }

    #[test]
    fn misaligned_phase_helps_equal_power_qpsk() {
        // at φ = 0 the superposition collapses onto a 9-point grid
        let res = optimize_phase(&qq(), 0.01, 16, 20_000, 3).unwrap();
        let at0 = res.grid[0].sum_rate;
        assert!(
            res.best_sum_rate.value
                > at0.value + 3.0 * combined_std_err(at0.std_err, res.best_sum_rate.std_err)
        );
        assert!(res.best_phase_rad > 0.0);
    }

    #[test]
    fn alpha_scaling() {
        let s = qq();
        let full =
            scenario2_rate_with_phases(&s.clone().with_alpha(1.0).unwrap(), 0.1, 8, 20_000, 1)
                .unwrap();
        let half =
            scenario2_rate_with_phases(&s.clone().with_alpha(0.5).unwrap(), 0.1, 8, 20_000, 1)
                .unwrap();
        let none =
            scenario2_rate_with_phases(&s.with_alpha(0.0).unwrap(), 0.1, 8, 20_000, 1).unwrap();
        assert_eq!(full.rate, full.search.best_sum_rate.value);
        assert_eq!(half.rate, 0.5 * full.rate);
        assert_eq!(none.rate, 0.0);
    }

    #[test]
    fn gaussian_grid_is_flat() {
        let s = Scenario::<f64>::two_user(0.0, 0.0, Label::Gaussian, Label::Gaussian).unwrap();
        let res = optimize_phase(&s, 0.5, 8, 50_000, 2).unwrap();
        let r0 = res.grid[0].sum_rate;
        for p in &res.grid {
            let slack = 3.0 * combined_std_err(r0.std_err, p.sum_rate.std_err);
            assert!((p.sum_rate.value - r0.value).abs() <= slack, "{p:?}");
        }
    }

    #[test]
    fn rejects_small_grids_and_mixed_inputs() {
        assert!(optimize_phase(&qq(), 0.1, 3, 20_000, 1).is_err());
        let mixed = Scenario::<f64>::two_user(0.0, 0.0, Label::Qpsk, Label::Gaussian).unwrap();
        assert!(optimize_phase(&mixed, 0.1, 8, 20_000, 1).is_err());
    }
}
