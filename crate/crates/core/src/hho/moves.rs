//! Position-update rules of the Harris Hawks optimizer.
//!
//! All functions here are pure: random coefficients are passed in explicitly
//! and every returned position is already clamped into the search box.

use rand::Rng;

use super::levy::levy_flight;
use super::{Hawk, Score, SearchSpace};
use crate::error::{Error, Result};

/// Prey escaping energy `2·e0·(1 − t/T)`.
pub fn escaping_energy(e0: f64, t: usize, max_t: usize) -> Result<f64> {
    if max_t == 0 {
        return Err(Error::invalid("max_t must be at least 1"));
    }
    if t > max_t {
        return Err(Error::invalid(format!("iteration {t} exceeds max_t {max_t}")));
    }
    Ok(2.0 * e0 * (1.0 - t as f64 / max_t as f64))
}

/// Which update rule a hawk applies in one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    /// Perch relative to a randomly chosen family member.
    RandomPerch,
    /// Perch relative to the prey and the family mean.
    CollectivePerch,
    SoftBesiege,
    HardBesiege,
    SoftDive,
    HardDive,
}

impl Phase {
    pub const ALL: [Phase; 6] = [
        Phase::RandomPerch,
        Phase::CollectivePerch,
        Phase::SoftBesiege,
        Phase::HardBesiege,
        Phase::SoftDive,
        Phase::HardDive,
    ];

    pub fn is_exploration(self) -> bool {
        matches!(self, Phase::RandomPerch | Phase::CollectivePerch)
    }
}

/// Selects the update rule from the escaping energy `e`, the perch draw `q`
/// (used only when exploring) and the escape draw `r` (used only when exploiting).
pub fn select_phase(e: f64, q: f64, r: f64) -> Phase {
    let a = e.abs();
    if a >= 1.0 {
        if q >= 0.5 {
            Phase::RandomPerch
        } else {
            Phase::CollectivePerch
        }
    } else {
        match (r >= 0.5, a >= 0.5) {
            (true, true) => Phase::SoftBesiege,
            (true, false) => Phase::HardBesiege,
            (false, true) => Phase::SoftDive,
            (false, false) => Phase::HardDive,
        }
    }
}

fn check_dims(space: &SearchSpace, vs: &[&[f64]]) -> Result<()> {
    let d = space.dim();
    match vs.iter().find(|v| v.len() != d) {
        Some(v) => Err(Error::invalid(format!(
            "vector of length {} does not match search dimension {d}",
            v.len()
        ))),
        None => Ok(()),
    }
}

/// Coefficients of the exploration move.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExploreDraws {
    pub q: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub r4: f64,
}

/// Exploration move.
///
/// With `q ≥ 0.5` the hawk perches relative to a random family member,
/// `X_r − r1·|X_r − 2·r2·X|`; otherwise it perches relative to the prey and the
/// family mean, `(X_p − X_a) − r3·(LB + r4·(UB − LB))`.
pub fn explore_step(
    hawk: &[f64],
    random_hawk: &[f64],
    avg_position: &[f64],
    prey: &[f64],
    space: &SearchSpace,
    draws: ExploreDraws,
) -> Result<Vec<f64>> {
    check_dims(space, &[hawk, random_hawk, avg_position, prey])?;
    let ExploreDraws { q, r1, r2, r3, r4 } = draws;
    let mut out: Vec<f64> = if q >= 0.5 {
        random_hawk
            .iter()
            .zip(hawk)
            .map(|(&xr, &x)| xr - r1 * (xr - 2.0 * r2 * x).abs())
            .collect()
    } else {
        (0..space.dim())
            .map(|k| {
                let (lb, ub) = (space.lower()[k], space.upper()[k]);
                (prey[k] - avg_position[k]) - r3 * (lb + r4 * (ub - lb))
            })
            .collect()
    };
    space.clamp(&mut out);
    Ok(out)
}

/// Componentwise mean of the family positions.
pub fn average_position(population: &[Hawk]) -> Result<Vec<f64>> {
    let first = population
        .first()
        .ok_or_else(|| Error::invalid("average of an empty population"))?;
    let mut acc = vec![0.0; first.position.len()];
    for h in population {
        if h.position.len() != acc.len() {
            return Err(Error::invalid("hawks of differing dimension"));
        }
        for (a, x) in acc.iter_mut().zip(&h.position) {
            *a += x;
        }
    }
    let n = population.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(acc)
}

/// Soft besiege: `ΔX − E·|J·X_p − X|` with `ΔX = X_p − X`.
pub fn soft_besiege(hawk: &[f64], prey: &[f64], e: f64, jump: f64, space: &SearchSpace) -> Vec<f64> {
    let mut out: Vec<f64> = hawk
        .iter()
        .zip(prey)
        .map(|(&x, &xp)| (xp - x) - e * (jump * xp - x).abs())
        .collect();
    space.clamp(&mut out);
    out
}

/// Hard besiege: `X_p − E·|ΔX|`.
pub fn hard_besiege(hawk: &[f64], prey: &[f64], e: f64, space: &SearchSpace) -> Vec<f64> {
    let mut out: Vec<f64> = hawk.iter().zip(prey).map(|(&x, &xp)| xp - e * (xp - x).abs()).collect();
    space.clamp(&mut out);
    out
}

/// Reference point of a progressive dive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiveMode {
    /// Dive relative to the hawk itself.
    Soft,
    /// Dive relative to the family mean.
    Hard,
}

/// Outcome of a progressive rapid dive.
#[derive(Debug, Clone, PartialEq)]
pub struct DiveOutcome {
    /// Position the hawk moves to (possibly unchanged).
    pub hawk: Hawk,
    /// Every candidate evaluated during the dive, in evaluation order.
    pub evaluated: Vec<Hawk>,
}

/// Dive target `Y = X_p − E·|J·X_p − ref|`, where `ref` is the hawk for a soft
/// dive and the family mean for a hard one.
pub fn dive_target(
    hawk: &[f64],
    prey: &[f64],
    avg_position: &[f64],
    e: f64,
    jump: f64,
    mode: DiveMode,
    space: &SearchSpace,
) -> Vec<f64> {
    let reference = match mode {
        DiveMode::Soft => hawk,
        DiveMode::Hard => avg_position,
    };
    let mut y: Vec<f64> = prey
        .iter()
        .zip(reference)
        .map(|(&xp, &xr)| xp - e * (jump * xp - xr).abs())
        .collect();
    space.clamp(&mut y);
    y
}

/// Progressive rapid dive.
///
/// Tries `Y` first, then the Lévy-perturbed `Z = Y + S∘LF(D)`; the hawk moves to
/// the first candidate that strictly improves on its current fitness and stays
/// put otherwise. `Z` is only drawn and evaluated when `Y` fails.
#[allow(clippy::too_many_arguments)]
pub fn progressive_dive<F, S, R>(
    hawk: &Hawk,
    prey: &[f64],
    avg_position: &[f64],
    e: f64,
    jump: f64,
    mode: DiveMode,
    space: &SearchSpace,
    levy: (f64, f64),
    fitness: &F,
    rng: &mut R,
) -> DiveOutcome
where
    F: Fn(&[f64]) -> S + ?Sized,
    S: Into<Score>,
    R: Rng + ?Sized,
{
    let (beta, sigma) = levy;
    let y = dive_target(&hawk.position, prey, avg_position, e, jump, mode, space);
    let fy: Score = fitness(&y).into();
    let y = Hawk {
        position: y,
        fitness: fy,
    };
    if fy.beats(hawk.fitness) {
        return DiveOutcome {
            hawk: y.clone(),
            evaluated: vec![y],
        };
    }

    let step = levy_flight(space.dim(), beta, sigma, rng);
    let mut z: Vec<f64> = y
        .position
        .iter()
        .zip(&step)
        .map(|(&yk, &lk)| yk + rng.random::<f64>() * lk)
        .collect();
    space.clamp(&mut z);
    let fz: Score = fitness(&z).into();
    let z = Hawk {
        position: z,
        fitness: fz,
    };
    let next = if fz.beats(hawk.fitness) {
        z.clone()
    } else {
        hawk.clone()
    };
    DiveOutcome {
        hawk: next,
        evaluated: vec![y, z],
    }
}
