//! Harris Hawks optimizer over box-bounded real vectors.
//!
//! The optimizer **maximizes** its fitness function. Minimization problems are
//! handled by negating the objective. Every hawk owns a random stream derived
//! from the master seed, so results do not depend on whether fitness
//! evaluations run in parallel.

pub mod benchmarks;
mod levy;
mod moves;
mod score;

use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use levy::{levy_component, levy_flight, levy_sigma, DEFAULT_BETA};
pub use moves::{
    average_position, dive_target, escaping_energy, explore_step, hard_besiege, progressive_dive, select_phase,
    soft_besiege, DiveMode, DiveOutcome, ExploreDraws, Phase,
};
pub use score::Score;

use crate::error::{Error, Result};
use crate::seed::stream_rng;

/// Box constraints `lower[k] < upper[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl SearchSpace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::invalid("search space needs at least one dimension"));
        }
        if lower.len() != upper.len() {
            return Err(Error::invalid(format!(
                "bound lengths differ: {} lower vs {} upper",
                lower.len(),
                upper.len()
            )));
        }
        if let Some(k) =
            (0..lower.len()).find(|&k| !(lower[k] < upper[k]) || !lower[k].is_finite() || !upper[k].is_finite())
        {
            return Err(Error::invalid(format!(
                "bounds of dimension {k} are not a finite non-empty interval: [{}, {}]",
                lower[k], upper[k]
            )));
        }
        Ok(Self { lower, upper })
    }

    /// The same interval `[lo, hi]` on every axis.
    pub fn uniform(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for ((v, &lo), &hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            // NaN coordinates collapse onto the lower bound
            *v = if v.is_nan() { lo } else { v.clamp(lo, hi) };
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(&self.lower)
                .zip(&self.upper)
                .all(|((v, lo), hi)| lo <= v && v <= hi)
    }

    /// Uniform sample from the box.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| lo + rng.random::<f64>() * (hi - lo))
            .collect()
    }
}

/// A candidate position together with its fitness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hawk {
    pub position: Vec<f64>,
    pub fitness: Score,
}

/// Maps non-finite fitness values to the worst possible value.
#[inline]
pub fn sanitize(f: f64) -> f64 {
    if f.is_finite() {
        f
    } else {
        f64::NEG_INFINITY
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HhoParams {
    /// Number of hawks (S).
    pub population_size: usize,
    /// Iteration budget (T).
    pub max_iterations: usize,
    /// Lévy stability index.
    pub beta: f64,
    /// Evaluate hawks on the rayon pool. Does not change results.
    pub parallel: bool,
}

impl Default for HhoParams {
    fn default() -> Self {
        Self {
            population_size: 30,
            max_iterations: 500,
            beta: DEFAULT_BETA,
            parallel: false,
        }
    }
}

impl HhoParams {
    pub fn new(population_size: usize, max_iterations: usize) -> Self {
        Self {
            population_size,
            max_iterations,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::invalid("population size must be at least 2"));
        }
        if self.max_iterations < 1 {
            return Err(Error::invalid("max_iterations must be at least 1"));
        }
        levy_sigma(self.beta).map(|_| ())
    }
}

/// Final result of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HhoOutcome {
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    /// Best-so-far fitness after each iteration.
    pub trace: Vec<f64>,
    pub evaluations: u64,
}

/// Result of advancing one hawk, before its new position is evaluated.
struct Advance {
    hawk: Hawk,
    needs_eval: bool,
    phase: Phase,
    evaluated: Vec<Hawk>,
}

/// Snapshot shared by all hawk updates of one iteration.
struct IterationContext<'a> {
    space: &'a SearchSpace,
    population: &'a [Hawk],
    prey: &'a [f64],
    mean: &'a [f64],
    t: usize,
    max_t: usize,
    levy: (f64, f64),
}

impl IterationContext<'_> {
    fn advance<F, S>(&self, i: usize, rng: &mut ChaCha8Rng, fitness: &F) -> Advance
    where
        F: Fn(&[f64]) -> S + Sync + ?Sized,
        S: Into<Score>,
    {
        let current = &self.population[i];
        let e0 = 2.0 * rng.random::<f64>() - 1.0;
        let jump = 2.0 * (1.0 - rng.random::<f64>());
        let e = 2.0 * e0 * (1.0 - self.t as f64 / self.max_t as f64);

        let moved = |position: Vec<f64>, phase| Advance {
            hawk: Hawk {
                position,
                fitness: Score::WORST,
            },
            needs_eval: true,
            phase,
            evaluated: Vec::new(),
        };

        if e.abs() >= 1.0 {
            let q: f64 = rng.random();
            let draws = ExploreDraws {
                q,
                r1: rng.random(),
                r2: rng.random(),
                r3: rng.random(),
                r4: rng.random(),
            };
            let partner = &self.population[rng.random_range(0..self.population.len())];
            let phase = select_phase(e, q, 0.0);
            // dimensions are guaranteed equal inside the optimizer
            let next = explore_step(
                &current.position,
                &partner.position,
                self.mean,
                self.prey,
                self.space,
                draws,
            )
            .expect("population dimensions are consistent");
            return moved(next, phase);
        }

        let r: f64 = rng.random();
        let phase = select_phase(e, 1.0, r);
        match phase {
            Phase::SoftBesiege => moved(soft_besiege(&current.position, self.prey, e, jump, self.space), phase),
            Phase::HardBesiege => moved(hard_besiege(&current.position, self.prey, e, self.space), phase),
            Phase::SoftDive | Phase::HardDive => {
                let mode = if phase == Phase::SoftDive {
                    DiveMode::Soft
                } else {
                    DiveMode::Hard
                };
                let out = progressive_dive(
                    current, self.prey, self.mean, e, jump, mode, self.space, self.levy, fitness, rng,
                );
                Advance {
                    hawk: out.hawk,
                    needs_eval: false,
                    phase,
                    evaluated: out.evaluated,
                }
            }
            Phase::RandomPerch | Phase::CollectivePerch => unreachable!("|E| < 1 never explores"),
        }
    }
}

/// Mutable optimizer state; drive it with [`HhoState::step`].
#[derive(Debug, Clone)]
pub struct HhoState {
    space: SearchSpace,
    params: HhoParams,
    sigma: f64,
    population: Vec<Hawk>,
    prey: Hawk,
    iteration: usize,
    rngs: Vec<ChaCha8Rng>,
    trace: Vec<f64>,
    evaluations: u64,
    phase_counts: [u64; 6],
    rng_seed: u64,
}

impl HhoState {
    /// Draws and evaluates the initial population.
    pub fn new<F, S>(space: SearchSpace, params: HhoParams, seed: u64, fitness: &F) -> Result<Self>
    where
        F: Fn(&[f64]) -> S + Sync + ?Sized,
        S: Into<Score>,
    {
        params.validate()?;
        let sigma = levy_sigma(params.beta)?;
        let mut rngs: Vec<ChaCha8Rng> = (0..params.population_size as u64)
            .map(|i| stream_rng(seed, i))
            .collect();
        let positions: Vec<Vec<f64>> = rngs.iter_mut().map(|rng| space.sample(rng)).collect();
        let fits = evaluate_all(&positions, fitness, params.parallel);
        let population: Vec<Hawk> = positions
            .into_iter()
            .zip(fits)
            .map(|(position, fitness)| Hawk { position, fitness })
            .collect();
        let prey = best_of(&population).clone();
        Ok(Self {
            space,
            sigma,
            evaluations: population.len() as u64,
            population,
            prey,
            iteration: 0,
            rngs,
            trace: Vec::with_capacity(params.max_iterations),
            phase_counts: [0; 6],
            params,
            rng_seed: seed,
        })
    }

    pub fn is_finished(&self) -> bool {
        self.iteration >= self.params.max_iterations
    }

    /// Runs one iteration. Returns `false` once the iteration budget is spent.
    pub fn step<F, S>(&mut self, fitness: &F) -> bool
    where
        F: Fn(&[f64]) -> S + Sync + ?Sized,
        S: Into<Score>,
    {
        if self.is_finished() {
            return false;
        }
        let mean = average_position(&self.population).expect("population is never empty");
        let ctx = IterationContext {
            space: &self.space,
            population: &self.population,
            prey: &self.prey.position,
            mean: &mean,
            t: self.iteration,
            max_t: self.params.max_iterations,
            levy: (self.params.beta, self.sigma),
        };

        let mut advances: Vec<Advance> = if self.params.parallel {
            self.rngs
                .par_iter_mut()
                .enumerate()
                .map(|(i, rng)| ctx.advance(i, rng, fitness))
                .collect()
        } else {
            self.rngs
                .iter_mut()
                .enumerate()
                .map(|(i, rng)| ctx.advance(i, rng, fitness))
                .collect()
        };

        let pending: Vec<usize> = (0..advances.len()).filter(|&i| advances[i].needs_eval).collect();
        let positions: Vec<Vec<f64>> = pending.iter().map(|&i| advances[i].hawk.position.clone()).collect();
        let fits = evaluate_all(&positions, fitness, self.params.parallel);
        for (&i, f) in pending.iter().zip(fits) {
            advances[i].hawk.fitness = f;
        }

        let mut evaluations = pending.len() as u64;
        for (slot, adv) in self.population.iter_mut().zip(advances) {
            self.phase_counts[Phase::ALL.iter().position(|p| *p == adv.phase).unwrap()] += 1;
            evaluations += adv.evaluated.len() as u64;
            for cand in &adv.evaluated {
                if cand.fitness.beats(self.prey.fitness) {
                    self.prey = cand.clone();
                }
            }
            if adv.hawk.fitness.beats(self.prey.fitness) {
                self.prey = adv.hawk.clone();
            }
            *slot = adv.hawk;
        }
        self.evaluations += evaluations;
        self.iteration += 1;
        self.trace.push(self.prey.fitness.value());
        true
    }

    pub fn prey(&self) -> &Hawk {
        &self.prey
    }

    pub fn population(&self) -> &[Hawk] {
        &self.population
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn max_iterations(&self) -> usize {
        self.params.max_iterations
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn space(&self) -> &SearchSpace {
        &self.space
    }

    pub fn trace(&self) -> &[f64] {
        &self.trace
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    /// How often each update rule was applied, indexed like [`Phase::ALL`].
    pub fn phase_counts(&self) -> [u64; 6] {
        self.phase_counts
    }

    pub fn into_outcome(self) -> HhoOutcome {
        HhoOutcome {
            best_position: self.prey.position,
            best_fitness: self.prey.fitness.value(),
            trace: self.trace,
            evaluations: self.evaluations,
        }
    }
}

fn evaluate_all<F, S>(positions: &[Vec<f64>], fitness: &F, parallel: bool) -> Vec<Score>
where
    F: Fn(&[f64]) -> S + Sync + ?Sized,
    S: Into<Score>,
{
    if parallel {
        positions.par_iter().map(|p| fitness(p).into()).collect()
    } else {
        positions.iter().map(|p| fitness(p).into()).collect()
    }
}

/// First hawk with the highest fitness.
fn best_of(population: &[Hawk]) -> &Hawk {
    population.iter().fold(
        &population[0],
        |best, h| if h.fitness.beats(best.fitness) { h } else { best },
    )
}

/// Runs the optimizer to completion.
pub fn optimize<F, S>(space: &SearchSpace, fitness: &F, params: &HhoParams, seed: u64) -> Result<HhoOutcome>
where
    F: Fn(&[f64]) -> S + Sync + ?Sized,
    S: Into<Score>,
{
    let mut state = HhoState::new(space.clone(), params.clone(), seed, fitness)?;
    while state.step(fitness) {}
    Ok(state.into_outcome())
}

/// Writes a best-so-far trace as `iteration,best_fitness` rows, iterations
/// counted from 1.
pub fn write_trace_csv<W: Write>(trace: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "best_fitness"])?;
    for (t, f) in trace.iter().enumerate() {
        w.write_record([(t + 1).to_string(), f.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
