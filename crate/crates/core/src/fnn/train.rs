//! Population-based trainers over a flat genome box `[−b, b]^D`.
//! Every trainer minimizes a loss and reports a best-so-far trace.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hho::{HhoParams, HhoState, SearchSpace};
use crate::seed::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "HHO")]
    Hho,
    #[serde(rename = "PSO")]
    Pso,
    #[serde(rename = "ES")]
    Es,
    #[serde(rename = "GA")]
    Ga,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Hho, Algorithm::Pso, Algorithm::Es, Algorithm::Ga];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Hho => "HHO",
            Algorithm::Pso => "PSO",
            Algorithm::Es => "ES",
            Algorithm::Ga => "GA",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::invalid(format!("unknown trainer {s:?} (expected HHO, PSO, ES or GA)")))
    }
}

/// What the trainer minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// Negative network sum rate over the training scenarios.
    SumRate,
    /// Squared gap to the HHOPAP sum rate of each training scenario.
    RateGap,
    /// Classification MSE on a labelled dataset.
    DatasetMse,
}

impl LossKind {
    pub const ALL: [LossKind; 3] = [LossKind::SumRate, LossKind::RateGap, LossKind::DatasetMse];

    pub fn name(self) -> &'static str {
        match self {
            LossKind::SumRate => "sum_rate",
            LossKind::RateGap => "rate_gap",
            LossKind::DatasetMse => "dataset_mse",
        }
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LossKind::ALL
            .into_iter()
            .find(|l| l.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown loss {s:?} (expected sum_rate, rate_gap or dataset_mse)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsoParams {
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Velocity clamp as a fraction of each coordinate's range.
    pub velocity_fraction: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self {
            inertia: 0.729,
            cognitive: 1.49445,
            social: 1.49445,
            velocity_fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EsParams {
    pub parents: usize,
    pub offspring: usize,
    /// Initial mutation strength as a fraction of the range.
    pub initial_sigma_fraction: f64,
}

impl Default for EsParams {
    fn default() -> Self {
        Self {
            parents: 15,
            offspring: 30,
            initial_sigma_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaParams {
    pub crossover_rate: f64,
    /// Gaussian mutation scale as a fraction of the range; the per-gene rate is `1/D`.
    pub mutation_sigma_fraction: f64,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            crossover_rate: 0.9,
            mutation_sigma_fraction: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainerConfig {
    pub algorithm: Algorithm,
    /// Population of HHO, PSO and GA.
    pub population: usize,
    pub max_iterations: usize,
    /// Stop once the best loss changes by less than this…
    pub tolerance: f64,
    /// …for this many consecutive iterations.
    pub patience: usize,
    pub weight_bound: f64,
    pub parallel: bool,
    pub pso: PsoParams,
    pub es: EsParams,
    pub ga: GaParams,
}

impl TrainerConfig {
    pub fn new(algorithm: Algorithm, population: usize, max_iterations: usize) -> Self {
        Self {
            algorithm,
            population,
            max_iterations,
            tolerance: 1e-9,
            patience: 1,
            weight_bound: 10.0,
            parallel: false,
            pso: PsoParams::default(),
            es: EsParams::default(),
            ga: GaParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::invalid("stopping tolerance must be positive"));
        }
        if self.population < 2 || self.max_iterations == 0 || self.patience == 0 {
            return Err(Error::invalid(
                "population ≥ 2, max_iterations ≥ 1 and patience ≥ 1 are required",
            ));
        }
        if !(self.weight_bound > 0.0 && self.weight_bound.is_finite()) {
            return Err(Error::invalid("weight bound must be positive and finite"));
        }
        if self.es.parents == 0 || self.es.offspring == 0 {
            return Err(Error::invalid("ES needs at least one parent and one offspring"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOutcome {
    pub genome: Vec<f64>,
    pub best_loss: f64,
    /// Best-so-far loss after each iteration.
    pub trace: Vec<f64>,
    pub evaluations: u64,
}

/// `|L(t) − L(t−1)| < ε` for `patience` iterations in a row.
struct Stopper {
    tolerance: f64,
    patience: usize,
    previous: f64,
    calm: usize,
}

impl Stopper {
    fn new(config: &TrainerConfig, initial: f64) -> Self {
        Self {
            tolerance: config.tolerance,
            patience: config.patience,
            previous: initial,
            calm: 0,
        }
    }

    fn should_stop(&mut self, best: f64) -> bool {
        let delta = if best == self.previous {
            0.0
        } else {
            (best - self.previous).abs()
        };
        self.calm = if delta < self.tolerance { self.calm + 1 } else { 0 };
        self.previous = best;
        self.calm >= self.patience
    }
}

fn clean(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn evaluate_all<L>(xs: &[Vec<f64>], loss: &L, parallel: bool) -> Vec<f64>
where
    L: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    if parallel {
        xs.par_iter().map(|x| clean(loss(x))).collect()
    } else {
        xs.iter().map(|x| clean(loss(x))).collect()
    }
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x < v[best] {
            best = i;
        }
    }
    best
}

/// Trains a `dim`-dimensional genome with the configured algorithm.
pub fn train<L>(config: &TrainerConfig, dim: usize, loss: &L, seed: u64) -> Result<TrainOutcome>
where
    L: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    config.validate()?;
    let space = SearchSpace::uniform(dim, -config.weight_bound, config.weight_bound)?;
    match config.algorithm {
        Algorithm::Hho => train_hho(config, space, loss, seed),
        Algorithm::Pso => train_pso(config, &space, loss, seed),
        Algorithm::Es => train_es(config, &space, loss, seed),
        Algorithm::Ga => train_ga(config, &space, loss, seed),
    }
}

fn train_hho<L>(config: &TrainerConfig, space: SearchSpace, loss: &L, seed: u64) -> Result<TrainOutcome>
where
    L: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    let params = HhoParams {
        parallel: config.parallel,
        ..HhoParams::new(config.population, config.max_iterations)
    };
    let fitness = |x: &[f64]| -clean(loss(x));
    let mut state = HhoState::new(space, params, seed, &fitness)?;
    let mut stop = Stopper::new(config, -state.prey().fitness.value());
    while state.step(&fitness) {
        if stop.should_stop(-state.prey().fitness.value()) {
            break;
        }
    }
    let trace = state.trace().iter().map(|f| -f).collect();
    let evaluations = state.evaluations();
    let prey = state.prey().clone();
    Ok(TrainOutcome {
        genome: prey.position,
        best_loss: -prey.fitness.value(),
        trace,
        evaluations,
    })
}

fn train_pso<L>(config: &TrainerConfig, space: &SearchSpace, loss: &L, seed: u64) -> Result<TrainOutcome>
where
    L: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    let p = config.pso;
    let mut rng = stream_rng(seed, 0);
    let dim = space.dim();
    let vmax: Vec<f64> = space
        .lower()
        .iter()
        .zip(space.upper())
        .map(|(l, u)| p.velocity_fraction * (u - l))
        .collect();
    let mut xs: Vec<Vec<f64>> = (0..config.population).map(|_| space.sample(&mut rng)).collect();
    let mut vs = vec![vec![0.0; dim]; config.population];
    let mut fx = evaluate_all(&xs, loss, config.parallel);
    let mut evaluations = xs.len() as u64;
    let mut pbest = xs.clone();
    let mut pbest_f = fx.clone();
    let g = argmin(&fx);
    let (mut gbest, mut gbest_f) = (xs[g].clone(), fx[g]);

    let mut stop = Stopper::new(config, gbest_f);
    let mut trace = Vec::new();
    for _ in 0..config.max_iterations {
        for (i, (x, v)) in xs.iter_mut().zip(vs.iter_mut()).enumerate() {
            for d in 0..dim {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                let nv = p.inertia * v[d] + p.cognitive * r1 * (pbest[i][d] - x[d]) + p.social * r2 * (gbest[d] - x[d]);
                v[d] = nv.clamp(-vmax[d], vmax[d]);
                x[d] += v[d];
            }
            space.clamp(x);
        }
        fx = evaluate_all(&xs, loss, config.parallel);
        evaluations += xs.len() as u64;
        for i in 0..xs.len() {
            if fx[i] < pbest_f[i] {
                pbest_f[i] = fx[i];
                pbest[i].clone_from(&xs[i]);
                if fx[i] < gbest_f {
                    gbest_f = fx[i];
                    gbest.clone_from(&xs[i]);
                }
            }
        }
        trace.push(gbest_f);
        if stop.should_stop(gbest_f) {
            break;
        }
    }
    Ok(TrainOutcome {
        genome: gbest,
        best_loss: gbest_f,
        trace,
        evaluations,
    })
}

struct Individual {
    x: Vec<f64>,
    sigma: f64,
    loss: f64,
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn train_es<L>(config: &TrainerConfig, space: &SearchSpace, loss: &L, seed: u64) -> Result<TrainOutcome>
where
    L: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    let e = config.es;
    let mut rng = stream_rng(seed, 0);
    let tau = 1.0 / (space.dim() as f64).sqrt();
    let range = space.upper()[0] - space.lower()[0];
    let init: Vec<Vec<f64>> = (0..e.parents).map(|_| space.sample(&mut rng)).collect();
    let fx = evaluate_all(&init, loss, config.parallel);
    let mut evaluations = init.len() as u64;
    let mut pop: Vec<Individual> = init
        .into_iter()
        .zip(fx)
        .map(|(x, loss)| Individual {
            x,
            sigma: e.initial_sigma_fraction * range,
            loss,
        })
        .collect();
    pop.sort_by(|a, b| a.loss.total_cmp(&b.loss));

    let mut stop = Stopper::new(config, pop[0].loss);
    let mut trace = Vec::new();
    for _ in 0..config.max_iterations {
        let mut kids = Vec::with_capacity(e.offspring);
        let mut sigmas = Vec::with_capacity(e.offspring);
        for _ in 0..e.offspring {
            let parent = &pop[rng.random_range(0..pop.len())];
            let sigma = (parent.sigma * (tau * gaussian(&mut rng)).exp()).max(1e-12);
            let mut x: Vec<f64> = parent.x.iter().map(|v| v + sigma * gaussian(&mut rng)).collect();
            space.clamp(&mut x);
            kids.push(x);
            sigmas.push(sigma);
        }
        let fk = evaluate_all(&kids, loss, config.parallel);
        evaluations += kids.len() as u64;
        pop.extend(
            kids.into_iter()
                .zip(sigmas)
                .zip(fk)
                .map(|((x, sigma), loss)| Individual { x, sigma, loss }),
        );
        // stable: parents win ties against offspring
        pop.sort_by(|a, b| a.loss.total_cmp(&b.loss));
        pop.truncate(e.parents);
        trace.push(pop[0].loss);
        if stop.should_stop(pop[0].loss) {
            break;
        }
    }
    let best = pop.swap_remove(0);
    Ok(TrainOutcome {
        genome: best.x,
        best_loss: best.loss,
        trace,
        evaluations,
    })
}

fn train_ga<L>(config: &TrainerConfig, space: &SearchSpace, loss: &L, seed: u64) -> Result<TrainOutcome>
where
    L: Fn(&[f64]) -> f64 + Sync + ?Sized,
{
    let g = config.ga;
    let mut rng = stream_rng(seed, 0);
    let dim = space.dim();
    let mutation_rate = 1.0 / dim as f64;
    let sigma: Vec<f64> = space
        .lower()
        .iter()
        .zip(space.upper())
        .map(|(l, u)| g.mutation_sigma_fraction * (u - l))
        .collect();
    let n = config.population;
    let mut pop: Vec<Vec<f64>> = (0..n).map(|_| space.sample(&mut rng)).collect();
    let mut fx = evaluate_all(&pop, loss, config.parallel);
    let mut evaluations = n as u64;

    let mut stop = Stopper::new(config, fx[argmin(&fx)]);
    let mut trace = Vec::new();
    for _ in 0..config.max_iterations {
        let elite = argmin(&fx);
        let tournament = |rng: &mut ChaCha8Rng| {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if fx[b] < fx[a] {
                b
            } else {
                a
            }
        };
        let mut kids = Vec::with_capacity(n - 1);
        for _ in 1..n {
            let (a, b) = (tournament(&mut rng), tournament(&mut rng));
            let mut child = pop[a].clone();
            if rng.random::<f64>() < g.crossover_rate {
                for (c, &o) in child.iter_mut().zip(&pop[b]) {
                    if rng.random::<bool>() {
                        *c = o;
                    }
                }
            }
            for (d, c) in child.iter_mut().enumerate() {
                if rng.random::<f64>() < mutation_rate {
                    *c += sigma[d] * gaussian(&mut rng);
                }
            }
            space.clamp(&mut child);
            kids.push(child);
        }
        let fk = evaluate_all(&kids, loss, config.parallel);
        evaluations += kids.len() as u64;
        let elite_x = pop.swap_remove(elite);
        let elite_f = fx.swap_remove(elite);
        pop = std::iter::once(elite_x).chain(kids).collect();
        fx = std::iter::once(elite_f).chain(fk).collect();
        let best = fx[argmin(&fx)];
        trace.push(best);
        if stop.should_stop(best) {
            break;
        }
    }
    let b = argmin(&fx);
    Ok(TrainOutcome {
        genome: pop.swap_remove(b),
        best_loss: fx[b],
        trace,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    #[test]
    fn every_trainer_descends_the_sphere() {
        for a in Algorithm::ALL {
            let mut c = TrainerConfig::new(a, 30, 500);
            c.tolerance = 1e-300;
            c.patience = 1000;
            for seed in 0..4 {
                let out = train(&c, 10, &sphere, seed).unwrap();
                assert!(out.best_loss < 1e-2, "{a} seed {seed}: {}", out.best_loss);
            }
            let out = train(&c, 10, &sphere, 4).unwrap();
            assert!(out.trace.windows(2).all(|w| w[1] <= w[0]), "{a} trace not monotone");
            assert_eq!(out.trace.len(), 500);
            assert_eq!(*out.trace.last().unwrap(), out.best_loss);
            assert_eq!(sphere(&out.genome), out.best_loss);
        }
    }

    #[test]
    fn infinite_tolerance_stops_after_one_iteration() {
        for a in Algorithm::ALL {
            let mut c = TrainerConfig::new(a, 10, 100);
            c.tolerance = f64::INFINITY;
            assert_eq!(train(&c, 3, &sphere, 1).unwrap().trace.len(), 1, "{a}");
        }
    }

    #[test]
    fn same_seed_same_genome() {
        for a in Algorithm::ALL {
            let mut c = TrainerConfig::new(a, 12, 40);
            let x = train(&c, 6, &sphere, 8).unwrap();
            c.parallel = true;
            assert_eq!(x, train(&c, 6, &sphere, 8).unwrap(), "{a}");
        }
    }

    #[test]
    fn frozen_pso_never_moves() {
        let mut c = TrainerConfig::new(Algorithm::Pso, 10, 50);
        c.pso = PsoParams {
            inertia: 0.0,
            cognitive: 0.0,
            social: 0.0,
            velocity_fraction: 0.2,
        };
        c.patience = 1000;
        let out = train(&c, 4, &sphere, 2).unwrap();
        assert!(out.trace.iter().all(|&v| v == out.trace[0]));
    }

    #[test]
    fn config_validation() {
        let mut c = TrainerConfig::new(Algorithm::Ga, 10, 10);
        c.tolerance = 0.0;
        assert!(c.validate().is_err());
        assert!(TrainerConfig::new(Algorithm::Ga, 1, 10).validate().is_err());
        assert_eq!("es".parse::<Algorithm>().unwrap(), Algorithm::Es);
    }

    #[test]
    fn nan_loss_is_worst() {
        let c = TrainerConfig::new(Algorithm::Ga, 10, 20);
        let f = |x: &[f64]| if x[0] > 0.0 { f64::NAN } else { sphere(x) };
        let out = train(&c, 2, &f, 3).unwrap();
        assert!(out.best_loss.is_finite());
    }
}
