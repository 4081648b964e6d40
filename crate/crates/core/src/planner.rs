//! HHOPAP: joint UAV placement and NOMA power allocation as a penalized
//! maximization over `[x_u, y_u, p_1, …, p_N]`, solved with [`crate::hho`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hho::{optimize, HhoParams, Score, SearchSpace};
use crate::vlc::{
    channel_state, noma_spectral_rates, ChannelState, ConstraintSet, Placement, PowerAllocation, Residuals, Scenario,
};

pub const DEFAULT_PENALTY_FACTOR: f64 = 1e14;

/// Every scheme that produces a [`Solution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "HHOPAP")]
    Hhopap,
    #[serde(rename = "GRPA")]
    Grpa,
    #[serde(rename = "RandP")]
    RandP,
    #[serde(rename = "OFDMA")]
    Ofdma,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Hhopap, Scheme::Grpa, Scheme::RandP, Scheme::Ofdma];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Hhopap => "HHOPAP",
            Scheme::Grpa => "GRPA",
            Scheme::RandP => "RandP",
            Scheme::Ofdma => "OFDMA",
        }
    }

    pub fn rate_model(self) -> RateModel {
        match self {
            Scheme::Ofdma => RateModel::Ofdma,
            _ => RateModel::Noma,
        }
    }

    /// Constraints each scheme is held to. OFDMA has no SIC.
    pub fn constraints(self) -> ConstraintSet {
        match self {
            Scheme::Ofdma => ConstraintSet::ALL.without_sic(),
            _ => ConstraintSet::ALL,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::invalid(format!("unknown scheme {s:?} (expected HHOPAP, GRPA, RandP or OFDMA)")))
    }
}

/// How per-user rates follow from gains and powers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateModel {
    /// Shared band with SIC.
    Noma,
    /// Equal orthogonal subbands, noise scaled to the subband.
    Ofdma,
}

impl RateModel {
    /// Rates in bit/s/Hz of the full band.
    pub fn spectral_rates(self, channel: &ChannelState, power: &[f64], noise_power_w: f64) -> Vec<f64> {
        match self {
            RateModel::Noma => noma_spectral_rates(channel, power, noise_power_w),
            RateModel::Ofdma => ofdma_spectral_rates(channel, power, noise_power_w),
        }
    }
}

/// `(1/N)·log₂(1 + h_i·p_i·N/n₀)` per user.
pub fn ofdma_spectral_rates(channel: &ChannelState, power: &[f64], noise_power_w: f64) -> Vec<f64> {
    let n = channel.n_users() as f64;
    channel
        .gains
        .iter()
        .zip(power)
        .map(|(h, p)| (h * p * n / noise_power_w).ln_1p() / std::f64::consts::LN_2 / n)
        .collect()
}

/// One factor per penalized residual `[budget, optical, sic…, qos…, disc]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    pub factors: Vec<f64>,
}

impl PenaltyConfig {
    pub fn uniform(n_users: usize, factor: f64) -> Self {
        Self {
            factors: vec![factor; 2 * n_users + 2],
        }
    }

    pub fn for_users(n_users: usize) -> Self {
        Self::uniform(n_users, DEFAULT_PENALTY_FACTOR)
    }

    pub fn validate(&self, n_users: usize) -> Result<()> {
        if self.factors.len() != 2 * n_users + 2 {
            return Err(Error::invalid(format!(
                "expected {} penalty factors for {n_users} users, got {}",
                2 * n_users + 2,
                self.factors.len()
            )));
        }
        if self.factors.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(Error::invalid("penalty factors must be positive and finite"));
        }
        Ok(())
    }

    /// The terms `−μ_j·g_j²` of the violated residuals of the active constraints.
    pub fn penalty_terms<'r>(&'r self, residuals: &'r Residuals, set: ConstraintSet) -> impl Iterator<Item = f64> + 'r {
        residuals
            .penalized(set)
            .zip(&self.factors)
            .filter_map(|(g, mu)| g.filter(|&g| g > 0.0).map(|g| -mu * g * g))
    }

    /// `−Σ μ_j·g_j²`.
    pub fn penalty(&self, residuals: &Residuals, set: ConstraintSet) -> f64 {
        Score::sum(self.penalty_terms(residuals, set)).value()
    }
}

/// A candidate scored in spectral-efficiency units.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub channel: ChannelState,
    /// bit/s/Hz per user.
    pub rates: Vec<f64>,
    /// QoS residuals in bit/s/Hz.
    pub residuals: Residuals,
    pub penalty: f64,
    /// Sum rate plus penalty, summed without cancellation loss.
    pub score: Score,
    pub fitness: f64,
}

/// A scenario bound to the constraint set, rate model and penalty of one scheme.
#[derive(Debug, Clone)]
pub struct Problem<'a> {
    pub scenario: &'a Scenario,
    pub scheme: Scheme,
    pub penalty: PenaltyConfig,
}

impl<'a> Problem<'a> {
    pub fn new(scenario: &'a Scenario, scheme: Scheme, penalty: PenaltyConfig) -> Result<Self> {
        scenario.validate()?;
        penalty.validate(scenario.n_users())?;
        Ok(Self {
            scenario,
            scheme,
            penalty,
        })
    }

    pub fn with_default_penalty(scenario: &'a Scenario, scheme: Scheme) -> Result<Self> {
        Self::new(scenario, scheme, PenaltyConfig::for_users(scenario.n_users()))
    }

    /// Per-user minimum rate in bit/s/Hz.
    pub fn spectral_rate_min(&self) -> f64 {
        self.scenario.rate_min_bps / self.scenario.bandwidth_hz
    }

    pub fn evaluate(&self, placement: Placement, power: &[f64]) -> Evaluation {
        let s = self.scenario;
        let channel = channel_state(placement, s);
        let rates = self
            .scheme
            .rate_model()
            .spectral_rates(&channel, power, s.noise_power_w);
        let residuals = Residuals::evaluate(placement, power, &channel, &rates, self.spectral_rate_min(), s);
        let set = self.scheme.constraints();
        let penalty = self.penalty.penalty(&residuals, set);
        let score = Score::sum(rates.iter().copied().chain(self.penalty.penalty_terms(&residuals, set)));
        Evaluation {
            channel,
            rates,
            residuals,
            penalty,
            score,
            fitness: score.value(),
        }
    }

    pub fn score(&self, placement: Placement, power: &[f64]) -> Score {
        self.evaluate(placement, power).score
    }

    pub fn fitness(&self, placement: Placement, power: &[f64]) -> f64 {
        self.score(placement, power).value()
    }

    /// Decodes a candidate into a reported [`Solution`] in physical units.
    pub fn solution(&self, placement: Placement, power: Vec<f64>, seed: u64) -> Solution {
        let s = self.scenario;
        let eval = self.evaluate(placement, &power);
        let rates_bps: Vec<f64> = eval.rates.iter().map(|r| r * s.bandwidth_hz).collect();
        let residuals = Residuals::evaluate(placement, &power, &eval.channel, &rates_bps, s.rate_min_bps, s);
        let feasible = residuals.is_feasible(self.scheme.constraints(), s, s.rate_min_bps);
        Solution {
            scheme: self.scheme,
            seed,
            placement,
            powers: PowerAllocation(power),
            sum_rate_bps: rates_bps.iter().sum(),
            per_user_rates_bps: rates_bps,
            residuals,
            feasible,
            fitness: eval.fitness,
        }
    }
}

/// Decoded result of any scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub scheme: Scheme,
    pub seed: u64,
    pub placement: Placement,
    /// Watts per user id.
    pub powers: PowerAllocation,
    pub per_user_rates_bps: Vec<f64>,
    pub sum_rate_bps: f64,
    /// Residuals in physical units (QoS in bit/s).
    pub residuals: Residuals,
    pub feasible: bool,
    /// Penalized objective in bit/s/Hz.
    pub fitness: f64,
}

impl Solution {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Recomputes rates and residuals from scratch and checks the scheme's
    /// constraints.
    pub fn reverify(&self, scenario: &Scenario) -> bool {
        reverify(self.scheme, self.placement, self.powers.watts(), scenario)
    }
}

/// Independent feasibility check of a placement/power pair for `scheme`.
pub fn reverify(scheme: Scheme, placement: Placement, power: &[f64], scenario: &Scenario) -> bool {
    if power.len() != scenario.n_users() {
        return false;
    }
    let channel = channel_state(placement, scenario);
    let rates: Vec<f64> = scheme
        .rate_model()
        .spectral_rates(&channel, power, scenario.noise_power_w)
        .into_iter()
        .map(|r| r * scenario.bandwidth_hz)
        .collect();
    Residuals::evaluate(placement, power, &channel, &rates, scenario.rate_min_bps, scenario).is_feasible(
        scheme.constraints(),
        scenario,
        scenario.rate_min_bps,
    )
}

/// Box `[−R, R]² × [0, P_max]^N` over `[x_u, y_u, p_1, …, p_N]`.
pub fn decision_space(scenario: &Scenario) -> Result<SearchSpace> {
    let n = scenario.n_users();
    let r = scenario.disc_radius_m;
    let mut lower = vec![-r, -r];
    let mut upper = vec![r, r];
    lower.extend(std::iter::repeat_n(0.0, n));
    upper.extend(std::iter::repeat_n(scenario.p_max_w, n));
    SearchSpace::new(lower, upper)
}

pub fn split_decision(x: &[f64]) -> (Placement, &[f64]) {
    (Placement::new(x[0], x[1]), &x[2..])
}

/// Penalized sum rate (bit/s/Hz) of a decision vector.
pub fn fitness(x: &[f64], scenario: &Scenario, penalty: &PenaltyConfig) -> f64 {
    let problem = Problem {
        scenario,
        scheme: Scheme::Hhopap,
        penalty: penalty.clone(),
    };
    let (placement, power) = split_decision(x);
    problem.fitness(placement, power)
}

/// Solves with the default penalty factors.
pub fn solve(scenario: &Scenario, params: &HhoParams, seed: u64) -> Result<Solution> {
    let problem = Problem::with_default_penalty(scenario, Scheme::Hhopap)?;
    solve_problem(&problem, params, seed).map(|(s, _)| s)
}

/// Joint placement and power search for `problem`; also returns the
/// best-fitness trace.
pub fn solve_problem(problem: &Problem<'_>, params: &HhoParams, seed: u64) -> Result<(Solution, Vec<f64>)> {
    let space = decision_space(problem.scenario)?;
    let f = |x: &[f64]| {
        let (placement, power) = split_decision(x);
        problem.score(placement, power)
    };
    let outcome = optimize(&space, &f, params, seed)?;
    let (placement, power) = split_decision(&outcome.best_position);
    Ok((problem.solution(placement, power.to_vec(), seed), outcome.trace))
}
