//! Comparison schemes: fixed-ratio power ladder with optimized placement
//! (GRPA), random placement with optimized power (RandP), and equal-bandwidth
//! OFDMA with joint optimization.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hho::{optimize, HhoParams, SearchSpace};
use crate::planner::{self, decision_space, split_decision, Problem, Scheme, Solution};
use crate::seed::stream_rng;
use crate::vlc::{channel_state, ChannelState, Placement, PowerAllocation, Scenario};

pub const DEFAULT_GRPA_ALPHA: f64 = 0.4;

/// Stream reserved for the RandP placement draw; hawks use streams `0..S`.
const PLACEMENT_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BaselineKind {
    #[serde(rename = "GRPA")]
    Grpa,
    #[serde(rename = "RandP")]
    RandP,
    #[serde(rename = "OFDMA")]
    Ofdma,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 3] = [BaselineKind::Grpa, BaselineKind::RandP, BaselineKind::Ofdma];
}

impl From<BaselineKind> for Scheme {
    fn from(k: BaselineKind) -> Self {
        match k {
            BaselineKind::Grpa => Scheme::Grpa,
            BaselineKind::RandP => Scheme::RandP,
            BaselineKind::Ofdma => Scheme::Ofdma,
        }
    }
}

/// Geometric ladder over the decode order: the weakest user gets share 1,
/// the next α, then α², …, normalized to the full budget.
pub fn grpa_allocate(channel: &ChannelState, scenario: &Scenario, alpha: f64) -> PowerAllocation {
    let n = channel.n_users();
    let mut shares = vec![0.0; n];
    let mut w = 1.0;
    let mut total = 0.0;
    for &i in &channel.decode_order {
        shares[i] = w;
        total += w;
        w *= alpha;
    }
    PowerAllocation(shares.into_iter().map(|s| s / total * scenario.p_max_w).collect())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "power allocation factor must lie in (0, 1), got {alpha}"
        )))
    }
}

/// HHO over the placement only; power follows [`grpa_allocate`] at each candidate.
pub fn grpa_solve(scenario: &Scenario, params: &HhoParams, alpha: f64, seed: u64) -> Result<Solution> {
    check_alpha(alpha)?;
    let problem = Problem::with_default_penalty(scenario, Scheme::Grpa)?;
    let r = scenario.disc_radius_m;
    let space = SearchSpace::uniform(2, -r, r)?;
    let allocate = |p: Placement| grpa_allocate(&channel_state(p, scenario), scenario, alpha).0;
    let f = |x: &[f64]| {
        let p = Placement::new(x[0], x[1]);
        problem.score(p, &allocate(p))
    };
    let out = optimize(&space, &f, params, seed)?;
    let p = Placement::new(out.best_position[0], out.best_position[1]);
    Ok(problem.solution(p, allocate(p), seed))
}

/// Area-uniform draw over the disc of radius `radius`.
pub fn sample_disc<R: Rng + ?Sized>(radius: f64, rng: &mut R) -> Placement {
    let rho = radius * rng.random::<f64>().sqrt();
    let angle = 2.0 * PI * rng.random::<f64>();
    Placement::new(rho * angle.cos(), rho * angle.sin())
}

/// Placement drawn at random from `seed`, then HHO over the N powers.
pub fn randp_solve(scenario: &Scenario, params: &HhoParams, seed: u64) -> Result<Solution> {
    let problem = Problem::with_default_penalty(scenario, Scheme::RandP)?;
    let placement = sample_disc(scenario.disc_radius_m, &mut stream_rng(seed, PLACEMENT_STREAM));
    let space = SearchSpace::uniform(scenario.n_users(), 0.0, scenario.p_max_w)?;
    let f = |x: &[f64]| problem.score(placement, x);
    let out = optimize(&space, &f, params, seed)?;
    Ok(problem.solution(placement, out.best_position, seed))
}

/// Joint placement and power search with orthogonal subbands.
pub fn ofdma_solve(scenario: &Scenario, params: &HhoParams, seed: u64) -> Result<Solution> {
    let problem = Problem::with_default_penalty(scenario, Scheme::Ofdma)?;
    let space = decision_space(scenario)?;
    let f = |x: &[f64]| {
        let (p, w) = split_decision(x);
        problem.score(p, w)
    };
    let out = optimize(&space, &f, params, seed)?;
    let (p, w) = split_decision(&out.best_position);
    Ok(problem.solution(p, w.to_vec(), seed))
}

/// Dispatches to the solver of `scheme`.
pub fn solve_scheme(scheme: Scheme, scenario: &Scenario, params: &HhoParams, seed: u64) -> Result<Solution> {
    match scheme {
        Scheme::Hhopap => planner::solve(scenario, params, seed),
        Scheme::Grpa => grpa_solve(scenario, params, DEFAULT_GRPA_ALPHA, seed),
        Scheme::RandP => randp_solve(scenario, params, seed),
        Scheme::Ofdma => ofdma_solve(scenario, params, seed),
    }
}
