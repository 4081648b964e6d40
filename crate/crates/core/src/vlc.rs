//! Visible-light downlink model: Lambertian line-of-sight gains, NOMA rates
//! under successive interference cancellation, and the residuals of every
//! constraint of the joint placement/power problem.
//!
//! Residuals follow the convention `g ≤ 0` ⇔ satisfied.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Residuals at or below this fraction of a constraint's natural scale count
/// as satisfied.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

/// Receiver and emitter optics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpticalParams {
    /// Photodetector area in m².
    pub detector_area_m2: f64,
    /// Optical filter gain.
    pub filter_gain: f64,
    /// Concentrator refractive index.
    pub refractive_index: f64,
    /// Receiver field of view (half angle) in radians.
    pub fov_rad: f64,
    /// LED semiangle at half power in radians.
    pub semiangle_rad: f64,
}

impl Default for OpticalParams {
    fn default() -> Self {
        Self {
            detector_area_m2: 1e-4,
            filter_gain: 1.0,
            refractive_index: 1.5,
            fov_rad: 45f64.to_radians(),
            semiangle_rad: 60f64.to_radians(),
        }
    }
}

impl OpticalParams {
    /// Lambertian order `−ln 2 / ln cos(semiangle)`.
    pub fn lambertian_order(&self) -> f64 {
        -LN_2 / self.semiangle_rad.cos().ln()
    }

    /// Concentrator gain `n² / sin² Φ` inside the field of view.
    pub fn concentrator_gain(&self) -> f64 {
        let s = self.fov_rad.sin();
        self.refractive_index * self.refractive_index / (s * s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fov_rad > 0.0 && self.fov_rad < PI / 2.0) {
            return Err(Error::invalid(format!(
                "field of view must lie in (0, π/2), got {}",
                self.fov_rad
            )));
        }
        if !(self.semiangle_rad > 0.0 && self.semiangle_rad < PI / 2.0) {
            return Err(Error::invalid("semiangle must lie in (0, π/2)"));
        }
        if !(self.detector_area_m2 > 0.0 && self.filter_gain > 0.0 && self.refractive_index > 0.0) {
            return Err(Error::invalid(
                "detector area, filter gain and refractive index must be positive",
            ));
        }
        Ok(())
    }
}

/// Ground user position in metres (altitude zero).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserPosition {
    pub x: f64,
    pub y: f64,
}

/// Horizontal UAV position in metres.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Placement {
    pub x: f64,
    pub y: f64,
}

impl Placement {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn radius_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }
}

/// Transmit power per user in watts, indexed by user id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PowerAllocation(pub Vec<f64>);

impl PowerAllocation {
    pub fn watts(&self) -> &[f64] {
        &self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// One problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub users: Vec<UserPosition>,
    /// UAV altitude h in metres.
    pub altitude_m: f64,
    /// Radius R of the disc the UAV must stay in.
    pub disc_radius_m: f64,
    /// Power budget in watts.
    pub p_max_w: f64,
    /// DC bias A.
    pub dc_bias: f64,
    /// Peak optical intensity B.
    pub peak_intensity: f64,
    /// Modulation-dependent coefficient δ.
    pub delta: f64,
    /// Receiver noise power n₀ in watts.
    pub noise_power_w: f64,
    pub bandwidth_hz: f64,
    /// Minimum SIC power gap θ.
    pub theta: f64,
    /// Per-user minimum rate in bit/s.
    pub rate_min_bps: f64,
    pub optics: OpticalParams,
}

impl Scenario {
    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    /// Optical amplitude limit `C = min(A, B − A) / δ`.
    pub fn optical_limit(&self) -> f64 {
        self.dc_bias.min(self.peak_intensity - self.dc_bias) / self.delta
    }

    pub fn validate(&self) -> Result<()> {
        if self.users.len() < 2 {
            return Err(Error::invalid("a scenario needs at least two users"));
        }
        if self.users.iter().any(|u| !u.x.is_finite() || !u.y.is_finite()) {
            return Err(Error::invalid("user coordinates must be finite"));
        }
        if !(self.dc_bias > 0.0 && self.dc_bias < self.peak_intensity) {
            return Err(Error::invalid("dc bias must satisfy 0 < A < B"));
        }
        let positive = [
            ("delta", self.delta),
            ("p_max", self.p_max_w),
            ("altitude", self.altitude_m),
            ("disc radius", self.disc_radius_m),
            ("noise power", self.noise_power_w),
            ("bandwidth", self.bandwidth_hz),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::invalid(format!("{name} must be positive and finite, got {v}")));
        }
        if !(self.theta >= 0.0) || !(self.rate_min_bps >= 0.0) {
            return Err(Error::invalid("theta and rate_min must be non-negative"));
        }
        self.optics.validate()
    }
}

/// LED-to-user distance `√((x_u−x_i)² + (y_u−y_i)² + h²)`.
pub fn distance(placement: Placement, user: UserPosition, altitude: f64) -> f64 {
    let dx = placement.x - user.x;
    let dy = placement.y - user.y;
    (dx * dx + dy * dy + altitude * altitude).sqrt()
}

/// Line-of-sight DC gain. The LED points straight down and receivers straight
/// up, so irradiance and incidence angles share `cos = h/d`.
pub fn channel_gain(placement: Placement, user: UserPosition, scenario: &Scenario) -> f64 {
    let d = distance(placement, user, scenario.altitude_m);
    gain_at(d, scenario)
}

fn gain_at(d: f64, scenario: &Scenario) -> f64 {
    let o = &scenario.optics;
    let cos = scenario.altitude_m / d;
    if cos.acos() > o.fov_rad {
        return 0.0;
    }
    let m = o.lambertian_order();
    let radiant = (m + 1.0) / (2.0 * PI) * cos.powf(m);
    o.detector_area_m2 / (d * d) * radiant * o.filter_gain * o.concentrator_gain() * cos
}

/// Gains of all users and their SIC decoding order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelState {
    pub gains: Vec<f64>,
    pub distances: Vec<f64>,
    /// User ids sorted by ascending gain, ties broken by ascending id.
    pub decode_order: Vec<usize>,
    /// Gains divided by the noise power.
    pub normalized_gains: Vec<f64>,
}

impl ChannelState {
    pub fn from_gains(gains: Vec<f64>, distances: Vec<f64>, noise_power_w: f64) -> Self {
        let decode_order = decode_order(&gains);
        let normalized_gains = gains.iter().map(|g| g / noise_power_w).collect();
        Self {
            gains,
            distances,
            decode_order,
            normalized_gains,
        }
    }

    pub fn n_users(&self) -> usize {
        self.gains.len()
    }
}

/// Ascending-gain permutation with ties broken by user id.
pub fn decode_order(gains: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..gains.len()).collect();
    order.sort_by(|&a, &b| gains[a].total_cmp(&gains[b]).then(a.cmp(&b)));
    order
}

pub fn channel_state(placement: Placement, scenario: &Scenario) -> ChannelState {
    let distances: Vec<f64> = scenario
        .users
        .iter()
        .map(|&u| distance(placement, u, scenario.altitude_m))
        .collect();
    let gains = distances.iter().map(|&d| gain_at(d, scenario)).collect();
    ChannelState::from_gains(gains, distances, scenario.noise_power_w)
}

/// NOMA rates in bit/s/Hz: user `i` sees interference from every user decoded
/// after it (the stronger ones).
pub fn noma_spectral_rates(channel: &ChannelState, power: &[f64], noise_power_w: f64) -> Vec<f64> {
    let mut rates = vec![0.0; channel.n_users()];
    let mut stronger = 0.0;
    for &i in channel.decode_order.iter().rev() {
        let h = channel.gains[i];
        let sinr = h * power[i] / (noise_power_w + h * stronger);
        rates[i] = sinr.ln_1p() / LN_2;
        stronger += power[i];
    }
    rates
}

/// NOMA rates in bit/s.
pub fn noma_rates(channel: &ChannelState, power: &PowerAllocation, scenario: &Scenario) -> Vec<f64> {
    noma_spectral_rates(channel, power.watts(), scenario.noise_power_w)
        .into_iter()
        .map(|r| r * scenario.bandwidth_hz)
        .collect()
}

/// Which constraints a scheme is subject to. Non-negativity always applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub budget: bool,
    pub optical: bool,
    pub sic: bool,
    pub qos: bool,
    pub disc: bool,
}

impl ConstraintSet {
    pub const ALL: ConstraintSet = ConstraintSet {
        budget: true,
        optical: true,
        sic: true,
        qos: true,
        disc: true,
    };

    pub fn without_sic(self) -> Self {
        Self { sic: false, ..self }
    }
}

impl Default for ConstraintSet {
    fn default() -> Self {
        Self::ALL
    }
}

/// Residual of every constraint; `≤ 0` means satisfied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `Σp − P_max`.
    pub budget: f64,
    /// `Σ√p − C`.
    pub optical: f64,
    /// SIC gaps in decode order: `θ − h̄_{k+1}·(p_k − Σ_{j>k} p_j)`.
    pub sic: Vec<f64>,
    /// `R_min − R_i` per user id, in the units of the rates supplied.
    pub qos: Vec<f64>,
    /// `x² + y² − R²`.
    pub disc: f64,
    /// `−p_i` per user id.
    pub nonnegativity: Vec<f64>,
}

impl Residuals {
    /// Builds the residuals from precomputed channel state and rates.
    /// `rates` and `rate_min` must share a unit.
    pub fn evaluate(
        placement: Placement,
        power: &[f64],
        channel: &ChannelState,
        rates: &[f64],
        rate_min: f64,
        scenario: &Scenario,
    ) -> Self {
        let n = power.len();
        let budget = power.iter().sum::<f64>() - scenario.p_max_w;
        let optical = power.iter().map(|p| p.max(0.0).sqrt()).sum::<f64>() - scenario.optical_limit();

        let order = &channel.decode_order;
        let mut suffix = vec![0.0; n + 1];
        for k in (0..n).rev() {
            suffix[k] = suffix[k + 1] + power[order[k]];
        }
        let sic = (0..n.saturating_sub(1))
            .map(|k| {
                let next = channel.normalized_gains[order[k + 1]];
                scenario.theta - next * (power[order[k]] - suffix[k + 1])
            })
            .collect();

        Self {
            budget,
            optical,
            sic,
            qos: rates.iter().map(|r| rate_min - r).collect(),
            disc: placement.radius_sq() - scenario.disc_radius_m * scenario.disc_radius_m,
            nonnegativity: power.iter().map(|p| -p).collect(),
        }
    }

    /// Flattened as `[budget, optical, sic…, qos…, disc, nonnegativity…]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(3 + self.sic.len() + self.qos.len() + self.nonnegativity.len());
        v.push(self.budget);
        v.push(self.optical);
        v.extend_from_slice(&self.sic);
        v.extend_from_slice(&self.qos);
        v.push(self.disc);
        v.extend_from_slice(&self.nonnegativity);
        v
    }

    /// The penalized residuals `[budget, optical, sic…, qos…, disc]` (2N + 2 of
    /// them); entries of constraints outside `set` are reported as `None`.
    pub fn penalized(&self, set: ConstraintSet) -> impl Iterator<Item = Option<f64>> + '_ {
        let on = |flag: bool, v: f64| flag.then_some(v);
        std::iter::once(on(set.budget, self.budget))
            .chain(std::iter::once(on(set.optical, self.optical)))
            .chain(self.sic.iter().map(move |&v| on(set.sic, v)))
            .chain(self.qos.iter().map(move |&v| on(set.qos, v)))
            .chain(std::iter::once(on(set.disc, self.disc)))
    }

    /// True when every residual in `set` (plus non-negativity) is within
    /// tolerance of its natural scale. `rate_min` is in the unit of `qos`.
    pub fn is_feasible(&self, set: ConstraintSet, scenario: &Scenario, rate_min: f64) -> bool {
        let ok = |g: f64, scale: f64| g <= FEASIBILITY_TOLERANCE * scale;
        let theta_scale = if scenario.theta > 0.0 { scenario.theta } else { 1.0 };
        let rate_scale = if rate_min > 0.0 { rate_min } else { 1.0 };
        (!set.budget || ok(self.budget, scenario.p_max_w))
            && (!set.optical || ok(self.optical, scenario.optical_limit()))
            && (!set.sic || self.sic.iter().all(|&g| ok(g, theta_scale)))
            && (!set.qos || self.qos.iter().all(|&g| ok(g, rate_scale)))
            && (!set.disc || ok(self.disc, scenario.disc_radius_m * scenario.disc_radius_m))
            && self.nonnegativity.iter().all(|&g| ok(g, scenario.p_max_w))
    }
}

/// All residuals in physical units (QoS in bit/s) for a NOMA downlink.
pub fn constraint_residuals(placement: Placement, power: &PowerAllocation, scenario: &Scenario) -> Residuals {
    let channel = channel_state(placement, scenario);
    let rates = noma_rates(&channel, power, scenario);
    Residuals::evaluate(
        placement,
        power.watts(),
        &channel,
        &rates,
        scenario.rate_min_bps,
        scenario,
    )
}
