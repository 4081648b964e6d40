//! Flat key/value experiment configuration (TOML) and scenario generation.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fnn::train::{Algorithm, LossKind};
use crate::hho::HhoParams;
use crate::planner::Scheme;
use crate::seed::{derive, stream_rng};
use crate::vlc::{OpticalParams, Scenario, UserPosition};

/// Parameter varied by a sweep. Values are in the config's natural units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// mW
    PMax,
    /// degrees
    Fov,
    /// m
    DiscRadius,
    /// m
    Altitude,
    NUsers,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::PMax => "p_max",
            SweepParameter::Fov => "fov",
            SweepParameter::DiscRadius => "disc_radius",
            SweepParameter::Altitude => "altitude",
            SweepParameter::NUsers => "n_users",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            SweepParameter::PMax => "mW",
            SweepParameter::Fov => "deg",
            SweepParameter::DiscRadius | SweepParameter::Altitude => "m",
            SweepParameter::NUsers => "users",
        }
    }

    pub fn default_values(self) -> Vec<f64> {
        match self {
            SweepParameter::PMax => vec![20.0, 40.0, 60.0, 80.0, 100.0],
            SweepParameter::Fov => vec![40.0, 45.0, 50.0],
            SweepParameter::DiscRadius => vec![6.0, 8.0, 10.0, 12.0, 14.0],
            SweepParameter::Altitude => vec![1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0],
            SweepParameter::NUsers => vec![10.0, 15.0, 20.0],
        }
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use SweepParameter::*;
        [PMax, Fov, DiscRadius, Altitude, NUsers]
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown sweep parameter {s:?}")))
    }
}

/// Side of the square the users are dropped in: a fixed length, or `"cell"`
/// to follow the disc radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UserSquare {
    Cell,
    Side(f64),
}

impl UserSquare {
    pub fn side(self, disc_radius_m: f64) -> f64 {
        match self {
            UserSquare::Cell => disc_radius_m,
            UserSquare::Side(s) => s,
        }
    }
}

impl Serialize for UserSquare {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            UserSquare::Cell => s.serialize_str("cell"),
            UserSquare::Side(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for UserSquare {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(UserSquare::Side(v)),
            Raw::Int(v) => Ok(UserSquare::Side(v as f64)),
            Raw::Text(t) if t == "cell" => Ok(UserSquare::Cell),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "user_square_m must be a length or \"cell\", got {t:?}"
            ))),
        }
    }
}

/// Every experiment knob. Keys are flat; units are in the key names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub master_seed: u64,

    pub n_users: usize,
    pub altitude_m: f64,
    pub disc_radius_m: f64,
    pub user_square_m: UserSquare,
    pub p_max_mw: f64,
    pub dc_bias: f64,
    pub peak_intensity: f64,
    pub delta: f64,
    pub noise_dbm: f64,
    pub bandwidth_hz: f64,
    pub theta: f64,
    pub rate_min_kbps: f64,
    pub detector_area_cm2: f64,
    pub filter_gain: f64,
    pub refractive_index: f64,
    pub fov_deg: f64,
    pub semiangle_deg: f64,

    pub population: usize,
    pub iterations: usize,
    pub realizations: usize,
    pub schemes: Vec<Scheme>,
    pub grpa_alpha: f64,
    pub sweep_parameter: SweepParameter,
    /// Empty means the default grid of `sweep_parameter`.
    pub sweep_values: Vec<f64>,
    pub convergence_users: Vec<usize>,
    pub convergence_runs: usize,
    /// Worker threads; 0 uses every core.
    pub parallel: usize,
    pub record_timing: bool,

    pub trainer_loss: LossKind,
    pub trainer_algorithms: Vec<Algorithm>,
    pub trainer_runs: usize,
    pub trainer_population: usize,
    pub trainer_iterations: usize,
    pub trainer_tolerance: f64,
    pub trainer_patience: usize,
    pub weight_bound: f64,
    /// Scenario realizations the network is trained on.
    pub train_batch: usize,
    /// Held-out realizations used to compare trained networks with HHOPAP.
    pub eval_batch: usize,
    /// Directory holding `iris.csv` and `cancer.csv`; empty uses the bundled copies.
    pub dataset_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            master_seed: 20_240_601,
            n_users: 20,
            altitude_m: 3.0,
            disc_radius_m: 10.0,
            user_square_m: UserSquare::Cell,
            p_max_mw: 20.0,
            dc_bias: 20.0,
            peak_intensity: 30.0,
            delta: 3.0 * 5f64.sqrt() / 5.0,
            noise_dbm: -104.0,
            bandwidth_hz: 20e6,
            theta: 1.0,
            rate_min_kbps: 200.0,
            detector_area_cm2: 1.0,
            filter_gain: 1.0,
            refractive_index: 1.5,
            fov_deg: 45.0,
            semiangle_deg: 60.0,
            population: 30,
            iterations: 350,
            realizations: 100,
            schemes: Scheme::ALL.to_vec(),
            grpa_alpha: 0.4,
            sweep_parameter: SweepParameter::PMax,
            sweep_values: Vec::new(),
            convergence_users: vec![10, 15, 20],
            convergence_runs: 1,
            parallel: 0,
            record_timing: false,
            trainer_loss: LossKind::DatasetMse,
            trainer_algorithms: Algorithm::ALL.to_vec(),
            trainer_runs: 10,
            trainer_population: 30,
            trainer_iterations: 500,
            trainer_tolerance: 1e-9,
            trainer_patience: 50,
            weight_bound: 10.0,
            train_batch: 20,
            eval_batch: 20,
            dataset_dir: PathBuf::new(),
        }
    }
}

/// `dBm → W`.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Loads `path` (or the defaults) and applies `key=value` overrides, each
    /// value parsed as a TOML value and falling back to a bare string.
    pub fn load_with_overrides(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut table: toml::Table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("cannot read config {}: {e}", p.display())))?;
                text.parse()?
            }
            None => toml::Table::new(),
        };
        for (k, v) in overrides {
            let value = format!("v = {v}")
                .parse::<toml::Table>()
                .ok()
                .and_then(|mut t| t.remove("v"))
                .unwrap_or_else(|| toml::Value::String(v.clone()));
            table.insert(k.clone(), value);
        }
        let cfg = Self::deserialize(table).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.realizations == 0 {
            return bad("realizations must be at least 1");
        }
        if self.schemes.is_empty() {
            return bad("at least one scheme is required");
        }
        if self.population == 0 || self.iterations == 0 {
            return bad("population and iterations must be positive");
        }
        if !(self.grpa_alpha > 0.0 && self.grpa_alpha < 1.0) {
            return bad("grpa_alpha must lie in (0, 1)");
        }
        if let UserSquare::Side(s) = self.user_square_m {
            if !(s > 0.0) {
                return bad("user_square_m must be positive");
            }
        }
        if !(self.trainer_tolerance > 0.0) {
            return bad("trainer_tolerance must be positive");
        }
        if self.trainer_patience == 0 || self.trainer_runs == 0 || self.train_batch == 0 || self.eval_batch == 0 {
            return bad("trainer_patience, trainer_runs, train_batch and eval_batch must be positive");
        }
        if self.convergence_users.iter().any(|&n| n < 2) {
            return bad("convergence_users entries must be at least 2");
        }
        self.scenario_template(self.n_users).validate_parameters()
    }

    pub fn hho_params(&self) -> HhoParams {
        HhoParams::new(self.population, self.iterations)
    }

    pub fn sweep_grid(&self) -> Vec<f64> {
        if self.sweep_values.is_empty() {
            self.sweep_parameter.default_values()
        } else {
            self.sweep_values.clone()
        }
    }

    /// Copy with `parameter` set to `value`.
    pub fn with_parameter(&self, parameter: SweepParameter, value: f64) -> Result<Self> {
        let mut c = self.clone();
        match parameter {
            SweepParameter::PMax => c.p_max_mw = value,
            SweepParameter::Fov => c.fov_deg = value,
            SweepParameter::DiscRadius => c.disc_radius_m = value,
            SweepParameter::Altitude => c.altitude_m = value,
            SweepParameter::NUsers => {
                if value.fract() != 0.0 || value < 2.0 {
                    return Err(Error::Config(format!(
                        "n_users sweep value must be an integer ≥ 2, got {value}"
                    )));
                }
                c.n_users = value as usize;
            }
        }
        c.validate()?;
        Ok(c)
    }

    fn scenario_template(&self, n_users: usize) -> Template {
        Template {
            scenario: Scenario {
                users: Vec::with_capacity(n_users),
                altitude_m: self.altitude_m,
                disc_radius_m: self.disc_radius_m,
                p_max_w: self.p_max_mw * 1e-3,
                dc_bias: self.dc_bias,
                peak_intensity: self.peak_intensity,
                delta: self.delta,
                noise_power_w: dbm_to_watts(self.noise_dbm),
                bandwidth_hz: self.bandwidth_hz,
                theta: self.theta,
                rate_min_bps: self.rate_min_kbps * 1e3,
                optics: OpticalParams {
                    detector_area_m2: self.detector_area_cm2 * 1e-4,
                    filter_gain: self.filter_gain,
                    refractive_index: self.refractive_index,
                    fov_rad: self.fov_deg.to_radians(),
                    semiangle_rad: self.semiangle_deg.to_radians(),
                },
            },
        }
    }

    /// Seed of realization `index`.
    pub fn scenario_seed(&self, index: usize) -> u64 {
        derive(self.master_seed, index as u64)
    }

    /// Solver seed for `scheme` on realization `index`; independent of the
    /// swept parameter so every sweep point reuses the same random numbers.
    pub fn solver_seed(&self, index: usize, scheme: Scheme) -> u64 {
        let slot = Scheme::ALL.iter().position(|&s| s == scheme).unwrap_or(0);
        derive(self.scenario_seed(index), 1 + slot as u64)
    }

    /// Realization `index` with `n_users` users.
    pub fn scenario_with_users(&self, index: usize, n_users: usize) -> Scenario {
        let mut s = self.scenario_template(n_users).scenario;
        let side = self.user_square_m.side(self.disc_radius_m);
        let mut rng = stream_rng(self.scenario_seed(index), 0);
        // draws are prefix-stable in N and scale-free in the square side
        for _ in 0..n_users {
            let u: f64 = rng.random::<f64>() - 0.5;
            let v: f64 = rng.random::<f64>() - 0.5;
            s.users.push(UserPosition {
                x: u * side,
                y: v * side,
            });
        }
        s
    }

    pub fn generate_scenario(&self, index: usize) -> Scenario {
        self.scenario_with_users(index, self.n_users)
    }
}

struct Template {
    scenario: Scenario,
}

impl Template {
    fn validate_parameters(mut self) -> Result<()> {
        self.scenario.users = vec![UserPosition { x: 0.0, y: 0.0 }; 2];
        self.scenario.validate().map_err(|e| Error::Config(e.to_string()))
    }
}
