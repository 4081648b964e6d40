//! Single-hidden-layer feedforward network whose weights are a flat genome,
//! so that population methods can train it.

pub mod data;
pub mod train;

pub use data::Dataset;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vlc::{channel_state, noma_spectral_rates, Placement, PowerAllocation, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    /// `1 / (1 + e^−x)`
    #[default]
    UnipolarSigmoid,
    /// `(1 − e^−x) / (1 + e^−x)`
    BipolarSigmoid,
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::UnipolarSigmoid => 1.0 / (1.0 + (-x).exp()),
            Activation::BipolarSigmoid => (0.5 * x).tanh(),
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub inputs: usize,
    pub hidden: usize,
    pub outputs: usize,
    #[serde(default)]
    pub activation: Activation,
}

impl Topology {
    pub fn new(inputs: usize, hidden: usize, outputs: usize) -> Self {
        Self {
            inputs,
            hidden,
            outputs,
            activation: Activation::default(),
        }
    }

    /// `2N` inputs, `N + 2` hidden and `N + 2` outputs.
    pub fn for_users(n_users: usize) -> Self {
        Self::new(2 * n_users, n_users + 2, n_users + 2)
    }

    pub fn genome_length(&self) -> usize {
        let (i, h, o) = (self.inputs, self.hidden, self.outputs);
        i * h + h * o + h + o
    }

    fn offsets(&self) -> [usize; 3] {
        let ih = self.inputs * self.hidden;
        let ho = ih + self.hidden * self.outputs;
        [ih, ho, ho + self.hidden]
    }
}

/// Weight slices of a flat genome
/// `[input→hidden (row per input), hidden→output (row per hidden), hidden biases, output biases]`.
#[derive(Debug, Clone, Copy)]
pub struct GenomeView<'a> {
    pub input_hidden: &'a [f64],
    pub hidden_output: &'a [f64],
    pub hidden_bias: &'a [f64],
    pub output_bias: &'a [f64],
}

pub fn view<'a>(topology: &Topology, flat: &'a [f64]) -> Result<GenomeView<'a>> {
    if flat.len() != topology.genome_length() {
        return Err(Error::invalid(format!(
            "genome has {} values, topology needs {}",
            flat.len(),
            topology.genome_length()
        )));
    }
    let [a, b, c] = topology.offsets();
    Ok(GenomeView {
        input_hidden: &flat[..a],
        hidden_output: &flat[a..b],
        hidden_bias: &flat[b..c],
        output_bias: &flat[c..],
    })
}

/// Concatenates weight blocks into the flat layout.
pub fn encode(topology: &Topology, parts: GenomeView<'_>) -> Result<Vec<f64>> {
    let [a, b, c] = topology.offsets();
    let want = [a, b - a, c - b, topology.outputs];
    let got = [
        parts.input_hidden.len(),
        parts.hidden_output.len(),
        parts.hidden_bias.len(),
        parts.output_bias.len(),
    ];
    if want != got {
        return Err(Error::invalid(format!(
            "weight block sizes {got:?} do not match the topology {want:?}"
        )));
    }
    Ok([
        parts.input_hidden,
        parts.hidden_output,
        parts.hidden_bias,
        parts.output_bias,
    ]
    .concat())
}

/// A network saved to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Genome {
    pub topology: Topology,
    pub flat: Vec<f64>,
}

impl Genome {
    pub fn new(topology: Topology, flat: Vec<f64>) -> Result<Self> {
        view(&topology, &flat)?;
        Ok(Self { topology, flat })
    }

    pub fn zeros(topology: Topology) -> Self {
        Self {
            topology,
            flat: vec![0.0; topology.genome_length()],
        }
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        forward(&self.flat, &self.topology, input)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let g: Genome = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        view(&g.topology, &g.flat)?;
        Ok(g)
    }
}

/// Hidden layer through the activation, linear output layer.
pub fn forward(flat: &[f64], topology: &Topology, input: &[f64]) -> Result<Vec<f64>> {
    if input.len() != topology.inputs {
        return Err(Error::invalid(format!(
            "input has {} values, network expects {}",
            input.len(),
            topology.inputs
        )));
    }
    let g = view(topology, flat)?;
    let (h, o) = (topology.hidden, topology.outputs);
    let mut hidden = g.hidden_bias.to_vec();
    for (x, row) in input.iter().zip(g.input_hidden.chunks_exact(h)) {
        for (acc, w) in hidden.iter_mut().zip(row) {
            *acc += w * x;
        }
    }
    let mut out = g.output_bias.to_vec();
    for (z, row) in hidden.iter().zip(g.hidden_output.chunks_exact(o)) {
        let z = topology.activation.apply(*z);
        for (acc, w) in out.iter_mut().zip(row) {
            *acc += w * z;
        }
    }
    Ok(out)
}

/// Z-scores of the user coordinates, `[x̂_1…x̂_N, ŷ_1…ŷ_N]`, using the
/// population standard deviation; a degenerate axis maps to zeros.
pub fn normalize_locations(scenario: &Scenario) -> Vec<f64> {
    let xs: Vec<f64> = scenario.users.iter().map(|u| u.x).collect();
    let ys: Vec<f64> = scenario.users.iter().map(|u| u.y).collect();
    let mut out = standardize(&xs);
    out.extend(standardize(&ys));
    out
}

fn standardize(v: &[f64]) -> Vec<f64> {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    if sd <= 1e-12 * (1.0 + mean.abs()) {
        return vec![0.0; v.len()];
    }
    v.iter().map(|x| (x - mean) / sd).collect()
}

/// Clamps the raw outputs, scales them to a placement inside the disc and a
/// power vector, and scales the powers down to the budget when they exceed it.
pub fn decode_outputs(raw: &[f64], scenario: &Scenario) -> Result<(Placement, PowerAllocation)> {
    let n = scenario.n_users();
    if raw.len() != n + 2 {
        return Err(Error::invalid(format!("expected {} outputs, got {}", n + 2, raw.len())));
    }
    let r = scenario.disc_radius_m;
    let clamp = |v: f64, lo: f64| if v.is_nan() { 0.0 } else { v.clamp(lo, 1.0) };
    let mut p = Placement::new(r * clamp(raw[0], -1.0), r * clamp(raw[1], -1.0));
    let rho = p.radius_sq().sqrt();
    if rho > r {
        p.x *= r / rho;
        p.y *= r / rho;
    }
    let mut power: Vec<f64> = raw[2..].iter().map(|&v| scenario.p_max_w * clamp(v, 0.0)).collect();
    let total: f64 = power.iter().sum();
    if total > scenario.p_max_w {
        let k = scenario.p_max_w / total;
        power.iter_mut().for_each(|w| *w *= k);
    }
    Ok((p, PowerAllocation(power)))
}

/// Sum rate (bit/s/Hz) of the network's decision for `scenario`.
pub fn network_sum_rate(flat: &[f64], topology: &Topology, scenario: &Scenario) -> Result<f64> {
    let (placement, power) = network_decision(flat, topology, scenario)?;
    let ch = channel_state(placement, scenario);
    Ok(noma_spectral_rates(&ch, power.watts(), scenario.noise_power_w)
        .iter()
        .sum())
}

pub fn network_decision(
    flat: &[f64],
    topology: &Topology,
    scenario: &Scenario,
) -> Result<(Placement, PowerAllocation)> {
    let raw = forward(flat, topology, &normalize_locations(scenario))?;
    decode_outputs(&raw, scenario)
}

/// Negative sum rate.
pub fn loss_sum_rate(flat: &[f64], topology: &Topology, scenario: &Scenario) -> Result<f64> {
    Ok(-network_sum_rate(flat, topology, scenario)?)
}

/// Squared gap to a reference sum rate (same unit as the network's sum rate).
pub fn loss_rate_gap(flat: &[f64], topology: &Topology, scenario: &Scenario, reference: f64) -> Result<f64> {
    Ok((reference - network_sum_rate(flat, topology, scenario)?).powi(2))
}
