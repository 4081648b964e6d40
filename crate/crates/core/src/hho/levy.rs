//! Lévy-flight step generator used by the progressive rapid dives.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};

/// Default stability index of the Lévy distribution.
pub const DEFAULT_BETA: f64 = 1.5;

/// Scale factor applied to every Lévy step.
const STEP_SCALE: f64 = 0.01;

/// Mantegna scale parameter
/// `(Γ(1+β)·sin(πβ/2) / (Γ((1+β)/2)·β·2^((β−1)/2)))^(1/β)`.
pub fn levy_sigma(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 2.0) {
        return Err(Error::invalid(format!("levy beta must lie in (0, 2], got {beta}")));
    }
    let num = libm::tgamma(1.0 + beta) * (PI * beta / 2.0).sin();
    let den = libm::tgamma((1.0 + beta) / 2.0) * beta * 2f64.powf((beta - 1.0) / 2.0);
    Ok((num / den).powf(1.0 / beta))
}

/// One Lévy step component from explicit draws `u`, `v`.
#[inline]
pub fn levy_component(u: f64, v: f64, sigma: f64, beta: f64) -> f64 {
    STEP_SCALE * u * sigma / v.abs().powf(1.0 / beta)
}

/// Draws a `dim`-dimensional Lévy step. `u` and `v` are uniform; `v` is kept
/// in `(0, 1]` so the step stays finite.
pub fn levy_flight<R: Rng + ?Sized>(dim: usize, beta: f64, sigma: f64, rng: &mut R) -> Vec<f64> {
    (0..dim)
        .map(|_| {
            let u: f64 = rng.random();
            let v: f64 = 1.0 - rng.random::<f64>();
            levy_component(u, v, sigma, beta)
        })
        .collect()
}
