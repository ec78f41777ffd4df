//! Definite-photon-number two-mode input states and the two-arm loss model.

use serde::{Deserialize, Serialize};

use crate::binomial::binomial;
use crate::error::{contract, Result};

/// Slack allowed on the simplex constraints before a weight vector is rejected.
pub const SIMPLEX_SLACK: f64 = 1e-12;

/// Pure state `sum_k alpha_k |k, N-k>` stored through its weights `x_k = |alpha_k|^2`.
///
/// Amplitude phases do not enter any of the quantities computed here, so only the
/// weights are kept.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputState {
    weights: Vec<f64>,
}

impl InputState {
    /// Builds a state from `N + 1` weights.
    ///
    /// Weights within [`SIMPLEX_SLACK`] of the probability simplex are clipped and
    /// renormalized; anything further away is rejected.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return contract("weight vector must have at least one entry");
        }
        if let Some(k) = weights.iter().position(|w| !w.is_finite()) {
            return contract(format!("weight x_{k} is not finite"));
        }
        if let Some(k) = weights.iter().position(|&w| w < -SIMPLEX_SLACK) {
            return contract(format!("weight x_{k} = {} is negative", weights[k]));
        }
        let mut weights: Vec<f64> = weights.into_iter().map(|w| w.max(0.0)).collect();
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_SLACK {
            return contract(format!("weights sum to {total}, expected 1"));
        }
        if total != 1.0 {
            weights.iter_mut().for_each(|w| *w /= total);
        }
        Ok(Self { weights })
    }

    /// Total photon number `N`.
    pub fn n(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    /// Mean photon number in arm a.
    pub fn mean_a(&self) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(k, x)| k as f64 * x)
            .sum()
    }

    /// Indices with weight above `threshold`, paired with their weights.
    pub fn support(&self, threshold: f64) -> Vec<(usize, f64)> {
        self.weights
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, x)| x > threshold)
            .collect()
    }

    pub fn preset(kind: &StateKind, n: usize) -> Result<Self> {
        preset_state(kind, n)
    }
}

impl<'de> Deserialize<'de> for InputState {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            weights: Vec<f64>,
        }
        let raw = Raw::deserialize(de)?;
        InputState::new(raw.weights).map_err(serde::de::Error::custom)
    }
}

/// Transmissivities of the fictitious beam splitters in arms a and b.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossModel {
    pub eta_a: f64,
    pub eta_b: f64,
}

impl LossModel {
    pub fn new(eta_a: f64, eta_b: f64) -> Result<Self> {
        for (name, eta) in [("eta_a", eta_a), ("eta_b", eta_b)] {
            if !(0.0..=1.0).contains(&eta) {
                return contract(format!("{name} = {eta} is outside [0, 1]"));
            }
        }
        Ok(Self { eta_a, eta_b })
    }

    pub fn lossless() -> Self {
        Self {
            eta_a: 1.0,
            eta_b: 1.0,
        }
    }

    /// Equal transmissivity in both arms.
    pub fn symmetric(eta: f64) -> Result<Self> {
        Self::new(eta, eta)
    }

    /// Loss in arm a only.
    pub fn one_arm(eta: f64) -> Result<Self> {
        Self::new(eta, 1.0)
    }

    /// Arms exchanged.
    pub fn swapped(self) -> Self {
        Self {
            eta_a: self.eta_b,
            eta_b: self.eta_a,
        }
    }
}

/// Named families of input states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StateKind {
    /// `(|N,0> + |0,N>)/sqrt 2`.
    Noon,
    /// `sqrt(p)|N,0> + sqrt(1-p)|0,N>`.
    UnbalancedNoon { p: f64 },
    /// `sqrt(p)|m,N-m> + sqrt(1-p)|N,0>`.
    TwoComponent { m: usize, p: f64 },
    /// `(|m,N-m> + |N-m,m>)/sqrt 2`.
    SymmetricTwoComponent { m: usize },
    /// `|N/2,N/2>` fed through a balanced beam splitter, expressed in the arm basis.
    TwinFock,
    /// Single product component `|m,N-m>`.
    Fock { m: usize },
    /// Equal weight on every component.
    Uniform,
}

impl StateKind {
    pub fn name(&self) -> &'static str {
        match self {
            StateKind::Noon => "noon",
            StateKind::UnbalancedNoon { .. } => "unbalanced-noon",
            StateKind::TwoComponent { .. } => "two-component",
            StateKind::SymmetricTwoComponent { .. } => "symmetric-two-component",
            StateKind::TwinFock => "twin-fock",
            StateKind::Fock { .. } => "fock",
            StateKind::Uniform => "uniform",
        }
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return contract(format!("p = {p} is outside [0, 1]"));
    }
    Ok(())
}

fn check_index(m: usize, n: usize) -> Result<()> {
    if m > n {
        return contract(format!("m = {m} exceeds n = {n}"));
    }
    Ok(())
}

/// Weight vector of a preset state with `n` photons.
pub fn preset_state(kind: &StateKind, n: usize) -> Result<InputState> {
    if n == 0 {
        return contract("preset states need n >= 1");
    }
    let mut x = vec![0.0; n + 1];
    match *kind {
        StateKind::Noon => {
            x[0] = 0.5;
            x[n] = 0.5;
        }
        StateKind::UnbalancedNoon { p } => {
            check_probability(p)?;
            x[n] = p;
            x[0] = 1.0 - p;
        }
        StateKind::TwoComponent { m, p } => {
            check_probability(p)?;
            check_index(m, n)?;
            x[m] += p;
            x[n] += 1.0 - p;
        }
        StateKind::SymmetricTwoComponent { m } => {
            check_index(m, n)?;
            x[m] += 0.5;
            x[n - m] += 0.5;
        }
        StateKind::TwinFock => {
            if !n.is_multiple_of(2) {
                return contract(format!("twin Fock state needs even n, got {n}"));
            }
            // A balanced beam splitter maps |j,j> onto even arm-a counts 2a with
            // probability C(2a,a) C(2b,b) / 4^j, where a + b = j.
            let half = n / 2;
            let norm = 4f64.powi(half as i32);
            for a in 0..=half {
                let b = half - a;
                x[2 * a] = binomial(2 * a, a) * binomial(2 * b, b) / norm;
            }
        }
        StateKind::Fock { m } => {
            check_index(m, n)?;
            x[m] = 1.0;
        }
        StateKind::Uniform => {
            x.iter_mut().for_each(|w| *w = 1.0 / (n + 1) as f64);
        }
    }
    InputState::new(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_their_definitions() {
        let noon = preset_state(&StateKind::Noon, 4).unwrap();
        assert_eq!(noon.weights(), &[0.5, 0.0, 0.0, 0.0, 0.5]);

        let fock = preset_state(&StateKind::Fock { m: 2 }, 4).unwrap();
        assert_eq!(fock.weights(), &[0.0, 0.0, 1.0, 0.0, 0.0]);

        let two = preset_state(&StateKind::TwoComponent { m: 1, p: 0.3 }, 5).unwrap();
        assert_eq!(two.weights(), &[0.0, 0.3, 0.0, 0.0, 0.0, 0.7]);

        let sym = preset_state(&StateKind::SymmetricTwoComponent { m: 2 }, 6).unwrap();
        assert_eq!(sym.weights(), &[0.0, 0.0, 0.5, 0.0, 0.5, 0.0, 0.0]);
    }

    #[test]
    fn twin_fock_arm_weights() {
        let twin = preset_state(&StateKind::TwinFock, 4).unwrap();
        let expected = [0.375, 0.0, 0.25, 0.0, 0.375];
        for (x, e) in twin.weights().iter().zip(expected) {
            assert!((x - e).abs() < 1e-15);
        }
        assert!(preset_state(&StateKind::TwinFock, 5).is_err());
    }

    #[test]
    fn degenerate_two_component_collapses() {
        let s = preset_state(&StateKind::TwoComponent { m: 3, p: 0.4 }, 3).unwrap();
        assert_eq!(s.weights(), &[0.0, 0.0, 0.0, 1.0]);
        let s = preset_state(&StateKind::SymmetricTwoComponent { m: 2 }, 4).unwrap();
        assert_eq!(s.weights(), &[0.0, 0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn rejects_bad_presets() {
        assert!(preset_state(&StateKind::Noon, 0).is_err());
        assert!(preset_state(&StateKind::TwoComponent { m: 6, p: 0.5 }, 5).is_err());
        assert!(preset_state(&StateKind::UnbalancedNoon { p: 1.5 }, 5).is_err());
    }

    #[test]
    fn near_simplex_weights_are_renormalized() {
        let s = InputState::new(vec![0.5 + 4e-13, -1e-13, 0.5]).unwrap();
        assert_eq!(s.weights()[1], 0.0);
        assert!((s.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn off_simplex_weights_are_rejected() {
        assert!(InputState::new(vec![0.5, 0.6]).is_err());
        assert!(InputState::new(vec![1.1, -0.1]).is_err());
        assert!(InputState::new(vec![f64::NAN, 1.0]).is_err());
        assert!(InputState::new(vec![]).is_err());
    }

    #[test]
    fn loss_model_range() {
        assert!(LossModel::new(1.2, 0.5).is_err());
        assert!(LossModel::new(0.5, -0.1).is_err());
        assert!(LossModel::new(0.0, 1.0).is_ok());
    }

    #[test]
    fn deserializing_validates() {
        let ok: InputState = serde_json::from_str(r#"{"weights":[0.25,0.75]}"#).unwrap();
        assert_eq!(ok.n(), 1);
        assert!(serde_json::from_str::<InputState>(r#"{"weights":[0.25,0.25]}"#).is_err());
    }
}
