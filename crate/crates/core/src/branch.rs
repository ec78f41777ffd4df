//! Photon-loss branches of a definite-photon-number state.
//!
//! Losing `l` photons from arm a and `m` from arm b maps `|k, N-k>` to
//! `|k-l, N-k-m>` with probability `B^k_{lm}`. The lossy state is the mixture of
//! the resulting conditional pure states, one per branch `(l, m)`.

use serde::Serialize;

use crate::binomial::{binomial, pow};
use crate::error::{contract, Result};
use crate::state::{InputState, LossModel};

/// Branches whose probability falls below this are dropped from decompositions.
pub const BRANCH_CUTOFF: f64 = 1e-15;

/// Probability `B^k_{lm}` that the component `|k, N-k>` loses exactly `l` photons
/// from arm a and `m` from arm b.
pub fn branch_coefficient(k: usize, l: usize, m: usize, n: usize, loss: LossModel) -> Result<f64> {
    if k > n || l > k || m > n - k {
        return contract(format!(
            "branch index out of range: need l <= k <= n and m <= n - k (k={k}, l={l}, m={m}, n={n})"
        ));
    }
    Ok(coefficient(k, l, m, n, loss))
}

fn coefficient(k: usize, l: usize, m: usize, n: usize, loss: LossModel) -> f64 {
    let LossModel { eta_a, eta_b } = loss;
    binomial(k, l)
        * binomial(n - k, m)
        * pow(eta_a, k - l)
        * pow(1.0 - eta_a, l)
        * pow(eta_b, n - k - m)
        * pow(1.0 - eta_b, m)
}

/// Loss pattern `(l, m)` with `B^k_{lm}` for every contributing `k`.
#[derive(Debug, Clone)]
pub(crate) struct KernelRow {
    pub l: usize,
    pub m: usize,
    /// `coefficients[i]` belongs to `k = l + i`.
    pub coefficients: Vec<f64>,
}

impl KernelRow {
    pub fn ks(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.coefficients
            .iter()
            .enumerate()
            .map(move |(i, &b)| (self.l + i, b))
    }
}

/// Every `B^k_{lm}` for fixed `N` and loss model, ordered by `l` then `m`.
/// Rows that vanish identically (e.g. `l > 0` at `eta_a = 1`) are left out.
#[derive(Debug, Clone)]
pub(crate) struct LossKernel {
    pub rows: Vec<KernelRow>,
}

impl LossKernel {
    pub fn new(n: usize, loss: LossModel) -> Self {
        let mut rows = Vec::new();
        for l in 0..=n {
            if l > 0 && loss.eta_a == 1.0 {
                break;
            }
            for m in 0..=n - l {
                if m > 0 && loss.eta_b == 1.0 {
                    break;
                }
                let coefficients: Vec<f64> =
                    (l..=n - m).map(|k| coefficient(k, l, m, n, loss)).collect();
                if coefficients.iter().any(|&b| b > 0.0) {
                    rows.push(KernelRow { l, m, coefficients });
                }
            }
        }
        Self { rows }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branch {
    /// Photons lost from arm a.
    pub l: usize,
    /// Photons lost from arm b.
    pub m: usize,
    pub probability: f64,
    /// Normalized conditional amplitudes; entry `j` multiplies `|j, N-l-m-j>`.
    pub amplitudes: Vec<f64>,
}

impl Branch {
    /// Photons left after the loss.
    pub fn surviving(&self) -> usize {
        self.amplitudes.len() - 1
    }

    /// Variance of the surviving arm-a photon count in this branch.
    pub fn variance(&self) -> f64 {
        let mut mean = 0.0;
        let mut second = 0.0;
        for (j, a) in self.amplitudes.iter().enumerate() {
            let w = a * a;
            mean += j as f64 * w;
            second += (j * j) as f64 * w;
        }
        (second - mean * mean).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchDecomposition {
    pub n: usize,
    pub branches: Vec<Branch>,
}

impl BranchDecomposition {
    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }
}

/// Splits the lossy state into its conditional pure branches.
pub fn decompose(state: &InputState, loss: LossModel) -> BranchDecomposition {
    let n = state.n();
    let x = state.weights();
    let kernel = LossKernel::new(n, loss);
    let mut branches = Vec::with_capacity(kernel.rows.len());
    for row in &kernel.rows {
        let surviving = n - row.l - row.m;
        let mut amplitudes = vec![0.0; surviving + 1];
        let mut probability = 0.0;
        for (k, b) in row.ks() {
            let w = x[k] * b;
            probability += w;
            amplitudes[k - row.l] = w;
        }
        if probability < BRANCH_CUTOFF {
            continue;
        }
        amplitudes
            .iter_mut()
            .for_each(|a| *a = (*a / probability).sqrt());
        branches.push(Branch {
            l: row.l,
            m: row.m,
            probability,
            amplitudes,
        });
    }
    BranchDecomposition { n, branches }
}
