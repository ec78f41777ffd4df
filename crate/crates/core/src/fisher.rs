//! Quantum Fisher information of the phase imprinted on arm a.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binomial::Compensated;
use crate::branch::{decompose, LossKernel};
use crate::error::{Error, Result};
use crate::state::{InputState, LossModel};

/// Relative eigenvalue floor for the `p_i + p_j` denominators of the exact formula.
pub const EIGEN_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QfiMethod {
    /// Lossless pure state, `4 Var(n_a)`.
    Pure,
    /// Convexity upper bound over loss branches.
    Bound,
    /// Loss in arm a only, where the branch formula is exact.
    OneArm,
    /// Eigendecomposition of the lossy density matrix.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QfiResult {
    pub value: f64,
    pub method: QfiMethod,
}

impl QfiResult {
    fn new(value: f64, method: QfiMethod) -> Self {
        Self {
            value: value.max(0.0),
            method,
        }
    }

    /// Cramér-Rao precision `1/sqrt(F_Q)` per run; `None` when the state carries no
    /// phase information.
    pub fn precision(&self) -> Option<f64> {
        (self.value > 0.0).then(|| 1.0 / self.value.sqrt())
    }

    /// Precision with `+inf` standing in for a vanishing Fisher information.
    pub fn precision_or_inf(&self) -> f64 {
        self.precision().unwrap_or(f64::INFINITY)
    }
}

/// `4 Var(n_a)` of the lossless state.
pub fn qfi_pure(state: &InputState) -> QfiResult {
    let mean = state.mean_a();
    let var: f64 = state
        .weights()
        .iter()
        .enumerate()
        .map(|(k, x)| x * (k as f64 - mean).powi(2))
        .sum();
    QfiResult::new(4.0 * var, QfiMethod::Pure)
}

/// Branch sums `P = sum_k x_k B` and `S = sum_k k x_k B` for every kernel row.
fn branch_moments(kernel: &LossKernel, x: &[f64]) -> Vec<(f64, f64)> {
    kernel
        .rows
        .iter()
        .map(|row| {
            let mut p = Compensated::default();
            let mut s = Compensated::default();
            for (k, b) in row.ks() {
                let w = x[k] * b;
                p.add(w);
                s.add(k as f64 * w);
            }
            (p.value(), s.value())
        })
        .collect()
}

pub(crate) fn bound_value(kernel: &LossKernel, x: &[f64]) -> f64 {
    let mut total = Compensated::default();
    let mut scale = 0.0;
    for (k, xk) in x.iter().enumerate() {
        let t = (k * k) as f64 * xk;
        total.add(t);
        scale += t;
    }
    for (p, s) in branch_moments(kernel, x) {
        if p > 0.0 {
            total.add(-s * s / p);
        }
    }
    let value = total.value();
    // Anything below the cancellation floor of the two large sums is noise.
    if value <= 64.0 * f64::EPSILON * scale {
        0.0
    } else {
        4.0 * value
    }
}

/// Convexity upper bound `4 sum_{lm} p_lm Var_lm` evaluated in its closed form.
pub fn qfi_bound(state: &InputState, loss: LossModel) -> QfiResult {
    let kernel = LossKernel::new(state.n(), loss);
    QfiResult::new(bound_value(&kernel, state.weights()), QfiMethod::Bound)
}

/// Exact Fisher information when only arm a is lossy.
pub fn qfi_one_arm(state: &InputState, eta_a: f64) -> Result<QfiResult> {
    let loss = LossModel::one_arm(eta_a)?;
    let kernel = LossKernel::new(state.n(), loss);
    Ok(QfiResult::new(
        bound_value(&kernel, state.weights()),
        QfiMethod::OneArm,
    ))
}

pub(crate) fn bound_gradient_with(kernel: &LossKernel, x: &[f64]) -> Vec<f64> {
    // dF/dx_k = 4 sum_{lm} B^k_lm (k - s_lm)^2 with s_lm = S_lm / P_lm, which is the
    // closed-form derivative rearranged with sum_{lm} B^k_lm = 1. An empty branch
    // contributes its one-sided limit s_lm -> k, i.e. nothing.
    let mut grad = vec![Compensated::default(); x.len()];
    for (row, (p, s)) in kernel.rows.iter().zip(branch_moments(kernel, x)) {
        if p <= 0.0 {
            continue;
        }
        let mean = s / p;
        for (k, b) in row.ks() {
            let d = k as f64 - mean;
            grad[k].add(b * d * d);
        }
    }
    grad.into_iter().map(|g| 4.0 * g.value()).collect()
}

/// Bound contribution of the branches populated at `x` but empty at `y`.
///
/// The gradient at `y` treats an empty branch through its per-coordinate limit,
/// which is not a supergradient. Subtracting this term from `grad(y).(y - x)`
/// restores the concavity inequality `f(y) - f(x) >= grad(y).(y - x)`.
pub(crate) fn vanished_branch_term(kernel: &LossKernel, x: &[f64], y: &[f64]) -> f64 {
    let mut total = Compensated::default();
    for (row, ((px, sx), (py, _))) in kernel.rows.iter().zip(
        branch_moments(kernel, x)
            .into_iter()
            .zip(branch_moments(kernel, y)),
    ) {
        if py > 0.0 || px <= 0.0 {
            continue;
        }
        let second: f64 = row.ks().map(|(k, b)| (k * k) as f64 * b * x[k]).sum();
        total.add(second - sx * sx / px);
    }
    4.0 * total.value().max(0.0)
}

/// Hessian of the bound restricted to the coordinates in `support`:
/// `-8 sum_{lm} u u^T / P_lm` with `u_k = B^k_lm (k - s_lm)`.
pub(crate) fn bound_hessian_with(
    kernel: &LossKernel,
    x: &[f64],
    support: &[usize],
) -> DMatrix<f64> {
    let mut slot = vec![usize::MAX; x.len()];
    for (i, &k) in support.iter().enumerate() {
        slot[k] = i;
    }
    let mut hessian = DMatrix::<f64>::zeros(support.len(), support.len());
    let mut u: Vec<(usize, f64)> = Vec::with_capacity(support.len());
    for (row, (p, s)) in kernel.rows.iter().zip(branch_moments(kernel, x)) {
        if p <= 0.0 {
            continue;
        }
        let mean = s / p;
        u.clear();
        u.extend(
            row.ks()
                .filter(|&(k, _)| slot[k] != usize::MAX)
                .map(|(k, b)| (slot[k], b * (k as f64 - mean))),
        );
        for &(i, ui) in &u {
            let scaled = -8.0 * ui / p;
            for &(j, uj) in &u {
                hessian[(i, j)] += scaled * uj;
            }
        }
    }
    hessian
}

/// Gradient of the bound with respect to the weights `x_k`.
pub fn qfi_bound_gradient(state: &InputState, loss: LossModel) -> Vec<f64> {
    let kernel = LossKernel::new(state.n(), loss);
    bound_gradient_with(&kernel, state.weights())
}

/// Exact Fisher information from the spectral decomposition of the lossy state.
pub fn qfi_exact(state: &InputState, loss: LossModel) -> Result<QfiResult> {
    qfi_exact_at_phase(state, loss, 0.0)
}

/// Exact Fisher information evaluated at an arbitrary working point `phi`.
///
/// The result does not depend on `phi`; the parameter exists so the phase
/// covariance can be checked against the production code path.
pub fn qfi_exact_at_phase(state: &InputState, loss: LossModel, phi: f64) -> Result<QfiResult> {
    let n = state.n();
    let decomposition = decompose(state, loss);
    let trace = decomposition.total_probability();
    let floor = EIGEN_FLOOR * trace;

    // Branches with the same number of surviving photons overlap; each such
    // sector is an independent block of the density matrix.
    let mut sectors: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for (i, b) in decomposition.branches.iter().enumerate() {
        sectors[b.surviving()].push(i);
    }

    let contributions: Vec<Result<f64>> = sectors
        .par_iter()
        .enumerate()
        .map(|(dim, members)| {
            if members.is_empty() {
                return Ok(0.0);
            }
            let size = dim + 1;
            let mut rho = DMatrix::<Complex64>::zeros(size, size);
            for &i in members {
                let b = &decomposition.branches[i];
                let amps: Vec<Complex64> = b
                    .amplitudes
                    .iter()
                    .enumerate()
                    .map(|(j, &a)| Complex64::from_polar(a, -phi * j as f64))
                    .collect();
                for r in 0..size {
                    if amps[r] == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for c in 0..size {
                        rho[(r, c)] += b.probability * amps[r] * amps[c].conj();
                    }
                }
            }
            // d rho / d phi = -i [n_a, rho], entry (r, c) scaled by -i (r - c).
            let drho = DMatrix::<Complex64>::from_fn(size, size, |r, c| {
                rho[(r, c)] * Complex64::new(0.0, -(r as f64 - c as f64))
            });
            let eig = nalgebra::linalg::SymmetricEigen::try_new(rho, f64::EPSILON, 0)
                .ok_or(Error::Eigen { sector: dim })?;
            let vecs = eig.eigenvectors;
            let projected = vecs.adjoint() * drho * &vecs;
            let mut acc = Compensated::default();
            for i in 0..size {
                for j in 0..size {
                    let denom = eig.eigenvalues[i] + eig.eigenvalues[j];
                    if denom > floor {
                        acc.add(2.0 * projected[(i, j)].norm_sqr() / denom);
                    }
                }
            }
            Ok(acc.value())
        })
        .collect();

    let mut total = Compensated::default();
    for c in contributions {
        total.add(c?);
    }
    let value = total.value();
    if !value.is_finite() {
        return Err(Error::Numeric(format!("exact QFI evaluated to {value}")));
    }
    Ok(QfiResult::new(value, QfiMethod::Exact))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{preset_state, StateKind};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn pure_examples() {
        let noon = preset_state(&StateKind::Noon, 10).unwrap();
        assert!((qfi_pure(&noon).value - 100.0).abs() < 1e-12);
        let fock = preset_state(&StateKind::Fock { m: 3 }, 7).unwrap();
        assert_eq!(qfi_pure(&fock).value, 0.0);
        assert_eq!(qfi_pure(&fock).precision(), None);
        let third = InputState::new(vec![1.0 / 3.0; 3]).unwrap();
        assert!((qfi_pure(&third).value - 8.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn bound_examples() {
        let noon = preset_state(&StateKind::Noon, 4).unwrap();
        let f = qfi_bound(&noon, LossModel::symmetric(0.9).unwrap());
        assert!(rel(f.value, 10.4976) < 1e-13);
        assert_eq!(f.method, QfiMethod::Bound);

        let single = InputState::new(vec![0.5, 0.5]).unwrap();
        let f = qfi_bound(&single, LossModel::symmetric(0.9).unwrap());
        assert!(rel(f.value, 0.9) < 1e-13);
    }

    #[test]
    fn bound_reduces_to_pure_without_loss() {
        let s = InputState::new(vec![0.1, 0.25, 0.05, 0.3, 0.3]).unwrap();
        let a = qfi_bound(&s, LossModel::lossless()).value;
        assert!(rel(a, qfi_pure(&s).value) < 1e-13);
    }

    #[test]
    fn one_arm_noon() {
        let noon = preset_state(&StateKind::Noon, 4).unwrap();
        let f = qfi_one_arm(&noon, 0.9).unwrap();
        let want = 2.0 * 16.0 / (1.0 + 0.9f64.powi(-4));
        assert!(rel(f.value, want) < 1e-13);
        assert!((f.value - 12.6775).abs() < 1e-4);
    }

    #[test]
    fn exact_examples() {
        let noon = preset_state(&StateKind::Noon, 6).unwrap();
        let f = qfi_exact(&noon, LossModel::symmetric(0.9).unwrap()).unwrap();
        assert!(rel(f.value, 36.0 * 0.9f64.powi(6)) < 1e-9);

        let single = InputState::new(vec![0.5, 0.5]).unwrap();
        let f = qfi_exact(&single, LossModel::symmetric(0.9).unwrap()).unwrap();
        assert!(rel(f.value, 0.9) < 1e-9);
    }

    #[test]
    fn exact_of_lossless_state_is_pure() {
        let s = InputState::new(vec![0.1, 0.25, 0.05, 0.3, 0.3]).unwrap();
        let f = qfi_exact(&s, LossModel::lossless()).unwrap();
        assert!(rel(f.value, qfi_pure(&s).value) < 1e-10);
    }

    #[test]
    fn zero_information_has_no_precision() {
        let fock = preset_state(&StateKind::Fock { m: 2 }, 5).unwrap();
        let loss = LossModel::new(0.7, 0.8).unwrap();
        assert_eq!(qfi_bound(&fock, loss).value, 0.0);
        assert!(qfi_exact(&fock, loss).unwrap().value < 1e-12);
        assert!(qfi_bound(&fock, loss).precision_or_inf().is_infinite());
    }

    #[test]
    fn total_loss_leaves_nothing() {
        let noon = preset_state(&StateKind::Noon, 3).unwrap();
        let f = qfi_bound(&noon, LossModel::new(0.0, 0.0).unwrap());
        assert_eq!(f.value, 0.0);
    }
}
