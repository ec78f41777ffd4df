//! Maximization of the Fisher-information bound over the weight simplex.
//!
//! The bound is concave in the weights, so any stationary point is the global
//! maximum. The search is projected gradient ascent with Armijo backtracking,
//! accelerated by Barzilai-Borwein step lengths and Newton steps on the current
//! support.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::branch::LossKernel;
use crate::error::{contract, Result};
use crate::fisher::{
    bound_gradient_with, bound_hessian_with, bound_value, qfi_exact, vanished_branch_term,
    QfiMethod, QfiResult,
};
use crate::golden::golden_section_max;
use crate::state::{preset_state, InputState, LossModel, StateKind};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Weights at or below this are treated as zero.
pub const ZERO_WEIGHT: f64 = 1e-12;

const ARMIJO: f64 = 1e-4;
const SHRINK: f64 = 0.5;
const MIN_STEP: f64 = 1e-30;
const MIN_BB_STEP: f64 = 1e-12;
const MAX_BB_STEP: f64 = 1e12;
const NEWTON_BACKTRACKS: usize = 30;
/// Fraction of the full residual below which the support counts as settled.
const FACE_SETTLED: f64 = 0.5;
/// Relative ridge added to the reduced Hessian, which is singular on flat faces.
const NEWTON_RIDGE: f64 = 1e-12;
/// Bracket width for the continuous weight of two-component states.
const TWO_COMPONENT_BRACKET: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerOptions {
    pub tolerance: f64,
    pub max_iter: usize,
    /// Evaluate the exact Fisher information at the optimum when arm b is lossy.
    pub refine_exact: bool,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            max_iter: DEFAULT_MAX_ITER,
            refine_exact: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationReport {
    pub optimum: InputState,
    pub qfi: QfiResult,
    pub iterations: usize,
    pub converged: bool,
    /// Norm of the gradient projected onto the tangent cone of the simplex.
    pub residual: f64,
    /// Exact Fisher information of `optimum`, filled in when arm b is lossy.
    pub refined_exact: Option<QfiResult>,
}

impl OptimizationReport {
    /// Relative gap between the bound and the exact value at the optimum.
    pub fn bound_gap(&self) -> Option<f64> {
        self.refined_exact
            .map(|exact| (self.qfi.value - exact.value) / self.qfi.value)
    }
}

/// Euclidean projection onto the probability simplex (sort and threshold).
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let t = (cumulative - 1.0) / (i + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&vi| (vi - theta).max(0.0)).collect()
}

/// Projection of `grad` onto the tangent cone of the simplex at `x`.
///
/// Coordinates with `x_i == 0` may only increase. The result is
/// `d_i = g_i - lambda` on the support and `max(g_i - lambda, 0)` off it, with
/// `lambda` chosen so the entries sum to zero.
pub fn tangent_projection(x: &[f64], grad: &[f64]) -> Vec<f64> {
    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    let mut bound: Vec<f64> = Vec::new();
    for (&xi, &gi) in x.iter().zip(grad) {
        if xi > 0.0 {
            free_sum += gi;
            free_count += 1;
        } else {
            bound.push(gi);
        }
    }
    bound.sort_by(|a, b| b.total_cmp(a));

    let lambda = if free_count == 0 {
        // Only reachable for a zero vector; fall back to the plain simplex projection.
        grad.iter().sum::<f64>() / grad.len() as f64
    } else {
        let mut sum = free_sum;
        let mut count = free_count;
        let mut lambda = sum / count as f64;
        for &g in &bound {
            if g <= lambda {
                break;
            }
            sum += g;
            count += 1;
            lambda = sum / count as f64;
        }
        lambda
    };

    x.iter()
        .zip(grad)
        .map(|(&xi, &gi)| {
            let d = gi - lambda;
            if xi > 0.0 || free_count == 0 {
                d
            } else {
                d.max(0.0)
            }
        })
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|d| d * d).sum::<f64>().sqrt()
}

fn snap(mut x: Vec<f64>) -> Vec<f64> {
    x.iter_mut().for_each(|w| {
        if *w <= ZERO_WEIGHT {
            *w = 0.0
        }
    });
    let total: f64 = x.iter().sum();
    x.iter_mut().for_each(|w| *w /= total);
    x
}

fn finish(
    x: Vec<f64>,
    loss: LossModel,
    kernel: &LossKernel,
    iterations: usize,
    converged: bool,
    residual: f64,
    refine: bool,
) -> Result<OptimizationReport> {
    let optimum = InputState::new(snap(x))?;
    let method = if loss.eta_b == 1.0 {
        QfiMethod::OneArm
    } else {
        QfiMethod::Bound
    };
    let qfi = QfiResult {
        value: bound_value(kernel, optimum.weights()),
        method,
    };
    let refined_exact = if refine && loss.eta_b < 1.0 {
        Some(qfi_exact(&optimum, loss)?)
    } else {
        None
    };
    Ok(OptimizationReport {
        optimum,
        qfi,
        iterations,
        converged,
        residual,
        refined_exact,
    })
}

/// Maximizes the bound from the uniform state.
pub fn optimize(
    n: usize,
    loss: LossModel,
    options: OptimizerOptions,
) -> Result<OptimizationReport> {
    if n == 0 {
        return contract("optimize needs n >= 1");
    }
    optimize_from(vec![1.0 / (n + 1) as f64; n + 1], loss, options)
}

/// Maximizes the bound starting from the given weights.
pub fn optimize_from(
    start: Vec<f64>,
    loss: LossModel,
    options: OptimizerOptions,
) -> Result<OptimizationReport> {
    if options.tolerance.is_nan() || options.tolerance <= 0.0 {
        return contract(format!(
            "tolerance must be positive, got {}",
            options.tolerance
        ));
    }
    let start = InputState::new(start)?;
    let n = start.n();
    let kernel = LossKernel::new(n, loss);

    let mut x = start.into_weights();
    let mut value = bound_value(&kernel, &x);
    let mut grad = centered(bound_gradient_with(&kernel, &x), &x);
    let mut step = 1.0 / (4.0 * (n * n).max(1) as f64);
    let mut residual = f64::INFINITY;

    // Near the optimum the increase drops below the rounding of the objective;
    // concavity gives f(y) - f(x) >= g(y).(y - x), so the gradient at the trial
    // point can certify the Armijo condition instead.
    let try_point = |x: &[f64], value: f64, grad: &[f64], candidate: Vec<f64>| -> Option<Trial> {
        let delta: Vec<f64> = candidate.iter().zip(x).map(|(c, xi)| c - xi).collect();
        let ascent = dot(grad, &delta);
        if ascent.is_nan() || ascent <= 0.0 {
            return None;
        }
        let candidate_value = bound_value(&kernel, &candidate);
        let candidate_grad = centered(bound_gradient_with(&kernel, &candidate), &candidate);
        let certified = || {
            dot(&candidate_grad, &delta) - vanished_branch_term(&kernel, x, &candidate)
                >= ARMIJO * ascent
        };
        (candidate_value >= value + ARMIJO * ascent || certified()).then_some(Trial {
            x: candidate,
            value: candidate_value,
            grad: candidate_grad,
            delta,
        })
    };

    for iteration in 0..options.max_iter {
        let direction = tangent_projection(&x, &grad);
        residual = norm(&direction);
        if residual < options.tolerance {
            return finish(
                x,
                loss,
                &kernel,
                iteration,
                true,
                residual,
                options.refine_exact,
            );
        }

        // Active-set Newton: solve on the current support and let a single zero
        // weight in once the support itself is nearly stationary.
        let mut face: Vec<usize> = (0..x.len()).filter(|&i| x[i] > 0.0).collect();
        let face_residual = norm(&face.iter().map(|&i| direction[i]).collect::<Vec<_>>());
        if face_residual < FACE_SETTLED * residual {
            let best = (0..x.len())
                .filter(|&i| x[i] == 0.0 && direction[i] > 0.0)
                .max_by(|&a, &b| direction[a].total_cmp(&direction[b]));
            if let Some(i) = best {
                face.push(i);
                face.sort_unstable();
            }
        }
        let mut accepted = None;
        if let Some(d) = face_newton_direction(&kernel, &x, &grad, &face) {
            let mut t = 1.0;
            for _ in 0..NEWTON_BACKTRACKS {
                let trial: Vec<f64> = face.iter().map(|&i| x[i] + t * d[i]).collect();
                let mut candidate = vec![0.0; x.len()];
                for (&i, v) in face.iter().zip(project_simplex(&trial)) {
                    candidate[i] = v;
                }
                if let Some(trial) = try_point(&x, value, &grad, candidate) {
                    accepted = Some(trial);
                    break;
                }
                t *= SHRINK;
            }
        }

        // Armijo backtracking along the projection arc; kept when it beats Newton.
        while step >= MIN_STEP {
            let trial: Vec<f64> = x.iter().zip(&grad).map(|(xi, gi)| xi + step * gi).collect();
            if let Some(trial) = try_point(&x, value, &grad, project_simplex(&trial)) {
                if accepted
                    .as_ref()
                    .is_none_or(|a: &Trial| trial.value > a.value)
                {
                    accepted = Some(trial);
                }
                break;
            }
            step *= SHRINK;
        }

        let Some(trial) = accepted else {
            // No representable ascent step is left.
            return finish(
                x,
                loss,
                &kernel,
                iteration,
                false,
                residual,
                options.refine_exact,
            );
        };

        // Barzilai-Borwein trial step for the next gradient step.
        let change: Vec<f64> = trial.grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let curvature = -dot(&trial.delta, &change);
        step = if curvature > 0.0 {
            (dot(&trial.delta, &trial.delta) / curvature).clamp(MIN_BB_STEP, MAX_BB_STEP)
        } else {
            step * 2.0
        };
        x = trial.x;
        value = trial.value;
        grad = trial.grad;
    }
    finish(
        x,
        loss,
        &kernel,
        options.max_iter,
        false,
        residual,
        options.refine_exact,
    )
}

struct Trial {
    x: Vec<f64>,
    value: f64,
    grad: Vec<f64>,
    delta: Vec<f64>,
}

/// Newton direction for the bound restricted to the coordinates in `support`,
/// keeping the weights summing to one.
fn face_newton_direction(
    kernel: &LossKernel,
    x: &[f64],
    grad: &[f64],
    support: &[usize],
) -> Option<Vec<f64>> {
    if support.len() < 2 {
        return None;
    }
    // Eliminate the largest weight through the sum constraint.
    let pivot = (0..support.len()).max_by(|&a, &b| x[support[a]].total_cmp(&x[support[b]]))?;
    let others: Vec<usize> = (0..support.len()).filter(|&i| i != pivot).collect();
    let hessian = bound_hessian_with(kernel, x, support);
    let r = others.len();

    let mut reduced = DMatrix::<f64>::from_fn(r, r, |i, j| {
        let (a, b) = (others[i], others[j]);
        -(hessian[(a, b)] - hessian[(a, pivot)] - hessian[(pivot, b)] + hessian[(pivot, pivot)])
    });
    let rhs = DVector::<f64>::from_fn(r, |i, _| grad[support[others[i]]] - grad[support[pivot]]);
    // Regularize in proportion to the gradient so near-flat directions cannot
    // produce huge steps; the shift vanishes as the face becomes stationary.
    let shift = (NEWTON_RIDGE * reduced.trace() / r as f64)
        .max(rhs.norm())
        .max(f64::MIN_POSITIVE);
    for i in 0..r {
        reduced[(i, i)] += shift;
    }
    let y = reduced.cholesky()?.solve(&rhs);
    if !y.iter().all(|v| v.is_finite()) {
        return None;
    }

    let mut d = vec![0.0; x.len()];
    for (i, &o) in others.iter().enumerate() {
        d[support[o]] = y[i];
    }
    d[support[pivot]] = -y.sum();
    Some(d)
}

/// Shifts the gradient by its mean over the support. Projections onto the simplex
/// ignore constant shifts, and the raw gradient carries a large common offset
/// that would otherwise swamp the weights in `x + step * g`.
fn centered(mut grad: Vec<f64>, x: &[f64]) -> Vec<f64> {
    let (sum, count) = grad
        .iter()
        .zip(x)
        .filter(|(_, &xi)| xi > 0.0)
        .fold((0.0, 0usize), |(s, c), (g, _)| (s + g, c + 1));
    if count > 0 {
        let mean = sum / count as f64;
        grad.iter_mut().for_each(|g| *g -= mean);
    }
    grad
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TwoComponentForm {
    /// `sqrt(p)|m,N-m> + sqrt(1-p)|N,0>`, searched over `m` and `p`.
    Anchored,
    /// `(|m,N-m> + |N-m,m>)/sqrt 2`, searched over `m`.
    Symmetric,
}

/// Best state within a two-component family.
///
/// The returned report has `iterations` set to the number of bound evaluations and
/// `residual` set to the final bracket width of the `p` search.
pub fn optimize_two_component(
    n: usize,
    loss: LossModel,
    form: TwoComponentForm,
) -> Result<OptimizationReport> {
    if n == 0 {
        return contract("two-component search needs n >= 1");
    }
    let kernel = LossKernel::new(n, loss);
    let mut evaluations = 0usize;
    let mut best: Option<(f64, InputState)> = None;
    let mut residual = 0.0;

    let mut consider = |value: f64, state: InputState| {
        // Strict comparison keeps the smallest m on ties.
        if best.as_ref().is_none_or(|(v, _)| value > *v) {
            best = Some((value, state));
        }
    };

    match form {
        TwoComponentForm::Anchored => {
            for m in 0..=n {
                let objective = |p: f64| {
                    let s = preset_state(&StateKind::TwoComponent { m, p }, n)
                        .expect("p stays inside [0, 1]");
                    bound_value(&kernel, s.weights())
                };
                let search = golden_section_max(objective, 0.0, 1.0, TWO_COMPONENT_BRACKET);
                evaluations += search.evaluations;
                residual = search.bracket;
                // The endpoints are candidates too; golden section only sees the interior.
                let (p, value) = [
                    (0.0, objective(0.0)),
                    (1.0, objective(1.0)),
                    (search.x, search.value),
                ]
                .into_iter()
                .fold(
                    (0.0, f64::NEG_INFINITY),
                    |acc, c| if c.1 > acc.1 { c } else { acc },
                );
                evaluations += 2;
                consider(value, preset_state(&StateKind::TwoComponent { m, p }, n)?);
            }
        }
        TwoComponentForm::Symmetric => {
            for m in 0..=n / 2 {
                let state = preset_state(&StateKind::SymmetricTwoComponent { m }, n)?;
                evaluations += 1;
                consider(bound_value(&kernel, state.weights()), state);
            }
        }
    }

    let (_, state) = best.expect("at least one candidate is evaluated");
    let mut report = finish(
        state.into_weights(),
        loss,
        &kernel,
        evaluations,
        true,
        0.0,
        true,
    )?;
    report.residual = residual;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_lands_on_simplex() {
        let p = project_simplex(&[0.3, -0.2, 1.4, 0.1]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(p.iter().all(|&w| w >= 0.0));
        assert_eq!(project_simplex(&[0.2, 0.3, 0.5]), vec![0.2, 0.3, 0.5]);
        assert_eq!(project_simplex(&[5.0, 0.0]), vec![1.0, 0.0]);
    }

    #[test]
    fn tangent_projection_cases() {
        // Interior point: plain mean removal.
        let d = tangent_projection(&[0.5, 0.5], &[3.0, 1.0]);
        assert_eq!(d, vec![1.0, -1.0]);
        // Vertex with the gradient pointing outward: no feasible ascent.
        let d = tangent_projection(&[1.0, 0.0], &[3.0, 1.0]);
        assert_eq!(d, vec![0.0, 0.0]);
        // Vertex with an inward gradient.
        let d = tangent_projection(&[1.0, 0.0], &[1.0, 3.0]);
        assert_eq!(d, vec![-1.0, 1.0]);
    }

    #[test]
    fn lossless_optimum_is_noon() {
        let r = optimize(5, LossModel::lossless(), OptimizerOptions::default()).unwrap();
        assert!(r.converged, "residual {}", r.residual);
        assert!((r.qfi.value - 25.0).abs() < 1e-9);
        let w = r.optimum.weights();
        assert!((w[0] - 0.5).abs() < 1e-6 && (w[5] - 0.5).abs() < 1e-6);
        assert!(r.refined_exact.is_none());
    }

    #[test]
    fn noon_still_optimal_at_five_photons() {
        let r = optimize(
            5,
            LossModel::symmetric(0.9).unwrap(),
            OptimizerOptions::default(),
        )
        .unwrap();
        let noon = 25.0 * 0.9f64.powi(5);
        assert!((r.qfi.value - noon).abs() / noon < 1e-6);
        let exact = r.refined_exact.unwrap();
        assert!(exact.value <= r.qfi.value + 1e-9);
    }

    #[test]
    fn noon_beaten_at_eight_photons() {
        let r = optimize(
            8,
            LossModel::symmetric(0.9).unwrap(),
            OptimizerOptions::default(),
        )
        .unwrap();
        assert!(r.qfi.value > 64.0 * 0.9f64.powi(8));
    }

    #[test]
    fn invalid_arguments() {
        let loss = LossModel::lossless();
        assert!(optimize(0, loss, OptimizerOptions::default()).is_err());
        let bad = OptimizerOptions {
            tolerance: 0.0,
            ..OptimizerOptions::default()
        };
        assert!(optimize(3, loss, bad).is_err());
    }

    #[test]
    fn iteration_cap_is_reported_not_raised() {
        let opts = OptimizerOptions {
            max_iter: 1,
            ..OptimizerOptions::default()
        };
        let r = optimize(12, LossModel::symmetric(0.9).unwrap(), opts).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn anchored_search_without_loss_finds_noon() {
        let r =
            optimize_two_component(6, LossModel::lossless(), TwoComponentForm::Anchored).unwrap();
        assert!((r.qfi.value - 36.0).abs() < 1e-8);
    }
}
