//! Precision curves over photon number or transmissivity, and the differential
//! scaling exponent obtained from windowed log-log fits.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{contract, Error, Result};
use crate::fisher::qfi_bound;
use crate::optimize::{optimize, optimize_two_component, OptimizerOptions, TwoComponentForm};
use crate::state::{preset_state, StateKind};
use crate::strategies::{
    chopping, heisenberg_limit, noon_precision, sil, LossMode, StrategyKind, StrategySpec,
};

/// Largest photon number accepted for curves.
pub const MAX_CURVE_N: usize = 100;
/// Half-width of the default scaling window.
pub const DEFAULT_WINDOW: usize = 4;

/// Precision of one strategy at one point, plus optimizer metadata when relevant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrategyValue {
    pub precision: f64,
    /// Precision from the exact Fisher information at the optimal state, when
    /// the strategy is `optimal` and arm b is lossy.
    pub exact_precision: Option<f64>,
    pub converged: bool,
}

/// Precision of `kind` with `n` photons at transmissivity `eta`.
pub fn strategy_precision(
    kind: StrategyKind,
    n: usize,
    eta: f64,
    mode: LossMode,
    options: OptimizerOptions,
) -> Result<StrategyValue> {
    StrategySpec::new(kind, mode)?;
    let plain = |precision| StrategyValue {
        precision,
        exact_precision: None,
        converged: true,
    };
    let value = match kind {
        StrategyKind::Heisenberg => plain(heisenberg_limit(n)?),
        StrategyKind::Sil => plain(sil(n, eta, mode)?),
        StrategyKind::Noon => plain(noon_precision(n, eta, mode, true)?),
        StrategyKind::UnbalancedNoon => plain(noon_precision(n, eta, mode, false)?),
        StrategyKind::Chopping => plain(chopping(n, eta, mode)?.precision),
        StrategyKind::Optimal => {
            let report = optimize(n, mode.loss(eta)?, options)?;
            StrategyValue {
                precision: report.qfi.precision_or_inf(),
                exact_precision: report.refined_exact.map(|q| q.precision_or_inf()),
                converged: report.converged,
            }
        }
        StrategyKind::TwoComponent => {
            let form = match mode {
                LossMode::OneArm => TwoComponentForm::Anchored,
                LossMode::BothArms => TwoComponentForm::Symmetric,
            };
            let report = optimize_two_component(n, mode.loss(eta)?, form)?;
            plain(report.qfi.precision_or_inf())
        }
        StrategyKind::TwinFock => {
            let state = preset_state(&StateKind::TwinFock, n)?;
            plain(qfi_bound(&state, mode.loss(eta)?).precision_or_inf())
        }
    };
    if !(value.precision.is_finite() && value.precision > 0.0) {
        return Err(Error::Numeric(format!(
            "{kind} precision at n = {n}, eta = {eta} is {}",
            value.precision
        )));
    }
    Ok(value)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub n: usize,
    pub eta: f64,
    /// One entry per strategy, in the curve's strategy order.
    pub values: Vec<StrategyValue>,
}

impl CurveRow {
    pub fn precisions(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(|v| v.precision)
    }

    /// False when any optimizer in the row stopped before reaching its tolerance.
    pub fn converged(&self) -> bool {
        self.values.iter().all(|v| v.converged)
    }
}

/// Precision of several strategies along one axis, with either `n` or `eta` varying.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrecisionCurve {
    pub loss_mode: LossMode,
    pub strategies: Vec<StrategyKind>,
    pub rows: Vec<CurveRow>,
}

impl PrecisionCurve {
    pub fn column(&self, kind: StrategyKind) -> Option<Vec<f64>> {
        let idx = self.strategies.iter().position(|&k| k == kind)?;
        Some(self.rows.iter().map(|r| r.values[idx].precision).collect())
    }
}

fn check_strategies(strategies: &[StrategyKind], mode: LossMode) -> Result<()> {
    if strategies.is_empty() {
        return contract("at least one strategy is required");
    }
    for &k in strategies {
        StrategySpec::new(k, mode)?;
    }
    Ok(())
}

fn evaluate_row(
    strategies: &[StrategyKind],
    n: usize,
    eta: f64,
    mode: LossMode,
    options: OptimizerOptions,
) -> Result<CurveRow> {
    let values = strategies
        .iter()
        .map(|&k| strategy_precision(k, n, eta, mode, options))
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveRow { n, eta, values })
}

/// Precision versus photon number at fixed transmissivity. Rows are evaluated in
/// parallel on the current rayon pool and returned in increasing `n`.
pub fn precision_curve(
    strategies: &[StrategyKind],
    n_range: std::ops::RangeInclusive<usize>,
    eta: f64,
    mode: LossMode,
    options: OptimizerOptions,
) -> Result<PrecisionCurve> {
    check_strategies(strategies, mode)?;
    let (lo, hi) = (*n_range.start(), *n_range.end());
    if lo == 0 || hi > MAX_CURVE_N || lo > hi {
        return contract(format!(
            "photon range {lo}..={hi} must be non-empty and inside 1..={MAX_CURVE_N}"
        ));
    }
    let rows = n_range
        .into_par_iter()
        .map(|n| evaluate_row(strategies, n, eta, mode, options))
        .collect::<Result<Vec<_>>>()?;
    Ok(PrecisionCurve {
        loss_mode: mode,
        strategies: strategies.to_vec(),
        rows,
    })
}

/// Precision versus transmissivity at fixed photon number.
pub fn eta_curve(
    strategies: &[StrategyKind],
    n: usize,
    etas: &[f64],
    mode: LossMode,
    options: OptimizerOptions,
) -> Result<PrecisionCurve> {
    check_strategies(strategies, mode)?;
    if n == 0 || n > MAX_CURVE_N {
        return contract(format!("n = {n} must lie in 1..={MAX_CURVE_N}"));
    }
    let rows = etas
        .par_iter()
        .map(|&eta| evaluate_row(strategies, n, eta, mode, options))
        .collect::<Result<Vec<_>>>()?;
    Ok(PrecisionCurve {
        loss_mode: mode,
        strategies: strategies.to_vec(),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingCurve {
    pub eta: f64,
    pub loss_mode: LossMode,
    pub rows: Vec<ScalingRow>,
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let len = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / len;
    let my = ys.iter().sum::<f64>() / len;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Local log-log slope `S(n)` of one strategy's precision, negated so the SQL
/// gives 0.5 and the Heisenberg limit gives 1.
///
/// Only `n` with every point of `n - window ..= n + window` present contribute a row.
pub fn differential_scaling(
    curve: &PrecisionCurve,
    strategy: StrategyKind,
    window: usize,
) -> Result<ScalingCurve> {
    if window == 0 {
        return contract("scaling window must be at least 1");
    }
    let idx = curve
        .strategies
        .iter()
        .position(|&k| k == strategy)
        .ok_or_else(|| Error::Contract(format!("curve has no {strategy} column")))?;
    let eta = curve.rows.first().map_or(f64::NAN, |r| r.eta);
    if curve.rows.iter().any(|r| r.eta != eta) {
        return contract("differential scaling needs a curve at fixed eta");
    }
    if curve.rows.windows(2).any(|w| w[1].n <= w[0].n) {
        return contract("curve rows must be strictly increasing in n");
    }

    let width = 2 * window + 1;
    let mut rows = Vec::new();
    for chunk in curve.rows.windows(width) {
        let first = chunk[0].n;
        let contiguous = chunk.iter().enumerate().all(|(i, r)| r.n == first + i);
        if !contiguous || first == 0 {
            continue;
        }
        let xs: Vec<f64> = chunk.iter().map(|r| (r.n as f64).ln()).collect();
        let ys: Vec<f64> = chunk.iter().map(|r| r.values[idx].precision.ln()).collect();
        rows.push(ScalingRow {
            n: first + window,
            s: -ols_slope(&xs, &ys),
        });
    }
    Ok(ScalingCurve {
        eta,
        loss_mode: curve.loss_mode,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(f: impl Fn(f64) -> f64, ns: std::ops::RangeInclusive<usize>) -> PrecisionCurve {
        PrecisionCurve {
            loss_mode: LossMode::BothArms,
            strategies: vec![StrategyKind::Optimal],
            rows: ns
                .map(|n| CurveRow {
                    n,
                    eta: 1.0,
                    values: vec![StrategyValue {
                        precision: f(n as f64),
                        exact_precision: None,
                        converged: true,
                    }],
                })
                .collect(),
        }
    }

    #[test]
    fn exact_power_law_slope() {
        let curve = synthetic(|n| 3.0 / n.powf(0.77), 1..=30);
        let s = differential_scaling(&curve, StrategyKind::Optimal, 4).unwrap();
        assert_eq!(s.rows.first().unwrap().n, 5);
        assert_eq!(s.rows.last().unwrap().n, 26);
        for row in s.rows {
            assert!((row.s - 0.77).abs() < 1e-12);
        }
    }

    #[test]
    fn gaps_drop_rows() {
        let mut curve = synthetic(|n| 1.0 / n, 1..=20);
        curve.rows.retain(|r| r.n != 10);
        let s = differential_scaling(&curve, StrategyKind::Optimal, 2).unwrap();
        assert!(s.rows.iter().all(|r| r.n + 2 < 10 || r.n - 2 > 10));
    }

    #[test]
    fn missing_column_is_an_error() {
        let curve = synthetic(|n| 1.0 / n, 1..=20);
        assert!(differential_scaling(&curve, StrategyKind::Sil, 4).is_err());
        assert!(differential_scaling(&curve, StrategyKind::Optimal, 0).is_err());
    }

    #[test]
    fn curve_rejects_bad_ranges() {
        let opts = OptimizerOptions::default();
        let k = [StrategyKind::Heisenberg];
        assert!(precision_curve(&k, 0..=3, 0.9, LossMode::BothArms, opts).is_err());
        assert!(precision_curve(&k, 1..=101, 0.9, LossMode::BothArms, opts).is_err());
        assert!(precision_curve(&[], 1..=3, 0.9, LossMode::BothArms, opts).is_err());
        let u = [StrategyKind::UnbalancedNoon];
        assert!(precision_curve(&u, 1..=3, 0.9, LossMode::BothArms, opts).is_err());
    }

    #[test]
    fn lossless_optimal_is_heisenberg() {
        let k = [StrategyKind::Optimal, StrategyKind::Heisenberg];
        let curve = precision_curve(
            &k,
            1..=9,
            1.0,
            LossMode::BothArms,
            OptimizerOptions::default(),
        )
        .unwrap();
        for row in &curve.rows {
            let p: Vec<f64> = row.precisions().collect();
            assert!((p[0] - p[1]).abs() / p[1] < 1e-9, "n = {}", row.n);
        }
    }
}
