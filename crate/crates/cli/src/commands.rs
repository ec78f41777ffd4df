use lossqfi::scaling::DEFAULT_WINDOW;
use lossqfi::{
    differential_scaling, eta_curve, optimize, precision_curve, preset_state, qfi_bound, qfi_exact,
    InputState, LossModel, PrecisionCurve, QfiResult, ScalingCurve, StateKind, StrategyKind,
};
use serde::Serialize;

use crate::config::{Axis, Format, JobArgs};
use crate::format::{significant, Csv};
use crate::CliError;

/// Optimal weights at or below this are left out of the sparse support listing.
const SUPPORT_THRESHOLD: f64 = 1e-9;
const CSV_DIGITS: usize = 12;

fn num(v: f64) -> String {
    significant(v, CSV_DIGITS)
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Numeric(format!("cannot encode output: {e}")))?;
    text.push('\n');
    Ok(text)
}

fn gap_percent(bound: f64, exact: f64) -> Option<f64> {
    (bound > 0.0).then(|| 100.0 * (bound - exact) / bound)
}

fn require<T: Copy>(value: Option<T>, flag: &str, state: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Config(format!("--state {state} needs --{flag}")))
}

/// Builds the input state named by `--state`, returning its display name.
fn input_state(args: &JobArgs) -> Result<(String, InputState), CliError> {
    let name = args
        .state
        .as_deref()
        .ok_or_else(|| CliError::Config("--state is required".into()))?;
    if name == "custom" {
        let weights = args
            .weights
            .clone()
            .ok_or_else(|| CliError::Config("--state custom needs --weights".into()))?;
        if let Some(n) = args.n {
            if weights.len() != n + 1 {
                return Err(CliError::Config(format!(
                    "--n {n} needs {} weights, got {}",
                    n + 1,
                    weights.len()
                )));
            }
        }
        return Ok((name.to_string(), InputState::new(weights)?));
    }
    args.reject(args.weights.is_some(), "--weights", "preset states")?;
    let kind = match name {
        "noon" => StateKind::Noon,
        "unbalanced-noon" => StateKind::UnbalancedNoon {
            p: require(args.p, "p", name)?,
        },
        "two-component" => StateKind::TwoComponent {
            m: require(args.m, "m", name)?,
            p: require(args.p, "p", name)?,
        },
        "symmetric-two-component" => StateKind::SymmetricTwoComponent {
            m: require(args.m, "m", name)?,
        },
        "twin-fock" => StateKind::TwinFock,
        "fock" => StateKind::Fock {
            m: require(args.m, "m", name)?,
        },
        "uniform" => StateKind::Uniform,
        other => return Err(CliError::Config(format!("unknown state '{other}'"))),
    };
    Ok((name.to_string(), preset_state(&kind, args.require_n()?)?))
}

#[derive(Debug, Serialize)]
struct ComputeReport {
    n: usize,
    eta_a: f64,
    eta_b: f64,
    state: String,
    weights: Vec<f64>,
    fq_bound: f64,
    fq_exact: Option<f64>,
    precision_bound: Option<f64>,
    precision_exact: Option<f64>,
    gap_percent: Option<f64>,
}

pub fn compute(args: &JobArgs) -> Result<String, CliError> {
    args.reject(args.strategies.is_some(), "--strategies", "compute")?;
    let (state_name, state) = input_state(args)?;
    let loss = args.loss_model()?;
    let bound = qfi_bound(&state, loss);
    let exact = if args.skip_exact {
        None
    } else {
        Some(qfi_exact(&state, loss)?)
    };
    let report = ComputeReport {
        n: state.n(),
        eta_a: loss.eta_a,
        eta_b: loss.eta_b,
        state: state_name,
        weights: state.weights().to_vec(),
        fq_bound: bound.value,
        fq_exact: exact.map(|q| q.value),
        precision_bound: bound.precision(),
        precision_exact: exact.and_then(|q| q.precision()),
        gap_percent: exact.and_then(|q| gap_percent(bound.value, q.value)),
    };
    match args.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut csv = Csv::new(&[
                "n",
                "eta_a",
                "eta_b",
                "state",
                "fq_bound",
                "fq_exact",
                "precision_bound",
                "precision_exact",
                "gap_percent",
            ]);
            csv.row(&[
                report.n.to_string(),
                num(report.eta_a),
                num(report.eta_b),
                report.state,
                num(report.fq_bound),
                opt_num(report.fq_exact),
                opt_num(report.precision_bound),
                opt_num(report.precision_exact),
                opt_num(report.gap_percent),
            ]);
            Ok(csv.finish())
        }
    }
}

#[derive(Debug, Serialize)]
struct SupportEntry {
    k: usize,
    x: f64,
}

#[derive(Debug, Serialize)]
struct OptimizeReport {
    n: usize,
    eta_a: f64,
    eta_b: f64,
    weights: Vec<f64>,
    support: Vec<SupportEntry>,
    fq: f64,
    precision: Option<f64>,
    fq_exact: Option<f64>,
    precision_exact: Option<f64>,
    gap_percent: Option<f64>,
    iterations: usize,
    converged: bool,
    residual: f64,
}

fn exact_value(q: Option<QfiResult>, bound: QfiResult, loss: LossModel) -> Option<QfiResult> {
    // With arm b lossless the bound is already exact.
    if loss.eta_b == 1.0 {
        Some(bound)
    } else {
        q
    }
}

pub fn optimize_cmd(args: &JobArgs) -> Result<String, CliError> {
    args.reject(args.state.is_some(), "--state", "optimize")?;
    args.reject(args.strategies.is_some(), "--strategies", "optimize")?;
    let n = args.require_n()?;
    let loss: LossModel = args.loss_model()?;
    let report = optimize(n, loss, args.options())?;
    if !report.converged {
        eprintln!(
            "warning: optimizer stopped after {} iterations with residual {:e}",
            report.iterations, report.residual
        );
    }
    let exact = exact_value(report.refined_exact, report.qfi, loss);
    let out = OptimizeReport {
        n,
        eta_a: loss.eta_a,
        eta_b: loss.eta_b,
        weights: report.optimum.weights().to_vec(),
        support: report
            .optimum
            .support(SUPPORT_THRESHOLD)
            .into_iter()
            .map(|(k, x)| SupportEntry { k, x })
            .collect(),
        fq: report.qfi.value,
        precision: report.qfi.precision(),
        fq_exact: exact.map(|q| q.value),
        precision_exact: exact.and_then(|q| q.precision()),
        gap_percent: exact.and_then(|q| gap_percent(report.qfi.value, q.value)),
        iterations: report.iterations,
        converged: report.converged,
        residual: report.residual,
    };
    match args.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&out),
        Format::Csv => {
            let mut csv = Csv::new(&["k", "x"]);
            for e in &out.support {
                csv.row(&[e.k.to_string(), num(e.x)]);
            }
            Ok(csv.finish())
        }
    }
}

const DEFAULT_STRATEGIES: [StrategyKind; 5] = [
    StrategyKind::Optimal,
    StrategyKind::Noon,
    StrategyKind::Chopping,
    StrategyKind::Sil,
    StrategyKind::Heisenberg,
];

fn warn_unconverged(curve: &PrecisionCurve) {
    for row in curve.rows.iter().filter(|r| !r.converged()) {
        eprintln!(
            "warning: optimizer did not converge at n = {}, eta = {}",
            row.n, row.eta
        );
    }
}

fn integral(v: f64, flag: &str) -> Result<usize, CliError> {
    if v.fract() != 0.0 || v < 0.0 {
        return Err(CliError::Config(format!(
            "--{flag} must be a non-negative integer on the n axis, got {v}"
        )));
    }
    Ok(v as usize)
}

fn linspace(from: f64, to: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![from];
    }
    let h = (to - from) / (steps - 1) as f64;
    (0..steps)
        .map(|i| {
            if i + 1 == steps {
                to
            } else {
                from + i as f64 * h
            }
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct SweepReport<'a> {
    axis: &'static str,
    #[serde(flatten)]
    curve: &'a PrecisionCurve,
}

pub fn sweep(args: &JobArgs) -> Result<String, CliError> {
    for (present, flag) in [
        (args.state.is_some(), "--state"),
        (args.weights.is_some(), "--weights"),
    ] {
        args.reject(present, flag, "sweep")?;
    }
    let strategies = args
        .strategies
        .clone()
        .unwrap_or_else(|| DEFAULT_STRATEGIES.to_vec());
    let axis = args
        .axis
        .ok_or_else(|| CliError::Config("--axis n|eta is required".into()))?;
    let from = args
        .from
        .ok_or_else(|| CliError::Config("--from is required".into()))?;
    let to = args
        .to
        .ok_or_else(|| CliError::Config("--to is required".into()))?;
    let (mode, eta) = args.strategy_loss()?;

    let curve = match axis {
        Axis::N => {
            args.reject(args.steps.is_some(), "--steps", "the n axis")?;
            args.reject(args.n.is_some(), "--n", "the n axis")?;
            let eta = eta.ok_or_else(|| CliError::Config("--eta is required".into()))?;
            let range = integral(from, "from")?..=integral(to, "to")?;
            precision_curve(&strategies, range, eta, mode, args.options())?
        }
        Axis::Eta => {
            args.reject(eta.is_some(), "--eta", "the eta axis")?;
            let steps = args
                .steps
                .filter(|&s| s > 0)
                .ok_or_else(|| CliError::Config("--steps must be at least 1".into()))?;
            let etas = linspace(from, to, steps);
            eta_curve(&strategies, args.require_n()?, &etas, mode, args.options())?
        }
    };
    warn_unconverged(&curve);

    match args.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&SweepReport {
            axis: match axis {
                Axis::N => "n",
                Axis::Eta => "eta",
            },
            curve: &curve,
        }),
        Format::Csv => {
            let mut header = vec![match axis {
                Axis::N => "n".to_string(),
                Axis::Eta => "eta".to_string(),
            }];
            header.extend(strategies.iter().map(|s| s.name().to_string()));
            let mut csv = Csv::new(&header);
            for row in &curve.rows {
                let mut cells = vec![match axis {
                    Axis::N => row.n.to_string(),
                    Axis::Eta => num(row.eta),
                }];
                cells.extend(row.precisions().map(num));
                csv.row(&cells);
            }
            Ok(csv.finish())
        }
    }
}

pub fn scaling(args: &JobArgs) -> Result<String, CliError> {
    for (present, flag) in [
        (args.state.is_some(), "--state"),
        (args.strategies.is_some(), "--strategies"),
        (
            args.eta_a.is_some() || args.eta_b.is_some(),
            "--eta-a/--eta-b",
        ),
    ] {
        args.reject(present, flag, "scaling")?;
    }
    let etas = args
        .eta
        .clone()
        .ok_or_else(|| CliError::Config("--eta is required".into()))?;
    let n_max = args
        .n_max
        .ok_or_else(|| CliError::Config("--n-max is required".into()))?;
    let n_min = args.n_min.unwrap_or(1);
    let window = args.window.unwrap_or(DEFAULT_WINDOW);
    let strategy = args.strategy.unwrap_or(StrategyKind::Optimal);
    let mode = args.loss_mode();

    let curves = etas
        .iter()
        .map(|&eta| {
            let curve = precision_curve(&[strategy], n_min..=n_max, eta, mode, args.options())?;
            warn_unconverged(&curve);
            differential_scaling(&curve, strategy, window)
        })
        .collect::<lossqfi::Result<Vec<ScalingCurve>>>()?;

    match args.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&curves),
        Format::Csv => {
            let mut csv = Csv::new(&["n", "eta", "s"]);
            for curve in &curves {
                for row in &curve.rows {
                    csv.row(&[row.n.to_string(), num(curve.eta), num(row.s)]);
                }
            }
            Ok(csv.finish())
        }
    }
}
