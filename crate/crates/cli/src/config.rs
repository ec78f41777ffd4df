use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use lossqfi::{LossMode, LossModel, OptimizerOptions, StrategyKind};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandName {
    Compute,
    Optimize,
    Sweep,
    Scaling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    N,
    Eta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Every job parameter. Flags and the `--config` file share this shape; a flag
/// that is set wins over the file.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JobArgs {
    /// Command to run when none is given on the command line (config files only).
    #[arg(skip)]
    pub command: Option<CommandName>,

    /// Total photon number.
    #[arg(long)]
    pub n: Option<usize>,
    /// Transmissivity of arm a; overrides --eta/--loss.
    #[arg(long)]
    pub eta_a: Option<f64>,
    /// Transmissivity of arm b; overrides --eta/--loss.
    #[arg(long)]
    pub eta_b: Option<f64>,
    /// Transmissivity, combined with --loss. `scaling` takes a comma-separated list.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub eta: Option<Vec<f64>>,
    /// Which arms are lossy: both or one.
    #[arg(long)]
    pub loss: Option<LossMode>,

    /// Input state: noon, unbalanced-noon, two-component, symmetric-two-component,
    /// twin-fock, fock, uniform or custom.
    #[arg(long)]
    pub state: Option<String>,
    /// Component index for two-component, symmetric-two-component and fock states.
    #[arg(long)]
    pub m: Option<usize>,
    /// Weight parameter for unbalanced-noon and two-component states.
    #[arg(long)]
    pub p: Option<f64>,
    /// Comma-separated weights x_0..x_N for --state custom.
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
    pub weights: Option<Vec<f64>>,
    /// Skip the exact Fisher information (compute, optimize, sweep).
    #[arg(long)]
    pub skip_exact: bool,

    /// Comma-separated strategies for `sweep`.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub strategies: Option<Vec<StrategyKind>>,
    /// Strategy whose scaling is fitted by `scaling`.
    #[arg(long)]
    pub strategy: Option<StrategyKind>,
    #[arg(long, value_enum)]
    pub axis: Option<Axis>,
    /// First axis value of a sweep.
    #[arg(long)]
    pub from: Option<f64>,
    /// Last axis value of a sweep.
    #[arg(long)]
    pub to: Option<f64>,
    /// Number of points on the eta axis.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Smallest photon number of the scaling curve.
    #[arg(long)]
    pub n_min: Option<usize>,
    /// Largest photon number of the scaling curve.
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Half-width of the scaling fit window.
    #[arg(long)]
    pub window: Option<usize>,

    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Worker threads (config files only; the flag is global).
    #[arg(skip)]
    pub jobs: Option<usize>,
}

macro_rules! prefer {
    ($flags:ident, $file:ident; $($field:ident),*) => {
        $( $flags.$field = $flags.$field.or($file.$field); )*
    };
}

impl JobArgs {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }

    /// Fills every unset field from `file`.
    pub fn merge(mut self, file: JobArgs) -> Self {
        prefer!(self, file; command, n, eta_a, eta_b, eta, loss, state, m, p, weights,
            strategies, strategy, axis, from, to, steps, n_min, n_max, window, format,
            output, tolerance, max_iter, jobs);
        self.skip_exact |= file.skip_exact;
        self
    }

    pub fn options(&self) -> OptimizerOptions {
        let defaults = OptimizerOptions::default();
        OptimizerOptions {
            tolerance: self.tolerance.unwrap_or(defaults.tolerance),
            max_iter: self.max_iter.unwrap_or(defaults.max_iter),
            refine_exact: !self.skip_exact,
        }
    }

    pub fn require_n(&self) -> Result<usize, CliError> {
        self.n
            .ok_or_else(|| CliError::Config("--n is required".into()))
    }

    pub fn loss_mode(&self) -> LossMode {
        self.loss.unwrap_or(LossMode::BothArms)
    }

    /// The single `--eta` value, if any.
    pub fn single_eta(&self) -> Result<Option<f64>, CliError> {
        match self.eta.as_deref() {
            None => Ok(None),
            Some([eta]) => Ok(Some(*eta)),
            Some(_) => Err(CliError::Config("this command takes a single --eta".into())),
        }
    }

    /// Loss model from `--eta`/`--loss`, with `--eta-a`/`--eta-b` taking precedence.
    pub fn loss_model(&self) -> Result<LossModel, CliError> {
        let (mut eta_a, mut eta_b) = match self.single_eta()? {
            Some(eta) => match self.loss_mode() {
                LossMode::BothArms => (Some(eta), Some(eta)),
                LossMode::OneArm => (Some(eta), Some(1.0)),
            },
            None => (None, None),
        };
        eta_a = self.eta_a.or(eta_a);
        eta_b = self.eta_b.or(eta_b);
        match (eta_a, eta_b) {
            (Some(a), Some(b)) => Ok(LossModel::new(a, b)?),
            _ => Err(CliError::Config(
                "give --eta (with --loss) or both --eta-a and --eta-b".into(),
            )),
        }
    }

    /// Loss mode and transmissivity for strategy comparisons, which are defined
    /// only for equal loss in both arms or loss in arm a alone.
    pub fn strategy_loss(&self) -> Result<(LossMode, Option<f64>), CliError> {
        if self.eta_a.is_none() && self.eta_b.is_none() {
            return Ok((self.loss_mode(), self.single_eta()?));
        }
        let loss = self.loss_model()?;
        if loss.eta_b == 1.0 {
            Ok((LossMode::OneArm, Some(loss.eta_a)))
        } else if loss.eta_a == loss.eta_b {
            Ok((LossMode::BothArms, Some(loss.eta_a)))
        } else {
            Err(CliError::Config(
                "strategy comparisons need eta_a = eta_b or eta_b = 1".into(),
            ))
        }
    }

    pub fn reject(&self, present: bool, what: &str, command: &str) -> Result<(), CliError> {
        if present {
            return Err(CliError::Config(format!(
                "{what} does not apply to {command}"
            )));
        }
        Ok(())
    }
}

pub fn jobs_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("QFI_JOBS") {
        Ok(v) if !v.trim().is_empty() => v.trim().parse().map(Some).map_err(|_| {
            CliError::Config(format!("QFI_JOBS must be a positive integer, got '{v}'"))
        }),
        _ => Ok(None),
    }
}
