//! Closed-form precision benchmarks: Heisenberg limit, standard interferometric
//! limit, N00N states and the N00N chopping strategy.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::golden::golden_section_min;
use crate::state::LossModel;

/// Chopping constant for loss in both arms.
pub const ETA0_BOTH_ARMS: f64 = std::f64::consts::E;

/// Chopping constant for loss in one arm: `t^2` where `2 t ln t = 1 + t`.
pub const ETA0_ONE_ARM: f64 = 4.382_722_305_54;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LossMode {
    /// `eta_a = eta_b = eta`.
    #[serde(rename = "both")]
    BothArms,
    /// `eta_a = eta`, `eta_b = 1`.
    #[serde(rename = "one")]
    OneArm,
}

impl LossMode {
    pub fn loss(self, eta: f64) -> Result<LossModel> {
        match self {
            LossMode::BothArms => LossModel::symmetric(eta),
            LossMode::OneArm => LossModel::one_arm(eta),
        }
    }

    pub fn eta0(self) -> f64 {
        match self {
            LossMode::BothArms => ETA0_BOTH_ARMS,
            LossMode::OneArm => ETA0_ONE_ARM,
        }
    }

    /// `eta~` of the chopping formula: 1 for both arms, `eta` for one arm.
    fn tilde(self, eta: f64) -> f64 {
        match self {
            LossMode::BothArms => 1.0,
            LossMode::OneArm => eta,
        }
    }
}

impl fmt::Display for LossMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossMode::BothArms => "both",
            LossMode::OneArm => "one",
        })
    }
}

impl FromStr for LossMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "both" | "both-arms" => Ok(LossMode::BothArms),
            "one" | "one-arm" => Ok(LossMode::OneArm),
            other => contract(format!(
                "unknown loss mode '{other}' (expected both or one)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    Heisenberg,
    Sil,
    Noon,
    UnbalancedNoon,
    Chopping,
    Optimal,
    TwoComponent,
    TwinFock,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 8] = [
        StrategyKind::Heisenberg,
        StrategyKind::Sil,
        StrategyKind::Noon,
        StrategyKind::UnbalancedNoon,
        StrategyKind::Chopping,
        StrategyKind::Optimal,
        StrategyKind::TwoComponent,
        StrategyKind::TwinFock,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Heisenberg => "heisenberg",
            StrategyKind::Sil => "sil",
            StrategyKind::Noon => "noon",
            StrategyKind::UnbalancedNoon => "unbalanced-noon",
            StrategyKind::Chopping => "chopping",
            StrategyKind::Optimal => "optimal",
            StrategyKind::TwoComponent => "two-component",
            StrategyKind::TwinFock => "twin-fock",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .map_or_else(|| contract(format!("unknown strategy '{s}'")), Ok)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StrategySpec {
    pub kind: StrategyKind,
    pub loss_mode: LossMode,
}

impl StrategySpec {
    pub fn new(kind: StrategyKind, loss_mode: LossMode) -> Result<Self> {
        if kind == StrategyKind::UnbalancedNoon && loss_mode != LossMode::OneArm {
            return contract("unbalanced-noon is only defined for loss in one arm");
        }
        Ok(Self { kind, loss_mode })
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta <= 1.0) {
        return contract(format!("transmissivity must lie in (0, 1], got {eta}"));
    }
    Ok(())
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return contract("photon number must be at least 1");
    }
    Ok(())
}

pub fn heisenberg_limit(n: usize) -> Result<f64> {
    check_n(n)?;
    Ok(1.0 / n as f64)
}

/// Standard interferometric limit: a coherent-state Mach-Zehnder with the same loss.
pub fn sil(n: usize, eta: f64, mode: LossMode) -> Result<f64> {
    check_n(n)?;
    check_eta(eta)?;
    let shot = (n as f64 * eta).sqrt();
    Ok(match mode {
        LossMode::BothArms => 1.0 / shot,
        LossMode::OneArm => (1.0 + eta.sqrt()) / (2.0 * shot),
    })
}

fn noon_continuous(n: f64, eta: f64, mode: LossMode, balanced: bool) -> f64 {
    match (mode, balanced) {
        (LossMode::BothArms, _) => 1.0 / (n * eta.powf(n / 2.0)),
        (LossMode::OneArm, true) => (1.0 + eta.powf(-n)).sqrt() / (std::f64::consts::SQRT_2 * n),
        (LossMode::OneArm, false) => (1.0 + eta.powf(-n / 2.0)) / (2.0 * n),
    }
}

/// N00N precision; `balanced = false` selects the best unequal-amplitude N00N
/// state, which only differs from the balanced one under one-arm loss.
pub fn noon_precision(n: usize, eta: f64, mode: LossMode, balanced: bool) -> Result<f64> {
    check_n(n)?;
    check_eta(eta)?;
    if !balanced && mode != LossMode::OneArm {
        return contract("unbalanced N00N precision is only defined for loss in one arm");
    }
    Ok(noon_continuous(n as f64, eta, mode, balanced))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChoppingRegime {
    /// Single photons per run.
    SinglePhoton,
    /// Interior optimum `n = ln(eta0)/|ln eta|`.
    Intermediate,
    /// The whole budget in one N00N state.
    Unchopped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChoppingResult {
    pub precision: f64,
    pub regime: ChoppingRegime,
    /// Photons per sub-state, treated as continuous.
    pub n_per_run: f64,
    pub eta0: f64,
}

/// Best precision from splitting `n_total` photons into equal n00n states.
pub fn chopping(n_total: usize, eta: f64, mode: LossMode) -> Result<ChoppingResult> {
    check_n(n_total)?;
    check_eta(eta)?;
    let n = n_total as f64;
    let eta0 = mode.eta0();
    let tilde = mode.tilde(eta);
    let tilde0 = mode.tilde(eta0);
    let ln_eta = eta.ln().abs();

    let result = if eta <= 1.0 / eta0 {
        ChoppingResult {
            precision: (1.0 + tilde.sqrt()) / (2.0 * (n * eta).sqrt()),
            regime: ChoppingRegime::SinglePhoton,
            n_per_run: 1.0,
            eta0,
        }
    } else if eta <= eta0.powf(-1.0 / n) {
        ChoppingResult {
            precision: (1.0 + tilde0.sqrt()) / (2.0 * (n * tilde0).sqrt())
                * (eta0 * ln_eta / eta0.ln()).sqrt(),
            regime: ChoppingRegime::Intermediate,
            n_per_run: eta0.ln() / ln_eta,
            eta0,
        }
    } else {
        ChoppingResult {
            precision: (1.0 + tilde.powf(n / 2.0)) / (2.0 * n * eta.powf(n / 2.0)),
            regime: ChoppingRegime::Unchopped,
            n_per_run: n,
            eta0,
        }
    };
    Ok(result)
}

/// Chopping optimum found by direct minimization over a continuous sub-state size.
///
/// Independent of the closed form in [`chopping`]. In the intermediate regime the
/// reported `eta0` is recovered from the minimizer as `eta^(-n*)`.
pub fn chopping_numeric(n_total: usize, eta: f64, mode: LossMode) -> Result<ChoppingResult> {
    check_n(n_total)?;
    check_eta(eta)?;
    let total = n_total as f64;
    // The best N00N variant for the mode: unbalanced only helps for one-arm loss.
    let balanced = mode == LossMode::BothArms;
    let per_budget = |n: f64| noon_continuous(n, eta, mode, balanced) * (n / total).sqrt();

    let found = golden_section_min(per_budget, 1.0, total, 1e-12 * total);
    // Golden section never evaluates the endpoints, which are legitimate optima.
    let (n_star, precision) = [
        (1.0, per_budget(1.0)),
        (total, per_budget(total)),
        (found.x, found.value),
    ]
    .into_iter()
    .fold((f64::NAN, f64::INFINITY), |best, c| {
        if c.1 < best.1 {
            c
        } else {
            best
        }
    });

    let edge = 1e-6 * total;
    let (regime, eta0) = if n_star - 1.0 <= edge {
        (ChoppingRegime::SinglePhoton, mode.eta0())
    } else if total - n_star <= edge {
        (ChoppingRegime::Unchopped, mode.eta0())
    } else {
        (ChoppingRegime::Intermediate, eta.powf(-n_star))
    };
    Ok(ChoppingResult {
        precision,
        regime,
        n_per_run: n_star,
        eta0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn heisenberg_examples() {
        assert_eq!(heisenberg_limit(10).unwrap(), 0.1);
        assert_eq!(heisenberg_limit(1).unwrap(), 1.0);
        assert_eq!(heisenberg_limit(20).unwrap(), 0.05);
        assert!(heisenberg_limit(0).is_err());
    }

    #[test]
    fn sil_examples() {
        assert!((sil(20, 0.9, LossMode::BothArms).unwrap() - 0.235_702_260_4).abs() < 1e-9);
        assert!((sil(20, 0.9, LossMode::OneArm).unwrap() - 0.229_654_529).abs() < 1e-9);
        let a = sil(20, 1.0, LossMode::BothArms).unwrap();
        let b = sil(20, 1.0, LossMode::OneArm).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, 1.0 / 20f64.sqrt());
        assert!(sil(20, 0.0, LossMode::BothArms).is_err());
    }

    #[test]
    fn noon_examples() {
        let both = noon_precision(4, 0.9, LossMode::BothArms, true).unwrap();
        assert!(rel(both, 1.0 / (4.0 * 0.81)) < 1e-15);
        assert!((both - 0.30864).abs() < 1e-5);
        let one = noon_precision(4, 0.9, LossMode::OneArm, true).unwrap();
        assert!((one - 0.280_855_718).abs() < 1e-9);
        for mode in [LossMode::BothArms, LossMode::OneArm] {
            assert!((noon_precision(4, 1.0, mode, true).unwrap() - 0.25).abs() < 1e-15);
        }
        assert!(noon_precision(4, 0.9, LossMode::BothArms, false).is_err());
    }

    #[test]
    fn unbalanced_never_worse() {
        for n in 1..40 {
            for i in 1..=20 {
                let eta = i as f64 / 20.0;
                let u = noon_precision(n, eta, LossMode::OneArm, false).unwrap();
                let b = noon_precision(n, eta, LossMode::OneArm, true).unwrap();
                assert!(u <= b * (1.0 + 1e-15));
            }
        }
    }

    #[test]
    fn chopping_examples() {
        let low = chopping(37, 0.2, LossMode::BothArms).unwrap();
        assert_eq!(low.regime, ChoppingRegime::SinglePhoton);
        assert!(rel(low.precision, sil(37, 0.2, LossMode::BothArms).unwrap()) < 1e-15);

        let mid = chopping(100, 0.9, LossMode::BothArms).unwrap();
        assert_eq!(mid.regime, ChoppingRegime::Intermediate);
        assert!((mid.precision - 0.05352).abs() < 1e-5);
        assert!((mid.n_per_run - 9.4912).abs() < 1e-4);

        let high = chopping(5, 0.99, LossMode::BothArms).unwrap();
        assert_eq!(high.regime, ChoppingRegime::Unchopped);
        let noon = noon_precision(5, 0.99, LossMode::BothArms, true).unwrap();
        assert!(rel(high.precision, noon) < 1e-14);
    }

    #[test]
    fn numeric_chopping_examples() {
        let mid = chopping_numeric(100, 0.9, LossMode::BothArms).unwrap();
        assert!((mid.n_per_run - 1.0 / 0.9f64.ln().abs()).abs() < 1e-5);
        let lossless = chopping_numeric(30, 1.0, LossMode::OneArm).unwrap();
        assert_eq!(lossless.n_per_run, 30.0);
        assert!(rel(lossless.precision, 1.0 / 30.0) < 1e-15);
    }

    #[test]
    fn one_arm_constant_solves_stationarity() {
        // Newton on 2 t ln t = 1 + t.
        let mut t: f64 = 2.0;
        for _ in 0..50 {
            let f = 2.0 * t * t.ln() - 1.0 - t;
            let df = 2.0 * t.ln() + 1.0;
            t -= f / df;
        }
        assert!(rel(ETA0_ONE_ARM, t * t) < 1e-11);
        let r = chopping_numeric(1000, 0.95, LossMode::OneArm).unwrap();
        assert_eq!(r.regime, ChoppingRegime::Intermediate);
        assert!(r.eta0 > 4.38 && r.eta0 < 4.39, "eta0 = {}", r.eta0);
    }

    #[test]
    fn unbalanced_strategy_needs_one_arm() {
        assert!(StrategySpec::new(StrategyKind::UnbalancedNoon, LossMode::BothArms).is_err());
        assert!(StrategySpec::new(StrategyKind::UnbalancedNoon, LossMode::OneArm).is_ok());
    }

    #[test]
    fn names_round_trip() {
        for k in StrategyKind::ALL {
            assert_eq!(k.name().parse::<StrategyKind>().unwrap(), k);
        }
        assert!("bogus".parse::<StrategyKind>().is_err());
        assert_eq!("one".parse::<LossMode>().unwrap(), LossMode::OneArm);
    }
}
