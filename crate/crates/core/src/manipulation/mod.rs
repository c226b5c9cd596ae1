//! The manipulation game: the researcher sees `Y = θ + ε` before choosing a
//! bias `β ≥ 0` at marginal cost `c_m`, and the planner can only condition
//! publication on the reported `X = Y + sign(Y) β`.
//!
//! The optimal rule is a linearly smoothed cutoff whose ramp slope equals
//! the manipulation cost; it is pinned down by the utility `u*` promised to
//! the marginal type `γ*`, which [`optimize_rule`] finds numerically.

mod objective;
mod prereg;
mod response;

pub use objective::{
    equilibrium_map, expected_loss_under_rule, optimize_rule, planner_objective, rule_moments,
    ManipulationSolution, RuleMoments, OBJECTIVE_TOL, SCAN_POINTS,
};
pub use prereg::{
    compare_prereg_vs_manipulable, compare_with_solution, prereg_crossover_cost, prereg_loss_ratio,
    PreregChoice, PreregComparison,
};
pub use response::{best_response, respond, type_loss, BestResponse, ResponsePolicy};

use crate::design::{Design, Environment, ThresholdRule};
use crate::error::{Error, Result};
use crate::gaussian::Probability;
use serde::{Deserialize, Serialize};

/// Parameters of the manipulation game. `s2` is the common, verifiable
/// noise variance; `c0` is the fixed research cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManipulationEnv {
    pub eta2: f64,
    pub s2: f64,
    pub ca: f64,
    pub cm: f64,
    pub c0: f64,
}

impl ManipulationEnv {
    pub fn new(eta2: f64, s2: f64, ca: f64, cm: f64, c0: f64) -> Result<Self> {
        let check = |ok: bool, what: &str, v: f64| {
            if ok {
                Ok(())
            } else {
                Err(Error::invalid(format!("{what} out of range: {v}")))
            }
        };
        check(eta2 > 0.0 && eta2.is_finite(), "eta2", eta2)?;
        check(s2 >= 0.0 && s2.is_finite(), "s2", s2)?;
        check(ca > 0.0 && ca.is_finite(), "ca", ca)?;
        check(cm > 0.0 && cm.is_finite(), "cm", cm)?;
        check((0.0..1.0).contains(&c0), "c0", c0)?;
        Ok(ManipulationEnv { eta2, s2, ca, cm, c0 })
    }

    /// Builds the environment whose no-manipulation cutoff `γ*` equals
    /// `cutoff`, i.e. `c_a = (cutoff · η² / (S² + η²))²`.
    pub fn from_cutoff(eta2: f64, s2: f64, cm: f64, cutoff: f64, c0: f64) -> Result<Self> {
        if !(cutoff > 0.0) {
            return Err(Error::invalid(format!("cutoff must be positive, got {cutoff}")));
        }
        let ca = (cutoff * eta2 / (s2 + eta2)).powi(2);
        ManipulationEnv::new(eta2, s2, ca, cm, c0)
    }

    /// Shrinkage factor `η² / (S² + η²)` of the audience's posterior mean.
    pub fn omega(&self) -> f64 {
        self.eta2 / (self.s2 + self.eta2)
    }

    pub fn gamma_star(&self) -> f64 {
        self.ca.sqrt() / self.omega()
    }

    /// Standard deviation of the type `Y`.
    pub fn sigma_y(&self) -> f64 {
        (self.s2 + self.eta2).sqrt()
    }

    /// Largest bias any researcher would ever pay for.
    pub fn max_bias(&self) -> f64 {
        (1.0 - self.c0) / self.cm
    }

    pub fn design_env(&self) -> Environment {
        Environment { eta2: self.eta2, ca: self.ca }
    }

    /// Pre-registered experiment with the same variance and cost `cost`.
    pub fn experiment(&self, cost: f64) -> Result<Design> {
        Design::new(self.s2, cost)
    }
}

/// Publish with probability 0 below `cutoff − 1/slope`, 1 above `cutoff`,
/// and linearly in `|x|` in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothedRule {
    pub cutoff: f64,
    pub slope: f64,
}

impl SmoothedRule {
    pub fn new(cutoff: f64, slope: f64) -> Result<Self> {
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(Error::invalid(format!("cutoff must be positive, got {cutoff}")));
        }
        if !(slope > 0.0) {
            return Err(Error::invalid(format!("slope must be positive, got {slope}")));
        }
        Ok(SmoothedRule { cutoff, slope })
    }

    pub fn ramp_start(&self) -> f64 {
        self.cutoff - 1.0 / self.slope
    }

    pub fn eval(&self, x: f64) -> Probability {
        smoothed_rule_eval(self, x)
    }
}

pub fn smoothed_rule_eval(rule: &SmoothedRule, x: f64) -> Probability {
    let ax = x.abs();
    if ax >= rule.cutoff {
        Probability::ONE
    } else if ax <= rule.ramp_start() {
        Probability::ZERO
    } else {
        Probability::saturating(1.0 - rule.slope * (rule.cutoff - ax))
    }
}

/// Either rule shape; a threshold is the infinite-slope limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PublicationRule {
    Threshold(ThresholdRule),
    Smoothed(SmoothedRule),
}

impl PublicationRule {
    pub fn threshold(cutoff: f64) -> Result<Self> {
        ThresholdRule::new(cutoff).map(PublicationRule::Threshold)
    }

    pub fn eval(&self, x: f64) -> Probability {
        match self {
            PublicationRule::Threshold(t) => {
                if t.publishes(x) {
                    Probability::ONE
                } else {
                    Probability::ZERO
                }
            }
            PublicationRule::Smoothed(s) => s.eval(x),
        }
    }

    /// Point above which publication is certain.
    pub fn cutoff(&self) -> f64 {
        match self {
            PublicationRule::Threshold(t) => t.cutoff,
            PublicationRule::Smoothed(s) => s.cutoff,
        }
    }

    pub fn slope(&self) -> f64 {
        match self {
            PublicationRule::Threshold(_) => f64::INFINITY,
            PublicationRule::Smoothed(s) => s.slope,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn env_validation() {
        assert!(ManipulationEnv::new(1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(ManipulationEnv::new(1.0, -1.0, 1.0, 1.0, 0.0).is_err());
        assert!(ManipulationEnv::new(1.0, 1.0, 1.0, 0.0, 0.0).is_err());
        let env = ManipulationEnv::from_cutoff(1.94, 1.0, 0.98, 1.96, 0.0).unwrap();
        assert!((env.gamma_star() - 1.96).abs() < 1e-12);
        assert!((env.omega() - 1.94 / 2.94).abs() < 1e-15);
    }

    #[test]
    fn smoothed_rule_shape() {
        let r = SmoothedRule::new(2.0, 0.5).unwrap();
        assert_eq!(r.eval(2.0).value(), 1.0);
        assert_eq!(r.eval(-2.5).value(), 1.0);
        assert_eq!(r.eval(0.0).value(), 0.0);
        assert!((r.eval(1.0).value() - 0.5).abs() < 1e-15);
        assert!((r.eval(-1.0).value() - 0.5).abs() < 1e-15);
        let mut prev = 0.0;
        for i in 0..=400 {
            let p = r.eval(i as f64 * 0.01).value();
            assert!(p >= prev);
            prev = p;
        }
        assert!(SmoothedRule::new(0.0, 1.0).is_err());
        assert!(SmoothedRule::new(1.0, 0.0).is_err());
    }
}
