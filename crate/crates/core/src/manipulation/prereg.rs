//! Pre-registered (non-manipulable, costly) experiment versus a free but
//! manipulable study with the same variance.

use super::{optimize_rule, ManipulationEnv, ManipulationSolution};
use crate::design::{incentive_cost, optimal_loss, publication_cutoff, publication_mass, Design};
use crate::error::{Error, Result};
use crate::numeric::bisect;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreregChoice {
    PrefersExperiment,
    PrefersManipulable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreregComparison {
    pub decision: PreregChoice,
    pub experiment_cost: f64,
    pub loss_experiment: f64,
    pub loss_manipulable: f64,
    pub incentive_cost: f64,
    /// `(1 + 2 S c_m) / c_m²`; incentive costs above it favour the
    /// manipulable study.
    pub ic_bound: f64,
}

pub fn compare_prereg_vs_manipulable(env: &ManipulationEnv, c_e: f64) -> Result<PreregComparison> {
    let sol = optimize_rule(env)?;
    compare_with_solution(env, &sol, c_e)
}

/// Same comparison against an already computed optimal rule.
pub fn compare_with_solution(env: &ManipulationEnv, sol: &ManipulationSolution, c_e: f64) -> Result<PreregComparison> {
    let exp = env.experiment(c_e)?;
    let denv = env.design_env();
    let loss_experiment = optimal_loss(&denv, &exp);
    let decision = if loss_experiment <= sol.expected_loss {
        PreregChoice::PrefersExperiment
    } else {
        PreregChoice::PrefersManipulable
    };
    Ok(PreregComparison {
        decision,
        experiment_cost: c_e,
        loss_experiment,
        loss_manipulable: sol.expected_loss,
        incentive_cost: incentive_cost(&denv, &exp),
        ic_bound: (1.0 + 2.0 * env.s2.sqrt() * env.cm) / (env.cm * env.cm),
    })
}

/// `L*_E / L*_M` for an experiment of cost `c_e`.
pub fn prereg_loss_ratio(env: &ManipulationEnv, manipulable_loss: f64, c_e: f64) -> Result<f64> {
    let exp = env.experiment(c_e)?;
    Ok(optimal_loss(&env.design_env(), &exp) / manipulable_loss)
}

/// Experiment cost at which both options give equal loss, if any.
pub fn prereg_crossover_cost(env: &ManipulationEnv, sol: &ManipulationSolution) -> Result<Option<f64>> {
    let denv = env.design_env();
    let gap = |c: f64| optimal_loss(&denv, &Design { s2: env.s2, cost: c }) - sol.expected_loss;
    if gap(1.0) <= 0.0 {
        return Ok(None);
    }
    let free_mass = publication_mass(&denv, &Design { s2: env.s2, cost: 0.0 }, publication_cutoff(env.eta2, env.s2, env.ca));
    if gap(free_mass) > 0.0 {
        return Err(Error::Numerical(
            "a free experiment loses to the manipulable study".into(),
        ));
    }
    bisect(gap, free_mass, 1.0, 1e-13).map(Some)
}
