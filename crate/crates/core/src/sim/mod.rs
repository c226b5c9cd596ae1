//! Monte Carlo populations of researchers playing against a publication rule.

mod histogram;
pub mod rng;

pub use histogram::{histogram_export, Atom, Bin, BinSpec, Histogram, HistogramField, ATOM_RATIO};

use crate::error::{Error, Result};
use crate::gaussian::Probability;
use crate::manipulation::{equilibrium_map, respond, ManipulationEnv, ManipulationSolution, PublicationRule, ResponsePolicy};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rng::{StreamFactory, POPULATION_DOMAIN, PUBLICATION_DOMAIN};
use serde::{Deserialize, Serialize};

/// Bias above which a record counts as manipulated.
pub const MANIPULATION_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Draw {
    pub theta: f64,
    pub eps: f64,
}

impl Draw {
    pub fn y(&self) -> f64 {
        self.theta + self.eps
    }
}

/// `n` independent `(θ, ε)` pairs, `θ ~ N(0, η²)`, `ε ~ N(0, S²)`.
pub fn sample_population(env: &ManipulationEnv, n: usize, seed: u64) -> Result<Vec<Draw>> {
    if n == 0 {
        return Err(Error::domain("population size must be at least 1"));
    }
    let factory = StreamFactory::new(seed, POPULATION_DOMAIN);
    let (eta, s) = (env.eta2.sqrt(), env.s2.sqrt());
    Ok((0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = factory.stream(i);
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            Draw { theta: eta * z1, eps: s * z2 }
        })
        .collect())
}

/// The rule researchers face in a simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimRule {
    Fixed(PublicationRule),
    /// The optimal smoothed rule; best responses follow the equilibrium map.
    Optimal(ManipulationSolution),
}

impl SimRule {
    pub fn publication_rule(&self) -> PublicationRule {
        match self {
            SimRule::Fixed(r) => *r,
            SimRule::Optimal(sol) => sol.publication_rule(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumRecord {
    pub theta: f64,
    pub eps: f64,
    pub y: f64,
    pub bias: f64,
    pub reported_x: f64,
    pub pub_prob: Probability,
    pub published: bool,
}

/// Responses of every drawn type, with publication realized by an
/// independent uniform per record.
pub fn simulate_equilibrium(
    env: &ManipulationEnv,
    rule: &SimRule,
    policy: ResponsePolicy,
    population: &[Draw],
    seed: u64,
) -> Vec<EquilibriumRecord> {
    let factory = StreamFactory::new(seed, PUBLICATION_DOMAIN);
    let fixed = rule.publication_rule();
    population
        .par_iter()
        .enumerate()
        .map(|(i, d)| {
            let y = d.y();
            let r = match (rule, policy) {
                (SimRule::Optimal(sol), ResponsePolicy::BestRespond) => equilibrium_map(env, sol, y),
                _ => respond(env, &fixed, y, policy),
            };
            let pub_prob = if r.participates { r.pub_prob } else { Probability::ZERO };
            let u: f64 = factory.stream(i as u64).random();
            EquilibriumRecord {
                theta: d.theta,
                eps: d.eps,
                y,
                bias: r.bias,
                reported_x: r.reported_x(y),
                pub_prob,
                published: u < pub_prob.value(),
            }
        })
        .collect()
}

/// Aggregates in the layout of the calibrated table. Shares within
/// published findings are `None` when nothing was published.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n: usize,
    pub n_published: usize,
    /// Realized share of published records.
    pub pct_published: f64,
    /// Mean publication probability (the expected share).
    pub expected_published: f64,
    pub pct_manipulated_within_published: Option<f64>,
    pub avg_abs_bias_within_published: Option<f64>,
    pub se_published: f64,
}

pub fn summarize(records: &[EquilibriumRecord]) -> Result<SummaryStats> {
    if records.is_empty() {
        return Err(Error::domain("cannot summarize an empty record set"));
    }
    let n = records.len();
    let mut n_published = 0usize;
    let mut n_manipulated = 0usize;
    let mut bias_sum = 0.0;
    let mut prob_sum = 0.0;
    for r in records {
        prob_sum += r.pub_prob.value();
        if r.published {
            n_published += 1;
            bias_sum += r.bias.abs();
            if r.bias > MANIPULATION_EPS {
                n_manipulated += 1;
            }
        }
    }
    let p = n_published as f64 / n as f64;
    let within = |x: f64| (n_published > 0).then(|| x / n_published as f64);
    Ok(SummaryStats {
        n,
        n_published,
        pct_published: p,
        expected_published: prob_sum / n as f64,
        pct_manipulated_within_published: within(n_manipulated as f64),
        avg_abs_bias_within_published: within(bias_sum),
        se_published: (p * (1.0 - p) / n as f64).sqrt(),
    })
}
