//! Researcher best responses and the conditional planner loss they induce.

use super::{ManipulationEnv, PublicationRule};
use crate::gaussian::Probability;
use serde::{Deserialize, Serialize};

/// Slopes closer than this (relatively) to `c_m` leave the researcher
/// indifferent along the ramp.
const SLOPE_MATCH_TOL: f64 = 1e-12;

/// A researcher's chosen publication probability and bias.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestResponse {
    pub pub_prob: Probability,
    pub bias: f64,
    /// `pub_prob − c_m·bias − C0`; zero for non-participants.
    pub utility: f64,
    pub participates: bool,
    /// `|X|` of the submitted result (equals `|y| + bias` up to rounding;
    /// bunching types land exactly on the cutoff).
    pub reported_abs: f64,
}

impl BestResponse {
    pub(crate) fn out(y_abs: f64) -> Self {
        BestResponse {
            pub_prob: Probability::ZERO,
            bias: 0.0,
            utility: 0.0,
            participates: false,
            reported_abs: y_abs,
        }
    }

    /// Signed reported statistic.
    pub fn reported_x(&self, y: f64) -> f64 {
        if y < 0.0 {
            -self.reported_abs
        } else {
            self.reported_abs
        }
    }

    pub fn manipulated(&self) -> bool {
        self.bias > 1e-12
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponsePolicy {
    /// Maximize private payoff; ties go to the planner's preferred action.
    BestRespond,
    /// Report `θ + ε` unchanged.
    Truthful,
}

/// Unclamped interior optimum of the planner-preferred probability.
pub(crate) fn interior_prob(env: &ManipulationEnv, y_abs: f64, v: f64) -> f64 {
    let g = env.gamma_star();
    let disc = v * v + 3.0 * env.cm * env.cm * (y_abs * y_abs - g * g);
    (2.0 * v + disc.max(0.0).sqrt()) / 3.0
}

/// Planner-preferred publication probability among designs that give type
/// `y` gross utility `v` (publication probability net of manipulation cost).
pub(crate) fn preferred_prob(env: &ManipulationEnv, y_abs: f64, v: f64) -> f64 {
    if y_abs <= env.gamma_star() {
        v
    } else {
        interior_prob(env, y_abs, v).min(1.0).max(v)
    }
}

/// Loss-minimizing `(p, β)` with `p − c_m β = v`.
pub fn best_response(env: &ManipulationEnv, y: f64, v: Probability) -> BestResponse {
    let v = v.value();
    let y_abs = y.abs();
    let p = preferred_prob(env, y_abs, v);
    let bias = (p - v) / env.cm;
    BestResponse {
        pub_prob: Probability::saturating(p),
        bias,
        utility: v - env.c0,
        participates: true,
        reported_abs: y_abs + bias,
    }
}

/// Conditional loss of type `y` relative to not publishing, at the
/// planner-preferred response delivering gross utility `v`:
/// `(ω²(β² − y²) + c_a) p`.
pub fn type_loss(env: &ManipulationEnv, y: f64, v: Probability) -> f64 {
    let r = best_response(env, y, v);
    conditional_loss(env, y.abs(), &r)
}

pub(crate) fn conditional_loss(env: &ManipulationEnv, y_abs: f64, r: &BestResponse) -> f64 {
    if !r.participates {
        return 0.0;
    }
    let w2 = env.omega().powi(2);
    (w2 * (r.bias * r.bias - y_abs * y_abs) + env.ca) * r.pub_prob.value()
}

/// Researcher response to a fixed publication rule.
pub fn respond(env: &ManipulationEnv, rule: &PublicationRule, y: f64, policy: ResponsePolicy) -> BestResponse {
    let y_abs = y.abs();
    let stay = rule.eval(y_abs).value();
    let truthful = BestResponse {
        pub_prob: Probability::saturating(stay),
        bias: 0.0,
        utility: stay - env.c0,
        participates: true,
        reported_abs: y_abs,
    };
    if policy == ResponsePolicy::Truthful {
        return truthful;
    }
    let cutoff = rule.cutoff();
    if y_abs >= cutoff {
        return truthful;
    }
    let slope = rule.slope();
    if ((slope - env.cm) / env.cm).abs() <= SLOPE_MATCH_TOL {
        return respond_on_matched_ramp(env, cutoff, y_abs);
    }

    let mut options = vec![BestResponse::out(y_abs), truthful];
    if slope > env.cm {
        let jump_bias = cutoff - y_abs;
        options.push(BestResponse {
            pub_prob: Probability::ONE,
            bias: jump_bias,
            utility: 1.0 - env.cm * jump_bias - env.c0,
            participates: true,
            reported_abs: cutoff,
        });
    }
    pick_preferred(env, y_abs, &options)
}

/// Highest utility wins; exact ties go to the lowest planner loss.
fn pick_preferred(env: &ManipulationEnv, y_abs: f64, options: &[BestResponse]) -> BestResponse {
    let best_u = options.iter().map(|r| r.utility).fold(f64::NEG_INFINITY, f64::max);
    *options
        .iter()
        .filter(|r| r.utility >= best_u - 1e-15)
        .min_by(|a, b| conditional_loss(env, y_abs, a).total_cmp(&conditional_loss(env, y_abs, b)))
        .expect("at least one option")
}

/// Ramp slope equal to `c_m`: every bias up to the cutoff yields the same
/// payoff, so the planner-preferred point is chosen.
fn respond_on_matched_ramp(env: &ManipulationEnv, cutoff: f64, y_abs: f64) -> BestResponse {
    let v = 1.0 - env.cm * (cutoff - y_abs);
    if v < env.c0 {
        return BestResponse::out(y_abs);
    }
    let p = preferred_prob(env, y_abs, v);
    let clamped = p >= 1.0;
    let bias = if clamped { cutoff - y_abs } else { (p - v) / env.cm };
    let r = BestResponse {
        pub_prob: Probability::saturating(p),
        bias,
        utility: v - env.c0,
        participates: true,
        reported_abs: if clamped { cutoff } else { y_abs + bias },
    };
    if v == env.c0 && conditional_loss(env, y_abs, &r) > 0.0 {
        return BestResponse::out(y_abs);
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manipulation::SmoothedRule;

    fn env() -> ManipulationEnv {
        ManipulationEnv::from_cutoff(1.94, 1.0, 0.98, 1.96, 0.0).unwrap()
    }

    fn p(v: f64) -> Probability {
        Probability::new(v).unwrap()
    }

    #[test]
    fn below_gamma_star_no_bias() {
        let r = best_response(&env(), 1.0, p(0.7));
        assert_eq!(r.pub_prob.value(), 0.7);
        assert_eq!(r.bias, 0.0);
    }

    #[test]
    fn continuous_at_gamma_star() {
        let e = env();
        let g = e.gamma_star();
        let at = best_response(&e, g, p(0.4)).pub_prob.value();
        assert!((at - 0.4).abs() < 1e-15);
        let just_above = best_response(&e, g + 1e-9, p(0.4)).pub_prob.value();
        assert!((just_above - 0.4).abs() < 1e-6);
    }

    #[test]
    fn grid_brute_force_single_case() {
        let e = env();
        let (y, v) = (2.2, 0.6);
        let w2 = e.omega().powi(2);
        let n = 1_000_000;
        let mut best = (f64::INFINITY, v);
        for i in 0..=n {
            let pp = v + (1.0 - v) * i as f64 / n as f64;
            let b = (pp - v) / e.cm;
            let obj = (w2 * (b * b - y * y) + e.ca) * pp;
            if obj < best.0 {
                best = (obj, pp);
            }
        }
        let r = best_response(&e, y, p(v));
        assert!((r.pub_prob.value() - best.1).abs() <= 1e-5);
    }

    #[test]
    fn type_loss_signs() {
        let e = env();
        let g = e.gamma_star();
        assert_eq!(type_loss(&e, 1.0, p(0.0)), 0.0);
        assert!(type_loss(&e, 2.5, p(0.0)) < 0.0);
        assert!(type_loss(&e, g, p(0.5)).abs() < 1e-12);
        assert!(type_loss(&e, 2.5, p(0.5)) < 0.0);
        let y = 1.0;
        let expected = (e.ca - e.omega().powi(2) * y * y) * 0.5;
        assert!((type_loss(&e, y, p(0.5)) - expected).abs() < 1e-15);
        assert!(expected > 0.0);
    }

    #[test]
    fn naive_threshold_jump_window() {
        let e = env();
        let rule = PublicationRule::threshold(1.96).unwrap();
        let lo = 1.96 - 1.0 / e.cm;
        let inside = respond(&e, &rule, lo + 0.01, ResponsePolicy::BestRespond);
        assert_eq!(inside.reported_abs, 1.96);
        assert_eq!(inside.pub_prob.value(), 1.0);
        let outside = respond(&e, &rule, lo - 0.01, ResponsePolicy::BestRespond);
        assert_eq!(outside.pub_prob.value(), 0.0);
        assert_eq!(outside.bias, 0.0);
        let negative = respond(&e, &rule, -1.5, ResponsePolicy::BestRespond);
        assert_eq!(negative.reported_x(-1.5), -1.96);
        let truthful = respond(&e, &rule, 1.5, ResponsePolicy::Truthful);
        assert_eq!(truthful.pub_prob.value(), 0.0);
    }

    #[test]
    fn flat_ramp_means_no_manipulation() {
        let e = env();
        let rule = PublicationRule::Smoothed(SmoothedRule::new(2.5, 0.5).unwrap());
        let r = respond(&e, &rule, 2.0, ResponsePolicy::BestRespond);
        assert_eq!(r.bias, 0.0);
        assert!((r.pub_prob.value() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn matched_ramp_bunches_near_cutoff() {
        let e = env();
        let rule = PublicationRule::Smoothed(SmoothedRule::new(2.64, e.cm).unwrap());
        let r = respond(&e, &rule, 2.6, ResponsePolicy::BestRespond);
        assert_eq!(r.pub_prob.value(), 1.0);
        assert_eq!(r.reported_abs, 2.64);
        let low = respond(&e, &rule, 1.8, ResponsePolicy::BestRespond);
        assert_eq!(low.bias, 0.0);
        assert!((low.pub_prob.value() - rule.eval(1.8).value()).abs() < 1e-15);
    }
}
