//! Planner objective as a function of the promised utility `u`, its
//! minimization, and quadrature of arbitrary rules under best responses.

use super::response::{conditional_loss, interior_prob, preferred_prob};
use super::{respond, BestResponse, ManipulationEnv, PublicationRule, ResponsePolicy, SmoothedRule};
use crate::error::{Error, Result};
use crate::gaussian::{pdf, Probability};
use crate::numeric::{bisect, breakpoints, integrate, scan_then_golden};
use serde::{Deserialize, Serialize};
use std::cell::Cell;

/// Absolute quadrature tolerance for every expectation over the type.
pub const OBJECTIVE_TOL: f64 = 1e-10;
/// Grid size of the global scan preceding golden-section refinement.
pub const SCAN_POINTS: usize = 1001;

/// Type-space integration reaches this many standard deviations past the
/// largest cutoff any rule here can use.
const TAIL_SIGMAS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManipulationSolution {
    /// Equilibrium utility of the marginal type `γ*`.
    pub u_star: f64,
    pub x_star: f64,
    pub expected_loss: f64,
    pub slope: f64,
}

impl ManipulationSolution {
    pub fn rule(&self) -> SmoothedRule {
        SmoothedRule { cutoff: self.x_star, slope: self.slope }
    }

    pub fn publication_rule(&self) -> PublicationRule {
        PublicationRule::Smoothed(self.rule())
    }
}

/// Folded density of `|Y|`, `Y ~ N(0, S² + η²)`.
fn folded_density(env: &ManipulationEnv, y: f64) -> f64 {
    let s = env.sigma_y();
    2.0 * pdf(y / s) / s
}

fn upper_limit(env: &ManipulationEnv, cutoff: f64) -> f64 {
    let natural = env.gamma_star() + env.max_bias();
    natural.max(cutoff) + TAIL_SIGMAS * env.sigma_y()
}

/// First `|y|` in `[lo, hi]` at which the preferred probability under the
/// promised-utility schedule `v(y)` reaches one.
fn saturation_point(env: &ManipulationEnv, lo: f64, hi: f64, v: impl Fn(f64) -> f64) -> Option<f64> {
    if !(hi > lo) {
        return None;
    }
    let g = |y: f64| interior_prob(env, y, v(y).min(1.0)) - 1.0;
    bisect(g, lo, hi, 1e-14).ok()
}

/// Expected planner loss when the marginal type `γ*` is promised utility
/// `u ∈ [0, 1 − C0]`, under the planner's preferred equilibrium.
pub fn planner_objective(env: &ManipulationEnv, u: f64) -> Result<f64> {
    let top = 1.0 - env.c0;
    if !(u >= -1e-12 && u <= top + 1e-12) {
        return Err(Error::domain(format!("promised utility {u} outside [0, {top}]")));
    }
    let u = u.clamp(0.0, top);
    let g = env.gamma_star();
    let lo = (g - u / env.cm).max(0.0);
    let x_star = g + (top - u) / env.cm;
    let v = |y: f64| (u + env.c0 + env.cm * (y - g)).min(1.0);
    let onset = saturation_point(env, g, x_star, v);
    let integrand = |y: f64| {
        let vy = v(y);
        let p = preferred_prob(env, y, vy);
        let bias = (p - vy) / env.cm;
        let w2 = env.omega().powi(2);
        (w2 * (bias * bias - y * y) + env.ca) * p * folded_density(env, y)
    };
    let pts = breakpoints(lo, upper_limit(env, x_star), &[g, x_star, onset.unwrap_or(f64::NAN)]);
    Ok(integrate(integrand, &pts, OBJECTIVE_TOL)?.value + env.eta2)
}

/// Optimal linearly smoothed cutoff rule: global scan over `u` followed by
/// golden-section refinement.
pub fn optimize_rule(env: &ManipulationEnv) -> Result<ManipulationSolution> {
    let failure = Cell::new(None);
    let objective = |u: f64| match planner_objective(env, u) {
        Ok(v) => v,
        Err(e) => {
            failure.set(Some(e));
            f64::NAN
        }
    };
    let top = 1.0 - env.c0;
    let best = scan_then_golden(objective, 0.0, top, SCAN_POINTS, 1e-11);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    if !best.value.is_finite() {
        return Err(Error::Numerical("planner objective is not finite".into()));
    }
    Ok(ManipulationSolution {
        u_star: best.x,
        x_star: env.gamma_star() + (top - best.x) / env.cm,
        expected_loss: best.value,
        slope: env.cm,
    })
}

/// Equilibrium response of type `y` to the optimal rule, derived from the
/// promised-utility schedule `v(y) = u* + C0 + c_m(|y| − γ*)`.
pub fn equilibrium_map(env: &ManipulationEnv, sol: &ManipulationSolution, y: f64) -> BestResponse {
    let y_abs = y.abs();
    let g = env.gamma_star();
    if y_abs >= sol.x_star {
        return BestResponse {
            pub_prob: Probability::ONE,
            bias: 0.0,
            utility: 1.0 - env.c0,
            participates: true,
            reported_abs: y_abs,
        };
    }
    if y_abs < g - sol.u_star / env.cm {
        return BestResponse::out(y_abs);
    }
    let v = (sol.u_star + env.c0 + env.cm * (y_abs - g)).min(1.0);
    let p = preferred_prob(env, y_abs, v);
    if p >= 1.0 {
        return BestResponse {
            pub_prob: Probability::ONE,
            bias: sol.x_star - y_abs,
            utility: v - env.c0,
            participates: true,
            reported_abs: sol.x_star,
        };
    }
    let bias = (p - v) / env.cm;
    BestResponse {
        pub_prob: Probability::saturating(p),
        bias,
        utility: v - env.c0,
        participates: true,
        reported_abs: y_abs + bias,
    }
}

/// Closed-form (quadrature) summaries of a rule under a response policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuleMoments {
    /// Ex-ante publication probability.
    pub published: f64,
    /// Share of published findings with positive bias.
    pub manipulated_share: Option<f64>,
    /// Mean bias among published findings.
    pub average_bias: Option<f64>,
    pub expected_loss: f64,
}

fn rule_breakpoints(env: &ManipulationEnv, rule: &PublicationRule) -> Vec<f64> {
    let cutoff = rule.cutoff();
    let g = env.gamma_star();
    let mut interior = vec![
        g,
        cutoff,
        cutoff - 1.0 / rule.slope(),
        cutoff - 1.0 / env.cm,
        cutoff - env.max_bias(),
    ];
    if let PublicationRule::Smoothed(s) = rule {
        let ramp = s.ramp_start().max(g);
        let v = |y: f64| 1.0 - env.cm * (cutoff - y);
        interior.extend(saturation_point(env, ramp, cutoff, v));
    }
    breakpoints(0.0, upper_limit(env, cutoff), &interior)
}

fn integrate_response<F>(env: &ManipulationEnv, rule: &PublicationRule, policy: ResponsePolicy, pts: &[f64], f: F) -> Result<f64>
where
    F: Fn(f64, &BestResponse) -> f64,
{
    let integrand = |y: f64| {
        let r = respond(env, rule, y, policy);
        f(y, &r) * folded_density(env, y)
    };
    Ok(integrate(integrand, pts, OBJECTIVE_TOL)?.value)
}

/// Expected planner loss of a fixed rule when researchers follow `policy`.
pub fn expected_loss_under_rule(env: &ManipulationEnv, rule: &PublicationRule, policy: ResponsePolicy) -> Result<f64> {
    let pts = rule_breakpoints(env, rule);
    let excess = integrate_response(env, rule, policy, &pts, |y, r| conditional_loss(env, y, r))?;
    Ok(env.eta2 + excess)
}

pub fn rule_moments(env: &ManipulationEnv, rule: &PublicationRule, policy: ResponsePolicy) -> Result<RuleMoments> {
    let pts = rule_breakpoints(env, rule);
    let published = integrate_response(env, rule, policy, &pts, |_, r| {
        if r.participates { r.pub_prob.value() } else { 0.0 }
    })?;
    let manipulated = integrate_response(env, rule, policy, &pts, |_, r| {
        if r.participates && r.manipulated() { r.pub_prob.value() } else { 0.0 }
    })?;
    let bias = integrate_response(env, rule, policy, &pts, |_, r| {
        if r.participates { r.pub_prob.value() * r.bias } else { 0.0 }
    })?;
    let excess = integrate_response(env, rule, policy, &pts, |y, r| conditional_loss(env, y, r))?;
    let conditional = |num: f64| (published > 0.0).then(|| num / published);
    Ok(RuleMoments {
        published,
        manipulated_share: conditional(manipulated),
        average_bias: conditional(bias),
        expected_loss: env.eta2 + excess,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn five_pct() -> ManipulationEnv {
        ManipulationEnv::from_cutoff(1.94, 1.0, 0.98, 1.96, 0.0).unwrap()
    }

    #[test]
    fn objective_domain() {
        let env = five_pct();
        assert!(planner_objective(&env, -0.1).is_err());
        assert!(planner_objective(&env, 1.1).is_err());
        assert!(planner_objective(&env, 0.0).is_ok());
        assert!(planner_objective(&env, 1.0).is_ok());
    }

    #[test]
    fn endpoint_slopes() {
        let env = five_pct();
        let h = 1e-4;
        let e0 = planner_objective(&env, 0.0).unwrap();
        let e1 = planner_objective(&env, h).unwrap();
        assert!(e1 < e0);
        let top = 1.0 - env.c0;
        let f0 = planner_objective(&env, top).unwrap();
        let f1 = planner_objective(&env, top - h).unwrap();
        assert!(f0 > f1);
    }

    #[test]
    fn objective_at_zero_publishes_above_gamma_star() {
        // Promising nothing to γ* still publishes every type above it,
        // and those types lower the loss below the no-publication level.
        let env = five_pct();
        let e0 = planner_objective(&env, 0.0).unwrap();
        assert!(e0 < env.eta2);
    }

    #[test]
    fn optimum_matches_rule_quadrature() {
        let env = five_pct();
        let sol = optimize_rule(&env).unwrap();
        assert!((sol.x_star - 2.64).abs() <= 0.03, "{}", sol.x_star);
        let via_rule = expected_loss_under_rule(&env, &sol.publication_rule(), ResponsePolicy::BestRespond).unwrap();
        assert!((via_rule - sol.expected_loss).abs() < 1e-8, "{via_rule} vs {}", sol.expected_loss);
    }

    #[test]
    fn equilibrium_map_agrees_with_generic_response() {
        let env = five_pct();
        let sol = optimize_rule(&env).unwrap();
        let rule = sol.publication_rule();
        for i in 0..600 {
            let y = -3.0 + i as f64 * 0.01 + 0.003;
            let a = equilibrium_map(&env, &sol, y);
            let b = respond(&env, &rule, y, ResponsePolicy::BestRespond);
            let pa = if a.participates { a.pub_prob.value() } else { 0.0 };
            let pb = if b.participates { b.pub_prob.value() } else { 0.0 };
            assert!((pa - pb).abs() < 1e-9, "y={y}: {pa} vs {pb}");
            assert!((a.bias - b.bias).abs() < 1e-9, "y={y}");
        }
    }
}
