//! Publication rules when the research design is observable and verifiable.
//!
//! A design is unbiased with variance `s2` and a private research cost in
//! `[0, 1]` (the value of a publication is normalized to one). The planner
//! picks a publication rule that minimizes expected audience loss plus
//! attention cost, subject to the researcher being willing to run the study.
//! The optimal rule is a two-sided threshold on `|X|`; everything here is in
//! closed form through `Φ` and [`upsilon`].

use crate::error::{Error, Result};
use crate::gaussian::{quantile, two_sided_tail, upsilon, Probability};
use crate::numeric::bisect;
use serde::{Deserialize, Serialize};

/// Relative tolerance below which two optimal losses count as equal.
pub const INDIFFERENCE_TOL: f64 = 1e-9;

/// Prior variance of the effect and attention cost per publication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub eta2: f64,
    pub ca: f64,
}

impl Environment {
    pub fn new(eta2: f64, ca: f64) -> Result<Self> {
        if !(eta2 > 0.0 && eta2.is_finite()) {
            return Err(Error::invalid(format!("eta2 must be positive, got {eta2}")));
        }
        if !(ca > 0.0 && ca.is_finite()) {
            return Err(Error::invalid(format!("ca must be positive, got {ca}")));
        }
        Ok(Environment { eta2, ca })
    }

    pub fn with_ca(self, ca: f64) -> Result<Self> {
        Environment::new(self.eta2, ca)
    }
}

/// An unbiased research design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub s2: f64,
    pub cost: f64,
}

impl Design {
    pub fn new(s2: f64, cost: f64) -> Result<Self> {
        if !(s2 >= 0.0 && s2.is_finite()) {
            return Err(Error::invalid(format!("s2 must be non-negative, got {s2}")));
        }
        if !(0.0..=1.0).contains(&cost) {
            return Err(Error::invalid(format!("cost must lie in [0, 1], got {cost}")));
        }
        Ok(Design { s2, cost })
    }

    /// The same design with no research cost.
    pub fn free(self) -> Design {
        Design { cost: 0.0, ..self }
    }
}

/// Publish iff `|X| ≥ cutoff`. An infinite cutoff never publishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRule {
    pub cutoff: f64,
}

impl ThresholdRule {
    pub fn new(cutoff: f64) -> Result<Self> {
        if cutoff >= 0.0 {
            Ok(ThresholdRule { cutoff })
        } else {
            Err(Error::invalid(format!("cutoff must be non-negative, got {cutoff}")))
        }
    }

    pub fn publishes(&self, x: f64) -> bool {
        x.abs() >= self.cutoff
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignClass {
    Cheap,
    Expensive,
}

/// `η⁴ / (S² + η²)`: reduction in the audience's posterior variance from a
/// published result.
pub fn post_var_red(env: &Environment, d: &Design) -> f64 {
    env.eta2 * env.eta2 / (d.s2 + env.eta2)
}

/// `√c_a (S² + η²) / η²` as a free function, valid for any `c_a ≥ 0`.
pub fn publication_cutoff(eta2: f64, s2: f64, ca: f64) -> f64 {
    ca.sqrt() * (s2 + eta2) / eta2
}

/// Cutoff the planner would use if the researcher's cost did not bind.
pub fn gamma_star(env: &Environment, d: &Design) -> f64 {
    publication_cutoff(env.eta2, d.s2, env.ca)
}

/// `P(|X| ≥ t)` with `X ~ N(0, S² + η²)`.
pub fn publication_mass(env: &Environment, d: &Design, cutoff: f64) -> f64 {
    if cutoff.is_infinite() {
        return 0.0;
    }
    two_sided_tail(cutoff / (d.s2 + env.eta2).sqrt())
}

pub fn classify_design(env: &Environment, d: &Design) -> DesignClass {
    if d.cost < publication_mass(env, d, gamma_star(env, d)) {
        DesignClass::Cheap
    } else {
        DesignClass::Expensive
    }
}

/// Cutoff giving ex-ante publication probability exactly `cost`.
fn participation_cutoff(env: &Environment, d: &Design) -> f64 {
    if d.cost <= 0.0 {
        return f64::INFINITY;
    }
    if d.cost >= 1.0 {
        return 0.0;
    }
    let z = quantile(0.5 * d.cost).expect("cost in (0,1)");
    z.abs() * (d.s2 + env.eta2).sqrt()
}

/// Constrained optimal threshold: the smaller of the free cutoff and the
/// cutoff that just satisfies participation.
pub fn optimal_cutoff(env: &Environment, d: &Design) -> ThresholdRule {
    ThresholdRule {
        cutoff: gamma_star(env, d).min(participation_cutoff(env, d)),
    }
}

fn loss_at_mass(env: &Environment, d: &Design, mass: f64) -> f64 {
    let mass = mass.clamp(0.0, 1.0);
    env.eta2 + mass * env.ca - post_var_red(env, d) * upsilon(mass).expect("mass in [0,1]")
}

/// Expected planner loss of an arbitrary threshold rule.
pub fn threshold_rule_loss(env: &Environment, d: &Design, rule: &ThresholdRule) -> f64 {
    loss_at_mass(env, d, publication_mass(env, d, rule.cutoff))
}

/// Planner loss under the constrained optimal rule.
pub fn optimal_loss(env: &Environment, d: &Design) -> f64 {
    let mass = match classify_design(env, d) {
        DesignClass::Expensive => d.cost,
        DesignClass::Cheap => publication_mass(env, d, gamma_star(env, d)),
    };
    loss_at_mass(env, d, mass)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Worthiness {
    Worthwhile,
    NotWorthwhile,
}

/// Which of the simple sufficient bounds agree with the exact verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorthwhileCertificate {
    pub class: DesignClass,
    /// `PostVarRed ≥ C c_a + η² (1 − C)³` (implies worthwhile).
    pub sufficient_bound: bool,
    /// `PostVarRed < C c_a` (implies not worthwhile).
    pub refuting_bound: bool,
}

/// Whether implementing the design beats publishing nothing (loss `η²`).
pub fn is_worthwhile(env: &Environment, d: &Design) -> (Worthiness, WorthwhileCertificate) {
    let class = classify_design(env, d);
    let pvr = post_var_red(env, d);
    let c = d.cost;
    let certificate = WorthwhileCertificate {
        class,
        sufficient_bound: pvr >= c * env.ca + env.eta2 * (1.0 - c).powi(3),
        refuting_bound: pvr < c * env.ca,
    };
    let verdict = match class {
        DesignClass::Cheap => Worthiness::Worthwhile,
        DesignClass::Expensive => {
            if upsilon(c).expect("cost in [0,1]") * pvr >= c * env.ca {
                Worthiness::Worthwhile
            } else {
                Worthiness::NotWorthwhile
            }
        }
    };
    (verdict, certificate)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preference {
    PlannerPrefersE,
    PlannerPrefersO,
    Indifferent,
}

/// Cross-checks reported alongside a design comparison. Only produced when
/// `E` is the more precise and more costly design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonDiagnostics {
    pub class_e: DesignClass,
    pub class_o: DesignClass,
    /// Cheap precise design; `E` must win.
    pub cheap_e_rule: bool,
    /// Sufficient bound for preferring `E`; `None` if `E` is cheap.
    pub bound_prefers_e: Option<bool>,
    /// Sufficient bound for preferring `O`; `None` if `E` is cheap.
    pub bound_prefers_o: Option<bool>,
    /// Attention cost at which the planner switches from `E` to `O`.
    pub critical_attention_cost: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignComparison {
    pub preference: Preference,
    pub loss_e: f64,
    pub loss_o: f64,
    pub diagnostics: Option<ComparisonDiagnostics>,
}

fn decide(eta2: f64, loss_e: f64, loss_o: f64) -> Preference {
    if (loss_e - loss_o).abs() <= INDIFFERENCE_TOL * eta2.max(1.0) {
        Preference::Indifferent
    } else if loss_e < loss_o {
        Preference::PlannerPrefersE
    } else {
        Preference::PlannerPrefersO
    }
}

/// Compares two designs by their constrained optimal losses.
pub fn compare_designs(env: &Environment, e: &Design, o: &Design) -> DesignComparison {
    let loss_e = optimal_loss(env, e);
    let loss_o = optimal_loss(env, o);
    let preference = decide(env.eta2, loss_e, loss_o);
    let ordered = e.s2 < o.s2 && e.cost > o.cost;
    let diagnostics = ordered.then(|| {
        let class_e = classify_design(env, e);
        let class_o = classify_design(env, o);
        let (bound_prefers_e, bound_prefers_o) = match class_e {
            DesignClass::Cheap => (None, None),
            DesignClass::Expensive => {
                let c_o = match class_o {
                    DesignClass::Expensive => o.cost,
                    DesignClass::Cheap => publication_mass(env, o, gamma_star(env, o)),
                };
                let gain = post_var_red(env, e) - post_var_red(env, o);
                (
                    Some(gain >= (1.0 - c_o / e.cost) * env.ca),
                    Some(gain <= (e.cost - (1.0 + 2.0 * c_o) / 3.0) * env.ca),
                )
            }
        };
        ComparisonDiagnostics {
            class_e,
            class_o,
            cheap_e_rule: class_e == DesignClass::Cheap,
            bound_prefers_e,
            bound_prefers_o,
            critical_attention_cost: critical_attention_cost(env.eta2, e, o),
        }
    });
    DesignComparison { preference, loss_e, loss_o, diagnostics }
}

/// Attention cost at which `L*_E − L*_O` changes sign from negative to
/// positive, searched on `c_a ∈ (1e-8, 10 η²)`.
pub fn critical_attention_cost(eta2: f64, e: &Design, o: &Design) -> Option<f64> {
    let gap = |ca: f64| {
        let env = Environment { eta2, ca };
        optimal_loss(&env, e) - optimal_loss(&env, o)
    };
    let (lo, hi) = (1e-8_f64, 10.0 * eta2);
    let steps = 400;
    let ratio = (hi / lo).ln() / steps as f64;
    let mut prev_ca = lo;
    let mut prev = gap(lo);
    for i in 1..=steps {
        let ca = if i == steps { hi } else { lo * (ratio * i as f64).exp() };
        let g = gap(ca);
        if prev < 0.0 && g >= 0.0 {
            return bisect(gap, prev_ca, ca, 1e-13 * ca.max(1.0)).ok();
        }
        prev_ca = ca;
        prev = g;
    }
    None
}

/// Extra planner loss caused solely by the researcher's participation
/// constraint: `L*(E) − L*(E with zero cost)`.
pub fn incentive_cost(env: &Environment, e: &Design) -> f64 {
    (optimal_loss(env, e) - optimal_loss(env, &e.free())).max(0.0)
}

/// Research cost of a precise design (variance `s2_e`) at which the planner
/// is indifferent with `o`. `None` when one design wins for every cost.
pub fn indifference_cost(env: &Environment, s2_e: f64, o: &Design) -> Option<f64> {
    let target = optimal_loss(env, o);
    let gap = |c: f64| optimal_loss(env, &Design { s2: s2_e, cost: c }) - target;
    let (g0, g1) = (gap(0.0), gap(1.0));
    if g0 > 0.0 || g1 < 0.0 {
        return None;
    }
    // The loss is flat in cost while the design stays cheap; start the
    // bracket at the cheap/expensive boundary.
    let cheap_edge = publication_mass(env, &Design { s2: s2_e, cost: 0.0 }, publication_cutoff(env.eta2, s2_e, env.ca));
    bisect(gap, cheap_edge.min(1.0), 1.0, 1e-13).ok()
}

/// Publication probability of the constrained optimal rule.
pub fn optimal_publication_mass(env: &Environment, d: &Design) -> Probability {
    Probability::saturating(publication_mass(env, d, optimal_cutoff(env, d).cutoff))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::cdf;

    fn calibrated_env() -> Environment {
        // √c_a (1 + η²)/η² = 1.96 at η² = 1.94
        let ca = (1.96_f64 * 1.94 / 2.94).powi(2);
        Environment::new(1.94, ca).unwrap()
    }

    #[test]
    fn invariants_rejected() {
        assert!(Environment::new(0.0, 1.0).is_err());
        assert!(Environment::new(1.0, 0.0).is_err());
        assert!(Design::new(-1.0, 0.5).is_err());
        assert!(Design::new(1.0, 1.5).is_err());
        assert!(ThresholdRule::new(-0.1).is_err());
    }

    #[test]
    fn post_var_red_values() {
        let env = Environment::new(1.0, 1.0).unwrap();
        assert_eq!(post_var_red(&env, &Design::new(0.0, 0.0).unwrap()), 1.0);
        assert!(post_var_red(&env, &Design::new(1.0, 0.0).unwrap()) < 1.0);
        let env = Environment::new(1.94, 1.0).unwrap();
        let v = post_var_red(&env, &Design::new(1.0, 0.0).unwrap());
        assert!((v - 1.94 * 1.94 / 2.94).abs() < 1e-15);
        assert!((v - 1.280_136).abs() < 1e-6);
    }

    #[test]
    fn gamma_star_values() {
        let env = calibrated_env();
        let d = Design::new(1.0, 0.0).unwrap();
        assert!((gamma_star(&env, &d) - 1.96).abs() < 1e-12);
        let unit = Environment::new(1.0, 1.0).unwrap();
        assert_eq!(gamma_star(&unit, &Design::new(0.0, 0.0).unwrap()), 1.0);
        assert_eq!(publication_cutoff(1.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn classification() {
        let env = calibrated_env();
        assert_eq!(classify_design(&env, &Design::new(1.0, 0.0).unwrap()), DesignClass::Cheap);
        assert_eq!(classify_design(&env, &Design::new(1.0, 1.0).unwrap()), DesignClass::Expensive);
        // mass = 2Φ(−1.96/√2.94)
        let mass = 2.0 * cdf(-1.96 / 2.94_f64.sqrt());
        assert!((mass - 0.2530).abs() < 1e-4);
        assert_eq!(classify_design(&env, &Design::new(1.0, 0.25).unwrap()), DesignClass::Cheap);
        assert_eq!(classify_design(&env, &Design::new(1.0, 0.26).unwrap()), DesignClass::Expensive);
    }

    #[test]
    fn optimal_cutoff_cases() {
        let env = calibrated_env();
        assert_eq!(optimal_cutoff(&env, &Design::new(1.0, 1.0).unwrap()).cutoff, 0.0);
        assert!((optimal_cutoff(&env, &Design::new(1.0, 0.0).unwrap()).cutoff - 1.96).abs() < 1e-12);
        // S² + η² = 1, cost 0.5 → |Φ⁻¹(0.25)|
        let env = Environment::new(0.5, 5.0).unwrap();
        let t = optimal_cutoff(&env, &Design::new(0.5, 0.5).unwrap()).cutoff;
        assert!((t - 0.674_489_750_196_081_7).abs() < 1e-12);
    }

    #[test]
    fn threshold_loss_limits() {
        let env = calibrated_env();
        let d = Design::new(1.0, 0.3).unwrap();
        let never = threshold_rule_loss(&env, &d, &ThresholdRule { cutoff: f64::INFINITY });
        assert_eq!(never, env.eta2);
        let always = threshold_rule_loss(&env, &d, &ThresholdRule { cutoff: 0.0 });
        assert!((always - (env.eta2 + env.ca - post_var_red(&env, &d))).abs() < 1e-14);
    }

    #[test]
    fn optimal_loss_consistency_and_limits() {
        let env = calibrated_env();
        let d = Design::new(1.0, 0.4).unwrap();
        let direct = optimal_loss(&env, &d);
        let via_rule = threshold_rule_loss(&env, &d, &optimal_cutoff(&env, &d));
        assert!((direct - via_rule).abs() < 1e-10);
        let hi = optimal_loss(&env, &Design::new(1.0, 0.6).unwrap());
        let lo = optimal_loss(&env, &Design::new(1.0, 0.3).unwrap());
        assert!(hi >= lo);
        let huge = Environment::new(1.0, 1e4).unwrap();
        assert!((optimal_loss(&huge, &Design::new(0.0, 0.0).unwrap()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn worthwhile_cases() {
        let env = calibrated_env();
        let (w, cert) = is_worthwhile(&env, &Design::new(1.0, 0.0).unwrap());
        assert_eq!(w, Worthiness::Worthwhile);
        assert_eq!(cert.class, DesignClass::Cheap);
        // cost = 1: exact test reduces to PVR ≥ c_a
        for ca in [0.5, 1.0, 1.2, 1.3, 2.0] {
            let env = Environment::new(1.94, ca).unwrap();
            let d = Design::new(1.0, 1.0).unwrap();
            let expected = post_var_red(&env, &d) >= ca;
            assert_eq!(is_worthwhile(&env, &d).0 == Worthiness::Worthwhile, expected, "ca={ca}");
        }
    }

    #[test]
    fn compare_identical_and_cheap() {
        let env = calibrated_env();
        let d = Design::new(1.0, 0.5).unwrap();
        assert_eq!(compare_designs(&env, &d, &d).preference, Preference::Indifferent);
        assert!(compare_designs(&env, &d, &d).diagnostics.is_none());
        let e = Design::new(0.5, 0.01).unwrap();
        let o = Design::new(1.0, 0.0).unwrap();
        let cmp = compare_designs(&env, &e, &o);
        assert_eq!(cmp.preference, Preference::PlannerPrefersE);
        assert!(cmp.diagnostics.unwrap().cheap_e_rule);
    }

    #[test]
    fn incentive_cost_cases() {
        let env = calibrated_env();
        assert_eq!(incentive_cost(&env, &Design::new(1.0, 0.1).unwrap()), 0.0);
        let unit = Environment::new(1.0, 1.0).unwrap();
        let e = Design::new(0.0, 1.0).unwrap();
        let expected = (1.0 + 1.0 - 1.0)
            - threshold_rule_loss(&unit, &e, &ThresholdRule { cutoff: gamma_star(&unit, &e) });
        assert!((incentive_cost(&unit, &e) - expected).abs() < 1e-12);
        let mut prev = 0.0;
        for i in 1..=9 {
            let ic = incentive_cost(&env, &Design::new(1.0, i as f64 / 10.0).unwrap());
            assert!(ic >= prev - 1e-15);
            prev = ic;
        }
        assert!(prev > 0.0);
    }

    #[test]
    fn critical_attention_cost_separates_preferences() {
        let eta2 = 1.0;
        let e = Design::new(0.0, 0.8).unwrap();
        let o = Design::new(1.0, 0.5).unwrap();
        let ca_star = critical_attention_cost(eta2, &e, &o).expect("switch point");
        let below = Environment::new(eta2, ca_star * 0.9).unwrap();
        let above = Environment::new(eta2, ca_star * 1.1).unwrap();
        assert_eq!(compare_designs(&below, &e, &o).preference, Preference::PlannerPrefersE);
        assert_eq!(compare_designs(&above, &e, &o).preference, Preference::PlannerPrefersO);
    }

    #[test]
    fn indifference_cost_is_a_root() {
        let env = Environment::new(1.0, 0.5).unwrap();
        let o = Design::new(0.2, 0.0).unwrap();
        assert!(indifference_cost(&env, 0.0, &Design::new(1.5, 0.0).unwrap()).is_none());
        let c = indifference_cost(&env, 0.0, &o).unwrap();
        let e = Design::new(0.0, c).unwrap();
        assert!((optimal_loss(&env, &e) - optimal_loss(&env, &o)).abs() < 1e-10);
    }
}
