use proptest::prelude::*;
use pubrules::calibration::{adjusted_bunch_share, estimate_cm, CalibrationConfig};
use pubrules::design::{
    classify_design, optimal_cutoff, optimal_loss, publication_mass, threshold_rule_loss, Design, DesignClass,
    Environment, ThresholdRule,
};
use pubrules::gaussian::{cdf, quantile, upsilon, Probability};
use pubrules::manipulation::{best_response, type_loss, ManipulationEnv, PublicationRule, SmoothedRule};
use pubrules::sim::{summarize, EquilibriumRecord};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn quantile_inverts_cdf(p in 1e-12f64..(1.0 - 1e-12)) {
        let x = quantile(p).unwrap();
        prop_assert!((cdf(x) - p).abs() <= 1e-14 + 1e-12 * p);
    }

    #[test]
    fn upsilon_is_monotone_and_dominates_identity(a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(upsilon(lo).unwrap() <= upsilon(hi).unwrap());
        prop_assert!(upsilon(lo).unwrap() >= lo);
    }

    #[test]
    fn optimal_rule_beats_any_feasible_threshold(
        eta2 in 0.1f64..4.0, s2 in 0.0f64..4.0, ca in 0.01f64..3.0, cost in 0.0f64..1.0, t in 0.0f64..6.0,
    ) {
        let env = Environment::new(eta2, ca).unwrap();
        let d = Design::new(s2, cost).unwrap();
        let best = optimal_loss(&env, &d);
        prop_assert!(best <= eta2 + 1e-12 || classify_design(&env, &d) == DesignClass::Expensive);
        if publication_mass(&env, &d, t) >= cost {
            prop_assert!(best <= threshold_rule_loss(&env, &d, &ThresholdRule::new(t).unwrap()) + 1e-12);
        }
        let rule = optimal_cutoff(&env, &d);
        prop_assert!(publication_mass(&env, &d, rule.cutoff) >= cost - 1e-12);
    }

    #[test]
    fn optimal_loss_nondecreasing_in_cost(eta2 in 0.1f64..4.0, s2 in 0.0f64..4.0, ca in 0.01f64..3.0, c1 in 0.0f64..1.0, c2 in 0.0f64..1.0) {
        let env = Environment::new(eta2, ca).unwrap();
        let (lo, hi) = if c1 < c2 { (c1, c2) } else { (c2, c1) };
        prop_assert!(optimal_loss(&env, &Design::new(s2, lo).unwrap()) <= optimal_loss(&env, &Design::new(s2, hi).unwrap()) + 1e-12);
    }

    #[test]
    fn best_response_is_feasible(
        eta2 in 0.2f64..3.0, s2 in 0.0f64..2.0, cm in 0.3f64..3.0, cutoff in 0.5f64..3.0, y in -5.0f64..5.0, v in 0.0f64..1.0,
    ) {
        let env = ManipulationEnv::from_cutoff(eta2, s2, cm, cutoff, 0.0).unwrap();
        let r = best_response(&env, y, Probability::new(v).unwrap());
        let p = r.pub_prob.value();
        prop_assert!(p >= v - 1e-12 && p <= 1.0);
        prop_assert!(r.bias >= -1e-12);
        prop_assert!((p - v - env.cm * r.bias).abs() < 1e-9);
        if y.abs() <= env.gamma_star() {
            prop_assert!((p - v).abs() < 1e-12);
        }
        // the chosen point is no worse for the planner than staying truthful
        let truthful = (env.omega().powi(2) * (-y * y) + env.ca) * v;
        prop_assert!(type_loss(&env, y, Probability::new(v).unwrap()) <= truthful + 1e-12);
    }

    #[test]
    fn rules_are_monotone_probabilities(cutoff in 0.1f64..4.0, slope in 0.1f64..10.0, a in 0.0f64..6.0, b in 0.0f64..6.0) {
        let rule = PublicationRule::Smoothed(SmoothedRule::new(cutoff, slope).unwrap());
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(rule.eval(lo).value() <= rule.eval(hi).value());
        prop_assert_eq!(rule.eval(-a), rule.eval(a));
        let t = PublicationRule::threshold(cutoff).unwrap();
        prop_assert_eq!(t.eval(a).value(), if a >= cutoff { 1.0 } else { 0.0 });
    }

    #[test]
    fn adjusted_share_is_linear(r1 in 0.0f64..0.5, r2 in 0.0f64..0.5, u in 0.0f64..0.9, q in 0.0f64..0.9) {
        let cfg = CalibrationConfig { unpublished_share: u, prereg_share: q, ..CalibrationConfig::five_pct() };
        let sum = adjusted_bunch_share(&cfg, r1 + r2).unwrap();
        let parts = adjusted_bunch_share(&cfg, r1).unwrap() + adjusted_bunch_share(&cfg, r2).unwrap();
        prop_assert!((sum - parts).abs() < 1e-14);
    }

    #[test]
    fn cm_decreases_with_bunching(b1 in 0.001f64..0.9, b2 in 0.001f64..0.9) {
        let cfg = CalibrationConfig::five_pct();
        let (lo, hi) = if b1 < b2 { (b1, b2) } else { (b2, b1) };
        prop_assert!(estimate_cm(&cfg, lo).unwrap() >= estimate_cm(&cfg, hi).unwrap());
    }

    #[test]
    fn summary_shares_are_bounded(flags in proptest::collection::vec((any::<bool>(), 0.0f64..1.0), 1..200)) {
        let recs: Vec<EquilibriumRecord> = flags
            .iter()
            .map(|&(published, bias)| EquilibriumRecord {
                theta: 0.0, eps: 0.0, y: 1.0, bias, reported_x: 1.0 + bias,
                pub_prob: Probability::new(if published { 1.0 } else { 0.0 }).unwrap(), published,
            })
            .collect();
        let s = summarize(&recs).unwrap();
        prop_assert!((0.0..=1.0).contains(&s.pct_published));
        let p = s.pct_published;
        prop_assert!((s.se_published - (p * (1.0 - p) / s.n as f64).sqrt()).abs() < 1e-15);
        if let Some(m) = s.pct_manipulated_within_published {
            prop_assert!((0.0..=1.0).contains(&m));
            prop_assert!(s.avg_abs_bias_within_published.unwrap() >= 0.0);
        } else {
            prop_assert_eq!(s.n_published, 0);
        }
    }
}
