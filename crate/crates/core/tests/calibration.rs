use pubrules::calibration::{
    adjusted_bunch_share, bunched_mass, calibrate_pipeline, derive_ca, estimate_cm, estimate_eta2, implied_cutoff,
    pvalues_to_tstats, CalibrationConfig, CmScale, Eta2Mapping, Level, PValueDataset,
};
use pubrules::gaussian::sf;
use pubrules::manipulation::{PublicationRule, ResponsePolicy};
use pubrules::sim::{sample_population, simulate_equilibrium, EquilibriumRecord, SimRule};
use pubrules::tables::calibrated_env;

/// Published statistics of the five-percent calibration under the naive
/// cutoff with manipulation.
fn naive_corpus(n: usize, seed: u64) -> Vec<EquilibriumRecord> {
    let env = calibrated_env(Level::FivePct).unwrap();
    let pop = sample_population(&env, n, seed).unwrap();
    let rule = SimRule::Fixed(PublicationRule::threshold(1.96).unwrap());
    simulate_equilibrium(&env, &rule, ResponsePolicy::BestRespond, &pop, seed)
        .into_iter()
        .filter(|r| r.published)
        .collect()
}

fn to_pvalues(recs: &[EquilibriumRecord]) -> PValueDataset {
    let p = recs.iter().map(|r| 2.0 * sf(r.reported_x.abs())).collect();
    PValueDataset::new(p, "synthetic").unwrap()
}

#[test]
fn paper_shares_recover_cm() {
    let five = CalibrationConfig::five_pct();
    let cm = estimate_cm(&five, adjusted_bunch_share(&five, 0.18).unwrap()).unwrap();
    assert!((0.90..=1.05).contains(&cm), "{cm}");
    let one = CalibrationConfig::one_pct();
    let cm = estimate_cm(&one, adjusted_bunch_share(&one, 0.10).unwrap()).unwrap();
    assert!((0.75..=0.92).contains(&cm), "{cm}");
}

#[test]
fn calibrated_params_hit_the_cutoff() {
    for level in [Level::FivePct, Level::OnePct] {
        let ca = derive_ca(1.94, level.cutoff()).unwrap();
        let p = pubrules::calibration::CalibratedParams { eta2: 1.94, cm: 1.0, ca, level };
        assert!((implied_cutoff(&p) - level.cutoff()).abs() < 1e-12);
    }
}

#[test]
fn eta2_round_trip_through_naive_equilibrium() {
    let recs = naive_corpus(1_000_000, 17);
    let t: Vec<f64> = recs.iter().map(|r| r.reported_x).collect();
    let est = estimate_eta2(&t, &CalibrationConfig::five_pct()).unwrap();
    assert!((est.eta2 - 1.94).abs() <= 0.1, "{est:?}");
    assert!(est.robust);
}

#[test]
fn pipeline_round_trip() {
    let recs = naive_corpus(1_000_000, 19);
    let data = to_pvalues(&recs);
    let published = recs.len() as f64 / 1_000_000.0;
    // Model-consistent bookkeeping: the unpublished share is what the
    // simulation withheld, nothing is preregistered, bunching is read on the
    // two-sided marginal scale and the percentile maps through the normal
    // quantile.
    let cfg = CalibrationConfig {
        unpublished_share: 1.0 - published,
        prereg_share: 0.0,
        cm_scale: CmScale::Folded,
        eta2_mapping: Eta2Mapping::Gaussian,
        ..CalibrationConfig::five_pct()
    };
    let report = calibrate_pipeline(&data, &cfg).unwrap();
    assert!((report.eta2 - 1.94).abs() <= 0.1, "{report:?}");
    assert!((report.cm - 0.98).abs() <= 0.08, "{report:?}");
    assert!((implied_cutoff(&report.params()) - 1.96).abs() < 1e-9);
    assert_eq!(report.n_used, recs.len());
    let again = calibrate_pipeline(&data, &cfg).unwrap();
    assert_eq!(report, again);
}

#[test]
fn half_quantile_mapping_is_biased_under_exact_bookkeeping() {
    // With the true withheld share, (q/2)² − 1 reads the folded-normal
    // 95th percentile through 2 instead of 1.96 and lands about 0.12 low.
    let recs = naive_corpus(1_000_000, 19);
    let t: Vec<f64> = recs.iter().map(|r| r.reported_x).collect();
    let cfg = CalibrationConfig { unpublished_share: 1.0 - recs.len() as f64 / 1e6, ..CalibrationConfig::five_pct() };
    let printed = estimate_eta2(&t, &cfg).unwrap().eta2;
    let exact = estimate_eta2(&t, &CalibrationConfig { eta2_mapping: Eta2Mapping::Gaussian, ..cfg }).unwrap().eta2;
    assert!((exact - 1.94).abs() <= 0.1, "{exact}");
    assert!(printed < 1.94 - 0.1, "{printed}");
}

#[test]
fn default_pipeline_on_synthetic_corpus() {
    let data = to_pvalues(&naive_corpus(200_000, 23));
    let cfg = CalibrationConfig { raw_bunch_share_override: Some(0.18), ..CalibrationConfig::five_pct() };
    let report = calibrate_pipeline(&data, &cfg).unwrap();
    assert!((report.cm - 0.98).abs() <= 0.08, "{report:?}");
    assert!((report.ca - derive_ca(report.eta2, 1.96).unwrap()).abs() < 1e-15);
    assert_eq!(report.level, Level::FivePct);
    let t = pvalues_to_tstats(&data).unwrap();
    assert!(t.windows(1).all(|w| w[0] >= 0.0));
}

#[test]
fn cm_solution_plugs_back() {
    for scale in [CmScale::Standard, CmScale::Marginal, CmScale::Folded] {
        let cfg = CalibrationConfig { cm_scale: scale, ..CalibrationConfig::one_pct() };
        for b in [0.001, 0.05, 0.2] {
            let cm = pubrules::calibration::estimate_cm_scaled(&cfg, b, 1.5).unwrap();
            assert!((bunched_mass(scale, cfg.q, 1.0 / cm, 1.5) - b).abs() < 1e-10);
        }
    }
}

#[test]
fn reads_files_with_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.csv");
    let mut body = String::from("p_value\n");
    for i in 1..=1500 {
        body.push_str(&format!("{}\n", i as f64 / 1500.0));
    }
    body.push_str("oops\n2.0\n");
    std::fs::write(&path, body).unwrap();
    let d = PValueDataset::from_path(&path).unwrap();
    assert_eq!((d.len(), d.n_rejected), (1500, 2));
    assert!(PValueDataset::from_path(&dir.path().join("missing.csv")).is_err());
}
