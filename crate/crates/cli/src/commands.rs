use crate::args::*;
use crate::output::Output;
use pubrules::calibration::{calibrate_pipeline, CalibrationConfig, CmScale, Eta2Mapping, Level, PValueDataset};
use pubrules::design::{
    classify_design, compare_designs, gamma_star, is_worthwhile, optimal_cutoff, optimal_loss,
    optimal_publication_mass, post_var_red, Design, Environment,
};
use pubrules::manipulation::{
    compare_with_solution, expected_loss_under_rule, optimize_rule, prereg_crossover_cost, ManipulationEnv,
    PublicationRule, ResponsePolicy, SmoothedRule,
};
use pubrules::sim::{sample_population, simulate_equilibrium, summarize, SimRule};
use pubrules::tables::{self, HistogramSeries, Table2Block};
use pubrules::manipulation::rule_moments;
use pubrules::{Error, Result};
use serde::Serialize;
use serde_json::{json, Value};

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("plain data serializes")
}

fn document<A: Serialize>(command: &str, args: &A, result: Value) -> Value {
    json!({
        "params": { "command": command, "args": to_value(args), "version": env!("CARGO_PKG_VERSION") },
        "result": result,
    })
}

pub fn run(command: &Command) -> Result<Output> {
    match command {
        Command::Rule(a) => rule(a),
        Command::Compare(a) => compare(a),
        Command::Optimize(a) => optimize(a),
        Command::Simulate(a) => simulate(a),
        Command::Table2(a) => table2(a),
        Command::FigureData(a) => figure_data(a),
        Command::Calibrate(a) => calibrate(a),
    }
}

fn rule(a: &RuleArgs) -> Result<Output> {
    let env = Environment::new(a.eta2, a.ca)?;
    let d = Design::new(a.s2, a.cost)?;
    let (worthiness, certificate) = is_worthwhile(&env, &d);
    let result = json!({
        "cutoff": optimal_cutoff(&env, &d).cutoff,
        "loss": optimal_loss(&env, &d),
        "class": to_value(&classify_design(&env, &d)),
        "gamma_star": gamma_star(&env, &d),
        "post_var_red": post_var_red(&env, &d),
        "publication_mass": optimal_publication_mass(&env, &d).value(),
        "worthiness": to_value(&worthiness),
        "certificate": to_value(&certificate),
    });
    Ok(Output { doc: document("rule", a, result), table: None })
}

fn compare(a: &CompareArgs) -> Result<Output> {
    let env = Environment::new(a.eta2, a.ca)?;
    let e = Design::new(a.s2_e, a.cost_e)?;
    let o = Design::new(a.s2_o, a.cost_o)?;
    let mut result = json!({
        "comparison": to_value(&compare_designs(&env, &e, &o)),
        "worthiness_e": to_value(&is_worthwhile(&env, &e).0),
        "worthiness_o": to_value(&is_worthwhile(&env, &o).0),
    });
    let mut table = None;
    if a.sweep {
        if !(a.sweep_step > 0.0 && a.sweep_max >= a.sweep_step) {
            return Err(Error::InvalidParameter("sweep needs 0 < sweep-step <= sweep-max".into()));
        }
        let steps = (a.sweep_max / a.sweep_step + 1e-9).floor() as usize;
        let grid: Vec<f64> = (1..=steps).map(|k| k as f64 * a.sweep_step).collect();
        let curve = tables::indifference_curve(&env, a.s2_e, a.cost_o, &grid)?;
        table = Some(curve.points.iter().map(to_value).collect());
        result["indifference_curve"] = to_value(&curve);
    }
    Ok(Output { doc: document("compare", a, result), table })
}

fn manipulation_env(a: &EnvArgs) -> Result<ManipulationEnv> {
    match (a.ca, a.cutoff_target) {
        (Some(ca), _) => ManipulationEnv::new(a.eta2, a.s2, ca, a.cm, a.c0),
        (None, Some(c)) => ManipulationEnv::from_cutoff(a.eta2, a.s2, a.cm, c, a.c0),
        (None, None) => Err(Error::InvalidParameter("one of --ca or --cutoff-target is required".into())),
    }
}

fn optimize(a: &OptimizeArgs) -> Result<Output> {
    let env = manipulation_env(&a.env)?;
    let sol = optimize_rule(&env)?;
    let naive = PublicationRule::threshold(env.gamma_star())?;
    let mut result = json!({
        "env": to_value(&env),
        "gamma_star": env.gamma_star(),
        "solution": to_value(&sol),
        "lower_edge": sol.x_star - 1.0 / env.cm,
        "naive_threshold_loss": expected_loss_under_rule(&env, &naive, ResponsePolicy::BestRespond)?,
        "prereg_crossover_cost": prereg_crossover_cost(&env, &sol)?,
    });
    if let Some(c) = a.experiment_cost {
        result["prereg"] = to_value(&compare_with_solution(&env, &sol, c)?);
    }
    Ok(Output { doc: document("optimize", a, result), table: None })
}

fn simulate(a: &SimulateArgs) -> Result<Output> {
    let env = manipulation_env(&a.env)?;
    let policy = match a.policy {
        PolicyArg::BestRespond => ResponsePolicy::BestRespond,
        PolicyArg::Truthful => ResponsePolicy::Truthful,
    };
    let cutoff = a.cutoff.unwrap_or(env.gamma_star());
    let (rule, solution) = match a.rule {
        RuleKind::Optimal => {
            let sol = optimize_rule(&env)?;
            (SimRule::Optimal(sol), Some(sol))
        }
        RuleKind::Threshold => (SimRule::Fixed(PublicationRule::threshold(cutoff)?), None),
        RuleKind::Smoothed => {
            let s = SmoothedRule::new(cutoff, a.slope.unwrap_or(env.cm))?;
            (SimRule::Fixed(PublicationRule::Smoothed(s)), None)
        }
    };
    let population = sample_population(&env, a.n, a.seed)?;
    let records = simulate_equilibrium(&env, &rule, policy, &population, a.seed);
    let result = json!({
        "env": to_value(&env),
        "rule": to_value(&rule.publication_rule()),
        "solution": to_value(&solution),
        "simulated": to_value(&summarize(&records)?),
        "quadrature": to_value(&rule_moments(&env, &rule.publication_rule(), policy)?),
    });
    Ok(Output { doc: document("simulate", a, result), table: None })
}

fn table2_rows(block: &Table2Block) -> Vec<Value> {
    block
        .rows
        .iter()
        .map(|r| {
            json!({
                "level": to_value(&block.level),
                "regime": to_value(&r.regime),
                "cutoff": r.rule.cutoff(),
                "pct_published": r.simulated.pct_published,
                "expected_published": r.simulated.expected_published,
                "pct_manipulated": r.simulated.pct_manipulated_within_published,
                "avg_bias": r.simulated.avg_abs_bias_within_published,
                "se_published": r.simulated.se_published,
                "quadrature_published": r.quadrature.published,
                "quadrature_manipulated": r.quadrature.manipulated_share,
                "quadrature_avg_bias": r.quadrature.average_bias,
                "quadrature_loss": r.quadrature.expected_loss,
            })
        })
        .collect()
}

fn table2(a: &Table2Args) -> Result<Output> {
    let levels: &[Level] = match a.calibration {
        CalibrationChoice::FivePct => &[Level::FivePct],
        CalibrationChoice::OnePct => &[Level::OnePct],
        CalibrationChoice::Both => &[Level::FivePct, Level::OnePct],
    };
    let blocks = levels.iter().map(|&l| tables::table2_block(l, a.n, a.seed)).collect::<Result<Vec<_>>>()?;
    let table = blocks.iter().flat_map(table2_rows).collect();
    let result = json!({ "blocks": to_value(&blocks) });
    Ok(Output { doc: document("table2", a, result), table: Some(table) })
}

fn histogram_rows(series: &HistogramSeries) -> Vec<Value> {
    let mut rows = Vec::new();
    for r in &series.regimes {
        let regime = to_value(&r.regime);
        for b in &r.histogram.bins {
            rows.push(json!({"regime": regime, "kind": "bin", "lo": b.lo, "hi": b.hi, "mass": b.mass, "density": b.density}));
        }
        for atom in &r.histogram.atoms {
            rows.push(json!({"regime": regime, "kind": "atom", "lo": atom.location, "hi": atom.location, "mass": atom.mass, "density": null}));
        }
    }
    rows
}

fn figure_data(a: &FigureArgs) -> Result<Output> {
    let (result, table) = match a.figure {
        Figure::Fig2 => {
            let curves = tables::fig2_series()?;
            let rows = curves
                .iter()
                .flat_map(|c| c.points.iter().map(move |p| json!({"ca": c.ca, "s2_o": p.s2_o, "cost_e": p.cost_e})))
                .collect();
            (json!({ "curves": to_value(&curves) }), rows)
        }
        Figure::Fig3 => {
            let s = tables::fig3_series(a.n, a.seed)?;
            (to_value(&s), histogram_rows(&s))
        }
        Figure::Fig4 => {
            let s = tables::fig4_series()?;
            (to_value(&s), s.points.iter().map(to_value).collect())
        }
        Figure::Fig5 => {
            let s = tables::fig5_series(a.n, a.seed)?;
            (to_value(&s), histogram_rows(&s))
        }
    };
    Ok(Output { doc: document("figure-data", a, result), table: Some(table) })
}

fn calibrate(a: &CalibrateArgs) -> Result<Output> {
    let level = match a.level {
        LevelArg::FivePct => Level::FivePct,
        LevelArg::OnePct => Level::OnePct,
    };
    let mut cfg = CalibrationConfig::for_level(level);
    if let Some(u) = a.unpublished_share {
        cfg.unpublished_share = u;
    }
    if let Some(p) = a.prereg_share {
        cfg.prereg_share = p;
    }
    cfg.raw_bunch_share_override = a.raw_share;
    cfg.bunch_window = (a.window_lo.unwrap_or(cfg.bunch_window.0), a.window_hi.unwrap_or(cfg.bunch_window.1));
    cfg.cm_scale = match a.cm_scale {
        ScaleArg::Standard => CmScale::Standard,
        ScaleArg::Marginal => CmScale::Marginal,
        ScaleArg::Folded => CmScale::Folded,
    };
    cfg.eta2_mapping = match a.eta2_mapping {
        MappingArg::HalfQuantile => Eta2Mapping::HalfQuantile,
        MappingArg::Gaussian => Eta2Mapping::Gaussian,
    };
    cfg.validate()?;
    let data = PValueDataset::from_path(&a.input)?;
    let report = calibrate_pipeline(&data, &cfg)?;
    Ok(Output { doc: document("calibrate", a, to_value(&report)), table: None })
}
