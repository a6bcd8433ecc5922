use spx_core::design::DesignConfig;
use spx_core::inference::{McmcConfig, Method, ModelSettings};
use spx_core::io::case_study;
use spx_core::model::NewTrial;
use spx_core::sim::{gen_historical, run_scenario_on, sweep_observed_rate, DesignKind, ScenarioConfig, SimSetup};

fn setup(method: Method, design: DesignKind) -> SimSetup {
    SimSetup {
        scenario: ScenarioConfig::scenario(1).unwrap(),
        method,
        design,
        dc: DesignConfig::with_n_max(200),
        settings: ModelSettings::default(),
        mc: McmcConfig::fast(),
    }
}

#[test]
fn interval_width_ordering_in_scenario_one() {
    let hist = gen_historical(&ScenarioConfig::scenario(1).unwrap()).unwrap();
    let width = |m| {
        run_scenario_on(&setup(m, DesignKind::Fixed), &hist, 100, 5)
            .unwrap()
            .oc
            .width
    };
    let (spx, rmap, ind) = (width(Method::Spx), width(Method::Rmap), width(Method::Independent));
    assert!(spx < rmap && rmap < ind, "widths spx {spx:.4} rmap {rmap:.4} ind {ind:.4}");
}

#[test]
fn methods_share_patient_streams() {
    let hist = gen_historical(&ScenarioConfig::scenario(1).unwrap()).unwrap();
    let a = run_scenario_on(&setup(Method::Spx, DesignKind::Fixed), &hist, 8, 3).unwrap();
    let b = run_scenario_on(&setup(Method::Independent, DesignKind::Fixed), &hist, 8, 3).unwrap();
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!((x.control_n, x.control_y), (y.control_n, y.control_y));
    }
    let adaptive = run_scenario_on(&setup(Method::Spx, DesignKind::Adaptive), &hist, 8, 3).unwrap();
    for r in &adaptive.records {
        let total = r.control_n;
        assert!((150..=250).contains(&total), "{total}");
        assert!(r.ess.is_some());
    }
}

#[test]
fn replicate_errors_carry_their_seed() {
    let mut s = setup(Method::Spx, DesignKind::Fixed);
    s.mc.samples = 0;
    let hist = gen_historical(&s.scenario).unwrap();
    assert!(run_scenario_on(&s, &hist, 2, 1).is_err());
}

#[test]
fn sweep_favors_independence_far_from_history() {
    let nt = NewTrial {
        id: "new".into(),
        x: vec![1.0, 1.0, 53.0],
        outcome: None,
    };
    let (d, _) = case_study().dataset(Some(nt)).unwrap();
    let dc = DesignConfig {
        n_stage1: 75,
        ..DesignConfig::with_n_max(150)
    };
    let grid = [0.32, 0.50];
    let rows =
        sweep_observed_rate(&d, Method::Spx, &ModelSettings::default(), &grid, 75, &dc, &McmcConfig::fast(), 1).unwrap();
    assert_eq!(rows.len(), grid.len());
    assert!(rows[1].rb_weights[2] > rows[0].rb_weights[2]);
    assert!(rows[1].stage2_total > rows[0].stage2_total);
}
