use super::*;

fn synthetic(f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    [4u32, 8, 16, 32, 64].iter().map(|&k| (1.0 / k as f64, f(1.0 / k as f64))).collect()
}

fn report_from(points: &[(f64, f64)]) -> RateReport<f64> {
    let rows = points
        .iter()
        .map(|&(eps, e)| RateRow {
            eps_recip: (1.0 / eps).round() as u32,
            eps,
            sup_error: e,
            scheme_error: 0.01 * e,
            pass: true,
            route: Route::Pde,
        })
        .collect();
    RateReport::from_rows("synthetic", rows, 0.1, Vec::new()).unwrap()
}

#[test]
fn slope_of_linear_rows() {
    let (s, i, r) = fit_slope(&synthetic(|e| 3.0 * e)).unwrap();
    assert!((s - 1.0).abs() < 1e-12);
    assert!((i - 3f64.ln()).abs() < 1e-12);
    assert!(r < 1e-12);
    let (s, _, _) = fit_slope(&[(0.1f64, 0.2f64), (0.01, 0.02)]).unwrap();
    assert!((s - 1.0).abs() < 1e-12);
}

#[test]
fn slope_of_square_root_and_constant_rows() {
    let (s, _, _) = fit_slope(&synthetic(f64::sqrt)).unwrap();
    assert!((s - 0.5).abs() < 1e-12);
    let (s, _, _) = fit_slope(&synthetic(|_| 0.7)).unwrap();
    assert!(s.abs() < 1e-12);
}

#[test]
fn saturating_rows_bend_the_fit() {
    let (s, _, r) = fit_slope(&synthetic(|e| e + 0.05)).unwrap();
    assert!(s < 0.8, "{s}");
    assert!(r > 0.05, "{r}");
    let (_, _, clean) = fit_slope(&synthetic(|e| e)).unwrap();
    assert!(r > 1e6 * clean.max(1e-18));
}

#[test]
fn fit_rejects_bad_rows() {
    assert!(fit_slope(&[(0.1f64, 0.0), (0.01, 0.02)]).is_err());
    assert!(fit_slope(&[(-0.1f64, 0.1), (0.01, 0.02)]).is_err());
    assert!(fit_slope(&[(0.1f64, 0.1)]).is_err());
}

#[test]
fn few_passing_rows_are_inconclusive() {
    let mut rep = report_from(&synthetic(|e| 2.0 * e));
    assert!(matches!(rep.status, RateStatus::Fitted { .. }));
    for r in rep.rows.iter_mut().take(2) {
        r.pass = false;
    }
    let rep = RateReport::from_rows("x", rep.rows, 0.1, Vec::new()).unwrap();
    assert_eq!(rep.status, RateStatus::Inconclusive { passing: 3 });
    assert_eq!(rep.slope(), None);
}

#[test]
fn empty_report_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let rep = RateReport::<f64>::from_rows("none", Vec::new(), 0.1, Vec::new()).unwrap();
    let csv = dir.path().join("r.csv");
    assert_eq!(emit_report(&rep, ReportFormat::Csv, &csv).unwrap(), vec![csv.clone()]);
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), "epsilon,sup_error,scheme_error,pass\n");
    let svg = dir.path().join("r.svg");
    assert!(emit_report(&rep, ReportFormat::Svg, &svg).unwrap().is_empty());
    assert!(!svg.exists());
}

#[test]
fn csv_rows_by_decreasing_eps_and_bit_stable() {
    let dir = tempfile::tempdir().unwrap();
    let mut pts = synthetic(|e| 3.0 * e);
    pts.reverse();
    let rep = report_from(&pts);
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    emit_report(&rep, ReportFormat::Csv, &a).unwrap();
    emit_report(&rep, ReportFormat::Csv, &b).unwrap();
    let text = std::fs::read(&a).unwrap();
    assert_eq!(text, std::fs::read(&b).unwrap());
    let mut rd = csv::Reader::from_reader(text.as_slice());
    let eps: Vec<f64> = rd.records().map(|r| r.unwrap()[0].parse().unwrap()).collect();
    assert_eq!(eps, vec![0.25, 0.125, 0.0625, 0.03125, 0.015625]);
}

#[test]
fn svg_structure() {
    let dir = tempfile::tempdir().unwrap();
    let rep = report_from(&synthetic(|e| 3.0 * e));
    let path = dir.path().join("r.svg");
    emit_report(&rep, ReportFormat::Svg, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.matches("<polyline").count(), 2);
    assert_eq!(text.matches(r#"class="fit""#).count(), 1);
    assert_eq!(text.matches(r#"class="reference""#).count(), 1);
    assert_eq!(text.matches(r#"class="marker""#).count(), 5);
}

#[test]
fn io_errors_name_the_path() {
    let rep = report_from(&synthetic(|e| e));
    let err = emit_report(&rep, ReportFormat::Csv, "/nonexistent-dir/x.csv").unwrap_err();
    assert!(err.to_string().contains("/nonexistent-dir/x.csv"), "{err}");
}

#[test]
fn key_values_and_overrides() {
    let mut kv = KeyValues::parse("# comment\nmodel = double-well\n\neps = 1/4, 1/8,1/16 # inline\nbudget=0.2\n").unwrap();
    kv.set("cells", "32");
    let cfg = ExperimentConfig::from_kv(&kv).unwrap();
    assert_eq!(cfg.model, "double-well");
    assert_eq!(cfg.eps, vec![4, 8, 16]);
    assert_eq!(cfg.budget, 0.2);
    assert_eq!(cfg.cells, 32);
    assert_eq!(cfg.snapshots, vec![0.25, 0.5, 1.0]);
    assert!(KeyValues::parse("no equals sign").is_err());
    assert!(ExperimentConfig::from_kv(&KeyValues::parse("colour = red").unwrap()).is_err());
}

#[test]
fn config_invariants() {
    let bad = |text: &str| ExperimentConfig::from_kv(&KeyValues::parse(text).unwrap()).is_err();
    assert!(bad("eps = 1/8, 1/4"));
    assert!(bad("eps = 2/5"));
    assert!(bad("eps = 0"));
    assert!(bad("budget = 1"));
    assert!(bad("budget = 0"));
    assert!(bad("snapshots = 0.5, 2"));
    assert!(bad("route = sideways"));
    assert_eq!(parse_eps_ladder("4, 1/8").unwrap(), vec![4, 8]);
}

#[test]
fn short_ladder_is_inconclusive_but_rows_are_measured() {
    let cfg = ExperimentConfig { eps: vec![2, 4], cells: 32, table_steps: 200, ..Default::default() };
    let rep = run_rate_experiment::<f64>(&cfg).unwrap();
    assert_eq!(rep.rows.len(), 2);
    assert!(matches!(rep.status, RateStatus::Inconclusive { .. }));
    assert!(rep.rows.iter().all(|r| r.sup_error > 0.0 && r.sup_error.is_finite()));
    assert!(rep.rows[0].sup_error > rep.rows[1].sup_error);
}

#[test]
fn optimal_control_route_needs_convexity() {
    let cfg = ExperimentConfig { model: "double-well".into(), route: Route::OptimalControl, eps: vec![4], ..Default::default() };
    assert!(run_rate_experiment::<f64>(&cfg).is_err());
}

#[test]
fn optimal_control_error_shrinks_with_eps() {
    use crate::hj_solver::InitialData;
    use crate::model::HamiltonianModel;
    let m = HamiltonianModel::<f64>::from_spec("quadratic", "cos1d", 1).unwrap();
    let g = InitialData::sin(1);
    let cfg = ExperimentConfig { snapshots: vec![0.5], ..Default::default() };
    let e4 = oc_error(&m, &g, &cfg, 4, 8).unwrap();
    let e16 = oc_error(&m, &g, &cfg, 16, 8).unwrap();
    assert!(e16 < e4 && e16 > 0.0, "{e4} {e16}");
}
