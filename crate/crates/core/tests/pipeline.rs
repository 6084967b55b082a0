use homog::cell::{build_effective_table, CellOptions, EffectiveTable};
use homog::hj_solver::{solve_oscillatory, sup_error, InitialData, SolveOptions};
use homog::lab::{run_rate_experiment, ExperimentConfig, RateStatus};
use homog::model::{HamiltonianModel, PotentialField};
use homog::{EffectiveTable64, HamiltonianModel64, InitialData64};

#[test]
fn rate_slope_is_stable_under_ladder_subsampling() {
    let base = ExperimentConfig { eps: vec![4, 5, 6, 7, 8, 10, 12, 14, 16], ..Default::default() };
    let even = ExperimentConfig { eps: vec![4, 6, 8, 10, 12, 14, 16], ..base.clone() };
    let a = run_rate_experiment::<f64>(&base).unwrap();
    let b = run_rate_experiment::<f64>(&even).unwrap();
    let (sa, sb) = (a.slope().expect("full ladder fitted"), b.slope().expect("even ladder fitted"));
    assert!((sa - sb).abs() < 0.1, "{sa} vs {sb}");
    for r in &b.rows {
        let twin = a.rows.iter().find(|x| x.eps_recip == r.eps_recip).unwrap();
        assert_eq!(twin.sup_error, r.sup_error);
    }
}

#[test]
fn rates_agree_across_models() {
    let ladder = vec![4, 8, 16, 32];
    let quad = ExperimentConfig { eps: ladder.clone(), ..Default::default() };
    let dw = ExperimentConfig { model: "double-well".into(), eps: ladder, ..Default::default() };
    let sq = run_rate_experiment::<f64>(&quad).unwrap();
    let sd = run_rate_experiment::<f64>(&dw).unwrap();
    match (&sq.status, &sd.status) {
        (RateStatus::Fitted { slope: a, .. }, RateStatus::Fitted { slope: b, .. }) => assert!((a - b).abs() < 0.15, "{a} vs {b}"),
        other => panic!("expected two fits, got {other:?}"),
    }
}

#[test]
fn single_precision_tracks_double() {
    let m32 = HamiltonianModel::<f32>::quadratic(PotentialField::cos1d(1));
    let m64: HamiltonianModel64 = HamiltonianModel::quadratic(PotentialField::cos1d(1));
    let g32 = InitialData::<f32>::sin(1);
    let g64: InitialData64 = InitialData::sin(1);
    let a = solve_oscillatory(&m32, 4, &g32, 0.25, 256, &SolveOptions::default()).unwrap();
    let b = solve_oscillatory(&m64, 4, &g64, 0.25, 256, &SolveOptions::default()).unwrap();
    let gap = a.last().iter().zip(b.last()).fold(0.0f64, |s, (x, y)| s.max((*x as f64 - y).abs()));
    assert!(gap < 1e-4, "{gap}");
}

#[test]
fn refinement_shrinks_the_solver_error() {
    let m = HamiltonianModel::quadratic(PotentialField::<f64>::constant(1, 0.0));
    let g = InitialData::sin(1);
    let opts = SolveOptions::default();
    let f4096 = solve_oscillatory(&m, 1, &g, 0.2, 4096, &opts).unwrap();
    let e = |nx: usize| {
        let f = solve_oscillatory(&m, 1, &g, 0.2, nx, &opts).unwrap();
        let stride = 4096 / nx;
        let coarse: Vec<f64> = f4096.last().iter().step_by(stride).copied().collect();
        f.last().iter().zip(&coarse).fold(0.0f64, |s, (a, b)| s.max((a - b).abs()))
    };
    assert!(e(1024) < e(256));
    assert_eq!(sup_error(&f4096, &f4096).unwrap(), 0.0);
}

#[test]
fn table_survives_a_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let m = HamiltonianModel::double_well(PotentialField::cos1d(1));
    let opts = CellOptions { horizon: 10.0, cells: 32, tolerance: 1.0, halving: false, theta: None };
    let t: EffectiveTable64 = build_effective_table(&m, 2.0, 4, &opts).unwrap();
    t.write_csv(&path).unwrap();
    let back = EffectiveTable::read_csv(&path, 1.0).unwrap();
    assert_eq!(back.values(), t.values());
    assert_eq!(back.errors(), t.errors());
    assert_eq!(back.eval(&[0.7]), t.eval(&[0.7]));
}
