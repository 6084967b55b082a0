use super::*;
use crate::error::Error;
use crate::model::{HamiltonianModel, PotentialField};
use proptest::prelude::*;

fn quad0(dim: usize) -> HamiltonianModel<f64> {
    HamiltonianModel::quadratic(PotentialField::constant(dim, 0.0))
}

fn hopf_lax_quadratic(g: impl Fn(f64) -> f64, x: f64, t: f64) -> f64 {
    let n = 40_000;
    (0..=n)
        .map(|i| {
            let y = x - 1.0 + 2.0 * i as f64 / n as f64;
            g(y) + (x - y) * (x - y) / (2.0 * t)
        })
        .fold(f64::INFINITY, f64::min)
}

fn trig_data(coeffs: Vec<(f64, f64)>) -> InitialData<f64> {
    let lip: f64 = coeffs.iter().enumerate().map(|(k, (a, b))| (k + 1) as f64 * std::f64::consts::TAU * (a.abs() + b.abs())).sum();
    InitialData::new("trig", 1, lip, move |x: &[f64]| {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, (a, b))| {
                let w = std::f64::consts::TAU * (k + 1) as f64 * x[0];
                a * w.cos() + b * w.sin()
            })
            .sum()
    })
}

#[test]
fn constant_data_moves_by_h_at_zero() {
    let m = HamiltonianModel::quadratic(PotentialField::<f64>::constant(1, 0.75));
    let g = InitialData::constant(1, 2.0);
    let f = solve_oscillatory(&m, 4, &g, 0.5, 256, &SolveOptions::default()).unwrap();
    for u in f.last() {
        assert!((u - (2.0 - 0.5 * 0.75)).abs() < 1e-12);
    }
}

#[test]
fn quadratic_matches_hopf_lax_after_shock() {
    let m = quad0(1);
    let g = InitialData::sin(1);
    let t = 0.3;
    let nx = 2048;
    let f = solve_oscillatory(&m, 1, &g, t, nx, &SolveOptions::default()).unwrap();
    let gs = |y: f64| (std::f64::consts::TAU * y).sin() / std::f64::consts::TAU;
    let mut err: f64 = 0.0;
    for (k, u) in f.last().iter().enumerate().step_by(16) {
        let x = k as f64 / nx as f64;
        err = err.max((u - hopf_lax_quadratic(gs, x, t)).abs());
    }
    assert!(err < 2e-3, "sup error {err}");
    assert!(f.cfl_number() <= 0.5 + 1e-12);
    assert!(f.gradients_certified());
}

#[test]
fn linear_data_on_uniform_hamiltonian_is_exact() {
    let h = UniformHamiltonian::new(2, "q", |p: &[f64]| 0.5 * (p[0] * p[0] + p[1] * p[1]) + 0.25);
    let g = InitialData::linear(&[0.5, -1.0]);
    let f = solve_cauchy(&h, &g, 1.0, 16, &SolveOptions::default()).unwrap();
    let hp = 0.5 * 1.25 + 0.25;
    for u in f.last() {
        assert!((u + hp).abs() < 1e-12);
    }
}

#[test]
fn cfl_violation_is_refused() {
    let m = quad0(1);
    let g = InitialData::sin(1);
    let opts = SolveOptions { theta: Some(2.0), dt: Some(0.01), ..Default::default() };
    assert!(matches!(solve_oscillatory(&m, 1, &g, 1.0, 64, &opts), Err(Error::Cfl { .. })));
}

#[test]
fn nan_aborts_with_step() {
    let m = HamiltonianModel::custom(1, "blowup", true, |_y: &[f64], p: &[f64]| if p[0] > 0.9 { f64::NAN } else { p[0].abs() });
    let g = InitialData::sin(1);
    let opts = SolveOptions { theta: Some(1.0), ..Default::default() };
    assert!(matches!(solve_oscillatory(&m, 1, &g, 1.0, 64, &opts), Err(Error::NotANumber { .. })));
}

#[test]
fn eps_must_divide_grid() {
    let m = quad0(1);
    assert!(solve_oscillatory(&m, 3, &InitialData::sin(1), 0.1, 64, &SolveOptions::default()).is_err());
}

#[test]
fn bounded_by_data_and_h_at_zero() {
    let m = HamiltonianModel::quadratic(PotentialField::<f64>::cos2d());
    let g = InitialData::sin(2);
    let t = 0.5;
    let f = solve_oscillatory(&m, 2, &g, t, 64, &SolveOptions::default()).unwrap();
    let gmax = g.sample(64).iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let hmax = 2.0;
    for u in f.last() {
        assert!(u.abs() <= gmax + t * hmax + 1e-12);
    }
}

#[test]
fn time_monotone_when_h_nonnegative() {
    // H >= 0 and constant data: the first step decreases, and monotonicity propagates it.
    let m = HamiltonianModel::truncated_eikonal(PotentialField::cos1d(1).affine(1.0, 1.0));
    let g = InitialData::constant(1, 0.0);
    let times: Vec<f64> = (1..=20).map(|k| k as f64 * 0.1).collect();
    let opts = SolveOptions { snapshot_times: times, ..Default::default() };
    let f = solve_oscillatory(&m, 2, &g, 2.0, 128, &opts).unwrap();
    for k in 1..f.times().len() {
        for (a, b) in f.snapshot(k).iter().zip(f.snapshot(k - 1)) {
            assert!(a <= b);
        }
    }
}

#[test]
fn ordering_by_hamiltonian() {
    let lo = HamiltonianModel::quadratic(PotentialField::cos1d(1));
    let hi = HamiltonianModel::quadratic(PotentialField::cos1d(1).affine(1.0, 0.3));
    let g = InitialData::sin(1);
    let opts = SolveOptions { theta: Some(4.0), ..Default::default() };
    let a = solve_oscillatory(&hi, 4, &g, 1.0, 256, &opts).unwrap();
    let b = solve_oscillatory(&lo, 4, &g, 1.0, 256, &opts).unwrap();
    for (u, v) in a.last().iter().zip(b.last()) {
        assert!(u <= v);
    }
}

#[test]
fn sup_error_trivial_cases() {
    let m = quad0(1);
    let f = solve_oscillatory(&m, 1, &InitialData::sin(1), 0.2, 64, &SolveOptions::default()).unwrap();
    assert_eq!(sup_error(&f, &f).unwrap(), 0.0);
    let shifted: Vec<f64> = f.last().iter().map(|u| u + 0.125).collect();
    let g = SpaceTimeField::from_snapshots(1, 64, f.times().to_vec(), vec![shifted], "shift").unwrap();
    assert_eq!(sup_error(&f, &g).unwrap(), 0.125);
    let other = SpaceTimeField::from_snapshots(1, 32, vec![0.2], vec![vec![0.0; 32]], "x").unwrap();
    assert!(matches!(sup_error(&f, &other), Err(Error::GridMismatch(_))));
}

#[test]
fn field_csv_layout() {
    let m = quad0(2);
    let f = solve_oscillatory(&m, 1, &InitialData::sin(2), 0.1, 8, &SolveOptions::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.csv");
    f.write_csv(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x1,x2,u"));
    assert_eq!(lines.count(), 64);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn comparison_and_contraction(
        c1 in prop::collection::vec((-0.05f64..0.05, -0.05f64..0.05), 3),
        c2 in prop::collection::vec((-0.05f64..0.05, -0.05f64..0.05), 3),
        lift in 0.0f64..0.2,
    ) {
        let m = HamiltonianModel::double_well(PotentialField::cos1d(1));
        let g1 = trig_data(c1.clone());
        let bump = trig_data(c2.clone());
        let b2 = bump.clone();
        let g2 = InitialData::new("g2", 1, g1.lipschitz() + bump.lipschitz(), {
            let g1 = g1.clone();
            move |x: &[f64]| g1.periodic_part(x) + lift + 0.1 + b2.periodic_part(x).abs()
        });
        let opts = SolveOptions { theta: Some(2.5), dt: Some(1.0 / (128.0 * 5.0)), ..Default::default() };
        let a = solve_oscillatory(&m, 2, &g1, 0.5, 128, &opts).unwrap();
        let b = solve_oscillatory(&m, 2, &g2, 0.5, 128, &opts).unwrap();
        let d0 = g1.sample(128).iter().zip(g2.sample(128)).fold(0.0f64, |s, (x, y)| s.max((x - y).abs()));
        for (u, v) in a.last().iter().zip(b.last()) {
            prop_assert!(u <= v);
            prop_assert!((u - v).abs() <= d0 + 1e-12);
        }
    }
}

mod optimal_control {
    use super::*;
    use crate::metric::{DiscreteActionMetric, MetricOptions};

    #[test]
    fn free_particle_matches_hopf_lax() {
        let m = quad0(1);
        let dm = DiscreteActionMetric::new(&m, &MetricOptions::default()).unwrap();
        let g = InitialData::sin(1);
        let gs = |y: f64| (std::f64::consts::TAU * y).sin() / std::f64::consts::TAU;
        let (k, t) = (8u32, 0.5);
        // Lattice restriction of y plus the uneven split of a displacement into equal steps.
        let (h, tau) = (dm.h(), dm.tau());
        let tol = g.lipschitz() * h / k as f64 + t * h * h / (8.0 * tau * tau) + 1e-9;
        for j in 0..8 {
            let x = j as f64 / 8.0;
            let u = oc_solve(&m, k, &g, &[x], t, &dm, None).unwrap();
            let hl = hopf_lax_quadratic(gs, x, t);
            assert!(u >= hl - g.lipschitz() * h / k as f64 - 1e-9 && u <= hl + tol, "x={x}: {u} vs {hl}");
        }
    }

    #[test]
    fn zero_time_returns_data() {
        let m = HamiltonianModel::quadratic(PotentialField::cos1d(1));
        let dm = DiscreteActionMetric::new(&m, &MetricOptions::default()).unwrap();
        let g = InitialData::sin(1);
        assert_eq!(oc_solve(&m, 4, &g, &[0.3], 0.0, &dm, None).unwrap(), g.eval(&[0.3]));
        let x = [0.25f64];
        let u = oc_solve(&m, 16, &g, &x, 1.0 / 32.0, &dm, None).unwrap();
        assert!((u - g.eval(&x)).abs() < 0.1, "{u}");
    }

    #[test]
    fn eikonal_agrees_with_the_scheme() {
        let m = HamiltonianModel::eikonal(PotentialField::constant(1, 1.0)).unwrap();
        let dm = DiscreteActionMetric::new(&m, &MetricOptions::default()).unwrap();
        let g = InitialData::sin(1);
        let (k, t) = (4u32, 0.5);
        let opts = SolveOptions { snapshot_times: vec![t], ..Default::default() };
        let fine = solve_oscillatory(&m, k, &g, t, 1024, &opts).unwrap();
        let coarse = solve_oscillatory(&m, k, &g, t, 512, &opts).unwrap();
        let oc_tol = g.lipschitz() * dm.h() / k as f64;
        for j in 0..16 {
            let x = j as f64 / 16.0;
            let u = oc_solve(&m, k, &g, &[x], t, &dm, None).unwrap();
            let (pf, pc) = (fine.last()[j * 64], coarse.last()[j * 32]);
            assert!((u - pf).abs() <= 3.0 * (oc_tol + (pf - pc).abs()) + 1e-9, "x={x}: {u} vs {pf} ({pc})");
        }
    }

    #[test]
    fn search_boundary_is_enlarged_or_reported() {
        let m = quad0(1);
        let dm = DiscreteActionMetric::new(&m, &MetricOptions::default()).unwrap();
        let g = InitialData::sin(1);
        let wide = oc_solve(&m, 8, &g, &[0.0], 0.5, &dm, None).unwrap();
        let tiny = oc_solve(&m, 8, &g, &[0.0], 0.5, &dm, Some(1e-3));
        assert!(matches!(tiny, Err(Error::SearchBoundary { .. })), "{tiny:?}");
        assert!(oc_solve(&m, 8, &g, &[0.0], 0.5, &dm, Some(0.2)).unwrap() >= wide);
    }
}
