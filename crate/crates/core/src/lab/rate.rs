use rayon::prelude::*;

use super::config::{ExperimentConfig, Route};
use crate::cell::{build_discrete_table, EffectiveTable};
use crate::error::{Error, Result};
use crate::hj_solver::{
    estimate_scheme, oc_solve, solve_cauchy, solve_oscillatory, sup_error, InitialData, OscillatoryHamiltonian, SolveOptions,
};
use crate::metric::{DiscreteActionMetric, DiscreteCell, MetricOptions};
use crate::model::{HamiltonianKind, HamiltonianModel};
use crate::scalar::Real;

/// One rung of the eps ladder.
#[derive(Clone, Debug, PartialEq)]
pub struct RateRow<T> {
    pub eps_recip: u32,
    pub eps: T,
    pub sup_error: T,
    /// `|e - e_half|` between the run and its halved-resolution twin.
    pub scheme_error: T,
    /// `scheme_error <= budget * sup_error`.
    pub pass: bool,
    pub route: Route,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RateStatus<T> {
    Fitted { slope: T, intercept: T, residual: T },
    /// Fewer than four rows passed the budget.
    Inconclusive { passing: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateReport<T> {
    pub model_id: String,
    /// Ordered by decreasing eps.
    pub rows: Vec<RateRow<T>>,
    pub status: RateStatus<T>,
    pub budget: T,
    pub notes: Vec<String>,
}

impl<T: Real> RateReport<T> {
    pub const MIN_ROWS: usize = 4;

    /// Assembles a report from rows, fitting the budget-passing ones.
    pub fn from_rows(model_id: &str, mut rows: Vec<RateRow<T>>, budget: T, notes: Vec<String>) -> Result<Self> {
        rows.sort_by(|a, b| a.eps_recip.cmp(&b.eps_recip));
        let passing: Vec<(T, T)> = rows.iter().filter(|r| r.pass).map(|r| (r.eps, r.sup_error)).collect();
        let status = if passing.len() < Self::MIN_ROWS {
            RateStatus::Inconclusive { passing: passing.len() }
        } else {
            let (slope, intercept, residual) = fit_slope(&passing)?;
            RateStatus::Fitted { slope, intercept, residual }
        };
        Ok(Self { model_id: model_id.to_string(), rows, status, budget, notes })
    }

    pub fn slope(&self) -> Option<T> {
        match self.status {
            RateStatus::Fitted { slope, .. } => Some(slope),
            RateStatus::Inconclusive { .. } => None,
        }
    }

    pub fn passing(&self) -> usize {
        self.rows.iter().filter(|r| r.pass).count()
    }
}

/// Least squares line through `(log eps, log e)`; the residual is the largest absolute deviation.
pub fn fit_slope<T: Real>(rows: &[(T, T)]) -> Result<(T, T, T)> {
    if rows.len() < 2 {
        return Err(Error::invalid("a slope fit needs at least two rows"));
    }
    if rows.iter().any(|&(e, v)| !(e > T::zero()) || !(v > T::zero())) {
        return Err(Error::invalid("slope fit entries must be positive"));
    }
    let pts: Vec<(T, T)> = rows.iter().map(|&(e, v)| (e.ln(), v.ln())).collect();
    let n = T::lit(pts.len() as f64);
    let mx = pts.iter().fold(T::zero(), |s, p| s + p.0) / n;
    let my = pts.iter().fold(T::zero(), |s, p| s + p.1) / n;
    let sxx = pts.iter().fold(T::zero(), |s, p| s + (p.0 - mx) * (p.0 - mx));
    if sxx == T::zero() {
        return Err(Error::invalid("slope fit needs two distinct eps values"));
    }
    let sxy = pts.iter().fold(T::zero(), |s, p| s + (p.0 - mx) * (p.1 - my));
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = pts.iter().fold(T::zero(), |s, p| s.max((p.1 - (intercept + slope * p.0)).abs()));
    Ok((slope, intercept, residual))
}

struct Level<T: Real> {
    cells: usize,
    table: EffectiveTable<T>,
}

struct Setup<'a, T: Real> {
    cfg: &'a ExperimentConfig,
    model: &'a HamiltonianModel<T>,
    g: &'a InitialData<T>,
    theta: T,
    levels: [Level<T>; 2],
}

impl<T: Real> Setup<'_, T> {
    fn snapshot_opts(&self, theta: Option<T>) -> SolveOptions<T> {
        SolveOptions { theta, snapshot_times: self.cfg.snapshots.iter().map(|&t| T::lit(t)).collect(), ..Default::default() }
    }

    fn pde_error(&self, k: u32, level: &Level<T>) -> Result<T> {
        let nx = level.cells * k as usize;
        let horizon = T::lit(self.cfg.horizon);
        let osc = solve_oscillatory(self.model, k, self.g, horizon, nx, &self.snapshot_opts(Some(self.theta)))?;
        let eff = solve_cauchy(&level.table, self.g, horizon, nx, &self.snapshot_opts(None))?;
        sup_error(&osc, &eff)
    }

    fn pde_row(&self, k: u32) -> Result<RateRow<T>> {
        let fine = self.pde_error(k, &self.levels[0])?;
        let coarse = self.pde_error(k, &self.levels[1])?;
        Ok(row(k, fine, coarse, T::lit(self.cfg.budget), Route::Pde))
    }

    fn oc_row(&self, k: u32) -> Result<RateRow<T>> {
        let fine = oc_error(self.model, self.g, self.cfg, k, self.cfg.oc_cells)?;
        let coarse = oc_error(self.model, self.g, self.cfg, k, self.cfg.oc_cells / 2)?;
        Ok(row(k, fine, coarse, T::lit(self.cfg.budget), Route::OptimalControl))
    }
}

fn row<T: Real>(k: u32, fine: T, coarse: T, budget: T, route: Route) -> RateRow<T> {
    let scheme_error = (fine - coarse).abs();
    RateRow {
        eps_recip: k,
        eps: T::one() / T::lit(k as f64),
        sup_error: fine,
        scheme_error,
        pass: scheme_error <= budget * fine,
        route,
    }
}

/// Lattice with `cells` nodes per period, time step `4 / cells` and strides up to 8, so
/// velocities are resolved in steps of `1/4` up to speed 2 at every level.
pub fn oc_metric_options<T: Real>(cells: usize) -> MetricOptions<T> {
    MetricOptions { cells_per_unit: cells, tau: T::lit(4.0) / T::lit(cells as f64), max_stride: 8, ..Default::default() }
}

/// `max |u^eps - ubar|` over sample points and snapshots, `u^eps` by [`oc_solve`] on a lattice
/// with `cells` nodes per period and `ubar` by the Hopf-Lax formula of the same lattice's
/// homogenized Lagrangian, minimized over the same `eps`-scaled lattice.
pub fn oc_error<T: Real>(model: &HamiltonianModel<T>, g: &InitialData<T>, cfg: &ExperimentConfig, k: u32, cells: usize) -> Result<T> {
    if model.dim() != 1 {
        return Err(Error::invalid("the optimal-control route is implemented for one dimension"));
    }
    if !model.is_convex() {
        return Err(Error::invalid("the optimal-control formula needs a convex Hamiltonian"));
    }
    let opts = oc_metric_options(cells);
    let metric = DiscreteActionMetric::new(model, &opts)?;
    let cell = DiscreteCell::new(&metric);
    let kk = T::lit(k as f64);
    let step = metric.h() / kk;
    let points = cfg.oc_points;
    if (k as usize * cells) % points != 0 {
        return Err(Error::invalid(format!("{points} sample points are not on the lattice of 1/eps = {k} with {cells} cells")));
    }
    let mut worst = T::zero();
    for &t in &cfg.snapshots {
        let t = T::lit(t);
        let n = metric.to_steps(t * kk)?;
        // The homogenized Lagrangian is finite strictly inside the lattice speed range.
        let reach = (metric.stride() - 1) * n as i64;
        let lbar: Vec<T> = (-reach..=reach)
            .into_par_iter()
            .map(|j| match cell.lbar(&[T::lit(j as f64) * step / t]) {
                // Unbounded in p: the velocity lies outside the effective speed range.
                Err(Error::SearchBoundary { .. }) => Ok(T::infinity()),
                other => other,
            })
            .collect::<Result<Vec<_>>>()?;
        for i in 0..points {
            let x = T::lit(i as f64) / T::lit(points as f64);
            let u = oc_solve(model, k, g, &[x], t, &metric, None)?;
            let (ubar, arg) = (-reach..=reach)
                .map(|j| (g.eval(&[x - T::lit(j as f64) * step]) + t * lbar[(j + reach) as usize], j))
                .fold((T::infinity(), 0), |a, b| if b.0 < a.0 { b } else { a });
            if arg.abs() == reach && ubar.is_finite() {
                return Err(Error::SearchBoundary { radius: (T::lit(reach as f64) * step).to_f64_lossy() });
            }
            worst = worst.max((u - ubar).abs());
        }
    }
    Ok(worst)
}

/// Measures `sup |u^eps - u|` along the eps ladder and fits the rate.
///
/// The finite-difference route compares the oscillatory scheme at `cells` grid cells per
/// eps-period against the effective equation whose Hamiltonian is the ergodic constant of the
/// same scheme on one period, sharing one viscosity `theta`. Each row is repeated at
/// `cells / 2`; the difference is the scheme-error estimate.
pub fn run_rate_experiment<T: Real>(cfg: &ExperimentConfig) -> Result<RateReport<T>> {
    cfg.validate()?;
    let model = HamiltonianModel::<T>::from_spec(&cfg.model, &cfg.potential, cfg.dim)?;
    let g = InitialData::<T>::from_spec(&cfg.initial, cfg.dim)?;
    let mut notes = Vec::new();
    if matches!(model.kind(), HamiltonianKind::DoubleWell) && model.potential().oscillation() < T::one() {
        notes.push("potential oscillation below one: uncharted regime".to_string());
    }
    let budget = T::lit(cfg.budget);

    let rows: Vec<RateRow<T>> = if cfg.route == Route::OptimalControl {
        let setup_free = |k: u32| -> Result<RateRow<T>> {
            let fine = oc_error(&model, &g, cfg, k, cfg.oc_cells)?;
            let coarse = oc_error(&model, &g, cfg, k, cfg.oc_cells / 2)?;
            Ok(row(k, fine, coarse, budget, Route::OptimalControl))
        };
        cfg.eps.par_iter().map(|&k| setup_free(k)).collect::<Result<Vec<_>>>()?
    } else {
        let kmax = *cfg.eps.iter().max().expect("validated nonempty");
        let nx = cfg.cells * kmax as usize;
        let params = estimate_scheme(&OscillatoryHamiltonian::new(&model, kmax, nx)?, &g, nx)?;
        let theta = params.theta[0].max(params.theta[1]);
        let p_radius = params.gradient_radius * T::lit(1.05);
        let build = |cells: usize| -> Result<Level<T>> {
            let table = build_discrete_table(
                &model,
                cells,
                theta,
                p_radius,
                cfg.table_steps,
                T::lit(cfg.table_horizon),
                T::lit(cfg.table_tol),
            )?;
            if table.is_flagged() {
                return Err(Error::FlaggedTable);
            }
            Ok(Level { cells, table })
        };
        let setup = Setup { cfg, model: &model, g: &g, theta, levels: [build(cfg.cells)?, build(cfg.cells / 2)?] };
        notes.push(format!("theta = {}, table radius = {}", theta.to_f64_lossy(), p_radius.to_f64_lossy()));
        let results = cfg
            .eps
            .par_iter()
            .map(|&k| -> Result<(RateRow<T>, Option<String>)> {
                let r = setup.pde_row(k)?;
                if r.pass || cfg.route == Route::Pde || model.dim() != 1 || !model.is_convex() {
                    return Ok((r, None));
                }
                Ok(match setup.oc_row(k) {
                    Ok(oc) => (oc, None),
                    Err(e) => (r, Some(format!("1/eps = {k}: optimal-control route unavailable ({e})"))),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut rows = Vec::with_capacity(results.len());
        for (r, note) in results {
            rows.push(r);
            notes.extend(note);
        }
        rows
    };
    RateReport::from_rows(model.id(), rows, budget, notes)
}
