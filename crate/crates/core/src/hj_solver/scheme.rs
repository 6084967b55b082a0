use crate::error::{Error, Result};
use crate::model::{directions, HamiltonianKind, HamiltonianModel};
use crate::scalar::Real;

use super::field::SpaceTimeField;
use super::initial::InitialData;

/// A Hamiltonian attached to the nodes of a periodic solver grid.
pub trait NodeHamiltonian<T: Real>: Sync {
    fn dim(&self) -> usize;
    /// `H` at grid node `node` for the full covector `p`.
    fn eval(&self, node: usize, p: &[T]) -> T;
    /// Nodes sufficient to bound `H` and its `p`-derivatives over the whole grid.
    fn representative_nodes(&self, total: usize) -> Vec<usize> {
        let stride = (total / 4096).max(1);
        (0..total).step_by(stride).collect()
    }
    fn id(&self) -> String;
}

/// `H(x / eps, p)` on an `nx^n` grid over `[0, 1)^n`, with `1 / eps` a positive integer.
pub struct OscillatoryHamiltonian<'a, T: Real> {
    model: &'a HamiltonianModel<T>,
    values: Vec<T>,
    points: Vec<[T; 2]>,
    cells_per_period: usize,
    nx: usize,
    eps_recip: u32,
}

impl<'a, T: Real> OscillatoryHamiltonian<'a, T> {
    /// `eps_recip = k` means `eps = 1/k`; requires `k | nx`.
    pub fn new(model: &'a HamiltonianModel<T>, eps_recip: u32, nx: usize) -> Result<Self> {
        if eps_recip == 0 || nx % eps_recip as usize != 0 {
            return Err(Error::invalid(format!(
                "grid of {nx} cells does not hold an integer number of cells per period for eps = 1/{eps_recip}"
            )));
        }
        let dim = model.dim();
        let total = nx.pow(dim as u32);
        let cells_per_period = nx / eps_recip as usize;
        // The scaled coordinate x/eps at node j is (j mod N)/N with N cells per period.
        let n = cells_per_period;
        let hn = T::one() / T::lit(n as f64);
        let mut values = Vec::with_capacity(total);
        let mut points = Vec::with_capacity(total);
        for k in 0..total {
            let y = if dim == 1 {
                [T::lit((k % n) as f64) * hn, T::zero()]
            } else {
                let (i, j) = (k / nx, k % nx);
                [T::lit((i % n) as f64) * hn, T::lit((j % n) as f64) * hn]
            };
            values.push(model.potential().eval(&y[..dim]));
            points.push(y);
        }
        Ok(Self { model, values, points, cells_per_period, nx, eps_recip })
    }

    pub fn cells_per_period(&self) -> usize {
        self.cells_per_period
    }

    pub fn eps_recip(&self) -> u32 {
        self.eps_recip
    }

    pub fn model(&self) -> &HamiltonianModel<T> {
        self.model
    }
}

impl<T: Real> NodeHamiltonian<T> for OscillatoryHamiltonian<'_, T> {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    #[inline]
    fn eval(&self, node: usize, p: &[T]) -> T {
        let dim = self.model.dim();
        self.model.kind().eval_with(self.values[node], &self.points[node][..dim], p)
    }

    fn representative_nodes(&self, _total: usize) -> Vec<usize> {
        // One period cell carries every distinct value.
        let n = self.cells_per_period;
        if self.model.dim() == 1 {
            (0..n).collect()
        } else {
            let stride = (n / 32).max(1);
            (0..n)
                .step_by(stride)
                .flat_map(|i| (0..n).step_by(stride).map(move |j| i * self.nx + j))
                .collect()
        }
    }

    fn id(&self) -> String {
        format!("{} eps=1/{}", self.model.id(), self.eps_recip)
    }
}

/// Spatially homogeneous Hamiltonian `H(p)`.
pub struct UniformHamiltonian<F> {
    dim: usize,
    f: F,
    id: String,
}

impl<F> UniformHamiltonian<F> {
    pub fn new(dim: usize, id: &str, f: F) -> Self {
        Self { dim, f, id: id.to_string() }
    }
}

impl<T: Real, F: Fn(&[T]) -> T + Sync> NodeHamiltonian<T> for UniformHamiltonian<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    #[inline]
    fn eval(&self, _node: usize, p: &[T]) -> T {
        (self.f)(p)
    }
    fn representative_nodes(&self, _total: usize) -> Vec<usize> {
        vec![0]
    }
    fn id(&self) -> String {
        self.id.clone()
    }
}

/// Viscosity coefficients and step size used by a run.
#[derive(Clone, Copy, Debug)]
pub struct SchemeParameters<T> {
    /// Per-axis artificial viscosity.
    pub theta: [T; 2],
    pub dt: T,
    /// Radius of the covector ball on which `theta` bounds `|dH/dp_i|`.
    pub gradient_radius: T,
}

#[derive(Clone, Debug)]
pub struct SolveOptions<T> {
    /// Fixed viscosity; estimated from the data when `None`.
    pub theta: Option<T>,
    /// Fixed time step; must satisfy `dt <= dx / (2 theta)`.
    pub dt: Option<T>,
    /// Ratio `dt / (dx / (2 theta))` used when `dt` is not given.
    pub cfl: T,
    /// Times at which snapshots are stored (the horizon is always included).
    pub snapshot_times: Vec<T>,
    /// Keep an extra snapshot at this time (used by the ergodic solver).
    pub record_initial: bool,
}

impl<T: Real> Default for SolveOptions<T> {
    fn default() -> Self {
        Self { theta: None, dt: None, cfl: T::one(), snapshot_times: Vec::new(), record_initial: false }
    }
}

/// Bounds `max |dH/dp_i|` over the covector ball reached by the solution.
///
/// The ball radius comes from `|u_t| <= M := max |H(x, Dg)|`: every gradient of the
/// solution satisfies `H(x, p) <= M`, so coercivity confines it.
pub fn estimate_scheme<T: Real, H: NodeHamiltonian<T>>(
    h: &H,
    g: &InitialData<T>,
    nx: usize,
) -> Result<SchemeParameters<T>> {
    let dim = h.dim();
    let total = nx.pow(dim as u32);
    let grads = g.grid_gradients(nx);
    let mut m = T::zero();
    for (k, p) in grads.iter().enumerate().take(total) {
        m = m.max(h.eval(k, &p[..dim]).abs());
    }
    let reps = h.representative_nodes(total);
    let dirs = directions::<T>(dim, 16);
    let tilt_norm = crate::model::norm(&g.tilt()[..dim]);
    let mut limit = T::lit(4.0) * (tilt_norm + g.lipschitz() + T::one());
    let radial = 200;
    let radius = loop {
        let mut last_bad = T::zero();
        for s in 0..=radial {
            let r = limit * T::lit(s as f64 / radial as f64);
            let bad = dirs.iter().any(|d| {
                let p = [d[0] * r, if dim == 2 { d[1] * r } else { T::zero() }];
                reps.iter().any(|&k| h.eval(k, &p[..dim]) <= m)
            });
            if bad {
                last_bad = r;
            }
        }
        if last_bad < limit {
            break last_bad + limit / T::lit(radial as f64);
        }
        limit = limit * T::lit(2.0);
        if limit > T::lit(1e6) {
            return Err(Error::invalid("Hamiltonian not coercive on the sampled range"));
        }
    };
    let theta = derivative_bound(h, &reps, radius);
    let theta_max = theta[0].max(theta[1]);
    let dx = T::one() / T::lit(nx as f64);
    let dt = dx / (T::lit(2.0) * theta_max);
    Ok(SchemeParameters { theta, dt, gradient_radius: radius })
}

/// `max |dH/dp_i|` over the ball of radius `radius`, by difference quotients with a 5% margin.
pub fn derivative_bound<T: Real, H: NodeHamiltonian<T>>(h: &H, nodes: &[usize], radius: T) -> [T; 2] {
    let dim = h.dim();
    let n = if dim == 1 { 400 } else { 40 };
    let delta = radius / T::lit(n as f64);
    let mut theta = [T::zero(); 2];
    let node_pts: Vec<T> = (0..=n).map(|i| -radius + T::lit(2.0 * i as f64 / n as f64) * radius).collect();
    for &k in nodes {
        if dim == 1 {
            for &p in &node_pts {
                let d = (h.eval(k, &[p + delta]) - h.eval(k, &[p - delta])).abs() / (T::lit(2.0) * delta);
                theta[0] = theta[0].max(d);
            }
        } else {
            for &a in &node_pts {
                for &b in &node_pts {
                    if a * a + b * b > radius * radius {
                        continue;
                    }
                    let d1 = (h.eval(k, &[a + delta, b]) - h.eval(k, &[a - delta, b])).abs() / (T::lit(2.0) * delta);
                    let d2 = (h.eval(k, &[a, b + delta]) - h.eval(k, &[a, b - delta])).abs() / (T::lit(2.0) * delta);
                    theta[0] = theta[0].max(d1);
                    theta[1] = theta[1].max(d2);
                }
            }
        }
    }
    let margin = T::lit(1.05);
    let floor = T::lit(1e-3);
    let t0 = (theta[0] * margin).max(floor);
    let t1 = if dim == 2 { (theta[1] * margin).max(floor) } else { T::zero() };
    [t0, t1]
}

/// Exact Lipschitz constants of the closed-form kinds in `p`, used when a model is known.
pub fn closed_form_theta<T: Real>(model: &HamiltonianModel<T>, radius: T) -> Option<T> {
    match model.kind() {
        HamiltonianKind::Quadratic => Some(radius),
        HamiltonianKind::Eikonal => Some(model.potential().max_sample()),
        HamiltonianKind::DoubleWell | HamiltonianKind::TruncatedEikonal => Some(T::one()),
        _ => None,
    }
}

/// Solves `u_t + H(x, tilt + Du) = 0` on the periodic grid with a Lax-Friedrichs scheme.
///
/// The numerical Hamiltonian is `H(x, pbar) - sum_i theta_i (p_i^+ - p_i^-) / 2` with central
/// `pbar`; it is monotone when `theta_i >= |dH/dp_i|` and `dt <= dx / (2 max theta)`.
pub fn solve_cauchy<T: Real, H: NodeHamiltonian<T>>(
    h: &H,
    g: &InitialData<T>,
    horizon: T,
    nx: usize,
    opts: &SolveOptions<T>,
) -> Result<SpaceTimeField<T>> {
    let dim = h.dim();
    if g.dim() != dim {
        return Err(Error::invalid("initial data and Hamiltonian dimensions differ"));
    }
    if nx < 3 {
        return Err(Error::invalid("need at least 3 cells per axis"));
    }
    let estimated = estimate_scheme(h, g, nx)?;
    let mut params = estimated;
    if let Some(th) = opts.theta {
        params.theta = [th, if dim == 2 { th } else { T::zero() }];
    }
    let dx = T::one() / T::lit(nx as f64);
    let theta_max = params.theta[0].max(params.theta[1]);
    let bound = dx / (T::lit(2.0) * theta_max);
    params.dt = match opts.dt {
        Some(dt) if dt > bound * (T::one() + T::lit(1e-12)) => {
            return Err(Error::Cfl { dt: dt.to_f64_lossy(), bound: bound.to_f64_lossy() })
        }
        Some(dt) => dt,
        None => bound * opts.cfl.min(T::one()),
    };
    let u0 = g.sample(nx);
    run_scheme(h, u0, g.tilt(), horizon, nx, params, opts)
}

pub(crate) fn run_scheme<T: Real, H: NodeHamiltonian<T>>(
    h: &H,
    mut u: Vec<T>,
    tilt: [T; 2],
    horizon: T,
    nx: usize,
    params: SchemeParameters<T>,
    opts: &SolveOptions<T>,
) -> Result<SpaceTimeField<T>> {
    let dim = h.dim();
    let mut times: Vec<T> = opts.snapshot_times.iter().copied().filter(|&t| t > T::zero() && t < horizon).collect();
    times.push(horizon);
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times.dedup();
    let mut field = SpaceTimeField::new(dim, nx, params, h.id());
    if opts.record_initial {
        field.push(T::zero(), u.clone());
    }
    let mut next = vec![T::zero(); u.len()];
    let mut t = T::zero();
    let mut step = 0usize;
    let mut max_grad = T::zero();
    for &target in &times {
        while t < target {
            let remaining = target - t;
            let dt = if remaining <= params.dt * (T::one() + T::lit(1e-9)) { remaining } else { params.dt };
            max_grad = max_grad.max(lf_step(h, &u, &mut next, tilt, nx, params.theta, dt));
            std::mem::swap(&mut u, &mut next);
            step += 1;
            t = if dt == remaining { target } else { t + dt };
            if step % 64 == 0 || t == target {
                if u.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NotANumber { step });
                }
            }
        }
        field.push(target, u.clone());
    }
    field.finish(step, max_grad);
    Ok(field)
}

/// One Lax-Friedrichs step `next = S_dt(u)`; returns the largest one-sided gradient norm.
pub(crate) fn lf_step<T: Real, H: NodeHamiltonian<T>>(
    h: &H,
    u: &[T],
    next: &mut [T],
    tilt: [T; 2],
    nx: usize,
    theta: [T; 2],
    dt: T,
) -> T {
    let inv_dx = T::lit(nx as f64);
    let half = T::lit(0.5);
    let [th0, th1] = theta;
    let n = nx;
    let mut max_grad = T::zero();
    if h.dim() == 1 {
        for i in 0..n {
            let um = u[(i + n - 1) % n];
            let up = u[(i + 1) % n];
            let c = u[i];
            let pm = (c - um) * inv_dx;
            let pp = (up - c) * inv_dx;
            let pbar = half * (pm + pp) + tilt[0];
            let num = h.eval(i, &[pbar]) - th0 * half * (pp - pm);
            next[i] = c - dt * num;
            max_grad = max_grad.max((pm + tilt[0]).abs());
        }
    } else {
        for i in 0..n {
            let im = (i + n - 1) % n;
            let ip = (i + 1) % n;
            for j in 0..n {
                let jm = (j + n - 1) % n;
                let jp = (j + 1) % n;
                let k = i * n + j;
                let c = u[k];
                let pm1 = (c - u[im * n + j]) * inv_dx;
                let pp1 = (u[ip * n + j] - c) * inv_dx;
                let pm2 = (c - u[i * n + jm]) * inv_dx;
                let pp2 = (u[i * n + jp] - c) * inv_dx;
                let p = [half * (pm1 + pp1) + tilt[0], half * (pm2 + pp2) + tilt[1]];
                let num = h.eval(k, &p) - th0 * half * (pp1 - pm1) - th1 * half * (pp2 - pm2);
                next[k] = c - dt * num;
                let g1 = pm1 + tilt[0];
                let g2 = pm2 + tilt[1];
                max_grad = max_grad.max((g1 * g1 + g2 * g2).sqrt());
            }
        }
    }
    max_grad
}
