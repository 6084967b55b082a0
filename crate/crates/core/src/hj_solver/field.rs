use std::path::Path;

use crate::error::{Error, Result};
use crate::model::grid_points;
use crate::scalar::Real;

use super::scheme::SchemeParameters;

/// Snapshots of a periodic grid function `u(., t_k)` on `[0, 1)^n`.
#[derive(Clone, Debug)]
pub struct SpaceTimeField<T: Real> {
    dim: usize,
    nx: usize,
    times: Vec<T>,
    snapshots: Vec<Vec<T>>,
    params: SchemeParameters<T>,
    id: String,
    eps_recip: Option<u32>,
    steps: usize,
    max_gradient: T,
}

impl<T: Real> SpaceTimeField<T> {
    pub(crate) fn new(dim: usize, nx: usize, params: SchemeParameters<T>, id: String) -> Self {
        Self {
            dim,
            nx,
            times: Vec::new(),
            snapshots: Vec::new(),
            params,
            id,
            eps_recip: None,
            steps: 0,
            max_gradient: T::zero(),
        }
    }

    pub(crate) fn push(&mut self, t: T, u: Vec<T>) {
        self.times.push(t);
        self.snapshots.push(u);
    }

    pub(crate) fn finish(&mut self, steps: usize, max_gradient: T) {
        self.steps = steps;
        self.max_gradient = max_gradient;
    }

    pub(crate) fn set_eps_recip(&mut self, k: u32) {
        self.eps_recip = Some(k);
    }

    /// Builds a field from given snapshots, e.g. an exact reference.
    pub fn from_snapshots(dim: usize, nx: usize, times: Vec<T>, snapshots: Vec<Vec<T>>, id: &str) -> Result<Self> {
        let total = nx.pow(dim as u32);
        if times.len() != snapshots.len() || snapshots.iter().any(|s| s.len() != total) {
            return Err(Error::GridMismatch("snapshot sizes do not match the grid".into()));
        }
        let params = SchemeParameters { theta: [T::zero(); 2], dt: T::zero(), gradient_radius: T::zero() };
        Ok(Self { dim, nx, times, snapshots, params, id: id.to_string(), eps_recip: None, steps: 0, max_gradient: T::zero() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn dx(&self) -> T {
        T::one() / T::lit(self.nx as f64)
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn snapshot(&self, k: usize) -> &[T] {
        &self.snapshots[k]
    }

    pub fn last(&self) -> &[T] {
        self.snapshots.last().expect("field has at least one snapshot")
    }

    pub fn dt(&self) -> T {
        self.params.dt
    }

    pub fn theta(&self) -> [T; 2] {
        self.params.theta
    }

    pub fn parameters(&self) -> SchemeParameters<T> {
        self.params
    }

    /// `dt * max theta / dx`; at most 1/2 for stored runs.
    pub fn cfl_number(&self) -> T {
        self.params.dt * self.params.theta[0].max(self.params.theta[1]) / self.dx()
    }

    pub fn model_id(&self) -> &str {
        &self.id
    }

    pub fn eps_recip(&self) -> Option<u32> {
        self.eps_recip
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Largest one-sided difference quotient (plus tilt) seen during stepping.
    pub fn max_gradient(&self) -> T {
        self.max_gradient
    }

    /// Whether every reconstructed gradient stayed in the ball where `theta` was certified.
    pub fn gradients_certified(&self) -> bool {
        self.max_gradient <= self.params.gradient_radius
    }

    /// Node coordinates, row-major with `x1` slow.
    pub fn nodes(&self) -> Vec<[T; 2]> {
        grid_points::<T>(self.dim, self.nx).collect()
    }

    /// Writes `t, x (or x1, x2), u` rows.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Parse(format!("{other:?}")),
        })?;
        if self.dim == 1 {
            w.write_record(["t", "x", "u"])?;
        } else {
            w.write_record(["t", "x1", "x2", "u"])?;
        }
        let nodes = self.nodes();
        for (t, snap) in self.times.iter().zip(&self.snapshots) {
            for (x, u) in nodes.iter().zip(snap) {
                let mut rec = vec![t.to_f64_lossy().to_string()];
                rec.extend(x[..self.dim].iter().map(|c| c.to_f64_lossy().to_string()));
                rec.push(u.to_f64_lossy().to_string());
                w.write_record(&rec)?;
            }
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// `max` over snapshots and nodes of `|A - B|`.
pub fn sup_error<T: Real>(a: &SpaceTimeField<T>, b: &SpaceTimeField<T>) -> Result<T> {
    if a.dim != b.dim || a.nx != b.nx {
        return Err(Error::GridMismatch(format!(
            "grids differ: dim {} nx {} vs dim {} nx {}",
            a.dim, a.nx, b.dim, b.nx
        )));
    }
    if a.times.len() != b.times.len() || a.times.iter().zip(&b.times).any(|(s, t)| (*s - *t).abs() > T::lit(1e-12)) {
        return Err(Error::GridMismatch("snapshot times differ".into()));
    }
    let mut e = T::zero();
    for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
        for (x, y) in sa.iter().zip(sb) {
            e = e.max((*x - *y).abs());
        }
    }
    Ok(e)
}

/// Per-snapshot sup errors.
pub fn sup_error_by_time<T: Real>(a: &SpaceTimeField<T>, b: &SpaceTimeField<T>) -> Result<Vec<T>> {
    sup_error(a, b)?;
    Ok(a.snapshots
        .iter()
        .zip(&b.snapshots)
        .map(|(sa, sb)| sa.iter().zip(sb).fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs())))
        .collect())
}
