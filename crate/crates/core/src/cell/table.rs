use std::path::Path;

use rayon::prelude::*;

use super::ergodic::{effective_h_at, ergodic_bracket, CellOptions};
use crate::error::{Error, Result};
use crate::hj_solver::{NodeHamiltonian, OscillatoryHamiltonian};
use crate::model::{HamiltonianKind, HamiltonianModel};
use crate::scalar::Real;

/// Something that evaluates `Hbar(p)`.
pub trait EffectiveHamiltonian<T: Real>: Sync {
    fn dim(&self) -> usize;
    fn hbar(&self, p: &[T]) -> T;
}

/// `Hbar` on the grid `{-P + i dp}^n`, `dp = 2P / steps`, with multilinear interpolation.
#[derive(Clone, Debug)]
pub struct EffectiveTable<T: Real> {
    dim: usize,
    p_radius: T,
    steps: usize,
    values: Vec<T>,
    errors: Vec<T>,
    converged: Vec<bool>,
    source: String,
    horizon: T,
    convex: bool,
    uncharted: bool,
}

impl<T: Real> EffectiveTable<T> {
    /// Table of a known function, with zero error estimates.
    pub fn from_fn<F: Fn(&[T]) -> T>(dim: usize, p_radius: T, steps: usize, convex: bool, id: &str, f: F) -> Self {
        let total = (steps + 1).pow(dim as u32);
        let mut t = Self {
            dim,
            p_radius,
            steps,
            values: vec![T::zero(); total],
            errors: vec![T::zero(); total],
            converged: vec![true; total],
            source: id.to_string(),
            horizon: T::zero(),
            convex,
            uncharted: false,
        };
        for k in 0..total {
            let p = t.node(k);
            t.values[k] = f(&p[..dim]);
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p_radius(&self) -> T {
        self.p_radius
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dp(&self) -> T {
        T::lit(2.0) * self.p_radius / T::lit(self.steps as f64)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Covector of node `k`, row-major with `p1` slow.
    pub fn node(&self, k: usize) -> [T; 2] {
        let n = self.steps + 1;
        let c = |i: usize| -self.p_radius + self.dp() * T::lit(i as f64);
        if self.dim == 1 {
            [c(k), T::zero()]
        } else {
            [c(k / n), c(k % n)]
        }
    }

    pub fn value(&self, k: usize) -> T {
        self.values[k]
    }

    pub fn error(&self, k: usize) -> T {
        self.errors[k]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn errors(&self) -> &[T] {
        &self.errors
    }

    pub fn source_id(&self) -> &str {
        &self.source
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn is_convex_source(&self) -> bool {
        self.convex
    }

    /// Some entry missed its error tolerance.
    pub fn is_flagged(&self) -> bool {
        self.converged.iter().any(|c| !c)
    }

    /// No analytic cross-check exists for this source (double well with `osc V < 1`).
    pub fn is_uncharted(&self) -> bool {
        self.uncharted
    }

    pub fn max_error(&self) -> T {
        self.errors.iter().copied().fold(T::zero(), T::max)
    }

    /// Index of the node nearest to `p`, whatever the sign convention of ties.
    pub fn nearest(&self, p: &[T]) -> usize {
        let idx = |x: T| {
            let r = ((x + self.p_radius) / self.dp()).round();
            r.max(T::zero()).min(T::lit(self.steps as f64)).to_usize().unwrap_or(0)
        };
        if self.dim == 1 {
            idx(p[0])
        } else {
            idx(p[0]) * (self.steps + 1) + idx(p[1])
        }
    }

    /// Node index after `p -> -p`.
    pub fn mirror(&self, k: usize) -> usize {
        let n = self.steps + 1;
        if self.dim == 1 {
            self.steps - k
        } else {
            (self.steps - k / n) * n + (self.steps - k % n)
        }
    }

    /// Largest violation of `H(p-dp e) + H(p+dp e) >= 2 H(p)` along grid lines.
    pub fn midpoint_convexity_defect(&self) -> T {
        let n = self.steps + 1;
        let mut worst = T::zero();
        let lines = if self.dim == 1 { 1 } else { n };
        for l in 0..lines {
            for k in 1..n - 1 {
                let idx = |a: usize, b: usize| if self.dim == 1 { b } else { a * n + b };
                let along = |s: usize| self.values[if self.dim == 1 { s } else { idx(l, s) }];
                worst = worst.max(T::lit(2.0) * along(k) - along(k - 1) - along(k + 1));
                if self.dim == 2 {
                    let v = |s: usize| self.values[idx(s, l)];
                    worst = worst.max(T::lit(2.0) * v(k) - v(k - 1) - v(k + 1));
                }
            }
        }
        worst
    }

    /// Piecewise-linear (1D) or bilinear (2D) interpolant, extended linearly outside the box.
    pub fn eval(&self, p: &[T]) -> T {
        let dp = self.dp();
        let locate = |x: T| {
            let s = (x + self.p_radius) / dp;
            let i = s.floor().max(T::zero()).min(T::lit((self.steps - 1) as f64));
            let iu = i.to_usize().unwrap_or(0);
            (iu, s - i)
        };
        if self.dim == 1 {
            let (i, f) = locate(p[0]);
            self.values[i] + f * (self.values[i + 1] - self.values[i])
        } else {
            let n = self.steps + 1;
            let (i, f) = locate(p[0]);
            let (j, g) = locate(p[1]);
            let v = |a: usize, b: usize| self.values[a * n + b];
            let one = T::one();
            (one - f) * ((one - g) * v(i, j) + g * v(i, j + 1)) + f * ((one - g) * v(i + 1, j) + g * v(i + 1, j + 1))
        }
    }

    /// Writes `p1[..pn], hbar, err`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(file);
        if self.dim == 1 {
            w.write_record(["p1", "hbar", "err"])?;
        } else {
            w.write_record(["p1", "p2", "hbar", "err"])?;
        }
        for k in 0..self.len() {
            let p = self.node(k);
            let mut rec: Vec<String> = p[..self.dim].iter().map(|c| c.to_f64_lossy().to_string()).collect();
            rec.push(self.values[k].to_f64_lossy().to_string());
            rec.push(self.errors[k].to_f64_lossy().to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// Reads a table written by [`write_csv`](Self::write_csv); the grid is inferred from the nodes.
    pub fn read_csv(path: impl AsRef<Path>, tolerance: T) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = csv::Reader::from_reader(file);
        let dim = r.headers()?.len().checked_sub(2).filter(|d| *d == 1 || *d == 2).ok_or_else(|| {
            Error::Parse(format!("{}: expected columns p1[,p2],hbar,err", path.display()))
        })?;
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let vals = rec
                .iter()
                .map(|f| f.trim().parse::<f64>().map_err(|_| Error::Parse(format!("{}: bad number '{f}'", path.display()))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(vals);
        }
        let n = if dim == 1 { rows.len() } else { (rows.len() as f64).sqrt().round() as usize };
        if n < 2 || n.pow(dim as u32) != rows.len() {
            return Err(Error::Parse(format!("{}: {} rows do not form a square grid", path.display(), rows.len())));
        }
        let p_radius = T::lit(-rows[0][0]);
        let values = rows.iter().map(|r| T::lit(r[dim])).collect::<Vec<_>>();
        let errors: Vec<T> = rows.iter().map(|r| T::lit(r[dim + 1])).collect();
        let converged = errors.iter().map(|e| *e <= tolerance).collect();
        Ok(Self {
            dim,
            p_radius,
            steps: n - 1,
            values,
            errors,
            converged,
            source: path.display().to_string(),
            horizon: T::zero(),
            convex: true,
            uncharted: false,
        })
    }
}

impl<T: Real> EffectiveHamiltonian<T> for EffectiveTable<T> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn hbar(&self, p: &[T]) -> T {
        self.eval(p)
    }
}

impl<T: Real> NodeHamiltonian<T> for EffectiveTable<T> {
    fn dim(&self) -> usize {
        self.dim
    }
    #[inline]
    fn eval(&self, _node: usize, p: &[T]) -> T {
        EffectiveTable::eval(self, p)
    }
    fn representative_nodes(&self, _total: usize) -> Vec<usize> {
        vec![0]
    }
    fn id(&self) -> String {
        format!("effective[{}]", self.source)
    }
}

/// Tabulates [`effective_h_at`] over `{-P + i 2P/steps}^n`, in parallel over nodes.
pub fn build_effective_table<T: Real>(
    model: &HamiltonianModel<T>,
    p_radius: T,
    steps: usize,
    opts: &CellOptions<T>,
) -> Result<EffectiveTable<T>> {
    let dim = model.dim();
    if steps < 1 {
        return Err(Error::invalid("table needs at least one step"));
    }
    if p_radius < model.lipschitz_radius() {
        return Err(Error::invalid(format!(
            "table radius {p_radius} below the Lipschitz bound {}",
            model.lipschitz_radius()
        )));
    }
    let mut table = EffectiveTable::from_fn(dim, p_radius, steps, model.is_convex(), model.id(), |_| T::zero());
    let nodes: Vec<[T; 2]> = (0..table.len()).map(|k| table.node(k)).collect();
    let estimates =
        nodes.par_iter().map(|p| effective_h_at(model, &p[..dim], opts)).collect::<Vec<_>>().into_iter().collect::<Result<Vec<_>>>()?;
    for (k, e) in estimates.into_iter().enumerate() {
        table.values[k] = e.value;
        table.errors[k] = e.error;
        table.converged[k] = e.converged;
    }
    table.horizon = opts.horizon;
    table.uncharted = matches!(model.kind(), HamiltonianKind::DoubleWell) && model.potential().oscillation() < T::one();
    Ok(table)
}

/// Table of the lattice scheme's own effective Hamiltonian at `cells` nodes per period and fixed
/// viscosity `theta`, each entry the midpoint of its ergodic bracket with the half-width as error.
pub fn build_discrete_table<T: Real>(
    model: &HamiltonianModel<T>,
    cells: usize,
    theta: T,
    p_radius: T,
    steps: usize,
    horizon: T,
    tolerance: T,
) -> Result<EffectiveTable<T>> {
    let dim = model.dim();
    if steps < 1 || cells < 4 {
        return Err(Error::invalid("discrete table needs at least one step and four cells"));
    }
    let h = OscillatoryHamiltonian::new(model, 1, cells)?;
    let id = format!("discrete[{}, {cells} cells]", model.id());
    let mut table = EffectiveTable::from_fn(dim, p_radius, steps, model.is_convex(), &id, |_| T::zero());
    let nodes: Vec<[T; 2]> = (0..table.len()).map(|k| table.node(k)).collect();
    let brackets = nodes
        .par_iter()
        .map(|p| ergodic_bracket(&h, *p, cells, [theta, theta], horizon))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    for (k, b) in brackets.into_iter().enumerate() {
        table.values[k] = b.mid();
        table.errors[k] = b.half_width();
        table.converged[k] = b.half_width() <= tolerance;
    }
    table.horizon = horizon;
    table.uncharted = matches!(model.kind(), HamiltonianKind::DoubleWell) && model.potential().oscillation() < T::one();
    Ok(table)
}

/// `sup_p (p . q - Hbar(p))` over the table nodes.
///
/// The interpolant is affine (1D) or bilinear (2D) on each cell, so the node maximum is the
/// supremum over the box. For nonconvex tables this is the conjugate of the convex envelope.
pub fn effective_lagrangian<T: Real>(table: &EffectiveTable<T>, q: &[T]) -> Result<T> {
    let dim = table.dim();
    let n = table.steps() + 1;
    let mut best = (0usize, T::neg_infinity());
    for k in 0..table.len() {
        let p = table.node(k);
        let v = (0..dim).fold(T::zero(), |s, i| s + p[i] * q[i]) - table.value(k);
        if v > best.1 {
            best = (k, v);
        }
    }
    let on_edge = |i: usize| i == 0 || i == n - 1;
    let boundary = if dim == 1 { on_edge(best.0) } else { on_edge(best.0 / n) || on_edge(best.0 % n) };
    if boundary {
        return Err(Error::BoundaryAttained { radius: table.p_radius().to_f64_lossy() });
    }
    Ok(best.1)
}
