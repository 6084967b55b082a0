use std::path::Path;

use super::action::{DiscreteActionMetric, Node};
use super::cell::DiscreteCell;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Sample set for [`metric_inequality_report`]: endpoints `y = t q` for each ladder time.
#[derive(Clone, Debug)]
pub struct InequalitySamples<T> {
    /// Doubling ladder of times, each a multiple of `tau`.
    pub ladder: Vec<T>,
    /// Average velocities `q`; every `t q` must be a lattice point.
    pub velocities: Vec<Vec<T>>,
    /// Integer period translations used for the periodicity check.
    pub shifts: Vec<Vec<i64>>,
}

/// Worst residuals at one ladder time.
#[derive(Clone, Debug)]
pub struct InequalityRow<T> {
    pub t: T,
    /// `min m(t,0,y) + m(t,y,2y) - m(2t,0,2y)`; nonnegative for an exact metric.
    pub subadditivity: T,
    /// `max |m(t, w, y + w) - m(t, 0, y)|` over integer shifts `w`.
    pub periodicity: T,
    /// `max m(2t,0,2y) - 2 m(t,0,y)`.
    pub doubling: T,
    /// `max 2 m(t,0,y) - m(2t,0,2y)`.
    pub superadditivity: T,
    /// `max mbar(t,0,y) - m(t,0,y)`, when a homogenized metric is supplied.
    pub lower_bound: Option<T>,
    /// `max |m(t,0,y) - mbar(t,0,y)|`, when a homogenized metric is supplied.
    pub deviation: Option<T>,
}

#[derive(Clone, Debug)]
pub struct InequalityReport<T> {
    pub metric: String,
    pub rows: Vec<InequalityRow<T>>,
}

/// Bounded-growth rule for a ladder of constants: with `S_j` the running maximum of the
/// positive parts, every doubling satisfies `S_{j+1} <= ratio * S_j + 1e-9`.
pub fn bounded_growth<T: Real>(seq: &[T], ratio: T) -> bool {
    let mut s = T::zero();
    for (j, &v) in seq.iter().enumerate() {
        let next = s.max(v.max(T::zero()));
        if j > 0 && next > ratio * s + T::lit(1e-9) {
            return false;
        }
        s = next;
    }
    true
}

impl<T: Real> InequalityReport<T> {
    pub fn subadditive_exact(&self) -> bool {
        self.rows.iter().all(|r| r.subadditivity >= T::zero())
    }

    pub fn periodic_exact(&self) -> bool {
        self.rows.iter().all(|r| r.periodicity == T::zero())
    }

    pub fn doubling_bounded(&self) -> bool {
        bounded_growth(&self.rows.iter().map(|r| r.doubling).collect::<Vec<_>>(), T::lit(1.1))
    }

    pub fn superadditivity_bounded(&self) -> bool {
        bounded_growth(&self.rows.iter().map(|r| r.superadditivity).collect::<Vec<_>>(), T::lit(1.1))
    }

    /// `None` when no homogenized metric was supplied.
    pub fn deviation_bounded(&self) -> Option<bool> {
        let d: Option<Vec<T>> = self.rows.iter().map(|r| r.deviation).collect();
        d.map(|d| bounded_growth(&d, T::lit(1.1)))
    }

    pub fn passes(&self) -> bool {
        self.subadditive_exact()
            && self.periodic_exact()
            && self.doubling_bounded()
            && self.superadditivity_bounded()
            && self.deviation_bounded().unwrap_or(true)
    }

    /// Columns `t, subadditivity, periodicity, doubling, superadditivity, lower_bound, deviation`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(["t", "subadditivity", "periodicity", "doubling", "superadditivity", "lower_bound", "deviation"])?;
        let f = |v: T| v.to_f64_lossy().to_string();
        let o = |v: Option<T>| v.map(f).unwrap_or_default();
        for r in &self.rows {
            w.write_record([f(r.t), f(r.subadditivity), f(r.periodicity), f(r.doubling), f(r.superadditivity), o(r.lower_bound), o(r.deviation)])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// Residuals of subadditivity, periodicity, the doubling bounds and, given the discrete cell,
/// the distance to the homogenized metric, over a doubling ladder.
pub fn metric_inequality_report<T: Real>(
    m: &DiscreteActionMetric<T>,
    cell: Option<&DiscreteCell<'_, T>>,
    samples: &InequalitySamples<T>,
) -> Result<InequalityReport<T>> {
    let dim = m.dim();
    let mut rows = Vec::new();
    for &t in &samples.ladder {
        let n = m.to_steps(t)?;
        let mut row = InequalityRow {
            t,
            subadditivity: T::infinity(),
            periodicity: T::zero(),
            doubling: T::neg_infinity(),
            superadditivity: T::neg_infinity(),
            lower_bound: cell.map(|_| T::neg_infinity()),
            deviation: cell.map(|_| T::zero()),
        };
        for q in &samples.velocities {
            let y: Vec<T> = q.iter().take(dim).map(|&c| c * t).collect();
            let yl = m.to_lattice(&y)?;
            let y2: Node = [2 * yl[0], 2 * yl[1]];
            let zero = [0, 0];
            let m1 = m.value(n, zero, yl)?;
            let m2 = m.value(2 * n, zero, y2)?;
            let tail = m.value(n, yl, y2)?;
            row.subadditivity = row.subadditivity.min(m1 + tail - m2);
            row.doubling = row.doubling.max(m2 - T::lit(2.0) * m1);
            row.superadditivity = row.superadditivity.max(T::lit(2.0) * m1 - m2);
            for w in &samples.shifts {
                let k = m.cells_per_unit() as i64;
                let wl: Node = [w[0] * k, if dim == 2 { w[1] * k } else { 0 }];
                let shifted = m.value(n, wl, [yl[0] + wl[0], yl[1] + wl[1]])?;
                row.periodicity = row.periodicity.max((shifted - m1).abs());
            }
            if let Some(c) = cell {
                let origin = vec![T::zero(); dim];
                let mbar = c.homogenized_metric(t, &origin, &y)?;
                row.lower_bound = row.lower_bound.map(|v| v.max(mbar - m1));
                row.deviation = row.deviation.map(|v| v.max((m1 - mbar).abs()));
            }
        }
        rows.push(row);
    }
    Ok(InequalityReport { metric: m.id().to_string(), rows })
}

/// `t Lbar((y - x) / t)` from a tabulated effective Hamiltonian.
pub fn homogenized_metric<T: Real>(table: &crate::cell::EffectiveTable<T>, t: T, x: &[T], y: &[T]) -> Result<T> {
    let q: Vec<T> = x.iter().zip(y).map(|(a, b)| (*b - *a) / t).collect();
    Ok(t * crate::cell::effective_lagrangian(table, &q)?)
}
