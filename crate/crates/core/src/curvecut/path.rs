use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metric::Node;
use crate::scalar::Real;

/// Five-point Gauss-Legendre rule on `[-1, 1]`.
const GAUSS_NODES: [f64; 5] = [-0.906_179_845_938_664, -0.538_469_310_105_683_1, 0.0, 0.538_469_310_105_683_1, 0.906_179_845_938_664];
const GAUSS_WEIGHTS: [f64; 5] =
    [0.236_926_885_056_189_1, 0.478_628_670_499_366_5, 0.568_888_888_888_888_9, 0.478_628_670_499_366_5, 0.236_926_885_056_189_1];

/// Piecewise-linear path `s -> xi(s)` in `R^m` with strictly increasing breakpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyPath<T> {
    breaks: Vec<T>,
    vertices: Vec<Vec<T>>,
}

impl<T: Real> PolyPath<T> {
    pub fn new(breaks: Vec<T>, vertices: Vec<Vec<T>>) -> Result<Self> {
        if breaks.len() < 2 || breaks.len() != vertices.len() {
            return Err(Error::invalid(format!(
                "need at least two breakpoints and one vertex per breakpoint, got {} and {}",
                breaks.len(),
                vertices.len()
            )));
        }
        let m = vertices[0].len();
        if m == 0 || vertices.iter().any(|v| v.len() != m) {
            return Err(Error::invalid("vertices must share a positive dimension"));
        }
        if breaks.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("breakpoints must be strictly increasing"));
        }
        if breaks.iter().chain(vertices.iter().flatten()).any(|c| !c.is_finite()) {
            return Err(Error::invalid("path data must be finite"));
        }
        Ok(Self { breaks, vertices })
    }

    /// Vertices at `0, 1/N, ..., 1`.
    pub fn uniform(vertices: Vec<Vec<T>>) -> Result<Self> {
        let n = vertices.len().saturating_sub(1).max(1);
        let breaks = (0..vertices.len()).map(|j| T::lit(j as f64) / T::lit(n as f64)).collect();
        Self::new(breaks, vertices)
    }

    /// `vertices` points uniform in `[-1, 1]^m` at uniformly spaced breakpoints of `[0, 1]`,
    /// the first at the origin.
    pub fn random(m: usize, vertices: usize, seed: u64) -> Result<Self> {
        if vertices < 2 {
            return Err(Error::invalid("a random path needs at least two vertices"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pts = vec![vec![T::zero(); m]];
        pts.extend((1..vertices).map(|_| (0..m).map(|_| T::lit(rng.gen_range(-1.0..=1.0))).collect()));
        Self::uniform(pts)
    }

    /// Lattice path of a discrete action metric: node `j` at time `j tau`, position `node h`.
    pub fn from_lattice(nodes: &[Node], dim: usize, h: T, tau: T) -> Result<Self> {
        let breaks = (0..nodes.len()).map(|j| T::lit(j as f64) * tau).collect();
        let vertices = nodes.iter().map(|z| (0..dim).map(|i| T::lit(z[i] as f64) * h).collect()).collect();
        Self::new(breaks, vertices)
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn breaks(&self) -> &[T] {
        &self.breaks
    }

    pub fn vertices(&self) -> &[Vec<T>] {
        &self.vertices
    }

    pub fn start_time(&self) -> T {
        self.breaks[0]
    }

    pub fn end_time(&self) -> T {
        self.breaks[self.breaks.len() - 1]
    }

    pub fn duration(&self) -> T {
        self.end_time() - self.start_time()
    }

    pub fn start(&self) -> &[T] {
        &self.vertices[0]
    }

    pub fn end(&self) -> &[T] {
        &self.vertices[self.vertices.len() - 1]
    }

    /// Linear interpolation, clamped to the domain.
    pub fn eval(&self, s: T) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim()];
        self.eval_into(s, &mut out);
        out
    }

    pub(crate) fn eval_into(&self, s: T, out: &mut [T]) {
        let n = self.breaks.len();
        if !(s > self.breaks[0]) {
            out.copy_from_slice(&self.vertices[0]);
            return;
        }
        if s >= self.breaks[n - 1] {
            out.copy_from_slice(&self.vertices[n - 1]);
            return;
        }
        let j = self.breaks.partition_point(|&b| b <= s) - 1;
        let (a, b) = (self.breaks[j], self.breaks[j + 1]);
        let w = (s - a) / (b - a);
        for (i, o) in out.iter_mut().enumerate() {
            let (u, v) = (self.vertices[j][i], self.vertices[j + 1][i]);
            *o = u + (v - u) * w;
        }
    }

    /// `s -> xi(s0 + sN - s)` on the same domain.
    pub fn reversed(&self) -> Self {
        let (s0, s1) = (self.start_time(), self.end_time());
        let breaks = self.breaks.iter().rev().map(|&b| s0 + s1 - b).collect();
        let vertices = self.vertices.iter().rev().cloned().collect();
        Self { breaks, vertices }
    }

    /// Velocity on each segment.
    pub fn velocities(&self) -> Vec<Vec<T>> {
        self.breaks
            .windows(2)
            .zip(self.vertices.windows(2))
            .map(|(b, v)| {
                let dt = b[1] - b[0];
                v[0].iter().zip(&v[1]).map(|(a, c)| (*c - *a) / dt).collect()
            })
            .collect()
    }

    pub fn max_speed(&self) -> T {
        self.velocities().iter().map(|v| v.iter().fold(T::zero(), |s, &c| s + c * c).sqrt()).fold(T::zero(), T::max)
    }

    /// `int L(xi, xi') ds`, five Gauss points per segment. `L` returning `None` at some velocity
    /// is reported as [`Error::SpeedRange`].
    pub fn action<L>(&self, l: L) -> Result<T>
    where
        L: Fn(&[T], &[T]) -> Result<Option<T>>,
    {
        let mut total = T::zero();
        let mut x = vec![T::zero(); self.dim()];
        let mut finite_speed = T::zero();
        for (j, v) in self.velocities().iter().enumerate() {
            let (a, b) = (self.breaks[j], self.breaks[j + 1]);
            let half = (b - a) / T::lit(2.0);
            let mid = (a + b) / T::lit(2.0);
            let speed = v.iter().fold(T::zero(), |s, &c| s + c * c).sqrt();
            let mut seg = T::zero();
            for (g, w) in GAUSS_NODES.iter().zip(GAUSS_WEIGHTS) {
                self.eval_into(mid + half * T::lit(*g), &mut x);
                match l(&x, v)? {
                    Some(val) => seg += T::lit(w) * val,
                    None => {
                        return Err(Error::SpeedRange { speed: speed.to_f64_lossy(), limit: finite_speed.to_f64_lossy() })
                    }
                }
            }
            finite_speed = finite_speed.max(speed);
            total += seg * half;
        }
        Ok(total)
    }

    /// Columns `s, x1, ..., xm`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(file);
        let mut header = vec!["s".to_string()];
        header.extend((1..=self.dim()).map(|i| format!("x{i}")));
        w.write_record(&header)?;
        for (b, v) in self.breaks.iter().zip(&self.vertices) {
            let mut rec = vec![b.to_f64_lossy().to_string()];
            rec.extend(v.iter().map(|c| c.to_f64_lossy().to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}
