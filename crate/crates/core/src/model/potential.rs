use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// How a sample-backed field is evaluated between grid points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interpolation {
    Trigonometric,
    Multilinear,
}

type Analytic<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;

/// A `Z^n`-periodic scalar field on the unit torus, `n` in {1, 2}.
///
/// Built-in fields keep their closed form for evaluation and carry samples for
/// oscillation and argmin queries. CSV fields are evaluated by interpolation.
#[derive(Clone)]
pub struct PotentialField<T: Real> {
    dim: usize,
    res: usize,
    samples: Vec<T>,
    interpolation: Interpolation,
    analytic: Option<Analytic<T>>,
    // Affine map applied to the analytic closed form: value = scale * f(y) + shift.
    scale: T,
    shift: T,
    trig: Option<TrigCoefficients>,
    name: String,
}

impl<T: Real> fmt::Debug for PotentialField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialField")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("res", &self.res)
            .field("interpolation", &self.interpolation)
            .finish()
    }
}

pub const DEFAULT_RESOLUTION: usize = 64;

impl<T: Real> PotentialField<T> {
    /// Builds a field from a closed form; samples are taken on a `res^dim` grid.
    pub fn analytic<F>(name: &str, dim: usize, res: usize, f: F) -> Result<Self>
    where
        F: Fn(&[T]) -> T + Send + Sync + 'static,
    {
        check_dim(dim)?;
        if res < 2 {
            return Err(Error::invalid("potential resolution must be at least 2"));
        }
        let f: Analytic<T> = Arc::new(f);
        let samples = grid_points::<T>(dim, res).map(|y| f(&y[..dim])).collect();
        Ok(Self {
            dim,
            res,
            samples,
            interpolation: Interpolation::Trigonometric,
            analytic: Some(f),
            scale: T::one(),
            shift: T::zero(),
            trig: None,
            name: name.to_string(),
        })
    }

    /// Builds a field from row-major samples on a `res^dim` grid.
    pub fn from_samples(
        name: &str,
        dim: usize,
        res: usize,
        samples: Vec<T>,
        interpolation: Interpolation,
    ) -> Result<Self> {
        check_dim(dim)?;
        if res < 2 || samples.len() != res.pow(dim as u32) {
            return Err(Error::invalid(format!(
                "expected {} samples for dim={dim}, res={res}, got {}",
                res.pow(dim as u32),
                samples.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("potential samples must be finite"));
        }
        let trig = (interpolation == Interpolation::Trigonometric).then(|| {
            let s: Vec<f64> = samples.iter().map(|v| v.to_f64_lossy()).collect();
            TrigCoefficients::new(dim, res, &s)
        });
        Ok(Self {
            dim,
            res,
            samples,
            interpolation,
            analytic: None,
            scale: T::one(),
            shift: T::zero(),
            trig,
            name: name.to_string(),
        })
    }

    pub fn constant(dim: usize, c: T) -> Self {
        Self::analytic(&format!("constant:{c}"), dim, 2, move |_| c).expect("valid dimension")
    }

    /// `cos(2 pi y1)`.
    pub fn cos1d(dim: usize) -> Self {
        Self::analytic("cos1d", dim, DEFAULT_RESOLUTION, |y| (T::TAU() * y[0]).cos())
            .expect("valid dimension")
    }

    /// `cos(2 pi y1) cos(2 pi y2)`.
    pub fn cos2d() -> Self {
        Self::analytic("cos2d", 2, DEFAULT_RESOLUTION, |y| {
            (T::TAU() * y[0]).cos() * (T::TAU() * y[1]).cos()
        })
        .expect("valid dimension")
    }

    /// Smooth positive bump `prod_i exp(cos(2 pi y_i) - 1)`.
    pub fn bump(dim: usize) -> Self {
        Self::analytic("bump", dim, DEFAULT_RESOLUTION, |y| {
            y.iter().map(|&yi| ((T::TAU() * yi).cos() - T::one()).exp()).fold(T::one(), |a, b| a * b)
        })
        .expect("valid dimension")
    }

    /// `1 / (2 - cos(2 pi y1))`, a positive coefficient with harmonic mean 1/2.
    pub fn inv_cos(dim: usize) -> Self {
        Self::analytic("invcos", dim, DEFAULT_RESOLUTION, |y| {
            T::one() / (T::lit(2.0) - (T::TAU() * y[0]).cos())
        })
        .expect("valid dimension")
    }

    /// Parses `constant:<c>`, `<name>[:<amp>[:<shift>]]` for
    /// `cos1d | cos2d | bump | invcos`, or `csv:<path>`. A leading `builtin:` is ignored.
    pub fn from_spec(spec: &str, dim: usize) -> Result<Self> {
        let spec = spec.trim();
        let spec = spec.strip_prefix("builtin:").unwrap_or(spec);
        if let Some(path) = spec.strip_prefix("csv:") {
            return Self::read_csv(path, Interpolation::Trigonometric);
        }
        let mut parts = spec.split(':');
        let name = parts.next().unwrap_or("");
        let nums: Vec<f64> = parts
            .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number in `{spec}`"))))
            .collect::<Result<_>>()?;
        if name == "constant" {
            let c = *nums.first().ok_or_else(|| Error::Parse("constant:<c> needs a value".into()))?;
            return Ok(Self::constant(dim, T::lit(c)));
        }
        let base = match name {
            "cos1d" => Self::cos1d(dim),
            "cos2d" if dim == 2 => Self::cos2d(),
            "cos2d" => return Err(Error::invalid("cos2d requires dim = 2")),
            "bump" => Self::bump(dim),
            "invcos" => Self::inv_cos(dim),
            other => return Err(Error::Parse(format!("unknown potential `{other}`"))),
        };
        let amp = nums.first().copied().unwrap_or(1.0);
        let shift = nums.get(1).copied().unwrap_or(0.0);
        let mut field = base.affine(T::lit(amp), T::lit(shift));
        if !nums.is_empty() {
            field.name = spec.to_string();
        }
        Ok(field)
    }

    /// `scale * V + shift`.
    pub fn affine(&self, scale: T, shift: T) -> Self {
        let mut out = self.clone();
        out.samples = self.samples.iter().map(|&v| scale * v + shift).collect();
        out.scale = scale * self.scale;
        out.shift = scale * self.shift + shift;
        if let Some(tc) = &self.trig {
            out.trig = Some(tc.affine(scale.to_f64_lossy(), shift.to_f64_lossy()));
        }
        out.name = format!("{}*{}+{}", scale, self.name, shift);
        out
    }

    /// Same field translated: `y -> V(y + s)`.
    pub fn translated(&self, s: &[T]) -> Self {
        let base = self.clone();
        let s: Vec<T> = s.to_vec();
        let dim = self.dim;
        let mut out = Self::analytic(&format!("{}(+shift)", self.name), dim, self.res, move |y| {
            let mut z = [T::zero(); 2];
            for i in 0..dim {
                z[i] = y[i] + s[i];
            }
            base.eval(&z[..dim])
        })
        .expect("valid dimension");
        out.interpolation = self.interpolation;
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.res
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn is_analytic(&self) -> bool {
        self.analytic.is_some()
    }

    /// Evaluates at `y`, wrapping every coordinate into `[0, 1)`.
    pub fn eval(&self, y: &[T]) -> T {
        let mut w = [T::zero(); 2];
        for i in 0..self.dim {
            w[i] = wrap_unit(y[i]);
        }
        let w = &w[..self.dim];
        if let Some(f) = &self.analytic {
            return self.scale * f(w) + self.shift;
        }
        match self.interpolation {
            Interpolation::Multilinear => self.multilinear(w),
            Interpolation::Trigonometric => {
                let wf: Vec<f64> = w.iter().map(|v| v.to_f64_lossy()).collect();
                T::lit(self.trig.as_ref().expect("trig coefficients").eval(&wf))
            }
        }
    }

    fn multilinear(&self, w: &[T]) -> T {
        let n = self.res;
        let nf = T::lit(n as f64);
        let mut base = [0usize; 2];
        let mut frac = [T::zero(); 2];
        for i in 0..self.dim {
            let s = w[i] * nf;
            let fl = s.floor();
            base[i] = fl.to_usize().unwrap_or(0) % n;
            frac[i] = s - fl;
        }
        if self.dim == 1 {
            let a = self.samples[base[0]];
            let b = self.samples[(base[0] + 1) % n];
            a + (b - a) * frac[0]
        } else {
            let idx = |i: usize, j: usize| self.samples[(i % n) * n + (j % n)];
            let (i, j) = (base[0], base[1]);
            let (fx, fy) = (frac[0], frac[1]);
            let v00 = idx(i, j);
            let v10 = idx(i + 1, j);
            let v01 = idx(i, j + 1);
            let v11 = idx(i + 1, j + 1);
            let one = T::one();
            v00 * (one - fx) * (one - fy) + v10 * fx * (one - fy) + v01 * (one - fx) * fy + v11 * fx * fy
        }
    }

    pub fn max_sample(&self) -> T {
        self.samples.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn min_sample(&self) -> T {
        self.samples.iter().copied().fold(T::infinity(), T::min)
    }

    /// `max V - min V` over the samples.
    pub fn oscillation(&self) -> T {
        self.max_sample() - self.min_sample()
    }

    pub fn max_abs(&self) -> T {
        self.samples.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Grid argmin; ties go to the lexicographically smallest grid index.
    pub fn argmin(&self) -> Vec<T> {
        let mut best = 0;
        for (k, v) in self.samples.iter().enumerate() {
            if *v < self.samples[best] {
                best = k;
            }
        }
        self.grid_point(best)
    }

    pub fn grid_point(&self, flat: usize) -> Vec<T> {
        let n = self.res;
        let h = T::one() / T::lit(n as f64);
        if self.dim == 1 {
            vec![T::lit(flat as f64) * h]
        } else {
            vec![T::lit((flat / n) as f64) * h, T::lit((flat % n) as f64) * h]
        }
    }

    /// Samples the field on the nodes `j / n` of an `n^dim` grid, row-major.
    pub fn sample_grid(&self, n: usize) -> Vec<T> {
        grid_points::<T>(self.dim, n).map(|y| self.eval(&y[..self.dim])).collect()
    }

    pub fn read_csv(path: impl AsRef<Path>, interpolation: Interpolation) -> Result<Self> {
        let path = path.as_ref();
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut records = rdr.records();
        let head = records
            .next()
            .ok_or_else(|| Error::Parse(format!("{}: missing dim,resolution row", path.display())))??;
        let parse = |s: &str| s.parse::<f64>().map_err(|_| Error::Parse(format!("bad value `{s}`")));
        let dim = parse(head.get(0).unwrap_or(""))? as usize;
        let res = parse(head.get(1).unwrap_or(""))? as usize;
        let mut samples = Vec::new();
        for rec in records {
            for field in rec?.iter().filter(|f| !f.is_empty()) {
                samples.push(T::lit(parse(field)?));
            }
        }
        let name = format!("csv:{}", path.display());
        Self::from_samples(&name, dim, res, samples, interpolation)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::WriterBuilder::new().flexible(true).from_path(path)?;
        w.write_record(["dim", "resolution"])?;
        w.write_record([self.dim.to_string(), self.res.to_string()])?;
        let row_len = if self.dim == 1 { 1 } else { self.res };
        for row in self.samples.chunks(row_len) {
            w.write_record(row.iter().map(|v| format!("{:e}", v.to_f64_lossy())))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Result of shifting a potential so its maximum is zero.
#[derive(Clone, Debug)]
pub struct NormalizedPotential<T: Real> {
    pub field: PotentialField<T>,
    /// The constant that was subtracted (the original maximum).
    pub subtracted: T,
}

/// Returns `V - max V`.
pub fn normalize_potential<T: Real>(v: &PotentialField<T>) -> NormalizedPotential<T> {
    let m = v.max_sample();
    let mut field = v.affine(T::one(), -m);
    field.name = format!("{}-max", v.name);
    NormalizedPotential { field, subtracted: m }
}

#[inline]
pub(crate) fn wrap_unit<T: Real>(x: T) -> T {
    let w = x - x.floor();
    // x - floor(x) can round up to 1 for tiny negative x.
    if w >= T::one() {
        T::zero()
    } else {
        w
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(Error::invalid(format!("dimension {dim} not supported (1 or 2)")))
    }
}

/// Row-major iterator over grid nodes `j / n`; unused trailing coordinates are zero.
pub(crate) fn grid_points<T: Real>(dim: usize, n: usize) -> impl Iterator<Item = [T; 2]> {
    let total = n.pow(dim as u32);
    let h = 1.0 / n as f64;
    (0..total).map(move |k| {
        if dim == 1 {
            [T::lit(k as f64 * h), T::zero()]
        } else {
            [T::lit((k / n) as f64 * h), T::lit((k % n) as f64 * h)]
        }
    })
}

/// Discrete Fourier coefficients of a sampled periodic field, evaluated as the
/// band-limited trigonometric interpolant.
#[derive(Clone, Debug)]
struct TrigCoefficients {
    dim: usize,
    res: usize,
    // Coefficients c[k1][k2] for signed frequencies, stored with offset res/2.
    re: Vec<f64>,
    im: Vec<f64>,
    freqs: Vec<i64>,
}

impl TrigCoefficients {
    fn new(dim: usize, res: usize, samples: &[f64]) -> Self {
        let freqs = signed_frequencies(res);
        let nf = freqs.len();
        let tau = std::f64::consts::TAU;
        let weight = |k: i64| if res % 2 == 0 && k.unsigned_abs() as usize * 2 == res { 0.5 } else { 1.0 };
        if dim == 1 {
            let mut re = vec![0.0; nf];
            let mut im = vec![0.0; nf];
            for (a, &k) in freqs.iter().enumerate() {
                for (j, &v) in samples.iter().enumerate() {
                    let ang = -tau * (k * j as i64) as f64 / res as f64;
                    re[a] += v * ang.cos();
                    im[a] += v * ang.sin();
                }
                re[a] *= weight(k) / res as f64;
                im[a] *= weight(k) / res as f64;
            }
            Self { dim, res, re, im, freqs }
        } else {
            // Separable transform: rows first, then columns.
            let mut row_re = vec![0.0; res * nf];
            let mut row_im = vec![0.0; res * nf];
            for i in 0..res {
                for (b, &k2) in freqs.iter().enumerate() {
                    let (mut sr, mut si) = (0.0, 0.0);
                    for j in 0..res {
                        let ang = -tau * (k2 * j as i64) as f64 / res as f64;
                        let v = samples[i * res + j];
                        sr += v * ang.cos();
                        si += v * ang.sin();
                    }
                    row_re[i * nf + b] = sr * weight(k2) / res as f64;
                    row_im[i * nf + b] = si * weight(k2) / res as f64;
                }
            }
            let mut re = vec![0.0; nf * nf];
            let mut im = vec![0.0; nf * nf];
            for (a, &k1) in freqs.iter().enumerate() {
                for b in 0..nf {
                    let (mut sr, mut si) = (0.0, 0.0);
                    for i in 0..res {
                        let ang = -tau * (k1 * i as i64) as f64 / res as f64;
                        let (c, s) = (ang.cos(), ang.sin());
                        let (xr, xi) = (row_re[i * nf + b], row_im[i * nf + b]);
                        sr += xr * c - xi * s;
                        si += xr * s + xi * c;
                    }
                    re[a * nf + b] = sr * weight(k1) / res as f64;
                    im[a * nf + b] = si * weight(k1) / res as f64;
                }
            }
            Self { dim, res, re, im, freqs }
        }
    }

    fn affine(&self, scale: f64, shift: f64) -> Self {
        let mut out = self.clone();
        for v in out.re.iter_mut().chain(out.im.iter_mut()) {
            *v *= scale;
        }
        let zero = self.freqs.iter().position(|&k| k == 0).unwrap();
        let z = if self.dim == 1 { zero } else { zero * self.freqs.len() + zero };
        out.re[z] += shift;
        out
    }

    fn eval(&self, y: &[f64]) -> f64 {
        let tau = std::f64::consts::TAU;
        let nf = self.freqs.len();
        if self.dim == 1 {
            self.freqs
                .iter()
                .enumerate()
                .map(|(a, &k)| {
                    let ang = tau * k as f64 * y[0];
                    self.re[a] * ang.cos() - self.im[a] * ang.sin()
                })
                .sum()
        } else {
            let mut total = 0.0;
            for (a, &k1) in self.freqs.iter().enumerate() {
                for (b, &k2) in self.freqs.iter().enumerate() {
                    let ang = tau * (k1 as f64 * y[0] + k2 as f64 * y[1]);
                    total += self.re[a * nf + b] * ang.cos() - self.im[a * nf + b] * ang.sin();
                }
            }
            let _ = self.res;
            total
        }
    }
}

/// Frequencies `-n/2 ..= n/2` (both Nyquist copies appear for even `n`, each at half weight).
fn signed_frequencies(n: usize) -> Vec<i64> {
    let half = (n / 2) as i64;
    (-half..=half).collect()
}
