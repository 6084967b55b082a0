//! Small derivative-free maximizers used by the conjugate transforms.

use crate::scalar::Real;

/// Golden-section search for the maximum of a unimodal function on `[a, b]`.
///
/// Returns the best abscissa seen and its value.
pub fn golden_max<T: Real, F: FnMut(T) -> T>(mut f: F, mut a: T, mut b: T, tol: T) -> (T, T) {
    let inv_phi = T::lit(0.618_033_988_749_894_9);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let (fa, fb) = (f(a), f(b));
    let mut best = if fa >= fb { (a, fa) } else { (b, fb) };
    let mut iter = 0;
    while (b - a).abs() > tol && iter < 200 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        iter += 1;
    }
    for (x, v) in [(c, fc), (d, fd)] {
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

/// Maximizes a function of two variables over a box by nested golden-section searches.
///
/// Exact for jointly concave functions (partial maximization preserves concavity, so the
/// outer profile is unimodal), and a local polish otherwise.
pub fn nested_golden_max<T: Real, F: FnMut(T, T) -> T>(
    mut f: F,
    lo: [T; 2],
    hi: [T; 2],
    tol: T,
) -> ([T; 2], T) {
    let mut best = ([lo[0], lo[1]], T::neg_infinity());
    let mut profile = |x: T| {
        let (y, v) = golden_max(|y| f(x, y), lo[1], hi[1], tol);
        if v > best.1 {
            best = ([x, y], v);
        }
        v
    };
    golden_max(&mut profile, lo[0], hi[0], tol);
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, v) = golden_max(|x: f64| -(x - 0.3) * (x - 0.3) + 2.0, -1.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn golden_handles_kinked_concave() {
        let (x, v) = golden_max(|x: f64| -(x - 0.25).abs(), -2.0, 2.0, 1e-12);
        assert!((x - 0.25).abs() < 1e-9);
        assert!(v.abs() < 1e-9);
    }

    #[test]
    fn nested_golden_on_polyhedral_concave() {
        let f = |x: f64, y: f64| -(x - 0.1).abs() - (x + y - 0.5).abs() - 0.5 * (y - 0.4).abs();
        let (p, v) = nested_golden_max(f, [-1.0, -1.0], [1.0, 1.0], 1e-12);
        assert!(v > -1e-8, "value {v} at {p:?}");
    }
}
