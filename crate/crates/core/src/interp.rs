//! Cubic Hermite pieces with a monotonicity guard.

/// Index `i` with `xs[i] ≤ x ≤ xs[i+1]`; `xs` increasing with at least two entries.
pub fn locate(xs: &[f64], x: f64) -> usize {
    let n = xs.len();
    debug_assert!(n >= 2);
    match xs.binary_search_by(|v| v.partial_cmp(&x).unwrap_or(std::cmp::Ordering::Less)) {
        Ok(i) => i.min(n - 2),
        Err(i) => i.saturating_sub(1).min(n - 2),
    }
}

/// Fritsch–Carlson limiter: shrinks the end slopes of a cell so the cubic
/// stays monotone when the data are.
pub fn limit_slopes(secant: f64, d0: f64, d1: f64) -> (f64, f64) {
    if secant == 0.0 {
        return (0.0, 0.0);
    }
    let (mut d0, mut d1) = (d0, d1);
    if d0 * secant < 0.0 {
        d0 = 0.0;
    }
    if d1 * secant < 0.0 {
        d1 = 0.0;
    }
    let a = d0 / secant;
    let b = d1 / secant;
    let q = a * a + b * b;
    if q > 9.0 {
        let t = 3.0 / q.sqrt();
        d0 = t * a * secant;
        d1 = t * b * secant;
    }
    (d0, d1)
}

/// Value of the cubic Hermite interpolant on `[x0, x1]`.
pub fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

/// Monotone cubic Hermite value using the supplied nodal slopes.
pub fn monotone_hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let secant = (y1 - y0) / (x1 - x0);
    let (d0, d1) = limit_slopes(secant, d0, d1);
    hermite(x0, x1, y0, y1, d0, d1, x)
}

/// Piecewise-linear interpolation on an increasing grid, clamped at the ends.
pub fn linear(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    let i = locate(xs, x);
    let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + t * (ys[i + 1] - ys[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn locate_brackets() {
        let xs = [0.0, 1.0, 2.0, 4.0];
        assert_eq!(locate(&xs, 0.0), 0);
        assert_eq!(locate(&xs, 0.5), 0);
        assert_eq!(locate(&xs, 1.0), 1);
        assert_eq!(locate(&xs, 3.0), 2);
        assert_eq!(locate(&xs, 4.0), 2);
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let f = |x: f64| x * x * x - 2.0 * x + 1.0;
        let df = |x: f64| 3.0 * x * x - 2.0;
        for &x in &[0.5, 0.7, 1.3] {
            let v = hermite(0.5, 1.5, f(0.5), f(1.5), df(0.5), df(1.5), x);
            assert!((v - f(x)).abs() < 1e-14);
        }
    }

    #[test]
    fn limiter_keeps_monotone() {
        let (d0, d1) = limit_slopes(1.0, 10.0, 10.0);
        for k in 0..=100 {
            let x = k as f64 / 100.0;
            let x2 = (k + 1) as f64 / 100.0;
            assert!(hermite(0.0, 1.0, 0.0, 1.0, d0, d1, x2) >= hermite(0.0, 1.0, 0.0, 1.0, d0, d1, x) - 1e-15);
        }
    }

    #[test]
    fn linear_clamps() {
        let xs = [0.0, 1.0];
        let ys = [2.0, 4.0];
        assert_eq!(linear(&xs, &ys, -1.0), 2.0);
        assert_eq!(linear(&xs, &ys, 0.25), 2.5);
        assert_eq!(linear(&xs, &ys, 5.0), 4.0);
    }
}
