//! Radial quadrature shared by every norm in the crate.
//!
//! Integrands are taken piecewise linear between nodes and the power
//! `r^e` is integrated exactly on each cell, so integrable singular
//! weights at the origin need no special treatment.

use crate::error::{Error, Result};

/// Surface area `ω_{n−1} = 2π^{n/2}/Γ(n/2)` of the unit sphere in `ℝⁿ`.
pub fn sphere_area(n: u32) -> f64 {
    use std::f64::consts::PI;
    let (mut k, mut area) = if n % 2 == 1 { (1, 2.0) } else { (2, 2.0 * PI) };
    while k < n {
        area *= 2.0 * PI / f64::from(k);
        k += 2;
    }
    area
}

/// Weights `(c0, c1)` with `∫_{a}^{b} (q0 (b−r) + q1 (r−a))/(b−a) r^e dr = c0 q0 + c1 q1`.
fn cell_weights(a: f64, b: f64, e: f64) -> (f64, f64) {
    let h = b - a;
    let m1 = (b.powf(e + 1.0) - a.powf(e + 1.0)) / (e + 1.0);
    let m2 = (b.powf(e + 2.0) - a.powf(e + 2.0)) / (e + 2.0);
    let c1 = (m2 - a * m1) / h;
    (m1 - c1, c1)
}

/// `∫ q(r) r^e dr` over the grid with `q` linear per cell; `e > −1`.
pub fn radial_integral(grid: &[f64], q: &[f64], e: f64) -> f64 {
    let mut sum = 0.0;
    for i in 0..grid.len().saturating_sub(1) {
        let (c0, c1) = cell_weights(grid[i], grid[i + 1], e);
        sum += c0 * q[i] + c1 * q[i + 1];
    }
    sum
}

/// `∫ |d(r)| r^e dr` with `d` linear per cell; sign changes inside a cell
/// are split at the root.
pub fn radial_abs_integral(grid: &[f64], d: &[f64], e: f64) -> f64 {
    let mut sum = 0.0;
    for i in 0..grid.len().saturating_sub(1) {
        let (a, b) = (grid[i], grid[i + 1]);
        let (d0, d1) = (d[i], d[i + 1]);
        if d0 * d1 >= 0.0 {
            let (c0, c1) = cell_weights(a, b, e);
            sum += c0 * d0.abs() + c1 * d1.abs();
        } else {
            let rz = a + (b - a) * d0 / (d0 - d1);
            let (c0, _) = cell_weights(a, rz, e);
            let (_, c1) = cell_weights(rz, b, e);
            sum += c0 * d0.abs() + c1 * d1.abs();
        }
    }
    sum
}

/// Cumulative version of [`radial_abs_integral`]: entry `i` covers `[grid[0], grid[i]]`.
pub fn cumulative_abs_integral(grid: &[f64], d: &[f64], e: f64) -> Vec<f64> {
    let mut out = vec![0.0; grid.len()];
    for i in 0..grid.len().saturating_sub(1) {
        out[i + 1] = out[i] + radial_abs_integral(&grid[i..i + 2], &d[i..i + 2], e);
    }
    out
}

fn check(grid: &[f64], a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != grid.len() || b.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "grid has {} nodes, fields have {} and {}",
            grid.len(),
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// `ω_{n−1} ∫ |a − b| r^{n−1} dr`.
pub fn l1_distance(grid: &[f64], a: &[f64], b: &[f64], n: u32) -> Result<f64> {
    check(grid, a, b)?;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    Ok(sphere_area(n) * radial_abs_integral(grid, &d, f64::from(n) - 1.0))
}

/// Exponent and multiplier turning `𝒞^{p₀} r^{n−1}` into `mult · r^e`.
pub fn weight_power(n: u32, m: f64, c_star: f64, p0: f64) -> (f64, f64) {
    let e = f64::from(n) - 1.0 - 2.0 * p0 / (1.0 - m);
    (e, c_star.powf(p0 / (1.0 - m)))
}

/// `ω_{n−1} ∫ |a − b| 𝒞^{p₀} r^{n−1} dr`.
pub fn weighted_l1(grid: &[f64], a: &[f64], b: &[f64], n: u32, m: f64, c_star: f64, p0: f64) -> Result<f64> {
    check(grid, a, b)?;
    let (e, mult) = weight_power(n, m, c_star, p0);
    if !(e > -1.0) {
        return Err(Error::Domain(format!("weight exponent {p0} is not integrable at the origin")));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    Ok(sphere_area(n) * mult * radial_abs_integral(grid, &d, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn linear_integrands_are_exact() {
        let grid = [0.0, 0.3, 1.0, 2.5];
        let q: Vec<f64> = grid.iter().map(|r| 1.0 + 2.0 * r).collect();
        // ∫_0^{2.5} (1 + 2r) r^{-0.5} dr = 2√2.5 + (4/3) 2.5^{1.5}
        let want = 2.0 * 2.5f64.sqrt() + 4.0 / 3.0 * 2.5f64.powf(1.5);
        assert!((radial_integral(&grid, &q, -0.5) - want).abs() < 1e-13);
    }

    #[test]
    fn abs_splits_at_root() {
        let grid = [0.0, 2.0];
        let d = [-1.0, 1.0];
        // |r − 1| r^2 on [0, 2]: 1/12 + 17/12
        assert!((radial_abs_integral(&grid, &d, 2.0) - 1.5).abs() < 1e-14);
        let c = cumulative_abs_integral(&[0.0, 1.0, 2.0], &[-1.0, 0.0, 1.0], 2.0);
        assert!((c[2] - 1.5).abs() < 1e-14);
    }

    #[test]
    fn distances() {
        let grid = [0.0, 0.5, 1.0];
        let a = [1.0, 2.0, 3.0];
        assert_eq!(l1_distance(&grid, &a, &a, 3).unwrap(), 0.0);
        let b = [0.0, 0.0, 0.0];
        let a2: Vec<f64> = a.iter().map(|x| 2.0 * x).collect();
        let d1 = weighted_l1(&grid, &a, &b, 3, 0.2, 0.2, 0.05).unwrap();
        let d2 = weighted_l1(&grid, &a2, &b, 3, 0.2, 0.2, 0.05).unwrap();
        assert!((d2 - 2.0 * d1).abs() < 1e-14 * d2);
        assert!(matches!(l1_distance(&grid, &a[..2], &b, 3), Err(Error::GridMismatch(_))));
    }
}
