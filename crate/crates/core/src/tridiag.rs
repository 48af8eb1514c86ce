//! Thomas algorithm.

use crate::error::{Error, Result};

/// Solves `lower[i] x[i−1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
/// `lower[0]` and `upper[n−1]` are ignored.
pub fn solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut piv = diag[0];
    if piv == 0.0 || !piv.is_finite() {
        return Err(Error::Singular(0));
    }
    c[0] = upper[0] / piv;
    d[0] = rhs[0] / piv;
    for i in 1..n {
        piv = diag[i] - lower[i] * c[i - 1];
        if piv == 0.0 || !piv.is_finite() {
            return Err(Error::Singular(i));
        }
        c[i] = if i + 1 < n { upper[i] / piv } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / piv;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_system() {
        // [2 1 0; 1 3 1; 0 1 2] x = [3, 5, 3] has x = [1, 1, 1]
        let x = solve(&[0.0, 1.0, 1.0], &[2.0, 3.0, 2.0], &[1.0, 1.0, 0.0], &[3.0, 5.0, 3.0]).unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn singular_detected() {
        assert!(matches!(solve(&[0.0, 1.0], &[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]), Err(Error::Singular(0))));
    }

    proptest! {
        #[test]
        fn diagonally_dominant_residual(
            vals in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 2..60)
        ) {
            let n = vals.len();
            let lower: Vec<f64> = vals.iter().map(|v| v.0).collect();
            let upper: Vec<f64> = vals.iter().map(|v| v.1).collect();
            let diag: Vec<f64> = (0..n).map(|i| 2.5 + lower[i].abs() + upper[i].abs()).collect();
            let rhs: Vec<f64> = vals.iter().map(|v| v.2).collect();
            let x = solve(&lower, &diag, &upper, &rhs).unwrap();
            for i in 0..n {
                let mut r = diag[i] * x[i] - rhs[i];
                if i > 0 { r += lower[i] * x[i - 1]; }
                if i + 1 < n { r += upper[i] * x[i + 1]; }
                prop_assert!(r.abs() < 1e-12);
            }
        }
    }
}
