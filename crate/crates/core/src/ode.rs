//! Dormand–Prince 5(4) with adaptive steps that land exactly on requested
//! output abscissae.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rtol: 1e-10, atol: 1e-13 }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth-order weights minus the embedded fourth-order ones.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const MAX_STEPS: usize = 2_000_000;

fn combo<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrates `y' = rhs(t, y)` from `(t0, y0)` and returns the state at each
/// of the increasing `outputs` (all must be `≥ t0`).
///
/// `rhs` returns `None` when the trial state is outside the domain of the
/// equation; the step is then rejected and retried with a smaller size.
pub fn integrate<const N: usize, F>(
    mut rhs: F,
    t0: f64,
    y0: [f64; N],
    outputs: &[f64],
    tol: Tolerances,
    h_init: f64,
) -> Result<Vec<[f64; N]>>
where
    F: FnMut(f64, &[f64; N]) -> Option<[f64; N]>,
{
    let mut out = Vec::with_capacity(outputs.len());
    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y)
        .ok_or_else(|| Error::IntegrationFailure { r: t, reason: "initial state outside the domain".into() })?;
    let mut h = h_init.abs().max(f64::MIN_POSITIVE);
    let mut steps = 0usize;

    for &target in outputs {
        if target < t {
            return Err(Error::IntegrationFailure { r: target, reason: "output abscissae must be increasing".into() });
        }
        while t < target {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::IntegrationFailure { r: t, reason: "step budget exhausted".into() });
            }
            let h_min = 1e-14 * t.abs().max(1e-300);
            let mut last = false;
            let mut hs = h;
            if t + hs >= target || target - (t + hs) < 1e-3 * hs {
                hs = target - t;
                last = true;
            }

            let trial = (|| {
                let k2 = rhs(t + C2 * hs, &combo(&y, hs, &[(A21, &k1)]))?;
                let k3 = rhs(t + C3 * hs, &combo(&y, hs, &[(A31, &k1), (A32, &k2)]))?;
                let k4 = rhs(t + C4 * hs, &combo(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
                let k5 = rhs(t + C5 * hs, &combo(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
                let k6 = rhs(t + hs, &combo(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]))?;
                let y_new = combo(&y, hs, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
                let t_new = if last { target } else { t + hs };
                let k7 = rhs(t_new, &y_new)?;
                let mut err = 0.0;
                for i in 0..N {
                    let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                    let sc = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
                    err += (e / sc) * (e / sc);
                }
                Some(((err / N as f64).sqrt(), y_new, k7, t_new))
            })();

            match trial {
                Some((err, y_new, k7, t_new)) if err <= 1.0 && err.is_finite() => {
                    t = t_new;
                    y = y_new;
                    k1 = k7;
                    let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                    // A step shortened to hit an output node says little about the natural size.
                    h = if last { h.max(hs * fac) } else { hs * fac };
                }
                Some((err, ..)) if err.is_finite() => {
                    h = hs * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                }
                _ => {
                    h = hs * 0.25;
                }
            }
            if h < h_min {
                return Err(Error::IntegrationFailure { r: t, reason: "step size underflow".into() });
            }
        }
        out.push(y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let outs: Vec<f64> = (1..=10).map(|k| k as f64).collect();
        let ys = integrate(|_, y: &[f64; 1]| Some([-y[0]]), 0.0, [1.0], &outs, Tolerances::default(), 0.1).unwrap();
        for (t, y) in outs.iter().zip(&ys) {
            assert!((y[0] - (-t).exp()).abs() < 1e-11);
        }
    }

    #[test]
    fn harmonic_oscillator_lands_on_nodes() {
        let outs = [0.3, 0.30001, 1.0, 6.0];
        let ys = integrate(
            |_, y: &[f64; 2]| Some([y[1], -y[0]]),
            0.0,
            [0.0, 1.0],
            &outs,
            Tolerances { rtol: 1e-12, atol: 1e-14 },
            0.01,
        )
        .unwrap();
        for (t, y) in outs.iter().zip(&ys) {
            assert!((y[0] - t.sin()).abs() < 1e-10, "{t}");
            assert!((y[1] - t.cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn domain_rejection_shrinks_step() {
        // y' = -1/(2y) has y = sqrt(1 - t); rhs refuses y <= 0.
        let ys = integrate(
            |_, y: &[f64; 1]| (y[0] > 0.0).then(|| [-0.5 / y[0]]),
            0.0,
            [1.0],
            &[0.99],
            Tolerances::default(),
            0.5,
        )
        .unwrap();
        // Global error grows like 1/y near the square-root singularity.
        assert!((ys[0][0] - 0.1).abs() < 1e-6, "{}", ys[0][0]);
    }

    #[test]
    fn decreasing_outputs_rejected() {
        let r = integrate(|_, y: &[f64; 1]| Some([y[0]]), 0.0, [1.0], &[1.0, 0.5], Tolerances::default(), 0.1);
        assert!(r.is_err());
    }
}
