//! Second-order behaviour of profiles at infinity.
//!
//! In `s = ln r` the normalised profile `g = 1 + w` tends to one and
//! `w ≈ ∓ m B_λ e^{−γ s}`. The trace keeps `w`, `Φ = φ(w)` and the
//! forcing `h` of the linearised equation, so both the fitted coefficient
//! and the integral identities satisfied by `w` can be checked on the same
//! data.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::profile::{phi, phi_prime, Profile};
use crate::regimes::{ParamSet, Regime, Sign};

/// Lower and upper `|w|` bounds of the fit window.
pub const W_LO: f64 = 1e-8;
pub const W_HI: f64 = 1e-3;

/// Smallest `r_max` accepted by [`to_log_trace`].
pub const MIN_TRACE_RADIUS: f64 = 1e3;

#[derive(Debug, Clone)]
pub struct WTrace {
    pub s: Vec<f64>,
    pub g: Vec<f64>,
    pub w: Vec<f64>,
    pub phi: Vec<f64>,
    pub h: Vec<f64>,
    pub wprime: Vec<f64>,
    /// `dΦ/ds = φ'(w) w'`.
    pub phi_prime: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticFit {
    pub gamma_used: f64,
    pub b_lambda: f64,
    pub window: [f64; 2],
    pub residual: f64,
    /// Fitted slope of `ln|w|` against `s`.
    pub slope: f64,
    pub i1: Option<f64>,
    pub i2: Option<f64>,
}

/// Extrapolated `e^{γs} w` against the value predicted by the integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    pub extrapolated: f64,
    pub predicted: f64,
    pub gap: f64,
}

impl WTrace {
    /// Builds a trace from `w` and `w'` sampled on an increasing `s` grid.
    pub fn from_w(p: &ParamSet, s: Vec<f64>, w: Vec<f64>, wprime: Vec<f64>) -> Result<WTrace> {
        if s.len() != w.len() || s.len() != wprime.len() || s.len() < 2 {
            return Err(Error::GridMismatch("s, w and wprime must have equal length >= 2".into()));
        }
        let m = p.m;
        let g: Vec<f64> = w.iter().map(|x| 1.0 + x).collect();
        let phis: Vec<f64> = w.iter().map(|&x| phi(x, m)).collect();
        let dphi: Vec<f64> = w.iter().zip(&wprime).map(|(&x, &d)| phi_prime(x, m) * d).collect();
        let h = phis.iter().zip(&dphi).map(|(f, d)| -p.c_star * (p.beta * d + f / (1.0 - m))).collect();
        Ok(WTrace { s, g, w, phi: phis, h, wprime, phi_prime: dphi })
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// Writes columns `s, g, w, phi, h`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let rows = (0..self.len())
            .map(|i| vec![Some(self.s[i]), Some(self.g[i]), Some(self.w[i]), Some(self.phi[i]), Some(self.h[i])]);
        io::write_csv(path, &["s", "g", "w", "phi", "h"], rows)
    }
}

/// Log-variable trace of a solved profile (all nodes with `r > 0`).
pub fn to_log_trace(prof: &Profile) -> Result<WTrace> {
    if prof.r_max() < MIN_TRACE_RADIUS * (1.0 - 1e-12) {
        return Err(Error::InsufficientRange(format!(
            "profile resolved only to r = {}, need at least {MIN_TRACE_RADIUS}",
            prof.r_max()
        )));
    }
    let start = prof.grid.iter().position(|&r| r > 0.0).unwrap_or(prof.grid.len());
    let s = prof.grid[start..].iter().map(|r| r.ln()).collect();
    WTrace::from_w(&prof.params, s, prof.w[start..].to_vec(), prof.wprime[start..].to_vec())
}

/// Index range of the tail where `W_LO < |w| < W_HI`.
pub fn fit_window(tr: &WTrace) -> Result<std::ops::Range<usize>> {
    let n = tr.len();
    let lo = match tr.w.iter().rposition(|x| x.abs() >= W_HI) {
        Some(i) => i + 1,
        None => 0,
    };
    let mut hi = lo;
    while hi < n && tr.w[hi].abs() > W_LO {
        hi += 1;
    }
    if hi - lo < 8 {
        return Err(Error::InsufficientRange(format!("only {} nodes with {W_LO} < |w| < {W_HI} in the tail", hi - lo)));
    }
    Ok(lo..hi)
}

/// Least-squares line `y = a + b x`; returns `(a, b)`.
fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - b * mx, b)
}

/// Exponent `q` of the leading relative correction `|w|^q` to `e^{γs}w`.
fn correction_power(p: &ParamSet) -> f64 {
    match (p.gamma_1, p.gamma_2) {
        (Some(g1), Some(g2)) if p.regime.is_c1() || p.regime.is_c2() => ((g2 - g1) / g1).min(1.0),
        _ => 1.0,
    }
}

/// Extrapolates `e^{γs} w` to `|w| → 0` over `range`; returns the limit
/// and the worst relative deviation from the fitted correction law.
fn extrapolate(tr: &WTrace, range: std::ops::Range<usize>, gamma: f64, q: f64) -> (f64, f64) {
    let x: Vec<f64> = tr.w[range.clone()].iter().map(|w| w.abs().powf(q)).collect();
    let y: Vec<f64> = range.clone().map(|i| tr.w[i] * (gamma * tr.s[i]).exp()).collect();
    let (a, b) = line_fit(&x, &y);
    let worst = x.iter().zip(&y).map(|(xi, yi)| (yi - (a + b * xi)).abs() / a.abs()).fold(0.0, f64::max);
    (a, worst)
}

/// Fits `w ≈ ∓ m B_λ e^{−γ s}` on the tail window.
pub fn fit_second_order(tr: &WTrace, p: &ParamSet, reg: Regime) -> Result<AsymptoticFit> {
    let gamma = p.decay_gamma()?;
    let expected = match reg.sign_a1 {
        Some(Sign::Positive) | Some(Sign::Zero) => -1.0,
        Some(Sign::Negative) => 1.0,
        None => return Err(Error::UnsupportedRegime(format!("{}", reg.label))),
    };
    let win = fit_window(tr)?;
    if let Some(i) = win.clone().find(|&i| tr.w[i] * expected <= 0.0) {
        return Err(Error::SignMismatch(format!("w = {} at s = {} in regime {}", tr.w[i], tr.s[i], reg.label)));
    }
    let xs: Vec<f64> = tr.s[win.clone()].to_vec();
    let ys: Vec<f64> = tr.w[win.clone()].iter().map(|w| w.abs().ln()).collect();
    let (_, slope) = line_fit(&xs, &ys);
    if (slope + gamma).abs() > 0.05 * gamma {
        return Err(Error::SlopeMismatch { fitted: -slope, expected: gamma });
    }
    let (lim, residual) = extrapolate(tr, win.clone(), gamma, correction_power(p));
    let b_lambda = lim.abs() / p.m;
    let (i1, i2) = full_integrals(tr, p)?;
    Ok(AsymptoticFit {
        gamma_used: gamma,
        b_lambda,
        window: [tr.s[win.start], tr.s[win.end - 1]],
        residual,
        slope,
        i1,
        i2,
    })
}

/// `e^{−γ s0} ∫_{−∞}^{s0} e^{γt} Φ(t) dt` assuming `g = g0 e^{κ(t−s0)}` below `s0`,
/// which is the behaviour of any profile near the origin.
fn head_integral(g0: f64, gamma: f64, m: f64) -> f64 {
    let kappa = 2.0 * m / (1.0 - m);
    (1.0 / m - 1.0) / gamma - g0 / (m * (gamma + kappa)) + g0.powf(1.0 / m) / (gamma + kappa / m)
}

/// `K(s) = e^{−γ s} ∫_{−∞}^s e^{γt} Φ(t) dt` at every trace node.
pub fn decayed_integral(tr: &WTrace, gamma: f64, m: f64) -> Result<Vec<f64>> {
    let n = tr.len();
    let g0 = tr.g[0];
    let mut k = vec![0.0; n];
    if g0 < 0.1 {
        k[0] = head_integral(g0, gamma, m);
    } else {
        let sup = tr.phi.iter().cloned().fold(0.0, f64::max);
        if (gamma * tr.s[0]).exp() * sup >= 1e-10 {
            return Err(Error::InsufficientRange(format!(
                "trace starts at s = {} where neither the near-origin form nor truncation applies",
                tr.s[0]
            )));
        }
    }
    for j in 0..n - 1 {
        let h = tr.s[j + 1] - tr.s[j];
        let e = (-gamma * h).exp();
        // integrand q(t) = e^{−γ(s_{j+1} − t)} Φ(t) and its derivative at both ends
        let q0 = e * tr.phi[j];
        let q1 = tr.phi[j + 1];
        let d0 = e * (gamma * tr.phi[j] + tr.phi_prime[j]);
        let d1 = gamma * tr.phi[j + 1] + tr.phi_prime[j + 1];
        k[j + 1] = e * k[j] + 0.5 * h * (q0 + q1) + h * h / 12.0 * (d0 - d1);
    }
    Ok(k)
}

/// Last node at which `w` is still resolved: the end of the fit window, or
/// the end of the trace when the window is not available.
fn resolved_end(tr: &WTrace) -> usize {
    fit_window(tr).map(|r| r.end - 1).unwrap_or(tr.len() - 1)
}

/// `I_i = ∫ e^{γ_i t} Φ dt` truncated where `w` leaves the resolved range.
///
/// Beyond that point `Φ ~ w²` sits below the integration noise and the
/// weight `e^{γt}` would only amplify the noise.
fn full_integrals(tr: &WTrace, p: &ParamSet) -> Result<(Option<f64>, Option<f64>)> {
    let last = resolved_end(tr);
    let one = |g: Option<f64>| -> Result<Option<f64>> {
        match g {
            Some(g) => {
                let k = decayed_integral(tr, g, p.m)?;
                Ok(Some(k[last] * (g * tr.s[last]).exp()))
            }
            None => Ok(None),
        }
    };
    Ok((one(p.gamma_1)?, one(p.gamma_2)?))
}

/// Largest normalised residual of the two identities
/// `w' + γ₂ w = −C* A₁ e^{−γ₁s}∫e^{γ₁t}Φ − C*βΦ` and
/// `w' + γ₁ w = −C* A₂ e^{−γ₂s}∫e^{γ₂t}Φ − C*βΦ` over the fit window.
///
/// Each residual is divided by the largest term of its identity.
pub fn verify_integral_identity(tr: &WTrace, p: &ParamSet) -> Result<f64> {
    let (g1, g2, a1, a2) = match (p.gamma_1, p.gamma_2, p.a1, p.a2) {
        (Some(g1), Some(g2), Some(a1), Some(a2)) => (g1, g2, a1, a2),
        _ => return Err(Error::UnsupportedRegime("characteristic roots undefined".into())),
    };
    if tr.w.iter().all(|&w| w == 0.0) && tr.wprime.iter().all(|&d| d == 0.0) {
        return Ok(0.0);
    }
    let win = fit_window(tr)?;
    let k1 = decayed_integral(tr, g1, p.m)?;
    let k2 = decayed_integral(tr, g2, p.m)?;
    let cs = p.c_star;
    let mut worst = 0.0f64;
    for i in win {
        let (w, wp, ph) = (tr.w[i], tr.wprime[i], tr.phi[i]);
        for (gl, a, k) in [(g2, a1, k1[i]), (g1, a2, k2[i])] {
            let lhs = wp + gl * w;
            let int_term = -cs * a * k;
            let loc = -cs * p.beta * ph;
            let scale = wp.abs().max((gl * w).abs()).max(int_term.abs()).max(loc.abs());
            if scale > 0.0 {
                worst = worst.max((lhs - int_term - loc).abs() / scale);
            }
        }
    }
    Ok(worst)
}

/// Compares the extrapolated `lim e^{γs} w` with `−C₀A₁I₁`
/// (or `C₀A₂I₂` when `A₁ = 0`).
pub fn compute_limits(tr: &WTrace, p: &ParamSet) -> Result<Limits> {
    if tr.w.iter().all(|&w| w == 0.0) {
        return Ok(Limits { extrapolated: 0.0, predicted: 0.0, gap: 0.0 });
    }
    let gamma = p.decay_gamma()?;
    let c0 = p.c0_lin.ok_or_else(|| Error::UnsupportedRegime("C0 undefined".into()))?;
    let (g_int, coef) = if p.regime.is_c3() {
        (p.gamma_2.unwrap(), c0 * p.a2.unwrap())
    } else {
        (p.gamma_1.unwrap(), -c0 * p.a1.unwrap())
    };
    let k = decayed_integral(tr, g_int, p.m)?;
    let last = resolved_end(tr);
    let i_end = k[last] * (g_int * tr.s[last]).exp();
    let s_back = tr.s[last] - std::f64::consts::LN_10;
    let j = tr.s.iter().position(|&s| s >= s_back).unwrap_or(0);
    let i_back = k[j] * (g_int * tr.s[j]).exp();
    if (i_end - i_back).abs() > 1e-3 * i_end.abs() {
        return Err(Error::DivergentIntegral(format!("I changed from {i_back} to {i_end} over the last decade")));
    }
    let win = fit_window(tr)?;
    let (extrapolated, _) = extrapolate(tr, win, gamma, correction_power(p));
    let predicted = coef * i_end;
    let gap = (extrapolated - predicted).abs() / predicted.abs().max(extrapolated.abs());
    Ok(Limits { extrapolated, predicted, gap })
}

/// Bracket `[c₁, c₂]` for `Φ/w²` on `|w| ≤ 0.1`: `φ''(0)/2` with 25% slack.
pub fn phi_bracket(m: f64) -> (f64, f64) {
    let c = (1.0 - m) / (2.0 * m * m);
    (0.75 * c, 1.25 * c)
}

/// Writes the fit as pretty JSON.
pub fn write_fit_json(fit: &AsymptoticFit, path: &Path) -> Result<()> {
    io::write_json(path, fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{solve_profile, GridSpec};
    use crate::regimes::{classify, derive_params};

    fn trace(n: u32, m: f64, beta: f64, lambda: f64) -> (ParamSet, WTrace) {
        let p = derive_params(n, m, beta).unwrap();
        let prof = solve_profile(&p, lambda, &GridSpec::with_r_max(1e30)).unwrap();
        (p, to_log_trace(&prof).unwrap())
    }

    #[test]
    fn barenblatt_trace_value_at_zero() {
        let (_, tr) = trace(3, 0.2, 2.5, 1.0);
        let i = tr.s.iter().position(|&s| s.abs() < 1e-12).unwrap();
        let want = (5f64.powf(1.25) * (0.2f64 / 1.2).powf(1.25)).powf(0.2);
        assert!((tr.g[i] - want).abs() < 1e-9);
        assert!(tr.g.iter().all(|&g| g > 0.0));
        assert!(tr.phi.iter().all(|&f| f >= 0.0));
    }

    #[test]
    fn barenblatt_coefficient() {
        let (p, tr) = trace(3, 0.2, 2.5, 1.0);
        let fit = fit_second_order(&tr, &p, classify(&p)).unwrap();
        assert!((fit.b_lambda - 0.25).abs() < 1e-4, "{fit:?}");
        assert_eq!(fit.gamma_used, 2.0);
    }

    #[test]
    fn short_trace_rejected() {
        let p = derive_params(3, 0.2, 3.0).unwrap();
        let prof = solve_profile(&p, 1.0, &GridSpec::with_r_max(100.0)).unwrap();
        assert!(matches!(to_log_trace(&prof), Err(Error::InsufficientRange(_))));
    }

    #[test]
    fn zero_trace() {
        let p = derive_params(3, 0.2, 3.0).unwrap();
        let s: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let tr = WTrace::from_w(&p, s, vec![0.0; 50], vec![0.0; 50]).unwrap();
        assert_eq!(verify_integral_identity(&tr, &p).unwrap(), 0.0);
        let l = compute_limits(&tr, &p).unwrap();
        assert_eq!((l.extrapolated, l.predicted), (0.0, 0.0));
        assert!(tr.h.iter().all(|&h| h == 0.0));
    }

    #[test]
    fn head_integral_matches_quadrature() {
        let (m, gamma, g0, s0) = (0.2f64, 0.4f64, 0.05f64, -3.0f64);
        let kappa = 2.0 * m / (1.0 - m);
        let n = 200_000;
        let a = s0 - 200.0;
        let h = (s0 - a) / n as f64;
        let mut sum = 0.0;
        for i in 0..=n {
            let t = a + i as f64 * h;
            let g = g0 * (kappa * (t - s0)).exp();
            let v = (gamma * (t - s0)).exp() * phi(g - 1.0, m);
            sum += if i == 0 || i == n { 0.5 * v } else { v };
        }
        sum *= h;
        // Trapezoid end correction; the integrand is negligible at the left end.
        let dq = gamma * phi(g0 - 1.0, m) + kappa * g0 * phi_prime(g0 - 1.0, m);
        sum -= h * h / 12.0 * dq;
        assert!((head_integral(g0, gamma, m) - sum).abs() < 1e-8);
    }
}
