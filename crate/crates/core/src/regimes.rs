//! Parameter algebra for the subcritical fast diffusion equation.
//!
//! Everything here is closed-form: the self-similar exponents, the
//! constant `C*` of the singular profile, the characteristic roots of the
//! linearisation around it, and the case table that decides whether the
//! profiles are monotone in `λ` (C1), cross (C2) or are Barenblatt (C3).

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used to decide the exact boundary cases
/// `β = β₁` and `m = (n−4)/(n−2)`.
pub const BOUNDARY_RTOL: f64 = 1e-12;

/// Tolerance for the consistency check between the computed `A₁` and the
/// sign read off the case table.
pub const A1_CONSISTENCY_TOL: f64 = 1e-9;

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= BOUNDARY_RTOL * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn cmp_tol(a: f64, b: f64) -> Ordering {
    if near(a, b) {
        Ordering::Equal
    } else if a < b {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegimeLabel {
    C1i,
    C1ii,
    C2i,
    C2ii,
    C3i,
    C3ii,
    Unsupported,
}

impl RegimeLabel {
    pub fn is_c1(self) -> bool {
        matches!(self, RegimeLabel::C1i | RegimeLabel::C1ii)
    }

    pub fn is_c2(self) -> bool {
        matches!(self, RegimeLabel::C2i | RegimeLabel::C2ii)
    }

    pub fn is_c3(self) -> bool {
        matches!(self, RegimeLabel::C3i | RegimeLabel::C3ii)
    }

    pub fn is_supported(self) -> bool {
        self != RegimeLabel::Unsupported
    }

    /// Profiles ordered in `λ` everywhere (monotone cases).
    pub fn is_monotone(self) -> bool {
        self.is_c1() || self.is_c3()
    }
}

impl fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RegimeLabel::C1i => "C1i",
            RegimeLabel::C1ii => "C1ii",
            RegimeLabel::C2i => "C2i",
            RegimeLabel::C2ii => "C2ii",
            RegimeLabel::C3i => "C3i",
            RegimeLabel::C3ii => "C3ii",
            RegimeLabel::Unsupported => "Unsupported",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Zero,
    Negative,
}

impl Sign {
    /// Numerical sign with a dead zone of width `tol` around zero.
    pub fn of(x: f64, tol: f64) -> Sign {
        if x > tol {
            Sign::Positive
        } else if x < -tol {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }
}

/// Case label together with the sign of `A₁` it implies.
///
/// `sign_a1` is `None` for unsupported parameters, where the case table
/// makes no statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Regime {
    pub label: RegimeLabel,
    pub sign_a1: Option<Sign>,
}

/// All constants derived from a `(n, m, β)` triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub n: u32,
    pub m: f64,
    pub beta: f64,
    pub alpha: f64,
    pub c_star: f64,
    pub beta_e: f64,
    pub beta_1: f64,
    pub beta_2: f64,
    pub beta_0: f64,
    pub a0: f64,
    pub gamma_1: Option<f64>,
    pub gamma_2: Option<f64>,
    pub a1: Option<f64>,
    pub a2: Option<f64>,
    pub c0_lin: Option<f64>,
    pub p0: Option<f64>,
    pub a_star: Option<f64>,
    pub decay_rate: f64,
    pub regime: RegimeLabel,
}

/// `n − 2 − n m`, positive throughout the subcritical range.
fn gap(n: f64, m: f64) -> f64 {
    n - 2.0 - n * m
}

/// Checks `n ≥ 3` and `0 < m < (n−2)/n`.
pub fn check_subcritical(n: u32, m: f64) -> Result<()> {
    if n < 3 {
        return Err(Error::Domain(format!("dimension n = {n} must be at least 3")));
    }
    let nf = f64::from(n);
    let m_c = (nf - 2.0) / nf;
    if !(m.is_finite() && m > 0.0 && m < m_c) {
        return Err(Error::Domain(format!("m = {m} is outside the subcritical range (0, {m_c}) for n = {n}")));
    }
    Ok(())
}

fn label_for(n: u32, m: f64, beta: f64, beta_0: f64, beta_1: f64) -> RegimeLabel {
    let nf = f64::from(n);
    let high_dim = n > 4;
    // Position of m relative to (n−4)/(n−2); always above it for n ≤ 4.
    let m_side = if high_dim { cmp_tol(m, (nf - 4.0) / (nf - 2.0)) } else { Ordering::Greater };

    if near(beta, beta_1) {
        return match (high_dim, m_side) {
            (false, _) => RegimeLabel::C3i,
            (true, Ordering::Less) => RegimeLabel::C1ii,
            (true, Ordering::Greater) => RegimeLabel::C3ii,
            (true, Ordering::Equal) => RegimeLabel::Unsupported,
        };
    }
    if beta > beta_1 {
        return RegimeLabel::C1i;
    }
    if beta > beta_0 && !near(beta, beta_0) {
        return match (high_dim, m_side) {
            (false, _) => RegimeLabel::C2i,
            (true, Ordering::Less) => RegimeLabel::C1ii,
            (true, Ordering::Greater) => RegimeLabel::C2ii,
            (true, Ordering::Equal) => RegimeLabel::Unsupported,
        };
    }
    RegimeLabel::Unsupported
}

/// Evaluates every closed-form constant for `(n, m, β)`.
pub fn derive_params(n: u32, m: f64, beta: f64) -> Result<ParamSet> {
    check_subcritical(n, m)?;
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::Domain(format!("beta = {beta} must be positive")));
    }
    let nf = f64::from(n);
    let d = gap(nf, m);
    let one_m = 1.0 - m;

    let alpha = (2.0 * beta + 1.0) / one_m;
    let c_star = 2.0 * m * d / one_m;
    let beta_e = m / d;
    let beta_1 = 1.0 / d;
    let beta_2 = (2.0 * one_m / d).sqrt() + ((nf + 2.0) * m - (nf - 2.0)) / (2.0 * d);
    let beta_0 = beta_2.max(beta_e);

    if beta < beta_e && !near(beta, beta_e) {
        return Err(Error::SubcriticalBeta { beta, beta_e });
    }

    let a0 = nf - 2.0 - (nf + 2.0) * m + 2.0 * beta * d;
    let product = 2.0 * d / one_m;
    let regime = label_for(n, m, beta, beta_0, beta_1);

    let roots = if near(beta, beta_1) {
        // At β₁ the characteristic polynomial factors as (γ − 2)(γ − d/(1−m)).
        let other = d / one_m;
        Some((other.min(2.0), other.max(2.0)))
    } else if beta > beta_0 {
        let disc = (a0 * a0 - 8.0 * d * one_m).max(0.0);
        let g2 = (a0 + disc.sqrt()) / (2.0 * one_m);
        Some((product / g2, g2))
    } else {
        None
    };

    let (gamma_1, gamma_2) = match roots {
        Some((g1, g2)) => (Some(g1), Some(g2)),
        None => (None, None),
    };
    let a1 = gamma_1.map(|g| 1.0 / one_m - beta * g);
    let a2 = gamma_2.map(|g| 1.0 / one_m - beta * g);
    let c0_lin = roots.and_then(|(g1, g2)| (g2 > g1).then(|| c_star / (g2 - g1)));

    let (p0, a_star) = match gamma_1 {
        Some(g1) if regime.is_c1() => {
            let expo = nf - 2.0 / one_m - g1;
            if expo > 0.0 {
                let p0 = 0.5 * one_m * expo;
                let a_star = 2.0 * m * p0 / (c_star * one_m) * (g1 + 2.0 * m / one_m);
                (Some(p0), Some(a_star))
            } else {
                (None, None)
            }
        }
        _ => (None, None),
    };

    Ok(ParamSet {
        n,
        m,
        beta,
        alpha,
        c_star,
        beta_e,
        beta_1,
        beta_2,
        beta_0,
        a0,
        gamma_1,
        gamma_2,
        a1,
        a2,
        c0_lin,
        p0,
        a_star,
        decay_rate: nf * beta - alpha,
        regime,
    })
}

/// Reads the regime off the case table; `sign_a1` follows from the label.
pub fn classify(p: &ParamSet) -> Regime {
    let label = p.regime;
    let sign_a1 = if label.is_c1() {
        Some(Sign::Positive)
    } else if label.is_c2() {
        Some(Sign::Negative)
    } else if label.is_c3() {
        Some(Sign::Zero)
    } else {
        None
    };
    Regime { label, sign_a1 }
}

/// Exponent `n − 2/(1−m) − γ` governing the tail of `r^{n−1}|f_{λ₁} − f_{λ₂}|`.
///
/// Non-negative means the difference of two profiles is not integrable.
pub fn tail_exponent(p: &ParamSet) -> Result<f64> {
    let gamma = p.decay_gamma()?;
    Ok(f64::from(p.n) - 2.0 / (1.0 - p.m) - gamma)
}

impl ParamSet {
    pub fn dim(&self) -> f64 {
        f64::from(self.n)
    }

    pub fn regime(&self) -> Regime {
        classify(self)
    }

    /// The second-order decay exponent: `γ₁` in C1/C2, `γ₂ = 2` in C3.
    pub fn decay_gamma(&self) -> Result<f64> {
        let label = self.regime;
        if label.is_c1() || label.is_c2() {
            self.gamma_1.ok_or_else(|| Error::UnsupportedRegime(format!("{label}: gamma_1 undefined")))
        } else if label.is_c3() {
            Ok(2.0)
        } else {
            Err(Error::UnsupportedRegime(format!(
                "n = {}, m = {}, beta = {} has no second-order expansion",
                self.n, self.m, self.beta
            )))
        }
    }

    /// Whether `β` coincides with `β₁` (the Barenblatt exponent).
    pub fn is_barenblatt(&self) -> bool {
        near(self.beta, self.beta_1)
    }

    /// `|A₁ − 0|`-style check that the computed `A₁` has the sign the table
    /// prescribes, to within [`A1_CONSISTENCY_TOL`].
    pub fn a1_consistent(&self) -> bool {
        match (self.a1, classify(self).sign_a1) {
            (Some(a1), Some(Sign::Positive)) => a1 > -A1_CONSISTENCY_TOL,
            (Some(a1), Some(Sign::Negative)) => a1 < A1_CONSISTENCY_TOL,
            (Some(a1), Some(Sign::Zero)) => a1.abs() <= A1_CONSISTENCY_TOL,
            (_, None) => true,
            (None, Some(_)) => false,
        }
    }

    /// Value of `𝒞(r) = (C*/r²)^{1/(1−m)}`.
    pub fn singular_profile(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("singular profile is undefined at r = {r}")));
        }
        Ok(self.singular_unchecked(r))
    }

    pub(crate) fn singular_unchecked(&self, r: f64) -> f64 {
        (self.c_star / (r * r)).powf(1.0 / (1.0 - self.m))
    }

    /// `λ^{2/(1−m)}`, the centre value of `f_λ`.
    pub fn center_value(&self, lambda: f64) -> f64 {
        lambda.powf(2.0 / (1.0 - self.m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn barenblatt_point_constants() {
        let p = derive_params(3, 0.2, 2.5).unwrap();
        assert!(close(p.c_star, 0.2, 1e-12));
        assert!(close(p.beta_e, 0.5, 1e-12));
        assert!(close(p.beta_2, 2.0, 1e-12));
        assert!(close(p.beta_0, 2.0, 1e-12));
        assert!(close(p.beta_1, 2.5, 1e-12));
        assert!(close(p.alpha, 7.5, 1e-12));
        assert_eq!(p.gamma_2, Some(2.0));
        assert!(close(p.gamma_1.unwrap(), 0.5, 1e-12));
        assert!(close(p.a1.unwrap(), 0.0, 1e-12));
        assert!(close(p.a2.unwrap(), -3.75, 1e-12));
        assert_eq!(p.regime, RegimeLabel::C3i);
        assert_eq!(p.p0, None);
    }

    #[test]
    fn c1i_constants() {
        let p = derive_params(3, 0.2, 3.0).unwrap();
        assert!(close(p.gamma_1.unwrap(), 0.381_966_011_250_105_1, 1e-12));
        assert!(close(p.a1.unwrap(), 0.104_101_966_249_684_7, 1e-12));
        assert!(close(p.decay_rate, 0.25, 1e-12));
        let r = classify(&p);
        assert_eq!(r.label, RegimeLabel::C1i);
        assert_eq!(r.sign_a1, Some(Sign::Positive));
        assert!(close(tail_exponent(&p).unwrap(), 0.118_033_988_749_894_9, 1e-12));
        // p0 = 0.4 · 0.118034, a* = 2m p0/(C*(1−m)) · (γ₁ + 2m/(1−m))
        assert!(close(p.p0.unwrap(), 0.4 * 0.118_033_988_749_894_9, 1e-12));
        let a_star = 2.0 * 0.2 * p.p0.unwrap() / (0.2 * 0.8) * (p.gamma_1.unwrap() + 0.5);
        assert!(close(p.a_star.unwrap(), a_star, 1e-14));
    }

    #[test]
    fn c2i_constants() {
        let p = derive_params(3, 0.2, 2.2).unwrap();
        let r = classify(&p);
        assert_eq!(r.label, RegimeLabel::C2i);
        assert_eq!(r.sign_a1, Some(Sign::Negative));
        assert!(close(p.a1.unwrap(), -0.161_833_347_109_714_9, 1e-12));
        assert!(close(tail_exponent(&p).unwrap(), -0.141_742_430_504_415_8, 1e-12));
        assert!(p.p0.is_none());
    }

    #[test]
    fn c1ii_example() {
        let p = derive_params(6, 0.3, 0.45).unwrap();
        assert!(close(p.beta_0, 0.434_087_671_581_102, 1e-12));
        assert!(close(p.beta_1, 0.454_545_454_545_454_5, 1e-12));
        assert_eq!(p.regime, RegimeLabel::C1ii);
        assert!(close(p.a1.unwrap(), 0.504_321_763_691_823_8, 1e-12));
    }

    #[test]
    fn beta0_equals_beta1_on_critical_line() {
        let p = derive_params(6, 0.5, 1.0).unwrap();
        assert!(close(p.beta_0, 1.0, 1e-12));
        assert!(close(p.beta_1, 1.0, 1e-12));
        // A₁ = A₂ = 0 here, which no case of the table covers.
        assert_eq!(p.regime, RegimeLabel::Unsupported);
    }

    #[test]
    fn c3_tail_exponent() {
        let p = derive_params(3, 0.2, 2.5).unwrap();
        // (n − 4 − (n−2)m)/(1−m) = −1.2/0.8
        assert!(close(tail_exponent(&p).unwrap(), -1.5, 1e-12));
    }

    #[test]
    fn rejects_out_of_range_inputs() {
        assert!(matches!(derive_params(3, 0.9, 1.0), Err(Error::Domain(_))));
        assert!(matches!(derive_params(2, 0.1, 1.0), Err(Error::Domain(_))));
        assert!(matches!(derive_params(3, 0.2, 0.3), Err(Error::SubcriticalBeta { .. })));
    }

    #[test]
    fn band_below_beta0_is_unsupported() {
        let p = derive_params(3, 0.2, 1.0).unwrap();
        assert_eq!(p.regime, RegimeLabel::Unsupported);
        assert!(p.gamma_1.is_none());
        assert!(matches!(tail_exponent(&p), Err(Error::UnsupportedRegime(_))));
        // β = β₀ exactly is also rejected
        let p = derive_params(3, 0.2, 2.0).unwrap();
        assert_eq!(p.regime, RegimeLabel::Unsupported);
    }

    #[test]
    fn singular_profile_values() {
        let p = derive_params(3, 0.2, 3.0).unwrap();
        assert!(close(p.singular_profile(1.0).unwrap(), 0.2f64.powf(1.25), 1e-15));
        assert!(close(p.singular_profile(0.2f64.sqrt()).unwrap(), 1.0, 1e-14));
        assert!(p.singular_profile(0.0).is_err());
        assert!(p.singular_profile(10.0).unwrap() > p.singular_profile(20.0).unwrap());
    }

    #[test]
    fn json_field_names_are_stable() {
        let p = derive_params(3, 0.2, 3.0).unwrap();
        let v = serde_json::to_value(&p).unwrap();
        for key in [
            "n",
            "m",
            "beta",
            "alpha",
            "c_star",
            "beta_e",
            "beta_1",
            "beta_2",
            "beta_0",
            "a0",
            "gamma_1",
            "gamma_2",
            "a1",
            "a2",
            "c0_lin",
            "p0",
            "a_star",
            "decay_rate",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        let r = serde_json::to_value(classify(&p)).unwrap();
        assert_eq!(r["label"], "C1i");
        assert_eq!(r["sign_a1"], "positive");
    }
}
