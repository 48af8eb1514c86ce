//! Checks tying rescaled runs back to the inequalities they should obey:
//! the weighted contraction, the envelope `λ(τ)` and the one-sided bound
//! on `u_t`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolver::{evolve_pair, OriginalSlice, RadialGrid, RadialState};
use crate::interp;
use crate::io;
use crate::profile::{solve_profile, GridSpec, Profile};
use crate::quadrature::{self, radial_abs_integral, sphere_area, weight_power};
use crate::regimes::ParamSet;

/// Relative slack in the node-wise test `ũ ≤ f_λ`, covering interpolation
/// error of the profile family.
pub const FEASIBILITY_RTOL: f64 = 1e-9;

/// Points in the geometric λ scan.
pub const SCAN_POINTS: usize = 200;

/// `f_λ` for any `λ`, from one solved `λ = 1` profile and the scaling law.
#[derive(Debug, Clone)]
pub struct ProfileFamily {
    pub base: Profile,
}

impl ProfileFamily {
    /// Resolves the base profile out to `r_max`, finely enough that
    /// interpolation stays far below the feasibility slack.
    pub fn new(p: &ParamSet, r_max: f64) -> Result<ProfileFamily> {
        let spec = GridSpec { r_max, nodes_per_decade: 512, ..GridSpec::default() };
        Ok(ProfileFamily { base: solve_profile(p, 1.0, &spec)? })
    }

    /// `f_λ(r) = λ^{2/(1−m)} f₁(λr)`.
    pub fn value(&self, lambda: f64, r: f64) -> Result<f64> {
        let amp = lambda.powf(2.0 / (1.0 - self.base.params.m));
        Ok(amp * self.base.evaluate(lambda * r)?)
    }

    pub fn values_on(&self, lambda: f64, r: &[f64]) -> Result<Vec<f64>> {
        r.iter().map(|&x| self.value(lambda, x)).collect()
    }

    /// True when `u ≤ f_λ` at every node, up to [`FEASIBILITY_RTOL`].
    pub fn bounds(&self, lambda: f64, r: &[f64], u: &[f64]) -> Result<bool> {
        let amp = lambda.powf(2.0 / (1.0 - self.base.params.m));
        for (x, v) in r.iter().zip(u) {
            let f = amp * self.base.evaluate(lambda * x)?;
            if *v > f * (1.0 + FEASIBILITY_RTOL) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// `ω_{n−1}∫|a − b| 𝒞^{p₀} r^{n−1} dr` between a state and a field on its grid.
pub fn weighted_l1_distance(a: &RadialState, b: &[f64], p0: f64) -> Result<f64> {
    let p = &a.params;
    let limit = 0.5 * (1.0 - p.m) * (p.dim() - 2.0);
    if !(p0 > 0.0 && p0 < limit) {
        return Err(Error::Domain(format!("p0 = {p0} must lie in (0, {limit})")));
    }
    quadrature::weighted_l1(&a.grid.r, &a.u, b, a.grid.n, p.m, p.c_star, p0)
}

/// `λ(τ)` for one sampled state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRecord {
    pub tau: f64,
    pub lambda: f64,
    pub center_value: f64,
}

/// Smallest `λ ∈ [lam_lo, lam_hi]` with `ũ ≤ f_λ` node-wise.
///
/// The centre gives `λ ≥ λ_c = ũ(0)^{(1−m)/2}`, and `λ_c` is returned when
/// it is feasible itself (the state touches `f_{λ_c}` from below). Otherwise
/// feasibility need not be an interval of `λ`, so a geometric scan over
/// `[max(lam_lo, λ_c), lam_hi]` records every point first and the lower end
/// of the lowest feasible run is refined by bisection to `tol`.
pub fn lambda_envelope(st: &RadialState, fam: &ProfileFamily, lam_lo: f64, lam_hi: f64, tol: f64) -> Result<f64> {
    if !st.params.regime.is_c2() {
        return Err(Error::Regime(format!("the envelope is defined in C2, got {}", st.params.regime)));
    }
    if !(lam_lo > 0.0 && lam_hi > lam_lo && tol > 0.0) {
        return Err(Error::Domain("need 0 < lam_lo < lam_hi and tol > 0".into()));
    }
    let (r, u) = (&st.grid.r, &st.u);
    let lam_c = u[0].powf(0.5 * (1.0 - st.params.m));
    if lam_c >= lam_lo && lam_c <= lam_hi && fam.bounds(lam_c, r, u)? {
        return Ok(lam_c);
    }
    let lam_lo = lam_lo.max(lam_c);
    if lam_lo >= lam_hi {
        return Err(Error::NoFeasibleLambda { lo: lam_lo, hi: lam_hi });
    }
    let ratio = (lam_hi / lam_lo).powf(1.0 / (SCAN_POINTS - 1) as f64);
    let scan: Vec<f64> =
        (0..SCAN_POINTS).map(|k| if k + 1 == SCAN_POINTS { lam_hi } else { lam_lo * ratio.powi(k as i32) }).collect();
    let mut first = None;
    for (k, &l) in scan.iter().enumerate() {
        if fam.bounds(l, r, u)? {
            first = Some(k);
            break;
        }
    }
    let k = first.ok_or(Error::NoFeasibleLambda { lo: lam_lo, hi: lam_hi })?;
    if k == 0 {
        return Ok(lam_lo);
    }
    let (mut lo, mut hi) = (scan[k - 1], scan[k]);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if fam.bounds(mid, r, u)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

pub fn write_envelope_csv(path: &Path, recs: &[EnvelopeRecord]) -> Result<()> {
    io::write_csv(
        path,
        &["tau", "lambda", "center_value"],
        recs.iter().map(|e| vec![Some(e.tau), Some(e.lambda), Some(e.center_value)]),
    )
}

/// Weighted contraction of a pair of runs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ContractionRecord {
    pub taus: Vec<f64>,
    /// `‖ũ − ṽ‖` in `L¹(𝒞^{p₀})`.
    pub wl1_pair_dist: Vec<f64>,
    /// `a* ∫₀^τ ∫ |ũ − ṽ| |(𝒞/f_{λ₂})^{1−m} − 1| 𝒞^{p₀}`.
    pub dissipation: Vec<f64>,
    /// `(distance + dissipation)/initial distance`; zero for identical data.
    pub budget_ratio: Vec<f64>,
}

impl ContractionRecord {
    /// Largest increase of the distance between consecutive samples.
    pub fn max_increase(&self) -> f64 {
        self.wl1_pair_dist.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_budget_ratio(&self) -> f64 {
        self.budget_ratio.iter().cloned().fold(0.0, f64::max)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        io::write_csv(
            path,
            &["tau", "wl1_pair_dist", "dissipation", "budget_ratio"],
            (0..self.taus.len()).map(|i| {
                vec![
                    Some(self.taus[i]),
                    Some(self.wl1_pair_dist[i]),
                    Some(self.dissipation[i]),
                    Some(self.budget_ratio[i]),
                ]
            }),
        )
    }
}

/// Spatial integrand of the dissipation term, integrated over the grid.
///
/// `(𝒞/f)^{1−m} = C*/(r² f^{1−m})`, which exceeds one in C1, so the
/// integral splits into two power-weighted pieces that the shared
/// quadrature handles exactly at the origin.
fn dissipation_rate(p: &ParamSet, grid: &RadialGrid, a: &[f64], b: &[f64], f_hi: &[f64]) -> f64 {
    let p0 = p.p0.unwrap_or(0.0);
    let (e, mult) = weight_power(grid.n, p.m, p.c_star, p0);
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scaled: Vec<f64> = d.iter().zip(f_hi).map(|(x, f)| x * p.c_star * f.powf(p.m - 1.0)).collect();
    let inner = radial_abs_integral(&grid.r, &scaled, e - 2.0) - radial_abs_integral(&grid.r, &d, e);
    p.a_star.unwrap_or(0.0) * sphere_area(grid.n) * mult * inner
}

/// Runs `a` and `b` in lockstep and records the weighted contraction
/// budget. `f_hi` is `f_{λ₂}` on the shared grid; the dissipation is
/// integrated in `τ` by the trapezoid rule over every step.
pub fn contraction_monitor(
    a: &RadialState,
    b: &RadialState,
    f_hi: &[f64],
    tau_end: f64,
    sample_every: f64,
    dtau: Option<f64>,
) -> Result<(ContractionRecord, Vec<(RadialState, RadialState)>)> {
    let p = &a.params;
    if !p.regime.is_c1() {
        return Err(Error::Regime(format!("weighted contraction needs C1, got {}", p.regime)));
    }
    if f_hi.len() != a.grid.len() {
        return Err(Error::GridMismatch("f_hi is not on the run grid".into()));
    }
    let p0 = p.p0.ok_or_else(|| Error::Regime("p0 undefined".into()))?;
    let mut acc = 0.0;
    let mut prev = dissipation_rate(p, &a.grid, &a.u, &b.u, f_hi);
    let mut cumulative = vec![(a.tau, 0.0)];
    let samples = evolve_pair(a, b, tau_end, sample_every, dtau, |x, y, dt| {
        let now = dissipation_rate(p, &x.grid, &x.u, &y.u, f_hi);
        acc += 0.5 * dt * (prev + now);
        prev = now;
        cumulative.push((x.tau, acc));
        Ok(())
    })?;
    let mut rec = ContractionRecord::default();
    let d0 = weighted_l1_distance(a, &b.u, p0)?;
    let mut j = 0;
    for (x, y) in &samples {
        // cumulative dissipation at the last step not after this sample
        while j + 1 < cumulative.len() && cumulative[j + 1].0 <= x.tau + 1e-12 {
            j += 1;
        }
        let dist = weighted_l1_distance(x, &y.u, p0)?;
        let diss = cumulative[j].1;
        rec.taus.push(x.tau);
        rec.wl1_pair_dist.push(dist);
        rec.dissipation.push(diss);
        rec.budget_ratio.push(if d0 > 0.0 { (dist + diss) / d0 } else { 0.0 });
    }
    Ok((rec, samples))
}

/// Result of the one-sided time-derivative check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbReport {
    /// `max (u_t − u/((1−m)t))` over interior slices and nodes.
    pub max_violation: f64,
    /// The same excess divided by `u/((1−m)t)`.
    pub max_relative: f64,
    pub at_t: f64,
    pub at_x: f64,
}

/// Compares a three-point `u_t` with `u/((1−m)t)` on time-ordered slices.
///
/// Each interior slice is the reference; its neighbours are interpolated
/// onto its `x` nodes, and nodes outside a neighbour's range are skipped.
pub fn aronson_benilan_check(slices: &[OriginalSlice], m: f64) -> Result<AbReport> {
    if slices.len() < 3 {
        return Err(Error::InsufficientSamples(slices.len()));
    }
    if slices.windows(2).any(|w| !(w[1].t > w[0].t)) || !(slices[0].t > 0.0) {
        return Err(Error::Domain("slices must have strictly increasing t > 0".into()));
    }
    let mut rep =
        AbReport { max_violation: f64::NEG_INFINITY, max_relative: f64::NEG_INFINITY, at_t: f64::NAN, at_x: f64::NAN };
    for k in 1..slices.len() - 1 {
        let (a, b, c) = (&slices[k - 1], &slices[k], &slices[k + 1]);
        let (h0, h1) = (b.t - a.t, c.t - b.t);
        let (xa, xc) = (*a.x.last().unwrap(), *c.x.last().unwrap());
        for (i, &x) in b.x.iter().enumerate() {
            if x > xa || x > xc {
                continue;
            }
            let ua = interp::linear(&a.x, &a.u, x);
            let uc = interp::linear(&c.x, &c.u, x);
            let ub = b.u[i];
            let ut = (-h1 / (h0 * (h0 + h1))) * ua + ((h1 - h0) / (h0 * h1)) * ub + (h0 / (h1 * (h0 + h1))) * uc;
            let bound = ub / ((1.0 - m) * b.t);
            let excess = ut - bound;
            if excess > rep.max_violation {
                rep.max_violation = excess;
            }
            if excess / bound > rep.max_relative {
                rep.max_relative = excess / bound;
                rep.at_t = b.t;
                rep.at_x = x;
            }
        }
    }
    Ok(rep)
}
