use std::path::Path;

use fdlab::asymptotics::{
    compute_limits, fit_second_order, to_log_trace, verify_integral_identity, AsymptoticFit, Limits, MIN_TRACE_RADIUS,
};
use fdlab::ode::Tolerances;
use fdlab::profile::{barenblatt_profile, rescale_profile, solve_profile, solve_profile_at, Profile};
use fdlab::quadrature::{cumulative_abs_integral, sphere_area};
use fdlab::{classify, io, tail_exponent, ParamSet, Regime};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ProfileConfig;
use crate::fail::{input, CliResult};

#[derive(Debug, Serialize)]
pub struct FitEntry {
    pub fit: AsymptoticFit,
    pub identity_residual: f64,
    pub limits: Limits,
    /// `B_λ λ^γ`, constant in `λ` by the scaling law.
    pub collapsed_b: f64,
}

#[derive(Debug, Serialize)]
pub struct ProfileEntry {
    pub lambda: f64,
    pub center_value: f64,
    pub nodes: usize,
    pub csv: String,
    /// First failed profile invariant, if any.
    pub invariant_violation: Option<String>,
    pub barenblatt_max_rel_error: Option<f64>,
    pub fit: Option<FitEntry>,
}

#[derive(Debug, Serialize)]
pub struct ScalingEntry {
    /// Largest relative node-wise gap between rescaled and re-solved profiles.
    pub rescale_max_rel_diff: f64,
    pub collapse_max_rel_dev: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct OrderingEntry {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    /// `f_{λ_lo} < f_{λ_hi}` at every common node.
    pub ordered: bool,
    /// First common node where `f_{λ_hi} ≤ f_{λ_lo}`.
    pub crossing_radius: Option<f64>,
    pub tail_exponent: Option<f64>,
    /// `ω ∫|f_lo − f_hi| r^{n−1}` over the last two decades of the grid.
    pub decade_increments: Option<[f64; 2]>,
    pub increment_exponent: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct ProfileSummary {
    pub params: ParamSet,
    pub regime: Regime,
    pub profiles: Vec<ProfileEntry>,
    pub scaling: Option<ScalingEntry>,
    pub ordering: Option<OrderingEntry>,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn file_name(prefix: &str, lambda: f64, ext: &str) -> String {
    format!("{prefix}_lambda_{lambda}.{ext}")
}

fn fit_entry(prof: &Profile, p: &ParamSet, out: &Path, write_trace: bool) -> fdlab::Result<FitEntry> {
    let tr = to_log_trace(prof)?;
    if write_trace {
        tr.write_csv(&out.join(file_name("trace", prof.lambda, "csv")))?;
    }
    let fit = fit_second_order(&tr, p, classify(p))?;
    let identity_residual = verify_integral_identity(&tr, p)?;
    let limits = compute_limits(&tr, p)?;
    let collapsed_b = fit.b_lambda * prof.lambda.powf(fit.gamma_used);
    fdlab::asymptotics::write_fit_json(&fit, &out.join(file_name("fit", prof.lambda, "json")))?;
    Ok(FitEntry { fit, identity_residual, limits, collapsed_b })
}

fn entry(cfg: &ProfileConfig, p: &ParamSet, lambda: f64, out: &Path) -> fdlab::Result<ProfileEntry> {
    let prof = solve_profile(p, lambda, &cfg.grid)?;
    let csv = file_name("profile", lambda, "csv");
    prof.write_csv(&out.join(&csv))?;
    let barenblatt_max_rel_error = if p.is_barenblatt() {
        let mut worst = 0.0f64;
        for (&r, &f) in prof.grid.iter().zip(&prof.values) {
            worst = worst.max(rel(f, barenblatt_profile(p, lambda, r)?));
        }
        Some(worst)
    } else {
        None
    };
    let fit = if cfg.fit && p.regime.is_supported() { Some(fit_entry(&prof, p, out, cfg.write_trace)?) } else { None };
    Ok(ProfileEntry {
        lambda,
        center_value: prof.values[0],
        nodes: prof.grid.len(),
        csv,
        invariant_violation: prof.verify_invariants().err(),
        barenblatt_max_rel_error,
        fit,
    })
}

fn scaling(cfg: &ProfileConfig, p: &ParamSet, entries: &[ProfileEntry]) -> fdlab::Result<ScalingEntry> {
    let base = solve_profile(p, 1.0, &cfg.grid)?;
    let others: Vec<f64> = cfg.lambdas.iter().copied().filter(|&l| l != 1.0).collect();
    let diffs = others
        .par_iter()
        .map(|&lambda| {
            let scaled = rescale_profile(&base, lambda);
            let direct = solve_profile(p, lambda, &cfg.grid)?;
            // The last node of either grid may be the appended r_max.
            let k = scaled.grid.len().min(direct.grid.len()) - 1;
            Ok((0..k).map(|i| rel(scaled.values[i], direct.values[i])).fold(0.0, f64::max))
        })
        .collect::<fdlab::Result<Vec<f64>>>()?;
    let collapsed: Vec<f64> = entries.iter().filter_map(|e| e.fit.as_ref().map(|f| f.collapsed_b)).collect();
    let collapse_max_rel_dev =
        (collapsed.len() > 1).then(|| collapsed.iter().map(|c| rel(*c, collapsed[0])).fold(0.0, f64::max));
    Ok(ScalingEntry { rescale_max_rel_diff: diffs.into_iter().fold(0.0, f64::max), collapse_max_rel_dev })
}

fn ordering(cfg: &ProfileConfig, p: &ParamSet) -> fdlab::Result<OrderingEntry> {
    let lo = cfg.lambdas.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = cfg.lambdas.iter().copied().fold(0.0, f64::max);
    let nodes = cfg.grid.nodes(hi)?;
    let tol = Tolerances { rtol: cfg.grid.rtol, atol: cfg.grid.atol };
    let (a, b) = rayon::join(|| solve_profile_at(p, lo, &nodes, tol), || solve_profile_at(p, hi, &nodes, tol));
    let (a, b) = (a?.values, b?.values);
    let first_not_above = (0..nodes.len()).find(|&i| b[i] <= a[i]);
    let r_max = *nodes.last().unwrap();
    let (decade_increments, increment_exponent) = if r_max >= 1e4 * (1.0 - 1e-12) {
        let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        let cum = cumulative_abs_integral(&nodes, &d, p.dim() - 1.0);
        let at = |r: f64| {
            let i = nodes.iter().position(|&x| x >= r * (1.0 - 1e-12)).unwrap_or(nodes.len() - 1);
            sphere_area(p.n) * cum[i]
        };
        let inc = [at(r_max / 10.0) - at(r_max / 100.0), at(r_max) - at(r_max / 10.0)];
        (Some(inc), Some((inc[1] / inc[0]).log10()))
    } else {
        (None, None)
    };
    Ok(OrderingEntry {
        lambda_lo: lo,
        lambda_hi: hi,
        ordered: first_not_above.is_none(),
        crossing_radius: first_not_above.map(|i| nodes[i]),
        tail_exponent: tail_exponent(p).ok(),
        decade_increments,
        increment_exponent,
    })
}

pub fn run(cfg: &ProfileConfig, out: &Path) -> CliResult<ProfileSummary> {
    let p = cfg.params.derive()?;
    cfg.grid.validate()?;
    if cfg.lambdas.is_empty() || cfg.lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return Err(input("lambdas must be a non-empty list of positive numbers"));
    }
    if cfg.fit && p.regime.is_supported() && cfg.grid.r_max < MIN_TRACE_RADIUS {
        return Err(input(format!("fit needs grid.r_max >= {MIN_TRACE_RADIUS}; set \"fit\": false for shorter grids")));
    }
    let profiles = cfg.lambdas.par_iter().map(|&l| entry(cfg, &p, l, out)).collect::<fdlab::Result<Vec<_>>>()?;
    let (scaling, ordering) = if cfg.lambdas.len() > 1 {
        (Some(scaling(cfg, &p, &profiles)?), Some(ordering(cfg, &p)?))
    } else {
        (None, None)
    };
    if let Some(sc) = &scaling {
        io::write_json(&out.join("scaling.json"), sc)?;
    }
    let summary = ProfileSummary { regime: classify(&p), params: p, profiles, scaling, ordering };
    io::write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}
