use std::path::Path;

use fdlab::diagnostics::{
    aronson_benilan_check, contraction_monitor, lambda_envelope, write_envelope_csv, AbReport, ContractionRecord,
    EnvelopeRecord, ProfileFamily,
};
use fdlab::evolver::{
    build_initial, evolve, evolve_pair, original_time, profile_on_grid, reconstruct_original, Evolution, EvolveOptions,
    InitialKind, RadialGrid, RadialState,
};
use fdlab::quadrature::l1_distance;
use fdlab::{classify, io, ParamSet, Regime};
use serde::Serialize;

use crate::config::{ContractionConfig, EvolveConfig, OrderingConfig};
use crate::fail::{input, CliResult};

#[derive(Debug, Serialize)]
pub struct GridInfo {
    pub h: f64,
    pub r_max: f64,
    pub nodes: usize,
    pub cfl: f64,
}

#[derive(Debug, Serialize)]
pub struct ContractionSummary {
    pub max_increase: f64,
    pub max_budget_ratio: f64,
}

#[derive(Debug, Serialize)]
pub struct OrderingSummary {
    pub initially_ordered: bool,
    /// Smallest `(v − u)/v` over nodes at the sample times.
    pub min_rel_gap_samples: f64,
    /// The same over every step.
    pub min_rel_gap_steps: f64,
}

#[derive(Debug, Serialize)]
pub struct EvolveSummary {
    pub params: ParamSet,
    pub regime: Regime,
    pub initial: InitialKind,
    pub grid: GridInfo,
    pub samples: usize,
    pub tau_end: f64,
    pub center_start: f64,
    pub center_end: f64,
    pub center_strictly_decreasing: bool,
    /// `max |ũ(τ_end) − ũ₀| / ũ₀` over nodes.
    pub max_rel_change: f64,
    pub sup_dist_start: Option<f64>,
    pub sup_dist_end: Option<f64>,
    /// Fitted exponential decay rate of `l1_dist`, with the window used.
    pub l1_rate: Option<f64>,
    pub l1_rate_window: Option<[f64; 2]>,
    pub decay_rate: f64,
    pub lambda_env_strictly_decreasing: Option<bool>,
    pub contraction: Option<ContractionSummary>,
    pub ordering: Option<OrderingSummary>,
    pub aronson_benilan: Option<AbReport>,
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// Least-squares slope of `ln y` against `t`, negated.
fn decay_fit(t: &[f64], y: &[f64]) -> Option<f64> {
    if t.len() < 3 {
        return None;
    }
    let n = t.len() as f64;
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mt = t.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = t.iter().zip(&ly).map(|(a, b)| (a - mt) * (b - my)).sum();
    let sxx: f64 = t.iter().map(|a| (a - mt) * (a - mt)).sum();
    Some(-sxy / sxx)
}

fn validate(cfg: &EvolveConfig, p: &ParamSet) -> CliResult<()> {
    if !(cfg.tau_end > 0.0 && cfg.sample_every > 0.0 && cfg.sample_every <= cfg.tau_end) {
        return Err(input("need 0 < sample_every <= tau_end"));
    }
    if !(cfg.grid.h > 0.0 && cfg.grid.h <= 0.1) {
        return Err(input("grid.h must lie in (0, 0.1]"));
    }
    if p.regime.is_c1() && cfg.reference_lambda.is_none() {
        return Err(input("C1 runs report wl1_dist, which needs a reference profile: set reference_lambda"));
    }
    if cfg.envelope.is_some() && !p.regime.is_c2() {
        return Err(input(format!("envelope is defined only in C2, regime is {}", p.regime)));
    }
    if cfg.contraction.is_some() && !p.regime.is_c1() {
        return Err(input(format!("contraction is defined only in C1, regime is {}", p.regime)));
    }
    Ok(())
}

fn run_contraction(
    c: &ContractionConfig,
    a: &RadialState,
    cfg: &EvolveConfig,
) -> fdlab::Result<(ContractionRecord, Vec<(RadialState, RadialState)>)> {
    let b = build_initial(c.partner, &a.params, &a.grid)?;
    let hi = profile_on_grid(&a.params, c.upper_lambda, &a.grid)?;
    contraction_monitor(a, &b, &hi, cfg.tau_end, cfg.sample_every, cfg.dtau)
}

fn run_ordering(
    o: &OrderingConfig,
    a: &RadialState,
    cfg: &EvolveConfig,
) -> fdlab::Result<(Vec<[f64; 2]>, OrderingSummary)> {
    let b = build_initial(o.partner, &a.params, &a.grid)?;
    let gap =
        |x: &RadialState, y: &RadialState| x.u.iter().zip(&y.u).map(|(u, v)| (v - u) / v).fold(f64::INFINITY, f64::min);
    let initially_ordered = gap(a, &b) >= 0.0;
    let mut min_steps = f64::INFINITY;
    let samples = evolve_pair(a, &b, cfg.tau_end, cfg.sample_every, cfg.dtau, |x, y, _| {
        min_steps = min_steps.min(gap(x, y));
        Ok(())
    })?;
    let rows: Vec<[f64; 2]> = samples.iter().map(|(x, y)| [x.tau, gap(x, y)]).collect();
    let min_samples = rows.iter().map(|r| r[1]).fold(f64::INFINITY, f64::min);
    Ok((rows, OrderingSummary { initially_ordered, min_rel_gap_samples: min_samples, min_rel_gap_steps: min_steps }))
}

fn run_main(cfg: &EvolveConfig, init: &RadialState, reference: Option<&[f64]>) -> fdlab::Result<Evolution> {
    let p = &init.params;
    let family = match cfg.envelope {
        Some(e) => Some(ProfileFamily::new(p, e.r_max)?),
        None => None,
    };
    let env = |s: &RadialState| match (&family, cfg.envelope) {
        (Some(f), Some(e)) => lambda_envelope(s, f, e.lam_lo, e.lam_hi, e.tol),
        _ => Ok(f64::NAN),
    };
    let opts = EvolveOptions {
        reference,
        weight_p0: if p.regime.is_c1() { p.p0 } else { None },
        sup_radius: cfg.sup_radius,
        envelope: family.as_ref().map(|_| &env as &fdlab::evolver::EnvelopeFn),
        dtau: cfg.dtau,
        keep_states: cfg.aronson_benilan.is_some(),
    };
    evolve(init, cfg.tau_end, cfg.sample_every, &opts)
}

type Pairs = Vec<(RadialState, RadialState)>;

pub fn run(cfg: &EvolveConfig, out: &Path) -> CliResult<EvolveSummary> {
    let p = cfg.params.derive()?;
    validate(cfg, &p)?;
    let r_max = cfg.grid.r_max.unwrap_or_else(|| cfg.initial.default_radius());
    let grid = RadialGrid::graded(cfg.grid.h, r_max, p.n)?;
    let init = build_initial(cfg.initial, &p, &grid)?;
    let reference = match cfg.reference_lambda {
        Some(l) => Some(profile_on_grid(&p, l, &grid)?),
        None => None,
    };

    let mut main = None;
    let mut contraction = None;
    let mut ordering = None;
    rayon::scope(|s| {
        s.spawn(|_| main = Some(run_main(cfg, &init, reference.as_deref())));
        if let Some(c) = &cfg.contraction {
            s.spawn(|_| contraction = Some(run_contraction(c, &init, cfg)));
        }
        if let Some(o) = &cfg.ordering {
            s.spawn(|_| ordering = Some(run_ordering(o, &init, cfg)));
        }
    });
    let ev = main.expect("main run")?;
    let contraction: Option<(ContractionRecord, Pairs)> = contraction.transpose()?;
    let ordering = ordering.transpose()?;

    let rep = &ev.report;
    rep.write_csv(&out.join("report.csv"))?;

    let lambda_env_strictly_decreasing = if cfg.envelope.is_some() {
        let recs: Vec<EnvelopeRecord> = (0..rep.taus.len())
            .map(|i| EnvelopeRecord {
                tau: rep.taus[i],
                lambda: rep.lambda_env[i].unwrap_or(f64::NAN),
                center_value: rep.center_value[i],
            })
            .collect();
        write_envelope_csv(&out.join("envelope.csv"), &recs)?;
        let lam: Vec<f64> = recs.iter().map(|r| r.lambda).collect();
        Some(strictly_decreasing(&lam))
    } else {
        None
    };

    // L¹ rate over τ ≥ 1, dropping samples within 10× of the scheme's floor
    // when the contraction partner is the reference profile itself.
    let floor: Option<Vec<f64>> = match (&contraction, cfg.contraction, cfg.reference_lambda, reference.as_deref()) {
        (Some((_, pairs)), Some(c), Some(l), Some(f)) if c.partner == (InitialKind::ProfileExact { lambda_0: l }) => {
            Some(pairs.iter().map(|(_, b)| l1_distance(&b.grid.r, &b.u, f, p.n)).collect::<fdlab::Result<_>>()?)
        }
        _ => None,
    };
    let (mut t, mut y) = (Vec::new(), Vec::new());
    for (i, tau) in rep.taus.iter().enumerate() {
        if let Some(d) = rep.l1_dist[i] {
            let fl = floor.as_ref().map_or(0.0, |f| f[i]);
            if *tau >= 1.0 && d > 10.0 * fl && d > 0.0 {
                t.push(*tau);
                y.push(d);
            }
        }
    }
    let l1_rate = decay_fit(&t, &y);
    let l1_rate_window = l1_rate.map(|_| [t[0], t[t.len() - 1]]);

    let contraction_summary = match &contraction {
        Some((rec, _)) => {
            rec.write_csv(&out.join("contraction.csv"))?;
            Some(ContractionSummary { max_increase: rec.max_increase(), max_budget_ratio: rec.max_budget_ratio() })
        }
        None => None,
    };
    let ordering_summary = match ordering {
        Some((rows, summary)) => {
            io::write_csv(
                &out.join("ordering.csv"),
                &["tau", "min_rel_gap"],
                rows.iter().map(|r| vec![Some(r[0]), Some(r[1])]),
            )?;
            Some(summary)
        }
        None => None,
    };
    let aronson_benilan = match cfg.aronson_benilan {
        Some(ab) => {
            let slices = ev
                .samples
                .iter()
                .filter(|s| s.tau >= ab.tau_min)
                .map(|s| reconstruct_original(s, ab.extinction_time, original_time(s.tau, ab.extinction_time)))
                .collect::<fdlab::Result<Vec<_>>>()?;
            let r = aronson_benilan_check(&slices, p.m)?;
            io::write_json(&out.join("aronson_benilan.json"), &r)?;
            Some(r)
        }
        None => None,
    };

    let fin = &ev.final_state;
    let max_rel_change = fin.u.iter().zip(&init.u).map(|(a, b)| (a - b).abs() / b).fold(0.0, f64::max);
    let summary = EvolveSummary {
        regime: classify(&p),
        initial: cfg.initial,
        grid: GridInfo { h: grid.h, r_max: grid.r_max(), nodes: grid.len(), cfl: grid.cfl(p.beta) },
        samples: rep.taus.len(),
        tau_end: fin.tau,
        center_start: rep.center_value[0],
        center_end: *rep.center_value.last().unwrap(),
        center_strictly_decreasing: strictly_decreasing(&rep.center_value),
        max_rel_change,
        sup_dist_start: rep.sup_dist[0],
        sup_dist_end: *rep.sup_dist.last().unwrap(),
        l1_rate,
        l1_rate_window,
        decay_rate: p.decay_rate,
        lambda_env_strictly_decreasing,
        contraction: contraction_summary,
        ordering: ordering_summary,
        aronson_benilan,
        params: p,
    };
    io::write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}
