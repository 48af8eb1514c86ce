use std::collections::BTreeMap;
use std::path::Path;

use fdlab::{classify, derive_params, io, Error, RegimeLabel};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::config::{merge, parse, EvolveConfig, ProfileConfig, RunCommand, SweepConfig};
use crate::fail::{input, CliError, CliResult};
use crate::{evolve, profile};

#[derive(Debug, Serialize)]
pub struct RegimeTableSummary {
    pub points: usize,
    /// Points below `β_e`, which have no self-similar profile.
    pub skipped: usize,
    pub counts: BTreeMap<String, usize>,
    pub csv: String,
}

#[derive(Debug, Serialize)]
pub struct RunEntry {
    pub dir: String,
    pub overrides: Value,
    pub exit_code: u8,
    pub error: Option<String>,
    pub summary: Option<Value>,
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum SweepSummary {
    RegimeTable(RegimeTableSummary),
    Runs { command: RunCommand, runs: Vec<RunEntry> },
}

fn opt(x: Option<f64>) -> String {
    io::fmt_num(x)
}

/// `m` on `(0, m_c)` and `β` from `0.95 β_e` to `1.5 β₁`, plus `β₁` itself.
fn regime_table(dims: &[u32], m_points: usize, beta_points: usize, out: &Path) -> CliResult<RegimeTableSummary> {
    if dims.is_empty() || m_points == 0 || beta_points < 2 {
        return Err(input("regime_table needs dims, m_points >= 1 and beta_points >= 2"));
    }
    let mut s = String::from("n,m,beta,label,sign_a1,a1,gamma_1,gamma_2,beta_e,beta_0,beta_1\n");
    let (mut points, mut skipped) = (0, 0);
    let mut counts = BTreeMap::new();
    for &n in dims {
        let nf = f64::from(n);
        let m_c = (nf - 2.0) / nf;
        for k in 1..=m_points {
            let m = m_c * k as f64 / (m_points + 1) as f64;
            let base = derive_params(n, m, 1e9)?;
            let (be, b1) = (base.beta_e, base.beta_1);
            let mut betas: Vec<f64> = (0..beta_points)
                .map(|j| 0.95 * be + (1.5 * b1 - 0.95 * be) * j as f64 / (beta_points - 1) as f64)
                .collect();
            betas.push(b1);
            for beta in betas {
                let p = match derive_params(n, m, beta) {
                    Err(Error::SubcriticalBeta { .. }) => {
                        skipped += 1;
                        continue;
                    }
                    other => other?,
                };
                points += 1;
                let reg = classify(&p);
                *counts.entry(reg.label.to_string()).or_insert(0) += 1;
                let sign = reg.sign_a1.map(|s| serde_json::to_value(s).unwrap().as_str().unwrap_or("").to_string());
                s.push_str(&format!(
                    "{n},{},{},{},{},{},{},{},{},{},{}\n",
                    opt(Some(m)),
                    opt(Some(beta)),
                    reg.label,
                    sign.unwrap_or_default(),
                    opt(p.a1),
                    opt(p.gamma_1),
                    opt(p.gamma_2),
                    opt(Some(p.beta_e)),
                    opt(Some(p.beta_0)),
                    opt(Some(p.beta_1)),
                ));
            }
        }
    }
    let csv = "regime_table.csv".to_string();
    io::write_atomic(&out.join(&csv), s.as_bytes())?;
    counts.entry(RegimeLabel::Unsupported.to_string()).or_insert(0);
    Ok(RegimeTableSummary { points, skipped, counts, csv })
}

enum Job {
    Profile(ProfileConfig),
    Evolve(Box<EvolveConfig>),
}

fn run_job(job: &Job, dir: &Path) -> CliResult<Value> {
    let v = match job {
        Job::Profile(c) => serde_json::to_value(profile::run(c, dir)?),
        Job::Evolve(c) => serde_json::to_value(evolve::run(c, dir)?),
    };
    v.map_err(|e| CliError::from(Error::from(e)))
}

pub fn run(cfg: &SweepConfig, out: &Path) -> CliResult<SweepSummary> {
    let summary = match cfg {
        SweepConfig::RegimeTable { dims, m_points, beta_points } => {
            SweepSummary::RegimeTable(regime_table(dims, *m_points, *beta_points, out)?)
        }
        SweepConfig::Runs { command, base, overrides } => {
            if overrides.is_empty() {
                return Err(input("runs sweep needs at least one override (use {} for the base)"));
            }
            // Every merged config is checked before anything runs.
            let jobs = overrides
                .iter()
                .enumerate()
                .map(|(k, patch)| {
                    let mut v = base.clone();
                    merge(&mut v, patch);
                    let what = format!("run_{k}");
                    Ok(match command {
                        RunCommand::Profile => Job::Profile(parse(v, &what)?),
                        RunCommand::Evolve => Job::Evolve(Box::new(parse(v, &what)?)),
                    })
                })
                .collect::<CliResult<Vec<Job>>>()?;
            let runs = jobs
                .par_iter()
                .enumerate()
                .map(|(k, job)| {
                    let dir = format!("run_{k}");
                    let (exit_code, error, summary) = match run_job(job, &out.join(&dir)) {
                        Ok(s) => (0, None, Some(s)),
                        Err(e) => (e.code, Some(e.message), None),
                    };
                    RunEntry { dir, overrides: overrides[k].clone(), exit_code, error, summary }
                })
                .collect();
            SweepSummary::Runs { command: *command, runs }
        }
    };
    io::write_json(&out.join("summary.json"), &summary)?;
    if let SweepSummary::Runs { runs, .. } = &summary {
        if let Some(bad) = runs.iter().find(|r| r.exit_code != 0) {
            return Err(CliError {
                code: bad.exit_code,
                message: format!("{}: {}", bad.dir, bad.error.as_deref().unwrap_or("")),
            });
        }
    }
    Ok(summary)
}
