//! Rescaled radial flow `ũ_τ = Δũ^m + αũ + βr ũ_r` on a truncated ball.
//!
//! Node-centred finite volumes on a grid that is uniform on `[0, 1]` and
//! geometric beyond. Each step solves one tridiagonal system per sweep:
//! diffusion is implicit with the secant coefficient
//! `(F(u_{i+1}) − F(u_i))/(u_{i+1} − u_i)`, `F = u^m`, frozen at the current
//! iterate; advection is implicit and conservative, central where that keeps
//! the matrix an M-matrix and upwind elsewhere; the zeroth-order term is
//! implicit when it damps and explicit when it grows. Two sweeps are taken
//! per step. The outer node keeps its initial value.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp;
use crate::io;
use crate::ode::Tolerances;
use crate::profile::solve_profile_at;
use crate::quadrature;
use crate::regimes::ParamSet;
use crate::tridiag;

/// Halvings of `dτ` allowed before a step is declared failed.
pub const MAX_RETRIES: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    pub r: Vec<f64>,
    /// `faces[i]` sits between `r[i]` and `r[i+1]`: at the midpoint on the
    /// uniform part, at the geometric mean on the graded part.
    pub faces: Vec<f64>,
    /// Faces on the graded part, where fluxes are exact for power laws.
    pub log_face: Vec<bool>,
    /// Cell measure `∫ r^{n−1} dr` around each node (without `ω_{n−1}`).
    pub vol: Vec<f64>,
    /// Diffusive geometry per face: `r_f^{n−1}/Δr`, or `r_f^{n−2}/Δ ln r`
    /// on the graded part.
    geo: Vec<f64>,
    /// `r_f^n` per face.
    face_pow: Vec<f64>,
    pub h: f64,
    pub n: u32,
}

impl RadialGrid {
    /// Uniform spacing `h` on `[0, 1]`, ratio `1 + h` beyond, ending at `r_max`.
    pub fn graded(h: f64, r_max: f64, n: u32) -> Result<RadialGrid> {
        if !(h > 0.0 && h <= 0.5) {
            return Err(Error::InvalidGrid(format!("spacing h = {h} must lie in (0, 0.5]")));
        }
        if !(r_max > 1.0 && r_max.is_finite()) {
            return Err(Error::InvalidGrid(format!("outer radius {r_max} must exceed 1")));
        }
        let k = (1.0 / h).round() as usize;
        let mut r: Vec<f64> = (0..=k).map(|i| i as f64 / k as f64).collect();
        let mut last = 1.0;
        loop {
            let next = last * (1.0 + h);
            if next >= r_max * (1.0 - 0.5 * h) {
                break;
            }
            r.push(next);
            last = next;
        }
        r.push(r_max);
        Ok(Self::from_nodes(r, h, n))
    }

    fn from_nodes(r: Vec<f64>, h: f64, n: u32) -> RadialGrid {
        let nf = f64::from(n);
        let log_face: Vec<bool> = r.windows(2).map(|w| w[0] >= 1.0 - 1e-12).collect();
        let faces: Vec<f64> = r
            .windows(2)
            .zip(&log_face)
            .map(|(w, &lg)| if lg { (w[0] * w[1]).sqrt() } else { 0.5 * (w[0] + w[1]) })
            .collect();
        let np = r.len();
        let mut vol = vec![0.0; np];
        for i in 0..np {
            let lo = if i == 0 { 0.0 } else { faces[i - 1] };
            let hi = if i + 1 < np { faces[i] } else { r[np - 1] };
            vol[i] = (hi.powf(nf) - lo.powf(nf)) / nf;
        }
        let geo = (0..np - 1)
            .map(|i| {
                if log_face[i] {
                    faces[i].powf(nf - 2.0) / (r[i + 1] / r[i]).ln()
                } else {
                    faces[i].powf(nf - 1.0) / (r[i + 1] - r[i])
                }
            })
            .collect();
        let face_pow = faces.iter().map(|f| f.powf(nf)).collect();
        RadialGrid { r, faces, log_face, vol, geo, face_pow, h, n }
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.r.last().unwrap()
    }

    /// `0.5 · min Δr/(βr)` over nodes with `r > 0`.
    pub fn cfl(&self, beta: f64) -> f64 {
        let mut best = f64::INFINITY;
        for i in 1..self.len() - 1 {
            best = best.min((self.r[i + 1] - self.r[i]) / (beta * self.r[i]));
        }
        0.5 * best
    }
}

#[derive(Debug, Clone)]
pub struct RadialState {
    pub grid: RadialGrid,
    pub u: Vec<f64>,
    pub tau: f64,
    pub params: ParamSet,
}

/// How to build the initial data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialKind {
    /// `ũ₀ = f_{λ₀}`.
    ProfileExact { lambda_0: f64 },
    /// `ũ₀ = min(f_{λ₁}, f_{λ₂})`.
    MinProfiles { lambda_1: f64, lambda_2: f64 },
    /// `½(f_{λ₁} + f_{λ₂})` inside `blend_inner`, `f_{λ₀}` outside
    /// `blend_outer`, joined smoothly; must lie between `f_{λ₁}` and `f_{λ₂}`.
    SandwichBlend {
        lambda_1: f64,
        lambda_2: f64,
        lambda_0: f64,
        #[serde(default = "default_inner")]
        blend_inner: f64,
        #[serde(default = "default_outer")]
        blend_outer: f64,
    },
}

fn default_inner() -> f64 {
    2.0
}

fn default_outer() -> f64 {
    3.0
}

impl InitialKind {
    pub fn sandwich(lambda_1: f64, lambda_2: f64, lambda_0: f64) -> Self {
        InitialKind::SandwichBlend {
            lambda_1,
            lambda_2,
            lambda_0,
            blend_inner: default_inner(),
            blend_outer: default_outer(),
        }
    }

    pub fn lambdas(&self) -> Vec<f64> {
        match *self {
            InitialKind::ProfileExact { lambda_0 } => vec![lambda_0],
            InitialKind::MinProfiles { lambda_1, lambda_2 } => vec![lambda_1, lambda_2],
            InitialKind::SandwichBlend { lambda_1, lambda_2, lambda_0, .. } => {
                vec![lambda_1, lambda_2, lambda_0]
            }
        }
    }

    /// Outer radius `50/λ_min`.
    pub fn default_radius(&self) -> f64 {
        50.0 / self.lambdas().into_iter().fold(f64::INFINITY, f64::min)
    }
}

/// C² step from 0 at `a` to 1 at `b`.
fn smoothstep(r: f64, a: f64, b: f64) -> f64 {
    let t = ((r - a) / (b - a)).clamp(0.0, 1.0);
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

/// Profile `f_λ` sampled on the evolution grid.
pub fn profile_on_grid(p: &ParamSet, lambda: f64, grid: &RadialGrid) -> Result<Vec<f64>> {
    Ok(solve_profile_at(p, lambda, &grid.r, Tolerances::default())?.values)
}

/// Builds initial data on `grid` and checks the envelope it promises.
pub fn build_initial(kind: InitialKind, p: &ParamSet, grid: &RadialGrid) -> Result<RadialState> {
    for l in kind.lambdas() {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::Domain(format!("lambda = {l} must be positive")));
        }
    }
    let u = match kind {
        InitialKind::ProfileExact { lambda_0 } => profile_on_grid(p, lambda_0, grid)?,
        InitialKind::MinProfiles { lambda_1, lambda_2 } => {
            let a = profile_on_grid(p, lambda_1, grid)?;
            let b = profile_on_grid(p, lambda_2, grid)?;
            a.iter().zip(&b).map(|(x, y)| x.min(*y)).collect()
        }
        InitialKind::SandwichBlend { lambda_1, lambda_2, lambda_0, blend_inner, blend_outer } => {
            if !(blend_inner < blend_outer) {
                return Err(Error::Domain("blend_inner must be below blend_outer".into()));
            }
            let lo = profile_on_grid(p, lambda_1, grid)?;
            let hi = profile_on_grid(p, lambda_2, grid)?;
            let mid = profile_on_grid(p, lambda_0, grid)?;
            let u: Vec<f64> = (0..grid.len())
                .map(|i| {
                    let chi = smoothstep(grid.r[i], blend_inner, blend_outer);
                    (1.0 - chi) * 0.5 * (lo[i] + hi[i]) + chi * mid[i]
                })
                .collect();
            for i in 0..grid.len() {
                if u[i] < lo[i] || u[i] > hi[i] {
                    return Err(Error::BoundViolation { node: i, r: grid.r[i] });
                }
            }
            u
        }
    };
    Ok(RadialState { grid: grid.clone(), u, tau: 0.0, params: p.clone() })
}

/// `(F₁ − F₀)/(u₁ − u₀)` for `F = u^m`, with the derivative as the limit.
fn secant_coeff(u0: f64, u1: f64, f0: f64, f1: f64, m: f64) -> f64 {
    let d = u1 - u0;
    if d.abs() > 1e-7 * u0.abs().max(u1.abs()) {
        (f1 - f0) / d
    } else {
        m * (0.5 * (u0 + u1)).powf(m - 1.0)
    }
}

/// Face coefficients of the spatial operator, frozen at some state.
///
/// The equation is taken in conservation form
/// `ũ_τ = Δũ^m + ∇·(βyũ) + (α − nβ)ũ`, so that
/// `V_i dũ_i/dτ = T_{i+½}(ũ_{i+1} − ũ_i) − T_{i−½}(ũ_i − ũ_{i−1}) +
/// G_{i+½} − G_{i−½} + (α − nβ)V_i ũ_i` with the advective flux
/// `G = βr^n (θ ũ_i + (1 − θ) ũ_{i+1})`. On the uniform part `θ = ½`; on
/// the graded part `θ` reproduces the geometric mean of the two values.
/// Where the diffusion coefficient cannot absorb it, `θ = 0` (upwind for
/// the inward drift). The discrete mass `Σ V_i ũ_i` then obeys the same
/// balance law as its continuum counterpart.
struct Faces {
    trans: Vec<f64>,
    adv: Vec<f64>,
    theta: Vec<f64>,
}

/// `ln(1 + x)/x`, continuous at 0.
fn ln1p_ratio(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - 0.5 * x
    } else {
        x.ln_1p() / x
    }
}

fn faces(st: &RadialState, iter: &[f64]) -> Faces {
    let g = &st.grid;
    let m = st.params.m;
    let beta = st.params.beta;
    let fm: Vec<f64> = iter.iter().map(|u| u.powf(m)).collect();
    let nfaces = g.len() - 1;
    let mut trans = Vec::with_capacity(nfaces);
    let mut adv = Vec::with_capacity(nfaces);
    let mut theta = Vec::with_capacity(nfaces);
    for i in 0..nfaces {
        let (u0, u1) = (iter[i], iter[i + 1]);
        let a = beta * g.face_pow[i];
        let (t, th) = if g.log_face[i] {
            // dF/ds from the log-secant, face value the geometric mean
            let t = g.geo[i] * (fm[i] * fm[i + 1]).sqrt() * m * ln1p_ratio((u1 - u0) / u0) / u0;
            let (s0, s1) = (u0.sqrt(), u1.sqrt());
            (t, s1 / (s0 + s1))
        } else {
            (g.geo[i] * secant_coeff(u0, u1, fm[i], fm[i + 1], m), 0.5)
        };
        trans.push(t);
        adv.push(a);
        theta.push(if t >= th * a { th } else { 0.0 });
    }
    Faces { trans, adv, theta }
}

/// One linear sweep with coefficients frozen at `iter`.
fn sweep(st: &RadialState, iter: &[f64], dtau: f64) -> Result<Vec<f64>> {
    let g = &st.grid;
    let p = &st.params;
    let np = g.len();
    let nu = np - 1;
    let u_out = st.u[np - 1];
    let fc = faces(st, iter);
    let react = p.alpha - f64::from(g.n) * p.beta;
    let mut lower = vec![0.0; nu];
    let mut diag = vec![0.0; nu];
    let mut upper = vec![0.0; nu];
    let mut rhs = vec![0.0; nu];
    for i in 0..nu {
        diag[i] = g.vol[i] / dtau;
        rhs[i] = g.vol[i] * st.u[i] / dtau;
        // decay implicit, growth explicit
        if react <= 0.0 {
            diag[i] -= react * g.vol[i];
        } else {
            rhs[i] += react * g.vol[i] * st.u[i];
        }
    }
    for f in 0..nu {
        // face f joins nodes f and f + 1
        let (t, a, th) = (fc.trans[f], fc.adv[f], fc.theta[f]);
        // row f: −T(u_{f+1} − u_f) − G
        diag[f] += t - a * th;
        let up = -t - a * (1.0 - th);
        if f + 1 < nu {
            upper[f] += up;
            // row f + 1: +T(u_{f+1} − u_f) + G
            diag[f + 1] += t + a * (1.0 - th);
            lower[f + 1] += -t + a * th;
        } else {
            rhs[f] -= up * u_out;
        }
    }
    let mut u = tridiag::solve(&lower, &diag, &upper, &rhs)?;
    u.push(u_out);
    Ok(u)
}

fn try_step(st: &RadialState, dtau: f64) -> Result<Option<Vec<f64>>> {
    let pred = sweep(st, &st.u, dtau)?;
    if pred.iter().any(|v| !(*v > 0.0)) {
        return Ok(None);
    }
    let u = sweep(st, &pred, dtau)?;
    if u.iter().any(|v| !(*v > 0.0)) {
        return Ok(None);
    }
    Ok(Some(u))
}

/// Advances by `dtau` (halving on loss of positivity). The returned state
/// records the step actually taken in `tau`.
pub fn step(st: &RadialState, dtau: f64) -> Result<RadialState> {
    let cap = st.grid.cfl(st.params.beta);
    if !(dtau > 0.0) || dtau > cap * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("dtau = {dtau} must lie in (0, {cap}]")));
    }
    let mut dt = dtau;
    for _ in 0..=MAX_RETRIES {
        if let Some(u) = try_step(st, dt)? {
            return Ok(RadialState { grid: st.grid.clone(), u, tau: st.tau + dt, params: st.params.clone() });
        }
        dt *= 0.5;
    }
    let node = st.u.iter().position(|v| !(*v > 0.0)).unwrap_or(0);
    Err(Error::NegativeValue { node, retries: MAX_RETRIES })
}

/// Steps two states with one shared `dτ` sequence, halving for both when
/// either loses positivity.
pub fn step_pair(a: &RadialState, b: &RadialState, dtau: f64) -> Result<(RadialState, RadialState)> {
    let cap = a.grid.cfl(a.params.beta);
    if !(dtau > 0.0) || dtau > cap * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("dtau = {dtau} must lie in (0, {cap}]")));
    }
    if a.grid != b.grid {
        return Err(Error::GridMismatch("paired states must share a grid".into()));
    }
    let mut dt = dtau;
    for _ in 0..=MAX_RETRIES {
        if let (Some(ua), Some(ub)) = (try_step(a, dt)?, try_step(b, dt)?) {
            let next =
                |s: &RadialState, u| RadialState { grid: s.grid.clone(), u, tau: s.tau + dt, params: s.params.clone() };
            return Ok((next(a, ua), next(b, ub)));
        }
        dt *= 0.5;
    }
    Err(Error::NegativeValue { node: 0, retries: MAX_RETRIES })
}

/// Semi-discrete right-hand side `dũ/dτ` of the scheme at `st`; zero at the
/// outer node.
pub fn semi_discrete_rhs(st: &RadialState) -> Vec<f64> {
    let g = &st.grid;
    let p = &st.params;
    let u = &st.u;
    let np = g.len();
    let fc = faces(st, u);
    let react = p.alpha - f64::from(g.n) * p.beta;
    let mut out: Vec<f64> = (0..np).map(|i| react * g.vol[i] * u[i]).collect();
    for f in 0..np - 1 {
        let flux = fc.trans[f] * (u[f + 1] - u[f]) + fc.adv[f] * (fc.theta[f] * u[f] + (1.0 - fc.theta[f]) * u[f + 1]);
        out[f] += flux;
        out[f + 1] -= flux;
    }
    for i in 0..np {
        out[i] /= g.vol[i];
    }
    out[np - 1] = 0.0;
    out
}

/// Discrete mass `Σ V_i ũ_i` (without `ω_{n−1}`).
pub fn discrete_mass(grid: &RadialGrid, u: &[f64]) -> f64 {
    grid.vol.iter().zip(u).map(|(v, x)| v * x).sum()
}

/// Diagnostic time series of one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvolutionReport {
    pub taus: Vec<f64>,
    pub sup_dist: Vec<Option<f64>>,
    pub l1_dist: Vec<Option<f64>>,
    pub wl1_dist: Vec<Option<f64>>,
    pub center_value: Vec<f64>,
    pub lambda_env: Vec<Option<f64>>,
}

impl EvolutionReport {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let rows = (0..self.taus.len()).map(|i| {
            vec![
                Some(self.taus[i]),
                self.sup_dist[i],
                self.l1_dist[i],
                self.wl1_dist[i],
                Some(self.center_value[i]),
                self.lambda_env[i],
            ]
        });
        io::write_csv(path, &["tau", "sup_dist", "l1_dist", "wl1_dist", "center_value", "lambda_env"], rows)
    }
}

/// Envelope callback used for `lambda_env`.
pub type EnvelopeFn<'a> = dyn Fn(&RadialState) -> Result<f64> + 'a;

#[derive(Default)]
pub struct EvolveOptions<'a> {
    /// Reference profile sampled on the evolution grid.
    pub reference: Option<&'a [f64]>,
    /// Weight exponent for `wl1_dist`.
    pub weight_p0: Option<f64>,
    /// `sup_dist` is taken over `r ≤ sup_radius` (default `R/2`).
    pub sup_radius: Option<f64>,
    pub envelope: Option<&'a EnvelopeFn<'a>>,
    /// Step size; defaults to the CFL bound.
    pub dtau: Option<f64>,
    /// Keep a copy of the state at each sample.
    pub keep_states: bool,
}

pub struct Evolution {
    pub report: EvolutionReport,
    pub final_state: RadialState,
    pub samples: Vec<RadialState>,
}

fn record(st: &RadialState, opts: &EvolveOptions, rep: &mut EvolutionReport) -> Result<()> {
    let g = &st.grid;
    let p = &st.params;
    rep.taus.push(st.tau);
    rep.center_value.push(st.u[0]);
    match opts.reference {
        Some(f) => {
            let rad = opts.sup_radius.unwrap_or(0.5 * g.r_max());
            let sup = (0..g.len())
                .filter(|&i| g.r[i] <= rad * (1.0 + 1e-12))
                .map(|i| (st.u[i] - f[i]).abs())
                .fold(0.0, f64::max);
            rep.sup_dist.push(Some(sup));
            rep.l1_dist.push(Some(quadrature::l1_distance(&g.r, &st.u, f, g.n)?));
            rep.wl1_dist.push(match opts.weight_p0 {
                Some(p0) => Some(quadrature::weighted_l1(&g.r, &st.u, f, g.n, p.m, p.c_star, p0)?),
                None => None,
            });
        }
        None => {
            rep.sup_dist.push(None);
            rep.l1_dist.push(None);
            rep.wl1_dist.push(None);
        }
    }
    rep.lambda_env.push(match opts.envelope {
        Some(env) if p.regime.is_c2() => Some(env(st)?),
        _ => None,
    });
    Ok(())
}

/// Sample times `0, Δ, 2Δ, …` up to `tau_end` (inclusive).
pub fn sample_times(tau_end: f64, sample_every: f64) -> Vec<f64> {
    let k = (tau_end / sample_every + 1e-9).floor() as usize;
    let mut t: Vec<f64> = (0..=k).map(|i| i as f64 * sample_every).collect();
    if tau_end - t[k] > 1e-9 * sample_every {
        t.push(tau_end);
    }
    t
}

/// Runs to `tau_end`, sampling diagnostics on a fixed time lattice.
pub fn evolve(init: &RadialState, tau_end: f64, sample_every: f64, opts: &EvolveOptions) -> Result<Evolution> {
    if !(tau_end > 0.0 && sample_every > 0.0) {
        return Err(Error::Domain("tau_end and sample_every must be positive".into()));
    }
    if let Some(f) = opts.reference {
        if f.len() != init.grid.len() {
            return Err(Error::GridMismatch("reference profile is not on the evolution grid".into()));
        }
    }
    let cap = init.grid.cfl(init.params.beta);
    let dt = opts.dtau.unwrap_or(cap).min(cap);
    let times = sample_times(tau_end, sample_every);
    let mut rep = EvolutionReport::default();
    let mut samples = Vec::new();
    let mut st = init.clone();
    let t0 = st.tau;
    record(&st, opts, &mut rep)?;
    if opts.keep_states {
        samples.push(st.clone());
    }
    for &target in &times[1..] {
        let target = t0 + target;
        while target - st.tau > 1e-12 * target.max(1.0) {
            let h = dt.min(target - st.tau);
            st = step(&st, h)?;
        }
        st.tau = target;
        record(&st, opts, &mut rep)?;
        if opts.keep_states {
            samples.push(st.clone());
        }
    }
    Ok(Evolution { report: rep, final_state: st, samples })
}

/// Runs two states in lockstep with identical `dτ` sequences. `on_step`
/// sees both states after every step together with the step taken; the
/// states at the sample times are returned.
pub fn evolve_pair<F>(
    a: &RadialState,
    b: &RadialState,
    tau_end: f64,
    sample_every: f64,
    dtau: Option<f64>,
    mut on_step: F,
) -> Result<Vec<(RadialState, RadialState)>>
where
    F: FnMut(&RadialState, &RadialState, f64) -> Result<()>,
{
    if !(tau_end > 0.0 && sample_every > 0.0) {
        return Err(Error::Domain("tau_end and sample_every must be positive".into()));
    }
    if a.grid != b.grid || a.params != b.params {
        return Err(Error::GridMismatch("paired runs must share grid and parameters".into()));
    }
    let cap = a.grid.cfl(a.params.beta);
    let dt = dtau.unwrap_or(cap).min(cap);
    let times = sample_times(tau_end, sample_every);
    let (mut x, mut y) = (a.clone(), b.clone());
    let t0 = x.tau;
    let mut out = vec![(x.clone(), y.clone())];
    for &target in &times[1..] {
        let target = t0 + target;
        while target - x.tau > 1e-12 * target.max(1.0) {
            let before = x.tau;
            let (nx, ny) = step_pair(&x, &y, dt.min(target - x.tau))?;
            x = nx;
            y = ny;
            on_step(&x, &y, x.tau - before)?;
        }
        x.tau = target;
        y.tau = target;
        out.push((x.clone(), y.clone()));
    }
    Ok(out)
}

/// A radial slice of `u(·, t)` in the original variables.
#[derive(Debug, Clone, PartialEq)]
pub struct OriginalSlice {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
}

/// `u(x, t) = (T−t)^α ũ((T−t)^β x, τ)` with `t = T(1 − e^{−τ})`.
pub fn reconstruct_original(st: &RadialState, big_t: f64, t: f64) -> Result<OriginalSlice> {
    if !(big_t > 0.0 && t >= 0.0 && t < big_t) {
        return Err(Error::Domain(format!("need 0 <= t < T, got t = {t}, T = {big_t}")));
    }
    let p = &st.params;
    let rem = big_t - t;
    let sx = rem.powf(p.beta);
    let su = rem.powf(p.alpha);
    Ok(OriginalSlice { t, x: st.grid.r.iter().map(|r| r / sx).collect(), u: st.u.iter().map(|v| su * v).collect() })
}

/// `t` corresponding to `τ` for extinction time `T`.
pub fn original_time(tau: f64, big_t: f64) -> f64 {
    -big_t * (-tau).exp_m1()
}

/// Piecewise-linear value of a slice at `x`, `None` outside its range.
pub fn slice_value(sl: &OriginalSlice, x: f64) -> Option<f64> {
    if x < sl.x[0] || x > *sl.x.last().unwrap() {
        return None;
    }
    Some(interp::linear(&sl.x, &sl.u, x))
}
