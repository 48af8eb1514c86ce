//! Radial self-similar profiles `f_λ`.
//!
//! The profile solves
//! `(f^m)'' + (n−1)/r (f^m)' + α f + β r f' = 0`, `f(0) = λ^{2/(1−m)}`, `f'(0) = 0`.
//! Near the origin a two-term series is used. On `[ε, 1]` the equation is
//! integrated in `r` with state `(f, (f^m)')`. Beyond `r = 1` it is
//! integrated in `s = ln r` for `w = g − 1`, where
//! `g = (C*^{−1/(1−m)} r^{2/(1−m)} f)^m → 1`; carrying `w` instead of `f`
//! keeps full relative precision in the far-field correction.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp;
use crate::io;
use crate::ode::{self, Tolerances};
use crate::regimes::ParamSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    /// Series-start radius in units where `λ = 1`; the actual start is `r_inner/λ`.
    pub r_inner: f64,
    pub r_max: f64,
    pub nodes_per_decade: usize,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { r_inner: 1e-4, r_max: 1e3, nodes_per_decade: 64, rtol: 1e-10, atol: 1e-13 }
    }
}

impl GridSpec {
    pub fn with_r_max(r_max: f64) -> Self {
        GridSpec { r_max, ..GridSpec::default() }
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances { rtol: self.rtol, atol: self.atol }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_inner > 0.0 && self.r_inner < 1.0) {
            return Err(Error::InvalidGrid(format!("r_inner = {} must lie in (0, 1)", self.r_inner)));
        }
        if !(self.r_max >= 1.0 && self.r_max.is_finite()) {
            return Err(Error::InvalidGrid(format!("r_max = {} must be at least 1", self.r_max)));
        }
        if self.nodes_per_decade == 0 {
            return Err(Error::InvalidGrid("nodes_per_decade must be positive".into()));
        }
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::InvalidGrid("tolerances must be positive".into()));
        }
        Ok(())
    }

    /// `0` followed by `r_inner·10^{k/N}/λ` up to `r_max`, with `r_max`
    /// appended when it is not itself a node.
    pub fn nodes(&self, lambda: f64) -> Result<Vec<f64>> {
        self.validate()?;
        let eps = self.r_inner / lambda;
        if eps >= self.r_max {
            return Err(Error::InvalidGrid(format!("series start {eps} is not below r_max = {}", self.r_max)));
        }
        let mut out = vec![0.0];
        let per = self.nodes_per_decade as f64;
        let mut k = 0u32;
        loop {
            let r = (self.r_inner * 10f64.powf(f64::from(k) / per)) / lambda;
            if r > self.r_max * (1.0 + 1e-12) {
                break;
            }
            out.push(r);
            k += 1;
        }
        let last = *out.last().unwrap();
        if (self.r_max - last) > 1e-9 * self.r_max {
            out.push(self.r_max);
        }
        Ok(out)
    }
}

/// A solved profile on a grid starting at `r = 0`.
#[derive(Debug, Clone)]
pub struct Profile {
    pub params: ParamSet,
    pub lambda: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
    pub tol: Tolerances,
    /// `w = g − 1` at each node, carried at full precision from the solver.
    pub w: Vec<f64>,
    /// `dw/ds` at each node.
    pub wprime: Vec<f64>,
}

/// `φ(z) = (1+z)^{1/m} − 1 − z/m`.
pub fn phi(z: f64, m: f64) -> f64 {
    let p = 1.0 / m;
    if z.abs() < 0.1 {
        // Binomial series from the quadratic term; avoids the cancellation.
        let mut coef = p * (p - 1.0) / 2.0;
        let mut zk = z * z;
        let mut sum = 0.0;
        for k in 2..200 {
            let term = coef * zk;
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() || coef == 0.0 {
                break;
            }
            coef *= (p - k as f64) / (k as f64 + 1.0);
            zk *= z;
        }
        sum
    } else {
        (1.0 + z).powf(p) - 1.0 - z * p
    }
}

/// `φ'(z) = ((1+z)^{1/m−1} − 1)/m`.
pub fn phi_prime(z: f64, m: f64) -> f64 {
    ((1.0 / m - 1.0) * z.ln_1p()).exp_m1() / m
}

/// Value of `(C*/r²)^{1/(1−m)}`.
pub fn singular_profile(p: &ParamSet, r: f64) -> Result<f64> {
    p.singular_profile(r)
}

/// Closed-form profile at `β = β₁`: `(C*/(k² + r²))^{1/(1−m)}` with `k = √C*/λ`.
pub fn barenblatt_profile(p: &ParamSet, lambda: f64, r: f64) -> Result<f64> {
    if !p.is_barenblatt() {
        return Err(Error::WrongBeta { beta: p.beta, beta_1: p.beta_1 });
    }
    let k2 = p.c_star / (lambda * lambda);
    Ok((p.c_star / (k2 + r * r)).powf(1.0 / (1.0 - p.m)))
}

/// Derivative of [`barenblatt_profile`] in `r`.
pub fn barenblatt_derivative(p: &ParamSet, lambda: f64, r: f64) -> Result<f64> {
    let f = barenblatt_profile(p, lambda, r)?;
    let k2 = p.c_star / (lambda * lambda);
    Ok(-2.0 * r * f / ((1.0 - p.m) * (k2 + r * r)))
}

struct Consts {
    n: f64,
    m: f64,
    alpha: f64,
    beta: f64,
    // damping constant and reaction factor of the w-equation
    a: f64,
    bc: f64,
    k: f64,
    // C*^{1/(1−m)}
    cs: f64,
}

impl Consts {
    fn new(p: &ParamSet) -> Self {
        let n = p.dim();
        let m = p.m;
        Consts {
            n,
            m,
            alpha: p.alpha,
            beta: p.beta,
            a: (n - 2.0 - (n + 2.0) * m) / (1.0 - m),
            bc: p.beta * p.c_star / m,
            k: p.c_star / (1.0 - m),
            cs: p.c_star.powf(1.0 / (1.0 - m)),
        }
    }

    fn r_rhs(&self, r: f64, y: &[f64; 2]) -> Option<[f64; 2]> {
        let f = y[0];
        if !(f > 0.0) || !f.is_finite() {
            return None;
        }
        let fp = y[1] * f.powf(1.0 - self.m) / self.m;
        let dp = -(self.n - 1.0) / r * y[1] - self.alpha * f - self.beta * r * fp;
        Some([fp, dp])
    }

    fn w_rhs(&self, y: &[f64; 2]) -> Option<[f64; 2]> {
        let w = y[0];
        let g = 1.0 + w;
        if !(g > 0.0) || !w.is_finite() {
            return None;
        }
        let m = self.m;
        let damp = self.a + self.bc * g.powf(1.0 / m - 1.0);
        let react = self.k * (phi(w, m) + w * (1.0 / m - 1.0));
        Some([y[1], -damp * y[1] - react])
    }

    /// `(w, w')` from `(r, f, f')`.
    fn to_w(&self, r: f64, f: f64, fp: f64) -> (f64, f64) {
        if r == 0.0 {
            return (-1.0, 0.0);
        }
        let q = r.powf(2.0 / (1.0 - self.m)) * f / self.cs;
        let g = q.powf(self.m);
        let w = if (g - 1.0).abs() < 0.5 { (self.m * q.ln()).exp_m1() } else { g - 1.0 };
        let wp = self.m * g * (2.0 / (1.0 - self.m) + r * fp / f);
        (w, wp)
    }

    /// `(f, f')` from `(r, w, w')`.
    fn from_w(&self, r: f64, w: f64, wp: f64) -> (f64, f64) {
        let m = self.m;
        let f = self.cs * r.powf(-2.0 / (1.0 - m)) * (1.0 + w).powf(1.0 / m);
        let fp = f / r * (wp / (m * (1.0 + w)) - 2.0 / (1.0 - m));
        (f, fp)
    }
}

/// Solves `f_λ` on the logarithmic grid described by `spec`.
pub fn solve_profile(p: &ParamSet, lambda: f64, spec: &GridSpec) -> Result<Profile> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("lambda = {lambda} must be positive")));
    }
    let nodes = spec.nodes(lambda)?;
    let eps = spec.r_inner / lambda;
    solve_on(p, lambda, eps, nodes, spec.tolerances())
}

/// Solves `f_λ` at the given nodes (`nodes[0] = 0`, strictly increasing).
pub fn solve_profile_at(p: &ParamSet, lambda: f64, nodes: &[f64], tol: Tolerances) -> Result<Profile> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("lambda = {lambda} must be positive")));
    }
    if nodes.len() < 2 || nodes[0] != 0.0 || nodes.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid("nodes must start at 0 and increase strictly".into()));
    }
    let eps = GridSpec::default().r_inner / lambda;
    solve_on(p, lambda, eps, nodes.to_vec(), tol)
}

fn solve_on(p: &ParamSet, lambda: f64, eps: f64, nodes: Vec<f64>, tol: Tolerances) -> Result<Profile> {
    if eps >= 1.0 {
        return Err(Error::InvalidGrid(format!("series start {eps} must be below the switch radius 1")));
    }
    let c = Consts::new(p);
    let m = p.m;
    let f0 = p.center_value(lambda);
    let c2 = p.alpha * f0.powf(2.0 - m) / (2.0 * m * c.n);
    let series = |r: f64| (f0 - c2 * r * r, -2.0 * c2 * r);

    let np = nodes.len();
    let mut values = vec![0.0; np];
    let mut derivs = vec![0.0; np];
    let mut ws = vec![0.0; np];
    let mut wps = vec![0.0; np];

    let mut idx = 0;
    while idx < np && nodes[idx] <= eps {
        let (f, fp) = series(nodes[idx]);
        values[idx] = f;
        derivs[idx] = fp;
        idx += 1;
    }

    // r-phase on (ε, 1), with 1 appended for the handoff.
    let r_start = idx;
    while idx < np && nodes[idx] < 1.0 {
        idx += 1;
    }
    let mut r_out: Vec<f64> = nodes[r_start..idx].to_vec();
    let need_s = idx < np;
    if need_s {
        r_out.push(1.0);
    }
    let (fe, fpe) = series(eps);
    let y0 = [fe, m * fe.powf(m - 1.0) * fpe];
    let r_states = ode::integrate(|r, y| c.r_rhs(r, y), eps, y0, &r_out, tol, eps)?;
    for (j, st) in r_states.iter().take(idx - r_start).enumerate() {
        let i = r_start + j;
        let fp = st[1] * st[0].powf(1.0 - m) / m;
        values[i] = st[0];
        derivs[i] = fp;
    }

    if need_s {
        let st = r_states.last().copied().expect("handoff state");
        let fp1 = st[1] * st[0].powf(1.0 - m) / m;
        let (w1, wp1) = c.to_w(1.0, st[0], fp1);
        let s_out: Vec<f64> = nodes[idx..].iter().map(|r| r.ln()).collect();
        let s_states = ode::integrate(|_, y| c.w_rhs(y), 0.0, [w1, wp1], &s_out, tol, 1e-2)?;
        for (j, st) in s_states.iter().enumerate() {
            let i = idx + j;
            let (f, fp) = c.from_w(nodes[i], st[0], st[1]);
            values[i] = f;
            derivs[i] = fp;
            ws[i] = st[0];
            wps[i] = st[1];
        }
    }

    for i in 0..idx {
        let (w, wp) = c.to_w(nodes[i], values[i], derivs[i]);
        ws[i] = w;
        wps[i] = wp;
    }
    if let Some(i) = values.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::PositivityLoss(nodes[i]));
    }

    Ok(Profile { params: p.clone(), lambda, grid: nodes, values, derivs, tol, w: ws, wprime: wps })
}

/// `f_λ(r) = μ^{2/(1−m)} f_b(μ r)` with `μ = λ/λ_b`, applied node by node.
pub fn rescale_profile(base: &Profile, lambda: f64) -> Profile {
    let mu = lambda / base.lambda;
    let amp = mu.powf(2.0 / (1.0 - base.params.m));
    let grid = if base.lambda == 1.0 {
        base.grid.iter().map(|r| r / lambda).collect()
    } else {
        base.grid.iter().map(|r| r / mu).collect()
    };
    Profile {
        params: base.params.clone(),
        lambda,
        grid,
        values: base.values.iter().map(|v| amp * v).collect(),
        derivs: base.derivs.iter().map(|d| amp * mu * d).collect(),
        tol: base.tol,
        w: base.w.clone(),
        wprime: base.wprime.clone(),
    }
}

impl Profile {
    pub fn r_max(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    /// Monotone cubic interpolation, exact at nodes.
    pub fn evaluate(&self, r: f64) -> Result<f64> {
        let r_max = self.r_max();
        if !(r >= 0.0) || r > r_max * (1.0 + 1e-12) {
            return Err(Error::OutOfRange { r, r_max });
        }
        Ok(self.eval_unchecked(r.min(r_max)))
    }

    pub(crate) fn eval_unchecked(&self, r: f64) -> f64 {
        let i = interp::locate(&self.grid, r);
        let (r0, r1) = (self.grid[i], self.grid[i + 1]);
        if r == r0 {
            return self.values[i];
        }
        if r == r1 {
            return self.values[i + 1];
        }
        let (f0, f1) = (self.values[i], self.values[i + 1]);
        if i == 0 {
            return interp::monotone_hermite(r0, r1, f0, f1, self.derivs[0], self.derivs[1], r);
        }
        // Hermite in (ln r, ln f) with slopes r f'/f.
        let d0 = r0 * self.derivs[i] / f0;
        let d1 = r1 * self.derivs[i + 1] / f1;
        interp::monotone_hermite(r0.ln(), r1.ln(), f0.ln(), f1.ln(), d0, d1, r.ln()).exp()
    }

    /// Checks positivity, `f' < 0`, `αf + βrf' > 0` and the strict
    /// decrease of `r^{n−1}(f^m)'`; returns the first offending radius.
    pub fn verify_invariants(&self) -> std::result::Result<(), String> {
        let p = &self.params;
        let n = p.dim();
        let m = p.m;
        let f0 = p.center_value(self.lambda);
        if (self.values[0] - f0).abs() > 1e-14 * f0 || self.derivs[0] != 0.0 {
            return Err("initial condition".into());
        }
        let mut prev_flux = 0.0;
        for (i, &r) in self.grid.iter().enumerate() {
            let f = self.values[i];
            let fp = self.derivs[i];
            if !(f > 0.0) {
                return Err(format!("f <= 0 at r = {r}"));
            }
            if r > 0.0 && !(fp < 0.0) {
                return Err(format!("f' >= 0 at r = {r}"));
            }
            if !(p.alpha * f + p.beta * r * fp > 0.0) {
                return Err(format!("alpha f + beta r f' <= 0 at r = {r}"));
            }
            let flux = r.powf(n - 1.0) * m * f.powf(m - 1.0) * fp;
            if i > 0 && !(flux < prev_flux) {
                return Err(format!("r^(n-1)(f^m)' not decreasing at r = {r}"));
            }
            prev_flux = flux;
        }
        Ok(())
    }

    /// `r² f^{1−m}` at each node.
    pub fn r2f1m(&self) -> Vec<f64> {
        self.grid.iter().zip(&self.values).map(|(r, f)| r * r * f.powf(1.0 - self.params.m)).collect()
    }

    /// Writes columns `r, f, fprime, r2f1m`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let q = self.r2f1m();
        let rows = (0..self.grid.len())
            .map(|i| vec![Some(self.grid[i]), Some(self.values[i]), Some(self.derivs[i]), Some(q[i])]);
        io::write_csv(path, &["r", "f", "fprime", "r2f1m"], rows)
    }
}
