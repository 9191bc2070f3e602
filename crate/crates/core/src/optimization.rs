//! Least-squares formulation: minimize `f(X) = Σ_i ‖f_i(X)‖_F²` over
//! symmetric tuples with steepest descent, Dai–Yuan conjugate gradients or a
//! trust-region Newton method.
//!
//! `f` is quadratic, so along a ray `X + tD` the defect is `R + tW` with
//! `W = (L + Π)(D)`. Line searches evaluate `f` and its slope from that
//! identity instead of re-applying the operator.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::model::{residual_tuple, Method, MjlsProblem, SolverReport, SymTuple};
use crate::operators::{apply_l_plus_pi, apply_l_plus_pi_adjoint};

/// `f(X) = Σ_i ‖f_i(X)‖_F²`.
pub fn objective(p: &MjlsProblem, x: &SymTuple) -> Result<f64> {
    let r = residual_tuple(p, x)?;
    Ok(r.dot(&r))
}

/// Euclidean gradient `D_i = 2(A_iᵀ f_i + f_i A_i + Σ_j γ_ji f_j)`.
pub fn gradient(p: &MjlsProblem, x: &SymTuple) -> Result<SymTuple> {
    let r = residual_tuple(p, x)?;
    Ok(apply_l_plus_pi_adjoint(p, &r)?.scaled(2.0))
}

/// Hessian action `ξ ↦ 2 (L + Π)* (L + Π)(ξ)`; independent of the point.
pub fn hessian_apply(p: &MjlsProblem, xi: &SymTuple) -> Result<SymTuple> {
    let w = apply_l_plus_pi(p, xi)?;
    Ok(apply_l_plus_pi_adjoint(p, &w)?.scaled(2.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchParams {
    /// Initial trial step.
    pub alpha_bar: f64,
    /// Armijo backtracking factor.
    pub beta: f64,
    /// Armijo sufficient-decrease constant.
    pub sigma: f64,
    /// Wolfe sufficient-decrease constant.
    pub c1: f64,
    /// Wolfe curvature constant.
    pub c2: f64,
    pub max_backtracks: usize,
}

impl Default for LineSearchParams {
    fn default() -> Self {
        LineSearchParams { alpha_bar: 1.0, beta: 0.5, sigma: 1e-4, c1: 1e-4, c2: 0.9, max_backtracks: 100 }
    }
}

impl LineSearchParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| v > 0.0 && v < 1.0;
        if !(self.alpha_bar > 0.0 && self.alpha_bar.is_finite()) {
            return Err(Error::Config(format!("alpha_bar = {} must be positive", self.alpha_bar)));
        }
        if !unit(self.beta) || !unit(self.sigma) {
            return Err(Error::Config("beta and sigma must lie in (0, 1)".into()));
        }
        if !(unit(self.c1) && unit(self.c2) && self.c1 < self.c2) {
            return Err(Error::Config(format!("need 0 < c1 < c2 < 1, got c1={} c2={}", self.c1, self.c2)));
        }
        if self.max_backtracks == 0 {
            return Err(Error::Config("max_backtracks must be at least 1".into()));
        }
        Ok(())
    }
}

/// Trust-region controls. `None` fields are derived from the starting point
/// when the solver begins (see [`solve_tr`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrustRegionParams {
    pub delta_bar: Option<f64>,
    pub delta0: Option<f64>,
    pub rho_prime: f64,
    /// Relative residual target of the inner truncated CG.
    pub tcg_tol: Option<f64>,
    pub tcg_max_iter: Option<usize>,
}

impl Default for TrustRegionParams {
    fn default() -> Self {
        TrustRegionParams { delta_bar: None, delta0: None, rho_prime: 0.1, tcg_tol: None, tcg_max_iter: None }
    }
}

impl TrustRegionParams {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.25).contains(&self.rho_prime) {
            return Err(Error::Config(format!("rho_prime = {} must lie in [0, 1/4)", self.rho_prime)));
        }
        if let Some(db) = self.delta_bar {
            if !(db > 0.0 && db.is_finite()) {
                return Err(Error::Config(format!("delta_bar = {db} must be positive")));
            }
            if let Some(d0) = self.delta0 {
                if !(d0 > 0.0 && d0 < db) {
                    return Err(Error::Config(format!("delta0 = {d0} must lie in (0, delta_bar)")));
                }
            }
        }
        if let Some(t) = self.tcg_tol {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::Config(format!("tcg_tol = {t} must lie in (0, 1)")));
            }
        }
        if self.tcg_max_iter == Some(0) {
            return Err(Error::Config("tcg_max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Termination: `‖grad f‖ < grad_tol` or `max_iter` iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptStopRule {
    pub grad_tol: f64,
    pub max_iter: usize,
}

impl Default for OptStopRule {
    fn default() -> Self {
        OptStopRule { grad_tol: 1e-5, max_iter: 30_000 }
    }
}

impl OptStopRule {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0) || self.max_iter == 0 {
            return Err(Error::Config("grad_tol and max_iter must be positive".into()));
        }
        Ok(())
    }
}

/// Per-iteration record passed to observers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptStep {
    pub iteration: usize,
    /// Objective before the step.
    pub f_before: f64,
    /// Objective after the step (equal to `f_before` for a rejected step).
    pub f_after: f64,
    pub grad_norm: f64,
    /// `⟨grad f, d⟩` for line-search methods.
    pub slope: f64,
    pub step_norm: f64,
    /// Trust radius used for this step.
    pub radius: Option<f64>,
    pub accepted: bool,
}

/// `f` along the ray `X + tD`, with `R` the defect at `X` and `W = (L+Π)(D)`.
struct Ray<'a> {
    r: &'a SymTuple,
    w: &'a SymTuple,
}

impl Ray<'_> {
    fn value(&self, t: f64) -> f64 {
        self.r.combine(1.0, self.w, t).blocks().iter().map(|b| b.norm_squared()).sum()
    }

    /// `d/dt f(X + tD) = 2⟨R + tW, W⟩`.
    fn slope(&self, t: f64) -> f64 {
        2.0 * (self.r.dot(self.w) + t * self.w.dot(self.w))
    }
}

fn armijo_on_ray(ray: &Ray, f0: f64, slope0: f64, params: &LineSearchParams) -> Result<f64> {
    if !(slope0 < 0.0) {
        return Err(Error::LineSearch(format!("not a descent direction (slope {slope0:e})")));
    }
    let mut t = params.alpha_bar;
    for _ in 0..=params.max_backtracks {
        if ray.value(t) <= f0 + params.sigma * t * slope0 {
            return Ok(t);
        }
        t *= params.beta;
    }
    Err(Error::LineSearch(format!("Armijo condition not met after {} backtracks", params.max_backtracks)))
}

fn wolfe_on_ray(ray: &Ray, f0: f64, slope0: f64, t_init: f64, params: &LineSearchParams) -> Result<f64> {
    if !(slope0 < 0.0) {
        return Err(Error::LineSearch(format!("not a descent direction (slope {slope0:e})")));
    }
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    let mut t = t_init;
    for _ in 0..params.max_backtracks {
        if ray.value(t) > f0 + params.c1 * t * slope0 {
            hi = t;
        } else if ray.slope(t) < params.c2 * slope0 {
            lo = t;
        } else {
            return Ok(t);
        }
        t = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * lo };
    }
    Err(Error::LineSearch(format!(
        "Wolfe bracket [{lo:e}, {hi:e}] not resolved in {} steps",
        params.max_backtracks
    )))
}

fn prepare_ray(p: &MjlsProblem, x: &SymTuple, d: &SymTuple) -> Result<(SymTuple, SymTuple)> {
    Ok((residual_tuple(p, x)?, apply_l_plus_pi(p, d)?))
}

/// Armijo step `t = βᵞ ᾱ` with the smallest `γ ≥ 0` such that
/// `f(X + tD) ≤ f(X) + σ t ⟨grad f(X), D⟩`.
pub fn armijo_step(p: &MjlsProblem, x: &SymTuple, d: &SymTuple, params: &LineSearchParams) -> Result<f64> {
    params.validate()?;
    let (r, w) = prepare_ray(p, x, d)?;
    let ray = Ray { r: &r, w: &w };
    armijo_on_ray(&ray, ray.value(0.0), ray.slope(0.0), params)
}

/// Step satisfying the weak Wolfe conditions, found by expansion and bisection
/// from `ᾱ`.
pub fn wolfe_step(p: &MjlsProblem, x: &SymTuple, d: &SymTuple, params: &LineSearchParams) -> Result<f64> {
    params.validate()?;
    let (r, w) = prepare_ray(p, x, d)?;
    let ray = Ray { r: &r, w: &w };
    wolfe_on_ray(&ray, ray.value(0.0), ray.slope(0.0), params.alpha_bar, params)
}

fn validate_start(p: &MjlsProblem, x0: Option<&SymTuple>) -> Result<SymTuple> {
    match x0 {
        Some(x) => {
            x.ensure_shape(p.modes(), p.dim())?;
            Ok(x.clone())
        }
        None => Ok(SymTuple::zeros(p.modes(), p.dim())),
    }
}

fn finish(
    p: &MjlsProblem,
    method: Method,
    stop: &OptStopRule,
    x: &SymTuple,
    iterations: usize,
    grad_norm: f64,
    start: Instant,
) -> Result<SolverReport> {
    let mut report = SolverReport::new(method, stop.grad_tol);
    report.iterations = iterations as f64;
    report.converged = grad_norm < stop.grad_tol;
    report.residual = residual_tuple(p, x)?.norm();
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Steepest descent with Armijo steps, from `x0` (zero when `None`).
pub fn solve_sd(
    p: &MjlsProblem,
    x0: Option<&SymTuple>,
    stop: &OptStopRule,
    params: &LineSearchParams,
) -> Result<(SymTuple, SolverReport)> {
    solve_sd_observed(p, x0, stop, params, |_| {})
}

pub fn solve_sd_observed(
    p: &MjlsProblem,
    x0: Option<&SymTuple>,
    stop: &OptStopRule,
    params: &LineSearchParams,
    mut observe: impl FnMut(&OptStep),
) -> Result<(SymTuple, SolverReport)> {
    stop.validate()?;
    params.validate()?;
    let start = Instant::now();
    let mut x = validate_start(p, x0)?;
    let mut k = 0;
    loop {
        let r = residual_tuple(p, &x)?;
        let g = apply_l_plus_pi_adjoint(p, &r)?.scaled(2.0);
        let gnorm = g.norm();
        if gnorm < stop.grad_tol || k >= stop.max_iter {
            let report = finish(p, Method::SteepestDescent, stop, &x, k, gnorm, start)?;
            return Ok((x, report));
        }
        let d = g.scaled(-1.0);
        let w = apply_l_plus_pi(p, &d)?;
        let ray = Ray { r: &r, w: &w };
        let f0 = r.dot(&r);
        let slope = -gnorm * gnorm;
        let t = armijo_on_ray(&ray, f0, slope, params)?;
        x.axpy(t, &d);
        k += 1;
        observe(&OptStep {
            iteration: k,
            f_before: f0,
            f_after: ray.value(t),
            grad_norm: gnorm,
            slope,
            step_norm: t * gnorm,
            radius: None,
            accepted: true,
        });
    }
}

/// Nonlinear conjugate gradients with the Dai–Yuan parameter and weak Wolfe
/// steps. The first direction is `−grad f`.
pub fn solve_cg(
    p: &MjlsProblem,
    x0: Option<&SymTuple>,
    stop: &OptStopRule,
    params: &LineSearchParams,
) -> Result<(SymTuple, SolverReport)> {
    solve_cg_observed(p, x0, stop, params, |_| {})
}

pub fn solve_cg_observed(
    p: &MjlsProblem,
    x0: Option<&SymTuple>,
    stop: &OptStopRule,
    params: &LineSearchParams,
    mut observe: impl FnMut(&OptStep),
) -> Result<(SymTuple, SolverReport)> {
    stop.validate()?;
    params.validate()?;
    let start = Instant::now();
    let mut x = validate_start(p, x0)?;
    let mut r = residual_tuple(p, &x)?;
    let mut g = apply_l_plus_pi_adjoint(p, &r)?.scaled(2.0);
    let mut d = g.scaled(-1.0);
    let mut t_prev = params.alpha_bar;
    let mut slope_prev = 0.0;
    let mut k = 0;
    loop {
        let gnorm = g.norm();
        if gnorm < stop.grad_tol || k >= stop.max_iter {
            let report = finish(p, Method::ConjugateGradient, stop, &x, k, gnorm, start)?;
            return Ok((x, report));
        }
        let mut slope = g.dot(&d);
        if !(slope < 0.0) {
            d = g.scaled(-1.0);
            slope = -gnorm * gnorm;
        }
        let w = apply_l_plus_pi(p, &d)?;
        let ray = Ray { r: &r, w: &w };
        let f0 = r.dot(&r);
        let t_init = if k == 0 { params.alpha_bar } else { t_prev * slope_prev / slope };
        let t = wolfe_on_ray(&ray, f0, slope, t_init, params)?;
        x.axpy(t, &d);
        r.axpy(t, &w);
        k += 1;
        observe(&OptStep {
            iteration: k,
            f_before: f0,
            f_after: r.dot(&r),
            grad_norm: gnorm,
            slope,
            step_norm: t * d.norm(),
            radius: None,
            accepted: true,
        });
        // refresh the defect to keep it from drifting away from the iterate
        if k % 50 == 0 {
            r = residual_tuple(p, &x)?;
        }
        let g_new = apply_l_plus_pi_adjoint(p, &r)?.scaled(2.0);
        let denom = d.dot(&g_new.sub(&g));
        let beta = if denom.abs() < 1e-300 { 0.0 } else { g_new.dot(&g_new) / denom };
        d.scale(beta);
        d.axpy(-1.0, &g_new);
        g = g_new;
        t_prev = t;
        slope_prev = slope;
    }
}

/// Result of [`tcg`].
#[derive(Debug, Clone, PartialEq)]
pub struct TcgResult {
    pub step: SymTuple,
    /// The step was truncated at the trust-region boundary.
    pub on_boundary: bool,
    pub negative_curvature: bool,
    pub iterations: usize,
}

/// `τ ≥ 0` with `‖z + τ p‖ = Δ`.
fn to_boundary(z: &SymTuple, p: &SymTuple, delta: f64) -> f64 {
    let pp = p.dot(p);
    let zp = z.dot(p);
    let zz = z.dot(z);
    let disc = (zp * zp + pp * (delta * delta - zz)).max(0.0);
    (-zp + disc.sqrt()) / pp
}

/// Steihaug–Toint truncated CG for `min ⟨g, d⟩ + ½⟨H d, d⟩` subject to
/// `‖d‖ ≤ Δ`. Stops at the boundary, on non-positive curvature, or when the
/// model gradient falls below `tol·‖g‖`.
pub fn tcg<H>(g: &SymTuple, mut hess: H, delta: f64, tol: f64, max_iter: usize) -> Result<TcgResult>
where
    H: FnMut(&SymTuple) -> Result<SymTuple>,
{
    if !(delta > 0.0) {
        return Err(Error::Config(format!("trust radius {delta} must be positive")));
    }
    let mut z = SymTuple::zeros(g.modes(), g.dim());
    let gnorm = g.norm();
    let done = |step, on_boundary, negative_curvature, iterations| {
        Ok(TcgResult { step, on_boundary, negative_curvature, iterations })
    };
    if gnorm == 0.0 {
        return done(z, false, false, 0);
    }
    let mut r = g.clone();
    let mut p = g.scaled(-1.0);
    let mut rr = r.dot(&r);
    for j in 0..max_iter {
        let hp = hess(&p)?;
        let kappa = p.dot(&hp);
        if kappa <= 0.0 {
            let tau = to_boundary(&z, &p, delta);
            z.axpy(tau, &p);
            return done(z, true, true, j + 1);
        }
        let alpha = rr / kappa;
        let next = z.combine(1.0, &p, alpha);
        if next.norm() >= delta {
            let tau = to_boundary(&z, &p, delta);
            z.axpy(tau, &p);
            return done(z, true, false, j + 1);
        }
        z = next;
        r.axpy(alpha, &hp);
        let rr_new = r.dot(&r);
        if rr_new.sqrt() <= tol * gnorm {
            return done(z, false, false, j + 1);
        }
        p.scale(rr_new / rr);
        p.axpy(-1.0, &r);
        rr = rr_new;
    }
    done(z, false, false, max_iter)
}

/// Trust-region method with truncated-CG subproblems.
///
/// Unset parameters default to `Δ̄ = 10·max(1, ‖X₀‖, ‖grad f(X₀)‖)`,
/// `Δ₀ = Δ̄/8`, a forcing term `min(0.5, √‖g‖)` for the inner solve, and an
/// inner cap of `N·n(n+1)/2`, the dimension of the symmetric tuple space.
pub fn solve_tr(
    p: &MjlsProblem,
    x0: Option<&SymTuple>,
    stop: &OptStopRule,
    params: &TrustRegionParams,
) -> Result<(SymTuple, SolverReport)> {
    solve_tr_observed(p, x0, stop, params, |_| {})
}

pub fn solve_tr_observed(
    p: &MjlsProblem,
    x0: Option<&SymTuple>,
    stop: &OptStopRule,
    params: &TrustRegionParams,
    mut observe: impl FnMut(&OptStep),
) -> Result<(SymTuple, SolverReport)> {
    stop.validate()?;
    params.validate()?;
    let start = Instant::now();
    let mut x = validate_start(p, x0)?;
    let mut r = residual_tuple(p, &x)?;
    let mut g = apply_l_plus_pi_adjoint(p, &r)?.scaled(2.0);
    let delta_bar = params.delta_bar.unwrap_or_else(|| 10.0 * x.norm().max(g.norm()).max(1.0));
    let mut delta = params.delta0.unwrap_or(delta_bar / 8.0);
    if !(delta > 0.0 && delta <= delta_bar) {
        return Err(Error::Config(format!("initial radius {delta} outside (0, {delta_bar}]")));
    }
    let n = p.dim();
    let inner_cap = params.tcg_max_iter.unwrap_or(p.modes() * n * (n + 1) / 2);
    let mut k = 0;
    loop {
        let gnorm = g.norm();
        if gnorm < stop.grad_tol || k >= stop.max_iter {
            let report = finish(p, Method::TrustRegion, stop, &x, k, gnorm, start)?;
            return Ok((x, report));
        }
        let forcing = params.tcg_tol.unwrap_or_else(|| gnorm.sqrt().min(0.5));
        let sub = tcg(&g, |v| hessian_apply(p, v), delta, forcing, inner_cap)?;
        let d = sub.step;
        let w = apply_l_plus_pi(p, &d)?;
        let hd = apply_l_plus_pi_adjoint(p, &w)?.scaled(2.0);
        let predicted = -(g.dot(&d) + 0.5 * hd.dot(&d));
        let f0 = r.dot(&r);
        let r_trial = r.combine(1.0, &w, 1.0);
        let f1 = r_trial.dot(&r_trial);
        let ratio = if predicted > 0.0 { (f0 - f1) / predicted } else { f64::NEG_INFINITY };
        let dnorm = d.norm();
        let used = delta;
        if ratio < 0.25 {
            delta *= 0.25;
        } else if ratio > 0.75 && (dnorm - delta).abs() <= 1e-10 * delta {
            delta = (2.0 * delta).min(delta_bar);
        }
        let accepted = ratio > params.rho_prime;
        k += 1;
        observe(&OptStep {
            iteration: k,
            f_before: f0,
            f_after: if accepted { f1 } else { f0 },
            grad_norm: gnorm,
            slope: g.dot(&d),
            step_norm: dnorm,
            radius: Some(used),
            accepted,
        });
        if accepted {
            x.axpy(1.0, &d);
            r = residual_tuple(p, &x)?;
            g = apply_l_plus_pi_adjoint(p, &r)?.scaled(2.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::model::{CouplingMatrix, ModeTuple};

    fn scalar(a: f64, gamma: f64, y: f64) -> MjlsProblem {
        MjlsProblem::new(
            ModeTuple::new(vec![Matrix::from_element(1, 1, a)]).unwrap(),
            SymTuple::new(vec![Matrix::from_element(1, 1, y)]).unwrap(),
            CouplingMatrix::new(Matrix::from_element(1, 1, gamma)).unwrap(),
        )
        .unwrap()
    }

    fn one(v: f64) -> SymTuple {
        SymTuple::new(vec![Matrix::from_element(1, 1, v)]).unwrap()
    }

    #[test]
    fn scalar_gradient_formula() {
        let (a, g, y, x) = (-1.5, -0.4, 2.0, 0.7);
        let p = scalar(a, g, y);
        let f1 = 2.0 * a * x + g * x + y;
        assert!((objective(&p, &one(x)).unwrap() - f1 * f1).abs() < 1e-14);
        let grad = gradient(&p, &one(x)).unwrap();
        assert!((grad[0][(0, 0)] - 2.0 * (2.0 * a + g) * f1).abs() < 1e-14);
        let h = hessian_apply(&p, &one(1.0)).unwrap();
        assert!((h[0][(0, 0)] - 2.0 * (2.0 * a + g).powi(2)).abs() < 1e-13);
    }

    #[test]
    fn zero_start_objective() {
        let p = scalar(-1.0, -1.0, 3.0);
        assert_eq!(objective(&p, &one(0.0)).unwrap(), 9.0);
    }

    #[test]
    fn armijo_accepts_small_alpha_bar() {
        let p = scalar(-1.0, -1.0, 3.0);
        let x = one(0.0);
        let d = gradient(&p, &x).unwrap().scaled(-1.0);
        let params = LineSearchParams { alpha_bar: 1e-4, ..Default::default() };
        assert_eq!(armijo_step(&p, &x, &d, &params).unwrap(), 1e-4);
    }

    #[test]
    fn armijo_matches_brute_force_scan() {
        let p = scalar(-2.0, -0.5, 1.0);
        let x = one(3.0);
        let d = gradient(&p, &x).unwrap().scaled(-1.0);
        let params = LineSearchParams { alpha_bar: 10.0, ..Default::default() };
        let t = armijo_step(&p, &x, &d, &params).unwrap();
        let f0 = objective(&p, &x).unwrap();
        let slope = gradient(&p, &x).unwrap().dot(&d);
        let first = (0..=50)
            .map(|gamma| params.alpha_bar * params.beta.powi(gamma))
            .find(|&s| objective(&p, &x.combine(1.0, &d, s)).unwrap() <= f0 + params.sigma * s * slope)
            .unwrap();
        assert_eq!(t, first);
    }

    #[test]
    fn zero_direction_is_rejected() {
        let p = scalar(-1.0, -1.0, 3.0);
        let r = armijo_step(&p, &one(0.0), &one(0.0), &LineSearchParams::default());
        assert!(matches!(r, Err(Error::LineSearch(_))));
        let r = wolfe_step(&p, &one(0.0), &one(0.0), &LineSearchParams::default());
        assert!(matches!(r, Err(Error::LineSearch(_))));
    }

    #[test]
    fn wolfe_accepts_exact_minimizer() {
        let p = scalar(-1.0, -1.0, 3.0);
        let x = one(0.0);
        // f(t) = (3 − 3t)², minimized at t = 1 along d = 1
        let params = LineSearchParams { alpha_bar: 1.0, ..Default::default() };
        assert_eq!(wolfe_step(&p, &x, &one(1.0), &params).unwrap(), 1.0);
    }

    #[test]
    fn wolfe_rejects_bad_constants() {
        let params = LineSearchParams { c1: 0.5, c2: 0.4, ..Default::default() };
        assert!(matches!(params.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn tcg_trivial_cases() {
        let g = SymTuple::zeros(1, 2);
        let r = tcg(&g, |v| Ok(v.clone()), 1.0, 0.1, 10).unwrap();
        assert_eq!(r.step.norm(), 0.0);
        // identity Hessian: Cauchy step is −g; a smaller radius truncates
        let g = SymTuple::new(vec![Matrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 4.0])]).unwrap();
        let r = tcg(&g, |v| Ok(v.clone()), 1.0, 1e-12, 10).unwrap();
        assert!(r.on_boundary);
        assert!((r.step.norm() - 1.0).abs() < 1e-12);
        let r = tcg(&g, |v| Ok(v.scaled(2.0)), 1e6, 1e-12, 10).unwrap();
        assert!((r.step.combine(1.0, &g, 0.5)).norm() < 1e-12);
    }

    #[test]
    fn tr_params_validation() {
        assert!(TrustRegionParams::new().validate().is_ok());
        let bad = TrustRegionParams { rho_prime: 0.3, ..TrustRegionParams::new() };
        assert!(bad.validate().is_err());
        let bad = TrustRegionParams { delta_bar: Some(1.0), delta0: Some(2.0), ..TrustRegionParams::new() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn solvers_stop_immediately_at_solution() {
        let (p, x) = crate::generators::known_example();
        let stop = OptStopRule::default();
        let (_, rep) = solve_sd(&p, Some(&x), &stop, &LineSearchParams::default()).unwrap();
        assert_eq!(rep.iterations, 0.0);
        let (_, rep) = solve_cg(&p, Some(&x), &stop, &LineSearchParams::default()).unwrap();
        assert_eq!(rep.iterations, 0.0);
        let (_, rep) = solve_tr(&p, Some(&x), &stop, &TrustRegionParams::new()).unwrap();
        assert_eq!(rep.iterations, 0.0);
        assert!(rep.converged);
    }
}
