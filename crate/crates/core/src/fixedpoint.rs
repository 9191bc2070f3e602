//! Fixed-point sweeps and preconditioned Krylov solvers.
//!
//! The Jacobi iteration `X ← −L⁻¹(Π(X) + Y)` and its Gauss–Seidel variant
//! converge whenever `ρ(L⁻¹Π) < 1`. Both maps also serve as preconditioners:
//! the Krylov solvers run BiCGSTAB on `(I − T)(X) = Ỹ` over the tuple space.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{residual_norm, Method, MjlsProblem, SolverReport, SymTuple};
use crate::operators::{
    apply_linv, apply_pi, apply_t_gs, apply_t_jacobi, jacobi_rhs, precondition_rhs, ShiftedModes,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointConfig {
    /// Relative tolerance: on the preconditioned residual for the Krylov
    /// methods, on `residual_norm / max(1, ‖Y‖)` for plain sweeps.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        FixedPointConfig { tol: 1e-9, max_iter: 500 }
    }
}

impl FixedPointConfig {
    pub fn new(tol: f64, max_iter: usize) -> Result<Self> {
        let cfg = FixedPointConfig { tol, max_iter };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::Config(format!("tolerance {} must lie in (0, 1)", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// One Jacobi sweep `X ← −L⁻¹(Π(X) + Y)`.
pub fn jacobi_sweep(p: &MjlsProblem, modes: &ShiftedModes, x: &SymTuple) -> Result<SymTuple> {
    let mut rhs = apply_pi(p, x)?;
    rhs.axpy(1.0, p.y());
    let mut next = apply_linv(modes, &rhs)?;
    next.scale(-1.0);
    Ok(next)
}

/// One Gauss–Seidel sweep: mode `i` already uses the new blocks `j < i`.
pub fn gauss_seidel_sweep(p: &MjlsProblem, modes: &ShiftedModes, x: &SymTuple) -> Result<SymTuple> {
    let mut next: Vec<Matrix> = Vec::with_capacity(p.modes());
    for i in 0..p.modes() {
        let mut s = p.y()[i].clone();
        for j in 0..p.modes() {
            let g = p.gamma().get(i, j);
            if j != i && g != 0.0 {
                let xj = if j < i { &next[j] } else { &x[j] };
                crate::linalg::add_scaled(&mut s, g, xj);
            }
        }
        // L_i(X_i) = −s  ⇔  Ã X + X Ãᵀ + s = 0
        let xi = modes.solver(i).solve(&s).map_err(|e| e.in_mode(i + 1))?;
        next.push(xi);
    }
    Ok(SymTuple::from_blocks(next))
}

fn sweep_solve(
    p: &MjlsProblem,
    cfg: &FixedPointConfig,
    method: Method,
    sweep: fn(&MjlsProblem, &ShiftedModes, &SymTuple) -> Result<SymTuple>,
) -> Result<(SymTuple, SolverReport)> {
    cfg.validate()?;
    let start = Instant::now();
    let modes = ShiftedModes::new(p)?;
    let target = cfg.tol * p.y().norm().max(1.0);
    let mut report = SolverReport::new(method, cfg.tol);
    let mut x = SymTuple::zeros(p.modes(), p.dim());
    let mut best = (residual_norm(p, &x)?, x.clone());
    for k in 1..=cfg.max_iter {
        x = sweep(p, &modes, &x)?;
        let res = residual_norm(p, &x)?;
        if !res.is_finite() {
            break;
        }
        if res < best.0 {
            best = (res, x.clone());
        }
        report.iterations = k as f64;
        if res <= target {
            report.converged = true;
            break;
        }
    }
    report.residual = best.0;
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok((best.1, report))
}

/// Jacobi fixed-point iteration from `X = 0`.
pub fn solve_jacobi(p: &MjlsProblem, cfg: &FixedPointConfig) -> Result<(SymTuple, SolverReport)> {
    sweep_solve(p, cfg, Method::Jacobi, jacobi_sweep)
}

/// Gauss–Seidel fixed-point iteration from `X = 0`.
pub fn solve_gauss_seidel(p: &MjlsProblem, cfg: &FixedPointConfig) -> Result<(SymTuple, SolverReport)> {
    sweep_solve(p, cfg, Method::GaussSeidel, gauss_seidel_sweep)
}

/// Convergence record of [`bicgstab`].
#[derive(Debug, Clone, PartialEq)]
pub struct KrylovReport {
    /// Operator applications divided by two.
    pub iterations: f64,
    /// Final `‖op(X) − b‖ / ‖b‖` from the recurrence.
    pub relative_residual: f64,
    pub converged: bool,
    pub restarts: usize,
}

/// Matrix-free BiCGSTAB on the tuple space, started from `X = 0`.
///
/// Stops when `‖op(X) − b‖ ≤ tol·‖b‖`. On a breakdown (`ρ` or `ω` vanishing
/// relative to the vectors involved) the method restarts once from the
/// current iterate; a second breakdown is an error.
pub fn bicgstab<F>(mut op: F, b: &SymTuple, tol: f64, max_iter: usize) -> Result<(SymTuple, KrylovReport)>
where
    F: FnMut(&SymTuple) -> Result<SymTuple>,
{
    const BREAKDOWN: f64 = 1e-14;
    let bnorm = b.norm();
    let mut x = SymTuple::zeros(b.modes(), b.dim());
    let mut report = KrylovReport { iterations: 0.0, relative_residual: 0.0, converged: true, restarts: 0 };
    if bnorm == 0.0 {
        return Ok((x, report));
    }
    let target = tol * bnorm;
    let max_half_steps = 2 * max_iter;
    let mut applications = 0usize;

    let mut r = b.clone();
    let mut r_hat = r.clone();
    let mut p = SymTuple::zeros(b.modes(), b.dim());
    let mut v = p.clone();
    let (mut rho_prev, mut alpha, mut omega) = (1.0f64, 1.0f64, 1.0f64);

    let finish = |x: SymTuple, r: f64, apps: usize, converged: bool, restarts: usize| {
        Ok((
            x,
            KrylovReport { iterations: apps as f64 / 2.0, relative_residual: r / bnorm, converged, restarts },
        ))
    };

    loop {
        if applications >= max_half_steps {
            return finish(x, r.norm(), applications, false, report.restarts);
        }
        let rho = r_hat.dot(&r);
        let broke = rho.abs() < BREAKDOWN * r_hat.norm() * r.norm();
        let mut restart = broke;
        if !broke {
            let beta = (rho / rho_prev) * (alpha / omega);
            // p = r + β (p − ω v)
            p.axpy(-omega, &v);
            p.scale(beta);
            p.axpy(1.0, &r);
            v = op(&p)?;
            applications += 1;
            let denom = r_hat.dot(&v);
            if denom.abs() < BREAKDOWN * r_hat.norm() * v.norm() || denom == 0.0 {
                restart = true;
            } else {
                alpha = rho / denom;
                let mut s = r.clone();
                s.axpy(-alpha, &v);
                let snorm = s.norm();
                if snorm <= target {
                    x.axpy(alpha, &p);
                    return finish(x, snorm, applications, true, report.restarts);
                }
                if applications >= max_half_steps {
                    x.axpy(alpha, &p);
                    return finish(x, snorm, applications, false, report.restarts);
                }
                let t = op(&s)?;
                applications += 1;
                let tt = t.dot(&t);
                let ts = t.dot(&s);
                if tt == 0.0 || ts.abs() < BREAKDOWN * t.norm() * snorm {
                    x.axpy(alpha, &p);
                    r = s;
                    restart = true;
                } else {
                    omega = ts / tt;
                    x.axpy(alpha, &p);
                    x.axpy(omega, &s);
                    r = s;
                    r.axpy(-omega, &t);
                    rho_prev = rho;
                    if r.norm() <= target {
                        return finish(x, r.norm(), applications, true, report.restarts);
                    }
                }
            }
        }
        if restart {
            if report.restarts >= 1 {
                return Err(Error::Breakdown { iterations: applications as f64 / 2.0 });
            }
            report.restarts += 1;
            let ax = op(&x)?;
            applications += 1;
            r = b.clone();
            r.axpy(-1.0, &ax);
            if r.norm() <= target {
                return finish(x, r.norm(), applications, true, report.restarts);
            }
            r_hat = r.clone();
            p = SymTuple::zeros(b.modes(), b.dim());
            v = p.clone();
            rho_prev = 1.0;
            alpha = 1.0;
            omega = 1.0;
        }
    }
}

fn krylov_solve(
    p: &MjlsProblem,
    cfg: &FixedPointConfig,
    method: Method,
) -> Result<(SymTuple, SolverReport)> {
    cfg.validate()?;
    let start = Instant::now();
    let modes = ShiftedModes::new(p)?;
    let (x, kr) = match method {
        Method::KrylovGs => {
            let rhs = precondition_rhs(p, &modes, p.y())?;
            bicgstab(|x| Ok(x.sub(&apply_t_gs(p, &modes, x)?)), &rhs, cfg.tol, cfg.max_iter)?
        }
        Method::KrylovJacobi => {
            let rhs = jacobi_rhs(p, &modes, p.y())?;
            bicgstab(|x| Ok(x.sub(&apply_t_jacobi(p, &modes, x)?)), &rhs, cfg.tol, cfg.max_iter)?
        }
        other => return Err(Error::Config(format!("{other} is not a Krylov method"))),
    };
    let mut report = SolverReport::new(method, cfg.tol);
    report.iterations = kr.iterations;
    report.converged = kr.converged;
    report.residual = residual_norm(p, &x)?;
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok((x, report))
}

/// BiCGSTAB on `(I − T_GS)(X) = Ỹ`. The reported residual is that of the
/// original equation.
pub fn solve_krylov_gs(p: &MjlsProblem, cfg: &FixedPointConfig) -> Result<(SymTuple, SolverReport)> {
    krylov_solve(p, cfg, Method::KrylovGs)
}

/// BiCGSTAB on `(I − T_J)(X) = −L⁻¹(Y)`.
pub fn solve_krylov_jacobi(p: &MjlsProblem, cfg: &FixedPointConfig) -> Result<(SymTuple, SolverReport)> {
    krylov_solve(p, cfg, Method::KrylovJacobi)
}
