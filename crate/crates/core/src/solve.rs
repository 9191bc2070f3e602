//! One entry point for every solver.

use std::time::Instant;

use crate::error::Result;
use crate::fixedpoint::{solve_gauss_seidel, solve_jacobi, solve_krylov_gs, solve_krylov_jacobi, FixedPointConfig};
use crate::model::{residual_norm, Method, MjlsProblem, SolverReport, SymTuple};
use crate::operators::solve_direct;
use crate::optimization::{solve_cg, solve_sd, solve_tr, LineSearchParams, OptStopRule, TrustRegionParams};

/// Default tolerance of the fixed-point and Krylov methods.
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 500;

/// Solver settings. `tol`/`max_iter` mean the relative residual tolerance and
/// sweep cap for fixed-point and Krylov methods, and the gradient tolerance
/// and iteration cap for optimization methods; `None` picks the method's
/// default.
#[derive(Debug, Clone, Copy, Default)]
pub struct SolveOptions {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub line_search: LineSearchParams,
    pub trust_region: Option<TrustRegionParams>,
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolveOptions { tol: Some(tol), ..Default::default() }
    }

    fn fixed_point(&self) -> FixedPointConfig {
        FixedPointConfig { tol: self.tol.unwrap_or(DEFAULT_TOL), max_iter: self.max_iter.unwrap_or(DEFAULT_MAX_ITER) }
    }

    fn stop_rule(&self) -> OptStopRule {
        let d = OptStopRule::default();
        OptStopRule { grad_tol: self.tol.unwrap_or(d.grad_tol), max_iter: self.max_iter.unwrap_or(d.max_iter) }
    }
}

/// Solves `(L + Π)(X) = −Y` with the chosen method, starting from `X = 0`.
pub fn solve(p: &MjlsProblem, method: Method, opts: &SolveOptions) -> Result<(SymTuple, SolverReport)> {
    match method {
        Method::Jacobi => solve_jacobi(p, &opts.fixed_point()),
        Method::GaussSeidel => solve_gauss_seidel(p, &opts.fixed_point()),
        Method::KrylovGs => solve_krylov_gs(p, &opts.fixed_point()),
        Method::KrylovJacobi => solve_krylov_jacobi(p, &opts.fixed_point()),
        Method::SteepestDescent => solve_sd(p, None, &opts.stop_rule(), &opts.line_search),
        Method::ConjugateGradient => solve_cg(p, None, &opts.stop_rule(), &opts.line_search),
        Method::TrustRegion => {
            let tr = opts.trust_region.unwrap_or_default();
            solve_tr(p, None, &opts.stop_rule(), &tr)
        }
        Method::Direct => {
            let start = Instant::now();
            let x = solve_direct(p)?;
            let mut report = SolverReport::new(Method::Direct, 0.0);
            report.residual = residual_norm(p, &x)?;
            report.converged = true;
            report.wall_time_s = start.elapsed().as_secs_f64();
            Ok((x, report))
        }
    }
}
