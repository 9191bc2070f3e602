//! Benchmark harness producing one CSV row per (instance, method).

use std::io::Write;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::generators::{cart_system, known_example, random_spd_problem, random_stable_problem, CartConfig};
use crate::model::{Method, MjlsProblem, SymTuple};
use crate::solve::{solve, SolveOptions};

/// Krylov tolerance used by the table presets.
pub const TABLE_TOL: f64 = 1e-11;

/// Largest `N·n²` the harness will generate.
pub const MAX_INSTANCE_SIZE: usize = 50_000_000;

pub const CSV_HEADER: [&str; 9] = ["method", "n", "N", "time_s", "iterations", "residual", "error", "converged", "seed"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Table1,
    Table2,
    Table3,
    Table6,
    Custom,
}

/// Instance family for custom runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    Known,
    RandomSpd,
    RandomStable,
    Cart,
}

#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub experiment: Experiment,
    pub kind: InstanceKind,
    /// State dimensions, or station counts for cart instances.
    pub sizes: Vec<usize>,
    /// Mode counts for random stable instances.
    pub modes: Vec<usize>,
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    /// Tolerance for fixed-point and Krylov methods.
    pub tol: f64,
    /// Gradient tolerance override for optimization methods.
    pub grad_tol: Option<f64>,
    pub max_iter: Option<usize>,
    /// Target `ρ(L⁻¹Π)` for random stable instances.
    pub target_rho: f64,
}

impl BenchSpec {
    /// Preset for one of the standard experiments.
    pub fn preset(experiment: Experiment) -> BenchSpec {
        use Method::*;
        let base = BenchSpec {
            experiment,
            kind: InstanceKind::Known,
            sizes: vec![4],
            modes: vec![2],
            seeds: vec![1],
            methods: vec![KrylovGs, SteepestDescent, ConjugateGradient, TrustRegion],
            tol: TABLE_TOL,
            grad_tol: None,
            max_iter: None,
            target_rho: 0.9,
        };
        match experiment {
            Experiment::Table1 | Experiment::Custom => base,
            Experiment::Table2 => BenchSpec { kind: InstanceKind::RandomSpd, sizes: vec![100], ..base },
            Experiment::Table3 => BenchSpec {
                kind: InstanceKind::RandomStable,
                sizes: vec![100],
                modes: vec![20],
                methods: vec![KrylovGs],
                ..base
            },
            Experiment::Table6 => BenchSpec { kind: InstanceKind::Cart, sizes: vec![3, 5], methods: vec![KrylovGs], ..base },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("method list is empty".into()));
        }
        if self.sizes.is_empty() || self.seeds.is_empty() || self.modes.is_empty() {
            return Err(Error::Config("sizes, modes and seeds must be nonempty".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tolerance {} must be positive", self.tol)));
        }
        if !(self.target_rho > 0.0 && self.target_rho < 1.0) {
            return Err(Error::Config(format!("target rho {} must lie in (0, 1)", self.target_rho)));
        }
        for inst in self.instances() {
            let size = inst.modes.saturating_mul(inst.n).saturating_mul(inst.n);
            if inst.n == 0 || inst.modes == 0 || size > MAX_INSTANCE_SIZE {
                return Err(Error::Config(format!("instance n={} N={} is outside the size guardrail", inst.n, inst.modes)));
            }
        }
        Ok(())
    }

    fn options(&self, method: Method) -> SolveOptions {
        let tol = if method.is_optimization() { self.grad_tol } else { Some(self.tol) };
        SolveOptions { tol, max_iter: self.max_iter, ..Default::default() }
    }

    fn instances(&self) -> Vec<Instance> {
        let mut out = Vec::new();
        match self.kind {
            InstanceKind::Known => out.push(Instance { kind: self.kind, n: 4, modes: 2, param: 0, seed: None }),
            InstanceKind::Cart => {
                for &nu in &self.sizes {
                    let cfg = CartConfig::new(nu);
                    let modes = 2usize.saturating_mul(nu.saturating_pow(cfg.tau as u32));
                    out.push(Instance { kind: self.kind, n: 2 * nu, modes, param: nu, seed: None });
                }
            }
            InstanceKind::RandomSpd => {
                for &n in &self.sizes {
                    for &s in &self.seeds {
                        out.push(Instance { kind: self.kind, n, modes: 2, param: n, seed: Some(s) });
                    }
                }
            }
            InstanceKind::RandomStable => {
                for &n in &self.sizes {
                    for &m in &self.modes {
                        for &s in &self.seeds {
                            out.push(Instance { kind: self.kind, n, modes: m, param: n, seed: Some(s) });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct Instance {
    kind: InstanceKind,
    n: usize,
    modes: usize,
    param: usize,
    seed: Option<u64>,
}

impl Instance {
    fn build(&self, target_rho: f64) -> Result<(MjlsProblem, Option<SymTuple>)> {
        match self.kind {
            InstanceKind::Known => {
                let (p, x) = known_example();
                Ok((p, Some(x)))
            }
            InstanceKind::RandomSpd => Ok((random_spd_problem(self.n, self.seed.unwrap_or(0))?, None)),
            InstanceKind::RandomStable => {
                Ok((random_stable_problem(self.n, self.modes, self.seed.unwrap_or(0), target_rho)?, None))
            }
            InstanceKind::Cart => Ok((cart_system(&CartConfig::new(self.param))?.observability_problem()?, None)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowStatus {
    Converged,
    NotConverged,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: Method,
    pub n: usize,
    pub modes: usize,
    pub time_s: f64,
    pub iterations: f64,
    pub residual: f64,
    pub error: Option<f64>,
    pub status: RowStatus,
    pub seed: Option<u64>,
}

impl BenchRow {
    fn failed(method: Method, inst: &Instance, e: &Error) -> Self {
        BenchRow {
            method,
            n: inst.n,
            modes: inst.modes,
            time_s: 0.0,
            iterations: 0.0,
            residual: f64::NAN,
            error: None,
            status: RowStatus::Failed(e.to_string()),
            seed: inst.seed,
        }
    }

    pub fn converged(&self) -> bool {
        self.status == RowStatus::Converged
    }

    /// Fields in [`CSV_HEADER`] order.
    pub fn fields(&self) -> [String; 9] {
        let converged = match &self.status {
            RowStatus::Converged => "true".to_string(),
            RowStatus::NotConverged => "false".to_string(),
            RowStatus::Failed(msg) => format!("failed: {msg}"),
        };
        [
            self.method.name().to_string(),
            self.n.to_string(),
            self.modes.to_string(),
            format!("{:.4}", self.time_s),
            format!("{:.1}", self.iterations),
            format!("{:.6e}", self.residual),
            self.error.map(|e| format!("{e:.6e}")).unwrap_or_default(),
            converged,
            self.seed.map(|s| s.to_string()).unwrap_or_default(),
        ]
    }
}

/// Runs every (instance, method) cell in order. Failures become rows.
pub fn run_bench(spec: &BenchSpec) -> Result<Vec<BenchRow>> {
    run_bench_with(spec, |_| {})
}

/// Like [`run_bench`], calling `on_row` as each row completes.
pub fn run_bench_with(spec: &BenchSpec, mut on_row: impl FnMut(&BenchRow)) -> Result<Vec<BenchRow>> {
    spec.validate()?;
    let mut rows = Vec::new();
    for inst in spec.instances() {
        let built = inst.build(spec.target_rho);
        for &method in &spec.methods {
            let row = match &built {
                Err(e) => BenchRow::failed(method, &inst, e),
                Ok((p, reference)) => run_cell(p, reference.as_ref(), method, &spec.options(method), &inst),
            };
            on_row(&row);
            rows.push(row);
        }
    }
    Ok(rows)
}

fn run_cell(p: &MjlsProblem, reference: Option<&SymTuple>, method: Method, opts: &SolveOptions, inst: &Instance) -> BenchRow {
    let start = Instant::now();
    let outcome = solve(p, method, opts);
    let elapsed = start.elapsed().as_secs_f64();
    match outcome {
        Err(e) => BenchRow { time_s: elapsed, ..BenchRow::failed(method, inst, &e) },
        Ok((x, report)) => BenchRow {
            method,
            n: p.dim(),
            modes: p.modes(),
            time_s: elapsed,
            iterations: report.iterations,
            residual: report.residual,
            error: reference.and_then(|r| crate::model::error_norm(&x, r).ok()),
            status: if report.converged { RowStatus::Converged } else { RowStatus::NotConverged },
            seed: inst.seed,
        },
    }
}

/// Writes rows as CSV with the standard header.
pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record(r.fields()).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table1_has_four_rows_with_errors() {
        let rows = run_bench(&BenchSpec::preset(Experiment::Table1)).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.error.is_some() && r.n == 4 && r.modes == 2));
        assert!(rows[0].converged());
    }

    #[test]
    fn custom_fixed_point_rows() {
        let spec = BenchSpec {
            kind: InstanceKind::RandomSpd,
            sizes: vec![6],
            seeds: vec![3],
            methods: vec![Method::Jacobi, Method::GaussSeidel],
            tol: 1e-9,
            ..BenchSpec::preset(Experiment::Custom)
        };
        let rows = run_bench(&spec).unwrap();
        assert_eq!(rows.len(), 2);
        for r in &rows {
            assert!(r.converged());
            assert_eq!(r.seed, Some(3));
        }
    }

    #[test]
    fn oversized_direct_is_a_failed_row() {
        let spec = BenchSpec {
            kind: InstanceKind::RandomSpd,
            sizes: vec![120],
            methods: vec![Method::Direct, Method::KrylovGs],
            ..BenchSpec::preset(Experiment::Custom)
        };
        let rows = run_bench(&spec).unwrap();
        assert!(matches!(rows[0].status, RowStatus::Failed(_)));
        assert!(rows[1].converged());
    }

    #[test]
    fn empty_methods_rejected() {
        let spec = BenchSpec { methods: vec![], ..BenchSpec::preset(Experiment::Table1) };
        assert!(run_bench(&spec).is_err());
    }

    #[test]
    fn csv_layout() {
        let rows = run_bench(&BenchSpec { methods: vec![Method::KrylovGs], ..BenchSpec::preset(Experiment::Table1) }).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "method,n,N,time_s,iterations,residual,error,converged,seed");
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields[0], "krylov-gs");
        assert_eq!(fields[4], "3.0");
        assert_eq!(fields[7], "true");
        assert_eq!(fields[8], "");
    }
}
