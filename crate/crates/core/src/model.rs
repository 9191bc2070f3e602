//! Data model for the coupled equations
//! `A_i X_i + X_i A_iᵀ + Σ_j γ_ij X_j + Y_i = 0`, `i = 1..N`.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{add_scaled, asymmetry, symmetrize, Matrix};

/// Relative asymmetry tolerated by the checked [`SymTuple`] constructor.
pub const SYMMETRY_TOL: f64 = 1e-9;

/// Ordered list of `N` equally shaped real matrices (one per mode).
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTuple {
    blocks: Vec<Matrix>,
}

impl ModeTuple {
    pub fn new(blocks: Vec<Matrix>) -> Result<Self> {
        let first = blocks.first().ok_or_else(|| Error::Dimension("empty mode tuple".into()))?;
        let (r, c) = first.shape();
        if r == 0 || c == 0 {
            return Err(Error::Dimension("zero-sized block".into()));
        }
        for (i, b) in blocks.iter().enumerate() {
            if b.shape() != (r, c) {
                return Err(Error::Dimension(format!(
                    "block {} is {}x{}, expected {r}x{c}",
                    i + 1,
                    b.nrows(),
                    b.ncols()
                )));
            }
            if b.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("block {}", i + 1)));
            }
        }
        Ok(ModeTuple { blocks })
    }

    /// Number of modes.
    pub fn modes(&self) -> usize {
        self.blocks.len()
    }

    pub fn rows(&self) -> usize {
        self.blocks[0].nrows()
    }

    pub fn cols(&self) -> usize {
        self.blocks[0].ncols()
    }

    pub fn blocks(&self) -> &[Matrix] {
        &self.blocks
    }

    pub fn transposed(&self) -> ModeTuple {
        ModeTuple { blocks: self.blocks.iter().map(|b| b.transpose()).collect() }
    }
}

impl std::ops::Index<usize> for ModeTuple {
    type Output = Matrix;
    fn index(&self, i: usize) -> &Matrix {
        &self.blocks[i]
    }
}

/// Element of `H = (Hⁿ)ᴺ`: `N` symmetric `n×n` matrices.
///
/// The tuple is also the vector space on which the Krylov and optimization
/// solvers operate, with inner product `⟨ξ, η⟩ = Σ tr(ξ_iᵀ η_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTuple {
    blocks: Vec<Matrix>,
}

impl SymTuple {
    /// Checked constructor: every block must be square, of the same size and
    /// symmetric up to `1e-9 · max|B|`. Blocks are symmetrized exactly.
    pub fn new(blocks: Vec<Matrix>) -> Result<Self> {
        Self::check_shapes(&blocks)?;
        for (i, b) in blocks.iter().enumerate() {
            let scale = b.amax();
            let asym = asymmetry(b);
            if asym > SYMMETRY_TOL * scale {
                return Err(Error::Asymmetric { index: i + 1, asymmetry: asym });
            }
        }
        Ok(Self::symmetrized_unchecked(blocks))
    }

    /// Builds the tuple from `(B + Bᵀ)/2` for each block.
    pub fn new_symmetrized(blocks: Vec<Matrix>) -> Result<Self> {
        Self::check_shapes(&blocks)?;
        Ok(Self::symmetrized_unchecked(blocks))
    }

    fn check_shapes(blocks: &[Matrix]) -> Result<()> {
        let n = blocks.first().ok_or_else(|| Error::Dimension("empty tuple".into()))?.nrows();
        if n == 0 {
            return Err(Error::Dimension("zero-sized block".into()));
        }
        for (i, b) in blocks.iter().enumerate() {
            if b.shape() != (n, n) {
                return Err(Error::Dimension(format!(
                    "block {} is {}x{}, expected {n}x{n}",
                    i + 1,
                    b.nrows(),
                    b.ncols()
                )));
            }
            if b.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("block {}", i + 1)));
            }
        }
        Ok(())
    }

    pub(crate) fn symmetrized_unchecked(mut blocks: Vec<Matrix>) -> Self {
        for b in &mut blocks {
            symmetrize(b);
        }
        SymTuple { blocks }
    }

    /// Wraps blocks known to be symmetric (produced by symmetric operators).
    pub(crate) fn from_blocks(blocks: Vec<Matrix>) -> Self {
        SymTuple { blocks }
    }

    pub fn zeros(modes: usize, n: usize) -> Self {
        SymTuple { blocks: vec![Matrix::zeros(n, n); modes] }
    }

    pub fn identity(modes: usize, n: usize) -> Self {
        SymTuple { blocks: vec![Matrix::identity(n, n); modes] }
    }

    pub fn modes(&self) -> usize {
        self.blocks.len()
    }

    pub fn dim(&self) -> usize {
        self.blocks[0].nrows()
    }

    pub fn blocks(&self) -> &[Matrix] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<Matrix> {
        self.blocks
    }

    pub fn same_shape(&self, other: &SymTuple) -> bool {
        self.modes() == other.modes() && self.dim() == other.dim()
    }

    pub(crate) fn ensure_shape(&self, modes: usize, n: usize) -> Result<()> {
        if self.modes() != modes || self.dim() != n {
            return Err(Error::Dimension(format!(
                "tuple has N={} n={}, expected N={modes} n={n}",
                self.modes(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// `Σ tr(ξ_iᵀ η_i)`.
    pub fn dot(&self, other: &SymTuple) -> f64 {
        self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.dot(b)).sum()
    }

    /// Tuple Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt()
    }

    /// `self += alpha · x`.
    pub fn axpy(&mut self, alpha: f64, x: &SymTuple) {
        for (a, b) in self.blocks.iter_mut().zip(&x.blocks) {
            add_scaled(a, alpha, b);
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for b in &mut self.blocks {
            *b *= alpha;
        }
    }

    pub fn scaled(&self, alpha: f64) -> SymTuple {
        let mut s = self.clone();
        s.scale(alpha);
        s
    }

    /// `alpha · self + beta · other`.
    pub fn combine(&self, alpha: f64, other: &SymTuple, beta: f64) -> SymTuple {
        SymTuple {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a * alpha + b * beta).collect(),
        }
    }

    pub fn sub(&self, other: &SymTuple) -> SymTuple {
        self.combine(1.0, other, -1.0)
    }

    pub fn add(&self, other: &SymTuple) -> SymTuple {
        self.combine(1.0, other, 1.0)
    }

    /// Restores exact symmetry of every block.
    pub fn symmetrize(&mut self) {
        for b in &mut self.blocks {
            symmetrize(b);
        }
    }

    /// Column-major stacking of every block, blocks in mode order.
    pub fn to_vec(&self) -> Vec<f64> {
        self.blocks.iter().flat_map(|b| b.iter().copied()).collect()
    }

    /// Inverse of [`SymTuple::to_vec`]; the blocks are symmetrized.
    pub fn from_vec(modes: usize, n: usize, v: &[f64]) -> Result<SymTuple> {
        if v.len() != modes * n * n {
            return Err(Error::Dimension(format!("vector of length {} for N={modes} n={n}", v.len())));
        }
        let blocks = v.chunks(n * n).map(|c| Matrix::from_column_slice(n, n, c)).collect();
        Ok(Self::symmetrized_unchecked(blocks))
    }
}

impl std::ops::Index<usize> for SymTuple {
    type Output = Matrix;
    fn index(&self, i: usize) -> &Matrix {
        &self.blocks[i]
    }
}

/// How strictly a coupling matrix is validated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CouplingKind {
    /// `γ_ij ≥ 0` off the diagonal and `γ_ii < 0`.
    #[default]
    General,
    /// Additionally every row sums to zero (a transition rate matrix).
    RateMatrix,
}

/// Coupling matrix `Γ = (γ_ij)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    gamma: Matrix,
    kind: CouplingKind,
}

impl CouplingMatrix {
    pub fn new(gamma: Matrix) -> Result<Self> {
        Self::with_kind(gamma, CouplingKind::General)
    }

    /// Validates `gamma` as a transition rate matrix (rows sum to 0 within `1e-12`).
    pub fn rate_matrix(gamma: Matrix) -> Result<Self> {
        Self::with_kind(gamma, CouplingKind::RateMatrix)
    }

    pub fn with_kind(gamma: Matrix, kind: CouplingKind) -> Result<Self> {
        let c = Self::relaxed(gamma, kind)?;
        for i in 0..c.modes() {
            if c.gamma[(i, i)] >= 0.0 {
                return Err(Error::CouplingSign { row: i + 1, col: i + 1, value: c.gamma[(i, i)] });
            }
        }
        Ok(c)
    }

    /// Validation allowing `γ_ii = 0` (absorbing rows of a rate matrix).
    pub(crate) fn relaxed(gamma: Matrix, kind: CouplingKind) -> Result<Self> {
        let n = gamma.nrows();
        if n == 0 || gamma.ncols() != n {
            return Err(Error::NotSquare { rows: gamma.nrows(), cols: gamma.ncols() });
        }
        if gamma.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("coupling matrix".into()));
        }
        for i in 0..n {
            for j in 0..n {
                let v = gamma[(i, j)];
                if (i != j && v < 0.0) || (i == j && v > 0.0) {
                    return Err(Error::CouplingSign { row: i + 1, col: j + 1, value: v });
                }
            }
            if kind == CouplingKind::RateMatrix {
                let sum: f64 = gamma.row(i).iter().sum();
                let scale = gamma.row(i).amax().max(1.0);
                if sum.abs() > 1e-12 * scale {
                    return Err(Error::CouplingRowSum { row: i + 1, sum });
                }
            }
        }
        Ok(CouplingMatrix { gamma, kind })
    }

    pub fn modes(&self) -> usize {
        self.gamma.nrows()
    }

    pub fn kind(&self) -> CouplingKind {
        self.kind
    }

    pub fn matrix(&self) -> &Matrix {
        &self.gamma
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.gamma[(i, j)]
    }

    /// Diagonal indices with `γ_ii = 0`.
    pub fn absorbing_rows(&self) -> Vec<usize> {
        (0..self.modes()).filter(|&i| self.gamma[(i, i)] == 0.0).collect()
    }

    /// The transposed coupling `γ'_ij = γ_ji`.
    pub fn transposed(&self) -> CouplingMatrix {
        CouplingMatrix { gamma: self.gamma.transpose(), kind: CouplingKind::General }
    }

    /// Off-diagonal part of `Γ`.
    pub fn off_diagonal(&self) -> Matrix {
        let mut m = self.gamma.clone();
        m.fill_diagonal(0.0);
        m
    }

    /// Copy with every off-diagonal entry multiplied by `s`.
    pub fn with_scaled_off_diagonal(&self, s: f64) -> CouplingMatrix {
        let mut g = self.gamma.clone();
        for i in 0..self.modes() {
            for j in 0..self.modes() {
                if i != j {
                    g[(i, j)] *= s;
                }
            }
        }
        let kind = if s == 1.0 { self.kind } else { CouplingKind::General };
        CouplingMatrix { gamma: g, kind }
    }

    /// Simultaneous permutation of rows and columns: new mode `k` is old mode `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> CouplingMatrix {
        let n = self.modes();
        let g = Matrix::from_fn(n, n, |i, j| self.gamma[(perm[i], perm[j])]);
        CouplingMatrix { gamma: g, kind: self.kind }
    }
}

/// One instance of the coupled Lyapunov equations: `(A, Y, Γ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MjlsProblem {
    pub(crate) a: ModeTuple,
    pub(crate) y: SymTuple,
    pub(crate) gamma: CouplingMatrix,
}

impl MjlsProblem {
    pub fn new(a: ModeTuple, y: SymTuple, gamma: CouplingMatrix) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
        }
        let (modes, n) = (a.modes(), a.rows());
        if gamma.modes() != modes {
            return Err(Error::Dimension(format!("Γ is {0}x{0}, expected {modes}x{modes}", gamma.modes())));
        }
        y.ensure_shape(modes, n)?;
        for i in 0..modes {
            if gamma.get(i, i) >= 0.0 {
                return Err(Error::CouplingSign { row: i + 1, col: i + 1, value: gamma.get(i, i) });
            }
        }
        Ok(MjlsProblem { a, y, gamma })
    }

    /// Number of modes `N`.
    pub fn modes(&self) -> usize {
        self.a.modes()
    }

    /// State dimension `n`.
    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn a(&self) -> &ModeTuple {
        &self.a
    }

    pub fn y(&self) -> &SymTuple {
        &self.y
    }

    pub fn gamma(&self) -> &CouplingMatrix {
        &self.gamma
    }

    /// Same `A` and `Γ` with a new right-hand side.
    pub fn with_rhs(&self, y: SymTuple) -> Result<MjlsProblem> {
        y.ensure_shape(self.modes(), self.dim())?;
        Ok(MjlsProblem { a: self.a.clone(), y, gamma: self.gamma.clone() })
    }

    pub fn with_gamma(&self, gamma: CouplingMatrix) -> Result<MjlsProblem> {
        MjlsProblem::new(self.a.clone(), self.y.clone(), gamma)
    }

    /// Relabels the modes: new mode `k` is old mode `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<MjlsProblem> {
        let a = ModeTuple::new(perm.iter().map(|&p| self.a[p].clone()).collect())?;
        let y = SymTuple::from_blocks(perm.iter().map(|&p| self.y[p].clone()).collect());
        MjlsProblem::new(a, y, self.gamma.permuted(perm))
    }

    pub(crate) fn ensure_tuple(&self, x: &SymTuple) -> Result<()> {
        x.ensure_shape(self.modes(), self.dim())
    }
}

/// The defect tuple `f_i(X) = A_i X_i + X_i A_iᵀ + Σ_j γ_ij X_j + Y_i`.
pub fn residual_tuple(p: &MjlsProblem, x: &SymTuple) -> Result<SymTuple> {
    p.ensure_tuple(x)?;
    let mut z = crate::operators::apply_l_plus_pi(p, x)?;
    z.axpy(1.0, &p.y);
    Ok(z)
}

/// `sqrt(Σ_i ‖f_i(X)‖_F²)`.
pub fn residual_norm(p: &MjlsProblem, x: &SymTuple) -> Result<f64> {
    Ok(residual_tuple(p, x)?.norm())
}

/// `sqrt(Σ_i ‖X_i − X*_i‖_F²)`.
pub fn error_norm(x: &SymTuple, xstar: &SymTuple) -> Result<f64> {
    if !x.same_shape(xstar) {
        return Err(Error::Dimension(format!(
            "N={} n={} vs N={} n={}",
            x.modes(),
            x.dim(),
            xstar.modes(),
            xstar.dim()
        )));
    }
    Ok(x.sub(xstar).norm())
}

/// Solver identifiers, with the short names used on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Jacobi,
    GaussSeidel,
    KrylovGs,
    KrylovJacobi,
    SteepestDescent,
    ConjugateGradient,
    TrustRegion,
    Direct,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Jacobi,
        Method::GaussSeidel,
        Method::KrylovGs,
        Method::KrylovJacobi,
        Method::SteepestDescent,
        Method::ConjugateGradient,
        Method::TrustRegion,
        Method::Direct,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Jacobi => "jacobi",
            Method::GaussSeidel => "gauss-seidel",
            Method::KrylovGs => "krylov-gs",
            Method::KrylovJacobi => "krylov-jacobi",
            Method::SteepestDescent => "sd",
            Method::ConjugateGradient => "cg",
            Method::TrustRegion => "tr",
            Method::Direct => "direct",
        }
    }

    /// True for the optimization-based methods (gradient stopping rule).
    pub fn is_optimization(self) -> bool {
        matches!(self, Method::SteepestDescent | Method::ConjugateGradient | Method::TrustRegion)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let m = match s {
            "jacobi" => Method::Jacobi,
            "gauss-seidel" | "gs" => Method::GaussSeidel,
            "krylov-gs" | "alg1" => Method::KrylovGs,
            "krylov-jacobi" => Method::KrylovJacobi,
            "sd" | "alg2" => Method::SteepestDescent,
            "cg" | "alg3" => Method::ConjugateGradient,
            "tr" | "alg4" => Method::TrustRegion,
            "direct" => Method::Direct,
            other => return Err(Error::Config(format!("unknown method `{other}`"))),
        };
        Ok(m)
    }
}

/// Outcome of one solve.
///
/// `iterations` is fractional: the Krylov solvers count every operator
/// application as half an iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub method: Method,
    pub iterations: f64,
    /// Residual of the original equation, `sqrt(f(X))`.
    pub residual: f64,
    pub wall_time_s: f64,
    /// Distance to a known solution, when one exists.
    pub error: Option<f64>,
    pub converged: bool,
    /// Tolerance the convergence flag refers to.
    pub tolerance: f64,
}

impl SolverReport {
    pub(crate) fn new(method: Method, tolerance: f64) -> Self {
        SolverReport {
            method,
            iterations: 0.0,
            residual: f64::NAN,
            wall_time_s: 0.0,
            error: None,
            converged: false,
            tolerance,
        }
    }

    /// Fills in `error` from a known solution.
    pub fn with_error(mut self, x: &SymTuple, xstar: &SymTuple) -> Result<Self> {
        self.error = Some(error_norm(x, xstar)?);
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_mode() -> MjlsProblem {
        let a = ModeTuple::new(vec![-Matrix::identity(2, 2), Matrix::from_row_slice(2, 2, &[-2.0, 1.0, 0.0, -3.0])])
            .unwrap();
        let y = SymTuple::new(vec![Matrix::identity(2, 2), Matrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0])])
            .unwrap();
        let g = CouplingMatrix::new(Matrix::from_row_slice(2, 2, &[-1.0, 1.0, 2.0, -2.0])).unwrap();
        MjlsProblem::new(a, y, g).unwrap()
    }

    #[test]
    fn residual_at_zero_is_rhs_norm() {
        let p = two_mode();
        let r = residual_norm(&p, &SymTuple::zeros(2, 2)).unwrap();
        assert!((r - p.y().norm()).abs() < 1e-15);
    }

    #[test]
    fn error_norm_cases() {
        let x = SymTuple::identity(1, 3);
        assert_eq!(error_norm(&x, &x).unwrap(), 0.0);
        let z = SymTuple::zeros(1, 3);
        assert!((error_norm(&x, &z).unwrap() - 3f64.sqrt()).abs() < 1e-15);
        assert!(error_norm(&x, &SymTuple::zeros(2, 3)).is_err());
    }

    #[test]
    fn symtuple_rejects_asymmetric_unless_asked() {
        let b = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.1, 1.0]);
        assert!(matches!(SymTuple::new(vec![b.clone()]), Err(Error::Asymmetric { index: 1, .. })));
        let s = SymTuple::new_symmetrized(vec![b]).unwrap();
        assert_eq!(s[0][(0, 1)], 2.05);
        // tiny asymmetry is accepted and removed
        let b = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0 + 1e-12, 1.0]);
        let s = SymTuple::new(vec![b]).unwrap();
        assert_eq!(s[0], s[0].transpose());
    }

    #[test]
    fn coupling_validation() {
        let bad = Matrix::from_row_slice(2, 2, &[-1.0, -0.1, 1.0, -1.0]);
        assert!(matches!(CouplingMatrix::new(bad), Err(Error::CouplingSign { row: 1, col: 2, .. })));
        let zero_diag = Matrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, -1.0]);
        assert!(CouplingMatrix::new(zero_diag).is_err());
        let not_rate = Matrix::from_row_slice(2, 2, &[-1.0, 0.5, 1.0, -1.0]);
        assert!(CouplingMatrix::new(not_rate.clone()).is_ok());
        assert!(matches!(CouplingMatrix::rate_matrix(not_rate), Err(Error::CouplingRowSum { row: 1, .. })));
    }

    #[test]
    fn problem_rejects_mismatched_shapes() {
        let p = two_mode();
        let y3 = SymTuple::zeros(2, 3);
        assert!(p.with_rhs(y3).is_err());
        assert!(residual_norm(&p, &SymTuple::zeros(3, 2)).is_err());
    }

    #[test]
    fn residual_is_permutation_invariant() {
        let p = two_mode();
        let x = SymTuple::new(vec![Matrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 2.0]), Matrix::identity(2, 2)])
            .unwrap();
        let q = p.permuted(&[1, 0]).unwrap();
        let xq = SymTuple::from_blocks(vec![x[1].clone(), x[0].clone()]);
        let r1 = residual_norm(&p, &x).unwrap();
        let r2 = residual_norm(&q, &xq).unwrap();
        assert!((r1 - r2).abs() <= 1e-14 * r1);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("newton".parse::<Method>().is_err());
    }
}
