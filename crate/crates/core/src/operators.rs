//! Structured linear operators on `H = (Hⁿ)ᴺ`.
//!
//! * `L(X)_i = Ã_i X_i + X_i Ã_iᵀ` with the shifted modes `Ã_i = A_i + (γ_ii/2) I`
//! * `Π(X)_i = Σ_{j≠i} γ_ij X_j`
//! * `T_GS`, `T_J = −L⁻¹Π` and the matching preconditioned right-hand sides
//! * the explicit `Nn² × Nn²` Kronecker matrix of `L + Π`, used as a reference
//!
//! Vectorization stacks the columns of each block, blocks in mode order.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{add_scaled, LyapunovSolver, Matrix};
use crate::model::{MjlsProblem, SymTuple};

/// Upper bound on `Nn²` for explicit Kronecker assembly.
pub const KRON_LIMIT: usize = 20_000;

/// The shifted mode matrices `A_i + (γ_ii/2) I` together with their cached
/// Schur factorizations.
#[derive(Debug, Clone)]
pub struct ShiftedModes {
    shifted: Vec<Matrix>,
    solvers: Vec<LyapunovSolver>,
}

impl ShiftedModes {
    /// Shifts and factors every mode. Fails with the mode index if a shifted
    /// Lyapunov operator is singular.
    pub fn new(p: &MjlsProblem) -> Result<Self> {
        let shifted = shifted_matrices(p);
        let solvers = shifted
            .iter()
            .enumerate()
            .map(|(i, a)| LyapunovSolver::new(a).map_err(|e| e.in_mode(i + 1)))
            .collect::<Result<Vec<_>>>()?;
        Ok(ShiftedModes { shifted, solvers })
    }

    pub fn modes(&self) -> usize {
        self.shifted.len()
    }

    pub fn shifted(&self, i: usize) -> &Matrix {
        &self.shifted[i]
    }

    pub fn solver(&self, i: usize) -> &LyapunovSolver {
        &self.solvers[i]
    }

    /// `X` with `Ã_i X + X Ã_iᵀ = z` for mode `i`.
    fn linv_block(&self, i: usize, z: &Matrix) -> Result<Matrix> {
        let mut rhs = z.clone();
        rhs.neg_mut();
        self.solvers[i].solve(&rhs).map_err(|e| e.in_mode(i + 1))
    }
}

/// `A_i + (γ_ii/2) I` for every mode, without factoring.
pub fn shifted_matrices(p: &MjlsProblem) -> Vec<Matrix> {
    let n = p.dim();
    (0..p.modes())
        .map(|i| &p.a()[i] + Matrix::identity(n, n) * (0.5 * p.gamma().get(i, i)))
        .collect()
}

fn lyapunov_op(a: &Matrix, x: &Matrix) -> Matrix {
    let ax = a * x;
    let mut z = ax.transpose();
    z += ax;
    z
}

/// Blockwise Lyapunov operator `L`.
pub fn apply_l(p: &MjlsProblem, x: &SymTuple) -> Result<SymTuple> {
    p.ensure_tuple(x)?;
    let shifted = shifted_matrices(p);
    Ok(SymTuple::from_blocks(shifted.iter().zip(x.blocks()).map(|(a, xi)| lyapunov_op(a, xi)).collect()))
}

/// Coupling operator `Π`, evaluated as one product of the `n² × N` matrix of
/// stacked blocks with the transposed off-diagonal part of `Γ`.
pub fn apply_pi(p: &MjlsProblem, x: &SymTuple) -> Result<SymTuple> {
    p.ensure_tuple(x)?;
    let (modes, n) = (p.modes(), p.dim());
    let stacked = Matrix::from_iterator(n * n, modes, x.blocks().iter().flat_map(|b| b.iter().copied()));
    let off = p.gamma().off_diagonal();
    let out = stacked * off.transpose();
    Ok(SymTuple::symmetrized_unchecked(
        out.column_iter().map(|c| Matrix::from_column_slice(n, n, c.as_slice())).collect(),
    ))
}

/// `(L + Π)(X)`; the solution of the coupled equations satisfies
/// `(L + Π)(X) = −Y`.
pub fn apply_l_plus_pi(p: &MjlsProblem, x: &SymTuple) -> Result<SymTuple> {
    let mut z = apply_l(p, x)?;
    z.axpy(1.0, &apply_pi(p, x)?);
    Ok(z)
}

/// Adjoint of `L + Π` in the trace inner product:
/// `Z ↦ (Ã_iᵀ Z_i + Z_i Ã_i + Σ_{j≠i} γ_ji Z_j)_i`.
pub fn apply_l_plus_pi_adjoint(p: &MjlsProblem, z: &SymTuple) -> Result<SymTuple> {
    p.ensure_tuple(z)?;
    let (modes, n) = (p.modes(), p.dim());
    let stacked = Matrix::from_iterator(n * n, modes, z.blocks().iter().flat_map(|b| b.iter().copied()));
    let coupled = stacked * p.gamma().off_diagonal();
    let blocks = shifted_matrices(p)
        .iter()
        .zip(z.blocks())
        .zip(coupled.column_iter())
        .map(|((a, zi), c)| lyapunov_op(&a.transpose(), zi) + Matrix::from_column_slice(n, n, c.as_slice()))
        .collect();
    Ok(SymTuple::symmetrized_unchecked(blocks))
}

/// `L⁻¹(Z)`: `N` independent Lyapunov solves, so that `L(L⁻¹(Z)) = Z`.
pub fn apply_linv(modes: &ShiftedModes, z: &SymTuple) -> Result<SymTuple> {
    if z.modes() != modes.modes() {
        return Err(Error::Dimension(format!("tuple has {} modes, expected {}", z.modes(), modes.modes())));
    }
    let blocks = z.blocks().iter().enumerate().map(|(i, zi)| modes.linv_block(i, zi)).collect::<Result<_>>()?;
    Ok(SymTuple::from_blocks(blocks))
}

/// Σ_j γ_ij S_j over `j ≠ i`, where `pick(j)` supplies `S_j`.
fn coupling_sum<'a>(p: &MjlsProblem, i: usize, pick: impl Fn(usize) -> &'a Matrix) -> Matrix {
    let n = p.dim();
    let mut acc = Matrix::zeros(n, n);
    for j in 0..p.modes() {
        let g = p.gamma().get(i, j);
        if j != i && g != 0.0 {
            add_scaled(&mut acc, g, pick(j));
        }
    }
    acc
}

/// Gauss–Seidel map `T_GS: X ↦ X̃` with
/// `X̃_i = −L_i⁻¹(Σ_{j<i} γ_ij X̃_j + Σ_{j>i} γ_ij X_j)`, swept in ascending `i`.
pub fn apply_t_gs(p: &MjlsProblem, modes: &ShiftedModes, x: &SymTuple) -> Result<SymTuple> {
    p.ensure_tuple(x)?;
    let mut out: Vec<Matrix> = Vec::with_capacity(p.modes());
    for i in 0..p.modes() {
        let mut s = coupling_sum(p, i, |j| if j < i { &out[j] } else { &x[j] });
        s.neg_mut();
        out.push(modes.linv_block(i, &s)?);
    }
    Ok(SymTuple::from_blocks(out))
}

/// Gauss–Seidel right-hand side `Ỹ_i = −L_i⁻¹(Y_i + Σ_{j<i} γ_ij Ỹ_j)`.
///
/// The solution of `(I − T_GS)(X) = Ỹ` is the solution of `(L + Π)(X) = −Y`.
pub fn precondition_rhs(p: &MjlsProblem, modes: &ShiftedModes, y: &SymTuple) -> Result<SymTuple> {
    p.ensure_tuple(y)?;
    let mut out: Vec<Matrix> = Vec::with_capacity(p.modes());
    for i in 0..p.modes() {
        let n = p.dim();
        let mut s = Matrix::zeros(n, n);
        for (j, yj) in out.iter().enumerate() {
            let g = p.gamma().get(i, j);
            if g != 0.0 {
                add_scaled(&mut s, g, yj);
            }
        }
        s += &y[i];
        s.neg_mut();
        out.push(modes.linv_block(i, &s)?);
    }
    Ok(SymTuple::from_blocks(out))
}

/// Jacobi map `T_J = −L⁻¹ Π`.
pub fn apply_t_jacobi(p: &MjlsProblem, modes: &ShiftedModes, x: &SymTuple) -> Result<SymTuple> {
    let mut z = apply_linv(modes, &apply_pi(p, x)?)?;
    z.scale(-1.0);
    Ok(z)
}

/// Jacobi right-hand side `Ỹ = −L⁻¹(Y)`.
pub fn jacobi_rhs(p: &MjlsProblem, modes: &ShiftedModes, y: &SymTuple) -> Result<SymTuple> {
    p.ensure_tuple(y)?;
    let mut z = apply_linv(modes, y)?;
    z.scale(-1.0);
    Ok(z)
}

fn kron_guard(p: &MjlsProblem) -> Result<usize> {
    let size = p.modes() * p.dim() * p.dim();
    if size > KRON_LIMIT {
        return Err(Error::TooLarge { size, limit: KRON_LIMIT });
    }
    Ok(size)
}

fn kron_sum(a: &Matrix) -> Matrix {
    let n = a.nrows();
    let eye = Matrix::identity(n, n);
    eye.kronecker(a) + a.kronecker(&eye)
}

/// Kronecker matrix of `L` alone (block diagonal).
pub fn assemble_kron_l(p: &MjlsProblem) -> Result<Matrix> {
    let size = kron_guard(p)?;
    let n2 = p.dim() * p.dim();
    let mut m = Matrix::zeros(size, size);
    for (i, a) in shifted_matrices(p).iter().enumerate() {
        m.view_mut((i * n2, i * n2), (n2, n2)).copy_from(&kron_sum(a));
    }
    Ok(m)
}

/// Kronecker matrix of `Π`: `Γ_off ⊗ I_{n²}`.
pub fn assemble_kron_pi(p: &MjlsProblem) -> Result<Matrix> {
    kron_guard(p)?;
    let n2 = p.dim() * p.dim();
    Ok(p.gamma().off_diagonal().kronecker(&Matrix::identity(n2, n2)))
}

/// Explicit matrix of `L + Π` with block `(i, j) = δ_ij (I⊗A_i + A_i⊗I) + γ_ij I`.
pub fn assemble_kron(p: &MjlsProblem) -> Result<Matrix> {
    Ok(assemble_kron_l(p)? + assemble_kron_pi(p)?)
}

/// Direct solution of `(L + Π)(X) = −Y` by LU on the Kronecker matrix.
pub fn solve_direct(p: &MjlsProblem) -> Result<SymTuple> {
    let m = assemble_kron(p)?;
    let rhs = -DVector::from_vec(p.y().to_vec());
    let lu = m.lu();
    let sol = lu.solve(&rhs).ok_or(Error::SingularSystem)?;
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem);
    }
    SymTuple::from_vec(p.modes(), p.dim(), sol.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CouplingMatrix, ModeTuple};

    fn scalar_problem(a: &[f64], gamma: &[f64], y: &[f64]) -> MjlsProblem {
        let n = a.len();
        let at = ModeTuple::new(a.iter().map(|&v| Matrix::from_element(1, 1, v)).collect()).unwrap();
        let yt = SymTuple::new(y.iter().map(|&v| Matrix::from_element(1, 1, v)).collect()).unwrap();
        let g = CouplingMatrix::new(Matrix::from_row_slice(n, n, gamma)).unwrap();
        MjlsProblem::new(at, yt, g).unwrap()
    }

    #[test]
    fn l_on_identity_with_symmetric_modes() {
        let a1 = Matrix::from_row_slice(2, 2, &[-2.0, 0.5, 0.5, -1.0]);
        let a2 = Matrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -4.0]);
        let p = MjlsProblem::new(
            ModeTuple::new(vec![a1.clone(), a2.clone()]).unwrap(),
            SymTuple::zeros(2, 2),
            CouplingMatrix::new(Matrix::from_row_slice(2, 2, &[-0.7, 0.2, 0.1, -0.3])).unwrap(),
        )
        .unwrap();
        let z = apply_l(&p, &SymTuple::identity(2, 2)).unwrap();
        assert!((&z[0] - (&a1 * 2.0 + Matrix::identity(2, 2) * -0.7)).norm() < 1e-15);
        assert!((&z[1] - (&a2 * 2.0 + Matrix::identity(2, 2) * -0.3)).norm() < 1e-15);
    }

    #[test]
    fn pi_two_modes() {
        let p = MjlsProblem::new(
            ModeTuple::new(vec![-Matrix::identity(2, 2); 2]).unwrap(),
            SymTuple::zeros(2, 2),
            CouplingMatrix::new(Matrix::from_row_slice(2, 2, &[-1.0, 1.0, 2.0, -2.0])).unwrap(),
        )
        .unwrap();
        let x1 = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 3.0]);
        let x2 = Matrix::from_row_slice(2, 2, &[-1.0, 0.5, 0.5, 4.0]);
        let z = apply_pi(&p, &SymTuple::new(vec![x1.clone(), x2.clone()]).unwrap()).unwrap();
        assert_eq!(z[0], x2);
        assert_eq!(z[1], x1 * 2.0);
    }

    #[test]
    fn rate_matrix_cancels_coupling_on_identity() {
        let a1 = Matrix::from_row_slice(2, 2, &[-2.0, 0.5, 0.5, -1.0]);
        let a2 = -Matrix::identity(2, 2) * 3.0;
        let p = MjlsProblem::new(
            ModeTuple::new(vec![a1.clone(), a2.clone()]).unwrap(),
            SymTuple::zeros(2, 2),
            CouplingMatrix::rate_matrix(Matrix::from_row_slice(2, 2, &[-0.3, 0.3, 0.5, -0.5])).unwrap(),
        )
        .unwrap();
        let z = apply_l_plus_pi(&p, &SymTuple::identity(2, 2)).unwrap();
        assert!((&z[0] - a1 * 2.0).norm() < 1e-15);
        assert!((&z[1] - a2 * 2.0).norm() < 1e-15);
    }

    #[test]
    fn linv_scalar_shift() {
        // A = 0, γ = -2: L(X) = -2X, so L⁻¹(Z) = -Z/2
        let p = scalar_problem(&[0.0], &[-2.0], &[0.0]);
        let m = ShiftedModes::new(&p).unwrap();
        let z = SymTuple::new(vec![Matrix::from_element(1, 1, 3.0)]).unwrap();
        let x = apply_linv(&m, &z).unwrap();
        assert!((x[0][(0, 0)] + 1.5).abs() < 1e-15);
    }

    #[test]
    fn singular_mode_reports_index() {
        // second mode: A = 1, γ = -2 → shifted A = 0
        let p = scalar_problem(&[-1.0, 1.0], &[-1.0, 1.0, 1.0, -2.0], &[1.0, 1.0]);
        match ShiftedModes::new(&p) {
            Err(Error::Mode { mode: 2, .. }) => {}
            other => panic!("expected mode 2 singularity, got {other:?}"),
        }
    }

    #[test]
    fn t_gs_without_coupling_is_zero() {
        let p = scalar_problem(&[-1.0, -2.0], &[-1.0, 0.0, 0.0, -1.0], &[1.0, 1.0]);
        let m = ShiftedModes::new(&p).unwrap();
        let x = SymTuple::new(vec![Matrix::from_element(1, 1, 5.0), Matrix::from_element(1, 1, -2.0)]).unwrap();
        let t = apply_t_gs(&p, &m, &x).unwrap();
        assert_eq!(t.norm(), 0.0);
        // decoupled right-hand side is the plain Lyapunov solution
        let yt = precondition_rhs(&p, &m, p.y()).unwrap();
        assert!((yt[0][(0, 0)] - 1.0 / 3.0).abs() < 1e-15); // 2(-1.5)x + 1 = 0
        assert!((yt[1][(0, 0)] - 1.0 / 5.0).abs() < 1e-15); // 2(-2.5)x + 1 = 0
    }

    #[test]
    fn t_gs_two_mode_unrolled() {
        let p = scalar_problem(&[-1.0, -2.0], &[-1.0, 0.5, 0.25, -1.0], &[0.0, 0.0]);
        let m = ShiftedModes::new(&p).unwrap();
        let x = SymTuple::new(vec![Matrix::from_element(1, 1, 7.0), Matrix::from_element(1, 1, 3.0)]).unwrap();
        let t = apply_t_gs(&p, &m, &x).unwrap();
        // L1 = 2(-1.5) = -3, L2 = 2(-2.5) = -5
        let x1 = -(0.5 * 3.0) / -3.0;
        let x2 = -(0.25 * x1) / -5.0;
        assert!((t[0][(0, 0)] - x1).abs() < 1e-15);
        assert!((t[1][(0, 0)] - x2).abs() < 1e-15);
    }

    #[test]
    fn kron_scalar_and_single_mode() {
        let p = scalar_problem(&[-1.0, -3.0], &[-1.0, 1.0, 2.0, -2.0], &[1.0, 1.0]);
        let m = assemble_kron(&p).unwrap();
        let expected = Matrix::from_row_slice(2, 2, &[-3.0, 1.0, 2.0, -8.0]);
        assert_eq!(m, expected);

        let a = Matrix::from_row_slice(2, 2, &[-1.0, 2.0, 0.0, -3.0]);
        let p = MjlsProblem::new(
            ModeTuple::new(vec![a.clone()]).unwrap(),
            SymTuple::identity(1, 2),
            CouplingMatrix::new(Matrix::from_element(1, 1, -0.5)).unwrap(),
        )
        .unwrap();
        let eye = Matrix::identity(2, 2);
        let expected = eye.kronecker(&a) + a.kronecker(&eye) - Matrix::identity(4, 4) * 0.5;
        assert!((assemble_kron(&p).unwrap() - expected).norm() < 1e-15);
    }

    #[test]
    fn direct_with_zero_rhs_is_zero() {
        let p = scalar_problem(&[-1.0, -3.0], &[-1.0, 1.0, 2.0, -2.0], &[0.0, 0.0]);
        assert_eq!(solve_direct(&p).unwrap().norm(), 0.0);
    }

    #[test]
    fn kron_guard_trips() {
        let n = 80;
        let p = MjlsProblem::new(
            ModeTuple::new(vec![-Matrix::identity(n, n); 4]).unwrap(),
            SymTuple::zeros(4, n),
            CouplingMatrix::new(Matrix::identity(4, 4) * -1.0).unwrap(),
        )
        .unwrap();
        assert!(matches!(assemble_kron(&p), Err(Error::TooLarge { .. })));
    }
}
