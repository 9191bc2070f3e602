//! Dense real kernels: real Schur decomposition and the Bartels–Stewart
//! Lyapunov solver.
//!
//! The Schur form is computed by Householder reduction to upper Hessenberg
//! form followed by Francis double-shift QR sweeps (the EISPACK `orthes` /
//! `hqr2` pair, without the eigenvector back-substitution). The Lyapunov
//! solver reuses a cached Schur form so that repeated solves with the same
//! coefficient matrix cost two similarity transforms and one quasi-triangular
//! back-substitution.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Real dense matrix used throughout the crate.
pub type Matrix = DMatrix<f64>;

/// Complex eigenvalue as `(re, im)`.
pub type Eigenvalue = (f64, f64);

const MAX_SWEEPS_PER_EIGENVALUE: usize = 300;

/// Real Schur decomposition `A = U T Uᵀ`.
#[derive(Debug, Clone)]
pub struct SchurForm {
    /// Orthogonal Schur vectors.
    pub u: Matrix,
    /// Quasi-upper-triangular factor with 1×1 and 2×2 diagonal blocks.
    pub t: Matrix,
    /// Diagonal blocks as `(start, size)`, in ascending order.
    pub blocks: Vec<(usize, usize)>,
}

impl SchurForm {
    pub fn dim(&self) -> usize {
        self.t.nrows()
    }

    /// Eigenvalues read off the diagonal blocks, in block order.
    pub fn eigenvalues(&self) -> Vec<Eigenvalue> {
        let mut out = Vec::with_capacity(self.dim());
        for &(s, size) in &self.blocks {
            if size == 1 {
                out.push((self.t[(s, s)], 0.0));
            } else {
                let (a, b, c, d) = (
                    self.t[(s, s)],
                    self.t[(s, s + 1)],
                    self.t[(s + 1, s)],
                    self.t[(s + 1, s + 1)],
                );
                let p = 0.5 * (a - d);
                let disc = p * p + b * c;
                let mid = 0.5 * (a + d);
                if disc >= 0.0 {
                    let r = disc.sqrt();
                    out.push((mid + r, 0.0));
                    out.push((mid - r, 0.0));
                } else {
                    let r = (-disc).sqrt();
                    out.push((mid, r));
                    out.push((mid, -r));
                }
            }
        }
        out
    }
}

fn check_square(a: &Matrix) -> Result<usize> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix".into()));
    }
    Ok(a.nrows())
}

/// Householder reduction to upper Hessenberg form. Returns `(H, V)` with
/// `A = V H Vᵀ`.
fn hessenberg(a: &Matrix) -> (Matrix, Matrix) {
    let n = a.nrows();
    let mut h = a.clone();
    let mut v = Matrix::identity(n, n);
    if n < 3 {
        return (h, v);
    }
    let high = n - 1;
    let mut ort = vec![0.0; n];

    for m in 1..high {
        let scale: f64 = (m..=high).map(|i| h[(i, m - 1)].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut hh = 0.0;
        for i in (m..=high).rev() {
            ort[i] = h[(i, m - 1)] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;

        for j in m..n {
            let mut f = 0.0;
            for i in (m..=high).rev() {
                f += ort[i] * h[(i, j)];
            }
            f /= hh;
            for i in m..=high {
                h[(i, j)] -= f * ort[i];
            }
        }
        for i in 0..=high {
            let mut f = 0.0;
            for j in (m..=high).rev() {
                f += ort[j] * h[(i, j)];
            }
            f /= hh;
            for j in m..=high {
                h[(i, j)] -= f * ort[j];
            }
        }
        ort[m] *= scale;
        h[(m, m - 1)] = scale * g;
    }

    for m in (1..high).rev() {
        if h[(m, m - 1)] != 0.0 {
            for i in m + 1..=high {
                ort[i] = h[(i, m - 1)];
            }
            for j in m..=high {
                let mut g = 0.0;
                for i in m..=high {
                    g += ort[i] * v[(i, j)];
                }
                g = (g / ort[m]) / h[(m, m - 1)];
                for i in m..=high {
                    v[(i, j)] += g * ort[i];
                }
            }
        }
    }
    for j in 0..n {
        for i in j + 2..n {
            h[(i, j)] = 0.0;
        }
    }
    (h, v)
}

/// Real Schur decomposition by Hessenberg reduction and Francis double-shift
/// QR iteration.
pub fn real_schur(a: &Matrix) -> Result<SchurForm> {
    let nn = check_square(a)?;
    let (mut h, mut v) = hessenberg(a);
    let low = 0usize;
    let high = nn - 1;
    let eps = f64::EPSILON;
    let mut exshift = 0.0;
    let (mut p, mut q, mut r, mut s, mut z): (f64, f64, f64, f64, f64);
    let (mut w, mut x, mut y);
    // complex[i] marks the leading index of a 2x2 block with complex eigenvalues
    let mut complex = vec![false; nn];

    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }

    let mut n = nn as isize - 1;
    let mut iter = 0usize;
    while n >= low as isize {
        let nu = n as usize;
        let mut l = nu;
        while l > low {
            s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[(l, l - 1)] == 0.0 || h[(l, l - 1)].abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == nu {
            h[(nu, nu)] += exshift;
            if nu > 0 {
                h[(nu, nu - 1)] = 0.0;
            }
            n -= 1;
            iter = 0;
        } else if l + 1 == nu {
            w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            p = (h[(nu - 1, nu - 1)] - h[(nu, nu)]) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            h[(nu, nu)] += exshift;
            h[(nu - 1, nu - 1)] += exshift;
            if nu >= 2 {
                h[(nu - 1, nu - 2)] = 0.0;
            }
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                x = h[(nu, nu - 1)];
                s = x.abs() + z.abs();
                p = x / s;
                q = z / s;
                r = (p * p + q * q).sqrt();
                p /= r;
                q /= r;
                for j in nu - 1..nn {
                    z = h[(nu - 1, j)];
                    h[(nu - 1, j)] = q * z + p * h[(nu, j)];
                    h[(nu, j)] = q * h[(nu, j)] - p * z;
                }
                for i in 0..=nu {
                    z = h[(i, nu - 1)];
                    h[(i, nu - 1)] = q * z + p * h[(i, nu)];
                    h[(i, nu)] = q * h[(i, nu)] - p * z;
                }
                for i in low..=high {
                    z = v[(i, nu - 1)];
                    v[(i, nu - 1)] = q * z + p * v[(i, nu)];
                    v[(i, nu)] = q * v[(i, nu)] - p * z;
                }
                h[(nu, nu - 1)] = 0.0;
            } else {
                complex[nu - 1] = true;
            }
            n -= 2;
            iter = 0;
        } else {
            x = h[(nu, nu)];
            y = 0.0;
            w = 0.0;
            if l < nu {
                y = h[(nu - 1, nu - 1)];
                w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            }
            if iter == 10 {
                exshift += x;
                for i in low..=nu {
                    h[(i, i)] -= x;
                }
                s = h[(nu, nu - 1)].abs() + h[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in low..=nu {
                        h[(i, i)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }
            iter += 1;
            if iter > MAX_SWEEPS_PER_EIGENVALUE {
                return Err(Error::SchurNoConvergence { index: nu, sweeps: iter - 1 });
            }

            let mut m = nu - 2;
            loop {
                z = h[(m, m)];
                r = x - z;
                s = y - z;
                p = (r * s - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - r - s;
                r = h[(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[(m, m - 1)].abs() * (q.abs() + r.abs())
                    < eps * (p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs()))
                {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                h[(i, i - 2)] = 0.0;
                if i > m + 2 {
                    h[(i, i - 3)] = 0.0;
                }
            }

            for k in m..nu {
                let notlast = k != nu - 1;
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        h[(k, k - 1)] = -s * x;
                    } else if l != m {
                        h[(k, k - 1)] = -h[(k, k - 1)];
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..nn {
                        p = h[(k, j)] + q * h[(k + 1, j)];
                        if notlast {
                            p += r * h[(k + 2, j)];
                            h[(k + 2, j)] -= p * z;
                        }
                        h[(k, j)] -= p * x;
                        h[(k + 1, j)] -= p * y;
                    }
                    for i in 0..=nu.min(k + 3) {
                        p = x * h[(i, k)] + y * h[(i, k + 1)];
                        if notlast {
                            p += z * h[(i, k + 2)];
                            h[(i, k + 2)] -= p * r;
                        }
                        h[(i, k)] -= p;
                        h[(i, k + 1)] -= p * q;
                    }
                    for i in low..=high {
                        p = x * v[(i, k)] + y * v[(i, k + 1)];
                        if notlast {
                            p += z * v[(i, k + 2)];
                            v[(i, k + 2)] -= p * r;
                        }
                        v[(i, k)] -= p;
                        v[(i, k + 1)] -= p * q;
                    }
                }
            }
        }
    }

    let mut blocks = Vec::new();
    let mut i = 0;
    while i < nn {
        if i + 1 < nn && complex[i] {
            blocks.push((i, 2));
            i += 2;
        } else {
            blocks.push((i, 1));
            i += 1;
        }
    }
    // clear everything below the block diagonal
    for &(s0, size) in &blocks {
        for j in s0..s0 + size {
            for i in s0 + size..nn {
                h[(i, j)] = 0.0;
            }
        }
    }
    Ok(SchurForm { u: v, t: h, blocks })
}

/// All eigenvalues of a square matrix.
pub fn eigenvalues(a: &Matrix) -> Result<Vec<Eigenvalue>> {
    Ok(real_schur(a)?.eigenvalues())
}

/// Largest real part over the spectrum of `a`.
pub fn spectral_abscissa(a: &Matrix) -> Result<f64> {
    Ok(eigenvalues(a)?.into_iter().map(|(re, _)| re).fold(f64::NEG_INFINITY, f64::max))
}

/// Largest eigenvalue modulus of `a`.
pub fn spectral_radius(a: &Matrix) -> Result<f64> {
    Ok(eigenvalues(a)?.into_iter().map(|(re, im)| re.hypot(im)).fold(0.0, f64::max))
}

/// Solver for `A X + X Aᵀ + Q = 0` with a cached Schur form of `A`.
#[derive(Debug, Clone)]
pub struct LyapunovSolver {
    schur: SchurForm,
}

impl LyapunovSolver {
    /// Factor `a` and check that `λ_i + λ_j` stays away from zero relative to
    /// `‖a‖_F`.
    pub fn new(a: &Matrix) -> Result<Self> {
        let schur = real_schur(a)?;
        let eig = schur.eigenvalues();
        let threshold = 1e-12 * a.norm();
        for (i, &li) in eig.iter().enumerate() {
            for &lj in &eig[i..] {
                let sum = (li.0 + lj.0).hypot(li.1 + lj.1);
                if sum <= threshold {
                    return Err(Error::SingularLyapunov { pair: (li, lj) });
                }
            }
        }
        Ok(LyapunovSolver { schur })
    }

    pub fn schur(&self) -> &SchurForm {
        &self.schur
    }

    pub fn dim(&self) -> usize {
        self.schur.dim()
    }

    /// Returns the symmetric `X` with `A X + X Aᵀ + Q = 0`.
    pub fn solve(&self, q: &Matrix) -> Result<Matrix> {
        let n = self.dim();
        if q.nrows() != n || q.ncols() != n {
            return Err(Error::Dimension(format!(
                "right-hand side is {}x{}, expected {n}x{n}",
                q.nrows(),
                q.ncols()
            )));
        }
        let u = &self.schur.u;
        let mut c = u.tr_mul(q) * u;
        c.neg_mut();
        let xhat = solve_quasi_triangular(&self.schur, &c)?;
        let mut x = u * xhat * u.transpose();
        symmetrize(&mut x);
        Ok(x)
    }
}

/// Solves `T X + X Tᵀ = C` for symmetric `C` with `T` quasi-upper-triangular.
fn solve_quasi_triangular(schur: &SchurForm, c: &Matrix) -> Result<Matrix> {
    let t = &schur.t;
    let n = t.nrows();
    let mut x = Matrix::zeros(n, n);
    let blocks = &schur.blocks;

    for bk in (0..blocks.len()).rev() {
        let (k0, pk) = blocks[bk];
        let kend = k0 + pk;
        for bl in (0..=bk).rev() {
            let (l0, pl) = blocks[bl];
            let lend = l0 + pl;
            let mut rhs = [0.0f64; 4];
            for jj in 0..pl {
                for ii in 0..pk {
                    let (i, j) = (k0 + ii, l0 + jj);
                    let mut v = c[(i, j)];
                    for m in kend..n {
                        v -= t[(i, m)] * x[(m, j)];
                    }
                    for m in lend..n {
                        v -= x[(i, m)] * t[(j, m)];
                    }
                    rhs[ii + jj * pk] = v;
                }
            }
            let size = pk * pl;
            // (I_pl ⊗ T_kk + T_ll ⊗ I_pk) vec X = vec R
            let mut sys = [[0.0f64; 4]; 4];
            for jj in 0..pl {
                for ii in 0..pk {
                    let row = ii + jj * pk;
                    for kk in 0..pk {
                        sys[row][kk + jj * pk] += t[(k0 + ii, k0 + kk)];
                    }
                    for ll in 0..pl {
                        sys[row][ii + ll * pk] += t[(l0 + jj, l0 + ll)];
                    }
                }
            }
            let sol = small_solve(&mut sys, &mut rhs, size)?;
            for jj in 0..pl {
                for ii in 0..pk {
                    let val = sol[ii + jj * pk];
                    x[(k0 + ii, l0 + jj)] = val;
                    x[(l0 + jj, k0 + ii)] = val;
                }
            }
        }
    }
    Ok(x)
}

fn small_solve(a: &mut [[f64; 4]; 4], b: &mut [f64; 4], n: usize) -> Result<[f64; 4]> {
    let scale = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| a[i][j].abs()).fold(0.0, f64::max);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        if a[piv][col].abs() <= f64::EPSILON * scale || a[piv][col] == 0.0 {
            return Err(Error::SingularSystem);
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..n).rev() {
        let mut v = b[row];
        for k in row + 1..n {
            v -= a[row][k] * x[k];
        }
        x[row] = v / a[row][row];
    }
    Ok(x)
}

/// Solves `A X + X Aᵀ + Q = 0` (Bartels–Stewart). Output is symmetrized.
pub fn lyap_solve(a: &Matrix, q: &Matrix) -> Result<Matrix> {
    LyapunovSolver::new(a)?.solve(q)
}

/// `X ← (X + Xᵀ)/2` in place.
pub fn symmetrize(x: &mut Matrix) {
    let n = x.nrows();
    for j in 0..n {
        for i in j + 1..n {
            let v = 0.5 * (x[(i, j)] + x[(j, i)]);
            x[(i, j)] = v;
            x[(j, i)] = v;
        }
    }
}

/// Largest absolute entry of `x − xᵀ`.
pub fn asymmetry(x: &Matrix) -> f64 {
    let n = x.nrows();
    let mut m = 0.0f64;
    for j in 0..n {
        for i in j + 1..n {
            m = m.max((x[(i, j)] - x[(j, i)]).abs());
        }
    }
    m
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_symmetric_eigenvalue(x: &Matrix) -> f64 {
    let mut s = x.clone();
    symmetrize(&mut s);
    s.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
}

/// `acc += alpha · b`.
pub fn add_scaled(acc: &mut Matrix, alpha: f64, b: &Matrix) {
    for (a, v) in acc.as_mut_slice().iter_mut().zip(b.as_slice()) {
        *a += alpha * v;
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn randn(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
        Matrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal))
    }

    fn check_schur(a: &Matrix, f: &SchurForm) {
        let n = a.nrows() as f64;
        let orth = (f.u.transpose() * &f.u - Matrix::identity(a.nrows(), a.nrows())).norm();
        assert!(orth <= 1e-12 * n, "orthogonality {orth}");
        let rec = (&f.u * &f.t * f.u.transpose() - a).norm();
        assert!(rec <= 1e-10 * a.norm().max(1e-300), "reconstruction {rec}");
        for i in 1..a.nrows() {
            let in_block = f.blocks.iter().any(|&(s, size)| size == 2 && s + 1 == i);
            if !in_block {
                assert_eq!(f.t[(i, i - 1)], 0.0);
            }
            for j in 0..i.saturating_sub(1) {
                assert_eq!(f.t[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn schur_of_diagonal() {
        let a = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -2.0]));
        let f = real_schur(&a).unwrap();
        check_schur(&a, &f);
        let mut d: Vec<f64> = f.eigenvalues().iter().map(|e| e.0).collect();
        d.sort_by(f64::total_cmp);
        assert_eq!(d, vec![-2.0, -1.0]);
        assert_eq!(f.t[(1, 0)], 0.0);
    }

    #[test]
    fn schur_of_rotation_keeps_complex_block() {
        let a = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let f = real_schur(&a).unwrap();
        check_schur(&a, &f);
        assert_eq!(f.blocks, vec![(0, 2)]);
        let eig = f.eigenvalues();
        assert!(eig[0].0.abs() < 1e-15 && (eig[0].1.abs() - 1.0).abs() < 1e-15);
        assert!(spectral_abscissa(&a).unwrap().abs() < 1e-15);
    }

    #[test]
    fn schur_invariants_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &n in &[1usize, 2, 3, 5, 8, 17, 40, 90] {
            for _ in 0..3 {
                let a = randn(&mut rng, n, n);
                let f = real_schur(&a).unwrap();
                check_schur(&a, &f);
            }
        }
    }

    #[test]
    fn schur_handles_structured_matrices() {
        // companion-like, nilpotent, repeated eigenvalues and zeros
        let mut jordan = Matrix::identity(6, 6) * 2.0;
        for i in 0..5 {
            jordan[(i, i + 1)] = 1.0;
        }
        let zero = Matrix::zeros(4, 4);
        let mut shift = Matrix::zeros(5, 5);
        for i in 0..4 {
            shift[(i + 1, i)] = 1.0;
        }
        shift[(0, 4)] = 1.0;
        for a in [jordan, zero, shift] {
            let f = real_schur(&a).unwrap();
            check_schur(&a, &f);
        }
    }

    #[test]
    fn non_square_rejected() {
        assert!(matches!(real_schur(&Matrix::zeros(2, 3)), Err(Error::NotSquare { .. })));
        let mut a = Matrix::identity(2, 2);
        a[(0, 1)] = f64::NAN;
        assert!(matches!(real_schur(&a), Err(Error::NonFinite(_))));
    }

    #[test]
    fn spectral_abscissa_of_diagonal() {
        let a = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -3.0]));
        assert_eq!(spectral_abscissa(&a).unwrap(), -1.0);
    }

    #[test]
    fn lyap_small_cases() {
        let a = -Matrix::identity(2, 2);
        let x = lyap_solve(&a, &Matrix::identity(2, 2)).unwrap();
        assert!((x - Matrix::identity(2, 2) * 0.5).norm() < 1e-15);

        let a = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -2.0]));
        let q = Matrix::from_element(2, 2, 1.0);
        let x = lyap_solve(&a, &q).unwrap();
        let expected = Matrix::from_row_slice(2, 2, &[0.5, 1.0 / 3.0, 1.0 / 3.0, 0.25]);
        assert!((x - expected).norm() < 1e-15);
    }

    #[test]
    fn lyap_singular_operator_reports_pair() {
        let a = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        match lyap_solve(&a, &Matrix::identity(2, 2)) {
            Err(Error::SingularLyapunov { pair }) => {
                assert!((pair.0 .0 + pair.1 .0).abs() < 1e-14);
            }
            other => panic!("expected singularity, got {other:?}"),
        }
        let a = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -1.0]));
        assert!(matches!(lyap_solve(&a, &Matrix::identity(2, 2)), Err(Error::SingularLyapunov { .. })));
    }

    #[test]
    fn lyap_output_exactly_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = randn(&mut rng, 7, 7);
        let a = &m - Matrix::identity(7, 7) * (spectral_abscissa(&m).unwrap() + 1.0);
        let w = randn(&mut rng, 7, 7);
        let q = &w * w.transpose();
        let x = lyap_solve(&a, &q).unwrap();
        assert_eq!(x, x.transpose());
    }

    #[test]
    fn lyap_residual_bound_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for &(n, reps) in &[(2usize, 400usize), (5, 300), (20, 200), (100, 100)] {
            for _ in 0..reps {
                let m = randn(&mut rng, n, n);
                let a = &m - Matrix::identity(n, n) * (spectral_abscissa(&m).unwrap() + 0.5);
                let w = randn(&mut rng, n, n);
                let q = &w * w.transpose() + Matrix::identity(n, n) * 0.1;
                let x = lyap_solve(&a, &q).unwrap();
                let res = (&a * &x + &x * a.transpose() + &q).norm();
                let bound = 1e-10 * (2.0 * a.norm() * x.norm() + q.norm());
                assert!(res <= bound, "n={n}: residual {res} > {bound}");
            }
        }
    }
}
