#![allow(dead_code)]

use mjls::linalg::Matrix;
use mjls::model::{MjlsProblem, SymTuple};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn random_sym(rng: &mut ChaCha8Rng, modes: usize, n: usize) -> SymTuple {
    let blocks = (0..modes)
        .map(|_| {
            let m = gaussian(rng, n, n);
            (&m + m.transpose()) * 0.5
        })
        .collect();
    SymTuple::new(blocks).unwrap()
}

pub fn random_psd(rng: &mut ChaCha8Rng, modes: usize, n: usize) -> SymTuple {
    let blocks = (0..modes)
        .map(|_| {
            let m = gaussian(rng, n, n);
            &m * m.transpose()
        })
        .collect();
    SymTuple::new_symmetrized(blocks).unwrap()
}

/// Column-stacked vector of all blocks.
pub fn stack(x: &SymTuple) -> Vec<f64> {
    x.blocks().iter().flat_map(|b| b.iter().copied().collect::<Vec<_>>()).collect()
}

/// Matrix of `X ↦ (L + Π)(X)` on column-stacked blocks, built from scratch:
/// block `(i, i)` is `I⊗Ã_i + Ã_i⊗I`, block `(i, j)` is `γ_ij I`.
pub fn kron_operator(p: &MjlsProblem) -> Matrix {
    let n = p.dim();
    let n2 = n * n;
    let modes = p.modes();
    let mut k = Matrix::zeros(modes * n2, modes * n2);
    for i in 0..modes {
        let gii = p.gamma().get(i, i);
        let a = &p.a()[i] + Matrix::identity(n, n) * (gii / 2.0);
        for r in 0..n2 {
            for c in 0..n2 {
                // vec index r = row + n*col
                let (r1, r2) = (r % n, r / n);
                let (c1, c2) = (c % n, c / n);
                let mut v = 0.0;
                if r2 == c2 {
                    v += a[(r1, c1)];
                }
                if r1 == c1 {
                    v += a[(r2, c2)];
                }
                k[(i * n2 + r, i * n2 + c)] = v;
            }
        }
        for j in 0..modes {
            if j != i {
                for r in 0..n2 {
                    k[(i * n2 + r, j * n2 + r)] = p.gamma().get(i, j);
                }
            }
        }
    }
    k
}

/// Solution of `(L + Π)(X) = −Y` by dense LU on the stacked system.
pub fn kron_solve(p: &MjlsProblem) -> SymTuple {
    let k = kron_operator(p);
    let rhs = -nalgebra_vec(&stack(p.y()));
    let v = k.lu().solve(&rhs).expect("singular oracle system");
    SymTuple::from_vec(p.modes(), p.dim(), v.as_slice()).unwrap()
}

fn nalgebra_vec(v: &[f64]) -> mjls::linalg::Matrix {
    Matrix::from_column_slice(v.len(), 1, v)
}

pub fn rel_diff(x: &SymTuple, y: &SymTuple) -> f64 {
    x.sub(y).norm() / y.norm().max(f64::MIN_POSITIVE)
}
