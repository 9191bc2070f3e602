//! Mean-square stability tests.
//!
//! The primary test is `σ(L) ⊂ C₋` together with `ρ(L⁻¹Π) < 1`, where the
//! spectral radius is obtained by power iteration on the positive map
//! `−L⁻¹Π`. For small instances the verdict is cross-checked against the
//! spectrum of the explicit Kronecker matrix of `L + Π`.

use crate::error::{Error, Result};
use crate::linalg::{self, min_symmetric_eigenvalue, Matrix};
use crate::model::{MjlsProblem, SymTuple};
use crate::operators::{
    apply_l_plus_pi, apply_t_jacobi, assemble_kron, shifted_matrices, ShiftedModes,
};

/// Default `Nn²` bound for the dense cross-check.
pub const DENSE_CHECK_LIMIT: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhoMethod {
    PowerIteration,
    KroneckerEigen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Stable,
    Unstable,
    /// Power iteration did not settle and the instance is too large for the
    /// dense fallback.
    Indeterminate,
}

/// Outcome of [`is_ms_stable`].
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityCertificate {
    /// Spectral abscissa of `A_i + (γ_ii/2) I` per mode.
    pub modewise_abscissae: Vec<f64>,
    /// `ρ(L⁻¹Π)`; `+∞` when some shifted mode is not Hurwitz.
    pub rho_linv_pi: f64,
    pub method: RhoMethod,
    pub verdict: Verdict,
    /// Power-iteration estimate, when it was run.
    pub power_estimate: Option<f64>,
    /// Spectral abscissa of the Kronecker matrix of `L + Π`, when computed.
    pub kronecker_abscissa: Option<f64>,
}

impl StabilityCertificate {
    pub fn stable(&self) -> bool {
        self.verdict == Verdict::Stable
    }

    pub fn max_abscissa(&self) -> f64 {
        self.modewise_abscissae.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Verdict of the `σ(L + Π) ⊂ C₋` test, when it was evaluated.
    pub fn kronecker_verdict(&self) -> Option<bool> {
        self.kronecker_abscissa.map(|a| a < 0.0)
    }

    pub(crate) fn into_error(self) -> Error {
        Error::Unstable { rho: self.rho_linv_pi, abscissa: self.max_abscissa() }
    }
}

/// Power iteration controls.
#[derive(Debug, Clone, Copy)]
pub struct StabilityOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Instances with `Nn²` up to this size also get the dense evaluation.
    pub dense_limit: usize,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        StabilityOptions { tol: 1e-8, max_iter: 5000, dense_limit: DENSE_CHECK_LIMIT }
    }
}

pub fn modewise_abscissae(p: &MjlsProblem) -> Result<Vec<f64>> {
    shifted_matrices(p)
        .iter()
        .enumerate()
        .map(|(i, a)| linalg::spectral_abscissa(a).map_err(|e| e.in_mode(i + 1)))
        .collect()
}

/// Stability certificate with default options.
pub fn is_ms_stable(p: &MjlsProblem) -> Result<StabilityCertificate> {
    is_ms_stable_with(p, &StabilityOptions::default())
}

pub fn is_ms_stable_with(p: &MjlsProblem, opts: &StabilityOptions) -> Result<StabilityCertificate> {
    let abscissae = modewise_abscissae(p)?;
    let size = p.modes() * p.dim() * p.dim();
    let dense = size <= opts.dense_limit;
    let kronecker_abscissa = if dense { Some(linalg::spectral_abscissa(&assemble_kron(p)?)?) } else { None };

    if abscissae.iter().any(|&a| a >= 0.0) {
        return Ok(StabilityCertificate {
            modewise_abscissae: abscissae,
            rho_linv_pi: f64::INFINITY,
            method: RhoMethod::PowerIteration,
            verdict: Verdict::Unstable,
            power_estimate: None,
            kronecker_abscissa,
        });
    }

    let modes = ShiftedModes::new(p)?;
    let power = power_rho(p, &modes, opts)?;
    let (rho, method) = if dense {
        (dense_rho(p)?, RhoMethod::KroneckerEigen)
    } else {
        match power {
            Some(r) => (r, RhoMethod::PowerIteration),
            None => {
                return Ok(StabilityCertificate {
                    modewise_abscissae: abscissae,
                    rho_linv_pi: f64::NAN,
                    method: RhoMethod::PowerIteration,
                    verdict: Verdict::Indeterminate,
                    power_estimate: None,
                    kronecker_abscissa,
                })
            }
        }
    };
    Ok(StabilityCertificate {
        modewise_abscissae: abscissae,
        rho_linv_pi: rho,
        method,
        verdict: if rho < 1.0 { Verdict::Stable } else { Verdict::Unstable },
        power_estimate: power,
        kronecker_abscissa,
    })
}

/// `ρ(L⁻¹Π)` by power iteration (dense fallback for small instances).
pub fn spectral_radius_linv_pi(p: &MjlsProblem) -> Result<f64> {
    spectral_radius_linv_pi_with(p, &StabilityOptions::default())
}

pub fn spectral_radius_linv_pi_with(p: &MjlsProblem, opts: &StabilityOptions) -> Result<f64> {
    let abscissae = modewise_abscissae(p)?;
    let worst = abscissae.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if worst >= 0.0 {
        return Err(Error::Unstable { rho: f64::INFINITY, abscissa: worst });
    }
    let modes = ShiftedModes::new(p)?;
    match power_rho(p, &modes, opts)? {
        Some(r) => Ok(r),
        None if p.modes() * p.dim() * p.dim() <= opts.dense_limit => dense_rho(p),
        None => Err(Error::Consistency(format!(
            "power iteration for rho(L^-1 Pi) did not converge in {} steps",
            opts.max_iter
        ))),
    }
}

/// Power iteration on `S = −L⁻¹Π + I`. For a positive map the spectral
/// radius is an eigenvalue, so `ρ(S) = ρ(−L⁻¹Π) + 1` and the shift makes the
/// Perron eigenvalue strictly dominant. Starts from the identity tuple.
fn power_rho(p: &MjlsProblem, modes: &ShiftedModes, opts: &StabilityOptions) -> Result<Option<f64>> {
    if p.gamma().off_diagonal().iter().all(|&v| v == 0.0) {
        return Ok(Some(0.0));
    }
    let mut x = SymTuple::identity(p.modes(), p.dim());
    x.scale(1.0 / x.norm());
    let mut prev = f64::NAN;
    for _ in 0..opts.max_iter {
        let mut sx = apply_t_jacobi(p, modes, &x)?;
        sx.axpy(1.0, &x);
        let mu = x.dot(&sx);
        let mut resid = sx.clone();
        resid.axpy(-mu, &x);
        let settled = (mu - prev).abs() <= opts.tol * mu.abs() && resid.norm() <= 1e3 * opts.tol * mu.abs();
        prev = mu;
        if settled {
            return Ok(Some((mu - 1.0).max(0.0)));
        }
        let nrm = sx.norm();
        if nrm == 0.0 || !nrm.is_finite() {
            return Ok(None);
        }
        sx.scale(1.0 / nrm);
        x = sx;
    }
    Ok(None)
}

/// `ρ(−M_L⁻¹ M_Π)` from the block structure: block `(i, j)` is
/// `−γ_ij K_i⁻¹` with `K_i = I⊗Ã_i + Ã_i⊗I`.
fn dense_rho(p: &MjlsProblem) -> Result<f64> {
    let n2 = p.dim() * p.dim();
    let size = p.modes() * n2;
    let mut t = Matrix::zeros(size, size);
    for (i, a) in shifted_matrices(p).iter().enumerate() {
        let eye = Matrix::identity(p.dim(), p.dim());
        let k = eye.kronecker(a) + a.kronecker(&eye);
        let kinv = k.try_inverse().ok_or(Error::SingularSystem)?;
        for j in 0..p.modes() {
            let g = p.gamma().get(i, j);
            if i != j && g != 0.0 {
                t.view_mut((i * n2, j * n2), (n2, n2)).copy_from(&(&kinv * -g));
            }
        }
    }
    linalg::spectral_radius(&t)
}

/// Off-diagonal scaling result of [`scale_coupling`].
#[derive(Debug, Clone)]
pub struct ScaledCoupling {
    pub problem: MjlsProblem,
    /// Factor applied to every off-diagonal `γ_ij`.
    pub factor: f64,
    /// `ρ(L⁻¹Π)` after scaling.
    pub rho: f64,
}

/// Multiplies the off-diagonal part of `Γ` by one scalar `s > 0` so that
/// `ρ(L⁻¹Π) ∈ [0.9·target, target]`. A fully decoupled `Γ` is returned as is. Since `Π` is linear in the off-diagonal
/// entries, `ρ` scales linearly in `s`.
pub fn scale_coupling(p: &MjlsProblem, target_rho: f64) -> Result<ScaledCoupling> {
    if !(target_rho > 0.0 && target_rho < 1.0) {
        return Err(Error::Config(format!("target rho {target_rho} must lie in (0, 1)")));
    }
    let opts = StabilityOptions { dense_limit: 0, tol: 1e-6, ..Default::default() };
    let rho1 = spectral_radius_linv_pi_with(p, &opts)?;
    if rho1 == 0.0 || (rho1 <= target_rho && rho1 >= 0.9 * target_rho) {
        return Ok(ScaledCoupling { problem: p.clone(), factor: 1.0, rho: rho1 });
    }
    let mut factor = target_rho / rho1;
    for _ in 0..20 {
        let scaled = p.with_gamma(p.gamma().with_scaled_off_diagonal(factor))?;
        let rho = spectral_radius_linv_pi_with(&scaled, &opts)?;
        if rho <= target_rho && rho >= 0.9 * target_rho {
            return Ok(ScaledCoupling { problem: scaled, factor, rho });
        }
        factor *= target_rho / rho * (1.0 - 1e-7);
    }
    Err(Error::Consistency("coupling scaling did not reach the target spectral radius".into()))
}

/// Checks `X ⪰ 0` blockwise and `(L + Π)(X) ≺ 0` blockwise, which certifies
/// mean-square stability.
pub fn is_lyapunov_certificate(p: &MjlsProblem, x: &SymTuple) -> Result<bool> {
    let z = apply_l_plus_pi(p, x)?;
    let psd = x.blocks().iter().all(|b| min_symmetric_eigenvalue(b) >= 0.0);
    let neg = z.blocks().iter().all(|b| min_symmetric_eigenvalue(&(-b)) > 0.0);
    Ok(psd && neg)
}
