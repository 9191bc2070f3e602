//! Problem and system factories: the integer test instance with a known
//! solution, two seeded random families, the CSMA/CA transition model and
//! the networked cart system, plus Gramians and the H² norm.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{Error, Result};
use crate::fixedpoint::{solve_krylov_gs, FixedPointConfig};
use crate::linalg::{self, Matrix};
use crate::model::{residual_norm, CouplingKind, CouplingMatrix, MjlsProblem, ModeTuple, SymTuple};
use crate::stability::{is_ms_stable, scale_coupling};

/// The 4×4, two-mode instance with integer data and integer solution.
/// Returns the problem and its exact solution.
pub fn known_example() -> (MjlsProblem, SymTuple) {
    let m = |v: &[f64]| Matrix::from_row_slice(4, 4, v);
    let a1 = m(&[-6., 4., -7., 6., 8., -4., -10., 10., 14., 6., 1., 7., -21., -10., -6., -13.]);
    let a2 = m(&[-16., 4., 7., -1., 5., -17., -8., -2., -2., 3., -19., -4., 4., 10., 25., -9.]);
    let y1 = m(&[
        5., -1., -23., 56., -1., -8., -31., 48., -23., -31., -56., 22., 56., 48., 22., 99.,
    ]);
    let y2 = m(&[68., 6., -52., -50., 6., 20., 8., -22., -52., 8., 42., 14., -50., -22., 14., 24.]);
    let x1 = Matrix::from_element(4, 4, 1.0);
    let x2 = m(&[2., 1., -1., -2., 1., 1., 0., -1., -1., 0., 1., 1., -2., -1., 1., 2.]);
    let gamma = Matrix::from_row_slice(2, 2, &[-1., 1., 2., -2.]);
    let p = MjlsProblem::new(
        ModeTuple::new(vec![a1, a2]).expect("known A"),
        SymTuple::new(vec![y1, y2]).expect("known Y"),
        CouplingMatrix::rate_matrix(gamma).expect("known coupling"),
    )
    .expect("known problem");
    (p, SymTuple::new(vec![x1, x2]).expect("known X"))
}

fn normal_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Two modes with `−A_i` and `Y_i` symmetric positive definite:
/// `A_i = −(M Mᵀ/n + I)`, `Y_i = W Wᵀ/n + 0.1 I`, fixed `Γ = [[−0.3, 0.3], [0.5, −0.5]]`.
///
/// Draw order from `ChaCha8Rng::seed_from_u64(seed)`: `M₁, M₂, W₁, W₂`, each
/// filled column by column with standard normals.
pub fn random_spd_problem(n: usize, seed: u64) -> Result<MjlsProblem> {
    if n == 0 {
        return Err(Error::Config("n must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eye = Matrix::identity(n, n);
    let scale = 1.0 / n as f64;
    let a: Vec<Matrix> = (0..2)
        .map(|_| {
            let m = normal_matrix(&mut rng, n, n);
            -(&m * m.transpose() * scale + &eye)
        })
        .collect();
    let y: Vec<Matrix> = (0..2)
        .map(|_| {
            let w = normal_matrix(&mut rng, n, n);
            &w * w.transpose() * scale + &eye * 0.1
        })
        .collect();
    let gamma = CouplingMatrix::rate_matrix(Matrix::from_row_slice(2, 2, &[-0.3, 0.3, 0.5, -0.5]))?;
    MjlsProblem::new(ModeTuple::new(a)?, SymTuple::new_symmetrized(y)?, gamma)
}

/// Nonsymmetric modes `A_i = M − (α(M) + 1) I` with standard-normal `M`, a
/// random rate matrix `Γ` (off-diagonal entries uniform on `[0, 1)`) and PSD
/// right-hand sides `Y_i = W Wᵀ/n`. The off-diagonal coupling is then scaled
/// so that `ρ(L⁻¹Π) ∈ [0.9·target, target]`.
///
/// Draw order: `M₁ … M_N`, then `Γ` row by row, then `W₁ … W_N`.
pub fn random_stable_problem(n: usize, modes: usize, seed: u64, target_rho: f64) -> Result<MjlsProblem> {
    if n == 0 || modes == 0 {
        return Err(Error::Config("n and N must be at least 1".into()));
    }
    if !(target_rho > 0.0 && target_rho < 1.0) {
        return Err(Error::Config(format!("target rho {target_rho} must lie in (0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eye = Matrix::identity(n, n);
    let mut a = Vec::with_capacity(modes);
    for _ in 0..modes {
        let m = normal_matrix(&mut rng, n, n);
        let alpha = linalg::spectral_abscissa(&m)?;
        a.push(m - &eye * (alpha + 1.0));
    }
    let unit = Uniform::new(0.0, 1.0).expect("unit interval");
    let mut g = Matrix::zeros(modes, modes);
    for i in 0..modes {
        for j in 0..modes {
            if i != j {
                g[(i, j)] = unit.sample(&mut rng);
            }
        }
        let off: f64 = g.row(i).iter().sum();
        g[(i, i)] = if modes == 1 { -1.0 } else { -off };
    }
    let kind = if modes == 1 { CouplingKind::General } else { CouplingKind::RateMatrix };
    let gamma = CouplingMatrix::with_kind(g, kind)?;
    let y: Vec<Matrix> = (0..modes)
        .map(|_| {
            let w = normal_matrix(&mut rng, n, n);
            &w * w.transpose() / n as f64
        })
        .collect();
    let p = MjlsProblem::new(ModeTuple::new(a)?, SymTuple::new_symmetrized(y)?, gamma)?;
    Ok(scale_coupling(&p, target_rho)?.problem)
}

/// What happens to the transmission memory while a transmission is in error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorMemory {
    /// The failed frame is retransmitted by the current sender, so the
    /// memory shifts in a repeat of `s_t`.
    #[default]
    Retransmit,
    /// The memory is frozen until the error state changes.
    Frozen,
}

/// Parameters of the CSMA/CA sender-selection chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsmaConfig {
    /// Number of stations.
    pub nu: usize,
    /// Transmission memory length.
    pub tau: usize,
    /// Probability of an error after a correct transmission.
    pub p_err_good: f64,
    /// Probability of staying in error.
    pub p_err_stay: f64,
    /// Time scaling in `Γ = a(Θ − I)`.
    pub a: f64,
    pub error_memory: ErrorMemory,
}

impl Default for CsmaConfig {
    fn default() -> Self {
        CsmaConfig { nu: 2, tau: 3, p_err_good: 0.03, p_err_stay: 0.75, a: 1.0, error_memory: ErrorMemory::Retransmit }
    }
}

impl CsmaConfig {
    pub fn new(nu: usize, tau: usize) -> Self {
        CsmaConfig { nu, tau, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nu < 2 || self.tau < 1 {
            return Err(Error::Config(format!("need nu >= 2 and tau >= 1, got nu={} tau={}", self.nu, self.tau)));
        }
        for (name, v) in [("p_err_good", self.p_err_good), ("p_err_stay", self.p_err_stay)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Config(format!("{name} = {v} must lie in (0, 1)")));
            }
        }
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::Config(format!("time scaling a = {} must be positive", self.a)));
        }
        self.memory_states()?;
        Ok(())
    }

    fn memory_states(&self) -> Result<usize> {
        (0..self.tau)
            .try_fold(1usize, |acc, _| acc.checked_mul(self.nu))
            .filter(|&m| m <= 1 << 20)
            .ok_or(Error::TooLarge { size: usize::MAX, limit: 1 << 20 })
    }

    /// Number of Markov states, `2ν^τ`.
    pub fn states(&self) -> usize {
        2 * self.nu.pow(self.tau as u32)
    }
}

/// Decoded Markov state: error flag and memory `(s_t, s_{t−1}, …)` with
/// stations numbered from 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsmaState {
    pub error: bool,
    pub memory: Vec<usize>,
}

impl CsmaState {
    /// State index: error bit most significant, then the memory digits with
    /// `s_t` most significant.
    pub fn index(&self, nu: usize) -> usize {
        let digits = self.memory.iter().fold(0, |acc, &s| acc * nu + s);
        (self.error as usize) * nu.pow(self.memory.len() as u32) + digits
    }

    pub fn decode(index: usize, nu: usize, tau: usize) -> CsmaState {
        let block = nu.pow(tau as u32);
        let mut digits = index % block;
        let mut memory = vec![0; tau];
        for slot in memory.iter_mut().rev() {
            *slot = digits % nu;
            digits /= nu;
        }
        CsmaState { error: index >= block, memory }
    }

    /// Station letter label such as `0BAA`.
    pub fn label(&self) -> String {
        let mut s = String::from(if self.error { "1" } else { "0" });
        for &m in &self.memory {
            if m < 26 {
                s.push((b'A' + m as u8) as char);
            } else {
                s.push_str(&format!("[{m}]"));
            }
        }
        s
    }
}

/// Probability of each station sending next, given the memory.
///
/// A station absent from the memory gets weight 1; one whose most recent
/// transmission is at position `i` (1-based) gets `1/(τ + 2 − i)`. The
/// weights are normalized to sum to one.
pub fn sender_probabilities(memory: &[usize], nu: usize) -> Vec<f64> {
    let tau = memory.len();
    let mut weights = vec![1.0; nu];
    let mut seen = vec![false; nu];
    for (pos, &s) in memory.iter().enumerate() {
        if !seen[s] {
            seen[s] = true;
            weights[s] = 1.0 / (tau + 1 - pos) as f64;
        }
    }
    let w_bar = 1.0 / weights.iter().sum::<f64>();
    weights.iter().map(|w| w * w_bar).collect()
}

/// Row-stochastic transition matrix `Θ` of size `2ν^τ`.
pub fn csma_theta(cfg: &CsmaConfig) -> Result<Matrix> {
    cfg.validate()?;
    let (nu, tau) = (cfg.nu, cfg.tau);
    let n = cfg.states();
    let mut theta = Matrix::zeros(n, n);
    for row in 0..n {
        let state = CsmaState::decode(row, nu, tau);
        let shifted = |next: usize| {
            let mut m = Vec::with_capacity(tau);
            m.push(next);
            m.extend_from_slice(&state.memory[..tau - 1]);
            m
        };
        if !state.error {
            for (s, ps) in sender_probabilities(&state.memory, nu).into_iter().enumerate() {
                let memory = shifted(s);
                let ok = CsmaState { error: false, memory: memory.clone() }.index(nu);
                let bad = CsmaState { error: true, memory }.index(nu);
                theta[(row, ok)] += ps * (1.0 - cfg.p_err_good);
                theta[(row, bad)] += ps * cfg.p_err_good;
            }
        } else {
            let memory = match cfg.error_memory {
                ErrorMemory::Retransmit => shifted(state.memory[0]),
                ErrorMemory::Frozen => state.memory.clone(),
            };
            let ok = CsmaState { error: false, memory: memory.clone() }.index(nu);
            let bad = CsmaState { error: true, memory }.index(nu);
            theta[(row, ok)] += 1.0 - cfg.p_err_stay;
            theta[(row, bad)] += cfg.p_err_stay;
        }
    }
    Ok(theta)
}

/// Rate matrix `Γ = a(Θ − I)`. Diagonal entries are set to minus the
/// off-diagonal row sum so that rows sum to zero exactly; rows with
/// `Θ_ii = 1` come out absorbing (`γ_ii = 0`, see
/// [`CouplingMatrix::absorbing_rows`]).
pub fn csma_rate(theta: &Matrix, a: f64) -> Result<CouplingMatrix> {
    let n = theta.nrows();
    if n == 0 || theta.ncols() != n {
        return Err(Error::NotSquare { rows: theta.nrows(), cols: theta.ncols() });
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Config(format!("time scaling a = {a} must be positive")));
    }
    for i in 0..n {
        let sum: f64 = theta.row(i).iter().sum();
        if (sum - 1.0).abs() > 1e-12 || theta.row(i).iter().any(|&v| v < 0.0) {
            return Err(Error::Config(format!("row {} of the transition matrix is not stochastic", i + 1)));
        }
    }
    let mut g = theta * a;
    for i in 0..n {
        g[(i, i)] = 0.0;
        let off: f64 = g.row(i).iter().sum();
        g[(i, i)] = -off;
    }
    CouplingMatrix::relaxed(g, CouplingKind::RateMatrix)
}

/// Stationary distribution `π Θ = π` of a row-stochastic matrix, by power
/// iteration on the lazy chain `(I + Θ)/2`.
pub fn stationary_distribution(theta: &Matrix) -> Result<Vec<f64>> {
    let n = theta.nrows();
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| (0..n).filter(|&j| theta[(i, j)] != 0.0).map(|j| (j, theta[(i, j)])).collect())
        .collect();
    let mut pi = vec![1.0 / n as f64; n];
    for _ in 0..200_000 {
        let mut next: Vec<f64> = pi.iter().map(|v| 0.5 * v).collect();
        for (i, row) in rows.iter().enumerate() {
            for &(j, t) in row {
                next[j] += 0.5 * pi[i] * t;
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        let change: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        pi = next;
        if change < 1e-15 {
            return Ok(pi);
        }
    }
    Err(Error::Consistency("stationary distribution did not converge".into()))
}

/// Continuous-time MJLS `ẋ = A_r x + B_r u`, `y = C_r x` with mode rates `Γ`
/// and initial mode distribution `μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MjlsSystem {
    a: ModeTuple,
    b: ModeTuple,
    c: ModeTuple,
    gamma: CouplingMatrix,
    mu: Vec<f64>,
}

impl MjlsSystem {
    pub fn new(a: ModeTuple, b: ModeTuple, c: ModeTuple, gamma: CouplingMatrix, mu: Vec<f64>) -> Result<Self> {
        let modes = a.modes();
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
        }
        if b.modes() != modes || c.modes() != modes || gamma.modes() != modes || mu.len() != modes {
            return Err(Error::Dimension(format!(
                "mode counts differ: A {}, B {}, C {}, Gamma {}, mu {}",
                modes,
                b.modes(),
                c.modes(),
                gamma.modes(),
                mu.len()
            )));
        }
        if b.rows() != n || c.cols() != n {
            return Err(Error::Dimension(format!(
                "B must have {n} rows and C {n} columns, got {}x{} and {}x{}",
                b.rows(),
                b.cols(),
                c.rows(),
                c.cols()
            )));
        }
        let total: f64 = mu.iter().sum();
        if mu.iter().any(|&m| !(m >= 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::Config("mu must be a probability vector".into()));
        }
        Ok(MjlsSystem { a, b, c, gamma, mu })
    }

    pub fn modes(&self) -> usize {
        self.a.modes()
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn a(&self) -> &ModeTuple {
        &self.a
    }

    pub fn b(&self) -> &ModeTuple {
        &self.b
    }

    pub fn c(&self) -> &ModeTuple {
        &self.c
    }

    pub fn gamma(&self) -> &CouplingMatrix {
        &self.gamma
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// Coupled equation for the observability Gramian:
    /// `A_iᵀQ_i + Q_iA_i + Σ_j γ_ij Q_j + C_iᵀC_i = 0`.
    pub fn observability_problem(&self) -> Result<MjlsProblem> {
        let y = self.c.blocks().iter().map(|c| c.transpose() * c).collect();
        MjlsProblem::new(self.a.transposed(), SymTuple::new_symmetrized(y)?, self.gamma.clone())
    }

    /// Coupled equation for the controllability Gramian:
    /// `A_iP_i + P_iA_iᵀ + Σ_j γ_ji P_j + μ_i B_iB_iᵀ = 0`.
    pub fn controllability_problem(&self) -> Result<MjlsProblem> {
        let y = self.b.blocks().iter().zip(&self.mu).map(|(b, &m)| b * b.transpose() * m).collect();
        MjlsProblem::new(self.a.clone(), SymTuple::new_symmetrized(y)?, self.gamma.transposed())
    }
}

/// Parameters of the networked cart system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartConfig {
    pub nu: usize,
    pub tau: usize,
    pub mass: f64,
    pub gravity: f64,
    pub friction: f64,
    /// Linearized restoring coefficient; `None` means `2·mass·gravity`,
    /// the curvature of the track `f(s) = s²` at the origin.
    pub stiffness: Option<f64>,
    pub a: f64,
}

impl Default for CartConfig {
    fn default() -> Self {
        CartConfig { nu: 3, tau: 3, mass: 1.0, gravity: 9.81, friction: 0.1, stiffness: None, a: 1.0 }
    }
}

impl CartConfig {
    pub fn new(nu: usize) -> Self {
        CartConfig { nu, ..Default::default() }
    }
}

/// `ν` carts on a parabolic track reporting over a CSMA/CA channel.
///
/// `n = 2ν` (position and velocity per cart), `N = 2ν^τ`. In a correct state
/// the output is the position/velocity pair of the current sender; error
/// states observe nothing. `μ` is the stationary distribution of `Θ`.
pub fn cart_system(cfg: &CartConfig) -> Result<MjlsSystem> {
    if !(cfg.mass > 0.0 && cfg.gravity > 0.0 && cfg.friction > 0.0) {
        return Err(Error::Config("mass, gravity and friction must be positive".into()));
    }
    let csma = CsmaConfig { a: cfg.a, ..CsmaConfig::new(cfg.nu, cfg.tau) };
    let theta = csma_theta(&csma)?;
    let gamma = csma_rate(&theta, cfg.a)?;
    let mu = stationary_distribution(&theta)?;

    let nu = cfg.nu;
    let n = 2 * nu;
    let k = cfg.stiffness.unwrap_or(2.0 * cfg.mass * cfg.gravity);
    let mut a_full = Matrix::zeros(n, n);
    let mut b_full = Matrix::zeros(n, nu);
    for j in 0..nu {
        a_full[(2 * j, 2 * j + 1)] = 1.0;
        a_full[(2 * j + 1, 2 * j)] = -k;
        a_full[(2 * j + 1, 2 * j + 1)] = -cfg.friction;
        b_full[(2 * j + 1, j)] = 1.0;
    }
    let modes = csma.states();
    let c: Vec<Matrix> = (0..modes)
        .map(|i| {
            let state = CsmaState::decode(i, nu, cfg.tau);
            let mut c = Matrix::zeros(2, n);
            if !state.error {
                let j = state.memory[0];
                c[(0, 2 * j)] = 1.0;
                c[(1, 2 * j + 1)] = 1.0;
            }
            c
        })
        .collect();
    MjlsSystem::new(
        ModeTuple::new(vec![a_full; modes])?,
        ModeTuple::new(vec![b_full; modes])?,
        ModeTuple::new(c)?,
        gamma,
        mu,
    )
}

fn gramian_solve(p: &MjlsProblem) -> Result<SymTuple> {
    let cert = is_ms_stable(p)?;
    if !cert.stable() {
        return Err(cert.into_error());
    }
    let (x, report) = solve_krylov_gs(p, &FixedPointConfig { tol: 1e-13, max_iter: 1000 })?;
    let scale = p.y().norm();
    if scale > 0.0 && report.residual > 1e-8 * scale {
        return Err(Error::Consistency(format!(
            "Gramian residual {:.3e} exceeds 1e-8 relative to {:.3e}",
            report.residual, scale
        )));
    }
    Ok(x)
}

/// Controllability and observability Gramians `(P, Q)`.
pub fn gramians(sys: &MjlsSystem) -> Result<(SymTuple, SymTuple)> {
    let p = gramian_solve(&sys.controllability_problem()?)?;
    let q = gramian_solve(&sys.observability_problem()?)?;
    Ok((p, q))
}

/// The two expressions `Σ tr(C_i P_i C_iᵀ)` and `Σ μ_i tr(B_iᵀ Q_i B_i)` of
/// the squared H² norm.
pub fn h2_norm_squared_sides(sys: &MjlsSystem) -> Result<(f64, f64)> {
    let (p, q) = gramians(sys)?;
    let mut via_p = 0.0;
    let mut via_q = 0.0;
    for i in 0..sys.modes() {
        let c = &sys.c.blocks()[i];
        let b = &sys.b.blocks()[i];
        via_p += (c * &p[i] * c.transpose()).trace();
        via_q += sys.mu[i] * (b.transpose() * &q[i] * b).trace();
    }
    Ok((via_p, via_q))
}

/// H² norm, computed from both Gramians and cross-validated.
pub fn h2_norm(sys: &MjlsSystem) -> Result<f64> {
    let (via_p, via_q) = h2_norm_squared_sides(sys)?;
    let scale = via_p.abs().max(via_q.abs());
    if scale > 0.0 && (via_p - via_q).abs() > 1e-6 * scale {
        return Err(Error::Consistency(format!(
            "H2 sides disagree: {via_p:.12e} via P against {via_q:.12e} via Q"
        )));
    }
    Ok(via_q.max(0.0).sqrt())
}

/// Residual of a candidate Gramian pair, relative to the right-hand sides.
pub fn gramian_residuals(sys: &MjlsSystem, p: &SymTuple, q: &SymTuple) -> Result<(f64, f64)> {
    let cp = sys.controllability_problem()?;
    let op = sys.observability_problem()?;
    let rel = |prob: &MjlsProblem, x: &SymTuple| -> Result<f64> {
        Ok(residual_norm(prob, x)? / prob.y().norm().max(f64::MIN_POSITIVE))
    };
    Ok((rel(&cp, p)?, rel(&op, q)?))
}

/// Writes `Θ` as CSV with state labels in the header and first column.
pub fn theta_csv<W: std::io::Write>(theta: &Matrix, cfg: &CsmaConfig, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let labels: Vec<String> =
        (0..theta.nrows()).map(|i| CsmaState::decode(i, cfg.nu, cfg.tau).label()).collect();
    let mut header = vec![String::from("state")];
    header.extend(labels.iter().cloned());
    w.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
    for (i, label) in labels.iter().enumerate() {
        let mut rec = vec![label.clone()];
        rec.extend(theta.row(i).iter().map(|v| format!("{v}")));
        w.write_record(&rec).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::residual_tuple;
    use crate::operators::apply_l_plus_pi;

    #[test]
    fn identity_certifies_random_spd_instances() {
        for seed in 0..5 {
            let p = random_spd_problem(6, seed).unwrap();
            let z = apply_l_plus_pi(&p, &SymTuple::identity(2, 6)).unwrap();
            for i in 0..2 {
                assert!((&z[i] - &p.a()[i] * 2.0).amax() < 1e-12);
            }
            assert!(crate::stability::is_lyapunov_certificate(&p, &SymTuple::identity(2, 6)).unwrap());
        }
    }

    #[test]
    fn known_example_is_exact() {
        let (p, x) = known_example();
        let lhs = apply_l_plus_pi(&p, &x).unwrap();
        for i in 0..2 {
            assert_eq!(lhs[i], -&p.y()[i]);
        }
        assert_eq!(p.y()[0][(0, 3)], 56.0);
        assert_eq!(p.y()[1][(0, 0)], 68.0);
        assert_eq!(residual_tuple(&p, &x).unwrap().norm(), 0.0);
    }

    #[test]
    fn random_spd_is_deterministic_and_definite() {
        assert_eq!(random_spd_problem(6, 3).unwrap(), random_spd_problem(6, 3).unwrap());
        assert_ne!(random_spd_problem(6, 3).unwrap(), random_spd_problem(6, 4).unwrap());
        for seed in 0..100 {
            let p = random_spd_problem(20, seed).unwrap();
            for i in 0..2 {
                assert!(linalg::min_symmetric_eigenvalue(&-&p.a()[i]) > 0.0);
                assert!(linalg::min_symmetric_eigenvalue(&p.y()[i]) > 0.0);
            }
        }
    }

    #[test]
    fn random_stable_hits_target() {
        let p = random_stable_problem(5, 4, 11, 0.5).unwrap();
        for a in p.a().blocks() {
            assert!(linalg::spectral_abscissa(a).unwrap() < 0.0);
        }
        let rho = crate::stability::spectral_radius_linv_pi(&p).unwrap();
        assert!((0.45 - 1e-6..=0.5 + 1e-6).contains(&rho), "rho = {rho}");
    }

    #[test]
    fn sender_probabilities_anchor_values() {
        // memory AAA: A at position 1, B absent
        let p = sender_probabilities(&[0, 0, 0], 2);
        assert!((p[1] - 0.8).abs() < 1e-15);
        // memory BBA: B at 1, A at 3
        let p = sender_probabilities(&[1, 1, 0], 2);
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn theta_rows_are_stochastic() {
        for nu in 2usize..=6 {
            for tau in 1..=4 {
                if nu.pow(tau as u32) > 400 {
                    continue;
                }
                let t = csma_theta(&CsmaConfig::new(nu, tau)).unwrap();
                for i in 0..t.nrows() {
                    let s: f64 = t.row(i).iter().sum();
                    assert!((s - 1.0).abs() < 1e-12);
                }
            }
        }
        for nu in 2..=6 {
            for m in [vec![0, 0, 1], vec![1, 0, 1], vec![0, 1, 1]] {
                let s: f64 = sender_probabilities(&m, nu).iter().sum();
                assert!((s - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn frozen_error_memory_keeps_state() {
        let cfg = CsmaConfig { error_memory: ErrorMemory::Frozen, ..CsmaConfig::new(2, 3) };
        let t = csma_theta(&cfg).unwrap();
        for row in 8..16 {
            assert_eq!(t[(row, row)], 0.75);
            assert_eq!(t[(row, row - 8)], 0.25);
        }
    }

    #[test]
    fn state_index_round_trip() {
        for i in 0..2 * 27 {
            assert_eq!(CsmaState::decode(i, 3, 3).index(3), i);
        }
        assert_eq!(CsmaState::decode(4, 2, 3).label(), "0BAA");
    }

    #[test]
    fn rate_matrix_examples() {
        let g = csma_rate(&Matrix::identity(3, 3), 1.0).unwrap();
        assert_eq!(g.matrix(), &Matrix::zeros(3, 3));
        assert_eq!(g.absorbing_rows(), vec![0, 1, 2]);
        let g = csma_rate(&Matrix::from_row_slice(2, 2, &[0.9, 0.1, 0.3, 0.7]), 2.0).unwrap();
        let expect = Matrix::from_row_slice(2, 2, &[-0.2, 0.2, 0.6, -0.6]);
        assert!((g.matrix() - expect).amax() < 1e-15);
    }

    #[test]
    fn stationary_distribution_two_state() {
        let t = Matrix::from_row_slice(2, 2, &[0.9, 0.1, 0.3, 0.7]);
        let pi = stationary_distribution(&t).unwrap();
        assert!((pi[0] - 0.75).abs() < 1e-12 && (pi[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn cart_dimensions_and_outputs() {
        let sys = cart_system(&CartConfig::new(3)).unwrap();
        assert_eq!((sys.dim(), sys.modes()), (6, 54));
        for i in 0..sys.modes() {
            let state = CsmaState::decode(i, 3, 3);
            let c = &sys.c().blocks()[i];
            if state.error {
                assert_eq!(c.amax(), 0.0);
            } else {
                let j = state.memory[0];
                assert_eq!(c.columns(2 * j, 2).into_owned(), Matrix::identity(2, 2));
                assert_eq!(c.sum(), 2.0);
            }
        }
    }

    #[test]
    fn scalar_h2_norm() {
        let one = |v: f64| ModeTuple::new(vec![Matrix::from_element(1, 1, v)]).unwrap();
        let gamma = CouplingMatrix::new(Matrix::from_element(1, 1, -1e-3)).unwrap();
        // γ only shifts the mode: effective pole −1 − γ/2 for each Lyapunov side
        let sys = MjlsSystem::new(one(-1.0 + 5e-4), one(1.0), one(1.0), gamma, vec![1.0]).unwrap();
        let h = h2_norm(&sys).unwrap();
        assert!((h - 0.5f64.sqrt()).abs() < 1e-12, "{h}");
        let sys0 = MjlsSystem::new(
            one(-1.0),
            one(0.0),
            one(1.0),
            CouplingMatrix::new(Matrix::from_element(1, 1, -1.0)).unwrap(),
            vec![1.0],
        )
        .unwrap();
        assert_eq!(h2_norm(&sys0).unwrap(), 0.0);
    }

    #[test]
    fn decoupled_gramian_matches_lyapunov() {
        let a = Matrix::from_row_slice(2, 2, &[-1.0, 2.0, 0.0, -3.0]);
        let b = Matrix::from_row_slice(2, 1, &[1.0, 1.0]);
        let c = Matrix::from_row_slice(1, 2, &[1.0, -1.0]);
        let g = -0.4;
        let sys = MjlsSystem::new(
            ModeTuple::new(vec![a.clone()]).unwrap(),
            ModeTuple::new(vec![b.clone()]).unwrap(),
            ModeTuple::new(vec![c.clone()]).unwrap(),
            CouplingMatrix::new(Matrix::from_element(1, 1, g)).unwrap(),
            vec![1.0],
        )
        .unwrap();
        let (p, q) = gramians(&sys).unwrap();
        let shifted = &a + Matrix::identity(2, 2) * (g / 2.0);
        let p_ref = linalg::lyap_solve(&shifted, &(&b * b.transpose())).unwrap();
        let q_ref = linalg::lyap_solve(&shifted.transpose(), &(c.transpose() * &c)).unwrap();
        assert!((&p[0] - p_ref).norm() < 1e-12);
        assert!((&q[0] - q_ref).norm() < 1e-12);
    }
}
