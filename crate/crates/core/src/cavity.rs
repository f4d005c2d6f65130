//! Cavity message passing on the equivalent RBM.
//!
//! The equivalent model has visible spins `σ_i = ±1`, couplings `λ_{iμ}/√N`
//! and a quenched field `H_μ` on each hidden unit, with weight
//! `∏_μ cosh(β G_μ + β H_μ)`, `G_μ = Σ_i λ_{iμ} σ_i / √N`.
//!
//! Messages live on the edges of the dense bipartite graph:
//!
//! * `m_{i→μ} = tanh(Σ_{ν≠μ} u_{ν→i})`, the cavity magnetization of `i`
//!   with factor `μ` removed;
//! * `u_{μ→i} = atanh(tanh(β χ_{μ→i} + β H_μ) · tanh(β λ_{iμ}/√N))`, where
//!   the cavity mean `χ_{μ→i} = χ_μ − λ_{iμ} m_{i→μ}/√N` is obtained from
//!   the full sum `χ_μ = Σ_j λ_{jμ} m_{j→μ}/√N` in O(1).
//!
//! A sweep updates every `u` from the current `m`, then every `m` from the
//! new `u`, so one sweep costs O(N·P).

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dim, Error, Result};
use crate::math::{atanh, ln_cosh, softplus, sqrt, tanh};
use crate::quadrature::GaussHermite;
use crate::types::{FieldSample, Matrix, TrainConfig, VariationalParams};

/// Equivalent RBM for one draw of the quenched fields.
#[derive(Debug, Clone)]
pub struct EquivalentModel<'a> {
    lambda: &'a VariationalParams,
    beta: f64,
    h: Vec<f64>,
    xi_var: Vec<f64>,
}

/// `Ξ_μ² = max(ε_var, Σ_i (1 − λ_{iμ}²)/N)` for every hidden unit.
pub fn weight_variances(lambda: &VariationalParams, eps_var: f64) -> Vec<f64> {
    let shape = lambda.shape();
    let n = shape.n_visible as f64;
    let mut var = vec![0.0; shape.n_hidden];
    for i in 0..shape.n_visible {
        for (mu, v) in lambda.lambda().row(i).iter().enumerate() {
            var[mu] += 1.0 - v * v;
        }
    }
    for v in &mut var {
        *v = (*v / n).max(eps_var);
    }
    var
}

impl<'a> EquivalentModel<'a> {
    pub fn new(
        lambda: &'a VariationalParams,
        beta: f64,
        h: Vec<f64>,
        xi_var: Vec<f64>,
    ) -> Result<Self> {
        let p = lambda.shape().n_hidden;
        check_dim("hidden fields", p, h.len())?;
        check_dim("weight variances", p, xi_var.len())?;
        if !beta.is_finite() || h.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("equivalent model fields"));
        }
        if xi_var.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::OutOfRange(
                "weight variances must be finite and positive".into(),
            ));
        }
        Ok(Self {
            lambda,
            beta,
            h,
            xi_var,
        })
    }

    /// Fields `H_μ = Ξ_μ z_μ` for one standard-normal draw.
    pub fn from_field_sample(
        lambda: &'a VariationalParams,
        beta: f64,
        field: &FieldSample,
        eps_var: f64,
    ) -> Result<Self> {
        let xi_var = weight_variances(lambda, eps_var);
        check_dim("field sample", xi_var.len(), field.z.len())?;
        let h = xi_var
            .iter()
            .zip(&field.z)
            .map(|(v, z)| sqrt(*v) * z)
            .collect();
        Self::new(lambda, beta, h, xi_var)
    }

    pub fn lambda(&self) -> &VariationalParams {
        self.lambda
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn fields(&self) -> &[f64] {
        &self.h
    }

    pub fn xi_var(&self) -> &[f64] {
        &self.xi_var
    }
}

/// Messages at the end of a message-passing run.
#[derive(Debug, Clone, PartialEq)]
pub struct CavityState {
    /// `m_{i→μ}`, indexed `(i, μ)`.
    pub m_msg: Matrix,
    /// `u_{μ→i}`, indexed `(i, μ)`.
    pub u_msg: Matrix,
    /// `χ_μ` from the final `m` messages.
    pub chi_full: Vec<f64>,
    pub converged: bool,
    pub sweeps_used: usize,
    /// Largest absolute message change in the last sweep.
    pub residual: f64,
}

impl CavityState {
    /// All messages zero.
    pub fn cold(n: usize, p: usize) -> Self {
        Self {
            m_msg: Matrix::zeros(n, p),
            u_msg: Matrix::zeros(n, p),
            chi_full: vec![0.0; p],
            converged: false,
            sweeps_used: 0,
            residual: f64::INFINITY,
        }
    }
}

/// Fixed-point observables of the equivalent model.
#[derive(Debug, Clone, PartialEq)]
pub struct Thermodynamics {
    pub log_z: f64,
    /// `m_i`.
    pub m_vis: Vec<f64>,
    /// `m̂_μ`.
    pub m_hid: Vec<f64>,
    /// `C_{iμ}`.
    pub corr: Matrix,
    /// `A_μ = 1 − E tanh²(·)`.
    pub a_mu: Vec<f64>,
    /// `χ̃_μ = Σ_i λ_{iμ} m_i / √N`.
    pub chi_tilde: Vec<f64>,
    /// `Λ̃_μ² = Σ_i λ_{iμ}² (1 − m_i²) / N`.
    pub lambda_tilde_sq: Vec<f64>,
}

/// Message-passing engine: stopping rule plus the quadrature rule used for
/// hidden-unit averages.
#[derive(Debug, Clone)]
pub struct CavityEngine {
    max_sweeps: usize,
    tol: f64,
    damping: f64,
    rule: GaussHermite,
}

impl CavityEngine {
    pub fn new(cfg: &TrainConfig) -> Self {
        Self {
            max_sweeps: cfg.mp_max_sweeps.max(1),
            tol: cfg.mp_tol,
            damping: cfg.mp_damping,
            rule: GaussHermite::new(cfg.quad_points.max(1)),
        }
    }

    pub fn quadrature(&self) -> &GaussHermite {
        &self.rule
    }

    /// Iterates the cavity equations from `init` (or all-zero messages)
    /// until the residual drops below the tolerance or the sweep budget is
    /// spent. Non-convergence is reported through the returned flag.
    pub fn run_message_passing(
        &self,
        model: &EquivalentModel<'_>,
        init: Option<&CavityState>,
    ) -> Result<CavityState> {
        let shape = model.lambda.shape();
        let (n, p) = (shape.n_visible, shape.n_hidden);
        let mut state = match init {
            Some(s) => {
                check_dim("initial message rows", n, s.m_msg.rows())?;
                check_dim("initial message columns", p, s.m_msg.cols())?;
                check_dim("initial bias rows", n, s.u_msg.rows())?;
                check_dim("initial bias columns", p, s.u_msg.cols())?;
                let mut s = s.clone();
                s.converged = false;
                s.sweeps_used = 0;
                s
            }
            None => CavityState::cold(n, p),
        };

        let beta = model.beta;
        let inv_sqrt_n = 1.0 / sqrt(n as f64);
        let lam = model.lambda.lambda();
        let coupling = Matrix::from_fn(n, p, |i, mu| tanh(beta * lam[(i, mu)] * inv_sqrt_n));
        let keep = self.damping;
        let take = 1.0 - keep;

        for sweep in 1..=self.max_sweeps {
            let mut residual: f64 = 0.0;

            chi_sums(lam, &state.m_msg, inv_sqrt_n, &mut state.chi_full);
            for i in 0..n {
                let lrow = lam.row(i);
                let mrow = state.m_msg.row(i);
                let crow = coupling.row(i);
                let urow = state.u_msg.row_mut(i);
                for mu in 0..p {
                    let chi_cav = state.chi_full[mu] - lrow[mu] * mrow[mu] * inv_sqrt_n;
                    let fresh = atanh(tanh(beta * chi_cav + beta * model.h[mu]) * crow[mu]);
                    let new = take * fresh + keep * urow[mu];
                    residual = residual.max((new - urow[mu]).abs());
                    urow[mu] = new;
                }
            }

            for i in 0..n {
                let urow = state.u_msg.row(i);
                let total: f64 = urow.iter().sum();
                let mrow = state.m_msg.row_mut(i);
                for mu in 0..p {
                    let fresh = tanh(total - urow[mu]);
                    let new = take * fresh + keep * mrow[mu];
                    residual = residual.max((new - mrow[mu]).abs());
                    mrow[mu] = new;
                }
            }

            state.sweeps_used = sweep;
            state.residual = residual;
            if residual < self.tol {
                state.converged = true;
                break;
            }
        }
        chi_sums(lam, &state.m_msg, inv_sqrt_n, &mut state.chi_full);
        Ok(state)
    }

    /// Bethe estimate `ln Z = Σ_i F_i − (N−1) Σ_μ F_μ` from the messages.
    pub fn bethe_free_energy(
        &self,
        model: &EquivalentModel<'_>,
        state: &CavityState,
    ) -> Result<f64> {
        let shape = model.lambda.shape();
        let (n, p) = (shape.n_visible, shape.n_hidden);
        check_state(state, n, p)?;
        let beta = model.beta;
        let nf = n as f64;
        let inv_sqrt_n = 1.0 / sqrt(nf);
        let lam = model.lambda.lambda();

        let mut chi = vec![0.0; p];
        chi_sums(lam, &state.m_msg, inv_sqrt_n, &mut chi);
        let mut big_lambda_sq = vec![0.0; p];
        for i in 0..n {
            for mu in 0..p {
                let (l, m) = (lam[(i, mu)], state.m_msg[(i, mu)]);
                big_lambda_sq[mu] += l * l * (1.0 - m * m);
            }
        }
        for v in &mut big_lambda_sq {
            *v /= nf;
        }

        let mut sum_fi = 0.0;
        for i in 0..n {
            let mut fi = 0.0;
            let mut u_total = 0.0;
            for mu in 0..p {
                let (l, m) = (lam[(i, mu)], state.m_msg[(i, mu)]);
                let lsq_cav = big_lambda_sq[mu] - l * l * (1.0 - m * m) / nf;
                let chi_cav = chi[mu] - l * m * inv_sqrt_n;
                fi += 0.5 * beta * beta * lsq_cav
                    + ln_cosh(beta * chi_cav + beta * model.h[mu] + beta * l * inv_sqrt_n);
                u_total += state.u_msg[(i, mu)];
            }
            sum_fi += fi + softplus(-2.0 * u_total);
        }
        let sum_fmu: f64 = (0..p)
            .map(|mu| 0.5 * beta * beta * big_lambda_sq[mu] + ln_cosh(beta * chi[mu] + beta * model.h[mu]))
            .sum();
        Ok(sum_fi - (nf - 1.0) * sum_fmu)
    }

    /// Magnetizations, hidden means and visible–hidden correlations at the
    /// fixed point. `log_z` is filled from [`Self::bethe_free_energy`].
    pub fn thermodynamics(
        &self,
        model: &EquivalentModel<'_>,
        state: &CavityState,
    ) -> Result<Thermodynamics> {
        let log_z = self.bethe_free_energy(model, state)?;
        let mut t = self.moments(model, state)?;
        t.log_z = log_z;
        Ok(t)
    }

    /// Same as [`Self::thermodynamics`] without the free energy.
    pub fn moments(
        &self,
        model: &EquivalentModel<'_>,
        state: &CavityState,
    ) -> Result<Thermodynamics> {
        let shape = model.lambda.shape();
        let (n, p) = (shape.n_visible, shape.n_hidden);
        check_state(state, n, p)?;
        let beta = model.beta;
        let nf = n as f64;
        let inv_sqrt_n = 1.0 / sqrt(nf);
        let lam = model.lambda.lambda();

        let m_vis: Vec<f64> = (0..n)
            .map(|i| tanh(state.u_msg.row(i).iter().sum::<f64>()))
            .collect();
        let mut chi_tilde = vec![0.0; p];
        let mut lambda_tilde_sq = vec![0.0; p];
        for (i, mi) in m_vis.iter().enumerate() {
            for mu in 0..p {
                let l = lam[(i, mu)];
                chi_tilde[mu] += l * mi;
                lambda_tilde_sq[mu] += l * l * (1.0 - mi * mi);
            }
        }
        for mu in 0..p {
            chi_tilde[mu] *= inv_sqrt_n;
            lambda_tilde_sq[mu] /= nf;
        }

        let mut m_hid = vec![0.0; p];
        let mut a_mu = vec![0.0; p];
        for mu in 0..p {
            let centre = beta * chi_tilde[mu] + beta * model.h[mu];
            let spread = beta * sqrt(lambda_tilde_sq[mu]);
            let (mean, mean_sq) = self.rule.expect_normal_pair(|z| {
                let t = tanh(centre + spread * z);
                (t, t * t)
            });
            m_hid[mu] = mean;
            a_mu[mu] = 1.0 - mean_sq;
        }

        let corr = Matrix::from_fn(n, p, |i, mu| {
            let mi = m_vis[i];
            m_hid[mu] * mi + beta * lam[(i, mu)] * inv_sqrt_n * (1.0 - mi * mi) * a_mu[mu]
        });

        Ok(Thermodynamics {
            log_z: f64::NAN,
            m_vis,
            m_hid,
            corr,
            a_mu,
            chi_tilde,
            lambda_tilde_sq,
        })
    }
}

fn chi_sums(lam: &Matrix, m_msg: &Matrix, inv_sqrt_n: f64, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for i in 0..lam.rows() {
        for ((o, l), m) in out.iter_mut().zip(lam.row(i)).zip(m_msg.row(i)) {
            *o += l * m;
        }
    }
    out.iter_mut().for_each(|v| *v *= inv_sqrt_n);
}

fn check_state(state: &CavityState, n: usize, p: usize) -> Result<()> {
    check_dim("message rows", n, state.m_msg.rows())?;
    check_dim("message columns", p, state.m_msg.cols())?;
    check_dim("bias rows", n, state.u_msg.rows())?;
    check_dim("bias columns", p, state.u_msg.cols())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::LN_2;
    use crate::rng::seed_rng;
    use crate::types::ModelShape;

    fn random_lambda(n: usize, p: usize, seed: u64, scale: f64) -> VariationalParams {
        let mut rng = seed_rng(seed);
        let m = Matrix::from_fn(n, p, |_, _| rng.uniform_range(-scale, scale));
        VariationalParams::new(ModelShape::new(n, p).unwrap(), m).unwrap()
    }

    fn engine() -> CavityEngine {
        CavityEngine::new(&TrainConfig::default())
    }

    #[test]
    fn zero_couplings_converge_immediately() {
        let lambda = VariationalParams::zeros(ModelShape::new(5, 3).unwrap());
        let model =
            EquivalentModel::new(&lambda, 1.0, vec![0.3, -1.2, 0.5], vec![1.0; 3]).unwrap();
        let st = engine().run_message_passing(&model, None).unwrap();
        assert!(st.converged);
        assert_eq!(st.sweeps_used, 1);
        assert!(st.u_msg.as_slice().iter().all(|&u| u == 0.0));
        assert!(st.m_msg.as_slice().iter().all(|&m| m == 0.0));
    }

    #[test]
    fn zero_beta_gives_zero_messages_and_n_ln2() {
        let lambda = random_lambda(7, 2, 1, 0.9);
        let model = EquivalentModel::new(&lambda, 0.0, vec![0.7, -2.0], vec![0.5, 0.4]).unwrap();
        let e = engine();
        let st = e.run_message_passing(&model, None).unwrap();
        assert!(st.m_msg.as_slice().iter().all(|&m| m == 0.0));
        let lz = e.bethe_free_energy(&model, &st).unwrap();
        assert!((lz - 7.0 * LN_2).abs() <= 1e-12 * 7.0 * LN_2);
        let th = e.thermodynamics(&model, &st).unwrap();
        assert!(th.corr.as_slice().iter().all(|&c| c == 0.0));
        assert!(th.a_mu.iter().all(|&a| (a - 1.0).abs() < 1e-15));
    }

    #[test]
    fn zero_couplings_factorize_free_energy() {
        let lambda = VariationalParams::zeros(ModelShape::new(9, 3).unwrap());
        let h = vec![0.4, -1.7, 2.2];
        let model = EquivalentModel::new(&lambda, 1.0, h.clone(), vec![1.0; 3]).unwrap();
        let e = engine();
        let st = e.run_message_passing(&model, None).unwrap();
        let lz = e.bethe_free_energy(&model, &st).unwrap();
        let want = 9.0 * LN_2 + h.iter().map(|v| ln_cosh(*v)).sum::<f64>();
        assert!(((lz - want) / want).abs() < 1e-12);
    }

    #[test]
    fn hidden_mean_vanishes_without_bias() {
        let lambda = VariationalParams::zeros(ModelShape::new(4, 2).unwrap());
        let model = EquivalentModel::new(&lambda, 1.0, vec![0.0, 0.0], vec![1.0; 2]).unwrap();
        let e = engine();
        let st = e.run_message_passing(&model, None).unwrap();
        let th = e.thermodynamics(&model, &st).unwrap();
        assert!(th.m_hid.iter().all(|m| m.abs() < 1e-15));
    }

    #[test]
    fn messages_stay_bounded_and_warm_start_is_fast() {
        let lambda = random_lambda(40, 3, 9, 0.99);
        let model =
            EquivalentModel::new(&lambda, 1.5, vec![1.0, -0.5, 0.2], vec![0.3, 0.2, 0.4]).unwrap();
        let e = engine();
        let st = e.run_message_passing(&model, None).unwrap();
        assert!(st.converged);
        assert!(st.m_msg.max_abs() <= 1.0);
        assert!(st.u_msg.is_finite());
        let again = e.run_message_passing(&model, Some(&st)).unwrap();
        assert!(again.converged);
        assert!(again.sweeps_used <= 2);
    }

    #[test]
    fn correlation_sum_identity() {
        let lambda = random_lambda(30, 2, 4, 0.9);
        let model = EquivalentModel::new(&lambda, 1.0, vec![0.8, -0.3], vec![0.5, 0.6]).unwrap();
        let e = engine();
        let st = e.run_message_passing(&model, None).unwrap();
        let th = e.thermodynamics(&model, &st).unwrap();
        let inv = 1.0 / 30f64.sqrt();
        for mu in 0..2 {
            let lhs: f64 = (0..30)
                .map(|i| {
                    lambda.get(i, mu) * inv * (th.corr[(i, mu)] - th.m_hid[mu] * th.m_vis[i])
                })
                .sum();
            let rhs = th.lambda_tilde_sq[mu] * th.a_mu[mu];
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_mismatched_fields() {
        let lambda = VariationalParams::zeros(ModelShape::new(3, 2).unwrap());
        assert!(matches!(
            EquivalentModel::new(&lambda, 1.0, vec![0.0], vec![1.0; 2]),
            Err(Error::DimensionMismatch { .. })
        ));
        let model = EquivalentModel::new(&lambda, 1.0, vec![0.0; 2], vec![1.0; 2]).unwrap();
        let bad = CavityState::cold(4, 2);
        assert!(engine().run_message_passing(&model, Some(&bad)).is_err());
        assert!(engine().bethe_free_energy(&model, &bad).is_err());
    }
}
