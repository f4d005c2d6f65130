//! Exact enumeration for small systems.
//!
//! State `k ∈ 0..2^N` encodes `σ_i = +1` when bit `i` of `k` is set and
//! `σ_i = −1` otherwise. Sums over states are accumulated in log space.

use alloc::vec;
use alloc::vec::Vec;

use crate::cavity::EquivalentModel;
use crate::error::{check_dim, Error, Result};
use crate::math::{exp, ln_cosh, sqrt, tanh, LogSumExp};
use crate::planted::PlantedModel;
use crate::types::{BinaryWeights, Matrix, ModelShape, SpinDataset};

/// Largest `N` accepted by the state enumerators.
pub const MAX_ENUM_VISIBLE: usize = 20;
/// Largest `N·P` accepted by [`exact_posterior`].
pub const MAX_POSTERIOR_PARAMS: usize = 16;
/// Largest `N` accepted by [`exact_posterior`].
pub const MAX_POSTERIOR_VISIBLE: usize = 12;

/// Exact partition function and moments.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactThermo {
    pub log_z: f64,
    /// `⟨σ_i⟩`.
    pub m_vis: Vec<f64>,
    /// `⟨tanh(β G_μ + β H_μ)⟩`.
    pub m_hid_expect: Vec<f64>,
    /// `⟨σ_i tanh(β G_μ + β H_μ)⟩`.
    pub corr: Matrix,
}

/// Exact planted-model measure: moments plus the probability of every state.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedExact {
    pub thermo: ExactThermo,
    /// `P(σ)` indexed by state code.
    pub probs: Vec<f64>,
}

/// Decodes state `k` into spins.
pub fn state_spins(k: usize, n: usize) -> Vec<i8> {
    (0..n).map(|i| if (k >> i) & 1 == 1 { 1 } else { -1 }).collect()
}

/// Inverse of [`state_spins`].
pub fn state_index(sigma: &[i8]) -> usize {
    sigma
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > 0)
        .fold(0, |k, (i, _)| k | (1 << i))
}

fn guard_visible(n: usize) -> Result<()> {
    if n > MAX_ENUM_VISIBLE {
        return Err(Error::TooLarge {
            what: "N",
            value: n,
            limit: MAX_ENUM_VISIBLE,
        });
    }
    Ok(())
}

/// Core enumerator over `∏_μ cosh(β Σ_i w_{iμ} σ_i / √N + β h_μ)`.
fn enumerate(couplings: &Matrix, beta: f64, h: &[f64], keep_table: bool) -> (ExactThermo, Vec<f64>) {
    let (n, p) = (couplings.rows(), couplings.cols());
    let inv_sqrt_n = 1.0 / sqrt(n as f64);
    let mut acc = LogSumExp::new();
    let mut m_vis = vec![0.0; n];
    let mut m_hid = vec![0.0; p];
    let mut corr = Matrix::zeros(n, p);
    let mut log_w_table = if keep_table { Vec::with_capacity(1 << n) } else { Vec::new() };
    let mut field = vec![0.0; p];
    let mut th = vec![0.0; p];

    for k in 0..(1usize << n) {
        field.iter_mut().for_each(|f| *f = 0.0);
        for i in 0..n {
            let s = if (k >> i) & 1 == 1 { 1.0 } else { -1.0 };
            for (f, w) in field.iter_mut().zip(couplings.row(i)) {
                *f += w * s;
            }
        }
        let mut log_w = 0.0;
        for mu in 0..p {
            let arg = beta * field[mu] * inv_sqrt_n + beta * h[mu];
            log_w += ln_cosh(arg);
            th[mu] = tanh(arg);
        }
        if keep_table {
            log_w_table.push(log_w);
        }
        let (scale, w) = acc.push(log_w);
        if scale != 1.0 {
            m_vis.iter_mut().for_each(|v| *v *= scale);
            m_hid.iter_mut().for_each(|v| *v *= scale);
            corr.as_mut_slice().iter_mut().for_each(|v| *v *= scale);
        }
        for (h, t) in m_hid.iter_mut().zip(&th) {
            *h += w * t;
        }
        for (i, mv) in m_vis.iter_mut().enumerate() {
            let s = if (k >> i) & 1 == 1 { w } else { -w };
            *mv += s;
            for (c, t) in corr.row_mut(i).iter_mut().zip(&th) {
                *c += s * t;
            }
        }
    }

    let norm = acc.sum();
    m_vis.iter_mut().for_each(|v| *v /= norm);
    m_hid.iter_mut().for_each(|v| *v /= norm);
    corr.as_mut_slice().iter_mut().for_each(|v| *v /= norm);
    let log_z = acc.ln_total();
    let probs = log_w_table.iter().map(|lw| exp(lw - log_z)).collect();
    (
        ExactThermo {
            log_z,
            m_vis,
            m_hid_expect: m_hid,
            corr,
        },
        probs,
    )
}

/// Exact `ln Z_eq` and moments of an equivalent model by summing all `2^N`
/// visible states.
pub fn enumerate_equivalent(model: &EquivalentModel<'_>) -> Result<ExactThermo> {
    let lam = model.lambda().lambda();
    guard_visible(lam.rows())?;
    Ok(enumerate(lam, model.beta(), model.fields(), false).0)
}

/// Exact distribution `P(σ) ∝ ∏_μ cosh(β X_μ)` of a planted model.
pub fn enumerate_planted(model: &PlantedModel) -> Result<PlantedExact> {
    let shape = model.weights.shape();
    guard_visible(shape.n_visible)?;
    let h = vec![0.0; shape.n_hidden];
    let (thermo, probs) = enumerate(&model.weights.to_matrix(), model.beta, &h, true);
    Ok(PlantedExact { thermo, probs })
}

/// `ln Z(ξ)` by enumeration.
pub fn log_partition(weights: &BinaryWeights, beta: f64) -> Result<f64> {
    let shape = weights.shape();
    guard_visible(shape.n_visible)?;
    let h = vec![0.0; shape.n_hidden];
    Ok(enumerate(&weights.to_matrix(), beta, &h, false).0.log_z)
}

/// Exact posterior over all `2^{NP}` weight matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactPosterior {
    pub shape: ModelShape,
    /// `P(ξ | D)` indexed by weight code: bit `i·P + μ` set means `ξ_{iμ} = +1`.
    pub probs: Vec<f64>,
    /// `⟨ξ_{iμ}⟩` under the posterior.
    pub marginal_means: Matrix,
}

impl ExactPosterior {
    pub fn weights_for(&self, code: usize) -> BinaryWeights {
        let np = self.shape.n_params();
        let xi = (0..np)
            .map(|b| if (code >> b) & 1 == 1 { 1 } else { -1 })
            .collect();
        BinaryWeights::new(self.shape, xi).expect("code decodes to valid weights")
    }
}

/// `P(ξ|D) ∝ exp(−M ln Z(ξ) + Σ_{a,μ} ln cosh(β X_μ^a))` under a uniform
/// prior. Pass `None` for the empty dataset (`M = 0`).
pub fn exact_posterior(
    data: Option<&SpinDataset>,
    shape: ModelShape,
    beta: f64,
) -> Result<ExactPosterior> {
    let (n, p) = (shape.n_visible, shape.n_hidden);
    if n > MAX_POSTERIOR_VISIBLE {
        return Err(Error::TooLarge {
            what: "N",
            value: n,
            limit: MAX_POSTERIOR_VISIBLE,
        });
    }
    if shape.n_params() > MAX_POSTERIOR_PARAMS {
        return Err(Error::TooLarge {
            what: "N·P",
            value: shape.n_params(),
            limit: MAX_POSTERIOR_PARAMS,
        });
    }
    if let Some(d) = data {
        check_dim("sample length", n, d.n_visible())?;
    }
    let m = data.map_or(0, |d| d.len()) as f64;
    let inv_sqrt_n = 1.0 / sqrt(n as f64);
    let n_codes = 1usize << shape.n_params();

    let mut log_post = Vec::with_capacity(n_codes);
    let mut acc = LogSumExp::new();
    let zeros = vec![0.0; p];
    for code in 0..n_codes {
        let w = Matrix::from_fn(n, p, |i, mu| {
            if (code >> (i * p + mu)) & 1 == 1 {
                1.0
            } else {
                -1.0
            }
        });
        let mut lp = 0.0;
        if m > 0.0 {
            let log_z = enumerate(&w, beta, &zeros, false).0.log_z;
            lp -= m * log_z;
            for sigma in data.into_iter().flat_map(|d| d.iter()) {
                for mu in 0..p {
                    let x: f64 = (0..n).map(|i| w[(i, mu)] * f64::from(sigma[i])).sum();
                    lp += ln_cosh(beta * x * inv_sqrt_n);
                }
            }
        }
        acc.push(lp);
        log_post.push(lp);
    }
    let log_omega = acc.ln_total();
    let probs: Vec<f64> = log_post.iter().map(|lp| exp(lp - log_omega)).collect();
    let mut means = Matrix::zeros(n, p);
    for (code, pr) in probs.iter().enumerate() {
        for i in 0..n {
            for mu in 0..p {
                let s = if (code >> (i * p + mu)) & 1 == 1 { 1.0 } else { -1.0 };
                means[(i, mu)] += pr * s;
            }
        }
    }
    Ok(ExactPosterior {
        shape,
        probs,
        marginal_means: means,
    })
}

/// Code of `weights` in [`ExactPosterior::probs`].
pub fn weight_code(weights: &BinaryWeights) -> usize {
    weights
        .as_slice()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0)
        .fold(0, |c, (b, _)| c | (1 << b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::LN_2;
    use crate::planted::PlantMethod;
    use crate::rng::seed_rng;
    use crate::types::{DatasetMeta, VariationalParams};

    #[test]
    fn zero_beta_is_uniform() {
        let mut rng = seed_rng(2);
        let lam = Matrix::from_fn(6, 2, |_, _| rng.uniform_range(-0.9, 0.9));
        let vp = VariationalParams::new(ModelShape::new(6, 2).unwrap(), lam).unwrap();
        let model = EquivalentModel::new(&vp, 0.0, vec![0.5, -0.5], vec![1.0; 2]).unwrap();
        let ex = enumerate_equivalent(&model).unwrap();
        assert!((ex.log_z - 6.0 * LN_2).abs() < 1e-12);
        assert!(ex.m_vis.iter().all(|m| m.abs() < 1e-15));
        assert!(ex.corr.as_slice().iter().all(|c| c.abs() < 1e-15));
    }

    #[test]
    fn two_state_sum() {
        let eps = 1e-3;
        let vp = VariationalParams::new(
            ModelShape::new(1, 1).unwrap(),
            Matrix::from_vec(1, 1, vec![1.0 - eps]).unwrap(),
        )
        .unwrap();
        let model = EquivalentModel::new(&vp, 1.0, vec![0.0], vec![1.0]).unwrap();
        let ex = enumerate_equivalent(&model).unwrap();
        let want = (2.0 * (1.0f64 - eps).cosh()).ln();
        assert!((ex.log_z - want).abs() < 1e-14);
    }

    #[test]
    fn zero_couplings_factorize() {
        let vp = VariationalParams::zeros(ModelShape::new(5, 2).unwrap());
        let h = vec![1.3, -0.2];
        let model = EquivalentModel::new(&vp, 1.0, h.clone(), vec![1.0; 2]).unwrap();
        let ex = enumerate_equivalent(&model).unwrap();
        let want = 5.0 * LN_2 + h.iter().map(|v| ln_cosh(*v)).sum::<f64>();
        assert!((ex.log_z - want).abs() < 1e-13);
    }

    #[test]
    fn size_guards() {
        let vp = VariationalParams::zeros(ModelShape::new(21, 1).unwrap());
        let model = EquivalentModel::new(&vp, 1.0, vec![0.0], vec![1.0]).unwrap();
        assert!(matches!(enumerate_equivalent(&model), Err(Error::TooLarge { .. })));
        assert!(exact_posterior(None, ModelShape::new(13, 1).unwrap(), 1.0).is_err());
        assert!(exact_posterior(None, ModelShape::new(9, 2).unwrap(), 1.0).is_err());
    }

    fn planted(xi: Vec<i8>, n: usize, p: usize, beta: f64) -> PlantedModel {
        PlantedModel {
            weights: BinaryWeights::new(ModelShape::new(n, p).unwrap(), xi).unwrap(),
            beta,
            correlation: 0.0,
            seed: 0,
            method: PlantMethod::Orthogonal,
        }
    }

    #[test]
    fn planted_zero_beta_uniform() {
        let ex = enumerate_planted(&planted(vec![1, -1, 1, 1], 4, 1, 0.0)).unwrap();
        assert!(ex.probs.iter().all(|p| (p - 1.0 / 16.0).abs() < 1e-15));
    }

    #[test]
    fn planted_mode_at_aligned_states() {
        let ex = enumerate_planted(&planted(vec![1; 4], 4, 1, 1.0)).unwrap();
        let total: f64 = ex.probs.iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
        let top = ex.probs[0b1111];
        assert!((top - ex.probs[0]).abs() < 1e-15);
        for (k, p) in ex.probs.iter().enumerate() {
            let s: i32 = state_spins(k, 4).iter().map(|v| i32::from(*v)).sum();
            let want = (f64::from(s) / 2.0).cosh() / 1f64.cosh();
            assert!((p / ex.probs[0b0111] - want).abs() < 1e-12, "state {k}");
            assert!(*p <= top + 1e-15);
        }
        // ratio check for P(σ) ∝ cosh(Σσ/2)
        let r = ex.probs[0b1111] / ex.probs[0b0011];
        assert!((r - 2f64.cosh()).abs() < 1e-12);
    }

    #[test]
    fn column_flip_keeps_partition_function() {
        let w = BinaryWeights::new(
            ModelShape::new(6, 2).unwrap(),
            vec![1, -1, 1, 1, -1, 1, 1, -1, -1, -1, 1, 1],
        )
        .unwrap();
        let a = log_partition(&w, 1.0).unwrap();
        let b = log_partition(&w.flip_column(1), 1.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn posterior_without_data_is_uniform() {
        let post = exact_posterior(None, ModelShape::new(3, 2).unwrap(), 1.0).unwrap();
        assert!(post.probs.iter().all(|p| (p - 1.0 / 64.0).abs() < 1e-15));
        assert!(post.marginal_means.as_slice().iter().all(|m| m.abs() < 1e-15));
    }

    #[test]
    fn flip_symmetric_data_gives_zero_means() {
        let raw: Vec<i8> = vec![1, 1, -1, 1, -1, -1, 1, -1, -1, -1, 1, 1, 1, 1, 1, -1, -1, -1];
        let mut flat = raw.clone();
        flat.extend(raw.iter().map(|v| -v));
        let data = SpinDataset::from_flat(3, flat, DatasetMeta::default()).unwrap();
        let post = exact_posterior(Some(&data), ModelShape::new(3, 2).unwrap(), 1.0).unwrap();
        assert!(post.marginal_means.as_slice().iter().all(|m| m.abs() < 1e-12));
        // column-gauge symmetry of the table
        for code in 0..post.probs.len() {
            let w = post.weights_for(code);
            let flipped = weight_code(&w.flip_column(0));
            assert!((post.probs[code] - post.probs[flipped]).abs() < 1e-15);
        }
    }

    #[test]
    fn state_codes_round_trip() {
        for k in 0..64 {
            assert_eq!(state_index(&state_spins(k, 6)), k);
        }
    }
}
