#![allow(clippy::too_many_arguments, clippy::needless_range_loop)]

use binrbm_core::cavity::EquivalentModel;
use binrbm_core::oracle::enumerate_equivalent;
use binrbm_core::trainer::{
    data_gradient, draw_field_samples, gaussian_stats, gradient, regularizer_gradient,
};
use binrbm_core::{
    seed_rng, DatasetMeta, FieldSample, Matrix, ModelShape, PriorMeans, SpinDataset, TrainConfig,
    VariationalParams,
};

fn random_vp(n: usize, p: usize, seed: u64, scale: f64) -> VariationalParams {
    let mut rng = seed_rng(seed);
    let m = Matrix::from_fn(n, p, |_, _| rng.uniform_range(-scale, scale));
    VariationalParams::new(ModelShape::new(n, p).unwrap(), m).unwrap()
}

fn random_data(n: usize, m: usize, seed: u64) -> SpinDataset {
    let mut rng = seed_rng(seed);
    let spins = (0..n * m).map(|_| rng.spin(0.5)).collect();
    SpinDataset::from_flat(n, spins, DatasetMeta::default()).unwrap()
}

/// `−KL + (1/B₁) Σ ln cosh(β G + β Ξ z)` with `Ξ` held at `xi`, written
/// out directly.
fn frozen_objective(lam: &[f64], n: usize, p: usize, prior: &[f64], data: &SpinDataset, fields: &[FieldSample], xi: &[f64], beta: f64) -> f64 {
    let mut kl = 0.0;
    for (l, m) in lam.iter().zip(prior) {
        for x in [1.0, -1.0] {
            let z = (1.0 + l * x) / 2.0;
            let y = (1.0 + m * x) / 2.0;
            kl += z * (z / y).ln();
        }
    }
    let mut data_term = 0.0;
    for sigma in data.iter() {
        for mu in 0..p {
            let g: f64 = (0..n).map(|i| lam[i * p + mu] * f64::from(sigma[i])).sum::<f64>() / (n as f64).sqrt();
            for f in fields {
                data_term += (beta * g + beta * xi[mu] * f.z[mu]).cosh().ln();
            }
        }
    }
    -kl + data_term / fields.len() as f64
}

#[test]
fn mean_part_matches_finite_differences() {
    let (n, p, m, beta) = (20, 2, 5, 1.0);
    let vp = random_vp(n, p, 1, 0.8);
    let prior_vp = random_vp(n, p, 2, 0.3);
    let prior = PriorMeans::new(prior_vp.shape(), prior_vp.lambda().clone()).unwrap();
    let data = random_data(n, m, 3);
    let fields = draw_field_samples(3, p, &mut seed_rng(4));
    let stats = gaussian_stats(&vp, &data, 1e-8).unwrap();
    let xi: Vec<f64> = stats.xi_var.iter().map(|v| v.sqrt()).collect();

    let reg = regularizer_gradient(&vp, &prior).unwrap();
    let dg = data_gradient(&vp, &data, &stats, &fields, beta).unwrap();

    let h = 1e-5;
    let base = vp.lambda().as_slice().to_vec();
    let mut worst: f64 = 0.0;
    for k in 0..n * p {
        let mut up = base.clone();
        let mut dn = base.clone();
        up[k] += h;
        dn[k] -= h;
        let prior_s = prior.means().as_slice();
        let fd = (frozen_objective(&up, n, p, prior_s, &data, &fields, &xi, beta)
            - frozen_objective(&dn, n, p, prior_s, &data, &fields, &xi, beta))
            / (2.0 * h);
        let analytic = reg.as_slice()[k] + dg.mean_part.as_slice()[k];
        let rel = (fd - analytic).abs() / analytic.abs().max(1e-3);
        worst = worst.max(rel);
    }
    assert!(worst <= 1e-4, "worst relative error {worst:e}");
}

#[test]
fn variance_part_matches_gaussian_identity() {
    // The variance part is the integration-by-parts form of
    // −(βλ/(NΞ)) Σ_a E_z[z tanh(βG + βΞz)]; estimate the latter directly
    // from an independent set of draws and compare column factors.
    let (n, p, m, beta) = (20, 2, 5, 1.0);
    let vp = random_vp(n, p, 5, 0.8);
    let data = random_data(n, m, 6);
    let stats = gaussian_stats(&vp, &data, 1e-8).unwrap();
    let xi: Vec<f64> = stats.xi_var.iter().map(|v| v.sqrt()).collect();
    let count = 1_000_000;
    let stein_fields = draw_field_samples(count, p, &mut seed_rng(7));
    let dg = data_gradient(&vp, &data, &stats, &stein_fields, beta).unwrap();

    let mut rng = seed_rng(8);
    for mu in 0..p {
        // implementation, as −λ·K_μ
        let (i, lam) = (0..n).map(|i| (i, vp.get(i, mu))).max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).unwrap();
        let k_impl = -dg.variance_part[(i, mu)] / lam;

        let per_draw_stein = |z: f64| -> f64 {
            (0..m).map(|a| 1.0 - (beta * stats.g[(a, mu)] + beta * xi[mu] * z).tanh().powi(2)).sum::<f64>() * beta * beta / n as f64
        };
        let per_draw_direct = |z: f64| -> f64 {
            (0..m).map(|a| z * (beta * stats.g[(a, mu)] + beta * xi[mu] * z).tanh()).sum::<f64>() * beta / (n as f64 * xi[mu])
        };
        let (mut s1, mut s2) = (0.0, 0.0);
        for f in &stein_fields {
            let v = per_draw_stein(f.z[mu]);
            s1 += v;
            s2 += v * v;
        }
        let mean_s = s1 / count as f64;
        assert!((mean_s - k_impl).abs() < 1e-10 * k_impl.abs());
        let se_s = ((s2 / count as f64 - mean_s * mean_s) / count as f64).sqrt();

        let (mut d1, mut d2) = (0.0, 0.0);
        for _ in 0..count {
            let v = per_draw_direct(rng.standard_normal());
            d1 += v;
            d2 += v * v;
        }
        let mean_d = d1 / count as f64;
        let se_d = ((d2 / count as f64 - mean_d * mean_d) / count as f64).sqrt();
        let se = (se_s * se_s + se_d * se_d).sqrt();
        assert!((k_impl - mean_d).abs() <= 3.0 * se, "column {mu}: {k_impl} vs {mean_d} ± {se}");
    }
}

#[test]
fn doubling_samples_halves_gradient_variance() {
    let (n, p, m) = (16, 2, 10);
    let vp = random_vp(n, p, 9, 0.6);
    let prior = PriorMeans::uniform(vp.shape());
    let data = random_data(n, m, 10);
    let reps = 400;
    let variance = |b: usize, stream: u64| -> f64 {
        let cfg = TrainConfig { b1: b, b2: b, ..TrainConfig::default() };
        let root = seed_rng(stream);
        let draws: Vec<Vec<f64>> = (0..reps as u64)
            .map(|r| {
                let f1 = draw_field_samples(b, p, &mut root.split("b1", r));
                let f2 = draw_field_samples(b, p, &mut root.split("b2", r));
                gradient(&vp, &prior, &data, &f1, &f2, &cfg).unwrap().total().into_vec()
            })
            .collect();
        let mut total = 0.0;
        for k in 0..n * p {
            let mean = draws.iter().map(|d| d[k]).sum::<f64>() / reps as f64;
            total += draws.iter().map(|d| (d[k] - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        }
        total
    };
    let ratio = variance(8, 12) / variance(4, 11);
    assert!((0.35..=0.65).contains(&ratio), "variance ratio {ratio}");
}

fn model_setup() -> (VariationalParams, Vec<FieldSample>, TrainConfig) {
    let (n, p) = (12, 2);
    let vp = random_vp(n, p, 13, 0.9);
    let f2 = draw_field_samples(3, p, &mut seed_rng(15));
    (vp, f2, TrainConfig::default())
}

/// `(β/√N) Σ_s [C − λ z m̂/(√N Ξ)] / B₂` from exact moments.
fn exact_model_gradient(vp: &VariationalParams, fields: &[FieldSample], cfg: &TrainConfig) -> Matrix {
    let shape = vp.shape();
    let (n, p) = (shape.n_visible, shape.n_hidden);
    let sqrt_n = (n as f64).sqrt();
    let mut out = Matrix::zeros(n, p);
    for f in fields {
        let eq = EquivalentModel::from_field_sample(vp, cfg.beta, f, cfg.eps_var).unwrap();
        let ex = enumerate_equivalent(&eq).unwrap();
        for i in 0..n {
            for mu in 0..p {
                let xi = eq.xi_var()[mu].sqrt();
                out[(i, mu)] += cfg.beta / sqrt_n
                    * (ex.corr[(i, mu)] - vp.get(i, mu) * f.z[mu] * ex.m_hid_expect[mu] / (sqrt_n * xi));
            }
        }
    }
    out.as_mut_slice().iter_mut().for_each(|v| *v /= fields.len() as f64);
    out
}

#[test]
fn model_formula_is_exact_derivative_of_log_partition() {
    let (vp, f2, cfg) = model_setup();
    let want = exact_model_gradient(&vp, &f2, &cfg);
    let mean_log_z = |lam: &Matrix| -> f64 {
        let v = VariationalParams::new(vp.shape(), lam.clone()).unwrap();
        f2.iter()
            .map(|f| enumerate_equivalent(&EquivalentModel::from_field_sample(&v, cfg.beta, f, cfg.eps_var).unwrap()).unwrap().log_z)
            .sum::<f64>()
            / f2.len() as f64
    };
    let h = 1e-5;
    for i in 0..vp.shape().n_visible {
        for mu in 0..vp.shape().n_hidden {
            let mut up = vp.lambda().clone();
            let mut dn = vp.lambda().clone();
            up[(i, mu)] += h;
            dn[(i, mu)] -= h;
            let fd = (mean_log_z(&up) - mean_log_z(&dn)) / (2.0 * h);
            assert!((fd - want[(i, mu)]).abs() < 1e-6 * want[(i, mu)].abs().max(1e-2), "({i},{mu}): {fd} vs {}", want[(i, mu)]);
        }
    }
}

#[test]
fn model_part_close_to_exact_gradient() {
    let (vp, f2, cfg) = model_setup();
    let want = exact_model_gradient(&vp, &f2, &cfg);
    let one = SpinDataset::from_flat(12, vec![1; 12], DatasetMeta::default()).unwrap();
    let f1 = draw_field_samples(1, 2, &mut seed_rng(16));
    let got = gradient(&vp, &PriorMeans::uniform(vp.shape()), &one, &f1, &f2, &cfg).unwrap().model;
    // compare on the scale of the correlations themselves
    let scale = (12f64).sqrt() / cfg.beta;
    let mse = got.as_slice().iter().zip(want.as_slice()).map(|(a, b)| ((a - b) * scale).powi(2)).sum::<f64>() / 24.0;
    assert!(mse.sqrt() <= 0.1, "RMSE {}", mse.sqrt());
}
