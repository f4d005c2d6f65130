//! Gauss–Hermite quadrature for standard-normal expectations.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{powf, sqrt};

const PI_M4: f64 = 0.751_125_544_464_942_5; // π^{-1/4}
const NEWTON_EPS: f64 = 3e-14;
const NEWTON_MAX_ITER: usize = 100;

/// Nodes and weights for `∫ e^{-t²} f(t) dt ≈ Σ_k w_k f(t_k)`.
///
/// Roots of the Hermite polynomial are found by Newton iteration on the
/// orthonormal three-term recurrence, starting from asymptotic guesses.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    // √2 t_k and w_k / √π, used for E_z f(z) with z ~ N(0, 1)
    z_nodes: Vec<f64>,
    z_weights: Vec<f64>,
}

impl GaussHermite {
    /// Rule of `order` points. Panics if `order` is zero.
    pub fn new(order: usize) -> Self {
        assert!(order > 0, "Gauss-Hermite order must be positive");
        let n = order;
        let nf = n as f64;
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        let half = n.div_ceil(2);
        let mut z = 0.0;
        for i in 0..half {
            z = match i {
                0 => sqrt(2.0 * nf + 1.0) - 1.85575 * powf(2.0 * nf + 1.0, -0.16667),
                1 => z - 1.14 * powf(nf, 0.426) / z,
                2 => 1.86 * z - 0.86 * x[0],
                3 => 1.91 * z - 0.91 * x[1],
                _ => 2.0 * z - x[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..NEWTON_MAX_ITER {
                let mut p1 = PI_M4;
                let mut p2 = 0.0;
                for j in 1..=n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * sqrt(2.0 / jf) * p2 - sqrt((jf - 1.0) / jf) * p3;
                }
                pp = sqrt(2.0 * nf) * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= NEWTON_EPS {
                    break;
                }
            }
            x[i] = z;
            x[n - 1 - i] = -z;
            w[i] = 2.0 / (pp * pp);
            w[n - 1 - i] = w[i];
        }
        if n % 2 == 1 {
            // the middle root is exactly zero
            x[n / 2] = 0.0;
        }
        let inv_sqrt_pi = 1.0 / sqrt(core::f64::consts::PI);
        let z_nodes = x.iter().map(|t| core::f64::consts::SQRT_2 * t).collect();
        let z_weights = w.iter().map(|wk| wk * inv_sqrt_pi).collect();
        Self {
            nodes: x,
            weights: w,
            z_nodes,
            z_weights,
        }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `E[f(z)]` for `z ~ N(0, 1)`, via the substitution `z = √2 t`.
    #[inline]
    pub fn expect_normal(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.z_nodes
            .iter()
            .zip(&self.z_weights)
            .map(|(z, w)| w * f(*z))
            .sum()
    }

    /// `(E[f(z)], E[g(z)])` sharing one pass over the nodes.
    #[inline]
    pub fn expect_normal_pair(&self, mut f: impl FnMut(f64) -> (f64, f64)) -> (f64, f64) {
        let mut a = 0.0;
        let mut b = 0.0;
        for (z, w) in self.z_nodes.iter().zip(&self.z_weights) {
            let (fa, fb) = f(*z);
            a += w * fa;
            b += w * fb;
        }
        (a, b)
    }
}
