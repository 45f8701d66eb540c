//! Hermite-function collocation on the confined axis.
//!
//! The normalized Hermite functions `h_m(y) = (2^m m! √π)^{-1/2} H_m(y) e^{-y²/2}`
//! are eigenfunctions of `-∂²_y + y²` with eigenvalue `2m + 1`. Physical values
//! live on the `M` Gauss–Hermite nodes; with the weightless quadrature weights
//! `w̃_j = 1 / Σ_{m<M} h_m(y_j)²` the matrix `U_{jm} = √w̃_j h_m(y_j)` is
//! orthogonal, so the transform and its inverse are exact to round-off.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Values `h_0(y), …, h_{count-1}(y)` by the stable three-term recurrence.
///
/// The recurrence runs on `h_m e^{y²/2}` with periodic rescaling, so large `|y|`
/// neither underflows the low modes to a spurious zero start nor overflows.
pub fn hermite_functions(y: f64, count: usize) -> Vec<f64> {
    const BIG: f64 = 1e150;
    let mut out = vec![0.0; count];
    if count == 0 {
        return out;
    }
    let mut log_scale = -0.5 * y * y;
    let mut prev = 0.0;
    let mut cur = std::f64::consts::PI.powf(-0.25);
    out[0] = cur * log_scale.exp();
    for m in 0..count - 1 {
        let mf = m as f64;
        let next = (2.0 / (mf + 1.0)).sqrt() * y * cur - (mf / (mf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > BIG {
            prev /= BIG;
            cur /= BIG;
            log_scale += BIG.ln();
        }
        out[m + 1] = cur * log_scale.exp();
    }
    out
}

#[derive(Debug, Clone)]
pub struct HermiteBasis {
    modes: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// Row-major `M×M`, coefficients = forward · values.
    forward: Vec<f64>,
    /// Row-major `M×M`, values = inverse · coefficients.
    inverse: Vec<f64>,
}

impl HermiteBasis {
    pub fn new(modes: usize) -> Result<Self> {
        if modes < 8 {
            return Err(Error::InvalidGrid(format!("hermite_modes must be at least 8, got {modes}")));
        }
        let nodes = gauss_hermite_nodes(modes);
        let mut weights = Vec::with_capacity(modes);
        let mut table = Vec::with_capacity(modes);
        for &y in &nodes {
            let h = hermite_functions(y, modes);
            let s: f64 = h.iter().map(|v| v * v).sum();
            weights.push(1.0 / s);
            table.push(h);
        }
        let mut forward = vec![0.0; modes * modes];
        let mut inverse = vec![0.0; modes * modes];
        for j in 0..modes {
            let sw = weights[j].sqrt();
            for m in 0..modes {
                // U_{jm} = sqrt(w_j) h_m(y_j)
                let u = sw * table[j][m];
                forward[m * modes + j] = u * sw;
                inverse[j * modes + m] = u / sw;
            }
        }
        Ok(HermiteBasis { modes, nodes, weights, forward, inverse })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weightless quadrature weights: `∫ g dy ≈ Σ_j w̃_j g(y_j)`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub(crate) fn forward_matrix(&self) -> &[f64] {
        &self.forward
    }

    pub(crate) fn inverse_matrix(&self) -> &[f64] {
        &self.inverse
    }
}

/// Roots of `H_M`, ascending, from the Golub–Welsch matrix polished by Newton steps.
fn gauss_hermite_nodes(m: usize) -> Vec<f64> {
    let mut jac = DMatrix::<f64>::zeros(m, m);
    for i in 1..m {
        let b = (i as f64 / 2.0).sqrt();
        jac[(i, i - 1)] = b;
        jac[(i - 1, i)] = b;
    }
    let eig = jac.symmetric_eigen();
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for y in nodes.iter_mut() {
        for _ in 0..3 {
            let h = hermite_functions(*y, m + 1);
            // h_M' = sqrt(2M) h_{M-1} - y h_M
            let dh = (2.0 * m as f64).sqrt() * h[m - 1] - *y * h[m];
            let step = h[m] / dh;
            if !step.is_finite() {
                break;
            }
            *y -= step;
        }
    }
    // exact symmetry about zero
    for i in 0..m / 2 {
        let a = 0.5 * (nodes[m - 1 - i] - nodes[i]);
        nodes[i] = -a;
        nodes[m - 1 - i] = a;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    nodes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_are_roots_and_symmetric() {
        let b = HermiteBasis::new(32).unwrap();
        for (j, &y) in b.nodes().iter().enumerate() {
            let h = hermite_functions(y, 33);
            assert!(h[32].abs() < 1e-12, "node {j} residual {}", h[32]);
            assert_eq!(y, -b.nodes()[31 - j]);
        }
    }

    #[test]
    fn quadrature_is_orthonormal() {
        let b = HermiteBasis::new(24).unwrap();
        let m = b.modes();
        for a in 0..m {
            for c in 0..m {
                let s: f64 = (0..m)
                    .map(|j| {
                        let h = hermite_functions(b.nodes()[j], m);
                        b.weights()[j] * h[a] * h[c]
                    })
                    .sum();
                let want = if a == c { 1.0 } else { 0.0 };
                assert!((s - want).abs() < 1e-12, "({a},{c}) -> {s}");
            }
        }
    }

    #[test]
    fn gaussian_moment_quadrature() {
        // ∫ y² π^{-1/2} e^{-y²} dy = 1/2
        let b = HermiteBasis::new(16).unwrap();
        let s: f64 = b
            .nodes()
            .iter()
            .zip(b.weights())
            .map(|(&y, &w)| w * y * y * (-y * y).exp() / std::f64::consts::PI.sqrt())
            .sum();
        assert!((s - 0.5).abs() < 1e-13);
    }

    #[test]
    fn large_bases_stay_finite() {
        let b = HermiteBasis::new(800).unwrap();
        assert!(b.weights().iter().all(|w| w.is_finite() && *w > 0.0));
        let h = hermite_functions(30.0, 3);
        assert!(h.iter().all(|v| *v == 0.0 || v.is_normal()));
    }

    #[test]
    fn too_few_modes_rejected() {
        assert!(HermiteBasis::new(7).is_err());
    }
}
