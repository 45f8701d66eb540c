//! Ground state of `Hφ + φ = |φ|^{2σ}φ`, the threshold `β = S(Q)`, and the
//! constrained minima `d^{a,b}`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{admissible, b_ab_coefficients, evaluate, pow_sigma};
use crate::lattice::{Field, Grid, Representation};
use crate::model::ModelParams;

#[derive(Debug, Clone)]
pub struct GroundStateResult {
    pub q: Field,
    pub beta: f64,
    /// `‖(H+1)Q − |Q|^{2σ}Q‖ / ‖(H+1)Q‖`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Compact summary written next to a stored ground state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateSummary {
    pub beta: f64,
    pub residual: f64,
    pub iterations: usize,
    #[serde(rename = "I_of_Q")]
    pub i_of_q: f64,
    #[serde(rename = "P_of_Q")]
    pub p_of_q: f64,
}

impl GroundStateResult {
    pub fn summary(&self) -> GroundStateSummary {
        let r = evaluate(&self.q);
        GroundStateSummary {
            beta: self.beta,
            residual: self.residual,
            iterations: self.iterations,
            i_of_q: r.nehari,
            p_of_q: r.virial,
        }
    }
}

/// `π^{-(d)/4}`-free Gaussian `e^{-(y²+|z|²)/2}` used as the default starting point.
pub fn default_guess(params: ModelParams, grid: Arc<Grid>) -> Result<Field> {
    Field::from_fn(params, grid, |y, z| {
        let r2: f64 = y * y + z.iter().map(|v| v * v).sum::<f64>();
        Complex64::new((-0.5 * r2).exp(), 0.0)
    })
}

/// Eigenvalues of `H + 1` in coefficient order.
fn h_plus_one(grid: &Grid) -> Vec<f64> {
    let nz = grid.z_total();
    (0..grid.len()).map(|i| grid.h_eigen(i / nz, i % nz) + 1.0).collect()
}

/// Coefficients of `|u|^{2σ} u`.
pub(crate) fn nonlinear_coeffs(params: &ModelParams, grid: &Grid, c: &[Complex64]) -> Vec<Complex64> {
    let mut scratch = Vec::new();
    let mut v = c.to_vec();
    grid.inverse(&mut v, &mut scratch);
    for u in v.iter_mut() {
        *u *= pow_sigma(u.norm_sqr(), params);
    }
    grid.forward(&mut v, &mut scratch);
    v
}

/// Projects coefficients onto real fields even in `y` and in every `z` reflection,
/// symmetric under permutations of identical free axes.
pub(crate) fn symmetrize(grid: &Grid, c: &mut [Complex64]) {
    let nz = grid.z_total();
    let k = grid.free_axes();
    for (m, row) in c.chunks_exact_mut(nz).enumerate() {
        if m % 2 == 1 {
            row.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            continue;
        }
        for a in 0..k {
            let n = grid.axes()[a].points;
            let stride = grid.stride(a);
            let src = row.to_vec();
            for (zi, v) in row.iter_mut().enumerate() {
                let q = grid.z_index(zi, a);
                let qr = (n - q) % n;
                let mirror = zi + qr * stride - q * stride;
                *v = 0.5 * (src[zi] + src[mirror]);
            }
        }
        let identical = grid.axes().windows(2).all(|w| w[0].points == w[1].points && w[0].length == w[1].length);
        if k == 2 && identical {
            let n = grid.axes()[0].points;
            let src = row.to_vec();
            for q0 in 0..n {
                for q1 in 0..n {
                    row[q0 * n + q1] = 0.5 * (src[q0 * n + q1] + src[q1 * n + q0]);
                }
            }
        }
        row.iter_mut().for_each(|v| v.im = 0.0);
    }
}

/// Relative residual of `(H+1)φ = |φ|^{2σ}φ`.
pub fn residual(f: &Field) -> f64 {
    let grid = f.grid();
    let c = f.coefficients();
    let hp = h_plus_one(grid);
    let nl = nonlinear_coeffs(f.params(), grid, &c);
    let mut num = 0.0;
    let mut den = 0.0;
    for ((x, n), h) in c.iter().zip(&nl).zip(&hp) {
        num += (x * h - n).norm_sqr();
        den += (x * h).norm_sqr();
    }
    if den == 0.0 {
        return 0.0;
    }
    (num / den).sqrt()
}

/// Petviashvili fixed point `u ← M^γ (H+1)^{-1}|u|^{2σ}u`, `γ = (2σ+1)/(2σ)`.
pub fn petviashvili(
    params: ModelParams,
    grid: Arc<Grid>,
    guess: &Field,
    tol: f64,
    max_iter: usize,
) -> Result<GroundStateResult> {
    params.require_focusing()?;
    let guess = guess.clone().with_params(params)?;
    if *guess.grid().as_ref() != *grid {
        return Err(Error::Mismatch("guess lives on a different grid".into()));
    }
    let sigma = params.sigma_f64();
    let gamma = (2.0 * sigma + 1.0) / (2.0 * sigma);
    let hp = h_plus_one(&grid);
    let mut c = guess.coefficients().into_owned();
    symmetrize(&grid, &mut c);
    if norm(&c) < 1e-12 {
        return Err(Error::CollapseToZero(0));
    }
    let mut last_change = f64::INFINITY;
    for it in 1..=max_iter {
        let nl = nonlinear_coeffs(&params, &grid, &c);
        let mut quad = 0.0;
        let mut cross = 0.0;
        for ((x, n), h) in c.iter().zip(&nl).zip(&hp) {
            quad += h * x.norm_sqr();
            cross += (x.conj() * n).re;
        }
        if !(cross > 0.0) {
            return Err(Error::CollapseToZero(it));
        }
        let factor = (quad / cross).powf(gamma);
        let mut next: Vec<Complex64> = nl.iter().zip(&hp).map(|(n, h)| n * (factor / h)).collect();
        symmetrize(&grid, &mut next);
        let nn = norm(&next);
        if !(nn >= 1e-12) {
            return Err(Error::CollapseToZero(it));
        }
        let diff: f64 = next.iter().zip(&c).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        last_change = diff / nn;
        c = next;
        if last_change < tol {
            let q = Field::new(params, grid, Representation::Coefficient, c)?;
            let beta = evaluate(&q).action;
            let residual = residual(&q);
            log::info!("ground state converged in {it} iterations, beta = {beta:.12}, residual = {residual:.3e}");
            return Ok(GroundStateResult { q, beta, residual, iterations: it, converged: true });
        }
    }
    Err(Error::NonConvergence { iterations: max_iter, last_change })
}

fn norm(c: &[Complex64]) -> f64 {
    c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescentOptions {
    /// Stop once the preconditioned gradient norm of `log F` falls below this.
    pub tol: f64,
    pub max_iter: usize,
    pub initial_step: f64,
    pub armijo: f64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        DescentOptions { tol: 1e-7, max_iter: 5000, initial_step: 0.1, armijo: 1e-4 }
    }
}

#[derive(Debug, Clone)]
pub struct DabResult {
    pub minimizer: Field,
    pub dab: f64,
    pub iterations: usize,
}

/// Pieces of `J^{a,b} = A − C` and `B^{a,b}` as diagonal coefficient multipliers.
struct DabParts {
    mult_a: Vec<f64>,
    mult_b: Vec<f64>,
    /// `C = kappa · ‖u‖^{2σ+2}_{L^{2σ+2}}`.
    kappa: f64,
}

impl DabParts {
    fn new(params: &ModelParams, grid: &Grid, a: f64, b: f64) -> Result<Self> {
        let (a1, a2) = b_ab_coefficients(params, a, b)?;
        let k = params.free_dims() as f64;
        let qa1 = 0.5 * (2.0 * a + b * k);
        let qa2 = 0.5 * (2.0 * a + b * (k - 2.0));
        let nz = grid.z_total();
        let mut mult_a = Vec::with_capacity(grid.len());
        let mut mult_b = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let (m, zi) = (i / nz, i % nz);
            let conf = (2 * m + 2) as f64;
            let kz = grid.ksq()[zi];
            mult_a.push(qa1 * conf + qa2 * kz);
            mult_b.push(a1 * conf + a2 * kz);
        }
        let p = params.power();
        let kappa = (a * p + b * k) / p;
        Ok(DabParts { mult_a, mult_b, kappa })
    }

}

/// `d^{a,b} = inf{ S(u) : J^{a,b}(u) = 0 }` by preconditioned descent on the
/// scale-invariant `F(u) = B(u)(A/C)^{1/σ}`, each iterate rescaled onto `J = 0`.
pub fn minimize_dab(
    params: ModelParams,
    grid: Arc<Grid>,
    a: f64,
    b: f64,
    opts: DescentOptions,
) -> Result<DabResult> {
    params.require_focusing()?;
    if !admissible(&params, a, b) {
        return Err(Error::InvalidScalePair {
            a,
            b,
            reason: "need a > 0, b <= 0, 2a + b(d-n) >= 0, sigma a + b > 0".into(),
        });
    }
    let parts = DabParts::new(&params, &grid, a, b)?;
    let sigma = params.sigma_f64();
    let hp = h_plus_one(&grid);
    let vol = grid.box_volume();
    let mut field = default_guess(params, grid.clone())?.into_coefficients();
    symmetrize(&grid, field.data_mut());

    let eval = |c: &[Complex64]| -> (f64, f64, f64, f64) {
        let f = Field::new(params, grid.clone(), Representation::Coefficient, c.to_vec()).expect("finite");
        let l = evaluate(&f).l2s2s2;
        let mut qa = 0.0;
        let mut qb = 0.0;
        for ((x, ma), mb) in c.iter().zip(&parts.mult_a).zip(&parts.mult_b) {
            let p = x.norm_sqr();
            qa += ma * p;
            qb += mb * p;
        }
        let (av, bv, cv) = (qa * vol, qb * vol, parts.kappa * l);
        let fval = if av > 0.0 && cv > 0.0 { bv * (av / cv).powf(1.0 / sigma) } else { f64::INFINITY };
        (av, bv, cv, fval)
    };
    let project = |c: &mut Vec<Complex64>, av: f64, cv: f64| {
        let t = (av / cv).powf(1.0 / (2.0 * sigma));
        c.iter_mut().for_each(|v| *v *= t);
    };

    let mut c = field.data().to_vec();
    let (av, _, cv, _) = eval(&c);
    project(&mut c, av, cv);
    let (mut av, mut bv, mut cv, mut fval) = eval(&c);
    let mut step = opts.initial_step;
    for it in 1..=opts.max_iter {
        // ∇ log F = ∇B/B + (∇A/A − ∇C/C)/σ; quadratic parts act diagonally,
        // ∇C = κ(2σ+2)|u|^{2σ}u.
        let nl = nonlinear_coeffs(&params, &grid, &c);
        let cscale = parts.kappa * params.power() / cv;
        let grad: Vec<Complex64> = c
            .iter()
            .zip(&nl)
            .enumerate()
            .map(|(i, (x, n))| {
                let gb = x * (2.0 * parts.mult_b[i] * vol / bv);
                let ga = x * (2.0 * parts.mult_a[i] * vol / av);
                gb + (ga - n * (cscale * vol)) / sigma
            })
            .collect();
        let mut dir: Vec<Complex64> = grad.iter().zip(&hp).map(|(g, h)| g / *h).collect();
        symmetrize(&grid, &mut dir);
        let slope: f64 = grad.iter().zip(&dir).map(|(g, p)| (g.conj() * p).re).sum();
        let gnorm = slope.max(0.0).sqrt() * norm(&c);
        if gnorm < opts.tol {
            return finish_dab(params, grid, c, bv, it);
        }
        let mut s = step;
        loop {
            let trial: Vec<Complex64> = c.iter().zip(&dir).map(|(x, p)| x - p * s).collect();
            let (ta, _, tc, tf) = eval(&trial);
            if tf.is_finite() && tf <= fval - opts.armijo * s * slope {
                let mut t = trial;
                project(&mut t, ta, tc);
                symmetrize(&grid, &mut t);
                c = t;
                (av, bv, cv, fval) = eval(&c);
                step = (2.0 * s).min(16.0 * opts.initial_step);
                break;
            }
            s *= 0.5;
            if s < 1e-14 {
                // No further decrease is representable.
                return finish_dab(params, grid, c, bv, it);
            }
        }
    }
    Err(Error::NonConvergence { iterations: opts.max_iter, last_change: fval })
}

fn finish_dab(params: ModelParams, grid: Arc<Grid>, c: Vec<Complex64>, bv: f64, it: usize) -> Result<DabResult> {
    let minimizer = Field::new(params, grid, Representation::Coefficient, c)?;
    Ok(DabResult { minimizer, dab: bv, iterations: it })
}
