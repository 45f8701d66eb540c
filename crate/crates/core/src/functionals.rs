//! Conserved quantities, the action and its scaling derivatives.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{coeff_norm_sq, ladder, phys_integral, Field, Grid, Ladder, Representation};
use crate::model::ModelParams;

/// Every scalar functional of one state. JSON keys follow the usual symbols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    #[serde(rename = "M")]
    pub mass: f64,
    #[serde(rename = "G")]
    pub momentum: Vec<f64>,
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "S")]
    pub action: f64,
    #[serde(rename = "I")]
    pub nehari: f64,
    #[serde(rename = "P")]
    pub virial: f64,
    #[serde(rename = "B1sq")]
    pub b1_sq: f64,
    #[serde(rename = "B1dot_sq")]
    pub b1dot_sq: f64,
    #[serde(rename = "L2s2s2")]
    pub l2s2s2: f64,
    pub gradz_sq: f64,
    pub grady_sq: f64,
    pub ymom_sq: f64,
    /// `‖ |z| u ‖²`.
    pub sigma_weight: f64,
}

impl FunctionalReport {
    /// `‖∇_x u‖²`.
    pub fn gradx_sq(&self) -> f64 {
        self.grady_sq + self.gradz_sq
    }
}

/// `s^σ` for `s ≥ 0`, using integer powers when σ is an integer.
pub(crate) fn pow_sigma(s: f64, params: &ModelParams) -> f64 {
    if *params.sigma.denom() == 1 {
        s.powi(*params.sigma.numer() as i32)
    } else if *params.sigma.denom() == 2 {
        s.sqrt().powi(*params.sigma.numer() as i32)
    } else {
        s.powf(params.sigma_f64())
    }
}

pub fn evaluate(f: &Field) -> FunctionalReport {
    let c = f.coefficients();
    let v = f.values();
    evaluate_parts(f.params(), f.grid(), &c, &v)
}

/// `evaluate` from precomputed coefficients and physical values.
pub(crate) fn evaluate_parts(params: &ModelParams, grid: &Grid, c: &[Complex64], v: &[Complex64]) -> FunctionalReport {
    let vol = grid.box_volume();
    let nz = grid.z_total();
    let mass = coeff_norm_sq(grid, c);
    let mut momentum = vec![0.0; grid.free_axes()];
    let mut gradz = 0.0;
    for (i, x) in c.iter().enumerate() {
        let zi = i % nz;
        let p = x.norm_sqr();
        gradz += grid.ksq()[zi] * p;
        for (a, g) in momentum.iter_mut().enumerate() {
            *g += grid.axes()[a].deriv_wavenumbers[grid.z_index(zi, a)] * p;
        }
    }
    let gradz_sq = gradz * vol;
    momentum.iter_mut().for_each(|g| *g *= vol);
    let grady_sq = ladder_sq(grid, c, Ladder::Derivative);
    let ymom_sq = ladder_sq(grid, c, Ladder::Position);
    let l2s2s2 = phys_integral(grid, v, |u| {
        let s = u.norm_sqr();
        s * pow_sigma(s, params)
    });
    let sigma_weight = sigma_weight(grid, v);
    let b1dot_sq = grady_sq + gradz_sq + ymom_sq;
    let b1_sq = b1dot_sq + mass;
    let power = params.power();
    let energy = 0.5 * b1dot_sq + params.lambda_f64() / power * l2s2s2;
    let action = energy + 0.5 * mass;
    let sigma = params.sigma_f64();
    let k = params.free_dims() as f64;
    FunctionalReport {
        mass,
        momentum,
        energy,
        action,
        nehari: b1_sq - l2s2s2,
        virial: 2.0 / k * gradz_sq - sigma / (sigma + 1.0) * l2s2s2,
        b1_sq,
        b1dot_sq,
        l2s2s2,
        gradz_sq,
        grady_sq,
        ymom_sq,
        sigma_weight,
    }
}

fn ladder_sq(grid: &Grid, c: &[Complex64], kind: Ladder) -> f64 {
    ladder(grid, c, kind).iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.box_volume()
}

fn sigma_weight(grid: &Grid, v: &[Complex64]) -> f64 {
    let nz = grid.z_total();
    let w = grid.hermite().weights();
    let r2: Vec<f64> = (0..nz).map(|zi| grid.z_radius_sq(zi)).collect();
    let mut total = 0.0;
    for (j, row) in v.chunks_exact(nz).enumerate() {
        let s: f64 = row.iter().zip(&r2).map(|(u, r)| r * u.norm_sqr()).sum();
        total += w[j] * s;
    }
    total * grid.cell_volume()
}

/// Scaling family `e^{aλ} φ(y, e^{−bλ} z)`; `lam` is the scaling parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleParams {
    pub a: f64,
    pub b: f64,
    pub lam: f64,
}

impl ScaleParams {
    pub fn new(a: f64, b: f64, lam: f64) -> Self {
        ScaleParams { a, b, lam }
    }
}

/// `a > 0, b ≤ 0, 2a + b(d−n) ≥ 0, σa + b > 0`.
pub fn admissible(params: &ModelParams, a: f64, b: f64) -> bool {
    let k = params.free_dims() as f64;
    a > 0.0 && b <= 0.0 && 2.0 * a + b * k >= 0.0 && params.sigma_f64() * a + b > 0.0
}

/// Resamples `u(y, s·z)` by evaluating the trigonometric interpolant off-grid.
fn dilate_z(f: &Field, s: f64) -> Field {
    let grid = f.grid().clone();
    let mut c = f.coefficients().into_owned();
    if s == 1.0 {
        return f.with_data(Representation::Coefficient, c);
    }
    let nz = grid.z_total();
    let mut line = Vec::new();
    for a in 0..grid.free_axes() {
        let ax = &grid.axes()[a];
        let n = ax.points;
        let stride = grid.stride(a);
        // basis[j*n + q]: mode q evaluated at s·z_j; the Nyquist mode uses its real part.
        // Points mapped outside the box read zero rather than a periodic image.
        let mut basis = vec![Complex64::new(0.0, 0.0); n * n];
        for j in 0..n {
            let x = s * ax.coords[j];
            if x < -0.5 * ax.length || x >= 0.5 * ax.length {
                continue;
            }
            for q in 0..n {
                basis[j * n + q] = if q == n / 2 {
                    Complex64::new((ax.wavenumbers[q] * x).cos(), 0.0)
                } else {
                    Complex64::from_polar(1.0, ax.wavenumbers[q] * x)
                };
            }
        }
        // Evaluate along axis a, then return to coefficients along the same axis.
        let sign: Vec<f64> = (0..n).map(|q| if q % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let mut planner = rustfft::FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        line.resize(n, Complex64::new(0.0, 0.0));
        let block = n * stride;
        for slab in c.chunks_exact_mut(nz) {
            for base in (0..nz).step_by(block) {
                for off in 0..stride {
                    for j in 0..n {
                        let row = &basis[j * n..(j + 1) * n];
                        let mut acc = Complex64::new(0.0, 0.0);
                        for q in 0..n {
                            acc += row[q] * slab[base + off + q * stride];
                        }
                        line[j] = acc;
                    }
                    fft.process(&mut line);
                    for q in 0..n {
                        slab[base + off + q * stride] = line[q] * (sign[q] / n as f64);
                    }
                }
            }
        }
    }
    f.with_data(Representation::Coefficient, c)
}

/// `e^{aλ} u(y, e^{−bλ} z)` on the same grid.
pub fn scale_ab(f: &Field, sp: ScaleParams) -> Field {
    let out = dilate_z(f, (-sp.b * sp.lam).exp()).scaled((sp.a * sp.lam).exp());
    warn_tail(&out);
    out
}

/// `r^{(d−n)/2} u(y, r z)`: mass-preserving dilation in `z`.
pub fn scale_r(f: &Field, r: f64) -> Field {
    let k = f.params().free_dims() as f64;
    let out = dilate_z(f, r).scaled(r.powf(0.5 * k));
    warn_tail(&out);
    out
}

/// The `r₀` with `P(scale_r(f, r₀)) = 0`: `(2/k) r² gradz_sq = σ/(σ+1) r^{σk} L2s2s2`.
pub fn virial_root(f: &Field) -> Result<f64> {
    let r = evaluate(f);
    let params = f.params();
    let k = params.free_dims() as f64;
    let sigma = params.sigma_f64();
    let e = sigma * k - 2.0;
    if r.gradz_sq <= 0.0 || r.l2s2s2 <= 0.0 {
        return Err(Error::ZeroField);
    }
    if e.abs() < 1e-14 {
        return Err(Error::InvalidParams("sigma (d-n) = 2: P scales uniformly under scale_r".into()));
    }
    Ok((2.0 / k * r.gradz_sq * (sigma + 1.0) / (sigma * r.l2s2s2)).powf(1.0 / e))
}

fn warn_tail(f: &Field) {
    let t = f.tail_fraction();
    if t > 1e-6 {
        log::warn!("dilation pushed tail fraction to {t:.3e}; the field is under-resolved");
    }
}

fn scale_denominator(params: &ModelParams, a: f64, b: f64) -> f64 {
    a * (2.0 * params.sigma_f64() + 2.0) + b * params.free_dims() as f64
}

/// `∂_λ S(φ_λ^{a,b})` at λ = 0, from the norm quintuple.
pub fn j_ab_report(params: &ModelParams, r: &FunctionalReport, a: f64, b: f64) -> f64 {
    let k = params.free_dims() as f64;
    let p = params.power();
    0.5 * (2.0 * a + b * k) * (r.grady_sq + r.ymom_sq + r.mass) + 0.5 * (2.0 * a + b * (k - 2.0)) * r.gradz_sq
        - scale_denominator(params, a, b) / p * r.l2s2s2
}

pub fn j_ab(f: &Field, a: f64, b: f64) -> f64 {
    j_ab_report(f.params(), &evaluate(f), a, b)
}

/// Coefficients `(α₁, α₂)` of `B^{a,b}`.
pub fn b_ab_coefficients(params: &ModelParams, a: f64, b: f64) -> Result<(f64, f64)> {
    let den = scale_denominator(params, a, b);
    if den.abs() < 1e-14 {
        return Err(Error::InvalidScalePair { a, b, reason: "a(2σ+2) + b(d−n) vanishes".into() });
    }
    let k = params.free_dims() as f64;
    let a1 = 0.5 * (1.0 - (2.0 * a + b * k) / den);
    let a2 = 0.5 * (1.0 - (2.0 * a + b * (k - 2.0)) / den);
    Ok((a1, a2))
}

pub fn b_ab_report(params: &ModelParams, r: &FunctionalReport, a: f64, b: f64) -> Result<f64> {
    let (a1, a2) = b_ab_coefficients(params, a, b)?;
    Ok(a1 * (r.grady_sq + r.ymom_sq + r.mass) + a2 * r.gradz_sq)
}

pub fn b_ab(f: &Field, a: f64, b: f64) -> Result<f64> {
    b_ab_report(f.params(), &evaluate(f), a, b)
}

/// Amplitude `t` with `I(t·u) = 0`, and the rescaled field.
pub fn nehari_scale(f: &Field) -> Result<(f64, Field)> {
    let r = evaluate(f);
    if r.l2s2s2 <= 0.0 {
        return Err(Error::ZeroField);
    }
    let t = (r.b1_sq / r.l2s2s2).powf(1.0 / (2.0 * f.params().sigma_f64()));
    Ok((t, f.scaled(t)))
}

/// Phase-boost `e^{i z·z₀} u` with `z₀ = −G/M`, removing the momentum.
pub fn galilean_boost(f: &Field) -> Result<(Vec<f64>, Field)> {
    let r = evaluate(f);
    if r.mass <= 0.0 {
        return Err(Error::ZeroField);
    }
    let mut total = vec![0.0; r.momentum.len()];
    let mut out = f.to_physical();
    let mut g = r.momentum;
    // The discrete momentum shift is exact only for grid wavenumbers, so repeat.
    for _ in 0..4 {
        if g.iter().all(|x| x.abs() <= 1e-13 * r.mass) {
            break;
        }
        let z0: Vec<f64> = g.iter().map(|x| -x / r.mass).collect();
        out = boost(&out, &z0);
        total.iter_mut().zip(&z0).for_each(|(t, z)| *t += z);
        g = momentum(&out);
    }
    Ok((total, out))
}

/// `e^{i z·v} u` applied in physical space.
pub fn boost(f: &Field, v: &[f64]) -> Field {
    let grid = f.grid().clone();
    let nz = grid.z_total();
    let vals = f.values();
    let phase: Vec<Complex64> = (0..nz)
        .map(|zi| {
            let s: f64 = v.iter().enumerate().map(|(a, va)| va * grid.z_coord(zi, a)).sum();
            Complex64::from_polar(1.0, s)
        })
        .collect();
    let data = vals.iter().enumerate().map(|(i, u)| u * phase[i % nz]).collect();
    f.with_data(Representation::Physical, data)
}

/// `G(u) = Im ∫ ū ∇_z u`.
pub fn momentum(f: &Field) -> Vec<f64> {
    let grid = f.grid();
    let c = f.coefficients();
    let nz = grid.z_total();
    let mut g = vec![0.0; grid.free_axes()];
    for (i, x) in c.iter().enumerate() {
        let zi = i % nz;
        for (a, ga) in g.iter_mut().enumerate() {
            *ga += grid.axes()[a].deriv_wavenumbers[grid.z_index(zi, a)] * x.norm_sqr();
        }
    }
    g.iter().map(|x| x * grid.box_volume()).collect()
}
