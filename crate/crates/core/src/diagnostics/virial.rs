use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::cutoff::{CutoffKind, CutoffProfile};
use crate::error::{Error, Result};
use crate::functionals::{evaluate, pow_sigma};
use crate::lattice::{Field, Grid};

/// Physical values, physical z-gradients and quadrature weights of one field.
struct Samples {
    u: Vec<Complex64>,
    grad: Vec<Vec<Complex64>>,
    weight: Vec<f64>,
}

impl Samples {
    fn new(f: &Field) -> Self {
        let grid = f.grid();
        let u = f.values().into_owned();
        let grad = f.gradient_z().into_iter().map(|g| g.into_physical().into_data()).collect();
        Samples { u, grad, weight: weights(grid) }
    }
}

fn weights(grid: &Grid) -> Vec<f64> {
    let nz = grid.z_total();
    (0..grid.len()).map(|i| grid.weight(i / nz)).collect()
}

fn check_grid(f: &Field, cutoff: &CutoffProfile) -> Result<()> {
    let len = if cutoff.kind() == CutoffKind::CenterOfMass {
        cutoff.component.first().map_or(0, Vec::len)
    } else {
        cutoff.phi.len()
    };
    if len != f.grid().z_total() || cutoff.dims() != f.grid().free_axes() {
        return Err(Error::Mismatch("cutoff was built for a different grid".into()));
    }
    Ok(())
}

/// Localized virial quantities for one state, in both groupings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VirialTerms {
    /// `∫ φ |u|²`.
    pub v: f64,
    /// `2 Im ∫ ū ∇φ·∇u`.
    pub v_prime: f64,
    /// Direct form: Hessian, Laplacian and bi-Laplacian integrals.
    pub v_second: f64,
    /// `4(d−n) P(u) + R₁ + R₂ + R₃`.
    pub v_second_decomposed: f64,
    /// `4(d−n) P(u)`.
    pub p_term: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

/// `∫ φ |u|²` for a radial cutoff.
pub fn localized_mass(f: &Field, cutoff: &CutoffProfile) -> Result<f64> {
    if cutoff.kind() == CutoffKind::CenterOfMass {
        return Err(Error::InvalidParams("localized mass needs a radial cutoff".into()));
    }
    check_grid(f, cutoff)?;
    let nz = f.grid().z_total();
    let w = weights(f.grid());
    Ok(f.values().iter().enumerate().map(|(i, u)| w[i] * cutoff.phi[i % nz] * u.norm_sqr()).sum())
}

/// `V, V′, V″` for the quadratic virial cutoff, plus the remainder decomposition.
pub fn virial_series(f: &Field, cutoff: &CutoffProfile) -> Result<VirialTerms> {
    if cutoff.kind() != CutoffKind::QuadraticVirial {
        return Err(Error::InvalidParams("virial series needs a QuadraticVirial cutoff".into()));
    }
    check_grid(f, cutoff)?;
    let grid = f.grid();
    let params = f.params();
    let nz = grid.z_total();
    let k = grid.free_axes();
    let kf = k as f64;
    let sigma = params.sigma_f64();
    let nl = 2.0 * sigma / (sigma + 1.0);
    let s = Samples::new(f);
    let coords: Vec<Vec<f64>> = (0..k).map(|a| (0..nz).map(|zi| grid.z_coord(zi, a)).collect()).collect();

    let (mut v, mut vp, mut hess, mut lap, mut bilap) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut r1, mut r2) = (0.0, 0.0);
    for (i, &u) in s.u.iter().enumerate() {
        let zi = i % nz;
        let w = s.weight[i];
        let mass = u.norm_sqr();
        let pot = mass * pow_sigma(mass, params);
        let mut grad_sq = 0.0;
        let mut radial = Complex64::new(0.0, 0.0);
        for a in 0..k {
            let g = s.grad[a][i];
            grad_sq += g.norm_sqr();
            radial += g * coords[a][zi];
        }
        let a_coef = cutoff.dphi_over_r[zi];
        let b_coef = cutoff.hess_radial[zi];
        v += w * cutoff.phi[zi] * mass;
        vp += w * a_coef * (u.conj() * radial).im;
        hess += w * (a_coef * grad_sq + b_coef * radial.norm_sqr());
        lap += w * cutoff.laplacian[zi] * pot;
        bilap += w * cutoff.bilaplacian[zi] * mass;
        r1 += w * ((a_coef - 2.0) * grad_sq + b_coef * radial.norm_sqr());
        r2 += w * (cutoff.laplacian[zi] - 2.0 * kf) * pot;
    }
    let p_term = 4.0 * kf * evaluate(f).virial;
    let r1 = 4.0 * r1;
    let r2 = -nl * r2;
    let r3 = -bilap;
    Ok(VirialTerms {
        v,
        v_prime: 2.0 * vp,
        v_second: 4.0 * hess - nl * lap - bilap,
        v_second_decomposed: p_term + r1 + r2 + r3,
        p_term,
        r1,
        r2,
        r3,
    })
}

/// `∫_{|z| ≥ R} |u|²`.
pub fn mass_outside(f: &Field, radius: f64) -> f64 {
    let grid = f.grid();
    let nz = grid.z_total();
    let w = weights(grid);
    let r2 = radius * radius;
    f.values()
        .iter()
        .enumerate()
        .filter(|(i, _)| grid.z_radius_sq(i % nz) >= r2)
        .map(|(i, u)| w[i] * u.norm_sqr())
        .sum()
}

/// Outcome of the mass-leakage check along a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageReport {
    pub radius: f64,
    pub k0: f64,
    /// `4‖u₀‖k₀/R`.
    pub displayed_slope: f64,
    /// `2 sup|φ′| ‖u₀‖ k₀`, the slope implied by `|V′| ≤ 2‖∇φ‖∞‖u‖‖∇u‖`.
    pub rigorous_slope: f64,
    /// `V(t) ≤ V(0) + t · displayed_slope` at every sample.
    pub holds: bool,
    pub rigorous_holds: bool,
    /// Smallest `V(0) + t·slope − V(t)` over samples, for the displayed slope.
    pub min_margin: f64,
    /// Samples where `∫_{|z|≥R}|u|² > V(t)`; always empty for a valid cutoff.
    pub exterior_violations: usize,
}

/// Checks `V(t) ≤ V(0) + t·4‖u₀‖k₀/R` for the mass cutoff, given `V(t)` and
/// `∫_{|z|≥R}|u(t)|²` at each sample time.
pub fn leakage_check(
    times: &[f64],
    localized: &[f64],
    exterior: &[f64],
    mass0: f64,
    k0: f64,
    cutoff: &CutoffProfile,
) -> Result<LeakageReport> {
    if cutoff.kind() != CutoffKind::MassCutoff {
        return Err(Error::InvalidParams("leakage check needs a MassCutoff profile".into()));
    }
    if times.len() != localized.len() || times.len() != exterior.len() || times.is_empty() {
        return Err(Error::InvalidParams("leakage series lengths differ or are empty".into()));
    }
    let radius = cutoff.radius();
    let norm0 = mass0.sqrt();
    let displayed_slope = 4.0 * norm0 * k0 / radius;
    let rigorous_slope = 2.0 * cutoff.derivative_bound() * norm0 * k0;
    let v0 = localized[0];
    let t0 = times[0];
    let tol = 1e-12 * mass0.max(1e-300);
    let mut min_margin = f64::INFINITY;
    let mut rigorous_holds = true;
    let mut exterior_violations = 0;
    for ((&t, &v), &e) in times.iter().zip(localized).zip(exterior) {
        let dt = (t - t0).abs();
        min_margin = min_margin.min(v0 + dt * displayed_slope - v);
        rigorous_holds &= v <= v0 + dt * rigorous_slope + tol;
        if e > v + tol {
            exterior_violations += 1;
        }
    }
    Ok(LeakageReport {
        radius,
        k0,
        displayed_slope,
        rigorous_slope,
        holds: min_margin >= -tol,
        rigorous_holds,
        min_margin,
        exterior_violations,
    })
}

/// Localized centre of mass and its rate for one state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterOfMass {
    /// `Γ_R = ∫ R θ(z/R) |u|²`, per axis.
    pub gamma: Vec<f64>,
    /// `Γ′_R = 2 Im ∫ θ′(z_j/R) ū ∂_j u`, per axis.
    pub rate: Vec<f64>,
    /// `10 ∫_{|z|≥R} |∇u||u|`.
    pub product_bound: f64,
    /// `5 ∫_{|z|≥R} (|∇u|² + |u|²)`.
    pub quadratic_bound: f64,
}

pub fn center_of_mass(f: &Field, cutoff: &CutoffProfile) -> Result<CenterOfMass> {
    if cutoff.kind() != CutoffKind::CenterOfMass {
        return Err(Error::InvalidParams("centre of mass needs a CenterOfMass cutoff".into()));
    }
    check_grid(f, cutoff)?;
    let grid = f.grid();
    let nz = grid.z_total();
    let k = grid.free_axes();
    let r2 = cutoff.radius() * cutoff.radius();
    let s = Samples::new(f);
    let mut gamma = vec![0.0; k];
    let mut rate = vec![0.0; k];
    let (mut prod, mut quad) = (0.0, 0.0);
    for (i, &u) in s.u.iter().enumerate() {
        let zi = i % nz;
        let w = s.weight[i];
        let mass = u.norm_sqr();
        let mut grad_sq = 0.0;
        for a in 0..k {
            let g = s.grad[a][i];
            grad_sq += g.norm_sqr();
            gamma[a] += w * cutoff.component[a][zi] * mass;
            rate[a] += w * cutoff.component_rate[a][zi] * (u.conj() * g).im;
        }
        if grid.z_radius_sq(zi) >= r2 {
            prod += w * grad_sq.sqrt() * mass.sqrt();
            quad += w * (grad_sq + mass);
        }
    }
    rate.iter_mut().for_each(|r| *r *= 2.0);
    Ok(CenterOfMass { gamma, rate, product_bound: 10.0 * prod, quadratic_bound: 5.0 * quad })
}
