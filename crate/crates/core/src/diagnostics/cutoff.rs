use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutoffKind {
    /// Radial step from 0 (inside `R/2`) to 1 (outside `R`).
    MassCutoff,
    /// Radial `r²` inside `R`, flattened to a constant beyond `2R`.
    QuadraticVirial,
    /// Componentwise `R θ(z_j / R)` with `θ(s) = s` on `[−1, 1]`.
    CenterOfMass,
}

/// Quintic smoothstep `10x³ − 15x⁴ + 6x⁵` and derivatives 0..=4, clamped outside `[0, 1]`.
fn smoothstep(x: f64) -> [f64; 5] {
    if x <= 0.0 {
        return [0.0; 5];
    }
    if x >= 1.0 {
        return [1.0, 0.0, 0.0, 0.0, 0.0];
    }
    let x2 = x * x;
    [
        x2 * x * (10.0 - 15.0 * x + 6.0 * x2),
        30.0 * x2 * (1.0 - x) * (1.0 - x),
        60.0 * x - 180.0 * x2 + 120.0 * x2 * x,
        60.0 - 360.0 * x + 360.0 * x2,
        -360.0 + 720.0 * x,
    ]
}

/// `∫₀ˣ S₅`.
fn smoothstep_integral(x: f64) -> f64 {
    let x4 = x.powi(4);
    x4 * (2.5 - 3.0 * x + x * x)
}

/// Polynomial in ascending coefficients.
fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn poly_deriv(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, &a)| k as f64 * a).collect()
}

fn poly_integral(c: &[f64], constant: f64) -> Vec<f64> {
    std::iter::once(constant).chain(c.iter().enumerate().map(|(k, &a)| a / (k + 1) as f64)).collect()
}

/// Bridge `g(u)` on `u ∈ [0, 1]` with `g″ = 2(1 − S₅(u)) − 420u³(1−u)³`, `g(0) = 1`, `g′(0) = 2`.
/// Its derivatives 0..=4 are returned as polynomials.
fn bridge_polys() -> [Vec<f64>; 5] {
    let g2 = vec![2.0, 0.0, 0.0, -440.0, 1290.0, -1272.0, 420.0];
    let g1 = poly_integral(&g2, 2.0);
    let g0 = poly_integral(&g1, 1.0);
    let g3 = poly_deriv(&g2);
    let g4 = poly_deriv(&g3);
    [g0, g1, g2, g3, g4]
}

/// Centre-of-mass profile `θ` and `θ′`. `θ` is odd, `θ(s) = s` on `[−1, 1]`, it vanishes
/// for `|s| ≥ 2^{1/3}`, and `θ′` ramps `1 → −4 → 0` with quintic smoothsteps of width `ε`.
pub fn theta(s: f64) -> (f64, f64) {
    let len = 2f64.cbrt() - 1.0;
    let eps = (4.0 * len - 1.0) / 4.5;
    let a = s.abs();
    let sgn = s.signum();
    let (v, d) = if a <= 1.0 {
        (a, 1.0)
    } else if a <= 1.0 + eps {
        let x = (a - 1.0) / eps;
        (a - 5.0 * eps * smoothstep_integral(x), 1.0 - 5.0 * smoothstep(x)[0])
    } else if a <= 1.0 + len - eps {
        (1.0 - 1.5 * eps - 4.0 * (a - 1.0 - eps), -4.0)
    } else if a < 1.0 + len {
        let x = (a - (1.0 + len - eps)) / eps;
        let base = 1.0 - 1.5 * eps - 4.0 * (len - 2.0 * eps);
        (base - 4.0 * eps * x + 4.0 * eps * smoothstep_integral(x), -4.0 + 4.0 * smoothstep(x)[0])
    } else {
        (0.0, 0.0)
    };
    (sgn * v, d)
}

/// A cutoff sampled on the z-grid of one [`Grid`].
#[derive(Debug, Clone)]
pub struct CutoffProfile {
    kind: CutoffKind,
    radius: f64,
    dims: usize,
    /// `φ` per z-point (radial kinds).
    pub phi: Vec<f64>,
    /// `φ′(r)/r`, so that `∇φ = (φ′/r) z`.
    pub dphi_over_r: Vec<f64>,
    /// `(φ″ − φ′/r)/r²`, so that `∇²φ = (φ′/r) I + this · z zᵀ`.
    pub hess_radial: Vec<f64>,
    pub laplacian: Vec<f64>,
    pub bilaplacian: Vec<f64>,
    /// `R θ(z_j/R)` per axis (centre-of-mass kind).
    pub component: Vec<Vec<f64>>,
    /// `θ′(z_j/R)` per axis (centre-of-mass kind).
    pub component_rate: Vec<Vec<f64>>,
    fourth_bound: f64,
}

/// Radial derivatives `φ, φ′, …, φ⁗` at radius `r`.
fn radial(kind: CutoffKind, radius: f64, r: f64, bridge: &[Vec<f64>; 5]) -> [f64; 5] {
    match kind {
        CutoffKind::MassCutoff => {
            let h = radius / 2.0;
            let s = smoothstep((r - h) / h);
            [s[0], s[1] / h, s[2] / (h * h), s[3] / h.powi(3), s[4] / h.powi(4)]
        }
        CutoffKind::QuadraticVirial => {
            let u = (r - radius) / radius;
            if u <= 0.0 {
                [r * r, 2.0 * r, 2.0, 0.0, 0.0]
            } else {
                let u = u.min(1.0);
                let mut out = [0.0; 5];
                for (k, o) in out.iter_mut().enumerate() {
                    *o = radius.powi(2 - k as i32) * poly_eval(&bridge[k], u);
                }
                out
            }
        }
        CutoffKind::CenterOfMass => unreachable!("not radial"),
    }
}

impl CutoffProfile {
    /// Builds the profile and verifies its design constraints.
    pub fn new(kind: CutoffKind, radius: f64, grid: &Grid) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParams(format!("cutoff radius must be positive, got {radius}")));
        }
        let dz = grid.axes().iter().map(|a| a.dz).fold(0.0, f64::max);
        let transition = match kind {
            CutoffKind::MassCutoff => radius / 2.0,
            CutoffKind::QuadraticVirial => radius,
            CutoffKind::CenterOfMass => (2f64.cbrt() - 1.0) * radius,
        };
        if transition < 4.0 * dz {
            return Err(Error::InvalidParams(format!(
                "cutoff radius {radius} is too small for grid spacing {dz}"
            )));
        }
        let bridge = bridge_polys();
        let fourth_bound = check_constraints(kind, radius, &bridge)?;
        let dims = grid.free_axes();
        let nz = grid.z_total();
        let mut p = CutoffProfile {
            kind,
            radius,
            dims,
            phi: Vec::new(),
            dphi_over_r: Vec::new(),
            hess_radial: Vec::new(),
            laplacian: Vec::new(),
            bilaplacian: Vec::new(),
            component: Vec::new(),
            component_rate: Vec::new(),
            fourth_bound,
        };
        if kind == CutoffKind::CenterOfMass {
            for a in 0..dims {
                let (c, r): (Vec<f64>, Vec<f64>) = (0..nz)
                    .map(|zi| {
                        let (t, dt) = theta(grid.z_coord(zi, a) / radius);
                        (radius * t, dt)
                    })
                    .unzip();
                p.component.push(c);
                p.component_rate.push(r);
            }
            return Ok(p);
        }
        let k = dims as f64;
        for zi in 0..nz {
            let r = grid.z_radius_sq(zi).sqrt();
            let [f0, f1, f2, f3, f4] = radial(kind, radius, r, &bridge);
            let inner = match kind {
                CutoffKind::MassCutoff => r <= radius / 2.0,
                _ => r <= radius,
            };
            let (dr, hr, lap, bilap) = if inner {
                match kind {
                    CutoffKind::MassCutoff => (0.0, 0.0, 0.0, 0.0),
                    _ => (2.0, 0.0, 2.0 * k, 0.0),
                }
            } else {
                let a = f1 / r;
                let b = (f2 - a) / (r * r);
                let bilap = f4 + 2.0 * (k - 1.0) * f3 / r + (k - 1.0) * (k - 3.0) * b;
                (a, b, f2 + (k - 1.0) * a, bilap)
            };
            p.phi.push(if inner && kind == CutoffKind::QuadraticVirial { r * r } else { f0 });
            p.dphi_over_r.push(dr);
            p.hess_radial.push(hr);
            p.laplacian.push(lap);
            p.bilaplacian.push(bilap);
        }
        Ok(p)
    }

    pub fn kind(&self) -> CutoffKind {
        self.kind
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// `sup |φ⁽⁴⁾|` of the constructed profile (QuadraticVirial), or `sup |φ′|` (MassCutoff),
    /// or `sup |θ′|` (CenterOfMass).
    pub fn derivative_bound(&self) -> f64 {
        self.fourth_bound
    }
}

/// Samples the 1D profile densely, checks every constraint, and returns the measured
/// derivative bound.
fn check_constraints(kind: CutoffKind, radius: f64, bridge: &[Vec<f64>; 5]) -> Result<f64> {
    const SAMPLES: usize = 20_000;
    const TOL: f64 = 1e-12;
    let fail = |what: &str, r: f64| {
        Err(Error::InvalidParams(format!("{kind:?} cutoff violates {what} at r = {r}")))
    };
    let mut bound: f64 = 0.0;
    for i in 0..=SAMPLES {
        let r = 3.0 * radius * i as f64 / SAMPLES as f64;
        match kind {
            CutoffKind::MassCutoff => {
                let [f, f1, ..] = radial(kind, radius, r, bridge);
                if r <= radius / 2.0 && f != 0.0 {
                    return fail("phi = 0 inside R/2", r);
                }
                if r >= radius && f != 1.0 {
                    return fail("phi = 1 outside R", r);
                }
                if !(-TOL..=1.0 + TOL).contains(&f) {
                    return fail("0 <= phi <= 1", r);
                }
                if f1 < -TOL || f1 > 4.0 / radius + TOL {
                    return fail("0 <= phi' <= 4/R", r);
                }
                bound = bound.max(f1.abs());
            }
            CutoffKind::QuadraticVirial => {
                let [f, f1, f2, _, f4] = radial(kind, radius, r, bridge);
                let scale = (r * r).max(radius * radius);
                if r <= radius && (f - r * r).abs() > TOL * scale {
                    return fail("phi = r^2 inside R", r);
                }
                if f < -TOL * scale || f > r * r + TOL * scale {
                    return fail("0 <= phi <= r^2", r);
                }
                if f2 > 2.0 + TOL {
                    return fail("phi'' <= 2", r);
                }
                if f1 > 2.0 * r + TOL * radius || f1 < -TOL * radius {
                    return fail("0 <= phi' <= 2r", r);
                }
                bound = bound.max(f4.abs());
            }
            CutoffKind::CenterOfMass => {
                let s = r / radius;
                for s in [s, -s] {
                    let (t, dt) = theta(s);
                    if s.abs() <= 1.0 && (t - s).abs() > TOL {
                        return fail("theta(s) = s on [-1, 1]", s);
                    }
                    if s.abs() >= 2f64.cbrt() && t != 0.0 {
                        return fail("theta = 0 beyond 2^(1/3)", s);
                    }
                    if t.abs() > s.abs() + TOL || t.abs() > 2.0 || dt.abs() > 4.0 + TOL {
                        return fail("|theta| <= |s|, |theta| <= 2, |theta'| <= 4", s);
                    }
                    bound = bound.max(dt.abs());
                }
            }
        }
    }
    Ok(bound)
}
