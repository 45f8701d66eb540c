//! Seeded test states: random band-limited fields and Gaussians, with amplitude
//! selection against the action threshold.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::evaluate;
use crate::lattice::{Field, Grid, Representation};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomFieldSpec {
    /// Random content in Hermite modes below this.
    pub hermite_modes: usize,
    /// Random content in Fourier modes with `|k| ≤ k_max`.
    pub k_max: f64,
    /// Width of the z-Gaussian envelope applied in physical space.
    pub envelope_width: f64,
    /// Overall amplitude before any rescaling.
    pub amplitude: f64,
}

impl Default for RandomFieldSpec {
    fn default() -> Self {
        RandomFieldSpec { hermite_modes: 6, k_max: 1.5, envelope_width: 2.5, amplitude: 1.0 }
    }
}

/// A reproducible random field: random low-mode coefficients, localized by a z-Gaussian
/// envelope, then band-limited by zeroing the spectral tail.
pub fn random_field(params: ModelParams, grid: Arc<Grid>, seed: u64, spec: &RandomFieldSpec) -> Result<Field> {
    if spec.hermite_modes == 0 || spec.k_max < 0.0 || spec.envelope_width <= 0.0 {
        return Err(Error::InvalidParams(format!("bad random field spec {spec:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nz = grid.z_total();
    let mut c = vec![Complex64::new(0.0, 0.0); grid.len()];
    for m in 0..spec.hermite_modes.min(grid.modes()) {
        for zi in 0..nz {
            let k2: f64 = (0..grid.free_axes())
                .map(|a| grid.axes()[a].wavenumbers[grid.z_index(zi, a)].powi(2))
                .sum();
            if k2 > spec.k_max * spec.k_max {
                continue;
            }
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            c[m * nz + zi] = Complex64::new(re, im);
        }
    }
    let w2 = spec.envelope_width * spec.envelope_width;
    let raw = Field::new(params, grid.clone(), Representation::Coefficient, c)?.into_physical();
    let env: Vec<f64> = (0..nz).map(|zi| (-grid.z_radius_sq(zi) / (2.0 * w2)).exp()).collect();
    let data: Vec<Complex64> = raw.data().iter().enumerate().map(|(i, v)| v * env[i % nz]).collect();
    let mut f = Field::new(params, grid.clone(), Representation::Physical, data)?.into_coefficients();
    for (i, v) in f.data_mut().iter_mut().enumerate() {
        if grid.is_tail(i / nz, i % nz) {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    let norm = f.norm_sq().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(f.scaled(spec.amplitude / norm))
}

/// `amp · exp(−y²/(2w_y²) − |z − z₀|²/(2w_z²)) · e^{i v·z}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub amplitude: f64,
    pub width_y: f64,
    pub width_z: f64,
    pub offset_z: Vec<f64>,
    pub phase_velocity: Vec<f64>,
}

impl GaussianSpec {
    pub fn unit(k: usize) -> Self {
        GaussianSpec { amplitude: 1.0, width_y: 1.0, width_z: 1.0, offset_z: vec![0.0; k], phase_velocity: vec![0.0; k] }
    }
}

pub fn gaussian(params: ModelParams, grid: Arc<Grid>, spec: &GaussianSpec) -> Result<Field> {
    let k = grid.free_axes();
    if spec.offset_z.len() != k || spec.phase_velocity.len() != k {
        return Err(Error::InvalidParams(format!("offset and phase velocity need {k} components")));
    }
    if spec.width_y <= 0.0 || spec.width_z <= 0.0 {
        return Err(Error::InvalidParams("Gaussian widths must be positive".into()));
    }
    Field::from_fn(params, grid, |y, z| {
        let mut r2 = 0.0;
        let mut phase = 0.0;
        for a in 0..k {
            r2 += (z[a] - spec.offset_z[a]).powi(2);
            phase += spec.phase_velocity[a] * z[a];
        }
        let env = spec.amplitude * (-(y * y) / (2.0 * spec.width_y.powi(2)) - r2 / (2.0 * spec.width_z.powi(2))).exp();
        Complex64::from_polar(env, phase)
    })
}

/// The action along the amplitude ray `c ↦ S(c f)` in closed form (focusing case).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionRay {
    pub b1_sq: f64,
    pub l2s2s2: f64,
    pub sigma: f64,
}

impl ActionRay {
    pub fn new(f: &Field) -> Result<Self> {
        f.params().require_focusing()?;
        let r = evaluate(f);
        if r.l2s2s2 <= 0.0 {
            return Err(Error::ZeroField);
        }
        Ok(ActionRay { b1_sq: r.b1_sq, l2s2s2: r.l2s2s2, sigma: f.params().sigma_f64() })
    }

    pub fn action(&self, c: f64) -> f64 {
        let p = 2.0 * self.sigma + 2.0;
        0.5 * c * c * self.b1_sq - c.powf(p) * self.l2s2s2 / p
    }

    /// Amplitude where the ray crosses the Nehari manifold; the action peaks there.
    pub fn nehari(&self) -> f64 {
        (self.b1_sq / self.l2s2s2).powf(1.0 / (2.0 * self.sigma))
    }

    /// The two amplitudes where `S(c f) = level`, below and above the peak, or `None` when
    /// the peak lies below `level`.
    pub fn crossings(&self, level: f64) -> Option<(f64, f64)> {
        let t = self.nehari();
        if self.action(t) <= level {
            return None;
        }
        let bisect = |mut lo: f64, mut hi: f64, rising: bool| {
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if (self.action(mid) < level) == rising {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let mut hi = 2.0 * t;
        while self.action(hi) >= level {
            hi *= 2.0;
        }
        Some((bisect(0.0, t, true), bisect(t, hi, false)))
    }
}

/// Rescales `f` into `K⁺`: amplitude `frac` times the lower crossing of `S = β`
/// (or of the Nehari amplitude when the whole ray stays below `β`). `0 < frac < 1`.
pub fn scale_into_k_plus(f: &Field, beta: f64, frac: f64) -> Result<Field> {
    if !(0.0 < frac && frac < 1.0) {
        return Err(Error::InvalidParams(format!("frac must lie in (0, 1), got {frac}")));
    }
    let ray = ActionRay::new(f)?;
    let c = ray.crossings(beta).map_or(ray.nehari(), |(lo, _)| lo);
    Ok(f.scaled(frac * c))
}

/// Rescales `f` into `K⁻`: amplitude `(1 + excess)` times the upper crossing of `S = β`.
pub fn scale_into_k_minus(f: &Field, beta: f64, excess: f64) -> Result<Field> {
    if excess <= 0.0 {
        return Err(Error::InvalidParams(format!("excess must be positive, got {excess}")));
    }
    let ray = ActionRay::new(f)?;
    let (_, hi) = ray
        .crossings(beta)
        .ok_or_else(|| Error::InvalidParams("action never reaches beta along this ray".into()))?;
    Ok(f.scaled((1.0 + excess) * hi))
}
