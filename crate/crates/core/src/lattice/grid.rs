use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::hermite::HermiteBasis;
use crate::error::{Error, Result};

/// Sizes that define a grid; two grids with equal specs are interchangeable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub hermite_modes: usize,
    pub z_points: Vec<usize>,
    pub z_length: Vec<f64>,
}

impl GridSpec {
    pub fn new(hermite_modes: usize, z_points: Vec<usize>, z_length: Vec<f64>) -> Self {
        GridSpec { hermite_modes, z_points, z_length }
    }

    /// Same number of free axes with every size doubled.
    pub fn refined(&self) -> Self {
        GridSpec {
            hermite_modes: 2 * self.hermite_modes,
            z_points: self.z_points.iter().map(|n| 2 * n).collect(),
            z_length: self.z_length.clone(),
        }
    }
}

/// One periodic free axis on `[-L/2, L/2)`.
#[derive(Debug, Clone)]
pub struct ZAxis {
    pub points: usize,
    pub length: f64,
    pub dz: f64,
    pub coords: Vec<f64>,
    /// `2πq/L` in FFT order, the Nyquist entry negative.
    pub wavenumbers: Vec<f64>,
    /// Wavenumbers for odd derivatives: the Nyquist entry is zeroed.
    pub deriv_wavenumbers: Vec<f64>,
    /// `(-1)^q`, the phase between the centered grid and FFT indexing.
    sign: Vec<f64>,
    /// Whether mode `q` belongs to the top tenth of `|q|`.
    tail: Vec<bool>,
}

impl ZAxis {
    fn new(points: usize, length: f64) -> Result<Self> {
        if points < 2 || !points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("z_points must be a power of two, got {points}")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("z_length must be positive, got {length}")));
        }
        let dz = length / points as f64;
        let coords = (0..points).map(|j| -0.5 * length + j as f64 * dz).collect();
        let half = points / 2;
        let signed = |q: usize| if q < half { q as i64 } else { q as i64 - points as i64 };
        let k0 = 2.0 * std::f64::consts::PI / length;
        let wavenumbers: Vec<f64> = (0..points).map(|q| k0 * signed(q) as f64).collect();
        let deriv_wavenumbers = (0..points).map(|q| if q == half { 0.0 } else { wavenumbers[q] }).collect();
        let sign = (0..points).map(|q| if q % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let band = (half as f64 * 0.1).ceil().max(1.0) as i64;
        let tail = (0..points).map(|q| signed(q).abs() > half as i64 - band).collect();
        Ok(ZAxis { points, length, dz, coords, wavenumbers, deriv_wavenumbers, sign, tail })
    }
}

/// Hermite (y) × Fourier (z₁…z_k) tensor grid. Memory order: y slowest, the
/// last z axis fastest.
pub struct Grid {
    spec: GridSpec,
    hermite: HermiteBasis,
    axes: Vec<ZAxis>,
    strides: Vec<usize>,
    z_total: usize,
    ffts: Vec<(Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>,
    ksq: Vec<f64>,
    z_tail: Vec<bool>,
    hermite_tail_from: usize,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("spec", &self.spec).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        if spec.z_points.is_empty() || spec.z_points.len() != spec.z_length.len() {
            return Err(Error::InvalidGrid("z_points and z_length must be non-empty and of equal length".into()));
        }
        let hermite = HermiteBasis::new(spec.hermite_modes)?;
        let axes = spec
            .z_points
            .iter()
            .zip(&spec.z_length)
            .map(|(&n, &l)| ZAxis::new(n, l))
            .collect::<Result<Vec<_>>>()?;
        let mut strides = vec![1usize; axes.len()];
        for a in (0..axes.len().saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * axes[a + 1].points;
        }
        let z_total: usize = axes.iter().map(|a| a.points).product();
        let mut planner = FftPlanner::new();
        let ffts = axes
            .iter()
            .map(|a| (planner.plan_fft_forward(a.points), planner.plan_fft_inverse(a.points)))
            .collect();
        let mut ksq = vec![0.0; z_total];
        let mut z_tail = vec![false; z_total];
        for (idx, (k2, t)) in ksq.iter_mut().zip(z_tail.iter_mut()).enumerate() {
            for (a, ax) in axes.iter().enumerate() {
                let q = (idx / strides[a]) % ax.points;
                *k2 += ax.wavenumbers[q] * ax.wavenumbers[q];
                *t |= ax.tail[q];
            }
        }
        let m = spec.hermite_modes;
        let hermite_tail_from = m - ((m as f64) * 0.1).ceil() as usize;
        Ok(Grid { spec, hermite, axes, strides, z_total, ffts, ksq, z_tail, hermite_tail_from })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn hermite(&self) -> &HermiteBasis {
        &self.hermite
    }

    pub fn modes(&self) -> usize {
        self.hermite.modes()
    }

    pub fn axes(&self) -> &[ZAxis] {
        &self.axes
    }

    pub fn free_axes(&self) -> usize {
        self.axes.len()
    }

    /// Stride of z axis `a` inside one y-slab.
    pub fn stride(&self, a: usize) -> usize {
        self.strides[a]
    }

    pub fn z_total(&self) -> usize {
        self.z_total
    }

    pub fn len(&self) -> usize {
        self.modes() * self.z_total
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `Π dz`.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.dz).product()
    }

    /// `Π L`, the Parseval factor of the coefficient representation.
    pub fn box_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.length).product()
    }

    /// `|ζ|²` for each z index of a coefficient slab.
    pub fn ksq(&self) -> &[f64] {
        &self.ksq
    }

    /// Index of the z mode along axis `a` for flat z index `zi`.
    pub fn z_index(&self, zi: usize, a: usize) -> usize {
        (zi / self.strides[a]) % self.axes[a].points
    }

    /// Coordinate of flat z index `zi` along axis `a`.
    pub fn z_coord(&self, zi: usize, a: usize) -> f64 {
        self.axes[a].coords[self.z_index(zi, a)]
    }

    /// `|z|²` at flat z index `zi`.
    pub fn z_radius_sq(&self, zi: usize) -> f64 {
        (0..self.axes.len()).map(|a| self.z_coord(zi, a).powi(2)).sum()
    }

    /// Quadrature weight of physical point `(j, zi)`.
    pub fn weight(&self, j: usize) -> f64 {
        self.hermite.weights()[j] * self.cell_volume()
    }

    /// Eigenvalue of `H` on coefficient `(m, zi)`.
    pub fn h_eigen(&self, m: usize, zi: usize) -> f64 {
        (2 * m + 1) as f64 + self.ksq[zi]
    }

    pub(crate) fn is_tail(&self, m: usize, zi: usize) -> bool {
        m >= self.hermite_tail_from || self.z_tail[zi]
    }

    /// Physical values → coefficients, in place.
    pub fn forward(&self, data: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        assert_eq!(data.len(), self.len());
        for a in 0..self.axes.len() {
            self.fft_axis(data, a, true);
        }
        self.hermite_apply(self.hermite.forward_matrix(), data, scratch);
    }

    /// Coefficients → physical values, in place.
    pub fn inverse(&self, data: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        assert_eq!(data.len(), self.len());
        self.hermite_apply(self.hermite.inverse_matrix(), data, scratch);
        for a in 0..self.axes.len() {
            self.fft_axis(data, a, false);
        }
    }

    fn hermite_apply(&self, matrix: &[f64], data: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        let m = self.modes();
        let cols = 2 * self.z_total;
        scratch.clear();
        scratch.resize(data.len(), Complex64::new(0.0, 0.0));
        // Complex64 is two contiguous f64, so the slab is an m × 2·z_total real matrix.
        unsafe {
            matrixmultiply::dgemm(
                m,
                m,
                cols,
                1.0,
                matrix.as_ptr(),
                m as isize,
                1,
                data.as_ptr() as *const f64,
                cols as isize,
                1,
                0.0,
                scratch.as_mut_ptr() as *mut f64,
                cols as isize,
                1,
            );
        }
        data.copy_from_slice(scratch);
    }

    fn fft_axis(&self, data: &mut [Complex64], a: usize, forward: bool) {
        let ax = &self.axes[a];
        let n = ax.points;
        let stride = self.strides[a];
        let fft = if forward { &self.ffts[a].0 } else { &self.ffts[a].1 };
        let mut fft_scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        let inv_n = 1.0 / n as f64;
        if stride == 1 {
            if !forward {
                for line in data.chunks_exact_mut(n) {
                    for (v, s) in line.iter_mut().zip(&ax.sign) {
                        *v *= *s;
                    }
                }
            }
            fft.process_with_scratch(data, &mut fft_scratch);
            if forward {
                for line in data.chunks_exact_mut(n) {
                    for (v, s) in line.iter_mut().zip(&ax.sign) {
                        *v *= *s * inv_n;
                    }
                }
            }
            return;
        }
        let block = n * stride;
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for base in (0..data.len()).step_by(block) {
            for off in 0..stride {
                for q in 0..n {
                    let v = data[base + off + q * stride];
                    line[q] = if forward { v } else { v * ax.sign[q] };
                }
                fft.process_with_scratch(&mut line, &mut fft_scratch);
                for q in 0..n {
                    data[base + off + q * stride] = if forward { line[q] * (ax.sign[q] * inv_n) } else { line[q] };
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(GridSpec::new(8, vec![100], vec![10.0])).is_err());
        assert!(Grid::new(GridSpec::new(4, vec![64], vec![10.0])).is_err());
        assert!(Grid::new(GridSpec::new(8, vec![64], vec![-1.0])).is_err());
        assert!(Grid::new(GridSpec::new(8, vec![], vec![])).is_err());
    }

    #[test]
    fn strides_put_last_axis_fastest() {
        let g = Grid::new(GridSpec::new(8, vec![16, 4], vec![8.0, 8.0])).unwrap();
        assert_eq!(g.stride(1), 1);
        assert_eq!(g.stride(0), 4);
        assert_eq!(g.z_total(), 64);
        assert_eq!(g.z_index(4 * 3 + 2, 0), 3);
        assert_eq!(g.z_index(4 * 3 + 2, 1), 2);
    }

    #[test]
    fn centered_coordinates() {
        let g = Grid::new(GridSpec::new(8, vec![8], vec![8.0])).unwrap();
        assert_eq!(g.axes()[0].coords[0], -4.0);
        assert_eq!(g.axes()[0].coords[4], 0.0);
        assert_eq!(g.axes()[0].deriv_wavenumbers[4], 0.0);
        assert!(g.axes()[0].wavenumbers[4] < 0.0);
    }
}
