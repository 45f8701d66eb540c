use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::Grid;
use crate::error::{Error, Result};
use crate::model::ModelParams;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    /// Values at the Gauss–Hermite × uniform z collocation points.
    Physical,
    /// Hermite-function × Fourier coefficients.
    Coefficient,
}

/// A complex wavefunction on a [`Grid`]. Storage is `data[m_or_j * z_total + zi]`.
#[derive(Debug, Clone)]
pub struct Field {
    params: ModelParams,
    grid: Arc<Grid>,
    repr: Representation,
    data: Vec<Complex64>,
}

fn check_compat(params: &ModelParams, grid: &Grid) -> Result<()> {
    if params.n != 1 {
        return Err(Error::InvalidParams(format!(
            "fields support one confined axis only, got n={}",
            params.n
        )));
    }
    if grid.free_axes() != params.free_dims() as usize {
        return Err(Error::Mismatch(format!(
            "grid has {} free axes but d-n = {}",
            grid.free_axes(),
            params.free_dims()
        )));
    }
    Ok(())
}

impl Field {
    pub fn new(params: ModelParams, grid: Arc<Grid>, repr: Representation, data: Vec<Complex64>) -> Result<Self> {
        check_compat(&params, &grid)?;
        if data.len() != grid.len() {
            return Err(Error::InvalidField(format!("expected {} values, got {}", grid.len(), data.len())));
        }
        if let Some(i) = data.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidField(format!("non-finite value at index {i}")));
        }
        Ok(Field { params, grid, repr, data })
    }

    pub fn zeros(params: ModelParams, grid: Arc<Grid>, repr: Representation) -> Result<Self> {
        let n = grid.len();
        Field::new(params, grid, repr, vec![ZERO; n])
    }

    /// Samples `f(y, z)` at the collocation points.
    pub fn from_fn(
        params: ModelParams,
        grid: Arc<Grid>,
        mut f: impl FnMut(f64, &[f64]) -> Complex64,
    ) -> Result<Self> {
        check_compat(&params, &grid)?;
        let nz = grid.z_total();
        let k = grid.free_axes();
        let mut data = Vec::with_capacity(grid.len());
        let mut z = vec![0.0; k];
        for &y in grid.hermite().nodes() {
            for zi in 0..nz {
                for (a, zc) in z.iter_mut().enumerate() {
                    *zc = grid.z_coord(zi, a);
                }
                data.push(f(y, &z));
            }
        }
        Field::new(params, grid, Representation::Physical, data)
    }

    /// Builds a field of the same kind with new data, skipping validation.
    pub(crate) fn with_data(&self, repr: Representation, data: Vec<Complex64>) -> Field {
        debug_assert_eq!(data.len(), self.grid.len());
        Field { params: self.params, grid: self.grid.clone(), repr, data }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn representation(&self) -> Representation {
        self.repr
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    /// Replaces the model constants; the grid must still fit.
    pub fn with_params(mut self, params: ModelParams) -> Result<Self> {
        check_compat(&params, &self.grid)?;
        self.params = params;
        Ok(self)
    }

    pub fn to_coefficients(&self) -> Field {
        self.clone().into_coefficients()
    }

    pub fn to_physical(&self) -> Field {
        self.clone().into_physical()
    }

    pub fn into_coefficients(mut self) -> Field {
        if self.repr == Representation::Physical {
            let mut scratch = Vec::new();
            self.grid.forward(&mut self.data, &mut scratch);
            self.repr = Representation::Coefficient;
        }
        self
    }

    pub fn into_physical(mut self) -> Field {
        if self.repr == Representation::Coefficient {
            let mut scratch = Vec::new();
            self.grid.inverse(&mut self.data, &mut scratch);
            self.repr = Representation::Physical;
        }
        self
    }

    pub fn into_repr(self, repr: Representation) -> Field {
        match repr {
            Representation::Physical => self.into_physical(),
            Representation::Coefficient => self.into_coefficients(),
        }
    }

    /// Coefficients, borrowing when already in that representation.
    pub fn coefficients(&self) -> std::borrow::Cow<'_, [Complex64]> {
        match self.repr {
            Representation::Coefficient => std::borrow::Cow::Borrowed(&self.data),
            Representation::Physical => std::borrow::Cow::Owned(self.to_coefficients().data),
        }
    }

    /// Physical values, borrowing when already in that representation.
    pub fn values(&self) -> std::borrow::Cow<'_, [Complex64]> {
        match self.repr {
            Representation::Physical => std::borrow::Cow::Borrowed(&self.data),
            Representation::Coefficient => std::borrow::Cow::Owned(self.to_physical().data),
        }
    }

    /// `‖u‖²_{L²}`.
    pub fn norm_sq(&self) -> f64 {
        match self.repr {
            Representation::Coefficient => coeff_norm_sq(&self.grid, &self.data),
            Representation::Physical => phys_integral(&self.grid, &self.data, |v| v.norm_sqr()),
        }
    }

    pub fn scaled(&self, c: f64) -> Field {
        self.with_data(self.repr, self.data.iter().map(|v| v * c).collect())
    }

    pub fn scaled_complex(&self, c: Complex64) -> Field {
        self.with_data(self.repr, self.data.iter().map(|v| v * c).collect())
    }

    /// `self + c·other` in the representation of `self`.
    pub fn axpy(&self, c: f64, other: &Field) -> Result<Field> {
        self.check_same_grid(other)?;
        let o = other.clone().into_repr(self.repr);
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a + b * c).collect();
        Ok(self.with_data(self.repr, data))
    }

    /// `‖self − other‖_{L²}`.
    pub fn distance(&self, other: &Field) -> Result<f64> {
        Ok(self.axpy(-1.0, other)?.norm_sq().sqrt())
    }

    /// `Re ∫ conj(self)·other`.
    pub fn inner_re(&self, other: &Field) -> Result<f64> {
        self.check_same_grid(other)?;
        let a = self.coefficients();
        let b = other.coefficients();
        let s: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum();
        Ok(s * self.grid.box_volume())
    }

    pub fn check_same_grid(&self, other: &Field) -> Result<()> {
        if *self.grid != *other.grid {
            return Err(Error::Mismatch("fields live on different grids".into()));
        }
        Ok(())
    }

    /// Applies `f(value)` pointwise in physical space.
    pub fn map_physical(&self, mut f: impl FnMut(Complex64) -> Complex64) -> Field {
        let vals = self.values();
        self.with_data(Representation::Physical, vals.iter().map(|&v| f(v)).collect())
    }

    /// `∂_{z_a} u` for each free axis, in coefficient representation.
    pub fn gradient_z(&self) -> Vec<Field> {
        let c = self.coefficients();
        (0..self.grid.free_axes())
            .map(|a| self.with_data(Representation::Coefficient, dz_coeffs(&self.grid, &c, a)))
            .collect()
    }

    /// `∂_y u`, truncated to the grid's modes, in coefficient representation.
    pub fn gradient_y(&self) -> Field {
        let c = self.coefficients();
        let mut ext = ladder(&self.grid, &c, Ladder::Derivative);
        ext.truncate(self.grid.len());
        self.with_data(Representation::Coefficient, ext)
    }

    /// `y·u`, truncated to the grid's modes, in coefficient representation.
    pub fn multiply_y(&self) -> Field {
        let c = self.coefficients();
        let mut ext = ladder(&self.grid, &c, Ladder::Position);
        ext.truncate(self.grid.len());
        self.with_data(Representation::Coefficient, ext)
    }

    /// Fraction of coefficient mass in the top tenth of modes along any axis.
    pub fn tail_fraction(&self) -> f64 {
        tail_fraction(&self.grid, &self.coefficients())
    }
}

pub(crate) fn coeff_norm_sq(grid: &Grid, c: &[Complex64]) -> f64 {
    c.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.box_volume()
}

/// `∫ g(u) dx` by the collocation quadrature.
pub(crate) fn phys_integral(grid: &Grid, vals: &[Complex64], g: impl Fn(Complex64) -> f64) -> f64 {
    let nz = grid.z_total();
    let w = grid.hermite().weights();
    let mut total = 0.0;
    for (j, row) in vals.chunks_exact(nz).enumerate() {
        let s: f64 = row.iter().map(|&v| g(v)).sum();
        total += w[j] * s;
    }
    total * grid.cell_volume()
}

pub(crate) fn tail_fraction(grid: &Grid, c: &[Complex64]) -> f64 {
    let nz = grid.z_total();
    let mut tail = 0.0;
    let mut total = 0.0;
    for (m, row) in c.chunks_exact(nz).enumerate() {
        for (zi, v) in row.iter().enumerate() {
            let p = v.norm_sqr();
            total += p;
            if grid.is_tail(m, zi) {
                tail += p;
            }
        }
    }
    if total > 0.0 {
        tail / total
    } else {
        0.0
    }
}

pub(crate) fn dz_coeffs(grid: &Grid, c: &[Complex64], a: usize) -> Vec<Complex64> {
    let nz = grid.z_total();
    let k = &grid.axes()[a].deriv_wavenumbers;
    let stride = grid.stride(a);
    let n = grid.axes()[a].points;
    c.iter()
        .enumerate()
        .map(|(i, v)| {
            let q = ((i % nz) / stride) % n;
            v * Complex64::new(0.0, k[q])
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Ladder {
    /// `∂_y`: `c_{k+1}√((k+1)/2) − c_{k−1}√(k/2)`.
    Derivative,
    /// `y·`: `c_{k+1}√((k+1)/2) + c_{k−1}√(k/2)`.
    Position,
}

/// Applies a ladder operator, returning `M+1` Hermite rows so no mass is lost.
pub(crate) fn ladder(grid: &Grid, c: &[Complex64], kind: Ladder) -> Vec<Complex64> {
    let nz = grid.z_total();
    let m = grid.modes();
    let sgn = match kind {
        Ladder::Derivative => -1.0,
        Ladder::Position => 1.0,
    };
    let mut out = vec![ZERO; (m + 1) * nz];
    for k in 0..=m {
        let row = &mut out[k * nz..(k + 1) * nz];
        if k + 1 < m {
            let f = ((k + 1) as f64 / 2.0).sqrt();
            for (o, v) in row.iter_mut().zip(&c[(k + 1) * nz..(k + 2) * nz]) {
                *o += v * f;
            }
        }
        if k >= 1 {
            let f = sgn * (k as f64 / 2.0).sqrt();
            for (o, v) in row.iter_mut().zip(&c[(k - 1) * nz..k * nz]) {
                *o += v * f;
            }
        }
    }
    out
}
