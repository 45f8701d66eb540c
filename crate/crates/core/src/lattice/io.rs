//! Binary field files: magic `NLSFLD01`, a little-endian `u64` header length, a
//! JSON header, then interleaved little-endian `f64` pairs `(re, im)`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use super::field::{Field, Representation};
use super::grid::{Grid, GridSpec};
use crate::error::{Error, Result};
use crate::model::{rational_str, ModelParams, Sign};

pub const MAGIC: &[u8; 8] = b"NLSFLD01";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldHeader {
    pub d: u32,
    pub n: u32,
    #[serde(with = "rational_str")]
    pub sigma: Rational64,
    pub lambda: Sign,
    pub hermite_modes: usize,
    pub z_points: Vec<usize>,
    pub z_length: Vec<f64>,
    pub representation: Representation,
}

impl FieldHeader {
    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.d, self.n, self.sigma, self.lambda)
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec::new(self.hermite_modes, self.z_points.clone(), self.z_length.clone())
    }
}

pub fn write_field(path: impl AsRef<Path>, f: &Field) -> Result<()> {
    let p = f.params();
    let spec = f.grid().spec();
    let header = FieldHeader {
        d: p.d,
        n: p.n,
        sigma: p.sigma,
        lambda: p.lambda,
        hermite_modes: spec.hermite_modes,
        z_points: spec.z_points.clone(),
        z_length: spec.z_length.clone(),
        representation: f.representation(),
    };
    let json = serde_json::to_vec(&header)?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(json.len() as u64).to_le_bytes())?;
    w.write_all(&json)?;
    for v in f.data() {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the header only.
pub fn read_header(path: impl AsRef<Path>) -> Result<FieldHeader> {
    let mut r = BufReader::new(File::open(path)?);
    read_header_from(&mut r)
}

fn read_header_from(r: &mut impl Read) -> Result<FieldHeader> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic, not a field file".into()));
    }
    let mut len = [0u8; 8];
    r.read_exact(&mut len)?;
    let len = u64::from_le_bytes(len);
    if len > 1 << 20 {
        return Err(Error::Format(format!("implausible header length {len}")));
    }
    let mut json = vec![0u8; len as usize];
    r.read_exact(&mut json)?;
    Ok(serde_json::from_slice(&json)?)
}

/// Reads a field, building its grid from the header.
pub fn read_field(path: impl AsRef<Path>) -> Result<Field> {
    read_field_impl(path.as_ref(), None)
}

/// Reads a field that must live on `grid`.
pub fn read_field_on(path: impl AsRef<Path>, grid: Arc<Grid>) -> Result<Field> {
    read_field_impl(path.as_ref(), Some(grid))
}

fn read_field_impl(path: &Path, grid: Option<Arc<Grid>>) -> Result<Field> {
    let mut r = BufReader::new(File::open(path)?);
    let header = read_header_from(&mut r)?;
    let params = header.params()?;
    let spec = header.grid_spec();
    let grid = match grid {
        Some(g) if *g.spec() == spec => g,
        Some(g) => {
            return Err(Error::Mismatch(format!(
                "field file grid {:?} differs from expected {:?}",
                spec,
                g.spec()
            )))
        }
        None => Arc::new(Grid::new(spec)?),
    };
    let mut data = Vec::with_capacity(grid.len());
    let mut buf = [0u8; 16];
    for _ in 0..grid.len() {
        r.read_exact(&mut buf).map_err(|_| Error::Format("field file truncated".into()))?;
        let re = f64::from_le_bytes(buf[..8].try_into().unwrap());
        let im = f64::from_le_bytes(buf[8..].try_into().unwrap());
        data.push(Complex64::new(re, im));
    }
    if r.read(&mut buf)? != 0 {
        return Err(Error::Format("trailing bytes after field data".into()));
    }
    Field::new(params, grid, header.representation, data)
}
