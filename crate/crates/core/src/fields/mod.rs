//! Structured-grid field containers and the utilities every other module
//! builds on.
//!
//! Values are stored row-major with x varying fastest: the linear index of
//! cell `(i, j, k)` is `i + nx * (j + ny * k)`.

mod gradient;
mod io;
mod scaler;
mod stats;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use gradient::{gradient, gradient_values, gradient_vector, GradientField};
pub use io::{load_field, load_field_with_sidecar, parse_dims, save_field, save_field_with_sidecar, FieldMeta};
pub use scaler::{fit_scaler, ChannelRange, MinMaxScaler};
pub use stats::{field_stats, FieldStats};

/// Grid extents along x, y and z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
}

impl Dims {
    pub const fn new(nx: usize, ny: usize, nz: usize) -> Self {
        Self { nx, ny, nz }
    }

    pub const fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub const fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub const fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.nx * (j + self.ny * k)
    }

    /// Inverse of [`Dims::index`].
    #[inline]
    pub const fn coords(&self, idx: usize) -> (usize, usize, usize) {
        let i = idx % self.nx;
        let rest = idx / self.nx;
        (i, rest % self.ny, rest / self.ny)
    }

    pub const fn extent(&self, axis: Axis) -> usize {
        match axis {
            Axis::X => self.nx,
            Axis::Y => self.ny,
            Axis::Z => self.nz,
        }
    }

    pub const fn as_array(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    pub(crate) fn check_positive(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 || self.nz == 0 {
            return Err(Error::InvalidArgument(format!(
                "grid extents must be positive, got {self}"
            )));
        }
        Ok(())
    }
}

impl std::fmt::Display for Dims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}x{}", self.nx, self.ny, self.nz)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub const fn ordinal(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// One scalar channel on a 3-D structured grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field3D {
    dims: Dims,
    values: Vec<f32>,
    coords: [Vec<f64>; 3],
    n_nonfinite: usize,
}

impl Field3D {
    /// Uniform unit spacing; rejects non-finite values.
    pub fn new(dims: Dims, values: Vec<f32>) -> Result<Self> {
        Self::build(dims, values, uniform_coords(dims), false)
    }

    /// Like [`Field3D::new`] but keeps NaN/Inf cells and counts them.
    pub fn new_allow_nonfinite(dims: Dims, values: Vec<f32>) -> Result<Self> {
        Self::build(dims, values, uniform_coords(dims), true)
    }

    pub fn with_coords(dims: Dims, values: Vec<f32>, coords: [Vec<f64>; 3]) -> Result<Self> {
        Self::build(dims, values, coords, false)
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> f32) -> Result<Self> {
        let mut values = Vec::with_capacity(dims.len());
        for k in 0..dims.nz {
            for j in 0..dims.ny {
                for i in 0..dims.nx {
                    values.push(f(i, j, k));
                }
            }
        }
        Self::new(dims, values)
    }

    pub fn constant(dims: Dims, value: f32) -> Result<Self> {
        Self::new(dims, vec![value; dims.len()])
    }

    fn build(dims: Dims, values: Vec<f32>, coords: [Vec<f64>; 3], allow_nonfinite: bool) -> Result<Self> {
        dims.check_positive()?;
        if values.len() != dims.len() {
            return Err(Error::Format(format!(
                "{} values supplied for a {dims} grid ({} cells)",
                values.len(),
                dims.len()
            )));
        }
        for axis in Axis::ALL {
            let c = &coords[axis.ordinal()];
            if c.len() != dims.extent(axis) {
                return Err(Error::Format(format!(
                    "{axis:?} coordinate array has {} entries, grid extent is {}",
                    c.len(),
                    dims.extent(axis)
                )));
            }
            if c.windows(2).any(|w| w[1] <= w[0]) || c.iter().any(|v| !v.is_finite()) {
                return Err(Error::Format(format!(
                    "{axis:?} coordinates must be finite and strictly increasing"
                )));
            }
        }
        let n_nonfinite = values.iter().filter(|v| !v.is_finite()).count();
        if n_nonfinite > 0 && !allow_nonfinite {
            return Err(Error::Data(format!(
                "{n_nonfinite} non-finite value(s) present; load with allow-nonfinite to keep them"
            )));
        }
        Ok(Self {
            dims,
            values,
            coords,
            n_nonfinite,
        })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    pub fn coords(&self, axis: Axis) -> &[f64] {
        &self.coords[axis.ordinal()]
    }

    pub fn all_coords(&self) -> &[Vec<f64>; 3] {
        &self.coords
    }

    pub fn n_nonfinite(&self) -> usize {
        self.n_nonfinite
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f32 {
        self.values[self.dims.index(i, j, k)]
    }

    /// True when every coordinate array has unit spacing starting at 0.
    pub fn has_uniform_unit_coords(&self) -> bool {
        self.coords
            .iter()
            .all(|c| c.iter().enumerate().all(|(i, &v)| v == i as f64))
    }

    /// Same grid, new values. Used for reconstructions and derived fields.
    pub fn with_values(&self, values: Vec<f32>) -> Result<Self> {
        Self::build(self.dims, values, self.coords.clone(), true)
    }

    pub(crate) fn check_same_dims(&self, other: &Field3D) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimsMismatch(format!("{} vs {}", self.dims, other.dims)));
        }
        Ok(())
    }

    /// Finite min/max over all cells; `None` when no cell is finite.
    pub fn finite_range(&self) -> Option<(f32, f32)> {
        self.values
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .fold(None, |acc, v| match acc {
                None => Some((v, v)),
                Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
            })
    }

    /// Raw little-endian bytes of the values.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.values.len() * 4);
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }
}

pub(crate) fn uniform_coords(dims: Dims) -> [Vec<f64>; 3] {
    let axis = |n: usize| (0..n).map(|i| i as f64).collect::<Vec<_>>();
    [axis(dims.nx), axis(dims.ny), axis(dims.nz)]
}
