//! Rectangular midpoint grids and density surfaces evaluated on them.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{BandwidthVec, EstimatorKind};
use crate::Obs2;

/// Axis-aligned box `[x1_lo, x1_hi] x [x2_lo, x2_hi]` with `x2_lo >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box2 {
    pub x1_lo: f64,
    pub x1_hi: f64,
    pub x2_lo: f64,
    pub x2_hi: f64,
}

impl Box2 {
    pub fn new(x1_lo: f64, x1_hi: f64, x2_lo: f64, x2_hi: f64) -> Result<Self> {
        let b = Self { x1_lo, x1_hi, x2_lo, x2_hi };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x1_lo, self.x1_hi, self.x2_lo, self.x2_hi].iter().all(|v| v.is_finite());
        if !finite || self.x1_lo >= self.x1_hi || self.x2_lo >= self.x2_hi {
            return Err(Error::invalid(format!("degenerate box {self:?}")));
        }
        if self.x2_lo < 0.0 {
            return Err(Error::invalid(format!("box must satisfy x2_lo >= 0, got {}", self.x2_lo)));
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        (self.x1_hi - self.x1_lo) * (self.x2_hi - self.x2_lo)
    }

    pub fn contains(&self, x: Obs2) -> bool {
        x.x1 >= self.x1_lo && x.x1 <= self.x1_hi && x.x2 >= self.x2_lo && x.x2 <= self.x2_hi
    }

    /// Whether `other` lies inside `self`, up to a relative slack of 1e-12.
    pub fn contains_box(&self, other: &Box2) -> bool {
        let tol = 1e-12 * (self.x1_hi - self.x1_lo).abs().max(self.x2_hi - self.x2_lo).max(1.0);
        other.x1_lo >= self.x1_lo - tol
            && other.x1_hi <= self.x1_hi + tol
            && other.x2_lo >= self.x2_lo - tol
            && other.x2_hi <= self.x2_hi + tol
    }
}

/// `nx x ny` cell-midpoint grid over a box. Nodes never sit on the box edge,
/// in particular never on `x2 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub bounds: Box2,
    pub nx: usize,
    pub ny: usize,
}

impl Grid2D {
    pub fn new(bounds: Box2, nx: usize, ny: usize) -> Result<Self> {
        bounds.validate()?;
        if nx == 0 || ny == 0 {
            return Err(Error::invalid("grid needs at least one node per axis"));
        }
        Ok(Self { bounds, nx, ny })
    }

    pub fn dx1(&self) -> f64 {
        (self.bounds.x1_hi - self.bounds.x1_lo) / self.nx as f64
    }

    pub fn dx2(&self) -> f64 {
        (self.bounds.x2_hi - self.bounds.x2_lo) / self.ny as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dx1() * self.dx2()
    }

    pub fn x1(&self, i: usize) -> f64 {
        self.bounds.x1_lo + (i as f64 + 0.5) * self.dx1()
    }

    pub fn x2(&self, j: usize) -> f64 {
        self.bounds.x2_lo + (j as f64 + 0.5) * self.dx2()
    }

    pub fn x1_nodes(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x1(i)).collect()
    }

    pub fn x2_nodes(&self) -> Vec<f64> {
        (0..self.ny).map(|j| self.x2(j)).collect()
    }

    pub fn node(&self, i: usize, j: usize) -> Obs2 {
        Obs2::new(self.x1(i), self.x2(j))
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major flat index (`x1` outer, `x2` inner).
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    /// Midpoint-rule integral of values laid out by [`Grid2D::index`].
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() * self.cell_area()
    }
}

/// Estimator kind and bandwidths a surface was computed with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceMeta {
    pub estimator: EstimatorKind,
    pub bandwidths: BandwidthVec,
}

/// Density values on a [`Grid2D`], row-major (`values[grid.index(i, j)]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySurface {
    pub grid: Grid2D,
    pub values: Vec<f64>,
    pub meta: SurfaceMeta,
}

pub const SURFACE_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct SurfaceDocument<'a> {
    schema_version: u32,
    #[serde(flatten)]
    surface: &'a DensitySurface,
}

impl DensitySurface {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn integral(&self) -> f64 {
        self.grid.integrate(&self.values)
    }

    /// CSV with header `x1,x2,density`, one row per node, `x1` outer.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x1", "x2", "density"])?;
        for i in 0..self.grid.nx {
            for j in 0..self.grid.ny {
                w.write_record(&[
                    self.grid.x1(i).to_string(),
                    self.grid.x2(j).to_string(),
                    self.get(i, j).to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, &SurfaceDocument { schema_version: SURFACE_SCHEMA_VERSION, surface: self })?;
        Ok(())
    }
}
