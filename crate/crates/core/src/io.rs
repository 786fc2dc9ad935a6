//! JSON encodings for matrices.
//!
//! Complex matrices are written row-major as `{"n": modes, "entries": [[{"re":..,"im":..}]]}`;
//! real matrices use plain floats in the same layout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMat, RMat, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrixJson {
    pub n: usize,
    pub entries: Vec<Vec<ComplexJson>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealMatrixJson {
    pub n: usize,
    pub entries: Vec<Vec<f64>>,
}

impl ComplexMatrixJson {
    pub fn from_matrix(n: usize, m: &CMat) -> Self {
        let entries = (0..m.nrows())
            .map(|r| (0..m.ncols()).map(|c| ComplexJson { re: m[(r, c)].re, im: m[(r, c)].im }).collect())
            .collect();
        Self { n, entries }
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        let rows = self.entries.len();
        let cols = self.entries.first().map_or(0, |r| r.len());
        if self.entries.iter().any(|r| r.len() != cols) {
            return Err(Error::Invalid("ragged matrix rows".into()));
        }
        Ok(CMat::from_fn(rows, cols, |r, c| {
            let z = self.entries[r][c];
            C64::new(z.re, z.im)
        }))
    }
}

impl RealMatrixJson {
    pub fn from_matrix(n: usize, m: &RMat) -> Self {
        let entries = (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect()).collect();
        Self { n, entries }
    }

    pub fn to_matrix(&self) -> Result<RMat> {
        let rows = self.entries.len();
        let cols = self.entries.first().map_or(0, |r| r.len());
        if self.entries.iter().any(|r| r.len() != cols) {
            return Err(Error::Invalid("ragged matrix rows".into()));
        }
        Ok(RMat::from_fn(rows, cols, |r, c| self.entries[r][c]))
    }
}
