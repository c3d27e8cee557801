//! JSON state and operator files.
//!
//! A state file holds `dims`, `amps_re` and optionally `amps_im` and `nonneg`.
//! The `nonneg` field is informational: it is recomputed on load.
//! Operator files hold `dims`, `matrix_re` and optionally `matrix_im` (row-major rows).

use std::fs;
use std::path::Path;

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qstate::StateError;
use crate::{Ket, SiteLayout};

/// Largest norm deviation accepted without `renormalize`.
pub const LOAD_NORM_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    State(#[from] StateError),
    #[error("expected {expected} entries, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("state norm {norm} differs from 1 by more than {LOAD_NORM_TOL:e}; pass renormalize to accept")]
    NotNormalized { norm: f64 },
}

pub type Result<T> = std::result::Result<T, IoError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub amps_re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amps_im: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonneg: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorFile {
    pub dims: Vec<usize>,
    pub matrix_re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_im: Option<Vec<Vec<f64>>>,
}

/// A loaded state and what happened while loading it.
#[derive(Debug, Clone)]
pub struct LoadedState {
    pub ket: Ket,
    /// Norm before rescaling, if it was rescaled.
    pub renormalized_from: Option<f64>,
    pub warnings: Vec<String>,
}

impl StateFile {
    pub fn from_ket(ket: &Ket) -> Self {
        let amps = ket.amplitudes();
        let im: Vec<f64> = amps.iter().map(|z| z.im).collect();
        Self {
            dims: ket.dims().to_vec(),
            amps_re: amps.iter().map(|z| z.re).collect(),
            amps_im: im.iter().any(|&x| x != 0.0).then_some(im),
            nonneg: Some(ket.is_nonneg()),
        }
    }

    pub fn into_ket(self, renormalize: bool) -> Result<LoadedState> {
        let layout = SiteLayout::new(self.dims)?;
        let n = layout.total();
        if self.amps_re.len() != n {
            return Err(IoError::Shape { expected: n, found: self.amps_re.len() });
        }
        let im = self.amps_im.unwrap_or_else(|| vec![0.0; n]);
        if im.len() != n {
            return Err(IoError::Shape { expected: n, found: im.len() });
        }
        let amps: Vec<Complex<f64>> = self.amps_re.iter().zip(&im).map(|(&r, &i)| Complex::new(r, i)).collect();
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > LOAD_NORM_TOL && !renormalize {
            return Err(IoError::NotNormalized { norm });
        }
        let exact = (norm - 1.0).abs() <= 1e-14;
        let ket = if exact { Ket::new(layout, amps)? } else { Ket::normalized(layout, amps)? };
        let mut warnings = Vec::new();
        if self.nonneg == Some(true) && !ket.is_nonneg() {
            warnings.push("file claims a non-negative state but amplitudes are not; flag recomputed".into());
        }
        let renormalized_from = (!exact).then_some(norm);
        if let Some(nrm) = renormalized_from.filter(|n| (n - 1.0).abs() > LOAD_NORM_TOL) {
            warnings.push(format!("renormalized from norm {nrm}"));
        }
        Ok(LoadedState { ket, renormalized_from, warnings })
    }
}

impl OperatorFile {
    pub fn from_matrix(dims: Vec<usize>, m: &DMatrix<Complex<f64>>) -> Self {
        let rows = |f: fn(&Complex<f64>) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect()
        };
        let im = rows(|z| z.im);
        Self { dims, matrix_re: rows(|z| z.re), matrix_im: im.iter().flatten().any(|&x| x != 0.0).then_some(im) }
    }

    pub fn into_matrix(self) -> Result<(SiteLayout, DMatrix<Complex<f64>>)> {
        let layout = SiteLayout::new(self.dims)?;
        let n = layout.total();
        let check = |m: &Vec<Vec<f64>>| -> Result<()> {
            if m.len() != n {
                return Err(IoError::Shape { expected: n, found: m.len() });
            }
            if let Some(r) = m.iter().find(|r| r.len() != n) {
                return Err(IoError::Shape { expected: n, found: r.len() });
            }
            Ok(())
        };
        check(&self.matrix_re)?;
        if let Some(im) = &self.matrix_im {
            check(im)?;
        }
        let m = DMatrix::from_fn(n, n, |i, j| {
            Complex::new(self.matrix_re[i][j], self.matrix_im.as_ref().map_or(0.0, |im| im[i][j]))
        });
        Ok((layout, m))
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| IoError::Io { path: path.display().to_string(), source })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| IoError::Io { path: path.display().to_string(), source })
}

pub fn parse_state(text: &str, renormalize: bool) -> Result<LoadedState> {
    serde_json::from_str::<StateFile>(text)?.into_ket(renormalize)
}

pub fn state_to_string(ket: &Ket) -> String {
    serde_json::to_string_pretty(&StateFile::from_ket(ket)).expect("plain data serializes")
}

pub fn read_state(path: impl AsRef<Path>, renormalize: bool) -> Result<LoadedState> {
    parse_state(&read_text(path.as_ref())?, renormalize)
}

pub fn write_state(ket: &Ket, path: impl AsRef<Path>) -> Result<()> {
    write_text(path.as_ref(), &(state_to_string(ket) + "\n"))
}

pub fn read_operator(path: impl AsRef<Path>) -> Result<(SiteLayout, DMatrix<Complex<f64>>)> {
    serde_json::from_str::<OperatorFile>(&read_text(path.as_ref())?)?.into_matrix()
}

pub fn write_operator(dims: Vec<usize>, m: &DMatrix<Complex<f64>>, path: impl AsRef<Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(&OperatorFile::from_matrix(dims, m)).expect("plain data serializes");
    write_text(path.as_ref(), &(text + "\n"))
}
