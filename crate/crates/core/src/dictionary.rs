//! Dictionaries `D ∈ R^{d×n}` and their deterministic geometry.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combin::{binomial, Combinations};
use crate::ensembles::{sample_matrix, EnsembleError, EnsembleSpec};
use crate::matcore::{dot, norm2, svd, Mat, MatError};

pub const DEFAULT_SPARK_TOL: f64 = 1e-10;
/// Largest number of `d`-column submatrices `full_spark` will enumerate.
pub const SPARK_GUARD: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum DictError {
    #[error("dictionary must satisfy d <= n, got {d}x{n}")]
    Undercomplete { d: usize, n: usize },
    #[error("column {0} is zero")]
    ZeroColumn(usize),
    #[error("infeasible at this size: C({n}, {d}) submatrices exceeds {limit}")]
    InfeasibleAtSize { n: usize, d: usize, limit: u64 },
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error("sidecar: {0}")]
    Sidecar(#[from] serde_json::Error),
}

/// Dictionary matrix with its cached column-norm bound.
#[derive(Clone, Debug)]
pub struct Dict {
    mat: Mat,
    rho: f64,
    mu: Option<f64>,
}

impl Dict {
    pub fn new(mat: Mat) -> Result<Self, DictError> {
        let (d, n) = mat.shape();
        if d > n {
            return Err(DictError::Undercomplete { d, n });
        }
        let rho = max_column_norm(&mat);
        Ok(Self { mat, rho, mu: None })
    }

    pub fn mat(&self) -> &Mat {
        &self.mat
    }

    pub fn into_mat(self) -> Mat {
        self.mat
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn mu(&self) -> Option<f64> {
        self.mu
    }

    pub fn d(&self) -> usize {
        self.mat.rows()
    }

    pub fn n(&self) -> usize {
        self.mat.cols()
    }

    /// Same dictionary with all entries multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Dict {
        Dict { mat: self.mat.scaled(c), rho: self.rho * c.abs(), mu: self.mu }
    }

    /// Writes `path` in the matrix text format plus a `path.json` sidecar.
    pub fn save(&self, path: &Path, full_spark_status: Option<bool>) -> Result<(), DictError> {
        self.mat.save(path)?;
        let side = DictSidecar { rho: self.rho, mu: self.mu, full_spark_status };
        std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&side)? + "\n")
            .map_err(MatError::from)?;
        Ok(())
    }

    /// Loads a dictionary; `rho` is recomputed from the matrix, the
    /// sidecar only supplies a cached coherence when present.
    pub fn load(path: &Path) -> Result<Dict, DictError> {
        let mut dict = Dict::new(Mat::load(path)?)?;
        if let Ok(text) = std::fs::read_to_string(sidecar_path(path)) {
            let side: DictSidecar = serde_json::from_str(&text)?;
            dict.mu = side.mu;
        }
        Ok(dict)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DictSidecar {
    pub rho: f64,
    pub mu: Option<f64>,
    pub full_spark_status: Option<bool>,
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

fn max_column_norm(m: &Mat) -> f64 {
    let mut sq = vec![0.0; m.cols()];
    for i in 0..m.rows() {
        for (acc, v) in sq.iter_mut().zip(m.row(i)) {
            *acc += v * v;
        }
    }
    sq.into_iter().fold(0.0, |a, b| a.max(b.sqrt()))
}

pub fn make_identity(n: usize) -> Dict {
    assert!(n >= 1, "identity dictionary needs n >= 1");
    Dict { mat: Mat::identity(n), rho: 1.0, mu: Some(0.0) }
}

/// Samples `D` from `spec` (rows `d`, cols `n`, normalization typically `1/√d`).
pub fn make_random_dict(spec: &EnsembleSpec, seed: u64) -> Result<Dict, DictError> {
    if spec.rows > spec.cols {
        return Err(DictError::Undercomplete { d: spec.rows, n: spec.cols });
    }
    let mut dict = Dict::new(sample_matrix(spec, seed)?)?;
    dict.mu = Some(coherence(&dict)?.mu);
    Ok(dict)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Coherence {
    pub mu: f64,
    /// Largest `s` with `μ ≤ 1/(16(s−1))`, capped at `n`.
    pub admissible_s: usize,
}

/// Exact mutual coherence `max_{i≠j} |⟨d_i, d_j⟩| / (‖d_i‖‖d_j‖)`.
pub fn coherence(dict: &Dict) -> Result<Coherence, DictError> {
    let m = dict.mat();
    let n = m.cols();
    let cols: Vec<Vec<f64>> = (0..n).map(|j| m.col(j)).collect();
    let norms: Vec<f64> = cols.iter().map(|c| norm2(c)).collect();
    if let Some(j) = norms.iter().position(|&x| x == 0.0) {
        return Err(DictError::ZeroColumn(j));
    }
    let mut mu = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            let c = dot(&cols[i], &cols[j]).abs() / (norms[i] * norms[j]);
            mu = mu.max(c);
        }
    }
    let mu = mu.min(1.0);
    let admissible_s = if mu == 0.0 {
        n
    } else {
        ((1.0 + 1.0 / (16.0 * mu)).floor() as usize).clamp(1, n)
    };
    Ok(Coherence { mu, admissible_s })
}

/// Whether every `d` columns of `D` are linearly independent.
///
/// Enumerates all `C(n, d)` square submatrices and requires
/// `σ_min > tol · σ_max` for each one.
pub fn full_spark(dict: &Dict, tol: f64) -> Result<bool, DictError> {
    let (d, n) = dict.mat().shape();
    match binomial(n, d) {
        Some(c) if c <= SPARK_GUARD => {}
        _ => return Err(DictError::InfeasibleAtSize { n, d, limit: SPARK_GUARD }),
    }
    for cols in Combinations::new(n, d) {
        let sub = dict.mat().select_cols(&cols);
        let sv = svd(&sub).singular_values;
        let smax = sv[0];
        let smin = sv[sv.len() - 1];
        if !(smin > tol * smax) {
            return Ok(false);
        }
    }
    Ok(true)
}
