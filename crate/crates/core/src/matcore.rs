//! Dense linear-algebra substrate.
//!
//! Row-major real matrices, a one-sided Jacobi SVD, kernel extraction,
//! power-iteration norm estimates and the non-increasing rearrangement
//! helpers used by the null-space and width estimators. Nothing in here
//! touches randomness.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use thiserror::Error;

/// Default relative singular-value cutoff for rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum MatError {
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Dense real matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    /// Builds a matrix from row-major data, rejecting non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, MatError> {
        if data.len() != rows * cols {
            return Err(MatError::Shape(format!(
                "{} entries for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        if let Some(k) = data.iter().position(|x| !x.is_finite()) {
            return Err(MatError::NonFinite { row: k / cols.max(1), col: k % cols.max(1) });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Result<Self, MatError> {
        let n = values.len();
        let mut data = vec![0.0; n * n];
        for (i, v) in values.iter().enumerate() {
            data[i * n + i] = *v;
        }
        Self::new(n, n, data)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, MatError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(MatError::Shape("ragged rows".into()));
        }
        Self::new(r, c, rows.concat())
    }

    /// Builds a matrix from column vectors.
    pub fn from_cols(rows: usize, cols: &[Vec<f64>]) -> Result<Self, MatError> {
        let c = cols.len();
        let mut data = vec![0.0; rows * c];
        for (j, col) in cols.iter().enumerate() {
            if col.len() != rows {
                return Err(MatError::Shape(format!("column {j} has length {}", col.len())));
            }
            for (i, v) in col.iter().enumerate() {
                data[i * c + j] = *v;
            }
        }
        Self::new(rows, c, data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    /// Matrix product `self * rhs`.
    pub fn matmul(&self, rhs: &Mat) -> Result<Mat, MatError> {
        if self.cols != rhs.rows {
            return Err(MatError::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `out = self * x`.
    pub fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols.max(1))) {
            *o = dot(row, x);
        }
        if self.cols == 0 {
            out.iter_mut().for_each(|o| *o = 0.0);
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.matvec_into(x, &mut out);
        out
    }

    /// `out = selfᵀ * y`.
    pub fn matvec_t_into(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (row, &yi) in self.data.chunks_exact(self.cols.max(1)).zip(y) {
            if yi == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(row) {
                *o += a * yi;
            }
        }
    }

    pub fn matvec_t(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        self.matvec_t_into(y, &mut out);
        out
    }

    pub fn scaled(&self, c: f64) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| c * x).collect() }
    }

    /// Sub-matrix made of the given columns, in order.
    pub fn select_cols(&self, idx: &[usize]) -> Mat {
        let mut out = Mat::zeros(self.rows, idx.len());
        for i in 0..self.rows {
            for (k, &j) in idx.iter().enumerate() {
                out.data[i * idx.len() + k] = self.get(i, j);
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        norm2(&self.data)
    }

    /// Renders the plain-text matrix format: a `rows cols` header followed
    /// by one whitespace-separated row per line at 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.data.len() * 25 + 16);
        let _ = writeln!(s, "{} {}", self.rows, self.cols);
        for i in 0..self.rows {
            for (j, v) in self.row(i).iter().enumerate() {
                if j > 0 {
                    s.push(' ');
                }
                let _ = write!(s, "{v:.16e}");
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Mat, MatError> {
        Self::read_from(text.as_bytes())
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Mat, MatError> {
        let mut lines = reader.lines().enumerate().filter_map(|(k, l)| match l {
            Ok(l) if l.trim().is_empty() => None,
            other => Some((k + 1, other)),
        });
        let (ln, header) = lines
            .next()
            .ok_or(MatError::Parse { line: 1, msg: "missing header".into() })?;
        let header = header?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| MatError::Parse { line: ln, msg: format!("bad header: {e}") })?;
        let [rows, cols] = dims[..] else {
            return Err(MatError::Parse { line: ln, msg: "header must be `rows cols`".into() });
        };
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (ln, line) = lines
                .next()
                .ok_or(MatError::Parse { line: ln + 1, msg: "missing row".into() })?;
            let line = line?;
            let before = data.len();
            for tok in line.split_whitespace() {
                let v: f64 = tok
                    .parse()
                    .map_err(|e| MatError::Parse { line: ln, msg: format!("{tok:?}: {e}") })?;
                data.push(v);
            }
            if data.len() - before != cols {
                return Err(MatError::Parse {
                    line: ln,
                    msg: format!("expected {cols} entries, found {}", data.len() - before),
                });
            }
        }
        Mat::new(rows, cols, data)
    }

    pub fn save(&self, path: &Path) -> Result<(), MatError> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Mat, MatError> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f))
    }
}

/// Rejects vectors with NaN or infinite entries.
pub fn check_finite(v: &[f64]) -> Result<(), MatError> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(k) => Err(MatError::NonFinite { row: k, col: 0 }),
        None => Ok(()),
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // eight independent partial sums so the loop vectorizes
    let mut acc = [0.0f64; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

#[inline]
pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

#[inline]
pub fn norm1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

#[inline]
pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Singular values (descending) and right singular vectors of a matrix.
#[derive(Clone, Debug)]
pub struct Svd {
    pub singular_values: Vec<f64>,
    /// `n × n` orthogonal matrix; column `k` pairs with `singular_values[k]`.
    pub v: Mat,
}

/// One-sided (Hestenes) Jacobi SVD.
///
/// Orthogonalizes the columns of `a` by plane rotations accumulated into a
/// full `n × n` orthogonal `V`, so `a·V` has orthogonal columns whose norms
/// are the singular values. Works for any shape; when `rows < cols` the
/// trailing columns of `a·V` collapse to zero and span the kernel.
pub fn svd(a: &Mat) -> Svd {
    let (m, n) = a.shape();
    let mut w: Vec<Vec<f64>> = (0..n).map(|j| a.col(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();
    let scale = a.max_abs();
    if scale > 0.0 && m > 0 {
        const MAX_SWEEPS: usize = 80;
        for _ in 0..MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..n {
                for q in (p + 1)..n {
                    let alpha = dot(&w[p], &w[p]);
                    let beta = dot(&w[q], &w[q]);
                    let gamma = dot(&w[p], &w[q]);
                    if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = if zeta >= 0.0 {
                        1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                    } else {
                        -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    rotate(&mut w, p, q, c, s);
                    rotate(&mut v, p, q, c, s);
                }
            }
            if !rotated {
                break;
            }
        }
    }
    let sv: Vec<f64> = w.iter().map(|c| norm2(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps the original column order among equal values.
    order.sort_by(|&i, &j| sv[j].partial_cmp(&sv[i]).unwrap_or(std::cmp::Ordering::Equal));
    let singular_values = order.iter().map(|&k| sv[k]).collect();
    let cols: Vec<Vec<f64>> = order.iter().map(|&k| v[k].clone()).collect();
    Svd { singular_values, v: Mat::from_cols(n, &cols).expect("orthogonal factor is finite") }
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    let (cp, cq) = (&mut lo[p], &mut hi[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

/// Orthonormal basis of `ker a`, one basis vector per column.
///
/// Directions whose singular value is at most `tol · σ_max(a)` are assigned
/// to the kernel. A trivial kernel yields an `n × 0` matrix.
pub fn kernel_basis(a: &Mat, tol: f64) -> Result<Mat, MatError> {
    if !(tol > 0.0) {
        return Err(MatError::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    check_finite(a.data())?;
    let n = a.cols();
    let dec = svd(a);
    let smax = dec.singular_values.first().copied().unwrap_or(0.0);
    let cutoff = tol * smax;
    let cols: Vec<Vec<f64>> = (0..n)
        .filter(|&k| smax == 0.0 || dec.singular_values[k] <= cutoff)
        .map(|k| dec.v.col(k))
        .collect();
    Mat::from_cols(n, &cols)
}

/// Numerical rank with a relative singular-value cutoff.
pub fn rank(a: &Mat, tol: f64) -> usize {
    let dec = svd(a);
    let smax = dec.singular_values.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    dec.singular_values.iter().filter(|&&s| s > tol * smax).count()
}

/// Largest singular value by power iteration on `aᵀa`.
///
/// Starts from the normalized all-ones vector. If that start lies in the
/// kernel, a fixed non-uniform start is used instead. Stops when the
/// relative change of the estimate drops below `tol` or after `iters`
/// iterations. The zero matrix returns 0.
pub fn op_norm(a: &Mat, iters: usize, tol: f64) -> f64 {
    let n = a.cols();
    if n == 0 || a.rows() == 0 || a.max_abs() == 0.0 {
        return 0.0;
    }
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut ax = a.matvec(&x);
    if norm2(&ax) <= 1e-12 * a.frobenius() {
        // Deterministic fallback start with no symmetry.
        x = (0..n).map(|j| 1.0 + ((j as f64 + 1.0) * 0.618_033_988_749_894_9).fract()).collect();
        let nx = norm2(&x);
        x.iter_mut().for_each(|v| *v /= nx);
        ax = a.matvec(&x);
    }
    let mut est = norm2(&ax);
    let mut atax = vec![0.0; n];
    for _ in 0..iters.max(1) {
        a.matvec_t_into(&ax, &mut atax);
        let nrm = norm2(&atax);
        if nrm == 0.0 {
            return est;
        }
        for (xi, yi) in x.iter_mut().zip(&atax) {
            *xi = yi / nrm;
        }
        a.matvec_into(&x, &mut ax);
        let next = norm2(&ax);
        let done = (next - est).abs() <= tol * next;
        est = next;
        if done {
            break;
        }
    }
    est
}

/// Thin QR factorization `a = Q R` of a tall matrix (`rows ≥ cols`) by
/// Gram–Schmidt with one re-orthogonalization pass.
#[derive(Clone, Debug)]
pub struct ThinQr {
    /// Orthonormal columns of `Q`, each of length `rows`.
    pub q: Vec<Vec<f64>>,
    /// Upper-triangular `R`, row-major `cols × cols`.
    pub r: Vec<f64>,
    k: usize,
}

impl ThinQr {
    /// Factors the columns `cols` of `a`, or `None` when they are
    /// numerically dependent (`|R_ii| ≤ tol · max |R_jj|`).
    pub fn of_columns(a: &Mat, cols: &[usize], tol: f64) -> Option<ThinQr> {
        let m = a.rows();
        let k = cols.len();
        if k > m {
            return None;
        }
        let mut q: Vec<Vec<f64>> = Vec::with_capacity(k);
        let mut r = vec![0.0; k * k];
        for (j, &c) in cols.iter().enumerate() {
            let mut v = a.col(c);
            for _pass in 0..2 {
                for (i, qi) in q.iter().enumerate() {
                    let h = dot(qi, &v);
                    r[i * k + j] += h;
                    for (vv, qq) in v.iter_mut().zip(qi) {
                        *vv -= h * qq;
                    }
                }
            }
            let nv = norm2(&v);
            r[j * k + j] = nv;
            if nv == 0.0 {
                return None;
            }
            v.iter_mut().for_each(|x| *x /= nv);
            q.push(v);
        }
        let dmax = (0..k).fold(0.0f64, |acc, i| acc.max(r[i * k + i].abs()));
        if (0..k).any(|i| r[i * k + i].abs() <= tol * dmax) {
            return None;
        }
        Some(ThinQr { q, r, k })
    }

    /// Solves `R x = b`.
    pub fn solve_r(&self, b: &[f64]) -> Vec<f64> {
        let k = self.k;
        let mut x = b.to_vec();
        for i in (0..k).rev() {
            let mut acc = x[i];
            for j in i + 1..k {
                acc -= self.r[i * k + j] * x[j];
            }
            x[i] = acc / self.r[i * k + i];
        }
        x
    }

    /// Solves `Rᵀ x = b`.
    pub fn solve_rt(&self, b: &[f64]) -> Vec<f64> {
        let k = self.k;
        let mut x = b.to_vec();
        for i in 0..k {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.r[j * k + i] * x[j];
            }
            x[i] = acc / self.r[i * k + i];
        }
        x
    }

    /// `Qᵀ y`.
    pub fn qt(&self, y: &[f64]) -> Vec<f64> {
        self.q.iter().map(|qi| dot(qi, y)).collect()
    }

    /// `Q c`.
    pub fn q_times(&self, c: &[f64]) -> Vec<f64> {
        let m = self.q.first().map_or(0, Vec::len);
        let mut out = vec![0.0; m];
        for (qi, &ci) in self.q.iter().zip(c) {
            for (o, q) in out.iter_mut().zip(qi) {
                *o += ci * q;
            }
        }
        out
    }
}

/// Non-increasing rearrangement of `|v|`, ties kept in original index order.
pub fn rearrange_desc(v: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    out.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    out
}

/// Indices of `v` ordered by non-increasing magnitude, ties by index.
pub fn argsort_desc(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[j].abs().partial_cmp(&v[i].abs()).unwrap_or(std::cmp::Ordering::Equal));
    idx
}

/// `(Σ_{i≤s} (v_i*)²)^{1/2}`, i.e. `sup_{x ∈ Σ_s} ⟨x, v⟩`.
pub fn top_s_l2(v: &[f64], s: usize) -> Result<f64, MatError> {
    if s == 0 || s > v.len() {
        return Err(MatError::InvalidArgument(format!(
            "sparsity {s} outside 1..={}",
            v.len()
        )));
    }
    Ok(top_s_l2_unchecked(v, s))
}

pub(crate) fn top_s_l2_unchecked(v: &[f64], s: usize) -> f64 {
    if s >= v.len() {
        return norm2(v);
    }
    let mut sq: Vec<f64> = v.iter().map(|x| x * x).collect();
    sq.select_nth_unstable_by(s - 1, |a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    sq[..s].iter().sum::<f64>().sqrt()
}
