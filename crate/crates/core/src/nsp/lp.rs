//! Dense tableau simplex for `max cᵀx s.t. A x ≤ b` with `b ≥ 0`, where each
//! variable is either sign-constrained `x_j ≥ 0` or free.
//!
//! The origin is feasible, so the slack basis starts the iteration and no
//! phase-one problem is needed. Pivoting uses Bland's smallest-index rule
//! for both the entering and the leaving variable, which rules out cycling.
//! The tableau is rebuilt from the current basis every few pivots and
//! before a termination verdict is accepted, so rounding drift cannot
//! produce a spurious optimum or ray. Free variables start nonbasic at
//! zero, may enter in either direction and never leave once basic.

use thiserror::Error;

use crate::matcore::Mat;

const PIVOT_EPS: f64 = 1e-9;
const COST_EPS: f64 = 1e-10;
const REBUILD_EVERY: usize = 40;

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("LP data: {0}")]
    InvalidData(String),
    #[error("simplex exceeded {0} pivots")]
    PivotLimit(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64, pivots: usize },
    /// `A·ray ≤ 0`, `cᵀray > 0` and `ray_j ≥ 0` for every sign-constrained `j`.
    Unbounded { ray: Vec<f64>, pivots: usize },
}

/// Solves `max cᵀx s.t. a x ≤ b, x ≥ 0`; requires every `b_i ≥ 0`.
pub fn maximize(c: &[f64], a: &Mat, b: &[f64]) -> Result<LpOutcome, LpError> {
    maximize_with_free(c, a, b, &vec![false; c.len()])
}

/// As [`maximize`] with `x_j` unrestricted in sign wherever `free[j]`.
pub fn maximize_with_free(
    c: &[f64],
    a: &Mat,
    b: &[f64],
    free: &[bool],
) -> Result<LpOutcome, LpError> {
    let (m, nv) = a.shape();
    if c.len() != nv || b.len() != m || free.len() != nv {
        return Err(LpError::InvalidData(format!(
            "c has {} entries, b has {}, matrix is {m}x{nv}",
            c.len(),
            b.len()
        )));
    }
    if let Some(i) = b.iter().position(|v| !(*v >= 0.0)) {
        return Err(LpError::InvalidData(format!("b[{i}] = {} is not >= 0", b[i])));
    }
    let width = nv + m + 1;
    let rhs = nv + m;
    // [A | I | b] with the slack columns appended
    let mut full = vec![0.0; m * width];
    for i in 0..m {
        let row = &mut full[i * width..(i + 1) * width];
        row[..nv].copy_from_slice(a.row(i));
        row[nv + i] = 1.0;
        row[rhs] = b[i];
    }
    let is_free = |j: usize| j < nv && free[j];
    let mut cost = vec![0.0; nv + m];
    cost[..nv].copy_from_slice(c);

    let mut t = full.clone();
    // reduced costs; the last entry holds minus the objective value
    let mut obj = vec![0.0; width];
    obj[..nv].copy_from_slice(c);
    let mut basis: Vec<usize> = (nv..nv + m).collect();

    let limit = 50 * (m + nv + 10);
    let mut pivots = 0;
    let mut since_rebuild = 0;
    let mut clean = true;
    loop {
        if since_rebuild >= REBUILD_EVERY {
            rebuild(&full, &cost, &basis, width, m, &mut t, &mut obj)?;
            since_rebuild = 0;
            clean = true;
        }
        let entering = (0..nv + m)
            .find(|&j| obj[j] > COST_EPS || (is_free(j) && obj[j] < -COST_EPS && !basis.contains(&j)))
            .map(|j| (j, if obj[j] > 0.0 { 1.0 } else { -1.0 }));
        let leaving = entering.map(|(q, dir)| ratio_test(&t, &basis, width, m, q, dir, &is_free));
        let done = match leaving {
            None => true,
            Some(None) => true,
            Some(Some(_)) => false,
        };
        if done && !clean {
            // verify the verdict on a freshly inverted basis
            since_rebuild = REBUILD_EVERY;
            continue;
        }
        match (entering, leaving) {
            (None, _) => {
                let mut x = vec![0.0; nv];
                for (i, &bv) in basis.iter().enumerate() {
                    if bv < nv {
                        let v = t[i * width + rhs];
                        x[bv] = if free[bv] { v } else { v.max(0.0) };
                    }
                }
                let value = c.iter().zip(&x).map(|(u, v)| u * v).sum();
                return Ok(LpOutcome::Optimal { x, value, pivots });
            }
            (Some((q, dir)), Some(None)) => {
                let mut ray = vec![0.0; nv];
                if q < nv {
                    ray[q] = dir;
                }
                for (i, &bv) in basis.iter().enumerate() {
                    if bv < nv {
                        ray[bv] = -dir * t[i * width + q];
                    }
                }
                return Ok(LpOutcome::Unbounded { ray, pivots });
            }
            (Some((q, _)), Some(Some(p))) => {
                pivots += 1;
                if pivots > limit {
                    return Err(LpError::PivotLimit(limit));
                }
                pivot(&mut t, &mut obj, width, m, p, q);
                basis[p] = q;
                since_rebuild += 1;
                clean = false;
            }
            (Some(_), None) => unreachable!(),
        }
    }
}

/// Bland's leaving row for column `q` moving in direction `dir`, or `None`
/// if unbounded. Rows with a free basic variable never block.
fn ratio_test(
    t: &[f64],
    basis: &[usize],
    width: usize,
    m: usize,
    q: usize,
    dir: f64,
    is_free: &dyn Fn(usize) -> bool,
) -> Option<usize> {
    let rhs = width - 1;
    let mut leave: Option<(usize, f64)> = None;
    for i in 0..m {
        let coef = dir * t[i * width + q];
        if coef <= PIVOT_EPS || is_free(basis[i]) {
            continue;
        }
        let ratio = t[i * width + rhs].max(0.0) / coef;
        leave = match leave {
            None => Some((i, ratio)),
            Some((p, best)) => {
                let tie = (ratio - best).abs() <= 1e-13 * best.abs().max(1.0);
                if (!tie && ratio < best) || (tie && basis[i] < basis[p]) {
                    Some((i, ratio))
                } else {
                    Some((p, best))
                }
            }
        };
    }
    leave.map(|(p, _)| p)
}

/// Recomputes `B⁻¹[A | I | b]` and the reduced costs for the given basis by
/// Gaussian elimination with partial pivoting.
fn rebuild(
    full: &[f64],
    cost: &[f64],
    basis: &[usize],
    width: usize,
    m: usize,
    t: &mut [f64],
    obj: &mut [f64],
) -> Result<(), LpError> {
    // augmented [B | A I b], eliminated in place
    let aw = m + width;
    let mut g = vec![0.0; m * aw];
    for i in 0..m {
        for (k, &bv) in basis.iter().enumerate() {
            g[i * aw + k] = full[i * width + bv];
        }
        g[i * aw + m..(i + 1) * aw].copy_from_slice(&full[i * width..(i + 1) * width]);
    }
    for col in 0..m {
        let p = (col..m)
            .max_by(|&x, &y| g[x * aw + col].abs().total_cmp(&g[y * aw + col].abs()))
            .expect("nonempty range");
        if g[p * aw + col].abs() < 1e-14 {
            return Err(LpError::InvalidData("basis became singular".into()));
        }
        if p != col {
            for j in 0..aw {
                g.swap(p * aw + j, col * aw + j);
            }
        }
        let inv = 1.0 / g[col * aw + col];
        for j in 0..aw {
            g[col * aw + j] *= inv;
        }
        for i in 0..m {
            if i == col {
                continue;
            }
            let f = g[i * aw + col];
            if f == 0.0 {
                continue;
            }
            for j in 0..aw {
                g[i * aw + j] -= f * g[col * aw + j];
            }
        }
    }
    for i in 0..m {
        t[i * width..(i + 1) * width].copy_from_slice(&g[i * aw + m..(i + 1) * aw]);
    }
    for j in 0..width {
        let mut z = 0.0;
        for (i, &bv) in basis.iter().enumerate() {
            z += cost[bv] * t[i * width + j];
        }
        obj[j] = if j < width - 1 { cost[j] - z } else { -z };
    }
    for &bv in basis {
        obj[bv] = 0.0;
    }
    Ok(())
}

fn pivot(t: &mut [f64], obj: &mut [f64], width: usize, m: usize, p: usize, q: usize) {
    let inv = 1.0 / t[p * width + q];
    for v in &mut t[p * width..(p + 1) * width] {
        *v *= inv;
    }
    t[p * width + q] = 1.0;
    let prow: Vec<f64> = t[p * width..(p + 1) * width].to_vec();
    for i in 0..m {
        if i == p {
            continue;
        }
        let f = t[i * width + q];
        if f == 0.0 {
            continue;
        }
        for (v, pv) in t[i * width..(i + 1) * width].iter_mut().zip(&prow) {
            *v -= f * pv;
        }
        t[i * width + q] = 0.0;
    }
    let f = obj[q];
    for (v, pv) in obj.iter_mut().zip(&prow) {
        *v -= f * pv;
    }
    obj[q] = 0.0;
}
