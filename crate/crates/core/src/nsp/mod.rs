//! Null space property: the cone `S_γ`, LP certification of the NSP on
//! small instances and sampled estimates of the robust NSP constant.
//!
//! A matrix `A` has the NSP of order `s` when every nonzero `v ∈ ker A`
//! satisfies `‖v_T‖₁ < ‖v_{T^c}‖₁` for all `|T| ≤ s`. With a kernel basis
//! `B`, this is checked one support and sign pattern at a time:
//!
//! ```text
//! max σᵀ(Bw)_T   s.t.  ‖(Bw)_{T^c}‖₁ ≤ 1
//! ```
//!
//! with `w` free, and the property holds iff every optimum is below 1.

pub mod lp;
pub mod norms;

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combin::{binomial, Combinations};
use crate::ensembles::{rng_from_seed, split_seed, SimRng};
use crate::matcore::{kernel_basis, norm1, norm2, op_norm, Mat, MatError, DEFAULT_RANK_TOL};
use lp::{maximize_with_free, LpError, LpOutcome};
pub use norms::{support_norm, top_split, TopSplit};

pub const DEFAULT_NSP_TOL: f64 = 1e-7;
/// Largest `C(n, s)·2^s` that `certify_nsp` will enumerate.
pub const NSP_GUARD: u64 = 1_000_000;
/// Unit-norm slack in the cone membership test.
pub const SPHERE_TOL: f64 = 1e-9;
/// Samples whose tightness ratio is at most this count as near-boundary.
pub const NEAR_BOUNDARY: f64 = 1.05;

#[derive(Debug, Error)]
pub enum NspError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// `S_γ = {v ∈ S^{n−1} : ‖v_T‖₂ ≥ (γ/√s)‖v_{T^c}‖₁ for some |T| = s}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeSpec {
    pub n: usize,
    pub s: usize,
    pub gamma: f64,
}

impl ConeSpec {
    pub fn new(n: usize, s: usize, gamma: f64) -> Result<Self, NspError> {
        let c = Self { n, s, gamma };
        c.validate()?;
        Ok(c)
    }

    /// Requires `1 ≤ s ≤ n` and `0 < γ ≤ 1`.
    pub fn validate(&self) -> Result<(), NspError> {
        if self.s == 0 || self.s > self.n {
            return Err(NspError::InvalidArgument(format!("s = {} outside 1..={}", self.s, self.n)));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(NspError::InvalidArgument(format!("gamma = {} outside (0, 1]", self.gamma)));
        }
        Ok(())
    }

    /// Side-by-side values `(‖v_T‖₂, (γ/√s)‖v_{T^c}‖₁)` at the best `T`.
    fn sides(&self, v: &[f64]) -> (f64, f64) {
        let sp = top_split(v, self.s);
        (sp.head_l2, self.gamma / (self.s as f64).sqrt() * sp.tail_l1)
    }

    /// `‖v_T‖₂ / ((γ/√s)‖v_{T^c}‖₁)`, infinite for s-sparse `v`.
    pub fn tightness(&self, v: &[f64]) -> f64 {
        let (lhs, rhs) = self.sides(v);
        if rhs == 0.0 {
            f64::INFINITY
        } else {
            lhs / rhs
        }
    }

    pub fn description(&self) -> String {
        format!("S_gamma(n={}, s={}, gamma={})", self.n, self.s, self.gamma)
    }
}

/// Exact membership in `S_γ`; the top-`s` support is the optimal `T`
/// since it maximizes the left side and minimizes the right side at once.
pub fn in_cone(v: &[f64], cone: &ConeSpec) -> bool {
    if v.len() != cone.n || (norm2(v) - 1.0).abs() > SPHERE_TOL {
        return false;
    }
    let (lhs, rhs) = cone.sides(v);
    lhs >= rhs
}

/// Unit vectors in `S_γ`: about half exactly s-sparse with random signs, the
/// rest an s-sparse head plus a tail scaled so the cone inequality is tight
/// within `[1, 1.05]`. Sample `i` depends only on `(seed, i)`.
pub fn sample_cone(cone: &ConeSpec, n_samples: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..n_samples)
        .map(|i| {
            let mut rng = rng_from_seed(split_seed(seed, i as u64));
            cone_point(cone, &mut rng)
        })
        .collect()
}

fn cone_point(cone: &ConeSpec, rng: &mut SimRng) -> Vec<f64> {
    let near = cone.s < cone.n && rng.random::<bool>();
    if near {
        if let Some(v) = near_boundary_point(cone, rng) {
            return v;
        }
    }
    sparse_point(cone, rng)
}

fn sparse_point(cone: &ConeSpec, rng: &mut SimRng) -> Vec<f64> {
    loop {
        let mut v = vec![0.0; cone.n];
        for j in sample_indices(rng, cone.n, cone.s) {
            v[j] = rng.sample(StandardNormal);
        }
        let nv = norm2(&v);
        if nv > 0.0 && v.iter().filter(|x| **x != 0.0).count() == cone.s {
            v.iter_mut().for_each(|x| *x /= nv);
            return v;
        }
    }
}

fn random_sign(rng: &mut SimRng) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

fn near_boundary_point(cone: &ConeSpec, rng: &mut SimRng) -> Option<Vec<f64>> {
    let (n, s) = (cone.n, cone.s);
    let order = sample_indices(rng, n, n).into_vec();
    let (head_idx, tail_idx) = order.split_at(s);
    let head: Vec<f64> = head_idx.iter().map(|_| 1.0 + rng.random::<f64>()).collect();
    let head_l2 = norm2(&head);
    let head_min = head.iter().copied().fold(f64::INFINITY, f64::min);
    let target = rng.random_range(1.0 + 1e-9..NEAR_BOUNDARY);
    let k = rng.random_range(1..=tail_idx.len());
    let mut tail: Vec<f64> = (0..k).map(|_| 1.0 - rng.random::<f64>()).collect();

    // tail scale c with ‖h‖₂ = target · (γ/√s) · c‖t‖₁
    let fit = |t: &[f64]| head_l2 * (s as f64).sqrt() / (cone.gamma * target * norm1(t));
    let mut c = fit(&tail);
    let tmax = tail.iter().copied().fold(0.0, f64::max);
    if c * tmax >= head_min {
        // spread a flat tail over the whole complement
        tail = vec![1.0; tail_idx.len()];
        c = fit(&tail);
        if c >= head_min {
            return None;
        }
    }
    let mut v = vec![0.0; n];
    for (&j, &h) in head_idx.iter().zip(&head) {
        v[j] = h * random_sign(rng);
    }
    for (&j, &t) in tail_idx.iter().zip(&tail) {
        v[j] = c * t * random_sign(rng);
    }
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    in_cone(&v, cone).then_some(v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NspStatus {
    CertifiedHolds,
    CertifiedFails,
    EstimateOnly,
    InfeasibleAtSize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NspReport {
    pub order: usize,
    pub status: NspStatus,
    pub gamma: Option<f64>,
    pub tau_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness_support: Option<Vec<usize>>,
    pub lp_count: usize,
    pub tol: f64,
    /// Largest bounded LP optimum over all `(T, σ)`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_lp_value: Option<f64>,
    /// Number of `(T, σ)` programs that were unbounded.
    #[serde(default)]
    pub unbounded_count: usize,
    /// Minimizing cone point of the robust-constant estimate.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub minimizer: Option<Vec<f64>>,
}

impl NspReport {
    fn empty(order: usize, status: NspStatus, tol: f64) -> Self {
        Self {
            order,
            status,
            gamma: None,
            tau_hat: None,
            witness: None,
            witness_support: None,
            lp_count: 0,
            tol,
            max_lp_value: None,
            unbounded_count: 0,
            minimizer: None,
        }
    }

    /// Whether the largest LP optimum lies within `band` of 1.
    pub fn is_boundary(&self, band: f64) -> bool {
        self.unbounded_count == 0 && self.max_lp_value.is_some_and(|v| (v - 1.0).abs() <= band)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Independent recomputation of a violation: `v ≠ 0`, `‖a v‖₂` small
/// relative to `‖a‖_F`, and `‖v_T‖₁ ≥ ‖v_{T^c}‖₁`.
pub fn verify_witness(a: &Mat, v: &[f64], support: &[usize]) -> bool {
    let nv = norm2(v);
    if nv == 0.0 || v.len() != a.cols() {
        return false;
    }
    let kern_ok = norm2(&a.matvec(v)) <= 1e-9 * nv * a.frobenius().max(1.0);
    let on: f64 = support.iter().map(|&j| v[j].abs()).sum();
    let off = norm1(v) - on;
    kern_ok && on >= off
}

/// Decides the NSP of order `s` by one LP per support and sign pattern.
pub fn certify_nsp(a: &Mat, s: usize, tol: f64) -> Result<NspReport, NspError> {
    let n = a.cols();
    if s == 0 || s > n {
        return Err(NspError::InvalidArgument(format!("order {s} outside 1..={n}")));
    }
    if !(tol >= 0.0 && tol < 1.0) {
        return Err(NspError::InvalidArgument(format!("tol = {tol} outside [0, 1)")));
    }
    let count = binomial(n, s).and_then(|c| c.checked_mul(1u64.checked_shl(s as u32)?));
    if count.is_none_or(|c| c > NSP_GUARD) {
        return Ok(NspReport::empty(s, NspStatus::InfeasibleAtSize, tol));
    }
    let b = kernel_basis(a, DEFAULT_RANK_TOL)?;
    let k = b.cols();
    let mut report = NspReport::empty(s, NspStatus::CertifiedHolds, tol);
    if k == 0 {
        return Ok(report);
    }

    let mut max_value = f64::NEG_INFINITY;
    // first verified violation above the margin, then first at the boundary
    let mut hard: Option<(Vec<f64>, Vec<usize>)> = None;
    let mut soft: Option<(Vec<f64>, Vec<usize>)> = None;
    for support in Combinations::new(n, s) {
        let in_t: Vec<bool> = (0..n).map(|j| support.contains(&j)).collect();
        let rest: Vec<usize> = (0..n).filter(|&j| !in_t[j]).collect();
        let lp_a = pattern_constraints(&b, &rest);
        let free: Vec<bool> = (0..k + rest.len()).map(|j| j < k).collect();
        let mut lp_b = vec![0.0; 2 * rest.len() + 1];
        lp_b[2 * rest.len()] = 1.0;
        for mask in 0..(1u32 << s) {
            let sigma: Vec<f64> =
                (0..s).map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
            let mut c = vec![0.0; k + rest.len()];
            for (&j, &sg) in support.iter().zip(&sigma) {
                for l in 0..k {
                    c[l] += sg * b.get(j, l);
                }
            }
            report.lp_count += 1;
            let (w, value, unbounded) = match maximize_with_free(&c, &lp_a, &lp_b, &free)? {
                LpOutcome::Optimal { x, value, .. } => (x[..k].to_vec(), value, false),
                LpOutcome::Unbounded { ray, .. } => (ray[..k].to_vec(), f64::INFINITY, true),
            };
            if unbounded {
                report.unbounded_count += 1;
            } else {
                max_value = max_value.max(value);
            }
            if value >= 1.0 - tol {
                let mut v = b.matvec(&w);
                let nv = norm2(&v);
                if nv > 0.0 {
                    v.iter_mut().for_each(|x| *x /= nv);
                }
                if verify_witness(a, &v, &support) {
                    let slot = if value > 1.0 + tol { &mut hard } else { &mut soft };
                    if slot.is_none() {
                        *slot = Some((v, support.clone()));
                    }
                }
            }
        }
    }
    report.max_lp_value = max_value.is_finite().then_some(max_value);
    let above = report.unbounded_count > 0 || max_value > 1.0 + tol;
    let boundary = max_value >= 1.0 - tol;
    report.status = if let Some((v, t)) = hard.or(soft) {
        report.witness = Some(v);
        report.witness_support = Some(t);
        NspStatus::CertifiedFails
    } else if above || boundary {
        NspStatus::EstimateOnly
    } else {
        NspStatus::CertifiedHolds
    };
    Ok(report)
}

/// `[B_c, −I; −B_c, −I; 0, 1ᵀ]` over variables `(w free, t ≥ 0)`.
fn pattern_constraints(b: &Mat, rest: &[usize]) -> Mat {
    let k = b.cols();
    let r = rest.len();
    let mut m = Mat::zeros(2 * r + 1, k + r);
    for (i, &j) in rest.iter().enumerate() {
        for l in 0..k {
            let v = b.get(j, l);
            m.set(2 * i, l, v);
            m.set(2 * i + 1, l, -v);
        }
        m.set(2 * i, k + i, -1.0);
        m.set(2 * i + 1, k + i, -1.0);
        m.set(2 * r, k + i, 1.0);
    }
    m
}

/// Scales the tail so that `v ∈ S_γ` and renormalizes; `None` for `v = 0`.
fn repair(v: &mut [f64], cone: &ConeSpec) -> Option<()> {
    let nv = norm2(v);
    if !(nv > 0.0) {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= nv);
    let (lhs, rhs) = cone.sides(v);
    if lhs < rhs {
        let head = crate::matcore::argsort_desc(v);
        let c = lhs / rhs * (1.0 - 1e-12);
        for &j in &head[cone.s..] {
            v[j] *= c;
        }
        let nv = norm2(v);
        v.iter_mut().for_each(|x| *x /= nv);
    }
    Some(())
}

/// Smallest `‖Av‖₂` found over `sample_cone(cone, n_samples, seed)`, each
/// point refined by `refine_iters` projected gradient steps on `‖Av‖₂²`,
/// with the minimizing point. Sizes must already agree.
pub fn cone_infimum(
    a: &Mat,
    cone: &ConeSpec,
    n_samples: usize,
    refine_iters: usize,
    seed: u64,
) -> (f64, Vec<f64>) {
    let l = op_norm(a, 2_000, 1e-12);
    let step = if l > 0.0 { 0.5 / (l * l) } else { 0.0 };
    let mut best = f64::INFINITY;
    let mut arg = Vec::new();
    for mut v in sample_cone(cone, n_samples, seed) {
        let mut f = norm2(&a.matvec(&v));
        if f < best {
            best = f;
            arg = v.clone();
        }
        for _ in 0..refine_iters {
            if step == 0.0 {
                break;
            }
            let g = a.matvec_t(&a.matvec(&v));
            let mut next: Vec<f64> = v.iter().zip(&g).map(|(x, gx)| x - step * gx).collect();
            if repair(&mut next, cone).is_none() || !in_cone(&next, cone) {
                break;
            }
            v = next;
            f = norm2(&a.matvec(&v));
            if f < best {
                best = f;
                arg = v.clone();
            }
        }
    }
    (best, arg)
}

/// Sampled estimate of the smallest `τ` with `inf_{v∈S_γ} ‖Av‖₂ ≥ 1/τ`.
///
/// Each cone sample is refined by `refine_iters` projected gradient steps
/// on `‖Av‖₂²`. The result is an upper bound on the infimum only, so the
/// status is always `estimate_only`.
pub fn estimate_robust_tau(
    a: &Mat,
    cone: &ConeSpec,
    n_samples: usize,
    refine_iters: usize,
    seed: u64,
) -> Result<NspReport, NspError> {
    cone.validate()?;
    if a.cols() != cone.n {
        return Err(NspError::InvalidArgument(format!(
            "matrix has {} columns, cone has n = {}",
            a.cols(),
            cone.n
        )));
    }
    if n_samples == 0 {
        return Err(NspError::InvalidArgument("n_samples must be at least 1".into()));
    }
    let (best, arg) = cone_infimum(a, cone, n_samples, refine_iters, seed);
    let mut report = NspReport::empty(cone.s, NspStatus::EstimateOnly, 0.0);
    report.gamma = Some(cone.gamma);
    report.tau_hat = Some(1.0 / best);
    report.minimizer = Some(arg);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_matrix, EnsembleSpec, EntryLaw};

    #[test]
    fn cone_membership_examples() {
        let c = ConeSpec { n: 100, s: 1, gamma: 1.0 };
        let mut e1 = vec![0.0; 100];
        e1[0] = 1.0;
        assert!(in_cone(&e1, &c));
        let flat = vec![0.1; 100];
        assert!(!in_cone(&flat, &c));
        let not_unit = vec![0.0; 100];
        assert!(!in_cone(&not_unit, &c));
    }

    #[test]
    fn membership_matches_enumeration() {
        let mut rng = rng_from_seed(12);
        for trial in 0..10_000 {
            let s = 1 + trial % 3;
            let gamma = [0.3, 0.6, 0.9][trial % 3];
            let cone = ConeSpec::new(10, s, gamma).unwrap();
            let mut v: Vec<f64> = (0..10).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            // sparsify some so both outcomes occur
            for x in v.iter_mut().skip(s + trial % 7) {
                *x *= 0.05;
            }
            let nv = norm2(&v);
            v.iter_mut().for_each(|x| *x /= nv);
            let total = norm1(&v);
            let brute = Combinations::new(10, s).any(|t| {
                let l2 = t.iter().map(|&j| v[j] * v[j]).sum::<f64>().sqrt();
                let l1: f64 = t.iter().map(|&j| v[j].abs()).sum();
                l2 >= gamma / (s as f64).sqrt() * (total - l1)
            });
            assert_eq!(in_cone(&v, &cone), brute, "trial {trial}");
        }
    }

    #[test]
    fn cone_samples() {
        let cone = ConeSpec::new(64, 4, 0.5).unwrap();
        let pts = sample_cone(&cone, 2_000, 3);
        assert!(pts.iter().all(|v| in_cone(v, &cone)));
        let near = pts.iter().filter(|v| cone.tightness(v) <= NEAR_BOUNDARY).count();
        assert!(near as f64 >= 0.4 * pts.len() as f64, "{near}");
        let sparse: Vec<_> = pts.iter().filter(|v| cone.tightness(v).is_infinite()).collect();
        assert!(!sparse.is_empty());
        assert!(sparse.iter().all(|v| v.iter().filter(|x| **x != 0.0).count() == 4));
        // prefix stability
        assert_eq!(sample_cone(&cone, 10, 3), pts[..10].to_vec());
    }

    #[test]
    fn identity_has_trivial_kernel() {
        let r = certify_nsp(&Mat::identity(4), 2, DEFAULT_NSP_TOL).unwrap();
        assert_eq!(r.status, NspStatus::CertifiedHolds);
        assert_eq!(r.lp_count, 0);
    }

    #[test]
    fn symmetric_kernel_fails() {
        let a = Mat::from_rows(&[vec![1.0, -1.0]]).unwrap();
        let r = certify_nsp(&a, 1, DEFAULT_NSP_TOL).unwrap();
        assert_eq!(r.status, NspStatus::CertifiedFails);
        let w = r.witness.unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((w[0].abs() - h).abs() < 1e-12 && (w[1].abs() - h).abs() < 1e-12);
        assert!(w[0] * w[1] > 0.0);
        assert!((r.max_lp_value.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn guard_reports_infeasible() {
        let a = Mat::zeros(2, 40);
        let r = certify_nsp(&a, 6, DEFAULT_NSP_TOL).unwrap();
        assert_eq!(r.status, NspStatus::InfeasibleAtSize);
        assert!(certify_nsp(&a, 0, DEFAULT_NSP_TOL).is_err());
    }

    #[test]
    fn unbounded_pattern_fails() {
        // kernel spanned by e₁: ‖v_{T^c}‖₁ = 0 for T = {0}
        let a = Mat::from_rows(&[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        let r = certify_nsp(&a, 1, DEFAULT_NSP_TOL).unwrap();
        assert_eq!(r.status, NspStatus::CertifiedFails);
        assert!(r.unbounded_count > 0);
        assert_eq!(r.witness_support, Some(vec![0]));
        assert!(verify_witness(&a, r.witness.as_ref().unwrap(), &[0]));
    }

    #[test]
    fn row_scaling_and_order_monotonicity() {
        for seed in 0..20 {
            let a = sample_matrix(&EnsembleSpec::new(EntryLaw::Gaussian, 6, 10, 1.0), seed).unwrap();
            let r1 = certify_nsp(&a, 1, DEFAULT_NSP_TOL).unwrap();
            let r2 = certify_nsp(&a, 2, DEFAULT_NSP_TOL).unwrap();
            let r3 = certify_nsp(&a.scaled(3.0), 2, DEFAULT_NSP_TOL).unwrap();
            assert_eq!(r2.status, r3.status, "seed {seed}");
            if r2.status == NspStatus::CertifiedHolds {
                assert_eq!(r1.status, NspStatus::CertifiedHolds);
            }
            if let Some(w) = &r2.witness {
                assert!(verify_witness(&a, w, r2.witness_support.as_ref().unwrap()));
            }
        }
    }

    #[test]
    fn robust_tau_scaling_examples() {
        let cone = ConeSpec::new(6, 2, 0.5).unwrap();
        let r = estimate_robust_tau(&Mat::identity(6), &cone, 50, 5, 1).unwrap();
        assert_eq!(r.status, NspStatus::EstimateOnly);
        assert!((r.tau_hat.unwrap() - 1.0).abs() < 1e-12);
        let r = estimate_robust_tau(&Mat::identity(6).scaled(2.0), &cone, 50, 5, 1).unwrap();
        assert!((r.tau_hat.unwrap() - 0.5).abs() < 1e-12);
        assert!(in_cone(r.minimizer.as_ref().unwrap(), &cone));
    }

    #[test]
    fn robust_tau_on_diagonal_against_grid() {
        let a = Mat::diag(&[1.0, 0.1]).unwrap();
        let cone = ConeSpec::new(2, 1, 0.5).unwrap();
        let mut grid_min = f64::INFINITY;
        for i in 0..1_000_000 {
            let th = std::f64::consts::TAU * i as f64 / 1e6;
            let v = [th.cos(), th.sin()];
            if in_cone(&v, &cone) {
                grid_min = grid_min.min(norm2(&a.matvec(&v)));
            }
        }
        let r = estimate_robust_tau(&a, &cone, 20, 50, 9).unwrap();
        let tau_grid = 1.0 / grid_min;
        assert!((r.tau_hat.unwrap() - tau_grid).abs() <= 0.05 * tau_grid);
        let unrefined = estimate_robust_tau(&a, &cone, 20, 0, 9).unwrap();
        assert!(r.tau_hat.unwrap() >= unrefined.tau_hat.unwrap());
    }

    #[test]
    fn robust_tau_monotone_in_samples() {
        let a = sample_matrix(&EnsembleSpec::measurement(EntryLaw::Gaussian, 12, 24), 2).unwrap();
        let cone = ConeSpec::new(24, 2, 0.5).unwrap();
        let mut last = 0.0;
        for k in [1, 5, 20, 80] {
            let t = estimate_robust_tau(&a, &cone, k, 10, 4).unwrap().tau_hat.unwrap();
            assert!(t >= last);
            last = t;
        }
    }

    #[test]
    fn report_json_shape() {
        let a = Mat::from_rows(&[vec![1.0, -1.0]]).unwrap();
        let r = certify_nsp(&a, 1, DEFAULT_NSP_TOL).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["status"], "certified_fails");
        assert_eq!(v["order"], 1);
        assert!(v["gamma"].is_null() && v["tau_hat"].is_null());
        assert_eq!(v["lp_count"], 4);
        let back: NspReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }
}
