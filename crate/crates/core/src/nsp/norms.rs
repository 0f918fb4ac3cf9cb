//! The s-support norm and its dual, the top-s ℓ2 norm.
//!
//! The unit ball of the s-support norm is `D_s = conv{x : ‖x‖₀ ≤ s, ‖x‖₂ ≤ 1}`
//! and its dual norm is `u ↦ top_s_l2(u)`.

use crate::matcore::{rearrange_desc, top_s_l2_unchecked};

/// `‖v_T‖₂`, `‖v_T‖₁` and `‖v_{T^c}‖₁` for `T` the `s` largest magnitudes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TopSplit {
    pub head_l2: f64,
    pub head_l1: f64,
    pub tail_l1: f64,
}

pub fn top_split(v: &[f64], s: usize) -> TopSplit {
    let z = rearrange_desc(v);
    let s = s.min(z.len());
    let head_l2 = z[..s].iter().map(|x| x * x).sum::<f64>().sqrt();
    let head_l1 = z[..s].iter().sum();
    let tail_l1 = z[s..].iter().sum();
    TopSplit { head_l2, head_l1, tail_l1 }
}

/// Dual candidates `u_r = (z_1, …, z_{s−r−1}, a_r, …, a_r)` with `a_r` the
/// tail average `(Σ_{i ≥ s−r} z_i)/(r+1)`, built on the sorted magnitudes.
fn candidates(z: &[f64], s: usize) -> impl Iterator<Item = Vec<f64>> + '_ {
    let d = z.len();
    (0..s).map(move |r| {
        let h = s - r - 1;
        let tail: f64 = z[h..].iter().sum();
        let avg = tail / (r + 1) as f64;
        let mut u = z.to_vec();
        u[h..d].iter_mut().for_each(|x| *x = avg);
        u
    })
}

/// The s-support norm `‖w‖^{sp}_s`, the gauge of `D_s`.
///
/// Evaluated as `max_r ⟨|w|↓, u_r⟩ / top_s_l2(u_r)` over the `s` closed-form
/// dual candidates; the sorted-threshold index attains the maximum and every
/// other candidate is a valid lower bound, so no tie logic is needed.
pub fn support_norm(w: &[f64], s: usize) -> f64 {
    assert!(s >= 1 && s <= w.len(), "s must lie in 1..=n");
    let z = rearrange_desc(w);
    candidates(&z, s)
        .map(|u| {
            let den = top_s_l2_unchecked(&u, s);
            if den == 0.0 {
                0.0
            } else {
                z.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>() / den
            }
        })
        .fold(0.0, f64::max)
}

/// Whether `v ∈ c·D_s`, i.e. `‖v‖^{sp}_s ≤ c`.
pub fn in_scaled_support_ball(v: &[f64], s: usize, c: f64) -> bool {
    support_norm(v, s) <= c
}
