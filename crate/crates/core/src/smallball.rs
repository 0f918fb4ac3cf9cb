//! Monte Carlo estimators behind the small-ball lower bound.
//!
//! Throughout, `V = m^{−1/2} Σᵢ εᵢ φᵢ` for i.i.d. rows `φᵢ` and independent
//! Rademacher signs `εᵢ`. The rows are drawn from an [`EnsembleSpec`]
//! whose `rows` field is the number of measurements `m` and whose
//! `row_normalization` multiplies every entry (pass `1.0` for isotropic
//! rows). Logarithms are natural.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::dictionary::Dict;
use crate::ensembles::{
    linear_fit, moment_profile_from_samples, rng_from_seed, sample_matrix, small_ball_estimate,
    split_seed, std_dev, EnsembleError, EnsembleSpec, EntryLaw, MomentProfile, SimRng,
};
use crate::matcore::{dot, top_s_l2_unchecked, Mat, MatError};
use crate::nsp::{cone_infimum, sample_cone, ConeSpec, NspError};

pub const MIN_WIDTH_TRIALS: usize = 100;
pub const DEFAULT_BOUND_CONSTANT: f64 = 3.0;

#[derive(Debug, Error)]
pub enum SmallBallError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Nsp(#[from] NspError),
}

fn invalid<T>(msg: String) -> Result<T, SmallBallError> {
    Err(SmallBallError::InvalidArgument(msg))
}

fn sign(rng: &mut SimRng) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    (xs.iter().sum::<f64>() / n, std_dev(xs) / n.sqrt())
}

/// Mean empirical width estimate `m^{−1} E top_s_l2(Dᵀ V)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WidthEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n_trials: usize,
    pub s: usize,
    pub m: usize,
    /// `"D_s"`, or the `S_γ` description when the `(2 + γ⁻¹)` factor is applied.
    pub cone: String,
}

/// Width with rows drawn from `ensemble`; `gamma = Some(γ)` multiplies by
/// `2 + γ⁻¹`, which dominates the width of `S_γ`.
pub fn estimate_width(
    dict: &Dict,
    ensemble: &EnsembleSpec,
    s: usize,
    gamma: Option<f64>,
    n_trials: usize,
    seed: u64,
) -> Result<WidthEstimate, SmallBallError> {
    ensemble.validate()?;
    if ensemble.cols != dict.d() {
        return invalid(format!("rows have length {}, dictionary has d = {}", ensemble.cols, dict.d()));
    }
    let law = ensemble.law;
    let c = ensemble.row_normalization;
    estimate_width_with(dict, ensemble.rows, s, gamma, n_trials, seed, |rng, phi| {
        law.fill(rng, phi);
        if c != 1.0 {
            phi.iter_mut().for_each(|x| *x *= c);
        }
    })
}

/// Width for an arbitrary row sampler filling `φ ∈ R^d`.
pub fn estimate_width_with<F>(
    dict: &Dict,
    m: usize,
    s: usize,
    gamma: Option<f64>,
    n_trials: usize,
    seed: u64,
    mut sample_phi: F,
) -> Result<WidthEstimate, SmallBallError>
where
    F: FnMut(&mut SimRng, &mut [f64]),
{
    let (d, n) = (dict.d(), dict.n());
    if m == 0 || s == 0 || s > n {
        return invalid(format!("need m >= 1 and 1 <= s <= n, got m = {m}, s = {s}"));
    }
    if n_trials < MIN_WIDTH_TRIALS {
        return invalid(format!("n_trials = {n_trials} below {MIN_WIDTH_TRIALS}"));
    }
    let factor = match gamma {
        None => 1.0,
        Some(g) if g > 0.0 && g <= 1.0 => 2.0 + 1.0 / g,
        Some(g) => return invalid(format!("gamma = {g} outside (0, 1]")),
    };
    let mut phi = vec![0.0; d];
    let mut v = vec![0.0; d];
    let root_m = (m as f64).sqrt();
    let vals: Vec<f64> = (0..n_trials)
        .map(|t| {
            let mut rng = rng_from_seed(split_seed(seed, t as u64));
            v.iter_mut().for_each(|x| *x = 0.0);
            for _ in 0..m {
                sample_phi(&mut rng, &mut phi);
                let e = sign(&mut rng);
                for (a, b) in v.iter_mut().zip(&phi) {
                    *a += e * b;
                }
            }
            v.iter_mut().for_each(|x| *x /= root_m);
            factor * top_s_l2_unchecked(&dict.mat().matvec_t(&v), s) / m as f64
        })
        .collect();
    let (value, stderr) = mean_and_stderr(&vals);
    let cone = match gamma {
        None => "D_s".to_string(),
        Some(g) => format!("S_gamma(n={n}, s={s}, gamma={g})"),
    };
    Ok(WidthEstimate { value, stderr, n_trials, s, m, cone })
}

/// Outcome of the rearrangement bound `E[Σ_{i≤s}(z_i*)²]^{1/2} ≤ C √(s log(n/s))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaCheck {
    pub grid: Vec<(usize, usize)>,
    pub estimates: Vec<f64>,
    pub stderr: Vec<f64>,
    pub ratios: Vec<f64>,
    pub bound_constant: f64,
    pub n_trials: usize,
    pub passed: bool,
}

impl LemmaCheck {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,s,estimate,stderr,ratio,bound_constant,within\n");
        for k in 0..self.grid.len() {
            let (n, s) = self.grid[k];
            out.push_str(&format!(
                "{n},{s},{:.17e},{:.17e},{:.17e},{},{}\n",
                self.estimates[k],
                self.stderr[k],
                self.ratios[k],
                self.bound_constant,
                self.ratios[k] <= self.bound_constant
            ));
        }
        out
    }
}

/// Degrees of freedom `⌈2 log(n/s)⌉` of the weak-moment Student-t family.
pub fn log_moment_dof(n: usize, s: usize) -> u32 {
    (2.0 * (n as f64 / s as f64).ln()).ceil().max(1.0) as u32
}

/// Estimates `E[Σ_{i≤s}(z_i*)²]^{1/2}` at each `(n, s)` with `z` drawn by
/// `sampler(n, s, rng, z)`. Requires `1 ≤ s ≤ n/2` so that `log(n/s) > 0`.
pub fn check_rearrangement_lemma<F>(
    mut sampler: F,
    grid: &[(usize, usize)],
    n_trials: usize,
    bound_constant: f64,
    seed: u64,
) -> Result<LemmaCheck, SmallBallError>
where
    F: FnMut(usize, usize, &mut SimRng, &mut [f64]),
{
    if grid.is_empty() || n_trials < 2 {
        return invalid("need a nonempty grid and at least 2 trials".into());
    }
    if let Some(&(n, s)) = grid.iter().find(|(n, s)| *s == 0 || 2 * s > *n) {
        return invalid(format!("grid point (n={n}, s={s}) violates 1 <= s <= n/2"));
    }
    let mut estimates = Vec::with_capacity(grid.len());
    let mut stderr = Vec::with_capacity(grid.len());
    let mut ratios = Vec::with_capacity(grid.len());
    for (g, &(n, s)) in grid.iter().enumerate() {
        let mut rng = rng_from_seed(split_seed(seed, g as u64));
        let mut z = vec![0.0; n];
        let sq: Vec<f64> = (0..n_trials)
            .map(|_| {
                sampler(n, s, &mut rng, &mut z);
                top_s_l2_unchecked(&z, s).powi(2)
            })
            .collect();
        let (mean, se_mean) = mean_and_stderr(&sq);
        let est = mean.sqrt();
        // delta method for the square root
        let se = if est > 0.0 { se_mean / (2.0 * est) } else { 0.0 };
        estimates.push(est);
        stderr.push(se);
        ratios.push(est / (s as f64 * (n as f64 / s as f64).ln()).sqrt());
    }
    let passed = ratios.iter().all(|r| *r <= bound_constant);
    Ok(LemmaCheck { grid: grid.to_vec(), estimates, stderr, ratios, bound_constant, n_trials, passed })
}

/// Sampler of i.i.d. `law` coordinates for [`check_rearrangement_lemma`].
pub fn iid_sampler(law: EntryLaw) -> impl FnMut(usize, usize, &mut SimRng, &mut [f64]) {
    move |_, _, rng, z| law.fill(rng, z)
}

/// Sampler of standardized `StudentT(⌈2 log(n/s)⌉)` coordinates.
pub fn log_moment_t_sampler() -> impl FnMut(usize, usize, &mut SimRng, &mut [f64]) {
    |n, s, rng, z| EntryLaw::StudentT { dof: log_moment_dof(n, s) }.fill(rng, z)
}

/// `L^p` growth of `⟨a, V⟩`.
#[derive(Clone, Debug, Serialize)]
pub struct KhintchineCheck {
    pub profile: MomentProfile,
    /// Largest `p` estimated reliably, `log(n_trials)/2`.
    pub reliable_p_max: f64,
    /// Log-log slope of `‖⟨a, V⟩‖_{L^p}` over unflagged `p`.
    pub exponent: f64,
    /// `‖⟨a, V⟩‖_{L^p} ≤ 2 √(p/2) ‖⟨a, V⟩‖_{L²}` at every unflagged `p`.
    pub within_sqrt_p: bool,
    pub m: usize,
    pub n_trials: usize,
}

impl KhintchineCheck {
    pub fn to_csv(&self) -> String {
        let pr = &self.profile;
        let l2 = pr.estimates[0];
        let mut out = String::from("p,estimate,stderr,flagged,sqrt_p_bound\n");
        for k in 0..pr.p_values.len() {
            let p = pr.p_values[k];
            out.push_str(&format!(
                "{p},{:.17e},{:.17e},{},{:.17e}\n",
                pr.estimates[k],
                pr.stderr[k],
                pr.flagged[k],
                2.0 * (p / 2.0).sqrt() * l2
            ));
        }
        out
    }
}

/// Moment profile of `⟨a, V⟩` with rows from `ensemble` (`cols` = `dim a`).
/// Orders `p > log(n_trials)/2` are flagged as unreliable.
pub fn check_khintchine(
    ensemble: &EnsembleSpec,
    a: &[f64],
    p_max: f64,
    n_trials: usize,
    seed: u64,
) -> Result<KhintchineCheck, SmallBallError> {
    ensemble.validate()?;
    if a.len() != ensemble.cols {
        return invalid(format!("direction has length {}, rows have {}", a.len(), ensemble.cols));
    }
    if n_trials < 2 || !(p_max >= 2.0) {
        return invalid("need at least 2 trials and p_max >= 2".into());
    }
    let m = ensemble.rows;
    let root_m = (m as f64).sqrt();
    let c = ensemble.row_normalization;
    let mut rng = rng_from_seed(seed);
    let mut phi = vec![0.0; a.len()];
    let samples: Vec<f64> = (0..n_trials)
        .map(|_| {
            let mut acc = 0.0;
            for _ in 0..m {
                ensemble.law.fill(&mut rng, &mut phi);
                acc += sign(&mut rng) * c * dot(a, &phi);
            }
            acc / root_m
        })
        .collect();
    let mut profile = moment_profile_from_samples(&samples, p_max, split_seed(seed, 0xB007));
    let reliable_p_max = (n_trials as f64).ln() / 2.0;
    for (f, p) in profile.flagged.iter_mut().zip(&profile.p_values) {
        *f = *f || *p > reliable_p_max;
    }
    let ok: Vec<usize> = (0..profile.p_values.len()).filter(|&k| !profile.flagged[k]).collect();
    let exponent = if ok.len() >= 2 {
        let xs: Vec<f64> = ok.iter().map(|&k| profile.p_values[k].ln()).collect();
        let ys: Vec<f64> = ok.iter().map(|&k| profile.estimates[k].ln()).collect();
        linear_fit(&xs, &ys).0
    } else {
        f64::NAN
    };
    let l2 = profile.estimates[0];
    let within_sqrt_p = ok
        .iter()
        .all(|&k| profile.estimates[k] <= 2.0 * (profile.p_values[k] / 2.0).sqrt() * l2);
    Ok(KhintchineCheck { profile, reliable_p_max, exponent, within_sqrt_p, m, n_trials })
}

/// Monte Carlo sizes for [`check_lower_bound`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowerBoundSetup {
    /// The level `A > 0`.
    pub a_level: f64,
    pub t: f64,
    pub n_reps: usize,
    /// Cone points used both as small-ball directions and as infimum starts.
    pub n_cone_samples: usize,
    /// Draws of `ψ` per direction in the marginal tail estimate.
    pub n_tail_samples: usize,
    pub n_width_trials: usize,
    pub refine_iters: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowerBoundReport {
    pub m: usize,
    pub a_level: f64,
    pub t: f64,
    /// Estimated `Q_{2A}(S_γ; ψ)`.
    pub q_2a: f64,
    /// Estimated `(2 + γ⁻¹) W_m(D_s; ψ)`, dominating `W_m(S_γ; ψ)`.
    pub width: f64,
    /// `A√m Q_{2A} − 2√m W − A t`.
    pub rhs: f64,
    /// Sampled infimum of `‖Ψx‖₂` over the cone, per repetition.
    pub lhs: Vec<f64>,
    pub holds: usize,
    pub n_reps: usize,
    pub frequency: f64,
    /// `1 − e^{−t²/2}`.
    pub claimed_probability: f64,
}

impl LowerBoundReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rep,lhs,rhs,holds\n");
        for (r, l) in self.lhs.iter().enumerate() {
            out.push_str(&format!("{r},{l:.17e},{:.17e},{}\n", self.rhs, *l >= self.rhs));
        }
        out
    }
}

/// Checks `inf_{x∈S_γ} ‖Ψx‖₂ ≥ A√m Q_{2A} − 2√m W_m − A t` for
/// `Ψ = Φ D / √m`, i.e. rows `ψ = Dᵀφ/√m`, with `m = ensemble.rows`.
pub fn check_lower_bound(
    dict: &Dict,
    ensemble: &EnsembleSpec,
    cone: &ConeSpec,
    setup: &LowerBoundSetup,
    seed: u64,
) -> Result<LowerBoundReport, SmallBallError> {
    ensemble.validate()?;
    cone.validate()?;
    if ensemble.cols != dict.d() || cone.n != dict.n() {
        return invalid("ensemble, dictionary and cone sizes disagree".into());
    }
    if !(setup.a_level > 0.0 && setup.t > 0.0) {
        return invalid(format!("need A > 0 and t > 0, got {} and {}", setup.a_level, setup.t));
    }
    if setup.n_reps == 0 || setup.n_cone_samples == 0 || setup.n_tail_samples == 0 {
        return invalid("repetition and sample counts must be positive".into());
    }
    let m = ensemble.rows;
    let root_m = (m as f64).sqrt();
    let d = dict.d();

    let dirs = sample_cone(cone, setup.n_cone_samples, split_seed(seed, 1));
    let mut next_dir = dirs.iter().cycle();
    let (law, c) = (ensemble.law, ensemble.row_normalization);
    let dmat = dict.mat();
    let mut phi = vec![0.0; d];
    let q_2a = small_ball_estimate(
        |rng, psi| {
            law.fill(rng, &mut phi);
            dmat.matvec_t_into(&phi, psi);
            psi.iter_mut().for_each(|x| *x *= c / root_m);
        },
        |_| next_dir.next().expect("at least one direction").clone(),
        2.0 * setup.a_level,
        dirs.len(),
        setup.n_tail_samples,
        split_seed(seed, 2),
    );
    let width = estimate_width(
        dict,
        ensemble,
        cone.s,
        Some(cone.gamma),
        setup.n_width_trials,
        split_seed(seed, 3),
    )?
    .value;
    let rhs = setup.a_level * root_m * q_2a - 2.0 * root_m * width - setup.a_level * setup.t;

    let mut lhs = Vec::with_capacity(setup.n_reps);
    for r in 0..setup.n_reps {
        let phi_mat = sample_matrix(ensemble, split_seed(seed, 1000 + r as u64))?;
        let psi: Mat = phi_mat.matmul(dmat)?.scaled(1.0 / root_m);
        let (inf, _) =
            cone_infimum(&psi, cone, setup.n_cone_samples, setup.refine_iters, split_seed(seed, 4));
        lhs.push(inf);
    }
    let holds = lhs.iter().filter(|l| **l >= rhs).count();
    Ok(LowerBoundReport {
        m,
        a_level: setup.a_level,
        t: setup.t,
        q_2a,
        width,
        rhs,
        holds,
        n_reps: setup.n_reps,
        frequency: holds as f64 / setup.n_reps as f64,
        claimed_probability: 1.0 - (-setup.t * setup.t / 2.0).exp(),
        lhs,
    })
}
