//! Random measurement and dictionary laws.
//!
//! Every sampler here is a pure function of `(spec, seed)`. Streams come
//! from ChaCha8 seeded through [`SeedableRng::seed_from_u64`], and child
//! streams are derived with [`split_seed`], a SplitMix64 mix of the parent
//! seed and the stream index. Both algorithms are fixed, so a given seed
//! reproduces the same matrix bit-for-bit on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Open01, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matcore::{dot, Mat};

pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for stream `index` of `seed`: `splitmix64(seed ⊕ splitmix64(index))`.
#[inline]
pub fn split_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

#[derive(Debug, Error, PartialEq)]
pub enum EnsembleError {
    #[error("invalid ensemble: {0}")]
    InvalidSpec(String),
}

/// Entry distribution. Every law with finite variance is standardized to
/// mean 0 and variance 1; Cauchy and Student-t with `dof ≤ 2` are raw.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "LawRepr", into = "LawRepr")]
pub enum EntryLaw {
    Gaussian,
    Rademacher,
    Laplace,
    StudentT { dof: u32 },
    Cauchy,
}

/// Wire form `{"kind": "student_t", "dof": 12}`; unknown keys rejected.
#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LawRepr {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dof: Option<u32>,
}

impl TryFrom<LawRepr> for EntryLaw {
    type Error = String;

    fn try_from(r: LawRepr) -> Result<Self, String> {
        let law = match (r.kind.as_str(), r.dof) {
            ("gaussian", None) => EntryLaw::Gaussian,
            ("rademacher", None) => EntryLaw::Rademacher,
            ("laplace", None) => EntryLaw::Laplace,
            ("cauchy", None) => EntryLaw::Cauchy,
            ("student_t", Some(dof)) => EntryLaw::StudentT { dof },
            ("student_t", None) => return Err("student_t requires `dof`".into()),
            (k, Some(_)) if k != "student_t" => return Err(format!("`dof` not allowed for {k}")),
            (k, _) => return Err(format!("unknown law `{k}`")),
        };
        Ok(law)
    }
}

impl From<EntryLaw> for LawRepr {
    fn from(l: EntryLaw) -> Self {
        let (kind, dof) = match l {
            EntryLaw::Gaussian => ("gaussian", None),
            EntryLaw::Rademacher => ("rademacher", None),
            EntryLaw::Laplace => ("laplace", None),
            EntryLaw::StudentT { dof } => ("student_t", Some(dof)),
            EntryLaw::Cauchy => ("cauchy", None),
        };
        LawRepr { kind: kind.into(), dof }
    }
}

impl EntryLaw {
    pub fn validate(&self) -> Result<(), EnsembleError> {
        match self {
            EntryLaw::StudentT { dof: 0 } => {
                Err(EnsembleError::InvalidSpec("student_t needs dof >= 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Whether samples have unit variance.
    pub fn is_standardized(&self) -> bool {
        match self {
            EntryLaw::StudentT { dof } => *dof >= 3,
            EntryLaw::Cauchy => false,
            _ => true,
        }
    }

    pub fn tag(&self) -> String {
        match self {
            EntryLaw::Gaussian => "gaussian".into(),
            EntryLaw::Rademacher => "rademacher".into(),
            EntryLaw::Laplace => "laplace".into(),
            EntryLaw::StudentT { dof } => format!("student_t{dof}"),
            EntryLaw::Cauchy => "cauchy".into(),
        }
    }

    /// Draws one entry.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            EntryLaw::Gaussian => rng.sample(StandardNormal),
            EntryLaw::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            EntryLaw::Laplace => {
                // Inverse CDF with scale 1/√2 (variance 2b² = 1).
                let u: f64 = rng.sample::<f64, _>(Open01) - 0.5;
                -std::f64::consts::FRAC_1_SQRT_2 * u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }
            EntryLaw::StudentT { dof } => {
                let z: f64 = rng.sample(StandardNormal);
                let chi2: f64 = (0..dof)
                    .map(|_| {
                        let g: f64 = rng.sample(StandardNormal);
                        g * g
                    })
                    .sum();
                let t = z / (chi2 / f64::from(dof)).sqrt();
                if dof >= 3 {
                    t / (f64::from(dof) / f64::from(dof - 2)).sqrt()
                } else {
                    t
                }
            }
            EntryLaw::Cauchy => {
                let u: f64 = rng.sample(Open01);
                (std::f64::consts::PI * (u - 0.5)).tan()
            }
        }
    }

    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for x in out {
            *x = self.sample(rng);
        }
    }
}

/// Declarative random matrix: i.i.d. entries from `law`, each multiplied
/// by `row_normalization` (e.g. `1/√m` for measurements, `1/√d` for
/// dictionaries).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub law: EntryLaw,
    pub rows: usize,
    pub cols: usize,
    pub row_normalization: f64,
}

impl EnsembleSpec {
    pub fn new(law: EntryLaw, rows: usize, cols: usize, row_normalization: f64) -> Self {
        Self { law, rows, cols, row_normalization }
    }

    /// Measurement ensemble scaled by `1/√rows`.
    pub fn measurement(law: EntryLaw, rows: usize, cols: usize) -> Self {
        Self::new(law, rows, cols, 1.0 / (rows as f64).sqrt())
    }

    pub fn validate(&self) -> Result<(), EnsembleError> {
        self.law.validate()?;
        if self.rows == 0 || self.cols == 0 {
            return Err(EnsembleError::InvalidSpec(format!(
                "shape {}x{} must be nonempty",
                self.rows, self.cols
            )));
        }
        if !(self.row_normalization > 0.0 && self.row_normalization.is_finite()) {
            return Err(EnsembleError::InvalidSpec(format!(
                "row_normalization must be positive, got {}",
                self.row_normalization
            )));
        }
        Ok(())
    }
}

/// Samples `spec` from the stream of `seed`, row-major.
pub fn sample_matrix(spec: &EnsembleSpec, seed: u64) -> Result<Mat, EnsembleError> {
    spec.validate()?;
    let mut rng = rng_from_seed(seed);
    Ok(sample_matrix_with(spec, &mut rng))
}

pub fn sample_matrix_with<R: Rng + ?Sized>(spec: &EnsembleSpec, rng: &mut R) -> Mat {
    let mut data = vec![0.0; spec.rows * spec.cols];
    spec.law.fill(rng, &mut data);
    let c = spec.row_normalization;
    if c != 1.0 {
        data.iter_mut().for_each(|x| *x *= c);
    }
    // Every law produces finite draws (Open01 keeps Laplace/Cauchy finite).
    Mat::new(spec.rows, spec.cols, data).expect("samplers produce finite entries")
}

/// Empirical `L^p` norms on an integer `p` grid with a log-log growth fit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MomentProfile {
    pub p_values: Vec<f64>,
    pub estimates: Vec<f64>,
    /// Bootstrap standard error of each `L^p` estimate.
    pub stderr: Vec<f64>,
    /// Set where the bootstrap relative standard error of `E|ξ|^p`
    /// exceeds [`UNSTABLE_REL_SE`].
    pub flagged: Vec<bool>,
    pub lambda_hat: f64,
    pub alpha_hat: f64,
    /// Allowed relative violation of `L^p` monotonicity. Power means of a
    /// single empirical sample are exactly monotone, so only rounding slack.
    pub slack: f64,
    pub n_samples: usize,
}

pub const UNSTABLE_REL_SE: f64 = 0.2;
pub const BOOTSTRAP_RESAMPLES: usize = 20;

impl MomentProfile {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("p,estimate,stderr,flagged\n");
        for k in 0..self.p_values.len() {
            s.push_str(&format!(
                "{},{:.17e},{:.17e},{}\n",
                self.p_values[k], self.estimates[k], self.stderr[k], self.flagged[k]
            ));
        }
        s
    }

    pub fn is_monotone(&self) -> bool {
        self.estimates.windows(2).all(|w| w[1] >= w[0] * (1.0 - self.slack))
    }
}

/// Draws `n_samples` entries of `law` and profiles their moments for
/// `p ∈ {2, …, ⌈p_max⌉}`.
pub fn moment_profile(law: EntryLaw, p_max: f64, n_samples: usize, seed: u64) -> MomentProfile {
    let mut rng = rng_from_seed(seed);
    let samples: Vec<f64> = (0..n_samples).map(|_| law.sample(&mut rng)).collect();
    moment_profile_from_samples(&samples, p_max, split_seed(seed, 0xB007))
}

/// Moment profile of an arbitrary scalar sample.
pub fn moment_profile_from_samples(samples: &[f64], p_max: f64, seed: u64) -> MomentProfile {
    let top = p_max.max(2.0).ceil() as i32;
    let ps: Vec<i32> = (2..=top).collect();
    let n = samples.len();
    let abs: Vec<f64> = samples.iter().map(|x| x.abs()).collect();
    let scale = abs.iter().fold(0.0f64, |m, x| m.max(*x));
    let raw = raw_moments(&abs, None, scale, &ps);

    let mut boot = vec![Vec::with_capacity(BOOTSTRAP_RESAMPLES); ps.len()];
    let mut rng = rng_from_seed(seed);
    let mut idx = vec![0usize; n];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        idx.iter_mut().for_each(|i| *i = rng.random_range(0..n.max(1)));
        let m = raw_moments(&abs, Some(&idx), scale, &ps);
        for (k, v) in m.into_iter().enumerate() {
            boot[k].push(v);
        }
    }

    let mut estimates = Vec::with_capacity(ps.len());
    let mut stderr = Vec::with_capacity(ps.len());
    let mut flagged = Vec::with_capacity(ps.len());
    for (k, &p) in ps.iter().enumerate() {
        let inv = 1.0 / f64::from(p);
        // raw moments are stored relative to scale^p
        let est = scale * raw[k].powf(inv);
        let lp: Vec<f64> = boot[k].iter().map(|b| scale * b.powf(inv)).collect();
        stderr.push(std_dev(&lp));
        let rel = std_dev(&boot[k]) / raw[k].max(f64::MIN_POSITIVE);
        flagged.push(!(rel <= UNSTABLE_REL_SE));
        estimates.push(est);
    }

    let p_values: Vec<f64> = ps.iter().map(|&p| f64::from(p)).collect();
    let stable: Vec<usize> = (0..ps.len()).filter(|&k| !flagged[k] && estimates[k] > 0.0).collect();
    let use_idx: Vec<usize> = if stable.len() >= 2 {
        stable
    } else {
        (0..ps.len()).filter(|&k| estimates[k] > 0.0).collect()
    };
    let (alpha_hat, lambda_hat) = if use_idx.len() >= 2 {
        let xs: Vec<f64> = use_idx.iter().map(|&k| p_values[k].ln()).collect();
        let ys: Vec<f64> = use_idx.iter().map(|&k| estimates[k].ln()).collect();
        let (slope, intercept) = linear_fit(&xs, &ys);
        (slope, intercept.exp())
    } else {
        (f64::NAN, f64::NAN)
    };
    MomentProfile {
        p_values,
        estimates,
        stderr,
        flagged,
        lambda_hat,
        alpha_hat,
        slack: 1e-12,
        n_samples: n,
    }
}

/// `mean((|x|/scale)^p)` for each `p`, optionally over a resample.
fn raw_moments(abs: &[f64], idx: Option<&[usize]>, scale: f64, ps: &[i32]) -> Vec<f64> {
    let mut acc = vec![0.0; ps.len()];
    if scale == 0.0 {
        return acc;
    }
    let inv = 1.0 / scale;
    let mut add = |x: f64| {
        let r = x * inv;
        for (a, &p) in acc.iter_mut().zip(ps) {
            *a += r.powi(p);
        }
    };
    let count = match idx {
        Some(idx) => {
            idx.iter().for_each(|&i| add(abs[i]));
            idx.len()
        }
        None => {
            abs.iter().for_each(|&x| add(x));
            abs.len()
        }
    };
    acc.iter_mut().for_each(|a| *a /= count as f64);
    acc
}

pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// Monte Carlo estimate of `min_x P(|⟨φ, x⟩| ≥ a)` over `n_dirs`
/// directions drawn from `directions`.
///
/// `sample_phi` fills one realization of the random vector. This is an
/// estimate over finitely many directions, not a certificate of the
/// infimum over a set.
pub fn small_ball_estimate<F, G>(
    mut sample_phi: F,
    mut directions: G,
    a: f64,
    n_dirs: usize,
    n_samples: usize,
    seed: u64,
) -> f64
where
    F: FnMut(&mut SimRng, &mut [f64]),
    G: FnMut(&mut SimRng) -> Vec<f64>,
{
    if a <= 0.0 {
        return 1.0;
    }
    let mut dir_rng = rng_from_seed(split_seed(seed, 1));
    let mut best = 1.0f64;
    for k in 0..n_dirs {
        let x = directions(&mut dir_rng);
        let mut rng = rng_from_seed(split_seed(seed, 2 + k as u64));
        let mut phi = vec![0.0; x.len()];
        let mut hits = 0usize;
        for _ in 0..n_samples {
            sample_phi(&mut rng, &mut phi);
            if dot(&phi, &x).abs() >= a {
                hits += 1;
            }
        }
        best = best.min(hits as f64 / n_samples.max(1) as f64);
    }
    best
}

/// Uniform direction on the unit sphere of `R^d`.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = crate::matcore::norm2(&v);
        if n > 0.0 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}
