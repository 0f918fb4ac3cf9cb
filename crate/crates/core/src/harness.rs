//! Experiment orchestration: configs, seeded trials and result files.
//!
//! Every trial draws its randomness from
//! `split_seed(split_seed(master_seed, cell_hash), trial)`, where
//! `cell_hash` is the 64-bit FNV-1a hash of the text `m=<m>;s=<s>;tail=<tail>`.
//! The ensemble law and the noise level are deliberately left out of the
//! hash, so ensembles and noise levels are compared on the same supports,
//! signs and noise directions. Within a trial, independent streams feed the
//! measurement matrix, the dictionary, the signal and the noise.
//!
//! Trials run on a rayon pool and are collected in `(cell, trial)` order, so
//! the output files do not depend on the number of workers.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combin::{binomial, Combinations};
use crate::dictionary::{full_spark, make_identity, Dict, DictError, DEFAULT_SPARK_TOL};
use crate::ensembles::{rng_from_seed, sample_matrix, split_seed, EnsembleError, EnsembleSpec, EntryLaw, SimRng};
use crate::matcore::{norm2, Mat};
use crate::nsp::{certify_nsp, ConeSpec, NspError, NspStatus, DEFAULT_NSP_TOL};
use crate::smallball::{
    check_khintchine, check_lower_bound, check_rearrangement_lemma, estimate_width, log_moment_dof,
    LowerBoundSetup, SmallBallError, DEFAULT_BOUND_CONSTANT,
};
use crate::solver::{best_s_term_error, solve_qcbp, synthesize, Problem, SolverConfig, SolverError};

pub const SCHEMA_VERSION: u32 = 1;
pub const TRIALS_HEADER: &str =
    "ensemble,m,s,eps,tail,trial,seed,success,err_x,err_z,sigma_s,x0_norm,iterations,converged";
pub const NSP_HEADER: &str = "pair,seed,full_spark,status,max_lp_value,unbounded,boundary,oracle_recovered,oracle_runs,agree";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Dict(#[from] DictError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Nsp(#[from] NspError),
    #[error(transparent)]
    SmallBall(#[from] SmallBallError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    /// Process exit code: 2 for configuration errors, 3 for numerical aborts.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Json(_) => 2,
            HarnessError::Ensemble(EnsembleError::InvalidSpec(_)) => 2,
            HarnessError::Solver(SolverError::NumericalAbort { .. }) => 3,
            HarnessError::Solver(SolverError::InvalidProblem(_)) => 2,
            _ => 1,
        }
    }
}

fn config_err<T>(msg: impl Into<String>) -> Result<T, HarnessError> {
    Err(HarnessError::Config(msg.into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Phase,
    Noise,
    Lemma51,
    Khintchine,
    NspCorpus,
    Width,
    Lowerbound,
}

/// Source of the dictionary `D ∈ R^{d×n}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DictSpec {
    Identity {},
    /// Entries from `law` times `normalization` (default `1/√d`), redrawn
    /// per trial unless `shared`.
    Random {
        law: EntryLaw,
        #[serde(default)]
        normalization: Option<f64>,
        #[serde(default)]
        shared: bool,
    },
    File { path: PathBuf },
}

impl Default for DictSpec {
    fn default() -> Self {
        DictSpec::Identity {}
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Results go to `<out>/<name>/`; defaults to the kind.
    pub name: Option<String>,
    pub kind: ExperimentKind,
    /// Coefficient dimension.
    pub n: usize,
    /// Signal dimension (rows of `D`).
    pub d: usize,
    pub s: usize,
    pub m_grid: Vec<usize>,
    /// Entry laws of the measurement rows; measurement matrices use `1/√m`.
    pub ensembles: Vec<EntryLaw>,
    /// Replace every Student-t law by `StudentT(⌈2 log(n/s)⌉)`.
    pub t_dof_from_grid: bool,
    pub dict: DictSpec,
    pub gamma: f64,
    pub eps_grid: Vec<f64>,
    /// Scales of the power-law tail added to `x0` (noise experiments).
    pub tail_grid: Vec<f64>,
    pub tail_decay: f64,
    pub trials_per_cell: usize,
    pub master_seed: u64,
    pub solver: SolverConfig,
    pub success_tol: f64,
    /// `(n, s)` points of the rearrangement check.
    pub grid: Vec<(usize, usize)>,
    pub bound_constant: f64,
    /// Monte Carlo size of the verification suites.
    pub n_trials: usize,
    pub p_max: f64,
    /// Direction for the Khintchine check; defaults to `e₁`.
    pub direction: Option<Vec<f64>>,
    /// Multiply the width by `2 + γ⁻¹`.
    pub apply_gamma: bool,
    pub nsp_tol: f64,
    pub oracle_instances: usize,
    pub recovery_tol: f64,
    /// Level `A`; defaults to `1/(2√m)`.
    pub a_level: Option<f64>,
    /// Deviation `t`; defaults to `√m/4`.
    pub t: Option<f64>,
    pub n_reps: usize,
    pub n_cone_samples: usize,
    pub n_tail_samples: usize,
    pub refine_iters: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: None,
            kind: ExperimentKind::Phase,
            n: 0,
            d: 0,
            s: 1,
            m_grid: Vec::new(),
            ensembles: vec![EntryLaw::Gaussian],
            t_dof_from_grid: false,
            dict: DictSpec::default(),
            gamma: 0.5,
            eps_grid: vec![0.0],
            tail_grid: vec![0.0],
            tail_decay: 1.5,
            trials_per_cell: 1,
            master_seed: 0,
            solver: SolverConfig::default(),
            success_tol: 1e-4,
            grid: Vec::new(),
            bound_constant: DEFAULT_BOUND_CONSTANT,
            n_trials: 1_000,
            p_max: 6.0,
            direction: None,
            apply_gamma: false,
            nsp_tol: DEFAULT_NSP_TOL,
            oracle_instances: 2_000,
            recovery_tol: 1e-6,
            a_level: None,
            t: None,
            n_reps: 100,
            n_cone_samples: 500,
            n_tail_samples: 2_000,
            refine_iters: 10,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn name(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            serde_json::to_value(self.kind)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_else(|| "experiment".into())
        })
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        use ExperimentKind::*;
        for law in &self.ensembles {
            // the grid supplies the degrees of freedom
            if !(self.t_dof_from_grid && matches!(law, EntryLaw::StudentT { .. })) {
                law.validate()?;
            }
        }
        if self.ensembles.is_empty() {
            return config_err("ensembles must be nonempty");
        }
        self.solver.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        if !(self.success_tol > 0.0) {
            return config_err("success_tol must be positive");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return config_err("gamma must lie in (0, 1]");
        }
        let needs_signal = matches!(self.kind, Phase | Noise | NspCorpus);
        if needs_signal || matches!(self.kind, Width | Lowerbound) {
            if self.n == 0 || self.d == 0 || self.d > self.n {
                return config_err(format!("need 1 <= d <= n, got d = {}, n = {}", self.d, self.n));
            }
            if self.s == 0 || self.s > self.n {
                return config_err(format!("s = {} outside 1..=n", self.s));
            }
            if self.m_grid.is_empty() || self.m_grid.contains(&0) {
                return config_err("m_grid must be nonempty with positive entries");
            }
            if let DictSpec::Identity {} = self.dict {
                if self.d != self.n {
                    return config_err("identity dictionary needs d = n");
                }
            }
        }
        if needs_signal && self.trials_per_cell == 0 {
            return config_err("trials_per_cell must be at least 1");
        }
        if self.eps_grid.is_empty() || self.eps_grid.iter().any(|e| !(*e >= 0.0 && e.is_finite())) {
            return config_err("eps_grid must be nonempty with finite entries >= 0");
        }
        if self.tail_grid.is_empty() || self.tail_grid.iter().any(|t| !(*t >= 0.0 && *t < 1.0)) {
            return config_err("tail_grid must be nonempty with entries in [0, 1)");
        }
        match self.kind {
            Lemma51 if self.grid.is_empty() => return config_err("lemma51 needs a nonempty grid"),
            Lemma51 | Khintchine | Width if self.n_trials < 2 => {
                return config_err("n_trials must be at least 2")
            }
            Khintchine if self.m_grid.is_empty() || self.d == 0 => {
                return config_err("khintchine needs d and a nonempty m_grid")
            }
            NspCorpus if self.oracle_instances == 0 => {
                return config_err("oracle_instances must be positive")
            }
            _ => {}
        }
        Ok(())
    }

    fn law_for(&self, law: EntryLaw, n: usize, s: usize) -> EntryLaw {
        match law {
            EntryLaw::StudentT { .. } if self.t_dof_from_grid => EntryLaw::StudentT { dof: log_moment_dof(n, s) },
            other => other,
        }
    }
}

/// 64-bit FNV-1a.
pub fn fnv1a(text: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn cell_hash(m: usize, s: usize, tail: f64) -> u64 {
    fnv1a(&format!("m={m};s={s};tail={tail:e}"))
}

pub fn trial_seed(master: u64, cell: u64, trial: usize) -> u64 {
    split_seed(split_seed(master, cell), trial as u64)
}

const STREAM_PHI: u64 = 1;
const STREAM_DICT: u64 = 2;
const STREAM_SIGNAL: u64 = 3;
const STREAM_NOISE: u64 = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub ensemble: String,
    pub m: usize,
    pub s: usize,
    pub eps: f64,
    pub tail: f64,
    pub trial: usize,
    pub seed: u64,
    pub success: bool,
    pub err_x: f64,
    pub err_z: f64,
    pub sigma_s: f64,
    pub x0_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl TrialRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:e},{:e},{},{},{},{:e},{:e},{:e},{:e},{},{}",
            self.ensemble,
            self.m,
            self.s,
            self.eps,
            self.tail,
            self.trial,
            self.seed,
            self.success,
            self.err_x,
            self.err_z,
            self.sigma_s,
            self.x0_norm,
            self.iterations,
            self.converged
        )
    }

    /// Parses a row written by [`TrialRecord::csv_row`].
    pub fn parse_csv_row(line: &str) -> Option<TrialRecord> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 14 {
            return None;
        }
        Some(TrialRecord {
            ensemble: f[0].to_string(),
            m: f[1].parse().ok()?,
            s: f[2].parse().ok()?,
            eps: f[3].parse().ok()?,
            tail: f[4].parse().ok()?,
            trial: f[5].parse().ok()?,
            seed: f[6].parse().ok()?,
            success: f[7].parse().ok()?,
            err_x: f[8].parse().ok()?,
            err_z: f[9].parse().ok()?,
            sigma_s: f[10].parse().ok()?,
            x0_norm: f[11].parse().ok()?,
            iterations: f[12].parse().ok()?,
            converged: f[13].parse().ok()?,
        })
    }
}

/// `err_x ≤ tol · max(1, ‖x0‖₂)`.
pub fn is_success(err_x: f64, x0_norm: f64, tol: f64) -> bool {
    err_x <= tol * x0_norm.max(1.0)
}

fn random_sign(rng: &mut SimRng) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// `s` entries of `±1` on a uniform random support, plus `tail · j^{−decay}`
/// with random signs on the remaining coordinates in random order.
pub fn draw_signal(n: usize, s: usize, tail: f64, decay: f64, rng: &mut SimRng) -> Vec<f64> {
    let order = sample_indices(rng, n, n).into_vec();
    let mut x = vec![0.0; n];
    for &j in &order[..s] {
        x[j] = random_sign(rng);
    }
    if tail > 0.0 {
        for (k, &j) in order[s..].iter().enumerate() {
            x[j] = tail * ((k + 1) as f64).powf(-decay) * random_sign(rng);
        }
    }
    x
}

/// Gaussian direction rescaled to `‖e‖₂ = eps` exactly.
pub fn draw_noise(m: usize, eps: f64, rng: &mut SimRng) -> Vec<f64> {
    if eps == 0.0 {
        return vec![0.0; m];
    }
    loop {
        let e: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let ne = norm2(&e);
        if ne > 0.0 {
            return e.into_iter().map(|x| x * eps / ne).collect();
        }
    }
}

/// Dictionary source resolved once per experiment.
enum DictSource {
    Fixed(Dict),
    PerTrial(EnsembleSpec),
}

impl DictSource {
    fn resolve(cfg: &ExperimentConfig) -> Result<Self, HarnessError> {
        Ok(match &cfg.dict {
            DictSpec::Identity {} => DictSource::Fixed(make_identity(cfg.n)),
            DictSpec::File { path } => {
                let dict = Dict::load(path)?;
                if dict.d() != cfg.d || dict.n() != cfg.n {
                    return config_err(format!(
                        "dictionary file is {}x{}, config wants {}x{}",
                        dict.d(),
                        dict.n(),
                        cfg.d,
                        cfg.n
                    ));
                }
                DictSource::Fixed(dict)
            }
            DictSpec::Random { law, normalization, shared } => {
                let c = normalization.unwrap_or(1.0 / (cfg.d as f64).sqrt());
                let spec = EnsembleSpec::new(*law, cfg.d, cfg.n, c);
                spec.validate()?;
                if *shared {
                    let seed = split_seed(cfg.master_seed, STREAM_DICT);
                    DictSource::Fixed(Dict::new(sample_matrix(&spec, seed)?)?)
                } else {
                    DictSource::PerTrial(spec)
                }
            }
        })
    }

    fn get(&self, seed: u64) -> Result<Dict, HarnessError> {
        match self {
            DictSource::Fixed(d) => Ok(d.clone()),
            DictSource::PerTrial(spec) => Ok(Dict::new(sample_matrix(spec, split_seed(seed, STREAM_DICT))?)?),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    law: EntryLaw,
    m: usize,
    eps: f64,
    tail: f64,
}

fn run_trial(
    cfg: &ExperimentConfig,
    dicts: &DictSource,
    cell: Cell,
    trial: usize,
) -> Result<TrialRecord, HarnessError> {
    let s = cfg.s;
    let seed = trial_seed(cfg.master_seed, cell_hash(cell.m, s, cell.tail), trial);
    let spec = EnsembleSpec::measurement(cell.law, cell.m, cfg.d);
    let phi = sample_matrix(&spec, split_seed(seed, STREAM_PHI))?;
    let dict = dicts.get(seed)?;
    let x0 = draw_signal(cfg.n, s, cell.tail, cfg.tail_decay, &mut rng_from_seed(split_seed(seed, STREAM_SIGNAL)));
    let e = draw_noise(cell.m, cell.eps, &mut rng_from_seed(split_seed(seed, STREAM_NOISE)));
    let sigma_s = best_s_term_error(&x0, s)?;
    let x0_norm = norm2(&x0);
    let problem = Problem::with_ground_truth(phi, dict, x0, e, cell.eps)?;
    let rep = synthesize(&problem, &cfg.solver)?;
    let err_x = rep.err_x.expect("ground truth present");
    Ok(TrialRecord {
        ensemble: cell.law.tag(),
        m: cell.m,
        s,
        eps: cell.eps,
        tail: cell.tail,
        trial,
        seed,
        success: is_success(err_x, x0_norm, cfg.success_tol),
        err_x,
        err_z: rep.err_z.expect("ground truth present"),
        sigma_s,
        x0_norm,
        iterations: rep.iterations,
        converged: rep.converged,
    })
}

fn run_cells(cfg: &ExperimentConfig, cells: &[Cell]) -> Result<Vec<TrialRecord>, HarnessError> {
    let dicts = DictSource::resolve(cfg)?;
    let jobs: Vec<(Cell, usize)> =
        cells.iter().flat_map(|&c| (0..cfg.trials_per_cell).map(move |t| (c, t))).collect();
    jobs.par_iter().map(|&(c, t)| run_trial(cfg, &dicts, c, t)).collect()
}

fn trials_csv(records: &[TrialRecord]) -> String {
    let mut out = String::with_capacity(records.len() * 120);
    out.push_str(TRIALS_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Files produced by one experiment.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub name: String,
    pub config_json: String,
    pub trials_csv: String,
    pub summary: serde_json::Value,
}

impl RunOutput {
    /// Writes `<root>/<name>/{config.json, trials.csv, summary.json}`.
    pub fn write(&self, root: &Path) -> Result<PathBuf, HarnessError> {
        let dir = root.join(&self.name);
        std::fs::create_dir_all(&dir)?;
        std::fs::write(dir.join("config.json"), &self.config_json)?;
        std::fs::write(dir.join("trials.csv"), &self.trials_csv)?;
        std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&self.summary)? + "\n")?;
        Ok(dir)
    }
}

fn output(cfg: &ExperimentConfig, trials_csv: String, mut summary: serde_json::Value) -> Result<RunOutput, HarnessError> {
    let obj = summary.as_object_mut().expect("summary is an object");
    obj.insert("schema_version".into(), SCHEMA_VERSION.into());
    obj.insert("name".into(), cfg.name().into());
    obj.insert("kind".into(), serde_json::to_value(cfg.kind)?);
    obj.insert("master_seed".into(), cfg.master_seed.into());
    Ok(RunOutput {
        name: cfg.name(),
        config_json: serde_json::to_string_pretty(cfg)? + "\n",
        trials_csv,
        summary,
    })
}

fn expect_kind(cfg: &ExperimentConfig, kinds: &[ExperimentKind]) -> Result<(), HarnessError> {
    cfg.validate()?;
    if kinds.contains(&cfg.kind) {
        Ok(())
    } else {
        config_err(format!("kind {:?} not handled here", cfg.kind))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub ensemble: String,
    pub m: usize,
    pub eps: f64,
    pub tail: f64,
    pub trials: usize,
    pub successes: usize,
    pub rate: f64,
    pub converged: usize,
    pub median_err_x: f64,
    pub median_sigma_s: f64,
}

fn median(xs: &mut [f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let k = xs.len();
    if k % 2 == 1 {
        xs[k / 2]
    } else {
        0.5 * (xs[k / 2 - 1] + xs[k / 2])
    }
}

/// Per-cell aggregates in first-appearance order of the cells.
pub fn summarize_cells(records: &[TrialRecord]) -> Vec<CellSummary> {
    let mut order: Vec<(String, usize, u64, u64)> = Vec::new();
    let mut groups: BTreeMap<(String, usize, u64, u64), Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        let key = (r.ensemble.clone(), r.m, r.eps.to_bits(), r.tail.to_bits());
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let rs = &groups[&key];
            let successes = rs.iter().filter(|r| r.success).count();
            let mut errs: Vec<f64> = rs.iter().map(|r| r.err_x).collect();
            let mut sig: Vec<f64> = rs.iter().map(|r| r.sigma_s).collect();
            CellSummary {
                ensemble: key.0.clone(),
                m: key.1,
                eps: f64::from_bits(key.2),
                tail: f64::from_bits(key.3),
                trials: rs.len(),
                successes,
                rate: successes as f64 / rs.len() as f64,
                converged: rs.iter().filter(|r| r.converged).count(),
                median_err_x: median(&mut errs),
                median_sigma_s: median(&mut sig),
            }
        })
        .collect()
}

/// Pool-adjacent-violators fit of a nondecreasing sequence.
pub fn isotonic(ys: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::new();
    for &y in ys {
        blocks.push((y, 1));
        while blocks.len() >= 2 {
            let (b, nb) = blocks[blocks.len() - 1];
            let (a, na) = blocks[blocks.len() - 2];
            if a <= b {
                break;
            }
            blocks.pop();
            let last = blocks.last_mut().expect("two blocks");
            *last = ((a * na as f64 + b * nb as f64) / (na + nb) as f64, na + nb);
        }
    }
    blocks.into_iter().flat_map(|(v, k)| std::iter::repeat_n(v, k)).collect()
}

/// Success-rate curve of one ensemble over the m grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseCurve {
    pub ensemble: String,
    pub m: Vec<usize>,
    pub rate: Vec<f64>,
    /// Smallest grid `m` with rate at least 0.95.
    pub m95: Option<usize>,
    /// Largest distance from the isotonic fit.
    pub monotonicity_gap: f64,
}

pub fn phase_curves(cells: &[CellSummary]) -> Vec<PhaseCurve> {
    let mut tags: Vec<String> = Vec::new();
    for c in cells {
        if !tags.contains(&c.ensemble) {
            tags.push(c.ensemble.clone());
        }
    }
    tags.into_iter()
        .map(|tag| {
            let mut pts: Vec<(usize, f64)> =
                cells.iter().filter(|c| c.ensemble == tag).map(|c| (c.m, c.rate)).collect();
            pts.sort_by_key(|p| p.0);
            let rate: Vec<f64> = pts.iter().map(|p| p.1).collect();
            let fit = isotonic(&rate);
            let gap = rate.iter().zip(&fit).fold(0.0f64, |g, (a, b)| g.max((a - b).abs()));
            PhaseCurve {
                ensemble: tag,
                m: pts.iter().map(|p| p.0).collect(),
                m95: pts.iter().find(|p| p.1 >= 0.95).map(|p| p.0),
                rate,
                monotonicity_gap: gap,
            }
        })
        .collect()
}

/// Phase-transition grid over `m_grid × ensembles`.
pub fn run_phase(cfg: &ExperimentConfig) -> Result<RunOutput, HarnessError> {
    expect_kind(cfg, &[ExperimentKind::Phase])?;
    let eps = cfg.eps_grid[0];
    let cells: Vec<Cell> = cfg
        .ensembles
        .iter()
        .flat_map(|&law| {
            let law = cfg.law_for(law, cfg.n, cfg.s);
            cfg.m_grid.iter().map(move |&m| Cell { law, m, eps, tail: 0.0 })
        })
        .collect();
    let records = run_cells(cfg, &cells)?;
    let summary_cells = summarize_cells(&records);
    let curves = phase_curves(&summary_cells);
    let summary = serde_json::json!({
        "success_tol": cfg.success_tol,
        "cells": summary_cells,
        "curves": curves,
    });
    output(cfg, trials_csv(&records), summary)
}

/// Least-squares fit of `err_x ≈ c₀·σ_s(x0)₁/√s + c₁·eps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseFit {
    pub c0: f64,
    pub c1: f64,
    pub r_squared: f64,
}

/// Two-regressor least squares without intercept; a regressor that is zero
/// throughout gets coefficient 0.
pub fn fit_noise(records: &[TrialRecord]) -> NoiseFit {
    let rows: Vec<(f64, f64, f64)> = records
        .iter()
        .map(|r| (r.sigma_s / (r.s as f64).sqrt(), r.eps, r.err_x))
        .collect();
    let (mut aa, mut ab, mut bb, mut ay, mut by) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(a, b, y) in &rows {
        aa += a * a;
        ab += a * b;
        bb += b * b;
        ay += a * y;
        by += b * y;
    }
    let det = aa * bb - ab * ab;
    let (c0, c1) = if aa > 0.0 && bb > 0.0 && det.abs() > 1e-12 * aa * bb {
        ((ay * bb - by * ab) / det, (by * aa - ay * ab) / det)
    } else if bb > 0.0 {
        (0.0, by / bb)
    } else if aa > 0.0 {
        (ay / aa, 0.0)
    } else {
        (0.0, 0.0)
    };
    let n = rows.len().max(1) as f64;
    let mean = rows.iter().map(|r| r.2).sum::<f64>() / n;
    let ss_tot: f64 = rows.iter().map(|r| (r.2 - mean).powi(2)).sum();
    let ss_res: f64 = rows.iter().map(|r| (r.2 - c0 * r.0 - c1 * r.1).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    NoiseFit { c0, c1, r_squared }
}

/// Noise and tail sweep at `m = m_grid[0]`.
pub fn run_noise(cfg: &ExperimentConfig) -> Result<RunOutput, HarnessError> {
    expect_kind(cfg, &[ExperimentKind::Noise])?;
    let m = cfg.m_grid[0];
    let law = cfg.law_for(cfg.ensembles[0], cfg.n, cfg.s);
    let cells: Vec<Cell> = cfg
        .tail_grid
        .iter()
        .flat_map(|&tail| cfg.eps_grid.iter().map(move |&eps| Cell { law, m, eps, tail }))
        .collect();
    let records = run_cells(cfg, &cells)?;
    let fit = fit_noise(&records);
    let summary = serde_json::json!({
        "success_tol": cfg.success_tol,
        "m": m,
        "cells": summarize_cells(&records),
        "fit": fit,
    });
    output(cfg, trials_csv(&records), summary)
}

/// Uniform-recovery oracle: basis pursuit on `count` s-sparse instances with
/// random magnitudes in `[0.1, 1.1)`. When there are at most `count`
/// support/sign patterns they are cycled in lexicographic order so every
/// pattern is exercised; otherwise patterns are drawn uniformly. Stops at
/// the first failure and returns `(all recovered, instances run)`.
pub fn recovery_oracle(
    a: &Mat,
    s: usize,
    count: usize,
    tol: f64,
    solver: &SolverConfig,
    seed: u64,
) -> Result<(bool, usize), HarnessError> {
    let n = a.cols();
    let total = binomial(n, s).and_then(|c| c.checked_mul(1u64 << s.min(63)));
    let patterns: Option<Vec<(Vec<usize>, u64)>> = match total {
        Some(p) if p as usize <= count => Some(
            Combinations::new(n, s)
                .flat_map(|t| (0..1u64 << s).map(move |mask| (t.clone(), mask)))
                .collect(),
        ),
        _ => None,
    };
    let mut rng = rng_from_seed(seed);
    for i in 0..count {
        let (support, mask) = match &patterns {
            Some(p) => p[i % p.len()].clone(),
            None => {
                let t = sample_indices(&mut rng, n, s).into_vec();
                (t, rng.random_range(0..1u64 << s.min(63)))
            }
        };
        let mut x0 = vec![0.0; n];
        for (k, &j) in support.iter().enumerate() {
            let mag = 0.1 + rng.random::<f64>();
            x0[j] = if mask >> k & 1 == 1 { -mag } else { mag };
        }
        let y = a.matvec(&x0);
        let rep = solve_qcbp(a, &y, 0.0, solver)?;
        let err: f64 = rep.x_hat.iter().zip(&x0).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
        if err > tol * norm2(&x0) {
            return Ok((false, i + 1));
        }
    }
    Ok((true, count))
}

/// One row of the NSP corpus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NspRecord {
    pub pair: usize,
    pub seed: u64,
    /// `None` when enumeration exceeds the size guard.
    pub full_spark: Option<bool>,
    pub status: NspStatus,
    pub max_lp_value: Option<f64>,
    pub unbounded: usize,
    pub boundary: bool,
    pub oracle_recovered: bool,
    pub oracle_runs: usize,
    /// `None` for rows excluded from the agreement statistic.
    pub agree: Option<bool>,
}

impl NspRecord {
    fn csv_row(&self) -> String {
        let opt = |v: Option<bool>| v.map_or("na".to_string(), |b| b.to_string());
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.pair,
            self.seed,
            opt(self.full_spark),
            serde_json::to_value(self.status).expect("status").as_str().expect("string"),
            self.max_lp_value.map_or("na".to_string(), |v| format!("{v:e}")),
            self.unbounded,
            self.boundary,
            self.oracle_recovered,
            self.oracle_runs,
            opt(self.agree)
        )
    }
}

/// Band around 1 inside which the largest LP optimum counts as boundary.
pub const BOUNDARY_BAND: f64 = 1e-6;

fn nsp_pair(cfg: &ExperimentConfig, dicts: &DictSource, pair: usize) -> Result<NspRecord, HarnessError> {
    let m = cfg.m_grid[0];
    let seed = trial_seed(cfg.master_seed, cell_hash(m, cfg.s, 0.0), pair);
    let law = cfg.law_for(cfg.ensembles[0], cfg.n, cfg.s);
    let phi = sample_matrix(&EnsembleSpec::measurement(law, m, cfg.d), split_seed(seed, STREAM_PHI))?;
    let dict = dicts.get(seed)?;
    let full_spark = match full_spark(&dict, DEFAULT_SPARK_TOL) {
        Ok(b) => Some(b),
        Err(DictError::InfeasibleAtSize { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let a = phi.matmul(dict.mat()).map_err(DictError::from)?;
    let rep = certify_nsp(&a, cfg.s, cfg.nsp_tol)?;
    let (oracle_recovered, oracle_runs) = recovery_oracle(
        &a,
        cfg.s,
        cfg.oracle_instances,
        cfg.recovery_tol,
        &cfg.solver,
        split_seed(seed, STREAM_SIGNAL),
    )?;
    let boundary = rep.is_boundary(BOUNDARY_BAND);
    let agree = match rep.status {
        NspStatus::CertifiedHolds if !boundary => Some(oracle_recovered),
        NspStatus::CertifiedFails if !boundary => Some(!oracle_recovered),
        _ => None,
    };
    Ok(NspRecord {
        pair,
        seed,
        full_spark,
        status: rep.status,
        max_lp_value: rep.max_lp_value,
        unbounded: rep.unbounded_count,
        boundary,
        oracle_recovered,
        oracle_runs,
        agree,
    })
}

/// Corpus of `trials_per_cell` pairs `(Φ, D)` at `m = m_grid[0]`: full spark
/// of `D`, NSP certificate of `ΦD` and the recovery oracle.
pub fn run_nsp_corpus(cfg: &ExperimentConfig) -> Result<RunOutput, HarnessError> {
    expect_kind(cfg, &[ExperimentKind::NspCorpus])?;
    let dicts = DictSource::resolve(cfg)?;
    let records: Vec<NspRecord> = (0..cfg.trials_per_cell)
        .into_par_iter()
        .map(|p| nsp_pair(cfg, &dicts, p))
        .collect::<Result<_, _>>()?;
    let mut csv = String::from(NSP_HEADER);
    csv.push('\n');
    for r in &records {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    let compared = records.iter().filter(|r| r.agree.is_some()).count();
    let agreed = records.iter().filter(|r| r.agree == Some(true)).count();
    let count = |st: NspStatus| records.iter().filter(|r| r.status == st).count();
    let summary = serde_json::json!({
        "pairs": records.len(),
        "compared": compared,
        "agreed": agreed,
        "agreement": if compared > 0 { agreed as f64 / compared as f64 } else { f64::NAN },
        "boundary": records.iter().filter(|r| r.boundary).count(),
        "certified_holds": count(NspStatus::CertifiedHolds),
        "certified_fails": count(NspStatus::CertifiedFails),
        "estimate_only": count(NspStatus::EstimateOnly),
        "infeasible_at_size": count(NspStatus::InfeasibleAtSize),
        "boundary_band": BOUNDARY_BAND,
        "recovery_tol": cfg.recovery_tol,
    });
    output(cfg, csv, summary)
}

/// Lemma, Khintchine, width and lower-bound suites, one CSV per run.
pub fn run_verification_suites(cfg: &ExperimentConfig) -> Result<RunOutput, HarnessError> {
    use ExperimentKind::*;
    expect_kind(cfg, &[Lemma51, Khintchine, Width, Lowerbound])?;
    let mut csv = String::new();
    let mut results = Vec::new();
    match cfg.kind {
        Lemma51 => {
            csv.push_str("ensemble,n,s,estimate,stderr,ratio,bound_constant,within\n");
            for (k, &law) in cfg.ensembles.iter().enumerate() {
                let sampler = |n: usize, s: usize, rng: &mut SimRng, z: &mut [f64]| {
                    cfg.law_for(law, n, s).fill(rng, z)
                };
                let chk = check_rearrangement_lemma(
                    sampler,
                    &cfg.grid,
                    cfg.n_trials,
                    cfg.bound_constant,
                    split_seed(cfg.master_seed, k as u64),
                )?;
                let tag = if cfg.t_dof_from_grid && matches!(law, EntryLaw::StudentT { .. }) {
                    "student_t_log".to_string()
                } else {
                    law.tag()
                };
                for line in chk.to_csv().lines().skip(1) {
                    let _ = writeln!(csv, "{tag},{line}");
                }
                results.push(serde_json::json!({ "ensemble": tag, "check": chk }));
            }
        }
        Khintchine => {
            csv.push_str("ensemble,m,p,estimate,stderr,flagged,sqrt_p_bound\n");
            let dir = cfg.direction.clone().unwrap_or_else(|| {
                let mut v = vec![0.0; cfg.d];
                v[0] = 1.0;
                v
            });
            for (k, &law) in cfg.ensembles.iter().enumerate() {
                for &m in &cfg.m_grid {
                    let spec = EnsembleSpec::new(law, m, dir.len(), 1.0);
                    let seed = split_seed(split_seed(cfg.master_seed, k as u64), m as u64);
                    let chk = check_khintchine(&spec, &dir, cfg.p_max, cfg.n_trials, seed)?;
                    for line in chk.to_csv().lines().skip(1) {
                        let _ = writeln!(csv, "{},{m},{line}", law.tag());
                    }
                    results.push(serde_json::json!({
                        "ensemble": law.tag(),
                        "m": m,
                        "exponent": chk.exponent,
                        "within_sqrt_p": chk.within_sqrt_p,
                        "reliable_p_max": chk.reliable_p_max,
                    }));
                }
            }
        }
        Width => {
            csv.push_str("ensemble,m,s,value,stderr,n_trials,cone\n");
            let dicts = DictSource::resolve(cfg)?;
            let dict = dicts.get(split_seed(cfg.master_seed, 0))?;
            for (k, &law) in cfg.ensembles.iter().enumerate() {
                for &m in &cfg.m_grid {
                    let spec = EnsembleSpec::new(law, m, cfg.d, 1.0);
                    let gamma = cfg.apply_gamma.then_some(cfg.gamma);
                    let seed = split_seed(split_seed(cfg.master_seed, k as u64), m as u64);
                    let w = estimate_width(&dict, &spec, cfg.s, gamma, cfg.n_trials, seed)?;
                    let _ = writeln!(
                        csv,
                        "{},{m},{},{:e},{:e},{},{}",
                        law.tag(),
                        cfg.s,
                        w.value,
                        w.stderr,
                        w.n_trials,
                        w.cone
                    );
                    results.push(serde_json::to_value(&w)?);
                }
            }
        }
        Lowerbound => {
            let m = cfg.m_grid[0];
            let root_m = (m as f64).sqrt();
            let setup = LowerBoundSetup {
                a_level: cfg.a_level.unwrap_or(0.5 / root_m),
                t: cfg.t.unwrap_or(root_m / 4.0),
                n_reps: cfg.n_reps,
                n_cone_samples: cfg.n_cone_samples,
                n_tail_samples: cfg.n_tail_samples,
                n_width_trials: cfg.n_trials,
                refine_iters: cfg.refine_iters,
            };
            let dicts = DictSource::resolve(cfg)?;
            let dict = dicts.get(split_seed(cfg.master_seed, 0))?;
            let cone = ConeSpec::new(cfg.n, cfg.s, cfg.gamma)?;
            let spec = EnsembleSpec::new(cfg.ensembles[0], m, cfg.d, 1.0);
            let rep = check_lower_bound(&dict, &spec, &cone, &setup, cfg.master_seed)?;
            csv.push_str(&rep.to_csv());
            results.push(serde_json::to_value(&rep)?);
        }
        _ => unreachable!("checked by expect_kind"),
    }
    output(cfg, csv, serde_json::json!({ "results": results }))
}

/// Dispatches on `cfg.kind`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput, HarnessError> {
    use ExperimentKind::*;
    match cfg.kind {
        Phase => run_phase(cfg),
        Noise => run_noise(cfg),
        NspCorpus => run_nsp_corpus(cfg),
        Lemma51 | Khintchine | Width | Lowerbound => run_verification_suites(cfg),
    }
}

/// Runs `f` on a pool of `threads` workers (0 = rayon default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Human-readable digest of every `summary.json` under `root`.
pub fn report(root: &Path) -> Result<String, HarnessError> {
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(root)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("summary.json").is_file())
        .collect();
    dirs.sort();
    let mut out = String::new();
    for dir in dirs {
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json"))?)?;
        let name = v["name"].as_str().unwrap_or("?");
        let kind = v["kind"].as_str().unwrap_or("?");
        let _ = writeln!(out, "{name} ({kind})");
        match kind {
            "phase" => {
                for c in v["curves"].as_array().into_iter().flatten() {
                    let rates: Vec<String> = c["rate"]
                        .as_array()
                        .into_iter()
                        .flatten()
                        .map(|r| format!("{:.2}", r.as_f64().unwrap_or(f64::NAN)))
                        .collect();
                    let _ = writeln!(
                        out,
                        "  {}: m95 = {}, rates [{}]",
                        c["ensemble"].as_str().unwrap_or("?"),
                        c["m95"],
                        rates.join(", ")
                    );
                }
            }
            "noise" => {
                let _ = writeln!(out, "  fit: {}", v["fit"]);
            }
            "nsp_corpus" => {
                let _ = writeln!(
                    out,
                    "  agreement {} on {} compared pairs ({} boundary)",
                    v["agreement"], v["compared"], v["boundary"]
                );
            }
            _ => {
                let _ = writeln!(out, "  {} result block(s)", v["results"].as_array().map_or(0, Vec::len));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_phase() -> ExperimentConfig {
        ExperimentConfig {
            kind: ExperimentKind::Phase,
            n: 24,
            d: 24,
            s: 2,
            m_grid: vec![6, 16],
            ensembles: vec![EntryLaw::Gaussian, EntryLaw::Rademacher],
            trials_per_cell: 4,
            master_seed: 9,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a(""), 0xcbf29ce484222325);
        assert_eq!(fnv1a("a"), 0xaf63dc4c8601ec8c);
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let ok = r#"{"kind":"phase","n":8,"d":8,"s":1,"m_grid":[4],"trials_per_cell":1}"#;
        assert!(ExperimentConfig::from_json(ok).is_ok());
        let bad = r#"{"kind":"phase","n":8,"d":8,"s":1,"m_grid":[4],"bogus":1}"#;
        assert!(matches!(ExperimentConfig::from_json(bad), Err(HarnessError::Config(_))));
        let bad_dict = r#"{"kind":"phase","n":8,"d":8,"s":1,"m_grid":[4],"dict":{"kind":"identity","x":1}}"#;
        assert!(ExperimentConfig::from_json(bad_dict).is_err());
        let bad_solver = r#"{"kind":"phase","n":8,"d":8,"s":1,"m_grid":[4],"solver":{"max_iter":3}}"#;
        assert!(ExperimentConfig::from_json(bad_solver).is_err());
        let empty = r#"{"kind":"phase","n":8,"d":8,"s":1,"m_grid":[]}"#;
        assert_eq!(ExperimentConfig::from_json(empty).unwrap_err().exit_code(), 2);
        let rnd = r#"{"kind":"noise","n":8,"d":4,"s":1,"m_grid":[4],
            "dict":{"kind":"random","law":{"kind":"rademacher"}}}"#;
        assert!(ExperimentConfig::from_json(rnd).is_ok());
    }

    #[test]
    fn signal_and_noise_draws() {
        let mut rng = rng_from_seed(1);
        let x = draw_signal(30, 4, 0.0, 1.5, &mut rng);
        assert_eq!(x.iter().filter(|v| **v != 0.0).count(), 4);
        assert!(x.iter().all(|v| *v == 0.0 || v.abs() == 1.0));
        let x = draw_signal(30, 4, 0.1, 1.5, &mut rng);
        let sigma = best_s_term_error(&x, 4).unwrap();
        let expected: f64 = (1..=26).map(|k| 0.1 * (k as f64).powf(-1.5)).sum();
        assert!((sigma - expected).abs() < 1e-12);
        let e = draw_noise(10, 0.3, &mut rng);
        assert!((norm2(&e) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn phase_is_deterministic_across_pools() {
        let cfg = small_phase();
        let one = with_threads(1, || run_phase(&cfg)).unwrap().unwrap();
        let three = with_threads(3, || run_phase(&cfg)).unwrap().unwrap();
        assert_eq!(one.trials_csv, three.trials_csv);
        assert_eq!(one.summary, three.summary);
        let lines: Vec<&str> = one.trials_csv.lines().collect();
        assert_eq!(lines[0], TRIALS_HEADER);
        assert_eq!(lines.len(), 1 + 2 * 2 * 4);
        for l in &lines[1..] {
            let r = TrialRecord::parse_csv_row(l).unwrap();
            assert_eq!(r.success, is_success(r.err_x, r.x0_norm, cfg.success_tol));
        }
    }

    #[test]
    fn ensembles_share_signals() {
        let cfg = small_phase();
        let out = run_phase(&cfg).unwrap();
        let rows: Vec<TrialRecord> =
            out.trials_csv.lines().skip(1).filter_map(TrialRecord::parse_csv_row).collect();
        let g: Vec<_> = rows.iter().filter(|r| r.ensemble == "gaussian").collect();
        let r: Vec<_> = rows.iter().filter(|r| r.ensemble == "rademacher").collect();
        for (a, b) in g.iter().zip(&r) {
            assert_eq!((a.m, a.trial, a.seed), (b.m, b.trial, b.seed));
        }
    }

    #[test]
    fn isotonic_fit() {
        assert_eq!(isotonic(&[0.0, 0.5, 0.3, 1.0]), vec![0.0, 0.4, 0.4, 1.0]);
        assert_eq!(isotonic(&[1.0, 0.0]), vec![0.5, 0.5]);
        let c = phase_curves(&[
            CellSummary {
                ensemble: "g".into(),
                m: 8,
                eps: 0.0,
                tail: 0.0,
                trials: 1,
                successes: 1,
                rate: 1.0,
                converged: 1,
                median_err_x: 0.0,
                median_sigma_s: 0.0,
            },
        ]);
        assert_eq!(c[0].m95, Some(8));
    }

    #[test]
    fn noise_fit_recovers_coefficients() {
        let mk = |sigma: f64, eps: f64| TrialRecord {
            ensemble: "g".into(),
            m: 1,
            s: 4,
            eps,
            tail: 0.0,
            trial: 0,
            seed: 0,
            success: false,
            err_x: 3.0 * sigma / 2.0 + 5.0 * eps,
            err_z: 0.0,
            sigma_s: sigma,
            x0_norm: 1.0,
            iterations: 0,
            converged: true,
        };
        let recs = vec![mk(0.0, 0.1), mk(0.2, 0.0), mk(0.4, 0.05), mk(0.1, 0.2)];
        let f = fit_noise(&recs);
        assert!((f.c0 - 3.0).abs() < 1e-10 && (f.c1 - 5.0).abs() < 1e-10);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        let only_eps = vec![mk(0.0, 0.1), mk(0.0, 0.2)];
        let f = fit_noise(&only_eps);
        assert_eq!(f.c0, 0.0);
        assert!((f.c1 - 5.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_on_identity_recovers() {
        let (ok, runs) = recovery_oracle(&Mat::identity(5), 2, 50, 1e-6, &SolverConfig::default(), 3).unwrap();
        assert!(ok);
        assert_eq!(runs, 50);
    }

    #[test]
    fn nsp_corpus_with_duplicated_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dup.txt");
        let mut cols: Vec<Vec<f64>> =
            (0..4).map(|j| (0..3).map(|i| ((i + 2 * j) % 5) as f64 - 1.5).collect()).collect();
        cols.push(cols[0].clone());
        Dict::new(Mat::from_cols(3, &cols).unwrap()).unwrap().save(&path, None).unwrap();
        let cfg = ExperimentConfig {
            kind: ExperimentKind::NspCorpus,
            n: 5,
            d: 3,
            s: 1,
            m_grid: vec![3],
            dict: DictSpec::File { path },
            trials_per_cell: 2,
            oracle_instances: 40,
            ..ExperimentConfig::default()
        };
        let out = run_nsp_corpus(&cfg).unwrap();
        for line in out.trials_csv.lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            assert_eq!(f[2], "false");
            // the duplicated pair makes ΦD fail at order 1
            assert_eq!(f[3], "certified_fails");
        }
    }

    #[test]
    fn write_layout() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_phase(&ExperimentConfig { m_grid: vec![16], trials_per_cell: 2, ..small_phase() }).unwrap();
        let path = out.write(dir.path()).unwrap();
        for f in ["config.json", "trials.csv", "summary.json"] {
            assert!(path.join(f).is_file());
        }
        let s: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(path.join("summary.json")).unwrap()).unwrap();
        assert_eq!(s["schema_version"], SCHEMA_VERSION);
        let back = ExperimentConfig::load(&path.join("config.json")).unwrap();
        assert_eq!(back.m_grid, vec![16]);
        assert!(report(dir.path()).unwrap().contains("phase"));
    }
}
