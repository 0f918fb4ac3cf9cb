//! Acceptance suite. Runs every criterion and prints one line each:
//!
//!     cargo test --release --test acceptance
//!     cargo test --release --test acceptance -- 2 7     # a subset
//!
//! Exits nonzero when any selected criterion fails.

use std::time::{Duration, Instant};

use rand::Rng;
use rand_distr::StandardNormal;

use synthcs::combin::Combinations;
use synthcs::ensembles::{rng_from_seed, sample_matrix, split_seed, EnsembleSpec, EntryLaw};
use synthcs::harness::{
    fit_noise, run_experiment, with_threads, DictSpec, ExperimentConfig, ExperimentKind, PhaseCurve,
    TrialRecord,
};
use synthcs::matcore::{kernel_basis, norm1, norm2, top_s_l2, Mat, DEFAULT_RANK_TOL};
use synthcs::nsp::{sample_cone, support_norm, ConeSpec};
use synthcs::smallball::{check_rearrangement_lemma, iid_sampler, log_moment_t_sampler};
use synthcs::solver::{solve_qcbp, SolverConfig};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn records(csv: &str) -> Vec<TrialRecord> {
    csv.lines().skip(1).map(|l| TrialRecord::parse_csv_row(l).expect("well-formed row")).collect()
}

fn run(cfg: &ExperimentConfig) -> synthcs::harness::RunOutput {
    cfg.validate().expect("valid config");
    run_experiment(cfg).expect("experiment runs")
}

fn nsp_agreement() -> Outcome {
    let cfg = ExperimentConfig {
        kind: ExperimentKind::NspCorpus,
        n: 16,
        d: 16,
        s: 2,
        m_grid: vec![8],
        trials_per_cell: 200,
        oracle_instances: 2000,
        recovery_tol: 1e-6,
        master_seed: 1,
        ..ExperimentConfig::default()
    };
    let s = run(&cfg).summary;
    let compared = s["compared"].as_u64().unwrap();
    let agreed = s["agreed"].as_u64().unwrap();
    outcome(
        compared > 0 && agreed == compared,
        format!(
            "{agreed}/{compared} non-boundary pairs agree; holds {}, fails {}, estimate-only {}, boundary {}",
            s["certified_holds"], s["certified_fails"], s["estimate_only"], s["boundary"]
        ),
    )
}

fn dual_norm_identity() -> Outcome {
    let n = 12;
    let mut rng = rng_from_seed(2);
    let mut worst = 0.0f64;
    for s in 1..=3 {
        let supports: Vec<Vec<usize>> = Combinations::new(n, s).collect();
        for _ in 0..10_000 {
            let v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let brute = supports
                .iter()
                .map(|t| t.iter().map(|&i| v[i] * v[i]).sum::<f64>().sqrt())
                .fold(0.0, f64::max);
            worst = worst.max((top_s_l2(&v, s).unwrap() - brute).abs());
        }
    }
    outcome(worst <= 1e-12, format!("max deviation {worst:.2e} over 3x10^4 vectors"))
}

fn rearrangement_lemma() -> Outcome {
    let grid: Vec<(usize, usize)> =
        [256, 1024, 4096].iter().flat_map(|&n| [1, 4, 16].map(|s| (n, s))).collect();
    let g = check_rearrangement_lemma(iid_sampler(EntryLaw::Gaussian), &grid, 1000, 3.0, 3).unwrap();
    let t = check_rearrangement_lemma(log_moment_t_sampler(), &grid, 1000, 3.0, 4).unwrap();
    let summary = |c: &synthcs::smallball::LemmaCheck| {
        let (k, r) = c.ratios.iter().enumerate().fold((0, 0.0), |a, (i, &r)| if r > a.1 { (i, r) } else { a });
        let rel = c.stderr[k] / c.estimates[k];
        format!("max ratio {r:.3} at {:?} (rel stderr {rel:.1e})", c.grid[k])
    };
    outcome(g.passed && t.passed, format!("gaussian {}; student-t {}", summary(&g), summary(&t)))
}

fn rate_at(curve: &PhaseCurve, m: usize) -> f64 {
    curve.m.iter().position(|&x| x == m).map(|k| curve.rate[k]).expect("grid point")
}

fn phase_parity() -> Outcome {
    let cfg = ExperimentConfig {
        kind: ExperimentKind::Phase,
        n: 256,
        d: 256,
        s: 8,
        m_grid: (1..=8).map(|k| 16 * k).collect(),
        ensembles: vec![EntryLaw::Gaussian, EntryLaw::StudentT { dof: 0 }, EntryLaw::Cauchy],
        t_dof_from_grid: true,
        trials_per_cell: 100,
        master_seed: 4,
        ..ExperimentConfig::default()
    };
    let out = run(&cfg);
    let curves: Vec<PhaseCurve> = serde_json::from_value(out.summary["curves"].clone()).unwrap();
    let find = |p: &str| curves.iter().find(|c| c.ensemble.starts_with(p)).expect("curve");
    let (g, t, c) = (find("gaussian"), find("student_t"), find("cauchy"));
    let gap = g.rate.iter().zip(&t.rate).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    let fmt = |c: &PhaseCurve| c.rate.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>().join(" ");
    let Some(m95) = g.m95 else {
        return outcome(false, format!("gaussian never reaches 0.95: {}", fmt(g)));
    };
    let drop = rate_at(g, m95) - rate_at(c, m95);
    outcome(
        gap <= 0.15 && drop >= 0.3,
        format!(
            "t gap {gap:.2}; cauchy drop {drop:.2} at m={m95}; gaussian [{}] {} [{}] cauchy [{}]",
            fmt(g),
            t.ensemble,
            fmt(t),
            fmt(c)
        ),
    )
}

fn dictionary_recovery() -> Outcome {
    let cfg = ExperimentConfig {
        kind: ExperimentKind::Noise,
        n: 256,
        d: 64,
        s: 5,
        m_grid: vec![120],
        dict: DictSpec::Random { law: EntryLaw::Rademacher, normalization: None, shared: false },
        eps_grid: vec![0.0, 1e-3, 1e-2, 1e-1],
        trials_per_cell: 100,
        master_seed: 5,
        ..ExperimentConfig::default()
    };
    let recs = records(&run(&cfg).trials_csv);
    let clean: Vec<&TrialRecord> = recs.iter().filter(|r| r.eps == 0.0).collect();
    let rate = clean.iter().filter(|r| r.success).count() as f64 / clean.len() as f64;
    let noisy: Vec<TrialRecord> = recs.iter().filter(|r| r.eps > 0.0).cloned().collect();
    let pooled = fit_noise(&noisy);
    let grid = [1e-3, 1e-2, 1e-1];
    let med: Vec<f64> = grid
        .iter()
        .map(|&eps| {
            let mut e: Vec<f64> = noisy.iter().filter(|r| r.eps == eps).map(|r| r.err_x).collect();
            e.sort_by(f64::total_cmp);
            0.5 * (e[e.len() / 2 - 1] + e[e.len() / 2])
        })
        .collect();
    // smallest single C with median <= C eps everywhere, and how well C eps explains the medians
    let c = med.iter().zip(&grid).map(|(m, e)| m / e).fold(0.0, f64::max);
    let mean = med.iter().sum::<f64>() / med.len() as f64;
    let ss_tot: f64 = med.iter().map(|m| (m - mean).powi(2)).sum();
    let ss_res: f64 = med.iter().zip(&grid).map(|(m, e)| (m - c * e).powi(2)).sum();
    let r2 = 1.0 - ss_res / ss_tot;
    let ratios: Vec<String> = med.iter().zip(&grid).map(|(m, e)| format!("{:.3}", m / e)).collect();
    outcome(
        rate >= 0.95 && r2 >= 0.9,
        format!(
            "noiseless rate {rate:.2}; C = {c:.3}, R^2 = {r2:.5} on medians; median err/eps [{}]; per-trial fit slope {:.3}, R^2 {:.3}",
            ratios.join(", "),
            pooled.c1,
            pooled.r_squared
        ),
    )
}

fn small_ball() -> Outcome {
    let cfg = ExperimentConfig {
        kind: ExperimentKind::Lowerbound,
        n: 32,
        d: 32,
        s: 2,
        m_grid: vec![64],
        gamma: 0.5,
        n_reps: 100,
        master_seed: 6,
        ..ExperimentConfig::default()
    };
    let r = &run(&cfg).summary["results"][0];
    let holds = r["holds"].as_u64().unwrap();
    outcome(
        holds >= 95,
        format!(
            "holds in {holds}/100; rhs {:.3}, Q {:.3}, W {:.3}, A {:.4}, t {}",
            r["rhs"].as_f64().unwrap(),
            r["q_2a"].as_f64().unwrap(),
            r["width"].as_f64().unwrap(),
            r["a_level"].as_f64().unwrap(),
            r["t"]
        ),
    )
}

fn cone_inclusion() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (k, &(n, s, gamma)) in [(64usize, 4usize, 0.5f64), (128, 8, 0.8)].iter().enumerate() {
        let bound = 2.0 + 1.0 / gamma;
        let cone = ConeSpec::new(n, s, gamma).unwrap();
        let pts = sample_cone(&cone, 10_000, 70 + k as u64);
        let gauge = pts.iter().map(|v| support_norm(v, s)).fold(0.0, f64::max);
        let mut rng = rng_from_seed(80 + k as u64);
        let mut probe = 0.0f64;
        for _ in 0..1000 {
            let u: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let tu = top_s_l2(&u, s).unwrap();
            for v in &pts {
                let ip: f64 = v.iter().zip(&u).map(|(a, b)| a * b).sum();
                probe = probe.max(ip / tu);
            }
        }
        pass &= gauge <= bound + 1e-9 && probe <= bound + 1e-9;
        parts.push(format!("({n},{s},{gamma}): gauge max {gauge:.4}, probe max {probe:.4} vs {bound:.4}"));
    }
    outcome(pass, parts.join("; "))
}

fn determinism() -> Outcome {
    let configs = [
        ExperimentConfig {
            kind: ExperimentKind::Phase,
            n: 48,
            d: 48,
            s: 3,
            m_grid: vec![12, 24],
            ensembles: vec![EntryLaw::Gaussian, EntryLaw::StudentT { dof: 4 }, EntryLaw::Cauchy],
            trials_per_cell: 6,
            master_seed: 8,
            ..ExperimentConfig::default()
        },
        ExperimentConfig {
            kind: ExperimentKind::Noise,
            n: 40,
            d: 20,
            s: 2,
            m_grid: vec![16],
            dict: DictSpec::Random { law: EntryLaw::Gaussian, normalization: None, shared: false },
            eps_grid: vec![0.0, 0.05],
            tail_grid: vec![0.0, 0.01],
            trials_per_cell: 4,
            master_seed: 8,
            ..ExperimentConfig::default()
        },
        ExperimentConfig {
            kind: ExperimentKind::NspCorpus,
            n: 10,
            d: 10,
            s: 1,
            m_grid: vec![6],
            trials_per_cell: 8,
            oracle_instances: 40,
            master_seed: 8,
            ..ExperimentConfig::default()
        },
    ];
    let dir = tempfile::tempdir().unwrap();
    let mut pass = true;
    for cfg in &configs {
        let mut files = Vec::new();
        for threads in [1, 4, 8] {
            let out = with_threads(threads, || run_experiment(cfg)).unwrap().unwrap();
            let path = out.write(&dir.path().join(format!("t{threads}"))).unwrap();
            files.push(std::fs::read(path.join("trials.csv")).unwrap());
        }
        pass &= files.windows(2).all(|w| w[0] == w[1]);
    }
    outcome(pass, "phase, noise and nsp corpus trials.csv compared at 1, 4 and 8 workers".into())
}

fn solver_correctness() -> Outcome {
    let cfg = SolverConfig::default();
    let mut rng = rng_from_seed(9);
    let (mut worst_scale, mut worst_gap) = (0.0f64, f64::NEG_INFINITY);
    let (mut perturbed, mut unconverged) = (0usize, 0usize);
    for inst in 0..1000u64 {
        let m = rng.random_range(5..=15);
        let n = m + rng.random_range(2..=2 * m);
        let a = sample_matrix(&EnsembleSpec::measurement(EntryLaw::Gaussian, m, n), split_seed(90, inst)).unwrap();
        let k = rng.random_range(1..=(m / 3).max(1));
        let mut x0 = vec![0.0; n];
        for j in rand::seq::index::sample(&mut rng, n, k) {
            x0[j] = rng.sample::<f64, _>(StandardNormal);
        }
        let mut y = a.matvec(&x0);
        let eps = if inst % 2 == 0 { 0.0 } else { 0.02 * norm2(&y) };
        if eps > 0.0 {
            let e: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let c = 0.5 * eps / norm2(&e);
            y.iter_mut().zip(&e).for_each(|(v, ei)| *v += c * ei);
        }
        let base = solve_qcbp(&a, &y, eps, &cfg).unwrap();
        if !base.converged {
            unconverged += 1;
        }
        for c in [2.0, 10.0] {
            let cy: Vec<f64> = y.iter().map(|v| c * v).collect();
            let r = solve_qcbp(&a, &cy, c * eps, &cfg).unwrap();
            let scaled: Vec<f64> = base.x_hat.iter().map(|v| c * v).collect();
            let diff: f64 = r.x_hat.iter().zip(&scaled).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
            worst_scale = worst_scale.max(diff / norm2(&scaled).max(f64::MIN_POSITIVE));
        }
        if eps == 0.0 && base.converged {
            let kb: Mat = kernel_basis(&a, DEFAULT_RANK_TOL).unwrap();
            let l1 = norm1(&base.x_hat);
            for p in 0..10 {
                let g: Vec<f64> = (0..kb.cols()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let mut v = kb.matvec(&g);
                let scale = 10f64.powi(-(p % 5)) / norm2(&v);
                v.iter_mut().for_each(|x| *x *= scale);
                let alt: Vec<f64> = base.x_hat.iter().zip(&v).map(|(a, b)| a + b).collect();
                worst_gap = worst_gap.max(l1 - norm1(&alt));
                perturbed += 1;
            }
        }
    }
    outcome(
        worst_scale <= 1e-8 && worst_gap <= 1e-6,
        format!(
            "worst scale deviation {worst_scale:.2e}; worst l1 excess {worst_gap:.2e} over {perturbed} kernel perturbations; {unconverged} unconverged"
        ),
    )
}

type Criterion = (usize, &'static str, u64, fn() -> Outcome);

const CRITERIA: [Criterion; 9] = [
    (1, "nsp agrees with uniform recovery", 600, nsp_agreement),
    (2, "dual-norm identity", 60, dual_norm_identity),
    (3, "rearrangement bound", 300, rearrangement_lemma),
    (4, "phase-transition parity", 1800, phase_parity),
    (5, "dictionary-sparse recovery", 1200, dictionary_recovery),
    (6, "small-ball lower bound", 600, small_ball),
    (7, "cone inclusion", 120, cone_inclusion),
    (8, "determinism across workers", 600, determinism),
    (9, "solver correctness", 300, solver_correctness),
];

fn main() {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, budget, check) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let o = check();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(budget);
        let pass = o.pass && in_time;
        failed += usize::from(!pass);
        println!(
            "criterion {id} {name}: {} ({}; {:.1}s of {budget}s)",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
