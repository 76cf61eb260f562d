//! Acceptance suite. Prints one `[PASS]`/`[FAIL]` line per criterion and
//! exits non-zero if any criterion fails.
//!
//! Run with `cargo test -p lqas-driver --test acceptance`.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use lqas_core::data::{self, NoiseMode};
use lqas_core::search::Action;
use lqas_core::{
    build_hea, mse, oracle, predict, r2, run_lqas, sample_modified, train, Ansatz, Dataset, Gate,
    GateKind, HeaSpec, ModificationProbs, SearchConfig, StateVector, TrainConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEEDS: [u64; 3] = [0, 1, 2];

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed <= Duration::from_secs(limit_s)
}

fn random_instance(rng: &mut ChaCha8Rng, max_gates: usize) -> (Ansatz, Vec<f64>, Vec<f64>) {
    let n = rng.random_range(1..=4);
    let len = rng.random_range(0..=max_gates);
    let a = oracle::random_ansatz(n, len, || rng.random::<f64>());
    let params = (0..a.n_params)
        .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
        .collect();
    let x = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    (a, params, x)
}

fn simulator_matches_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let (a, params, x) = random_instance(&mut rng, 40);
        let fast = predict(&a, &params, &x).expect("valid instance");
        worst = worst.max((fast - oracle::predict(&a, &params, &x)).abs());
    }
    let t = start.elapsed();
    Outcome {
        pass: worst <= 1e-10 && within(t, 10),
        detail: format!("200 circuits, max |error| {worst:.2e} (limit 1e-10), {t:.2?} (limit 10s)"),
    }
}

fn gradient_matches_finite_differences() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    let mut components = 0;
    for _ in 0..100 {
        let (a, params, x) = random_instance(&mut rng, 40);
        let y = rng.random_range(-1.0..1.0);
        let (_, grad) = lqas_core::gradient(&a, &params, &x, y).expect("valid instance");
        let fd = oracle::finite_difference_gradient(&a, &params, &x, y, 1e-5, oracle::predict);
        for (g, f) in grad.iter().zip(&fd) {
            worst = worst.max((g - f).abs());
            components += 1;
        }
    }
    let t = start.elapsed();
    Outcome {
        pass: worst <= 1e-6 && within(t, 30),
        detail: format!(
            "100 instances, {components} components, max |error| {worst:.2e} (limit 1e-6), {t:.2?} (limit 30s)"
        ),
    }
}

fn sampling_statistics() -> Outcome {
    // 1000 children of a 100-gate circuit give 10^5 eligible-gate trials.
    let gates = (0..100)
        .map(|i| match i % 5 {
            0 => Gate::rotation(GateKind::Ry, i % 3, i),
            1 => Gate::cnot(i % 3, (i + 1) % 3),
            2 => Gate::rotation(GateKind::Rz, i % 3, i),
            3 => Gate::controlled(GateKind::Crx, (i + 2) % 3, i % 3, i),
            _ => Gate::rotation(GateKind::Rx, i % 3, i),
        })
        .collect();
    let a = Ansatz::new(3, gates).reindex_params();
    let probs = ModificationProbs::uniform(0.1);
    let mut seen = [0u64; 4];
    let actions = [Action::Add, Action::Remove, Action::Switch, Action::Move];
    for seed in 0..1000u64 {
        for m in sample_modified(&a, &probs, seed).1 {
            seen[actions.iter().position(|&x| x == m.action()).unwrap()] += 1;
        }
    }
    let trials: f64 = 100_000.0;
    let expected: [f64; 4] = [0.1, 0.09, 0.081, 0.0729];
    let mut pass = true;
    let mut parts = Vec::new();
    for ((name, &s), &p) in ["add", "remove", "switch", "move"]
        .iter()
        .zip(&seen)
        .zip(&expected)
    {
        let sd = (trials * p * (1.0 - p)).sqrt();
        let z = (s as f64 - trials * p) / sd;
        pass &= z.abs() < 4.0;
        parts.push(format!("{name} {:.5} (z {z:+.2})", s as f64 / trials));
    }
    Outcome {
        pass,
        detail: format!(
            "{}; expected 0.1/0.09/0.081/0.0729 within 4 sd",
            parts.join(", ")
        ),
    }
}

fn prepared(ds: &Dataset) -> (Dataset, Dataset) {
    let p = data::prepare(ds, 0.8, 0, false).expect("dataset splits");
    (p.train, p.validation)
}

fn fmt_r2(v: Option<f64>) -> String {
    v.map_or_else(|| "failed".into(), |v| format!("{v:.4}"))
}

/// Base validation R2 and best final-iteration validation R2 per seed.
fn search_per_seed(
    base: &Ansatz,
    train_set: &Dataset,
    val_set: &Dataset,
) -> (Option<f64>, Vec<Option<f64>>) {
    let mut base_r2 = None;
    let mut finals = Vec::new();
    for seed in SEEDS {
        let cfg = SearchConfig {
            master_seed: seed,
            ..SearchConfig::default()
        };
        let out = run_lqas(base, train_set, val_set, &cfg).expect("search runs");
        base_r2 = out.reports[0].best_validation.map(|m| m.r2);
        finals.push(out.reports.last().unwrap().best_validation.map(|m| m.r2));
    }
    (base_r2, finals)
}

fn search_criterion(
    base: &Ansatz,
    ds: &Dataset,
    base_ok: impl Fn(f64) -> bool,
    base_rule: &str,
    final_min: f64,
    limit_s: u64,
) -> Outcome {
    let start = Instant::now();
    let (train_set, val_set) = prepared(ds);
    let (base_r2, finals) = search_per_seed(base, &train_set, &val_set);
    let t = start.elapsed();
    let hits = finals
        .iter()
        .filter(|r| r.is_some_and(|r| r >= final_min))
        .count();
    let finals_txt: Vec<String> = finals.iter().map(|&r| fmt_r2(r)).collect();
    Outcome {
        pass: base_r2.is_some_and(base_ok) && hits >= 2 && within(t, limit_s),
        detail: format!(
            "base val R2 {} ({base_rule}); iteration-3 best val R2 per seed [{}], {hits}/3 >= {final_min} (need 2); {t:.1?} (limit {}min)",
            fmt_r2(base_r2),
            finals_txt.join(", "),
            limit_s / 60
        ),
    }
}

fn quadratic_1d_search() -> Outcome {
    let ds = data::gen_quadratic_1d(500, 0.5, NoiseMode::StdDev, 4, 0).unwrap();
    let base = build_hea(HeaSpec::new(4, 1, 1)).unwrap();
    search_criterion(&base, &ds, |r| r < 0.2, "need < 0.2", 0.90, 30 * 60)
}

fn expressive_base() -> Outcome {
    let start = Instant::now();
    let ds = data::gen_quadratic_1d(500, 0.5, NoiseMode::StdDev, 4, 0).unwrap();
    let (train_set, val_set) = prepared(&ds);
    let base = build_hea(HeaSpec::new(4, 2, 2)).unwrap();
    let r = train(&base, &train_set, &val_set, &TrainConfig::default()).expect("training runs");
    let t = start.elapsed();
    Outcome {
        pass: r.validation.r2 >= 0.95 && within(t, 5 * 60),
        detail: format!(
            "HEA-2-2 val R2 {:.4} (need >= 0.95), val MSE {:.5}; {t:.1?} (limit 5min)",
            r.validation.r2, r.validation.mse
        ),
    }
}

fn quadratic_2d_search() -> Outcome {
    let ds = data::gen_quadratic_2d(200, 0.5, NoiseMode::StdDev, 0).unwrap();
    let base = build_hea(HeaSpec::new(2, 1, 2)).unwrap();
    search_criterion(&base, &ds, |r| r <= 0.5, "need <= 0.5", 0.85, 20 * 60)
}

fn cli_output_is_job_independent() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        "[dataset]\nkind = \"quadratic2d\"\nn = 60\n\
         [ansatz]\nkind = \"hea\"\nn_qubits = 2\nk = 1\nm = 2\n\
         [search]\niterations = 2\nsamples_total = 12\ntop_k = 3\n\
         [train]\nepochs = 15\nbatch_size = 10\n",
    )
    .unwrap();
    let run = |jobs: &str, seed: &str, out: &Path| {
        let status = Command::new(env!("CARGO_BIN_EXE_lqas"))
            .args(["--jobs", jobs, "--seed", seed, "--out-dir"])
            .arg(out)
            .arg("run")
            .arg(&config)
            .output()
            .expect("lqas runs");
        assert!(
            status.status.success(),
            "{}",
            String::from_utf8_lossy(&status.stderr)
        );
        std::fs::read(out.join("report.json")).unwrap()
    };
    let one = run("1", "5", &dir.path().join("j1"));
    let four = run("4", "5", &dir.path().join("j4"));
    let again = run("1", "5", &dir.path().join("j1b"));
    let other = run("1", "6", &dir.path().join("s6"));
    Outcome {
        pass: one == four && one == again && one != other,
        detail: format!(
            "report.json {} bytes; jobs 1 vs 4 identical: {}; rerun identical: {}; other seed differs: {}",
            one.len(),
            one == four,
            one == again,
            one != other
        ),
    }
}

fn metric_oracles() -> Outcome {
    let cases: [(&str, f64, f64); 3] = [
        (
            "mse([0,0],[1,1])",
            mse(&[0.0, 0.0], &[1.0, 1.0]).unwrap(),
            1.0,
        ),
        (
            "mse([1,2,3],[2,2,2])",
            mse(&[1.0, 2.0, 3.0], &[2.0; 3]).unwrap(),
            2.0 / 3.0,
        ),
        // SS_res = 4 + 0 + 4, SS_tot = 1 + 0 + 1.
        (
            "r2([1,2,3],[3,2,1])",
            r2(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(),
            1.0 - 8.0 / 2.0,
        ),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, got, want) in cases {
        pass &= (got - want).abs() <= 1e-12;
        parts.push(format!("{name} = {got} (want {want})"));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn sixteen_qubit_smoke() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("random.csv");
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let columns: Vec<String> = (0..16).map(|j| format!("f{j}")).collect();
    let rows: Vec<Vec<f64>> = (0..20)
        .map(|_| (0..16).map(|_| rng.random_range(-5.0..5.0)).collect())
        .collect();
    let y: Vec<f64> = (0..20).map(|_| rng.random_range(0.0..10.0)).collect();
    data::save_table(&Dataset::new(columns, "target", rows, y).unwrap(), &path).unwrap();

    let ds = data::load_table(&path, "target").expect("table loads");
    let scaled = data::fit_minmax_and_scale(&ds).unwrap();
    let a = build_hea(HeaSpec::new(16, 3, 3)).unwrap();
    let cfg = TrainConfig {
        epochs: 5,
        batch_size: 5,
        ..TrainConfig::default()
    };
    let r = train(&a, &scaled, &scaled, &cfg).expect("training runs");
    let finite = r.history.iter().all(|l| l.is_finite()) && r.train.mse.is_finite();
    let mut state = StateVector::zero(16).unwrap();
    for g in &a.gates {
        let angle = match g.binding {
            lqas_core::Binding::Feature { index } => Some(scaled.x[0][index]),
            lqas_core::Binding::Param { index } => Some(r.params[index]),
            lqas_core::Binding::None => None,
        };
        state.apply_gate(g, angle).unwrap();
    }
    let norm_err = (state.norm() - 1.0).abs();
    let t = start.elapsed();
    Outcome {
        pass: ds.n_features() == 16
            && a.n_params == 432
            && r.history.len() == 5
            && finite
            && norm_err < 1e-10
            && within(t, 10 * 60),
        detail: format!(
            "load_table {}x{}; HEA-3-3 on 16 qubits with {} params; losses {:?}; |norm-1| {norm_err:.1e}; {t:.1?} (limit 10min)",
            ds.len(),
            ds.n_features(),
            a.n_params,
            r.history.iter().map(|l| format!("{l:.4}")).collect::<Vec<_>>()
        ),
    }
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("simulator oracle equivalence", simulator_matches_oracle),
        (
            "adjoint gradient check",
            gradient_matches_finite_differences,
        ),
        ("modification sampling statistics", sampling_statistics),
        ("HEA-1-1 search on 1D quadratic", quadratic_1d_search),
        ("HEA-2-2 base on 1D quadratic", expressive_base),
        ("HEA-1-2 search on 2D quadratic", quadratic_2d_search),
        (
            "CLI determinism across --jobs",
            cli_output_is_job_independent,
        ),
        ("metric oracles", metric_oracles),
        (
            "table ingestion and 16-qubit smoke test",
            sixteen_qubit_smoke,
        ),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = run();
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {}. {name}: {}", i + 1, outcome.detail);
        if !outcome.pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
    } else {
        println!(
            "acceptance: {} of {} criteria failed: {failed:?}",
            failed.len(),
            criteria.len()
        );
        std::process::exit(1);
    }
}
