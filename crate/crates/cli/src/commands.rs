use std::path::{Path, PathBuf};

use lqas_core::data::{self, Prepared};
use lqas_core::{report, run_lqas_with, train, Ansatz, IterationReport, Metrics, TrainConfig};
use serde::Serialize;

use crate::config::{AnsatzSpec, DatasetSpec, ExperimentConfig};
use crate::exit::{config_error, create_dir, read_file, write_file};

fn check_width(a: &Ansatz, prepared: &Prepared) -> anyhow::Result<()> {
    let width = prepared.train.n_features();
    if width != a.n_features() {
        return Err(config_error(format!(
            "dataset has {width} feature columns but the ansatz encodes {} (one per qubit)",
            a.n_features()
        )));
    }
    Ok(())
}

fn log_iteration(r: &IterationReport) {
    let failed = r.candidates.iter().filter(|c| c.error.is_some()).count();
    let label = if r.iteration == 0 {
        "base".to_owned()
    } else {
        format!("iteration {}", r.iteration)
    };
    match r.best_validation {
        Some(m) => eprintln!(
            "{label}: {} candidates, best val mse {:.6} r2 {:.4}",
            r.candidates.len(),
            m.mse,
            m.r2
        ),
        None => eprintln!("{label}: {} candidates, none trained", r.candidates.len()),
    }
    for c in r.candidates.iter().filter(|c| c.error.is_some()) {
        eprintln!(
            "  candidate {} failed: {}",
            c.index,
            c.error.as_deref().unwrap_or_default()
        );
    }
    if failed > 0 {
        eprintln!("  {failed} candidate(s) failed and rank last");
    }
}

/// Runs a search experiment and writes its reports into the output
/// directory. Returns that directory.
pub fn run(
    config_path: &Path,
    seed: Option<u64>,
    out_dir: Option<PathBuf>,
) -> anyhow::Result<PathBuf> {
    let mut cfg = ExperimentConfig::load(config_path)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(dir) = out_dir {
        cfg.output_dir = dir;
    }
    cfg.validate()?;

    let raw = cfg.dataset.load(None)?;
    let prepared = data::prepare(
        &raw,
        cfg.train_fraction,
        cfg.split_seed,
        cfg.fit_on_train_only,
    )?;
    let base = cfg.ansatz.build()?;
    check_width(&base, &prepared)?;

    let outcome = run_lqas_with(
        &base,
        &prepared.train,
        &prepared.validation,
        &cfg.search_config(),
        log_iteration,
    )?;

    let dir = &cfg.output_dir;
    create_dir(dir)?;
    write_file(&dir.join("report.json"), &report::outcome_json(&outcome)?)?;
    write_file(
        &dir.join("iterations.csv"),
        &report::iterations_csv(&outcome.reports)?,
    )?;
    write_file(
        &dir.join("summary.txt"),
        &report::summary_table(&outcome.reports),
    )?;
    write_file(&dir.join("scale.json"), &prepared.scaler.to_json()?)?;
    for r in &outcome.reports {
        if let Some(json) = report::best_ansatz_json(r)? {
            write_file(
                &dir.join(format!("best_ansatz_{}.json", r.iteration)),
                &json,
            )?;
        }
    }
    Ok(dir.clone())
}

#[derive(Serialize)]
struct EvalOutput {
    n_qubits: usize,
    n_gates: usize,
    n_params: usize,
    train: Metrics,
    validation: Metrics,
}

pub struct EvalArgs<'a> {
    pub ansatz: &'a str,
    pub data: &'a str,
    pub train_config: Option<&'a Path>,
    pub train_fraction: f64,
    pub fit_on_train_only: bool,
    pub split_seed: Option<u64>,
}

/// Trains one fixed ansatz and returns the metrics JSON.
pub fn eval(args: EvalArgs<'_>) -> anyhow::Result<String> {
    let train_cfg: TrainConfig = match args.train_config {
        Some(path) => toml::from_str(&read_file(path)?)
            .map_err(|e| config_error(format!("{}: {e}", path.display())))?,
        None => TrainConfig::default(),
    };
    let ansatz = AnsatzSpec::parse_arg(args.ansatz)?.build()?;
    let raw = DatasetSpec::parse_arg(args.data)?.load(None)?;
    let prepared = data::prepare(
        &raw,
        args.train_fraction,
        args.split_seed.unwrap_or(0),
        args.fit_on_train_only,
    )?;
    check_width(&ansatz, &prepared)?;
    let result = train(&ansatz, &prepared.train, &prepared.validation, &train_cfg)?;
    Ok(report::to_json(&EvalOutput {
        n_qubits: ansatz.n_qubits,
        n_gates: ansatz.len(),
        n_params: ansatz.n_params,
        train: result.train,
        validation: result.validation,
    })?)
}

/// Writes a dataset to CSV plus a `scale.json` sidecar in the same
/// directory. Returns the sidecar path.
pub fn gen(spec: &str, out: &Path, seed: Option<u64>) -> anyhow::Result<PathBuf> {
    let ds = DatasetSpec::parse_arg(spec)?.load(seed)?;
    let scaler = data::Scaler::fit(&ds)?;
    let dir = out.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        create_dir(dir)?;
    }
    write_file(out, &data::table_to_string(&ds)?)?;
    let sidecar = dir.unwrap_or(Path::new(".")).join("scale.json");
    write_file(&sidecar, &scaler.to_json()?)?;
    Ok(sidecar)
}
