//! Experiment configuration, read from TOML.
//!
//! Every field has a default, so an empty file runs HEA-1-1 on the
//! 500-point 1D quadratic with three search iterations.

use std::path::{Path, PathBuf};

use lqas_core::data::{self, NoiseMode};
use lqas_core::{
    build_hea, Ansatz, Dataset, HeaSpec, ModificationProbs, SearchConfig, TrainConfig,
};
use serde::{Deserialize, Serialize};

use crate::exit::{config_error, read_file};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    pub ansatz: AnsatzSpec,
    pub search: SearchSection,
    pub train: TrainConfig,
    /// Fraction of rows used for training; the rest is validation.
    pub train_fraction: f64,
    pub split_seed: u64,
    /// Fit the min-max scaler on the training rows only.
    pub fit_on_train_only: bool,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: DatasetSpec::default(),
            ansatz: AnsatzSpec::default(),
            search: SearchSection::default(),
            train: TrainConfig::default(),
            train_fraction: 0.8,
            split_seed: 0,
            fit_on_train_only: false,
            output_dir: PathBuf::from("lqas-out"),
            seed: 0,
        }
    }
}

/// The search loop settings other than training and seeding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSection {
    pub iterations: usize,
    pub samples_total: usize,
    pub top_k: usize,
    pub probs: ModificationProbs,
    pub elitism: bool,
}

impl Default for SearchSection {
    fn default() -> Self {
        let d = SearchConfig::default();
        SearchSection {
            iterations: d.iterations,
            samples_total: d.samples_total,
            top_k: d.top_k,
            probs: d.probs,
            elitism: d.elitism,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSpec {
    Quadratic1d {
        #[serde(default = "default_n_1d")]
        n: usize,
        #[serde(default = "default_noise")]
        noise: f64,
        #[serde(default)]
        noise_mode: NoiseMode,
        #[serde(default = "default_replicas")]
        replicas: usize,
        #[serde(default)]
        seed: u64,
    },
    Quadratic2d {
        #[serde(default = "default_n_2d")]
        n: usize,
        #[serde(default = "default_noise")]
        noise: f64,
        #[serde(default)]
        noise_mode: NoiseMode,
        #[serde(default)]
        seed: u64,
    },
    Table {
        path: PathBuf,
        #[serde(default = "default_target")]
        target: String,
    },
}

fn default_n_1d() -> usize {
    500
}
fn default_n_2d() -> usize {
    200
}
fn default_noise() -> f64 {
    0.5
}
fn default_replicas() -> usize {
    4
}
fn default_target() -> String {
    "y".into()
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec::Quadratic1d {
            n: default_n_1d(),
            noise: default_noise(),
            noise_mode: NoiseMode::StdDev,
            replicas: default_replicas(),
            seed: 0,
        }
    }
}

impl DatasetSpec {
    /// Parses a dataset argument.
    ///
    /// Accepted forms: a `.csv` file (target column `y`), a `.toml` file
    /// holding one dataset table, or `kind[:key=value,...]` such as
    /// `quadratic2d:n=200,noise=0.1` or `table:path=data.csv,target=z`.
    pub fn parse_arg(arg: &str) -> anyhow::Result<DatasetSpec> {
        let path = Path::new(arg);
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => {
                return Ok(DatasetSpec::Table {
                    path: path.to_path_buf(),
                    target: default_target(),
                })
            }
            Some("toml") => {
                let text = read_file(path)?;
                let spec: DatasetSpec = toml::from_str(&text)
                    .map_err(|e| config_error(format!("{}: {e}", path.display())))?;
                return Ok(spec.relative_to(path.parent()));
            }
            _ => {}
        }
        let (kind, rest) = arg.split_once(':').unwrap_or((arg, ""));
        let mut doc = toml::Table::new();
        doc.insert("kind".into(), toml::Value::String(kind.trim().into()));
        for pair in rest.split(',').filter(|p| !p.trim().is_empty()) {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| config_error(format!("expected key=value, got `{pair}`")))?;
            doc.insert(key.trim().into(), scalar(value.trim()));
        }
        DatasetSpec::deserialize(toml::Value::Table(doc))
            .map_err(|e| config_error(format!("dataset `{arg}`: {e}")))
    }

    /// Resolves a relative table path against `base`.
    pub fn relative_to(self, base: Option<&Path>) -> DatasetSpec {
        match (self, base) {
            (DatasetSpec::Table { path, target }, Some(base)) if path.is_relative() => {
                DatasetSpec::Table {
                    path: base.join(path),
                    target,
                }
            }
            (spec, _) => spec,
        }
    }

    /// Produces the raw, unscaled dataset. `seed` replaces the generator
    /// seed of synthetic datasets when given.
    pub fn load(&self, seed: Option<u64>) -> anyhow::Result<Dataset> {
        Ok(match self {
            DatasetSpec::Quadratic1d {
                n,
                noise,
                noise_mode,
                replicas,
                seed: s,
            } => data::gen_quadratic_1d(*n, *noise, *noise_mode, *replicas, seed.unwrap_or(*s))?,
            DatasetSpec::Quadratic2d {
                n,
                noise,
                noise_mode,
                seed: s,
            } => data::gen_quadratic_2d(*n, *noise, *noise_mode, seed.unwrap_or(*s))?,
            DatasetSpec::Table { path, target } => data::load_table(path, target)?,
        })
    }
}

fn scalar(s: &str) -> toml::Value {
    if let Ok(i) = s.parse::<i64>() {
        toml::Value::Integer(i)
    } else if let Ok(f) = s.parse::<f64>() {
        toml::Value::Float(f)
    } else if let Ok(b) = s.parse::<bool>() {
        toml::Value::Boolean(b)
    } else {
        toml::Value::String(s.into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnsatzSpec {
    Hea { n_qubits: usize, k: usize, m: usize },
    File { path: PathBuf },
}

impl Default for AnsatzSpec {
    fn default() -> Self {
        AnsatzSpec::Hea {
            n_qubits: 4,
            k: 1,
            m: 1,
        }
    }
}

impl AnsatzSpec {
    /// Parses `hea:<n>,<k>,<m>` or a file path.
    pub fn parse_arg(arg: &str) -> anyhow::Result<AnsatzSpec> {
        let Some(dims) = arg.strip_prefix("hea:") else {
            return Ok(AnsatzSpec::File { path: arg.into() });
        };
        let nums: Vec<usize> = dims
            .split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|e| config_error(format!("ansatz `{arg}`: {e}")))?;
        match nums[..] {
            [n_qubits, k, m] => Ok(AnsatzSpec::Hea { n_qubits, k, m }),
            _ => Err(config_error(format!(
                "ansatz `{arg}`: expected hea:<n>,<k>,<m>"
            ))),
        }
    }

    pub fn relative_to(self, base: Option<&Path>) -> AnsatzSpec {
        match (self, base) {
            (AnsatzSpec::File { path }, Some(base)) if path.is_relative() => AnsatzSpec::File {
                path: base.join(path),
            },
            (spec, _) => spec,
        }
    }

    pub fn build(&self) -> anyhow::Result<Ansatz> {
        match self {
            AnsatzSpec::Hea { n_qubits, k, m } => Ok(build_hea(HeaSpec::new(*n_qubits, *k, *m))?),
            AnsatzSpec::File { path } => load_ansatz(path),
        }
    }
}

/// Reads an ansatz from JSON or the line-oriented text format. A
/// `best_ansatz_<i>.json` report is accepted too.
pub fn load_ansatz(path: &Path) -> anyhow::Result<Ansatz> {
    let text = read_file(path)?;
    let a = if text.trim_start().starts_with('{') {
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        let inner = value
            .get("candidate")
            .and_then(|c| c.get("ansatz"))
            .cloned()
            .unwrap_or(value);
        Ansatz::from_json(&inner.to_string())
            .map_err(|e| config_error(format!("{}: {e}", path.display())))?
    } else {
        Ansatz::from_text(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))?
    };
    a.ensure_valid()
        .map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    Ok(a)
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<ExperimentConfig> {
        toml::from_str(text).map_err(|e| config_error(e.to_string()))
    }

    /// Loads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> anyhow::Result<ExperimentConfig> {
        let text = read_file(path)?;
        let mut cfg = ExperimentConfig::from_toml(&text)
            .map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        let base = path.parent();
        cfg.dataset = cfg.dataset.relative_to(base);
        cfg.ansatz = cfg.ansatz.relative_to(base);
        Ok(cfg)
    }

    pub fn search_config(&self) -> SearchConfig {
        SearchConfig {
            iterations: self.search.iterations,
            samples_total: self.search.samples_total,
            top_k: self.search.top_k,
            probs: self.search.probs,
            master_seed: self.seed,
            elitism: self.search.elitism,
            train: self.train.clone(),
            ..SearchConfig::default()
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(config_error(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        self.search_config()
            .validate()
            .map_err(|e| config_error(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_the_default_experiment() {
        let cfg = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        let s = cfg.search_config();
        assert_eq!((s.iterations, s.samples_total, s.top_k), (3, 100, 10));
        assert_eq!(s.probs, ModificationProbs::uniform(0.1));
        assert_eq!(s.train, TrainConfig::default());
        assert_eq!(cfg.train_fraction, 0.8);
        assert_eq!(
            cfg.ansatz,
            AnsatzSpec::Hea {
                n_qubits: 4,
                k: 1,
                m: 1
            }
        );
    }

    #[test]
    fn full_config_parses() {
        let cfg = ExperimentConfig::from_toml(
            r#"
            seed = 7
            train_fraction = 0.75
            [dataset]
            kind = "quadratic2d"
            noise = 0.25
            noise_mode = "variance"
            [ansatz]
            kind = "hea"
            n_qubits = 2
            k = 1
            m = 2
            [search]
            iterations = 2
            probs = { p_add = 0.2, p_remove = 0.1, p_switch = 0.1, p_move = 0.05 }
            [train]
            epochs = 50
            "#,
        )
        .unwrap();
        assert_eq!(
            cfg.dataset,
            DatasetSpec::Quadratic2d {
                n: 200,
                noise: 0.25,
                noise_mode: NoiseMode::Variance,
                seed: 0
            }
        );
        assert_eq!(cfg.search_config().master_seed, 7);
        assert_eq!(cfg.train.epochs, 50);
        assert_eq!(cfg.train.batch_size, 25);
        assert_eq!(cfg.search.probs.p_add, 0.2);
    }

    #[test]
    fn unknown_keys_and_mixed_sources_are_rejected() {
        assert!(ExperimentConfig::from_toml("bogus = 1").is_err());
        let both = "[ansatz]\nkind = \"hea\"\nn_qubits = 2\nk = 1\nm = 1\npath = \"a.json\"";
        assert!(ExperimentConfig::from_toml(both).is_err());
        let both = "[dataset]\nkind = \"quadratic1d\"\npath = \"d.csv\"";
        assert!(ExperimentConfig::from_toml(both).is_err());
    }

    #[test]
    fn zero_iterations_fail_validation() {
        let cfg = ExperimentConfig::from_toml("[search]\niterations = 0").unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn dataset_arguments() {
        assert_eq!(
            DatasetSpec::parse_arg("quadratic2d:n=50,noise=0.1,seed=3").unwrap(),
            DatasetSpec::Quadratic2d {
                n: 50,
                noise: 0.1,
                noise_mode: NoiseMode::StdDev,
                seed: 3
            }
        );
        assert_eq!(
            DatasetSpec::parse_arg("quadratic1d").unwrap(),
            DatasetSpec::default()
        );
        assert_eq!(
            DatasetSpec::parse_arg("x/d.csv").unwrap(),
            DatasetSpec::Table {
                path: "x/d.csv".into(),
                target: "y".into()
            }
        );
        assert!(DatasetSpec::parse_arg("quadratic3d").is_err());
        assert!(DatasetSpec::parse_arg("quadratic1d:n").is_err());
    }

    #[test]
    fn ansatz_arguments() {
        assert_eq!(
            AnsatzSpec::parse_arg("hea:4,2,2").unwrap(),
            AnsatzSpec::Hea {
                n_qubits: 4,
                k: 2,
                m: 2
            }
        );
        assert!(AnsatzSpec::parse_arg("hea:4,2").is_err());
        assert_eq!(
            AnsatzSpec::parse_arg("a.json").unwrap(),
            AnsatzSpec::File {
                path: "a.json".into()
            }
        );
    }

    #[test]
    fn shipped_configs_parse() {
        for text in [
            include_str!("../../../configs/quadratic1d_hea11.toml"),
            include_str!("../../../configs/quadratic2d_hea12.toml"),
            include_str!("../../../configs/table.toml"),
        ] {
            let cfg = ExperimentConfig::from_toml(text).unwrap();
            cfg.validate().unwrap();
        }
        let cfg =
            ExperimentConfig::from_toml(include_str!("../../../configs/quadratic1d_hea11.toml"))
                .unwrap();
        assert_eq!(cfg.search_config(), SearchConfig::default());
    }
}
