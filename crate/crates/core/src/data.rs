//! Datasets: synthetic generators, CSV ingestion, min-max scaling and
//! train/validation splits.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Feature matrix (row-major) and regression target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub columns: Vec<String>,
    pub target: String,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    /// Present once the data has been min-max scaled.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<Scaler>,
}

impl Dataset {
    pub fn new(
        columns: Vec<String>,
        target: impl Into<String>,
        x: Vec<Vec<f64>>,
        y: Vec<f64>,
    ) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Dimension(format!(
                "{} feature rows but {} targets",
                x.len(),
                y.len()
            )));
        }
        if let Some((i, row)) = x.iter().enumerate().find(|(_, r)| r.len() != columns.len()) {
            return Err(Error::Dimension(format!(
                "row {i} has {} values, expected {}",
                row.len(),
                columns.len()
            )));
        }
        Ok(Dataset {
            columns,
            target: target.into(),
            x,
            y,
            scaling: None,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    /// Rows at `indices`, in that order. Scaling metadata is kept.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            columns: self.columns.clone(),
            target: self.target.clone(),
            x: indices.iter().map(|&i| self.x[i].clone()).collect(),
            y: indices.iter().map(|&i| self.y[i]).collect(),
            scaling: self.scaling.clone(),
        }
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.x.iter().map(move |row| row[j])
    }
}

/// How the noise parameter of the synthetic generators is read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// `noise` is the standard deviation.
    #[default]
    StdDev,
    /// `noise` is the variance.
    Variance,
}

impl NoiseMode {
    pub fn std_dev(self, noise: f64) -> f64 {
        match self {
            NoiseMode::StdDev => noise,
            NoiseMode::Variance => noise.sqrt(),
        }
    }
}

fn normal(noise: f64, mode: NoiseMode) -> Result<Normal<f64>> {
    let sd = mode.std_dev(noise);
    Normal::new(0.0, sd).map_err(|e| Error::Config(format!("bad noise level {noise}: {e}")))
}

/// `y = x^2 + ε` with `x ~ U(-2, 2)`, the scalar replicated across
/// `replicas` feature columns (one per qubit).
pub fn gen_quadratic_1d(
    n: usize,
    noise: f64,
    mode: NoiseMode,
    replicas: usize,
    seed: u64,
) -> Result<Dataset> {
    if n == 0 || replicas == 0 {
        return Err(Error::Config("need n >= 1 and replicas >= 1".into()));
    }
    let eps = normal(noise, mode)?;
    let mut rng = rng::seeded(seed);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let v: f64 = rng.random_range(-2.0..2.0);
        let e = eps.sample(&mut rng);
        x.push(vec![v; replicas]);
        y.push(v * v + e);
    }
    let columns = (0..replicas).map(|j| format!("x{j}")).collect();
    Dataset::new(columns, "y", x, y)
}

/// `z = x^2 + y^2 + ε` with `(x, y) ~ U(-1, 1)^2`.
pub fn gen_quadratic_2d(n: usize, noise: f64, mode: NoiseMode, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::Config("need n >= 1".into()));
    }
    let eps = normal(noise, mode)?;
    let mut rng = rng::seeded(seed);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let a: f64 = rng.random_range(-1.0..1.0);
        let b: f64 = rng.random_range(-1.0..1.0);
        let e = eps.sample(&mut rng);
        x.push(vec![a, b]);
        y.push(a * a + b * b + e);
    }
    Dataset::new(vec!["x0".into(), "x1".into()], "y", x, y)
}

/// Reads a headed numeric CSV. Every column except `target` becomes a
/// feature, in file order.
pub fn load_table(path: impl AsRef<Path>, target: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_table(&text, target)
}

pub fn parse_table(text: &str, target: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::parse("header", e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    let target_idx = headers
        .iter()
        .position(|h| h == target)
        .ok_or_else(|| Error::parse("header", format!("missing target column `{target}`")))?;
    let columns: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != target_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut x = Vec::new();
    let mut y = Vec::new();
    for (r, record) in reader.records().enumerate() {
        // Row numbers are 1-based data rows (the header is row 0).
        let row = r + 1;
        let record = record.map_err(|e| Error::parse(format!("row {row}"), e.to_string()))?;
        if record.len() != headers.len() {
            return Err(Error::parse(
                format!("row {row}"),
                format!("{} fields, expected {}", record.len(), headers.len()),
            ));
        }
        let mut features = Vec::with_capacity(columns.len());
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                Error::parse(
                    format!("row {row}, column `{}`", headers[c]),
                    format!("non-numeric value `{cell}`"),
                )
            })?;
            if c == target_idx {
                y.push(v);
            } else {
                features.push(v);
            }
        }
        x.push(features);
    }
    Dataset::new(columns, target, x, y)
}

/// Writes features then the target column, with a header row.
pub fn save_table(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, table_to_string(ds)?).map_err(|e| Error::io(path, e))
}

pub fn table_to_string(ds: &Dataset) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let to_parse = |e: csv::Error| Error::parse("csv output", e.to_string());
    w.write_record(ds.columns.iter().chain(std::iter::once(&ds.target)))
        .map_err(to_parse)?;
    for (row, y) in ds.x.iter().zip(&ds.y) {
        w.write_record(row.iter().chain(std::iter::once(y)).map(|v| v.to_string()))
            .map_err(to_parse)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::parse("csv output", e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnRange {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

impl ColumnRange {
    fn fit(name: &str, values: impl Iterator<Item = f64>) -> Result<Self> {
        let (min, max) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        if max <= min {
            return Err(Error::Scaling {
                column: name.to_owned(),
                value: min,
            });
        }
        Ok(ColumnRange {
            name: name.to_owned(),
            min,
            max,
        })
    }

    /// Maps `[min, max]` onto `[-1, 1]`.
    pub fn scale(&self, v: f64) -> f64 {
        2.0 * (v - self.min) / (self.max - self.min) - 1.0
    }

    pub fn unscale(&self, v: f64) -> f64 {
        (v + 1.0) / 2.0 * (self.max - self.min) + self.min
    }
}

/// Per-column min-max scaler onto `[-1, 1]`; serialized as the `scale.json`
/// sidecar.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub features: Vec<ColumnRange>,
    pub target: ColumnRange,
}

impl Scaler {
    pub fn fit(ds: &Dataset) -> Result<Scaler> {
        if ds.is_empty() {
            return Err(Error::Config(
                "cannot fit a scaler on an empty dataset".into(),
            ));
        }
        let features = ds
            .columns
            .iter()
            .enumerate()
            .map(|(j, name)| ColumnRange::fit(name, ds.column(j)))
            .collect::<Result<_>>()?;
        let target = ColumnRange::fit(&ds.target, ds.y.iter().copied())?;
        Ok(Scaler { features, target })
    }

    pub fn transform(&self, ds: &Dataset) -> Result<Dataset> {
        if ds.n_features() != self.features.len() {
            return Err(Error::Dimension(format!(
                "scaler fitted on {} features, dataset has {}",
                self.features.len(),
                ds.n_features()
            )));
        }
        let x =
            ds.x.iter()
                .map(|row| {
                    row.iter()
                        .zip(&self.features)
                        .map(|(&v, r)| r.scale(v))
                        .collect()
                })
                .collect();
        let y = ds.y.iter().map(|&v| self.target.scale(v)).collect();
        Ok(Dataset {
            columns: ds.columns.clone(),
            target: ds.target.clone(),
            x,
            y,
            scaling: Some(self.clone()),
        })
    }

    pub fn inverse_y(&self, y: &[f64]) -> Vec<f64> {
        y.iter().map(|&v| self.target.unscale(v)).collect()
    }

    pub fn inverse(&self, ds: &Dataset) -> Dataset {
        let x =
            ds.x.iter()
                .map(|row| {
                    row.iter()
                        .zip(&self.features)
                        .map(|(&v, r)| r.unscale(v))
                        .collect()
                })
                .collect();
        Dataset {
            columns: ds.columns.clone(),
            target: ds.target.clone(),
            x,
            y: self.inverse_y(&ds.y),
            scaling: None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Fits a min-max scaler on all rows of `ds` and applies it.
pub fn fit_minmax_and_scale(ds: &Dataset) -> Result<Dataset> {
    Scaler::fit(ds)?.transform(ds)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
}

/// Random permutation by `seed`; the first `floor(fraction * n)` rows train.
pub fn split(n: usize, train_fraction: f64, seed: u64) -> Result<Split> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Config(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    if n < 2 {
        return Err(Error::Config(format!("cannot split {n} rows")));
    }
    let n_train = (train_fraction * n as f64).floor() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::Config(format!(
            "fraction {train_fraction} of {n} rows leaves an empty split"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::seeded(seed));
    let validation = idx.split_off(n_train);
    Ok(Split {
        train: idx,
        validation,
    })
}

/// Scaled train and validation sets.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub train: Dataset,
    pub validation: Dataset,
    pub scaler: Scaler,
}

/// Splits, then scales. With `fit_on_train_only` the scaler sees only the
/// training rows and validation values may fall outside `[-1, 1]`.
pub fn prepare(
    ds: &Dataset,
    train_fraction: f64,
    split_seed: u64,
    fit_on_train_only: bool,
) -> Result<Prepared> {
    let s = split(ds.len(), train_fraction, split_seed)?;
    let train_raw = ds.subset(&s.train);
    let scaler = if fit_on_train_only {
        Scaler::fit(&train_raw)?
    } else {
        Scaler::fit(ds)?
    };
    Ok(Prepared {
        train: scaler.transform(&train_raw)?,
        validation: scaler.transform(&ds.subset(&s.validation))?,
        scaler,
    })
}
