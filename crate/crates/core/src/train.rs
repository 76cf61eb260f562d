//! Mini-batch Adam regression of circuit parameters and evaluation metrics.
//!
//! An "epoch" is one pass over the shuffled training rows; every mini-batch
//! takes one Adam step on the batch-mean squared-error gradient.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::circuit::Ansatz;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng;
use crate::sim::AdjointScratch;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    /// Epoch `e` is shuffled with seed `shuffle_seed + e`.
    pub shuffle_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 200,
            batch_size: 25,
            learning_rate: 1e-2,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            shuffle_seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return Err(Error::Config("Adam betas must lie in [0, 1)".into()));
        }
        if self.adam_eps.is_nan() || self.adam_eps <= 0.0 {
            return Err(Error::Config("adam_eps must be positive".into()));
        }
        Ok(())
    }
}

/// Adam with bias correction.
#[derive(Clone, Debug)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(n_params: usize, cfg: &TrainConfig) -> Self {
        Adam {
            lr: cfg.learning_rate,
            beta1: cfg.adam_beta1,
            beta2: cfg.adam_beta2,
            eps: cfg.adam_eps,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for (((p, &g), m), v) in params
            .iter_mut()
            .zip(grad)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mse: f64,
    pub r2: f64,
}

impl Metrics {
    pub fn compute(y_true: &[f64], y_pred: &[f64]) -> Result<Metrics> {
        Ok(Metrics {
            mse: mse(y_true, y_pred)?,
            r2: r2(y_true, y_pred)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainResult {
    pub params: Vec<f64>,
    /// Mean per-sample training loss seen during each epoch.
    pub history: Vec<f64>,
    pub train: Metrics,
    pub validation: Metrics,
}

pub fn mse(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.len() != y_pred.len() || y_true.is_empty() {
        return Err(Error::Dimension(format!(
            "mse needs equal non-empty inputs (got {} and {})",
            y_true.len(),
            y_pred.len()
        )));
    }
    let ss: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(t, p)| (t - p) * (t - p))
        .sum();
    Ok(ss / y_true.len() as f64)
}

/// Coefficient of determination `1 - SS_res / SS_tot`.
pub fn r2(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.len() != y_pred.len() || y_true.len() < 2 {
        return Err(Error::Dimension(format!(
            "r2 needs equal inputs of length >= 2 (got {} and {})",
            y_true.len(),
            y_pred.len()
        )));
    }
    let mean = y_true.iter().sum::<f64>() / y_true.len() as f64;
    let ss_tot: f64 = y_true.iter().map(|t| (t - mean) * (t - mean)).sum();
    if ss_tot == 0.0 {
        return Err(Error::UndefinedMetric("r2 of a constant target".into()));
    }
    let ss_res: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(t, p)| (t - p) * (t - p))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Trains `a` from all-zero parameters and reports metrics on both sets.
pub fn train(
    a: &Ansatz,
    train_set: &Dataset,
    val_set: &Dataset,
    cfg: &TrainConfig,
) -> Result<TrainResult> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(Error::Config("training set is empty".into()));
    }
    a.ensure_valid()?;

    let n = train_set.len();
    let mut params = vec![0.0; a.n_params];
    let mut adam = Adam::new(a.n_params, cfg);
    let mut scratch = AdjointScratch::new(a.n_qubits)?;
    let mut sample_grad = vec![0.0; a.n_params];
    let mut batch_grad = vec![0.0; a.n_params];
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.sort_unstable();
        order.shuffle(&mut rng::seeded(
            cfg.shuffle_seed.wrapping_add(epoch as u64),
        ));
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            batch_grad.fill(0.0);
            for &i in batch {
                epoch_loss += scratch.loss_gradient(
                    a,
                    &params,
                    &train_set.x[i],
                    train_set.y[i],
                    &mut sample_grad,
                )?;
                for (b, g) in batch_grad.iter_mut().zip(&sample_grad) {
                    *b += g;
                }
            }
            let inv = 1.0 / batch.len() as f64;
            batch_grad.iter_mut().for_each(|g| *g *= inv);
            adam.step(&mut params, &batch_grad);
        }
        let mean_loss = epoch_loss / n as f64;
        if !mean_loss.is_finite() {
            return Err(Error::Numeric(format!(
                "training loss diverged at epoch {epoch}"
            )));
        }
        history.push(mean_loss);
    }

    let train_metrics = evaluate(&mut scratch, a, &params, train_set)?;
    let val_metrics = evaluate(&mut scratch, a, &params, val_set)?;
    Ok(TrainResult {
        params,
        history,
        train: train_metrics,
        validation: val_metrics,
    })
}

fn evaluate(
    scratch: &mut AdjointScratch,
    a: &Ansatz,
    params: &[f64],
    ds: &Dataset,
) -> Result<Metrics> {
    let pred =
        ds.x.iter()
            .map(|x| scratch.predict(a, params, x))
            .collect::<Result<Vec<_>>>()?;
    Metrics::compute(&ds.y, &pred)
}

/// Metrics of fixed parameters on a dataset.
pub fn evaluate_params(a: &Ansatz, params: &[f64], ds: &Dataset) -> Result<Metrics> {
    let mut scratch = AdjointScratch::new(a.n_qubits)?;
    evaluate(&mut scratch, a, params, ds)
}
