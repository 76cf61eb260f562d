//! Local architecture search.
//!
//! Each non-encoding gate of a parent circuit is visited in temporal order
//! and independent Bernoulli draws are made for the actions add, remove,
//! switch and move, in that order. The first action that fires is applied
//! and the remaining draws for that gate are skipped. A sampled circuit can
//! therefore carry several edits, at most one per parent gate.
//!
//! [`run_lqas`] trains the base circuit, then for every iteration samples
//! `samples_total` children spread evenly over the current parents, trains
//! each from zero initialization, ranks them by validation MSE and keeps
//! the best `top_k` as the next parents.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Ansatz, Binding, Gate, GateKind};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng;
use crate::train::{train, Metrics, TrainConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModificationProbs {
    pub p_add: f64,
    pub p_remove: f64,
    pub p_switch: f64,
    pub p_move: f64,
}

impl Default for ModificationProbs {
    fn default() -> Self {
        ModificationProbs::uniform(0.1)
    }
}

impl ModificationProbs {
    pub fn new(p_add: f64, p_remove: f64, p_switch: f64, p_move: f64) -> Self {
        ModificationProbs {
            p_add,
            p_remove,
            p_switch,
            p_move,
        }
    }

    pub fn uniform(p: f64) -> Self {
        ModificationProbs::new(p, p, p, p)
    }

    fn in_order(&self) -> [(Action, f64); 4] {
        [
            (Action::Add, self.p_add),
            (Action::Remove, self.p_remove),
            (Action::Switch, self.p_switch),
            (Action::Move, self.p_move),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (action, p) in self.in_order() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!(
                    "probability of {action:?} must lie in [0, 1], got {p}"
                )));
            }
        }
        Ok(())
    }

    /// Probability that each action is the one applied to a single gate.
    pub fn per_gate(&self) -> ActionCounts {
        let mut none = 1.0;
        let mut out = [0.0; 4];
        for (slot, (_, p)) in out.iter_mut().zip(self.in_order()) {
            *slot = none * p;
            none *= 1.0 - p;
        }
        ActionCounts {
            add: out[0],
            remove: out[1],
            switch: out[2],
            r#move: out[3],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Add,
    Remove,
    Switch,
    Move,
}

/// Per-action expected counts (or probabilities).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ActionCounts {
    pub add: f64,
    pub remove: f64,
    pub switch: f64,
    pub r#move: f64,
}

impl ActionCounts {
    pub fn any(&self) -> f64 {
        self.add + self.remove + self.switch + self.r#move
    }

    pub fn get(&self, action: Action) -> f64 {
        match action {
            Action::Add => self.add,
            Action::Remove => self.remove,
            Action::Switch => self.switch,
            Action::Move => self.r#move,
        }
    }
}

/// Expected number of each action when sampling one child of `a`.
pub fn expected_action_count(a: &Ansatz, probs: &ModificationProbs) -> ActionCounts {
    let p = probs.per_gate();
    let n = a.n_eligible() as f64;
    ActionCounts {
        add: n * p.add,
        remove: n * p.remove,
        switch: n * p.switch,
        r#move: n * p.r#move,
    }
}

/// One applied edit. `index` is the position in the gate sequence at the
/// moment the edit is applied, so replaying a log in order reproduces the
/// child; `source` is the anchor gate's position in the parent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "lowercase")]
pub enum Modification {
    Add {
        source: usize,
        index: usize,
        gate: Gate,
    },
    Remove {
        source: usize,
        index: usize,
    },
    Switch {
        source: usize,
        index: usize,
        gate: Gate,
    },
    Move {
        source: usize,
        index: usize,
        gate: Gate,
    },
}

impl Modification {
    pub fn action(&self) -> Action {
        match self {
            Modification::Add { .. } => Action::Add,
            Modification::Remove { .. } => Action::Remove,
            Modification::Switch { .. } => Action::Switch,
            Modification::Move { .. } => Action::Move,
        }
    }
}

/// Replays `log` on `parent`.
pub fn apply_log(parent: &Ansatz, log: &[Modification]) -> Result<Ansatz> {
    let mut gates = parent.gates.clone();
    let bad = |i: usize| Error::Config(format!("modification index {i} out of range"));
    for m in log {
        match m {
            Modification::Add { index, gate, .. } => {
                if *index > gates.len() {
                    return Err(bad(*index));
                }
                gates.insert(*index, gate.clone());
            }
            Modification::Remove { index, .. } => {
                if *index >= gates.len() {
                    return Err(bad(*index));
                }
                gates.remove(*index);
            }
            Modification::Switch { index, gate, .. } | Modification::Move { index, gate, .. } => {
                *gates.get_mut(*index).ok_or_else(|| bad(*index))? = gate.clone();
            }
        }
    }
    Ok(Ansatz::new(parent.n_qubits, gates).reindex_params())
}

fn draw_action(rng: &mut ChaCha8Rng, probs: &ModificationProbs) -> Option<Action> {
    probs
        .in_order()
        .into_iter()
        .find(|&(_, p)| rng.random::<f64>() < p)
        .map(|(a, _)| a)
}

fn choose<T: Copy>(rng: &mut ChaCha8Rng, items: &[T]) -> T {
    items[rng.random_range(0..items.len())]
}

fn binding_for(kind: GateKind, fresh: &mut usize) -> Binding {
    if kind.is_parametrized() {
        *fresh += 1;
        Binding::Param { index: *fresh - 1 }
    } else {
        Binding::None
    }
}

/// New wires for `gate`, uniform over distinct-wire placements other than
/// the current one. `None` when no other placement exists.
fn moved_wires(rng: &mut ChaCha8Rng, gate: &Gate, n_qubits: usize) -> Option<Vec<usize>> {
    match gate.wires[..] {
        [q] => {
            if n_qubits < 2 {
                return None;
            }
            let r = rng.random_range(0..n_qubits - 1);
            Some(vec![if r >= q { r + 1 } else { r }])
        }
        [c, t] => {
            let pairs: Vec<(usize, usize)> = (0..n_qubits)
                .flat_map(|a| (0..n_qubits).map(move |b| (a, b)))
                .filter(|&(a, b)| a != b && (a, b) != (c, t))
                .collect();
            if pairs.is_empty() {
                return None;
            }
            let (a, b) = choose(rng, &pairs);
            Some(vec![a, b])
        }
        _ => None,
    }
}

/// Samples one child of `a`. Encoding gates are copied unchanged.
///
/// A move drawn for a gate that has no alternative placement (a
/// single-qubit gate on a one-qubit circuit) still ends sampling for that
/// gate but leaves it untouched and unlogged.
pub fn sample_modified(
    a: &Ansatz,
    probs: &ModificationProbs,
    seed: u64,
) -> (Ansatz, Vec<Modification>) {
    let mut rng = rng::seeded(seed);
    let mut fresh = a
        .gates
        .iter()
        .filter_map(Gate::param_index)
        .max()
        .map_or(0, |m| m + 1);
    let mut out: Vec<Gate> = Vec::with_capacity(a.gates.len() + 4);
    let mut log = Vec::new();

    for (source, gate) in a.gates.iter().enumerate() {
        if gate.is_encoding() {
            out.push(gate.clone());
            continue;
        }
        match draw_action(&mut rng, probs) {
            None => out.push(gate.clone()),
            Some(Action::Add) => {
                out.push(gate.clone());
                let kind = choose(&mut rng, gate.kind.same_arity());
                let new = Gate::new(kind, gate.wires.clone(), binding_for(kind, &mut fresh));
                log.push(Modification::Add {
                    source,
                    index: out.len(),
                    gate: new.clone(),
                });
                out.push(new);
            }
            Some(Action::Remove) => {
                log.push(Modification::Remove {
                    source,
                    index: out.len(),
                });
            }
            Some(Action::Switch) => {
                let others: Vec<GateKind> = gate
                    .kind
                    .same_arity()
                    .iter()
                    .copied()
                    .filter(|&k| k != gate.kind)
                    .collect();
                let kind = choose(&mut rng, &others);
                let binding = match (kind.is_parametrized(), gate.binding) {
                    (true, b @ Binding::Param { .. }) => b,
                    (true, _) => binding_for(kind, &mut fresh),
                    (false, _) => Binding::None,
                };
                let new = Gate::new(kind, gate.wires.clone(), binding);
                log.push(Modification::Switch {
                    source,
                    index: out.len(),
                    gate: new.clone(),
                });
                out.push(new);
            }
            Some(Action::Move) => match moved_wires(&mut rng, gate, a.n_qubits) {
                Some(wires) => {
                    let new = Gate::new(gate.kind, wires, gate.binding);
                    log.push(Modification::Move {
                        source,
                        index: out.len(),
                        gate: new.clone(),
                    });
                    out.push(new);
                }
                None => out.push(gate.clone()),
            },
        }
    }
    (Ansatz::new(a.n_qubits, out).reindex_params(), log)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankMetric {
    #[default]
    ValidationMse,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub iterations: usize,
    /// Children sampled per iteration, shared evenly by the parents.
    pub samples_total: usize,
    pub top_k: usize,
    pub probs: ModificationProbs,
    pub rank_metric: RankMetric,
    pub master_seed: u64,
    /// Re-inject the parents, with their recorded metrics, into each
    /// iteration's ranked pool.
    pub elitism: bool,
    pub train: TrainConfig,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            iterations: 3,
            samples_total: 100,
            top_k: 10,
            probs: ModificationProbs::default(),
            rank_metric: RankMetric::ValidationMse,
            master_seed: 0,
            elitism: false,
            train: TrainConfig::default(),
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be >= 1".into()));
        }
        if self.top_k == 0 {
            return Err(Error::Config("top_k must be >= 1".into()));
        }
        if self.samples_total < self.top_k {
            return Err(Error::Config(format!(
                "samples_total ({}) must be >= top_k ({})",
                self.samples_total, self.top_k
            )));
        }
        self.probs.validate()?;
        self.train.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    /// Position within its iteration.
    pub index: usize,
    /// Index of the parent in the previous iteration.
    pub parent: Option<usize>,
    pub seed: u64,
    /// Carried over unchanged from the previous iteration (elitism).
    #[serde(default)]
    pub elite: bool,
    pub modifications: Vec<Modification>,
    pub ansatz: Ansatz,
    pub params: Vec<f64>,
    pub train: Option<Metrics>,
    pub validation: Option<Metrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Candidate {
    /// Ranking key; failed candidates sort last.
    pub fn score(&self) -> f64 {
        self.validation
            .map(|m| m.mse)
            .filter(|v| !v.is_nan())
            .unwrap_or(f64::INFINITY)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub iteration: usize,
    pub candidates: Vec<Candidate>,
    /// Candidate indices, best first.
    pub ranking: Vec<usize>,
    pub top_k: Vec<usize>,
    pub best: Option<usize>,
    pub best_validation: Option<Metrics>,
    pub best_train: Option<Metrics>,
}

impl IterationReport {
    fn new(iteration: usize, candidates: Vec<Candidate>, k: usize) -> Self {
        let mut ranking: Vec<usize> = (0..candidates.len()).collect();
        ranking.sort_by(|&a, &b| {
            candidates[a]
                .score()
                .total_cmp(&candidates[b].score())
                .then(candidates[a].index.cmp(&candidates[b].index))
        });
        let top_k = ranking.iter().take(k).copied().collect();
        let best = ranking.first().copied();
        let best_c = best.map(|i| &candidates[i]);
        IterationReport {
            iteration,
            best_validation: best_c.and_then(|c| c.validation),
            best_train: best_c.and_then(|c| c.train),
            best,
            ranking,
            top_k,
            candidates,
        }
    }

    pub fn best_candidate(&self) -> Option<&Candidate> {
        self.best.map(|i| &self.candidates[i])
    }

    /// 1-based rank of every candidate, by candidate position.
    pub fn ranks(&self) -> Vec<usize> {
        let mut ranks = vec![0; self.candidates.len()];
        for (r, &i) in self.ranking.iter().enumerate() {
            ranks[i] = r + 1;
        }
        ranks
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub reports: Vec<IterationReport>,
    /// Best `top_k` candidates of the final iteration, best first.
    pub final_top_k: Vec<Candidate>,
}

struct Pending {
    index: usize,
    parent: Option<usize>,
    seed: u64,
    modifications: Vec<Modification>,
    ansatz: Ansatz,
}

fn train_candidate(
    p: Pending,
    train_set: &Dataset,
    val_set: &Dataset,
    cfg: &TrainConfig,
) -> Candidate {
    let result = train(&p.ansatz, train_set, val_set, cfg);
    let (params, train_m, val_m, error) = match result {
        Ok(r) => (r.params, Some(r.train), Some(r.validation), None),
        Err(e) => (Vec::new(), None, None, Some(e.to_string())),
    };
    Candidate {
        index: p.index,
        parent: p.parent,
        seed: p.seed,
        elite: false,
        modifications: p.modifications,
        ansatz: p.ansatz,
        params,
        train: train_m,
        validation: val_m,
        error,
    }
}

/// Runs the search. Iteration 0 holds the trained base circuit alone.
///
/// Candidate training runs on the current rayon pool; results are
/// collected by candidate index so the outcome does not depend on the
/// number of worker threads.
pub fn run_lqas(
    base: &Ansatz,
    train_set: &Dataset,
    val_set: &Dataset,
    cfg: &SearchConfig,
) -> Result<SearchOutcome> {
    run_lqas_with(base, train_set, val_set, cfg, |_| {})
}

/// [`run_lqas`] with a callback invoked after each iteration.
pub fn run_lqas_with(
    base: &Ansatz,
    train_set: &Dataset,
    val_set: &Dataset,
    cfg: &SearchConfig,
    mut on_iteration: impl FnMut(&IterationReport),
) -> Result<SearchOutcome> {
    cfg.validate()?;
    base.ensure_valid()?;
    if train_set.is_empty() {
        return Err(Error::Config("training set is empty".into()));
    }

    let root = Pending {
        index: 0,
        parent: None,
        seed: cfg.master_seed,
        modifications: Vec::new(),
        ansatz: base.clone(),
    };
    let first = IterationReport::new(
        0,
        vec![train_candidate(root, train_set, val_set, &cfg.train)],
        cfg.top_k,
    );
    on_iteration(&first);
    let mut reports = vec![first];

    for iteration in 1..=cfg.iterations {
        let prev = reports.last().expect("at least the base report");
        let parents: Vec<&Candidate> = prev.top_k.iter().map(|&i| &prev.candidates[i]).collect();
        let per_parent = cfg.samples_total.div_ceil(parents.len());

        let mut pending = Vec::with_capacity(per_parent * parents.len());
        'outer: for (pi, parent) in parents.iter().enumerate() {
            for child in 0..per_parent {
                if pending.len() == cfg.samples_total {
                    break 'outer;
                }
                let seed = rng::candidate_seed(cfg.master_seed, iteration, pi, child);
                let (ansatz, modifications) = sample_modified(&parent.ansatz, &cfg.probs, seed);
                pending.push(Pending {
                    index: pending.len(),
                    parent: Some(parent.index),
                    seed,
                    modifications,
                    ansatz,
                });
            }
        }

        let mut candidates: Vec<Candidate> = pending
            .into_par_iter()
            .map(|p| train_candidate(p, train_set, val_set, &cfg.train))
            .collect();

        if cfg.elitism {
            let offset = candidates.len();
            candidates.extend(parents.iter().enumerate().map(|(i, p)| Candidate {
                index: offset + i,
                parent: Some(p.index),
                elite: true,
                modifications: Vec::new(),
                ..(*p).clone()
            }));
        }

        let report = IterationReport::new(iteration, candidates, cfg.top_k);
        on_iteration(&report);
        reports.push(report);
    }

    let last = reports.last().expect("at least the base report");
    let final_top_k = last
        .top_k
        .iter()
        .map(|&i| last.candidates[i].clone())
        .collect();
    Ok(SearchOutcome {
        reports,
        final_top_k,
    })
}
