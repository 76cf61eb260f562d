//! Circuit intermediate representation.
//!
//! An [`Ansatz`] is a temporally ordered list of [`Gate`]s over `n_qubits`
//! wires. Each gate reads its rotation angle from a feature column, from a
//! trainable parameter, or from nothing (CNOT). Gates bound to a feature
//! column form the data encoding and are never touched by the search.
//!
//! Two serialized forms are supported: a JSON document and a line-oriented
//! text format:
//!
//! ```text
//! # n_qubits n_params
//! 2 6
//! RX 0 f0
//! RY 0 p0
//! CNOT 0,1 -
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    Cnot,
    Crx,
    Cry,
    Crz,
}

/// Pauli generator of a rotation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl GateKind {
    pub const ALL: [GateKind; 7] = [
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::Cnot,
        GateKind::Crx,
        GateKind::Cry,
        GateKind::Crz,
    ];
    pub const SINGLE_QUBIT: [GateKind; 3] = [GateKind::Rx, GateKind::Ry, GateKind::Rz];
    pub const TWO_QUBIT: [GateKind; 4] =
        [GateKind::Cnot, GateKind::Crx, GateKind::Cry, GateKind::Crz];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz => 1,
            _ => 2,
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            GateKind::Cnot => 0,
            _ => 1,
        }
    }

    pub fn is_parametrized(self) -> bool {
        self.param_count() == 1
    }

    /// The rotation generator, `None` for CNOT.
    pub fn generator(self) -> Option<Pauli> {
        match self {
            GateKind::Rx | GateKind::Crx => Some(Pauli::X),
            GateKind::Ry | GateKind::Cry => Some(Pauli::Y),
            GateKind::Rz | GateKind::Crz => Some(Pauli::Z),
            GateKind::Cnot => None,
        }
    }

    /// Kinds of the same arity, this one included.
    pub fn same_arity(self) -> &'static [GateKind] {
        if self.arity() == 1 {
            &Self::SINGLE_QUBIT
        } else {
            &Self::TWO_QUBIT
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::Cnot => "CNOT",
            GateKind::Crx => "CRX",
            GateKind::Cry => "CRY",
            GateKind::Crz => "CRZ",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GateKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::parse("gate kind", format!("unknown gate kind `{s}`")))
    }
}

/// Where a gate's angle comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Binding {
    Feature { index: usize },
    Param { index: usize },
    None,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    /// Control first for two-qubit gates.
    pub wires: Vec<usize>,
    pub binding: Binding,
}

impl Gate {
    pub fn new(kind: GateKind, wires: Vec<usize>, binding: Binding) -> Self {
        Gate {
            kind,
            wires,
            binding,
        }
    }

    pub fn encoding(kind: GateKind, qubit: usize, feature: usize) -> Self {
        Gate::new(kind, vec![qubit], Binding::Feature { index: feature })
    }

    pub fn rotation(kind: GateKind, qubit: usize, param: usize) -> Self {
        Gate::new(kind, vec![qubit], Binding::Param { index: param })
    }

    pub fn controlled(kind: GateKind, control: usize, target: usize, param: usize) -> Self {
        Gate::new(kind, vec![control, target], Binding::Param { index: param })
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::new(GateKind::Cnot, vec![control, target], Binding::None)
    }

    /// Encoding gates read a feature column and are immutable to the search.
    pub fn is_encoding(&self) -> bool {
        matches!(self.binding, Binding::Feature { .. })
    }

    pub fn param_index(&self) -> Option<usize> {
        match self.binding {
            Binding::Param { index } => Some(index),
            _ => None,
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wires = self
            .wires
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(",");
        let binding = match self.binding {
            Binding::Feature { index } => format!("f{index}"),
            Binding::Param { index } => format!("p{index}"),
            Binding::None => "-".to_owned(),
        };
        write!(f, "{} {} {}", self.kind, wires, binding)
    }
}

/// A single invariant violation reported by [`Ansatz::validate`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    NoQubits,
    WireCount {
        gate: usize,
        expected: usize,
        found: usize,
    },
    WireOutOfRange {
        gate: usize,
        wire: usize,
    },
    DuplicateWires {
        gate: usize,
    },
    BindingMismatch {
        gate: usize,
    },
    FeatureOutOfRange {
        gate: usize,
        index: usize,
    },
    DuplicateParam {
        index: usize,
    },
    NonContiguousParams,
    ParamCount {
        declared: usize,
        found: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoQubits => write!(f, "ansatz has no qubits"),
            Violation::WireCount {
                gate,
                expected,
                found,
            } => write!(f, "gate {gate}: expected {expected} wires, found {found}"),
            Violation::WireOutOfRange { gate, wire } => {
                write!(f, "gate {gate}: wire {wire} out of range")
            }
            Violation::DuplicateWires { gate } => write!(f, "gate {gate}: duplicate wires"),
            Violation::BindingMismatch { gate } => {
                write!(f, "gate {gate}: binding does not match gate kind")
            }
            Violation::FeatureOutOfRange { gate, index } => {
                write!(f, "gate {gate}: feature index {index} out of range")
            }
            Violation::DuplicateParam { index } => {
                write!(f, "parameter {index} used more than once")
            }
            Violation::NonContiguousParams => write!(f, "non-contiguous parameters"),
            Violation::ParamCount { declared, found } => write!(
                f,
                "n_params is {declared} but {found} parameter slots are used"
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ansatz {
    pub n_qubits: usize,
    pub n_params: usize,
    pub gates: Vec<Gate>,
}

impl Ansatz {
    /// Builds an ansatz from a gate list, counting parameter slots.
    ///
    /// Parameter indices are taken as given; call [`Ansatz::reindex_params`]
    /// if they may have gaps.
    pub fn new(n_qubits: usize, gates: Vec<Gate>) -> Self {
        let n_params = gates.iter().filter(|g| g.param_index().is_some()).count();
        Ansatz {
            n_qubits,
            n_params,
            gates,
        }
    }

    pub fn empty(n_qubits: usize) -> Self {
        Ansatz::new(n_qubits, Vec::new())
    }

    /// Feature vectors must have one entry per qubit.
    pub fn n_features(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn n_encoding(&self) -> usize {
        self.gates.iter().filter(|g| g.is_encoding()).count()
    }

    /// Gates the search may modify.
    pub fn n_eligible(&self) -> usize {
        self.gates.len() - self.n_encoding()
    }

    /// Checks every structural invariant and returns all violations found.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.n_qubits == 0 {
            out.push(Violation::NoQubits);
        }
        let mut seen = BTreeSet::new();
        let mut used = 0usize;
        for (i, gate) in self.gates.iter().enumerate() {
            let arity = gate.kind.arity();
            if gate.wires.len() != arity {
                out.push(Violation::WireCount {
                    gate: i,
                    expected: arity,
                    found: gate.wires.len(),
                });
            }
            for &w in &gate.wires {
                if w >= self.n_qubits {
                    out.push(Violation::WireOutOfRange { gate: i, wire: w });
                }
            }
            if gate.wires.len() == 2 && gate.wires[0] == gate.wires[1] {
                out.push(Violation::DuplicateWires { gate: i });
            }
            match gate.binding {
                Binding::Feature { index } => {
                    if arity != 1 {
                        out.push(Violation::BindingMismatch { gate: i });
                    }
                    if index >= self.n_features() {
                        out.push(Violation::FeatureOutOfRange { gate: i, index });
                    }
                }
                Binding::Param { index } => {
                    if !gate.kind.is_parametrized() {
                        out.push(Violation::BindingMismatch { gate: i });
                    }
                    used += 1;
                    if !seen.insert(index) {
                        out.push(Violation::DuplicateParam { index });
                    }
                }
                Binding::None => {
                    if gate.kind.is_parametrized() {
                        out.push(Violation::BindingMismatch { gate: i });
                    }
                }
            }
        }
        if seen.iter().enumerate().any(|(i, &p)| i != p) {
            out.push(Violation::NonContiguousParams);
        }
        if used != self.n_params {
            out.push(Violation::ParamCount {
                declared: self.n_params,
                found: used,
            });
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidAnsatz(violations))
        }
    }

    /// Renumbers parameter slots to `0..n_params` in temporal order.
    pub fn reindex_params(&self) -> Ansatz {
        let mut next = 0;
        let gates = self
            .gates
            .iter()
            .map(|g| {
                let mut g = g.clone();
                if let Binding::Param { index } = &mut g.binding {
                    *index = next;
                    next += 1;
                }
                g
            })
            .collect();
        Ansatz {
            n_qubits: self.n_qubits,
            n_params: next,
            gates,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Ansatz> {
        Ok(serde_json::from_str(s)?)
    }

    /// Line-oriented text form: header `n_qubits n_params`, then one
    /// `kind wires binding` line per gate.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n_qubits, self.n_params);
        for g in &self.gates {
            out.push_str(&g.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_text(s: &str) -> Result<Ansatz> {
        let mut lines = s
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let (hline, header) = lines
            .next()
            .ok_or_else(|| Error::parse("line 1", "missing `n_qubits n_params` header"))?;
        let mut fields = header.split_whitespace();
        let mut header_field = |name: &str| -> Result<usize> {
            fields
                .next()
                .ok_or_else(|| Error::parse(format!("line {hline}"), format!("missing {name}")))?
                .parse()
                .map_err(|e| Error::parse(format!("line {hline}"), format!("{name}: {e}")))
        };
        let n_qubits = header_field("n_qubits")?;
        let n_params = header_field("n_params")?;

        let mut gates = Vec::new();
        for (lineno, line) in lines {
            let loc = || format!("line {lineno}");
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [kind, wires, binding] = parts[..] else {
                return Err(Error::parse(loc(), "expected `kind wires binding`"));
            };
            let kind: GateKind = kind
                .parse()
                .map_err(|_| Error::parse(loc(), format!("unknown gate kind `{kind}`")))?;
            let wires = wires
                .split(',')
                .map(|w| w.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(loc(), format!("wires: {e}")))?;
            let binding = parse_binding(binding).ok_or_else(|| {
                Error::parse(
                    loc(),
                    format!("bad binding `{binding}`, expected fN, pN or -"),
                )
            })?;
            gates.push(Gate::new(kind, wires, binding));
        }
        Ok(Ansatz {
            n_qubits,
            n_params,
            gates,
        })
    }
}

fn parse_binding(s: &str) -> Option<Binding> {
    if s == "-" {
        return Some(Binding::None);
    }
    let (tag, rest) = s.split_at(1);
    let index = rest.parse().ok()?;
    match tag {
        "f" => Some(Binding::Feature { index }),
        "p" => Some(Binding::Param { index }),
        _ => None,
    }
}

/// Shape of a hardware-efficient ansatz: `k` variational layers inside each
/// of `m` data re-uploading blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeaSpec {
    pub n_qubits: usize,
    pub k: usize,
    pub m: usize,
}

impl HeaSpec {
    pub fn new(n_qubits: usize, k: usize, m: usize) -> Self {
        HeaSpec { n_qubits, k, m }
    }

    pub fn n_params(&self) -> usize {
        3 * self.n_qubits * self.k * self.m
    }

    pub fn label(&self) -> String {
        format!("HEA-{}-{}", self.k, self.m)
    }
}

/// Builds HEA-k-m.
///
/// Each of the `m` blocks is an RX encoding layer (feature `j` on qubit `j`)
/// followed by `k` repetitions of an RY-RZ-RY rotation on every qubit and a
/// ring of CNOTs `i -> (i+1) mod n`. The ring is omitted for a single qubit.
pub fn build_hea(spec: HeaSpec) -> Result<Ansatz> {
    let HeaSpec { n_qubits: n, k, m } = spec;
    if n == 0 || k == 0 || m == 0 {
        return Err(Error::Config(format!(
            "HEA needs n_qubits, k and m >= 1 (got n={n}, k={k}, m={m})"
        )));
    }
    let ring = if n >= 2 { n } else { 0 };
    let mut gates = Vec::with_capacity(m * (n + k * (3 * n + ring)));
    let mut param = 0;
    for _ in 0..m {
        gates.extend((0..n).map(|q| Gate::encoding(GateKind::Rx, q, q)));
        for _ in 0..k {
            for q in 0..n {
                for kind in [GateKind::Ry, GateKind::Rz, GateKind::Ry] {
                    gates.push(Gate::rotation(kind, q, param));
                    param += 1;
                }
            }
            gates.extend((0..ring).map(|i| Gate::cnot(i, (i + 1) % n)));
        }
    }
    Ok(Ansatz::new(n, gates))
}
