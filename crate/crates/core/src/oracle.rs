//! Reference simulator for tests: every gate is expanded to a full
//! `2^n x 2^n` matrix through Kronecker products, and rotation blocks come
//! from a power-series matrix exponential instead of closed-form sines.
//!
//! Deliberately slow and independent of the kernels in `sim`.

use num_complex::Complex64;

use crate::circuit::{Ansatz, Binding, Gate, GateKind, Pauli};

pub type Dense = Vec<Vec<Complex64>>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> Dense {
    (0..dim)
        .map(|r| {
            (0..dim)
                .map(|k| if r == k { c(1.0, 0.0) } else { c(0.0, 0.0) })
                .collect()
        })
        .collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let m = b[0].len();
    let inner = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..inner).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn add(a: &Dense, b: &Dense) -> Dense {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
        .collect()
}

pub fn scale(a: &Dense, s: Complex64) -> Dense {
    a.iter()
        .map(|r| r.iter().map(|x| x * s).collect())
        .collect()
}

pub fn dagger(a: &Dense) -> Dense {
    let n = a.len();
    let m = a[0].len();
    (0..m)
        .map(|i| (0..n).map(|j| a[j][i].conj()).collect())
        .collect()
}

/// `a ⊗ b`, with `a` acting on the more significant index bits.
pub fn kron(a: &Dense, b: &Dense) -> Dense {
    let (ra, ca) = (a.len(), a[0].len());
    let (rb, cb) = (b.len(), b[0].len());
    let mut out = vec![vec![c(0.0, 0.0); ca * cb]; ra * rb];
    for i in 0..ra {
        for j in 0..ca {
            for k in 0..rb {
                for l in 0..cb {
                    out[i * rb + k][j * cb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn pauli(p: Pauli) -> Dense {
    match p {
        Pauli::X => vec![
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0)],
        ],
        Pauli::Y => vec![
            vec![c(0.0, 0.0), c(0.0, -1.0)],
            vec![c(0.0, 1.0), c(0.0, 0.0)],
        ],
        Pauli::Z => vec![
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(-1.0, 0.0)],
        ],
    }
}

/// `exp(m)` by Taylor series with scaling and squaring.
pub fn expm(m: &Dense) -> Dense {
    let norm: f64 = m.iter().flatten().map(|x| x.norm()).sum();
    let mut squarings = 0;
    let mut s = 1.0;
    while norm * s > 0.5 {
        s /= 2.0;
        squarings += 1;
    }
    let a = scale(m, c(s, 0.0));
    let mut term = identity(m.len());
    let mut sum = identity(m.len());
    for k in 1..30 {
        term = scale(&matmul(&term, &a), c(1.0 / k as f64, 0.0));
        sum = add(&sum, &term);
    }
    for _ in 0..squarings {
        sum = matmul(&sum, &sum);
    }
    sum
}

/// 2x2 block of a rotation `exp(-i θ P / 2)`, or X for CNOT.
pub fn block(kind: GateKind, angle: f64) -> Dense {
    match kind.generator() {
        Some(p) => expm(&scale(&pauli(p), c(0.0, -angle / 2.0))),
        None => pauli(Pauli::X),
    }
}

/// Embeds a one-qubit operator acting on `qubit` into `n` qubits.
/// Qubit `q` is index bit `q`, so qubit 0 is the rightmost kron factor.
fn embed(n: usize, ops: &[(usize, &Dense)]) -> Dense {
    let id = identity(2);
    let mut out = vec![vec![c(1.0, 0.0)]];
    for q in (0..n).rev() {
        let f = ops.iter().find(|(w, _)| *w == q).map_or(&id, |(_, m)| *m);
        out = kron(&out, f);
    }
    out
}

pub fn gate_matrix(n: usize, gate: &Gate, angle: f64) -> Dense {
    let u = block(gate.kind, angle);
    match gate.wires[..] {
        [q] => embed(n, &[(q, &u)]),
        [ctrl, tgt] => {
            let p0 = vec![
                vec![c(1.0, 0.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(0.0, 0.0)],
            ];
            let p1 = vec![
                vec![c(0.0, 0.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(1.0, 0.0)],
            ];
            add(
                &embed(n, &[(ctrl, &p0)]),
                &embed(n, &[(ctrl, &p1), (tgt, &u)]),
            )
        }
        _ => panic!("unsupported wire count"),
    }
}

fn angle_of(gate: &Gate, params: &[f64], x: &[f64]) -> f64 {
    match gate.binding {
        Binding::Feature { index } => x[index],
        Binding::Param { index } => params[index],
        Binding::None => 0.0,
    }
}

/// Full circuit unitary as an ordered product of dense gate matrices.
pub fn circuit_unitary(a: &Ansatz, params: &[f64], x: &[f64]) -> Dense {
    let dim = 1 << a.n_qubits;
    a.gates.iter().fold(identity(dim), |acc, g| {
        matmul(&gate_matrix(a.n_qubits, g, angle_of(g, params, x)), &acc)
    })
}

/// `⟨0|U† Z_0 U|0⟩` using the dense unitary.
pub fn predict(a: &Ansatz, params: &[f64], x: &[f64]) -> f64 {
    let u = circuit_unitary(a, params, x);
    // First column of U is U|0⟩.
    u.iter()
        .enumerate()
        .map(|(i, row)| {
            let p = row[0].norm_sqr();
            if i & 1 == 0 {
                p
            } else {
                -p
            }
        })
        .sum()
}

/// Central finite-difference gradient of `(predict - y)^2`.
pub fn finite_difference_gradient(
    a: &Ansatz,
    params: &[f64],
    x: &[f64],
    y: f64,
    h: f64,
    model: impl Fn(&Ansatz, &[f64], &[f64]) -> f64,
) -> Vec<f64> {
    (0..params.len())
        .map(|i| {
            let mut plus = params.to_vec();
            let mut minus = params.to_vec();
            plus[i] += h;
            minus[i] -= h;
            let lp = (model(a, &plus, x) - y).powi(2);
            let lm = (model(a, &minus, x) - y).powi(2);
            (lp - lm) / (2.0 * h)
        })
        .collect()
}

pub fn max_abs_diff(a: &Dense, b: &Dense) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Random valid ansatz for property checks. `next` must yield uniform
/// values in `[0, 1)`.
pub fn random_ansatz(n_qubits: usize, n_gates: usize, mut next: impl FnMut() -> f64) -> Ansatz {
    let mut pick = |k: usize| ((next() * k as f64) as usize).min(k - 1);
    let mut gates = Vec::with_capacity(n_gates);
    let mut param = 0;
    for _ in 0..n_gates {
        let kinds: &[GateKind] = if n_qubits >= 2 {
            &GateKind::ALL
        } else {
            &GateKind::SINGLE_QUBIT
        };
        // Encoding gates get a share of draws alongside the seven kinds.
        let r = pick(kinds.len() + 1);
        if r == kinds.len() {
            let q = pick(n_qubits);
            gates.push(Gate::encoding(
                GateKind::SINGLE_QUBIT[pick(3)],
                q,
                pick(n_qubits),
            ));
            continue;
        }
        let kind = kinds[r];
        let wires = if kind.arity() == 1 {
            vec![pick(n_qubits)]
        } else {
            let c = pick(n_qubits);
            let t = (c + 1 + pick(n_qubits - 1)) % n_qubits;
            vec![c, t]
        };
        let binding = if kind.is_parametrized() {
            param += 1;
            Binding::Param { index: param - 1 }
        } else {
            Binding::None
        };
        gates.push(Gate::new(kind, wires, binding));
    }
    Ansatz::new(n_qubits, gates)
}
