//! Dense state-vector simulation.
//!
//! Basis index bit `q` holds the value of qubit `q`, so `|q0 q1 ...⟩` with
//! `q0 = 1` and everything else zero is amplitude index 1. Rotations follow
//! `R_P(φ) = exp(-i φ P / 2)`. The model output is `⟨Z⟩` on qubit 0.

use num_complex::Complex64;

use crate::circuit::{Ansatz, Binding, Gate, GateKind, Pauli};
use crate::error::{Error, Result};

/// Upper bound on simulated width; 2^30 amplitudes is 16 GiB.
pub const MAX_QUBITS: usize = 30;

pub type Matrix2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// 2x2 block a gate applies to its target qubit (conditioned on the control
/// for two-qubit kinds). CNOT ignores `angle`.
pub fn target_unitary(kind: GateKind, angle: f64) -> Matrix2 {
    let Some(pauli) = kind.generator() else {
        return [[ZERO, ONE], [ONE, ZERO]];
    };
    rotation(pauli, angle)
}

fn rotation(pauli: Pauli, angle: f64) -> Matrix2 {
    let (s, c) = (angle / 2.0).sin_cos();
    match pauli {
        Pauli::X => [
            [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
            [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
        ],
        Pauli::Y => [
            [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
        ],
        Pauli::Z => [[Complex64::new(c, -s), ZERO], [ZERO, Complex64::new(c, s)]],
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0⟩`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::Dimension(format!(
                "cannot simulate {n_qubits} qubits (supported: 1..={MAX_QUBITS})"
            )));
        }
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[0] = ONE;
        Ok(StateVector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn reset(&mut self) {
        self.amps.fill(ZERO);
        self.amps[0] = ONE;
    }

    pub fn norm(&self) -> f64 {
        self.amps
            .iter()
            .map(Complex64::norm_sqr)
            .sum::<f64>()
            .sqrt()
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amps[index].norm_sqr()
    }

    /// `⟨Z_q⟩`.
    pub fn expectation_z(&self, qubit: usize) -> f64 {
        let mask = 1 << qubit;
        self.amps
            .iter()
            .enumerate()
            .map(|(i, a)| {
                if i & mask == 0 {
                    a.norm_sqr()
                } else {
                    -a.norm_sqr()
                }
            })
            .sum()
    }

    /// Applies `gate` in place. `angle` must be present exactly when the gate
    /// kind is parametrized.
    pub fn apply_gate(&mut self, gate: &Gate, angle: Option<f64>) -> Result<()> {
        self.check_wires(gate)?;
        let angle = match (gate.kind.is_parametrized(), angle) {
            (true, Some(a)) if a.is_finite() => a,
            (true, Some(a)) => {
                return Err(Error::Numeric(format!("non-finite angle {a} for {gate}")))
            }
            (true, None) => return Err(Error::Config(format!("{gate} needs an angle"))),
            (false, Some(_)) => return Err(Error::Config(format!("{gate} takes no angle"))),
            (false, None) => 0.0,
        };
        self.apply_unchecked(gate, angle);
        Ok(())
    }

    fn check_wires(&self, gate: &Gate) -> Result<()> {
        let arity = gate.kind.arity();
        if gate.wires.len() != arity {
            return Err(Error::Dimension(format!("{gate}: expected {arity} wires")));
        }
        if let Some(w) = gate.wires.iter().find(|&&w| w >= self.n_qubits) {
            return Err(Error::Dimension(format!(
                "{gate}: wire {w} out of range for {} qubits",
                self.n_qubits
            )));
        }
        if arity == 2 && gate.wires[0] == gate.wires[1] {
            return Err(Error::Dimension(format!("{gate}: duplicate wires")));
        }
        Ok(())
    }

    fn apply_unchecked(&mut self, gate: &Gate, angle: f64) {
        apply_raw(&mut self.amps, gate, angle);
    }
}

fn apply_raw(amps: &mut [Complex64], gate: &Gate, angle: f64) {
    match gate.kind {
        GateKind::Cnot => cnot(amps, gate.wires[0], gate.wires[1]),
        kind if kind.arity() == 1 => apply_1q(amps, gate.wires[0], &target_unitary(kind, angle)),
        kind => apply_controlled(
            amps,
            gate.wires[0],
            gate.wires[1],
            &target_unitary(kind, angle),
        ),
    }
}

fn apply_1q(amps: &mut [Complex64], qubit: usize, m: &Matrix2) {
    let stride = 1 << qubit;
    for block in amps.chunks_exact_mut(stride << 1) {
        let (lo, hi) = block.split_at_mut(stride);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = m[0][0] * x + m[0][1] * y;
            *b = m[1][0] * x + m[1][1] * y;
        }
    }
}

fn apply_controlled(amps: &mut [Complex64], control: usize, target: usize, m: &Matrix2) {
    let cmask = 1 << control;
    let tmask = 1 << target;
    for i in 0..amps.len() {
        if i & cmask != 0 && i & tmask == 0 {
            let j = i | tmask;
            let (x, y) = (amps[i], amps[j]);
            amps[i] = m[0][0] * x + m[0][1] * y;
            amps[j] = m[1][0] * x + m[1][1] * y;
        }
    }
}

fn cnot(amps: &mut [Complex64], control: usize, target: usize) {
    let cmask = 1 << control;
    let tmask = 1 << target;
    for i in 0..amps.len() {
        if i & cmask != 0 && i & tmask == 0 {
            amps.swap(i, i | tmask);
        }
    }
}

/// `⟨bra| P_target |ket⟩`, restricted to the control-set subspace when a
/// control is given.
fn generator_overlap(
    bra: &[Complex64],
    ket: &[Complex64],
    pauli: Pauli,
    target: usize,
    control: Option<usize>,
) -> Complex64 {
    let tmask = 1 << target;
    let cmask = control.map_or(0, |c| 1 << c);
    let mut acc = ZERO;
    for i in 0..ket.len() {
        if i & tmask != 0 || i & cmask != cmask {
            continue;
        }
        let j = i | tmask;
        let (k0, k1) = (ket[i], ket[j]);
        let (p0, p1) = match pauli {
            Pauli::X => (k1, k0),
            Pauli::Y => (Complex64::new(k1.im, -k1.re), Complex64::new(-k0.im, k0.re)),
            Pauli::Z => (k0, -k1),
        };
        acc += bra[i].conj() * p0 + bra[j].conj() * p1;
    }
    acc
}

fn check_inputs(a: &Ansatz, params: &[f64], x: &[f64]) -> Result<()> {
    if params.len() != a.n_params {
        return Err(Error::Dimension(format!(
            "ansatz has {} parameters, got {}",
            a.n_params,
            params.len()
        )));
    }
    if x.len() != a.n_features() {
        return Err(Error::Dimension(format!(
            "ansatz expects {} features, got {}",
            a.n_features(),
            x.len()
        )));
    }
    if let Some(v) = params.iter().chain(x).find(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("non-finite input {v}")));
    }
    Ok(())
}

fn resolve(gate: &Gate, params: &[f64], x: &[f64]) -> Result<Option<f64>> {
    Ok(match gate.binding {
        Binding::Feature { index } => Some(
            *x.get(index)
                .ok_or_else(|| Error::Dimension(format!("{gate}: feature {index} out of range")))?,
        ),
        Binding::Param { index } => {
            Some(*params.get(index).ok_or_else(|| {
                Error::Dimension(format!("{gate}: parameter {index} out of range"))
            })?)
        }
        Binding::None => None,
    })
}

fn run_forward(state: &mut StateVector, a: &Ansatz, params: &[f64], x: &[f64]) -> Result<()> {
    state.reset();
    for gate in &a.gates {
        let angle = resolve(gate, params, x)?;
        state.apply_gate(gate, angle)?;
    }
    Ok(())
}

/// Runs the circuit from `|0...0⟩` and returns the final state.
pub fn simulate(a: &Ansatz, params: &[f64], x: &[f64]) -> Result<StateVector> {
    check_inputs(a, params, x)?;
    let mut state = StateVector::zero(a.n_qubits)?;
    run_forward(&mut state, a, params, x)?;
    Ok(state)
}

/// Model output `⟨Z_0⟩` for one feature row.
pub fn predict(a: &Ansatz, params: &[f64], x: &[f64]) -> Result<f64> {
    Ok(simulate(a, params, x)?.expectation_z(0))
}

pub fn predict_batch<R: AsRef<[f64]>>(a: &Ansatz, params: &[f64], rows: &[R]) -> Result<Vec<f64>> {
    let mut scratch = AdjointScratch::new(a.n_qubits)?;
    rows.iter()
        .map(|x| scratch.predict(a, params, x.as_ref()))
        .collect()
}

/// Squared-error loss and its exact parameter gradient for one sample.
pub fn gradient(a: &Ansatz, params: &[f64], x: &[f64], y: f64) -> Result<(f64, Vec<f64>)> {
    let mut scratch = AdjointScratch::new(a.n_qubits)?;
    let mut grad = vec![0.0; a.n_params];
    let loss = scratch.loss_gradient(a, params, x, y, &mut grad)?;
    Ok((loss, grad))
}

/// Reusable buffers for adjoint differentiation.
///
/// One forward pass, then a single reverse sweep that un-applies each gate
/// to both the state and the co-state `λ = U_after† Z_0 ψ`. For a gate
/// `exp(-iθP/2)` the output derivative is `Im ⟨λ|P|ψ_after⟩`.
#[derive(Clone, Debug)]
pub struct AdjointScratch {
    psi: StateVector,
    lambda: Vec<Complex64>,
}

impl AdjointScratch {
    pub fn new(n_qubits: usize) -> Result<Self> {
        let psi = StateVector::zero(n_qubits)?;
        let lambda = psi.amps.clone();
        Ok(AdjointScratch { psi, lambda })
    }

    fn ensure_width(&mut self, n_qubits: usize) -> Result<()> {
        if self.psi.n_qubits != n_qubits {
            *self = AdjointScratch::new(n_qubits)?;
        }
        Ok(())
    }

    pub fn state(&self) -> &StateVector {
        &self.psi
    }

    pub fn predict(&mut self, a: &Ansatz, params: &[f64], x: &[f64]) -> Result<f64> {
        check_inputs(a, params, x)?;
        self.ensure_width(a.n_qubits)?;
        run_forward(&mut self.psi, a, params, x)?;
        Ok(self.psi.expectation_z(0))
    }

    /// Writes `d⟨Z_0⟩/dθ` into `out` and returns `⟨Z_0⟩`.
    pub fn output_gradient(
        &mut self,
        a: &Ansatz,
        params: &[f64],
        x: &[f64],
        out: &mut [f64],
    ) -> Result<f64> {
        if out.len() != a.n_params {
            return Err(Error::Dimension(format!(
                "gradient buffer has length {}, expected {}",
                out.len(),
                a.n_params
            )));
        }
        let value = self.predict(a, params, x)?;

        self.lambda.copy_from_slice(&self.psi.amps);
        for (i, l) in self.lambda.iter_mut().enumerate() {
            if i & 1 != 0 {
                *l = -*l;
            }
        }

        for gate in a.gates.iter().rev() {
            // Inputs were bound and checked on the forward pass.
            let angle = resolve(gate, params, x)?.unwrap_or(0.0);
            if let (Binding::Param { index }, Some(pauli)) = (gate.binding, gate.kind.generator()) {
                let (target, control) = match gate.wires[..] {
                    [t] => (t, None),
                    [c, t] => (t, Some(c)),
                    _ => unreachable!("wire count checked on forward pass"),
                };
                out[index] =
                    generator_overlap(&self.lambda, &self.psi.amps, pauli, target, control).im;
            }
            // Every kind is inverted by negating its angle; CNOT ignores it.
            apply_raw(&mut self.psi.amps, gate, -angle);
            apply_raw(&mut self.lambda, gate, -angle);
        }
        Ok(value)
    }

    /// Writes `d(pred - y)^2/dθ` into `grad` and returns the loss.
    pub fn loss_gradient(
        &mut self,
        a: &Ansatz,
        params: &[f64],
        x: &[f64],
        y: f64,
        grad: &mut [f64],
    ) -> Result<f64> {
        let pred = self.output_gradient(a, params, x, grad)?;
        let residual = pred - y;
        for g in grad.iter_mut() {
            *g *= 2.0 * residual;
        }
        Ok(residual * residual)
    }
}
