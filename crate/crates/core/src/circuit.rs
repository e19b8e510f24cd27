//! Gate-level circuit IR with named registers and open/closed controls.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

pub mod qasm;

/// A named, contiguous block of qubits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Register {
    pub name: String,
    /// Global index of local qubit 0.
    pub start: usize,
    pub len: usize,
}

impl Register {
    pub fn qubit(&self, local: usize) -> usize {
        assert!(local < self.len, "qubit {local} out of range for register {}", self.name);
        self.start + local
    }

    pub fn qubits(&self) -> Vec<usize> {
        (self.start..self.start + self.len).collect()
    }

    pub fn contains(&self, qubit: usize) -> bool {
        (self.start..self.start + self.len).contains(&qubit)
    }
}

/// Registers listed most-significant first; global indices are assigned from
/// the last register upward, so the last register holds qubit 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegisterLayout {
    registers: Vec<Register>,
    num_qubits: usize,
}

impl RegisterLayout {
    /// Builds a layout from `(name, len)` pairs in display order.
    /// Zero-length registers are omitted.
    pub fn new(spec: &[(&str, usize)]) -> Result<Self> {
        let mut names = BTreeSet::new();
        for &(name, _) in spec {
            if !names.insert(name) {
                return Err(Error::Structure(format!("duplicate register name `{name}`")));
            }
        }
        let mut registers = Vec::new();
        let mut next = 0;
        for &(name, len) in spec.iter().rev() {
            if len == 0 {
                continue;
            }
            registers.push(Register { name: name.to_string(), start: next, len });
            next += len;
        }
        registers.reverse();
        Ok(Self { registers, num_qubits: next })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn register(&self, name: &str) -> Option<&Register> {
        self.registers.iter().find(|r| r.name == name)
    }

    pub fn qubit(&self, name: &str, local: usize) -> Option<usize> {
        self.register(name).filter(|r| local < r.len).map(|r| r.start + local)
    }

    /// Register containing `qubit`, with the local index inside it.
    pub fn locate(&self, qubit: usize) -> Option<(&Register, usize)> {
        self.registers.iter().find(|r| r.contains(qubit)).map(|r| (r, qubit - r.start))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    /// Active when the control qubit is `|0⟩`.
    Open,
    /// Active when the control qubit is `|1⟩`.
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Control {
    pub qubit: usize,
    pub polarity: Polarity,
}

impl Control {
    pub fn open(qubit: usize) -> Self {
        Self { qubit, polarity: Polarity::Open }
    }

    pub fn closed(qubit: usize) -> Self {
        Self { qubit, polarity: Polarity::Closed }
    }

    /// Control that is active when `qubit` holds bit `bit`.
    pub fn on_bit(qubit: usize, bit: bool) -> Self {
        if bit {
            Self::closed(qubit)
        } else {
            Self::open(qubit)
        }
    }

    /// Controls that fire exactly when `qubits` (LSB first) encode `value`.
    pub fn on_value(qubits: &[usize], value: usize) -> Vec<Self> {
        qubits.iter().enumerate().map(|(i, &q)| Self::on_bit(q, (value >> i) & 1 == 1)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SubcircuitKind {
    /// Cyclic `+1 mod 2^n` on a register.
    Increment,
    /// Cyclic `-1 mod 2^n` on a register.
    Decrement,
}

impl SubcircuitKind {
    pub fn inverse(self) -> Self {
        match self {
            Self::Increment => Self::Decrement,
            Self::Decrement => Self::Increment,
        }
    }
}

/// A named gate sequence that is controlled as a unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Subcircuit {
    pub kind: SubcircuitKind,
    pub gates: Vec<Gate>,
}

impl Subcircuit {
    /// Every qubit the body touches, sorted.
    pub fn qubits(&self) -> Vec<usize> {
        let mut all = BTreeSet::new();
        for g in &self.gates {
            all.extend(g.qubits());
        }
        all.into_iter().collect()
    }

    pub fn inverse(&self) -> Self {
        Self { kind: self.kind.inverse(), gates: self.gates.iter().rev().map(Gate::adjoint).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    X(usize),
    Ry(usize, f64),
    Sub(Arc<Subcircuit>),
}

impl Target {
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Target::X(q) | Target::Ry(q, _) => vec![*q],
            Target::Sub(sub) => sub.qubits(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlledOp {
    pub controls: Vec<Control>,
    pub target: Target,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    H(usize),
    X(usize),
    Z(usize),
    /// `exp(-iθY/2)`, angle in radians.
    Ry(usize, f64),
    Controlled(ControlledOp),
}

impl Gate {
    pub fn controlled(controls: Vec<Control>, target: Target) -> Self {
        Gate::Controlled(ControlledOp { controls, target })
    }

    pub fn mcx(controls: Vec<Control>, target: usize) -> Self {
        Self::controlled(controls, Target::X(target))
    }

    /// Qubits acted on, controls first.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::H(q) | Gate::X(q) | Gate::Z(q) | Gate::Ry(q, _) => vec![*q],
            Gate::Controlled(op) => {
                let mut qs: Vec<usize> = op.controls.iter().map(|c| c.qubit).collect();
                qs.extend(op.target.qubits());
                qs
            }
        }
    }

    pub fn adjoint(&self) -> Gate {
        match self {
            Gate::H(_) | Gate::X(_) | Gate::Z(_) => self.clone(),
            Gate::Ry(q, theta) => Gate::Ry(*q, -theta),
            Gate::Controlled(op) => {
                let target = match &op.target {
                    Target::X(q) => Target::X(*q),
                    Target::Ry(q, theta) => Target::Ry(*q, -theta),
                    Target::Sub(sub) => Target::Sub(Arc::new(sub.inverse())),
                };
                Gate::controlled(op.controls.clone(), target)
            }
        }
    }

    /// Adds `extra` controls. Only X, RY and already-controlled gates qualify.
    pub fn with_controls(&self, extra: &[Control]) -> Result<Gate> {
        if extra.is_empty() {
            return Ok(self.clone());
        }
        let gate = match self {
            Gate::H(q) => return Err(Error::Structure(format!("controlled H on qubit {q} is not supported"))),
            Gate::Z(q) => return Err(Error::Structure(format!("controlled Z on qubit {q} is not supported"))),
            Gate::X(q) => Gate::controlled(extra.to_vec(), Target::X(*q)),
            Gate::Ry(q, theta) => Gate::controlled(extra.to_vec(), Target::Ry(*q, *theta)),
            Gate::Controlled(op) => {
                let mut controls = op.controls.clone();
                controls.extend_from_slice(extra);
                Gate::controlled(controls, op.target.clone())
            }
        };
        Ok(gate)
    }

    /// Checks the gate against a register of `num_qubits` qubits.
    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        match self {
            Gate::H(q) | Gate::X(q) | Gate::Z(q) => check_qubit(*q, num_qubits),
            Gate::Ry(q, theta) => {
                check_qubit(*q, num_qubits)?;
                check_angle(*theta)
            }
            Gate::Controlled(op) => {
                if op.controls.is_empty() {
                    return Err(Error::Structure("controlled operation without controls".into()));
                }
                let mut seen = BTreeSet::new();
                for c in &op.controls {
                    check_qubit(c.qubit, num_qubits)?;
                    if !seen.insert(c.qubit) {
                        return Err(Error::Structure(format!("qubit {} used twice as a control", c.qubit)));
                    }
                }
                match &op.target {
                    Target::X(_) => {}
                    Target::Ry(_, theta) => check_angle(*theta)?,
                    Target::Sub(sub) => {
                        if sub.gates.is_empty() {
                            return Err(Error::Structure("empty controlled subcircuit".into()));
                        }
                        for g in &sub.gates {
                            g.validate(num_qubits)?;
                        }
                    }
                }
                for q in op.target.qubits() {
                    check_qubit(q, num_qubits)?;
                    if seen.contains(&q) {
                        return Err(Error::Structure(format!("qubit {q} is both control and target")));
                    }
                }
                Ok(())
            }
        }
    }
}

fn check_qubit(q: usize, num_qubits: usize) -> Result<()> {
    if q >= num_qubits {
        return Err(Error::Structure(format!("qubit {q} outside a {num_qubits}-qubit layout")));
    }
    Ok(())
}

fn check_angle(theta: f64) -> Result<()> {
    if !theta.is_finite() {
        return Err(Error::Structure(format!("non-finite rotation angle {theta}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Metrics {
    pub gate_count: usize,
    pub two_plus_qubit_count: usize,
    pub depth: usize,
}

/// An ordered gate list over a register layout. Gate order is time order.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    layout: RegisterLayout,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(layout: RegisterLayout) -> Self {
        Self { layout, gates: Vec::new() }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn num_qubits(&self) -> usize {
        self.layout.num_qubits()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.num_qubits())?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend<I: IntoIterator<Item = Gate>>(&mut self, gates: I) -> Result<()> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    /// Returns the circuit with `gate` appended.
    pub fn append(mut self, gate: Gate) -> Result<Self> {
        self.push(gate)?;
        Ok(self)
    }

    /// Reversed gate order with every gate replaced by its adjoint.
    pub fn inverse(&self) -> Self {
        Self { layout: self.layout.clone(), gates: self.gates.iter().rev().map(Gate::adjoint).collect() }
    }

    /// Adds `extra` controls to every gate.
    pub fn with_controls(&self, extra: &[Control]) -> Result<Self> {
        let used = self.used_qubits();
        for c in extra {
            check_qubit(c.qubit, self.num_qubits())?;
            if used.contains(&c.qubit) {
                return Err(Error::Structure(format!("extra control {} is already used by the circuit", c.qubit)));
            }
        }
        let mut out = Circuit::new(self.layout.clone());
        for g in &self.gates {
            out.push(g.with_controls(extra)?)?;
        }
        Ok(out)
    }

    pub fn used_qubits(&self) -> BTreeSet<usize> {
        self.gates.iter().flat_map(Gate::qubits).collect()
    }

    /// Inlines every controlled subcircuit into individually controlled gates.
    pub fn flattened(&self) -> Self {
        let mut gates = Vec::new();
        for g in &self.gates {
            flatten_into(g, &[], &mut gates);
        }
        Self { layout: self.layout.clone(), gates }
    }

    /// Gate count, multi-qubit gate count and ASAP depth over qubit-disjoint layers.
    pub fn metrics(&self) -> Metrics {
        let mut ready = vec![0usize; self.num_qubits()];
        let mut m = Metrics::default();
        for g in &self.gates {
            let qs = g.qubits();
            let layer = qs.iter().map(|&q| ready[q]).max().unwrap_or(0) + 1;
            for &q in &qs {
                ready[q] = layer;
            }
            m.gate_count += 1;
            if qs.len() >= 2 {
                m.two_plus_qubit_count += 1;
            }
            m.depth = m.depth.max(layer);
        }
        m
    }
}

fn flatten_into(gate: &Gate, outer: &[Control], out: &mut Vec<Gate>) {
    match gate {
        Gate::Controlled(ControlledOp { controls, target: Target::Sub(sub) }) => {
            let mut all = outer.to_vec();
            all.extend_from_slice(controls);
            for g in &sub.gates {
                flatten_into(g, &all, out);
            }
        }
        g => out.push(g.with_controls(outer).expect("subcircuit bodies contain controllable gates")),
    }
}
