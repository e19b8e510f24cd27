//! Block-encoding circuits for scaled Laplacians.
//!
//! The 1D encodings prepare `l = (l1, l0)` in `½ Σ (-1)^{l0+l1} |l⟩` with H and
//! Z, apply `S⁻` when `l1 = 0` and `S⁺` when `l0 = 1`, and close with H. The
//! four branches carry `|j-1⟩`, `-|j⟩`, `-|j⟩` and `|j+1⟩`, so postselecting
//! `l = 00` yields `¼(|j-1⟩ - 2|j⟩ + |j+1⟩)`. Boundary comparators flip `del`
//! on the branches that must not contribute at `j = 0` and `j = N-1`.
//!
//! In D dimensions a selector register `k` is prepared in `Σ_d √ω_d |d-1⟩`,
//! every per-axis block is controlled on `k = d-1`, and the preparation is
//! undone at the end, which weights axis `d` by `ω_d`.

use std::sync::Arc;

use serde::Serialize;

use crate::circuit::{Circuit, Control, Gate, Register, RegisterLayout, Subcircuit, SubcircuitKind, Target};
use crate::error::{Error, Result};
use crate::lattice::{ceil_log2, weights, BoundaryCondition, LaplacianSpec};

/// Allowed deviation of `Σ ω_d` from one.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftDirection {
    /// `S⁻|j⟩ = |j-1 mod N⟩`
    Minus,
    /// `S⁺|j⟩ = |j+1 mod N⟩`
    Plus,
}

/// A synthesized block encoding and the bookkeeping needed to use it.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingDescriptor {
    pub circuit: Circuit,
    /// Sub-normalization of the scaled operator; always 1.
    pub alpha: f64,
    pub ancilla_count: usize,
    pub system_qubits: usize,
    pub spec: LaplacianSpec,
}

/// JSON sidecar written next to the OpenQASM export.
#[derive(Debug, Serialize)]
struct DescriptorRecord<'a> {
    schema: u32,
    label: String,
    spec: &'a LaplacianSpec,
    weights: Vec<f64>,
    alpha: f64,
    ancilla_count: usize,
    system_qubits: usize,
    total_qubits: usize,
    registers: &'a [Register],
}

impl EncodingDescriptor {
    pub fn to_json(&self) -> String {
        let record = DescriptorRecord {
            schema: 1,
            label: self.spec.label(),
            spec: &self.spec,
            weights: weights(&self.spec),
            alpha: self.alpha,
            ancilla_count: self.ancilla_count,
            system_qubits: self.system_qubits,
            total_qubits: self.circuit.num_qubits(),
            registers: self.circuit.layout().registers(),
        };
        serde_json::to_string_pretty(&record).expect("descriptor serializes")
    }
}

/// Name of the grid register for axis `d` (1-based).
pub fn grid_register(d: usize) -> String {
    format!("j{d}")
}

/// Ripple increment (or decrement) on `qubits`, LSB first: bit `i` flips
/// when all lower bits are 1 (or all 0), most-significant bit first.
fn shift_gates(qubits: &[usize], direction: ShiftDirection) -> Vec<Gate> {
    let carry = direction == ShiftDirection::Plus;
    (0..qubits.len())
        .rev()
        .map(|i| {
            if i == 0 {
                Gate::X(qubits[0])
            } else {
                let controls = qubits[..i].iter().map(|&q| Control::on_bit(q, carry)).collect();
                Gate::mcx(controls, qubits[i])
            }
        })
        .collect()
}

fn shift_subcircuit(qubits: &[usize], direction: ShiftDirection) -> Arc<Subcircuit> {
    let kind = match direction {
        ShiftDirection::Plus => SubcircuitKind::Increment,
        ShiftDirection::Minus => SubcircuitKind::Decrement,
    };
    Arc::new(Subcircuit { kind, gates: shift_gates(qubits, direction) })
}

/// Cyclic shift `S∓` on a standalone `n`-qubit register named `j`.
pub fn build_shift(n_qubits: usize, direction: ShiftDirection) -> Result<Circuit> {
    if n_qubits == 0 {
        return Err(Error::Spec("a shift needs at least one qubit".into()));
    }
    let layout = RegisterLayout::new(&[("j", n_qubits)])?;
    let qubits: Vec<usize> = (0..n_qubits).collect();
    let mut c = Circuit::new(layout);
    c.extend(shift_gates(&qubits, direction))?;
    Ok(c)
}

/// Qubits an axis block acts on.
struct AxisWires {
    del: Option<usize>,
    l0: usize,
    l1: usize,
    grid: Vec<usize>,
}

/// Boundary comparators plus controlled shifts for one axis, without the
/// H/Z preparation of `l`.
fn axis_block(bc: BoundaryCondition, wires: &AxisWires) -> Result<Vec<Gate>> {
    let last = (1usize << wires.grid.len()) - 1;
    // (grid value, l0 closed?, l1 closed?)
    let flags: &[(usize, bool, bool)] = match bc {
        BoundaryCondition::Periodic => &[],
        BoundaryCondition::Dirichlet => &[(0, false, false), (last, true, true)],
        BoundaryCondition::Neumann => {
            &[(0, false, false), (0, true, false), (last, true, true), (last, true, false)]
        }
    };
    let mut gates = Vec::with_capacity(flags.len() + 2);
    if !flags.is_empty() {
        let del = wires
            .del
            .ok_or_else(|| Error::Structure(format!("{bc} boundary needs a del ancilla")))?;
        for &(value, l0, l1) in flags {
            let mut controls = Control::on_value(&wires.grid, value);
            controls.push(Control::on_bit(wires.l0, l0));
            controls.push(Control::on_bit(wires.l1, l1));
            gates.push(Gate::mcx(controls, del));
        }
    }
    gates.push(Gate::controlled(
        vec![Control::open(wires.l1)],
        Target::Sub(shift_subcircuit(&wires.grid, ShiftDirection::Minus)),
    ));
    gates.push(Gate::controlled(
        vec![Control::closed(wires.l0)],
        Target::Sub(shift_subcircuit(&wires.grid, ShiftDirection::Plus)),
    ));
    Ok(gates)
}

fn prepare_l(l0: usize, l1: usize) -> [Gate; 4] {
    [Gate::H(l0), Gate::H(l1), Gate::Z(l0), Gate::Z(l1)]
}

/// Exact `(1, m, 0)` block encoding of the scaled 1D Laplacian.
///
/// `m = 2` for periodic boundaries, `m = 3` otherwise.
pub fn build_1d(bc: BoundaryCondition, n_qubits: usize) -> Result<EncodingDescriptor> {
    let spec = LaplacianSpec::one_dim(bc, n_qubits, 1.0)?;
    build_1d_for(spec)
}

fn build_1d_for(spec: LaplacianSpec) -> Result<EncodingDescriptor> {
    let axis = spec.axes()[0];
    let del_len = usize::from(axis.bc != BoundaryCondition::Periodic);
    let grid = grid_register(1);
    let layout = RegisterLayout::new(&[("del", del_len), ("l", 2), (&grid, axis.n_qubits)])?;
    let wires = AxisWires {
        del: layout.qubit("del", 0),
        l0: layout.qubit("l", 0).expect("l register"),
        l1: layout.qubit("l", 1).expect("l register"),
        grid: layout.register(&grid).expect("grid register").qubits(),
    };
    let mut circuit = Circuit::new(layout);
    circuit.extend(prepare_l(wires.l0, wires.l1))?;
    circuit.extend(axis_block(axis.bc, &wires)?)?;
    circuit.extend([Gate::H(wires.l0), Gate::H(wires.l1)])?;
    Ok(EncodingDescriptor {
        circuit,
        alpha: 1.0,
        ancilla_count: 2 + del_len,
        system_qubits: axis.n_qubits,
        spec,
    })
}

fn validate_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::Spec("state preparation needs at least one weight".into()));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(Error::Spec(format!("weights must be positive and finite, got {w}")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(Error::Spec(format!("weights sum to {total}, expected 1")));
    }
    Ok(())
}

/// Rotation tree preparing `Σ_d √ω_d |d⟩` on `qubits` (LSB first).
///
/// Qubit `b` is rotated once per value `p` of the lower `b` bits, controlled
/// on that value, so that `P(bit b = 0 | lower bits = p)` is the weight of
/// the residue class `p mod 2^{b+1}` within `p mod 2^b`. For up to four
/// weights this is the familiar three-rotation circuit with
/// `θ₀ = 2 arccos √(ω₀+ω₂)`, `θ₁ = 2 arccos √(ω₀/(ω₀+ω₂))` and
/// `θ₂ = 2 arccos √(ω₁/(ω₁+ω₃))`.
fn prep_gates(weights: &[f64], qubits: &[usize]) -> Vec<Gate> {
    let class_weight = |residue: usize, modulus: usize| -> f64 {
        weights.iter().skip(residue).step_by(modulus).sum()
    };
    let mut gates = Vec::new();
    for (b, &target) in qubits.iter().enumerate() {
        for p in 0..(1usize << b) {
            let parent = class_weight(p, 1 << b);
            let ratio = (class_weight(p, 1 << (b + 1)) / parent).clamp(0.0, 1.0);
            let theta = 2.0 * ratio.sqrt().acos();
            let gate = if b == 0 {
                Gate::Ry(target, theta)
            } else {
                Gate::controlled(Control::on_value(&qubits[..b], p), Target::Ry(target, theta))
            };
            gates.push(gate);
        }
    }
    gates
}

/// State preparation for the selector register `k` (`⌈log₂ D⌉` qubits).
pub fn build_prep_k(weights: &[f64]) -> Result<Circuit> {
    validate_weights(weights)?;
    let width = ceil_log2(weights.len());
    let layout = RegisterLayout::new(&[("k", width)])?;
    let qubits: Vec<usize> = (0..width).collect();
    let mut c = Circuit::new(layout);
    c.extend(prep_gates(weights, &qubits))?;
    Ok(c)
}

/// Exact `(1, 3 + ⌈log₂ D⌉, 0)` block encoding of the scaled D-dimensional
/// Laplacian; a single axis delegates to [`build_1d`]'s construction.
pub fn build_nd(spec: &LaplacianSpec) -> Result<EncodingDescriptor> {
    if spec.dims() == 1 {
        return build_1d_for(spec.clone());
    }
    let dims = spec.dims();
    let selector = spec.selector_qubits();
    let grid_names: Vec<String> = (1..=dims).map(grid_register).collect();
    let mut registers: Vec<(&str, usize)> = vec![("k", selector), ("del", 1), ("l", 2)];
    for d in (0..dims).rev() {
        registers.push((&grid_names[d], spec.axes()[d].n_qubits));
    }
    let layout = RegisterLayout::new(&registers)?;

    let k = layout.register("k").expect("selector register").qubits();
    let l0 = layout.qubit("l", 0).expect("l register");
    let l1 = layout.qubit("l", 1).expect("l register");
    let prep = prep_gates(&weights(spec), &k);

    let mut circuit = Circuit::new(layout.clone());
    circuit.extend(prep.iter().cloned())?;
    circuit.extend(prepare_l(l0, l1))?;
    for (d, axis) in spec.axes().iter().enumerate() {
        let wires = AxisWires {
            del: layout.qubit("del", 0),
            l0,
            l1,
            grid: layout.register(&grid_names[d]).expect("grid register").qubits(),
        };
        let mut block = Circuit::new(layout.clone());
        block.extend(axis_block(axis.bc, &wires)?)?;
        let selected = block.with_controls(&Control::on_value(&k, d))?;
        circuit.extend(selected.gates().iter().cloned())?;
    }
    circuit.extend([Gate::H(l0), Gate::H(l1)])?;
    circuit.extend(prep.iter().rev().map(Gate::adjoint))?;

    Ok(EncodingDescriptor {
        circuit,
        alpha: 1.0,
        ancilla_count: 3 + selector,
        system_qubits: spec.total_qubits(),
        spec: spec.clone(),
    })
}
