//! Clifford+T resource estimates.
//!
//! Cost model: an `m`-controlled X costs `2m - 3` Toffolis given two clean
//! ancillas, a modular incrementer on `n` qubits costs `3n` Toffolis with at
//! most five ancillas, and every Toffoli costs 7 T gates. Single-qubit
//! Cliffords, CNOTs and Y rotations carry no T cost; rotations are counted
//! separately.
//!
//! [`estimate_1d`] and [`estimate_nd`] evaluate the closed forms;
//! [`lower_and_count`] applies the same rules gate by gate to an actual
//! circuit. Both label contributions `j<d>/comparators` and `j<d>/shifts`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::circuit::{Circuit, ControlledOp, Gate, Target};
use crate::encoder::grid_register;
use crate::error::{Error, Result};
use crate::lattice::{BoundaryCondition, LaplacianSpec};

pub const T_PER_TOFFOLI: u64 = 7;
/// Clean ancillas assumed by the MCX decomposition.
pub const MCX_CLEAN_ANCILLAS: usize = 2;
/// Ancillas assumed by the incrementer decomposition.
pub const INCREMENTER_ANCILLAS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BreakdownEntry {
    pub label: String,
    pub toffoli: u64,
    pub t: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResourceReport {
    pub ir_gate_count: usize,
    pub toffoli_count: u64,
    pub t_count: u64,
    pub rotation_count: usize,
    pub clean_ancillas_assumed: usize,
    pub breakdown: Vec<BreakdownEntry>,
}

impl ResourceReport {
    pub fn entry(&self, label: &str) -> Option<&BreakdownEntry> {
        self.breakdown.iter().find(|e| e.label == label)
    }
}

/// Accumulates labelled Toffoli counts and derives the report.
#[derive(Default)]
struct Tally {
    toffoli: BTreeMap<String, u64>,
    rotations: usize,
    uses_mcx: bool,
    uses_incrementer: bool,
}

impl Tally {
    fn add(&mut self, label: String, toffoli: u64) {
        *self.toffoli.entry(label).or_default() += toffoli;
    }

    fn finish(self, ir_gate_count: usize) -> ResourceReport {
        let breakdown: Vec<BreakdownEntry> = self
            .toffoli
            .into_iter()
            .map(|(label, toffoli)| BreakdownEntry { label, toffoli, t: toffoli * T_PER_TOFFOLI })
            .collect();
        let toffoli_count = breakdown.iter().map(|e| e.toffoli).sum();
        let clean_ancillas_assumed = if self.uses_incrementer {
            INCREMENTER_ANCILLAS
        } else if self.uses_mcx {
            MCX_CLEAN_ANCILLAS
        } else {
            0
        };
        ResourceReport {
            ir_gate_count,
            toffoli_count,
            t_count: toffoli_count * T_PER_TOFFOLI,
            rotation_count: self.rotations,
            clean_ancillas_assumed,
            breakdown,
        }
    }
}

/// Toffolis for an X with `m_controls` controls: `max(2m - 3, 1)` for
/// `m ≥ 2`, and 0 for a single control (a CNOT is Clifford).
pub fn mcx_toffoli_count(m_controls: usize) -> Result<u64> {
    match m_controls {
        0 => Err(Error::Spec("a multi-controlled X needs at least one control".into())),
        1 => Ok(0),
        m => Ok((2 * m as u64 - 3).max(1)),
    }
}

/// Toffolis for a `±1 mod 2^n` incrementer with `extra_controls` controls.
///
/// Uncontrolled it costs `3n`; with `c` controls every Toffoli becomes a
/// `(c + 2)`-controlled X.
pub fn incrementer_toffoli_count(n_qubits: usize, extra_controls: usize) -> u64 {
    let base = 3 * n_qubits as u64;
    if extra_controls == 0 {
        base
    } else {
        base * (2 * (extra_controls as u64 + 2) - 3)
    }
}

fn comparator_label(axis: usize) -> String {
    format!("{}/comparators", grid_register(axis))
}

fn shift_label(axis: usize) -> String {
    format!("{}/shifts", grid_register(axis))
}

/// Closed-form estimate for a 1D encoding.
///
/// T counts: Neumann `98n + 28`, Dirichlet `70n + 14`, periodic `42n`.
pub fn estimate_1d(bc: BoundaryCondition, n_qubits: usize) -> Result<ResourceReport> {
    if n_qubits == 0 {
        return Err(Error::Spec("an axis needs at least one qubit".into()));
    }
    let mut tally = Tally::default();
    let comparators = bc.comparator_count();
    if comparators > 0 {
        tally.uses_mcx = true;
        tally.add(comparator_label(1), comparators as u64 * mcx_toffoli_count(n_qubits + 2)?);
    }
    tally.uses_incrementer = true;
    // The single ancilla control of each shift is absorbed by the incrementer.
    tally.add(shift_label(1), 2 * incrementer_toffoli_count(n_qubits, 0));
    // H and Z on both l qubits, comparators, two shifts, closing H pair.
    Ok(tally.finish(8 + comparators))
}

/// Closed-form estimate for a D-dimensional encoding.
///
/// Per axis `r` with selector width `d = ⌈log₂ D⌉`: comparators have
/// `n_r + 2 + d` controls (Neumann T term `56n_r + 56d + 28`) and each shift
/// is an incrementer with `d + 1` controls. Selector preparation uses Y
/// rotations only and is reported as a rotation count.
pub fn estimate_nd(spec: &LaplacianSpec) -> Result<ResourceReport> {
    if spec.dims() == 1 {
        let axis = spec.axes()[0];
        return estimate_1d(axis.bc, axis.n_qubits);
    }
    let d = spec.selector_qubits();
    let mut tally = Tally { uses_incrementer: true, ..Tally::default() };
    let mut gates = 0;
    for (r, axis) in spec.axes().iter().enumerate() {
        let comparators = axis.bc.comparator_count();
        if comparators > 0 {
            tally.uses_mcx = true;
            tally.add(comparator_label(r + 1), comparators as u64 * mcx_toffoli_count(axis.n_qubits + 2 + d)?);
        }
        tally.add(shift_label(r + 1), 2 * incrementer_toffoli_count(axis.n_qubits, d + 1));
        gates += comparators + 2;
    }
    // The rotation tree has 2^d - 1 rotations and is applied twice.
    let prep = (1usize << d) - 1;
    tally.rotations = 2 * prep;
    Ok(tally.finish(2 * prep + 4 + gates + 2))
}

/// Walks an encoder circuit and applies the cost rules to each gate.
///
/// Controlled X gates count by the MCX rule. A controlled increment or
/// decrement on `n ≥ 2` qubits counts as an incrementer whose extra
/// controls exclude a lone control (absorbed as in the closed forms); on a
/// single qubit the shift is a bare X and follows the MCX rule. Labels come
/// from the grid register the gate touches.
pub fn lower_and_count(circuit: &Circuit) -> ResourceReport {
    let layout = circuit.layout();
    let grid_label = |qubits: &[usize]| -> Option<String> {
        qubits.iter().find_map(|&q| {
            layout.locate(q).and_then(|(reg, _)| reg.name.starts_with('j').then(|| reg.name.clone()))
        })
    };
    let mut tally = Tally::default();
    for gate in circuit.gates() {
        let Gate::Controlled(ControlledOp { controls, target }) = gate else {
            if matches!(gate, Gate::Ry(..)) {
                tally.rotations += 1;
            }
            continue;
        };
        let m = controls.len();
        match target {
            Target::Ry(..) => tally.rotations += 1,
            Target::X(_) => {
                let control_qubits: Vec<usize> = controls.iter().map(|c| c.qubit).collect();
                let label = grid_label(&control_qubits)
                    .map_or_else(|| "other/mcx".to_string(), |j| format!("{j}/comparators"));
                let toffoli = mcx_toffoli_count(m).expect("validated gates have controls");
                if toffoli > 0 {
                    tally.uses_mcx = true;
                }
                tally.add(label, toffoli);
            }
            Target::Sub(sub) => {
                let register = sub.qubits();
                let label = grid_label(&register).map_or_else(|| "other/shifts".to_string(), |j| format!("{j}/shifts"));
                let toffoli = if register.len() == 1 {
                    mcx_toffoli_count(m).expect("validated gates have controls")
                } else {
                    tally.uses_incrementer = true;
                    incrementer_toffoli_count(register.len(), if m <= 1 { 0 } else { m })
                };
                tally.add(label, toffoli);
            }
        }
    }
    tally.finish(circuit.gates().len())
}
