//! OpenQASM 3 text export.
//!
//! Subcircuits are inlined. Controls become `ctrl @` / `negctrl @` modifiers
//! whose operands precede the target in the same order as the IR controls.

use std::fmt::Write;

use super::{Circuit, Control, Gate, Polarity, RegisterLayout, Target};
use crate::format::g17;

pub fn to_qasm(circuit: &Circuit) -> String {
    let layout = circuit.layout();
    let mut out = String::from("OPENQASM 3.0;\ninclude \"stdgates.inc\";\n");
    for reg in layout.registers() {
        writeln!(out, "qubit[{}] {};", reg.len, reg.name).unwrap();
    }
    for gate in circuit.flattened().gates() {
        out.push_str(&gate_line(layout, gate));
        out.push('\n');
    }
    out
}

fn operand(layout: &RegisterLayout, qubit: usize) -> String {
    let (reg, local) = layout.locate(qubit).expect("validated qubit");
    format!("{}[{local}]", reg.name)
}

fn gate_line(layout: &RegisterLayout, gate: &Gate) -> String {
    match gate {
        Gate::H(q) => format!("h {};", operand(layout, *q)),
        Gate::X(q) => format!("x {};", operand(layout, *q)),
        Gate::Z(q) => format!("z {};", operand(layout, *q)),
        Gate::Ry(q, theta) => format!("ry({}) {};", g17(*theta), operand(layout, *q)),
        Gate::Controlled(op) => {
            let (name, target) = match &op.target {
                Target::X(q) => ("x".to_string(), *q),
                Target::Ry(q, theta) => (format!("ry({})", g17(*theta)), *q),
                Target::Sub(_) => unreachable!("flattened circuits contain no subcircuits"),
            };
            let mut operands: Vec<String> = op.controls.iter().map(|c| operand(layout, c.qubit)).collect();
            operands.push(operand(layout, target));
            format!("{}{name} {};", modifiers(&op.controls), operands.join(", "))
        }
    }
}

/// Groups consecutive controls of equal polarity, e.g. `ctrl(2) @ negctrl @ `.
fn modifiers(controls: &[Control]) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < controls.len() {
        let polarity = controls[i].polarity;
        let run = controls[i..].iter().take_while(|c| c.polarity == polarity).count();
        let word = match polarity {
            Polarity::Closed => "ctrl",
            Polarity::Open => "negctrl",
        };
        if run == 1 {
            write!(out, "{word} @ ").unwrap();
        } else {
            write!(out, "{word}({run}) @ ").unwrap();
        }
        i += run;
    }
    out
}
