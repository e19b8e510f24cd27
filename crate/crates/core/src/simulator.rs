//! Dense statevector simulation, block extraction and success probabilities.
//!
//! Global qubit `q` is bit `q` of the basis index. Encoder layouts put the
//! system registers on the lowest qubits, so `|0…0⟩_anc ⊗ |j⟩` is basis
//! index `j` and the postselected block occupies the first `N` amplitudes.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::circuit::{Circuit, Gate, Polarity, Target};
use crate::encoder::EncodingDescriptor;
use crate::error::{Error, Result};
use crate::format::g17;
use crate::lattice::{LaplacianSpec, SparseMatrix, DEFAULT_MAX_DIM};

/// Default cap on simulated qubits (`2^20` amplitudes).
pub const DEFAULT_MAX_QUBITS: usize = 20;

/// Tolerance on `‖v‖₂ = 1` for physical input states.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Largest imaginary part tolerated when reporting a block as real.
pub const IMAG_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOptions {
    pub max_qubits: usize,
    /// Worker threads for column extraction; `1` runs inline.
    pub threads: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { max_qubits: DEFAULT_MAX_QUBITS, threads: 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(num_qubits: usize) -> Self {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        if !amplitudes.len().is_power_of_two() {
            return Err(Error::Spec(format!("{} amplitudes is not a power of two", amplitudes.len())));
        }
        Ok(Self { amplitudes })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::from_amplitudes(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn num_qubits(&self) -> usize {
        self.amplitudes.len().trailing_zeros() as usize
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= NORM_TOLERANCE
    }

    /// Applies `gate` in place. Qubits must lie inside the state.
    pub fn apply(&mut self, gate: &Gate) {
        apply_controlled(&mut self.amplitudes, gate, 0, 0);
    }
}

/// Pure form of [`StateVector::apply`].
pub fn apply_gate(mut state: StateVector, gate: &Gate) -> StateVector {
    state.apply(gate);
    state
}

#[derive(Clone, Copy)]
enum Single {
    H,
    X,
    Z,
    Ry { cos: f64, sin: f64 },
}

impl Single {
    fn ry(theta: f64) -> Self {
        let (sin, cos) = (theta / 2.0).sin_cos();
        Single::Ry { cos, sin }
    }
}

fn apply_controlled(amps: &mut [Complex64], gate: &Gate, mask: usize, value: usize) {
    match gate {
        Gate::H(q) => apply_single(amps, *q, mask, value, Single::H),
        Gate::X(q) => apply_single(amps, *q, mask, value, Single::X),
        Gate::Z(q) => apply_single(amps, *q, mask, value, Single::Z),
        Gate::Ry(q, theta) => apply_single(amps, *q, mask, value, Single::ry(*theta)),
        Gate::Controlled(op) => {
            let (mut mask, mut value) = (mask, value);
            for c in &op.controls {
                mask |= 1 << c.qubit;
                if c.polarity == Polarity::Closed {
                    value |= 1 << c.qubit;
                }
            }
            match &op.target {
                Target::X(q) => apply_single(amps, *q, mask, value, Single::X),
                Target::Ry(q, theta) => apply_single(amps, *q, mask, value, Single::ry(*theta)),
                Target::Sub(sub) => {
                    for g in &sub.gates {
                        apply_controlled(amps, g, mask, value);
                    }
                }
            }
        }
    }
}

fn apply_single(amps: &mut [Complex64], target: usize, mask: usize, value: usize, op: Single) {
    let bit = 1usize << target;
    assert!(bit < amps.len(), "qubit {target} outside the state");
    let frac = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..amps.len() {
        if i & bit != 0 || i & mask != value {
            continue;
        }
        let j = i | bit;
        let (a, b) = (amps[i], amps[j]);
        let (na, nb) = match op {
            Single::H => ((a + b) * frac, (a - b) * frac),
            Single::X => (b, a),
            Single::Z => (a, -b),
            Single::Ry { cos, sin } => (a * cos - b * sin, a * sin + b * cos),
        };
        amps[i] = na;
        amps[j] = nb;
    }
}

/// Applies every gate of `circuit` to `input` in order.
pub fn run(circuit: &Circuit, mut input: StateVector) -> Result<StateVector> {
    if input.num_qubits() != circuit.num_qubits() {
        return Err(Error::Spec(format!(
            "state has {} qubits but the circuit acts on {}",
            input.num_qubits(),
            circuit.num_qubits()
        )));
    }
    for gate in circuit.gates() {
        input.apply(gate);
    }
    Ok(input)
}

/// Location and size of the largest entrywise deviation between two matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviation {
    pub max_abs: f64,
    pub row: usize,
    pub col: usize,
}

/// The postselected top-left block `(⟨0|^⊗m ⊗ I) U (|0⟩^⊗m ⊗ I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix {
    dim: usize,
    /// Row-major real parts.
    entries: Vec<f64>,
    max_imag: f64,
}

impl BlockMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim + col]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.dim).map(|r| self.get(r, col)).collect()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Largest imaginary magnitude seen before the parts were discarded.
    pub fn max_imag(&self) -> f64 {
        self.max_imag
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.dim).all(|r| (0..r).all(|c| (self.get(r, c) - self.get(c, r)).abs() <= tol))
    }

    /// Entrywise comparison against a sparse oracle. Ties keep the first
    /// entry in row-major order.
    pub fn max_deviation(&self, oracle: &SparseMatrix) -> Result<Deviation> {
        if oracle.dim() != self.dim {
            return Err(Error::Spec(format!(
                "oracle dimension {} does not match block dimension {}",
                oracle.dim(),
                self.dim
            )));
        }
        let reference = oracle.to_dense(self.entries.len())?;
        let mut dev = Deviation { max_abs: 0.0, row: 0, col: 0 };
        for (i, (a, b)) in self.entries.iter().zip(&reference).enumerate() {
            let d = (a - b).abs();
            if d > dev.max_abs || d.is_nan() {
                dev = Deviation { max_abs: d, row: i / self.dim, col: i % self.dim };
            }
        }
        Ok(dev)
    }

    /// Heatmap CSV with a `row,col,value` header, row-major.
    pub fn write_heatmap_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "row,col,value")?;
        for r in 0..self.dim {
            for c in 0..self.dim {
                writeln!(out, "{r},{c},{}", g17(self.get(r, c)))?;
            }
        }
        Ok(())
    }
}

fn check_cap(circuit: &Circuit, opts: &SimOptions) -> Result<()> {
    if circuit.num_qubits() > opts.max_qubits {
        return Err(Error::Resource(format!(
            "simulating {} qubits exceeds the cap of {}",
            circuit.num_qubits(),
            opts.max_qubits
        )));
    }
    Ok(())
}

/// Runs `f` on a dedicated pool of `threads` workers, or inline for one thread.
fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads <= 1 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Resource(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Extracts the encoded block column by column without forming the unitary.
///
/// Columns are independent, so the result does not depend on `opts.threads`.
pub fn extract_block(desc: &EncodingDescriptor, opts: &SimOptions) -> Result<BlockMatrix> {
    let circuit = &desc.circuit;
    check_cap(circuit, opts)?;
    let q = circuit.num_qubits();
    let dim = 1usize << desc.system_qubits;
    let column = |j: usize| -> Vec<Complex64> {
        let mut state = StateVector::basis(q, j);
        for g in circuit.gates() {
            state.apply(g);
        }
        state.amplitudes.truncate(dim);
        state.amplitudes
    };
    let columns: Vec<Vec<Complex64>> = if opts.threads <= 1 {
        (0..dim).map(column).collect()
    } else {
        with_threads(opts.threads, || (0..dim).into_par_iter().map(column).collect())?
    };

    let mut entries = vec![0.0; dim * dim];
    let mut max_imag = 0.0f64;
    for (c, col) in columns.iter().enumerate() {
        for (r, a) in col.iter().enumerate() {
            entries[r * dim + c] = a.re;
            max_imag = max_imag.max(a.im.abs());
        }
    }
    if max_imag > IMAG_TOLERANCE {
        return Err(Error::Degenerate(format!("extracted block has imaginary parts up to {max_imag:e}")));
    }
    Ok(BlockMatrix { dim, entries, max_imag })
}

/// Probability that all ancillas measure `0` for system input `v`.
pub fn success_probability(desc: &EncodingDescriptor, v: &StateVector, opts: &SimOptions) -> Result<f64> {
    check_cap(&desc.circuit, opts)?;
    if v.num_qubits() != desc.system_qubits {
        return Err(Error::Spec(format!(
            "input has {} qubits, the system register has {}",
            v.num_qubits(),
            desc.system_qubits
        )));
    }
    if !v.is_normalized() {
        return Err(Error::Spec(format!("input state has norm {}, expected 1", v.norm())));
    }
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << desc.circuit.num_qubits()];
    amplitudes[..v.amplitudes.len()].copy_from_slice(&v.amplitudes);
    let out = run(&desc.circuit, StateVector { amplitudes })?;
    Ok(out.amplitudes[..v.amplitudes.len()].iter().map(|a| a.norm_sqr()).sum())
}

/// `‖M v‖₂²` evaluated classically.
pub fn oracle_success_probability(oracle: &SparseMatrix, v: &StateVector) -> Result<f64> {
    if oracle.dim() != v.amplitudes.len() {
        return Err(Error::Spec("oracle and state dimensions differ".into()));
    }
    let mut y = vec![Complex64::new(0.0, 0.0); oracle.dim()];
    for &(r, c, val) in oracle.entries() {
        y[r] += v.amplitudes[c] * val;
    }
    Ok(y.iter().map(|a| a.norm_sqr()).sum())
}

/// Normalized samples of `sin(2π Σ_d x_d)` at cell midpoints `x_d = (j_d + ½)/N_d`,
/// flattened with axis 1 fastest.
pub fn test_state(spec: &LaplacianSpec) -> Result<StateVector> {
    let dim = spec.matrix_dim(DEFAULT_MAX_DIM)?;
    let mut samples = vec![0.0; dim];
    for (i, s) in samples.iter_mut().enumerate() {
        let mut rest = i;
        let mut phase = 0.0;
        for axis in spec.axes() {
            let points = axis.points();
            phase += ((rest % points) as f64 + 0.5) / points as f64;
            rest /= points;
        }
        *s = (2.0 * PI * phase).sin();
    }
    normalized(samples)
}

/// The normalized constant vector.
pub fn uniform_state(spec: &LaplacianSpec) -> Result<StateVector> {
    let dim = spec.matrix_dim(DEFAULT_MAX_DIM)?;
    normalized(vec![1.0; dim])
}

/// Samples whose magnitudes all fall below this are treated as the zero vector.
const ZERO_SAMPLES: f64 = 1e-12;

fn normalized(samples: Vec<f64>) -> Result<StateVector> {
    if samples.iter().all(|s| s.abs() < ZERO_SAMPLES) {
        return Err(Error::Degenerate("sampled test function vanishes on the grid".into()));
    }
    let norm = samples.iter().map(|s| s * s).sum::<f64>().sqrt();
    StateVector::from_real(&samples.iter().map(|s| s / norm).collect::<Vec<_>>())
}
