//! Classical finite-difference Laplacians.
//!
//! These matrices are the ground truth every synthesized circuit is checked
//! against. A D-dimensional operator is the Kronecker sum of per-axis 1D
//! stencils; axis 1 is the fastest-varying (least significant) index block.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::g17;

/// Default cap on the dimension of assembled operators and dense conversions.
pub const DEFAULT_MAX_DIM: usize = 1 << 20;

/// Entries with magnitude below this are dropped during normalization.
pub const ZERO_TOLERANCE: f64 = 1e-15;

/// Largest dimension for which [`spectral_norm_bound`] computes the exact norm.
pub const EXACT_NORM_MAX_DIM: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Periodic,
    Dirichlet,
    Neumann,
}

impl BoundaryCondition {
    pub const ALL: [BoundaryCondition; 3] = [Self::Periodic, Self::Dirichlet, Self::Neumann];

    pub fn name(self) -> &'static str {
        match self {
            Self::Periodic => "periodic",
            Self::Dirichlet => "dirichlet",
            Self::Neumann => "neumann",
        }
    }

    /// Number of boundary comparators the encoding circuit needs for this condition.
    pub fn comparator_count(self) -> usize {
        match self {
            Self::Periodic => 0,
            Self::Dirichlet => 2,
            Self::Neumann => 4,
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "p" | "periodic" => Ok(Self::Periodic),
            "d" | "dirichlet" => Ok(Self::Dirichlet),
            "n" | "neumann" => Ok(Self::Neumann),
            other => Err(Error::Spec(format!(
                "unknown boundary condition `{other}` (expected periodic|dirichlet|neumann or p|d|n)"
            ))),
        }
    }
}

/// One coordinate axis: `2^n_qubits` points spaced `spacing` apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxisSpec {
    pub n_qubits: usize,
    pub spacing: f64,
    pub bc: BoundaryCondition,
}

impl GridAxisSpec {
    pub fn new(n_qubits: usize, spacing: f64, bc: BoundaryCondition) -> Result<Self> {
        let axis = Self { n_qubits, spacing, bc };
        axis.validate()?;
        Ok(axis)
    }

    pub fn validate(&self) -> Result<()> {
        validate_qubits(self.n_qubits)?;
        validate_spacing(self.spacing)
    }

    /// Number of grid points `N_d`.
    pub fn points(&self) -> usize {
        1 << self.n_qubits
    }
}

/// The full problem definition: an ordered list of axes, axis 1 first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplacianSpec {
    axes: Vec<GridAxisSpec>,
}

impl LaplacianSpec {
    pub fn new(axes: Vec<GridAxisSpec>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::Spec("a Laplacian needs at least one axis".into()));
        }
        for axis in &axes {
            axis.validate()?;
        }
        Ok(Self { axes })
    }

    /// Convenience constructor for a single axis.
    pub fn one_dim(bc: BoundaryCondition, n_qubits: usize, spacing: f64) -> Result<Self> {
        Self::new(vec![GridAxisSpec::new(n_qubits, spacing, bc)?])
    }

    pub fn axes(&self) -> &[GridAxisSpec] {
        &self.axes
    }

    /// Spatial dimension `D`.
    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    /// Total system qubits `n_tot = Σ n_d`.
    pub fn total_qubits(&self) -> usize {
        self.axes.iter().map(|a| a.n_qubits).sum()
    }

    /// Width of the selector register, `⌈log₂ D⌉`.
    pub fn selector_qubits(&self) -> usize {
        ceil_log2(self.dims())
    }

    /// Matrix dimension `N = Π N_d`, or a resource error if it exceeds `max_dim`.
    pub fn matrix_dim(&self, max_dim: usize) -> Result<usize> {
        let n = self.total_qubits();
        if n >= usize::BITS as usize || (1usize << n) > max_dim {
            return Err(Error::Resource(format!(
                "operator dimension 2^{n} exceeds the cap of {max_dim}"
            )));
        }
        Ok(1 << n)
    }

    /// Short label such as `periodic-dirichlet`.
    pub fn label(&self) -> String {
        self.axes.iter().map(|a| a.bc.name()).collect::<Vec<_>>().join("-")
    }
}

pub fn ceil_log2(x: usize) -> usize {
    if x <= 1 {
        0
    } else {
        (usize::BITS - (x - 1).leading_zeros()) as usize
    }
}

fn validate_qubits(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 {
        return Err(Error::Spec("an axis needs at least one qubit".into()));
    }
    if n_qubits >= 48 {
        return Err(Error::Spec(format!("{n_qubits} qubits per axis is not representable")));
    }
    Ok(())
}

fn validate_spacing(spacing: f64) -> Result<()> {
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(Error::Spec(format!("grid spacing must be positive and finite, got {spacing}")));
    }
    Ok(())
}

/// Square sparse matrix in sorted coordinate form.
///
/// Entries are sorted by `(row, col)`, duplicates are summed and values with
/// magnitude below [`ZERO_TOLERANCE`] are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: Vec::new() }
    }

    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        if let Some(&(r, c, _)) = triplets.iter().find(|&&(r, c, _)| r >= dim || c >= dim) {
            return Err(Error::Spec(format!("entry ({r}, {c}) outside a {dim}x{dim} matrix")));
        }
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            match entries.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => entries.push((r, c, v)),
            }
        }
        entries.retain(|e| e.2.abs() >= ZERO_TOLERANCE);
        Ok(Self { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries
            .binary_search_by_key(&(row, col), |&(r, c, _)| (r, c))
            .map_or(0.0, |i| self.entries[i].2)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let triplets = self.entries.iter().map(|&(r, c, v)| (r, c, v * factor)).collect();
        Self::from_triplets(self.dim, triplets).expect("indices already in range")
    }

    pub fn transpose(&self) -> Self {
        let triplets = self.entries.iter().map(|&(r, c, v)| (c, r, v)).collect();
        Self::from_triplets(self.dim, triplets).expect("indices already in range")
    }

    pub fn is_symmetric(&self) -> bool {
        *self == self.transpose()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.dim];
        for &(r, _, v) in &self.entries {
            sums[r] += v;
        }
        sums
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim, "vector length must match matrix dimension");
        let mut y = vec![0.0; self.dim];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }

    /// Row-major dense copy; fails if `dim²` exceeds `max_entries`.
    pub fn to_dense(&self, max_entries: usize) -> Result<Vec<f64>> {
        let total = self.dim.checked_mul(self.dim).filter(|&t| t <= max_entries).ok_or_else(|| {
            Error::Resource(format!(
                "dense {0}x{0} matrix exceeds the cap of {max_entries} entries",
                self.dim
            ))
        })?;
        let mut dense = vec![0.0; total];
        for &(r, c, v) in &self.entries {
            dense[r * self.dim + c] = v;
        }
        Ok(dense)
    }

    /// Dense CSV, one matrix row per line, values printed with `%.17g`.
    pub fn write_dense_csv<W: Write>(&self, out: &mut W, max_entries: usize) -> io::Result<()> {
        let dense = self
            .to_dense(max_entries)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e.to_string()))?;
        if self.dim == 0 {
            return Ok(());
        }
        for row in dense.chunks(self.dim) {
            let line: Vec<String> = row.iter().map(|&v| g17(v)).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// Coordinate triplets, one `row col value` line per stored entry.
    pub fn write_triplets<W: Write>(&self, out: &mut W) -> io::Result<()> {
        for &(r, c, v) in &self.entries {
            writeln!(out, "{r} {c} {}", g17(v))?;
        }
        Ok(())
    }
}

/// Unscaled 1D Laplacian `L` of the given boundary condition.
///
/// For a periodic axis with two points both wrap couplings land on the same
/// off-diagonal entry and are summed, giving `2/h²`.
pub fn build_1d(bc: BoundaryCondition, n_qubits: usize, spacing: f64) -> Result<SparseMatrix> {
    validate_spacing(spacing)?;
    Ok(stencil_1d(bc, n_qubits)?.scaled(1.0 / (spacing * spacing)))
}

/// Scaled 1D Laplacian `(h²/4)·L`, which does not depend on `h`.
pub fn build_scaled_1d(bc: BoundaryCondition, n_qubits: usize) -> Result<SparseMatrix> {
    Ok(stencil_1d(bc, n_qubits)?.scaled(0.25))
}

/// The integer stencil `h²·L`.
fn stencil_1d(bc: BoundaryCondition, n_qubits: usize) -> Result<SparseMatrix> {
    validate_qubits(n_qubits)?;
    if n_qubits > 40 {
        return Err(Error::Resource(format!("1D operator with 2^{n_qubits} points")));
    }
    let n = 1usize << n_qubits;
    let mut triplets = Vec::with_capacity(3 * n);
    for j in 0..n {
        triplets.push((j, j, -2.0));
        if j > 0 {
            triplets.push((j, j - 1, 1.0));
        }
        if j + 1 < n {
            triplets.push((j, j + 1, 1.0));
        }
    }
    match bc {
        BoundaryCondition::Dirichlet => {}
        BoundaryCondition::Periodic => {
            triplets.push((0, n - 1, 1.0));
            triplets.push((n - 1, 0, 1.0));
        }
        BoundaryCondition::Neumann => {
            triplets.push((0, 0, 1.0));
            triplets.push((n - 1, n - 1, 1.0));
        }
    }
    SparseMatrix::from_triplets(n, triplets)
}

/// Per-axis weights `ω_d = (1/h_d²) / Σ_i (1/h_i²)`, axis 1 first.
pub fn weights(spec: &LaplacianSpec) -> Vec<f64> {
    let inv: Vec<f64> = spec.axes().iter().map(|a| 1.0 / (a.spacing * a.spacing)).collect();
    let total: f64 = inv.iter().sum();
    inv.iter().map(|w| w / total).collect()
}

/// Scaled D-dimensional Laplacian `Σ_d I ⊗ … ⊗ ω_d·L̃_d ⊗ … ⊗ I`.
pub fn build_scaled_nd(spec: &LaplacianSpec) -> Result<SparseMatrix> {
    build_scaled_nd_capped(spec, DEFAULT_MAX_DIM)
}

pub fn build_scaled_nd_capped(spec: &LaplacianSpec, max_dim: usize) -> Result<SparseMatrix> {
    let dim = spec.matrix_dim(max_dim)?;
    let omega = weights(spec);
    let mut triplets = Vec::new();
    let mut stride = 1;
    for (axis, w) in spec.axes().iter().zip(omega) {
        let local = build_scaled_1d(axis.bc, axis.n_qubits)?;
        let points = axis.points();
        let block = stride * points;
        for outer in (0..dim).step_by(block) {
            for inner in 0..stride {
                for &(r, c, v) in local.entries() {
                    triplets.push((outer + r * stride + inner, outer + c * stride + inner, w * v));
                }
            }
        }
        stride = block;
    }
    SparseMatrix::from_triplets(dim, triplets)
}

/// Upper bound on the spectral norm of a symmetric matrix.
///
/// Uses the Gershgorin row bound in general and the exact largest
/// eigenvalue magnitude when `dim ≤ 64`.
pub fn spectral_norm_bound(m: &SparseMatrix) -> f64 {
    if m.nnz() == 0 {
        return 0.0;
    }
    let mut row_abs = vec![0.0f64; m.dim()];
    for &(r, _, v) in m.entries() {
        row_abs[r] += v.abs();
    }
    let gershgorin = row_abs.into_iter().fold(0.0, f64::max);
    if m.dim() > EXACT_NORM_MAX_DIM {
        return gershgorin;
    }
    let dense = m.to_dense(EXACT_NORM_MAX_DIM * EXACT_NORM_MAX_DIM).expect("small matrix");
    let eigen = SymmetricEigen::new(DMatrix::from_row_slice(m.dim(), m.dim(), &dense));
    eigen.eigenvalues.iter().fold(0.0f64, |acc, &l| acc.max(l.abs()))
}
