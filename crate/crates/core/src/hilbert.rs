//! Composite Hilbert spaces of cavity modes and two-level atoms.
//!
//! Basis ordering follows the construction order of the subsystems; each
//! atom uses `(|g>, |e>)` and each cavity the Fock ladder `|0>, |1>, ...`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigvals_tol, kron, ComplexMatrix, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubsystemKind {
    Atom,
    Cavity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsystemSpec {
    label: String,
    dim: usize,
    kind: SubsystemKind,
}

impl SubsystemSpec {
    pub fn atom(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            dim: 2,
            kind: SubsystemKind::Atom,
        }
    }

    pub fn cavity(label: impl Into<String>, fock_dim: usize) -> Result<Self> {
        if fock_dim < 2 {
            return Err(Error::InvalidSubsystemDim(fock_dim));
        }
        Ok(Self {
            label: label.into(),
            dim: fock_dim,
            kind: SubsystemKind::Cavity,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> SubsystemKind {
        self.kind
    }
}

/// Ordered list of subsystems with unique labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Composite {
    parts: Vec<SubsystemSpec>,
}

impl Composite {
    pub fn new(parts: Vec<SubsystemSpec>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidParameter("composite has no subsystems".into()));
        }
        for (i, p) in parts.iter().enumerate() {
            if parts[..i].iter().any(|q| q.label == p.label) {
                return Err(Error::DuplicateLabel(p.label.clone()));
            }
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[SubsystemSpec] {
        &self.parts
    }

    pub fn dims(&self) -> Vec<usize> {
        self.parts.iter().map(|p| p.dim).collect()
    }

    /// Total Hilbert dimension.
    pub fn dim(&self) -> usize {
        self.parts.iter().map(|p| p.dim).product()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.parts
            .iter()
            .position(|p| p.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn get(&self, label: &str) -> Result<&SubsystemSpec> {
        self.position(label).map(|i| &self.parts[i])
    }

    /// Flat basis index for per-subsystem indices given in construction order.
    pub fn flat_index(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.parts.len());
        digits.iter().zip(&self.parts).fold(0, |acc, (&d, p)| acc * p.dim + d)
    }

    /// Per-subsystem indices of a flat basis index.
    pub fn digits(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.parts.len()];
        for (slot, p) in out.iter_mut().zip(&self.parts).rev() {
            *slot = flat % p.dim;
            flat /= p.dim;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AtomState {
    Ground,
    Excited,
}

impl AtomState {
    pub fn index(self) -> usize {
        match self {
            AtomState::Ground => 0,
            AtomState::Excited => 1,
        }
    }
}

/// Acceptance thresholds for density matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateTolerances {
    pub trace: f64,
    pub hermitian: f64,
    pub positivity: f64,
}

impl Default for StateTolerances {
    fn default() -> Self {
        Self {
            trace: 1e-9,
            hermitian: 1e-10,
            positivity: 1e-8,
        }
    }
}

/// A trace-one, Hermitian, positive semidefinite state on a composite space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    composite: Composite,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, composite: Composite) -> Result<Self> {
        Self::with_tolerances(matrix, composite, StateTolerances::default())
    }

    pub fn with_tolerances(matrix: ComplexMatrix, composite: Composite, tol: StateTolerances) -> Result<Self> {
        let n = matrix.ensure_square()?;
        if n != composite.dim() {
            return Err(Error::DimensionMismatch {
                expected: composite.dim(),
                actual: n,
            });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > tol.trace || trace.im.abs() > tol.trace {
            return Err(Error::TraceViolation { trace: trace.re });
        }
        let eig = hermitian_eigvals_tol(&matrix, tol.hermitian)?;
        let min_eigenvalue = *eig.last().expect("non-empty spectrum");
        if min_eigenvalue < -tol.positivity {
            return Err(Error::Positivity {
                min_eigenvalue,
                tolerance: tol.positivity,
            });
        }
        Ok(Self { matrix, composite })
    }

    /// Two-qubit state with generic labels `q1`, `q2`.
    pub fn two_qubit(matrix: ComplexMatrix) -> Result<Self> {
        let composite = Composite::new(vec![SubsystemSpec::atom("q1"), SubsystemSpec::atom("q2")])?;
        Self::new(matrix, composite)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn composite(&self) -> &Composite {
        &self.composite
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigvals_tol(&self.matrix, f64::INFINITY).expect("validated on construction")
    }

    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diagonal_real()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    /// `A ⊗ B` with the subsystem lists concatenated.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let mut parts = self.composite.parts().to_vec();
        parts.extend_from_slice(other.composite.parts());
        DensityMatrix::new(kron(&self.matrix, &other.matrix), Composite::new(parts)?)
    }
}

/// Truncated annihilation, creation and number operators: `a|n> = √n |n-1>`.
pub fn fock_ops(dim: usize) -> Result<(ComplexMatrix, ComplexMatrix, ComplexMatrix)> {
    if dim < 2 {
        return Err(Error::InvalidSubsystemDim(dim));
    }
    let a = ComplexMatrix::from_fn(dim, dim, |i, j| {
        if j == i + 1 {
            Complex64::new((j as f64).sqrt(), 0.0)
        } else {
            ZERO
        }
    });
    let a_dag = a.adjoint();
    let n = &a_dag * &a;
    Ok((a, a_dag, n))
}

/// Atomic operators in the `(|g>, |e>)` basis.
#[derive(Debug, Clone)]
pub struct AtomOps {
    /// `σ₊ = |e><g|`
    pub sigma_plus: ComplexMatrix,
    /// `σ₋ = |g><e|`
    pub sigma_minus: ComplexMatrix,
    pub sigma_y: ComplexMatrix,
    /// `|e><e| - |g><g|`
    pub sigma_z: ComplexMatrix,
}

pub fn atom_ops() -> AtomOps {
    let sigma_minus = ComplexMatrix::from_real_rows(2, 2, &[0.0, 1.0, 0.0, 0.0]).expect("2x2");
    let sigma_plus = sigma_minus.adjoint();
    // σy = -i|g><e| + i|e><g| in (|g>, |e>) ordering, i.e. i(σ₊ - σ₋).
    let sigma_y = (&sigma_plus - &sigma_minus).scale(crate::linalg::I);
    let sigma_z = ComplexMatrix::from_real_diagonal(&[-1.0, 1.0]);
    AtomOps {
        sigma_plus,
        sigma_minus,
        sigma_y,
        sigma_z,
    }
}

/// Lifts a single-subsystem operator to the composite, identity elsewhere.
pub fn embed(op: &ComplexMatrix, target: &str, composite: &Composite) -> Result<ComplexMatrix> {
    let pos = composite.position(target)?;
    let dim = composite.parts()[pos].dim();
    if op.rows() != dim || op.cols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: op.rows().max(op.cols()),
        });
    }
    let mut out: Option<ComplexMatrix> = None;
    for (i, part) in composite.parts().iter().enumerate() {
        let factor = if i == pos {
            op.clone()
        } else {
            ComplexMatrix::identity(part.dim())
        };
        out = Some(match out {
            None => factor,
            Some(acc) => kron(&acc, &factor),
        });
    }
    Ok(out.expect("composite is non-empty"))
}

/// Reduced state on `keep`, ordered as listed in `keep`.
pub fn partial_trace(rho: &DensityMatrix, keep: &[&str]) -> Result<DensityMatrix> {
    let matrix = partial_trace_matrix(rho.matrix(), rho.composite(), keep)?;
    let composite = Composite::new(
        keep.iter()
            .map(|l| rho.composite().get(l).cloned())
            .collect::<Result<Vec<_>>>()?,
    )?;
    // Tracing out is completely positive; reuse the parent tolerances.
    Ok(DensityMatrix { matrix, composite })
}

/// Partial trace of an arbitrary operator on `composite`.
pub fn partial_trace_matrix(m: &ComplexMatrix, composite: &Composite, keep: &[&str]) -> Result<ComplexMatrix> {
    if keep.is_empty() {
        return Err(Error::EmptyKeep);
    }
    let kept: Vec<usize> = keep.iter().map(|l| composite.position(l)).collect::<Result<_>>()?;
    for (i, k) in kept.iter().enumerate() {
        if kept[..i].contains(k) {
            return Err(Error::DuplicateLabel(keep[i].to_string()));
        }
    }
    let n = composite.dim();
    if m.rows() != n || m.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: m.rows(),
        });
    }
    let dims = composite.dims();
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !kept.contains(i)).collect();
    let out_dim: usize = kept.iter().map(|&k| dims[k]).product();

    let split: Vec<(usize, usize)> = (0..n)
        .map(|flat| {
            let d = composite.digits(flat);
            let k = kept.iter().fold(0, |acc, &p| acc * dims[p] + d[p]);
            let t = traced.iter().fold(0, |acc, &p| acc * dims[p] + d[p]);
            (k, t)
        })
        .collect();

    let mut out = ComplexMatrix::zeros(out_dim, out_dim);
    for (i, &(ki, ti)) in split.iter().enumerate() {
        for (j, &(kj, tj)) in split.iter().enumerate() {
            if ti == tj {
                out[(ki, kj)] += m[(i, j)];
            }
        }
    }
    Ok(out)
}

/// One product-basis component of a pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    pub amplitude: Complex64,
    pub indices: Vec<(String, usize)>,
}

impl Ket {
    pub fn new(amplitude: Complex64) -> Self {
        Self {
            amplitude,
            indices: Vec::new(),
        }
    }

    pub fn real(amplitude: f64) -> Self {
        Self::new(Complex64::new(amplitude, 0.0))
    }

    pub fn with(mut self, label: impl Into<String>, index: usize) -> Self {
        self.indices.push((label.into(), index));
        self
    }
}

/// State vector for a superposition of product-basis kets. Every ket must
/// name every subsystem exactly once.
pub fn state_vector(composite: &Composite, kets: &[Ket]) -> Result<Vec<Complex64>> {
    let mut psi = vec![ZERO; composite.dim()];
    for ket in kets {
        let mut digits = vec![None; composite.parts().len()];
        for (label, idx) in &ket.indices {
            let pos = composite.position(label)?;
            let dim = composite.parts()[pos].dim();
            if *idx >= dim {
                return Err(Error::InvalidParameter(format!(
                    "basis index {idx} out of range for `{label}` (dim {dim})"
                )));
            }
            if digits[pos].replace(*idx).is_some() {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        let digits: Vec<usize> = digits
            .into_iter()
            .zip(composite.parts())
            .map(|(d, p)| d.ok_or_else(|| Error::InvalidParameter(format!("ket does not specify `{}`", p.label()))))
            .collect::<Result<_>>()?;
        psi[composite.flat_index(&digits)] += ket.amplitude;
    }
    let norm_sqr: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if (norm_sqr - 1.0).abs() > 1e-12 {
        return Err(Error::NotNormalized { norm_sqr });
    }
    Ok(psi)
}

/// Rank-one density matrix `|ψ><ψ|`.
pub fn pure_state(composite: &Composite, kets: &[Ket]) -> Result<DensityMatrix> {
    let psi = state_vector(composite, kets)?;
    DensityMatrix::new(ComplexMatrix::outer(&psi, &psi), composite.clone())
}

/// Projects every cavity onto its `{|0>, |1>}` block so the state can be
/// treated as a multi-qubit state. Returns the renormalized state and the
/// probability weight that lay outside the block.
pub fn qubit_block(rho: &DensityMatrix, leakage_tol: f64) -> Result<(DensityMatrix, f64)> {
    let composite = rho.composite();
    let keep: Vec<usize> = (0..composite.dim())
        .filter(|&flat| composite.digits(flat).iter().all(|&d| d < 2))
        .collect();
    let block = ComplexMatrix::from_fn(keep.len(), keep.len(), |i, j| rho.get(keep[i], keep[j]));
    let weight = block.trace().re;
    let leakage = (1.0 - weight).max(0.0);
    if leakage > leakage_tol {
        return Err(Error::TruncationLeakage {
            leakage,
            tolerance: leakage_tol,
        });
    }
    let parts = composite
        .parts()
        .iter()
        .map(|p| match p.kind() {
            SubsystemKind::Atom => Ok(p.clone()),
            SubsystemKind::Cavity => SubsystemSpec::cavity(p.label(), 2),
        })
        .collect::<Result<Vec<_>>>()?;
    let reduced = DensityMatrix::new(block.scale_real(1.0 / weight), Composite::new(parts)?)?;
    Ok((reduced, leakage))
}

/// `|index><index|` on a single subsystem of dimension `dim`.
pub fn basis_projector(dim: usize, index: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, dim, |i, j| if i == index && j == index { ONE } else { ZERO })
}
