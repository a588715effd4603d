//! Liouvillian assembly and density-matrix propagation.
//!
//! Units: `g = 1`, so times are Rabi angles `gt` and rates are `κ/g`, `Γ/g`.
//! The dissipator normalization is `κ (2 a ρ a† − a†a ρ − ρ a†a)`, so the
//! mean photon number of a free cavity decays at `2κ`.
//!
//! A [`Superoperator`] is stored as a sum of sandwich terms `c · L ρ R`
//! rather than as a dense `d² × d²` matrix. Propagation restricts the
//! generator to the smallest coordinate subspace of `vec(ρ)` that contains
//! the initial state and is closed under the generator's sparsity pattern,
//! then exponentiates that block exactly.

use std::collections::{BTreeSet, VecDeque};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{atom_ops, embed, fock_ops, Composite, DensityMatrix, StateTolerances};
use crate::linalg::{matexp, ComplexMatrix, I, ZERO};

/// Field–reservoir coupling of one cavity mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityBath {
    pub kappa: f64,
    pub n_th: f64,
}

impl CavityBath {
    pub fn new(kappa: f64, n_th: f64) -> Result<Self> {
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!("kappa must be >= 0, got {kappa}")));
        }
        if !(n_th >= 0.0 && n_th.is_finite()) {
            return Err(Error::InvalidParameter(format!("n_th must be >= 0, got {n_th}")));
        }
        Ok(Self { kappa, n_th })
    }

    pub fn zero_temperature(kappa: f64) -> Result<Self> {
        Self::new(kappa, 0.0)
    }
}

/// Atom–reservoir coupling (spontaneous emission).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomBath {
    pub gamma: f64,
}

impl AtomBath {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {gamma}")));
        }
        Ok(Self { gamma })
    }
}

/// One sandwich term `coeff · left · ρ · right`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperTerm {
    pub coeff: Complex64,
    pub left: ComplexMatrix,
    pub right: ComplexMatrix,
}

/// Linear map on operators of a composite space.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    composite: Composite,
    terms: Vec<SuperTerm>,
}

impl Superoperator {
    pub fn zero(composite: &Composite) -> Self {
        Self {
            composite: composite.clone(),
            terms: Vec::new(),
        }
    }

    /// `ρ ↦ −i[H, ρ]`.
    pub fn hamiltonian(h: &ComplexMatrix, composite: &Composite) -> Result<Self> {
        let d = check_op(h, composite)?;
        let id = ComplexMatrix::identity(d);
        Ok(Self {
            composite: composite.clone(),
            terms: vec![
                SuperTerm {
                    coeff: -I,
                    left: h.clone(),
                    right: id.clone(),
                },
                SuperTerm {
                    coeff: I,
                    left: id,
                    right: h.clone(),
                },
            ],
        })
    }

    /// `ρ ↦ rate (2 c ρ c† − c†c ρ − ρ c†c)`; empty when `rate == 0`.
    pub fn lindblad_term(c: &ComplexMatrix, rate: f64, composite: &Composite) -> Result<Self> {
        let d = check_op(c, composite)?;
        let mut out = Self::zero(composite);
        if rate == 0.0 {
            return Ok(out);
        }
        let c_dag = c.adjoint();
        let cdc = &c_dag * c;
        let id = ComplexMatrix::identity(d);
        let r = Complex64::new(rate, 0.0);
        out.terms = vec![
            SuperTerm {
                coeff: r * 2.0,
                left: c.clone(),
                right: c_dag,
            },
            SuperTerm {
                coeff: -r,
                left: cdc.clone(),
                right: id.clone(),
            },
            SuperTerm {
                coeff: -r,
                left: id,
                right: cdc,
            },
        ];
        Ok(out)
    }

    pub fn composite(&self) -> &Composite {
        &self.composite
    }

    pub fn terms(&self) -> &[SuperTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coeff == ZERO)
    }

    /// Hilbert dimension `d` (the superoperator acts on `d × d` matrices).
    pub fn hilbert_dim(&self) -> usize {
        self.composite.dim()
    }

    pub fn sum(&self, other: &Superoperator) -> Result<Superoperator> {
        if self.composite != other.composite {
            return Err(Error::DimensionMismatch {
                expected: self.hilbert_dim(),
                actual: other.hilbert_dim(),
            });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self {
            composite: self.composite.clone(),
            terms,
        })
    }

    pub fn scaled(&self, s: f64) -> Superoperator {
        Self {
            composite: self.composite.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| SuperTerm {
                    coeff: t.coeff * s,
                    ..t.clone()
                })
                .collect(),
        }
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let d = self.hilbert_dim();
        assert_eq!((rho.rows(), rho.cols()), (d, d), "operator dimension mismatch");
        let mut out = ComplexMatrix::zeros(d, d);
        for t in &self.terms {
            let term = &(&t.left * rho) * &t.right;
            out = &out + &term.scale(t.coeff);
        }
        out
    }

    /// Dense `d² × d²` matrix in the column-stacking convention.
    pub fn to_matrix(&self) -> ComplexMatrix {
        let d = self.hilbert_dim();
        let all: Vec<(usize, usize)> = (0..d).flat_map(|j| (0..d).map(move |i| (i, j))).collect();
        self.sector_matrix(&all)
    }

    /// Block of the column-stacked matrix on the listed `(row, col)` operator
    /// elements: entry `[a, b] = Σ c · L[i_a, k_b] · R[l_b, j_a]`.
    pub fn sector_matrix(&self, sector: &[(usize, usize)]) -> ComplexMatrix {
        let n = sector.len();
        let mut m = ComplexMatrix::zeros(n.max(1), n.max(1));
        for t in &self.terms {
            for (b, &(k, l)) in sector.iter().enumerate() {
                for (a, &(i, j)) in sector.iter().enumerate() {
                    let lv = t.left[(i, k)];
                    if lv == ZERO {
                        continue;
                    }
                    let rv = t.right[(l, j)];
                    if rv != ZERO {
                        m[(a, b)] += t.coeff * lv * rv;
                    }
                }
            }
        }
        m
    }

    /// Smallest set of operator elements containing `seeds` and closed under
    /// the structural sparsity of every term. Sorted column-major.
    pub fn closure(&self, seeds: impl IntoIterator<Item = (usize, usize)>) -> Vec<(usize, usize)> {
        let d = self.hilbert_dim();
        let pattern: Vec<(Adjacency, Adjacency)> = self
            .terms
            .iter()
            .filter(|t| t.coeff != ZERO)
            .map(|t| {
                // left column k -> rows i with L[i,k] != 0; right row l -> cols j with R[l,j] != 0
                let lcols = (0..d)
                    .map(|k| (0..d).filter(|&i| t.left[(i, k)] != ZERO).collect())
                    .collect();
                let rrows = (0..d)
                    .map(|l| (0..d).filter(|&j| t.right[(l, j)] != ZERO).collect())
                    .collect();
                (lcols, rrows)
            })
            .collect();

        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        for s in seeds {
            if seen.insert(s) {
                queue.push_back(s);
            }
        }
        while let Some((k, l)) = queue.pop_front() {
            for (lcols, rrows) in &pattern {
                for &i in &lcols[k] {
                    for &j in &rrows[l] {
                        if seen.insert((i, j)) {
                            queue.push_back((i, j));
                        }
                    }
                }
            }
        }
        let mut out: Vec<(usize, usize)> = seen.into_iter().collect();
        out.sort_by_key(|&(i, j)| (j, i));
        out
    }

    /// Largest entry of `Σ c · R L`; zero exactly when the map is traceless on
    /// every input, i.e. the generated evolution preserves trace.
    pub fn trace_defect(&self) -> f64 {
        let d = self.hilbert_dim();
        let mut acc = ComplexMatrix::zeros(d, d);
        for t in &self.terms {
            acc = &acc + &(&t.right * &t.left).scale(t.coeff);
        }
        acc.max_abs()
    }

    /// Exact propagator `exp(L t)` restricted to the invariant sector
    /// generated by `seeds`.
    pub fn propagator(&self, seeds: impl IntoIterator<Item = (usize, usize)>, t: f64) -> Result<SectorPropagator> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!("duration must be >= 0, got {t}")));
        }
        let sector = self.closure(seeds);
        let matrix = if t == 0.0 {
            ComplexMatrix::identity(sector.len().max(1))
        } else {
            matexp(&self.sector_matrix(&sector).scale_real(t))?
        };
        Ok(SectorPropagator {
            dim: self.hilbert_dim(),
            sector,
            matrix,
        })
    }
}

/// Nonzero positions per row or column.
type Adjacency = Vec<Vec<usize>>;

fn check_op(op: &ComplexMatrix, composite: &Composite) -> Result<usize> {
    let d = op.ensure_square()?;
    if d != composite.dim() {
        return Err(Error::DimensionMismatch {
            expected: composite.dim(),
            actual: d,
        });
    }
    Ok(d)
}

/// `exp(L t)` on an invariant subspace of operator elements.
#[derive(Debug, Clone)]
pub struct SectorPropagator {
    dim: usize,
    sector: Vec<(usize, usize)>,
    matrix: ComplexMatrix,
}

impl SectorPropagator {
    pub fn sector(&self) -> &[(usize, usize)] {
        &self.sector
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Propagates `rho`; fails if `rho` has support outside the sector.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.dim;
        if rho.rows() != d || rho.cols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: rho.rows(),
            });
        }
        let mut inside = vec![false; d * d];
        let v: Vec<Complex64> = self
            .sector
            .iter()
            .map(|&(i, j)| {
                inside[i + j * d] = true;
                rho[(i, j)]
            })
            .collect();
        for j in 0..d {
            for i in 0..d {
                if !inside[i + j * d] && rho[(i, j)] != ZERO {
                    return Err(Error::InvalidParameter(format!(
                        "input has support at ({i}, {j}) outside the propagated sector"
                    )));
                }
            }
        }
        let w = if self.sector.is_empty() {
            Vec::new()
        } else {
            self.matrix.mul_vec(&v)
        };
        let mut out = ComplexMatrix::zeros(d, d);
        for (&(i, j), z) in self.sector.iter().zip(w) {
            out[(i, j)] = z;
        }
        Ok(out)
    }
}

/// Resonant Jaynes–Cummings coupling `a σ₊ + a† σ₋` (g = 1).
pub fn jc_hamiltonian(cavity: &str, atom: &str, composite: &Composite) -> Result<ComplexMatrix> {
    let cav = composite.get(cavity)?;
    let at = composite.get(atom)?;
    if cav.kind() != crate::hilbert::SubsystemKind::Cavity {
        return Err(Error::InvalidParameter(format!("`{cavity}` is not a cavity")));
    }
    if at.kind() != crate::hilbert::SubsystemKind::Atom {
        return Err(Error::InvalidParameter(format!("`{atom}` is not an atom")));
    }
    let (a, _, _) = fock_ops(cav.dim())?;
    let ops = atom_ops();
    let a_full = embed(&a, cavity, composite)?;
    let sp = embed(&ops.sigma_plus, atom, composite)?;
    let coupling = &a_full * &sp;
    Ok(&coupling + &coupling.adjoint())
}

/// Cavity damping with downward rate `κ(n_th+1)` and upward rate `κ n_th`.
pub fn cavity_dissipator(bath: CavityBath, cavity: &str, composite: &Composite) -> Result<Superoperator> {
    let cav = composite.get(cavity)?;
    let (a, a_dag, _) = fock_ops(cav.dim())?;
    let a = embed(&a, cavity, composite)?;
    let a_dag = embed(&a_dag, cavity, composite)?;
    let down = Superoperator::lindblad_term(&a, bath.kappa * (bath.n_th + 1.0), composite)?;
    let up = Superoperator::lindblad_term(&a_dag, bath.kappa * bath.n_th, composite)?;
    down.sum(&up)
}

/// Spontaneous emission through `σ₋` at rate `Γ`.
pub fn atomic_dissipator(bath: AtomBath, atom: &str, composite: &Composite) -> Result<Superoperator> {
    let sm = embed(&atom_ops().sigma_minus, atom, composite)?;
    Superoperator::lindblad_term(&sm, bath.gamma, composite)
}

/// `L(ρ) = −i[H, ρ] + Σ D_k(ρ)`.
pub fn liouvillian(h: &ComplexMatrix, dissipators: &[Superoperator], composite: &Composite) -> Result<Superoperator> {
    let mut l = Superoperator::hamiltonian(h, composite)?;
    for d in dissipators {
        l = l.sum(d)?;
    }
    Ok(l)
}

/// Support of a matrix as `(row, col)` pairs.
pub fn support(m: &ComplexMatrix) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            if m[(i, j)] != ZERO {
                out.push((i, j));
            }
        }
    }
    out
}

/// `ρ(t) = exp(L t) ρ₀`, with `t` in units of `1/g`.
pub fn evolve(rho0: &DensityMatrix, l: &Superoperator, t: f64) -> Result<DensityMatrix> {
    evolve_with(rho0, l, t, StateTolerances::default())
}

pub fn evolve_with(rho0: &DensityMatrix, l: &Superoperator, t: f64, tol: StateTolerances) -> Result<DensityMatrix> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("duration must be >= 0, got {t}")));
    }
    if l.composite() != rho0.composite() {
        return Err(Error::DimensionMismatch {
            expected: rho0.dim(),
            actual: l.hilbert_dim(),
        });
    }
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let prop = l.propagator(support(rho0.matrix()), t)?;
    let out = prop.apply(rho0.matrix())?;
    DensityMatrix::with_tolerances(out, rho0.composite().clone(), tol)
}

/// Identity-weighted check used by tests: `Tr L(ρ)`.
pub fn trace_of_action(l: &Superoperator, rho: &ComplexMatrix) -> Complex64 {
    l.apply(rho).trace()
}
