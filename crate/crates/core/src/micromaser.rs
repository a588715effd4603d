//! One-atom micromaser: steady-state photon statistics and the entanglement
//! of two probe atoms sent through the pumped cavity.
//!
//! Pump atoms arrive excited at Poissonian rate `R = 2κN` and each transit
//! acts on the field through the map `F`. Between arrivals the field relaxes
//! under the thermal cavity dissipator, so the stationary field solves
//! `R(F − Id)ρ + L_cav ρ = 0`. Dividing by `κ` gives
//! `2N(F − Id)ρ + L_cav(κ = 1)ρ = 0`, whose `κ → 0` limit is the usual
//! detailed-balance solution.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entanglement::{concurrence, x_state_concurrence};
use crate::error::{Error, Result};
use crate::hilbert::{partial_trace, Composite, DensityMatrix, SubsystemSpec};
use crate::linalg::{null_vector, ComplexMatrix, ZERO};
use crate::lindblad::{
    atomic_dissipator, cavity_dissipator, evolve, jc_hamiltonian, liouvillian, AtomBath, CavityBath, Superoperator,
};

/// Damping rates of the reference photon statistics, largest first.
pub const TABLE1_KAPPAS: [f64; 4] = [0.1, 0.01, 0.005, 0.0000807];

/// Reference steady-state statistics at `N = 1`, `n_th = 0.033`, `gt = 3π/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Row {
    pub kappa_over_g: f64,
    pub p: [f64; 3],
    pub mean_n: f64,
}

pub const TABLE1: [Table1Row; 4] = [
    Table1Row {
        kappa_over_g: 0.1,
        p: [0.771, 0.220, 0.007],
        mean_n: 0.236,
    },
    Table1Row {
        kappa_over_g: 0.01,
        p: [0.664, 0.316, 0.014],
        mean_n: 0.359,
    },
    Table1Row {
        kappa_over_g: 0.005,
        p: [0.655, 0.324, 0.015],
        mean_n: 0.370,
    },
    Table1Row {
        kappa_over_g: 0.0000807,
        p: [0.645, 0.332, 0.016],
        mean_n: 0.382,
    },
];

/// Largest admissible steady-state weight in the top Fock level.
pub const TOP_LEVEL_TOL: f64 = 1e-10;

pub const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Pump parameter `N = R/2κ`.
    pub n_pump: f64,
    pub n_th: f64,
    pub gt: f64,
    pub kappa_over_g: f64,
    #[serde(default)]
    pub gamma_over_g: f64,
    #[serde(default = "default_fock_dim")]
    pub fock_dim: usize,
}

fn default_fock_dim() -> usize {
    20
}

impl Params {
    pub fn new(n_pump: f64, n_th: f64, gt: f64, kappa_over_g: f64) -> Self {
        Self {
            n_pump,
            n_th,
            gt,
            kappa_over_g,
            gamma_over_g: 0.0,
            fock_dim: default_fock_dim(),
        }
    }

    /// `N = 1`, `n_th = 0.033`, `gt = 3π/4`.
    pub fn table1(kappa_over_g: f64) -> Self {
        Self::new(1.0, 0.033, 0.75 * std::f64::consts::PI, kappa_over_g)
    }

    pub fn with_gt(mut self, gt: f64) -> Self {
        self.gt = gt;
        self
    }

    pub fn with_kappa(mut self, kappa_over_g: f64) -> Self {
        self.kappa_over_g = kappa_over_g;
        self
    }

    pub fn with_fock_dim(mut self, fock_dim: usize) -> Self {
        self.fock_dim = fock_dim;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("n_pump", self.n_pump, self.n_pump > 0.0),
            ("n_th", self.n_th, self.n_th >= 0.0),
            ("gt", self.gt, self.gt >= 0.0),
            ("kappa_over_g", self.kappa_over_g, self.kappa_over_g >= 0.0),
            ("gamma_over_g", self.gamma_over_g, self.gamma_over_g >= 0.0),
        ];
        for (name, v, ok) in checks {
            if !(ok && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} out of range: {v}")));
            }
        }
        if self.fock_dim < 2 {
            return Err(Error::InvalidSubsystemDim(self.fock_dim));
        }
        Ok(())
    }
}

/// Photon-number distribution `P_n`, `n = 0..fock_dim−1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonDistribution {
    pub p: Vec<f64>,
    pub mean_n: f64,
}

impl PhotonDistribution {
    /// Validates a distribution; entries down to `−1e-12` are clamped to zero.
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::Empty);
        }
        let mut p = p;
        for (n, x) in p.iter_mut().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFinite { row: n, col: 0 });
            }
            if *x < -1e-12 {
                return Err(Error::Positivity {
                    min_eigenvalue: *x,
                    tolerance: 1e-12,
                });
            }
            *x = x.max(0.0);
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::TraceViolation { trace: total });
        }
        let mean_n = p.iter().enumerate().map(|(n, x)| n as f64 * x).sum();
        Ok(Self { p, mean_n })
    }

    /// Divides by the sum before validating.
    pub fn normalized(p: Vec<f64>) -> Result<Self> {
        let total: f64 = p.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::TraceViolation { trace: total });
        }
        Self::new(p.into_iter().map(|x| x / total).collect())
    }

    /// `|k><k|` in a space of `dim` levels.
    pub fn fock(k: usize, dim: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::InvalidParameter(format!("level {k} outside dimension {dim}")));
        }
        let mut p = vec![0.0; dim];
        p[k] = 1.0;
        Self::new(p)
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    /// `P_n`, zero beyond the truncation.
    pub fn get(&self, n: usize) -> f64 {
        self.p.get(n).copied().unwrap_or(0.0)
    }

    pub fn top(&self) -> f64 {
        *self.p.last().expect("non-empty")
    }

    fn check_top(&self) -> Result<()> {
        if self.top() > TOP_LEVEL_TOL {
            return Err(Error::TruncationLeakage {
                leakage: self.top(),
                tolerance: TOP_LEVEL_TOL,
            });
        }
        Ok(())
    }

    /// Field state `Σ P_n |n><n|`.
    pub fn to_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(&self.p)
    }
}

/// `P_n/P_{n−1} = [n_th + (N/n)sin²(gt√n)]/(1 + n_th)`; neglects damping
/// during the transit.
pub fn detailed_balance_pss(m: &Params) -> Result<PhotonDistribution> {
    m.validate()?;
    let mut p = Vec::with_capacity(m.fock_dim);
    p.push(1.0);
    for n in 1..m.fock_dim {
        let nf = n as f64;
        let ratio = (m.n_th + m.n_pump / nf * (m.gt * nf.sqrt()).sin().powi(2)) / (1.0 + m.n_th);
        p.push(p[n - 1] * ratio);
    }
    let pss = PhotonDistribution::normalized(p)?;
    pss.check_top()?;
    Ok(pss)
}

/// Composite `C ⊗ A` and the generator of one pump-atom transit.
fn transit_generator(m: &Params) -> Result<(Composite, Superoperator)> {
    let composite = Composite::new(vec![SubsystemSpec::cavity("C", m.fock_dim)?, SubsystemSpec::atom("A")])?;
    let h = jc_hamiltonian("C", "A", &composite)?;
    let l = liouvillian(
        &h,
        &[
            cavity_dissipator(CavityBath::new(m.kappa_over_g, m.n_th)?, "C", &composite)?,
            atomic_dissipator(AtomBath::new(m.gamma_over_g)?, "A", &composite)?,
        ],
        &composite,
    )?;
    Ok((composite, l))
}

/// Field-to-field map `ρ_f ↦ Tr_A[exp(L t)(ρ_f ⊗ |e><e|)]` as a dense
/// column-stacked matrix on the `fock_dim²` field elements.
#[derive(Debug, Clone)]
pub struct PumpMap {
    dim: usize,
    matrix: ComplexMatrix,
}

impl PumpMap {
    pub fn fock_dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn apply(&self, rho_f: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho_f.rows() != self.dim || rho_f.cols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: rho_f.rows(),
            });
        }
        ComplexMatrix::unvectorize(&self.matrix.mul_vec(&rho_f.vectorize()), self.dim)
    }

    /// Largest deviation of `Tr F(|i><j|)` from `δ_ij`.
    pub fn trace_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for col in 0..d * d {
            let (i, j) = (col % d, col / d);
            let tr: Complex64 = (0..d).map(|k| self.matrix[(k + k * d, col)]).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((tr - want).norm());
        }
        worst
    }

    /// Fock-diagonal block: `T[m, n]` is the probability of `n → m`.
    pub fn transitions(&self) -> Vec<Vec<f64>> {
        let d = self.dim;
        (0..d)
            .map(|m| (0..d).map(|n| self.matrix[(m + m * d, n + n * d)].re).collect())
            .collect()
    }
}

/// Builds the transit map one coherence order `Δ = i − j` at a time; each
/// order spans a separate invariant sector of the transit generator.
pub fn pump_gain_map(m: &Params) -> Result<PumpMap> {
    m.validate()?;
    let d = m.fock_dim;
    let (composite, l) = transit_generator(m)?;
    let excited = |n: usize| composite.flat_index(&[n, 1]);
    let mut matrix = ComplexMatrix::zeros(d * d, d * d);
    for delta in -(d as isize - 1)..=(d as isize - 1) {
        let pairs: Vec<(usize, usize)> = (0..d)
            .filter_map(|j| {
                let i = j as isize + delta;
                (0..d as isize).contains(&i).then_some((i as usize, j))
            })
            .collect();
        let prop = l.propagator(pairs.iter().map(|&(i, j)| (excited(i), excited(j))), m.gt)?;
        scatter_field_columns(&prop, &composite, &pairs, d, &mut matrix);
    }
    Ok(PumpMap { dim: d, matrix })
}

fn scatter_field_columns(
    prop: &crate::lindblad::SectorPropagator,
    composite: &Composite,
    pairs: &[(usize, usize)],
    d: usize,
    out: &mut ComplexMatrix,
) {
    let sector = prop.sector();
    let position = |elem: (usize, usize)| sector.iter().position(|&s| s == elem);
    let digits: Vec<(Vec<usize>, Vec<usize>)> = sector
        .iter()
        .map(|&(r, c)| (composite.digits(r), composite.digits(c)))
        .collect();
    for &(i, j) in pairs {
        let seed = (composite.flat_index(&[i, 1]), composite.flat_index(&[j, 1]));
        let b = position(seed).expect("seed lies in its closure");
        for (a, (dr, dc)) in digits.iter().enumerate() {
            if dr[1] != dc[1] {
                continue;
            }
            let v = prop.matrix()[(a, b)];
            if v != ZERO {
                out[(dr[0] + dc[0] * d, i + j * d)] += v;
            }
        }
    }
}

/// Fock-diagonal transition matrix of one transit, built from a single
/// propagator on the sector reached from every `|n, e><n, e|`.
pub fn transit_transitions(m: &Params) -> Result<Vec<Vec<f64>>> {
    m.validate()?;
    let d = m.fock_dim;
    let (composite, l) = transit_generator(m)?;
    let pairs: Vec<(usize, usize)> = (0..d).map(|n| (n, n)).collect();
    let seeds = pairs
        .iter()
        .map(|&(i, j)| (composite.flat_index(&[i, 1]), composite.flat_index(&[j, 1])));
    let prop = l.propagator(seeds, m.gt)?;
    let mut block = ComplexMatrix::zeros(d * d, d * d);
    scatter_field_columns(&prop, &composite, &pairs, d, &mut block);
    Ok((0..d)
        .map(|r| (0..d).map(|n| block[(r + r * d, n + n * d)].re).collect())
        .collect())
}

/// Population generator `2N(T − I) + B`, with `B` the thermal birth–death
/// matrix at unit `κ`.
fn population_generator(m: &Params, t: &[Vec<f64>]) -> ComplexMatrix {
    let d = m.fock_dim;
    let down = 2.0 * (m.n_th + 1.0);
    let up = 2.0 * m.n_th;
    ComplexMatrix::from_fn(d, d, |r, n| {
        let mut v = 2.0 * m.n_pump * (t[r][n] - if r == n { 1.0 } else { 0.0 });
        let nf = n as f64;
        if r == n {
            v -= down * nf;
            if n + 1 < d {
                v -= up * (nf + 1.0);
            }
        } else if r + 1 == n {
            v += down * nf;
        } else if r == n + 1 {
            v += up * (nf + 1.0);
        }
        Complex64::new(v, 0.0)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SteadyStateMethod {
    /// Rate equations on the Fock-diagonal populations.
    #[default]
    DiagonalSector,
    /// Null vector of the full `fock_dim² × fock_dim²` generator.
    FullSuperoperator,
}

/// Stationary photon distribution including damping during each transit.
pub fn steady_state_pss(m: &Params) -> Result<PhotonDistribution> {
    steady_state_pss_with(m, SteadyStateMethod::DiagonalSector)
}

pub fn steady_state_pss_with(m: &Params, method: SteadyStateMethod) -> Result<PhotonDistribution> {
    m.validate()?;
    let p = match method {
        SteadyStateMethod::DiagonalSector => {
            let t = transit_transitions(m)?;
            real_probabilities(&null_vector(&population_generator(m, &t))?)?
        }
        SteadyStateMethod::FullSuperoperator => {
            let g = full_generator(m, &pump_gain_map(m)?)?;
            let rho = ComplexMatrix::unvectorize(&null_vector(&g)?, m.fock_dim)?;
            real_probabilities(&(0..m.fock_dim).map(|n| rho[(n, n)]).collect::<Vec<_>>())?
        }
    };
    let pss = PhotonDistribution::normalized(p)?;
    pss.check_top()?;
    Ok(pss)
}

fn real_probabilities(v: &[Complex64]) -> Result<Vec<f64>> {
    let scale: Complex64 = v.iter().sum();
    if scale.norm() == 0.0 {
        return Err(Error::TraceViolation { trace: 0.0 });
    }
    Ok(v.iter().map(|z| (z / scale).re).collect())
}

/// Column-stacked `2N(F − Id) + L_cav(κ = 1, n_th)` on the field.
fn full_generator(m: &Params, f: &PumpMap) -> Result<ComplexMatrix> {
    let d = m.fock_dim;
    let field = Composite::new(vec![SubsystemSpec::cavity("C", d)?])?;
    let cav = cavity_dissipator(CavityBath::new(1.0, m.n_th)?, "C", &field)?.to_matrix();
    let pump = (f.matrix() - &ComplexMatrix::identity(d * d)).scale_real(2.0 * m.n_pump);
    Ok(&pump + &cav)
}

/// Norm of `2N(F − Id)ρ + L_cav(κ = 1)ρ` for `ρ = Σ P_n |n><n|`.
pub fn fixed_point_residual(m: &Params, pss: &PhotonDistribution) -> Result<f64> {
    if pss.dim() != m.fock_dim {
        return Err(Error::DimensionMismatch {
            expected: m.fock_dim,
            actual: pss.dim(),
        });
    }
    let g = full_generator(m, &pump_gain_map(m)?)?;
    let r = g.mul_vec(&pss.to_matrix().vectorize());
    Ok(crate::linalg::vec_norm(&r))
}

/// Coefficients `β₁..β₅` of the two-probe-atom state.
pub fn betas(pss: &PhotonDistribution, gt: f64) -> [f64; 5] {
    let mut b = [0.0; 5];
    for (n, &p) in pss.p.iter().enumerate() {
        let (s1, c1) = ((n as f64 + 1.0).sqrt() * gt).sin_cos();
        let (s2, c2) = ((n as f64 + 2.0).sqrt() * gt).sin_cos();
        b[0] += p * c1.powi(4);
        b[1] += p * c1 * c1 * s1 * s1;
        b[2] += p * c2 * c2 * s1 * s1;
        b[3] += p * s1 * s1 * c1 * c2;
        b[4] += p * s1 * s1 * s2 * s2;
    }
    b
}

fn probe_composite() -> Result<Composite> {
    Composite::new(vec![SubsystemSpec::atom("A1"), SubsystemSpec::atom("A2")])
}

/// Two probe atoms, both entering excited, after successive transits of a
/// field with photon statistics `pss`. Basis `|gg>, |ge>, |eg>, |ee>`.
pub fn two_atom_state(pss: &PhotonDistribution, gt: f64) -> Result<DensityMatrix> {
    let [b1, b2, b3, b4, b5] = betas(pss, gt);
    let mut m = ComplexMatrix::from_real_diagonal(&[b5, b3, b2, b1]);
    m[(1, 2)] = b4.into();
    m[(2, 1)] = b4.into();
    DensityMatrix::new(m, probe_composite()?)
}

/// Wootters concurrence of [`two_atom_state`].
pub fn two_atom_concurrence(pss: &PhotonDistribution, gt: f64) -> Result<f64> {
    Ok(concurrence(&two_atom_state(pss, gt)?)?.value)
}

/// `2·max(0, |β₄| − √(β₁β₅))`.
pub fn two_atom_concurrence_x(pss: &PhotonDistribution, gt: f64) -> Result<f64> {
    Ok(x_state_concurrence(&two_atom_state(pss, gt)?)?.value)
}

/// Master-equation model of the probe pair: both transits under
/// `JC + L_cav(κ, n_th)`, with free cavity decay for `gap_gt` in between.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ProbeOracle {
    pub kappa_over_g: f64,
    pub n_th: f64,
    pub gap_gt: f64,
}

impl ProbeOracle {
    pub fn run(&self, pss: &PhotonDistribution, gt: f64) -> Result<DensityMatrix> {
        let d = pss.dim();
        let composite = Composite::new(vec![
            SubsystemSpec::cavity("C", d)?,
            SubsystemSpec::atom("A1"),
            SubsystemSpec::atom("A2"),
        ])?;
        let mut rho0 = ComplexMatrix::zeros(composite.dim(), composite.dim());
        for (n, &p) in pss.p.iter().enumerate() {
            let k = composite.flat_index(&[n, 1, 1]);
            rho0[(k, k)] = p.into();
        }
        let rho0 = DensityMatrix::new(rho0, composite.clone())?;
        let decay = cavity_dissipator(CavityBath::new(self.kappa_over_g, self.n_th)?, "C", &composite)?;
        let transit = |atom: &str| {
            liouvillian(
                &jc_hamiltonian("C", atom, &composite)?,
                std::slice::from_ref(&decay),
                &composite,
            )
        };
        let rho = evolve(&rho0, &transit("A1")?, gt)?;
        let rho = evolve(&rho, &decay, self.gap_gt)?;
        let rho = evolve(&rho, &transit("A2")?, gt)?;
        partial_trace(&rho, &["A1", "A2"])
    }
}

/// One point of the concurrence-versus-Rabi-angle curves.
#[derive(Debug, Clone, PartialEq)]
pub struct Fig1Point {
    pub kappa_over_g: f64,
    pub gt: f64,
    pub pss: PhotonDistribution,
    pub concurrence: f64,
}

pub fn fig1_point(base: &Params, kappa_over_g: f64, gt: f64) -> Result<Fig1Point> {
    let m = base.with_kappa(kappa_over_g).with_gt(gt);
    let pss = steady_state_pss(&m)?;
    let concurrence = two_atom_concurrence(&pss, gt)?;
    Ok(Fig1Point {
        kappa_over_g,
        gt,
        pss,
        concurrence,
    })
}

/// Evaluates every `(κ, gt)` pair in parallel; rows come back with `κ` as the
/// outer and `gt` as the inner index.
pub fn fig1_sweep(base: &Params, gt_grid: &[f64], kappa_list: &[f64]) -> Result<Vec<Fig1Point>> {
    if gt_grid.is_empty() || kappa_list.is_empty() {
        return Err(Error::Empty);
    }
    let jobs: Vec<(f64, f64)> = kappa_list
        .iter()
        .flat_map(|&k| gt_grid.iter().map(move |&gt| (k, gt)))
        .collect();
    jobs.par_iter().map(|&(k, gt)| fig1_point(base, k, gt)).collect()
}

/// `0.05, 0.10, ...` up to `π`.
pub fn fig1_gt_grid() -> Vec<f64> {
    (1..)
        .map(|k| 0.05 * k as f64)
        .take_while(|&gt| gt <= std::f64::consts::PI)
        .collect()
}
