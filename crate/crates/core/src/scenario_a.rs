//! An atom in `|g>` crossing one cavity of a maximally entangled, leaky
//! cavity pair.
//!
//! Units: `g = 1`, so the interaction time equals the Rabi angle `gt` and
//! rates are given as `κ/g`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::entanglement::concurrence;
use crate::error::{Error, Result};
use crate::hilbert::{partial_trace, pure_state, qubit_block, Composite, DensityMatrix, Ket, SubsystemSpec};
use crate::linalg::ComplexMatrix;
use crate::lindblad::{cavity_dissipator, evolve, jc_hamiltonian, liouvillian, CavityBath};

/// Largest `κt` fed to an exponential; beyond this the decay is complete.
pub const MAX_KAPPA_T: f64 = 700.0;

/// Weight allowed outside the `{|0>, |1>}` block of each cavity.
pub const LEAKAGE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub gt: f64,
    pub kappa1_over_g: f64,
    pub kappa2_over_g: f64,
    #[serde(default = "default_fock_dim")]
    pub fock_dim: usize,
}

fn default_fock_dim() -> usize {
    2
}

impl Params {
    pub fn new(gt: f64, kappa1_over_g: f64, kappa2_over_g: f64) -> Self {
        Self {
            gt,
            kappa1_over_g,
            kappa2_over_g,
            fock_dim: default_fock_dim(),
        }
    }

    pub fn equal(gt: f64, kappa_over_g: f64) -> Self {
        Self::new(gt, kappa_over_g, kappa_over_g)
    }

    pub fn with_fock_dim(mut self, fock_dim: usize) -> Self {
        self.fock_dim = fock_dim;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gt > 0.0 && self.gt.is_finite()) {
            return Err(Error::InvalidParameter(format!("gt must be > 0, got {}", self.gt)));
        }
        for (name, k) in [
            ("kappa1_over_g", self.kappa1_over_g),
            ("kappa2_over_g", self.kappa2_over_g),
        ] {
            if !(k >= 0.0 && k.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be >= 0, got {k}")));
            }
        }
        if self.fock_dim < 2 {
            return Err(Error::InvalidSubsystemDim(self.fock_dim));
        }
        Ok(())
    }

    fn decay_factors(&self) -> (f64, f64) {
        let e1 = (-(self.kappa1_over_g * self.gt).min(MAX_KAPPA_T)).exp();
        let e2 = (-(2.0 * self.kappa2_over_g * self.gt).min(MAX_KAPPA_T)).exp();
        (e1, e2)
    }
}

/// Magnitude of the `|0e>–|1g>` coherence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoherenceConvention {
    /// `sin(gt)cos(gt)·e^{-κ₁t}(1 − e^{-2κ₂t}/2)`, consistent with the exact
    /// unitary reduction at zero damping.
    #[default]
    Consistent,
    /// `sin(2gt)·e^{-κ₁t}(1 − e^{-2κ₂t}/2)`, twice the above; not positive.
    AsPrinted,
}

/// Closed-form reduced state together with the population that the raw
/// coefficients leave unaccounted for.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticState {
    pub rho: DensityMatrix,
    pub trace_deficit: f64,
}

/// `α₁..α₄` (the last as a magnitude) before the deficit is restored.
pub fn alphas(p: &Params, convention: CoherenceConvention) -> [f64; 4] {
    let (e1, e2) = p.decay_factors();
    let (s, c) = p.gt.sin_cos();
    let tail = e1 * (1.0 - e2 / 2.0);
    let coherence = match convention {
        CoherenceConvention::Consistent => s * c * tail,
        CoherenceConvention::AsPrinted => (2.0 * p.gt).sin() * tail,
    };
    [(1.0 - e1 / 2.0) * e2, c * c * tail, s * s * tail, coherence]
}

fn composite_c1_a1() -> Result<Composite> {
    Composite::new(vec![SubsystemSpec::cavity("C1", 2)?, SubsystemSpec::atom("A1")])
}

/// Reduced cavity–atom state in the basis `|0g>, |0e>, |1g>, |1e>`.
///
/// The diagonal coefficients sum to `1 − (1 − e^{-κ₁t})(1 − e^{-2κ₂t})`; the
/// missing weight is the probability that both photons have leaked, so it
/// is returned to `|0g>`.
pub fn analytic_state_a(p: &Params) -> Result<AnalyticState> {
    analytic_state_a_with(p, CoherenceConvention::Consistent)
}

pub fn analytic_state_a_with(p: &Params, convention: CoherenceConvention) -> Result<AnalyticState> {
    p.validate()?;
    let [a1, a2, a3, a4] = alphas(p, convention);
    let trace_deficit = 1.0 - (a1 + a2 + a3);
    let mut m = ComplexMatrix::from_real_diagonal(&[a1 + trace_deficit, a3, a2, 0.0]);
    m[(1, 2)] = Complex64::new(0.0, -a4);
    m[(2, 1)] = Complex64::new(0.0, a4);
    Ok(AnalyticState {
        rho: DensityMatrix::new(m, composite_c1_a1()?)?,
        trace_deficit,
    })
}

/// Ideal-cavity concurrence `cos(gt)sin(gt)`.
pub fn c_ideal_a(gt: f64) -> f64 {
    gt.cos() * gt.sin()
}

/// `2cos(gt)sin(gt)e^{-κ₁t}(1 − e^{-2κ₂t}/2)`.
pub fn concurrence_a(p: &Params) -> f64 {
    let (e1, e2) = p.decay_factors();
    2.0 * c_ideal_a(p.gt) * e1 * (1.0 - e2 / 2.0)
}

/// Equal damping `κ₁ = κ₂`: `2C_ideal(e^{-κt} − e^{-3κt}/2)`.
pub fn concurrence_a_equal(gt: f64, kappa_t: f64) -> f64 {
    let x = kappa_t.min(MAX_KAPPA_T / 3.0);
    2.0 * c_ideal_a(gt) * ((-x).exp() - (-3.0 * x).exp() / 2.0)
}

/// Small-damping expansion `C_ideal(1 + κt)`.
pub fn concurrence_a_linear(gt: f64, kappa_t: f64) -> f64 {
    c_ideal_a(gt) * (1.0 + kappa_t)
}

/// `κ/g = ln(3/2)/(2gt)`.
pub fn optimal_kappa_a(gt: f64) -> Result<f64> {
    if !(gt > 0.0 && gt.is_finite()) {
        return Err(Error::InvalidParameter(format!("gt must be > 0, got {gt}")));
    }
    Ok(1.5f64.ln() / (2.0 * gt))
}

/// Upper end of the enhancement window: `e^{-x} − e^{-3x}/2 = 1/2` has the
/// nontrivial root `x = ln((1 + √5)/2)`.
pub fn enhancement_limit_kappa_t() -> f64 {
    ((1.0 + 5f64.sqrt()) / 2.0).ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationA {
    pub rho_c1_a1: DensityMatrix,
    pub rho_c1_c2: DensityMatrix,
    pub c_c1_a1: f64,
    pub c_c1_c2: f64,
    /// Largest weight found outside the single-photon block.
    pub leakage: f64,
}

/// Full master-equation evolution of `C₁⊗C₂⊗A`, starting from
/// `(|00> + |11>)/√2 ⊗ |g>`.
pub fn simulate_a(p: &Params) -> Result<SimulationA> {
    p.validate()?;
    let composite = Composite::new(vec![
        SubsystemSpec::cavity("C1", p.fock_dim)?,
        SubsystemSpec::cavity("C2", p.fock_dim)?,
        SubsystemSpec::atom("A1"),
    ])?;
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    let rho0 = pure_state(
        &composite,
        &[
            Ket::real(amp).with("C1", 0).with("C2", 0).with("A1", 0),
            Ket::real(amp).with("C1", 1).with("C2", 1).with("A1", 0),
        ],
    )?;
    let h = jc_hamiltonian("C1", "A1", &composite)?;
    let l = liouvillian(
        &h,
        &[
            cavity_dissipator(CavityBath::zero_temperature(p.kappa1_over_g)?, "C1", &composite)?,
            cavity_dissipator(CavityBath::zero_temperature(p.kappa2_over_g)?, "C2", &composite)?,
        ],
        &composite,
    )?;
    let rho = evolve(&rho0, &l, p.gt)?;

    let (rho_c1_a1, leak_a) = qubit_block(&partial_trace(&rho, &["C1", "A1"])?, LEAKAGE_TOL)?;
    let (rho_c1_c2, leak_c) = qubit_block(&partial_trace(&rho, &["C1", "C2"])?, LEAKAGE_TOL)?;
    let c_c1_a1 = concurrence(&rho_c1_a1)?.value;
    let c_c1_c2 = concurrence(&rho_c1_c2)?.value;
    Ok(SimulationA {
        rho_c1_a1,
        rho_c1_c2,
        c_c1_a1,
        c_c1_c2,
        leakage: leak_a.max(leak_c),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entanglement::x_state_concurrence;
    use crate::optimize::argmax;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};

    #[test]
    fn ideal_state_at_quarter_period() {
        let st = analytic_state_a(&Params::equal(FRAC_PI_4, 0.0)).unwrap();
        let pops = st.rho.populations();
        for (got, want) in pops.iter().zip([0.5, 0.25, 0.25, 0.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(st.rho.get(1, 2).norm(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(st.trace_deficit, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn strong_damping_leaves_vacuum() {
        let st = analytic_state_a(&Params::equal(1.0, 1e6)).unwrap();
        assert_abs_diff_eq!(st.rho.get(0, 0).re, 1.0, epsilon = 1e-12);
        assert!(st.trace_deficit > 1.0 - 1e-12);
        assert!(concurrence_a(&Params::equal(1.0, 1e6)) < 1e-300);
    }

    #[test]
    fn deficit_is_product_of_decay_probabilities() {
        let p = Params::new(0.7, 0.3, 0.2);
        let st = analytic_state_a(&p).unwrap();
        let want = (1.0 - (-0.3f64 * 0.7).exp()) * (1.0 - (-2.0f64 * 0.2 * 0.7).exp());
        assert_abs_diff_eq!(st.trace_deficit, want, epsilon = 1e-15);
        assert_abs_diff_eq!(st.rho.trace(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn wootters_reproduces_closed_form() {
        for &(gt, k1, k2) in &[
            (0.3, 0.0, 0.0),
            (FRAC_PI_4, 0.1, 0.4),
            (1.1, 0.02, 0.9),
            (2.0, 0.5, 0.05),
        ] {
            let p = Params::new(gt, k1, k2);
            let st = analytic_state_a(&p).unwrap();
            let c = concurrence(&st.rho).unwrap().value;
            assert_abs_diff_eq!(c, concurrence_a(&p).abs(), epsilon = 1e-12);
            assert_abs_diff_eq!(x_state_concurrence(&st.rho).unwrap().value, c, epsilon = 1e-12);
        }
    }

    #[test]
    fn printed_coherence_is_not_a_state() {
        let p = Params::equal(FRAC_PI_4, 0.0);
        assert!(matches!(
            analytic_state_a_with(&p, CoherenceConvention::AsPrinted),
            Err(Error::Positivity { .. })
        ));
    }

    #[test]
    fn equal_rate_form_matches_general_form() {
        for &(gt, k) in &[(0.2, 0.0), (FRAC_PI_4, 0.258), (1.3, 0.9), (0.05, 4.0)] {
            let a = concurrence_a(&Params::equal(gt, k));
            assert!((a - concurrence_a_equal(gt, k * gt)).abs() < 1e-14);
        }
        assert_abs_diff_eq!(concurrence_a_equal(0.9, 0.0), c_ideal_a(0.9), epsilon = 1e-15);
        assert_abs_diff_eq!(concurrence_a(&Params::equal(0.9, 0.0)), c_ideal_a(0.9), epsilon = 1e-15);
    }

    #[test]
    fn linear_growth_at_small_damping() {
        let gt = 0.6;
        let h = 1e-6;
        let slope = (concurrence_a_equal(gt, h) - concurrence_a_equal(gt, 0.0)) / h;
        assert_abs_diff_eq!(slope, c_ideal_a(gt), epsilon = 1e-5);
        assert_abs_diff_eq!(concurrence_a_equal(gt, h), concurrence_a_linear(gt, h), epsilon = 1e-11);
    }

    #[test]
    fn optimum_values() {
        assert_abs_diff_eq!(optimal_kappa_a(FRAC_PI_4).unwrap(), 0.2581271, epsilon = 1e-7);
        assert_abs_diff_eq!(optimal_kappa_a(FRAC_PI_2).unwrap(), 0.1290636, epsilon = 1e-7);
        assert!(optimal_kappa_a(0.0).is_err());
        assert!(optimal_kappa_a(-1.0).is_err());
        let k = optimal_kappa_a(FRAC_PI_4).unwrap();
        let ratio = concurrence_a_equal(FRAC_PI_4, k * FRAC_PI_4) / c_ideal_a(FRAC_PI_4);
        assert_abs_diff_eq!(ratio, 1.08866, epsilon = 1e-5);
    }

    #[test]
    fn optimum_is_numeric_argmax() {
        for gt in [FRAC_PI_8, FRAC_PI_4, 3.0 * FRAC_PI_8] {
            let (x, _) = argmax(|kt| concurrence_a_equal(gt, kt), 0.0, 2.0, 2001);
            assert!((x - optimal_kappa_a(gt).unwrap() * gt).abs() < 1e-6);
        }
    }

    #[test]
    fn enhancement_window() {
        let upper = enhancement_limit_kappa_t();
        let y = (-upper).exp();
        assert_abs_diff_eq!(y - y * y * y / 2.0, 0.5, epsilon = 1e-15);
        let gt = 0.8;
        for k in 1..100 {
            let kt = upper * k as f64 / 100.0;
            assert!(concurrence_a_equal(gt, kt) > c_ideal_a(gt));
        }
        assert!(concurrence_a_equal(gt, upper * 1.01) < c_ideal_a(gt));
        let peak = 1.5f64.ln() / 2.0;
        let mut prev = concurrence_a_equal(gt, peak);
        for k in 1..200 {
            let next = concurrence_a_equal(gt, peak + 0.01 * k as f64);
            assert!(next < prev);
            prev = next;
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(analytic_state_a(&Params::equal(0.0, 0.1)).is_err());
        assert!(analytic_state_a(&Params::new(1.0, -0.1, 0.0)).is_err());
        assert!(simulate_a(&Params::equal(1.0, 0.0).with_fock_dim(1)).is_err());
        assert!(analytic_state_a(&Params::new(1.0, f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn unitary_oracle_matches_closed_form() {
        for gt in [0.4, FRAC_PI_4, 1.2, 2.5] {
            let p = Params::equal(gt, 0.0);
            let sim = simulate_a(&p).unwrap();
            let st = analytic_state_a(&p).unwrap();
            assert!(sim.rho_c1_a1.matrix().max_abs_diff(st.rho.matrix()) < 1e-9);
            assert!((sim.c_c1_a1 - c_ideal_a(gt).abs()).abs() < 1e-9);
        }
    }

    #[test]
    fn oracle_tracks_formula_at_weak_damping() {
        let p = Params::equal(FRAC_PI_4, 0.01);
        let sim = simulate_a(&p).unwrap();
        let rel = (sim.c_c1_a1 - concurrence_a(&p)).abs() / concurrence_a(&p);
        assert!(rel < 0.05, "relative gap {rel}");
        assert_abs_diff_eq!(sim.c_c1_a1, 0.49361, epsilon = 1e-5);
    }

    #[test]
    fn larger_truncation_changes_nothing() {
        let p = Params::new(1.0, 0.05, 0.2);
        let small = simulate_a(&p).unwrap();
        let big = simulate_a(&p.with_fock_dim(4)).unwrap();
        assert_eq!(big.leakage, 0.0);
        assert!(small.rho_c1_a1.matrix().max_abs_diff(big.rho_c1_a1.matrix()) < 1e-12);
        assert!((small.c_c1_c2 - big.c_c1_c2).abs() < 1e-12);
    }

    #[test]
    fn cavity_pair_entanglement_falls_with_damping() {
        let cs: Vec<f64> = [0.0, 0.05, 0.1, 0.2]
            .iter()
            .map(|&k| simulate_a(&Params::equal(FRAC_PI_4, k)).unwrap().c_c1_c2)
            .collect();
        assert!(cs.windows(2).all(|w| w[1] <= w[0]), "{cs:?}");
        assert_abs_diff_eq!(cs[0], 1.0 / 2f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn full_period_returns_to_start() {
        let sim = simulate_a(&Params::equal(PI, 0.0)).unwrap();
        assert!(sim.c_c1_a1 < 1e-9);
        assert_abs_diff_eq!(sim.c_c1_c2, 1.0, epsilon = 1e-9);
    }
}
