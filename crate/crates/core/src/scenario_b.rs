//! Two atoms, the first excited and the second in its ground state, crossing
//! one leaky vacuum cavity in succession.

use serde::{Deserialize, Serialize};

use crate::entanglement::concurrence;
use crate::error::{Error, Result};
use crate::hilbert::{partial_trace, pure_state, Composite, DensityMatrix, Ket, SubsystemSpec};
use crate::linalg::ComplexMatrix;
use crate::lindblad::{cavity_dissipator, evolve, jc_hamiltonian, liouvillian, CavityBath, Superoperator};
use crate::scenario_a::{LEAKAGE_TOL, MAX_KAPPA_T};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub gt: f64,
    pub kappa_over_g: f64,
    /// Idle time between the two transits, as a Rabi angle.
    #[serde(default)]
    pub gap_gt: f64,
    #[serde(default = "default_fock_dim")]
    pub fock_dim: usize,
}

fn default_fock_dim() -> usize {
    2
}

impl Params {
    pub fn new(gt: f64, kappa_over_g: f64) -> Self {
        Self {
            gt,
            kappa_over_g,
            gap_gt: 0.0,
            fock_dim: default_fock_dim(),
        }
    }

    pub fn with_gap(mut self, gap_gt: f64) -> Self {
        self.gap_gt = gap_gt;
        self
    }

    pub fn with_fock_dim(mut self, fock_dim: usize) -> Self {
        self.fock_dim = fock_dim;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gt > 0.0 && self.gt.is_finite()) {
            return Err(Error::InvalidParameter(format!("gt must be > 0, got {}", self.gt)));
        }
        if !(self.kappa_over_g >= 0.0 && self.kappa_over_g.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "kappa_over_g must be >= 0, got {}",
                self.kappa_over_g
            )));
        }
        if !(self.gap_gt >= 0.0 && self.gap_gt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gap_gt must be >= 0, got {}",
                self.gap_gt
            )));
        }
        if self.fock_dim < 2 {
            return Err(Error::InvalidSubsystemDim(self.fock_dim));
        }
        Ok(())
    }

    fn require_no_gap(&self) -> Result<()> {
        if self.gap_gt != 0.0 {
            return Err(Error::InvalidParameter(
                "closed forms assume the second atom enters immediately (gap_gt = 0)".into(),
            ));
        }
        Ok(())
    }

    fn kappa_t(&self) -> f64 {
        (self.kappa_over_g * self.gt).min(MAX_KAPPA_T)
    }
}

/// `γ₁..γ₄` as functions of `gt` and `κ/g`.
pub fn gammas(p: &Params) -> [f64; 4] {
    let (s, c) = p.gt.sin_cos();
    let kt = p.kappa_t();
    let e = (-kt).exp();
    let half = (-kt / 2.0).exp();
    let k2 = p.kappa_over_g / 2.0;
    [
        1.0 - s * s * e,
        c * c * s * s * e * e,
        s.powi(4) * e * e,
        (s * half - k2 * c * half + k2) * c * s * e,
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticState {
    pub rho: DensityMatrix,
    /// `1 − (γ₁ + γ₂ + γ₃)` before renormalization.
    pub trace_deficit: f64,
}

/// Two-atom state in the basis `|gg>, |ge>, |eg>, |ee>`, divided by its
/// trace.
pub fn analytic_state_b(p: &Params) -> Result<AnalyticState> {
    p.validate()?;
    p.require_no_gap()?;
    let [g1, g2, g3, g4] = gammas(p);
    let trace = g1 + g2 + g3;
    let mut m = ComplexMatrix::from_real_diagonal(&[g2, g3, g1, 0.0]);
    m[(1, 2)] = (-g4).into();
    m[(2, 1)] = (-g4).into();
    let composite = Composite::new(vec![SubsystemSpec::atom("A1"), SubsystemSpec::atom("A2")])?;
    Ok(AnalyticState {
        rho: DensityMatrix::new(m.scale_real(1.0 / trace), composite)?,
        trace_deficit: 1.0 - trace,
    })
}

/// Ideal-cavity concurrence `2|cos(gt)|sin²(gt)`.
pub fn c_ideal_b(gt: f64) -> f64 {
    let (s, c) = gt.sin_cos();
    2.0 * c.abs() * s * s
}

/// `2sin²(gt)e^{-κt}√(1 − sin²(gt)e^{-κt})`, which equals `2√(γ₁γ₃)`.
pub fn concurrence_b(p: &Params) -> f64 {
    let x = p.gt.sin().powi(2) * (-p.kappa_t()).exp();
    2.0 * x * (1.0 - x).max(0.0).sqrt()
}

/// First-order expansion `C_ideal(1 + κt·tan²(gt)/2 − κt)`.
pub fn concurrence_b_approx(p: &Params) -> f64 {
    let kt = p.kappa_over_g * p.gt;
    c_ideal_b(p.gt) * (1.0 + 0.5 * kt * p.gt.tan().powi(2) - kt)
}

/// Whether weak damping raises the concurrence above the ideal value,
/// i.e. `tan(gt) > √2`.
pub fn enhancement_possible(gt: f64) -> bool {
    gt.tan() > 2f64.sqrt()
}

/// `κ/g = ln((3/2)sin²(gt))/gt` when positive, `None` when damping cannot
/// help.
pub fn optimal_kappa_b(gt: f64) -> Result<Option<f64>> {
    if !(gt > 0.0 && gt.is_finite()) {
        return Err(Error::InvalidParameter(format!("gt must be > 0, got {gt}")));
    }
    let k = (1.5 * gt.sin().powi(2)).ln() / gt;
    Ok((k > 0.0).then_some(k))
}

/// Peak of `2x√(1 − x)` over `x ∈ [0, 1]`, reached at `x = 2/3`.
pub fn max_concurrence_b() -> f64 {
    4.0 / (3.0 * 3f64.sqrt())
}

/// Both concurrence routes at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouteComparison {
    /// Closed-form `2√(γ₁γ₃)`.
    pub formula: f64,
    /// Wootters concurrence of the renormalized matrix; `None` when that
    /// matrix is not a valid state.
    pub wootters: Option<f64>,
    pub trace_deficit: f64,
}

impl RouteComparison {
    pub fn gap(&self) -> Option<f64> {
        self.wootters.map(|w| w - self.formula)
    }
}

pub fn compare_routes(p: &Params) -> Result<RouteComparison> {
    p.validate()?;
    p.require_no_gap()?;
    let formula = concurrence_b(p);
    let [g1, g2, g3, _] = gammas(p);
    let trace_deficit = 1.0 - (g1 + g2 + g3);
    let wootters = match analytic_state_b(p) {
        Ok(st) => Some(concurrence(&st.rho)?.value),
        Err(Error::Positivity { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(RouteComparison {
        formula,
        wootters,
        trace_deficit,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationB {
    pub rho_a1a2: DensityMatrix,
    pub concurrence: f64,
    /// Cavity weight above one photon at the end of the run.
    pub leakage: f64,
}

/// Master-equation evolution of `C⊗A₁⊗A₂` from `|0, e, g>`: atom 1 transit,
/// idle decay for `gap_gt`, atom 2 transit.
pub fn simulate_b(p: &Params) -> Result<SimulationB> {
    p.validate()?;
    let composite = Composite::new(vec![
        SubsystemSpec::cavity("C", p.fock_dim)?,
        SubsystemSpec::atom("A1"),
        SubsystemSpec::atom("A2"),
    ])?;
    let rho0 = pure_state(&composite, &[Ket::real(1.0).with("C", 0).with("A1", 1).with("A2", 0)])?;
    let decay = cavity_dissipator(CavityBath::zero_temperature(p.kappa_over_g)?, "C", &composite)?;
    let transit = |atom: &str| -> Result<Superoperator> {
        liouvillian(
            &jc_hamiltonian("C", atom, &composite)?,
            std::slice::from_ref(&decay),
            &composite,
        )
    };

    let rho = evolve(&rho0, &transit("A1")?, p.gt)?;
    let rho = evolve(&rho, &decay, p.gap_gt)?;
    let rho = evolve(&rho, &transit("A2")?, p.gt)?;

    let cavity = partial_trace(&rho, &["C"])?.populations();
    let leakage = cavity.iter().skip(2).sum::<f64>().max(0.0);
    if leakage > LEAKAGE_TOL {
        return Err(Error::TruncationLeakage {
            leakage,
            tolerance: LEAKAGE_TOL,
        });
    }
    let rho_a1a2 = partial_trace(&rho, &["A1", "A2"])?;
    let c = concurrence(&rho_a1a2)?.value;
    Ok(SimulationB {
        rho_a1a2,
        concurrence: c,
        leakage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimize::argmax;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    #[test]
    fn ideal_coefficients() {
        for gt in [0.3, FRAC_PI_3, 1.2, 2.4] {
            let (s, c) = f64::sin_cos(gt);
            let [g1, g2, g3, g4] = gammas(&Params::new(gt, 0.0));
            assert_abs_diff_eq!(g1, c * c, epsilon = 1e-15);
            assert_abs_diff_eq!(g2, c * c * s * s, epsilon = 1e-15);
            assert_abs_diff_eq!(g3, s.powi(4), epsilon = 1e-15);
            assert_abs_diff_eq!(g4, c * s * s, epsilon = 1e-15);
            assert_abs_diff_eq!(g2 * g3, (g4 * s).powi(2), epsilon = 1e-15);
            assert_abs_diff_eq!(g1 * g3, g4 * g4, epsilon = 1e-15);
            assert_abs_diff_eq!(g1 + g2 + g3, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn half_period_transits_swap_excitation() {
        let st = analytic_state_b(&Params::new(FRAC_PI_2, 0.0)).unwrap();
        assert_abs_diff_eq!(st.rho.get(1, 1).re, 1.0, epsilon = 1e-15);
        let sim = simulate_b(&Params::new(FRAC_PI_2, 0.0)).unwrap();
        assert_abs_diff_eq!(sim.rho_a1a2.get(1, 1).re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn trace_deficit_and_renormalization() {
        let p = Params::new(1.1, 0.3);
        let st = analytic_state_b(&p).unwrap();
        let x = 1.1f64.sin().powi(2) * (-0.33f64).exp();
        assert_abs_diff_eq!(st.trace_deficit, x - x * (-0.33f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(st.rho.trace(), 1.0, epsilon = 1e-15);
        assert!(analytic_state_b(&p.with_gap(0.1)).is_err());
    }

    #[test]
    fn ideal_concurrence() {
        assert_abs_diff_eq!(concurrence_b(&Params::new(FRAC_PI_3, 0.0)), 0.75, epsilon = 1e-15);
        for gt in [0.2, 1.0, 2.0, 2.9] {
            let p = Params::new(gt, 0.0);
            assert_abs_diff_eq!(concurrence_b(&p), c_ideal_b(gt), epsilon = 1e-15);
            assert_abs_diff_eq!(concurrence_b_approx(&p), c_ideal_b(gt), epsilon = 1e-15);
        }
    }

    #[test]
    fn formula_is_geometric_mean_of_populations() {
        for &(gt, k) in &[(0.7, 0.1), (1.3, 0.8), (2.2, 0.05)] {
            let p = Params::new(gt, k);
            let [g1, _, g3, _] = gammas(&p);
            assert_abs_diff_eq!(concurrence_b(&p), 2.0 * (g1 * g3).sqrt(), epsilon = 1e-15);
        }
    }

    #[test]
    fn expansion_is_first_order() {
        let p = Params::new(1.0, 1e-4);
        let rel = (concurrence_b_approx(&p) - concurrence_b(&p)).abs() / concurrence_b(&p);
        assert!(rel < 1e-7, "{rel}");
        let coarse = Params::new(1.0, 1e-2);
        let rel2 = (concurrence_b_approx(&coarse) - concurrence_b(&coarse)).abs() / concurrence_b(&coarse);
        assert!(rel2 > 50.0 * rel && rel2 < 1e4 * rel * 1.5);
    }

    #[test]
    fn threshold_law() {
        let kt = 1e-3;
        let mut flips = Vec::new();
        let mut prev = None;
        for k in 1..=200 {
            let gt = FRAC_PI_2 * k as f64 / 201.0;
            let p = Params::new(gt, kt / gt);
            let enhanced = concurrence_b(&p) > c_ideal_b(gt);
            assert_eq!(enhanced, enhancement_possible(gt), "gt = {gt}");
            if prev.is_some_and(|q| q != enhanced) {
                flips.push(gt);
            }
            prev = Some(enhanced);
        }
        assert_eq!(flips.len(), 1);
        assert!((flips[0] - 2f64.sqrt().atan()).abs() < FRAC_PI_2 / 201.0);
    }

    #[test]
    fn optimum_values() {
        assert_abs_diff_eq!(optimal_kappa_b(1.2).unwrap().unwrap(), 0.2205867, epsilon = 1e-7);
        assert_eq!(optimal_kappa_b(3.0 * PI / 4.0).unwrap(), None);
        assert_eq!(optimal_kappa_b(0.5).unwrap(), None);
        assert!(optimal_kappa_b(0.0).is_err());
    }

    #[test]
    fn optimum_is_numeric_argmax() {
        for gt in [1.0, 1.2, 1.4] {
            let (k, c) = argmax(|k| concurrence_b(&Params::new(gt, k)), 0.0, 2.0, 2001);
            assert!((k - optimal_kappa_b(gt).unwrap().unwrap()).abs() < 1e-6);
            assert_abs_diff_eq!(c, max_concurrence_b(), epsilon = 1e-9);
        }
    }

    #[test]
    fn universal_peak_above_threshold() {
        for k in 0..50 {
            let gt = 0.9554 + (FRAC_PI_2 - 0.9554) * k as f64 / 49.0;
            if gt.sin().powi(2) < 2.0 / 3.0 {
                continue;
            }
            let best = optimal_kappa_b(gt).unwrap().unwrap_or(0.0);
            assert_abs_diff_eq!(
                concurrence_b(&Params::new(gt, best)),
                max_concurrence_b(),
                epsilon = 1e-9
            );
        }
        assert_abs_diff_eq!(max_concurrence_b(), 0.76980, epsilon = 1e-5);
    }

    #[test]
    fn routes_coincide_without_damping() {
        for gt in [0.4, 1.0, 1.4, 2.6] {
            let r = compare_routes(&Params::new(gt, 0.0)).unwrap();
            assert!(r.gap().unwrap().abs() < 1e-12);
        }
        let r = compare_routes(&Params::new(FRAC_PI_3, 0.01)).unwrap();
        assert_abs_diff_eq!(r.wootters.unwrap(), 0.74623, epsilon = 1e-5);
        assert!(r.gap().unwrap().abs() > 1e-3);
    }

    #[test]
    fn invalid_closed_form_state_is_reported() {
        let r = compare_routes(&Params::new(0.1, 10.0)).unwrap();
        assert_eq!(r.wootters, None);
        assert!(r.formula > 0.0);
    }

    #[test]
    fn unitary_oracle_matches_closed_form() {
        for gt in [0.5, FRAC_PI_3, 1.2, 2.0] {
            let p = Params::new(gt, 0.0);
            let sim = simulate_b(&p).unwrap();
            let st = analytic_state_b(&p).unwrap();
            assert!(sim.rho_a1a2.matrix().max_abs_diff(st.rho.matrix()) < 1e-9);
            assert!((sim.concurrence - c_ideal_b(gt)).abs() < 1e-9);
        }
        assert_abs_diff_eq!(
            simulate_b(&Params::new(FRAC_PI_3, 0.0)).unwrap().concurrence,
            0.75,
            epsilon = 1e-9
        );
    }

    #[test]
    fn oracle_at_weak_damping() {
        let p = Params::new(1.2, 0.01);
        let sim = simulate_b(&p).unwrap();
        let w = compare_routes(&p).unwrap().wootters.unwrap();
        assert!((sim.concurrence - w).abs() / w < 0.05);
        assert_abs_diff_eq!(sim.concurrence, 0.62631, epsilon = 1e-5);
    }

    #[test]
    fn idle_gap_only_loses_coherence() {
        let p = Params::new(1.2, 0.05);
        let direct = simulate_b(&p).unwrap().concurrence;
        let delayed = simulate_b(&p.with_gap(0.5)).unwrap().concurrence;
        assert!(delayed < direct);
        let ideal = simulate_b(&Params::new(1.2, 0.0).with_gap(0.5)).unwrap().concurrence;
        assert_abs_diff_eq!(ideal, c_ideal_b(1.2), epsilon = 1e-9);
    }

    #[test]
    fn larger_truncation_changes_nothing() {
        let p = Params::new(0.9, 0.2);
        let a = simulate_b(&p).unwrap();
        let b = simulate_b(&p.with_fock_dim(4)).unwrap();
        assert_eq!(b.leakage, 0.0);
        assert!(a.rho_a1a2.matrix().max_abs_diff(b.rho_a1a2.matrix()) < 1e-12);
    }
}
