//! Wootters concurrence of two-qubit states.
//!
//! The general route never forms the non-Hermitian product `ρ ρ̃`. With
//! `ρ = W W†` from the eigen-decomposition of `ρ`, the square roots of the
//! eigenvalues of `ρ ρ̃` are the singular values of the symmetric matrix
//! `τ = Wᵀ (σy ⊗ σy) W`, which are real and nonnegative by construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{atom_ops, DensityMatrix};
use crate::linalg::{hermitian_eigen, kron, singular_values, ComplexMatrix};

/// Off-X entries above this magnitude reject the closed form.
pub const X_STATE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConcurrenceMethod {
    General,
    XState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcurrenceResult {
    pub value: f64,
    /// `√λ₁ ≥ √λ₂ ≥ √λ₃ ≥ √λ₄`.
    pub sqrt_lambdas: [f64; 4],
    pub method: ConcurrenceMethod,
}

impl ConcurrenceResult {
    fn from_sqrt_lambdas(mut s: [f64; 4], method: ConcurrenceMethod) -> Self {
        s.sort_by(|a, b| b.total_cmp(a));
        Self {
            value: value_from_sqrt_lambdas(&s),
            sqrt_lambdas: s,
            method,
        }
    }
}

/// `max(0, √λ₁ − √λ₂ − √λ₃ − √λ₄)` clamped to `[0, 1]`.
pub fn value_from_sqrt_lambdas(s: &[f64; 4]) -> f64 {
    (s[0] - s[1] - s[2] - s[3]).clamp(0.0, 1.0)
}

fn ensure_two_qubit(rho: &DensityMatrix) -> Result<()> {
    let dims = rho.composite().dims();
    if dims != [2, 2] {
        return Err(Error::DimensionMismatch {
            expected: 4,
            actual: rho.dim(),
        });
    }
    Ok(())
}

fn sigma_yy() -> ComplexMatrix {
    let sy = atom_ops().sigma_y;
    kron(&sy, &sy)
}

/// `ρ̃ = (σy ⊗ σy) ρ* (σy ⊗ σy)`.
pub fn spin_flip(rho: &DensityMatrix) -> Result<ComplexMatrix> {
    ensure_two_qubit(rho)?;
    let yy = sigma_yy();
    Ok(&(&yy * &rho.matrix().conj()) * &yy)
}

/// Wootters concurrence of an arbitrary two-qubit state.
pub fn concurrence(rho: &DensityMatrix) -> Result<ConcurrenceResult> {
    ensure_two_qubit(rho)?;
    let eig = hermitian_eigen(rho.matrix(), f64::INFINITY)?;
    let top = eig.values[0].max(0.0);
    // eigenvalues at roundoff level carry no weight; their square roots would
    // inject ~1e-8 noise into the singular values
    let cutoff = 32.0 * f64::EPSILON * top.max(1.0);
    let kept: Vec<usize> = (0..4).filter(|&k| eig.values[k] > cutoff).collect();
    let w = ComplexMatrix::from_fn(4, kept.len(), |i, c| {
        let k = kept[c];
        eig.vectors[(i, k)] * eig.values[k].sqrt()
    });
    let tau = &(&w.transpose() * &sigma_yy()) * &w;
    let mut s = [0.0; 4];
    for (slot, v) in s.iter_mut().zip(singular_values(&tau)) {
        *slot = v.max(0.0);
    }
    Ok(ConcurrenceResult::from_sqrt_lambdas(s, ConcurrenceMethod::General))
}

/// Closed form for states supported on the diagonal and anti-diagonal:
/// `C = 2 max(0, |ρ₂₃| − √(ρ₁₁ρ₄₄), |ρ₁₄| − √(ρ₂₂ρ₃₃))`.
pub fn x_state_concurrence(rho: &DensityMatrix) -> Result<ConcurrenceResult> {
    ensure_two_qubit(rho)?;
    let m = rho.matrix();
    let mut off_x: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            if i != j && i + j != 3 {
                off_x = off_x.max(m[(i, j)].norm());
            }
        }
    }
    if off_x > X_STATE_TOL {
        return Err(Error::NotXState { magnitude: off_x });
    }
    let p = |i: usize| m[(i, i)].re.max(0.0);
    let outer = (p(0) * p(3)).sqrt();
    let inner = (p(1) * p(2)).sqrt();
    let z_outer = m[(0, 3)].norm();
    let z_inner = m[(1, 2)].norm();
    let s = [
        outer + z_outer,
        (outer - z_outer).abs(),
        inner + z_inner,
        (inner - z_inner).abs(),
    ];
    let mut res = ConcurrenceResult::from_sqrt_lambdas(s, ConcurrenceMethod::XState);
    res.value = (2.0 * (z_inner - outer).max(z_outer - inner)).clamp(0.0, 1.0);
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{partial_trace, pure_state, Composite, Ket, SubsystemSpec};
    use crate::linalg::{matexp, I, ONE, ZERO};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn qubits() -> Composite {
        Composite::new(vec![SubsystemSpec::atom("A"), SubsystemSpec::atom("B")]).unwrap()
    }

    fn ket(a: usize, b: usize, amp: f64) -> Ket {
        Ket::real(amp).with("A", a).with("B", b)
    }

    fn phi_plus() -> DensityMatrix {
        pure_state(&qubits(), &[ket(0, 0, FRAC_1_SQRT_2), ket(1, 1, FRAC_1_SQRT_2)]).unwrap()
    }

    fn werner(p: f64) -> DensityMatrix {
        let m = &phi_plus().matrix().scale_real(p) + &ComplexMatrix::identity(4).scale_real((1.0 - p) / 4.0);
        DensityMatrix::two_qubit(m).unwrap()
    }

    fn random_unitary(rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let h = ComplexMatrix::from_fn(2, 2, |_, _| {
            Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))
        })
        .hermitian_part();
        matexp(&h.scale(I)).unwrap()
    }

    fn random_x_state(rng: &mut impl Rng) -> DensityMatrix {
        let mut d: [f64; 4] = std::array::from_fn(|_| rng.gen_range(0.0..1.0));
        let t: f64 = d.iter().sum();
        d.iter_mut().for_each(|x| *x /= t);
        let mut m = ComplexMatrix::from_real_diagonal(&d);
        let z14 = Complex64::from_polar(rng.gen_range(0.0..1.0) * (d[0] * d[3]).sqrt(), rng.gen_range(0.0..6.3));
        let z23 = Complex64::from_polar(rng.gen_range(0.0..1.0) * (d[1] * d[2]).sqrt(), rng.gen_range(0.0..6.3));
        m[(0, 3)] = z14;
        m[(3, 0)] = z14.conj();
        m[(1, 2)] = z23;
        m[(2, 1)] = z23.conj();
        DensityMatrix::two_qubit(m).unwrap()
    }

    #[test]
    fn spin_flip_examples() {
        let bell = phi_plus();
        let flipped = spin_flip(&bell).unwrap();
        assert!(flipped.max_abs_diff(bell.matrix()) < 1e-15);

        let gg = pure_state(&qubits(), &[ket(0, 0, 1.0)]).unwrap();
        let ee = pure_state(&qubits(), &[ket(1, 1, 1.0)]).unwrap();
        assert!(spin_flip(&gg).unwrap().max_abs_diff(ee.matrix()) < 1e-15);

        let w = werner(0.3);
        assert_abs_diff_eq!(spin_flip(&w).unwrap().trace().re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn maximally_entangled_states() {
        let psi = pure_state(&qubits(), &[ket(0, 1, FRAC_1_SQRT_2), ket(1, 0, FRAC_1_SQRT_2)]).unwrap();
        let c = concurrence(&psi).unwrap();
        assert_abs_diff_eq!(c.value, 1.0, epsilon = 1e-12);
        assert_eq!(c.method, ConcurrenceMethod::General);
        assert_abs_diff_eq!(concurrence(&phi_plus()).unwrap().value, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn product_states_have_zero_concurrence() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let a = random_unitary(&mut rng).mul_vec(&[ONE, ZERO]);
            let b = random_unitary(&mut rng).mul_vec(&[ONE, ZERO]);
            let psi: Vec<Complex64> = (0..4).map(|k| a[k / 2] * b[k % 2]).collect();
            let rho = DensityMatrix::two_qubit(ComplexMatrix::outer(&psi, &psi)).unwrap();
            assert!(concurrence(&rho).unwrap().value < 1e-12);
        }
    }

    #[test]
    fn werner_states() {
        for p in [0.2, 0.5, 0.9] {
            let expected = f64::max(0.0, (3.0 * p - 1.0) / 2.0);
            let c = concurrence(&werner(p)).unwrap();
            assert_abs_diff_eq!(c.value, expected, epsilon = 1e-10);
            let x = x_state_concurrence(&werner(p)).unwrap();
            assert_abs_diff_eq!(x.value, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn value_is_recomputable_from_lambdas() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..100 {
            let rho = random_x_state(&mut rng);
            for r in [concurrence(&rho).unwrap(), x_state_concurrence(&rho).unwrap()] {
                assert!(r.sqrt_lambdas.windows(2).all(|w| w[0] >= w[1]));
                assert!(r.sqrt_lambdas.iter().all(|&s| s >= 0.0));
                assert_abs_diff_eq!(r.value, value_from_sqrt_lambdas(&r.sqrt_lambdas), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn x_state_agrees_with_general_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let rho = random_x_state(&mut rng);
            let general = concurrence(&rho).unwrap().value;
            let closed = x_state_concurrence(&rho).unwrap().value;
            worst = worst.max((general - closed).abs());
        }
        assert!(worst <= 1e-10, "worst disagreement {worst:e}");
    }

    #[test]
    fn diagonal_states_are_separable() {
        let rho = DensityMatrix::two_qubit(ComplexMatrix::from_real_diagonal(&[0.1, 0.2, 0.3, 0.4])).unwrap();
        assert_eq!(x_state_concurrence(&rho).unwrap().value, 0.0);
        assert!(concurrence(&rho).unwrap().value < 1e-14);
    }

    #[test]
    fn x_state_specialization_with_single_coherence() {
        // diag (b5, b3, b2, b1) with coherence b4 between |ge> and |eg>
        let (b1, b2, b3, b4, b5) = (0.45, 0.2, 0.3, 0.22, 0.05);
        let m = ComplexMatrix::from_real_rows(
            4,
            4,
            &[b5, 0.0, 0.0, 0.0, 0.0, b3, b4, 0.0, 0.0, b4, b2, 0.0, 0.0, 0.0, 0.0, b1],
        )
        .unwrap();
        let rho = DensityMatrix::two_qubit(m).unwrap();
        let expected = 2.0 * f64::max(0.0, b4 - (b1 * b5).sqrt());
        assert_abs_diff_eq!(x_state_concurrence(&rho).unwrap().value, expected, epsilon = 1e-15);
        assert_abs_diff_eq!(concurrence(&rho).unwrap().value, expected, epsilon = 1e-12);
    }

    #[test]
    fn x_state_rejects_general_input() {
        let psi = pure_state(&qubits(), &[ket(0, 0, 0.6), ket(0, 1, 0.8)]).unwrap();
        assert!(matches!(x_state_concurrence(&psi), Err(Error::NotXState { .. })));
    }

    #[test]
    fn rejects_non_qubit_pairs() {
        let comp = Composite::new(vec![SubsystemSpec::cavity("C", 3).unwrap(), SubsystemSpec::atom("A")]).unwrap();
        let rho = pure_state(&comp, &[Ket::real(1.0).with("C", 2).with("A", 0)]).unwrap();
        assert!(concurrence(&rho).is_err());
        assert!(spin_flip(&rho).is_err());
        let reduced = partial_trace(&rho, &["A"]).unwrap();
        assert!(concurrence(&reduced).is_err());
    }

    #[test]
    fn local_unitary_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let rho = random_x_state(&mut rng);
            let u = kron(&random_unitary(&mut rng), &random_unitary(&mut rng));
            let rotated = &(&u * rho.matrix()) * &u.adjoint();
            let rotated = DensityMatrix::two_qubit(rotated.hermitian_part()).unwrap();
            let before = concurrence(&rho).unwrap().value;
            let after = concurrence(&rotated).unwrap().value;
            assert!((before - after).abs() <= 1e-9);
        }
    }

    proptest! {
        #[test]
        fn separable_mixtures_have_zero_concurrence(
            weights in proptest::collection::vec(0.01f64..1.0, 1..5),
            angles in proptest::collection::vec((0.0f64..3.2, 0.0f64..6.3, 0.0f64..3.2, 0.0f64..6.3), 5),
        ) {
            let total: f64 = weights.iter().sum();
            let mut m = ComplexMatrix::zeros(4, 4);
            for (w, &(ta, pa, tb, pb)) in weights.iter().zip(&angles) {
                let a = [Complex64::new((ta / 2.0).cos(), 0.0), Complex64::from_polar((ta / 2.0).sin(), pa)];
                let b = [Complex64::new((tb / 2.0).cos(), 0.0), Complex64::from_polar((tb / 2.0).sin(), pb)];
                let psi: Vec<Complex64> = (0..4).map(|k| a[k / 2] * b[k % 2]).collect();
                m = &m + &ComplexMatrix::outer(&psi, &psi).scale_real(w / total);
            }
            let rho = DensityMatrix::two_qubit(m.hermitian_part()).unwrap();
            let c = concurrence(&rho).unwrap().value;
            prop_assert!(c <= 1e-7, "c = {c:e}");
        }

        #[test]
        fn concurrence_is_bounded(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = ComplexMatrix::from_fn(4, 4, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let m = &g * &g.adjoint();
            let t = m.trace().re;
            let rho = DensityMatrix::two_qubit(m.scale_real(1.0 / t).hermitian_part()).unwrap();
            let c = concurrence(&rho).unwrap().value;
            prop_assert!((0.0..=1.0).contains(&c));
        }
    }
}
