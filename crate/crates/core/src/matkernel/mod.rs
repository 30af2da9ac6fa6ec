//! Dense complex linear algebra for the small matrices used here
//! (at most 64×64 in practice).

mod eigen;
mod matrix;

pub use eigen::{
    hermitian_eig, sign_observable, sign_observable_lenient, singular_values, spectral_norm, HermitianEigen,
};
pub use matrix::{kron, kron_all, pauli, ComplexMatrix, StateVector};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::states::SchmidtSpectrum;

/// Schmidt amplitudes of a bipartite pure state whose index is
/// `i_A · dim_b + i_B`.
pub fn schmidt<T: Real>(v: &StateVector<T>, dim_a: usize, dim_b: usize) -> Result<SchmidtSpectrum<T>> {
    if dim_a * dim_b != v.dim() {
        return Err(Error::Dimension { expected: dim_a * dim_b, actual: v.dim() });
    }
    let coeffs = ComplexMatrix::from_vec(dim_a, dim_b, v.amplitudes().to_vec())?;
    Ok(SchmidtSpectrum::from_unsorted(singular_values(&coeffs)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Complex;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn random_matrix(rows: usize, cols: usize, entries: &[(f64, f64)]) -> ComplexMatrix<f64> {
        ComplexMatrix::from_fn(rows, cols, |i, j| {
            let (re, im) = entries[(i * cols + j) % entries.len()];
            c(re, im)
        })
    }

    fn random_hermitian(n: usize, entries: &[(f64, f64)]) -> ComplexMatrix<f64> {
        random_matrix(n, n, entries).hermitian_part()
    }

    fn random_unitary(n: usize, entries: &[(f64, f64)]) -> ComplexMatrix<f64> {
        // eigenvectors of a random Hermitian matrix
        hermitian_eig(&random_hermitian(n, entries)).unwrap().vectors
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let i4 = kron(&pauli::identity::<f64>(), &pauli::identity());
        assert_eq!(i4, ComplexMatrix::identity(4));
    }

    #[test]
    fn xx_fixes_bell_state() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::from_real(&[h, 0.0, 0.0, h]).unwrap();
        let xx = kron(&pauli::x(), &pauli::x());
        let out = StateVector::new(xx.apply(bell.amplitudes())).unwrap();
        assert!((out.fidelity(&bell) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zz_spectrum() {
        let zz = kron(&pauli::z::<f64>(), &pauli::z());
        let eig = hermitian_eig(&zz).unwrap();
        for (got, want) in eig.values.iter().zip([1.0, 1.0, -1.0, -1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn pauli_eigenpairs() {
        let eig = hermitian_eig(&pauli::z::<f64>()).unwrap();
        assert_eq!(eig.values, vec![1.0, -1.0]);

        let eig = hermitian_eig(&pauli::x::<f64>()).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-14 && (eig.values[1] + 1.0).abs() < 1e-14);
        let plus = eig.vectors.column(0);
        let minus = eig.vectors.column(1);
        assert!((plus[0].norm() - plus[1].norm()).abs() < 1e-14);
        assert!(((plus[0] - plus[1]).norm()) < 1e-14);
        assert!(((minus[0] + minus[1]).norm()) < 1e-14);
    }

    #[test]
    fn pauli_y_is_handled() {
        let eig = hermitian_eig(&pauli::y::<f64>()).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-14);
        assert!(eig.reconstruct().max_abs_diff(&pauli::y()) < 1e-14);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let m = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 0.0, 1.0]).unwrap();
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian(_))));
        let rect = ComplexMatrix::<f64>::zeros(2, 3);
        assert!(matches!(hermitian_eig(&rect), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn spectral_norm_of_identity() {
        assert!((spectral_norm(&ComplexMatrix::<f64>::identity(4)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn spectral_norm_of_rectangular_and_zero() {
        let m = ComplexMatrix::from_real(2, 3, &[3.0f64, 0.0, 0.0, 0.0, 0.0, 4.0]).unwrap();
        assert!((spectral_norm(&m) - 4.0).abs() < 1e-14);
        assert_eq!(singular_values(&m).len(), 2);
        assert_eq!(spectral_norm(&ComplexMatrix::<f64>::zeros(3, 3)), 0.0);
    }

    #[test]
    fn schmidt_of_bell_and_product() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::from_real(&[h, 0.0, 0.0, h]).unwrap();
        let s = schmidt(&bell, 2, 2).unwrap();
        assert!((s.amplitudes()[0] - h).abs() < 1e-15 && (s.amplitudes()[1] - h).abs() < 1e-15);

        let plusplus = StateVector::from_real(&[0.5f64, 0.5, 0.5, 0.5]).unwrap();
        let s = schmidt(&plusplus, 2, 2).unwrap();
        assert!((s.amplitudes()[0] - 1.0).abs() < 1e-15 && s.amplitudes()[1].abs() < 1e-15);
    }

    #[test]
    fn schmidt_dimension_mismatch() {
        let v = StateVector::<f64>::basis(4, 0);
        assert!(matches!(schmidt(&v, 2, 3), Err(Error::Dimension { expected: 6, actual: 4 })));
    }

    #[test]
    fn sign_observable_examples() {
        let z = pauli::z::<f64>();
        assert!(sign_observable(&z).unwrap().max_abs_diff(&z) < 1e-15);

        let x = pauli::x::<f64>();
        assert!(sign_observable(&x.scale_real(3.0)).unwrap().max_abs_diff(&x) < 1e-14);

        let zx = &z + &x;
        let want = zx.scale_real(std::f64::consts::FRAC_1_SQRT_2);
        let got = sign_observable(&zx).unwrap();
        assert!(got.max_abs_diff(&want) < 1e-14);
        assert!(got.matmul(&got).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-10);
    }

    #[test]
    fn sign_observable_rejects_singular() {
        let m = ComplexMatrix::diagonal(&[1.0, 1e-12]);
        assert!(matches!(sign_observable(&m), Err(Error::DegenerateSign(_))));
        let lenient = sign_observable_lenient(&m).unwrap();
        assert!(lenient.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn single_precision_eigensolve() {
        let h = ComplexMatrix::<f32>::from_real(2, 2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        let eig = hermitian_eig(&h).unwrap();
        assert!((eig.values[0] - 3.0).abs() < 1e-5 && (eig.values[1] - 1.0).abs() < 1e-5);
        assert!(eig.reconstruct().max_abs_diff(&h) < 1e-5);
    }

    fn entries() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 64..=64)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn eig_reconstructs(n in 1usize..=16, e in entries()) {
            let h = random_hermitian(n, &e);
            let eig = hermitian_eig(&h).unwrap();
            prop_assert!(eig.reconstruct().max_abs_diff(&h) < 1e-10);
            let v = &eig.vectors;
            prop_assert!(v.adjoint().matmul(v).max_abs_diff(&ComplexMatrix::identity(n)) < 1e-10);
            for w in eig.values.windows(2) {
                prop_assert!(w[0] >= w[1]);
            }
            let max_abs = eig.values.iter().fold(0.0f64, |m, e| m.max(e.abs()));
            prop_assert!((spectral_norm(&h) - max_abs).abs() < 1e-10);
        }

        #[test]
        fn kron_is_associative(e in entries(), r in 1usize..=3, s in 1usize..=3) {
            let a = random_matrix(r, s, &e);
            let b = random_matrix(s, r, &e[7..]);
            let c = random_matrix(2, 3, &e[13..]);
            let left = kron(&kron(&a, &b), &c);
            let right = kron(&a, &kron(&b, &c));
            prop_assert!(left.max_abs_diff(&right) < 1e-12);
        }

        #[test]
        fn schmidt_is_local_unitary_invariant(e in entries(), f in entries()) {
            let dim_a = 4;
            let dim_b = 8;
            let raw: Vec<_> = (0..dim_a * dim_b).map(|k| c(e[k].0, e[k].1 + f[k].0)).collect();
            let v = StateVector::normalized(raw).unwrap();
            let before = schmidt(&v, dim_a, dim_b).unwrap();
            let total: f64 = before.amplitudes().iter().map(|s| s * s).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);

            let u = random_unitary(dim_a, &f);
            let w = random_unitary(dim_b, &e[5..]);
            let rotated = StateVector::new(kron(&u, &w).apply(v.amplitudes())).unwrap();
            let after = schmidt(&rotated, dim_a, dim_b).unwrap();
            for (x, y) in before.amplitudes().iter().zip(after.amplitudes()) {
                prop_assert!((x - y).abs() < 1e-10);
            }
        }
    }
}
