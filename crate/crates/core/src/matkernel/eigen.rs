use crate::error::{Error, Result};
use crate::scalar::{Complex, Real};

use super::ComplexMatrix;

const MAX_SWEEPS: usize = 100;

/// Eigendecomposition `H = V diag(values) V†` with eigenvalues descending.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T> {
    pub values: Vec<T>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: ComplexMatrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    /// `V f(diag) V†` for a real function of the eigenvalues.
    pub fn map_spectrum(&self, f: impl Fn(T) -> T) -> ComplexMatrix<T> {
        let n = self.values.len();
        let mapped: Vec<T> = self.values.iter().map(|&e| f(e)).collect();
        let v = &self.vectors;
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n).fold(Complex::new(T::zero(), T::zero()), |s, k| s + v[(i, k)] * v[(j, k)].conj() * mapped[k])
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        self.map_spectrum(|e| e)
    }
}

/// Unitary 2×2 Jacobi rotation `G` (acting on indices p < q) that diagonalizes
/// the Hermitian block `[[app, apq], [conj(apq), aqq]]` via `G† A G`.
///
/// Returned as `(g_pp, g_pq, g_qp, g_qq)`.
fn jacobi_rotation<T: Real>(app: T, aqq: T, apq: Complex<T>) -> (Complex<T>, Complex<T>, Complex<T>, Complex<T>) {
    let mag = apq.norm();
    let phase = apq.unscale(mag);
    let theta = (aqq - app) / (T::two() * mag);
    let t =
        if theta == T::zero() { T::one() } else { theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt()) };
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;
    let re = |x: T| Complex::new(x, T::zero());
    (re(c), re(s), phase.conj() * (-s), phase.conj() * c)
}

/// Cyclic Jacobi eigensolver for Hermitian matrices.
pub fn hermitian_eig<T: Real>(h: &ComplexMatrix<T>) -> Result<HermitianEigen<T>> {
    if !h.is_square() {
        return Err(Error::NotSquare { rows: h.rows(), cols: h.cols() });
    }
    let scale = h.max_abs().max(T::one());
    let defect = h.hermitian_defect();
    if defect > T::epsilon() * T::of(1e3) * scale {
        return Err(Error::NotHermitian(defect.to_f64().unwrap_or(f64::NAN)));
    }

    let n = h.rows();
    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let eps = T::epsilon();

    for _ in 0..MAX_SWEEPS {
        let off: T = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| a[(i, j)].norm_sqr()).sum();
        let total = a.frobenius();
        if off.sqrt() <= eps * total || total == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag == T::zero() {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                if mag <= eps * eps * (app.abs() + aqq.abs()) {
                    a[(p, q)] = Complex::new(T::zero(), T::zero());
                    a[(q, p)] = Complex::new(T::zero(), T::zero());
                    continue;
                }
                let (gpp, gpq, gqp, gqq) = jacobi_rotation(app, aqq, apq);
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * gpp + akq * gqp;
                    a[(k, q)] = akp * gpq + akq * gqq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = gpp.conj() * apk + gqp.conj() * aqk;
                    a[(q, k)] = gpq.conj() * apk + gqq.conj() * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * gpp + vkq * gqp;
                    v[(k, q)] = vkp * gpq + vkq * gqq;
                }
                a[(p, q)] = Complex::new(T::zero(), T::zero());
                a[(q, p)] = Complex::new(T::zero(), T::zero());
                a[(p, p)] = Complex::new(a[(p, p)].re, T::zero());
                a[(q, q)] = Complex::new(a[(q, q)].re, T::zero());
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.partial_cmp(&a[(i, i)].re).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Singular values sorted descending (`min(rows, cols)` of them), by one-sided
/// Jacobi orthogonalization of the columns.
pub fn singular_values<T: Real>(m: &ComplexMatrix<T>) -> Vec<T> {
    let work = if m.cols() > m.rows() { m.adjoint() } else { m.clone() };
    let (rows, cols) = (work.rows(), work.cols());
    let mut columns: Vec<Vec<Complex<T>>> = (0..cols).map(|j| work.column(j)).collect();
    let eps = T::epsilon();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..cols {
            for j in i + 1..cols {
                let (left, right) = columns.split_at_mut(j);
                let (ui, uj) = (&mut left[i], &mut right[0]);
                let alpha: T = ui.iter().map(|z| z.norm_sqr()).sum();
                let beta: T = uj.iter().map(|z| z.norm_sqr()).sum();
                let gamma =
                    ui.iter().zip(uj.iter()).fold(Complex::new(T::zero(), T::zero()), |s, (a, b)| s + a.conj() * b);
                if gamma.norm() <= eps * (alpha * beta).sqrt() || gamma.norm() == T::zero() {
                    continue;
                }
                rotated = true;
                let (gpp, gpq, gqp, gqq) = jacobi_rotation(alpha, beta, gamma);
                for k in 0..rows {
                    let a = ui[k];
                    let b = uj[k];
                    ui[k] = a * gpp + b * gqp;
                    uj[k] = a * gpq + b * gqq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut values: Vec<T> = columns.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()).collect();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    values.truncate(rows.min(cols));
    values
}

/// Largest singular value.
pub fn spectral_norm<T: Real>(m: &ComplexMatrix<T>) -> T {
    singular_values(m).first().copied().unwrap_or_else(T::zero)
}

/// Dichotomic observable `V sign(diag) V†` of a Hermitian matrix.
///
/// Fails when an eigenvalue lies within `1e-9` of zero, where the sign is
/// not determined by the input.
pub fn sign_observable<T: Real>(h: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let eig = hermitian_eig(h)?;
    let threshold = T::tol(1e-9);
    if let Some(&e) = eig.values.iter().find(|e| e.abs() < threshold) {
        return Err(Error::DegenerateSign(e.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(eig.map_spectrum(|e| e.signum()))
}

/// Like [`sign_observable`] but sends a (near-)null eigenspace to `+1`. Any
/// choice on that eigenspace is optimal for a linear objective `Tr(H·O)`.
pub fn sign_observable_lenient<T: Real>(h: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let eig = hermitian_eig(h)?;
    let threshold = T::tol(1e-12) * eig.values.iter().fold(T::one(), |m, e| m.max(e.abs()));
    Ok(eig.map_spectrum(|e| if e < -threshold { -T::one() } else { T::one() }))
}
