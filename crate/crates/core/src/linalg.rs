//! Dense complex matrix helpers on top of `nalgebra`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by std's inherent methods when std is linked
use num_traits::Float;

use crate::error::{bail, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Condition number above which a matrix is treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Induced 1-norm (maximum absolute column sum).
pub fn norm_one(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Inverse together with its 1-norm condition number `‖A‖₁‖A⁻¹‖₁`.
pub fn inverse_with_condition(m: &CMatrix) -> Result<(CMatrix, f64)> {
    if !m.is_square() {
        bail!(Input, "cannot invert a {}x{} matrix", m.nrows(), m.ncols());
    }
    let Some(inv) = m.clone().try_inverse() else {
        bail!(Numerical, "matrix is singular");
    };
    let cond = norm_one(m) * norm_one(&inv);
    if !cond.is_finite() {
        bail!(Numerical, "matrix inverse is not finite");
    }
    Ok((inv, cond))
}

/// Inverse that rejects matrices with condition number above [`MAX_CONDITION`].
pub fn checked_inverse(m: &CMatrix) -> Result<CMatrix> {
    let (inv, cond) = inverse_with_condition(m)?;
    if cond > MAX_CONDITION {
        bail!(Numerical, "matrix is ill-conditioned (condition {cond:.3e})");
    }
    Ok(inv)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Leading eigenpairs of a Hermitian positive semi-definite operator of
/// dimension `n`, by Lanczos iteration with full reorthogonalisation over a
/// Krylov space of dimension `krylov`.
///
/// Returns all Ritz values in descending order and the Ritz vectors of the
/// `count` largest. An exhausted Krylov space (exact low rank) is continued
/// from a fresh direction orthogonal to the basis, so the result always has
/// `count` orthonormal vectors.
pub fn leading_eigenpairs<F>(n: usize, count: usize, krylov: usize, apply: F) -> (Vec<f64>, CMatrix)
where
    F: Fn(&CVector) -> CVector,
{
    let k = krylov.clamp(count.min(n), n);
    let mut basis: Vec<CVector> = Vec::with_capacity(k);
    let mut alpha = Vec::with_capacity(k);
    let mut beta: Vec<f64> = Vec::with_capacity(k);
    let mut scale = 0.0f64;
    let mut seed = 0usize;
    // deterministic generic directions: phases from the golden-ratio sequence
    let mut fresh = |basis: &[CVector]| -> Option<CVector> {
        for _ in 0..4 {
            seed += 1;
            let mut v = CVector::from_fn(n, |i, _| {
                let t = ((i + 1) as f64 * 0.618_033_988_749_894_9 * seed as f64).fract();
                Complex64::from_polar(1.0 + 0.5 * ((i * 7 + seed) % 11) as f64 / 11.0, 2.0 * core::f64::consts::PI * t)
            });
            for _ in 0..2 {
                for q in basis {
                    let c = q.dotc(&v);
                    v.axpy(-c, q, Complex64::new(1.0, 0.0));
                }
            }
            let norm = v.norm();
            if norm > 1e-8 * (n as f64).sqrt() {
                return Some(v / Complex64::new(norm, 0.0));
            }
        }
        None
    };
    let Some(mut q) = fresh(&basis) else {
        return (Vec::new(), CMatrix::zeros(n, count));
    };
    loop {
        let mut w = apply(&q);
        let a = q.dotc(&w).re;
        basis.push(q);
        alpha.push(a);
        scale = scale.max(a.abs());
        if basis.len() == k {
            break;
        }
        for _ in 0..2 {
            for v in &basis {
                let c = v.dotc(&w);
                w.axpy(-c, v, Complex64::new(1.0, 0.0));
            }
        }
        let b = w.norm();
        if b > 1e-12 * scale.max(f64::MIN_POSITIVE) {
            beta.push(b);
            q = w / Complex64::new(b, 0.0);
        } else {
            let Some(next) = fresh(&basis) else { break };
            beta.push(0.0);
            q = next;
        }
    }
    let m = basis.len();
    let t = DMatrix::<f64>::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = nalgebra::SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, count);
    for (c, &i) in order.iter().take(count).enumerate() {
        let mut v = CVector::zeros(n);
        for (j, qj) in basis.iter().enumerate() {
            v.axpy(Complex64::new(eig.eigenvectors[(j, i)], 0.0), qj, Complex64::new(1.0, 0.0));
        }
        vectors.set_column(c, &v);
    }
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_unit_condition() {
        let eye = CMatrix::identity(5, 5);
        let (inv, cond) = inverse_with_condition(&eye).unwrap();
        assert_eq!(inv, eye);
        assert!((cond - 1.0).abs() < 1e-15);
        assert!((frobenius(&eye) - 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let m = CMatrix::from_element(3, 3, Complex64::new(1.0, 0.0));
        assert!(checked_inverse(&m).is_err());
    }

    #[test]
    fn lanczos_matches_dense_eigen() {
        use crate::rng::{complex_normal, trial_rng};
        let mut rng = trial_rng(5, "lanczos", 0);
        let n = 60;
        // four strong directions over a noise floor
        let y = CMatrix::from_fn(n, 90, |i, j| {
            let s: Complex64 = (0..4)
                .map(|p| Complex64::from_polar(10.0 / (p + 1) as f64, 0.3 * (p + 1) as f64 * (i as f64) + j as f64 * 0.7 * p as f64))
                .sum();
            s + complex_normal(&mut rng, 1.0)
        });
        let r = &y * y.adjoint();
        let dense = nalgebra::SymmetricEigen::new(r.clone());
        let mut ev: Vec<f64> = dense.eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        let (vals, vecs) = leading_eigenpairs(n, 4, 40, |v| &r * v);
        for i in 0..4 {
            assert!((vals[i] - ev[i]).abs() < 1e-9 * ev[0], "{i}: {} vs {}", vals[i], ev[i]);
        }
        // orthonormal, and spanning the same subspace as the dense vectors
        let gram = vecs.adjoint() * &vecs;
        assert!(max_abs_diff(&gram, &CMatrix::identity(4, 4)) < 1e-10);
        for i in 0..4 {
            let rv = &r * vecs.column(i);
            let res = (rv - vecs.column(i) * Complex64::new(vals[i], 0.0)).norm();
            assert!(res < 1e-7 * ev[0], "residual {res}");
        }
    }

    #[test]
    fn lanczos_completes_low_rank() {
        let n = 30;
        let u = CVector::from_fn(n, |i, _| Complex64::from_polar(1.0, 0.2 * i as f64));
        let r = &u * u.adjoint();
        let (vals, vecs) = leading_eigenpairs(n, 3, 20, |v| &r * v);
        assert!((vals[0] - n as f64).abs() < 1e-10);
        assert!(vals[1].abs() < 1e-9);
        let gram = vecs.adjoint() * &vecs;
        assert!(max_abs_diff(&gram, &CMatrix::identity(3, 3)) < 1e-10);
    }
}
