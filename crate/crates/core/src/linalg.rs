//! Small dense and slice helpers shared by the solvers.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += a * x`
#[inline]
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Validates that every entry is finite.
pub fn ensure_finite(v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

/// Assembles the dense matrix of a linear map given through its action.
pub fn assemble_dense(n_in: usize, n_out: usize, mut apply: impl FnMut(&[f64], &mut [f64])) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n_out, n_in);
    let mut e = vec![0.0; n_in];
    let mut col = vec![0.0; n_out];
    for j in 0..n_in {
        e[j] = 1.0;
        apply(&e, &mut col);
        m.column_mut(j).copy_from_slice(&col);
        e[j] = 0.0;
    }
    m
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    symmetrize(m).symmetric_eigenvalues().min()
}

pub fn max_eigenvalue(m: &DMatrix<f64>) -> f64 {
    symmetrize(m).symmetric_eigenvalues().max()
}

/// `m^p` for a symmetric positive definite `m` via its eigendecomposition.
pub fn spd_power(m: &DMatrix<f64>, p: f64) -> DMatrix<f64> {
    let eig = symmetrize(m).symmetric_eigen();
    let vals = eig.eigenvalues.map(|l| l.max(0.0).powf(p));
    &eig.eigenvectors * DMatrix::from_diagonal(&vals) * eig.eigenvectors.transpose()
}

/// Spectral norm of a dense matrix.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Power iteration on `LᵀL`, returning an estimate of `‖L‖₂`.
pub fn power_iteration_norm(
    n_in: usize,
    n_out: usize,
    mut apply: impl FnMut(&[f64], &mut [f64]),
    mut adjoint: impl FnMut(&[f64], &mut [f64]),
    iterations: usize,
    rng: &mut impl Rng,
) -> f64 {
    let mut x: Vec<f64> = (0..n_in).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut y = vec![0.0; n_out];
    let mut est = 0.0;
    let nx = norm(&x);
    if nx == 0.0 {
        return 0.0;
    }
    x.iter_mut().for_each(|v| *v /= nx);
    for _ in 0..iterations {
        apply(&x, &mut y);
        adjoint(&y, &mut x);
        let n = norm(&x);
        if n == 0.0 {
            return 0.0;
        }
        est = n.sqrt();
        x.iter_mut().for_each(|v| *v /= n);
    }
    est
}

/// Conjugate gradients for a symmetric positive definite map.
pub fn conjugate_gradient(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    rhs: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let n = rhs.len();
    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let target = rel_tol * rel_tol * rr.max(f64::MIN_POSITIVE);
    for _ in 0..max_iter {
        if rr <= target {
            return Ok(x);
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::NotPositiveDefinite(format!(
                "conjugate gradients met curvature {pap:e}"
            )));
        }
        let a = rr / pap;
        axpy(a, &p, &mut x);
        axpy(-a, &ap, &mut r);
        let rr_new = dot(&r, &r);
        let b = rr_new / rr;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + b * *pi;
        }
        rr = rr_new;
    }
    if rr <= target * 1e4 {
        Ok(x)
    } else {
        Err(Error::RootNotConverged {
            residual: rr.sqrt(),
            iterations: max_iter,
        })
    }
}

/// FNV-1a over the bit patterns of a slice; a cheap fingerprint for iterate logs.
pub fn fingerprint(v: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for x in v {
        for b in x.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn spd_power_inverts_square_root() {
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let half = spd_power(&m, 0.5);
        let back = &half * &half;
        assert!((back - &m).norm() < 1e-12);
        let inv_half = spd_power(&m, -0.5);
        assert!((&inv_half * &half - DMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn power_iteration_matches_singular_value() {
        let a = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let est = power_iteration_norm(
            2,
            2,
            |x, y| y.copy_from_slice((&a * DVector::from_column_slice(x)).as_slice()),
            |y, x| x.copy_from_slice((a.transpose() * DVector::from_column_slice(y)).as_slice()),
            100,
            &mut rng,
        );
        assert!((est - 3.0).abs() < 1e-9);
    }

    #[test]
    fn cg_solves_small_system() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0]);
        let b = [1.0, 2.0, 3.0];
        let x = conjugate_gradient(
            |v, out| out.copy_from_slice((&a * DVector::from_column_slice(v)).as_slice()),
            &b,
            1e-14,
            50,
        )
        .unwrap();
        let r = &a * DVector::from_column_slice(&x) - DVector::from_column_slice(&b);
        assert!(r.norm() < 1e-12);
    }

    #[test]
    fn non_finite_is_reported() {
        assert_eq!(ensure_finite(&[1.0, f64::NAN]), Err(Error::NonFinite(1)));
        assert!(ensure_finite(&[0.0, -2.0]).is_ok());
    }
}
