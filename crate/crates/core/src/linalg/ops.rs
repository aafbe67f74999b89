use serde::{Deserialize, Serialize};

use super::eig::hermitian_eig;
use super::matrix::{ComplexMatrix, C64, ZERO};
use super::svd::svd;
use super::tolerances::Tolerances;
use crate::error::{Error, Result};

/// Which factor of a bipartite space `C^dS ⊗ C^dA` is traced out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    First,
    Second,
}

/// Partial trace of `a` on `C^dS ⊗ C^dA` over the named subsystem.
pub fn partial_trace(a: &ComplexMatrix, dims: (usize, usize), which: Subsystem) -> Result<ComplexMatrix> {
    let (ds, da) = dims;
    let n = ds * da;
    if a.rows() != n || a.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "partial trace over {ds}x{da} needs a {n}x{n} matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    Ok(match which {
        Subsystem::Second => ComplexMatrix::from_fn(ds, ds, |i, j| (0..da).map(|k| a[(i * da + k, j * da + k)]).sum()),
        Subsystem::First => ComplexMatrix::from_fn(da, da, |i, j| (0..ds).map(|k| a[(k * da + i, k * da + j)]).sum()),
    })
}

/// Count of singular values above `rank_threshold · max(1, σ_max)`.
pub fn numerical_rank(a: &ComplexMatrix, tol: &Tolerances) -> usize {
    if a.rows() == 0 || a.cols() == 0 {
        return 0;
    }
    let work = if a.cols() > a.rows() { a.adjoint() } else { a.clone() };
    match svd(&work) {
        Ok(s) => s.rank(tol.rank_threshold),
        Err(_) => hermitian_rank_fallback(&work, tol),
    }
}

fn hermitian_rank_fallback(a: &ComplexMatrix, tol: &Tolerances) -> usize {
    let g = a.adjoint() * a.clone();
    match hermitian_eig(&g, tol) {
        Ok(e) => {
            let smax = e.max().max(0.0).sqrt();
            let cut = tol.rank_threshold * smax.max(1.0);
            e.values.iter().filter(|&&l| l.max(0.0).sqrt() > cut).count()
        }
        Err(_) => a.rows().min(a.cols()),
    }
}

/// Orthonormal basis of `{v : A v = 0}` using `kernel_threshold`.
pub fn kernel(a: &ComplexMatrix, tol: &Tolerances) -> Result<Vec<Vec<C64>>> {
    Ok(svd(a)?.kernel(tol.kernel_threshold))
}

/// Principal square root of a PSD matrix. Eigenvalues in `[-10·atol, 0)` are clamped.
pub fn matrix_sqrt_psd(a: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let e = hermitian_eig(a, tol)?;
    if e.min() < -10.0 * tol.atol_equality {
        return Err(Error::NotPsd { min_eigenvalue: e.min() });
    }
    let noise = 1e-14 * e.max().abs().max(1.0);
    Ok(e.map_spectrum(|x| if x <= noise { 0.0 } else { x.sqrt() }))
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(a: &ComplexMatrix, tol: &Tolerances) -> Result<f64> {
    Ok(hermitian_eig(a, tol)?.min())
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn max_eigenvalue(a: &ComplexMatrix, tol: &Tolerances) -> Result<f64> {
    Ok(hermitian_eig(a, tol)?.max())
}

/// Unitary polar factor `M (M^dag M)^{-1/2}` of an invertible square matrix.
pub fn polar_unitary(m: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let g = (m.adjoint() * m.clone()).hermitian_part();
    let e = hermitian_eig(&g, tol)?;
    let floor = tol.rank_threshold * e.max().max(1.0);
    if e.min() <= floor * floor {
        return Err(Error::NotFullRank { min_eigenvalue: e.min() });
    }
    Ok(m.clone() * e.map_spectrum(|x| 1.0 / x.sqrt()))
}

pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthonormalises `candidate` against `basis` (modified Gram–Schmidt, two passes).
/// Returns `None` when the residual norm falls below `min_residual`.
pub fn orthonormal_complement(basis: &[Vec<C64>], candidate: &[C64], min_residual: f64) -> Option<Vec<C64>> {
    let mut w = candidate.to_vec();
    for _ in 0..2 {
        for b in basis {
            let proj = inner(b, &w);
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= proj * bi;
            }
        }
    }
    let n = norm(&w);
    if n < min_residual {
        return None;
    }
    Some(w.into_iter().map(|z| z / n).collect())
}

/// Orthonormal basis of the column span, keeping columns whose residual exceeds `min_residual`.
pub fn column_basis(a: &ComplexMatrix, min_residual: f64) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for j in 0..a.cols() {
        if let Some(v) = orthonormal_complement(&basis, &a.col(j), min_residual) {
            basis.push(v);
        }
    }
    basis
}

/// Projector onto the support (range) of a Hermitian PSD matrix.
pub fn support_projector(a: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let e = hermitian_eig(a, tol)?;
    let cut = tol.rank_threshold * e.max().abs().max(1.0);
    let keep: Vec<usize> = (0..e.values.len()).filter(|&k| e.values[k] > cut).collect();
    Ok(e.projector(&keep))
}

/// Stacks vectors as the columns of a matrix of height `n`.
pub fn stack_columns(n: usize, vectors: &[Vec<C64>]) -> ComplexMatrix {
    if vectors.is_empty() {
        return ComplexMatrix::zeros(n, 0);
    }
    ComplexMatrix::from_columns(n, vectors)
}

/// `Σ_k |v_k><v_k|` for orthonormal `v_k`.
pub fn span_projector(n: usize, vectors: &[Vec<C64>]) -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(n, n);
    for v in vectors {
        p += &ComplexMatrix::projector(v);
    }
    p
}

pub fn zero_vec(n: usize) -> Vec<C64> {
    vec![ZERO; n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::{c, r, ONE};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn partial_trace_of_product() {
        let rho = ComplexMatrix::from_rows(&[vec![r(0.7), c(0.1, 0.2)], vec![c(0.1, -0.2), r(0.3)]]);
        let xi = ComplexMatrix::diag(&[0.2, 0.5, 0.3]);
        let joint = rho.kron(&xi);
        let a = partial_trace(&joint, (2, 3), Subsystem::Second).unwrap();
        assert!(a.distance(&rho) < 1e-15);
        let b = partial_trace(&joint, (2, 3), Subsystem::First).unwrap();
        assert!(b.distance(&xi) < 1e-15);
    }

    #[test]
    fn partial_trace_of_bell_state() {
        let h = 0.5f64.sqrt();
        let psi = vec![r(h), ZERO, ZERO, r(h)];
        let reduced = partial_trace(&ComplexMatrix::projector(&psi), (2, 2), Subsystem::Second).unwrap();
        assert!(reduced.distance(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_wrong_shape() {
        assert!(partial_trace(&ComplexMatrix::identity(5), (2, 2), Subsystem::First).is_err());
    }

    #[test]
    fn ranks() {
        assert_eq!(numerical_rank(&ComplexMatrix::zeros(3, 3), &tol()), 0);
        let e_plus = ComplexMatrix::diag(&[0.0, 0.5, 1.0]);
        assert_eq!(numerical_rank(&e_plus, &tol()), 2);
        let wide = ComplexMatrix::from_rows(&[vec![ONE, ONE, ONE]]);
        assert_eq!(numerical_rank(&wide, &tol()), 1);
    }

    #[test]
    fn sqrt_examples() {
        let p = ComplexMatrix::projector(&[r(0.6), c(0.0, 0.8)]);
        assert!(matrix_sqrt_psd(&p, &tol()).unwrap().distance(&p) < 1e-12);
        let d = ComplexMatrix::diag(&[0.75, 0.25]);
        let s = matrix_sqrt_psd(&d, &tol()).unwrap();
        assert!(s.distance(&ComplexMatrix::diag(&[0.75f64.sqrt(), 0.5])) < 1e-14);
        assert!(matches!(matrix_sqrt_psd(&ComplexMatrix::diag(&[1.0, -0.1]), &tol()), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn polar_of_scaled_unitary() {
        let u = ComplexMatrix::from_rows(&[vec![ZERO, c(0.0, 1.0)], vec![ONE, ZERO]]);
        let m = u.clone() * ComplexMatrix::diag(&[2.0, 0.5]);
        let w = polar_unitary(&m, &tol()).unwrap();
        assert!(w.distance(&u) < 1e-12);
    }
}
