use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, numerical_rank, ComplexMatrix, Tolerances, C64};

/// Density operator on `C^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    matrix: ComplexMatrix,
}

impl State {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidState(format!("{}x{} matrix is not square", matrix.rows(), matrix.cols())));
        }
        let tr = matrix.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > tol.atol_equality.max(1e-12) * matrix.rows() as f64 {
            return Err(Error::InvalidState(format!("trace is {:.12} rather than 1", tr.re)));
        }
        let e = hermitian_eig(&matrix, tol).map_err(|_| {
            Error::InvalidState(format!("matrix is not Hermitian (defect {:.3e})", matrix.hermiticity_defect()))
        })?;
        if e.min() < -tol.atol_equality {
            return Err(Error::NotPsd { min_eigenvalue: e.min() });
        }
        Ok(Self { matrix: matrix.hermitian_part() })
    }

    /// Skips validation; the caller guarantees the density-operator invariants.
    pub fn new_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64) }
    }

    /// Normalises `psi` and returns `|psi><psi|`.
    pub fn pure(psi: &[C64]) -> Self {
        let n: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let v: Vec<C64> = psi.iter().map(|z| z / n).collect();
        Self { matrix: ComplexMatrix::projector(&v) }
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        Self { matrix: ComplexMatrix::unit(dim, i, i) }
    }

    pub fn diagonal(p: &[f64], tol: &Tolerances) -> Result<Self> {
        Self::new(ComplexMatrix::diag(p), tol)
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn rank(&self, tol: &Tolerances) -> usize {
        numerical_rank(&self.matrix, tol)
    }

    pub fn is_full_rank(&self, tol: &Tolerances) -> bool {
        self.rank(tol) == self.dim()
    }

    pub fn min_eigenvalue(&self, tol: &Tolerances) -> f64 {
        hermitian_eig(&self.matrix, tol).map(|e| e.min()).unwrap_or(f64::NAN)
    }

    pub fn tensor(&self, other: &State) -> State {
        State { matrix: self.matrix.kron(&other.matrix) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, r};

    #[test]
    fn rejects_bad_trace_and_negativity() {
        let tol = Tolerances::default();
        assert!(State::new(ComplexMatrix::diag(&[0.5, 0.6]), &tol).is_err());
        assert!(matches!(State::new(ComplexMatrix::diag(&[1.2, -0.2]), &tol), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn pure_state_has_rank_one() {
        let tol = Tolerances::default();
        let s = State::pure(&[r(1.0), c(0.0, 1.0)]);
        assert_eq!(s.rank(&tol), 1);
        assert!(State::maximally_mixed(3).is_full_rank(&tol));
    }
}
