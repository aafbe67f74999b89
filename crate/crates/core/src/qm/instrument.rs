use crate::error::{Error, Result};
use crate::linalg::{matrix_sqrt_psd, ComplexMatrix, Tolerances};

use super::observable::Observable;
use super::operation::{Channel, Operation};
use super::state::State;

/// Outcome-indexed family of operations on `C^dim` summing to a channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Instrument {
    labels: Vec<String>,
    operations: Vec<Operation>,
}

impl Instrument {
    pub fn new(labels: Vec<String>, operations: Vec<Operation>, tol: &Tolerances) -> Result<Self> {
        let inst = Self::new_unchecked(labels, operations)?;
        inst.total_channel(tol)?;
        inst.induced_observable(tol)?;
        Ok(inst)
    }

    /// Checks shapes and label counts only.
    pub fn new_unchecked(labels: Vec<String>, operations: Vec<Operation>) -> Result<Self> {
        let first =
            operations.first().ok_or_else(|| Error::DimensionMismatch("instrument has no operations".into()))?;
        let d = first.dim_in();
        if labels.len() != operations.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} operations",
                labels.len(),
                operations.len()
            )));
        }
        for op in &operations {
            if op.dim_in() != d || op.dim_out() != d {
                return Err(Error::NotEndomorphic { dim_in: op.dim_in(), dim_out: op.dim_out() });
            }
        }
        Ok(Self { labels, operations })
    }

    pub fn from_operations(operations: Vec<Operation>, tol: &Tolerances) -> Result<Self> {
        let labels = (0..operations.len()).map(|x| x.to_string()).collect();
        Self::new(labels, operations, tol)
    }

    /// `I_x(ρ) = √E_x ρ √E_x`.
    pub fn luders(e: &Observable, tol: &Tolerances) -> Result<Self> {
        let d = e.dim();
        let ops = e
            .effects()
            .iter()
            .map(|ex| Operation::from_kraus(d, d, vec![matrix_sqrt_psd(ex, tol)?]))
            .collect::<Result<Vec<_>>>()?;
        Self::new_unchecked(e.labels().to_vec(), ops)
    }

    /// Measure-and-prepare instrument `I_x(ρ) = tr[E_x ρ] ξ`.
    pub fn trivial(e: &Observable, xi: &State, tol: &Tolerances) -> Result<Self> {
        Self::measure_and_prepare(e, &vec![xi.clone(); e.len()], tol)
    }

    /// `I_x(ρ) = tr[E_x ρ] σ_x` with Kraus operators `√s_k |s_k><j| √E_x`.
    pub fn measure_and_prepare(e: &Observable, posts: &[State], tol: &Tolerances) -> Result<Self> {
        if posts.len() != e.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} post-measurement states for {} outcomes",
                posts.len(),
                e.len()
            )));
        }
        let d = e.dim();
        let mut ops = Vec::with_capacity(e.len());
        for (ex, sigma) in e.effects().iter().zip(posts) {
            if sigma.dim() != d {
                return Err(Error::DimensionMismatch("post-measurement state has the wrong dimension".into()));
            }
            let root = matrix_sqrt_psd(ex, tol)?;
            let spec = crate::linalg::hermitian_eig(sigma.matrix(), tol)?;
            let mut kraus = Vec::new();
            for (k, &lam) in spec.values.iter().enumerate() {
                if lam <= tol.kernel_threshold {
                    continue;
                }
                let s = spec.vector(k);
                for j in 0..d {
                    let bra = ComplexMatrix::basis_vector(d, j);
                    kraus.push(ComplexMatrix::outer(&s, &bra).scale_real(lam.sqrt()) * &root);
                }
            }
            ops.push(Operation::from_kraus(d, d, kraus)?.minimal(tol)?);
        }
        Self::new_unchecked(e.labels().to_vec(), ops)
    }

    pub fn dim(&self) -> usize {
        self.operations[0].dim_in()
    }

    pub fn len(&self) -> usize {
        self.operations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operations.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn operations(&self) -> &[Operation] {
        &self.operations
    }

    pub fn operation(&self, x: usize) -> &Operation {
        &self.operations[x]
    }

    /// `E_x = I_x*(1)`.
    pub fn induced_observable(&self, tol: &Tolerances) -> Result<Observable> {
        let effects = self.operations.iter().map(|op| op.kraus_sum().hermitian_part()).collect();
        Observable::new(self.labels.clone(), effects, tol)
    }

    /// The non-selective channel `I_X = Σ_x I_x`.
    pub fn total_channel(&self, tol: &Tolerances) -> Result<Channel> {
        Channel::from_operation(Operation::sum(&self.operations)?, tol)
    }

    /// Row-major superoperator of `I_X`.
    pub fn total_superoperator(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut s = ComplexMatrix::zeros(d * d, d * d);
        for op in &self.operations {
            s += op.superoperator();
        }
        s
    }

    /// `I_X*(A)`.
    pub fn total_dual(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        let mut out = ComplexMatrix::zeros(self.dim(), self.dim());
        for op in &self.operations {
            out += &op.apply_dual(a)?;
        }
        Ok(out)
    }

    /// Largest outcome-wise superoperator distance; infinite when shapes differ.
    pub fn distance(&self, other: &Instrument) -> f64 {
        if self.len() != other.len() || self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.operations.iter().zip(&other.operations).map(|(a, b)| a.distance(b)).fold(0.0, f64::max)
    }

    /// Same instrument with each operation in minimal Kraus form.
    pub fn minimal(&self, tol: &Tolerances) -> Result<Self> {
        let ops = self.operations.iter().map(|op| op.minimal(tol)).collect::<Result<Vec<_>>>()?;
        Self::new_unchecked(self.labels.clone(), ops)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{r, ZERO};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn luders_of_sharp_is_projective() {
        let e = Observable::computational(2);
        let inst = Instrument::luders(&e, &tol()).unwrap();
        let rho = ComplexMatrix::from_rows(&[vec![r(0.5), r(0.5)], vec![r(0.5), r(0.5)]]);
        let out = inst.operation(0).apply(&rho).unwrap();
        assert!(out.distance(&ComplexMatrix::diag(&[0.5, 0.0])) < 1e-14);
    }

    #[test]
    fn luders_unsharp_diagonal_arithmetic() {
        let e = Observable::from_effects(
            vec![ComplexMatrix::diag(&[0.75, 0.25]), ComplexMatrix::diag(&[0.25, 0.75])],
            &tol(),
        )
        .unwrap();
        let inst = Instrument::luders(&e, &tol()).unwrap();
        let out = inst.operation(0).apply(&ComplexMatrix::identity(2).scale_real(0.5)).unwrap();
        assert!(out.distance(&ComplexMatrix::diag(&[0.375, 0.125])) < 1e-14);
        assert!(inst.induced_observable(&tol()).unwrap().distance(&e) < 1e-12);
    }

    #[test]
    fn trivial_instrument_prepares_xi() {
        let e = Observable::computational(2);
        let xi = State::diagonal(&[0.3, 0.7], &tol()).unwrap();
        let inst = Instrument::trivial(&e, &xi, &tol()).unwrap();
        let rho = ComplexMatrix::from_rows(&[vec![r(0.4), ZERO], vec![ZERO, r(0.6)]]);
        let out = inst.operation(1).apply(&rho).unwrap();
        assert!(out.distance(&ComplexMatrix::diag(&[0.18, 0.42])) < 1e-12);
    }
}
