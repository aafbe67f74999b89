use crate::error::{Error, Result};
use crate::linalg::{partial_trace, ComplexMatrix, Subsystem, Tolerances};

use super::instrument::Instrument;
use super::observable::Observable;
use super::operation::{Channel, Operation};
use super::state::State;

/// `(H_A, ξ, 𝓔, Z)`: ancilla state, interaction on system ⊗ ancilla, pointer.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementScheme {
    system_dim: usize,
    ancilla_dim: usize,
    xi: State,
    interaction: Channel,
    pointer: Observable,
}

impl MeasurementScheme {
    pub fn new(system_dim: usize, xi: State, interaction: Channel, pointer: Observable) -> Result<Self> {
        let ancilla_dim = xi.dim();
        let n = system_dim * ancilla_dim;
        if interaction.dim_in() != n || interaction.dim_out() != n {
            return Err(Error::DimensionMismatch(format!(
                "interaction is {}->{}, expected {n}->{n}",
                interaction.dim_in(),
                interaction.dim_out()
            )));
        }
        if pointer.dim() != ancilla_dim {
            return Err(Error::DimensionMismatch(format!(
                "pointer acts on C^{}, ancilla is C^{ancilla_dim}",
                pointer.dim()
            )));
        }
        Ok(Self { system_dim, ancilla_dim, xi, interaction, pointer })
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn ancilla_dim(&self) -> usize {
        self.ancilla_dim
    }

    pub fn xi(&self) -> &State {
        &self.xi
    }

    pub fn interaction(&self) -> &Channel {
        &self.interaction
    }

    pub fn pointer(&self) -> &Observable {
        &self.pointer
    }

    pub fn with_xi(&self, xi: State) -> Result<Self> {
        Self::new(self.system_dim, xi, self.interaction.clone(), self.pointer.clone())
    }

    fn dims(&self) -> (usize, usize) {
        (self.system_dim, self.ancilla_dim)
    }

    /// `ρ ↦ tr_A[(1 ⊗ Z_x) 𝓔(ρ ⊗ ξ)]` for outcome `x`, as a Choi matrix.
    fn outcome_choi(&self, x: usize) -> Result<ComplexMatrix> {
        let d = self.system_dim;
        let gate = ComplexMatrix::identity(d).kron(self.pointer.effect(x));
        let mut choi = ComplexMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let input = ComplexMatrix::unit(d, i, j).kron(self.xi.matrix());
                let out = gate.clone() * self.interaction.apply(&input)?;
                let block = partial_trace(&out, self.dims(), Subsystem::Second)?;
                for o in 0..d {
                    for p in 0..d {
                        choi[(i * d + o, j * d + p)] = block[(o, p)];
                    }
                }
            }
        }
        Ok(choi.hermitian_part())
    }

    /// Instrument implemented by the scheme, each operation in minimal Kraus form.
    pub fn to_instrument(&self, tol: &Tolerances) -> Result<Instrument> {
        let d = self.system_dim;
        let ops = (0..self.pointer.len())
            .map(|x| Operation::from_choi(&self.outcome_choi(x)?, d, d, tol))
            .collect::<Result<Vec<_>>>()?;
        Instrument::new_unchecked(self.pointer.labels().to_vec(), ops)
    }

    /// `𝓔*(A ⊗ Z_x)`.
    pub fn dual_on_pointer(&self, a: &ComplexMatrix, x: usize) -> Result<ComplexMatrix> {
        self.interaction.apply_dual(&a.kron(self.pointer.effect(x)))
    }

    /// `I_x*(A) = Γ_ξ(𝓔*(A ⊗ Z_x))` computed through the restriction map.
    pub fn instrument_dual(&self, a: &ComplexMatrix, x: usize) -> Result<ComplexMatrix> {
        restriction(&self.dual_on_pointer(a, x)?, &self.xi, self.system_dim)
    }
}

/// `Γ_ξ(B) = tr_A[B (1 ⊗ ξ)]`, so that `tr[Γ_ξ(B) ρ] = tr[B (ρ ⊗ ξ)]`.
pub fn restriction(b: &ComplexMatrix, xi: &State, system_dim: usize) -> Result<ComplexMatrix> {
    let da = xi.dim();
    let weighted = b.clone() * ComplexMatrix::identity(system_dim).kron(xi.matrix());
    partial_trace(&weighted, (system_dim, da), Subsystem::Second)
}

/// Row-major superoperator of `Γ_ξ`, built column by column from matrix units.
pub fn restriction_superoperator(xi: &State, system_dim: usize) -> Result<ComplexMatrix> {
    let n = system_dim * xi.dim();
    let d = system_dim;
    let mut s = ComplexMatrix::zeros(d * d, n * n);
    for a in 0..n {
        for b in 0..n {
            let img = restriction(&ComplexMatrix::unit(n, a, b), xi, system_dim)?;
            let col = img.vectorize();
            for (row, v) in col.into_iter().enumerate() {
                s[(row, a * n + b)] = v;
            }
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, r};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn swap(d: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(d * d, d * d, |row, col| {
            let (i, j) = (col / d, col % d);
            if row == j * d + i {
                r(1.0)
            } else {
                r(0.0)
            }
        })
    }

    #[test]
    fn swap_scheme_is_measure_and_prepare() {
        let xi = State::diagonal(&[0.3, 0.7], &tol()).unwrap();
        let scheme = MeasurementScheme::new(
            2,
            xi.clone(),
            Channel::unitary(swap(2), &tol()).unwrap(),
            Observable::computational(2),
        )
        .unwrap();
        let inst = scheme.to_instrument(&tol()).unwrap();
        let expected = Instrument::trivial(&Observable::computational(2), &xi, &tol()).unwrap();
        assert!(inst.distance(&expected) < 1e-12);
    }

    #[test]
    fn restriction_duality() {
        let xi = State::diagonal(&[0.25, 0.75], &tol()).unwrap();
        let b = ComplexMatrix::from_fn(4, 4, |i, j| c((i * 4 + j) as f64 * 0.1, (i as f64) - (j as f64)));
        let rho = ComplexMatrix::from_rows(&[vec![r(0.6), c(0.1, 0.1)], vec![c(0.1, -0.1), r(0.4)]]);
        let lhs = (restriction(&b, &xi, 2).unwrap() * rho.clone()).trace();
        let rhs = (b.clone() * rho.kron(xi.matrix())).trace();
        assert!((lhs - rhs).norm() < 1e-13);
        let s = restriction_superoperator(&xi, 2).unwrap();
        let via_s = ComplexMatrix::unvectorize(2, 2, &s.mat_vec(&b.vectorize()));
        assert!(via_s.distance(&restriction(&b, &xi, 2).unwrap()) < 1e-14);
    }
}
