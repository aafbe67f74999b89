use std::ops::Deref;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, ComplexMatrix, Tolerances, ZERO};

/// Completely positive, trace non-increasing map given by Kraus operators.
///
/// The superoperator is derived lazily and cached; concurrent first use is
/// safe because every thread computes the same value.
#[derive(Debug, Clone)]
pub struct Operation {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
    superop: OnceLock<ComplexMatrix>,
}

impl PartialEq for Operation {
    fn eq(&self, other: &Self) -> bool {
        self.dim_in == other.dim_in && self.dim_out == other.dim_out && self.kraus == other.kraus
    }
}

impl Operation {
    pub fn new(dim_in: usize, dim_out: usize, kraus: Vec<ComplexMatrix>, tol: &Tolerances) -> Result<Self> {
        let op = Self::from_kraus(dim_in, dim_out, kraus)?;
        let lmax = hermitian_eig(&op.kraus_sum(), tol)?.max();
        if lmax > 1.0 + tol.atol_equality {
            return Err(Error::TraceIncreasing { max_eigenvalue: lmax });
        }
        Ok(op)
    }

    /// Checks shapes only.
    pub fn from_kraus(dim_in: usize, dim_out: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        for (k, op) in kraus.iter().enumerate() {
            if op.rows() != dim_out || op.cols() != dim_in {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator {k} is {}x{}, expected {dim_out}x{dim_in}",
                    op.rows(),
                    op.cols()
                )));
            }
        }
        let kraus = if kraus.is_empty() { vec![ComplexMatrix::zeros(dim_out, dim_in)] } else { kraus };
        Ok(Self { dim_in, dim_out, kraus, superop: OnceLock::new() })
    }

    /// Minimal Kraus form recovered from a Choi matrix `Σ |i><j| ⊗ Φ(|i><j|)`.
    ///
    /// Choi eigenvalues below `kernel_threshold × λ_max` are discarded.
    pub fn from_choi(choi: &ComplexMatrix, dim_in: usize, dim_out: usize, tol: &Tolerances) -> Result<Self> {
        let n = dim_in * dim_out;
        if choi.rows() != n || choi.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix for {dim_in}->{dim_out} must be {n}x{n}, got {}x{}",
                choi.rows(),
                choi.cols()
            )));
        }
        let e = hermitian_eig(choi, tol)?;
        if e.min() < -10.0 * tol.atol_equality * e.max().max(1.0) {
            return Err(Error::NotCp { min_eigenvalue: e.min() });
        }
        let cut = tol.kernel_threshold * e.max().max(0.0);
        let mut kraus = Vec::new();
        for (k, &lam) in e.values.iter().enumerate() {
            if lam <= cut || lam <= 0.0 {
                continue;
            }
            let v = e.vector(k);
            let s = lam.sqrt();
            kraus.push(ComplexMatrix::from_fn(dim_out, dim_in, |o, i| v[i * dim_out + o] * s));
        }
        Self::from_kraus(dim_in, dim_out, kraus)
    }

    /// Builds the map from its row-major superoperator via the Choi matrix.
    pub fn from_superoperator(s: &ComplexMatrix, dim_in: usize, dim_out: usize, tol: &Tolerances) -> Result<Self> {
        Self::from_choi(&superop_to_choi(s, dim_in, dim_out)?, dim_in, dim_out, tol)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn is_endomorphic(&self) -> bool {
        self.dim_in == self.dim_out
    }

    /// `Σ K^dag K`, equal to the dual applied to the identity.
    pub fn kraus_sum(&self) -> ComplexMatrix {
        let mut s = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            s += &(k.adjoint() * k.clone());
        }
        s
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.rows() != self.dim_in || rho.cols() != self.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "input is {}x{}, operation expects {}x{}",
                rho.rows(),
                rho.cols(),
                self.dim_in,
                self.dim_in
            )));
        }
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += &(k.clone() * rho * k.adjoint());
        }
        Ok(out)
    }

    /// Heisenberg-picture map `A ↦ Σ K^dag A K`.
    pub fn apply_dual(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        if a.rows() != self.dim_out || a.cols() != self.dim_out {
            return Err(Error::DimensionMismatch(format!(
                "operator is {}x{}, dual expects {}x{}",
                a.rows(),
                a.cols(),
                self.dim_out,
                self.dim_out
            )));
        }
        let mut out = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            out += &(k.adjoint() * a * k.clone());
        }
        Ok(out)
    }

    /// Row-major superoperator `Σ K ⊗ conj(K)`, cached.
    pub fn superoperator(&self) -> &ComplexMatrix {
        self.superop.get_or_init(|| {
            let mut s = ComplexMatrix::zeros(self.dim_out * self.dim_out, self.dim_in * self.dim_in);
            for k in &self.kraus {
                s += &k.kron(&k.conj());
            }
            s
        })
    }

    /// Superoperator of the Heisenberg-picture map.
    pub fn dual_superoperator(&self) -> ComplexMatrix {
        self.superoperator().adjoint()
    }

    pub fn choi(&self) -> ComplexMatrix {
        let n = self.dim_in * self.dim_out;
        let mut c = ComplexMatrix::zeros(n, n);
        for k in &self.kraus {
            let w: Vec<_> = (0..n).map(|idx| k[(idx % self.dim_out, idx / self.dim_out)]).collect();
            c += &ComplexMatrix::projector(&w);
        }
        c
    }

    /// Equivalent operation with the minimal number of Kraus operators.
    pub fn minimal(&self, tol: &Tolerances) -> Result<Self> {
        Self::from_choi(&self.choi(), self.dim_in, self.dim_out, tol)
    }

    pub fn kraus_rank(&self, tol: &Tolerances) -> Result<usize> {
        Ok(self.minimal(tol)?.kraus.len())
    }

    /// Frobenius distance between superoperators.
    pub fn distance(&self, other: &Operation) -> f64 {
        if self.dim_in != other.dim_in || self.dim_out != other.dim_out {
            return f64::INFINITY;
        }
        self.superoperator().distance(other.superoperator())
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &Operation) -> Result<Operation> {
        if first.dim_out != self.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose {}->{} after {}->{}",
                self.dim_in, self.dim_out, first.dim_in, first.dim_out
            )));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * first.kraus.len());
        for a in &self.kraus {
            for b in &first.kraus {
                kraus.push(a.clone() * b);
            }
        }
        Self::from_kraus(first.dim_in, self.dim_out, kraus)
    }

    /// `self ⊗ other` acting on the tensor product of inputs.
    pub fn tensor(&self, other: &Operation) -> Operation {
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(a.kron(b));
            }
        }
        Self::from_kraus(self.dim_in * other.dim_in, self.dim_out * other.dim_out, kraus)
            .expect("tensor product shapes are consistent")
    }

    pub fn scaled(&self, p: f64) -> Operation {
        let s = p.max(0.0).sqrt();
        let kraus = self.kraus.iter().map(|k| k.scale_real(s)).collect();
        Self::from_kraus(self.dim_in, self.dim_out, kraus).expect("shapes unchanged")
    }

    /// Sum of operations with equal shapes (Kraus union).
    pub fn sum(ops: &[Operation]) -> Result<Operation> {
        let first = ops.first().ok_or_else(|| Error::DimensionMismatch("empty sum".into()))?;
        let mut kraus = Vec::new();
        for op in ops {
            if op.dim_in != first.dim_in || op.dim_out != first.dim_out {
                return Err(Error::DimensionMismatch("summands have different shapes".into()));
            }
            kraus.extend(op.kraus.iter().filter(|k| k.max_abs() > 0.0).cloned());
        }
        Self::from_kraus(first.dim_in, first.dim_out, kraus)
    }
}

/// Reshuffles a row-major superoperator into the Choi matrix.
pub fn superop_to_choi(s: &ComplexMatrix, dim_in: usize, dim_out: usize) -> Result<ComplexMatrix> {
    if s.rows() != dim_out * dim_out || s.cols() != dim_in * dim_in {
        return Err(Error::DimensionMismatch(format!(
            "superoperator for {dim_in}->{dim_out} must be {}x{}",
            dim_out * dim_out,
            dim_in * dim_in
        )));
    }
    let n = dim_in * dim_out;
    let mut c = ComplexMatrix::zeros(n, n);
    for i in 0..dim_in {
        for j in 0..dim_in {
            for o in 0..dim_out {
                for p in 0..dim_out {
                    c[(i * dim_out + o, j * dim_out + p)] = s[(o * dim_out + p, i * dim_in + j)];
                }
            }
        }
    }
    Ok(c)
}

/// Trace-preserving operation.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel(Operation);

impl Deref for Channel {
    type Target = Operation;
    fn deref(&self) -> &Operation {
        &self.0
    }
}

impl Channel {
    pub fn new(dim_in: usize, dim_out: usize, kraus: Vec<ComplexMatrix>, tol: &Tolerances) -> Result<Self> {
        Self::from_operation(Operation::from_kraus(dim_in, dim_out, kraus)?, tol)
    }

    pub fn from_operation(op: Operation, tol: &Tolerances) -> Result<Self> {
        let residual = op.kraus_sum().distance(&ComplexMatrix::identity(op.dim_in));
        if residual > tol.atol_equality * (op.dim_in as f64).sqrt().max(1.0) {
            return Err(Error::NotTracePreserving { residual });
        }
        Ok(Self(op))
    }

    pub fn from_choi(choi: &ComplexMatrix, dim_in: usize, dim_out: usize, tol: &Tolerances) -> Result<Self> {
        Self::from_operation(Operation::from_choi(choi, dim_in, dim_out, tol)?, tol)
    }

    pub fn new_unchecked(op: Operation) -> Self {
        Self(op)
    }

    pub fn identity(dim: usize) -> Self {
        Self(Operation::from_kraus(dim, dim, vec![ComplexMatrix::identity(dim)]).expect("square identity"))
    }

    /// `ρ ↦ U ρ U^dag`; `u` must be unitary.
    pub fn unitary(u: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let d = u.cols();
        Self::new(d, u.rows(), vec![u], tol)
    }

    /// Completely depolarising channel `ρ ↦ tr(ρ) 1/d`.
    pub fn depolarizing(dim: usize) -> Self {
        let s = 1.0 / (dim as f64).sqrt();
        let mut kraus = Vec::with_capacity(dim * dim);
        for a in 0..dim {
            for b in 0..dim {
                kraus.push(ComplexMatrix::unit(dim, a, b).scale_real(s));
            }
        }
        Self(Operation::from_kraus(dim, dim, kraus).expect("square units"))
    }

    /// `ρ ↦ tr(ρ) σ` from `C^dim_in` to the space of `sigma`.
    pub fn replacement(dim_in: usize, sigma: &ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let e = hermitian_eig(sigma, tol)?;
        let d_out = sigma.rows();
        let mut kraus = Vec::new();
        for (k, &lam) in e.values.iter().enumerate() {
            if lam <= 0.0 {
                continue;
            }
            let v = e.vector(k);
            for j in 0..dim_in {
                let mut m = ComplexMatrix::zeros(d_out, dim_in);
                for (o, vo) in v.iter().enumerate() {
                    m[(o, j)] = vo * lam.sqrt();
                }
                kraus.push(m);
            }
        }
        Self::new(dim_in, d_out, kraus, tol)
    }

    /// Partial trace `tr_2` over the second factor of `C^d1 ⊗ C^d2`.
    pub fn partial_trace_second(d1: usize, d2: usize) -> Self {
        let kraus = (0..d2)
            .map(|k| {
                ComplexMatrix::from_fn(d1, d1 * d2, |i, j| if j == i * d2 + k { crate::linalg::ONE } else { ZERO })
            })
            .collect();
        Self(Operation::from_kraus(d1 * d2, d1, kraus).expect("consistent shapes"))
    }

    /// `ρ ↦ ρ ⊗ ξ`.
    pub fn append_state(d: usize, xi: &ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let e = hermitian_eig(xi, tol)?;
        let da = xi.rows();
        let mut kraus = Vec::new();
        for (k, &lam) in e.values.iter().enumerate() {
            if lam <= 0.0 {
                continue;
            }
            let col = ComplexMatrix::column(&e.vector(k)).scale_real(lam.sqrt());
            kraus.push(ComplexMatrix::identity(d).kron(&col));
        }
        Self::new(d, d * da, kraus, tol)
    }

    /// `Φ₂ ∘ Φ₁`.
    pub fn compose(second: &Channel, first: &Channel) -> Result<Channel> {
        Ok(Channel(second.0.after(&first.0)?))
    }

    /// Convex combination `Σ p_k Φ_k`.
    pub fn mixture(weights: &[f64], channels: &[Channel]) -> Result<Channel> {
        if weights.len() != channels.len() || channels.is_empty() {
            return Err(Error::DimensionMismatch("weights and channels differ in length".into()));
        }
        let parts: Vec<Operation> = weights.iter().zip(channels).map(|(&p, ch)| ch.0.scaled(p)).collect();
        Ok(Channel(Operation::sum(&parts)?))
    }

    pub fn tensor(&self, other: &Channel) -> Channel {
        Channel(self.0.tensor(&other.0))
    }

    pub fn as_operation(&self) -> &Operation {
        &self.0
    }

    pub fn into_operation(self) -> Operation {
        self.0
    }

    pub fn minimal(&self, tol: &Tolerances) -> Result<Channel> {
        Ok(Channel(self.0.minimal(tol)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, r};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn identity_choi_is_twice_bell_projector() {
        let id = Channel::identity(2);
        let h = 0.5f64.sqrt();
        let bell = vec![r(h), ZERO, ZERO, r(h)];
        let expected = ComplexMatrix::projector(&bell).scale_real(2.0);
        assert!(id.choi().distance(&expected) < 1e-15);
        assert_eq!(id.kraus_rank(&tol()).unwrap(), 1);
    }

    #[test]
    fn depolarizing_maps_to_mixture() {
        let dep = Channel::depolarizing(3);
        let rho = ComplexMatrix::projector(&[r(0.6), c(0.0, 0.8), ZERO]);
        let out = dep.apply(&rho).unwrap();
        assert!(out.distance(&ComplexMatrix::identity(3).scale_real(1.0 / 3.0)) < 1e-14);
        assert_eq!(dep.kraus_rank(&tol()).unwrap(), 9);
    }

    #[test]
    fn superoperator_acts_like_kraus() {
        let k0 = ComplexMatrix::from_rows(&[vec![r(0.6), c(0.0, 0.3)], vec![ZERO, r(0.5)]]);
        let op = Operation::from_kraus(2, 2, vec![k0]).unwrap();
        let rho = ComplexMatrix::from_rows(&[vec![r(0.3), c(0.1, 0.2)], vec![c(0.1, -0.2), r(0.7)]]);
        let via_s = op.superoperator().mat_vec(&rho.vectorize());
        let direct = op.apply(&rho).unwrap();
        assert!(ComplexMatrix::unvectorize(2, 2, &via_s).distance(&direct) < 1e-15);
    }

    #[test]
    fn choi_round_trip() {
        let k0 = ComplexMatrix::from_rows(&[vec![r(0.6), c(0.0, 0.3)], vec![ZERO, r(0.5)], vec![r(0.1), ZERO]]);
        let k1 = ComplexMatrix::from_rows(&[vec![ZERO, r(0.2)], vec![c(0.3, 0.1), ZERO], vec![ZERO, r(0.4)]]);
        let op = Operation::from_kraus(2, 3, vec![k0, k1]).unwrap();
        let back = Operation::from_choi(&op.choi(), 2, 3, &tol()).unwrap();
        assert!(back.distance(&op) < 1e-12);
        let via_s = Operation::from_superoperator(op.superoperator(), 2, 3, &tol()).unwrap();
        assert!(via_s.distance(&op) < 1e-12);
    }

    #[test]
    fn compose_with_identity() {
        let dep = Channel::depolarizing(2);
        let both = Channel::compose(&Channel::identity(2), &dep).unwrap();
        assert!(both.distance(&dep) < 1e-15);
    }

    #[test]
    fn partial_trace_channel_matches_linalg() {
        let rho = ComplexMatrix::from_fn(6, 6, |i, j| c((i + j) as f64, i as f64 - j as f64));
        let tr = Channel::partial_trace_second(2, 3);
        let direct = crate::linalg::partial_trace(&rho, (2, 3), crate::linalg::Subsystem::Second).unwrap();
        assert!(tr.apply(&rho).unwrap().distance(&direct) < 1e-12);
    }

    #[test]
    fn rejects_non_trace_preserving() {
        let k = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(matches!(Channel::new(2, 2, vec![k], &tol()), Err(Error::NotTracePreserving { .. })));
    }
}
