//! Rank-based third-law constraints on channels and measurement schemes,
//! full-rank fixed states, and the purification protocol that becomes
//! available once an unconstrained channel is allowed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, kernel, numerical_rank, svd, ComplexMatrix, Tolerances, C64};
use crate::qm::{Channel, MeasurementScheme, State};

const CESARO_DOUBLINGS: u32 = 20;
const CESARO_TARGET: f64 = 1e-10;
const CESARO_ACCEPT: f64 = 1e-8;
pub const PURIFICATION_DEPTH_CAP: u32 = 12;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThirdLawVerdict {
    pub constrained: bool,
    /// Image of the complete mixture when constrained; otherwise a
    /// non-full-rank state that exhibits the violation.
    #[serde(skip)]
    pub witness: Option<State>,
    pub min_output_eigenvalue: f64,
    pub output_rank: usize,
    pub dim_out: usize,
    pub reason: String,
}

/// Decides the constraint from the image of the complete mixture.
pub fn check_channel_thirdlaw(phi: &Channel, tol: &Tolerances) -> ThirdLawVerdict {
    let d_in = phi.dim_in();
    let mixture = State::maximally_mixed(d_in);
    let out = match phi.apply(mixture.matrix()) {
        Ok(o) => o.hermitian_part(),
        Err(e) => {
            return ThirdLawVerdict {
                constrained: false,
                witness: None,
                min_output_eigenvalue: f64::NAN,
                output_rank: 0,
                dim_out: phi.dim_out(),
                reason: e.to_string(),
            }
        }
    };
    let rank = numerical_rank(&out, tol);
    let min_eig = hermitian_eig(&out, tol).map(|e| e.min()).unwrap_or(f64::NAN);
    let constrained = rank == phi.dim_out();
    ThirdLawVerdict {
        constrained,
        witness: Some(State::new_unchecked(out)),
        min_output_eigenvalue: min_eig,
        output_rank: rank,
        dim_out: phi.dim_out(),
        reason: if constrained {
            "complete mixture is mapped to a full-rank state".into()
        } else {
            format!("complete mixture is mapped to a state of rank {rank} < {}", phi.dim_out())
        },
    }
}

/// `Φ*(A^dag A) = 0 ⟹ A = 0`, decided through the complete-mixture image.
pub fn check_faithfulness(phi: &Channel, tol: &Tolerances) -> bool {
    check_channel_thirdlaw(phi, tol).constrained
}

/// Independent route for faithfulness of the dual map.
///
/// Builds `M_ab = tr[Φ*(|a><b|)]` from the dual superoperator acting on
/// matrix units. The quadratic form `A ↦ tr[Φ*(A^dag A)]` is then
/// `Σ_ab conj(A_ca) A_cb M_ab` summed over `c`, so it vanishes on some
/// `A ≠ 0` exactly when `M` fails to be positive definite.
pub fn check_faithfulness_dual(phi: &Channel, tol: &Tolerances) -> bool {
    let d_out = phi.dim_out();
    let d_in = phi.dim_in();
    let dual = phi.dual_superoperator();
    let mut m = ComplexMatrix::zeros(d_out, d_out);
    for a in 0..d_out {
        for b in 0..d_out {
            let unit = ComplexMatrix::unit(d_out, a, b).vectorize();
            let img = ComplexMatrix::unvectorize(d_in, d_in, &dual.mat_vec(&unit));
            m[(a, b)] = img.trace();
        }
    }
    let m = m.transpose().hermitian_part();
    match hermitian_eig(&m, tol) {
        Ok(e) => e.min() > tol.rank_threshold * e.max().max(1.0),
        Err(_) => false,
    }
}

#[derive(Debug, Clone)]
pub struct FixedStateResult {
    pub rho0: State,
    pub residual: f64,
    pub is_full_rank: bool,
    /// Number of averaged terms when the iteration stopped.
    pub terms: u64,
}

/// Cesàro average of the iterates of `Φ` applied to the complete mixture.
///
/// Uses the doubling recurrence `a_{2N} = (a_N + S^N a_N)/2` on the state
/// vector and squares `S^N` between rounds.
pub fn full_rank_fixed_state(phi: &Channel, tol: &Tolerances) -> Result<FixedStateResult> {
    if !phi.is_endomorphic() {
        return Err(Error::NotEndomorphic { dim_in: phi.dim_in(), dim_out: phi.dim_out() });
    }
    let d = phi.dim_in();
    let s = phi.superoperator().clone();
    let mut a = State::maximally_mixed(d).matrix().vectorize();
    let mut power = s.clone();
    let mut terms: u64 = 1;
    let mut residual = state_residual(&s, &a);
    for _ in 0..CESARO_DOUBLINGS {
        if residual < CESARO_TARGET {
            break;
        }
        let shifted = power.mat_vec(&a);
        a = a.iter().zip(&shifted).map(|(x, y)| (x + y) * 0.5).collect();
        power = power.matmul(&power);
        terms *= 2;
        residual = state_residual(&s, &a);
    }
    if residual >= CESARO_TARGET {
        if let Some(p) = fixed_projection(&s, tol) {
            let projected = p.mat_vec(&a);
            let r = state_residual(&s, &projected);
            if r < residual {
                a = projected;
                residual = r;
            }
        }
    }
    if residual >= CESARO_ACCEPT {
        return Err(Error::NoConvergence { routine: "full_rank_fixed_state", budget: 1 << CESARO_DOUBLINGS });
    }
    let rho = ComplexMatrix::unvectorize(d, d, &a).hermitian_part();
    let tr = rho.trace().re;
    let rho = rho.scale_real(1.0 / tr);
    let is_full_rank = numerical_rank(&rho, tol) == d;
    Ok(FixedStateResult { rho0: State::new_unchecked(rho), residual, is_full_rank, terms })
}

fn state_residual(s: &ComplexMatrix, a: &[C64]) -> f64 {
    s.mat_vec(a).iter().zip(a).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Spectral projection onto `ker(S − 1)` along `ran(S − 1)`: `R (L^dag R)^{-1} L^dag`.
///
/// Leaves every Cesàro average's limit unchanged and removes its `O(1/N)` tail.
fn fixed_projection(s: &ComplexMatrix, tol: &Tolerances) -> Option<ComplexMatrix> {
    let n = s.rows();
    let shifted = s.clone() - ComplexMatrix::identity(n);
    let right = kernel(&shifted, tol).ok()?;
    let left = kernel(&shifted.adjoint(), tol).ok()?;
    if right.is_empty() || right.len() != left.len() {
        return None;
    }
    let r = ComplexMatrix::from_columns(n, &right);
    let l = ComplexMatrix::from_columns(n, &left);
    let gram = l.adjoint() * r.clone();
    let inv = invert(&gram)?;
    Some(r * inv * l.adjoint())
}

/// Inverse through the SVD; `None` when numerically singular.
fn invert(m: &ComplexMatrix) -> Option<ComplexMatrix> {
    let s = svd(m).ok()?;
    let smax = s.max();
    if s.sigma.iter().any(|&v| v <= 1e-10 * smax.max(1.0)) {
        return None;
    }
    let sinv = ComplexMatrix::diag(&s.sigma.iter().map(|v| 1.0 / v).collect::<Vec<_>>());
    Some(s.v.clone() * sinv * s.u.adjoint())
}

/// Superoperator of `lim (1/N) Σ_{n=1}^N S^n` by doubling.
pub fn cesaro_average(s: &ComplexMatrix) -> Result<ComplexMatrix> {
    let mut avg = s.clone();
    let mut power = s.clone();
    for _ in 0..CESARO_DOUBLINGS {
        let r = (s.matmul(&avg) - avg.clone()).frobenius_norm();
        if r < CESARO_TARGET {
            return Ok(avg);
        }
        avg = (avg.clone() + power.matmul(&avg)).scale_real(0.5);
        power = power.matmul(&power);
    }
    let mut r = (s.matmul(&avg) - avg.clone()).frobenius_norm();
    if let Some(p) = fixed_projection(s, &Tolerances::default()) {
        let projected = p.matmul(&avg);
        let rp = (s.matmul(&projected) - projected.clone()).frobenius_norm();
        if rp < r {
            avg = projected;
            r = rp;
        }
    }
    if r < CESARO_ACCEPT {
        Ok(avg)
    } else {
        Err(Error::NoConvergence { routine: "cesaro_average", budget: 1 << CESARO_DOUBLINGS })
    }
}

/// `λ` with `ρ ⩾ λσ`: the smallest eigenvalue of a full-rank `ρ`.
pub fn lemma1_lambda(rho: &State, sigma: &State, tol: &Tolerances) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!("states on C^{} and C^{}", rho.dim(), sigma.dim())));
    }
    let e = hermitian_eig(rho.matrix(), tol)?;
    if numerical_rank(rho.matrix(), tol) < rho.dim() {
        return Err(Error::NotFullRank { min_eigenvalue: e.min() });
    }
    Ok(e.min())
}

/// Constrained iff `ξ` is full rank and the interaction is constrained.
pub fn check_scheme_thirdlaw(m: &MeasurementScheme, tol: &Tolerances) -> ThirdLawVerdict {
    let xi = m.xi();
    let xi_rank = xi.rank(tol);
    if xi_rank < xi.dim() {
        return ThirdLawVerdict {
            constrained: false,
            witness: Some(xi.clone()),
            min_output_eigenvalue: xi.min_eigenvalue(tol),
            output_rank: xi_rank,
            dim_out: xi.dim(),
            reason: format!("ancilla state has rank {xi_rank} < {}", xi.dim()),
        };
    }
    let mut v = check_channel_thirdlaw(m.interaction(), tol);
    v.reason = format!("ancilla state is full rank; interaction: {}", v.reason);
    v
}

/// Smallest `D ≤ 12` with `rank^D · n ≤ m^D`.
pub fn minimal_purification_depth(n: usize, m: usize, rank: usize) -> Result<u32> {
    let infeasible = Error::InfeasibleDimensions { n, m, rank, cap: PURIFICATION_DEPTH_CAP };
    for d in 1..=PURIFICATION_DEPTH_CAP {
        let lhs = (rank as u128).checked_pow(d).and_then(|v| v.checked_mul(n as u128));
        let rhs = (m as u128).checked_pow(d);
        if let (Some(l), Some(r)) = (lhs, rhs) {
            if l <= r {
                return Ok(d);
            }
        }
    }
    Err(infeasible)
}

#[derive(Debug, Clone)]
pub struct PurificationResult {
    pub depth: u32,
    /// Restriction to the system after the permutation; `|0><0|` in the
    /// eigenbasis of `ρ0`.
    pub restricted: State,
    pub output: State,
    pub fidelity: f64,
    /// Joint diagonal weight left outside the `n = 0` slice.
    pub leaked_weight: f64,
}

/// Prepares `target` from a known full-rank `ρ0` using copies of a
/// non-full-rank `ξ` and a permutation of the joint eigenbasis.
pub fn purify_via_unconstrained(
    rho0: &State,
    xi: &State,
    target: &State,
    tol: &Tolerances,
) -> Result<PurificationResult> {
    let n = rho0.dim();
    let m = xi.dim();
    if target.dim() != n {
        return Err(Error::DimensionMismatch(format!("target on C^{}, system is C^{n}", target.dim())));
    }
    let rho_eig = hermitian_eig(rho0.matrix(), tol)?;
    if numerical_rank(rho0.matrix(), tol) < n {
        return Err(Error::NotFullRank { min_eigenvalue: rho_eig.min() });
    }
    let xi_eig = hermitian_eig(xi.matrix(), tol)?;
    let rank = numerical_rank(xi.matrix(), tol);
    let depth = minimal_purification_depth(n, m, rank)?;

    let p: Vec<f64> = xi_eig.values.iter().enumerate().map(|(k, &v)| if k < rank { v } else { 0.0 }).collect();
    let reduced = permuted_reduction(&rho_eig.values, &p, depth);
    let leaked_weight: f64 = reduced[1..].iter().sum();

    let basis = &rho_eig.vectors;
    let restricted = basis.clone() * ComplexMatrix::diag(&reduced) * basis.adjoint();
    let e0 = basis.col(0);
    let output = lambda_channel(&restricted, &e0, target.matrix());
    let fidelity = uhlmann_fidelity(&output, target.matrix(), tol)?;
    Ok(PurificationResult {
        depth,
        restricted: State::new_unchecked(restricted),
        output: State::new_unchecked(output),
        fidelity,
        leaked_weight,
    })
}

/// Diagonal of the system marginal after sending every nonzero product
/// weight `λ_n p_{m1} ⋯ p_{mD}` into the `n = 0` slice, in lexicographic order.
fn permuted_reduction(lambda: &[f64], p: &[f64], depth: u32) -> Vec<f64> {
    let n = lambda.len();
    let m = p.len();
    let slice = m.pow(depth);
    let mut out = vec![0.0; n];
    let support: Vec<usize> = (0..m).filter(|&k| p[k] > 0.0).collect();
    let mut filled = 0usize;
    let mut tuple = vec![0usize; depth as usize];
    for &ln in lambda {
        loop {
            let w: f64 = ln * tuple.iter().map(|&i| p[support[i]]).product::<f64>();
            let target_n = filled / slice;
            out[target_n] += w;
            filled += 1;
            if !advance(&mut tuple, support.len()) {
                break;
            }
        }
    }
    out
}

fn advance(tuple: &mut [usize], base: usize) -> bool {
    for digit in tuple.iter_mut().rev() {
        *digit += 1;
        if *digit < base {
            return true;
        }
        *digit = 0;
    }
    false
}

/// `Λ(X) = <e0|X|e0> σ + tr[(1 − |e0><e0|) X] 1/N`.
pub fn lambda_channel(x: &ComplexMatrix, e0: &[C64], sigma: &ComplexMatrix) -> ComplexMatrix {
    let n = x.rows();
    let p0 = ComplexMatrix::projector(e0);
    let w0 = (p0.clone() * x).trace().re;
    let rest = x.trace().re - w0;
    sigma.scale_real(w0) + ComplexMatrix::identity(n).scale_real(rest / n as f64)
}

/// Uhlmann fidelity `(tr √(√σ ρ √σ))²`.
pub fn uhlmann_fidelity(rho: &ComplexMatrix, sigma: &ComplexMatrix, tol: &Tolerances) -> Result<f64> {
    let rs = crate::linalg::matrix_sqrt_psd(&sigma.hermitian_part(), tol)?;
    let inner = (rs.clone() * rho * &rs).hermitian_part();
    let e = hermitian_eig(&inner, tol)?;
    let t: f64 = e.values.iter().map(|&v| v.max(0.0).sqrt()).sum();
    Ok(t * t)
}

/// Dense permutation unitary on `C^N ⊗ (C^M)^{⊗D}` in the product
/// eigenbasis, for small total dimension. Mirrors [`permuted_reduction`].
pub fn purification_permutation(n: usize, p: &[f64], depth: u32) -> Vec<usize> {
    let m = p.len();
    let slice = m.pow(depth);
    let total = n * slice;
    let support: Vec<usize> = (0..m).filter(|&k| p[k] > 0.0).collect();
    let mut perm = vec![usize::MAX; total];
    let mut used = vec![false; total];
    let mut filled = 0usize;
    for ni in 0..n {
        let mut tuple = vec![0usize; depth as usize];
        loop {
            let src = tuple.iter().fold(ni, |acc, &i| acc * m + support[i]);
            perm[src] = filled;
            used[filled] = true;
            filled += 1;
            if !advance(&mut tuple, support.len()) {
                break;
            }
        }
    }
    let mut free = (0..total).filter(|&k| !used[k]);
    for slot in perm.iter_mut() {
        if *slot == usize::MAX {
            *slot = free.next().expect("permutation is a bijection");
        }
    }
    perm
}
