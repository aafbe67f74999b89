//! Fixed points of the dual measurement channel and their decomposition
//! into type-I factors `⊕_α L(K_α) ⊗ 1_{R_α}`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::ops::{inner, orthonormal_complement, stack_columns};
use crate::linalg::{
    hermitian_eig, numerical_rank, partial_trace, polar_unitary, svd, ComplexMatrix, Subsystem, Tolerances, C64, I,
};
use crate::qm::{Instrument, Observable, State};
use crate::thirdlaw::full_rank_fixed_state;

const RESAMPLES: usize = 5;
const MEMBERSHIP_TOL: f64 = 1e-7;
const GENERATOR_CUT: f64 = 1e-6;
const CANONICAL_RESIDUAL: f64 = 1e-3;

/// HS-orthonormal basis of Hermitian operators on `C^dim`.
#[derive(Debug, Clone)]
pub struct OperatorSubspace {
    pub dim: usize,
    pub basis: Vec<ComplexMatrix>,
}

impl OperatorSubspace {
    /// Orthonormalises the Hermitian and anti-Hermitian parts of `spanning`.
    pub fn from_spanning(dim: usize, spanning: &[ComplexMatrix]) -> Self {
        let mut flat: Vec<Vec<C64>> = Vec::new();
        for a in spanning {
            let herm = a.hermitian_part();
            let anti = (a.clone() - a.adjoint()).scale(C64::new(0.0, -0.5));
            for h in [herm, anti] {
                // Real Gram–Schmidt: Hermitian matrices have real HS products.
                let mut w = h.vectorize();
                for _ in 0..2 {
                    for b in &flat {
                        let proj = inner(b, &w).re;
                        for (wi, bi) in w.iter_mut().zip(b) {
                            *wi -= bi * proj;
                        }
                    }
                }
                let n = crate::linalg::ops::norm(&w);
                if n > GENERATOR_CUT {
                    flat.push(w.into_iter().map(|z| z / n).collect());
                }
            }
        }
        let basis = flat.into_iter().map(|v| ComplexMatrix::unvectorize(dim, dim, &v).hermitian_part()).collect();
        Self { dim, basis }
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// Orthogonal projection onto the span.
    pub fn project(&self, a: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for b in &self.basis {
            out += &b.scale(b.hs_inner(a));
        }
        out
    }

    /// `‖A − P(A)‖_HS`.
    pub fn residual(&self, a: &ComplexMatrix) -> f64 {
        a.distance(&self.project(a))
    }

    /// Largest membership residual of either basis in the other span.
    pub fn distance(&self, other: &OperatorSubspace) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        let one = self.basis.iter().map(|b| other.residual(b)).fold(0.0, f64::max);
        let two = other.basis.iter().map(|b| self.residual(b)).fold(0.0, f64::max);
        if self.len() != other.len() {
            return one.max(two).max(1.0);
        }
        one.max(two)
    }

    /// Largest commutator norm between basis elements.
    pub fn max_internal_commutator(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.basis.iter().enumerate() {
            for b in &self.basis[i + 1..] {
                worst = worst.max(a.commutator(b).frobenius_norm());
            }
        }
        worst
    }

    /// Largest commutator norm with the effects of `e`.
    pub fn max_commutator_with(&self, e: &Observable) -> f64 {
        let mut worst: f64 = 0.0;
        for b in &self.basis {
            for ex in e.effects() {
                worst = worst.max(b.commutator(ex).frobenius_norm());
            }
        }
        worst
    }
}

/// `F(I_X*) = {A : I_X*(A) = A}` from the kernel of the dual superoperator minus identity.
pub fn fixed_point_space(inst: &Instrument, tol: &Tolerances) -> Result<OperatorSubspace> {
    let d = inst.dim();
    let dual = inst.total_superoperator().adjoint();
    let shifted = dual - ComplexMatrix::identity(d * d);
    let kernel = svd(&shifted)?.kernel(tol.kernel_threshold);
    let spanning: Vec<ComplexMatrix> = kernel.iter().map(|v| ComplexMatrix::unvectorize(d, d, v)).collect();
    let space = OperatorSubspace::from_spanning(d, &spanning);
    Ok(space)
}

/// Worst residual among the algebra axioms (identity, adjoints, products).
pub fn algebra_defect(v: &OperatorSubspace) -> f64 {
    let d = v.dim;
    let mut worst = v.residual(&ComplexMatrix::identity(d)) / (d as f64).sqrt();
    for (i, a) in v.basis.iter().enumerate() {
        worst = worst.max(v.residual(&a.adjoint()));
        for b in &v.basis[i..] {
            worst = worst.max(v.residual(&(a.clone() * b)));
            worst = worst.max(v.residual(&(b.clone() * a)));
        }
    }
    worst
}

pub fn verify_algebra(v: &OperatorSubspace, _tol: &Tolerances) -> bool {
    !v.is_empty() && algebra_defect(v) < MEMBERSHIP_TOL
}

#[derive(Debug, Clone)]
pub struct FactorBlock {
    /// Central projection `P_α`.
    pub projection: ComplexMatrix,
    pub dim_k: usize,
    pub dim_r: usize,
    /// Isometry `C^{dimK·dimR} → C^d` onto `P_α H`; its adjoint is the
    /// unitary from `P_α H` to `K_α ⊗ R_α` (K index major).
    pub factorizer: ComplexMatrix,
    pub omega: State,
}

impl FactorBlock {
    /// `F (A ⊗ B) F^dag`.
    pub fn embed(&self, k_part: &ComplexMatrix, r_part: &ComplexMatrix) -> ComplexMatrix {
        self.factorizer.clone() * k_part.kron(r_part) * self.factorizer.adjoint()
    }

    /// `F^dag X F` on `K_α ⊗ R_α`.
    pub fn compress(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.factorizer.adjoint() * x * &self.factorizer
    }
}

#[derive(Debug, Clone)]
pub struct FactorDecomposition {
    pub dim: usize,
    pub blocks: Vec<FactorBlock>,
}

impl FactorDecomposition {
    /// Span of `⊕_α L(K_α) ⊗ 1_{R_α}`.
    pub fn reconstructed_space(&self) -> OperatorSubspace {
        let mut spanning = Vec::new();
        for b in &self.blocks {
            let id_r = ComplexMatrix::identity(b.dim_r);
            for i in 0..b.dim_k {
                for j in 0..b.dim_k {
                    spanning.push(b.embed(&ComplexMatrix::unit(b.dim_k, i, j), &id_r));
                }
            }
        }
        OperatorSubspace::from_spanning(self.dim, &spanning)
    }

    /// Worst violation of `Σ P_α = 1` and `P_α P_β = δ P_α`.
    pub fn projection_defect(&self) -> f64 {
        let d = self.dim;
        let mut sum = ComplexMatrix::zeros(d, d);
        let mut worst: f64 = 0.0;
        for (a, pa) in self.blocks.iter().enumerate() {
            sum += &pa.projection;
            for (b, pb) in self.blocks.iter().enumerate() {
                let prod = pa.projection.clone() * &pb.projection;
                let target = if a == b { pa.projection.clone() } else { ComplexMatrix::zeros(d, d) };
                worst = worst.max(prod.distance(&target));
            }
        }
        worst.max(sum.distance(&ComplexMatrix::identity(d)))
    }

    pub fn shape(&self) -> Vec<(usize, usize)> {
        self.blocks.iter().map(|b| (b.dim_k, b.dim_r)).collect()
    }
}

/// Decomposes a verified algebra. `averaged_state` is the Cesàro-averaged
/// channel applied to the complete mixture; it supplies the block states.
pub fn decompose<R: Rng + ?Sized>(
    v: &OperatorSubspace,
    averaged_state: &ComplexMatrix,
    tol: &Tolerances,
    rng: &mut R,
) -> Result<FactorDecomposition> {
    let defect = algebra_defect(v);
    if v.is_empty() || defect >= MEMBERSHIP_TOL {
        return Err(Error::NotAnAlgebra(format!("closure defect {defect:.3e}")));
    }
    let d = v.dim;
    let center = center_basis(v, tol)?;
    let projections = central_projections(&center, d, tol, rng)?;

    let mut blocks = Vec::with_capacity(projections.len());
    for p in projections {
        blocks.push(factor_block(v, p, averaged_state, tol, rng)?);
    }
    Ok(FactorDecomposition { dim: d, blocks })
}

/// Fixed-point space, algebra check and decomposition in one call.
pub fn decompose_instrument<R: Rng + ?Sized>(
    inst: &Instrument,
    tol: &Tolerances,
    rng: &mut R,
) -> Result<(OperatorSubspace, FactorDecomposition)> {
    let v = fixed_point_space(inst, tol)?;
    let avg = full_rank_fixed_state(&inst.total_channel(tol)?, tol)?;
    let f = decompose(&v, avg.rho0.matrix(), tol, rng)?;
    Ok((v, f))
}

/// Hermitian basis of the center `{C ∈ V : [C, B] = 0 ∀ B ∈ V}`.
fn center_basis(v: &OperatorSubspace, tol: &Tolerances) -> Result<Vec<ComplexMatrix>> {
    let k = v.len();
    let d = v.dim;
    // Real coefficients c with Σ_k c_k i[B_k, B_i] = 0; entries split into re/im rows.
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for bi in &v.basis {
        let images: Vec<Vec<C64>> = v.basis.iter().map(|bk| bk.commutator(bi).scale(I).vectorize()).collect();
        for e in 0..d * d {
            rows.push(images.iter().map(|img| C64::new(img[e].re, 0.0)).collect());
            rows.push(images.iter().map(|img| C64::new(img[e].im, 0.0)).collect());
        }
    }
    let m = ComplexMatrix::from_rows(&rows);
    let kernel =
        if k == 1 { vec![vec![C64::new(1.0, 0.0)]] } else { svd(&m)?.kernel(tol.kernel_threshold.max(1e-9) * 10.0) };
    Ok(kernel
        .into_iter()
        .map(|c| {
            let mut z = ComplexMatrix::zeros(d, d);
            for (ck, bk) in c.iter().zip(&v.basis) {
                z += &bk.scale_real(ck.re);
            }
            z.hermitian_part()
        })
        .collect())
}

fn first_significant_index(p: &ComplexMatrix) -> usize {
    (0..p.rows()).find(|&i| p[(i, i)].re > 1e-6).unwrap_or(p.rows())
}

fn central_projections<R: Rng + ?Sized>(
    center: &[ComplexMatrix],
    d: usize,
    tol: &Tolerances,
    rng: &mut R,
) -> Result<Vec<ComplexMatrix>> {
    let z = center.len();
    if z == 1 {
        return Ok(vec![ComplexMatrix::identity(d)]);
    }
    for _ in 0..RESAMPLES {
        let mut c = ComplexMatrix::zeros(d, d);
        for zi in center {
            c += &zi.scale_real(rng.gen_range(-1.0..1.0));
        }
        let spec = hermitian_eig(&c.hermitian_part(), tol)?;
        let clusters = spec.clusters(tol.cluster_gap);
        if clusters.len() != z {
            continue;
        }
        let mut ps: Vec<ComplexMatrix> = clusters.iter().map(|cl| spec.projector(cl)).collect();
        ps.sort_by_key(first_significant_index);
        return Ok(ps);
    }
    Err(Error::DegenerateCenter(format!("{z} central projections")))
}

fn factor_block<R: Rng + ?Sized>(
    v: &OperatorSubspace,
    p: ComplexMatrix,
    averaged_state: &ComplexMatrix,
    tol: &Tolerances,
    rng: &mut R,
) -> Result<FactorBlock> {
    let d = v.dim;
    let rank = numerical_rank(&p, tol);
    let compressed: Vec<ComplexMatrix> = v.basis.iter().map(|b| (p.clone() * b * &p).hermitian_part()).collect();
    let vectors: Vec<Vec<C64>> = compressed.iter().map(|m| m.vectorize()).collect();
    let block_dim = numerical_rank(&stack_columns(d * d, &vectors), tol);
    let dim_k = (block_dim as f64).sqrt().round() as usize;
    if dim_k == 0 || dim_k * dim_k != block_dim || !rank.is_multiple_of(dim_k) {
        return Err(Error::NotAnAlgebra(format!(
            "block of rank {rank} carries a {block_dim}-dimensional algebra, not a full matrix factor"
        )));
    }
    let dim_r = rank / dim_k;

    for _ in 0..RESAMPLES {
        let x = random_combination(&compressed, rng);
        let spec = hermitian_eig(&x, tol)?;
        // Drop the kernel of P_α: eigenvectors outside its range.
        let inside: Vec<usize> = (0..d)
            .filter(|&k| {
                let vk = spec.vector(k);
                inner(&vk, &p.mat_vec(&vk)).re > 0.5
            })
            .collect();
        let values: Vec<f64> = inside.iter().map(|&k| spec.values[k]).collect();
        let groups = group_sorted(&values, tol.cluster_gap);
        if groups.len() != dim_k || groups.iter().any(|g| g.len() != dim_r) {
            continue;
        }
        let q: Vec<ComplexMatrix> =
            groups.iter().map(|g| spec.projector(&g.iter().map(|&i| inside[i]).collect::<Vec<_>>())).collect();
        let mut q = q;
        q.sort_by_key(first_significant_index);

        let b = canonical_basis(&q[0], dim_r);
        if b.len() != dim_r {
            continue;
        }
        let b_mat = stack_columns(d, &b);
        let y = random_combination(&compressed, rng);
        let mut columns: Vec<Vec<C64>> = b.clone();
        let mut ok = true;
        for qi in &q[1..] {
            let ci = stack_columns(d, &canonical_basis(qi, dim_r));
            if ci.cols() != dim_r {
                ok = false;
                break;
            }
            let mi = b_mat.adjoint() * &y * &ci;
            let ui = match polar_unitary(&mi, tol) {
                Ok(u) => u,
                Err(_) => {
                    ok = false;
                    break;
                }
            };
            let image = ci * ui.adjoint();
            for j in 0..dim_r {
                columns.push(image.col(j));
            }
        }
        if !ok {
            continue;
        }
        let factorizer = stack_columns(d, &columns);
        let local = factorizer.adjoint() * averaged_state * &factorizer;
        let reduced = partial_trace(&local.hermitian_part(), (dim_k, dim_r), Subsystem::First)?;
        let tr = reduced.trace().re;
        let omega = if tr > 0.0 { reduced.scale_real(1.0 / tr) } else { reduced };
        return Ok(FactorBlock { projection: p, dim_k, dim_r, factorizer, omega: State::new_unchecked(omega) });
    }
    Err(Error::DegenerateCenter(format!("minimal projections of a {dim_k}x{dim_k} factor")))
}

fn random_combination<R: Rng + ?Sized>(ms: &[ComplexMatrix], rng: &mut R) -> ComplexMatrix {
    let d = ms[0].rows();
    let mut x = ComplexMatrix::zeros(d, d);
    for m in ms {
        x += &m.scale_real(rng.gen_range(-1.0..1.0));
    }
    x.hermitian_part()
}

fn group_sorted(values: &[f64], gap: f64) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (k, &v) in values.iter().enumerate() {
        match out.last_mut() {
            Some(last) if (values[*last.last().unwrap()] - v).abs() <= gap => last.push(k),
            _ => out.push(vec![k]),
        }
    }
    out
}

/// Gram–Schmidt of the projected standard basis, in index order, with the
/// first significant entry of each vector made real and positive.
fn canonical_basis(q: &ComplexMatrix, count: usize) -> Vec<Vec<C64>> {
    let d = q.rows();
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for i in 0..d {
        if basis.len() == count {
            break;
        }
        let cand = q.col(i);
        if let Some(mut v) = orthonormal_complement(&basis, &cand, CANONICAL_RESIDUAL) {
            if let Some(lead) = v.iter().copied().find(|z| z.norm() > 1e-6) {
                let phase = lead.conj() / lead.norm();
                v.iter_mut().for_each(|z| *z *= phase);
            }
            basis.push(v);
        }
    }
    basis
}

/// `E_x = ⊕_α 1_{K_α} ⊗ E_{x,α}`.
#[derive(Debug, Clone)]
pub struct EffectBlockDecomposition {
    /// `blocks[x][α]`.
    pub blocks: Vec<Vec<ComplexMatrix>>,
    pub residual: f64,
}

impl EffectBlockDecomposition {
    /// Smallest and largest eigenvalue over all blocks.
    pub fn spectral_range(&self, tol: &Tolerances) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for m in self.blocks.iter().flatten() {
            if let Ok(e) = hermitian_eig(m, tol) {
                lo = lo.min(e.min());
                hi = hi.max(e.max());
            }
        }
        (lo, hi)
    }
}

pub fn effect_blocks(e: &Observable, f: &FactorDecomposition, tol: &Tolerances) -> Result<EffectBlockDecomposition> {
    if e.dim() != f.dim {
        return Err(Error::DimensionMismatch(format!("observable on C^{}, decomposition on C^{}", e.dim(), f.dim)));
    }
    let _ = tol;
    let mut blocks = Vec::with_capacity(e.len());
    let mut residual: f64 = 0.0;
    for ex in e.effects() {
        let mut per_block = Vec::with_capacity(f.blocks.len());
        let mut rebuilt = ComplexMatrix::zeros(f.dim, f.dim);
        for b in &f.blocks {
            let local = b.compress(ex);
            let exa = partial_trace(&local, (b.dim_k, b.dim_r), Subsystem::First)?.scale_real(1.0 / b.dim_k as f64);
            rebuilt += &b.embed(&ComplexMatrix::identity(b.dim_k), &exa);
            per_block.push(exa.hermitian_part());
        }
        residual = residual.max(rebuilt.distance(ex));
        blocks.push(per_block);
    }
    if residual > 1e-6 {
        return Err(Error::DecompositionMismatch { residual });
    }
    Ok(EffectBlockDecomposition { blocks, residual })
}
