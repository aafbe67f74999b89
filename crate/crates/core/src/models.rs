//! Worked models and seeded random generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::classify::classify;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, matrix_sqrt_psd, r, ComplexMatrix, Tolerances, C64, ONE, ZERO};
use crate::properties::Verdict;
use crate::qm::{Channel, Instrument, MeasurementScheme, Observable, Operation, State};

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|x| x.to_string()).collect()
}

fn ket(d: usize, i: usize) -> Vec<C64> {
    ComplexMatrix::basis_vector(d, i)
}

fn plus() -> Vec<C64> {
    let h = 0.5f64.sqrt();
    vec![r(h), r(h)]
}

fn minus() -> Vec<C64> {
    let h = 0.5f64.sqrt();
    vec![r(h), r(-h)]
}

/// Kraus operators of `ρ ↦ tr[ρ G] |s><s|`.
fn measure_prepare_kraus(g: &ComplexMatrix, s: &[C64], tol: &Tolerances) -> Result<Vec<ComplexMatrix>> {
    let root = matrix_sqrt_psd(g, tol)?;
    let d = g.rows();
    Ok((0..d).map(|j| ComplexMatrix::outer(s, &ket(d, j)) * &root).collect())
}

/// Unitary `Σ_{ij} |j,i><i,j|` exchanging two `d`-level factors.
pub fn swap_unitary(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d * d, d * d, |row, col| if row == (col % d) * d + col / d { ONE } else { ZERO })
}

pub struct NonDisturbanceModel {
    pub e: Observable,
    pub f: Observable,
    pub instrument: Instrument,
}

/// Two-qubit E-instrument that leaves the statistics of a non-commuting F intact.
pub fn build_nondisturbance_example(tol: &Tolerances) -> Result<NonDisturbanceModel> {
    let p0 = ComplexMatrix::unit(2, 0, 0);
    let p1 = ComplexMatrix::unit(2, 1, 1);
    let a0 = p0.clone();
    let a1 = p0.scale_real(0.5);
    let a2 = p1.scale_real(0.5);
    let a3 = ComplexMatrix::projector(&plus()).scale_real(0.5);
    let a4 = ComplexMatrix::projector(&minus()).scale_real(0.5);
    let a5 = p1.clone();

    let e0 = a0.kron(&p0) + (a2.clone() + &a4).kron(&p1);
    let e1 = (a1.clone() + &a3).kron(&p1) + a5.kron(&p0);
    let f0 = a0.kron(&p0) + (a1.clone() + &a4).kron(&p1);
    let f1 = (a2.clone() + &a3).kron(&p1) + a5.kron(&p0);

    let s00 = ket(4, 0);
    let s10 = ket(4, 2);
    let mut k0 = measure_prepare_kraus(&(a0.kron(&p0) + a4.kron(&p1)), &s00, tol)?;
    k0.extend(measure_prepare_kraus(&a2.kron(&p1), &s10, tol)?);
    let mut k1 = measure_prepare_kraus(&(a5.kron(&p0) + a3.kron(&p1)), &s10, tol)?;
    k1.extend(measure_prepare_kraus(&a1.kron(&p1), &s00, tol)?);
    let ops = vec![Operation::from_kraus(4, 4, k0)?.minimal(tol)?, Operation::from_kraus(4, 4, k1)?.minimal(tol)?];

    Ok(NonDisturbanceModel {
        e: Observable::from_effects(vec![e0, e1], tol)?,
        f: Observable::from_effects(vec![f0, f1], tol)?,
        instrument: Instrument::new(labels(2), ops, tol)?,
    })
}

/// Interaction with Kraus operators `K_x = Σ_a √E_{x⊕a} ⊗ |x⊕a><a|` on
/// system ⊗ `C^N`, built for any observable.
pub fn luders_interaction(e: &Observable, tol: &Tolerances) -> Result<Channel> {
    let n = e.len();
    let d = e.dim();
    let roots = e.effects().iter().map(|ex| matrix_sqrt_psd(ex, tol)).collect::<Result<Vec<_>>>()?;
    let mut kraus = Vec::with_capacity(n);
    for x in 0..n {
        let mut k = ComplexMatrix::zeros(d * n, d * n);
        for a in 0..n {
            let b = (x + a) % n;
            k += &roots[b].kron(&ComplexMatrix::unit(n, b, a));
        }
        kraus.push(k);
    }
    Channel::new(d * n, d * n, kraus, tol)
}

/// Scheme implementing the Lüders instrument of a completely unsharp observable.
pub fn build_luders_scheme(e: &Observable, tol: &Tolerances) -> Result<MeasurementScheme> {
    if !classify(e, tol).is_completely_unsharp {
        return Err(Error::NotCompletelyUnsharp);
    }
    let n = e.len();
    MeasurementScheme::new(
        e.dim(),
        State::maximally_mixed(n),
        luders_interaction(e, tol)?,
        Observable::computational(n),
    )
}

/// Controlled shift `U = Σ |n><n| ⊗ |m⊕n><m|` with ancilla state `diag(q)`.
pub fn build_firstkind_shift_model(n: usize, q: &[f64], tol: &Tolerances) -> Result<MeasurementScheme> {
    if n < 2 {
        return Err(Error::BadDistribution(format!("need at least two levels, got {n}")));
    }
    if q.len() != n {
        return Err(Error::BadDistribution(format!("{} weights for {n} levels", q.len())));
    }
    if q.iter().any(|&v| v.is_nan() || v <= 0.0) {
        return Err(Error::BadDistribution("weights must be strictly positive".into()));
    }
    let total: f64 = q.iter().sum();
    if (total - 1.0).abs() > tol.atol_equality {
        return Err(Error::BadDistribution(format!("weights sum to {total}")));
    }
    let mut u = ComplexMatrix::zeros(n * n, n * n);
    for s in 0..n {
        for m in 0..n {
            u[(s * n + (m + s) % n, s * n + m)] = ONE;
        }
    }
    MeasurementScheme::new(n, State::diagonal(q, tol)?, Channel::unitary(u, tol)?, Observable::computational(n))
}

/// Effects `E_x = Σ_n q(x⊖n) |n><n|` measured by the shift model.
pub fn shift_model_effects(q: &[f64]) -> Vec<ComplexMatrix> {
    let n = q.len();
    (0..n).map(|x| ComplexMatrix::diag(&(0..n).map(|s| q[(x + n - s) % n]).collect::<Vec<_>>())).collect()
}

/// Ideal but non-Lüders measurement of `E_± = |±1><±1| + ½|0><0|` on `C³`.
///
/// Basis order is `|−1>, |0>, |1>`.
pub fn build_ideality_example(tol: &Tolerances) -> Result<(Observable, Instrument)> {
    let (m1, z, p1) = (0, 1, 2);
    let ep = ComplexMatrix::unit(3, p1, p1) + ComplexMatrix::unit(3, z, z).scale_real(0.5);
    let em = ComplexMatrix::unit(3, m1, m1) + ComplexMatrix::unit(3, z, z).scale_real(0.5);
    let e = Observable::new(vec!["+".into(), "-".into()], vec![ep, em], tol)?;
    let spread = |top: usize| {
        let mut k = vec![ComplexMatrix::unit(3, top, top)];
        for t in 0..3 {
            k.push(ComplexMatrix::unit(3, t, z).scale_real(1.0 / 6f64.sqrt()));
        }
        k
    };
    let ops = vec![Operation::from_kraus(3, 3, spread(p1))?, Operation::from_kraus(3, 3, spread(m1))?];
    let inst = Instrument::new(vec!["+".into(), "-".into()], ops, tol)?;
    Ok((e, inst))
}

pub struct ExtremalModel {
    pub scheme: MeasurementScheme,
    /// Channel on `H1 ⊗ H2` with Kraus operators `V_f ⊗ |φ_f><x|`.
    pub phi: Channel,
    pub instrument: Instrument,
}

/// `V_0`, `V_1` of the extremal model.
pub fn extremal_v() -> [ComplexMatrix; 2] {
    let (a, b) = (0.5, 0.75f64.sqrt());
    [
        ComplexMatrix::from_real_rows(&[vec![a, 0.0], vec![0.0, b]]),
        ComplexMatrix::from_real_rows(&[vec![0.0, a], vec![b, 0.0]]),
    ]
}

/// Non-unitary scheme on `C² ⊗ C²` whose instrument is extremal while the
/// measured observable `1 ⊗ |x><x|` is sharp with effects of rank 2.
pub fn build_extremal_model(xi: &State, tol: &Tolerances) -> Result<ExtremalModel> {
    if xi.dim() != 2 {
        return Err(Error::DimensionMismatch("ancilla of the extremal model is a qubit".into()));
    }
    let v = extremal_v();
    let phis = [ket(2, 0), plus()];
    let mut kraus_phi = Vec::new();
    let mut ops = Vec::new();
    for x in 0..2 {
        let mut kx = Vec::new();
        for f in 0..2 {
            let k = v[f].kron(&ComplexMatrix::outer(&phis[f], &ket(2, x)));
            kraus_phi.push(k.clone());
            kx.push(k);
        }
        ops.push(Operation::from_kraus(4, 4, kx)?);
    }
    let phi = Channel::new(4, 4, kraus_phi, tol)?;
    let swap23 = Channel::unitary(ComplexMatrix::identity(2).kron(&swap_unitary(2)), tol)?;
    let e2 = phi.tensor(&Channel::identity(2));
    let interaction = Channel::compose(&e2, &swap23)?;
    let scheme = MeasurementScheme::new(4, xi.clone(), interaction, Observable::computational(2))?;
    let instrument = Instrument::new(labels(2), ops, tol)?;
    Ok(ExtremalModel { scheme, phi, instrument })
}

/// Ancilla state used by default for the extremal model.
pub fn default_extremal_xi(tol: &Tolerances) -> State {
    State::diagonal(&[0.7, 0.3], tol).expect("valid diagonal state")
}

/// Swap of `H2` and the ancilla `H3`; measures `1 ⊗ |x><x|` on `C² ⊗ C²`.
pub fn build_swap_nondisturbance_scheme(xi: &State, tol: &Tolerances) -> Result<MeasurementScheme> {
    if xi.dim() != 2 {
        return Err(Error::DimensionMismatch("ancilla of the swap scheme is a qubit".into()));
    }
    if !xi.is_full_rank(tol) {
        return Err(Error::NotFullRank { min_eigenvalue: xi.min_eigenvalue(tol) });
    }
    swap_nondisturbance_scheme_unchecked(xi, tol)
}

/// As [`build_swap_nondisturbance_scheme`] without the full-rank requirement.
pub fn swap_nondisturbance_scheme_unchecked(xi: &State, tol: &Tolerances) -> Result<MeasurementScheme> {
    let u = ComplexMatrix::identity(2).kron(&swap_unitary(2));
    MeasurementScheme::new(4, xi.clone(), Channel::unitary(u, tol)?, Observable::computational(2))
}

/// System and ancilla of equal dimension exchanged by a swap; the pointer
/// observable becomes the measured one.
pub fn build_trivial_swap_scheme(xi: &State, pointer: &Observable, tol: &Tolerances) -> Result<MeasurementScheme> {
    let d = xi.dim();
    MeasurementScheme::new(d, xi.clone(), Channel::unitary(swap_unitary(d), tol)?, pointer.clone())
}

/// `Φ(ρ) = tr[ρ P0] ρ0 + tr[ρ P0⊥] P1` on `C³` with `ρ0 = diag(1/2, 1/3, 1/6)`.
pub fn build_rank_one_image_channel(tol: &Tolerances) -> Result<Channel> {
    let rho0: [f64; 3] = [0.5, 1.0 / 3.0, 1.0 / 6.0];
    let mut kraus = Vec::new();
    for (k, &lam) in rho0.iter().enumerate() {
        kraus.push(ComplexMatrix::unit(3, k, 0).scale_real(lam.sqrt()));
    }
    for j in 1..3 {
        kraus.push(ComplexMatrix::unit(3, 1, j));
    }
    Channel::new(3, 3, kraus, tol)
}

/// Channel with a prescribed full-rank fixed state `γ`: `Φ = (1−p) id + p (ρ ↦ tr(ρ) γ)`.
pub fn build_gibbs_preserving_channel(gamma: &State, p: f64, tol: &Tolerances) -> Result<Channel> {
    let d = gamma.dim();
    Channel::mixture(&[1.0 - p, p], &[Channel::identity(d), Channel::replacement(d, gamma.matrix(), tol)?])
}

// ---------------------------------------------------------------------------
// Random generators
// ---------------------------------------------------------------------------

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    })
}

/// Unitary from Gram–Schmidt of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    loop {
        let g = ginibre(dim, dim, rng);
        let basis = crate::linalg::ops::column_basis(&g, 1e-6);
        if basis.len() == dim {
            return ComplexMatrix::from_columns(dim, &basis);
        }
    }
}

fn random_simplex<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| -rng.gen_range(1e-12f64..1.0).ln()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// `S^{-1/2} A_x S^{-1/2}` with `A_x = G_x G_x^dag` Ginibre.
fn ginibre_povm<R: Rng + ?Sized>(dim: usize, outcomes: usize, rng: &mut R, tol: &Tolerances) -> Vec<ComplexMatrix> {
    let a: Vec<ComplexMatrix> = (0..outcomes)
        .map(|_| {
            let g = ginibre(dim, dim, rng);
            g.clone() * g.adjoint()
        })
        .collect();
    let mut s = ComplexMatrix::zeros(dim, dim);
    for ax in &a {
        s += ax;
    }
    let inv_root = hermitian_eig(&s.hermitian_part(), tol).expect("Hermitian sum").map_spectrum(|v| 1.0 / v.sqrt());
    a.iter().map(|ax| (inv_root.clone() * ax * &inv_root).hermitian_part()).collect()
}

/// Targeted observable classes for the POVM generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PovmClass {
    Generic,
    Sharp,
    Norm1Unsharp,
    CompletelyUnsharp,
    SmallRank,
}

pub fn random_povm(dim: usize, outcomes: usize, seed: u64) -> Observable {
    random_povm_class(dim, outcomes, PovmClass::Generic, seed).expect("generic POVM always exists")
}

pub fn random_povm_class(dim: usize, outcomes: usize, class: PovmClass, seed: u64) -> Result<Observable> {
    let tol = Tolerances::default();
    let mut rng = rng(seed);
    random_povm_with(dim, outcomes, class, &mut rng, &tol)
}

pub fn random_povm_with<R: Rng + ?Sized>(
    dim: usize,
    outcomes: usize,
    class: PovmClass,
    rng: &mut R,
    tol: &Tolerances,
) -> Result<Observable> {
    if dim == 0 || outcomes == 0 {
        return Err(Error::DimensionMismatch("POVM needs positive dimension and outcome count".into()));
    }
    let effects = match class {
        PovmClass::Generic => ginibre_povm(dim, outcomes, rng, tol),
        PovmClass::CompletelyUnsharp => {
            let eps = 0.2;
            ginibre_povm(dim, outcomes, rng, tol)
                .into_iter()
                .map(|ex| {
                    let w = ex.trace().re / dim as f64;
                    ex.scale_real(1.0 - eps) + ComplexMatrix::identity(dim).scale_real(eps * w)
                })
                .collect()
        }
        PovmClass::Sharp => {
            if outcomes > dim {
                return Err(Error::DimensionMismatch(format!(
                    "{outcomes} orthogonal projections do not fit in C^{dim}"
                )));
            }
            let u = random_unitary(dim, rng);
            let mut owner: Vec<usize> =
                (0..dim).map(|i| if i < outcomes { i } else { rng.gen_range(0..outcomes) }).collect();
            owner.rotate_left(rng.gen_range(0..dim));
            (0..outcomes)
                .map(|x| {
                    let mut p = ComplexMatrix::zeros(dim, dim);
                    for (i, &o) in owner.iter().enumerate() {
                        if o == x {
                            p += &ComplexMatrix::projector(&u.col(i));
                        }
                    }
                    p
                })
                .collect()
        }
        PovmClass::Norm1Unsharp => {
            if outcomes >= dim {
                return Err(Error::DimensionMismatch(format!(
                    "norm-1 unsharp POVM with {outcomes} outcomes needs dim > {outcomes}"
                )));
            }
            let u = random_unitary(dim, rng);
            let mut effects: Vec<ComplexMatrix> = (0..outcomes).map(|x| ComplexMatrix::projector(&u.col(x))).collect();
            for k in outcomes..dim {
                let w = loop {
                    let w = random_simplex(outcomes, rng);
                    if w.iter().all(|&v| v > 0.05) || outcomes == 1 {
                        break w;
                    }
                };
                let pk = ComplexMatrix::projector(&u.col(k));
                for (ex, wx) in effects.iter_mut().zip(&w) {
                    *ex += &pk.scale_real(*wx);
                }
            }
            effects
        }
        PovmClass::SmallRank => {
            if outcomes < 2 || dim < 2 {
                return Err(Error::DimensionMismatch("small-rank POVM needs dim ≥ 2 and two outcomes".into()));
            }
            let psi = random_unitary(dim, rng).col(0);
            let s = rng.gen_range(0.3..1.0);
            let e0 = ComplexMatrix::projector(&psi).scale_real(s);
            let rest = matrix_sqrt_psd(&(ComplexMatrix::identity(dim) - e0.clone()), tol)?;
            let mut effects = vec![e0];
            for f in ginibre_povm(dim, outcomes - 1, rng, tol) {
                effects.push((rest.clone() * f * &rest).hermitian_part());
            }
            effects
        }
    };
    Observable::new(labels(outcomes), effects, tol)
}

/// Commutative observable `E_x = Σ_y p(x|y) P_y` in a random basis.
pub fn random_commutative_povm<R: Rng + ?Sized>(
    dim: usize,
    outcomes: usize,
    strictly_positive: bool,
    rng: &mut R,
    tol: &Tolerances,
) -> Result<(Observable, Vec<Vec<f64>>)> {
    let u = random_unitary(dim, rng);
    let cols: Vec<Vec<f64>> = (0..dim)
        .map(|_| loop {
            let w = random_simplex(outcomes, rng);
            if !strictly_positive || w.iter().all(|&v| v > 0.02) {
                break w;
            }
        })
        .collect();
    let effects = (0..outcomes)
        .map(|x| {
            let mut e = ComplexMatrix::zeros(dim, dim);
            for (y, col) in cols.iter().enumerate() {
                e += &ComplexMatrix::projector(&u.col(y)).scale_real(col[x]);
            }
            e
        })
        .collect();
    let p = (0..outcomes).map(|x| cols.iter().map(|c| c[x]).collect()).collect();
    Ok((Observable::new(labels(outcomes), effects, tol)?, p))
}

/// Stinespring construction: a random isometry `C^din → C^dout ⊗ C^k`.
/// `k` is raised to `⌈din/dout⌉` when smaller.
pub fn random_channel(dim_in: usize, dim_out: usize, kraus_count: usize, seed: u64) -> Channel {
    random_channel_with(dim_in, dim_out, kraus_count, &mut rng(seed), &Tolerances::default())
}

pub fn random_channel_with<R: Rng + ?Sized>(
    dim_in: usize,
    dim_out: usize,
    kraus_count: usize,
    rng: &mut R,
    tol: &Tolerances,
) -> Channel {
    let k = kraus_count.max(dim_in.div_ceil(dim_out)).max(1);
    let g = ginibre(dim_out * k, dim_in, rng);
    let gram = (g.adjoint() * g.clone()).hermitian_part();
    let inv_root = hermitian_eig(&gram, tol).expect("Hermitian Gram matrix").map_spectrum(|v| 1.0 / v.sqrt());
    let v = g * inv_root;
    let kraus = (0..k).map(|j| ComplexMatrix::from_fn(dim_out, dim_in, |o, i| v[(j * dim_out + o, i)])).collect();
    Channel::new_unchecked(Operation::from_kraus(dim_in, dim_out, kraus).expect("consistent shapes"))
}

/// Instrument whose operations are the blocks of a random isometry
/// `C^dim → C^dim ⊗ C^outcomes ⊗ C^k`.
pub fn random_instrument_with<R: Rng + ?Sized>(
    dim: usize,
    outcomes: usize,
    kraus_per_outcome: usize,
    rng: &mut R,
    tol: &Tolerances,
) -> Result<Instrument> {
    let k = kraus_per_outcome.max(1);
    let total = random_channel_with(dim, dim, outcomes * k, rng, tol);
    let kraus = total.kraus();
    let ops = (0..outcomes)
        .map(|x| Operation::from_kraus(dim, dim, kraus[x * k..(x + 1) * k].to_vec()))
        .collect::<Result<Vec<_>>>()?;
    Instrument::new(labels(outcomes), ops, tol)
}

pub fn random_instrument(dim: usize, outcomes: usize, kraus_per_outcome: usize, seed: u64) -> Instrument {
    random_instrument_with(dim, outcomes, kraus_per_outcome, &mut rng(seed), &Tolerances::default())
        .expect("blocks of an isometry form an instrument")
}

/// `(1 − ε) Φ + ε · depolarising` with `ε = 0.1`.
pub fn random_constrained_channel(dim: usize, seed: u64) -> Channel {
    random_constrained_channel_with(dim, &mut rng(seed), &Tolerances::default())
}

pub fn random_constrained_channel_with<R: Rng + ?Sized>(dim: usize, rng: &mut R, tol: &Tolerances) -> Channel {
    let kc = rng.gen_range(1..=dim.min(3));
    let raw = random_channel_with(dim, dim, kc, rng, tol);
    Channel::mixture(&[0.9, 0.1], &[raw, Channel::depolarizing(dim)]).expect("equal shapes")
}

/// Convex mixture of `mix_count` random unitary channels.
pub fn random_bistochastic(dim: usize, mix_count: usize, seed: u64) -> Channel {
    random_bistochastic_with(dim, mix_count, &mut rng(seed))
}

pub fn random_bistochastic_with<R: Rng + ?Sized>(dim: usize, mix_count: usize, rng: &mut R) -> Channel {
    let m = mix_count.max(1);
    let w = random_simplex(m, rng);
    let kraus = w.iter().map(|&p| random_unitary(dim, rng).scale_real(p.sqrt())).collect();
    Channel::new_unchecked(Operation::from_kraus(dim, dim, kraus).expect("square unitaries"))
}

/// State with spectrum floored at `min_eig` (default `0.05/dim`).
pub fn random_full_rank_state(dim: usize, seed: u64, min_eig: Option<f64>) -> State {
    random_full_rank_state_with(dim, &mut rng(seed), min_eig)
}

pub fn random_full_rank_state_with<R: Rng + ?Sized>(dim: usize, rng: &mut R, min_eig: Option<f64>) -> State {
    let floor = min_eig.unwrap_or(0.05 / dim as f64).clamp(0.0, 1.0 / dim as f64);
    let p = random_simplex(dim, rng);
    let spectrum: Vec<f64> = p.iter().map(|v| floor + (1.0 - dim as f64 * floor) * v).collect();
    let u = random_unitary(dim, rng);
    State::new_unchecked((u.clone() * ComplexMatrix::diag(&spectrum) * u.adjoint()).hermitian_part())
}

/// State of exactly the given rank.
pub fn random_state_of_rank<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> State {
    let rank = rank.clamp(1, dim);
    let mut spectrum = random_simplex(rank, rng).into_iter().map(|v| 0.02 / rank as f64 + 0.98 * v).collect::<Vec<_>>();
    spectrum.resize(dim, 0.0);
    let u = random_unitary(dim, rng);
    State::new_unchecked((u.clone() * ComplexMatrix::diag(&spectrum) * u.adjoint()).hermitian_part())
}

/// Random scheme with full-rank ancilla state and constrained interaction.
/// Odd seeds use a unitary interaction.
pub fn random_constrained_scheme(seed: u64, tol: &Tolerances) -> Result<MeasurementScheme> {
    let mut g = rng(seed);
    let d = g.gen_range(2..=3usize);
    let da = g.gen_range(2..=3usize);
    let outcomes = g.gen_range(2..=da);
    let xi = random_full_rank_state_with(da, &mut g, None);
    let interaction = if seed % 2 == 1 {
        Channel::unitary(random_unitary(d * da, &mut g), tol)?
    } else {
        random_constrained_channel_with(d * da, &mut g, tol)
    };
    let pointer = if g.gen_bool(0.5) {
        Observable::computational(da)
    } else {
        random_povm_with(da, outcomes, PovmClass::Generic, &mut g, tol)?
    };
    MeasurementScheme::new(d, xi, interaction, pointer)
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

/// Model payload of a catalog entry.
#[derive(Debug, Clone)]
pub enum CatalogModel {
    Scheme(MeasurementScheme),
    Instrument { observable: Observable, instrument: Instrument },
    Channel(Channel),
}

/// Property flags the entry is expected to reproduce; `None` means not asserted.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExpectedProperties {
    pub constrained: Option<bool>,
    pub first_kind: Option<bool>,
    pub repeatable: Option<bool>,
    pub ideal: Option<Verdict>,
    pub extremal: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct ModelCatalogEntry {
    pub name: &'static str,
    pub location: &'static str,
    pub model: CatalogModel,
    pub expected: ExpectedProperties,
}

pub fn catalog(tol: &Tolerances) -> Result<Vec<ModelCatalogEntry>> {
    let nd = build_nondisturbance_example(tol)?;
    let (ideal_e, ideal_i) = build_ideality_example(tol)?;
    let unsharp =
        Observable::from_effects(vec![ComplexMatrix::diag(&[0.75, 0.25]), ComplexMatrix::diag(&[0.25, 0.75])], tol)?;
    let xi = default_extremal_xi(tol);
    Ok(vec![
        ModelCatalogEntry {
            name: "nondisturbance",
            location: "two-qubit non-disturbance example",
            model: CatalogModel::Instrument { observable: nd.e, instrument: nd.instrument },
            expected: ExpectedProperties { repeatable: Some(false), ..Default::default() },
        },
        ModelCatalogEntry {
            name: "ideality",
            location: "ideal non-Lüders measurement on C^3",
            model: CatalogModel::Instrument { observable: ideal_e, instrument: ideal_i },
            expected: ExpectedProperties { ideal: Some(Verdict::True), ..Default::default() },
        },
        ModelCatalogEntry {
            name: "luders-scheme",
            location: "Lüders scheme for a completely unsharp qubit observable",
            model: CatalogModel::Scheme(build_luders_scheme(&unsharp, tol)?),
            expected: ExpectedProperties {
                constrained: Some(true),
                first_kind: Some(true),
                repeatable: Some(false),
                ideal: Some(Verdict::NotApplicable),
                extremal: Some(true),
            },
        },
        ModelCatalogEntry {
            name: "shift-model",
            location: "first-kind controlled-shift model",
            model: CatalogModel::Scheme(build_firstkind_shift_model(2, &[0.3, 0.7], tol)?),
            expected: ExpectedProperties {
                constrained: Some(true),
                first_kind: Some(true),
                repeatable: Some(false),
                ideal: Some(Verdict::NotApplicable),
                ..Default::default()
            },
        },
        ModelCatalogEntry {
            name: "extremal",
            location: "extremal model with V0, V1",
            model: CatalogModel::Scheme(build_extremal_model(&xi, tol)?.scheme),
            expected: ExpectedProperties {
                constrained: Some(true),
                repeatable: Some(false),
                ideal: Some(Verdict::False),
                extremal: Some(true),
                ..Default::default()
            },
        },
        ModelCatalogEntry {
            name: "swap-scheme",
            location: "swap of H2 with the ancilla",
            model: CatalogModel::Scheme(build_swap_nondisturbance_scheme(&xi, tol)?),
            expected: ExpectedProperties {
                constrained: Some(true),
                first_kind: Some(false),
                repeatable: Some(false),
                ideal: Some(Verdict::False),
                extremal: Some(false),
            },
        },
        ModelCatalogEntry {
            name: "rank-one-image",
            location: "constrained channel that maps a rank-2 state to a pure state",
            model: CatalogModel::Channel(build_rank_one_image_channel(tol)?),
            expected: ExpectedProperties { constrained: Some(true), ..Default::default() },
        },
    ])
}

impl ModelCatalogEntry {
    /// Recomputes every flag the entry can be checked against.
    pub fn observe(&self, tol: &Tolerances) -> Result<ExpectedProperties> {
        use crate::properties::{check_extremal, check_first_kind, check_ideal, check_repeatable};
        use crate::thirdlaw::{check_channel_thirdlaw, check_scheme_thirdlaw};
        let (constrained, inst) = match &self.model {
            CatalogModel::Channel(phi) => {
                return Ok(ExpectedProperties {
                    constrained: Some(check_channel_thirdlaw(phi, tol).constrained),
                    ..Default::default()
                })
            }
            CatalogModel::Scheme(m) => (Some(check_scheme_thirdlaw(m, tol).constrained), m.to_instrument(tol)?),
            CatalogModel::Instrument { instrument, .. } => (None, instrument.clone()),
        };
        Ok(ExpectedProperties {
            constrained,
            first_kind: Some(check_first_kind(&inst, tol).holds),
            repeatable: Some(check_repeatable(&inst, tol).holds),
            ideal: Some(check_ideal(&inst, tol).verdict),
            extremal: Some(check_extremal(&inst, tol).extremal),
        })
    }

    /// Names of asserted flags that disagree with the recomputed ones.
    pub fn mismatches(&self, tol: &Tolerances) -> Result<Vec<&'static str>> {
        let got = self.observe(tol)?;
        let e = &self.expected;
        let mut out = Vec::new();
        let mut cmp = |name, want: Option<bool>, have: Option<bool>| {
            if want.is_some() && want != have {
                out.push(name);
            }
        };
        cmp("constrained", e.constrained, got.constrained);
        cmp("first_kind", e.first_kind, got.first_kind);
        cmp("repeatable", e.repeatable, got.repeatable);
        cmp("extremal", e.extremal, got.extremal);
        if e.ideal.is_some() && e.ideal != got.ideal {
            out.push("ideal");
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn catalog_reproduces_expected_flags() {
        for entry in catalog(&tol()).unwrap() {
            assert!(entry.mismatches(&tol()).unwrap().is_empty(), "{}", entry.name);
        }
    }

    #[test]
    fn nondisturbance_effects_do_not_commute() {
        let m = build_nondisturbance_example(&tol()).unwrap();
        assert!(m.e.effect(0).commutator(m.f.effect(0)).frobenius_norm() > 0.1);
        assert!(m.instrument.induced_observable(&tol()).unwrap().distance(&m.e) < 1e-12);
    }

    #[test]
    fn luders_scheme_needs_complete_unsharpness() {
        assert!(matches!(build_luders_scheme(&Observable::computational(2), &tol()), Err(Error::NotCompletelyUnsharp)));
    }

    #[test]
    fn shift_model_validates_distribution() {
        assert!(build_firstkind_shift_model(2, &[0.0, 1.0], &tol()).is_err());
        assert!(build_firstkind_shift_model(2, &[0.4, 0.4], &tol()).is_err());
        assert!(build_firstkind_shift_model(2, &[0.3, 0.7], &tol()).is_ok());
    }

    #[test]
    fn extremal_products_match_listed_matrices() {
        let [v0, v1] = extremal_v();
        let p01 = v0.adjoint() * v1.clone();
        assert!(p01.distance(&ComplexMatrix::from_real_rows(&[vec![0.0, 0.25], vec![0.75, 0.0]])) < 1e-15);
        let p11 = v1.adjoint() * v1;
        assert!(p11.distance(&ComplexMatrix::diag(&[0.75, 0.25])) < 1e-15);
    }

    #[test]
    fn generators_are_reproducible() {
        let a = random_povm(2, 3, 7);
        let b = random_povm(2, 3, 7);
        assert_eq!(a, b);
        let mut sum = ComplexMatrix::zeros(2, 2);
        for e in a.effects() {
            sum += e;
        }
        assert!(sum.distance(&ComplexMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn bistochastic_is_unital() {
        let phi = random_bistochastic(3, 4, 11);
        let out = phi.apply(&ComplexMatrix::identity(3).scale_real(1.0 / 3.0)).unwrap();
        assert!(out.distance(&ComplexMatrix::identity(3).scale_real(1.0 / 3.0)) < 1e-12);
    }

    #[test]
    fn full_rank_state_respects_floor() {
        let s = random_full_rank_state(4, 3, None);
        assert!(s.min_eigenvalue(&tol()) >= 0.05 / 4.0 - 1e-12);
    }

    #[test]
    fn class_targeted_povms_carry_their_flags() {
        for seed in 0..10 {
            let c = classify(&random_povm_class(3, 2, PovmClass::Sharp, seed).unwrap(), &tol());
            assert!(c.is_sharp);
            let c = classify(&random_povm_class(3, 2, PovmClass::Norm1Unsharp, seed).unwrap(), &tol());
            assert!(c.is_norm1 && !c.is_sharp);
            let c = classify(&random_povm_class(3, 3, PovmClass::CompletelyUnsharp, seed).unwrap(), &tol());
            assert!(c.is_completely_unsharp);
            let c = classify(&random_povm_class(3, 3, PovmClass::SmallRank, seed).unwrap(), &tol());
            assert!(c.is_small_rank);
        }
    }
}
