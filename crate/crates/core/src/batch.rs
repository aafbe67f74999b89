//! Seeded sweeps over random fixtures, run sequentially or on the rayon pool.

use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classify::classify;
use crate::linalg::{numerical_rank, ComplexMatrix, Tolerances};
use crate::models::{self, rng};
use crate::properties::{check_first_kind, check_ideal, check_repeatable, Verdict};
use crate::qm::{Channel, Operation};
use crate::thirdlaw::{check_channel_thirdlaw, check_faithfulness_dual, check_scheme_thirdlaw, full_rank_fixed_state};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether `Parallel` actually uses worker threads in this build.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// Evaluates `f` on every seed, preserving seed order.
pub fn map_seeds<R, F>(exec: Execution, seeds: Range<u64>, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(u64) -> R + Sync + Send,
{
    match exec {
        Execution::Sequential => seeds.map(f).collect(),
        Execution::Parallel => parallel_map(seeds, f),
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<R, F>(seeds: Range<u64>, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(u64) -> R + Sync + Send,
{
    use rayon::prelude::*;
    seeds.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<R, F>(seeds: Range<u64>, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(u64) -> R + Sync + Send,
{
    seeds.map(f).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelFamily {
    UnitaryMixture,
    Stinespring,
    Preparation,
}

/// The three equivalent conditions on one channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceRecord {
    pub seed: u64,
    pub family: ChannelFamily,
    pub dims: (usize, usize),
    pub image_full_rank: bool,
    pub dual_faithful: bool,
    /// `None` for channels between different spaces.
    pub full_rank_fixed_state: Option<bool>,
}

impl EquivalenceRecord {
    pub fn consistent(&self) -> bool {
        self.image_full_rank == self.dual_faithful
            && self.full_rank_fixed_state.is_none_or(|f| f == self.image_full_rank)
    }
}

/// Channel of the requested family: mixtures of unitaries, Stinespring
/// dilations, or `ρ ↦ Σ_j <j|ρ|j> σ_j` with low-rank `σ_j`.
pub fn equivalence_channel(seed: u64) -> (ChannelFamily, Channel) {
    let tol = Tolerances::default();
    let mut g = rng(seed);
    match seed % 3 {
        0 => {
            let d = g.gen_range(2..=4);
            let m = g.gen_range(1..=3);
            (ChannelFamily::UnitaryMixture, models::random_bistochastic_with(d, m, &mut g))
        }
        1 => {
            let din = g.gen_range(2..=4);
            let dout = g.gen_range(2..=4);
            let k = g.gen_range(1..=3);
            (ChannelFamily::Stinespring, models::random_channel_with(din, dout, k, &mut g, &tol))
        }
        _ => {
            let din = g.gen_range(2..=3);
            let dout = g.gen_range(2..=4);
            let mut kraus = Vec::new();
            for j in 0..din {
                let rank = g.gen_range(1..dout);
                let sigma = models::random_state_of_rank(dout, rank, &mut g);
                let eig = crate::linalg::hermitian_eig(sigma.matrix(), &tol).expect("Hermitian state");
                for k in 0..dout {
                    let lam = eig.values[k];
                    if lam > 0.0 {
                        kraus.push(
                            ComplexMatrix::outer(&eig.vector(k), &ComplexMatrix::basis_vector(din, j))
                                .scale_real(lam.sqrt()),
                        );
                    }
                }
            }
            let op = Operation::from_kraus(din, dout, kraus).expect("consistent shapes");
            (ChannelFamily::Preparation, Channel::new_unchecked(op))
        }
    }
}

pub fn equivalence_record(seed: u64, tol: &Tolerances) -> EquivalenceRecord {
    let (family, phi) = equivalence_channel(seed);
    let fixed = phi.is_endomorphic().then(|| full_rank_fixed_state(&phi, tol).map(|r| r.is_full_rank).unwrap_or(false));
    EquivalenceRecord {
        seed,
        family,
        dims: (phi.dim_in(), phi.dim_out()),
        image_full_rank: check_channel_thirdlaw(&phi, tol).constrained,
        dual_faithful: check_faithfulness_dual(&phi, tol),
        full_rank_fixed_state: fixed,
    }
}

pub fn equivalence_sweep(exec: Execution, seeds: Range<u64>, tol: &Tolerances) -> Vec<EquivalenceRecord> {
    map_seeds(exec, seeds, |s| equivalence_record(s, tol))
}

/// Rank of the input and output for one state of every rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRecord {
    pub seed: u64,
    pub dim: usize,
    /// `(rank ρ, rank Φ(ρ))` for each input rank.
    pub ranks: Vec<(usize, usize)>,
}

impl RankRecord {
    pub fn violations(&self) -> usize {
        self.ranks.iter().filter(|(a, b)| b < a).count()
    }
}

pub fn bistochastic_rank_record(seed: u64, tol: &Tolerances) -> RankRecord {
    let mut g = rng(seed);
    let dim = g.gen_range(2..=5);
    let mixes = g.gen_range(1..=4);
    let phi = models::random_bistochastic_with(dim, mixes, &mut g);
    let ranks = (1..=dim)
        .map(|r| {
            let rho = models::random_state_of_rank(dim, r, &mut g);
            let out = phi.apply(rho.matrix()).expect("matching dimension");
            (numerical_rank(rho.matrix(), tol), numerical_rank(&out.hermitian_part(), tol))
        })
        .collect();
    RankRecord { seed, dim, ranks }
}

pub fn bistochastic_rank_sweep(exec: Execution, seeds: Range<u64>, tol: &Tolerances) -> Vec<RankRecord> {
    map_seeds(exec, seeds, |s| bistochastic_rank_record(s, tol))
}

/// Properties of the instrument realised by one random constrained scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeRecord {
    pub seed: u64,
    pub constrained: bool,
    pub first_kind: bool,
    pub repeatable: bool,
    pub ideal: Verdict,
    pub commutative: bool,
    pub completely_unsharp: bool,
    pub error: Option<String>,
}

impl SchemeRecord {
    /// No repeatable or ideal instrument, and first-kind only for
    /// commutative completely unsharp observables.
    pub fn consistent(&self) -> bool {
        self.error.is_none()
            && !self.repeatable
            && self.ideal != Verdict::True
            && (!self.first_kind || (self.commutative && self.completely_unsharp))
    }
}

pub fn scheme_record(seed: u64, tol: &Tolerances) -> SchemeRecord {
    let mut rec = SchemeRecord {
        seed,
        constrained: false,
        first_kind: false,
        repeatable: false,
        ideal: Verdict::NotApplicable,
        commutative: false,
        completely_unsharp: false,
        error: None,
    };
    let built = models::random_constrained_scheme(seed, tol).and_then(|m| {
        let constrained = check_scheme_thirdlaw(&m, tol).constrained;
        Ok((constrained, m.to_instrument(tol)?))
    });
    let (constrained, inst) = match built {
        Ok(v) => v,
        Err(e) => {
            rec.error = Some(e.to_string());
            return rec;
        }
    };
    let effects = inst.operations().iter().map(|op| op.kraus_sum().hermitian_part()).collect();
    let c = classify(&crate::qm::Observable::new_unchecked(inst.labels().to_vec(), effects), tol);
    rec.constrained = constrained;
    rec.first_kind = check_first_kind(&inst, tol).holds;
    rec.repeatable = check_repeatable(&inst, tol).holds;
    rec.ideal = check_ideal(&inst, tol).verdict;
    rec.commutative = c.is_commutative;
    rec.completely_unsharp = c.is_completely_unsharp;
    rec
}

pub fn constrained_scheme_sweep(exec: Execution, seeds: Range<u64>, tol: &Tolerances) -> Vec<SchemeRecord> {
    map_seeds(exec, seeds, |s| scheme_record(s, tol))
}

/// Residuals of the Choi round trip and of the Heisenberg-picture duality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualityRecord {
    pub seed: u64,
    pub choi_roundtrip: f64,
    pub duality: f64,
}

pub fn duality_record(seed: u64, tol: &Tolerances) -> DualityRecord {
    let mut g = rng(seed);
    let d = g.gen_range(2..=4);
    let n = g.gen_range(2..=3);
    let k = g.gen_range(1..=2);
    let inst = models::random_instrument_with(d, n, k, &mut g, tol).expect("random instrument");
    let rho = models::random_full_rank_state_with(d, &mut g, None);
    let a = {
        let h = models::random_povm_with(d, 2, models::PovmClass::Generic, &mut g, tol).expect("generic POVM");
        h.effect(0).clone() + ComplexMatrix::identity(d).scale_real(g.gen_range(-1.0..1.0))
    };
    let mut choi: f64 = 0.0;
    let mut dual: f64 = 0.0;
    for op in inst.operations() {
        let back = Operation::from_choi(&op.choi(), d, d, tol).expect("Choi of a CP map");
        choi = choi.max((back.superoperator().clone() - op.superoperator().clone()).frobenius_norm());
        let lhs = a.hs_inner(&op.apply(rho.matrix()).expect("square"));
        let rhs = op.apply_dual(&a).expect("square").hs_inner(rho.matrix());
        dual = dual.max((lhs - rhs).norm());
    }
    DualityRecord { seed, choi_roundtrip: choi, duality: dual }
}

pub fn duality_sweep(exec: Execution, seeds: Range<u64>, tol: &Tolerances) -> Vec<DualityRecord> {
    map_seeds(exec, seeds, |s| duality_record(s, tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequential_and_parallel_agree() {
        let tol = Tolerances::default();
        let a = equivalence_sweep(Execution::Sequential, 0..12, &tol);
        let b = equivalence_sweep(Execution::Parallel, 0..12, &tol);
        assert_eq!(a, b);
    }

    #[test]
    fn small_sweeps_are_consistent() {
        let tol = Tolerances::default();
        assert!(equivalence_sweep(Execution::Parallel, 0..30, &tol).iter().all(EquivalenceRecord::consistent));
        assert!(bistochastic_rank_sweep(Execution::Parallel, 0..10, &tol).iter().all(|r| r.violations() == 0));
        assert!(constrained_scheme_sweep(Execution::Parallel, 0..10, &tol).iter().all(SchemeRecord::consistent));
    }
}
