//! Observable classes: sharp, norm-1, commutative, trivial, small-rank,
//! non-degenerate and completely unsharp.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, ComplexMatrix, Tolerances};
use crate::qm::Observable;

const RESAMPLES: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableClassification {
    pub dim: usize,
    pub is_trivial: bool,
    pub is_sharp: bool,
    pub is_norm1: bool,
    pub is_commutative: bool,
    pub is_small_rank: bool,
    pub is_non_degenerate: bool,
    pub is_completely_unsharp: bool,
    pub per_effect_ranks: Vec<usize>,
    pub per_effect_norms: Vec<f64>,
    /// Smallest eigenvalue of each effect.
    pub per_effect_min_eigenvalues: Vec<f64>,
    /// Effects are linearly independent as vectors of operator space.
    pub effects_linearly_independent: bool,
}

impl ObservableClassification {
    /// Some effect has an eigenvalue equal to 1.
    pub fn has_unit_norm_effect(&self, tol: &Tolerances) -> bool {
        self.per_effect_norms.iter().any(|&n| n >= 1.0 - tol.rank_threshold)
    }
}

pub fn classify(e: &Observable, tol: &Tolerances) -> ObservableClassification {
    let d = e.dim();
    let eps = tol.rank_threshold;
    let mut ranks = Vec::with_capacity(e.len());
    let mut norms = Vec::with_capacity(e.len());
    let mut mins = Vec::with_capacity(e.len());
    let mut non_degenerate = false;
    let mut completely_unsharp = true;

    for ex in e.effects() {
        let spec = match hermitian_eig(ex, tol) {
            Ok(s) => s,
            Err(_) => {
                ranks.push(d);
                norms.push(f64::NAN);
                mins.push(f64::NAN);
                completely_unsharp = false;
                continue;
            }
        };
        let positive: Vec<f64> = spec.values.iter().copied().filter(|&v| v > eps).collect();
        ranks.push(positive.len());
        norms.push(spec.max());
        mins.push(spec.min());
        let simple = positive.windows(2).all(|w| (w[0] - w[1]).abs() > tol.cluster_gap);
        if !positive.is_empty() && simple {
            non_degenerate = true;
        }
        if spec.min() <= eps || spec.max() >= 1.0 - eps {
            completely_unsharp = false;
        }
    }

    let mut sharp = true;
    for (x, ex) in e.effects().iter().enumerate() {
        for (y, ey) in e.effects().iter().enumerate() {
            let prod = ex.clone() * ey;
            let target = if x == y { ex.clone() } else { ComplexMatrix::zeros(d, d) };
            if prod.distance(&target) > tol.atol_equality * 10.0 {
                sharp = false;
            }
        }
    }

    let commutative = e.max_commutator() < tol.atol_equality * 10.0;
    let trivial = e.effects().iter().all(|ex| {
        let mean = ex.trace().re / d as f64;
        ex.distance(&ComplexMatrix::identity(d).scale_real(mean)) <= tol.atol_equality * 10.0
    });
    let is_norm1 = norms.iter().all(|&n| n >= 1.0 - eps);
    let small_rank = d >= 2 && ranks.contains(&1);

    let vectors: Vec<Vec<_>> = e.effects().iter().map(|m| m.vectorize()).collect();
    let stacked = crate::linalg::ops::stack_columns(d * d, &vectors);
    let independent = crate::linalg::numerical_rank(&stacked, tol) == e.len();

    ObservableClassification {
        dim: d,
        is_trivial: trivial,
        is_sharp: sharp,
        is_norm1,
        is_commutative: commutative,
        is_small_rank: small_rank,
        is_non_degenerate: non_degenerate,
        is_completely_unsharp: completely_unsharp,
        per_effect_ranks: ranks,
        per_effect_norms: norms,
        per_effect_min_eigenvalues: mins,
        effects_linearly_independent: independent,
    }
}

/// `E_x = Σ_y p(x|y) P_y` with `P` projection valued.
#[derive(Debug, Clone)]
pub struct PostProcessing {
    pub sharp_base: Observable,
    /// `p[x][y]`; every column sums to 1.
    pub p: Vec<Vec<f64>>,
}

impl PostProcessing {
    pub fn reconstruct(&self, x: usize) -> ComplexMatrix {
        let d = self.sharp_base.dim();
        let mut out = ComplexMatrix::zeros(d, d);
        for (y, py) in self.sharp_base.effects().iter().enumerate() {
            out += &py.scale_real(self.p[x][y]);
        }
        out
    }

    pub fn is_strictly_mixing(&self, tol: f64) -> bool {
        self.p.iter().flatten().all(|&v| v > tol && v < 1.0 - tol)
    }
}

/// Joint eigenbasis of a commutative observable and the stochastic matrix
/// mapping the resulting sharp observable to it.
pub fn post_processing_decomposition(e: &Observable, tol: &Tolerances) -> Result<PostProcessing> {
    let comm = e.max_commutator();
    if comm >= tol.atol_equality * 10.0 {
        return Err(Error::NotCommutative { norm: comm });
    }
    let d = e.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0b5e);
    let mut last_residual = f64::INFINITY;
    for _ in 0..RESAMPLES {
        let mut x = ComplexMatrix::zeros(d, d);
        for ex in e.effects() {
            x += &ex.scale_real(rng.gen_range(0.5..1.5));
        }
        let spec = hermitian_eig(&x.hermitian_part(), tol)?;
        let clusters = spec.clusters(tol.cluster_gap);
        let projectors: Vec<ComplexMatrix> = clusters.iter().map(|c| spec.projector(c)).collect();
        let p: Vec<Vec<f64>> = e
            .effects()
            .iter()
            .map(|ex| {
                projectors.iter().zip(&clusters).map(|(py, c)| (ex.clone() * py).trace().re / c.len() as f64).collect()
            })
            .collect();
        let labels = (0..projectors.len()).map(|y| y.to_string()).collect();
        let pp = PostProcessing { sharp_base: Observable::new_unchecked(labels, projectors), p };
        let residual = (0..e.len()).map(|k| pp.reconstruct(k).distance(e.effect(k))).fold(0.0, f64::max);
        if residual < 1e-8 {
            return Ok(pp);
        }
        last_residual = residual;
    }
    Err(Error::DegenerateCenter(format!(
        "joint eigenspaces of the observable (reconstruction residual {last_residual:.3e})"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::r;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn ideality_observable_is_norm1_not_sharp() {
        let ep = ComplexMatrix::diag(&[0.0, 0.5, 1.0]);
        let em = ComplexMatrix::diag(&[1.0, 0.5, 0.0]);
        let e = Observable::from_effects(vec![ep, em], &tol()).unwrap();
        let c = classify(&e, &tol());
        assert!(c.is_norm1);
        assert!(!c.is_sharp);
        assert!(!c.is_small_rank);
        assert!(!c.is_completely_unsharp);
        assert_eq!(c.per_effect_ranks, vec![2, 2]);
    }

    #[test]
    fn unsharp_qubit_pair() {
        let e = Observable::from_effects(
            vec![ComplexMatrix::diag(&[0.75, 0.25]), ComplexMatrix::diag(&[0.25, 0.75])],
            &tol(),
        )
        .unwrap();
        let c = classify(&e, &tol());
        assert!(c.is_completely_unsharp && c.is_non_degenerate && c.is_commutative);
        assert!(!c.is_norm1 && !c.is_sharp && !c.is_trivial);
        assert!(c.effects_linearly_independent);
    }

    #[test]
    fn degenerate_sharp_on_two_qubits() {
        let effects =
            (0..2).map(|x| ComplexMatrix::identity(2).kron(&ComplexMatrix::unit(2, x, x))).collect::<Vec<_>>();
        let e = Observable::from_effects(effects, &tol()).unwrap();
        let c = classify(&e, &tol());
        assert!(c.is_sharp && c.is_norm1 && c.is_commutative);
        assert!(!c.is_small_rank && !c.is_non_degenerate);
    }

    #[test]
    fn post_processing_of_sharp_is_permutation() {
        let e = Observable::computational(3);
        let pp = post_processing_decomposition(&e, &tol()).unwrap();
        for row in &pp.p {
            assert_eq!(row.iter().filter(|&&v| (v - 1.0).abs() < 1e-12).count(), 1);
        }
    }

    #[test]
    fn post_processing_rejects_noncommuting() {
        let e0 = ComplexMatrix::unit(2, 0, 0).scale_real(0.5);
        let e1 = ComplexMatrix::from_rows(&[vec![r(0.25), r(0.25)], vec![r(0.25), r(0.25)]]);
        let e2 = ComplexMatrix::identity(2) - e0.clone() - e1.clone();
        let e = Observable::from_effects(vec![e0, e1, e2], &tol()).unwrap();
        assert!(matches!(post_processing_decomposition(&e, &tol()), Err(Error::NotCommutative { .. })));
    }
}
