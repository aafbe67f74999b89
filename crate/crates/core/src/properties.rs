//! The five measurement properties of an instrument, checked in the
//! Heisenberg picture, and the class-level possibility predicates.

use serde::{Deserialize, Serialize};

use crate::classify::ObservableClassification;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, numerical_rank, ComplexMatrix, Tolerances};
use crate::qm::{Instrument, MeasurementScheme, Observable};

const IDEAL_ATOL: f64 = 1e-8;
const SCHEME_MATCH_ATOL: f64 = 1e-8;
const SCHEME_IDENTITY_ATOL: f64 = 1e-7;

/// Three-valued outcome of the ideality check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    True,
    False,
    NotApplicable,
}

impl Verdict {
    pub fn is_true(self) -> bool {
        self == Verdict::True
    }
}

impl From<bool> for Verdict {
    fn from(b: bool) -> Self {
        if b {
            Verdict::True
        } else {
            Verdict::False
        }
    }
}

/// A boolean verdict with the largest residual that decided it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub holds: bool,
    pub residual: f64,
}

impl Check {
    fn within(residual: f64, atol: f64) -> Self {
        Check { holds: residual < atol, residual }
    }
}

fn induced_effects(inst: &Instrument) -> Vec<ComplexMatrix> {
    inst.operations().iter().map(|op| op.kraus_sum().hermitian_part()).collect()
}

/// `‖I_X*(F_y) − F_y‖ < atol` for every `y`.
pub fn check_non_disturbance(inst: &Instrument, f: &Observable, tol: &Tolerances) -> Result<Check> {
    if f.dim() != inst.dim() {
        return Err(Error::DimensionMismatch(format!(
            "instrument acts on C^{} but the observable on C^{}",
            inst.dim(),
            f.dim()
        )));
    }
    let mut worst: f64 = 0.0;
    for fy in f.effects() {
        worst = worst.max(inst.total_dual(fy)?.distance(fy));
    }
    Ok(Check::within(worst, tol.atol_equality))
}

/// Non-disturbance of the induced observable.
pub fn check_first_kind(inst: &Instrument, tol: &Tolerances) -> Check {
    let mut worst: f64 = 0.0;
    for ex in induced_effects(inst) {
        let img = inst.total_dual(&ex).expect("square effects of matching size");
        worst = worst.max(img.distance(&ex));
    }
    Check::within(worst, tol.atol_equality)
}

/// `I_x*(E_y) = δ_xy E_x` for all `x, y`.
pub fn check_repeatable(inst: &Instrument, tol: &Tolerances) -> Check {
    let effects = induced_effects(inst);
    let d = inst.dim();
    let mut worst: f64 = 0.0;
    for (x, op) in inst.operations().iter().enumerate() {
        for (y, ey) in effects.iter().enumerate() {
            let img = op.apply_dual(ey).expect("square effects of matching size");
            let target = if x == y { effects[x].clone() } else { ComplexMatrix::zeros(d, d) };
            worst = worst.max(img.distance(&target));
        }
    }
    Check::within(worst, tol.atol_equality)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdealCheck {
    pub verdict: Verdict,
    pub residual: f64,
    /// Dimension of the eigenvalue-1 eigenspace of each effect.
    pub certain_dims: Vec<usize>,
}

/// Outcome-certain inputs pass unchanged: `I_x(A) = A` for `A` supported on
/// the eigenvalue-1 eigenspace of `E_x`.
pub fn check_ideal(inst: &Instrument, tol: &Tolerances) -> IdealCheck {
    let d = inst.dim();
    let mut spaces = Vec::with_capacity(inst.len());
    for ex in induced_effects(inst) {
        let spec = match hermitian_eig(&ex, tol) {
            Ok(s) => s,
            Err(_) => return IdealCheck { verdict: Verdict::NotApplicable, residual: f64::NAN, certain_dims: vec![] },
        };
        let top: Vec<Vec<_>> =
            (0..d).filter(|&k| spec.values[k] >= 1.0 - tol.rank_threshold).map(|k| spec.vector(k)).collect();
        spaces.push(top);
    }
    let certain_dims: Vec<usize> = spaces.iter().map(Vec::len).collect();
    if certain_dims.contains(&0) {
        return IdealCheck { verdict: Verdict::NotApplicable, residual: 0.0, certain_dims };
    }
    let mut worst: f64 = 0.0;
    for (op, q) in inst.operations().iter().zip(&spaces) {
        for u in q {
            for v in q {
                let a = ComplexMatrix::outer(u, v);
                let img = op.apply(&a).expect("square operand of matching size");
                worst = worst.max(img.distance(&a));
            }
        }
    }
    IdealCheck { verdict: (worst < IDEAL_ATOL).into(), residual: worst, certain_dims }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtremalCheck {
    pub extremal: bool,
    /// Minimal Kraus count of each operation.
    pub kraus_ranks: Vec<usize>,
    /// Numerical rank of the vectorised products `K_i^dag K_j` within each outcome.
    pub gram_rank: usize,
    pub product_count: usize,
}

/// Linear independence of the products of minimal Kraus operators.
pub fn check_extremal(inst: &Instrument, tol: &Tolerances) -> ExtremalCheck {
    let d = inst.dim();
    let mut ranks = Vec::with_capacity(inst.len());
    let mut products = Vec::new();
    for op in inst.operations() {
        let minimal = op.minimal(tol).unwrap_or_else(|_| op.clone());
        let kraus: Vec<&ComplexMatrix> = minimal.kraus().iter().filter(|k| k.max_abs() > 0.0).collect();
        ranks.push(kraus.len());
        for ki in &kraus {
            for kj in &kraus {
                products.push((ki.adjoint() * *kj).vectorize());
            }
        }
    }
    let product_count = products.len();
    let gram_rank =
        if products.is_empty() { 0 } else { numerical_rank(&crate::linalg::ops::stack_columns(d * d, &products), tol) };
    ExtremalCheck { extremal: gram_rank == product_count, kraus_ranks: ranks, gram_rank, product_count }
}

/// `rank(E_x)² ≥ dim` for every effect.
pub fn rank_bound_holds(ranks: &[usize], dim: usize) -> bool {
    ranks.iter().all(|&r| r * r >= dim)
}

/// Verifies `𝓔*(A ⊗ Z_x) = I_x*(A) ⊗ 1` on the matrix units of the system.
pub fn check_extremal_scheme_identity(m: &MeasurementScheme, inst: &Instrument, tol: &Tolerances) -> Result<Check> {
    let implemented = m.to_instrument(tol)?;
    let distance = implemented.distance(inst);
    if distance.is_nan() || distance > SCHEME_MATCH_ATOL {
        return Err(Error::SchemeMismatch { distance });
    }
    let d = m.system_dim();
    let one_a = ComplexMatrix::identity(m.ancilla_dim());
    let mut worst: f64 = 0.0;
    for x in 0..inst.len() {
        for i in 0..d {
            for j in 0..d {
                let a = ComplexMatrix::unit(d, i, j);
                let lhs = m.dual_on_pointer(&a, x)?;
                let rhs = inst.operation(x).apply_dual(&a)?.kron(&one_a);
                worst = worst.max(lhs.distance(&rhs));
            }
        }
    }
    Ok(Check::within(worst, SCHEME_IDENTITY_ATOL))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyDetails {
    pub first_kind_residual: f64,
    pub repeatable_residual: f64,
    pub ideal_residual: f64,
    pub effect_ranks: Vec<usize>,
    pub kraus_ranks: Vec<usize>,
    pub gram_rank: usize,
    pub product_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub non_disturbance_of: Option<Check>,
    pub first_kind: bool,
    pub repeatable: bool,
    pub ideal: Verdict,
    pub extremal: bool,
    pub extremal_rank_bound_ok: bool,
    pub details: PropertyDetails,
}

pub fn property_report(inst: &Instrument, f: Option<&Observable>, tol: &Tolerances) -> Result<PropertyReport> {
    let non_disturbance_of = f.map(|f| check_non_disturbance(inst, f, tol)).transpose()?;
    let fk = check_first_kind(inst, tol);
    let rep = check_repeatable(inst, tol);
    let ideal = check_ideal(inst, tol);
    let ext = check_extremal(inst, tol);
    let effect_ranks: Vec<usize> = induced_effects(inst).iter().map(|e| numerical_rank(e, tol)).collect();
    Ok(PropertyReport {
        non_disturbance_of,
        first_kind: fk.holds,
        repeatable: rep.holds,
        ideal: ideal.verdict,
        extremal: ext.extremal,
        extremal_rank_bound_ok: rank_bound_holds(&effect_ranks, inst.dim()),
        details: PropertyDetails {
            first_kind_residual: fk.residual,
            repeatable_residual: rep.residual,
            ideal_residual: ideal.residual,
            effect_ranks,
            kraus_ranks: ext.kraus_ranks,
            gram_rank: ext.gram_rank,
            product_count: ext.product_count,
        },
    })
}

// ---------------------------------------------------------------------------
// Class-level predicates
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Possibility {
    Possible,
    Impossible,
    NotCovered,
}

impl Possibility {
    pub fn symbol(self) -> &'static str {
        match self {
            Possibility::Possible => "✓",
            Possibility::Impossible => "✗",
            Possibility::NotCovered => "?",
        }
    }
}

/// The five properties in their customary order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    NonDisturbance,
    FirstKind,
    Repeatable,
    Ideal,
    Extremal,
}

impl Property {
    pub const ALL: [Property; 5] =
        [Property::NonDisturbance, Property::FirstKind, Property::Repeatable, Property::Ideal, Property::Extremal];

    pub fn roman(self) -> &'static str {
        match self {
            Property::NonDisturbance => "(i)",
            Property::FirstKind => "(ii)",
            Property::Repeatable => "(iii)",
            Property::Ideal => "(iv)",
            Property::Extremal => "(v)",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Property::NonDisturbance => "non-disturbance",
            Property::FirstKind => "first-kind",
            Property::Repeatable => "repeatable",
            Property::Ideal => "ideal",
            Property::Extremal => "extremal",
        }
    }
}

/// Verdict together with the theorem anchor or witness that justifies it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Predicate {
    pub verdict: Possibility,
    pub basis: String,
}

impl Predicate {
    fn new(verdict: Possibility, basis: impl Into<String>) -> Self {
        Predicate { verdict, basis: basis.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremPredicates {
    pub non_disturbance: Predicate,
    pub first_kind: Predicate,
    pub repeatable: Predicate,
    pub ideal: Predicate,
    pub extremal: Predicate,
}

impl TheoremPredicates {
    pub fn get(&self, p: Property) -> &Predicate {
        match p {
            Property::NonDisturbance => &self.non_disturbance,
            Property::FirstKind => &self.first_kind,
            Property::Repeatable => &self.repeatable,
            Property::Ideal => &self.ideal,
            Property::Extremal => &self.extremal,
        }
    }

    pub fn verdicts(&self) -> [Possibility; 5] {
        Property::ALL.map(|p| self.get(p).verdict)
    }
}

pub const ANCHOR_NONDISTURBANCE: &str = "non-disturbance theorem: every effect must have norm below 1";
pub const ANCHOR_FIRSTKIND: &str = "first-kind theorem: commutative and completely unsharp";
pub const ANCHOR_REPEATABLE: &str = "repeatability theorem: no observable admits a repeatable measurement";
pub const ANCHOR_IDEAL: &str = "ideality theorem: no observable admits an ideal measurement";
pub const ANCHOR_EXTREMAL: &str = "extremality theorem: rank of every effect at least sqrt(dim)";

/// Observable classes with a verified constrained extremal implementation.
#[derive(Debug, Clone, Copy)]
pub struct WitnessClass {
    pub name: &'static str,
    pub matches: fn(&ObservableClassification) -> bool,
}

pub fn extremal_witnesses() -> [WitnessClass; 2] {
    [
        WitnessClass { name: "extremal-model", matches: |c| c.is_sharp && c.dim == 4 && c.per_effect_ranks == [2, 2] },
        WitnessClass { name: "luders-scheme", matches: |c| c.is_completely_unsharp && c.effects_linearly_independent },
    ]
}

/// Class-driven lookup of the impossibility and possibility theorems.
pub fn theorem_predicates(c: &ObservableClassification, dim: usize, tol: &Tolerances) -> TheoremPredicates {
    use Possibility::*;
    let non_disturbance = if c.has_unit_norm_effect(tol) || c.is_small_rank {
        Predicate::new(Impossible, ANCHOR_NONDISTURBANCE)
    } else if c.is_completely_unsharp {
        Predicate::new(Possible, "luders-scheme")
    } else {
        Predicate::new(NotCovered, "gap between norm below 1 and completely unsharp")
    };
    let first_kind = if c.is_commutative && c.is_completely_unsharp {
        Predicate::new(Possible, "luders-scheme")
    } else {
        Predicate::new(Impossible, ANCHOR_FIRSTKIND)
    };
    let extremal = if !rank_bound_holds(&c.per_effect_ranks, dim) {
        Predicate::new(Impossible, ANCHOR_EXTREMAL)
    } else if let Some(w) = extremal_witnesses().iter().find(|w| (w.matches)(c)) {
        Predicate::new(Possible, w.name)
    } else {
        Predicate::new(NotCovered, "no registered witness")
    };
    TheoremPredicates {
        non_disturbance,
        first_kind,
        repeatable: Predicate::new(Impossible, ANCHOR_REPEATABLE),
        ideal: Predicate::new(Impossible, ANCHOR_IDEAL),
        extremal,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::classify;
    use crate::models;
    use crate::qm::State;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn unsharp() -> Observable {
        Observable::from_effects(vec![ComplexMatrix::diag(&[0.75, 0.25]), ComplexMatrix::diag(&[0.25, 0.75])], &tol())
            .unwrap()
    }

    #[test]
    fn luders_of_commutative_is_first_kind_not_repeatable() {
        let i = Instrument::luders(&unsharp(), &tol()).unwrap();
        assert!(check_first_kind(&i, &tol()).holds);
        assert!(!check_repeatable(&i, &tol()).holds);
        assert_eq!(check_ideal(&i, &tol()).verdict, Verdict::NotApplicable);
        assert!(check_extremal(&i, &tol()).extremal);
    }

    #[test]
    fn luders_of_sharp_is_repeatable_and_ideal() {
        let i = Instrument::luders(&Observable::computational(2), &tol()).unwrap();
        assert!(check_repeatable(&i, &tol()).holds);
        assert_eq!(check_ideal(&i, &tol()).verdict, Verdict::True);
    }

    #[test]
    fn trivial_instrument_disturbs() {
        let e = unsharp();
        let i = Instrument::trivial(&e, &State::maximally_mixed(2), &tol()).unwrap();
        assert!(!check_first_kind(&i, &tol()).holds);
        assert!(!check_non_disturbance(&i, &e, &tol()).unwrap().holds);
        assert!(!check_extremal(&i, &tol()).extremal);
    }

    #[test]
    fn nondisturbance_dimension_mismatch() {
        let i = Instrument::luders(&unsharp(), &tol()).unwrap();
        assert!(check_non_disturbance(&i, &Observable::computational(3), &tol()).is_err());
    }

    #[test]
    fn ideality_example_is_ideal() {
        let (_, i) = models::build_ideality_example(&tol()).unwrap();
        assert_eq!(check_ideal(&i, &tol()).verdict, Verdict::True);
        assert!(!check_repeatable(&i, &tol()).holds);
    }

    #[test]
    fn predicates_for_listed_classes() {
        use Possibility::*;
        let t = tol();
        let qubit = classify(&Observable::computational(2), &t);
        assert_eq!(theorem_predicates(&qubit, 2, &t).verdicts(), [Impossible; 5]);
        let cu = classify(&unsharp(), &t);
        assert_eq!(theorem_predicates(&cu, 2, &t).verdicts(), [Possible, Possible, Impossible, Impossible, Possible]);
        let ext = models::build_extremal_model(&models::default_extremal_xi(&t), &t).unwrap();
        let e = ext.instrument.induced_observable(&t).unwrap();
        assert_eq!(
            theorem_predicates(&classify(&e, &t), 4, &t).verdicts(),
            [Impossible, Impossible, Impossible, Impossible, Possible]
        );
    }
}
