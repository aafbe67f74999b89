//! Reproduction of the possibility/impossibility table for the four
//! observable classes.

use serde::{Deserialize, Serialize};

use crate::classify::{classify, ObservableClassification};
use crate::error::Result;
use crate::linalg::{ComplexMatrix, Tolerances};
use crate::models;
use crate::properties::{
    check_extremal, check_extremal_scheme_identity, check_first_kind, check_non_disturbance, rank_bound_holds,
    theorem_predicates, Possibility, Property, TheoremPredicates,
};
use crate::qm::Observable;
use crate::thirdlaw::check_scheme_thirdlaw;

/// Column classes in display order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableClass {
    SmallRank,
    Sharp,
    Norm1,
    CompletelyUnsharp,
}

impl ObservableClass {
    pub const ALL: [ObservableClass; 4] = [
        ObservableClass::SmallRank,
        ObservableClass::Sharp,
        ObservableClass::Norm1,
        ObservableClass::CompletelyUnsharp,
    ];

    pub fn title(self) -> &'static str {
        match self {
            ObservableClass::SmallRank => "small-rank",
            ObservableClass::Sharp => "sharp",
            ObservableClass::Norm1 => "norm-1",
            ObservableClass::CompletelyUnsharp => "completely unsharp",
        }
    }

    pub fn contains(self, c: &ObservableClassification) -> bool {
        match self {
            ObservableClass::SmallRank => c.is_small_rank,
            ObservableClass::Sharp => c.is_sharp,
            ObservableClass::Norm1 => c.is_norm1,
            ObservableClass::CompletelyUnsharp => c.is_completely_unsharp,
        }
    }
}

/// Published matrix, rows (i)–(v), columns in [`ObservableClass::ALL`] order.
pub const EXPECTED: [[bool; 4]; 5] = [
    [false, false, false, true],
    [false, false, false, true],
    [false, false, false, false],
    [false, false, false, false],
    [false, true, true, true],
];

/// Representative observable of each column.
pub fn representative(class: ObservableClass, tol: &Tolerances) -> Result<Observable> {
    match class {
        ObservableClass::SmallRank => Ok(Observable::computational(2)),
        ObservableClass::Sharp => {
            let effects = (0..2).map(|x| ComplexMatrix::identity(2).kron(&ComplexMatrix::unit(2, x, x))).collect();
            Observable::from_effects(effects, tol)
        }
        ObservableClass::Norm1 => Ok(models::build_ideality_example(tol)?.0),
        ObservableClass::CompletelyUnsharp => {
            Observable::from_effects(vec![ComplexMatrix::diag(&[0.75, 0.25]), ComplexMatrix::diag(&[0.25, 0.75])], tol)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub name: String,
    /// Class of the observable the witness measures.
    pub observable_class: ObservableClass,
    pub constrained: bool,
    pub property_holds: bool,
    pub residual: f64,
}

impl WitnessReport {
    pub fn verified(&self) -> bool {
        self.constrained && self.property_holds
    }
}

/// Builds the named witness scheme for `e` and checks that it is
/// constrained and realises `property`.
pub fn verify_witness(
    name: &str,
    e: &Observable,
    class: ObservableClass,
    property: Property,
    tol: &Tolerances,
) -> Result<WitnessReport> {
    let (constrained, holds, residual) = match name {
        "luders-scheme" => {
            let scheme = models::build_luders_scheme(e, tol)?;
            let constrained = check_scheme_thirdlaw(&scheme, tol).constrained;
            let inst = scheme.to_instrument(tol)?;
            match property {
                Property::NonDisturbance => {
                    let c = check_non_disturbance(&inst, e, tol)?;
                    (constrained, c.holds && !classify(e, tol).is_trivial, c.residual)
                }
                Property::FirstKind => {
                    let c = check_first_kind(&inst, tol);
                    (constrained, c.holds, c.residual)
                }
                Property::Extremal => {
                    let c = check_extremal(&inst, tol);
                    (constrained, c.extremal, (c.product_count - c.gram_rank) as f64)
                }
                _ => (constrained, false, f64::NAN),
            }
        }
        "extremal-model" => {
            let m = models::build_extremal_model(&models::default_extremal_xi(tol), tol)?;
            let constrained = check_scheme_thirdlaw(&m.scheme, tol).constrained;
            let inst = m.scheme.to_instrument(tol)?;
            let induced = inst.induced_observable(tol)?;
            let ext = check_extremal(&inst, tol);
            let identity = check_extremal_scheme_identity(&m.scheme, &m.instrument, tol)?;
            let ranks = classify(&induced, tol).per_effect_ranks;
            let mismatch = induced.distance(e);
            let holds = property == Property::Extremal
                && ext.extremal
                && identity.holds
                && mismatch < 1e-9
                && rank_bound_holds(&ranks, induced.dim());
            (constrained, holds, mismatch.max(identity.residual))
        }
        _ => (false, false, f64::NAN),
    };
    Ok(WitnessReport { name: name.to_string(), observable_class: class, constrained, property_holds: holds, residual })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub verdict: Possibility,
    /// Theorem anchor for ✗, witness name for ✓.
    pub basis: String,
    pub witness: Option<WitnessReport>,
    pub expected: bool,
}

impl Cell {
    pub fn possible(&self) -> bool {
        self.verdict == Possibility::Possible && self.witness.as_ref().is_some_and(WitnessReport::verified)
    }

    pub fn matches(&self) -> bool {
        match self.verdict {
            Possibility::Possible => self.expected && self.possible(),
            Possibility::Impossible => !self.expected,
            Possibility::NotCovered => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub property: Property,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1 {
    pub columns: Vec<ObservableClass>,
    pub classifications: Vec<ObservableClassification>,
    pub predicates: Vec<TheoremPredicates>,
    pub rows: Vec<Row>,
}

impl Table1 {
    pub fn matches_expected(&self) -> bool {
        self.rows.iter().all(|r| r.cells.iter().all(Cell::matches))
    }

    pub fn mismatches(&self) -> Vec<(Property, ObservableClass)> {
        let mut out = Vec::new();
        for r in &self.rows {
            for (cell, class) in r.cells.iter().zip(&self.columns) {
                if !cell.matches() {
                    out.push((r.property, *class));
                }
            }
        }
        out
    }

    pub fn symbols(&self) -> Vec<Vec<&'static str>> {
        self.rows
            .iter()
            .map(|r| {
                r.cells
                    .iter()
                    .map(|c| match c.verdict {
                        Possibility::Possible if c.possible() => "✓",
                        Possibility::Possible => "!",
                        v => v.symbol(),
                    })
                    .collect()
            })
            .collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{:<22}", ""));
        for c in &self.columns {
            out.push_str(&format!("{:>20}", c.title()));
        }
        out.push('\n');
        for (r, symbols) in self.rows.iter().zip(self.symbols()) {
            out.push_str(&format!("{:<22}", format!("{} {}", r.property.roman(), r.property.name())));
            for s in symbols {
                out.push_str(&format!("{:>20}", s));
            }
            out.push('\n');
        }
        out
    }
}

/// Resolves every cell: impossibility from the theorem predicates, possibility
/// from a verified witness whose observable lies in the column class.
pub fn reproduce_table1(tol: &Tolerances) -> Result<Table1> {
    let reps = ObservableClass::ALL.iter().map(|&c| representative(c, tol)).collect::<Result<Vec<_>>>()?;
    let classes: Vec<ObservableClassification> = reps.iter().map(|e| classify(e, tol)).collect();
    let preds: Vec<TheoremPredicates> =
        reps.iter().zip(&classes).map(|(e, c)| theorem_predicates(c, e.dim(), tol)).collect();

    let mut rows = Vec::with_capacity(5);
    for (ri, &property) in Property::ALL.iter().enumerate() {
        let mut cells = Vec::with_capacity(4);
        for (ci, &class) in ObservableClass::ALL.iter().enumerate() {
            let own = preds[ci].get(property);
            let expected = EXPECTED[ri][ci];
            let cell = match own.verdict {
                Possibility::Impossible => {
                    Cell { verdict: Possibility::Impossible, basis: own.basis.clone(), witness: None, expected }
                }
                _ => {
                    let donor = std::iter::once(ci).chain((0..reps.len()).filter(|&k| k != ci)).find(|&k| {
                        class.contains(&classes[k]) && preds[k].get(property).verdict == Possibility::Possible
                    });
                    match donor {
                        Some(k) => {
                            let name = preds[k].get(property).basis.clone();
                            let w = verify_witness(&name, &reps[k], ObservableClass::ALL[k], property, tol)?;
                            Cell { verdict: Possibility::Possible, basis: name, witness: Some(w), expected }
                        }
                        None => {
                            Cell { verdict: Possibility::NotCovered, basis: own.basis.clone(), witness: None, expected }
                        }
                    }
                }
            };
            cells.push(cell);
        }
        rows.push(Row { property, cells });
    }
    Ok(Table1 { columns: ObservableClass::ALL.to_vec(), classifications: classes, predicates: preds, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_matches_published_matrix() {
        let t = reproduce_table1(&Tolerances::default()).unwrap();
        assert!(t.mismatches().is_empty(), "{:?}\n{}", t.mismatches(), t.render());
    }

    #[test]
    fn norm1_extremal_cell_borrows_sharp_witness() {
        let t = reproduce_table1(&Tolerances::default()).unwrap();
        let cell = &t.rows[4].cells[2];
        assert_eq!(cell.basis, "extremal-model");
        assert_eq!(cell.witness.as_ref().unwrap().observable_class, ObservableClass::Sharp);
    }

    #[test]
    fn representatives_lie_in_their_class() {
        let tol = Tolerances::default();
        for class in ObservableClass::ALL {
            assert!(class.contains(&classify(&representative(class, &tol).unwrap(), &tol)));
        }
    }
}
