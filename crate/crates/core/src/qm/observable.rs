use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, ComplexMatrix, Tolerances};

/// Finite POVM with string outcome labels kept in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    labels: Vec<String>,
    effects: Vec<ComplexMatrix>,
}

impl Observable {
    pub fn new(labels: Vec<String>, effects: Vec<ComplexMatrix>, tol: &Tolerances) -> Result<Self> {
        let invalid = |reason: String, residual: f64| Error::InvalidObservable { reason, residual };
        if effects.is_empty() {
            return Err(invalid("no effects".into(), 0.0));
        }
        if labels.len() != effects.len() {
            return Err(invalid(format!("{} labels for {} effects", labels.len(), effects.len()), 0.0));
        }
        let mut uniq = labels.clone();
        uniq.sort();
        uniq.dedup();
        if uniq.len() != labels.len() {
            return Err(invalid("outcome labels are not unique".into(), 0.0));
        }
        let d = effects[0].rows();
        let mut sum = ComplexMatrix::zeros(d, d);
        for (label, e) in labels.iter().zip(&effects) {
            if e.rows() != d || e.cols() != d {
                return Err(Error::DimensionMismatch(format!(
                    "effect {label} is {}x{}, expected {d}x{d}",
                    e.rows(),
                    e.cols()
                )));
            }
            let spec = hermitian_eig(e, tol)
                .map_err(|_| invalid(format!("effect {label} is not Hermitian"), e.hermiticity_defect()))?;
            if spec.min() < -tol.atol_equality {
                return Err(invalid(format!("effect {label} has a negative eigenvalue"), -spec.min()));
            }
            if spec.max() > 1.0 + tol.atol_equality {
                return Err(invalid(format!("effect {label} has an eigenvalue above 1"), spec.max() - 1.0));
            }
            if spec.max() <= tol.rank_threshold {
                return Err(invalid(format!("effect {label} is zero"), spec.max()));
            }
            sum += e;
        }
        let residual = sum.distance(&ComplexMatrix::identity(d));
        if residual > tol.atol_equality * d as f64 {
            return Err(invalid("effects do not sum to the identity".into(), residual));
        }
        Ok(Self { labels, effects: effects.into_iter().map(|e| e.hermitian_part()).collect() })
    }

    /// Labels outcomes `"0"`, `"1"`, ...
    pub fn from_effects(effects: Vec<ComplexMatrix>, tol: &Tolerances) -> Result<Self> {
        let labels = (0..effects.len()).map(|x| x.to_string()).collect();
        Self::new(labels, effects, tol)
    }

    pub fn new_unchecked(labels: Vec<String>, effects: Vec<ComplexMatrix>) -> Self {
        Self { labels, effects }
    }

    /// Projection-valued measurement in the computational basis.
    pub fn computational(dim: usize) -> Self {
        let effects = (0..dim).map(|i| ComplexMatrix::unit(dim, i, i)).collect();
        Self { labels: (0..dim).map(|x| x.to_string()).collect(), effects }
    }

    pub fn dim(&self) -> usize {
        self.effects[0].rows()
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    pub fn effect(&self, x: usize) -> &ComplexMatrix {
        &self.effects[x]
    }

    /// Largest pairwise commutator norm.
    pub fn max_commutator(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                worst = worst.max(self.effects[i].commutator(&self.effects[j]).frobenius_norm());
            }
        }
        worst
    }

    /// Largest commutator norm between effects of `self` and `other`.
    pub fn max_cross_commutator(&self, other: &Observable) -> f64 {
        let mut worst: f64 = 0.0;
        for a in &self.effects {
            for b in &other.effects {
                worst = worst.max(a.commutator(b).frobenius_norm());
            }
        }
        worst
    }

    pub fn distance(&self, other: &Observable) -> f64 {
        if self.len() != other.len() || self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.effects.iter().zip(&other.effects).map(|(a, b)| a.distance(b)).fold(0.0, f64::max)
    }
}
