use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical thresholds shared by every decision procedure.
///
/// Rank-type decisions are relative to `max(1, largest singular value)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub atol_equality: f64,
    pub rank_threshold: f64,
    pub kernel_threshold: f64,
    pub cluster_gap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { atol_equality: 1e-9, rank_threshold: 1e-8, kernel_threshold: 1e-8, cluster_gap: 1e-6 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("atol_equality", self.atol_equality),
            ("rank_threshold", self.rank_threshold),
            ("kernel_threshold", self.kernel_threshold),
            ("cluster_gap", self.cluster_gap),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v < 1e-2) {
                return Err(Error::InvalidTolerances(format!("{name} = {v} must lie in (0, 1e-2)")));
            }
        }
        Ok(())
    }

    pub fn with_atol(mut self, atol: f64) -> Self {
        self.atol_equality = atol;
        self
    }

    pub fn with_rank_threshold(mut self, thr: f64) -> Self {
        self.rank_threshold = thr;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        Tolerances::default().validate().unwrap();
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(Tolerances::default().with_atol(0.0).validate().is_err());
        assert!(Tolerances::default().with_rank_threshold(0.5).validate().is_err());
    }
}
