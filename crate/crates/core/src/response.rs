use serde::Serialize;

use crate::error::{Error, Result};
use crate::partition::{CoarseGrainedPovm, RegionLabel};
use crate::pauli::Effect;
use crate::tolerance::NEGATIVE_ENTRY;

/// Response function `p(a|A)` over the regions of a coarse-grained parent.
///
/// Rows are outcomes, columns are region labels. Only the first `physical`
/// rows belong to the simulated measurement; any further rows (pseudo
/// outcomes) are bookkeeping and are excluded from normalization checks.
#[derive(Clone, Debug, Serialize)]
pub struct ResponseTable {
    outcomes: Vec<String>,
    labels: Vec<RegionLabel>,
    rows: Vec<Vec<f64>>,
    physical: usize,
}

impl ResponseTable {
    pub fn new(outcomes: Vec<String>, labels: Vec<RegionLabel>, rows: Vec<Vec<f64>>) -> Self {
        let physical = outcomes.len();
        Self::with_physical(outcomes, labels, rows, physical)
    }

    pub fn with_physical(
        outcomes: Vec<String>,
        labels: Vec<RegionLabel>,
        rows: Vec<Vec<f64>>,
        physical: usize,
    ) -> Self {
        assert_eq!(outcomes.len(), rows.len());
        assert!(rows.iter().all(|r| r.len() == labels.len()));
        assert!(physical <= outcomes.len());
        ResponseTable {
            outcomes,
            labels,
            rows,
            physical,
        }
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn labels(&self) -> &[RegionLabel] {
        &self.labels
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.rows[a]
    }

    pub fn physical(&self) -> usize {
        self.physical
    }

    /// `p(a|label)`, zero for labels outside the table.
    pub fn get(&self, a: usize, label: RegionLabel) -> f64 {
        self.column(label).map_or(0.0, |j| self.rows[a][j])
    }

    fn column(&self, label: RegionLabel) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    pub fn column_sum(&self, label: RegionLabel) -> f64 {
        (0..self.physical).map(|a| self.get(a, label)).sum()
    }

    pub fn min_entry(&self) -> f64 {
        self.rows.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_entry(&self) -> f64 {
        self.rows.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest `|sum_a p(a|A) - 1|` over the physical rows.
    pub fn normalization_violation(&self) -> f64 {
        self.labels
            .iter()
            .map(|&l| (self.column_sum(l) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Errors on the first entry below `-tol`.
    pub fn check_nonnegative(&self, tol: f64) -> Result<()> {
        for (a, row) in self.rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v < -tol {
                    return Err(Error::NegativeResponse {
                        outcome: self.outcomes[a].clone(),
                        label: self.labels[j].to_string(),
                        value: v,
                    });
                }
            }
        }
        Ok(())
    }

    /// `sum_A p(a|A) Pi_A` for every row.
    pub fn reconstruct(&self, parent: &CoarseGrainedPovm) -> Result<Vec<Effect>> {
        if let Some(l) = parent.labels().into_iter().find(|l| self.column(*l).is_none()) {
            return Err(Error::LabelMismatch(format!(
                "parent region {} has no response column",
                parent.label_name(l)
            )));
        }
        Ok(self
            .rows
            .iter()
            .map(|row| {
                self.labels
                    .iter()
                    .zip(row)
                    .map(|(&l, &p)| parent.effect(l) * p)
                    .sum()
            })
            .collect())
    }

    /// Max component error of the physical rows against `targets`.
    pub fn residual(&self, parent: &CoarseGrainedPovm, targets: &[Effect]) -> Result<f64> {
        if targets.len() != self.physical {
            return Err(Error::DimensionMismatch {
                expected: self.physical,
                got: targets.len(),
            });
        }
        let simulated = self.reconstruct(parent)?;
        Ok(simulated
            .iter()
            .zip(targets)
            .map(|(s, t)| s.max_abs_diff(t))
            .fold(0.0, f64::max))
    }

    /// Mixes the physical rows with the flat response `w_a`:
    /// `p'(a|A) = s p(a|A) + (1 - s) w_a`.
    pub fn folded(&self, s: f64, flat: &[f64]) -> ResponseTable {
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(a, row)| {
                row.iter()
                    .map(|&p| if a < self.physical { s * p + (1.0 - s) * flat[a] } else { p })
                    .collect()
            })
            .collect();
        ResponseTable {
            outcomes: self.outcomes.clone(),
            labels: self.labels.clone(),
            rows,
            physical: self.physical,
        }
    }
}

pub(crate) fn check_table(table: &ResponseTable) -> Result<()> {
    table.check_nonnegative(NEGATIVE_ENTRY)
}
