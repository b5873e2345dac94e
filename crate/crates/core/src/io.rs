//! JSON form of POVMs.
//!
//! ```json
//! {"effects": [{"mu": 0.5, "mhat": [0, 0, 1]}, {"mu": 0.5, "mhat": [0, 0, -1]}], "r": 1.0}
//! ```
//!
//! Effects may instead be given in Pauli form `{"t": 0.5, "b": [0, 0, 0.5]}`.
//! `r` scales the Bloch part of rank-one entries and defaults to 1.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Effect, ExtremalPovm, Outcome, Povm, Vec3};
use crate::tolerance::READ_NORMALIZE;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EffectSpec {
    RankOne { mu: f64, mhat: [f64; 3] },
    Pauli { t: f64, b: [f64; 3] },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PovmFile {
    pub effects: Vec<EffectSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
}

impl PovmFile {
    pub fn from_extremal(povm: &ExtremalPovm, r: f64) -> Self {
        PovmFile {
            effects: povm
                .outcomes()
                .iter()
                .map(|o| EffectSpec::RankOne {
                    mu: o.mu,
                    mhat: [o.mhat.x, o.mhat.y, o.mhat.z],
                })
                .collect(),
            r: Some(r),
        }
    }

    pub fn from_povm(povm: &Povm) -> Self {
        PovmFile {
            effects: povm
                .effects
                .iter()
                .map(|e| EffectSpec::Pauli {
                    t: e.t,
                    b: [e.b.x, e.b.y, e.b.z],
                })
                .collect(),
            r: None,
        }
    }

    pub fn radius(&self) -> f64 {
        self.r.unwrap_or(1.0)
    }

    /// Rank-one entries as an extremal POVM; errors on Pauli-form entries.
    pub fn extremal(&self) -> Result<ExtremalPovm> {
        let outcomes = self
            .effects
            .iter()
            .map(|e| match e {
                EffectSpec::RankOne { mu, mhat } => Ok(Outcome {
                    mu: *mu,
                    mhat: unit(*mhat)?,
                }),
                EffectSpec::Pauli { .. } => Err(Error::InvalidPovm {
                    reason: "extremal POVMs need {mu, mhat} entries".into(),
                    violation: 0.0,
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        ExtremalPovm::new(outcomes)
    }

    /// All entries as effects, with `r` applied to rank-one entries.
    pub fn povm(&self) -> Result<Povm> {
        let r = self.radius();
        let effects = self
            .effects
            .iter()
            .map(|e| match e {
                EffectSpec::RankOne { mu, mhat } => Effect::from_bloch(*mu, unit(*mhat)?, r),
                EffectSpec::Pauli { t, b } => Ok(Effect::new(*t, Vec3::from(*b))),
            })
            .collect::<Result<Vec<_>>>()?;
        Povm::validated(effects)
    }
}

/// Normalizes vectors within `1e-9` of unit length and rejects the rest.
fn unit(v: [f64; 3]) -> Result<Vec3> {
    let v = Vec3::from(v);
    let norm = v.norm();
    if (norm - 1.0).abs() > READ_NORMALIZE {
        return Err(Error::NonUnitVector { norm });
    }
    Ok(v / norm)
}

pub fn parse_povm_file(text: &str) -> Result<PovmFile> {
    Ok(serde_json::from_str(text)?)
}

pub fn read_povm_file(path: &Path) -> Result<PovmFile> {
    parse_povm_file(&std::fs::read_to_string(path)?)
}
