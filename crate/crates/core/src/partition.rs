//! Coarse-graining of the continuous parent POVM `(1/4pi)(I + n . sigma)`
//! into sign-pattern regions of a finite set of directions.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use log::warn;
use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{check_unit, Effect, Povm, Vec3};
use crate::polygon::exact_polygon_effect;
use crate::quadrature::{random_rotation, QuadratureGrid};
use crate::tolerance::{BOUNDARY, COPLANAR, STRUCTURAL};

/// Seed base for the rotations tried when grid nodes sit on a region boundary.
pub const ROTATION_SEED: u64 = 0x5eed_0b0d;
const MAX_ROTATIONS: u64 = 16;
/// Regions with less normalized area than this are outside the support.
const SUPPORT_AREA: f64 = 1e-13;

/// Set of directions that are "on" (`m_k . n > 0`) in a region, as a bitmask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RegionLabel(pub u32);

impl RegionLabel {
    pub fn from_indices(indices: &[usize]) -> Self {
        RegionLabel(indices.iter().fold(0, |acc, &i| acc | (1 << i)))
    }

    pub fn singleton(i: usize) -> Self {
        RegionLabel(1 << i)
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn complement(self, n: usize) -> Self {
        RegionLabel(!self.0 & ((1u32 << n) - 1))
    }

    pub fn indices(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.contains(i))
    }

    pub fn count(self) -> u32 {
        self.0.count_ones()
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.indices().map(|i| (i + 1).to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// How region effects are computed.
#[derive(Clone, Debug)]
pub enum Backend {
    Quadrature(QuadratureGrid),
    ExactPolygon,
}

impl Backend {
    pub fn name(&self) -> String {
        match self {
            Backend::Quadrature(g) => format!("quadrature:{}", g.name()),
            Backend::ExactPolygon => "polygon".to_string(),
        }
    }
}

/// A finite parent POVM indexed by region labels.
#[derive(Clone, Debug, Serialize)]
pub struct CoarseGrainedPovm {
    directions: Vec<Vec3>,
    names: Vec<String>,
    entries: BTreeMap<RegionLabel, Effect>,
    /// Grid rotation seed actually used, if the quadrature grid was rotated.
    rotation_seed: Option<u64>,
}

impl CoarseGrainedPovm {
    pub fn from_entries(directions: Vec<Vec3>, entries: BTreeMap<RegionLabel, Effect>) -> Self {
        let names = (1..=directions.len()).map(|i| i.to_string()).collect();
        CoarseGrainedPovm {
            directions,
            names,
            entries,
            rotation_seed: None,
        }
    }

    /// Replaces the display names of the directions (default `"1"`, `"2"`, ...).
    pub fn with_names(mut self, names: Vec<String>) -> Self {
        assert_eq!(names.len(), self.directions.len());
        self.names = names;
        self
    }

    pub fn directions(&self) -> &[Vec3] {
        &self.directions
    }

    pub fn entries(&self) -> &BTreeMap<RegionLabel, Effect> {
        &self.entries
    }

    pub fn labels(&self) -> Vec<RegionLabel> {
        self.entries.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Effect for `label`, zero when the region is not in the support.
    pub fn effect(&self, label: RegionLabel) -> Effect {
        self.entries.get(&label).copied().unwrap_or(Effect::ZERO)
    }

    pub fn rotation_seed(&self) -> Option<u64> {
        self.rotation_seed
    }

    pub fn total(&self) -> Effect {
        self.entries.values().sum()
    }

    /// Largest deviation of the summed effects from the identity.
    pub fn completeness_violation(&self) -> f64 {
        self.total().max_abs_diff(&Effect::scalar(1.0))
    }

    pub fn label_name(&self, label: RegionLabel) -> String {
        let parts: Vec<&str> = label.indices().map(|i| self.names[i].as_str()).collect();
        format!("{{{}}}", parts.join(","))
    }

    pub fn to_povm(&self) -> Povm {
        Povm::new(self.entries.values().copied().collect())
    }
}

/// Labels of every region with positive area, from exact geometry.
pub fn region_support(directions: &[Vec3]) -> Vec<RegionLabel> {
    let n = directions.len();
    (0..1u32 << n)
        .map(RegionLabel)
        .filter(|&l| exact_polygon_effect(l, directions).t > SUPPORT_AREA)
        .collect()
}

/// Coarse-grains the continuous parent over the grid.
pub fn coarse_grain(directions: &[Vec3], grid: &QuadratureGrid) -> Result<CoarseGrainedPovm> {
    coarse_grain_with(directions, &Backend::Quadrature(grid.clone()))
}

/// Exact coarse-graining via spherical polygons.
pub fn coarse_grain_exact(directions: &[Vec3]) -> Result<CoarseGrainedPovm> {
    coarse_grain_with(directions, &Backend::ExactPolygon)
}

pub fn coarse_grain_with(directions: &[Vec3], backend: &Backend) -> Result<CoarseGrainedPovm> {
    if directions.is_empty() || directions.len() > 16 {
        return Err(Error::OutcomeCount(directions.len()));
    }
    for m in directions {
        check_unit(m, STRUCTURAL)?;
    }
    let support = region_support(directions);
    match backend {
        Backend::ExactPolygon => {
            let entries = support
                .into_iter()
                .map(|l| (l, exact_polygon_effect(l, directions)))
                .collect();
            Ok(CoarseGrainedPovm::from_entries(directions.to_vec(), entries))
        }
        Backend::Quadrature(grid) => quadrature_coarse_grain(directions, grid, support),
    }
}

fn node_labels(grid: &QuadratureGrid, directions: &[Vec3]) -> Option<Vec<RegionLabel>> {
    grid.nodes()
        .iter()
        .map(|l| {
            let mut bits = 0u32;
            for (k, m) in directions.iter().enumerate() {
                let d = m.dot(l);
                if d.abs() < BOUNDARY {
                    return None;
                }
                if d > 0.0 {
                    bits |= 1 << k;
                }
            }
            Some(RegionLabel(bits))
        })
        .collect()
}

fn quadrature_coarse_grain(
    directions: &[Vec3],
    grid: &QuadratureGrid,
    support: Vec<RegionLabel>,
) -> Result<CoarseGrainedPovm> {
    for attempt in 0..=MAX_ROTATIONS {
        let (rotated, seed) = if attempt == 0 {
            (None, None)
        } else {
            let seed = ROTATION_SEED + attempt;
            (Some(grid.rotated(&random_rotation(seed))), Some(seed))
        };
        let g = rotated.as_ref().unwrap_or(grid);
        let Some(labels) = node_labels(g, directions) else {
            continue;
        };
        if let Some(seed) = seed {
            warn!(
                "grid {} has nodes on a region boundary; using rotation seed {seed}",
                grid.name()
            );
        }
        let mut entries: BTreeMap<RegionLabel, Effect> =
            support.iter().map(|&l| (l, Effect::ZERO)).collect();
        for ((node, w), label) in g.nodes().iter().zip(g.weights()).zip(labels) {
            let slot = entries.entry(label).or_insert_with(|| {
                warn!("grid node landed in region {label} outside the exact support");
                Effect::ZERO
            });
            *slot += Effect::new(*w, node * *w);
        }
        let mut out = CoarseGrainedPovm::from_entries(directions.to_vec(), entries);
        out.rotation_seed = seed;
        return Ok(out);
    }
    Err(Error::InvalidGrid(format!(
        "every rotation of {} left nodes on a region boundary",
        grid.name()
    )))
}

/// Coplanar triple after validation: unit vectors in a common plane that
/// positively span it.
#[derive(Clone, Copy, Debug)]
pub struct CoplanarTriple {
    pub directions: [Vec3; 3],
    pub normal: Vec3,
    /// Distance of the input from the best-fit plane.
    pub residual: f64,
}

/// Checks that three unit vectors are coplanar, pairwise non-parallel, and
/// surround the origin, projecting them onto their best-fit plane.
pub fn validate_coplanar(directions: [Vec3; 3]) -> Result<CoplanarTriple> {
    for m in &directions {
        check_unit(m, STRUCTURAL)?;
    }
    let rows = Matrix3::from_rows(&[
        directions[0].transpose(),
        directions[1].transpose(),
        directions[2].transpose(),
    ]);
    let svd = rows.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (k, &smallest) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("three singular values");
    if smallest > COPLANAR {
        return Err(Error::NotCoplanar { residual: smallest });
    }
    let normal: Vec3 = v_t.row(k).transpose().normalize();
    let mut projected = directions;
    for m in projected.iter_mut() {
        *m = (*m - normal * normal.dot(m)).normalize();
    }
    for i in 0..3 {
        for j in i + 1..3 {
            let d = projected[i].dot(&projected[j]);
            if d > 1.0 - STRUCTURAL {
                return Err(Error::ParallelDirections(i, j));
            }
            if d < -1.0 + STRUCTURAL {
                return Err(Error::Degenerate(format!(
                    "directions {} and {} are antipodal",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    let (e1, e2) = crate::pauli::orthonormal_pair(&normal);
    let mut angles: Vec<f64> = projected
        .iter()
        .map(|m| m.dot(&e2).atan2(m.dot(&e1)))
        .collect();
    angles.sort_by(f64::total_cmp);
    let gaps = [
        angles[1] - angles[0],
        angles[2] - angles[1],
        2.0 * PI - (angles[2] - angles[0]),
    ];
    if gaps.iter().any(|&g| g >= PI - STRUCTURAL) {
        return Err(Error::UnbalancedDirections);
    }
    Ok(CoplanarTriple {
        directions: projected,
        normal,
        residual: smallest,
    })
}

/// Closed-form six-region parent for a coplanar triple. Region `{a}`
/// (only `m_a` on) and its complement are the lunes bounded by the other two
/// great circles; `alpha_a = theta_a / 2pi` is their weight.
pub fn coarse_grain_coplanar3(directions: [Vec3; 3]) -> Result<CoarseGrainedPovm> {
    let triple = validate_coplanar(directions)?;
    let m = triple.directions;
    let mut entries = BTreeMap::new();
    for a in 0..3 {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        let theta = (-m[b].dot(&m[c])).clamp(-1.0, 1.0).acos();
        let axis = (m[b] + m[c]).normalize();
        let lean = axis * ((theta / 2.0).sin() / 4.0);
        let alpha = theta / (2.0 * PI);
        let single = RegionLabel::singleton(a);
        entries.insert(single, Effect::new(alpha, -lean));
        entries.insert(single.complement(3), Effect::new(alpha, lean));
    }
    Ok(CoarseGrainedPovm::from_entries(m.to_vec(), entries))
}

/// `alpha_a = theta_a / 2pi` for a coplanar triple.
pub fn lune_weights(directions: [Vec3; 3]) -> Result<[f64; 3]> {
    let m = validate_coplanar(directions)?.directions;
    Ok(std::array::from_fn(|a| {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        (-m[b].dot(&m[c])).clamp(-1.0, 1.0).acos() / (2.0 * PI)
    }))
}
