//! Quadrature rules on the unit sphere, normalized to total weight one.
//!
//! Every grid is required to be closed under `l -> -l` with equal weights,
//! which makes the first moment vanish and keeps coarse-grained parents
//! complete to rounding.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::{Quaternion, Rotation3, UnitQuaternion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::pauli::Vec3;

/// Environment variable naming a directory that overrides the built-in
/// Lebedev tables (`lebedev_NNN.txt`).
pub const GRID_DIR_ENV: &str = "STEERKIT_GRID_DIR";

struct LebedevTable {
    order: u32,
    nodes: usize,
    sha256: &'static str,
    data: &'static str,
}

const LEBEDEV_TABLES: &[LebedevTable] = &[
    LebedevTable {
        order: 17,
        nodes: 110,
        sha256: "ae85e0950a6044d33051ef510b999598991f3eb2ec00d8aa5f70b54ac2df6c4c",
        data: include_str!("../data/lebedev_017.txt"),
    },
    LebedevTable {
        order: 31,
        nodes: 350,
        sha256: "33a26f22f10b840b6e8430ed1823015d39d43bfb619bc7d1db61fd2737b869fe",
        data: include_str!("../data/lebedev_031.txt"),
    },
    LebedevTable {
        order: 59,
        nodes: 1202,
        sha256: "a2bd0d73ffad54f9a6c066417af5c964a905c2cbe73fdd63e9aeb6dee73eb195",
        data: include_str!("../data/lebedev_059.txt"),
    },
    LebedevTable {
        order: 83,
        nodes: 2354,
        sha256: "7b8a5ca32d696f327093b5ec550a3b537b9cefc9b9fd57a580ac8aff4db35af9",
        data: include_str!("../data/lebedev_083.txt"),
    },
    LebedevTable {
        order: 131,
        nodes: 5810,
        sha256: "b1057688c8ae4bb1343f3d6c317bd642b46688d1bc5afca8a934b8a3f33d8e5f",
        data: include_str!("../data/lebedev_131.txt"),
    },
];

/// Orders of the Lebedev rules shipped with the crate.
pub fn lebedev_orders() -> Vec<u32> {
    LEBEDEV_TABLES.iter().map(|t| t.order).collect()
}

/// Nodes on the unit sphere with positive weights summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureGrid {
    name: String,
    nodes: Vec<Vec3>,
    weights: Vec<f64>,
}

impl QuadratureGrid {
    /// Validates and normalizes a node/weight list.
    pub fn new(name: impl Into<String>, nodes: Vec<Vec3>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: nodes.len(),
                got: weights.len(),
            });
        }
        if nodes.is_empty() {
            return Err(Error::InvalidGrid("grid has no nodes".into()));
        }
        if let Some((i, n)) = nodes
            .iter()
            .enumerate()
            .find(|(_, n)| (n.norm() - 1.0).abs() > 1e-12)
        {
            return Err(Error::InvalidGrid(format!(
                "node {i} has norm {}",
                n.norm()
            )));
        }
        if let Some(i) = weights.iter().position(|&w| w.is_nan() || w <= 0.0 || w.is_infinite()) {
            return Err(Error::InvalidGrid(format!(
                "weight {i} = {} is not positive",
                weights[i]
            )));
        }
        let total: f64 = weights.iter().sum();
        let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let grid = QuadratureGrid {
            name: name.into(),
            nodes,
            weights,
        };
        grid.check_antipodal()?;
        Ok(grid)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Approximates `(1/4pi) int f(n) dOmega`.
    pub fn integrate<F: Fn(&Vec3) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(n, w)| w * f(n))
            .sum()
    }

    pub fn first_moment(&self) -> Vec3 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(Vec3::zeros(), |acc, (n, w)| acc + n * *w)
    }

    /// The same rule with every node rotated.
    pub fn rotated(&self, rotation: &Rotation3<f64>) -> QuadratureGrid {
        QuadratureGrid {
            name: format!("{}@rotated", self.name),
            nodes: self.nodes.iter().map(|n| (rotation * n).normalize()).collect(),
            weights: self.weights.clone(),
        }
    }

    /// SHA-256 over the little-endian node and weight bytes.
    pub fn checksum(&self) -> String {
        let mut hasher = Sha256::new();
        for (n, w) in self.nodes.iter().zip(&self.weights) {
            for v in [n.x, n.y, n.z, *w] {
                hasher.update(v.to_le_bytes());
            }
        }
        to_hex(&hasher.finalize())
    }

    pub fn summary(&self) -> GridSummary {
        GridSummary {
            name: self.name.clone(),
            nodes: self.len(),
            checksum: self.checksum(),
        }
    }

    fn check_antipodal(&self) -> Result<()> {
        let key = |v: &Vec3| {
            (
                (v.x * 1e9).round() as i64,
                (v.y * 1e9).round() as i64,
                (v.z * 1e9).round() as i64,
            )
        };
        let index: HashMap<_, usize> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (key(n), i))
            .collect();
        for (i, n) in self.nodes.iter().enumerate() {
            let mirror = index.get(&key(&-n)).copied().or_else(|| {
                self.nodes
                    .iter()
                    .position(|m| (m + n).amax() < 1e-10)
            });
            let Some(j) = mirror else {
                return Err(Error::InvalidGrid(format!(
                    "node {i} has no antipodal partner"
                )));
            };
            if (self.weights[i] - self.weights[j]).abs() > 1e-12 * self.weights[i].max(1e-300) + 1e-15
            {
                return Err(Error::InvalidGrid(format!(
                    "antipodal nodes {i} and {j} carry different weights"
                )));
            }
        }
        Ok(())
    }
}

/// Name, size and checksum of a grid, for report headers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSummary {
    pub name: String,
    pub nodes: usize,
    pub checksum: String,
}

/// Gauss-Legendre in `cos(theta)` times a uniform azimuthal rule.
///
/// The azimuthal count must be even so that the grid is antipodally closed;
/// the Legendre nodes are symmetrized explicitly.
pub fn product_grid(n_polar: usize, n_azimuth: usize) -> Result<QuadratureGrid> {
    if n_polar < 2 {
        return Err(Error::InvalidGrid(format!(
            "need at least 2 polar nodes, got {n_polar}"
        )));
    }
    if n_azimuth < 2 || !n_azimuth.is_multiple_of(2) {
        return Err(Error::InvalidGrid(format!(
            "azimuthal count must be even and at least 2, got {n_azimuth}"
        )));
    }
    let rule = GaussLegendre::new(n_polar)
        .map_err(|e| Error::InvalidGrid(format!("Gauss-Legendre rule: {e}")))?;
    let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    for k in 0..n_polar / 2 {
        let j = n_polar - 1 - k;
        let x = 0.5 * (pairs[j].0 - pairs[k].0);
        let w = 0.5 * (pairs[j].1 + pairs[k].1);
        pairs[k] = (-x, w);
        pairs[j] = (x, w);
    }
    if n_polar % 2 == 1 {
        pairs[n_polar / 2].0 = 0.0;
    }

    let mut nodes = Vec::with_capacity(n_polar * n_azimuth);
    let mut weights = Vec::with_capacity(n_polar * n_azimuth);
    let dphi = std::f64::consts::TAU / n_azimuth as f64;
    for &(z, w) in &pairs {
        let rho = (1.0 - z * z).max(0.0).sqrt();
        for j in 0..n_azimuth {
            let phi = (j as f64 + 0.5) * dphi;
            nodes.push(Vec3::new(rho * phi.cos(), rho * phi.sin(), z).normalize());
            weights.push(w);
        }
    }
    QuadratureGrid::new(format!("product:{n_polar}x{n_azimuth}"), nodes, weights)
}

/// Loads a shipped Lebedev rule, or the file `lebedev_NNN.txt` from
/// `$STEERKIT_GRID_DIR` when that variable is set.
pub fn load_lebedev(order: u32) -> Result<QuadratureGrid> {
    let table = LEBEDEV_TABLES
        .iter()
        .find(|t| t.order == order)
        .ok_or(Error::UnknownLebedevOrder(order))?;
    let name = format!("lebedev:{order}");

    let grid = match std::env::var_os(GRID_DIR_ENV) {
        Some(dir) => {
            let path = Path::new(&dir).join(format!("lebedev_{order:03}.txt"));
            let text = std::fs::read_to_string(&path)?;
            parse_grid(&text, &name)?
        }
        None => {
            let digest = to_hex(&Sha256::digest(table.data.as_bytes()));
            if digest != table.sha256 {
                return Err(Error::InvalidGrid(format!(
                    "checksum mismatch for Lebedev order {order}"
                )));
            }
            parse_grid(table.data, &name)?
        }
    };
    if grid.len() != table.nodes {
        return Err(Error::InvalidGrid(format!(
            "Lebedev order {order} should have {} nodes, found {}",
            table.nodes,
            grid.len()
        )));
    }
    Ok(grid)
}

/// Parses rows of `x y z w`; blank lines and lines starting with `#` are
/// skipped. Nodes are renormalized if within 1e-9 of unit length.
pub fn parse_grid(text: &str, name: &str) -> Result<QuadratureGrid> {
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(f64::from_str)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::GridParse {
                line: i + 1,
                msg: e.to_string(),
            })?;
        if vals.len() != 4 {
            return Err(Error::GridParse {
                line: i + 1,
                msg: format!("expected 4 columns, found {}", vals.len()),
            });
        }
        let n = Vec3::new(vals[0], vals[1], vals[2]);
        let norm = n.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::GridParse {
                line: i + 1,
                msg: format!("node norm {norm} is not 1"),
            });
        }
        nodes.push(n / norm);
        weights.push(vals[3]);
    }
    QuadratureGrid::new(name, nodes, weights)
}

pub fn read_grid_file(path: &Path) -> Result<QuadratureGrid> {
    let text = std::fs::read_to_string(path)?;
    parse_grid(&text, &format!("file:{}", path.display()))
}

/// Uniformly random rotation (Shoemake's construction).
pub fn random_rotation(seed: u64) -> Rotation3<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (u1, u2, u3): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
    let tau = std::f64::consts::TAU;
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let q = Quaternion::new(
        b * (tau * u3).cos(),
        a * (tau * u2).sin(),
        a * (tau * u2).cos(),
        b * (tau * u3).sin(),
    );
    UnitQuaternion::from_quaternion(q).to_rotation_matrix()
}

/// Textual grid selector: `lebedev:131`, `product:64x128`, `file:PATH`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum GridSpec {
    Lebedev(u32),
    Product(usize, usize),
    File(PathBuf),
}

impl GridSpec {
    pub fn load(&self) -> Result<QuadratureGrid> {
        match self {
            GridSpec::Lebedev(order) => load_lebedev(*order),
            GridSpec::Product(p, a) => product_grid(*p, *a),
            GridSpec::File(path) => read_grid_file(path),
        }
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::GridSpec(s.to_string());
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "lebedev" => rest.parse().map(GridSpec::Lebedev).map_err(|_| bad()),
            "product" => {
                let (p, a) = rest.split_once('x').ok_or_else(bad)?;
                Ok(GridSpec::Product(
                    p.parse().map_err(|_| bad())?,
                    a.parse().map_err(|_| bad())?,
                ))
            }
            "file" if !rest.is_empty() => Ok(GridSpec::File(PathBuf::from(rest))),
            _ => Err(bad()),
        }
    }
}

impl From<GridSpec> for String {
    fn from(spec: GridSpec) -> String {
        spec.to_string()
    }
}

impl TryFrom<String> for GridSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridSpec::Lebedev(order) => write!(f, "lebedev:{order}"),
            GridSpec::Product(p, a) => write!(f, "product:{p}x{a}"),
            GridSpec::File(path) => write!(f, "file:{}", path.display()),
        }
    }
}

fn to_hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn smallest_product_grid() {
        let g = product_grid(2, 4).unwrap();
        assert_eq!(g.len(), 8);
        assert_abs_diff_eq!(g.weights().iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        assert!(g.first_moment().amax() < 1e-15);
        assert_abs_diff_eq!(g.integrate(|_| 1.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn product_grid_second_moment() {
        let g = product_grid(16, 32).unwrap();
        assert_abs_diff_eq!(g.integrate(|n| n.z * n.z), 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn product_grid_accepts_odd_polar_count() {
        let g = product_grid(3, 4).unwrap();
        assert_eq!(g.len(), 12);
        assert!(g.first_moment().amax() < 1e-15);
    }

    #[test]
    fn product_grid_rejects_odd_azimuth() {
        assert!(matches!(product_grid(4, 5), Err(Error::InvalidGrid(_))));
        assert!(matches!(product_grid(1, 4), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn lebedev_131() {
        let g = load_lebedev(131).unwrap();
        assert_eq!(g.len(), 5810);
        assert_abs_diff_eq!(g.weights().iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        assert!(g.first_moment().amax() < 1e-14);
        let m = g.integrate(|n| n.x * n.x * n.y * n.y);
        assert_abs_diff_eq!(m, 1.0 / 15.0, epsilon = 1e-12);
    }

    #[test]
    fn every_shipped_table_loads() {
        for order in lebedev_orders() {
            let g = load_lebedev(order).unwrap();
            assert_abs_diff_eq!(g.integrate(|n| n.z.powi(4)), 0.2, epsilon = 1e-12);
        }
    }

    #[test]
    fn unknown_order() {
        assert!(matches!(load_lebedev(13), Err(Error::UnknownLebedevOrder(13))));
    }

    #[test]
    fn parse_rejects_asymmetric_grid() {
        let text = "# one-sided\n1 0 0 0.5\n0 1 0 0.5\n";
        assert!(matches!(parse_grid(text, "t"), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn parse_reports_line_numbers() {
        let text = "# c\n1 0 0 0.5\n-1 0 zero 0.5\n";
        match parse_grid(text, "t") {
            Err(Error::GridParse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rotation_preserves_invariants() {
        let g = load_lebedev(17).unwrap().rotated(&random_rotation(3));
        assert!(g.first_moment().amax() < 1e-14);
        assert!(g.nodes().iter().all(|n| (n.norm() - 1.0).abs() < 1e-15));
        g.check_antipodal().unwrap();
    }

    #[test]
    fn grid_spec_round_trip() {
        for s in ["lebedev:131", "product:64x128", "file:/tmp/g.txt"] {
            let spec: GridSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
            let json = serde_json::to_string(&spec).unwrap();
            assert_eq!(json, format!("\"{s}\""));
            assert_eq!(serde_json::from_str::<GridSpec>(&json).unwrap(), spec);
        }
        assert!("lebedev".parse::<GridSpec>().is_err());
        assert!("product:3".parse::<GridSpec>().is_err());
        assert!("healpix:8".parse::<GridSpec>().is_err());
    }
}
