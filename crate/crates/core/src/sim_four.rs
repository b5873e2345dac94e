//! Four-outcome simulation at `r = 1/2`.
//!
//! Outcomes are split into two pairs. Each pair is completed to a balanced
//! three-outcome POVM by a pseudo-effect along `+m5` or `-m5`, and the two
//! three-outcome tables are glued together over an 18-region parent built on
//! the directions `m1..m4, m5, -m5`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasibility::{build_system, solve_feasible, LpOutcome};
use crate::partition::{coarse_grain_with, lune_weights, Backend, CoarseGrainedPovm, RegionLabel};
use crate::pauli::{ExtremalPovm, Outcome, Vec3};
use crate::quadrature::QuadratureGrid;
use crate::response::{check_table, ResponseTable};
use crate::sim_three::{role_column, role_table, simulate_three, xy_coefficients, Route, Simulation, XyCoefficients, HALF, ZERO_MU};
use crate::tolerance::PSEUDO_WEIGHT;

/// Bit of the `+m5` direction in 18-region labels.
pub const PLUS_BIT: usize = 4;
/// Bit of the `-m5` direction in 18-region labels.
pub const MINUS_BIT: usize = 5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pairing {
    #[default]
    #[serde(rename = "12-34")]
    P12,
    #[serde(rename = "13-24")]
    P13,
    #[serde(rename = "14-23")]
    P14,
}

impl Pairing {
    pub const ALL: [Pairing; 3] = [Pairing::P12, Pairing::P13, Pairing::P14];

    /// Zero-based outcome indices of the `+` and `-` pairs.
    pub fn pairs(self) -> ([usize; 2], [usize; 2]) {
        match self {
            Pairing::P12 => ([0, 1], [2, 3]),
            Pairing::P13 => ([0, 2], [1, 3]),
            Pairing::P14 => ([0, 3], [1, 2]),
        }
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ([a, b], [c, d]) = self.pairs();
        write!(f, "{}{}-{}{}", a + 1, b + 1, c + 1, d + 1)
    }
}

impl FromStr for Pairing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Pairing::ALL
            .into_iter()
            .find(|p| p.to_string() == s)
            .ok_or_else(|| Error::Degenerate(format!("unknown pairing `{s}` (use 12-34, 13-24 or 14-23)")))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PseudoSplit {
    pub pairing: Pairing,
    pub plus: [usize; 2],
    pub minus: [usize; 2],
    pub m5hat: Vec3,
    pub mu5: f64,
    pub kappa_plus: f64,
    pub kappa_minus: f64,
    /// Outcomes `(5+, plus[0], plus[1])` rescaled by `1/kappa_plus`.
    pub povm_plus: ExtremalPovm,
    /// Outcomes `(5-, minus[0], minus[1])` rescaled by `1/kappa_minus`.
    pub povm_minus: ExtremalPovm,
}

impl PseudoSplit {
    /// Directions of the 18-region parent: the four outcomes, then `+-m5`.
    pub fn directions(&self, povm: &ExtremalPovm) -> Vec<Vec3> {
        let mut d = povm.directions();
        d.push(self.m5hat);
        d.push(-self.m5hat);
        d
    }
}

/// `mu5 |m5> = -(mu_i m_i + mu_j m_j)` for the `+` pair of `pairing`.
pub fn pseudo_weight(povm: &ExtremalPovm, pairing: Pairing) -> f64 {
    let ([i, j], _) = pairing.pairs();
    let o = povm.outcomes();
    (o[i].mhat * o[i].mu + o[j].mhat * o[j].mu).norm()
}

pub fn pseudo_split(povm: &ExtremalPovm, pairing: Pairing) -> Result<PseudoSplit> {
    if povm.len() != 4 {
        return Err(Error::OutcomeCount(povm.len()));
    }
    let (plus, minus) = pairing.pairs();
    let o = povm.outcomes();
    let v = o[plus[0]].mhat * o[plus[0]].mu + o[plus[1]].mhat * o[plus[1]].mu;
    let mu5 = v.norm();
    if mu5 < PSEUDO_WEIGHT {
        return Err(Error::Degenerate(format!(
            "pseudo-effect weight {mu5:.3e} vanishes for pairing {pairing}"
        )));
    }
    let m5hat = -v / mu5;
    let kappa_plus = o[plus[0]].mu + o[plus[1]].mu + mu5;
    let kappa_minus = o[minus[0]].mu + o[minus[1]].mu + mu5;
    let sub = |kappa: f64, pseudo: Vec3, pair: [usize; 2]| {
        ExtremalPovm::new(vec![
            Outcome { mu: mu5 / kappa, mhat: pseudo },
            Outcome { mu: o[pair[0]].mu / kappa, mhat: o[pair[0]].mhat },
            Outcome { mu: o[pair[1]].mu / kappa, mhat: o[pair[1]].mhat },
        ])
    };
    Ok(PseudoSplit {
        pairing,
        plus,
        minus,
        m5hat,
        mu5,
        kappa_plus,
        kappa_minus,
        povm_plus: sub(kappa_plus, m5hat, plus)?,
        povm_minus: sub(kappa_minus, -m5hat, minus)?,
    })
}

pub fn build_parent_18(povm: &ExtremalPovm, split: &PseudoSplit, backend: &Backend) -> Result<CoarseGrainedPovm> {
    let parent = coarse_grain_with(&split.directions(povm), backend)?;
    let names = ["1", "2", "3", "4", "5+", "5-"].map(String::from).to_vec();
    Ok(parent.with_names(names))
}

/// Glued response over the 18-region parent. Rows are outcomes 1..4, then
/// the pseudo outcomes 5+ and 5-.
#[derive(Clone, Debug, Serialize)]
pub struct FineResponseTable {
    pub table: ResponseTable,
    pub xy_plus: XyCoefficients,
    pub xy_minus: XyCoefficients,
}

impl FineResponseTable {
    pub fn q(&self, row: usize, label: RegionLabel) -> f64 {
        self.table.get(row, label)
    }
}

pub fn build_response_four(split: &PseudoSplit, parent18: &CoarseGrainedPovm) -> Result<FineResponseTable> {
    let half = |sub: &ExtremalPovm, pseudo_bit: usize, pair: [usize; 2]| -> Result<_> {
        let d = sub.directions();
        let alphas = lune_weights([d[0], d[1], d[2]])?;
        let mus = sub.mus();
        let xy = xy_coefficients(alphas, [mus[0], mus[1], mus[2]])?;
        Ok(([pseudo_bit, pair[0], pair[1]], role_table([mus[0], mus[1], mus[2]], &xy), xy))
    };
    let (roles_p, table_p, xy_plus) = half(&split.povm_plus, PLUS_BIT, split.plus)?;
    let (roles_m, table_m, xy_minus) = half(&split.povm_minus, MINUS_BIT, split.minus)?;

    let labels = parent18.labels();
    let mut rows = vec![vec![0.0; labels.len()]; 6];
    for (j, &l) in labels.iter().enumerate() {
        let cp = role_column(l, &roles_p)?;
        let cm = role_column(l, &roles_m)?;
        for k in 0..3 {
            rows[roles_p[k]][j] = split.kappa_plus * table_p[k][cp];
            rows[roles_m[k]][j] = split.kappa_minus * table_m[k][cm];
        }
    }
    let names = ["1", "2", "3", "4", "5+", "5-"].map(String::from).to_vec();
    let table = ResponseTable::with_physical(names, labels, rows, 4);
    check_table(&table)?;
    Ok(FineResponseTable { table, xy_plus, xy_minus })
}

/// Simulates `{M_a^(1/2)}` for a four-outcome extremal POVM.
///
/// Zero-weight outcomes are dropped first. If the requested pairing has a
/// vanishing pseudo-effect the other pairings are tried in order.
pub fn simulate_four(povm: &ExtremalPovm, backend: &Backend, pairing: Pairing) -> Result<Simulation> {
    if povm.len() != 4 {
        return Err(Error::OutcomeCount(povm.len()));
    }
    if povm.support(ZERO_MU).len() < 4 {
        return simulate_three(povm);
    }
    let order = std::iter::once(pairing).chain(Pairing::ALL.into_iter().filter(|&p| p != pairing));
    let Some(split) = order.filter_map(|p| pseudo_split(povm, p).ok()).next() else {
        return simulate_pair_mixture(povm, backend, pairing);
    };
    if split.pairing != pairing {
        log::warn!(
            "pairing {pairing} has a vanishing pseudo-effect; using {}",
            split.pairing
        );
    }
    let parent = build_parent_18(povm, &split, backend)?;
    let fine = build_response_four(&split, &parent)?;
    let mut sim = Simulation::finish(Route::FourOutcome, povm, parent, fine.table)?;
    sim.split = Some(split);
    Ok(sim)
}

/// Two antipodal pairs: pick pair `+` with probability `mu_i + mu_j` and
/// answer with its hemisphere model.
fn simulate_pair_mixture(povm: &ExtremalPovm, backend: &Backend, pairing: Pairing) -> Result<Simulation> {
    let ([a, b], [c, d]) = pairing.pairs();
    let o = povm.outcomes();
    let w = o[a].mu + o[b].mu;
    let parent = coarse_grain_with(&[o[a].mhat, o[c].mhat], backend)?;
    let labels = parent.labels();
    let mut rows = vec![vec![0.0; labels.len()]; 4];
    for (j, l) in labels.iter().enumerate() {
        rows[if l.contains(0) { a } else { b }][j] = w;
        rows[if l.contains(1) { c } else { d }][j] = 1.0 - w;
    }
    let table = ResponseTable::new((1..=4).map(|i| i.to_string()).collect(), labels, rows);
    Simulation::finish(Route::PairMixture, povm, parent, table)
}

/// Residuals of [`simulate_four`] over a ladder of grids.
pub fn residual_ladder(povm: &ExtremalPovm, grids: &[QuadratureGrid], pairing: Pairing) -> Result<Vec<f64>> {
    grids
        .iter()
        .map(|g| simulate_four(povm, &Backend::Quadrature(g.clone()), pairing).map(|s| s.residual))
        .collect()
}

/// Outcome of the direct LP against the 14-region parent.
#[derive(Clone, Debug, Serialize)]
pub struct BruteForceReport {
    pub backend: String,
    pub regions: usize,
    /// Smallest region weight `t_A`; zero means a region received no grid nodes.
    pub min_region_weight: f64,
    pub outcome: LpOutcome,
}

/// Solves for any response over the sign-pattern parent of the four
/// directions themselves.
pub fn brute_force_14(povm: &ExtremalPovm, backend: &Backend) -> Result<BruteForceReport> {
    let kept = povm.support(ZERO_MU);
    let dirs: Vec<Vec3> = kept.iter().map(|&a| povm.outcomes()[a].mhat).collect();
    let parent = coarse_grain_with(&dirs, backend)?;
    let children = povm.noisy(HALF).effects;
    let parents: Vec<_> = parent.entries().values().copied().collect();
    let system = build_system(&parents, &children)?;
    Ok(BruteForceReport {
        backend: backend.name(),
        regions: parents.len(),
        min_region_weight: parents.iter().map(|e| e.t).fold(f64::INFINITY, f64::min),
        outcome: solve_feasible(&system),
    })
}
