//! Three-outcome simulation at `r = 1/2` from the six-region parent.
//!
//! Columns of the role-space table are ordered
//! `{2,3}, {1,3}, {1,2}, {3}, {2}, {1}`, where role 1 is the outcome whose
//! response row is left in unnormalized form.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::partition::{coarse_grain_coplanar3, coarse_grain_exact, lune_weights, CoarseGrainedPovm, RegionLabel};
use crate::pauli::{ExtremalPovm, Outcome, Vec3};
use crate::response::{check_table, ResponseTable};
use crate::sim_four::PseudoSplit;
use crate::tolerance::NEGATIVE_ENTRY;

/// Noise level at which the constructions are exact.
pub const HALF: f64 = 0.5;
/// Weights below this count as zero outcomes.
pub const ZERO_MU: f64 = 1e-12;

/// Role-space column labels in table order.
pub const ROLE_COLUMNS: [u32; 6] = [0b110, 0b101, 0b011, 0b100, 0b010, 0b001];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct XyCoefficients {
    pub x: f64,
    pub y: f64,
    pub alphas: [f64; 3],
    pub qs: [f64; 3],
}

pub fn xy_coefficients(alphas: [f64; 3], mus: [f64; 3]) -> Result<XyCoefficients> {
    if alphas[0] <= 0.0 {
        return Err(Error::OutOfRange {
            what: "alpha_1",
            value: alphas[0],
        });
    }
    for &mu in &mus {
        if !(0.0..=0.5 + NEGATIVE_ENTRY).contains(&mu) {
            return Err(Error::OutOfRange { what: "mu", value: mu });
        }
    }
    let qs = mus.map(|mu| 1.0 - 2.0 * mu);
    let [a1, a2, a3] = alphas;
    let x = (a1 * qs[0] + a2 * qs[1] - a3 * qs[2]) / (2.0 * a1);
    let y = (a1 * qs[0] - a2 * qs[1] + a3 * qs[2]) / (2.0 * a1);
    for (name, v) in [("X", x), ("Y", y)] {
        if v < -NEGATIVE_ENTRY {
            return Err(Error::NegativeResponse {
                outcome: name.into(),
                label: "coefficient".into(),
                value: v,
            });
        }
    }
    Ok(XyCoefficients { x, y, alphas, qs })
}

/// The normalized table in role space, rows = roles, columns = [`ROLE_COLUMNS`].
pub fn role_table(mus: [f64; 3], xy: &XyCoefficients) -> [[f64; 6]; 3] {
    let (x, y) = (xy.x, xy.y);
    let [m1, m2, m3] = mus;
    [
        [0.0, 2.0 * m1, 2.0 * m1, 0.0, 0.0, 2.0 * m1],
        [2.0 * m2 - x, 0.0, 1.0 - 2.0 * m1, 0.0, 1.0, y],
        [2.0 * m3 - y, 1.0 - 2.0 * m1, 0.0, 1.0, 0.0, x],
    ]
}

/// Maps a label over `directions` to the role-space label for `roles`.
pub(crate) fn role_bits(label: RegionLabel, roles: &[usize; 3]) -> u32 {
    roles
        .iter()
        .enumerate()
        .filter(|(_, &d)| label.contains(d))
        .fold(0, |acc, (k, _)| acc | (1 << k))
}

pub(crate) fn role_column(label: RegionLabel, roles: &[usize; 3]) -> Result<usize> {
    let bits = role_bits(label, roles);
    ROLE_COLUMNS.iter().position(|&c| c == bits).ok_or_else(|| {
        Error::LabelMismatch(format!("region {label} has no six-region counterpart"))
    })
}

fn outcome_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| i.to_string()).collect()
}

/// Table II response with outcome 1 untouched.
pub fn build_response_three(povm: &ExtremalPovm, parent: &CoarseGrainedPovm) -> Result<(ResponseTable, XyCoefficients)> {
    build_response_three_with(povm, parent, 0)
}

/// Table II response with outcome `untouched` playing the role of outcome 1.
pub fn build_response_three_with(
    povm: &ExtremalPovm,
    parent: &CoarseGrainedPovm,
    untouched: usize,
) -> Result<(ResponseTable, XyCoefficients)> {
    if povm.len() != 3 || parent.directions().len() != 3 {
        return Err(Error::OutcomeCount(povm.len()));
    }
    if untouched > 2 {
        return Err(Error::OutOfRange {
            what: "untouched outcome",
            value: untouched as f64,
        });
    }
    let others: Vec<usize> = (0..3).filter(|&a| a != untouched).collect();
    let roles = [untouched, others[0], others[1]];
    let mus = povm.mus();
    let dirs = povm.directions();
    let role_mus = roles.map(|a| mus[a]);
    let alphas = lune_weights(roles.map(|a| dirs[a]))?;
    let xy = xy_coefficients(alphas, role_mus)?;
    let table = role_table(role_mus, &xy);

    let labels = parent.labels();
    let mut rows = vec![vec![0.0; labels.len()]; 3];
    for (j, &l) in labels.iter().enumerate() {
        let col = role_column(l, &roles)?;
        for (k, &a) in roles.iter().enumerate() {
            rows[a][j] = table[k][col];
        }
    }
    let out = ResponseTable::new(outcome_names(3), labels, rows);
    check_table(&out)?;
    Ok((out, xy))
}

/// Table I response `p(a|A) = 2 mu_a [a in A]`, not column-normalized.
pub fn unnormalized_response_three(povm: &ExtremalPovm, parent: &CoarseGrainedPovm) -> ResponseTable {
    let labels = parent.labels();
    let rows = povm
        .mus()
        .iter()
        .enumerate()
        .map(|(a, mu)| {
            labels
                .iter()
                .map(|l| if l.contains(a) { 2.0 * mu } else { 0.0 })
                .collect()
        })
        .collect();
    ResponseTable::new(outcome_names(povm.len()), labels, rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// Antipodal pair simulated by the hemisphere model.
    TwoOutcome,
    ThreeOutcome,
    FourOutcome,
    /// Two antipodal pairs, simulated as a mixture of hemisphere models.
    PairMixture,
}

/// A parent, response table and the achieved accuracy.
#[derive(Clone, Debug, Serialize)]
pub struct Simulation {
    pub route: Route,
    pub povm: ExtremalPovm,
    pub parent: CoarseGrainedPovm,
    pub table: ResponseTable,
    pub residual: f64,
    pub xy: Option<XyCoefficients>,
    pub split: Option<PseudoSplit>,
}

impl Simulation {
    pub(crate) fn finish(
        route: Route,
        povm: &ExtremalPovm,
        parent: CoarseGrainedPovm,
        table: ResponseTable,
    ) -> Result<Simulation> {
        let residual = table.residual(&parent, &povm.noisy(HALF).effects)?;
        Ok(Simulation {
            route,
            povm: povm.clone(),
            parent,
            table,
            residual,
            xy: None,
            split: None,
        })
    }
}

/// Simulates `{M_a^(1/2)}` for a POVM with up to three nonzero outcomes.
pub fn simulate_three(povm: &ExtremalPovm) -> Result<Simulation> {
    simulate_three_with(povm, 0)
}

pub fn simulate_three_with(povm: &ExtremalPovm, untouched: usize) -> Result<Simulation> {
    let kept = povm.support(ZERO_MU);
    match kept.len() {
        2 => simulate_two(povm, &kept),
        3 => {
            let reduced = reduce(povm, &kept)?;
            let untouched = kept.iter().position(|&a| a == untouched).unwrap_or(0);
            let dirs = reduced.directions();
            let parent = coarse_grain_coplanar3([dirs[0], dirs[1], dirs[2]])?;
            let (table, xy) = build_response_three_with(&reduced, &parent, untouched)?;
            let table = expand(&table, &kept, povm.len());
            let mut sim = Simulation::finish(Route::ThreeOutcome, povm, parent, table)?;
            sim.xy = Some(xy);
            Ok(sim)
        }
        n => Err(Error::OutcomeCount(n)),
    }
}

/// Hemisphere model `p(a|n) = Theta(m_a . n)` for an antipodal pair.
pub(crate) fn simulate_two(povm: &ExtremalPovm, kept: &[usize]) -> Result<Simulation> {
    let (i, j) = (kept[0], kept[1]);
    let m: Vec3 = povm.outcomes()[i].mhat;
    let parent = coarse_grain_exact(&[m])?;
    let labels = parent.labels();
    let rows = (0..povm.len())
        .map(|a| {
            labels
                .iter()
                .map(|l| match (a == i, a == j, l.contains(0)) {
                    (true, _, true) | (_, true, false) => 1.0,
                    _ => 0.0,
                })
                .collect()
        })
        .collect();
    let table = ResponseTable::new(outcome_names(povm.len()), labels, rows);
    Simulation::finish(Route::TwoOutcome, povm, parent, table)
}

pub(crate) fn reduce(povm: &ExtremalPovm, kept: &[usize]) -> Result<ExtremalPovm> {
    let outcomes: Vec<Outcome> = kept.iter().map(|&a| povm.outcomes()[a]).collect();
    let total: f64 = outcomes.iter().map(|o| o.mu).sum();
    ExtremalPovm::new(
        outcomes
            .into_iter()
            .map(|o| Outcome { mu: o.mu / total, mhat: o.mhat })
            .collect(),
    )
}

/// Re-indexes a table over `kept` outcomes to `n` outcomes with zero rows.
pub(crate) fn expand(table: &ResponseTable, kept: &[usize], n: usize) -> ResponseTable {
    if kept.len() == n {
        return table.clone();
    }
    let width = table.labels().len();
    let mut rows = vec![vec![0.0; width]; n];
    for (k, &a) in kept.iter().enumerate() {
        rows[a] = table.row(k).to_vec();
    }
    ResponseTable::new(outcome_names(n), table.labels().to_vec(), rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{sample_extremal_povm, Effect};
    use approx::assert_abs_diff_eq;

    #[test]
    fn trine_coefficients() {
        let xy = xy_coefficients([1.0 / 6.0; 3], [1.0 / 3.0; 3]).unwrap();
        assert_abs_diff_eq!(xy.x, 1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(xy.y, 1.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn saturated_first_weight_gives_zero_coefficients() {
        let xy = xy_coefficients([0.25, 0.25, 0.25], [0.5, 0.25, 0.25]).unwrap();
        assert_abs_diff_eq!(xy.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(xy.y, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn rejects_degenerate_alpha() {
        assert!(xy_coefficients([0.0, 0.5, 0.5], [1.0 / 3.0; 3]).is_err());
    }

    #[test]
    fn trine_table_entries() {
        let povm = ExtremalPovm::trine();
        let sim = simulate_three(&povm).unwrap();
        let single = RegionLabel::singleton(0);
        assert_abs_diff_eq!(sim.table.get(0, single), 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sim.table.get(1, single), 1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sim.table.get(2, single), 1.0 / 6.0, epsilon = 1e-15);
        assert!(sim.table.normalization_violation() < 1e-15);
        assert!(sim.residual < 1e-12);
        let m1 = povm.outcomes()[0].mhat;
        let expected = Effect::new(1.0 / 3.0, m1 / 6.0);
        let rebuilt = sim.table.reconstruct(&sim.parent).unwrap();
        assert!(rebuilt[0].max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn unnormalized_table_reproduces_targets() {
        let povm = ExtremalPovm::trine();
        let sim = simulate_three(&povm).unwrap();
        let raw = unnormalized_response_three(&povm, &sim.parent);
        let col = RegionLabel::from_indices(&[0, 1]);
        assert_abs_diff_eq!(raw.column_sum(col), 4.0 / 3.0, epsilon = 1e-15);
        assert!(raw.residual(&sim.parent, &povm.noisy(HALF).effects).unwrap() < 1e-12);
    }

    #[test]
    fn untouched_row_matches_unnormalized_row() {
        for seed in 0..20 {
            let povm = sample_extremal_povm(3, seed).unwrap();
            for u in 0..3 {
                let sim = simulate_three_with(&povm, u).unwrap();
                let raw = unnormalized_response_three(&povm, &sim.parent);
                for &l in sim.table.labels() {
                    assert_abs_diff_eq!(sim.table.get(u, l), raw.get(u, l), epsilon = 1e-15);
                }
                assert!(sim.residual < 1e-10, "seed {seed} untouched {u}");
            }
        }
    }

    #[test]
    fn linear_dependence_identities() {
        let povm = sample_extremal_povm(3, 7).unwrap();
        let sim = simulate_three(&povm).unwrap();
        let xy = sim.xy.unwrap();
        let p = &sim.parent;
        let lune = |a: usize| {
            let s = RegionLabel::singleton(a);
            (p.effect(s), p.effect(s.complement(3)))
        };
        let mut acc = Effect::ZERO;
        for a in 0..3 {
            let (single, rest) = lune(a);
            acc += (single - rest) * xy.qs[a];
        }
        assert!(acc.max_abs_diff(&Effect::ZERO) < 1e-12);
        for a in 0..3 {
            let (s0, r0) = lune(0);
            let (sa, ra) = lune(a);
            let d = (s0 + r0) * (1.0 / xy.alphas[0]) - (sa + ra) * (1.0 / xy.alphas[a]);
            assert!(d.max_abs_diff(&Effect::ZERO) < 1e-12);
        }
    }

    #[test]
    fn zero_outcome_routes_to_hemisphere() {
        let m = Vec3::new(0.0, 0.6, 0.8);
        let povm = ExtremalPovm::new(vec![
            Outcome { mu: 0.5, mhat: m },
            Outcome { mu: 0.5, mhat: -m },
            Outcome { mu: 0.0, mhat: Vec3::x() },
        ])
        .unwrap();
        let sim = simulate_three(&povm).unwrap();
        assert_eq!(sim.route, Route::TwoOutcome);
        assert!(sim.residual < 1e-12);
        assert!(sim.table.row(2).iter().all(|&p| p == 0.0));
    }
}
