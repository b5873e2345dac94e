//! Local hidden state models for two-qubit Werner states.
//!
//! If a parent `{Pi_l}` and response `p(a|l)` reproduce the noisy effects
//! `M_a^r`, then Bob's assemblage for the Werner state of visibility `r` is
//! `sigma_a = sum_l t_l p(a|l) rho_l` with `rho_l = UNOT(Pi_l) / Tr Pi_l`.

use nalgebra::Matrix4;
use rayon::prelude::*;
use serde::Serialize;

use crate::dense::{from_matrix, identity, kron, partial_trace_first, to_matrix, C64};
use crate::error::{Error, Result};
use crate::partition::{Backend, CoarseGrainedPovm, RegionLabel};
use crate::pauli::{check_range, sample_extremal_povm, Effect, ExtremalPovm, Povm};
use crate::response::ResponseTable;
use crate::sim_four::{simulate_four, Pairing};
use crate::sim_three::{simulate_three, Route, Simulation, HALF};
use crate::tolerance::{ANALYTIC_RESIDUAL, QUADRATURE_RESIDUAL, STRUCTURAL, ZERO_WEIGHT};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WernerState {
    pub r: f64,
}

impl WernerState {
    pub fn new(r: f64) -> Result<Self> {
        check_range("r", r, 0.0, 1.0)?;
        Ok(WernerState { r })
    }

    /// `r |psi-><psi-| + (1 - r) I/4`, Alice on the first factor.
    pub fn density(&self) -> Matrix4<C64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = nalgebra::Vector4::new(C64::new(0.0, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0), C64::new(0.0, 0.0));
        let singlet = psi * psi.adjoint();
        singlet * C64::new(self.r, 0.0) + Matrix4::identity() * C64::new((1.0 - self.r) / 4.0, 0.0)
    }
}

/// Bob's conditional states, one 4-vector `(t, b)` per outcome.
#[derive(Clone, Debug, Serialize)]
pub struct Assemblage {
    pub sigma: Vec<Effect>,
}

impl Assemblage {
    pub fn total(&self) -> Effect {
        self.sigma.iter().sum()
    }

    pub fn max_abs_diff(&self, other: &Assemblage) -> f64 {
        self.sigma
            .iter()
            .zip(&other.sigma)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }
}

/// `sigma_a = Tr_A[(M_a (x) I) rho_W(r)]` by dense matrices.
pub fn assemblage_oracle(povm: &Povm, r: f64) -> Result<Assemblage> {
    let rho = WernerState::new(r)?.density();
    let sigma = povm
        .effects
        .iter()
        .map(|m| from_matrix(&crate::dense::DenseOperator(partial_trace_first(&(kron(&to_matrix(m).0, &identity()) * rho)))))
        .collect::<Result<_>>()?;
    Ok(Assemblage { sigma })
}

/// `sigma_a = (t_a / 2) I - (r / 2) b_a . sigma`.
pub fn assemblage_closed_form(povm: &Povm, r: f64) -> Assemblage {
    Assemblage {
        sigma: povm.effects.iter().map(|m| Effect::new(0.5 * m.t, m.b * (-0.5 * r))).collect(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HiddenState {
    pub label: RegionLabel,
    pub weight: f64,
    /// Unit-trace state stored as `(1/2, b)`.
    pub state: Effect,
}

#[derive(Clone, Debug, Serialize)]
pub struct LhsModel {
    pub ensemble: Vec<HiddenState>,
    pub response: ResponseTable,
}

impl LhsModel {
    pub fn marginal(&self) -> Effect {
        self.ensemble.iter().map(|h| h.state * h.weight).sum()
    }

    /// `|sum p rho - I/2|_inf`.
    pub fn marginal_violation(&self) -> f64 {
        self.marginal().max_abs_diff(&Effect::scalar(0.5))
    }

    pub fn weight_total(&self) -> f64 {
        self.ensemble.iter().map(|h| h.weight).sum()
    }

    pub fn assemblage(&self) -> Assemblage {
        let sigma = (0..self.response.physical())
            .map(|a| {
                self.ensemble
                    .iter()
                    .map(|h| h.state * (h.weight * self.response.get(a, h.label)))
                    .sum()
            })
            .collect();
        Assemblage { sigma }
    }
}

/// Hidden states `rho_A = I/2 - (shrink / 2 t_A) b_A . sigma` with weights
/// `t_A`; regions of zero weight are skipped.
///
/// Use `shrink = 1` when `response` already reproduces `M^r`.
pub fn compat_to_lhs(parent: &CoarseGrainedPovm, response: &ResponseTable, shrink: f64) -> Result<LhsModel> {
    check_range("shrink", shrink, 0.0, 1.0)?;
    let ensemble = parent
        .entries()
        .iter()
        .filter(|(_, e)| e.t > ZERO_WEIGHT)
        .map(|(&label, e)| HiddenState {
            label,
            weight: e.t,
            state: Effect::new(0.5, e.universal_not().b * (shrink / (2.0 * e.t))),
        })
        .collect();
    Ok(LhsModel {
        ensemble,
        response: response.clone(),
    })
}

/// Max component mismatch between the model's assemblage and the oracle.
pub fn verify_lhs(model: &LhsModel, povm: &ExtremalPovm, r: f64) -> Result<f64> {
    if model.response.physical() != povm.len() {
        return Err(Error::DimensionMismatch {
            expected: povm.len(),
            got: model.response.physical(),
        });
    }
    let oracle = assemblage_oracle(&povm.to_povm(), r)?;
    Ok(model.assemblage().max_abs_diff(&oracle))
}

/// Builds the `r = 1/2` simulation for `povm` and turns it into an LHS
/// model for visibility `r <= 1/2` by mixing in the flat response.
pub fn build_lhs(povm: &ExtremalPovm, r: f64, backend: &Backend) -> Result<(Simulation, LhsModel)> {
    check_range("r", r, 0.0, HALF)?;
    let sim = match povm.len() {
        4 => simulate_four(povm, backend, Pairing::default())?,
        _ => simulate_three(povm)?,
    };
    let response = sim.table.folded(r / HALF, &povm.mus());
    let model = compat_to_lhs(&sim.parent, &response, 1.0)?;
    Ok((sim, model))
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleResult {
    pub index: usize,
    pub seed: u64,
    pub outcomes: usize,
    pub route: Route,
    pub simulation_residual: f64,
    pub lhs_residual: f64,
    pub marginal_violation: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub povm: ExtremalPovm,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub r: f64,
    pub backend: String,
    pub samples: Vec<SampleResult>,
    pub max_lhs_residual: f64,
    pub max_marginal_violation: f64,
    pub passed: bool,
}

impl SuiteReport {
    pub fn failures(&self) -> impl Iterator<Item = &SampleResult> {
        self.samples.iter().filter(|s| !s.passed)
    }
}

/// Residual bound for a simulation route under `backend`.
pub fn route_tolerance(route: Route, backend: &Backend) -> f64 {
    match (route, backend) {
        (Route::FourOutcome | Route::PairMixture, Backend::Quadrature(_)) => QUADRATURE_RESIDUAL,
        (Route::FourOutcome | Route::PairMixture, Backend::ExactPolygon) => crate::tolerance::POLYGON_RESIDUAL,
        _ => ANALYTIC_RESIDUAL,
    }
}

/// Sample seed for index `i` of a suite seeded with `seed`.
pub fn sample_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(i as u64)
}

pub fn check_sample(index: usize, seed: u64, povm: &ExtremalPovm, r: f64, backend: &Backend) -> Result<SampleResult> {
    let (sim, model) = build_lhs(povm, r, backend)?;
    let lhs_residual = verify_lhs(&model, povm, r)?;
    let marginal_violation = model.marginal_violation();
    let tolerance = route_tolerance(sim.route, backend);
    Ok(SampleResult {
        index,
        seed,
        outcomes: povm.len(),
        route: sim.route,
        simulation_residual: sim.residual,
        lhs_residual,
        marginal_violation,
        tolerance,
        passed: lhs_residual <= tolerance && marginal_violation <= STRUCTURAL,
        povm: povm.clone(),
    })
}

/// LHS verification over `n_samples` random extremal POVMs with
/// `outcomes` outcomes each.
pub fn unsteerability_suite(
    r: f64,
    n_samples: usize,
    seed: u64,
    outcomes: usize,
    backend: &Backend,
) -> Result<SuiteReport> {
    check_range("r", r, 0.0, HALF)?;
    let samples: Vec<SampleResult> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let s = sample_seed(seed, i);
            let povm = sample_extremal_povm(outcomes, s)?;
            check_sample(i, s, &povm, r, backend)
        })
        .collect::<Result<_>>()?;
    let max_lhs_residual = samples.iter().map(|s| s.lhs_residual).fold(0.0, f64::max);
    let max_marginal_violation = samples.iter().map(|s| s.marginal_violation).fold(0.0, f64::max);
    Ok(SuiteReport {
        r,
        backend: backend.name(),
        passed: samples.iter().all(|s| s.passed),
        samples,
        max_lhs_residual,
        max_marginal_violation,
    })
}
