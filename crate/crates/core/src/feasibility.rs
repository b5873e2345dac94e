//! Can a parent POVM `{Pi_i}` simulate children `{M_a}`?
//!
//! The question is the linear system `sum_i x_{a|i} Pi_i = M_a`,
//! `sum_a x_{a|i} = 1`, `x >= 0`. Either a solution exists or, by Farkas'
//! lemma, some `y` has `A^T y >= 0` and `b.y < 0`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{self, LpStatus};
use crate::pauli::{random_unit, Effect, Povm, Vec3};
use crate::tolerance::{CERTIFICATE_MARGIN, CERTIFICATE_SLACK, LP_RESIDUAL, NEGATIVE_ENTRY};

/// Column `a * n + i` holds `x_{a|i}`. Rows `4a..4a+4` reproduce child `a`,
/// row `4m + i` normalizes parent `i`.
#[derive(Clone, Debug, Serialize)]
pub struct LinearSystem {
    #[serde(skip)]
    pub a: DMatrix<f64>,
    #[serde(skip)]
    pub b: DVector<f64>,
    pub m: usize,
    pub n: usize,
}

impl LinearSystem {
    pub fn rows(&self) -> usize {
        4 * self.m + self.n
    }

    pub fn cols(&self) -> usize {
        self.m * self.n
    }

    /// `||A x - b||_inf`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        let x = DVector::from_column_slice(x);
        (&self.a * x - &self.b).amax()
    }
}

pub fn build_system(parents: &[Effect], children: &[Effect]) -> Result<LinearSystem> {
    let (m, n) = (children.len(), parents.len());
    if m == 0 || n == 0 {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    for (what, set) in [("parent", parents), ("children", children)] {
        let total: Effect = set.iter().sum();
        let violation = total.max_abs_diff(&Effect::scalar(1.0));
        if violation > LP_RESIDUAL {
            return Err(Error::InvalidPovm {
                reason: format!("{what} effects do not sum to the identity"),
                violation,
            });
        }
    }
    let mut a = DMatrix::zeros(4 * m + n, m * n);
    let mut b = DVector::zeros(4 * m + n);
    for (ai, child) in children.iter().enumerate() {
        for (k, v) in child.components().iter().enumerate() {
            b[4 * ai + k] = *v;
        }
        for (i, parent) in parents.iter().enumerate() {
            let col = ai * n + i;
            for (k, v) in parent.components().iter().enumerate() {
                a[(4 * ai + k, col)] = *v;
            }
            a[(4 * m + i, col)] = 1.0;
        }
    }
    for i in 0..n {
        b[4 * m + i] = 1.0;
    }
    Ok(LinearSystem { a, b, m, n })
}

#[derive(Clone, Debug, Serialize)]
pub struct FarkasCertificate {
    pub y: Vec<f64>,
    /// `-b.y`; positive for a valid certificate.
    pub margin: f64,
    /// `min (A^T y)_j`.
    pub min_slack: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum LpOutcome {
    Feasible { x: Vec<f64>, residual: f64 },
    Infeasible { certificate: FarkasCertificate },
    Indeterminate { reason: String },
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LpOutcome::Feasible { .. })
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, LpOutcome::Infeasible { .. })
    }
}

/// `(valid, margin)` where `margin = -b.y`.
pub fn verify_certificate(y: &[f64], sys: &LinearSystem) -> Result<(bool, f64)> {
    let (valid, margin, _) = check_certificate(y, sys)?;
    Ok((valid, margin))
}

fn check_certificate(y: &[f64], sys: &LinearSystem) -> Result<(bool, f64, f64)> {
    if y.len() != sys.rows() {
        return Err(Error::DimensionMismatch {
            expected: sys.rows(),
            got: y.len(),
        });
    }
    let y = DVector::from_column_slice(y);
    let slack = sys.a.tr_mul(&y);
    let min_slack = slack.min();
    let margin = -sys.b.dot(&y);
    Ok((min_slack >= -CERTIFICATE_SLACK && margin > CERTIFICATE_MARGIN, margin, min_slack))
}

/// A solution with `||Ax - b|| <= 1e-9` and `x >= -1e-12`, if the simplex finds one.
pub fn find_solution(sys: &LinearSystem) -> Option<(Vec<f64>, f64)> {
    let c = DVector::zeros(sys.cols());
    match lp::solve(&sys.a, &sys.b, &c) {
        LpStatus::Optimal { x, .. } => {
            let residual = sys.residual(&x);
            let ok = residual <= LP_RESIDUAL && x.iter().all(|&v| v >= -NEGATIVE_ENTRY);
            ok.then_some((x, residual))
        }
        _ => None,
    }
}

/// Solves `min b.y  s.t.  A^T y >= 0, -1 <= y <= 1` and returns `y` if it
/// verifies as a certificate.
pub fn find_certificate(sys: &LinearSystem) -> Option<FarkasCertificate> {
    // y = u - 1 with 0 <= u <= 2; variables (u, s, w):
    //   A^T u - s = A^T 1,  u + w = 2
    let (p, q) = (sys.rows(), sys.cols());
    let ones = DVector::from_element(p, 1.0);
    let at = sys.a.transpose();
    let mut a = DMatrix::zeros(q + p, 2 * p + q);
    a.view_mut((0, 0), (q, p)).copy_from(&at);
    for j in 0..q {
        a[(j, p + j)] = -1.0;
    }
    for i in 0..p {
        a[(q + i, i)] = 1.0;
        a[(q + i, p + q + i)] = 1.0;
    }
    let mut b = DVector::zeros(q + p);
    b.rows_mut(0, q).copy_from(&(&at * &ones));
    b.rows_mut(q, p).fill(2.0);
    let mut c = DVector::zeros(2 * p + q);
    c.rows_mut(0, p).copy_from(&sys.b);
    match lp::solve(&a, &b, &c) {
        LpStatus::Optimal { x, .. } => {
            let y: Vec<f64> = x[..p].iter().map(|u| u - 1.0).collect();
            let (valid, margin, min_slack) = check_certificate(&y, sys).ok()?;
            valid.then_some(FarkasCertificate { y, margin, min_slack })
        }
        _ => None,
    }
}

/// Feasible, infeasible with a verified certificate, or indeterminate.
pub fn solve_feasible(sys: &LinearSystem) -> LpOutcome {
    if let Some((x, residual)) = find_solution(sys) {
        return LpOutcome::Feasible { x, residual };
    }
    if let Some(certificate) = find_certificate(sys) {
        return LpOutcome::Infeasible { certificate };
    }
    LpOutcome::Indeterminate {
        reason: "no solution within tolerance and no verifiable certificate".into(),
    }
}

/// Reshapes `x` into `x[a][i] = p(a|i)`.
pub fn response_matrix(x: &[f64], sys: &LinearSystem) -> Vec<Vec<f64>> {
    x.chunks(sys.n).map(<[f64]>::to_vec).collect()
}

/// `12/55`, the shared offset of the three trailing parent directions.
pub const PENTAD_OFFSET: f64 = 12.0 / 55.0;
/// Certificate coefficient on each of the three trailing parents.
pub const PENTAD_Z: f64 = 0.110;

fn pentad_s() -> f64 {
    (1.0 - PENTAD_OFFSET * PENTAD_OFFSET).sqrt()
}

/// Threshold `0.330 sqrt(1 - (12/55)^2)` above which the certificate proves
/// infeasibility.
pub fn pentad_threshold() -> f64 {
    3.0 * PENTAD_Z * pentad_s()
}

/// Reference PVM radius `0.34 + 0.144 * 12/55` of the five-effect parent.
pub fn pentad_reference_radius() -> f64 {
    0.34 + 0.144 * PENTAD_OFFSET
}

pub fn pentad_directions() -> [Vec3; 5] {
    let (c, s) = (PENTAD_OFFSET, pentad_s());
    let h = 3f64.sqrt() / 2.0;
    [
        Vec3::x(),
        -Vec3::x(),
        Vec3::new(-c, s, 0.0),
        Vec3::new(-c, -s / 2.0, h * s),
        Vec3::new(-c, -s / 2.0, -h * s),
    ]
}

/// Five rank-one effects `w_i (I + n_i . sigma)`.
pub fn pentad_parent() -> Povm {
    let weights = [0.242, 0.098, 0.22, 0.22, 0.22];
    Povm::new(
        weights
            .iter()
            .zip(pentad_directions())
            .map(|(&w, n)| Effect::new(w, n * w))
            .collect(),
    )
}

pub fn pentad_child_directions() -> [Vec3; 3] {
    let h = 3f64.sqrt() / 2.0;
    [
        Vec3::new(0.0, -1.0, 0.0),
        Vec3::new(0.0, 0.5, h),
        Vec3::new(0.0, 0.5, -h),
    ]
}

/// Trine in the y-z plane at radius `r`.
pub fn pentad_child(r: f64) -> Povm {
    Povm::new(
        pentad_child_directions()
            .iter()
            .map(|m| Effect::new(1.0 / 3.0, m * (r / 3.0)))
            .collect(),
    )
}

/// `y_a = (0, -m_a)` and `z = 0.110 s` on the three trailing parents.
pub fn pentad_certificate() -> Vec<f64> {
    pentad_certificate_on([2, 3, 4])
}

/// The same vector with `z` on parents 1, 2, 3 instead; not a certificate.
pub fn pentad_certificate_misplaced() -> Vec<f64> {
    pentad_certificate_on([0, 1, 2])
}

fn pentad_certificate_on(z_on: [usize; 3]) -> Vec<f64> {
    let mut y = Vec::with_capacity(17);
    for m in pentad_child_directions() {
        y.extend_from_slice(&[0.0, -m.x, -m.y, -m.z]);
    }
    let mut z = [0.0; 5];
    for i in z_on {
        z[i] = PENTAD_Z * pentad_s();
    }
    y.extend_from_slice(&z);
    y
}

pub fn fibonacci_sphere(n: usize) -> Vec<Vec3> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
            let rho = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            Vec3::new(rho * phi.cos(), rho * phi.sin(), z)
        })
        .collect()
}

/// Fibonacci directions followed by `n_random` seeded uniform directions.
pub fn pvm_directions(n_fibonacci: usize, n_random: usize, seed: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dirs = fibonacci_sphere(n_fibonacci);
    dirs.extend((0..n_random).map(|_| random_unit(&mut rng)));
    dirs
}

pub fn pvm_child(m: &Vec3, r: f64) -> Povm {
    Povm::new(vec![Effect::new(0.5, m * (0.5 * r)), Effect::new(0.5, m * (-0.5 * r))])
}

#[derive(Clone, Debug, Serialize)]
pub struct RadiusReport {
    pub r_star: f64,
    /// Largest radius at which every sampled PVM was feasible.
    pub lower: f64,
    /// Smallest radius at which some sampled PVM was not.
    pub upper: f64,
    pub worst_direction: Option<Vec3>,
    pub directions: usize,
    pub depth: usize,
}

/// Bisection depth used by [`pvm_radius`].
pub const BISECTION_DEPTH: usize = 20;

fn first_failure(parent: &[Effect], directions: &[Vec3], r: f64) -> Result<Option<Vec3>> {
    let failures: Vec<Option<Vec3>> = directions
        .par_iter()
        .map(|m| {
            let sys = build_system(parent, &pvm_child(m, r).effects)?;
            Ok((!solve_feasible(&sys).is_feasible()).then_some(*m))
        })
        .collect::<Result<_>>()?;
    Ok(failures.into_iter().flatten().next())
}

/// Largest `r` at which the parent simulates every PVM along `directions`.
pub fn pvm_radius(parent: &Povm, directions: &[Vec3]) -> Result<RadiusReport> {
    let effects = &parent.effects;
    if first_failure(effects, directions, 0.0)?.is_some() {
        return Err(Error::Bracket("the trivial child at r = 0 is not simulable".into()));
    }
    let mut worst = first_failure(effects, directions, 1.0)?;
    if worst.is_none() {
        return Ok(RadiusReport {
            r_star: 1.0,
            lower: 1.0,
            upper: 1.0,
            worst_direction: None,
            directions: directions.len(),
            depth: 0,
        });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..BISECTION_DEPTH {
        let mid = 0.5 * (lo + hi);
        match first_failure(effects, directions, mid)? {
            Some(m) => {
                hi = mid;
                worst = Some(m);
            }
            None => lo = mid,
        }
    }
    Ok(RadiusReport {
        r_star: 0.5 * (lo + hi),
        lower: lo,
        upper: hi,
        worst_direction: worst,
        directions: directions.len(),
        depth: BISECTION_DEPTH,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateCheck {
    pub r: f64,
    pub valid: bool,
    pub margin: f64,
    pub b_dot_y: f64,
    pub lp: LpOutcome,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationReport {
    pub pvm: RadiusReport,
    pub reference_radius: f64,
    pub certificate_threshold: f64,
    pub certificate: Vec<f64>,
    pub checks: Vec<CertificateCheck>,
    pub pvm_feasible_at_threshold: bool,
    pub gap: f64,
}

impl SeparationReport {
    pub fn passed(&self) -> bool {
        self.gap > 0.0
            && self.pvm_feasible_at_threshold
            && self.checks.iter().all(|c| c.valid && c.lp.is_infeasible())
    }
}

pub fn certificate_check(r: f64) -> Result<CertificateCheck> {
    let sys = build_system(&pentad_parent().effects, &pentad_child(r).effects)?;
    let y = pentad_certificate();
    let (valid, margin) = verify_certificate(&y, &sys)?;
    Ok(CertificateCheck {
        r,
        valid,
        margin,
        b_dot_y: -margin,
        lp: solve_feasible(&sys),
    })
}

/// PVM radius of the five-effect parent next to the three-outcome
/// infeasibility threshold.
pub fn separation_demo(n_directions: usize, seed: u64) -> Result<SeparationReport> {
    let parent = pentad_parent();
    let dirs = pvm_directions(n_directions, n_directions / 4, seed);
    let pvm = pvm_radius(&parent, &dirs)?;
    let threshold = pentad_threshold();
    let checks = [0.33, pentad_reference_radius()]
        .into_iter()
        .map(certificate_check)
        .collect::<Result<Vec<_>>>()?;
    let pvm_feasible_at_threshold = first_failure(&parent.effects, &dirs, threshold)?.is_none();
    Ok(SeparationReport {
        gap: pvm.r_star - threshold,
        pvm,
        reference_radius: pentad_reference_radius(),
        certificate_threshold: threshold,
        certificate: pentad_certificate(),
        checks,
        pvm_feasible_at_threshold,
    })
}
