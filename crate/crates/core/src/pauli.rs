//! Qubit operators in the Pauli basis.
//!
//! An operator `t I + b . sigma` is stored as the real 4-vector `(t, b)`.
//! Every map used by the simulations (depolarizing noise, coarse-graining,
//! the universal NOT) is affine in these coordinates, so no complex
//! arithmetic is needed outside the dense oracles in [`crate::dense`].

use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance::STRUCTURAL;

pub type Vec3 = Vector3<f64>;

/// A Hermitian qubit operator `t I + b . sigma`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Effect {
    /// Half the trace.
    pub t: f64,
    /// Bloch part.
    pub b: Vec3,
}

impl Effect {
    pub const ZERO: Effect = Effect {
        t: 0.0,
        b: Vector3::new(0.0, 0.0, 0.0),
    };

    pub fn new(t: f64, b: Vec3) -> Self {
        Effect { t, b }
    }

    /// `t I`.
    pub fn scalar(t: f64) -> Self {
        Effect { t, b: Vec3::zeros() }
    }

    /// `mu (I + r mhat . sigma)`, the depolarized rank-one effect.
    pub fn from_bloch(mu: f64, mhat: Vec3, r: f64) -> Result<Self> {
        check_unit(&mhat, STRUCTURAL)?;
        check_range("mu", mu, 0.0, 1.0)?;
        check_range("r", r, 0.0, 1.0)?;
        Ok(Effect {
            t: mu,
            b: mhat * (mu * r),
        })
    }

    pub fn trace(&self) -> f64 {
        2.0 * self.t
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.t - self.b.norm()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.t + self.b.norm()
    }

    /// Positive semidefinite up to `tol`.
    pub fn is_positive(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    /// `sigma_y M^T sigma_y`: flips the Bloch vector, keeps the trace.
    pub fn universal_not(&self) -> Effect {
        Effect {
            t: self.t,
            b: -self.b,
        }
    }

    /// Shrinks the Bloch part by `r`, keeping the trace.
    pub fn depolarize(&self, r: f64) -> Effect {
        Effect {
            t: self.t,
            b: self.b * r,
        }
    }

    pub fn components(&self) -> [f64; 4] {
        [self.t, self.b.x, self.b.y, self.b.z]
    }

    pub fn to_vector(&self) -> Vector4<f64> {
        Vector4::new(self.t, self.b.x, self.b.y, self.b.z)
    }

    /// Largest componentwise deviation in Pauli coordinates.
    pub fn max_abs_diff(&self, other: &Effect) -> f64 {
        let d = *self - *other;
        d.components().iter().fold(0.0, |acc, c| acc.max(c.abs()))
    }
}

impl Add for Effect {
    type Output = Effect;
    fn add(self, rhs: Effect) -> Effect {
        Effect {
            t: self.t + rhs.t,
            b: self.b + rhs.b,
        }
    }
}

impl AddAssign for Effect {
    fn add_assign(&mut self, rhs: Effect) {
        self.t += rhs.t;
        self.b += rhs.b;
    }
}

impl Sub for Effect {
    type Output = Effect;
    fn sub(self, rhs: Effect) -> Effect {
        Effect {
            t: self.t - rhs.t,
            b: self.b - rhs.b,
        }
    }
}

impl Neg for Effect {
    type Output = Effect;
    fn neg(self) -> Effect {
        Effect {
            t: -self.t,
            b: -self.b,
        }
    }
}

impl Mul<f64> for Effect {
    type Output = Effect;
    fn mul(self, rhs: f64) -> Effect {
        Effect {
            t: self.t * rhs,
            b: self.b * rhs,
        }
    }
}

impl Sum for Effect {
    fn sum<I: Iterator<Item = Effect>>(iter: I) -> Effect {
        iter.fold(Effect::ZERO, |acc, e| acc + e)
    }
}

impl<'a> Sum<&'a Effect> for Effect {
    fn sum<I: Iterator<Item = &'a Effect>>(iter: I) -> Effect {
        iter.fold(Effect::ZERO, |acc, e| acc + *e)
    }
}

/// Outcome of [`validate_povm`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PovmReport {
    pub valid: bool,
    /// Worst of the positivity and completeness violations.
    pub max_violation: f64,
    /// `max_a (|b_a| - t_a)`, clamped at zero.
    pub positivity: f64,
    /// `max(|sum t - 1|, |sum b|_inf)`.
    pub completeness: f64,
}

/// Checks positivity of every effect and `sum_a M_a = I`.
pub fn validate_povm(povm: &Povm) -> PovmReport {
    povm.validate_with(STRUCTURAL)
}

/// An ordered list of effects.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Povm {
    pub effects: Vec<Effect>,
}

impl Povm {
    pub fn new(effects: Vec<Effect>) -> Self {
        Povm { effects }
    }

    /// Builds a POVM, rejecting it if [`validate_povm`] fails.
    pub fn validated(effects: Vec<Effect>) -> Result<Self> {
        let povm = Povm { effects };
        let report = validate_povm(&povm);
        if !report.valid {
            return Err(Error::InvalidPovm {
                reason: "positivity or completeness violated".into(),
                violation: report.max_violation,
            });
        }
        Ok(povm)
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn total(&self) -> Effect {
        self.effects.iter().sum()
    }

    pub fn validate_with(&self, tol: f64) -> PovmReport {
        let positivity = self
            .effects
            .iter()
            .map(|e| (-e.min_eigenvalue()).max(0.0))
            .fold(0.0, f64::max);
        let total = self.total();
        let completeness = (total.t - 1.0)
            .abs()
            .max(total.b.amax());
        let max_violation = positivity.max(completeness);
        PovmReport {
            valid: !self.effects.is_empty() && max_violation <= tol,
            max_violation,
            positivity,
            completeness,
        }
    }

    /// `M_a^r = r M_a + (1 - r) Tr(M_a) I / 2`.
    pub fn make_noisy(&self, r: f64) -> Result<Povm> {
        check_range("r", r, 0.0, 1.0)?;
        let report = validate_povm(self);
        if !report.valid {
            return Err(Error::InvalidPovm {
                reason: "cannot depolarize an invalid POVM".into(),
                violation: report.max_violation,
            });
        }
        Ok(Povm {
            effects: self.effects.iter().map(|e| e.depolarize(r)).collect(),
        })
    }
}

/// One rank-one outcome `mu (I + mhat . sigma)` of an extremal POVM.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub mu: f64,
    pub mhat: Vec3,
}

/// A qubit POVM of 2 to 4 rank-one effects with `sum mu = 1` and
/// `sum mu mhat = 0`.
///
/// Zero-weight outcomes are accepted so that degenerate inputs keep their
/// outcome labels; the simulations drop them.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtremalPovm {
    outcomes: Vec<Outcome>,
}

impl ExtremalPovm {
    pub fn new(outcomes: Vec<Outcome>) -> Result<Self> {
        if !(2..=4).contains(&outcomes.len()) {
            return Err(Error::OutcomeCount(outcomes.len()));
        }
        let mut weight = 0.0;
        let mut barycenter = Vec3::zeros();
        for o in &outcomes {
            check_unit(&o.mhat, STRUCTURAL)?;
            check_range("mu", o.mu, 0.0, 0.5 + STRUCTURAL)?;
            weight += o.mu;
            barycenter += o.mhat * o.mu;
        }
        let violation = (weight - 1.0).abs().max(barycenter.amax());
        if violation > STRUCTURAL {
            return Err(Error::InvalidPovm {
                reason: "weights must sum to 1 with vanishing barycenter".into(),
                violation,
            });
        }
        Ok(ExtremalPovm { outcomes })
    }

    /// The projective measurement `{(I +- mhat . sigma) / 2}`.
    pub fn pvm(mhat: Vec3) -> Result<Self> {
        let mhat = normalized(mhat)?;
        Self::new(vec![
            Outcome { mu: 0.5, mhat },
            Outcome { mu: 0.5, mhat: -mhat },
        ])
    }

    /// Three outcomes of weight 1/3 at 120 degrees in the x-z plane.
    pub fn trine() -> Self {
        let s = 3f64.sqrt() / 2.0;
        let dirs = [
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(s, 0.0, -0.5),
            Vec3::new(-s, 0.0, -0.5),
        ];
        Self::new(
            dirs.iter()
                .map(|&mhat| Outcome { mu: 1.0 / 3.0, mhat })
                .collect(),
        )
        .expect("trine is a valid POVM")
    }

    /// The symmetric informationally complete qubit POVM with Bloch vectors
    /// at the even-parity corners of the cube.
    pub fn tetrahedral() -> Self {
        let k = 1.0 / 3f64.sqrt();
        let dirs = [
            Vec3::new(k, k, k),
            Vec3::new(k, -k, -k),
            Vec3::new(-k, k, -k),
            Vec3::new(-k, -k, k),
        ];
        Self::new(
            dirs.iter()
                .map(|&mhat| Outcome { mu: 0.25, mhat })
                .collect(),
        )
        .expect("tetrahedral POVM is valid")
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn mus(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.mu).collect()
    }

    pub fn directions(&self) -> Vec<Vec3> {
        self.outcomes.iter().map(|o| o.mhat).collect()
    }

    /// Indices of outcomes whose weight exceeds `tol`.
    pub fn support(&self, tol: f64) -> Vec<usize> {
        (0..self.len())
            .filter(|&a| self.outcomes[a].mu > tol)
            .collect()
    }

    /// `mu_a (I + r mhat_a . sigma)`.
    pub fn noisy_effect(&self, a: usize, r: f64) -> Effect {
        let o = &self.outcomes[a];
        Effect::new(o.mu, o.mhat * (o.mu * r))
    }

    /// The noisy POVM `{M_a^r}`.
    pub fn noisy(&self, r: f64) -> Povm {
        Povm::new((0..self.len()).map(|a| self.noisy_effect(a, r)).collect())
    }

    pub fn to_povm(&self) -> Povm {
        self.noisy(1.0)
    }
}

/// Draws a random extremal POVM with `n` outcomes.
///
/// Two outcomes are always an antipodal pair of weight 1/2. Three outcomes
/// are drawn in a uniformly random plane (extremal triples are coplanar);
/// four outcomes use four uniform directions. Weights solve `sum mu mhat = 0`,
/// `sum mu = 1`, and draws with a weight outside `(1e-6, 1/2]` are redrawn.
pub fn sample_extremal_povm(n: usize, seed: u64) -> Result<ExtremalPovm> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_extremal_povm_with(n, &mut rng)
}

const SAMPLE_MIN_WEIGHT: f64 = 1e-6;
const SAMPLE_ATTEMPTS: usize = 10_000;

pub fn sample_extremal_povm_with<R: Rng>(n: usize, rng: &mut R) -> Result<ExtremalPovm> {
    match n {
        2 => ExtremalPovm::pvm(random_unit(rng)),
        3 => {
            for _ in 0..SAMPLE_ATTEMPTS {
                let (e1, e2) = orthonormal_pair(&random_unit(rng));
                let dirs: Vec<Vec3> = (0..3)
                    .map(|_| {
                        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
                        e1 * phi.cos() + e2 * phi.sin()
                    })
                    .collect();
                let lhs = Matrix3::from_fn(|row, col| match row {
                    0 => dirs[col].dot(&e1),
                    1 => dirs[col].dot(&e2),
                    _ => 1.0,
                });
                let Some(mu) = lhs.lu().solve(&Vector3::new(0.0, 0.0, 1.0)) else {
                    continue;
                };
                if let Some(povm) = accept(mu.as_slice(), &dirs) {
                    return Ok(povm);
                }
            }
            Err(Error::Sampling {
                n,
                attempts: SAMPLE_ATTEMPTS,
            })
        }
        4 => {
            for _ in 0..SAMPLE_ATTEMPTS {
                let dirs: Vec<Vec3> = (0..4).map(|_| random_unit(rng)).collect();
                let lhs = Matrix4::from_fn(|row, col| if row < 3 { dirs[col][row] } else { 1.0 });
                let Some(mu) = lhs.lu().solve(&Vector4::new(0.0, 0.0, 0.0, 1.0)) else {
                    continue;
                };
                if let Some(povm) = accept(mu.as_slice(), &dirs) {
                    return Ok(povm);
                }
            }
            Err(Error::Sampling {
                n,
                attempts: SAMPLE_ATTEMPTS,
            })
        }
        other => Err(Error::OutcomeCount(other)),
    }
}

fn accept(mu: &[f64], dirs: &[Vec3]) -> Option<ExtremalPovm> {
    if mu
        .iter()
        .any(|&m| !(m > SAMPLE_MIN_WEIGHT && m <= 0.5 + STRUCTURAL))
    {
        return None;
    }
    let outcomes = mu
        .iter()
        .zip(dirs)
        .map(|(&mu, &mhat)| Outcome {
            mu: mu.min(0.5),
            mhat,
        })
        .collect();
    ExtremalPovm::new(outcomes).ok()
}

/// Uniform direction on the unit sphere.
pub fn random_unit<R: Rng>(rng: &mut R) -> Vec3 {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let rho = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(rho * phi.cos(), rho * phi.sin(), z)
}

/// Two unit vectors completing `n` (assumed unit) to a right-handed frame.
pub fn orthonormal_pair(n: &Vec3) -> (Vec3, Vec3) {
    let helper = if n.x.abs() < 0.9 {
        Vec3::x()
    } else {
        Vec3::y()
    };
    let e1 = n.cross(&helper).normalize();
    let e2 = n.cross(&e1);
    (e1, e2)
}

pub(crate) fn check_unit(v: &Vec3, tol: f64) -> Result<()> {
    let norm = v.norm();
    if (norm - 1.0).abs() > tol {
        return Err(Error::NonUnitVector { norm });
    }
    Ok(())
}

fn normalized(v: Vec3) -> Result<Vec3> {
    let norm = v.norm();
    if norm.is_nan() || norm <= 0.0 || norm.is_infinite() {
        return Err(Error::NonUnitVector { norm });
    }
    Ok(v / norm)
}

pub(crate) fn check_range(what: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if !(value >= lo && value <= hi) {
        return Err(Error::OutOfRange { what, value });
    }
    Ok(())
}
