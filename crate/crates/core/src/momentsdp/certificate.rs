//! Dual certificates and the rounding layer that turns approximate solver
//! output into an exactly dual-feasible polynomial.
//!
//! Restoration works on the polynomial `g = ∑ y_r x^r`:
//!
//! 1. sign constraints are enforced on `y₃` (and `y₄`);
//! 2. both Gram matrices are projected onto the affine space of matrices
//!    whose antidiagonals reproduce `g − 1` and `g(−x)`;
//! 3. if a projected Gram matrix has `λ_min < floor`, both blocks get
//!    `ε·I + ε·W` where `W ⪰ 0` represents `1.5(1 + x⁴) − x − x² − x³`
//!    at `x = t²`. Together they add exactly `2.5ε(1 + x⁴)`, which is
//!    absorbed by raising `y₀` and `y₄` by `2.5ε`.
//!
//! The objective is then recomputed from `y` with a floating-point slack,
//! so the exported value is an upper bound on the primal optimum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::Real;

use super::assemble::{antidiagonal, antidiagonal_sum, GRAM_DIM};
use super::{MomentProblem, MomentSet};

/// Identity residual accepted by [`DualCertificate::verify`].
pub const IDENTITY_TOL: f64 = 1e-9;
/// Pointwise slack accepted on `g(x) − 1_{x≥0}`.
pub const POINTWISE_TOL: f64 = 1e-8;
/// Largest objective inflation restoration may introduce.
pub const MAX_INFLATION: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CertificateResiduals<T> {
    /// Largest |antidiagonal sum − target| over both blocks.
    pub identity_max: T,
    pub min_pivot_plus: T,
    pub min_pivot_minus: T,
    /// Diagonal shift ε applied during restoration (0 when none was needed).
    pub shift: T,
    /// Restored objective minus the objective of the incoming `y`.
    pub inflation: T,
}

/// Polynomial `g(x) = ∑ y_r x^r` dominating `1_{x≥0}` plus Gram matrices
/// proving it. `objective` upper-bounds max Prob[Z ≥ 0].
///
/// Serialized as `{"y", "gram_plus", "gram_minus", "objective", "residuals",
/// "moments", "constraint_set"}` so the bound can be re-checked externally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DualCertificate<T> {
    pub y: [T; 5],
    /// Gram matrix of `g(t²) − 1` in the basis (1, t, …, t⁴).
    pub gram_plus: Mat<T>,
    /// Gram matrix of `g(−t²)` in the same basis.
    pub gram_minus: Mat<T>,
    pub objective: T,
    pub residuals: CertificateResiduals<T>,
    /// `[1, M1, M2, L3, B4]`.
    pub moments: [T; 5],
    pub constraint_set: Vec<u8>,
}

/// Solver output before restoration.
#[derive(Debug, Clone)]
pub struct RawDual<T> {
    pub y: [T; 5],
    pub gram_plus: Mat<T>,
    pub gram_minus: Mat<T>,
}

fn plus_targets<T: Real>(y: &[T; 5]) -> [T; 9] {
    let mut t = [T::zero(); 9];
    for l in 0..5 {
        t[2 * l] = y[l];
    }
    t[0] -= T::one();
    t
}

fn minus_targets<T: Real>(y: &[T; 5]) -> [T; 9] {
    let mut t = [T::zero(); 9];
    for l in 0..5 {
        t[2 * l] = if l % 2 == 0 { y[l] } else { -y[l] };
    }
    t
}

/// Least-norm correction putting every antidiagonal sum on target.
fn project_gram<T: Real>(v: &Mat<T>, targets: &[T; 9]) -> Mat<T> {
    let mut out = v.symmetrize();
    for (k, &target) in targets.iter().enumerate() {
        let r = target - antidiagonal_sum(&out, k);
        let count = T::from_usize_lossy(antidiagonal(GRAM_DIM, k).count());
        for (i, j) in antidiagonal(GRAM_DIM, k) {
            out[(i, j)] += r / count;
        }
    }
    out
}

fn identity_residual<T: Real>(v: &Mat<T>, targets: &[T; 9]) -> T {
    targets.iter().enumerate().map(|(k, &t)| (antidiagonal_sum(v, k) - t).abs()).fold(T::zero(), T::max)
}

/// PSD matrix representing `1.5 + 1.5t⁸ − t² − t⁴ − t⁶`
/// = `((t²−1)(a t² + 1/a))² + (1.5 − 1/1.5)(t²−1)²` with `a = √1.5`.
fn shift_companion<T: Real>() -> Mat<T> {
    let a = T::lit(1.5).sqrt();
    let b = a.recip();
    let c = (T::lit(1.5) - T::lit(1.5).recip()).sqrt();
    let u1 = [-b, T::zero(), b - a, T::zero(), a];
    let u2 = [-c, T::zero(), c, T::zero(), T::zero()];
    Mat::outer(&u1).add(&Mat::outer(&u2))
}

fn objective_of<T: Real>(y: &[T; 5], moments: &[T; 5]) -> (T, T) {
    let mut value = T::zero();
    let mut magnitude = T::zero();
    for (&yl, &ml) in y.iter().zip(moments) {
        value += yl * ml;
        magnitude += (yl * ml).abs();
    }
    (value, magnitude)
}

/// Objective of `y` plus a slack covering the rounding of the sum.
fn certified_objective<T: Real>(y: &[T; 5], moments: &[T; 5]) -> T {
    let (value, magnitude) = objective_of(y, moments);
    value + T::lit(8.0) * T::epsilon() * (magnitude + T::one())
}

fn psd_floor<T: Real>(v: &Mat<T>) -> T {
    T::lit(64.0) * T::epsilon() * (T::one() + v.max_abs())
}

/// Turns approximately feasible solver output into a certificate whose
/// objective is a valid upper bound.
pub fn restore_certificate<T: Real>(raw: &RawDual<T>, problem: &MomentProblem<T>) -> Result<DualCertificate<T>> {
    let moments = problem.moments.as_array();
    let (raw_objective, _) = objective_of(&raw.y, &moments);
    if raw.y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite dual multipliers".into()));
    }

    let mut y = raw.y;
    y[3] = match problem.set {
        MomentSet::Mp124 => T::zero(),
        MomentSet::Mp1234 => y[3].min(T::zero()),
    };
    y[4] = y[4].max(T::zero());

    let mut gp = project_gram(&raw.gram_plus, &plus_targets(&y));
    let mut gm = project_gram(&raw.gram_minus, &minus_targets(&y));
    let deficit_plus = psd_floor(&gp) - gp.min_eigenvalue();
    let deficit_minus = psd_floor(&gm) - gm.min_eigenvalue();
    let shift = deficit_plus.max(deficit_minus).max(T::zero());
    if shift > T::zero() {
        let add = Mat::scaled_identity(GRAM_DIM, shift).add(&shift_companion::<T>().scale(shift));
        let bump = T::lit(2.5) * shift;
        y[0] += bump;
        y[4] += bump;
        gp = project_gram(&gp.add(&add), &plus_targets(&y));
        gm = project_gram(&gm.add(&add), &minus_targets(&y));
    }

    let objective = certified_objective(&y, &moments);
    let inflation = objective - raw_objective;
    if inflation > T::lit(MAX_INFLATION) {
        return Err(Error::CertificateDegraded { inflation: inflation.as_f64() });
    }
    let identity_max = identity_residual(&gp, &plus_targets(&y)).max(identity_residual(&gm, &minus_targets(&y)));
    let cert = DualCertificate {
        y,
        residuals: CertificateResiduals {
            identity_max,
            min_pivot_plus: gp.pivoted_ldl().min_pivot(),
            min_pivot_minus: gm.pivoted_ldl().min_pivot(),
            shift,
            inflation,
        },
        gram_plus: gp,
        gram_minus: gm,
        objective,
        moments,
        constraint_set: problem.set.orders().to_vec(),
    };
    let check = cert.verify_algebraic();
    if !check.passed() {
        return Err(Error::CertificateInvalid(format!("{check:?}")));
    }
    Ok(cert)
}

/// Outcome of independently re-checking a certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Verification<T> {
    pub signs_ok: bool,
    pub identity_max: T,
    pub min_pivot: T,
    pub zero_pivot_residual: T,
    /// Recomputed ∑ y_r M_r minus the claimed objective (must be ≤ 0).
    pub objective_excess: T,
    /// Smallest sampled g(x) − 1_{x≥0}; +∞ when no points were sampled.
    pub min_pointwise: T,
}

impl<T: Real> Verification<T> {
    pub fn passed(&self) -> bool {
        self.signs_ok
            && self.identity_max <= T::lit(IDENTITY_TOL)
            && self.min_pivot >= T::zero()
            && self.zero_pivot_residual <= T::lit(IDENTITY_TOL)
            && self.objective_excess <= T::zero()
            && self.min_pointwise >= -T::lit(POINTWISE_TOL)
    }
}

impl<T: Real> DualCertificate<T> {
    /// g(x) by Horner's rule.
    pub fn eval(&self, x: T) -> T {
        self.y.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
    }

    /// Upper bound on max Prob[Z ≥ 0], clamped to [0, 1].
    pub fn opt_upper(&self) -> T {
        self.objective.max(T::zero()).min(T::one())
    }

    fn verify_algebraic(&self) -> Verification<T> {
        let signs_ok = match self.constraint_set.as_slice() {
            [1, 2, 4] => self.y[3] == T::zero(),
            [1, 2, 3, 4] => self.y[3] <= T::zero(),
            _ => false,
        } && self.y[4] >= T::zero();
        let identity_max = identity_residual(&self.gram_plus, &plus_targets(&self.y))
            .max(identity_residual(&self.gram_minus, &minus_targets(&self.y)));
        let lp = self.gram_plus.pivoted_ldl();
        let lm = self.gram_minus.pivoted_ldl();
        let (value, _) = objective_of(&self.y, &self.moments);
        Verification {
            signs_ok,
            identity_max,
            min_pivot: lp.min_pivot().min(lm.min_pivot()),
            zero_pivot_residual: lp.zero_pivot_residual.max(lm.zero_pivot_residual),
            objective_excess: value - self.objective,
            min_pointwise: T::infinity(),
        }
    }

    /// Full re-verification: signs, Gram identities, pivoted factorization,
    /// objective, and `g(x) − 1_{x≥0}` at `samples` seeded points in [−50, 50].
    pub fn verify(&self, samples: usize, seed: u64) -> Verification<T> {
        let mut out = self.verify_algebraic();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points: Vec<T> = (0..samples).map(|_| T::lit(rng.gen_range(-50.0..=50.0))).collect();
        points.push(T::zero());
        for x in points {
            let indicator = if x >= T::zero() { T::one() } else { T::zero() };
            out.min_pointwise = out.min_pointwise.min(self.eval(x) - indicator);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_companion_represents_its_polynomial() {
        let w = shift_companion::<f64>();
        let expect = [1.5, 0.0, -1.0, 0.0, -1.0, 0.0, -1.0, 0.0, 1.5];
        for (k, &e) in expect.iter().enumerate() {
            assert!((antidiagonal_sum(&w, k) - e).abs() < 1e-14, "k = {k}");
        }
        assert!(w.min_eigenvalue() > -1e-14);
    }

    #[test]
    fn projection_hits_targets() {
        let v = Mat::from_rows(&(0..5).map(|i| (0..5).map(|j| ((i * 7 + j * 3) % 5) as f64).collect()).collect::<Vec<_>>());
        let targets = [1.0, 0.0, 2.0, 0.0, 3.0, 0.0, -1.0, 0.0, 4.0];
        let p = project_gram(&v, &targets);
        assert!(identity_residual(&p, &targets) < 1e-14);
    }
}
