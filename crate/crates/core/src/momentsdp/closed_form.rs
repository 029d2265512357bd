//! Explicit forms of the MP(1,2,4) bound.

use crate::error::{Error, Result};
use crate::model::{shifted_moments, M3Mode};
use crate::numerics::maximize_scalar;
use crate::scalar::Real;

/// 4(2√3 − 3)/9.
pub fn leading_constant<T: Real>() -> T {
    T::lit(4.0) * (T::lit(2.0) * T::lit(3.0).sqrt() - T::lit(3.0)) / T::lit(9.0)
}

/// Search bracket for the free parameter `v`.
pub const V_BRACKET: (f64, f64) = (0.1, 100.0);

fn check<T: Real>(xi: T, d: T) -> Result<()> {
    if !(xi > T::zero() && xi <= T::one()) {
        return Err(Error::InvalidArgument(format!("xi = {xi} outside (0, 1]")));
    }
    if !(d > T::zero()) || !d.is_finite() {
        return Err(Error::InvalidArgument(format!("D = {d} must be positive")));
    }
    Ok(())
}

/// Exact MP(1,2,4) lower bound on Prob[Z < 0]:
/// `max_v c·(−2M₁/v + 3M₂/v² − M₄/v⁴)` with `c = 4(2√3−3)/9`.
/// Returns `(value, maximizing v)`.
pub fn closed_form_f2_with_v<T: Real>(xi: T, d: T) -> Result<(T, T)> {
    check(xi, d)?;
    let m = shifted_moments(xi, d, M3Mode::Basic)?;
    let c = leading_constant::<T>();
    let objective = |v: T| {
        let v2 = v * v;
        c * (-T::lit(2.0) * m.m1 / v + T::lit(3.0) * m.m2 / v2 - m.b4 / (v2 * v2))
    };
    let (v, value) = maximize_scalar(objective, T::lit(V_BRACKET.0), T::lit(V_BRACKET.1), T::lit(1e-10))?;
    Ok((value, v))
}

pub fn closed_form_f2<T: Real>(xi: T, d: T) -> Result<T> {
    closed_form_f2_with_v(xi, d).map(|(value, _)| value)
}

/// `s = max{5, 1/ξ² − 4/ξ, 1/ξ² − 8/ξ + 5}`, i.e. S(ξ)/ξ².
pub fn f3_s<T: Real>(xi: T) -> T {
    let inv = xi.recip();
    let inv2 = inv * inv;
    T::lit(5.0).max(inv2 - T::lit(4.0) * inv).max(inv2 - T::lit(8.0) * inv + T::lit(5.0))
}

/// Closed-form bound obtained by fixing `v = √(2M₄/3M₂)`:
/// `c·(√(6(Dξ²+ξ⁴)/Q) + (9/4)(D+ξ²)²/Q)`, `Q = 3D² + (6+s)Dξ² + ξ⁴`.
pub fn f3<T: Real>(xi: T, d: T) -> Result<T> {
    check(xi, d)?;
    let s = f3_s(xi);
    let xi2 = xi * xi;
    let q = T::lit(3.0) * d * d + (T::lit(6.0) + s) * d * xi2 + xi2 * xi2;
    let root = (T::lit(6.0) * (d * xi2 + xi2 * xi2) / q).sqrt();
    let square = T::lit(2.25) * (d + xi2) * (d + xi2) / q;
    Ok(leading_constant::<T>() * (root + square))
}
