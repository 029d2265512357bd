//! Berry-Esseen side of the combination: bounds that improve as the
//! variance `D` of the sum grows.

use crate::error::{Error, Result};
use crate::numerics::std_normal_cdf;
use crate::scalar::Real;

/// Berry-Esseen constant `c₀` in `sup|F − Φ| ≤ c₀ψ₀`.
pub const C0: f64 = 0.56;

/// Berry-Esseen parameters. `c0` is fixed at [`C0`] unless explicitly
/// overridden through [`BerryEsseenParams::with_unsafe_constant`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerryEsseenParams<T> {
    c0: T,
    /// Uniform bound `|Xᵢ| ≤ K`.
    pub k: T,
}

impl<T: Real> BerryEsseenParams<T> {
    pub fn new(k: T) -> Result<Self> {
        if !(k > T::zero()) || !k.is_finite() {
            return Err(Error::InvalidArgument(format!("K = {k} must be positive")));
        }
        Ok(Self { c0: T::lit(C0), k })
    }

    /// Replaces the Berry-Esseen constant. Every bound computed with a value
    /// below the proven constant is unsound.
    pub fn with_unsafe_constant(mut self, c0: T) -> Self {
        self.c0 = c0;
        self
    }

    pub fn c0(&self) -> T {
        self.c0
    }

    /// Cap on ψ₀ from `|Xᵢ| ≤ K`: ψ₀ ≤ K/√D.
    pub fn psi0_cap(&self, d: T) -> T {
        self.k / d.sqrt()
    }

    /// `min(1, 0.5 + c₀·K/√D)`, an upper bound on Prob[X ≥ 0] for a
    /// mean-zero sum with variance `D`.
    pub fn generic_upper(&self, d: T) -> Result<T> {
        check_positive("D", d)?;
        Ok((T::lit(0.5) + self.c0 * self.psi0_cap(d)).min(T::one()))
    }

    /// `max(0, Φ(ξ/√D) − c₀·T_B/D^{3/2})`.
    pub fn f1_hat(&self, xi: T, d: T, t_b: T) -> Result<T> {
        check_xi(xi)?;
        check_positive("D", d)?;
        if !(t_b >= T::zero()) || t_b > d {
            return Err(Error::InvalidArgument(format!("T_B = {t_b} outside [0, D = {d}]")));
        }
        let sd = d.sqrt();
        let raw = std_normal_cdf(xi / sd)? - self.c0 * t_b / (d * sd);
        Ok(raw.max(T::zero()).min(T::one()))
    }

    /// [`Self::f1_hat`] with the worst case `T_B = D`.
    pub fn f1(&self, xi: T, d: T) -> Result<T> {
        self.f1_hat(xi, d, d)
    }
}

fn check_positive<T: Real>(name: &str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} = {v} must be positive")))
    }
}

fn check_xi<T: Real>(xi: T) -> Result<()> {
    if xi > T::zero() && xi <= T::one() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("xi = {xi} outside (0, 1]")))
    }
}

/// `min(1, 0.5 + 0.56·K/√D)`.
pub fn generic_upper<T: Real>(k: T, d: T) -> Result<T> {
    BerryEsseenParams::new(k)?.generic_upper(d)
}

/// Lower bound on Prob[∑Yᵢ ≤ ξ] for `max|Yᵢ| ≤ 1`: `max(0, Φ(ξ/√D) − 0.56/√D)`.
pub fn f1<T: Real>(xi: T, d: T) -> Result<T> {
    BerryEsseenParams::new(T::one())?.f1(xi, d)
}

/// Refined lower bound using `T_B = ∑E|Yᵢ|³`: `max(0, Φ(ξ/√D) − 0.56·T_B/D^{3/2})`.
pub fn f1_hat<T: Real>(xi: T, d: T, t_b: T) -> Result<T> {
    BerryEsseenParams::new(T::one())?.f1_hat(xi, d, t_b)
}
