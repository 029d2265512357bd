//! Two-point random variables, instance statistics, the shifted-moment
//! bounds for `Z = ∑Yᵢ − ξ`, and the truncation that maps an arbitrary
//! mean-zero instance with `Xᵢ ≥ −1` onto a bounded one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

// Slack allowed when checking support bounds of deserialized or rescaled data.
const SUPPORT_SLACK: f64 = 1e-12;

/// Mean-zero variable taking `−a` with probability `b/(a+b)` and `b` with
/// probability `a/(a+b)`. `a = b = 0` is the constant zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TwoPointVar<T> {
    pub a: T,
    pub b: T,
}

impl<T: Real> TwoPointVar<T> {
    pub fn new(a: T, b: T) -> Self {
        Self { a, b }
    }

    pub fn is_degenerate(&self) -> bool {
        self.a + self.b == T::zero()
    }

    /// Prob[Y = −a].
    pub fn prob_neg(&self) -> T {
        if self.is_degenerate() {
            T::one()
        } else {
            self.b / (self.a + self.b)
        }
    }

    /// Prob[Y = b].
    pub fn prob_pos(&self) -> T {
        if self.is_degenerate() {
            T::zero()
        } else {
            self.a / (self.a + self.b)
        }
    }

    /// E[Y²] = ab.
    pub fn variance(&self) -> T {
        self.a * self.b
    }

    /// E[|Y|³] = ab(a²+b²)/(a+b).
    pub fn abs_third(&self) -> T {
        if self.is_degenerate() {
            T::zero()
        } else {
            self.a * self.b * (self.a * self.a + self.b * self.b) / (self.a + self.b)
        }
    }

    fn check(&self, xi: T) -> Result<()> {
        let slack = T::lit(SUPPORT_SLACK);
        let ok = self.a.is_finite()
            && self.b.is_finite()
            && self.a >= T::zero()
            && self.b >= T::zero()
            && self.a <= xi + slack
            && self.b <= T::one() + slack;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "two-point variable (a = {}, b = {}) violates 0 ≤ a ≤ ξ = {xi}, 0 ≤ b ≤ 1",
                self.a, self.b
            )))
        }
    }
}

/// Independent two-point variables `Yᵢ ∈ [−ξ, 1]` together with `ξ`.
///
/// JSON form: `{"xi": 0.2, "vars": [{"a": 0.2, "b": 1.0}, ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Instance<T> {
    pub xi: T,
    pub vars: Vec<TwoPointVar<T>>,
}

impl<T: Real> Instance<T> {
    pub fn new(xi: T, vars: Vec<TwoPointVar<T>>) -> Result<Self> {
        let inst = Self { xi, vars };
        inst.validate()?;
        Ok(inst)
    }

    /// Checks `0 < ξ ≤ 1` and every variable's support bounds.
    pub fn validate(&self) -> Result<()> {
        if !(self.xi > T::zero() && self.xi <= T::one()) {
            return Err(Error::InvalidArgument(format!("xi = {} outside (0, 1]", self.xi)));
        }
        self.vars.iter().try_for_each(|v| v.check(self.xi))
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn stats(&self) -> InstanceStats<T> {
        stats(self)
    }
}

/// Sum-level statistics of an instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct InstanceStats<T> {
    /// Variance of the sum, ∑ aᵢbᵢ.
    pub d: T,
    /// ∑ E|Yᵢ|³.
    pub t_b: T,
    /// ∑ aᵢbᵢ(aᵢ − bᵢ), so that E[Z³] = −ξ³ − 3ξD − T_M.
    pub t_m: T,
}

pub fn stats<T: Real>(instance: &Instance<T>) -> InstanceStats<T> {
    let mut out = InstanceStats { d: T::zero(), t_b: T::zero(), t_m: T::zero() };
    for v in instance.vars.iter().filter(|v| !v.is_degenerate()) {
        out.d += v.variance();
        out.t_b += v.abs_third();
        out.t_m += v.variance() * (v.a - v.b);
    }
    out
}

fn check_xi<T: Real>(xi: T) -> Result<()> {
    if xi > T::zero() && xi <= T::one() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("xi = {xi} outside (0, 1]")))
    }
}

/// Maximum of `a² + b² − 4ab − 4ξ(b − a)` over `[0, ξ] × [0, 1]`.
///
/// The function is convex in each coordinate, so the maximum sits on one
/// of the four corners `(0,0), (ξ,0), (0,1), (ξ,1)`.
pub fn s_of_xi<T: Real>(xi: T) -> Result<T> {
    check_xi(xi)?;
    let corner = |a: T, b: T| a * a + b * b - T::lit(4.0) * a * b - T::lit(4.0) * xi * (b - a);
    Ok([
        corner(T::zero(), T::zero()),
        corner(xi, T::zero()),
        corner(T::zero(), T::one()),
        corner(xi, T::one()),
    ]
    .into_iter()
    .fold(T::neg_infinity(), T::max))
}

/// How the lower bound on the third shifted moment is formed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", rename_all = "snake_case")]
pub enum M3Mode<T> {
    /// `E[Z³] ≥ −ξ³ − 4ξD`, using only `aᵢ − bᵢ ≤ ξ`.
    Basic,
    /// `T_B = sD` is known; uses `T_B + T_M ≤ 2ξD`.
    Refined { s: T },
}

/// Moment data of `Z = ∑Yᵢ − ξ`: equalities for orders 1, 2 and the
/// bounds `E[Z³] ≥ L3`, `E[Z⁴] ≤ B4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ShiftedMoments<T> {
    pub m1: T,
    pub m2: T,
    pub l3: T,
    pub b4: T,
    pub xi: T,
    pub d: T,
}

impl<T: Real> ShiftedMoments<T> {
    /// `[1, M1, M2, L3, B4]`, the right-hand sides of the moment constraints.
    pub fn as_array(&self) -> [T; 5] {
        [T::one(), self.m1, self.m2, self.l3, self.b4]
    }
}

/// Basic third-moment lower bound −ξ³ − 4ξD.
pub fn basic_l3<T: Real>(xi: T, d: T) -> T {
    -xi * xi * xi - T::lit(4.0) * xi * d
}

/// Upper bound on E[Z⁴]: 3D² + 6ξ²D + ξ⁴ + S(ξ)·D.
pub fn fourth_moment_bound<T: Real>(xi: T, d: T) -> Result<T> {
    let s = s_of_xi(xi)?;
    let xi2 = xi * xi;
    Ok(T::lit(3.0) * d * d + T::lit(6.0) * xi2 * d + xi2 * xi2 + s * d)
}

pub fn shifted_moments<T: Real>(xi: T, d: T, mode: M3Mode<T>) -> Result<ShiftedMoments<T>> {
    check_xi(xi)?;
    if !(d > T::zero()) || !d.is_finite() {
        return Err(Error::InvalidArgument(format!("D = {d} must be positive")));
    }
    let l3 = match mode {
        M3Mode::Basic => basic_l3(xi, d),
        M3Mode::Refined { s } => {
            if !(s > T::zero() && s <= T::one()) {
                return Err(Error::InvalidArgument(format!("s = {s} outside (0, 1]")));
            }
            if s >= xi {
                -xi * xi * xi - T::lit(5.0) * xi * d + s * d
            } else {
                basic_l3(xi, d)
            }
        }
    };
    Ok(ShiftedMoments { m1: -xi, m2: d + xi * xi, l3, b4: fourth_moment_bound(xi, d)?, xi, d })
}

/// A raw two-point variable `X ∈ {−a, b}` with `E[X] = 0`, `0 < a ≤ 1`, `b > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RawPair<T> {
    pub a: T,
    pub b: T,
}

/// Result of splitting raw variables into a large-`b` group and a bounded,
/// rescaled group.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition<T> {
    /// Original indices of the large-`b` group, in sorted order.
    pub group_a: Vec<usize>,
    /// Original indices of the remaining variables, in sorted order.
    pub group_b: Vec<usize>,
    /// ∑ aᵢ over `group_a`.
    pub a_sum: T,
    /// `Yᵢ = Xᵢ / (τ(a_sum + 1))` for `i ∈ group_b`, with `ξ = 1/τ`.
    pub transformed: Instance<T>,
}

impl<T: Real> Partition<T> {
    /// Prob[∑_{i∈A} Xᵢ = −a_sum] = ∏ bᵢ/(aᵢ+bᵢ).
    pub fn all_negative_mass(&self, raw: &[RawPair<T>]) -> T {
        self.group_a.iter().map(|&i| raw[i].b / (raw[i].a + raw[i].b)).fold(T::one(), |p, q| p * q)
    }
}

pub fn truncate_partition<T: Real>(raw: &[RawPair<T>], tau: T) -> Result<Partition<T>> {
    if !(tau > T::one()) || !tau.is_finite() {
        return Err(Error::InvalidArgument(format!("tau = {tau} must exceed 1")));
    }
    for (i, p) in raw.iter().enumerate() {
        if !(p.a > T::zero() && p.a <= T::one() && p.b > T::zero() && p.b.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "raw pair {i} (a = {}, b = {}) needs 0 < a ≤ 1, b > 0",
                p.a, p.b
            )));
        }
    }
    let mut order: Vec<usize> = (0..raw.len()).collect();
    // stable sort keeps original index order among ties
    order.sort_by(|&i, &j| raw[j].b.partial_cmp(&raw[i].b).expect("finite b"));

    let mut prefix = T::zero();
    let mut n_large = 0;
    for (k, &i) in order.iter().enumerate() {
        prefix += raw[i].a;
        if raw[i].b >= tau * prefix {
            n_large = k + 1;
        }
    }
    let a_sum = order[..n_large].iter().map(|&i| raw[i].a).fold(T::zero(), |s, a| s + a);
    let xi = tau.recip();
    let scale = (tau * (a_sum + T::one())).recip();
    let vars = order[n_large..]
        .iter()
        .map(|&i| TwoPointVar::new((raw[i].a * scale).min(xi), (raw[i].b * scale).min(T::one())))
        .collect();
    Ok(Partition {
        group_a: order[..n_large].to_vec(),
        group_b: order[n_large..].to_vec(),
        a_sum,
        transformed: Instance::new(xi, vars)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn stats_single_var() {
        let inst = Instance::new(0.2, vec![TwoPointVar::new(0.2, 1.0)]).unwrap();
        let s = inst.stats();
        assert!(close(s.d, 0.2, 1e-15));
        assert!(close(s.t_b, 0.2 * (0.04 + 1.0) / 1.2, 1e-15));
        assert!(close(s.t_m, -0.16, 1e-15));
    }

    #[test]
    fn stats_empty_and_degenerate() {
        let empty = Instance::<f64>::new(0.2, vec![]).unwrap();
        assert_eq!(empty.stats(), InstanceStats { d: 0.0, t_b: 0.0, t_m: 0.0 });
        let zero = Instance::new(0.2, vec![TwoPointVar::new(0.0, 0.0); 3]).unwrap();
        assert_eq!(zero.stats(), InstanceStats { d: 0.0, t_b: 0.0, t_m: 0.0 });
        assert_eq!(zero.vars[0].prob_neg(), 1.0);
    }

    #[test]
    fn instance_rejects_out_of_range() {
        assert!(Instance::new(0.2, vec![TwoPointVar::new(0.3, 0.5)]).is_err());
        assert!(Instance::new(0.2, vec![TwoPointVar::new(0.1, 1.5)]).is_err());
        assert!(Instance::<f64>::new(0.0, vec![]).is_err());
        assert!(Instance::<f64>::new(1.5, vec![]).is_err());
    }

    #[test]
    fn instance_json_shape() {
        let inst: Instance<f64> = serde_json::from_str(r#"{"xi":0.2,"vars":[{"a":0.1,"b":0.5}]}"#).unwrap();
        assert_eq!(inst.vars[0], TwoPointVar::new(0.1, 0.5));
        let text = serde_json::to_string(&inst).unwrap();
        assert_eq!(text, r#"{"xi":0.2,"vars":[{"a":0.1,"b":0.5}]}"#);
    }

    #[test]
    fn s_of_xi_values() {
        assert!(close(s_of_xi(0.2).unwrap(), 0.2, 1e-15));
        assert!(close(s_of_xi(1.0).unwrap(), 5.0, 1e-15));
        assert!(close(s_of_xi(1e-9).unwrap(), 1.0, 1e-8));
        assert!(s_of_xi(0.0).is_err());
        assert!(s_of_xi(1.01).is_err());
    }

    #[test]
    fn shifted_moments_basic() {
        let m = shifted_moments(0.2, 2.374, M3Mode::Basic).unwrap();
        assert!(close(m.m1, -0.2, 1e-15));
        assert!(close(m.m2, 2.414, 1e-14));
        let b4 = 3.0 * 2.374 * 2.374 + 0.24 * 2.374 + 0.0016 + 0.2 * 2.374;
        assert!(close(m.b4, b4, 1e-12));
        assert!(close(m.b4, 17.9538, 1e-4));
        assert!(close(m.l3, -0.008 - 0.8 * 2.374, 1e-14));
    }

    #[test]
    fn shifted_moments_refined_cases() {
        let r = shifted_moments(0.2, 2.938, M3Mode::Refined { s: 1.0 }).unwrap();
        assert!(close(r.l3, -0.008, 1e-12));
        let low = shifted_moments(0.2, 1.7, M3Mode::Refined { s: 0.1 }).unwrap();
        let basic = shifted_moments(0.2, 1.7, M3Mode::Basic).unwrap();
        assert_eq!(low.l3, basic.l3);
        let at_xi = shifted_moments(0.2, 1.7, M3Mode::Refined { s: 0.2 }).unwrap();
        assert!(close(at_xi.l3, basic.l3, 1e-14));
        assert!(shifted_moments(0.2, 1.0, M3Mode::Refined { s: 1.2 }).is_err());
        assert!(shifted_moments(0.2, 0.0, M3Mode::Basic).is_err());
    }

    #[test]
    fn truncate_single_large() {
        let p = truncate_partition(&[RawPair { a: 0.1, b: 10.0 }], 5.0).unwrap();
        assert_eq!(p.group_a, vec![0]);
        assert!(p.group_b.is_empty());
        assert!(close(p.a_sum, 0.1, 1e-15));
        assert!(p.transformed.is_empty());
    }

    #[test]
    fn truncate_single_small() {
        let p = truncate_partition(&[RawPair { a: 0.5, b: 0.5 }], 5.0).unwrap();
        assert!(p.group_a.is_empty());
        assert_eq!(p.group_b, vec![0]);
        assert_eq!(p.a_sum, 0.0);
        let v = p.transformed.vars[0];
        assert!(close(v.b, 0.1, 1e-15));
        assert!(close(v.a, 0.1, 1e-15));
        assert!(close(p.transformed.xi, 0.2, 1e-15));
    }

    #[test]
    fn truncate_ties_break_by_index() {
        let raw = [RawPair { a: 0.3, b: 2.0 }, RawPair { a: 0.2, b: 2.0 }, RawPair { a: 0.1, b: 9.0 }];
        let p = truncate_partition(&raw, 2.0).unwrap();
        let mut all = p.group_a.clone();
        all.extend(&p.group_b);
        assert_eq!(all, vec![2, 0, 1]);
    }

    #[test]
    fn truncate_rejects_bad_tau() {
        assert!(truncate_partition(&[RawPair { a: 0.5, b: 0.5 }], 1.0).is_err());
        assert!(truncate_partition(&[RawPair { a: 1.5, b: 0.5 }], 3.0).is_err());
    }

    proptest! {
        #[test]
        fn s_of_xi_dominates_interior(xi in 0.01f64..1.0, u in 0.0f64..1.0, b in 0.0f64..1.0) {
            let a = u * xi;
            let val = a * a + b * b - 4.0 * a * b - 4.0 * xi * (b - a);
            prop_assert!(val <= s_of_xi(xi).unwrap() + 1e-12);
        }

        #[test]
        fn stats_invariants(
            xi in 0.01f64..1.0,
            raw in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0), 0..20),
        ) {
            let vars: Vec<_> = raw.iter().map(|&(u, b)| TwoPointVar::new(u * xi, b)).collect();
            let inst = Instance::new(xi, vars).unwrap();
            let s = inst.stats();
            let tol = 1e-12 * (1.0 + s.d);
            prop_assert!(s.t_b >= 0.0 && s.t_b <= s.d + tol);
            prop_assert!(s.t_b + s.t_m <= 2.0 * xi * s.d + tol);
            prop_assert!(s.t_m <= xi * s.d + tol);
            let max_abs = inst.vars.iter().fold(0.0f64, |m, v| m.max(v.a).max(v.b));
            prop_assert!(s.t_b <= max_abs * s.d + tol);
        }

        #[test]
        fn truncation_bounds(
            tau in 1.1f64..10.0,
            raw in proptest::collection::vec((0.01f64..1.0, 0.01f64..50.0), 1..16),
        ) {
            let pairs: Vec<_> = raw.iter().map(|&(a, b)| RawPair { a, b }).collect();
            let p = truncate_partition(&pairs, tau).unwrap();
            prop_assert_eq!(p.group_a.len() + p.group_b.len(), pairs.len());
            for v in &p.transformed.vars {
                prop_assert!(-v.a >= -1.0 / tau - 1e-12);
                prop_assert!(v.b <= 1.0 + 1e-12);
            }
            prop_assert!(p.all_negative_mass(&pairs) >= (-1.0 / tau).exp() - 1e-12);
        }
    }
}
