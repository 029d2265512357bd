//! Deterministic scalar kernels: the standard normal CDF, a grid-then-golden
//! maximizer and a monotone crossing bisection.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Numerical tolerances used by the pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<T> {
    /// Absolute accuracy target of [`std_normal_cdf`].
    pub abs_fn_tol: T,
    /// Bracket width at which [`bisect_crossing`] stops.
    pub bisect_x_tol: T,
    /// Bracket width at which [`maximize_scalar`] stops.
    pub scalar_opt_tol: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Self {
            abs_fn_tol: T::lit(1e-10),
            bisect_x_tol: T::lit(1e-7),
            scalar_opt_tol: T::lit(1e-9),
        }
    }
}

impl<T: Real> Tolerances<T> {
    pub fn new(abs_fn_tol: T, bisect_x_tol: T, scalar_opt_tol: T) -> Result<Self> {
        for (name, v) in [
            ("abs_fn_tol", abs_fn_tol),
            ("bisect_x_tol", bisect_x_tol),
            ("scalar_opt_tol", scalar_opt_tol),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be positive")));
            }
        }
        Ok(Self { abs_fn_tol, bisect_x_tol, scalar_opt_tol })
    }
}

// Below this erfc uses the positive-term series for erf, above it the
// continued fraction.
const ERFC_SWITCH: f64 = 2.0;

/// erf(z) for z ≥ 0 via erf(z) = 2/√π · e^{-z²} · Σ 2ⁿ z^{2n+1} / (2n+1)!!.
fn erf_series<T: Real>(z: T) -> T {
    let z2 = z * z;
    let two = T::lit(2.0);
    let mut term = z;
    let mut sum = z;
    let mut n = 0usize;
    while n < 400 {
        n += 1;
        term = term * two * z2 / T::from_usize_lossy(2 * n + 1);
        sum += term;
        if term <= sum * T::epsilon() {
            break;
        }
    }
    T::FRAC_2_SQRT_PI() * (-z2).exp() * sum
}

/// erfc(z) for z > 0 via the continued fraction
/// erfc(z) = e^{-z²}/√π · 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + …)))),
/// evaluated with the modified Lentz recurrence.
fn erfc_continued_fraction<T: Real>(z: T) -> T {
    let tiny = T::min_positive_value() * T::lit(1e10);
    let half = T::lit(0.5);
    let mut f = z;
    let mut c = f;
    let mut d = T::zero();
    for n in 1..2000usize {
        let a = T::from_usize_lossy(n) * half;
        d = z + a * d;
        if d == T::zero() {
            d = tiny;
        }
        c = z + a / c;
        if c == T::zero() {
            c = tiny;
        }
        d = d.recip();
        let delta = c * d;
        f *= delta;
        if (delta - T::one()).abs() <= T::epsilon() {
            break;
        }
    }
    (-z * z).exp() * T::FRAC_2_SQRT_PI() * T::lit(0.5) / f
}

fn erfc_nonneg<T: Real>(z: T) -> T {
    if z < T::lit(ERFC_SWITCH) {
        T::one() - erf_series(z)
    } else {
        erfc_continued_fraction(z)
    }
}

/// Standard normal cumulative distribution function Φ(x).
pub fn std_normal_cdf<T: Real>(x: T) -> Result<T> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("std_normal_cdf of non-finite {x}")));
    }
    let tail = T::lit(0.5) * erfc_nonneg(x.abs() * T::FRAC_1_SQRT_2());
    Ok(if x >= T::zero() { T::one() - tail } else { tail })
}

const GRID_POINTS: usize = 200;

/// Maximizes `f` over `[lo, hi]`: a 200-point grid locates the best cell,
/// then golden-section search refines inside the neighbouring cells until
/// the bracket is narrower than `tol`.
pub fn maximize_scalar<T, F>(mut f: F, lo: T, hi: T, tol: T) -> Result<(T, T)>
where
    T: Real,
    F: FnMut(T) -> T,
{
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!("invalid bracket [{lo}, {hi}]")));
    }
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let step = (hi - lo) / T::from_usize_lossy(GRID_POINTS - 1);
    let grid = |i: usize| {
        if i == GRID_POINTS - 1 {
            hi
        } else {
            lo + step * T::from_usize_lossy(i)
        }
    };
    let mut best_i = 0;
    let mut best_f = T::neg_infinity();
    for i in 0..GRID_POINTS {
        let v = f(grid(i));
        if v.is_nan() {
            return Err(Error::Domain(format!("objective is NaN at {}", grid(i))));
        }
        if v > best_f {
            best_f = v;
            best_i = i;
        }
    }
    let mut a = grid(best_i.saturating_sub(1));
    let mut b = grid((best_i + 1).min(GRID_POINTS - 1));

    let inv_phi = T::lit(0.618_033_988_749_894_9);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iters = 0;
    while (b - a) > tol && iters < 500 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        iters += 1;
    }
    let mid = (a + b) * T::lit(0.5);
    let fm = f(mid);
    let mut best = (grid(best_i), best_f);
    for cand in [(mid, fm), (c, fc), (d, fd)] {
        if cand.1 > best.1 {
            best = cand;
        }
    }
    Ok(best)
}

const MONOTONE_SAMPLES: usize = 11;

/// Finds the sign change of a monotone `g` on `[lo, hi]` by bisection.
///
/// Monotonicity is the caller's contract; it is spot-checked on an evenly
/// spaced sample before bisecting and reported as [`Error::NotMonotone`].
pub fn bisect_crossing<T, G>(mut g: G, lo: T, hi: T, tol: T) -> Result<T>
where
    T: Real,
    G: FnMut(T) -> Result<T>,
{
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!("invalid bracket [{lo}, {hi}]")));
    }
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let step = (hi - lo) / T::from_usize_lossy(MONOTONE_SAMPLES - 1);
    let mut samples = Vec::with_capacity(MONOTONE_SAMPLES);
    for i in 0..MONOTONE_SAMPLES {
        let x = if i == MONOTONE_SAMPLES - 1 { hi } else { lo + step * T::from_usize_lossy(i) };
        let v = g(x)?;
        if !v.is_finite() {
            return Err(Error::Domain(format!("crossing function not finite at {x}")));
        }
        samples.push(v);
    }
    let g_lo = samples[0];
    let g_hi = samples[MONOTONE_SAMPLES - 1];
    if g_lo == T::zero() {
        return Ok(lo);
    }
    if g_hi == T::zero() {
        return Ok(hi);
    }
    if (g_lo > T::zero()) == (g_hi > T::zero()) {
        return Err(Error::NoIntersection {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
            g_lo: g_lo.as_f64(),
            g_hi: g_hi.as_f64(),
        });
    }
    let increasing = g_hi > g_lo;
    let scale = samples.iter().fold(T::one(), |m, v| m.max(v.abs()));
    let slack = T::lit(1e-8) * scale;
    let monotone = samples.windows(2).all(|w| {
        if increasing {
            w[1] >= w[0] - slack
        } else {
            w[1] <= w[0] + slack
        }
    });
    if !monotone {
        return Err(Error::NotMonotone { lo: lo.as_f64(), hi: hi.as_f64() });
    }

    let (mut a, mut b) = (lo, hi);
    let lo_positive = g_lo > T::zero();
    let mut iters = 0;
    while b - a > tol && iters < 300 {
        let mid = (a + b) * T::lit(0.5);
        let v = g(mid)?;
        if v == T::zero() {
            return Ok(mid);
        }
        if (v > T::zero()) == lo_positive {
            a = mid;
        } else {
            b = mid;
        }
        iters += 1;
    }
    Ok((a + b) * T::lit(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_at_zero_is_half() {
        assert_eq!(std_normal_cdf(0.0_f64).unwrap(), 0.5);
    }

    #[test]
    fn cdf_rejects_non_finite() {
        assert!(matches!(std_normal_cdf(f64::NAN), Err(Error::Domain(_))));
        assert!(std_normal_cdf(f64::INFINITY).is_err());
    }

    #[test]
    fn cdf_symmetry() {
        for i in 0..200 {
            let x = -9.0 + 0.09 * i as f64;
            let s = std_normal_cdf(x).unwrap() + std_normal_cdf(-x).unwrap();
            assert!((s - 1.0).abs() <= 1e-12, "x = {x}");
        }
    }

    #[test]
    fn cdf_monotone_across_branch_switch() {
        let centre = ERFC_SWITCH * std::f64::consts::SQRT_2;
        let mut prev = std_normal_cdf(centre - 1e-3).unwrap();
        for i in 1..=2000 {
            let x = centre - 1e-3 + 1e-6 * i as f64;
            let v = std_normal_cdf(x).unwrap();
            assert!(v >= prev, "non-monotone at {x}");
            prev = v;
        }
    }

    #[test]
    fn cdf_in_f32() {
        let v = std_normal_cdf(1.0_f32).unwrap();
        assert!((v - 0.841_344_7).abs() < 1e-6);
    }

    #[test]
    fn maximize_quadratic_vertex() {
        let (x, fx) = maximize_scalar(|x: f64| -(x - 2.0).powi(2), 0.0, 5.0, 1e-9).unwrap();
        assert!((x - 2.0).abs() < 1e-6);
        assert!(fx.abs() < 1e-12);
    }

    #[test]
    fn maximize_constant() {
        let (x, fx) = maximize_scalar(|_x: f64| 3.25, -1.0, 1.0, 1e-9).unwrap();
        assert!((-1.0..=1.0).contains(&x));
        assert_eq!(fx, 3.25);
    }

    #[test]
    fn maximize_rejects_bad_bracket() {
        assert!(maximize_scalar(|x: f64| x, 1.0, 1.0, 1e-9).is_err());
        assert!(maximize_scalar(|x: f64| x, 2.0, 1.0, 1e-9).is_err());
        assert!(maximize_scalar(|x: f64| x, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn maximize_boundary_maximum() {
        let (x, fx) = maximize_scalar(|x: f64| x, 0.0, 1.0, 1e-10).unwrap();
        assert_eq!(x, 1.0);
        assert_eq!(fx, 1.0);
    }

    #[test]
    fn bisect_linear() {
        let r = bisect_crossing(|x: f64| Ok(x - 2.0), 0.0, 5.0, 1e-9).unwrap();
        assert!((r - 2.0).abs() < 1e-9);
    }

    #[test]
    fn bisect_no_sign_change() {
        let e = bisect_crossing(|x: f64| Ok(x + 1.0), 0.0, 5.0, 1e-9).unwrap_err();
        assert!(matches!(e, Error::NoIntersection { .. }));
    }

    #[test]
    fn bisect_detects_non_monotone() {
        // sign change at both ends but a bump in the middle
        let e = bisect_crossing(|x: f64| Ok((x - 2.5) + 10.0 * (-((x - 1.0) * 4.0).powi(2)).exp()), 0.0, 5.0, 1e-9)
            .unwrap_err();
        assert!(matches!(e, Error::NotMonotone { .. }));
    }

    #[test]
    fn tolerances_validate() {
        assert!(Tolerances::new(1e-10, 1e-7, 0.0_f64).is_err());
        let t = Tolerances::<f64>::default();
        assert_eq!(t.abs_fn_tol, 1e-10);
        assert_eq!(t.bisect_x_tol, 1e-7);
        assert_eq!(t.scalar_opt_tol, 1e-9);
    }
}
