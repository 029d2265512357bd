//! Combination of a moment-side bound (nonincreasing in `D`) and a
//! Berry-Esseen-side bound (nondecreasing in `D`): the worst case over `D`
//! sits at their crossing, and the final bound is `e^{−ξ}` times the common
//! value there.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::berry::{f1, f1_hat};
use crate::error::{Error, Result};
use crate::model::M3Mode;
use crate::momentsdp::{f3, moment_bound, DualCertificate, MomentSet};
use crate::numerics::bisect_crossing;
use crate::scalar::{floor_decimals, Real};

/// D-bracket for the theorem variants.
pub const D_BRACKET: (f64, f64) = (0.2, 50.0);
/// D-bracket for the refined variant and its s-sweep; crossings for small
/// `s` lie well below 0.2.
pub const SWEEP_D_BRACKET: (f64, f64) = (0.005, 50.0);
/// Bisection width in `D`.
pub const CROSSING_TOL: f64 = 1e-5;
/// Points in `curve_samples`.
pub const CURVE_POINTS: usize = 50;

/// Outcome of intersecting the two monotone curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Crossing<T> {
    pub d_star: T,
    /// `min(moment_value, be_value)`, a valid value wherever bisection stopped.
    pub common_value: T,
    pub moment_value: T,
    pub be_value: T,
    /// No sign change on the bracket; `d_star` is the better endpoint.
    pub no_crossing: bool,
}

/// Intersects a nonincreasing `moment_fn` with a nondecreasing `be_fn`.
pub fn crossing<T, M, B>(mut moment_fn: M, mut be_fn: B, lo: T, hi: T, tol: T) -> Result<Crossing<T>>
where
    T: Real,
    M: FnMut(T) -> Result<T>,
    B: FnMut(T) -> Result<T>,
{
    let found = bisect_crossing(|d| Ok(be_fn(d)? - moment_fn(d)?), lo, hi, tol);
    let (d_star, no_crossing) = match found {
        Ok(d) => (d, false),
        Err(Error::NotMonotone { .. }) => (single_sign_change(&mut moment_fn, &mut be_fn, lo, hi, tol)?, false),
        Err(Error::NoIntersection { .. }) => {
            let at_lo = moment_fn(lo)?.min(be_fn(lo)?);
            let at_hi = moment_fn(hi)?.min(be_fn(hi)?);
            (if at_hi > at_lo { hi } else { lo }, true)
        }
        Err(e) => return Err(e),
    };
    let moment_value = moment_fn(d_star)?;
    let be_value = be_fn(d_star)?;
    Ok(Crossing { d_star, common_value: moment_value.min(be_value), moment_value, be_value, no_crossing })
}

/// Log-spaced points used when the even-spaced monotonicity check fails.
const SCAN_POINTS: usize = 64;

/// Fallback for curves that are monotone only near the crossing (the refined
/// Berry-Esseen side turns down for large `D` when `s` is small): accepts
/// exactly one sign change of `be − moment` on a log-spaced scan and bisects
/// inside that cell.
fn single_sign_change<T, M, B>(moment_fn: &mut M, be_fn: &mut B, lo: T, hi: T, tol: T) -> Result<T>
where
    T: Real,
    M: FnMut(T) -> Result<T>,
    B: FnMut(T) -> Result<T>,
{
    let grid = log_grid(lo, hi, SCAN_POINTS);
    let mut h = Vec::with_capacity(grid.len());
    for &d in &grid {
        h.push(be_fn(d)? - moment_fn(d)?);
    }
    let changes: Vec<usize> = (1..h.len()).filter(|&i| (h[i - 1] > T::zero()) != (h[i] > T::zero())).collect();
    match changes.as_slice() {
        [i] => bisect_crossing(|d| Ok(be_fn(d)? - moment_fn(d)?), grid[i - 1], grid[*i], tol),
        _ => Err(Error::NotMonotone { lo: lo.as_f64(), hi: hi.as_f64() }),
    }
}

/// The four bound pipelines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Closed-form F3 against F1.
    ThmA1F3,
    /// MP(1,2,4) against F1.
    Thm42Mp124,
    /// MP(1,2,3,4) against F1.
    Thm43Mp1234,
    /// Refined MP(1,2,3,4) against the refined Berry-Esseen bound, minimized over s.
    Thm44Refined,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Self::ThmA1F3, Self::Thm42Mp124, Self::Thm43Mp1234, Self::Thm44Refined];

    pub fn label(&self) -> &'static str {
        match self {
            Self::ThmA1F3 => "thmA.1",
            Self::Thm42Mp124 => "thm4.2",
            Self::Thm43Mp1234 => "thm4.3",
            Self::Thm44Refined => "thm4.4",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            Self::ThmA1F3 => "approximate MP(1,2,4) and B-E",
            Self::Thm42Mp124 => "MP(1,2,4) and B-E",
            Self::Thm43Mp1234 => "MP(1,2,3,4) and B-E",
            Self::Thm44Refined => "MP(1,2,3,4) and B-E with refinement",
        }
    }

    /// Whether the moment side is backed by SDP certificates.
    pub fn is_certified(&self) -> bool {
        !matches!(self, Self::ThmA1F3)
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thmA1" | "thmA1_f3" | "thmA.1" => Ok(Self::ThmA1F3),
            "thm42" | "thm42_mp124" | "thm4.2" => Ok(Self::Thm42Mp124),
            "thm43" | "thm43_mp1234" | "thm4.3" => Ok(Self::Thm43Mp1234),
            "thm44" | "thm44_refined" | "thm4.4" => Ok(Self::Thm44Refined),
            _ => Err(Error::InvalidArgument(format!("unknown variant {s:?}"))),
        }
    }
}

/// One point of the two curves, unscaled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CurveSample<T> {
    pub d: T,
    pub moment_side: T,
    pub be_side: T,
}

/// Final bound `Prob[∑Xᵢ < 1] ≥ bound_value` with its supporting data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BoundReport<T> {
    pub name: String,
    pub xi: T,
    pub d_star: T,
    /// `e^{−ξ}·common_value`, floored to 4 decimals.
    pub bound_value: T,
    /// `e^{−ξ}·common_value` before rounding.
    pub raw_value: T,
    /// Certificates of the moment side at `d_star` (empty for closed forms).
    pub moment_certificates: Vec<DualCertificate<T>>,
    pub curve_samples: Vec<CurveSample<T>>,
    pub no_crossing: bool,
    /// Minimizing `T_B/D` ratio for the refined variant.
    pub s: Option<T>,
    /// "sdp-certificate" or "closed-form".
    pub provenance: String,
}

/// Side functions of one pipeline at fixed `ξ` (and `s` for the refined one).
#[derive(Debug, Clone, Copy)]
struct Sides<T> {
    variant: Variant,
    xi: T,
    s: T,
}

impl<T: Real> Sides<T> {
    fn moment(&self, d: T) -> Result<T> {
        Ok(self.certified(d)?.0)
    }

    /// `(1 − opt_upper, certificate)` of the moment problem at `d`.
    fn certified(&self, d: T) -> Result<(T, Option<DualCertificate<T>>)> {
        let (set, mode) = match self.variant {
            Variant::ThmA1F3 => return Ok((f3(self.xi, d)?, None)),
            Variant::Thm42Mp124 => (MomentSet::Mp124, M3Mode::Basic),
            Variant::Thm43Mp1234 => (MomentSet::Mp1234, M3Mode::Basic),
            Variant::Thm44Refined => (MomentSet::Mp1234, M3Mode::Refined { s: self.s }),
        };
        let b = moment_bound(self.xi, d, set, mode)?;
        Ok((T::one() - b.opt_upper, Some(b.certificate)))
    }

    fn be(&self, d: T) -> Result<T> {
        match self.variant {
            Variant::Thm44Refined => f1_hat(self.xi, d, self.s * d),
            _ => f1(self.xi, d),
        }
    }

    fn cross(&self, bracket: (f64, f64)) -> Result<Crossing<T>> {
        crossing(|d| self.moment(d), |d| self.be(d), T::lit(bracket.0), T::lit(bracket.1), T::lit(CROSSING_TOL))
    }

    fn samples(&self, bracket: (f64, f64)) -> Result<Vec<CurveSample<T>>> {
        log_grid(T::lit(bracket.0), T::lit(bracket.1), CURVE_POINTS)
            .into_par_iter()
            .map(|d| Ok(CurveSample { d, moment_side: self.moment(d)?, be_side: self.be(d)? }))
            .collect()
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                (a + (b - a) * T::from_usize_lossy(i) / T::from_usize_lossy(n.max(2) - 1)).exp()
            }
        })
        .collect()
}

/// Default s-grid `{0.05, 0.10, …, 1.00}`.
pub fn default_s_grid<T: Real>() -> Vec<T> {
    (1..=20).map(|i| T::from_usize_lossy(i) / T::lit(20.0)).collect()
}

fn check_xi<T: Real>(xi: T) -> Result<()> {
    if xi > T::zero() && xi <= T::one() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("xi = {xi} outside (0, 1]")))
    }
}

/// Computes one of the four final bounds at `ξ`.
pub fn feige_bound<T: Real>(variant: Variant, xi: T) -> Result<BoundReport<T>> {
    check_xi(xi)?;
    let s = match variant {
        Variant::Thm44Refined => {
            let sweep = g_sweep(xi, &default_s_grid())?;
            let best = sweep
                .iter()
                .min_by(|a, b| a.g.partial_cmp(&b.g).expect("finite g"))
                .expect("non-empty grid");
            best.s
        }
        _ => T::one(),
    };
    let sides = Sides { variant, xi, s };
    let bracket = if variant == Variant::Thm44Refined { SWEEP_D_BRACKET } else { D_BRACKET };
    let c = sides.cross(bracket)?;
    let (_, certificate) = sides.certified(c.d_star)?;
    let raw_value = (-xi).exp() * c.common_value;
    Ok(BoundReport {
        name: variant.label().to_string(),
        xi,
        d_star: c.d_star,
        bound_value: floor_decimals(raw_value, 4),
        raw_value,
        moment_certificates: certificate.into_iter().collect(),
        curve_samples: sides.samples(bracket)?,
        no_crossing: c.no_crossing,
        s: matches!(variant, Variant::Thm44Refined).then_some(s),
        provenance: if variant.is_certified() { "sdp-certificate" } else { "closed-form" }.to_string(),
    })
}

/// One point of the s-sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SweepPoint<T> {
    pub s: T,
    /// `e^{−ξ}·min_D max{F̂1(ξ,D,sD), F̂4(ξ,D,sD)}`.
    pub g: T,
    pub d_star: T,
    pub no_crossing: bool,
}

/// `g(s)` over `s_grid`, evaluated in parallel and returned in grid order.
pub fn g_sweep<T: Real>(xi: T, s_grid: &[T]) -> Result<Vec<SweepPoint<T>>> {
    check_xi(xi)?;
    if let Some(bad) = s_grid.iter().find(|&&s| !(s > T::zero() && s <= T::one())) {
        return Err(Error::InvalidArgument(format!("s = {bad} outside (0, 1]")));
    }
    s_grid
        .par_iter()
        .map(|&s| {
            let c = Sides { variant: Variant::Thm44Refined, xi, s }.cross(SWEEP_D_BRACKET)?;
            Ok(SweepPoint { s, g: (-xi).exp() * c.common_value, d_star: c.d_star, no_crossing: c.no_crossing })
        })
        .collect()
}

/// Figure identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Figure {
    /// F2 (MP(1,2,4)) and F1 against D.
    Fig1,
    /// F4 (MP(1,2,3,4)) and F1 against D.
    Fig2,
    /// g(s) against s.
    Fig3,
    /// F2 and F3 against D.
    FigA1,
    /// Refined F̂4 and F̂1 at s = 1 against D.
    FigInterplay,
}

impl std::str::FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(Self::Fig1),
            "fig2" => Ok(Self::Fig2),
            "fig3" => Ok(Self::Fig3),
            "figA1" | "figa1" => Ok(Self::FigA1),
            "fig_interplay" => Ok(Self::FigInterplay),
            _ => Err(Error::InvalidArgument(format!("unknown figure {s:?}"))),
        }
    }
}

/// Column names plus numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureTable<T> {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<T>>,
}

impl<T: Real> FigureTable<T> {
    /// CSV with every value at 10 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format_sig(v.as_f64(), 10)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// `x` with `digits` significant digits, without exponent for moderate magnitudes.
pub fn format_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return format!("{:.prec$}", 0.0, prec = digits.saturating_sub(1));
    }
    let magnitude = x.abs().log10().floor() as i32;
    if (-5..15).contains(&magnitude) {
        let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.prec$e}", prec = digits - 1)
    }
}

/// Default D-grid for the curve figures: 0.2..10 in steps of 0.1.
pub fn default_d_grid<T: Real>() -> Vec<T> {
    (2..=100).map(|i| T::from_usize_lossy(i) / T::lit(10.0)).collect()
}

/// Curve data for `which`. `grid` is a D-grid for the curve figures and an
/// s-grid for `Fig3`.
pub fn figure_data<T: Real>(which: Figure, xi: T, grid: &[T]) -> Result<FigureTable<T>> {
    let d_header = vec!["D", "moment_bound", "berry_esseen_bound"];
    let curve = |variant: Variant, s: T| -> Result<FigureTable<T>> {
        let sides = Sides { variant, xi, s };
        let rows = grid
            .par_iter()
            .map(|&d| Ok(vec![d, sides.moment(d)?, sides.be(d)?]))
            .collect::<Result<Vec<_>>>()?;
        Ok(FigureTable { header: d_header.clone(), rows })
    };
    match which {
        Figure::Fig1 => curve(Variant::Thm42Mp124, T::one()),
        Figure::Fig2 => curve(Variant::Thm43Mp1234, T::one()),
        Figure::FigInterplay => curve(Variant::Thm44Refined, T::one()),
        Figure::Fig3 => Ok(FigureTable {
            header: vec!["s", "g"],
            rows: g_sweep(xi, grid)?.into_iter().map(|p| vec![p.s, p.g]).collect(),
        }),
        Figure::FigA1 => {
            let f2 = Sides { variant: Variant::Thm42Mp124, xi, s: T::one() };
            let rows = grid
                .par_iter()
                .map(|&d| Ok(vec![d, f2.moment(d)?, f3(xi, d)?]))
                .collect::<Result<Vec<_>>>()?;
            Ok(FigureTable { header: vec!["D", "f2", "f3"], rows })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_of_lines() {
        let c = crossing(|d: f64| Ok(1.0 - d), Ok, 0.0, 1.0, 1e-9).unwrap();
        assert!((c.d_star - 0.5).abs() < 1e-8);
        assert!(!c.no_crossing);
        assert!(c.common_value <= 0.5 + 1e-12);
    }

    #[test]
    fn no_crossing_returns_better_endpoint() {
        let c = crossing(|d: f64| Ok(2.0 - 0.1 * d), |d| Ok(0.1 * d), 0.0, 1.0, 1e-9).unwrap();
        assert!(c.no_crossing);
        assert_eq!(c.d_star, 1.0);
        assert!((c.common_value - 0.1).abs() < 1e-12);
    }

    #[test]
    fn closed_form_crossing_near_reference() {
        let c = Sides { variant: Variant::ThmA1F3, xi: 0.2f64, s: 1.0 }.cross(D_BRACKET).unwrap();
        assert!((c.d_star - 2.367).abs() < 0.02, "{}", c.d_star);
    }

    #[test]
    fn thm_a1_report() {
        let r = feige_bound(Variant::ThmA1F3, 0.2f64).unwrap();
        assert!(r.bound_value >= 0.1536 && r.bound_value <= 0.1545, "{}", r.bound_value);
        assert!(r.moment_certificates.is_empty());
        assert_eq!(r.provenance, "closed-form");
        assert_eq!(r.curve_samples.len(), CURVE_POINTS);
    }

    #[test]
    fn thm42_report_is_certified() {
        let r = feige_bound(Variant::Thm42Mp124, 0.2f64).unwrap();
        assert!((r.d_star - 2.374).abs() < 0.02, "{}", r.d_star);
        assert_eq!(r.bound_value, 0.1541);
        assert_eq!(r.moment_certificates.len(), 1);
        assert!(r.moment_certificates[0].verify(200, 0).passed());
    }

    #[test]
    fn curve_samples_are_monotone() {
        let r = feige_bound(Variant::Thm43Mp1234, 0.2f64).unwrap();
        for w in r.curve_samples.windows(2) {
            assert!(w[1].moment_side <= w[0].moment_side + 1e-8);
            assert!(w[1].be_side >= w[0].be_side - 1e-8);
        }
    }

    #[test]
    fn sweep_rejects_bad_s() {
        assert!(g_sweep(0.2f64, &[0.0]).is_err());
        assert!(g_sweep(0.2f64, &[1.5]).is_err());
    }

    #[test]
    fn csv_rendering() {
        let t = FigureTable { header: vec!["s", "g"], rows: vec![vec![1.0f64, 0.179_898_765_432_1]] };
        assert_eq!(t.to_csv(), "s,g\n1.000000000,0.1798987654\n");
        assert_eq!(format_sig(2.374, 10), "2.374000000");
        assert_eq!(format_sig(1e-7, 3), "1.00e-7");
        assert_eq!(format_sig(0.0, 10), "0.000000000");
    }

    #[test]
    fn figure_ids_parse() {
        assert_eq!("figA1".parse::<Figure>().unwrap(), Figure::FigA1);
        assert!("fig9".parse::<Figure>().is_err());
        assert_eq!("thm44".parse::<Variant>().unwrap(), Variant::Thm44Refined);
    }

    #[test]
    fn default_grids() {
        let s: Vec<f64> = default_s_grid();
        assert_eq!(s.len(), 20);
        assert!((s[0] - 0.05).abs() < 1e-15 && s[19] == 1.0);
        let g: Vec<f64> = log_grid(0.2, 50.0, 5);
        assert_eq!(g[0], 0.2);
        assert_eq!(g[4], 50.0);
    }
}
