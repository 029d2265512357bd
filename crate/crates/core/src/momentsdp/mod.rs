//! Moment-problem bounds on Prob[Z ≥ 0] for `Z = ∑Yᵢ − ξ`, solved through
//! the sum-of-squares dual and returned with a verifiable certificate.

pub mod assemble;
pub mod certificate;
pub mod closed_form;
pub mod solver;
pub mod sos;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{shifted_moments, M3Mode, ShiftedMoments};
use crate::scalar::{floor_decimals, Real};

pub use assemble::{assemble_dual_sdp, DualSdp};
pub use certificate::{restore_certificate, DualCertificate, RawDual, Verification};
pub use closed_form::{closed_form_f2, f3};
pub use solver::{SdpSolution, SolveStatus, SolverOptions};

/// Which moment orders beyond 0 are constrained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MomentSet {
    /// E[Z], E[Z²] fixed, E[Z⁴] ≤ B4.
    #[serde(rename = "124")]
    Mp124,
    /// Additionally E[Z³] ≥ L3.
    #[serde(rename = "1234")]
    Mp1234,
}

impl MomentSet {
    pub fn orders(&self) -> &'static [u8] {
        match self {
            Self::Mp124 => &[1, 2, 4],
            Self::Mp1234 => &[1, 2, 3, 4],
        }
    }

    pub fn from_orders(orders: &[u8]) -> Result<Self> {
        let mut sorted = orders.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        match sorted.as_slice() {
            [1, 2, 4] => Ok(Self::Mp124),
            [1, 2, 3, 4] => Ok(Self::Mp1234),
            other => Err(Error::InvalidArgument(format!("unsupported constraint set {other:?}"))),
        }
    }
}

impl std::str::FromStr for MomentSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let orders: Vec<u8> = s
            .chars()
            .filter(|c| !matches!(c, ',' | ' '))
            .map(|c| c.to_digit(10).map(|d| d as u8).ok_or_else(|| Error::InvalidArgument(format!("bad moment set {s:?}"))))
            .collect::<Result<_>>()?;
        Self::from_orders(&orders)
    }
}

/// `max Prob[Z ≥ 0]` subject to the moment data in `moments` restricted to `set`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MomentProblem<T> {
    pub moments: ShiftedMoments<T>,
    pub set: MomentSet,
}

impl<T: Real> MomentProblem<T> {
    pub fn new(xi: T, d: T, set: MomentSet, mode: M3Mode<T>) -> Result<Self> {
        Ok(Self { moments: shifted_moments(xi, d, mode)?, set })
    }

    pub fn from_moments(moments: ShiftedMoments<T>, orders: &[u8]) -> Result<Self> {
        Ok(Self { moments, set: MomentSet::from_orders(orders)? })
    }
}

/// Solver output mapped back to dual multipliers.
#[derive(Debug, Clone)]
pub struct DualSolve<T> {
    pub raw: RawDual<T>,
    /// Objective of the unrestored solution, offset included.
    pub objective: T,
    pub status: SolveStatus,
    pub iterations: usize,
    pub mu: T,
}

pub fn solve_sdp<T: Real>(sdp: &DualSdp<T>, options: &SolverOptions<T>) -> DualSolve<T> {
    let sol = solver::solve(&sdp.sdp, options);
    let gram_plus = sol.x_blocks[assemble::PLUS].clone();
    let gram_minus = sol.x_blocks[assemble::MINUS].clone();
    DualSolve {
        raw: RawDual { y: DualSdp::y_from_plus_gram(&gram_plus), gram_plus, gram_minus },
        objective: sol.primal_objective + sdp.offset,
        status: sol.status,
        iterations: sol.iterations,
        mu: sol.mu,
    }
}

/// Certified upper bound on the moment problem optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MomentBound<T> {
    /// Certified upper bound on max Prob[Z ≥ 0], in [0, 1].
    pub opt_upper: T,
    pub certificate: DualCertificate<T>,
    /// `opt_upper` minus the best primal value found, when one was computed.
    pub gap: Option<T>,
    pub status: SolveStatus,
    pub iterations: usize,
}

impl<T: Real> MomentBound<T> {
    /// Lower bound on Prob[Z < 0] (hence on Prob[∑Yᵢ ≤ ξ] up to the atom at 0),
    /// floored to 6 decimals.
    pub fn prob_lower(&self) -> T {
        floor_decimals((T::one() - self.opt_upper).max(T::zero()), 6)
    }

    pub fn with_gap(mut self, primal_value: T) -> Self {
        self.gap = Some(self.opt_upper - primal_value);
        self
    }
}

/// Assembles, solves and certifies one moment problem.
pub fn bound_problem<T: Real>(problem: &MomentProblem<T>) -> Result<MomentBound<T>> {
    let sdp = assemble_dual_sdp(problem);
    let solved = solve_sdp(&sdp, &SolverOptions::default());
    let certificate = restore_certificate(&solved.raw, problem)?;
    Ok(MomentBound {
        opt_upper: certificate.opt_upper(),
        certificate,
        gap: None,
        status: solved.status,
        iterations: solved.iterations,
    })
}

/// Certified MP bound at `(ξ, D)`: `1 − opt_upper` is F2 for [`MomentSet::Mp124`]
/// and F4 (refined F̂4 when `mode` is refined) for [`MomentSet::Mp1234`].
pub fn moment_bound<T: Real>(xi: T, d: T, set: MomentSet, mode: M3Mode<T>) -> Result<MomentBound<T>> {
    bound_problem(&MomentProblem::new(xi, d, set, mode)?)
}
