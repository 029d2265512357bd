//! Dual SDP of the shifted moment problem.
//!
//! The dual asks for `g(x) = ∑ y_r x^r` with `g(x) ≥ 1` on `x ≥ 0` and
//! `g(x) ≥ 0` on `x ≤ 0`. Each half-line condition on a degree-4 polynomial
//! `p` is encoded as `p(t²) = Tᵀ V T`, `T = (1, t, …, t⁴)`, `V ⪰ 0`: odd
//! antidiagonals of `V` sum to zero and antidiagonal `2l` sums to the
//! coefficient of `x^l`. The `x ≤ 0` half uses `g(−x)`.
//!
//! Only the Gram matrices are unknowns; `y` is read off the `x ≥ 0` block
//! as `y_l = ad_{2l}(V₊) + [l = 0]`.

use crate::linalg::Mat;
use crate::scalar::Real;

use super::solver::{BlockEntry, Constraint, SdpProblem};
use super::{MomentProblem, MomentSet};

/// Side of each Gram block: monomials 1, t, …, t⁴.
pub const GRAM_DIM: usize = 5;
/// Blocks: 0 certifies `g − 1 ≥ 0` on `x ≥ 0`, 1 certifies `g ≥ 0` on `x ≤ 0`.
pub const PLUS: usize = 0;
pub const MINUS: usize = 1;

/// Entries `(i, j)` of an `n × n` matrix on antidiagonal `i + j = k`.
pub fn antidiagonal(n: usize, k: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).filter_map(move |i| k.checked_sub(i).filter(|&j| j < n).map(|j| (i, j)))
}

/// ∑_{i+j=k} V_ij.
pub fn antidiagonal_sum<T: Real>(v: &Mat<T>, k: usize) -> T {
    antidiagonal(v.dim(), k).map(|(i, j)| v[(i, j)]).sum()
}

fn antidiagonal_entries<T: Real>(block: usize, k: usize, coeff: T) -> Vec<BlockEntry<T>> {
    antidiagonal(GRAM_DIM, k).map(|(i, j)| BlockEntry { block, i, j, coeff }).collect()
}

/// Standard-form SDP plus the bookkeeping needed to map its solution back
/// to dual moment multipliers.
#[derive(Debug, Clone)]
pub struct DualSdp<T> {
    pub sdp: SdpProblem<T>,
    /// Constant added to the SDP objective (`y₀` gets a `+1` from `g − 1`).
    pub offset: T,
    pub problem: MomentProblem<T>,
}

impl<T: Real> DualSdp<T> {
    /// `y` implied by a Gram matrix for the `x ≥ 0` block.
    pub fn y_from_plus_gram(v_plus: &Mat<T>) -> [T; 5] {
        let mut y = [T::zero(); 5];
        for (l, yl) in y.iter_mut().enumerate() {
            *yl = antidiagonal_sum(v_plus, 2 * l);
        }
        y[0] += T::one();
        y
    }
}

pub fn assemble_dual_sdp<T: Real>(problem: &MomentProblem<T>) -> DualSdp<T> {
    let moments = problem.moments.as_array();
    let mut constraints = Vec::new();
    let mut rhs = Vec::new();

    for block in [PLUS, MINUS] {
        for k in [1, 3, 5, 7] {
            constraints.push(Constraint { entries: antidiagonal_entries(block, k, T::one()), lin: vec![] });
            rhs.push(T::zero());
        }
    }
    // ad_{2l}(V₋) − (−1)^l ad_{2l}(V₊) = (−1)^l [l = 0]
    for l in 0..5 {
        let sign = if l % 2 == 0 { T::one() } else { -T::one() };
        let mut entries = antidiagonal_entries(MINUS, 2 * l, T::one());
        entries.extend(antidiagonal_entries(PLUS, 2 * l, -sign));
        constraints.push(Constraint { entries, lin: vec![] });
        rhs.push(if l == 0 { T::one() } else { T::zero() });
    }
    // y₃ = ad_6(V₊): fixed at 0 without a third-moment constraint, ≤ 0 with one
    let (n_lin, lin) = match problem.set {
        MomentSet::Mp124 => (0, vec![]),
        MomentSet::Mp1234 => (1, vec![(0, T::one())]),
    };
    constraints.push(Constraint { entries: antidiagonal_entries(PLUS, 6, T::one()), lin });
    rhs.push(T::zero());

    let mut cost_plus = Mat::zeros(GRAM_DIM);
    for (l, &m) in moments.iter().enumerate() {
        for (i, j) in antidiagonal(GRAM_DIM, 2 * l) {
            cost_plus[(i, j)] = m;
        }
    }
    DualSdp {
        sdp: SdpProblem {
            block_dims: vec![GRAM_DIM, GRAM_DIM],
            n_lin,
            cost_blocks: vec![cost_plus, Mat::zeros(GRAM_DIM)],
            cost_lin: vec![T::zero(); n_lin],
            constraints,
            rhs,
        },
        offset: moments[0],
        problem: *problem,
    }
}
