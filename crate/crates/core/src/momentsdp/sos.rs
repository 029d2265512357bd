//! Gram-matrix certificates of univariate polynomial nonnegativity.

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::Real;

use super::assemble::{antidiagonal, antidiagonal_sum};
use super::solver::{solve, BlockEntry, Constraint, SdpProblem, SolveStatus, SolverOptions};

/// Evaluates `∑ c_r x^r`.
pub fn eval_poly<T: Real>(coeffs: &[T], x: T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
}

/// Coefficients of `Xᵀ V X` with `X = (1, x, …, xⁿ)`.
pub fn poly_from_gram<T: Real>(v: &Mat<T>) -> Vec<T> {
    let n = v.dim();
    (0..(2 * n).saturating_sub(1)).map(|k| antidiagonal_sum(v, k)).collect()
}

/// Splits a PSD Gram matrix into polynomials `q_i` with `Xᵀ V X = ∑ q_i(x)²`.
pub fn sos_terms<T: Real>(v: &Mat<T>) -> Vec<Vec<T>> {
    let e = v.sym_eigen();
    e.values
        .iter()
        .zip(&e.vectors)
        .filter(|(&lam, _)| lam > T::zero())
        .map(|(&lam, u)| u.iter().map(|&c| c * lam.sqrt()).collect())
        .collect()
}

/// Finds the minimum-trace PSD `V` with `∑_{i+j=k} V_ij = target_k`.
fn gram_feasibility<T: Real>(dim: usize, targets: &[T]) -> Result<Mat<T>> {
    let constraints = targets
        .iter()
        .enumerate()
        .map(|(k, _)| Constraint {
            entries: antidiagonal(dim, k).map(|(i, j)| BlockEntry { block: 0, i, j, coeff: T::one() }).collect(),
            lin: vec![],
        })
        .collect();
    let problem = SdpProblem {
        block_dims: vec![dim],
        n_lin: 0,
        cost_blocks: vec![Mat::identity(dim)],
        cost_lin: vec![],
        constraints,
        rhs: targets.to_vec(),
    };
    let options = SolverOptions { gap_tol: T::lit(1e-12), feas_tol: T::lit(1e-12), ..SolverOptions::default() };
    let sol = solve(&problem, &options);
    let v = sol.x_blocks.into_iter().next().expect("one block");
    if sol.status != SolveStatus::Optimal && sol.primal_infeasibility > T::lit(1e-6) {
        return Err(Error::Numerical(format!("no Gram certificate found ({:?})", sol.status)));
    }
    Ok(v)
}

/// Gram matrix certifying `p(x) = ∑ c_r x^r ≥ 0` on all of ℝ (`deg p = 2n`).
pub fn gram_full_line<T: Real>(coeffs: &[T]) -> Result<Mat<T>> {
    if coeffs.is_empty() || coeffs.len().is_multiple_of(2) {
        return Err(Error::InvalidArgument("need an even-degree polynomial".into()));
    }
    gram_feasibility(coeffs.len().div_ceil(2), coeffs)
}

/// Gram matrix `V` with `p(t²) = Tᵀ V T`, certifying `p(x) ≥ 0` on `x ≥ 0`.
pub fn gram_half_line<T: Real>(coeffs: &[T]) -> Result<Mat<T>> {
    if coeffs.is_empty() {
        return Err(Error::InvalidArgument("empty polynomial".into()));
    }
    let mut targets = vec![T::zero(); 2 * coeffs.len() - 1];
    for (l, &c) in coeffs.iter().enumerate() {
        targets[2 * l] = c;
    }
    gram_feasibility(coeffs.len(), &targets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_square_gram() {
        let v = gram_full_line(&[1.0, 2.0, 1.0]).unwrap();
        let expect = Mat::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert!(v.sub(&expect).max_abs() < 1e-6, "{v:?}");
    }

    #[test]
    fn x4_plus_one_both_half_lines() {
        // x⁴ + 1 on x ≥ 0 and, via x → −x, on x ≤ 0
        for coeffs in [[1.0, 0.0, 0.0, 0.0, 1.0], [1.0, -0.0, 0.0, -0.0, 1.0]] {
            let v = gram_half_line::<f64>(&coeffs).unwrap();
            assert!(v.min_eigenvalue() > -1e-8);
            let p = poly_from_gram(&v);
            for (k, &c) in p.iter().enumerate() {
                let target = if k % 2 == 0 { coeffs[k / 2] } else { 0.0 };
                assert!((c - target).abs() < 1e-8);
            }
        }
        let full = gram_full_line(&[1.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(full.min_eigenvalue() > -1e-8);
    }

    #[test]
    fn rejects_odd_degree() {
        assert!(gram_full_line(&[1.0, 1.0]).is_err());
    }

    proptest! {
        /// Xᵀ V X ≥ 0 for PSD V, and the eigen-split reproduces it as ∑ q_i².
        #[test]
        fn psd_gram_gives_nonnegative_polynomial(
            entries in proptest::collection::vec(-2.0f64..2.0, 9),
            x in -5.0f64..5.0,
        ) {
            let b = Mat::from_rows(&[entries[0..3].to_vec(), entries[3..6].to_vec(), entries[6..9].to_vec()]);
            let v = b.mul(&b.transpose());
            let p = poly_from_gram(&v);
            let px = eval_poly(&p, x);
            prop_assert!(px >= -1e-9 * (1.0 + x.powi(4)));
            let squares: f64 = sos_terms(&v).iter().map(|q| eval_poly(q, x).powi(2)).sum();
            prop_assert!((squares - px).abs() <= 1e-8 * (1.0 + px.abs() + x.powi(4)));
        }
    }
}
