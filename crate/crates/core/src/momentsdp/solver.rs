//! Primal-dual interior-point method for small block-diagonal SDPs.
//!
//! Primal: `min ∑⟨C_b, X_b⟩ + cᵀx  s.t.  ∑⟨A_kb, X_b⟩ + a_kᵀx = b_k,  X_b ⪰ 0, x ≥ 0`.
//! Dual:   `max bᵀλ  s.t.  Z_b = C_b − ∑λ_k A_kb ⪰ 0,  z = c − ∑λ_k a_k ≥ 0`.
//!
//! Infeasible path-following with the HKM search direction and a Mehrotra
//! predictor-corrector step. Constraint matrices are stored sparsely since
//! the moment SDPs only ever touch antidiagonals.

use serde::{Deserialize, Serialize};

use crate::linalg::{spd_solve, Mat};
use crate::scalar::Real;

/// One nonzero of a (symmetric) constraint matrix. Both `(i, j)` and
/// `(j, i)` must be listed for off-diagonal entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockEntry<T> {
    pub block: usize,
    pub i: usize,
    pub j: usize,
    pub coeff: T,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Constraint<T> {
    pub entries: Vec<BlockEntry<T>>,
    pub lin: Vec<(usize, T)>,
}

impl<T: Real> Constraint<T> {
    pub fn apply(&self, x_blocks: &[Mat<T>], x_lin: &[T]) -> T {
        let mut s = T::zero();
        for e in &self.entries {
            s += e.coeff * x_blocks[e.block][(e.i, e.j)];
        }
        for &(k, c) in &self.lin {
            s += c * x_lin[k];
        }
        s
    }

    fn norm(&self) -> T {
        let s: T = self.entries.iter().map(|e| e.coeff * e.coeff).sum::<T>()
            + self.lin.iter().map(|&(_, c)| c * c).sum::<T>();
        s.sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem<T> {
    pub block_dims: Vec<usize>,
    pub n_lin: usize,
    pub cost_blocks: Vec<Mat<T>>,
    pub cost_lin: Vec<T>,
    pub constraints: Vec<Constraint<T>>,
    pub rhs: Vec<T>,
}

impl<T: Real> SdpProblem<T> {
    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// ∑λ_k A_k as dense blocks plus the linear part.
    fn adjoint(&self, lambda: &[T]) -> (Vec<Mat<T>>, Vec<T>) {
        let mut blocks: Vec<Mat<T>> = self.block_dims.iter().map(|&n| Mat::zeros(n)).collect();
        let mut lin = vec![T::zero(); self.n_lin];
        for (c, &l) in self.constraints.iter().zip(lambda) {
            for e in &c.entries {
                blocks[e.block][(e.i, e.j)] += l * e.coeff;
            }
            for &(k, a) in &c.lin {
                lin[k] += l * a;
            }
        }
        (blocks, lin)
    }

    fn primal_objective(&self, x: &[Mat<T>], x_lin: &[T]) -> T {
        self.cost_blocks.iter().zip(x).map(|(c, x)| c.dot(x)).sum::<T>()
            + self.cost_lin.iter().zip(x_lin).map(|(&c, &x)| c * x).sum::<T>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    /// Iteration cap reached before the stopping test passed.
    MaxIter,
    /// Step lengths collapsed or an iterate lost definiteness.
    Stalled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T> {
    pub max_iter: usize,
    /// Target for the duality measure μ = ⟨X, Z⟩/ν (relative to 1 + |objective|).
    pub gap_tol: T,
    /// Target for the relative primal and dual residuals.
    pub feas_tol: T,
    pub step_fraction: T,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self { max_iter: 200, gap_tol: T::lit(1e-10), feas_tol: T::lit(1e-10), step_fraction: T::lit(0.95) }
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution<T> {
    pub x_blocks: Vec<Mat<T>>,
    pub x_lin: Vec<T>,
    pub lambda: Vec<T>,
    pub z_blocks: Vec<Mat<T>>,
    pub z_lin: Vec<T>,
    pub primal_objective: T,
    pub dual_objective: T,
    /// Final duality measure μ.
    pub mu: T,
    pub primal_infeasibility: T,
    pub dual_infeasibility: T,
    pub iterations: usize,
    pub status: SolveStatus,
}

struct Direction<T> {
    dx: Vec<Mat<T>>,
    dx_lin: Vec<T>,
    dlambda: Vec<T>,
    dz: Vec<Mat<T>>,
    dz_lin: Vec<T>,
}

/// Largest α with `X + α·dX ⪰ 0` (∞ when unbounded).
fn max_psd_step<T: Real>(x: &Mat<T>, dx: &Mat<T>) -> Option<T> {
    let l = x.cholesky()?;
    let linv = l.lower_inverse();
    let m = linv.mul(dx).mul(&linv.transpose());
    let lam = m.min_eigenvalue();
    Some(if lam < T::zero() { -lam.recip() } else { T::infinity() })
}

fn max_lin_step<T: Real>(x: &[T], dx: &[T]) -> T {
    x.iter()
        .zip(dx)
        .filter(|(_, &d)| d < T::zero())
        .map(|(&v, &d)| -v / d)
        .fold(T::infinity(), T::min)
}

struct State<'a, T> {
    p: &'a SdpProblem<T>,
    x: Vec<Mat<T>>,
    x_lin: Vec<T>,
    lambda: Vec<T>,
    z: Vec<Mat<T>>,
    z_lin: Vec<T>,
}

impl<T: Real> State<'_, T> {
    fn nu(&self) -> T {
        T::from_usize_lossy(self.p.block_dims.iter().sum::<usize>() + self.p.n_lin)
    }

    fn mu(&self) -> T {
        let s: T = self.x.iter().zip(&self.z).map(|(x, z)| x.dot(z)).sum::<T>()
            + self.x_lin.iter().zip(&self.z_lin).map(|(&a, &b)| a * b).sum::<T>();
        s / self.nu()
    }

    fn primal_residual(&self) -> Vec<T> {
        self.p.constraints.iter().zip(&self.p.rhs).map(|(c, &b)| b - c.apply(&self.x, &self.x_lin)).collect()
    }

    fn dual_residual(&self) -> (Vec<Mat<T>>, Vec<T>) {
        let (ay, ay_lin) = self.p.adjoint(&self.lambda);
        let rd = self.p.cost_blocks.iter().zip(&ay).zip(&self.z).map(|((c, a), z)| c.sub(a).sub(z)).collect();
        let rd_lin = (0..self.p.n_lin).map(|k| self.p.cost_lin[k] - ay_lin[k] - self.z_lin[k]).collect();
        (rd, rd_lin)
    }

    /// Schur complement M_kl = ∑_b tr(A_kb X_b A_lb Z_b⁻¹) + ∑ a_k (x/z) a_l.
    fn schur(&self, zinv: &[Mat<T>]) -> Mat<T> {
        let m = self.p.constraints.len();
        let mut out = Mat::zeros(m);
        for k in 0..m {
            for l in k..m {
                let ck = &self.p.constraints[k];
                let cl = &self.p.constraints[l];
                let mut s = T::zero();
                for ek in &ck.entries {
                    for el in cl.entries.iter().filter(|e| e.block == ek.block) {
                        let b = ek.block;
                        s += ek.coeff * el.coeff * self.x[b][(ek.j, el.i)] * zinv[b][(el.j, ek.i)];
                    }
                }
                for &(ik, ak) in &ck.lin {
                    for &(il, al) in &cl.lin {
                        if ik == il {
                            s += ak * al * self.x_lin[ik] / self.z_lin[ik];
                        }
                    }
                }
                out[(k, l)] = s;
                out[(l, k)] = s;
            }
        }
        out
    }

    /// Solves the Newton system for a given complementarity target
    /// `dX + sym(X dZ Z⁻¹) = target`, `x∘dz + z∘dx = z∘target_lin`.
    #[allow(clippy::too_many_arguments)]
    fn direction(
        &self,
        schur: &Mat<T>,
        zinv: &[Mat<T>],
        rp: &[T],
        rd: &[Mat<T>],
        rd_lin: &[T],
        target: &[Mat<T>],
        target_lin: &[T],
    ) -> Option<Direction<T>> {
        // K_b = target_b − sym(X_b Rd_b Z_b⁻¹)
        let k_blocks: Vec<Mat<T>> = (0..self.x.len())
            .map(|b| target[b].sub(&self.x[b].mul(&rd[b]).mul(&zinv[b]).symmetrize()))
            .collect();
        let k_lin: Vec<T> =
            (0..self.p.n_lin).map(|i| target_lin[i] - self.x_lin[i] / self.z_lin[i] * rd_lin[i]).collect();
        let rhs: Vec<T> =
            self.p.constraints.iter().zip(rp).map(|(c, &r)| r - c.apply(&k_blocks, &k_lin)).collect();
        let dlambda = spd_solve(schur, &rhs)?;
        let (ady, ady_lin) = self.p.adjoint(&dlambda);
        let dz: Vec<Mat<T>> = rd.iter().zip(&ady).map(|(r, a)| r.sub(a)).collect();
        let dz_lin: Vec<T> = rd_lin.iter().zip(&ady_lin).map(|(&r, &a)| r - a).collect();
        let dx: Vec<Mat<T>> = (0..self.x.len())
            .map(|b| target[b].sub(&self.x[b].mul(&dz[b]).mul(&zinv[b]).symmetrize()))
            .collect();
        let dx_lin: Vec<T> =
            (0..self.p.n_lin).map(|i| target_lin[i] - self.x_lin[i] / self.z_lin[i] * dz_lin[i]).collect();
        if dlambda.iter().any(|v| !v.is_finite()) {
            return None;
        }
        Some(Direction { dx, dx_lin, dlambda, dz, dz_lin })
    }

    fn step_lengths(&self, d: &Direction<T>) -> Option<(T, T)> {
        let mut ap = max_lin_step(&self.x_lin, &d.dx_lin);
        let mut ad = max_lin_step(&self.z_lin, &d.dz_lin);
        for b in 0..self.x.len() {
            ap = ap.min(max_psd_step(&self.x[b], &d.dx[b])?);
            ad = ad.min(max_psd_step(&self.z[b], &d.dz[b])?);
        }
        Some((ap, ad))
    }
}

/// Runs the interior-point method from a scaled identity starting point.
pub fn solve<T: Real>(problem: &SdpProblem<T>, options: &SolverOptions<T>) -> SdpSolution<T> {
    let max_b = problem.rhs.iter().fold(T::zero(), |m, b| m.max(b.abs()));
    let max_a = problem.constraints.iter().fold(T::zero(), |m, c| m.max(c.norm()));
    let c_norm = problem.cost_blocks.iter().fold(T::zero(), |m, c| m.max(c.frobenius_norm()))
        + problem.cost_lin.iter().fold(T::zero(), |m, c| m.max(c.abs()));
    let n_max = problem.block_dims.iter().copied().max().unwrap_or(1).max(1);
    let sqrt_n = T::from_usize_lossy(n_max).sqrt();
    let ten = T::lit(10.0);
    let x0 = ten.max(sqrt_n).max((T::one() + max_b) / (T::one() + max_a));
    let z0 = ten.max(sqrt_n).max(max_a).max(c_norm);

    let mut st = State {
        p: problem,
        x: problem.block_dims.iter().map(|&n| Mat::scaled_identity(n, x0)).collect(),
        x_lin: vec![x0; problem.n_lin],
        lambda: vec![T::zero(); problem.constraints.len()],
        z: problem.block_dims.iter().map(|&n| Mat::scaled_identity(n, z0)).collect(),
        z_lin: vec![z0; problem.n_lin],
    };
    let b_scale = T::one() + problem.rhs.iter().map(|b| *b * *b).sum::<T>().sqrt();
    let c_scale = T::one() + c_norm;

    let mut status = SolveStatus::MaxIter;
    let mut iterations = 0;
    loop {
        let rp = st.primal_residual();
        let (rd, rd_lin) = st.dual_residual();
        let mu = st.mu();
        let pobj = problem.primal_objective(&st.x, &st.x_lin);
        let pinf = rp.iter().map(|r| *r * *r).sum::<T>().sqrt() / b_scale;
        let dinf = (rd.iter().map(|r| r.dot(r)).sum::<T>() + rd_lin.iter().map(|r| *r * *r).sum::<T>()).sqrt()
            / c_scale;
        if mu <= options.gap_tol * (T::one() + pobj.abs()) && pinf <= options.feas_tol && dinf <= options.feas_tol {
            status = SolveStatus::Optimal;
            break;
        }
        if iterations >= options.max_iter {
            break;
        }
        iterations += 1;

        let Some(zinv) = st.z.iter().map(|z| z.spd_inverse()).collect::<Option<Vec<_>>>() else {
            status = SolveStatus::Stalled;
            break;
        };
        let schur = st.schur(&zinv);

        // predictor: σ = 0
        let target: Vec<Mat<T>> = st.x.iter().map(|x| x.scale(-T::one())).collect();
        let target_lin: Vec<T> = st.x_lin.iter().map(|&x| -x).collect();
        let Some(aff) = st.direction(&schur, &zinv, &rp, &rd, &rd_lin, &target, &target_lin) else {
            status = SolveStatus::Stalled;
            break;
        };
        let Some((ap, ad)) = st.step_lengths(&aff) else {
            status = SolveStatus::Stalled;
            break;
        };
        let ap = ap.min(T::one());
        let ad = ad.min(T::one());
        let mut gap_aff = T::zero();
        for b in 0..st.x.len() {
            let mut xb = st.x[b].clone();
            xb.axpy(ap, &aff.dx[b]);
            let mut zb = st.z[b].clone();
            zb.axpy(ad, &aff.dz[b]);
            gap_aff += xb.dot(&zb);
        }
        for i in 0..problem.n_lin {
            gap_aff += (st.x_lin[i] + ap * aff.dx_lin[i]) * (st.z_lin[i] + ad * aff.dz_lin[i]);
        }
        let mu_aff = gap_aff / st.nu();
        let sigma = (mu_aff / mu).max(T::zero()).min(T::one()).powi(3);

        // corrector: σμZ⁻¹ − X − dX_aff dZ_aff Z⁻¹
        let target: Vec<Mat<T>> = (0..st.x.len())
            .map(|b| {
                zinv[b].scale(sigma * mu).sub(&st.x[b]).sub(&aff.dx[b].mul(&aff.dz[b]).mul(&zinv[b]).symmetrize())
            })
            .collect();
        let target_lin: Vec<T> = (0..problem.n_lin)
            .map(|i| (sigma * mu - aff.dx_lin[i] * aff.dz_lin[i]) / st.z_lin[i] - st.x_lin[i])
            .collect();
        let Some(dir) = st.direction(&schur, &zinv, &rp, &rd, &rd_lin, &target, &target_lin) else {
            status = SolveStatus::Stalled;
            break;
        };
        let Some((ap, ad)) = st.step_lengths(&dir) else {
            status = SolveStatus::Stalled;
            break;
        };
        let ap = (options.step_fraction * ap).min(T::one());
        let ad = (options.step_fraction * ad).min(T::one());
        if ap < T::lit(1e-12) && ad < T::lit(1e-12) {
            status = SolveStatus::Stalled;
            break;
        }
        for b in 0..st.x.len() {
            st.x[b].axpy(ap, &dir.dx[b]);
            st.x[b] = st.x[b].symmetrize();
            st.z[b].axpy(ad, &dir.dz[b]);
            st.z[b] = st.z[b].symmetrize();
        }
        for i in 0..problem.n_lin {
            st.x_lin[i] += ap * dir.dx_lin[i];
            st.z_lin[i] += ad * dir.dz_lin[i];
        }
        for (l, d) in st.lambda.iter_mut().zip(&dir.dlambda) {
            *l += ad * *d;
        }
    }

    let rp = st.primal_residual();
    let (rd, rd_lin) = st.dual_residual();
    let primal_infeasibility = rp.iter().map(|r| *r * *r).sum::<T>().sqrt() / b_scale;
    let dual_infeasibility =
        (rd.iter().map(|r| r.dot(r)).sum::<T>() + rd_lin.iter().map(|r| *r * *r).sum::<T>()).sqrt() / c_scale;
    let mu = st.mu();
    let primal_objective = problem.primal_objective(&st.x, &st.x_lin);
    let dual_objective = problem.rhs.iter().zip(&st.lambda).map(|(&b, &l)| b * l).sum();
    SdpSolution {
        x_blocks: st.x,
        x_lin: st.x_lin,
        lambda: st.lambda,
        z_blocks: st.z,
        z_lin: st.z_lin,
        primal_objective,
        dual_objective,
        mu,
        primal_infeasibility,
        dual_infeasibility,
        iterations,
        status,
    }
}
