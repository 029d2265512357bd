//! Independent ground truth: exact distributions of sums of two-point
//! variables, randomized checks of claimed bounds and of the moment
//! formulas, and a primal search over atomic distributions that brackets
//! the moment-problem value from below.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{lu_solve, Mat};
use crate::model::{basic_l3, fourth_moment_bound, shifted_moments, Instance, M3Mode, RawPair, TwoPointVar};
use crate::scalar::Real;

/// Largest instance enumerated exactly.
pub const MAX_EXACT_N: usize = 24;
/// Atoms closer than this are merged during convolution.
pub const MERGE_TOL: f64 = 1e-12;
/// Slack allowed below a claimed bound before it counts as violated.
pub const CLAIM_SLACK: f64 = 1e-9;
/// Default sample count of the Monte Carlo fallback.
pub const MC_SAMPLES: usize = 10_000_000;

/// Finite distribution as sorted `(value, probability)` atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SumDistribution<T> {
    pub atoms: Vec<(T, T)>,
}

impl<T: Real> SumDistribution<T> {
    pub fn point_mass(x: T) -> Self {
        Self { atoms: vec![(x, T::one())] }
    }

    pub fn total_mass(&self) -> T {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// Prob[S ≤ t], counting atoms within the merge tolerance of `t`.
    pub fn prob_le(&self, t: T) -> T {
        let cut = t + T::lit(MERGE_TOL);
        self.atoms.iter().take_while(|a| a.0 <= cut).map(|a| a.1).sum()
    }

    /// Prob[S < t], excluding atoms within the merge tolerance of `t`.
    pub fn prob_lt(&self, t: T) -> T {
        let cut = t - T::lit(MERGE_TOL);
        self.atoms.iter().take_while(|a| a.0 < cut).map(|a| a.1).sum()
    }

    /// E[(S − shift)^k].
    pub fn central_moment(&self, shift: T, k: i32) -> T {
        self.atoms.iter().map(|&(x, p)| p * (x - shift).powi(k)).sum()
    }

    /// Convolution with a two-point law `{(x₁, p₁), (x₂, p₂)}`, merging close atoms.
    fn convolve(&self, parts: &[(T, T)]) -> Self {
        let mut atoms: Vec<(T, T)> = self
            .atoms
            .iter()
            .flat_map(|&(x, p)| parts.iter().filter(|q| q.1 > T::zero()).map(move |&(y, q)| (x + y, p * q)))
            .collect();
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite atoms"));
        let tol = T::lit(MERGE_TOL);
        let mut merged: Vec<(T, T)> = Vec::with_capacity(atoms.len());
        for (x, p) in atoms {
            match merged.last_mut() {
                Some(last) if x - last.0 <= tol => last.1 += p,
                _ => merged.push((x, p)),
            }
        }
        Self { atoms: merged }
    }
}

fn two_point_parts<T: Real>(v: &TwoPointVar<T>) -> [(T, T); 2] {
    [(-v.a, v.prob_neg()), (v.b, v.prob_pos())]
}

/// Exact law of `∑Yᵢ` by successive convolution.
pub fn exact_sum<T: Real>(instance: &Instance<T>) -> Result<SumDistribution<T>> {
    if instance.len() > MAX_EXACT_N {
        return Err(Error::TooLarge { n: instance.len(), max: MAX_EXACT_N });
    }
    Ok(instance.vars.iter().fold(SumDistribution::point_mass(T::zero()), |dist, v| dist.convolve(&two_point_parts(v))))
}

/// Exact law of `∑Xᵢ` for raw pairs `Xᵢ ∈ {−aᵢ, bᵢ}`.
pub fn exact_raw_sum<T: Real>(raw: &[RawPair<T>]) -> Result<SumDistribution<T>> {
    if raw.len() > MAX_EXACT_N {
        return Err(Error::TooLarge { n: raw.len(), max: MAX_EXACT_N });
    }
    Ok(raw.iter().fold(SumDistribution::point_mass(T::zero()), |dist, p| {
        dist.convolve(&two_point_parts(&TwoPointVar::new(p.a, p.b)))
    }))
}

/// Monte Carlo estimate of Prob[∑Yᵢ ≤ t] with its 3σ half-width.
pub fn monte_carlo_prob_le(instance: &Instance<f64>, t: f64, samples: usize, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let mut hits = 0usize;
    for _ in 0..samples {
        let sum: f64 =
            instance.vars.iter().map(|v| if rng.gen::<f64>() < v.prob_neg() { -v.a } else { v.b }).sum();
        if sum <= t + MERGE_TOL {
            hits += 1;
        }
    }
    let n = samples.max(1) as f64;
    let p = hits as f64 / n;
    (p, 3.0 * (p * (1.0 - p) / n).sqrt())
}

/// A claimed lower bound `Prob[∑Yᵢ ≤ ξ] ≥ omega`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub name: String,
    pub omega: f64,
}

/// A claim that failed on a concrete instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub claim: String,
    pub omega: f64,
    pub probability: f64,
    pub instance: Instance<f64>,
}

/// Monte Carlo estimate that fell below a claim; never a hard failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingWarning {
    pub claim: String,
    pub omega: f64,
    pub estimate: f64,
    pub half_width: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub trials: usize,
    /// Random plus the fixed adversarial and degenerate instances.
    pub instances_checked: usize,
    pub violations: Vec<Violation>,
    /// Largest `omega − probability` seen (negative when every claim holds strictly).
    pub max_gap: f64,
    /// Smallest `probability − omega` seen.
    pub min_margin: f64,
    pub sampling_warnings: Vec<SamplingWarning>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Per-trial generator: the stream index makes trials order-independent.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// `n ~ U{1..n_max}`, `aᵢ ~ U[0, ξ]`, `bᵢ ~ U[0, 1]`.
pub fn random_instance(rng: &mut ChaCha8Rng, n_max: usize, xi: f64) -> Instance<f64> {
    let n = rng.gen_range(1..=n_max.max(1));
    let vars = (0..n).map(|_| TwoPointVar::new(rng.gen::<f64>() * xi, rng.gen::<f64>())).collect();
    Instance { xi, vars }
}

/// Identical variables `a = ξ, b = 1` for `n = 1..=n_max`, and all-zero instances.
pub fn fixed_instances(n_max: usize, xi: f64) -> Vec<Instance<f64>> {
    let mut out: Vec<_> =
        (1..=n_max).map(|n| Instance { xi, vars: vec![TwoPointVar::new(xi, 1.0); n] }).collect();
    out.push(Instance { xi, vars: vec![TwoPointVar::new(0.0, 0.7); n_max.max(1)] });
    out.push(Instance { xi, vars: vec![TwoPointVar::new(0.0, 0.0); 3] });
    out.push(Instance { xi, vars: vec![] });
    out
}

enum Outcome {
    Exact(f64),
    Sampled(f64, f64),
}

fn probability(instance: &Instance<f64>, rng: &mut ChaCha8Rng, mc_samples: usize) -> Outcome {
    match exact_sum(instance) {
        Ok(dist) => Outcome::Exact(dist.prob_le(instance.xi)),
        Err(_) => {
            let (p, w) = monte_carlo_prob_le(instance, instance.xi, mc_samples, rng);
            Outcome::Sampled(p, w)
        }
    }
}

/// Checks every claim on `trials` random instances plus the fixed ones.
pub fn verify_bounds(seed: u64, trials: usize, n_max: usize, xi: f64, claims: &[Claim]) -> Result<VerifyReport> {
    verify_bounds_with_samples(seed, trials, n_max, xi, claims, MC_SAMPLES)
}

pub fn verify_bounds_with_samples(
    seed: u64,
    trials: usize,
    n_max: usize,
    xi: f64,
    claims: &[Claim],
    mc_samples: usize,
) -> Result<VerifyReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    if !(xi > 0.0 && xi <= 1.0) {
        return Err(Error::InvalidArgument(format!("xi = {xi} outside (0, 1]")));
    }
    let fixed = fixed_instances(n_max, xi);
    let total = trials + fixed.len();
    let results: Vec<(Instance<f64>, Outcome)> = (0..total)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_rng(seed, k as u64);
            let inst = if k < trials { random_instance(&mut rng, n_max, xi) } else { fixed[k - trials].clone() };
            let outcome = probability(&inst, &mut rng, mc_samples);
            (inst, outcome)
        })
        .collect();

    let mut report = VerifyReport {
        seed,
        trials,
        instances_checked: total,
        violations: vec![],
        max_gap: f64::NEG_INFINITY,
        min_margin: f64::INFINITY,
        sampling_warnings: vec![],
    };
    for (inst, outcome) in results {
        for claim in claims {
            match outcome {
                Outcome::Exact(p) => {
                    report.max_gap = report.max_gap.max(claim.omega - p);
                    report.min_margin = report.min_margin.min(p - claim.omega);
                    if p < claim.omega - CLAIM_SLACK {
                        report.violations.push(Violation {
                            claim: claim.name.clone(),
                            omega: claim.omega,
                            probability: p,
                            instance: inst.clone(),
                        });
                    }
                }
                Outcome::Sampled(p, w) => {
                    if p + w < claim.omega {
                        report.sampling_warnings.push(SamplingWarning {
                            claim: claim.name.clone(),
                            omega: claim.omega,
                            estimate: p,
                            half_width: w,
                            n: inst.len(),
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Result of comparing exact moments with their closed-form expansions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentFormulaReport {
    pub seed: u64,
    pub trials: usize,
    /// Largest `|exact − formula| / (1 + |formula|)` over orders 1–4.
    pub max_rel_error: f64,
    /// Instances where `E[Z³] < L3` or `E[Z⁴] > B4` beyond rounding.
    pub bound_failures: Vec<Instance<f64>>,
}

impl MomentFormulaReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_rel_error <= tol && self.bound_failures.is_empty()
    }
}

/// Closed-form `[E Z, E Z², E Z³, E Z⁴]` for `Z = ∑Yᵢ − ξ`.
pub fn moment_formulas(instance: &Instance<f64>) -> [f64; 4] {
    let xi = instance.xi;
    let st = instance.stats();
    let d = st.d;
    let kurt: f64 = instance
        .vars
        .iter()
        .map(|v| v.a * v.b * (v.a * v.a + v.b * v.b - 4.0 * v.a * v.b - 4.0 * xi * (v.b - v.a)))
        .sum();
    [
        -xi,
        d + xi * xi,
        -xi.powi(3) - 3.0 * xi * d - st.t_m,
        3.0 * d * d + 6.0 * xi * xi * d + xi.powi(4) + kurt,
    ]
}

/// Compares [`moment_formulas`] against exact enumeration on random
/// instances (`n ≤ 10`, `ξ ~ U[0.05, 1]`) and checks the moment bounds.
pub fn verify_moment_formulas(seed: u64, trials: usize) -> Result<MomentFormulaReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let per_trial: Vec<Result<(f64, Option<Instance<f64>>)>> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_rng(seed, k as u64);
            let xi = 0.05 + 0.95 * rng.gen::<f64>();
            let inst = random_instance(&mut rng, 10, xi);
            let dist = exact_sum(&inst)?;
            let f = moment_formulas(&inst);
            let mut err = 0.0f64;
            let mut exact = [0.0; 4];
            for (k, e) in exact.iter_mut().enumerate() {
                *e = dist.central_moment(xi, k as i32 + 1);
                err = err.max((*e - f[k]).abs() / (1.0 + f[k].abs()));
            }
            let st = inst.stats();
            let slack = 1e-12;
            let mut ok = exact[2] >= basic_l3(xi, st.d) - slack && exact[3] <= fourth_moment_bound(xi, st.d)? + slack;
            if st.d > 0.0 {
                let s = (st.t_b / st.d).min(1.0);
                if s > 0.0 {
                    let refined = shifted_moments(xi, st.d, M3Mode::Refined { s })?;
                    ok &= exact[2] >= refined.l3 - slack;
                }
            }
            Ok((err, (!ok).then_some(inst)))
        })
        .collect();
    let mut report = MomentFormulaReport { seed, trials, max_rel_error: 0.0, bound_failures: vec![] };
    for r in per_trial {
        let (err, failure) = r?;
        report.max_rel_error = report.max_rel_error.max(err);
        report.bound_failures.extend(failure);
    }
    Ok(report)
}

/// Moment data for the primal search: `E Z = m1`, `E Z² = m2`,
/// optionally `E Z³ ≥ l3` and `E Z⁴ ≤ b4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MomentSpec<T> {
    pub m1: T,
    pub m2: T,
    pub l3: Option<T>,
    pub b4: Option<T>,
}

impl<T: Real> MomentSpec<T> {
    /// Constraint count including order 0, i.e. the number of atoms needed.
    pub fn atoms_needed(&self) -> usize {
        3 + usize::from(self.l3.is_some()) + usize::from(self.b4.is_some())
    }
}

impl<T: Real> From<&crate::momentsdp::MomentProblem<T>> for MomentSpec<T> {
    fn from(p: &crate::momentsdp::MomentProblem<T>) -> Self {
        let m = &p.moments;
        Self {
            m1: m.m1,
            m2: m.m2,
            l3: matches!(p.set, crate::momentsdp::MomentSet::Mp1234).then_some(m.l3),
            b4: Some(m.b4),
        }
    }
}

/// Atoms `(location, weight)` with weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct AtomicDistribution<T> {
    pub atoms: Vec<(T, T)>,
}

impl<T: Real> AtomicDistribution<T> {
    pub fn moment(&self, k: i32) -> T {
        self.atoms.iter().map(|&(x, w)| w * x.powi(k)).sum()
    }

    pub fn prob_nonneg(&self) -> T {
        self.atoms.iter().filter(|a| a.0 >= T::zero()).map(|a| a.1).sum()
    }

    /// Largest violation of the moment constraints of `spec`.
    pub fn constraint_violation(&self, spec: &MomentSpec<T>) -> T {
        let mut v = (self.moment(0) - T::one()).abs();
        v = v.max((self.moment(1) - spec.m1).abs()).max((self.moment(2) - spec.m2).abs());
        if let Some(l3) = spec.l3 {
            v = v.max(l3 - self.moment(3));
        }
        if let Some(b4) = spec.b4 {
            v = v.max(self.moment(4) - b4);
        }
        v.max(self.atoms.iter().map(|a| -a.1).fold(T::zero(), T::max))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimalStatus {
    Found,
    InfeasibleNotProven,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PrimalSearch<T> {
    pub status: PrimalStatus,
    /// Best feasible Prob[Z ≥ 0] found, a lower bound on the optimum.
    pub value: T,
    pub distribution: AtomicDistribution<T>,
    pub constraint_violation: T,
}

/// Pattern-search sweep cap per restart.
const MAX_SWEEPS: usize = 4000;
/// Relative gain below which a pattern move does not count as progress.
const MIN_GAIN: f64 = 1e-14;

/// Residual tolerance for accepting weights from a basis solve.
const FEAS_TOL: f64 = 1e-10;

/// Best weights for fixed locations: maximizes the mass on `[0, ∞)` over the
/// vertices of `{w ≥ 0, moment constraints}` (with slacks on the inequalities).
fn best_weights<T: Real>(locs: &[T], spec: &MomentSpec<T>) -> Option<(T, Vec<T>)> {
    let k = locs.len();
    // rows: orders 0,1,2 (equalities), then 3 (≥) and 4 (≤) with slacks
    let mut rows: Vec<(Vec<T>, T, Option<T>)> = vec![];
    for (order, rhs) in [(0, T::one()), (1, spec.m1), (2, spec.m2)] {
        rows.push((locs.iter().map(|x| x.powi(order)).collect(), rhs, None));
    }
    if let Some(l3) = spec.l3 {
        rows.push((locs.iter().map(|x| x.powi(3)).collect(), l3, Some(-T::one())));
    }
    if let Some(b4) = spec.b4 {
        rows.push((locs.iter().map(|x| x.powi(4)).collect(), b4, Some(T::one())));
    }
    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.2.is_some()).count();
    let n = k + n_slack;
    // column j of the full constraint matrix
    let column = |j: usize| -> Vec<T> {
        if j < k {
            rows.iter().map(|r| r.0[j]).collect()
        } else {
            let mut slack_idx = 0;
            rows.iter()
                .map(|r| match r.2 {
                    Some(sign) => {
                        let hit = slack_idx == j - k;
                        slack_idx += 1;
                        if hit {
                            sign
                        } else {
                            T::zero()
                        }
                    }
                    None => T::zero(),
                })
                .collect()
        }
    };
    let rhs: Vec<T> = rows.iter().map(|r| r.1).collect();
    let scale = rhs.iter().fold(T::one(), |s, v| s.max(v.abs()));
    let mut best: Option<(T, Vec<T>)> = None;
    for basis in combinations(n, m) {
        let cols: Vec<Vec<T>> = basis.iter().map(|&j| column(j)).collect();
        let a = Mat::from_rows(&(0..m).map(|r| cols.iter().map(|c| c[r]).collect()).collect::<Vec<_>>());
        let Some(sol) = lu_solve(&a, &rhs) else { continue };
        if sol.iter().any(|v| !v.is_finite() || *v < -T::lit(FEAS_TOL)) {
            continue;
        }
        let residual = a.mul_vec(&sol).iter().zip(&rhs).map(|(l, r)| (*l - *r).abs()).fold(T::zero(), T::max);
        if residual > T::lit(FEAS_TOL) * scale {
            continue;
        }
        let mut w = vec![T::zero(); k];
        for (&j, &v) in basis.iter().zip(&sol) {
            if j < k {
                w[j] = v.max(T::zero());
            }
        }
        // clamping can break the constraints where |x|⁴ amplifies the residue
        let law = AtomicDistribution { atoms: locs.iter().copied().zip(w.iter().copied()).collect() };
        if law.constraint_violation(spec) > T::lit(FEAS_TOL) * scale {
            continue;
        }
        let value = law.prob_nonneg();
        if best.as_ref().is_none_or(|b| value > b.0) {
            best = Some((value, w));
        }
    }
    best
}

fn combinations(n: usize, m: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for j in start..n {
            cur.push(j);
            rec(j + 1, n, m, cur, out);
            cur.pop();
        }
    }
    let mut out = vec![];
    rec(0, n, m, &mut Vec::with_capacity(m), &mut out);
    out
}

/// Random-restart pattern search over atom locations (one atom pinned at 0)
/// with exact weight solving at each candidate.
pub fn atomic_primal_search<T: Real>(spec: &MomentSpec<T>, restarts: usize, seed: u64) -> PrimalSearch<T> {
    let k = spec.atoms_needed();
    let infeasible = PrimalSearch {
        status: PrimalStatus::InfeasibleNotProven,
        value: T::zero(),
        distribution: AtomicDistribution { atoms: vec![] },
        constraint_violation: T::infinity(),
    };
    if spec.m2 < spec.m1 * spec.m1 {
        return infeasible;
    }
    let sigma = (spec.m2 - spec.m1 * spec.m1).sqrt().max(T::lit(1e-3));
    let spread = spec.m2.sqrt().max(sigma);
    let evaluate = |free: &[T]| -> Option<(T, Vec<T>)> {
        let mut locs = vec![T::zero()];
        locs.extend_from_slice(free);
        best_weights(&locs, spec)
    };

    let mut best: Option<(T, Vec<T>, Vec<T>)> = None;
    for r in 0..restarts.max(1) {
        let mut rng = trial_rng(seed, r as u64);
        // a feasible starting point, found by random sampling
        let mut current: Option<(T, Vec<T>, Vec<T>)> = None;
        for _ in 0..2000 {
            let free: Vec<T> = (0..k - 1).map(|_| T::lit(rng.gen_range(-4.0..4.0)) * spread).collect();
            if let Some((v, w)) = evaluate(&free) {
                if current.as_ref().is_none_or(|c| v > c.0) {
                    current = Some((v, free, w));
                }
            }
        }
        let Some((mut value, mut free, mut weights)) = current else { continue };
        let mut step = spread;
        let mut sweeps = 0;
        while step > T::lit(1e-11) * spread && sweeps < MAX_SWEEPS {
            sweeps += 1;
            let mut improved = false;
            for i in 0..free.len() {
                for dir in [T::one(), -T::one()] {
                    let mut trial = free.clone();
                    trial[i] += dir * step;
                    if let Some((v, w)) = evaluate(&trial) {
                        // rounding-level gains would stall the step schedule
                        if v > value + T::lit(MIN_GAIN) * (T::one() + value.abs()) {
                            value = v;
                            free = trial;
                            weights = w;
                            improved = true;
                        }
                    }
                }
            }
            if !improved {
                step *= T::lit(0.5);
            }
        }
        if best.as_ref().is_none_or(|b| value > b.0) {
            best = Some((value, free, weights));
        }
    }
    let Some((_, free, weights)) = best else { return infeasible };
    let mut locs = vec![T::zero()];
    locs.extend(free);
    let distribution = AtomicDistribution { atoms: locs.into_iter().zip(weights).collect() };
    PrimalSearch {
        status: PrimalStatus::Found,
        value: distribution.prob_nonneg(),
        constraint_violation: distribution.constraint_violation(spec),
        distribution,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_variable_law() {
        let inst = Instance::new(0.2f64, vec![TwoPointVar::new(0.2, 1.0)]).unwrap();
        let d = exact_sum(&inst).unwrap();
        assert!((d.prob_le(0.2) - 1.0 / 1.2).abs() < 1e-15);
        assert!((d.total_mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_instance_is_point_mass() {
        let inst = Instance::<f64>::new(0.2, vec![]).unwrap();
        let d = exact_sum(&inst).unwrap();
        assert_eq!(d.atoms, vec![(0.0, 1.0)]);
        assert_eq!(d.prob_le(0.2), 1.0);
    }

    #[test]
    fn merging_keeps_atoms_small() {
        let inst = Instance::new(0.2f64, vec![TwoPointVar::new(0.2, 1.0); 20]).unwrap();
        let d = exact_sum(&inst).unwrap();
        assert_eq!(d.atoms.len(), 21);
        assert!((d.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_large_is_reported() {
        let inst = Instance::new(0.2f64, vec![TwoPointVar::new(0.1, 0.5); 25]).unwrap();
        assert!(matches!(exact_sum(&inst), Err(Error::TooLarge { n: 25, max: 24 })));
    }

    #[test]
    fn monte_carlo_band_covers_exact() {
        let inst = Instance::new(0.2f64, vec![TwoPointVar::new(0.15, 0.6); 8]).unwrap();
        let exact = exact_sum(&inst).unwrap().prob_le(0.2);
        let (p, w) = monte_carlo_prob_le(&inst, 0.2, 200_000, &mut trial_rng(5, 0));
        assert!((p - exact).abs() <= w, "{p} ± {w} vs {exact}");
    }

    #[test]
    fn lp_weights_for_symmetric_atoms() {
        // mean 0, variance 1 on {0, −1, 1}: weights (0, ½, ½) and mass ½ on [0, ∞)
        let spec = MomentSpec { m1: 0.0f64, m2: 1.0, l3: None, b4: None };
        let (v, w) = best_weights(&[0.0f64, -1.0, 1.0], &spec).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        assert!((w[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn chebyshev_two_atom_family() {
        let spec = MomentSpec { m1: 0.0f64, m2: 1.0, l3: None, b4: None };
        let r = atomic_primal_search(&spec, 3, 11);
        assert_eq!(r.status, PrimalStatus::Found);
        assert!(r.value >= 0.5);
        assert!(r.constraint_violation < 1e-9);
    }

    #[test]
    fn jensen_violation_is_not_proven_infeasible() {
        let spec = MomentSpec { m1: 1.0, m2: 0.5, l3: None, b4: None };
        assert_eq!(atomic_primal_search(&spec, 2, 0).status, PrimalStatus::InfeasibleNotProven);
    }

    #[test]
    fn moment_formulas_single_var() {
        let inst = Instance::new(0.2f64, vec![TwoPointVar::new(0.2, 1.0)]).unwrap();
        let f = moment_formulas(&inst);
        assert!((f[1] - 0.24).abs() < 1e-15);
        let zero = Instance::new(0.2f64, vec![TwoPointVar::new(0.0, 0.0)]).unwrap();
        let f = moment_formulas(&zero);
        for (k, v) in f.iter().enumerate() {
            assert!((v - (-0.2f64).powi(k as i32 + 1)).abs() < 1e-15);
        }
    }

    #[test]
    fn verify_rejects_zero_trials() {
        assert!(verify_bounds(1, 0, 5, 0.2, &[]).is_err());
        assert!(verify_moment_formulas(1, 0).is_err());
    }

    #[test]
    fn false_claim_is_caught() {
        let claims = [Claim { name: "too-strong".into(), omega: 0.99 }];
        let r = verify_bounds(3, 20, 6, 0.2, &claims).unwrap();
        assert!(!r.passed());
        assert!(r.max_gap > 0.0);
    }

    #[test]
    fn trial_streams_are_independent_of_order() {
        let a = random_instance(&mut trial_rng(42, 7), 14, 0.2);
        let _ = random_instance(&mut trial_rng(42, 3), 14, 0.2);
        assert_eq!(a, random_instance(&mut trial_rng(42, 7), 14, 0.2));
    }
}
