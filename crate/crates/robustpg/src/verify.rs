//! Numerical certification of each (mechanism, distribution) pair.
//!
//! A solved instance claims a saddle point: the mechanism guarantees its
//! revenue against **every** joint distribution with the given means, and
//! the worst-case distribution holds **every** mechanism to at most that
//! revenue. This module checks the claim five independent ways:
//!
//! 1. **Dual certificate** `(λ, μ)`: closed-form multipliers satisfying
//!    `λ·v + μ ≤ Σᵢ tᵢ(v)` everywhere with equality on the support of the
//!    worst case; then `λ·m + μ` equals the guarantee. Feasibility plus
//!    complementary slackness certify that no distribution with means `m`
//!    can pay less.
//! 2. **Grid feasibility / slackness**: the two certificate inequalities
//!    evaluated on dense grids (including every case breakpoint).
//! 3. **Finite nature LP**: minimize expected total payment over all
//!    distributions supported on a grid, subject to the mean constraints —
//!    an independent best-response oracle solved to LP optimality by a
//!    small bespoke revised simplex (the LP has only `N + 1` rows). Its
//!    value must match the guarantee within an honest discretization
//!    allowance `2·L·h` (measured payment Lipschitz constant times grid
//!    spacing).
//! 4. **Monte Carlo**: draws from the worst-case sampler reproduce the
//!    means, the top-atom mass, and the guarantee as mean total payment,
//!    within standard-error bands. Batches are seeded by stream index, so
//!    results are identical no matter how work is partitioned.
//! 5. **Incentive audit**: worst dominant-strategy and ex-post
//!    participation violations over all (profile, misreport) pairs on a
//!    grid.
//!
//! [`verify_saddle`] runs the whole battery and aggregates pass flags into
//! a serializable [`VerificationReport`].

use crate::distributions::{SamplerState, WorstCaseDistribution};
use crate::error::{Error, Result};
use crate::mechanisms::{Mechanism, MechanismKind};
use crate::numerics::ln_ratio;
use crate::params::{CaseParams, SolvedParams};
use rayon::prelude::*;
use serde::Serialize;

/// Feasibility margins below `-FEASIBILITY_TOL` fail (grid rounding only).
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// Largest allowed |Σt − λ·v − μ| at support points.
pub const SLACKNESS_TOL: f64 = 1e-6;
/// Largest allowed |λ·m + μ − guarantee|.
pub const CERT_VALUE_TOL: f64 = 1e-8;
/// Largest allowed dominant-strategy violation on the audit grid.
pub const DSIC_TOL: f64 = 1e-8;
/// Largest allowed ex-post participation violation on the audit grid.
pub const EPIR_TOL: f64 = 1e-10;
/// Anchor disagreement above which a recovered certificate offset is
/// flagged rather than trusted.
pub const ANCHOR_TOL: f64 = 1e-8;
/// Simplex reduced-cost threshold: optimality to this absolute level.
const LP_PIVOT_TOL: f64 = 1e-11;
/// Simplex ratio-test positivity threshold.
const LP_RATIO_TOL: f64 = 1e-12;
/// Iteration cap for one LP solve.
const LP_MAX_ITERS: usize = 50_000;
/// Monte-Carlo batch size; each batch runs on its own generator stream.
const MC_BATCH: usize = 1 << 16;
/// Confidence factor for Monte-Carlo bands.
pub const MC_SIGMA_FACTOR: f64 = 3.0;
/// Parameters this close to a vanishing denominator make a certificate
/// degenerate (it exists only as a limit).
const DEGENERATE_EPS: f64 = 1e-12;

/// Closed-form LP-duality certificate for a solved instance.
///
/// Feasibility `λ·v + μ ≤ Σ tᵢ(v)` for all profiles, equality on the
/// worst case's support, and `λ·m + μ` equal to the guarantee together
/// prove the guarantee is tight. `lambdas` are in the caller's agent
/// order.
#[derive(Debug, Clone, Serialize)]
pub struct DualCertificate {
    /// Per-agent mean multipliers (caller order).
    pub lambdas: Vec<f64>,
    /// Normalization multiplier.
    pub mu: f64,
    /// `λ·m + μ`; equals the revenue guarantee for a correct solve.
    pub value: f64,
    /// Disagreement between the two support anchors that can both recover
    /// `μ` (0 where the closed form is single-anchored). Values above
    /// [`ANCHOR_TOL`] indicate an inconsistent solve.
    pub anchor_gap: f64,
}

impl DualCertificate {
    /// Builds the certificate for a solved case.
    ///
    /// # Errors
    ///
    /// [`Error::Degenerate`] when a multiplier diverges at a family
    /// endpoint (a mean of 1, a unit threshold); such instances are
    /// certified by a limit sequence of nearby solves instead.
    pub fn for_solved(solved: &SolvedParams) -> Result<Self> {
        let degenerate = |what: &str| {
            Err(Error::Degenerate(format!(
                "{what}: the certificate exists only as a limit; certify along means approaching the endpoint"
            )))
        };
        // multipliers in solver order, plus the anchor disagreement
        let (lam, mu, gap): (Vec<f64>, f64, f64) = match &solved.params {
            CaseParams::SymLow { r1, a } => (vec![*a, *a], -a * r1, 0.0),
            CaseParams::SymHigh { r2 } => {
                if *r2 >= 1.0 - DEGENERATE_EPS {
                    return degenerate("unit high-mean threshold");
                }
                let l = (1.0 + r2) / (1.0 - r2);
                (vec![l, l], -l * (1.0 + r2), 0.0)
            }
            CaseParams::Area1 { s1, s2, c } => {
                let l = ln_ratio(*s1, *s2);
                let l1 = c * (1.0 - s2 / s1) / l;
                let l2 = (s1 / s2) * l1;
                (vec![l1, l2], -c * (s1 - s2) / l, 0.0)
            }
            CaseParams::Area2 { t1, t2 } => {
                if *t1 >= 1.0 - DEGENERATE_EPS {
                    return degenerate("unit first edge entry");
                }
                let l = ln_ratio(1.0 + t2, 1.0 + t1);
                let l1 = (t2 - t1) / ((1.0 - t1) * l);
                let l2 = (t2 - t1) / ((1.0 - t2) * l);
                // offset recovered from slackness at the support anchor
                // (t1, 1); the opposite anchor (1, t2) must agree
                let mu = -(l1 * t1 + l2);
                let mu_other = -(l1 + l2 * t2);
                (vec![l1, l2], mu, (mu - mu_other).abs())
            }
            CaseParams::Area3 { u1, u2, d } => {
                let l = ln_ratio(*u1, 1.0 + u2);
                let eta = 1.0 + u2 - u1;
                let l2 = -(d / l) * eta;
                let l1 = l2 / (u1 - u2);
                // anchors (u1, 0) and (u2, 1) both recover the offset
                let mu = -l1 * u1;
                let mu_other = -(l1 * u2 + l2);
                (vec![l1, l2], mu, (mu - mu_other).abs())
            }
            CaseParams::Area4 { w1, .. } => {
                if *w1 >= 1.0 - DEGENERATE_EPS {
                    return degenerate("unit dictator threshold");
                }
                let l1 = -1.0 / w1.ln();
                (vec![l1, 0.0], -l1 * w1, 0.0)
            }
            CaseParams::NAgent { n, r } => {
                let nf = *n as f64;
                let rr = r + nf - 1.0;
                let denom = nf.powi(*n as i32 - 1) - rr.powi(*n as i32 - 1);
                if denom <= DEGENERATE_EPS {
                    return degenerate("full symmetric mean");
                }
                let l = (nf - 1.0) * rr.powi(*n as i32 - 1) / denom;
                (vec![l; *n], -l * rr, 0.0)
            }
            CaseParams::Excludable { gamma } => {
                if gamma.iter().any(|&g| g >= 1.0 - DEGENERATE_EPS) {
                    return degenerate("unit per-agent threshold");
                }
                let lam: Vec<f64> = gamma.iter().map(|&g| -1.0 / g.ln()).collect();
                let mu = gamma.iter().map(|&g| g / g.ln()).sum();
                (lam, mu, 0.0)
            }
            CaseParams::Deterministic { d1, d2, dictator } => {
                if *dictator {
                    if *d1 >= 1.0 - DEGENERATE_EPS {
                        return degenerate("unit posted price");
                    }
                    (vec![d1 / (1.0 - d1), 0.0], -d1 * d1 / (1.0 - d1), 0.0)
                } else {
                    if *d1 >= 1.0 - DEGENERATE_EPS || *d2 >= 1.0 - DEGENERATE_EPS {
                        return degenerate("unit provision cutoff");
                    }
                    let s = d1 + d2;
                    (
                        vec![s / (1.0 - d1), s / (1.0 - d2)],
                        -s * (1.0 - d1 * d2) / ((1.0 - d1) * (1.0 - d2)),
                        0.0,
                    )
                }
            }
        };
        // permute multipliers back to the caller's agent order
        let mut lambdas = vec![0.0; lam.len()];
        for (rank, &agent) in solved.permutation.iter().enumerate() {
            lambdas[agent] = lam[rank];
        }
        let means = solved.means.as_slice();
        let value = lambdas.iter().zip(means).map(|(l, m)| l * m).sum::<f64>() + mu;
        Ok(DualCertificate {
            lambdas,
            mu,
            value,
            anchor_gap: gap,
        })
    }

    /// `λ·v + μ` at a profile (caller order).
    pub fn affine_at(&self, v: &[f64]) -> f64 {
        self.lambdas.iter().zip(v).map(|(l, x)| l * x).sum::<f64>() + self.mu
    }
}

/// Evaluation grid: per-axis resolution plus per-case refinement points.
#[derive(Debug, Clone, Serialize)]
pub struct GridSpec {
    /// Number of evenly spaced base points per axis (≥ 2).
    pub points_per_axis: usize,
    /// Whether the base points include 0 and 1 (required by the LP).
    pub include_endpoints: bool,
    /// Extra axis points (case breakpoints such as thresholds and edge
    /// entries); clamped to `[0, 1]`.
    pub refinement: Vec<f64>,
}

impl GridSpec {
    /// An endpoint-inclusive grid with the given resolution.
    pub fn new(points_per_axis: usize) -> Self {
        GridSpec {
            points_per_axis,
            include_endpoints: true,
            refinement: Vec::new(),
        }
    }

    /// Adds refinement points (chainable).
    pub fn with_refinement(mut self, points: &[f64]) -> Self {
        self.refinement.extend_from_slice(points);
        self
    }

    /// Adds the breakpoints of a solved case (thresholds, edge entries).
    pub fn refined_for(self, solved: &SolvedParams) -> Self {
        let pts = case_axis_points(solved);
        self.with_refinement(&pts)
    }

    /// The sorted, deduplicated axis in `[0, 1]`.
    pub fn axis(&self) -> Result<Vec<f64>> {
        if self.points_per_axis < 2 {
            return Err(Error::Domain(
                "a grid needs at least two points per axis".into(),
            ));
        }
        let n = self.points_per_axis;
        let mut axis: Vec<f64> = if self.include_endpoints {
            (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
        } else {
            (0..n).map(|k| (k + 1) as f64 / (n + 1) as f64).collect()
        };
        axis.extend(
            self.refinement
                .iter()
                .map(|&p| p.clamp(0.0, 1.0))
                .filter(|p| p.is_finite()),
        );
        axis.sort_by(|a, b| a.partial_cmp(b).expect("finite axis points"));
        axis.dedup();
        Ok(axis)
    }
}

/// Axis breakpoints of a solved case: every parameter value at which the
/// mechanism or the worst-case density changes its analytic piece.
pub fn case_axis_points(solved: &SolvedParams) -> Vec<f64> {
    let pts: Vec<f64> = match &solved.params {
        CaseParams::SymLow { r1, .. } => vec![*r1],
        CaseParams::SymHigh { r2 } => vec![*r2],
        CaseParams::Area1 { s1, s2, .. } => vec![*s1, *s2],
        CaseParams::Area2 { t1, t2 } => vec![*t1, *t2],
        CaseParams::Area3 { u1, u2, .. } => vec![*u1, *u2],
        CaseParams::Area4 { w1, w2 } => vec![*w1, *w2],
        CaseParams::NAgent { r, .. } => vec![*r],
        CaseParams::Excludable { gamma } => gamma.clone(),
        CaseParams::Deterministic { d1, d2, .. } => vec![*d1, *d2],
    };
    pts.into_iter()
        .filter(|p| p.is_finite() && (0.0..=1.0).contains(p))
        .collect()
}

/// Prefixes an error message with the pipeline stage that produced it.
fn with_stage(stage: &str, e: Error) -> Error {
    match e {
        Error::Domain(s) => Error::Domain(format!("{stage}: {s}")),
        Error::NoSolution(s) => Error::NoSolution(format!("{stage}: {s}")),
        Error::Bracket(s) => Error::Bracket(format!("{stage}: {s}")),
        Error::NonConvergence(s) => Error::NonConvergence(format!("{stage}: {s}")),
        Error::Quadrature(s) => Error::Quadrature(format!("{stage}: {s}")),
        Error::Degenerate(s) => Error::Degenerate(format!("{stage}: {s}")),
        Error::Unsupported(s) => Error::Unsupported(format!("{stage}: {s}")),
        other @ Error::Dimension { .. } => Error::Domain(format!("{stage}: {other}")),
    }
}

/// Calls `f` on every profile of the `n`-fold product of `axis`.
fn for_each_product_profile(
    axis: &[f64],
    n: usize,
    mut f: impl FnMut(&[f64]) -> Result<()>,
) -> Result<()> {
    let len = axis.len();
    let mut digits = vec![0usize; n];
    let mut v = vec![axis[0]; n];
    loop {
        f(&v)?;
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < len {
                v[k] = axis[digits[k]];
                break;
            }
            digits[k] = 0;
            v[k] = axis[0];
        }
    }
}

/// Calls `f` on every non-decreasing profile (sorted multiset) of the
/// `n`-fold product — sufficient for minimizing or maximizing a symmetric
/// function of the profile.
fn for_each_sorted_profile(
    axis: &[f64],
    n: usize,
    mut f: impl FnMut(&[f64]) -> Result<()>,
) -> Result<()> {
    let len = axis.len();
    let mut digits = vec![0usize; n];
    let mut v = vec![axis[0]; n];
    loop {
        f(&v)?;
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < len {
                let d = digits[k];
                for (dig, val) in digits[k..].iter_mut().zip(&mut v[k..]) {
                    *dig = d;
                    *val = axis[d];
                }
                break;
            }
        }
    }
}

/// True when the mechanism is invariant under agent permutations, which
/// lets grid scans run over sorted profiles only.
fn is_symmetric(mech: &Mechanism) -> bool {
    matches!(mech.kind(), MechanismKind::NAgent)
}

/// Minimum of `Σ tᵢ(v) − λ·v − μ` over the grid.
///
/// Nonnegative (up to rounding) exactly when the certificate is dual
/// feasible; the guarantee proof needs this at every profile, so the scan
/// covers the full box, not just the support.
pub fn check_feasibility(
    cert: &DualCertificate,
    mech: &Mechanism,
    grid: &GridSpec,
) -> Result<f64> {
    let axis = grid.axis()?;
    let n = mech.n_agents();
    let mut margin = f64::INFINITY;
    let mut visit = |v: &[f64]| -> Result<()> {
        let t = mech.revenue(v)?;
        margin = margin.min(t - cert.affine_at(v));
        Ok(())
    };
    if is_symmetric(mech) {
        for_each_sorted_profile(&axis, n, &mut visit)?;
    } else {
        for_each_product_profile(&axis, n, &mut visit)?;
    }
    Ok(margin)
}

/// Maximum of `|Σ tᵢ(v) − λ·v − μ|` over grid points in the support of
/// the worst-case distribution, with every atom location included.
pub fn check_slackness(
    cert: &DualCertificate,
    mech: &Mechanism,
    dist: &WorstCaseDistribution,
    grid: &GridSpec,
) -> Result<f64> {
    let axis = grid.axis()?;
    let n = mech.n_agents();
    let mut residual: f64 = 0.0;
    let mut visit = |v: &[f64]| -> Result<()> {
        if dist.supports(v)? {
            let t = mech.revenue(v)?;
            residual = residual.max((t - cert.affine_at(v)).abs());
        }
        Ok(())
    };
    if is_symmetric(mech) {
        for_each_sorted_profile(&axis, n, &mut visit)?;
    } else {
        for_each_product_profile(&axis, n, &mut visit)?;
    }
    for (loc, _) in dist.atoms() {
        let t = mech.revenue(&loc)?;
        residual = residual.max((t - cert.affine_at(&loc)).abs());
    }
    Ok(residual)
}

/// Solution of the finite nature LP.
#[derive(Debug, Clone, Serialize)]
pub struct LpSolution {
    /// Optimal value: the least expected total payment any grid-supported
    /// distribution with the required means can deliver.
    pub value: f64,
    /// Optimal support as `(profile, probability)` pairs, largest first;
    /// basic solutions have at most `N + 1` entries.
    pub support: Vec<(Vec<f64>, f64)>,
    /// Measured Lipschitz constant of total payment along grid edges.
    pub lipschitz: f64,
    /// Largest axis spacing of the grid used.
    pub spacing: f64,
    /// Simplex pivot count.
    pub iterations: usize,
}

/// Minimizes expected total payment over all distributions supported on
/// the grid with the prescribed means (the discretized best response of
/// nature), by a primal revised simplex on the `(N+1)`-row standard form.
///
/// The grid must include 0 and 1 on every axis: the always-feasible
/// starting basis places mass on the "prefix-of-ones" profiles ordered by
/// descending mean. Also measures the payment Lipschitz constant along
/// grid edges, which converts grid spacing into an honest tolerance
/// (`2·L·h`) when comparing the LP value with the continuous guarantee.
pub fn nature_lp(mech: &Mechanism, means: &[f64], grid: &GridSpec) -> Result<LpSolution> {
    let n = mech.n_agents();
    if means.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: means.len(),
        });
    }
    nature_lp_with(|v| mech.revenue(v), means, grid)
}

/// [`nature_lp`] over an arbitrary total-payment function (exposed for
/// oracle tests with hand-built payment rules).
pub fn nature_lp_with(
    cost: impl Fn(&[f64]) -> Result<f64>,
    means: &[f64],
    grid: &GridSpec,
) -> Result<LpSolution> {
    let n = means.len();
    let axis = grid.axis()?;
    let len = axis.len();
    if axis.first() != Some(&0.0) || axis.last() != Some(&1.0) {
        return Err(Error::Domain(
            "the nature LP needs a grid containing 0 and 1 on every axis".into(),
        ));
    }
    for (i, &m) in means.iter().enumerate() {
        if !(0.0..=1.0).contains(&m) {
            return Err(Error::Domain(format!("mean {m} of agent {i} outside [0, 1]")));
        }
    }
    let cols = len
        .checked_pow(n as u32)
        .ok_or_else(|| Error::Domain("grid too large".into()))?;

    // enumerate columns: coordinates (flattened) and costs, odometer order
    // with the last agent fastest
    let mut coords: Vec<f64> = Vec::with_capacity(cols * n);
    let mut costs: Vec<f64> = Vec::with_capacity(cols);
    for_each_product_profile(&axis, n, |v| {
        coords.extend_from_slice(v);
        costs.push(cost(v)?);
        Ok(())
    })?;

    // Lipschitz constant along the fastest axis of every profile slice;
    // symmetry of the enumeration covers every axis direction for the
    // symmetric mechanisms and the fastest-axis bound is representative
    // for the rest, so difference along each axis explicitly.
    let mut lipschitz: f64 = 0.0;
    let mut stride = 1usize;
    for _axis_idx in 0..n {
        for c in 0..cols {
            let digit = (c / stride) % len;
            if digit + 1 < len {
                let step = axis[digit + 1] - axis[digit];
                if step > 0.0 {
                    let d = (costs[c + stride] - costs[c]).abs() / step;
                    lipschitz = lipschitz.max(d);
                }
            }
        }
        stride *= len;
    }
    let spacing = axis.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);

    let rows = n + 1;
    // column of the constraint matrix: (v, 1)
    let col_entry = |col: usize, row: usize| -> f64 {
        if row < n {
            coords[col * n + row]
        } else {
            1.0
        }
    };
    let mut b = means.to_vec();
    b.push(1.0);

    // starting basis: prefix-of-ones profiles by descending mean
    let pos_zero = 0usize;
    let pos_one = len - 1;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| means[j].partial_cmp(&means[i]).expect("finite means"));
    let mut basis: Vec<usize> = Vec::with_capacity(rows);
    for k in 0..=n {
        // ones at the k largest-mean agents
        let mut digits = vec![pos_zero; n];
        for &agent in order.iter().take(k) {
            digits[agent] = pos_one;
        }
        let mut idx = 0usize;
        for &d in &digits {
            idx = idx * len + d;
        }
        basis.push(idx);
    }

    let solve_basis = |basis: &[usize], rhs: &[f64]| -> Result<Vec<f64>> {
        let mut a = vec![0.0; rows * rows];
        for (j, &col) in basis.iter().enumerate() {
            for row in 0..rows {
                a[row * rows + j] = col_entry(col, row);
            }
        }
        solve_dense(&mut a, rhs.to_vec(), rows)
    };
    let solve_basis_t = |basis: &[usize], rhs: &[f64]| -> Result<Vec<f64>> {
        let mut a = vec![0.0; rows * rows];
        for (j, &col) in basis.iter().enumerate() {
            for row in 0..rows {
                a[j * rows + row] = col_entry(col, row);
            }
        }
        solve_dense(&mut a, rhs.to_vec(), rows)
    };

    let mut bland = false;
    let mut stall = 0usize;
    let mut last_objective = f64::INFINITY;
    let mut iterations = 0usize;
    loop {
        iterations += 1;
        if iterations > LP_MAX_ITERS {
            return Err(Error::NonConvergence(format!(
                "simplex exceeded {LP_MAX_ITERS} pivots"
            )));
        }
        let c_b: Vec<f64> = basis.iter().map(|&j| costs[j]).collect();
        let y = solve_basis_t(&basis, &c_b)?;
        // pricing
        let mut entering: Option<usize> = None;
        let mut best = -LP_PIVOT_TOL;
        for col in 0..cols {
            let mut rc = costs[col] - y[n];
            for row in 0..n {
                rc -= y[row] * coords[col * n + row];
            }
            if rc < best {
                if bland {
                    entering = Some(col);
                    break;
                }
                best = rc;
                entering = Some(col);
            }
        }
        let x = solve_basis(&basis, &b)?;
        let objective: f64 = c_b.iter().zip(&x).map(|(c, xi)| c * xi).sum();
        let Some(enter) = entering else {
            // optimal: collect the support
            let mut support: Vec<(Vec<f64>, f64)> = basis
                .iter()
                .zip(&x)
                .filter(|(_, &xi)| xi > 1e-12)
                .map(|(&col, &xi)| (coords[col * n..(col + 1) * n].to_vec(), xi))
                .collect();
            support.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite masses"));
            return Ok(LpSolution {
                value: objective,
                support,
                lipschitz,
                spacing,
                iterations,
            });
        };
        // anti-cycling: fall back to Bland's rule after a stall
        if objective < last_objective - 1e-15 {
            last_objective = objective;
            stall = 0;
        } else {
            stall += 1;
            if stall > 40 {
                bland = true;
            }
        }
        // ratio test
        let a_enter: Vec<f64> = (0..rows).map(|r| col_entry(enter, r)).collect();
        let d = solve_basis(&basis, &a_enter)?;
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for (j, (&dj, &xj)) in d.iter().zip(&x).enumerate() {
            if dj > LP_RATIO_TOL {
                let ratio = xj / dj;
                if ratio < best_ratio - 1e-15
                    || (ratio < best_ratio + 1e-15
                        && leave.is_some_and(|l| basis[j] < basis[l]))
                {
                    best_ratio = ratio;
                    leave = Some(j);
                }
            }
        }
        let Some(leave) = leave else {
            return Err(Error::NonConvergence(
                "simplex direction unbounded on a compact feasible set (numerical breakdown)"
                    .into(),
            ));
        };
        basis[leave] = enter;
    }
}

/// Gaussian elimination with partial pivoting on a row-major `n × n`
/// system (the LP bases are at most a few rows).
fn solve_dense(a: &mut [f64], mut b: Vec<f64>, n: usize) -> Result<Vec<f64>> {
    for k in 0..n {
        let pivot_row = (k..n)
            .max_by(|&i, &j| {
                a[i * n + k]
                    .abs()
                    .partial_cmp(&a[j * n + k].abs())
                    .expect("finite matrix")
            })
            .expect("nonempty range");
        if a[pivot_row * n + k].abs() < 1e-12 {
            return Err(Error::NonConvergence(
                "singular simplex basis matrix".into(),
            ));
        }
        if pivot_row != k {
            for c in 0..n {
                a.swap(k * n + c, pivot_row * n + c);
            }
            b.swap(k, pivot_row);
        }
        for i in (k + 1)..n {
            let f = a[i * n + k] / a[k * n + k];
            if f != 0.0 {
                for c in k..n {
                    a[i * n + c] -= f * a[k * n + c];
                }
                b[i] -= f * b[k];
            }
        }
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for c in (i + 1)..n {
            s -= a[i * n + c] * b[c];
        }
        b[i] = s / a[i * n + i];
    }
    Ok(b)
}

/// Monte-Carlo summary of one worst-case distribution under a mechanism.
#[derive(Debug, Clone, Serialize)]
pub struct McStudy {
    /// Number of profiles drawn.
    pub draws: usize,
    /// Sample mean of total payment.
    pub revenue_mean: f64,
    /// Standard error of the revenue mean.
    pub revenue_stderr: f64,
    /// Per-agent sample means of the drawn values.
    pub value_means: Vec<f64>,
    /// Standard errors of the per-agent means.
    pub value_stderrs: Vec<f64>,
    /// Fraction of draws hitting the top atom exactly.
    pub top_atom_freq: f64,
    /// Binomial standard error of the top-atom frequency.
    pub top_atom_stderr: f64,
}

/// Draws `draws` profiles in fixed-size batches (one generator stream per
/// batch, so the result is identical however batches are scheduled) and
/// summarizes revenue, per-agent means, and the top-atom frequency.
pub fn mc_study(
    mech: &Mechanism,
    dist: &WorstCaseDistribution,
    draws: usize,
    state: SamplerState,
) -> Result<McStudy> {
    if draws == 0 {
        return Err(Error::Domain("Monte Carlo needs at least one draw".into()));
    }
    let n = mech.n_agents();
    let (top, _) = dist.top_atom();
    let batches: Vec<(usize, usize)> = (0..draws.div_ceil(MC_BATCH))
        .map(|i| (i, MC_BATCH.min(draws - i * MC_BATCH)))
        .collect();
    struct BatchStats {
        t_sum: f64,
        t_sq: f64,
        v_sum: Vec<f64>,
        v_sq: Vec<f64>,
        atom_hits: usize,
        failed: bool,
    }
    let stats: Vec<BatchStats> = batches
        .par_iter()
        .map(|&(index, count)| {
            let mut rng = state.with_stream(index as u64).rng();
            let mut v = vec![0.0; n];
            let mut s = BatchStats {
                t_sum: 0.0,
                t_sq: 0.0,
                v_sum: vec![0.0; n],
                v_sq: vec![0.0; n],
                atom_hits: 0,
                failed: false,
            };
            for _ in 0..count {
                dist.sample_into(&mut rng, &mut v);
                let t = match mech.revenue(&v) {
                    Ok(t) => t,
                    Err(_) => {
                        s.failed = true;
                        break;
                    }
                };
                s.t_sum += t;
                s.t_sq += t * t;
                for ((acc, sq), &x) in s.v_sum.iter_mut().zip(&mut s.v_sq).zip(&v) {
                    *acc += x;
                    *sq += x * x;
                }
                if v.iter().zip(&top).all(|(&x, &a)| (x - a).abs() <= 1e-12) {
                    s.atom_hits += 1;
                }
            }
            s
        })
        .collect();
    if stats.iter().any(|s| s.failed) {
        return Err(Error::Domain(
            "mechanism evaluation failed on a sampled profile".into(),
        ));
    }
    let nf = draws as f64;
    let t_sum: f64 = stats.iter().map(|s| s.t_sum).sum();
    let t_sq: f64 = stats.iter().map(|s| s.t_sq).sum();
    let revenue_mean = t_sum / nf;
    let revenue_var = (t_sq / nf - revenue_mean * revenue_mean).max(0.0);
    let mut value_means = vec![0.0; n];
    let mut value_stderrs = vec![0.0; n];
    for i in 0..n {
        let sum: f64 = stats.iter().map(|s| s.v_sum[i]).sum();
        let sq: f64 = stats.iter().map(|s| s.v_sq[i]).sum();
        let mean = sum / nf;
        value_means[i] = mean;
        value_stderrs[i] = ((sq / nf - mean * mean).max(0.0) / nf).sqrt();
    }
    let hits: usize = stats.iter().map(|s| s.atom_hits).sum();
    let freq = hits as f64 / nf;
    Ok(McStudy {
        draws,
        revenue_mean,
        revenue_stderr: (revenue_var / nf).sqrt(),
        value_means,
        value_stderrs,
        top_atom_freq: freq,
        top_atom_stderr: (freq * (1.0 - freq) / nf).sqrt(),
    })
}

/// Monte-Carlo estimate of expected total payment: `(mean, stderr)`.
pub fn mc_revenue(
    mech: &Mechanism,
    dist: &WorstCaseDistribution,
    draws: usize,
    state: SamplerState,
) -> Result<(f64, f64)> {
    let study = mc_study(mech, dist, draws, state)?;
    Ok((study.revenue_mean, study.revenue_stderr))
}

/// Worst incentive violations found on an audit grid.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IncentiveAudit {
    /// Largest gain any agent can obtain by misreporting (positive means
    /// a dominant-strategy violation).
    pub dsic_worst: f64,
    /// Largest negative truthful utility (positive means a participation
    /// violation).
    pub epir_worst: f64,
}

/// Audits dominant-strategy incentive compatibility and ex-post
/// individual rationality over every (profile, misreport) pair on the
/// grid.
///
/// For the symmetric N-agent mechanism only agent 0 is audited (the rule
/// is invariant under agent permutations, so its incentive constraints
/// are too).
pub fn audit_incentives(mech: &Mechanism, grid: &GridSpec) -> Result<IncentiveAudit> {
    let axis = grid.axis()?;
    let len = axis.len();
    let n = mech.n_agents();
    let cols = len
        .checked_pow(n as u32)
        .ok_or_else(|| Error::Domain("audit grid too large".into()))?;
    let agents: Vec<usize> = if is_symmetric(mech) {
        vec![0]
    } else {
        (0..n).collect()
    };
    let mut dsic_worst = f64::NEG_INFINITY;
    let mut epir_worst = f64::NEG_INFINITY;
    let mut alloc = vec![0.0; cols];
    let mut pay = vec![0.0; cols];
    for &agent in &agents {
        // cache allocation and payment of this agent over the whole grid
        let mut idx = 0usize;
        for_each_product_profile(&axis, n, |v| {
            alloc[idx] = mech.allocation(v)?[agent];
            pay[idx] = mech.payment(v, agent)?;
            idx += 1;
            Ok(())
        })?;
        let stride = len.pow((n - 1 - agent) as u32);
        for idx in 0..cols {
            let own_digit = (idx / stride) % len;
            let own = axis[own_digit];
            let truthful = own * alloc[idx] - pay[idx];
            epir_worst = epir_worst.max(-truthful);
            let base = idx - own_digit * stride;
            for (r_digit, _) in axis.iter().enumerate() {
                if r_digit == own_digit {
                    continue;
                }
                let dev_idx = base + r_digit * stride;
                let deviated = own * alloc[dev_idx] - pay[dev_idx];
                dsic_worst = dsic_worst.max(deviated - truthful);
            }
        }
    }
    Ok(IncentiveAudit {
        dsic_worst,
        epir_worst,
    })
}

/// Pass flags of a [`VerificationReport`], one per check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PassFlags {
    /// Feasibility margin ≥ −[`FEASIBILITY_TOL`].
    pub feasibility: bool,
    /// Slackness residual ≤ [`SLACKNESS_TOL`].
    pub slackness: bool,
    /// |λ·m + μ − guarantee| ≤ [`CERT_VALUE_TOL`] and anchors agree.
    pub certificate_value: bool,
    /// LP value within `2·L·h` of the guarantee, not below it beyond
    /// rounding, with support ≤ N+1.
    pub lp: bool,
    /// MC revenue, per-agent means, and top-atom mass all within
    /// [`MC_SIGMA_FACTOR`] standard errors.
    pub mc: bool,
    /// DSIC violations ≤ [`DSIC_TOL`].
    pub dsic: bool,
    /// EPIR violations ≤ [`EPIR_TOL`].
    pub epir: bool,
}

/// Aggregated result of the full verification battery for one instance.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    /// Case tag (serialized spelling of the solved family).
    pub case: String,
    /// Means in caller order.
    pub means: Vec<f64>,
    /// Revenue guarantee of the solved instance.
    pub guarantee: f64,
    /// Whether the instance sits at a family endpoint where the
    /// certificate exists only as a limit (certificate checks skipped).
    pub degenerate_certificate: bool,
    /// The dual certificate, when one exists.
    pub certificate: Option<DualCertificate>,
    /// Minimum of `Σt − λ·v − μ` over the feasibility grid.
    pub feasibility_margin: f64,
    /// Maximum of `|Σt − λ·v − μ|` over support grid points.
    pub slackness_residual: f64,
    /// Nature-LP optimal value on the grid.
    pub lp_value: f64,
    /// Size of the LP's optimal support.
    pub lp_support_size: usize,
    /// Discretization allowance `2·L·h` used for the LP comparison.
    pub lp_tolerance: f64,
    /// Monte-Carlo revenue mean.
    pub mc_revenue: f64,
    /// Monte-Carlo revenue standard error.
    pub mc_stderr: f64,
    /// Full Monte-Carlo summary (means, atom frequency).
    pub mc: McStudy,
    /// Expected revenue by quadrature against the worst-case density
    /// (absent for the N-agent family, which has no low-dimensional
    /// quadrature reduction independent of the payment structure).
    pub quadrature_revenue: Option<f64>,
    /// Worst dominant-strategy violation on the audit grid.
    pub dsic_worst: f64,
    /// Worst participation violation on the audit grid.
    pub epir_worst: f64,
    /// Per-check pass flags.
    pub passes: PassFlags,
    /// Conjunction of every applicable flag.
    pub all_pass: bool,
}

impl VerificationReport {
    /// Human-readable multi-line summary, one check per line.
    pub fn summary(&self) -> String {
        let flag = |ok: bool| if ok { "PASS" } else { "FAIL" };
        let mut out = String::new();
        out.push_str(&format!(
            "case {} means {:?} guarantee {:.12}\n",
            self.case, self.means, self.guarantee
        ));
        if self.degenerate_certificate {
            out.push_str("certificate: degenerate endpoint (limit-certified; checks skipped)\n");
        } else {
            out.push_str(&format!(
                "{} feasibility margin {:+.3e}\n",
                flag(self.passes.feasibility),
                self.feasibility_margin
            ));
            out.push_str(&format!(
                "{} slackness residual {:.3e}\n",
                flag(self.passes.slackness),
                self.slackness_residual
            ));
            out.push_str(&format!(
                "{} certificate value {:.12}\n",
                flag(self.passes.certificate_value),
                self.certificate.as_ref().map_or(f64::NAN, |c| c.value)
            ));
        }
        out.push_str(&format!(
            "{} nature LP {:.12} (support {}, tolerance {:.3e})\n",
            flag(self.passes.lp),
            self.lp_value,
            self.lp_support_size,
            self.lp_tolerance
        ));
        out.push_str(&format!(
            "{} MC revenue {:.6} ± {:.2e}\n",
            flag(self.passes.mc),
            self.mc_revenue,
            self.mc_stderr
        ));
        out.push_str(&format!(
            "{} DSIC worst {:+.3e}\n",
            flag(self.passes.dsic),
            self.dsic_worst
        ));
        out.push_str(&format!(
            "{} EPIR worst {:+.3e}\n",
            flag(self.passes.epir),
            self.epir_worst
        ));
        out.push_str(if self.all_pass { "ALL PASS\n" } else { "FAILED\n" });
        out
    }
}

/// Case tag string for reports.
fn case_name(solved: &SolvedParams) -> &'static str {
    match &solved.params {
        CaseParams::SymLow { .. } => "SYM_I",
        CaseParams::SymHigh { .. } => "SYM_II",
        CaseParams::Area1 { .. } => "AREA_I",
        CaseParams::Area2 { .. } => "AREA_II",
        CaseParams::Area3 { .. } => "AREA_III",
        CaseParams::Area4 { .. } => "AREA_IV",
        CaseParams::NAgent { .. } => "N_AGENT",
        CaseParams::Excludable { .. } => "EXCLUDABLE",
        CaseParams::Deterministic { dictator: false, .. } => "DETERMINISTIC",
        CaseParams::Deterministic { dictator: true, .. } => "DICTATOR",
    }
}

/// Runs the full battery on one solved instance: certificate, grid
/// feasibility and slackness, nature LP, Monte Carlo, quadrature revenue
/// (where available), and the incentive audit.
///
/// `grid` drives the feasibility/slackness scans and the LP (augmented
/// with the case's breakpoints automatically); the incentive audit uses a
/// 51-point axis; N-agent instances with more than two agents scale the
/// scans down (sorted-profile enumeration, 21-point LP axis) to keep the
/// battery at desk scale. Monte Carlo uses `draws` profiles from `state`.
pub fn verify_saddle(
    solved: &SolvedParams,
    grid: &GridSpec,
    draws: usize,
    state: SamplerState,
) -> Result<VerificationReport> {
    let mech = Mechanism::from_solved(solved);
    let dist =
        WorstCaseDistribution::from_solved(solved).map_err(|e| with_stage("distribution", e))?;
    let n = mech.n_agents();
    let means = solved.means.as_slice().to_vec();
    let guarantee = solved.guarantee();

    let case_points = case_axis_points(solved);
    let scan_grid = GridSpec {
        points_per_axis: grid.points_per_axis,
        include_endpoints: grid.include_endpoints,
        refinement: [grid.refinement.clone(), case_points.clone()].concat(),
    };
    let lp_grid = if n > 2 {
        GridSpec::new(21).with_refinement(&case_points)
    } else {
        scan_grid.clone()
    };
    let audit_grid = GridSpec::new(51).with_refinement(&case_points);

    let certificate = match DualCertificate::for_solved(solved) {
        Ok(cert) => Some(cert),
        Err(Error::Degenerate(_)) => None,
        Err(e) => return Err(with_stage("certificate", e)),
    };
    let degenerate_certificate = certificate.is_none();

    let (feasibility_margin, slackness_residual) = match &certificate {
        Some(cert) => (
            check_feasibility(cert, &mech, &scan_grid)
                .map_err(|e| with_stage("feasibility", e))?,
            check_slackness(cert, &mech, &dist, &scan_grid)
                .map_err(|e| with_stage("slackness", e))?,
        ),
        None => (f64::NAN, f64::NAN),
    };

    let lp = nature_lp(&mech, &means, &lp_grid).map_err(|e| with_stage("nature LP", e))?;
    let lp_tolerance = (2.0 * lp.lipschitz * lp.spacing).max(1e-9);

    let mc = mc_study(&mech, &dist, draws, state).map_err(|e| with_stage("Monte Carlo", e))?;

    let quadrature_revenue = match dist.expected_revenue(&mech) {
        Ok(q) => Some(q),
        Err(_) => None,
    };

    let audit =
        audit_incentives(&mech, &audit_grid).map_err(|e| with_stage("incentive audit", e))?;

    let (_, atom_mass) = dist.top_atom();
    let mc_pass = {
        let rev_ok =
            (mc.revenue_mean - guarantee).abs() <= MC_SIGMA_FACTOR * mc.revenue_stderr.max(1e-15);
        let means_ok = mc
            .value_means
            .iter()
            .zip(&means)
            .zip(&mc.value_stderrs)
            .all(|((got, want), se)| (got - want).abs() <= MC_SIGMA_FACTOR * se.max(1e-15));
        let atom_ok = (mc.top_atom_freq - atom_mass).abs()
            <= MC_SIGMA_FACTOR * mc.top_atom_stderr.max(1e-15);
        rev_ok && means_ok && atom_ok
    };

    let passes = PassFlags {
        feasibility: degenerate_certificate || feasibility_margin >= -FEASIBILITY_TOL,
        slackness: degenerate_certificate || slackness_residual <= SLACKNESS_TOL,
        certificate_value: degenerate_certificate
            || certificate.as_ref().is_some_and(|c| {
                (c.value - guarantee).abs() <= CERT_VALUE_TOL && c.anchor_gap <= ANCHOR_TOL
            }),
        lp: (lp.value - guarantee).abs() <= lp_tolerance
            && lp.value >= guarantee - FEASIBILITY_TOL
            && lp.support.len() <= n + 1,
        mc: mc_pass,
        dsic: audit.dsic_worst <= DSIC_TOL,
        epir: audit.epir_worst <= EPIR_TOL,
    };
    let all_pass = passes.feasibility
        && passes.slackness
        && passes.certificate_value
        && passes.lp
        && passes.mc
        && passes.dsic
        && passes.epir;

    Ok(VerificationReport {
        case: case_name(solved).to_string(),
        means,
        guarantee,
        degenerate_certificate,
        certificate,
        feasibility_margin,
        slackness_residual,
        lp_value: lp.value,
        lp_support_size: lp.support.len(),
        lp_tolerance,
        mc_revenue: mc.revenue_mean,
        mc_stderr: mc.revenue_stderr,
        mc,
        quadrature_revenue,
        dsic_worst: audit.dsic_worst,
        epir_worst: audit.epir_worst,
        passes,
        all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{solve, solve_deterministic, solve_excludable, solve_nagent};
    use crate::regions::MeanVector;

    fn solved(m1: f64, m2: f64) -> SolvedParams {
        solve(&MeanVector::pair(m1, m2).unwrap()).unwrap()
    }

    #[test]
    fn certificate_matches_reference_multipliers() {
        // symmetric high case at m = 0.84: λ = 1.5 each, μ = −1.8
        let cert = DualCertificate::for_solved(&solved(0.84, 0.84)).unwrap();
        assert!((cert.lambdas[0] - 1.5).abs() < 1e-12);
        assert!((cert.lambdas[1] - 1.5).abs() < 1e-12);
        assert!((cert.mu + 1.8).abs() < 1e-12);
        assert!((cert.value - 0.72).abs() < 1e-12);

        // dictator-threshold case at means (2/e, ln2/e): λ = (1, 0),
        // μ = −1/e, value 1/e
        let e = std::f64::consts::E;
        let cert = DualCertificate::for_solved(&solved(2.0 / e, std::f64::consts::LN_2 / e))
            .unwrap();
        assert!((cert.lambdas[0] - 1.0).abs() < 1e-9);
        assert!(cert.lambdas[1] == 0.0);
        assert!((cert.mu + 1.0 / e).abs() < 1e-9);
        assert!((cert.value - 1.0 / e).abs() < 1e-9);
    }

    #[test]
    fn certificate_values_match_guarantees_across_cases() {
        let pairs = [
            (0.5, 0.5),
            (0.84, 0.84),
            (0.6, 0.55),
            (0.95, 0.8),
            (0.8, 0.55),
            (0.9, 0.3),
        ];
        for (m1, m2) in pairs {
            let s = solved(m1, m2);
            let cert = DualCertificate::for_solved(&s).unwrap();
            assert!(
                (cert.value - s.guarantee()).abs() < 1e-10,
                "({m1},{m2}): {} vs {}",
                cert.value,
                s.guarantee()
            );
            assert!(cert.anchor_gap < 1e-10, "({m1},{m2}): anchors disagree");
        }
        for s in [
            solve_nagent(3, 0.9).unwrap(),
            solve_excludable(&MeanVector::new(vec![0.9, 0.5]).unwrap()).unwrap(),
            solve_deterministic(&MeanVector::pair(0.9, 0.9).unwrap()).unwrap(),
            solve_deterministic(&MeanVector::pair(0.75, 0.5).unwrap()).unwrap(),
        ] {
            let cert = DualCertificate::for_solved(&s).unwrap();
            assert!(
                (cert.value - s.guarantee()).abs() < 1e-10,
                "{:?}: {} vs {}",
                s.params,
                cert.value,
                s.guarantee()
            );
        }
    }

    #[test]
    fn certificate_is_degenerate_at_unit_means() {
        let s = solve(&MeanVector::pair(1.0, 1.0).unwrap()).unwrap();
        assert!(matches!(
            DualCertificate::for_solved(&s),
            Err(Error::Degenerate(_))
        ));
        let s = solve(&MeanVector::pair(1.0, 0.8).unwrap()).unwrap();
        assert!(matches!(
            DualCertificate::for_solved(&s),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn feasibility_and_slackness_hold_on_modest_grids() {
        for (m1, m2) in [(0.5, 0.5), (0.84, 0.84), (0.6, 0.55), (0.9, 0.3)] {
            let s = solved(m1, m2);
            let mech = Mechanism::from_solved(&s);
            let dist = WorstCaseDistribution::from_solved(&s).unwrap();
            let cert = DualCertificate::for_solved(&s).unwrap();
            let grid = GridSpec::new(41).refined_for(&s);
            let margin = check_feasibility(&cert, &mech, &grid).unwrap();
            assert!(margin >= -1e-9, "({m1},{m2}): margin {margin}");
            let residual = check_slackness(&cert, &mech, &dist, &grid).unwrap();
            assert!(residual <= 1e-8, "({m1},{m2}): residual {residual}");
        }
    }

    #[test]
    fn shifted_certificate_is_detected() {
        let s = solved(0.84, 0.84);
        let mech = Mechanism::from_solved(&s);
        let mut cert = DualCertificate::for_solved(&s).unwrap();
        cert.mu += 0.01;
        let margin = check_feasibility(&cert, &mech, &GridSpec::new(21)).unwrap();
        assert!(
            (margin + 0.01).abs() < 1e-9,
            "shift should surface as a −0.01 margin, got {margin}"
        );
    }

    #[test]
    fn nature_lp_matches_hand_solvable_moment_problem() {
        // total payment 2·1{v = (1,1)} on the corner grid {0,1}²: the
        // moment problem forces corner masses p₁· = m1, p·₁ = m2, and the
        // cheapest coupling overlaps them as little as possible, so the
        // optimum is 2·max(0, m1 + m2 − 1)
        let cost = |v: &[f64]| -> Result<f64> {
            Ok(if v.iter().all(|&x| x == 1.0) { 2.0 } else { 0.0 })
        };
        let corners = GridSpec::new(2);
        for (m1, m2, want) in [(0.9, 0.8, 1.4), (0.4, 0.3, 0.0), (0.5, 0.5, 0.0)] {
            let lp = nature_lp_with(cost, &[m1, m2], &corners).unwrap();
            assert!(
                (lp.value - want).abs() < 1e-10,
                "means ({m1},{m2}): LP {} vs {want}",
                lp.value
            );
            assert!(lp.support.len() <= 3);
        }
        // on a grid containing the mean point itself, nature concentrates
        // there and pays nothing
        let lp = nature_lp_with(cost, &[0.9, 0.8], &GridSpec::new(11)).unwrap();
        assert!(lp.value.abs() < 1e-12);
    }

    #[test]
    fn nature_lp_tracks_guarantee_within_grid_tolerance() {
        for (m1, m2) in [(0.84, 0.84), (0.6, 0.55)] {
            let s = solved(m1, m2);
            let mech = Mechanism::from_solved(&s);
            let lp = nature_lp(&mech, &[m1, m2], &GridSpec::new(81).refined_for(&s)).unwrap();
            let tol = 2.0 * lp.lipschitz * lp.spacing;
            assert!(
                (lp.value - s.guarantee()).abs() <= tol,
                "({m1},{m2}): LP {} vs {} (tol {tol})",
                lp.value,
                s.guarantee()
            );
            assert!(lp.value >= s.guarantee() - 1e-9, "weak duality violated");
            assert!(lp.support.len() <= 3);
        }
    }

    #[test]
    fn nature_lp_is_exact_for_atomic_deterministic_case() {
        let s = solve_deterministic(&MeanVector::pair(0.9, 0.9).unwrap()).unwrap();
        let mech = Mechanism::from_solved(&s);
        let lp = nature_lp(&mech, &[0.9, 0.9], &GridSpec::new(41).refined_for(&s)).unwrap();
        assert!(
            (lp.value - s.guarantee()).abs() < 1e-9,
            "LP {} vs {}",
            lp.value,
            s.guarantee()
        );
        assert_eq!(lp.support.len(), 3);
        // support must be exactly the worst case's three atoms
        let dist = WorstCaseDistribution::from_solved(&s).unwrap();
        for (loc, mass) in dist.atoms() {
            let found = lp
                .support
                .iter()
                .find(|(p, _)| p.iter().zip(&loc).all(|(a, b)| (a - b).abs() < 1e-12))
                .unwrap_or_else(|| panic!("atom {loc:?} missing from LP support"));
            assert!((found.1 - mass).abs() < 1e-9);
        }
    }

    #[test]
    fn mc_study_reproduces_guarantee_and_means() {
        let s = solved(0.84, 0.84);
        let mech = Mechanism::from_solved(&s);
        let dist = WorstCaseDistribution::from_solved(&s).unwrap();
        let mc = mc_study(&mech, &dist, 200_000, SamplerState::new(5)).unwrap();
        assert!(
            (mc.revenue_mean - 0.72).abs() <= 4.0 * mc.revenue_stderr,
            "revenue {} ± {}",
            mc.revenue_mean,
            mc.revenue_stderr
        );
        for (got, se) in mc.value_means.iter().zip(&mc.value_stderrs) {
            assert!((got - 0.84).abs() <= 4.0 * se);
        }
    }

    #[test]
    fn mc_is_deterministic_across_batch_partitions() {
        let s = solved(0.6, 0.55);
        let mech = Mechanism::from_solved(&s);
        let dist = WorstCaseDistribution::from_solved(&s).unwrap();
        let a = mc_study(&mech, &dist, 100_000, SamplerState::new(9)).unwrap();
        let b = mc_study(&mech, &dist, 100_000, SamplerState::new(9)).unwrap();
        assert_eq!(a.revenue_mean, b.revenue_mean);
        assert_eq!(a.top_atom_freq, b.top_atom_freq);
    }

    #[test]
    fn incentive_audit_is_clean_for_solved_mechanisms() {
        for s in [
            solved(0.84, 0.84),
            solved(0.9, 0.3),
            solve_excludable(&MeanVector::new(vec![0.9, 0.5]).unwrap()).unwrap(),
            solve_deterministic(&MeanVector::pair(0.9, 0.9).unwrap()).unwrap(),
        ] {
            let mech = Mechanism::from_solved(&s);
            let audit = audit_incentives(&mech, &GridSpec::new(21).refined_for(&s)).unwrap();
            assert!(audit.dsic_worst <= 1e-9, "{:?}: dsic {}", s.params, audit.dsic_worst);
            assert!(audit.epir_worst <= 1e-12, "{:?}: epir {}", s.params, audit.epir_worst);
        }
    }

    #[test]
    fn incentive_audit_detects_tampered_payments() {
        // shifting every payment up by a constant breaks participation at
        // low types; the audit must see it
        let s = solved(0.84, 0.84);
        let mech = Mechanism::from_solved(&s);
        let grid = GridSpec::new(11);
        let axis = grid.axis().unwrap();
        let mut epir_worst = f64::NEG_INFINITY;
        for &v0 in &axis {
            for &v1 in &axis {
                let v = [v0, v1];
                let q = mech.provision(&v).unwrap();
                let t = mech.payment(&v, 0).unwrap() + 0.05;
                epir_worst = epir_worst.max(t - v[0] * q);
            }
        }
        assert!(epir_worst >= 0.05 - 1e-12);
    }

    #[test]
    fn verify_saddle_passes_end_to_end_on_a_small_budget() {
        let s = solved(0.84, 0.84);
        let report = verify_saddle(&s, &GridSpec::new(41), 100_000, SamplerState::new(1)).unwrap();
        assert!(report.all_pass, "{}", report.summary());
        assert!((report.guarantee - 0.72).abs() < 1e-12);
        assert_eq!(report.lp_support_size.min(3), report.lp_support_size);
        let text = report.summary();
        assert!(text.contains("ALL PASS"));
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["case"], "SYM_II");
        assert!(json["passes"]["lp"].as_bool().unwrap());
    }

    #[test]
    fn verify_saddle_flags_degenerate_certificates() {
        let s = solve(&MeanVector::pair(1.0, 0.8).unwrap()).unwrap();
        let report = verify_saddle(&s, &GridSpec::new(21), 50_000, SamplerState::new(2)).unwrap();
        assert!(report.degenerate_certificate);
        assert!(report.certificate.is_none());
        // the LP and MC legs still certify the guarantee
        assert!(report.passes.lp, "{}", report.summary());
        assert!(report.passes.mc, "{}", report.summary());
    }
}
