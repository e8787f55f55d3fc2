//! Robust (maxmin) provision mechanisms for a binary public good.
//!
//! A seller must decide whether to provide a non-excludable public good to
//! `N` agents with private values `v_i ∈ [0, 1]`, charging payments that
//! cover nothing but what the mechanism itself collects. The designer knows
//! only the mean `m_i` of each agent's value distribution and evaluates a
//! mechanism by its worst-case expected revenue over **all** joint
//! distributions consistent with those means (arbitrary correlation
//! allowed). This crate computes, for every mean vector:
//!
//! - the optimal dominant-strategy incentive-compatible, ex-post
//!   individually rational provision rule and its envelope payments,
//! - the revenue guarantee (the value of the induced zero-sum game between
//!   the designer and an adversarial "nature" choosing the distribution),
//! - the worst-case joint distribution itself, in closed form, with exact
//!   sampling,
//! - a linear-programming dual certificate `(λ, μ)` proving the guarantee,
//!   plus a battery of numerical saddle-point checks.
//!
//! # Problem classes
//!
//! | class | constructor | description |
//! |-------|-------------|-------------|
//! | two-agent randomized | [`solve`] | six regimes: a symmetric low/high pair and four asymmetric areas |
//! | `N`-agent symmetric | [`solve_nagent`] | equal means, `N ≥ 2` |
//! | excludable good | [`solve_excludable`] | per-agent posted-price-like rules, any `N` |
//! | two-agent deterministic | [`solve_deterministic`] | provision probability restricted to {0, 1} |
//!
//! The two-agent randomized problem partitions the mean square
//! `{(m1, m2) : 1 ≥ m1 ≥ m2 > 0}` into six regimes separated by three
//! analytic boundary curves; [`classify`] decides membership and
//! [`boundary_i`]/[`boundary_ii`]/[`boundary_iii`] evaluate the curves.
//!
//! # Verification
//!
//! Every solved instance can be re-checked numerically: dual feasibility of
//! the certificate on a dense grid, complementary slackness on the support
//! of the worst-case distribution, an independent finite-LP lower bound for
//! nature's problem, Monte-Carlo revenue under the worst-case distribution,
//! and a deviation audit of incentive compatibility and individual
//! rationality. See the `verify` module.
//!
//! # Numerical conventions
//!
//! All scalar work is `f64`. Transcendental solves (Lambert-W branches,
//! monotone root finding, adaptive quadrature) live in [`numerics`] with
//! explicitly named tolerances; solver residuals are checked against
//! `1e-9` or tighter before a result is returned.

pub mod distributions;
pub mod error;
pub mod mechanisms;
mod interim;
pub mod nagent;
pub mod numerics;
pub mod params;
pub mod regions;
pub mod verify;

pub use distributions::{Component, SamplerState, WorstCaseDistribution};
pub use verify::{
    audit_incentives, check_feasibility, check_slackness, mc_revenue, mc_study, nature_lp,
    verify_saddle, DualCertificate, GridSpec, IncentiveAudit, LpSolution, McStudy,
    VerificationReport,
};
pub use error::{Error, Result};
pub use mechanisms::Mechanism;
pub use params::{
    solve, solve_area1, solve_area2, solve_area3, solve_area4, solve_deterministic,
    solve_excludable, solve_nagent, solve_sym_high, solve_sym_low, CaseParams, SolvedParams,
};
pub use regions::{
    boundary_i, boundary_ii, boundary_iii, classify, classify_with_eps, BoundaryTag, CaseLabel,
    CaseTag, MeanVector, CLASSIFY_EPS,
};
