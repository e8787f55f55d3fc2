//! Solvers mapping mean vectors to worst-case family shape parameters.
//!
//! Each problem class reduces to a small set of scalar equations matching
//! the agents' means under the candidate worst-case family:
//!
//! - the symmetric regimes and the one-sided regimes (area IV, excludable,
//!   `N`-agent, deterministic) have closed forms, mostly through the
//!   secondary real branch of the Lambert W function; their residuals are
//!   gated at [`RESIDUAL_TOL_CLOSED`];
//! - areas I–III require a nested solve: an inner bracketed root matching
//!   one agent's mean at fixed second parameter, and an outer scan over
//!   the second parameter that starts from the end touching the adjacent
//!   regime and refines the first sign change it meets. Residuals are
//!   gated at [`RESIDUAL_TOL_NESTED`].
//!
//! The outer scan convention matters only if the outer equation ever had
//! several roots: the first crossing measured from the diagonal end (areas
//! I and II) or from the boundary-I end (area III) is the one continuous
//! with the adjacent regime. The scan records an event on the returned
//! [`SolvedParams`] if it sees more than one crossing, so the convention
//! is observable rather than silent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interim::{diag_high, diag_low, mean1_cross, mean1_high, mean1_low, mean2_cross,
                     mean2_high, mean2_low};
use crate::numerics::{lambert_w_minus1, solve_monotone, Bracket};
use crate::regions::{classify, BoundaryTag, CaseLabel, CaseTag, MeanVector};

/// Mean pairs closer to the diagonal than this are solved as symmetric
/// instances at the average mean; the symmetric and asymmetric solutions
/// agree to far better than solver tolerance in that band.
pub const NEAR_DIAGONAL_TOL: f64 = 1e-6;

/// Residual gate for closed-form solvers.
pub const RESIDUAL_TOL_CLOSED: f64 = 1e-12;

/// Residual gate for nested (scan + refine) solvers.
pub const RESIDUAL_TOL_NESTED: f64 = 1e-9;

/// Smaller-mean threshold above which the optimal deterministic mechanism
/// uses a two-agent linear cutoff rather than a single-agent posted price:
/// `2 (√2 - 1)`.
pub const DETERMINISTIC_SPLIT: f64 = 0.82842712474619009760;

/// Means within this distance of 1 are treated as exactly 1, where several
/// closed forms hit a square-root-conditioned Lambert W branch point.
const TOP_SNAP: f64 = 1e-12;

/// Shape parameters of a solved instance, tagged by regime.
///
/// Parameter meanings match the family definitions used throughout the
/// crate; every variant determines the mechanism, the worst-case joint
/// distribution, the revenue guarantee, and the dual certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case")]
pub enum CaseParams {
    /// Symmetric low-mean regime: support threshold `r1` on the value sum
    /// and provision slope `a = 1/(1 - 2 ln r1)`.
    #[serde(rename = "SYM_I")]
    SymLow { r1: f64, a: f64 },
    /// Symmetric high-mean regime: support threshold `1 + r2` on the value
    /// sum.
    #[serde(rename = "SYM_II")]
    SymHigh { r2: f64 },
    /// Area I: low family shapes `s1 > s2` roles as solved (agent 1 is the
    /// larger-mean agent), provision scale `c`.
    #[serde(rename = "AREA_I")]
    Area1 { s1: f64, s2: f64, c: f64 },
    /// Area II: high family edge entry points `t1 > t2`.
    #[serde(rename = "AREA_II")]
    Area2 { t1: f64, t2: f64 },
    /// Area III: cross family shapes `u1 > u2`, provision scale `d`.
    #[serde(rename = "AREA_III")]
    Area3 { u1: f64, u2: f64, d: f64 },
    /// Area IV: agent-1 threshold `w1` and agent-2 box cap `w2`.
    #[serde(rename = "AREA_IV")]
    Area4 { w1: f64, w2: f64 },
    /// Symmetric `n`-agent regime: sum-threshold offset `r` (support is
    /// `Σv ≥ n - 1 + r`).
    #[serde(rename = "N_AGENT")]
    NAgent { n: usize, r: f64 },
    /// Excludable good: per-agent price-like thresholds `γ_i`.
    #[serde(rename = "EXCLUDABLE")]
    Excludable { gamma: Vec<f64> },
    /// Deterministic two-agent provision. With `dictator = false` the good
    /// is provided strictly above the line `(1-d2) v1 + (1-d1) v2 =
    /// 1 - d1 d2`; with `dictator = true` it is provided iff agent 1's
    /// value strictly exceeds `d1` (`d2` is recorded as 1 and unused).
    #[serde(rename = "DETERMINISTIC")]
    Deterministic { d1: f64, d2: f64, dictator: bool },
}

impl CaseParams {
    /// The revenue guarantee (zero-sum game value) of the solved instance.
    pub fn guarantee(&self) -> f64 {
        match *self {
            CaseParams::SymLow { r1, .. } => r1 / 2.0,
            CaseParams::SymHigh { r2 } => (1.0 + r2) * (1.0 + r2) / 2.0,
            CaseParams::Area1 { s1, s2, .. } => s1 * s2 / (s1 + s2),
            CaseParams::Area2 { t1, t2 } => (1.0 + t1) * (1.0 + t2) / 2.0,
            CaseParams::Area3 { u1, u2, .. } => u1 * (u2 + 1.0) / (u1 + 1.0),
            CaseParams::Area4 { w1, .. } => w1,
            CaseParams::NAgent { n, r } => {
                let nf = n as f64;
                nf * ((r + nf - 1.0) / nf).powi(n as i32)
            }
            CaseParams::Excludable { ref gamma } => gamma.iter().sum(),
            CaseParams::Deterministic { d1, d2, dictator } => {
                if dictator {
                    d1 * d1
                } else {
                    (d1 + d2) * (d1 + d2) / 2.0
                }
            }
        }
    }

    /// The two-agent regime tag, for the randomized two-agent variants.
    pub fn case_tag(&self) -> Option<CaseTag> {
        match self {
            CaseParams::SymLow { .. } => Some(CaseTag::SymI),
            CaseParams::SymHigh { .. } => Some(CaseTag::SymII),
            CaseParams::Area1 { .. } => Some(CaseTag::AreaI),
            CaseParams::Area2 { .. } => Some(CaseTag::AreaII),
            CaseParams::Area3 { .. } => Some(CaseTag::AreaIII),
            CaseParams::Area4 { .. } => Some(CaseTag::AreaIV),
            _ => None,
        }
    }
}

/// A solved instance: means, the relabelling applied before solving, the
/// regime label (for classified two-agent instances), shape parameters,
/// and solver diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolvedParams {
    /// Means in the caller's agent order.
    pub means: MeanVector,
    /// `permutation[k]` is the caller index of the agent at solver rank
    /// `k`; two-agent solvers rank the larger-mean agent first.
    pub permutation: Vec<usize>,
    /// Regime label from classification (randomized two-agent solves
    /// routed through [`solve`]; `None` for direct family solvers).
    pub label: Option<CaseLabel>,
    /// Shape parameters, in solver agent order.
    pub params: CaseParams,
    /// Largest absolute residual of the defining mean equations.
    pub residual: f64,
    /// True when the instance sits at a family edge needing special-cased
    /// mechanism formulas (top mean 1, unit thresholds, and similar).
    pub degenerate: bool,
    /// Human-readable solver diagnostics (multiple scan crossings,
    /// near-diagonal rerouting, boundary snaps).
    pub events: Vec<String>,
}

impl SolvedParams {
    /// Means permuted into solver order (descending for two-agent solves).
    pub fn solver_means(&self) -> Vec<f64> {
        self.permutation
            .iter()
            .map(|&i| self.means.as_slice()[i])
            .collect()
    }

    /// The revenue guarantee of the solved instance.
    pub fn guarantee(&self) -> f64 {
        self.params.guarantee()
    }

    fn gate_residual(self, tol: f64) -> Result<Self> {
        if self.residual.is_finite() && self.residual <= tol {
            Ok(self)
        } else {
            Err(Error::NonConvergence(format!(
                "solver residual {:e} exceeds the {:e} gate",
                self.residual, tol
            )))
        }
    }
}

fn identity_params(
    means: MeanVector,
    params: CaseParams,
    residual: f64,
    degenerate: bool,
    events: Vec<String>,
) -> SolvedParams {
    let n = means.len();
    SolvedParams {
        means,
        permutation: (0..n).collect(),
        label: None,
        params,
        residual,
        degenerate,
        events,
    }
}

// ---- closed-form scalar pieces -------------------------------------------

/// Threshold of the symmetric low-mean family: solves
/// `diag_low(r) = -r ln(r)/2 + 3r/4 = m` via Lambert W.
fn r1_of(m: f64) -> Result<f64> {
    let w = lambert_w_minus1(-2.0 * m * (-1.5f64).exp())?;
    Ok((w + 1.5).exp())
}

/// Area IV / excludable threshold: solves `w (1 - ln w) = m` via Lambert W.
fn threshold_of_mean(m: f64) -> Result<f64> {
    if m >= 1.0 - TOP_SNAP {
        return Ok(1.0); // branch point; the root is exactly 1 at m = 1
    }
    let w = lambert_w_minus1(-m / std::f64::consts::E)?;
    Ok((w + 1.0).exp())
}

// ---- symmetric solvers ----------------------------------------------------

/// Solves the symmetric low-mean regime for common mean `m ∈ (0, 3/4)`.
pub fn solve_sym_low(m: f64) -> Result<SolvedParams> {
    if !(m > 0.0 && m < 0.75) {
        return Err(Error::Domain(format!(
            "symmetric low regime needs a common mean in (0, 3/4), got {m}"
        )));
    }
    let r1 = r1_of(m)?;
    let a = 1.0 / (1.0 - 2.0 * r1.ln());
    let residual = (diag_low(r1) - m).abs();
    let means = MeanVector::pair(m, m)?;
    identity_params(means, CaseParams::SymLow { r1, a }, residual, false, vec![])
        .gate_residual(RESIDUAL_TOL_CLOSED)
}

/// Solves the symmetric high-mean regime for common mean `m ∈ [3/4, 1]`.
pub fn solve_sym_high(m: f64) -> Result<SolvedParams> {
    if !(0.75..=1.0).contains(&m) {
        return Err(Error::Domain(format!(
            "symmetric high regime needs a common mean in [3/4, 1], got {m}"
        )));
    }
    let r2 = 1.0 - 2.0 * (1.0 - m).sqrt();
    let residual = (diag_high(r2) - m).abs();
    let degenerate = r2 >= 1.0 - TOP_SNAP;
    let means = MeanVector::pair(m, m)?;
    identity_params(means, CaseParams::SymHigh { r2 }, residual, degenerate, vec![])
        .gate_residual(RESIDUAL_TOL_CLOSED)
}

// ---- nested scan machinery -------------------------------------------------

/// Inner bracketed solve that tolerates an endpoint sitting on the root:
/// when the bracket does not straddle, returns the endpoint with the
/// smaller residual (the outer scan probes its own bracket ends, where the
/// inner root degenerates to an endpoint).
fn solve_clamped(f: impl Fn(f64) -> f64, lo: f64, hi: f64, target: f64) -> Result<f64> {
    let bracket = Bracket::new(lo, hi).with_tolerances(1e-14, 1e-14);
    match solve_monotone(&f, &bracket, target) {
        Ok(x) => Ok(x),
        Err(Error::Bracket(_)) => {
            let (flo, fhi) = (f(lo) - target, f(hi) - target);
            Ok(if flo.abs() <= fhi.abs() { lo } else { hi })
        }
        Err(e) => Err(e),
    }
}

/// Grid fractions for the outer scans: geometric spacing near the starting
/// end (where the family degenerates onto the adjacent regime), then
/// uniform.
fn scan_fractions() -> Vec<f64> {
    let mut f = vec![0.0, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3];
    for k in 1..=128 {
        f.push(k as f64 / 128.0 * 0.99 + 0.01);
    }
    f
}

struct Crossing {
    lo: f64,
    hi: f64,
    total: usize,
}

/// Walks `g` from `a` towards `b` on the scan grid and returns the first
/// sign change, along with how many sign changes the whole grid contains.
fn scan_first_crossing(g: impl Fn(f64) -> Result<f64>, a: f64, b: f64) -> Result<Option<Crossing>> {
    let mut first: Option<(f64, f64)> = None;
    let mut total = 0usize;
    let mut prev: Option<(f64, f64)> = None;
    for f in scan_fractions() {
        let x = a + (b - a) * f;
        let gx = g(x)?;
        if !gx.is_finite() {
            return Err(Error::NonConvergence(format!(
                "family mean evaluation returned {gx} at scan point {x}"
            )));
        }
        if let Some((px, pg)) = prev {
            if (pg < 0.0) != (gx < 0.0) && pg != 0.0 {
                total += 1;
                if first.is_none() {
                    first = Some((px, x));
                }
            }
        }
        prev = Some((x, gx));
    }
    Ok(first.map(|(lo, hi)| Crossing { lo, hi, total }))
}

/// Refines a scan crossing to a root of `g`, treating inner-solve failures
/// as non-finite samples.
fn refine_crossing(g: impl Fn(f64) -> Result<f64>, c: &Crossing) -> Result<f64> {
    let bracket = Bracket::new(c.lo.min(c.hi), c.lo.max(c.hi)).with_tolerances(1e-14, 1e-14);
    solve_monotone(|x| g(x).unwrap_or(f64::NAN), &bracket, 0.0)
}

fn crossing_events(label: &str, c: &Crossing) -> Vec<String> {
    if c.total > 1 {
        vec![format!(
            "outer scan for {label} met {} sign changes; refined the first from the adjacent-regime end",
            c.total
        )]
    } else {
        vec![]
    }
}

// ---- area solvers -----------------------------------------------------------

/// Solves area I (asymmetric low means) for `3/4 > m1 > m2 > 0`.
///
/// Inner equation: agent 1's mean under the low family at fixed `s2`;
/// outer scan over `s2` from the diagonal contact `s2*(m1)` towards 1.
pub fn solve_area1(m1: f64, m2: f64) -> Result<SolvedParams> {
    if !(m1 > 0.0 && m1 < 0.75 && m2 > 0.0 && m2 < m1) {
        return Err(Error::Domain(format!(
            "area I needs 3/4 > m1 > m2 > 0, got ({m1}, {m2})"
        )));
    }
    let s2_start = r1_of(m1)?;
    let inner = |s2: f64| solve_clamped(|s1| mean1_low(s1, s2), 1e-300, s2, m1);
    let outer = |s2: f64| -> Result<f64> { Ok(mean2_low(inner(s2)?, s2) - m2) };
    let crossing = scan_first_crossing(outer, s2_start, 1.0)?.ok_or_else(|| {
        Error::NoSolution(format!(
            "no low-family shape matches means ({m1}, {m2}); the pair lies outside area I"
        ))
    })?;
    let s2 = refine_crossing(outer, &crossing)?;
    let s1 = inner(s2)?;
    let c = area1_scale(s1, s2);
    let residual = (mean1_low(s1, s2) - m1).abs().max((mean2_low(s1, s2) - m2).abs());
    let events = crossing_events("area I", &crossing);
    let means = MeanVector::pair(m1, m2)?;
    identity_params(means, CaseParams::Area1 { s1, s2, c }, residual, false, events)
        .gate_residual(RESIDUAL_TOL_NESTED)
}

/// Provision scale of the area-I mechanism:
/// `c = 1 / (1 - [(1 - s2/s1) ln s1 - (1 - s1/s2) ln s2] / ln(s1/s2))`,
/// evaluated through difference forms that stay accurate near the
/// diagonal, where it tends to `1/(1 - 2 ln s)`.
fn area1_scale(s1: f64, s2: f64) -> f64 {
    let eps = s2 - s1;
    if eps == 0.0 {
        return 1.0 / (1.0 - (s1.ln() + s2.ln()));
    }
    let l = crate::numerics::ln_ratio(s1, s2);
    let n = -eps * (s1.ln() / s1 + s2.ln() / s2);
    1.0 / (1.0 - n / l)
}

/// Solves area II (asymmetric high means) for `m1 > 3/4`, `m2 < m1`.
///
/// Inner equation: agent 1's mean under the high family at fixed `t2`;
/// outer scan over `t2` from the diagonal contact `t2*(m1)` towards 0. At
/// `m1 = 1` the family degenerates to `t1 = 1` and `t2` solves a single
/// scalar equation.
pub fn solve_area2(m1: f64, m2: f64) -> Result<SolvedParams> {
    if !(m1 > 0.75 && m1 <= 1.0 && m2 > 0.0 && m2 < m1) {
        return Err(Error::Domain(format!(
            "area II needs m1 in (3/4, 1] and 0 < m2 < m1, got ({m1}, {m2})"
        )));
    }
    let means = MeanVector::pair(m1, m2)?;
    if m1 >= 1.0 - TOP_SNAP {
        // agent 1's value is 1 almost surely; t2 solves
        // (1+t) ln(2/(1+t)) + t = m2, increasing from ln 2 to 1 on [0, 1]
        let ln2 = std::f64::consts::LN_2;
        if m2 < ln2 {
            return Err(Error::NoSolution(format!(
                "at m1 = 1, area II requires m2 ≥ ln 2 ≈ {ln2:.6}, got {m2}"
            )));
        }
        let f = |t: f64| (1.0 + t) * ((2.0 / (1.0 + t)).ln()) + t;
        let bracket = Bracket::new(0.0, 1.0).with_tolerances(1e-15, 1e-15);
        let t2 = solve_monotone(f, &bracket, m2)?;
        let residual = (f(t2) - m2).abs();
        let events = vec!["m1 = 1: degenerate area II with t1 = 1".to_string()];
        return identity_params(
            means,
            CaseParams::Area2 { t1: 1.0, t2 },
            residual,
            true,
            events,
        )
        .gate_residual(RESIDUAL_TOL_NESTED);
    }
    let t2_start = 1.0 - 2.0 * (1.0 - m1).sqrt();
    let inner = |t2: f64| solve_clamped(|t1| mean1_high(t1, t2), t2, 1.0, m1);
    let outer = |t2: f64| -> Result<f64> { Ok(mean2_high(inner(t2)?, t2) - m2) };
    let crossing = scan_first_crossing(outer, t2_start, 0.0)?.ok_or_else(|| {
        Error::NoSolution(format!(
            "no high-family shape matches means ({m1}, {m2}); the pair lies outside area II"
        ))
    })?;
    let t2 = refine_crossing(outer, &crossing)?;
    let t1 = inner(t2)?;
    let residual = (mean1_high(t1, t2) - m1).abs().max((mean2_high(t1, t2) - m2).abs());
    let events = crossing_events("area II", &crossing);
    identity_params(means, CaseParams::Area2 { t1, t2 }, residual, false, events)
        .gate_residual(RESIDUAL_TOL_NESTED)
}

/// Solves area III (intermediate asymmetry) for `0 < m2 < 3/4`, `m2 < m1 ≤ 1`.
///
/// Inner equation: agent 2's mean under the cross family at fixed `u1`
/// (decreasing in `u2`); outer scan over `u1` from the boundary-I contact
/// `u1**(m2)` towards the boundary-III contact `u1*(m2)` (or 1).
pub fn solve_area3(m1: f64, m2: f64) -> Result<SolvedParams> {
    if !(m2 > 0.0 && m2 < 0.75 && m2 < m1 && m1 <= 1.0) {
        return Err(Error::Domain(format!(
            "area III needs 0 < m2 < min(m1, 3/4) and m1 ≤ 1, got ({m1}, {m2})"
        )));
    }
    let ln2 = std::f64::consts::LN_2;
    let unit = Bracket::new(0.0, 1.0).with_tolerances(1e-15, 1e-15);
    // z-style cross-family edges: u2 = 0 is boundary I, u2 = u1 is boundary III
    let edge_bi = |u: f64| if u == 0.0 { 0.0 } else { mean2_cross(u, 0.0) };
    let edge_biii = |u: f64| if u == 0.0 { 0.0 } else { u * (u.ln_1p() - u.ln()) };
    let u1_start = solve_monotone(edge_bi, &unit, m2)?;
    let u1_end = if m2 < ln2 {
        solve_monotone(edge_biii, &unit, m2)?
    } else {
        1.0
    };
    let inner = |u1: f64| solve_clamped(|u2| mean2_cross(u1, u2), 0.0, u1, m2);
    let outer = |u1: f64| -> Result<f64> { Ok(mean1_cross(u1, inner(u1)?) - m1) };
    let crossing = scan_first_crossing(outer, u1_start, u1_end)?.ok_or_else(|| {
        Error::NoSolution(format!(
            "no cross-family shape matches means ({m1}, {m2}); the pair lies outside area III"
        ))
    })?;
    let u1 = refine_crossing(outer, &crossing)?;
    let u2 = inner(u1)?;
    let d = area3_scale(u1, u2);
    let residual = (mean1_cross(u1, u2) - m1).abs().max((mean2_cross(u1, u2) - m2).abs());
    let events = crossing_events("area III", &crossing);
    let means = MeanVector::pair(m1, m2)?;
    identity_params(means, CaseParams::Area3 { u1, u2, d }, residual, false, events)
        .gate_residual(RESIDUAL_TOL_NESTED)
}

/// Provision scale of the area-III mechanism:
/// `d = ln(u1/(1+u2)) / (ln(u1)/(u1-u2) - ln(1+u2))`, tending to 1 at the
/// pinch corner `u1 → 1, u2 → 0`.
fn area3_scale(u1: f64, u2: f64) -> f64 {
    let ln_u1 = if u1 > 0.5 { (u1 - 1.0).ln_1p() } else { u1.ln() };
    let l3 = ln_u1 - u2.ln_1p();
    l3 / (ln_u1 / (u1 - u2) - u2.ln_1p())
}

/// Solves area IV (extreme asymmetry) for `0 < m1 ≤ 1`, `0 ≤ m2` below the
/// regime boundary; closed form.
pub fn solve_area4(m1: f64, m2: f64) -> Result<SolvedParams> {
    if !(m1 > 0.0 && m1 <= 1.0 && (0.0..1.0).contains(&m2) && m2 < m1) {
        return Err(Error::Domain(format!(
            "area IV needs 0 < m1 ≤ 1 and 0 ≤ m2 < m1, got ({m1}, {m2})"
        )));
    }
    let w1 = threshold_of_mean(m1)?;
    // m2 = w1 ln((w1 + w2)/w1), so w2 = w1 (e^{m2/w1} - 1)
    let w2 = if m2 == 0.0 { 0.0 } else { w1 * (m2 / w1).exp_m1() };
    if w2 > 1.0 + 1e-9 {
        return Err(Error::NoSolution(format!(
            "means ({m1}, {m2}) lie above the area IV boundary (required box cap w2 = {w2:.6} > 1)"
        )));
    }
    let w2 = w2.min(1.0);
    let degenerate = w1 >= 1.0 - TOP_SNAP;
    let r1 = (w1 * (1.0 - w1.ln()) - m1).abs();
    let r2 = (w1 * (w2 / w1).ln_1p() - m2).abs();
    let means = MeanVector::pair(m1, m2)?;
    identity_params(
        means,
        CaseParams::Area4 { w1, w2 },
        r1.max(r2),
        degenerate,
        vec![],
    )
    .gate_residual(RESIDUAL_TOL_CLOSED)
}

// ---- n-agent, excludable, deterministic -------------------------------------

/// Largest agent count accepted by [`solve_nagent`]; keeps the integer
/// exponents of the closed forms inside `i32` with a wide margin.
pub const MAX_AGENTS: usize = 4096;

/// Common mean of the symmetric `n`-agent worst-case family with sum
/// threshold `n - 1 + r`, written in overflow-free ratio form.
fn nagent_mean(n: usize, r: f64) -> f64 {
    let nf = n as f64;
    let base = r + nf - 1.0;
    base / (nf - 1.0) * (1.0 - (base / nf).powi(n as i32 - 1) / nf)
}

/// Smallest common mean the symmetric `n`-agent family can match
/// (`r = 0`): `1 - (n-1)^{n-1}/n^n`.
pub fn nagent_mean_floor(n: usize) -> f64 {
    let nf = n as f64;
    1.0 - ((nf - 1.0) / nf).powi(n as i32 - 1) / nf
}

/// Solves the symmetric `n`-agent regime (`n ≥ 2`) for common mean `m`.
pub fn solve_nagent(n: usize, m: f64) -> Result<SolvedParams> {
    if !(2..=MAX_AGENTS).contains(&n) {
        return Err(Error::Domain(format!(
            "n-agent regime needs 2 ≤ n ≤ {MAX_AGENTS}, got {n}"
        )));
    }
    if !(m > 0.0 && m <= 1.0) {
        return Err(Error::Domain(format!(
            "n-agent regime needs a common mean in (0, 1], got {m}"
        )));
    }
    let floor = nagent_mean_floor(n);
    if m < floor - 1e-12 {
        return Err(Error::NoSolution(format!(
            "the {n}-agent family covers common means in [{floor:.12}, 1]; {m} is below the floor"
        )));
    }
    let (r, degenerate) = if m >= 1.0 - TOP_SNAP {
        (1.0, true)
    } else if m <= floor {
        (0.0, false)
    } else {
        let bracket = Bracket::new(0.0, 1.0).with_tolerances(1e-15, 1e-15);
        (solve_monotone(|r| nagent_mean(n, r), &bracket, m)?, false)
    };
    let residual = (nagent_mean(n, r) - m).abs();
    let means = MeanVector::new(vec![m; n])?;
    identity_params(means, CaseParams::NAgent { n, r }, residual, degenerate, vec![])
        .gate_residual(RESIDUAL_TOL_NESTED)
}

/// Solves the excludable-good problem: independent per-agent thresholds
/// `γ_i` with `γ (1 - ln γ) = m_i`, any number of agents, every mean
/// positive.
pub fn solve_excludable(means: &MeanVector) -> Result<SolvedParams> {
    let mut gamma = Vec::with_capacity(means.len());
    let mut residual = 0.0f64;
    let mut degenerate = false;
    for (i, &m) in means.as_slice().iter().enumerate() {
        if m <= 0.0 {
            return Err(Error::Domain(format!(
                "excludable thresholds are undefined at zero mean (agent {})",
                i + 1
            )));
        }
        let g = threshold_of_mean(m)?;
        degenerate |= g >= 1.0 - TOP_SNAP;
        residual = residual.max((g * (1.0 - g.ln()) - m).abs());
        gamma.push(g);
    }
    identity_params(
        means.clone(),
        CaseParams::Excludable { gamma },
        residual,
        degenerate,
        vec![],
    )
    .gate_residual(RESIDUAL_TOL_CLOSED)
}

/// Solves the two-agent deterministic problem; means are relabelled
/// descending and the permutation is recorded.
pub fn solve_deterministic(means: &MeanVector) -> Result<SolvedParams> {
    let (m1, m2, swapped) = means.ordered_two()?;
    if m1 <= 0.0 {
        return Err(Error::Domain(
            "the zero mean vector admits no deterministic mechanism with positive revenue".into(),
        ));
    }
    let permutation = if swapped { vec![1, 0] } else { vec![0, 1] };
    let (params, residual, events) = if m2 >= DETERMINISTIC_SPLIT {
        let d1 = 1.0 - (2.0 * (1.0 - m1)).sqrt();
        let d2 = 1.0 - (2.0 * (1.0 - m2)).sqrt();
        let p1 = ((1.0 - m1) / 2.0).sqrt();
        let p2 = ((1.0 - m2) / 2.0).sqrt();
        let r = (d1 * p1 + (1.0 - p1) - m1)
            .abs()
            .max((d2 * p2 + (1.0 - p2) - m2).abs());
        (
            CaseParams::Deterministic { d1, d2, dictator: false },
            r,
            vec![],
        )
    } else {
        let x = (1.0 - m1).sqrt();
        let tau = 1.0 - x;
        let r = ((tau * x + 1.0 - x) - m1).abs();
        (
            CaseParams::Deterministic { d1: tau, d2: 1.0, dictator: true },
            r,
            vec![format!(
                "smaller mean {m2} below the split {DETERMINISTIC_SPLIT:.6}: single-agent posted price"
            )],
        )
    };
    let degenerate = m1 >= 1.0 - TOP_SNAP;
    let solved = SolvedParams {
        means: means.clone(),
        permutation,
        label: None,
        params,
        residual,
        degenerate,
        events,
    };
    solved.gate_residual(RESIDUAL_TOL_CLOSED)
}

// ---- classified dispatcher ---------------------------------------------------

/// Classifies a two-agent mean vector and solves it with the regime's
/// family, relabelling agents so the larger mean comes first and recording
/// the permutation.
///
/// Pairs within [`NEAR_DIAGONAL_TOL`] of the diagonal are solved as
/// symmetric instances at the average mean (the asymmetric families
/// continue smoothly into the diagonal, so this changes parameters by far
/// less than solver tolerance) and the rerouting is recorded as an event.
pub fn solve(means: &MeanVector) -> Result<SolvedParams> {
    let (m1, m2, swapped) = means.ordered_two()?;
    let permutation: Vec<usize> = if swapped { vec![1, 0] } else { vec![0, 1] };
    if m1 <= 0.0 {
        return Err(Error::Domain(
            "the zero mean vector admits no mechanism with positive revenue".into(),
        ));
    }
    if m1 - m2 <= NEAR_DIAGONAL_TOL {
        let mbar = 0.5 * (m1 + m2);
        let mut solved = if mbar < 0.75 {
            solve_sym_low(mbar)?
        } else {
            solve_sym_high(mbar)?
        };
        if m1 != m2 {
            solved.events.push(format!(
                "means within {NEAR_DIAGONAL_TOL:e} of the diagonal; solved as symmetric at the average mean {mbar}"
            ));
        }
        let case = solved.params.case_tag().expect("symmetric params carry a tag");
        let boundary = ((mbar - 0.75).abs() <= crate::regions::CLASSIFY_EPS)
            .then_some(BoundaryTag::SymSplit);
        solved.means = means.clone();
        solved.permutation = permutation;
        solved.label = Some(CaseLabel { case, boundary });
        return Ok(solved);
    }
    let label = classify(means)?;
    let mut solved = match label.case {
        CaseTag::AreaI => solve_area1(m1, m2)?,
        CaseTag::AreaII => solve_area2(m1, m2)?,
        CaseTag::AreaIII => solve_area3(m1, m2)?,
        CaseTag::AreaIV => solve_area4(m1, m2)?,
        CaseTag::SymI | CaseTag::SymII => {
            unreachable!("diagonal pairs are rerouted before classification")
        }
    };
    if let Some(b) = label.boundary {
        solved.events.push(format!("means lie on {b} up to the snap tolerance"));
    }
    solved.means = means.clone();
    solved.permutation = permutation;
    solved.label = Some(label);
    Ok(solved)
}
