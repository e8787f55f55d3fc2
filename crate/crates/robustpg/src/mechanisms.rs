//! Provision rules, envelope payments, and revenue for solved instances.
//!
//! A mechanism maps a reported value profile `v ∈ [0,1]^n` to a provision
//! probability (or per-agent inclusion probabilities for the excludable
//! good) and payments. Payments follow the envelope formula pinned down by
//! incentive compatibility with zero rent at the bottom:
//!
//! ```text
//! t_i(v) = v_i q(v) - ∫_0^{v_i} q(s, v_-i) ds
//! ```
//!
//! All integrals here are evaluated in closed form (the provision rules
//! are piecewise combinations of linear and logarithmic terms); the
//! verification layer re-derives payments by adaptive quadrature as an
//! independent cross-check.
//!
//! Every provision rule vanishes outside a half-plane (or box) support
//! region, rises to 1 at the top profile, and is nondecreasing in each
//! coordinate; the guarantee equals the worst-case expected revenue.
//!
//! Near-diagonal parameter pairs make several closed forms ratios of two
//! small logarithms. Those are evaluated through [`ln_ratio`] and the
//! second-order-accurate primitive `∫ ln(1 + a τ / b) dτ`, so provision
//! probabilities and payments stay accurate as the asymmetric families
//! approach their symmetric limits.

use crate::error::{Error, Result};
use crate::numerics::ln_ratio;
use crate::params::{CaseParams, SolvedParams};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

/// Means within this distance of 1 mark degenerate thresholds, matching
/// the solver's snapping rule.
const TOP_EPS: f64 = 1e-12;

/// Provision-rule family of a constructed mechanism.
///
/// Randomized rules cover the two-agent piecewise-logarithmic cases; the
/// deterministic kinds are the 0/1 members of the optimal family (the
/// half-plane rule, the two-posted-prices rule, and the single-agent
/// dictatorship); excludable and n-agent rules carry their own tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MechanismKind {
    #[serde(rename = "RANDOMIZED")]
    Randomized,
    #[serde(rename = "DETERMINISTIC_LINEAR")]
    DeterministicLinear,
    #[serde(rename = "DETERMINISTIC_POSTED")]
    DeterministicPosted,
    #[serde(rename = "DETERMINISTIC_DICTATOR")]
    DeterministicDictator,
    #[serde(rename = "EXCLUDABLE")]
    Excludable,
    #[serde(rename = "N_AGENT")]
    NAgent,
}

/// A solved mechanism: the solved instance (shape parameters plus the
/// relabelling between the caller's agent order and the solver's) and the
/// provision-rule kind.
#[derive(Debug, Clone, PartialEq)]
pub struct Mechanism {
    solved: SolvedParams,
    kind: MechanismKind,
}

impl Mechanism {
    /// Builds the mechanism of a solved instance, preserving the caller's
    /// agent order. Non-dictator deterministic instances default to the
    /// half-plane (linear) rule; see [`Mechanism::into_posted`].
    pub fn from_solved(solved: &SolvedParams) -> Self {
        let kind = match &solved.params {
            CaseParams::NAgent { .. } => MechanismKind::NAgent,
            CaseParams::Excludable { .. } => MechanismKind::Excludable,
            CaseParams::Deterministic { dictator: true, .. } => {
                MechanismKind::DeterministicDictator
            }
            CaseParams::Deterministic { .. } => MechanismKind::DeterministicLinear,
            _ => MechanismKind::Randomized,
        };
        Mechanism {
            solved: solved.clone(),
            kind,
        }
    }

    /// Switches a linear deterministic mechanism to the two-posted-prices
    /// member of the optimal family (provide iff both values clear their
    /// thresholds).
    ///
    /// # Errors
    ///
    /// [`Error::Domain`] unless the instance is deterministic non-dictator.
    pub fn into_posted(mut self) -> Result<Self> {
        if self.kind != MechanismKind::DeterministicLinear {
            return Err(Error::Domain(
                "posted-price variant exists only for non-dictator deterministic instances"
                    .into(),
            ));
        }
        self.kind = MechanismKind::DeterministicPosted;
        Ok(self)
    }

    /// The shape parameters backing this mechanism.
    pub fn params(&self) -> &CaseParams {
        &self.solved.params
    }

    /// The solved instance this mechanism was built from.
    pub fn solved(&self) -> &SolvedParams {
        &self.solved
    }

    /// Provision-rule kind.
    pub fn kind(&self) -> MechanismKind {
        self.kind
    }

    /// Number of agents.
    pub fn n_agents(&self) -> usize {
        self.solved.permutation.len()
    }

    /// The revenue guarantee of the instance.
    pub fn guarantee(&self) -> f64 {
        self.solved.params.guarantee()
    }

    fn to_solver_order(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.n_agents() {
            return Err(Error::Dimension {
                expected: self.n_agents(),
                got: v.len(),
            });
        }
        for (i, &x) in v.iter().enumerate() {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::Domain(format!(
                    "value {x} of agent {} lies outside [0, 1]",
                    i + 1
                )));
            }
        }
        Ok(self.solved.permutation.iter().map(|&i| v[i]).collect())
    }

    fn from_solver_order(&self, t: Vec<f64>) -> Vec<f64> {
        let mut out = vec![0.0; t.len()];
        for (k, &i) in self.solved.permutation.iter().enumerate() {
            out[i] = t[k];
        }
        out
    }

    /// Provision probability of the (nonexcludable) public good at `v`.
    ///
    /// # Errors
    ///
    /// [`Error::Domain`] for excludable instances, whose allocation is
    /// per-agent; use [`Mechanism::allocation`].
    pub fn provision(&self, v: &[f64]) -> Result<f64> {
        if matches!(self.solved.params, CaseParams::Excludable { .. }) {
            return Err(Error::Domain(
                "excludable instances allocate per agent; use `allocation`".into(),
            ));
        }
        let vs = self.to_solver_order(v)?;
        Ok(self.q_solver(&vs))
    }

    /// Per-agent inclusion probabilities at `v` (all equal to the common
    /// provision probability for nonexcludable instances).
    pub fn allocation(&self, v: &[f64]) -> Result<Vec<f64>> {
        let vs = self.to_solver_order(v)?;
        let alloc = match &self.solved.params {
            CaseParams::Excludable { gamma } => vs
                .iter()
                .zip(gamma)
                .map(|(&x, &g)| threshold_log_q(x, g))
                .collect(),
            _ => vec![self.q_solver(&vs); vs.len()],
        };
        Ok(self.from_solver_order(alloc))
    }

    /// Envelope payment of a single agent at `v` (caller's agent index).
    pub fn payment(&self, v: &[f64], i: usize) -> Result<f64> {
        let t = self.payments(v)?;
        t.get(i).copied().ok_or(Error::Dimension {
            expected: self.n_agents(),
            got: i + 1,
        })
    }

    /// Envelope payments at `v`, in the caller's agent order.
    pub fn payments(&self, v: &[f64]) -> Result<Vec<f64>> {
        let vs = self.to_solver_order(v)?;
        let t = match &self.solved.params {
            CaseParams::Excludable { gamma } => vs
                .iter()
                .zip(gamma)
                .map(|(&x, &g)| x * threshold_log_q(x, g) - int_threshold_log_q(x, g))
                .collect(),
            _ => {
                let q = self.q_solver(&vs);
                (0..vs.len())
                    .map(|i| vs[i] * q - self.int_q_solver(i, &vs))
                    .collect()
            }
        };
        Ok(self.from_solver_order(t))
    }

    /// Total payment (seller revenue) at `v`.
    pub fn revenue(&self, v: &[f64]) -> Result<f64> {
        Ok(self.payments(v)?.iter().sum())
    }

    /// Provision probability in solver order (excludable handled by the
    /// per-agent rule upstream).
    fn q_solver(&self, vs: &[f64]) -> f64 {
        match self.solved.params {
            CaseParams::SymLow { r1, a } => q_sym_low(vs[0], vs[1], r1, a),
            CaseParams::SymHigh { r2 } => q_sym_high(vs[0], vs[1], r2),
            CaseParams::Area1 { s1, s2, c } => q_area1(vs[0], vs[1], s1, s2, c),
            CaseParams::Area2 { t1, t2 } => q_area2(vs[0], vs[1], t1, t2),
            CaseParams::Area3 { u1, u2, d } => q_area3(vs[0], vs[1], u1, u2, d),
            CaseParams::Area4 { w1, .. } => threshold_log_q(vs[0], w1),
            CaseParams::NAgent { n, r } => q_nagent(vs, n, r),
            CaseParams::Deterministic { d1, d2, dictator } => {
                if self.kind == MechanismKind::DeterministicPosted {
                    q_posted(vs[0], vs[1], d1, d2)
                } else {
                    q_deterministic(vs[0], vs[1], d1, d2, dictator)
                }
            }
            CaseParams::Excludable { .. } => unreachable!("routed to the per-agent rule"),
        }
    }

    /// `∫_0^{vs[i]} q(s, vs_-i) ds` in solver order.
    fn int_q_solver(&self, i: usize, vs: &[f64]) -> f64 {
        let (x, y) = (vs[i], vs[1 - i.min(1)]);
        match self.solved.params {
            CaseParams::SymLow { r1, a } => int_q_sym_low(x, y, r1, a),
            CaseParams::SymHigh { r2 } => int_q_sym_high(x, y, r2),
            CaseParams::Area1 { s1, s2, c } => {
                if i == 0 {
                    int_q_area1(x, y, s1, s2, c)
                } else {
                    int_q_area1(x, y, s2, s1, c)
                }
            }
            CaseParams::Area2 { t1, t2 } => {
                if i == 0 {
                    int_q_area2(x, y, t1, t2)
                } else {
                    int_q_area2(x, y, t2, t1)
                }
            }
            CaseParams::Area3 { u1, u2, d } => {
                if i == 0 {
                    int1_q_area3(x, y, u1, u2, d)
                } else {
                    int2_q_area3(y, x, u1, u2, d)
                }
            }
            CaseParams::Area4 { w1, .. } => {
                if i == 0 {
                    int_threshold_log_q(x, w1)
                } else {
                    x * threshold_log_q(y, w1)
                }
            }
            CaseParams::NAgent { n, r } => int_q_nagent(i, vs, n, r),
            CaseParams::Deterministic { d1, d2, dictator } => {
                if self.kind == MechanismKind::DeterministicPosted {
                    int_q_posted(i, x, y, d1, d2)
                } else {
                    int_q_deterministic(i, x, y, d1, d2, dictator)
                }
            }
            CaseParams::Excludable { .. } => unreachable!("routed to the per-agent rule"),
        }
    }
}

impl Serialize for Mechanism {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut doc = serializer.serialize_struct("Mechanism", 3)?;
        doc.serialize_field("solved", &self.solved)?;
        doc.serialize_field("kind", &self.kind)?;
        doc.serialize_field("guarantee", &self.guarantee())?;
        doc.end()
    }
}

// ---- shared primitives -------------------------------------------------------

/// `(1+z) ln(1+z) - z`, the primitive shape of `∫ ln(1 + aτ/b) dτ`;
/// evaluated by series near 0 where the direct form cancels.
fn ln1p_primitive(z: f64) -> f64 {
    if z.abs() < 1e-3 {
        z * z * (0.5 - z * (1.0 / 6.0 - z * (1.0 / 12.0 - z / 20.0)))
    } else {
        (1.0 + z) * z.ln_1p() - z
    }
}

/// `∫_0^w ln((b + a τ) / base) dτ` for a positive linear argument;
/// stable when `a·w` is tiny relative to `b` and when `b ≈ base`.
fn int_ln_linear(b: f64, a: f64, w: f64, base: f64) -> f64 {
    let ramp = if a == 0.0 {
        0.0
    } else {
        b / a * ln1p_primitive(a * w / b)
    };
    ramp + w * ln_ratio(b, base)
}

/// Single-agent threshold rule `1 - ln(x)/ln(g)` on `x ≥ g` (the area IV
/// provision and the per-agent excludable rule); `g = 1` degenerates to
/// an indicator of the top value.
fn threshold_log_q(x: f64, g: f64) -> f64 {
    if g >= 1.0 - TOP_EPS {
        return if x >= 1.0 { 1.0 } else { 0.0 };
    }
    if x < g {
        0.0
    } else {
        (1.0 - x.ln() / g.ln()).clamp(0.0, 1.0)
    }
}

/// `∫_0^x` of [`threshold_log_q`].
fn int_threshold_log_q(x: f64, g: f64) -> f64 {
    if g >= 1.0 - TOP_EPS || x <= g {
        return 0.0;
    }
    // ∫_g^x (1 - ln s / ln g) ds with ∫ ln s ds = s ln s - s
    (x - g) - (x * x.ln() - x - g * g.ln() + g) / g.ln()
}

// ---- symmetric low -----------------------------------------------------------

fn q_sym_low(x: f64, y: f64, r: f64, a: f64) -> f64 {
    if x + y < r {
        return 0.0;
    }
    match (x <= r, y <= r) {
        (true, true) => a / r * (x + y - r),
        (false, true) => a * (x / r).ln() + a / r * y,
        (true, false) => a * (y / r).ln() + a / r * x,
        (false, false) => a * (x.ln() + y.ln()) + 1.0,
    }
}

fn int_q_sym_low(x: f64, y: f64, r: f64, a: f64) -> f64 {
    // φ(s) = ∫ ln(s/r) ds = s ln(s/r) - s
    let phi = |s: f64| s * (s / r).ln() - s;
    if y <= r {
        let e = r - y;
        if x <= e {
            return 0.0;
        }
        let below = a / (2.0 * r) * (x.min(r) + y - r).powi(2);
        if x <= r {
            below
        } else {
            below + a * (phi(x) - phi(r)) + a / r * y * (x - r)
        }
    } else {
        let ramp = a * (y / r).ln();
        if x <= r {
            ramp * x + a / (2.0 * r) * x * x
        } else {
            // plateau piece up to r, then the doubly-logarithmic piece:
            // q = a ln(s/r) + a ln(r y) + 1 for s ≥ r
            ramp * r + a * r / 2.0
                + a * (phi(x) - phi(r))
                + (a * (r * y).ln() + 1.0) * (x - r)
        }
    }
}

// ---- symmetric high ----------------------------------------------------------

fn q_sym_high(x: f64, y: f64, r: f64) -> f64 {
    if r >= 1.0 - TOP_EPS {
        return if x + y >= 2.0 { 1.0 } else { 0.0 };
    }
    let s = x + y;
    if s <= 1.0 + r {
        0.0
    } else {
        ((s - 1.0 - r) / (1.0 - r)).clamp(0.0, 1.0)
    }
}

fn int_q_sym_high(x: f64, y: f64, r: f64) -> f64 {
    if r >= 1.0 - TOP_EPS {
        return 0.0;
    }
    let reach = x + y - 1.0 - r;
    if reach <= 0.0 {
        0.0
    } else {
        reach * reach / (2.0 * (1.0 - r))
    }
}

// ---- area I -------------------------------------------------------------------

/// Area I provision in the "own/other" view: `x` is the coordinate of the
/// agent with shape `sx`, `y` the other agent's with shape `sy`. The rule
/// is symmetric under swapping both values and shapes.
fn q_area1(x: f64, y: f64, sx: f64, sy: f64, c: f64) -> f64 {
    if x / sx + y / sy < 1.0 {
        return 0.0;
    }
    let l = ln_ratio(sx, sy);
    let k = (sx - sy) / sx; // slope of α(s) = sy + k s
    let kp = (sy - sx) / sy; // slope of β(s) = sx + kp s
    let alpha = sy + k * x;
    let beta = sx + kp * y;
    let q = match (x <= sx, y <= sy) {
        (true, true) => c / l * ln_ratio(alpha, beta),
        (false, true) => c * (k / l * (x / sx).ln() + ln_ratio(sx, beta) / l),
        (true, false) => c * (ln_ratio(alpha, sy) / l - kp / l * (y / sy).ln()),
        (false, false) => c * (k / l * x.ln() - kp / l * y.ln()) + 1.0,
    };
    q.clamp(0.0, 1.0)
}

/// `∫_0^x q ds` for area I in the own/other view.
fn int_q_area1(x: f64, y: f64, sx: f64, sy: f64, c: f64) -> f64 {
    let l = ln_ratio(sx, sy);
    let k = (sx - sy) / sx;
    let kp = (sy - sx) / sy;
    let phi = |s: f64, s0: f64| s * (s / s0).ln() - s; // ∫ ln(s/s0) ds
    if y <= sy {
        let e = sx * (sy - y) / sy; // support entry: α(e) = β(y)
        if x <= e {
            return 0.0;
        }
        let beta = sx + kp * y;
        let low = c / l * int_ln_linear(beta, k, x.min(sx) - e, beta);
        if x <= sx {
            low
        } else {
            low + c
                * (k / l * (phi(x, sx) - phi(sx, sx))
                    + ln_ratio(sx, beta) / l * (x - sx))
        }
    } else {
        let u = x.min(sx);
        let low = c / l * int_ln_linear(sy, k, u, sy) - c * kp / l * (y / sy).ln() * u;
        if x <= sx {
            low
        } else {
            low + c * k / l * (x * x.ln() - x - sx * sx.ln() + sx)
                + (1.0 - c * kp / l * y.ln()) * (x - sx)
        }
    }
}

// ---- area II ------------------------------------------------------------------

/// Area II provision in the own/other view (`x` with entry point `tx`,
/// `y` with `ty`); symmetric under swapping both. Degenerate `tx = 1` or
/// `ty = 1` reduces to a top-indicator times a one-dimensional rule.
fn q_area2(x: f64, y: f64, tx: f64, ty: f64) -> f64 {
    if tx >= 1.0 - TOP_EPS {
        // agent with entry 1: provision only on its top value
        if x < 1.0 {
            return 0.0;
        }
        if y <= ty {
            return 0.0;
        }
        return (ln_ratio(1.0 + y, 1.0 + ty) / ln_ratio(2.0, 1.0 + ty)).clamp(0.0, 1.0);
    }
    if ty >= 1.0 - TOP_EPS {
        return q_area2(y, x, ty, tx);
    }
    if (1.0 - ty) * x + (1.0 - tx) * y < 1.0 - tx * ty {
        return 0.0;
    }
    let l = ln_ratio(1.0 + ty, 1.0 + tx);
    let ax = (ty - tx) * x + (1.0 - tx * ty);
    let ay = (tx - ty) * y + (1.0 - tx * ty);
    // own linear argument over (1 - tx), other's over (1 - ty)
    (ln_ratio(ax / (1.0 - tx), ay / (1.0 - ty)) / l).clamp(0.0, 1.0)
}

/// `∫_0^x q ds` for area II in the own/other view.
fn int_q_area2(x: f64, y: f64, tx: f64, ty: f64) -> f64 {
    if tx >= 1.0 - TOP_EPS {
        // q = 0 for s < 1, so the integral over [0, x] vanishes
        return 0.0;
    }
    if ty >= 1.0 - TOP_EPS {
        // other agent pinned at its top: q(s, 1) is the one-dimensional
        // rule ln((1+s)/(1+tx)) / ln(2/(1+tx)) on s ≥ tx
        if y < 1.0 || x <= tx {
            return 0.0;
        }
        let l = ln_ratio(2.0, 1.0 + tx);
        return int_ln_linear(1.0 + tx, 1.0, x - tx, 1.0 + tx) / l;
    }
    let e = ((1.0 - tx * ty) - (1.0 - tx) * y) / (1.0 - ty);
    if x <= e {
        return 0.0;
    }
    let l = ln_ratio(1.0 + ty, 1.0 + tx);
    let slope = (ty - tx) / (1.0 - tx);
    let base = ((tx - ty) * y + (1.0 - tx * ty)) / (1.0 - ty); // A_other(y) = A_own(e)
    int_ln_linear(base, slope, x - e, base) / l
}

// ---- area III -----------------------------------------------------------------

/// Area III provision: agent 1 faces threshold structure at `u1`, agent 2
/// enters through the line `v1 + (u1-u2) v2 = u1`.
fn q_area3(x: f64, y: f64, u1: f64, u2: f64, d: f64) -> f64 {
    let delta = u1 - u2;
    let eta = 1.0 + u2 - u1;
    if x + delta * y < u1 {
        return 0.0;
    }
    let l3 = area3_log(u1, u2);
    let arg2 = eta * y + u1;
    let q = if x <= u1 {
        let arg1 = (u1 - eta * x) / delta;
        d / l3 * ln_ratio(arg1, arg2)
    } else {
        d / l3 * (ln_ratio(u1, arg2) - eta / delta * (x / u1).ln())
    };
    q.clamp(0.0, 1.0)
}

/// `ln(u1 / (1 + u2))` through cancellation-free logs.
fn area3_log(u1: f64, u2: f64) -> f64 {
    if u1 > 0.5 {
        (u1 - 1.0).ln_1p() - u2.ln_1p()
    } else {
        u1.ln() - u2.ln_1p()
    }
}

/// `∫_0^x q(s, y) ds` for area III.
fn int1_q_area3(x: f64, y: f64, u1: f64, u2: f64, d: f64) -> f64 {
    let delta = u1 - u2;
    let eta = 1.0 + u2 - u1;
    let l3 = area3_log(u1, u2);
    let arg2 = eta * y + u1;
    let e = (u1 - delta * y).max(0.0);
    if x <= e {
        return 0.0;
    }
    let u = x.min(u1);
    let low = if u > e {
        // α(s) = (u1 - η s)/δ starting from α(e); when the line exits
        // through the value-0 axis (e = 0), α(0) = u1/δ ≠ arg2
        let b0 = (u1 - eta * e) / delta;
        d / l3 * int_ln_linear(b0, -eta / delta, u - e, arg2)
    } else {
        0.0
    };
    if x <= u1 {
        low
    } else {
        let phi = x * (x / u1).ln() - x + u1; // ∫_{u1}^{x} ln(s/u1) ds
        low + d / l3 * (ln_ratio(u1, arg2) * (x - u1) - eta / delta * phi)
    }
}

/// `∫_0^y q(x, s) ds` for area III.
fn int2_q_area3(x: f64, y: f64, u1: f64, u2: f64, d: f64) -> f64 {
    let delta = u1 - u2;
    let eta = 1.0 + u2 - u1;
    let l3 = area3_log(u1, u2);
    if x <= u1 {
        let e = (u1 - x) / delta;
        if y <= e {
            return 0.0;
        }
        // along this ray q = (d/l3) ln(arg1(x)/arg2(s)) with arg2(e) = arg1(x)
        let b0 = eta * e + u1;
        -d / l3 * int_ln_linear(b0, eta, y - e, b0)
    } else {
        let ramp = -d / l3 * (eta / delta) * (x / u1).ln() * y;
        ramp - d / l3 * int_ln_linear(u1, eta, y, u1)
    }
}

// ---- n-agent ------------------------------------------------------------------

fn q_nagent(vs: &[f64], n: usize, r: f64) -> f64 {
    let nf = n as f64;
    let big_r = r + nf - 1.0;
    let s: f64 = vs.iter().sum();
    if r >= 1.0 - TOP_EPS {
        return if s >= nf { 1.0 } else { 0.0 };
    }
    if s < big_r {
        return 0.0;
    }
    let den = nf.powi(n as i32 - 1) - big_r.powi(n as i32 - 1);
    ((s.powi(n as i32 - 1) - big_r.powi(n as i32 - 1)) / den).clamp(0.0, 1.0)
}

fn int_q_nagent(i: usize, vs: &[f64], n: usize, r: f64) -> f64 {
    if r >= 1.0 - TOP_EPS {
        return 0.0;
    }
    let nf = n as f64;
    let big_r = r + nf - 1.0;
    let rest: f64 = vs.iter().sum::<f64>() - vs[i];
    let e = (big_r - rest).max(0.0);
    if vs[i] <= e {
        return 0.0;
    }
    let den = nf.powi(n as i32 - 1) - big_r.powi(n as i32 - 1);
    // ∫ (s + rest)^{n-1} ds = (s + rest)^n / n
    let top = (vs[i] + rest).powi(n as i32);
    let bottom = (e + rest).powi(n as i32);
    ((top - bottom) / nf - big_r.powi(n as i32 - 1) * (vs[i] - e)) / den
}

// ---- deterministic ------------------------------------------------------------

fn q_deterministic(x: f64, y: f64, d1: f64, d2: f64, dictator: bool) -> f64 {
    if dictator {
        let tau = d1;
        if x > tau || (x >= 1.0 && tau >= 1.0) {
            1.0
        } else {
            0.0
        }
    } else if d1 >= 1.0 - TOP_EPS {
        // limit of the half-plane rule as its boundary pivots onto the
        // edge v1 = 1: provision only there, above the other threshold
        if x >= 1.0 && (y > d2 || (y >= 1.0 && d2 >= 1.0 - TOP_EPS)) {
            1.0
        } else {
            0.0
        }
    } else {
        let lhs = (1.0 - d2) * x + (1.0 - d1) * y;
        if lhs > 1.0 - d1 * d2 {
            1.0
        } else {
            0.0
        }
    }
}

/// Two-posted-prices member of the deterministic family: provide iff
/// both values strictly clear their thresholds (each agent then pays its
/// own price). Degenerate thresholds confine provision to top values.
fn q_posted(x: f64, y: f64, d1: f64, d2: f64) -> f64 {
    let clears = |v: f64, d: f64| {
        if d >= 1.0 - TOP_EPS {
            v >= 1.0
        } else {
            v > d
        }
    };
    if clears(x, d1) && clears(y, d2) {
        1.0
    } else {
        0.0
    }
}

fn int_q_posted(i: usize, x: f64, y: f64, d1: f64, d2: f64) -> f64 {
    let (own_d, other_d) = if i == 0 { (d1, d2) } else { (d2, d1) };
    let other_clears = if other_d >= 1.0 - TOP_EPS {
        y >= 1.0
    } else {
        y > other_d
    };
    if !other_clears || own_d >= 1.0 - TOP_EPS {
        return 0.0;
    }
    (x - own_d).max(0.0)
}

fn int_q_deterministic(i: usize, x: f64, y: f64, d1: f64, d2: f64, dictator: bool) -> f64 {
    if dictator {
        if d1 >= 1.0 - TOP_EPS {
            return 0.0;
        }
        if i == 0 {
            (x - d1).max(0.0)
        } else {
            // dictators ignore agent 2: the ray has a constant rule
            x * q_deterministic(y, x, d1, d2, true)
        }
    } else {
        if d1 >= 1.0 - TOP_EPS {
            // provision confined to the measure-zero edge v1 = 1
            if i == 0 {
                return 0.0;
            }
            return if y >= 1.0 { (x - d2).max(0.0) } else { 0.0 };
        }
        // entry point of the own coordinate along the provision line
        let (own_d, other_d) = if i == 0 { (d2, d1) } else { (d1, d2) };
        let e = ((1.0 - d1 * d2) - (1.0 - other_d) * y) / (1.0 - own_d);
        (x - e).max(0.0)
    }
}
