//! Scalar numerical kernels: the lower real branch of the Lambert W
//! function, bracketed monotone root finding, and adaptive Simpson
//! quadrature with caller-supplied breakpoints.
//!
//! These three routines carry every solver in the crate, so they are written
//! for worst-case robustness rather than raw speed:
//!
//! * [`lambert_w_minus1`] targets a relative residual of `1e-13` across its
//!   whole domain, switching between a branch-point series and Halley
//!   iteration, with a bisection fallback that cannot fail to converge.
//! * [`solve_monotone`] never leaves its bracket: it interleaves secant
//!   steps with bisection steps so the bracket width provably halves at
//!   least every other iteration.
//! * [`integrate_1d_with_breakpoints`] integrates each smooth piece
//!   separately; callers pass the kink locations of piecewise closed forms
//!   so the adaptive refinement only ever sees smooth integrands.

use crate::error::{Error, Result};

/// `-1/e`, the left endpoint of the domain of both real Lambert W branches.
pub const NEG_INV_E: f64 = -0.36787944117144233;

/// Default absolute tolerance on the argument for root finding.
pub const DEFAULT_TOL_X: f64 = 1e-12;

/// Default absolute tolerance on the residual for root finding.
pub const DEFAULT_TOL_F: f64 = 1e-12;

/// Default iteration cap for root finding.
pub const DEFAULT_MAX_ITER: u32 = 200;

/// A root-finding bracket `[lo, hi]` together with stopping tolerances.
///
/// `solve_monotone` stops as soon as the bracket width drops to `tol_x` or
/// an iterate's residual drops to `tol_f`, whichever happens first, and
/// fails with [`Error::NonConvergence`] after `max_iter` evaluations.
#[derive(Debug, Clone, Copy)]
pub struct Bracket {
    /// Lower end of the bracket.
    pub lo: f64,
    /// Upper end of the bracket.
    pub hi: f64,
    /// Absolute tolerance on the bracket width.
    pub tol_x: f64,
    /// Absolute tolerance on `|f(x) - target|`.
    pub tol_f: f64,
    /// Hard cap on iterations.
    pub max_iter: u32,
}

impl Bracket {
    /// Bracket with the crate-default tolerances (`1e-12`, 200 iterations).
    pub fn new(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            tol_x: DEFAULT_TOL_X,
            tol_f: DEFAULT_TOL_F,
            max_iter: DEFAULT_MAX_ITER,
        }
    }

    /// Same bracket with custom tolerances.
    pub fn with_tolerances(mut self, tol_x: f64, tol_f: f64) -> Self {
        self.tol_x = tol_x;
        self.tol_f = tol_f;
        self
    }
}

/// Lower real branch `W_{-1}` of the Lambert W function.
///
/// Solves `w e^w = x` for the branch with `w <= -1`, defined for
/// `x` in `[-1/e, 0)`. The result satisfies `|w e^w - x| <= 1e-13 |x|`.
///
/// Three regimes:
///
/// ```text
/// x near -1/e : series in p = -sqrt(2(1 + e x)) around the branch point,
///               w = -1 + p - p^2/3 + 11 p^3/72 - 43 p^4/540 + ...
/// elsewhere   : Halley iteration on f(w) = w e^w - x from either the
///               branch-point series guess (x < -0.31) or the asymptotic
///               guess w0 = L1 - L2 + L2/L1, L1 = ln(-x), L2 = ln(-L1)
/// fallback    : bisection on the logarithmic form w + ln(-w) = ln(-x),
///               which is monotone on (-inf, -1]
/// ```
///
/// # Errors
///
/// [`Error::Domain`] if `x` is outside `[-1/e, 0)` (a slack of a few ulps
/// below `-1/e` is forgiven and clamped onto the branch point).
pub fn lambert_w_minus1(x: f64) -> Result<f64> {
    if !(x < 0.0) {
        return Err(Error::Domain(format!(
            "lambert_w_minus1 requires x in [-1/e, 0), got {x}"
        )));
    }
    // 2(1 + e x) >= 0 characterizes the domain; tolerate rounding of -1/e.
    let p2 = 2.0 * (1.0 + std::f64::consts::E * x);
    if p2 < -1e-12 {
        return Err(Error::Domain(format!(
            "lambert_w_minus1 requires x >= -1/e ~ {NEG_INV_E}, got {x}"
        )));
    }
    let p = -p2.max(0.0).sqrt();

    // Branch-point series; for |p| <= 1e-3 the truncation error ~ 3e-24
    // already beats the target, so return it directly.
    let series = |p: f64| -> f64 {
        -1.0 + p * (1.0
            + p * (-1.0 / 3.0
                + p * (11.0 / 72.0
                    + p * (-43.0 / 540.0
                        + p * (769.0 / 17280.0 + p * (-221.0 / 8505.0))))))
    };
    if p > -1e-3 {
        return Ok(series(p).min(-1.0));
    }

    let mut w = if p > -0.5 {
        series(p)
    } else {
        let l1 = (-x).ln(); // <= -1 on this regime
        let l2 = (-l1).ln();
        l1 - l2 + l2 / l1
    }
    .min(-1.0);

    // Halley iteration: cubic convergence, well conditioned for w < -1.
    let target = 1e-14 * x.abs();
    for _ in 0..100 {
        let ew = w.exp();
        let f = w * ew - x;
        if f.abs() <= target {
            return Ok(w);
        }
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let step = f / denom;
        let next = (w - step).min(-1.0);
        if next == w {
            break;
        }
        w = next;
    }
    if (w * w.exp() - x).abs() <= 1e-13 * x.abs() {
        return Ok(w);
    }

    // Bisection fallback on h(w) = w + ln(-w) - ln(-x), increasing on
    // (-inf, -1], with h(-1) >= 0. Expand the lower end until it straddles.
    let l1 = (-x).ln();
    let h = |w: f64| w + (-w).ln() - l1;
    let mut hi = -1.0;
    let mut lo = (2.0 * w).min(-2.0);
    let mut guard = 0;
    while h(lo) > 0.0 {
        lo *= 2.0;
        guard += 1;
        if guard > 100 {
            return Err(Error::NonConvergence(format!(
                "lambert_w_minus1 bisection fallback found no bracket for x = {x}"
            )));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if h(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    w = 0.5 * (lo + hi);
    if (w * w.exp() - x).abs() <= 1e-13 * x.abs() {
        Ok(w)
    } else {
        Err(Error::NonConvergence(format!(
            "lambert_w_minus1 residual target not reached at x = {x}"
        )))
    }
}

/// Principal real branch `W_0` of the Lambert W function on `[-1/e, 0]`.
///
/// Only the subdomain needed by this crate (negative arguments, `w >= -1`).
/// Same residual target as [`lambert_w_minus1`].
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    if !(x < 0.0) {
        return Err(Error::Domain(format!(
            "lambert_w0 (as provided here) requires x in [-1/e, 0], got {x}"
        )));
    }
    let p2 = 2.0 * (1.0 + std::f64::consts::E * x);
    if p2 < -1e-12 {
        return Err(Error::Domain(format!(
            "lambert_w0 requires x >= -1/e ~ {NEG_INV_E}, got {x}"
        )));
    }
    // Mirror of the lower branch: p = +sqrt(2(1+ex)).
    let p = p2.max(0.0).sqrt();
    let series = -1.0
        + p * (1.0
            + p * (-1.0 / 3.0
                + p * (11.0 / 72.0
                    + p * (-43.0 / 540.0 + p * (769.0 / 17280.0 + p * (-221.0 / 8505.0))))));
    let mut w = series.clamp(-1.0, 0.0);
    if p <= 1e-3 {
        return Ok(w);
    }
    let target = 1e-14 * x.abs();
    for _ in 0..100 {
        let ew = w.exp();
        let f = w * ew - x;
        if f.abs() <= target {
            return Ok(w);
        }
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        w = (w - f / denom).clamp(-1.0, 0.0);
    }
    if (w * w.exp() - x).abs() <= 1e-13 * x.abs() {
        Ok(w)
    } else {
        Err(Error::NonConvergence(format!(
            "lambert_w0 residual target not reached at x = {x}"
        )))
    }
}

/// Finds `x` in the bracket with `f(x) = target` for a monotone `f`.
///
/// Evaluates both endpoints first: an endpoint whose residual is already
/// within `tol_f` is returned as-is (this is how parameter solves detect
/// boundary cases exactly), otherwise the endpoint values must straddle the
/// target. Iterates safeguarded secant steps, forcing a bisection step on
/// every other iteration so the bracket width at least halves every two
/// evaluations regardless of how badly the secant model fits.
///
/// Works for increasing or decreasing `f`; only the endpoint signs matter.
///
/// # Errors
///
/// [`Error::Bracket`] if the endpoint values do not straddle the target,
/// [`Error::NonConvergence`] if `max_iter` evaluations are exhausted
/// (unreachable for any sane tolerance thanks to the forced bisections).
pub fn solve_monotone(f: impl Fn(f64) -> f64, bracket: &Bracket, target: f64) -> Result<f64> {
    let Bracket {
        lo,
        hi,
        tol_x,
        tol_f,
        max_iter,
    } = *bracket;
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Domain(format!("invalid bracket [{lo}, {hi}]")));
    }
    let mut a = lo;
    let mut b = hi;
    let mut fa = f(a) - target;
    let mut fb = f(b) - target;
    if fa.is_nan() || fb.is_nan() {
        return Err(Error::Domain(format!(
            "objective is NaN at a bracket end of [{lo}, {hi}]"
        )));
    }
    if fa.abs() <= tol_f {
        return Ok(a);
    }
    if fb.abs() <= tol_f {
        return Ok(b);
    }
    if (fa < 0.0) == (fb < 0.0) {
        return Err(Error::Bracket(format!(
            "f(lo={a}) - target = {fa:e} and f(hi={b}) - target = {fb:e} have the same sign"
        )));
    }
    for iter in 0..max_iter {
        if b - a <= tol_x {
            // Return the endpoint with the smaller residual.
            return Ok(if fa.abs() <= fb.abs() { a } else { b });
        }
        let mid = 0.5 * (a + b);
        let x = if iter % 2 == 1 {
            mid
        } else {
            // Secant through the bracket ends, guarded to the strict interior.
            let s = b - fb * (b - a) / (fb - fa);
            let margin = 0.01 * (b - a);
            if s.is_finite() && s > a + margin && s < b - margin {
                s
            } else {
                mid
            }
        };
        if x <= a || x >= b {
            // Bracket narrower than floating-point resolution.
            return Ok(if fa.abs() <= fb.abs() { a } else { b });
        }
        let fx = f(x) - target;
        if fx.is_nan() {
            return Err(Error::Domain(format!("objective is NaN at x = {x}")));
        }
        if fx.abs() <= tol_f {
            return Ok(x);
        }
        if (fx < 0.0) == (fa < 0.0) {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
    }
    Err(Error::NonConvergence(format!(
        "solve_monotone used all {max_iter} iterations on [{lo}, {hi}]"
    )))
}

/// Maximum refinement depth for adaptive Simpson segments.
const SIMPSON_MAX_DEPTH: u32 = 48;

/// Minimum refinement depth before an error estimate is trusted; guards
/// against symmetric integrands that fool the first Richardson estimate.
const SIMPSON_MIN_DEPTH: u32 = 2;

/// Integrates `f` over `[lo, hi]` to absolute tolerance `tol`.
///
/// Thin wrapper over [`integrate_1d_with_breakpoints`] with no breakpoints.
pub fn integrate_1d(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    integrate_1d_with_breakpoints(f, lo, hi, &[], tol)
}

/// Integrates `f` over `[lo, hi]` to absolute tolerance `tol`, splitting
/// first at the supplied breakpoints.
///
/// Breakpoints outside `(lo, hi)` are ignored; each resulting segment is
/// handled by adaptive Simpson with Richardson extrapolation and receives a
/// share of `tol` proportional to its length. Supplying every kink of a
/// piecewise integrand keeps each segment smooth, which is what makes the
/// error estimate trustworthy.
///
/// # Errors
///
/// [`Error::Domain`] for a reversed or non-finite interval,
/// [`Error::Quadrature`] if the integrand returns a non-finite value, or if
/// panels that hit the refinement depth cap leave more residual error than
/// the requested tolerance (bounded jumps off the breakpoint grid refine
/// down to a ~1e-14 sliver and pass; divergent behaviour fails).
pub fn integrate_1d_with_breakpoints(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    breakpoints: &[f64],
    tol: f64,
) -> Result<f64> {
    if !lo.is_finite() || !hi.is_finite() || !(tol > 0.0) {
        return Err(Error::Domain(format!(
            "invalid quadrature request: interval [{lo}, {hi}], tol {tol}"
        )));
    }
    if hi < lo {
        return Err(Error::Domain(format!(
            "reversed quadrature interval [{lo}, {hi}]"
        )));
    }
    if hi == lo {
        return Ok(0.0);
    }
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|b| b.is_finite() && *b > lo && *b < hi)
        .collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
    cuts.dedup();
    let mut points = Vec::with_capacity(cuts.len() + 2);
    points.push(lo);
    points.extend(cuts);
    points.push(hi);

    let total = hi - lo;
    let mut sum = 0.0;
    for pair in points.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b - a <= f64::EPSILON * a.abs().max(1.0) {
            continue;
        }
        let seg_tol = (tol * (b - a) / total).max(f64::MIN_POSITIVE);
        sum += simpson_segment(&f, a, b, seg_tol)?;
    }
    Ok(sum)
}

/// Adaptive Simpson on one smooth segment (iterative stack, no recursion).
fn simpson_segment(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let eval = |x: f64| -> Result<f64> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::Quadrature(format!(
                "integrand returned {y} at x = {x}"
            )))
        }
    };
    let fa = eval(a)?;
    let fb = eval(b)?;
    let m = 0.5 * (a + b);
    let fm = eval(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);

    struct Frame {
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    }
    let mut stack = vec![Frame {
        a,
        fa,
        b,
        fb,
        m,
        fm,
        whole,
        tol,
        depth: 0,
    }];
    let mut sum = 0.0;
    // Error carried by panels that hit the depth cap before their local
    // estimate converged. A bounded jump discontinuity off the breakpoint
    // grid stalls refinement (the local estimate and the tolerance share
    // shrink at the same rate), but by depth 48 the offending panel is
    // ~1e-14 of the segment, so its residual is harmless; only a genuinely
    // divergent residual should fail the whole integral.
    let mut unresolved = 0.0;
    while let Some(fr) = stack.pop() {
        let m1 = 0.5 * (fr.a + fr.m);
        let m2 = 0.5 * (fr.m + fr.b);
        let fm1 = eval(m1)?;
        let fm2 = eval(m2)?;
        let left = (fr.m - fr.a) / 6.0 * (fr.fa + 4.0 * fm1 + fr.fm);
        let right = (fr.b - fr.m) / 6.0 * (fr.fm + 4.0 * fm2 + fr.fb);
        let delta = left + right - fr.whole;
        if fr.depth >= SIMPSON_MIN_DEPTH && delta.abs() <= 15.0 * fr.tol {
            sum += left + right + delta / 15.0;
            continue;
        }
        if fr.depth >= SIMPSON_MAX_DEPTH {
            sum += left + right + delta / 15.0;
            unresolved += delta.abs();
            continue;
        }
        let half_tol = 0.5 * fr.tol;
        stack.push(Frame {
            a: fr.a,
            fa: fr.fa,
            b: fr.m,
            fb: fr.fm,
            m: m1,
            fm: fm1,
            whole: left,
            tol: half_tol,
            depth: fr.depth + 1,
        });
        stack.push(Frame {
            a: fr.m,
            fa: fr.fm,
            b: fr.b,
            fb: fr.fb,
            m: m2,
            fm: fm2,
            whole: right,
            tol: half_tol,
            depth: fr.depth + 1,
        });
    }
    if unresolved > tol.max(1e-13 * sum.abs()) {
        return Err(Error::Quadrature(format!(
            "adaptive Simpson left {unresolved:e} unresolved at depth {SIMPSON_MAX_DEPTH} on [{a}, {b}]"
        )));
    }
    Ok(sum)
}

/// `ln(a/b)` for positive `a`, `b`, accurate even when `a → b`: switches
/// to `ln(1 + (a-b)/b)` once the operands are within 25% of each other,
/// where the plain quotient would round before the log and a downstream
/// division by `a - b` would amplify that rounding.
pub(crate) fn ln_ratio(a: f64, b: f64) -> f64 {
    if (a - b).abs() <= 0.25 * b.abs() {
        ((a - b) / b).ln_1p()
    } else {
        (a / b).ln()
    }
}
