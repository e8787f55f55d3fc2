//! Closed-form per-agent means of the candidate worst-case families.
//!
//! Each two-agent regime is solved by matching the agents' means under a
//! parametric family of joint distributions. The families are indexed by a
//! pair of shape parameters and their per-agent means have closed forms;
//! the solvers in `params` invert these maps. Three families appear:
//!
//! - **low** family (parameters `s1, s2 ∈ (0, 1]`): interior density
//!   proportional to `1/(v1+v2)^3` above the line `s2·v1 + s1·v2 = s1·s2`,
//!   plus edge densities on `v1 = 1` and `v2 = 1` and an atom at `(1, 1)`.
//!   Covers the symmetric low-mean regime (`s1 = s2`) and area I.
//! - **high** family (parameters `t1, t2 ∈ [0, 1]`, `t_i` the entry point
//!   of the edge density on the opposite agent's top edge): same interior
//!   shape above `(1−t2)·v1 + (1−t1)·v2 = 1 − t1·t2`. Covers the symmetric
//!   high-mean regime and area II.
//! - **cross** family (parameters `u1 ∈ (0, 1]`, `u2 ∈ [0, u1]`): support
//!   above `v1 + (u1−u2)·v2 = u1`, edge densities on `v1 = 1` over all of
//!   `[0, 1)` and on `v2 = 1` over `[u2, 1)`. Covers area III, and its
//!   edges reproduce the low family (`u2 = 0`, `s2 = 1`) and the high
//!   family (`u1 = 1`, `t2 = 0`), which is how the boundary curves between
//!   regimes arise.
//!
//! The closed forms contain removable singularities (equal parameters in
//! the low/high families; `1 + u2 − u1 → 0` near the regime pinch point).
//! Two measures keep evaluation accurate there:
//!
//! - inside a relative window [`SERIES_SWITCH`] around the singular set a
//!   truncated series is used (absolute truncation error below `1e-15`);
//! - outside the window the closed form is evaluated with `ln_1p` applied
//!   to exactly-representable differences, so the `1/ε²` factors amplify
//!   only the `O(ε)` rounding of the log, not an `O(1)` argument rounding.
//!
//! Worst-case absolute evaluation error is ~`1e-13`, at the switch
//! boundary itself, well inside the `1e-9` residual gates enforced by the
//! solvers.

/// Relative half-width of the window around a removable singularity in
/// which the series form of a family mean is used instead of the closed
/// form.
pub(crate) const SERIES_SWITCH: f64 = 1e-3;

/// Mean of agent 1 under the low family with shape `(s1, s2)`.
///
/// Both parameters must lie in `(0, 1]`. Increasing in `s1`.
pub(crate) fn mean1_low(s1: f64, s2: f64) -> f64 {
    let pre = s1 * s2 / (s1 + s2);
    let eps = s2 - s1;
    let x = eps / s2;
    let bracket = if eps.abs() <= SERIES_SWITCH * s2 {
        // series around s1 = s2 (valid for both signs of eps):
        //   3/2 - sum_{k>=1} 2 x^k / (k (k+1) (k+2)) - ln s1,  x = eps/s2
        1.5 - x * (1.0 / 3.0
            + x * (1.0 / 12.0
                + x * (1.0 / 30.0 + x * (1.0 / 60.0 + x * (1.0 / 105.0 + x / 168.0)))))
            - s1.ln()
    } else {
        // ln(s1/s2) = ln_1p(-x) with eps = s2 - s1 exact (Sterbenz) keeps
        // the 1/eps^2 amplification at O(eps) instead of O(1); once the
        // operands are far apart the plain logs are safe and dodge both
        // the ln_1p pole at x = 1 and the s1^2 underflow for tiny s1
        let log_term = if x > 0.5 {
            (s1 / eps) * (s1 / eps) * (s1.ln() - s2.ln())
        } else {
            s1 * s1 / (eps * eps) * (-x).ln_1p()
        };
        log_term - s1.ln() + s2 / eps
    };
    pre * bracket
}

/// Mean of agent 2 under the low family: `mean1_low` with roles swapped.
pub(crate) fn mean2_low(s1: f64, s2: f64) -> f64 {
    mean1_low(s2, s1)
}

/// Common mean on the low family's diagonal `s1 = s2 = s`.
pub(crate) fn diag_low(s: f64) -> f64 {
    s * (3.0 - 2.0 * s.ln()) / 4.0
}

/// Mean of agent 1 under the high family with shape `(t1, t2)`.
///
/// Both parameters lie in `[0, 1]`. Increasing in `t1`; equals 1 at
/// `t1 = 1` for any `t2 < 1`.
pub(crate) fn mean1_high(t1: f64, t2: f64) -> f64 {
    let eps = t2 - t1;
    let c = 1.0 + t1;
    let g = 1.0 - t1;
    let x = eps / c;
    if eps.abs() <= SERIES_SWITCH * c {
        // diagonal series:
        //   diag - (1-t)^2 sum_{k>=1} (-1)^{k+1} x^k / (2 (k+1) (k+2))
        diag_high(t1)
            - g * g
                * x
                * (1.0 / 12.0
                    - x * (1.0 / 24.0
                        - x * (1.0 / 40.0 - x * (1.0 / 60.0 - x * (1.0 / 84.0 - x / 112.0)))))
    } else {
        let a = c * (1.0 + t2) * g * g / (2.0 * eps * eps);
        let b = -(1.0 - t1 * t2) * g / (2.0 * eps);
        a * x.ln_1p() + b + c / 2.0
    }
}

/// Mean of agent 2 under the high family: `mean1_high` with roles swapped.
pub(crate) fn mean2_high(t1: f64, t2: f64) -> f64 {
    mean1_high(t2, t1)
}

/// Common mean on the high family's diagonal `t1 = t2 = t`.
pub(crate) fn diag_high(t: f64) -> f64 {
    (3.0 - t) * (1.0 + t) / 4.0
}

/// Mean of agent 1 under the cross family with shape `(u1, u2)`,
/// `0 < u1 ≤ 1`, `0 ≤ u2 ≤ u1`.
pub(crate) fn mean1_cross(u1: f64, u2: f64) -> f64 {
    let c = 1.0 + u2;
    let d = u2 - u1;
    let eta = 1.0 + d; // consistent with d in every singular term below
    let y = eta / c;
    let pre = u1 * c / (u1 + 1.0);
    let bracket = if eta <= SERIES_SWITCH * c {
        // corner series in eta at fixed c = 1 + u2:
        //   1 + 1/c - 1/(2c^2) - ln c
        //     + sum_{k>=1} y^k (2/((k+1) c) - 1/((k+2) c^2)),  y = eta/c
        let ic = 1.0 / c;
        let mut acc = 0.0;
        let mut yk = 1.0;
        for k in 1..=5u32 {
            yk *= y;
            acc += yk * (2.0 / ((k + 1) as f64) * ic - 1.0 / ((k + 2) as f64) * ic * ic);
        }
        1.0 + ic - 0.5 * ic * ic - c.ln() + acc
    } else {
        d * d / (eta * eta) * (-y).ln_1p() - u1.ln() + 1.0 - d / (c * eta)
    };
    pre * bracket
}

/// Mean of agent 2 under the cross family with shape `(u1, u2)`.
pub(crate) fn mean2_cross(u1: f64, u2: f64) -> f64 {
    let c = 1.0 + u2;
    let d = u2 - u1;
    let eta = 1.0 + d;
    let y = eta / c;
    let pre = u1 * c / (u1 + 1.0);
    let bracket = if eta <= SERIES_SWITCH * c {
        // corner series: 1/c + (1/c^2) sum_{k>=0} y^k / (k+2)
        let ic = 1.0 / c;
        ic + ic
            * ic
            * (0.5 + y * (1.0 / 3.0 + y * (0.25 + y * (0.2 + y * (1.0 / 6.0 + y / 7.0)))))
    } else {
        -(-y).ln_1p() / (eta * eta) + 1.0 / c - 1.0 / (c * eta)
    };
    pre * bracket
}

#[cfg(test)]
mod tests {
    use super::*;

    // Shape parameters and means below are frozen from an independent
    // high-precision implementation of the same closed forms.

    #[test]
    fn low_family_reproduces_solved_means() {
        // shapes solved for means (0.6, 0.55)
        let (s1, s2) = (0.43604549469227198882, 0.7544584972699505946);
        assert!((mean1_low(s1, s2) - 0.6).abs() < 1e-12);
        assert!((mean2_low(s1, s2) - 0.55).abs() < 1e-12);
        // shapes solved for means (0.7, 0.68)
        let (s1, s2) = (0.7473235643767365761, 0.86786103898917216266);
        assert!((mean1_low(s1, s2) - 0.7).abs() < 1e-12);
        assert!((mean2_low(s1, s2) - 0.68).abs() < 1e-12);
    }

    #[test]
    fn high_family_reproduces_solved_means() {
        // shapes solved for means (0.95, 0.8)
        let (t1, t2) = (0.52961998221209092198, 0.14567167888207845656);
        assert!((mean1_high(t1, t2) - 0.95).abs() < 1e-12);
        assert!((mean2_high(t1, t2) - 0.8).abs() < 1e-12);
        // top edge: agent-1 mean is exactly 1 at t1 = 1
        assert_eq!(mean1_high(1.0, 0.3), 1.0);
    }

    #[test]
    fn cross_family_reproduces_solved_means() {
        // shapes solved for means (0.8, 0.55)
        let (u1, u2) = (0.48142843690055484714, 0.35594893908562123454);
        assert!((mean1_cross(u1, u2) - 0.8).abs() < 1e-12);
        assert!((mean2_cross(u1, u2) - 0.55).abs() < 1e-12);
    }

    #[test]
    fn diagonal_matches_series_path() {
        for &s in &[0.1, 0.3, 0.5, 0.9] {
            assert!((mean1_low(s, s) - diag_low(s)).abs() < 1e-14);
            assert!((mean2_low(s, s) - diag_low(s)).abs() < 1e-14);
        }
        for &t in &[0.0, 0.2, 0.5, 0.95] {
            assert!((mean1_high(t, t) - diag_high(t)).abs() < 1e-14);
        }
    }

    /// Second difference of `g` over the three points
    /// `x0, x0 + h, x0 + 2h`; for a smooth function this is `O(h^2)`, so a
    /// jump at the series switch (which the middle point sits on) shows up
    /// at full size.
    fn second_diff(g: impl Fn(f64) -> f64, x0: f64, h: f64) -> f64 {
        g(x0) - 2.0 * g(x0 + h) + g(x0 + 2.0 * h)
    }

    #[test]
    fn series_switch_is_continuous() {
        // straddle the switch window edge with points at 0.996, 1.000 and
        // 1.004 times the threshold (the last on the closed-form path); the
        // smooth O(h^2) second difference is ~1e-12 there, so a path
        // discontinuity above 2e-11 would dominate
        let s2 = 0.7;
        let w = SERIES_SWITCH * s2;
        for sign in [-1.0, 1.0] {
            let d = second_diff(|e| mean1_low(s2 - sign * e, s2), 0.996 * w, 0.004 * w);
            assert!(d.abs() < 2e-11, "low family jump {d:e}");
        }
        let t1 = 0.5;
        let w = SERIES_SWITCH * (1.0 + t1);
        for sign in [-1.0, 1.0] {
            let d = second_diff(|e| mean1_high(t1, t1 + sign * e), 0.996 * w, 0.004 * w);
            assert!(d.abs() < 2e-11, "high family jump {d:e}");
        }
        // cross family near the corner: eta = 1 - u1 at u2 = 0
        let w = SERIES_SWITCH;
        let d = second_diff(|e| mean1_cross(1.0 - e, 0.0), 0.996 * w, 0.004 * w);
        assert!(d.abs() < 2e-11, "cross family (agent 1) jump {d:e}");
        let d = second_diff(|e| mean2_cross(1.0 - e, 0.0), 0.996 * w, 0.004 * w);
        assert!(d.abs() < 2e-11, "cross family (agent 2) jump {d:e}");
    }

    #[test]
    fn cross_family_corner_limits() {
        // at the pinch corner u1 = 1, u2 = 0 both means equal 3/4
        assert!((mean1_cross(1.0, 0.0) - 0.75).abs() < 1e-14);
        assert!((mean2_cross(1.0, 0.0) - 0.75).abs() < 1e-14);
    }

    #[test]
    fn cross_family_edges_match_other_families() {
        // u1 = 1 edge reproduces the high family with (t1, t2) = (u2, 0):
        // both put support above v1 + (1-u2) v2 = 1 with the same edges
        for &u2 in &[0.1, 0.4, 0.8] {
            assert!((mean1_cross(1.0, u2) - mean1_high(u2, 0.0)).abs() < 1e-12);
            assert!((mean2_cross(1.0, u2) - mean2_high(u2, 0.0)).abs() < 1e-12);
        }
        // u2 = 0 edge reproduces the low family with s2 = 1
        for &u1 in &[0.2, 0.5, 0.9] {
            assert!((mean1_cross(u1, 0.0) - mean1_low(u1, 1.0)).abs() < 1e-12);
            assert!((mean2_cross(u1, 0.0) - mean2_low(u1, 1.0)).abs() < 1e-12);
        }
    }
}
