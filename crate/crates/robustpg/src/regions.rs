//! Mean vectors, regime boundaries, and classification.
//!
//! For two agents with mean vector `(m1, m2)` (relabelled so `m1 ≥ m2`),
//! the unit square of feasible means splits into six regimes, each solved
//! by a different parametric family:
//!
//! ```text
//!   m2 = m1 (diagonal)     : symmetric low below 3/4, symmetric high above
//!   boundary I   (m1 ≤ 3/4): separates area I (above) from area III
//!   boundary II  (m1 ≥ 3/4): separates area II (above) from area III
//!   boundary III           : separates area III from area IV (below)
//! ```
//!
//! All three curves are parametrized by a scalar `r ∈ [0, 1]`, the limit
//! shape of the adjacent families: boundary I is the low family at
//! `(s1, s2) = (r, 1)`, boundary II is the high family at `(t1, t2) =
//! (r, 0)`, and boundary III is the degenerate edge `(w1, w2) = (r, ·)` of
//! the single-agent-like family of area IV. Boundaries I and II meet the
//! diagonal at the pinch point `(3/4, 3/4)`; boundaries II and III meet at
//! `(1, ln 2)`.
//!
//! [`classify`] decides regime membership with a snapping tolerance: mean
//! vectors within [`CLASSIFY_EPS`] of a curve are labelled with the
//! regime whose solver degrades gracefully there (boundary I snaps into
//! area III, boundary II into area II, boundary III into area IV) and the
//! returned [`CaseLabel`] records the boundary hit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interim;
use crate::numerics::{solve_monotone, Bracket};

/// Snapping tolerance used by [`classify`]: mean vectors within this
/// distance of a boundary curve (or of the diagonal/split point) are
/// treated as lying on it.
pub const CLASSIFY_EPS: f64 = 1e-9;

/// Vector of per-agent mean constraints, entries in `[0, 1]`.
///
/// Construction validates the entries; the order is the caller's agent
/// order and is preserved (solvers that need the two-agent means sorted
/// record the relabelling themselves).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct MeanVector(Vec<f64>);

// deserialization funnels through `new` so invalid entries are rejected
impl<'de> Deserialize<'de> for MeanVector {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let means = Vec::<f64>::deserialize(deserializer)?;
        MeanVector::new(means).map_err(serde::de::Error::custom)
    }
}

impl MeanVector {
    /// Validates that every entry is finite and lies in `[0, 1]`.
    pub fn new(means: Vec<f64>) -> Result<Self> {
        if means.is_empty() {
            return Err(Error::Domain("mean vector must be non-empty".into()));
        }
        for (i, &m) in means.iter().enumerate() {
            if !(0.0..=1.0).contains(&m) {
                return Err(Error::Domain(format!(
                    "mean m{} = {m} is outside [0, 1]",
                    i + 1
                )));
            }
        }
        Ok(Self(means))
    }

    /// Convenience constructor for the two-agent problem.
    pub fn pair(m1: f64, m2: f64) -> Result<Self> {
        Self::new(vec![m1, m2])
    }

    /// Number of agents.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// True when the vector has no entries (never, post-construction).
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The means in the caller's agent order.
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Two-agent view sorted descending: `(larger, smaller, swapped)`,
    /// where `swapped` is true when the caller's order was ascending.
    ///
    /// Errors with [`Error::Dimension`] unless the vector has exactly two
    /// entries.
    pub fn ordered_two(&self) -> Result<(f64, f64, bool)> {
        if self.0.len() != 2 {
            return Err(Error::Dimension {
                expected: 2,
                got: self.0.len(),
            });
        }
        let (a, b) = (self.0[0], self.0[1]);
        if a >= b {
            Ok((a, b, false))
        } else {
            Ok((b, a, true))
        }
    }
}

/// The six two-agent regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseTag {
    /// Symmetric means below the split point 3/4.
    #[serde(rename = "SYM_I")]
    SymI,
    /// Symmetric means at or above the split point 3/4.
    #[serde(rename = "SYM_II")]
    SymII,
    /// Asymmetric, both means low: wedge between boundary I and the
    /// diagonal.
    #[serde(rename = "AREA_I")]
    AreaI,
    /// Asymmetric, both means high: wedge between boundary II and the
    /// diagonal.
    #[serde(rename = "AREA_II")]
    AreaII,
    /// Intermediate asymmetry: between boundary III and boundary I/II.
    #[serde(rename = "AREA_III")]
    AreaIII,
    /// Extreme asymmetry below boundary III; the low-mean agent's
    /// constraint binds only through a box cap.
    #[serde(rename = "AREA_IV")]
    AreaIV,
}

impl std::fmt::Display for CaseTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CaseTag::SymI => "SYM_I",
            CaseTag::SymII => "SYM_II",
            CaseTag::AreaI => "AREA_I",
            CaseTag::AreaII => "AREA_II",
            CaseTag::AreaIII => "AREA_III",
            CaseTag::AreaIV => "AREA_IV",
        };
        f.write_str(s)
    }
}

/// Boundary curves (and the diagonal split point) that a classified mean
/// vector can lie on, up to [`CLASSIFY_EPS`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryTag {
    /// Between areas I and III.
    #[serde(rename = "B_I")]
    BI,
    /// Between areas II and III.
    #[serde(rename = "B_II")]
    BII,
    /// Between areas III and IV.
    #[serde(rename = "B_III")]
    BIII,
    /// The symmetric split point `(3/4, 3/4)` on the diagonal.
    #[serde(rename = "SYM_SPLIT")]
    SymSplit,
}

impl std::fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            BoundaryTag::BI => "B_I",
            BoundaryTag::BII => "B_II",
            BoundaryTag::BIII => "B_III",
            BoundaryTag::SymSplit => "SYM_SPLIT",
        };
        f.write_str(s)
    }
}

/// Result of [`classify`]: the regime, plus the boundary curve the mean
/// vector sits on when it is within [`CLASSIFY_EPS`] of one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseLabel {
    /// Regime of the (descending-sorted) mean pair.
    pub case: CaseTag,
    /// Boundary hit, if the means lie on one up to the tolerance.
    pub boundary: Option<BoundaryTag>,
}

impl std::fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.boundary {
            Some(b) => write!(f, "{} (on {})", self.case, b),
            None => write!(f, "{}", self.case),
        }
    }
}

/// Tolerances used when inverting the boundary parametrizations.
const BOUNDARY_TOL: f64 = 1e-15;

// ---- scalar boundary parametrizations -----------------------------------
//
// Each curve is (larger-mean, smaller-mean) = (za(r), zb(r)) for r in
// [0, 1]; the za components are strictly increasing, so the curves are
// inverted by solving za(r) = m1 and evaluating zb there.

/// Larger mean along boundary I: low family at `(s1, s2) = (r, 1)`.
fn z1_bi(r: f64) -> f64 {
    if r == 0.0 {
        0.0
    } else {
        interim::mean1_cross(r, 0.0)
    }
}

/// Smaller mean along boundary I.
fn z2_bi(r: f64) -> f64 {
    if r == 0.0 {
        0.0
    } else {
        interim::mean2_cross(r, 0.0)
    }
}

/// Larger mean along boundary II: high family at `(t1, t2) = (r, 0)`.
fn z1_bii(r: f64) -> f64 {
    interim::mean1_high(r, 0.0)
}

/// Smaller mean along boundary II (decreasing, from 3/4 to ln 2).
fn z2_bii(r: f64) -> f64 {
    interim::mean1_high(0.0, r)
}

/// Larger mean along boundary III: `r (1 - ln r)`.
fn z1_biii(r: f64) -> f64 {
    if r == 0.0 {
        0.0
    } else {
        r * (1.0 - r.ln())
    }
}

/// Smaller mean along boundary III: `r ln((1+r)/r)`.
fn z2_biii(r: f64) -> f64 {
    if r == 0.0 {
        0.0
    } else {
        r * (r.ln_1p() - r.ln())
    }
}

/// Inverts an increasing parametrization component on `[0, 1]`.
fn invert_on_unit(f: impl Fn(f64) -> f64, target: f64) -> Result<f64> {
    let bracket = Bracket::new(0.0, 1.0).with_tolerances(BOUNDARY_TOL, BOUNDARY_TOL);
    solve_monotone(f, &bracket, target)
}

/// Smaller mean on boundary I at larger mean `m1 ∈ (0, 3/4]`.
///
/// Boundary I separates area I (above the curve) from area III; it runs
/// from the origin to the pinch point `(3/4, 3/4)`.
pub fn boundary_i(m1: f64) -> Result<f64> {
    if !(m1 > 0.0 && m1 <= 0.75) {
        return Err(Error::Domain(format!(
            "boundary I is defined for larger means in (0, 3/4], got {m1}"
        )));
    }
    let r = invert_on_unit(z1_bi, m1)?;
    Ok(z2_bi(r))
}

/// Smaller mean on boundary II at larger mean `m1 ∈ [3/4, 1]`.
///
/// Boundary II separates area II (above the curve) from area III; it runs
/// from the pinch point `(3/4, 3/4)` down to `(1, ln 2)`.
pub fn boundary_ii(m1: f64) -> Result<f64> {
    if !(0.75..=1.0).contains(&m1) {
        return Err(Error::Domain(format!(
            "boundary II is defined for larger means in [3/4, 1], got {m1}"
        )));
    }
    let r = invert_on_unit(z1_bii, m1)?;
    Ok(z2_bii(r))
}

/// Smaller mean on boundary III at larger mean `m1 ∈ (0, 1]`.
///
/// Boundary III separates area III (above) from area IV (below); it runs
/// from the origin to `(1, ln 2)`.
pub fn boundary_iii(m1: f64) -> Result<f64> {
    if !(m1 > 0.0 && m1 <= 1.0) {
        return Err(Error::Domain(format!(
            "boundary III is defined for larger means in (0, 1], got {m1}"
        )));
    }
    let r = invert_on_unit(z1_biii, m1)?;
    Ok(z2_biii(r))
}

/// Classifies a two-agent mean vector into its regime with the default
/// snapping tolerance [`CLASSIFY_EPS`].
pub fn classify(means: &MeanVector) -> Result<CaseLabel> {
    classify_with_eps(means, CLASSIFY_EPS)
}

/// Classifies a two-agent mean vector, snapping to boundary curves within
/// `eps`.
///
/// Snap directions are chosen so the labelled regime's solver handles the
/// curve itself: boundary I snaps to area III, boundary II to area II,
/// boundary III to area IV, and the symmetric split point to the high
/// symmetric regime.
pub fn classify_with_eps(means: &MeanVector, eps: f64) -> Result<CaseLabel> {
    if !(eps >= 0.0 && eps < 1e-3) {
        return Err(Error::Domain(format!(
            "snapping tolerance must lie in [0, 1e-3), got {eps}"
        )));
    }
    let (m1, m2, _) = means.ordered_two()?;
    if m1 <= 0.0 {
        return Err(Error::Domain(
            "the zero mean vector admits no mechanism with positive revenue".into(),
        ));
    }
    if m1 - m2 <= eps {
        // diagonal: split at 3/4 (low regime open, high regime closed)
        let case = if m1 < 0.75 { CaseTag::SymI } else { CaseTag::SymII };
        let boundary = ((m1 - 0.75).abs() <= eps).then_some(BoundaryTag::SymSplit);
        return Ok(CaseLabel { case, boundary });
    }
    let b3 = boundary_iii(m1)?;
    if (m2 - b3).abs() <= eps {
        return Ok(CaseLabel {
            case: CaseTag::AreaIV,
            boundary: Some(BoundaryTag::BIII),
        });
    }
    if m2 < b3 {
        return Ok(CaseLabel {
            case: CaseTag::AreaIV,
            boundary: None,
        });
    }
    if m1 < 0.75 {
        let b1 = boundary_i(m1)?;
        if (m2 - b1).abs() <= eps {
            Ok(CaseLabel {
                case: CaseTag::AreaIII,
                boundary: Some(BoundaryTag::BI),
            })
        } else if m2 > b1 {
            Ok(CaseLabel {
                case: CaseTag::AreaI,
                boundary: None,
            })
        } else {
            Ok(CaseLabel {
                case: CaseTag::AreaIII,
                boundary: None,
            })
        }
    } else {
        let b2 = boundary_ii(m1)?;
        if (m2 - b2).abs() <= eps {
            Ok(CaseLabel {
                case: CaseTag::AreaII,
                boundary: Some(BoundaryTag::BII),
            })
        } else if m2 > b2 {
            Ok(CaseLabel {
                case: CaseTag::AreaII,
                boundary: None,
            })
        } else {
            Ok(CaseLabel {
                case: CaseTag::AreaIII,
                boundary: None,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Boundary ordinates below are frozen from an independent
    // high-precision implementation of the same parametrizations.

    #[test]
    fn boundary_i_matches_frozen_references() {
        for (m1, want) in [
            (0.5, 0.41399159469119306303),
            (0.6, 0.51298586254072930137),
            (0.7, 0.63774309067118056752),
        ] {
            let got = boundary_i(m1).unwrap();
            assert!((got - want).abs() < 1e-11, "boundary_i({m1}) = {got}");
        }
    }

    #[test]
    fn boundary_ii_matches_frozen_references() {
        for (m1, want) in [
            (0.8, 0.74265693999221746143),
            (0.85, 0.73477605216549245882),
            (0.9, 0.72600088275498136762),
            (0.95, 0.71540647836474496782),
        ] {
            let got = boundary_ii(m1).unwrap();
            assert!((got - want).abs() < 1e-11, "boundary_ii({m1}) = {got}");
        }
    }

    #[test]
    fn boundary_iii_matches_frozen_references() {
        for (m1, want) in [
            (0.5, 0.34527050352986234311),
            (0.6, 0.40435943299162714565),
            (0.8, 0.52093795567134490197),
            (0.9, 0.58401262067442687476),
        ] {
            let got = boundary_iii(m1).unwrap();
            assert!((got - want).abs() < 1e-11, "boundary_iii({m1}) = {got}");
        }
    }

    #[test]
    fn boundaries_meet_at_known_corners() {
        // boundaries I and II pinch the diagonal at (3/4, 3/4)
        assert!((boundary_i(0.75).unwrap() - 0.75).abs() < 1e-9);
        assert!((boundary_ii(0.75).unwrap() - 0.75).abs() < 1e-9);
        // boundaries II and III meet at (1, ln 2)
        let ln2 = std::f64::consts::LN_2;
        assert!((boundary_ii(1.0).unwrap() - ln2).abs() < 1e-12);
        assert!((boundary_iii(1.0).unwrap() - ln2).abs() < 1e-12);
    }

    #[test]
    fn boundaries_are_ordered() {
        // on (0, 3/4): B_III < B_I < m1; on (3/4, 1): B_III < B_II < m1
        for i in 1..15 {
            let m1 = 0.05 * i as f64;
            let b3 = boundary_iii(m1).unwrap();
            if m1 < 0.75 {
                let b1 = boundary_i(m1).unwrap();
                assert!(b3 < b1 && b1 < m1, "order fails at m1 = {m1}");
            } else if m1 > 0.75 {
                let b2 = boundary_ii(m1).unwrap();
                assert!(b3 < b2 && b2 < m1, "order fails at m1 = {m1}");
            }
        }
    }

    #[test]
    fn boundary_domain_errors() {
        assert!(boundary_i(0.0).is_err());
        assert!(boundary_i(0.8).is_err());
        assert!(boundary_ii(0.5).is_err());
        assert!(boundary_ii(1.1).is_err());
        assert!(boundary_iii(0.0).is_err());
        assert!(boundary_iii(1.5).is_err());
    }

    fn tag_of(m1: f64, m2: f64) -> CaseTag {
        classify(&MeanVector::pair(m1, m2).unwrap()).unwrap().case
    }

    #[test]
    fn classify_reference_points() {
        use CaseTag::*;
        let two_over_e = 2.0 / std::f64::consts::E;
        let ln2_over_e = std::f64::consts::LN_2 / std::f64::consts::E;
        let cases = [
            (0.3, 0.3, SymI),
            (0.5, 0.5, SymI),
            (0.7, 0.7, SymI),
            (0.75, 0.75, SymII),
            (0.84, 0.84, SymII),
            (0.95, 0.95, SymII),
            (0.6, 0.55, AreaI),
            (0.5, 0.45, AreaI),
            (0.7, 0.68, AreaI),
            (0.95, 0.8, AreaII),
            (0.85, 0.78, AreaII),
            (0.8, 0.55, AreaIII),
            (0.9, 0.65, AreaIII),
            (0.6, 0.45, AreaIII),
            (two_over_e, ln2_over_e, AreaIV),
            (0.9, 0.3, AreaIV),
            (0.5, 0.1, AreaIV),
            (0.5, 0.0, AreaIV),
        ];
        for (m1, m2, want) in cases {
            assert_eq!(tag_of(m1, m2), want, "({m1}, {m2})");
        }
    }

    #[test]
    fn classify_is_order_invariant() {
        let a = classify(&MeanVector::pair(0.55, 0.6).unwrap()).unwrap();
        let b = classify(&MeanVector::pair(0.6, 0.55).unwrap()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.case, CaseTag::AreaI);
    }

    #[test]
    fn classify_snaps_onto_boundaries() {
        let m1 = 0.6;
        let b1 = boundary_i(m1).unwrap();
        let on = classify(&MeanVector::pair(m1, b1 + 1e-10).unwrap()).unwrap();
        assert_eq!(on.case, CaseTag::AreaIII);
        assert_eq!(on.boundary, Some(BoundaryTag::BI));
        // 1e-6 away is outside the default snap width
        let off = classify(&MeanVector::pair(m1, b1 + 1e-6).unwrap()).unwrap();
        assert_eq!(off.case, CaseTag::AreaI);
        assert_eq!(off.boundary, None);

        let m1 = 0.9;
        let b2 = boundary_ii(m1).unwrap();
        let on = classify(&MeanVector::pair(m1, b2 - 1e-10).unwrap()).unwrap();
        assert_eq!(on.case, CaseTag::AreaII);
        assert_eq!(on.boundary, Some(BoundaryTag::BII));
        let b3 = boundary_iii(m1).unwrap();
        let on = classify(&MeanVector::pair(m1, b3 + 1e-10).unwrap()).unwrap();
        assert_eq!(on.case, CaseTag::AreaIV);
        assert_eq!(on.boundary, Some(BoundaryTag::BIII));

        let split = classify(&MeanVector::pair(0.75, 0.75 - 1e-10).unwrap()).unwrap();
        assert_eq!(split.case, CaseTag::SymII);
        assert_eq!(split.boundary, Some(BoundaryTag::SymSplit));
    }

    #[test]
    fn classify_rejects_degenerate_inputs() {
        assert!(classify(&MeanVector::pair(0.0, 0.0).unwrap()).is_err());
        assert!(MeanVector::pair(1.2, 0.5).is_err());
        assert!(MeanVector::pair(-0.1, 0.5).is_err());
        assert!(MeanVector::pair(f64::NAN, 0.5).is_err());
        let three = MeanVector::new(vec![0.5, 0.5, 0.5]).unwrap();
        assert!(matches!(
            classify(&three),
            Err(Error::Dimension { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn mean_vector_round_trips_through_json() {
        let mv = MeanVector::pair(0.6, 0.55).unwrap();
        let js = serde_json::to_string(&mv).unwrap();
        assert_eq!(js, "[0.6,0.55]");
        let back: MeanVector = serde_json::from_str(&js).unwrap();
        assert_eq!(back, mv);
        let label = classify(&mv).unwrap();
        let js = serde_json::to_string(&label).unwrap();
        assert!(js.contains("\"AREA_I\""), "{js}");
        let back: CaseLabel = serde_json::from_str(&js).unwrap();
        assert_eq!(back, label);
    }
}
