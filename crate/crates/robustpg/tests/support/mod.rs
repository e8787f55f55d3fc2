//! Shared fixtures for the integration suites: the standard battery of
//! mean points spanning every solved family, and solve dispatch for it.

use robustpg::params::{
    solve, solve_deterministic, solve_excludable, solve_nagent, SolvedParams,
};
use robustpg::regions::MeanVector;

/// One instance of the verification battery.
#[derive(Debug, Clone)]
pub enum SuitePoint {
    /// Two-agent randomized regime at the given means.
    TwoAgent(f64, f64),
    /// Symmetric N-agent regime.
    NAgent(usize, f64),
    /// Excludable-good regime at the given means.
    Excludable(Vec<f64>),
    /// Deterministic regime at the given means.
    Deterministic(f64, f64),
}

impl SuitePoint {
    /// Solves the instance.
    pub fn solve(&self) -> SolvedParams {
        match self {
            SuitePoint::TwoAgent(m1, m2) => {
                solve(&MeanVector::pair(*m1, *m2).unwrap()).unwrap()
            }
            SuitePoint::NAgent(n, m) => solve_nagent(*n, *m).unwrap(),
            SuitePoint::Excludable(ms) => {
                solve_excludable(&MeanVector::new(ms.clone()).unwrap()).unwrap()
            }
            SuitePoint::Deterministic(m1, m2) => {
                solve_deterministic(&MeanVector::pair(*m1, *m2).unwrap()).unwrap()
            }
        }
    }

    /// Means in caller order.
    // each integration-test binary compiles its own copy of this module,
    // and not all of them call every helper
    #[allow(dead_code)]
    pub fn means(&self) -> Vec<f64> {
        match self {
            SuitePoint::TwoAgent(m1, m2) | SuitePoint::Deterministic(m1, m2) => {
                vec![*m1, *m2]
            }
            SuitePoint::NAgent(n, m) => vec![*m; *n],
            SuitePoint::Excludable(ms) => ms.clone(),
        }
    }
}

/// The standard battery: 25 mean points spanning both symmetric regimes,
/// all four asymmetric areas, N ∈ {2, 3, 4} symmetric, the excludable
/// variant, and both deterministic mechanisms.
pub fn suite() -> Vec<(SuitePoint, &'static str)> {
    use SuitePoint::*;
    let e = std::f64::consts::E;
    let ln2 = std::f64::consts::LN_2;
    vec![
        (TwoAgent(0.3, 0.3), "SYM_I m=0.3"),
        (TwoAgent(0.5, 0.5), "SYM_I m=0.5"),
        (TwoAgent(0.7, 0.7), "SYM_I m=0.7"),
        (TwoAgent(0.75, 0.75), "SYM_II m=0.75"),
        (TwoAgent(0.84, 0.84), "SYM_II m=0.84"),
        (TwoAgent(0.95, 0.95), "SYM_II m=0.95"),
        (TwoAgent(0.6, 0.55), "AREA_I (0.6,0.55)"),
        (TwoAgent(0.5, 0.45), "AREA_I (0.5,0.45)"),
        (TwoAgent(0.7, 0.68), "AREA_I (0.7,0.68)"),
        (TwoAgent(0.95, 0.8), "AREA_II (0.95,0.8)"),
        (TwoAgent(0.85, 0.78), "AREA_II (0.85,0.78)"),
        (TwoAgent(0.8, 0.55), "AREA_III (0.8,0.55)"),
        (TwoAgent(0.9, 0.65), "AREA_III (0.9,0.65)"),
        (TwoAgent(0.6, 0.45), "AREA_III (0.6,0.45)"),
        (TwoAgent(2.0 / e, ln2 / e), "AREA_IV (2/e,ln2/e)"),
        (TwoAgent(0.9, 0.3), "AREA_IV (0.9,0.3)"),
        (TwoAgent(0.5, 0.1), "AREA_IV (0.5,0.1)"),
        (NAgent(2, 0.8), "N_AGENT n=2 m=0.8"),
        (NAgent(3, 0.9), "N_AGENT n=3 m=0.9"),
        (NAgent(4, 0.95), "N_AGENT n=4 m=0.95"),
        (Excludable(vec![2.0 / e, 2.0 / e]), "EXCLUDABLE (2/e,2/e)"),
        (Excludable(vec![0.9, 0.5]), "EXCLUDABLE (0.9,0.5)"),
        (Deterministic(0.9, 0.9), "DETERMINISTIC (0.9,0.9)"),
        (Deterministic(0.95, 0.85), "DETERMINISTIC (0.95,0.85)"),
        (Deterministic(0.75, 0.5), "DICTATOR (0.75,0.5)"),
    ]
}
