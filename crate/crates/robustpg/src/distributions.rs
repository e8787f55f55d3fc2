//! Worst-case joint distributions attaining each revenue guarantee.
//!
//! Every two-agent case shares one geometry, parametrized by a supporting
//! line `a1·v1 + a2·v2 ≥ b`, per-agent top locations `(T1, T2)`, and the
//! interior scale `K` (twice the guarantee):
//!
//! ```text
//! interior density   K / (v1 + v2)^3        on the region above the line,
//! edge density       (K/2) / (T_i + v_j)^2  along v_i = T_i, v_j ∈ [e_i, T_j),
//! corner atom        K / (2 (T1 + T2))      at (T1, T2).
//! ```
//!
//! The edge lower endpoints `e_i` are where the supporting line meets the
//! edge; they are stored explicitly because one degenerate configuration
//! (a vertical supporting line created by a unit mean) cannot recover its
//! edge endpoint from the line coefficients alone.
//!
//! The induced per-agent marginal is `g / (x + ℓ(x))^2` with `g = K/2`,
//! where `ℓ(x)` is the other agent's entry value at own value `x`; it
//! splits at `x* = b/a_i` into a piece where the line binds and a free
//! piece `g/x^2`, plus an atom `g / (T_i + e_i)` at the top. Conditionals
//! are power-law: given the other agent at `y < T_j` the survival of own
//! value is `((ℓ+y)/(x+y))^2` with a top atom; given `y = T_j` the
//! exponent drops to 1. Both invert in closed form, which yields an exact
//! inverse-CDF sampler (marginal piece, then conditional).
//!
//! The other families are a product of per-agent equal-revenue marginals
//! (exclusion-based guarantees), a finite atom list (deterministic
//! provision), and the symmetric N-agent graded-face construction
//! delegated to the dedicated module.
//!
//! Everything here is checked two ways: densities integrate to the stated
//! masses and means by adaptive quadrature, and the sampler reproduces
//! them empirically.

use crate::error::{Error, Result};
use crate::mechanisms::Mechanism;
use crate::nagent;
use crate::numerics::integrate_1d_with_breakpoints;
use crate::params::{CaseParams, SolvedParams};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

/// Tolerance for deciding membership of the support (distance to the
/// supporting line or to an atom location).
pub const SUPPORT_TOL: f64 = 1e-12;

/// Threshold above which a mean is treated as exactly 1 when building the
/// degenerate branches of the geometry.
const TOP_EPS: f64 = 1e-12;

/// Default quadrature tolerance for masses and moments.
const QUAD_TOL: f64 = 1e-12;

/// What the joint distribution puts at a single point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "component", content = "value")]
pub enum Component {
    /// Absolutely continuous density (full-dimensional, or the density
    /// part of a marginal/conditional).
    #[serde(rename = "DENSITY")]
    Density(f64),
    /// One-dimensional density along a top edge of the joint support.
    #[serde(rename = "EDGE")]
    Edge(f64),
    /// Point mass.
    #[serde(rename = "ATOM")]
    Atom(f64),
    /// Nothing at this point.
    #[serde(rename = "ZERO")]
    Zero,
}

impl Component {
    /// Numeric value carried by the component (0 for `Zero`).
    pub fn value(&self) -> f64 {
        match *self {
            Component::Density(x) | Component::Edge(x) | Component::Atom(x) => x,
            Component::Zero => 0.0,
        }
    }

    /// True when the component is an atom.
    pub fn is_atom(&self) -> bool {
        matches!(self, Component::Atom(_))
    }
}

/// Seed and stream index selecting one reproducible sampling sequence.
///
/// Streams with the same seed are mutually independent, which lets batch
/// workers draw disjoint portions of one logical run deterministically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SamplerState {
    /// Base seed of the run.
    pub seed: u64,
    /// Stream index within the run (batch number).
    pub stream: u64,
}

impl SamplerState {
    /// A new state for the given seed, starting at stream 0.
    pub fn new(seed: u64) -> Self {
        SamplerState { seed, stream: 0 }
    }

    /// The same seed at a different stream.
    pub fn with_stream(self, stream: u64) -> Self {
        SamplerState { stream, ..self }
    }

    /// Instantiates the generator for this state.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Shared two-agent worst-case geometry (values in solver order).
#[derive(Debug, Clone, Serialize)]
struct TwoAgentGeometry {
    /// Supporting-line coefficients: support where `a[0]v1 + a[1]v2 ≥ b`.
    a: [f64; 2],
    /// Supporting-line offset.
    b: f64,
    /// Top location of each agent's support.
    top: [f64; 2],
    /// Lower endpoint of the free coordinate along each top edge:
    /// `edge_lo[i]` bounds `v_j` on the edge `v_i = top[i]`.
    edge_lo: [f64; 2],
    /// Interior scale `K` (twice the guarantee).
    k: f64,
}

impl TwoAgentGeometry {
    fn g(&self) -> f64 {
        0.5 * self.k
    }

    /// Entry value of agent `i` when the other agent reports `y`: the
    /// smallest own value on the support, `max(0, (b - a_j y)/a_i)`.
    /// `None` when the line cannot be met at any own value (vertical line
    /// for the other agent, below its threshold).
    fn entry(&self, i: usize, y: f64) -> Option<f64> {
        let (ai, aj) = (self.a[i], self.a[1 - i]);
        if ai == 0.0 {
            if aj * y >= self.b - SUPPORT_TOL {
                Some(0.0)
            } else {
                None
            }
        } else {
            Some(((self.b - aj * y) / ai).max(0.0))
        }
    }

    /// Lower endpoint of agent `i`'s marginal support.
    fn marginal_lo(&self, i: usize) -> f64 {
        self.edge_lo[1 - i]
    }

    /// Own value beyond which the other agent's entry is zero; clamped to
    /// the marginal support interval.
    fn marginal_cut(&self, i: usize) -> f64 {
        let (lo, hi) = (self.marginal_lo(i), self.top[i]);
        if self.a[i] == 0.0 {
            return hi;
        }
        (self.b / self.a[i]).clamp(lo, hi)
    }

    /// Mass of agent `i`'s marginal atom at the top.
    fn marginal_atom(&self, i: usize) -> f64 {
        self.g() / (self.top[i] + self.edge_lo[i])
    }

    fn on_or_above_line(&self, v: &[f64; 2]) -> bool {
        self.a[0] * v[0] + self.a[1] * v[1] >= self.b - SUPPORT_TOL
    }

    fn joint(&self, v: &[f64; 2]) -> Component {
        let at = [v[0] == self.top[0], v[1] == self.top[1]];
        if v[0] > self.top[0] || v[1] > self.top[1] {
            return Component::Zero;
        }
        match (at[0], at[1]) {
            (true, true) => Component::Atom(self.k / (2.0 * (self.top[0] + self.top[1]))),
            (true, false) => {
                if v[1] >= self.edge_lo[0] {
                    Component::Edge(self.g() / (self.top[0] + v[1]).powi(2))
                } else {
                    Component::Zero
                }
            }
            (false, true) => {
                if v[0] >= self.edge_lo[1] {
                    Component::Edge(self.g() / (self.top[1] + v[0]).powi(2))
                } else {
                    Component::Zero
                }
            }
            (false, false) => {
                if self.on_or_above_line(v) {
                    Component::Density(self.k / (v[0] + v[1]).powi(3))
                } else {
                    Component::Zero
                }
            }
        }
    }

    fn marginal(&self, i: usize, x: f64) -> Component {
        let (lo, hi) = (self.marginal_lo(i), self.top[i]);
        if x == hi {
            return Component::Atom(self.marginal_atom(i));
        }
        if x < lo || x > hi {
            return Component::Zero;
        }
        match self.entry(1 - i, x) {
            Some(ell) => Component::Density(self.g() / (x + ell).powi(2)),
            None => Component::Zero,
        }
    }

    /// Conditional of agent `i` given the other agent's value `y`.
    /// Survival is `(c/(x+y))^p` with `c = ℓ_i(y) + y`; `p = 2` off the
    /// other agent's top and `p = 1` on it.
    fn conditional(&self, i: usize, x: f64, y: f64) -> Result<Component> {
        let j = 1 - i;
        if y < self.marginal_lo(j) - SUPPORT_TOL || y > self.top[j] + SUPPORT_TOL {
            return Err(Error::Domain(format!(
                "conditioning value {y} lies outside the other agent's marginal support"
            )));
        }
        let at_top_j = y == self.top[j];
        // on the other agent's top the mass lives on that stored edge,
        // whose lower endpoint can exceed what the line formula reports
        // (vertical-line degeneration); off it the line is authoritative
        let ell = if at_top_j {
            self.edge_lo[j]
        } else {
            match self.entry(i, y) {
                Some(e) => e.min(self.top[i]),
                None => {
                    return Err(Error::Domain(format!(
                        "conditioning value {y} carries no conditional mass"
                    )))
                }
            }
        };
        let c = ell + y;
        if x == self.top[i] {
            let surv = c / (self.top[i] + y);
            return Ok(Component::Atom(if at_top_j { surv } else { surv * surv }));
        }
        if x < ell || x > self.top[i] {
            return Ok(Component::Zero);
        }
        Ok(Component::Density(if at_top_j {
            c / (x + y).powi(2)
        } else {
            2.0 * c * c / (x + y).powi(3)
        }))
    }

    /// Draws one profile by inverse CDF: marginal of agent 0 (line piece,
    /// free piece, atom), then the conditional of agent 1.
    fn sample<G: Rng + ?Sized>(&self, rng: &mut G, out: &mut [f64; 2]) {
        let i = 0usize;
        let (lo, hi) = (self.marginal_lo(i), self.top[i]);
        let cut = self.marginal_cut(i);
        let g = self.g();
        let (ai, aj) = (self.a[i], self.a[1 - i]);
        // piece masses
        let line_mass = if cut > lo {
            let delta = aj - ai;
            if aj == 0.0 {
                0.0
            } else if delta.abs() * (cut - lo) < 1e-9 * self.b {
                // essentially uniform: density g·aj²/b² across the piece
                g * aj * aj / (self.b * self.b) * (cut - lo)
            } else {
                g * aj * aj / delta * (1.0 / (delta * lo + self.b) - 1.0 / (delta * cut + self.b))
            }
        } else {
            0.0
        };
        let free_mass = if hi > cut { g * (1.0 / cut - 1.0 / hi) } else { 0.0 };
        let atom_mass = self.marginal_atom(i);
        let total = line_mass + free_mass + atom_mass;
        let mut u = rng.random::<f64>() * total;
        let x = if u < line_mass {
            let delta = aj - ai;
            if delta.abs() * (cut - lo) < 1e-9 * self.b {
                let dens = g * aj * aj / (self.b * self.b);
                lo + u / dens
            } else {
                let inv = 1.0 / (delta * lo + self.b) - u * delta / (g * aj * aj);
                ((1.0 / inv - self.b) / delta).clamp(lo, cut)
            }
        } else {
            u -= line_mass;
            if u < free_mass {
                (1.0 / (1.0 / cut - u / g)).clamp(cut, hi)
            } else {
                hi
            }
        };
        // conditional of agent 1 given agent 0 at x (stored edge endpoint
        // when x sits on agent 0's top, line entry otherwise)
        let ell = if x == hi {
            self.edge_lo[0]
        } else {
            self.entry(1, x).unwrap_or(self.top[1]).min(self.top[1])
        };
        let c = ell + x;
        let u2: f64 = rng.random();
        let y = if x == self.top[i] {
            // exponent-1 tail: survival c/(y+x)
            c / (1.0 - u2) - x
        } else {
            c / (1.0 - u2).sqrt() - x
        };
        out[0] = x;
        out[1] = if y >= self.top[1] { self.top[1] } else { y };
    }

    /// Expected value of `f` under the joint (interior + edges + atom),
    /// by iterated adaptive quadrature.
    fn expect(&self, f: &dyn Fn(&[f64; 2]) -> f64, tol: f64) -> Result<f64> {
        let g = self.g();
        let mut total = self.k / (2.0 * (self.top[0] + self.top[1])) * f(&[self.top[0], self.top[1]]);
        for i in 0..2 {
            let (lo, hi) = (self.edge_lo[i], self.top[1 - i]);
            if hi > lo {
                let ti = self.top[i];
                total += integrate_1d_with_breakpoints(
                    |y| {
                        let v = if i == 0 { [ti, y] } else { [y, ti] };
                        f(&v) * g / (ti + y).powi(2)
                    },
                    lo,
                    hi,
                    &[],
                    tol,
                )?;
            }
        }
        let (lo0, hi0) = (self.marginal_lo(0), self.top[0]);
        if hi0 > lo0 {
            let cut = self.marginal_cut(0);
            let inner_tol = (tol * 0.1).max(1e-13);
            total += integrate_1d_with_breakpoints(
                |x| {
                    let e1 = match self.entry(1, x) {
                        Some(e) => e.min(self.top[1]),
                        None => return 0.0,
                    };
                    if self.top[1] <= e1 {
                        return 0.0;
                    }
                    integrate_1d_with_breakpoints(
                        |y| f(&[x, y]) * self.k / (x + y).powi(3),
                        e1,
                        self.top[1],
                        &[],
                        inner_tol,
                    )
                    .unwrap_or(f64::NAN)
                },
                lo0,
                hi0,
                &[cut],
                tol,
            )?;
        }
        if total.is_nan() {
            return Err(Error::Quadrature("inner quadrature failed".into()));
        }
        Ok(total)
    }
}

/// Case-specific representation behind [`WorstCaseDistribution`].
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "family")]
enum Family {
    /// Two-agent supporting-line geometry.
    #[serde(rename = "TWO_AGENT")]
    TwoAgent(TwoAgentGeometry),
    /// Symmetric N-agent graded-face construction.
    #[serde(rename = "N_AGENT")]
    NAgent { n: usize, r: f64 },
    /// Independent per-agent equal-revenue marginals.
    #[serde(rename = "PRODUCT")]
    Product { gamma: Vec<f64> },
    /// Finite list of atoms (deterministic provision).
    #[serde(rename = "ATOMS")]
    Atoms { atoms: Vec<(Vec<f64>, f64)> },
}

/// A revenue-minimizing joint distribution for one solved case, exposing
/// densities, marginals, conditionals, atoms, exact sampling, quadrature
/// moments, and expected revenue under a mechanism.
///
/// All public methods take and return values in the caller's original
/// agent order; the internal geometry lives in solver order.
#[derive(Debug, Clone, Serialize)]
pub struct WorstCaseDistribution {
    solved: SolvedParams,
    family: Family,
}

impl WorstCaseDistribution {
    /// Builds the worst-case joint for a solved case.
    pub fn from_solved(solved: &SolvedParams) -> Result<Self> {
        let family = match &solved.params {
            CaseParams::SymLow { r1, .. } => Family::TwoAgent(TwoAgentGeometry {
                a: [1.0, 1.0],
                b: *r1,
                top: [1.0, 1.0],
                edge_lo: [0.0, 0.0],
                k: *r1,
            }),
            CaseParams::SymHigh { r2 } => Family::TwoAgent(TwoAgentGeometry {
                a: [1.0, 1.0],
                b: 1.0 + r2,
                top: [1.0, 1.0],
                edge_lo: [*r2, *r2],
                k: (1.0 + r2) * (1.0 + r2),
            }),
            CaseParams::Area1 { s1, s2, .. } => Family::TwoAgent(TwoAgentGeometry {
                a: [*s2, *s1],
                b: s1 * s2,
                top: [1.0, 1.0],
                edge_lo: [0.0, 0.0],
                k: 2.0 * s1 * s2 / (s1 + s2),
            }),
            CaseParams::Area2 { t1, t2 } => {
                let degenerate = *t1 >= 1.0 - TOP_EPS;
                Family::TwoAgent(TwoAgentGeometry {
                    a: [1.0 - t2, 1.0 - t1],
                    b: 1.0 - t1 * t2,
                    top: [1.0, 1.0],
                    // the vertical-line degeneration loses the first
                    // edge's endpoint, so it is pinned here explicitly
                    edge_lo: if degenerate { [*t2, 1.0] } else { [*t2, *t1] },
                    k: (1.0 + t1) * (1.0 + t2),
                })
            }
            CaseParams::Area3 { u1, u2, .. } => Family::TwoAgent(TwoAgentGeometry {
                a: [1.0, u1 - u2],
                b: *u1,
                top: [1.0, 1.0],
                edge_lo: [0.0, *u2],
                k: 2.0 * u1 * (1.0 + u2) / (1.0 + u1),
            }),
            CaseParams::Area4 { w1, w2 } => Family::TwoAgent(TwoAgentGeometry {
                a: [1.0, 0.0],
                b: *w1,
                top: [1.0, *w2],
                edge_lo: [0.0, *w1],
                k: 2.0 * w1,
            }),
            CaseParams::NAgent { n, r } => Family::NAgent { n: *n, r: *r },
            CaseParams::Excludable { gamma } => Family::Product { gamma: gamma.clone() },
            CaseParams::Deterministic { d1, d2, dictator } => {
                let means = solved.solver_means();
                let atoms = if *dictator {
                    let p = (1.0 - means[0]).sqrt();
                    vec![
                        (vec![*d1, means[1]], p),
                        (vec![1.0, means[1]], 1.0 - p),
                    ]
                } else {
                    let p1 = 0.5 * (1.0 - d1);
                    let p2 = 0.5 * (1.0 - d2);
                    let rest = 1.0 - p1 - p2;
                    if rest < -1e-12 {
                        return Err(Error::NoSolution(
                            "deterministic atom masses are infeasible".into(),
                        ));
                    }
                    vec![
                        (vec![*d1, 1.0], p1),
                        (vec![1.0, *d2], p2),
                        (vec![1.0, 1.0], rest.max(0.0)),
                    ]
                };
                Family::Atoms {
                    atoms: atoms.into_iter().filter(|(_, p)| *p > 0.0).collect(),
                }
            }
        };
        Ok(WorstCaseDistribution {
            solved: solved.clone(),
            family,
        })
    }

    /// The solved case this distribution was built from.
    pub fn solved(&self) -> &SolvedParams {
        &self.solved
    }

    /// Number of agents.
    pub fn n_agents(&self) -> usize {
        self.solved.permutation.len()
    }

    fn to_solver_order(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.n_agents() {
            return Err(Error::Domain(format!(
                "profile has {} entries, expected {}",
                v.len(),
                self.n_agents()
            )));
        }
        for &x in v {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::Domain(format!("value {x} outside [0, 1]")));
            }
        }
        Ok(self.solved.permutation.iter().map(|&p| v[p]).collect())
    }

    fn from_solver_order(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for (k, &p) in self.solved.permutation.iter().enumerate() {
            out[p] = v[k];
        }
        out
    }

    /// Solver-order rank of a caller-order agent index.
    fn solver_rank(&self, agent: usize) -> Result<usize> {
        self.solved
            .permutation
            .iter()
            .position(|&p| p == agent)
            .ok_or_else(|| Error::Domain(format!("agent index {agent} out of range")))
    }

    /// Joint density/edge/atom component at a profile.
    pub fn density(&self, v: &[f64]) -> Result<Component> {
        let sv = self.to_solver_order(v)?;
        Ok(match &self.family {
            Family::TwoAgent(geo) => geo.joint(&[sv[0], sv[1]]),
            Family::NAgent { n, r } => {
                let s: f64 = sv.iter().sum();
                let k = nagent::low_agent_count(&sv);
                if s < *r + (*n as f64 - 1.0) - SUPPORT_TOL {
                    Component::Zero
                } else if k == 0 {
                    Component::Atom(nagent::top_atom_mass(*n, *r))
                } else if k == *n {
                    Component::Density(nagent::face_density(*n, *r, &sv))
                } else {
                    Component::Edge(nagent::face_density(*n, *r, &sv))
                }
            }
            Family::Product { gamma } => {
                let mut dens = 1.0;
                let mut atoms = 0usize;
                for (&x, &g) in sv.iter().zip(gamma) {
                    if x == 1.0 {
                        dens *= g;
                        atoms += 1;
                    } else if x >= g {
                        dens *= g / (x * x);
                    } else {
                        return Ok(Component::Zero);
                    }
                }
                if atoms == sv.len() {
                    Component::Atom(dens)
                } else if atoms > 0 {
                    Component::Edge(dens)
                } else {
                    Component::Density(dens)
                }
            }
            Family::Atoms { atoms } => atoms
                .iter()
                .find(|(loc, _)| {
                    loc.iter()
                        .zip(&sv)
                        .all(|(&a, &x)| (a - x).abs() <= SUPPORT_TOL)
                })
                .map(|(_, p)| Component::Atom(*p))
                .unwrap_or(Component::Zero),
        })
    }

    /// Marginal of one agent at a value: density part or top atom.
    pub fn marginal(&self, agent: usize, x: f64) -> Result<Component> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("value {x} outside [0, 1]")));
        }
        let rank = self.solver_rank(agent)?;
        Ok(match &self.family {
            Family::TwoAgent(geo) => geo.marginal(rank, x),
            Family::NAgent { n, r } => {
                if x == 1.0 {
                    Component::Atom(nagent::marginal_atom_mass(*n, *r))
                } else {
                    let d = nagent::marginal_density(*n, *r, x);
                    if d > 0.0 {
                        Component::Density(d)
                    } else {
                        Component::Zero
                    }
                }
            }
            Family::Product { gamma } => {
                let g = gamma[rank];
                if x == 1.0 {
                    Component::Atom(g)
                } else if x >= g {
                    Component::Density(g / (x * x))
                } else {
                    Component::Zero
                }
            }
            Family::Atoms { atoms } => {
                let mass: f64 = atoms
                    .iter()
                    .filter(|(loc, _)| (loc[rank] - x).abs() <= SUPPORT_TOL)
                    .map(|(_, p)| p)
                    .sum();
                if mass > 0.0 {
                    Component::Atom(mass)
                } else {
                    Component::Zero
                }
            }
        })
    }

    /// Conditional of one agent's value given the full profile of the
    /// others (two-agent and product families only).
    pub fn conditional(&self, agent: usize, x: f64, others: &[f64]) -> Result<Component> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("value {x} outside [0, 1]")));
        }
        let rank = self.solver_rank(agent)?;
        match &self.family {
            Family::TwoAgent(geo) => {
                if others.len() != 1 {
                    return Err(Error::Domain(
                        "two-agent conditional needs exactly one conditioning value".into(),
                    ));
                }
                geo.conditional(rank, x, others[0])
            }
            Family::Product { gamma } => {
                // independence: the conditional is the own marginal
                let g = gamma[rank];
                Ok(if x == 1.0 {
                    Component::Atom(g)
                } else if x >= g {
                    Component::Density(g / (x * x))
                } else {
                    Component::Zero
                })
            }
            _ => Err(Error::Domain(
                "conditionals are available for two-agent and product families".into(),
            )),
        }
    }

    /// All joint atoms as `(profile, mass)` pairs in caller order.
    pub fn atoms(&self) -> Vec<(Vec<f64>, f64)> {
        match &self.family {
            Family::TwoAgent(geo) => vec![(
                self.from_solver_order(&[geo.top[0], geo.top[1]]),
                geo.k / (2.0 * (geo.top[0] + geo.top[1])),
            )],
            Family::NAgent { n, r } => {
                vec![(vec![1.0; *n], nagent::top_atom_mass(*n, *r))]
            }
            Family::Product { gamma } => {
                vec![(vec![1.0; gamma.len()], gamma.iter().product())]
            }
            Family::Atoms { atoms } => atoms
                .iter()
                .map(|(loc, p)| (self.from_solver_order(loc), *p))
                .collect(),
        }
    }

    /// The atom at the top profile, as `(profile, mass)` in caller order.
    pub fn top_atom(&self) -> (Vec<f64>, f64) {
        match &self.family {
            Family::Atoms { atoms } => {
                let (loc, p) = atoms
                    .iter()
                    .max_by(|a, b| {
                        let sa: f64 = a.0.iter().sum();
                        let sb: f64 = b.0.iter().sum();
                        sa.partial_cmp(&sb).unwrap()
                    })
                    .expect("atom list is never empty");
                (self.from_solver_order(loc), *p)
            }
            _ => self.atoms().pop().expect("one atom"),
        }
    }

    /// True when the profile belongs to the support of the joint.
    pub fn supports(&self, v: &[f64]) -> Result<bool> {
        let sv = self.to_solver_order(v)?;
        Ok(match &self.family {
            Family::TwoAgent(geo) => {
                sv[0] <= geo.top[0] + SUPPORT_TOL
                    && sv[1] <= geo.top[1] + SUPPORT_TOL
                    && geo.on_or_above_line(&[sv[0], sv[1]])
            }
            Family::NAgent { n, r } => {
                sv.iter().sum::<f64>() >= *r + (*n as f64 - 1.0) - SUPPORT_TOL
            }
            Family::Product { gamma } => sv
                .iter()
                .zip(gamma)
                .all(|(&x, &g)| x >= g - SUPPORT_TOL),
            Family::Atoms { atoms } => atoms.iter().any(|(loc, _)| {
                loc.iter()
                    .zip(&sv)
                    .all(|(&a, &x)| (a - x).abs() <= SUPPORT_TOL)
            }),
        })
    }

    /// Total mass by quadrature of the per-agent marginal (first agent)
    /// plus its atom; equals 1 when the construction is consistent.
    pub fn total_mass(&self) -> Result<f64> {
        self.marginal_integral(0, false)
    }

    /// First moments of every agent by quadrature; equal the target means
    /// when the construction is consistent.
    pub fn moments(&self) -> Result<Vec<f64>> {
        (0..self.n_agents())
            .map(|i| self.marginal_integral(i, true))
            .collect()
    }

    /// Integral of the marginal of agent `i` (times `x` when `moment`),
    /// including the top atom.
    fn marginal_integral(&self, agent: usize, moment: bool) -> Result<f64> {
        let rank = self.solver_rank(agent)?;
        let weight = |x: f64| if moment { x } else { 1.0 };
        match &self.family {
            Family::TwoAgent(geo) => {
                let (lo, hi) = (geo.marginal_lo(rank), geo.top[rank]);
                let atom = geo.marginal_atom(rank) * weight(hi);
                if hi <= lo {
                    return Ok(atom);
                }
                let cut = geo.marginal_cut(rank);
                let g = geo.g();
                let body = integrate_1d_with_breakpoints(
                    |x| {
                        let ell = geo.entry(1 - rank, x).unwrap_or(f64::INFINITY);
                        if ell.is_finite() {
                            weight(x) * g / (x + ell).powi(2)
                        } else {
                            0.0
                        }
                    },
                    lo,
                    hi,
                    &[cut],
                    QUAD_TOL,
                )?;
                Ok(body + atom)
            }
            Family::NAgent { n, r } => {
                if *r >= 1.0 {
                    return Ok(weight(1.0));
                }
                let body = integrate_1d_with_breakpoints(
                    |x| weight(x) * nagent::marginal_density(*n, *r, x),
                    *r,
                    1.0,
                    &[],
                    QUAD_TOL,
                )?;
                Ok(body + nagent::marginal_atom_mass(*n, *r) * weight(1.0))
            }
            Family::Product { gamma } => {
                let g = gamma[rank];
                if g >= 1.0 {
                    return Ok(weight(1.0));
                }
                let body = integrate_1d_with_breakpoints(
                    |x| weight(x) * g / (x * x),
                    g,
                    1.0,
                    &[],
                    QUAD_TOL,
                )?;
                Ok(body + g * weight(1.0))
            }
            Family::Atoms { atoms } => Ok(atoms
                .iter()
                .map(|(loc, p)| p * weight(loc[rank]))
                .sum()),
        }
    }

    /// Expected total payment collected by a mechanism under this joint,
    /// by quadrature (two-agent, product, and atom families).
    ///
    /// The N-agent family has no low-dimensional quadrature reduction
    /// that stays independent of the mechanism's structure; use Monte
    /// Carlo for it.
    pub fn expected_revenue(&self, mech: &Mechanism) -> Result<f64> {
        if mech.n_agents() != self.n_agents() {
            return Err(Error::Domain(
                "mechanism and distribution disagree on the number of agents".into(),
            ));
        }
        let rev = |v: &[f64]| -> f64 { mech.revenue(v).unwrap_or(f64::NAN) };
        match &self.family {
            Family::TwoAgent(geo) => {
                let total = geo.expect(
                    &|sv| rev(&self.from_solver_order(&[sv[0], sv[1]])),
                    1e-11,
                )?;
                if total.is_nan() {
                    return Err(Error::Quadrature("revenue evaluation failed".into()));
                }
                Ok(total)
            }
            Family::Product { gamma } => {
                // payments decouple: t_i depends only on v_i, so sum the
                // per-agent one-dimensional expectations
                let mut total = 0.0;
                for (rank, &g) in gamma.iter().enumerate() {
                    let agent = self.solved.permutation[rank];
                    let pay = |x: f64| -> Result<f64> {
                        let mut v = vec![0.0; gamma.len()];
                        for (rk, &gg) in gamma.iter().enumerate() {
                            v[self.solved.permutation[rk]] = gg;
                        }
                        v[agent] = x;
                        mech.payment(&v, agent)
                    };
                    if g < 1.0 {
                        total += integrate_1d_with_breakpoints(
                            |x| pay(x).unwrap_or(f64::NAN) * g / (x * x),
                            g,
                            1.0,
                            &[],
                            1e-11,
                        )?;
                    }
                    total += g * pay(1.0)?;
                }
                if total.is_nan() {
                    return Err(Error::Quadrature("revenue evaluation failed".into()));
                }
                Ok(total)
            }
            Family::Atoms { atoms } => {
                let mut total = 0.0;
                for (loc, p) in atoms {
                    total += p * mech.revenue(&self.from_solver_order(loc))?;
                }
                Ok(total)
            }
            Family::NAgent { .. } => Err(Error::Domain(
                "expected revenue for the N-agent family is estimated by Monte Carlo".into(),
            )),
        }
    }

    /// Weighted virtual-value functional at an off-atom profile `v`
    /// (two-agent families):
    ///
    /// ```text
    /// Φ(v) = π(v)·(v1+v2) − Σ_i [ π_j(v_j) − Π_i(v_i, v_j) ]
    /// ```
    ///
    /// where `π` is the interior density, `π_j` the other agent's full
    /// marginal mass rate at `v_j` (interior slice plus edge), and `Π_i`
    /// the partial integral of `π(·, v_j)` up to `v_i`. The slice
    /// integrals are evaluated by quadrature rather than closed form so
    /// the identity `Φ = 0` on the support is a genuine cross-check.
    /// Zero on the interior of the support, nonpositive elsewhere.
    pub fn phi(&self, v: &[f64]) -> Result<f64> {
        let geo = match &self.family {
            Family::TwoAgent(geo) => geo,
            _ => {
                return Err(Error::Domain(
                    "the virtual-value functional is defined for two-agent families".into(),
                ))
            }
        };
        let sv = self.to_solver_order(v)?;
        if sv[0] >= geo.top[0] || sv[1] >= geo.top[1] {
            return Err(Error::Domain(
                "virtual-value evaluation requires both values below their tops".into(),
            ));
        }
        let interior = |x: f64, y: f64| -> f64 {
            if geo.a[0] * x + geo.a[1] * y >= geo.b - SUPPORT_TOL {
                geo.k / (x + y).powi(3)
            } else {
                0.0
            }
        };
        let pi = interior(sv[0], sv[1]);
        let mut phi = pi * (sv[0] + sv[1]);
        for i in 0..2 {
            let (own, other) = (sv[i], sv[1 - i]);
            let slice = |x: f64| if i == 0 { interior(x, other) } else { interior(other, x) };
            let entry = geo.entry(i, other).unwrap_or(f64::INFINITY);
            let breaks: Vec<f64> = if entry.is_finite() && entry > 0.0 && entry < geo.top[i] {
                vec![entry]
            } else {
                vec![]
            };
            let upper = integrate_1d_with_breakpoints(
                &slice,
                0.0,
                geo.top[i],
                &breaks,
                QUAD_TOL,
            )?;
            let partial = integrate_1d_with_breakpoints(
                &slice,
                0.0,
                own,
                &breaks
                    .iter()
                    .copied()
                    .filter(|&b| b < own)
                    .collect::<Vec<_>>(),
                QUAD_TOL,
            )?;
            let edge = if other >= geo.edge_lo[i] && other < geo.top[1 - i] {
                geo.g() / (geo.top[i] + other).powi(2)
            } else {
                0.0
            };
            // π_j(v_j) − Π_i = remaining own-direction mass above v_i
            phi -= upper + edge - partial;
        }
        Ok(phi)
    }

    /// Draws `count` profiles (caller order) for one sampler state.
    pub fn sample_profiles(&self, state: SamplerState, count: usize) -> Vec<Vec<f64>> {
        let mut rng = state.rng();
        let mut out = Vec::with_capacity(count);
        let mut buf = vec![0.0; self.n_agents()];
        for _ in 0..count {
            self.sample_into(&mut rng, &mut buf);
            out.push(buf.clone());
        }
        out
    }

    /// Draws one profile into `buf` (caller order) from an existing
    /// generator.
    pub fn sample_into<G: Rng + ?Sized>(&self, rng: &mut G, buf: &mut [f64]) {
        debug_assert_eq!(buf.len(), self.n_agents());
        match &self.family {
            Family::TwoAgent(geo) => {
                let mut sv = [0.0; 2];
                geo.sample(rng, &mut sv);
                for (k, &p) in self.solved.permutation.iter().enumerate() {
                    buf[p] = sv[k];
                }
            }
            Family::NAgent { n, r } => nagent::sample_into(*n, *r, rng, buf),
            Family::Product { gamma } => {
                for (rank, &g) in gamma.iter().enumerate() {
                    let u: f64 = rng.random();
                    let x = if u < 1.0 - g { g / (1.0 - u) } else { 1.0 };
                    buf[self.solved.permutation[rank]] = x.min(1.0);
                }
            }
            Family::Atoms { atoms } => {
                let mut u = rng.random::<f64>();
                let mut chosen = &atoms[atoms.len() - 1].0;
                for (loc, p) in atoms {
                    if u < *p {
                        chosen = loc;
                        break;
                    }
                    u -= p;
                }
                for (k, &p) in self.solved.permutation.iter().enumerate() {
                    buf[p] = chosen[k];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{solve, solve_deterministic, solve_excludable, solve_nagent};
    use crate::regions::MeanVector;

    fn dist(m1: f64, m2: f64) -> WorstCaseDistribution {
        let solved = solve(&MeanVector::pair(m1, m2).unwrap()).unwrap();
        WorstCaseDistribution::from_solved(&solved).unwrap()
    }

    fn two_agent_means() -> Vec<(f64, f64)> {
        vec![
            (0.5, 0.5),
            (0.84, 0.84),
            (0.6, 0.55),
            (0.95, 0.8),
            (0.8, 0.55),
            (0.9, 0.3),
        ]
    }

    #[test]
    fn mass_and_moments_match_targets() {
        for (m1, m2) in two_agent_means() {
            let d = dist(m1, m2);
            let mass = d.total_mass().unwrap();
            assert!((mass - 1.0).abs() < 1e-8, "({m1},{m2}): mass {mass}");
            let mom = d.moments().unwrap();
            assert!((mom[0] - m1).abs() < 1e-8, "({m1},{m2}): E[v1] {}", mom[0]);
            assert!((mom[1] - m2).abs() < 1e-8, "({m1},{m2}): E[v2] {}", mom[1]);
        }
    }

    #[test]
    fn mass_and_moments_other_families() {
        let ex = WorstCaseDistribution::from_solved(
            &solve_excludable(&MeanVector::new(vec![0.9, 0.5]).unwrap()).unwrap(),
        )
        .unwrap();
        assert!((ex.total_mass().unwrap() - 1.0).abs() < 1e-9);
        let mom = ex.moments().unwrap();
        assert!((mom[0] - 0.9).abs() < 1e-9);
        assert!((mom[1] - 0.5).abs() < 1e-9);

        let na = WorstCaseDistribution::from_solved(&solve_nagent(3, 0.9).unwrap()).unwrap();
        assert!((na.total_mass().unwrap() - 1.0).abs() < 1e-8);
        for m in na.moments().unwrap() {
            assert!((m - 0.9).abs() < 1e-8);
        }

        let det = WorstCaseDistribution::from_solved(
            &solve_deterministic(&MeanVector::pair(0.9, 0.9).unwrap()).unwrap(),
        )
        .unwrap();
        assert!((det.total_mass().unwrap() - 1.0).abs() < 1e-12);
        let mom = det.moments().unwrap();
        assert!((mom[0] - 0.9).abs() < 1e-12 && (mom[1] - 0.9).abs() < 1e-12);
    }

    #[test]
    fn symmetric_low_reference_values() {
        // symmetric low-mean case at m = 1/2: corner atom r1/4 and
        // marginal atom r1/2
        let d = dist(0.5, 0.5);
        let r1 = 0.42414636877513880766_f64;
        let atoms = d.atoms();
        assert_eq!(atoms.len(), 1);
        assert!((atoms[0].1 - r1 / 4.0).abs() < 1e-12);
        assert!((d.marginal(0, 1.0).unwrap().value() - r1 / 2.0).abs() < 1e-12);
        // interior density r1/(v1+v2)^3 above the line v1+v2 = r1
        let v = [0.4, 0.3];
        match d.density(&v).unwrap() {
            Component::Density(x) => assert!((x - r1 / 0.7_f64.powi(3)).abs() < 1e-12),
            other => panic!("expected density, got {other:?}"),
        }
        assert_eq!(d.density(&[0.1, 0.1]).unwrap(), Component::Zero);
    }

    #[test]
    fn unit_mean_asymmetric_atom_mass_matches_reference() {
        // top atom w1/(1 + w2) at means (2/e, ln2/e): frozen value
        let d = dist(2.0 / std::f64::consts::E, std::f64::consts::LN_2 / std::f64::consts::E);
        let (loc, mass) = d.top_atom();
        assert!((mass - 0.26894142136999512075).abs() < 1e-12);
        assert!((loc[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn high_mean_conditionals_follow_power_law() {
        let d = dist(0.84, 0.84);
        let r2 = match d.solved().params {
            CaseParams::SymHigh { r2 } => r2,
            _ => unreachable!(),
        };
        // off the top: survival ((ℓ+y)/(x+y))² with ℓ = 1 + r2 − y
        let y = 0.8;
        let c = 1.0 + r2;
        match d.conditional(0, 0.9, &[y]).unwrap() {
            Component::Density(f) => {
                assert!((f - 2.0 * c * c / (0.9 + y).powi(3)).abs() < 1e-12)
            }
            other => panic!("expected density, got {other:?}"),
        }
        match d.conditional(0, 1.0, &[y]).unwrap() {
            Component::Atom(p) => assert!((p - (c / (1.0 + y)).powi(2)).abs() < 1e-12),
            other => panic!("expected atom, got {other:?}"),
        }
        // on the top: exponent drops to 1
        match d.conditional(0, 1.0, &[1.0]).unwrap() {
            Component::Atom(p) => assert!((p - c / 2.0).abs() < 1e-12),
            other => panic!("expected atom, got {other:?}"),
        }
        // conditioning at the entry threshold: all mass at the top
        match d.conditional(0, 1.0, &[r2]).unwrap() {
            Component::Atom(p) => assert!((p - 1.0).abs() < 1e-12),
            other => panic!("expected atom, got {other:?}"),
        }
    }

    #[test]
    fn conditional_mass_sums_to_one() {
        for (m1, m2) in two_agent_means() {
            let d = dist(m1, m2);
            for y in [0.35, 0.7, 1.0] {
                if d.marginal(1, y).unwrap() == Component::Zero {
                    continue;
                }
                let atom = match d.conditional(0, 1.0, &[y]).unwrap() {
                    Component::Atom(p) => p,
                    Component::Zero => 0.0,
                    other => panic!("unexpected {other:?}"),
                };
                let body = integrate_1d_with_breakpoints(
                    |x| d.conditional(0, x, &[y]).unwrap().value(),
                    0.0,
                    1.0 - 1e-12,
                    &[0.25, 0.5, 0.75],
                    1e-10,
                )
                .unwrap();
                assert!(
                    (atom + body - 1.0).abs() < 1e-7,
                    "({m1},{m2}) y={y}: conditional mass {}",
                    atom + body
                );
            }
        }
    }

    #[test]
    fn degenerate_unit_mean_cases_are_consistent() {
        // vertical supporting line: first agent fully at the top
        let d = dist(1.0, 0.8);
        assert!((d.total_mass().unwrap() - 1.0).abs() < 1e-9);
        let mom = d.moments().unwrap();
        assert!((mom[0] - 1.0).abs() < 1e-9 && (mom[1] - 0.8).abs() < 1e-9);
        assert!((d.marginal(0, 1.0).unwrap().value() - 1.0).abs() < 1e-12);
        // the whole conditional of agent 0 sits at 1 for any interior y
        match d.conditional(0, 1.0, &[0.5]).unwrap() {
            Component::Atom(p) => assert!((p - 1.0).abs() < 1e-12),
            other => panic!("expected atom, got {other:?}"),
        }

        // horizontal supporting line at full symmetric mean
        let d2 = dist(1.0, 1.0);
        assert!((d2.total_mass().unwrap() - 1.0).abs() < 1e-12);
        let atoms = d2.atoms();
        assert_eq!(atoms.len(), 1);
        assert!((atoms[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampler_matches_marginals_empirically() {
        for (m1, m2) in [(0.5, 0.5), (0.95, 0.8), (0.9, 0.3)] {
            let d = dist(m1, m2);
            let rounds = 120_000usize;
            let draws = d.sample_profiles(SamplerState::new(42), rounds);
            let mut sums = [0.0f64; 2];
            let mut atom_hits = 0usize;
            let (top, mass) = d.top_atom();
            for v in &draws {
                sums[0] += v[0];
                sums[1] += v[1];
                if (v[0] - top[0]).abs() < 1e-12 && (v[1] - top[1]).abs() < 1e-12 {
                    atom_hits += 1;
                }
                assert!(d.supports(v).unwrap(), "({m1},{m2}): sampled off support {v:?}");
            }
            let band = 4.0 * 0.5 / (rounds as f64).sqrt();
            assert!((sums[0] / rounds as f64 - m1).abs() < band);
            assert!((sums[1] / rounds as f64 - m2).abs() < band);
            let freq = atom_hits as f64 / rounds as f64;
            let sigma = (mass * (1.0 - mass) / rounds as f64).sqrt();
            assert!(
                (freq - mass).abs() < 4.0 * sigma,
                "({m1},{m2}): atom freq {freq} vs {mass}"
            );
        }
    }

    #[test]
    fn sampler_is_deterministic_per_state() {
        let d = dist(0.6, 0.55);
        let a = d.sample_profiles(SamplerState::new(7), 64);
        let b = d.sample_profiles(SamplerState::new(7), 64);
        assert_eq!(a, b);
        let c = d.sample_profiles(SamplerState::new(7).with_stream(1), 64);
        assert_ne!(a, c);
    }

    #[test]
    fn sampler_empirical_cdf_tracks_marginal() {
        // Kolmogorov-Smirnov style check of the first agent's marginal
        let d = dist(0.6, 0.55);
        let rounds = 100_000usize;
        let mut xs: Vec<f64> = d
            .sample_profiles(SamplerState::new(3), rounds)
            .into_iter()
            .map(|v| v[0])
            .collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let cdf = |x: f64| -> f64 {
            integrate_1d_with_breakpoints(
                |s| d.marginal(0, s).unwrap().value(),
                0.0,
                x,
                &[],
                1e-10,
            )
            .unwrap()
        };
        let mut worst: f64 = 0.0;
        for q in 1..20 {
            let x = xs[rounds * q / 20];
            if x >= 1.0 {
                continue;
            }
            let emp = xs.iter().filter(|&&s| s <= x).count() as f64 / rounds as f64;
            worst = worst.max((emp - cdf(x)).abs());
        }
        assert!(worst < 4.0 / (rounds as f64).sqrt(), "KS distance {worst}");
    }

    #[test]
    fn expected_revenue_meets_guarantee_under_quadrature() {
        for (m1, m2) in two_agent_means() {
            let solved = solve(&MeanVector::pair(m1, m2).unwrap()).unwrap();
            let d = WorstCaseDistribution::from_solved(&solved).unwrap();
            let mech = Mechanism::from_solved(&solved);
            let got = d.expected_revenue(&mech).unwrap();
            assert!(
                (got - solved.guarantee()).abs() < 1e-7,
                "({m1},{m2}): revenue {got} vs {}",
                solved.guarantee()
            );
        }
    }

    #[test]
    fn expected_revenue_excludable_and_deterministic() {
        let solved = solve_excludable(&MeanVector::new(vec![0.9, 0.5]).unwrap()).unwrap();
        let d = WorstCaseDistribution::from_solved(&solved).unwrap();
        let mech = Mechanism::from_solved(&solved);
        let got = d.expected_revenue(&mech).unwrap();
        assert!((got - solved.guarantee()).abs() < 1e-9, "excludable {got}");

        for means in [(0.9, 0.9), (0.75, 0.5)] {
            let solved =
                solve_deterministic(&MeanVector::pair(means.0, means.1).unwrap()).unwrap();
            let dictator = matches!(
                solved.params,
                CaseParams::Deterministic { dictator: true, .. }
            );
            let d = WorstCaseDistribution::from_solved(&solved).unwrap();
            let mech = Mechanism::from_solved(&solved);
            let got = d.expected_revenue(&mech).unwrap();
            assert!(
                (got - solved.guarantee()).abs() < 1e-12,
                "dictator={dictator}: revenue {got} vs {}",
                solved.guarantee()
            );
        }
    }

    #[test]
    fn phi_vanishes_on_support_and_is_negative_below() {
        for (m1, m2) in two_agent_means() {
            let d = dist(m1, m2);
            let geo = match &d.family {
                Family::TwoAgent(geo) => geo.clone(),
                _ => unreachable!(),
            };
            // a few interior support points strictly between entry and top
            for f in [0.25, 0.6, 0.9] {
                let x = geo.marginal_lo(0) + f * (geo.top[0] - geo.marginal_lo(0));
                let x = x.clamp(1e-3, geo.top[0] - 1e-3);
                let entry = match geo.entry(1, x) {
                    Some(e) => e,
                    None => continue,
                };
                if entry >= geo.top[1] - 1e-3 {
                    continue;
                }
                let y = (entry + 0.55 * (geo.top[1] - entry)).min(geo.top[1] - 1e-3);
                let v = d.from_solver_order(&[x, y]);
                let phi = d.phi(&v).unwrap();
                assert!(
                    phi.abs() < 1e-7,
                    "({m1},{m2}) at {v:?}: phi {phi}"
                );
            }
            // below the supporting line the functional is nonpositive
            if geo.b > 1e-6 && geo.a[1] > 0.0 {
                let x = 0.25 * geo.b / geo.a[0].max(1e-9);
                let y = 0.25 * geo.b / geo.a[1];
                let v = d.from_solver_order(&[x.min(0.9), y.min(0.9)]);
                let phi = d.phi(&v).unwrap();
                assert!(phi <= 1e-9, "({m1},{m2}) off-support phi {phi}");
            }
        }
    }

    #[test]
    fn excludable_coordinates_are_independent() {
        let solved = solve_excludable(&MeanVector::new(vec![0.9, 0.5]).unwrap()).unwrap();
        let d = WorstCaseDistribution::from_solved(&solved).unwrap();
        let rounds = 100_000usize;
        let draws = d.sample_profiles(SamplerState::new(11), rounds);
        let (mut s1, mut s2, mut s12) = (0.0, 0.0, 0.0);
        for v in &draws {
            s1 += v[0];
            s2 += v[1];
            s12 += v[0] * v[1];
        }
        let n = rounds as f64;
        let cov = s12 / n - (s1 / n) * (s2 / n);
        assert!(cov.abs() < 4.0 / n.sqrt() * 0.25, "covariance {cov}");
    }

    #[test]
    fn deterministic_atoms_have_expected_locations() {
        let solved = solve_deterministic(&MeanVector::pair(0.9, 0.9).unwrap()).unwrap();
        let d = WorstCaseDistribution::from_solved(&solved).unwrap();
        let atoms = d.atoms();
        assert_eq!(atoms.len(), 3);
        let total: f64 = atoms.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let (d1, d2) = match solved.params {
            CaseParams::Deterministic { d1, d2, .. } => (d1, d2),
            _ => unreachable!(),
        };
        assert!(atoms
            .iter()
            .any(|(loc, _)| (loc[0] - d1).abs() < 1e-15 && loc[1] == 1.0));
        assert!(atoms
            .iter()
            .any(|(loc, _)| loc[0] == 1.0 && (loc[1] - d2).abs() < 1e-15));
        assert!(atoms.iter().any(|(loc, _)| loc[0] == 1.0 && loc[1] == 1.0));
    }

    #[test]
    fn swapped_means_map_support_back_to_caller_order() {
        // caller order (0.3, 0.9) is solver order (0.9, 0.3)
        let d = dist(0.3, 0.9);
        let (top, _) = d.top_atom();
        // solver tops are (1, w2); caller agent 1 carries the 1
        assert!((top[1] - 1.0).abs() < 1e-15);
        assert!(top[0] < 1.0);
        let mom = d.moments().unwrap();
        assert!((mom[0] - 0.3).abs() < 1e-8);
        assert!((mom[1] - 0.9).abs() < 1e-8);
    }

    #[test]
    fn nagent_family_reports_components() {
        let d = WorstCaseDistribution::from_solved(&solve_nagent(3, 0.9).unwrap()).unwrap();
        let atoms = d.atoms();
        assert_eq!(atoms.len(), 1);
        assert_eq!(atoms[0].0, vec![1.0; 3]);
        assert!(d.density(&[1.0, 1.0, 1.0]).unwrap().is_atom());
        assert!(matches!(
            d.density(&[0.95, 0.97, 0.96]).unwrap(),
            Component::Density(_)
        ));
        assert!(matches!(
            d.density(&[0.95, 1.0, 0.97]).unwrap(),
            Component::Edge(_)
        ));
        assert_eq!(d.density(&[0.2, 0.2, 0.2]).unwrap(), Component::Zero);
    }
}
