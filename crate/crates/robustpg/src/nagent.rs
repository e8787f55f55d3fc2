//! N-agent symmetric worst-case distribution internals.
//!
//! For `n` agents with common mean `m ≥ 1 - (n-1)^(n-1)/n^n` the
//! worst-case joint concentrates on the region `Σv ≥ R` with
//! `R = r + n - 1`. Writing `A(v)` for the set of agents whose value is
//! strictly below 1 and `k = |A(v)|`, the distribution is graded by `k`:
//!
//! ```text
//! face density   k! R^n / (n^(n-1) (Σv)^(k+1))   on each k-face,
//! top atom       (R/n)^n                          at the all-ones profile.
//! ```
//!
//! Two exact consequences drive evaluation and sampling here:
//!
//! * the total mass of a fixed k-face is `R^(n-k) (1-r)^k / n^n`, so the
//!   *pattern* of which agents sit at 1 is i.i.d. Bernoulli with
//!   `P(v_i = 1) = R/n`;
//! * conditional on a pattern with `k` low agents, the profile sum
//!   `S = Σv` has density `k n ((N-S)/S)^(k-1) · R^k / ((1-r)^k S^2)`
//!   — in closed inverse form `S = n/(1+ρ)`, `ρ = (1-U)^(1/k)(1-r)/R` —
//!   and given `S` the low values are `1 - (n-S)·D` for `D` uniform on
//!   the probability simplex.
//!
//! The per-agent marginal has the closed polynomial form
//!
//! ```text
//! f(x) = n^(1-n) Σ_{j=0}^{n-2} C(n-2,j) (n-1-j) R^j (x-r)^(n-2-j)
//! ```
//!
//! on `[r, 1)` with an atom of mass `R/n` at 1, and the profile sum has
//! the mixture density `Σ_k C(n,k) k R^n (n-S)^(k-1) / (n^(n-1) S^(k+1))`
//! on `[R, n)` with the top atom at `S = n`. Both are integrated here as
//! independent cross-checks of the construction.

use crate::error::{Error, Result};
use crate::numerics::integrate_1d;
use rand::Rng;

/// Number of agents reporting a value strictly below the top.
pub fn low_agent_count(v: &[f64]) -> usize {
    v.iter().filter(|&&x| x < 1.0).count()
}

/// `R = r + n - 1`, the support threshold of the profile sum.
fn big_r(n: usize, r: f64) -> f64 {
    r + n as f64 - 1.0
}

/// Joint density on the k-face containing `v` (`k` low agents), without
/// support or atom handling: `k! R^n / (n^(n-1) (Σv)^(k+1))`.
pub fn face_density(n: usize, r: f64, v: &[f64]) -> f64 {
    let k = low_agent_count(v);
    let s: f64 = v.iter().sum();
    let nf = n as f64;
    let factorial: f64 = (1..=k).map(|i| i as f64).product();
    factorial * big_r(n, r).powi(n as i32) / (nf.powi(n as i32 - 1) * s.powi(k as i32 + 1))
}

/// Mass of the atom at the all-ones profile, `(R/n)^n`.
pub fn top_atom_mass(n: usize, r: f64) -> f64 {
    (big_r(n, r) / n as f64).powi(n as i32)
}

/// Closed-form marginal density of one agent's value on `[r, 1)`; the
/// value at `x = 1` is the continuous limit (the atom there is separate),
/// which keeps quadrature over the closed interval smooth.
pub fn marginal_density(n: usize, r: f64, x: f64) -> f64 {
    if !(r..=1.0).contains(&x) {
        return 0.0;
    }
    let nf = n as f64;
    let rr = big_r(n, r);
    let mut sum = 0.0;
    let mut binom = 1.0; // C(n-2, j)
    for j in 0..=(n - 2) {
        sum += binom * (nf - 1.0 - j as f64) * rr.powi(j as i32) * (x - r).powi((n - 2 - j) as i32);
        binom *= (n - 2 - j) as f64 / (j + 1) as f64;
    }
    sum / nf.powi(n as i32 - 1)
}

/// Mass of the per-agent marginal atom at 1, `R/n`.
pub fn marginal_atom_mass(n: usize, r: f64) -> f64 {
    big_r(n, r) / n as f64
}

/// Density of the profile sum `S = Σv` on `[R, n)` (the graded faces
/// collapsed onto the sum coordinate).
pub fn sum_density(n: usize, r: f64, s: f64) -> f64 {
    let nf = n as f64;
    let rr = big_r(n, r);
    // closed at n by continuity, as for the marginal
    if !(rr..=nf).contains(&s) {
        return 0.0;
    }
    let mut total = 0.0;
    let mut binom = nf; // C(n, k) starting at k = 1
    for k in 1..=n {
        total += binom * k as f64 * rr.powi(n as i32) * (nf - s).powi(k as i32 - 1)
            / (nf.powi(n as i32 - 1) * s.powi(k as i32 + 1));
        binom *= (n - k) as f64 / (k + 1) as f64;
    }
    total
}

/// Quadrature check of the closed-form marginal: returns its total mass
/// (density plus atom) and first moment; the construction requires mass 1
/// and moment equal to the solved mean.
pub fn marginal_checks(n: usize, r: f64) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::Domain("marginal checks need at least two agents".into()));
    }
    if r >= 1.0 {
        return Ok((1.0, 1.0));
    }
    let mass = integrate_1d(|x| marginal_density(n, r, x), r, 1.0, 1e-12)?
        + marginal_atom_mass(n, r);
    let moment = integrate_1d(|x| x * marginal_density(n, r, x), r, 1.0, 1e-12)?
        + marginal_atom_mass(n, r);
    Ok((mass, moment))
}

/// Quadrature check of the sum density: total mass (density plus atom)
/// and the mean of `S` (which must equal `n·m`).
pub fn sum_checks(n: usize, r: f64) -> Result<(f64, f64)> {
    let nf = n as f64;
    let rr = big_r(n, r);
    if r >= 1.0 {
        return Ok((1.0, nf));
    }
    let mass = integrate_1d(|s| sum_density(n, r, s), rr, nf, 1e-12)? + top_atom_mass(n, r);
    let mean = integrate_1d(|s| s * sum_density(n, r, s), rr, nf, 1e-12)?
        + nf * top_atom_mass(n, r);
    Ok((mass, mean))
}

/// Draws one worst-case profile into `out` (length `n`).
///
/// Stage 1 flips each agent to the top independently with probability
/// `R/n`; stage 2 inverts the conditional sum CDF in closed form; stage 3
/// spreads the remaining shortfall uniformly over the low agents via a
/// flat Dirichlet draw. All three stages are exact (no rejection).
pub fn sample_into<G: Rng + ?Sized>(n: usize, r: f64, rng: &mut G, out: &mut [f64]) {
    debug_assert_eq!(out.len(), n);
    let nf = n as f64;
    let rr = big_r(n, r);
    let p_top = rr / nf;
    let mut low: Vec<usize> = Vec::with_capacity(n);
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = 1.0;
        if rng.random::<f64>() >= p_top {
            low.push(i);
        }
    }
    let k = low.len();
    if k == 0 {
        return;
    }
    // conditional sum: S = n/(1+ρ), ρ = (1-U)^(1/k) (1-r)/R
    let u: f64 = rng.random();
    let rho = (1.0 - u).powf(1.0 / k as f64) * (1.0 - r) / rr;
    let s = nf / (1.0 + rho);
    let shortfall = nf - s; // ≤ 1 - r
    // flat Dirichlet over the k low agents via normalized exponentials
    let mut gaps: Vec<f64> = (0..k)
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    let total: f64 = gaps.iter().sum();
    for g in &mut gaps {
        *g /= total;
    }
    for (slot, gap) in low.into_iter().zip(gaps) {
        out[slot] = 1.0 - shortfall * gap;
    }
}
