//! Entropy and dissipation diagnostics for open Markov processes.
//!
//! Relative entropy and its convex-function generalizations decompose
//! into an internal part, which can never be positive, and a boundary
//! part through which all growth must enter. Dissipation is the
//! quadratic form minimized by steady states under fixed boundary
//! probabilities, and the master equation is its gradient flow in the
//! equilibrium-weighted metric.

use std::sync::Arc;

use nalgebra::DVector;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::markov::{Hamiltonian, ProbDist};
use crate::open_markov::{OpenDetailedBalanced, OpenMarkov};

/// A convex function on `(0, ∞)` with its derivative. Convexity is a
/// documented contract, spot-checked at construction by the midpoint
/// inequality on a fixed probe set.
#[derive(Clone)]
pub struct ConvexFn {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    f_prime: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    name: String,
}

impl std::fmt::Debug for ConvexFn {
    fn fmt(&self, fmt: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(fmt, "ConvexFn({})", self.name)
    }
}

impl ConvexFn {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let name = name.into();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..100 {
            let a = rng.gen_range(1e-3..10.0);
            let b = rng.gen_range(1e-3..10.0);
            if f(0.5 * (a + b)) > 0.5 * (f(a) + f(b)) + 1e-9 {
                return Err(Error::NotConvex(name));
            }
        }
        Ok(ConvexFn {
            f: Arc::new(f),
            f_prime: Arc::new(f_prime),
            name,
        })
    }

    /// `f(x) = x ln x − x + 1`, the generator of relative entropy.
    pub fn kl() -> Self {
        ConvexFn::new(
            "kl",
            |x| if x == 0.0 { 1.0 } else { x * x.ln() - x + 1.0 },
            |x| x.ln(),
        )
        .expect("kl generator is convex")
    }

    /// `f(x) = x²/2`, the generator whose divergence rate is minus the
    /// dissipation.
    pub fn half_square() -> Self {
        ConvexFn::new("half_square", |x| 0.5 * x * x, |x| x).expect("x²/2 is convex")
    }

    /// Smoothed total-variation generator `√((x−1)² + δ²) − δ`.
    pub fn smoothed_abs() -> Self {
        const DELTA: f64 = 1e-3;
        ConvexFn::new(
            "smoothed_abs",
            |x| ((x - 1.0) * (x - 1.0) + DELTA * DELTA).sqrt() - DELTA,
            |x| (x - 1.0) / ((x - 1.0) * (x - 1.0) + DELTA * DELTA).sqrt(),
        )
        .expect("smoothed |x−1| is convex")
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn prime(&self, x: f64) -> f64 {
        (self.f_prime)(x)
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

/// An entropy quantity with its rate split into internal and boundary
/// contributions; `rate = internal_term + boundary_term`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyReport {
    pub value: f64,
    pub rate: f64,
    pub internal_term: f64,
    pub boundary_term: f64,
}

/// Generalized relative entropy for un-normalized distributions:
/// `I(p, q) = Σ_i [p_i ln(p_i/q_i) − (p_i − q_i)]`, with `0·ln 0 = 0`
/// and `+∞` when some `p_i > 0` has `q_i = 0`.
pub fn relative_entropy(p: &ProbDist, q: &ProbDist) -> f64 {
    assert_eq!(p.len(), q.len(), "distributions share the state set");
    let mut total = 0.0;
    for (&pi, &qi) in p.values().iter().zip(q.values()) {
        if pi == 0.0 {
            total += qi;
        } else if qi == 0.0 {
            return f64::INFINITY;
        } else {
            total += pi * (pi / qi).ln() - (pi - qi);
        }
    }
    total
}

/// Csiszár–Morimoto divergence `I_f(p, q) = Σ_i q_i f(p_i/q_i)`.
pub fn f_divergence(p: &ProbDist, q: &ProbDist, f: &ConvexFn) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: q.len(),
            found: p.len(),
        });
    }
    let mut total = 0.0;
    for (k, (&pi, &qi)) in p.values().iter().zip(q.values()).enumerate() {
        if qi <= 0.0 {
            return Err(Error::NonpositiveProbability {
                label: format!("index {k}"),
                value: qi,
            });
        }
        total += qi * f.eval(pi / qi);
    }
    Ok(total)
}

fn master_equation_defect(
    m: &OpenMarkov,
    h: &Hamiltonian,
    v: &ProbDist,
    supplied: Option<&[f64]>,
) -> Result<Vec<f64>> {
    // defect Dv_i/Dt = dv_i/dt − (Hv)_i on boundary states, zero internally
    let boundary = m.boundary();
    if let Some(s) = supplied {
        if s.len() != boundary.len() {
            return Err(Error::DimensionMismatch {
                expected: boundary.len(),
                found: s.len(),
            });
        }
    }
    let hv = h.apply(v.values());
    let mut out = vec![0.0; h.dim()];
    for (k, &b) in boundary.iter().enumerate() {
        let dv_dt = supplied.map_or(0.0, |s| s[k]);
        out[b] = dv_dt - hv[b];
    }
    Ok(out)
}

/// Rate of change of `I_f(p, q)` along the open master equation, split
/// into the internal sum
/// `Σ_{i,j} H_ij q_j (f_i − (p_i/q_i) f'_i) + H_ij p_j f'_i`
/// (never positive for convex `f`) and the boundary flux
/// `Σ_{i∈B} f'_i Dp_i/Dt + (f_i − (p_i/q_i) f'_i) Dq_i/Dt`.
///
/// `dp_dt` / `dq_dt` are the prescribed boundary time-derivatives in
/// boundary order; `None` means the boundary is held fixed.
pub fn f_divergence_rate(
    m: &OpenMarkov,
    p: &ProbDist,
    q: &ProbDist,
    f: &ConvexFn,
    dp_dt: Option<&[f64]>,
    dq_dt: Option<&[f64]>,
) -> Result<EntropyReport> {
    let h = m.hamiltonian();
    let n = h.dim();
    if p.len() != n || q.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: p.len().max(q.len()),
        });
    }
    let ratio: Vec<f64> = p
        .values()
        .iter()
        .zip(q.values())
        .enumerate()
        .map(|(k, (&pi, &qi))| {
            if qi <= 0.0 {
                Err(Error::NonpositiveProbability {
                    label: format!("index {k}"),
                    value: qi,
                })
            } else {
                Ok(pi / qi)
            }
        })
        .collect::<Result<_>>()?;

    let fs: Vec<f64> = ratio.iter().map(|&x| f.eval(x)).collect();
    let fps: Vec<f64> = ratio.iter().map(|&x| f.prime(x)).collect();

    let mut internal = 0.0;
    for i in 0..n {
        for j in 0..n {
            internal += h.matrix[(i, j)] * q.values()[j] * (fs[i] - ratio[i] * fps[i])
                + h.matrix[(i, j)] * p.values()[j] * fps[i];
        }
    }

    let dp = master_equation_defect(m, &h, p, dp_dt)?;
    let dq = master_equation_defect(m, &h, q, dq_dt)?;
    let mut boundary = 0.0;
    for &b in &m.boundary() {
        boundary += fps[b] * dp[b] + (fs[b] - ratio[b] * fps[b]) * dq[b];
    }

    Ok(EntropyReport {
        value: f_divergence(p, q, f)?,
        rate: internal + boundary,
        internal_term: internal,
        boundary_term: boundary,
    })
}

/// When `q` is an equilibrium (`Hq = 0`) the internal term collapses to
/// the flow–affinity pairing
/// `−(1/2) Σ_{i,j} J_ij(p) (f'(p_j/q_j) − f'(p_i/q_i))`.
pub fn entropy_rate_equilibrium_decomposition(
    m: &OpenMarkov,
    p: &ProbDist,
    q: &ProbDist,
    f: &ConvexFn,
) -> Result<EntropyReport> {
    let h = m.hamiltonian();
    let hq = DVector::from_vec(h.apply(q.values()));
    let scale = h.matrix.norm() * DVector::from_column_slice(q.values()).norm();
    if hq.norm() > 1e-9 * scale.max(1.0) {
        return Err(Error::NotSteady {
            residual: hq.norm(),
            tol: 1e-9 * scale.max(1.0),
        });
    }
    let n = h.dim();
    let ratio: Vec<f64> = p
        .values()
        .iter()
        .zip(q.values())
        .map(|(&pi, &qi)| pi / qi)
        .collect();
    let fps: Vec<f64> = ratio.iter().map(|&x| f.prime(x)).collect();

    let mut internal = 0.0;
    for i in 0..n {
        for j in 0..n {
            let flow = h.matrix[(i, j)] * p.values()[j] - h.matrix[(j, i)] * p.values()[i];
            internal += -0.5 * flow * (fps[j] - fps[i]);
        }
    }

    let dp = master_equation_defect(m, &h, p, None)?;
    let fs: Vec<f64> = ratio.iter().map(|&x| f.eval(x)).collect();
    let mut boundary = 0.0;
    for &b in &m.boundary() {
        boundary += fps[b] * dp[b];
    }
    let _ = fs;

    Ok(EntropyReport {
        value: f_divergence(p, q, f)?,
        rate: internal + boundary,
        internal_term: internal,
        boundary_term: boundary,
    })
}

/// Dissipation `D(p) = ½ Σ_{i,j} H_ij q_j (p_j/q_j − p_i/q_i)²`.
/// Computed both as the state-pair sum and as the edge sum
/// `½ Σ_e r_e q_{s(e)} (p_{s(e)}/q_{s(e)} − p_{t(e)}/q_{t(e)})²`;
/// the two must agree to `1e-12` relative.
pub fn dissipation(m: &OpenDetailedBalanced, p: &ProbDist) -> Result<f64> {
    let h = m.open.hamiltonian();
    let n = h.dim();
    if p.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: p.len(),
        });
    }
    let q = m.q.values();
    let ratio: Vec<f64> = p.values().iter().zip(q).map(|(&pi, &qi)| pi / qi).collect();

    let mut pair_sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let d = ratio[j] - ratio[i];
                pair_sum += 0.5 * h.matrix[(i, j)] * q[j] * d * d;
            }
        }
    }

    let states = &m.open.cospan.apex;
    let mut edge_sum = 0.0;
    for e in m.open.process.edges() {
        let s = states.index_of(&e.source).unwrap();
        let t = states.index_of(&e.target).unwrap();
        let d = ratio[s] - ratio[t];
        edge_sum += 0.5 * e.rate * q[s] * d * d;
    }

    debug_assert!(
        (pair_sum - edge_sum).abs() <= 1e-12 * pair_sum.abs().max(edge_sum.abs()).max(1.0),
        "pair and edge dissipation routes disagree: {pair_sum} vs {edge_sum}"
    );
    if (pair_sum - edge_sum).abs() > 1e-12 * pair_sum.abs().max(edge_sum.abs()).max(1.0) {
        return Err(Error::SingularSystem(format!(
            "dissipation routes disagree: {pair_sum} vs {edge_sum}"
        )));
    }
    Ok(pair_sum)
}

/// Analytic gradient `∂D/∂p_n = −2 Σ_j H_nj p_j / q_n`.
pub fn dissipation_gradient(m: &OpenDetailedBalanced, p: &ProbDist) -> Vec<f64> {
    let h = m.open.hamiltonian();
    let hp = h.apply(p.values());
    hp.iter()
        .zip(m.q.values())
        .map(|(&hp_n, &q_n)| -2.0 * hp_n / q_n)
        .collect()
}

/// Residual of the gradient-flow form of the master equation:
/// `‖Hp + ∇D(p)‖` with `∇_i = (q_i/2) ∂/∂p_i`.
pub fn gradient_flow_residual(m: &OpenDetailedBalanced, p: &ProbDist) -> f64 {
    let h = m.open.hamiltonian();
    let hp = h.apply(p.values());
    let grad = dissipation_gradient(m, p);
    let mut sq = 0.0;
    for ((&hp_i, &g_i), &q_i) in hp.iter().zip(&grad).zip(m.q.values()) {
        let r = hp_i + 0.5 * q_i * g_i;
        sq += r * r;
    }
    sq.sqrt()
}

/// Residual of the identity
/// `d/dt I_D(p, q) = −D(p) + Σ_B (Dp_i/Dt)(p_i/q_i)`
/// linking dissipation to the `x²/2` divergence rate.
pub fn dissipation_fdiv_link(
    m: &OpenDetailedBalanced,
    p: &ProbDist,
    dp_dt: Option<&[f64]>,
) -> Result<f64> {
    let f = ConvexFn::half_square();
    let report = f_divergence_rate(&m.open, p, &m.q, &f, dp_dt, None)?;
    let d = dissipation(m, p)?;
    Ok((report.rate - (-d + report.boundary_term)).abs())
}

/// Diagnostic for the near-equilibrium regime `p_i/q_i = 1 + ε_i`:
/// reports the gap between the relative-entropy rate and
/// `−D(p) + boundary`, which should scale as `ε²`.
#[derive(Debug, Clone, Copy)]
pub struct NearEquilibriumReport {
    pub eps_max: f64,
    pub discrepancy: f64,
    pub fitted_coefficient: f64,
}

pub fn near_equilibrium_expansion_check(
    m: &OpenDetailedBalanced,
    p: &ProbDist,
    eps_max: f64,
) -> Result<NearEquilibriumReport> {
    for (k, (&pi, &qi)) in p.values().iter().zip(m.q.values()).enumerate() {
        let eps = pi / qi - 1.0;
        if eps.abs() > eps_max + 1e-15 {
            return Err(Error::Precondition(format!(
                "state {k} deviates by {eps:e}, beyond eps_max = {eps_max:e}"
            )));
        }
    }
    let kl = ConvexFn::kl();
    let report = f_divergence_rate(&m.open, p, &m.q, &kl, None, None)?;
    let d = dissipation(m, p)?;
    let discrepancy = (report.rate - (-d + report.boundary_term)).abs();
    Ok(NearEquilibriumReport {
        eps_max,
        discrepancy,
        fitted_coefficient: if eps_max > 0.0 {
            discrepancy / (eps_max * eps_max)
        } else {
            0.0
        },
    })
}
