//! Open Markov processes: Markov processes decorated onto cospans.
//!
//! Composition glues two processes along shared boundary states via the
//! pushout; the merged state's edge star is the union of both sides'.
//! Two forms of driving are provided: boundary probabilities held fixed
//! (the steady state solves the internal block system) and explicit
//! inflow/outflow vectors entering the open master equation
//! `dp/dt = Hp + i_*(I) − o_*(O)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::finset::{
    compose_cospans, disjoint_union, pushforward, pushout, Cospan, FinMap, FinSet,
};
use crate::linrel::Subspace;
use crate::markov::{
    build_hamiltonian, check_detailed_balance, check_step, Edge, Hamiltonian, MarkovProcess,
    ProbDist,
};

/// A Markov process on the apex of a cospan of finite sets.
#[derive(Debug, Clone)]
pub struct OpenMarkov {
    pub cospan: Cospan,
    pub process: MarkovProcess,
}

impl OpenMarkov {
    pub fn new(cospan: Cospan, process: MarkovProcess) -> Result<Self> {
        if process.states() != &cospan.apex {
            return Err(Error::InterfaceMismatch {
                expected: cospan.apex.to_string(),
                found: process.states().to_string(),
            });
        }
        Ok(OpenMarkov { cospan, process })
    }

    pub fn hamiltonian(&self) -> Hamiltonian {
        build_hamiltonian(&self.process)
    }

    pub fn boundary(&self) -> Vec<usize> {
        self.cospan.boundary()
    }

    pub fn internal(&self) -> Vec<usize> {
        self.cospan.internal()
    }
}

/// An open Markov process with a chosen detailed-balanced equilibrium
/// `q > 0`; energies `ε_i = −ln q_i` are the equivalent presentation at
/// the fixed inverse temperature `β = 1`.
#[derive(Debug, Clone)]
pub struct OpenDetailedBalanced {
    pub open: OpenMarkov,
    pub q: ProbDist,
}

impl OpenDetailedBalanced {
    pub fn new(open: OpenMarkov, q: ProbDist) -> Result<Self> {
        if q.len() != open.cospan.apex.len() {
            return Err(Error::DimensionMismatch {
                expected: open.cospan.apex.len(),
                found: q.len(),
            });
        }
        for (k, &v) in q.values().iter().enumerate() {
            if v <= 0.0 {
                return Err(Error::NonpositiveProbability {
                    label: open.cospan.apex.label(k).to_string(),
                    value: v,
                });
            }
        }
        let h = open.hamiltonian();
        if !check_detailed_balance(&h, &q, 1e-9) {
            return Err(Error::EquilibriumMismatch {
                states: vec!["q is not a detailed-balanced equilibrium".to_string()],
            });
        }
        Ok(OpenDetailedBalanced { open, q })
    }

    pub fn energies(&self) -> Vec<f64> {
        energies_from_q(&self.q).expect("q validated positive")
    }
}

/// Boundary driving for simulation: either held probabilities on the
/// boundary states or inflow/outflow vectors on the legs.
#[derive(Debug, Clone)]
pub enum BoundaryData {
    FixedProbs(Vec<(String, f64)>),
    Flows { inflow: Vec<f64>, outflow: Vec<f64> },
}

/// Relabels a process along a map of state sets; edge endpoints move,
/// rates are unchanged. Edge ids from the right side gain primes on clash.
fn map_process_edges(
    edges: &[Edge],
    map: &FinMap,
    taken: &mut std::collections::HashSet<String>,
) -> Vec<Edge> {
    edges
        .iter()
        .map(|e| {
            let mut id = e.id.clone();
            while !taken.insert(id.clone()) {
                id.push('\'');
            }
            Edge {
                id,
                source: map.apply(&e.source).expect("state resolves").to_string(),
                target: map.apply(&e.target).expect("state resolves").to_string(),
                rate: e.rate,
            }
        })
        .collect()
}

/// Composite `M' ∘ M : X → Z`: apex is the pushout, edges are the
/// disjoint union with endpoints relabeled through the quotient maps.
pub fn compose_open(m: &OpenMarkov, m2: &OpenMarkov) -> Result<OpenMarkov> {
    if m.cospan.right != m2.cospan.left {
        return Err(Error::InterfaceMismatch {
            expected: m.cospan.right.to_string(),
            found: m2.cospan.left.to_string(),
        });
    }
    let cospan = compose_cospanned(&m.cospan, &m2.cospan)?;
    let po = pushout(&m.cospan.out_leg, &m2.cospan.in_leg)?;
    let mut taken = std::collections::HashSet::new();
    let mut edges = map_process_edges(m.process.edges(), &po.quot_left, &mut taken);
    edges.extend(map_process_edges(m2.process.edges(), &po.quot_right, &mut taken));
    let process = MarkovProcess::new(cospan.apex.clone(), edges)?;
    OpenMarkov::new(cospan, process)
}

fn compose_cospanned(c1: &Cospan, c2: &Cospan) -> Result<Cospan> {
    compose_cospans(c1, c2)
}

/// Composes open detailed-balanced processes. The equilibria must agree
/// on every glued state within `tol` (relative to the largest q); the
/// composite equilibrium is the copairing and is re-verified.
pub fn compose_open_db(
    m: &OpenDetailedBalanced,
    m2: &OpenDetailedBalanced,
    tol: f64,
) -> Result<OpenDetailedBalanced> {
    if m.open.cospan.right != m2.open.cospan.left {
        return Err(Error::InterfaceMismatch {
            expected: m.open.cospan.right.to_string(),
            found: m2.open.cospan.left.to_string(),
        });
    }
    let qmax = m
        .q
        .values()
        .iter()
        .chain(m2.q.values())
        .fold(0.0f64, |a, &b| a.max(b));
    let mut offending = Vec::new();
    for y in 0..m.open.cospan.right.len() {
        let q_out = m.q.values()[m.open.cospan.out_leg.apply_idx(y)];
        let q_in = m2.q.values()[m2.open.cospan.in_leg.apply_idx(y)];
        if (q_out - q_in).abs() > tol * qmax {
            offending.push(format!(
                "{} (q = {q_out} vs {q_in})",
                m.open.cospan.right.label(y)
            ));
        }
    }
    if !offending.is_empty() {
        return Err(Error::EquilibriumMismatch { states: offending });
    }

    let open = compose_open(&m.open, &m2.open)?;
    let po = pushout(&m.open.cospan.out_leg, &m2.open.cospan.in_leg)?;
    let mut q = vec![0.0f64; open.cospan.apex.len()];
    // copairing: right side first so glued entries end up with the left value
    for (k, &v) in m2.q.values().iter().enumerate() {
        q[po.quot_right.apply_idx(k)] = v;
    }
    for (k, &v) in m.q.values().iter().enumerate() {
        q[po.quot_left.apply_idx(k)] = v;
    }
    OpenDetailedBalanced::new(open, ProbDist::new(q)?)
}

/// Tensor: disjoint union of everything.
pub fn tensor_open(m: &OpenMarkov, m2: &OpenMarkov) -> OpenMarkov {
    let cospan = crate::finset::tensor_cospans(&m.cospan, &m2.cospan);
    let (_, apex_inl, apex_inr) = disjoint_union(&m.cospan.apex, &m2.cospan.apex);
    let mut taken = std::collections::HashSet::new();
    let mut edges = map_process_edges(m.process.edges(), &apex_inl, &mut taken);
    edges.extend(map_process_edges(m2.process.edges(), &apex_inr, &mut taken));
    let process = MarkovProcess::new(cospan.apex.clone(), edges).expect("valid by construction");
    OpenMarkov::new(cospan, process).expect("apex matches")
}

/// A steady-state solution with the boundary held fixed. When the
/// internal block is singular the affine solution set is returned:
/// `p + span(kernel)`, flagged degenerate.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub p: ProbDist,
    /// Basis of internal steady directions (zero on the boundary),
    /// empty when the solution is unique.
    pub kernel: Vec<Vec<f64>>,
    pub degenerate: bool,
}

/// Solves `p|_B = b`, `(Hp)_i = 0` for internal `i` via the block system
/// `H_II p_I = −H_IB b`.
pub fn solve_open_master_fixed_boundary(m: &OpenMarkov, b: &[f64]) -> Result<SteadyState> {
    let boundary = m.boundary();
    let internal = m.internal();
    if b.len() != boundary.len() {
        return Err(Error::DimensionMismatch {
            expected: boundary.len(),
            found: b.len(),
        });
    }
    if let Some(&bad) = b.iter().find(|&&x| x < 0.0) {
        return Err(Error::NegativeEntry {
            label: "boundary".to_string(),
            value: bad,
        });
    }
    let h = m.hamiltonian();
    let n = h.dim();
    let ni = internal.len();

    let mut p = vec![0.0f64; n];
    for (k, &s) in boundary.iter().enumerate() {
        p[s] = b[k];
    }
    if ni == 0 {
        return Ok(SteadyState {
            p: ProbDist::new(p)?,
            kernel: Vec::new(),
            degenerate: false,
        });
    }

    let mut h_ii = DMatrix::zeros(ni, ni);
    for (a, &ia) in internal.iter().enumerate() {
        for (c, &ic) in internal.iter().enumerate() {
            h_ii[(a, c)] = h.matrix[(ia, ic)];
        }
    }
    let mut rhs = DVector::zeros(ni);
    for (a, &ia) in internal.iter().enumerate() {
        let mut acc = 0.0;
        for (k, &s) in boundary.iter().enumerate() {
            acc += h.matrix[(ia, s)] * b[k];
        }
        rhs[a] = -acc;
    }

    let svd = h_ii.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-10 * smax.max(f64::MIN_POSITIVE))
        .count();
    let degenerate = rank < ni;

    let sol = svd
        .solve(&rhs, 1e-10 * smax.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::SingularSystem(e.to_string()))?;
    // consistency: an inconsistent degenerate system has no steady state
    let residual = (&h_ii * &sol - &rhs).norm();
    if residual > 1e-8 * (h.matrix.norm() * (sol.norm() + 1.0)).max(1.0) {
        return Err(Error::SingularSystem(format!(
            "internal block is inconsistent with the boundary data (residual {residual:e})"
        )));
    }
    for (a, &ia) in internal.iter().enumerate() {
        p[ia] = sol[a];
    }

    let mut kernel = Vec::new();
    if degenerate {
        let null = Subspace::null_space(&h_ii, 1e-10);
        for k in 0..null.dim() {
            let mut dir = vec![0.0f64; n];
            for (a, &ia) in internal.iter().enumerate() {
                dir[ia] = null.basis()[(a, k)];
            }
            kernel.push(dir);
        }
    }

    Ok(SteadyState {
        p: ProbDist::from_integrator(p)?,
        kernel,
        degenerate,
    })
}

/// One RK4 step of the open master equation with constant inflow `I` on
/// `X` and outflow `O` on `Y`.
pub fn open_master_step(
    m: &OpenMarkov,
    p: &ProbDist,
    inflow: &[f64],
    outflow: &[f64],
    dt: f64,
) -> Result<ProbDist> {
    let h = m.hamiltonian();
    check_step(&h, dt)?;
    if inflow.len() != m.cospan.left.len() || outflow.len() != m.cospan.right.len() {
        return Err(Error::DimensionMismatch {
            expected: m.cospan.left.len() + m.cospan.right.len(),
            found: inflow.len() + outflow.len(),
        });
    }
    let mut drive = pushforward(&m.cospan.in_leg, inflow);
    let out = pushforward(&m.cospan.out_leg, outflow);
    for (d, o) in drive.iter_mut().zip(&out) {
        *d -= o;
    }
    let drive = DVector::from_vec(drive);
    let pv = DVector::from_column_slice(p.values());

    let f = |x: &DVector<f64>| &h.matrix * x + &drive;
    let k1 = f(&pv);
    let k2 = f(&(&pv + &k1 * (dt / 2.0)));
    let k3 = f(&(&pv + &k2 * (dt / 2.0)));
    let k4 = f(&(&pv + &k3 * dt));
    let next = &pv + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    ProbDist::from_integrator(next.as_slice().to_vec())
}

/// External inflows required to hold `p` steady: `J_b = −(Hp)_b` on the
/// boundary. `J_b > 0` means probability enters the system at `b`.
/// Requires `p` to already be steady on the internal states.
pub fn boundary_flows(m: &OpenMarkov, p: &ProbDist) -> Result<Vec<f64>> {
    let h = m.hamiltonian();
    let hp = h.apply(p.values());
    let scale = h.matrix.norm() * DVector::from_column_slice(p.values()).norm();
    let tol = 1e-8 * scale.max(1.0);
    let residual = m
        .internal()
        .iter()
        .map(|&i| hp[i].abs())
        .fold(0.0f64, f64::max);
    if residual > tol {
        return Err(Error::NotSteady { residual, tol });
    }
    Ok(m.boundary().iter().map(|&b| -hp[b]).collect())
}

/// Equilibrium from energies at `β = 1`: `q_i = e^{−ε_i}`.
pub fn q_from_energies(energies: &[f64]) -> ProbDist {
    ProbDist::new(energies.iter().map(|&e| (-e).exp()).collect()).expect("exponentials positive")
}

/// Energies from a positive equilibrium: `ε_i = −ln q_i`.
pub fn energies_from_q(q: &ProbDist) -> Result<Vec<f64>> {
    q.values()
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            if v <= 0.0 {
                Err(Error::NonpositiveProbability {
                    label: format!("index {k}"),
                    value: v,
                })
            } else {
                Ok(-v.ln())
            }
        })
        .collect()
}

/// The symmetric membrane model: boundary sides `A`, `C` around an
/// interior state `B`, hop-in rate `h_in` and hop-out rate `h_out`.
pub fn membrane(labels: [&str; 3], h_in: f64, h_out: f64) -> Result<OpenDetailedBalanced> {
    let [a, b, c] = labels;
    let states = FinSet::new([a, b, c])?;
    let process = MarkovProcess::new(
        states.clone(),
        vec![
            Edge::new(format!("{a}->{b}"), a, b, h_in),
            Edge::new(format!("{b}->{a}"), b, a, h_out),
            Edge::new(format!("{b}->{c}"), b, c, h_out),
            Edge::new(format!("{c}->{b}"), c, b, h_in),
        ],
    )?;
    let cospan = Cospan::new(
        FinMap::from_pairs(FinSet::new([a])?, states.clone(), [(a, a)])?,
        FinMap::from_pairs(FinSet::new([c])?, states, [(c, c)])?,
    )?;
    let open = OpenMarkov::new(cospan, process)?;
    // q_A = q_C = h_in · h_out, q_B = h_in², up to scale
    let q = ProbDist::new(vec![h_in * h_out, h_in * h_in, h_in * h_out])?;
    OpenDetailedBalanced::new(open, q)
}

/// Canonicalizes an open process by sorting apex states by label;
/// used to compare composites built in different association orders.
pub fn sorted_hamiltonian(m: &OpenMarkov) -> (Vec<String>, DMatrix<f64>) {
    let h = m.hamiltonian();
    let mut order: Vec<usize> = (0..h.dim()).collect();
    order.sort_by(|&a, &b| m.cospan.apex.label(a).cmp(m.cospan.apex.label(b)));
    let labels = order
        .iter()
        .map(|&k| m.cospan.apex.label(k).to_string())
        .collect();
    let n = h.dim();
    let mut sorted = DMatrix::zeros(n, n);
    for (i, &oi) in order.iter().enumerate() {
        for (j, &oj) in order.iter().enumerate() {
            sorted[(i, j)] = h.matrix[(oi, oj)];
        }
    }
    (labels, sorted)
}

pub use crate::finset::tensor_cospans;
