//! Black-boxing open Markov processes into linear relations.
//!
//! The behavior of an open process is the space of boundary
//! probability–flow tuples compatible with some steady state:
//! `{(i*(p), I, o*(p), O) : Hp + i_*(I) − o_*(O) = 0}`, assembled as the
//! null space of the block `[H | i_* | −o_*]` and projected onto the
//! boundary coordinates. The same construction applied to a circuit
//! Laplacian black-boxes resistor networks, and the two routes agree up
//! to the diagonal change of coordinates `α : (φ, ι) ↦ (qφ, ι)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::finset::{Cospan, FinSet};
use crate::linrel::{compose_rel, equal_rel, LinRel, Subspace, DEFAULT_RANK_TOL};
use crate::open_markov::{OpenDetailedBalanced, OpenMarkov};

/// An open circuit of linear resistors: a conductance-labeled graph on
/// the apex of a cospan. Edges are stored directed but a resistor has no
/// orientation; opposite-direction edges between the same pair record
/// one resistor seen from both ends and must carry equal conductance,
/// while parallel edges in the same direction add.
#[derive(Debug, Clone)]
pub struct Circuit {
    pub cospan: Cospan,
    pub edges: Vec<CircuitEdge>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitEdge {
    pub source: String,
    pub target: String,
    pub conductance: f64,
}

impl Circuit {
    pub fn new(cospan: Cospan, edges: Vec<CircuitEdge>) -> Result<Self> {
        for e in &edges {
            cospan.apex.require(&e.source)?;
            cospan.apex.require(&e.target)?;
            if e.conductance <= 0.0 {
                return Err(Error::InvalidRate {
                    id: format!("{}->{}", e.source, e.target),
                    rate: e.conductance,
                });
            }
        }
        Ok(Circuit { cospan, edges })
    }

    pub fn nodes(&self) -> &FinSet {
        &self.cospan.apex
    }

    /// The circuit Laplacian: `L_ij = c_ij` off-diagonal with diagonal
    /// entries minus the row sums, where `c_ij` is the pair conductance.
    pub fn laplacian(&self) -> Result<DMatrix<f64>> {
        let n = self.nodes().len();
        let mut fwd: DMatrix<f64> = DMatrix::zeros(n, n);
        for e in &self.edges {
            let s = self.nodes().index_of(&e.source).unwrap();
            let t = self.nodes().index_of(&e.target).unwrap();
            if s != t {
                fwd[(s, t)] += e.conductance;
            }
        }
        let mut l = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let a = fwd[(i, j)];
                let b = fwd[(j, i)];
                let c = if a > 0.0 && b > 0.0 {
                    if (a - b).abs() > 1e-9 * a.max(b) {
                        return Err(Error::DetailedBalanceViolation {
                            i: self.nodes().label(i).to_string(),
                            j: self.nodes().label(j).to_string(),
                            forward: a,
                            backward: b,
                        });
                    }
                    0.5 * (a + b)
                } else {
                    a.max(b)
                };
                if c > 0.0 {
                    l[(i, j)] = c;
                    l[(j, i)] = c;
                    l[(i, i)] -= c;
                    l[(j, j)] -= c;
                }
            }
        }
        Ok(l)
    }
}

/// Converts a detailed-balanced process into the circuit with the same
/// underlying graph and edge conductances `c_e = r_e q_{s(e)}`. Detailed
/// balance makes the two directions of every state pair agree; a
/// violation beyond `1e-9` relative is an error.
pub fn to_circuit(m: &OpenDetailedBalanced) -> Result<Circuit> {
    let states = &m.open.cospan.apex;
    let q = m.q.values();
    let edges: Vec<CircuitEdge> = m
        .open
        .process
        .edges()
        .iter()
        .map(|e| {
            let s = states.index_of(&e.source).unwrap();
            CircuitEdge {
                source: e.source.clone(),
                target: e.target.clone(),
                conductance: e.rate * q[s],
            }
        })
        .collect();
    let c = Circuit::new(m.open.cospan.clone(), edges)?;
    // surfacing asymmetric pairs now gives a detailed-balance error with
    // named states instead of a later Laplacian failure
    c.laplacian()?;
    Ok(c)
}

/// Extended power functional `P(φ) = ½ Σ_e c_e (φ_{s(e)} − φ_{t(e)})²`.
pub fn power_functional(c: &Circuit, phi: &[f64]) -> f64 {
    assert_eq!(phi.len(), c.nodes().len(), "potential indexed by nodes");
    let mut total = 0.0;
    for e in &c.edges {
        let s = c.nodes().index_of(&e.source).unwrap();
        let t = c.nodes().index_of(&e.target).unwrap();
        let d = phi[s] - phi[t];
        total += 0.5 * e.conductance * d * d;
    }
    total
}

/// A steady-state behavior: a linear relation from input
/// probability–flow pairs to output probability–flow pairs, coordinates
/// ordered (input probabilities, input flows, output probabilities,
/// output flows).
#[derive(Debug, Clone)]
pub struct Behavior {
    pub rel: LinRel,
}

impl Behavior {
    pub fn dim(&self) -> usize {
        self.rel.dim()
    }

    pub fn contains(&self, point: &[f64], tol: f64) -> bool {
        self.rel.contains(&DVector::from_column_slice(point), tol)
    }
}

/// Null space of `[A | i_* | −o_*]` over `(state values, I, O)`.
pub(crate) fn steady_constraint_kernel(a: &DMatrix<f64>, cospan: &Cospan) -> Subspace {
    let n = cospan.apex.len();
    let nx = cospan.left.len();
    let ny = cospan.right.len();
    let mut block = DMatrix::zeros(n, n + nx + ny);
    block.view_mut((0, 0), (n, n)).copy_from(a);
    for x in 0..nx {
        block[(cospan.in_leg.apply_idx(x), n + x)] += 1.0;
    }
    for y in 0..ny {
        block[(cospan.out_leg.apply_idx(y), n + nx + y)] -= 1.0;
    }
    Subspace::null_space(&block, DEFAULT_RANK_TOL)
}

/// Projects a kernel over `(p, I, O)` to boundary coordinates
/// `(i* p, I, o* p, O)`.
pub(crate) fn project_to_behavior(kernel: &Subspace, cospan: &Cospan) -> Behavior {
    let n = cospan.apex.len();
    let nx = cospan.left.len();
    let ny = cospan.right.len();
    let mut proj = DMatrix::zeros(2 * nx + 2 * ny, n + nx + ny);
    for x in 0..nx {
        proj[(x, cospan.in_leg.apply_idx(x))] = 1.0; // i*(p)
        proj[(nx + x, n + x)] = 1.0; // I
    }
    for y in 0..ny {
        proj[(2 * nx + y, cospan.out_leg.apply_idx(y))] = 1.0; // o*(p)
        proj[(2 * nx + ny + y, n + nx + y)] = 1.0; // O
    }
    let projected = &proj * kernel.basis();
    Behavior {
        rel: LinRel::new(
            2 * nx,
            2 * ny,
            Subspace::from_span(&projected, DEFAULT_RANK_TOL),
        )
        .expect("projection dims consistent"),
    }
}

/// Steady-state behavior of an open Markov process, with or without a
/// chosen equilibrium. Degenerate internal kernels enlarge the relation.
pub fn blackbox_markov(m: &OpenMarkov) -> Behavior {
    let h = m.hamiltonian();
    let kernel = steady_constraint_kernel(&h.matrix, &m.cospan);
    project_to_behavior(&kernel, &m.cospan)
}

/// Full steady constraint kernel over `(p, I, O)`, exposed for witness
/// reconstruction in diagnostics.
pub fn blackbox_markov_witnesses(m: &OpenMarkov) -> Subspace {
    let h = m.hamiltonian();
    steady_constraint_kernel(&h.matrix, &m.cospan)
}

/// Behavior of an open circuit: same null-space construction with the
/// Laplacian in place of the Hamiltonian.
pub fn blackbox_circuit(c: &Circuit) -> Result<Behavior> {
    let l = c.laplacian()?;
    let kernel = steady_constraint_kernel(&l, &c.cospan);
    Ok(project_to_behavior(&kernel, &c.cospan))
}

/// The invertible change of coordinates `(φ, ι) ↦ (qφ, ι)` on
/// `R^X ⊕ R^X` as a linear relation, for `q > 0` on `X`.
pub fn alpha(x: &FinSet, q: &[f64]) -> Result<LinRel> {
    if q.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: q.len(),
        });
    }
    for (k, &v) in q.iter().enumerate() {
        if v <= 0.0 {
            return Err(Error::NonpositiveProbability {
                label: x.label(k).to_string(),
                value: v,
            });
        }
    }
    let n = x.len();
    let mut a = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        a[(k, k)] = q[k];
        a[(n + k, n + k)] = 1.0;
    }
    Ok(crate::linrel::from_graph_of_map(&a))
}

/// Inverse transform `(p, j) ↦ (p/q, j)`.
pub fn alpha_inv(x: &FinSet, q: &[f64]) -> Result<LinRel> {
    let recip: Vec<f64> = q.iter().map(|&v| 1.0 / v).collect();
    alpha(x, &recip)
}

/// Checks the commuting triangle for a detailed-balanced process:
/// black-boxing through the circuit picture, then rescaling boundary
/// potentials by the equilibrium values (`alpha` on the way out, its
/// inverse on the way in), reproduces the direct Markov behavior.
pub fn check_naturality(m: &OpenDetailedBalanced, tol: f64) -> Result<bool> {
    let direct = blackbox_markov(&m.open);
    let circuit = to_circuit(m)?;
    let through_circuit = blackbox_circuit(&circuit)?;

    let qx = crate::finset::pullback(&m.open.cospan.in_leg, m.q.values());
    let qy = crate::finset::pullback(&m.open.cospan.out_leg, m.q.values());
    let a_x_inv = alpha_inv(&m.open.cospan.left, &qx)?;
    let a_y = alpha(&m.open.cospan.right, &qy)?;

    let conjugated = compose_rel(
        &compose_rel(&a_x_inv, &through_circuit.rel, DEFAULT_RANK_TOL)?,
        &a_y,
        DEFAULT_RANK_TOL,
    )?;
    Ok(equal_rel(&direct.rel, &conjugated, tol))
}
