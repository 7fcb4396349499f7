//! Closed Markov processes on labeled directed multigraphs.
//!
//! A process is a set of states plus rate-labeled edges. The generator
//! (`Hamiltonian`) is infinitesimal stochastic: nonnegative off-diagonal
//! entries, columns summing to zero. Steady states come either from the
//! generator's kernel or from Kirchhoff minors (the matrix-tree route);
//! the two must always agree.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::finset::FinSet;
use crate::linrel::Subspace;

/// One transition with a positive rate constant (units 1/time).
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: String,
    pub source: String,
    pub target: String,
    pub rate: f64,
}

impl Edge {
    pub fn new(id: impl Into<String>, source: impl Into<String>, target: impl Into<String>, rate: f64) -> Self {
        Edge {
            id: id.into(),
            source: source.into(),
            target: target.into(),
            rate,
        }
    }
}

/// A continuous-time Markov process `(V, E, s, t, r)`. Self-loops and
/// parallel edges are permitted; self-loops do not affect the generator.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovProcess {
    states: FinSet,
    edges: Vec<Edge>,
}

impl MarkovProcess {
    pub fn new(states: FinSet, edges: Vec<Edge>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for e in &edges {
            if e.rate <= 0.0 || !e.rate.is_finite() {
                return Err(Error::InvalidRate {
                    id: e.id.clone(),
                    rate: e.rate,
                });
            }
            states.require(&e.source)?;
            states.require(&e.target)?;
            if !seen.insert(e.id.clone()) {
                return Err(Error::DuplicateLabel(e.id.clone()));
            }
        }
        Ok(MarkovProcess { states, edges })
    }

    pub fn states(&self) -> &FinSet {
        &self.states
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Weakly connected components of the underlying graph, as lists of
    /// state indices.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.states.len();
        let mut adj = vec![Vec::new(); n];
        for e in &self.edges {
            let s = self.states.index_of(&e.source).unwrap();
            let t = self.states.index_of(&e.target).unwrap();
            adj[s].push(t);
            adj[t].push(s);
        }
        let mut comp = vec![usize::MAX; n];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let c = out.len();
            let mut stack = vec![start];
            comp[start] = c;
            let mut members = vec![start];
            while let Some(v) = stack.pop() {
                for &w in &adj[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = c;
                        members.push(w);
                        stack.push(w);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }
}

/// An infinitesimal stochastic generator together with its state order.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    pub matrix: DMatrix<f64>,
    pub state_order: FinSet,
}

impl Hamiltonian {
    /// Validates the infinitesimal stochastic conditions: off-diagonal
    /// entries nonnegative, column sums zero within `1e-12 · max|H|`.
    pub fn new(matrix: DMatrix<f64>, state_order: FinSet) -> Result<Self> {
        let n = state_order.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.nrows(),
            });
        }
        let scale = matrix.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        for j in 0..n {
            let mut col_sum = 0.0;
            for i in 0..n {
                if i != j && matrix[(i, j)] < 0.0 {
                    return Err(Error::NotInfinitesimalStochastic(format!(
                        "negative off-diagonal entry at ({i}, {j})"
                    )));
                }
                col_sum += matrix[(i, j)];
            }
            if col_sum.abs() > 1e-12 * scale.max(1.0) {
                return Err(Error::NotInfinitesimalStochastic(format!(
                    "column {j} sums to {col_sum:e}"
                )));
            }
        }
        Ok(Hamiltonian { matrix, state_order })
    }

    pub fn dim(&self) -> usize {
        self.state_order.len()
    }

    /// Largest total exit rate, `max_j |H_jj|`.
    pub fn max_exit_rate(&self) -> f64 {
        (0..self.dim()).fold(0.0f64, |m, j| m.max(self.matrix[(j, j)].abs()))
    }

    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        let v = &self.matrix * DVector::from_column_slice(p);
        v.as_slice().to_vec()
    }
}

/// Un-normalized probabilities: nonnegative reals indexed by the states.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbDist {
    values: Vec<f64>,
}

impl ProbDist {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (k, &v) in values.iter().enumerate() {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::NegativeEntry {
                    label: format!("index {k}"),
                    value: v,
                });
            }
        }
        Ok(ProbDist { values })
    }

    /// Accepts integrator output: entries in `[-1e-12, 0)` are clamped to
    /// zero, anything more negative is rejected.
    pub fn from_integrator(mut values: Vec<f64>) -> Result<Self> {
        for v in values.iter_mut() {
            if *v < 0.0 && *v >= -1e-12 {
                *v = 0.0;
            }
        }
        ProbDist::new(values)
    }

    pub fn uniform(n: usize, value: f64) -> Self {
        ProbDist {
            values: vec![value; n],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Assembles the generator: `H_ij = Σ_{e: j→i} r_e` for `i ≠ j`, diagonal
/// entries chosen so each column sums to zero. Self-loops cancel.
pub fn build_hamiltonian(m: &MarkovProcess) -> Hamiltonian {
    let n = m.states().len();
    let mut h = DMatrix::zeros(n, n);
    for e in m.edges() {
        let s = m.states().index_of(&e.source).unwrap();
        let t = m.states().index_of(&e.target).unwrap();
        if s == t {
            continue;
        }
        h[(t, s)] += e.rate;
        h[(s, s)] -= e.rate;
    }
    Hamiltonian {
        matrix: h,
        state_order: m.states().clone(),
    }
}

fn rk4_step(h: &DMatrix<f64>, p: &DVector<f64>, dt: f64, drive: Option<&DVector<f64>>) -> DVector<f64> {
    let f = |x: &DVector<f64>| -> DVector<f64> {
        match drive {
            Some(d) => h * x + d,
            None => h * x,
        }
    };
    let k1 = f(p);
    let k2 = f(&(p + &k1 * (dt / 2.0)));
    let k3 = f(&(p + &k2 * (dt / 2.0)));
    let k4 = f(&(p + &k3 * dt));
    p + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

pub(crate) fn check_step(h: &Hamiltonian, dt: f64) -> Result<()> {
    let rate = h.max_exit_rate();
    if dt <= 0.0 || dt * rate >= 0.5 {
        return Err(Error::UnstableStep {
            dt,
            suggested: 0.5 / rate.max(f64::MIN_POSITIVE),
        });
    }
    Ok(())
}

/// Integrates the master equation `dp/dt = Hp` with fixed-step RK4.
/// The step is subdivided so that `t` is hit exactly.
pub fn evolve(h: &Hamiltonian, p0: &ProbDist, t: f64, dt: f64) -> Result<ProbDist> {
    check_step(h, dt)?;
    if t <= 0.0 {
        return Ok(p0.clone());
    }
    let steps = (t / dt).ceil() as usize;
    let dt_eff = t / steps as f64;
    let mut p = DVector::from_column_slice(p0.values());
    for _ in 0..steps {
        p = rk4_step(&h.matrix, &p, dt_eff, None);
    }
    ProbDist::from_integrator(p.as_slice().to_vec())
}

/// Net probability flow from `j` to `i`: `J_ij = H_ij p_j − H_ji p_i`.
pub fn flow(h: &Hamiltonian, p: &ProbDist, i: &str, j: &str) -> Result<f64> {
    let a = h.state_order.require(i)?;
    let b = h.state_order.require(j)?;
    Ok(h.matrix[(a, b)] * p.values()[b] - h.matrix[(b, a)] * p.values()[a])
}

/// Affinity (thermodynamic force) between `j` and `i`:
/// `A_ij = ln(H_ij p_j / (H_ji p_i))`. Undefined when either directed
/// flow term vanishes.
pub fn affinity(h: &Hamiltonian, p: &ProbDist, i: &str, j: &str) -> Result<f64> {
    let a = h.state_order.require(i)?;
    let b = h.state_order.require(j)?;
    let fwd = h.matrix[(a, b)] * p.values()[b];
    let bwd = h.matrix[(b, a)] * p.values()[a];
    if fwd <= 0.0 || bwd <= 0.0 {
        return Err(Error::AffinityUndefined {
            i: i.to_string(),
            j: j.to_string(),
        });
    }
    Ok((fwd / bwd).ln())
}

/// True iff `H_ij q_j = H_ji q_i` for every pair, within
/// `tol · max_{i,j}(H_ij q_j)`.
pub fn check_detailed_balance(h: &Hamiltonian, q: &ProbDist, tol: f64) -> bool {
    let n = h.dim();
    let mut max_flow = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                max_flow = max_flow.max(h.matrix[(i, j)] * q.values()[j]);
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let gap = (h.matrix[(i, j)] * q.values()[j] - h.matrix[(j, i)] * q.values()[i]).abs();
            if gap > tol * max_flow.max(f64::MIN_POSITIVE) {
                return false;
            }
        }
    }
    true
}

/// Detailed-balanced equilibrium via Kelly's spanning-tree potential
/// construction, or `None` when the rates violate Kolmogorov's criterion.
///
/// Each connected component gets `q = 1` at its root and
/// `q_child = q_parent · H_{child,parent} / H_{parent,child}` along a
/// spanning tree; detailed balance is then verified on every state pair.
pub fn balanced_equilibrium(m: &MarkovProcess, tol: f64) -> Option<ProbDist> {
    let h = build_hamiltonian(m);
    let n = h.dim();
    // A reverse-free edge forces H_ji = 0 with H_ij > 0: no balanced q.
    for i in 0..n {
        for j in 0..n {
            if i != j && h.matrix[(i, j)] > 0.0 && h.matrix[(j, i)] == 0.0 {
                return None;
            }
        }
    }
    let mut q = vec![0.0f64; n];
    for component in m.components() {
        let root = component[0];
        q[root] = 1.0;
        let mut stack = vec![root];
        let mut visited: Vec<bool> = vec![false; n];
        visited[root] = true;
        while let Some(v) = stack.pop() {
            for w in 0..n {
                if !visited[w] && (h.matrix[(w, v)] > 0.0 || h.matrix[(v, w)] > 0.0) {
                    visited[w] = true;
                    q[w] = q[v] * h.matrix[(w, v)] / h.matrix[(v, w)];
                    stack.push(w);
                }
            }
        }
    }
    let q = ProbDist::new(q).ok()?;
    if check_detailed_balance(&h, &q, tol) {
        Some(q)
    } else {
        None
    }
}

/// Kolmogorov's criterion: rate products agree around every cycle,
/// equivalently a detailed-balanced equilibrium exists.
pub fn check_kolmogorov(m: &MarkovProcess, tol: f64) -> bool {
    balanced_equilibrium(m, tol).is_some()
}

/// Steady state from Kirchhoff minors: `q_i` is the principal minor of
/// `−H` with row and column `i` deleted, the weighted count of spanning
/// trees directed toward `i`. Disconnected graphs are handled per
/// component; normalization is then refused.
///
/// Returns the distribution and the partition value `Z = Σ_i q_i`.
pub fn matrix_tree_steady_state(m: &MarkovProcess, normalize: bool) -> Result<(ProbDist, f64)> {
    let h = build_hamiltonian(m);
    let components = m.components();
    if components.len() > 1 && normalize {
        return Err(Error::DisconnectedNormalization);
    }
    let mut q = vec![0.0f64; h.dim()];
    for component in &components {
        let k = component.len();
        for (pos, &i) in component.iter().enumerate() {
            // minor of −H restricted to the component, deleting `i`
            let mut minor = DMatrix::zeros(k - 1, k - 1);
            let rows: Vec<usize> = component
                .iter()
                .enumerate()
                .filter(|&(p, _)| p != pos)
                .map(|(_, &s)| s)
                .collect();
            for (a, &ra) in rows.iter().enumerate() {
                for (b, &rb) in rows.iter().enumerate() {
                    minor[(a, b)] = -h.matrix[(ra, rb)];
                }
            }
            q[i] = if k == 1 { 1.0 } else { minor.determinant().max(0.0) };
        }
    }
    let z: f64 = q.iter().sum();
    if normalize {
        if z <= 0.0 {
            return Err(Error::SingularSystem("zero partition value".into()));
        }
        for v in q.iter_mut() {
            *v /= z;
        }
    }
    Ok((ProbDist::new(q)?, z))
}

/// Orthonormal basis of `ker H`; singular values below `1e-10 · σ_max`
/// are treated as zero.
pub fn kernel_steady_states(h: &Hamiltonian) -> Subspace {
    Subspace::null_space(&h.matrix, 1e-10)
}

/// Schnakenberg's entropy production `(1/2) Σ_{i,j} J_ij(p) A_ij(p)`.
/// Nonnegative; zero iff all flows vanish. Errors when some pair has a
/// nonzero flow but an undefined affinity.
pub fn entropy_production(h: &Hamiltonian, p: &ProbDist) -> Result<f64> {
    let n = h.dim();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let fwd = h.matrix[(i, j)] * p.values()[j];
            let bwd = h.matrix[(j, i)] * p.values()[i];
            if fwd == 0.0 && bwd == 0.0 {
                continue;
            }
            if fwd <= 0.0 || bwd <= 0.0 {
                return Err(Error::AffinityUndefined {
                    i: h.state_order.label(i).to_string(),
                    j: h.state_order.label(j).to_string(),
                });
            }
            total += 0.5 * (fwd - bwd) * (fwd / bwd).ln();
        }
    }
    Ok(total)
}

#[cfg(test)]
pub(crate) fn two_state(alpha: f64, beta: f64) -> MarkovProcess {
    let states = FinSet::new(["A", "B"]).unwrap();
    MarkovProcess::new(
        states,
        vec![Edge::new("ab", "A", "B", alpha), Edge::new("ba", "B", "A", beta)],
    )
    .unwrap()
}

/// A three-state cycle: `A ↔ B` and `B ↔ C` at rate `alpha` in both
/// directions, `A → C` at `alpha`, `C → A` at `beta`. For `alpha ≠ beta`
/// the cycle products differ and no detailed balance exists.
#[cfg(test)]
pub(crate) fn three_cycle(alpha: f64, beta: f64) -> MarkovProcess {
    let states = FinSet::new(["A", "B", "C"]).unwrap();
    MarkovProcess::new(
        states,
        vec![
            Edge::new("ab", "A", "B", alpha),
            Edge::new("ba", "B", "A", alpha),
            Edge::new("bc", "B", "C", alpha),
            Edge::new("cb", "C", "B", alpha),
            Edge::new("ac", "A", "C", alpha),
            Edge::new("ca", "C", "A", beta),
        ],
    )
    .unwrap()
}
