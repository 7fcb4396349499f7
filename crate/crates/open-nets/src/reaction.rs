//! Reaction networks with rates and their mass-action vector fields.
//!
//! A network is stochastic-Petri-net data: species, transitions, and
//! complex-valued source/target maps. The mass-action field
//! `v(c) = Σ_τ r(τ)(t(τ) − s(τ)) c^{s(τ)}` is kept as an exact sparse
//! polynomial (exponent vector → coefficient, graded-lex ordered) so
//! that composition laws can be checked as structural equalities rather
//! than by sampling.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::finset::{FinMap, FinSet};
use crate::markov::MarkovProcess;

/// Exponent vector of a monomial, ordered graded-lexicographically:
/// total degree first, then lexicographic on the exponents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn eval(&self, c: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(c)
            .map(|(&e, &x)| x.powi(e as i32))
            .product()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// A sparse polynomial in the species concentrations. Zero coefficients
/// are never stored, so structural equality is canonical.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, f64>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn add_term(&mut self, exponents: Vec<u32>, coeff: f64) {
        if coeff == 0.0 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(Monomial(exponents)) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if *e.get() == 0.0 {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(coeff);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Evaluates with the convention `0⁰ = 1`.
    pub fn eval(&self, c: &[f64]) -> f64 {
        self.terms.iter().map(|(m, &coeff)| coeff * m.eval(c)).sum()
    }

    /// Partial derivative with respect to variable `k`.
    pub fn partial(&self, k: usize) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, coeff) in self.terms() {
            let e = m.0[k];
            if e == 0 {
                continue;
            }
            let mut exps = m.0.clone();
            exps[k] -= 1;
            out.add_term(exps, coeff * e as f64);
        }
        out
    }

    /// Renames variables along `f`: a monomial `Π c_σ^{e_σ}` becomes
    /// `Π c_{f(σ)}^{e_σ}`, merging exponents that land together.
    pub fn rename_variables(&self, f: &FinMap) -> Polynomial {
        let n_new = f.codomain().len();
        let mut out = Polynomial::zero();
        for (m, coeff) in self.terms() {
            let mut exps = vec![0u32; n_new];
            for (k, &e) in m.0.iter().enumerate() {
                exps[f.apply_idx(k)] += e;
            }
            out.add_term(exps, coeff);
        }
        out
    }
}

/// A polynomial vector field on `R^S`, one component per species.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyVectorField {
    nvars: usize,
    components: Vec<Polynomial>,
}

impl PolyVectorField {
    pub fn zero(nvars: usize) -> Self {
        PolyVectorField {
            nvars,
            components: vec![Polynomial::zero(); nvars],
        }
    }

    pub fn from_components(nvars: usize, components: Vec<Polynomial>) -> Result<Self> {
        if components.len() != nvars {
            return Err(Error::DimensionMismatch {
                expected: nvars,
                found: components.len(),
            });
        }
        Ok(PolyVectorField { nvars, components })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn component(&self, k: usize) -> &Polynomial {
        &self.components[k]
    }

    pub fn component_mut(&mut self, k: usize) -> &mut Polynomial {
        &mut self.components[k]
    }

    pub fn degree(&self) -> u32 {
        self.components.iter().map(Polynomial::degree).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Polynomial::is_zero)
    }

    pub fn add_assign(&mut self, other: &PolyVectorField) {
        assert_eq!(self.nvars, other.nvars);
        for (mine, theirs) in self.components.iter_mut().zip(&other.components) {
            for (m, c) in theirs.terms() {
                mine.add_term(m.0.clone(), c);
            }
        }
    }

    /// Exact Jacobian matrix evaluated at `c`.
    pub fn jacobian_at(&self, c: &[f64]) -> DMatrix<f64> {
        let n = self.nvars;
        DMatrix::from_fn(n, n, |i, j| self.components[i].partial(j).eval(c))
    }
}

/// Direct monomial evaluation of the field at a concentration vector.
pub fn evaluate(v: &PolyVectorField, c: &[f64]) -> Vec<f64> {
    assert_eq!(c.len(), v.nvars(), "concentration indexed by species");
    v.components.iter().map(|p| p.eval(c)).collect()
}

/// Petri-net data: species, transitions with complex-valued sources and
/// targets, and positive rate constants.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionNetwork {
    species: FinSet,
    transitions: FinSet,
    source: Vec<Vec<u32>>,
    target: Vec<Vec<u32>>,
    rates: Vec<f64>,
}

impl ReactionNetwork {
    pub fn new(
        species: FinSet,
        transitions: FinSet,
        source: Vec<Vec<u32>>,
        target: Vec<Vec<u32>>,
        rates: Vec<f64>,
    ) -> Result<Self> {
        let nt = transitions.len();
        if source.len() != nt || target.len() != nt || rates.len() != nt {
            return Err(Error::DimensionMismatch {
                expected: nt,
                found: source.len().min(target.len()).min(rates.len()),
            });
        }
        for (k, (s, t)) in source.iter().zip(&target).enumerate() {
            if s.len() != species.len() || t.len() != species.len() {
                return Err(Error::DimensionMismatch {
                    expected: species.len(),
                    found: s.len().min(t.len()),
                });
            }
            if rates[k] <= 0.0 || !rates[k].is_finite() {
                return Err(Error::InvalidRate {
                    id: transitions.label(k).to_string(),
                    rate: rates[k],
                });
            }
        }
        Ok(ReactionNetwork {
            species,
            transitions,
            source,
            target,
            rates,
        })
    }

    pub fn empty() -> Self {
        ReactionNetwork {
            species: FinSet::empty(),
            transitions: FinSet::empty(),
            source: vec![],
            target: vec![],
            rates: vec![],
        }
    }

    pub fn species(&self) -> &FinSet {
        &self.species
    }

    pub fn transitions(&self) -> &FinSet {
        &self.transitions
    }

    pub fn source(&self, t: usize) -> &[u32] {
        &self.source[t]
    }

    pub fn target(&self, t: usize) -> &[u32] {
        &self.target[t]
    }

    pub fn rate(&self, t: usize) -> f64 {
        self.rates[t]
    }

    /// Stoichiometry matrix with one column per transition,
    /// `N_{σ,τ} = t(τ)(σ) − s(τ)(σ)`.
    pub fn stoichiometry(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.species.len(), self.transitions.len(), |i, j| {
            self.target[j][i] as f64 - self.source[j][i] as f64
        })
    }
}

/// The law of mass action as an exact polynomial field:
/// `v(c) = Σ_τ r(τ) (t(τ) − s(τ)) c^{s(τ)}`.
pub fn mass_action_field(r: &ReactionNetwork) -> PolyVectorField {
    let n = r.species().len();
    let mut field = PolyVectorField::zero(n);
    for t in 0..r.transitions().len() {
        let rate = r.rate(t);
        let src = r.source(t);
        let tgt = r.target(t);
        for sigma in 0..n {
            let net = tgt[sigma] as f64 - src[sigma] as f64;
            if net != 0.0 {
                field.components[sigma].add_term(src.to_vec(), rate * net);
            }
        }
    }
    field
}

/// A fixed-step integration record.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.states.last().expect("trajectory has initial state")
    }
}

/// RK4 on the rate equation `dc/dt = v(c)`. A step is rejected (and the
/// integration aborted) if any concentration falls below `−1e-9`.
pub fn integrate_rate_equation(
    v: &PolyVectorField,
    c0: &[f64],
    t: f64,
    dt: f64,
) -> Result<Trajectory> {
    if c0.len() != v.nvars() {
        return Err(Error::DimensionMismatch {
            expected: v.nvars(),
            found: c0.len(),
        });
    }
    if dt <= 0.0 {
        return Err(Error::UnstableStep { dt, suggested: 1e-3 });
    }
    if let Some((k, &bad)) = c0.iter().enumerate().find(|(_, &x)| x < 0.0) {
        return Err(Error::NegativeConcentration {
            species: format!("index {k}"),
            value: bad,
        });
    }
    let steps = (t / dt).ceil().max(0.0) as usize;
    let dt_eff = if steps == 0 { 0.0 } else { t / steps as f64 };
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(c0.to_vec());
    let mut c = c0.to_vec();
    for k in 0..steps {
        let f = |x: &[f64]| evaluate(v, x);
        let add = |x: &[f64], d: &[f64], s: f64| -> Vec<f64> {
            x.iter().zip(d).map(|(&a, &b)| a + s * b).collect()
        };
        let k1 = f(&c);
        let k2 = f(&add(&c, &k1, dt_eff / 2.0));
        let k3 = f(&add(&c, &k2, dt_eff / 2.0));
        let k4 = f(&add(&c, &k3, dt_eff));
        for (i, x) in c.iter_mut().enumerate() {
            *x += dt_eff / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if let Some((i, &bad)) = c.iter().enumerate().find(|(_, &x)| x < -1e-9) {
            return Err(Error::NegativeConcentration {
                species: format!("index {i}"),
                value: bad,
            });
        }
        times.push(dt_eff * (k + 1) as f64);
        states.push(c.clone());
    }
    Ok(Trajectory { times, states })
}

/// Relabels species along `f`: complexes are pushed forward entrywise,
/// transitions and rates are unchanged.
pub fn map_network(f: &FinMap, r: &ReactionNetwork) -> ReactionNetwork {
    assert_eq!(f.domain(), r.species(), "map domain must be the species set");
    let n_new = f.codomain().len();
    let push = |complex: &[u32]| -> Vec<u32> {
        let mut out = vec![0u32; n_new];
        for (k, &e) in complex.iter().enumerate() {
            out[f.apply_idx(k)] += e;
        }
        out
    };
    ReactionNetwork {
        species: f.codomain().clone(),
        transitions: r.transitions.clone(),
        source: r.source.iter().map(|c| push(c)).collect(),
        target: r.target.iter().map(|c| push(c)).collect(),
        rates: r.rates.clone(),
    }
}

/// Moves a vector field along `f` as `f_* ∘ v ∘ f^*`: variables are
/// renamed by the pullback, components summed by the pushforward.
pub fn push_pull_field(f: &FinMap, v: &PolyVectorField) -> PolyVectorField {
    assert_eq!(
        f.domain().len(),
        v.nvars(),
        "field must be indexed by the map domain"
    );
    let n_new = f.codomain().len();
    let mut out = PolyVectorField::zero(n_new);
    for (sigma, comp) in v.components.iter().enumerate() {
        let renamed = comp.rename_variables(f);
        let target = f.apply_idx(sigma);
        for (m, c) in renamed.terms() {
            out.components[target].add_term(m.0.clone(), c);
        }
    }
    out
}

/// Views a Markov process as the reaction network whose transitions have
/// unit-vector sources and targets; its mass-action field is `H·c`.
pub fn markov_as_reaction(m: &MarkovProcess) -> ReactionNetwork {
    let n = m.states().len();
    let transitions = FinSet::new(m.edges().iter().map(|e| e.id.clone()))
        .expect("edge ids are distinct");
    let mut source = Vec::new();
    let mut target = Vec::new();
    let mut rates = Vec::new();
    for e in m.edges() {
        let s = m.states().index_of(&e.source).unwrap();
        let t = m.states().index_of(&e.target).unwrap();
        let mut sv = vec![0u32; n];
        sv[s] = 1;
        let mut tv = vec![0u32; n];
        tv[t] = 1;
        source.push(sv);
        target.push(tv);
        rates.push(e.rate);
    }
    ReactionNetwork {
        species: m.states().clone(),
        transitions,
        source,
        target,
        rates,
    }
}
