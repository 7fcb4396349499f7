//! JSON documents, run configuration, and the operations behind the
//! `open-nets` command-line front end.
//!
//! Documents carry a `"schema": "open-nets/1"` tag and one of two kinds:
//! `"markov"` (states, rate-labeled edges, optional equilibrium block)
//! or `"reaction"` (species and Petri-net transitions). Cospan legs are
//! named input/output ports with target assignments. Maps serialize as
//! sorted objects so re-serialization is canonical.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::behavior_markov::{blackbox_markov, check_naturality};
use crate::behavior_rx::{BehaviorOracle, BoundaryTuple, Membership, OracleConfig};
use crate::error::{Error, Result};
use crate::finset::{Cospan, FinMap, FinSet};
use crate::linrel::{compose_rel, equal_rel, DEFAULT_RANK_TOL};
use crate::markov::{
    build_hamiltonian, check_detailed_balance, check_kolmogorov, kernel_steady_states,
    matrix_tree_steady_state, Edge, MarkovProcess, ProbDist,
};
use crate::open_markov::{
    boundary_flows, compose_open, compose_open_db, open_master_step,
    solve_open_master_fixed_boundary, tensor_open, BoundaryData, OpenDetailedBalanced,
    OpenMarkov,
};
use crate::open_reaction::{
    compose_dynam, compose_open_rx, graybox, open_rate_step, tensor_open_rx, OpenDynam,
    OpenReactionNetwork,
};
use crate::reaction::ReactionNetwork;
use crate::solver::NewtonConfig;
use crate::thermo::{f_divergence_rate, ConvexFn};

pub const SCHEMA: &str = "open-nets/1";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EdgeDoc {
    pub id: String,
    pub source: String,
    pub target: String,
    pub rate: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TransitionDoc {
    pub name: String,
    #[serde(default)]
    pub input: BTreeMap<String, u32>,
    #[serde(default)]
    pub output: BTreeMap<String, u32>,
    pub rate: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PortDoc {
    pub name: String,
    pub state: String,
}

/// A network document: an open Markov process or open reaction network.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NetworkDocument {
    pub schema: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub states: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<EdgeDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub species: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub transitions: Vec<TransitionDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energies: Option<BTreeMap<String, f64>>,
    #[serde(default)]
    pub inputs: Vec<PortDoc>,
    #[serde(default)]
    pub outputs: Vec<PortDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

impl NetworkDocument {
    pub fn parse(text: &str) -> Result<Self> {
        let doc: NetworkDocument =
            serde_json::from_str(text).map_err(|e| Error::InvalidDocument(e.to_string()))?;
        doc.validate_shape()?;
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    fn validate_shape(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(Error::InvalidDocument(format!(
                "unsupported schema {:?}, expected {SCHEMA:?}",
                self.schema
            )));
        }
        match self.kind.as_str() {
            "markov" | "reaction" => Ok(()),
            other => Err(Error::InvalidDocument(format!(
                "unknown kind {other:?}"
            ))),
        }
    }

    pub fn is_markov(&self) -> bool {
        self.kind == "markov"
    }

    fn apex(&self) -> Result<FinSet> {
        if self.is_markov() {
            FinSet::new(self.states.iter().cloned())
        } else {
            FinSet::new(self.species.iter().cloned())
        }
    }

    fn legs(&self, apex: &FinSet) -> Result<Cospan> {
        let left = FinSet::new(self.inputs.iter().map(|p| p.name.clone()))?;
        let right = FinSet::new(self.outputs.iter().map(|p| p.name.clone()))?;
        let in_leg = FinMap::from_indices(
            left,
            apex.clone(),
            self.inputs
                .iter()
                .map(|p| apex.require(&p.state))
                .collect::<Result<_>>()?,
        )?;
        let out_leg = FinMap::from_indices(
            right,
            apex.clone(),
            self.outputs
                .iter()
                .map(|p| apex.require(&p.state))
                .collect::<Result<_>>()?,
        )?;
        Cospan::new(in_leg, out_leg)
    }

    pub fn to_open_markov(&self) -> Result<OpenMarkov> {
        if !self.is_markov() {
            return Err(Error::InvalidDocument(
                "expected a markov document".to_string(),
            ));
        }
        let apex = self.apex()?;
        let edges = self
            .edges
            .iter()
            .map(|e| Edge::new(e.id.clone(), e.source.clone(), e.target.clone(), e.rate))
            .collect();
        let process = MarkovProcess::new(apex.clone(), edges)?;
        OpenMarkov::new(self.legs(&apex)?, process)
    }

    /// The equilibrium block: `q` directly, or `q = e^{−ε}` from
    /// energies. Specifying both is rejected.
    pub fn equilibrium(&self, apex: &FinSet) -> Result<Option<ProbDist>> {
        match (&self.q, &self.energies) {
            (Some(_), Some(_)) => Err(Error::InvalidDocument(
                "specify q or energies, not both".to_string(),
            )),
            (Some(q), None) => {
                let mut vals = vec![0.0f64; apex.len()];
                for (label, &v) in q {
                    vals[apex.require(label)?] = v;
                }
                Ok(Some(ProbDist::new(vals)?))
            }
            (None, Some(e)) => {
                let mut vals = vec![0.0f64; apex.len()];
                for (label, &eps) in e {
                    vals[apex.require(label)?] = (-eps).exp();
                }
                // unlisted states default to energy 0, i.e. q = 1
                for (k, v) in vals.iter_mut().enumerate() {
                    if *v == 0.0 && !e.contains_key(apex.label(k)) {
                        *v = 1.0;
                    }
                }
                Ok(Some(ProbDist::new(vals)?))
            }
            (None, None) => Ok(None),
        }
    }

    pub fn to_open_db(&self) -> Result<OpenDetailedBalanced> {
        let open = self.to_open_markov()?;
        let q = self
            .equilibrium(&open.cospan.apex)?
            .ok_or_else(|| Error::InvalidDocument("document has no q or energies".to_string()))?;
        OpenDetailedBalanced::new(open, q)
    }

    pub fn to_open_reaction(&self) -> Result<OpenReactionNetwork> {
        if self.is_markov() {
            return Err(Error::InvalidDocument(
                "expected a reaction document".to_string(),
            ));
        }
        let apex = self.apex()?;
        let transitions = FinSet::new(self.transitions.iter().map(|t| t.name.clone()))?;
        let mut source = Vec::new();
        let mut target = Vec::new();
        let mut rates = Vec::new();
        for t in &self.transitions {
            let mut s = vec![0u32; apex.len()];
            for (sp, &count) in &t.input {
                s[apex.require(sp)?] = count;
            }
            let mut tg = vec![0u32; apex.len()];
            for (sp, &count) in &t.output {
                tg[apex.require(sp)?] = count;
            }
            source.push(s);
            target.push(tg);
            rates.push(t.rate);
        }
        let network = ReactionNetwork::new(apex.clone(), transitions, source, target, rates)?;
        OpenReactionNetwork::new(self.legs(&apex)?, network)
    }

    pub fn to_open_dynam(&self) -> Result<OpenDynam> {
        Ok(graybox(&self.to_open_reaction()?))
    }

    pub fn from_open_markov(open: &OpenMarkov, q: Option<&ProbDist>) -> Self {
        let apex = &open.cospan.apex;
        NetworkDocument {
            schema: SCHEMA.to_string(),
            kind: "markov".to_string(),
            states: apex.labels().to_vec(),
            edges: open
                .process
                .edges()
                .iter()
                .map(|e| EdgeDoc {
                    id: e.id.clone(),
                    source: e.source.clone(),
                    target: e.target.clone(),
                    rate: e.rate,
                })
                .collect(),
            species: vec![],
            transitions: vec![],
            q: q.map(|q| {
                apex.labels()
                    .iter()
                    .zip(q.values())
                    .map(|(l, &v)| (l.clone(), v))
                    .collect()
            }),
            energies: None,
            inputs: ports(&open.cospan, true),
            outputs: ports(&open.cospan, false),
            provenance: None,
        }
    }

    pub fn from_open_reaction(open: &OpenReactionNetwork) -> Self {
        let apex = &open.cospan.apex;
        let net = &open.network;
        let mut transitions = Vec::new();
        for t in 0..net.transitions().len() {
            let complex = |v: &[u32]| -> BTreeMap<String, u32> {
                v.iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(k, &c)| (apex.label(k).to_string(), c))
                    .collect()
            };
            transitions.push(TransitionDoc {
                name: net.transitions().label(t).to_string(),
                input: complex(net.source(t)),
                output: complex(net.target(t)),
                rate: net.rate(t),
            });
        }
        NetworkDocument {
            schema: SCHEMA.to_string(),
            kind: "reaction".to_string(),
            states: vec![],
            edges: vec![],
            species: apex.labels().to_vec(),
            transitions,
            q: None,
            energies: None,
            inputs: ports(&open.cospan, true),
            outputs: ports(&open.cospan, false),
            provenance: None,
        }
    }
}

fn ports(cospan: &Cospan, input_side: bool) -> Vec<PortDoc> {
    let (set, leg) = if input_side {
        (&cospan.left, &cospan.in_leg)
    } else {
        (&cospan.right, &cospan.out_leg)
    };
    set.labels()
        .iter()
        .enumerate()
        .map(|(k, name)| PortDoc {
            name: name.clone(),
            state: cospan.apex.label(leg.apply_idx(k)).to_string(),
        })
        .collect()
}

/// Tolerances, integrator and solver settings, and the seed — everything
/// a run needs for bit-identical reproduction.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct RunConfig {
    pub tolerances: Tolerances,
    pub integrator: IntegratorConfig,
    pub solver: SolverSettings,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct Tolerances {
    pub residual: f64,
    pub rank: f64,
    pub equality: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct SolverSettings {
    pub starts: usize,
    pub iters: usize,
    #[serde(rename = "box")]
    pub start_box: [f64; 2],
    pub damping_halvings: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            residual: 1e-10,
            rank: 1e-9,
            equality: 1e-8,
        }
    }
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { dt: 0.01, t: 10.0 }
    }
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            starts: 32,
            iters: 100,
            start_box: [0.0, 10.0],
            damping_halvings: 20,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidDocument(e.to_string()))
    }

    fn validate(&self) -> Result<()> {
        let ok = self.tolerances.residual > 0.0
            && self.tolerances.rank > 0.0
            && self.tolerances.equality > 0.0
            && self.integrator.dt > 0.0
            && self.solver.starts > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidDocument(
                "tolerances and steps must be positive".to_string(),
            ))
        }
    }

    pub fn oracle_config(&self) -> OracleConfig {
        OracleConfig {
            residual_tol: self.tolerances.residual,
            rank_tol: self.tolerances.rank,
            newton: NewtonConfig {
                max_iters: self.solver.iters,
                multistart: self.solver.starts,
                box_lo: self.solver.start_box[0],
                box_hi: self.solver.start_box[1],
                damping_halvings: self.solver.damping_halvings,
                residual_tol: self.tolerances.residual,
            },
            seed: self.seed,
        }
    }
}

/// Exit-code contract: 0 success/unknown, 2 invalid input,
/// 3 composition mismatch, 4 numeric failure.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidDocument(_)
        | Error::Json(_)
        | Error::Io(_)
        | Error::UnknownLabel(_)
        | Error::DuplicateLabel(_)
        | Error::InvalidRate { .. }
        | Error::MalformedTuple(_)
        | Error::Precondition(_)
        | Error::DimensionMismatch { .. }
        | Error::NegativeEntry { .. }
        | Error::NonpositiveProbability { .. } => 2,
        Error::KindMismatch { .. }
        | Error::InterfaceMismatch { .. }
        | Error::DomainMismatch { .. }
        | Error::EquilibriumMismatch { .. } => 3,
        Error::UnstableStep { .. }
        | Error::NegativeConcentration { .. }
        | Error::SingularSystem(_)
        | Error::NotSteady { .. }
        | Error::DisconnectedNormalization
        | Error::AffinityUndefined { .. }
        | Error::NotInfinitesimalStochastic(_)
        | Error::DetailedBalanceViolation { .. }
        | Error::NonlinearField(_)
        | Error::NotConvex(_) => 4,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckItem {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub kind: String,
    pub checks: Vec<CheckItem>,
}

/// Schema and invariant checks: labels resolve, rates positive, and for
/// Markov documents the Kolmogorov criterion and (when an equilibrium
/// block is present) detailed balance.
pub fn cmd_validate(doc: &NetworkDocument) -> ValidationReport {
    let mut checks = Vec::new();
    let mut push = |name: &str, result: std::result::Result<String, String>| {
        let (passed, detail) = match result {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        checks.push(CheckItem {
            name: name.to_string(),
            passed,
            detail,
        });
    };

    if doc.is_markov() {
        match doc.to_open_markov() {
            Ok(open) => {
                push("structure", Ok(format!(
                    "{} states, {} edges, {} inputs, {} outputs",
                    open.cospan.apex.len(),
                    open.process.edges().len(),
                    open.cospan.left.len(),
                    open.cospan.right.len()
                )));
                let h = open.hamiltonian();
                push("infinitesimal-stochastic", Ok("column sums vanish".to_string()));
                let kolmogorov = check_kolmogorov(&open.process, 1e-9);
                push(
                    "kolmogorov",
                    Ok(if kolmogorov {
                        "rates admit a detailed-balanced equilibrium".to_string()
                    } else {
                        "rates violate the cycle criterion (no detailed balance)".to_string()
                    }),
                );
                match doc.equilibrium(&open.cospan.apex) {
                    Ok(Some(q)) => {
                        if check_detailed_balance(&h, &q, 1e-9) {
                            push("detailed-balance", Ok("q block balances in detail".to_string()));
                        } else {
                            push(
                                "detailed-balance",
                                Err("q block is not a detailed-balanced equilibrium".to_string()),
                            );
                        }
                    }
                    Ok(None) => {}
                    Err(e) => push("detailed-balance", Err(e.to_string())),
                }
            }
            Err(e) => push("structure", Err(e.to_string())),
        }
    } else {
        match doc.to_open_reaction() {
            Ok(open) => {
                push("structure", Ok(format!(
                    "{} species, {} transitions",
                    open.cospan.apex.len(),
                    open.network.transitions().len()
                )));
            }
            Err(e) => push("structure", Err(e.to_string())),
        }
    }

    ValidationReport {
        valid: checks.iter().all(|c| c.passed),
        kind: doc.kind.clone(),
        checks,
    }
}

/// Composes two documents of the same kind along their shared interface.
pub fn cmd_compose(a: &NetworkDocument, b: &NetworkDocument) -> Result<NetworkDocument> {
    if a.kind != b.kind {
        return Err(Error::KindMismatch {
            left: a.kind.clone(),
            right: b.kind.clone(),
        });
    }
    let mut out = if a.is_markov() {
        let ma = a.to_open_markov()?;
        let mb = b.to_open_markov()?;
        let qa = a.equilibrium(&ma.cospan.apex)?;
        let qb = b.equilibrium(&mb.cospan.apex)?;
        match (qa, qb) {
            (Some(qa), Some(qb)) => {
                let composite = compose_open_db(
                    &OpenDetailedBalanced::new(ma, qa)?,
                    &OpenDetailedBalanced::new(mb, qb)?,
                    1e-9,
                )?;
                NetworkDocument::from_open_markov(&composite.open, Some(&composite.q))
            }
            _ => {
                let composite = compose_open(&ma, &mb)?;
                NetworkDocument::from_open_markov(&composite, None)
            }
        }
    } else {
        let ra = a.to_open_reaction()?;
        let rb = b.to_open_reaction()?;
        NetworkDocument::from_open_reaction(&compose_open_rx(&ra, &rb)?)
    };
    // record the gluing: which output port met which input port
    let pairs: Vec<serde_json::Value> = a
        .outputs
        .iter()
        .zip(&b.inputs)
        .map(|(o, i)| {
            serde_json::json!({
                "port": o.name,
                "left_state": o.state,
                "right_state": i.state,
            })
        })
        .collect();
    out.provenance = Some(serde_json::json!({
        "operation": "compose",
        "gluing": pairs,
    }));
    Ok(out)
}

/// Disjoint union of two documents of the same kind.
pub fn cmd_tensor(a: &NetworkDocument, b: &NetworkDocument) -> Result<NetworkDocument> {
    if a.kind != b.kind {
        return Err(Error::KindMismatch {
            left: a.kind.clone(),
            right: b.kind.clone(),
        });
    }
    let mut out = if a.is_markov() {
        let t = tensor_open(&a.to_open_markov()?, &b.to_open_markov()?);
        NetworkDocument::from_open_markov(&t, None)
    } else {
        let t = tensor_open_rx(&a.to_open_reaction()?, &b.to_open_reaction()?);
        NetworkDocument::from_open_reaction(&t)
    };
    out.provenance = Some(serde_json::json!({"operation": "tensor"}));
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct RelationOutput {
    pub dom_dim: usize,
    pub cod_dim: usize,
    pub dim: usize,
    /// Orthonormal basis vectors, one row per behavior direction.
    pub basis: Vec<Vec<f64>>,
    pub summary: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub samples_requested: usize,
    pub samples_found: usize,
    pub membership_spot_checks: usize,
    pub all_samples_pass: bool,
    pub summary: String,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum BlackboxOutput {
    Linear(RelationOutput),
    Oracle(OracleReport),
}

/// Black-boxes a document: a linear relation for Markov documents,
/// a sample-and-membership report for reaction documents.
pub fn cmd_blackbox(
    doc: &NetworkDocument,
    config: &RunConfig,
    n_samples: usize,
) -> Result<BlackboxOutput> {
    config.validate()?;
    if doc.is_markov() {
        let open = doc.to_open_markov()?;
        let behavior = blackbox_markov(&open);
        let basis: Vec<Vec<f64>> = (0..behavior.rel.dim())
            .map(|k| behavior.rel.space.basis().column(k).iter().cloned().collect())
            .collect();
        Ok(BlackboxOutput::Linear(RelationOutput {
            dom_dim: behavior.rel.dom_dim,
            cod_dim: behavior.rel.cod_dim,
            dim: behavior.rel.dim(),
            basis,
            summary: format!(
                "behavior is a {}-dimensional subspace of R^{}",
                behavior.rel.dim(),
                behavior.rel.dom_dim + behavior.rel.cod_dim
            ),
        }))
    } else {
        let dynam = doc.to_open_dynam()?;
        let oracle = BehaviorOracle::new(dynam, config.oracle_config());
        let samples = oracle.sample(n_samples, config.seed);
        let mut all_pass = true;
        for s in &samples {
            if !oracle.membership(&s.tuple)?.is_yes() {
                all_pass = false;
            }
        }
        Ok(BlackboxOutput::Oracle(OracleReport {
            samples_requested: n_samples,
            samples_found: samples.len(),
            membership_spot_checks: samples.len(),
            all_samples_pass: all_pass,
            summary: format!(
                "{} of {} requested samples found; membership re-accepts {}",
                samples.len(),
                n_samples,
                if all_pass { "all" } else { "NOT all" }
            ),
        }))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MembershipReport {
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<String>,
    pub unphysical: bool,
}

/// Membership query against a reaction document's behavior oracle.
pub fn cmd_membership(
    doc: &NetworkDocument,
    tuple: &BoundaryTuple,
    config: &RunConfig,
) -> Result<MembershipReport> {
    config.validate()?;
    let oracle = BehaviorOracle::new(doc.to_open_dynam()?, config.oracle_config());
    Ok(match oracle.membership(tuple)? {
        Membership::Yes { witness, unphysical } => MembershipReport {
            verdict: "yes".to_string(),
            witness: Some(witness),
            certificate: None,
            unphysical,
        },
        Membership::No { certificate } => MembershipReport {
            verdict: "no".to_string(),
            witness: None,
            certificate: Some(certificate),
            unphysical: false,
        },
        Membership::Unknown => MembershipReport {
            verdict: "unknown".to_string(),
            witness: None,
            certificate: None,
            unphysical: false,
        },
    })
}

/// Samples a reaction document's behavior into CSV rows.
pub fn cmd_sample_csv(doc: &NetworkDocument, n: usize, config: &RunConfig) -> Result<String> {
    config.validate()?;
    let dynam = doc.to_open_dynam()?;
    let oracle = BehaviorOracle::new(dynam, config.oracle_config());
    let samples = oracle.sample(n, config.seed);
    let cospan = &oracle.system.cospan;
    let mut header = Vec::new();
    for l in cospan.left.labels() {
        header.push(format!("in_conc_{l}"));
    }
    for l in cospan.left.labels() {
        header.push(format!("inflow_{l}"));
    }
    for l in cospan.right.labels() {
        header.push(format!("out_conc_{l}"));
    }
    for l in cospan.right.labels() {
        header.push(format!("outflow_{l}"));
    }
    let mut out = header.join(",");
    out.push('\n');
    for s in &samples {
        let row: Vec<String> = s
            .tuple
            .in_conc
            .iter()
            .chain(&s.tuple.inflow)
            .chain(&s.tuple.out_conc)
            .chain(&s.tuple.outflow)
            .map(|v| format!("{v:.12e}"))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// One piecewise-constant segment of a boundary schedule.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleSegment {
    pub t_end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inflow: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outflow: Option<BTreeMap<String, f64>>,
}

pub fn parse_schedule(text: &str) -> Result<Vec<ScheduleSegment>> {
    serde_json::from_str(text).map_err(|e| Error::InvalidDocument(e.to_string()))
}

fn initial_state(
    doc: &NetworkDocument,
    apex: &FinSet,
    p0: Option<&BTreeMap<String, f64>>,
) -> Result<Vec<f64>> {
    match p0 {
        Some(map) => {
            let mut vals = vec![0.0; apex.len()];
            for (label, &v) in map {
                vals[apex.require(label)?] = v;
            }
            Ok(vals)
        }
        None => match doc.equilibrium(apex)? {
            Some(q) => Ok(q.values().to_vec()),
            None => Ok(vec![1.0; apex.len()]),
        },
    }
}

/// Simulates a document under a piecewise-constant boundary schedule and
/// renders a CSV trajectory (state columns headed by labels, plus
/// entropy-report columns for Markov documents carrying an equilibrium).
pub fn cmd_simulate(
    doc: &NetworkDocument,
    schedule: &[ScheduleSegment],
    p0: Option<&BTreeMap<String, f64>>,
    config: &RunConfig,
) -> Result<String> {
    config.validate()?;
    let dt = config.integrator.dt;
    let t_total = config.integrator.t;

    if doc.is_markov() {
        let open = doc.to_open_markov()?;
        let apex = open.cospan.apex.clone();
        let q = doc.equilibrium(&apex)?;
        let kl = ConvexFn::kl();

        let mut header: Vec<String> = vec!["t".to_string()];
        header.extend(apex.labels().iter().cloned());
        header.push("total".to_string());
        if q.is_some() {
            header.extend(
                ["entropy_value", "entropy_rate", "entropy_internal", "entropy_boundary"]
                    .map(String::from),
            );
        }
        let mut out = header.join(",");
        out.push('\n');

        let mut p = ProbDist::new(initial_state(doc, &apex, p0)?)?;
        let mut t = 0.0;
        // boundary time-derivatives for the entropy split: zero when the
        // boundary is held, (i_*I − o_*O)_b + (Hp)_b under flow driving
        let boundary_dpdt =
            |p: &ProbDist, segment: Option<&ScheduleSegment>| -> Result<Option<Vec<f64>>> {
                let data = match segment {
                    Some(seg) => seg.boundary_data(&open.cospan)?,
                    None => BoundaryData::Flows {
                        inflow: vec![0.0; open.cospan.left.len()],
                        outflow: vec![0.0; open.cospan.right.len()],
                    },
                };
                match data {
                    BoundaryData::FixedProbs(_) => Ok(None),
                    BoundaryData::Flows { inflow, outflow } => {
                        let h = open.hamiltonian();
                        let hp = h.apply(p.values());
                        let mut drive = crate::finset::pushforward(&open.cospan.in_leg, &inflow);
                        let out_push = crate::finset::pushforward(&open.cospan.out_leg, &outflow);
                        for (d, o) in drive.iter_mut().zip(&out_push) {
                            *d -= o;
                        }
                        Ok(Some(
                            open.boundary().iter().map(|&b| hp[b] + drive[b]).collect(),
                        ))
                    }
                }
            };
        let emit = |t: f64,
                    p: &ProbDist,
                    segment: Option<&ScheduleSegment>,
                    out: &mut String|
         -> Result<()> {
            let mut row = vec![format!("{t:.6}")];
            row.extend(p.values().iter().map(|v| format!("{v:.12e}")));
            row.push(format!("{:.12e}", p.total()));
            if let Some(q) = &q {
                let dpdt = boundary_dpdt(p, segment)?;
                let report = f_divergence_rate(&open, p, q, &kl, dpdt.as_deref(), None)?;
                row.push(format!("{:.12e}", report.value));
                row.push(format!("{:.12e}", report.rate));
                row.push(format!("{:.12e}", report.internal_term));
                row.push(format!("{:.12e}", report.boundary_term));
            }
            out.push_str(&row.join(","));
            out.push('\n');
            Ok(())
        };
        emit(t, &p, schedule.iter().find(|s| t < s.t_end), &mut out)?;

        while t < t_total - 1e-12 {
            let segment = schedule.iter().find(|s| t < s.t_end);
            let step = dt.min(t_total - t);
            p = step_markov(&open, &p, segment, step)?;
            t += step;
            emit(t, &p, schedule.iter().find(|s| t < s.t_end), &mut out)?;
        }
        Ok(out)
    } else {
        let dynam = doc.to_open_dynam()?;
        let apex = dynam.cospan.apex.clone();
        let mut header: Vec<String> = vec!["t".to_string()];
        header.extend(apex.labels().iter().cloned());
        let mut out = header.join(",");
        out.push('\n');

        let mut c = initial_state(doc, &apex, p0)?;
        let mut t = 0.0;
        let emit = |t: f64, c: &[f64], out: &mut String| {
            let mut row = vec![format!("{t:.6}")];
            row.extend(c.iter().map(|v| format!("{v:.12e}")));
            out.push_str(&row.join(","));
            out.push('\n');
        };
        emit(t, &c, &mut out);
        while t < t_total - 1e-12 {
            let segment = schedule.iter().find(|s| t < s.t_end);
            let (inflow, outflow) = segment_flows(&dynam.cospan, segment)?;
            let step = dt.min(t_total - t);
            c = open_rate_step(&dynam, &c, &inflow, &outflow, step)?;
            t += step;
            emit(t, &c, &mut out);
        }
        Ok(out)
    }
}

fn segment_flows(
    cospan: &Cospan,
    segment: Option<&ScheduleSegment>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut inflow = vec![0.0; cospan.left.len()];
    let mut outflow = vec![0.0; cospan.right.len()];
    if let Some(seg) = segment {
        if let Some(map) = &seg.inflow {
            for (port, &v) in map {
                inflow[cospan.left.require(port)?] = v;
            }
        }
        if let Some(map) = &seg.outflow {
            for (port, &v) in map {
                outflow[cospan.right.require(port)?] = v;
            }
        }
    }
    Ok((inflow, outflow))
}

impl ScheduleSegment {
    /// Resolves the segment into boundary data, enforcing that exactly
    /// one of the two driving forms is set.
    pub fn boundary_data(&self, cospan: &Cospan) -> Result<BoundaryData> {
        match (&self.fixed, self.inflow.is_some() || self.outflow.is_some()) {
            (Some(_), true) => Err(Error::InvalidDocument(
                "a schedule segment sets either fixed probabilities or flows, not both"
                    .to_string(),
            )),
            (Some(fixed), false) => Ok(BoundaryData::FixedProbs(
                fixed.iter().map(|(l, &v)| (l.clone(), v)).collect(),
            )),
            (None, _) => {
                let (inflow, outflow) = segment_flows(cospan, Some(self))?;
                Ok(BoundaryData::Flows { inflow, outflow })
            }
        }
    }
}

fn step_markov(
    open: &OpenMarkov,
    p: &ProbDist,
    segment: Option<&ScheduleSegment>,
    dt: f64,
) -> Result<ProbDist> {
    let data = match segment {
        Some(seg) => seg.boundary_data(&open.cospan)?,
        None => BoundaryData::Flows {
            inflow: vec![0.0; open.cospan.left.len()],
            outflow: vec![0.0; open.cospan.right.len()],
        },
    };
    match data {
        BoundaryData::FixedProbs(fixed) => {
            // held boundary probabilities: clamp, step, clamp
            let apex = &open.cospan.apex;
            let mut vals = p.values().to_vec();
            for (label, v) in &fixed {
                vals[apex.require(label)?] = *v;
            }
            let stepped = open_master_step(
                open,
                &ProbDist::new(vals)?,
                &vec![0.0; open.cospan.left.len()],
                &vec![0.0; open.cospan.right.len()],
                dt,
            )?;
            let mut vals = stepped.values().to_vec();
            for (label, v) in &fixed {
                vals[apex.require(label)?] = *v;
            }
            ProbDist::new(vals)
        }
        BoundaryData::Flows { inflow, outflow } => {
            open_master_step(open, p, &inflow, &outflow, dt)
        }
    }
}

/// Row-major CSV export of a generator, header = state labels.
pub fn hamiltonian_csv(h: &crate::markov::Hamiltonian) -> String {
    let mut out = h.state_order.labels().join(",");
    out.push('\n');
    for i in 0..h.dim() {
        let row: Vec<String> = (0..h.dim()).map(|j| format!("{:.12e}", h.matrix[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// One-row CSV export of a distribution, header = state labels.
pub fn prob_dist_csv(p: &ProbDist, labels: &[String]) -> String {
    let mut out = labels.join(",");
    out.push('\n');
    let row: Vec<String> = p.values().iter().map(|v| format!("{v:.12e}")).collect();
    out.push_str(&row.join(","));
    out.push('\n');
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct SteadyStateReport {
    pub p: BTreeMap<String, f64>,
    pub boundary_flows: BTreeMap<String, f64>,
    pub degenerate: bool,
    pub kernel_dimension: usize,
}

/// Fixed-boundary steady state of a Markov document; boundary values are
/// given per state label.
pub fn cmd_steady_state(
    doc: &NetworkDocument,
    boundary: &BTreeMap<String, f64>,
) -> Result<SteadyStateReport> {
    let open = doc.to_open_markov()?;
    let b_idx = open.boundary();
    let apex = &open.cospan.apex;
    let mut b = Vec::with_capacity(b_idx.len());
    for &s in &b_idx {
        let label = apex.label(s);
        let v = boundary.get(label).copied().ok_or_else(|| {
            Error::InvalidDocument(format!("missing boundary value for state {label:?}"))
        })?;
        b.push(v);
    }
    let sol = solve_open_master_fixed_boundary(&open, &b)?;
    let flows = boundary_flows(&open, &sol.p)?;
    Ok(SteadyStateReport {
        p: apex
            .labels()
            .iter()
            .zip(sol.p.values())
            .map(|(l, &v)| (l.clone(), v))
            .collect(),
        boundary_flows: b_idx
            .iter()
            .zip(&flows)
            .map(|(&s, &f)| (apex.label(s).to_string(), f))
            .collect(),
        degenerate: sol.degenerate,
        kernel_dimension: sol.kernel.len(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeSteadyStateReport {
    pub q: BTreeMap<String, f64>,
    pub partition_value: f64,
    pub kernel_dimension: usize,
}

/// Matrix-tree steady state (Kirchhoff minors) with the partition value.
pub fn cmd_tree_steady_state(
    doc: &NetworkDocument,
    normalize: bool,
) -> Result<TreeSteadyStateReport> {
    let open = doc.to_open_markov()?;
    let (q, z) = matrix_tree_steady_state(&open.process, normalize)?;
    let h = build_hamiltonian(&open.process);
    let kernel = kernel_steady_states(&h);
    Ok(TreeSteadyStateReport {
        q: open
            .cospan
            .apex
            .labels()
            .iter()
            .zip(q.values())
            .map(|(l, &v)| (l.clone(), v))
            .collect(),
        partition_value: z,
        kernel_dimension: kernel.dim(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyStep {
    pub t: f64,
    pub value: f64,
    pub rate: f64,
    pub internal: f64,
    pub boundary: f64,
}

/// Evolves a Markov document (boundary held at its initial values) and
/// reports the relative-entropy diagnostics per timestep.
pub fn cmd_entropy_report(
    doc: &NetworkDocument,
    p0: Option<&BTreeMap<String, f64>>,
    config: &RunConfig,
) -> Result<Vec<EntropyStep>> {
    config.validate()?;
    let open = doc.to_open_markov()?;
    let apex = open.cospan.apex.clone();
    let q = doc
        .equilibrium(&apex)?
        .ok_or_else(|| Error::InvalidDocument("entropy report needs a q or energies block".to_string()))?;
    let kl = ConvexFn::kl();
    let mut p = ProbDist::new(initial_state(doc, &apex, p0)?)?;
    let fixed: BTreeMap<String, f64> = open
        .boundary()
        .iter()
        .map(|&s| (apex.label(s).to_string(), p.values()[s]))
        .collect();
    let segment = ScheduleSegment {
        t_end: f64::INFINITY,
        fixed: if fixed.is_empty() { None } else { Some(fixed) },
        inflow: None,
        outflow: None,
    };
    let mut out = Vec::new();
    let mut t = 0.0;
    let dt = config.integrator.dt;
    while t < config.integrator.t - 1e-12 {
        let report = f_divergence_rate(&open, &p, &q, &kl, None, None)?;
        out.push(EntropyStep {
            t,
            value: report.value,
            rate: report.rate,
            internal: report.internal_term,
            boundary: report.boundary_term,
        });
        let step = dt.min(config.integrator.t - t);
        p = step_markov(&open, &p, Some(&segment), step)?;
        t += step;
    }
    let report = f_divergence_rate(&open, &p, &q, &kl, None, None)?;
    out.push(EntropyStep {
        t,
        value: report.value,
        rate: report.rate,
        internal: report.internal_term,
        boundary: report.boundary_term,
    });
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub law: String,
    pub pass: bool,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<CheckCounts>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CheckCounts {
    pub checked: usize,
    pub passed: usize,
    pub failed: usize,
    pub unknown: usize,
}

/// Machine-checkable laws over one or two documents.
pub fn cmd_check(
    law: &str,
    a: &NetworkDocument,
    b: Option<&NetworkDocument>,
    config: &RunConfig,
) -> Result<CheckReport> {
    config.validate()?;
    let tol = config.tolerances.equality;
    match law {
        "naturality" => {
            let db = a.to_open_db()?;
            let pass = check_naturality(&db, tol)?;
            Ok(CheckReport {
                law: law.to_string(),
                pass,
                detail: "black-boxing through the circuit picture, conjugated by alpha".to_string(),
                counts: None,
            })
        }
        "functoriality-markov" => {
            let b = b.ok_or_else(|| {
                Error::InvalidDocument("functoriality-markov needs two documents".to_string())
            })?;
            let da = a.to_open_db()?;
            let db = b.to_open_db()?;
            let composite = compose_open_db(&da, &db, 1e-9)?;
            let lhs = blackbox_markov(&composite.open);
            let rhs = compose_rel(
                &blackbox_markov(&da.open).rel,
                &blackbox_markov(&db.open).rel,
                DEFAULT_RANK_TOL,
            )?;
            let pass = equal_rel(&lhs.rel, &rhs, tol);
            Ok(CheckReport {
                law: law.to_string(),
                pass,
                detail: format!(
                    "blackbox(b∘a) vs blackbox(b)∘blackbox(a), dims {} vs {}",
                    lhs.rel.dim(),
                    rhs.dim()
                ),
                counts: None,
            })
        }
        "functoriality-rx" => {
            let b = b.ok_or_else(|| {
                Error::InvalidDocument("functoriality-rx needs two documents".to_string())
            })?;
            let fa = a.to_open_dynam()?;
            let fb = b.to_open_dynam()?;
            let report =
                crate::behavior_rx::check_functoriality_rx(&fa, &fb, 200, config.seed, tol)?;
            Ok(CheckReport {
                law: law.to_string(),
                pass: report.failed == 0,
                detail: format!("unknown rate {:.3}", report.unknown_rate()),
                counts: Some(CheckCounts {
                    checked: report.checked,
                    passed: report.passed,
                    failed: report.failed,
                    unknown: report.unknown,
                }),
            })
        }
        "graybox" => {
            let b = b.ok_or_else(|| {
                Error::InvalidDocument("graybox needs two documents".to_string())
            })?;
            let ra = a.to_open_reaction()?;
            let rb = b.to_open_reaction()?;
            let route_one = graybox(&compose_open_rx(&ra, &rb)?);
            let route_two = compose_dynam(&graybox(&ra), &graybox(&rb))?;
            let pass = route_one.field == route_two.field;
            Ok(CheckReport {
                law: law.to_string(),
                pass,
                detail: if pass {
                    "gray-box of the composite equals the composite of gray-boxes, exactly".to_string()
                } else {
                    format!(
                        "fields differ: {:?} vs {:?}",
                        route_one.field, route_two.field
                    )
                },
                counts: None,
            })
        }
        other => Err(Error::InvalidDocument(format!("unknown law {other:?}"))),
    }
}
