//! Black-boxing open dynamical systems into steady-state relations.
//!
//! The relation `{(i*(c), I, o*(c), O) : v(c) + i_*(I) − o_*(O) = 0}` is
//! semialgebraic but is represented operationally, as a solver-backed
//! oracle answering membership queries and drawing samples. Membership
//! is three-valued: a damped-Newton multistart is incomplete, so
//! exhausted starts answer `Unknown` rather than `No`; `No` requires a
//! certificate (direct evaluation with no internal unknowns, or rank
//! analysis of a system affine in the internal species).

use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::behavior_markov::{project_to_behavior, steady_constraint_kernel, Behavior};
use crate::error::{Error, Result};
use crate::finset::{pullback, pushforward, pushout};
use crate::linrel::Subspace;
use crate::open_reaction::{compose_dynam, OpenDynam};
use crate::reaction::evaluate;
use crate::solver::{multistart_solve, newton_from, NewtonConfig};

/// Oracle tolerances and solver configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Absolute bound on the steady-state residual of a witness.
    pub residual_tol: f64,
    /// Rank cutoff, also used for boundary-value consistency.
    pub rank_tol: f64,
    pub newton: NewtonConfig,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            residual_tol: 1e-10,
            rank_tol: 1e-9,
            newton: NewtonConfig::default(),
            seed: 0,
        }
    }
}

/// A boundary tuple `(i*(c), I, o*(c), O)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTuple {
    pub in_conc: Vec<f64>,
    pub inflow: Vec<f64>,
    pub out_conc: Vec<f64>,
    pub outflow: Vec<f64>,
}

/// Membership verdicts. `Yes` carries the completing concentration
/// vector; witnesses or queries with negative concentrations are marked
/// unphysical but accepted.
#[derive(Debug, Clone)]
pub enum Membership {
    Yes { witness: Vec<f64>, unphysical: bool },
    No { certificate: String },
    Unknown,
}

impl Membership {
    pub fn is_yes(&self) -> bool {
        matches!(self, Membership::Yes { .. })
    }

    pub fn is_no(&self) -> bool {
        matches!(self, Membership::No { .. })
    }
}

/// A sampled behavior point together with its steady-state witness.
#[derive(Debug, Clone)]
pub struct Sample {
    pub tuple: BoundaryTuple,
    pub witness: Vec<f64>,
}

/// The solver-backed steady-state relation of an open dynamical system.
#[derive(Debug, Clone)]
pub struct BehaviorOracle {
    pub system: OpenDynam,
    pub config: OracleConfig,
}

impl BehaviorOracle {
    pub fn new(system: OpenDynam, config: OracleConfig) -> Self {
        BehaviorOracle { system, config }
    }

    fn drive(&self, inflow: &[f64], outflow: &[f64]) -> Vec<f64> {
        let mut d = pushforward(&self.system.cospan.in_leg, inflow);
        let out = pushforward(&self.system.cospan.out_leg, outflow);
        for (a, b) in d.iter_mut().zip(&out) {
            *a -= b;
        }
        d
    }

    /// Resolves boundary concentrations from a tuple, or reports the
    /// inconsistent species when two interface points disagree.
    fn boundary_values(
        &self,
        t: &BoundaryTuple,
    ) -> std::result::Result<Vec<Option<f64>>, String> {
        let cospan = &self.system.cospan;
        let n = cospan.apex.len();
        let tol = self.config.rank_tol;
        let mut vals: Vec<Option<f64>> = vec![None; n];
        let put = |s: usize, v: f64, vals: &mut Vec<Option<f64>>| -> std::result::Result<(), String> {
            match vals[s] {
                None => {
                    vals[s] = Some(v);
                    Ok(())
                }
                Some(existing) => {
                    if (existing - v).abs() <= tol * existing.abs().max(v.abs()).max(1.0) {
                        Ok(())
                    } else {
                        Err(format!(
                            "interface points disagree at species {:?}: {existing} vs {v}",
                            cospan.apex.label(s)
                        ))
                    }
                }
            }
        };
        for (x, &v) in t.in_conc.iter().enumerate() {
            put(cospan.in_leg.apply_idx(x), v, &mut vals)?;
        }
        for (y, &v) in t.out_conc.iter().enumerate() {
            put(cospan.out_leg.apply_idx(y), v, &mut vals)?;
        }
        Ok(vals)
    }

    fn check_shape(&self, t: &BoundaryTuple) -> Result<()> {
        let cospan = &self.system.cospan;
        if t.in_conc.len() != cospan.left.len()
            || t.inflow.len() != cospan.left.len()
            || t.out_conc.len() != cospan.right.len()
            || t.outflow.len() != cospan.right.len()
        {
            return Err(Error::MalformedTuple(format!(
                "expected {} input and {} output coordinates",
                cospan.left.len(),
                cospan.right.len()
            )));
        }
        if t.in_conc.iter().chain(t.out_conc.iter()).any(|v| !v.is_finite())
            || t.inflow.iter().chain(t.outflow.iter()).any(|v| !v.is_finite())
        {
            return Err(Error::MalformedTuple("non-finite entry".to_string()));
        }
        Ok(())
    }

    /// Largest exponent sum over internal variables in any monomial;
    /// zero or one means the steady system is affine in the internals.
    fn internal_degree(&self, internal: &[usize]) -> u32 {
        let mut deg = 0;
        for k in 0..self.system.field.nvars() {
            for (m, _) in self.system.field.component(k).terms() {
                let d: u32 = internal.iter().map(|&i| m.0[i]).sum();
                deg = deg.max(d);
            }
        }
        deg
    }

    /// Decides whether `t` extends to a steady state.
    pub fn membership(&self, t: &BoundaryTuple) -> Result<Membership> {
        self.check_shape(t)?;
        let boundary_vals = match self.boundary_values(t) {
            Ok(v) => v,
            Err(certificate) => return Ok(Membership::No { certificate }),
        };
        let internal = self.system.internal();
        let n = self.system.cospan.apex.len();
        let drive = self.drive(&t.inflow, &t.outflow);
        let unphysical_query = t.in_conc.iter().chain(t.out_conc.iter()).any(|&v| v < 0.0);

        let assemble = |u: &DVector<f64>| -> Vec<f64> {
            let mut c = vec![0.0f64; n];
            for (k, v) in boundary_vals.iter().enumerate() {
                if let Some(val) = v {
                    c[k] = *val;
                }
            }
            for (slot, &k) in internal.iter().enumerate() {
                c[k] = u[slot];
            }
            c
        };
        let residual = |u: &DVector<f64>| -> DVector<f64> {
            let c = assemble(u);
            let v = evaluate(&self.system.field, &c);
            DVector::from_iterator(n, v.iter().zip(&drive).map(|(&a, &b)| a + b))
        };

        if internal.is_empty() {
            let r = residual(&DVector::zeros(0));
            let ok = r.iter().all(|&x| x.abs() <= self.config.residual_tol);
            return Ok(if ok {
                Membership::Yes {
                    witness: assemble(&DVector::zeros(0)),
                    unphysical: unphysical_query,
                }
            } else {
                Membership::No {
                    certificate: format!(
                        "direct evaluation: residual {:e}",
                        r.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
                    ),
                }
            });
        }

        if self.internal_degree(&internal) <= 1 {
            // affine in the internal species: rank analysis certifies
            let (a, b) = self.affine_system(&internal, &boundary_vals, &drive);
            let svd = a.clone().svd(true, true);
            let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
            let u = svd
                .solve(&(-&b), self.config.rank_tol * smax.max(f64::MIN_POSITIVE))
                .map_err(|e| Error::SingularSystem(e.to_string()))?;
            let r = &a * &u + &b;
            let worst = r.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
            return Ok(if worst <= self.config.residual_tol.max(1e-12 * smax) {
                let witness = assemble(&u);
                let unphysical = unphysical_query || witness.iter().any(|&v| v < 0.0);
                Membership::Yes { witness, unphysical }
            } else {
                Membership::No {
                    certificate: format!(
                        "rank analysis: affine internal system infeasible (residual {worst:e})"
                    ),
                }
            });
        }

        let jac = |u: &DVector<f64>| -> DMatrix<f64> {
            let c = assemble(u);
            let full = self.system.field.jacobian_at(&c);
            DMatrix::from_fn(n, internal.len(), |i, slot| full[(i, internal[slot])])
        };
        let cfg = NewtonConfig {
            residual_tol: self.config.residual_tol,
            ..self.config.newton
        };
        match multistart_solve(&residual, &jac, internal.len(), &cfg, self.config.seed) {
            Some(u) => {
                let witness = assemble(&u);
                let unphysical = unphysical_query || witness.iter().any(|&v| v < 0.0);
                Ok(Membership::Yes { witness, unphysical })
            }
            None => Ok(Membership::Unknown),
        }
    }

    fn affine_system(
        &self,
        internal: &[usize],
        boundary_vals: &[Option<f64>],
        drive: &[f64],
    ) -> (DMatrix<f64>, DVector<f64>) {
        let n = self.system.cospan.apex.len();
        let mut a = DMatrix::zeros(n, internal.len());
        let mut b = DVector::from_column_slice(drive);
        let slot_of = |k: usize| internal.iter().position(|&i| i == k);
        for i in 0..n {
            for (m, coeff) in self.system.field.component(i).terms() {
                let mut boundary_part = coeff;
                let mut internal_var: Option<usize> = None;
                for (k, &e) in m.0.iter().enumerate() {
                    if e == 0 {
                        continue;
                    }
                    match slot_of(k) {
                        Some(slot) => {
                            // degree ≤ 1 guaranteed by the caller
                            internal_var = Some(slot);
                        }
                        None => {
                            let v = boundary_vals[k].unwrap_or(0.0);
                            boundary_part *= v.powi(e as i32);
                        }
                    }
                }
                match internal_var {
                    Some(slot) => a[(i, slot)] += boundary_part,
                    None => b[i] += boundary_part,
                }
            }
        }
        (a, b)
    }

    /// Draws up to `n` behavior points: boundary concentrations uniform
    /// from the start box, internal concentrations by Newton, flows from
    /// the remaining linear system (sampling its affine solution set with
    /// unit-variance Gaussian kernel coefficients).
    pub fn sample(&self, n: usize, seed: u64) -> Vec<Sample> {
        let cospan = &self.system.cospan;
        let n_species = cospan.apex.len();
        let boundary = self.system.boundary();
        let internal = self.system.internal();
        let nx = cospan.left.len();
        let ny = cospan.right.len();
        let mut out = Vec::with_capacity(n);

        for k in 0..n {
            let sample_seed = seed
                .wrapping_mul(0x9e37_79b9_7f4a_7c15)
                .wrapping_add(k as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);

            let mut c = vec![0.0f64; n_species];
            for &s in &boundary {
                c[s] = rng.gen_range(self.config.newton.box_lo..=self.config.newton.box_hi);
            }

            if !internal.is_empty() {
                let c_outer = c.clone();
                let residual = |u: &DVector<f64>| -> DVector<f64> {
                    let mut full = c_outer.clone();
                    for (slot, &i) in internal.iter().enumerate() {
                        full[i] = u[slot];
                    }
                    let v = evaluate(&self.system.field, &full);
                    DVector::from_iterator(internal.len(), internal.iter().map(|&i| v[i]))
                };
                let jac = |u: &DVector<f64>| -> DMatrix<f64> {
                    let mut full = c_outer.clone();
                    for (slot, &i) in internal.iter().enumerate() {
                        full[i] = u[slot];
                    }
                    let j = self.system.field.jacobian_at(&full);
                    DMatrix::from_fn(internal.len(), internal.len(), |r, s| {
                        j[(internal[r], internal[s])]
                    })
                };
                let cfg = NewtonConfig {
                    residual_tol: self.config.residual_tol,
                    ..self.config.newton
                };
                match multistart_solve(&residual, &jac, internal.len(), &cfg, sample_seed) {
                    Some(u) => {
                        for (slot, &i) in internal.iter().enumerate() {
                            c[i] = u[slot];
                        }
                    }
                    None => continue,
                }
            }

            // remaining linear system in (I, O): i_*(I) − o_*(O) = −v(c)
            let v = evaluate(&self.system.field, &c);
            let mut m = DMatrix::zeros(n_species, nx + ny);
            for x in 0..nx {
                m[(cospan.in_leg.apply_idx(x), x)] += 1.0;
            }
            for y in 0..ny {
                m[(cospan.out_leg.apply_idx(y), nx + y)] -= 1.0;
            }
            let rhs = DVector::from_iterator(n_species, v.iter().map(|&x| -x));
            let svd = m.clone().svd(true, true);
            let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
            let Ok(particular) = svd.solve(&rhs, self.config.rank_tol * smax.max(f64::MIN_POSITIVE))
            else {
                continue;
            };
            let kernel = Subspace::null_space(&m, self.config.rank_tol);
            let mut flows = particular;
            for col in 0..kernel.dim() {
                let g: f64 = {
                    // Box–Muller from two uniforms keeps the rng stream simple
                    let u1: f64 = rng.gen_range(1e-12..1.0);
                    let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                    (-2.0 * u1.ln()).sqrt() * u2.cos()
                };
                let dir: DVector<f64> = kernel.basis().column(col).into();
                flows += dir * g;
            }

            let tuple = BoundaryTuple {
                in_conc: pullback(&cospan.in_leg, &c),
                inflow: flows.as_slice()[..nx].to_vec(),
                out_conc: pullback(&cospan.out_leg, &c),
                outflow: flows.as_slice()[nx..].to_vec(),
            };
            // the witness certifies the tuple; a residual beyond
            // tolerance means the Newton stage silently failed
            let check = {
                let drive = self.drive(&tuple.inflow, &tuple.outflow);
                let v = evaluate(&self.system.field, &c);
                v.iter()
                    .zip(&drive)
                    .map(|(&a, &b)| (a + b).abs())
                    .fold(0.0f64, f64::max)
            };
            if check <= self.config.residual_tol.max(1e-9 * smax.max(1.0)) {
                out.push(Sample { tuple, witness: c });
            }
        }
        out
    }
}

/// Joint report of a sampled functoriality check.
#[derive(Debug, Clone, Default)]
pub struct FunctorialityReport {
    pub checked: usize,
    pub passed: usize,
    pub failed: usize,
    pub unknown: usize,
    pub failures: Vec<String>,
}

impl FunctorialityReport {
    pub fn unknown_rate(&self) -> f64 {
        if self.checked == 0 {
            0.0
        } else {
            self.unknown as f64 / self.checked as f64
        }
    }
}

/// A matched pair of behavior points: a steady state of each system
/// sharing the middle concentrations and flows (`O` of the first equals
/// `I'` of the second).
#[derive(Debug, Clone)]
struct MatchedPair {
    c: Vec<f64>,
    c2: Vec<f64>,
    inflow: Vec<f64>,
    outflow2: Vec<f64>,
}

/// Samples a matched pair honestly — from the two systems' own steady
/// equations plus the gluing constraints, never through the composite.
/// Input-side concentrations of `f` and output-side concentrations of
/// `f2` are drawn from the start box; everything else (including the
/// middle concentrations) is solved for.
fn sample_matched_pair(
    f: &OpenDynam,
    f2: &OpenDynam,
    cfg: &OracleConfig,
    seed: u64,
) -> Option<MatchedPair> {
    let (n1, n2) = (f.cospan.apex.len(), f2.cospan.apex.len());
    let (nx, ny, nz) = (
        f.cospan.left.len(),
        f.cospan.right.len(),
        f2.cospan.right.len(),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut drawn1: Vec<Option<f64>> = vec![None; n1];
    for x in 0..nx {
        let s = f.cospan.in_leg.apply_idx(x);
        if drawn1[s].is_none() {
            drawn1[s] = Some(rng.gen_range(cfg.newton.box_lo..=cfg.newton.box_hi));
        }
    }
    let mut drawn2: Vec<Option<f64>> = vec![None; n2];
    let glued2: Vec<usize> = (0..ny).map(|y| f2.cospan.in_leg.apply_idx(y)).collect();
    for z in 0..nz {
        let s = f2.cospan.out_leg.apply_idx(z);
        if drawn2[s].is_none() && !glued2.contains(&s) {
            drawn2[s] = Some(rng.gen_range(cfg.newton.box_lo..=cfg.newton.box_hi));
        }
    }
    let free1: Vec<usize> = (0..n1).filter(|&s| drawn1[s].is_none()).collect();
    let free2: Vec<usize> = (0..n2).filter(|&s| drawn2[s].is_none()).collect();

    // unknown layout: [free1 | free2 | I | Om | O']
    let k_free1 = free1.len();
    let k_free2 = free2.len();
    let off_i = k_free1 + k_free2;
    let off_m = off_i + nx;
    let off_o2 = off_m + ny;
    let total = off_o2 + nz;

    let assemble1 = |u: &DVector<f64>| -> Vec<f64> {
        let mut c = vec![0.0f64; n1];
        for (s, v) in drawn1.iter().enumerate() {
            if let Some(val) = v {
                c[s] = *val;
            }
        }
        for (slot, &s) in free1.iter().enumerate() {
            c[s] = u[slot];
        }
        c
    };
    let assemble2 = |u: &DVector<f64>| -> Vec<f64> {
        let mut c = vec![0.0f64; n2];
        for (s, v) in drawn2.iter().enumerate() {
            if let Some(val) = v {
                c[s] = *val;
            }
        }
        for (slot, &s) in free2.iter().enumerate() {
            c[s] = u[k_free1 + slot];
        }
        c
    };

    let residual = |u: &DVector<f64>| -> DVector<f64> {
        let c = assemble1(u);
        let c2 = assemble2(u);
        let v1 = evaluate(&f.field, &c);
        let v2 = evaluate(&f2.field, &c2);
        let mut r = DVector::zeros(n1 + n2 + ny);
        for i in 0..n1 {
            r[i] = v1[i];
        }
        for x in 0..nx {
            r[f.cospan.in_leg.apply_idx(x)] += u[off_i + x];
        }
        for y in 0..ny {
            r[f.cospan.out_leg.apply_idx(y)] -= u[off_m + y];
        }
        for i in 0..n2 {
            r[n1 + i] = v2[i];
        }
        for y in 0..ny {
            r[n1 + f2.cospan.in_leg.apply_idx(y)] += u[off_m + y];
        }
        for z in 0..nz {
            r[n1 + f2.cospan.out_leg.apply_idx(z)] -= u[off_o2 + z];
        }
        for y in 0..ny {
            r[n1 + n2 + y] = c[f.cospan.out_leg.apply_idx(y)] - c2[f2.cospan.in_leg.apply_idx(y)];
        }
        r
    };
    let jac = |u: &DVector<f64>| -> DMatrix<f64> {
        let c = assemble1(u);
        let c2 = assemble2(u);
        let j1 = f.field.jacobian_at(&c);
        let j2 = f2.field.jacobian_at(&c2);
        let mut j = DMatrix::zeros(n1 + n2 + ny, total);
        for (slot, &s) in free1.iter().enumerate() {
            for i in 0..n1 {
                j[(i, slot)] = j1[(i, s)];
            }
        }
        for (slot, &s) in free2.iter().enumerate() {
            for i in 0..n2 {
                j[(n1 + i, k_free1 + slot)] = j2[(i, s)];
            }
        }
        for x in 0..nx {
            j[(f.cospan.in_leg.apply_idx(x), off_i + x)] += 1.0;
        }
        for y in 0..ny {
            j[(f.cospan.out_leg.apply_idx(y), off_m + y)] -= 1.0;
            j[(n1 + f2.cospan.in_leg.apply_idx(y), off_m + y)] += 1.0;
        }
        for z in 0..nz {
            j[(n1 + f2.cospan.out_leg.apply_idx(z), off_o2 + z)] -= 1.0;
        }
        for y in 0..ny {
            let s1 = f.cospan.out_leg.apply_idx(y);
            if let Some(slot) = free1.iter().position(|&s| s == s1) {
                j[(n1 + n2 + y, slot)] += 1.0;
            }
            let s2 = f2.cospan.in_leg.apply_idx(y);
            if let Some(slot) = free2.iter().position(|&s| s == s2) {
                j[(n1 + n2 + y, k_free1 + slot)] -= 1.0;
            }
        }
        j
    };

    let newton_cfg = NewtonConfig {
        residual_tol: cfg.residual_tol,
        ..cfg.newton
    };
    for _ in 0..newton_cfg.multistart.max(1) {
        let start = DVector::from_fn(total, |_, _| {
            rng.gen_range(newton_cfg.box_lo..=newton_cfg.box_hi)
        });
        if let Some(u) = newton_from(&residual, &jac, start, &newton_cfg) {
            return Some(MatchedPair {
                c: assemble1(&u),
                c2: assemble2(&u),
                inflow: (0..nx).map(|x| u[off_i + x]).collect(),
                outflow2: (0..nz).map(|z| u[off_o2 + z]).collect(),
            });
        }
    }
    None
}

/// Sampled check of black-box functoriality: the behavior of a
/// composite equals the composite of the behaviors, both inclusions.
pub fn check_functoriality_rx(
    f: &OpenDynam,
    f2: &OpenDynam,
    n: usize,
    seed: u64,
    tol: f64,
) -> Result<FunctorialityReport> {
    let composite = compose_dynam(f, f2)?;
    let po = pushout(&f.cospan.out_leg, &f2.cospan.in_leg)?;
    let cfg = OracleConfig {
        seed,
        ..OracleConfig::default()
    };
    let comp_oracle = BehaviorOracle::new(composite.clone(), cfg);

    let mut report = FunctorialityReport::default();

    // inclusion one: every composite steady state factors through a
    // middle tuple shared by the two factors
    let half = n / 2;
    let comp_samples = comp_oracle.sample(half, seed);
    report.unknown += half - comp_samples.len();
    report.checked += half;
    for s in &comp_samples {
        let c = pullback(&po.quot_left, &s.witness);
        let c2 = pullback(&po.quot_right, &s.witness);
        let ny = f.cospan.right.len();
        // one middle flow vector O = I' must satisfy both steady systems
        let v1 = evaluate(&f.field, &c);
        let drive1 = pushforward(&f.cospan.in_leg, &s.tuple.inflow);
        let v2 = evaluate(&f2.field, &c2);
        let drive2_out = pushforward(&f2.cospan.out_leg, &s.tuple.outflow);
        let n1 = f.cospan.apex.len();
        let n2 = f2.cospan.apex.len();
        let mut m = DMatrix::zeros(n1 + n2, ny);
        let mut rhs = DVector::zeros(n1 + n2);
        for y in 0..ny {
            m[(f.cospan.out_leg.apply_idx(y), y)] += 1.0;
            m[(n1 + f2.cospan.in_leg.apply_idx(y), y)] += 1.0;
        }
        for i in 0..n1 {
            rhs[i] = v1[i] + drive1[i];
        }
        for i in 0..n2 {
            rhs[n1 + i] = -(v2[i] - drive2_out[i]);
        }
        let svd = m.clone().svd(true, true);
        let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
        let verdict = match svd.solve(&rhs, 1e-12 * smax.max(f64::MIN_POSITIVE)) {
            Ok(mid) => {
                let r = &m * &mid - &rhs;
                r.iter().all(|&x| x.abs() <= tol)
            }
            Err(_) => false,
        };
        if verdict {
            report.passed += 1;
        } else {
            report.failed += 1;
            report.failures.push(format!(
                "composite sample does not factor: tuple {:?}",
                s.tuple
            ));
        }
    }

    // inclusion two: matched sample pairs land in the composite behavior
    let rest = n - half;
    report.checked += rest;
    let relaxed = OracleConfig {
        residual_tol: tol,
        ..cfg
    };
    let comp_membership = BehaviorOracle::new(composite.clone(), relaxed);
    for k in 0..rest {
        let pair_seed = seed.wrapping_add(0x517c_c1b7_2722_0a95).wrapping_add(k as u64);
        match sample_matched_pair(f, f2, &cfg, pair_seed) {
            Some(pair) => {
                let tuple = BoundaryTuple {
                    in_conc: pullback(&f.cospan.in_leg, &pair.c),
                    inflow: pair.inflow.clone(),
                    out_conc: pullback(&f2.cospan.out_leg, &pair.c2),
                    outflow: pair.outflow2.clone(),
                };
                match comp_membership.membership(&tuple)? {
                    Membership::Yes { .. } => report.passed += 1,
                    Membership::No { certificate } => {
                        report.failed += 1;
                        report
                            .failures
                            .push(format!("matched pair rejected: {certificate}"));
                    }
                    Membership::Unknown => report.unknown += 1,
                }
            }
            None => report.unknown += 1,
        }
    }

    Ok(report)
}

/// Exact linear-relation behavior for systems whose field is linear
/// (degree one, no constant part), such as Markov processes viewed as
/// reaction networks. The relation is built by the same null-space
/// construction used for Markov black-boxing.
pub fn linear_behavior_bridge(f: &OpenDynam) -> Result<Behavior> {
    let n = f.cospan.apex.len();
    if f.field.degree() > 1 {
        return Err(Error::NonlinearField(format!(
            "field has degree {}",
            f.field.degree()
        )));
    }
    let mut matrix = DMatrix::zeros(n, n);
    for i in 0..n {
        for (m, coeff) in f.field.component(i).terms() {
            if m.degree() == 0 {
                return Err(Error::NonlinearField(
                    "field has a constant term; the steady relation is affine".to_string(),
                ));
            }
            let var = m.0.iter().position(|&e| e == 1).expect("degree-one monomial");
            matrix[(i, var)] += coeff;
        }
    }
    let kernel = steady_constraint_kernel(&matrix, &f.cospan);
    Ok(project_to_behavior(&kernel, &f.cospan))
}
