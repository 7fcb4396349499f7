//! Damped Gauss–Newton with multistart, the workhorse behind the
//! steady-state oracle. Systems may be square, over- or under-determined;
//! steps are least-squares via SVD, halved while the residual grows.

use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Solver knobs exposed by the oracle configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    pub max_iters: usize,
    pub multistart: usize,
    pub box_lo: f64,
    pub box_hi: f64,
    pub damping_halvings: usize,
    pub residual_tol: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            max_iters: 100,
            multistart: 32,
            box_lo: 0.0,
            box_hi: 10.0,
            damping_halvings: 20,
            residual_tol: 1e-10,
        }
    }
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
}

/// Runs damped Gauss–Newton from one start point. Returns the solution
/// when the residual infinity norm drops below `residual_tol`.
pub fn newton_from<F, J>(
    f: &F,
    jac: &J,
    start: DVector<f64>,
    cfg: &NewtonConfig,
) -> Option<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
    J: Fn(&DVector<f64>) -> DMatrix<f64>,
{
    let mut x = start;
    let mut fx = f(&x);
    if inf_norm(&fx) <= cfg.residual_tol {
        return Some(x);
    }
    for _ in 0..cfg.max_iters {
        let j = jac(&x);
        let svd = j.svd(true, true);
        let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
        if smax == 0.0 {
            return None;
        }
        let step = svd.solve(&(-&fx), 1e-12 * smax).ok()?;
        if !step.iter().all(|v| v.is_finite()) {
            return None;
        }
        let mut lambda = 1.0;
        let base = inf_norm(&fx);
        let mut accepted = false;
        for _ in 0..=cfg.damping_halvings {
            let candidate = &x + &step * lambda;
            let fc = f(&candidate);
            if inf_norm(&fc) < base {
                x = candidate;
                fx = fc;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return None;
        }
        if inf_norm(&fx) <= cfg.residual_tol {
            return Some(x);
        }
    }
    None
}

/// Multistart driver: starts are drawn uniformly from the configured box
/// with a deterministic stream per seed. Returns the first solution.
pub fn multistart_solve<F, J>(
    f: &F,
    jac: &J,
    n_unknowns: usize,
    cfg: &NewtonConfig,
    seed: u64,
) -> Option<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
    J: Fn(&DVector<f64>) -> DMatrix<f64>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cfg.multistart.max(1) {
        let start = DVector::from_fn(n_unknowns, |_, _| rng.gen_range(cfg.box_lo..=cfg.box_hi));
        if let Some(sol) = newton_from(f, jac, start, cfg) {
            return Some(sol);
        }
    }
    None
}

/// Multistart driver returning every distinct solution found, clustered
/// by infinity-norm distance `cluster_tol`.
pub fn multistart_solutions<F, J>(
    f: &F,
    jac: &J,
    n_unknowns: usize,
    cfg: &NewtonConfig,
    seed: u64,
    cluster_tol: f64,
) -> Vec<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
    J: Fn(&DVector<f64>) -> DMatrix<f64>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found: Vec<DVector<f64>> = Vec::new();
    for _ in 0..cfg.multistart.max(1) {
        let start = DVector::from_fn(n_unknowns, |_, _| rng.gen_range(cfg.box_lo..=cfg.box_hi));
        if let Some(sol) = newton_from(f, jac, start, cfg) {
            let fresh = found
                .iter()
                .all(|known| inf_norm(&(known - &sol)) > cluster_tol);
            if fresh {
                found.push(sol);
            }
        }
    }
    found
}
