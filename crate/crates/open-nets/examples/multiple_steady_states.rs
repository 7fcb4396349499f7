//! The autocatalytic network 2A + B <-> 3A admits two steady branches,
//! A = 0 and r2 A = r1 B. At conserved mass A + B = 2 the multistart
//! solver finds both, and integration shows which one attracts.
//!
//! Run with: cargo run --example multiple_steady_states

use nalgebra::{DMatrix, DVector};
use open_nets::finset::FinSet;
use open_nets::reaction::{evaluate, integrate_rate_equation, mass_action_field, ReactionNetwork};
use open_nets::solver::{multistart_solutions, NewtonConfig};

fn main() {
    let net = ReactionNetwork::new(
        FinSet::new(["A", "B"]).unwrap(),
        FinSet::new(["fwd", "bwd"]).unwrap(),
        vec![vec![2, 1], vec![3, 0]],
        vec![vec![3, 0], vec![2, 1]],
        vec![1.0, 1.0],
    )
    .unwrap();
    let v = mass_action_field(&net);
    println!("2A + B <-> 3A at unit rates; dA/dt = A^2 B - A^3");
    println!("steady branches: A = 0 (any B) and A = B\n");

    // multistart root finding on the augmented system with mass A+B = 2
    let f = |x: &DVector<f64>| {
        let vals = evaluate(&v, x.as_slice());
        DVector::from_vec(vec![vals[0], vals[1], x[0] + x[1] - 2.0])
    };
    let jac = |x: &DVector<f64>| {
        let j = v.jacobian_at(x.as_slice());
        let mut m = DMatrix::zeros(3, 2);
        m.view_mut((0, 0), (2, 2)).copy_from(&j);
        m[(2, 0)] = 1.0;
        m[(2, 1)] = 1.0;
        m
    };
    let cfg = NewtonConfig {
        box_lo: 0.0,
        box_hi: 2.0,
        ..NewtonConfig::default()
    };
    let sols = multistart_solutions(&f, &jac, 2, &cfg, 42, 1e-3);
    println!("steady states found at mass 2 over {} starts:", cfg.multistart);
    for s in &sols {
        println!("  (A, B) = ({:.6}, {:.6})", s[0], s[1]);
    }

    // trajectories from either side of the unstable manifold
    println!("\ntrajectories (t = 40):");
    for c0 in [[0.4, 1.6], [1.2, 0.8]] {
        let traj = integrate_rate_equation(&v, &c0, 40.0, 0.01).unwrap();
        let end = traj.last();
        println!(
            "  from (A, B) = ({}, {}) -> ({:.6}, {:.6})",
            c0[0], c0[1], end[0], end[1]
        );
    }
    println!("\nmass A + B is conserved along both runs");
}
