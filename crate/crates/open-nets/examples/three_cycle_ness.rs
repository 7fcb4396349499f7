//! A three-state cycle whose rates break Kolmogorov's criterion: it has
//! no detailed-balanced equilibrium, only a non-equilibrium steady state
//! carrying a constant probability current and positive entropy
//! production.
//!
//! Run with: cargo run --example three_cycle_ness

use open_nets::finset::FinSet;
use open_nets::markov::{
    affinity, build_hamiltonian, check_kolmogorov, entropy_production, flow,
    kernel_steady_states, matrix_tree_steady_state, Edge, MarkovProcess, ProbDist,
};

fn main() {
    let (alpha, beta) = (2.0, 1.0);
    let states = FinSet::new(["A", "B", "C"]).unwrap();
    let cycle = MarkovProcess::new(
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
    .unwrap();

    println!("three-state cycle, alpha = {alpha}, beta = {beta}");
    println!(
        "kolmogorov criterion satisfied: {}",
        check_kolmogorov(&cycle, 1e-9)
    );

    let (q, z) = matrix_tree_steady_state(&cycle, false).unwrap();
    println!("\nmatrix-tree steady state (spanning-tree weights):");
    for (label, v) in ["A", "B", "C"].iter().zip(q.values()) {
        println!("  p*_{label} = {v}");
    }
    println!("  partition value Z = {z}");

    let h = build_hamiltonian(&cycle);
    let kernel = kernel_steady_states(&h);
    println!("kernel of H has dimension {}", kernel.dim());

    let p = ProbDist::new(q.values().to_vec()).unwrap();
    println!("\nsteady-state cycle current (every edge carries the same flow):");
    for (i, j) in [("A", "B"), ("B", "C"), ("C", "A")] {
        println!("  J_{{{i}{j}}} = {}", flow(&h, &p, i, j).unwrap());
    }
    println!(
        "affinity A_AB = {} (ln 5/4 = {})",
        affinity(&h, &p, "A", "B").unwrap(),
        (5.0f64 / 4.0).ln()
    );

    let ep = entropy_production(&h, &p).unwrap();
    println!("\nentropy production = {ep}");
    println!("closed form alpha^2 (alpha - beta) ln(alpha/beta) = {}",
        alpha * alpha * (alpha - beta) * (alpha / beta).ln());
}
