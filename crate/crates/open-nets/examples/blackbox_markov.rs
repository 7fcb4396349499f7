//! Black-boxing an open detailed-balanced Markov process: the space of
//! steady boundary (probability, flow) tuples is a linear relation, and
//! composing processes corresponds to composing relations — the behavior
//! of a glued system is computable from the parts alone.
//!
//! Run with: cargo run --example blackbox_markov

use open_nets::behavior_markov::blackbox_markov;
use open_nets::linrel::{compose_rel, equal_rel, DEFAULT_RANK_TOL};
use open_nets::open_markov::{compose_open_db, membrane};

fn main() {
    let m1 = membrane(["A", "B", "C"], 1.0, 2.0).unwrap();
    let m2 = membrane(["C", "D", "E"], 1.0, 2.0).unwrap();

    let b1 = blackbox_markov(&m1.open);
    println!(
        "behavior of one membrane: {}-dimensional relation on (p_A, I_A, p_C, O_C)",
        b1.dim()
    );

    // a steady tuple: boundary probabilities plus the flow they sustain
    let (p_a, p_c) = (2.0, 0.5);
    let kappa = 1.0 * (p_a - p_c) / 2.0; // H_in (p_A - p_C) / 2
    let tuple = [p_a, kappa, p_c, kappa];
    println!(
        "tuple (p_A, I, p_C, O) = {tuple:?} is in the behavior: {}",
        b1.contains(&tuple, 1e-8)
    );
    let wrong = [p_a, -kappa, p_c, kappa];
    println!(
        "flipping the input flow sign leaves the behavior: {}",
        !b1.contains(&wrong, 1e-6)
    );

    // functoriality: blackbox(m2 ∘ m1) = blackbox(m2) ∘ blackbox(m1)
    let composite = compose_open_db(&m1, &m2, 1e-9).unwrap();
    let whole = blackbox_markov(&composite.open);
    let parts = compose_rel(
        &blackbox_markov(&m1.open).rel,
        &blackbox_markov(&m2.open).rel,
        DEFAULT_RANK_TOL,
    )
    .unwrap();
    println!(
        "\nbehavior of the glued two-membrane chain: {}-dimensional",
        whole.dim()
    );
    println!(
        "equals the composite of the two behaviors: {}",
        equal_rel(&whole.rel, &parts, 1e-8)
    );
    println!("\nthe interior states (B, C, D) have been forgotten without");
    println!("changing anything observable at the boundary");
}
