//! Markov processes sit inside reaction networks: each edge becomes a
//! unimolecular transition, the mass-action field reduces to H·p, and
//! the nonlinear black-box oracle collapses to the linear relation
//! computed by the Markov route.
//!
//! Run with: cargo run --example markov_as_reaction

use open_nets::behavior_markov::blackbox_markov;
use open_nets::behavior_rx::linear_behavior_bridge;
use open_nets::linrel::equal_rel;
use open_nets::open_markov::membrane;
use open_nets::open_reaction::{graybox, OpenReactionNetwork};
use open_nets::reaction::{evaluate, markov_as_reaction, mass_action_field};

fn main() {
    let mem = membrane(["A", "B", "C"], 1.5, 0.75).unwrap();
    let net = markov_as_reaction(&mem.open.process);
    println!("membrane as a reaction network:");
    println!("  species: {:?}", net.species().labels());
    println!("  transitions: {:?}", net.transitions().labels());

    let field = mass_action_field(&net);
    println!("  field degree: {} (purely unimolecular)", field.degree());

    let h = mem.open.hamiltonian();
    let p = [2.0, 0.4, 1.1];
    let via_field = evaluate(&field, &p);
    let via_matrix = h.apply(&p);
    println!("\nmass-action velocities vs H·p at p = {p:?}:");
    for ((label, a), b) in mem
        .open
        .cospan
        .apex
        .labels()
        .iter()
        .zip(&via_field)
        .zip(&via_matrix)
    {
        println!("  {label}: {a:.12} = {b:.12}");
    }

    // the black boxes agree: nonlinear oracle route vs linear route
    let open_rx = OpenReactionNetwork::new(mem.open.cospan.clone(), net).unwrap();
    let bridge = linear_behavior_bridge(&graybox(&open_rx)).unwrap();
    let direct = blackbox_markov(&mem.open);
    println!(
        "\nlinear bridge behavior == Markov black box: {}",
        equal_rel(&bridge.rel, &direct.rel, 1e-8)
    );
    println!(
        "  ({}-dimensional relation on boundary probabilities and flows)",
        bridge.dim()
    );
}
