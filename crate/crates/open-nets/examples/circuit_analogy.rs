//! Detailed-balanced Markov processes are resistor networks in disguise:
//! edge conductances c_e = r_e q_{s(e)}, probability deviations p/q play
//! electric potentials, and dissipation equals the circuit's power. The
//! two black-box routes agree after rescaling potentials by q.
//!
//! Run with: cargo run --example circuit_analogy

use open_nets::behavior_markov::{
    blackbox_circuit, blackbox_markov, check_naturality, power_functional, to_circuit,
};
use open_nets::markov::ProbDist;
use open_nets::open_markov::membrane;
use open_nets::thermo::dissipation;

fn main() {
    let (h_in, h_out) = (2.0, 0.5);
    let m = membrane(["A", "B", "C"], h_in, h_out).unwrap();
    let circuit = to_circuit(&m).unwrap();

    println!("membrane as a circuit (conductance = rate x source equilibrium):");
    for e in &circuit.edges {
        println!("  {} -> {}: conductance {}", e.source, e.target, e.conductance);
    }
    println!("opposite directions carry equal conductance: that IS detailed balance");

    // dissipation = power at the deviation potentials
    let p = ProbDist::new(vec![1.3, 0.2, 2.1]).unwrap();
    let phi: Vec<f64> = p
        .values()
        .iter()
        .zip(m.q.values())
        .map(|(&pi, &qi)| pi / qi)
        .collect();
    println!("\nD(p)        = {}", dissipation(&m, &p).unwrap());
    println!("P(p/q)      = {}", power_functional(&circuit, &phi));

    // the commuting triangle: blackbox directly, or through the circuit
    println!(
        "\nnaturality (markov blackbox == alpha-conjugated circuit blackbox): {}",
        check_naturality(&m, 1e-8).unwrap()
    );
    println!(
        "  markov behavior: {} dims, circuit behavior: {} dims",
        blackbox_markov(&m.open).dim(),
        blackbox_circuit(&circuit).unwrap().dim()
    );

    // a uniform equilibrium makes α the identity: the behaviors coincide
    let uniform = membrane(["A", "B", "C"], 1.0, 1.0).unwrap();
    let direct = blackbox_markov(&uniform.open);
    let through = blackbox_circuit(&to_circuit(&uniform).unwrap()).unwrap();
    println!(
        "\nuniform q: behaviors equal without correction: {}",
        open_nets::linrel::equal_rel(&direct.rel, &through.rel, 1e-8)
    );
}
