//! Passive diffusion across a membrane as an open detailed-balanced
//! Markov process: hold the two bulk concentrations fixed, solve for the
//! interior, read off the sustained boundary flows, then glue two
//! membranes in series.
//!
//! Run with: cargo run --example membrane_diffusion

use open_nets::markov::check_detailed_balance;
use open_nets::open_markov::{
    boundary_flows, compose_open_db, membrane, solve_open_master_fixed_boundary,
};

fn main() {
    let (h_in, h_out) = (1.0, 2.0);
    let m = membrane(["A", "B", "C"], h_in, h_out).unwrap();
    println!("membrane with hop-in rate {h_in}, hop-out rate {h_out}");
    println!(
        "equilibrium q = {:?} (energies {:?})",
        m.q.values(),
        m.energies()
    );

    let (p_a, p_c) = (2.0, 0.5);
    let sol = solve_open_master_fixed_boundary(&m.open, &[p_a, p_c]).unwrap();
    let b = m.open.cospan.apex.index_of("B").unwrap();
    println!("\nboundary held at p_A = {p_a}, p_C = {p_c}:");
    println!(
        "  interior p_B = {} (formula (H_in/H_out)(p_A + p_C)/2 = {})",
        sol.p.values()[b],
        (h_in / h_out) * (p_a + p_c) / 2.0
    );

    let flows = boundary_flows(&m.open, &sol.p).unwrap();
    println!("  external holding flows (positive = into the system):");
    println!("    at A: {}", flows[0]);
    println!("    at C: {}", flows[1]);
    println!("  net throughput H_in (p_A - p_C)/2 = {}", h_in * (p_a - p_c) / 2.0);

    // two membranes in series: glue C of the first onto C of the second
    let m2 = membrane(["C", "D", "E"], h_in, h_out).unwrap();
    let chain = compose_open_db(&m, &m2, 1e-9).unwrap();
    println!("\ncomposite of two membranes:");
    println!("  states: {:?}", chain.open.cospan.apex.labels());
    println!(
        "  inputs {:?} -> outputs {:?}",
        chain.open.cospan.left.labels(),
        chain.open.cospan.right.labels()
    );
    let h = chain.open.hamiltonian();
    println!(
        "  composite still balances in detail: {}",
        check_detailed_balance(&h, &chain.q, 1e-9)
    );

    let sol = solve_open_master_fixed_boundary(&chain.open, &[p_a, p_c]).unwrap();
    println!("  steady state with p_A = {p_a}, p_E = {p_c}:");
    for (label, v) in chain.open.cospan.apex.labels().iter().zip(sol.p.values()) {
        println!("    p_{label} = {v}");
    }
    let flows = boundary_flows(&chain.open, &sol.p).unwrap();
    println!("  holding flow at A = {} (half the single-membrane value: two in series)", flows[0]);
}
