//! Second-law diagnostics: relative entropy between two solutions of the
//! same master equation never increases in a closed process, and for an
//! open process the f-divergence rate splits into a non-positive
//! internal part plus a boundary flux that carries all possible growth.
//!
//! Run with: cargo run --example second_law

use open_nets::markov::{build_hamiltonian, evolve, ProbDist};
use open_nets::open_markov::membrane;
use open_nets::thermo::{f_divergence_rate, relative_entropy, ConvexFn};

fn main() {
    // closed membrane (ignore the legs, evolve the full process)
    let m = membrane(["A", "B", "C"], 1.0, 2.0).unwrap();
    let h = build_hamiltonian(&m.open.process);

    let mut p = ProbDist::new(vec![3.0, 0.1, 0.4]).unwrap();
    let mut q = ProbDist::new(vec![0.5, 1.5, 1.5]).unwrap();
    println!("closed evolution: relative entropy I(p(t), q(t)) is non-increasing");
    println!("{:>6} {:>20}", "t", "I(p, q)");
    let dt = 0.05;
    for step in 0..=40 {
        if step % 5 == 0 {
            println!("{:6.2} {:20.12}", step as f64 * dt, relative_entropy(&p, &q));
        }
        p = evolve(&h, &p, dt, dt).unwrap();
        q = evolve(&h, &q, dt, dt).unwrap();
    }

    // open process: the rate decomposes into internal + boundary
    println!("\nopen membrane: f-divergence rate = internal + boundary");
    let kl = ConvexFn::kl();
    let p = ProbDist::new(vec![2.0, 0.7, 0.3]).unwrap();
    let report = f_divergence_rate(&m.open, &p, &m.q, &kl, None, None).unwrap();
    println!("  I(p, q)        = {}", report.value);
    println!("  dI/dt          = {}", report.rate);
    println!("  internal part  = {} (always <= 0)", report.internal_term);
    println!("  boundary part  = {}", report.boundary_term);

    // the same split for the quadratic generator x^2/2
    let hs = ConvexFn::half_square();
    let report = f_divergence_rate(&m.open, &p, &m.q, &hs, None, None).unwrap();
    println!("\n  with f(x) = x^2/2 (the dissipation generator):");
    println!("  internal part  = {} (equals minus the dissipation)", report.internal_term);
    let d = open_nets::thermo::dissipation(&m, &p).unwrap();
    println!("  dissipation    = {d}");
}
