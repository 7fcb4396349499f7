//! Composing open reaction networks: glue A+B -> 2C onto D -> E+F by
//! identifying C with D, then gray-box to mass-action dynamics. The
//! gray-boxing functor commutes with composition, monomial for monomial.
//!
//! Run with: cargo run --example reaction_composition

use open_nets::finset::{Cospan, FinMap, FinSet};
use open_nets::open_reaction::{
    compose_dynam, compose_open_rx, graybox, open_rate_step, OpenReactionNetwork,
};
use open_nets::reaction::{evaluate, ReactionNetwork};

fn bimolecular(rate: f64) -> OpenReactionNetwork {
    let species = FinSet::new(["A", "B", "C"]).unwrap();
    let network = ReactionNetwork::new(
        species.clone(),
        FinSet::new(["alpha"]).unwrap(),
        vec![vec![1, 1, 0]],
        vec![vec![0, 0, 2]],
        vec![rate],
    )
    .unwrap();
    let x = FinSet::new(["1", "2", "3"]).unwrap();
    let y = FinSet::new(["4"]).unwrap();
    OpenReactionNetwork::new(
        Cospan::new(
            FinMap::from_pairs(x, species.clone(), [("1", "A"), ("2", "B"), ("3", "B")]).unwrap(),
            FinMap::from_pairs(y, species, [("4", "C")]).unwrap(),
        )
        .unwrap(),
        network,
    )
    .unwrap()
}

fn decay(rate: f64) -> OpenReactionNetwork {
    let species = FinSet::new(["D", "E", "F"]).unwrap();
    let network = ReactionNetwork::new(
        species.clone(),
        FinSet::new(["beta"]).unwrap(),
        vec![vec![1, 0, 0]],
        vec![vec![0, 1, 1]],
        vec![rate],
    )
    .unwrap();
    let x = FinSet::new(["4"]).unwrap();
    let y = FinSet::new(["5", "6"]).unwrap();
    OpenReactionNetwork::new(
        Cospan::new(
            FinMap::from_pairs(x, species.clone(), [("4", "D")]).unwrap(),
            FinMap::from_pairs(y, species, [("5", "E"), ("6", "F")]).unwrap(),
        )
        .unwrap(),
        network,
    )
    .unwrap()
}

fn main() {
    let (ra, rb) = (1.0, 2.0);
    let r1 = bimolecular(ra);
    let r2 = decay(rb);

    let composite = compose_open_rx(&r1, &r2).unwrap();
    println!("composite species: {:?}", composite.cospan.apex.labels());
    println!("(C and D were identified; the merged species is called C)");

    // two routes to the composite dynamics
    let route_one = graybox(&compose_open_rx(&r1, &r2).unwrap());
    let route_two = compose_dynam(&graybox(&r1), &graybox(&r2)).unwrap();
    println!(
        "\ngray-box of composite == composite of gray-boxes (exact): {}",
        route_one.field == route_two.field
    );

    let c = [1.0, 2.0, 0.5, 0.0, 0.0];
    println!("\nreaction velocities at (A, B, C, E, F) = {c:?}:");
    let v = evaluate(&route_one.field, &c);
    for (label, vi) in route_one.cospan.apex.labels().iter().zip(&v) {
        println!("  d{label}/dt = {vi}");
    }
    println!("  (dC/dt = 2 r_a AB - r_b C = {})", 2.0 * ra * 1.0 * 2.0 - rb * 0.5);

    // drive the open system: inflows at A and B, outflows at E and F
    println!("\ndriving the open composite toward a steady state:");
    let mut state = c.to_vec();
    let inflow = [2.0, 1.0, 1.0];
    let outflow = [2.0, 2.0];
    for _ in 0..4000 {
        state = open_rate_step(&route_one, &state, &inflow, &outflow, 0.005).unwrap();
    }
    for (label, vi) in route_one.cospan.apex.labels().iter().zip(&state) {
        println!("  {label} -> {vi:.6}");
    }
    let residual = {
        let v = evaluate(&route_one.field, &state);
        // steady when v + i*(I) - o*(O) = 0
        (v[0] + 2.0).abs().max((v[2]).abs())
    };
    println!("  (residual of the A and C rows: {residual:.2e})");
}
