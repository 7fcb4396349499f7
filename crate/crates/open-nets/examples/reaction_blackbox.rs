//! Black-boxing an open reaction network: the steady-state relation on
//! boundary concentrations and flows is semialgebraic, represented here
//! by a solver-backed oracle. Membership answers yes (with a witness),
//! certified no, or unknown; sampling draws behavior points; both feed a
//! functoriality check of composition.
//!
//! Run with: cargo run --example reaction_blackbox

use open_nets::behavior_rx::{
    check_functoriality_rx, BehaviorOracle, BoundaryTuple, Membership, OracleConfig,
};
use open_nets::finset::{Cospan, FinMap, FinSet};
use open_nets::open_reaction::{compose_open_rx, graybox, OpenReactionNetwork};
use open_nets::reaction::ReactionNetwork;

fn bimolecular() -> OpenReactionNetwork {
    let species = FinSet::new(["A", "B", "C"]).unwrap();
    let network = ReactionNetwork::new(
        species.clone(),
        FinSet::new(["alpha"]).unwrap(),
        vec![vec![1, 1, 0]],
        vec![vec![0, 0, 2]],
        vec![1.0],
    )
    .unwrap();
    OpenReactionNetwork::new(
        Cospan::new(
            FinMap::from_pairs(
                FinSet::new(["1", "2", "3"]).unwrap(),
                species.clone(),
                [("1", "A"), ("2", "B"), ("3", "B")],
            )
            .unwrap(),
            FinMap::from_pairs(FinSet::new(["4"]).unwrap(), species, [("4", "C")]).unwrap(),
        )
        .unwrap(),
        network,
    )
    .unwrap()
}

fn decay() -> OpenReactionNetwork {
    let species = FinSet::new(["D", "E", "F"]).unwrap();
    let network = ReactionNetwork::new(
        species.clone(),
        FinSet::new(["beta"]).unwrap(),
        vec![vec![1, 0, 0]],
        vec![vec![0, 1, 1]],
        vec![1.0],
    )
    .unwrap();
    OpenReactionNetwork::new(
        Cospan::new(
            FinMap::from_pairs(FinSet::new(["4"]).unwrap(), species.clone(), [("4", "D")]).unwrap(),
            FinMap::from_pairs(
                FinSet::new(["5", "6"]).unwrap(),
                species,
                [("5", "E"), ("6", "F")],
            )
            .unwrap(),
        )
        .unwrap(),
        network,
    )
    .unwrap()
}

fn main() {
    let composite = compose_open_rx(&bimolecular(), &decay()).unwrap();
    let oracle = BehaviorOracle::new(graybox(&composite), OracleConfig::default());

    println!("composite A+B -> 2C -> E+F, boundary species A, B, E, F");
    println!("steady relation: I1 = I2+I3 = AB and O5 = O6 = 2AB\n");

    // membership with a witness for the internal species
    let good = BoundaryTuple {
        in_conc: vec![1.0, 2.0, 2.0],
        inflow: vec![2.0, 0.5, 1.5],
        out_conc: vec![0.3, 0.8],
        outflow: vec![4.0, 4.0],
    };
    match oracle.membership(&good).unwrap() {
        Membership::Yes { witness, .. } => {
            println!("tuple accepted; internal C completed to {}", witness[2]);
        }
        other => println!("unexpected: {other:?}"),
    }

    let bad = BoundaryTuple {
        outflow: vec![4.0, 3.0],
        ..good
    };
    match oracle.membership(&bad).unwrap() {
        Membership::No { certificate } => {
            println!("unequal outflows rejected: {certificate}");
        }
        other => println!("unexpected: {other:?}"),
    }

    // sampled behavior points all satisfy the constraint set
    let samples = oracle.sample(5, 7);
    println!("\nfive sampled behavior points (A, B | I1 I2 I3 | O5 O6):");
    for s in &samples {
        println!(
            "  A={:.3} B={:.3} | {:.3} {:.3} {:.3} | {:.3} {:.3}",
            s.tuple.in_conc[0],
            s.tuple.in_conc[1],
            s.tuple.inflow[0],
            s.tuple.inflow[1],
            s.tuple.inflow[2],
            s.tuple.outflow[0],
            s.tuple.outflow[1],
        );
    }

    // functoriality of black-boxing, verified by sampling both ways
    let report = check_functoriality_rx(
        &graybox(&bimolecular()),
        &graybox(&decay()),
        200,
        7,
        1e-8,
    )
    .unwrap();
    println!(
        "\nfunctoriality sweep: {} checked, {} passed, {} failed, {} unknown",
        report.checked, report.passed, report.failed, report.unknown
    );
}
