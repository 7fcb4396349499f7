//! Shared generators and oracles for the integration suites.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use open_nets::finset::{Cospan, FinMap, FinSet};
use open_nets::markov::{Edge, MarkovProcess, ProbDist};
use open_nets::open_markov::{OpenDetailedBalanced, OpenMarkov};

/// A connected process on `n` states with random rates; `symmetric`
/// mirrors every rate so the process balances in detail.
pub fn random_connected_process(rng: &mut ChaCha8Rng, n: usize, symmetric: bool) -> MarkovProcess {
    let states = FinSet::new((0..n).map(|k| format!("s{k}"))).unwrap();
    let mut edges = Vec::new();
    let mut id = 0usize;
    let push = |edges: &mut Vec<Edge>, id: &mut usize, a: usize, b: usize, r: f64| {
        edges.push(Edge::new(format!("e{}", *id), format!("s{a}"), format!("s{b}"), r));
        *id += 1;
    };
    for v in 1..n {
        let u = rng.gen_range(0..v);
        let r = rng.gen_range(0.2..3.0);
        push(&mut edges, &mut id, u, v, r);
        let back = if symmetric { r } else { rng.gen_range(0.2..3.0) };
        push(&mut edges, &mut id, v, u, back);
    }
    for _ in 0..n {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            let r = rng.gen_range(0.2..3.0);
            push(&mut edges, &mut id, a, b, r);
            let back = if symmetric { r } else { rng.gen_range(0.2..3.0) };
            push(&mut edges, &mut id, b, a, back);
        }
    }
    MarkovProcess::new(states, edges).unwrap()
}

/// A connected process detailed balanced for the given equilibrium.
pub fn process_balanced_for(rng: &mut ChaCha8Rng, states: &FinSet, q: &[f64]) -> MarkovProcess {
    let n = states.len();
    let mut edges = Vec::new();
    let mut id = 0usize;
    let link = |edges: &mut Vec<Edge>, id: &mut usize, i: usize, j: usize, r: f64| {
        edges.push(Edge::new(
            format!("e{}", *id),
            states.label(i).to_string(),
            states.label(j).to_string(),
            r,
        ));
        *id += 1;
        edges.push(Edge::new(
            format!("e{}", *id),
            states.label(j).to_string(),
            states.label(i).to_string(),
            r * q[i] / q[j],
        ));
        *id += 1;
    };
    for v in 1..n {
        let u = rng.gen_range(0..v);
        link(&mut edges, &mut id, u, v, rng.gen_range(0.2..2.0));
    }
    for _ in 0..n / 2 {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            link(&mut edges, &mut id, a, b, rng.gen_range(0.2..2.0));
        }
    }
    MarkovProcess::new(states.clone(), edges).unwrap()
}

/// A random open detailed-balanced process on `n` states.
pub fn random_db_open(rng: &mut ChaCha8Rng, n: usize) -> OpenDetailedBalanced {
    let states = FinSet::new((0..n).map(|k| format!("s{k}"))).unwrap();
    let q: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
    let process = process_balanced_for(rng, &states, &q);
    let kx = rng.gen_range(1..=2.min(n));
    let ky = rng.gen_range(1..=2.min(n));
    let x = FinSet::new((0..kx).map(|k| format!("x{k}"))).unwrap();
    let y = FinSet::new((0..ky).map(|k| format!("y{k}"))).unwrap();
    let in_leg =
        FinMap::from_indices(x, states.clone(), (0..kx).map(|_| rng.gen_range(0..n)).collect())
            .unwrap();
    let out_leg =
        FinMap::from_indices(y, states.clone(), (0..ky).map(|_| rng.gen_range(0..n)).collect())
            .unwrap();
    let open = OpenMarkov::new(Cospan::new(in_leg, out_leg).unwrap(), process).unwrap();
    OpenDetailedBalanced::new(open, ProbDist::new(q).unwrap()).unwrap()
}

/// A composable pair of open detailed-balanced processes with matching
/// equilibria on the shared interface.
pub fn composable_db_pair(rng: &mut ChaCha8Rng) -> (OpenDetailedBalanced, OpenDetailedBalanced) {
    let n1 = rng.gen_range(2..=5);
    let n2 = rng.gen_range(2..=5);
    let ny = rng.gen_range(1..=n1.min(n2));

    let states1 = FinSet::new((0..n1).map(|k| format!("a{k}"))).unwrap();
    let q1: Vec<f64> = (0..n1).map(|_| rng.gen_range(0.5..2.0)).collect();
    let p1 = process_balanced_for(rng, &states1, &q1);

    let y = FinSet::new((0..ny).map(|k| format!("y{k}"))).unwrap();
    let out_targets: Vec<usize> = (0..ny).map(|_| rng.gen_range(0..n1)).collect();
    let mut in_targets: Vec<usize> = (0..ny).collect();
    in_targets.shuffle(rng);

    let states2 = FinSet::new((0..n2).map(|k| format!("b{k}"))).unwrap();
    let mut q2: Vec<f64> = (0..n2).map(|_| rng.gen_range(0.5..2.0)).collect();
    for (k, &t) in in_targets.iter().enumerate() {
        q2[t] = q1[out_targets[k]];
    }
    let p2 = process_balanced_for(rng, &states2, &q2);

    let kx = rng.gen_range(1..=2);
    let kz = rng.gen_range(1..=2);
    let x = FinSet::new((0..kx).map(|k| format!("x{k}"))).unwrap();
    let z = FinSet::new((0..kz).map(|k| format!("z{k}"))).unwrap();

    let m1 = OpenMarkov::new(
        Cospan::new(
            FinMap::from_indices(
                x,
                states1.clone(),
                (0..kx).map(|_| rng.gen_range(0..n1)).collect(),
            )
            .unwrap(),
            FinMap::from_indices(y.clone(), states1, out_targets).unwrap(),
        )
        .unwrap(),
        p1,
    )
    .unwrap();
    let m2 = OpenMarkov::new(
        Cospan::new(
            FinMap::from_indices(y, states2.clone(), in_targets).unwrap(),
            FinMap::from_indices(
                z,
                states2,
                (0..kz).map(|_| rng.gen_range(0..n2)).collect(),
            )
            .unwrap(),
        )
        .unwrap(),
        p2,
    )
    .unwrap();

    (
        OpenDetailedBalanced::new(m1, ProbDist::new(q1).unwrap()).unwrap(),
        OpenDetailedBalanced::new(m2, ProbDist::new(q2).unwrap()).unwrap(),
    )
}

/// Brute-force matrix-tree oracle: sums rate products over all spanning
/// trees directed toward `root` by enumerating one out-edge choice per
/// non-root vertex and discarding cyclic choices.
pub fn tree_sum_oracle(m: &MarkovProcess, root: usize) -> f64 {
    let n = m.states().len();
    let mut out_edges: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for e in m.edges() {
        let s = m.states().index_of(&e.source).unwrap();
        let t = m.states().index_of(&e.target).unwrap();
        if s != t {
            out_edges[s].push((t, e.rate));
        }
    }
    let choosers: Vec<usize> = (0..n).filter(|&v| v != root).collect();
    for &v in &choosers {
        if out_edges[v].is_empty() {
            return 0.0;
        }
    }
    let mut total = 0.0;
    let mut choice = vec![0usize; choosers.len()];
    'outer: loop {
        let mut parent = vec![usize::MAX; n];
        for (k, &v) in choosers.iter().enumerate() {
            parent[v] = out_edges[v][choice[k]].0;
        }
        let mut ok = true;
        for &v in &choosers {
            let mut cur = v;
            let mut hops = 0;
            while cur != root {
                cur = parent[cur];
                hops += 1;
                if hops > n {
                    ok = false;
                    break;
                }
            }
            if !ok {
                break;
            }
        }
        if ok {
            let mut prod = 1.0;
            for (k, &v) in choosers.iter().enumerate() {
                prod *= out_edges[v][choice[k]].1;
            }
            total += prod;
        }
        for k in 0..choosers.len() {
            choice[k] += 1;
            if choice[k] < out_edges[choosers[k]].len() {
                continue 'outer;
            }
            choice[k] = 0;
        }
        break;
    }
    total
}

/// A three-state cycle at rates `alpha` (five edges) and `beta` (the
/// `C → A` edge); unbalanced whenever `alpha ≠ beta`.
pub fn three_cycle(alpha: f64, beta: f64) -> MarkovProcess {
    let states = FinSet::new(["A", "B", "C"]).unwrap();
    MarkovProcess::new(
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
    .unwrap()
}
