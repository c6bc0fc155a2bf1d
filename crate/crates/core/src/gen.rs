//! Seeded random instances: small digraphs for property checks, rooted
//! concept graphs for round-trip tests, and dictionary-scale graphs.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::Digraph;
use crate::penman::{AmrGraph, PenmanDocument};

/// `G(n, p)` over ordered pairs, self-loops included.
pub fn random_digraph<R: Rng>(rng: &mut R, n: usize, p: f64) -> Digraph {
    let mut arcs = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if rng.gen_bool(p) {
                arcs.push((u, v));
            }
        }
    }
    Digraph::from_index_arcs(n, arcs)
}

const CONCEPTS: [&str; 12] = [
    "fruit", "red", "round", "thing", "group", "form-01", "whole", "silly", "excite-01", "amuse-01", "way", "person",
];
const ROLES: [&str; 7] = [":ARG0", ":ARG1", ":ARG2", ":mod", ":manner", ":consist-of", ":op1"];
const CONSTANTS: [&str; 4] = ["-", "1", "\"Paris\"", "expressive"];

/// Random rooted concept DAG with `n` variables. Each variable after the
/// first is attached to an earlier one in a direction fixed by a hidden
/// topological order, so inverse roles are needed whenever the root is not
/// a source.
pub fn random_amr<R: Rng>(rng: &mut R, n: usize) -> PenmanDocument {
    let n = n.max(1);
    let vars: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut rank: Vec<usize> = (0..n).collect();
    rank.shuffle(rng);
    let mut g = AmrGraph::new(&vars[0], CONCEPTS.choose(rng).unwrap());
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut link = |g: &mut AmrGraph, a: usize, b: usize, rng: &mut R| {
        let (s, t) = if rank[a] < rank[b] { (a, b) } else { (b, a) };
        if seen.insert((s, t)) {
            g.add_edge(&vars[s], ROLES.choose(rng).unwrap(), &vars[t]);
        }
    };
    for (k, var) in vars.iter().enumerate().take(n).skip(1) {
        g.add_instance(var, CONCEPTS.choose(rng).unwrap());
        let p = rng.gen_range(0..k);
        link(&mut g, p, k, rng);
    }
    for _ in 0..rng.gen_range(0..=n / 2) {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            link(&mut g, a, b, rng);
        }
    }
    for _ in 0..rng.gen_range(0..=2) {
        let s = rng.gen_range(0..n);
        g.add_attribute(&vars[s], [":polarity", ":quant", ":name", ":mode"][rng.gen_range(0..4)], CONSTANTS.choose(rng).unwrap());
    }
    let mut doc = PenmanDocument::new(g);
    doc.metadata.insert("id".into(), format!("w{}.{}", rng.gen_range(0..1000), rng.gen_range(0..4)));
    doc
}

/// Dictionary-shaped digraph with `n` vertices and about `m` arcs: each
/// vertex is defined by roughly `m / n` words drawn from a Zipf law, so a
/// few words define much of the vocabulary and most are rarely used.
pub fn dictionary_like(n: usize, m: usize, seed: u64) -> Digraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cumulative = Vec::with_capacity(n);
    let mut total = 0.0f64;
    for k in 0..n {
        total += 1.0 / (k as f64 + 1.0);
        cumulative.push(total);
    }
    let mut by_rank: Vec<usize> = (0..n).collect();
    by_rank.shuffle(&mut rng);
    let mean = m as f64 / n.max(1) as f64;
    let mut arcs = Vec::with_capacity(m + n);
    for target in 0..n {
        let len = rng.gen_range(1..=((2.0 * mean) as usize).max(1));
        for _ in 0..len {
            let x = rng.gen::<f64>() * total;
            let rank = cumulative.partition_point(|&c| c < x).min(n - 1);
            arcs.push((by_rank[rank], target));
        }
    }
    Digraph::from_index_arcs(n, arcs)
}

/// Digraph with exactly `n` vertices and `m` arcs, all of them on the kernel:
/// a Hamiltonian circuit plus `m - n` random loop-free arcs.
pub fn kernel_with_counts(n: usize, m: usize, seed: u64) -> Digraph {
    assert!(n >= 2 && m >= n && m <= n * (n - 1), "no loop-free kernel with {n} vertices and {m} arcs");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arcs: HashSet<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    while arcs.len() < m {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v {
            arcs.insert((u, v));
        }
    }
    let mut arcs: Vec<(usize, usize)> = arcs.into_iter().collect();
    arcs.sort_unstable();
    Digraph::from_index_arcs(n, arcs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_counts_are_exact() {
        let g = kernel_with_counts(50, 300, 1);
        assert_eq!((g.vertex_count(), g.arc_count()), (50, 300));
        assert!(g.vertices().all(|v| g.in_degree(v) > 0 && g.out_degree(v) > 0));
        assert!(g.vertices().all(|v| !g.has_loop(v)));
    }

    #[test]
    fn dictionary_like_is_seeded_and_sized() {
        let a = dictionary_like(2000, 15000, 3);
        let b = dictionary_like(2000, 15000, 3);
        assert_eq!(a, b);
        assert_eq!(a.vertex_count(), 2000);
        let m = a.arc_count() as f64;
        assert!((10000.0..20000.0).contains(&m), "{m}");
        let max_out = a.vertices().map(|v| a.out_degree(v)).max().unwrap();
        assert!(max_out > 200, "heavy head expected, got {max_out}");
    }

    #[test]
    fn random_amr_is_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in 1..30 {
            let doc = random_amr(&mut rng, n);
            doc.graph.check().unwrap();
            assert_eq!(doc.graph.instances.len(), n);
        }
    }
}
