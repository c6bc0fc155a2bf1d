//! Test-only MFVS oracle built on a different route from the library one:
//! enumerate every elementary circuit, then find the smallest vertex set
//! that hits all of them.

#![allow(dead_code)]

use std::collections::BTreeSet;

use groundkit::{Digraph, VertexId};

/// Live vertices of `g` in ascending order with dense positions.
fn positions(g: &Digraph) -> (Vec<VertexId>, Vec<Vec<usize>>) {
    let ids: Vec<VertexId> = g.vertices().collect();
    let mut pos = vec![usize::MAX; g.index_bound()];
    for (i, v) in ids.iter().enumerate() {
        pos[v.index()] = i;
    }
    let adj = ids.iter().map(|&u| g.out_neighbors(u).iter().map(|w| pos[w.index()]).collect()).collect();
    (ids, adj)
}

/// Each elementary circuit as a bitmask over dense positions, found by DFS
/// from its smallest vertex through larger vertices only.
pub fn circuits(g: &Digraph) -> Vec<u64> {
    let (ids, adj) = positions(g);
    assert!(ids.len() <= 64);
    let mut out = Vec::new();
    for s in 0..ids.len() {
        // (vertex, next neighbour index) stack; `on` is the current path
        let mut stack = vec![(s, 0usize)];
        let mut on: u64 = 1 << s;
        while let Some(&mut (x, ref mut next)) = stack.last_mut() {
            if *next < adj[x].len() {
                let y = adj[x][*next];
                *next += 1;
                if y == s {
                    out.push(on);
                } else if y > s && on & (1 << y) == 0 {
                    on |= 1 << y;
                    stack.push((y, 0));
                }
            } else {
                on &= !(1 << x);
                stack.pop();
            }
        }
    }
    out
}

/// Minimum size of a vertex set meeting every circuit.
pub fn hitting_set_mfvs(g: &Digraph) -> usize {
    let n = g.vertex_count();
    assert!(n <= 20, "test oracle is exponential");
    let cs = circuits(g);
    (0..=n)
        .find(|&k| subsets_of_size(n, k).any(|s| cs.iter().all(|&c| c & s != 0)))
        .expect("the full vertex set hits every circuit")
}

/// Labels of the minimum hitting sets, for witness comparison.
pub fn all_minimum_hitting_sets(g: &Digraph) -> BTreeSet<BTreeSet<String>> {
    let (ids, _) = positions(g);
    let n = ids.len();
    let cs = circuits(g);
    let k = hitting_set_mfvs(g);
    subsets_of_size(n, k)
        .filter(|&s| cs.iter().all(|&c| c & s != 0))
        .map(|s| (0..n).filter(|i| s & (1 << i) != 0).map(|i| g.label(ids[i]).to_owned()).collect())
        .collect()
}

fn subsets_of_size(n: usize, k: usize) -> impl Iterator<Item = u64> {
    (0u64..(1u64 << n)).filter(move |s| s.count_ones() as usize == k)
}

/// Graph on `n` vertices `0..n` from bit `i * n + j` of `code`.
pub fn graph_from_code(n: usize, code: u64, loops: bool) -> Digraph {
    let mut arcs = Vec::new();
    let mut bit = 0;
    for i in 0..n {
        for j in 0..n {
            if i == j && !loops {
                continue;
            }
            if code & (1 << bit) != 0 {
                arcs.push((i, j));
            }
            bit += 1;
        }
    }
    Digraph::from_index_arcs(n, arcs)
}

/// Number of arc slots in `graph_from_code`.
pub fn slots(n: usize, loops: bool) -> u32 {
    (if loops { n * n } else { n * (n - 1) }) as u32
}
