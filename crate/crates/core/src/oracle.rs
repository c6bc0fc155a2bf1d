//! Exact minimum feedback vertex set by exhaustive search, for checking
//! reductions on small graphs.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::graph::{Digraph, GraphError, VertexId};
use crate::par::{self, Execution};
use crate::reduce::{apply, ReductionError, ReductionKind, Reducer, Target};
use crate::scc::strongly_connected_components;

pub const DEFAULT_CAP: usize = 20;
/// Hard ceiling on the vertex count the search accepts.
pub const MAX_CAP: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("graph has {n} vertices, above the oracle cap of {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

/// Minimum FVS size with its witnesses, each a sorted vertex list; witnesses
/// are in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FvsResult {
    pub size: usize,
    pub witnesses: Vec<Vec<VertexId>>,
}

impl FvsResult {
    pub fn first(&self) -> &[VertexId] {
        &self.witnesses[0]
    }
}

/// True iff `G - set` has no circuit. Self-loops are circuits.
pub fn is_fvs(g: &Digraph, set: &BTreeSet<VertexId>) -> Result<bool, GraphError> {
    for &u in set {
        g.check_vertex(u)?;
    }
    let bound = g.index_bound();
    let mut indeg = vec![0usize; bound];
    let mut queue = Vec::new();
    let mut remaining = 0usize;
    for v in g.vertices().filter(|v| !set.contains(v)) {
        remaining += 1;
        indeg[v.index()] = g.in_neighbors(v).iter().filter(|p| !set.contains(p)).count();
        if indeg[v.index()] == 0 {
            queue.push(v);
        }
    }
    while let Some(v) = queue.pop() {
        remaining -= 1;
        for &w in g.out_neighbors(v) {
            if set.contains(&w) {
                continue;
            }
            indeg[w.index()] -= 1;
            if indeg[w.index()] == 0 {
                queue.push(w);
            }
        }
    }
    Ok(remaining == 0)
}

/// Exhaustive MFVS search by increasing cardinality.
#[derive(Clone, Copy, Debug)]
pub struct MfvsSolver {
    cap: usize,
    all_witnesses: bool,
    exec: Execution,
}

impl Default for MfvsSolver {
    fn default() -> Self {
        Self { cap: DEFAULT_CAP, all_witnesses: true, exec: Execution::default() }
    }
}

impl MfvsSolver {
    pub fn new() -> Self {
        Self::default()
    }

    /// Largest vertex count accepted, clamped to [`MAX_CAP`].
    pub fn cap(mut self, cap: usize) -> Self {
        self.cap = cap.min(MAX_CAP);
        self
    }

    /// Stop at the lexicographically first witness.
    pub fn first_only(mut self) -> Self {
        self.all_witnesses = false;
        self
    }

    pub fn execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn solve(&self, g: &Digraph) -> Result<FvsResult, OracleError> {
        let n = g.vertex_count();
        if n > self.cap {
            return Err(OracleError::CapExceeded { n, cap: self.cap });
        }
        let small = Bitgraph::new(g);
        let forced: u32 = (0..n).filter(|&i| small.succ[i] & (1 << i) != 0).fold(0, |m, i| m | (1 << i));

        // only vertices on a circuit of G - forced can belong to a minimum FVS
        let mut rest = g.clone();
        for i in 0..n {
            if forced & (1 << i) != 0 {
                rest.remove_vertex(small.ids[i]).expect("live vertex");
            }
        }
        let mut candidates: Vec<usize> = Vec::new();
        for block in strongly_connected_components(&rest) {
            if block.len() > 1 {
                candidates.extend(block.iter().map(|v| small.pos(*v)));
            }
        }
        candidates.sort_unstable();

        let all = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        let base = all & !forced;
        for k in 0..=candidates.len() {
            let found = self.search_size(&small, base, &candidates, k);
            if !found.is_empty() {
                let mut witnesses: Vec<Vec<VertexId>> = found
                    .into_iter()
                    .map(|combo| small.to_ids(combo | forced))
                    .collect();
                witnesses.sort();
                return Ok(FvsResult { size: k + forced.count_ones() as usize, witnesses });
            }
        }
        unreachable!("removing every candidate leaves an acyclic graph")
    }

    /// All (or the first) `k`-subsets of `candidates` whose removal from
    /// `alive` leaves an acyclic graph, as masks in lexicographic order.
    fn search_size(&self, g: &Bitgraph, alive: u32, candidates: &[usize], k: usize) -> Vec<u32> {
        if k == 0 {
            return if g.acyclic(alive) { vec![0] } else { Vec::new() };
        }
        let heads = candidates.len() + 1 - k;
        let all = self.all_witnesses;
        let parts: Vec<Vec<u32>> = par::map_range(self.exec, heads, |h| {
            let first = 1u32 << candidates[h];
            let tail = &candidates[h + 1..];
            let mut out = Vec::new();
            for_each_combination(tail, k - 1, |mask| {
                let removed = first | mask;
                if g.acyclic(alive & !removed) {
                    out.push(removed);
                    return all;
                }
                true
            });
            out
        });
        let mut found: Vec<u32> = Vec::new();
        for part in parts {
            found.extend(part);
            if !all && !found.is_empty() {
                found.truncate(1);
                break;
            }
        }
        found
    }
}

/// Exact MFVS with the default cap, all witnesses.
pub fn exact_mfvs(g: &Digraph) -> Result<FvsResult, OracleError> {
    MfvsSolver::new().solve(g)
}

pub fn mfvs_size(g: &Digraph) -> Result<usize, OracleError> {
    Ok(MfvsSolver::new().first_only().solve(g)?.size)
}

/// Calls `visit` with each `k`-subset of `items` (as a bit mask) in
/// lexicographic order until it returns false.
fn for_each_combination<F: FnMut(u32) -> bool>(items: &[usize], k: usize, mut visit: F) {
    let n = items.len();
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let mask = idx.iter().fold(0u32, |m, &i| m | (1 << items[i]));
        if !visit(mask) {
            return;
        }
        // advance to the next combination
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        if idx[i] == i + n - k {
            return;
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Bit-matrix copy of a small graph.
struct Bitgraph {
    ids: Vec<VertexId>,
    succ: Vec<u32>,
    pred: Vec<u32>,
}

impl Bitgraph {
    fn new(g: &Digraph) -> Self {
        let ids: Vec<VertexId> = g.vertices().collect();
        let n = ids.len();
        let mut pos = vec![usize::MAX; g.index_bound()];
        for (i, v) in ids.iter().enumerate() {
            pos[v.index()] = i;
        }
        let mut succ = vec![0u32; n];
        let mut pred = vec![0u32; n];
        for (u, v) in g.arcs() {
            let (a, b) = (pos[u.index()], pos[v.index()]);
            succ[a] |= 1 << b;
            pred[b] |= 1 << a;
        }
        Self { ids, succ, pred }
    }

    fn pos(&self, v: VertexId) -> usize {
        self.ids.binary_search(&v).expect("live vertex")
    }

    fn to_ids(&self, mask: u32) -> Vec<VertexId> {
        (0..self.ids.len()).filter(|&i| mask & (1 << i) != 0).map(|i| self.ids[i]).collect()
    }

    /// Peels vertices with no predecessor inside `alive` until none is left
    /// or no progress is possible.
    fn acyclic(&self, mut alive: u32) -> bool {
        loop {
            let mut progress = false;
            let mut scan = alive;
            while scan != 0 {
                let i = scan.trailing_zeros() as usize;
                scan &= scan - 1;
                if self.pred[i] & alive == 0 {
                    alive &= !(1 << i);
                    progress = true;
                }
            }
            if alive == 0 {
                return true;
            }
            if !progress {
                return false;
            }
        }
    }
}

/// Result of comparing a graph with its reduction under the oracle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreservationCheck {
    pub mfvs_before: usize,
    pub included: usize,
    pub mfvs_after: usize,
    /// The partial solution avoids the reduced graph's vertices.
    pub disjoint: bool,
    /// Every minimum FVS of the reduced graph, lifted by the partial
    /// solution, is an FVS of the original.
    pub lifted_ok: bool,
}

impl PreservationCheck {
    pub fn holds(&self) -> bool {
        self.disjoint && self.lifted_ok && self.mfvs_before == self.included + self.mfvs_after
    }
}

/// Runs `reduction` on a copy of `g`; it must return the partial solution it
/// committed to. The sizes and every lifted witness are then checked.
pub fn check_preservation_with<F>(g: &Digraph, cap: usize, reduction: F) -> Result<PreservationCheck, OracleError>
where
    F: FnOnce(&mut Digraph) -> Result<BTreeSet<VertexId>, OracleError>,
{
    let solver = MfvsSolver::new().cap(cap).execution(Execution::Sequential);
    let before = solver.solve(g)?;
    let mut reduced = g.clone();
    let partial = reduction(&mut reduced)?;
    let after = solver.solve(&reduced)?;
    let disjoint = partial.iter().all(|&u| !reduced.contains_vertex(u));
    let mut lifted_ok = true;
    for w in &after.witnesses {
        let mut lifted: BTreeSet<VertexId> = partial.clone();
        lifted.extend(w.iter().copied());
        // a lifted set that names a vertex of g twice is still fine; one that
        // names a vertex g lacks is not an FVS of g
        if !is_fvs(g, &lifted).unwrap_or(false) {
            lifted_ok = false;
            break;
        }
    }
    Ok(PreservationCheck {
        mfvs_before: before.size,
        included: partial.len(),
        mfvs_after: after.size,
        disjoint,
        lifted_ok,
    })
}

/// Applies the pointed reduction `kind` at `target` and checks MFVS
/// preservation with respect to the vertex it commits, if any.
pub fn check_preservation(g: &Digraph, kind: ReductionKind, target: Target) -> Result<bool, OracleError> {
    let check = check_preservation_with(g, DEFAULT_CAP, |h| {
        let delta = apply(kind, h, target)?;
        Ok(delta.and_then(|d| d.included).into_iter().collect())
    })?;
    Ok(check.holds())
}

/// Full reduction run checked end to end.
pub fn check_reducer(g: &Digraph, reducer: &Reducer, cap: usize) -> Result<PreservationCheck, OracleError> {
    check_preservation_with(g, cap, |h| {
        let (reduced, trace) = reducer.run(std::mem::take(h));
        *h = reduced;
        Ok(trace.included)
    })
}
