//! Strongly connected components, reachability and circuit membership.

use std::collections::VecDeque;

use crate::graph::{Arc, Digraph, GraphError, VertexId};

/// Component label per vertex index, as produced by [`component_ids`].
pub struct Components {
    /// `comp[v]` is the component of `v`, or `usize::MAX` for dead indices.
    pub comp: Vec<usize>,
    pub count: usize,
}

impl Components {
    #[inline]
    pub fn of(&self, v: VertexId) -> usize {
        self.comp[v.index()]
    }
}

/// Tarjan's algorithm, iterative, restricted to arcs accepted by `keep`.
pub fn component_ids_filtered<F>(g: &Digraph, keep: F) -> Components
where
    F: Fn(VertexId, VertexId) -> bool,
{
    const UNSEEN: usize = usize::MAX;
    let bound = g.index_bound();
    let mut index = vec![UNSEEN; bound];
    let mut low = vec![0usize; bound];
    let mut on_stack = vec![false; bound];
    let mut comp = vec![UNSEEN; bound];
    let mut stack: Vec<VertexId> = Vec::new();
    let mut next_index = 0usize;
    let mut count = 0usize;

    // call stack of (vertex, successors snapshot, position)
    let mut frames: Vec<(VertexId, Vec<VertexId>, usize)> = Vec::new();

    for root in g.vertices() {
        if index[root.index()] != UNSEEN {
            continue;
        }
        let succ = |v: VertexId| -> Vec<VertexId> {
            g.out_neighbors(v).iter().copied().filter(|&w| keep(v, w)).collect()
        };
        index[root.index()] = next_index;
        low[root.index()] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root.index()] = true;
        frames.push((root, succ(root), 0));

        while let Some(frame) = frames.last_mut() {
            let v = frame.0;
            if frame.2 < frame.1.len() {
                let w = frame.1[frame.2];
                frame.2 += 1;
                if index[w.index()] == UNSEEN {
                    index[w.index()] = next_index;
                    low[w.index()] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w.index()] = true;
                    frames.push((w, succ(w), 0));
                } else if on_stack[w.index()] {
                    low[v.index()] = low[v.index()].min(index[w.index()]);
                }
            } else {
                frames.pop();
                if let Some(parent) = frames.last() {
                    let p = parent.0;
                    low[p.index()] = low[p.index()].min(low[v.index()]);
                }
                if low[v.index()] == index[v.index()] {
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w.index()] = false;
                        comp[w.index()] = count;
                        if w == v {
                            break;
                        }
                    }
                    count += 1;
                }
            }
        }
    }
    Components { comp, count }
}

pub fn component_ids(g: &Digraph) -> Components {
    component_ids_filtered(g, |_, _| true)
}

/// Partition of the live vertices into strongly connected components. Each
/// block is sorted and blocks are ordered by their smallest member.
pub fn strongly_connected_components(g: &Digraph) -> Vec<Vec<VertexId>> {
    let comps = component_ids(g);
    let mut blocks: Vec<Vec<VertexId>> = vec![Vec::new(); comps.count];
    for v in g.vertices() {
        blocks[comps.of(v)].push(v);
    }
    blocks.sort_by_key(|b| b[0]);
    blocks
}

/// Whether `to` is reachable from `from` along arcs accepted by `keep`,
/// entering no vertex for which `blocked` holds (endpoints excepted).
pub fn reaches_avoiding<K, B>(g: &Digraph, from: VertexId, to: VertexId, keep: K, blocked: B) -> bool
where
    K: Fn(VertexId, VertexId) -> bool,
    B: Fn(VertexId) -> bool,
{
    if from == to {
        return true;
    }
    let mut seen = vec![false; g.index_bound()];
    let mut queue = VecDeque::from([from]);
    seen[from.index()] = true;
    while let Some(x) = queue.pop_front() {
        for &y in g.out_neighbors(x) {
            if seen[y.index()] || !keep(x, y) {
                continue;
            }
            if y == to {
                return true;
            }
            if blocked(y) {
                continue;
            }
            seen[y.index()] = true;
            queue.push_back(y);
        }
    }
    false
}

pub fn reaches(g: &Digraph, from: VertexId, to: VertexId) -> bool {
    reaches_avoiding(g, from, to, |_, _| true, |_| false)
}

/// True iff no circuit of `g` visits the arc. A self-loop is a circuit.
pub fn arc_is_acyclic(g: &Digraph, arc: Arc) -> Result<bool, GraphError> {
    g.check_arc(arc)?;
    let (u, v) = arc;
    if u == v {
        return Ok(false);
    }
    Ok(!reaches(g, v, u))
}

/// True iff the graph has no circuit (self-loops included).
pub fn is_acyclic(g: &Digraph) -> bool {
    let bound = g.index_bound();
    let mut indeg = vec![0usize; bound];
    let mut queue = Vec::new();
    for v in g.vertices() {
        indeg[v.index()] = g.in_degree(v);
        if indeg[v.index()] == 0 {
            queue.push(v);
        }
    }
    let mut removed = 0;
    while let Some(v) = queue.pop() {
        removed += 1;
        for &w in g.out_neighbors(v) {
            indeg[w.index()] -= 1;
            if indeg[w.index()] == 0 {
                queue.push(w);
            }
        }
    }
    removed == g.vertex_count()
}
