use crate::graph::{Arc, Digraph, VertexId};
use crate::scc::reaches_avoiding;

use super::ReductionError;

/// `ℓ(G, u)`: `u` carries a self-loop.
pub fn pred_loop(g: &Digraph, u: VertexId) -> Result<bool, ReductionError> {
    g.check_vertex(u)?;
    Ok(g.has_loop(u))
}

/// `i(G, u)`: no self-loop on `u` and its in-neighborhood is a diclique.
pub fn pred_in(g: &Digraph, u: VertexId) -> Result<bool, ReductionError> {
    g.check_vertex(u)?;
    Ok(in_clique(g, u))
}

/// `o(G, u)`: no self-loop on `u` and its out-neighborhood is a diclique.
pub fn pred_out(g: &Digraph, u: VertexId) -> Result<bool, ReductionError> {
    g.check_vertex(u)?;
    Ok(out_clique(g, u))
}

/// `s(G, u, v)`: `v` has no self-loop, `u` and `v` are joined both ways, and
/// the in- and out-neighborhoods of `v` are contained in those of `u`, both
/// sides taken without `u` and `v`.
pub fn pred_subset(g: &Digraph, u: VertexId, v: VertexId) -> Result<bool, ReductionError> {
    g.check_vertex(u)?;
    g.check_vertex(v)?;
    if u == v {
        return Err(ReductionError::SameVertex(u));
    }
    Ok(subset(g, u, v))
}

/// `p(G, u, v)`: the arc lies on no circuit of `G - A↔(G)`.
pub fn pred_pie(g: &Digraph, arc: Arc) -> Result<bool, ReductionError> {
    check_one_way(g, arc)?;
    Ok(pie(g, arc))
}

/// `d(G, u, v)`: every `vu`-path of `G - A↔(G)` has an interior vertex in
/// `N⁻(v) ∪ N⁺(u)`, neighborhoods taken in `G - A↔(G)`. Holds vacuously when
/// there is no `vu`-path.
pub fn pred_dome(g: &Digraph, arc: Arc) -> Result<bool, ReductionError> {
    check_one_way(g, arc)?;
    Ok(dome(g, arc))
}

fn check_one_way(g: &Digraph, (u, v): Arc) -> Result<(), ReductionError> {
    g.check_arc((u, v))?;
    if g.has_arc(v, u) {
        return Err(ReductionError::BidirectionalArc(u, v));
    }
    Ok(())
}

pub(crate) fn in_clique(g: &Digraph, u: VertexId) -> bool {
    if g.has_loop(u) {
        return false;
    }
    let preds: Vec<VertexId> = g.in_neighbors(u).iter().copied().collect();
    g.is_diclique_unchecked(&preds)
}

pub(crate) fn out_clique(g: &Digraph, u: VertexId) -> bool {
    if g.has_loop(u) {
        return false;
    }
    let succs: Vec<VertexId> = g.out_neighbors(u).iter().copied().collect();
    g.is_diclique_unchecked(&succs)
}

pub(crate) fn subset(g: &Digraph, u: VertexId, v: VertexId) -> bool {
    if u == v || g.has_loop(v) || !g.is_bidirectional(u, v) {
        return false;
    }
    let contained = |small: &std::collections::BTreeSet<VertexId>, big: &std::collections::BTreeSet<VertexId>| {
        small.iter().all(|&x| x == u || x == v || big.contains(&x))
    };
    contained(g.in_neighbors(v), g.in_neighbors(u)) && contained(g.out_neighbors(v), g.out_neighbors(u))
}

/// Arc of `G - A↔`: present and its reverse absent.
#[inline]
pub(crate) fn one_way(g: &Digraph, x: VertexId, y: VertexId) -> bool {
    !g.has_arc(y, x)
}

pub(crate) fn pie(g: &Digraph, (u, v): Arc) -> bool {
    !reaches_avoiding(g, v, u, |x, y| one_way(g, x, y), |_| false)
}

pub(crate) fn dome(g: &Digraph, (u, v): Arc) -> bool {
    let blocked = |y: VertexId| {
        y != u
            && y != v
            && ((g.has_arc(y, v) && !g.has_arc(v, y)) || (g.has_arc(u, y) && !g.has_arc(y, u)))
    };
    !reaches_avoiding(g, v, u, |x, y| one_way(g, x, y), blocked)
}
