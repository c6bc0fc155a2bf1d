//! Deterministic replay of an application log, and the checks built on it.

use thiserror::Error;

use super::predicates::{dome, in_clique, one_way, out_clique, subset};
use super::{apply, Action, LogEvent, PriorityMap, ReductionError, ReductionKind, Target};
use crate::graph::{Digraph, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("event {index}: {source}")]
    Invalid { index: usize, source: ReductionError },
    #[error("event {index}: {kind} does not apply at {target:?}")]
    NotApplicable { index: usize, kind: ReductionKind, target: Target },
    #[error("event {index}: vertex {vertex} is not isolated")]
    NotIsolated { index: usize, vertex: VertexId },
    #[error("event {index}: (|V|, |A|) did not decrease")]
    NotDecreasing { index: usize },
    #[error("sweep {sweep} at priority {level} started while {kind} still applied")]
    PriorityViolation { sweep: usize, level: u32, kind: ReductionKind },
}

/// Re-applies every logged event to a copy of `initial`, checking that each
/// one was applicable and strictly shrank `(|V|, |A|)`.
pub fn replay(initial: &Digraph, log: &[LogEvent]) -> Result<Digraph, ReplayError> {
    replay_with(initial, log, |_, _| Ok(()))
}

fn replay_with<F>(initial: &Digraph, log: &[LogEvent], mut before: F) -> Result<Digraph, ReplayError>
where
    F: FnMut(&Digraph, usize) -> Result<(), ReplayError>,
{
    let mut g = initial.clone();
    for (index, event) in log.iter().enumerate() {
        before(&g, index)?;
        let size = (g.vertex_count(), g.arc_count());
        match event.action {
            Action::Applied { kind, target } => {
                match apply(kind, &mut g, target) {
                    Ok(Some(_)) => {}
                    Ok(None) => return Err(ReplayError::NotApplicable { index, kind, target }),
                    Err(source) => return Err(ReplayError::Invalid { index, source }),
                }
            }
            Action::Isolated(v) => {
                if !g.contains_vertex(v) || g.in_degree(v) + g.out_degree(v) > 0 {
                    return Err(ReplayError::NotIsolated { index, vertex: v });
                }
                g.remove_vertex(v).expect("checked live");
            }
        }
        if (g.vertex_count(), g.arc_count()) >= size {
            return Err(ReplayError::NotDecreasing { index });
        }
    }
    Ok(g)
}

/// The first reduction kind among `kinds` that still applies somewhere in `g`.
pub fn applicable_kind(g: &Digraph, kinds: impl IntoIterator<Item = ReductionKind>) -> Option<ReductionKind> {
    kinds.into_iter().find(|&k| applies_somewhere(g, k))
}

/// True when no reduction of `kinds` applies anywhere in `g`.
pub fn is_irreducible(g: &Digraph, kinds: impl IntoIterator<Item = ReductionKind>) -> bool {
    applicable_kind(g, kinds).is_none()
}

fn applies_somewhere(g: &Digraph, kind: ReductionKind) -> bool {
    match kind {
        ReductionKind::Loop => g.vertices().any(|u| g.has_loop(u)),
        ReductionKind::InClique => g.vertices().any(|u| in_clique(g, u)),
        ReductionKind::OutClique => g.vertices().any(|u| out_clique(g, u)),
        ReductionKind::Subset => g
            .vertices()
            .any(|u| g.bidirectional_neighbors(u).any(|v| subset(g, u, v))),
        // linear-time route, independent of both the per-arc search and the
        // engine's Tarjan pass
        ReductionKind::Pie => {
            let comp = kosaraju_one_way(g);
            g.arcs().any(|(u, v)| u != v && one_way(g, u, v) && comp[u.index()] != comp[v.index()])
        }
        ReductionKind::DomePlusPlus => g.arcs().any(|(u, v)| u != v && one_way(g, u, v) && dome(g, (u, v))),
    }
}

/// Kosaraju component labels of `G - A↔`, indexed by vertex index.
fn kosaraju_one_way(g: &Digraph) -> Vec<usize> {
    let bound = g.index_bound();
    let mut visited = vec![false; bound];
    let mut finish: Vec<VertexId> = Vec::with_capacity(g.vertex_count());
    for root in g.vertices() {
        if visited[root.index()] {
            continue;
        }
        visited[root.index()] = true;
        let mut stack = vec![(root, g.out_neighbors(root).iter())];
        while let Some((v, succ)) = stack.last_mut() {
            let v = *v;
            match succ.find(|&&w| one_way(g, v, w) && !visited[w.index()]) {
                Some(&w) => {
                    visited[w.index()] = true;
                    stack.push((w, g.out_neighbors(w).iter()));
                }
                None => {
                    finish.push(v);
                    stack.pop();
                }
            }
        }
    }
    let mut comp = vec![usize::MAX; bound];
    for (label, &root) in finish.iter().rev().enumerate() {
        if comp[root.index()] != usize::MAX {
            continue;
        }
        comp[root.index()] = label;
        let mut todo = vec![root];
        while let Some(v) = todo.pop() {
            for &w in g.in_neighbors(v) {
                if comp[w.index()] == usize::MAX && one_way(g, w, v) {
                    comp[w.index()] = label;
                    todo.push(w);
                }
            }
        }
    }
    comp
}

/// Replays `log` and checks that every sweep of priority `p` began only once
/// no reduction of smaller priority applied.
pub fn check_priority_compliance(initial: &Digraph, log: &[LogEvent], rho: &PriorityMap) -> Result<(), ReplayError> {
    let mut last_sweep = None;
    replay_with(initial, log, |g, index| {
        let event = &log[index];
        if last_sweep == Some(event.sweep) {
            return Ok(());
        }
        last_sweep = Some(event.sweep);
        let lower = rho.kinds().filter(|&k| rho.get(k).is_some_and(|p| p < event.level));
        match applicable_kind(g, lower) {
            Some(kind) => Err(ReplayError::PriorityViolation { sweep: event.sweep, level: event.level, kind }),
            None => Ok(()),
        }
    })
    .map(|_| ())
}
