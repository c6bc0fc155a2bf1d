//! Labeled digraph with self-loops and the vertex/arc removal and
//! contraction operations used by the reduction engine.
//!
//! Vertex indices are dense and never renumbered: removing a vertex leaves a
//! tombstone so that traces name the same vertex across a whole run. All
//! enumeration is in ascending index order.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense vertex index, stable for the lifetime of a [`Digraph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// An ordered pair `(tail, head)`.
pub type Arc = (VertexId, VertexId);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("unknown vertex label {0:?}")]
    UnknownLabel(String),
    #[error("unknown arc ({0}, {1})")]
    UnknownArc(VertexId, VertexId),
    #[error("vertex labels must be non-empty")]
    EmptyLabel,
}

/// Labeled directed graph. Arcs form a set; self-loops are allowed.
#[derive(Clone, Default)]
pub struct Digraph {
    labels: Vec<String>,
    lookup: HashMap<String, VertexId>,
    alive: Vec<bool>,
    succ: Vec<BTreeSet<VertexId>>,
    pred: Vec<BTreeSet<VertexId>>,
    vertex_count: usize,
    arc_count: usize,
}

impl fmt::Debug for Digraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arcs: Vec<_> = self
            .arcs()
            .map(|(u, v)| format!("{}->{}", self.label(u), self.label(v)))
            .collect();
        f.debug_struct("Digraph")
            .field("vertices", &self.vertices().map(|v| self.label(v)).collect::<Vec<_>>())
            .field("arcs", &arcs)
            .finish()
    }
}

impl Digraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a graph from labeled arcs, interning labels in first-seen order.
    pub fn from_labeled_arcs<'a, I>(arcs: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut g = Self::new();
        for (u, v) in arcs {
            let u = g.add_vertex(u);
            let v = g.add_vertex(v);
            g.add_arc(u, v);
        }
        g
    }

    /// Graph on vertices `0..n` labeled `v0, v1, ...` with the given index arcs.
    pub fn from_index_arcs(n: usize, arcs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = Self::new();
        for i in 0..n {
            g.add_vertex(&format!("v{i}"));
        }
        for (u, v) in arcs {
            g.add_arc(VertexId(u as u32), VertexId(v as u32));
        }
        g
    }

    /// Interns `label`, reviving a tombstoned vertex of the same label.
    ///
    /// Panics on an empty label; use [`Digraph::try_add_vertex`] for input data.
    pub fn add_vertex(&mut self, label: &str) -> VertexId {
        self.try_add_vertex(label).expect("vertex labels must be non-empty")
    }

    pub fn try_add_vertex(&mut self, label: &str) -> Result<VertexId, GraphError> {
        if label.is_empty() {
            return Err(GraphError::EmptyLabel);
        }
        if let Some(&id) = self.lookup.get(label) {
            if !self.alive[id.index()] {
                self.alive[id.index()] = true;
                self.vertex_count += 1;
            }
            return Ok(id);
        }
        let id = VertexId(self.labels.len() as u32);
        self.labels.push(label.to_owned());
        self.lookup.insert(label.to_owned(), id);
        self.alive.push(true);
        self.succ.push(BTreeSet::new());
        self.pred.push(BTreeSet::new());
        self.vertex_count += 1;
        Ok(id)
    }

    /// Live vertex carrying `label`.
    pub fn vertex(&self, label: &str) -> Option<VertexId> {
        self.lookup.get(label).copied().filter(|v| self.alive[v.index()])
    }

    pub fn label(&self, v: VertexId) -> &str {
        &self.labels[v.index()]
    }

    /// Upper bound (exclusive) on vertex indices ever issued by this graph.
    pub fn index_bound(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.alive.get(v.index()).copied().unwrap_or(false)
    }

    pub fn has_arc(&self, u: VertexId, v: VertexId) -> bool {
        self.contains_vertex(u) && self.succ[u.index()].contains(&v)
    }

    #[inline]
    pub fn has_loop(&self, u: VertexId) -> bool {
        self.has_arc(u, u)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn arc_count(&self) -> usize {
        self.arc_count
    }

    pub fn is_empty(&self) -> bool {
        self.vertex_count == 0
    }

    /// Live vertices in ascending index order.
    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.alive
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(i, _)| VertexId(i as u32))
    }

    /// Arcs in ascending `(tail, head)` order.
    pub fn arcs(&self) -> impl Iterator<Item = Arc> + '_ {
        self.vertices()
            .flat_map(move |u| self.succ[u.index()].iter().map(move |&v| (u, v)))
    }

    pub fn out_neighbors(&self, u: VertexId) -> &BTreeSet<VertexId> {
        &self.succ[u.index()]
    }

    pub fn in_neighbors(&self, u: VertexId) -> &BTreeSet<VertexId> {
        &self.pred[u.index()]
    }

    pub fn out_degree(&self, u: VertexId) -> usize {
        self.succ[u.index()].len()
    }

    pub fn in_degree(&self, u: VertexId) -> usize {
        self.pred[u.index()].len()
    }

    pub(crate) fn check_vertex(&self, u: VertexId) -> Result<(), GraphError> {
        if self.contains_vertex(u) {
            Ok(())
        } else {
            Err(GraphError::UnknownVertex(u))
        }
    }

    pub(crate) fn check_arc(&self, (u, v): Arc) -> Result<(), GraphError> {
        if self.has_arc(u, v) {
            Ok(())
        } else {
            Err(GraphError::UnknownArc(u, v))
        }
    }

    /// Inserts `(u, v)`; returns false when the arc was already present.
    ///
    /// Panics if either endpoint is not a live vertex.
    pub fn add_arc(&mut self, u: VertexId, v: VertexId) -> bool {
        assert!(self.contains_vertex(u) && self.contains_vertex(v), "arc endpoint is not a vertex");
        if self.succ[u.index()].insert(v) {
            self.pred[v.index()].insert(u);
            self.arc_count += 1;
            true
        } else {
            false
        }
    }

    /// `G - (u,v)`.
    pub fn remove_arc(&mut self, u: VertexId, v: VertexId) -> Result<(), GraphError> {
        self.check_arc((u, v))?;
        self.succ[u.index()].remove(&v);
        self.pred[v.index()].remove(&u);
        self.arc_count -= 1;
        Ok(())
    }

    /// `G - u`: deletes `u` and every incident arc.
    pub fn remove_vertex(&mut self, u: VertexId) -> Result<(), GraphError> {
        self.check_vertex(u)?;
        let succ = std::mem::take(&mut self.succ[u.index()]);
        let pred = std::mem::take(&mut self.pred[u.index()]);
        for &v in &succ {
            if v != u {
                self.pred[v.index()].remove(&u);
            }
        }
        for &p in &pred {
            if p != u {
                self.succ[p.index()].remove(&u);
            }
        }
        let looped = succ.contains(&u);
        self.arc_count -= succ.len() + pred.len() - usize::from(looped);
        self.alive[u.index()] = false;
        self.vertex_count -= 1;
        Ok(())
    }

    /// `G ∘ u`: deletes `u` and joins every predecessor of `u` to every
    /// successor. Returns the arcs that were newly created.
    ///
    /// A predecessor that is also a successor receives a self-loop. If `u`
    /// itself carries a self-loop it takes no part in the product.
    pub fn contract(&mut self, u: VertexId) -> Result<Vec<Arc>, GraphError> {
        self.check_vertex(u)?;
        let preds: Vec<VertexId> = self.pred[u.index()].iter().copied().filter(|&p| p != u).collect();
        let succs: Vec<VertexId> = self.succ[u.index()].iter().copied().filter(|&s| s != u).collect();
        self.remove_vertex(u)?;
        let mut created = Vec::new();
        for &p in &preds {
            for &s in &succs {
                if self.add_arc(p, s) {
                    created.push((p, s));
                }
            }
        }
        Ok(created)
    }

    /// `G - U` for a vertex set.
    pub fn remove_vertices<I: IntoIterator<Item = VertexId>>(&mut self, set: I) -> Result<(), GraphError> {
        for u in set {
            self.remove_vertex(u)?;
        }
        Ok(())
    }

    /// Returns true iff `set` is a diclique: every ordered pair of distinct
    /// members is an arc and no member carries a self-loop.
    pub fn is_diclique<'a, I>(&self, set: I) -> Result<bool, GraphError>
    where
        I: IntoIterator<Item = &'a VertexId>,
    {
        let members: Vec<VertexId> = set.into_iter().copied().collect();
        for &u in &members {
            self.check_vertex(u)?;
        }
        Ok(self.is_diclique_unchecked(&members))
    }

    pub(crate) fn is_diclique_unchecked(&self, members: &[VertexId]) -> bool {
        let need = members.len().saturating_sub(1);
        for &u in members {
            if self.has_loop(u) || self.out_degree(u) < need || self.in_degree(u) < need {
                return false;
            }
        }
        for (i, &u) in members.iter().enumerate() {
            let out = &self.succ[u.index()];
            for (j, &v) in members.iter().enumerate() {
                if i != j && !out.contains(&v) {
                    return false;
                }
            }
        }
        true
    }

    /// Whether `(u,v)` is an arc whose reverse is also an arc. Self-loops
    /// count as bidirectional.
    #[inline]
    pub fn is_bidirectional(&self, u: VertexId, v: VertexId) -> bool {
        self.has_arc(u, v) && self.has_arc(v, u)
    }

    /// `A↔`: all arcs whose reverse is also present, self-loops included.
    pub fn bidirectional_arcs(&self) -> BTreeSet<Arc> {
        self.arcs().filter(|&(u, v)| self.has_arc(v, u)).collect()
    }

    /// Neighbors joined to `u` in both directions, excluding `u` itself.
    pub fn bidirectional_neighbors(&self, u: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        let (small, large) = if self.succ[u.index()].len() <= self.pred[u.index()].len() {
            (&self.succ[u.index()], &self.pred[u.index()])
        } else {
            (&self.pred[u.index()], &self.succ[u.index()])
        };
        small.iter().copied().filter(move |&v| v != u && large.contains(&v))
    }

    /// Sorted label set of the live vertices.
    pub fn label_set(&self) -> BTreeSet<String> {
        self.vertices().map(|v| self.label(v).to_owned()).collect()
    }

    /// Arcs as label pairs, sorted.
    pub fn labeled_arcs(&self) -> BTreeSet<(String, String)> {
        self.arcs()
            .map(|(u, v)| (self.label(u).to_owned(), self.label(v).to_owned()))
            .collect()
    }

    /// Copy of the live part of the graph with indices renumbered densely in
    /// ascending order of the old indices.
    pub fn compacted(&self) -> Digraph {
        let mut g = Digraph::new();
        for v in self.vertices() {
            g.add_vertex(self.label(v));
        }
        for (u, v) in self.arcs() {
            let u = g.vertex(self.label(u)).expect("interned above");
            let v = g.vertex(self.label(v)).expect("interned above");
            g.add_arc(u, v);
        }
        g
    }
}

/// Labeled structural equality: same live label set and same labeled arcs.
impl PartialEq for Digraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertex_count == other.vertex_count
            && self.arc_count == other.arc_count
            && self.label_set() == other.label_set()
            && self.labeled_arcs() == other.labeled_arcs()
    }
}

impl Eq for Digraph {}

/// Relation tags attached to arcs, keyed by endpoint labels so the same map
/// can describe arcs of the reduction graph and arcs kept only as a sidecar.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ArcAnnotations {
    tags: BTreeMap<(String, String), BTreeSet<String>>,
}

impl ArcAnnotations {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, tail: &str, head: &str, tag: &str) {
        self.tags
            .entry((tail.to_owned(), head.to_owned()))
            .or_default()
            .insert(tag.to_owned());
    }

    /// Registers an arc with no tag.
    pub fn touch(&mut self, tail: &str, head: &str) {
        self.tags.entry((tail.to_owned(), head.to_owned())).or_default();
    }

    pub fn tags(&self, tail: &str, head: &str) -> Option<&BTreeSet<String>> {
        self.tags.get(&(tail.to_owned(), head.to_owned()))
    }

    pub fn extend(&mut self, other: &ArcAnnotations) {
        for ((t, h), tags) in &other.tags {
            let entry = self.tags.entry((t.clone(), h.clone())).or_default();
            entry.extend(tags.iter().cloned());
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(String, String), &BTreeSet<String>)> {
        self.tags.iter()
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    /// Drops annotations whose arc is not present in `g`.
    pub fn retain_arcs_of(&mut self, g: &Digraph) {
        self.tags.retain(|(t, h), _| match (g.vertex(t), g.vertex(h)) {
            (Some(u), Some(v)) => g.has_arc(u, v),
            _ => false,
        });
    }
}
