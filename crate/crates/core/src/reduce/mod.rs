//! MFVS-preserving digraph reductions and the priority scheduler that runs
//! them to an irreducible graph.
//!
//! Six pointed reductions are provided. `Loop` and `Subset` delete a vertex
//! and commit it to the partial solution; `InClique` and `OutClique` contract
//! a vertex (it is excluded from the solution); `Pie` and `Dome++` delete a
//! single non-bidirectional arc.

mod engine;
mod predicates;
mod replay;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Arc, Digraph, GraphError, VertexId};

pub use engine::{reduce, sweep, Reducer, VisitOrder};
pub use predicates::{pred_dome, pred_in, pred_loop, pred_out, pred_pie, pred_subset};
pub use replay::{applicable_kind, check_priority_compliance, is_irreducible, replay, ReplayError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("arc ({0}, {1}) is bidirectional; arc reductions only apply outside A↔")]
    BidirectionalArc(VertexId, VertexId),
    #[error("{kind} expects a {expected} target")]
    WrongTarget { kind: ReductionKind, expected: &'static str },
    #[error("subset needs two distinct vertices, got {0} twice")]
    SameVertex(VertexId),
    #[error("no priority given for {0}")]
    MissingPriority(ReductionKind),
    #[error("priorities must be positive ({0} has 0)")]
    ZeroPriority(ReductionKind),
    #[error("unknown reduction {0:?}")]
    UnknownKind(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionKind {
    Loop,
    Subset,
    InClique,
    OutClique,
    Pie,
    #[serde(rename = "dome")]
    DomePlusPlus,
}

impl ReductionKind {
    pub const ALL: [ReductionKind; 6] = [
        ReductionKind::Loop,
        ReductionKind::Subset,
        ReductionKind::InClique,
        ReductionKind::OutClique,
        ReductionKind::Pie,
        ReductionKind::DomePlusPlus,
    ];

    /// The confluent set `{Loop, Subset, InClique, OutClique, Pie}`.
    pub const CONFLUENT: [ReductionKind; 5] = [
        ReductionKind::Loop,
        ReductionKind::Subset,
        ReductionKind::InClique,
        ReductionKind::OutClique,
        ReductionKind::Pie,
    ];

    /// Snake-case key used in trace JSON.
    pub fn key(self) -> &'static str {
        match self {
            ReductionKind::Loop => "loop",
            ReductionKind::Subset => "subset",
            ReductionKind::InClique => "in_clique",
            ReductionKind::OutClique => "out_clique",
            ReductionKind::Pie => "pie",
            ReductionKind::DomePlusPlus => "dome",
        }
    }

    pub fn acts_on_arcs(self) -> bool {
        matches!(self, ReductionKind::Pie | ReductionKind::DomePlusPlus)
    }
}

impl fmt::Display for ReductionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ReductionKind::Loop => "Loop",
            ReductionKind::Subset => "Subset",
            ReductionKind::InClique => "InClique",
            ReductionKind::OutClique => "OutClique",
            ReductionKind::Pie => "Pie",
            ReductionKind::DomePlusPlus => "Dome++",
        };
        f.write_str(name)
    }
}

impl FromStr for ReductionKind {
    type Err = ReductionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_lowercase().replace(['-', '_'], "");
        Ok(match norm.as_str() {
            "loop" => ReductionKind::Loop,
            "subset" => ReductionKind::Subset,
            "inclique" | "in" => ReductionKind::InClique,
            "outclique" | "out" => ReductionKind::OutClique,
            "pie" => ReductionKind::Pie,
            "dome" | "dome++" | "domeplusplus" => ReductionKind::DomePlusPlus,
            _ => return Err(ReductionError::UnknownKind(s.to_owned())),
        })
    }
}

/// What a pointed reduction is aimed at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Target {
    Vertex(VertexId),
    /// `(u, v)` for `Subset(G, u, v)`; `u` is the vertex removed.
    Pair(VertexId, VertexId),
    Arc(VertexId, VertexId),
}

impl Target {
    pub fn vertices(self) -> Vec<VertexId> {
        match self {
            Target::Vertex(u) => vec![u],
            Target::Pair(u, v) | Target::Arc(u, v) => vec![u, v],
        }
    }
}

/// Priority per reduction kind; the smaller the value the earlier it runs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PriorityMap(BTreeMap<ReductionKind, u32>);

impl PriorityMap {
    pub fn new<I: IntoIterator<Item = (ReductionKind, u32)>>(entries: I) -> Result<Self, ReductionError> {
        let map: BTreeMap<_, _> = entries.into_iter().collect();
        if let Some((&k, _)) = map.iter().find(|(_, &p)| p == 0) {
            return Err(ReductionError::ZeroPriority(k));
        }
        Ok(Self(map))
    }

    /// `ρ_c`: Loop, Subset, InClique and OutClique at 1, Pie at 2.
    pub fn confluent() -> Self {
        Self(BTreeMap::from([
            (ReductionKind::Loop, 1),
            (ReductionKind::Subset, 1),
            (ReductionKind::InClique, 1),
            (ReductionKind::OutClique, 1),
            (ReductionKind::Pie, 2),
        ]))
    }

    /// `ρ_nc`: `ρ_c` plus Dome++ at 3.
    pub fn nonconfluent() -> Self {
        let mut m = Self::confluent();
        m.0.insert(ReductionKind::DomePlusPlus, 3);
        m
    }

    pub fn get(&self, kind: ReductionKind) -> Option<u32> {
        self.0.get(&kind).copied()
    }

    pub fn kinds(&self) -> impl Iterator<Item = ReductionKind> + '_ {
        self.0.keys().copied()
    }

    /// Restriction to `kinds`; every kind must have a priority.
    pub fn restricted(&self, kinds: &BTreeSet<ReductionKind>) -> Result<Self, ReductionError> {
        let mut out = BTreeMap::new();
        for &k in kinds {
            let p = self.get(k).ok_or(ReductionError::MissingPriority(k))?;
            out.insert(k, p);
        }
        Ok(Self(out))
    }

    /// Kinds grouped by priority, ascending.
    pub(crate) fn levels(&self) -> Vec<(u32, Vec<ReductionKind>)> {
        let mut levels: BTreeMap<u32, Vec<ReductionKind>> = BTreeMap::new();
        for (&k, &p) in &self.0 {
            levels.entry(p).or_default().push(k);
        }
        levels.into_iter().collect()
    }
}

/// Outcome of one successful pointed reduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceDelta {
    pub kind: ReductionKind,
    pub target: Target,
    /// Vertex committed to the partial MFVS, if any.
    pub included: Option<VertexId>,
    /// Vertex deleted without entering the solution (contractions).
    pub excluded: Option<VertexId>,
    pub removed_arc: Option<Arc>,
    pub created_arcs: Vec<Arc>,
}

/// One entry of the application log.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogEvent {
    /// Sequence number of the sweep that produced the event.
    pub sweep: usize,
    /// Priority of the sweep's reduction kind.
    pub level: u32,
    pub action: Action,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Action {
    Applied { kind: ReductionKind, target: Target },
    /// Vertex left without incident arcs by an arc reduction and trimmed.
    Isolated(VertexId),
}

/// Partial solution and per-kind accounting of a reduction run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReductionTrace {
    pub initial_vertices: usize,
    pub initial_arcs: usize,
    /// Partial MFVS `U`.
    pub included: BTreeSet<VertexId>,
    /// Removed vertices that are not in `U` (contracted or trimmed).
    pub excluded: BTreeSet<VertexId>,
    pub counts: BTreeMap<ReductionKind, usize>,
    pub isolated: usize,
    pub remaining_vertices: usize,
    pub remaining_arcs: usize,
    /// Arcs created by contractions over the run.
    pub created_arcs: usize,
    pub log: Vec<LogEvent>,
}

impl ReductionTrace {
    pub(crate) fn start(g: &Digraph) -> Self {
        Self {
            initial_vertices: g.vertex_count(),
            initial_arcs: g.arc_count(),
            remaining_vertices: g.vertex_count(),
            remaining_arcs: g.arc_count(),
            ..Self::default()
        }
    }

    pub fn count(&self, kind: ReductionKind) -> usize {
        self.counts.get(&kind).copied().unwrap_or(0)
    }

    pub fn reductions_total(&self) -> usize {
        self.counts.values().sum()
    }

    pub(crate) fn record(&mut self, delta: &TraceDelta, sweep: usize, level: u32) {
        *self.counts.entry(delta.kind).or_default() += 1;
        if let Some(u) = delta.included {
            self.included.insert(u);
        }
        if let Some(u) = delta.excluded {
            self.excluded.insert(u);
        }
        self.created_arcs += delta.created_arcs.len();
        self.log.push(LogEvent {
            sweep,
            level,
            action: Action::Applied { kind: delta.kind, target: delta.target },
        });
    }

    /// Appends a later run on the output graph of this one; counts add up.
    pub fn merge(&mut self, later: &ReductionTrace) {
        self.included.extend(later.included.iter().copied());
        self.excluded.extend(later.excluded.iter().copied());
        for (&k, &c) in &later.counts {
            *self.counts.entry(k).or_default() += c;
        }
        self.isolated += later.isolated;
        self.created_arcs += later.created_arcs;
        self.remaining_vertices = later.remaining_vertices;
        self.remaining_arcs = later.remaining_arcs;
        let offset = self.log.last().map_or(0, |e| e.sweep + 1);
        self.log.extend(later.log.iter().map(|e| LogEvent { sweep: e.sweep + offset, ..e.clone() }));
    }

    pub fn summary(&self) -> TraceSummary {
        TraceSummary {
            remaining_vertices: self.remaining_vertices,
            included: self.included.len(),
            excluded: self.excluded.len(),
            reductions_total: self.reductions_total(),
            loop_: self.count(ReductionKind::Loop),
            subset: self.count(ReductionKind::Subset),
            in_clique: self.count(ReductionKind::InClique),
            out_clique: self.count(ReductionKind::OutClique),
            pie: self.count(ReductionKind::Pie),
            dome: self.count(ReductionKind::DomePlusPlus),
            isolated: self.isolated,
        }
    }
}

/// Flat counters mirroring the rows of a reductions table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub remaining_vertices: usize,
    pub included: usize,
    pub excluded: usize,
    pub reductions_total: usize,
    #[serde(rename = "loop")]
    pub loop_: usize,
    pub subset: usize,
    pub in_clique: usize,
    pub out_clique: usize,
    pub pie: usize,
    pub dome: usize,
    pub isolated: usize,
}

/// Applies one pointed reduction. Returns `None`, leaving `g` untouched, when
/// the reduction's predicate does not hold at `target`.
pub fn apply(kind: ReductionKind, g: &mut Digraph, target: Target) -> Result<Option<TraceDelta>, ReductionError> {
    let holds = match (kind, target) {
        (ReductionKind::Loop, Target::Vertex(u)) => pred_loop(g, u)?,
        (ReductionKind::InClique, Target::Vertex(u)) => pred_in(g, u)?,
        (ReductionKind::OutClique, Target::Vertex(u)) => pred_out(g, u)?,
        (ReductionKind::Subset, Target::Pair(u, v)) => pred_subset(g, u, v)?,
        (ReductionKind::Pie, Target::Arc(u, v)) => pred_pie(g, (u, v))?,
        (ReductionKind::DomePlusPlus, Target::Arc(u, v)) => pred_dome(g, (u, v))?,
        (k, _) => {
            let expected = match k {
                ReductionKind::Subset => "vertex pair",
                ReductionKind::Pie | ReductionKind::DomePlusPlus => "arc",
                _ => "vertex",
            };
            return Err(ReductionError::WrongTarget { kind: k, expected });
        }
    };
    if !holds {
        return Ok(None);
    }
    Ok(Some(apply_unchecked(kind, g, target)))
}

/// Every target at which `kind` currently applies, in ascending order.
pub fn applicable_targets(kind: ReductionKind, g: &Digraph) -> Vec<Target> {
    match kind {
        ReductionKind::Loop => g.vertices().filter(|&u| g.has_loop(u)).map(Target::Vertex).collect(),
        ReductionKind::InClique => g.vertices().filter(|&u| predicates::in_clique(g, u)).map(Target::Vertex).collect(),
        ReductionKind::OutClique => g.vertices().filter(|&u| predicates::out_clique(g, u)).map(Target::Vertex).collect(),
        ReductionKind::Subset => g
            .vertices()
            .flat_map(|u| g.bidirectional_neighbors(u).filter(move |&v| predicates::subset(g, u, v)).map(move |v| Target::Pair(u, v)))
            .collect(),
        ReductionKind::Pie => g.arcs().filter(|&(u, v)| !g.has_arc(v, u) && predicates::pie(g, (u, v))).map(|(u, v)| Target::Arc(u, v)).collect(),
        ReductionKind::DomePlusPlus => g.arcs().filter(|&(u, v)| !g.has_arc(v, u) && predicates::dome(g, (u, v))).map(|(u, v)| Target::Arc(u, v)).collect(),
    }
}

/// Performs the transformation of `kind` at `target` without re-testing the
/// predicate.
pub(crate) fn apply_unchecked(kind: ReductionKind, g: &mut Digraph, target: Target) -> TraceDelta {
    let mut delta = TraceDelta {
        kind,
        target,
        included: None,
        excluded: None,
        removed_arc: None,
        created_arcs: Vec::new(),
    };
    match (kind, target) {
        (ReductionKind::Loop, Target::Vertex(u)) | (ReductionKind::Subset, Target::Pair(u, _)) => {
            g.remove_vertex(u).expect("target checked live");
            delta.included = Some(u);
        }
        (ReductionKind::InClique | ReductionKind::OutClique, Target::Vertex(u)) => {
            delta.created_arcs = g.contract(u).expect("target checked live");
            delta.excluded = Some(u);
        }
        (ReductionKind::Pie | ReductionKind::DomePlusPlus, Target::Arc(u, v)) => {
            g.remove_arc(u, v).expect("target checked live");
            delta.removed_arc = Some((u, v));
        }
        _ => unreachable!("target shape checked by caller"),
    }
    delta
}
