//! Priority scheduler: nested fixed points over priority levels.
//!
//! At level `p` the engine repeatedly reduces to a fixed point at the levels
//! below `p` and then sweeps every kind of priority `p`, until a round of
//! level-`p` sweeps changes nothing.
//!
//! A sweep of a vertex kind behaves as repeated full passes over the live
//! vertices in ascending index order. Instead of re-testing every vertex on
//! each pass, the engine keeps, per kind, the set of vertices whose predicate
//! may have changed since it was last found false; a vertex dirtied ahead of
//! the cursor is visited later in the same pass and one dirtied behind it
//! waits for the next pass, so the visit sequence matches the full passes.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::predicates::{dome, in_clique, one_way, out_clique, subset};
use super::{apply_unchecked, Action, LogEvent, PriorityMap, ReductionError, ReductionKind, ReductionTrace, Target};
use crate::graph::{Arc, Digraph, VertexId};
use crate::scc::component_ids_filtered;

/// Order in which a sweep visits its targets.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum VisitOrder {
    /// Ascending vertex index, arcs by `(tail, head)`.
    #[default]
    Ascending,
    /// A fresh uniformly random permutation on every pass.
    Shuffled(u64),
}

/// Reduction configuration: which kinds run, at which priority, in which
/// visit order.
#[derive(Clone, Debug)]
pub struct Reducer {
    priorities: PriorityMap,
    order: VisitOrder,
    trim_isolated: bool,
}

impl Reducer {
    pub fn new(priorities: PriorityMap) -> Self {
        Self { priorities, order: VisitOrder::Ascending, trim_isolated: true }
    }

    /// `(R_c, ρ_c)`.
    pub fn confluent() -> Self {
        Self::new(PriorityMap::confluent())
    }

    /// `(R_nc, ρ_nc)`.
    pub fn nonconfluent() -> Self {
        Self::new(PriorityMap::nonconfluent())
    }

    pub fn order(mut self, order: VisitOrder) -> Self {
        self.order = order;
        self
    }

    pub fn priorities(&self) -> &PriorityMap {
        &self.priorities
    }

    /// Reduces `g` to an irreducible graph.
    pub fn run(&self, g: Digraph) -> (Digraph, ReductionTrace) {
        let mut engine = Engine::new(g, self.priorities.levels(), self.order, self.trim_isolated);
        let top = engine.levels.len();
        if top > 0 {
            engine.run_level(top - 1);
        }
        engine.finish()
    }
}

/// Reduces `g` with the reductions in `kinds`, scheduled by `rho`.
pub fn reduce(
    g: Digraph,
    kinds: &BTreeSet<ReductionKind>,
    rho: &PriorityMap,
) -> Result<(Digraph, ReductionTrace), ReductionError> {
    let priorities = rho.restricted(kinds)?;
    Ok(Reducer::new(priorities).run(g))
}

/// Applies `kind` over all targets until a full pass changes nothing.
/// Vertices left isolated by arc reductions are kept.
pub fn sweep(kind: ReductionKind, g: Digraph) -> (Digraph, ReductionTrace) {
    let mut engine = Engine::new(g, vec![(1, vec![kind])], VisitOrder::Ascending, false);
    engine.sweep(kind, 1);
    engine.finish()
}

const VERTEX_KINDS: [ReductionKind; 4] = [
    ReductionKind::Loop,
    ReductionKind::Subset,
    ReductionKind::InClique,
    ReductionKind::OutClique,
];

fn slot(kind: ReductionKind) -> Option<usize> {
    VERTEX_KINDS.iter().position(|&k| k == kind)
}

struct Engine {
    g: Digraph,
    levels: Vec<(u32, Vec<ReductionKind>)>,
    active: [bool; 4],
    order: VisitOrder,
    rng: ChaCha8Rng,
    trim_isolated: bool,
    pending: [BTreeSet<VertexId>; 4],
    /// Kind slot currently sweeping and its cursor.
    running: Option<(usize, VertexId)>,
    pass_current: BTreeSet<VertexId>,
    pass_next: BTreeSet<VertexId>,
    version: u64,
    clean_at: [Option<u64>; 2],
    sweep_id: usize,
    /// Endpoints of arcs removed by the current arc sweep.
    touched_by_arcs: BTreeSet<VertexId>,
    trace: ReductionTrace,
}

impl Engine {
    fn new(g: Digraph, levels: Vec<(u32, Vec<ReductionKind>)>, order: VisitOrder, trim_isolated: bool) -> Self {
        let mut active = [false; 4];
        for (_, kinds) in &levels {
            for &k in kinds {
                if let Some(i) = slot(k) {
                    active[i] = true;
                }
            }
        }
        let all: BTreeSet<VertexId> = g.vertices().collect();
        let pending = std::array::from_fn(|i| if active[i] { all.clone() } else { BTreeSet::new() });
        let seed = match order {
            VisitOrder::Shuffled(s) => s,
            VisitOrder::Ascending => 0,
        };
        Self {
            trace: ReductionTrace::start(&g),
            g,
            levels,
            active,
            order,
            rng: ChaCha8Rng::seed_from_u64(seed),
            trim_isolated,
            pending,
            running: None,
            pass_current: BTreeSet::new(),
            pass_next: BTreeSet::new(),
            version: 0,
            clean_at: [None; 2],
            sweep_id: 0,
            touched_by_arcs: BTreeSet::new(),
        }
    }

    fn finish(mut self) -> (Digraph, ReductionTrace) {
        self.trace.remaining_vertices = self.g.vertex_count();
        self.trace.remaining_arcs = self.g.arc_count();
        (self.g, self.trace)
    }

    /// Returns whether anything changed.
    fn run_level(&mut self, li: usize) -> bool {
        let (level, kinds) = self.levels[li].clone();
        let mut any = false;
        loop {
            if li > 0 {
                any |= self.run_level(li - 1);
            }
            let mut here = false;
            for &kind in &kinds {
                here |= self.sweep(kind, level);
            }
            any |= here;
            if !here {
                return any;
            }
        }
    }

    fn sweep(&mut self, kind: ReductionKind, level: u32) -> bool {
        self.sweep_id += 1;
        match kind {
            ReductionKind::Pie => self.sweep_pie(level),
            ReductionKind::DomePlusPlus => self.sweep_dome(level),
            _ => self.sweep_vertices(kind, level),
        }
    }

    // ----- vertex kinds -------------------------------------------------

    fn sweep_vertices(&mut self, kind: ReductionKind, level: u32) -> bool {
        let k = slot(kind).expect("vertex kind");
        let mut changed = false;
        self.pass_current = std::mem::take(&mut self.pending[k]);
        self.pass_next.clear();
        while !self.pass_current.is_empty() {
            match self.order {
                VisitOrder::Ascending => {
                    while let Some(u) = self.pass_current.pop_first() {
                        self.running = Some((k, u));
                        changed |= self.try_vertex(kind, u, level);
                    }
                }
                VisitOrder::Shuffled(_) => {
                    let mut batch: Vec<VertexId> = std::mem::take(&mut self.pass_current).into_iter().collect();
                    batch.shuffle(&mut self.rng);
                    for u in batch {
                        // everything dirtied during a shuffled pass waits for the next one
                        self.running = Some((k, VertexId(u32::MAX)));
                        changed |= self.try_vertex(kind, u, level);
                    }
                }
            }
            self.pass_current = std::mem::take(&mut self.pass_next);
        }
        self.running = None;
        changed
    }

    fn try_vertex(&mut self, kind: ReductionKind, u: VertexId, level: u32) -> bool {
        if !self.g.contains_vertex(u) {
            return false;
        }
        let target = match kind {
            ReductionKind::Loop => self.g.has_loop(u).then_some(Target::Vertex(u)),
            ReductionKind::InClique => in_clique(&self.g, u).then_some(Target::Vertex(u)),
            ReductionKind::OutClique => out_clique(&self.g, u).then_some(Target::Vertex(u)),
            ReductionKind::Subset => {
                let mut partners: Vec<VertexId> = self.g.bidirectional_neighbors(u).collect();
                if let VisitOrder::Shuffled(_) = self.order {
                    partners.shuffle(&mut self.rng);
                }
                partners.into_iter().find(|&v| subset(&self.g, u, v)).map(|v| Target::Pair(u, v))
            }
            _ => unreachable!(),
        };
        let Some(target) = target else { return false };
        let neighbors: Vec<VertexId> = self
            .g
            .in_neighbors(u)
            .iter()
            .chain(self.g.out_neighbors(u))
            .copied()
            .filter(|&x| x != u)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let delta = apply_unchecked(kind, &mut self.g, target);
        self.version += 1;
        for &z in &neighbors {
            self.touch(z);
        }
        for &(p, s) in &delta.created_arcs {
            self.mark_arc_change(p, s);
        }
        self.trace.record(&delta, self.sweep_id, level);
        true
    }

    // ----- dirty tracking -----------------------------------------------

    fn mark(&mut self, v: VertexId) {
        for i in 0..4 {
            if !self.active[i] {
                continue;
            }
            match self.running {
                Some((k, cursor)) if k == i => {
                    if v > cursor && matches!(self.order, VisitOrder::Ascending) {
                        self.pass_current.insert(v);
                    } else {
                        self.pass_next.insert(v);
                    }
                }
                _ => {
                    self.pending[i].insert(v);
                }
            }
        }
    }

    /// `v`'s own neighborhood changed: its predicates and every Subset pair
    /// it belongs to must be re-tested.
    fn touch(&mut self, v: VertexId) {
        if !self.g.contains_vertex(v) {
            return;
        }
        self.mark(v);
        let bi: Vec<VertexId> = self.g.bidirectional_neighbors(v).collect();
        for w in bi {
            self.mark(w);
        }
    }

    /// Arc `(x, y)` appeared or disappeared.
    fn mark_arc_change(&mut self, x: VertexId, y: VertexId) {
        self.touch(x);
        self.touch(y);
        if x == y {
            let around: Vec<VertexId> =
                self.g.in_neighbors(x).iter().chain(self.g.out_neighbors(x)).copied().collect();
            for w in around {
                self.mark(w);
            }
            return;
        }
        // vertices whose in- (resp. out-) neighborhood contains both ends
        let common_succ = intersect(self.g.out_neighbors(x), self.g.out_neighbors(y));
        let common_pred = intersect(self.g.in_neighbors(x), self.g.in_neighbors(y));
        for w in common_succ.into_iter().chain(common_pred) {
            self.mark(w);
        }
    }

    // ----- arc kinds ------------------------------------------------------

    fn sweep_pie(&mut self, level: u32) -> bool {
        if self.clean_at[0] == Some(self.version) {
            return false;
        }
        let g = &self.g;
        let comps = component_ids_filtered(g, |x, y| one_way(g, x, y));
        let mut doomed: Vec<Arc> = g
            .arcs()
            .filter(|&(u, v)| u != v && one_way(g, u, v) && comps.of(u) != comps.of(v))
            .collect();
        if let VisitOrder::Shuffled(_) = self.order {
            doomed.shuffle(&mut self.rng);
        }
        // removing an arc between components of G - A↔ changes neither A↔
        // nor those components, so one pass finds every Pie arc
        let changed = !doomed.is_empty();
        for (u, v) in doomed {
            self.remove_arc(ReductionKind::Pie, (u, v), level);
        }
        self.trim(level);
        self.clean_at[0] = Some(self.version);
        changed
    }

    fn sweep_dome(&mut self, level: u32) -> bool {
        if self.clean_at[1] == Some(self.version) {
            return false;
        }
        let mut changed = false;
        loop {
            let mut candidates: Vec<Arc> =
                self.g.arcs().filter(|&(u, v)| u != v && one_way(&self.g, u, v)).collect();
            if let VisitOrder::Shuffled(_) = self.order {
                candidates.shuffle(&mut self.rng);
            }
            let mut pass_changed = false;
            for arc in candidates {
                if self.g.has_arc(arc.0, arc.1) && dome(&self.g, arc) {
                    self.remove_arc(ReductionKind::DomePlusPlus, arc, level);
                    pass_changed = true;
                }
            }
            changed |= pass_changed;
            if !pass_changed {
                break;
            }
        }
        self.trim(level);
        self.clean_at[1] = Some(self.version);
        changed
    }

    fn remove_arc(&mut self, kind: ReductionKind, arc: Arc, level: u32) {
        let delta = apply_unchecked(kind, &mut self.g, Target::Arc(arc.0, arc.1));
        self.version += 1;
        self.mark_arc_change(arc.0, arc.1);
        self.trace.record(&delta, self.sweep_id, level);
        self.touched_by_arcs.insert(arc.0);
        self.touched_by_arcs.insert(arc.1);
    }

    fn trim(&mut self, level: u32) {
        let touched = std::mem::take(&mut self.touched_by_arcs);
        if !self.trim_isolated {
            return;
        }
        let isolated: Vec<VertexId> = touched
            .into_iter()
            .filter(|&v| self.g.contains_vertex(v) && self.g.in_degree(v) == 0 && self.g.out_degree(v) == 0)
            .collect();
        for v in isolated {
            self.g.remove_vertex(v).expect("live vertex");
            self.version += 1;
            self.trace.isolated += 1;
            self.trace.excluded.insert(v);
            self.trace.log.push(LogEvent { sweep: self.sweep_id, level, action: Action::Isolated(v) });
        }
    }
}

fn intersect(a: &BTreeSet<VertexId>, b: &BTreeSet<VertexId>) -> Vec<VertexId> {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    small.iter().copied().filter(|x| large.contains(x)).collect()
}
