//! Definition AMRs to definitional digraph: validity, patching, sense
//! selection, root bypass and union by concept label.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ArcAnnotations, Digraph};
use crate::par::{self, Execution};
use crate::penman::{AmrGraph, PenmanDocument, PenmanError};

pub const DEFINE: &str = "define-01";
const ARG1: &str = ":ARG1";
const ARG2: &str = ":ARG2";

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidityStatus {
    Valid,
    MissingArg1,
    MissingArg2,
    WrongRoot,
    NonAtomicDefined,
    Patched,
    Rejected(String),
}

impl ValidityStatus {
    /// Valid or patched: usable for graph construction.
    pub fn is_usable(&self) -> bool {
        matches!(self, ValidityStatus::Valid | ValidityStatus::Patched)
    }
}

impl fmt::Display for ValidityStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidityStatus::Valid => f.write_str("valid"),
            ValidityStatus::MissingArg1 => f.write_str("missing ARG1"),
            ValidityStatus::MissingArg2 => f.write_str("missing ARG2"),
            ValidityStatus::WrongRoot => f.write_str("wrong root"),
            ValidityStatus::NonAtomicDefined => f.write_str("non-atomic defined symbol"),
            ValidityStatus::Patched => f.write_str("patched"),
            ValidityStatus::Rejected(why) => write!(f, "rejected: {why}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AmrError {
    #[error("{lexeme}.{sense} cannot be patched: {status}")]
    Unpatchable { lexeme: String, sense: u32, status: ValidityStatus },
    #[error("{lexeme}.{sense} is not usable: {status}")]
    InvalidEntry { lexeme: String, sense: u32, status: ValidityStatus },
    #[error("replacement definition for {lexeme}.{sense} is malformed: {source}")]
    BadReplacement { lexeme: String, sense: u32, source: PenmanError },
    #[error("entry {lexeme}.{sense} appears twice")]
    DuplicateEntry { lexeme: String, sense: u32 },
    #[error(transparent)]
    Penman(#[from] PenmanError),
}

/// One dictionary definition as an AMR.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefinitionEntry {
    pub lexeme: String,
    pub sense: u32,
    pub amr: AmrGraph,
    pub status: ValidityStatus,
}

impl DefinitionEntry {
    /// Entry with its status computed by [`validate`].
    pub fn new(lexeme: &str, sense: u32, amr: AmrGraph) -> Self {
        let status = validate_graph(&amr);
        Self { lexeme: lexeme.to_string(), sense, amr, status }
    }

    /// Variable of the root's unique `:ARG1` target, if any.
    fn defined_var(&self) -> Option<&str> {
        single_target(&self.amr, ARG1)
    }

    /// Concept label of the defined symbol.
    pub fn defined_label(&self) -> Option<&str> {
        self.defined_var().and_then(|v| self.amr.concept(v))
    }
}

fn single_target<'a>(g: &'a AmrGraph, role: &str) -> Option<&'a str> {
    let mut targets = g.outgoing(&g.root).filter(|e| e.role == role);
    let first = targets.next()?;
    if targets.next().is_some() {
        return None;
    }
    Some(first.target.as_str())
}

/// Validity of the entry's graph; failures are reported in the fixed order
/// wrong root, ARG1, atomicity, ARG2.
pub fn validate(entry: &DefinitionEntry) -> ValidityStatus {
    validate_graph(&entry.amr)
}

fn validate_graph(g: &AmrGraph) -> ValidityStatus {
    if g.root_concept() != DEFINE {
        return ValidityStatus::WrongRoot;
    }
    let Some(defined) = single_target(g, ARG1) else {
        return ValidityStatus::MissingArg1;
    };
    if g.outgoing(defined).next().is_some() {
        return ValidityStatus::NonAtomicDefined;
    }
    if single_target(g, ARG2).is_none() {
        return ValidityStatus::MissingArg2;
    }
    ValidityStatus::Valid
}

/// Keeps the root and the defined symbol of an invalid entry and binds the
/// replacement definition under a new `:ARG2`. Valid entries come back
/// unchanged.
pub fn patch(entry: &DefinitionEntry, replacement: &AmrGraph) -> Result<DefinitionEntry, AmrError> {
    let status = validate(entry);
    let unpatchable =
        || AmrError::Unpatchable { lexeme: entry.lexeme.clone(), sense: entry.sense, status: status.clone() };
    match status {
        ValidityStatus::Valid => return Ok(DefinitionEntry { status: ValidityStatus::Valid, ..entry.clone() }),
        ValidityStatus::WrongRoot | ValidityStatus::MissingArg1 | ValidityStatus::NonAtomicDefined => {
            return Err(unpatchable())
        }
        _ => {}
    }
    replacement.check().map_err(|source| AmrError::BadReplacement {
        lexeme: entry.lexeme.clone(),
        sense: entry.sense,
        source,
    })?;
    let root = entry.amr.root.clone();
    let defined = entry.defined_var().ok_or_else(unpatchable)?.to_string();

    let mut g = AmrGraph::new(&root, DEFINE);
    g.add_instance(&defined, entry.amr.concept(&defined).expect("instantiated"));
    g.add_edge(&root, ARG1, &defined);
    for a in entry.amr.attributes.iter().filter(|a| a.source == defined) {
        g.add_attribute(&a.source, &a.role, &a.value);
    }

    let taken: HashSet<&str> = [root.as_str(), defined.as_str()].into();
    let mut rename: HashMap<&str, String> = HashMap::new();
    let mut used: HashSet<String> = replacement.instances.keys().cloned().collect();
    used.extend(taken.iter().map(|s| s.to_string()));
    for var in replacement.instances.keys() {
        let fresh = if taken.contains(var.as_str()) {
            let mut k = 2;
            loop {
                let candidate = format!("{var}{k}");
                if !used.contains(&candidate) {
                    used.insert(candidate.clone());
                    break candidate;
                }
                k += 1;
            }
        } else {
            var.clone()
        };
        rename.insert(var.as_str(), fresh);
    }
    for (var, concept) in &replacement.instances {
        g.add_instance(&rename[var.as_str()], concept);
    }
    g.add_edge(&root, ARG2, &rename[replacement.root.as_str()]);
    for e in &replacement.edges {
        g.add_edge(&rename[e.source.as_str()], &e.role, &rename[e.target.as_str()]);
    }
    for a in &replacement.attributes {
        g.add_attribute(&rename[a.source.as_str()], &a.role, &a.value);
    }
    Ok(DefinitionEntry { lexeme: entry.lexeme.clone(), sense: entry.sense, amr: g, status: ValidityStatus::Patched })
}

/// Sense selection outcome.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SenseSelection {
    /// Kept entries, ordered by `(lexeme, sense)`.
    pub kept: Vec<DefinitionEntry>,
    pub polysemy_filtered: usize,
    pub symbol_collisions: usize,
}

/// First-sense rule per `(lexeme, defined label)`, then removal of every
/// entry whose defined label is claimed by more than one lexeme.
pub fn select_senses(entries: &[DefinitionEntry]) -> SenseSelection {
    let mut best: BTreeMap<(&str, &str), &DefinitionEntry> = BTreeMap::new();
    let mut polysemy_filtered = 0;
    for e in entries {
        let Some(label) = e.defined_label() else { continue };
        match best.entry((e.lexeme.as_str(), label)) {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert(e);
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                polysemy_filtered += 1;
                if e.sense < slot.get().sense {
                    slot.insert(e);
                }
            }
        }
    }
    let mut claims: HashMap<&str, BTreeSet<&str>> = HashMap::new();
    for &(lexeme, label) in best.keys() {
        claims.entry(label).or_default().insert(lexeme);
    }
    let mut kept = Vec::new();
    let mut symbol_collisions = 0;
    for ((_, label), e) in best {
        if claims[label].len() > 1 {
            symbol_collisions += 1;
        } else {
            kept.push(e.clone());
        }
    }
    kept.sort_by(|a, b| (&a.lexeme, a.sense).cmp(&(&b.lexeme, b.sense)));
    SenseSelection { kept, polysemy_filtered, symbol_collisions }
}

/// Definitional arcs of one entry plus the role edges they replace.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Bypass {
    /// `(concept, defined symbol)` label pairs.
    pub arcs: BTreeSet<(String, String)>,
    /// Role edges of the definition, by concept label, tagged with the role.
    pub preserved: ArcAnnotations,
}

/// Drops the root: every concept of the `:ARG2` subgraph gets one arc toward
/// the defined symbol, and the subgraph's role edges are set aside.
///
/// The subgraph is everything connected to the `:ARG2` target once the root
/// is removed.
pub fn bypass_root(entry: &DefinitionEntry) -> Result<Bypass, AmrError> {
    let invalid = || AmrError::InvalidEntry {
        lexeme: entry.lexeme.clone(),
        sense: entry.sense,
        status: entry.status.clone(),
    };
    if !entry.status.is_usable() || validate(entry) != ValidityStatus::Valid {
        return Err(invalid());
    }
    let g = &entry.amr;
    let defined = g.concept(entry.defined_var().ok_or_else(invalid)?).expect("instantiated").to_string();
    let start = single_target(g, ARG2).ok_or_else(invalid)?;

    let mut adjacent: HashMap<&str, Vec<&str>> = HashMap::new();
    for e in g.edges.iter().filter(|e| e.source != g.root && e.target != g.root) {
        adjacent.entry(&e.source).or_default().push(&e.target);
        adjacent.entry(&e.target).or_default().push(&e.source);
    }
    let mut members: HashSet<&str> = HashSet::from([start]);
    let mut stack = vec![start];
    while let Some(x) = stack.pop() {
        for &y in adjacent.get(x).map(Vec::as_slice).unwrap_or(&[]) {
            if members.insert(y) {
                stack.push(y);
            }
        }
    }

    let mut out = Bypass::default();
    for &var in &members {
        out.arcs.insert((g.concept(var).expect("instantiated").to_string(), defined.clone()));
    }
    for e in g.edges.iter().filter(|e| members.contains(e.source.as_str()) && members.contains(e.target.as_str())) {
        out.preserved.insert(
            g.concept(&e.source).expect("instantiated"),
            g.concept(&e.target).expect("instantiated"),
            e.role.trim_start_matches(':'),
        );
    }
    Ok(out)
}

/// Union of the definitional arcs of `entries`, by label. Arcs carry the
/// `define-01` tag in the returned annotations; role edges go to the sidecar.
pub fn union_corpus(entries: &[DefinitionEntry]) -> Result<(Digraph, ArcAnnotations, ArcAnnotations), AmrError> {
    union_with(entries, Execution::default())
}

fn union_with(
    entries: &[DefinitionEntry],
    exec: Execution,
) -> Result<(Digraph, ArcAnnotations, ArcAnnotations), AmrError> {
    let parts = par::map(exec, entries, bypass_root);
    let mut arcs: BTreeSet<(String, String)> = BTreeSet::new();
    let mut preserved = ArcAnnotations::new();
    for part in parts {
        let part = part?;
        arcs.extend(part.arcs);
        preserved.extend(&part.preserved);
    }
    let mut tags = ArcAnnotations::new();
    for (u, v) in &arcs {
        tags.insert(u, v, DEFINE);
    }
    let g = Digraph::from_labeled_arcs(arcs.iter().map(|(u, v)| (u.as_str(), v.as_str())));
    Ok((g, tags, preserved))
}

/// Preprocessing counts of an AMR corpus.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessMetrics {
    pub definition_quantity: usize,
    pub initial_invalid: usize,
    pub saved: usize,
    pub final_invalid: usize,
    pub polysemy_filtered: usize,
    pub symbol_collisions: usize,
    pub final_quantity: usize,
}

impl PreprocessMetrics {
    /// `final = definitions - final invalid - polysemy - collisions`.
    pub fn is_conserved(&self) -> bool {
        self.saved <= self.initial_invalid
            && self.final_invalid == self.initial_invalid - self.saved
            && self.definition_quantity
                == self.final_quantity + self.final_invalid + self.polysemy_filtered + self.symbol_collisions
    }
}

/// Definitions plus the replacement AMRs used for patching.
#[derive(Clone, Debug, Default)]
pub struct AmrCorpus {
    pub entries: Vec<DefinitionEntry>,
    /// `(lexeme, sense)` to the AMR of the bare definition text.
    pub replacements: BTreeMap<(String, u32), AmrGraph>,
}

impl AmrCorpus {
    /// Sorts documents into entries (`::id`) and replacements (`::def-amr`).
    pub fn from_documents(docs: Vec<PenmanDocument>) -> Result<Self, AmrError> {
        let mut corpus = AmrCorpus::default();
        let mut seen: HashSet<(String, u32)> = HashSet::new();
        for doc in docs {
            if let Some(key) = doc.metadata.get("def-amr") {
                let (lexeme, sense) = crate::penman::parse_entry_id(key)
                    .ok_or_else(|| PenmanError::BadId { pos: doc.pos, id: key.clone() })?;
                corpus.replacements.insert((lexeme, sense), doc.graph);
                continue;
            }
            let (lexeme, sense) = doc.entry_id()?;
            if !seen.insert((lexeme.clone(), sense)) {
                return Err(AmrError::DuplicateEntry { lexeme, sense });
            }
            corpus.entries.push(DefinitionEntry::new(&lexeme, sense, doc.graph));
        }
        Ok(corpus)
    }

    pub fn parse(text: &str) -> Result<Self, AmrError> {
        Self::from_documents(crate::penman::parse_corpus(text)?)
    }
}

/// Per-entry outcome of the pipeline.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryReport {
    pub lexeme: String,
    pub sense: u32,
    pub initial: ValidityStatus,
    #[serde(rename = "final")]
    pub final_status: ValidityStatus,
}

/// Output of [`build_amr_digraph`].
#[derive(Clone, Debug)]
pub struct AmrBuild {
    pub graph: Digraph,
    /// `define-01` tags of the graph's arcs.
    pub tags: ArcAnnotations,
    /// Role edges removed by the root bypass.
    pub preserved: ArcAnnotations,
    pub metrics: PreprocessMetrics,
    pub reports: Vec<EntryReport>,
    pub kept: Vec<DefinitionEntry>,
}

/// Validate, patch, select senses, bypass and union.
pub fn build_amr_digraph(corpus: &AmrCorpus, exec: Execution) -> Result<AmrBuild, AmrError> {
    let outcomes: Vec<(ValidityStatus, DefinitionEntry)> = par::map(exec, &corpus.entries, |e| {
        let initial = validate(e);
        if initial == ValidityStatus::Valid {
            return (initial, DefinitionEntry { status: ValidityStatus::Valid, ..e.clone() });
        }
        let key = (e.lexeme.clone(), e.sense);
        let fixed = match corpus.replacements.get(&key) {
            None => Err(format!("{initial}, no replacement definition")),
            Some(r) => patch(e, r).map_err(|err| err.to_string()),
        };
        match fixed {
            Ok(entry) => (initial, entry),
            Err(why) => (initial, DefinitionEntry { status: ValidityStatus::Rejected(why), ..e.clone() }),
        }
    });

    let mut metrics = PreprocessMetrics { definition_quantity: corpus.entries.len(), ..Default::default() };
    let mut reports = Vec::with_capacity(outcomes.len());
    let mut usable = Vec::new();
    for (initial, entry) in outcomes {
        if initial != ValidityStatus::Valid {
            metrics.initial_invalid += 1;
            if entry.status == ValidityStatus::Patched {
                metrics.saved += 1;
            } else {
                metrics.final_invalid += 1;
            }
        }
        reports.push(EntryReport {
            lexeme: entry.lexeme.clone(),
            sense: entry.sense,
            initial,
            final_status: entry.status.clone(),
        });
        if entry.status.is_usable() {
            usable.push(entry);
        }
    }
    let selection = select_senses(&usable);
    metrics.polysemy_filtered = selection.polysemy_filtered;
    metrics.symbol_collisions = selection.symbol_collisions;
    metrics.final_quantity = selection.kept.len();
    let (graph, tags, preserved) = union_with(&selection.kept, exec)?;
    Ok(AmrBuild { graph, tags, preserved, metrics, reports, kept: selection.kept })
}
