//! PENMAN notation: parsing into rooted concept graphs and canonical
//! serialization.
//!
//! Inverse roles (`:ARG0-of`) are normalized on parse, so edges are always
//! stored in their forward direction. The parser and serializer are both
//! iterative; nesting depth is bounded only by memory.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

/// Roles that end in `-of` without being inverses.
const NON_INVERSE_OF: [&str; 3] = [":consist-of", ":prep-out-of", ":prep-on-behalf-of"];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PenmanError {
    #[error("{pos}: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("{pos}: variable `{var}` is instantiated more than once")]
    DuplicateInstance { pos: Pos, var: String },
    #[error("{pos}: variable `{var}` is never instantiated")]
    DanglingVariable { pos: Pos, var: String },
    #[error("{pos}: more than one top-level graph")]
    MultipleRoots { pos: Pos },
    #[error("{pos}: variable `{var}` is not connected to the root")]
    NotRooted { pos: Pos, var: String },
    #[error("{pos}: circuit through `{var}` after normalizing inverse roles")]
    Cycle { pos: Pos, var: String },
    #[error("{pos}: bad entry id `{id}`")]
    BadId { pos: Pos, id: String },
}

impl PenmanError {
    pub fn pos(&self) -> Pos {
        match self {
            PenmanError::Syntax { pos, .. }
            | PenmanError::DuplicateInstance { pos, .. }
            | PenmanError::DanglingVariable { pos, .. }
            | PenmanError::MultipleRoots { pos }
            | PenmanError::NotRooted { pos, .. }
            | PenmanError::Cycle { pos, .. }
            | PenmanError::BadId { pos, .. } => *pos,
        }
    }

    fn syntax(pos: Pos, message: impl Into<String>) -> Self {
        PenmanError::Syntax { pos, message: message.into() }
    }
}

/// `(source, role, target)` between two variables; roles keep their colon.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub source: String,
    pub role: String,
    pub target: String,
}

/// `(source, role, constant)`; constants are kept verbatim, quotes included.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Attribute {
    pub source: String,
    pub role: String,
    pub value: String,
}

/// Rooted concept graph. Equality is structural: edges and attributes are
/// compared as sets.
#[derive(Clone, Debug, Default)]
pub struct AmrGraph {
    pub root: String,
    /// Variable to concept label.
    pub instances: BTreeMap<String, String>,
    /// Normalized edges in source order.
    pub edges: Vec<Edge>,
    pub attributes: Vec<Attribute>,
}

impl PartialEq for AmrGraph {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
            && self.instances == other.instances
            && self.edge_set() == other.edge_set()
            && self.attributes.iter().collect::<BTreeSet<_>>() == other.attributes.iter().collect::<BTreeSet<_>>()
    }
}

impl Eq for AmrGraph {}

impl AmrGraph {
    /// Single-instance graph.
    pub fn new(root: &str, concept: &str) -> Self {
        let mut g = Self { root: root.to_string(), ..Self::default() };
        g.instances.insert(root.to_string(), concept.to_string());
        g
    }

    pub fn add_instance(&mut self, var: &str, concept: &str) {
        self.instances.insert(var.to_string(), concept.to_string());
    }

    pub fn add_edge(&mut self, source: &str, role: &str, target: &str) {
        self.edges.push(Edge { source: source.into(), role: role.into(), target: target.into() });
    }

    pub fn add_attribute(&mut self, source: &str, role: &str, value: &str) {
        self.attributes.push(Attribute { source: source.into(), role: role.into(), value: value.into() });
    }

    pub fn concept(&self, var: &str) -> Option<&str> {
        self.instances.get(var).map(String::as_str)
    }

    pub fn root_concept(&self) -> &str {
        self.concept(&self.root).unwrap_or("")
    }

    pub fn edge_set(&self) -> BTreeSet<&Edge> {
        self.edges.iter().collect()
    }

    pub fn outgoing<'a>(&'a self, var: &'a str) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edges.iter().filter(move |e| e.source == var)
    }

    pub fn incoming<'a>(&'a self, var: &'a str) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edges.iter().filter(move |e| e.target == var)
    }

    /// Checks the structural invariants: instantiated root and endpoints,
    /// connectivity, and no directed circuit.
    pub fn check(&self) -> Result<(), PenmanError> {
        let pos = Pos::default();
        if !self.instances.contains_key(&self.root) {
            return Err(PenmanError::DanglingVariable { pos, var: self.root.clone() });
        }
        for e in &self.edges {
            for var in [&e.source, &e.target] {
                if !self.instances.contains_key(var) {
                    return Err(PenmanError::DanglingVariable { pos, var: var.clone() });
                }
            }
        }
        for a in &self.attributes {
            if !self.instances.contains_key(&a.source) {
                return Err(PenmanError::DanglingVariable { pos, var: a.source.clone() });
            }
        }
        self.check_shape(&HashMap::new())
    }

    fn check_shape(&self, positions: &HashMap<String, Pos>) -> Result<(), PenmanError> {
        let at = |var: &str| positions.get(var).copied().unwrap_or_default();
        let mut adjacent: HashMap<&str, Vec<&str>> = HashMap::new();
        for e in &self.edges {
            adjacent.entry(&e.source).or_default().push(&e.target);
            adjacent.entry(&e.target).or_default().push(&e.source);
        }
        let mut seen: HashSet<&str> = HashSet::from([self.root.as_str()]);
        let mut stack = vec![self.root.as_str()];
        while let Some(x) = stack.pop() {
            for &y in adjacent.get(x).map(Vec::as_slice).unwrap_or(&[]) {
                if seen.insert(y) {
                    stack.push(y);
                }
            }
        }
        if let Some(var) = self.instances.keys().find(|v| !seen.contains(v.as_str())) {
            return Err(PenmanError::NotRooted { pos: at(var), var: var.clone() });
        }

        let mut indegree: HashMap<&str, usize> = self.instances.keys().map(|v| (v.as_str(), 0)).collect();
        let mut succ: HashMap<&str, Vec<&str>> = HashMap::new();
        for e in self.edges.iter().collect::<BTreeSet<_>>() {
            *indegree.get_mut(e.target.as_str()).expect("checked endpoint") += 1;
            succ.entry(&e.source).or_default().push(&e.target);
        }
        let mut ready: Vec<&str> = indegree.iter().filter(|(_, &d)| d == 0).map(|(&v, _)| v).collect();
        let mut done = 0;
        while let Some(x) = ready.pop() {
            done += 1;
            for &y in succ.get(x).map(Vec::as_slice).unwrap_or(&[]) {
                let d = indegree.get_mut(y).expect("checked endpoint");
                *d -= 1;
                if *d == 0 {
                    ready.push(y);
                }
            }
        }
        if done < self.instances.len() {
            let var = indegree
                .iter()
                .filter(|(_, &d)| d > 0)
                .map(|(&v, _)| v)
                .min_by_key(|v| (at(v), v.to_string()))
                .expect("some vertex left");
            return Err(PenmanError::Cycle { pos: at(var), var: var.to_string() });
        }
        Ok(())
    }
}

/// One PENMAN block: metadata plus graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PenmanDocument {
    /// `# ::key value` pairs, keys without the `::`.
    pub metadata: BTreeMap<String, String>,
    pub graph: AmrGraph,
    /// Position of the opening parenthesis.
    pub pos: Pos,
}

impl PenmanDocument {
    pub fn new(graph: AmrGraph) -> Self {
        Self { graph, ..Self::default() }
    }

    /// Splits `::id` into lexeme and sense at its final dot.
    pub fn entry_id(&self) -> Result<(String, u32), PenmanError> {
        let id = self.metadata.get("id").ok_or_else(|| PenmanError::BadId { pos: self.pos, id: String::new() })?;
        parse_entry_id(id).ok_or_else(|| PenmanError::BadId { pos: self.pos, id: id.clone() })
    }
}

/// `lexeme.N` into `(lexeme, N)`.
pub fn parse_entry_id(id: &str) -> Option<(String, u32)> {
    let (lexeme, sense) = id.rsplit_once('.')?;
    if lexeme.is_empty() || sense.is_empty() || !sense.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some((lexeme.to_string(), sense.parse().ok()?))
}

// ----- tokenizer --------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Open,
    Close,
    Slash,
    Role(String),
    Str(String),
    Sym(String),
    Comment(String),
}

fn is_delim(c: char) -> bool {
    c.is_whitespace() || matches!(c, '(' | ')' | '/' | '"')
}

fn tokenize(text: &str) -> Result<Vec<(Tok, Pos)>, PenmanError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let mut line_start = true;
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            line_start = true;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' && line_start {
            let start = i;
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            col += i - start;
            out.push((Tok::Comment(chars[start..i].iter().collect()), pos));
            continue;
        }
        line_start = false;
        match c {
            '(' | ')' | '/' => {
                out.push((
                    match c {
                        '(' => Tok::Open,
                        ')' => Tok::Close,
                        _ => Tok::Slash,
                    },
                    pos,
                ));
                i += 1;
                col += 1;
            }
            '"' => {
                let start = i;
                i += 1;
                col += 1;
                loop {
                    match chars.get(i) {
                        None => return Err(PenmanError::syntax(pos, "unterminated string")),
                        Some('\\') => {
                            i += 2;
                            col += 2;
                        }
                        Some('"') => {
                            i += 1;
                            col += 1;
                            break;
                        }
                        Some('\n') => {
                            i += 1;
                            line += 1;
                            col = 1;
                        }
                        Some(_) => {
                            i += 1;
                            col += 1;
                        }
                    }
                }
                out.push((Tok::Str(chars[start..i.min(chars.len())].iter().collect()), pos));
            }
            _ => {
                let start = i;
                while i < chars.len() && !is_delim(chars[i]) {
                    i += 1;
                }
                col += i - start;
                let word: String = chars[start..i].iter().collect();
                if word.starts_with(':') {
                    if word.len() == 1 {
                        return Err(PenmanError::syntax(pos, "empty role"));
                    }
                    out.push((Tok::Role(word), pos));
                } else {
                    out.push((Tok::Sym(word), pos));
                }
            }
        }
    }
    Ok(out)
}

// ----- parser -------------------------------------------------------------------

fn is_inverse(role: &str) -> bool {
    role.ends_with("-of") && role.len() > 4 && !NON_INVERSE_OF.contains(&role)
}

/// Whether a bare symbol looks like a variable name.
fn looks_like_variable(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase()) && chars.all(|c| c.is_ascii_digit())
}

struct Frame {
    var: String,
    role: Option<(String, Pos)>,
}

/// Reference from `source` to a bare symbol or literal, resolved once the
/// whole graph is known.
struct PendingValue {
    source: String,
    role: String,
    value: String,
    quoted: bool,
    pos: Pos,
}

struct Parser<'a> {
    toks: &'a [(Tok, Pos)],
    at: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a (Tok, Pos)> {
        self.toks.get(self.at)
    }

    fn end_pos(&self) -> Pos {
        self.toks.last().map_or(Pos { line: 1, col: 1 }, |(_, p)| *p)
    }

    fn metadata(&mut self) -> BTreeMap<String, String> {
        let mut meta = BTreeMap::new();
        while let Some((Tok::Comment(text), _)) = self.peek() {
            self.at += 1;
            let body = text.trim_start_matches('#');
            for chunk in body.split("::").skip(1) {
                let chunk = chunk.trim();
                if chunk.is_empty() {
                    continue;
                }
                let (key, value) = chunk.split_once(char::is_whitespace).unwrap_or((chunk, ""));
                meta.insert(key.to_string(), value.trim().to_string());
            }
        }
        meta
    }

    fn expect_sym(&mut self, what: &str) -> Result<(String, Pos), PenmanError> {
        match self.toks.get(self.at) {
            Some((Tok::Sym(s), p)) => {
                self.at += 1;
                Ok((s.clone(), *p))
            }
            Some((Tok::Str(s), p)) if what == "concept" => {
                self.at += 1;
                Ok((s.clone(), *p))
            }
            Some((_, p)) => Err(PenmanError::syntax(*p, format!("expected {what}"))),
            None => Err(PenmanError::syntax(self.end_pos(), format!("expected {what}, found end of input"))),
        }
    }

    /// Parses one parenthesized graph starting at the current token.
    fn graph(&mut self) -> Result<(AmrGraph, Pos), PenmanError> {
        let start = match self.peek() {
            Some((Tok::Open, p)) => *p,
            Some((_, p)) => return Err(PenmanError::syntax(*p, "expected `(`")),
            None => return Err(PenmanError::syntax(self.end_pos(), "no graph found")),
        };
        let mut g = AmrGraph::default();
        let mut positions: HashMap<String, Pos> = HashMap::new();
        let mut pending: Vec<PendingValue> = Vec::new();
        let mut stack: Vec<Frame> = Vec::new();
        loop {
            let Some((tok, pos)) = self.toks.get(self.at) else {
                return Err(PenmanError::syntax(self.end_pos(), "unbalanced parentheses"));
            };
            let pos = *pos;
            self.at += 1;
            match tok {
                Tok::Open => {
                    let (var, vpos) = self.expect_sym("variable")?;
                    match self.toks.get(self.at) {
                        Some((Tok::Slash, _)) => self.at += 1,
                        Some((_, p)) => return Err(PenmanError::syntax(*p, "expected `/`")),
                        None => return Err(PenmanError::syntax(self.end_pos(), "expected `/`")),
                    }
                    let (concept, _) = self.expect_sym("concept")?;
                    if g.instances.contains_key(&var) {
                        return Err(PenmanError::DuplicateInstance { pos: vpos, var });
                    }
                    g.instances.insert(var.clone(), concept);
                    positions.insert(var.clone(), vpos);
                    match stack.last_mut() {
                        None => g.root = var.clone(),
                        Some(parent) => {
                            let (role, _) = parent
                                .role
                                .take()
                                .ok_or_else(|| PenmanError::syntax(pos, "nested node without a role"))?;
                            push_edge(&mut g, &parent.var, role, &var);
                        }
                    }
                    stack.push(Frame { var, role: None });
                }
                Tok::Close => {
                    let frame = stack.pop().ok_or_else(|| PenmanError::syntax(pos, "unbalanced `)`"))?;
                    if let Some((role, rpos)) = frame.role {
                        return Err(PenmanError::syntax(rpos, format!("role {role} has no value")));
                    }
                    if stack.is_empty() {
                        break;
                    }
                }
                Tok::Role(role) => {
                    let frame = stack.last_mut().ok_or_else(|| PenmanError::syntax(pos, "role outside a node"))?;
                    if let Some((prev, ppos)) = &frame.role {
                        return Err(PenmanError::syntax(*ppos, format!("role {prev} has no value")));
                    }
                    frame.role = Some((role.clone(), pos));
                }
                Tok::Sym(value) | Tok::Str(value) => {
                    let frame = stack.last_mut().ok_or_else(|| PenmanError::syntax(pos, "value outside a node"))?;
                    let (role, _) = frame.role.take().ok_or_else(|| PenmanError::syntax(pos, "value without a role"))?;
                    pending.push(PendingValue {
                        source: frame.var.clone(),
                        role,
                        value: value.clone(),
                        quoted: matches!(tok, Tok::Str(_)),
                        pos,
                    });
                }
                Tok::Slash => return Err(PenmanError::syntax(pos, "unexpected `/`")),
                Tok::Comment(_) => return Err(PenmanError::syntax(pos, "comment inside a graph")),
            }
        }

        for p in pending {
            if !p.quoted && g.instances.contains_key(&p.value) {
                push_edge(&mut g, &p.source, p.role, &p.value);
            } else if !p.quoted && looks_like_variable(&p.value) {
                return Err(PenmanError::DanglingVariable { pos: p.pos, var: p.value });
            } else {
                g.attributes.push(Attribute { source: p.source, role: p.role, value: p.value });
            }
        }
        g.check_shape(&positions)?;
        Ok((g, start))
    }
}

fn push_edge(g: &mut AmrGraph, from: &str, role: String, to: &str) {
    if is_inverse(&role) {
        let forward = role[..role.len() - 3].to_string();
        g.edges.push(Edge { source: to.to_string(), role: forward, target: from.to_string() });
    } else {
        g.edges.push(Edge { source: from.to_string(), role, target: to.to_string() });
    }
}

/// Parses one block: optional metadata comments, then exactly one graph.
pub fn parse_penman(text: &str) -> Result<PenmanDocument, PenmanError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks: &toks, at: 0 };
    let metadata = p.metadata();
    let (graph, pos) = p.graph()?;
    // trailing comments are tolerated
    while let Some((tok, pos)) = p.peek() {
        match tok {
            Tok::Comment(_) => p.at += 1,
            Tok::Open => return Err(PenmanError::MultipleRoots { pos: *pos }),
            _ => return Err(PenmanError::syntax(*pos, "unexpected token after graph")),
        }
    }
    Ok(PenmanDocument { metadata, graph, pos })
}

/// Parses a corpus: a sequence of blocks, each a run of metadata comments
/// followed by one graph. Blank lines are insignificant.
pub fn parse_corpus(text: &str) -> Result<Vec<PenmanDocument>, PenmanError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks: &toks, at: 0 };
    let mut docs = Vec::new();
    loop {
        let metadata = p.metadata();
        if p.peek().is_none() {
            break;
        }
        let (graph, pos) = p.graph()?;
        docs.push(PenmanDocument { metadata, graph, pos });
    }
    Ok(docs)
}

// ----- serializer -----------------------------------------------------------------

/// Edge placement in the printed spanning tree.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Placement {
    /// Printed at its source; nests the target when `true`.
    Forward(bool),
    /// Printed at its target as an inverse role, nesting the source.
    Inverse,
}

/// Canonical PENMAN text of `doc`: metadata lines, then the graph printed
/// depth-first from the root with four-space indentation.
pub fn serialize_penman(doc: &PenmanDocument) -> String {
    let mut out = String::new();
    for (k, v) in &doc.metadata {
        if v.is_empty() {
            out.push_str(&format!("# ::{k}\n"));
        } else {
            out.push_str(&format!("# ::{k} {v}\n"));
        }
    }
    out.push_str(&serialize_graph(&doc.graph));
    out
}

pub fn serialize_graph(g: &AmrGraph) -> String {
    let placement = spanning_tree(g);
    // items hosted at each variable, in stored order
    let mut hosted: HashMap<&str, Vec<(String, Option<&str>)>> = HashMap::new();
    for (e, place) in g.edges.iter().zip(&placement) {
        let (host, item) = match place {
            Placement::Forward(true) => (&e.source, (e.role.clone(), Some(e.target.as_str()))),
            Placement::Forward(false) => (&e.source, (format!("{} {}", e.role, e.target), None)),
            Placement::Inverse => (&e.target, (format!("{}-of", e.role), Some(e.source.as_str()))),
        };
        hosted.entry(host.as_str()).or_default().push(item);
    }
    for a in &g.attributes {
        hosted.entry(a.source.as_str()).or_default().push((format!("{} {}", a.role, a.value), None));
    }

    enum Step<'a> {
        Open(&'a str, usize),
        Text(String),
        Close,
    }
    let mut out = String::new();
    let mut stack = vec![Step::Open(&g.root, 0)];
    while let Some(step) = stack.pop() {
        match step {
            Step::Text(text) => out.push_str(&text),
            Step::Close => out.push(')'),
            Step::Open(var, depth) => {
                out.push('(');
                out.push_str(var);
                out.push_str(" / ");
                out.push_str(g.concept(var).unwrap_or(""));
                stack.push(Step::Close);
                let indent = "    ".repeat(depth + 1);
                for (text, child) in hosted.remove(var).unwrap_or_default().into_iter().rev() {
                    match child {
                        Some(c) => {
                            stack.push(Step::Open(c, depth + 1));
                            stack.push(Step::Text(format!("\n{indent}{text} ")));
                        }
                        None => stack.push(Step::Text(format!("\n{indent}{text}"))),
                    }
                }
            }
        }
    }
    out
}

/// Chooses, for every edge, where it is printed: a depth-first tree along
/// forward edges from the root, extended through inverse edges only for
/// variables the forward search cannot reach.
fn spanning_tree(g: &AmrGraph) -> Vec<Placement> {
    let mut placement = vec![Placement::Forward(false); g.edges.len()];
    let mut out: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, e) in g.edges.iter().enumerate() {
        out.entry(e.source.as_str()).or_default().push(i);
    }
    let mut visited: HashSet<&str> = HashSet::new();

    let mut frontier: Vec<&str> = vec![g.root.as_str()];
    visited.insert(&g.root);
    loop {
        while let Some(start) = frontier.pop() {
            let mut stack: Vec<(&str, usize)> = vec![(start, 0)];
            while let Some((v, k)) = stack.last_mut() {
                let edges = out.get(*v).map(Vec::as_slice).unwrap_or(&[]);
                if *k >= edges.len() {
                    stack.pop();
                    continue;
                }
                let i = edges[*k];
                *k += 1;
                let t = g.edges[i].target.as_str();
                if visited.insert(t) {
                    placement[i] = Placement::Forward(true);
                    stack.push((t, 0));
                }
            }
        }
        let bridge = g
            .edges
            .iter()
            .position(|e| !visited.contains(e.source.as_str()) && visited.contains(e.target.as_str()));
        match bridge {
            Some(i) => {
                placement[i] = Placement::Inverse;
                visited.insert(&g.edges[i].source);
                frontier.push(&g.edges[i].source);
            }
            None => return placement,
        }
    }
}
