//! Plain-text graph formats: the tab-separated arc list used between
//! commands, and DOT for visualisation.
//!
//! Arc-list lines are `tail<TAB>head<TAB>tag` with the tag optional. A line
//! with a single field declares an isolated vertex. Lines starting with `#`
//! and blank lines are ignored. An arc carrying several tags is written once
//! per tag; the graph keeps one arc.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::graph::{ArcAnnotations, Digraph};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("label {0:?} cannot be written: tabs, line breaks and a leading '#' are reserved")]
    Unwritable(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl FormatError {
    fn syntax(line: usize, message: impl Into<String>) -> Self {
        Self::Syntax { line, message: message.into() }
    }

    /// True when the failure is malformed input rather than an I/O fault.
    pub fn is_format(&self) -> bool {
        !matches!(self, Self::Io(_))
    }
}

/// A graph together with the relation tags of its arcs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TaggedGraph {
    pub graph: Digraph,
    pub tags: ArcAnnotations,
}

impl TaggedGraph {
    pub fn untagged(graph: Digraph) -> Self {
        Self { graph, tags: ArcAnnotations::new() }
    }
}

pub fn read_arc_list<R: BufRead>(reader: R) -> Result<TaggedGraph, FormatError> {
    let mut out = TaggedGraph::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.iter().take(2).any(|f| f.is_empty()) {
            return Err(FormatError::syntax(lineno, "empty vertex label"));
        }
        match fields.as_slice() {
            [v] => {
                out.graph.add_vertex(v);
            }
            [t, h] | [t, h, ""] => {
                let (u, v) = (out.graph.add_vertex(t), out.graph.add_vertex(h));
                out.graph.add_arc(u, v);
                out.tags.touch(t, h);
            }
            [t, h, tag] => {
                let (u, v) = (out.graph.add_vertex(t), out.graph.add_vertex(h));
                out.graph.add_arc(u, v);
                out.tags.insert(t, h, tag);
            }
            _ => return Err(FormatError::syntax(lineno, format!("expected at most 3 tab-separated fields, found {}", fields.len()))),
        }
    }
    out.tags.retain_arcs_of(&out.graph);
    Ok(out)
}

pub fn parse_arc_list(text: &str) -> Result<TaggedGraph, FormatError> {
    read_arc_list(text.as_bytes())
}

fn writable(label: &str) -> Result<&str, FormatError> {
    if label.contains(['\t', '\n', '\r']) || label.starts_with('#') {
        return Err(FormatError::Unwritable(label.to_owned()));
    }
    Ok(label)
}

/// Writes vertices without arcs first, then arcs in ascending index order.
/// Tags for arcs absent from `g` are ignored.
pub fn write_arc_list<W: Write>(mut w: W, g: &Digraph, tags: &ArcAnnotations) -> Result<(), FormatError> {
    for v in g.vertices() {
        if g.in_degree(v) == 0 && g.out_degree(v) == 0 {
            writeln!(w, "{}", writable(g.label(v))?)?;
        }
    }
    for (u, v) in g.arcs() {
        let (t, h) = (writable(g.label(u))?, writable(g.label(v))?);
        match tags.tags(t, h).filter(|s| !s.is_empty()) {
            Some(set) => {
                for tag in set {
                    if tag.contains(['\t', '\n', '\r']) {
                        return Err(FormatError::Unwritable(tag.clone()));
                    }
                    writeln!(w, "{t}\t{h}\t{tag}")?;
                }
            }
            None => writeln!(w, "{t}\t{h}")?,
        }
    }
    Ok(())
}

/// Annotation map on its own, for arcs that are not part of any graph.
pub fn write_annotations<W: Write>(mut w: W, tags: &ArcAnnotations) -> Result<(), FormatError> {
    for ((t, h), set) in tags.iter() {
        let (t, h) = (writable(t)?, writable(h)?);
        if set.is_empty() {
            writeln!(w, "{t}\t{h}")?;
        }
        for tag in set {
            writeln!(w, "{t}\t{h}\t{}", writable(tag)?)?;
        }
    }
    Ok(())
}

pub fn arc_list_string(g: &Digraph, tags: &ArcAnnotations) -> Result<String, FormatError> {
    let mut buf = Vec::new();
    write_arc_list(&mut buf, g, tags)?;
    Ok(String::from_utf8(buf).expect("labels are UTF-8"))
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// DOT digraph with quoted vertex labels. Multiple tags on one arc are
/// joined with `", "` into a single edge label.
pub fn write_dot<W: Write>(mut w: W, g: &Digraph, tags: &ArcAnnotations) -> io::Result<()> {
    writeln!(w, "digraph definitions {{")?;
    for v in g.vertices() {
        writeln!(w, "    {};", quote(g.label(v)))?;
    }
    for (u, v) in g.arcs() {
        let (t, h) = (g.label(u), g.label(v));
        write!(w, "    {} -> {}", quote(t), quote(h))?;
        if let Some(set) = tags.tags(t, h).filter(|s| !s.is_empty()) {
            let joined: Vec<&str> = set.iter().map(String::as_str).collect();
            write!(w, " [label={}]", quote(&joined.join(", ")))?;
        }
        writeln!(w, ";")?;
    }
    writeln!(w, "}}")
}

pub fn dot_string(g: &Digraph, tags: &ArcAnnotations) -> String {
    let mut buf = Vec::new();
    write_dot(&mut buf, g, tags).expect("writing to memory");
    String::from_utf8(buf).expect("labels are UTF-8")
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Id(String),
    Arrow,
    Open,
    Close,
    LBracket,
    RBracket,
    Equals,
    Separator,
}

fn tokenize_dot(text: &str) -> Result<Vec<(Token, usize)>, FormatError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1;
    while let Some(c) = chars.next() {
        match c {
            '\n' => line += 1,
            c if c.is_whitespace() => {}
            '{' => out.push((Token::Open, line)),
            '}' => out.push((Token::Close, line)),
            '[' => out.push((Token::LBracket, line)),
            ']' => out.push((Token::RBracket, line)),
            '=' => out.push((Token::Equals, line)),
            ';' | ',' => out.push((Token::Separator, line)),
            '-' if chars.peek() == Some(&'>') => {
                chars.next();
                out.push((Token::Arrow, line));
            }
            '/' if chars.peek() == Some(&'/') => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        line += 1;
                        break;
                    }
                }
            }
            '"' => {
                let start = line;
                let mut s = String::new();
                loop {
                    match chars.next() {
                        None => return Err(FormatError::syntax(start, "unterminated string")),
                        Some('"') => break,
                        Some('\\') => match chars.next() {
                            Some('n') => s.push('\n'),
                            Some(c) => s.push(c),
                            None => return Err(FormatError::syntax(start, "unterminated string")),
                        },
                        Some(c) => {
                            if c == '\n' {
                                line += 1;
                            }
                            s.push(c);
                        }
                    }
                }
                out.push((Token::Id(s), start));
            }
            c if c.is_alphanumeric() || c == '_' || c == '.' || c == '-' => {
                let mut s = String::from(c);
                while let Some(&d) = chars.peek() {
                    if d.is_alphanumeric() || d == '_' || d == '.' {
                        s.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push((Token::Id(s), line));
            }
            c => return Err(FormatError::syntax(line, format!("unexpected character {c:?}"))),
        }
    }
    Ok(out)
}

/// Reads the DOT subset produced by [`write_dot`]: node statements, edge
/// chains and attribute lists. Only the `label` attribute of edges is kept;
/// `graph`, `node` and `edge` defaults are skipped. Tags joined by
/// [`write_dot`] are split back on `", "`.
pub fn parse_dot(text: &str) -> Result<TaggedGraph, FormatError> {
    let tokens = tokenize_dot(text)?;
    let mut pos = 0;
    let last_line = text.lines().count().max(1);
    let line_at = |p: usize| tokens.get(p).map_or(last_line, |t| t.1);
    let expect_id = |pos: &mut usize| -> Result<String, FormatError> {
        match tokens.get(*pos) {
            Some((Token::Id(s), _)) => {
                *pos += 1;
                Ok(s.clone())
            }
            _ => Err(FormatError::syntax(line_at(*pos), "expected identifier")),
        }
    };
    let mut header = expect_id(&mut pos)?;
    if header == "strict" {
        header = expect_id(&mut pos)?;
    }
    if header != "digraph" {
        return Err(FormatError::syntax(line_at(0), "expected 'digraph'"));
    }
    if let Some((Token::Id(_), _)) = tokens.get(pos) {
        pos += 1;
    }
    if tokens.get(pos).map(|t| &t.0) != Some(&Token::Open) {
        return Err(FormatError::syntax(line_at(pos), "expected '{'"));
    }
    pos += 1;
    let mut out = TaggedGraph::default();
    loop {
        match tokens.get(pos).map(|t| &t.0) {
            None => return Err(FormatError::syntax(last_line, "missing '}'")),
            Some(Token::Close) => {
                pos += 1;
                break;
            }
            Some(Token::Separator) => pos += 1,
            Some(Token::Id(_)) => {
                let mut chain = vec![expect_id(&mut pos)?];
                let keyword = matches!(chain[0].as_str(), "graph" | "node" | "edge");
                if tokens.get(pos).map(|t| &t.0) == Some(&Token::Equals) {
                    pos += 1;
                    expect_id(&mut pos)?;
                    continue;
                }
                while tokens.get(pos).map(|t| &t.0) == Some(&Token::Arrow) {
                    pos += 1;
                    chain.push(expect_id(&mut pos)?);
                }
                let mut label = None;
                if tokens.get(pos).map(|t| &t.0) == Some(&Token::LBracket) {
                    pos += 1;
                    loop {
                        match tokens.get(pos).map(|t| &t.0) {
                            Some(Token::RBracket) => {
                                pos += 1;
                                break;
                            }
                            Some(Token::Separator) => pos += 1,
                            Some(Token::Id(_)) => {
                                let key = expect_id(&mut pos)?;
                                if tokens.get(pos).map(|t| &t.0) != Some(&Token::Equals) {
                                    return Err(FormatError::syntax(line_at(pos), "expected '=' in attribute list"));
                                }
                                pos += 1;
                                let value = expect_id(&mut pos)?;
                                if key == "label" {
                                    label = Some(value);
                                }
                            }
                            _ => return Err(FormatError::syntax(line_at(pos), "unterminated attribute list")),
                        }
                    }
                }
                if keyword && chain.len() == 1 {
                    continue;
                }
                if chain.iter().any(String::is_empty) {
                    return Err(FormatError::syntax(line_at(pos.saturating_sub(1)), "empty vertex label"));
                }
                if chain.len() == 1 {
                    out.graph.add_vertex(&chain[0]);
                }
                for pair in chain.windows(2) {
                    let (u, v) = (out.graph.add_vertex(&pair[0]), out.graph.add_vertex(&pair[1]));
                    out.graph.add_arc(u, v);
                    out.tags.touch(&pair[0], &pair[1]);
                    if let Some(label) = &label {
                        for tag in label.split(", ") {
                            out.tags.insert(&pair[0], &pair[1], tag);
                        }
                    }
                }
            }
            Some(_) => return Err(FormatError::syntax(line_at(pos), "unexpected token")),
        }
    }
    if pos < tokens.len() {
        return Err(FormatError::syntax(line_at(pos), "content after closing '}'"));
    }
    Ok(out)
}
