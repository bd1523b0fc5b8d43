//! Line-oriented text format for structures (`.esd` files) and exporters
//! for transition graphs.
//!
//! ```text
//! # c drops a -> b
//! kind ses;
//! events a b c;
//! cause a -> b;
//! drop c : (a -> b);
//! ```
//!
//! Statements end with `;` and may share or span lines; `#` starts a
//! comment. `kind` comes first and events are declared before use.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bundle::{Bes, Bundle, Des, Ebes};
use crate::dynamic::Dces;
use crate::error::{Error, Result};
use crate::events::{fmt_set, EventId, EventSet, GraphNode, Relation, TransitionGraph, Triple};
use crate::growing::Ges;
use crate::hierarchy::Clause;
use crate::hierarchy::{Kind, Structure};
use crate::prime::Rpes;
use crate::rces::{Enabling, Rces};
use crate::shrinking::Ses;

/// A parsed description: the family, the declared events and the clauses.
/// Conflict clauses name the smaller event first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EsDocument {
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub events: EventSet,
    pub clauses: BTreeSet<Clause>,
}

fn allowed(kind: Kind) -> &'static [&'static str] {
    match kind {
        Kind::Rpes => &["conflict", "cause"],
        Kind::Bes | Kind::Des => &["conflict", "bundle"],
        Kind::Ebes => &["disable", "bundle"],
        Kind::Ses => &["conflict", "cause", "drop"],
        Kind::Ges => &["cause", "add"],
        Kind::Dces => &["cause", "drop", "add"],
        Kind::Rces => &["enable"],
    }
}

fn conflict(a: EventId, b: EventId) -> Clause {
    if a <= b {
        Clause::Conflict(a, b)
    } else {
        Clause::Conflict(b, a)
    }
}

impl EsDocument {
    pub fn new(kind: Kind, events: EventSet) -> Self {
        EsDocument { kind, name: None, description: None, events, clauses: BTreeSet::new() }
    }

    /// Builds and validates the structure.
    pub fn to_structure(&self) -> Result<Structure> {
        let mut conflicts = Relation::new();
        let mut causes = Relation::new();
        let mut disabling = Relation::new();
        let mut bundles = BTreeSet::new();
        let mut shrink = BTreeSet::new();
        let mut grow = BTreeSet::new();
        let mut enabling = Enabling::new();
        for c in &self.clauses {
            match c.clone() {
                Clause::Conflict(a, b) => {
                    conflicts.insert((a, b));
                }
                Clause::Cause(a, b) => {
                    causes.insert((a, b));
                }
                Clause::Disable(a, b) => {
                    disabling.insert((a, b));
                }
                Clause::Bundle(b) => {
                    bundles.insert(b);
                }
                Clause::Drop(t) => {
                    shrink.insert(t);
                }
                Clause::Add(t) => {
                    grow.insert(t);
                }
                Clause::Enable(w, z) => {
                    enabling.insert((w, z));
                }
            }
        }
        let e = self.events.clone();
        Ok(match self.kind {
            Kind::Rpes => Rpes::new(e, conflicts, causes)?.into(),
            Kind::Bes => Bes::new(e, conflicts, bundles)?.into(),
            Kind::Ebes => Ebes::new(e, disabling, bundles)?.into(),
            Kind::Des => Des::new(e, conflicts, bundles)?.into(),
            Kind::Ses => Ses::new(e, conflicts, causes, shrink)?.into(),
            Kind::Ges => Ges::new(e, causes, grow)?.into(),
            Kind::Dces => Dces::new(e, causes, shrink, grow)?.into(),
            Kind::Rces => Rces::new(e, enabling)?.into(),
        })
    }

    pub fn from_structure(s: &Structure) -> Self {
        let pairs = |r: &Relation, f: fn(EventId, EventId) -> Clause| -> Vec<Clause> {
            r.iter().map(|(a, b)| f(a.clone(), b.clone())).collect()
        };
        let triples = |t: &BTreeSet<Triple>, f: fn(Triple) -> Clause| -> Vec<Clause> { t.iter().cloned().map(f).collect() };
        let bundles = |b: &BTreeSet<Bundle>| -> Vec<Clause> { b.iter().cloned().map(Clause::Bundle).collect() };
        let clauses: Vec<Clause> = match s {
            Structure::Rpes(x) => [pairs(x.conflict(), conflict), pairs(x.enabling(), Clause::Cause)].concat(),
            Structure::Bes(x) => [pairs(x.conflict(), conflict), bundles(x.bundles())].concat(),
            Structure::Ebes(x) => [pairs(x.disabling(), Clause::Disable), bundles(x.bundles())].concat(),
            Structure::Des(x) => [pairs(x.conflict(), conflict), bundles(x.bundles())].concat(),
            Structure::Ses(x) => [
                pairs(x.conflict(), conflict),
                pairs(x.enabling(), Clause::Cause),
                triples(x.shrink(), Clause::Drop),
            ]
            .concat(),
            Structure::Ges(x) => [pairs(x.enabling(), Clause::Cause), triples(x.grow(), Clause::Add)].concat(),
            Structure::Dces(x) => [
                pairs(x.enabling(), Clause::Cause),
                triples(x.shrink(), Clause::Drop),
                triples(x.grow(), Clause::Add),
            ]
            .concat(),
            Structure::Rces(x) => x.enabling().iter().map(|(w, z)| Clause::Enable(w.clone(), z.clone())).collect(),
        };
        EsDocument {
            kind: s.kind(),
            name: None,
            description: None,
            events: s.events().clone(),
            clauses: clauses.into_iter().collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Str(String),
    Sym(&'static str),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: [&str; 11] = ["->", "|-", ";", "~", "<", "{", "}", ",", ":", "(", ")"];
const ALL_SUBSETS: &str = "all-subsets-of";

fn ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '.' || c == '\''
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> Error {
    Error::Syntax { line, col, message: message.into() }
}

fn lex(text: &str) -> Result<(Vec<Token>, (usize, usize))> {
    let mut out = Vec::new();
    let (mut line, mut col) = (1, 1);
    let mut rest = text;
    while let Some(c) = rest.chars().next() {
        let start = (line, col);
        let taken = if c == '\n' {
            line += 1;
            col = 0;
            1
        } else if c.is_whitespace() {
            c.len_utf8()
        } else if c == '#' {
            rest.find('\n').unwrap_or(rest.len())
        } else if c == '"' {
            let body = &rest[1..];
            let end = body.find(['"', '\n']).filter(|&i| body[i..].starts_with('"'));
            let Some(end) = end else { return Err(syntax(line, col, "unterminated string")) };
            out.push(Token { tok: Tok::Str(body[..end].to_string()), line, col });
            end + 2
        } else if rest.starts_with(ALL_SUBSETS) && !rest[ALL_SUBSETS.len()..].starts_with(ident_char) {
            out.push(Token { tok: Tok::Ident(ALL_SUBSETS.into()), line, col });
            ALL_SUBSETS.len()
        } else if let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            out.push(Token { tok: Tok::Sym(sym), line, col });
            sym.len()
        } else if ident_char(c) {
            let end = rest.find(|ch: char| !ident_char(ch)).unwrap_or(rest.len());
            out.push(Token { tok: Tok::Ident(rest[..end].to_string()), line, col });
            end
        } else {
            return Err(syntax(start.0, start.1, format!("unexpected character {c:?}")));
        };
        col += rest[..taken].chars().count();
        rest = &rest[taken..];
    }
    Ok((out, (line, col)))
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    end: (usize, usize),
    kind: Option<Kind>,
    events: EventSet,
}

impl Parser {
    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map_or(self.end, |t| (t.line, t.col))
    }

    fn fail(&self, message: impl Into<String>) -> Error {
        let (l, c) = self.here();
        syntax(l, c, message)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn expect(&mut self, sym: &'static str) -> Result<()> {
        if self.peek() == Some(&Tok::Sym(sym)) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.fail(format!("expected `{sym}`")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) if s != ALL_SUBSETS => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.fail(format!("expected {what}"))),
        }
    }

    fn event(&mut self) -> Result<EventId> {
        let (line, col) = self.here();
        let name = self.ident("an event name")?;
        let e = EventId::new(&name)?;
        if !self.events.contains(&e) {
            return Err(Error::UndeclaredEvent { line, col, name });
        }
        Ok(e)
    }

    fn set(&mut self) -> Result<EventSet> {
        self.expect("{")?;
        let mut out = EventSet::new();
        if self.peek() == Some(&Tok::Sym("}")) {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            out.insert(self.event()?);
            if self.peek() == Some(&Tok::Sym("}")) {
                self.pos += 1;
                return Ok(out);
            }
            self.expect(",")?;
        }
    }

    /// `m : (c -> t)`
    fn triple(&mut self) -> Result<Triple> {
        let m = self.event()?;
        self.expect(":")?;
        self.expect("(")?;
        let c = self.event()?;
        self.expect("->")?;
        let t = self.event()?;
        self.expect(")")?;
        Ok(Triple { modifier: m, cause: c, target: t })
    }

    fn statement(&mut self, doc: &mut Option<EsDocument>) -> Result<()> {
        let (line, col) = self.here();
        let word = self.ident("a statement keyword")?;
        if word == "kind" {
            if self.kind.is_some() {
                return Err(syntax(line, col, "kind is declared twice"));
            }
            let (kl, kc) = self.here();
            let name = self.ident("a family name")?;
            let kind = Kind::from_str(&name).map_err(|_| syntax(kl, kc, format!("unknown family {name:?}")))?;
            self.kind = Some(kind);
            *doc = Some(EsDocument::new(kind, EventSet::new()));
            return self.expect(";");
        }
        let Some(d) = doc.as_mut() else {
            return Err(syntax(line, col, "expected `kind` before any other statement"));
        };
        let kind = d.kind;
        let mut clauses = Vec::new();
        match word.as_str() {
            "name" => d.name = Some(self.ident("a name")?),
            "description" => match self.peek() {
                Some(Tok::Str(s)) => {
                    d.description = Some(s.clone());
                    self.pos += 1;
                }
                _ => return Err(self.fail("expected a quoted description")),
            },
            "events" => {
                while let Some(Tok::Ident(_)) = self.peek() {
                    let (el, ec) = self.here();
                    let e = EventId::new(self.ident("an event name")?)?;
                    if !self.events.insert(e.clone()) {
                        return Err(syntax(el, ec, format!("event {e} is declared twice")));
                    }
                    d.events.insert(e);
                }
            }
            "conflict" => {
                let a = self.event()?;
                self.expect("~")?;
                clauses.push(conflict(a, self.event()?));
            }
            "cause" => {
                let a = self.event()?;
                self.expect("->")?;
                clauses.push(Clause::Cause(a, self.event()?));
            }
            "disable" => {
                let a = self.event()?;
                self.expect("<")?;
                clauses.push(Clause::Disable(a, self.event()?));
            }
            "bundle" => {
                let members = self.set()?;
                self.expect("->")?;
                clauses.push(Clause::Bundle(Bundle { members, target: self.event()? }));
            }
            "drop" => clauses.push(Clause::Drop(self.triple()?)),
            "add" => clauses.push(Clause::Add(self.triple()?)),
            "enable" => {
                if self.peek() == Some(&Tok::Ident(ALL_SUBSETS.into())) {
                    self.pos += 1;
                    let s = self.set()?;
                    let mut except = Vec::new();
                    if self.peek() == Some(&Tok::Ident("except".into())) {
                        self.pos += 1;
                        while self.peek() == Some(&Tok::Sym("{")) {
                            except.push(self.set()?);
                        }
                    }
                    clauses.extend(Rces::all_subsets_except(&s, &except).into_iter().map(|(w, z)| Clause::Enable(w, z)));
                } else {
                    let w = self.set()?;
                    self.expect("|-")?;
                    clauses.push(Clause::Enable(w, self.set()?));
                }
            }
            other => return Err(syntax(line, col, format!("unknown statement {other:?}"))),
        }
        if !matches!(word.as_str(), "name" | "description" | "events") && !allowed(kind).contains(&word.as_str()) {
            return Err(Error::IllegalClause { line, col, clause: word, kind: kind.name() });
        }
        d.clauses.extend(clauses);
        self.expect(";")
    }
}

/// Reads a document. Undeclared events, clauses foreign to the family and
/// malformed text are reported with their position; well-formedness of the
/// structure is checked by [`EsDocument::to_structure`].
pub fn parse(text: &str) -> Result<EsDocument> {
    let (toks, end) = lex(text)?;
    let mut p = Parser { toks, pos: 0, end, kind: None, events: EventSet::new() };
    let mut doc = None;
    while p.pos < p.toks.len() {
        p.statement(&mut doc)?;
    }
    doc.ok_or_else(|| syntax(end.0, end.1, "missing `kind` statement"))
}

pub fn parse_structure(text: &str) -> Result<Structure> {
    parse(text)?.to_structure()
}

/// Canonical text: kind, metadata and events first, then one clause per
/// line in lexicographic order. Initial enablings of an RCES are written in
/// the except form when that lists fewer sets.
pub fn render(doc: &EsDocument) -> String {
    let mut out = format!("kind {};\n", doc.kind);
    if let Some(n) = &doc.name {
        let _ = writeln!(out, "name {n};");
    }
    if let Some(d) = &doc.description {
        let _ = writeln!(out, "description \"{d}\";");
    }
    let names: Vec<&str> = doc.events.iter().map(EventId::as_str).collect();
    if names.is_empty() {
        out.push_str("events;\n");
    } else {
        let _ = writeln!(out, "events {};", names.join(" "));
    }
    let mut clauses = doc.clauses.clone();
    let mut lines = Vec::new();
    if doc.kind == Kind::Rces {
        let all: Enabling = Rces::all_subsets_except(&doc.events, &[]);
        let initial: BTreeSet<&(EventSet, EventSet)> = all.iter().collect();
        let present: Vec<&(EventSet, EventSet)> =
            initial.iter().copied().filter(|(w, z)| clauses.contains(&Clause::Enable(w.clone(), z.clone()))).collect();
        let missing: Vec<&EventSet> =
            initial.iter().filter(|p| !present.contains(p)).map(|(_, z)| z).collect();
        if missing.len() < present.len() {
            for (w, z) in present {
                clauses.remove(&Clause::Enable(w.clone(), z.clone()));
            }
            let mut line = format!("enable {ALL_SUBSETS} {}", fmt_set(&doc.events));
            if !missing.is_empty() {
                line.push_str(" except");
                for z in missing {
                    let _ = write!(line, " {}", fmt_set(z));
                }
            }
            lines.push(line);
        }
    }
    lines.extend(clauses.iter().map(|c| c.to_string()));
    lines.sort();
    for l in lines {
        let _ = writeln!(out, "{l};");
    }
    out
}

pub fn render_structure(s: &Structure) -> String {
    render(&EsDocument::from_structure(s))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphFormat {
    Dot,
    Json,
}

impl FromStr for GraphFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dot" => Ok(GraphFormat::Dot),
            "json" => Ok(GraphFormat::Json),
            other => Err(Error::UnknownName { what: "graph format", name: other.to_string() }),
        }
    }
}

fn caus_label(r: &Relation) -> String {
    let pairs: Vec<String> = r.iter().map(|(c, t)| format!("{c}->{t}")).collect();
    pairs.join(" ")
}

/// Nodes are numbered in their sorted order. An empty graph is exported as
/// the single empty configuration.
pub fn export_graph(g: &TransitionGraph, format: GraphFormat) -> String {
    let mut nodes: BTreeSet<&GraphNode> = g.nodes.iter().collect();
    let empty = GraphNode::config(EventSet::new());
    if nodes.is_empty() {
        nodes.insert(&empty);
    }
    let ids: BTreeMap<&GraphNode, usize> = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let mut edges: Vec<(usize, usize)> = g.edges.iter().map(|(a, b)| (ids[a], ids[b])).collect();
    edges.sort_unstable();
    match format {
        GraphFormat::Json => {
            let nodes: Vec<serde_json::Value> = ids
                .iter()
                .map(|(n, &id)| {
                    let mut v = json!({ "id": id, "config": n.config });
                    if let Some(c) = &n.caus {
                        v["caus"] = json!(c);
                    }
                    v
                })
                .collect();
            json!({ "nodes": nodes, "edges": edges }).to_string()
        }
        GraphFormat::Dot => {
            let mut out = String::from("digraph transitions {\n");
            for (n, id) in &ids {
                let mut label = fmt_set(&n.config);
                if let Some(c) = &n.caus {
                    let _ = write!(label, "\\n{}", caus_label(c));
                }
                let _ = writeln!(out, "  n{id} [label=\"{label}\"];");
            }
            for (a, b) in edges {
                let _ = writeln!(out, "  n{a} -> n{b};");
            }
            out.push_str("}\n");
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamic::StepMode;
    use crate::events::event_set;
    use crate::hierarchy::catalog;

    const SIGMA_XI: &str = "kind ses; events a b c; cause a -> b; drop c : (a -> b);";

    fn pos(e: Error) -> (usize, usize) {
        e.position().unwrap_or_else(|| panic!("no position: {e}"))
    }

    #[test]
    fn one_line_document() {
        let s = parse_structure(SIGMA_XI).unwrap();
        assert_eq!(s, catalog::sigma_xi().into());
    }

    #[test]
    fn empty_event_list() {
        let s = parse_structure("kind bes;\nevents;\n").unwrap();
        assert!(s.events().is_empty());
        assert_eq!(s.configurations().unwrap().len(), 1);
    }

    #[test]
    fn canonical_order() {
        let text = render_structure(&catalog::sigma_xi().into());
        assert_eq!(text, "kind ses;\nevents a b c;\ncause a -> b;\ndrop c : (a -> b);\n");
        let r = render_structure(&catalog::fig3b().into());
        let clauses: Vec<&str> = r.lines().skip(2).collect();
        let mut sorted = clauses.clone();
        sorted.sort();
        assert_eq!(clauses, sorted);
    }

    #[test]
    fn except_form() {
        let text = render_structure(&catalog::rho().into());
        assert!(text.contains("enable all-subsets-of {a,b,c} except {a,c};"), "{text}");
        assert!(text.contains("enable {b} |- {a,c};"));
        assert_eq!(parse_structure(&text).unwrap(), catalog::rho().into());
        let sigma = render_structure(&catalog::rho_sigma().into());
        assert!(sigma.contains("enable all-subsets-of {e,f} except {e,f};"), "{sigma}");
        let gamma = render_structure(&catalog::rho_gamma().into());
        assert!(!gamma.contains(ALL_SUBSETS), "{gamma}");
    }

    #[test]
    fn catalog_round_trips() {
        for (name, s) in catalog::all() {
            let text = render_structure(&s);
            let back = parse_structure(&text).unwrap_or_else(|e| panic!("{name}: {e}\n{text}"));
            assert_eq!(back, s, "{name}");
            assert_eq!(render_structure(&back), text, "{name}");
        }
    }

    #[test]
    fn metadata_and_comments() {
        let text = "# farm\nkind rpes; name demo;\ndescription \"two events\";\nevents a\n  b; # trailing\ncause a -> b;\n";
        let d = parse(text).unwrap();
        assert_eq!(d.name.as_deref(), Some("demo"));
        assert_eq!(d.description.as_deref(), Some("two events"));
        assert_eq!(parse(&render(&d)).unwrap(), d);
    }

    #[test]
    fn positioned_errors() {
        assert_eq!(pos(parse("kind ses;\nevents a b;\ncause a -> c;").unwrap_err()), (3, 12));
        assert!(matches!(parse("kind ses;\nevents a b;\ncause a -> c;"), Err(Error::UndeclaredEvent { .. })));
        let e = parse("kind ges;\nevents a b;\n  conflict a ~ b;").unwrap_err();
        assert!(matches!(e, Error::IllegalClause { .. }));
        assert_eq!(pos(e), (3, 3));
        assert_eq!(pos(parse("kind ses;\nevents a;\ncause a => a;").unwrap_err()), (3, 9));
        assert_eq!(pos(parse("events a;").unwrap_err()), (1, 1));
        assert_eq!(pos(parse("kind ses; events a").unwrap_err()), (1, 19));
        assert_eq!(pos(parse("kind nope;").unwrap_err()), (1, 6));
        assert_eq!(pos(parse("kind ses; events a a;").unwrap_err()), (1, 20));
        assert!(matches!(parse(""), Err(Error::Syntax { .. })));
    }

    #[test]
    fn validation_is_separate() {
        let text = "kind dces; events a c t; cause c -> t; add a : (c -> t); drop a : (c -> t);";
        let d = parse(text).unwrap();
        let err = d.to_structure().unwrap_err();
        assert!(err.to_string().contains("adds and drops the same cause"), "{err}");
    }

    #[test]
    fn graph_json_is_canonical() {
        let g = catalog::rho().transition_graph().unwrap();
        let v: serde_json::Value = serde_json::from_str(&export_graph(&g, GraphFormat::Json)).unwrap();
        assert_eq!(v["nodes"].as_array().unwrap().len(), 7);
        assert_eq!(v["edges"].as_array().unwrap().len(), 12);
        assert_eq!(v["nodes"][0], json!({ "config": [], "id": 0 }));
        let text = export_graph(&g, GraphFormat::Json);
        assert!(text.starts_with("{\"edges\":[[0,"), "{text}");
    }

    #[test]
    fn empty_graph_export() {
        let text = export_graph(&TransitionGraph::default(), GraphFormat::Json);
        assert_eq!(text, "{\"edges\":[],\"nodes\":[{\"config\":[],\"id\":0}]}");
        let dot = export_graph(&TransitionGraph::default(), GraphFormat::Dot);
        assert!(dot.contains("n0 [label=\"{}\"];"));
    }

    #[test]
    fn dot_shows_causality() {
        let g = catalog::fig9().state_graph(StepMode::Single).unwrap();
        let dot = export_graph(&g, GraphFormat::Dot);
        let ad = dot.lines().filter(|l| l.contains("label=\"{a,d}")).count();
        let states: BTreeSet<_> = g.nodes.iter().filter(|n| n.config == event_set(["a", "d"])).map(|n| n.caus.clone()).collect();
        assert_eq!(ad, states.len());
        assert_eq!(ad, 2);
    }
}
