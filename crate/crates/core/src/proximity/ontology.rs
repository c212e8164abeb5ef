//! Ontology tables, the spatial graph, and their shared text format.
//!
//! ```text
//! # tau and lambda
//! @tau 5
//! @lambda 0.5
//! # spatial graph edges (undirected)
//! @edge Alaska, Kamchatka
//! # semantic entries: atomA, atomB, value in [-1, 1]
//! Alaska, Kamchatka, 0.4
//! class:player, class:territory, 0.1
//! ```
//!
//! Atoms are object keys, or `class:<name>` for class-level entries.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

const CLASS_PREFIX: &str = "class:";

/// The atom naming a whole object class.
pub fn class_atom(class: &str) -> String {
    format!("{CLASS_PREFIX}{class}")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OntologyError {
    #[error("proximity {value} for ({a}, {b}) is outside [-1, 1]")]
    OutOfRange { a: String, b: String, value: f64 },
    #[error("ontology line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn ordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Entry {
    a: String,
    b: String,
    value: f64,
}

/// Symmetric table of semantic proximities between atoms.
///
/// Unlisted pairs are neutral (0); `(a, a)` is 1 unless set explicitly.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<Entry>", into = "Vec<Entry>")]
pub struct OntologyTable {
    entries: BTreeMap<(String, String), f64>,
}

impl From<Vec<Entry>> for OntologyTable {
    fn from(rows: Vec<Entry>) -> Self {
        let entries = rows.into_iter().map(|e| (ordered(&e.a, &e.b), e.value)).collect();
        Self { entries }
    }
}

impl From<OntologyTable> for Vec<Entry> {
    fn from(t: OntologyTable) -> Self {
        t.entries.into_iter().map(|((a, b), value)| Entry { a, b, value }).collect()
    }
}

impl OntologyTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, a: &str, b: &str, value: f64) -> Result<(), OntologyError> {
        if !(-1.0..=1.0).contains(&value) {
            return Err(OntologyError::OutOfRange { a: a.into(), b: b.into(), value });
        }
        self.entries.insert(ordered(a, b), value);
        Ok(())
    }

    pub fn remove(&mut self, a: &str, b: &str) -> Option<f64> {
        self.entries.remove(&ordered(a, b))
    }

    /// The stored entry, if any.
    pub fn explicit(&self, a: &str, b: &str) -> Option<f64> {
        self.entries.get(&ordered(a, b)).copied()
    }

    /// Stored entry, else 1 for identical atoms, else 0.
    pub fn get(&self, a: &str, b: &str) -> f64 {
        self.explicit(a, b).unwrap_or(if a == b { 1.0 } else { 0.0 })
    }

    /// Entries mentioning `atom`, as (other atom, value).
    pub fn entries_with<'a>(&'a self, atom: &'a str) -> impl Iterator<Item = (&'a str, f64)> + 'a {
        self.entries.iter().filter_map(move |((a, b), v)| {
            if a == atom {
                Some((b.as_str(), *v))
            } else if b == atom {
                Some((a.as_str(), *v))
            } else {
                None
            }
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.entries.iter().map(|((a, b), v)| (a.as_str(), b.as_str(), *v))
    }
}

/// Undirected graph over location identifiers.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpatialGraph {
    adjacency: BTreeMap<String, BTreeSet<String>>,
}

impl SpatialGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_edge(&mut self, a: &str, b: &str) {
        self.adjacency.entry(a.to_string()).or_default().insert(b.to_string());
        self.adjacency.entry(b.to_string()).or_default().insert(a.to_string());
    }

    pub fn add_node(&mut self, a: &str) {
        self.adjacency.entry(a.to_string()).or_default();
    }

    pub fn contains(&self, a: &str) -> bool {
        self.adjacency.contains_key(a)
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.adjacency.iter().flat_map(|(a, ns)| {
            ns.iter().filter(move |b| a.as_str() < b.as_str()).map(move |b| (a.as_str(), b.as_str()))
        })
    }

    /// Breadth-first hop count; `None` when unknown or unreachable.
    pub fn hop_distance(&self, from: &str, to: &str) -> Option<u32> {
        if !self.contains(from) || !self.contains(to) {
            return None;
        }
        if from == to {
            return Some(0);
        }
        let mut seen = BTreeSet::from([from]);
        let mut queue = VecDeque::from([(from, 0u32)]);
        while let Some((node, d)) = queue.pop_front() {
            for next in &self.adjacency[node] {
                if next == to {
                    return Some(d + 1);
                }
                if seen.insert(next.as_str()) {
                    queue.push_back((next.as_str(), d + 1));
                }
            }
        }
        None
    }
}

/// Parameters of the time and spatial kernels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProximityConfig {
    /// Time window in steps; gaps at or beyond it are unrelated.
    pub time_window: u64,
    /// Per-hop decay factor in (0, 1].
    pub hop_decay: f64,
    pub graph: SpatialGraph,
}

impl Default for ProximityConfig {
    fn default() -> Self {
        Self { time_window: 5, hop_decay: 0.5, graph: SpatialGraph::new() }
    }
}

impl ProximityConfig {
    pub fn new(time_window: u64, hop_decay: f64, graph: SpatialGraph) -> Result<Self, String> {
        let c = Self { time_window, hop_decay, graph };
        c.check()?;
        Ok(c)
    }

    pub fn check(&self) -> Result<(), String> {
        if self.time_window < 1 {
            return Err("tau must be at least 1".into());
        }
        if !(self.hop_decay > 0.0 && self.hop_decay <= 1.0) {
            return Err(format!("lambda {} must lie in (0, 1]", self.hop_decay));
        }
        Ok(())
    }
}

/// Parsed ontology file: semantic table plus proximity configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct OntologyFile {
    pub table: OntologyTable,
    pub config: ProximityConfig,
}

impl OntologyFile {
    pub fn parse(text: &str) -> Result<Self, OntologyError> {
        let mut table = OntologyTable::new();
        let mut config = ProximityConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |message: String| OntologyError::Parse { line, message };
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if let Some(directive) = trimmed.strip_prefix('@') {
                let (name, arg) = directive.split_once(char::is_whitespace).unwrap_or((directive, ""));
                let arg = arg.trim();
                match name {
                    "tau" => {
                        config.time_window = arg.parse().map_err(|_| err(format!("bad tau `{arg}`")))?;
                    }
                    "lambda" => {
                        config.hop_decay = arg.parse().map_err(|_| err(format!("bad lambda `{arg}`")))?;
                    }
                    "edge" => {
                        let (a, b) = arg.split_once(',').ok_or_else(|| err("expected `@edge a, b`".into()))?;
                        let (a, b) = (a.trim(), b.trim());
                        if a.is_empty() || b.is_empty() || a == b {
                            return Err(err(format!("bad edge `{arg}`")));
                        }
                        config.graph.add_edge(a, b);
                    }
                    "node" => {
                        if arg.is_empty() {
                            return Err(err("expected `@node name`".into()));
                        }
                        config.graph.add_node(arg);
                    }
                    other => return Err(err(format!("unknown directive `@{other}`"))),
                }
                config.check().map_err(err)?;
                continue;
            }
            let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            let [a, b, v] = fields[..] else {
                return Err(err("expected `atomA, atomB, value`".into()));
            };
            if a.is_empty() || b.is_empty() {
                return Err(err("empty atom".into()));
            }
            let value: f64 = v.parse().map_err(|_| err(format!("bad value `{v}`")))?;
            if let Some(prev) = table.explicit(a, b) {
                if prev != value {
                    return Err(err(format!("conflicting entries for ({a}, {b})")));
                }
            }
            table.set(a, b, value).map_err(|e| err(e.to_string()))?;
        }
        Ok(Self { table, config })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("@tau {}\n@lambda {}\n", self.config.time_window, self.config.hop_decay));
        for (a, b) in self.config.graph.edges() {
            out.push_str(&format!("@edge {a}, {b}\n"));
        }
        for (a, b, v) in self.table.iter() {
            out.push_str(&format!("{a}, {b}, {v}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_is_symmetric_and_bounded() {
        let mut t = OntologyTable::new();
        t.set("red", "Alaska", 0.7).unwrap();
        assert_eq!(t.get("Alaska", "red"), 0.7);
        assert_eq!(t.get("Alaska", "Alaska"), 1.0);
        assert_eq!(t.get("Alaska", "Peru"), 0.0);
        assert!(t.set("a", "b", 1.5).is_err());
        t.set("a", "a", 0.2).unwrap();
        assert_eq!(t.get("a", "a"), 0.2);
        assert_eq!(t.entries_with("Alaska").collect::<Vec<_>>(), vec![("red", 0.7)]);
    }

    #[test]
    fn hop_distance_by_bfs() {
        let mut g = SpatialGraph::new();
        g.add_edge("a", "b");
        g.add_edge("b", "c");
        g.add_node("z");
        assert_eq!(g.hop_distance("a", "a"), Some(0));
        assert_eq!(g.hop_distance("a", "c"), Some(2));
        assert_eq!(g.hop_distance("c", "a"), Some(2));
        assert_eq!(g.hop_distance("a", "z"), None);
        assert_eq!(g.hop_distance("a", "nowhere"), None);
    }

    #[test]
    fn parses_file_format() {
        let text = "# test\n@tau 10\n@lambda 0.25\n@edge a, b\n@node lone\nred, Alaska, 0.7\nclass:player, class:territory, -0.1\n";
        let f = OntologyFile::parse(text).unwrap();
        assert_eq!(f.config.time_window, 10);
        assert_eq!(f.config.hop_decay, 0.25);
        assert_eq!(f.config.graph.hop_distance("b", "a"), Some(1));
        assert!(f.config.graph.contains("lone"));
        assert_eq!(f.table.get(&class_atom("territory"), &class_atom("player")), -0.1);
        let again = OntologyFile::parse(&f.to_text()).unwrap();
        assert_eq!(again.table, f.table);
        assert_eq!(again.config.time_window, 10);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let cases = [
            ("@tau 0\n", 1),
            ("\n@lambda 1.5\n", 2),
            ("a, b\n", 1),
            ("a, b, 2\n", 1),
            ("a, b, 0.1\nb, a, 0.2\n", 2),
            ("@edge a\n", 1),
            ("@bogus 1\n", 1),
        ];
        for (text, line) in cases {
            match OntologyFile::parse(text) {
                Err(OntologyError::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn serde_keeps_entries() {
        let mut t = OntologyTable::new();
        t.set("b", "a", -0.7).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(json, r#"[{"a":"a","b":"b","value":-0.7}]"#);
        assert_eq!(serde_json::from_str::<OntologyTable>(&json).unwrap(), t);
    }
}
