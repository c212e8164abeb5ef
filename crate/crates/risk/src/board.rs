//! Board data: territories, continents, adjacency.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

pub const TERRITORY_COUNT: usize = 42;
pub const CONTINENT_COUNT: usize = 6;

const CLASSIC: &str = include_str!("../../../data/risk/board.txt");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoardError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("expected {expected} territories, found {found}")]
    TerritoryCount { expected: usize, found: usize },
    #[error("expected {expected} continents, found {found}")]
    ContinentCount { expected: usize, found: usize },
    #[error("territory `{0}` listed in more than one continent")]
    DuplicateTerritory(String),
    #[error("territory `{0}` has no adjacency row")]
    MissingAdjacency(String),
    #[error("adjacency names unknown territory `{0}`")]
    UnknownTerritory(String),
    #[error("adjacency is not symmetric: `{0}` lists `{1}` but not the reverse")]
    Asymmetric(String, String),
    #[error("territory `{0}` is adjacent to itself")]
    SelfLoop(String),
    #[error("map is not connected: `{0}` is unreachable")]
    Disconnected(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Continent {
    pub name: String,
    pub bonus: u32,
    pub territories: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Board {
    continents: Vec<Continent>,
    /// Territory to continent index.
    home: BTreeMap<String, usize>,
    adjacency: BTreeMap<String, BTreeSet<String>>,
}

impl Board {
    /// The classic map shipped with the crate.
    pub fn classic() -> Self {
        Self::parse(CLASSIC).expect("shipped board is valid")
    }

    pub fn parse(text: &str) -> Result<Self, BoardError> {
        let mut continents = Vec::new();
        let mut home = BTreeMap::new();
        let mut rows: Vec<(usize, String, Vec<String>)> = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            let err = |message: &str| BoardError::Parse { line, message: message.to_string() };
            let (head, list) = s.split_once(':').ok_or_else(|| err("missing `:`"))?;
            let names: Vec<String> =
                list.split(',').map(str::trim).filter(|n| !n.is_empty()).map(String::from).collect();
            let mut words = head.split_whitespace();
            match words.next() {
                Some("continent") => {
                    let name = words.next().ok_or_else(|| err("continent needs a name"))?;
                    let bonus = words
                        .next()
                        .ok_or_else(|| err("continent needs a bonus"))?
                        .parse()
                        .map_err(|_| err("bonus must be a non-negative integer"))?;
                    if words.next().is_some() {
                        return Err(err("unexpected text before `:`"));
                    }
                    let idx = continents.len();
                    for t in &names {
                        if home.insert(t.clone(), idx).is_some() {
                            return Err(BoardError::DuplicateTerritory(t.clone()));
                        }
                    }
                    continents.push(Continent { name: name.to_string(), bonus, territories: names });
                }
                Some("adjacent") => {
                    let name = words.next().ok_or_else(|| err("adjacent needs a territory"))?;
                    if words.next().is_some() {
                        return Err(err("unexpected text before `:`"));
                    }
                    if rows.iter().any(|(_, n, _)| n == name) {
                        return Err(err("duplicate adjacency row"));
                    }
                    rows.push((line, name.to_string(), names));
                }
                _ => return Err(err("expected `continent` or `adjacent`")),
            }
        }

        if home.len() != TERRITORY_COUNT {
            return Err(BoardError::TerritoryCount { expected: TERRITORY_COUNT, found: home.len() });
        }
        if continents.len() != CONTINENT_COUNT {
            return Err(BoardError::ContinentCount { expected: CONTINENT_COUNT, found: continents.len() });
        }

        let mut adjacency: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (_, name, neighbours) in rows {
            if !home.contains_key(&name) {
                return Err(BoardError::UnknownTerritory(name));
            }
            let set = adjacency.entry(name.clone()).or_default();
            for n in neighbours {
                if !home.contains_key(&n) {
                    return Err(BoardError::UnknownTerritory(n));
                }
                if n == name {
                    return Err(BoardError::SelfLoop(n));
                }
                set.insert(n);
            }
        }
        for t in home.keys() {
            if !adjacency.contains_key(t) {
                return Err(BoardError::MissingAdjacency(t.clone()));
            }
        }
        for (a, ns) in &adjacency {
            for b in ns {
                if !adjacency[b].contains(a) {
                    return Err(BoardError::Asymmetric(a.clone(), b.clone()));
                }
            }
        }

        let board = Self { continents, home, adjacency };
        if let Some(t) = board.unreachable() {
            return Err(BoardError::Disconnected(t));
        }
        Ok(board)
    }

    fn unreachable(&self) -> Option<String> {
        let start = self.adjacency.keys().next()?;
        let mut seen = BTreeSet::from([start.as_str()]);
        let mut queue = VecDeque::from([start.as_str()]);
        while let Some(t) = queue.pop_front() {
            for n in &self.adjacency[t] {
                if seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        self.adjacency.keys().find(|t| !seen.contains(t.as_str())).cloned()
    }

    pub fn continents(&self) -> &[Continent] {
        &self.continents
    }

    /// Territory names in ascending order.
    pub fn territories(&self) -> impl Iterator<Item = &str> {
        self.home.keys().map(String::as_str)
    }

    pub fn contains(&self, territory: &str) -> bool {
        self.home.contains_key(territory)
    }

    pub fn continent_of(&self, territory: &str) -> Option<&Continent> {
        self.home.get(territory).map(|&i| &self.continents[i])
    }

    pub fn neighbours(&self, territory: &str) -> impl Iterator<Item = &str> {
        self.adjacency.get(territory).into_iter().flatten().map(String::as_str)
    }

    pub fn adjacent(&self, a: &str, b: &str) -> bool {
        self.adjacency.get(a).is_some_and(|s| s.contains(b))
    }

    /// Each undirected edge once, `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.adjacency
            .iter()
            .flat_map(|(a, ns)| ns.iter().filter(move |b| a < *b).map(move |b| (a.as_str(), b.as_str())))
    }

    /// Board text in the shipped format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.continents {
            out.push_str(&format!("continent {} {}: {}\n", c.name, c.bonus, c.territories.join(", ")));
        }
        for (t, ns) in &self.adjacency {
            let ns: Vec<&str> = ns.iter().map(String::as_str).collect();
            out.push_str(&format!("adjacent {t}: {}\n", ns.join(", ")));
        }
        out
    }
}
