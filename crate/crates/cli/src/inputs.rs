//! Loading and cross-checking every input named by a manifest.
//!
//! Nothing here touches the output directory: a run only starts once
//! [`load`] has returned without findings.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::path::{Path, PathBuf};

use factual_core::agent::{RuleError, RuleTable};
use factual_core::proximity::{OntologyError, OntologyFile};
use factual_core::semantic::{parse_feature, validate_feature, ObjectSchema, SemanticFeature};
use factual_core::swarm::{DomainAdapter, EngineConfig, EngineSetup, NumericDeltaAdapter};
use factual_risk::{simulate_game, Board, GameEvent, GameState, RiskAdapter, DEFAULT_PLAYERS};

use crate::manifest::{Domain, Mode, RunManifest, STDIN};

/// One problem with one input, located as precisely as the input allows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub file: PathBuf,
    pub line: Option<usize>,
    pub message: String,
}

impl Finding {
    fn new(file: &Path, line: Option<usize>, message: impl Into<String>) -> Self {
        Self { file: file.to_path_buf(), line, message: message.into() }
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}: {}", self.file.display(), line, self.message),
            None => write!(f, "{}: {}", self.file.display(), self.message),
        }
    }
}

/// Everything a run needs, parsed and checked.
pub struct Prepared {
    pub manifest: RunManifest,
    pub setup: EngineSetup,
    pub features: Vec<SemanticFeature>,
}

impl Prepared {
    pub fn adapter(&self) -> Box<dyn DomainAdapter> {
        adapter_for(self.manifest.domain)
    }
}

pub fn adapter_for(domain: Domain) -> Box<dyn DomainAdapter> {
    match domain {
        Domain::Risk => Box::new(RiskAdapter),
        Domain::NumericDelta => Box::new(NumericDeltaAdapter),
    }
}

fn read(path: &Path, findings: &mut Vec<Finding>) -> Option<String> {
    let result = if path.as_os_str() == STDIN {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map(|_| s)
    } else {
        std::fs::read_to_string(path)
    };
    match result {
        Ok(text) => Some(text),
        Err(e) => {
            findings.push(Finding::new(path, None, format!("cannot read: {e}")));
            None
        }
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Reads and checks all inputs of the manifest at `path`.
pub fn load(path: &Path) -> Result<Prepared, Vec<Finding>> {
    let mut findings = Vec::new();
    let Some(text) = read(path, &mut findings) else { return Err(findings) };
    let manifest = match RunManifest::parse(&text) {
        Ok(m) => m.resolve(path.parent().unwrap_or(Path::new("."))),
        Err(message) => return Err(vec![Finding::new(path, None, message)]),
    };

    let schema = read(&manifest.schema, &mut findings).and_then(|t| match ObjectSchema::parse(&t) {
        Ok(s) => Some(s),
        Err(e) => {
            findings.push(Finding::new(&manifest.schema, Some(e.line), e.message));
            None
        }
    });

    let ontology = read(&manifest.ontology, &mut findings).and_then(|t| match OntologyFile::parse(&t) {
        Ok(o) => Some(o),
        Err(OntologyError::Parse { line, message }) => {
            findings.push(Finding::new(&manifest.ontology, Some(line), message));
            None
        }
        Err(e) => {
            findings.push(Finding::new(&manifest.ontology, None, e.to_string()));
            None
        }
    });
    if let Some(o) = &ontology {
        if let Err(e) = o.config.check() {
            findings.push(Finding::new(&manifest.ontology, None, e));
        }
    }

    let rules = read(&manifest.rules, &mut findings).and_then(|t| match RuleTable::parse_all(&t) {
        Ok(r) => Some(r),
        Err(errors) => {
            for e in errors {
                match e {
                    RuleError::Parse { line, message } => {
                        findings.push(Finding::new(&manifest.rules, Some(line), message))
                    }
                    other => findings.push(Finding::new(&manifest.rules, None, other.to_string())),
                }
            }
            None
        }
    });

    let config = match &manifest.config {
        None => Some(EngineConfig::default()),
        Some(p) => read(p, &mut findings).and_then(|t| match toml::from_str::<EngineConfig>(&t) {
            Ok(c) => match c.check() {
                Ok(()) => Some(c),
                Err(e) => {
                    findings.push(Finding::new(p, None, e));
                    None
                }
            },
            Err(e) => {
                let line = e.span().map(|s| t[..s.start].lines().count().max(1));
                findings.push(Finding::new(p, line, e.message()));
                None
            }
        }),
    };

    let features = match manifest.mode {
        Mode::Features => load_features(&manifest, schema.as_ref(), &mut findings),
        Mode::RiskEvents | Mode::RiskSimulate => load_risk(&manifest, schema.as_ref(), &mut findings),
    };

    match (schema, ontology, rules, config, features) {
        (Some(schema), Some(ontology), Some(rules), Some(config), Some(features)) if findings.is_empty() => {
            let setup = EngineSetup { config, rules, schema, ontology: ontology.table, proximity: ontology.config };
            Ok(Prepared { manifest, setup, features })
        }
        _ => Err(findings),
    }
}

/// Flags features whose time goes backwards for their key.
struct OrderCheck {
    last: BTreeMap<String, (u64, usize)>,
}

impl OrderCheck {
    fn new() -> Self {
        Self { last: BTreeMap::new() }
    }

    fn check(&mut self, f: &SemanticFeature, line: usize) -> Result<(), String> {
        if let Some(&(t, at)) = self.last.get(f.key()) {
            if f.time() < t {
                return Err(format!("feature for `{}` at time {} precedes time {} on line {at}", f.key(), f.time(), t));
            }
        }
        self.last.insert(f.key().to_string(), (f.time(), line));
        Ok(())
    }
}

fn load_features(
    m: &RunManifest,
    schema: Option<&ObjectSchema>,
    findings: &mut Vec<Finding>,
) -> Option<Vec<SemanticFeature>> {
    let Some(input) = &m.input else {
        findings.push(Finding::new(&m.output_dir, None, "features mode needs `input`"));
        return None;
    };
    let text = read(input, findings)?;
    let before = findings.len();
    let mut order = OrderCheck::new();
    let mut out = Vec::new();
    for (line, s) in content_lines(&text) {
        let f = match parse_feature(s) {
            Ok(f) => f,
            Err(e) => {
                findings.push(Finding::new(input, Some(line), e.to_string()));
                continue;
            }
        };
        if let Some(schema) = schema {
            if let Err(e) = validate_feature(&f, schema) {
                findings.push(Finding::new(input, Some(line), e.to_string()));
                continue;
            }
        }
        if let Err(e) = order.check(&f, line) {
            findings.push(Finding::new(input, Some(line), e));
        }
        out.push(f);
    }
    (findings.len() == before).then_some(out)
}

fn load_risk(
    m: &RunManifest,
    schema: Option<&ObjectSchema>,
    findings: &mut Vec<Finding>,
) -> Option<Vec<SemanticFeature>> {
    let board = match &m.board {
        None => Board::classic(),
        Some(p) => match Board::parse(&read(p, findings)?) {
            Ok(b) => b,
            Err(factual_risk::BoardError::Parse { line, message }) => {
                findings.push(Finding::new(p, Some(line), message));
                return None;
            }
            Err(e) => {
                findings.push(Finding::new(p, None, e.to_string()));
                return None;
            }
        },
    };

    let (source, events): (PathBuf, Vec<(Option<usize>, GameEvent)>) = match m.mode {
        Mode::RiskEvents => {
            let Some(input) = &m.input else {
                findings.push(Finding::new(&m.output_dir, None, "risk-events mode needs `input`"));
                return None;
            };
            let text = read(input, findings)?;
            let before = findings.len();
            let mut events = Vec::new();
            for (line, s) in content_lines(&text) {
                match s.parse::<GameEvent>() {
                    Ok(e) => events.push((Some(line), e)),
                    Err(message) => findings.push(Finding::new(input, Some(line), message)),
                }
            }
            if findings.len() != before {
                return None;
            }
            (input.clone(), events)
        }
        _ => {
            let (Some(seed), Some(steps)) = (m.seed, m.steps) else {
                findings.push(Finding::new(&m.output_dir, None, "risk-simulate mode needs `seed` and `steps`"));
                return None;
            };
            let players: Vec<&str> = match &m.players {
                Some(p) if p.is_empty() => {
                    findings.push(Finding::new(&m.output_dir, None, "`players` must not be empty"));
                    return None;
                }
                Some(p) => p.iter().map(String::as_str).collect(),
                None => DEFAULT_PLAYERS.to_vec(),
            };
            let log = simulate_game(&board, &players, seed, steps);
            (PathBuf::from(format!("<simulated seed {seed}>")), log.into_iter().map(|e| (None, e)).collect())
        }
    };

    let mut state = GameState::new(board);
    let mut out = Vec::new();
    let before = findings.len();
    for (i, (line, event)) in events.iter().enumerate() {
        let line = line.or(Some(i + 1));
        let emitted = match state.apply_event(event) {
            Ok(f) => f,
            Err(e) => {
                // later events depend on this one; stop at the first rejection
                findings.push(Finding::new(&source, line, format!("illegal event `{event}`: {e}")));
                return None;
            }
        };
        for f in emitted {
            if let Some(schema) = schema {
                if let Err(e) = validate_feature(&f, schema) {
                    findings.push(Finding::new(&source, line, format!("emitted feature {f}: {e}")));
                }
            }
            out.push(f);
        }
    }
    (findings.len() == before).then_some(out)
}
