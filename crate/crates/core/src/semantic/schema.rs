//! Object schema: classes, their qualifications, and the key-to-class map.
//!
//! Text format, one directive per line (`#` starts a comment line):
//!
//! ```text
//! class territory
//!     player: symbol
//!     nbArmies: integer
//! class player
//!     nbTerritories: integer
//! key territory: Alaska, Alberta, Quebec
//! key player: red, blue
//! key phenomenon: phenomenon#*
//! ```
//!
//! Indented `name: kind` lines declare qualifications of the most recent
//! class. Kinds are `integer`, `real`, `symbol`, `timestamp`, `location-ref`.
//! A key pattern ending in `*` matches by prefix; exact keys win, then the
//! longest prefix. `time` is implicitly declared as a timestamp on every class.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::feature::{value_kind_name, SemanticFeature, Value, TIME_QUALIFICATION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueKind {
    Integer,
    Real,
    Symbol,
    Timestamp,
    LocationRef,
}

impl ValueKind {
    pub fn admits(self, value: &Value) -> bool {
        match (self, value) {
            (ValueKind::Integer, Value::Int(_)) => true,
            (ValueKind::Real, Value::Int(_) | Value::Real(_)) => true,
            (ValueKind::Symbol | ValueKind::LocationRef, Value::Symbol(_)) => true,
            (ValueKind::Timestamp, Value::Int(t)) => *t >= 0,
            _ => false,
        }
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueKind::Integer => "integer",
            ValueKind::Real => "real",
            ValueKind::Symbol => "symbol",
            ValueKind::Timestamp => "timestamp",
            ValueKind::LocationRef => "location-ref",
        })
    }
}

impl FromStr for ValueKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "integer" => ValueKind::Integer,
            "real" => ValueKind::Real,
            "symbol" => ValueKind::Symbol,
            "timestamp" => ValueKind::Timestamp,
            "location-ref" => ValueKind::LocationRef,
            other => return Err(format!("unknown value kind `{other}`")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("schema line {line}: {message}")]
pub struct SchemaError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("no class known for key `{key}`")]
    UnknownClass { key: String },
    #[error("qualification `{qualification}` is not declared for class `{class}`")]
    UnknownQualification { class: String, qualification: String },
    #[error("qualification `{qualification}` expects {expected}, got {found}")]
    KindMismatch { qualification: String, expected: ValueKind, found: &'static str },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectSchema {
    classes: BTreeMap<String, BTreeMap<String, ValueKind>>,
    keys: BTreeMap<String, String>,
    prefixes: BTreeMap<String, String>,
}

impl ObjectSchema {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_class(&mut self, class: &str, qualifications: &[(&str, ValueKind)]) -> Result<(), String> {
        if self.classes.contains_key(class) {
            return Err(format!("duplicate class `{class}`"));
        }
        let mut quals = BTreeMap::new();
        for (q, kind) in qualifications {
            declare(&mut quals, q, *kind)?;
        }
        self.classes.insert(class.to_string(), quals);
        Ok(())
    }

    /// Maps a key (or a `prefix*` pattern) to a declared class.
    pub fn map_key(&mut self, pattern: &str, class: &str) -> Result<(), String> {
        if !self.classes.contains_key(class) {
            return Err(format!("key `{pattern}` mapped to unknown class `{class}`"));
        }
        let (table, name) = match pattern.strip_suffix('*') {
            Some(prefix) => (&mut self.prefixes, prefix),
            None => (&mut self.keys, pattern),
        };
        match table.get(name) {
            Some(existing) if existing != class => {
                Err(format!("key `{pattern}` mapped to both `{existing}` and `{class}`"))
            }
            _ => {
                table.insert(name.to_string(), class.to_string());
                Ok(())
            }
        }
    }

    pub fn has_class(&self, class: &str) -> bool {
        self.classes.contains_key(class)
    }

    pub fn classes(&self) -> impl Iterator<Item = &str> {
        self.classes.keys().map(String::as_str)
    }

    pub fn qualification_kind(&self, class: &str, qualification: &str) -> Option<ValueKind> {
        if qualification == TIME_QUALIFICATION {
            return self.classes.contains_key(class).then_some(ValueKind::Timestamp);
        }
        self.classes.get(class)?.get(qualification).copied()
    }

    pub fn class_of(&self, key: &str) -> Option<&str> {
        if let Some(c) = self.keys.get(key) {
            return Some(c);
        }
        self.prefixes
            .iter()
            .filter(|(p, _)| key.starts_with(p.as_str()))
            .max_by_key(|(p, _)| p.len())
            .map(|(_, c)| c.as_str())
    }

    /// Validates and returns the feature with its class resolved.
    pub fn bind(&self, f: SemanticFeature) -> Result<SemanticFeature, ValidationError> {
        let class = validate_feature(&f, self)?;
        Ok(f.with_class(class))
    }

    pub fn parse(text: &str) -> Result<Self, SchemaError> {
        let mut schema = ObjectSchema::new();
        let mut current: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |message: String| SchemaError { line, message };
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if let Some(name) = trimmed.strip_prefix("class ") {
                let name = name.trim();
                if name.is_empty() || name.contains([' ', ',', ':']) {
                    return Err(err(format!("bad class name `{name}`")));
                }
                schema.add_class(name, &[]).map_err(err)?;
                current = Some(name.to_string());
            } else if let Some(rest) = trimmed.strip_prefix("key ") {
                let (class, keys) =
                    rest.split_once(':').ok_or_else(|| err("expected `key <class>: <key>, ...`".into()))?;
                for key in keys.split(',').map(str::trim).filter(|k| !k.is_empty()) {
                    schema.map_key(key, class.trim()).map_err(err)?;
                }
            } else if raw.starts_with([' ', '\t']) {
                let class = current.as_ref().ok_or_else(|| err("qualification outside a class".into()))?;
                let (q, kind) =
                    trimmed.split_once(':').ok_or_else(|| err("expected `<qualification>: <kind>`".into()))?;
                let kind: ValueKind = kind.trim().parse().map_err(err)?;
                let quals = schema.classes.get_mut(class).expect("current class exists");
                declare(quals, q.trim(), kind).map_err(err)?;
            } else {
                return Err(err(format!("unrecognised directive `{trimmed}`")));
            }
        }
        Ok(schema)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (class, quals) in &self.classes {
            out.push_str(&format!("class {class}\n"));
            for (q, kind) in quals {
                out.push_str(&format!("    {q}: {kind}\n"));
            }
        }
        let mut by_class: BTreeMap<&str, Vec<String>> = BTreeMap::new();
        for (k, c) in &self.keys {
            by_class.entry(c).or_default().push(k.clone());
        }
        for (p, c) in &self.prefixes {
            by_class.entry(c).or_default().push(format!("{p}*"));
        }
        for (class, keys) in by_class {
            out.push_str(&format!("key {class}: {}\n", keys.join(", ")));
        }
        out
    }
}

fn declare(quals: &mut BTreeMap<String, ValueKind>, q: &str, kind: ValueKind) -> Result<(), String> {
    if q.is_empty() {
        return Err("empty qualification name".into());
    }
    if q == TIME_QUALIFICATION && kind != ValueKind::Timestamp {
        return Err("`time` can only be a timestamp".into());
    }
    if quals.insert(q.to_string(), kind).is_some() {
        return Err(format!("duplicate qualification `{q}`"));
    }
    Ok(())
}

/// Checks a feature against the schema and returns its resolved class.
pub fn validate_feature(f: &SemanticFeature, schema: &ObjectSchema) -> Result<String, ValidationError> {
    let class = match f.class() {
        Some(c) if schema.has_class(c) => c.to_string(),
        Some(_) => return Err(ValidationError::UnknownClass { key: f.key().to_string() }),
        None => schema
            .class_of(f.key())
            .ok_or_else(|| ValidationError::UnknownClass { key: f.key().to_string() })?
            .to_string(),
    };
    for (q, v) in f.pairs() {
        let kind = schema
            .qualification_kind(&class, q)
            .ok_or_else(|| ValidationError::UnknownQualification { class: class.clone(), qualification: q.clone() })?;
        if !kind.admits(v) {
            return Err(ValidationError::KindMismatch {
                qualification: q.clone(),
                expected: kind,
                found: value_kind_name(v),
            });
        }
    }
    Ok(class)
}
