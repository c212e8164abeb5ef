//! Semantic features: `(key, qualification, value, ..., time, T)` records.
//!
//! A feature describes one world object at one discrete time step. The text
//! form is the interchange format for feature streams: one literal per line,
//! comma separated inside parentheses, whitespace after commas ignored.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Name of the mandatory timestamp qualification.
pub const TIME_QUALIFICATION: &str = "time";

/// A typed qualification value.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Real(f64),
    Symbol(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(v) => Some(*v as f64),
            Value::Real(v) => Some(*v),
            Value::Symbol(_) => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            Value::Symbol(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        !matches!(self, Value::Symbol(_))
    }

    /// `self - other` for numeric values. Integer pairs stay integral.
    pub fn numeric_sub(&self, other: &Value) -> Option<Value> {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => {
                Some(a.checked_sub(*b).map(Value::Int).unwrap_or(Value::Real(*a as f64 - *b as f64)))
            }
            _ => Some(Value::Real(self.as_f64()? - other.as_f64()?)),
        }
    }

    pub fn negated(&self) -> Option<Value> {
        match self {
            Value::Int(v) => Some(v.checked_neg().map(Value::Int).unwrap_or(Value::Real(-(*v as f64)))),
            Value::Real(v) => Some(Value::Real(-v)),
            Value::Symbol(_) => None,
        }
    }

    fn kind_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "integer",
            Value::Real(_) => "real",
            Value::Symbol(_) => "symbol",
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Real(v) => {
                let s = v.to_string();
                if s.contains('.') {
                    f.write_str(&s)
                } else {
                    write!(f, "{s}.0")
                }
            }
            Value::Symbol(s) => f.write_str(s),
        }
    }
}

/// Errors raised while parsing or constructing a feature.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeatureError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("odd number of qualification/value tokens at byte {offset}")]
    OddPairCount { offset: usize },
    #[error("missing `time` qualification")]
    MissingTime,
    #[error("`time` must be a non-negative integer (byte {offset})")]
    InvalidTime { offset: usize },
    #[error("duplicate qualification `{name}` at byte {offset}")]
    DuplicateQualification { name: String, offset: usize },
    #[error("invalid token `{token}`: {message}")]
    InvalidToken { token: String, message: String },
}

/// One `(key, (qualification, value)+)` record at a discrete time step.
///
/// Invariants: at least one pair; qualification names unique; exactly one
/// `time` pair whose integer value equals [`SemanticFeature::time`]. The
/// class is resolved from the schema and is `None` on freshly parsed input.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticFeature {
    key: String,
    class: Option<String>,
    pairs: Vec<(String, Value)>,
    time: u64,
}

impl SemanticFeature {
    pub fn new(key: impl Into<String>, pairs: Vec<(String, Value)>) -> Result<Self, FeatureError> {
        let key = key.into();
        check_token(&key)?;
        let mut time = None;
        for (i, (q, v)) in pairs.iter().enumerate() {
            check_token(q)?;
            if classify(q) != Token::Symbol {
                return Err(FeatureError::InvalidToken {
                    token: q.clone(),
                    message: "qualification names must be symbols".into(),
                });
            }
            if pairs[..i].iter().any(|(p, _)| p == q) {
                return Err(FeatureError::DuplicateQualification { name: q.clone(), offset: 0 });
            }
            match v {
                Value::Symbol(s) => {
                    check_token(s)?;
                    if classify(s) != Token::Symbol {
                        return Err(FeatureError::InvalidToken {
                            token: s.clone(),
                            message: "symbol would re-read as a number".into(),
                        });
                    }
                }
                Value::Real(r) if !r.is_finite() => {
                    return Err(FeatureError::InvalidToken { token: r.to_string(), message: "non-finite real".into() })
                }
                _ => {}
            }
            if q == TIME_QUALIFICATION {
                match v {
                    Value::Int(t) if *t >= 0 => time = Some(*t as u64),
                    _ => return Err(FeatureError::InvalidTime { offset: 0 }),
                }
            }
        }
        let time = time.ok_or(FeatureError::MissingTime)?;
        Ok(Self { key, class: None, pairs, time })
    }

    pub fn with_class(mut self, class: impl Into<String>) -> Self {
        self.class = Some(class.into());
        self
    }

    pub fn key(&self) -> &str {
        &self.key
    }

    pub fn class(&self) -> Option<&str> {
        self.class.as_deref()
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    /// All pairs in declared order, including `time`.
    pub fn pairs(&self) -> &[(String, Value)] {
        &self.pairs
    }

    pub fn get(&self, qualification: &str) -> Option<&Value> {
        self.pairs.iter().find(|(q, _)| q == qualification).map(|(_, v)| v)
    }

    /// Pairs other than `time`.
    pub fn content(&self) -> impl Iterator<Item = &(String, Value)> {
        self.pairs.iter().filter(|(q, _)| q != TIME_QUALIFICATION)
    }

    /// Same key and same non-time content.
    pub fn same_content(&self, other: &SemanticFeature) -> bool {
        self.key == other.key && self.content().eq(other.content())
    }

    /// Returns a copy with `qualification` set to `value` (appended before
    /// `time` when absent).
    pub fn with_value(&self, qualification: &str, value: Value) -> Result<Self, FeatureError> {
        let mut pairs = self.pairs.clone();
        if let Some(slot) = pairs.iter_mut().find(|(q, _)| q == qualification) {
            slot.1 = value;
        } else {
            let at = pairs.iter().position(|(q, _)| q == TIME_QUALIFICATION).unwrap_or(pairs.len());
            pairs.insert(at, (qualification.to_string(), value));
        }
        let mut f = SemanticFeature::new(self.key.clone(), pairs)?;
        f.class = self.class.clone();
        Ok(f)
    }

    pub fn with_time(&self, time: u64) -> Self {
        let mut f = self.clone();
        f.time = time;
        for (q, v) in f.pairs.iter_mut() {
            if q == TIME_QUALIFICATION {
                *v = Value::Int(time as i64);
            }
        }
        f
    }
}

impl fmt::Display for SemanticFeature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.key)?;
        for (q, v) in &self.pairs {
            write!(f, ", {q}, {v}")?;
        }
        f.write_str(")")
    }
}

#[derive(Serialize, Deserialize)]
struct FeatureRepr {
    class: Option<String>,
    text: String,
}

impl Serialize for SemanticFeature {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        FeatureRepr { class: self.class.clone(), text: self.to_string() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SemanticFeature {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = FeatureRepr::deserialize(deserializer)?;
        let mut f = parse_feature(&repr.text).map_err(serde::de::Error::custom)?;
        f.class = repr.class;
        Ok(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Token {
    Int,
    Real,
    Clock,
    Symbol,
}

fn classify(tok: &str) -> Token {
    let digits = tok.strip_prefix('-').unwrap_or(tok);
    let all_digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if all_digits(digits) {
        return Token::Int;
    }
    // d+.d+ with an optional exponent
    let (mantissa, exponent) = match digits.find(['e', 'E']) {
        Some(i) => (&digits[..i], Some(&digits[i + 1..])),
        None => (digits, None),
    };
    let exponent_ok = exponent.is_none_or(|e| all_digits(e.strip_prefix(['+', '-']).unwrap_or(e)));
    if let Some((int, frac)) = mantissa.split_once('.') {
        if all_digits(int) && all_digits(frac) && exponent_ok {
            return Token::Real;
        }
    }
    if let Some((h, m)) = tok.split_once(':') {
        if all_digits(h) && h.len() <= 2 && m.len() == 2 && all_digits(m) {
            let (h, m): (u32, u32) = (h.parse().unwrap_or(99), m.parse().unwrap_or(99));
            if h < 24 && m < 60 {
                return Token::Clock;
            }
        }
    }
    Token::Symbol
}

fn check_token(tok: &str) -> Result<(), FeatureError> {
    let bad = tok.is_empty() || tok.trim() != tok || tok.chars().any(|c| matches!(c, ',' | '(' | ')' | '\n' | '\r'));
    if bad {
        return Err(FeatureError::InvalidToken {
            token: tok.to_string(),
            message: "tokens must be non-empty, trimmed, and free of `,()` and newlines".into(),
        });
    }
    Ok(())
}

fn parse_value(tok: &str, offset: usize) -> Result<Value, FeatureError> {
    match classify(tok) {
        Token::Int => tok
            .parse()
            .map(Value::Int)
            .map_err(|_| FeatureError::Syntax { offset, message: format!("integer `{tok}` out of range") }),
        Token::Real => {
            let v: f64 =
                tok.parse().map_err(|_| FeatureError::Syntax { offset, message: format!("bad real `{tok}`") })?;
            if v.is_finite() {
                Ok(Value::Real(v))
            } else {
                Err(FeatureError::Syntax { offset, message: format!("real `{tok}` overflows") })
            }
        }
        Token::Clock => {
            let (h, m) = tok.split_once(':').expect("clock token");
            let h: i64 = h.parse().expect("digits");
            let m: i64 = m.parse().expect("digits");
            Ok(Value::Int(h * 60 + m))
        }
        Token::Symbol => Ok(Value::Symbol(tok.to_string())),
    }
}

/// Parses one feature literal such as `(Quebec, player, green, nbArmies, 4, time, 4)`.
///
/// Numeric tokens become numbers, clock tokens `H:MM` become minutes since
/// midnight, and everything else is a symbol.
pub fn parse_feature(text: &str) -> Result<SemanticFeature, FeatureError> {
    let lead = text.len() - text.trim_start().len();
    let body = text.trim();
    if !body.starts_with('(') {
        return Err(FeatureError::Syntax { offset: lead, message: "expected `(`".into() });
    }
    if !body.ends_with(')') || body.len() < 2 {
        return Err(FeatureError::Syntax { offset: lead + body.len(), message: "expected closing `)`".into() });
    }
    let inner_start = lead + 1;
    let inner = &body[1..body.len() - 1];
    if let Some(i) = inner.find(['(', ')']) {
        return Err(FeatureError::Syntax { offset: inner_start + i, message: "unbalanced parenthesis".into() });
    }

    // (token, byte offset) pairs
    let mut tokens = Vec::new();
    let mut cursor = inner_start;
    for raw in inner.split(',') {
        let skip = raw.len() - raw.trim_start().len();
        let tok = raw.trim();
        if tok.is_empty() {
            return Err(FeatureError::Syntax { offset: cursor + skip, message: "empty token".into() });
        }
        tokens.push((tok, cursor + skip));
        cursor += raw.len() + 1;
    }

    let (key, _) = tokens[0];
    let rest = &tokens[1..];
    if rest.len() % 2 == 1 {
        return Err(FeatureError::OddPairCount { offset: rest[rest.len() - 1].1 });
    }

    let mut pairs: Vec<(String, Value)> = Vec::with_capacity(rest.len() / 2);
    for chunk in rest.chunks(2) {
        let (q, q_off) = chunk[0];
        let (v, v_off) = chunk[1];
        if classify(q) != Token::Symbol {
            return Err(FeatureError::Syntax {
                offset: q_off,
                message: format!("qualification `{q}` must be a symbol"),
            });
        }
        if pairs.iter().any(|(p, _)| p == q) {
            return Err(FeatureError::DuplicateQualification { name: q.to_string(), offset: q_off });
        }
        let value = parse_value(v, v_off)?;
        if q == TIME_QUALIFICATION && !matches!(value, Value::Int(t) if t >= 0) {
            return Err(FeatureError::InvalidTime { offset: v_off });
        }
        pairs.push((q.to_string(), value));
    }
    SemanticFeature::new(key, pairs)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiffError {
    #[error("cannot diff `{old}` against `{new}`: different object identity")]
    IdentityMismatch { old: String, new: String },
    #[error("feature for `{key}` goes back in time ({old} -> {new})")]
    OutOfOrder { key: String, old: u64, new: u64 },
}

/// Per-qualification change between two features of the same object.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDelta {
    pub key: String,
    pub class: Option<String>,
    /// `new - old` for qualifications numeric in both features (time excluded).
    pub entries: Vec<(String, Value)>,
    pub time: u64,
}

impl FeatureDelta {
    /// Delta without identity or ordering checks.
    pub fn between(old: &SemanticFeature, new: &SemanticFeature) -> Self {
        let entries = new
            .content()
            .filter_map(|(q, nv)| {
                let ov = old.get(q)?;
                if nv.is_numeric() && ov.is_numeric() {
                    Some((q.clone(), nv.numeric_sub(ov)?))
                } else {
                    None
                }
            })
            .collect();
        Self { key: new.key.clone(), class: new.class.clone(), entries, time: new.time }
    }

    pub fn get(&self, qualification: &str) -> Option<&Value> {
        self.entries.iter().find(|(q, _)| q == qualification).map(|(_, v)| v)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|(_, v)| v.as_f64() == Some(0.0))
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().filter_map(|(_, v)| v.as_f64()).fold(0.0, |acc, v| acc + v)
    }

    /// The new feature with every numeric entry replaced by its delta, e.g.
    /// `(Alaska, player, red, nbArmies, -2, time, 49)`.
    pub fn render(&self, new: &SemanticFeature) -> SemanticFeature {
        let pairs = new
            .pairs
            .iter()
            .map(|(q, v)| match self.get(q) {
                Some(d) => (q.clone(), d.clone()),
                None => (q.clone(), v.clone()),
            })
            .collect();
        SemanticFeature { key: new.key.clone(), class: new.class.clone(), pairs, time: new.time }
    }
}

/// Checked delta: same key and class, and `new` not earlier than `old`.
pub fn diff_features(old: &SemanticFeature, new: &SemanticFeature) -> Result<FeatureDelta, DiffError> {
    if old.key != new.key || old.class != new.class {
        return Err(DiffError::IdentityMismatch { old: old.key.clone(), new: new.key.clone() });
    }
    if new.time < old.time {
        return Err(DiffError::OutOfOrder { key: new.key.clone(), old: old.time, new: new.time });
    }
    Ok(FeatureDelta::between(old, new))
}

pub(crate) fn value_kind_name(v: &Value) -> &'static str {
    v.kind_name()
}
