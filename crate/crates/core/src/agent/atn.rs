//! The four-state behavioural automaton and its transition table.
//!
//! Rule file format, one rule per line, fields separated by `|`:
//!
//! ```text
//! # from -> to | predicate | actions
//! Initialisation -> Deliberation | true | none
//! Deliberation -> Decision | PS > 0 | support, aggression
//! Decision -> Action | PS > 0 and PA >= 0 | aggression-all
//! ```
//!
//! Predicates are `true` or a conjunction (`and`) of `<indicator> <op> <number>`
//! over `PP PS PA SI CI` with `> >= < <= == !=`. Rules leaving the same state
//! are tried in file order and the first match fires; no match is a self-loop.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::indicators::IndicatorSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AtnState {
    Initialisation,
    Deliberation,
    Decision,
    Action,
}

impl AtnState {
    pub const ALL: [AtnState; 4] =
        [AtnState::Initialisation, AtnState::Deliberation, AtnState::Decision, AtnState::Action];

    /// Decision or Action: strong enough to count towards a cluster.
    pub fn is_advanced(self) -> bool {
        self >= AtnState::Decision
    }
}

impl fmt::Display for AtnState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for AtnState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AtnState::ALL.into_iter().find(|st| st.to_string() == s).ok_or_else(|| format!("unknown state `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Indicator {
    PP,
    PS,
    PA,
    SI,
    CI,
}

impl Indicator {
    fn read(self, ind: &IndicatorSet) -> f64 {
        match self {
            Indicator::PP => ind.pp,
            Indicator::PS => ind.ps,
            Indicator::PA => ind.pa,
            Indicator::SI => ind.si,
            Indicator::CI => ind.ci,
        }
    }
}

impl FromStr for Indicator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "PP" => Indicator::PP,
            "PS" => Indicator::PS,
            "PA" => Indicator::PA,
            "SI" => Indicator::SI,
            "CI" => Indicator::CI,
            other => return Err(format!("unknown indicator `{other}`")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    Gt,
    Ge,
    Lt,
    Le,
    Eq,
    Ne,
}

impl Comparison {
    const SYMBOLS: [(&'static str, Comparison); 6] = [
        (">=", Comparison::Ge),
        ("<=", Comparison::Le),
        ("==", Comparison::Eq),
        ("!=", Comparison::Ne),
        (">", Comparison::Gt),
        ("<", Comparison::Lt),
    ];

    fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Comparison::Gt => lhs > rhs,
            Comparison::Ge => lhs >= rhs,
            Comparison::Lt => lhs < rhs,
            Comparison::Le => lhs <= rhs,
            Comparison::Eq => lhs == rhs,
            Comparison::Ne => lhs != rhs,
        }
    }

    fn symbol(self) -> &'static str {
        Self::SYMBOLS.iter().find(|(_, c)| *c == self).map(|(s, _)| *s).expect("all listed")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub indicator: Indicator,
    pub comparison: Comparison,
    pub threshold: f64,
}

impl Condition {
    pub fn new(indicator: Indicator, comparison: Comparison, threshold: f64) -> Self {
        Self { indicator, comparison, threshold }
    }

    pub fn holds(&self, ind: &IndicatorSet) -> bool {
        self.comparison.holds(self.indicator.read(ind), self.threshold)
    }
}

impl FromStr for Condition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (at, sym, comparison) = Comparison::SYMBOLS
            .iter()
            .filter_map(|(sym, c)| s.find(sym).map(|at| (at, *sym, *c)))
            .min_by_key(|(at, sym, _)| (*at, std::cmp::Reverse(sym.len())))
            .ok_or_else(|| format!("no comparison operator in `{s}`"))?;
        let indicator: Indicator = s[..at].trim().parse()?;
        let rhs = s[at + sym.len()..].trim();
        let threshold: f64 = rhs.parse().map_err(|_| format!("bad threshold `{rhs}`"))?;
        if !threshold.is_finite() {
            return Err(format!("bad threshold `{rhs}`"));
        }
        Ok(Self { indicator, comparison, threshold })
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} {} {}", self.indicator, self.comparison.symbol(), self.threshold)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActionKind {
    /// One Support message to the closest friend.
    SendSupport,
    /// One Aggression message to the most distant enemy.
    SendAggression,
    /// One Aggression message to every enemy.
    AggressAllEnemies,
}

impl ActionKind {
    fn name(self) -> &'static str {
        match self {
            ActionKind::SendSupport => "support",
            ActionKind::SendAggression => "aggression",
            ActionKind::AggressAllEnemies => "aggression-all",
        }
    }
}

impl FromStr for ActionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "support" => ActionKind::SendSupport,
            "aggression" => ActionKind::SendAggression,
            "aggression-all" => ActionKind::AggressAllEnemies,
            other => return Err(format!("unknown action `{other}`")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionRule {
    pub from: AtnState,
    pub to: AtnState,
    /// Conjunction; empty means always.
    pub predicate: Vec<Condition>,
    pub actions: Vec<ActionKind>,
}

impl TransitionRule {
    pub fn new(from: AtnState, to: AtnState, predicate: Vec<Condition>, actions: Vec<ActionKind>) -> Self {
        Self { from, to, predicate, actions }
    }

    pub fn matches(&self, ind: &IndicatorSet) -> bool {
        self.predicate.iter().all(|c| c.holds(ind))
    }
}

impl fmt::Display for TransitionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {} | ", self.from, self.to)?;
        if self.predicate.is_empty() {
            f.write_str("true")?;
        } else {
            let parts: Vec<String> = self.predicate.iter().map(Condition::to_string).collect();
            f.write_str(&parts.join(" and "))?;
        }
        f.write_str(" | ")?;
        if self.actions.is_empty() {
            f.write_str("none")
        } else {
            let parts: Vec<&str> = self.actions.iter().map(|a| a.name()).collect();
            f.write_str(&parts.join(", "))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("rules line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no transition rule leaves state {0}")]
    UncoveredState(AtnState),
}

/// Outcome of one automaton step.
#[derive(Debug, Clone, PartialEq)]
pub struct AtnStep<'a> {
    pub to: AtnState,
    pub actions: &'a [ActionKind],
    /// The rule that fired, or `None` for the implicit self-loop.
    pub rule: Option<usize>,
}

/// Ordered transition rules covering every state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleTable {
    rules: Vec<TransitionRule>,
}

impl RuleTable {
    pub fn new(rules: Vec<TransitionRule>) -> Result<Self, RuleError> {
        for state in AtnState::ALL {
            if !rules.iter().any(|r| r.from == state) {
                return Err(RuleError::UncoveredState(state));
            }
        }
        Ok(Self { rules })
    }

    /// The shipped table:
    ///
    /// * Initialisation -> Deliberation on the first indicator update
    /// * Deliberation -> Decision when PS > 0, sending one Support and one Aggression
    /// * Decision -> Action when PS > 0 and PA >= 0, aggressing every enemy
    /// * Decision -> Deliberation when PS < 0
    /// * Action -> Decision when PS < 0
    pub fn default_table() -> Self {
        use ActionKind::*;
        use AtnState::*;
        use Comparison::*;
        use Indicator::*;
        let c = Condition::new;
        Self::new(vec![
            TransitionRule::new(Initialisation, Deliberation, vec![], vec![]),
            TransitionRule::new(Deliberation, Decision, vec![c(PS, Gt, 0.0)], vec![SendSupport, SendAggression]),
            TransitionRule::new(Decision, Action, vec![c(PS, Gt, 0.0), c(PA, Ge, 0.0)], vec![AggressAllEnemies]),
            TransitionRule::new(Decision, Deliberation, vec![c(PS, Lt, 0.0)], vec![]),
            TransitionRule::new(Action, Decision, vec![c(PS, Lt, 0.0)], vec![]),
        ])
        .expect("default table covers every state")
    }

    pub fn rules(&self) -> &[TransitionRule] {
        &self.rules
    }

    /// Fires the first rule from `state` whose predicate holds.
    pub fn step(&self, state: AtnState, ind: &IndicatorSet) -> AtnStep<'_> {
        self.rules
            .iter()
            .enumerate()
            .find(|(_, r)| r.from == state && r.matches(ind))
            .map(|(i, r)| AtnStep { to: r.to, actions: &r.actions, rule: Some(i) })
            .unwrap_or(AtnStep { to: state, actions: &[], rule: None })
    }

    /// Parses a rule file, collecting every malformed line.
    pub fn parse_all(text: &str) -> Result<Self, Vec<RuleError>> {
        let mut rules = Vec::new();
        let mut errors = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            match parse_rule(trimmed) {
                Ok(r) => rules.push(r),
                Err(message) => errors.push(RuleError::Parse { line: idx + 1, message }),
            }
        }
        if !errors.is_empty() {
            return Err(errors);
        }
        RuleTable::new(rules).map_err(|e| vec![e])
    }

    pub fn parse(text: &str) -> Result<Self, RuleError> {
        Self::parse_all(text).map_err(|mut errs| errs.remove(0))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# from -> to | predicate | actions\n");
        for r in &self.rules {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out
    }
}

fn parse_rule(line: &str) -> Result<TransitionRule, String> {
    let fields: Vec<&str> = line.split('|').map(str::trim).collect();
    let [edge, predicate, actions] = fields[..] else {
        return Err("expected `from -> to | predicate | actions`".into());
    };
    let (from, to) = edge.split_once("->").ok_or("expected `from -> to`")?;
    let from: AtnState = from.trim().parse()?;
    let to: AtnState = to.trim().parse()?;
    let predicate = if predicate == "true" {
        Vec::new()
    } else {
        predicate.split(" and ").flat_map(|p| p.split("&&")).map(str::parse).collect::<Result<Vec<Condition>, _>>()?
    };
    let actions = if actions == "none" || actions.is_empty() {
        Vec::new()
    } else {
        actions.split(',').map(|a| a.trim().parse()).collect::<Result<Vec<ActionKind>, _>>()?
    };
    Ok(TransitionRule { from, to, predicate, actions })
}
