//! Factual agents.
//!
//! An agent carries the latest feature of one described object, an indicator
//! set, its automaton state, and an acquaintance network of other agents keyed
//! by their last observed semantic proximity. Agents are passive: the engine
//! decides when they receive, update, and act.

mod atn;
mod indicators;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use atn::{ActionKind, AtnState, AtnStep, Comparison, Condition, Indicator, RuleError, RuleTable, TransitionRule};
pub use indicators::{update_constancy, update_satisfaction, IndicatorSet, NonFiniteIndicator};

use crate::proximity::Proximity;
use crate::semantic::{FeatureDelta, SemanticFeature};

/// Agent identity. The schema maps every key to exactly one class, so the
/// object key alone identifies the agent.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(String);

impl AgentId {
    pub fn new(key: impl Into<String>) -> Self {
        Self(key.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AgentId {
    fn from(s: &str) -> Self {
        Self(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MessageKind {
    FeatureUpdate(SemanticFeature),
    /// Positive amount.
    Support(f64),
    /// Negative amount.
    Aggression(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentMessage {
    pub kind: MessageKind,
    pub sender: AgentId,
    pub tick: u64,
}

impl AgentMessage {
    /// Influence carried by Support/Aggression; zero for feature updates.
    pub fn amount(&self) -> f64 {
        match self.kind {
            MessageKind::Support(a) | MessageKind::Aggression(a) => a,
            MessageKind::FeatureUpdate(_) => 0.0,
        }
    }
}

/// What a broadcast delivery did to the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReceiveEffect {
    /// Neutral proximity: the receiver is not interested.
    Ignored,
    /// Acquaintance entry refreshed.
    Acquainted,
    /// Acquaintance refreshed and the carried feature re-derived.
    Updated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactualAgent {
    id: AgentId,
    class: String,
    carried: SemanticFeature,
    /// Feature at the last indicator update; valProximity compares against it.
    baseline: SemanticFeature,
    /// Delta form of the last indicator update.
    last_delta: Option<SemanticFeature>,
    indicators: IndicatorSet,
    state: AtnState,
    acquaintances: BTreeMap<AgentId, f64>,
    inbox: Vec<AgentMessage>,
    dirty: bool,
    /// Time of the last feature ingested for this object (derived updates excluded).
    last_ingested: u64,
}

impl FactualAgent {
    /// A fresh agent in Initialisation, pending its first indicator update.
    ///
    /// Panics if `feature` has no resolved class.
    pub fn new(feature: SemanticFeature) -> Self {
        let class = feature.class().expect("agents carry class-bound features").to_string();
        Self {
            id: AgentId::new(feature.key()),
            class,
            baseline: feature.clone(),
            last_ingested: feature.time(),
            carried: feature,
            last_delta: None,
            indicators: IndicatorSet::default(),
            state: AtnState::Initialisation,
            acquaintances: BTreeMap::new(),
            inbox: Vec::new(),
            dirty: true,
        }
    }

    pub fn id(&self) -> &AgentId {
        &self.id
    }

    pub fn class(&self) -> &str {
        &self.class
    }

    pub fn carried(&self) -> &SemanticFeature {
        &self.carried
    }

    pub fn baseline(&self) -> &SemanticFeature {
        &self.baseline
    }

    pub fn last_delta(&self) -> Option<&SemanticFeature> {
        self.last_delta.as_ref()
    }

    pub fn indicators(&self) -> &IndicatorSet {
        &self.indicators
    }

    pub fn state(&self) -> AtnState {
        self.state
    }

    pub fn acquaintances(&self) -> &BTreeMap<AgentId, f64> {
        &self.acquaintances
    }

    pub fn friends(&self) -> impl Iterator<Item = (&AgentId, f64)> {
        self.acquaintances.iter().filter(|(_, v)| **v > 0.0).map(|(k, v)| (k, *v))
    }

    pub fn enemies(&self) -> impl Iterator<Item = (&AgentId, f64)> {
        self.acquaintances.iter().filter(|(_, v)| **v < 0.0).map(|(k, v)| (k, *v))
    }

    pub fn inbox(&self) -> &[AgentMessage] {
        &self.inbox
    }

    pub fn is_dirty(&self) -> bool {
        self.dirty
    }

    pub fn last_ingested(&self) -> u64 {
        self.last_ingested
    }

    /// Replaces the carried feature with a newly ingested one.
    pub fn accept_feature(&mut self, feature: SemanticFeature) {
        self.last_ingested = feature.time();
        self.carried = feature;
        self.dirty = true;
    }

    /// Handles another agent's broadcast feature.
    ///
    /// Neutral global proximity leaves the agent untouched. Otherwise the
    /// sender's semantic proximity is recorded, and `derived` (the domain's
    /// re-derivation of this agent's feature, if any) replaces the carried one.
    pub fn receive_feature_update(
        &mut self,
        sender: &AgentId,
        proximity: &Proximity,
        derived: Option<SemanticFeature>,
    ) -> ReceiveEffect {
        if proximity.global.is_neutral() || proximity.semantic.is_neutral() {
            return ReceiveEffect::Ignored;
        }
        self.acquaintances.insert(sender.clone(), proximity.semantic.value());
        match derived {
            Some(f) if f != self.carried => {
                self.carried = f;
                self.dirty = true;
                ReceiveEffect::Updated
            }
            _ => ReceiveEffect::Acquainted,
        }
    }

    pub fn deliver(&mut self, message: AgentMessage) {
        self.inbox.push(message);
    }

    /// Sum of pending Support/Aggression amounts, clamped to `[lo, hi]`.
    pub fn pending_influence(&self, lo: f64, hi: f64) -> f64 {
        self.inbox.iter().fold(0.0, |acc, m| acc + m.amount()).clamp(lo, hi)
    }

    /// Updates PP/PS/PA from `val_proximity` plus `influence` and clears the
    /// inbox. SI/CI are settled later by [`FactualAgent::transition`].
    pub fn update_indicators(
        &mut self,
        val_proximity: f64,
        influence: f64,
    ) -> Result<IndicatorSet, NonFiniteIndicator> {
        if !influence.is_finite() {
            return Err(NonFiniteIndicator);
        }
        self.indicators = self.indicators.advance(val_proximity, influence)?;
        self.inbox.clear();
        self.last_delta = Some(FeatureDelta::between(&self.baseline, &self.carried).render(&self.carried));
        self.baseline = self.carried.clone();
        self.dirty = false;
        Ok(self.indicators)
    }

    /// Moves to `to` and settles SI/CI for the step.
    pub fn transition(&mut self, to: AtnState, alpha: f64) {
        self.indicators = self.indicators.settle(self.state, to, alpha);
        self.state = to;
    }

    /// Closest friend and most distant enemy; ties go to the smallest id.
    pub fn select_targets(&self) -> (Option<AgentId>, Option<AgentId>) {
        let mut friend: Option<(&AgentId, f64)> = None;
        let mut enemy: Option<(&AgentId, f64)> = None;
        for (id, &v) in &self.acquaintances {
            if v > 0.0 && friend.is_none_or(|(_, best)| v > best) {
                friend = Some((id, v));
            }
            if v < 0.0 && enemy.is_none_or(|(_, worst)| v < worst) {
                enemy = Some((id, v));
            }
        }
        (friend.map(|(id, _)| id.clone()), enemy.map(|(id, _)| id.clone()))
    }

    #[cfg(test)]
    pub(crate) fn set_acquaintance(&mut self, id: &str, v: f64) {
        self.acquaintances.insert(AgentId::new(id), v);
    }

    #[cfg(test)]
    pub(crate) fn set_state(&mut self, state: AtnState) {
        self.state = state;
    }
}

/// One automaton step for `agent` under `rules`.
pub fn step_atn<'r>(agent: &FactualAgent, rules: &'r RuleTable) -> AtnStep<'r> {
    rules.step(agent.state(), agent.indicators())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proximity::ProximityValue;
    use crate::semantic::parse_feature;
    use proptest::prelude::*;

    fn agent(text: &str, class: &str) -> FactualAgent {
        FactualAgent::new(parse_feature(text).unwrap().with_class(class))
    }

    fn prox(global: f64, semantic: f64) -> Proximity {
        let p = |v| ProximityValue::new(v).unwrap();
        Proximity { time: p(1.0), spatial: p(1.0), semantic: p(semantic), global: p(global) }
    }

    #[test]
    fn alaska_update_through_agent() {
        let mut a = agent("(Alaska, player, red, nbArmies, 3, time, 10)", "territory");
        a.update_indicators(0.0, 0.0).unwrap();
        a.accept_feature(
            parse_feature("(Alaska, player, red, nbArmies, 1, time, 49)").unwrap().with_class("territory"),
        );
        let ind = a.update_indicators(1.0 - 3.0, 0.0).unwrap();
        assert_eq!(ind.pp, -2.0);
        assert_eq!(a.last_delta().unwrap().to_string(), "(Alaska, player, red, nbArmies, -2, time, 49)");
        assert!(!a.is_dirty());
    }

    #[test]
    fn neutral_delivery_changes_nothing() {
        let mut a = agent("(red, nbTerritories, 4, time, 1)", "player");
        let before = a.clone();
        let derived = parse_feature("(red, nbTerritories, 5, time, 1)").unwrap().with_class("player");
        assert_eq!(a.receive_feature_update(&"Alaska".into(), &prox(0.0, 0.7), Some(derived)), ReceiveEffect::Ignored);
        assert_eq!(a, before);
    }

    #[test]
    fn negative_proximity_makes_an_enemy() {
        let mut a = agent("(red, nbTerritories, 4, time, 1)", "player");
        a.receive_feature_update(&"GB".into(), &prox(-0.5, -0.5), None);
        assert_eq!(a.enemies().collect::<Vec<_>>(), vec![(&AgentId::new("GB"), -0.5)]);
        assert_eq!(a.friends().count(), 0);
    }

    #[test]
    fn derived_feature_marks_dirty() {
        let mut a = agent("(red, nbTerritories, 4, time, 1)", "player");
        a.update_indicators(0.0, 0.0).unwrap();
        let derived = parse_feature("(red, nbTerritories, 5, time, 3)").unwrap().with_class("player");
        let effect = a.receive_feature_update(&"GB".into(), &prox(0.42, 0.7), Some(derived.clone()));
        assert_eq!(effect, ReceiveEffect::Updated);
        assert_eq!(a.carried(), &derived);
        assert!(a.is_dirty());
        assert_eq!(a.acquaintances()[&AgentId::new("GB")], 0.7);
    }

    #[test]
    fn target_selection() {
        let mut a = agent("(A, n, 1, time, 0)", "x");
        assert_eq!(a.select_targets(), (None, None));
        a.set_acquaintance("D", -0.4);
        assert_eq!(a.select_targets(), (None, Some("D".into())));
        a.set_acquaintance("C", 0.7);
        a.set_acquaintance("B", 0.7);
        assert_eq!(a.select_targets(), (Some("B".into()), Some("D".into())));
    }

    #[test]
    fn influence_is_clamped_and_drained() {
        let mut a = agent("(A, n, 1, time, 0)", "x");
        for _ in 0..3 {
            a.deliver(AgentMessage { kind: MessageKind::Support(0.5), sender: "B".into(), tick: 1 });
        }
        assert_eq!(a.pending_influence(-1.0, 1.0), 1.0);
        a.deliver(AgentMessage { kind: MessageKind::Aggression(-0.5), sender: "C".into(), tick: 1 });
        assert_eq!(a.pending_influence(-1.0, 1.0), 1.0);
        let infl = a.pending_influence(-1.0, 1.0);
        a.update_indicators(0.0, infl).unwrap();
        assert!(a.inbox().is_empty());
        assert_eq!(a.indicators().pp, 1.0);
    }

    // independent exhaustive scan: collect, sort by (value, id), take extremes
    fn scan_oracle(acq: &BTreeMap<String, f64>) -> (Option<String>, Option<String>) {
        let mut friends: Vec<_> = acq.iter().filter(|(_, v)| **v > 0.0).collect();
        friends.sort_by(|a, b| b.1.partial_cmp(a.1).unwrap().then(a.0.cmp(b.0)));
        let mut enemies: Vec<_> = acq.iter().filter(|(_, v)| **v < 0.0).collect();
        enemies.sort_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(a.0.cmp(b.0)));
        (friends.first().map(|f| f.0.clone()), enemies.first().map(|e| e.0.clone()))
    }

    proptest! {
        #[test]
        fn targets_match_scan(acq in prop::collection::btree_map(
            "[a-e]{1,2}",
            prop::sample::select(vec![-1.0, -0.7, -0.4, -0.1, 0.1, 0.4, 0.7, 1.0]),
            0..12,
        )) {
            let mut a = agent("(self, n, 1, time, 0)", "x");
            for (k, v) in &acq {
                a.set_acquaintance(k, *v);
            }
            let (f, e) = a.select_targets();
            let (of, oe) = scan_oracle(&acq);
            prop_assert_eq!(f.map(|x| x.to_string()), of);
            prop_assert_eq!(e.map(|x| x.to_string()), oe);
        }

        #[test]
        fn acquaintances_never_hold_zero(deliveries in prop::collection::vec(
            ("[a-d]", -1.0f64..=1.0, -1.0f64..=1.0), 0..40,
        )) {
            let mut a = agent("(self, n, 1, time, 0)", "x");
            for (sender, g, s) in deliveries {
                // global and semantic share a sign, as the product guarantees
                let g = g.abs() * s.signum();
                a.receive_feature_update(&AgentId::new(sender), &prox(g, s), None);
                for v in a.acquaintances().values() {
                    prop_assert!(*v != 0.0);
                }
            }
        }
    }
}
