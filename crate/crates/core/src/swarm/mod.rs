//! The deterministic engine.
//!
//! Features are ingested one at a time: the described object's agent is
//! created or updated, the domain adapter sees the change, and the feature is
//! broadcast to every other agent in ascending id order. A tick then runs in
//! two phases:
//!
//! 1. every dirty agent, in ascending id order, computes valProximity, drains
//!    its inbox into an influence term, updates its indicators, steps its
//!    automaton, and queues any Support/Aggression messages;
//! 2. queued messages are delivered to inboxes, where they wait for the
//!    recipient's next indicator update.
//!
//! Clusters are detected after every tick.

mod adapter;
mod cluster;
mod config;
mod trace;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use adapter::{AdapterError, DomainAdapter, NumericDeltaAdapter};
pub use cluster::{detect_clusters, mutual_edge, ClusterReport};
pub use config::EngineConfig;
pub use trace::{ClusterTimelineEntry, EventBody, MessageLabel, TraceEvent};

use crate::agent::{ActionKind, AgentId, AgentMessage, FactualAgent, MessageKind, ReceiveEffect, RuleTable};
use crate::proximity::{proximity, OntologyTable, ProximityConfig};
use crate::semantic::{ObjectSchema, SemanticFeature, ValidationError};

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("invalid feature: {0}")]
    Validation(#[from] ValidationError),
    #[error("feature for `{key}` at time {got} precedes its last feature at {last}")]
    OutOfOrder { key: String, last: u64, got: u64 },
    #[error(transparent)]
    Adapter(#[from] AdapterError),
    #[error("non-finite indicator for agent `{0}`")]
    NonFinite(AgentId),
    #[error("nothing to do: no staged updates or pending messages")]
    Idle,
    #[error("snapshot refused: a tick is in progress")]
    SnapshotMidTick,
    #[error("snapshot digest {found} does not match configuration {expected}")]
    DigestMismatch { expected: String, found: String },
    #[error("unsupported snapshot version {0}")]
    SnapshotVersion(u32),
    #[error("configuration: {0}")]
    Config(String),
}

impl EngineError {
    /// Errors caused by bad input rather than by the engine itself.
    pub fn is_input_error(&self) -> bool {
        matches!(self, EngineError::Validation(_) | EngineError::OutOfOrder { .. })
    }
}

/// Everything static an engine is built from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngineSetup {
    pub config: EngineConfig,
    pub rules: RuleTable,
    pub schema: ObjectSchema,
    pub ontology: OntologyTable,
    pub proximity: ProximityConfig,
}

impl EngineSetup {
    /// SHA-256 over the canonical JSON of the setup plus the adapter name.
    pub fn digest(&self, adapter: &dyn DomainAdapter) -> String {
        let json = serde_json::to_string(&(self, adapter.name())).expect("setup serializes");
        let mut out = String::with_capacity(64);
        for b in Sha256::digest(json.as_bytes()) {
            write!(out, "{b:02x}").expect("write to string");
        }
        out
    }
}

/// Serializable image of the engine between ticks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub version: u32,
    pub config_digest: String,
    pub tick: u64,
    pub seq: u64,
    pub ontology: OntologyTable,
    pub agents: Vec<FactualAgent>,
}

/// Events and clusters produced by one tick.
#[derive(Debug, Clone, PartialEq)]
pub struct TickReport {
    pub tick: u64,
    pub events: Vec<TraceEvent>,
    pub clusters: Vec<ClusterReport>,
}

pub struct Engine {
    setup: EngineSetup,
    digest: String,
    adapter: Box<dyn DomainAdapter>,
    ontology: OntologyTable,
    agents: BTreeMap<AgentId, FactualAgent>,
    /// Completed ticks.
    tick: u64,
    seq: u64,
    outbox: Vec<(AgentId, AgentMessage)>,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine")
            .field("adapter", &self.adapter.name())
            .field("tick", &self.tick)
            .field("agents", &self.agents.len())
            .finish()
    }
}

impl Engine {
    pub fn new(setup: EngineSetup, adapter: Box<dyn DomainAdapter>) -> Result<Self, EngineError> {
        setup.config.check().map_err(EngineError::Config)?;
        setup.proximity.check().map_err(EngineError::Config)?;
        let digest = setup.digest(adapter.as_ref());
        Ok(Self {
            ontology: setup.ontology.clone(),
            setup,
            digest,
            adapter,
            agents: BTreeMap::new(),
            tick: 0,
            seq: 0,
            outbox: Vec::new(),
        })
    }

    /// Rebuilds an engine from a snapshot taken under the same setup.
    pub fn restore(
        setup: EngineSetup,
        adapter: Box<dyn DomainAdapter>,
        snapshot: Snapshot,
    ) -> Result<Self, EngineError> {
        if snapshot.version != SNAPSHOT_VERSION {
            return Err(EngineError::SnapshotVersion(snapshot.version));
        }
        let mut engine = Self::new(setup, adapter)?;
        if snapshot.config_digest != engine.digest {
            return Err(EngineError::DigestMismatch { expected: engine.digest, found: snapshot.config_digest });
        }
        engine.tick = snapshot.tick;
        engine.seq = snapshot.seq;
        engine.ontology = snapshot.ontology;
        engine.agents = snapshot.agents.into_iter().map(|a| (a.id().clone(), a)).collect();
        Ok(engine)
    }

    pub fn setup(&self) -> &EngineSetup {
        &self.setup
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }

    pub fn ontology(&self) -> &OntologyTable {
        &self.ontology
    }

    pub fn agents(&self) -> &BTreeMap<AgentId, FactualAgent> {
        &self.agents
    }

    pub fn agent(&self, id: &str) -> Option<&FactualAgent> {
        self.agents.get(&AgentId::new(id))
    }

    pub fn population(&self) -> usize {
        self.agents.len()
    }

    /// Number of completed ticks.
    pub fn tick_count(&self) -> u64 {
        self.tick
    }

    fn emit(&mut self, events: &mut Vec<TraceEvent>, tick: u64, body: EventBody) {
        events.push(TraceEvent { tick, seq: self.seq, body });
        self.seq += 1;
    }

    /// Admits one feature. On error the engine is unchanged.
    pub fn ingest(&mut self, feature: SemanticFeature) -> Result<Vec<TraceEvent>, EngineError> {
        let feature = self.setup.schema.bind(feature)?;
        let id = AgentId::new(feature.key());
        if let Some(agent) = self.agents.get(&id) {
            if feature.time() < agent.last_ingested() {
                return Err(EngineError::OutOfOrder {
                    key: feature.key().to_string(),
                    last: agent.last_ingested(),
                    got: feature.time(),
                });
            }
        }

        let tick = self.tick + 1;
        let mut events = Vec::new();
        let previous = self.agents.get(&id).map(|a| a.carried().clone());
        self.adapter.observe(previous.as_ref(), &feature, &mut self.ontology);

        let text = feature.to_string();
        match self.agents.get_mut(&id) {
            Some(agent) => {
                agent.accept_feature(feature.clone());
                self.emit(&mut events, tick, EventBody::FeatureUpdated { agent: id.clone(), feature: text, via: None });
            }
            None => {
                let class = feature.class().expect("bound").to_string();
                self.agents.insert(id.clone(), FactualAgent::new(feature.clone()));
                self.emit(&mut events, tick, EventBody::AgentCreated { agent: id.clone(), class, feature: text });
            }
        }
        self.broadcast(&feature, &id, previous.as_ref(), &mut events);
        Ok(events)
    }

    /// Delivers `feature` from `sender` to every other agent, ascending by id.
    fn broadcast(
        &mut self,
        feature: &SemanticFeature,
        sender: &AgentId,
        previous: Option<&SemanticFeature>,
        events: &mut Vec<TraceEvent>,
    ) {
        let tick = self.tick + 1;
        let mut bodies = Vec::new();
        for (id, agent) in self.agents.iter_mut() {
            if id == sender {
                continue;
            }
            let p = proximity(agent.carried(), feature, &self.ontology, &self.setup.proximity);
            let derived =
                if p.global.is_neutral() { None } else { self.adapter.derive(agent.carried(), previous, feature) };
            let effect = agent.receive_feature_update(sender, &p, derived);
            bodies.push(EventBody::FeatureDelivered {
                from: sender.clone(),
                to: id.clone(),
                global: p.global.value(),
                semantic: p.semantic.value(),
                effect,
            });
            if effect == ReceiveEffect::Updated {
                bodies.push(EventBody::FeatureUpdated {
                    agent: id.clone(),
                    feature: agent.carried().to_string(),
                    via: Some(sender.clone()),
                });
            }
        }
        for body in bodies {
            self.emit(events, tick, body);
        }
    }

    /// True when a tick would do work.
    pub fn has_pending_work(&self) -> bool {
        !self.outbox.is_empty() || self.agents.values().any(FactualAgent::is_dirty)
    }

    pub fn tick(&mut self) -> Result<TickReport, EngineError> {
        if !self.has_pending_work() {
            return Err(EngineError::Idle);
        }
        let tick = self.tick + 1;
        let mut events = Vec::new();
        let cfg = self.setup.config.clone();

        // phase 1
        let dirty: Vec<AgentId> = self.agents.values().filter(|a| a.is_dirty()).map(|a| a.id().clone()).collect();
        for id in dirty {
            let agent = self.agents.get_mut(&id).expect("listed");
            let val = self.adapter.val_proximity(agent.class(), agent.baseline(), agent.carried())?;
            let influence = agent.pending_influence(cfg.influence_min, cfg.influence_max);
            let ind = agent.update_indicators(val, influence).map_err(|_| EngineError::NonFinite(id.clone()))?;
            let from = agent.state();
            let step = self.setup.rules.step(from, &ind);
            let (to, actions, rule) = (step.to, step.actions.to_vec(), step.rule);
            agent.transition(to, cfg.alpha);
            let settled = *agent.indicators();
            let delta = agent.last_delta().map(ToString::to_string).unwrap_or_default();

            let mut bodies = vec![EventBody::IndicatorsUpdated {
                agent: id.clone(),
                val_proximity: val,
                influence,
                pp: settled.pp,
                ps: settled.ps,
                pa: settled.pa,
                si: settled.si,
                ci: settled.ci,
                delta,
            }];
            if let Some(rule) = rule {
                bodies.push(EventBody::TransitionFired { agent: id.clone(), from, to, rule, ps: ind.ps, pa: ind.pa });
            }
            for (to_agent, kind) in plan_messages(agent, &actions, &cfg) {
                let (label, amount) = match kind {
                    MessageKind::Support(a) => (MessageLabel::Support, a),
                    MessageKind::Aggression(a) => (MessageLabel::Aggression, a),
                    MessageKind::FeatureUpdate(_) => unreachable!("actions never send features"),
                };
                bodies.push(EventBody::MessageSent { from: id.clone(), to: to_agent.clone(), message: label, amount });
                self.outbox.push((to_agent, AgentMessage { kind, sender: id.clone(), tick }));
            }
            for body in bodies {
                self.emit(&mut events, tick, body);
            }
        }

        // phase 2
        for (to, message) in std::mem::take(&mut self.outbox) {
            if let Some(agent) = self.agents.get_mut(&to) {
                agent.deliver(message);
            }
        }

        self.tick = tick;
        let clusters = self.detect_clusters();
        for c in &clusters {
            self.emit(
                &mut events,
                tick,
                EventBody::ClusterReported {
                    members: c.members.clone(),
                    min_proximity: c.min_proximity,
                    dominant_state: c.dominant_state,
                },
            );
        }
        Ok(TickReport { tick, events, clusters })
    }

    /// Clusters under the current state, stamped with the last completed tick.
    pub fn detect_clusters(&self) -> Vec<ClusterReport> {
        detect_clusters(
            &self.agents,
            self.setup.config.cluster_threshold,
            self.setup.config.min_cluster_size,
            self.tick,
        )
    }

    /// Ingests a batch of features and runs one tick over it.
    pub fn step_batch(&mut self, batch: impl IntoIterator<Item = SemanticFeature>) -> Result<TickReport, EngineError> {
        let mut events = Vec::new();
        for f in batch {
            events.extend(self.ingest(f)?);
        }
        let mut report = self.tick()?;
        events.append(&mut report.events);
        report.events = events;
        Ok(report)
    }

    pub fn snapshot(&self) -> Result<Snapshot, EngineError> {
        if self.has_pending_work() {
            return Err(EngineError::SnapshotMidTick);
        }
        Ok(Snapshot {
            version: SNAPSHOT_VERSION,
            config_digest: self.digest.clone(),
            tick: self.tick,
            seq: self.seq,
            ontology: self.ontology.clone(),
            agents: self.agents.values().cloned().collect(),
        })
    }
}

/// Messages an agent's fired actions produce, in action order.
fn plan_messages(agent: &FactualAgent, actions: &[ActionKind], cfg: &EngineConfig) -> Vec<(AgentId, MessageKind)> {
    let mut out = Vec::new();
    let (friend, enemy) = agent.select_targets();
    for action in actions {
        match action {
            ActionKind::SendSupport => {
                if let Some(f) = &friend {
                    out.push((f.clone(), MessageKind::Support(cfg.support_amount)));
                }
            }
            ActionKind::SendAggression => {
                if let Some(e) = &enemy {
                    out.push((e.clone(), MessageKind::Aggression(-cfg.aggression_amount)));
                }
            }
            ActionKind::AggressAllEnemies => {
                for (e, _) in agent.enemies() {
                    out.push((e.clone(), MessageKind::Aggression(-cfg.aggression_amount)));
                }
            }
        }
    }
    out
}

/// Groups consecutive features sharing a timestamp into tick batches.
pub fn batches_by_time(features: impl IntoIterator<Item = SemanticFeature>) -> Vec<Vec<SemanticFeature>> {
    let mut batches: Vec<Vec<SemanticFeature>> = Vec::new();
    for f in features {
        match batches.last_mut() {
            Some(batch) if batch[0].time() == f.time() => batch.push(f),
            _ => batches.push(vec![f]),
        }
    }
    batches
}
