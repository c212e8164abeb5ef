//! Trace events.
//!
//! A trace is a JSON-lines file with one event per line. Field order is
//! fixed: `tick`, `seq`, `kind`, then the kind's payload in declaration
//! order. Events are totally ordered by `(tick, seq)`; `seq` is global and
//! strictly increasing across the run.

use serde::{Deserialize, Serialize};

use crate::agent::{AgentId, AtnState, ReceiveEffect};

use super::cluster::ClusterReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub tick: u64,
    pub seq: u64,
    #[serde(flatten)]
    pub body: EventBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum EventBody {
    AgentCreated {
        agent: AgentId,
        class: String,
        feature: String,
    },
    FeatureUpdated {
        agent: AgentId,
        feature: String,
        /// Set when the update was derived from another agent's broadcast.
        via: Option<AgentId>,
    },
    FeatureDelivered {
        from: AgentId,
        to: AgentId,
        global: f64,
        semantic: f64,
        effect: ReceiveEffect,
    },
    IndicatorsUpdated {
        agent: AgentId,
        val_proximity: f64,
        influence: f64,
        pp: f64,
        ps: f64,
        pa: f64,
        si: f64,
        ci: f64,
        /// The carried feature with numeric qualifications replaced by their change.
        delta: String,
    },
    TransitionFired {
        agent: AgentId,
        from: AtnState,
        to: AtnState,
        rule: usize,
        ps: f64,
        pa: f64,
    },
    MessageSent {
        from: AgentId,
        to: AgentId,
        message: MessageLabel,
        amount: f64,
    },
    ClusterReported {
        members: Vec<AgentId>,
        min_proximity: f64,
        dominant_state: AtnState,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MessageLabel {
    Support,
    Aggression,
}

impl TraceEvent {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("trace events serialize")
    }

    pub fn agent(&self) -> Option<&AgentId> {
        match &self.body {
            EventBody::AgentCreated { agent, .. }
            | EventBody::FeatureUpdated { agent, .. }
            | EventBody::IndicatorsUpdated { agent, .. }
            | EventBody::TransitionFired { agent, .. } => Some(agent),
            _ => None,
        }
    }
}

/// One line of the cluster timeline file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterTimelineEntry {
    pub tick: u64,
    pub clusters: Vec<ClusterReport>,
}
