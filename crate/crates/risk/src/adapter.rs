//! The Risk domain as seen by the engine: schema, ontology, valProximity,
//! and the ownership bookkeeping that keeps player agents current.

use factual_core::proximity::{OntologyTable, ProximityConfig, SpatialGraph};
use factual_core::semantic::{ObjectSchema, SemanticFeature, Value, ValueKind};
use factual_core::swarm::{AdapterError, DomainAdapter};

use crate::board::Board;
use crate::game::{ARMIES_QUALIFICATION, PLAYER_QUALIFICATION, TERRITORIES_QUALIFICATION};

pub const TERRITORY_CLASS: &str = "territory";
pub const PLAYER_CLASS: &str = "player";

/// Player names admitted by the shipped schema.
pub const PLAYER_COLOURS: [&str; 6] = ["black", "blue", "green", "pink", "red", "yellow"];

/// Semantic proximity between a player and a territory it owns.
pub const OWNERSHIP: f64 = 0.7;
/// Between a player and the territory it most recently lost.
pub const LOSS: f64 = -0.7;
/// Between two adjacent territories.
pub const ADJACENCY: f64 = 0.4;
pub const TIME_WINDOW: u64 = 5;
pub const HOP_DECAY: f64 = 0.5;

pub fn risk_schema(board: &Board, players: &[&str]) -> ObjectSchema {
    let mut s = ObjectSchema::new();
    s.add_class(
        TERRITORY_CLASS,
        &[(PLAYER_QUALIFICATION, ValueKind::Symbol), (ARMIES_QUALIFICATION, ValueKind::Integer)],
    )
    .expect("fresh class");
    s.add_class(PLAYER_CLASS, &[(TERRITORIES_QUALIFICATION, ValueKind::Integer)]).expect("fresh class");
    for t in board.territories() {
        s.map_key(t, TERRITORY_CLASS).expect("declared class");
    }
    for p in players {
        s.map_key(p, PLAYER_CLASS).expect("declared class");
    }
    s
}

/// Static part of the Risk ontology: adjacency entries and the board graph.
/// Ownership entries are maintained by [`RiskAdapter::observe`] as the game
/// unfolds.
pub fn build_risk_ontology(board: &Board) -> (OntologyTable, ProximityConfig) {
    let mut table = OntologyTable::new();
    let mut graph = SpatialGraph::new();
    for (a, b) in board.edges() {
        table.set(a, b, ADJACENCY).expect("constant in range");
        graph.add_edge(a, b);
    }
    let config = ProximityConfig::new(TIME_WINDOW, HOP_DECAY, graph).expect("constants in range");
    (table, config)
}

fn owner(f: &SemanticFeature) -> Option<&str> {
    f.get(PLAYER_QUALIFICATION).and_then(Value::as_symbol)
}

fn int(f: &SemanticFeature, q: &str) -> Result<i64, AdapterError> {
    f.get(q).and_then(Value::as_int).ok_or_else(|| AdapterError(format!("`{}` lacks integer `{q}`", f.key())))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RiskAdapter;

impl DomainAdapter for RiskAdapter {
    fn name(&self) -> &str {
        "risk"
    }

    fn val_proximity(&self, class: &str, old: &SemanticFeature, new: &SemanticFeature) -> Result<f64, AdapterError> {
        let q = match class {
            TERRITORY_CLASS => ARMIES_QUALIFICATION,
            PLAYER_CLASS => TERRITORIES_QUALIFICATION,
            other => return Err(AdapterError(format!("no valProximity for class `{other}`"))),
        };
        Ok((int(new, q)? - int(old, q)?) as f64)
    }

    fn observe(&self, previous: Option<&SemanticFeature>, incoming: &SemanticFeature, ontology: &mut OntologyTable) {
        let Some(new_owner) = owner(incoming) else { return };
        let territory = incoming.key();
        match previous.and_then(owner) {
            Some(old) if old != new_owner => {
                let stale: Vec<String> = ontology
                    .entries_with(territory)
                    .filter(|(_, v)| *v < 0.0)
                    .map(|(other, _)| other.to_string())
                    .collect();
                for other in stale {
                    ontology.remove(territory, &other);
                }
                ontology.remove(territory, old);
                ontology.set(old, territory, LOSS).expect("constant in range");
            }
            Some(_) => return,
            None => {}
        }
        ontology.set(new_owner, territory, OWNERSHIP).expect("constant in range");
    }

    fn derive(
        &self,
        receiver: &SemanticFeature,
        previous: Option<&SemanticFeature>,
        incoming: &SemanticFeature,
    ) -> Option<SemanticFeature> {
        let new_owner = owner(incoming)?;
        let old_owner = previous.and_then(owner)?;
        if old_owner == new_owner {
            return None;
        }
        let step = if receiver.key() == new_owner {
            1
        } else if receiver.key() == old_owner {
            -1
        } else {
            return None;
        };
        let count = receiver.get(TERRITORIES_QUALIFICATION)?.as_int()?;
        let updated = receiver.with_value(TERRITORIES_QUALIFICATION, Value::Int(count + step)).ok()?;
        Some(updated.with_time(incoming.time()))
    }
}
