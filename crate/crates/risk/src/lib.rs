//! Game-of-Risk reference domain: the classic board, a rules checker that
//! turns game events into semantic features, the domain adapter and
//! ontology, and a seeded event-log generator.

pub mod adapter;
pub mod board;
pub mod game;
pub mod simulate;

pub use adapter::{build_risk_ontology, risk_schema, RiskAdapter, PLAYER_COLOURS};
pub use board::{Board, BoardError, Continent};
pub use game::{
    events_to_features, format_event_log, parse_event_log, EventKind, GameEvent, GameState, IllegalEvent, LogError,
};
pub use simulate::{simulate_game, DEFAULT_PLAYERS};
