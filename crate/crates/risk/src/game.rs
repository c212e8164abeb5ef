//! Game state, events, and the features they emit.
//!
//! Dice are not modelled: a battle event carries its resolved losses. The
//! game opens with one claim per territory; every other event is rejected
//! until all territories are claimed.
//!
//! Event log format, one event per line, `#` comments allowed:
//!
//! ```text
//! 1 claim Alaska red 3
//! 12 place Alaska 2
//! 49 battle Kamchatka Alaska 0 2
//! 52 conquer GB blue 5
//! ```
//!
//! The leading number is the step, used verbatim as feature time. Steps may
//! repeat but never decrease.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use factual_core::semantic::{SemanticFeature, Value};
use thiserror::Error;

use crate::board::Board;

pub const PLAYER_QUALIFICATION: &str = "player";
pub const ARMIES_QUALIFICATION: &str = "nbArmies";
pub const TERRITORIES_QUALIFICATION: &str = "nbTerritories";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind {
    /// Initial deal: an unclaimed territory goes to `player` with `armies`.
    Claim {
        territory: String,
        player: String,
        armies: u32,
    },
    Placement {
        territory: String,
        armies: u32,
    },
    BattleOutcome {
        attacker: String,
        defender: String,
        attacker_loss: u32,
        defender_loss: u32,
    },
    Conquest {
        territory: String,
        new_owner: String,
        armies: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameEvent {
    pub step: u64,
    pub kind: EventKind,
}

impl fmt::Display for GameEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ", self.step)?;
        match &self.kind {
            EventKind::Claim { territory, player, armies } => write!(f, "claim {territory} {player} {armies}"),
            EventKind::Placement { territory, armies } => write!(f, "place {territory} {armies}"),
            EventKind::BattleOutcome { attacker, defender, attacker_loss, defender_loss } => {
                write!(f, "battle {attacker} {defender} {attacker_loss} {defender_loss}")
            }
            EventKind::Conquest { territory, new_owner, armies } => {
                write!(f, "conquer {territory} {new_owner} {armies}")
            }
        }
    }
}

impl FromStr for GameEvent {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let words: Vec<&str> = s.split_whitespace().collect();
        let num =
            |w: &str, what: &str| w.parse::<u32>().map_err(|_| format!("{what} `{w}` is not a non-negative integer"));
        let (step, rest) = words.split_first().ok_or("empty event")?;
        let step = step.parse().map_err(|_| format!("step `{step}` is not a non-negative integer"))?;
        let kind = match rest {
            ["claim", t, p, n] => {
                EventKind::Claim { territory: t.to_string(), player: p.to_string(), armies: num(n, "armies")? }
            }
            ["place", t, n] => EventKind::Placement { territory: t.to_string(), armies: num(n, "armies")? },
            ["battle", a, d, al, dl] => EventKind::BattleOutcome {
                attacker: a.to_string(),
                defender: d.to_string(),
                attacker_loss: num(al, "loss")?,
                defender_loss: num(dl, "loss")?,
            },
            ["conquer", t, p, n] => {
                EventKind::Conquest { territory: t.to_string(), new_owner: p.to_string(), armies: num(n, "armies")? }
            }
            [verb, ..] if ["claim", "place", "battle", "conquer"].contains(verb) => {
                return Err(format!("wrong number of fields for `{verb}`"))
            }
            [verb, ..] => return Err(format!("unknown event `{verb}`")),
            [] => return Err("missing event kind".into()),
        };
        Ok(GameEvent { step, kind })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct LogError {
    pub line: usize,
    pub message: String,
}

/// Parses an event log; events keep their source line numbers.
pub fn parse_event_log(text: &str) -> Result<Vec<(usize, GameEvent)>, LogError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let event = s.parse().map_err(|message| LogError { line: i + 1, message })?;
        out.push((i + 1, event));
    }
    Ok(out)
}

pub fn format_event_log(events: &[GameEvent]) -> String {
    events.iter().map(|e| format!("{e}\n")).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IllegalEvent {
    #[error("unknown territory `{0}`")]
    UnknownTerritory(String),
    #[error("step {got} precedes step {current}")]
    StepBackwards { current: u64, got: u64 },
    #[error("territory `{0}` is already claimed")]
    AlreadyClaimed(String),
    #[error("territory `{0}` is not claimed yet")]
    Unclaimed(String),
    #[error("setup incomplete: {0} territories unclaimed")]
    SetupIncomplete(usize),
    #[error("army count must be positive")]
    ZeroArmies,
    #[error("a conquest of `{0}` must be resolved first")]
    ConquestPending(String),
    #[error("`{0}` and `{1}` are not adjacent")]
    NotAdjacent(String, String),
    #[error("`{0}` attacks its own territory `{1}`")]
    OwnTerritory(String, String),
    #[error("battle without losses")]
    NoLosses,
    #[error("attacker `{territory}` would fall below one army")]
    AttackerExhausted { territory: String },
    #[error("defender `{territory}` has only {armies} armies")]
    DefenderOverkill { territory: String, armies: u32 },
    #[error("`{0}` still has armies and cannot be conquered")]
    NotDefeated(String),
    #[error("`{player}` owns no territory adjacent to `{territory}`")]
    NoFootHold { player: String, territory: String },
    #[error("player `{0}` is not in the game")]
    UnknownPlayer(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TerritoryState {
    pub owner: String,
    pub armies: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameState {
    board: Board,
    territories: BTreeMap<String, TerritoryState>,
    /// Territory counts per player; players stay listed once eliminated.
    counts: BTreeMap<String, u32>,
    step: u64,
    /// Defender reduced to zero armies, awaiting its conquest.
    pending: Option<String>,
}

impl GameState {
    pub fn new(board: Board) -> Self {
        Self { board, territories: BTreeMap::new(), counts: BTreeMap::new(), step: 0, pending: None }
    }

    pub fn board(&self) -> &Board {
        &self.board
    }

    pub fn territory(&self, name: &str) -> Option<&TerritoryState> {
        self.territories.get(name)
    }

    pub fn territories(&self) -> impl Iterator<Item = (&str, &TerritoryState)> {
        self.territories.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn territory_count(&self, player: &str) -> u32 {
        self.counts.get(player).copied().unwrap_or(0)
    }

    /// Players seen so far, ascending.
    pub fn players(&self) -> impl Iterator<Item = (&str, u32)> {
        self.counts.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn is_alive(&self, player: &str) -> bool {
        self.territory_count(player) > 0
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn pending_conquest(&self) -> Option<&str> {
        self.pending.as_deref()
    }

    pub fn setup_complete(&self) -> bool {
        self.territories.len() == self.board.territories().count()
    }

    fn unclaimed(&self) -> usize {
        self.board.territories().count() - self.territories.len()
    }

    fn known(&self, t: &str) -> Result<(), IllegalEvent> {
        if self.board.contains(t) {
            Ok(())
        } else {
            Err(IllegalEvent::UnknownTerritory(t.to_string()))
        }
    }

    fn held(&self, t: &str) -> Result<&TerritoryState, IllegalEvent> {
        self.known(t)?;
        self.territories.get(t).ok_or_else(|| IllegalEvent::Unclaimed(t.to_string()))
    }

    /// Checks `event` against the current state without applying it.
    pub fn check(&self, event: &GameEvent) -> Result<(), IllegalEvent> {
        if event.step < self.step {
            return Err(IllegalEvent::StepBackwards { current: self.step, got: event.step });
        }
        if let EventKind::Claim { territory, armies, .. } = &event.kind {
            self.known(territory)?;
            if self.territories.contains_key(territory) {
                return Err(IllegalEvent::AlreadyClaimed(territory.clone()));
            }
            if *armies == 0 {
                return Err(IllegalEvent::ZeroArmies);
            }
            return Ok(());
        }
        if !self.setup_complete() {
            return Err(IllegalEvent::SetupIncomplete(self.unclaimed()));
        }
        match &event.kind {
            EventKind::Claim { .. } => unreachable!("handled above"),
            EventKind::Placement { territory, armies } => {
                self.held(territory)?;
                if let Some(p) = &self.pending {
                    return Err(IllegalEvent::ConquestPending(p.clone()));
                }
                if *armies == 0 {
                    return Err(IllegalEvent::ZeroArmies);
                }
            }
            EventKind::BattleOutcome { attacker, defender, attacker_loss, defender_loss } => {
                let a = self.held(attacker)?;
                let d = self.held(defender)?;
                if let Some(p) = &self.pending {
                    return Err(IllegalEvent::ConquestPending(p.clone()));
                }
                if !self.board.adjacent(attacker, defender) {
                    return Err(IllegalEvent::NotAdjacent(attacker.clone(), defender.clone()));
                }
                if a.owner == d.owner {
                    return Err(IllegalEvent::OwnTerritory(a.owner.clone(), defender.clone()));
                }
                if attacker_loss + defender_loss == 0 {
                    return Err(IllegalEvent::NoLosses);
                }
                if *attacker_loss >= a.armies {
                    return Err(IllegalEvent::AttackerExhausted { territory: attacker.clone() });
                }
                if *defender_loss > d.armies {
                    return Err(IllegalEvent::DefenderOverkill { territory: defender.clone(), armies: d.armies });
                }
            }
            EventKind::Conquest { territory, new_owner, armies } => {
                let t = self.held(territory)?;
                if t.armies > 0 {
                    return Err(IllegalEvent::NotDefeated(territory.clone()));
                }
                if !self.counts.contains_key(new_owner) {
                    return Err(IllegalEvent::UnknownPlayer(new_owner.clone()));
                }
                if t.owner == *new_owner {
                    return Err(IllegalEvent::OwnTerritory(new_owner.clone(), territory.clone()));
                }
                let foothold = self
                    .board
                    .neighbours(territory)
                    .any(|n| self.territories.get(n).is_some_and(|s| s.owner == *new_owner));
                if !foothold {
                    return Err(IllegalEvent::NoFootHold { player: new_owner.clone(), territory: territory.clone() });
                }
                if *armies == 0 {
                    return Err(IllegalEvent::ZeroArmies);
                }
            }
        }
        Ok(())
    }

    /// Applies a legal event and returns the features it emits: one per
    /// changed territory, then one per player whose territory count changed,
    /// players ascending. An illegal event leaves the state untouched.
    pub fn apply_event(&mut self, event: &GameEvent) -> Result<Vec<SemanticFeature>, IllegalEvent> {
        self.check(event)?;
        self.step = event.step;
        let mut changed_territories = Vec::new();
        let mut changed_players = Vec::new();
        match &event.kind {
            EventKind::Claim { territory, player, armies } => {
                self.territories.insert(territory.clone(), TerritoryState { owner: player.clone(), armies: *armies });
                *self.counts.entry(player.clone()).or_default() += 1;
                changed_territories.push(territory.clone());
                changed_players.push(player.clone());
            }
            EventKind::Placement { territory, armies } => {
                self.territories.get_mut(territory).expect("checked").armies += armies;
                changed_territories.push(territory.clone());
            }
            EventKind::BattleOutcome { attacker, defender, attacker_loss, defender_loss } => {
                if *attacker_loss > 0 {
                    self.territories.get_mut(attacker).expect("checked").armies -= attacker_loss;
                    changed_territories.push(attacker.clone());
                }
                if *defender_loss > 0 {
                    let d = self.territories.get_mut(defender).expect("checked");
                    d.armies -= defender_loss;
                    if d.armies == 0 {
                        self.pending = Some(defender.clone());
                    }
                    changed_territories.push(defender.clone());
                }
            }
            EventKind::Conquest { territory, new_owner, armies } => {
                let t = self.territories.get_mut(territory).expect("checked");
                let old = std::mem::replace(&mut t.owner, new_owner.clone());
                t.armies = *armies;
                *self.counts.get_mut(&old).expect("owner counted") -= 1;
                *self.counts.get_mut(new_owner).expect("checked") += 1;
                self.pending = None;
                changed_territories.push(territory.clone());
                changed_players.extend([old, new_owner.clone()]);
                changed_players.sort();
            }
        }
        let mut out: Vec<SemanticFeature> = changed_territories.iter().map(|t| self.territory_feature(t)).collect();
        out.extend(changed_players.iter().map(|p| self.player_feature(p)));
        Ok(out)
    }

    pub fn territory_feature(&self, territory: &str) -> SemanticFeature {
        let t = &self.territories[territory];
        SemanticFeature::new(
            territory,
            vec![
                (PLAYER_QUALIFICATION.into(), Value::Symbol(t.owner.clone())),
                (ARMIES_QUALIFICATION.into(), Value::Int(t.armies.into())),
                ("time".into(), Value::Int(self.step as i64)),
            ],
        )
        .expect("territory feature is well formed")
    }

    pub fn player_feature(&self, player: &str) -> SemanticFeature {
        SemanticFeature::new(
            player,
            vec![
                (TERRITORIES_QUALIFICATION.into(), Value::Int(self.territory_count(player).into())),
                ("time".into(), Value::Int(self.step as i64)),
            ],
        )
        .expect("player feature is well formed")
    }
}

/// Replays `events` from an empty board, concatenating emitted features.
pub fn events_to_features(
    board: &Board,
    events: &[GameEvent],
) -> Result<(GameState, Vec<SemanticFeature>), (usize, IllegalEvent)> {
    let mut state = GameState::new(board.clone());
    let mut out = Vec::new();
    for (i, e) in events.iter().enumerate() {
        out.extend(state.apply_event(e).map_err(|err| (i, err))?);
    }
    Ok((state, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str) -> GameEvent {
        s.parse().unwrap()
    }

    /// Claims every territory round-robin among `players`, 3 armies each,
    /// with Alaska and GB to red, Kamchatka and Scandinavia to blue.
    fn dealt(players: &[&str]) -> GameState {
        let board = Board::classic();
        let mut state = GameState::new(board.clone());
        let fixed = [("Alaska", "red"), ("GB", "red"), ("Kamchatka", "blue"), ("Scandinavia", "blue")];
        for (t, p) in fixed {
            state.apply_event(&ev(&format!("1 claim {t} {p} 3"))).unwrap();
        }
        let names: Vec<&str> = board.territories().filter(|t| fixed.iter().all(|(f, _)| f != t)).collect();
        for (i, t) in names.iter().enumerate() {
            state.apply_event(&ev(&format!("1 claim {t} {} 3", players[i % players.len()]))).unwrap();
        }
        state
    }

    #[test]
    fn event_text_round_trip() {
        for s in ["1 claim Alaska red 3", "12 place GB 2", "49 battle Kamchatka Alaska 0 2", "52 conquer GB blue 5"] {
            assert_eq!(ev(s).to_string(), s);
        }
        assert!("3 place GB".parse::<GameEvent>().is_err());
        assert!("x place GB 1".parse::<GameEvent>().is_err());
        assert!("3 fortify GB 1".parse::<GameEvent>().is_err());
    }

    #[test]
    fn log_errors_carry_line() {
        let err = parse_event_log("# header\n1 claim Alaska red 3\n\n2 retreat Alaska\n").unwrap_err();
        assert_eq!(err.line, 4);
    }

    #[test]
    fn alaska_battle_emission() {
        let mut s = dealt(&["red", "blue"]);
        let out = s.apply_event(&ev("49 battle Kamchatka Alaska 0 2")).unwrap();
        let text: Vec<String> = out.iter().map(ToString::to_string).collect();
        assert_eq!(text, vec!["(Alaska, player, red, nbArmies, 1, time, 49)"]);
    }

    #[test]
    fn conquest_emits_territory_then_both_players() {
        let mut s = dealt(&["red", "blue"]);
        s.apply_event(&ev("50 battle Scandinavia GB 0 3")).unwrap();
        assert_eq!(s.pending_conquest(), Some("GB"));
        let before_red = s.territory_count("red");
        let out = s.apply_event(&ev("52 conquer GB blue 5")).unwrap();
        let text: Vec<String> = out.iter().map(ToString::to_string).collect();
        assert_eq!(
            text,
            vec![
                "(GB, player, blue, nbArmies, 5, time, 52)".to_string(),
                format!("(blue, nbTerritories, {}, time, 52)", s.territory_count("blue")),
                format!("(red, nbTerritories, {}, time, 52)", before_red - 1),
            ]
        );
    }

    #[test]
    fn illegal_events_leave_state_unchanged() {
        let s = dealt(&["red", "blue"]);
        let cases = [
            ("2 place GB 0", IllegalEvent::ZeroArmies),
            ("2 battle Alaska GB 1 0", IllegalEvent::NotAdjacent("Alaska".into(), "GB".into())),
            ("2 conquer Alaska blue 2", IllegalEvent::NotDefeated("Alaska".into())),
            ("2 battle Kamchatka Alaska 3 0", IllegalEvent::AttackerExhausted { territory: "Kamchatka".into() }),
            ("2 battle Kamchatka Alaska 0 4", IllegalEvent::DefenderOverkill { territory: "Alaska".into(), armies: 3 }),
            ("2 battle Kamchatka Alaska 0 0", IllegalEvent::NoLosses),
            ("0 place GB 1", IllegalEvent::StepBackwards { current: 1, got: 0 }),
            ("2 place Atlantis 1", IllegalEvent::UnknownTerritory("Atlantis".into())),
            ("2 claim GB red 1", IllegalEvent::AlreadyClaimed("GB".into())),
        ];
        for (text, expected) in cases {
            let mut t = s.clone();
            assert_eq!(t.apply_event(&ev(text)), Err(expected), "{text}");
            assert_eq!(t, s);
        }
    }

    #[test]
    fn setup_must_finish_first() {
        let mut s = GameState::new(Board::classic());
        s.apply_event(&ev("1 claim Alaska red 3")).unwrap();
        assert_eq!(s.apply_event(&ev("2 place Alaska 1")), Err(IllegalEvent::SetupIncomplete(41)));
    }

    #[test]
    fn conquest_must_follow_defeat() {
        let mut s = dealt(&["red", "blue"]);
        s.apply_event(&ev("2 battle Kamchatka Alaska 0 3")).unwrap();
        assert_eq!(s.apply_event(&ev("3 place GB 1")), Err(IllegalEvent::ConquestPending("Alaska".into())));
        assert_eq!(s.apply_event(&ev("3 conquer Alaska green 1")), Err(IllegalEvent::UnknownPlayer("green".into())));
        assert_eq!(
            s.apply_event(&ev("3 conquer Alaska red 1")),
            Err(IllegalEvent::OwnTerritory("red".into(), "Alaska".into()))
        );
        s.apply_event(&ev("3 conquer Alaska blue 2")).unwrap();
        assert_eq!(s.territory("Alaska").unwrap(), &TerritoryState { owner: "blue".into(), armies: 2 });
        assert_eq!(s.territory_count("red") + s.territory_count("blue"), 42);
    }
}
