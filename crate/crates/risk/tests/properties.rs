use std::collections::{BTreeMap, BTreeSet};

use factual_core::proximity::OntologyFile;
use factual_core::semantic::{ObjectSchema, Value};
use factual_risk::*;
use proptest::prelude::*;

const BOARD: &str = include_str!("../../../data/risk/board.txt");

/// Adjacency read straight from the board file, independent of `Board`.
fn raw_adjacency() -> BTreeMap<String, BTreeSet<String>> {
    let mut adj = BTreeMap::new();
    for line in BOARD.lines().filter(|l| l.starts_with("adjacent ")) {
        let (head, tail) = line.split_once(':').unwrap();
        let name = head.trim_start_matches("adjacent ").trim().to_string();
        adj.insert(name, tail.split(',').map(|s| s.trim().to_string()).collect());
    }
    adj
}

/// Minimal rules model: owner and armies per territory.
fn oracle_check(
    adj: &BTreeMap<String, BTreeSet<String>>,
    held: &mut BTreeMap<String, (String, u32)>,
    pending: &mut Option<String>,
    event: &GameEvent,
) -> bool {
    match &event.kind {
        EventKind::Claim { territory, player, armies } => {
            if held.contains_key(territory) || *armies == 0 || !adj.contains_key(territory) {
                return false;
            }
            held.insert(territory.clone(), (player.clone(), *armies));
        }
        _ if held.len() < adj.len() || pending.is_some() && !matches!(event.kind, EventKind::Conquest { .. }) => {
            return false
        }
        EventKind::Placement { territory, armies } => {
            if *armies == 0 {
                return false;
            }
            held.get_mut(territory).unwrap().1 += armies;
        }
        EventKind::BattleOutcome { attacker, defender, attacker_loss, defender_loss } => {
            let (ao, aa) = held[attacker].clone();
            let (dow, da) = held[defender].clone();
            if !adj[attacker].contains(defender) || ao == dow || attacker_loss + defender_loss == 0 {
                return false;
            }
            if *attacker_loss >= aa || *defender_loss > da {
                return false;
            }
            held.get_mut(attacker).unwrap().1 -= attacker_loss;
            held.get_mut(defender).unwrap().1 -= defender_loss;
            if da == *defender_loss {
                *pending = Some(defender.clone());
            }
        }
        EventKind::Conquest { territory, new_owner, armies } => {
            if pending.as_ref() != Some(territory) || held[territory].0 == *new_owner || *armies == 0 {
                return false;
            }
            if !adj[territory].iter().any(|n| held[n].0 == *new_owner) {
                return false;
            }
            held.insert(territory.clone(), (new_owner.clone(), *armies));
            *pending = None;
        }
    }
    true
}

#[test]
fn simulated_logs_pass_the_oracle() {
    let board = Board::classic();
    let adj = raw_adjacency();
    for seed in [1, 7, 42, 1234] {
        let log = simulate_game(&board, &DEFAULT_PLAYERS, seed, 2000);
        let mut held = BTreeMap::new();
        let mut pending = None;
        let mut state = GameState::new(board.clone());
        for (i, e) in log.iter().enumerate() {
            assert!(oracle_check(&adj, &mut held, &mut pending, e), "seed {seed} event {i}: {e}");
            state.apply_event(e).unwrap_or_else(|err| panic!("seed {seed} event {i} {e}: {err}"));
        }
    }
}

#[test]
fn emission_soundness_and_conservation() {
    let board = Board::classic();
    for seed in [3, 11, 99] {
        let log = simulate_game(&board, &DEFAULT_PLAYERS, seed, 3000);
        let mut state = GameState::new(board.clone());
        let mut last_armies: BTreeMap<String, i64> = BTreeMap::new();
        let mut armies_sum: BTreeMap<String, i64> = BTreeMap::new();
        let mut counts: BTreeMap<String, i64> = BTreeMap::new();
        for e in &log {
            for f in state.apply_event(e).unwrap() {
                if let Some(Value::Int(n)) = f.get("nbArmies") {
                    let prev = last_armies.insert(f.key().to_string(), *n).unwrap_or(0);
                    *armies_sum.entry(f.key().to_string()).or_default() += n - prev;
                }
                if let Some(Value::Int(n)) = f.get("nbTerritories") {
                    counts.insert(f.key().to_string(), *n);
                }
            }
            if state.setup_complete() {
                assert_eq!(counts.values().sum::<i64>(), 42, "after {e}");
            }
        }
        for (t, s) in state.territories() {
            assert_eq!(armies_sum[t], i64::from(s.armies), "{t}");
        }
    }
}

#[test]
fn shipped_schema_matches_generator() {
    let text = include_str!("../../../data/risk/schema.txt");
    assert_eq!(ObjectSchema::parse(text).unwrap(), risk_schema(&Board::classic(), &PLAYER_COLOURS));
}

#[test]
fn shipped_ontology_matches_generator() {
    let text = include_str!("../../../data/risk/ontology.txt");
    let file = OntologyFile::parse(text).unwrap();
    let (table, config) = build_risk_ontology(&Board::classic());
    assert_eq!(file.table, table);
    assert_eq!(file.config, config);
}

#[test]
fn shipped_scenarios_replay_cleanly() {
    let board = Board::classic();
    for text in [
        include_str!("../../../data/risk/scenarios/alaska.events"),
        include_str!("../../../data/risk/scenarios/continent_conquest.events"),
        include_str!("../../../data/risk/scenarios/losing_streak.events"),
    ] {
        let events: Vec<GameEvent> = parse_event_log(text).unwrap().into_iter().map(|(_, e)| e).collect();
        assert!(events_to_features(&board, &events).is_ok());
    }
}

#[test]
fn ownership_ontology_tracks_game_state() {
    use factual_core::swarm::DomainAdapter;
    let board = Board::classic();
    let log = simulate_game(&board, &DEFAULT_PLAYERS, 5, 1500);
    let (mut table, _) = build_risk_ontology(&board);
    let mut state = GameState::new(board.clone());
    let mut carried: BTreeMap<String, factual_core::semantic::SemanticFeature> = BTreeMap::new();
    for e in &log {
        for f in state.apply_event(e).unwrap() {
            RiskAdapter.observe(carried.get(f.key()), &f, &mut table);
            carried.insert(f.key().to_string(), f);
        }
    }
    for (t, s) in state.territories() {
        assert_eq!(table.get(&s.owner, t), 0.7, "{t}");
        for p in DEFAULT_PLAYERS {
            let v = table.get(p, t);
            assert!(p == s.owner || v == 0.0 || v == -0.7);
        }
        let losers = DEFAULT_PLAYERS.iter().filter(|p| table.get(p, t) < 0.0).count();
        assert!(losers <= 1, "{t}");
    }
    // adjacency entries never turn negative
    for (a, b) in board.edges() {
        assert_eq!(table.get(a, b), 0.4);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn any_seed_replays(seed in any::<u64>(), steps in 0usize..600) {
        let board = Board::classic();
        let log = simulate_game(&board, &DEFAULT_PLAYERS, seed, steps);
        prop_assert_eq!(log.len(), steps);
        prop_assert!(events_to_features(&board, &log).is_ok());
        let text = format_event_log(&log);
        let back: Vec<GameEvent> = parse_event_log(&text).unwrap().into_iter().map(|(_, e)| e).collect();
        prop_assert_eq!(back, log);
    }
}
