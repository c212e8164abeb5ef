//! Seeded generator of legal event logs.
//!
//! The first events deal the board (all claims at step 1); after that one
//! event is produced per step. A battle that empties its defender is always
//! followed by the attacker's conquest.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::board::Board;
use crate::game::{EventKind, GameEvent, GameState};

pub const DEFAULT_PLAYERS: [&str; 4] = ["blue", "green", "red", "yellow"];

/// `steps` events of a game between `players`, reproducible from `seed`.
pub fn simulate_game(board: &Board, players: &[&str], seed: u64, steps: usize) -> Vec<GameEvent> {
    assert!(!players.is_empty(), "at least one player");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = GameState::new(board.clone());
    let mut events = Vec::with_capacity(steps);
    let push = |state: &mut GameState, events: &mut Vec<GameEvent>, e: GameEvent| {
        state.apply_event(&e).expect("generator emits legal events");
        events.push(e);
    };

    let mut deal: Vec<&str> = board.territories().collect();
    deal.shuffle(&mut rng);
    for (i, t) in deal.iter().enumerate().take(steps) {
        let e = GameEvent {
            step: 1,
            kind: EventKind::Claim {
                territory: t.to_string(),
                player: players[i % players.len()].to_string(),
                armies: rng.gen_range(1..=3),
            },
        };
        push(&mut state, &mut events, e);
    }

    let mut step = 2;
    let mut last_attacker: Option<String> = None;
    while events.len() < steps {
        let kind = if let Some(defender) = state.pending_conquest() {
            let owner = last_attacker.take().expect("a battle emptied the defender");
            EventKind::Conquest { territory: defender.to_string(), new_owner: owner, armies: rng.gen_range(1..=3) }
        } else {
            let battles: Vec<(&str, &str)> = board
                .territories()
                .filter(|a| state.territory(a).expect("dealt").armies >= 2)
                .flat_map(|a| board.neighbours(a).map(move |d| (a, d)))
                .filter(|(a, d)| state.territory(a).expect("dealt").owner != state.territory(d).expect("dealt").owner)
                .collect();
            if battles.is_empty() || rng.gen_bool(0.3) {
                let owned: Vec<&str> = board.territories().collect();
                let territory = owned.choose(&mut rng).expect("non-empty board").to_string();
                EventKind::Placement { territory, armies: rng.gen_range(1..=3) }
            } else {
                let (a, d) = *battles.choose(&mut rng).expect("non-empty");
                let (aa, da) = (state.territory(a).expect("dealt").armies, state.territory(d).expect("dealt").armies);
                let mut attacker_loss = rng.gen_range(0..=2.min(aa - 1));
                let defender_loss = rng.gen_range(0..=2.min(da));
                if attacker_loss + defender_loss == 0 {
                    attacker_loss = 1;
                }
                last_attacker = Some(state.territory(a).expect("dealt").owner.clone());
                EventKind::BattleOutcome {
                    attacker: a.to_string(),
                    defender: d.to_string(),
                    attacker_loss,
                    defender_loss,
                }
            }
        };
        push(&mut state, &mut events, GameEvent { step, kind });
        step += 1;
    }
    events
}
