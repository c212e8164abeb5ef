//! Human-readable summary of a trace file.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use factual_core::agent::{AgentId, AtnState};
use factual_core::swarm::{EventBody, TraceEvent};

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub text: String,
    pub warnings: Vec<String>,
}

#[derive(Default)]
struct AgentHistory {
    class: String,
    states: Vec<(u64, AtnState)>,
    extrema: Option<[(f64, f64); 5]>,
}

impl AgentHistory {
    fn observe(&mut self, values: [f64; 5]) {
        let ext = self.extrema.get_or_insert(values.map(|v| (v, v)));
        for (slot, v) in ext.iter_mut().zip(values) {
            slot.0 = slot.0.min(v);
            slot.1 = slot.1.max(v);
        }
    }
}

/// Summarizes `trace`. A line that does not parse ends the report early
/// with a warning; everything before it is still summarized.
pub fn summarize(trace: &str) -> Report {
    let mut warnings = Vec::new();
    let mut agents: BTreeMap<AgentId, AgentHistory> = BTreeMap::new();
    let mut clusters = Vec::new();
    let mut events = 0usize;
    let mut last_tick = 0;

    for (i, line) in trace.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let event: TraceEvent = match serde_json::from_str(line) {
            Ok(e) => e,
            Err(e) => {
                warnings.push(format!("trace truncated at line {}: {e}; report covers earlier lines only", i + 1));
                break;
            }
        };
        events += 1;
        last_tick = event.tick;
        match event.body {
            EventBody::AgentCreated { agent, class, .. } => {
                let h = agents.entry(agent).or_default();
                h.class = class;
                h.states.push((event.tick, AtnState::Initialisation));
            }
            EventBody::TransitionFired { agent, to, .. } => {
                agents.entry(agent).or_default().states.push((event.tick, to));
            }
            EventBody::IndicatorsUpdated { agent, pp, ps, pa, si, ci, .. } => {
                agents.entry(agent).or_default().observe([pp, ps, pa, si, ci]);
            }
            EventBody::ClusterReported { members, min_proximity, dominant_state } => {
                clusters.push((event.tick, dominant_state, min_proximity, members));
            }
            _ => {}
        }
    }

    let mut text = String::new();
    if events == 0 {
        return Report { text, warnings };
    }
    let width = agents.keys().map(|a| a.as_str().len()).max().unwrap_or(5).max(5);
    writeln!(text, "{events} events, {} agents, last tick {last_tick}", agents.len()).unwrap();

    writeln!(text, "\nstate timeline").unwrap();
    for (id, h) in &agents {
        let steps: Vec<String> = h.states.iter().map(|(t, s)| format!("{t}:{s}")).collect();
        writeln!(text, "  {:width$}  {:10}  {}", id.as_str(), h.class, steps.join(" ")).unwrap();
    }

    writeln!(text, "\nindicator extrema (min..max)").unwrap();
    writeln!(text, "  {:width$}  {:>17}  {:>17}  {:>17}  {:>13}  {:>13}", "agent", "PP", "PS", "PA", "SI", "CI")
        .unwrap();
    for (id, h) in &agents {
        let Some(ext) = h.extrema else { continue };
        let cells: Vec<String> = ext
            .iter()
            .enumerate()
            .map(|(i, (lo, hi))| {
                let w = if i < 3 { 17 } else { 13 };
                format!("{:>w$}", format!("{lo:.3}..{hi:.3}"))
            })
            .collect();
        writeln!(text, "  {:width$}  {}", id.as_str(), cells.join("  ")).unwrap();
    }

    writeln!(text, "\nclusters").unwrap();
    if clusters.is_empty() {
        writeln!(text, "  none").unwrap();
    } else {
        writeln!(text, "  {:>6}  {:12}  {:>5}  members", "tick", "state", "min").unwrap();
        for (tick, state, min, members) in &clusters {
            let names: Vec<&str> = members.iter().map(AgentId::as_str).collect();
            writeln!(text, "  {tick:>6}  {:12}  {min:>5.2}  {}", state.to_string(), names.join(", ")).unwrap();
        }
    }
    Report { text, warnings }
}
