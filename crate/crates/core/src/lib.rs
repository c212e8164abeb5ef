//! Situation representation by a swarm of factual agents.
//!
//! Each described object of the domain gets one agent that carries its most
//! recent semantic feature. Agents compare features through a proximity
//! measure, track how their own feature moves through a small set of
//! indicators, and advance through an automaton whose transitions send
//! support or aggression to their acquaintances. Groups of agents that agree
//! strongly with each other are reported as clusters.

pub mod agent;
pub mod proximity;
pub mod semantic;
pub mod swarm;
