use serde::{Deserialize, Serialize};

/// Engine tunables. Every field has a default, so an empty TOML table is a
/// valid configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    /// Minimum mutual friend proximity for a cluster edge, in (0, 1].
    pub cluster_threshold: f64,
    /// Smallest reported cluster, at least 2.
    pub min_cluster_size: usize,
    /// Smoothing factor for SI and CI, in (0, 1).
    pub alpha: f64,
    /// Influence of one Support message (positive).
    pub support_amount: f64,
    /// Magnitude of one Aggression message; sent as a negative amount.
    pub aggression_amount: f64,
    /// Bounds applied to the summed inbox before it is added to PP.
    pub influence_min: f64,
    pub influence_max: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            cluster_threshold: 0.4,
            min_cluster_size: 2,
            alpha: 0.25,
            support_amount: 0.5,
            aggression_amount: 0.5,
            influence_min: -1.0,
            influence_max: 1.0,
        }
    }
}

impl EngineConfig {
    pub fn check(&self) -> Result<(), String> {
        if !(self.cluster_threshold > 0.0 && self.cluster_threshold <= 1.0) {
            return Err(format!("cluster_threshold {} must lie in (0, 1]", self.cluster_threshold));
        }
        if self.min_cluster_size < 2 {
            return Err("min_cluster_size must be at least 2".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(format!("alpha {} must lie in (0, 1)", self.alpha));
        }
        if !(self.support_amount > 0.0 && self.support_amount.is_finite()) {
            return Err("support_amount must be positive".into());
        }
        if !(self.aggression_amount > 0.0 && self.aggression_amount.is_finite()) {
            return Err("aggression_amount must be positive".into());
        }
        if !(self.influence_min <= self.influence_max
            && self.influence_min.is_finite()
            && self.influence_max.is_finite())
        {
            return Err("influence bounds must be finite with min <= max".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        EngineConfig::default().check().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let bad = [
            EngineConfig { cluster_threshold: 0.0, ..Default::default() },
            EngineConfig { min_cluster_size: 1, ..Default::default() },
            EngineConfig { alpha: 1.0, ..Default::default() },
            EngineConfig { support_amount: -0.5, ..Default::default() },
            EngineConfig { influence_min: 1.0, influence_max: -1.0, ..Default::default() },
        ];
        for c in bad {
            assert!(c.check().is_err(), "{c:?}");
        }
    }
}
