//! Domain hooks: how a domain turns feature changes into valProximity and
//! how it keeps the ontology and derived features in step with the stream.

use thiserror::Error;

use crate::proximity::OntologyTable;
use crate::semantic::{FeatureDelta, SemanticFeature};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("domain adapter: {0}")]
pub struct AdapterError(pub String);

pub trait DomainAdapter: Send + Sync {
    /// Stable name, part of the configuration digest.
    fn name(&self) -> &str;

    /// Scalar summary of the change from `old` to `new` for an agent of `class`.
    fn val_proximity(&self, class: &str, old: &SemanticFeature, new: &SemanticFeature) -> Result<f64, AdapterError>;

    /// Called before `incoming` is broadcast; `previous` is the sender's
    /// carried feature, if the object was already known.
    fn observe(&self, _previous: Option<&SemanticFeature>, _incoming: &SemanticFeature, _ontology: &mut OntologyTable) {
    }

    /// The receiver's feature re-derived from a broadcast, when the incoming
    /// change touches something the receiver's own feature depends on.
    fn derive(
        &self,
        _receiver: &SemanticFeature,
        _previous: Option<&SemanticFeature>,
        _incoming: &SemanticFeature,
    ) -> Option<SemanticFeature> {
        None
    }
}

/// Domain-free adapter: valProximity is the sum of the numeric deltas.
#[derive(Debug, Clone, Copy, Default)]
pub struct NumericDeltaAdapter;

impl DomainAdapter for NumericDeltaAdapter {
    fn name(&self) -> &str {
        "numeric-delta"
    }

    fn val_proximity(&self, _class: &str, old: &SemanticFeature, new: &SemanticFeature) -> Result<f64, AdapterError> {
        Ok(FeatureDelta::between(old, new).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantic::parse_feature;

    #[test]
    fn numeric_delta_sums_changes() {
        let old = parse_feature("(x, a, 1, b, 2.5, s, up, time, 0)").unwrap();
        let new = parse_feature("(x, a, 4, b, 2.0, s, down, time, 1)").unwrap();
        assert_eq!(NumericDeltaAdapter.val_proximity("any", &old, &new), Ok(2.5));
        assert_eq!(NumericDeltaAdapter.val_proximity("any", &new, &new), Ok(0.0));
    }
}
