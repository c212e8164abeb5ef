//! Time, spatial, and semantic proximity between features, their product,
//! and the verbal closeness scale.
//!
//! Values live on [-1, 1] with 0 as the neutral reference. Only the semantic
//! factor may be negative; the time and spatial kernels are in [0, 1], so the
//! sign of the global product is always the sign of the semantic factor.

mod ontology;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use ontology::{class_atom, OntologyError, OntologyFile, OntologyTable, ProximityConfig, SpatialGraph};

use crate::semantic::{SemanticFeature, Value};

/// Qualification read as a feature's location by the spatial kernel.
pub const LOCATION_QUALIFICATION: &str = "location";

/// A proximity in [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ProximityValue(f64);

impl ProximityValue {
    pub const NEUTRAL: ProximityValue = ProximityValue(0.0);
    pub const EQUAL: ProximityValue = ProximityValue(1.0);

    pub fn new(value: f64) -> Option<Self> {
        // adding 0.0 turns -0.0 into 0.0 and leaves everything else alone
        (-1.0..=1.0).contains(&value).then_some(Self(value + 0.0))
    }

    /// Clamps into range; NaN maps to neutral.
    pub fn clamped(value: f64) -> Self {
        if value.is_nan() {
            Self::NEUTRAL
        } else {
            Self(value.clamp(-1.0, 1.0) + 0.0)
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_neutral(self) -> bool {
        self.0 == 0.0
    }
}

impl TryFrom<f64> for ProximityValue {
    type Error = String;

    fn try_from(v: f64) -> Result<Self, Self::Error> {
        Self::new(v).ok_or_else(|| format!("proximity {v} outside [-1, 1]"))
    }
}

impl From<ProximityValue> for f64 {
    fn from(p: ProximityValue) -> f64 {
        p.0
    }
}

/// Semantic proximity from the ontology.
///
/// Features with the same key and non-time content are equal (1). Otherwise
/// the key pair is looked up first (identical keys default to 1), then the
/// class pair; anything unlisted is neutral.
pub fn semantic_proximity(a: &SemanticFeature, b: &SemanticFeature, ontology: &OntologyTable) -> ProximityValue {
    if a.same_content(b) {
        return ProximityValue::EQUAL;
    }
    if let Some(v) = ontology.explicit(a.key(), b.key()) {
        return ProximityValue::clamped(v);
    }
    if a.key() == b.key() {
        return ProximityValue::EQUAL;
    }
    if let (Some(ca), Some(cb)) = (a.class(), b.class()) {
        if let Some(v) = ontology.explicit(&class_atom(ca), &class_atom(cb)) {
            return ProximityValue::clamped(v);
        }
    }
    ProximityValue::NEUTRAL
}

/// Linear decay over the time window: `max(0, 1 - |t1 - t2| / tau)`.
pub fn time_proximity(t1: u64, t2: u64, config: &ProximityConfig) -> ProximityValue {
    let gap = t1.abs_diff(t2);
    if gap >= config.time_window {
        ProximityValue::NEUTRAL
    } else {
        ProximityValue(1.0 - gap as f64 / config.time_window as f64)
    }
}

/// `lambda ^ hops` on the spatial graph; 1 for the same location, 0 when
/// unknown or unreachable.
pub fn spatial_proximity(l1: &str, l2: &str, config: &ProximityConfig) -> ProximityValue {
    if l1 == l2 {
        return ProximityValue::EQUAL;
    }
    match config.graph.hop_distance(l1, l2) {
        Some(hops) => ProximityValue(config.hop_decay.powi(hops.min(i32::MAX as u32) as i32)),
        None => ProximityValue::NEUTRAL,
    }
}

fn location(f: &SemanticFeature) -> Option<&str> {
    match f.get(LOCATION_QUALIFICATION)? {
        Value::Symbol(s) => Some(s),
        _ => None,
    }
}

/// The three factors and their product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proximity {
    pub time: ProximityValue,
    pub spatial: ProximityValue,
    pub semantic: ProximityValue,
    pub global: ProximityValue,
}

pub fn proximity(
    a: &SemanticFeature,
    b: &SemanticFeature,
    ontology: &OntologyTable,
    config: &ProximityConfig,
) -> Proximity {
    let time = time_proximity(a.time(), b.time(), config);
    let spatial = match (location(a), location(b)) {
        (Some(la), Some(lb)) => spatial_proximity(la, lb, config),
        _ => ProximityValue::EQUAL,
    };
    let semantic = semantic_proximity(a, b, ontology);
    let global = ProximityValue::clamped(time.0 * spatial.0 * semantic.0);
    Proximity { time, spatial, semantic, global }
}

/// Product of time, spatial and semantic proximity.
pub fn global_proximity(
    a: &SemanticFeature,
    b: &SemanticFeature,
    ontology: &OntologyTable,
    config: &ProximityConfig,
) -> ProximityValue {
    proximity(a, b, ontology, config).global
}

/// Verbal reading of a proximity value. Negative labels mirror positive ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ScaleLabel {
    Opposite,
    VeryDifferent,
    Different,
    QuietDifferent,
    Neutral,
    QuietClose,
    Close,
    VeryClose,
    Equal,
}

impl ScaleLabel {
    pub fn mirror(self) -> Self {
        use ScaleLabel::*;
        match self {
            Opposite => Equal,
            VeryDifferent => VeryClose,
            Different => Close,
            QuietDifferent => QuietClose,
            Neutral => Neutral,
            QuietClose => QuietDifferent,
            Close => Different,
            VeryClose => VeryDifferent,
            Equal => Opposite,
        }
    }

    /// 0 for Neutral up to 4 for Equal/Opposite.
    pub fn strength(self) -> u8 {
        use ScaleLabel::*;
        match self {
            Neutral => 0,
            QuietClose | QuietDifferent => 1,
            Close | Different => 2,
            VeryClose | VeryDifferent => 3,
            Equal | Opposite => 4,
        }
    }
}

impl fmt::Display for ScaleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Lower-closed bands at |v| = 1, 0.9, 0.7, 0.4.
pub fn classify_scale(v: ProximityValue) -> ScaleLabel {
    let magnitude = v.0.abs();
    let positive = if magnitude >= 1.0 {
        ScaleLabel::Equal
    } else if magnitude >= 0.9 {
        ScaleLabel::VeryClose
    } else if magnitude >= 0.7 {
        ScaleLabel::Close
    } else if magnitude >= 0.4 {
        ScaleLabel::QuietClose
    } else {
        ScaleLabel::Neutral
    };
    if v.0 < 0.0 {
        positive.mirror()
    } else {
        positive
    }
}
