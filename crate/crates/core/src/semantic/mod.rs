//! Object/feature data model and its text formats.

mod feature;
mod schema;

pub use feature::{
    diff_features, parse_feature, DiffError, FeatureDelta, FeatureError, SemanticFeature, Value, TIME_QUALIFICATION,
};
pub use schema::{validate_feature, ObjectSchema, SchemaError, ValidationError, ValueKind};
