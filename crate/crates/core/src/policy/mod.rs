//! Policy documents, action/resource patterns, conditions and the four-level
//! action hierarchy.

mod action;
mod condition;
mod document;
mod glob;
mod resource;
mod verbs;

pub use action::{action_matches, classify_action_level, Action, ActionLevel, ActionPattern};
pub use condition::{condition_holds, ConditionBlock, ConditionOperator, Context};
pub use document::{
    parse_named_policy, parse_policy, policy_from_value, serialize_policy, Effect, PolicyDocument, Statement,
    DEFAULT_POLICY_NAME, POLICY_VERSION,
};
pub use glob::glob_match;
pub use resource::{resource_matches, ResourcePattern};
pub use verbs::{generalize_action, AccessClass, Generalized, VerbTable};

#[derive(Debug, thiserror::Error)]
pub enum PolicyError {
    #[error("malformed policy document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported policy version `{0}` (expected `2012-10-17`)")]
    UnsupportedVersion(String),
    #[error("statement {statement}: effect must be `Allow` or `Deny`, got `{value}`")]
    InvalidEffect { statement: usize, value: String },
    #[error("unsupported condition operator `{0}`")]
    UnsupportedOperator(String),
    #[error("condition key `{0}` has no values")]
    EmptyConditionValues(String),
    #[error("statement {statement}: Action list is empty")]
    EmptyActions { statement: usize },
    #[error("statement {statement}: Resource list is empty")]
    EmptyResources { statement: usize },
    #[error("statement {statement}: Principal list is empty")]
    EmptyPrincipals { statement: usize },
    #[error("invalid action `{value}`: {reason}")]
    InvalidAction { value: String, reason: &'static str },
    #[error("invalid resource pattern `{0}`")]
    InvalidResource(String),
    #[error("action level must be 1-4, got {0}")]
    InvalidLevel(u8),
    #[error("level 1 (`*:*`) cannot be derived from a single action")]
    LevelOneNotPerAction,
    #[error("verb table line {line}: {reason}")]
    VerbTable { line: usize, reason: String },
}
