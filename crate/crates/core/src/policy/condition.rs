use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::glob::glob_match;
use super::PolicyError;

/// Request context: free-form string keys to string values.
pub type Context = BTreeMap<String, String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ConditionOperator {
    StringEquals,
    StringLike,
}

impl ConditionOperator {
    pub fn as_str(self) -> &'static str {
        match self {
            ConditionOperator::StringEquals => "StringEquals",
            ConditionOperator::StringLike => "StringLike",
        }
    }

    fn accepts(self, expected: &str, actual: &str) -> bool {
        match self {
            ConditionOperator::StringEquals => expected == actual,
            ConditionOperator::StringLike => glob_match(expected, actual),
        }
    }
}

impl FromStr for ConditionOperator {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "StringEquals" => Ok(ConditionOperator::StringEquals),
            "StringLike" => Ok(ConditionOperator::StringLike),
            other => Err(PolicyError::UnsupportedOperator(other.to_owned())),
        }
    }
}

impl fmt::Display for ConditionOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `Condition` element of a statement: operator → key → accepted values.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ConditionBlock {
    clauses: BTreeMap<ConditionOperator, BTreeMap<String, Vec<String>>>,
}

impl ConditionBlock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Adds (or replaces) the accepted values for `key` under `op`.
    pub fn insert(&mut self, op: ConditionOperator, key: impl Into<String>, values: Vec<String>) {
        self.clauses.entry(op).or_default().insert(key.into(), values);
    }

    pub fn clauses(&self) -> &BTreeMap<ConditionOperator, BTreeMap<String, Vec<String>>> {
        &self.clauses
    }

    /// Every clause must hold. A clause holds when the context has the key and
    /// its value is accepted by at least one listed value.
    pub fn holds(&self, context: &Context) -> bool {
        self.clauses.iter().all(|(op, keys)| {
            keys.iter().all(|(key, expected)| match context.get(key) {
                Some(actual) => expected.iter().any(|e| op.accepts(e, actual)),
                None => false,
            })
        })
    }
}

pub fn condition_holds(block: &ConditionBlock, context: &Context) -> bool {
    block.holds(context)
}

/// Wire form: `{"StringEquals": {"key": "v" | ["v", ...]}}`.
pub(crate) type RawCondition = BTreeMap<String, BTreeMap<String, OneOrMany>>;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub(crate) enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

impl OneOrMany {
    pub(crate) fn into_vec(self) -> Vec<String> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(vs) => vs,
        }
    }
}

impl ConditionBlock {
    pub(crate) fn from_raw(raw: RawCondition) -> Result<Self, PolicyError> {
        let mut block = ConditionBlock::new();
        for (op, keys) in raw {
            let op: ConditionOperator = op.parse()?;
            for (key, values) in keys {
                let values = values.into_vec();
                if values.is_empty() {
                    return Err(PolicyError::EmptyConditionValues(key));
                }
                block.insert(op, key, values);
            }
        }
        Ok(block)
    }
}

impl<'de> Deserialize<'de> for ConditionBlock {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawCondition::deserialize(deserializer)?;
        ConditionBlock::from_raw(raw).map_err(serde::de::Error::custom)
    }
}

impl Serialize for ConditionBlock {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.clauses.serialize(serializer)
    }
}
