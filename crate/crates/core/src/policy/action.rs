use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::PolicyError;

fn is_service_token(s: &str) -> bool {
    !s.is_empty()
        && s
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-')
}

fn is_operation_token(s: &str) -> bool {
    !s.is_empty()
        && s
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_')
}

/// A concrete action such as `s3:PutObject`. Never contains a wildcard.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action {
    service: String,
    operation: String,
}

impl Action {
    pub fn new(service: &str, operation: &str) -> Result<Self, PolicyError> {
        if !is_service_token(service) || !is_operation_token(operation) {
            return Err(PolicyError::InvalidAction {
                value: format!("{service}:{operation}"),
                reason: "expected a concrete `service:Operation`",
            });
        }
        Ok(Self {
            service: service.to_owned(),
            operation: operation.to_owned(),
        })
    }

    pub fn service(&self) -> &str {
        &self.service
    }

    pub fn operation(&self) -> &str {
        &self.operation
    }
}

impl FromStr for Action {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.contains('*') {
            return Err(PolicyError::InvalidAction {
                value: s.to_owned(),
                reason: "concrete actions cannot contain `*`",
            });
        }
        match s.split_once(':') {
            Some((service, operation)) if !operation.contains(':') => {
                Action::new(service, operation)
            }
            _ => Err(PolicyError::InvalidAction {
                value: s.to_owned(),
                reason: "expected exactly one `:`",
            }),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.service, self.operation)
    }
}

/// Position in the four-tier action hierarchy, from full access (1) to a
/// single concrete action (4).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum ActionLevel {
    /// `*:*`
    All = 1,
    /// `service:*`
    Service = 2,
    /// `service:Verb*`
    Verb = 3,
    /// `service:Operation`
    Exact = 4,
}

impl ActionLevel {
    pub const ALL: [ActionLevel; 4] = [
        ActionLevel::All,
        ActionLevel::Service,
        ActionLevel::Verb,
        ActionLevel::Exact,
    ];

    pub fn as_u8(self) -> u8 {
        self as u8
    }
}

impl TryFrom<u8> for ActionLevel {
    type Error = PolicyError;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        match value {
            1 => Ok(ActionLevel::All),
            2 => Ok(ActionLevel::Service),
            3 => Ok(ActionLevel::Verb),
            4 => Ok(ActionLevel::Exact),
            other => Err(PolicyError::InvalidLevel(other)),
        }
    }
}

impl fmt::Display for ActionLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// An action pattern in a policy statement. Wildcards are only allowed as
/// the whole pattern (`*` / `*:*`) or as the trailing character of the
/// operation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActionPattern {
    /// `*:*`, any operation in any service.
    All,
    /// `service:*`
    Service(String),
    /// `service:Prefix*` with a non-empty prefix.
    Prefix { service: String, prefix: String },
    /// A concrete action.
    Exact(Action),
}

impl ActionPattern {
    pub fn matches(&self, action: &Action) -> bool {
        match self {
            ActionPattern::All => true,
            ActionPattern::Service(service) => *service == action.service,
            ActionPattern::Prefix { service, prefix } => {
                *service == action.service && action.operation.starts_with(prefix.as_str())
            }
            ActionPattern::Exact(exact) => exact == action,
        }
    }

    pub fn level(&self) -> ActionLevel {
        match self {
            ActionPattern::All => ActionLevel::All,
            ActionPattern::Service(_) => ActionLevel::Service,
            ActionPattern::Prefix { .. } => ActionLevel::Verb,
            ActionPattern::Exact(_) => ActionLevel::Exact,
        }
    }

    /// The service this pattern is scoped to, or `None` for `*:*`.
    pub fn service(&self) -> Option<&str> {
        match self {
            ActionPattern::All => None,
            ActionPattern::Service(s) | ActionPattern::Prefix { service: s, .. } => Some(s),
            ActionPattern::Exact(a) => Some(a.service()),
        }
    }
}

/// True iff `pattern` covers the concrete `action`. Case-sensitive.
pub fn action_matches(pattern: &ActionPattern, action: &Action) -> bool {
    pattern.matches(action)
}

pub fn classify_action_level(pattern: &ActionPattern) -> ActionLevel {
    pattern.level()
}

impl FromStr for ActionPattern {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let invalid = |reason| PolicyError::InvalidAction {
            value: s.to_owned(),
            reason,
        };
        if s == "*" || s == "*:*" {
            return Ok(ActionPattern::All);
        }
        let (service, operation) = s.split_once(':').ok_or_else(|| invalid("missing `:`"))?;
        if operation.contains(':') {
            return Err(invalid("more than one `:`"));
        }
        if service.contains('*') {
            return Err(invalid("service cannot contain `*`"));
        }
        if !is_service_token(service) {
            return Err(invalid("service must be a lowercase token"));
        }
        if operation == "*" {
            return Ok(ActionPattern::Service(service.to_owned()));
        }
        match operation.find('*') {
            None => Action::new(service, operation)
                .map(ActionPattern::Exact)
                .map_err(|_| invalid("invalid operation")),
            Some(idx) if idx + 1 == operation.len() => {
                let prefix = &operation[..idx];
                if !is_operation_token(prefix) {
                    return Err(invalid("invalid operation prefix"));
                }
                Ok(ActionPattern::Prefix {
                    service: service.to_owned(),
                    prefix: prefix.to_owned(),
                })
            }
            Some(_) => Err(invalid("`*` is only allowed at the end of the operation")),
        }
    }
}

impl fmt::Display for ActionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionPattern::All => f.write_str("*:*"),
            ActionPattern::Service(s) => write!(f, "{s}:*"),
            ActionPattern::Prefix { service, prefix } => write!(f, "{service}:{prefix}*"),
            ActionPattern::Exact(a) => a.fmt(f),
        }
    }
}

macro_rules! string_serde {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let raw = String::deserialize(deserializer)?;
                raw.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

string_serde!(Action);
string_serde!(ActionPattern);
