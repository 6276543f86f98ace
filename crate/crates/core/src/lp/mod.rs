//! Least-privilege analysis over audit logs: per-statement last-used dates,
//! unused-statement reports, and policies generated from observed activity.

mod generate;
mod usage;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

pub use generate::{
    complement_sample, generate_least_privilege, replay_verify, GeneratedPolicy, Verification,
    EXCESS_SAMPLE_CAP,
};
pub use usage::{
    build_usage_index, unused_report, Observation, StatementKey, UnusedEntry, UnusedReport,
    UsageIndex,
};

use crate::eval::EvalError;
use crate::org::OrgError;
use crate::policy::PolicyError;
use crate::time::Timestamp;

#[derive(Debug, thiserror::Error)]
pub enum LpError {
    #[error("event {index}: {source}")]
    Event {
        index: usize,
        #[source]
        source: EvalError,
    },
    #[error("event {index} at {time} is earlier than the previous event at {previous}")]
    OutOfOrder {
        index: usize,
        time: Timestamp,
        previous: Timestamp,
    },
    #[error("no allowed activity for {principal} in window {window}")]
    NoObservations { principal: Principal, window: Window },
    #[error("generation level must be 2, 3 or 4, got {0}")]
    Level(u8),
    #[error("invalid principal `{0}`, expected USER@ACCOUNT")]
    InvalidPrincipal(String),
    #[error("invalid window `{0}`")]
    InvalidWindow(String),
    #[error(transparent)]
    Org(#[from] OrgError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

/// A user acting in one account.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Principal {
    pub user: String,
    pub account: String,
}

impl Principal {
    pub fn new(user: &str, account: &str) -> Self {
        Self {
            user: user.to_owned(),
            account: account.to_owned(),
        }
    }
}

impl fmt::Display for Principal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.user, self.account)
    }
}

impl FromStr for Principal {
    type Err = LpError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.rsplit_once('@') {
            Some((user, account)) if !user.is_empty() && !account.is_empty() => {
                Ok(Principal::new(user, account))
            }
            _ => Err(LpError::InvalidPrincipal(s.to_owned())),
        }
    }
}

/// Closed time interval `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Window {
    pub start: Timestamp,
    pub end: Timestamp,
}

impl Window {
    pub fn new(start: Timestamp, end: Timestamp) -> Result<Self, LpError> {
        if start > end {
            return Err(LpError::InvalidWindow(format!("{start}..{end}")));
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, t: Timestamp) -> bool {
        self.start <= t && t <= self.end
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

impl FromStr for Window {
    type Err = LpError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let invalid = || LpError::InvalidWindow(s.to_owned());
        let (start, end) = s.split_once("..").ok_or_else(invalid)?;
        let start = start.parse().map_err(|_| invalid())?;
        let end = end.parse().map_err(|_| invalid())?;
        Window::new(start, end)
    }
}

#[cfg(test)]
mod tests;
