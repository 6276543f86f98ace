//! Multi-account cloud IAM simulator.

pub mod audit;
pub mod cli;
pub mod eval;
pub mod org;
pub mod lp;
pub mod policy;
pub mod time;
