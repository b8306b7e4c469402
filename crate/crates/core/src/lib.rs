//! A deterministic engine for a privacy mixer that invests pooled deposits
//! in a lending protocol and rewards long-lived deposits with governance
//! tokens.

pub mod amount;
pub mod cli;
pub mod client;
pub mod contract;
pub mod fieldhash;
pub mod ledger;
pub mod lending;
pub mod merkle;
pub mod pool;
pub mod privacy;
pub mod zkrelation;
