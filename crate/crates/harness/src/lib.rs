//! Scenario files, the built-in scenario library, sweep orchestration and
//! output writers around the `bivelocity` solvers.

pub mod check;
pub mod config;
pub mod output;
pub mod profiles;
pub mod runner;
pub mod scenarios;
