//! Quantumization of finite classical games.
//!
//! A classical n-player game is lifted onto a composite quantum system: the
//! judge prepares a (possibly entangled) state, each player applies a local
//! unitary, and a projective measurement whose outcomes are the classical
//! plays decides the payoffs. Expected payoffs are traces against commuting
//! payoff operators. A second, sequential protocol covers games in which
//! players take turns acting on one shared system.

pub mod catalog;
pub mod classical;
pub mod cli;
pub mod equilibrium;
pub mod error;
pub mod gamefile;
pub mod quantum;
pub mod quantumizer;
pub mod report;
pub mod strategy;

pub use error::{Error, Result};
