//! Scenery reconstruction along a recurrent random walk with exponentially
//! decaying jumps.

pub mod cli;
pub mod engine;
pub mod error;
pub mod events;
pub mod interval;
pub mod observe;
pub mod paths;
pub mod reconstruct;
pub mod scenery;
pub mod seed;
pub mod walk;

pub use error::{Condition, Error, Result};
pub use interval::Interval;
