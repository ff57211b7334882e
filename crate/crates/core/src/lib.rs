//! Accent transformation toolkit core library.

pub mod align;
pub mod dsl;
pub mod g2p;
pub mod inventory;
pub mod metrics;
pub mod presets;
pub mod rules;
pub mod segment;
pub mod tokenize;
pub mod trace;
