//! Phrase-based translation with a discriminative phrase classifier that
//! conditions on source and target context.

pub mod classifier;
pub mod cli;
pub mod corpus;
pub mod decoder;
pub mod error;
pub mod eval;
pub mod examples;
pub mod features;
pub mod lm;
pub mod phrases;
pub mod synthetic;

pub use error::{Error, Result};
