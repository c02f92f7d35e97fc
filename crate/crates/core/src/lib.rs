//! Emotion-cause analysis in conversations: corpus handling, dataset
//! construction, chain-of-thought prompting against a completion backend,
//! span correction and scoring.

pub mod backend;
pub mod chain;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod correction;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod label;
pub mod stats;
pub mod submission;

pub use error::{Error, Result};
pub use label::EmotionLabel;
