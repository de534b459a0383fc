//! Prosodic feature extraction and speaker-certainty modelling.

pub mod audio;
pub mod corpus;
pub mod experiments;
pub mod featuresets;
pub mod models;
pub mod prosody;
pub mod stats;
pub mod synthetic;
