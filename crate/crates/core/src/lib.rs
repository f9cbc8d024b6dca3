//! Mining labeled bug-report corpora from issue trackers and classifying
//! reports by root cause (semantic, memory, concurrency).

pub mod cli;
pub mod corpus;
pub mod eval;
pub mod githubclient;
pub mod models;
pub mod synth;
pub mod textprep;
