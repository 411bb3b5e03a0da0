pub mod backend;
pub mod context;
pub mod corpus;
pub mod gender;
pub mod process;
pub mod tagger;
pub mod template;
pub mod text;
pub mod engine;
pub mod metrics;
pub mod config;
pub mod runner;
