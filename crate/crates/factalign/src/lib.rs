//! Std companion to `factalign-core`: dump readers, JSONL file formats, remote
//! model adapters, the annotation service and the pipeline driver behind the
//! `factalign` binary.

pub mod annotation;
pub mod config;
pub mod dump;
pub mod entity_dump;
pub mod formats;
pub mod glossary;
pub mod http_providers;
pub mod manifest;
pub mod pipeline;
pub mod recording;
pub mod report;

pub use factalign_core as core;
