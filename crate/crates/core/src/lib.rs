//! Narrative function taxonomy, annotation, paradigm mining and evaluation
//! for web-fiction storylines.

pub mod annotation;
pub mod paradigm;
pub mod taxonomy;
pub mod homogenization;
pub mod metrics;
pub mod fixtures;
pub mod harness;
pub mod cli;
