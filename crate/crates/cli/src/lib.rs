//! Command-line front end: the batch pipeline, its reports and plots, and
//! the synthetic validation suite.

pub mod config;
pub mod demo;
pub mod error;
pub mod manifest;
pub mod pipeline;
pub mod plots;
pub mod report;
pub mod validate;
