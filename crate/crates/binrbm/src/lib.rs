//! File formats, trajectory writers, experiment pipelines and the `binrbm`
//! command-line tool built on [`binrbm_core`].

pub mod cli;
pub mod container;
pub mod error;
pub mod experiment;
pub mod idx;
pub mod manifest;
pub mod plot;
pub mod sink;

pub use error::{Error, Result};
