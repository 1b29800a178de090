//! Infer configuration-option interactions from coverage.
//!
//! An interaction for a program location is a formula over configuration
//! options describing which configurations cover that location. The
//! [`inference`] loop starts from a 1-way covering array, queries a
//! [`oracle::CoverageOracle`], infers candidate formulas per location, and
//! keeps generating configurations that refine the longest candidate until
//! nothing changes.

pub mod cli;
pub mod config_space;
pub mod error;
pub mod evaluation;
pub mod formula;
pub mod inference;
pub mod interaction;
pub mod oracle;
pub mod report;

pub use config_space::{ConfigSpace, Configuration, OptionDomain, SettingSet};
pub use error::{Error, Result};
pub use formula::FormulaAst;
pub use interaction::{FinalResult, Interaction};
