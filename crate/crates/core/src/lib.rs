//! Instrument development and evaluation toolkit for age-appropriate software.
//!
//! The crate covers the whole workflow: Delphi round analytics ([`consensus`]), indicator
//! weighting ([`ahp`]), reliability and content validity ([`psychometrics`]), weighted scoring of
//! software ([`scoring`]), and the file formats, reports and pipeline driver that tie them
//! together ([`io`], [`report`], [`pipeline`]).

pub mod ahp;
pub mod consensus;
pub mod error;
pub mod forms;
pub mod io;
pub mod model;
mod numeric;
pub mod pipeline;
pub mod psychometrics;
pub mod report;
pub mod scoring;

pub use error::{Error, ErrorClass, Result};
pub use numeric::format_half_even;
