//! Input parsing, pipeline orchestration and report output for the `hyplat`
//! command.

pub mod batch;
pub mod input;
pub mod pipeline;
pub mod report;
