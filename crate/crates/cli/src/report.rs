//! JSON report envelope shared by every command.
//!
//! Reports embed the resolved configuration and the convention version tag
//! and contain no timestamps, so identical config + seed reproduces files
//! byte for byte.

use crate::config::RunConfig;
use crate::CmdError;
use serde::Serialize;
use std::fs;
use std::path::Path;

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    convention_version: &'static str,
    config: &'a RunConfig,
    #[serde(flatten)]
    body: T,
}

pub fn write_report<T: Serialize>(
    path: &Path,
    config: &RunConfig,
    body: T,
) -> Result<(), CmdError> {
    let report = Report {
        convention_version: krf_core::CONVENTION_VERSION,
        config,
        body,
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| CmdError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CmdError> {
    fs::write(path, text).map_err(|e| CmdError::io(path, e))
}
