//! Field snapshots: a JSON header describing layout plus a flat binary of
//! little-endian f64 fields in grid index order.
//!
//! Format version 1 stores five fields per snapshot: the potential and the
//! four per-point cone monitors.

use crate::CmdError;
use krf_core::lattice::{DiagnosticFields, ScalarField};
use serde::Serialize;
use std::fs;
use std::path::Path;

pub const SNAPSHOT_FORMAT_VERSION: u32 = 1;

#[derive(Serialize)]
struct FieldEntry {
    name: &'static str,
    offset_bytes: usize,
    values: usize,
}

#[derive(Serialize)]
struct SnapshotHeader<'a> {
    format_version: u32,
    grid_n: usize,
    h: f64,
    step: usize,
    t: f64,
    endianness: &'static str,
    index_order: &'static str,
    fields: Vec<FieldEntry>,
    bin_file: &'a str,
}

/// Write `snapshot_NNNNNN.json` + `.bin` into `dir`; returns the JSON name.
pub fn write_snapshot(
    dir: &Path,
    step: usize,
    t: f64,
    phi: &ScalarField,
    fields: &DiagnosticFields,
) -> Result<String, CmdError> {
    let grid = phi.grid();
    let named: [(&'static str, &ScalarField); 5] = [
        ("phi", phi),
        ("r", &fields.r),
        ("s_norm", &fields.s_norm),
        ("det_indicator", &fields.det_indicator),
        ("two_sum", &fields.two_sum),
    ];

    let mut bin = Vec::with_capacity(named.len() * grid.points() * 8);
    let mut entries = Vec::with_capacity(named.len());
    for (name, field) in named {
        entries.push(FieldEntry {
            name,
            offset_bytes: bin.len(),
            values: field.values().len(),
        });
        for v in field.values() {
            bin.extend_from_slice(&v.to_le_bytes());
        }
    }

    let json_name = format!("snapshot_{step:06}.json");
    let bin_name = format!("snapshot_{step:06}.bin");
    let header = SnapshotHeader {
        format_version: SNAPSHOT_FORMAT_VERSION,
        grid_n: grid.n(),
        h: grid.h(),
        step,
        t,
        endianness: "little",
        index_order: "((x1*N + y1)*N + x2)*N + y2",
        fields: entries,
        bin_file: &bin_name,
    };
    let bin_path = dir.join(&bin_name);
    fs::write(&bin_path, &bin).map_err(|e| CmdError::io(&bin_path, e))?;
    let mut text = serde_json::to_string_pretty(&header).expect("header serializes");
    text.push('\n');
    let json_path = dir.join(&json_name);
    fs::write(&json_path, text).map_err(|e| CmdError::io(&json_path, e))?;
    Ok(json_name)
}
