use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{PcsError, Result};

/// One row of the audit log: shot index, outcome, and the uniform draw that selected it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotLogEntry {
    pub m: usize,
    pub outcome_index: usize,
    pub uniform_draw: f64,
}

pub fn write_snapshot_log(path: &Path, entries: &[SnapshotLogEntry]) -> Result<()> {
    let wrap = |e| PcsError::Csv {
        path: path.to_path_buf(),
        source: e,
    };
    let mut w = csv::Writer::from_path(path).map_err(wrap)?;
    for e in entries {
        w.serialize(e).map_err(wrap)?;
    }
    w.flush().map_err(|e| PcsError::io(path, e))
}

pub fn read_snapshot_log(path: &Path) -> Result<Vec<SnapshotLogEntry>> {
    let wrap = |e| PcsError::Csv {
        path: path.to_path_buf(),
        source: e,
    };
    let mut r = csv::Reader::from_path(path).map_err(wrap)?;
    r.deserialize().map(|row| row.map_err(wrap)).collect()
}
