//! File formats, configuration and offline post-processing.

mod config;
mod interp;
mod mot;
mod warps;

pub use config::{TrackerConfig, PRESETS};
pub use interp::interpolate_gaps;
pub use mot::{
    detections_from_records, format_records, load_detections, load_results, parse_records,
    read_records, records_to_results, results_to_records, write_records, write_results,
    DetectionSequence, MotRecord,
};
pub use warps::{load_warps, parse_warps, WarpTable};

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Default number of missing frames bridged by [`interpolate_gaps`].
pub const DEFAULT_MAX_GAP: u32 = 20;

/// Image size read from a MOT `seqinfo.ini` (`imHeight=` / `imWidth=`).
pub fn read_seqinfo(path: &Path) -> Result<(Option<f64>, Option<f64>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut height = None;
    let mut width = None;
    for (i, line) in text.lines().enumerate() {
        let Some((k, v)) = line.split_once('=') else {
            continue;
        };
        let target = match k.trim() {
            "imHeight" => &mut height,
            "imWidth" => &mut width,
            _ => continue,
        };
        *target = Some(v.trim().parse::<f64>().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg: format!("bad image size '{}'", v.trim()),
        })?);
    }
    Ok((height, width))
}
