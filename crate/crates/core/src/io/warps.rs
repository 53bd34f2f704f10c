//! Camera warp files: one `frame a11 a12 a13 a21 a22 a23` line per frame.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::motion::AffineTransform;

/// Per-frame warps; frames without an entry map to the identity.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WarpTable {
    warps: BTreeMap<u32, AffineTransform>,
}

impl WarpTable {
    pub fn identity() -> Self {
        WarpTable::default()
    }

    pub fn get(&self, frame: u32) -> AffineTransform {
        self.warps.get(&frame).copied().unwrap_or_default()
    }

    pub fn insert(&mut self, frame: u32, warp: AffineTransform) {
        self.warps.insert(frame, warp);
    }

    pub fn len(&self) -> usize {
        self.warps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.warps.is_empty()
    }

    /// Dense list for frames `1..=frame_count`.
    pub fn to_frames(&self, frame_count: u32) -> Vec<AffineTransform> {
        (1..=frame_count).map(|f| self.get(f)).collect()
    }

    pub fn to_text(&self) -> String {
        self.warps
            .iter()
            .map(|(f, w)| {
                format!(
                    "{f} {} {} {} {} {} {}\n",
                    w.m[(0, 0)],
                    w.m[(0, 1)],
                    w.t[0],
                    w.m[(1, 0)],
                    w.m[(1, 1)],
                    w.t[1]
                )
            })
            .collect()
    }
}

pub fn parse_warps(path: &Path, text: &str) -> Result<WarpTable> {
    let mut table = WarpTable::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 7 {
            return Err(err(format!("expected 7 fields, got {}", fields.len())));
        }
        let frame: u32 = fields[0]
            .parse()
            .map_err(|_| err(format!("bad frame '{}'", fields[0])))?;
        let mut a = [0.0; 6];
        for (k, f) in fields[1..].iter().enumerate() {
            a[k] = f.parse().map_err(|_| err(format!("bad coefficient '{f}'")))?;
        }
        let warp = AffineTransform::from_rows(a).map_err(|e| err(e.to_string()))?;
        table.insert(frame, warp);
    }
    Ok(table)
}

/// Reads the warp file for a sequence of `frame_count` frames. A missing
/// path (or file) yields identity warps.
pub fn load_warps(path: Option<&Path>, frame_count: u32) -> Result<Vec<AffineTransform>> {
    let table = match path {
        Some(p) if p.exists() => {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            parse_warps(p, &text)?
        }
        Some(p) => {
            log::warn!("warp file {} not found, using identity warps", p.display());
            WarpTable::identity()
        }
        None => WarpTable::identity(),
    };
    Ok(table.to_frames(frame_count))
}
