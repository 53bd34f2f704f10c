//! MOT Challenge text records: `frame,id,x,y,w,h,score,-1,-1,-1`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{BBox, DepthBox, ViewGeometry};
use crate::tracker::{Detection, FrameResult, TrackEntry};

/// One line of a detection (`id == -1`) or result file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotRecord {
    pub frame: u32,
    pub id: i64,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub score: f64,
}

impl MotRecord {
    pub fn bbox(&self) -> Result<BBox> {
        BBox::from_tlwh(self.x, self.y, self.w, self.h)
    }

    pub fn from_entry(frame: u32, e: &TrackEntry) -> Self {
        let (x, y, w, h) = e.bbox.tlwh();
        MotRecord {
            frame,
            id: e.id as i64,
            x,
            y,
            w,
            h,
            score: e.score,
        }
    }

    /// Box coordinates use two decimals; the score keeps full precision.
    pub fn to_line(&self) -> String {
        format!(
            "{},{},{:.2},{:.2},{:.2},{:.2},{},-1,-1,-1",
            self.frame, self.id, self.x, self.y, self.w, self.h, self.score
        )
    }
}

fn parse_line(path: &Path, line_no: usize, line: &str) -> Result<MotRecord> {
    let err = |msg: String| Error::Parse {
        path: path.to_path_buf(),
        line: line_no,
        msg,
    };
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() < 7 {
        return Err(err(format!("expected at least 7 fields, got {}", fields.len())));
    }
    let num = |i: usize, name: &str| -> Result<f64> {
        fields[i]
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| err(format!("bad {name} '{}'", fields[i])))
    };
    let frame: u32 = fields[0]
        .parse()
        .map_err(|_| err(format!("bad frame '{}'", fields[0])))?;
    if frame < 1 {
        return Err(err("frame numbers start at 1".into()));
    }
    let id = num(1, "id")?;
    if id.fract() != 0.0 {
        return Err(err(format!("bad id '{}'", fields[1])));
    }
    let rec = MotRecord {
        frame,
        id: id as i64,
        x: num(2, "x")?,
        y: num(3, "y")?,
        w: num(4, "width")?,
        h: num(5, "height")?,
        score: num(6, "score")?,
    };
    if !(rec.w > 0.0 && rec.h > 0.0) {
        return Err(err(format!("non-positive box size {}x{}", rec.w, rec.h)));
    }
    Ok(rec)
}

pub fn parse_records(path: &Path, text: &str) -> Result<Vec<MotRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_line(path, i + 1, l))
        .collect()
}

pub fn read_records(path: &Path) -> Result<Vec<MotRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_records(path, &text)
}

pub fn format_records(records: &[MotRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let _ = writeln!(out, "{}", r.to_line());
    }
    out
}

/// Detections grouped by frame, in ascending frame order.
pub type DetectionSequence = BTreeMap<u32, Vec<Detection>>;

/// Converts detection records into depth boxes: low-confidence rows are
/// dropped and boxes are clamped to `[0, W] x [0, 2H)`.
pub fn detections_from_records(
    records: &[MotRecord],
    view: &ViewGeometry,
    det_thresh: f64,
) -> DetectionSequence {
    // keep the clamped bottom strictly above the complementary view bottom
    let y_max = (2.0 * view.img_height()).next_down();
    let mut seq = DetectionSequence::new();
    for r in records.iter().filter(|r| r.score >= det_thresh) {
        let clamp_x = |v: f64| v.clamp(0.0, view.img_width());
        let clamp_y = |v: f64| v.clamp(0.0, y_max);
        let clamped = BBox::new(
            clamp_x(r.x),
            clamp_y(r.y),
            clamp_x(r.x + r.w),
            clamp_y(r.y + r.h),
        );
        let det = clamped
            .ok()
            .filter(|b| b.area() > 0.0)
            .and_then(|b| DepthBox::from_view(b, view).ok());
        match det {
            Some(depth_box) => seq.entry(r.frame).or_default().push(Detection {
                depth_box,
                score: r.score,
            }),
            None => log::debug!("frame {}: box outside the view dropped", r.frame),
        }
    }
    seq
}

pub fn load_detections(path: &Path, view: &ViewGeometry, det_thresh: f64) -> Result<DetectionSequence> {
    Ok(detections_from_records(&read_records(path)?, view, det_thresh))
}

pub fn results_to_records(results: &[FrameResult]) -> Vec<MotRecord> {
    let mut records: Vec<MotRecord> = results
        .iter()
        .flat_map(|fr| fr.entries.iter().map(|e| MotRecord::from_entry(fr.frame, e)))
        .collect();
    records.sort_by_key(|r| (r.frame, r.id));
    records
}

/// Groups records into per-frame results, sorted by frame then id. Rows
/// with a negative id are skipped.
pub fn records_to_results(records: &[MotRecord]) -> Result<Vec<FrameResult>> {
    let mut frames: BTreeMap<u32, Vec<TrackEntry>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.id >= 0) {
        frames.entry(r.frame).or_default().push(TrackEntry {
            id: r.id as u64,
            bbox: r.bbox()?,
            score: r.score,
        });
    }
    Ok(frames
        .into_iter()
        .map(|(frame, mut entries)| {
            entries.sort_by_key(|e| e.id);
            FrameResult { frame, entries }
        })
        .collect())
}

pub fn write_results(path: &Path, results: &[FrameResult]) -> Result<()> {
    write_records(path, &results_to_records(results))
}

pub fn write_records(path: &Path, records: &[MotRecord]) -> Result<()> {
    fs::write(path, format_records(records)).map_err(|e| Error::io(path, e))
}

pub fn load_results(path: &Path) -> Result<Vec<FrameResult>> {
    records_to_results(&read_records(path)?)
}
