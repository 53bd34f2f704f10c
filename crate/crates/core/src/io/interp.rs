//! Offline gap filling of per-id trajectories.

use std::collections::BTreeMap;

use crate::geometry::BBox;
use crate::tracker::{FrameResult, TrackEntry};

/// Fills each id's gaps of at most `max_gap` missing frames by linear
/// interpolation of `(x, y, w, h)`. Filled entries take the mean score of
/// the two ends. Existing entries are never changed.
pub fn interpolate_gaps(results: &[FrameResult], max_gap: u32) -> Vec<FrameResult> {
    let mut by_id: BTreeMap<u64, Vec<(u32, TrackEntry)>> = BTreeMap::new();
    for fr in results {
        for e in &fr.entries {
            by_id.entry(e.id).or_default().push((fr.frame, *e));
        }
    }

    let mut frames: BTreeMap<u32, Vec<TrackEntry>> = results
        .iter()
        .map(|fr| (fr.frame, fr.entries.clone()))
        .collect();

    for track in by_id.values_mut() {
        track.sort_by_key(|(f, _)| *f);
        for pair in track.windows(2) {
            let (f0, a) = pair[0];
            let (f1, b) = pair[1];
            let missing = f1 - f0 - 1;
            if missing == 0 || missing > max_gap {
                continue;
            }
            let (ax, ay, aw, ah) = a.bbox.tlwh();
            let (bx, by, bw, bh) = b.bbox.tlwh();
            for f in f0 + 1..f1 {
                let t = (f - f0) as f64 / (f1 - f0) as f64;
                let lerp = |u: f64, v: f64| u + (v - u) * t;
                let Ok(bbox) = BBox::from_tlwh(lerp(ax, bx), lerp(ay, by), lerp(aw, bw), lerp(ah, bh))
                else {
                    continue;
                };
                frames.entry(f).or_default().push(TrackEntry {
                    id: a.id,
                    bbox,
                    score: (a.score + b.score) / 2.0,
                });
            }
        }
    }

    frames
        .into_iter()
        .map(|(frame, mut entries)| {
            entries.sort_by_key(|e| e.id);
            FrameResult { frame, entries }
        })
        .collect()
}
