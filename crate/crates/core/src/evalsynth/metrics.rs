//! CLEAR-MOT style accuracy and identity F1 on per-frame tracks.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::association::{solve_assignment, CostMatrix, FORBIDDEN};
use crate::geometry::iou;
use crate::tracker::{FrameResult, TrackEntry};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub mota: f64,
    pub idf1: f64,
    pub id_switches: u64,
    pub fp: u64,
    #[doc(alias = "fn")]
    pub fn_: u64,
    pub gt: u64,
    /// Result boxes in total.
    pub predictions: u64,
    /// Per-frame matches.
    pub tp: u64,
    /// True positives under the global identity mapping.
    pub idtp: u64,
}

impl MetricsReport {
    pub fn to_kv(&self) -> String {
        format!(
            "mota={:.6}\nidf1={:.6}\nid_switches={}\nfp={}\nfn={}\ngt={}\npredictions={}\ntp={}\nidtp={}\n",
            self.mota, self.idf1, self.id_switches, self.fp, self.fn_, self.gt, self.predictions, self.tp, self.idtp
        )
    }
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>8} {:>8} {:>6} {:>7} {:>7} {:>7}", "MOTA", "IDF1", "IDSW", "FP", "FN", "GT")?;
        write!(
            f,
            "{:>8.4} {:>8.4} {:>6} {:>7} {:>7} {:>7}",
            self.mota, self.idf1, self.id_switches, self.fp, self.fn_, self.gt
        )
    }
}

fn by_frame(results: &[FrameResult]) -> BTreeMap<u32, Vec<TrackEntry>> {
    let mut map: BTreeMap<u32, Vec<TrackEntry>> = BTreeMap::new();
    for fr in results {
        map.entry(fr.frame).or_default().extend(fr.entries.iter().copied());
    }
    map
}

/// Id-independent ordering so that relabeling results cannot change ties.
fn sort_spatially(entries: &mut [TrackEntry]) {
    entries.sort_by(|a, b| {
        let ka = [a.bbox.x1, a.bbox.y1, a.bbox.x2, a.bbox.y2];
        let kb = [b.bbox.x1, b.bbox.y1, b.bbox.x2, b.bbox.y2];
        ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
    });
}

pub fn evaluate(gt: &[FrameResult], results: &[FrameResult], iou_match_thresh: f64) -> MetricsReport {
    let gt_frames = by_frame(gt);
    let mut res_frames = by_frame(results);
    let empty = Vec::new();

    let (mut n_gt, mut n_pred, mut tp, mut idsw) = (0u64, 0u64, 0u64, 0u64);
    let mut last_match: HashMap<u64, u64> = HashMap::new();
    let mut overlap_counts: HashMap<(u64, u64), u64> = HashMap::new();

    let frames: Vec<u32> = gt_frames.keys().chain(res_frames.keys()).copied().collect();
    let mut frames = frames;
    frames.sort_unstable();
    frames.dedup();

    for frame in frames {
        let g = gt_frames.get(&frame).unwrap_or(&empty);
        let r = res_frames.get_mut(&frame).map(|v| {
            sort_spatially(v);
            &*v
        });
        let r = r.unwrap_or(&empty);
        n_gt += g.len() as u64;
        n_pred += r.len() as u64;

        let sims = CostMatrix::from_fn(g.len(), r.len(), |i, j| iou(&g[i].bbox, &r[j].bbox));
        for i in 0..g.len() {
            for j in 0..r.len() {
                if sims.get(i, j) >= iou_match_thresh {
                    *overlap_counts.entry((g[i].id, r[j].id)).or_default() += 1;
                }
            }
        }
        let cost = CostMatrix::from_fn(g.len(), r.len(), |i, j| {
            let s = sims.get(i, j);
            if s >= iou_match_thresh { -s } else { FORBIDDEN }
        });
        for (i, j) in solve_assignment(&cost, f64::INFINITY).matches {
            tp += 1;
            let (gid, rid) = (g[i].id, r[j].id);
            if let Some(prev) = last_match.insert(gid, rid) {
                if prev != rid {
                    idsw += 1;
                }
            }
        }
    }

    let fp = n_pred - tp;
    let fn_ = n_gt - tp;
    let mota = if n_gt > 0 {
        1.0 - (fn_ + fp + idsw) as f64 / n_gt as f64
    } else if fp + idsw == 0 {
        1.0
    } else {
        f64::NEG_INFINITY
    };

    let idtp = identity_true_positives(&overlap_counts);
    let idf1 = if n_gt + n_pred == 0 {
        1.0
    } else {
        2.0 * idtp as f64 / (n_gt + n_pred) as f64
    };

    MetricsReport {
        mota,
        idf1,
        id_switches: idsw,
        fp,
        fn_,
        gt: n_gt,
        predictions: n_pred,
        tp,
        idtp,
    }
}

/// Best one-to-one mapping between ground-truth and result identities,
/// maximizing frames in which the mapped pair overlaps.
fn identity_true_positives(counts: &HashMap<(u64, u64), u64>) -> u64 {
    let mut gt_ids: Vec<u64> = counts.keys().map(|k| k.0).collect();
    let mut res_ids: Vec<u64> = counts.keys().map(|k| k.1).collect();
    gt_ids.sort_unstable();
    gt_ids.dedup();
    res_ids.sort_unstable();
    res_ids.dedup();
    let cost = CostMatrix::from_fn(gt_ids.len(), res_ids.len(), |i, j| {
        counts
            .get(&(gt_ids[i], res_ids[j]))
            .map_or(FORBIDDEN, |&n| -(n as f64))
    });
    solve_assignment(&cost, f64::INFINITY)
        .matches
        .iter()
        .map(|&(i, j)| counts[&(gt_ids[i], res_ids[j])])
        .sum()
}
