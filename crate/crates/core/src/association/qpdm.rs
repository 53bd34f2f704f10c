//! Quantized pseudo-depth measurement.
//!
//! Pseudo-depths of one set (tracklets or detections) are min-max
//! normalized and bucketed into `n` equal sub-intervals; each value is
//! represented by the upper limit of its bucket, `(i + 1) / n`.

use super::CostMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QpdmParams {
    interval_num: usize,
}

impl QpdmParams {
    pub fn new(interval_num: usize) -> Option<Self> {
        (interval_num >= 1).then_some(QpdmParams { interval_num })
    }

    pub fn interval_num(&self) -> usize {
        self.interval_num
    }
}

pub fn interval_depths(pds: &[f64], params: QpdmParams) -> Vec<f64> {
    let n = params.interval_num;
    let (lo, hi) = pds
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = hi - lo;
    pds.iter()
        .map(|&pd| {
            // equal values (or a single one) all fall in the first bucket
            let norm = if span > 0.0 { (pd - lo) / span } else { 0.0 };
            let bucket = ((norm * n as f64).floor() as usize).min(n - 1);
            (bucket + 1) as f64 / n as f64
        })
        .collect()
}

/// `|depth_track[i] - depth_det[j]|` with each side normalized on its own.
pub fn qpdm_cost(track_pds: &[f64], det_pds: &[f64], params: QpdmParams) -> CostMatrix {
    let tracks = interval_depths(track_pds, params);
    let dets = interval_depths(det_pds, params);
    CostMatrix::from_fn(tracks.len(), dets.len(), |i, j| (tracks[i] - dets[j]).abs())
}
