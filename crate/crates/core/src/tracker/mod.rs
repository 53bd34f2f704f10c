//! Tracklet lifecycle and the per-frame two-stage association.

mod tracklet;

pub use tracklet::{apply_cmc_history, oru_reupdate, TrackStatus, Tracklet, MAX_HISTORY};

use crate::association::{
    compose_cost, gate_overlap, ocm_cost, overlap_cost, qpdm_cost, solve_assignment, Overlap,
    QpdmParams,
};
use crate::error::Result;
use crate::geometry::{BBox, DepthBox};
use crate::io::{DetectionSequence, TrackerConfig, WarpTable};
use crate::motion::{AffineTransform, KalmanNoise, Observation};

/// A confidence-filtered detection with its measured pseudo-depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub depth_box: DepthBox,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackEntry {
    pub id: u64,
    pub bbox: BBox,
    pub score: f64,
}

/// Confirmed tracklets matched in one frame, ordered by id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameResult {
    pub frame: u32,
    pub entries: Vec<TrackEntry>,
}

/// Second-stage recovery: matches leftover tracklets by the overlap between
/// their last real observation and the leftover detections.
///
/// Returns `(tracklet, detection)` index pairs into the given slices.
pub fn ocr_recover(
    last_observations: &[Option<DepthBox>],
    dets: &[DepthBox],
    overlap: Overlap,
    threshold: f64,
) -> Vec<(usize, usize)> {
    if last_observations.is_empty() || dets.is_empty() {
        return Vec::new();
    }
    let mut c = overlap_cost(last_observations, dets, overlap);
    gate_overlap(&mut c, threshold);
    solve_assignment(&c, -threshold).matches
}

pub struct Tracker {
    cfg: TrackerConfig,
    noise: KalmanNoise,
    qpdm: QpdmParams,
    tracklets: Vec<Tracklet>,
    frame: u32,
    next_id: u64,
}

impl Tracker {
    pub fn new(cfg: TrackerConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Tracker {
            noise: cfg.noise(),
            qpdm: cfg.qpdm()?,
            cfg,
            tracklets: Vec::new(),
            frame: 0,
            next_id: 1,
        })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.cfg
    }

    pub fn tracklets(&self) -> &[Tracklet] {
        &self.tracklets
    }

    /// Index of the last processed frame; frames are numbered from 1.
    pub fn frame(&self) -> u32 {
        self.frame
    }

    /// Processes the next frame. Detections must already be filtered by
    /// `det_thresh`.
    pub fn step(&mut self, detections: &[Detection], warp: &AffineTransform) -> FrameResult {
        self.frame += 1;
        let frame = self.frame;
        let cfg = &self.cfg;

        let dets: Vec<(Detection, Observation)> = detections
            .iter()
            .filter_map(|d| {
                Observation::from_depth_box(&d.depth_box, frame, d.score)
                    .map(|o| (*d, o))
                    .map_err(|e| log::debug!("frame {frame}: skipping detection: {e}"))
                    .ok()
            })
            .collect();
        let det_boxes: Vec<DepthBox> = dets.iter().map(|(d, _)| d.depth_box).collect();
        let det_obs: Vec<Observation> = dets.iter().map(|(_, o)| *o).collect();

        if cfg.cmc_enabled && !warp.is_identity() {
            for t in &mut self.tracklets {
                t.apply_cmc(warp, cfg.cmc_translate_velocity);
            }
        }
        for t in &mut self.tracklets {
            t.predict(&self.noise);
        }

        // regular association
        let predicted: Vec<Option<DepthBox>> =
            self.tracklets.iter().map(|t| t.kf().depth_box()).collect();
        let c_overlap = overlap_cost(&predicted, &det_boxes, cfg.overlap());
        let track_pds: Vec<f64> = self.tracklets.iter().map(|t| t.last_observation().z[2]).collect();
        let det_pds: Vec<f64> = det_boxes.iter().map(DepthBox::pd).collect();
        let c_qpd = qpdm_cost(&track_pds, &det_pds, self.qpdm);
        let histories: Vec<&[Observation]> = self.tracklets.iter().map(Tracklet::history).collect();
        let c_ocm = ocm_cost(&histories, &det_obs, cfg.ocm_dt);
        let cost = compose_cost(
            &c_overlap,
            &c_qpd,
            &c_ocm,
            cfg.lambda1,
            cfg.lambda2,
            cfg.iou_threshold,
        )
        .expect("cost components share one shape");
        let first = solve_assignment(&cost, f64::INFINITY);

        // recovery on the leftovers
        let leftover_last: Vec<Option<DepthBox>> = first
            .unmatched_rows
            .iter()
            .map(|&i| self.tracklets[i].last_observation().depth_box())
            .collect();
        let leftover_dets: Vec<DepthBox> =
            first.unmatched_cols.iter().map(|&j| det_boxes[j]).collect();
        let recovered = ocr_recover(&leftover_last, &leftover_dets, cfg.overlap(), cfg.iou_threshold);

        let mut matches = first.matches.clone();
        matches.extend(
            recovered
                .iter()
                .map(|&(i, j)| (first.unmatched_rows[i], first.unmatched_cols[j])),
        );
        matches.sort_unstable();

        let mut track_matched = vec![false; self.tracklets.len()];
        let mut track_failed = vec![false; self.tracklets.len()];
        let mut det_used = vec![false; dets.len()];
        let mut entries = Vec::new();
        for &(i, j) in &matches {
            let t = &self.tracklets[i];
            match oru_reupdate(t, &det_obs[j], &self.noise) {
                Ok(mut updated) => {
                    updated.untracked = 0;
                    updated.hits += 1;
                    if updated.hits >= cfg.min_hits {
                        updated.confirm();
                    }
                    if updated.status() == TrackStatus::Confirmed {
                        entries.push(TrackEntry {
                            id: updated.id(),
                            bbox: *det_boxes[j].bbox(),
                            score: dets[j].0.score,
                        });
                    }
                    self.tracklets[i] = updated;
                    track_matched[i] = true;
                    det_used[j] = true;
                }
                Err(e) => {
                    log::warn!("frame {frame}: dropping tracklet {}: {e}", t.id());
                    track_failed[i] = true;
                }
            }
        }

        let t_expire = cfg.t_expire;
        let mut kept = Vec::with_capacity(self.tracklets.len());
        for (i, mut t) in std::mem::take(&mut self.tracklets).into_iter().enumerate() {
            if !track_matched[i] {
                t.untracked += 1;
                t.hits = 0;
            }
            if track_failed[i] || t.untracked >= t_expire {
                t.mark_removed();
                continue;
            }
            kept.push(t);
        }
        self.tracklets = kept;

        for (j, (det, obs)) in dets.iter().enumerate() {
            if det_used[j] {
                continue;
            }
            let mut t = Tracklet::new(self.next_id, *obs, &self.noise);
            self.next_id += 1;
            if t.hits >= self.cfg.min_hits {
                t.confirm();
                entries.push(TrackEntry {
                    id: t.id(),
                    bbox: *det.depth_box.bbox(),
                    score: det.score,
                });
            }
            self.tracklets.push(t);
        }

        entries.sort_by_key(|e| e.id);
        FrameResult { frame, entries }
    }
}

/// Runs a fresh tracker over frames `1..=frame_count`.
pub fn run_sequence(
    cfg: &TrackerConfig,
    detections: &DetectionSequence,
    warps: &WarpTable,
    frame_count: u32,
) -> Result<Vec<FrameResult>> {
    let mut tracker = Tracker::new(cfg.clone())?;
    let mut out = Vec::with_capacity(frame_count as usize);
    for frame in 1..=frame_count {
        let dets = detections.get(&frame).map_or(&[][..], Vec::as_slice);
        let result = tracker.step(dets, &warps.get(frame));
        debug_assert_eq!(result.frame, frame);
        out.push(result);
    }
    Ok(out)
}
