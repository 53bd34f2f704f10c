//! Synthetic occlusion scenes, metrics and ablation runs.

mod metrics;
mod scenario;

pub use metrics::{evaluate, MetricsReport};
pub use scenario::{generate, Agent, OcclusionMode, OcclusionRule, Scenario, SyntheticSequence};

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{BBox, ViewGeometry};
use crate::io::{detections_from_records, TrackerConfig};
use crate::tracker::{run_sequence, FrameResult};

pub const SUITES: [&str; 2] = ["crossing", "crossing-pan"];

/// Scenes in each built-in suite.
pub const SUITE_SIZE: usize = 50;

/// Pairs of similar-looking agents meeting at slightly different depths.
/// The rear agent disappears behind the front one, and in some pairs both
/// turn back where they meet, as dancers do.
fn crossing_scene(seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = rng.random_range(2..=3);
    let mut agents = Vec::new();
    for p in 0..pairs {
        let front_bottom = 620.0 + 170.0 * p as f64 + rng.random_range(-10.0..10.0);
        let back_bottom = front_bottom - rng.random_range(40.0..70.0);
        let cross_x = rng.random_range(500.0..1400.0);
        let cross_frame: u32 = rng.random_range(35..55);
        let bounce = rng.random_bool(0.5);
        let speed_front = rng.random_range(3.0..6.0);
        let speed_back = rng.random_range(3.0..6.0);
        for (bottom, vx) in [(front_bottom, speed_front), (back_bottom, -speed_back)] {
            let w = rng.random_range(55.0..70.0);
            let h = rng.random_range(150.0..175.0);
            let x = cross_x - vx * (cross_frame - 1) as f64 - w / 2.0;
            agents.push(Agent {
                bbox: BBox::from_tlwh(x, bottom - h, w, h).expect("positive size"),
                velocity: (vx, 0.0),
                depth_rank: 0,
                turn: bounce.then_some((cross_frame, (-vx, 0.0))),
            });
        }
    }
    // deeper means higher up in the image
    let mut order: Vec<usize> = (0..agents.len()).collect();
    order.sort_by(|&a, &b| agents[b].bbox.y2.total_cmp(&agents[a].bbox.y2));
    for (r, &k) in order.iter().enumerate() {
        agents[k].depth_rank = r as u32;
    }

    Scenario {
        seed,
        agents,
        frames: 100,
        occlusion: OcclusionRule {
            overlap_threshold: 0.4,
            mode: OcclusionMode::Drop,
        },
        noise: 3.0,
        ..Scenario::default()
    }
}

/// Built-in scenario suite by name.
pub fn suite(name: &str, base_seed: u64) -> Result<Vec<Scenario>> {
    let seeds = (0..SUITE_SIZE as u64).map(|k| base_seed.wrapping_mul(1000).wrapping_add(k));
    match name {
        "crossing" => Ok(seeds.map(crossing_scene).collect()),
        "crossing-pan" => Ok(seeds
            .map(|s| {
                let mut sc = crossing_scene(s);
                sc.pan = (2.0, 0.5);
                sc
            })
            .collect()),
        other => Err(Error::Config(format!(
            "unknown suite '{other}' (expected one of {})",
            SUITES.join(", ")
        ))),
    }
}

/// Tracker variants compared by the ablation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Full,
    /// Plain IoU and no quantized pseudo-depth cost.
    IouOnly,
    NoQpdm,
    NoCmc,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Full, Variant::IouOnly, Variant::NoQpdm, Variant::NoCmc];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::IouOnly => "iou-only",
            Variant::NoQpdm => "no-qpdm",
            Variant::NoCmc => "no-cmc",
        }
    }

    pub fn configure(self, base: &TrackerConfig) -> TrackerConfig {
        let mut cfg = base.clone();
        match self {
            Variant::Full => {}
            Variant::IouOnly => {
                cfg.use_dviou = false;
                cfg.lambda1 = 0.0;
            }
            Variant::NoQpdm => cfg.lambda1 = 0.0,
            Variant::NoCmc => cfg.cmc_enabled = false,
        }
        cfg
    }
}

/// Tracks one generated scene; the view comes from the scenario.
pub fn track_scenario(cfg: &TrackerConfig, scenario: &Scenario, seq: &SyntheticSequence) -> Result<Vec<FrameResult>> {
    let mut cfg = cfg.clone();
    cfg.img_height = scenario.img_height;
    cfg.img_width = scenario.img_width;
    let view = ViewGeometry::new(cfg.img_height, cfg.img_width)?;
    let dets = detections_from_records(&seq.detections, &view, cfg.det_thresh);
    run_sequence(&cfg, &dets, &seq.warps, scenario.frames)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub variant: Variant,
    pub reports: Vec<MetricsReport>,
}

impl AblationRow {
    pub fn total_id_switches(&self) -> u64 {
        self.reports.iter().map(|r| r.id_switches).sum()
    }

    /// Metrics over all scenes pooled together.
    pub fn pooled(&self) -> MetricsReport {
        let sum = |f: fn(&MetricsReport) -> u64| self.reports.iter().map(f).sum::<u64>();
        let (gt, fp, fn_, idsw) = (sum(|r| r.gt), sum(|r| r.fp), sum(|r| r.fn_), sum(|r| r.id_switches));
        let (pred, idtp) = (sum(|r| r.predictions), sum(|r| r.idtp));
        MetricsReport {
            mota: if gt > 0 { 1.0 - (fn_ + fp + idsw) as f64 / gt as f64 } else { 1.0 },
            idf1: if gt + pred > 0 { 2.0 * idtp as f64 / (gt + pred) as f64 } else { 1.0 },
            id_switches: idsw,
            fp,
            fn_,
            gt,
            predictions: pred,
            tp: sum(|r| r.tp),
            idtp,
        }
    }
}

pub struct AblationTable(pub Vec<AblationRow>);

impl fmt::Display for AblationTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<10} {:>8} {:>8} {:>6} {:>7} {:>7} {:>7}",
            "variant", "MOTA", "IDF1", "IDSW", "FP", "FN", "GT"
        )?;
        for row in &self.0 {
            let m = row.pooled();
            writeln!(
                f,
                "{:<10} {:>8.4} {:>8.4} {:>6} {:>7} {:>7} {:>7}",
                row.variant.name(),
                m.mota,
                m.idf1,
                m.id_switches,
                m.fp,
                m.fn_,
                m.gt
            )?;
        }
        Ok(())
    }
}

pub fn ablate(scenarios: &[Scenario], base: &TrackerConfig, variants: &[Variant]) -> Result<AblationTable> {
    let sequences: Vec<SyntheticSequence> = scenarios.iter().map(generate).collect();
    let rows = variants
        .iter()
        .map(|&variant| {
            let cfg = variant.configure(base);
            let reports = scenarios
                .iter()
                .zip(&sequences)
                .map(|(sc, seq)| Ok(evaluate(&seq.gt, &track_scenario(&cfg, sc, seq)?, 0.5)))
                .collect::<Result<Vec<_>>>()?;
            Ok(AblationRow { variant, reports })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AblationTable(rows))
}
