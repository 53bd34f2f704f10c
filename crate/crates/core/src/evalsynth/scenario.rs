//! Seeded constant-velocity scenes with depth-ordered occlusion.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::io::{MotRecord, WarpTable};
use crate::motion::AffineTransform;
use crate::tracker::{FrameResult, TrackEntry};

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    /// Box at frame 1, in world (first-frame image) coordinates.
    pub bbox: BBox,
    pub velocity: (f64, f64),
    /// Larger is further from the camera; must agree with vertical order.
    pub depth_rank: u32,
    /// New velocity from the given frame on.
    pub turn: Option<(u32, (f64, f64))>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OcclusionMode {
    Drop,
    /// Multiplies the occluded detection's score.
    DownWeight(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OcclusionRule {
    /// Fraction of the deeper box covered by a nearer one.
    pub overlap_threshold: f64,
    pub mode: OcclusionMode,
}

impl Default for OcclusionRule {
    fn default() -> Self {
        OcclusionRule {
            overlap_threshold: 0.5,
            mode: OcclusionMode::Drop,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub seed: u64,
    pub agents: Vec<Agent>,
    pub frames: u32,
    pub occlusion: OcclusionRule,
    /// Box corner jitter, standard deviation in pixels.
    pub noise: f64,
    pub img_height: f64,
    pub img_width: f64,
    /// Camera translation per frame; image content moves the opposite way.
    pub pan: (f64, f64),
    pub det_score: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            seed: 0,
            agents: Vec::new(),
            frames: 100,
            occlusion: OcclusionRule::default(),
            noise: 0.0,
            img_height: 1080.0,
            img_width: 1920.0,
            pan: (0.0, 0.0),
            det_score: 0.9,
        }
    }
}

/// Ground truth, detections and camera warps of one generated scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSequence {
    pub gt: Vec<FrameResult>,
    pub detections: Vec<MotRecord>,
    pub warps: WarpTable,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let mut ranks: Vec<u32> = self.agents.iter().map(|a| a.depth_rank).collect();
        ranks.sort_unstable();
        if ranks.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("agent depth ranks must be unique".into()));
        }
        for a in &self.agents {
            for b in &self.agents {
                if a.depth_rank > b.depth_rank && a.bbox.y2 >= b.bbox.y2 {
                    return Err(Error::Config(format!(
                        "agent with depth rank {} must stand higher in the image than rank {}",
                        a.depth_rank, b.depth_rank
                    )));
                }
            }
        }
        if !(self.noise >= 0.0) || !(self.img_height > 0.0) || !(self.img_width > 0.0) {
            return Err(Error::Config("noise and image size must be non-negative/positive".into()));
        }
        if !(0.0..=1.0).contains(&self.det_score) {
            return Err(Error::Config("det_score must lie in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mode = match self.occlusion.mode {
            OcclusionMode::Drop => "drop".to_string(),
            OcclusionMode::DownWeight(f) => format!("downweight:{f}"),
        };
        let mut s = format!(
            "seed = {}\nframes = {}\nnoise = {}\noverlap_threshold = {}\nocclusion = {}\nimg_height = {}\nimg_width = {}\npan = {},{}\ndet_score = {}\n",
            self.seed,
            self.frames,
            self.noise,
            self.occlusion.overlap_threshold,
            mode,
            self.img_height,
            self.img_width,
            self.pan.0,
            self.pan.1,
            self.det_score
        );
        for a in &self.agents {
            let (x, y, w, h) = a.bbox.tlwh();
            s.push_str(&format!("agent = {x},{y},{w},{h},{},{},{}", a.velocity.0, a.velocity.1, a.depth_rank));
            if let Some((at, v)) = a.turn {
                s.push_str(&format!(",{at},{},{}", v.0, v.1));
            }
            s.push('\n');
        }
        s
    }

    /// Parses `key = value` lines; `agent = x,y,w,h,vx,vy,rank[,turn_frame,vx,vy]` repeats.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut sc = Scenario::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::Config(format!("scenario line {}: {msg}", n + 1));
            let (k, v) = line.split_once('=').ok_or_else(|| bad("expected key = value"))?;
            let v = v.trim();
            let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(&format!("bad number '{s}'")));
            match k.trim() {
                "seed" => sc.seed = v.parse().map_err(|_| bad("bad seed"))?,
                "frames" => sc.frames = v.parse().map_err(|_| bad("bad frame count"))?,
                "noise" => sc.noise = num(v)?,
                "overlap_threshold" => sc.occlusion.overlap_threshold = num(v)?,
                "img_height" => sc.img_height = num(v)?,
                "img_width" => sc.img_width = num(v)?,
                "det_score" => sc.det_score = num(v)?,
                "occlusion" => {
                    sc.occlusion.mode = match v.split_once(':') {
                        None if v == "drop" => OcclusionMode::Drop,
                        Some(("downweight", f)) => OcclusionMode::DownWeight(num(f)?),
                        _ => return Err(bad("occlusion is 'drop' or 'downweight:<factor>'")),
                    }
                }
                "pan" => {
                    let (x, y) = v.split_once(',').ok_or_else(|| bad("pan = dx,dy"))?;
                    sc.pan = (num(x)?, num(y)?);
                }
                "agent" => {
                    let f: Vec<&str> = v.split(',').collect();
                    if f.len() != 7 && f.len() != 10 {
                        return Err(bad("agent = x,y,w,h,vx,vy,rank[,turn_frame,vx,vy]"));
                    }
                    let turn = if f.len() == 10 {
                        let at = f[7].trim().parse().map_err(|_| bad("bad turn frame"))?;
                        Some((at, (num(f[8])?, num(f[9])?)))
                    } else {
                        None
                    };
                    let bbox = BBox::from_tlwh(num(f[0])?, num(f[1])?, num(f[2])?, num(f[3])?)
                        .map_err(|e| bad(&e.to_string()))?;
                    sc.agents.push(Agent {
                        bbox,
                        velocity: (num(f[4])?, num(f[5])?),
                        depth_rank: f[6].trim().parse().map_err(|_| bad("bad depth rank"))?,
                        turn,
                    });
                }
                other => return Err(bad(&format!("unknown key '{other}'"))),
            }
        }
        sc.validate()?;
        Ok(sc)
    }

    fn box_at(&self, agent: &Agent, frame: u32) -> BBox {
        let t = (frame - 1) as f64;
        let (mut dx, mut dy) = (agent.velocity.0 * t, agent.velocity.1 * t);
        if let Some((at, v)) = agent.turn {
            if frame > at {
                let since = (frame - at) as f64;
                dx += (v.0 - agent.velocity.0) * since;
                dy += (v.1 - agent.velocity.1) * since;
            }
        }
        dx -= self.pan.0 * t;
        dy -= self.pan.1 * t;
        BBox {
            x1: agent.bbox.x1 + dx,
            y1: agent.bbox.y1 + dy,
            x2: agent.bbox.x2 + dx,
            y2: agent.bbox.y2 + dy,
        }
    }

    fn inside_view(&self, b: &BBox) -> bool {
        b.x2 > 0.0 && b.y2 > 0.0 && b.x1 < self.img_width && b.y1 < self.img_height
    }
}

fn coverage(deeper: &BBox, nearer: &BBox) -> f64 {
    let w = (deeper.x2.min(nearer.x2) - deeper.x1.max(nearer.x1)).max(0.0);
    let h = (deeper.y2.min(nearer.y2) - deeper.y1.max(nearer.y1)).max(0.0);
    let area = deeper.area();
    if area > 0.0 { w * h / area } else { 0.0 }
}

/// Ground truth ids are agent index + 1. Deterministic per seed.
pub fn generate(scenario: &Scenario) -> SyntheticSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let jitter = Normal::new(0.0, scenario.noise.max(0.0)).expect("non-negative std dev");
    let mut gt = Vec::with_capacity(scenario.frames as usize);
    let mut detections = Vec::new();
    let mut warps = WarpTable::identity();
    if scenario.pan != (0.0, 0.0) {
        let shift = AffineTransform::from_rows([1.0, 0.0, -scenario.pan.0, 0.0, 1.0, -scenario.pan.1])
            .expect("translation is invertible");
        for frame in 2..=scenario.frames {
            warps.insert(frame, shift);
        }
    }

    for frame in 1..=scenario.frames {
        let boxes: Vec<BBox> = scenario.agents.iter().map(|a| scenario.box_at(a, frame)).collect();
        let mut entries = Vec::new();
        for (k, b) in boxes.iter().enumerate() {
            if !scenario.inside_view(b) {
                continue;
            }
            entries.push(TrackEntry {
                id: k as u64 + 1,
                bbox: *b,
                score: 1.0,
            });

            // smaller bottom edge is further away
            let occluded = boxes.iter().enumerate().any(|(o, nb)| {
                o != k && nb.y2 > b.y2 && coverage(b, nb) > scenario.occlusion.overlap_threshold
            });
            let mut score = scenario.det_score;
            if occluded {
                match scenario.occlusion.mode {
                    OcclusionMode::Drop => continue,
                    OcclusionMode::DownWeight(f) => score *= f,
                }
            }
            let mut noisy = [b.x1, b.y1, b.x2, b.y2];
            if scenario.noise > 0.0 {
                for v in &mut noisy {
                    *v += jitter.sample(&mut rng);
                }
            }
            let (x1, y1) = (noisy[0], noisy[1]);
            let w = (noisy[2] - x1).max(1.0);
            let h = (noisy[3] - y1).max(1.0);
            detections.push(MotRecord {
                frame,
                id: -1,
                x: x1,
                y: y1,
                w,
                h,
                score,
            });
        }
        gt.push(FrameResult { frame, entries });
    }

    SyntheticSequence {
        gt,
        detections,
        warps,
    }
}
