//! Tracker configuration, dataset presets and the `key = value` text form.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::association::{Overlap, QpdmParams};
use crate::error::{Error, Result};
use crate::geometry::ViewGeometry;
use crate::motion::{KalmanNoise, MEAS_DIM, STATE_DIM};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackerConfig {
    pub det_thresh: f64,
    pub iou_threshold: f64,
    /// Weight of the quantized pseudo-depth cost.
    pub lambda1: f64,
    /// Weight of the velocity-direction cost.
    pub lambda2: f64,
    pub interval_num: usize,
    pub ocm_dt: u32,
    pub t_expire: u32,
    pub min_hits: u32,
    pub img_height: f64,
    pub img_width: f64,
    pub cmc_enabled: bool,
    pub cmc_translate_velocity: bool,
    /// Depth-volume IoU when set, plain IoU otherwise.
    pub use_dviou: bool,
    pub kf_p0: [f64; STATE_DIM],
    pub kf_q: [f64; STATE_DIM],
    pub kf_r: [f64; MEAS_DIM],
}

pub const PRESETS: [&str; 3] = ["dancetrack", "mot17", "mot20"];

impl Default for TrackerConfig {
    fn default() -> Self {
        let noise = KalmanNoise::default();
        TrackerConfig {
            det_thresh: 0.6,
            iou_threshold: 0.3,
            lambda1: 0.2,
            lambda2: 0.2,
            interval_num: 8,
            ocm_dt: 3,
            t_expire: 30,
            min_hits: 3,
            img_height: 1080.0,
            img_width: 1920.0,
            cmc_enabled: true,
            cmc_translate_velocity: true,
            use_dviou: true,
            kf_p0: noise.p0,
            kf_q: noise.q,
            kf_r: noise.r,
        }
    }
}

impl TrackerConfig {
    pub fn preset(name: &str) -> Result<Self> {
        let base = TrackerConfig::default();
        match name {
            "dancetrack" | "mot17" => Ok(base),
            "mot20" => Ok(TrackerConfig {
                det_thresh: 0.4,
                iou_threshold: 0.35,
                lambda1: 0.36,
                lambda2: 0.04,
                ..base
            }),
            other => Err(Error::Config(format!(
                "unknown preset '{other}' (expected one of {})",
                PRESETS.join(", ")
            ))),
        }
    }

    pub fn noise(&self) -> KalmanNoise {
        KalmanNoise {
            p0: self.kf_p0,
            q: self.kf_q,
            r: self.kf_r,
        }
    }

    pub fn view(&self) -> Result<ViewGeometry> {
        ViewGeometry::new(self.img_height, self.img_width)
    }

    pub fn qpdm(&self) -> Result<QpdmParams> {
        QpdmParams::new(self.interval_num)
            .ok_or_else(|| Error::Config("interval_num must be at least 1".into()))
    }

    pub fn overlap(&self) -> Overlap {
        if self.use_dviou {
            Overlap::DepthVolume
        } else {
            Overlap::Planar
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must lie in [0, 1], got {v}")))
            }
        };
        unit("det_thresh", self.det_thresh)?;
        unit("iou_threshold", self.iou_threshold)?;
        for (name, v) in [("lambda1", self.lambda1), ("lambda2", self.lambda2)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be non-negative, got {v}")));
            }
        }
        self.qpdm()?;
        self.view().map_err(|e| Error::Config(e.to_string()))?;
        if self.t_expire == 0 {
            return Err(Error::Config("t_expire must be at least 1".into()));
        }
        let noise_ok = self
            .kf_p0
            .iter()
            .chain(&self.kf_q)
            .chain(&self.kf_r)
            .all(|v| *v >= 0.0 && v.is_finite());
        if !noise_ok {
            return Err(Error::Config("kalman noise entries must be finite and non-negative".into()));
        }
        Ok(())
    }

    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        let value = value.trim();
        match key {
            "preset" => *self = TrackerConfig::preset(value)?,
            "det_thresh" => self.det_thresh = parse(key, value)?,
            "iou_threshold" => self.iou_threshold = parse(key, value)?,
            "lambda1" => self.lambda1 = parse(key, value)?,
            "lambda2" => self.lambda2 = parse(key, value)?,
            "interval_num" => self.interval_num = parse(key, value)?,
            "ocm_dt" => self.ocm_dt = parse(key, value)?,
            "t_expire" => self.t_expire = parse(key, value)?,
            "min_hits" => self.min_hits = parse(key, value)?,
            "img_height" => self.img_height = parse(key, value)?,
            "img_width" => self.img_width = parse(key, value)?,
            "cmc_enabled" => self.cmc_enabled = parse(key, value)?,
            "cmc_translate_velocity" => self.cmc_translate_velocity = parse(key, value)?,
            "use_dviou" => self.use_dviou = parse(key, value)?,
            "kf_p0" => self.kf_p0 = parse_list(key, value)?,
            "kf_q" => self.kf_q = parse_list(key, value)?,
            "kf_r" => self.kf_r = parse_list(key, value)?,
            _ => return Err(Error::Config(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Applies a `key=value` assignment.
    pub fn set_assignment(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got '{assignment}'")))?;
        self.set(k, v)
    }

    /// Parses `key = value` lines on top of the defaults. A `preset` line
    /// resets everything set before it.
    pub fn from_kv_text(text: &str) -> Result<Self> {
        let mut cfg = TrackerConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            cfg.set_assignment(line)
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(cfg)
    }

    pub fn to_kv_text(&self) -> String {
        let list = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        let mut s = String::new();
        let _ = writeln!(s, "det_thresh = {}", self.det_thresh);
        let _ = writeln!(s, "iou_threshold = {}", self.iou_threshold);
        let _ = writeln!(s, "lambda1 = {}", self.lambda1);
        let _ = writeln!(s, "lambda2 = {}", self.lambda2);
        let _ = writeln!(s, "interval_num = {}", self.interval_num);
        let _ = writeln!(s, "ocm_dt = {}", self.ocm_dt);
        let _ = writeln!(s, "t_expire = {}", self.t_expire);
        let _ = writeln!(s, "min_hits = {}", self.min_hits);
        let _ = writeln!(s, "img_height = {}", self.img_height);
        let _ = writeln!(s, "img_width = {}", self.img_width);
        let _ = writeln!(s, "cmc_enabled = {}", self.cmc_enabled);
        let _ = writeln!(s, "cmc_translate_velocity = {}", self.cmc_translate_velocity);
        let _ = writeln!(s, "use_dviou = {}", self.use_dviou);
        let _ = writeln!(s, "kf_p0 = {}", list(&self.kf_p0));
        let _ = writeln!(s, "kf_q = {}", list(&self.kf_q));
        let _ = writeln!(s, "kf_r = {}", list(&self.kf_r));
        s
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value '{value}' for {key}")))
}

fn parse_list<const N: usize>(key: &str, value: &str) -> Result<[f64; N]> {
    let items = value
        .split(',')
        .map(|v| parse::<f64>(key, v.trim()))
        .collect::<Result<Vec<_>>>()?;
    items
        .try_into()
        .map_err(|v: Vec<f64>| Error::Config(format!("{key} needs {N} values, got {}", v.len())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_values() {
        let d = TrackerConfig::preset("dancetrack").unwrap();
        assert_eq!(
            (d.lambda1, d.lambda2, d.interval_num, d.iou_threshold, d.det_thresh),
            (0.2, 0.2, 8, 0.3, 0.6)
        );
        let m17 = TrackerConfig::preset("mot17").unwrap();
        assert_eq!((m17.lambda1, m17.lambda2, m17.iou_threshold, m17.det_thresh), (0.2, 0.2, 0.3, 0.6));
        let m20 = TrackerConfig::preset("mot20").unwrap();
        assert_eq!(
            (m20.lambda1, m20.lambda2, m20.interval_num, m20.iou_threshold, m20.det_thresh),
            (0.36, 0.04, 8, 0.35, 0.4)
        );
        assert!(TrackerConfig::preset("kitti").is_err());
    }

    #[test]
    fn kv_round_trip() {
        let mut cfg = TrackerConfig::preset("mot20").unwrap();
        cfg.set("kf_r", "2, 2, 2, 20, 20").unwrap();
        cfg.cmc_enabled = false;
        let back = TrackerConfig::from_kv_text(&cfg.to_kv_text()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn kv_text_with_preset_and_comments() {
        let text = "# tuned\npreset = mot20\nlambda1 = 0.5 # override\n\nocm_dt=5\n";
        let cfg = TrackerConfig::from_kv_text(text).unwrap();
        assert_eq!(cfg.lambda1, 0.5);
        assert_eq!(cfg.lambda2, 0.04);
        assert_eq!(cfg.ocm_dt, 5);
    }

    #[test]
    fn bad_keys_and_values() {
        let mut cfg = TrackerConfig::default();
        assert!(cfg.set("nope", "1").is_err());
        assert!(cfg.set("lambda1", "abc").is_err());
        assert!(cfg.set("kf_r", "1,2").is_err());
        assert!(cfg.set_assignment("lambda1").is_err());
        let err = TrackerConfig::from_kv_text("lambda1 = 0.1\nwhat\n").unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn validation() {
        assert!(TrackerConfig::default().validate().is_ok());
        let bad = [
            TrackerConfig { det_thresh: 1.5, ..Default::default() },
            TrackerConfig { lambda2: -0.1, ..Default::default() },
            TrackerConfig { interval_num: 0, ..Default::default() },
            TrackerConfig { img_height: 0.0, ..Default::default() },
            TrackerConfig { t_expire: 0, ..Default::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }
}
