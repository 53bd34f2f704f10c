//! Command-line entry point.
//!
//! Exit codes: 0 on success, 1 for usage and configuration errors, 2 for
//! data errors (unreadable or malformed files, mismatched sequences).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evalsynth::{self, ablate, evaluate, generate, Scenario, Variant};
use crate::io::{
    self, interpolate_gaps, load_detections, load_results, read_records, write_records,
    write_results, TrackerConfig, WarpTable,
};
use crate::tracker::run_sequence;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "pdsort", version, about = "Pseudo-depth aware multi-object tracker")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Track one sequence of MOT detections.
    Track(TrackArgs),
    /// Score a result file against ground truth.
    Eval(EvalArgs),
    /// Generate synthetic scenes, optionally running the ablation.
    Synth(SynthArgs),
    /// Fill short gaps in a result file by linear interpolation.
    Interp(InterpArgs),
    /// Re-run a tracking job from its manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// dancetrack, mot17 or mot20.
    #[arg(long, default_value = "dancetrack")]
    pub preset: String,
    /// key = value config file applied on top of the preset.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Single override, repeatable: --set lambda1=0.3
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<TrackerConfig> {
        let mut cfg = TrackerConfig::preset(&self.preset)?;
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            for (n, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if !line.is_empty() {
                    cfg.set_assignment(line).map_err(|e| {
                        Error::Config(format!("{}:{}: {e}", path.display(), n + 1))
                    })?;
                }
            }
        }
        for o in &self.overrides {
            cfg.set_assignment(o)?;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    #[arg(long)]
    pub det: PathBuf,
    #[arg(long)]
    pub warps: Option<PathBuf>,
    /// Ignore camera warps.
    #[arg(long)]
    pub no_cmc: bool,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long)]
    pub img_height: Option<f64>,
    #[arg(long)]
    pub img_width: Option<f64>,
    /// MOT seqinfo.ini with imHeight/imWidth; defaults to the one two
    /// levels above the detection file when present.
    #[arg(long)]
    pub seqinfo: Option<PathBuf>,
    /// Sequence name recorded in the manifest.
    #[arg(long)]
    pub name: Option<String>,
    /// Number of frames; defaults to the last frame with a detection.
    #[arg(long)]
    pub frames: Option<u32>,
    /// Fill gaps of up to --max-gap frames in the output.
    #[arg(long)]
    pub interp: bool,
    #[arg(long, default_value_t = io::DEFAULT_MAX_GAP)]
    pub max_gap: u32,
    /// Defaults to `<out>.manifest.json`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub res: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub iou: f64,
    /// Print key=value lines instead of a table.
    #[arg(long)]
    pub kv: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Built-in suite: crossing or crossing-pan.
    #[arg(long, conflicts_with = "scenario")]
    pub suite: Option<String>,
    /// Scenario description file.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Where to write gt/det/warp files, one directory per scene.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Compare the full tracker with its ablated variants.
    #[arg(long)]
    pub ablate: bool,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct InterpArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = io::DEFAULT_MAX_GAP)]
    pub max_gap: u32,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Write here instead of the manifest's output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Everything needed to reproduce a tracking run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub sequence: String,
    pub preset: String,
    pub overrides: Vec<String>,
    pub config: TrackerConfig,
    pub det_path: PathBuf,
    pub warps_path: Option<PathBuf>,
    pub out_path: PathBuf,
    pub frames: u32,
    pub interp_max_gap: Option<u32>,
    pub wall_clock_s: f64,
    pub fps: f64,
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Track(a) => cmd_track(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Interp(a) => cmd_interp(a),
        Command::Replay(a) => cmd_replay(a),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => EXIT_USAGE,
                _ => EXIT_DATA,
            }
        }
    }
}

fn resolve_view(a: &TrackArgs, cfg: &mut TrackerConfig) -> Result<()> {
    let seqinfo = a.seqinfo.clone().or_else(|| {
        let p = a.det.parent()?.parent()?.join("seqinfo.ini");
        p.exists().then_some(p)
    });
    if let Some(p) = seqinfo {
        let (h, w) = io::read_seqinfo(&p)?;
        if let Some(h) = h {
            cfg.img_height = h;
        }
        if let Some(w) = w {
            cfg.img_width = w;
        }
    }
    if let Some(h) = a.img_height {
        cfg.img_height = h;
    }
    if let Some(w) = a.img_width {
        cfg.img_width = w;
    }
    Ok(())
}

fn execute(m: &mut RunManifest) -> Result<()> {
    m.config.validate()?;
    let view = m.config.view()?;
    let dets = load_detections(&m.det_path, &view, m.config.det_thresh)?;
    let warps = match (&m.warps_path, m.config.cmc_enabled) {
        (Some(p), true) if p.exists() => {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            io::parse_warps(p, &text)?
        }
        (Some(p), true) => {
            log::warn!("warp file {} not found, using identity warps", p.display());
            WarpTable::identity()
        }
        _ => WarpTable::identity(),
    };

    let start = Instant::now();
    let mut results = run_sequence(&m.config, &dets, &warps, m.frames)?;
    if let Some(gap) = m.interp_max_gap {
        results = interpolate_gaps(&results, gap);
    }
    let elapsed = start.elapsed().as_secs_f64();
    write_results(&m.out_path, &results)?;

    m.wall_clock_s = elapsed;
    m.fps = if elapsed > 0.0 { m.frames as f64 / elapsed } else { f64::INFINITY };
    Ok(())
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn write_manifest(path: &Path, m: &RunManifest) -> Result<()> {
    let text = serde_json::to_string_pretty(m).expect("manifest serializes");
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn cmd_track(a: &TrackArgs) -> Result<()> {
    let mut cfg = a.config.resolve()?;
    if a.no_cmc {
        cfg.cmc_enabled = false;
    }
    resolve_view(a, &mut cfg)?;
    cfg.validate()?;

    let frames = match a.frames {
        Some(f) => f,
        None => read_records(&a.det)?.iter().map(|r| r.frame).max().unwrap_or(0),
    };
    let sequence = a.name.clone().unwrap_or_else(|| {
        a.det
            .parent()
            .and_then(Path::parent)
            .and_then(Path::file_name)
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| a.det.display().to_string())
    });
    let mut m = RunManifest {
        sequence,
        preset: a.config.preset.clone(),
        overrides: a.config.overrides.clone(),
        config: cfg,
        det_path: a.det.clone(),
        warps_path: a.warps.clone(),
        out_path: a.out.clone(),
        frames,
        interp_max_gap: a.interp.then_some(a.max_gap),
        wall_clock_s: 0.0,
        fps: 0.0,
    };
    execute(&mut m)?;
    write_manifest(&a.manifest.clone().unwrap_or_else(|| manifest_path(&a.out)), &m)?;
    println!("{}: {} frames in {:.3}s ({:.1} fps)", m.sequence, m.frames, m.wall_clock_s, m.fps);
    Ok(())
}

fn cmd_replay(a: &ReplayArgs) -> Result<()> {
    let text = fs::read_to_string(&a.manifest).map_err(|e| Error::io(&a.manifest, e))?;
    let mut m: RunManifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: a.manifest.clone(),
        line: e.line(),
        msg: e.to_string(),
    })?;
    if let Some(out) = &a.out {
        m.out_path = out.clone();
    }
    execute(&mut m)?;
    println!("{}: {} frames in {:.3}s ({:.1} fps)", m.sequence, m.frames, m.wall_clock_s, m.fps);
    Ok(())
}

fn cmd_eval(a: &EvalArgs) -> Result<()> {
    // ground-truth rows flagged 0 are ignored, as in MOT gt files
    let gt_records: Vec<_> = read_records(&a.gt)?.into_iter().filter(|r| r.score != 0.0).collect();
    let gt = io::records_to_results(&gt_records)?;
    let res = load_results(&a.res)?;
    let Some(last_gt) = gt.iter().map(|f| f.frame).max() else {
        return Err(Error::Parse {
            path: a.gt.clone(),
            line: 0,
            msg: "ground truth has no boxes".into(),
        });
    };
    if let Some(bad) = res.iter().find(|f| f.frame > last_gt && !f.entries.is_empty()) {
        return Err(Error::Parse {
            path: a.res.clone(),
            line: 0,
            msg: format!("frame {} beyond the ground truth's last frame {last_gt}; sequences differ", bad.frame),
        });
    }
    let report = evaluate(&gt, &res, a.iou);
    if a.kv {
        print!("{}", report.to_kv());
    } else {
        println!("{report}");
    }
    Ok(())
}

fn cmd_synth(a: &SynthArgs) -> Result<()> {
    let scenarios: Vec<Scenario> = match (&a.suite, &a.scenario) {
        (Some(name), _) => evalsynth::suite(name, a.seed)?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            vec![Scenario::from_text(&text)?]
        }
        (None, None) => return Err(Error::Config("synth needs --suite or --scenario".into())),
    };

    if let Some(dir) = &a.out_dir {
        for sc in &scenarios {
            let seq = generate(sc);
            let scene_dir = dir.join(format!("scene-{:06}", sc.seed));
            fs::create_dir_all(&scene_dir).map_err(|e| Error::io(&scene_dir, e))?;
            write_results(&scene_dir.join("gt.txt"), &seq.gt)?;
            write_records(&scene_dir.join("det.txt"), &seq.detections)?;
            let warp_path = scene_dir.join("warps.txt");
            fs::write(&warp_path, seq.warps.to_text()).map_err(|e| Error::io(&warp_path, e))?;
            let info = format!(
                "[Sequence]\nname=scene-{:06}\nseqLength={}\nimWidth={}\nimHeight={}\n",
                sc.seed, sc.frames, sc.img_width, sc.img_height
            );
            let info_path = scene_dir.join("seqinfo.ini");
            fs::write(&info_path, info).map_err(|e| Error::io(&info_path, e))?;
            let sc_path = scene_dir.join("scenario.txt");
            fs::write(&sc_path, sc.to_text()).map_err(|e| Error::io(&sc_path, e))?;
        }
        println!("wrote {} scenes to {}", scenarios.len(), dir.display());
    }

    if a.ablate {
        let base = a.config.resolve()?;
        base.validate()?;
        let table = ablate(&scenarios, &base, &Variant::ALL)?;
        print!("{table}");
    }
    Ok(())
}

fn cmd_interp(a: &InterpArgs) -> Result<()> {
    let results = load_results(&a.input)?;
    write_results(&a.out, &interpolate_gaps(&results, a.max_gap))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["pdsort", "track"]), EXIT_USAGE);
        assert_eq!(run(["pdsort", "bogus"]), EXIT_USAGE);
        assert_eq!(run(["pdsort", "--help"]), EXIT_OK);
    }

    #[test]
    fn config_overrides_apply_in_order() {
        let args = ConfigArgs {
            preset: "mot20".into(),
            config: None,
            overrides: vec!["lambda1=0.5".into(), "ocm_dt=4".into()],
        };
        let cfg = args.resolve().unwrap();
        assert_eq!((cfg.lambda1, cfg.lambda2, cfg.ocm_dt), (0.5, 0.04, 4));
        let bad = ConfigArgs {
            overrides: vec!["lambda9=1".into()],
            ..args
        };
        assert!(matches!(bad.resolve(), Err(Error::Config(_))));
    }

    #[test]
    fn manifest_path_appends_suffix() {
        assert_eq!(manifest_path(Path::new("/tmp/a.txt")), PathBuf::from("/tmp/a.txt.manifest.json"));
    }
}
