//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Built with `harness = false` so the lines always show.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pdsort::association::{interval_depths, solve_assignment, CostMatrix, QpdmParams};
use pdsort::evalsynth::{evaluate, generate, suite, track_scenario, Agent, MetricsReport, Scenario, Variant};
use pdsort::geometry::{dviou, iou, BBox, DepthBox};
use pdsort::io::{self, format_records, parse_records, records_to_results, MotRecord, TrackerConfig};
use pdsort::motion::{
    apply_cmc_state, kf_init, kf_predict, kf_update, AffineTransform, KalmanNoise, Measurement, Observation,
    MEAS_DIM, STATE_DIM,
};
use pdsort::tracker::{oru_reupdate, Tracklet};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn random_box(rng: &mut ChaCha8Rng) -> BBox {
    let x = rng.random_range(0.0..200.0);
    let y = rng.random_range(0.0..200.0);
    let w = rng.random_range(1.0..120.0);
    let h = rng.random_range(1.0..120.0);
    BBox::from_tlwh(x, y, w, h).unwrap()
}

fn dviou_reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut bad = 0;
    for _ in 0..10_000 {
        let (a, b) = (random_box(&mut rng), random_box(&mut rng));
        let pd = rng.random_range(1.0..2000.0);
        let da = DepthBox::with_pseudo_depth(a, pd).unwrap();
        let db = DepthBox::with_pseudo_depth(b, pd).unwrap();
        worst = worst.max((dviou(&da, &db) - iou(&a, &b)).abs());
    }
    for _ in 0..10_000 {
        let (a, b) = (random_box(&mut rng), random_box(&mut rng));
        let da = DepthBox::with_pseudo_depth(a, rng.random_range(1.0..2000.0)).unwrap();
        let db = DepthBox::with_pseudo_depth(b, rng.random_range(1.0..2000.0)).unwrap();
        let (ab, ba) = (dviou(&da, &db), dviou(&db, &da));
        if !(0.0..=1.0).contains(&ab) || ab != ba {
            bad += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst < 1e-12 && bad == 0 && elapsed < Duration::from_secs(1),
        format!("max |dviou-iou| = {worst:.1e}, {bad} range/symmetry violations, {elapsed:.2?}"),
    )
}

/// Minimum over all injective row-to-column maps (rows <= cols).
fn brute_force(c: &CostMatrix) -> f64 {
    fn rec(c: &CostMatrix, row: usize, used: &mut Vec<bool>) -> f64 {
        let (rows, cols) = c.shape();
        if row == rows {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for col in 0..cols {
            if !used[col] {
                used[col] = true;
                best = best.min(c.get(row, col) + rec(c, row + 1, used));
                used[col] = false;
            }
        }
        best
    }
    let c = if c.shape().0 > c.shape().1 { c.transpose() } else { c.clone() };
    rec(&c, 0, &mut vec![false; c.shape().1])
}

fn assignment_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let start = Instant::now();
    let mut mismatches = 0;
    for _ in 0..1000 {
        let rows = rng.random_range(1..=6);
        let cols = rng.random_range(1..=6);
        // integer costs keep every sum exact
        let c = CostMatrix::from_fn(rows, cols, |_, _| rng.random_range(-50..=50) as f64);
        let a = solve_assignment(&c, f64::INFINITY);
        let total: f64 = a.matches.iter().map(|&(r, k)| c.get(r, k)).sum();
        if a.matches.len() != rows.min(cols) || total != brute_force(&c) {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches == 0 && elapsed < Duration::from_secs(10),
        format!("{mismatches}/1000 mismatches against exhaustive search, {elapsed:.2?}"),
    )
}

fn qpdm_correctness() -> Outcome {
    let p8 = QpdmParams::new(8).unwrap();
    let hand = interval_depths(&[0.0, 35.0, 70.0], p8);
    let hand_ok = hand == vec![0.125, 0.625, 1.0];
    let uniform_ok = interval_depths(&[42.0; 5], p8).iter().all(|&d| d == 1.0 / 8.0);

    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut affine_bad = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=12);
        let params = QpdmParams::new(rng.random_range(1..=16)).unwrap();
        // integer pds, scale and offset make the normalization exact
        let pds: Vec<f64> = (0..n).map(|_| rng.random_range(0..=1000) as f64).collect();
        let a = rng.random_range(1..=100) as f64;
        let b = rng.random_range(-10_000..=10_000) as f64;
        let moved: Vec<f64> = pds.iter().map(|x| a * x + b).collect();
        if interval_depths(&pds, params) != interval_depths(&moved, params) {
            affine_bad += 1;
        }
    }
    outcome(
        hand_ok && uniform_ok && affine_bad == 0,
        format!("hand values {hand:?}, uniform degenerate: {uniform_ok}, {affine_bad}/1000 affine violations"),
    )
}

fn noiseless() -> KalmanNoise {
    KalmanNoise {
        q: [0.0; STATE_DIM],
        r: [1e-10; MEAS_DIM],
        ..KalmanNoise::default()
    }
}

/// Constant-velocity truth: center, pseudo-depth and area change linearly.
fn truth(frame: u32) -> Observation {
    let t = frame as f64;
    Observation {
        z: Measurement::from([300.0 + 4.0 * t, 500.0 - 1.5 * t, 1200.0 + 1.5 * t, 9000.0 + 30.0 * t, 0.45]),
        frame,
        score: 1.0,
    }
}

fn filter_exactness() -> Outcome {
    let noise = noiseless();
    let mut state = kf_init(&truth(1), &noise);
    for f in 2..=5 {
        state = kf_update(&kf_predict(&state, &noise), &truth(f), &noise).unwrap();
    }
    let pred = kf_predict(&state, &noise);
    let next = truth(6);
    let pred_err = (0..4).map(|k| (pred.x[k] - next.z[k]).abs()).fold(0.0, f64::max);

    let mut t = Tracklet::new(1, truth(1), &noise);
    for f in 2..=3 {
        t.predict(&noise);
        t = oru_reupdate(&t, &truth(f), &noise).unwrap();
    }
    // frames 4, 5 and 6 are missing
    for _ in 4..=7 {
        t.predict(&noise);
    }
    t = oru_reupdate(&t, &truth(7), &noise).unwrap();
    let v = &t.kf().x;
    let vel_err = [(v[5], 4.0), (v[6], -1.5), (v[7], 1.5), (v[8], 30.0)]
        .iter()
        .map(|(got, want)| (got - want).abs())
        .fold(0.0, f64::max);

    outcome(
        pred_err < 1e-6 && vel_err < 1e-6,
        format!("one-step prediction error {pred_err:.1e} px, velocity error after 3-frame gap {vel_err:.1e}"),
    )
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_pdsort")
}

fn pdsort(args: &[&str]) -> std::process::Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn cmc_identities(dir: &Path) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut mean_bad = 0;
    for _ in 0..1000 {
        let o = Observation {
            z: Measurement::from([
                rng.random_range(0.0..1920.0),
                rng.random_range(0.0..1080.0),
                rng.random_range(1000.0..2160.0),
                rng.random_range(100.0..50_000.0),
                rng.random_range(0.2..2.0),
            ]),
            frame: 1,
            score: 1.0,
        };
        let s = kf_predict(&kf_init(&o, &KalmanNoise::default()), &KalmanNoise::default());
        let out = apply_cmc_state(&s, &AffineTransform::identity(), true);
        if out.x != s.x || (out.p - s.p).abs().max() > 1e-12 {
            mean_bad += 1;
        }
    }

    let sc = &suite("crossing", 0).unwrap()[0];
    let seq = generate(sc);
    let det = dir.join("cmc-det.txt");
    io::write_records(&det, &seq.detections).unwrap();
    let warps = dir.join("cmc-identity-warps.txt");
    let identity: String = (1..=sc.frames).map(|f| format!("{f} 1 0 0 0 1 0\n")).collect();
    std::fs::write(&warps, identity).unwrap();
    let (a, b) = (dir.join("cmc-a.txt"), dir.join("cmc-b.txt"));
    let run_a = pdsort(&["track", "--det", det.to_str().unwrap(), "--no-cmc", "--out", a.to_str().unwrap()]);
    let run_b = pdsort(&[
        "track",
        "--det",
        det.to_str().unwrap(),
        "--warps",
        warps.to_str().unwrap(),
        "--out",
        b.to_str().unwrap(),
    ]);
    let same = run_a.status.success()
        && run_b.status.success()
        && std::fs::read(&a).unwrap() == std::fs::read(&b).unwrap();
    let lines = std::fs::read_to_string(&a).map(|s| s.lines().count()).unwrap_or(0);
    outcome(
        mean_bad == 0 && same && lines > 0,
        format!("{mean_bad}/1000 identity-warp changes, --no-cmc vs identity warp files identical: {same} ({lines} lines)"),
    )
}

fn mota_identity(r: &MetricsReport) -> bool {
    r.mota == 1.0 - (r.fn_ + r.fp + r.id_switches) as f64 / r.gt as f64
}

fn occlusion_direction() -> Outcome {
    let start = Instant::now();
    let scenes = suite("crossing", 0).unwrap();
    let base = TrackerConfig::default();
    let (full_cfg, iou_cfg) = (Variant::Full.configure(&base), Variant::IouOnly.configure(&base));
    let (mut full, mut plain, mut strictly_better, mut identity_bad) = (0, 0, 0, 0);
    for sc in &scenes {
        let seq = generate(sc);
        let a = evaluate(&seq.gt, &track_scenario(&full_cfg, sc, &seq).unwrap(), 0.5);
        let b = evaluate(&seq.gt, &track_scenario(&iou_cfg, sc, &seq).unwrap(), 0.5);
        full += a.id_switches;
        plain += b.id_switches;
        strictly_better += usize::from(a.id_switches < b.id_switches);
        identity_bad += usize::from(!mota_identity(&a)) + usize::from(!mota_identity(&b));
    }
    let elapsed = start.elapsed();
    outcome(
        full <= plain && strictly_better >= 1 && identity_bad == 0 && elapsed < Duration::from_secs(30),
        format!(
            "id switches full {full} vs iou-only {plain} over {} scenes, fewer on {strictly_better}, \
             {identity_bad} MOTA identity violations, {elapsed:.2?}",
            scenes.len()
        ),
    )
}

fn round_trip_and_presets() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut bad_sets = 0;
    for _ in 0..200 {
        let frames = rng.random_range(1..30u32);
        let mut records = Vec::new();
        for frame in 1..=frames {
            for id in 1..=rng.random_range(0..6i64) {
                // two decimals, as written
                let mut c = |lo: i32| rng.random_range(lo..200_000) as f64 / 100.0;
                let (x, y, w, h) = (c(0), c(0), c(1), c(1));
                records.push(MotRecord {
                    frame,
                    id,
                    x,
                    y,
                    w,
                    h,
                    score: rng.random_range(0.0..1.0),
                });
            }
        }
        let parsed = parse_records(Path::new("mem"), &format_records(&records)).unwrap();
        let results = records_to_results(&parsed).unwrap();
        if parsed != records || results.iter().map(|f| f.entries.len()).sum::<usize>() != records.len() {
            bad_sets += 1;
        }
    }

    let check = |name: &str, l1: f64, l2: f64, n: usize, gate: f64, det: f64| {
        let c = TrackerConfig::preset(name).unwrap();
        c.lambda1 == l1 && c.lambda2 == l2 && c.interval_num == n && c.iou_threshold == gate && c.det_thresh == det
    };
    let presets_ok = check("dancetrack", 0.2, 0.2, 8, 0.3, 0.6)
        && check("mot17", 0.2, 0.2, 8, 0.3, 0.6)
        && check("mot20", 0.36, 0.04, 8, 0.35, 0.4);
    outcome(
        bad_sets == 0 && presets_ok,
        format!("{bad_sets}/200 result sets changed by write+parse, presets match: {presets_ok}"),
    )
}

fn throughput(dir: &Path) -> Outcome {
    // ten walkers at distinct depths drifting back and forth
    let agents = (0..10)
        .map(|k| {
            let y2 = 300.0 + 60.0 * k as f64;
            let vx = if k % 2 == 0 { 1.0 } else { -1.0 };
            Agent {
                bbox: BBox::from_tlwh(700.0 + 40.0 * k as f64, y2 - 160.0, 60.0, 160.0).unwrap(),
                velocity: (vx, 0.0),
                depth_rank: 9 - k,
                turn: Some((500, (-vx, 0.0))),
            }
        })
        .collect();
    let sc = Scenario {
        seed: 16,
        agents,
        frames: 1000,
        noise: 2.0,
        ..Scenario::default()
    };
    let seq = generate(&sc);
    let det = dir.join("throughput-det.txt");
    io::write_records(&det, &seq.detections).unwrap();
    let out = dir.join("throughput-out.txt");
    let start = Instant::now();
    let run = pdsort(&["track", "--det", det.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let fps = sc.frames as f64 / start.elapsed().as_secs_f64();
    outcome(
        run.status.success() && fps > 100.0,
        format!("{} frames, 10 targets: {fps:.0} fps including process start and file I/O", sc.frames),
    )
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("dviou reduction", Box::new(dviou_reduction)),
        ("assignment oracle", Box::new(assignment_oracle)),
        ("qpdm correctness", Box::new(qpdm_correctness)),
        ("filter exactness", Box::new(filter_exactness)),
        ("cmc identities", Box::new(|| cmc_identities(dir.path()))),
        ("occlusion robustness direction", Box::new(occlusion_direction)),
        ("round-trip io and presets", Box::new(round_trip_and_presets)),
        ("throughput", Box::new(|| throughput(dir.path()))),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let o = check();
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
