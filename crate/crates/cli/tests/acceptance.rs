//! Acceptance criteria, one line of output each.
//!
//! Runs as a plain binary (`harness = false`) so every criterion reports
//! `PASS` or `FAIL` regardless of the others. Tolerances are fixed below.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{Matrix3, UnitQuaternion};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use percept_core::boxes::{decode_unclipped, encode, iou, nms, AnchorSet, BoxCenter, BoxCorner, Variances};
use percept_core::data::{
    batch_sizes, batches, epoch_permutation, parse_message, serialize_message, Batch, BatchPlan, Box2DMsg,
    Keypoints3DMsg, Message, MessageError, Pose6DMsg,
};
use percept_core::geometry::{
    matrix_to_quaternion, project_points, quaternion_multiply, solve_pnp_dlt, CameraIntrinsics, GeometryError, Pose,
    Quaternion,
};
use percept_core::image::{
    adjust_brightness, adjust_contrast, adjust_hue, adjust_saturation, flip_left_right, hsv_to_rgb, resize_bilinear,
    rgb_to_hsv,
};
use percept_core::pipeline::{
    from_fn, Arity, DataPacket, Photometric, PipelineError, ProcessError, RandomPhotometric, SequentialProcessor, Step,
    Value,
};
use percept_core::{ImageU8, RngStream};

const NMS_BUDGET: Duration = Duration::from_secs(5);
const PNP_BUDGET: Duration = Duration::from_secs(10);
const CLI_BUDGET: Duration = Duration::from_secs(1);

const ROUND_TRIP_TOL: f64 = 1e-6;
const HAND_TOL: f64 = 1e-9;
const IOU_SYMMETRY_TOL: f64 = 1e-7;
const IOU_GRID_TOL: f64 = 1e-3;
const ROTATION_TOL: f64 = 1e-9;
const QUAT_ROUND_TRIP_TOL: f64 = 1e-7;
const PNP_TRANSLATION_REL_TOL: f64 = 1e-6;
const PNP_ROTATION_TOL: f64 = 1e-6;
const HSV_TOL: f64 = 1.0 / 255.0;

fn main() {
    let criteria: [(&str, fn()); 10] = [
        ("NMS oracle equivalence", nms_oracle),
        ("encode/decode round trip", encode_decode),
        ("IoU properties and pixel-grid oracle", iou_suite),
        ("quaternion suite", quaternion_suite),
        ("PnP round trip", pnp_round_trip),
        ("image suite", image_suite),
        ("pipeline engine", pipeline_engine),
        ("batch dispatcher", batch_dispatcher),
        ("end-to-end CLI goldens", cli_goldens),
        ("message round trip", message_round_trip),
    ];
    let default_hook = std::panic::take_hook();
    std::panic::set_hook(Box::new(|info| eprintln!("  {info}")));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let ok = catch_unwind(AssertUnwindSafe(check)).is_ok();
        failed += usize::from(!ok);
        println!(
            "criterion {:>2} {:<40} {} ({:.2?})",
            i + 1,
            name,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed()
        );
    }
    std::panic::set_hook(default_hook);
    println!("{} passed, {} failed", criteria.len() - failed, failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------- boxes

fn random_box(rng: &mut StdRng) -> BoxCorner {
    let (x0, x1) = ordered(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
    let (y0, y1) = ordered(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
    BoxCorner::new(x0, y0, x1, y1).unwrap()
}

fn ordered(a: f64, b: f64) -> (f64, f64) {
    (a.min(b), a.max(b))
}

fn oracle_iou(a: &BoxCorner, b: &BoxCorner) -> f64 {
    let area = |x: &BoxCorner| (x.x_max - x.x_min) * (x.y_max - x.y_min);
    let iw = (a.x_max.min(b.x_max) - a.x_min.max(b.x_min)).max(0.0);
    let ih = (a.y_max.min(b.y_max) - a.y_min.max(b.y_min)).max(0.0);
    let inter = iw * ih;
    let union = area(a) + area(b) - inter;
    if union > 0.0 {
        inter / union
    } else {
        0.0
    }
}

/// Brute-force greedy: repeatedly take the best remaining box (score, then
/// lower index) and discard everything overlapping it beyond `t`.
fn brute_force_nms(boxes: &[BoxCorner], scores: &[f64], t: f64, top_k: usize) -> Vec<usize> {
    let mut remaining: Vec<usize> = (0..boxes.len()).collect();
    let mut kept = Vec::new();
    while kept.len() < top_k && !remaining.is_empty() {
        let mut best = remaining[0];
        for &i in &remaining {
            if scores[i] > scores[best] || (scores[i] == scores[best] && i < best) {
                best = i;
            }
        }
        kept.push(best);
        remaining.retain(|&i| i != best && oracle_iou(&boxes[best], &boxes[i]) <= t);
    }
    kept
}

fn nms_oracle() {
    let mut rng = StdRng::seed_from_u64(1);
    let start = Instant::now();
    for _ in 0..1000 {
        let n = rng.gen_range(0..=12);
        let boxes: Vec<BoxCorner> = (0..n).map(|_| random_box(&mut rng)).collect();
        // Coarse scores so ties occur.
        let scores: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(0..8u8)) / 8.0).collect();
        let t = rng.gen_range(0.0..1.0);
        let top_k = rng.gen_range(1..=13);
        assert_eq!(
            nms(&boxes, &scores, t, top_k).unwrap(),
            brute_force_nms(&boxes, &scores, t, top_k),
            "boxes {boxes:?} scores {scores:?} t {t} k {top_k}"
        );
    }
    assert!(start.elapsed() < NMS_BUDGET, "took {:?}", start.elapsed());
}

fn encode_decode() {
    let v = Variances { center: 0.1, size: 0.2 };
    let mut rng = StdRng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let gt = BoxCenter::new(
            rng.gen_range(0.0..1.0),
            rng.gen_range(0.0..1.0),
            rng.gen_range(0.01..1.0),
            rng.gen_range(0.01..1.0),
        );
        let anchor = BoxCenter::new(
            rng.gen_range(0.0..1.0),
            rng.gen_range(0.0..1.0),
            rng.gen_range(0.01..1.0),
            rng.gen_range(0.01..1.0),
        );
        let offsets = encode(&gt, &anchor, v).unwrap();
        let set = AnchorSet::new(vec![anchor], v).unwrap();
        let back = decode_unclipped(&[offsets], &set).unwrap()[0];
        for (a, b) in back.to_array().iter().zip(gt.to_array()) {
            worst = worst.max((a - b).abs());
        }
    }
    assert!(worst <= ROUND_TRIP_TOL, "max error {worst:e}");

    let anchor = BoxCenter::new(0.5, 0.5, 0.2, 0.2);
    let gt = BoxCenter::new(0.54, 0.5, 0.2, 0.2);
    let o = encode(&gt, &anchor, v).unwrap();
    for (got, want) in o.iter().zip([2.0, 0.0, 0.0, 0.0]) {
        assert!((got - want).abs() <= HAND_TOL, "{o:?}");
    }
}

/// Counts 1e-3 grid cells whose centers fall inside each box.
fn grid_iou(a: &BoxCorner, b: &BoxCorner) -> f64 {
    const N: usize = 1000;
    let inside = |bx: &BoxCorner, x: f64, y: f64| x >= bx.x_min && x < bx.x_max && y >= bx.y_min && y < bx.y_max;
    let (mut inter, mut union) = (0u64, 0u64);
    let lo = |v: f64| ((v * N as f64).floor() as usize).saturating_sub(1);
    let hi = |v: f64| ((v * N as f64).ceil() as usize + 1).min(N);
    for i in lo(a.x_min.min(b.x_min))..hi(a.x_max.max(b.x_max)) {
        let x = (i as f64 + 0.5) / N as f64;
        for j in lo(a.y_min.min(b.y_min))..hi(a.y_max.max(b.y_max)) {
            let y = (j as f64 + 0.5) / N as f64;
            let (ia, ib) = (inside(a, x, y), inside(b, x, y));
            inter += u64::from(ia && ib);
            union += u64::from(ia || ib);
        }
    }
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

fn iou_suite() {
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..1000 {
        let (a, b) = (random_box(&mut rng), random_box(&mut rng));
        let (ab, ba) = (iou(&a, &b), iou(&b, &a));
        assert!((ab - ba).abs() <= IOU_SYMMETRY_TOL);
        assert!((0.0..=1.0).contains(&ab), "{ab}");
    }
    let a = BoxCorner::new(0.0, 0.0, 2.0, 2.0).unwrap();
    let b = BoxCorner::new(1.0, 1.0, 3.0, 3.0).unwrap();
    assert!((iou(&a, &b) - 1.0 / 7.0).abs() <= HAND_TOL);

    // Coordinates on a 0.005 lattice, so every box edge lies between cell
    // centers and the count is exact.
    let lattice = |rng: &mut StdRng| f64::from(rng.gen_range(0..=200u32)) / 200.0;
    let mut pairs = 0;
    while pairs < 100 {
        let mk = |rng: &mut StdRng| {
            let (x0, x1) = ordered(lattice(rng), lattice(rng));
            let (y0, y1) = ordered(lattice(rng), lattice(rng));
            BoxCorner::new(x0, y0, x1, y1).unwrap()
        };
        let (a, b) = (mk(&mut rng), mk(&mut rng));
        if a.area() == 0.0 || b.area() == 0.0 {
            continue;
        }
        let (fast, counted) = (iou(&a, &b), grid_iou(&a, &b));
        assert!(
            (fast - counted).abs() <= IOU_GRID_TOL,
            "{a:?} {b:?}: {fast} vs {counted}"
        );
        pairs += 1;
    }
}

// ------------------------------------------------------------- geometry

fn random_unit_quaternion(rng: &mut StdRng) -> Quaternion {
    loop {
        let v: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            return Quaternion::from_array(v.map(|x| x / n));
        }
    }
}

fn nalgebra_matrix(q: &Quaternion) -> Matrix3<f64> {
    UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(q.w, q.x, q.y, q.z))
        .to_rotation_matrix()
        .into_inner()
}

fn same_rotation(a: &Quaternion, b: &Quaternion) -> f64 {
    let (a, b) = (a.to_array(), b.to_array());
    let plus = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let minus = a.iter().zip(&b).map(|(x, y)| (x + y).abs()).fold(0.0, f64::max);
    plus.min(minus)
}

fn quaternion_suite() {
    let mut rng = StdRng::seed_from_u64(4);
    for i in 0..1000 {
        let mut q = random_unit_quaternion(&mut rng);
        if i % 10 == 0 {
            // Near 180 degrees: w tiny.
            let w: f64 = rng.gen_range(-1e-6..1e-6);
            let s = (1.0 - w * w).sqrt() / (q.x * q.x + q.y * q.y + q.z * q.z).sqrt();
            q = Quaternion::new(w, q.x * s, q.y * s, q.z * s);
        }
        let r = q.to_matrix().unwrap();
        assert!((r.transpose() * r - Matrix3::identity()).abs().max() <= ROTATION_TOL);
        assert!((r.determinant() - 1.0).abs() <= ROTATION_TOL);
        assert!((r - nalgebra_matrix(&q)).abs().max() <= ROTATION_TOL);

        let back = matrix_to_quaternion(&r).unwrap();
        assert!(back.is_canonical());
        assert!(same_rotation(&back, &q) <= QUAT_ROUND_TRIP_TOL, "{q:?} -> {back:?}");

        let p = random_unit_quaternion(&mut rng);
        let composed = quaternion_multiply(&q, &p).to_matrix().unwrap();
        assert!((composed - r * p.to_matrix().unwrap()).abs().max() <= ROTATION_TOL);
    }
    // Exactly 180 degrees about each axis.
    for axis in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
        let q = Quaternion::new(0.0, axis[0], axis[1], axis[2]);
        let back = matrix_to_quaternion(&q.to_matrix().unwrap()).unwrap();
        assert!(same_rotation(&back, &q) <= QUAT_ROUND_TRIP_TOL);
    }
}

fn camera() -> CameraIntrinsics {
    CameraIntrinsics::new(500.0, 520.0, 320.0, 240.0).unwrap()
}

fn pnp_round_trip() {
    let cam = camera();
    let mut rng = StdRng::seed_from_u64(5);
    let start = Instant::now();
    for _ in 0..1000 {
        let rotation = random_unit_quaternion(&mut rng).canonical();
        let t = [
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-0.5..0.5),
            rng.gen_range(1.0..5.0),
        ];
        let pose = Pose::new(rotation, t).unwrap();
        // Points within radius 0.87 of the origin stay in front of the camera.
        let pts: Vec<[f64; 3]> = (0..8)
            .map(|_| std::array::from_fn(|_| rng.gen_range(-0.5..0.5)))
            .collect();
        let pixels = project_points(&pts, &pose, &cam).unwrap();
        let est = solve_pnp_dlt(&pts, &pixels, &cam).unwrap();
        let dt = est
            .translation
            .iter()
            .zip(&t)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let norm = t.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(
            dt / norm <= PNP_TRANSLATION_REL_TOL,
            "translation error {:e}",
            dt / norm
        );
        let angle = est.rotation.angle_to(&rotation);
        assert!(angle <= PNP_ROTATION_TOL, "rotation error {angle:e}");
    }
    assert!(start.elapsed() < PNP_BUDGET, "took {:?}", start.elapsed());

    let pose = Pose::new(Quaternion::IDENTITY, [0.0, 0.0, 3.0]).unwrap();
    let flat: Vec<[f64; 3]> = (0..8)
        .map(|i| [f64::from(i % 3) * 0.2, f64::from(i / 3) * 0.3, 0.0])
        .collect();
    let px = project_points(&flat, &pose, &cam).unwrap();
    assert!(matches!(
        solve_pnp_dlt(&flat, &px, &cam),
        Err(GeometryError::DegenerateConfiguration(_))
    ));
    let few: Vec<[f64; 3]> = (0..5)
        .map(|i| [f64::from(i) * 0.1, f64::from(i * i) * 0.05, f64::from(i % 2) * 0.2])
        .collect();
    let px = project_points(&few, &pose, &cam).unwrap();
    assert!(matches!(
        solve_pnp_dlt(&few, &px, &cam),
        Err(GeometryError::InsufficientPoints(5))
    ));
}

// ---------------------------------------------------------------- image

fn random_image(rng: &mut StdRng, w: u32, h: u32) -> ImageU8 {
    ImageU8::new(w, h, (0..w * h * 3).map(|_| rng.gen()).collect()).unwrap()
}

fn max_diff(a: &ImageU8, b: &ImageU8) -> u8 {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| x.abs_diff(*y))
        .max()
        .unwrap_or(0)
}

fn image_suite() {
    let mut rng = StdRng::seed_from_u64(6);
    for _ in 0..10_000 {
        let rgb: [f64; 3] = std::array::from_fn(|_| rng.gen_range(0.0..=1.0));
        let back = hsv_to_rgb(rgb_to_hsv(rgb));
        for (a, b) in rgb.iter().zip(back) {
            assert!((a - b).abs() <= HSV_TOL, "{rgb:?} -> {back:?}");
        }
    }

    let img = random_image(&mut rng, 13, 7);
    assert_eq!(adjust_brightness(&img, 0.0), img);
    assert_eq!(adjust_contrast(&img, 1.0), img);
    assert!(max_diff(&adjust_saturation(&img, 1.0), &img) <= 1);
    assert!(max_diff(&adjust_hue(&img, 0.0), &img) <= 1);
    assert_eq!(flip_left_right(&flip_left_right(&img)), img);

    let gray = |v: [u8; 4]| ImageU8::new(2, 2, v.iter().flat_map(|&x| [x, x, x]).collect()).unwrap();
    assert_eq!(resize_bilinear(&gray([0, 2, 4, 6]), 1, 1).data(), [3, 3, 3]);

    let red = ImageU8::new(1, 1, vec![255, 0, 0]).unwrap();
    let shifted = adjust_hue(&red, 120.0);
    assert!(
        max_diff(&shifted, &ImageU8::new(1, 1, vec![0, 255, 0]).unwrap()) <= 1,
        "{:?}",
        shifted.data()
    );
}

// ------------------------------------------------------------- pipeline

type Leaf = Step;

fn random_leaf(rng: &mut StdRng) -> Leaf {
    match rng.gen_range(0..4) {
        0 => Step::leaf(RandomPhotometric {
            kind: Photometric::Brightness,
            range: percept_core::image::Range::new(-40.0, 40.0, 0.7),
        }),
        1 => Step::leaf(RandomPhotometric {
            kind: Photometric::Contrast,
            range: percept_core::image::Range::new(0.5, 1.5, 0.7),
        }),
        2 => Step::leaf(RandomPhotometric {
            kind: Photometric::Hue,
            range: percept_core::image::Range::new(-30.0, 30.0, 0.7),
        }),
        _ => Step::leaf(
            from_fn(|p: DataPacket, r: &mut RngStream| {
                let Some(Value::ImageU8(img)) = p.get(0) else {
                    return Err(ProcessError::Other("expected an image".into()));
                };
                let mut data = img.data().to_vec();
                let k = r.below(data.len() as u64) as usize;
                data[k] = data[k].wrapping_add(1);
                Ok(DataPacket::single(Value::ImageU8(
                    ImageU8::new(img.width(), img.height(), data).unwrap(),
                )))
            })
            .named("Poke"),
        ),
    }
}

fn random_tree(rng: &mut StdRng, depth: u32) -> SequentialProcessor {
    let n = rng.gen_range(0..4);
    let steps = (0..n)
        .map(|_| {
            if depth > 0 && rng.gen_bool(0.35) {
                Step::Nested(random_tree(rng, depth - 1))
            } else {
                random_leaf(rng)
            }
        })
        .collect();
    SequentialProcessor::from_steps(format!("tree{depth}"), steps).unwrap()
}

fn pipeline_engine() {
    let mut rng = StdRng::seed_from_u64(7);
    let img = random_image(&mut rng, 6, 5);
    let packet = DataPacket::single(Value::ImageU8(img.clone()));

    let empty = SequentialProcessor::new("empty");
    assert_eq!(empty.call(packet.clone(), &RngStream::new(1)).unwrap(), packet);

    for i in 0..100 {
        let tree = random_tree(&mut rng, 3);
        let seed = RngStream::new(i);
        let nested = tree.call(packet.clone(), &seed).unwrap();
        let flat = tree.flatten();
        assert!(flat.steps().iter().all(|s| matches!(s, Step::Leaf(_))));
        assert_eq!(flat.call(packet.clone(), &seed).unwrap(), nested);
        assert_eq!(tree.call(packet.clone(), &RngStream::new(i)).unwrap(), nested);
    }

    // Different seeds should not collide on a long random pipeline.
    let long = SequentialProcessor::from_steps("long", (0..8).map(|_| random_leaf(&mut rng)).collect()).unwrap();
    let a = long.call(packet.clone(), &RngStream::new(10)).unwrap();
    assert_eq!(a, long.call(packet.clone(), &RngStream::new(10)).unwrap());
    assert_ne!(a, long.call(packet.clone(), &RngStream::new(11)).unwrap());

    let one_to_two =
        from_fn(|p: DataPacket, _: &mut RngStream| Ok(DataPacket::new(vec![p.0[0].clone(), p.0[0].clone()])))
            .named("Split")
            .with_arity(Arity::Exact(1), Arity::Exact(2));
    let one_to_one = || {
        from_fn(|p: DataPacket, _: &mut RngStream| Ok(p))
            .named("Single")
            .with_arity(Arity::Exact(1), Arity::Exact(1))
    };
    assert!(matches!(
        SequentialProcessor::from_steps("bad", vec![Step::leaf(one_to_two), Step::leaf(one_to_one())]),
        Err(PipelineError::ArityMismatch { index: 1, .. })
    ));
    let single = SequentialProcessor::from_steps("single", vec![Step::leaf(one_to_one())]).unwrap();
    let pair = DataPacket::new(vec![Value::Scalar(1.0), Value::Scalar(2.0)]);
    assert!(single.call(pair, &RngStream::new(0)).is_err());
}

// ------------------------------------------------------------------ data

fn noisy_pipeline() -> SequentialProcessor {
    let add = from_fn(|p: DataPacket, r: &mut RngStream| {
        let Some(Value::Scalar(v)) = p.get(0) else {
            return Err(ProcessError::Other("expected a scalar".into()));
        };
        Ok(DataPacket::new(vec![
            Value::Scalar(v + r.next_f64()),
            Value::Scalar(r.next_f64()),
        ]))
    });
    SequentialProcessor::from_steps("noisy", vec![Step::leaf(add)]).unwrap()
}

fn run_epoch(n: usize, batch_size: usize, drop_last: bool, seed: u64, epoch: u64) -> Vec<Batch> {
    let data: Vec<DataPacket> = (0..n).map(|i| DataPacket::single(Value::Scalar(i as f64))).collect();
    let plan = BatchPlan {
        seed,
        batch_size,
        drop_last,
        epoch,
    };
    batches(&data, &noisy_pipeline(), plan)
        .unwrap()
        .map(Result::unwrap)
        .collect()
}

fn batch_dispatcher() {
    for (seed, epoch, n, bs) in [
        (0, 0, 10, 3),
        (7, 1, 37, 4),
        (99, 5, 1, 1),
        (3, 2, 0, 2),
        (11, 0, 64, 64),
    ] {
        let mut seen: Vec<usize> = run_epoch(n, bs, false, seed, epoch)
            .into_iter()
            .flat_map(|b| b.sample_indices)
            .collect();
        seen.sort_unstable();
        assert!(seen.into_iter().eq(0..n), "coverage for n={n}");
    }

    let per_sample = |bs| {
        let mut v: Vec<(usize, DataPacket)> = run_epoch(10, bs, false, 7, 0)
            .into_iter()
            .flat_map(|b| b.sample_indices.into_iter().zip(b.outputs))
            .collect();
        v.sort_by_key(|(i, _)| *i);
        v
    };
    assert_eq!(per_sample(2), per_sample(5));

    let sizes = |drop| run_epoch(10, 3, drop, 1, 0).iter().map(Batch::len).collect::<Vec<_>>();
    assert_eq!(sizes(false), [3, 3, 3, 1]);
    assert_eq!(sizes(true), [3, 3, 3]);
    assert_eq!(batch_sizes(10, 3, false), [3, 3, 3, 1]);
    assert_ne!(epoch_permutation(7, 0, 10), epoch_permutation(7, 1, 10));
}

// ------------------------------------------------------------------- cli

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn cli_goldens() {
    let dir = tempfile::tempdir().unwrap();
    let boxes = dir.path().join("boxes.jsonl");
    let drawn = dir.path().join("drawn.ppm");
    let start = Instant::now();
    let post = Command::new(env!("CARGO_BIN_EXE_percept"))
        .arg("postprocess")
        .arg("--scores")
        .arg(fixture("scores.json"))
        .arg("--anchors")
        .arg(fixture("anchors.json"))
        .arg("--classes")
        .arg(fixture("classes.json"))
        .args(["--iou", "0.45", "--score", "0.45", "--top-k", "200"])
        .args(["--image-width", "8", "--image-height", "8"])
        .output()
        .unwrap();
    assert!(post.status.success(), "{}", String::from_utf8_lossy(&post.stderr));
    std::fs::write(&boxes, &post.stdout).unwrap();
    let draw = Command::new(env!("CARGO_BIN_EXE_percept"))
        .arg("draw")
        .arg("--image")
        .arg(fixture("canvas.ppm"))
        .arg("--boxes")
        .arg(&boxes)
        .arg("--out")
        .arg(&drawn)
        .output()
        .unwrap();
    let elapsed = start.elapsed();
    assert!(draw.status.success(), "{}", String::from_utf8_lossy(&draw.stderr));
    assert_eq!(post.stdout, std::fs::read(fixture("golden_postprocess.jsonl")).unwrap());
    assert_eq!(
        std::fs::read(&drawn).unwrap(),
        std::fs::read(fixture("golden_draw.ppm")).unwrap()
    );
    assert!(elapsed < CLI_BUDGET, "took {elapsed:?}");
}

// -------------------------------------------------------------- messages

fn random_message(rng: &mut StdRng) -> Message {
    let names = ["person", "car", "mug", "", "traffic light", "ünïcode \"quoted\""];
    let class_name = names[rng.gen_range(0..names.len())].to_string();
    match rng.gen_range(0..3) {
        0 => {
            let (x0, x1) = ordered(rng.gen_range(-100.0..5000.0), rng.gen_range(-100.0..5000.0));
            let (y0, y1) = ordered(rng.gen_range(-100.0..5000.0), rng.gen_range(-100.0..5000.0));
            Message::Box2D(Box2DMsg {
                class_name,
                score: rng.gen_range(0.0..=1.0),
                coordinates: [x0 as i64, y0 as i64, x1 as i64, y1 as i64],
            })
        }
        1 => Message::Pose6D(Pose6DMsg {
            class_name,
            quaternion: random_unit_quaternion(rng).canonical().to_array(),
            translation: std::array::from_fn(|_| rng.gen_range(-1e4..1e4)),
        }),
        _ => Message::Keypoints3D(Keypoints3DMsg {
            class_name,
            points: (0..rng.gen_range(0..10))
                .map(|_| std::array::from_fn(|_| rng.gen::<f64>() * 10f64.powi(rng.gen_range(-300..300))))
                .collect(),
        }),
    }
}

fn message_round_trip() {
    let mut rng = StdRng::seed_from_u64(10);
    for _ in 0..1000 {
        let m = random_message(&mut rng);
        assert_eq!(parse_message(&serialize_message(&m)).unwrap(), m);
    }
    let schema = |line: &str| matches!(parse_message(line), Err(MessageError::SchemaViolation(_)));
    assert!(schema(
        r#"{"type":"Pose6D","class_name":"a","quaternion":[0.5,0,0,0],"translation":[0,0,1]}"#
    ));
    assert!(schema(
        r#"{"type":"Box2D","class_name":"a","score":0.5,"coordinates":[0,0,1,1],"extra":true}"#
    ));
    assert!(schema(r#"{"type":"Box2D","class_name":"a","coordinates":[0,0,1,1]}"#));
    assert!(schema(
        r#"{"type":"Box2D","class_name":"a","score":0.5,"coordinates":[3,0,1,1]}"#
    ));
    assert!(schema(r#"{"type":"Keypoints3D","class_name":"a","points":[[1,2]]}"#));
    assert!(schema("not json"));
    assert_eq!(
        parse_message(r#"{"type":"Skeleton","class_name":"a"}"#),
        Err(MessageError::UnknownMessageType("Skeleton".into()))
    );
}
