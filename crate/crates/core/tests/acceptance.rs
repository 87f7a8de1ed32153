//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use utiv::anchors::{assign_anchors, decode_box, encode_box, generate_anchor_shapes, AnchorConfig, AnchorLabel};
use utiv::dataset::{parse_frame_annotation, write_frame_annotation};
use utiv::detections::{parse_detections_str, perturb_ground_truth, Perturbation};
use utiv::evaluation::{
    aggregate, class_prf, continuous_frame_tally, evaluate_detection, frame_tally, round_to, AreaTally, ConfusionMatrix,
};
use utiv::experiments::{resolution_sweep, Coordinates, SweepDetections, STANDARD_RESOLUTIONS};
use utiv::geometry::{region_intersection_area, union_area};
use utiv::synthetic::{generate_dataset, ChannelSpec, SyntheticSpec};
use utiv::{DetectionMode, Rect, RectRegion, Script};

use common::{oracle_assign, random_rects, raster_intersection, raster_union, Mask, OracleLabel, MALFORMED};

type Outcome = Result<String, String>;

struct Criterion {
    name: &'static str,
    budget: Option<Duration>,
    check: fn() -> Outcome,
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn truncate_to(v: f64, decimals: u32) -> f64 {
    let f = 10f64.powi(decimals as i32);
    (v * f).floor() / f
}

fn script_id() -> Outcome {
    let prf = class_prf(&ConfusionMatrix::from_counts([[8763, 386], [551, 6874]])).map_err(|e| e.to_string())?;
    let expected = [(Script::Urdu, 0.940, 0.957, 0.95), (Script::English, 0.946, 0.925, 0.94)];
    let mut detail = Vec::new();
    let mut ok = true;
    for (script, p, r, f) in expected {
        let s = prf[&script];
        let got = (round_to(s.precision, 3), round_to(s.recall, 3), round_to(s.f_measure, 2));
        ok &= got == (p, r, f);
        detail.push(format!("{script} P/R/F {:.3}/{:.3}/{:.2} (table {p:.3}/{r:.3}/{f:.2})", got.0, got.1, got.2));
    }
    let truncated = expected.iter().all(|&(script, p, r, _)| {
        let s = prf[&script];
        (truncate_to(s.precision, 3), truncate_to(s.recall, 3)) == (p, r)
    });
    detail.push(format!("truncating P/R to 3 decimals {} the table", if truncated { "matches" } else { "does not match" }));
    ensure(ok, detail.join("; "))
}

fn f_reproduction() -> Outcome {
    let best = AreaTally { intersection: 8170, detected: 9500, ground_truth: 8600 }.score().map_err(|e| e.to_string())?;
    let ssd = AreaTally { intersection: 6314, detected: 7700, ground_truth: 8200 }.score().map_err(|e| e.to_string())?;
    let (b, s) = (round_to(best.f_measure, 2), round_to(ssd.f_measure, 2));
    let detail = format!(
        "P {:.2} R {:.2} -> F {b:.2}; P {:.2} R {:.2} -> F {:.4} = {s:.2} (table prints 0.80)",
        best.precision, best.recall, ssd.precision, ssd.recall, ssd.f_measure
    );
    ensure(b == 0.90 && (0.79..=0.80).contains(&s), detail)
}

fn geometry_oracle() -> Outcome {
    let mismatches: usize = (0..1000u64)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (nd, ng) = (rng.random_range(0..=50), rng.random_range(0..=50));
            let dets = random_rects(&mut rng, nd, 2000, 2000);
            let gt = random_rects(&mut rng, ng, 2000, 2000);
            let (dr, gr) = (RectRegion::new(dets.clone()), RectRegion::new(gt.clone()));
            let (md, mg) = (Mask::from_rects(&dets, 2000, 2000), Mask::from_rects(&gt, 2000, 2000));
            let t = frame_tally(&dr, &gr);
            let want = (md.and_count(&mg), md.count(), mg.count());
            let agree = union_area(&dr) == want.1
                && union_area(&gr) == want.2
                && region_intersection_area(&dr, &gr) == want.0
                && (t.intersection, t.detected, t.ground_truth) == want;
            usize::from(!agree)
        })
        .sum();
    ensure(mismatches == 0, format!("1000 frames, up to 50+50 rects, coordinates < 2000: {mismatches} mismatches"))
}

fn perturbation_outcomes() -> Outcome {
    let mut failures = Vec::new();
    for seed in 0..100 {
        let ds = generate_dataset(&SyntheticSpec::small(seed));
        let score = |p| evaluate_detection(&perturb_ground_truth(&ds, p, seed, DetectionMode::DetectOnly), &ds);
        let (exact, dilate, erode) =
            match (score(Perturbation::Exact), score(Perturbation::Dilate(5)), score(Perturbation::Erode(2))) {
                (Ok(a), Ok(b), Ok(c)) => (a, b, c),
                _ => return Err(format!("fixture {seed} did not evaluate")),
            };
        if (exact.precision, exact.recall, exact.f_measure) != (1.0, 1.0, 1.0)
            || !(dilate.recall == 1.0 && dilate.precision < 1.0)
            || !(erode.precision == 1.0 && erode.recall < 1.0)
        {
            failures.push(seed);
        }
    }
    ensure(failures.is_empty(), format!("100 fixtures, exact/dilate 5/erode 2; failing seeds {failures:?}"))
}

fn anchor_suite() -> Outcome {
    let shapes = generate_anchor_shapes(&AnchorConfig::default()).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0i64;
    for _ in 0..10_000 {
        let mut r = || Rect::new(rng.random_range(0..4000), rng.random_range(0..4000), rng.random_range(1..1500), rng.random_range(1..400));
        let (anchor, gt) = (r(), r());
        let back = decode_box(&anchor, &encode_box(&anchor, &gt)).map_err(|e| e.to_string())?;
        let err = [back.x - gt.x, back.y - gt.y, back.right() - gt.right(), back.bottom() - gt.bottom()].map(i64::abs);
        worst = worst.max(*err.iter().max().unwrap());
    }
    let mut disagreements = 0;
    for _ in 0..500 {
        let (na, ng) = (rng.random_range(1..300), rng.random_range(1..8));
        let anchors = random_rects(&mut rng, na, 600, 200);
        let gt = random_rects(&mut rng, ng, 600, 150);
        let got = assign_anchors(&anchors, &gt, 0.5, 0.3);
        let want = oracle_assign(&anchors, &gt, 0.5, 0.3);
        let same = got.iter().zip(&want).all(|(g, w)| {
            let label = match g.label {
                AnchorLabel::Positive => OracleLabel::Positive,
                AnchorLabel::Negative => OracleLabel::Negative,
                AnchorLabel::Ignore => OracleLabel::Ignore,
            };
            label == w.label && g.matched_gt == w.matched_gt
        });
        disagreements += usize::from(!same || got.len() != want.len());
    }
    let detail = format!(
        "{} default shapes; 10000 round-trips, worst corner error {worst} px; 500 scenes, {disagreements} disagreements",
        shapes.len()
    );
    ensure(shapes.len() == 15 && worst < 1 && disagreements == 0, detail)
}

fn scale_invariance() -> Outcome {
    let mut worst_continuous = 0f64;
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (nd, ng) = (rng.random_range(1..20), rng.random_range(1..20));
        let dets = random_rects(&mut rng, nd, 900, 300);
        let gt = random_rects(&mut rng, ng, 900, 300);
        let at = |f: f64, rs: &[Rect]| rs.iter().map(|r| r.to_continuous().scale(f, f)).collect::<Vec<_>>();
        let base = continuous_frame_tally(&at(1.0, &dets), &at(1.0, &gt)).score().map_err(|e| e.to_string())?;
        for f in [1e-3, 0.28, std::f64::consts::PI, 2.14, 1e3] {
            let s = continuous_frame_tally(&at(f, &dets), &at(f, &gt)).score().map_err(|e| e.to_string())?;
            for (a, b) in [(base.precision, s.precision), (base.recall, s.recall), (base.f_measure, s.f_measure)] {
                worst_continuous = worst_continuous.max((a - b).abs());
            }
        }
    }

    let mut worst_rounded = 0f64;
    let mut worst_case = String::new();
    for seed in 0..10 {
        let ds = generate_dataset(&SyntheticSpec::small(seed));
        for p in [Perturbation::Exact, Perturbation::Dilate(3), Perturbation::Shift(3)] {
            let dets = perturb_ground_truth(&ds, p, seed, DetectionMode::DetectOnly);
            let base = evaluate_detection(&dets, &ds).map_err(|e| e.to_string())?.f_measure;
            let sweep = |c| {
                resolution_sweep(&ds, SweepDetections::Rescale(&dets), &STANDARD_RESOLUTIONS, c).map_err(|e| e.to_string())
            };
            for pt in sweep(Coordinates::Continuous)? {
                worst_continuous = worst_continuous.max((pt.score.f_measure - base).abs());
            }
            for pt in sweep(Coordinates::Rounded)? {
                let drift = (pt.score.f_measure - base).abs() / base;
                if drift > worst_rounded {
                    worst_rounded = drift;
                    worst_case = format!("{p:?} at {}", pt.param);
                }
            }
        }
    }
    let detail = format!(
        "continuous max deviation {worst_continuous:.1e}; rounded max relative F drift {:.2}% ({worst_case})",
        100.0 * worst_rounded
    );
    ensure(worst_continuous <= 1e-9 && worst_rounded <= 0.02, detail)
}

fn format_round_trips() -> Outcome {
    let spec = SyntheticSpec { channels: vec![ChannelSpec::new("ary", 5, 50, 160, 90)], ..SyntheticSpec::small(12) };
    let ds = generate_dataset(&spec);
    let mut xml_failures = 0;
    for frame in &ds.frames {
        let xml = write_frame_annotation(frame);
        match parse_frame_annotation(&xml) {
            Ok(parsed) if &parsed == frame && write_frame_annotation(&parsed) == xml => {}
            _ => xml_failures += 1,
        }
    }
    let wrong: Vec<&str> = MALFORMED
        .iter()
        .filter(|(_, text, kind)| parse_detections_str(text).err().and_then(|e| e.kind()) != Some(*kind))
        .map(|(name, _, _)| *name)
        .collect();
    let detail =
        format!("{} XML frames, {xml_failures} failures; 10 malformed detection files, misclassified {wrong:?}", ds.len());
    ensure(ds.len() == 50 && xml_failures == 0 && wrong.is_empty(), detail)
}

fn aggregation_law() -> Outcome {
    let mut failures = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frames = rng.random_range(1..10);
        let mut tallies = Vec::new();
        let (mut all_d, mut all_g) = (Vec::new(), Vec::new());
        for i in 0..frames {
            let (nd, ng) = (rng.random_range(0..15), rng.random_range(1..15));
            let d = random_rects(&mut rng, nd, 500, 200);
            let g = random_rects(&mut rng, ng, 500, 200);
            tallies.push(frame_tally(&RectRegion::new(d.clone()), &RectRegion::new(g.clone())));
            let dx = 600 * i as i64;
            all_d.extend(d.iter().map(|r| r.translate(dx, 0)));
            all_g.extend(g.iter().map(|r| r.translate(dx, 0)));
        }
        let joined = frame_tally(&RectRegion::new(all_d.clone()), &RectRegion::new(all_g.clone()));
        let same = tallies.iter().copied().sum::<AreaTally>() == joined
            && aggregate(&tallies).ok() == joined.score().ok()
            && joined.intersection == raster_intersection(&all_d, &all_g)
            && joined.detected == raster_union(&all_d);
        failures += usize::from(!same);
    }
    ensure(failures == 0, format!("100 multi-frame fixtures, {failures} differ"))
}

fn main() {
    let criteria = [
        Criterion { name: "script-id reproduction", budget: Some(Duration::from_secs(1)), check: script_id },
        Criterion { name: "f-measure reproduction", budget: Some(Duration::from_secs(1)), check: f_reproduction },
        Criterion { name: "geometry oracle", budget: Some(Duration::from_secs(60)), check: geometry_oracle },
        Criterion { name: "perturbation outcomes", budget: None, check: perturbation_outcomes },
        Criterion { name: "anchor suite", budget: None, check: anchor_suite },
        Criterion { name: "scale invariance", budget: None, check: scale_invariance },
        Criterion { name: "format round-trips", budget: None, check: format_round_trips },
        Criterion { name: "aggregation law", budget: None, check: aggregation_law },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.check)();
        let elapsed = start.elapsed();
        let (status, detail) = match (outcome, c.budget.filter(|b| elapsed > *b)) {
            (Ok(d), None) => ("PASS", d),
            (Ok(d), Some(b)) => ("FAIL", format!("{d}; exceeded {b:?}")),
            (Err(d), _) => ("FAIL", d),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("{status} {:<24} {:>8.3}s  {detail}", c.name, elapsed.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
