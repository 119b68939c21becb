use artikit_core::estimator::{estimate_joints, EstimateConfig};
use artikit_core::metrics::{evaluate_scene, DEFAULT_THRESHOLDS};
use artikit_core::seeds::SeedFilterConfig;
use artikit_core::sim::{
    camera_for_scene, generate_object, render_state_pair, NoiseConfig, ALL_CATEGORIES,
};

#[test]
#[ignore]
fn census() {
    let cfg = EstimateConfig::default();
    let filter = SeedFilterConfig::default();
    let noise = NoiseConfig::default();
    for category in ALL_CATEGORIES {
        let mut ok = 0;
        let mut lines = Vec::new();
        for seed in 0..40u64 {
            let object = generate_object(category, seed).unwrap();
            let camera = camera_for_scene(&object, category, seed, 144, 144).unwrap();
            let (p0, p1) = render_state_pair(&object, &camera, &noise, seed).unwrap();
            let result = estimate_joints(&p0, &p1, &cfg, &filter).unwrap();
            let preds: Vec<_> = result.hypotheses.iter().map(|h| h.joint.clone()).collect();
            let scale = object.bbox_diagonal;
            let eval = evaluate_scene(&object.joints(), &preds, scale, &DEFAULT_THRESHOLDS).unwrap();
            if eval.outcomes.iter().all(|o| o.success) {
                ok += 1;
            } else {
                let d = &result.diagnostics;
                lines.push(format!(
                    "  seed {seed}: cands {} adj {} filt {} clus {} hyps {}",
                    d.candidates,
                    d.adjusted,
                    d.filtered,
                    d.clusters,
                    preds.len()
                ));
                for (gi, gt) in object.joints().iter().enumerate() {
                    let outcome = &eval.outcomes[gi];
                    match &outcome.errors {
                        Some(e) => lines.push(format!(
                            "    gt{gi} {:?} rng({:.2},{:.2}) o {:.3} a {:.3} d {:.3} r {:.3}{}",
                            gt.joint_type,
                            gt.range.0,
                            gt.range.1,
                            e.origin_err,
                            e.axis_angle,
                            e.direction_err,
                            e.range_err,
                            if outcome.success { " OK" } else { "" }
                        )),
                        None => lines.push(format!(
                            "    gt{gi} {:?} rng({:.2},{:.2}) UNMATCHED ({} hyps)",
                            gt.joint_type,
                            gt.range.0,
                            gt.range.1,
                            preds.len()
                        )),
                    }
                }
            }
        }
        println!("{category:?}: {ok}/40");
        for l in &lines {
            println!("{l}");
        }
    }
}

#[test]
#[ignore]
fn drawer_detail() {
    use artikit_core::sim::Category;
    let cfg = EstimateConfig::default();
    let filter = SeedFilterConfig::default();
    let noise = NoiseConfig::default();
    for seed in [26u64, 7, 0, 2] {
        let object = generate_object(Category::DrawerUnit, seed).unwrap();
        let camera = camera_for_scene(&object, Category::DrawerUnit, seed, 144, 144).unwrap();
        let (p0, p1) = render_state_pair(&object, &camera, &noise, seed).unwrap();
        let result = estimate_joints(&p0, &p1, &cfg, &filter).unwrap();
        println!("seed {seed} scale {:.3}", object.bbox_diagonal);
        for (i, gt) in object.joints().iter().enumerate() {
            println!(
                "  gt{i} {:?} origin ({:.3},{:.3},{:.3}) axis ({:.2},{:.2},{:.2}) rng({:.3},{:.3})",
                gt.joint_type, gt.origin.x, gt.origin.y, gt.origin.z,
                gt.axis.x, gt.axis.y, gt.axis.z, gt.range.0, gt.range.1
            );
        }
        for (i, h) in result.hypotheses.iter().enumerate() {
            println!(
                "  hyp{i} {:?} origin ({:.3},{:.3},{:.3}) axis ({:.2},{:.2},{:.2}) rng({:.3},{:.3}) conf {:.2} support {}",
                h.joint.joint_type, h.joint.origin.x, h.joint.origin.y, h.joint.origin.z,
                h.joint.axis.x, h.joint.axis.y, h.joint.axis.z,
                h.joint.range.0, h.joint.range.1, h.confidence, h.support
            );
        }
    }
}

#[test]
#[ignore]
fn laptop_detail() {
    use artikit_core::sim::Category;
    let cfg = EstimateConfig::default();
    let filter = SeedFilterConfig::default();
    let noise = NoiseConfig::default();
    for seed in [2u64, 10, 13, 30] {
        let object = generate_object(Category::LaptopLid, seed).unwrap();
        let camera = camera_for_scene(&object, Category::LaptopLid, seed, 144, 144).unwrap();
        let (p0, p1) = render_state_pair(&object, &camera, &noise, seed).unwrap();
        let result = estimate_joints(&p0, &p1, &cfg, &filter).unwrap();
        println!("seed {seed} scale {:.3}", object.bbox_diagonal);
        let d = &result.diagnostics;
        println!(
            "  cands {} adj {} filt {} clus {}",
            d.candidates, d.adjusted, d.filtered, d.clusters
        );
        for (i, gt) in object.joints().iter().enumerate() {
            println!(
                "  gt{i} {:?} origin ({:.3},{:.3},{:.3}) axis ({:.2},{:.2},{:.2}) rng({:.3},{:.3})",
                gt.joint_type, gt.origin.x, gt.origin.y, gt.origin.z,
                gt.axis.x, gt.axis.y, gt.axis.z, gt.range.0, gt.range.1
            );
        }
        for (i, h) in result.hypotheses.iter().enumerate() {
            println!(
                "  hyp{i} {:?} origin ({:.3},{:.3},{:.3}) axis ({:.2},{:.2},{:.2}) rng({:.3},{:.3}) conf {:.2} support {}",
                h.joint.joint_type, h.joint.origin.x, h.joint.origin.y, h.joint.origin.z,
                h.joint.axis.x, h.joint.axis.y, h.joint.axis.z,
                h.joint.range.0, h.joint.range.1, h.confidence, h.support
            );
        }
    }
}

#[test]
#[ignore]
fn slide_check() {
    use artikit_core::sim::Category;
    for seed in [0u64, 7, 26, 2, 8, 13] {
        let object = generate_object(Category::DrawerUnit, seed).unwrap();
        let slides: Vec<String> =
            object.joints().iter().map(|j| format!("{:.6}", j.range.1)).collect();
        println!("seed {seed}: {}", slides.join(" "));
    }
}

#[test]
#[ignore]
fn rng_probe() {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    fn salt(name: &str) -> u64 {
        name.bytes()
            .fold(0xcbf29ce484222325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100000001b3))
    }
    for seed in [0u64, 7, 26] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ salt("drawer_unit"));
        let n = rng.gen_range(1..=3usize);
        let wo = rng.gen_range(0.50..0.70);
        let d = rng.gen_range(0.35..0.50);
        let oh = rng.gen_range(0.18..0.24);
        let gap = rng.gen_range(0.05..0.08);
        let us: Vec<String> =
            (0..n).map(|_| format!("{:.6}", rng.gen_range(0.3..0.9))).collect();
        println!(
            "seed {seed}: n {n} wo {wo:.3} d {d:.3} oh {oh:.3} gap {gap:.3} u: {}",
            us.join(" ")
        );
    }
}

#[test]
#[ignore]
fn rng_probe2() {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    for seed in [0u64, 1, 2, 42] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let us: Vec<String> =
            (0..8).map(|_| format!("{:.6}", rng.gen_range(0.3..0.9))).collect();
        println!("raw {seed}: {}", us.join(" "));
    }
    // Same but via sample_iter-style repeated range construction vs reuse.
    use rand::distributions::{Distribution, Uniform};
    let dist = Uniform::new(0.3, 0.9);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let us: Vec<String> = (0..8).map(|_| format!("{:.6}", dist.sample(&mut rng))).collect();
    println!("dist 0: {}", us.join(" "));
}

#[test]
#[ignore]
fn cabinet_detail() {
    use artikit_core::sim::Category;
    let cfg = EstimateConfig::default();
    let filter = SeedFilterConfig::default();
    let noise = NoiseConfig::default();
    for seed in [1u64, 2, 3] {
        let object = generate_object(Category::CabinetDoor, seed).unwrap();
        let camera = camera_for_scene(&object, Category::CabinetDoor, seed, 144, 144).unwrap();
        let (p0, p1) = render_state_pair(&object, &camera, &noise, seed).unwrap();
        let result = estimate_joints(&p0, &p1, &cfg, &filter).unwrap();
        let gt = &object.joints()[0];
        println!(
            "seed {seed} gt {:?} origin ({:.3},{:.3},{:.3}) axis ({:.2},{:.2},{:.2}) rng({:.1},{:.1})deg",
            gt.joint_type, gt.origin.x, gt.origin.y, gt.origin.z,
            gt.axis.x, gt.axis.y, gt.axis.z,
            gt.range.0.to_degrees(), gt.range.1.to_degrees()
        );
        for (i, h) in result.hypotheses.iter().enumerate() {
            println!(
                "  hyp{i} {:?} origin ({:.3},{:.3},{:.3}) axis ({:.2},{:.2},{:.2}) rng({:.1},{:.1})deg conf {:.2} support {}",
                h.joint.joint_type, h.joint.origin.x, h.joint.origin.y, h.joint.origin.z,
                h.joint.axis.x, h.joint.axis.y, h.joint.axis.z,
                h.joint.range.0.to_degrees(), h.joint.range.1.to_degrees(),
                h.confidence, h.support
            );
        }
    }
}

#[test]
#[ignore]
fn pool_probe() {
    use artikit_core::estimator::appeared_points;
    use artikit_core::seeds::estimate_camera_center;
    use artikit_core::sim::Category;
    let noise = NoiseConfig::default();
    for (cat, seed) in [
        (Category::DrawerUnit, 26u64),
        (Category::DrawerUnit, 7),
        (Category::CabinetDoor, 1),
        (Category::LaptopLid, 0),
    ] {
        let object = generate_object(cat, seed).unwrap();
        let camera = camera_for_scene(&object, cat, seed, 144, 144).unwrap();
        let (p0, p1) = render_state_pair(&object, &camera, &noise, seed).unwrap();
        let scale = object.bbox_diagonal;
        match estimate_camera_center(&p0, &p1, scale) {
            Some(cam) => {
                let pts = appeared_points(&p0, &p1, &cam, scale);
                println!(
                    "{cat:?} {seed}: cam ({:.2},{:.2},{:.2}) true ({:.2},{:.2},{:.2}) appeared {}",
                    cam.x, cam.y, cam.z,
                    camera.position.x, camera.position.y, camera.position.z,
                    pts.len()
                );
            }
            None => println!("{cat:?} {seed}: NO CAMERA"),
        }
    }
}
