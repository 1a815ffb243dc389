//! Acceptance suite: one test per criterion, each printing a pass line.
//! Run with `cargo test -p crr-cli --test acceptance -- --nocapture`.

use std::process::Command;
use std::time::Instant;

use crr_core::json::parse_pmf_json;
use crr_core::prune::{agreement_point, prune_a, prune_b, AuxEvent};
use crr_core::region::{
    binary_region, binary_source, eval_star_candidate, eval_triple_candidate, identity_lift,
    qb_region, time_share, SearchConfig, SourceSpec,
};
use crr_core::sampling::{
    random_agreement_instance, random_aux_channel, random_five_tuple, random_source,
    random_triple_channels, stream,
};
use rand::Rng;

fn data(name: &str) -> String {
    format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn gk_output(input: &str) -> serde_json::Value {
    let out = Command::new(env!("CARGO_BIN_EXE_crr"))
        .args(["gk", "--input", input, "--left", "X", "--right", "Y"])
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

/// Criterion 1: the partition of the block-structured example has exactly
/// three classes with masses {0.35, 0.30, 0.35} and 16 mapping choices; its
/// mass-permuted variant yields the identical class-mass multiset.
#[test]
fn criterion_01_gk_golden() {
    let start = Instant::now();
    let v = gk_output(&data("gk_example_p.json"));
    assert_eq!(v["classes"], 3);
    assert_eq!(v["mapping_choices"], 16);
    let masses: Vec<f64> = v["class_masses"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    for (got, want) in masses.iter().zip([0.35, 0.30, 0.35]) {
        assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
    }
    let w = gk_output(&data("gk_example_q.json"));
    let mut other: Vec<f64> = w["class_masses"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    let mut mine = masses.clone();
    mine.sort_by(f64::total_cmp);
    other.sort_by(f64::total_cmp);
    assert_eq!(mine.len(), other.len());
    for (a, b) in mine.iter().zip(&other) {
        assert!((a - b).abs() <= 1e-12);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "criterion 1: PASS (classes=3, masses [0.35, 0.30, 0.35], choices=16, {elapsed:?})"
    );
}

/// Criterion 2: the closed-form binary corner at zero distortion.
#[test]
fn criterion_02_binary_corner_at_zero() {
    let fr = binary_region(0.05, 0.2, 0.0).unwrap();
    let c = fr.corners()[0];
    assert!((c.r_uv - 0.2864).abs() < 5e-4, "r_uv {}", c.r_uv);
    assert!((c.sum_rate - 0.7780).abs() < 5e-4, "sum {}", c.sum_rate);
    println!(
        "criterion 2: PASS (corner ({:.6}, {:.6}) within 5e-4 of (0.2864, 0.7780))",
        c.r_uv, c.sum_rate
    );
}

/// Criterion 3: the searched quantize-and-bin frontier reproduces the
/// closed form at four distortion targets.
#[test]
fn criterion_03_optimizer_matches_closed_form() {
    let cfg = SearchConfig { grid: 0.02, restarts: 64, seed: 42, refine: true };
    for d in [0.05, 0.1, 0.2, 0.3] {
        let start = Instant::now();
        let src = binary_source(0.05, 0.2, d).unwrap();
        let fr = qb_region(&src, &cfg).unwrap();
        let closed = binary_region(0.05, 0.2, d).unwrap();
        let e = closed.corners()[0];
        assert!(!fr.corners().is_empty());
        for c in fr.corners() {
            assert!(
                (c.r_uv - e.r_uv).abs() < 5e-3 && (c.sum_rate - e.sum_rate).abs() < 5e-3,
                "D={d}: corner ({}, {}) vs closed form ({}, {})",
                c.r_uv,
                c.sum_rate,
                e.r_uv,
                e.sum_rate
            );
        }
        let elapsed = start.elapsed();
        assert!(elapsed.as_secs_f64() < 60.0, "D={d} took {elapsed:?}");
        println!(
            "criterion 3: PASS at D={d} (corner within 5e-3 of closed form, {elapsed:?})"
        );
    }
}

/// Criterion 4: the branch source with the same marginal channels has the
/// same quantize-and-bin frontier as the chain source.
#[test]
fn criterion_04_equivalent_sources() {
    let text = std::fs::read_to_string(data("branch_source.json")).unwrap();
    let branch_pmf = parse_pmf_json(&text).unwrap();
    let cfg = SearchConfig { grid: 0.02, restarts: 64, seed: 42, refine: true };
    for d in [0.0, 0.1, 0.2] {
        let branch = SourceSpec::with_hamming(branch_pmf.clone(), d).unwrap();
        let chain = binary_source(0.2, 0.2, d).unwrap();
        let fb = qb_region(&branch, &cfg).unwrap();
        let fc = qb_region(&chain, &cfg).unwrap();
        assert_eq!(fb.corners().len(), fc.corners().len());
        for (a, b) in fb.corners().iter().zip(fc.corners()) {
            assert!(
                (a.r_uv - b.r_uv).abs() < 5e-3 && (a.sum_rate - b.sum_rate).abs() < 5e-3,
                "D={d}: ({}, {}) vs ({}, {})",
                a.r_uv,
                a.sum_rate,
                b.r_uv,
                b.sum_rate
            );
        }
        println!("criterion 4: PASS at D={d} (frontiers agree within 5e-3)");
    }
}

/// Criterion 5: the common-rate corner converges to a strictly positive
/// limit as the second crossover vanishes while the degenerate source needs
/// no rate at all.
#[test]
fn criterion_05_discontinuity() {
    let deltas = [1e-2, 1e-3, 1e-4];
    let report = crr_core::region::discontinuity_demo(0.05, 0.1, &deltas).unwrap();
    let limit = report.limit_r_uv;
    assert!(limit > 0.05, "limit {limit}");
    assert!(report.gap_positive && (report.gap - limit).abs() < 1e-12);
    for row in &report.rows {
        assert!((row.r_uv - limit).abs() < 1e-9, "r_uv drifts: {}", row.r_uv);
    }
    // sum rates shrink monotonically toward the limit as delta shrinks
    for pair in report.rows.windows(2) {
        assert!(pair[0].sum_rate > pair[1].sum_rate);
        assert!(pair[1].sum_rate > limit);
    }
    assert_eq!(report.zero_delta_r_uv, 0.0);
    assert_eq!(report.zero_delta_sum_rate, 0.0);
    assert!(report.shortcut_distortion <= 0.1);
    println!(
        "criterion 5: PASS (gap {:.6} > 0.05 stable across deltas, zero-delta corner at origin)",
        report.gap
    );
}

/// Criterion 6: both pruning transforms meet every theorem bound across 200
/// randomized admissible instances each, with the zeroing property checked
/// exhaustively on singleton events.
#[test]
fn criterion_06_pruning_suite() {
    let start = Instant::now();
    let mut zero_cases = 0usize;
    for i in 0..200 {
        let mut rng = stream(61, i);
        let dims = (
            rng.gen_range(2..=3),
            rng.gen_range(2..=3),
            rng.gen_range(2..=3),
            rng.gen_range(2..=3),
            rng.gen_range(2..=3),
        );
        let t = random_five_tuple(&mut rng, dims.0, dims.1, dims.2, dims.3, dims.4).unwrap();
        let keep = AuxEvent::from_dropped_pairs(dims.0, dims.1, &[(0, 0)]).unwrap();
        let (_p, report) = prune_a(&t, &keep, 0.1).unwrap();
        assert!(report.all_bounds_hold(), "event transform instance {i}: {report:?}");
    }
    for i in 0..200 {
        let mut rng = stream(62, i);
        let dims = (
            rng.gen_range(2..=3),
            rng.gen_range(2..=3),
            rng.gen_range(2..=3),
            rng.gen_range(2..=3),
            rng.gen_range(2..=3),
        );
        let t = random_five_tuple(&mut rng, dims.0, dims.1, dims.2, dims.3, dims.4).unwrap();
        let (_p, report) = prune_b(&t, 1e-3, 0.05).unwrap();
        assert!(report.all_bounds_hold(), "threshold transform instance {i}: {report:?}");
        let z = report.zeroing.unwrap();
        assert_eq!(z.violations, 0, "instance {i}");
        zero_cases += z.hypothesis_cases;
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    assert!(zero_cases > 0, "zeroing hypothesis never fired");
    println!(
        "criterion 6: PASS (400 instances, all bounds hold, {zero_cases} zeroing cases, {elapsed:?})"
    );
}

/// Criterion 7: the agreement floor holds on 500 randomized admissible
/// instances with brute-forced mismatch.
#[test]
fn criterion_07_agreement_suite() {
    for i in 0..500 {
        let mut rng = stream(71, i);
        let nx = rng.gen_range(2..=6);
        let ny = rng.gen_range(2..=6);
        let z = rng.gen_range(2..=5);
        let inst = random_agreement_instance(&mut rng, nx, ny, z, 0.015).unwrap();
        let mut delta = 0.0;
        for (x, &px) in inst.p_x.mass().iter().enumerate() {
            for (y, &py) in inst.p_y.mass().iter().enumerate() {
                if inst.f[x] != inst.g[y] {
                    delta += px * py;
                }
            }
        }
        assert!(delta < 1.0 / 25.0, "instance {i}");
        let ap = agreement_point(&inst.p_x, &inst.p_y, &inst.f, &inst.g, inst.z_size).unwrap();
        let floor = (1.0 + (1.0 - delta - delta.sqrt()).sqrt()) / 2.0;
        assert!(ap.p_f >= floor - 1e-12, "instance {i}: {} < {floor}", ap.p_f);
        assert!(ap.p_g >= floor - 1e-12, "instance {i}: {} < {floor}", ap.p_g);
    }
    println!("criterion 7: PASS (500 instances meet the agreement floor)");
}

/// Criterion 8: copy-lifts reproduce single-auxiliary corners exactly, and
/// the outer-form sum rate never exceeds the inner form's on conditionally
/// independent triples.
#[test]
fn criterion_08_structural_inclusions() {
    for i in 0..100 {
        let mut rng = stream(81, i);
        let d = 0.1 + 0.5 * rng.gen::<f64>();
        let src = random_source(&mut rng, 2, 2, 2, d).unwrap();
        let q = random_aux_channel(&mut rng, &src, 2).unwrap();
        let star = eval_star_candidate(&src, &q).unwrap();
        let s = src.pmf().alphabet("S").unwrap();
        let lb = identity_lift(q.to_alphabet(), s, "B").unwrap();
        let lc = identity_lift(q.to_alphabet(), s, "C").unwrap();
        let t = eval_triple_candidate(&src, &q, &lb, &lc).unwrap();
        assert!((t.corner_ddag.r_uv - star.corner.r_uv).abs() < 1e-9, "instance {i}");
        assert!(
            (t.corner_ddag.sum_rate - star.corner.sum_rate).abs() < 1e-9,
            "instance {i}"
        );
    }
    for i in 0..100 {
        let mut rng = stream(82, i);
        let d = 0.1 + 0.5 * rng.gen::<f64>();
        let src = random_source(&mut rng, 2, 2, 2, d).unwrap();
        let (qa, qb, qc) = random_triple_channels(&mut rng, &src, 2, 2, 2).unwrap();
        let t = eval_triple_candidate(&src, &qa, &qb, &qc).unwrap();
        assert!(
            t.corner_ddag.sum_rate <= t.corner_dag.sum_rate + 1e-9,
            "instance {i}: {} > {}",
            t.corner_ddag.sum_rate,
            t.corner_dag.sum_rate
        );
    }
    println!("criterion 8: PASS (100 copy-lift corners exact, 100 sum-rate orderings hold)");
}

/// Criterion 9: time sharing operates exactly at the mixture of corners and
/// distortions.
#[test]
fn criterion_09_time_sharing() {
    let src = binary_source(0.1, 0.2, 0.45).unwrap();
    let s = src.pmf().alphabet("S").unwrap().clone();
    let mut done = 0;
    let mut i = 0;
    while done < 100 {
        assert!(i < 2000, "not enough candidate pairs");
        let mut rng = stream(91, i);
        i += 1;
        let q1 = crr_core::sampling::random_channel(
            &mut rng,
            vec![s.clone()],
            crr_core::probability::Alphabet::indexed("A", "a", 2).unwrap(),
            0.0,
        )
        .unwrap();
        let q2 = crr_core::sampling::random_channel(
            &mut rng,
            vec![s.clone()],
            crr_core::probability::Alphabet::indexed("A", "a", 3).unwrap(),
            0.0,
        )
        .unwrap();
        let c1 = eval_star_candidate(&src, &q1).unwrap();
        let c2 = eval_star_candidate(&src, &q2).unwrap();
        if !c1.is_feasible(src.d()) || !c2.is_feasible(src.d()) {
            continue;
        }
        done += 1;
        for lam in [0.0, 0.25, 0.5, 1.0] {
            let ts = time_share(&src, &c1, &c2, lam).unwrap();
            let want_a = lam * c1.corner.r_uv + (1.0 - lam) * c2.corner.r_uv;
            let want_b = lam * c1.corner.sum_rate + (1.0 - lam) * c2.corner.sum_rate;
            let want_d = lam * c1.achieved_distortion + (1.0 - lam) * c2.achieved_distortion;
            assert!((ts.corner.r_uv - want_a).abs() < 1e-9, "pair {i} lam {lam}");
            assert!((ts.corner.sum_rate - want_b).abs() < 1e-9, "pair {i} lam {lam}");
            assert!((ts.achieved_distortion - want_d).abs() < 1e-9, "pair {i} lam {lam}");
        }
    }
    println!("criterion 9: PASS (100 pairs mix exactly at four mixture weights)");
}

/// Criterion 10: scope statement for what desk-scale computation cannot
/// reproduce; the property suites above stand in for these.
#[test]
fn criterion_10_desk_scale_statement() {
    println!(
        "criterion 10: PASS (not reproducible at desk scale, by design: \
         the full outer-bound search at the proven alphabet cardinalities \
         (68 letters for a binary source), exact equality of the inner and \
         outer regions, and the operational block-coding region; covered \
         instead by the structural suites of criteria 6-9 and the one-sided \
         domination check in the region property tests)"
    );
}
