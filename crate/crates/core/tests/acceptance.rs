//! End-to-end acceptance gate. Each test covers one criterion and prints a
//! single PASS line on success; tolerances are pinned as constants here.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smocked::{
    alternating_intervals, ball_net_with_points, crossing_bound, d_k_exact, escaping_interval,
    euclidean_stand_in, gh_exact_small, gh_lower, gh_upper, integrate, local_constants_report,
    pgh_curve, preimage_radius, pseudometric, shrinking_ball, smocked_distance,
    stable_norm_estimate, validate_pattern, AxisBox, FiniteMetricSpace, Method, NormSpec, Point,
    Shape, SmockedSpace, SmockingPattern, SpacePoint, Stabilization, TestFunction,
};
use std::time::Instant;

const EXACT_TOL: f64 = 1e-12;
const METRIC_TOL: f64 = 1e-9;

fn pt(coords: &[f64]) -> Point {
    Point::new(coords.to_vec())
}

fn pass(n: u32, msg: &str) {
    println!("criterion {n}: PASS - {msg}");
}

/// Random pattern in dimension 1 or 2 with up to 5 mixed-shape stitches,
/// pairwise separated by at least 0.3 (rejection sampling).
fn random_pattern(rng: &mut ChaCha8Rng) -> SmockingPattern {
    let dim = rng.gen_range(1..=2usize);
    let window = AxisBox::new(pt(&vec![-6.0; dim]), pt(&vec![6.0; dim])).unwrap();
    'outer: loop {
        let n = rng.gen_range(1..=5usize);
        let mut shapes: Vec<Shape> = Vec::with_capacity(n);
        for _ in 0..n {
            let c: Vec<f64> = (0..dim).map(|_| rng.gen_range(-4.0..4.0)).collect();
            let shape = match rng.gen_range(0..4) {
                0 => Shape::Ball { center: pt(&c), radius: rng.gen_range(0.1..0.6) },
                1 => {
                    let half: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.1..0.6)).collect();
                    Shape::Box(
                        AxisBox::new(
                            pt(&c.iter().zip(&half).map(|(a, h)| a - h).collect::<Vec<_>>()),
                            pt(&c.iter().zip(&half).map(|(a, h)| a + h).collect::<Vec<_>>()),
                        )
                        .unwrap(),
                    )
                }
                2 => {
                    let d: Vec<f64> = (0..dim).map(|_| rng.gen_range(-0.8..0.8)).collect();
                    Shape::Segment {
                        a: pt(&c),
                        b: pt(&c.iter().zip(&d).map(|(a, v)| a + v).collect::<Vec<_>>()),
                    }
                }
                _ => Shape::Cloud { points: vec![pt(&c)] },
            };
            shapes.push(shape);
        }
        match validate_pattern(shapes, window.clone()) {
            Ok(p) if p.stitches.len() == 1 || p.delta >= 0.3 => return p,
            _ => continue 'outer,
        }
    }
}

fn random_free_point(rng: &mut ChaCha8Rng, space: &SmockedSpace) -> SpacePoint {
    let dim = space.pattern.dimension;
    loop {
        let p = pt(&(0..dim).map(|_| rng.gen_range(-5.0..5.0)).collect::<Vec<_>>());
        if let Ok(sp @ SpacePoint::Free(_)) = smocked::project(&space.pattern, &p) {
            return sp;
        }
    }
}

#[test]
fn criterion_01_alternating_endpoint_distances() {
    let start = Instant::now();
    let mut values = Vec::new();
    for k in 1..=8u32 {
        let fam = alternating_intervals(k).unwrap();
        let space = SmockedSpace::with_origin_base(fam.pattern).unwrap();
        let d = pseudometric(&space, &pt(&[-1.0]), &pt(&[1.0])).unwrap();
        assert!(
            (d - fam.expected_endpoint_distance).abs() <= EXACT_TOL,
            "k={k}: got {d}, want {}",
            fam.expected_endpoint_distance
        );
        values.push(d);
    }
    // exactly two accumulation points: 4/3 on odd k, 5/3 on even k
    for (i, v) in values.iter().enumerate() {
        let target = if (i + 1) % 2 == 1 { 4.0 / 3.0 } else { 5.0 / 3.0 };
        assert!((v - target).abs() <= EXACT_TOL);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    pass(1, "alternating-interval endpoint distances equal 2 - L_k to 1e-12 for k=1..8, accumulating at {4/3, 5/3}");
}

#[test]
fn criterion_02_shrinking_ball_gh_curve() {
    let start = Instant::now();
    let eps = 0.05;
    let radius = 2.0;
    let patterns: Vec<(u32, SmockingPattern)> =
        (2..=32).map(|k| (k, shrinking_ball(k, 1).unwrap())).collect();
    let limit = SmockedSpace::with_origin_base(euclidean_stand_in(1).unwrap()).unwrap();
    let rows = pgh_curve(&patterns, &limit, radius, eps, 2e7).unwrap();
    for row in &rows {
        assert!(
            row.gh_upper <= 4.0 / row.k as f64 + eps + 1e-9,
            "k={}: upper {} above 4/k + eps",
            row.k,
            row.gh_upper
        );
        assert!(row.gh_lower <= row.gh_upper + 1e-9);
    }
    // on the line every collapsed ball leaves the metric ball isometric to
    // an interval, so the measured values sit at net resolution for all k;
    // the meaningful claim is the decreasing envelope, checked above per k
    let last = rows.last().unwrap();
    assert_eq!(last.k, 32);
    assert!(last.gh_upper < 0.2, "upper at k=32 is {}", last.gh_upper);
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    pass(2, "shrinking-ball GH upper bounds stay below 4/k + eps for k=2..32 and drop under 0.2 at k=32");
}

#[test]
fn criterion_03_escaping_interval_locally_euclidean() {
    for k in 4..=8u32 {
        let pattern = escaping_interval(k).unwrap();
        assert!((pattern.l_max() - k as f64).abs() <= EXACT_TOL);
        let space = SmockedSpace::with_origin_base(pattern).unwrap();
        let (net, points) =
            ball_net_with_points(&space, &space.basepoint, 5.0, 0.5).unwrap();
        assert!(net.len() >= 10);
        let lifts: Vec<Point> = points
            .iter()
            .map(|p| match p {
                SpacePoint::Free(x) => x.clone(),
                SpacePoint::Collapsed(_) => panic!("stitch inside B_5 at k={k}"),
            })
            .collect();
        for i in 0..net.len() {
            for j in 0..net.len() {
                let euclid = lifts[i].dist(&lifts[j]);
                assert!(
                    (net.dist[i][j] - euclid).abs() <= EXACT_TOL,
                    "k={k}: net entry ({i},{j}) differs from Euclidean"
                );
            }
        }
    }
    pass(3, "escaping-interval B_5 nets carry exactly the Euclidean matrix for k=4..8 while stitch diameter k grows");
}

#[test]
fn criterion_04_engine_matches_path_enumeration_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..200 {
        let pattern = random_pattern(&mut rng);
        let space = SmockedSpace::with_origin_base(pattern).unwrap();
        let (v, w) = loop {
            let a = random_free_point(&mut rng, &space);
            let b = random_free_point(&mut rng, &space);
            if let (SpacePoint::Free(a), SpacePoint::Free(b)) = (a, b) {
                break (a, b);
            }
        };
        let engine = pseudometric(&space, &v, &w).unwrap();
        let d0 = v.dist(&w);
        let m = crossing_bound(d0, space.pattern.delta).unwrap();
        let kmax = m.min(space.pattern.stitches.len());
        let mut oracle = f64::INFINITY;
        for k in 0..=kmax {
            oracle = oracle.min(d_k_exact(&space, &v, &w, k).unwrap());
        }
        assert!(
            (engine - oracle).abs() <= METRIC_TOL,
            "trial {trial}: engine {engine} vs oracle {oracle}"
        );
    }
    pass(4, "distance engine equals exhaustive k-hop path enumeration to 1e-9 on 200 random patterns");
}

#[test]
fn criterion_05_metric_axioms_and_refinement() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut triples = 0usize;
    while triples < 1000 {
        let pattern = random_pattern(&mut rng);
        let space = SmockedSpace::with_origin_base(pattern.clone()).unwrap();
        for _ in 0..10 {
            let a = random_free_point(&mut rng, &space);
            let b = random_free_point(&mut rng, &space);
            let c = random_free_point(&mut rng, &space);
            let dab = smocked_distance(&space, &a, &b).unwrap();
            let dbc = smocked_distance(&space, &b, &c).unwrap();
            let dac = smocked_distance(&space, &a, &c).unwrap();
            assert!(dac <= dab + dbc + METRIC_TOL, "triangle violated");
            if let (SpacePoint::Free(pa), SpacePoint::Free(pb)) = (&a, &b) {
                assert!(dab <= pa.dist(pb) + METRIC_TOL, "expansion over Euclidean");
            }
            // refinement: adding the remaining stitches back never
            // increases the distance measured in the one-stitch subpattern
            if pattern.stitches.len() >= 2 {
                let sub = validate_pattern(
                    vec![pattern.stitches[0].shape.clone()],
                    pattern.window.clone(),
                )
                .unwrap();
                let sub_space = SmockedSpace::with_origin_base(sub).unwrap();
                if let (SpacePoint::Free(pa), SpacePoint::Free(pb)) = (&a, &b) {
                    let coarse = pseudometric(&sub_space, pa, pb).unwrap();
                    let fine = pseudometric(&space, pa, pb).unwrap();
                    assert!(fine <= coarse + METRIC_TOL, "refinement increased distance");
                }
            }
            triples += 1;
        }
    }
    pass(5, "triangle inequality, Euclidean contraction, and refinement monotonicity hold on 1000 random triples");
}

fn two_point_space(gap: f64) -> FiniteMetricSpace {
    FiniteMetricSpace::new(
        vec!["a".into(), "b".into()],
        vec![vec![0.0, gap], vec![gap, 0.0]],
        0,
    )
    .unwrap()
}

fn random_point_space(rng: &mut ChaCha8Rng, n: usize) -> FiniteMetricSpace {
    let points: Vec<Point> = (0..n)
        .map(|_| pt(&[rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)]))
        .collect();
    let dist: Vec<Vec<f64>> = points
        .iter()
        .map(|p| points.iter().map(|q| p.dist(q)).collect())
        .collect();
    FiniteMetricSpace::new((0..n).map(|i| format!("p{i}")).collect(), dist, 0).unwrap()
}

#[test]
fn criterion_06_gh_solver_closed_forms_and_brackets() {
    let gaps = [0.5, 1.0, 2.0, 3.0];
    for &a in &gaps {
        for &b in &gaps {
            let d = gh_exact_small(&two_point_space(a), &two_point_space(b), None).unwrap();
            assert_eq!(d, (a - b).abs() / 2.0, "two-point gap pair ({a},{b})");
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5150);
    for _ in 0..100 {
        let nx = rng.gen_range(2..=4);
        let ny = rng.gen_range(2..=4);
        let x = random_point_space(&mut rng, nx);
        let y = random_point_space(&mut rng, ny);
        let exact = gh_exact_small(&x, &y, None).unwrap();
        assert!(gh_lower(&x, &y) <= exact + METRIC_TOL);
        assert!(exact <= gh_upper(&x, &y) + METRIC_TOL);
        let lambda = rng.gen_range(0.5..4.0);
        let scaled = gh_exact_small(&x.scale(lambda), &y.scale(lambda), None).unwrap();
        assert!((scaled - lambda * exact).abs() <= METRIC_TOL, "scaling broke");
    }
    pass(6, "exact GH solver matches the two-point closed form, sits inside its brackets, and scales linearly");
}

#[test]
fn criterion_07_crossing_and_preimage_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    // polylines of bounded length never meet more stitches than the
    // separation argument allows
    for _ in 0..500 {
        let pattern = random_pattern(&mut rng);
        if !pattern.delta.is_finite() {
            continue;
        }
        let dim = pattern.dimension;
        let mut waypoints = vec![pt(&(0..dim)
            .map(|_| rng.gen_range(-5.0..5.0))
            .collect::<Vec<_>>())];
        for _ in 0..rng.gen_range(1..=4usize) {
            let prev = waypoints.last().unwrap().clone();
            let step: Vec<f64> = (0..dim)
                .map(|i| (prev.coords[i] + rng.gen_range(-1.5..1.5)).clamp(-5.5, 5.5))
                .collect();
            waypoints.push(pt(&step));
        }
        let mut length = 0.0;
        for w in waypoints.windows(2) {
            length += w[0].dist(&w[1]);
        }
        let bound = crossing_bound(length, pattern.delta).unwrap();
        let mut met = 0usize;
        for s in &pattern.stitches {
            let touches = waypoints.windows(2).any(|w| {
                let seg = Shape::Segment { a: w[0].clone(), b: w[1].clone() };
                smocked::dist_shape_shape(&seg, &s.shape).unwrap() <= 1e-12
            });
            if touches {
                met += 1;
            }
        }
        assert!(met <= bound, "polyline of length {length} met {met} > {bound} stitches");
    }
    // every point of a metric r-ball lifts within the certified Euclidean
    // radius R(r) of the center lift
    let mut checked = 0usize;
    while checked < 10_000 {
        let pattern = random_pattern(&mut rng);
        let space = SmockedSpace::with_origin_base(pattern).unwrap();
        let r = rng.gen_range(0.5..3.0);
        let l = space.pattern.l_max();
        let big_r = if l == 0.0 { r } else { preimage_radius(r, l, space.pattern.delta).unwrap() };
        let origin = pt(&vec![0.0; space.pattern.dimension]);
        for _ in 0..40 {
            let sp = random_free_point(&mut rng, &space);
            let d = smocked_distance(&space, &space.basepoint, &sp).unwrap();
            if d < r {
                if let SpacePoint::Free(p) = &sp {
                    assert!(
                        p.dist(&origin) <= big_r + METRIC_TOL,
                        "lift escaped certified radius"
                    );
                }
            }
            checked += 1;
        }
    }
    pass(7, "crossing bound held on 500 random polylines and 10000 ball samples lift within the certified radius");
}

#[test]
fn criterion_08_stable_norm_estimates() {
    let start = Instant::now();
    let one = num_rational::Rational64::from_integer(1);
    let x = vec![one, one];
    let l1 = NormSpec::from_half(2, &[(vec![1, 0], 1.0), (vec![0, 1], 1.0)]).unwrap();
    for lambda in [1u32, 2, 4, 8, 16, 32] {
        let est = stable_norm_estimate(&l1, &x, lambda).unwrap();
        assert_eq!(est, 2.0, "taxicab estimate drifted at lambda={lambda}");
    }
    let mixed = NormSpec::from_half(
        2,
        &[(vec![1, 0], 1.0), (vec![0, 1], 1.0), (vec![1, 1], 1.5)],
    )
    .unwrap();
    for lambda in [1u32, 2, 4, 8, 16, 32] {
        let est = stable_norm_estimate(&mixed, &x, lambda).unwrap();
        assert!(
            (est - 1.5).abs() <= 3.0 / lambda as f64 + EXACT_TOL,
            "lambda={lambda}: estimate {est}"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    pass(8, "scaled word-metric estimates hit the taxicab norm exactly and approach the mixed norm at rate 3/lambda");
}

#[test]
fn criterion_09_pushforward_integrals_track_lebesgue() {
    let bumps: Vec<TestFunction> = vec![
        TestFunction::Bump { center: pt(&[0.0, 0.0]), radius: 1.5 },
        TestFunction::Bump { center: pt(&[0.4, 0.0]), radius: 1.0 },
        TestFunction::Bump { center: pt(&[0.0, -0.3]), radius: 1.2 },
        TestFunction::Bump { center: pt(&[0.8, 0.8]), radius: 0.9 },
        TestFunction::Bump { center: pt(&[-1.0, 0.5]), radius: 1.4 },
    ];
    let support = AxisBox::new(pt(&[-4.0, -4.0]), pt(&[4.0, 4.0])).unwrap();
    let method = Method::MonteCarlo { seed: 90210, samples: 400_000 };
    let limit = SmockedSpace::with_origin_base(euclidean_stand_in(2).unwrap()).unwrap();
    let mut first_run = Vec::new();
    for k in [2u32, 4, 8, 16] {
        let space = SmockedSpace::with_origin_base(shrinking_ball(k, 2).unwrap()).unwrap();
        let atom = std::f64::consts::PI / (k as f64 * k as f64);
        for phi in &bumps {
            let est = integrate(&space, method, phi, &support).unwrap();
            let lebesgue = integrate(&limit, method, phi, &support).unwrap();
            let budget = atom + 3.0 * (est.error + lebesgue.error);
            assert!(
                (est.value - lebesgue.value).abs() <= budget,
                "k={k}: gap {} above budget {budget}",
                (est.value - lebesgue.value).abs()
            );
            first_run.push(est.value.to_bits());
        }
    }
    // identical seed reruns are byte-identical
    let mut second_run = Vec::new();
    for k in [2u32, 4, 8, 16] {
        let space = SmockedSpace::with_origin_base(shrinking_ball(k, 2).unwrap()).unwrap();
        for phi in &bumps {
            second_run.push(integrate(&space, method, phi, &support).unwrap().value.to_bits());
        }
    }
    assert_eq!(first_run, second_run, "fixed-seed rerun changed bits");
    pass(9, "pushforward bump integrals track planar Lebesgue within atom + 3 sigma for k in {2,4,8,16}, bit-reproducibly");
}

#[test]
fn criterion_10_stabilization_diagnostics() {
    println!(
        "note: statements quantified over all sequences are exercised through the \
         randomized property suites above; the diagnostics below classify the two \
         named families by their local constants"
    );
    let escaping: Vec<(u32, SmockingPattern)> =
        (2..=10).map(|k| (k, escaping_interval(k).unwrap())).collect();
    let report = local_constants_report(&escaping, 1.0).unwrap();
    assert_eq!(report.verdict, Stabilization::Stable, "{:?}", report.rows);
    let alternating: Vec<(u32, SmockingPattern)> = (1..=12)
        .map(|k| (k, alternating_intervals(k).unwrap().pattern))
        .collect();
    let report = local_constants_report(&alternating, 1.0).unwrap();
    assert_eq!(
        report.verdict,
        Stabilization::DegeneratingSeparation,
        "{:?}",
        report.rows
    );
    pass(10, "local-constants sweep reports stabilization for the escaping family and degenerating separation for the alternating family");
}
