//! Generators for the named smocking pattern families used in the
//! convergence experiments.

use crate::euclid::{AxisBox, Point, Shape};
use crate::lattice::NormSpec;
use crate::space::{validate_pattern, Result, SmockingPattern};

/// A parameterized family of smocking patterns, indexed by a positive
/// integer k.
#[derive(Debug, Clone)]
pub enum FamilySpec {
    /// Alternating total collapsed length on [-1, 1]: Hausdorff-converging
    /// stitch unions whose smocked spaces do not converge.
    AlternatingIntervals,
    /// A single shrinking ball of radius 1/k about the origin in E^N.
    ShrinkingBall { dim: usize },
    /// A single escaping interval [k^2, k^2 + k] on the line.
    EscapingInterval,
    /// Balls of the given radius at the integer lattice points within
    /// sup-norm radius k; the discrete skeleton of the word-metric model.
    Lattice { spec: NormSpec, node_radius: f64 },
}

impl FamilySpec {
    pub fn pattern(&self, k: u32) -> Result<SmockingPattern> {
        match self {
            FamilySpec::AlternatingIntervals => Ok(alternating_intervals(k)?.pattern),
            FamilySpec::ShrinkingBall { dim } => shrinking_ball(k, *dim),
            FamilySpec::EscapingInterval => escaping_interval(k),
            FamilySpec::Lattice { spec, node_radius } => lattice_balls(spec, *node_radius, k),
        }
    }

    /// The declared limit pattern: the stitch collection of `X_infinity`,
    /// or `None` when no limit exists (the alternating family).
    pub fn limit_pattern(&self) -> Option<Result<SmockingPattern>> {
        match self {
            FamilySpec::AlternatingIntervals => None,
            // the limiting stitch is a single point, so the limit space is
            // Euclidean; model it with one far-away point stitch that no
            // bounded experiment reaches
            FamilySpec::ShrinkingBall { dim } => Some(euclidean_stand_in(*dim)),
            FamilySpec::EscapingInterval => Some(euclidean_stand_in(1)),
            FamilySpec::Lattice { .. } => None,
        }
    }
}

/// A pattern whose smocked space is isometric to Euclidean space on every
/// ball of radius below ~1e5: a single point stitch far outside reach.
pub fn euclidean_stand_in(dim: usize) -> Result<SmockingPattern> {
    let mut far = vec![0.0; dim];
    far[0] = 1e6;
    let mut max = vec![16.0; dim];
    max[0] = 1e6;
    let window = AxisBox::new(Point::new(vec![-16.0; dim]), Point::new(max)).unwrap();
    validate_pattern(vec![Shape::Cloud { points: vec![Point::new(far)] }], window)
}

/// The alternating-intervals pattern with its layout metadata.
#[derive(Debug, Clone)]
pub struct AlternatingIntervalsPattern {
    pub pattern: SmockingPattern,
    /// Total collapsed length: 2/3 for odd k, 1/3 for even k.
    pub l_k: f64,
    pub n_k: u32,
    /// Target gap bound 1/(N_k + 1).
    pub delta_k: f64,
    /// Exact smocked distance between pi(-1) and pi(1): 2 - L_k.
    pub expected_endpoint_distance: f64,
}

/// k disjoint closed subintervals of [-1, 1] of equal length L_k / k with
/// L_k alternating 2/3 (odd) and 1/3 (even), laid out symmetrically with a
/// half-gap at each end. The endpoint distance 2 - L_k is layout-independent.
pub fn alternating_intervals(k: u32) -> Result<AlternatingIntervalsPattern> {
    assert!(k >= 1);
    let l_k = if k % 2 == 0 { 1.0 / 3.0 } else { 2.0 / 3.0 };
    let stitch_len = l_k / k as f64;
    let gap = (2.0 - l_k) / k as f64;
    let mut stitches = Vec::with_capacity(k as usize);
    let mut cursor = -1.0 + gap / 2.0;
    for _ in 0..k {
        stitches.push(Shape::Box(
            AxisBox::new(Point::new(vec![cursor]), Point::new(vec![cursor + stitch_len])).unwrap(),
        ));
        cursor += stitch_len + gap;
    }
    let window = AxisBox::new(Point::new(vec![-2.0]), Point::new(vec![2.0])).unwrap();
    let pattern = validate_pattern(stitches, window)?;
    Ok(AlternatingIntervalsPattern {
        pattern,
        l_k,
        n_k: k,
        delta_k: 1.0 / (k as f64 + 1.0),
        expected_endpoint_distance: 2.0 - l_k,
    })
}

/// Single closed ball of radius 1/k about the origin in E^dim.
pub fn shrinking_ball(k: u32, dim: usize) -> Result<SmockingPattern> {
    assert!(k >= 1 && dim >= 1);
    let window = AxisBox::new(Point::new(vec![-8.0; dim]), Point::new(vec![8.0; dim])).unwrap();
    validate_pattern(
        vec![Shape::Ball { center: Point::origin(dim), radius: 1.0 / k as f64 }],
        window,
    )
}

/// Single interval stitch [k^2, k^2 + k] on the line.
pub fn escaping_interval(k: u32) -> Result<SmockingPattern> {
    assert!(k >= 1);
    let kk = k as f64;
    let window = AxisBox::new(
        Point::new(vec![-16.0]),
        Point::new(vec![kk * kk + kk + 1.0]),
    )
    .unwrap();
    validate_pattern(
        vec![Shape::Box(
            AxisBox::new(Point::new(vec![kk * kk]), Point::new(vec![kk * kk + kk])).unwrap(),
        )],
        window,
    )
}

/// Balls of `node_radius` at the lattice points of sup-norm radius k.
pub fn lattice_balls(spec: &NormSpec, node_radius: f64, k: u32) -> Result<SmockingPattern> {
    assert!(node_radius > 0.0 && node_radius < 0.5);
    let dim = spec.dimension;
    let r = k as i64;
    let mut stitches = Vec::new();
    let mut idx = vec![-r; dim];
    loop {
        stitches.push(Shape::Ball {
            center: Point::new(idx.iter().map(|&c| c as f64).collect()),
            radius: node_radius,
        });
        let mut axis = 0;
        loop {
            if axis == dim {
                let pad = k as f64 + 1.0;
                let window =
                    AxisBox::new(Point::new(vec![-pad; dim]), Point::new(vec![pad; dim])).unwrap();
                return validate_pattern(stitches, window);
            }
            idx[axis] += 1;
            if idx[axis] <= r {
                break;
            }
            idx[axis] = -r;
            axis += 1;
        }
    }
}
