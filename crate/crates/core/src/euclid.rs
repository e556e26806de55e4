//! Exact Euclidean set geometry: diameters, point-to-set and set-to-set
//! distances, and Hausdorff distance between finite unions of shapes.
//!
//! Distances between the supported shape pairs (ball/box/segment/point) are
//! closed-form except box-segment, which is resolved by convex minimization
//! along the segment parameter and is exact to machine precision.

use thiserror::Error;

/// Tolerance below which a computed set distance counts as "touching".
pub const CONTACT_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum EuclidError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("empty operand")]
    EmptySet,
    #[error("invalid shape: {0}")]
    InvalidShape(String),
}

pub type Result<T> = std::result::Result<T, EuclidError>;

/// A point of `E^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        debug_assert!(coords.iter().all(|c| c.is_finite()));
        Point { coords }
    }

    pub fn origin(dim: usize) -> Self {
        Point { coords: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn sub(&self, other: &Point) -> Vec<f64> {
        self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect()
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    fn lerp(a: &Point, b: &Point, t: f64) -> Point {
        Point::new(
            a.coords
                .iter()
                .zip(&b.coords)
                .map(|(x, y)| x + t * (y - x))
                .collect(),
        )
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Closed axis-aligned box, also used as the pattern window.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisBox {
    pub min: Point,
    pub max: Point,
}

impl AxisBox {
    pub fn new(min: Point, max: Point) -> Result<Self> {
        if min.dim() != max.dim() {
            return Err(EuclidError::DimensionMismatch(min.dim(), max.dim()));
        }
        if min.coords.iter().zip(&max.coords).any(|(a, b)| a > b) {
            return Err(EuclidError::InvalidShape("box min > max".into()));
        }
        Ok(AxisBox { min, max })
    }

    pub fn dim(&self) -> usize {
        self.min.dim()
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.coords
            .iter()
            .enumerate()
            .all(|(i, &c)| c >= self.min.coords[i] && c <= self.max.coords[i])
    }

    pub fn diagonal(&self) -> f64 {
        self.min.dist(&self.max)
    }

    pub fn volume(&self) -> f64 {
        self.min
            .coords
            .iter()
            .zip(&self.max.coords)
            .map(|(a, b)| b - a)
            .product()
    }

    /// Intersection with another box, `None` when disjoint.
    pub fn intersect(&self, other: &AxisBox) -> Option<AxisBox> {
        let min: Vec<f64> = self
            .min
            .coords
            .iter()
            .zip(&other.min.coords)
            .map(|(a, b)| a.max(*b))
            .collect();
        let max: Vec<f64> = self
            .max
            .coords
            .iter()
            .zip(&other.max.coords)
            .map(|(a, b)| a.min(*b))
            .collect();
        if min.iter().zip(&max).any(|(a, b)| a > b) {
            None
        } else {
            Some(AxisBox { min: Point::new(min), max: Point::new(max) })
        }
    }

    /// Axis grid over the box at the given spacing, inclusive of both faces.
    pub fn grid(&self, spacing: f64) -> Vec<Point> {
        assert!(spacing > 0.0);
        let dim = self.dim();
        let steps: Vec<usize> = (0..dim)
            .map(|i| ((self.max.coords[i] - self.min.coords[i]) / spacing).ceil() as usize)
            .collect();
        let total: usize = steps.iter().map(|s| s + 1).product();
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; dim];
        loop {
            let p: Vec<f64> = (0..dim)
                .map(|i| {
                    if steps[i] == 0 {
                        self.min.coords[i]
                    } else {
                        let t = idx[i] as f64 / steps[i] as f64;
                        self.min.coords[i] + t * (self.max.coords[i] - self.min.coords[i])
                    }
                })
                .collect();
            out.push(Point::new(p));
            let mut axis = 0;
            loop {
                if axis == dim {
                    return out;
                }
                idx[axis] += 1;
                if idx[axis] <= steps[axis] {
                    break;
                }
                idx[axis] = 0;
                axis += 1;
            }
        }
    }
}

/// One compact connected shape usable as a smocking stitch.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Ball { center: Point, radius: f64 },
    Box(AxisBox),
    Segment { a: Point, b: Point },
    /// Finite point cloud. Only single-point clouds are connected; pattern
    /// validation rejects the rest.
    Cloud { points: Vec<Point> },
}

impl Shape {
    pub fn dim(&self) -> usize {
        match self {
            Shape::Ball { center, .. } => center.dim(),
            Shape::Box(b) => b.dim(),
            Shape::Segment { a, .. } => a.dim(),
            Shape::Cloud { points } => points[0].dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Shape::Ball { radius, .. } => {
                if *radius <= 0.0 {
                    return Err(EuclidError::InvalidShape("ball radius must be positive".into()));
                }
            }
            Shape::Box(_) => {} // checked at construction
            Shape::Segment { a, b } => {
                if a.dim() != b.dim() {
                    return Err(EuclidError::DimensionMismatch(a.dim(), b.dim()));
                }
            }
            Shape::Cloud { points } => {
                if points.is_empty() {
                    return Err(EuclidError::InvalidShape("empty cloud".into()));
                }
            }
        }
        Ok(())
    }

    /// Exact Euclidean diameter.
    pub fn diam(&self) -> f64 {
        match self {
            Shape::Ball { radius, .. } => 2.0 * radius,
            Shape::Box(b) => b.diagonal(),
            Shape::Segment { a, b } => a.dist(b),
            Shape::Cloud { points } => {
                let mut best = 0.0f64;
                for (i, p) in points.iter().enumerate() {
                    for q in &points[i + 1..] {
                        best = best.max(p.dist(q));
                    }
                }
                best
            }
        }
    }

    /// A canonical interior point, used as the evaluation point of a
    /// collapsed stitch.
    pub fn anchor(&self) -> Point {
        match self {
            Shape::Ball { center, .. } => center.clone(),
            Shape::Box(b) => Point::lerp(&b.min, &b.max, 0.5),
            Shape::Segment { a, b } => Point::lerp(a, b, 0.5),
            Shape::Cloud { points } => points[0].clone(),
        }
    }

    /// Lebesgue volume in the ambient dimension (zero for segments and clouds).
    pub fn volume(&self) -> f64 {
        match self {
            Shape::Ball { center, radius } => unit_ball_volume(center.dim()) * radius.powi(center.dim() as i32),
            Shape::Box(b) => b.volume(),
            Shape::Segment { a, b } => {
                if a.dim() == 1 {
                    (a.coords[0] - b.coords[0]).abs()
                } else {
                    0.0
                }
            }
            Shape::Cloud { .. } => 0.0,
        }
    }

    pub fn bounding_box(&self) -> AxisBox {
        match self {
            Shape::Ball { center, radius } => AxisBox {
                min: Point::new(center.coords.iter().map(|c| c - radius).collect()),
                max: Point::new(center.coords.iter().map(|c| c + radius).collect()),
            },
            Shape::Box(b) => b.clone(),
            Shape::Segment { a, b } => AxisBox {
                min: Point::new(a.coords.iter().zip(&b.coords).map(|(x, y)| x.min(*y)).collect()),
                max: Point::new(a.coords.iter().zip(&b.coords).map(|(x, y)| x.max(*y)).collect()),
            },
            Shape::Cloud { points } => {
                let dim = points[0].dim();
                let mut min = vec![f64::INFINITY; dim];
                let mut max = vec![f64::NEG_INFINITY; dim];
                for p in points {
                    for i in 0..dim {
                        min[i] = min[i].min(p.coords[i]);
                        max[i] = max[i].max(p.coords[i]);
                    }
                }
                AxisBox { min: Point::new(min), max: Point::new(max) }
            }
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        dist_point_shape(p, self).map(|d| d <= CONTACT_TOL).unwrap_or(false)
    }

    /// Sample points covering the shape at spacing at most `spacing`.
    pub fn sample(&self, spacing: f64) -> Vec<Point> {
        match self {
            Shape::Ball { center, radius } => {
                if center.dim() == 1 {
                    let seg = Shape::Segment {
                        a: Point::new(vec![center.coords[0] - radius]),
                        b: Point::new(vec![center.coords[0] + radius]),
                    };
                    return seg.sample(spacing);
                }
                self.bounding_box()
                    .grid(spacing / (center.dim() as f64).sqrt())
                    .into_iter()
                    .filter(|p| p.dist(center) <= *radius)
                    .collect()
            }
            Shape::Box(b) => b.grid(spacing / (b.dim() as f64).sqrt()),
            Shape::Segment { a, b } => {
                let len = a.dist(b);
                let steps = (len / spacing).ceil().max(1.0) as usize;
                (0..=steps)
                    .map(|i| Point::lerp(a, b, i as f64 / steps as f64))
                    .collect()
            }
            Shape::Cloud { points } => points.clone(),
        }
    }
}

/// Volume of the unit ball in `E^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    // V_n = pi^(n/2) / Gamma(n/2 + 1), by the two-step recurrence.
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(n - 2) * 2.0 * std::f64::consts::PI / n as f64,
    }
}

fn check_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        Err(EuclidError::DimensionMismatch(a, b))
    } else {
        Ok(())
    }
}

fn dist_point_box(p: &Point, b: &AxisBox) -> f64 {
    p.coords
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let gap = (b.min.coords[i] - c).max(c - b.max.coords[i]).max(0.0);
            gap * gap
        })
        .sum::<f64>()
        .sqrt()
}

fn dist_point_segment(p: &Point, a: &Point, b: &Point) -> f64 {
    let ab = b.sub(a);
    let ap = p.sub(a);
    let denom = dot(&ab, &ab);
    let t = if denom <= 0.0 { 0.0 } else { (dot(&ap, &ab) / denom).clamp(0.0, 1.0) };
    p.dist(&Point::lerp(a, b, t))
}

/// Exact min over `z in s` of `|p - z|`; zero exactly when `p` lies in `s`.
pub fn dist_point_shape(p: &Point, s: &Shape) -> Result<f64> {
    check_dim(p.dim(), s.dim())?;
    Ok(match s {
        Shape::Ball { center, radius } => (p.dist(center) - radius).max(0.0),
        Shape::Box(b) => dist_point_box(p, b),
        Shape::Segment { a, b } => dist_point_segment(p, a, b),
        Shape::Cloud { points } => points
            .iter()
            .map(|q| p.dist(q))
            .fold(f64::INFINITY, f64::min),
    })
}

/// Closest-point distance between two segments in `E^N`.
fn dist_segment_segment(p1: &Point, q1: &Point, p2: &Point, q2: &Point) -> f64 {
    let d1 = q1.sub(p1);
    let d2 = q2.sub(p2);
    let r = p1.sub(p2);
    let a = dot(&d1, &d1);
    let e = dot(&d2, &d2);
    let f = dot(&d2, &r);
    let (s, t);
    if a <= f64::EPSILON && e <= f64::EPSILON {
        s = 0.0;
        t = 0.0;
    } else if a <= f64::EPSILON {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = dot(&d1, &r);
        if e <= f64::EPSILON {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = dot(&d1, &d2);
            let denom = a * e - b * b;
            let mut s0 = if denom != 0.0 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    Point::lerp(p1, q1, s).dist(&Point::lerp(p2, q2, t))
}

fn dist_box_box(a: &AxisBox, b: &AxisBox) -> f64 {
    (0..a.dim())
        .map(|i| {
            let gap = (a.min.coords[i] - b.max.coords[i])
                .max(b.min.coords[i] - a.max.coords[i])
                .max(0.0);
            gap * gap
        })
        .sum::<f64>()
        .sqrt()
}

/// `t -> dist(lerp(a,b,t), box)` is convex; ternary search is exact to
/// machine precision.
fn dist_box_segment(b: &AxisBox, a: &Point, bp: &Point) -> f64 {
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        let f1 = dist_point_box(&Point::lerp(a, bp, m1), b);
        let f2 = dist_point_box(&Point::lerp(a, bp, m2), b);
        if f1 <= f2 {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    dist_point_box(&Point::lerp(a, bp, 0.5 * (lo + hi)), b)
}

/// Exact min over `z in s1, z' in s2` of `|z - z'|`. Symmetric; zero exactly
/// when the sets intersect.
pub fn dist_shape_shape(s1: &Shape, s2: &Shape) -> Result<f64> {
    check_dim(s1.dim(), s2.dim())?;
    use Shape::*;
    Ok(match (s1, s2) {
        (Ball { center: c1, radius: r1 }, Ball { center: c2, radius: r2 }) => {
            (c1.dist(c2) - r1 - r2).max(0.0)
        }
        (Ball { center, radius }, Box(b)) | (Box(b), Ball { center, radius }) => {
            (dist_point_box(center, b) - radius).max(0.0)
        }
        (Ball { center, radius }, Segment { a, b }) | (Segment { a, b }, Ball { center, radius }) => {
            (dist_point_segment(center, a, b) - radius).max(0.0)
        }
        (Box(a), Box(b)) => dist_box_box(a, b),
        (Segment { a: a1, b: b1 }, Segment { a: a2, b: b2 }) => {
            dist_segment_segment(a1, b1, a2, b2)
        }
        (Box(bx), Segment { a, b }) | (Segment { a, b }, Box(bx)) => dist_box_segment(bx, a, b),
        (Cloud { points }, other) | (other, Cloud { points }) => points
            .iter()
            .map(|p| dist_point_shape(p, other).unwrap())
            .fold(f64::INFINITY, f64::min),
    })
}

/// Finite union of shapes; operand of the Hausdorff distance.
#[derive(Debug, Clone)]
pub struct CompactSet {
    pub parts: Vec<Shape>,
}

impl CompactSet {
    pub fn new(parts: Vec<Shape>) -> Result<Self> {
        if parts.is_empty() {
            return Err(EuclidError::EmptySet);
        }
        let dim = parts[0].dim();
        for p in &parts {
            p.validate()?;
            check_dim(dim, p.dim())?;
        }
        Ok(CompactSet { parts })
    }

    pub fn dim(&self) -> usize {
        self.parts[0].dim()
    }

    pub fn dist_point(&self, p: &Point) -> Result<f64> {
        let mut best = f64::INFINITY;
        for s in &self.parts {
            best = best.min(dist_point_shape(p, s)?);
        }
        Ok(best)
    }

    /// Interval representation `[lo, hi]` when the set is a 1-D union.
    fn intervals_1d(&self) -> Option<Vec<(f64, f64)>> {
        if self.dim() != 1 {
            return None;
        }
        let mut iv: Vec<(f64, f64)> = Vec::new();
        for s in &self.parts {
            match s {
                Shape::Ball { center, radius } => {
                    iv.push((center.coords[0] - radius, center.coords[0] + radius))
                }
                Shape::Box(b) => iv.push((b.min.coords[0], b.max.coords[0])),
                Shape::Segment { a, b } => {
                    iv.push((a.coords[0].min(b.coords[0]), a.coords[0].max(b.coords[0])))
                }
                Shape::Cloud { points } => {
                    for p in points {
                        iv.push((p.coords[0], p.coords[0]));
                    }
                }
            }
        }
        iv.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // merge overlaps
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (lo, hi) in iv {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        Some(merged)
    }
}

/// Hausdorff distance with an explicit error bound: zero for 1-D interval
/// unions (endpoint arithmetic), at most `resolution` otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HausdorffResult {
    pub value: f64,
    pub error_bound: f64,
}

fn dist_to_intervals(x: f64, iv: &[(f64, f64)]) -> f64 {
    iv.iter()
        .map(|&(lo, hi)| (lo - x).max(x - hi).max(0.0))
        .fold(f64::INFINITY, f64::min)
}

fn directed_hausdorff_1d(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    // sup over x in A of dist(x, B); the sup is attained at an interval
    // endpoint of A or a midpoint of a gap of B lying inside A.
    let mut candidates: Vec<f64> = Vec::new();
    for &(lo, hi) in a {
        candidates.push(lo);
        candidates.push(hi);
    }
    for w in b.windows(2) {
        let mid = 0.5 * (w[0].1 + w[1].0);
        if a.iter().any(|&(lo, hi)| lo <= mid && mid <= hi) {
            candidates.push(mid);
        }
    }
    candidates
        .into_iter()
        .map(|x| dist_to_intervals(x, b))
        .fold(0.0, f64::max)
}

fn directed_hausdorff_sampled(a: &CompactSet, b: &CompactSet, spacing: f64) -> Result<f64> {
    let mut best = 0.0f64;
    for s in &a.parts {
        for p in s.sample(spacing) {
            best = best.max(b.dist_point(&p)?);
        }
    }
    Ok(best)
}

/// Max of the two directed Hausdorff distances.
pub fn hausdorff(a: &CompactSet, b: &CompactSet, resolution: f64) -> Result<HausdorffResult> {
    check_dim(a.dim(), b.dim())?;
    assert!(resolution > 0.0);
    if let (Some(ia), Some(ib)) = (a.intervals_1d(), b.intervals_1d()) {
        let value = directed_hausdorff_1d(&ia, &ib).max(directed_hausdorff_1d(&ib, &ia));
        return Ok(HausdorffResult { value, error_bound: 0.0 });
    }
    let value = directed_hausdorff_sampled(a, b, resolution)?
        .max(directed_hausdorff_sampled(b, a, resolution)?);
    Ok(HausdorffResult { value, error_bound: resolution })
}
