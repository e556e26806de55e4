//! The smocked metric engine: pattern validation, smocking constants, exact
//! evaluation of the quotient distance via shortest paths over the stitch
//! graph, the crossing and preimage lifting bounds, and epsilon-net
//! extraction of metric balls.

use crate::euclid::{
    dist_point_shape, dist_shape_shape, AxisBox, EuclidError, Point, Shape, CONTACT_TOL,
};
use crate::gh::FiniteMetricSpace;
use thiserror::Error;

/// Separation below which two stitches are rejected as effectively touching.
pub const SEPARATION_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("stitches {0} and {1} overlap")]
    OverlappingStitches(usize, usize),
    #[error("separation between stitches {0} and {1} is zero within tolerance")]
    ZeroSeparation(usize, usize),
    #[error("stitch {0} is not connected")]
    DisconnectedStitch(usize),
    #[error("stitch {0} does not intersect the window")]
    StitchOutsideWindow(usize),
    #[error("empty pattern")]
    EmptyPattern,
    #[error("lift lies outside the pattern window")]
    LiftOutsideWindow,
    #[error("unknown stitch id {0}")]
    UnknownStitch(usize),
    #[error("enumeration budget exceeded for k = {0}")]
    EnumerationBudget(usize),
    #[error("nonpositive argument: {0}")]
    NonPositive(&'static str),
    #[error(transparent)]
    Euclid(#[from] EuclidError),
}

pub type Result<T> = std::result::Result<T, SpaceError>;

/// One stitch of a pattern: a compact connected shape with a stable id.
#[derive(Debug, Clone, PartialEq)]
pub struct Stitch {
    pub id: usize,
    pub shape: Shape,
}

/// A validated smocking pattern: pairwise disjoint stitches listed completely
/// within a declared window, with the computed separation factor.
#[derive(Debug, Clone)]
pub struct SmockingPattern {
    pub dimension: usize,
    pub stitches: Vec<Stitch>,
    pub window: AxisBox,
    /// Minimal pairwise set distance; `+inf` when fewer than two stitches.
    pub delta: f64,
}

/// Depth over a window, carrying its grid resolution, or the unbounded
/// marker when the window holds points beyond reach of every stitch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Depth {
    Finite { value: f64, resolution: f64 },
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct SmockingConstants {
    pub depth_h: Depth,
    pub l_min: f64,
    pub l_max: f64,
    pub delta: f64,
    pub window: AxisBox,
}

/// A point of the quotient: either a free Euclidean point or a collapsed
/// stitch.
#[derive(Debug, Clone, PartialEq)]
pub enum SpacePoint {
    Free(Point),
    Collapsed(usize),
}

/// A smocked metric space: a pattern plus a basepoint.
#[derive(Debug, Clone)]
pub struct SmockedSpace {
    pub pattern: SmockingPattern,
    pub basepoint: SpacePoint,
}

/// Validate a stitch list against a window, computing the separation factor.
pub fn validate_pattern(stitches: Vec<Shape>, window: AxisBox) -> Result<SmockingPattern> {
    if stitches.is_empty() {
        return Err(SpaceError::EmptyPattern);
    }
    let dimension = window.dim();
    for (i, s) in stitches.iter().enumerate() {
        s.validate()?;
        if s.dim() != dimension {
            return Err(EuclidError::DimensionMismatch(s.dim(), dimension).into());
        }
        if let Shape::Cloud { points } = s {
            if points.len() > 1 {
                return Err(SpaceError::DisconnectedStitch(i));
            }
        }
        let window_shape = Shape::Box(window.clone());
        if dist_shape_shape(s, &window_shape)? > CONTACT_TOL {
            return Err(SpaceError::StitchOutsideWindow(i));
        }
    }
    let mut delta = f64::INFINITY;
    for i in 0..stitches.len() {
        for j in i + 1..stitches.len() {
            let d = dist_shape_shape(&stitches[i], &stitches[j])?;
            if d <= CONTACT_TOL {
                return Err(SpaceError::OverlappingStitches(i, j));
            }
            if d < SEPARATION_TOL {
                return Err(SpaceError::ZeroSeparation(i, j));
            }
            delta = delta.min(d);
        }
    }
    let stitches = stitches
        .into_iter()
        .enumerate()
        .map(|(id, shape)| Stitch { id, shape })
        .collect();
    Ok(SmockingPattern { dimension, stitches, window, delta })
}

impl SmockingPattern {
    pub fn l_min(&self) -> f64 {
        self.stitches.iter().map(|s| s.shape.diam()).fold(f64::INFINITY, f64::min)
    }

    pub fn l_max(&self) -> f64 {
        self.stitches.iter().map(|s| s.shape.diam()).fold(0.0, f64::max)
    }

    /// Union of the stitches as a compact set.
    pub fn union(&self) -> crate::euclid::CompactSet {
        crate::euclid::CompactSet::new(self.stitches.iter().map(|s| s.shape.clone()).collect())
            .expect("validated pattern is nonempty")
    }
}

/// Smocking constants over the given window; the depth is a grid supremum
/// carrying a `grid_step * sqrt(N)` error bar.
pub fn smocking_constants(
    pattern: &SmockingPattern,
    window: &AxisBox,
    grid_step: f64,
) -> Result<SmockingConstants> {
    if pattern.stitches.is_empty() {
        return Err(SpaceError::EmptyPattern);
    }
    if grid_step <= 0.0 {
        return Err(SpaceError::NonPositive("grid_step"));
    }
    let mut depth_val = 0.0f64;
    for x in window.grid(grid_step) {
        let mut nearest = f64::INFINITY;
        for s in &pattern.stitches {
            nearest = nearest.min(dist_point_shape(&x, &s.shape)?);
        }
        depth_val = depth_val.max(nearest);
    }
    let depth_h = if depth_val > window.diagonal() {
        Depth::Unbounded
    } else {
        Depth::Finite {
            value: depth_val,
            resolution: grid_step * (window.dim() as f64).sqrt(),
        }
    };
    Ok(SmockingConstants {
        depth_h,
        l_min: pattern.l_min(),
        l_max: pattern.l_max(),
        delta: pattern.delta,
        window: window.clone(),
    })
}

impl SmockedSpace {
    pub fn new(pattern: SmockingPattern, basepoint: SpacePoint) -> Result<Self> {
        match &basepoint {
            SpacePoint::Free(p) => {
                if !pattern.window.contains(p) {
                    return Err(SpaceError::LiftOutsideWindow);
                }
            }
            SpacePoint::Collapsed(id) => {
                if *id >= pattern.stitches.len() {
                    return Err(SpaceError::UnknownStitch(*id));
                }
            }
        }
        Ok(SmockedSpace { pattern, basepoint })
    }

    /// Space with basepoint `pi(0)`.
    pub fn with_origin_base(pattern: SmockingPattern) -> Result<Self> {
        let origin = Point::origin(pattern.dimension);
        let base = project(&pattern, &origin)?;
        SmockedSpace::new(pattern, base)
    }
}

/// The smocking map: detect the containing stitch, else a free point.
pub fn project(pattern: &SmockingPattern, p: &Point) -> Result<SpacePoint> {
    for s in &pattern.stitches {
        if dist_point_shape(p, &s.shape)? <= CONTACT_TOL {
            return Ok(SpacePoint::Collapsed(s.id));
        }
    }
    Ok(SpacePoint::Free(p.clone()))
}

fn check_lift(space: &SmockedSpace, u: &SpacePoint) -> Result<()> {
    match u {
        SpacePoint::Free(p) => {
            if !space.pattern.window.contains(p) {
                return Err(SpaceError::LiftOutsideWindow);
            }
            // a free point sitting inside a stitch denotes the collapsed
            // point; callers should project first, but accept it here
            Ok(())
        }
        SpacePoint::Collapsed(id) => {
            if *id >= space.pattern.stitches.len() {
                Err(SpaceError::UnknownStitch(*id))
            } else {
                Ok(())
            }
        }
    }
}

fn endpoint_dist(space: &SmockedSpace, u: &SpacePoint, v: &SpacePoint) -> Result<f64> {
    Ok(match (u, v) {
        (SpacePoint::Free(p), SpacePoint::Free(q)) => p.dist(q),
        (SpacePoint::Free(p), SpacePoint::Collapsed(j))
        | (SpacePoint::Collapsed(j), SpacePoint::Free(p)) => {
            dist_point_shape(p, &space.pattern.stitches[*j].shape)?
        }
        (SpacePoint::Collapsed(i), SpacePoint::Collapsed(j)) => {
            if i == j {
                0.0
            } else {
                dist_shape_shape(
                    &space.pattern.stitches[*i].shape,
                    &space.pattern.stitches[*j].shape,
                )?
            }
        }
    })
}

fn dist_endpoint_stitch(space: &SmockedSpace, u: &SpacePoint, stitch: &Stitch) -> Result<f64> {
    Ok(match u {
        SpacePoint::Free(p) => dist_point_shape(p, &stitch.shape)?,
        SpacePoint::Collapsed(i) => {
            if *i == stitch.id {
                0.0
            } else {
                dist_shape_shape(&space.pattern.stitches[*i].shape, &stitch.shape)?
            }
        }
    })
}

/// Exact smocked distance `d(u, v)`, realized as the shortest path in the
/// weighted graph on `{u, v}` and the relevant stitches, where collapsed
/// stitches contribute zero internal length.
///
/// Stitches farther from `u` than the direct distance are pruned: a path
/// entering one is already longer than the zero-stitch segment.
pub fn smocked_distance(space: &SmockedSpace, u: &SpacePoint, v: &SpacePoint) -> Result<f64> {
    check_lift(space, u)?;
    check_lift(space, v)?;
    let d0 = endpoint_dist(space, u, v)?;
    if d0 == 0.0 {
        return Ok(0.0);
    }
    let mut nodes: Vec<&Stitch> = Vec::new();
    for s in &space.pattern.stitches {
        if let SpacePoint::Collapsed(i) = u {
            if *i == s.id {
                continue;
            }
        }
        if let SpacePoint::Collapsed(i) = v {
            if *i == s.id {
                continue;
            }
        }
        if dist_endpoint_stitch(space, u, s)? <= d0 {
            nodes.push(s);
        }
    }
    // Dense Dijkstra on {u} + stitches + {v}; graphs stay small after
    // pruning. Ties resolve toward lower stitch ids by scan order.
    let n = nodes.len() + 2;
    let iu = 0usize;
    let iv = n - 1;
    let mut weight = vec![vec![f64::INFINITY; n]; n];
    weight[iu][iv] = d0;
    weight[iv][iu] = d0;
    for (a, s) in nodes.iter().enumerate() {
        let wa = dist_endpoint_stitch(space, u, s)?;
        weight[iu][a + 1] = wa;
        weight[a + 1][iu] = wa;
        let wb = dist_endpoint_stitch(space, v, s)?;
        weight[iv][a + 1] = wb;
        weight[a + 1][iv] = wb;
        for (b, t) in nodes.iter().enumerate().skip(a + 1) {
            let w = dist_shape_shape(&s.shape, &t.shape)?;
            weight[a + 1][b + 1] = w;
            weight[b + 1][a + 1] = w;
        }
    }
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[iu] = 0.0;
    for _ in 0..n {
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for i in 0..n {
            if !done[i] && dist[i] < best_d {
                best = i;
                best_d = dist[i];
            }
        }
        if best == usize::MAX {
            break;
        }
        done[best] = true;
        if best == iv {
            break;
        }
        for i in 0..n {
            let cand = dist[best] + weight[best][i];
            if cand < dist[i] {
                dist[i] = cand;
            }
        }
    }
    Ok(dist[iv])
}

/// Brute-force oracle: the exact minimum of the `k`-stitch path term over all
/// ordered stitch sequences with distinct consecutive indices.
pub fn d_k_exact(space: &SmockedSpace, v: &Point, w: &Point, k: usize) -> Result<f64> {
    if k == 0 {
        return Ok(v.dist(w));
    }
    let n = space.pattern.stitches.len();
    if n == 0 {
        return Err(SpaceError::EnumerationBudget(k));
    }
    let count = n as f64 * ((n.max(2) - 1) as f64).powi(k as i32 - 1);
    if count > 2_000_000.0 {
        return Err(SpaceError::EnumerationBudget(k));
    }
    let from_v: Vec<f64> = space
        .pattern
        .stitches
        .iter()
        .map(|s| dist_point_shape(v, &s.shape))
        .collect::<crate::euclid::Result<_>>()?;
    let to_w: Vec<f64> = space
        .pattern
        .stitches
        .iter()
        .map(|s| dist_point_shape(w, &s.shape))
        .collect::<crate::euclid::Result<_>>()?;
    let mut pair = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = dist_shape_shape(&space.pattern.stitches[i].shape, &space.pattern.stitches[j].shape)?;
            pair[i][j] = d;
            pair[j][i] = d;
        }
    }
    // explicit enumeration of sequences (j_1, ..., j_k), consecutive-distinct
    let mut best = f64::INFINITY;
    let mut seq = vec![0usize; k];
    fn recurse(
        seq: &mut Vec<usize>,
        depth: usize,
        k: usize,
        n: usize,
        from_v: &[f64],
        to_w: &[f64],
        pair: &[Vec<f64>],
        acc: f64,
        best: &mut f64,
    ) {
        if depth == k {
            let total = acc + to_w[seq[k - 1]];
            if total < *best {
                *best = total;
            }
            return;
        }
        for j in 0..n {
            if depth > 0 && seq[depth - 1] == j {
                continue;
            }
            let step = if depth == 0 { from_v[j] } else { pair[seq[depth - 1]][j] };
            seq[depth] = j;
            recurse(seq, depth + 1, k, n, from_v, to_w, pair, acc + step, best);
        }
    }
    recurse(&mut seq, 0, k, n, &from_v, &to_w, &pair, 0.0, &mut best);
    Ok(best)
}

/// The pseudometric on the ambient space: `d(pi(v), pi(w))`.
pub fn pseudometric(space: &SmockedSpace, v: &Point, w: &Point) -> Result<f64> {
    let pu = project(&space.pattern, v)?;
    let pv = project(&space.pattern, w)?;
    smocked_distance(space, &pu, &pv)
}

/// Maximum number of distinct stitches a curve of length `l0` can meet when
/// distinct stitches are `delta0`-separated: `1 + floor(l0 / delta0)`.
pub fn crossing_bound(l0: f64, delta0: f64) -> Result<usize> {
    if l0 <= 0.0 {
        return Err(SpaceError::NonPositive("l0"));
    }
    if delta0 <= 0.0 {
        return Err(SpaceError::NonPositive("delta0"));
    }
    Ok(1 + (l0 / delta0).floor() as usize)
}

/// Euclidean radius containing every lift of the metric ball of radius `r`:
/// `R(r) = r + M * L` with `M` the crossing bound for paths of length `r + L`.
pub fn preimage_radius(r: f64, l: f64, delta0: f64) -> Result<f64> {
    if r <= 0.0 {
        return Err(SpaceError::NonPositive("r"));
    }
    if delta0 <= 0.0 {
        return Err(SpaceError::NonPositive("delta0"));
    }
    if l == 0.0 {
        return Ok(r);
    }
    let m = crossing_bound(r + l, delta0)?;
    Ok(r + m as f64 * l)
}

fn label_of(point: &SpacePoint) -> String {
    match point {
        SpacePoint::Free(p) => {
            let coords: Vec<String> = p.coords.iter().map(|c| format!("{c:.6}")).collect();
            format!("({})", coords.join(","))
        }
        SpacePoint::Collapsed(id) => format!("I{id}"),
    }
}

/// Greedy farthest-point net of the metric ball `B_R(center)`: contains the
/// center and every collapsed stitch in range, pairwise separated by at
/// least `eps`, with `eps`-balls covering the candidate grid.
pub fn ball_net(
    space: &SmockedSpace,
    center: &SpacePoint,
    radius: f64,
    eps: f64,
) -> Result<FiniteMetricSpace> {
    Ok(ball_net_with_points(space, center, radius, eps)?.0)
}

/// `ball_net` together with the net points themselves, in net order.
pub fn ball_net_with_points(
    space: &SmockedSpace,
    center: &SpacePoint,
    radius: f64,
    eps: f64,
) -> Result<(FiniteMetricSpace, Vec<SpacePoint>)> {
    if radius <= 0.0 {
        return Err(SpaceError::NonPositive("radius"));
    }
    if eps <= 0.0 {
        return Err(SpaceError::NonPositive("eps"));
    }
    check_lift(space, center)?;
    let l_max = space.pattern.l_max();
    let lift_radius = if l_max == 0.0 {
        radius
    } else {
        preimage_radius(radius, l_max, space.pattern.delta)?
    };
    let center_lift = match center {
        SpacePoint::Free(p) => p.clone(),
        SpacePoint::Collapsed(id) => space.pattern.stitches[*id].shape.anchor(),
    };
    let reach = AxisBox::new(
        Point::new(center_lift.coords.iter().map(|c| c - lift_radius).collect()),
        Point::new(center_lift.coords.iter().map(|c| c + lift_radius).collect()),
    )?;
    let region = reach
        .intersect(&space.pattern.window)
        .ok_or(SpaceError::LiftOutsideWindow)?;

    // deterministic candidate order: center, collapsed stitches in range,
    // then grid lifts in lexicographic order
    let mut candidates: Vec<SpacePoint> = vec![center.clone()];
    for s in &space.pattern.stitches {
        let c = SpacePoint::Collapsed(s.id);
        if c != *center && smocked_distance(space, center, &c)? <= radius {
            candidates.push(c);
        }
    }
    for p in region.grid(eps / 2.0) {
        let sp = project(&space.pattern, &p)?;
        if matches!(sp, SpacePoint::Collapsed(_)) {
            continue; // already listed
        }
        if sp == *center {
            continue;
        }
        if smocked_distance(space, center, &sp)? <= radius {
            candidates.push(sp);
        }
    }

    // farthest-point sampling with incremental nearest-net distances
    let m = candidates.len();
    let mut in_net = vec![false; m];
    let mut order: Vec<usize> = vec![0];
    in_net[0] = true;
    let mut nearest: Vec<f64> = (0..m)
        .map(|i| smocked_distance(space, &candidates[0], &candidates[i]))
        .collect::<Result<_>>()?;
    loop {
        let mut best = usize::MAX;
        let mut best_d = -1.0;
        for i in 0..m {
            if !in_net[i] && nearest[i] > best_d {
                best = i;
                best_d = nearest[i];
            }
        }
        if best == usize::MAX || best_d < eps {
            break;
        }
        in_net[best] = true;
        order.push(best);
        for i in 0..m {
            if !in_net[i] {
                let d = smocked_distance(space, &candidates[best], &candidates[i])?;
                if d < nearest[i] {
                    nearest[i] = d;
                }
            }
        }
    }

    let points: Vec<&SpacePoint> = order.iter().map(|&i| &candidates[i]).collect();
    let n = points.len();
    let mut dist = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = smocked_distance(space, points[i], points[j])?;
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    let labels = points.iter().map(|p| label_of(p)).collect();
    let fms = FiniteMetricSpace::new(labels, dist, 0)
        .map_err(|e| SpaceError::Euclid(EuclidError::InvalidShape(e.to_string())))?;
    let owned = order.into_iter().map(|i| candidates[i].clone()).collect();
    Ok((fms, owned))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn pt(coords: &[f64]) -> Point {
        Point::new(coords.to_vec())
    }

    fn interval(lo: f64, hi: f64) -> Shape {
        Shape::Box(AxisBox::new(pt(&[lo]), pt(&[hi])).unwrap())
    }

    fn window1(lo: f64, hi: f64) -> AxisBox {
        AxisBox::new(pt(&[lo]), pt(&[hi])).unwrap()
    }

    fn window2(r: f64) -> AxisBox {
        AxisBox::new(pt(&[-r, -r]), pt(&[r, r])).unwrap()
    }

    #[test]
    fn validate_two_balls() {
        let stitches = vec![
            Shape::Ball { center: pt(&[0.0, 0.0]), radius: 1.0 },
            Shape::Ball { center: pt(&[5.0, 0.0]), radius: 1.0 },
        ];
        let p = validate_pattern(stitches, window2(10.0)).unwrap();
        assert_relative_eq!(p.delta, 3.0);
    }

    #[test]
    fn validate_rejects_overlap() {
        let stitches = vec![interval(0.0, 2.0), interval(1.0, 3.0)];
        let err = validate_pattern(stitches, window1(-5.0, 5.0)).unwrap_err();
        assert!(matches!(err, SpaceError::OverlappingStitches(0, 1)));
    }

    #[test]
    fn validate_rejects_multipoint_cloud() {
        let stitches = vec![Shape::Cloud { points: vec![pt(&[0.0]), pt(&[1.0])] }];
        let err = validate_pattern(stitches, window1(-5.0, 5.0)).unwrap_err();
        assert!(matches!(err, SpaceError::DisconnectedStitch(0)));
    }

    #[test]
    fn constants_single_ball() {
        let p = validate_pattern(
            vec![Shape::Ball { center: pt(&[0.0, 0.0]), radius: 1.0 }],
            window2(10.0),
        )
        .unwrap();
        let c = smocking_constants(&p, &window2(10.0), 0.25).unwrap();
        assert_relative_eq!(c.l_min, 2.0);
        assert_relative_eq!(c.l_max, 2.0);
        // farthest window point is a corner at distance |(10,10)| - 1
        let expected = (200.0f64).sqrt() - 1.0;
        match c.depth_h {
            Depth::Finite { value, resolution } => {
                assert!((value - expected).abs() <= resolution + 1e-9);
            }
            Depth::Unbounded => panic!("depth should be finite"),
        }
    }

    #[test]
    fn constants_unit_spaced_points() {
        let stitches: Vec<Shape> = (-5..=5)
            .map(|i| Shape::Cloud { points: vec![pt(&[i as f64])] })
            .collect();
        let p = validate_pattern(stitches, window1(-5.0, 5.0)).unwrap();
        let c = smocking_constants(&p, &window1(-5.0, 5.0), 0.01).unwrap();
        assert_relative_eq!(c.delta, 1.0);
        match c.depth_h {
            Depth::Finite { value, resolution } => {
                assert!((value - 0.5).abs() <= resolution + 1e-9)
            }
            Depth::Unbounded => panic!(),
        }
    }

    #[test]
    fn constants_out_of_window_stitch_reports_unbounded_depth() {
        // far interval, evaluated over a small window around the origin
        let k = 6.0;
        let p = validate_pattern(
            vec![interval(k * k, k * k + k)],
            window1(-8.0, k * k + k + 1.0),
        )
        .unwrap();
        let small = window1(-5.0, 5.0);
        let c = smocking_constants(&p, &small, 0.5).unwrap();
        assert_eq!(c.depth_h, Depth::Unbounded);
    }

    fn space_no_stitch_2d() -> SmockedSpace {
        // lone far-away ball: pruning removes it from queries near the origin
        let p = validate_pattern(
            vec![Shape::Ball { center: pt(&[90.0, 90.0]), radius: 0.5 }],
            window2(100.0),
        )
        .unwrap();
        SmockedSpace::with_origin_base(p).unwrap()
    }

    #[test]
    fn distance_without_stitches_is_euclidean() {
        let s = space_no_stitch_2d();
        let d = smocked_distance(
            &s,
            &SpacePoint::Free(pt(&[0.0, 0.0])),
            &SpacePoint::Free(pt(&[3.0, 4.0])),
        )
        .unwrap();
        assert_relative_eq!(d, 5.0);
    }

    #[test]
    fn same_stitch_collapses_to_zero() {
        let p = validate_pattern(vec![interval(0.0, 1.0)], window1(-5.0, 5.0)).unwrap();
        let s = SmockedSpace::with_origin_base(p).unwrap();
        assert_relative_eq!(pseudometric(&s, &pt(&[0.2]), &pt(&[0.9])).unwrap(), 0.0);
    }

    #[test]
    fn one_segment_shortcut() {
        let p = validate_pattern(
            vec![Shape::Segment { a: pt(&[0.0, 0.0]), b: pt(&[1.0, 0.0]) }],
            window2(10.0),
        )
        .unwrap();
        let s = SmockedSpace::with_origin_base(p).unwrap();
        let d = pseudometric(&s, &pt(&[-1.0, 0.0]), &pt(&[2.0, 0.0])).unwrap();
        assert_relative_eq!(d, 2.0);
        // matches the k = 1 oracle term
        let d1 = d_k_exact(&s, &pt(&[-1.0, 0.0]), &pt(&[2.0, 0.0]), 1).unwrap();
        assert_relative_eq!(d1, 2.0);
    }

    #[test]
    fn d_zero_is_euclidean() {
        let s = space_no_stitch_2d();
        assert_relative_eq!(d_k_exact(&s, &pt(&[0.0, 0.0]), &pt(&[3.0, 4.0]), 0).unwrap(), 5.0);
    }

    #[test]
    fn crossing_bound_examples() {
        assert_eq!(crossing_bound(2.0, 0.5).unwrap(), 5);
        assert_eq!(crossing_bound(0.3, 0.5).unwrap(), 1);
        assert_eq!(crossing_bound(2.0 * 1.0 + 2.0, 1.0).unwrap(), 5);
        assert!(crossing_bound(-1.0, 0.5).is_err());
    }

    #[test]
    fn preimage_radius_examples() {
        assert_relative_eq!(preimage_radius(2.0, 0.0, 1.0).unwrap(), 2.0);
        assert_relative_eq!(preimage_radius(1.0, 1.0, 1.0).unwrap(), 4.0);
    }

    #[test]
    fn ball_net_on_the_line() {
        let p = validate_pattern(
            vec![Shape::Ball { center: pt(&[90.0]), radius: 0.5 }],
            window1(-100.0, 100.0),
        )
        .unwrap();
        let s = SmockedSpace::with_origin_base(p).unwrap();
        let net = ball_net(&s, &SpacePoint::Free(pt(&[0.0])), 1.0, 0.5).unwrap();
        let mut pts: Vec<f64> = net
            .labels
            .iter()
            .map(|l| l.trim_matches(|c| c == '(' || c == ')').parse::<f64>().unwrap())
            .collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(pts.len(), 5);
        for (got, want) in pts.iter().zip([-1.0, -0.5, 0.0, 0.5, 1.0]) {
            assert!((got - want).abs() < 1e-9);
        }
        // matrix symmetric with zero diagonal comes from construction;
        // check distances are Euclidean here
        for i in 0..net.len() {
            assert_eq!(net.dist[i][i], 0.0);
            for j in 0..net.len() {
                assert!((net.dist[i][j] - net.dist[j][i]).abs() < 1e-12);
            }
        }
    }

    // --- randomized suites ---

    fn random_pattern(rng: &mut ChaCha8Rng, max_stitches: usize) -> SmockingPattern {
        loop {
            let n = rng.gen_range(1..=max_stitches);
            let mut shapes = Vec::new();
            for _ in 0..n {
                let x = rng.gen_range(-3.0..3.0);
                let y = rng.gen_range(-3.0..3.0);
                let shape = match rng.gen_range(0..4) {
                    0 => Shape::Ball { center: pt(&[x, y]), radius: rng.gen_range(0.1..0.4) },
                    1 => {
                        let w = rng.gen_range(0.1..0.6);
                        let h = rng.gen_range(0.1..0.6);
                        Shape::Box(AxisBox::new(pt(&[x, y]), pt(&[x + w, y + h])).unwrap())
                    }
                    2 => Shape::Segment {
                        a: pt(&[x, y]),
                        b: pt(&[x + rng.gen_range(-0.6..0.6), y + rng.gen_range(-0.6..0.6)]),
                    },
                    _ => Shape::Cloud { points: vec![pt(&[x, y])] },
                };
                shapes.push(shape);
            }
            // keep separations comfortably above tolerance
            let mut ok = true;
            'outer: for i in 0..shapes.len() {
                for j in i + 1..shapes.len() {
                    if dist_shape_shape(&shapes[i], &shapes[j]).unwrap() < 0.3 {
                        ok = false;
                        break 'outer;
                    }
                }
            }
            if !ok {
                continue;
            }
            if let Ok(p) = validate_pattern(shapes, window2(10.0)) {
                return p;
            }
        }
    }

    fn random_point(rng: &mut ChaCha8Rng) -> Point {
        pt(&[rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)])
    }

    #[test]
    fn metric_axioms_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..60 {
            let s = SmockedSpace::with_origin_base(random_pattern(&mut rng, 6)).unwrap();
            for _ in 0..5 {
                let (a, b, c) = (random_point(&mut rng), random_point(&mut rng), random_point(&mut rng));
                let dab = pseudometric(&s, &a, &b).unwrap();
                let dba = pseudometric(&s, &b, &a).unwrap();
                let dac = pseudometric(&s, &a, &c).unwrap();
                let dcb = pseudometric(&s, &c, &b).unwrap();
                assert!(dab >= 0.0);
                assert!((dab - dba).abs() < 1e-9);
                assert!(dab <= dac + dcb + 1e-9);
                // collapsing never increases distance
                assert!(dab <= a.dist(&b) + 1e-9);
            }
        }
    }

    #[test]
    fn engine_matches_oracle_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let s = SmockedSpace::with_origin_base(random_pattern(&mut rng, 5)).unwrap();
            let n = s.pattern.stitches.len();
            for _ in 0..3 {
                let (v, w) = (random_point(&mut rng), random_point(&mut rng));
                let engine = pseudometric(&s, &v, &w).unwrap();
                let d0 = v.dist(&w);
                let m = crossing_bound(d0.max(1e-6), s.pattern.delta.min(1e9)).unwrap();
                let mut oracle = f64::INFINITY;
                for k in 0..=m.min(n) {
                    oracle = oracle.min(d_k_exact(&s, &v, &w, k).unwrap());
                }
                // free-point oracle only applies when neither endpoint is
                // inside a stitch
                let pv = project(&s.pattern, &v).unwrap();
                let pw = project(&s.pattern, &w).unwrap();
                if matches!(pv, SpacePoint::Free(_)) && matches!(pw, SpacePoint::Free(_)) {
                    assert!(
                        (engine - oracle).abs() < 1e-9,
                        "engine {engine} oracle {oracle}"
                    );
                }
            }
        }
    }

    #[test]
    fn refinement_never_increases_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..30 {
            let big = random_pattern(&mut rng, 5);
            if big.stitches.len() < 2 {
                continue;
            }
            let small_shapes: Vec<Shape> = big.stitches[..big.stitches.len() - 1]
                .iter()
                .map(|s| s.shape.clone())
                .collect();
            let small = validate_pattern(small_shapes, big.window.clone()).unwrap();
            let sb = SmockedSpace::with_origin_base(big).unwrap();
            let ss = SmockedSpace::with_origin_base(small).unwrap();
            for _ in 0..4 {
                let (v, w) = (random_point(&mut rng), random_point(&mut rng));
                let db = pseudometric(&sb, &v, &w).unwrap();
                let ds = pseudometric(&ss, &v, &w).unwrap();
                assert!(db <= ds + 1e-9);
            }
        }
    }

    #[test]
    fn one_dimensional_exact_formula_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            // random disjoint intervals on the line
            let mut lo = -4.0;
            let mut shapes = Vec::new();
            while lo < 3.0 && shapes.len() < 5 {
                let start = lo + rng.gen_range(0.2..1.0);
                let len = rng.gen_range(0.1..0.8);
                shapes.push(interval(start, start + len));
                lo = start + len;
            }
            let p = validate_pattern(shapes, window1(-10.0, 10.0)).unwrap();
            let s = SmockedSpace::with_origin_base(p).unwrap();
            let a: f64 = rng.gen_range(-5.0..5.0);
            let b: f64 = rng.gen_range(-5.0..5.0);
            let (lo, hi) = (a.min(b), a.max(b));
            // Euclidean length minus collapsed overlap
            let mut collapsed = 0.0;
            for st in &s.pattern.stitches {
                if let Shape::Box(bx) = &st.shape {
                    let l = bx.min.coords[0].max(lo);
                    let h = bx.max.coords[0].min(hi);
                    collapsed += (h - l).max(0.0);
                }
            }
            let expected = (hi - lo) - collapsed;
            let engine = pseudometric(&s, &pt(&[a]), &pt(&[b])).unwrap();
            assert!((engine - expected).abs() < 1e-9, "engine {engine} expected {expected}");
        }
    }

    #[test]
    fn crossing_bound_holds_on_random_polylines() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..60 {
            let p = random_pattern(&mut rng, 6);
            let delta = p.delta;
            if !delta.is_finite() {
                continue;
            }
            // random polyline with a handful of vertices
            let mut verts = vec![random_point(&mut rng)];
            for _ in 0..rng.gen_range(1..4) {
                verts.push(random_point(&mut rng));
            }
            let mut length = 0.0;
            for w in verts.windows(2) {
                length += w[0].dist(&w[1]);
            }
            if length == 0.0 {
                continue;
            }
            let mut met = 0usize;
            for st in &p.stitches {
                let hit = verts.windows(2).any(|w| {
                    let seg = Shape::Segment { a: w[0].clone(), b: w[1].clone() };
                    dist_shape_shape(&seg, &st.shape).unwrap() <= 1e-9
                });
                if hit {
                    met += 1;
                }
            }
            let bound = crossing_bound(length, delta).unwrap();
            assert!(met <= bound, "met {met} bound {bound}");
        }
    }

    #[test]
    fn preimage_radius_contains_sampled_ball() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let p = random_pattern(&mut rng, 4);
            let l = p.l_max();
            let delta = p.delta;
            let s = SmockedSpace::with_origin_base(p).unwrap();
            let r = 1.5;
            let big_r = if l == 0.0 { r } else { preimage_radius(r, l, delta.min(1e9)).unwrap() };
            for _ in 0..50 {
                let z = random_point(&mut rng);
                let d = pseudometric(&s, &Point::origin(2), &z).unwrap();
                if d <= r {
                    assert!(z.norm() <= big_r + 1e-9);
                }
            }
        }
    }
}
