//! Gromov-Hausdorff machinery on finite metric spaces: correspondences and
//! their distortion, an exact small-instance solver, scalable upper/lower
//! bounds, and convergence experiment drivers over pattern families.

use crate::space::{self, SmockedSpace, SmockingPattern};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GhError {
    #[error("distance matrix is not square or label count mismatches")]
    ShapeMismatch,
    #[error("matrix fails metric axioms: {0}")]
    NotAMetric(String),
    #[error("base index {0} out of range")]
    BadBaseIndex(usize),
    #[error("correspondence does not cover both spaces")]
    CoverageFailure,
    #[error("instance size exceeds the exact enumeration budget ({0} map pairs)")]
    BudgetExceeded(f64),
    #[error(transparent)]
    Space(#[from] space::SpaceError),
}

pub type Result<T> = std::result::Result<T, GhError>;

/// A finite pointed metric space given by labels and a distance matrix.
#[derive(Debug, Clone)]
pub struct FiniteMetricSpace {
    pub labels: Vec<String>,
    pub dist: Vec<Vec<f64>>,
    pub base_index: usize,
}

impl FiniteMetricSpace {
    pub fn new(labels: Vec<String>, dist: Vec<Vec<f64>>, base_index: usize) -> Result<Self> {
        let n = labels.len();
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(GhError::ShapeMismatch);
        }
        if base_index >= n {
            return Err(GhError::BadBaseIndex(base_index));
        }
        for i in 0..n {
            if dist[i][i].abs() > 1e-9 {
                return Err(GhError::NotAMetric(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                if dist[i][j] < -1e-9 || (dist[i][j] - dist[j][i]).abs() > 1e-9 {
                    return Err(GhError::NotAMetric(format!("asymmetry at ({i},{j})")));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if dist[i][j] > dist[i][k] + dist[k][j] + 1e-9 {
                        return Err(GhError::NotAMetric(format!(
                            "triangle violation at ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        Ok(FiniteMetricSpace { labels, dist, base_index })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn diam(&self) -> f64 {
        self.dist
            .iter()
            .flat_map(|row| row.iter().copied())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, lambda: f64) -> FiniteMetricSpace {
        FiniteMetricSpace {
            labels: self.labels.clone(),
            dist: self
                .dist
                .iter()
                .map(|row| row.iter().map(|d| d * lambda).collect())
                .collect(),
            base_index: self.base_index,
        }
    }
}

/// A relation between two finite spaces covering both factors.
#[derive(Debug, Clone)]
pub struct Correspondence {
    pub pairs: Vec<(usize, usize)>,
}

impl Correspondence {
    pub fn identity(n: usize) -> Self {
        Correspondence { pairs: (0..n).map(|i| (i, i)).collect() }
    }

    fn covers(&self, n: usize, m: usize) -> bool {
        let mut x = vec![false; n];
        let mut y = vec![false; m];
        for &(i, j) in &self.pairs {
            if i >= n || j >= m {
                return false;
            }
            x[i] = true;
            y[j] = true;
        }
        x.iter().all(|&b| b) && y.iter().all(|&b| b)
    }
}

/// Sup over pairs of related pairs of the distance discrepancy.
pub fn distortion(
    c: &Correspondence,
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
) -> Result<f64> {
    if !c.covers(x.len(), y.len()) {
        return Err(GhError::CoverageFailure);
    }
    let mut worst = 0.0f64;
    for &(i1, j1) in &c.pairs {
        for &(i2, j2) in &c.pairs {
            worst = worst.max((x.dist[i1][i2] - y.dist[j1][j2]).abs());
        }
    }
    Ok(worst)
}

fn next_map(map: &mut [usize], range: usize) -> bool {
    for slot in map.iter_mut() {
        *slot += 1;
        if *slot < range {
            return true;
        }
        *slot = 0;
    }
    false
}

fn map_self_distortion(map: &[usize], x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> f64 {
    let mut worst = 0.0f64;
    for (i1, &j1) in map.iter().enumerate() {
        for (i2, &j2) in map.iter().enumerate().skip(i1 + 1) {
            worst = worst.max((x.dist[i1][i2] - y.dist[j1][j2]).abs());
        }
    }
    worst
}

/// Exact GH distance as half the minimal correspondence distortion, by
/// enumerating all map pairs `f: X -> Y`, `g: Y -> X` and scoring
/// `graph(f) + transpose(graph(g))`. Every correspondence contains such a
/// sub-correspondence of no larger distortion, so the minimum is exact.
pub fn gh_exact_small(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    budget: Option<f64>,
) -> Result<f64> {
    let n = x.len();
    let m = y.len();
    let budget = budget.unwrap_or(2e7);
    let combos = (m as f64).powi(n as i32) * (n as f64).powi(m as i32);
    if combos > budget {
        return Err(GhError::BudgetExceeded(combos));
    }

    // precompute every g with its internal distortion
    let mut gs: Vec<(Vec<usize>, f64)> = Vec::new();
    let mut g = vec![0usize; m];
    loop {
        gs.push((g.clone(), map_self_distortion(&g, y, x)));
        if !next_map(&mut g, n) {
            break;
        }
    }
    gs.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());

    let mut best = f64::INFINITY;
    let mut f = vec![0usize; n];
    loop {
        let a = map_self_distortion(&f, x, y);
        if a < best {
            for (g, b) in &gs {
                if *b >= best {
                    break; // sorted: nothing better follows
                }
                let mut worst = a.max(*b);
                'cross: for (i, &fi) in f.iter().enumerate() {
                    for (j, &gj) in g.iter().enumerate() {
                        let d = (x.dist[i][gj] - y.dist[fi][j]).abs();
                        if d > worst {
                            worst = d;
                            if worst >= best {
                                break 'cross;
                            }
                        }
                    }
                }
                if worst < best {
                    best = worst;
                }
            }
        }
        if !next_map(&mut f, m) {
            break;
        }
    }
    Ok(best / 2.0)
}

fn greedy_correspondence(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> Correspondence {
    let n = x.len();
    let m = y.len();
    // order X by distance from the basepoint; assign each to the Y point
    // minimizing the distortion against the pairs placed so far
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        x.dist[x.base_index][a]
            .partial_cmp(&x.dist[x.base_index][b])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(n + m);
    for &i in &order {
        let mut best_j = 0usize;
        let mut best_cost = f64::INFINITY;
        for j in 0..m {
            let mut cost: f64 = 0.0;
            for &(pi, pj) in &pairs {
                cost = cost.max((x.dist[i][pi] - y.dist[j][pj]).abs());
                if cost >= best_cost {
                    break;
                }
            }
            if pairs.is_empty() {
                cost = (x.dist[x.base_index][i] - y.dist[y.base_index][j]).abs();
            }
            if cost < best_cost {
                best_cost = cost;
                best_j = j;
            }
        }
        pairs.push((i, best_j));
    }
    // cover the Y side
    let mut covered = vec![false; m];
    for &(_, j) in &pairs {
        covered[j] = true;
    }
    for j in 0..m {
        if covered[j] {
            continue;
        }
        let mut best_i = 0usize;
        let mut best_cost = f64::INFINITY;
        for i in 0..n {
            let mut cost: f64 = 0.0;
            for &(pi, pj) in &pairs {
                cost = cost.max((x.dist[i][pi] - y.dist[j][pj]).abs());
                if cost >= best_cost {
                    break;
                }
            }
            if cost < best_cost {
                best_cost = cost;
                best_i = i;
            }
        }
        pairs.push((best_i, j));
    }
    Correspondence { pairs }
}

/// Upper bound: half the distortion of a greedily built correspondence,
/// refined by local reassignment of the worst pair.
pub fn gh_upper(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> f64 {
    let mut c = greedy_correspondence(x, y);
    let mut dis = distortion(&c, x, y).expect("greedy correspondence covers both sides");
    for _ in 0..4 {
        // locate the worst pair of pairs
        let mut worst = (0usize, 0usize);
        let mut worst_d = -1.0;
        for (a, &(i1, j1)) in c.pairs.iter().enumerate() {
            for (b, &(i2, j2)) in c.pairs.iter().enumerate() {
                let d = (x.dist[i1][i2] - y.dist[j1][j2]).abs();
                if d > worst_d {
                    worst_d = d;
                    worst = (a, b);
                }
            }
        }
        let mut improved = false;
        for &slot in &[worst.0, worst.1] {
            let (i, old_j) = c.pairs[slot];
            for j in 0..y.len() {
                if j == old_j {
                    continue;
                }
                c.pairs[slot] = (i, j);
                if let Ok(d) = distortion(&c, x, y) {
                    if d < dis {
                        dis = d;
                        improved = true;
                        break;
                    }
                }
                c.pairs[slot] = (i, old_j);
            }
            if improved {
                break;
            }
        }
        if !improved {
            break;
        }
    }
    dis / 2.0
}

/// Lower bound from the diameter gap.
pub fn gh_lower(x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> f64 {
    0.5 * (x.diam() - y.diam()).abs()
}

/// One row of a pointed-convergence experiment.
#[derive(Debug, Clone, Copy)]
pub struct CurveRow {
    pub k: u32,
    pub radius: f64,
    pub gh_upper: f64,
    pub gh_lower: f64,
    pub net_eps: f64,
}

/// GH brackets between nets of a family `X_k` and a fixed limit space, per k.
/// Independent k-queries fan out in parallel; rows merge in ascending k.
pub fn pgh_curve(
    patterns: &[(u32, SmockingPattern)],
    limit: &SmockedSpace,
    radius: f64,
    eps: f64,
    exact_budget: f64,
) -> Result<Vec<CurveRow>> {
    let limit_net = space::ball_net(limit, &limit.basepoint, radius, eps)?;
    let mut rows: Vec<CurveRow> = patterns
        .par_iter()
        .map(|(k, pattern)| -> Result<CurveRow> {
            let s = SmockedSpace::with_origin_base(pattern.clone())?;
            let net = space::ball_net(&s, &s.basepoint, radius, eps)?;
            let combos = (limit_net.len() as f64).powi(net.len() as i32)
                * (net.len() as f64).powi(limit_net.len() as i32);
            let (upper, lower) = if combos <= exact_budget {
                let exact = gh_exact_small(&net, &limit_net, Some(exact_budget))?;
                (exact, exact)
            } else {
                (gh_upper(&net, &limit_net), gh_lower(&net, &limit_net))
            };
            Ok(CurveRow { k: *k, radius, gh_upper: upper, gh_lower: lower, net_eps: eps })
        })
        .collect::<Result<_>>()?;
    rows.sort_by_key(|r| r.k);
    Ok(rows)
}

/// Per-k local smocking bounds near the basepoint, computed by
/// self-consistent radius growth: the reported diameter bound `l_r` covers
/// exactly the stitches meeting `B_{r+l_r}(0)`.
#[derive(Debug, Clone, Copy)]
pub struct LocalBoundsRow {
    pub k: u32,
    pub l_r: f64,
    /// `+inf` when at most one stitch is in range.
    pub delta_r: f64,
    pub stitch_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stabilization {
    /// Bounds settle (or become vacuous) along the tail of the sweep.
    Stable,
    /// Minimal separation collapses toward zero.
    DegeneratingSeparation,
    /// Stitch diameters keep growing in range.
    GrowingDiameter,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct LocalBoundsReport {
    pub rows: Vec<LocalBoundsRow>,
    pub verdict: Stabilization,
}

pub fn local_constants_report(
    patterns: &[(u32, SmockingPattern)],
    r: f64,
) -> Result<LocalBoundsReport> {
    let mut rows = Vec::with_capacity(patterns.len());
    for (k, pattern) in patterns {
        let origin = crate::euclid::Point::origin(pattern.dimension);
        // grow the radius until the stitch set meeting B_{r + l}(0) is
        // consistent with its own diameter bound l
        let mut l = 0.0f64;
        let mut in_range: Vec<&space::Stitch> = Vec::new();
        loop {
            let reach = r + l;
            let mut next: Vec<&space::Stitch> = Vec::new();
            for s in &pattern.stitches {
                if crate::euclid::dist_point_shape(&origin, &s.shape)
                    .map_err(space::SpaceError::from)?
                    <= reach
                {
                    next.push(s);
                }
            }
            let next_l = next.iter().map(|s| s.shape.diam()).fold(0.0, f64::max);
            if next.len() == in_range.len() && (next_l - l).abs() < 1e-12 {
                in_range = next;
                break;
            }
            in_range = next;
            l = next_l;
        }
        let mut delta_r = f64::INFINITY;
        for i in 0..in_range.len() {
            for j in i + 1..in_range.len() {
                delta_r = delta_r.min(
                    crate::euclid::dist_shape_shape(&in_range[i].shape, &in_range[j].shape)
                        .map_err(space::SpaceError::from)?,
                );
            }
        }
        rows.push(LocalBoundsRow { k: *k, l_r: l, delta_r, stitch_count: in_range.len() });
    }
    let verdict = classify_stabilization(&rows);
    Ok(LocalBoundsReport { rows, verdict })
}

pub fn classify_stabilization(rows: &[LocalBoundsRow]) -> Stabilization {
    if rows.len() < 2 {
        return Stabilization::Inconclusive;
    }
    let tail_start = rows.len() - (rows.len() / 2).max(1);
    let tail = &rows[tail_start..];
    if tail.iter().all(|r| r.stitch_count == 0) {
        return Stabilization::Stable; // bounds hold vacuously
    }
    let first_finite_delta = rows
        .iter()
        .map(|r| r.delta_r)
        .find(|d| d.is_finite());
    let tail_min_delta = tail.iter().map(|r| r.delta_r).fold(f64::INFINITY, f64::min);
    if let Some(d0) = first_finite_delta {
        if tail_min_delta <= d0 / 4.0 {
            return Stabilization::DegeneratingSeparation;
        }
    }
    let first_l = rows.iter().map(|r| r.l_r).find(|l| *l > 0.0);
    let tail_max_l = tail.iter().map(|r| r.l_r).fold(0.0, f64::max);
    if let Some(l0) = first_l {
        if tail_max_l >= 4.0 * l0 {
            return Stabilization::GrowingDiameter;
        }
    }
    let l_settled = tail.windows(2).all(|w| (w[0].l_r - w[1].l_r).abs() < 1e-9);
    let delta_ok = tail_min_delta > 0.0
        && (tail_min_delta.is_infinite()
            || tail.iter().map(|r| r.delta_r).fold(0.0, f64::max) <= 2.0 * tail_min_delta);
    if l_settled && delta_ok {
        Stabilization::Stable
    } else {
        Stabilization::Inconclusive
    }
}
