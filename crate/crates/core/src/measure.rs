//! Pushforward of Lebesgue measure under the smocking map: ball volumes,
//! integration of test functions, and weak-convergence experiments.
//!
//! Collapsing a positive-volume stitch produces an atom of that Euclidean
//! volume at the collapsed point; atoms are always handled explicitly, never
//! by sampling.

use crate::euclid::{AxisBox, Point, Shape};
use crate::space::{
    self, preimage_radius, smocked_distance, SmockedSpace, SpaceError, SpacePoint,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("exact evaluation requires dimension 1 with interval stitches")]
    Exact1dUnavailable,
    #[error("support box escapes the pattern window")]
    SupportEscapesWindow,
    #[error(transparent)]
    Space(#[from] SpaceError),
}

pub type Result<T> = std::result::Result<T, MeasureError>;

/// Evaluation method for pushforward quantities.
#[derive(Debug, Clone, Copy)]
pub enum Method {
    /// Endpoint arithmetic; only valid on the line.
    Exact1d,
    MonteCarlo { seed: u64, samples: usize },
    Grid { step: f64 },
}

/// A value with an explicit error bar (zero for exact paths; one standard
/// error for Monte Carlo; a resolution bound for grids).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Bounded continuous test functions for the weak-convergence proxy.
#[derive(Debug, Clone)]
pub enum TestFunction {
    /// `(1 - (|x-c|/r)^2)^2` inside radius r, zero outside.
    Bump { center: Point, radius: f64 },
    /// `max(0, 1 - slope * |x-c|)`.
    Tent { center: Point, slope: f64 },
    Constant(f64),
}

impl TestFunction {
    pub fn eval(&self, x: &Point) -> f64 {
        match self {
            TestFunction::Bump { center, radius } => {
                let u = x.dist(center) / radius;
                if u >= 1.0 {
                    0.0
                } else {
                    let t = 1.0 - u * u;
                    t * t
                }
            }
            TestFunction::Tent { center, slope } => (1.0 - slope * x.dist(center)).max(0.0),
            TestFunction::Constant(c) => *c,
        }
    }

    /// Value at a point of the quotient; collapsed stitches evaluate at
    /// their anchor.
    pub fn eval_space(&self, space: &SmockedSpace, p: &SpacePoint) -> f64 {
        match p {
            SpacePoint::Free(x) => self.eval(x),
            SpacePoint::Collapsed(id) => self.eval(&space.pattern.stitches[*id].shape.anchor()),
        }
    }

    fn lipschitz(&self) -> f64 {
        match self {
            // max |d/du (1-u^2)^2| = 8 / (3 sqrt(3)) at u = 1/sqrt(3)
            TestFunction::Bump { radius, .. } => 8.0 / (3.0 * 3.0f64.sqrt()) / radius,
            TestFunction::Tent { slope, .. } => *slope,
            TestFunction::Constant(_) => 0.0,
        }
    }

    /// Exact 1-D integral over the interval [lo, hi].
    fn integral_1d(&self, lo: f64, hi: f64) -> f64 {
        match self {
            TestFunction::Constant(c) => c * (hi - lo),
            TestFunction::Tent { center, slope } => {
                let c = center.coords[0];
                let half = 1.0 / slope;
                // antiderivative of max(0, 1 - s|x-c|) on each side
                let piece = |a: f64, b: f64| -> f64 {
                    // integrate over [a, b] intersected with the support
                    let a = a.max(c - half);
                    let b = b.min(c + half);
                    if a >= b {
                        return 0.0;
                    }
                    let anti = |x: f64| {
                        if x <= c {
                            (x - c) + slope * 0.5 * ((x - c) * (x - c)) * if x <= c { 1.0 } else { -1.0 }
                        } else {
                            (x - c) - slope * 0.5 * (x - c) * (x - c)
                        }
                    };
                    // split at the peak
                    let mut total = 0.0;
                    if a < c {
                        let b1 = b.min(c);
                        total += (anti(b1) - anti(a)).max(0.0);
                    }
                    if b > c {
                        let a1 = a.max(c);
                        total += anti(b) - anti(a1);
                    }
                    total
                };
                piece(lo, hi)
            }
            TestFunction::Bump { center, radius } => {
                let c = center.coords[0];
                let a = lo.max(c - radius);
                let b = hi.min(c + radius);
                if a >= b {
                    return 0.0;
                }
                // antiderivative of (1 - u^2)^2 in u = (x - c)/r, times r
                let anti = |x: f64| {
                    let u = (x - c) / radius;
                    radius * (u - 2.0 * u.powi(3) / 3.0 + u.powi(5) / 5.0)
                };
                anti(b) - anti(a)
            }
        }
    }
}

/// Stitch interval `[lo, hi]` for the exact 1-D paths.
fn interval_of(shape: &Shape) -> Option<(f64, f64)> {
    match shape {
        Shape::Box(b) if b.dim() == 1 => Some((b.min.coords[0], b.max.coords[0])),
        Shape::Ball { center, radius } if center.dim() == 1 => {
            Some((center.coords[0] - radius, center.coords[0] + radius))
        }
        Shape::Segment { a, b } if a.dim() == 1 => {
            Some((a.coords[0].min(b.coords[0]), a.coords[0].max(b.coords[0])))
        }
        Shape::Cloud { points } if points.len() == 1 && points[0].dim() == 1 => {
            Some((points[0].coords[0], points[0].coords[0]))
        }
        _ => None,
    }
}

fn sorted_intervals_1d(space: &SmockedSpace) -> Result<Vec<(f64, f64)>> {
    if space.pattern.dimension != 1 {
        return Err(MeasureError::Exact1dUnavailable);
    }
    let mut iv: Vec<(f64, f64)> = space
        .pattern
        .stitches
        .iter()
        .map(|s| interval_of(&s.shape).ok_or(MeasureError::Exact1dUnavailable))
        .collect::<Result<_>>()?;
    iv.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(iv)
}

/// Walk `budget` units of free length to the right of `start`, jumping over
/// collapsed intervals at zero cost; returns the stopping coordinate.
fn sweep(intervals: &[(f64, f64)], start: f64, mut budget: f64, rightward: bool) -> f64 {
    let mut pos = start;
    loop {
        let next = if rightward {
            intervals
                .iter()
                .filter(|&&(lo, hi)| hi > pos + 1e-15 || (lo <= pos && pos < hi))
                .map(|&(lo, hi)| (lo.max(pos), hi))
                .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        } else {
            intervals
                .iter()
                .filter(|&&(lo, hi)| lo < pos - 1e-15 || (lo < pos && pos <= hi))
                .map(|&(lo, hi)| (hi.min(pos), lo))
                .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        };
        match next {
            Some((edge, far)) => {
                let free = (edge - pos).abs();
                if budget <= free {
                    return if rightward { pos + budget } else { pos - budget };
                }
                budget -= free;
                pos = far;
            }
            None => return if rightward { pos + budget } else { pos - budget },
        }
    }
}

fn preimage_box(space: &SmockedSpace, center_lift: &Point, r: f64) -> Result<AxisBox> {
    let l = space.pattern.l_max();
    let reach = if l == 0.0 {
        r
    } else {
        preimage_radius(r, l, space.pattern.delta)?
    };
    let bx = AxisBox::new(
        Point::new(center_lift.coords.iter().map(|c| c - reach).collect()),
        Point::new(center_lift.coords.iter().map(|c| c + reach).collect()),
    )
    .map_err(SpaceError::from)?;
    bx.intersect(&space.pattern.window)
        .ok_or(MeasureError::SupportEscapesWindow)
}

fn center_lift(space: &SmockedSpace, center: &SpacePoint) -> Point {
    match center {
        SpacePoint::Free(p) => p.clone(),
        SpacePoint::Collapsed(id) => space.pattern.stitches[*id].shape.anchor(),
    }
}

/// Deterministic Monte Carlo: batches draw from per-batch seeded streams and
/// reduce in batch order.
fn monte_carlo_mean<F>(seed: u64, samples: usize, bx: &AxisBox, f: F) -> (f64, f64)
where
    F: Fn(&Point) -> f64 + Sync,
{
    const BATCH: usize = 8192;
    let batches = samples.div_ceil(BATCH);
    let partials: Vec<(f64, f64, usize)> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64 + 1);
            let count = BATCH.min(samples - b * BATCH);
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for _ in 0..count {
                let p = Point::new(
                    bx.min
                        .coords
                        .iter()
                        .zip(&bx.max.coords)
                        .map(|(lo, hi)| rng.gen_range(*lo..*hi))
                        .collect(),
                );
                let v = f(&p);
                sum += v;
                sumsq += v * v;
            }
            (sum, sumsq, count)
        })
        .collect();
    let (sum, sumsq, n) = partials
        .iter()
        .fold((0.0, 0.0, 0usize), |acc, p| (acc.0 + p.0, acc.1 + p.1, acc.2 + p.2));
    let n_f = n as f64;
    let mean = sum / n_f;
    let var = (sumsq / n_f - mean * mean).max(0.0);
    (mean, (var / n_f).sqrt())
}

/// Pushforward measure of the open metric ball `B_r(center)`.
pub fn ball_volume(
    space: &SmockedSpace,
    method: Method,
    center: &SpacePoint,
    r: f64,
) -> Result<Estimate> {
    if r <= 0.0 {
        return Err(SpaceError::NonPositive("r").into());
    }
    match method {
        Method::Exact1d => {
            let intervals = sorted_intervals_1d(space)?;
            let (start_left, start_right) = match center {
                SpacePoint::Free(p) => (p.coords[0], p.coords[0]),
                SpacePoint::Collapsed(id) => {
                    interval_of(&space.pattern.stitches[*id].shape).unwrap()
                }
            };
            let right = sweep(&intervals, start_right, r, true);
            let left = sweep(&intervals, start_left, r, false);
            Ok(Estimate { value: right - left, error: 0.0 })
        }
        Method::MonteCarlo { seed, samples } => {
            let lift = center_lift(space, center);
            let bx = preimage_box(space, &lift, r)?;
            let mut atom_total = 0.0;
            for s in &space.pattern.stitches {
                if smocked_distance(space, center, &SpacePoint::Collapsed(s.id))? < r {
                    atom_total += s.shape.volume();
                }
            }
            let (mean, se) = monte_carlo_mean(seed, samples, &bx, |p| {
                let sp = space::project(&space.pattern, p).expect("dims match");
                if matches!(sp, SpacePoint::Collapsed(_)) {
                    return 0.0; // stitch mass counted exactly above
                }
                match smocked_distance(space, center, &sp) {
                    Ok(d) if d < r => 1.0,
                    _ => 0.0,
                }
            });
            let vol = bx.volume();
            Ok(Estimate { value: atom_total + vol * mean, error: vol * se })
        }
        Method::Grid { step } => {
            if step <= 0.0 {
                return Err(SpaceError::NonPositive("step").into());
            }
            let lift = center_lift(space, center);
            let bx = preimage_box(space, &lift, r)?;
            let mut atom_total = 0.0;
            for s in &space.pattern.stitches {
                if smocked_distance(space, center, &SpacePoint::Collapsed(s.id))? < r {
                    atom_total += s.shape.volume();
                }
            }
            let dim = space.pattern.dimension;
            let cell = step.powi(dim as i32);
            let fuzz = step * (dim as f64).sqrt();
            let mut inside = 0usize;
            let mut ambiguous = 0usize;
            for p in bx.grid(step) {
                let sp = space::project(&space.pattern, &p)?;
                if matches!(sp, SpacePoint::Collapsed(_)) {
                    continue;
                }
                let d = smocked_distance(space, center, &sp)?;
                if d < r {
                    inside += 1;
                }
                if (d - r).abs() <= fuzz {
                    ambiguous += 1;
                }
            }
            Ok(Estimate {
                value: atom_total + inside as f64 * cell,
                error: ambiguous as f64 * cell + fuzz * bx.volume().powf(1.0 - 1.0 / dim as f64),
            })
        }
    }
}

/// `âˆ« phi(pi(z)) dL^N(z)` over the support box; atoms at collapsed stitches
/// contribute `phi(anchor) * stitch volume` exactly under every method.
pub fn integrate(
    space: &SmockedSpace,
    method: Method,
    phi: &TestFunction,
    support: &AxisBox,
) -> Result<Estimate> {
    if support.intersect(&space.pattern.window).map(|b| b != *support).unwrap_or(true) {
        return Err(MeasureError::SupportEscapesWindow);
    }
    let mut atom_total = 0.0;
    for s in &space.pattern.stitches {
        let shape_box = s.shape.bounding_box();
        if shape_box.intersect(support).is_some() {
            // stitches are treated as wholly inside or outside the support;
            // the experiment layer keeps supports clear of stitch boundaries
            atom_total += phi.eval(&s.shape.anchor()) * s.shape.volume();
        }
    }
    match method {
        Method::Exact1d => {
            let intervals = sorted_intervals_1d(space)?;
            let (lo, hi) = (support.min.coords[0], support.max.coords[0]);
            // integrate over the free part: support minus the stitches
            let mut total = 0.0;
            let mut pos = lo;
            for &(slo, shi) in &intervals {
                let a = slo.max(lo);
                let b = shi.min(hi);
                if a > pos {
                    total += phi.integral_1d(pos, a.min(hi));
                }
                pos = pos.max(b.min(hi));
                if pos >= hi {
                    break;
                }
            }
            if pos < hi {
                total += phi.integral_1d(pos, hi);
            }
            Ok(Estimate { value: atom_total + total, error: 0.0 })
        }
        Method::MonteCarlo { seed, samples } => {
            let (mean, se) = monte_carlo_mean(seed, samples, support, |p| {
                match space::project(&space.pattern, p) {
                    Ok(SpacePoint::Free(_)) => phi.eval(p),
                    _ => 0.0, // stitch mass counted exactly above
                }
            });
            let vol = support.volume();
            Ok(Estimate { value: atom_total + vol * mean, error: vol * se })
        }
        Method::Grid { step } => {
            if step <= 0.0 {
                return Err(SpaceError::NonPositive("step").into());
            }
            let dim = support.dim();
            let cell = step.powi(dim as i32);
            let mut total = 0.0;
            let mut cells = 0usize;
            for p in support.grid(step) {
                if matches!(space::project(&space.pattern, &p)?, SpacePoint::Free(_)) {
                    total += phi.eval(&p);
                }
                cells += 1;
            }
            let est = total * cell;
            // normalize the grid cell volume to the true box volume
            let scale = support.volume() / (cells as f64 * cell);
            Ok(Estimate {
                value: atom_total + est * scale,
                error: phi.lipschitz() * step * (dim as f64).sqrt() * support.volume(),
            })
        }
    }
}

/// One row of a weak-convergence experiment: integral of one test function
/// against `mu_k` and against the limit measure.
#[derive(Debug, Clone)]
pub struct WeakConvergenceRow {
    pub k: u32,
    pub phi_index: usize,
    pub integral_k: Estimate,
    pub integral_limit: Estimate,
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct WeakConvergenceReport {
    pub rows: Vec<WeakConvergenceRow>,
    /// Set when some test function's gap fails to decrease along k.
    pub non_decreasing_gap: bool,
}

pub fn weak_convergence_check(
    patterns: &[(u32, crate::space::SmockingPattern)],
    phis: &[TestFunction],
    limit: &SmockedSpace,
    method: Method,
    support: &AxisBox,
) -> Result<WeakConvergenceReport> {
    let mut rows = Vec::with_capacity(patterns.len() * phis.len());
    let mut limit_integrals = Vec::with_capacity(phis.len());
    for phi in phis {
        limit_integrals.push(integrate(limit, method, phi, support)?);
    }
    for (k, pattern) in patterns {
        let space = SmockedSpace::with_origin_base(pattern.clone())?;
        for (i, phi) in phis.iter().enumerate() {
            let est = integrate(&space, method, phi, support)?;
            rows.push(WeakConvergenceRow {
                k: *k,
                phi_index: i,
                integral_k: est,
                integral_limit: limit_integrals[i],
                gap: (est.value - limit_integrals[i].value).abs(),
            });
        }
    }
    let mut non_decreasing = false;
    for i in 0..phis.len() {
        let gaps: Vec<f64> = rows.iter().filter(|r| r.phi_index == i).map(|r| r.gap).collect();
        if gaps.len() >= 2 {
            let first_half: f64 = gaps[..gaps.len() / 2].iter().sum();
            let second_half: f64 = gaps[gaps.len() - gaps.len() / 2..].iter().sum();
            if second_half > first_half + 1e-12 {
                non_decreasing = true;
            }
        }
    }
    Ok(WeakConvergenceReport { rows, non_decreasing_gap: non_decreasing })
}
