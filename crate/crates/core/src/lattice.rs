//! Weighted lattice word metrics and the polyhedral norms they homogenize
//! to: the discrete model of tangent cones at infinity.

use num_integer::Integer;
pub use num_rational::Rational64;
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LatticeError {
    #[error("generators do not span R^{0}")]
    GeneratorsDoNotSpan(usize),
    #[error("generator set is not symmetric under negation with equal weights")]
    NotSymmetric,
    #[error("generator has wrong dimension")]
    DimensionMismatch,
    #[error("weights must be positive")]
    NonPositiveWeight,
    #[error("search box provably too small for a certified geodesic")]
    SearchBoxTooSmall,
    #[error("target is not reachable by the generators")]
    Unreachable,
    #[error("lambda * x is not a lattice point")]
    NotALatticePoint,
}

pub type Result<T> = std::result::Result<T, LatticeError>;

/// Symmetric weighted generator set defining the polyhedral norm `F_V` and
/// the word metric `d_G` on the integer lattice.
#[derive(Debug, Clone)]
pub struct NormSpec {
    pub dimension: usize,
    pub generators: Vec<Vec<i64>>,
    pub weights: Vec<f64>,
}

impl NormSpec {
    /// Build from the full symmetric list; validates symmetry and span.
    pub fn new(dimension: usize, generators: Vec<Vec<i64>>, weights: Vec<f64>) -> Result<Self> {
        if generators.len() != weights.len() {
            return Err(LatticeError::NotSymmetric);
        }
        if generators.iter().any(|g| g.len() != dimension) {
            return Err(LatticeError::DimensionMismatch);
        }
        if weights.iter().any(|w| *w <= 0.0) {
            return Err(LatticeError::NonPositiveWeight);
        }
        for (g, w) in generators.iter().zip(&weights) {
            let neg: Vec<i64> = g.iter().map(|c| -c).collect();
            let found = generators
                .iter()
                .zip(&weights)
                .any(|(h, wh)| *h == neg && (wh - w).abs() < 1e-12);
            if !found {
                return Err(LatticeError::NotSymmetric);
            }
        }
        let spec = NormSpec { dimension, generators, weights };
        if spec.rank() < dimension {
            return Err(LatticeError::GeneratorsDoNotSpan(dimension));
        }
        Ok(spec)
    }

    /// Build from one representative per +-pair; negations are added.
    pub fn from_half(dimension: usize, half: &[(Vec<i64>, f64)]) -> Result<Self> {
        let mut generators = Vec::with_capacity(half.len() * 2);
        let mut weights = Vec::with_capacity(half.len() * 2);
        for (g, w) in half {
            generators.push(g.clone());
            weights.push(*w);
            generators.push(g.iter().map(|c| -c).collect());
            weights.push(*w);
        }
        NormSpec::new(dimension, generators, weights)
    }

    fn rank(&self) -> usize {
        let mut rows: Vec<Vec<f64>> = self
            .generators
            .iter()
            .map(|g| g.iter().map(|&c| c as f64).collect())
            .collect();
        let mut rank = 0;
        for col in 0..self.dimension {
            let pivot = (rank..rows.len()).find(|&r| rows[r][col].abs() > 1e-9);
            if let Some(p) = pivot {
                rows.swap(rank, p);
                for r in 0..rows.len() {
                    if r != rank && rows[r][col].abs() > 1e-9 {
                        let f = rows[r][col] / rows[rank][col];
                        for c in 0..self.dimension {
                            rows[r][c] -= f * rows[rank][c];
                        }
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest sup-norm of a generator: the step size of one graph edge.
    pub fn max_step(&self) -> i64 {
        self.generators
            .iter()
            .flat_map(|g| g.iter().map(|c| c.abs()))
            .max()
            .unwrap_or(0)
    }

    /// LCM of |det| over nonsingular n-by-n generator submatrices. Scaling a
    /// lattice point by this factor makes the optimal real representation of
    /// the polyhedral norm integral, so the word metric evaluates it exactly.
    fn denominator_scale(&self) -> i64 {
        let n = self.dimension;
        // one representative per +-pair is enough (signs do not change |det|)
        let mut half: Vec<&Vec<i64>> = Vec::new();
        for g in &self.generators {
            let neg: Vec<i64> = g.iter().map(|c| -c).collect();
            if !half.iter().any(|&h| h == &neg || h == g) {
                half.push(g);
            }
        }
        let mut lcm: i64 = 1;
        let mut combo: Vec<usize> = (0..n).collect();
        if half.len() < n {
            return 1;
        }
        loop {
            let mat: Vec<&Vec<i64>> = combo.iter().map(|&i| half[i]).collect();
            let d = int_det(&mat).abs();
            if d > 0 {
                lcm = lcm.lcm(&d);
            }
            // next combination
            let mut i = n;
            loop {
                if i == 0 {
                    return lcm;
                }
                i -= 1;
                if combo[i] < half.len() - (n - i) {
                    combo[i] += 1;
                    for j in i + 1..n {
                        combo[j] = combo[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }
}

fn int_det(mat: &[&Vec<i64>]) -> i64 {
    let n = mat.len();
    match n {
        1 => mat[0][0],
        2 => mat[0][0] * mat[1][1] - mat[0][1] * mat[1][0],
        _ => {
            let mut det = 0i64;
            for col in 0..n {
                let minor: Vec<Vec<i64>> = mat[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(c, _)| *c != col)
                            .map(|(_, &v)| v)
                            .collect()
                    })
                    .collect();
                let refs: Vec<&Vec<i64>> = minor.iter().collect();
                let sign = if col % 2 == 0 { 1 } else { -1 };
                det += sign * mat[0][col] * int_det(&refs);
            }
            det
        }
    }
}

#[derive(PartialEq)]
struct HeapEntry {
    cost: f64,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap over finite costs; ties resolve by node index
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap()
            .then(other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Explicit integer search box for the word-metric Dijkstra.
#[derive(Debug, Clone)]
pub struct SearchBox {
    pub radius: i64,
}

fn dijkstra_in_box(spec: &NormSpec, p: &[i64], radius: i64) -> Option<f64> {
    let inside = |q: &[i64]| q.iter().all(|c| c.abs() <= radius);
    if !inside(p) {
        return None;
    }
    let mut ids: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut points: Vec<Vec<i64>> = Vec::new();
    let mut dist: Vec<f64> = Vec::new();
    let origin = vec![0i64; spec.dimension];
    ids.insert(origin.clone(), 0);
    points.push(origin);
    dist.push(0.0);
    let mut heap = BinaryHeap::new();
    heap.push(HeapEntry { cost: 0.0, node: 0 });
    let target = p.to_vec();
    while let Some(HeapEntry { cost, node }) = heap.pop() {
        if cost > dist[node] {
            continue;
        }
        if points[node] == target {
            return Some(cost);
        }
        let current = points[node].clone();
        for (g, w) in spec.generators.iter().zip(&spec.weights) {
            let next: Vec<i64> = current.iter().zip(g).map(|(a, b)| a + b).collect();
            if !inside(&next) {
                continue;
            }
            let id = match ids.get(&next) {
                Some(&id) => id,
                None => {
                    let id = points.len();
                    ids.insert(next.clone(), id);
                    points.push(next);
                    dist.push(f64::INFINITY);
                    id
                }
            };
            let cand = cost + w;
            if cand < dist[id] {
                dist[id] = cand;
                heap.push(HeapEntry { cost: cand, node: id });
            }
        }
    }
    None
}

/// Certified radius: any path of cost at most `cost` stays within
/// `ceil(cost / min_weight) * max_step` of the origin in sup norm.
fn certified_radius(spec: &NormSpec, cost: f64) -> i64 {
    ((cost / spec.min_weight()).ceil() as i64) * spec.max_step()
}

/// Shortest-path distance from 0 to `p` in the weighted generator graph on
/// the lattice. With `search_box = None` the box grows until the geodesic is
/// certified to stay inside; an explicit box errors when it cannot certify.
pub fn lattice_word_metric(spec: &NormSpec, p: &[i64], search_box: Option<SearchBox>) -> Result<f64> {
    if p.len() != spec.dimension {
        return Err(LatticeError::DimensionMismatch);
    }
    if p.iter().all(|&c| c == 0) {
        return Ok(0.0);
    }
    match search_box {
        Some(sb) => {
            let d = dijkstra_in_box(spec, p, sb.radius).ok_or(LatticeError::SearchBoxTooSmall)?;
            if certified_radius(spec, d) <= sb.radius {
                Ok(d)
            } else {
                Err(LatticeError::SearchBoxTooSmall)
            }
        }
        None => {
            let p_sup = p.iter().map(|c| c.abs()).max().unwrap();
            let mut radius = (p_sup + spec.max_step()).max(2);
            for _ in 0..64 {
                if let Some(d) = dijkstra_in_box(spec, p, radius) {
                    let needed = certified_radius(spec, d);
                    if needed <= radius {
                        return Ok(d);
                    }
                    radius = needed;
                } else {
                    radius *= 2;
                }
                if radius > 1_000_000 {
                    return Err(LatticeError::Unreachable);
                }
            }
            Err(LatticeError::Unreachable)
        }
    }
}

fn rational_lcm_denominator(x: &[Rational64]) -> i64 {
    x.iter().fold(1i64, |acc, r| acc.lcm(r.denom()))
}

/// Exact polyhedral norm `F_V(x)` for rational `x`: clear denominators, then
/// scale by the determinant factor so the optimal representation is integral
/// and the word metric evaluates it exactly.
pub fn polyhedral_norm(spec: &NormSpec, x: &[Rational64]) -> Result<f64> {
    if x.len() != spec.dimension {
        return Err(LatticeError::DimensionMismatch);
    }
    if x.iter().all(|r| *r.numer() == 0) {
        return Ok(0.0);
    }
    let q = rational_lcm_denominator(x);
    let scale = q * spec.denominator_scale();
    let p: Vec<i64> = x
        .iter()
        .map(|r| (r * Rational64::from_integer(scale)).to_integer())
        .collect();
    Ok(lattice_word_metric(spec, &p, None)? / scale as f64)
}

/// Rescaled word-metric estimate `d_G(0, lambda x) / lambda`; non-increasing
/// along doubling lambda and converging to `F_V(x)`.
pub fn stable_norm_estimate(spec: &NormSpec, x: &[Rational64], lambda: u32) -> Result<f64> {
    assert!(lambda >= 1);
    let l = Rational64::from_integer(lambda as i64);
    let mut p = Vec::with_capacity(x.len());
    for r in x {
        let scaled = r * l;
        if !scaled.is_integer() {
            return Err(LatticeError::NotALatticePoint);
        }
        p.push(scaled.to_integer());
    }
    Ok(lattice_word_metric(spec, &p, None)? / lambda as f64)
}

/// Empirical tangent-cone defect: max over sampled pairs of
/// `|d_G(0, p - q) - F_V(p - q)|`.
pub fn norm_defect(spec: &NormSpec, sample: &[Vec<i64>]) -> Result<f64> {
    let mut worst = 0.0f64;
    for (a, p) in sample.iter().enumerate() {
        for q in &sample[a..] {
            let diff: Vec<i64> = p.iter().zip(q).map(|(x, y)| x - y).collect();
            let dg = lattice_word_metric(spec, &diff, None)?;
            let rat: Vec<Rational64> = diff.iter().map(|&c| Rational64::from_integer(c)).collect();
            let fv = polyhedral_norm(spec, &rat)?;
            worst = worst.max((dg - fv).abs());
        }
    }
    Ok(worst)
}
