//! Computational geometry of smocked metric spaces: quotients of Euclidean
//! space obtained by collapsing a disjoint collection of compact stitches to
//! points, each carrying the induced shortest-path metric.
//!
//! The crate provides
//! - exact Euclidean primitives (shape distances, Hausdorff distance),
//! - the smocked distance engine with certified enumeration bounds,
//! - Gromov-Hausdorff brackets between finite nets and convergence curves,
//! - weighted lattice word metrics and their polyhedral stable norms,
//! - pushforward measures with exact, grid, and Monte Carlo evaluation.

pub mod euclid;
pub mod families;
pub mod gh;
pub mod lattice;
pub mod measure;
pub mod space;

pub use euclid::{
    dist_point_shape, dist_shape_shape, hausdorff, unit_ball_volume, AxisBox, CompactSet,
    EuclidError, HausdorffResult, Point, Shape,
};
pub use families::{
    alternating_intervals, escaping_interval, euclidean_stand_in, lattice_balls, shrinking_ball,
    AlternatingIntervalsPattern, FamilySpec,
};
pub use gh::{
    classify_stabilization, gh_exact_small, gh_lower, gh_upper, local_constants_report, pgh_curve,
    Correspondence, CurveRow, FiniteMetricSpace, GhError, LocalBoundsReport, LocalBoundsRow,
    Stabilization,
};
pub use lattice::{
    lattice_word_metric, norm_defect, polyhedral_norm, stable_norm_estimate, LatticeError,
    NormSpec, Rational64, SearchBox,
};
pub use measure::{
    ball_volume, integrate, weak_convergence_check, Estimate, MeasureError, Method, TestFunction,
    WeakConvergenceReport, WeakConvergenceRow,
};
pub use space::{
    ball_net, ball_net_with_points, crossing_bound, d_k_exact, preimage_radius, project, pseudometric,
    smocked_distance, smocking_constants, validate_pattern, Depth, SmockedSpace,
    SmockingConstants, SmockingPattern, SpaceError, SpacePoint, Stitch,
};
