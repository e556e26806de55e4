//! Scene file schema and validation into core types.
//!
//! A scene is a TOML document with fields {version, dimension,
//! family | stitches, window, basepoint, experiment}; numbers are decimal and
//! vectors are arrays. See README for the full schema.

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;
use smocked::{
    alternating_intervals, escaping_interval, euclidean_stand_in, lattice_balls, shrinking_ball,
    validate_pattern, AxisBox, NormSpec, Point, Shape, SmockingPattern, TestFunction,
};

pub const SCENE_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneDoc {
    pub version: u32,
    pub dimension: usize,
    pub family: Option<FamilyDoc>,
    pub stitches: Option<Vec<ShapeDoc>>,
    pub window: Option<WindowDoc>,
    pub basepoint: Option<Vec<f64>>,
    #[serde(default)]
    pub experiment: ExperimentDoc,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDoc {
    pub name: String,
    pub ks: Option<Vec<u32>>,
    pub node_radius: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowDoc {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeDoc {
    pub kind: String,
    pub center: Option<Vec<f64>>,
    pub radius: Option<f64>,
    pub min: Option<Vec<f64>>,
    pub max: Option<Vec<f64>>,
    pub a: Option<Vec<f64>>,
    pub b: Option<Vec<f64>>,
    pub point: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExperimentDoc {
    pub u: Option<Vec<f64>>,
    pub v: Option<Vec<f64>>,
    pub radius: Option<f64>,
    pub eps: Option<f64>,
    pub budget: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub lambdas: Option<Vec<u32>>,
    pub step: Option<f64>,
    pub r: Option<f64>,
    pub method: Option<String>,
    pub phi: Option<Vec<PhiDoc>>,
    pub target: Option<Vec<ShapeDoc>>,
    pub target_window: Option<WindowDoc>,
    pub norm: Option<NormDoc>,
    pub points: Option<Vec<Vec<i64>>>,
    pub support: Option<WindowDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiDoc {
    pub kind: String,
    pub center: Option<Vec<f64>>,
    pub radius: Option<f64>,
    pub slope: Option<f64>,
    pub value: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormDoc {
    pub generators: Vec<Vec<i64>>,
    pub weights: Vec<f64>,
}

/// A validated scene: per-k patterns (k = 0 for a single explicit pattern),
/// the declared limit when the family has one, and experiment parameters.
pub struct Scene {
    pub doc: SceneDoc,
    pub dimension: usize,
    pub patterns: Vec<(u32, SmockingPattern)>,
    pub limit: Option<SmockingPattern>,
    /// Hausdorff limit of the stitch unions, when the family has one.
    pub union_limit: Option<Vec<Shape>>,
    pub family_name: Option<String>,
}

fn shape_from_doc(doc: &ShapeDoc, path: &str) -> Result<Shape> {
    let need = |field: &Option<Vec<f64>>, name: &str| {
        field
            .clone()
            .ok_or_else(|| anyhow!("{path}: kind `{}` requires `{name}`", doc.kind))
    };
    let shape = match doc.kind.as_str() {
        "ball" => Shape::Ball {
            center: Point::new(need(&doc.center, "center")?),
            radius: doc.radius.ok_or_else(|| anyhow!("{path}: ball requires `radius`"))?,
        },
        "box" => Shape::Box(
            AxisBox::new(Point::new(need(&doc.min, "min")?), Point::new(need(&doc.max, "max")?))
                .with_context(|| path.to_string())?,
        ),
        "segment" => Shape::Segment {
            a: Point::new(need(&doc.a, "a")?),
            b: Point::new(need(&doc.b, "b")?),
        },
        "point" => Shape::Cloud { points: vec![Point::new(need(&doc.point, "point")?)] },
        other => bail!("{path}: unknown shape kind `{other}`"),
    };
    Ok(shape)
}

fn window_from_doc(doc: &WindowDoc, path: &str) -> Result<AxisBox> {
    AxisBox::new(Point::new(doc.min.clone()), Point::new(doc.max.clone()))
        .with_context(|| format!("{path}: invalid window"))
}

pub fn phi_from_doc(doc: &PhiDoc, path: &str) -> Result<TestFunction> {
    let phi = match doc.kind.as_str() {
        "bump" => TestFunction::Bump {
            center: Point::new(
                doc.center.clone().ok_or_else(|| anyhow!("{path}: bump requires `center`"))?,
            ),
            radius: doc.radius.ok_or_else(|| anyhow!("{path}: bump requires `radius`"))?,
        },
        "tent" => TestFunction::Tent {
            center: Point::new(
                doc.center.clone().ok_or_else(|| anyhow!("{path}: tent requires `center`"))?,
            ),
            slope: doc.slope.ok_or_else(|| anyhow!("{path}: tent requires `slope`"))?,
        },
        "constant" => TestFunction::Constant(
            doc.value.ok_or_else(|| anyhow!("{path}: constant requires `value`"))?,
        ),
        other => bail!("{path}: unknown test function kind `{other}`"),
    };
    Ok(phi)
}

pub fn norm_from_doc(doc: &NormDoc, dimension: usize) -> Result<NormSpec> {
    let half: Vec<(Vec<i64>, f64)> = doc
        .generators
        .iter()
        .zip(&doc.weights)
        .map(|(g, w)| (g.clone(), *w))
        .collect();
    if doc.generators.len() != doc.weights.len() {
        bail!("experiment.norm: generators and weights must have equal length");
    }
    NormSpec::from_half(dimension, &half).context("experiment.norm")
}

pub fn parse_scene(text: &str) -> Result<Scene> {
    let doc: SceneDoc = toml::from_str(text).context("scene: malformed document")?;
    if doc.version != SCENE_VERSION {
        bail!("scene.version: expected {SCENE_VERSION}, found {}", doc.version);
    }
    let dimension = doc.dimension;
    if dimension == 0 {
        bail!("scene.dimension: must be at least 1");
    }

    let mut family_name = None;
    let mut limit = None;
    let mut union_limit: Option<Vec<Shape>> = None;
    let patterns: Vec<(u32, SmockingPattern)> = match (&doc.family, &doc.stitches) {
        (Some(_), Some(_)) => bail!("scene: provide `family` or `stitches`, not both"),
        (None, None) => bail!("scene: provide a `family` or explicit `stitches`"),
        (Some(fam), None) => {
            let ks = fam
                .ks
                .clone()
                .ok_or_else(|| anyhow!("scene.family.ks: parameter range required"))?;
            if ks.is_empty() || ks.iter().any(|&k| k == 0) {
                bail!("scene.family.ks: must be nonempty positive integers");
            }
            family_name = Some(fam.name.clone());
            let mut out = Vec::with_capacity(ks.len());
            for &k in &ks {
                let p = match fam.name.as_str() {
                    "alternating-intervals" | "example31" => {
                        if dimension != 1 {
                            bail!("scene.dimension: alternating-intervals is 1-dimensional");
                        }
                        alternating_intervals(k)?.pattern
                    }
                    "shrinking-ball" | "example32" => shrinking_ball(k, dimension)?,
                    "escaping-interval" | "remark36" => {
                        if dimension != 1 {
                            bail!("scene.dimension: escaping-interval is 1-dimensional");
                        }
                        escaping_interval(k)?
                    }
                    "lattice" => {
                        let norm = doc
                            .experiment
                            .norm
                            .as_ref()
                            .ok_or_else(|| anyhow!("scene.family: lattice requires experiment.norm"))?;
                        let spec = norm_from_doc(norm, dimension)?;
                        let node_radius = fam.node_radius.unwrap_or(0.25);
                        lattice_balls(&spec, node_radius, k)?
                    }
                    other => bail!("scene.family.name: unknown family `{other}`"),
                };
                out.push((k, p));
            }
            limit = match fam.name.as_str() {
                "shrinking-ball" | "example32" | "escaping-interval" | "remark36" => {
                    Some(euclidean_stand_in(dimension)?)
                }
                _ => None,
            };
            union_limit = match fam.name.as_str() {
                "alternating-intervals" | "example31" => Some(vec![Shape::Box(
                    AxisBox::new(Point::new(vec![-1.0]), Point::new(vec![1.0]))?,
                )]),
                "shrinking-ball" | "example32" => Some(vec![Shape::Cloud {
                    points: vec![Point::new(vec![0.0; dimension])],
                }]),
                _ => None,
            };
            out
        }
        (None, Some(stitches)) => {
            let window = doc
                .window
                .as_ref()
                .ok_or_else(|| anyhow!("scene.window: required with explicit stitches"))?;
            let window = window_from_doc(window, "scene.window")?;
            if window.dim() != dimension {
                bail!("scene.window: dimension mismatch");
            }
            let shapes: Vec<Shape> = stitches
                .iter()
                .enumerate()
                .map(|(i, s)| shape_from_doc(s, &format!("scene.stitches[{i}]")))
                .collect::<Result<_>>()?;
            vec![(0, validate_pattern(shapes, window).context("scene.stitches")?)]
        }
    };

    for (k, p) in &patterns {
        if p.dimension != dimension {
            bail!("scene: pattern for k={k} has dimension {} != {dimension}", p.dimension);
        }
    }
    if let Some(bp) = &doc.basepoint {
        if bp.len() != dimension {
            bail!("scene.basepoint: dimension mismatch");
        }
    }
    // explicit target overrides the family limit
    if let Some(target) = &doc.experiment.target {
        let window = match &doc.experiment.target_window {
            Some(w) => window_from_doc(w, "experiment.target_window")?,
            None => doc
                .window
                .as_ref()
                .map(|w| window_from_doc(w, "scene.window"))
                .transpose()?
                .or_else(|| patterns.first().map(|(_, p)| p.window.clone()))
                .ok_or_else(|| anyhow!("experiment.target_window: required"))?,
        };
        let shapes: Vec<Shape> = target
            .iter()
            .enumerate()
            .map(|(i, s)| shape_from_doc(s, &format!("experiment.target[{i}]")))
            .collect::<Result<_>>()?;
        union_limit = Some(shapes.clone());
        limit = Some(validate_pattern(shapes, window).context("experiment.target")?);
    }

    Ok(Scene { dimension, patterns, limit, union_limit, family_name, doc })
}

impl Scene {
    /// Seed lookup with the invariant that Monte Carlo work requires one.
    pub fn require_seed(&self, cli_seed: Option<u64>) -> Result<u64> {
        cli_seed
            .or(self.doc.experiment.seed)
            .ok_or_else(|| anyhow!("experiment.seed: missing seed for a Monte Carlo experiment"))
    }
}
