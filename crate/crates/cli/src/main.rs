mod report;
mod scene;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use report::{fmt_f64, scene_hash, Report};
use scene::{norm_from_doc, parse_scene, phi_from_doc, Scene};
use smocked::{
    Rational64,
    ball_net_with_points, ball_volume, hausdorff, integrate, lattice_word_metric,
    local_constants_report, pgh_curve, polyhedral_norm, pseudometric, smocking_constants,
    stable_norm_estimate, AxisBox, Depth, Method, Point, SmockedSpace, SpacePoint, Stabilization,
};
use std::path::PathBuf;

/// Experiments on smocked metric spaces: quotient metrics, GH brackets,
/// lattice stable norms, and pushforward measures, driven by scene files.
#[derive(Parser)]
#[command(name = "smockctl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Scene file (TOML)
    #[arg(long)]
    scene: PathBuf,
    /// Also write the CSV to this file
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit plain x/y series files for each column into this directory
    #[arg(long)]
    plot_dir: Option<PathBuf>,
    /// Enumeration budget override
    #[arg(long)]
    budget: Option<f64>,
    /// Seed override for Monte Carlo work
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct DemoArgs {
    /// Named end-to-end reproduction: example31 | example32 | remark36 | lattice-l1
    name: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    plot_dir: Option<PathBuf>,
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Quotient distance between two points, per pattern
    Dist(RunArgs),
    /// Depth, stitch diameter range, and separation, per pattern
    Constants(RunArgs),
    /// Hausdorff distance between the stitch union and the target union
    Hausdorff(RunArgs),
    /// Farthest-point net of a metric ball, per pattern
    Net(RunArgs),
    /// Gromov-Hausdorff bracket between pattern nets and the target
    Gh(RunArgs),
    /// GH curve with Hausdorff column: the full convergence table
    Converge(RunArgs),
    /// Local diameter and separation bounds around the basepoint
    LocalBounds(RunArgs),
    /// Scaled word-metric estimates of the stable norm
    Tangent(RunArgs),
    /// Word metric vs polyhedral norm gap over a point sample
    Defect(RunArgs),
    /// Pushforward-measure integrals or ball volumes
    Measure(RunArgs),
    /// Named end-to-end reproduction on a builtin scene
    Demo(DemoArgs),
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let (name, args, text) = match cli.command {
        Command::Demo(d) => {
            let (command, text) = demo_scene(&d.name)?;
            (
                command,
                RunArgs {
                    scene: PathBuf::new(),
                    out: d.out,
                    plot_dir: d.plot_dir,
                    budget: d.budget,
                    seed: d.seed,
                },
                text.to_string(),
            )
        }
        ref c => {
            let (name, args) = match c {
                Command::Dist(a) => ("dist", a),
                Command::Constants(a) => ("constants", a),
                Command::Hausdorff(a) => ("hausdorff", a),
                Command::Net(a) => ("net", a),
                Command::Gh(a) => ("gh", a),
                Command::Converge(a) => ("converge", a),
                Command::LocalBounds(a) => ("local-bounds", a),
                Command::Tangent(a) => ("tangent", a),
                Command::Defect(a) => ("defect", a),
                Command::Measure(a) => ("measure", a),
                Command::Demo(_) => unreachable!(),
            };
            let text = std::fs::read_to_string(&args.scene)
                .with_context(|| format!("reading scene {}", args.scene.display()))?;
            (
                name,
                RunArgs {
                    scene: args.scene.clone(),
                    out: args.out.clone(),
                    plot_dir: args.plot_dir.clone(),
                    budget: args.budget,
                    seed: args.seed,
                },
                text,
            )
        }
    };

    let scene = parse_scene(&text)?;
    let mut report = dispatch(name, &scene, &args)?;
    report_prepend_meta(&mut report, &text, &scene, &args);
    let csv = report.to_csv();
    print!("{csv}");
    if let Some(out) = &args.out {
        std::fs::write(out, &csv).with_context(|| format!("writing {}", out.display()))?;
    }
    if let Some(dir) = &args.plot_dir {
        report.emit_plots(dir)?;
    }
    eprintln!("{}", report.summary());
    Ok(())
}

fn report_prepend_meta(report: &mut Report, text: &str, scene: &Scene, args: &RunArgs) {
    let mut meta: Vec<(String, String)> = vec![
        ("scene_hash".into(), scene_hash(text)),
        (
            "seed".into(),
            args.seed
                .or(scene.doc.experiment.seed)
                .map(|s| s.to_string())
                .unwrap_or_else(|| "none".into()),
        ),
        ("layout".into(), "symmetric-equal-gaps".into()),
        ("dk_reading".into(), "consecutive-distinct".into()),
    ];
    if let Some(f) = &scene.family_name {
        meta.push(("family".into(), f.clone()));
    }
    report.prepend_meta(meta);
}

fn space_for(scene: &Scene, pattern: &smocked::SmockingPattern) -> Result<SmockedSpace> {
    match &scene.doc.basepoint {
        Some(bp) => {
            let base = smocked::project(pattern, &Point::new(bp.clone()))?;
            Ok(SmockedSpace::new(pattern.clone(), base)?)
        }
        None => Ok(SmockedSpace::with_origin_base(pattern.clone())?),
    }
}

fn union_target(scene: &Scene) -> Result<smocked::CompactSet> {
    let shapes = scene.union_limit.clone().ok_or_else(|| {
        anyhow!("scene: no stitch-union limit; set experiment.target explicitly")
    })?;
    Ok(smocked::CompactSet::new(shapes)?)
}

fn limit_space(scene: &Scene) -> Result<SmockedSpace> {
    let pattern = scene
        .limit
        .clone()
        .ok_or_else(|| anyhow!("scene: this command needs a family limit or experiment.target"))?;
    Ok(SmockedSpace::with_origin_base(pattern)?)
}

fn dispatch(name: &str, scene: &Scene, args: &RunArgs) -> Result<Report> {
    let ex = &scene.doc.experiment;
    let budget = args.budget.or(ex.budget).unwrap_or(2e7);
    match name {
        "dist" => {
            let u = Point::new(
                ex.u.clone().ok_or_else(|| anyhow!("experiment.u: required for dist"))?,
            );
            let v = Point::new(
                ex.v.clone().ok_or_else(|| anyhow!("experiment.v: required for dist"))?,
            );
            let mut report = Report::new("dist", &["k", "d", "error"]);
            for (k, p) in &scene.patterns {
                let space = space_for(scene, p)?;
                let d = pseudometric(&space, &u, &v)?;
                report.row(vec![k.to_string(), fmt_f64(d), "0".into()]);
            }
            Ok(report)
        }
        "constants" => {
            let step = ex.step.unwrap_or(0.05);
            let mut report = Report::new(
                "constants",
                &["k", "depth", "depth_error", "l_min", "l_max", "delta", "stitches"],
            );
            for (k, p) in &scene.patterns {
                let c = smocking_constants(p, &p.window, step)?;
                let (depth, err) = match c.depth_h {
                    Depth::Finite { value, resolution } => (value, resolution),
                    Depth::Unbounded => (f64::INFINITY, 0.0),
                };
                report.row(vec![
                    k.to_string(),
                    fmt_f64(depth),
                    fmt_f64(err),
                    fmt_f64(c.l_min),
                    fmt_f64(c.l_max),
                    fmt_f64(c.delta),
                    p.stitches.len().to_string(),
                ]);
            }
            Ok(report)
        }
        "hausdorff" => {
            let target = union_target(scene)?;
            let res = ex.step.unwrap_or(0.01);
            let mut report = Report::new("hausdorff", &["k", "hausdorff", "error"]);
            for (k, p) in &scene.patterns {
                let h = hausdorff(&p.union(), &target, res)?;
                report.row(vec![k.to_string(), fmt_f64(h.value), fmt_f64(h.error_bound)]);
            }
            Ok(report)
        }
        "net" => {
            let radius = ex.radius.unwrap_or(2.0);
            let eps = ex.eps.unwrap_or(0.5);
            let mut report = Report::new(
                "net",
                &["k", "size", "diam", "radius", "eps", "max_euclid_gap", "error"],
            );
            for (k, p) in &scene.patterns {
                let space = space_for(scene, p)?;
                let (net, points) =
                    ball_net_with_points(&space, &space.basepoint, radius, eps)?;
                // worst gap between net distances and straight-line lift
                // distances, over pairs of free points
                let mut gap = 0.0f64;
                for i in 0..points.len() {
                    for j in 0..points.len() {
                        if let (SpacePoint::Free(a), SpacePoint::Free(b)) =
                            (&points[i], &points[j])
                        {
                            gap = gap.max((net.dist[i][j] - a.dist(b)).abs());
                        }
                    }
                }
                report.row(vec![
                    k.to_string(),
                    net.len().to_string(),
                    fmt_f64(net.diam()),
                    fmt_f64(radius),
                    fmt_f64(eps),
                    fmt_f64(gap),
                    "0".into(),
                ]);
            }
            Ok(report)
        }
        "gh" | "converge" => {
            let radius = ex.radius.unwrap_or(2.0);
            let eps = ex.eps.unwrap_or(0.5);
            let limit = limit_space(scene)?;
            let rows = pgh_curve(&scene.patterns, &limit, radius, eps, budget)?;
            if name == "gh" {
                let mut report =
                    Report::new("gh", &["k", "gh_lower", "gh_upper", "error", "radius", "eps"]);
                for r in rows {
                    report.row(vec![
                        r.k.to_string(),
                        fmt_f64(r.gh_lower),
                        fmt_f64(r.gh_upper),
                        fmt_f64(r.gh_upper - r.gh_lower),
                        fmt_f64(r.radius),
                        fmt_f64(r.net_eps),
                    ]);
                }
                Ok(report)
            } else {
                let target = union_target(scene)?;
                let res = ex.step.unwrap_or(0.01);
                let mut report = Report::new(
                    "converge",
                    &["k", "gh_lower", "gh_upper", "gh_error", "hausdorff_union", "h_error"],
                );
                for r in rows {
                    let p = &scene.patterns.iter().find(|(k, _)| *k == r.k).unwrap().1;
                    let h = hausdorff(&p.union(), &target, res)?;
                    report.row(vec![
                        r.k.to_string(),
                        fmt_f64(r.gh_lower),
                        fmt_f64(r.gh_upper),
                        fmt_f64(r.gh_upper - r.gh_lower),
                        fmt_f64(h.value),
                        fmt_f64(h.error_bound),
                    ]);
                }
                Ok(report)
            }
        }
        "local-bounds" => {
            let r = ex.r.unwrap_or(1.0);
            let rep = local_constants_report(&scene.patterns, r)?;
            let mut report =
                Report::new("local-bounds", &["k", "l_r", "delta_r", "stitches_in_range"]);
            report.meta(
                "verdict",
                match rep.verdict {
                    Stabilization::Stable => "stable",
                    Stabilization::DegeneratingSeparation => "degenerating-separation",
                    Stabilization::GrowingDiameter => "growing-diameter",
                    Stabilization::Inconclusive => "inconclusive",
                },
            );
            for row in rep.rows {
                report.row(vec![
                    row.k.to_string(),
                    fmt_f64(row.l_r),
                    fmt_f64(row.delta_r),
                    row.stitch_count.to_string(),
                ]);
            }
            Ok(report)
        }
        "tangent" => {
            let norm = ex
                .norm
                .as_ref()
                .ok_or_else(|| anyhow!("experiment.norm: required for tangent"))?;
            let spec = norm_from_doc(norm, scene.dimension)?;
            let lambdas = ex.lambdas.clone().unwrap_or_else(|| vec![1, 2, 4, 8, 16, 32]);
            let points = ex
                .points
                .clone()
                .unwrap_or_else(|| vec![vec![1; scene.dimension]]);
            let mut report =
                Report::new("tangent", &["lambda", "point", "estimate", "norm", "error"]);
            for p in &points {
                let rat: Vec<Rational64> =
                    p.iter().map(|&c| Rational64::from_integer(c)).collect();
                let exact = polyhedral_norm(&spec, &rat)?;
                for &lambda in &lambdas {
                    let est = stable_norm_estimate(&spec, &rat, lambda)?;
                    report.row(vec![
                        lambda.to_string(),
                        format_lattice_point(p),
                        fmt_f64(est),
                        fmt_f64(exact),
                        fmt_f64((est - exact).abs()),
                    ]);
                }
            }
            Ok(report)
        }
        "defect" => {
            let norm = ex
                .norm
                .as_ref()
                .ok_or_else(|| anyhow!("experiment.norm: required for defect"))?;
            let spec = norm_from_doc(norm, scene.dimension)?;
            let points = match ex.points.clone() {
                Some(p) => p,
                None => integer_box(scene.dimension, 2),
            };
            let mut report =
                Report::new("defect", &["index", "point", "word", "norm", "defect"]);
            for (i, p) in points.iter().enumerate() {
                let rat: Vec<Rational64> =
                    p.iter().map(|&c| Rational64::from_integer(c)).collect();
                let word = lattice_word_metric(&spec, p, None)?;
                let norm = polyhedral_norm(&spec, &rat)?;
                report.row(vec![
                    i.to_string(),
                    format_lattice_point(p),
                    fmt_f64(word),
                    fmt_f64(norm),
                    fmt_f64((word - norm).abs()),
                ]);
            }
            Ok(report)
        }
        "measure" => {
            let method = match ex.method.as_deref().unwrap_or("monte-carlo") {
                "exact1d" => Method::Exact1d,
                "grid" => Method::Grid { step: ex.step.unwrap_or(0.05) },
                "monte-carlo" => Method::MonteCarlo {
                    seed: scene.require_seed(args.seed)?,
                    samples: ex.samples.unwrap_or(200_000),
                },
                other => bail!("experiment.method: unknown method `{other}`"),
            };
            let mut report = Report::new(
                "measure",
                &["k", "phi", "value", "error", "stitch_volume_total"],
            );
            match &ex.phi {
                Some(phis) => {
                    report.meta("phi_panel", format!("{}-functions", phis.len()));
                    let support = ex
                        .support
                        .as_ref()
                        .ok_or_else(|| anyhow!("experiment.support: required for integrals"))?;
                    let support = AxisBox::new(
                        Point::new(support.min.clone()),
                        Point::new(support.max.clone()),
                    )?;
                    for (k, p) in &scene.patterns {
                        let space = space_for(scene, p)?;
                        let total: f64 =
                            p.stitches.iter().map(|s| s.shape.volume()).sum();
                        for (i, phi_doc) in phis.iter().enumerate() {
                            let phi =
                                phi_from_doc(phi_doc, &format!("experiment.phi[{i}]"))?;
                            let est = integrate(&space, method, &phi, &support)?;
                            report.row(vec![
                                k.to_string(),
                                i.to_string(),
                                fmt_f64(est.value),
                                fmt_f64(est.error),
                                fmt_f64(total),
                            ]);
                        }
                    }
                }
                None => {
                    let r = ex
                        .r
                        .ok_or_else(|| anyhow!("experiment.r: ball radius required"))?;
                    for (k, p) in &scene.patterns {
                        let space = space_for(scene, p)?;
                        let total: f64 =
                            p.stitches.iter().map(|s| s.shape.volume()).sum();
                        let base = space.basepoint.clone();
                        let est = ball_volume(&space, method, &base, r)?;
                        report.row(vec![
                            k.to_string(),
                            "ball".into(),
                            fmt_f64(est.value),
                            fmt_f64(est.error),
                            fmt_f64(total),
                        ]);
                    }
                }
            }
            Ok(report)
        }
        other => bail!("unknown command `{other}`"),
    }
}

fn format_lattice_point(p: &[i64]) -> String {
    let cells: Vec<String> = p.iter().map(|c| c.to_string()).collect();
    format!("({})", cells.join(";"))
}

fn integer_box(dim: usize, radius: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut idx = vec![-radius; dim];
    loop {
        out.push(idx.clone());
        let mut axis = 0;
        loop {
            if axis == dim {
                return out;
            }
            idx[axis] += 1;
            if idx[axis] <= radius {
                break;
            }
            idx[axis] = -radius;
            axis += 1;
        }
    }
}

fn demo_scene(name: &str) -> Result<(&'static str, String)> {
    let scene = match name {
        "example31" => (
            "dist",
            "version = 1\n\
             dimension = 1\n\
             [family]\n\
             name = \"alternating-intervals\"\n\
             ks = [1, 2, 3, 4, 5, 6, 7, 8]\n\
             [experiment]\n\
             u = [-1.0]\n\
             v = [1.0]\n"
                .to_string(),
        ),
        "example32" => (
            "gh",
            format!(
                "version = 1\n\
                 dimension = 1\n\
                 [family]\n\
                 name = \"shrinking-ball\"\n\
                 ks = [{}]\n\
                 [experiment]\n\
                 radius = 2.0\n\
                 eps = 0.05\n\
                 budget = 2e7\n",
                (2..=32).map(|k| k.to_string()).collect::<Vec<_>>().join(", ")
            ),
        ),
        "remark36" => (
            "net",
            "version = 1\n\
             dimension = 1\n\
             [family]\n\
             name = \"escaping-interval\"\n\
             ks = [4, 5, 6, 7, 8]\n\
             [experiment]\n\
             radius = 5.0\n\
             eps = 0.5\n"
                .to_string(),
        ),
        "lattice-l1" => (
            "tangent",
            "version = 1\n\
             dimension = 2\n\
             [family]\n\
             name = \"lattice\"\n\
             ks = [1]\n\
             node_radius = 0.2\n\
             [experiment]\n\
             lambdas = [1, 2, 4, 8, 16, 32]\n\
             points = [[1, 1]]\n\
             [experiment.norm]\n\
             generators = [[1, 0], [0, 1]]\n\
             weights = [1.0, 1.0]\n"
                .to_string(),
        ),
        other => bail!("unknown demo `{other}` (expected example31 | example32 | remark36 | lattice-l1)"),
    };
    Ok(scene)
}
