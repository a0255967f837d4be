//! Command-line surface: plan, generate, benchmark, baseline comparison
//! and SVG figure export.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::baseline::{rrt_star_sequential, RrtParams};
use crate::geometry::{inflate, Scene};
use crate::planner::{combined_total, plan_sequential, PlanResult, PlannerParams, TetherMode};
use crate::pva2d::PlaneAnalysis;
use crate::pva3d::{interval_rows, slice_beam};
use crate::scenario::{
    benchmark_grid, build_realistic, random_scenario, records_to_csv, BenchOptions, PlannerKind,
    ScenarioSpec,
};
use crate::Error;

#[derive(Parser)]
#[command(name = "maspa", version, about = "Tethered marsupial ground+aerial path planner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan all targets of a scene sequentially.
    Plan(PlanArgs),
    /// Generate a random scene or a named structured scene.
    Gen(GenArgs),
    /// Run the benchmark grid over random scenarios and write CSV.
    Bench(BenchArgs),
    /// Run the RRT* baseline on a scene.
    Rrt(RrtArgs),
    /// Export a scene or plan as SVG.
    Export(ExportArgs),
}

#[derive(Args)]
struct PlanArgs {
    scene: PathBuf,
    #[arg(long, default_value_t = 16)]
    p: usize,
    #[arg(long, default_value_t = 30)]
    q: usize,
    #[arg(long, default_value_t = 26)]
    c: usize,
    /// Tether model: taut or catenary.
    #[arg(long, default_value = "catenary")]
    mode: String,
    /// Skip the visibility filter (ablation variant).
    #[arg(long = "no-pva", default_value_t = false)]
    no_pva: bool,
    #[arg(long, default_value = "plan.json")]
    out: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Generator spec file (JSON); defaults match the benchmark setting.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Structured scene name (s1_fireplace or s2_balconies) instead of a
    /// random one.
    #[arg(long)]
    name: Option<String>,
    #[arg(long, default_value = "scene.json")]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Seed range, inclusive, as A..B.
    #[arg(long, default_value = "0..9")]
    seeds: String,
    #[arg(long = "p-set", default_value = "4,8,16,32", value_delimiter = ',')]
    p_set: Vec<usize>,
    #[arg(long = "q-set", default_value = "10,20,30,40", value_delimiter = ',')]
    q_set: Vec<usize>,
    #[arg(long, default_value = "maspa", value_delimiter = ',')]
    planners: Vec<String>,
    #[arg(long, default_value_t = 26)]
    c: usize,
    #[arg(long = "rrt-budget", default_value_t = 20.0)]
    rrt_budget: f64,
    /// Cap on worker threads; defaults to the available cores.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct RrtArgs {
    scene: PathBuf,
    #[arg(long, default_value_t = 20.0)]
    budget: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 26)]
    c: usize,
    #[arg(long, default_value = "plan.json")]
    out: PathBuf,
}

#[derive(Args)]
struct ExportArgs {
    /// A scene.json or plan.json file.
    input: PathBuf,
    #[arg(long)]
    svg: PathBuf,
    /// View: "top" or "plane:<k>".
    #[arg(long, default_value = "top")]
    view: String,
    /// Scene file to draw under a plan input.
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Beam size for plane views of a bare scene.
    #[arg(long, default_value_t = 16)]
    p: usize,
}

/// Runs the CLI; returns the process exit code. Errors are reported as a
/// single JSON object on stderr: {"error": kind, "message": text}.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            // Help and version requests are successful exits.
            if e.use_stderr() {
                report_error("invalid-arguments", &e.to_string());
                return 1;
            }
            print!("{e}");
            return 0;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(err) => {
            let (kind, code) = classify(&err);
            report_error(kind, &err.to_string());
            code
        }
    }
}

fn classify(err: &Error) -> (&'static str, i32) {
    match err {
        Error::Unreachable(_) | Error::NoCandidates => ("unreachable", 2),
        Error::InvalidScene(_)
        | Error::UnknownScenario(_)
        | Error::Json(_)
        | Error::Io(_)
        | Error::ShorterThanChord { .. }
        | Error::VerticalAnchors(_)
        | Error::GenerationFailed(_) => ("invalid-input", 1),
    }
}

fn report_error(kind: &str, message: &str) {
    eprintln!(
        "{}",
        serde_json::json!({ "error": kind, "message": message })
    );
}

fn dispatch(cli: Cli) -> crate::Result<()> {
    match cli.command {
        Command::Plan(args) => {
            let scene = Scene::from_json(&std::fs::read_to_string(&args.scene)?)?;
            let mode = parse_mode(&args.mode)?;
            let params = PlannerParams {
                p: args.p,
                q: args.q,
                c: args.c,
                mode,
                use_pva: !args.no_pva,
            };
            let plans = plan_sequential(&scene, &params)?;
            write_plans(&args.out, &plans)?;
            println!("tl_m {:.4}", combined_total(&plans));
            Ok(())
        }
        Command::Gen(args) => {
            let scene = if let Some(name) = &args.name {
                build_realistic(name)?
            } else {
                let spec = match &args.spec {
                    Some(path) => {
                        let mut spec: ScenarioSpec =
                            serde_json::from_str(&std::fs::read_to_string(path)?)?;
                        spec.seed = args.seed;
                        spec
                    }
                    None => ScenarioSpec::with_seed(args.seed),
                };
                random_scenario(&spec)?
            };
            std::fs::write(&args.out, scene.to_json())?;
            println!("scene written to {}", args.out.display());
            Ok(())
        }
        Command::Bench(args) => {
            if let Some(n) = args.threads {
                // Ignore failure when a pool already exists in-process.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            let seeds = parse_seed_range(&args.seeds)?;
            let planners: Vec<PlannerKind> = args
                .planners
                .iter()
                .map(|p| PlannerKind::parse(p))
                .collect::<crate::Result<_>>()?;
            let opts = BenchOptions {
                c: args.c,
                mode: TetherMode::Catenary,
                rrt_budget_s: args.rrt_budget,
            };
            let (records, failures) =
                benchmark_grid(&seeds, &args.p_set, &args.q_set, &planners, &opts);
            std::fs::write(&args.out, records_to_csv(&records))?;
            for f in &failures {
                eprintln!("cell failed: {f}");
            }
            println!("{} records written to {}", records.len(), args.out.display());
            Ok(())
        }
        Command::Rrt(args) => {
            let scene = Scene::from_json(&std::fs::read_to_string(&args.scene)?)?;
            let params = RrtParams {
                budget_s: args.budget,
                seed: args.seed,
                c: args.c,
                ..Default::default()
            };
            let plans = rrt_star_sequential(&scene, &params)?;
            write_plans(&args.out, &plans)?;
            println!("tl_m {:.4}", combined_total(&plans));
            Ok(())
        }
        Command::Export(args) => {
            let text = std::fs::read_to_string(&args.input)?;
            let svg = render_svg(&text, &args)?;
            std::fs::write(&args.svg, svg)?;
            println!("svg written to {}", args.svg.display());
            Ok(())
        }
    }
}

fn parse_mode(text: &str) -> crate::Result<TetherMode> {
    match text {
        "taut" => Ok(TetherMode::Taut),
        "catenary" => Ok(TetherMode::Catenary),
        other => Err(Error::InvalidScene(format!("unknown tether mode: {other}"))),
    }
}

fn parse_seed_range(text: &str) -> crate::Result<Vec<u64>> {
    if let Some((a, b)) = text.split_once("..") {
        let (a, b): (u64, u64) = (
            a.parse().map_err(|_| Error::InvalidScene(format!("bad seed range: {text}")))?,
            b.parse().map_err(|_| Error::InvalidScene(format!("bad seed range: {text}")))?,
        );
        if b < a {
            return Err(Error::InvalidScene(format!("bad seed range: {text}")));
        }
        Ok((a..=b).collect())
    } else {
        Ok(vec![text
            .parse()
            .map_err(|_| Error::InvalidScene(format!("bad seed: {text}")))?])
    }
}

fn write_plans(path: &std::path::Path, plans: &[PlanResult]) -> crate::Result<()> {
    let text = if plans.len() == 1 {
        serde_json::to_string_pretty(&plans[0])?
    } else {
        serde_json::to_string_pretty(&serde_json::json!({
            "plans": plans,
            "combined_tl_m": combined_total(plans),
        }))?
    };
    std::fs::write(path, text)?;
    Ok(())
}

// ---------------------------------------------------------------------
// SVG export

struct Svg {
    body: String,
    width: f64,
    height: f64,
}

impl Svg {
    fn new(width: f64, height: f64) -> Self {
        Self { body: String::new(), width, height }
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, style: &str) {
        self.body.push_str(&format!(
            "<rect x=\"{x:.3}\" y=\"{y:.3}\" width=\"{w:.3}\" height=\"{h:.3}\" style=\"{style}\"/>\n"
        ));
    }

    fn polyline(&mut self, pts: &[[f64; 2]], style: &str) {
        let mut s = String::new();
        for p in pts {
            s.push_str(&format!("{:.3},{:.3} ", p[0], p[1]));
        }
        self.body.push_str(&format!(
            "<polyline points=\"{}\" style=\"fill:none;{style}\"/>\n",
            s.trim_end()
        ));
    }

    fn circle(&mut self, x: f64, y: f64, r: f64, style: &str) {
        self.body.push_str(&format!(
            "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"{r:.3}\" style=\"{style}\"/>\n"
        ));
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"0 0 {:.3} {:.3}\">\n{}</svg>\n",
            self.width, self.height, self.body
        )
    }
}

fn render_svg(input_text: &str, args: &ExportArgs) -> crate::Result<String> {
    // A plan file carries a tl_m field; a scene file carries obstacles.
    let value: serde_json::Value = serde_json::from_str(input_text)?;
    if value.get("obstacles").is_some() {
        let scene = Scene::from_json(input_text)?;
        match args.view.as_str() {
            "top" => Ok(top_view(&scene, None)),
            v if v.starts_with("plane:") => {
                let k: usize = v[6..]
                    .parse()
                    .map_err(|_| Error::InvalidScene(format!("bad view: {v}")))?;
                plane_view(&scene, k, args.p)
            }
            v => Err(Error::InvalidScene(format!("bad view: {v}"))),
        }
    } else {
        let plan: PlanResult = serde_json::from_str(input_text)?;
        let scene_path = args.scene.as_ref().ok_or_else(|| {
            Error::InvalidScene("exporting a plan needs --scene for context".into())
        })?;
        let scene = Scene::from_json(&std::fs::read_to_string(scene_path)?)?;
        match args.view.as_str() {
            "top" => Ok(top_view(&scene, Some(&plan))),
            v => Err(Error::InvalidScene(format!("bad view for a plan: {v}"))),
        }
    }
}

fn top_view(scene: &Scene, plan: Option<&PlanResult>) -> String {
    let (min, max) = scene.bounds.footprint();
    let m = 2.0;
    let mut svg = Svg::new(max[0] - min[0] + 2.0 * m, max[1] - min[1] + 2.0 * m);
    let tx = |x: f64| x - min[0] + m;
    let ty = |y: f64| max[1] - y + m;
    svg.rect(
        tx(min[0]),
        ty(max[1]),
        max[0] - min[0],
        max[1] - min[1],
        "fill:none;stroke:#333;stroke-width:0.3",
    );
    for o in &scene.obstacles {
        let g = inflate(o, scene.params.r);
        svg.rect(
            tx(g.min[0]),
            ty(g.max[1]),
            g.max[0] - g.min[0],
            g.max[1] - g.min[1],
            "fill:none;stroke:#b77;stroke-width:0.15;stroke-dasharray:0.6",
        );
        svg.rect(
            tx(o.min[0]),
            ty(o.max[1]),
            o.max[0] - o.min[0],
            o.max[1] - o.min[1],
            "fill:#bbb;stroke:#555;stroke-width:0.2",
        );
    }
    svg.circle(tx(scene.start[0]), ty(scene.start[1]), 0.6, "fill:#c22");
    for t in &scene.targets {
        svg.circle(tx(t[0]), ty(t[1]), 0.6, "fill:#22c");
    }
    if let Some(plan) = plan {
        let pts: Vec<[f64; 2]> =
            plan.ground_path.iter().map(|p| [tx(p[0]), ty(p[1])]).collect();
        svg.polyline(&pts, "stroke:#c22;stroke-width:0.35");
        let air: Vec<[f64; 2]> =
            plan.aerial_path.iter().map(|p| [tx(p[0]), ty(p[1])]).collect();
        svg.polyline(&air, "stroke:#22c;stroke-width:0.35;stroke-dasharray:1");
        svg.circle(
            tx(plan.takeoff.ground.x),
            ty(plan.takeoff.ground.y),
            0.5,
            "fill:none;stroke:#c22;stroke-width:0.25",
        );
    }
    svg.finish()
}

fn plane_view(scene: &Scene, k: usize, p: usize) -> crate::Result<String> {
    let planes = slice_beam(scene, 0, p);
    if k >= planes.len() {
        return Err(Error::InvalidScene(format!(
            "plane index {k} out of range (beam has {} half-planes)",
            planes.len()
        )));
    }
    let planar = planes[k].clone();
    let analysis = PlaneAnalysis::new(planar, scene.params.max_tether);
    let rows = interval_rows(std::slice::from_ref(&analysis));
    let z_top = scene.bounds.max[2];
    let d_max = analysis.intervals.q_reach.unwrap_or(10.0).max(10.0) + 2.0;
    let m = 2.0;
    let mut svg = Svg::new(d_max + 2.0 * m, z_top + 2.0 * m);
    let tx = |d: f64| d + m;
    let ty = |z: f64| z_top - z + m;
    for r in &analysis.planar.rects {
        svg.rect(
            tx(r.d_min.max(0.0)),
            ty(r.z_max),
            r.d_max - r.d_min.max(0.0),
            r.z_max - r.z_min,
            "fill:#ccc;stroke:#555;stroke-width:0.2",
        );
    }
    // Take-off line and visible intervals.
    let toz = analysis.planar.take_off_z;
    svg.polyline(
        &[[tx(0.0), ty(toz)], [tx(d_max - m), ty(toz)]],
        "stroke:#999;stroke-width:0.1;stroke-dasharray:0.5",
    );
    for (_, _, lo, hi) in rows {
        svg.polyline(
            &[[tx(lo), ty(toz)], [tx(hi), ty(toz)]],
            "stroke:#2a2;stroke-width:0.5",
        );
    }
    svg.circle(tx(0.0), ty(analysis.planar.target.z), 0.5, "fill:#22c");
    Ok(svg.finish())
}
