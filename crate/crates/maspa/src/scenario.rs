//! Scenario construction: the seeded random-scene generator, two
//! structured reconstruction scenes (a walled fireplace and a two-balcony
//! building), and the benchmark harness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::{rrt_star_sequential, RrtParams};
use crate::geometry::{inflate, Cuboid, MarsupialParams, Scene};
use crate::planner::{plan_sequential, PlannerParams, StageTimings, TetherMode};
use crate::{Error, Result};

/// Parameters of the random-scenario generator. Defaults reproduce the
/// benchmark setting: a 50 x 50 x 40 box, ten ground and fifteen aerial
/// cubes of side 5, targets at least 25 m high, h = 1.5, r = 0.5, L = 50.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    #[serde(rename = "box")]
    pub box_size: [f64; 3],
    pub n_ground: usize,
    pub n_aerial: usize,
    pub side: f64,
    pub target_min_z: f64,
    pub params: MarsupialParams,
    pub seed: u64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            box_size: [50.0, 50.0, 40.0],
            n_ground: 10,
            n_aerial: 15,
            side: 5.0,
            target_min_z: 25.0,
            params: MarsupialParams { h: 1.5, r: 0.5, max_tether: 50.0 },
            seed: 0,
        }
    }
}

impl ScenarioSpec {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }
}

/// Start corner offset: the start sits this far from the box corner.
const START_CLEARANCE: f64 = 1.0;
/// Aerial cube bases are drawn uniformly from [h, AERIAL_BASE_MAX].
const AERIAL_BASE_MAX: f64 = 30.0;
/// Margin between the target and any inflated obstacle.
const TARGET_CLEARANCE: f64 = 1.0;
/// Total rejection budget of the generator.
const MAX_REJECTIONS: usize = 100_000;

/// Generates a reproducible random scene: disjoint ground cubes resting on
/// the floor, disjoint aerial cubes, the start in a corner and a target in
/// clear air. The scene is a pure function of the spec (including its
/// seed).
pub fn random_scenario(spec: &ScenarioSpec) -> Result<Scene> {
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let [w, dep, hgt] = spec.box_size;
    let side = spec.side;
    let r = spec.params.r;
    let start = [START_CLEARANCE, START_CLEARANCE];
    let mut rejections = 0usize;
    let mut obstacles: Vec<Cuboid> = Vec::new();

    let place = |rng: &mut ChaCha12Rng,
                     obstacles: &mut Vec<Cuboid>,
                     rejections: &mut usize,
                     aerial: bool|
     -> Result<()> {
        loop {
            let x = rng.gen_range(0.0..w - side);
            let y = rng.gen_range(0.0..dep - side);
            let z0 = if aerial {
                rng.gen_range(spec.params.h..AERIAL_BASE_MAX.min(hgt - side))
            } else {
                0.0
            };
            let cube = Cuboid::new([x, y, z0], [x + side, y + side, z0 + side]);
            let grown = inflate(&cube, r);
            let hits_start = grown.min[0] <= start[0]
                && start[0] <= grown.max[0]
                && grown.min[1] <= start[1]
                && start[1] <= grown.max[1];
            if hits_start || obstacles.iter().any(|o| o.intersects(&cube)) {
                *rejections += 1;
                if *rejections >= MAX_REJECTIONS {
                    return Err(Error::GenerationFailed(*rejections));
                }
                continue;
            }
            obstacles.push(cube);
            return Ok(());
        }
    };

    for _ in 0..spec.n_ground {
        place(&mut rng, &mut obstacles, &mut rejections, false)?;
    }
    for _ in 0..spec.n_aerial {
        place(&mut rng, &mut obstacles, &mut rejections, true)?;
    }

    // The target keeps an extra margin beyond the inflation radius so that
    // some tether always fits around its column.
    let cleared: Vec<Cuboid> = obstacles.iter().map(|o| inflate(o, r + TARGET_CLEARANCE)).collect();
    let target = loop {
        let t = [
            rng.gen_range(0.0..w),
            rng.gen_range(0.0..dep),
            rng.gen_range(spec.target_min_z..hgt),
        ];
        let p = crate::geometry::Point3::new(t[0], t[1], t[2]);
        if cleared.iter().all(|c| !c.contains(&p)) {
            break t;
        }
        rejections += 1;
        if rejections >= MAX_REJECTIONS {
            return Err(Error::GenerationFailed(rejections));
        }
    };

    let scene = Scene {
        bounds: Cuboid::new([0.0, 0.0, 0.0], spec.box_size),
        obstacles,
        start,
        targets: vec![target],
        params: spec.params,
    };
    scene.validate()?;
    Ok(scene)
}

/// Names of the structured reconstruction scenes.
pub const S1_FIREPLACE: &str = "s1_fireplace";
pub const S2_BALCONIES: &str = "s2_balconies";

/// Builds one of the structured scenes. Dimensions are fixed constants
/// chosen so that each target is reachable only through the intended
/// opening within the tether budget.
pub fn build_realistic(name: &str) -> Result<Scene> {
    match name {
        S1_FIREPLACE => Ok(s1_fireplace()),
        S2_BALCONIES => Ok(s2_balconies()),
        other => Err(Error::UnknownScenario(other.to_string())),
    }
}

/// A walled enclosure with a roof whose central opening acts as the
/// chimney; the target hovers above the opening. The carrier must enter
/// through the south gap and deploy under the hole: take-off points
/// outside the room need more tether than the budget allows.
fn s1_fireplace() -> Scene {
    let wall_z = 9.0;
    let obstacles = vec![
        // Enclosure walls, 1 m thick, with a 4 m entrance gap to the south.
        Cuboid::new([12.0, 12.0, 0.0], [13.0, 28.0, wall_z]),
        Cuboid::new([27.0, 12.0, 0.0], [28.0, 28.0, wall_z]),
        Cuboid::new([13.0, 27.0, 0.0], [27.0, 28.0, wall_z]),
        Cuboid::new([13.0, 12.0, 0.0], [18.0, 13.0, wall_z]),
        Cuboid::new([22.0, 12.0, 0.0], [27.0, 13.0, wall_z]),
        // Roof slabs framing the 4 x 4 chimney opening.
        Cuboid::new([12.0, 12.0, wall_z], [28.0, 18.0, wall_z + 1.0]),
        Cuboid::new([12.0, 22.0, wall_z], [28.0, 28.0, wall_z + 1.0]),
        Cuboid::new([12.0, 18.0, wall_z], [18.0, 22.0, wall_z + 1.0]),
        Cuboid::new([22.0, 18.0, wall_z], [28.0, 22.0, wall_z + 1.0]),
    ];
    let scene = Scene {
        bounds: Cuboid::new([0.0, 0.0, 0.0], [40.0, 40.0, 30.0]),
        obstacles,
        start: [4.0, 4.0],
        targets: vec![[20.0, 20.0, 13.0]],
        params: MarsupialParams { h: 1.5, r: 0.5, max_tether: 25.0 },
    };
    debug_assert!(scene.validate().is_ok());
    scene
}

/// A building with two recessed balconies on its south face and a low
/// forbidden ring the carrier cannot cross. Each target floats in the open
/// band of its balcony; the tether threads over the balcony railing.
fn s2_balconies() -> Scene {
    let obstacles = vec![
        // Building body.
        Cuboid::new([24.0, 30.0, 0.0], [36.0, 36.0, 25.0]),
        // Lower balcony: floor and front railing.
        Cuboid::new([27.0, 26.0, 7.5], [33.0, 30.0, 8.0]),
        Cuboid::new([27.0, 26.0, 8.0], [33.0, 26.5, 9.5]),
        // Upper balcony.
        Cuboid::new([27.0, 26.0, 15.5], [33.0, 30.0, 16.0]),
        Cuboid::new([27.0, 26.0, 16.0], [33.0, 26.5, 17.5]),
        // Roof slab over the upper balcony.
        Cuboid::new([27.0, 26.0, 23.5], [33.0, 30.0, 24.0]),
        // Forbidden ground ring, 0.5 m tall.
        Cuboid::new([21.0, 24.0, 0.0], [39.0, 25.0, 0.5]),
        Cuboid::new([21.0, 38.0, 0.0], [39.0, 39.0, 0.5]),
        Cuboid::new([21.0, 25.0, 0.0], [22.0, 38.0, 0.5]),
        Cuboid::new([38.0, 25.0, 0.0], [39.0, 38.0, 0.5]),
    ];
    let scene = Scene {
        bounds: Cuboid::new([0.0, 0.0, 0.0], [60.0, 60.0, 40.0]),
        obstacles,
        start: [8.0, 8.0],
        targets: vec![[30.0, 28.5, 14.0], [30.0, 28.5, 22.0]],
        params: MarsupialParams { h: 1.5, r: 0.5, max_tether: 40.0 },
    };
    debug_assert!(scene.validate().is_ok());
    scene
}

/// Planner selector for benchmark cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlannerKind {
    Maspa,
    MaspaMinus,
    Rrt,
}

impl PlannerKind {
    pub fn id(&self) -> &'static str {
        match self {
            PlannerKind::Maspa => "maspa",
            PlannerKind::MaspaMinus => "maspa-minus",
            PlannerKind::Rrt => "rrt_star",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "maspa" => Ok(PlannerKind::Maspa),
            "maspa-minus" => Ok(PlannerKind::MaspaMinus),
            "rrt" | "rrt_star" | "rrt-star" => Ok(PlannerKind::Rrt),
            other => Err(Error::InvalidScene(format!("unknown planner: {other}"))),
        }
    }
}

/// One benchmark measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub scenario: String,
    pub seed: u64,
    pub planner: String,
    pub p: usize,
    pub q: usize,
    pub c: usize,
    pub tl_m: f64,
    pub et_s: f64,
    pub stages: StageTimings,
}

/// Exact header of the benchmark CSV.
pub const BENCH_CSV_HEADER: &str = "scenario,seed,planner,p,q,c,tl_m,et_s,stage_slice_s,stage_pva_s,stage_cand_s,stage_graph_s,stage_search_s";

impl BenchRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            self.scenario,
            self.seed,
            self.planner,
            self.p,
            self.q,
            self.c,
            self.tl_m,
            self.et_s,
            self.stages.slice,
            self.stages.pva,
            self.stages.candidates,
            self.stages.graph,
            self.stages.search
        )
    }
}

/// Benchmark options beyond the grid itself.
#[derive(Debug, Clone, Copy)]
pub struct BenchOptions {
    pub c: usize,
    pub mode: TetherMode,
    pub rrt_budget_s: f64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self { c: 26, mode: TetherMode::Catenary, rrt_budget_s: 20.0 }
    }
}

/// Runs every (seed, p, q, planner) combination on freshly generated
/// random scenarios. Cells run in parallel; records are sorted before
/// returning. Failing cells are reported alongside and do not abort the
/// run.
pub fn benchmark_grid(
    seeds: &[u64],
    p_set: &[usize],
    q_set: &[usize],
    planners: &[PlannerKind],
    opts: &BenchOptions,
) -> (Vec<BenchRecord>, Vec<String>) {
    let mut cells = Vec::new();
    for &seed in seeds {
        for &p in p_set {
            for &q in q_set {
                for &planner in planners {
                    cells.push((seed, p, q, planner));
                }
            }
        }
    }
    let results: Vec<std::result::Result<BenchRecord, String>> = cells
        .par_iter()
        .map(|&(seed, p, q, planner)| run_cell(seed, p, q, planner, opts))
        .collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(msg) => failures.push(msg),
        }
    }
    records.sort_by(|a, b| {
        (&a.scenario, a.seed, &a.planner, a.p, a.q).cmp(&(&b.scenario, b.seed, &b.planner, b.p, b.q))
    });
    (records, failures)
}

fn run_cell(
    seed: u64,
    p: usize,
    q: usize,
    planner: PlannerKind,
    opts: &BenchOptions,
) -> std::result::Result<BenchRecord, String> {
    let scenario = format!("random-{seed}");
    let scene = random_scenario(&ScenarioSpec::with_seed(seed))
        .map_err(|e| format!("{scenario}: generation failed: {e}"))?;
    let started = std::time::Instant::now();
    let (tl, stages) = match planner {
        PlannerKind::Maspa | PlannerKind::MaspaMinus => {
            let params = PlannerParams {
                p,
                q,
                c: opts.c,
                mode: opts.mode,
                use_pva: planner == PlannerKind::Maspa,
            };
            let plans = plan_sequential(&scene, &params)
                .map_err(|e| format!("{scenario}/{}/p{p}q{q}: {e}", planner.id()))?;
            let tl: f64 = plans.iter().map(|pl| pl.total_length).sum();
            let mut stages = StageTimings::default();
            for pl in &plans {
                stages.slice += pl.timings.slice;
                stages.pva += pl.timings.pva;
                stages.candidates += pl.timings.candidates;
                stages.graph += pl.timings.graph;
                stages.search += pl.timings.search;
            }
            (tl, stages)
        }
        PlannerKind::Rrt => {
            let params = RrtParams { budget_s: opts.rrt_budget_s, seed, c: opts.c, ..Default::default() };
            let plans = rrt_star_sequential(&scene, &params)
                .map_err(|e| format!("{scenario}/rrt/p{p}q{q}: {e}"))?;
            let tl: f64 = plans.iter().map(|pl| pl.total_length).sum();
            (tl, StageTimings::default())
        }
    };
    let et = started.elapsed().as_secs_f64();
    Ok(BenchRecord {
        scenario,
        seed,
        planner: planner.id().into(),
        p,
        q,
        c: opts.c,
        tl_m: tl,
        et_s: et,
        stages,
    })
}

/// Writes records as CSV with the canonical header.
pub fn records_to_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from(BENCH_CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::maspa_plan;

    #[test]
    fn generator_is_deterministic() {
        let a = random_scenario(&ScenarioSpec::with_seed(11)).unwrap();
        let b = random_scenario(&ScenarioSpec::with_seed(11)).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let c = random_scenario(&ScenarioSpec::with_seed(12)).unwrap();
        assert_ne!(a.to_json(), c.to_json());
    }

    #[test]
    fn zero_obstacle_spec() {
        let spec = ScenarioSpec { n_ground: 0, n_aerial: 0, ..Default::default() };
        let scene = random_scenario(&spec).unwrap();
        assert!(scene.obstacles.is_empty());
    }

    #[test]
    fn generated_scenes_satisfy_invariants() {
        for seed in 0..200 {
            let scene = random_scenario(&ScenarioSpec::with_seed(seed)).unwrap();
            scene.validate().unwrap();
            assert_eq!(scene.obstacles.len(), 25);
            assert!(scene.targets[0][2] >= 25.0);
        }
    }

    #[test]
    fn unknown_scenario_name() {
        assert!(matches!(build_realistic("s3"), Err(Error::UnknownScenario(_))));
    }

    #[test]
    fn s1_take_off_feeds_through_the_fireplace() {
        let scene = build_realistic(S1_FIREPLACE).unwrap();
        scene.validate().unwrap();
        let plan = maspa_plan(&scene, 0, &PlannerParams::default()).unwrap();
        crate::oracle::validate_plan(&scene, &plan).unwrap();
        // All take-off candidates sit close to the chimney column; the far
        // field is tether-infeasible.
        assert!(plan.takeoff.d < 9.0, "take-off too far: {}", plan.takeoff.d);
        // The start region itself is not visible: no straight tether from
        // above the start reaches the target.
        let t = scene.target(0);
        let az = (scene.start[1] - t.y).atan2(scene.start[0] - t.x);
        let frame = crate::geometry::PlaneFrame::new(az, [t.x, t.y], t.z);
        let planar = crate::geometry::slice(&scene, &frame);
        let d_start = (scene.start[0] - t.x).hypot(scene.start[1] - t.y);
        let (visible, _) = crate::oracle::oracle_p_visible(
            crate::geometry::PlanePoint::new(d_start, scene.params.take_off_z()),
            &planar,
            scene.params.max_tether,
        );
        assert!(!visible, "start region should not be tether-visible");
    }

    #[test]
    fn s2_reaches_both_targets_sequentially() {
        let scene = build_realistic(S2_BALCONIES).unwrap();
        scene.validate().unwrap();
        let plans = plan_sequential(&scene, &PlannerParams::default()).unwrap();
        assert_eq!(plans.len(), 2);
        for plan in &plans {
            crate::oracle::validate_plan(&scene, plan).unwrap();
        }
        assert_eq!(plans[1].start, [
            plans[0].takeoff.ground.x,
            plans[0].takeoff.ground.y
        ]);
    }

    #[test]
    fn bench_grid_single_cell() {
        let (records, failures) = benchmark_grid(
            &[3],
            &[2],
            &[6],
            &[PlannerKind::Maspa, PlannerKind::MaspaMinus],
            &BenchOptions { c: 6, mode: TetherMode::Catenary, rrt_budget_s: 0.5 },
        );
        assert!(failures.is_empty(), "{failures:?}");
        assert_eq!(records.len(), 2);
        let csv = records_to_csv(&records);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), BENCH_CSV_HEADER);
        assert_eq!(lines.count(), 2);
    }
}
