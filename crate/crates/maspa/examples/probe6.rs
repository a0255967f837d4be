use maspa::planner::{maspa_plan, PlannerParams};
use maspa::scenario::{random_scenario, ScenarioSpec};
use maspa::pva3d::{pva3d, sample_candidates, SampleParams};
use maspa::TetherMode;

fn main() {
    let scene = random_scenario(&ScenarioSpec::with_seed(107)).unwrap();
    let t = scene.target(0);
    println!("target {:?}", t);
    for o in &scene.obstacles {
        let g = maspa::geometry::inflate(o, 0.5);
        let dx = (t.x - g.min[0].max(t.x.min(g.max[0]))).abs();
        let _ = dx;
        if (t.x - (g.min[0] + g.max[0]) / 2.0).abs() < 6.0 && (t.y - (g.min[1] + g.max[1]) / 2.0).abs() < 6.0 {
            println!("near cube: {:?} (inflated z {:.2}..{:.2})", o, g.min[2], g.max[2]);
        }
    }
    let analyses = pva3d(&scene, 0, 4);
    for (i, a) in analyses.iter().enumerate() {
        println!("hp {i} az {:.2}: visible {:?}", a.planar.frame.azimuth, a.intervals.visible);
    }
    let sp = SampleParams { q: 10, mode: TetherMode::Catenary, c: 26 };
    let cands = sample_candidates(&analyses, &scene, &sp);
    println!("candidates: {}", cands.len());
    let sp_taut = SampleParams { q: 10, mode: TetherMode::Taut, c: 26 };
    let cands_taut = sample_candidates(&analyses, &scene, &sp_taut);
    println!("taut candidates: {}", cands_taut.len());
    match maspa_plan(&scene, 0, &PlannerParams { p: 16, q: 30, ..Default::default() }) {
        Ok(p) => println!("plan ok tl {}", p.total_length),
        Err(e) => println!("plan err: {e}"),
    }
}
