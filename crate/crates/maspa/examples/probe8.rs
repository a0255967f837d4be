use maspa::planner::{plan_sequential, PlannerParams};
use maspa::scenario::{build_realistic, S1_FIREPLACE, S2_BALCONIES};

fn main() {
    for name in [S1_FIREPLACE, S2_BALCONIES] {
        let scene = build_realistic(name).unwrap();
        for use_pva in [true, false] {
            let params = PlannerParams { use_pva, ..Default::default() };
            let t0 = std::time::Instant::now();
            let plans = plan_sequential(&scene, &params).unwrap();
            let wall = t0.elapsed().as_secs_f64();
            let mut agg = maspa::planner::StageTimings::default();
            let mut n_cand = 0usize;
            for p in &plans {
                agg.slice += p.timings.slice;
                agg.pva += p.timings.pva;
                agg.candidates += p.timings.candidates;
                agg.graph += p.timings.graph;
                agg.search += p.timings.search;
            }
            let _ = &mut n_cand;
            println!(
                "{name} use_pva={use_pva}: wall {:.4} slice {:.4} pva {:.4} cand {:.4} graph {:.4} search {:.4} tl {:.2}",
                wall, agg.slice, agg.pva, agg.candidates, agg.graph, agg.search,
                plans.iter().map(|p| p.total_length).sum::<f64>()
            );
        }
    }
}
