//! The sequential planning strategy: build the ground visibility graph
//! augmented with take-off candidates and a virtual target vertex, search
//! it for the shortest combined ground+aerial route, and assemble the full
//! plan. Also hosts the ablation variant that skips the visibility filter.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::geometry::{
    inside_blocking_footprint, ugv_sweep_clear_blockers, PlanePoint, Scene, EPS,
};
use crate::pva3d::{
    sample_candidates, sample_candidates_unfiltered, slice_beam, CandidateTakeoff, SampleParams,
    Tether,
};
pub use crate::pva3d::TetherMode;
use crate::{Error, Result};

/// Planner knobs: p planes, q candidates per half-plane, c catenary
/// lengths, the tether model, and whether the visibility filter runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerParams {
    pub p: usize,
    pub q: usize,
    pub c: usize,
    pub mode: TetherMode,
    pub use_pva: bool,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self { p: 16, q: 30, c: 26, mode: TetherMode::Catenary, use_pva: true }
    }
}

/// Kind of a ground-graph vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroundVertex {
    Start,
    Corner,
    /// Index into the candidate list.
    Candidate(usize),
    /// The virtual target vertex; its incident edges carry aerial lengths.
    Virtual,
}

/// Undirected weighted graph over the ground plus the virtual vertex.
#[derive(Debug, Clone)]
pub struct GroundGraph {
    pub positions: Vec<[f64; 2]>,
    pub kinds: Vec<GroundVertex>,
    pub adjacency: Vec<Vec<(usize, f64)>>,
    pub start: usize,
    pub target: usize,
}

impl GroundGraph {
    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    fn add_edge(&mut self, a: usize, b: usize, w: f64) {
        self.adjacency[a].push((b, w));
        self.adjacency[b].push((a, w));
    }
}

/// Builds the augmented visibility graph: the start, the inflated corners
/// of blocking footprints, the candidate ground points and the virtual
/// target. Optimal ground paths bend only at obstacle corners, so edges
/// between pairs of candidates are not materialized.
pub fn build_ground_graph(
    scene: &Scene,
    start: [f64; 2],
    candidates: &[CandidateTakeoff],
) -> Result<GroundGraph> {
    if candidates.is_empty() {
        return Err(Error::NoCandidates);
    }
    let blockers = scene.ugv_blockers();
    let (fmin, fmax) = scene.bounds.footprint();

    let mut g = GroundGraph {
        positions: vec![start],
        kinds: vec![GroundVertex::Start],
        adjacency: Vec::new(),
        start: 0,
        target: 0,
    };
    for c in &blockers {
        for corner in [
            [c.min[0], c.min[1]],
            [c.min[0], c.max[1]],
            [c.max[0], c.min[1]],
            [c.max[0], c.max[1]],
        ] {
            let in_bounds = corner[0] >= fmin[0] - EPS
                && corner[0] <= fmax[0] + EPS
                && corner[1] >= fmin[1] - EPS
                && corner[1] <= fmax[1] + EPS;
            if in_bounds && !inside_blocking_footprint(corner, &blockers) {
                g.positions.push(corner);
                g.kinds.push(GroundVertex::Corner);
            }
        }
    }
    let n_real = g.positions.len();
    for (i, c) in candidates.iter().enumerate() {
        g.positions.push([c.ground.x, c.ground.y]);
        g.kinds.push(GroundVertex::Candidate(i));
    }
    g.positions.push([f64::NAN, f64::NAN]);
    g.kinds.push(GroundVertex::Virtual);
    g.target = g.positions.len() - 1;
    g.adjacency = vec![Vec::new(); g.positions.len()];

    // Start and corner vertices connect among themselves and to candidates.
    for a in 0..n_real {
        for b in (a + 1)..n_real {
            if ugv_sweep_clear_blockers(g.positions[a], g.positions[b], &blockers) {
                let w = dist2(g.positions[a], g.positions[b]);
                g.add_edge(a, b, w);
            }
        }
        for (i, _) in candidates.iter().enumerate() {
            let b = n_real + i;
            if ugv_sweep_clear_blockers(g.positions[a], g.positions[b], &blockers) {
                let w = dist2(g.positions[a], g.positions[b]);
                g.add_edge(a, b, w);
            }
        }
    }
    for (i, c) in candidates.iter().enumerate() {
        g.add_edge(n_real + i, g.target, c.aerial_length);
    }
    Ok(g)
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Exact nonnegative-weight shortest path between the graph's start and
/// virtual target. Ties are broken toward the lexicographically smallest
/// predecessor so repeated runs reconstruct identical paths.
pub fn shortest_path(graph: &GroundGraph) -> Result<(Vec<usize>, f64)> {
    let n = graph.vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = std::collections::BinaryHeap::new();
    dist[graph.start] = 0.0;
    heap.push(HeapEntry { cost: 0.0, vertex: graph.start });
    while let Some(HeapEntry { cost, vertex }) = heap.pop() {
        if done[vertex] {
            continue;
        }
        done[vertex] = true;
        if vertex == graph.target {
            break;
        }
        for &(next, w) in &graph.adjacency[vertex] {
            let cand = cost + w;
            if cand < dist[next] - 1e-15 {
                dist[next] = cand;
                pred[next] = vertex;
                heap.push(HeapEntry { cost: cand, vertex: next });
            } else if (cand - dist[next]).abs() <= 1e-15 && vertex < pred[next] {
                pred[next] = vertex;
            }
        }
    }
    if !dist[graph.target].is_finite() {
        return Err(Error::Unreachable(0));
    }
    let mut path = vec![graph.target];
    while *path.last().unwrap() != graph.start {
        path.push(pred[*path.last().unwrap()]);
    }
    path.reverse();
    Ok((path, dist[graph.target]))
}

#[derive(PartialEq)]
struct HeapEntry {
    cost: f64,
    vertex: usize,
}
impl Eq for HeapEntry {}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Min-heap on cost; ties prefer the smaller vertex id.
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap()
            .then(other.vertex.cmp(&self.vertex))
    }
}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Wall-clock seconds per pipeline stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub slice: f64,
    pub pva: f64,
    pub candidates: f64,
    pub graph: f64,
    pub search: f64,
}

impl StageTimings {
    pub fn total(&self) -> f64 {
        self.slice + self.pva + self.candidates + self.graph + self.search
    }
}

/// A complete sequential plan for one target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub planner: String,
    pub target_index: usize,
    /// Ground start of this plan (the previous take-off point for
    /// follow-up targets).
    pub start: [f64; 2],
    /// Ground polyline from the start to the take-off ground point.
    pub ground_path: Vec<[f64; 2]>,
    pub takeoff: CandidateTakeoff,
    /// Aerial polyline in world coordinates from the take-off point to the
    /// target (chain vertices, or a sampled catenary).
    pub aerial_path: Vec<[f64; 3]>,
    #[serde(rename = "tl_m")]
    pub total_length: f64,
    #[serde(rename = "timings_s")]
    pub timings: StageTimings,
    pub params: PlannerParams,
    /// Free-form notes: conventions that affect how numbers are read.
    pub metadata: std::collections::BTreeMap<String, String>,
}

/// Number of points used to polygonize a catenary for output.
pub const CATENARY_EXPORT_SAMPLES: usize = 128;

pub(crate) fn aerial_polyline(c: &CandidateTakeoff) -> Vec<[f64; 3]> {
    let frame_points: Vec<PlanePoint> = match &c.tether {
        Tether::Taut(chain) => chain.vertices.clone(),
        Tether::Catenary(curve) => curve.sample(CATENARY_EXPORT_SAMPLES),
    };
    let (cos_a, sin_a) = (c.azimuth.cos(), c.azimuth.sin());
    let t_ground = [
        c.ground.x - c.d * cos_a,
        c.ground.y - c.d * sin_a,
    ];
    frame_points
        .iter()
        .map(|p| [t_ground[0] + p.d * cos_a, t_ground[1] + p.d * sin_a, p.z])
        .collect()
}

fn plan_metadata(params: &PlannerParams) -> std::collections::BTreeMap<String, String> {
    let mut m = std::collections::BTreeMap::new();
    m.insert("plane_convention".into(), format!("p={} full planes = {} half-plane runs", params.p, 2 * params.p));
    m.insert("sequential_tl".into(), "sum of per-target plans; the aerial retrace between targets is excluded".into());
    m
}

/// Runs the full pipeline for one target and start position.
pub fn maspa_plan_from(
    scene: &Scene,
    start: [f64; 2],
    target_index: usize,
    params: &PlannerParams,
) -> Result<PlanResult> {
    let mut timings = StageTimings::default();
    let sp = SampleParams { q: params.q, mode: params.mode, c: params.c };

    let mut scene_here = scene.clone();
    scene_here.start = start;
    let rise = scene_here.target(target_index).z - scene_here.params.take_off_z();
    if scene_here.params.max_tether < rise {
        return Err(Error::Unreachable(target_index));
    }

    let t0 = Instant::now();
    let planes = slice_beam(&scene_here, target_index, params.p);
    timings.slice = t0.elapsed().as_secs_f64();

    let candidates = if params.use_pva {
        let t1 = Instant::now();
        let l_max = scene_here.params.max_tether;
        let analyses = crate::pva3d::analyze_planes(planes, l_max);
        timings.pva = t1.elapsed().as_secs_f64();
        let t2 = Instant::now();
        let cands = sample_candidates(&analyses, &scene_here, &sp);
        timings.candidates = t2.elapsed().as_secs_f64();
        cands
    } else {
        let t1 = Instant::now();
        let cands = sample_candidates_unfiltered(&planes, &scene_here, &sp);
        timings.candidates = t1.elapsed().as_secs_f64();
        cands
    };

    let t2 = Instant::now();
    let graph = build_ground_graph(&scene_here, start, &candidates)?;
    timings.graph = t2.elapsed().as_secs_f64();

    let t3 = Instant::now();
    let (path, total) =
        shortest_path(&graph).map_err(|_| Error::Unreachable(target_index))?;
    timings.search = t3.elapsed().as_secs_f64();

    // The vertex before the virtual target is the chosen candidate.
    let chosen = match graph.kinds[path[path.len() - 2]] {
        GroundVertex::Candidate(i) => &candidates[i],
        _ => return Err(Error::Unreachable(target_index)),
    };
    let ground_path: Vec<[f64; 2]> =
        path[..path.len() - 1].iter().map(|&v| graph.positions[v]).collect();
    Ok(PlanResult {
        planner: if params.use_pva { "maspa".into() } else { "maspa-minus".into() },
        target_index,
        start,
        ground_path,
        takeoff: chosen.clone(),
        aerial_path: aerial_polyline(chosen),
        total_length: total,
        timings,
        params: *params,
        metadata: plan_metadata(params),
    })
}

/// Plans the scene's target `target_index` from the scene start.
pub fn maspa_plan(scene: &Scene, target_index: usize, params: &PlannerParams) -> Result<PlanResult> {
    maspa_plan_from(scene, scene.start, target_index, params)
}

/// Plans every target in order. Each follow-up plan starts at the previous
/// take-off ground point (the aerial vehicle retraces its path back to the
/// carrier; that retrace is not charged to the reported totals).
pub fn plan_sequential(scene: &Scene, params: &PlannerParams) -> Result<Vec<PlanResult>> {
    let mut out = Vec::new();
    let mut start = scene.start;
    for k in 0..scene.targets.len() {
        let plan = maspa_plan_from(scene, start, k, params).map_err(|e| match e {
            Error::Unreachable(_) => Error::Unreachable(k),
            Error::NoCandidates => Error::NoCandidates,
            other => other,
        })?;
        start = [plan.takeoff.ground.x, plan.takeoff.ground.y];
        out.push(plan);
    }
    Ok(out)
}

/// Total length across a sequential plan set.
pub fn combined_total(plans: &[PlanResult]) -> f64 {
    plans.iter().map(|p| p.total_length).sum()
}
