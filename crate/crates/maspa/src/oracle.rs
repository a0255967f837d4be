//! Independent brute-force verifiers used by tests and the acceptance
//! suite: exhaustive chain search, fine-grid catenary feasibility, grid
//! planning and a from-scratch plan validator.
//!
//! The verifiers share only the geometry predicates with the modules they
//! check; search and minimization are implemented independently.

use crate::catenary::solve_catenary;
use crate::geometry::{
    convex_at, inside_blocking_footprint, ne_step, segment_clear, slice, ugv_sweep_clear_blockers,
    PlanarScene, PlaneFrame, PlanePoint, Rect2, Scene, EPS,
};
use crate::planner::PlanResult;
use crate::pva3d::Tether;
use crate::{Error, Result};

/// Exhaustive minimum-CICP search from a take-off point by depth-first
/// enumeration over critical vertices with branch-and-bound on length.
/// Returns whether a chain of length at most `l_max` exists and the
/// minimum chain length found (over all lengths, not only those under the
/// budget) when any chain exists.
pub fn oracle_p_visible(y: PlanePoint, scene: &PlanarScene, l_max: f64) -> (bool, Option<f64>) {
    let target = scene.target;
    if y.d <= EPS {
        // Vertical tether straight up to the target.
        if segment_clear(y, target, &scene.rects) {
            let len = target.z - y.z;
            return (len <= l_max + 1e-9, Some(len));
        }
        return (false, None);
    }

    // Candidate bend points, far-to-near so the recursion scans a suffix.
    let mut supports: Vec<PlanePoint> = Vec::new();
    for r in &scene.rects {
        if r.flags.aerial_support_lr {
            supports.push(r.lower_right());
        }
        if r.flags.aerial_support_ll {
            supports.push(r.lower_left());
        }
    }
    supports.sort_by(|a, b| b.d.partial_cmp(&a.d).unwrap());

    struct Dfs<'a> {
        supports: Vec<PlanePoint>,
        rects: &'a [Rect2],
        target: PlanePoint,
        best: f64,
    }

    impl Dfs<'_> {
        fn go(&mut self, prev: Option<PlanePoint>, cur: PlanePoint, len: f64, used: u64) {
            if len + cur.dist(&self.target) >= self.best - 1e-12 {
                return;
            }
            // Finish directly at the target.
            let finish_ok = ne_step(cur, self.target)
                && prev.map_or(true, |p| convex_at(p, cur, self.target))
                && segment_clear(cur, self.target, self.rects);
            if finish_ok {
                self.best = self.best.min(len + cur.dist(&self.target));
            }
            for i in 0..self.supports.len() {
                if used & (1 << i) != 0 {
                    continue;
                }
                let s = self.supports[i];
                if s.d >= cur.d - EPS {
                    continue;
                }
                if !ne_step(cur, s) {
                    continue;
                }
                if let Some(p) = prev {
                    if !convex_at(p, cur, s) {
                        continue;
                    }
                }
                if !segment_clear(cur, s, self.rects) {
                    continue;
                }
                self.go(Some(cur), s, len + cur.dist(&s), used | (1 << i));
            }
        }
    }

    let mut dfs = Dfs { supports, rects: &scene.rects, target, best: f64::INFINITY };
    dfs.go(None, y, 0.0, 0);
    if dfs.best.is_finite() {
        (dfs.best <= l_max + 1e-9, Some(dfs.best))
    } else {
        (false, None)
    }
}

/// Fine-grid catenary feasibility: tests `10 * c` arc lengths uniformly
/// spaced on [chord, l_max] with a sampled collision check per curve.
/// A curve is feasible when no sample lies inside a rectangle or below the
/// ground plane.
pub fn oracle_c_visible(y: PlanePoint, t: PlanePoint, l_max: f64, c: usize, rects: &[Rect2]) -> bool {
    oracle_min_catenary(y, t, l_max, c, rects).is_some()
}

/// As [`oracle_c_visible`] but returning the shortest feasible grid length.
pub fn oracle_min_catenary(
    y: PlanePoint,
    t: PlanePoint,
    l_max: f64,
    c: usize,
    rects: &[Rect2],
) -> Option<f64> {
    let chord = y.dist(&t);
    if chord > l_max + EPS {
        return None;
    }
    let steps = (10 * c).max(2);
    for i in 0..steps {
        let s = chord + (l_max - chord) * i as f64 / (steps - 1) as f64;
        let Ok(curve) = solve_catenary(y, t, s) else { continue };
        // Walk a 1000-point polyline along the curve, checking each little
        // chord against the rectangles; this catches penetrations thinner
        // than the sample spacing. Samples are generated lazily so
        // colliding curves die fast.
        let n = 1000;
        let vertical = (t.d - y.d).abs() < 1e-12;
        let sample = |k: usize| {
            let f = k as f64 / (n - 1) as f64;
            let d = y.d + (t.d - y.d) * f;
            if vertical {
                PlanePoint::new(d, y.z + (t.z - y.z) * f)
            } else {
                PlanePoint::new(d, curve.z_at(d))
            }
        };
        let mut prev = sample(0);
        let mut ok = prev.z >= -EPS;
        for k in 1..n {
            if !ok {
                break;
            }
            let cur = sample(k);
            ok = cur.z >= -EPS && segment_clear(prev, cur, rects);
            prev = cur;
        }
        if ok {
            return Some(s.max(chord));
        }
    }
    None
}

/// Tether model used by the grid-planning oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleTether {
    Taut,
    Catenary { c: usize },
}

/// Brute-force planner: discretizes the ground into a grid, runs an exact
/// graph search for ground distances from the start, evaluates aerial
/// feasibility per node on its own vertical plane and returns the best
/// total length. Intended for tiny scenes.
pub fn oracle_plan(
    scene: &Scene,
    target_index: usize,
    grid_step: f64,
    tether: OracleTether,
) -> Result<f64> {
    let t = scene.target(target_index);
    let params = &scene.params;
    let toz = params.take_off_z();
    let l_max = params.max_tether;
    let dz = t.z - toz;
    if l_max < dz {
        return Err(Error::Unreachable(target_index));
    }
    let d_q = (l_max * l_max - dz * dz).sqrt();
    let blockers = scene.ugv_blockers();

    let (bx, by) = (scene.bounds.min[0], scene.bounds.min[1]);
    let nx = ((scene.bounds.max[0] - bx) / grid_step).round() as usize + 1;
    let ny = ((scene.bounds.max[1] - by) / grid_step).round() as usize + 1;
    let pos = |i: usize| -> [f64; 2] {
        [bx + (i % nx) as f64 * grid_step, by + (i / nx) as f64 * grid_step]
    };
    let n_nodes = nx * ny + 1; // grid plus the start
    let start_id = nx * ny;
    let start = scene.start;

    // 32-connected neighborhood keeps the grid metric within ~1.3% of
    // Euclidean length.
    let mut offsets: Vec<(i64, i64)> = Vec::new();
    for dx in -3i64..=3 {
        for dy in -3i64..=3 {
            if (dx, dy) != (0, 0) && gcd(dx.unsigned_abs(), dy.unsigned_abs()) == 1 {
                offsets.push((dx, dy));
            }
        }
    }

    let mut dist = vec![f64::INFINITY; n_nodes];
    dist[start_id] = 0.0;
    let mut heap = std::collections::BinaryHeap::new();
    heap.push((std::cmp::Reverse(ordered(0.0)), start_id));
    while let Some((std::cmp::Reverse(d), u)) = heap.pop() {
        let d = d.0;
        if d > dist[u] + 1e-12 {
            continue;
        }
        let pu = if u == start_id { start } else { pos(u) };
        let mut relax = |v: usize, pv: [f64; 2]| {
            if inside_blocking_footprint(pv, &blockers) {
                return;
            }
            let w = ((pv[0] - pu[0]).powi(2) + (pv[1] - pu[1]).powi(2)).sqrt();
            if dist[u] + w < dist[v] - 1e-12 && ugv_sweep_clear_blockers(pu, pv, &blockers) {
                dist[v] = dist[u] + w;
                heap.push((std::cmp::Reverse(ordered(dist[v])), v));
            }
        };
        if u == start_id {
            // Seed the start into nearby grid nodes.
            let r = (3.0 * grid_step).ceil();
            let i0 = (((start[0] - r - bx) / grid_step).floor().max(0.0)) as usize;
            let j0 = (((start[1] - r - by) / grid_step).floor().max(0.0)) as usize;
            let i1 = ((((start[0] + r - bx) / grid_step).ceil()) as usize).min(nx - 1);
            let j1 = ((((start[1] + r - by) / grid_step).ceil()) as usize).min(ny - 1);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    relax(j * nx + i, pos(j * nx + i));
                }
            }
        } else {
            let (ix, iy) = ((u % nx) as i64, (u / nx) as i64);
            for &(ox, oy) in &offsets {
                let (jx, jy) = (ix + ox, iy + oy);
                if jx < 0 || jy < 0 || jx >= nx as i64 || jy >= ny as i64 {
                    continue;
                }
                let v = (jy as usize) * nx + jx as usize;
                relax(v, pos(v));
            }
        }
    }

    let t_ground = [t.x, t.y];
    let mut best = f64::INFINITY;
    for u in 0..n_nodes {
        if !dist[u].is_finite() {
            continue;
        }
        let pu = if u == start_id { start } else { pos(u) };
        let d_t = ((pu[0] - t_ground[0]).powi(2) + (pu[1] - t_ground[1]).powi(2)).sqrt();
        if d_t > d_q + EPS || dist[u] + d_t.hypot(dz) >= best {
            continue;
        }
        let azimuth = (pu[1] - t_ground[1]).atan2(pu[0] - t_ground[0]);
        let frame = PlaneFrame::new(azimuth, t_ground, t.z);
        let planar = slice(scene, &frame);
        let y = PlanePoint::new(d_t, toz);
        let aerial = match tether {
            OracleTether::Taut => {
                let (ok, len) = oracle_p_visible(y, &planar, l_max);
                if ok {
                    len
                } else {
                    None
                }
            }
            OracleTether::Catenary { c } => {
                oracle_min_catenary(y, planar.target, l_max, c, &planar.rects)
            }
        };
        if let Some(a) = aerial {
            best = best.min(dist[u] + a);
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::Unreachable(target_index))
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

fn ordered(x: f64) -> OrderedF64 {
    OrderedF64(x)
}

/// Total order on finite costs for the heap.
#[derive(PartialEq, PartialOrd)]
struct OrderedF64(f64);
impl Eq for OrderedF64 {}
#[allow(clippy::derive_ord_xor_partial_ord)]
impl Ord for OrderedF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.partial_cmp(other).unwrap()
    }
}

/// Re-checks a finished plan from scratch: ground sweeps, take-off lift,
/// tether collision and length accounting. Returns a description of the
/// first violation, if any.
pub fn validate_plan(scene: &Scene, plan: &PlanResult) -> std::result::Result<(), String> {
    let params = &scene.params;
    let blockers = scene.ugv_blockers();
    let g = &plan.ground_path;
    if g.is_empty() {
        return Err("empty ground path".into());
    }
    let x = [plan.takeoff.ground.x, plan.takeoff.ground.y];
    if (g[0][0] - plan.start[0]).abs() > 1e-9 || (g[0][1] - plan.start[1]).abs() > 1e-9 {
        return Err("ground path does not start at S".into());
    }
    let last = g[g.len() - 1];
    if (last[0] - x[0]).abs() > 1e-9 || (last[1] - x[1]).abs() > 1e-9 {
        return Err("ground path does not end at the take-off ground point".into());
    }
    let mut ground_len = 0.0;
    for w in g.windows(2) {
        if !ugv_sweep_clear_blockers(w[0], w[1], &blockers) {
            return Err(format!("ground edge {:?} -> {:?} not sweep-clear", w[0], w[1]));
        }
        ground_len += ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt();
    }

    let t = scene.target(plan.target_index);
    let toz = params.take_off_z();
    if (plan.takeoff.takeoff.z - toz).abs() > 1e-9
        || (plan.takeoff.takeoff.x - x[0]).abs() > 1e-9
        || (plan.takeoff.takeoff.y - x[1]).abs() > 1e-9
    {
        return Err("take-off point is not the ground point lifted by h - r".into());
    }

    // Rebuild the vertical plane through the take-off point and re-check
    // the tether inside it.
    let d = ((x[0] - t.x).powi(2) + (x[1] - t.y).powi(2)).sqrt();
    let azimuth = (x[1] - t.y).atan2(x[0] - t.x);
    let frame = PlaneFrame::new(azimuth, [t.x, t.y], t.z);
    let planar = slice(scene, &frame);
    let aerial_len = match &plan.takeoff.tether {
        Tether::Taut(chain) => {
            let v = &chain.vertices;
            if v.first().map(|p| (p.d - d).abs() > 1e-6 || (p.z - toz).abs() > 1e-9) != Some(false) {
                return Err("chain does not start at the take-off point".into());
            }
            let end = v.last().unwrap();
            if end.d.abs() > 1e-9 || (end.z - t.z).abs() > 1e-9 {
                return Err("chain does not end at the target".into());
            }
            if !chain.is_valid(&planar.rects, params.max_tether) {
                return Err("chain violates a CICP invariant".into());
            }
            chain.length
        }
        Tether::Catenary(cat) => {
            let [p, q] = cat.anchors;
            if (p.d - d).abs() > 1e-6 || (p.z - toz).abs() > 1e-9 {
                return Err("catenary does not start at the take-off point".into());
            }
            if q.d.abs() > 1e-9 || (q.z - t.z).abs() > 1e-9 {
                return Err("catenary does not end at the target".into());
            }
            if cat.arc_length > params.max_tether + 1e-9 {
                return Err("catenary longer than the tether budget".into());
            }
            let ok = cat
                .sample(1000)
                .iter()
                .all(|s| s.z >= -EPS && planar.rects.iter().all(|r| !r.contains_interior(s)));
            if !ok {
                return Err("catenary collides".into());
            }
            cat.arc_length
        }
    };
    if (plan.takeoff.aerial_length - aerial_len).abs() > 1e-6 {
        return Err("stored aerial length disagrees with the tether".into());
    }
    if (plan.total_length - (ground_len + aerial_len)).abs() > 1e-6 {
        return Err(format!(
            "total length {} is not ground {} + aerial {}",
            plan.total_length, ground_len, aerial_len
        ));
    }
    Ok(())
}
