//! Approximate 3D take-off locus: run the 2D visibility computation over a
//! beam of vertical half-planes through the target, then sample candidate
//! take-off points along the visible intervals, refined by catenary
//! feasibility in loose-tether mode.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catenary::{min_catenary_length, Catenary};
use crate::geometry::{
    inside_blocking_footprint, slice, PlanarScene, PlaneFrame, PlanePoint, Point3, Scene, EPS,
};
use crate::pva2d::{min_taut_chain, support_lengths, Chain, PlaneAnalysis};

/// Tether model used for candidate evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TetherMode {
    Taut,
    Catenary,
}

impl std::fmt::Display for TetherMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TetherMode::Taut => write!(f, "taut"),
            TetherMode::Catenary => write!(f, "catenary"),
        }
    }
}

/// Concrete tether realization attached to a candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Tether {
    Taut(Chain),
    Catenary(Catenary),
}

impl Tether {
    pub fn mode(&self) -> TetherMode {
        match self {
            Tether::Taut(_) => TetherMode::Taut,
            Tether::Catenary(_) => TetherMode::Catenary,
        }
    }

    pub fn length(&self) -> f64 {
        match self {
            Tether::Taut(c) => c.length,
            Tether::Catenary(c) => c.arc_length,
        }
    }
}

/// A feasible take-off position with its aerial connection to the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateTakeoff {
    /// Index of the full plane, 0..p.
    pub plane_index: usize,
    /// 0 for the base half-plane, 1 for the opposite one.
    pub side: u8,
    /// Azimuth of the owning half-plane, radians.
    pub azimuth: f64,
    /// Distance from the target column along the half-plane.
    pub d: f64,
    /// Ground position of the carrier.
    pub ground: Point3,
    /// Take-off point at height h - r above the ground position.
    pub takeoff: Point3,
    pub aerial_length: f64,
    pub tether: Tether,
}

/// Builds the beam of 2p half-plane frames through the target: p full
/// planes at uniform angular steps, each contributing both half-planes.
/// The beam phase is fixed so one plane contains the start position, which
/// hosts the obstacle-free optimum.
pub fn plane_beam(target: &Point3, start: [f64; 2], p: usize) -> Vec<PlaneFrame> {
    debug_assert!(p >= 1);
    let (sx, sy) = (start[0] - target.x, start[1] - target.y);
    let base = if sx.hypot(sy) > EPS { sy.atan2(sx) } else { 0.0 };
    (0..2 * p)
        .map(|k| {
            let azimuth = base + k as f64 * std::f64::consts::PI / p as f64;
            PlaneFrame::new(azimuth, [target.x, target.y], target.z)
        })
        .collect()
}

/// Half-plane work below this size runs sequentially; forking the thread
/// pool costs more than the slicing itself on small scenes.
const PARALLEL_WORK_THRESHOLD: usize = 20_000;

/// Slices the scene along every half-plane of the beam.
pub fn slice_beam(scene: &Scene, target_index: usize, p: usize) -> Vec<PlanarScene> {
    let t = scene.target(target_index);
    let frames = plane_beam(&t, scene.start, p);
    if frames.len() * (scene.obstacles.len() + 1) < PARALLEL_WORK_THRESHOLD {
        frames.iter().map(|f| slice(scene, f)).collect()
    } else {
        frames.par_iter().map(|f| slice(scene, f)).collect()
    }
}

/// Runs the per-plane visibility analyses, in parallel when the scene is
/// big enough to pay for it. Results are deterministic regardless of
/// scheduling.
pub fn analyze_planes(planes: Vec<PlanarScene>, l_max: f64) -> Vec<PlaneAnalysis> {
    let work: usize = planes.iter().map(|pl| pl.rects.len() * pl.rects.len() + 16).sum();
    if work < PARALLEL_WORK_THRESHOLD {
        planes.into_iter().map(|pl| PlaneAnalysis::new(pl, l_max)).collect()
    } else {
        planes.into_par_iter().map(|pl| PlaneAnalysis::new(pl, l_max)).collect()
    }
}

/// Full 3D visibility analysis: independent 2D computation per half-plane.
pub fn pva3d(scene: &Scene, target_index: usize, p: usize) -> Vec<PlaneAnalysis> {
    let l_max = scene.params.max_tether;
    analyze_planes(slice_beam(scene, target_index, p), l_max)
}

/// Candidate sampling parameters: q points per half-plane, tether mode and
/// the catenary length count.
#[derive(Debug, Clone, Copy)]
pub struct SampleParams {
    pub q: usize,
    pub mode: TetherMode,
    pub c: usize,
}

/// Spreads `q` points over the interval union: every interval keeps its
/// endpoints and the remaining budget is allocated proportionally to
/// interval length, placed uniformly inside each interval.
fn place_points(intervals: &[[f64; 2]], q: usize) -> Vec<f64> {
    let mut pts: Vec<f64> = Vec::new();
    for iv in intervals {
        pts.push(iv[0]);
        if iv[1] - iv[0] > EPS {
            pts.push(iv[1]);
        }
    }
    let total: f64 = intervals.iter().map(|iv| iv[1] - iv[0]).sum();
    let budget = q.saturating_sub(pts.len());
    if budget > 0 && total > EPS {
        let exact: Vec<f64> = intervals
            .iter()
            .map(|iv| budget as f64 * (iv[1] - iv[0]) / total)
            .collect();
        let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
        let mut left = budget - counts.iter().sum::<usize>();
        let mut rema: Vec<(f64, usize)> =
            exact.iter().enumerate().map(|(i, e)| (e - e.floor(), i)).collect();
        rema.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        for &(_, i) in rema.iter() {
            if left == 0 {
                break;
            }
            counts[i] += 1;
            left -= 1;
        }
        for (iv, k) in intervals.iter().zip(counts) {
            for j in 1..=k {
                pts.push(iv[0] + (iv[1] - iv[0]) * j as f64 / (k + 1) as f64);
            }
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    pts
}

fn evaluate_candidate(
    planar: &PlanarScene,
    tables: Option<&crate::pva2d::SupportTables>,
    d: f64,
    sp: &SampleParams,
    l_max: f64,
) -> Option<Tether> {
    let y = PlanePoint::new(d, planar.take_off_z);
    match sp.mode {
        TetherMode::Taut => {
            let chain = min_taut_chain(y, planar, tables.expect("taut mode needs tables"), l_max)?;
            Some(Tether::Taut(chain))
        }
        TetherMode::Catenary => {
            let (_, curve) = min_catenary_length(y, planar.target, l_max, sp.c, &planar.rects)?;
            Some(Tether::Catenary(curve))
        }
    }
}

fn push_candidates(
    out: &mut Vec<CandidateTakeoff>,
    scene: &Scene,
    planar: &PlanarScene,
    tables: Option<&crate::pva2d::SupportTables>,
    hp_index: usize,
    p: usize,
    points: &[f64],
    sp: &SampleParams,
) {
    let blockers = scene.ugv_blockers();
    let l_max = scene.params.max_tether;
    let toz = scene.params.take_off_z();
    let (fmin, fmax) = scene.bounds.footprint();
    for &d in points {
        let ground = planar.frame.to_world(PlanePoint::new(d, 0.0));
        let gp = [ground.x, ground.y];
        if gp[0] < fmin[0] - EPS || gp[0] > fmax[0] + EPS || gp[1] < fmin[1] - EPS || gp[1] > fmax[1] + EPS
        {
            continue;
        }
        if inside_blocking_footprint(gp, &blockers) {
            continue;
        }
        let Some(tether) = evaluate_candidate(planar, tables, d, sp, l_max) else {
            continue;
        };
        out.push(CandidateTakeoff {
            plane_index: hp_index % p,
            side: (hp_index / p) as u8,
            azimuth: planar.frame.azimuth,
            d,
            ground,
            takeoff: Point3::new(ground.x, ground.y, toz),
            aerial_length: tether.length(),
            tether,
        });
    }
}

/// Samples candidates along the visible intervals of every half-plane.
/// In catenary mode the visible intervals act as the superset filter; each
/// sampled point is then verified with the discrete catenary scan and
/// dropped when no clearing length exists. Points whose ground position is
/// not admissible for the carrier are dropped as well.
pub fn sample_candidates(
    analyses: &[PlaneAnalysis],
    scene: &Scene,
    sp: &SampleParams,
) -> Vec<CandidateTakeoff> {
    let p = analyses.len() / 2;
    let mut out = Vec::new();
    for (hp, analysis) in analyses.iter().enumerate() {
        if analysis.intervals.q_reach.is_none() {
            continue;
        }
        let points = place_points(&analysis.intervals.visible, sp.q);
        push_candidates(
            &mut out,
            scene,
            &analysis.planar,
            Some(&analysis.tables),
            hp,
            p,
            &points,
            sp,
        );
    }
    out
}

/// Candidate sampling without the visibility filter: q points uniformly
/// over the whole reachable span of every half-plane, each verified
/// individually against the tether model.
pub fn sample_candidates_unfiltered(
    planes: &[PlanarScene],
    scene: &Scene,
    sp: &SampleParams,
) -> Vec<CandidateTakeoff> {
    let p = planes.len() / 2;
    let l_max = scene.params.max_tether;
    let mut out = Vec::new();
    for (hp, planar) in planes.iter().enumerate() {
        let dz = planar.target.z - planar.take_off_z;
        if l_max < dz {
            continue;
        }
        let d_q = (l_max * l_max - dz * dz).max(0.0).sqrt();
        let tables = match sp.mode {
            TetherMode::Taut => Some(support_lengths(planar, l_max)),
            TetherMode::Catenary => None,
        };
        let points = place_points(&[[0.0, d_q]], sp.q);
        push_candidates(&mut out, scene, planar, tables.as_ref(), hp, p, &points, sp);
    }
    out
}

/// Interval dump rows for debugging and figure export:
/// (azimuth, side, d_lo, d_hi).
pub fn interval_rows(analyses: &[PlaneAnalysis]) -> Vec<(f64, u8, f64, f64)> {
    let p = (analyses.len() / 2).max(1);
    let mut rows = Vec::new();
    for (hp, a) in analyses.iter().enumerate() {
        for iv in &a.intervals.visible {
            rows.push((a.planar.frame.azimuth, (hp / p) as u8, iv[0], iv[1]));
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Cuboid, MarsupialParams};
    use crate::oracle::oracle_p_visible;

    fn scene(obstacles: Vec<Cuboid>, l_max: f64, target: [f64; 3]) -> Scene {
        Scene {
            bounds: Cuboid::new([-60.0, -60.0, 0.0], [60.0, 60.0, 40.0]),
            obstacles,
            start: [-20.0, 0.0],
            targets: vec![target],
            params: MarsupialParams { h: 1.5, r: 0.5, max_tether: l_max },
        }
    }

    #[test]
    fn beam_counts_and_phase() {
        let t = Point3::new(0.0, 0.0, 10.0);
        assert_eq!(plane_beam(&t, [-20.0, 0.0], 1).len(), 2);
        assert_eq!(plane_beam(&t, [-20.0, 0.0], 4).len(), 8);
        assert_eq!(plane_beam(&t, [-20.0, 0.0], 16).len(), 32);
        // One half-plane points straight at the start.
        let frames = plane_beam(&t, [-20.0, 0.0], 4);
        assert!((frames[0].azimuth - std::f64::consts::PI).abs() < 1e-12);
        // Opposite half-planes differ by pi.
        let d = (frames[4].azimuth - frames[0].azimuth).rem_euclid(std::f64::consts::TAU);
        assert!((d - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn obstacle_free_full_intervals() {
        let sc = scene(vec![], 20.0, [0.0, 0.0, 10.0]);
        let analyses = pva3d(&sc, 0, 4);
        let d_q = (400.0_f64 - 81.0).sqrt();
        for a in &analyses {
            assert_eq!(a.intervals.visible.len(), 1);
            assert!((a.intervals.visible[0][1] - d_q).abs() < 1e-9);
        }
    }

    #[test]
    fn unreachable_all_empty() {
        let sc = scene(vec![], 20.0, [0.0, 0.0, 25.0]);
        let analyses = pva3d(&sc, 0, 4);
        assert!(analyses.iter().all(|a| a.intervals.q_reach.is_none()));
    }

    #[test]
    fn extruded_wall_only_blocks_crossing_planes() {
        // Wall orthogonal to the start-target axis, matching the planar
        // wall fixture in the plane through the start.
        let wall = Cuboid::new([-5.5, -40.0, 2.5], [-4.5, 40.0, 24.5]);
        let sc = scene(vec![wall], 20.0, [0.0, 0.0, 10.0]);
        let analyses = pva3d(&sc, 0, 8);
        // Plane 0 points at the start and crosses the wall.
        let hit = &analyses[0];
        assert_eq!(hit.intervals.visible.len(), 1);
        assert!((hit.intervals.visible[0][1] - 15.0104).abs() < 1e-3);
        // The opposite half-plane misses the wall entirely.
        let away = &analyses[8];
        let d_q = 319.0_f64.sqrt();
        assert!((away.intervals.visible[0][1] - d_q).abs() < 1e-9);
        // Every half-plane agrees with the exhaustive oracle at samples.
        for a in &analyses {
            for frac in [0.05, 0.3, 0.55, 0.8, 0.95] {
                let d = d_q * frac;
                let near = a
                    .intervals
                    .visible
                    .iter()
                    .flat_map(|iv| [iv[0], iv[1]])
                    .any(|e| (d - e).abs() < 1e-6);
                if near {
                    continue;
                }
                let (ok, _) = oracle_p_visible(
                    PlanePoint::new(d, 1.0),
                    &a.planar,
                    20.0,
                );
                assert_eq!(ok, a.intervals.contains(d));
            }
        }
    }

    #[test]
    fn placement_single_interval() {
        let pts = place_points(&[[0.0, 10.0]], 5);
        let expect = [0.0, 2.5, 5.0, 7.5, 10.0];
        assert_eq!(pts.len(), 5);
        for (a, b) in pts.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn placement_proportional_with_endpoints() {
        let pts = place_points(&[[0.0, 6.0], [10.0, 12.0]], 10);
        assert!(pts.contains(&0.0) && pts.contains(&6.0) && pts.contains(&10.0) && pts.contains(&12.0));
        assert_eq!(pts.len(), 10);
        let in_first = pts.iter().filter(|&&d| d < 6.0 + 1e-9).count();
        let in_second = pts.len() - in_first;
        assert!(in_first > in_second);
    }

    #[test]
    fn candidates_obstacle_free_chord_everywhere() {
        let sc = scene(vec![], 20.0, [0.0, 0.0, 10.0]);
        let analyses = pva3d(&sc, 0, 2);
        let sp = SampleParams { q: 5, mode: TetherMode::Catenary, c: 8 };
        let cands = sample_candidates(&analyses, &sc, &sp);
        assert_eq!(cands.len(), 4 * 5);
        for c in &cands {
            let chord = c.takeoff.dist(&sc.target(0));
            assert!((c.aerial_length - chord).abs() < 1e-9);
            assert!((c.takeoff.z - 1.0).abs() < 1e-12);
            assert!(c.aerial_length <= 20.0 + 1e-9);
        }
    }

    #[test]
    fn refinement_keeps_candidate_locations() {
        let sc = scene(vec![], 20.0, [0.0, 0.0, 10.0]);
        let sp5 = SampleParams { q: 5, mode: TetherMode::Taut, c: 1 };
        let sp9 = SampleParams { q: 9, mode: TetherMode::Taut, c: 1 };
        let a2 = pva3d(&sc, 0, 2);
        let a4 = pva3d(&sc, 0, 4);
        let base: Vec<(f64, f64)> = sample_candidates(&a2, &sc, &sp5)
            .iter()
            .map(|c| (c.azimuth, c.d))
            .collect();
        for (cands, label) in [
            (sample_candidates(&a2, &sc, &sp9), "q refined"),
            (sample_candidates(&a4, &sc, &sp5), "p refined"),
        ] {
            let refined: Vec<(f64, f64)> = cands.iter().map(|c| (c.azimuth, c.d)).collect();
            for b in &base {
                assert!(
                    refined
                        .iter()
                        .any(|r| (r.0 - b.0).abs() < 1e-9 && (r.1 - b.1).abs() < 1e-9),
                    "{label}: lost candidate {:?}",
                    b
                );
            }
        }
    }

    #[test]
    fn condition_one_footprints_drop_candidates() {
        // A low slab across part of the start plane removes ground spots.
        let slab = Cuboid::new([-12.0, -3.0, 0.0], [-8.0, 3.0, 1.0]);
        let sc = scene(vec![slab], 20.0, [0.0, 0.0, 10.0]);
        let analyses = pva3d(&sc, 0, 1);
        let sp = SampleParams { q: 40, mode: TetherMode::Taut, c: 1 };
        let cands = sample_candidates(&analyses, &sc, &sp);
        for c in &cands {
            assert!(
                !(c.ground.x > -12.5 + EPS
                    && c.ground.x < -7.5 - EPS
                    && c.ground.y > -3.5 + EPS
                    && c.ground.y < 3.5 - EPS),
                "candidate inside blocked footprint: {:?}",
                c.ground
            );
        }
    }
}
