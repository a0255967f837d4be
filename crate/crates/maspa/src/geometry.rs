//! World-space primitives shared by every other module: points, cuboids,
//! obstacle inflation, vertical-plane slicing and collision predicates.
//!
//! Coordinate conventions. World coordinates are meters with z up and the
//! ground at z = 0. Inside a vertical half-plane through the target column,
//! a point is (d, z) where d >= 0 is the horizontal distance from the
//! target's ground projection, increasing away from the target, and z is
//! height. Tether chains run toward the target with d strictly decreasing
//! and z non-decreasing.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Absolute tolerance for geometric predicates, in meters. Distances to a
/// boundary at or below this count as tangency, which is collision-free.
pub const EPS: f64 = 1e-9;

/// System constants of the marsupial vehicle pair.
///
/// `h` is the height of the carrying configuration, `r` the UAV sphere
/// radius and `max_tether` the maximum tether length. The take-off height is
/// `h - r`; the aerial line sits at `z = h`. The tether tie point on the
/// carrier at height `h - 2r` plays no role in planning and is not stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarsupialParams {
    pub h: f64,
    pub r: f64,
    #[serde(rename = "L")]
    pub max_tether: f64,
}

impl MarsupialParams {
    pub fn new(h: f64, r: f64, max_tether: f64) -> Result<Self> {
        let p = Self { h, r, max_tether };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.h > 2.0 * self.r) {
            return Err(Error::InvalidScene(format!(
                "params require h > 2r > 0, got h={} r={}",
                self.h, self.r
            )));
        }
        if !(self.max_tether > 0.0) {
            return Err(Error::InvalidScene("max tether length must be positive".into()));
        }
        Ok(())
    }

    /// Height of the take-off line/plane z = h - r.
    pub fn take_off_z(&self) -> f64 {
        self.h - self.r
    }
}

/// A 3D point, z up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dist(&self, other: &Point3) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn dist_xy(&self, other: &Point3) -> f64 {
        let (dx, dy) = (self.x - other.x, self.y - other.y);
        (dx * dx + dy * dy).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// A point of a vertical half-plane: horizontal distance from the target
/// column and height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanePoint {
    pub d: f64,
    pub z: f64,
}

impl PlanePoint {
    pub fn new(d: f64, z: f64) -> Self {
        Self { d, z }
    }

    pub fn dist(&self, other: &PlanePoint) -> f64 {
        let (dd, dz) = (self.d - other.d, self.z - other.z);
        (dd * dd + dz * dz).sqrt()
    }
}

/// Axis-aligned cuboid given by two opposite corners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cuboid {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Cuboid {
    pub fn new(min: [f64; 3], max: [f64; 3]) -> Self {
        Self { min, max }
    }

    pub fn is_valid(&self) -> bool {
        (0..3).all(|i| self.min[i] < self.max[i] && self.min[i].is_finite() && self.max[i].is_finite())
    }

    pub fn contains(&self, p: &Point3) -> bool {
        p.x >= self.min[0]
            && p.x <= self.max[0]
            && p.y >= self.min[1]
            && p.y <= self.max[1]
            && p.z >= self.min[2]
            && p.z <= self.max[2]
    }

    /// Closed containment shrunk by `margin` on every face; used for
    /// interior (non-tangent) tests.
    pub fn contains_interior(&self, p: &Point3, margin: f64) -> bool {
        p.x > self.min[0] + margin
            && p.x < self.max[0] - margin
            && p.y > self.min[1] + margin
            && p.y < self.max[1] - margin
            && p.z > self.min[2] + margin
            && p.z < self.max[2] - margin
    }

    pub fn intersects(&self, other: &Cuboid) -> bool {
        (0..3).all(|i| self.min[i] < other.max[i] && other.min[i] < self.max[i])
    }

    /// Ground-plane footprint as (min_xy, max_xy).
    pub fn footprint(&self) -> ([f64; 2], [f64; 2]) {
        ([self.min[0], self.min[1]], [self.max[0], self.max[1]])
    }
}

/// Expands a cuboid by `r` on all six faces: the minimal axis-aligned cuboid
/// containing the Minkowski sum with the radius-`r` sphere.
pub fn inflate(obstacle: &Cuboid, r: f64) -> Cuboid {
    debug_assert!(r >= 0.0);
    Cuboid {
        min: [obstacle.min[0] - r, obstacle.min[1] - r, obstacle.min[2] - r],
        max: [obstacle.max[0] + r, obstacle.max[1] + r, obstacle.max[2] + r],
    }
}

/// A complete planning problem: obstacles, system constants, start and
/// targets inside a bounding box.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub bounds: Cuboid,
    pub obstacles: Vec<Cuboid>,
    /// Ground start position of the carrier, [x, y] at z = 0.
    pub start: [f64; 2],
    pub targets: Vec<[f64; 3]>,
    pub params: MarsupialParams,
}

impl Scene {
    pub fn start_point(&self) -> Point3 {
        Point3::new(self.start[0], self.start[1], 0.0)
    }

    pub fn target(&self, i: usize) -> Point3 {
        let t = self.targets[i];
        Point3::new(t[0], t[1], t[2])
    }

    pub fn inflated(&self) -> Vec<Cuboid> {
        self.obstacles.iter().map(|o| inflate(o, self.params.r)).collect()
    }

    /// Inflated obstacles whose z-interval intersects the open band
    /// (0, h - r); these are the ones the carrying configuration can hit.
    pub fn ugv_blockers(&self) -> Vec<Cuboid> {
        let top = self.params.take_off_z();
        self.inflated()
            .into_iter()
            .filter(|c| c.min[2] < top && c.max[2] > 0.0)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !self.bounds.is_valid() {
            return Err(Error::InvalidScene("degenerate bounds".into()));
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if !o.is_valid() {
                return Err(Error::InvalidScene(format!("degenerate obstacle {i}")));
            }
        }
        for (i, a) in self.obstacles.iter().enumerate() {
            for (j, b) in self.obstacles.iter().enumerate().skip(i + 1) {
                if a.intersects(b) {
                    return Err(Error::InvalidScene(format!("obstacles {i} and {j} overlap")));
                }
            }
        }
        if self.targets.is_empty() {
            return Err(Error::InvalidScene("at least one target required".into()));
        }
        for (k, t) in self.targets.iter().enumerate() {
            if !(t[2] > self.params.h) {
                return Err(Error::InvalidScene(format!(
                    "target {k} must lie above z = h = {}",
                    self.params.h
                )));
            }
        }
        let inflated = self.inflated();
        let s = self.start_point();
        for (i, c) in inflated.iter().enumerate() {
            if c.contains_interior(&s, EPS) {
                return Err(Error::InvalidScene(format!("start inside inflated obstacle {i}")));
            }
            for (k, t) in self.targets.iter().enumerate() {
                let tp = Point3::new(t[0], t[1], t[2]);
                if c.contains_interior(&tp, EPS) {
                    return Err(Error::InvalidScene(format!(
                        "target {k} inside inflated obstacle {i}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let scene: Scene = serde_json::from_str(text)?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serializes")
    }
}

/// Placement of one vertical half-plane hinged on the target column.
///
/// The half-plane contains every point `origin + d * (cos azimuth,
/// sin azimuth)` with d >= 0, extended vertically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneFrame {
    /// Direction of increasing d from the target column, radians in [0, 2pi).
    pub azimuth: f64,
    /// Ground projection of the target, [x, y].
    pub origin: [f64; 2],
    /// Image of the target in plane coordinates; d is always 0.
    pub target_2d: PlanePoint,
}

impl PlaneFrame {
    pub fn new(azimuth: f64, origin: [f64; 2], target_z: f64) -> Self {
        let tau = std::f64::consts::TAU;
        let azimuth = azimuth.rem_euclid(tau);
        Self { azimuth, origin, target_2d: PlanePoint::new(0.0, target_z) }
    }

    /// Maps plane coordinates to a world point.
    pub fn to_world(&self, p: PlanePoint) -> Point3 {
        Point3::new(
            self.origin[0] + p.d * self.azimuth.cos(),
            self.origin[1] + p.d * self.azimuth.sin(),
            p.z,
        )
    }

    /// Maps a world point onto the plane; the returned d is the signed
    /// distance along the azimuth direction (negative means behind origin).
    pub fn to_plane(&self, p: &Point3) -> PlanePoint {
        let (dx, dy) = (p.x - self.origin[0], p.y - self.origin[1]);
        PlanePoint::new(dx * self.azimuth.cos() + dy * self.azimuth.sin(), p.z)
    }
}

/// Classification flags of a sliced obstacle rectangle.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RectFlags {
    /// The source obstacle intersects the carrier's vertical extent (0, h-r).
    pub blocks_ugv: bool,
    /// The lower-right corner (nearest the target) can support a taut chain.
    pub aerial_support_lr: bool,
    /// The lower-left corner can support a taut chain; only obstacles whose
    /// base dips below the aerial line z = h admit base-tangent chains.
    pub aerial_support_ll: bool,
    /// The source obstacle intersects the vertical segment under the target.
    pub central: bool,
}

/// Axis-aligned rectangle in half-plane coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect2 {
    pub d_min: f64,
    pub d_max: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub flags: RectFlags,
}

impl Rect2 {
    pub fn new(d_min: f64, d_max: f64, z_min: f64, z_max: f64) -> Self {
        Self { d_min, d_max, z_min, z_max, flags: RectFlags::default() }
    }

    pub fn contains(&self, p: &PlanePoint) -> bool {
        p.d >= self.d_min && p.d <= self.d_max && p.z >= self.z_min && p.z <= self.z_max
    }

    /// Strict interior membership with tangency margin.
    pub fn contains_interior(&self, p: &PlanePoint) -> bool {
        p.d > self.d_min + EPS && p.d < self.d_max - EPS && p.z > self.z_min + EPS && p.z < self.z_max - EPS
    }

    /// Upper-left corner in plane coordinates (far side from the target).
    pub fn upper_left(&self) -> PlanePoint {
        PlanePoint::new(self.d_max, self.z_max)
    }

    /// Lower-right corner (near side) and lower-left corner (far side).
    pub fn lower_right(&self) -> PlanePoint {
        PlanePoint::new(self.d_min, self.z_min)
    }

    pub fn lower_left(&self) -> PlanePoint {
        PlanePoint::new(self.d_max, self.z_min)
    }
}

/// One vertical half-plane of the world with its sliced obstacles.
#[derive(Debug, Clone)]
pub struct PlanarScene {
    pub rects: Vec<Rect2>,
    pub target: PlanePoint,
    pub take_off_z: f64,
    pub frame: PlaneFrame,
}

/// Intersects every inflated obstacle with the half-plane and classifies the
/// resulting rectangles. Obstacles that miss the half-plane, or touch it
/// only along a line, produce no rectangle.
pub fn slice(scene: &Scene, frame: &PlaneFrame) -> PlanarScene {
    let params = &scene.params;
    let take_off_z = params.take_off_z();
    let target_z = frame.target_2d.z;
    let (dir_x, dir_y) = (frame.azimuth.cos(), frame.azimuth.sin());
    let (ox, oy) = (frame.origin[0], frame.origin[1]);

    let mut rects = Vec::new();
    for cuboid in scene.inflated() {
        // Line/slab intersection of the footprint with the half-plane ray.
        // An obstacle wrapping the origin column keeps its negative extent,
        // so the column itself reads as interior rather than tangent.
        let mut t0 = f64::NEG_INFINITY;
        let mut t1 = f64::INFINITY;
        let mut hit = true;
        for (o, dir, lo, hi) in [
            (ox, dir_x, cuboid.min[0], cuboid.max[0]),
            (oy, dir_y, cuboid.min[1], cuboid.max[1]),
        ] {
            if dir.abs() < 1e-15 {
                if o < lo || o > hi {
                    hit = false;
                    break;
                }
            } else {
                let (a, b) = ((lo - o) / dir, (hi - o) / dir);
                t0 = t0.max(a.min(b));
                t1 = t1.min(a.max(b));
            }
        }
        if !hit || t1 <= EPS || t1 - t0 <= EPS {
            continue;
        }

        let mut rect = Rect2::new(t0, t1, cuboid.min[2], cuboid.max[2]);
        let central = cuboid.min[0] <= ox
            && ox <= cuboid.max[0]
            && cuboid.min[1] <= oy
            && oy <= cuboid.max[1]
            && cuboid.min[2] <= target_z
            && cuboid.max[2] >= 0.0;
        let supports = rect.z_min > take_off_z + EPS;
        rect.flags = RectFlags {
            blocks_ugv: rect.z_min < take_off_z && rect.z_max > 0.0,
            aerial_support_lr: supports,
            aerial_support_ll: supports && rect.z_min < params.h,
            central,
        };
        rects.push(rect);
    }
    PlanarScene { rects, target: frame.target_2d, take_off_z, frame: *frame }
}

/// Fills classification flags of synthetic planar rectangles the same way
/// `slice` classifies 3D slices: used by planar-only fixtures and
/// generators. A rectangle is central when it wraps the target column
/// (negative near edge) and its height band meets the column below the
/// target.
pub fn classify_planar(rects: &mut [Rect2], params: &MarsupialParams, target_z: f64) {
    let toz = params.take_off_z();
    for r in rects.iter_mut() {
        let supports = r.z_min > toz + EPS;
        r.flags = RectFlags {
            blocks_ugv: r.z_min < toz && r.z_max > 0.0,
            aerial_support_lr: supports,
            aerial_support_ll: supports && r.z_min < params.h,
            central: r.d_min < -EPS && r.z_min <= target_z && r.z_max >= 0.0,
        };
    }
}

/// True iff the open segment a-b avoids the open interior of every
/// rectangle. Boundary contact (tangency) is clear.
pub fn segment_clear(a: PlanePoint, b: PlanePoint, rects: &[Rect2]) -> bool {
    rects.iter().all(|r| !segment_enters_rect(a, b, r))
}

fn segment_enters_rect(a: PlanePoint, b: PlanePoint, r: &Rect2) -> bool {
    // Clip the segment against the rectangle shrunk by the tangency margin;
    // a nonempty clipped interval means true interior penetration.
    slab_overlap(
        (a.d, b.d, r.d_min + EPS, r.d_max - EPS),
        (a.z, b.z, r.z_min + EPS, r.z_max - EPS),
    )
}

/// Liang-Barsky style clip of the parametric segment against two slabs.
fn slab_overlap(u: (f64, f64, f64, f64), v: (f64, f64, f64, f64)) -> bool {
    let mut t0 = 0.0_f64;
    let mut t1 = 1.0_f64;
    for (p0, p1, lo, hi) in [u, v] {
        if hi <= lo {
            return false;
        }
        let delta = p1 - p0;
        if delta.abs() < 1e-15 {
            if p0 <= lo || p0 >= hi {
                return false;
            }
        } else {
            let (a, b) = ((lo - p0) / delta, (hi - p0) / delta);
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
    }
    t1 > t0
}

/// True iff the carrying configuration can travel the straight ground
/// segment x1 -> x2 without its vertical extent touching any inflated
/// obstacle interior. Tangency is clear.
pub fn ugv_sweep_clear(x1: [f64; 2], x2: [f64; 2], scene: &Scene) -> bool {
    ugv_sweep_clear_blockers(x1, x2, &scene.ugv_blockers())
}

/// Same as [`ugv_sweep_clear`] against a precomputed blocker list.
pub fn ugv_sweep_clear_blockers(x1: [f64; 2], x2: [f64; 2], blockers: &[Cuboid]) -> bool {
    blockers.iter().all(|c| {
        !slab_overlap(
            (x1[0], x2[0], c.min[0] + EPS, c.max[0] - EPS),
            (x1[1], x2[1], c.min[1] + EPS, c.max[1] - EPS),
        )
    })
}

/// True iff a ground point lies strictly inside some blocking footprint.
pub fn inside_blocking_footprint(p: [f64; 2], blockers: &[Cuboid]) -> bool {
    blockers.iter().any(|c| {
        p[0] > c.min[0] + EPS && p[0] < c.max[0] - EPS && p[1] > c.min[1] + EPS && p[1] < c.max[1] - EPS
    })
}

/// One step of a chain toward the target: d strictly decreases, z does not
/// decrease.
pub fn ne_step(from: PlanePoint, to: PlanePoint) -> bool {
    from.d - to.d > EPS && to.z >= from.z - EPS
}

/// Convexity at the middle vertex of a chain prev -> mid -> next running
/// toward the target: the slope may only grow. Collinear is accepted.
pub fn convex_at(prev: PlanePoint, mid: PlanePoint, next: PlanePoint) -> bool {
    // slope(prev,mid) <= slope(mid,next) with positive runs, cross-multiplied.
    (mid.z - prev.z) * (mid.d - next.d) <= (next.z - mid.z) * (prev.d - mid.d) + EPS
}
