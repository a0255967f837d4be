//! Loose-tether model: catenary curves of prescribed arc length between two
//! anchors, analytic collision tests against obstacle rectangles, and the
//! discrete minimum-length search used by the planners.

use serde::{Deserialize, Serialize};

use crate::geometry::{PlanePoint, Rect2, EPS};
use crate::{Error, Result};

/// Arc-length slack under which the curve is treated as a straight segment;
/// below it the curve parameter diverges and the shape is numerically a chord.
pub const DEGENERATE_SLACK: f64 = 1e-7;

/// Shape of a solved tether curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CatenaryForm {
    /// z(d) = z_v + a * (cosh((d - d_v) / a) - 1).
    Curve { a: f64, d_v: f64, z_v: f64 },
    /// Degenerate taut case: the straight anchor chord.
    Segment,
}

/// A tether curve between two anchors with prescribed arc length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Catenary {
    pub anchors: [PlanePoint; 2],
    pub arc_length: f64,
    pub form: CatenaryForm,
}

impl Catenary {
    /// Curve height at abscissa d. Outside the anchor span the analytic
    /// expression still applies but callers only query the span.
    pub fn z_at(&self, d: f64) -> f64 {
        match self.form {
            CatenaryForm::Curve { a, d_v, z_v } => z_v + a * (((d - d_v) / a).cosh() - 1.0),
            CatenaryForm::Segment => {
                let [p, q] = self.anchors;
                if (q.d - p.d).abs() < 1e-15 {
                    return p.z.min(q.z);
                }
                p.z + (q.z - p.z) * (d - p.d) / (q.d - p.d)
            }
        }
    }

    pub fn d_span(&self) -> (f64, f64) {
        let (a, b) = (self.anchors[0].d, self.anchors[1].d);
        (a.min(b), a.max(b))
    }

    /// Minimum and maximum curve height over a sub-span of the anchors.
    pub fn z_range_on(&self, lo: f64, hi: f64) -> (f64, f64) {
        let (zl, zh) = (self.z_at(lo), self.z_at(hi));
        let mut z_min = zl.min(zh);
        let z_max = zl.max(zh);
        if let CatenaryForm::Curve { d_v, .. } = self.form {
            if d_v > lo && d_v < hi {
                z_min = self.z_at(d_v);
            }
        }
        (z_min, z_max)
    }

    /// Lowest point of the curve between the anchors.
    pub fn min_z(&self) -> f64 {
        let (lo, hi) = self.d_span();
        self.z_range_on(lo, hi).0
    }

    /// Uniform samples between the anchors, endpoints included.
    pub fn sample(&self, n: usize) -> Vec<PlanePoint> {
        let n = n.max(2);
        let [p, q] = self.anchors;
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                let d = p.d + (q.d - p.d) * t;
                if matches!(self.form, CatenaryForm::Segment) {
                    // Parametrize the chord directly so vertical chords work.
                    PlanePoint::new(d, p.z + (q.z - p.z) * t)
                } else {
                    PlanePoint::new(d, self.z_at(d))
                }
            })
            .collect()
    }
}

/// Solves the unique catenary through both anchors with the given arc
/// length. Lengths within [`DEGENERATE_SLACK`] of the chord produce the
/// straight-segment form.
pub fn solve_catenary(p1: PlanePoint, p2: PlanePoint, s: f64) -> Result<Catenary> {
    let chord = p1.dist(&p2);
    if s < chord - EPS {
        return Err(Error::ShorterThanChord { arc_length: s, chord });
    }
    let w = (p2.d - p1.d).abs();
    if w <= EPS {
        if s > (p2.z - p1.z).abs() + EPS {
            return Err(Error::VerticalAnchors(s));
        }
        return Ok(Catenary { anchors: [p1, p2], arc_length: chord, form: CatenaryForm::Segment });
    }
    if s - chord < DEGENERATE_SLACK {
        return Ok(Catenary { anchors: [p1, p2], arc_length: chord, form: CatenaryForm::Segment });
    }

    // 2a sinh(w / 2a) = sqrt(s^2 - dz^2), bracketed bisection on a. The
    // left-hand side decreases monotonically in a toward the limit w.
    let dz = p2.z - p1.z;
    let k = (s * s - dz * dz).sqrt();
    let mut lo = 1e-6_f64;
    let mut hi = 10.0 * (w + s);
    // f(a) = 2a sinh(w/2a) - k, evaluated in log space when sinh overflows.
    let f_sign_positive = |a: f64| -> bool {
        let x = w / (2.0 * a);
        if x > 350.0 {
            // ln(2a sinh x) ~= ln(a) + x for large x.
            a.ln() + x > k.ln()
        } else {
            2.0 * a * x.sinh() > k
        }
    };
    debug_assert!(f_sign_positive(lo));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f_sign_positive(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        let x = w / (2.0 * hi);
        if x < 350.0 && (2.0 * hi * x.sinh() - k).abs() < 1e-12 {
            lo = hi;
            break;
        }
        if hi - lo < 1e-15 * hi.max(1.0) {
            break;
        }
    }
    let a = 0.5 * (lo + hi);

    // Vertex placement from the anchor offsets: with m the midpoint phase,
    // dz/s = tanh(m) and the span midpoint sits at d_v + a*m.
    let m = ((dz / s).clamp(-1.0 + 1e-15, 1.0 - 1e-15)).atanh();
    let (dl, dr) = if p1.d < p2.d { (p1.d, p2.d) } else { (p2.d, p1.d) };
    let (zl, zr) = if p1.d < p2.d { (p1.z, p2.z) } else { (p2.z, p1.z) };
    let signed_m = if p1.d < p2.d { m } else { -m };
    let d_v = 0.5 * (dl + dr) - a * signed_m;
    let z_v = zl - a * (((dl - d_v) / a).cosh() - 1.0);
    let _ = zr;

    Ok(Catenary { anchors: [p1, p2], arc_length: s, form: CatenaryForm::Curve { a, d_v, z_v } })
}

/// True iff the curve avoids the open interior of every rectangle.
/// Convexity lets each rectangle be decided from the curve height at the
/// overlap endpoints and at the clamped vertex; tangency is clear.
pub fn catenary_clear(c: &Catenary, rects: &[Rect2]) -> bool {
    let (span_lo, span_hi) = c.d_span();
    if span_hi - span_lo <= EPS {
        // Vertical chord: blocked only by rectangles strictly containing
        // its abscissa whose height band overlaps the chord interior.
        let d = span_lo;
        let (z0, z1) = (c.anchors[0].z.min(c.anchors[1].z), c.anchors[0].z.max(c.anchors[1].z));
        return rects.iter().all(|r| {
            !(d > r.d_min + EPS && d < r.d_max - EPS && z1 > r.z_min + EPS && z0 < r.z_max - EPS)
        });
    }
    rects.iter().all(|r| {
        let lo = span_lo.max(r.d_min);
        let hi = span_hi.min(r.d_max);
        if hi - lo <= EPS {
            return true;
        }
        let (z_min, z_max) = c.z_range_on(lo, hi);
        z_min >= r.z_max - EPS || z_max <= r.z_min + EPS
    })
}

/// Tether feasibility for one curve: clear of every rectangle and not
/// sagging below the ground plane.
pub fn catenary_feasible(c: &Catenary, rects: &[Rect2]) -> bool {
    c.min_z() >= -EPS && catenary_clear(c, rects)
}

/// Tests `c` tether lengths uniformly spaced on [chord, max_len] in
/// increasing order and returns the first feasible one. The scan does not
/// stop at a colliding length because more sag can clear an obstacle that a
/// tighter tether hits.
pub fn min_catenary_length(
    y: PlanePoint,
    t: PlanePoint,
    max_len: f64,
    c: usize,
    rects: &[Rect2],
) -> Option<(f64, Catenary)> {
    debug_assert!(c >= 1);
    let chord = y.dist(&t);
    if chord > max_len + EPS {
        return None;
    }
    let steps = c.max(1);
    for i in 0..steps {
        let s = if steps == 1 {
            chord
        } else {
            chord + (max_len - chord) * i as f64 / (steps - 1) as f64
        };
        let Ok(curve) = solve_catenary(y, t, s) else { continue };
        if catenary_feasible(&curve, rects) {
            return Some((curve.arc_length.max(chord), curve));
        }
    }
    None
}
