//! Planar geometry: vectors, segments, rectangles, and the ray casts the
//! simulated range sensors are built on. All distances are metres.

use serde::{Deserialize, Serialize};

const EPS: f64 = 1e-12;

/// 2-D vector / point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    /// Unit vector in the same direction; the zero vector maps to itself.
    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        if n <= EPS {
            Vec2::ZERO
        } else {
            self * (1.0 / n)
        }
    }

    /// Counter-clockwise rotation by `theta` radians.
    pub fn rotated(self, theta: f64) -> Vec2 {
        let (s, c) = theta.sin_cos();
        Vec2::new(self.x * c - self.y * s, self.x * s + self.y * c)
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl std::ops::AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

/// Line segment between two points (a thin wall).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Vec2,
    pub b: Vec2,
}

impl Segment {
    pub fn new(a: Vec2, b: Vec2) -> Self {
        Segment { a, b }
    }

    pub fn len(&self) -> f64 {
        self.a.dist(self.b)
    }

    /// Closest point on the segment to `p`.
    pub fn closest_point(&self, p: Vec2) -> Vec2 {
        let e = self.b - self.a;
        let l2 = e.dot(e);
        if l2 <= EPS {
            return self.a;
        }
        let t = ((p - self.a).dot(e) / l2).clamp(0.0, 1.0);
        self.a + e * t
    }

    pub fn distance_to_point(&self, p: Vec2) -> f64 {
        self.closest_point(p).dist(p)
    }
}

/// Axis-aligned rectangle, `min` inclusive, `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        Rect { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(
            0.5 * (self.min.x + self.max.x),
            0.5 * (self.min.y + self.max.y),
        )
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// Shrink by `m` on every side. May produce an empty rect; callers check.
    pub fn inset(&self, m: f64) -> Rect {
        Rect::new(
            Vec2::new(self.min.x + m, self.min.y + m),
            Vec2::new(self.max.x - m, self.max.y - m),
        )
    }

    pub fn is_empty(&self) -> bool {
        self.width() <= 0.0 || self.height() <= 0.0
    }

    pub fn clamp_point(&self, p: Vec2) -> Vec2 {
        Vec2::new(p.x.clamp(self.min.x, self.max.x), p.y.clamp(self.min.y, self.max.y))
    }
}

/// A range-limited ray. `dir` is kept unit length by the constructor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec2,
    pub dir: Vec2,
    pub max_range: f64,
}

impl Ray {
    /// Build a ray; `dir` is normalized (a zero direction stays zero and the
    /// ray then hits nothing).
    pub fn new(origin: Vec2, dir: Vec2, max_range: f64) -> Ray {
        Ray { origin, dir: dir.normalized(), max_range }
    }
}

/// Distance along the ray to its first intersection with `seg`, or `None`
/// when the ray misses or the hit lies beyond `max_range`. Collinear overlap
/// resolves to the nearest endpoint in front of the origin.
pub fn ray_segment_distance(ray: &Ray, seg: &Segment) -> Option<f64> {
    let t = ray_segment_hit(ray.origin, ray.dir, seg)?;
    (t <= ray.max_range).then_some(t)
}

fn ray_segment_hit(origin: Vec2, dir: Vec2, seg: &Segment) -> Option<f64> {
    let e = seg.b - seg.a;
    let ao = seg.a - origin;
    let denom = dir.cross(e);
    if denom.abs() > EPS {
        let t = ao.cross(e) / denom;
        let s = ao.cross(dir) / denom;
        if t >= -EPS && (-EPS..=1.0 + EPS).contains(&s) {
            return Some(t.max(0.0));
        }
        return None;
    }
    // Parallel. Only a collinear segment can be hit.
    if ao.cross(dir).abs() > EPS {
        return None;
    }
    let ta = (seg.a - origin).dot(dir);
    let tb = (seg.b - origin).dot(dir);
    let t = match (ta >= -EPS, tb >= -EPS) {
        (true, true) => ta.min(tb),
        (true, false) => ta,
        (false, true) => tb,
        (false, false) => return None,
    };
    Some(t.max(0.0))
}

/// Shortest hit distance over all `segments`, saturated at `max_range`
/// (the sensor's report when nothing is in view).
pub fn raycast(ray: &Ray, segments: &[Segment]) -> f64 {
    if ray.dir == Vec2::ZERO {
        return ray.max_range;
    }
    let mut best = ray.max_range;
    for seg in segments {
        if let Some(t) = ray_segment_hit(ray.origin, ray.dir, seg) {
            if t.is_finite() && t < best {
                best = t;
            }
        }
    }
    best
}

/// Proper or touching intersection test between two segments.
pub fn segments_intersect(p: &Segment, q: &Segment) -> bool {
    let d1 = (q.b - q.a).cross(p.a - q.a);
    let d2 = (q.b - q.a).cross(p.b - q.a);
    let d3 = (p.b - p.a).cross(q.a - p.a);
    let d4 = (p.b - p.a).cross(q.b - p.a);
    if ((d1 > EPS && d2 < -EPS) || (d1 < -EPS && d2 > EPS))
        && ((d3 > EPS && d4 < -EPS) || (d3 < -EPS && d4 > EPS))
    {
        return true;
    }
    let on = |d: f64, a: Vec2, b: Vec2, p: Vec2| {
        d.abs() <= EPS
            && p.x >= a.x.min(b.x) - EPS
            && p.x <= a.x.max(b.x) + EPS
            && p.y >= a.y.min(b.y) - EPS
            && p.y <= a.y.max(b.y) + EPS
    };
    on(d1, q.a, q.b, p.a) || on(d2, q.a, q.b, p.b) || on(d3, p.a, p.b, q.a) || on(d4, p.a, p.b, q.b)
}

/// Does `seg` touch the axis-aligned rectangle `[min, max]`?
pub fn segment_intersects_rect(seg: &Segment, min: Vec2, max: Vec2) -> bool {
    let r = Rect::new(min, max);
    if r.contains(seg.a) || r.contains(seg.b) {
        return true;
    }
    let c = [
        Vec2::new(min.x, min.y),
        Vec2::new(max.x, min.y),
        Vec2::new(max.x, max.y),
        Vec2::new(min.x, max.y),
    ];
    for i in 0..4 {
        if segments_intersect(seg, &Segment::new(c[i], c[(i + 1) % 4])) {
            return true;
        }
    }
    false
}
