//! Small fixed-size linear algebra for 2D geometry.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

/// Spatial dimension. Geometry below is written for the plane only.
pub const DIM: usize = 2;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_inf(self) -> f64 {
        self.x.abs().max(self.y.abs())
    }

    /// Rotation by -90 degrees: for a CCW edge direction this is the outward normal.
    pub fn perp_right(self) -> Vec2 {
        Vec2::new(self.y, -self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn lerp(self, other: Vec2, t: f64) -> Vec2 {
        self + (other - self) * t
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl SubAssign for Vec2 {
    fn sub_assign(&mut self, o: Vec2) {
        self.x -= o.x;
        self.y -= o.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Symmetric 2x2 tensor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymMat2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl SymMat2 {
    pub const IDENTITY: SymMat2 = SymMat2 { xx: 1.0, xy: 0.0, yy: 1.0 };

    pub const fn new(xx: f64, xy: f64, yy: f64) -> Self {
        SymMat2 { xx, xy, yy }
    }

    pub const fn diag(xx: f64, yy: f64) -> Self {
        SymMat2 { xx, xy: 0.0, yy }
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        Vec2::new(self.xx * v.x + self.xy * v.y, self.xy * v.x + self.yy * v.y)
    }

    pub fn scale(&self, s: f64) -> SymMat2 {
        SymMat2::new(self.xx * s, self.xy * s, self.yy * s)
    }

    /// Eigenvalues in increasing order (closed form).
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.xx + self.yy);
        let half_gap = (0.5 * (self.xx - self.yy)).hypot(self.xy);
        (mean - half_gap, mean + half_gap)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().0
    }
}

/// Signed area of a closed polygon (positive when counter-clockwise).
pub fn signed_area(points: &[Vec2]) -> f64 {
    // relative to the first vertex to limit cancellation on small polygons
    let o = points[0];
    let k = points.len();
    (1..k.saturating_sub(1))
        .map(|i| (points[i] - o).cross(points[i + 1] - o))
        .sum::<f64>()
        * 0.5
}

/// Area-weighted barycenter of a simple polygon.
pub fn polygon_centroid(points: &[Vec2]) -> Vec2 {
    let o = points[0];
    let k = points.len();
    let mut twice_area = 0.0;
    let mut acc = Vec2::ZERO;
    for i in 1..k - 1 {
        let a = points[i] - o;
        let b = points[i + 1] - o;
        let w = a.cross(b);
        twice_area += w;
        acc += (a + b) * w;
    }
    o + acc * (1.0 / (3.0 * twice_area))
}

/// Closed-segment intersection test, including touching and collinear overlap.
pub fn segments_intersect(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> bool {
    let scale = (p2 - p1).norm().max((q2 - q1).norm());
    let eps = 1e-14 * scale * scale;
    let orient = |a: Vec2, b: Vec2, c: Vec2| {
        let v = (b - a).cross(c - a);
        if v > eps {
            1
        } else if v < -eps {
            -1
        } else {
            0
        }
    };
    let on_segment = |a: Vec2, b: Vec2, c: Vec2| {
        c.x >= a.x.min(b.x) - 1e-14
            && c.x <= a.x.max(b.x) + 1e-14
            && c.y >= a.y.min(b.y) - 1e-14
            && c.y <= a.y.max(b.y) + 1e-14
    };
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    (d1 == 0 && on_segment(q1, q2, p1))
        || (d2 == 0 && on_segment(q1, q2, p2))
        || (d3 == 0 && on_segment(p1, p2, q1))
        || (d4 == 0 && on_segment(p1, p2, q2))
}

/// Two-point Gauss rule on a segment: (points, weights summing to 1).
pub fn gauss2_segment(a: Vec2, b: Vec2) -> [(Vec2, f64); 2] {
    let offset = 0.5 / 3f64.sqrt();
    [(a.lerp(b, 0.5 - offset), 0.5), (a.lerp(b, 0.5 + offset), 0.5)]
}
