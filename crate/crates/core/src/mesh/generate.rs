//! Mesh families on the unit square.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::geometry::{signed_area, Vec2};

use super::{Mesh, MeshError};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeshFamily {
    Cartesian,
    /// Two triangles per square, diagonals alternating in a checkerboard.
    Triangular,
    /// Cartesian columns with rows bent by a zigzag; `distortion` in [0, 1).
    Kershaw { distortion: f64 },
    /// Regular hexagons rotated by `angle` (radians) and clipped to the square.
    TiltedHexagonal { angle: f64 },
}

pub fn generate(family: MeshFamily, resolution: usize) -> Result<Mesh, MeshError> {
    match family {
        MeshFamily::Cartesian => cartesian(resolution),
        MeshFamily::Triangular => triangular(resolution),
        MeshFamily::Kershaw { distortion } => kershaw(resolution, distortion),
        MeshFamily::TiltedHexagonal { angle } => tilted_hexagonal(resolution, angle),
    }
}

fn check_resolution(n: usize) -> Result<(), MeshError> {
    if n == 0 {
        return Err(MeshError::InvalidParameters("resolution must be at least 1".into()));
    }
    Ok(())
}

fn grid_vertices(n: usize, place: impl Fn(usize, usize) -> Vec2) -> Vec<Vec2> {
    let mut v = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            v.push(place(i, j));
        }
    }
    v
}

fn quad_rings(n: usize) -> Vec<Vec<usize>> {
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut rings = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            rings.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    rings
}

pub fn cartesian(n: usize) -> Result<Mesh, MeshError> {
    check_resolution(n)?;
    let h = 1.0 / n as f64;
    let v = grid_vertices(n, |i, j| Vec2::new(i as f64 * h, j as f64 * h));
    Mesh::from_polygons(v, quad_rings(n), None)
}

pub fn triangular(n: usize) -> Result<Mesh, MeshError> {
    check_resolution(n)?;
    let h = 1.0 / n as f64;
    let v = grid_vertices(n, |i, j| Vec2::new(i as f64 * h, j as f64 * h));
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut rings = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i + j) % 2 == 0 {
                rings.push(vec![a, b, c]);
                rings.push(vec![a, c, d]);
            } else {
                rings.push(vec![a, b, d]);
                rings.push(vec![b, c, d]);
            }
        }
    }
    Mesh::from_polygons(v, rings, None)
}

/// Triangle wave on [0, 1] with four linear pieces, values in [-1, 1].
fn zigzag(xi: f64) -> f64 {
    let t = 4.0 * xi;
    let frac = t - t.floor();
    let up = (t.floor() as i64).rem_euclid(2) == 0;
    if up {
        -1.0 + 2.0 * frac
    } else {
        1.0 - 2.0 * frac
    }
}

/// Rows bent by `y = eta + distortion * zigzag(x) * eta * (1 - eta)`.
///
/// Columns stay vertical, so each cell is a trapezoid; it stays convex because
/// dy/deta >= 1 - distortion > 0.
pub fn kershaw(n: usize, distortion: f64) -> Result<Mesh, MeshError> {
    check_resolution(n)?;
    if !(0.0..1.0).contains(&distortion) {
        return Err(MeshError::InvalidParameters(format!(
            "kershaw distortion must lie in [0, 1), got {distortion}"
        )));
    }
    let h = 1.0 / n as f64;
    let v = grid_vertices(n, |i, j| {
        let xi = i as f64 * h;
        let eta = j as f64 * h;
        Vec2::new(xi, eta + distortion * zigzag(xi) * eta * (1.0 - eta))
    });
    Mesh::from_polygons(v, quad_rings(n), None)
}

/// Merges points closer than `tol` into a single vertex id.
struct VertexPool {
    tol: f64,
    points: Vec<Vec2>,
    buckets: HashMap<(i64, i64), Vec<usize>>,
}

impl VertexPool {
    fn new(tol: f64) -> Self {
        VertexPool { tol, points: Vec::new(), buckets: HashMap::new() }
    }

    fn key(&self, p: Vec2) -> (i64, i64) {
        ((p.x / self.tol).floor() as i64, (p.y / self.tol).floor() as i64)
    }

    fn insert(&mut self, p: Vec2) -> usize {
        let (kx, ky) = self.key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.buckets.get(&(kx + dx, ky + dy)) {
                    for &id in ids {
                        if (self.points[id] - p).norm() < self.tol {
                            return id;
                        }
                    }
                }
            }
        }
        let id = self.points.len();
        self.points.push(p);
        self.buckets.entry((kx, ky)).or_default().push(id);
        id
    }
}

/// Clips a convex polygon against `coordinate(p) >= bound` (or `<=` when `upper`).
fn clip(poly: &[Vec2], axis: usize, bound: f64, upper: bool) -> Vec<Vec2> {
    let coord = |p: Vec2| if axis == 0 { p.x } else { p.y };
    let inside = |p: Vec2| if upper { coord(p) <= bound } else { coord(p) >= bound };
    let mut out = Vec::with_capacity(poly.len() + 2);
    let k = poly.len();
    for i in 0..k {
        let (p, q) = (poly[i], poly[(i + 1) % k]);
        let (pin, qin) = (inside(p), inside(q));
        if pin {
            out.push(p);
        }
        if pin != qin {
            let t = (bound - coord(p)) / (coord(q) - coord(p));
            let mut x = p.lerp(q, t);
            if axis == 0 {
                x.x = bound;
            } else {
                x.y = bound;
            }
            out.push(x);
        }
    }
    out
}

/// Hexagons of side `1 / (sqrt(3) n)` (about `n` across), tilted and clipped to the unit square.
///
/// Hexagon corners within 40% of the side length from a boundary line are first
/// snapped onto it, which keeps the clipped boundary faces from becoming tiny.
pub fn tilted_hexagonal(n: usize, angle: f64) -> Result<Mesh, MeshError> {
    check_resolution(n)?;
    if !angle.is_finite() {
        return Err(MeshError::InvalidParameters("hexagon tilt must be finite".into()));
    }
    let side = 1.0 / (3f64.sqrt() * n as f64);
    let (sin, cos) = angle.sin_cos();
    let rotate = |v: Vec2| Vec2::new(cos * v.x - sin * v.y, sin * v.x + cos * v.y);
    let e1 = rotate(Vec2::new(3f64.sqrt() * side, 0.0));
    let e2 = rotate(Vec2::new(0.5 * 3f64.sqrt() * side, 1.5 * side));
    // Slightly off-center origin so no lattice symmetry lines up with the square.
    let origin = Vec2::new(0.5 + 0.123 * side, 0.5 + 0.071 * side);
    let snap_tol = 0.4 * side;
    let snap = |mut p: Vec2| {
        for bound in [0.0, 1.0] {
            if (p.x - bound).abs() < snap_tol {
                p.x = bound;
            }
            if (p.y - bound).abs() < snap_tol {
                p.y = bound;
            }
        }
        p
    };

    let reach = 2 * n as i64 + 3;
    let mut polygons = Vec::new();
    for j in -reach..=reach {
        for i in -reach..=reach {
            let c = origin + e1 * i as f64 + e2 * j as f64;
            if c.x < -side || c.x > 1.0 + side || c.y < -side || c.y > 1.0 + side {
                continue;
            }
            let hex: Vec<Vec2> = (0..6)
                .map(|k| {
                    let t = PI / 6.0 + k as f64 * PI / 3.0 + angle;
                    snap(c + Vec2::new(t.cos(), t.sin()) * side)
                })
                .collect();
            let mut poly = hex;
            for (axis, bound, upper) in [(0, 0.0, false), (0, 1.0, true), (1, 0.0, false), (1, 1.0, true)] {
                poly = clip(&poly, axis, bound, upper);
                if poly.is_empty() {
                    break;
                }
            }
            if poly.len() >= 3 && signed_area(&poly) > 1e-10 * side * side {
                polygons.push(poly);
            }
        }
    }

    let mut pool = VertexPool::new(1e-9 * side);
    let mut rings = Vec::with_capacity(polygons.len());
    for poly in &polygons {
        let mut ring: Vec<usize> = Vec::with_capacity(poly.len());
        for &p in poly {
            let id = pool.insert(p);
            if ring.last() != Some(&id) {
                ring.push(id);
            }
        }
        while ring.len() > 1 && ring.first() == ring.last() {
            ring.pop();
        }
        rings.push(ring);
    }
    Mesh::from_polygons(pool.points, rings, None)
}
