//! Polygonal discretizations of the unit square and their geometry.

mod boundary;
mod generate;
mod polymesh;

pub use boundary::Region;
pub use generate::{cartesian, generate, kershaw, tilted_hexagonal, triangular, MeshFamily};
pub use polymesh::{read_mesh, write_mesh};

use std::collections::HashMap;

use thiserror::Error;

use crate::geometry::{gauss2_segment, polygon_centroid, segments_intersect, signed_area, Vec2};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cell {cell}: {message}")]
    InvalidCell { cell: usize, message: String },
    #[error("vertex {0} is not used by any cell")]
    DanglingVertex(usize),
    #[error("face {face} ({a:?} - {b:?}): {message}")]
    InvalidFace { face: usize, a: Vec2, b: Vec2, message: String },
    #[error("invalid mesh parameters: {0}")]
    InvalidParameters(String),
    #[error("face {face} ({a:?} - {b:?}) straddles the Dirichlet/Neumann partition")]
    StraddlingFace { face: usize, a: Vec2, b: Vec2 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Interior,
    Dirichlet,
    Neumann,
}

/// A cell owning a face, together with the face position in the cell's face list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FaceOwner {
    pub cell: usize,
    pub local: usize,
}

#[derive(Clone, Debug)]
pub struct Face {
    pub vertices: [usize; 2],
    pub center: Vec2,
    pub length: f64,
    pub owners: Vec<FaceOwner>,
    pub tag: BoundaryTag,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.owners.len() == 1
    }
}

#[derive(Clone, Debug)]
pub struct Cell {
    /// Counter-clockwise ring; local face `i` joins `vertices[i]` and `vertices[i + 1]`.
    pub vertices: Vec<usize>,
    pub faces: Vec<usize>,
    pub center: Vec2,
    pub area: f64,
    pub diameter: f64,
    pub perimeter: f64,
    /// Outward unit normals, one per local face.
    pub normals: Vec<Vec2>,
    /// Orthogonal distances from the center to each local face.
    pub distances: Vec<f64>,
}

impl Cell {
    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn edge(&self, local: usize) -> (usize, usize) {
        let k = self.vertices.len();
        (self.vertices[local], self.vertices[(local + 1) % k])
    }
}

#[derive(Clone, Debug)]
pub struct Mesh {
    pub vertices: Vec<Vec2>,
    pub cells: Vec<Cell>,
    pub faces: Vec<Face>,
    /// max h_K
    pub meshsize: f64,
    /// max |K| / |∂K|
    pub meshsize_tilde: f64,
    pub regularity: f64,
}

impl Mesh {
    /// Builds a mesh from counter-clockwise vertex rings. Centers default to barycenters.
    pub fn from_polygons(
        vertices: Vec<Vec2>,
        rings: Vec<Vec<usize>>,
        centers: Option<Vec<Vec2>>,
    ) -> Result<Mesh, MeshError> {
        if rings.is_empty() {
            return Err(MeshError::InvalidParameters("mesh has no cells".into()));
        }
        if let Some(c) = &centers {
            if c.len() != rings.len() {
                return Err(MeshError::InvalidParameters(format!(
                    "{} centers for {} cells",
                    c.len(),
                    rings.len()
                )));
            }
        }
        for (i, v) in vertices.iter().enumerate() {
            if !v.is_finite() {
                return Err(MeshError::InvalidParameters(format!("vertex {i} is not finite")));
            }
        }

        let mut used = vec![false; vertices.len()];
        let mut faces: Vec<Face> = Vec::new();
        // undirected edge -> face id
        let mut edge_map: HashMap<(usize, usize), usize> = HashMap::new();
        let mut cells = Vec::with_capacity(rings.len());

        for (ci, ring) in rings.into_iter().enumerate() {
            let bad = |message: String| MeshError::InvalidCell { cell: ci, message };
            if ring.len() < 3 {
                return Err(bad("cell needs ≥3 vertices".into()));
            }
            for &v in &ring {
                if v >= vertices.len() {
                    return Err(bad(format!("vertex index {v} out of range")));
                }
            }
            let mut sorted = ring.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(bad("repeated vertex in ring".into()));
            }
            let pts: Vec<Vec2> = ring.iter().map(|&v| vertices[v]).collect();
            let area = signed_area(&pts);
            if area <= 0.0 {
                return Err(bad(format!("ring is not counter-clockwise (signed area {area:e})")));
            }
            check_simple(&pts).map_err(&bad)?;

            let center = match &centers {
                Some(c) => c[ci],
                None => polygon_centroid(&pts),
            };
            let k = ring.len();
            let mut diameter: f64 = 0.0;
            for i in 0..k {
                for j in i + 1..k {
                    diameter = diameter.max((pts[i] - pts[j]).norm());
                }
            }
            let mut cell = Cell {
                vertices: ring.clone(),
                faces: Vec::with_capacity(k),
                center,
                area,
                diameter,
                perimeter: 0.0,
                normals: Vec::with_capacity(k),
                distances: Vec::with_capacity(k),
            };
            for i in 0..k {
                let (a, b) = (ring[i], ring[(i + 1) % k]);
                used[a] = true;
                let (pa, pb) = (vertices[a], vertices[b]);
                let length = (pb - pa).norm();
                let normal = (pb - pa).perp_right() * (1.0 / length);
                let mid = pa.lerp(pb, 0.5);
                let distance = (mid - center).dot(normal);
                if distance <= 1e-12 * diameter {
                    return Err(bad(format!(
                        "center {center:?} does not see face {i} from strictly inside (distance {distance:e})"
                    )));
                }
                let key = (a.min(b), a.max(b));
                let fid = match edge_map.get(&key) {
                    Some(&fid) => {
                        let face = &mut faces[fid];
                        if face.owners.len() >= 2 {
                            return Err(bad(format!("edge {a}-{b} already has two owners")));
                        }
                        if face.vertices != [b, a] {
                            return Err(bad(format!(
                                "edge {a}-{b} traversed in the same direction as its neighbour (overlapping cells)"
                            )));
                        }
                        face.owners.push(FaceOwner { cell: ci, local: i });
                        face.tag = BoundaryTag::Interior;
                        fid
                    }
                    None => {
                        let fid = faces.len();
                        faces.push(Face {
                            vertices: [a, b],
                            center: mid,
                            length,
                            owners: vec![FaceOwner { cell: ci, local: i }],
                            tag: BoundaryTag::Neumann,
                        });
                        edge_map.insert(key, fid);
                        fid
                    }
                };
                cell.faces.push(fid);
                cell.normals.push(normal);
                cell.distances.push(distance);
                cell.perimeter += length;
            }
            cells.push(cell);
        }

        if let Some(v) = used.iter().position(|u| !u) {
            return Err(MeshError::DanglingVertex(v));
        }

        // One-owner faces must lie on the bounding box boundary.
        let (lo, hi) = bounding_box(&vertices);
        let tol = 1e-10 * (hi - lo).norm_inf();
        for (fid, face) in faces.iter().enumerate() {
            if face.owners.len() != 1 {
                continue;
            }
            let a = vertices[face.vertices[0]];
            let b = vertices[face.vertices[1]];
            let same_side = |get: fn(Vec2) -> f64, bound: f64| {
                (get(a) - bound).abs() <= tol && (get(b) - bound).abs() <= tol
            };
            let on_box = same_side(|p| p.x, lo.x)
                || same_side(|p| p.x, hi.x)
                || same_side(|p| p.y, lo.y)
                || same_side(|p| p.y, hi.y);
            if !on_box {
                return Err(MeshError::InvalidFace {
                    face: fid,
                    a,
                    b,
                    message: "face has a single owner but is not on the domain boundary".into(),
                });
            }
        }

        let mut mesh = Mesh {
            vertices,
            cells,
            faces,
            meshsize: 0.0,
            meshsize_tilde: 0.0,
            regularity: 0.0,
        };
        mesh.meshsize = mesh.cells.iter().map(|c| c.diameter).fold(0.0, f64::max);
        mesh.meshsize_tilde = mesh.cells.iter().map(|c| c.area / c.perimeter).fold(0.0, f64::max);
        mesh.regularity = mesh
            .cells
            .iter()
            .flat_map(|c| {
                c.faces.iter().zip(&c.distances).map(move |(&f, &d)| (c.diameter, f, d))
            })
            .map(|(h, f, d)| (h / d).max(h / mesh.faces[f].length))
            .fold(1.0, f64::max);
        Ok(mesh)
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    /// Cell and face unknowns together.
    pub fn num_dofs(&self) -> usize {
        self.cells.len() + self.faces.len()
    }

    pub fn face_endpoints(&self, face: usize) -> (Vec2, Vec2) {
        let [a, b] = self.faces[face].vertices;
        (self.vertices[a], self.vertices[b])
    }

    /// Vertices of the triangle P_{K,σ}: center then the face endpoints in cell order.
    pub fn pyramid(&self, cell: usize, local: usize) -> [Vec2; 3] {
        let c = &self.cells[cell];
        let (a, b) = c.edge(local);
        [c.center, self.vertices[a], self.vertices[b]]
    }

    pub fn pyramid_area(&self, cell: usize, local: usize) -> f64 {
        let c = &self.cells[cell];
        0.5 * self.faces[c.faces[local]].length * c.distances[local]
    }

    pub fn pyramid_barycenter(&self, cell: usize, local: usize) -> Vec2 {
        let [p, a, b] = self.pyramid(cell, local);
        (p + a + b) * (1.0 / 3.0)
    }

    /// Average of `f` over a face by two-point Gauss quadrature.
    pub fn face_average(&self, face: usize, f: impl Fn(Vec2) -> f64) -> f64 {
        let (a, b) = self.face_endpoints(face);
        gauss2_segment(a, b).iter().map(|&(p, w)| w * f(p)).sum()
    }

    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(|c| c.area).sum()
    }

    pub fn boundary_faces(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.faces.len()).filter(|&f| self.faces[f].is_boundary())
    }

    pub fn has_dirichlet(&self) -> bool {
        self.faces.iter().any(|f| f.tag == BoundaryTag::Dirichlet)
    }
}

fn bounding_box(points: &[Vec2]) -> (Vec2, Vec2) {
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    (lo, hi)
}

/// Rejects rings whose edges cross, touch away from shared corners, or fold back.
fn check_simple(pts: &[Vec2]) -> Result<(), String> {
    let k = pts.len();
    for i in 0..k {
        let (a, b) = (pts[i], pts[(i + 1) % k]);
        let c = pts[(i + 2) % k];
        let (u, v) = (b - a, c - b);
        if u.cross(v).abs() <= 1e-14 * u.norm() * v.norm() && u.dot(v) < 0.0 {
            return Err(format!("ring folds back at vertex position {}", (i + 1) % k));
        }
        for j in i + 2..k {
            if i == 0 && j == k - 1 {
                continue;
            }
            if segments_intersect(a, b, pts[j], pts[(j + 1) % k]) {
                return Err(format!("self-intersecting ring (edges {i} and {j})"));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Mesh {
        let v = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        Mesh::from_polygons(v, vec![vec![0, 1, 2, 3]], None).unwrap()
    }

    #[test]
    fn unit_square_geometry() {
        let m = unit_square();
        assert_eq!(m.num_cells(), 1);
        assert_eq!(m.num_faces(), 4);
        let c = &m.cells[0];
        assert_eq!(c.area, 1.0);
        assert!(c.distances.iter().all(|&d| (d - 0.5).abs() < 1e-15));
        assert!(m.faces.iter().all(|f| f.length == 1.0 && f.tag == BoundaryTag::Neumann));
        // max(h/d, h/|σ|) = √2 / 0.5
        assert!((m.regularity - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        assert!((m.meshsize - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.meshsize_tilde, 0.25);
    }

    #[test]
    fn rejects_clockwise_and_degenerate_rings() {
        let v = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        let err = Mesh::from_polygons(v.clone(), vec![vec![0, 3, 2, 1]], None).unwrap_err();
        assert!(err.to_string().contains("counter-clockwise"), "{err}");
        let err = Mesh::from_polygons(v.clone(), vec![vec![0, 1]], None).unwrap_err();
        assert!(err.to_string().contains("cell needs ≥3 vertices"));
        let err = Mesh::from_polygons(v, vec![vec![0, 1, 2]], None).unwrap_err();
        assert!(matches!(err, MeshError::DanglingVertex(3)));
    }

    #[test]
    fn rejects_bowtie() {
        let v = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(2.0, 2.0),
            Vec2::new(0.0, 2.0),
            Vec2::new(3.0, 1.0),
        ];
        // edge 3-4 crosses edge 1-2 while the net area stays positive
        let err = Mesh::from_polygons(v, vec![vec![0, 1, 2, 3, 4]], None).unwrap_err();
        assert!(err.to_string().contains("self-intersecting"), "{err}");
    }

    #[test]
    fn rejects_internal_hole_boundary() {
        // Two squares leaving a gap: the inner faces have one owner but are interior.
        let v = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(0.4, 0.0),
            Vec2::new(0.4, 1.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(0.6, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.6, 1.0),
        ];
        let err = Mesh::from_polygons(v, vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]], None).unwrap_err();
        assert!(matches!(err, MeshError::InvalidFace { .. }), "{err}");
    }

    #[test]
    fn hanging_node_gives_five_faces() {
        let v = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(0.5, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 0.5),
            Vec2::new(0.5, 0.5),
            Vec2::new(0.0, 1.0),
            Vec2::new(0.5, 1.0),
            Vec2::new(1.0, 1.0),
        ];
        let rings = vec![vec![0, 1, 4, 3], vec![3, 4, 6, 5], vec![1, 2, 7, 6, 4]];
        let m = Mesh::from_polygons(v, rings, None).unwrap();
        assert_eq!(m.cells[2].num_faces(), 5);
        assert_eq!(m.faces.iter().filter(|f| !f.is_boundary()).count(), 3);
    }

    #[test]
    fn interface_normals_are_opposite() {
        let m = crate::mesh::cartesian(3).unwrap();
        for f in m.faces.iter().filter(|f| f.owners.len() == 2) {
            let n0 = m.cells[f.owners[0].cell].normals[f.owners[0].local];
            let n1 = m.cells[f.owners[1].cell].normals[f.owners[1].local];
            assert!((n0 + n1).norm() < 1e-15);
        }
    }
}
