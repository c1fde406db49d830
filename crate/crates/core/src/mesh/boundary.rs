use crate::geometry::Vec2;

use super::{BoundaryTag, Mesh, MeshError};

const TOL: f64 = 1e-10;

/// Closed convex region selecting Dirichlet boundary faces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    /// Points with `normal · x <= offset`.
    HalfPlane { normal: Vec2, offset: f64 },
    /// Axis-aligned box `[min, max]`.
    Box { min: Vec2, max: Vec2 },
}

impl Region {
    /// The line x = value, as a degenerate box over the unit square.
    pub fn vertical_line(value: f64) -> Region {
        Region::Box { min: Vec2::new(value, 0.0), max: Vec2::new(value, 1.0) }
    }

    pub fn horizontal_line(value: f64) -> Region {
        Region::Box { min: Vec2::new(0.0, value), max: Vec2::new(1.0, value) }
    }

    /// Covers the whole closed unit square.
    pub fn everywhere() -> Region {
        Region::Box { min: Vec2::ZERO, max: Vec2::new(1.0, 1.0) }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        match *self {
            Region::HalfPlane { normal, offset } => normal.dot(p) <= offset + TOL * normal.norm(),
            Region::Box { min, max } => {
                p.x >= min.x - TOL && p.x <= max.x + TOL && p.y >= min.y - TOL && p.y <= max.y + TOL
            }
        }
    }
}

impl Mesh {
    /// Tags every boundary face Dirichlet (inside some region) or Neumann.
    ///
    /// A face belongs to a region when its barycenter does; a region holding the
    /// barycenter but not both endpoints means the face straddles the partition.
    pub fn tag_boundary(mut self, dirichlet: &[Region]) -> Result<Mesh, MeshError> {
        for fid in 0..self.faces.len() {
            if !self.faces[fid].is_boundary() {
                continue;
            }
            let (a, b) = self.face_endpoints(fid);
            let center = self.faces[fid].center;
            let mut inside = false;
            let mut straddles = false;
            for region in dirichlet {
                if region.contains(center) {
                    if region.contains(a) && region.contains(b) {
                        inside = true;
                    } else {
                        straddles = true;
                    }
                }
            }
            if straddles && !inside {
                return Err(MeshError::StraddlingFace { face: fid, a, b });
            }
            self.faces[fid].tag = if inside { BoundaryTag::Dirichlet } else { BoundaryTag::Neumann };
        }
        Ok(self)
    }
}
