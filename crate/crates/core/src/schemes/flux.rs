//! Two-point flux functions for the advective part of the HMM scheme.

use crate::geometry::{gauss2_segment, Vec2};
use crate::mesh::Mesh;

use super::ProblemData;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FluxKind {
    Centred,
    Upwind,
    ScharfetterGummel,
}

impl std::str::FromStr for FluxKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "centred" | "centered" => Ok(FluxKind::Centred),
            "upwind" => Ok(FluxKind::Upwind),
            "sg" | "scharfetter-gummel" => Ok(FluxKind::ScharfetterGummel),
            other => Err(format!("unknown flux `{other}`")),
        }
    }
}

/// A(s) with A(0) = 0 and A(-s) - A(s) = s.
pub fn flux_a(kind: FluxKind, s: f64) -> f64 {
    match kind {
        FluxKind::Centred => -0.5 * s,
        FluxKind::Upwind => (-s).max(0.0),
        FluxKind::ScharfetterGummel => {
            if s.abs() < 1e-5 {
                // s/(e^s - 1) = 1 - s/2 + s²/12 - s⁴/720 + ...
                let s2 = s * s;
                -0.5 * s + s2 / 12.0 - s2 * s2 / 720.0
            } else {
                s / s.exp_m1() - 1.0
            }
        }
    }
}

/// μ_σ = min(1, smallest eigenvalue of Λ at the owner cell centers).
pub fn peclet_weight(mesh: &Mesh, face: usize, data: &ProblemData) -> f64 {
    mesh.faces[face]
        .owners
        .iter()
        .map(|o| (data.diffusion)(mesh.cells[o.cell].center).min_eigenvalue())
        .fold(1.0, f64::min)
}

/// V^φ_{K,σ}: face average of V^φ · n_{K,σ} by two-point Gauss quadrature.
pub fn face_advection(mesh: &Mesh, data: &ProblemData, cell: usize, local: usize) -> f64 {
    let c = &mesh.cells[cell];
    let normal: Vec2 = c.normals[local];
    let (a, b) = mesh.face_endpoints(c.faces[local]);
    let step = 1e-6 * c.diameter;
    gauss2_segment(a, b).iter().map(|&(p, w)| w * data.advection(p, step).dot(normal)).sum()
}

/// F = |σ| (μ/d) [A(-(d/μ)V) u_K - A((d/μ)V) u_σ]
pub fn advective_flux(
    kind: FluxKind,
    length: f64,
    distance: f64,
    peclet: f64,
    velocity: f64,
    u_cell: f64,
    u_face: f64,
) -> f64 {
    let s = distance / peclet * velocity;
    length * peclet / distance * (flux_a(kind, -s) * u_cell - flux_a(kind, s) * u_face)
}
