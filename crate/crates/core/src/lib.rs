//! Hybrid finite volume schemes for linear anisotropic advection-diffusion
//! on general polygonal meshes of the unit square.

pub mod geometry;
pub mod mesh;
pub mod discretization;
pub mod schemes;
pub mod solver;
pub mod experiments;
