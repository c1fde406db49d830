//! Assembly of the HMM, exponential-fitting and nonlinear schemes.

mod flux;
mod linear;
mod nonlinear;

pub use flux::{advective_flux, face_advection, flux_a, peclet_weight, FluxKind};
pub use linear::{assemble_expfit, assemble_hmm, omega_average, LinearScheme, OmegaMode};
pub use nonlinear::{
    mean_with_derivatives, reconstruction_r, Aggregate, MeanKind, NonlinearMode, NonlinearProblem, NonlinearScheme,
};

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::discretization::{DiscretizationError, DofVector};
use crate::geometry::{SymMat2, Vec2};
use crate::mesh::{BoundaryTag, Mesh, Region};
use crate::solver::{CsrMatrix, SolverError};

pub type ScalarField = Arc<dyn Fn(Vec2) -> f64 + Send + Sync>;
pub type VectorField = Arc<dyn Fn(Vec2) -> Vec2 + Send + Sync>;
pub type TensorField = Arc<dyn Fn(Vec2) -> SymMat2 + Send + Sync>;

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error(transparent)]
    Discretization(#[from] DiscretizationError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("nonpositive value {value:e} at {location}")]
    NonPositive { value: f64, location: String },
    #[error("stationary problem without Dirichlet faces needs a prescribed mass")]
    MissingMass,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Coefficients and data of the advection-diffusion problem.
#[derive(Clone)]
pub struct ProblemData {
    pub diffusion: TensorField,
    pub potential: ScalarField,
    /// Closed-form ∇φ; central differences of φ are used when absent.
    pub potential_gradient: Option<VectorField>,
    pub source: ScalarField,
    pub dirichlet: ScalarField,
    pub neumann: ScalarField,
    pub initial: ScalarField,
    /// Total mass for stationary pure-Neumann problems.
    pub mass: Option<f64>,
    pub dirichlet_regions: Vec<Region>,
}

impl fmt::Debug for ProblemData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemData")
            .field("mass", &self.mass)
            .field("dirichlet_regions", &self.dirichlet_regions)
            .finish_non_exhaustive()
    }
}

impl ProblemData {
    /// Pure diffusion with zero data and no Dirichlet boundary.
    pub fn new(diffusion: TensorField) -> Self {
        let zero: ScalarField = Arc::new(|_| 0.0);
        ProblemData {
            diffusion,
            potential: zero.clone(),
            potential_gradient: Some(Arc::new(|_| Vec2::ZERO)),
            source: zero.clone(),
            dirichlet: zero.clone(),
            neumann: zero.clone(),
            initial: zero,
            mass: None,
            dirichlet_regions: Vec::new(),
        }
    }

    pub fn with_potential(mut self, potential: ScalarField, gradient: Option<VectorField>) -> Self {
        self.potential = potential;
        self.potential_gradient = gradient;
        self
    }

    pub fn potential_gradient_at(&self, x: Vec2, step: f64) -> Vec2 {
        match &self.potential_gradient {
            Some(g) => g(x),
            None => {
                let phi = &self.potential;
                let dx = Vec2::new(step, 0.0);
                let dy = Vec2::new(0.0, step);
                Vec2::new(
                    (phi(x + dx) - phi(x - dx)) / (2.0 * step),
                    (phi(x + dy) - phi(x - dy)) / (2.0 * step),
                )
            }
        }
    }

    /// V^φ = -Λ∇φ
    pub fn advection(&self, x: Vec2, step: f64) -> Vec2 {
        -(self.diffusion)(x).apply(self.potential_gradient_at(x, step))
    }

    /// ω = e^{-φ}
    pub fn omega(&self, x: Vec2) -> f64 {
        (-(self.potential)(x)).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    Hmm,
    ExpFit,
    ExpFitHarmonic,
    Nonlinear,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Hmm => "hmm",
            SchemeKind::ExpFit => "expfit",
            SchemeKind::ExpFitHarmonic => "expfit-harmonic",
            SchemeKind::Nonlinear => "nonlinear",
        }
    }

    pub fn is_linear(self) -> bool {
        self != SchemeKind::Nonlinear
    }
}

impl std::str::FromStr for SchemeKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "hmm" => Ok(SchemeKind::Hmm),
            "expfit" => Ok(SchemeKind::ExpFit),
            "expfit-harmonic" | "expfit_harmonic" => Ok(SchemeKind::ExpFitHarmonic),
            "nonlinear" => Ok(SchemeKind::Nonlinear),
            other => Err(format!("unknown scheme `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonParams {
    /// Lower clamp of the initial guess.
    pub epsilon: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonParams {
    fn default() -> Self {
        NewtonParams { epsilon: 1e-11, tol: 1e-11, max_iter: 50 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeConfig {
    pub scheme: SchemeKind,
    pub flux: FluxKind,
    pub eta: f64,
    pub dt: f64,
    pub final_time: f64,
    pub mean: MeanKind,
    pub aggregate: Aggregate,
    pub newton: NewtonParams,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            scheme: SchemeKind::Hmm,
            flux: FluxKind::ScharfetterGummel,
            eta: 1.5,
            dt: 1e-2,
            final_time: 1.0,
            mean: MeanKind::Arithmetic,
            aggregate: Aggregate::Mean,
            newton: NewtonParams::default(),
        }
    }
}

impl SchemeConfig {
    pub fn with_scheme(mut self, scheme: SchemeKind) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<(), SchemeError> {
        let bad = |m: String| Err(SchemeError::InvalidConfig(m));
        if !(self.eta > 0.0) {
            return bad(format!("eta must be positive, got {}", self.eta));
        }
        if !(self.dt > 0.0) {
            return bad(format!("time step must be positive, got {}", self.dt));
        }
        if !(self.final_time >= 0.0) {
            return bad(format!("final time must be nonnegative, got {}", self.final_time));
        }
        if !(self.newton.epsilon > 0.0) || !(self.newton.tol > 0.0) || self.newton.max_iter == 0 {
            return bad("Newton parameters must be positive".into());
        }
        Ok(())
    }
}

/// Linear time discretization mode.
#[derive(Clone, Copy, Debug)]
pub enum StepMode<'a> {
    Stationary,
    /// Backward Euler step from the previous cell values.
    Transient { previous_cells: &'a [f64], dt: f64 },
}

/// Maps mesh faces to rows/columns of the face block.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceNumbering {
    /// Block index of each mesh face, `None` when its value is eliminated.
    pub unknown: Vec<Option<usize>>,
    /// Prescribed values of eliminated faces.
    pub fixed: Vec<Option<f64>>,
    pub size: usize,
}

impl FaceNumbering {
    /// Every face is an unknown.
    pub fn all_faces(mesh: &Mesh) -> Self {
        let n = mesh.num_faces();
        FaceNumbering { unknown: (0..n).map(Some).collect(), fixed: vec![None; n], size: n }
    }

    /// Dirichlet faces eliminated with the given values.
    pub fn eliminating_dirichlet(mesh: &Mesh, value: impl Fn(usize) -> f64) -> Self {
        let mut unknown = Vec::with_capacity(mesh.num_faces());
        let mut fixed = Vec::with_capacity(mesh.num_faces());
        let mut size = 0;
        for (f, face) in mesh.faces.iter().enumerate() {
            if face.tag == BoundaryTag::Dirichlet {
                unknown.push(None);
                fixed.push(Some(value(f)));
            } else {
                unknown.push(Some(size));
                fixed.push(None);
                size += 1;
            }
        }
        FaceNumbering { unknown, fixed, size }
    }
}

/// Block system [M_MM M_ME; M_EM M_EE] [U_M; U_E] = [S_M; S_E] with diagonal M_MM.
#[derive(Clone, Debug)]
pub struct AssembledSystem {
    pub cell_diag: Vec<f64>,
    pub cell_face: CsrMatrix,
    pub face_cell: CsrMatrix,
    pub face_face: CsrMatrix,
    pub rhs_cells: Vec<f64>,
    pub rhs_faces: Vec<f64>,
    pub faces: FaceNumbering,
    /// Face-block row holding a cell-only constraint Σ w_K u_K = rhs (mass fixing).
    pub constraint_row: Option<usize>,
}

impl AssembledSystem {
    pub fn num_cells(&self) -> usize {
        self.cell_diag.len()
    }

    pub fn num_face_unknowns(&self) -> usize {
        self.faces.size
    }

    /// Whole matrix with cells first, for reference solves in tests.
    pub fn full_matrix(&self) -> CsrMatrix {
        use crate::solver::Triplets;
        let nc = self.num_cells();
        let n = nc + self.num_face_unknowns();
        let mut t = Triplets::new(n, n);
        for (i, &d) in self.cell_diag.iter().enumerate() {
            t.push(i, i, d);
        }
        for r in 0..nc {
            for (c, v) in self.cell_face.row(r) {
                t.push(r, nc + c, v);
            }
        }
        for r in 0..self.num_face_unknowns() {
            for (c, v) in self.face_cell.row(r) {
                t.push(nc + r, c, v);
            }
            for (c, v) in self.face_face.row(r) {
                t.push(nc + r, nc + c, v);
            }
        }
        CsrMatrix::from_triplets(&t)
    }

    pub fn full_rhs(&self) -> Vec<f64> {
        let mut v = self.rhs_cells.clone();
        v.extend_from_slice(&self.rhs_faces);
        v
    }

    /// Expands block unknowns to a mesh-sized vector, reinserting eliminated face values.
    pub fn expand(&self, cells: Vec<f64>, face_block: &[f64]) -> DofVector {
        let faces = self
            .faces
            .unknown
            .iter()
            .zip(&self.faces.fixed)
            .map(|(u, f)| match (u, f) {
                (Some(i), _) => face_block[*i],
                (None, Some(v)) => *v,
                (None, None) => unreachable!("face neither unknown nor fixed"),
            })
            .collect();
        DofVector { cells, faces }
    }

    pub fn solve(&self) -> Result<DofVector, SolverError> {
        let condensed = crate::solver::condense(self)?;
        let lu = crate::solver::Factorization::new(condensed.schur.clone())?;
        let (cells, faces) = condensed.solve(&lu, &self.rhs_cells, &self.rhs_faces)?;
        Ok(self.expand(cells, &faces))
    }
}
