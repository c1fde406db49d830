//! Positivity-preserving nonlinear scheme: fluxes r_K Σ A_K (w_K - w_σ') with w = log u + φ.

use crate::discretization::{local_diffusion_matrix, DofVector, LocalOperator};
use crate::mesh::{BoundaryTag, Mesh};
use crate::solver::{CsrMatrix, NewtonProblem, SolverError, Triplets};

use super::{AssembledSystem, FaceNumbering, ProblemData, SchemeConfig, SchemeError};

/// Two-variable mean m(x, y) used inside r_K.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MeanKind {
    Arithmetic,
    Max,
    SqrtMean,
    LogMean,
}

impl std::str::FromStr for MeanKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "arithmetic" => Ok(MeanKind::Arithmetic),
            "max" => Ok(MeanKind::Max),
            "sqrt-mean" | "sqrt_mean" => Ok(MeanKind::SqrtMean),
            "log-mean" | "log_mean" => Ok(MeanKind::LogMean),
            other => Err(format!("unknown mean `{other}`")),
        }
    }
}

/// How the per-face means are combined into r_K.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Aggregate {
    Mean,
    Max,
}

impl std::str::FromStr for Aggregate {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mean" => Ok(Aggregate::Mean),
            "max" => Ok(Aggregate::Max),
            other => Err(format!("unknown aggregate `{other}`")),
        }
    }
}

/// ℓ(t) = (t - 1)/log t and its derivative.
fn log_mean_profile(t: f64) -> (f64, f64) {
    let s = t - 1.0;
    if s.abs() < 1e-3 {
        let s2 = s * s;
        (
            1.0 + s / 2.0 - s2 / 12.0 + s2 * s / 24.0,
            0.5 - s / 6.0 + s2 / 8.0 - 19.0 * s2 * s / 180.0,
        )
    } else {
        let l = t.ln();
        (s / l, (l - s / t) / (l * l))
    }
}

/// m(x, y) with ∂m/∂x and ∂m/∂y.
pub fn mean_with_derivatives(kind: MeanKind, x: f64, y: f64) -> (f64, f64, f64) {
    match kind {
        MeanKind::Arithmetic => (0.5 * (x + y), 0.5, 0.5),
        MeanKind::Max => {
            if x >= y {
                (x, 1.0, 0.0)
            } else {
                (y, 0.0, 1.0)
            }
        }
        MeanKind::SqrtMean => {
            let (sx, sy) = (x.sqrt(), y.sqrt());
            let sum = sx + sy;
            (0.25 * sum * sum, sum / (4.0 * sx), sum / (4.0 * sy))
        }
        MeanKind::LogMean => {
            let t = y / x;
            let (l, dl) = log_mean_profile(t);
            (x * l, l - t * dl, dl)
        }
    }
}

/// r_K with its derivatives with respect to u_K and each local u_σ.
fn reconstruction_with_derivatives(
    cell: f64,
    faces: &[f64],
    mean: MeanKind,
    aggregate: Aggregate,
) -> (f64, f64, Vec<f64>) {
    let n = faces.len();
    let parts: Vec<(f64, f64, f64)> = faces.iter().map(|&y| mean_with_derivatives(mean, cell, y)).collect();
    match aggregate {
        Aggregate::Mean => {
            let inv = 1.0 / n as f64;
            let r = parts.iter().map(|p| p.0).sum::<f64>() * inv;
            let dc = parts.iter().map(|p| p.1).sum::<f64>() * inv;
            (r, dc, parts.iter().map(|p| p.2 * inv).collect())
        }
        Aggregate::Max => {
            let best = (0..n).max_by(|&i, &j| parts[i].0.total_cmp(&parts[j].0)).unwrap_or(0);
            let mut df = vec![0.0; n];
            df[best] = parts[best].2;
            (parts[best].0, parts[best].1, df)
        }
    }
}

/// r_K = f((m(u_K, u_σ))_σ); all inputs must be positive.
pub fn reconstruction_r(cell: f64, faces: &[f64], mean: MeanKind, aggregate: Aggregate) -> Result<f64, SchemeError> {
    if let Some(v) = std::iter::once(&cell).chain(faces).find(|v| !(**v > 0.0)) {
        return Err(SchemeError::NonPositive { value: *v, location: "reconstruction input".into() });
    }
    Ok(reconstruction_with_derivatives(cell, faces, mean, aggregate).0)
}

#[derive(Clone, Copy, Debug)]
pub enum NonlinearMode<'a> {
    /// Backward Euler step of length `dt` from the previous cell values.
    Transient { previous_cells: &'a [f64], dt: f64 },
    /// Steady problem; without Dirichlet faces the prescribed mass replaces the last face equation.
    Stationary,
}

/// Mesh-dependent data of the nonlinear scheme, reused across steps and Newton iterations.
#[derive(Clone, Debug)]
pub struct NonlinearScheme {
    ops: Vec<LocalOperator>,
    potential_cells: Vec<f64>,
    potential_faces: Vec<f64>,
    sources: Vec<f64>,
    /// ∫_σ g^N on Neumann faces, average of g^D on Dirichlet faces.
    boundary: Vec<f64>,
    mass: Option<f64>,
    mean: MeanKind,
    aggregate: Aggregate,
}

struct CellEval {
    fluxes: Vec<f64>,
    /// roundoff scale of each flux
    scales: Vec<f64>,
    /// ∂F_σ/∂u_K
    d_cell: Vec<f64>,
    /// ∂F_σ/∂u_τ, row-major
    d_faces: Vec<f64>,
}

impl NonlinearScheme {
    pub fn new(mesh: &Mesh, data: &ProblemData, config: &SchemeConfig) -> Result<Self, SchemeError> {
        let ops = (0..mesh.num_cells())
            .map(|k| local_diffusion_matrix(mesh, k, &*data.diffusion, config.eta))
            .collect::<Result<_, _>>()?;
        let boundary = mesh
            .faces
            .iter()
            .enumerate()
            .map(|(f, face)| match face.tag {
                BoundaryTag::Interior => 0.0,
                BoundaryTag::Neumann => face.length * mesh.face_average(f, &*data.neumann),
                BoundaryTag::Dirichlet => mesh.face_average(f, &*data.dirichlet),
            })
            .collect();
        Ok(NonlinearScheme {
            ops,
            potential_cells: mesh.cells.iter().map(|c| (data.potential)(c.center)).collect(),
            potential_faces: mesh.faces.iter().map(|f| (data.potential)(f.center)).collect(),
            sources: mesh.cells.iter().map(|c| (data.source)(c.center) * c.area).collect(),
            boundary,
            mass: data.mass,
            mean: config.mean,
            aggregate: config.aggregate,
        })
    }

    pub fn operator(&self, cell: usize) -> &LocalOperator {
        &self.ops[cell]
    }

    pub fn reconstruction(&self, cell: f64, faces: &[f64]) -> Result<f64, SchemeError> {
        reconstruction_r(cell, faces, self.mean, self.aggregate)
    }

    /// Index of the face equation replaced by the mass constraint, if any.
    fn mass_row(&self, mesh: &Mesh, mode: NonlinearMode<'_>) -> Result<Option<usize>, SchemeError> {
        if matches!(mode, NonlinearMode::Stationary) && !mesh.has_dirichlet() {
            self.mass.ok_or(SchemeError::MissingMass)?;
            Ok(Some(mesh.num_faces() - 1))
        } else {
            Ok(None)
        }
    }

    fn check_positive(u: &DofVector) -> Result<(), SchemeError> {
        let named = u.cells.iter().map(|v| (v, "cell")).chain(u.faces.iter().map(|v| (v, "face")));
        for (i, (v, kind)) in named.enumerate() {
            if !(*v > 0.0) {
                return Err(SchemeError::NonPositive { value: *v, location: format!("{kind} unknown {i}") });
            }
        }
        Ok(())
    }

    fn evaluate_cell(&self, mesh: &Mesh, k: usize, u: &DofVector, derivatives: bool) -> CellEval {
        let cell = &mesh.cells[k];
        let a = &self.ops[k].matrix;
        let n = cell.num_faces();
        let uk = u.cells[k];
        let uf: Vec<f64> = cell.faces.iter().map(|&f| u.faces[f]).collect();
        let wk = uk.ln() + self.potential_cells[k];
        let wf: Vec<f64> = cell.faces.iter().zip(&uf).map(|(&f, v)| v.ln() + self.potential_faces[f]).collect();
        let delta: Vec<f64> = wf.iter().map(|w| wk - w).collect();
        let q = a.mul_vec(&delta);
        let (r, dr_cell, dr_faces) = reconstruction_with_derivatives(uk, &uf, self.mean, self.aggregate);
        let fluxes = q.iter().map(|v| r * v).collect();
        let scales = (0..n)
            .map(|s| r * (0..n).map(|j| a.get(s, j).abs() * (wk.abs() + wf[j].abs())).sum::<f64>())
            .collect();
        let (mut d_cell, mut d_faces) = (Vec::new(), Vec::new());
        if derivatives {
            d_cell = (0..n)
                .map(|s| dr_cell * q[s] + r * (0..n).map(|j| a.get(s, j)).sum::<f64>() / uk)
                .collect();
            d_faces = (0..n * n)
                .map(|idx| {
                    let (s, t) = (idx / n, idx % n);
                    dr_faces[t] * q[s] - r * a.get(s, t) / uf[t]
                })
                .collect();
        }
        CellEval { fluxes, scales, d_cell, d_faces }
    }

    /// G(u) and a roundoff floor for its ∞-norm.
    pub fn residual(&self, mesh: &Mesh, mode: NonlinearMode<'_>, u: &DofVector) -> Result<(DofVector, f64), SchemeError> {
        Self::check_positive(u)?;
        let mass_row = self.mass_row(mesh, mode)?;
        let mut g = DofVector::zeros(mesh);
        let mut scale = DofVector::zeros(mesh);
        for (k, cell) in mesh.cells.iter().enumerate() {
            let ev = self.evaluate_cell(mesh, k, u, false);
            match mode {
                NonlinearMode::Transient { previous_cells, dt } => {
                    g.cells[k] = cell.area * (u.cells[k] - previous_cells[k]) / dt;
                    scale.cells[k] = cell.area * (u.cells[k].abs() + previous_cells[k].abs()) / dt;
                }
                NonlinearMode::Stationary => {
                    g.cells[k] = -self.sources[k];
                    scale.cells[k] = self.sources[k].abs();
                }
            }
            for (l, &f) in cell.faces.iter().enumerate() {
                g.cells[k] += ev.fluxes[l];
                scale.cells[k] += ev.scales[l];
                g.faces[f] -= ev.fluxes[l];
                scale.faces[f] += ev.scales[l];
            }
        }
        for (f, face) in mesh.faces.iter().enumerate() {
            match face.tag {
                BoundaryTag::Interior => {}
                BoundaryTag::Neumann => {
                    g.faces[f] -= self.boundary[f];
                    scale.faces[f] += self.boundary[f].abs();
                }
                BoundaryTag::Dirichlet => {
                    g.faces[f] = self.boundary[f] - u.faces[f];
                    scale.faces[f] = self.boundary[f].abs() + u.faces[f].abs();
                }
            }
        }
        if let Some(row) = mass_row {
            let m = self.mass.unwrap_or(0.0);
            let total: f64 = mesh.cells.iter().zip(&u.cells).map(|(c, v)| c.area * v).sum();
            g.faces[row] = total - m;
            scale.faces[row] = m.abs();
        }
        let largest = scale.cells.iter().chain(&scale.faces).fold(0.0f64, |a, v| a.max(*v));
        Ok((g, 100.0 * f64::EPSILON * largest))
    }

    /// Exact Jacobian of [`residual`](Self::residual) as a block system (right-hand side left zero).
    pub fn jacobian(&self, mesh: &Mesh, mode: NonlinearMode<'_>, u: &DofVector) -> Result<AssembledSystem, SchemeError> {
        Self::check_positive(u)?;
        let mass_row = self.mass_row(mesh, mode)?;
        let nc = mesh.num_cells();
        let ne = mesh.num_faces();
        let mut cell_diag = vec![0.0; nc];
        let mut me = Triplets::new(nc, ne);
        let mut em = Triplets::new(ne, nc);
        let mut ee = Triplets::new(ne, ne);
        let face_row = |f: usize| mesh.faces[f].tag != BoundaryTag::Dirichlet && Some(f) != mass_row;
        for (k, cell) in mesh.cells.iter().enumerate() {
            let ev = self.evaluate_cell(mesh, k, u, true);
            let n = cell.num_faces();
            if let NonlinearMode::Transient { dt, .. } = mode {
                cell_diag[k] = cell.area / dt;
            }
            for s in 0..n {
                cell_diag[k] += ev.d_cell[s];
                let f = cell.faces[s];
                if face_row(f) {
                    em.push(f, k, -ev.d_cell[s]);
                }
                for t in 0..n {
                    let d = ev.d_faces[s * n + t];
                    me.push(k, cell.faces[t], d);
                    if face_row(f) {
                        ee.push(f, cell.faces[t], -d);
                    }
                }
            }
        }
        for (f, face) in mesh.faces.iter().enumerate() {
            if face.tag == BoundaryTag::Dirichlet {
                ee.push(f, f, -1.0);
            }
        }
        if let Some(row) = mass_row {
            for (k, cell) in mesh.cells.iter().enumerate() {
                em.push(row, k, cell.area);
            }
            ee.push(row, row, 0.0);
        }
        Ok(AssembledSystem {
            cell_diag,
            cell_face: CsrMatrix::from_triplets(&me),
            face_cell: CsrMatrix::from_triplets(&em),
            face_face: CsrMatrix::from_triplets(&ee),
            rhs_cells: vec![0.0; nc],
            rhs_faces: vec![0.0; ne],
            faces: FaceNumbering::all_faces(mesh),
            constraint_row: mass_row,
        })
    }

    /// Σ_K r_K δw·A_K δw with w = log u + φ.
    pub fn dissipation(&self, mesh: &Mesh, u: &DofVector) -> Result<f64, SchemeError> {
        Self::check_positive(u)?;
        let mut total = 0.0;
        for (k, cell) in mesh.cells.iter().enumerate() {
            let ev = self.evaluate_cell(mesh, k, u, false);
            let wk = u.cells[k].ln() + self.potential_cells[k];
            for (l, &f) in cell.faces.iter().enumerate() {
                total += ev.fluxes[l] * (wk - u.faces[f].ln() - self.potential_faces[f]);
            }
        }
        Ok(total)
    }

    /// Newton problem in the flat ordering cells-then-faces.
    pub fn problem<'a>(&'a self, mesh: &'a Mesh, mode: NonlinearMode<'a>) -> NonlinearProblem<'a> {
        NonlinearProblem { scheme: self, mesh, mode }
    }
}

pub struct NonlinearProblem<'a> {
    scheme: &'a NonlinearScheme,
    mesh: &'a Mesh,
    mode: NonlinearMode<'a>,
}

impl NewtonProblem for NonlinearProblem<'_> {
    type Error = SchemeError;

    fn residual(&mut self, u: &[f64]) -> Result<(Vec<f64>, f64), SchemeError> {
        let v = DofVector::from_flat(self.mesh, u);
        let (g, floor) = self.scheme.residual(self.mesh, self.mode, &v)?;
        Ok((g.to_flat(), floor))
    }

    fn solve_linearized(&mut self, u: &[f64], rhs: &[f64]) -> Result<Vec<f64>, SchemeError> {
        let v = DofVector::from_flat(self.mesh, u);
        let mut sys = self.scheme.jacobian(self.mesh, self.mode, &v)?;
        let nc = self.mesh.num_cells();
        sys.rhs_cells = rhs[..nc].to_vec();
        sys.rhs_faces = rhs[nc..].to_vec();
        Ok(sys.solve().map_err(SolverError::from)?.to_flat())
    }
}
