//! The two linear schemes: HMM with two-point advective fluxes, and exponential fitting.

use crate::discretization::{local_diffusion_matrix, LocalOperator, SmallMatrix};
use crate::geometry::SymMat2;
use crate::mesh::{BoundaryTag, Mesh};
use crate::solver::{CsrMatrix, Triplets};

use super::flux::{face_advection, flux_a, peclet_weight};
use super::{AssembledSystem, FaceNumbering, ProblemData, SchemeConfig, SchemeError, SchemeKind, StepMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OmegaMode {
    /// ω and Λ at the pyramid barycenter.
    Standard,
    /// Harmonic mean of ω over the pyramid's edge midpoints, Λ at the cell center.
    Harmonic,
}

fn harmonic_mean3(values: [f64; 3]) -> f64 {
    3.0 / values.iter().map(|v| 1.0 / v).sum::<f64>()
}

/// (ωΛ)_{K,σ} on the pyramid of face `local` of `cell`.
///
/// `Standard` averages ω over the three pyramid vertices (trapezoidal rule) with Λ at the
/// barycenter; `Harmonic` takes the harmonic mean of ω at the three edge midpoints with Λ(x_K).
pub fn omega_average(mesh: &Mesh, cell: usize, local: usize, data: &ProblemData, mode: OmegaMode) -> SymMat2 {
    match mode {
        OmegaMode::Standard => {
            let b = mesh.pyramid_barycenter(cell, local);
            let vertices = mesh.pyramid(cell, local);
            (data.diffusion)(b).scale(vertices.iter().map(|v| data.omega(*v)).sum::<f64>() / 3.0)
        }
        OmegaMode::Harmonic => {
            let [p, a, b] = mesh.pyramid(cell, local);
            let mids = [(a + b) * 0.5, (p + a) * 0.5, (p + b) * 0.5];
            let w = harmonic_mean3(mids.map(|m| data.omega(m)));
            (data.diffusion)(p).scale(w)
        }
    }
}

/// F_{K,σ} = cell[σ] u_K + Σ_σ' faces[σ][σ'] u_σ'
#[derive(Clone, Debug)]
struct CellFluxes {
    cell: Vec<f64>,
    faces: SmallMatrix,
}

/// Precomputed local flux coefficients of a linear scheme on a fixed mesh.
#[derive(Clone, Debug)]
pub struct LinearScheme {
    pub kind: SchemeKind,
    fluxes: Vec<CellFluxes>,
}

impl LinearScheme {
    pub fn new(mesh: &Mesh, data: &ProblemData, config: &SchemeConfig) -> Result<Self, SchemeError> {
        let fluxes = (0..mesh.num_cells())
            .map(|k| match config.scheme {
                SchemeKind::Hmm => hmm_cell(mesh, data, config, k),
                SchemeKind::ExpFit => expfit_cell(mesh, data, config.eta, k, OmegaMode::Standard),
                SchemeKind::ExpFitHarmonic => expfit_cell(mesh, data, config.eta, k, OmegaMode::Harmonic),
                SchemeKind::Nonlinear => Err(SchemeError::InvalidConfig(
                    "the nonlinear scheme has no linear assembly".into(),
                )),
            })
            .collect::<Result<_, _>>()?;
        Ok(LinearScheme { kind: config.scheme, fluxes })
    }

    /// Fluxes F_{K,σ} for all faces of `cell` given mesh-wide values.
    pub fn cell_fluxes(&self, mesh: &Mesh, cell: usize, cells: &[f64], faces: &[f64]) -> Vec<f64> {
        let c = &self.fluxes[cell];
        let local: Vec<f64> = mesh.cells[cell].faces.iter().map(|&f| faces[f]).collect();
        let mut out: Vec<f64> = c.cell.iter().map(|a| a * cells[cell]).collect();
        for (o, v) in out.iter_mut().zip(c.faces.mul_vec(&local)) {
            *o += v;
        }
        out
    }

    pub fn assemble(&self, mesh: &Mesh, data: &ProblemData, mode: StepMode<'_>) -> Result<AssembledSystem, SchemeError> {
        let stationary = matches!(mode, StepMode::Stationary);
        let constrained = stationary && !mesh.has_dirichlet();
        let mass = if constrained { Some(data.mass.ok_or(SchemeError::MissingMass)?) } else { None };
        let numbering = FaceNumbering::eliminating_dirichlet(mesh, |f| mesh.face_average(f, &*data.dirichlet));

        let nc = mesh.num_cells();
        let ne = numbering.size;
        let mut cell_diag = vec![0.0; nc];
        let mut rhs_cells = vec![0.0; nc];
        let mut rhs_faces = vec![0.0; ne];
        let mut me = Triplets::new(nc, ne);
        let mut em = Triplets::new(ne, nc);
        let mut ee = Triplets::new(ne, ne);

        for (k, cell) in mesh.cells.iter().enumerate() {
            let fl = &self.fluxes[k];
            let nf = cell.num_faces();
            cell_diag[k] = fl.cell.iter().sum();
            rhs_cells[k] = (data.source)(cell.center) * cell.area;
            if let StepMode::Transient { previous_cells, dt } = mode {
                cell_diag[k] += cell.area / dt;
                rhs_cells[k] += cell.area / dt * previous_cells[k];
            }
            for j in 0..nf {
                let coef: f64 = (0..nf).map(|s| fl.faces.get(s, j)).sum();
                match numbering.unknown[cell.faces[j]] {
                    Some(col) => me.push(k, col, coef),
                    None => rhs_cells[k] -= coef * numbering.fixed[cell.faces[j]].unwrap_or(0.0),
                }
            }
            // face rows collect -F_{K,σ}
            for s in 0..nf {
                let Some(row) = numbering.unknown[cell.faces[s]] else { continue };
                em.push(row, k, -fl.cell[s]);
                for j in 0..nf {
                    let coef = -fl.faces.get(s, j);
                    match numbering.unknown[cell.faces[j]] {
                        Some(col) => ee.push(row, col, coef),
                        None => rhs_faces[row] -= coef * numbering.fixed[cell.faces[j]].unwrap_or(0.0),
                    }
                }
            }
        }
        for (f, face) in mesh.faces.iter().enumerate() {
            if face.tag == BoundaryTag::Neumann {
                if let Some(row) = numbering.unknown[f] {
                    rhs_faces[row] += face.length * mesh.face_average(f, &*data.neumann);
                }
            }
        }
        // Without Dirichlet faces the fluxes telescope, so all rows sum to zero. A multiplier
        // λ|K| added to the cell rows is then fixed by the data, λ = Σ rhs / |Ω|; once it is
        // moved to the right-hand side, the last face row is redundant and carries the mass.
        let mut constraint_row = None;
        if let Some(m) = mass {
            let lambda = (rhs_cells.iter().sum::<f64>() + rhs_faces.iter().sum::<f64>()) / mesh.total_area();
            for (r, cell) in rhs_cells.iter_mut().zip(&mesh.cells) {
                *r -= lambda * cell.area;
            }
            let last = ne - 1;
            em.entries.retain(|e| e.0 != last);
            ee.entries.retain(|e| e.0 != last);
            for (k, cell) in mesh.cells.iter().enumerate() {
                em.push(last, k, cell.area);
            }
            rhs_faces[last] = m;
            constraint_row = Some(last);
        }

        Ok(AssembledSystem {
            cell_diag,
            cell_face: CsrMatrix::from_triplets(&me),
            face_cell: CsrMatrix::from_triplets(&em),
            face_face: CsrMatrix::from_triplets(&ee),
            rhs_cells,
            rhs_faces,
            faces: numbering,
            constraint_row,
        })
    }
}

fn diffusive_part(op: &LocalOperator, scale_cell: f64, scale_faces: &[f64]) -> CellFluxes {
    let k = op.size();
    let mut faces = SmallMatrix::zeros(k);
    let mut cell = vec![0.0; k];
    for s in 0..k {
        for j in 0..k {
            let a = op.matrix.get(s, j);
            cell[s] += a * scale_cell;
            faces.add(s, j, -a * scale_faces[j]);
        }
    }
    CellFluxes { cell, faces }
}

fn hmm_cell(mesh: &Mesh, data: &ProblemData, config: &SchemeConfig, k: usize) -> Result<CellFluxes, SchemeError> {
    let op = local_diffusion_matrix(mesh, k, &*data.diffusion, config.eta)?;
    let c = &mesh.cells[k];
    let mut fl = diffusive_part(&op, 1.0, &vec![1.0; c.num_faces()]);
    for s in 0..c.num_faces() {
        let f = c.faces[s];
        let mu = peclet_weight(mesh, f, data);
        let d = c.distances[s];
        let v = face_advection(mesh, data, k, s);
        let sv = d / mu * v;
        let w = mesh.faces[f].length * mu / d;
        fl.cell[s] += w * flux_a(config.flux, -sv);
        fl.faces.add(s, s, -w * flux_a(config.flux, sv));
    }
    Ok(fl)
}

fn expfit_cell(mesh: &Mesh, data: &ProblemData, eta: f64, k: usize, mode: OmegaMode) -> Result<CellFluxes, SchemeError> {
    let c = &mesh.cells[k];
    let tensors: Vec<SymMat2> = (0..c.num_faces()).map(|s| omega_average(mesh, k, s, data, mode)).collect();
    let op = LocalOperator::from_pyramid_tensors(mesh, k, eta, &tensors)?;
    // unknown u = ω ρ: divide each column by the point value of ω
    let omega_faces: Vec<f64> = c.faces.iter().map(|&f| 1.0 / data.omega(mesh.faces[f].center)).collect();
    Ok(diffusive_part(&op, 1.0 / data.omega(c.center), &omega_faces))
}

pub fn assemble_hmm(
    mesh: &Mesh,
    data: &ProblemData,
    config: &SchemeConfig,
    mode: StepMode<'_>,
) -> Result<AssembledSystem, SchemeError> {
    let cfg = SchemeConfig { scheme: SchemeKind::Hmm, ..*config };
    LinearScheme::new(mesh, data, &cfg)?.assemble(mesh, data, mode)
}

/// Exponential fitting in the unknown u; `config.scheme` selects standard or harmonic averaging.
pub fn assemble_expfit(
    mesh: &Mesh,
    data: &ProblemData,
    config: &SchemeConfig,
    mode: StepMode<'_>,
) -> Result<AssembledSystem, SchemeError> {
    let scheme = match config.scheme {
        SchemeKind::ExpFitHarmonic => SchemeKind::ExpFitHarmonic,
        _ => SchemeKind::ExpFit,
    };
    let cfg = SchemeConfig { scheme, ..*config };
    LinearScheme::new(mesh, data, &cfg)?.assemble(mesh, data, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{mass, DofVector};
    use crate::geometry::Vec2;
    use crate::mesh::{cartesian, kershaw, triangular, Region};
    use crate::solver::sparse_solve;
    use std::sync::Arc;

    fn diag_data(lx: f64, ly: f64) -> ProblemData {
        ProblemData::new(Arc::new(move |_| SymMat2::diag(lx, ly)))
    }

    fn thermal_data() -> ProblemData {
        // φ = -x with Λ = diag(0.01, 1)
        let mut d = diag_data(0.01, 1.0)
            .with_potential(Arc::new(|p: Vec2| -p.x), Some(Arc::new(|_| Vec2::new(-1.0, 0.0))));
        d.mass = Some(0.7);
        d
    }

    #[test]
    fn omega_average_examples() {
        let m = cartesian(1).unwrap();
        let mut d = diag_data(2.0, 3.0);
        d.potential = Arc::new(|_| -0.5f64.ln());
        for mode in [OmegaMode::Standard, OmegaMode::Harmonic] {
            let t = omega_average(&m, 0, 1, &d, mode);
            assert!((t.xx - 1.0).abs() < 1e-15 && (t.yy - 1.5).abs() < 1e-15);
        }
        let d = diag_data(1.0, 1.0).with_potential(Arc::new(|p: Vec2| -p.x), None);
        // local face 1 is the right side: vertices at abscissae 0.5, 1, 1
        let t = omega_average(&m, 0, 1, &d, OmegaMode::Standard);
        assert!((t.xx - (0.5f64.exp() + 2.0 * 1.0f64.exp()) / 3.0).abs() < 1e-14);
        // edge midpoints at abscissae 1, 0.75, 0.75
        let t = omega_average(&m, 0, 1, &d, OmegaMode::Harmonic);
        let expect = 3.0 / ((-1.0f64).exp() + 2.0 * (-0.75f64).exp());
        assert!((t.xx - expect).abs() < 1e-14);
        assert!((harmonic_mean3([1.0, 2.0, 4.0]) - 12.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn single_cell_constant_state() {
        let m = cartesian(1).unwrap();
        let mut d = diag_data(1.0, 1.0);
        d.mass = Some(0.3);
        let cfg = SchemeConfig::default();
        let u = assemble_hmm(&m, &d, &cfg, StepMode::Stationary).unwrap().solve().unwrap();
        assert!(u.cells.iter().chain(&u.faces).all(|v| (v - 0.3).abs() < 1e-14), "{u:?}");
    }

    #[test]
    fn transient_step_from_steady_state_is_fixed() {
        let m = kershaw(6, 0.5).unwrap();
        let d = thermal_data();
        for scheme in [SchemeKind::Hmm, SchemeKind::ExpFit, SchemeKind::ExpFitHarmonic] {
            let cfg = SchemeConfig::default().with_scheme(scheme);
            let lin = LinearScheme::new(&m, &d, &cfg).unwrap();
            let steady = lin.assemble(&m, &d, StepMode::Stationary).unwrap().solve().unwrap();
            let next = lin
                .assemble(&m, &d, StepMode::Transient { previous_cells: &steady.cells, dt: 0.1 })
                .unwrap()
                .solve()
                .unwrap();
            assert!(next.max_abs_diff(&steady) < 1e-11, "{scheme:?}");
            assert!((mass(&m, &steady) - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn expfit_preserves_thermal_equilibrium() {
        let m = kershaw(5, 0.7).unwrap();
        let d = thermal_data();
        let omega = DofVector::interpolate(&m, |p| d.omega(p));
        let rho = 0.7 / mass(&m, &omega);
        for scheme in [SchemeKind::ExpFit, SchemeKind::ExpFitHarmonic] {
            let cfg = SchemeConfig::default().with_scheme(scheme);
            let u = assemble_expfit(&m, &d, &cfg, StepMode::Stationary).unwrap().solve().unwrap();
            assert!(u.max_abs_diff(&omega.map(|w| rho * w)) < 1e-12);
        }
        let cfg = SchemeConfig::default();
        let u = assemble_hmm(&m, &d, &cfg, StepMode::Stationary).unwrap().solve().unwrap();
        assert!(u.max_abs_diff(&omega.map(|w| rho * w)) > 1e-8);
    }

    #[test]
    fn expfit_without_potential_equals_hmm() {
        let m = triangular(3).unwrap();
        let mut d = diag_data(1.0, 2.0);
        d.mass = Some(1.0);
        let cfg = SchemeConfig::default();
        let a = assemble_hmm(&m, &d, &cfg, StepMode::Stationary).unwrap().full_matrix().to_dense();
        let b = assemble_expfit(&m, &d, &cfg.with_scheme(SchemeKind::ExpFit), StepMode::Stationary)
            .unwrap()
            .full_matrix()
            .to_dense();
        for (ra, rb) in a.iter().zip(&b) {
            for (x, y) in ra.iter().zip(rb) {
                assert!((x - y).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn interface_fluxes_balance_at_solution() {
        let m = cartesian(2).unwrap().tag_boundary(&[Region::vertical_line(0.0), Region::vertical_line(1.0)]).unwrap();
        let mut d = diag_data(1.0, 1.0);
        d.dirichlet = Arc::new(|p: Vec2| 1.0 + p.x * p.y);
        d.source = Arc::new(|p: Vec2| p.x + 2.0);
        let cfg = SchemeConfig::default();
        let lin = LinearScheme::new(&m, &d, &cfg).unwrap();
        let u = lin.assemble(&m, &d, StepMode::Stationary).unwrap().solve().unwrap();
        let mut balance = vec![0.0; m.num_faces()];
        for k in 0..m.num_cells() {
            for (l, fl) in lin.cell_fluxes(&m, k, &u.cells, &u.faces).iter().enumerate() {
                balance[m.cells[k].faces[l]] += fl;
            }
        }
        for (f, face) in m.faces.iter().enumerate() {
            if face.tag == BoundaryTag::Interior || face.tag == BoundaryTag::Neumann {
                assert!(balance[f].abs() < 1e-13, "face {f}: {}", balance[f]);
            }
        }
    }

    #[test]
    fn condensed_solution_matches_full_solve() {
        let m = kershaw(4, 0.6).unwrap().tag_boundary(&[Region::vertical_line(0.0)]).unwrap();
        let mut d = thermal_data();
        d.dirichlet = Arc::new(|p: Vec2| 2.0 + p.y);
        d.neumann = Arc::new(|p: Vec2| p.x - 0.3);
        d.source = Arc::new(|p: Vec2| (3.0 * p.x).sin());
        for scheme in [SchemeKind::Hmm, SchemeKind::ExpFit, SchemeKind::ExpFitHarmonic] {
            let sys = LinearScheme::new(&m, &d, &SchemeConfig::default().with_scheme(scheme))
                .unwrap()
                .assemble(&m, &d, StepMode::Stationary)
                .unwrap();
            let u = sys.solve().unwrap();
            let full = sparse_solve(&sys.full_matrix(), &sys.full_rhs()).unwrap();
            let nc = m.num_cells();
            let expect = sys.expand(full[..nc].to_vec(), &full[nc..]);
            let scale = expect.cells.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            assert!(u.max_abs_diff(&expect) <= 1e-10 * scale);
        }
    }
}
