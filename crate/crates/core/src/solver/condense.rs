//! Static condensation of the diagonal cell block.

use crate::schemes::AssembledSystem;

use super::{CsrMatrix, Factorization, SolverError, Triplets};

/// Face-only Schur system M_EE − M_EM M_MM⁻¹ M_ME plus what is needed to recover cells.
///
/// A cell-only constraint row would turn into a dense Schur row, so that row is pinned
/// (identity) instead and the constraint is restored by adding a multiple of the
/// kernel of the remaining rows; see [`CondensedSystem::solve`].
#[derive(Clone, Debug)]
pub struct CondensedSystem {
    pub schur: CsrMatrix,
    pub rhs: Vec<f64>,
    cell_diag: Vec<f64>,
    cell_face: CsrMatrix,
    /// M_EM transposed: row K lists the faces coupled to cell K.
    face_cell_by_cell: CsrMatrix,
    /// Pinned row and its cell weights.
    constraint: Option<(usize, Vec<f64>)>,
}

pub fn condense(system: &AssembledSystem) -> Result<CondensedSystem, SolverError> {
    let nc = system.num_cells();
    let ne = system.num_face_unknowns();
    if system.cell_face.nrows != nc || system.cell_face.ncols != ne || system.face_cell.nrows != ne {
        return Err(SolverError::Dimension("block sizes are inconsistent".into()));
    }
    if let Some(k) = system.cell_diag.iter().position(|&d| d == 0.0 || !d.is_finite()) {
        return Err(SolverError::ZeroCellDiagonal(k));
    }
    let constraint = match system.constraint_row {
        Some(r) if r >= ne => return Err(SolverError::Dimension(format!("constraint row {r} out of {ne}"))),
        Some(r) if system.face_face.row(r).any(|(_, v)| v != 0.0) => {
            return Err(SolverError::Dimension(format!("constraint row {r} couples to faces")))
        }
        Some(r) => {
            let mut w = vec![0.0; nc];
            for (k, v) in system.face_cell.row(r) {
                w[k] += v;
            }
            Some((r, w))
        }
        None => None,
    };
    let pinned = constraint.as_ref().map(|(r, _)| *r);
    let face_cell_by_cell = system.face_cell.transpose();
    let mut t = Triplets::new(ne, ne);
    t.entries.extend((0..ne).flat_map(|r| system.face_face.row(r).map(move |(c, v)| (r, c, v))));
    for k in 0..nc {
        let inv = 1.0 / system.cell_diag[k];
        for (i, a) in face_cell_by_cell.row(k) {
            if Some(i) == pinned {
                continue;
            }
            for (j, b) in system.cell_face.row(k) {
                t.push(i, j, -a * b * inv);
            }
        }
    }
    if let Some(r) = pinned {
        t.push(r, r, 1.0);
    }
    let mut condensed = CondensedSystem {
        schur: CsrMatrix::from_triplets(&t),
        rhs: Vec::new(),
        cell_diag: system.cell_diag.clone(),
        cell_face: system.cell_face.clone(),
        face_cell_by_cell,
        constraint,
    };
    condensed.rhs = condensed.condense_rhs(&system.rhs_cells, &system.rhs_faces);
    Ok(condensed)
}

impl CondensedSystem {
    /// S_E − M_EM M_MM⁻¹ S_M for a new pair of right-hand sides.
    pub fn condense_rhs(&self, rhs_cells: &[f64], rhs_faces: &[f64]) -> Vec<f64> {
        let mut out = rhs_faces.to_vec();
        for (k, &s) in rhs_cells.iter().enumerate() {
            let scaled = s / self.cell_diag[k];
            for (i, a) in self.face_cell_by_cell.row(k) {
                out[i] -= a * scaled;
            }
        }
        if let Some((r, _)) = &self.constraint {
            out[*r] = 0.0;
        }
        out
    }

    /// Cells and face block for the given right-hand sides, `lu` factoring `self.schur`.
    pub fn solve(&self, lu: &Factorization, rhs_cells: &[f64], rhs_faces: &[f64]) -> Result<(Vec<f64>, Vec<f64>), SolverError> {
        let mut faces = lu.solve(&self.condense_rhs(rhs_cells, rhs_faces))?;
        let mut cells = self.recover(rhs_cells, &faces);
        if let Some((r, weights)) = &self.constraint {
            let mut unit = vec![0.0; faces.len()];
            unit[*r] = 1.0;
            let kernel_faces = lu.solve(&unit)?;
            let kernel_cells = self.recover(&vec![0.0; cells.len()], &kernel_faces);
            let dot = |v: &[f64]| weights.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
            let denom = dot(&kernel_cells);
            if !(denom.abs() > 0.0) || !denom.is_finite() {
                return Err(SolverError::Singular("constraint vanishes on the kernel".into()));
            }
            let shift = (rhs_faces[*r] - dot(&cells)) / denom;
            for (f, k) in faces.iter_mut().zip(&kernel_faces) {
                *f += shift * k;
            }
            for (c, k) in cells.iter_mut().zip(&kernel_cells) {
                *c += shift * k;
            }
        }
        Ok((cells, faces))
    }

    /// U_M = M_MM⁻¹ (S_M − M_ME U_E)
    pub fn recover(&self, rhs_cells: &[f64], faces: &[f64]) -> Vec<f64> {
        let coupled = self.cell_face.mul_vec(faces);
        rhs_cells
            .iter()
            .zip(&coupled)
            .zip(&self.cell_diag)
            .map(|((s, c), d)| (s - c) / d)
            .collect()
    }
}
