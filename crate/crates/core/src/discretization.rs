//! Hybrid unknowns, the stabilized discrete gradient and the local matrices A_K / B_K.

use thiserror::Error;

use crate::geometry::{SymMat2, Vec2};
use crate::mesh::Mesh;

#[derive(Debug, Error)]
pub enum DiscretizationError {
    #[error("local diffusion matrix of cell {cell} is numerically singular")]
    SingularCell { cell: usize },
    #[error("stabilization parameter must be positive, got {0}")]
    InvalidEta(f64),
}

/// One value per cell and one per face.
#[derive(Clone, Debug, PartialEq)]
pub struct DofVector {
    pub cells: Vec<f64>,
    pub faces: Vec<f64>,
}

/// Values attached to one cell: its own value and those of its faces, in cell order.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalDofs {
    pub cell: f64,
    pub faces: Vec<f64>,
}

impl LocalDofs {
    /// δ_K v = (v_K - v_σ)_σ
    pub fn deltas(&self) -> Vec<f64> {
        self.faces.iter().map(|f| self.cell - f).collect()
    }
}

impl DofVector {
    pub fn constant(mesh: &Mesh, value: f64) -> Self {
        DofVector { cells: vec![value; mesh.num_cells()], faces: vec![value; mesh.num_faces()] }
    }

    pub fn zeros(mesh: &Mesh) -> Self {
        Self::constant(mesh, 0.0)
    }

    /// Point values at cell centers and face barycenters.
    pub fn interpolate(mesh: &Mesh, f: impl Fn(Vec2) -> f64) -> Self {
        DofVector {
            cells: mesh.cells.iter().map(|c| f(c.center)).collect(),
            faces: mesh.faces.iter().map(|s| f(s.center)).collect(),
        }
    }

    /// Cells first, then faces.
    pub fn from_flat(mesh: &Mesh, flat: &[f64]) -> Self {
        let nc = mesh.num_cells();
        DofVector { cells: flat[..nc].to_vec(), faces: flat[nc..nc + mesh.num_faces()].to_vec() }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.cells.len() + self.faces.len());
        v.extend_from_slice(&self.cells);
        v.extend_from_slice(&self.faces);
        v
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        DofVector {
            cells: self.cells.iter().map(|&x| f(x)).collect(),
            faces: self.faces.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn zip_map(&self, other: &DofVector, f: impl Fn(f64, f64) -> f64) -> Self {
        DofVector {
            cells: self.cells.iter().zip(&other.cells).map(|(&a, &b)| f(a, b)).collect(),
            faces: self.faces.iter().zip(&other.faces).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn local(&self, mesh: &Mesh, cell: usize) -> LocalDofs {
        LocalDofs {
            cell: self.cells[cell],
            faces: mesh.cells[cell].faces.iter().map(|&f| self.faces[f]).collect(),
        }
    }

    pub fn min_cell(&self) -> f64 {
        self.cells.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn min_face(&self) -> f64 {
        self.faces.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_diff(&self, other: &DofVector) -> f64 {
        self.cells
            .iter()
            .zip(&other.cells)
            .chain(self.faces.iter().zip(&other.faces))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Per-pyramid gradients ∇_{K,σ} v = G_K v + S_{K,σ} v, evaluated directly from the dofs.
pub fn local_gradient(mesh: &Mesh, cell: usize, dofs: &LocalDofs, eta: f64) -> Vec<Vec2> {
    let c = &mesh.cells[cell];
    let mut consistent = Vec2::ZERO;
    for (l, &f) in c.faces.iter().enumerate() {
        consistent += c.normals[l] * (mesh.faces[f].length * dofs.faces[l]);
    }
    consistent = consistent * (1.0 / c.area);
    c.faces
        .iter()
        .enumerate()
        .map(|(l, &f)| {
            let offset = mesh.faces[f].center - c.center;
            let jump = dofs.faces[l] - dofs.cell - consistent.dot(offset);
            consistent + c.normals[l] * (eta / c.distances[l] * jump)
        })
        .collect()
}

/// Dense row-major square matrix for local operators.
#[derive(Clone, Debug, PartialEq)]
pub struct SmallMatrix {
    pub size: usize,
    pub data: Vec<f64>,
}

impl SmallMatrix {
    pub fn zeros(size: usize) -> Self {
        SmallMatrix { size, data: vec![0.0; size * size] }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size + j]
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.size + j] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.size)
            .map(|i| (0..self.size).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    pub fn quadratic(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(self.mul_vec(y)).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Cholesky-based positive-definiteness test with a pivot threshold relative to the diagonal.
    pub fn is_positive_definite(&self, rel_tol: f64) -> bool {
        let n = self.size;
        let scale = (0..n).map(|i| self.get(i, i).abs()).fold(0.0, f64::max);
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = self.get(j, j);
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > rel_tol * scale) {
                return false;
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in j + 1..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / d;
            }
        }
        true
    }
}

/// A_K, the diagonal comparison matrix B_K, and the gradient map N_K of one cell.
#[derive(Clone, Debug)]
pub struct LocalOperator {
    pub matrix: SmallMatrix,
    /// B_K^{σσ} = Σ_σ' |A_K^{σσ'}|
    pub comparison: Vec<f64>,
    /// `gradient_map[σ][j]`: coefficient of δ_j in ∇_{K,σ}.
    pub gradient_map: Vec<Vec<Vec2>>,
}

impl LocalOperator {
    /// Assembles A_K = N_Kᵀ W_K N_K with one tensor per pyramid (already weighted if needed).
    pub fn from_pyramid_tensors(
        mesh: &Mesh,
        cell: usize,
        eta: f64,
        tensors: &[SymMat2],
    ) -> Result<Self, DiscretizationError> {
        if !(eta > 0.0) {
            return Err(DiscretizationError::InvalidEta(eta));
        }
        let c = &mesh.cells[cell];
        let k = c.num_faces();
        // G_K v = -(1/|K|) Σ |σ'| δ_σ' n_σ'
        let consistent: Vec<Vec2> = (0..k)
            .map(|j| c.normals[j] * (-mesh.faces[c.faces[j]].length / c.area))
            .collect();
        let gradient_map: Vec<Vec<Vec2>> = (0..k)
            .map(|s| {
                let offset = mesh.faces[c.faces[s]].center - c.center;
                let scale = eta / c.distances[s];
                (0..k)
                    .map(|j| {
                        let own = if j == s { 1.0 } else { 0.0 };
                        consistent[j] - c.normals[s] * (scale * (own + consistent[j].dot(offset)))
                    })
                    .collect()
            })
            .collect();

        let mut matrix = SmallMatrix::zeros(k);
        for s in 0..k {
            let weight = mesh.pyramid_area(cell, s);
            let row = &gradient_map[s];
            let flux: Vec<Vec2> = row.iter().map(|g| tensors[s].apply(*g) * weight).collect();
            for i in 0..k {
                for j in i..k {
                    let v = row[i].dot(flux[j]);
                    matrix.add(i, j, v);
                    if j != i {
                        matrix.add(j, i, v);
                    }
                }
            }
        }
        if !matrix.is_positive_definite(1e-13) {
            return Err(DiscretizationError::SingularCell { cell });
        }
        let comparison = (0..k).map(|i| (0..k).map(|j| matrix.get(i, j).abs()).sum()).collect();
        Ok(LocalOperator { matrix, comparison, gradient_map })
    }

    pub fn size(&self) -> usize {
        self.matrix.size
    }

    /// Gradients on each pyramid from the difference vector δ_K v.
    pub fn gradients(&self, deltas: &[f64]) -> Vec<Vec2> {
        self.gradient_map
            .iter()
            .map(|row| row.iter().zip(deltas).fold(Vec2::ZERO, |acc, (g, d)| acc + *g * *d))
            .collect()
    }
}

/// Local operator with Λ evaluated at each pyramid barycenter.
pub fn local_diffusion_matrix(
    mesh: &Mesh,
    cell: usize,
    diffusion: &dyn Fn(Vec2) -> SymMat2,
    eta: f64,
) -> Result<LocalOperator, DiscretizationError> {
    let tensors: Vec<SymMat2> = (0..mesh.cells[cell].num_faces())
        .map(|s| diffusion(mesh.pyramid_barycenter(cell, s)))
        .collect();
    LocalOperator::from_pyramid_tensors(mesh, cell, eta, &tensors)
}

/// F_{K,σ} = Σ_σ' A_K^{σσ'} (u_K - u_σ')
pub fn diffusive_fluxes(op: &LocalOperator, dofs: &LocalDofs) -> Vec<f64> {
    op.matrix.mul_vec(&dofs.deltas())
}

/// Discrete H¹ seminorm |v|_{1,D}.
pub fn seminorm_h1(mesh: &Mesh, v: &DofVector) -> f64 {
    let mut acc = 0.0;
    for (ci, c) in mesh.cells.iter().enumerate() {
        for (l, &f) in c.faces.iter().enumerate() {
            let d = v.cells[ci] - v.faces[f];
            acc += mesh.faces[f].length / c.distances[l] * d * d;
        }
    }
    acc.sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellNorms {
    pub l1: f64,
    pub l2: f64,
    pub mass: f64,
}

pub fn norms(mesh: &Mesh, v: &DofVector) -> CellNorms {
    let mut out = CellNorms { l1: 0.0, l2: 0.0, mass: 0.0 };
    for (c, &x) in mesh.cells.iter().zip(&v.cells) {
        out.l1 += c.area * x.abs();
        out.l2 += c.area * x * x;
        out.mass += c.area * x;
    }
    out.l2 = out.l2.sqrt();
    out
}

/// Σ_K |K| v_K
pub fn mass(mesh: &Mesh, v: &DofVector) -> f64 {
    mesh.cells.iter().zip(&v.cells).map(|(c, x)| c.area * x).sum()
}
