//! Transient runs with per-step diagnostics, and mesh-refinement studies.

use crate::discretization::{mass, norms, seminorm_h1, DofVector};
use crate::mesh::{generate, Mesh, MeshFamily};
use crate::schemes::SchemeConfig;
use crate::solver::{stationary_solve, transient_drive, DriveOutput};

use super::analysis::{eoc, state_statistics, EntropyEvaluator, TimeSeriesRecord};
use super::{ExperimentError, TestCase};

#[derive(Clone, Debug)]
pub struct TransientRun {
    pub records: Vec<TimeSeriesRecord>,
    pub drive: DriveOutput,
    /// Stationary solution of the same scheme (same mass for pure Neumann problems).
    pub discrete_steady: DofVector,
}

/// Runs `case` on an already prepared mesh, recording diagnostics at every macro step.
/// `hook` sees each state, including the initial one.
pub fn run_transient(
    mesh: &Mesh,
    case: &TestCase,
    config: &SchemeConfig,
    mut hook: impl FnMut(usize, f64, &DofVector),
) -> Result<TransientRun, ExperimentError> {
    let initial = case.initial_state(mesh);
    let mut data = case.data.clone();
    if !mesh.has_dirichlet() {
        data.mass = Some(mass(mesh, &initial));
    }
    let (discrete_steady, _) = stationary_solve(mesh, &data, config)?;
    let exact_steady: Option<Vec<f64>> =
        case.steady.as_ref().map(|s| mesh.cells.iter().map(|c| s(c.center) + case.offset).collect());
    let evaluator = EntropyEvaluator::new(mesh, &data, config)?;

    let record = |step: usize, time: f64, u: &DofVector, solves: usize| -> Result<TimeSeriesRecord, ExperimentError> {
        let stats = state_statistics(u);
        let (mut l1, mut l2, mut l1d) = (f64::NAN, f64::NAN, 0.0);
        if let Some(ex) = &exact_steady {
            l1 = 0.0;
            l2 = 0.0;
            for ((c, v), e) in mesh.cells.iter().zip(&u.cells).zip(ex) {
                l1 += c.area * (v - e).abs();
                l2 += c.area * (v - e) * (v - e);
            }
            l2 = l2.sqrt();
        }
        for ((c, v), e) in mesh.cells.iter().zip(&u.cells).zip(&discrete_steady.cells) {
            l1d += c.area * (v - e).abs();
        }
        let dissipation = if step == 0 { f64::NAN } else { evaluator.dissipation(mesh, u, &discrete_steady)? };
        Ok(TimeSeriesRecord {
            step,
            time,
            entropy: evaluator.entropy(mesh, u, &discrete_steady)?,
            dissipation,
            dist_l1_exact: l1,
            dist_l1_discrete: l1d,
            dist_l2_exact: l2,
            min_cell: stats.min_cell,
            min_face: stats.min_face,
            negatives: stats.negatives,
            solves,
        })
    };

    hook(0, 0.0, &initial);
    let mut records = vec![record(0, 0.0, &initial, 0)?];
    let mut failure: Option<ExperimentError> = None;
    let drive = transient_drive(mesh, &data, config, initial, |info| {
        hook(info.step, info.time, info.state);
        match record(info.step, info.time, info.state, info.solves) {
            Ok(r) => records.push(r),
            Err(e) => failure = failure.take().or(Some(e)),
        }
        Ok(())
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(TransientRun { records, drive, discrete_steady })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub resolution: usize,
    pub cells: usize,
    /// max |K| / |∂K|
    pub meshsize: f64,
    /// ‖u_M - Π_M u‖ / ‖Π_M u‖
    pub l2_error: f64,
    /// |u_D - Π_D u|_{1,D} / |Π_D u|_{1,D}
    pub h1_error: f64,
    pub eoc_l2: Option<f64>,
    pub eoc_h1: Option<f64>,
    /// Newton iterations of the nonlinear scheme.
    pub newton_iterations: Option<usize>,
}

impl ConvergenceRow {
    pub const COLUMNS: [&'static str; 8] =
        ["resolution", "cells", "meshsize", "l2_error", "h1_error", "eoc_l2", "eoc_h1", "newton_iterations"];
}

/// Stationary errors against the exact solution of `case` on successive meshes of `family`.
pub fn convergence_study(
    case: &TestCase,
    family: MeshFamily,
    resolutions: &[usize],
    config: &SchemeConfig,
) -> Result<Vec<ConvergenceRow>, ExperimentError> {
    let exact = case
        .steady
        .as_ref()
        .ok_or_else(|| ExperimentError::Analysis(format!("case `{}` has no exact stationary solution", case.name)))?;
    let mut rows = Vec::with_capacity(resolutions.len());
    for &n in resolutions {
        let mesh = case.prepare(generate(family, n)?)?;
        let (u, report) = stationary_solve(&mesh, &case.data, config)?;
        let reference = DofVector::interpolate(&mesh, |p| exact(p));
        let diff = u.zip_map(&reference, |a, b| a - case.offset - b);
        rows.push(ConvergenceRow {
            resolution: n,
            cells: mesh.num_cells(),
            meshsize: mesh.meshsize_tilde,
            l2_error: norms(&mesh, &diff).l2 / norms(&mesh, &reference).l2,
            h1_error: seminorm_h1(&mesh, &diff) / seminorm_h1(&mesh, &reference),
            eoc_l2: None,
            eoc_h1: None,
            newton_iterations: report.map(|r| r.iterations),
        });
    }
    let sizes: Vec<f64> = rows.iter().map(|r| r.meshsize).collect();
    let l2 = eoc(&rows.iter().map(|r| r.l2_error).collect::<Vec<_>>(), &sizes);
    let h1 = eoc(&rows.iter().map(|r| r.h1_error).collect::<Vec<_>>(), &sizes);
    for (row, (a, b)) in rows.iter_mut().zip(l2.into_iter().zip(h1)) {
        row.eoc_l2 = a;
        row.eoc_h1 = b;
    }
    Ok(rows)
}
