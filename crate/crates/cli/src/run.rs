//! Command execution.

use std::path::{Path, PathBuf};

use hfv_core::discretization::{mass, norms, seminorm_h1, DofVector};
use hfv_core::experiments::{
    convergence_study, decay_rate, positivity_report, run_transient, state_statistics, ConvergenceRow, TestCase,
    TimeSeriesRecord, TransientRun,
};
use hfv_core::mesh::{generate, read_mesh, Mesh};
use hfv_core::solver::stationary_solve;

use crate::config::{Command, MeshSource, RunConfig};
use crate::output::{render_csv, write_atomic, Field};
use crate::vtk::export_vtk;
use crate::CliError;

/// Window of the local log-slopes in the decay fit.
pub const DECAY_WINDOW: usize = 20;

pub const STATIONARY_COLUMNS: [&str; 10] =
    ["cells", "faces", "meshsize", "l2_error", "h1_error", "min_cell", "min_face", "negatives", "mass", "newton_iterations"];

pub const TRANSIENT_COLUMNS: [&str; 7] =
    ["steps", "final_time", "solves", "halvings", "min_cell", "min_face", "negatives"];

pub const DECAY_COLUMNS: [&str; 4] = ["series", "rate", "plateau", "knee_time"];

type Series = (&'static str, fn(&TimeSeriesRecord) -> f64);

/// Executes `config` and returns the written files.
pub fn run(config: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(&config.output)
        .map_err(|source| CliError::Io { path: config.output.clone(), source })?;
    let mut out = Outputs { dir: &config.output, written: Vec::new() };
    match config.command {
        Command::Converge => converge(config, &mut out)?,
        Command::Stationary => stationary(config, &load_mesh(config)?, &mut out)?,
        Command::Transient | Command::Positivity => {
            let mesh = load_mesh(config)?;
            let run = transient(config, &mesh, &mut out)?;
            out.table("summary.csv", &TRANSIENT_COLUMNS, &[transient_summary(&run)])?;
        }
        Command::Longtime => {
            let mesh = load_mesh(config)?;
            let run = transient(config, &mesh, &mut out)?;
            out.table("summary.csv", &DECAY_COLUMNS, &decay_summary(&run.records))?;
        }
    }
    Ok(out.written)
}

struct Outputs<'a> {
    dir: &'a Path,
    written: Vec<PathBuf>,
}

impl Outputs<'_> {
    fn table(&mut self, name: &str, header: &[&str], rows: &[Vec<Field>]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        write_atomic(&path, &render_csv(header, rows)?)?;
        self.written.push(path);
        Ok(())
    }

    fn vtk(&mut self, mesh: &Mesh, step: usize, u: &DofVector) -> Result<(), CliError> {
        let path = self.dir.join(format!("solution_{step:04}.vtk"));
        export_vtk(mesh, u, &path)?;
        self.written.push(path);
        Ok(())
    }
}

fn load_mesh(config: &RunConfig) -> Result<Mesh, CliError> {
    let mesh = match &config.mesh {
        MeshSource::Generated { family, resolutions } => generate(*family, resolutions[0])?,
        MeshSource::File(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|source| CliError::MeshFile { path: path.clone(), source })?;
            read_mesh(&text)?
        }
    };
    Ok(config.case.prepare(mesh)?)
}

fn stationary(config: &RunConfig, mesh: &Mesh, out: &mut Outputs<'_>) -> Result<(), CliError> {
    let case = &config.case;
    let mut data = case.data.clone();
    if !mesh.has_dirichlet() {
        data.mass = Some(mass(mesh, &case.initial_state(mesh)));
    }
    let (u, report) = stationary_solve(mesh, &data, &config.scheme)?;
    let (l2, h1) = relative_errors(mesh, case, &u);
    let stats = state_statistics(&u);
    let row = vec![
        mesh.num_cells().into(),
        mesh.num_faces().into(),
        mesh.meshsize_tilde.into(),
        l2.into(),
        h1.into(),
        stats.min_cell.into(),
        stats.min_face.into(),
        stats.negatives.into(),
        mass(mesh, &u).into(),
        report.map(|r| r.iterations).into(),
    ];
    if config.vtk_every > 0 {
        out.vtk(mesh, 0, &u)?;
    }
    out.table("summary.csv", &STATIONARY_COLUMNS, &[row])
}

/// Relative L² and discrete H¹ errors against the exact stationary solution, when the case has one.
fn relative_errors(mesh: &Mesh, case: &TestCase, u: &DofVector) -> (Option<f64>, Option<f64>) {
    let Some(exact) = &case.steady else { return (None, None) };
    let reference = DofVector::interpolate(mesh, |p| exact(p) + case.offset);
    let diff = u.zip_map(&reference, |a, b| a - b);
    let shifted = reference.map(|v| v - case.offset);
    (
        Some(norms(mesh, &diff).l2 / norms(mesh, &shifted).l2),
        Some(seminorm_h1(mesh, &diff) / seminorm_h1(mesh, &shifted)),
    )
}

fn transient(config: &RunConfig, mesh: &Mesh, out: &mut Outputs<'_>) -> Result<TransientRun, CliError> {
    let every = config.vtk_every;
    let mut vtk_failure: Option<CliError> = None;
    let run = run_transient(mesh, &config.case, &config.scheme, |step, _, u| {
        if every > 0 && step % every == 0 && vtk_failure.is_none() {
            if let Err(e) = out.vtk(mesh, step, u) {
                vtk_failure = Some(e);
            }
        }
    })?;
    if let Some(e) = vtk_failure {
        return Err(e);
    }
    let rows: Vec<Vec<Field>> = run.records.iter().map(series_row).collect();
    out.table("series.csv", &TimeSeriesRecord::COLUMNS, &rows)?;
    Ok(run)
}

fn series_row(r: &TimeSeriesRecord) -> Vec<Field> {
    vec![
        r.step.into(),
        r.time.into(),
        r.entropy.into(),
        r.dissipation.into(),
        r.dist_l1_exact.into(),
        r.dist_l1_discrete.into(),
        r.dist_l2_exact.into(),
        r.min_cell.into(),
        r.min_face.into(),
        r.negatives.into(),
        r.solves.into(),
    ]
}

fn transient_summary(run: &TransientRun) -> Vec<Field> {
    let report = positivity_report(&run.records);
    let final_time = run.records.last().map_or(0.0, |r| r.time);
    vec![
        run.drive.steps.into(),
        final_time.into(),
        report.cost.into(),
        run.drive.halvings.into(),
        report.min_cell.into(),
        report.min_face.into(),
        report.negatives.into(),
    ]
}

/// One fitted row per distance series; fields stay empty when a series is too short to fit.
fn decay_summary(records: &[TimeSeriesRecord]) -> Vec<Vec<Field>> {
    let times: Vec<f64> = records.iter().map(|r| r.time).collect();
    let series: [Series; 3] = [
        ("dist_l1_exact", |r| r.dist_l1_exact),
        ("dist_l1_discrete", |r| r.dist_l1_discrete),
        ("entropy", |r| r.entropy),
    ];
    series
        .iter()
        .map(|(name, get)| {
            let values: Vec<f64> = records.iter().map(get).collect();
            let positive: Vec<f64> =
                times.iter().zip(&values).filter(|(_, v)| **v > 0.0).map(|(t, _)| *t).collect();
            match decay_rate(&times, &values, DECAY_WINDOW) {
                Ok(fit) => vec![
                    (*name).into(),
                    fit.rate.into(),
                    fit.plateau.into(),
                    fit.knee.map(|k| positive[k]).into(),
                ],
                Err(_) => vec![(*name).into(), Field::Missing, Field::Missing, Field::Missing],
            }
        })
        .collect()
}

fn converge(config: &RunConfig, out: &mut Outputs<'_>) -> Result<(), CliError> {
    let MeshSource::Generated { family, resolutions } = &config.mesh else {
        return Err(CliError::Config("converge needs a mesh family".into()));
    };
    let rows = convergence_study(&config.case, *family, resolutions, &config.scheme)?;
    let table: Vec<Vec<Field>> = rows.iter().map(convergence_row).collect();
    out.table("summary.csv", &ConvergenceRow::COLUMNS, &table)
}

fn convergence_row(r: &ConvergenceRow) -> Vec<Field> {
    vec![
        r.resolution.into(),
        r.cells.into(),
        r.meshsize.into(),
        r.l2_error.into(),
        r.h1_error.into(),
        r.eoc_l2.into(),
        r.eoc_h1.into(),
        r.newton_iterations.into(),
    ]
}
