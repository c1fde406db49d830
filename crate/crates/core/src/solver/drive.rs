//! Stationary solves and backward-Euler time stepping for all schemes.

use crate::discretization::DofVector;
use crate::mesh::Mesh;
use crate::schemes::{AssembledSystem, LinearScheme, NonlinearMode, NonlinearScheme, ProblemData, SchemeConfig, SchemeError, SchemeKind, StepMode};

use super::{condense, newton_solve, CondensedSystem, Factorization, NewtonReport, SolverError};

/// Smallest admissible sub-step as a fraction of the macro step.
const MIN_STEP_FRACTION: f64 = 1.0 / (1u64 << 20) as f64;

#[derive(Clone, Debug)]
pub struct DriveOutput {
    pub final_state: DofVector,
    /// Accepted macro steps.
    pub steps: usize,
    /// Linear solves, including the Newton iterations of the nonlinear scheme.
    pub solves: usize,
    /// Sub-step halvings over the whole run.
    pub halvings: usize,
    /// One report per accepted nonlinear sub-step.
    pub newton: Vec<NewtonReport>,
}

/// What the observer sees after each accepted macro step.
#[derive(Clone, Copy, Debug)]
pub struct StepInfo<'a> {
    pub step: usize,
    pub time: f64,
    pub state: &'a DofVector,
    /// Cumulative linear solves.
    pub solves: usize,
}

/// Positive initial guess for a stationary nonlinear solve: the exponential-fitting solution
/// clamped from below.
fn nonlinear_guess(mesh: &Mesh, data: &ProblemData, config: &SchemeConfig) -> Result<DofVector, SchemeError> {
    let linear = LinearScheme::new(mesh, data, &config.with_scheme(SchemeKind::ExpFit))?
        .assemble(mesh, data, StepMode::Stationary)?
        .solve()?;
    let top = linear.cells.iter().chain(&linear.faces).fold(0.0f64, |a, v| a.max(*v));
    let floor = config.newton.epsilon.max(1e-6 * top);
    Ok(linear.map(|v| v.max(floor)))
}

/// Steady solution of the configured scheme; for the nonlinear scheme also the Newton report.
pub fn stationary_solve(
    mesh: &Mesh,
    data: &ProblemData,
    config: &SchemeConfig,
) -> Result<(DofVector, Option<NewtonReport>), SchemeError> {
    config.validate()?;
    if config.scheme.is_linear() {
        let u = LinearScheme::new(mesh, data, config)?.assemble(mesh, data, StepMode::Stationary)?.solve()?;
        return Ok((u, None));
    }
    let scheme = NonlinearScheme::new(mesh, data, config)?;
    let guess = nonlinear_guess(mesh, data, config)?;
    let mut problem = scheme.problem(mesh, NonlinearMode::Stationary);
    let (u, report) = newton_solve(&mut problem, guess.to_flat(), config.newton.tol, config.newton.max_iter)?;
    Ok((DofVector::from_flat(mesh, &u), Some(report)))
}

/// Runs from `initial` at t = 0 to the final time with macro step `config.dt`,
/// calling `observe` after every macro step. The last step is shortened to land on the final time.
pub fn transient_drive(
    mesh: &Mesh,
    data: &ProblemData,
    config: &SchemeConfig,
    initial: DofVector,
    mut observe: impl FnMut(StepInfo<'_>) -> Result<(), SchemeError>,
) -> Result<DriveOutput, SchemeError> {
    config.validate()?;
    let mut times = Vec::new();
    let mut t = 0.0;
    while t < config.final_time * (1.0 - 1e-12) {
        let next = (t + config.dt).min(config.final_time);
        let next = if config.final_time - next < 1e-9 * config.dt { config.final_time } else { next };
        times.push(next);
        t = next;
    }
    if config.scheme.is_linear() {
        drive_linear(mesh, data, config, initial, &times, &mut observe)
    } else {
        drive_nonlinear(mesh, data, config, initial, &times, &mut observe)
    }
}

/// Backward Euler with a fixed step: the condensed matrix is factored once.
struct LinearStepper {
    dt: f64,
    system: AssembledSystem,
    condensed: CondensedSystem,
    lu: Factorization,
}

impl LinearStepper {
    fn new(mesh: &Mesh, data: &ProblemData, scheme: &LinearScheme, dt: f64) -> Result<Self, SchemeError> {
        let zeros = vec![0.0; mesh.num_cells()];
        let system = scheme.assemble(mesh, data, StepMode::Transient { previous_cells: &zeros, dt })?;
        let condensed = condense(&system)?;
        let lu = Factorization::new(condensed.schur.clone())?;
        Ok(LinearStepper { dt, system, condensed, lu })
    }

    fn step(&self, mesh: &Mesh, previous: &[f64]) -> Result<DofVector, SolverError> {
        let rhs_cells: Vec<f64> = self
            .system
            .rhs_cells
            .iter()
            .zip(&mesh.cells)
            .zip(previous)
            .map(|((b, c), p)| b + c.area / self.dt * p)
            .collect();
        let (cells, faces) = self.condensed.solve(&self.lu, &rhs_cells, &self.system.rhs_faces)?;
        Ok(self.system.expand(cells, &faces))
    }
}

fn drive_linear(
    mesh: &Mesh,
    data: &ProblemData,
    config: &SchemeConfig,
    initial: DofVector,
    times: &[f64],
    observe: &mut impl FnMut(StepInfo<'_>) -> Result<(), SchemeError>,
) -> Result<DriveOutput, SchemeError> {
    let scheme = LinearScheme::new(mesh, data, config)?;
    let mut out = DriveOutput { final_state: initial, steps: 0, solves: 0, halvings: 0, newton: Vec::new() };
    let mut stepper: Option<LinearStepper> = None;
    let mut t = 0.0;
    for (n, &target) in times.iter().enumerate() {
        let dt = target - t;
        // the clipped last step needs its own factorization
        if stepper.as_ref().map_or(true, |s| (s.dt - dt).abs() > 1e-12 * dt) {
            stepper = Some(LinearStepper::new(mesh, data, &scheme, dt)?);
        }
        let next = stepper.as_ref().expect("stepper built above").step(mesh, &out.final_state.cells)?;
        out.solves += 1;
        out.steps = n + 1;
        out.final_state = next;
        t = target;
        observe(StepInfo { step: n + 1, time: t, state: &out.final_state, solves: out.solves })?;
    }
    Ok(out)
}

fn drive_nonlinear(
    mesh: &Mesh,
    data: &ProblemData,
    config: &SchemeConfig,
    initial: DofVector,
    times: &[f64],
    observe: &mut impl FnMut(StepInfo<'_>) -> Result<(), SchemeError>,
) -> Result<DriveOutput, SchemeError> {
    let scheme = NonlinearScheme::new(mesh, data, config)?;
    let min_dt = config.dt * MIN_STEP_FRACTION;
    let mut out = DriveOutput { final_state: initial, steps: 0, solves: 0, halvings: 0, newton: Vec::new() };
    let mut t = 0.0;
    let mut step = config.dt;
    let mut halvings_in_step = 0;
    for (n, &target) in times.iter().enumerate() {
        while t < target {
            let dt = step.min(target - t);
            let previous = out.final_state.cells.clone();
            let guess: Vec<f64> = out.final_state.to_flat().iter().map(|v| v.max(config.newton.epsilon)).collect();
            let mut problem = scheme.problem(mesh, NonlinearMode::Transient { previous_cells: &previous, dt });
            match newton_solve(&mut problem, guess, config.newton.tol, config.newton.max_iter) {
                Ok((u, mut report)) => {
                    out.solves += report.solves;
                    report.dt = dt;
                    report.halvings = halvings_in_step;
                    halvings_in_step = 0;
                    out.newton.push(report);
                    out.final_state = DofVector::from_flat(mesh, &u);
                    t = if target - (t + dt) <= 1e-12 * config.dt { target } else { t + dt };
                    step = (2.0 * dt).min(config.dt);
                }
                Err(SchemeError::Solver(_) | SchemeError::NonPositive { .. }) => {
                    out.halvings += 1;
                    halvings_in_step += 1;
                    step = 0.5 * dt;
                    if step < min_dt {
                        return Err(SolverError::TimeStepUnderflow { time: t, min_dt }.into());
                    }
                }
                Err(e) => return Err(e),
            }
        }
        out.steps = n + 1;
        observe(StepInfo { step: n + 1, time: t, state: &out.final_state, solves: out.solves })?;
    }
    Ok(out)
}
