//! Damped Newton iteration keeping iterates admissible (strictly positive by default).

use super::SolverError;

/// Maximum number of step halvings used to stay admissible.
pub const MAX_BACKTRACKS: usize = 30;

/// Below this initial residual the guess is accepted as is.
pub const ABSOLUTE_FLOOR: f64 = 1e-14;

pub trait NewtonProblem {
    type Error: From<SolverError>;

    /// Residual together with a roundoff floor: after at least one iteration, the
    /// solve stops once the residual falls below it, since no further digits can be gained.
    fn residual(&mut self, u: &[f64]) -> Result<(Vec<f64>, f64), Self::Error>;

    /// Solves J(u) x = rhs.
    fn solve_linearized(&mut self, u: &[f64], rhs: &[f64]) -> Result<Vec<f64>, Self::Error>;

    fn admissible(&self, u: &[f64]) -> bool {
        u.iter().all(|&v| v > 0.0)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct NewtonReport {
    pub iterations: usize,
    /// ‖G(u)‖∞ / ‖G(u⁰)‖∞ at exit.
    pub relative_residual: f64,
    /// Time step actually used (set by the transient driver).
    pub dt: f64,
    /// Time-step halvings needed before this solve succeeded.
    pub halvings: usize,
    /// Linear solves performed.
    pub solves: usize,
    /// ‖G‖∞ after each iteration, starting with the initial guess.
    pub history: Vec<f64>,
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn newton_solve<P: NewtonProblem>(
    problem: &mut P,
    init: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, NewtonReport), P::Error> {
    if !problem.admissible(&init) {
        return Err(SolverError::InadmissibleIterate.into());
    }
    let mut u = init;
    let (mut g, _) = problem.residual(&u)?;
    let r0 = norm_inf(&g);
    let mut report = NewtonReport { history: vec![r0], relative_residual: 1.0, ..Default::default() };
    if r0 < ABSOLUTE_FLOOR {
        report.relative_residual = 0.0;
        return Ok((u, report));
    }
    for it in 1..=max_iter {
        let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
        let step = problem.solve_linearized(&u, &rhs)?;
        report.solves += 1;
        let mut scale = 1.0;
        let mut candidate: Vec<f64> = u.iter().zip(&step).map(|(a, d)| a + d).collect();
        let mut backtracks = 0;
        while !problem.admissible(&candidate) {
            backtracks += 1;
            if backtracks > MAX_BACKTRACKS {
                return Err(SolverError::InadmissibleIterate.into());
            }
            scale *= 0.5;
            candidate = u.iter().zip(&step).map(|(a, d)| a + scale * d).collect();
        }
        u = candidate;
        let floor;
        (g, floor) = problem.residual(&u)?;
        let r = norm_inf(&g);
        report.history.push(r);
        report.iterations = it;
        report.relative_residual = r / r0;
        if !r.is_finite() {
            break;
        }
        if r / r0 <= tol || r <= floor {
            return Ok((u, report));
        }
    }
    Err(SolverError::NoConvergence { iterations: report.iterations, residual: report.relative_residual }.into())
}
