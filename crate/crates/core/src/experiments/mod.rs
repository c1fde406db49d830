//! The four benchmark problems with their exact solutions, plus analysis and run drivers.

mod analysis;
mod runs;

pub use analysis::{
    decay_rate, entropy_dissipation, eoc, phi1, positivity_report, state_statistics, DecayFit, EntropyEvaluator,
    PositivityReport, StateStatistics, TimeSeriesRecord,
};
pub use runs::{convergence_study, run_transient, ConvergenceRow, TransientRun};

use std::f64::consts::PI;
use std::sync::Arc;

use thiserror::Error;

use crate::discretization::DofVector;
use crate::geometry::{SymMat2, Vec2};
use crate::mesh::{Mesh, MeshError, Region};
use crate::schemes::{ProblemData, ScalarField, SchemeError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("{0}")]
    Analysis(String),
}

/// u(t, x); stationary solutions ignore t.
pub type ExactField = Arc<dyn Fn(f64, Vec2) -> f64 + Send + Sync>;

/// How the initial cell values are obtained from u^in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialSampling {
    /// Point values at cell centers.
    Points,
    /// Cell averages by 16-subtriangle midpoint quadrature on each pyramid.
    Averages,
}

#[derive(Clone)]
pub struct TestCase {
    pub name: &'static str,
    pub data: ProblemData,
    pub exact: Option<ExactField>,
    pub steady: Option<ScalarField>,
    pub sampling: InitialSampling,
    /// Rescale the initial cells to the discrete mass of the interpolated steady state.
    pub match_steady_mass: bool,
    /// Constant added to the exact solution to keep it positive.
    pub offset: f64,
}

impl std::fmt::Debug for TestCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestCase").field("name", &self.name).field("offset", &self.offset).finish_non_exhaustive()
    }
}

impl TestCase {
    /// Applies this case's Dirichlet partition to a mesh.
    pub fn prepare(&self, mesh: Mesh) -> Result<Mesh, MeshError> {
        mesh.tag_boundary(&self.data.dirichlet_regions)
    }

    pub fn initial_state(&self, mesh: &Mesh) -> DofVector {
        let f = &self.data.initial;
        let mut u = DofVector::interpolate(mesh, |p| f(p));
        if self.sampling == InitialSampling::Averages {
            u.cells = cell_averages(mesh, &**f);
        }
        if let (true, Some(steady)) = (self.match_steady_mass, &self.steady) {
            let target: f64 = mesh.cells.iter().map(|c| c.area * steady(c.center)).sum();
            let current: f64 = mesh.cells.iter().zip(&u.cells).map(|(c, v)| c.area * v).sum();
            let scale = target / current;
            u = u.map(|v| v * scale);
        }
        u
    }

    /// Interpolate of the exact stationary solution, including the offset.
    pub fn steady_interpolate(&self, mesh: &Mesh) -> Option<DofVector> {
        let s = self.steady.as_ref()?;
        Some(DofVector::interpolate(mesh, |p| s(p) + self.offset))
    }
}

/// Averages of `f` over each cell with 16 subtriangles per pyramid.
pub fn cell_averages(mesh: &Mesh, f: &dyn Fn(Vec2) -> f64) -> Vec<f64> {
    const SPLIT: usize = 4;
    (0..mesh.num_cells())
        .map(|k| {
            let cell = &mesh.cells[k];
            let mut acc = 0.0;
            for l in 0..cell.num_faces() {
                let [p, a, b] = mesh.pyramid(k, l);
                let area = mesh.pyramid_area(k, l) / (SPLIT * SPLIT) as f64;
                let (ea, eb) = ((a - p) * (1.0 / SPLIT as f64), (b - p) * (1.0 / SPLIT as f64));
                for i in 0..SPLIT {
                    for j in 0..SPLIT - i {
                        let o = p + ea * i as f64 + eb * j as f64;
                        acc += area * f(o + (ea + eb) * (1.0 / 3.0));
                        if i + j + 1 < SPLIT {
                            acc += area * f(o + (ea + eb) * (2.0 / 3.0));
                        }
                    }
                }
            }
            acc / cell.area
        })
        .collect()
}

pub const LONGTIME_DIFFUSION_X: f64 = 1e-2;
pub const LONGTIME_AMPLITUDE: f64 = 0.1;

/// Decay rate l_x (1/4 + π²) of the long-time test.
pub fn longtime_alpha() -> f64 {
    LONGTIME_DIFFUSION_X * (0.25 + PI * PI)
}

fn longtime_steady(p: Vec2) -> f64 {
    2.0 * LONGTIME_AMPLITUDE * PI * (p.x - 0.5).exp()
}

fn longtime_exact(t: f64, p: Vec2) -> f64 {
    let c = LONGTIME_AMPLITUDE;
    c * (-longtime_alpha() * t + 0.5 * p.x).exp() * (2.0 * PI * (PI * p.x).cos() + (PI * p.x).sin())
        + longtime_steady(p)
}

fn longtime_data() -> ProblemData {
    let mut data = ProblemData::new(Arc::new(|_| SymMat2::diag(LONGTIME_DIFFUSION_X, 1.0)))
        .with_potential(Arc::new(|p: Vec2| -p.x), Some(Arc::new(|_| Vec2::new(-1.0, 0.0))));
    data.initial = Arc::new(|p| longtime_exact(0.0, p));
    data
}

/// Anisotropic drift toward x = 1, pure Neumann; a single mode decays at rate α.
pub fn case_longtime() -> TestCase {
    let mut data = longtime_data();
    // ∫ u^∞ over the unit square
    data.mass = Some(2.0 * LONGTIME_AMPLITUDE * PI * (-0.5f64).exp() * (1.0f64.exp() - 1.0));
    TestCase {
        name: "longtime",
        data,
        exact: Some(Arc::new(longtime_exact)),
        steady: Some(Arc::new(longtime_steady)),
        sampling: InitialSampling::Points,
        match_steady_mass: true,
        offset: 0.0,
    }
}

/// Long-time data with Dirichlet sides x = 0, 1 carrying the thermal state ρ^D e^{-φ}.
pub fn case_mixed() -> TestCase {
    let mut data = longtime_data();
    data.dirichlet = Arc::new(longtime_steady);
    data.dirichlet_regions = vec![Region::vertical_line(0.0), Region::vertical_line(1.0)];
    TestCase {
        name: "mixed",
        data,
        exact: None,
        steady: Some(Arc::new(longtime_steady)),
        sampling: InitialSampling::Points,
        match_steady_mass: false,
        offset: 0.0,
    }
}

/// ρ^D of the mixed case: u^∞ = ρ^D e^{-φ}.
pub fn mixed_rho() -> f64 {
    2.0 * LONGTIME_AMPLITUDE * PI * (-0.5f64).exp()
}

const BALL_CENTER: Vec2 = Vec2 { x: 0.5, y: 0.5 };
const BALL_RADIUS: f64 = 0.2;
const BALL_VALUE: f64 = 1e-3;

fn positivity_potential(p: Vec2) -> f64 {
    -((p.x - 0.4).powi(2) + (p.y - 0.6).powi(2))
}

/// Composite Simpson rule on [lo, hi].
fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (hi - lo) / n as f64;
    let inner: f64 = (1..n).map(|i| f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    h / 3.0 * (f(lo) + f(hi) + inner)
}

/// Initial datum with a low-density ball; its mass is known from the ball area.
pub fn case_positivity() -> TestCase {
    let mut data = ProblemData::new(Arc::new(|_| SymMat2::diag(0.8, 1.0))).with_potential(
        Arc::new(positivity_potential),
        Some(Arc::new(|p: Vec2| Vec2::new(-2.0 * (p.x - 0.4), -2.0 * (p.y - 0.6)))),
    );
    data.initial =
        Arc::new(|p: Vec2| if (p - BALL_CENTER).norm() <= BALL_RADIUS { BALL_VALUE } else { 1.0 });
    let mass = 1.0 - (1.0 - BALL_VALUE) * PI * BALL_RADIUS * BALL_RADIUS;
    data.mass = Some(mass);
    // ∫ e^{-φ} factorizes; both one-dimensional factors coincide
    let factor = simpson(|s| ((s - 0.4) * (s - 0.4)).exp(), 0.0, 1.0, 4000);
    let rho = mass / (factor * factor);
    TestCase {
        name: "positivity",
        data,
        exact: None,
        steady: Some(Arc::new(move |p| rho * (-positivity_potential(p)).exp())),
        sampling: InitialSampling::Averages,
        match_steady_mass: false,
        offset: 0.0,
    }
}

fn accuracy1_exact(p: Vec2) -> f64 {
    (p.x - (2.0 * (p.x - 1.0)).exp()) * (p.y - (3.0 * (p.y - 1.0)).exp())
}

fn accuracy1_source(p: Vec2) -> f64 {
    let ex = (2.0 * (p.x - 1.0)).exp();
    let ey = (3.0 * (p.y - 1.0)).exp();
    let (x, dx, ddx) = (p.x - ex, 1.0 - 2.0 * ex, -4.0 * ex);
    let (y, dy, ddy) = (p.y - ey, 1.0 - 3.0 * ey, -9.0 * ey);
    -(ddx * y + x * ddy) + 2.0 * dx * y + 3.0 * x * dy
}

/// Smooth solution with a boundary layer, Dirichlet everywhere, linear potential.
pub fn case_accuracy1() -> TestCase {
    case_accuracy1_shifted(0.0)
}

/// Accuracy test 1 for u + offset; the source is unchanged because the potential is harmonic.
pub fn case_accuracy1_shifted(offset: f64) -> TestCase {
    let mut data = ProblemData::new(Arc::new(|_| SymMat2::IDENTITY)).with_potential(
        Arc::new(|p: Vec2| -(2.0 * p.x + 3.0 * p.y)),
        Some(Arc::new(|_| Vec2::new(-2.0, -3.0))),
    );
    data.source = Arc::new(accuracy1_source);
    data.dirichlet = Arc::new(move |p| accuracy1_exact(p) + offset);
    data.dirichlet_regions = vec![Region::everywhere()];
    TestCase {
        name: "accuracy1",
        data,
        exact: Some(Arc::new(|_, p| accuracy1_exact(p))),
        steady: Some(Arc::new(accuracy1_exact)),
        sampling: InitialSampling::Points,
        match_steady_mass: false,
        offset,
    }
}

pub const ACCURACY2_DIFFUSION_Y: f64 = 100.0;
pub const ACCURACY2_SPEED: f64 = 200.0;

fn accuracy2_exact(p: Vec2) -> f64 {
    let v = ACCURACY2_SPEED;
    v / (1.0 + v * p.x) * ((2.0 * v * p.x / (2.0 + v)) * (1.0 / v + 0.5 * p.x) + 1.0 / v)
}

/// Advection-dominated one-dimensional profile on an anisotropic medium.
pub fn case_accuracy2() -> TestCase {
    let v = ACCURACY2_SPEED;
    let mut data = ProblemData::new(Arc::new(|_| SymMat2::diag(1.0, ACCURACY2_DIFFUSION_Y))).with_potential(
        Arc::new(move |p: Vec2| (1.0 / v + p.x).ln()),
        Some(Arc::new(move |p: Vec2| Vec2::new(v / (1.0 + v * p.x), 0.0))),
    );
    data.dirichlet = Arc::new(|_| 1.0);
    data.dirichlet_regions = vec![Region::vertical_line(0.0), Region::vertical_line(1.0)];
    TestCase {
        name: "accuracy2",
        data,
        exact: Some(Arc::new(|_, p| accuracy2_exact(p))),
        steady: Some(Arc::new(accuracy2_exact)),
        sampling: InitialSampling::Points,
        match_steady_mass: false,
        offset: 0.0,
    }
}

/// Looks a case up by name.
pub fn case_by_name(name: &str) -> Option<TestCase> {
    match name {
        "longtime" => Some(case_longtime()),
        "mixed" => Some(case_mixed()),
        "positivity" => Some(case_positivity()),
        "accuracy1" => Some(case_accuracy1()),
        "accuracy2" => Some(case_accuracy2()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::cartesian;

    /// -div(Λ(∇u + u∇φ)) by nested central differences.
    fn pde_residual(data: &ProblemData, u: &dyn Fn(Vec2) -> f64, p: Vec2) -> (f64, f64) {
        let h = 1e-4;
        let flux = |q: Vec2| {
            let g = Vec2::new(
                (u(q + Vec2::new(h, 0.0)) - u(q - Vec2::new(h, 0.0))) / (2.0 * h),
                (u(q + Vec2::new(0.0, h)) - u(q - Vec2::new(0.0, h))) / (2.0 * h),
            );
            (data.diffusion)(q).apply(g + data.potential_gradient_at(q, h) * u(q))
        };
        let div = (flux(p + Vec2::new(h, 0.0)).x - flux(p - Vec2::new(h, 0.0)).x) / (2.0 * h)
            + (flux(p + Vec2::new(0.0, h)).y - flux(p - Vec2::new(0.0, h)).y) / (2.0 * h);
        let scale = flux(p).norm() + (data.source)(p).abs() + 1.0;
        (-div - (data.source)(p), scale)
    }

    fn interior_points() -> Vec<Vec2> {
        (0..20).map(|i| Vec2::new(0.1 + 0.04 * i as f64, 0.85 - 0.035 * i as f64)).collect()
    }

    #[test]
    fn longtime_constants() {
        assert!((longtime_alpha() - 0.101_196_044).abs() < 1e-8);
        let c = case_longtime();
        for y in [0.0, 0.3, 1.0] {
            assert!((c.data.initial)(Vec2::new(1.0, y)).abs() < 1e-14);
        }
        assert!((longtime_steady(Vec2::new(0.5, 0.2)) - 0.628_318_530_717_958_6).abs() < 1e-15);
        // mass of the steady state equals the mass of the initial datum
        let m = simpson(|x| longtime_exact(0.0, Vec2::new(x, 0.0)), 0.0, 1.0, 4000);
        assert!((m - c.data.mass.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn longtime_exact_solves_the_equation() {
        let c = case_longtime();
        for p in interior_points() {
            for t in [0.0, 3.0] {
                let dt = 1e-5;
                let ut = (longtime_exact(t + dt, p) - longtime_exact(t - dt, p)) / (2.0 * dt);
                let (r, scale) = pde_residual(&c.data, &|q| longtime_exact(t, q), p);
                assert!((ut + r).abs() <= 1e-5 * scale);
            }
        }
        // zero normal flux on x = 0 and x = 1
        for x in [0.0, 1.0] {
            let h = 1e-6;
            let p = Vec2::new(x, 0.3);
            let ux = (longtime_exact(1.0, p + Vec2::new(h, 0.0)) - longtime_exact(1.0, p - Vec2::new(h, 0.0))) / (2.0 * h);
            assert!((ux - longtime_exact(1.0, p)).abs() < 1e-7);
        }
    }

    #[test]
    fn positivity_data() {
        let c = case_positivity();
        assert_eq!((c.data.initial)(Vec2::new(0.5, 0.5)), 1e-3);
        assert_eq!((c.data.initial)(Vec2::ZERO), 1.0);
        assert!((c.data.mass.unwrap() - 0.874_461_957_562_552).abs() < 1e-12);
        let steady = c.steady.unwrap();
        let total = simpson(|x| simpson(|y| steady(Vec2::new(x, y)), 0.0, 1.0, 400), 0.0, 1.0, 400);
        assert!((total - c.data.mass.unwrap()).abs() < 1e-10);
    }

    #[test]
    fn cell_averages_integrate_polynomials() {
        let m = crate::mesh::kershaw(3, 0.5).unwrap();
        let avg = cell_averages(&m, &|p| 2.0 + p.x - 3.0 * p.y);
        let total: f64 = m.cells.iter().zip(&avg).map(|(c, a)| c.area * a).sum();
        assert!((total - (2.0 + 0.5 - 1.5)).abs() < 1e-13);
        // ball indicator converges to the exact area
        let fine = cartesian(64).unwrap();
        let ind = cell_averages(&fine, &|p| if (p - BALL_CENTER).norm() <= BALL_RADIUS { 1.0 } else { 0.0 });
        let area: f64 = fine.cells.iter().zip(&ind).map(|(c, a)| c.area * a).sum();
        assert!((area - PI * 0.04).abs() < 2e-4);
    }

    #[test]
    fn accuracy1_data() {
        let c = case_accuracy1();
        assert_eq!(accuracy1_exact(Vec2::new(1.0, 1.0)), 0.0);
        for y in [0.0, 0.4, 0.9] {
            assert_eq!(accuracy1_exact(Vec2::new(1.0, y)), 0.0);
        }
        let (r, scale) = pde_residual(&c.data, &accuracy1_exact, Vec2::new(0.5, 0.5));
        assert!(r.abs() < 1e-6 * scale);
        for p in interior_points() {
            let (r, scale) = pde_residual(&c.data, &accuracy1_exact, p);
            assert!(r.abs() <= 1e-5 * scale);
        }
        let shifted = case_accuracy1_shifted(1.0);
        for p in interior_points() {
            let (r, scale) = pde_residual(&shifted.data, &|q| accuracy1_exact(q) + 1.0, p);
            assert!(r.abs() <= 1e-5 * scale);
        }
    }

    #[test]
    fn accuracy2_data() {
        let c = case_accuracy2();
        for y in [0.0, 0.5] {
            assert!((accuracy2_exact(Vec2::new(0.0, y)) - 1.0).abs() < 1e-15);
            assert!((accuracy2_exact(Vec2::new(1.0, y)) - 1.0).abs() < 1e-14);
        }
        // div V = v²/(1 + v x)² with Λ_xx = 1
        let h = 1e-7;
        let vx = |x: f64| c.data.advection(Vec2::new(x, 0.5), h).x;
        let div = (vx(h) - vx(0.0)) / h;
        assert!((div / 40000.0 - 1.0).abs() < 1e-3);
        for p in interior_points() {
            let (r, scale) = pde_residual(&c.data, &accuracy2_exact, p);
            assert!(r.abs() <= 1e-5 * scale, "{p:?}");
        }
    }

    #[test]
    fn mixed_boundary_values_are_thermal() {
        let c = case_mixed();
        for x in [0.0, 1.0] {
            let p = Vec2::new(x, 0.7);
            let thermal = mixed_rho() * c.data.omega(p);
            assert!(((c.data.dirichlet)(p) - thermal).abs() < 1e-14);
        }
        let m = c.prepare(cartesian(4).unwrap()).unwrap();
        assert!(m.has_dirichlet());
    }

    #[test]
    fn initial_mass_matching() {
        let c = case_longtime();
        let m = crate::mesh::kershaw(8, 0.6).unwrap();
        let u = c.initial_state(&m);
        let steady = c.steady_interpolate(&m).unwrap();
        let a: f64 = m.cells.iter().zip(&u.cells).map(|(k, v)| k.area * v).sum();
        let b: f64 = m.cells.iter().zip(&steady.cells).map(|(k, v)| k.area * v).sum();
        assert!((a - b).abs() < 1e-14);
    }
}
