//! Acceptance criteria. Each criterion prints one PASS/FAIL line followed by its
//! measurements; the process fails if any criterion fails.
//!
//! `cargo test --test acceptance -- 3 4` runs only criteria 3 and 4.

use std::error::Error;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hfv_core::discretization::{local_diffusion_matrix, mass, DofVector};
use hfv_core::experiments::{
    case_accuracy1, case_accuracy1_shifted, case_accuracy2, case_longtime, case_mixed, case_positivity,
    convergence_study, decay_rate, longtime_alpha, mixed_rho, positivity_report, run_transient, ConvergenceRow,
    TestCase, TimeSeriesRecord,
};
use hfv_core::geometry::{SymMat2, Vec2};
use hfv_core::mesh::{cartesian, generate, kershaw, tilted_hexagonal, triangular, Mesh, MeshFamily};
use hfv_core::schemes::{
    flux_a, Aggregate, FluxKind, LinearScheme, MeanKind, NonlinearMode, NonlinearScheme, SchemeConfig, SchemeKind,
    StepMode,
};
use hfv_core::solver::{stationary_solve, transient_drive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Res = Result<(), Box<dyn Error>>;

const KERSHAW_DISTORTION: f64 = 0.4;
const HEX_TILT: f64 = 0.3;
const ALL_SCHEMES: [SchemeKind; 4] =
    [SchemeKind::Hmm, SchemeKind::ExpFit, SchemeKind::ExpFitHarmonic, SchemeKind::Nonlinear];

#[derive(Default)]
struct Report {
    checks: Vec<(bool, String)>,
}

impl Report {
    fn check(&mut self, ok: bool, what: String) {
        self.checks.push((ok, what));
    }

    fn passed(&self) -> bool {
        self.checks.iter().all(|(ok, _)| *ok)
    }
}

struct Criterion {
    id: usize,
    name: &'static str,
    limit: Duration,
    run: fn(&mut Report) -> Res,
}

fn config(kind: SchemeKind) -> SchemeConfig {
    SchemeConfig::default().with_scheme(kind)
}

fn transient(kind: SchemeKind, dt: f64, final_time: f64) -> SchemeConfig {
    SchemeConfig { dt, final_time, ..config(kind) }
}

fn longtime_mesh(n: usize) -> Result<(TestCase, Mesh), Box<dyn Error>> {
    let case = case_longtime();
    let mesh = case.prepare(kershaw(n, KERSHAW_DISTORTION)?)?;
    Ok((case, mesh))
}

fn finest_eocs(rows: &[ConvergenceRow]) -> (f64, f64) {
    let last = rows.last().expect("at least two levels");
    (last.eoc_l2.unwrap_or(f64::NAN), last.eoc_h1.unwrap_or(f64::NAN))
}

fn entropy_increases(records: &[TimeSeriesRecord]) -> usize {
    records.windows(2).filter(|w| !(w[1].entropy <= w[0].entropy)).count()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn accuracy_smooth(r: &mut Report) -> Res {
    let levels = [4, 8, 16, 32, 64];
    let mut l2_errors = Vec::new();
    for kind in ALL_SCHEMES {
        // the exact solution dips below zero near two sides; the positivity-preserving
        // scheme solves for u + 1, which has the same source since the potential is linear
        let case = if kind == SchemeKind::Nonlinear { case_accuracy1_shifted(1.0) } else { case_accuracy1() };
        let rows = convergence_study(&case, MeshFamily::Triangular, &levels, &config(kind))?;
        let (l2, h1) = finest_eocs(&rows);
        r.check((1.7..=2.3).contains(&l2), format!("{} L2 EOC {l2:.3} in [1.7, 2.3]", kind.name()));
        r.check((0.8..=1.2).contains(&h1), format!("{} H1 EOC {h1:.3} in [0.8, 1.2]", kind.name()));
        l2_errors.push((kind, rows.iter().map(|row| row.l2_error).collect::<Vec<_>>()));
    }
    let hmm = &l2_errors[0].1;
    let nonlinear = &l2_errors[3].1;
    for (i, (a, b)) in nonlinear.iter().zip(hmm).enumerate() {
        let ratio = a / b;
        r.check(
            (1.0 / 3.0..=3.0).contains(&ratio),
            format!("level {} nonlinear/hmm L2 error ratio {ratio:.3} within a factor 3", levels[i]),
        );
    }
    Ok(())
}

fn accuracy_advection_dominated(r: &mut Report) -> Res {
    let levels = [8, 16, 32, 64, 128];
    let case = case_accuracy2();
    let mut finest = Vec::new();
    for kind in ALL_SCHEMES {
        let rows = convergence_study(&case, MeshFamily::Cartesian, &levels, &config(kind))?;
        let (l2, h1) = finest_eocs(&rows);
        if kind == SchemeKind::Hmm {
            r.check(l2 < 2.0, format!("hmm L2 EOC {l2:.3} < 2"));
            r.check(h1 < 1.0, format!("hmm H1 EOC {h1:.3} < 1"));
        } else {
            r.check(l2 >= 1.7, format!("{} L2 EOC {l2:.3} >= 1.7", kind.name()));
            r.check(h1 >= 0.8, format!("{} H1 EOC {h1:.3} >= 0.8", kind.name()));
        }
        finest.push(rows.last().map_or(f64::NAN, |row| row.l2_error));
    }
    let (standard, harmonic) = (finest[1], finest[2]);
    r.check(
        harmonic <= standard / 3.0,
        format!("harmonic L2 {harmonic:.3e} <= standard L2 {standard:.3e} / 3 (gain {:.1})", standard / harmonic),
    );
    Ok(())
}

fn long_time_decay(r: &mut Report) -> Res {
    let (case, mesh) = longtime_mesh(16)?;
    let alpha = longtime_alpha();
    for kind in ALL_SCHEMES {
        let run = run_transient(&mesh, &case, &transient(kind, 0.1, 350.0), |_, _, _| {})?;
        let times: Vec<f64> = run.records.iter().map(|rec| rec.time).collect();
        let exact: Vec<f64> = run.records.iter().map(|rec| rec.dist_l1_exact).collect();
        let discrete: Vec<f64> = run.records.iter().map(|rec| rec.dist_l1_discrete).collect();
        let fit = decay_rate(&times, &exact, 20)?;
        let plateau = fit.plateau.unwrap_or(exact[exact.len() - 1]);
        let name = kind.name();
        r.check(
            (fit.rate - alpha).abs() <= 0.1 * alpha,
            format!("{name} rate {:.5} within 10% of {alpha:.7}", fit.rate),
        );
        if kind == SchemeKind::Hmm {
            let fit_discrete = decay_rate(&times, &discrete, 20)?;
            let discrete_plateau = fit_discrete.plateau.unwrap_or(discrete[discrete.len() - 1]);
            r.check((1e-8..=1e-4).contains(&plateau), format!("hmm plateau {plateau:.2e} in [1e-8, 1e-4]"));
            r.check(
                discrete_plateau < 1e-10,
                format!("hmm plateau w.r.t. discrete steady state {discrete_plateau:.2e} < 1e-10"),
            );
        } else {
            r.check(plateau < 1e-10, format!("{name} plateau {plateau:.2e} < 1e-10"));
        }
    }
    Ok(())
}

fn positivity(r: &mut Report) -> Res {
    let case = case_positivity();
    let mesh = case.prepare(tilted_hexagonal(60, HEX_TILT)?)?;
    r.check(true, format!("{} cells, {} faces", mesh.num_cells(), mesh.num_faces()));
    let mut costs = Vec::new();
    for kind in ALL_SCHEMES {
        let run = run_transient(&mesh, &case, &transient(kind, 1e-5, 5e-4), |_, _, _| {})?;
        let rep = positivity_report(&run.records[1..]);
        let name = kind.name();
        let minimum = rep.min_cell.min(rep.min_face);
        if kind == SchemeKind::Nonlinear {
            r.check(rep.negatives == 0, format!("nonlinear negative unknowns {} == 0", rep.negatives));
            r.check(minimum > 0.0, format!("nonlinear min over all unknowns {minimum:.3e} > 0"));
            r.check(run.drive.halvings == 0, format!("nonlinear time-step halvings {}", run.drive.halvings));
        } else {
            r.check(
                rep.negatives >= 1,
                format!("{name} negative unknowns {} >= 1 (min cell {:.2e}, min face {:.2e})", rep.negatives, rep.min_cell, rep.min_face),
            );
        }
        costs.push(rep.cost as f64);
    }
    let ratio = costs[3] / costs[0];
    r.check((2.0..=6.0).contains(&ratio), format!("cost nonlinear/linear {}/{} = {ratio:.2} in [2, 6]", costs[3], costs[0]));
    Ok(())
}

/// Gaussian elimination with partial pivoting.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, p);
        b.swap(col, p);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[row][c] -= f * a[col][c];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

fn structure_preservation(r: &mut Report) -> Res {
    let (case, mesh) = longtime_mesh(8)?;
    let data = &case.data;
    let initial = case.initial_state(&mesh);

    // (a) mass conservation
    let m0 = mass(&mesh, &initial);
    for kind in ALL_SCHEMES {
        let mut drift: f64 = 0.0;
        let cfg = transient(kind, 0.5, 5.0);
        transient_drive(&mesh, data, &cfg, initial.clone(), |info| {
            drift = drift.max((mass(&mesh, info.state) - m0).abs() / m0);
            Ok(())
        })?;
        let tol = if kind.is_linear() { 1e-12 } else { cfg.newton.tol };
        r.check(drift <= tol, format!("(a) {} relative mass drift {drift:.1e} <= {tol:.0e}", kind.name()));
    }

    // (b) entropy decay, before the entropy reaches roundoff
    for kind in ALL_SCHEMES {
        let run = run_transient(&mesh, &case, &transient(kind, 0.1, 50.0), |_, _, _| {})?;
        let ups = entropy_increases(&run.records);
        r.check(ups == 0, format!("(b) {} entropy increases over {} steps: {ups}", kind.name(), run.records.len() - 1));
    }

    // (c) thermal equilibrium
    let thermal = case.steady_interpolate(&mesh).ok_or("longtime case has a steady state")?;
    let mut thermal_data = data.clone();
    thermal_data.mass = Some(mass(&mesh, &thermal));
    let scale = max_abs(&thermal.to_flat());
    for kind in [SchemeKind::ExpFit, SchemeKind::ExpFitHarmonic, SchemeKind::Nonlinear] {
        let (steady, _) = stationary_solve(&mesh, &thermal_data, &config(kind))?;
        let e1 = steady.max_abs_diff(&thermal) / scale;
        let out = transient_drive(&mesh, data, &transient(kind, 0.1, 0.1), thermal.clone(), |_| Ok(()))?;
        let e2 = out.final_state.max_abs_diff(&thermal) / scale;
        r.check(e1 <= 1e-11, format!("(c) {} stationary distance to thermal state {e1:.1e} <= 1e-11", kind.name()));
        r.check(e2 <= 1e-11, format!("(c) {} one step from thermal state moves {e2:.1e} <= 1e-11", kind.name()));
    }

    // (d) flux function identities
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for kind in [FluxKind::Centred, FluxKind::Upwind, FluxKind::ScharfetterGummel] {
        let mut worst_odd: f64 = 0.0;
        let mut worst_even: f64 = 0.0;
        for i in 0..1000 {
            let s: f64 = if i % 3 == 0 { rng.gen_range(-1e-4..1e-4) } else { rng.gen_range(-60.0..60.0) };
            let scale = s.abs().max(1.0);
            worst_odd = worst_odd.max((flux_a(kind, -s) - flux_a(kind, s) - s).abs() / scale);
            worst_even = worst_even.min((flux_a(kind, -s) + flux_a(kind, s)) / scale);
        }
        r.check(flux_a(kind, 0.0) == 0.0, format!("(d) {kind:?} A(0) = 0"));
        r.check(worst_odd <= 1e-13, format!("(d) {kind:?} max |A(-s) - A(s) - s| {worst_odd:.1e}"));
        r.check(worst_even >= -1e-15, format!("(d) {kind:?} min A(-s) + A(s) {worst_even:.1e} >= 0"));
    }

    // (e) SPD local matrices and A_K <= B_K with a refinement-uniform reverse constant
    let tensor = |_: Vec2| SymMat2::diag(0.8, 1.0);
    let families = [
        MeshFamily::Cartesian,
        MeshFamily::Triangular,
        MeshFamily::Kershaw { distortion: KERSHAW_DISTORTION },
        MeshFamily::TiltedHexagonal { angle: HEX_TILT },
    ];
    for family in families {
        let mut ratios = Vec::new();
        let mut violations = 0;
        let mut not_spd = 0;
        for n in [4, 8, 16] {
            let mesh = generate(family, n)?;
            let mut worst: f64 = 0.0;
            for k in 0..mesh.num_cells() {
                let op = match local_diffusion_matrix(&mesh, k, &tensor, 1.5) {
                    Ok(op) if op.matrix.is_positive_definite(1e-13) => op,
                    _ => {
                        not_spd += 1;
                        continue;
                    }
                };
                for _ in 0..100 {
                    let w: Vec<f64> = (0..op.size()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let a = op.matrix.quadratic(&w, &w);
                    let b: f64 = w.iter().zip(&op.comparison).map(|(x, d)| d * x * x).sum();
                    if a > b * (1.0 + 1e-12) {
                        violations += 1;
                    }
                    worst = worst.max(b / a);
                }
            }
            ratios.push(worst);
        }
        let spread = ratios.iter().cloned().fold(0.0, f64::max) / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        r.check(not_spd == 0, format!("(e) {family:?} cells failing SPD: {not_spd}"));
        r.check(violations == 0, format!("(e) {family:?} samples with wAw > wBw: {violations}"));
        r.check(
            spread <= 2.0,
            format!("(e) {family:?} max wBw/wAw over levels 4,8,16 = {ratios:.2?}, spread {spread:.2} <= 2"),
        );
    }

    // (f) Newton Jacobian against central differences
    let small = case.prepare(kershaw(4, KERSHAW_DISTORTION)?)?;
    let n = small.num_cells() + small.num_faces();
    let u = DofVector::from_flat(&small, &(0..n).map(|_| rng.gen_range(0.5..1.5)).collect::<Vec<_>>());
    let previous: Vec<f64> = (0..small.num_cells()).map(|_| rng.gen_range(0.5..1.5)).collect();
    let mut worst: f64 = 0.0;
    let mut thermal_data = data.clone();
    thermal_data.mass = Some(mass(&small, &u));
    for mean in [MeanKind::Arithmetic, MeanKind::Max, MeanKind::SqrtMean, MeanKind::LogMean] {
        for aggregate in [Aggregate::Mean, Aggregate::Max] {
            let cfg = SchemeConfig { mean, aggregate, ..config(SchemeKind::Nonlinear) };
            let scheme = NonlinearScheme::new(&small, &thermal_data, &cfg)?;
            for mode in [NonlinearMode::Transient { previous_cells: &previous, dt: 0.3 }, NonlinearMode::Stationary] {
                let jac = scheme.jacobian(&small, mode, &u)?.full_matrix();
                let scale = jac.norm_inf();
                let flat = u.to_flat();
                for j in 0..n {
                    let h = 1e-6 * flat[j].abs().max(1.0);
                    let shifted = |d: f64| -> Result<Vec<f64>, Box<dyn Error>> {
                        let mut v = flat.clone();
                        v[j] += d;
                        Ok(scheme.residual(&small, mode, &DofVector::from_flat(&small, &v))?.0.to_flat())
                    };
                    let (plus, minus) = (shifted(h)?, shifted(-h)?);
                    for i in 0..n {
                        let fd = (plus[i] - minus[i]) / (2.0 * h);
                        worst = worst.max((jac.get(i, j) - fd).abs() / scale);
                    }
                }
            }
        }
    }
    r.check(worst <= 1e-5, format!("(f) Jacobian vs central differences, relative {worst:.1e} <= 1e-5"));

    // (g) static condensation against a dense solve of the full system
    let acc = case_accuracy1();
    let tri = acc.prepare(triangular(4)?)?;
    let cart = case.prepare(cartesian(5)?)?;
    let systems = [
        ("dirichlet stationary", LinearScheme::new(&tri, &acc.data, &config(SchemeKind::Hmm))?.assemble(&tri, &acc.data, StepMode::Stationary)?),
        ("neumann stationary with mass row", {
            let mut d = data.clone();
            d.mass = Some(1.0);
            LinearScheme::new(&cart, &d, &config(SchemeKind::ExpFit))?.assemble(&cart, &d, StepMode::Stationary)?
        }),
        ("transient step", LinearScheme::new(&small, data, &config(SchemeKind::Hmm))?.assemble(&small, data, StepMode::Transient { previous_cells: &previous, dt: 0.1 })?),
    ];
    for (label, system) in systems {
        let condensed = system.solve()?;
        let nc = system.num_cells();
        let reference = dense_solve(system.full_matrix().to_dense(), system.full_rhs());
        let got: Vec<f64> = condensed
            .cells
            .iter()
            .copied()
            .chain(system.faces.unknown.iter().zip(&condensed.faces).filter(|(u, _)| u.is_some()).map(|(_, v)| *v))
            .collect();
        let err = max_abs_diff(&got, &reference) / max_abs(&reference);
        r.check(
            got.len() == nc + system.num_face_unknowns() && err <= 1e-10,
            format!("(g) {label}: condensed vs dense relative difference {err:.1e} <= 1e-10"),
        );
    }
    Ok(())
}

fn mixed_boundary(r: &mut Report) -> Res {
    let case = case_mixed();
    let mesh = case.prepare(kershaw(16, KERSHAW_DISTORTION)?)?;
    let run = run_transient(&mesh, &case, &transient(SchemeKind::Nonlinear, 0.1, 200.0), |_, _, _| {})?;
    let ups = entropy_increases(&run.records);
    r.check(ups == 0, format!("entropy increases over {} steps: {ups}", run.records.len() - 1));
    let rho = mixed_rho();
    let potential = case.data.potential.clone();
    let target = DofVector::interpolate(&mesh, |p| rho * (-potential(p)).exp());
    let err = run.drive.final_state.max_abs_diff(&target);
    r.check(err <= 1e-9, format!("max distance to rho^D e^(-phi) at T = 200: {err:.2e} <= 1e-9"));
    Ok(())
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "accuracy, smooth solution on triangles", limit: Duration::from_secs(120), run: accuracy_smooth },
        Criterion { id: 2, name: "accuracy, advection-dominated on Cartesian meshes", limit: Duration::from_secs(180), run: accuracy_advection_dominated },
        Criterion { id: 3, name: "long-time decay on Kershaw mesh", limit: Duration::from_secs(300), run: long_time_decay },
        Criterion { id: 4, name: "positivity on tilted hexagons", limit: Duration::from_secs(120), run: positivity },
        Criterion { id: 5, name: "structure preservation", limit: Duration::from_secs(60), run: structure_preservation },
        Criterion { id: 6, name: "mixed Dirichlet-Neumann nonlinear scheme", limit: Duration::from_secs(120), run: mixed_boundary },
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut all_passed = true;
    for c in criteria.iter().filter(|c| selected.is_empty() || selected.contains(&c.id)) {
        let mut report = Report::default();
        let start = Instant::now();
        if let Err(e) = (c.run)(&mut report) {
            report.check(false, format!("error: {e}"));
        }
        let elapsed = start.elapsed();
        report.check(elapsed <= c.limit, format!("runtime {:.1}s <= {}s", elapsed.as_secs_f64(), c.limit.as_secs()));
        let passed = report.passed();
        all_passed &= passed;
        println!("{} criterion {}: {} ({:.1}s)", if passed { "PASS" } else { "FAIL" }, c.id, c.name, elapsed.as_secs_f64());
        for (ok, what) in &report.checks {
            println!("    {} {what}", if *ok { "ok  " } else { "FAIL" });
        }
    }
    if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
