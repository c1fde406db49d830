//! Entropy diagnostics, decay fits, convergence orders and positivity summaries.

use crate::discretization::DofVector;
use crate::mesh::Mesh;
use crate::schemes::{LinearScheme, NonlinearScheme, ProblemData, SchemeConfig, SchemeError, SchemeKind};

use super::ExperimentError;

/// One row of a transient run, taken after each macro step (step 0 is the initial state).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeSeriesRecord {
    pub step: usize,
    pub time: f64,
    pub entropy: f64,
    /// NaN at step 0.
    pub dissipation: f64,
    /// Σ_K |K| |u_K - u^∞(x_K)|
    pub dist_l1_exact: f64,
    /// Σ_K |K| |u_K - u^∞_K| against the discrete steady state.
    pub dist_l1_discrete: f64,
    /// L² distance of the cells to the exact steady state.
    pub dist_l2_exact: f64,
    pub min_cell: f64,
    pub min_face: f64,
    /// Strictly negative unknowns, cells and faces.
    pub negatives: usize,
    /// Cumulative linear solves.
    pub solves: usize,
}

impl TimeSeriesRecord {
    pub const COLUMNS: [&'static str; 11] = [
        "step",
        "time",
        "entropy",
        "dissipation",
        "dist_l1_exact",
        "dist_l1_discrete",
        "dist_l2_exact",
        "min_cell",
        "min_face",
        "negatives",
        "solves",
    ];
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateStatistics {
    pub min_cell: f64,
    pub min_face: f64,
    pub negatives: usize,
}

pub fn state_statistics(u: &DofVector) -> StateStatistics {
    StateStatistics {
        min_cell: u.min_cell(),
        min_face: u.min_face(),
        negatives: u.cells.iter().chain(&u.faces).filter(|v| **v < 0.0).count(),
    }
}

/// Φ₁(s) = s log s - s + 1 with Φ₁(0) = 1.
///
/// Near s = 1 the closed form cancels to nothing; the series in t = s - 1,
/// Σ_{k≥2} (-t)^k / (k(k-1)), keeps full relative accuracy there.
pub fn phi1(s: f64) -> f64 {
    let t = s - 1.0;
    if s == 0.0 {
        1.0
    } else if t.abs() < 0.05 {
        let mut power = t * t;
        let mut sum = 0.0;
        for k in 2..18 {
            sum += power / (k * (k - 1)) as f64;
            power *= -t;
        }
        sum
    } else {
        s * s.ln() - s + 1.0
    }
}

/// Scheme-specific entropy and dissipation relative to a steady state.
#[derive(Clone, Debug)]
pub enum EntropyEvaluator {
    Hmm(LinearScheme),
    /// Weighted by 1/ω; differences taken in the Slotboom variable u/ω.
    ExpFit { scheme: LinearScheme, omega: DofVector },
    Nonlinear(NonlinearScheme),
}

impl EntropyEvaluator {
    pub fn new(mesh: &Mesh, data: &ProblemData, config: &SchemeConfig) -> Result<Self, SchemeError> {
        Ok(match config.scheme {
            SchemeKind::Hmm => EntropyEvaluator::Hmm(LinearScheme::new(mesh, data, config)?),
            SchemeKind::ExpFit | SchemeKind::ExpFitHarmonic => EntropyEvaluator::ExpFit {
                scheme: LinearScheme::new(mesh, data, config)?,
                omega: DofVector::interpolate(mesh, |p| data.omega(p)),
            },
            SchemeKind::Nonlinear => EntropyEvaluator::Nonlinear(NonlinearScheme::new(mesh, data, config)?),
        })
    }

    pub fn entropy(&self, mesh: &Mesh, u: &DofVector, steady: &DofVector) -> Result<f64, SchemeError> {
        let cells = mesh.cells.iter().zip(u.cells.iter().zip(&steady.cells));
        Ok(match self {
            EntropyEvaluator::Hmm(_) => cells.map(|(c, (a, b))| 0.5 * c.area * (a - b) * (a - b)).sum(),
            EntropyEvaluator::ExpFit { omega, .. } => cells
                .zip(&omega.cells)
                .map(|((c, (a, b)), w)| 0.5 * c.area * (a - b) * (a - b) / w)
                .sum(),
            EntropyEvaluator::Nonlinear(_) => {
                let mut total = 0.0;
                for (i, (c, (&a, &b))) in cells.enumerate() {
                    if a < 0.0 || !(b > 0.0) {
                        return Err(SchemeError::NonPositive { value: a.min(b), location: format!("cell {i}") });
                    }
                    total += c.area * b * phi1(a / b);
                }
                total
            }
        })
    }

    pub fn dissipation(&self, mesh: &Mesh, u: &DofVector, steady: &DofVector) -> Result<f64, SchemeError> {
        let linear = |scheme: &LinearScheme, weight: &dyn Fn(bool, usize) -> f64| {
            let v = u.zip_map(steady, |a, b| a - b);
            let mut total = 0.0;
            for (k, cell) in mesh.cells.iter().enumerate() {
                let fluxes = scheme.cell_fluxes(mesh, k, &v.cells, &v.faces);
                let vk = v.cells[k] * weight(true, k);
                for (fl, &f) in fluxes.iter().zip(&cell.faces) {
                    total += fl * (vk - v.faces[f] * weight(false, f));
                }
            }
            total
        };
        match self {
            EntropyEvaluator::Hmm(scheme) => Ok(linear(scheme, &|_, _| 1.0)),
            EntropyEvaluator::ExpFit { scheme, omega } => Ok(linear(scheme, &|is_cell, i| {
                1.0 / if is_cell { omega.cells[i] } else { omega.faces[i] }
            })),
            EntropyEvaluator::Nonlinear(scheme) => scheme.dissipation(mesh, u),
        }
    }
}

/// (E, D) of `u` relative to `steady` for the configured scheme.
pub fn entropy_dissipation(
    mesh: &Mesh,
    data: &ProblemData,
    config: &SchemeConfig,
    u: &DofVector,
    steady: &DofVector,
) -> Result<(f64, f64), SchemeError> {
    let ev = EntropyEvaluator::new(mesh, data, config)?;
    Ok((ev.entropy(mesh, u, steady)?, ev.dissipation(mesh, u, steady)?))
}

/// Orders log(e_{i-1}/e_i)/log(h_{i-1}/h_i); `None` for the first row and around zero errors.
pub fn eoc(errors: &[f64], sizes: &[f64]) -> Vec<Option<f64>> {
    (0..errors.len())
        .map(|i| {
            if i == 0 || errors[i] <= 0.0 || errors[i - 1] <= 0.0 {
                return None;
            }
            Some((errors[i - 1] / errors[i]).ln() / (sizes[i - 1] / sizes[i]).ln())
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    /// Fitted ν in dist ≈ C e^{-ν t}.
    pub rate: f64,
    /// Median level after the knee, if the decay saturates.
    pub plateau: Option<f64>,
    /// Index (into the positive samples) where saturation starts.
    pub knee: Option<usize>,
}

fn slope(t: &[f64], y: &[f64]) -> f64 {
    let n = t.len() as f64;
    let (mt, my) = (t.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (num, den) = t.iter().zip(y).fold((0.0, 0.0), |(a, b), (ti, yi)| {
        (a + (ti - mt) * (yi - my), b + (ti - mt) * (ti - mt))
    });
    num / den
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Exponential rate of a decaying distance series, ignoring the saturation plateau.
///
/// Local slopes of log(dist) use `window` consecutive samples; the knee is the first
/// local slope below 10% of the initial one. The rate is fitted where the distance
/// still exceeds the plateau by three orders of magnitude.
pub fn decay_rate(times: &[f64], values: &[f64], window: usize) -> Result<DecayFit, ExperimentError> {
    let (t, y): (Vec<f64>, Vec<f64>) =
        times.iter().zip(values).filter(|(_, v)| **v > 0.0).map(|(t, v)| (*t, v.ln())).unzip();
    if t.len() < 3 {
        return Err(ExperimentError::Analysis("fewer than three positive distances, rate undefined".into()));
    }
    let w = window.clamp(2, t.len());
    let local = |i: usize| {
        let lo = i.min(t.len() - w);
        slope(&t[lo..lo + w], &y[lo..lo + w])
    };
    let initial = local(0);
    let knee = if initial.abs() > 0.0 { (1..t.len()).find(|&i| local(i).abs() < 0.1 * initial.abs()) } else { None };
    let plateau = knee.map(|k| median(&mut y[k..].iter().map(|v| v.exp()).collect::<Vec<_>>()));
    let end = knee.unwrap_or(t.len());
    let mut fit: Vec<usize> = match plateau {
        Some(p) => (0..end).filter(|&i| y[i] > (1e3 * p).ln()).collect(),
        None => (0..end).collect(),
    };
    if fit.len() < 2 {
        fit = (0..end.max(2)).collect();
    }
    let ft: Vec<f64> = fit.iter().map(|&i| t[i]).collect();
    let fy: Vec<f64> = fit.iter().map(|&i| y[i]).collect();
    Ok(DecayFit { rate: -slope(&ft, &fy), plateau, knee })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PositivityReport {
    pub min_cell: f64,
    pub min_face: f64,
    /// Negative unknowns summed over all recorded steps.
    pub negatives: usize,
    pub cost: usize,
}

pub fn positivity_report(records: &[TimeSeriesRecord]) -> PositivityReport {
    PositivityReport {
        min_cell: records.iter().map(|r| r.min_cell).fold(f64::INFINITY, f64::min),
        min_face: records.iter().map(|r| r.min_face).fold(f64::INFINITY, f64::min),
        negatives: records.iter().map(|r| r.negatives).sum(),
        cost: records.last().map_or(0, |r| r.solves),
    }
}
