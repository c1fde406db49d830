//! Browser demo: stationary fields, long-time decay curves and positivity minima.

use hfv_core::experiments::{case_by_name, positivity_report, run_transient, TestCase};
use hfv_core::mesh::{generate, Mesh, MeshFamily};
use hfv_core::schemes::{FluxKind, SchemeConfig, SchemeKind};
use hfv_core::solver::stationary_solve;
use wasm_bindgen::prelude::*;

fn family(name: &str) -> Result<MeshFamily, String> {
    match name {
        "cartesian" => Ok(MeshFamily::Cartesian),
        "triangular" => Ok(MeshFamily::Triangular),
        "kershaw" => Ok(MeshFamily::Kershaw { distortion: 0.4 }),
        "tilted-hexagonal" => Ok(MeshFamily::TiltedHexagonal { angle: 0.3 }),
        other => Err(format!("unknown mesh family `{other}`")),
    }
}

fn case(name: &str) -> Result<TestCase, String> {
    case_by_name(name).ok_or_else(|| format!("unknown case `{name}`"))
}

fn prepared_mesh(case: &TestCase, family_name: &str, resolution: usize) -> Result<Mesh, String> {
    let mesh = generate(family(family_name)?, resolution).map_err(|e| e.to_string())?;
    case.prepare(mesh).map_err(|e| e.to_string())
}

fn config(scheme: &str, flux: &str) -> Result<SchemeConfig, String> {
    Ok(SchemeConfig { scheme: scheme.parse::<SchemeKind>()?, flux: flux.parse::<FluxKind>()?, ..SchemeConfig::default() })
}

/// Polygons and one value per polygon, flattened for drawing.
#[wasm_bindgen]
pub struct CellField {
    points: Vec<f64>,
    offsets: Vec<u32>,
    values: Vec<f64>,
}

#[wasm_bindgen]
impl CellField {
    /// x0, y0, x1, y1, ... for all polygon corners, polygon after polygon.
    #[wasm_bindgen(getter)]
    pub fn points(&self) -> Vec<f64> {
        self.points.clone()
    }

    /// Start of polygon k in `points` (in corners) is offsets[k]; the last entry closes the list.
    #[wasm_bindgen(getter)]
    pub fn offsets(&self) -> Vec<u32> {
        self.offsets.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }
}

impl CellField {
    fn new(mesh: &Mesh, values: Vec<f64>) -> Self {
        let mut points = Vec::new();
        let mut offsets = vec![0u32];
        for c in &mesh.cells {
            for &v in &c.vertices {
                points.extend([mesh.vertices[v].x, mesh.vertices[v].y]);
            }
            offsets.push((points.len() / 2) as u32);
        }
        CellField { points, offsets, values }
    }
}

pub fn solve_field(case_name: &str, family_name: &str, resolution: usize, scheme: &str, flux: &str) -> Result<CellField, String> {
    let case = case(case_name)?;
    let mesh = prepared_mesh(&case, family_name, resolution)?;
    let mut data = case.data.clone();
    if !mesh.has_dirichlet() {
        data.mass = Some(hfv_core::discretization::mass(&mesh, &case.initial_state(&mesh)));
    }
    let (u, _) = stationary_solve(&mesh, &data, &config(scheme, flux)?).map_err(|e| e.to_string())?;
    Ok(CellField::new(&mesh, u.cells))
}

/// Stationary cell values of `case` on a generated mesh.
#[wasm_bindgen]
pub fn stationary_field(
    case_name: &str,
    family_name: &str,
    resolution: usize,
    scheme: &str,
    flux: &str,
) -> Result<CellField, JsError> {
    solve_field(case_name, family_name, resolution, scheme, flux).map_err(|e| JsError::new(&e))
}

/// Times followed by L¹ distances: [t..., exact..., discrete...], each block of equal length.
pub fn decay_series(scheme: &str, resolution: usize, dt: f64, final_time: f64) -> Result<Vec<f64>, String> {
    let case = case("longtime")?;
    let mesh = prepared_mesh(&case, "kershaw", resolution)?;
    let cfg = SchemeConfig { dt, final_time, ..config(scheme, "sg")? };
    let run = run_transient(&mesh, &case, &cfg, |_, _, _| {}).map_err(|e| e.to_string())?;
    let r = &run.records;
    Ok(r.iter().map(|x| x.time).chain(r.iter().map(|x| x.dist_l1_exact)).chain(r.iter().map(|x| x.dist_l1_discrete)).collect())
}

/// Long-time run on a Kershaw mesh; see [`decay_series`] for the layout.
#[wasm_bindgen]
pub fn decay_curve(scheme: &str, resolution: usize, dt: f64, final_time: f64) -> Result<Vec<f64>, JsError> {
    decay_series(scheme, resolution, dt, final_time).map_err(|e| JsError::new(&e))
}

/// [min_cell, min_face, negatives] for hmm, expfit, expfit-harmonic and nonlinear, in that order.
pub fn positivity_table(resolution: usize, dt: f64, final_time: f64) -> Result<Vec<f64>, String> {
    let case = case("positivity")?;
    let mesh = prepared_mesh(&case, "tilted-hexagonal", resolution)?;
    let mut out = Vec::with_capacity(12);
    for scheme in ["hmm", "expfit", "expfit-harmonic", "nonlinear"] {
        let cfg = SchemeConfig { dt, final_time, ..config(scheme, "sg")? };
        let run = run_transient(&mesh, &case, &cfg, |_, _, _| {}).map_err(|e| e.to_string())?;
        let rep = positivity_report(&run.records[1..]);
        out.extend([rep.min_cell, rep.min_face, rep.negatives as f64]);
    }
    Ok(out)
}

/// Minima over the run of the positivity test, all four schemes.
#[wasm_bindgen]
pub fn positivity_minima(resolution: usize, dt: f64, final_time: f64) -> Result<Vec<f64>, JsError> {
    positivity_table(resolution, dt, final_time).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_layout() {
        let f = solve_field("accuracy2", "cartesian", 4, "expfit", "sg").unwrap();
        assert_eq!(f.values.len(), 16);
        assert_eq!(f.offsets.len(), 17);
        assert_eq!(*f.offsets.last().unwrap() as usize * 2, f.points.len());
        assert!(f.values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn unknown_names_rejected() {
        assert!(solve_field("nope", "cartesian", 4, "hmm", "sg").is_err());
        assert!(solve_field("accuracy2", "voronoi", 4, "hmm", "sg").is_err());
        assert!(solve_field("accuracy2", "cartesian", 4, "magic", "sg").is_err());
    }

    #[test]
    fn decay_blocks_have_equal_length() {
        let s = decay_series("hmm", 4, 0.5, 2.0).unwrap();
        assert_eq!(s.len(), 15);
        assert_eq!(s[4], 2.0);
        assert!(s[14] < s[10], "distance to the discrete steady state decays");
    }

    #[test]
    fn nonlinear_stays_positive() {
        let t = positivity_table(8, 1e-4, 2e-4).unwrap();
        assert_eq!(t.len(), 12);
        assert!(t[9] > 0.0 && t[10] > 0.0 && t[11] == 0.0);
    }
}
