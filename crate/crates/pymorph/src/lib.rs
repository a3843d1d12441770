//! Python bindings: the wheel model, the design-space helpers and a
//! one-call scenario runner returning JSON.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use morph::behavior;
use morph::config::RunConfig;
use morph::design_space;
use morph::locomotion;
use morph::wheel;

fn err(e: morph::MorphError) -> PyErr {
    match e {
        morph::MorphError::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

#[pyclass(frozen)]
#[derive(Clone)]
struct WheelDesign {
    inner: wheel::WheelDesign,
}

#[pymethods]
impl WheelDesign {
    #[new]
    #[pyo3(signature = (
        crank_length_mm = 30.0,
        slider_length_mm = 40.0,
        strut_link_length_mm = 25.0,
        strut_max_angle_deg = 74.0,
        strut_constraint_length_mm = 5.0,
        spring_stiffness_nmm_per_deg = 2.14,
        spring_count = 12,
        spring_backlash_deg = 0.0,
        initial_radius_mm = 80.0,
        min_contact_radius_mm = 42.0,
        contraction_cap_mm = 40.0,
        segment_count = 6,
        wheel_weight_kg = 2.8,
        gravity_mps2 = wheel::STANDARD_GRAVITY_MPS2,
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        crank_length_mm: f64,
        slider_length_mm: f64,
        strut_link_length_mm: f64,
        strut_max_angle_deg: f64,
        strut_constraint_length_mm: f64,
        spring_stiffness_nmm_per_deg: f64,
        spring_count: u32,
        spring_backlash_deg: f64,
        initial_radius_mm: f64,
        min_contact_radius_mm: f64,
        contraction_cap_mm: f64,
        segment_count: u32,
        wheel_weight_kg: f64,
        gravity_mps2: f64,
    ) -> PyResult<Self> {
        let coupler = wheel::CouplerGeometry::new(crank_length_mm, slider_length_mm).map_err(err)?;
        let strut = wheel::StrutGeometry::new(
            strut_link_length_mm,
            strut_max_angle_deg,
            strut_constraint_length_mm,
        )
        .map_err(err)?;
        let spring = wheel::SpringSpec::new(
            spring_stiffness_nmm_per_deg,
            spring_count,
            spring_backlash_deg,
        )
        .map_err(err)?;
        let inner = wheel::WheelDesign::new(
            coupler,
            strut,
            spring,
            initial_radius_mm,
            min_contact_radius_mm,
            contraction_cap_mm,
            segment_count,
            wheel_weight_kg,
            gravity_mps2,
        )
        .map_err(err)?;
        Ok(Self { inner })
    }

    /// Contraction in mm at a drive angle in rad.
    fn delta_r(&self, theta_d_rad: f64) -> PyResult<f64> {
        self.inner.contraction_mm(theta_d_rad).map_err(err)
    }

    /// Coupler Jacobian in mm per rad.
    fn jacobian(&self, theta_d_rad: f64) -> PyResult<f64> {
        self.inner.coupler.jacobian_mm_per_rad(theta_d_rad).map_err(err)
    }

    /// Drive angle in rad producing a given contraction.
    fn theta_for_delta_r(&self, delta_r_mm: f64) -> PyResult<f64> {
        self.inner.coupler.theta_for_contraction(delta_r_mm).map_err(err)
    }

    /// Radial spring resistance in N at a contraction.
    fn spring_force(&self, delta_r_mm: f64) -> PyResult<f64> {
        self.inner.spring_force_n(delta_r_mm).map_err(err)
    }

    /// Static input torque in N·mm holding a drive angle.
    fn input_torque(&self, theta_d_rad: f64) -> PyResult<f64> {
        self.inner.input_torque_nmm(theta_d_rad).map_err(err)
    }

    /// Radial contraction force in N from a torque at a drive angle.
    fn contraction_force(&self, theta_d_rad: f64, tau_in_nmm: f64) -> PyResult<f64> {
        self.inner.contraction_force_n(theta_d_rad, tau_in_nmm).map_err(err)
    }

    /// Drive angle in rad where the contraction hits the hard stop.
    fn theta_cap(&self) -> f64 {
        self.inner.theta_cap_rad()
    }

    /// Ground contact radius in mm at a contraction, floored at the hub.
    fn contact_radius(&self, delta_r_mm: f64) -> f64 {
        self.inner.contact_radius_mm(delta_r_mm)
    }

    /// Mode label for one loading condition.
    fn classify(&self, theta_d_rad: f64, tau_in_nmm: f64, f_res_n: f64) -> PyResult<String> {
        let state = self.inner.state_at(theta_d_rad).map_err(err)?;
        let m = behavior::classify_mode(&self.inner, &state, tau_in_nmm, f_res_n).map_err(err)?;
        Ok(m.mode.label().to_string())
    }

    /// Contraction equilibrium under an applied torque.
    fn equilibrium<'py>(&self, py: Python<'py>, tau_nmm: f64) -> PyResult<Bound<'py, PyDict>> {
        let sol = behavior::equilibrium_delta_r(&self.inner, tau_nmm).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("theta_d_rad", sol.theta_d_rad)?;
        d.set_item("delta_r_mm", sol.delta_r_mm)?;
        d.set_item("effective_radius_mm", sol.effective_radius_mm)?;
        d.set_item("converged", sol.converged)?;
        d.set_item("residual_nmm", sol.residual_nmm)?;
        Ok(d)
    }

    /// Operating point reached against a resistance with a torque budget.
    fn drive<'py>(
        &self,
        py: Python<'py>,
        f_res_n: f64,
        tau_max_nmm: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let sol = behavior::drive_solution(&self.inner, f_res_n, tau_max_nmm).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("mode", sol.final_mode.mode.label())?;
        d.set_item("theta_d_rad", sol.final_state.theta_d_rad)?;
        d.set_item("delta_r_mm", sol.final_state.delta_r_mm)?;
        d.set_item("effective_radius_mm", sol.final_state.effective_radius_mm)?;
        d.set_item("tau_used_nmm", sol.tau_used_nmm)?;
        d.set_item("f_out_achieved_n", sol.f_out_achieved_n)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "WheelDesign(crank={} mm, slider={} mm, r0={} mm, W={} kg)",
            self.inner.coupler.crank_length_mm,
            self.inner.coupler.slider_length_mm,
            self.inner.initial_radius_mm,
            self.inner.wheel_weight_kg
        )
    }
}

/// Center oscillation of a segmented rim: (amplitude mm, percent of max radius).
#[pyfunction]
fn displacement_amplitude(
    segment_count: u32,
    radius_ratio: f64,
    max_radius_mm: f64,
) -> PyResult<(f64, f64)> {
    let cfg = design_space::SegmentConfig::new(segment_count, radius_ratio, max_radius_mm)
        .map_err(err)?;
    Ok(design_space::displacement_amplitude(&cfg))
}

/// Smallest segment count keeping the oscillation under a percent limit.
#[pyfunction]
fn min_segment_count(radius_ratio: f64, limit_pct: f64) -> PyResult<u32> {
    design_space::min_segment_count(radius_ratio, limit_pct).map_err(err)
}

/// Strut link length needed to cover a contraction target, mm.
#[pyfunction]
fn strut_inner_radius_bound(
    max_angle_deg: f64,
    constraint_length_mm: f64,
    delta_r_target_mm: f64,
) -> PyResult<f64> {
    design_space::strut_inner_radius_bound(max_angle_deg, constraint_length_mm, delta_r_target_mm)
        .map_err(err)
}

/// Feasible wheel-weight band for a design over [w_min, w_max] kg.
#[pyfunction]
#[pyo3(signature = (design, w_min_kg, w_max_kg, grid_points = 100))]
fn weight_feasibility<'py>(
    py: Python<'py>,
    design: &WheelDesign,
    w_min_kg: f64,
    w_max_kg: f64,
    grid_points: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let region =
        design_space::weight_feasibility(&design.inner, w_min_kg, w_max_kg, grid_points)
            .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("lower_bound_kg", region.lower_bound_kg)?;
    d.set_item("upper_bound_kg", region.upper_bound_kg)?;
    d.set_item("cond1_upper_kg", region.cond1_upper_kg())?;
    d.set_item(
        "cond1_ceiling_kg",
        design_space::cond1_weight_ceiling_kg(&design.inner),
    )?;
    Ok(d)
}

/// Minimum ground friction coefficient per wheel weight.
#[pyfunction]
fn min_friction_coefficient(
    design: &WheelDesign,
    weights_kg: Vec<f64>,
) -> PyResult<Vec<(f64, f64)>> {
    let points =
        design_space::min_friction_coefficient(&design.inner, &weights_kg).map_err(err)?;
    Ok(points.into_iter().map(|p| (p.weight_kg, p.mu_min)).collect())
}

/// Torque cap and peak output force per spring stiffness value.
#[pyfunction]
fn stiffness_sweep(
    design: &WheelDesign,
    stiffness_nmm_per_deg: Vec<f64>,
) -> PyResult<Vec<(f64, f64, f64)>> {
    let sweep =
        design_space::stiffness_sweep(&design.inner, &stiffness_nmm_per_deg).map_err(err)?;
    Ok(sweep
        .rows
        .into_iter()
        .map(|r| (r.stiffness_nmm_per_deg, r.tau_in_max_nmm, r.f_out_max_n))
        .collect())
}

/// Runs the scenario in a TOML run configuration and returns per-variant
/// trace summaries as a JSON string. No files are written.
#[pyfunction]
fn run_scenario_toml(toml_text: &str) -> PyResult<String> {
    let cfg = RunConfig::parse_str(toml_text).map_err(err)?;
    let sc = cfg
        .scenario
        .as_ref()
        .ok_or_else(|| PyValueError::new_err("missing [scenario] section"))?;
    sc.validate().map_err(err)?;
    let design = cfg.design.to_design().map_err(err)?;
    let scenario = sc.to_scenario(&design, sc.onboard_load_kg).map_err(err)?;
    let mut out = serde_json::Map::new();
    out.insert("config_hash".into(), cfg.hash_hex().into());
    let mut variants = Vec::new();
    for variant in sc.parsed_variants() {
        let trace = locomotion::run(&scenario, variant).map_err(err)?;
        let summary = trace.summary(&scenario.terrain);
        let mut entry = serde_json::to_value(&summary)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        entry["label"] = variant.label().into();
        entry["rows"] = trace.rows.len().into();
        variants.push(entry);
    }
    out.insert("variants".into(), variants.into());
    serde_json::to_string_pretty(&serde_json::Value::Object(out))
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn pymorph(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<WheelDesign>()?;
    m.add_function(wrap_pyfunction!(displacement_amplitude, m)?)?;
    m.add_function(wrap_pyfunction!(min_segment_count, m)?)?;
    m.add_function(wrap_pyfunction!(strut_inner_radius_bound, m)?)?;
    m.add_function(wrap_pyfunction!(weight_feasibility, m)?)?;
    m.add_function(wrap_pyfunction!(min_friction_coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(stiffness_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario_toml, m)?)?;
    m.add("STANDARD_GRAVITY_MPS2", wheel::STANDARD_GRAVITY_MPS2)?;
    Ok(())
}
