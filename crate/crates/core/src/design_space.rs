//! Design-space exploration: segment-count vibration analysis, coupler
//! constraint checks, strut sizing, weight feasibility, friction
//! requirements, and stiffness trade-off sweeps.

use serde::Serialize;

use crate::error::{MorphError, Result};
use crate::wheel::{output_force_n, WheelDesign, STANDARD_GRAVITY_MPS2};

/// Tolerance band around zero for feasibility inequalities. Keeps grid
/// noise from flipping a condition that is analytically tight.
const FEASIBILITY_TOL: f64 = 1e-9;

/// Points on the contraction-angle grid used by feasibility and friction
/// scans.
pub const THETA_GRID_POINTS: usize = 500;

/// Derivative step divisor: h = domain / DERIVATIVE_STEPS.
const DERIVATIVE_STEPS: f64 = 5000.0;

/// Segmented-rim configuration for ride-height vibration analysis.
#[derive(Debug, Clone, Copy)]
pub struct SegmentConfig {
    pub segment_count: u32,
    pub radius_ratio: f64,
    pub max_radius_mm: f64,
}

impl SegmentConfig {
    pub fn new(segment_count: u32, radius_ratio: f64, max_radius_mm: f64) -> Result<Self> {
        if segment_count < 3 {
            return Err(MorphError::InvalidInput(format!(
                "segment count must be at least 3, got {segment_count}"
            )));
        }
        if !(radius_ratio >= 1.0) {
            return Err(MorphError::InvalidInput(format!(
                "radius ratio must be at least 1, got {radius_ratio}"
            )));
        }
        if !(max_radius_mm > 0.0) {
            return Err(MorphError::InvalidInput(format!(
                "max radius must be positive, got {max_radius_mm}"
            )));
        }
        Ok(Self {
            segment_count,
            radius_ratio,
            max_radius_mm,
        })
    }
}

/// Ride-height displacement amplitude of a segmented rim rolling at full
/// expansion. Returns (A in mm, normalized percentage of max radius).
pub fn displacement_amplitude(cfg: &SegmentConfig) -> (f64, f64) {
    let rho = cfg.radius_ratio;
    let half_gap_rad = (rho - 1.0) * std::f64::consts::PI / (f64::from(cfg.segment_count) * rho);
    let amplitude_mm = cfg.max_radius_mm * (1.0 - half_gap_rad.cos());
    let normalized_pct = 100.0 * amplitude_mm / cfg.max_radius_mm;
    (amplitude_mm, normalized_pct)
}

/// Smallest segment count n >= 3 whose normalized amplitude stays within
/// `limit_pct`.
pub fn min_segment_count(radius_ratio: f64, limit_pct: f64) -> Result<u32> {
    if !(limit_pct > 0.0) {
        return Err(MorphError::InvalidInput(format!(
            "amplitude limit must be positive, got {limit_pct}"
        )));
    }
    for n in 3..=1000 {
        let cfg = SegmentConfig::new(n, radius_ratio, 1.0)?;
        let (_, pct) = displacement_amplitude(&cfg);
        if pct <= limit_pct {
            return Ok(n);
        }
    }
    Err(MorphError::InfeasibleDesign(format!(
        "no segment count up to 1000 meets amplitude limit {limit_pct}%"
    )))
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstraintCheck {
    pub name: &'static str,
    pub satisfied: bool,
    pub margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstraintReport {
    pub constraints: Vec<ConstraintCheck>,
    pub pass: bool,
}

/// Coupler link sizing checks. Margins are signed; positive means slack.
/// The fit margin may be exactly zero for a design that packs the linkage
/// against the clearance envelope, which still passes.
pub fn check_coupler_constraints(
    crank_mm: f64,
    slider_mm: f64,
    r_w_max_mm: f64,
    clearance_mm: f64,
    delta_r_target_mm: f64,
) -> Result<ConstraintReport> {
    for (label, v) in [
        ("crank length", crank_mm),
        ("slider length", slider_mm),
        ("max wheel radius", r_w_max_mm),
        ("target contraction", delta_r_target_mm),
    ] {
        if !(v > 0.0) {
            return Err(MorphError::InvalidInput(format!(
                "{label} must be positive, got {v}"
            )));
        }
    }
    if !(clearance_mm >= 0.0) {
        return Err(MorphError::InvalidInput(format!(
            "clearance must be non-negative, got {clearance_mm}"
        )));
    }

    let singularity_margin = 2.0 * crank_mm - slider_mm;
    let displacement_margin = slider_mm - delta_r_target_mm;
    let fit_margin = r_w_max_mm - (crank_mm + slider_mm) - clearance_mm;

    let constraints = vec![
        ConstraintCheck {
            name: "singularity_avoidance",
            satisfied: singularity_margin > 0.0,
            margin: singularity_margin,
        },
        ConstraintCheck {
            name: "displacement_capacity",
            satisfied: displacement_margin >= 0.0,
            margin: displacement_margin,
        },
        ConstraintCheck {
            name: "geometric_fit",
            satisfied: fit_margin >= 0.0,
            margin: fit_margin,
        },
    ];
    let pass = constraints.iter().all(|c| c.satisfied);
    Ok(ConstraintReport { constraints, pass })
}

/// Minimum strut link length whose stroke covers the constraint length
/// plus the full contraction target.
pub fn strut_inner_radius_bound(
    max_angle_deg: f64,
    constraint_length_mm: f64,
    delta_r_max_mm: f64,
) -> Result<f64> {
    if !(max_angle_deg > 0.0 && max_angle_deg <= 90.0) {
        return Err(MorphError::InvalidInput(format!(
            "strut angle must be in (0, 90] degrees, got {max_angle_deg}"
        )));
    }
    if !(constraint_length_mm >= 0.0) {
        return Err(MorphError::InvalidInput(format!(
            "constraint length must be non-negative, got {constraint_length_mm}"
        )));
    }
    if !(delta_r_max_mm > 0.0) {
        return Err(MorphError::InvalidInput(format!(
            "contraction target must be positive, got {delta_r_max_mm}"
        )));
    }
    let reach = 1.0 - max_angle_deg.to_radians().cos();
    Ok((constraint_length_mm + delta_r_max_mm) / (2.0 * reach))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FeasibilityPoint {
    pub weight_kg: f64,
    pub cond1_ok: bool,
    pub cond2_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FeasibilityRegion {
    pub grid: Vec<FeasibilityPoint>,
    pub lower_bound_kg: Option<f64>,
    pub upper_bound_kg: Option<f64>,
}

impl FeasibilityRegion {
    /// Heaviest grid weight that still satisfies condition 1 alone.
    pub fn cond1_upper_kg(&self) -> Option<f64> {
        self.grid
            .iter()
            .rev()
            .find(|p| p.cond1_ok)
            .map(|p| p.weight_kg)
    }
}

/// Both feasibility conditions for a single design at its own weight:
/// condition 1 is non-negative input torque over the whole stroke,
/// condition 2 is a non-decreasing torque curve (central differences,
/// one-sided at the stroke ends).
pub fn feasibility_conditions(design: &WheelDesign, theta_points: usize) -> Result<(bool, bool)> {
    assert!(theta_points >= 2);
    let cap = design.theta_cap_rad();
    let h = cap / DERIVATIVE_STEPS;
    let tau = |t: f64| design.input_torque_nmm(t);
    let mut cond1 = true;
    let mut cond2 = true;
    for k in 0..theta_points {
        let t = cap * k as f64 / (theta_points - 1) as f64;
        if tau(t)? <= -FEASIBILITY_TOL {
            cond1 = false;
        }
        let slope = if k == 0 {
            (tau(h)? - tau(0.0)?) / h
        } else if k == theta_points - 1 {
            (tau(cap)? - tau(cap - h)?) / h
        } else {
            (tau(t + h)? - tau(t - h)?) / (2.0 * h)
        };
        if slope <= -FEASIBILITY_TOL {
            cond2 = false;
        }
        if !cond1 && !cond2 {
            break;
        }
    }
    Ok((cond1, cond2))
}

/// Wheel-weight feasibility region on a uniform weight grid, with an
/// explicit contraction-grid resolution.
pub fn weight_feasibility_with_resolution(
    design: &WheelDesign,
    w_min_kg: f64,
    w_max_kg: f64,
    grid_points: usize,
    theta_points: usize,
) -> Result<FeasibilityRegion> {
    if !(w_min_kg >= 0.0) {
        return Err(MorphError::InvalidInput(format!(
            "minimum weight must be non-negative, got {w_min_kg}"
        )));
    }
    if !(w_min_kg < w_max_kg) {
        return Err(MorphError::InvalidInput(format!(
            "weight range must satisfy min < max, got [{w_min_kg}, {w_max_kg}]"
        )));
    }
    if grid_points < 10 {
        return Err(MorphError::InvalidInput(format!(
            "weight grid needs at least 10 points, got {grid_points}"
        )));
    }
    let mut grid = Vec::with_capacity(grid_points);
    for i in 0..grid_points {
        let w = w_min_kg + (w_max_kg - w_min_kg) * i as f64 / (grid_points - 1) as f64;
        let candidate = design.with_wheel_weight(w)?;
        let (cond1_ok, cond2_ok) = feasibility_conditions(&candidate, theta_points)?;
        grid.push(FeasibilityPoint {
            weight_kg: w,
            cond1_ok,
            cond2_ok,
        });
    }
    let lower_bound_kg = grid
        .iter()
        .find(|p| p.cond1_ok && p.cond2_ok)
        .map(|p| p.weight_kg);
    let upper_bound_kg = grid
        .iter()
        .rev()
        .find(|p| p.cond1_ok && p.cond2_ok)
        .map(|p| p.weight_kg);
    Ok(FeasibilityRegion {
        grid,
        lower_bound_kg,
        upper_bound_kg,
    })
}

pub fn weight_feasibility(
    design: &WheelDesign,
    w_min_kg: f64,
    w_max_kg: f64,
    grid_points: usize,
) -> Result<FeasibilityRegion> {
    weight_feasibility_with_resolution(design, w_min_kg, w_max_kg, grid_points, THETA_GRID_POINTS)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FrictionPoint {
    pub weight_kg: f64,
    pub mu_min: f64,
}

/// Smallest ground friction coefficient that lets the wheel transmit its
/// peak output force at weight `weight_kg` without slipping.
pub fn mu_min_for_weight(design: &WheelDesign, weight_kg: f64) -> Result<f64> {
    if !(weight_kg > 0.0) {
        return Err(MorphError::InvalidInput(format!(
            "friction map weight must be positive, got {weight_kg}"
        )));
    }
    let candidate = design.with_wheel_weight(weight_kg)?;
    let cap = candidate.theta_cap_rad();
    let normal_n = candidate.weight_force_n();
    let mut mu = 0.0_f64;
    for k in 0..THETA_GRID_POINTS {
        let t = cap * k as f64 / (THETA_GRID_POINTS - 1) as f64;
        let state = candidate.state_at(t)?;
        let tau = candidate.input_torque_nmm(t)?;
        let f_out = output_force_n(tau, state.effective_radius_mm)?;
        mu = mu.max(f_out / normal_n);
    }
    Ok(mu)
}

/// Friction requirement map over a list of wheel weights, in input order.
pub fn min_friction_coefficient(
    design: &WheelDesign,
    weights_kg: &[f64],
) -> Result<Vec<FrictionPoint>> {
    if weights_kg.is_empty() {
        return Err(MorphError::InvalidInput(
            "friction map needs at least one weight".into(),
        ));
    }
    weights_kg
        .iter()
        .map(|&w| {
            Ok(FrictionPoint {
                weight_kg: w,
                mu_min: mu_min_for_weight(design, w)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct StiffnessRow {
    pub stiffness_nmm_per_deg: f64,
    pub tau_in_max_nmm: f64,
    pub f_out_max_n: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StiffnessSweep {
    pub rows: Vec<StiffnessRow>,
}

/// Peak input torque and peak output force (at the minimum wheel radius)
/// for each per-spring stiffness value, in input order.
pub fn stiffness_sweep(design: &WheelDesign, stiffness_list: &[f64]) -> Result<StiffnessSweep> {
    if stiffness_list.is_empty() {
        return Err(MorphError::InvalidInput(
            "stiffness sweep needs at least one value".into(),
        ));
    }
    let mut rows = Vec::with_capacity(stiffness_list.len());
    for &k in stiffness_list {
        if !(k > 0.0) {
            return Err(MorphError::InvalidInput(format!(
                "spring stiffness must be positive, got {k}"
            )));
        }
        let mut candidate = design.clone();
        candidate.spring.stiffness_nmm_per_deg = k;
        candidate.validate()?;
        let tau_in_max_nmm = candidate.input_torque_nmm(candidate.theta_cap_rad())?;
        let f_out_max_n = tau_in_max_nmm / candidate.min_contact_radius_mm;
        rows.push(StiffnessRow {
            stiffness_nmm_per_deg: k,
            tau_in_max_nmm,
            f_out_max_n,
        });
    }
    Ok(StiffnessSweep { rows })
}

/// Analytic wheel weight at which the slack-stroke spring force equals the
/// gravity load, the closed-form ceiling for condition 1.
pub fn cond1_weight_ceiling_kg(design: &WheelDesign) -> f64 {
    design.spring.total_stiffness_nmm_per_rad()
        / (2.0 * design.strut.link_length_mm * STANDARD_GRAVITY_MPS2)
}
