//! Quasi-static robot locomotion: terrain profiles, a simple motor model,
//! payload sweeps, wheel-variant comparison, and the direction-reversal
//! demonstration.

use serde::Serialize;

use crate::behavior::{march_cascade, CascadeEnd, Mode};
use crate::error::{MorphError, Result};
use crate::wheel::WheelDesign;

/// Relative shading applied above a rolling threshold so the drive
/// condition holds strictly.
const DRIVE_SHADE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TerrainSegment {
    pub length_m: f64,
    pub slope_deg: f64,
    pub rolling_resistance: f64,
    pub friction: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TerrainProfile {
    pub segments: Vec<TerrainSegment>,
}

impl TerrainProfile {
    pub fn new(segments: Vec<TerrainSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(MorphError::InvalidInput(
                "terrain profile needs at least one segment".into(),
            ));
        }
        for (i, s) in segments.iter().enumerate() {
            if !(s.length_m > 0.0 && s.length_m.is_finite()) {
                return Err(MorphError::InvalidInput(format!(
                    "terrain segment {i} length must be positive, got {}",
                    s.length_m
                )));
            }
            if !(s.slope_deg.abs() < 90.0) {
                return Err(MorphError::InvalidInput(format!(
                    "terrain segment {i} slope must satisfy |slope| < 90 deg, got {}",
                    s.slope_deg
                )));
            }
            if !(s.rolling_resistance >= 0.0) || !(s.friction >= 0.0) {
                return Err(MorphError::InvalidInput(format!(
                    "terrain segment {i} coefficients must be non-negative"
                )));
            }
        }
        Ok(Self { segments })
    }

    pub fn total_length_m(&self) -> f64 {
        self.segments.iter().map(|s| s.length_m).sum()
    }

    /// Segment under a wheel at a signed position. The profile mirrors
    /// around the origin so reversed runs see identical terrain.
    pub fn segment_at(&self, position_m: f64) -> Result<&TerrainSegment> {
        let distance = position_m.abs();
        if !distance.is_finite() || distance > self.total_length_m() + 1e-12 {
            return Err(MorphError::Scenario(format!(
                "position {position_m} m is outside the terrain extent of {} m",
                self.total_length_m()
            )));
        }
        let mut cum = 0.0;
        for s in &self.segments {
            cum += s.length_m;
            if distance < cum {
                return Ok(s);
            }
        }
        Ok(self.segments.last().expect("profile is non-empty"))
    }
}

/// Grade plus rolling resistance load seen by one driven wheel, N.
/// Negative on descents steep enough for gravity to dominate.
pub fn resistance_force(
    profile: &TerrainProfile,
    position_m: f64,
    total_mass_kg: f64,
    gravity_mps2: f64,
    driven_wheels: u32,
) -> Result<f64> {
    if !(total_mass_kg >= 0.0) || !(gravity_mps2 > 0.0) || driven_wheels == 0 {
        return Err(MorphError::InvalidInput(
            "resistance needs mass >= 0, gravity > 0 and at least one driven wheel".into(),
        ));
    }
    let seg = profile.segment_at(position_m)?;
    let alpha = seg.slope_deg.to_radians();
    let total = total_mass_kg * gravity_mps2 * (alpha.sin() + seg.rolling_resistance * alpha.cos());
    Ok(total / f64::from(driven_wheels))
}

#[derive(Debug, Clone)]
pub struct VehicleSpec {
    pub cart_mass_kg: f64,
    pub onboard_load_kg: f64,
    pub wheel_count: u32,
    pub wheel: WheelDesign,
    /// Signed; the sign selects the travel direction.
    pub commanded_speed_rpm: f64,
}

impl VehicleSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.cart_mass_kg >= 0.0) || !(self.onboard_load_kg >= 0.0) {
            return Err(MorphError::InvalidInput(
                "vehicle masses must be non-negative".into(),
            ));
        }
        if self.wheel_count == 0 {
            return Err(MorphError::InvalidInput(
                "vehicle needs at least one wheel".into(),
            ));
        }
        if !(self.commanded_speed_rpm.abs() > 0.0) || !self.commanded_speed_rpm.is_finite() {
            return Err(MorphError::InvalidInput(format!(
                "commanded speed must be non-zero, got {} rpm",
                self.commanded_speed_rpm
            )));
        }
        self.wheel.validate()
    }

    /// Mass carried by the whole platform, kg.
    pub fn total_mass_kg(&self) -> f64 {
        self.cart_mass_kg
            + self.onboard_load_kg
            + f64::from(self.wheel_count) * self.wheel.wheel_weight_kg
    }

    /// Per-wheel design with the share of cart and payload added to the
    /// wheel's own weight. Load splits equally; no transfer on slopes.
    pub fn effective_wheel_design(&self) -> Result<WheelDesign> {
        let per_wheel =
            (self.cart_mass_kg + self.onboard_load_kg) / f64::from(self.wheel_count);
        self.wheel
            .with_wheel_weight(self.wheel.wheel_weight_kg + per_wheel)
    }

    pub fn omega_rad_s(&self) -> f64 {
        self.commanded_speed_rpm.abs() * 2.0 * std::f64::consts::PI / 60.0
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MotorModel {
    pub torque_constant_nmm_per_a: f64,
    pub no_load_current_a: f64,
    pub max_torque_nmm: f64,
    pub rated_speed_rpm: f64,
}

impl MotorModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.torque_constant_nmm_per_a > 0.0)
            || !(self.no_load_current_a >= 0.0)
            || !(self.max_torque_nmm > 0.0)
            || !(self.rated_speed_rpm > 0.0)
        {
            return Err(MorphError::InvalidInput(
                "motor needs positive torque constant, max torque and rated speed".into(),
            ));
        }
        Ok(())
    }

    pub fn current_a(&self, torque_nmm: f64) -> f64 {
        self.no_load_current_a + torque_nmm / self.torque_constant_nmm_per_a
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WheelVariant {
    Morph,
    Fixed(f64),
}

impl WheelVariant {
    pub fn label(&self) -> String {
        match self {
            WheelVariant::Morph => "morph".into(),
            WheelVariant::Fixed(r) => format!("fixed:{r}"),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        if text == "morph" {
            return Ok(WheelVariant::Morph);
        }
        if let Some(raw) = text.strip_prefix("fixed:") {
            let radius: f64 = raw.parse().map_err(|_| {
                MorphError::InvalidInput(format!("bad fixed-wheel radius in {text:?}"))
            })?;
            if !(radius > 0.0) {
                return Err(MorphError::InvalidInput(format!(
                    "fixed-wheel radius must be positive, got {radius}"
                )));
            }
            return Ok(WheelVariant::Fixed(radius));
        }
        Err(MorphError::InvalidInput(format!(
            "unknown wheel variant {text:?}, expected \"morph\" or \"fixed:<mm>\""
        )))
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub vehicle: VehicleSpec,
    pub motor: MotorModel,
    pub terrain: TerrainProfile,
    pub duration_s: f64,
    pub dt_s: f64,
    /// When set, the wheel re-expands if resistance drops; off by default
    /// because the hardware has only been shown to recover on reversal.
    pub allow_reexpansion: bool,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.vehicle.validate()?;
        self.motor.validate()?;
        if !(self.dt_s > 0.0) || !(self.duration_s >= self.dt_s) {
            return Err(MorphError::InvalidInput(format!(
                "need 0 < dt <= duration, got dt {} s and duration {} s",
                self.dt_s, self.duration_s
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub t_s: f64,
    pub position_m: f64,
    pub delta_r_mm: f64,
    pub effective_radius_mm: f64,
    pub mode: Mode,
    pub motor_torque_nmm: f64,
    pub motor_current_a: f64,
    pub ground_speed_mps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub rows: Vec<TraceRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SegmentTiming {
    pub segment: usize,
    pub enter_s: f64,
    pub exit_s: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceSummary {
    pub mean_current_a: f64,
    pub std_current_a: f64,
    pub min_current_a: f64,
    pub max_current_a: f64,
    pub current_range_a: f64,
    pub mean_radius_mm: f64,
    pub final_radius_mm: f64,
    pub final_delta_r_mm: f64,
    pub final_position_m: f64,
    pub segment_timings: Vec<SegmentTiming>,
}

impl SimTrace {
    pub fn summary(&self, profile: &TerrainProfile) -> TraceSummary {
        let n = self.rows.len().max(1) as f64;
        let mean_current_a = self.rows.iter().map(|r| r.motor_current_a).sum::<f64>() / n;
        let var = self
            .rows
            .iter()
            .map(|r| (r.motor_current_a - mean_current_a).powi(2))
            .sum::<f64>()
            / n;
        let min_current_a = self
            .rows
            .iter()
            .map(|r| r.motor_current_a)
            .fold(f64::INFINITY, f64::min);
        let max_current_a = self
            .rows
            .iter()
            .map(|r| r.motor_current_a)
            .fold(f64::NEG_INFINITY, f64::max);
        let mean_radius_mm = self.rows.iter().map(|r| r.effective_radius_mm).sum::<f64>() / n;
        let last = self.rows.last();

        // first-crossing times of the cumulative segment boundaries
        let mut boundaries = Vec::new();
        let mut cum = 0.0;
        for s in &profile.segments {
            cum += s.length_m;
            boundaries.push(cum);
        }
        let cross = |b: f64| {
            self.rows
                .iter()
                .find(|r| r.position_m.abs() >= b)
                .map(|r| r.t_s)
        };
        let mut segment_timings = Vec::new();
        let mut enter = Some(0.0);
        for (i, b) in boundaries.iter().enumerate() {
            let exit = cross(*b);
            if let Some(enter_s) = enter {
                segment_timings.push(SegmentTiming {
                    segment: i,
                    enter_s,
                    exit_s: exit,
                });
            }
            enter = exit;
        }

        TraceSummary {
            mean_current_a,
            std_current_a: var.sqrt(),
            min_current_a,
            max_current_a,
            current_range_a: max_current_a - min_current_a,
            mean_radius_mm,
            final_radius_mm: last.map_or(0.0, |r| r.effective_radius_mm),
            final_delta_r_mm: last.map_or(0.0, |r| r.delta_r_mm),
            final_position_m: last.map_or(0.0, |r| r.position_m),
            segment_timings,
        }
    }
}

/// Signed contraction angle: the sign remembers which drive direction
/// wound the coupler, so a command reversal unwinds before rewinding.
struct SimState {
    theta_signed_rad: f64,
    position_m: f64,
}

struct StepRecord {
    delta_r_mm: f64,
    contact_radius_mm: f64,
    mode: Mode,
    torque_nmm: f64,
    ground_speed_mps: f64,
}

fn advance_morph(
    state: &mut SimState,
    design: &WheelDesign,
    scenario: &Scenario,
    dir: f64,
    dt_s: f64,
) -> Result<StepRecord> {
    let omega = scenario.vehicle.omega_rad_s();
    let f_res = resistance_force(
        &scenario.terrain,
        state.position_m,
        scenario.vehicle.total_mass_kg(),
        design.gravity_mps2,
        scenario.vehicle.wheel_count,
    )?
    .max(0.0);
    let tau_max = scenario.motor.max_torque_nmm;

    let mut budget_rad = omega * dt_s;
    let mut mode = Mode::RadiusVariation;
    let mut torque = 0.0;
    let mut speed = 0.0;

    // unwind any contraction wound in the opposite direction first
    let wound = state.theta_signed_rad * dir;
    if wound < 0.0 {
        let unwound = wound.abs().min(budget_rad);
        budget_rad -= unwound;
        state.theta_signed_rad += dir * unwound;
        if budget_rad <= 0.0 || state.theta_signed_rad * dir < 0.0 {
            let delta_r = design.contraction_mm(state.theta_signed_rad.abs())?;
            return Ok(StepRecord {
                delta_r_mm: delta_r,
                contact_radius_mm: design.contact_radius_mm(delta_r),
                mode: Mode::RadiusVariation,
                torque_nmm: 0.0,
                ground_speed_mps: 0.0,
            });
        }
    }

    let theta = state.theta_signed_rad.abs();
    let start = if scenario.allow_reexpansion { 0.0 } else { theta };
    let outcome = march_cascade(design, start, f_res, tau_max)?;
    let target = outcome.theta_rad;

    if theta + 1e-12 < target {
        // contraction phase: the drive angle tracks the commanded motor
        // angle while the wheel holds position
        let advanced = (target - theta).min(budget_rad);
        budget_rad -= advanced;
        state.theta_signed_rad = dir * (theta + advanced);
        torque = design
            .input_torque_nmm(state.theta_signed_rad.abs())?
            .clamp(0.0, tau_max);
    } else if target + 1e-12 < theta {
        // re-expansion: the spring drives the return, the motor freewheels
        let returned = (theta - target).min(budget_rad);
        budget_rad -= returned;
        state.theta_signed_rad = dir * (theta - returned);
        torque = 0.0;
    }

    let at_target = (state.theta_signed_rad.abs() - target).abs() <= 1e-12;
    let delta_r = design.contraction_mm(state.theta_signed_rad.abs())?;
    let contact = design.contact_radius_mm(delta_r);

    if at_target && budget_rad > 0.0 {
        match outcome.end {
            CascadeEnd::MotorLimited => {
                mode = Mode::Stall;
                torque = tau_max;
            }
            CascadeEnd::Rolls | CascadeEnd::CapReached => {
                let tau_need = (f_res * contact * (1.0 + DRIVE_SHADE)).max(1e-12);
                if tau_need <= tau_max {
                    mode = Mode::DirectDrive;
                    torque = tau_need;
                    speed = dir * omega * contact / 1000.0;
                    state.position_m += speed * (budget_rad / omega);
                } else {
                    mode = Mode::Stall;
                    torque = tau_max;
                }
            }
        }
    }

    Ok(StepRecord {
        delta_r_mm: delta_r,
        contact_radius_mm: contact,
        mode,
        torque_nmm: torque,
        ground_speed_mps: speed,
    })
}

fn advance_fixed(
    state: &mut SimState,
    radius_mm: f64,
    scenario: &Scenario,
    dir: f64,
    dt_s: f64,
) -> Result<StepRecord> {
    let omega = scenario.vehicle.omega_rad_s();
    let f_res = resistance_force(
        &scenario.terrain,
        state.position_m,
        scenario.vehicle.total_mass_kg(),
        scenario.vehicle.wheel.gravity_mps2,
        scenario.vehicle.wheel_count,
    )?
    .max(0.0);
    let tau_need = f_res * radius_mm;
    if tau_need > scenario.motor.max_torque_nmm {
        return Ok(StepRecord {
            delta_r_mm: 0.0,
            contact_radius_mm: radius_mm,
            mode: Mode::Stall,
            torque_nmm: scenario.motor.max_torque_nmm,
            ground_speed_mps: 0.0,
        });
    }
    let speed = dir * omega * radius_mm / 1000.0;
    state.position_m += speed * dt_s;
    Ok(StepRecord {
        delta_r_mm: 0.0,
        contact_radius_mm: radius_mm,
        mode: Mode::DirectDrive,
        torque_nmm: tau_need,
        ground_speed_mps: speed,
    })
}

fn run_with_direction(
    scenario: &Scenario,
    variant: WheelVariant,
    dir_at: impl Fn(f64) -> f64,
) -> Result<SimTrace> {
    scenario.validate()?;
    let design = match variant {
        WheelVariant::Morph => Some(scenario.vehicle.effective_wheel_design()?),
        WheelVariant::Fixed(_) => None,
    };
    let base_dir = scenario.vehicle.commanded_speed_rpm.signum();
    let steps = (scenario.duration_s / scenario.dt_s).round() as usize;
    let mut state = SimState {
        theta_signed_rad: 0.0,
        position_m: 0.0,
    };
    let mut rows = Vec::with_capacity(steps);
    for k in 0..steps {
        let t = scenario.dt_s * (k as f64 + 1.0);
        let dir = base_dir * dir_at(t);
        let rec = match (variant, &design) {
            (WheelVariant::Morph, Some(d)) => {
                advance_morph(&mut state, d, scenario, dir, scenario.dt_s)?
            }
            (WheelVariant::Fixed(r), _) => {
                advance_fixed(&mut state, r, scenario, dir, scenario.dt_s)?
            }
            _ => unreachable!("morph variant always carries a design"),
        };
        rows.push(TraceRow {
            t_s: t,
            position_m: state.position_m,
            delta_r_mm: rec.delta_r_mm,
            effective_radius_mm: rec.contact_radius_mm,
            mode: rec.mode,
            motor_torque_nmm: rec.torque_nmm,
            motor_current_a: scenario.motor.current_a(rec.torque_nmm),
            ground_speed_mps: rec.ground_speed_mps,
        });
    }
    Ok(SimTrace { rows })
}

/// Deterministic quasi-static run of one wheel variant over the scenario.
pub fn run(scenario: &Scenario, variant: WheelVariant) -> Result<SimTrace> {
    run_with_direction(scenario, variant, |_| 1.0)
}

/// Single run whose command direction flips sign at `flip_at_s`.
pub fn run_with_reversal(scenario: &Scenario, flip_at_s: f64) -> Result<SimTrace> {
    run_with_direction(scenario, WheelVariant::Morph, move |t| {
        if t <= flip_at_s + 1e-12 {
            1.0
        } else {
            -1.0
        }
    })
}

#[derive(Debug, Clone)]
pub struct LabeledTrace {
    pub label: String,
    pub trace: SimTrace,
}

/// Runs every variant over the identical scenario for side-by-side
/// comparison.
pub fn compare_wheels(scenario: &Scenario, variants: &[WheelVariant]) -> Result<Vec<LabeledTrace>> {
    if variants.len() < 2 {
        return Err(MorphError::InvalidInput(
            "comparison needs at least two wheel variants".into(),
        ));
    }
    variants
        .iter()
        .map(|&v| {
            Ok(LabeledTrace {
                label: v.label(),
                trace: run(scenario, v)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Divergence {
    pub index: usize,
    pub t_s: f64,
    pub field: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetryReport {
    pub max_abs_delta_r_diff_mm: f64,
    pub modes_identical: bool,
    pub first_divergence: Option<Divergence>,
    pub pass: bool,
}

/// Runs the scenario forward and reversed and checks that the contraction
/// trajectory is direction-blind.
pub fn bidirectional_check(scenario: &Scenario) -> Result<(SymmetryReport, SimTrace, SimTrace)> {
    let mut forward_scenario = scenario.clone();
    forward_scenario.vehicle.commanded_speed_rpm = scenario.vehicle.commanded_speed_rpm.abs();
    let mut reverse_scenario = scenario.clone();
    reverse_scenario.vehicle.commanded_speed_rpm = -scenario.vehicle.commanded_speed_rpm.abs();

    let forward = run(&forward_scenario, WheelVariant::Morph)?;
    let reverse = run(&reverse_scenario, WheelVariant::Morph)?;

    let mut max_diff = 0.0_f64;
    let mut modes_identical = true;
    let mut first_divergence = None;
    for (i, (f, r)) in forward.rows.iter().zip(reverse.rows.iter()).enumerate() {
        let diff = (f.delta_r_mm - r.delta_r_mm).abs();
        if diff > max_diff {
            max_diff = diff;
        }
        if first_divergence.is_none() && diff > 1e-9 {
            first_divergence = Some(Divergence {
                index: i,
                t_s: f.t_s,
                field: "delta_r_mm".into(),
            });
        }
        if f.mode != r.mode {
            modes_identical = false;
            if first_divergence.is_none() {
                first_divergence = Some(Divergence {
                    index: i,
                    t_s: f.t_s,
                    field: "mode".into(),
                });
            }
        }
    }
    let pass = max_diff <= 1e-9 && modes_identical;
    let report = SymmetryReport {
        max_abs_delta_r_diff_mm: max_diff,
        modes_identical,
        first_divergence,
        pass,
    };
    Ok((report, forward, reverse))
}
