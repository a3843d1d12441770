//! Threshold logic of the wheel: which of the three modes a loading
//! condition lands in, and where the contraction settles under a torque.

use serde::{Deserialize, Serialize};

use crate::error::{MorphError, Result};
use crate::wheel::{output_force_n, WheelDesign, WheelState};

/// Number of samples used when walking the torque curve.
const SCAN_POINTS: usize = 2000;
/// Pre-scan of the torque curve tolerates dips up to this fraction of the
/// running maximum before a design is rejected as non-monotone.
const DIP_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    DirectDrive,
    RadiusVariation,
    Stall,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::DirectDrive => "direct_drive",
            Mode::RadiusVariation => "radius_variation",
            Mode::Stall => "stall",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Forces that decided a mode, recorded so the decision can be re-checked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecidingForces {
    pub f_out_n: f64,
    pub f_res_n: f64,
    pub f_c_n: f64,
    pub f_s_n: f64,
    pub weight_force_n: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeState {
    pub mode: Mode,
    pub forces: DecidingForces,
}

/// Outcome of the contraction settling under an applied torque.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumSolution {
    pub theta_d_rad: f64,
    pub delta_r_mm: f64,
    pub effective_radius_mm: f64,
    pub converged: bool,
    pub residual_nmm: f64,
}

/// Operating point reached by ramping torque against a resistance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSolution {
    pub final_state: WheelState,
    pub final_mode: ModeState,
    pub tau_used_nmm: f64,
    pub f_out_achieved_n: f64,
}

/// Smallest input torque that starts moving the contraction at a drive angle.
///
/// Identical to the static torque balance; zero at rest because the coupler
/// has no leverage there.
pub fn transformation_threshold_torque(design: &WheelDesign, theta_d_rad: f64) -> Result<f64> {
    design.input_torque_nmm(theta_d_rad)
}

/// Applies the hierarchical mode decision to one loading condition.
///
/// At zero drive angle the coupler has no leverage, so any positive torque
/// produces an unbounded radial force and the radial comparison is taken in
/// the limit.
pub fn classify_mode(
    design: &WheelDesign,
    state: &WheelState,
    tau_in_nmm: f64,
    f_res_n: f64,
) -> Result<ModeState> {
    if !(tau_in_nmm >= 0.0) {
        return Err(MorphError::InvalidInput(format!(
            "input torque must be non-negative, got {tau_in_nmm} N·mm"
        )));
    }
    if f_res_n < 0.0 || f_res_n.is_nan() {
        return Err(MorphError::InvalidInput(format!(
            "resistance force must be non-negative, got {f_res_n} N"
        )));
    }
    let f_out = output_force_n(tau_in_nmm, state.effective_radius_mm)?;
    let f_s = design.spring_force_n(state.delta_r_mm)?;
    let weight = design.weight_force_n();
    let jac = design.coupler.jacobian_mm_per_rad(state.theta_d_rad)?;
    let f_c = if jac.abs() < 1e-12 {
        if tau_in_nmm > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        tau_in_nmm / jac
    };
    let forces = DecidingForces {
        f_out_n: f_out,
        f_res_n,
        f_c_n: f_c,
        f_s_n: f_s,
        weight_force_n: weight,
    };
    let mode = if f_out > f_res_n {
        Mode::DirectDrive
    } else if f_c > f_s - weight {
        Mode::RadiusVariation
    } else {
        Mode::Stall
    };
    Ok(ModeState { mode, forces })
}

/// Walks the torque curve and rejects designs whose curve dips more than
/// `DIP_TOLERANCE` below its running maximum.
fn prescan_curve(design: &WheelDesign) -> Result<(Vec<f64>, Vec<f64>)> {
    let cap = design.theta_cap_rad();
    let n = 200usize;
    let mut thetas = Vec::with_capacity(n + 1);
    let mut taus = Vec::with_capacity(n + 1);
    let mut running_max = f64::NEG_INFINITY;
    for k in 0..=n {
        let theta = cap * k as f64 / n as f64;
        let tau = design.input_torque_nmm(theta)?;
        if running_max > 0.0 && tau < running_max * (1.0 - DIP_TOLERANCE) {
            return Err(MorphError::InfeasibleDesign(format!(
                "torque curve is not monotone: {tau:.3} N·mm at {theta:.4} rad after a maximum of {running_max:.3} N·mm"
            )));
        }
        running_max = running_max.max(tau);
        thetas.push(theta);
        taus.push(tau);
    }
    Ok((thetas, taus))
}

/// Contraction state that balances an applied torque, found by bisection on
/// the monotone torque curve.
pub fn equilibrium_delta_r(design: &WheelDesign, tau_applied_nmm: f64) -> Result<EquilibriumSolution> {
    if !(tau_applied_nmm >= 0.0) {
        return Err(MorphError::InvalidInput(format!(
            "applied torque must be non-negative, got {tau_applied_nmm} N·mm"
        )));
    }
    let (thetas, taus) = prescan_curve(design)?;
    let cap = *thetas.last().expect("prescan is non-empty");
    let tau_cap = *taus.last().expect("prescan is non-empty");
    let solution_at = |theta: f64, converged: bool, residual: f64| -> Result<EquilibriumSolution> {
        let state = design.state_at(theta)?;
        Ok(EquilibriumSolution {
            theta_d_rad: state.theta_d_rad,
            delta_r_mm: state.delta_r_mm,
            effective_radius_mm: state.effective_radius_mm,
            converged,
            residual_nmm: residual,
        })
    };
    if tau_applied_nmm == 0.0 {
        return solution_at(0.0, true, 0.0);
    }
    if tau_applied_nmm > tau_cap {
        return solution_at(cap, false, tau_cap - tau_applied_nmm);
    }
    let bracket = thetas
        .windows(2)
        .zip(taus.windows(2))
        .find(|(_, t)| t[0] <= tau_applied_nmm && tau_applied_nmm <= t[1])
        .map(|(w, _)| (w[0], w[1]));
    let (mut lo, mut hi) = bracket.ok_or_else(|| {
        MorphError::NoConvergence(format!(
            "no bracket found for {tau_applied_nmm} N·mm on the torque curve"
        ))
    })?;
    let mut theta = 0.5 * (lo + hi);
    let mut residual = design.input_torque_nmm(theta)? - tau_applied_nmm;
    for _ in 0..200 {
        if residual.abs() < 1e-6 {
            return solution_at(theta, true, residual);
        }
        if residual > 0.0 {
            hi = theta;
        } else {
            lo = theta;
        }
        theta = 0.5 * (lo + hi);
        residual = design.input_torque_nmm(theta)? - tau_applied_nmm;
    }
    if residual.abs() < 1e-6 {
        return solution_at(theta, true, residual);
    }
    Err(MorphError::NoConvergence(format!(
        "equilibrium residual {residual} N·mm after 200 bisection steps"
    )))
}

/// Where a torque ramp against a resistance ends up.
pub(crate) enum CascadeEnd {
    /// Rolling threshold reached first; the wheel drives at this angle.
    Rolls,
    /// Contraction threshold passed the motor limit; the wheel rests at the
    /// equilibrium of the motor's maximum torque.
    MotorLimited,
    /// Hard stop reached with the rolling threshold still out of reach.
    CapReached,
}

pub(crate) struct CascadeResult {
    pub theta_rad: f64,
    pub end: CascadeEnd,
}

/// Torque needed to overcome the resistance at a given drive angle.
fn rolling_torque(design: &WheelDesign, theta: f64, f_res_n: f64) -> Result<f64> {
    let delta_r = design.contraction_mm(theta)?;
    Ok(f_res_n * (design.initial_radius_mm - delta_r))
}

/// Quasi-static torque ramp from a starting drive angle.
///
/// The motor raises torque from zero at every angle; whichever threshold is
/// lower wins. While the contraction threshold stays below the rolling
/// threshold and below the motor limit, excess torque feeds the contraction
/// and the angle advances. Ties resolve toward rolling because the mode
/// decision is hierarchical.
pub(crate) fn march_cascade(
    design: &WheelDesign,
    theta_start_rad: f64,
    f_res_n: f64,
    tau_max_nmm: f64,
) -> Result<CascadeResult> {
    let cap = design.theta_cap_rad();
    let reaches = |theta: f64| -> Result<bool> {
        let tau_eq = design.input_torque_nmm(theta)?;
        Ok(tau_eq >= 0.0 && tau_eq >= rolling_torque(design, theta, f_res_n)?)
    };
    // the angle stops advancing when the rolling threshold drops below the
    // contraction threshold, or the contraction threshold passes the motor
    let stops = |theta: f64| -> Result<bool> {
        Ok(reaches(theta)? || design.input_torque_nmm(theta)? > tau_max_nmm)
    };
    let outcome_at = |theta: f64| -> Result<CascadeResult> {
        // ties resolve toward rolling because the mode decision is hierarchical
        let end = if reaches(theta)? { CascadeEnd::Rolls } else { CascadeEnd::MotorLimited };
        Ok(CascadeResult { theta_rad: theta, end })
    };
    let start = theta_start_rad.clamp(0.0, cap);
    if stops(start)? {
        return outcome_at(start);
    }
    let step = cap / SCAN_POINTS as f64;
    let first = (start / step).floor() as usize + 1;
    let mut prev = start;
    for k in first..=SCAN_POINTS {
        let theta = if k == SCAN_POINTS { cap } else { step * k as f64 };
        if stops(theta)? {
            let (mut lo, mut hi) = (prev, theta);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if stops(mid)? {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return outcome_at(hi);
        }
        prev = theta;
    }
    Ok(CascadeResult { theta_rad: cap, end: CascadeEnd::CapReached })
}

/// Ramps torque against a resistance and reports the operating point.
///
/// The returned mode is re-derived from the recorded forces, so the
/// result always satisfies the mode-defining inequalities.
pub fn drive_solution(design: &WheelDesign, f_res_n: f64, tau_max_nmm: f64) -> Result<DriveSolution> {
    if f_res_n < 0.0 || f_res_n.is_nan() {
        return Err(MorphError::InvalidInput(format!(
            "resistance force must be non-negative, got {f_res_n} N"
        )));
    }
    if !(tau_max_nmm > 0.0) {
        return Err(MorphError::InvalidInput(format!(
            "motor torque limit must be positive, got {tau_max_nmm} N·mm"
        )));
    }
    let outcome = march_cascade(design, 0.0, f_res_n, tau_max_nmm)?;
    let (theta, tau_used) = match outcome.end {
        CascadeEnd::Rolls => {
            let tau_roll = rolling_torque(design, outcome.theta_rad, f_res_n)?;
            // shade above the threshold so the drive condition holds strictly
            (outcome.theta_rad, (tau_roll * (1.0 + 1e-9)).max(1e-12))
        }
        CascadeEnd::MotorLimited => {
            // the boundary angle is where the contraction threshold meets the
            // motor limit; shade below it so the radial condition fails
            let tau = design.input_torque_nmm(outcome.theta_rad)?.max(0.0);
            (outcome.theta_rad, tau.min(tau_max_nmm) * (1.0 - 1e-9))
        }
        CascadeEnd::CapReached => {
            let tau_eq = design.input_torque_nmm(outcome.theta_rad)?.max(0.0);
            (outcome.theta_rad, tau_eq.min(tau_max_nmm) * (1.0 - 1e-9))
        }
    };
    let state = design.state_at(theta)?;
    let final_mode = classify_mode(design, &state, tau_used, f_res_n)?;
    Ok(DriveSolution {
        final_state: state,
        final_mode,
        tau_used_nmm: tau_used,
        f_out_achieved_n: output_force_n(tau_used, state.effective_radius_mm)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn defaults() -> WheelDesign {
        WheelDesign::default()
    }

    fn cap_angle() -> f64 {
        (1.0f64 / 9.0).acos()
    }

    #[test]
    fn direct_drive_when_output_beats_resistance() {
        let d = defaults();
        let state = d.state_at(0.5).unwrap();
        let tau = 20.0 * state.effective_radius_mm;
        let m = classify_mode(&d, &state, tau, 10.0).unwrap();
        assert_eq!(m.mode, Mode::DirectDrive);
        assert!(m.forces.f_out_n > m.forces.f_res_n);
    }

    #[test]
    fn radius_variation_when_blocked_but_above_threshold() {
        let d = defaults();
        let state = d.state_at(40.0f64.to_radians()).unwrap();
        let tau = d.input_torque_nmm(state.theta_d_rad).unwrap() * (1.0 + 1e-6);
        let m = classify_mode(&d, &state, tau, f64::INFINITY).unwrap();
        assert_eq!(m.mode, Mode::RadiusVariation);
        assert!(m.forces.f_c_n > m.forces.f_s_n - m.forces.weight_force_n);
    }

    #[test]
    fn stall_without_torque() {
        let d = defaults();
        let state = d.state_at(0.0).unwrap();
        let m = classify_mode(&d, &state, 0.0, 5.0).unwrap();
        assert_eq!(m.mode, Mode::Stall);
        assert_eq!(m.forces.f_c_n, 0.0);
    }

    #[test]
    fn any_positive_torque_at_rest_starts_transformation() {
        let d = defaults();
        let state = d.state_at(0.0).unwrap();
        let m = classify_mode(&d, &state, 1e-6, 5.0).unwrap();
        assert_eq!(m.mode, Mode::RadiusVariation);
    }

    #[test]
    fn threshold_equals_static_torque_everywhere() {
        let d = defaults();
        assert_eq!(transformation_threshold_torque(&d, 0.0).unwrap(), 0.0);
        for k in 0..=100 {
            let theta = cap_angle() * k as f64 / 100.0;
            assert_eq!(
                transformation_threshold_torque(&d, theta).unwrap(),
                d.input_torque_nmm(theta).unwrap()
            );
        }
    }

    #[test]
    fn mode_partition_is_exact() {
        let d = defaults();
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..1000 {
            let theta = rng.gen_range(0.0..cap_angle());
            let state = d.state_at(theta).unwrap();
            let tau = rng.gen_range(0.0..1200.0);
            let f_res = rng.gen_range(0.0..40.0);
            let m = classify_mode(&d, &state, tau, f_res).unwrap();
            let f = m.forces;
            let cond1 = f.f_out_n > f.f_res_n;
            let cond2 = f.f_c_n > f.f_s_n - f.weight_force_n;
            let expected = if cond1 {
                Mode::DirectDrive
            } else if cond2 {
                Mode::RadiusVariation
            } else {
                Mode::Stall
            };
            assert_eq!(m.mode, expected);
        }
    }

    #[test]
    fn equilibrium_at_zero_torque_is_rest() {
        let eq = equilibrium_delta_r(&defaults(), 0.0).unwrap();
        assert!(eq.converged);
        assert_eq!(eq.delta_r_mm, 0.0);
    }

    #[test]
    fn equilibrium_recovers_the_forward_angle() {
        let d = defaults();
        let theta = 60.0f64.to_radians();
        let tau = d.input_torque_nmm(theta).unwrap();
        let eq = equilibrium_delta_r(&d, tau).unwrap();
        assert!(eq.converged);
        assert!((eq.theta_d_rad - theta).abs() < 1e-6);
    }

    #[test]
    fn overload_reports_the_cap_state() {
        let d = defaults().with_wheel_weight(2.3).unwrap();
        let eq = equilibrium_delta_r(&d, 10_000.0).unwrap();
        assert!(!eq.converged);
        assert!((eq.delta_r_mm - 40.0).abs() < 1e-9);
        assert!(eq.residual_nmm < 0.0);
    }

    #[test]
    fn light_wheels_are_rejected_as_non_monotone() {
        for w in [0.5, 1.0] {
            let d = defaults().with_wheel_weight(w).unwrap();
            assert!(
                matches!(equilibrium_delta_r(&d, 100.0), Err(MorphError::InfeasibleDesign(_))),
                "weight {w} should fail the monotonicity pre-scan"
            );
        }
        for w in [1.8, 2.3, 2.8] {
            let d = defaults().with_wheel_weight(w).unwrap();
            assert!(equilibrium_delta_r(&d, 100.0).is_ok(), "weight {w} should pass");
        }
    }

    #[test]
    fn unloaded_drive_rolls_immediately() {
        let s = drive_solution(&defaults(), 0.0, 600.0).unwrap();
        assert_eq!(s.final_mode.mode, Mode::DirectDrive);
        assert_eq!(s.final_state.delta_r_mm, 0.0);
        assert!(s.f_out_achieved_n > 0.0);
    }

    #[test]
    fn moderate_resistance_drives_at_reduced_radius() {
        let d = defaults();
        let tau_max = d.input_torque_nmm(cap_angle()).unwrap();
        let s = drive_solution(&d, 11.0, tau_max).unwrap();
        assert_eq!(s.final_mode.mode, Mode::DirectDrive);
        assert!((s.final_state.delta_r_mm - 38.74799327018795).abs() < 1e-6);
        assert!(s.f_out_achieved_n > 11.0);
    }

    #[test]
    fn excess_resistance_stalls_for_any_motor() {
        let d = defaults();
        // 458.0 sits just under the end-of-stroke torque, so the motor tops
        // out a fraction of a millimetre before the cap; stronger motors
        // carry the contraction all the way there. Stall either way.
        for tau_max in [458.0, 600.0, 1e9] {
            let s = drive_solution(&d, 30.0, tau_max).unwrap();
            assert_eq!(s.final_mode.mode, Mode::Stall, "tau_max={tau_max}");
            if tau_max >= 600.0 {
                assert!((s.final_state.delta_r_mm - 40.0).abs() < 1e-9);
            } else {
                assert!(s.final_state.delta_r_mm > 39.0);
                let tau_at_stop = d.input_torque_nmm(s.final_state.theta_d_rad).unwrap();
                assert!((tau_at_stop - tau_max).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn weak_motor_stalls_partway() {
        let d = defaults();
        let s = drive_solution(&d, 30.0, 100.0).unwrap();
        assert_eq!(s.final_mode.mode, Mode::Stall);
        assert!(s.final_state.delta_r_mm < 40.0);
        assert!((d.input_torque_nmm(s.final_state.theta_d_rad).unwrap() - 100.0).abs() < 1e-3);
    }

    #[test]
    fn drive_outcome_reclassifies_to_itself() {
        let d = defaults();
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..300 {
            let f_res = rng.gen_range(0.0..20.0);
            let tau_max = rng.gen_range(50.0..800.0);
            let s = drive_solution(&d, f_res, tau_max).unwrap();
            let again = classify_mode(&d, &s.final_state, s.tau_used_nmm, f_res).unwrap();
            assert_eq!(again.mode, s.final_mode.mode);
        }
    }

    #[test]
    fn equilibrium_is_unique_across_bracket_choices() {
        let d = defaults();
        let tau = d.input_torque_nmm(1.0).unwrap();
        let reference = equilibrium_delta_r(&d, tau).unwrap().theta_d_rad;
        let cap = cap_angle();
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..50 {
            // random valid bracket around the root, then plain bisection
            let lo0 = rng.gen_range(0.0..reference);
            let hi0 = rng.gen_range(reference..cap);
            let (mut lo, mut hi) = (lo0, hi0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if d.input_torque_nmm(mid).unwrap() < tau {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            assert!((0.5 * (lo + hi) - reference).abs() < 1e-9);
        }
    }

    #[test]
    fn negative_inputs_are_rejected() {
        let d = defaults();
        let state = d.state_at(0.3).unwrap();
        assert!(classify_mode(&d, &state, -1.0, 0.0).is_err());
        assert!(classify_mode(&d, &state, 1.0, -1.0).is_err());
        assert!(equilibrium_delta_r(&d, -5.0).is_err());
        assert!(drive_solution(&d, -1.0, 100.0).is_err());
        assert!(drive_solution(&d, 1.0, 0.0).is_err());
    }
}
