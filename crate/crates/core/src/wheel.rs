//! Kinematics and kinetics of the radius-changing wheel mechanism.
//!
//! Unit conventions: lengths in mm, forces in N, torques in N·mm, angles in
//! rad unless the name says otherwise. Masses in kg enter the force balance
//! through the configured gravity.

use std::f64::consts::FRAC_PI_2;

use crate::error::{MorphError, Result};

/// Standard gravity, m/s².
pub const STANDARD_GRAVITY_MPS2: f64 = 9.80665;

/// Crank and slider pair that converts drive angle lag into radial stroke.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplerGeometry {
    pub crank_length_mm: f64,
    pub slider_length_mm: f64,
}

impl CouplerGeometry {
    /// Validates lengths. The slider must stay short of the fold at 2·crank.
    pub fn new(crank_length_mm: f64, slider_length_mm: f64) -> Result<Self> {
        if !(crank_length_mm > 0.0) || !(slider_length_mm > 0.0) {
            return Err(MorphError::InvalidGeometry(format!(
                "coupler lengths must be positive, got crank {crank_length_mm} mm, slider {slider_length_mm} mm"
            )));
        }
        if slider_length_mm >= 2.0 * crank_length_mm {
            return Err(MorphError::InvalidGeometry(format!(
                "slider {slider_length_mm} mm reaches the singular fold, requires slider < {} mm",
                2.0 * crank_length_mm
            )));
        }
        Ok(Self { crank_length_mm, slider_length_mm })
    }

    fn check_domain(&self, theta_d_rad: f64) -> Result<f64> {
        if !theta_d_rad.is_finite() || theta_d_rad < -1e-12 || theta_d_rad > FRAC_PI_2 + 1e-12 {
            return Err(MorphError::InvalidInput(format!(
                "drive angle {theta_d_rad} rad outside [0, pi/2]"
            )));
        }
        let s = self.crank_length_mm * theta_d_rad.sin();
        let arg = self.slider_length_mm * self.slider_length_mm - s * s;
        if arg < 0.0 {
            return Err(MorphError::InvalidInput(format!(
                "drive angle {theta_d_rad} rad beyond the reach of this coupler"
            )));
        }
        Ok(arg)
    }

    /// Radial contraction produced by a drive angle lag.
    pub fn contraction_mm(&self, theta_d_rad: f64) -> Result<f64> {
        let arg = self.check_domain(theta_d_rad)?;
        let la = self.crank_length_mm;
        let lb = self.slider_length_mm;
        Ok((la + lb) - (la * theta_d_rad.cos() + arg.sqrt()))
    }

    /// Analytic derivative of the contraction with respect to the drive angle.
    pub fn jacobian_mm_per_rad(&self, theta_d_rad: f64) -> Result<f64> {
        let arg = self.check_domain(theta_d_rad)?;
        let root = arg.sqrt();
        if root < 1e-9 * self.slider_length_mm {
            return Err(MorphError::Singular(format!(
                "coupler near its fold at {theta_d_rad} rad"
            )));
        }
        let la = self.crank_length_mm;
        let (sin, cos) = theta_d_rad.sin_cos();
        Ok(la * sin + la * la * sin * cos / root)
    }

    /// Largest contraction this coupler can reach on the monotone branch.
    pub fn max_contraction_mm(&self) -> f64 {
        let la = self.crank_length_mm;
        let lb = self.slider_length_mm;
        if lb >= la {
            // full quarter turn is reachable
            (la + lb) - (lb * lb - la * la).sqrt()
        } else {
            // stroke ends where the slider folds flat
            let theta = (lb / la).asin();
            (la + lb) - la * theta.cos()
        }
    }

    /// Inverse of `contraction_mm` by bisection on the monotone branch.
    pub fn theta_for_contraction(&self, delta_r_mm: f64) -> Result<f64> {
        if !delta_r_mm.is_finite() || delta_r_mm < -1e-12 {
            return Err(MorphError::InvalidInput(format!(
                "contraction {delta_r_mm} mm is negative"
            )));
        }
        let target = delta_r_mm.max(0.0);
        let max = self.max_contraction_mm();
        if target > max + 1e-9 {
            return Err(MorphError::InvalidInput(format!(
                "contraction {target} mm exceeds the reachable {max} mm"
            )));
        }
        let mut lo = 0.0f64;
        let mut hi = if self.slider_length_mm >= self.crank_length_mm {
            FRAC_PI_2
        } else {
            (self.slider_length_mm / self.crank_length_mm).asin()
        };
        for _ in 0..90 {
            let mid = 0.5 * (lo + hi);
            let c = self.contraction_mm(mid)?;
            if c < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Spring-loaded symmetric linkage that guides each tire segment radially.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrutGeometry {
    pub link_length_mm: f64,
    pub max_angle_deg: f64,
    pub constraint_length_mm: f64,
}

impl StrutGeometry {
    pub fn new(link_length_mm: f64, max_angle_deg: f64, constraint_length_mm: f64) -> Result<Self> {
        if !(link_length_mm > 0.0) {
            return Err(MorphError::InvalidGeometry(format!(
                "strut link length must be positive, got {link_length_mm} mm"
            )));
        }
        if !(max_angle_deg > 0.0 && max_angle_deg < 90.0) {
            return Err(MorphError::InvalidGeometry(format!(
                "strut angle limit must lie in (0, 90) deg, got {max_angle_deg}"
            )));
        }
        if !(constraint_length_mm >= 0.0) {
            return Err(MorphError::InvalidGeometry(format!(
                "strut constraint length must be non-negative, got {constraint_length_mm} mm"
            )));
        }
        Ok(Self { link_length_mm, max_angle_deg, constraint_length_mm })
    }

    pub fn max_angle_rad(&self) -> f64 {
        self.max_angle_deg.to_radians()
    }

    /// Contraction available within the rated link angle.
    pub fn stroke_mm(&self) -> f64 {
        2.0 * self.link_length_mm * (1.0 - self.max_angle_rad().cos())
    }

    /// Contraction produced by a link angle.
    pub fn contraction_mm(&self, theta_s_rad: f64) -> Result<f64> {
        if !theta_s_rad.is_finite() || theta_s_rad < -1e-12 || theta_s_rad > FRAC_PI_2 + 1e-12 {
            return Err(MorphError::InvalidInput(format!(
                "strut angle {theta_s_rad} rad outside [0, pi/2]"
            )));
        }
        Ok(2.0 * self.link_length_mm * (1.0 - theta_s_rad.cos()))
    }

    /// Link angle required for a contraction.
    pub fn angle_for_contraction(&self, delta_r_mm: f64) -> Result<f64> {
        let span = 2.0 * self.link_length_mm;
        if !delta_r_mm.is_finite() || delta_r_mm < -1e-12 || delta_r_mm > span + 1e-12 {
            return Err(MorphError::InvalidInput(format!(
                "contraction {delta_r_mm} mm outside the strut stroke [0, {span}] mm"
            )));
        }
        Ok(((span - delta_r_mm.max(0.0)) / span).clamp(-1.0, 1.0).acos())
    }

    /// Derivative of the contraction with respect to the link angle.
    pub fn jacobian_mm_per_rad(&self, theta_s_rad: f64) -> Result<f64> {
        if !theta_s_rad.is_finite() || theta_s_rad < -1e-12 || theta_s_rad > FRAC_PI_2 + 1e-12 {
            return Err(MorphError::InvalidInput(format!(
                "strut angle {theta_s_rad} rad outside [0, pi/2]"
            )));
        }
        Ok(2.0 * self.link_length_mm * theta_s_rad.sin())
    }
}

/// Torsional spring bank acting at the strut pivots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpringSpec {
    /// Stiffness of one spring, N·mm/deg.
    pub stiffness_nmm_per_deg: f64,
    pub count: u32,
    /// Angular clearance before the springs engage, deg. Zero by default.
    pub backlash_deg: f64,
}

impl SpringSpec {
    pub fn new(stiffness_nmm_per_deg: f64, count: u32, backlash_deg: f64) -> Result<Self> {
        if !(stiffness_nmm_per_deg > 0.0) {
            return Err(MorphError::InvalidGeometry(format!(
                "spring stiffness must be positive, got {stiffness_nmm_per_deg} N·mm/deg"
            )));
        }
        if count < 1 {
            return Err(MorphError::InvalidGeometry("spring count must be at least 1".into()));
        }
        if !(backlash_deg >= 0.0) {
            return Err(MorphError::InvalidGeometry(format!(
                "spring backlash must be non-negative, got {backlash_deg} deg"
            )));
        }
        Ok(Self { stiffness_nmm_per_deg, count, backlash_deg })
    }

    /// Bank stiffness in N·mm/rad. Exact unit conversion of count · unit stiffness.
    pub fn total_stiffness_nmm_per_rad(&self) -> f64 {
        self.stiffness_nmm_per_deg * f64::from(self.count) * 180.0 / std::f64::consts::PI
    }

    pub fn backlash_rad(&self) -> f64 {
        self.backlash_deg.to_radians()
    }
}

/// Full parameter set of one wheel.
///
/// Construct through `new` or `Default`; the constructor checks the
/// cross-component invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WheelDesign {
    pub coupler: CouplerGeometry,
    pub strut: StrutGeometry,
    pub spring: SpringSpec,
    /// Fully expanded outer radius, mm.
    pub initial_radius_mm: f64,
    /// Smallest radius the contact patch can reach, mm.
    pub min_contact_radius_mm: f64,
    /// Hard stop on the contraction stroke, mm.
    pub contraction_cap_mm: f64,
    pub segment_count: u32,
    pub wheel_weight_kg: f64,
    pub gravity_mps2: f64,
}

impl Default for WheelDesign {
    fn default() -> Self {
        Self {
            coupler: CouplerGeometry { crank_length_mm: 30.0, slider_length_mm: 40.0 },
            strut: StrutGeometry {
                link_length_mm: 25.0,
                max_angle_deg: 74.0,
                constraint_length_mm: 5.0,
            },
            spring: SpringSpec { stiffness_nmm_per_deg: 2.14, count: 12, backlash_deg: 0.0 },
            initial_radius_mm: 80.0,
            min_contact_radius_mm: 42.0,
            contraction_cap_mm: 40.0,
            segment_count: 6,
            wheel_weight_kg: 2.8,
            gravity_mps2: STANDARD_GRAVITY_MPS2,
        }
    }
}

impl WheelDesign {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        coupler: CouplerGeometry,
        strut: StrutGeometry,
        spring: SpringSpec,
        initial_radius_mm: f64,
        min_contact_radius_mm: f64,
        contraction_cap_mm: f64,
        segment_count: u32,
        wheel_weight_kg: f64,
        gravity_mps2: f64,
    ) -> Result<Self> {
        let design = Self {
            coupler,
            strut,
            spring,
            initial_radius_mm,
            min_contact_radius_mm,
            contraction_cap_mm,
            segment_count,
            wheel_weight_kg,
            gravity_mps2,
        };
        design.validate()?;
        Ok(design)
    }

    pub fn validate(&self) -> Result<()> {
        CouplerGeometry::new(self.coupler.crank_length_mm, self.coupler.slider_length_mm)?;
        StrutGeometry::new(
            self.strut.link_length_mm,
            self.strut.max_angle_deg,
            self.strut.constraint_length_mm,
        )?;
        SpringSpec::new(self.spring.stiffness_nmm_per_deg, self.spring.count, self.spring.backlash_deg)?;
        if !(self.min_contact_radius_mm > 0.0) || self.initial_radius_mm <= self.min_contact_radius_mm {
            return Err(MorphError::InvalidGeometry(format!(
                "radii must satisfy initial {} > min contact {} > 0",
                self.initial_radius_mm, self.min_contact_radius_mm
            )));
        }
        if self.segment_count < 3 {
            return Err(MorphError::InvalidGeometry(format!(
                "segment count must be at least 3, got {}",
                self.segment_count
            )));
        }
        if !(self.wheel_weight_kg >= 0.0) {
            return Err(MorphError::InvalidGeometry(format!(
                "wheel weight must be non-negative, got {} kg",
                self.wheel_weight_kg
            )));
        }
        if !(self.gravity_mps2 > 0.0) {
            return Err(MorphError::InvalidGeometry(format!(
                "gravity must be positive, got {} m/s²",
                self.gravity_mps2
            )));
        }
        if !(self.contraction_cap_mm > 0.0) {
            return Err(MorphError::InvalidGeometry(format!(
                "contraction cap must be positive, got {} mm",
                self.contraction_cap_mm
            )));
        }
        if self.contraction_cap_mm > self.coupler.max_contraction_mm() + 1e-9 {
            return Err(MorphError::InvalidGeometry(format!(
                "contraction cap {} mm exceeds the coupler stroke {} mm",
                self.contraction_cap_mm,
                self.coupler.max_contraction_mm()
            )));
        }
        if self.contraction_cap_mm >= 2.0 * self.strut.link_length_mm {
            return Err(MorphError::InvalidGeometry(format!(
                "contraction cap {} mm exceeds the strut span {} mm",
                self.contraction_cap_mm,
                2.0 * self.strut.link_length_mm
            )));
        }
        if self.contraction_cap_mm >= self.initial_radius_mm {
            return Err(MorphError::InvalidGeometry(format!(
                "contraction cap {} mm exceeds the wheel radius {} mm",
                self.contraction_cap_mm, self.initial_radius_mm
            )));
        }
        Ok(())
    }

    pub fn with_wheel_weight(&self, wheel_weight_kg: f64) -> Result<Self> {
        let mut d = *self;
        d.wheel_weight_kg = wheel_weight_kg;
        d.validate()?;
        Ok(d)
    }

    /// Wheel weight expressed as a force, N.
    pub fn weight_force_n(&self) -> f64 {
        self.wheel_weight_kg * self.gravity_mps2
    }

    /// Drive angle at which the contraction hits the hard stop.
    pub fn theta_cap_rad(&self) -> f64 {
        self.coupler
            .theta_for_contraction(self.contraction_cap_mm)
            .expect("cap is validated against the coupler stroke")
    }

    pub fn contraction_mm(&self, theta_d_rad: f64) -> Result<f64> {
        self.coupler.contraction_mm(theta_d_rad)
    }

    /// Contact radius with the stroke floor applied, mm.
    pub fn contact_radius_mm(&self, delta_r_mm: f64) -> f64 {
        (self.initial_radius_mm - delta_r_mm).max(self.min_contact_radius_mm)
    }

    /// Kinematically consistent state at a drive angle.
    pub fn state_at(&self, theta_d_rad: f64) -> Result<WheelState> {
        let cap = self.theta_cap_rad();
        if !theta_d_rad.is_finite() || theta_d_rad < -1e-12 || theta_d_rad > cap + 1e-9 {
            return Err(MorphError::InvalidInput(format!(
                "drive angle {theta_d_rad} rad outside the stroke [0, {cap}]"
            )));
        }
        let theta = theta_d_rad.clamp(0.0, cap);
        let delta_r_mm = self.coupler.contraction_mm(theta)?;
        Ok(WheelState {
            theta_d_rad: theta,
            delta_r_mm,
            effective_radius_mm: self.initial_radius_mm - delta_r_mm,
        })
    }

    /// Radial force the spring bank opposes contraction with, N.
    ///
    /// The 0/0 at zero contraction resolves to the analytic limit
    /// k_s / (2 · link length).
    pub fn spring_force_n(&self, delta_r_mm: f64) -> Result<f64> {
        let theta_s = self.strut.angle_for_contraction(delta_r_mm)?;
        let ks = self.spring.total_stiffness_nmm_per_rad();
        let backlash = self.spring.backlash_rad();
        if backlash == 0.0 && theta_s < 1e-9 {
            return Ok(ks / (2.0 * self.strut.link_length_mm));
        }
        if theta_s <= backlash {
            return Ok(0.0);
        }
        let torque = ks * (theta_s - backlash);
        let jac = self.strut.jacobian_mm_per_rad(theta_s)?;
        Ok(torque / jac)
    }

    /// Drive torque balanced by the spring and weight at a drive angle, N·mm.
    pub fn input_torque_nmm(&self, theta_d_rad: f64) -> Result<f64> {
        let jac = if theta_d_rad == 0.0 {
            0.0
        } else {
            self.coupler.jacobian_mm_per_rad(theta_d_rad)?
        };
        if jac == 0.0 {
            return Ok(0.0);
        }
        let delta_r = self.coupler.contraction_mm(theta_d_rad)?;
        let fs = self.spring_force_n(delta_r)?;
        Ok(jac * (fs - self.weight_force_n()))
    }

    /// Radial force the coupler exerts for a given drive torque, N.
    pub fn contraction_force_n(&self, theta_d_rad: f64, tau_in_nmm: f64) -> Result<f64> {
        let jac = self.coupler.jacobian_mm_per_rad(theta_d_rad)?;
        if jac.abs() < 1e-12 {
            return Err(MorphError::Singular(
                "contraction force is undefined at zero drive angle".into(),
            ));
        }
        Ok(tau_in_nmm / jac)
    }
}

/// Instantaneous wheel configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WheelState {
    pub theta_d_rad: f64,
    pub delta_r_mm: f64,
    pub effective_radius_mm: f64,
}

/// Tractive force at the contact for a torque through a radius, N.
pub fn output_force_n(tau_nmm: f64, radius_mm: f64) -> Result<f64> {
    if !(radius_mm > 0.0) {
        return Err(MorphError::InvalidInput(format!(
            "radius must be positive, got {radius_mm} mm"
        )));
    }
    Ok(tau_nmm / radius_mm)
}
