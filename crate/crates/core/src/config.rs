//! TOML run configuration. Every physical key carries its unit in the
//! name; unknown keys are rejected; omitted keys take the reference
//! design's values so preset files only state what differs.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{MorphError, Result};
use crate::locomotion::{
    MotorModel, Scenario, TerrainProfile, TerrainSegment, VehicleSpec, WheelVariant,
};
use crate::wheel::{CouplerGeometry, SpringSpec, StrutGeometry, WheelDesign};

fn config_err(context: &str, err: impl std::fmt::Display) -> MorphError {
    MorphError::Config(format!("{context}: {err}"))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DesignConfig {
    pub crank_length_mm: f64,
    pub slider_length_mm: f64,
    pub strut_link_length_mm: f64,
    pub strut_max_angle_deg: f64,
    pub strut_constraint_length_mm: f64,
    pub spring_stiffness_nmm_per_deg: f64,
    pub spring_count: u32,
    pub spring_backlash_deg: f64,
    pub initial_radius_mm: f64,
    pub min_contact_radius_mm: f64,
    pub contraction_cap_mm: f64,
    pub segment_count: u32,
    pub wheel_weight_kg: f64,
    pub gravity_mps2: f64,
}

impl Default for DesignConfig {
    fn default() -> Self {
        let d = WheelDesign::default();
        Self {
            crank_length_mm: d.coupler.crank_length_mm,
            slider_length_mm: d.coupler.slider_length_mm,
            strut_link_length_mm: d.strut.link_length_mm,
            strut_max_angle_deg: d.strut.max_angle_deg,
            strut_constraint_length_mm: d.strut.constraint_length_mm,
            spring_stiffness_nmm_per_deg: d.spring.stiffness_nmm_per_deg,
            spring_count: d.spring.count,
            spring_backlash_deg: d.spring.backlash_deg,
            initial_radius_mm: d.initial_radius_mm,
            min_contact_radius_mm: d.min_contact_radius_mm,
            contraction_cap_mm: d.contraction_cap_mm,
            segment_count: d.segment_count,
            wheel_weight_kg: d.wheel_weight_kg,
            gravity_mps2: d.gravity_mps2,
        }
    }
}

impl DesignConfig {
    pub fn to_design(&self) -> Result<WheelDesign> {
        let build = || -> Result<WheelDesign> {
            let coupler = CouplerGeometry::new(self.crank_length_mm, self.slider_length_mm)?;
            let strut = StrutGeometry::new(
                self.strut_link_length_mm,
                self.strut_max_angle_deg,
                self.strut_constraint_length_mm,
            )?;
            let spring = SpringSpec::new(
                self.spring_stiffness_nmm_per_deg,
                self.spring_count,
                self.spring_backlash_deg,
            )?;
            WheelDesign::new(
                coupler,
                strut,
                spring,
                self.initial_radius_mm,
                self.min_contact_radius_mm,
                self.contraction_cap_mm,
                self.segment_count,
                self.wheel_weight_kg,
                self.gravity_mps2,
            )
        };
        build().map_err(|e| config_err("[design]", e))
    }
}

fn default_sweep_grid() -> usize {
    400
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSweepConfig {
    pub weights_kg: Vec<f64>,
    #[serde(default = "default_sweep_grid")]
    pub grid_points: usize,
}

impl ModelSweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.weights_kg.is_empty() {
            return Err(MorphError::Config(
                "[model_sweep] weights_kg must not be empty".into(),
            ));
        }
        if self.weights_kg.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(MorphError::Config(
                "[model_sweep] weights_kg must be finite and non-negative".into(),
            ));
        }
        if self.grid_points < 2 {
            return Err(MorphError::Config(
                "[model_sweep] grid_points must be at least 2".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StiffnessSweepConfig {
    pub stiffness_nmm_per_deg: Vec<f64>,
}

impl StiffnessSweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.stiffness_nmm_per_deg.is_empty() {
            return Err(MorphError::Config(
                "[stiffness_sweep] stiffness_nmm_per_deg must not be empty".into(),
            ));
        }
        if self.stiffness_nmm_per_deg.iter().any(|k| !(*k > 0.0)) {
            return Err(MorphError::Config(
                "[stiffness_sweep] stiffness values must be positive".into(),
            ));
        }
        Ok(())
    }
}

fn default_feasibility_grid() -> usize {
    100
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeasibilityConfig {
    pub w_min_kg: f64,
    pub w_max_kg: f64,
    #[serde(default = "default_feasibility_grid")]
    pub grid_points: usize,
}

impl FeasibilityConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.w_min_kg >= 0.0) || !(self.w_max_kg >= self.w_min_kg) {
            return Err(MorphError::Config(format!(
                "[feasibility] needs 0 <= w_min_kg <= w_max_kg, got [{}, {}]",
                self.w_min_kg, self.w_max_kg
            )));
        }
        if self.w_min_kg < self.w_max_kg && self.grid_points < 10 {
            return Err(MorphError::Config(
                "[feasibility] grid_points must be at least 10".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrictionConfig {
    pub weights_kg: Vec<f64>,
}

impl FrictionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.weights_kg.is_empty() {
            return Err(MorphError::Config(
                "[friction] weights_kg must not be empty".into(),
            ));
        }
        if self.weights_kg.iter().any(|w| !(*w > 0.0)) {
            return Err(MorphError::Config(
                "[friction] weights must be positive".into(),
            ));
        }
        Ok(())
    }
}

fn default_clearance_mm() -> f64 {
    10.0
}

fn default_delta_r_target_mm() -> f64 {
    40.0
}

fn default_amplitude_limit_pct() -> f64 {
    5.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DesignCheckConfig {
    pub clearance_mm: f64,
    pub delta_r_target_mm: f64,
    pub amplitude_limit_pct: f64,
}

impl Default for DesignCheckConfig {
    fn default() -> Self {
        Self {
            clearance_mm: default_clearance_mm(),
            delta_r_target_mm: default_delta_r_target_mm(),
            amplitude_limit_pct: default_amplitude_limit_pct(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    LoadSweep,
    Compare,
    Bidirectional,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleConfig {
    pub cart_mass_kg: f64,
    pub wheel_count: u32,
    pub commanded_speed_rpm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotorConfig {
    pub torque_constant_nmm_per_a: f64,
    pub no_load_current_a: f64,
    pub max_torque_nmm: f64,
    pub rated_speed_rpm: f64,
}

fn default_rolling_resistance() -> f64 {
    0.0
}

fn default_friction() -> f64 {
    0.8
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerrainConfig {
    pub length_m: f64,
    pub slope_deg: f64,
    #[serde(default = "default_rolling_resistance")]
    pub rolling_resistance: f64,
    #[serde(default = "default_friction")]
    pub friction: f64,
}

fn default_variants() -> Vec<String> {
    vec!["morph".into()]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub onboard_loads_kg: Option<Vec<f64>>,
    #[serde(default)]
    pub onboard_load_kg: f64,
    #[serde(default = "default_variants")]
    pub variants: Vec<String>,
    pub duration_s: f64,
    pub dt_s: f64,
    #[serde(default)]
    pub allow_reexpansion: bool,
    pub vehicle: VehicleConfig,
    pub motor: MotorConfig,
    pub terrain: Vec<TerrainConfig>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_s > 0.0) || !(self.duration_s >= self.dt_s) {
            return Err(MorphError::Config(format!(
                "[scenario] needs 0 < dt_s <= duration_s, got dt {} and duration {}",
                self.dt_s, self.duration_s
            )));
        }
        if !(self.vehicle.commanded_speed_rpm > 0.0) {
            return Err(MorphError::Config(
                "[scenario.vehicle] commanded_speed_rpm must be positive".into(),
            ));
        }
        if self.vehicle.commanded_speed_rpm > self.motor.rated_speed_rpm {
            return Err(MorphError::Config(format!(
                "[scenario] commanded speed {} rpm exceeds the motor rating of {} rpm",
                self.vehicle.commanded_speed_rpm, self.motor.rated_speed_rpm
            )));
        }
        if self.vehicle.wheel_count == 0 {
            return Err(MorphError::Config(
                "[scenario.vehicle] wheel_count must be at least 1".into(),
            ));
        }
        if self.terrain.is_empty() {
            return Err(MorphError::Config(
                "[scenario] needs at least one [[scenario.terrain]] segment".into(),
            ));
        }
        for v in &self.variants {
            WheelVariant::parse(v).map_err(|e| config_err("[scenario] variants", e))?;
        }
        match self.kind {
            ScenarioKind::LoadSweep => {
                let loads = self.onboard_loads_kg.as_ref().ok_or_else(|| {
                    MorphError::Config(
                        "[scenario] kind = \"load_sweep\" needs onboard_loads_kg".into(),
                    )
                })?;
                if loads.is_empty() {
                    return Err(MorphError::Config(
                        "[scenario] onboard_loads_kg must not be empty".into(),
                    ));
                }
                if loads.iter().any(|w| !w.is_finite() || *w < 0.0) {
                    return Err(MorphError::Config(
                        "[scenario] onboard loads must be finite and non-negative".into(),
                    ));
                }
            }
            ScenarioKind::Compare => {
                if self.variants.len() < 2 {
                    return Err(MorphError::Config(
                        "[scenario] kind = \"compare\" needs at least two variants".into(),
                    ));
                }
            }
            ScenarioKind::Bidirectional => {}
        }
        if !(self.onboard_load_kg >= 0.0) {
            return Err(MorphError::Config(
                "[scenario] onboard_load_kg must be non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn parsed_variants(&self) -> Vec<WheelVariant> {
        self.variants
            .iter()
            .map(|v| WheelVariant::parse(v).expect("variants are validated"))
            .collect()
    }

    pub fn to_scenario(&self, design: &WheelDesign, onboard_load_kg: f64) -> Result<Scenario> {
        let segments = self
            .terrain
            .iter()
            .map(|t| TerrainSegment {
                length_m: t.length_m,
                slope_deg: t.slope_deg,
                rolling_resistance: t.rolling_resistance,
                friction: t.friction,
            })
            .collect();
        let terrain =
            TerrainProfile::new(segments).map_err(|e| config_err("[scenario.terrain]", e))?;
        let scenario = Scenario {
            vehicle: VehicleSpec {
                cart_mass_kg: self.vehicle.cart_mass_kg,
                onboard_load_kg,
                wheel_count: self.vehicle.wheel_count,
                wheel: *design,
                commanded_speed_rpm: self.vehicle.commanded_speed_rpm,
            },
            motor: MotorModel {
                torque_constant_nmm_per_a: self.motor.torque_constant_nmm_per_a,
                no_load_current_a: self.motor.no_load_current_a,
                max_torque_nmm: self.motor.max_torque_nmm,
                rated_speed_rpm: self.motor.rated_speed_rpm,
            },
            terrain,
            duration_s: self.duration_s,
            dt_s: self.dt_s,
            allow_reexpansion: self.allow_reexpansion,
        };
        scenario.validate().map_err(|e| config_err("[scenario]", e))?;
        Ok(scenario)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub design: DesignConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_sweep: Option<ModelSweepConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stiffness_sweep: Option<StiffnessSweepConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feasibility: Option<FeasibilityConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub friction: Option<FrictionConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub design_check: Option<DesignCheckConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioConfig>,
}

impl RunConfig {
    /// Parses TOML text; syntax and unknown-key errors carry the toml
    /// parser's line and column.
    pub fn parse_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| MorphError::Config(e.to_string()))
    }

    /// Canonical TOML with every defaulted key materialized. Equal configs
    /// materialize to equal text regardless of how sparse the input was.
    pub fn materialized_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// SHA-256 of the materialized form, embedded in every output file.
    pub fn hash_hex(&self) -> String {
        let digest = Sha256::digest(self.materialized_toml().as_bytes());
        let mut out = String::with_capacity(64);
        for byte in digest {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_takes_reference_defaults() {
        let cfg = RunConfig::parse_str("").unwrap();
        let design = cfg.design.to_design().unwrap();
        assert_eq!(design.coupler.crank_length_mm, 30.0);
        assert_eq!(design.wheel_weight_kg, 2.8);
        assert!(cfg.model_sweep.is_none());
    }

    #[test]
    fn partial_design_section_fills_in() {
        let cfg = RunConfig::parse_str("[design]\nwheel_weight_kg = 1.8\n").unwrap();
        let design = cfg.design.to_design().unwrap();
        assert_eq!(design.wheel_weight_kg, 1.8);
        assert_eq!(design.coupler.slider_length_mm, 40.0);
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let err = RunConfig::parse_str("[design]\ncrank_mm = 30.0\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("crank_mm"), "{msg}");
        assert!(matches!(err, MorphError::Config(_)));

        let err = RunConfig::parse_str("[typo_section]\nx = 1\n").unwrap_err();
        assert!(matches!(err, MorphError::Config(_)));
    }

    #[test]
    fn materialization_round_trips() {
        let sparse = "[design]\nwheel_weight_kg = 2.3\n\n[model_sweep]\nweights_kg = [2.3]\n";
        let cfg = RunConfig::parse_str(sparse).unwrap();
        let full = cfg.materialized_toml();
        let again = RunConfig::parse_str(&full).unwrap();
        assert_eq!(full, again.materialized_toml());
        assert_eq!(cfg.hash_hex(), again.hash_hex());
        assert!(full.contains("crank_length_mm"));
    }

    #[test]
    fn equal_configs_hash_equal_and_sparse_matters() {
        let a = RunConfig::parse_str("[design]\nwheel_weight_kg = 2.8\n").unwrap();
        let b = RunConfig::parse_str("").unwrap();
        // 2.8 is the default, so both materialize identically
        assert_eq!(a.hash_hex(), b.hash_hex());
        let c = RunConfig::parse_str("[design]\nwheel_weight_kg = 1.8\n").unwrap();
        assert_ne!(a.hash_hex(), c.hash_hex());
    }

    #[test]
    fn sweep_sections_validate() {
        let cfg = RunConfig::parse_str("[model_sweep]\nweights_kg = []\n").unwrap();
        assert!(cfg.model_sweep.unwrap().validate().is_err());
        let cfg = RunConfig::parse_str("[model_sweep]\nweights_kg = [2.8]\n").unwrap();
        let sweep = cfg.model_sweep.unwrap();
        assert_eq!(sweep.grid_points, 400);
        assert!(sweep.validate().is_ok());
        let cfg = RunConfig::parse_str("[feasibility]\nw_min_kg = 2.0\nw_max_kg = 1.0\n").unwrap();
        assert!(cfg.feasibility.unwrap().validate().is_err());
        let cfg = RunConfig::parse_str("[feasibility]\nw_min_kg = 2.0\nw_max_kg = 2.0\n").unwrap();
        assert!(cfg.feasibility.unwrap().validate().is_ok());
    }

    fn scenario_text(kind: &str, extra: &str) -> String {
        format!(
            r#"
[scenario]
kind = "{kind}"
duration_s = 1.0
dt_s = 0.01
{extra}

[scenario.vehicle]
cart_mass_kg = 2.5
wheel_count = 4
commanded_speed_rpm = 60.0

[scenario.motor]
torque_constant_nmm_per_a = 2500.0
no_load_current_a = 0.025
max_torque_nmm = 600.0
rated_speed_rpm = 100.0

[[scenario.terrain]]
length_m = 4.0
slope_deg = 0.0
rolling_resistance = 0.01
"#
        )
    }

    #[test]
    fn scenario_section_builds_and_validates() {
        let text = scenario_text("load_sweep", "onboard_loads_kg = [0.0, 5.0]");
        let cfg = RunConfig::parse_str(&text).unwrap();
        let sc = cfg.scenario.unwrap();
        sc.validate().unwrap();
        let design = cfg.design.to_design().unwrap();
        let scenario = sc.to_scenario(&design, 5.0).unwrap();
        assert_eq!(scenario.vehicle.onboard_load_kg, 5.0);
        assert_eq!(scenario.terrain.segments[0].friction, 0.8);

        let text = scenario_text("load_sweep", "");
        let sc = RunConfig::parse_str(&text).unwrap().scenario.unwrap();
        assert!(sc.validate().is_err());

        let text = scenario_text("compare", "variants = [\"morph\"]");
        let sc = RunConfig::parse_str(&text).unwrap().scenario.unwrap();
        assert!(sc.validate().is_err());

        let text = scenario_text(
            "compare",
            "variants = [\"morph\", \"fixed:80\", \"fixed:45\"]",
        );
        let sc = RunConfig::parse_str(&text).unwrap().scenario.unwrap();
        assert!(sc.validate().is_ok());
        assert_eq!(sc.parsed_variants().len(), 3);

        let text = scenario_text("bidirectional", "");
        let sc = RunConfig::parse_str(&text).unwrap().scenario.unwrap();
        assert!(sc.validate().is_ok());
    }

    #[test]
    fn overspeed_command_is_a_config_error() {
        let text = scenario_text("bidirectional", "").replace(
            "commanded_speed_rpm = 60.0",
            "commanded_speed_rpm = 120.0",
        );
        let sc = RunConfig::parse_str(&text).unwrap().scenario.unwrap();
        let err = sc.validate().unwrap_err();
        assert!(err.to_string().contains("rating"), "{err}");
    }
}
