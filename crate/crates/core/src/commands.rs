//! Command implementations behind the CLI: each takes a parsed config,
//! writes its artifacts under an output directory, and reports any
//! constraint violations for the caller to turn into an exit code.

use std::path::{Path, PathBuf};

use serde_json::json;

use crate::config::{DesignCheckConfig, RunConfig, ScenarioKind};
use crate::design_space::{
    check_coupler_constraints, cond1_weight_ceiling_kg, displacement_amplitude,
    feasibility_conditions, min_friction_coefficient, min_segment_count, stiffness_sweep,
    strut_inner_radius_bound, weight_feasibility, FeasibilityPoint, SegmentConfig,
    THETA_GRID_POINTS,
};
use crate::error::{MorphError, Result};
use crate::locomotion::{bidirectional_check, compare_wheels, run, run_with_reversal, SimTrace};
use crate::report::{json_document, num, CsvDoc, SvgPlot, SvgSeries};
use crate::wheel::output_force_n;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

impl Formats {
    pub fn parse(text: &str) -> Result<Self> {
        let mut formats = Formats {
            csv: false,
            json: false,
            svg: false,
        };
        for token in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            match token {
                "csv" => formats.csv = true,
                "json" => formats.json = true,
                "svg" => formats.svg = true,
                other => {
                    return Err(MorphError::Config(format!(
                        "unknown output format {other:?}, expected csv, json or svg"
                    )))
                }
            }
        }
        if !(formats.csv || formats.json || formats.svg) {
            return Err(MorphError::Config("no output format selected".into()));
        }
        Ok(formats)
    }
}

/// Files written plus human-readable violations; violations map to exit 1.
#[derive(Debug, Default)]
pub struct CommandOutput {
    pub files: Vec<PathBuf>,
    pub violations: Vec<String>,
}

struct Emitter<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl<'a> Emitter<'a> {
    fn new(dir: &'a Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir,
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, content: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, content)?;
        self.files.push(path);
        Ok(())
    }
}

fn trace_csv(trace: &SimTrace, hash: &str) -> String {
    let mut doc = CsvDoc::new(
        hash,
        &[
            "t_s",
            "position_m",
            "delta_r_mm",
            "effective_radius_mm",
            "mode",
            "motor_torque_nmm",
            "motor_current_a",
            "ground_speed_mps",
        ],
    );
    for r in &trace.rows {
        doc.row(&[
            num(r.t_s),
            num(r.position_m),
            num(r.delta_r_mm),
            num(r.effective_radius_mm),
            r.mode.label().to_string(),
            num(r.motor_torque_nmm),
            num(r.motor_current_a),
            num(r.ground_speed_mps),
        ]);
    }
    doc.into_string()
}

fn file_safe(label: &str) -> String {
    label.replace([':', '.', '/'], "_")
}

/// Torque and force curves over the stroke for each configured weight.
pub fn cmd_model_sweep(cfg: &RunConfig, out_dir: &Path, formats: Formats) -> Result<CommandOutput> {
    let sweep = cfg
        .model_sweep
        .as_ref()
        .ok_or_else(|| MorphError::Config("missing [model_sweep] section".into()))?;
    sweep.validate()?;
    let base = cfg.design.to_design()?;
    let hash = cfg.hash_hex();
    let mut emit = Emitter::new(out_dir)?;

    let mut curves_json = Vec::new();
    let mut torque_series = Vec::new();
    let mut force_series = Vec::new();

    for &w in &sweep.weights_kg {
        let design = base
            .with_wheel_weight(w)
            .map_err(|e| MorphError::Config(format!("[model_sweep] weight {w} kg: {e}")))?;
        let cap = design.theta_cap_rad();
        let mut doc = CsvDoc::new(
            &hash,
            &["theta_d_deg", "delta_r_mm", "tau_in_Nmm", "F_s_N", "F_out_N"],
        );
        let mut torque_points = Vec::with_capacity(sweep.grid_points);
        let mut force_points = Vec::with_capacity(sweep.grid_points);
        for k in 0..sweep.grid_points {
            let theta = cap * k as f64 / (sweep.grid_points - 1) as f64;
            let state = design.state_at(theta)?;
            let tau = design.input_torque_nmm(theta)?;
            let f_s = design.spring_force_n(state.delta_r_mm)?;
            let f_out = output_force_n(tau, state.effective_radius_mm)?;
            doc.row(&[
                num(theta.to_degrees()),
                num(state.delta_r_mm),
                num(tau),
                num(f_s),
                num(f_out),
            ]);
            torque_points.push((theta.to_degrees(), tau));
            force_points.push((theta.to_degrees(), f_out));
        }
        if formats.csv {
            emit.write(&format!("torque_curve_{w}kg.csv"), &doc.into_string())?;
        }
        let cap_state = design.state_at(cap)?;
        let tau_cap = design.input_torque_nmm(cap)?;
        curves_json.push(json!({
            "weight_kg": w,
            "theta_cap_deg": cap.to_degrees(),
            "delta_r_cap_mm": cap_state.delta_r_mm,
            "tau_in_max_nmm": tau_cap,
            "f_out_max_n": output_force_n(tau_cap, cap_state.effective_radius_mm)?,
        }));
        torque_series.push(SvgSeries {
            label: format!("{w} kg"),
            points: torque_points,
        });
        force_series.push(SvgSeries {
            label: format!("{w} kg"),
            points: force_points,
        });
    }

    let mut body = json!({ "curves": curves_json });

    if let Some(stiffness) = &cfg.stiffness_sweep {
        stiffness.validate()?;
        let table = stiffness_sweep(&base, &stiffness.stiffness_nmm_per_deg)?;
        if formats.csv {
            let mut doc = CsvDoc::new(
                &hash,
                &["stiffness_nmm_per_deg", "tau_in_max_Nmm", "F_out_max_N"],
            );
            for row in &table.rows {
                doc.row(&[
                    num(row.stiffness_nmm_per_deg),
                    num(row.tau_in_max_nmm),
                    num(row.f_out_max_n),
                ]);
            }
            emit.write("stiffness_sweep.csv", &doc.into_string())?;
        }
        body["stiffness_sweep"] = serde_json::to_value(&table.rows).expect("rows serialize");
    }

    if formats.json {
        emit.write("model_sweep.json", &json_document(&hash, body))?;
    }
    if formats.svg {
        let torque_plot = SvgPlot {
            title: "Input torque over the stroke".into(),
            x_label: "drive angle [deg]".into(),
            y_label: "input torque [N mm]".into(),
            series: torque_series,
        };
        emit.write("torque_curves.svg", &torque_plot.render(&hash))?;
        let force_plot = SvgPlot {
            title: "Output force over the stroke".into(),
            x_label: "drive angle [deg]".into(),
            y_label: "output force [N]".into(),
            series: force_series,
        };
        emit.write("force_curves.svg", &force_plot.render(&hash))?;
    }

    Ok(CommandOutput {
        files: emit.files,
        violations: Vec::new(),
    })
}

/// Wheel-weight feasibility region, optional friction requirement map.
pub fn cmd_feasibility(cfg: &RunConfig, out_dir: &Path, formats: Formats) -> Result<CommandOutput> {
    let feas = cfg
        .feasibility
        .as_ref()
        .ok_or_else(|| MorphError::Config("missing [feasibility] section".into()))?;
    feas.validate()?;
    let design = cfg.design.to_design()?;
    let hash = cfg.hash_hex();
    let mut emit = Emitter::new(out_dir)?;

    let (grid, lower, upper): (Vec<FeasibilityPoint>, Option<f64>, Option<f64>) =
        if feas.w_min_kg == feas.w_max_kg {
            let w = feas.w_min_kg;
            let candidate = design
                .with_wheel_weight(w)
                .map_err(|e| MorphError::Config(format!("[feasibility] weight {w} kg: {e}")))?;
            let (c1, c2) = feasibility_conditions(&candidate, THETA_GRID_POINTS)?;
            let point = FeasibilityPoint {
                weight_kg: w,
                cond1_ok: c1,
                cond2_ok: c2,
            };
            let bound = if c1 && c2 { Some(w) } else { None };
            (vec![point], bound, bound)
        } else {
            let region = weight_feasibility(&design, feas.w_min_kg, feas.w_max_kg, feas.grid_points)?;
            (region.grid, region.lower_bound_kg, region.upper_bound_kg)
        };
    let cond1_upper = grid
        .iter()
        .rev()
        .find(|p| p.cond1_ok)
        .map(|p| p.weight_kg);

    if formats.csv {
        let mut doc = CsvDoc::new(&hash, &["weight_kg", "cond1_ok", "cond2_ok", "feasible"]);
        for p in &grid {
            doc.row(&[
                num(p.weight_kg),
                p.cond1_ok.to_string(),
                p.cond2_ok.to_string(),
                (p.cond1_ok && p.cond2_ok).to_string(),
            ]);
        }
        emit.write("feasibility_grid.csv", &doc.into_string())?;
    }

    let mut body = json!({
        "lower_bound_kg": lower,
        "upper_bound_kg": upper,
        "cond1_upper_kg": cond1_upper,
        "cond1_ceiling_kg": cond1_weight_ceiling_kg(&design),
        "weight_grid_points": grid.len(),
        "theta_grid_points": THETA_GRID_POINTS,
    });

    let friction_map = match &cfg.friction {
        Some(friction) => {
            friction.validate()?;
            Some(min_friction_coefficient(&design, &friction.weights_kg)?)
        }
        None => None,
    };
    if let Some(map) = &friction_map {
        if formats.csv {
            let mut doc = CsvDoc::new(&hash, &["weight_kg", "mu_min"]);
            for p in map {
                doc.row(&[num(p.weight_kg), num(p.mu_min)]);
            }
            emit.write("friction_map.csv", &doc.into_string())?;
        }
        body["friction_map"] = serde_json::to_value(map).expect("map serializes");
    }

    if formats.json {
        emit.write("feasibility.json", &json_document(&hash, body))?;
    }
    if formats.svg {
        let to_unit = |flag: bool| if flag { 1.0 } else { 0.0 };
        let mut series = vec![
            SvgSeries {
                label: "condition 1".into(),
                points: grid.iter().map(|p| (p.weight_kg, to_unit(p.cond1_ok))).collect(),
            },
            SvgSeries {
                label: "condition 2".into(),
                points: grid.iter().map(|p| (p.weight_kg, to_unit(p.cond2_ok))).collect(),
            },
        ];
        if let Some(map) = &friction_map {
            series.push(SvgSeries {
                label: "mu_min".into(),
                points: map.iter().map(|p| (p.weight_kg, p.mu_min)).collect(),
            });
        }
        let plot = SvgPlot {
            title: "Weight feasibility".into(),
            x_label: "wheel weight [kg]".into(),
            y_label: "condition flag / mu".into(),
            series,
        };
        emit.write("feasibility.svg", &plot.render(&hash))?;
    }

    Ok(CommandOutput {
        files: emit.files,
        violations: Vec::new(),
    })
}

/// Static design constraints plus segment vibration analysis; violations
/// still produce the full report but flip the exit code.
pub fn cmd_design_check(cfg: &RunConfig, out_dir: &Path, formats: Formats) -> Result<CommandOutput> {
    let check = cfg.design_check.clone().unwrap_or_else(DesignCheckConfig::default);
    let d = &cfg.design;
    for (label, value) in [
        ("crank_length_mm", d.crank_length_mm),
        ("slider_length_mm", d.slider_length_mm),
        ("initial_radius_mm", d.initial_radius_mm),
        ("contraction_cap_mm", d.contraction_cap_mm),
        ("strut_link_length_mm", d.strut_link_length_mm),
    ] {
        if !(value > 0.0) || !value.is_finite() {
            return Err(MorphError::Config(format!(
                "[design] {label} must be positive, got {value}"
            )));
        }
    }
    if !(check.clearance_mm >= 0.0) || !(check.delta_r_target_mm > 0.0) || !(check.amplitude_limit_pct > 0.0) {
        return Err(MorphError::Config(
            "[design_check] needs clearance_mm >= 0, delta_r_target_mm > 0, amplitude_limit_pct > 0".into(),
        ));
    }
    if !(d.contraction_cap_mm < d.initial_radius_mm) {
        return Err(MorphError::Config(
            "[design] contraction_cap_mm must stay below initial_radius_mm".into(),
        ));
    }
    let hash = cfg.hash_hex();
    let mut emit = Emitter::new(out_dir)?;
    let mut violations = Vec::new();

    let report = check_coupler_constraints(
        d.crank_length_mm,
        d.slider_length_mm,
        d.initial_radius_mm,
        check.clearance_mm,
        check.delta_r_target_mm,
    )?;
    for c in &report.constraints {
        if !c.satisfied {
            violations.push(format!("{} violated (margin {})", c.name, num(c.margin)));
        }
    }

    // segment vibration at the design's own radius ratio
    let radius_ratio = d.initial_radius_mm / (d.initial_radius_mm - d.contraction_cap_mm);
    let seg_cfg = SegmentConfig::new(d.segment_count, radius_ratio, d.initial_radius_mm)
        .map_err(|e| MorphError::Config(format!("[design] segment analysis: {e}")))?;
    let (amplitude_mm, amplitude_pct) = displacement_amplitude(&seg_cfg);
    let amplitude_ok = amplitude_pct <= check.amplitude_limit_pct;
    if !amplitude_ok {
        violations.push(format!(
            "segment_vibration violated (amplitude {}% over the {}% limit)",
            num(amplitude_pct),
            num(check.amplitude_limit_pct)
        ));
    }
    let needed_segments = min_segment_count(radius_ratio, check.amplitude_limit_pct)?;

    // strut stroke coverage is reported but does not gate: the reference
    // hardware itself sits below this bound and relies on the cap
    let strut_bound_mm = strut_inner_radius_bound(
        d.strut_max_angle_deg,
        d.strut_constraint_length_mm,
        check.delta_r_target_mm,
    )?;
    let stroke_covers_target = d.strut_link_length_mm >= strut_bound_mm;

    if formats.csv {
        let mut doc = CsvDoc::new(&hash, &["segment_count", "amplitude_mm", "amplitude_pct"]);
        for n in 3..=12u32 {
            let cfg_n = SegmentConfig::new(n, radius_ratio, d.initial_radius_mm)
                .expect("count and ratio already validated");
            let (a_mm, a_pct) = displacement_amplitude(&cfg_n);
            doc.row(&[n.to_string(), num(a_mm), num(a_pct)]);
        }
        emit.write("segment_analysis.csv", &doc.into_string())?;
    }

    if formats.json {
        let body = json!({
            "constraints": report.constraints,
            "constraints_pass": report.pass,
            "segment": {
                "count": d.segment_count,
                "radius_ratio": radius_ratio,
                "amplitude_mm": amplitude_mm,
                "amplitude_pct": amplitude_pct,
                "amplitude_limit_pct": check.amplitude_limit_pct,
                "amplitude_ok": amplitude_ok,
                "min_count_within_limit": needed_segments,
            },
            "strut": {
                "required_link_length_mm": strut_bound_mm,
                "configured_link_length_mm": d.strut_link_length_mm,
                "stroke_covers_target": stroke_covers_target,
            },
            "pass": violations.is_empty(),
        });
        emit.write("design_check.json", &json_document(&hash, body))?;
    }
    if formats.svg {
        let points: Vec<(f64, f64)> = (3..=12u32)
            .map(|n| {
                let cfg_n = SegmentConfig::new(n, radius_ratio, d.initial_radius_mm)
                    .expect("count and ratio already validated");
                (f64::from(n), displacement_amplitude(&cfg_n).1)
            })
            .collect();
        let plot = SvgPlot {
            title: "Segment vibration amplitude".into(),
            x_label: "segment count".into(),
            y_label: "amplitude [% of max radius]".into(),
            series: vec![
                SvgSeries {
                    label: "amplitude".into(),
                    points,
                },
                SvgSeries {
                    label: "limit".into(),
                    points: vec![
                        (3.0, check.amplitude_limit_pct),
                        (12.0, check.amplitude_limit_pct),
                    ],
                },
            ],
        };
        emit.write("segment_analysis.svg", &plot.render(&hash))?;
    }

    Ok(CommandOutput {
        files: emit.files,
        violations,
    })
}

fn summary_json(label: &str, trace: &SimTrace, scenario: &crate::locomotion::Scenario) -> serde_json::Value {
    let s = trace.summary(&scenario.terrain);
    json!({
        "label": label,
        "mean_current_a": s.mean_current_a,
        "std_current_a": s.std_current_a,
        "min_current_a": s.min_current_a,
        "max_current_a": s.max_current_a,
        "current_range_a": s.current_range_a,
        "mean_radius_mm": s.mean_radius_mm,
        "final_radius_mm": s.final_radius_mm,
        "final_delta_r_mm": s.final_delta_r_mm,
        "final_position_m": s.final_position_m,
        "segment_timings": s.segment_timings,
    })
}

/// Scenario runner: payload sweeps, variant comparison, or the
/// direction-reversal demonstration, depending on the configured kind.
pub fn cmd_simulate(cfg: &RunConfig, out_dir: &Path, formats: Formats) -> Result<CommandOutput> {
    let sc_cfg = cfg
        .scenario
        .as_ref()
        .ok_or_else(|| MorphError::Config("missing [scenario] section".into()))?;
    sc_cfg.validate()?;
    let design = cfg.design.to_design()?;
    let hash = cfg.hash_hex();
    let mut emit = Emitter::new(out_dir)?;
    let mut violations = Vec::new();

    match sc_cfg.kind {
        ScenarioKind::LoadSweep => {
            let loads = sc_cfg
                .onboard_loads_kg
                .clone()
                .expect("validated for load_sweep");
            let variants = sc_cfg.parsed_variants();
            let mut rows_json = Vec::new();
            let mut sweep_csv = CsvDoc::new(
                &hash,
                &[
                    "onboard_load_kg",
                    "variant",
                    "mean_current_a",
                    "std_current_a",
                    "current_range_a",
                    "final_radius_mm",
                    "final_delta_r_mm",
                    "final_position_m",
                ],
            );
            let mut radius_series: Vec<SvgSeries> = Vec::new();
            let mut current_series: Vec<SvgSeries> = Vec::new();
            for &variant in &variants {
                let mut radius_points = Vec::new();
                let mut current_points = Vec::new();
                for &load in &loads {
                    let scenario = sc_cfg.to_scenario(&design, load)?;
                    let trace = run(&scenario, variant)?;
                    let summary = trace.summary(&scenario.terrain);
                    sweep_csv.row(&[
                        num(load),
                        variant.label(),
                        num(summary.mean_current_a),
                        num(summary.std_current_a),
                        num(summary.current_range_a),
                        num(summary.final_radius_mm),
                        num(summary.final_delta_r_mm),
                        num(summary.final_position_m),
                    ]);
                    let mut entry = summary_json(&variant.label(), &trace, &scenario);
                    entry["onboard_load_kg"] = json!(load);
                    rows_json.push(entry);
                    radius_points.push((load, summary.final_radius_mm));
                    current_points.push((load, summary.mean_current_a));
                    if formats.csv {
                        emit.write(
                            &format!("trace_{}_{}kg.csv", file_safe(&variant.label()), load),
                            &trace_csv(&trace, &hash),
                        )?;
                    }
                }
                radius_series.push(SvgSeries {
                    label: variant.label(),
                    points: radius_points,
                });
                current_series.push(SvgSeries {
                    label: variant.label(),
                    points: current_points,
                });
            }
            if formats.csv {
                emit.write("load_sweep.csv", &sweep_csv.into_string())?;
            }
            if formats.json {
                emit.write(
                    "load_sweep.json",
                    &json_document(&hash, json!({ "runs": rows_json })),
                )?;
            }
            if formats.svg {
                let radius_plot = SvgPlot {
                    title: "Steady radius vs onboard load".into(),
                    x_label: "onboard load [kg]".into(),
                    y_label: "final radius [mm]".into(),
                    series: radius_series,
                };
                emit.write("radius_vs_load.svg", &radius_plot.render(&hash))?;
                let current_plot = SvgPlot {
                    title: "Mean current vs onboard load".into(),
                    x_label: "onboard load [kg]".into(),
                    y_label: "mean current [A]".into(),
                    series: current_series,
                };
                emit.write("current_vs_load.svg", &current_plot.render(&hash))?;
            }
        }
        ScenarioKind::Compare => {
            let scenario = sc_cfg.to_scenario(&design, sc_cfg.onboard_load_kg)?;
            let variants = sc_cfg.parsed_variants();
            let runs = compare_wheels(&scenario, &variants)?;
            let mut entries = Vec::new();
            let mut current_series = Vec::new();
            let mut radius_series = Vec::new();
            for lt in &runs {
                entries.push(summary_json(&lt.label, &lt.trace, &scenario));
                if formats.csv {
                    emit.write(
                        &format!("trace_{}.csv", file_safe(&lt.label)),
                        &trace_csv(&lt.trace, &hash),
                    )?;
                }
                current_series.push(SvgSeries {
                    label: lt.label.clone(),
                    points: lt.trace.rows.iter().map(|r| (r.t_s, r.motor_current_a)).collect(),
                });
                radius_series.push(SvgSeries {
                    label: lt.label.clone(),
                    points: lt
                        .trace
                        .rows
                        .iter()
                        .map(|r| (r.t_s, r.effective_radius_mm))
                        .collect(),
                });
            }
            if formats.json {
                emit.write(
                    "comparison.json",
                    &json_document(&hash, json!({ "variants": entries })),
                )?;
            }
            if formats.svg {
                let current_plot = SvgPlot {
                    title: "Motor current vs time".into(),
                    x_label: "time [s]".into(),
                    y_label: "current [A]".into(),
                    series: current_series,
                };
                emit.write("current_vs_time.svg", &current_plot.render(&hash))?;
                let radius_plot = SvgPlot {
                    title: "Wheel radius vs time".into(),
                    x_label: "time [s]".into(),
                    y_label: "radius [mm]".into(),
                    series: radius_series,
                };
                emit.write("radius_vs_time.svg", &radius_plot.render(&hash))?;
            }
        }
        ScenarioKind::Bidirectional => {
            let scenario = sc_cfg.to_scenario(&design, sc_cfg.onboard_load_kg)?;
            let (report, forward, reverse) = bidirectional_check(&scenario)?;
            let demo = run_with_reversal(&scenario, scenario.duration_s / 2.0)?;
            if !report.pass {
                violations.push(format!(
                    "bidirectional symmetry failed: max |delta_r| difference {} mm, modes identical: {}",
                    num(report.max_abs_delta_r_diff_mm),
                    report.modes_identical
                ));
            }
            if formats.csv {
                emit.write("trace_forward.csv", &trace_csv(&forward, &hash))?;
                emit.write("trace_reverse.csv", &trace_csv(&reverse, &hash))?;
                emit.write("reversal_demo.csv", &trace_csv(&demo, &hash))?;
            }
            if formats.json {
                let body = json!({
                    "symmetry": report,
                    "forward": summary_json("forward", &forward, &scenario),
                    "reverse": summary_json("reverse", &reverse, &scenario),
                    "demo": summary_json("reversal_demo", &demo, &scenario),
                });
                emit.write("symmetry.json", &json_document(&hash, body))?;
            }
            if formats.svg {
                let plot = SvgPlot {
                    title: "Radius through a command reversal".into(),
                    x_label: "time [s]".into(),
                    y_label: "radius [mm] / position [dm]".into(),
                    series: vec![
                        SvgSeries {
                            label: "radius".into(),
                            points: demo.rows.iter().map(|r| (r.t_s, r.effective_radius_mm)).collect(),
                        },
                        SvgSeries {
                            label: "position".into(),
                            points: demo.rows.iter().map(|r| (r.t_s, r.position_m * 10.0)).collect(),
                        },
                    ],
                };
                emit.write("reversal_radius.svg", &plot.render(&hash))?;
            }
        }
    }

    Ok(CommandOutput {
        files: emit.files,
        violations,
    })
}

/// Exit code contract shared by the CLI and tests.
pub fn exit_code_for(err: &MorphError) -> i32 {
    match err {
        MorphError::Config(_) => 2,
        MorphError::Io(_) => 3,
        _ => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::TempDir;

    fn formats_all() -> Formats {
        Formats {
            csv: true,
            json: true,
            svg: true,
        }
    }

    #[test]
    fn formats_parse_and_reject() {
        let f = Formats::parse("csv,json").unwrap();
        assert!(f.csv && f.json && !f.svg);
        assert!(Formats::parse("csv,bogus").is_err());
        assert!(Formats::parse("").is_err());
    }

    #[test]
    fn model_sweep_writes_expected_files() {
        let dir = TempDir::new().unwrap();
        let cfg = RunConfig::parse_str(
            "[model_sweep]\nweights_kg = [1.8, 2.3, 2.8]\ngrid_points = 50\n",
        )
        .unwrap();
        let out = cmd_model_sweep(&cfg, dir.path(), formats_all()).unwrap();
        assert!(out.violations.is_empty());
        let names: Vec<String> = out
            .files
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert!(names.contains(&"torque_curve_1.8kg.csv".to_string()));
        assert!(names.contains(&"torque_curve_2.8kg.csv".to_string()));
        assert!(names.contains(&"model_sweep.json".to_string()));
        assert!(names.contains(&"torque_curves.svg".to_string()));
        let csv = std::fs::read_to_string(dir.path().join("torque_curve_2.8kg.csv")).unwrap();
        assert!(csv.contains("theta_d_deg,delta_r_mm,tau_in_Nmm,F_s_N,F_out_N"));
        assert!(csv.starts_with("# config_hash="));
    }

    #[test]
    fn model_sweep_without_section_is_config_error() {
        let dir = TempDir::new().unwrap();
        let cfg = RunConfig::parse_str("").unwrap();
        let err = cmd_model_sweep(&cfg, dir.path(), formats_all()).unwrap_err();
        assert_eq!(exit_code_for(&err), 2);
    }

    #[test]
    fn design_check_flags_singularity() {
        let dir = TempDir::new().unwrap();
        let cfg = RunConfig::parse_str("[design]\nslider_length_mm = 65.0\n").unwrap();
        let out = cmd_design_check(&cfg, dir.path(), formats_all()).unwrap();
        assert!(!out.violations.is_empty());
        assert!(out.violations[0].contains("singularity_avoidance"));
        let json_text = std::fs::read_to_string(dir.path().join("design_check.json")).unwrap();
        assert!(json_text.contains("\"pass\": false"));
    }

    #[test]
    fn design_check_defaults_pass() {
        let dir = TempDir::new().unwrap();
        let cfg = RunConfig::parse_str("").unwrap();
        let out = cmd_design_check(&cfg, dir.path(), formats_all()).unwrap();
        assert!(out.violations.is_empty(), "{:?}", out.violations);
        let json_text = std::fs::read_to_string(dir.path().join("design_check.json")).unwrap();
        assert!(json_text.contains("\"pass\": true"));
        assert!(json_text.contains("\"stroke_covers_target\": false"));
    }

    #[test]
    fn feasibility_degenerate_range_single_point() {
        let dir = TempDir::new().unwrap();
        let cfg =
            RunConfig::parse_str("[feasibility]\nw_min_kg = 2.8\nw_max_kg = 2.8\n").unwrap();
        let out = cmd_feasibility(&cfg, dir.path(), formats_all()).unwrap();
        assert!(out.violations.is_empty());
        let text = std::fs::read_to_string(dir.path().join("feasibility.json")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["lower_bound_kg"], 2.8);
        assert_eq!(v["upper_bound_kg"], 2.8);
        assert_eq!(v["weight_grid_points"], 1);
    }

    #[test]
    fn simulate_requires_scenario() {
        let dir = TempDir::new().unwrap();
        let cfg = RunConfig::parse_str("").unwrap();
        let err = cmd_simulate(&cfg, dir.path(), formats_all()).unwrap_err();
        assert_eq!(exit_code_for(&err), 2);
    }
}
