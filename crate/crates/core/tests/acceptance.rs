//! Acceptance gate: one test per criterion, each printing a single
//! PASS/FAIL line with the measured values. Tolerances are pinned here
//! and nowhere else.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use morph::behavior::{classify_mode, equilibrium_delta_r, Mode};
use morph::commands::{cmd_design_check, cmd_feasibility, cmd_model_sweep, cmd_simulate, Formats};
use morph::config::RunConfig;
use morph::design_space::{
    check_coupler_constraints, displacement_amplitude, min_segment_count,
    weight_feasibility_with_resolution, SegmentConfig,
};
use morph::locomotion::{bidirectional_check, compare_wheels, run, WheelVariant};
use morph::wheel::{output_force_n, WheelDesign};

fn criterion(n: u32, name: &str, checks: &[(String, bool)]) {
    let pass = checks.iter().all(|(_, ok)| *ok);
    let detail: Vec<String> = checks
        .iter()
        .map(|(text, ok)| format!("{} [{}]", text, if *ok { "ok" } else { "VIOLATED" }))
        .collect();
    println!(
        "ACCEPTANCE {n} {}: {name}: {}",
        if pass { "PASS" } else { "FAIL" },
        detail.join("; ")
    );
    assert!(pass, "criterion {n} failed: {}", detail.join("; "));
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .ancestors()
        .nth(2)
        .expect("workspace root")
        .to_path_buf()
}

fn load_preset(name: &str) -> RunConfig {
    let text = std::fs::read_to_string(repo_root().join("presets").join(name)).unwrap();
    RunConfig::parse_str(&text).unwrap()
}

fn rel_err(measured: f64, reference: f64) -> f64 {
    (measured - reference).abs() / reference.abs().max(f64::MIN_POSITIVE)
}

#[test]
fn acceptance_01_jacobians_match_finite_differences() {
    let start = Instant::now();
    let design = WheelDesign::default();
    let h = 1e-5;

    let cap = design.theta_cap_rad();
    let mut worst_coupler = 0.0f64;
    for k in 0..1000 {
        let theta = 1e-3 + (cap - 2e-3) * k as f64 / 999.0;
        let analytic = design.coupler.jacobian_mm_per_rad(theta).unwrap();
        let fd = (design.coupler.contraction_mm(theta + h).unwrap()
            - design.coupler.contraction_mm(theta - h).unwrap())
            / (2.0 * h);
        worst_coupler = worst_coupler.max(rel_err(analytic, fd));
    }

    let max_angle = design.strut.max_angle_rad();
    let mut worst_strut = 0.0f64;
    for k in 0..1000 {
        let theta_s = 1e-3 + (max_angle - 2e-3) * k as f64 / 999.0;
        let analytic = design.strut.jacobian_mm_per_rad(theta_s).unwrap();
        let fd = (design.strut.contraction_mm(theta_s + h).unwrap()
            - design.strut.contraction_mm(theta_s - h).unwrap())
            / (2.0 * h);
        worst_strut = worst_strut.max(rel_err(analytic, fd));
    }

    let elapsed = start.elapsed().as_secs_f64();
    criterion(
        1,
        "analytic vs finite-difference Jacobians",
        &[
            (format!("coupler worst rel err {worst_coupler:.3e}"), worst_coupler < 1e-6),
            (format!("strut worst rel err {worst_strut:.3e}"), worst_strut < 1e-6),
            (format!("runtime {elapsed:.3} s"), elapsed < 1.0),
        ],
    );
}

#[test]
fn acceptance_02_full_compression_torque_within_20pct() {
    let base = WheelDesign::default();
    let mut checks = Vec::new();
    for (weight, reference) in [(1.8, 900.0), (2.3, 710.0), (2.8, 530.0)] {
        let design = base.with_wheel_weight(weight).unwrap();
        let tau = design.input_torque_nmm(design.theta_cap_rad()).unwrap();
        let ratio = tau / reference;
        checks.push((
            format!("W={weight}: tau_cap {tau:.1} N·mm vs {reference} (ratio {ratio:.3})"),
            (0.8..=1.2).contains(&ratio),
        ));
    }
    criterion(2, "fully-compressed input torque", &checks);
}

#[test]
fn acceptance_03_output_force_reproduction() {
    let direct = output_force_n(900.0, 41.4).unwrap();
    let mut checks = vec![(
        format!("900 N·mm / 41.4 mm = {direct} N"),
        direct == 900.0 / 41.4,
    )];
    let base = WheelDesign::default();
    for (weight, reference) in [(1.8, 21.74), (2.3, 17.02), (2.8, 12.24)] {
        let design = base.with_wheel_weight(weight).unwrap();
        let cap = design.theta_cap_rad();
        let state = design.state_at(cap).unwrap();
        let tau = design.input_torque_nmm(cap).unwrap();
        let f_out = output_force_n(tau, state.effective_radius_mm).unwrap();
        let ratio = f_out / reference;
        checks.push((
            format!("W={weight}: F_out,max {f_out:.2} N vs {reference} (ratio {ratio:.3})"),
            (0.8..=1.2).contains(&ratio),
        ));
    }
    criterion(3, "output force reproduction", &checks);
}

#[test]
fn acceptance_04_spring_force_limit() {
    let design = WheelDesign::default();
    let limit = design.spring.total_stiffness_nmm_per_rad()
        / (2.0 * design.strut.link_length_mm);
    let measured = design.spring_force_n(1e-6).unwrap();
    let err = rel_err(measured, limit);
    criterion(
        4,
        "spring force limit at vanishing contraction",
        &[(
            format!("F_s(1e-6 mm) = {measured:.9} N vs limit {limit:.9} N (rel err {err:.3e})"),
            err < 1e-6,
        )],
    );
}

#[test]
fn acceptance_05_weight_feasibility_bounds() {
    let start = Instant::now();
    let design = WheelDesign::default();
    let region = weight_feasibility_with_resolution(&design, 0.2, 4.0, 100, 500).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let lower = region.lower_bound_kg.unwrap_or(f64::NAN);
    let upper = region.upper_bound_kg.unwrap_or(f64::NAN);
    let cond1_upper = region.cond1_upper_kg().unwrap_or(f64::NAN);
    criterion(
        5,
        "weight feasibility band",
        &[
            (
                format!("lower bound {lower:.4} kg vs 1.0 ± 0.3"),
                (0.7..=1.3).contains(&lower),
            ),
            (
                format!("upper bound {upper:.4} kg vs 3.0 ± 0.3"),
                (2.7..=3.3).contains(&upper),
            ),
            (
                format!("condition-1-only upper {cond1_upper:.4} kg vs [3.0, 3.1] ± 0.2"),
                (2.8..=3.3).contains(&cond1_upper),
            ),
            (format!("runtime {elapsed:.2} s"), elapsed < 10.0),
        ],
    );
}

#[test]
fn acceptance_06_segment_vibration() {
    let amp = |n: u32| {
        let cfg = SegmentConfig::new(n, 2.0, 80.0).unwrap();
        displacement_amplitude(&cfg).1
    };
    let a6 = amp(6);
    let a4 = amp(4);
    let computed = min_segment_count(2.0, 5.0).unwrap();
    let scanned = (3..=20).find(|&n| amp(n) <= 5.0).unwrap();
    criterion(
        6,
        "segment vibration amplitude",
        &[
            (format!("A(6, 2.0) = {a6:.3}%"), (a6 - 3.41).abs() < 0.05 && a6 <= 5.0),
            (format!("A(4, 2.0) = {a4:.3}% > 5%"), a4 > 5.0),
            (
                format!("min segment count {computed} vs scan {scanned}"),
                computed == scanned,
            ),
        ],
    );
}

#[test]
fn acceptance_07_design_constraints() {
    let all_pass = |crank: f64, slider: f64, radius: f64, clearance: f64| {
        check_coupler_constraints(crank, slider, radius, clearance, 40.0)
            .unwrap()
            .pass
    };
    let violated = |crank: f64, slider: f64, radius: f64, clearance: f64, name: &str| {
        check_coupler_constraints(crank, slider, radius, clearance, 40.0)
            .unwrap()
            .constraints
            .iter()
            .any(|c| c.name == name && !c.satisfied)
    };
    criterion(
        7,
        "coupler design constraints",
        &[
            (
                "defaults (30, 40, 80, 10) satisfy all three".into(),
                all_pass(30.0, 40.0, 80.0, 10.0),
            ),
            (
                "crank 19 trips singularity avoidance".into(),
                violated(19.0, 40.0, 80.0, 10.0, "singularity_avoidance"),
            ),
            (
                "slider 39 trips displacement capacity".into(),
                violated(30.0, 39.0, 80.0, 10.0, "displacement_capacity"),
            ),
            (
                "radius 79 trips geometric fit".into(),
                violated(30.0, 40.0, 79.0, 10.0, "geometric_fit"),
            ),
        ],
    );
}

#[test]
fn acceptance_08_mode_partition_fuzz() {
    let design = WheelDesign::default();
    let cap = design.theta_cap_rad();
    let mut rng = StdRng::seed_from_u64(0x4d4f5250);
    let mut failures = 0usize;
    let samples = 100_000usize;
    for _ in 0..samples {
        let theta = rng.gen_range(0.0..=cap);
        let tau = rng.gen_range(0.0..=1200.0);
        let f_res = rng.gen_range(0.0..=60.0);
        let state = design.state_at(theta).unwrap();
        let m = classify_mode(&design, &state, tau, f_res).unwrap();
        let f = m.forces;
        let drives = f.f_out_n > f.f_res_n;
        let contracts = !drives && f.f_c_n > f.f_s_n - f.weight_force_n;
        let stalls = !drives && f.f_c_n <= f.f_s_n - f.weight_force_n;
        let count = usize::from(drives) + usize::from(contracts) + usize::from(stalls);
        let consistent = match m.mode {
            Mode::DirectDrive => drives,
            Mode::RadiusVariation => contracts,
            Mode::Stall => stalls,
        };
        if count != 1 || !consistent {
            failures += 1;
        }
    }
    criterion(
        8,
        "mode logic partition fuzz",
        &[(format!("{failures} of {samples} samples violated the partition"), failures == 0)],
    );
}

#[test]
fn acceptance_09_equilibrium_inverts_the_torque_curve() {
    let base = WheelDesign::default();
    let mut worst = 0.0f64;
    for weight in [2.5, 2.7, 2.9] {
        let design = base.with_wheel_weight(weight).unwrap();
        let cap = design.theta_cap_rad();
        for k in 0..200 {
            let theta = 1e-3 + (cap - 2e-3) * k as f64 / 199.0;
            let tau = design.input_torque_nmm(theta).unwrap();
            let sol = equilibrium_delta_r(&design, tau).unwrap();
            let theta_back = design.coupler.theta_for_contraction(sol.delta_r_mm).unwrap();
            worst = worst.max((theta_back - theta).abs());
        }
    }
    criterion(
        9,
        "equilibrium inverts the torque curve",
        &[(format!("worst |theta round trip error| {worst:.3e} rad"), worst < 1e-6)],
    );
}

#[test]
fn acceptance_10_bidirectional_symmetry() {
    let cfg = load_preset("fig5_3.toml");
    let scenario = cfg
        .scenario
        .as_ref()
        .unwrap()
        .to_scenario(&cfg.design.to_design().unwrap(), 0.0)
        .unwrap();
    let (report, _, _) = bidirectional_check(&scenario).unwrap();
    criterion(
        10,
        "bidirectional symmetry",
        &[
            (
                format!("max |delta_r| difference {:.3e} mm", report.max_abs_delta_r_diff_mm),
                report.max_abs_delta_r_diff_mm <= 1e-9,
            ),
            ("mode sequences identical".into(), report.modes_identical),
        ],
    );
}

#[test]
fn acceptance_11_locomotion_trends() {
    let start = Instant::now();

    let sweep_cfg = load_preset("fig5_1.toml");
    let sweep_design = sweep_cfg.design.to_design().unwrap();
    let sweep = sweep_cfg.scenario.as_ref().unwrap();
    let loads = sweep.onboard_loads_kg.clone().unwrap();
    let mut radii = Vec::new();
    for &load in &loads {
        let scenario = sweep.to_scenario(&sweep_design, load).unwrap();
        let trace = run(&scenario, WheelVariant::Morph).unwrap();
        radii.push(trace.summary(&scenario.terrain).final_radius_mm);
    }
    let non_increasing = radii.windows(2).all(|w| w[1] <= w[0] + 1e-9);

    let cmp_cfg = load_preset("fig5_2.toml");
    let cmp_design = cmp_cfg.design.to_design().unwrap();
    let cmp = cmp_cfg.scenario.as_ref().unwrap();
    let scenario = cmp.to_scenario(&cmp_design, cmp.onboard_load_kg).unwrap();
    let runs = compare_wheels(&scenario, &cmp.parsed_variants()).unwrap();
    let slope_time = |label: &str| {
        let lt = runs.iter().find(|lt| lt.label == label).unwrap();
        let summary = lt.trace.summary(&scenario.terrain);
        let t = summary
            .segment_timings
            .iter()
            .find(|s| s.segment == 1)
            .unwrap();
        t.exit_s.unwrap() - t.enter_s
    };
    let current_range = |label: &str| {
        let lt = runs.iter().find(|lt| lt.label == label).unwrap();
        lt.trace.summary(&scenario.terrain).current_range_a
    };
    let range_morph = current_range("morph");
    let range_fixed = current_range("fixed:80");
    let t80 = slope_time("fixed:80");
    let t_morph = slope_time("morph");
    let t45 = slope_time("fixed:45");

    let elapsed = start.elapsed().as_secs_f64();
    criterion(
        11,
        "locomotion trends",
        &[
            (
                format!("steady radius non-increasing over loads: {radii:.1?} mm"),
                non_increasing,
            ),
            (
                format!("current range morph {range_morph:.4} A < fixed-80 {range_fixed:.4} A"),
                range_morph < range_fixed,
            ),
            (
                format!("slope traversal {t80:.2} s < {t_morph:.2} s < {t45:.2} s"),
                t80 < t_morph && t_morph < t45,
            ),
            (format!("runtime {elapsed:.2} s"), elapsed < 30.0),
        ],
    );
}

#[test]
fn acceptance_12_reruns_are_byte_identical() {
    let formats = Formats {
        csv: true,
        json: true,
        svg: true,
    };
    let jobs: [(&str, &str, fn(&RunConfig, &Path, Formats) -> morph::Result<morph::commands::CommandOutput>); 4] = [
        ("design-check", "fig2_3.toml", cmd_design_check),
        ("feasibility", "fig3_2.toml", cmd_feasibility),
        ("model-sweep", "fig3_3.toml", cmd_model_sweep),
        ("simulate", "fig5_3.toml", cmd_simulate),
    ];
    let mut checks = Vec::new();
    for (label, preset, command) in jobs {
        let cfg = load_preset(preset);
        let first = tempfile::TempDir::new().unwrap();
        let second = tempfile::TempDir::new().unwrap();
        let out_a = command(&cfg, first.path(), formats).unwrap();
        command(&cfg, second.path(), formats).unwrap();
        let mut identical = true;
        let mut count = 0usize;
        for file in &out_a.files {
            let name = file.file_name().unwrap();
            let a = std::fs::read(file).unwrap();
            let b = std::fs::read(second.path().join(name)).unwrap();
            identical &= a == b;
            count += 1;
        }
        checks.push((format!("{label}: {count} files byte-identical"), identical && count > 0));
    }
    criterion(12, "rerun determinism", &checks);
}
