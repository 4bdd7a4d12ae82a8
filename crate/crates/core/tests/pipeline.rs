use num_complex::Complex64;
use ptshock_core::characteristics::Characteristics;
use ptshock_core::charges::{drift_report, DriftOptions};
use ptshock_core::deform::{fold_to_peak, verify_map_residual, Anchor};
use ptshock_core::scenarios::{run_all, run_scenario, ScenarioConfig, CATALOG};
use ptshock_core::{parse, DeformedSystem, GridSpec};

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn cauchy(eps: f64) -> (Characteristics, DeformedSystem) {
    let sys = DeformedSystem::burgers(eps).unwrap();
    (Characteristics::for_system(parse("1/(1+x^2)").unwrap(), &sys), sys)
}

#[test]
fn mapped_field_solves_the_deformed_equation() {
    let (ch, sys) = cauchy(3.0);
    let grid = GridSpec::new(-4.0, 4.0, 801).unwrap();
    let r = verify_map_residual(&ch, &sys, 0.1, &grid, 1e-4, Anchor::Left(zero())).unwrap();
    assert!(r < 1e-3, "residual {r}");
}

#[test]
fn undeformed_residual_is_tiny() {
    // Centred differences limit the residual to O(h^2), so h = 1e-3 here.
    let (ch, sys) = cauchy(1.0);
    let grid = GridSpec::new(-4.0, 4.0, 8001).unwrap();
    let r = verify_map_residual(&ch, &sys, 0.1, &grid, 1e-4, Anchor::Left(zero())).unwrap();
    assert!(r < 1e-6, "residual {r}");
}

#[test]
fn residual_shrinks_quadratically() {
    let (ch, sys) = cauchy(3.0);
    let coarse = GridSpec::new(-4.0, 4.0, 401).unwrap();
    let fine = GridSpec::new(-4.0, 4.0, 801).unwrap();
    let a = verify_map_residual(&ch, &sys, 0.1, &coarse, 2e-4, Anchor::Left(zero())).unwrap();
    let b = verify_map_residual(&ch, &sys, 0.1, &fine, 1e-4, Anchor::Left(zero())).unwrap();
    assert!(a / b > 3.5 && a / b < 4.5, "{a} -> {b}");
}

#[test]
fn folded_profile_is_single_valued_after_the_shock() {
    let (ch, _) = cauchy(3.0);
    let labels = GridSpec::new(-10.0, 10.0, 20001).unwrap();
    let f = fold_to_peak(&ch, 3.0, 0.4, &labels).unwrap();
    assert_eq!(f.loops.len(), 1);
    for pair in f.samples.windows(2) {
        assert!(pair[1].x >= pair[0].x, "x decreases at s = {}", pair[1].s);
    }
    let (x, u) = f.peak().unwrap();
    assert!((x - 0.04059).abs() < 1e-4, "peak at {x}");
    assert!(u.im.abs() < 1e-10 && u.re > 0.9);
    let rel = (f.charge_after - f.charge_before).norm() / f.charge_before.norm();
    assert!(rel < 1e-6, "charge change {rel}");
}

#[test]
fn higher_charge_drifts_once_loops_are_cut() {
    // Near the shock the removed loop is small: at t = 0.4 the I_2 drift
    // is about 9.3e-3 and grows past 1e-2 by t = 0.45.
    let (ch, sys) = cauchy(3.0);
    let r = drift_report(&ch, &sys, &[2.0], &[0.4], &DriftOptions::default()).unwrap();
    let d = r.drift_for(2.0).unwrap();
    assert!(r.samples[0].post_shock);
    assert!((d - 9.3e-3).abs() < 5e-4, "drift {d}");
    let later = drift_report(&ch, &sys, &[2.0], &[0.45], &DriftOptions::default()).unwrap();
    assert!(later.drift_for(2.0).unwrap() > 1e-2);
}

#[test]
fn scenarios_are_deterministic_and_pass() {
    let cfg = ScenarioConfig::default();
    let first = run_all(&cfg);
    let again = run_all(&cfg);
    assert_eq!(first.len(), CATALOG.len());
    for ((name, a), (_, b)) in first.iter().zip(&again) {
        let (a, b) = (a.as_ref().unwrap(), b.as_ref().unwrap());
        assert_eq!(a.report.to_json().unwrap(), b.report.to_json().unwrap(), "{name}");
        let failed: Vec<String> = a.report.failures().map(|c| c.to_string()).collect();
        assert!(failed.is_empty(), "{name}: {failed:?}");
    }
}

#[test]
fn scenario_artifacts_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_scenario("rational_odd_shock", &ScenarioConfig::default()).unwrap();
    let paths = out.write(dir.path()).unwrap();
    assert!(paths.iter().any(|p| p.ends_with("report.json")));
    for p in &paths {
        let text = std::fs::read_to_string(p).unwrap();
        assert!(!text.is_empty(), "{}", p.display());
    }
    let events = std::fs::read_to_string(dir.path().join("rational_odd_shock/events.csv")).unwrap();
    assert!(events.starts_with("t_s,x_s,re_x0,im_x0,kind,system"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("rational_odd_shock/report.json")).unwrap())
            .unwrap();
    assert_eq!(report["passed"], serde_json::Value::Bool(true));
}
