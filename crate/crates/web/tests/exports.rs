use riq_web::{critical_trajectory_json, generator_spectrum_json, weak_convergence_json, MAX_SAMPLES};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn trajectory_tracks_the_semigroup() {
    let coarse = parse(critical_trajectory_json(1, 1.0 / 64.0, 2.0).unwrap());
    let fine = parse(critical_trajectory_json(1, 1.0 / 512.0, 2.0).unwrap());
    assert_eq!(coarse["discrete"][0], 1.0);
    assert!(fine["times"].as_array().unwrap().len() <= MAX_SAMPLES + 2);
    let (gc, gf) = (coarse["max_gap"].as_f64().unwrap(), fine["max_gap"].as_f64().unwrap());
    assert!(gf < gc && gf < 5e-2, "{gc} {gf}");
    assert_eq!(fine["times"].as_array().unwrap().last().unwrap().as_f64().unwrap(), 2.0);
}

#[test]
fn trajectory_rejects_bad_input() {
    assert!(critical_trajectory_json(1, 0.0, 1.0).is_err());
    assert!(critical_trajectory_json(1, 1e-9, 10.0).is_err());
}

#[test]
fn weak_curve_has_second_order() {
    let v = parse(weak_convergence_json(4, 2, 1, 1.0).unwrap());
    assert_eq!(v["points"].as_array().unwrap().len(), 4);
    assert_eq!(v["pass"], true);
    let order = v["fitted_order"].as_f64().unwrap();
    assert!((1.5..=2.5).contains(&order));
}

#[test]
fn spectra_are_dissipative() {
    for which in ["weak", "thermal", "thermal_averaged", "critical"] {
        let v = parse(generator_spectrum_json(4, 2, 1, 1.0, which).unwrap());
        let ev = v["eigenvalues"].as_array().unwrap();
        assert_eq!(ev.len(), 9);
        assert!(ev.iter().all(|z| z[0].as_f64().unwrap() <= 1e-9), "{which}");
    }
    assert!(generator_spectrum_json(4, 2, 1, 1.0, "other").is_err());
    assert!(generator_spectrum_json(4, 0, 1, 1.0, "weak").is_err());
}
