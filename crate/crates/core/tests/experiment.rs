use std::fs;

use rand::seq::SliceRandom;
use sha2::{Digest, Sha256};

use lpadapt::experiment::{
    emit_outputs, run_experiment, run_with, ExperimentConfig, Learner, RunManifest, CURVE_CSV,
    CURVE_SVG, MANIFEST_JSON, STEPS_CSV,
};
use lpadapt::metrics::{
    decreasing_pairs, frontier_sweep, learning_curve, time_average_effectiveness,
};
use lpadapt::rng::situation_rng;

fn config(json: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(json).unwrap()
}

fn stationary(horizon: usize, replications: usize) -> ExperimentConfig {
    config(&format!(
        r#"{{"n":2,"horizon":{horizon},"replications":{replications},"seed":9,
            "schedule":{{"kind":"fixed","targets":[[0.8,0.6]]}},
            "generator":{{"redraw_matrix":true}}}}"#
    ))
}

#[test]
fn stationary_curve_trends_upward() {
    let (traces, _) = run_experiment(&stationary(100, 100)).unwrap();
    let curve: Vec<f64> = learning_curve(&traces)
        .unwrap()
        .into_iter()
        .map(|p| p.1)
        .collect();
    // A rising curve has fewer downward steps than the same values in random order.
    let mut shuffled = curve.clone();
    shuffled.shuffle(&mut situation_rng(1));
    let (ours, control) = (decreasing_pairs(&curve), decreasing_pairs(&shuffled));
    assert!(ours < control, "{ours} vs shuffled {control}");
    let early = curve[..10].iter().sum::<f64>() / 10.0;
    let late = curve[90..].iter().sum::<f64>() / 10.0;
    assert!(late > early, "{early} -> {late}");
}

#[test]
fn learner_beats_uniform_baseline_when_stationary() {
    let cfg = stationary(100, 30);
    let learned = time_average_effectiveness(&run_experiment(&cfg).unwrap().0).unwrap();
    let baseline =
        time_average_effectiveness(&run_with(&cfg, Learner::Uniform).unwrap().0).unwrap();
    assert!(learned > baseline, "{learned} vs {baseline}");
}

#[test]
fn frontier_endpoints() {
    let base = config(
        r#"{"n":2,"horizon":400,"replications":20,"seed":2,
            "schedule":{"kind":"step","targets":[[0.9,0.1],[0.1,0.9]]},
            "generator":{"redraw_matrix":true}}"#,
    );
    let rows = frontier_sweep(&base, &[1, 200], 0.9).unwrap().rows;
    // Rapid switching defeats learning; long epochs leave it almost perfect.
    assert!(rows[0].mean_eta < rows[1].mean_eta);
    assert!(rows[1].mean_eta >= 0.95, "{:?}", rows[1]);
    assert!(!rows[0].qualifies && rows[1].qualifies);
}

#[test]
fn outputs_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = stationary(5, 2);
    let (traces, mut manifest) = run_experiment(&cfg).unwrap();
    let written = emit_outputs(&traces, &mut manifest, dir.path(), false).unwrap();
    assert_eq!(written.len(), 3);
    assert!(!dir.path().join(CURVE_SVG).exists());

    let steps = fs::read_to_string(dir.path().join(STEPS_CSV)).unwrap();
    let lines: Vec<&str> = steps.lines().collect();
    assert_eq!(lines[0], "replication,t,epoch,eta,coincide,tau_flag,c_hat");
    assert_eq!(lines.len(), 1 + 2 * 5);
    assert!(!steps.contains('\r'));
    assert!(lines[1].starts_with("0,0,0,"));
    assert!(lines[6].starts_with("1,0,0,"));
    let c_hat = lines[1].rsplit(',').next().unwrap();
    assert_eq!(c_hat, "0.707106781;0.707106781");

    let curve = fs::read_to_string(dir.path().join(CURVE_CSV)).unwrap();
    assert!(curve.starts_with("t,mean_eta,coincide_rate\n"));
    assert_eq!(curve.lines().count(), 6);

    let text = fs::read_to_string(dir.path().join(MANIFEST_JSON)).unwrap();
    let back: RunManifest = serde_json::from_str(&text).unwrap();
    assert_eq!(back.config, cfg);
    assert_eq!(back.replication_seeds, cfg.replication_seeds());
    for name in [STEPS_CSV, CURVE_CSV] {
        let bytes = fs::read(dir.path().join(name)).unwrap();
        assert_eq!(back.outputs[name], hex::encode(Sha256::digest(&bytes)));
    }

    emit_outputs(&traces, &mut manifest, dir.path(), true).unwrap();
    let svg = fs::read_to_string(dir.path().join(CURVE_SVG)).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(manifest.outputs.contains_key(CURVE_SVG));
}

#[test]
fn replication_order_does_not_depend_on_scheduling() {
    let cfg = stationary(20, 6);
    let (a, _) = run_experiment(&cfg).unwrap();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap();
    let (b, _) = pool.install(|| run_experiment(&cfg)).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().enumerate().all(|(i, t)| t.replication_id == i));
}

#[test]
fn bad_configs_are_config_errors() {
    for bad in [
        r#"{"n":0,"horizon":5,"replications":1,"schedule":{"kind":"fixed","targets":[[1]]}}"#,
        r#"{"n":2,"horizon":5,"replications":1,"schedule":{"kind":"fixed","targets":[[1,1,1]]}}"#,
        r#"{"n":2,"horizon":5,"replications":1,"schedule":{"kind":"fixed","targets":[[1,1]]},"operator":{"p_noise":2}}"#,
        r#"{"n":2,"horizon":5,"replications":1,"schedule":{"kind":"fixed","targets":[[1,1]]},"bogus":1}"#,
        r#"{"n":2,"horizon":5}"#,
    ] {
        let err = ExperimentConfig::from_json(bad).unwrap_err();
        assert!(err.is_config_error(), "{bad}: {err}");
    }
}
