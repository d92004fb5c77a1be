use std::path::PathBuf;

use fundlim::experiments::{
    fig1_config, load_config, load_csv, emit_csv, preset, run_experiment, write_csv, ExperimentConfig, Family,
    RunOptions, Task,
};

fn small(task: Task) -> ExperimentConfig {
    let mut cfg = fig1_config();
    cfg.experiment_id = "small".into();
    cfg.support_size = 40;
    cfg.n_grid = vec![200, 400, 800];
    cfg.trials = 6;
    if task == Task::Entropy {
        cfg.task = Task::Entropy;
        cfg.q_family = None;
        cfg.estimators = vec!["plugin".into(), "optimal".into(), "compression".into()];
        cfg.classifiers = vec![];
    } else {
        cfg.classifiers = vec!["tq".into(), "mle".into(), "tq_mc".into(), "mle_mc".into()];
    }
    cfg
}

fn csv_bytes(cfg: &ExperimentConfig, threads: usize) -> Vec<u8> {
    let out = run_experiment(
        cfg,
        &RunOptions {
            threads: Some(threads),
            record_wallclock: false,
        },
    )
    .unwrap();
    let mut buf = Vec::new();
    write_csv(&out.records, &mut buf).unwrap();
    buf
}

#[test]
fn shipped_configs_match_presets() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["fig1", "fig2", "entropy", "enlargement"] {
        let cfg = load_config(&dir.join(format!("{name}.toml"))).unwrap();
        assert_eq!(cfg, preset(name).unwrap(), "{name}");
    }
}

#[test]
fn output_is_independent_of_thread_count() {
    for task in [Task::BayesError, Task::Entropy] {
        let cfg = small(task);
        let a = csv_bytes(&cfg, 1);
        assert_eq!(a, csv_bytes(&cfg, 4));
        assert_eq!(a, csv_bytes(&cfg, 4));
    }
    let mut two = small(Task::BayesError);
    two.q_known = false;
    two.estimators = vec!["two_sample_plugin".into(), "two_sample_optimal".into()];
    two.classifiers = vec!["scheffe".into()];
    assert_eq!(csv_bytes(&two, 1), csv_bytes(&two, 3));
}

#[test]
fn records_are_complete_sorted_and_consistent() {
    let cfg = small(Task::BayesError);
    let out = run_experiment(&cfg, &RunOptions::default()).unwrap();
    let methods = cfg.method_ids();
    assert_eq!(out.records.len(), cfg.trials * cfg.n_grid.len() * methods.len());
    let key = |r: &fundlim::experiments::ResultRecord| {
        (r.n, r.trial, methods.iter().position(|m| m == &r.method).unwrap())
    };
    assert!(out.records.windows(2).all(|w| key(&w[0]) < key(&w[1])));
    for r in &out.records {
        if let (Some(v), Some(t), Some(e)) = (r.value, r.truth, r.abs_error) {
            assert_eq!(e, (v - t).abs());
        }
        if r.method.ends_with("regret") || r.method.ends_with("regret_mc") {
            assert!(r.regret.unwrap() >= -1e-15);
            assert!(r.rate_bound.unwrap() > 0.0);
        }
    }
}

#[test]
fn csv_survives_a_round_trip_through_disk() {
    let cfg = small(Task::Entropy);
    let out = run_experiment(&cfg, &RunOptions::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    emit_csv(&out.records, &path).unwrap();
    assert_eq!(load_csv(&path).unwrap(), out.records);
}

#[test]
fn explicit_family_must_match_support() {
    let mut cfg = small(Task::Entropy);
    cfg.p_family = Family::Explicit { probs: vec![0.5, 0.5] };
    assert!(cfg.validate().is_err());
    cfg.support_size = 2;
    cfg.validate().unwrap();
    let out = run_experiment(&cfg, &RunOptions::default()).unwrap();
    assert!(out.records.iter().all(|r| r.truth == Some(1.0)));
}
