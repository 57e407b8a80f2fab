//! End-to-end behaviour of preprocess / run / report on a tiny corpus.

mod support;

use std::fs;

use cxrpipe::pipeline::{cmd_preprocess, cmd_report, cmd_run, Experiment, PipelineConfig, RunOptions};
use cxrpipe::Error;

#[test]
fn preprocess_is_idempotent_and_keyed_by_operator_settings() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = support::tiny_workspace(dir.path(), 10);

    let first = cmd_preprocess(&cfg).unwrap();
    assert_eq!((first.samples, first.computed, first.cached), (10, 40, 0));
    assert!(first.is_success());
    let mut files = 0;
    for v in fs::read_dir(cxrpipe::pipeline::variant_cache(&cfg).dir()).unwrap() {
        files += fs::read_dir(v.unwrap().path()).unwrap().count();
    }
    assert_eq!(files, 40);

    let second = cmd_preprocess(&cfg).unwrap();
    assert_eq!((second.computed, second.cached), (0, 40));

    cfg.preprocess.border += 1;
    let third = cmd_preprocess(&cfg).unwrap();
    assert_eq!(third.computed, 40);
}

#[test]
fn unreadable_images_are_listed_and_others_still_processed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = support::tiny_workspace(dir.path(), 6);
    fs::write(dir.path().join("images/syn00002.pgm"), b"not a pgm").unwrap();
    let s = cmd_preprocess(&cfg).unwrap();
    assert!(!s.is_success());
    assert_eq!(s.failures.len(), 1);
    assert_eq!(s.failures[0].0, "syn00002");
    assert_eq!(s.computed, 20);
}

#[test]
fn run_without_cache_names_the_preprocess_command() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = support::tiny_workspace(dir.path(), 10);
    let err = cmd_run(&cfg, &RunOptions::default()).unwrap_err();
    assert!(matches!(err, Error::MissingCache { missing: 40, .. }), "{err}");
    assert!(err.to_string().contains("cxrpipe preprocess"));
}

#[test]
fn full_protocol_resumes_and_reports_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = support::tiny_workspace(dir.path(), 30);
    cmd_preprocess(&cfg).unwrap();

    let run = cmd_run(&cfg, &RunOptions { workers: Some(2), experiments: None }).unwrap();
    // 7 distinct models per resample, 2 resamples
    assert_eq!((run.trained, run.reused), (14, 0));
    let csv = fs::read_to_string(run.run_dir.join("auc_report.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 8 + 1);
    assert_eq!(lines[0].split(',').count(), 1 + 6 * 3);
    assert!(lines[9].starts_with("avg,"));
    assert!(run.run_dir.join("config.toml").is_file());
    assert_eq!(PipelineConfig::load(run.run_dir.join("config.toml")).unwrap().hash(), cfg.hash());
    for e in Experiment::ALL {
        assert!(run.run_dir.join(format!("records/{e}.json")).is_file());
    }
    assert_eq!(run.correlations.len(), 4);

    // resume: every job is reused, reports are byte-identical
    let again = cmd_run(&cfg, &RunOptions::default()).unwrap();
    assert_eq!((again.trained, again.reused), (0, 14));
    assert_eq!(fs::read_to_string(again.run_dir.join("auc_report.csv")).unwrap(), csv);

    // an interrupted job is retrained, and only that one
    fs::remove_file(run.run_dir.join("jobs/lung_cropped-r1-s0.json")).unwrap();
    let resumed = cmd_run(&cfg, &RunOptions::default()).unwrap();
    assert_eq!((resumed.trained, resumed.reused), (1, 13));
    assert_eq!(fs::read_to_string(resumed.run_dir.join("auc_report.csv")).unwrap(), csv);

    let a = cmd_report(&cfg.paths.output).unwrap();
    let first: Vec<Vec<u8>> = a.files.iter().map(|p| fs::read(p).unwrap()).collect();
    assert!(a.files.iter().any(|p| p.to_string_lossy().ends_with("roc_lung_mass.svg")));
    assert!(a.files.iter().any(|p| p.to_string_lossy().ends_with("correlation_en_normal-r0.svg")));
    let b = cmd_report(&a.run_dir).unwrap();
    assert_eq!(a.files, b.files);
    let second: Vec<Vec<u8>> = b.files.iter().map(|p| fs::read(p).unwrap()).collect();
    assert_eq!(first, second);
}

#[test]
fn single_experiment_report_has_one_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = support::tiny_workspace(dir.path(), 20);
    cmd_preprocess(&cfg).unwrap();
    let run = cmd_run(
        &cfg,
        &RunOptions {
            workers: Some(1),
            experiments: Some(vec![Experiment::Normal]),
        },
    )
    .unwrap();
    assert_eq!(run.trained, 2);
    let csv = fs::read_to_string(run.run_dir.join("auc_report.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "finding,normal_mean,normal_sd,normal_n");
}

#[test]
fn preprocessed_ensemble_without_members_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = support::tiny_workspace(dir.path(), 10);
    let err = cmd_run(
        &cfg,
        &RunOptions {
            workers: None,
            experiments: Some(vec![Experiment::Normal, Experiment::EnPreprocessed]),
        },
    )
    .unwrap_err();
    assert_eq!(err.exit_code(), 1);
}
