mod common;

use std::time::Duration;

use proppkit::fixtures;
use proppkit::harness::{
    run_continuation, run_continuation_with, run_recognition, run_recognition_with, AnnotationMode, BackendConfig,
    BackendKind, ContinuationRun, HarnessError, MockMode, RecognitionRun, ReplayBackend, ReplayRecord,
};
use proppkit::homogenization::{analyze_episodes, EpisodeSet};

fn replay_for(cfg: &BackendConfig, run: &RecognitionRun, responses: &[&str]) -> ReplayBackend {
    let records = run
        .segments
        .iter()
        .zip(responses)
        .map(|(s, r)| ReplayRecord::for_request(&cfg.request(&run.template, &s.clean_text, run.seed), None, *r));
    ReplayBackend::from_records(records, "fixture")
}

#[test]
fn replayed_predictions_hit_four_of_eleven() {
    let cfg = BackendConfig::default();
    let run = RecognitionRun::new(fixtures::passages());
    assert_eq!(run.segments.iter().map(|s| s.annotations.len()).sum::<usize>(), 11);
    let backend = replay_for(&cfg, &run, &["K-B-K-B-E-B-B", "B-Re-B-B"]);
    let out = run_recognition_with(&cfg, &backend, &run).unwrap();
    assert_eq!(format!("{:.3}", out.report.sum.accuracy.mean), "0.364");
    assert!(out.report.sum.accuracy.std < 1e-9);
    assert!((out.report.common.recall.mean - 0.6).abs() < 1e-9);
    assert_eq!(out.successful_predictions, 50);
}

#[test]
fn missing_replay_is_fatal() {
    let cfg = BackendConfig::default();
    let run = RecognitionRun::new(fixtures::passages());
    let backend = replay_for(&cfg, &run, &["K"]);
    assert!(matches!(run_recognition_with(&cfg, &backend, &run), Err(HarnessError::ReplayMiss(_))));
}

#[test]
fn ledger_accounts_for_every_prediction() {
    for (mode, rounds, preds) in [(MockMode::Noisy(0.3), 3, 4), (MockMode::Timeout, 2, 5), (MockMode::Echo, 1, 1)] {
        let cfg = BackendConfig { mock_mode: mode, ..BackendConfig::default() };
        let run = RecognitionRun { rounds, preds_per_round: preds, ..RecognitionRun::new(fixtures::passages()) };
        let out = run_recognition(&cfg, &run).unwrap();
        assert_eq!(out.ledger.failed_predictions + out.successful_predictions, rounds * preds);
    }
}

#[test]
fn parallelism_does_not_change_results() {
    let run = RecognitionRun { seed: 11, ..RecognitionRun::new(fixtures::passages()) };
    let reports: Vec<String> = [1, 3, 8]
        .into_iter()
        .map(|max_parallel| {
            let cfg = BackendConfig { mock_mode: MockMode::Noisy(0.4), max_parallel, ..BackendConfig::default() };
            serde_json::to_string(&run_recognition(&cfg, &run).unwrap().report).unwrap()
        })
        .collect();
    assert!(reports.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn closed_port_is_unreachable() {
    let cfg = BackendConfig {
        kind: BackendKind::Http,
        endpoint: Some("http://127.0.0.1:9/v1/chat/completions".into()),
        model_name: Some("m".into()),
        timeout: Duration::from_secs(2),
        ..BackendConfig::default()
    };
    let run = RecognitionRun { rounds: 1, preds_per_round: 2, ..RecognitionRun::new(fixtures::passages()) };
    assert!(matches!(run_recognition(&cfg, &run), Err(HarnessError::BackendUnreachable(_))));
}

fn continuation_fixture(n_sidecars: usize) -> (tempfile::TempDir, BackendConfig, ContinuationRun) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = BackendConfig::default();
    let mut run = ContinuationRun::new(fixtures::passages().remove(0));
    let req = cfg.request(&run.template, &run.preface.clean_text, run.seed);
    let records: String = (0..5u32)
        .map(|i| {
            let text = fixtures::DOUBAO_EPISODES.get(i as usize).copied().unwrap_or("(episode text not bundled)");
            serde_json::to_string(&ReplayRecord::for_request(&req, Some(i), text)).unwrap() + "\n"
        })
        .collect();
    let replay = dir.path().join("replay.jsonl");
    std::fs::write(&replay, records).unwrap();
    let seqs = fixtures::continuation_sequences("doubao_pro").unwrap();
    let paths = seqs
        .iter()
        .take(n_sidecars)
        .enumerate()
        .map(|(i, s)| {
            let p = dir.path().join(format!("ep{}.seq", i + 1));
            std::fs::write(&p, format!("{s}\n")).unwrap();
            p
        })
        .collect();
    run.annotation_mode = AnnotationMode::File(paths);
    let cfg = BackendConfig { kind: BackendKind::Replay, replay_path: Some(replay), ..cfg };
    (dir, cfg, run)
}

#[test]
fn replayed_continuation_reproduces_sidecars() {
    let (_dir, cfg, run) = continuation_fixture(5);
    let out = run_continuation(&cfg, &run).unwrap();
    let expected = fixtures::continuation_sequences("doubao_pro").unwrap();
    assert_eq!(out.sequences.iter().map(|s| s.to_string()).collect::<Vec<_>>(), expected.iter().map(|s| s.to_string()).collect::<Vec<_>>());
    assert_eq!(out.episodes[0], fixtures::DOUBAO_EPISODES[0]);
    let report = analyze_episodes(&EpisodeSet::new(out.sequences).unwrap()).unwrap();
    assert_eq!(format!("{:.3}", report.mean_similarity), "0.914");
}

#[test]
fn short_sidecar_list_is_reported() {
    let (_dir, cfg, run) = continuation_fixture(4);
    let backend = cfg.build(&[]).unwrap();
    assert!(matches!(
        run_continuation_with(&cfg, backend.as_ref(), &run),
        Err(HarnessError::MissingSidecar { episode: 4 })
    ));
}
