//! A recognition run against the deterministic mock backend.

use proppkit::fixtures;
use proppkit::harness::{run_recognition, BackendConfig, MockMode, RecognitionRun};
use proppkit::metrics::recognition_table;

fn main() {
    let mut run = RecognitionRun::new(fixtures::passages());
    run.seed = 42;

    let mut rows = Vec::new();
    for mode in [MockMode::Echo, MockMode::Noisy(0.3), MockMode::Noisy(0.7), MockMode::Timeout] {
        let cfg = BackendConfig {
            mock_mode: mode,
            ..BackendConfig::default()
        };
        let out = run_recognition(&cfg, &run).unwrap();
        println!("{}: {} failed of {}", out.backend, out.ledger.failed_predictions, run.rounds * run.preds_per_round);
        rows.push((out.backend, out.report));
    }
    let refs: Vec<_> = rows.iter().map(|(n, r)| (n.clone(), r)).collect();
    print!("\n{}", recognition_table(&refs));
}
