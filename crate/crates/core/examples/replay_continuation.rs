//! Replayed continuations with sidecar sequences, then homogenization.

use proppkit::annotation::emit_sequence_file;
use proppkit::fixtures;
use proppkit::harness::{run_continuation, AnnotationMode, BackendConfig, BackendKind, ContinuationRun, ReplayRecord};
use proppkit::homogenization::{analyze_episodes, EpisodeSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("proppkit-replay-example");
    std::fs::create_dir_all(&dir)?;

    let preface = fixtures::passages().remove(0);
    let run = ContinuationRun::new(preface);
    let seqs = fixtures::continuation_sequences("doubao_pro").unwrap();

    // record one canned response per episode under the request digest
    let cfg = BackendConfig::default();
    let request = cfg.request(&run.template, &run.preface.clean_text, run.seed);
    let mut fixture = String::new();
    let mut sidecars = Vec::new();
    for (i, seq) in seqs.iter().enumerate() {
        let text = fixtures::DOUBAO_EPISODES.get(i).copied().unwrap_or("(episode text not bundled)");
        fixture.push_str(&serde_json::to_string(&ReplayRecord::for_request(&request, Some(i as u32), text))?);
        fixture.push('\n');
        let path = dir.join(format!("ep{}.seq", i + 1));
        std::fs::write(&path, emit_sequence_file(std::slice::from_ref(seq)))?;
        sidecars.push(path);
    }
    let replay = dir.join("replay.jsonl");
    std::fs::write(&replay, fixture)?;

    let cfg = BackendConfig {
        kind: BackendKind::Replay,
        replay_path: Some(replay),
        ..BackendConfig::default()
    };
    let run = ContinuationRun {
        annotation_mode: AnnotationMode::File(sidecars),
        ..run
    };
    let out = run_continuation(&cfg, &run)?;
    for (i, (text, seq)) in out.episodes.iter().zip(&out.sequences).enumerate() {
        println!("Ep.{} {:<16} {}...", i + 1, seq.to_string(), text.chars().take(20).collect::<String>());
    }
    let report = analyze_episodes(&EpisodeSet::new(out.sequences)?)?;
    println!("mean similarity {:.3}", report.mean_similarity);
    Ok(())
}
