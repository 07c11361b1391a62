//! Bundled reference data: annotated passages, plot samples and
//! continuation sequences.

use crate::annotation::{load_corpus_str, parse_sequence_file, AnnotatedSegment, FunctionSequence, ParseMode};

/// Two annotated passages as a corpus file (inline-marker form).
pub const PASSAGES_JSONL: &str = include_str!("../data/passages.jsonl");
/// The same two passages, one inline-annotated passage per line.
pub const PASSAGES_INLINE: &str = include_str!("../data/passages_inline.txt");
/// English rendering of the first passage.
pub const PASSAGE_EN: &str = include_str!("../data/passage_en.txt");

pub const PLOT_LABELS: [&str; 6] = [
    "battle",
    "emotional",
    "difficult_task",
    "adventure",
    "pretending",
    "daily_life",
];

const PLOT_FILES: [&str; 6] = [
    include_str!("../data/plots/battle.seq"),
    include_str!("../data/plots/emotional.seq"),
    include_str!("../data/plots/difficult_task.seq"),
    include_str!("../data/plots/adventure.seq"),
    include_str!("../data/plots/pretending.seq"),
    include_str!("../data/plots/daily_life.seq"),
];

pub const CONTINUATION_MODELS: [&str; 3] = ["deepseek_r1", "qwen3_32b", "doubao_pro"];

const CONTINUATION_FILES: [&str; 3] = [
    include_str!("../data/continuations/deepseek_r1.seq"),
    include_str!("../data/continuations/qwen3_32b.seq"),
    include_str!("../data/continuations/doubao_pro.seq"),
];

/// All fifteen continuation sequences, five per model.
pub const CONTINUATIONS_ALL: &str = include_str!("../data/continuations/all.seq");

/// Inline-annotated text of the first two doubao_pro continuations.
pub const DOUBAO_EPISODES: [&str; 2] = [
    include_str!("../data/continuations/doubao_pro_ep1.txt"),
    include_str!("../data/continuations/doubao_pro_ep2.txt"),
];

pub fn passages() -> Vec<AnnotatedSegment> {
    load_corpus_str(PASSAGES_JSONL, ParseMode::Strict).expect("bundled passages parse")
}

/// The 60 sampled sequences of one plot type.
pub fn plot_samples(label: &str) -> Option<Vec<FunctionSequence>> {
    let i = PLOT_LABELS.iter().position(|l| *l == label)?;
    Some(parse_sequence_file(PLOT_FILES[i]).expect("bundled plot samples parse"))
}

pub fn plot_sample_file(label: &str) -> Option<&'static str> {
    PLOT_LABELS.iter().position(|l| *l == label).map(|i| PLOT_FILES[i])
}

pub fn continuation_sequences(model: &str) -> Option<Vec<FunctionSequence>> {
    let i = CONTINUATION_MODELS.iter().position(|m| *m == model)?;
    Some(parse_sequence_file(CONTINUATION_FILES[i]).expect("bundled continuations parse"))
}
