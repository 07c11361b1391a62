#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use proppkit::annotation::FunctionSequence;
use proppkit::paradigm::{ParadigmPattern, PatternElement};
use proppkit::taxonomy::{FunctionSymbol, FUNCTION_COUNT};
use proptest::prelude::*;

pub fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(rel)
}

pub fn symbol() -> impl Strategy<Value = FunctionSymbol> {
    (0..FUNCTION_COUNT).prop_map(|i| FunctionSymbol::from_index(i).unwrap())
}

/// Symbols from a small alphabet, so random sequences share structure.
pub fn small_symbol() -> impl Strategy<Value = FunctionSymbol> {
    (0..5usize).prop_map(|i| FunctionSymbol::from_index(i).unwrap())
}

pub fn sequence(max_len: usize) -> impl Strategy<Value = FunctionSequence> {
    prop::collection::vec(small_symbol(), 1..=max_len).prop_map(FunctionSequence::new)
}

pub fn run_cli(args: &[&str]) -> proppkit::cli::Outcome {
    run_cli_env(args, &HashMap::new())
}

pub fn run_cli_env(args: &[&str], env: &HashMap<String, String>) -> proppkit::cli::Outcome {
    let mut argv = vec!["proppkit".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    proppkit::cli::run(argv, env)
}

/// Exhaustive matcher: tries every increasing choice of interior positions.
pub fn brute_force_match(seq: &[FunctionSymbol], p: &ParadigmPattern) -> bool {
    let n = seq.len();
    if n < 2 || !p.start().accepts(seq[0]) || !p.end().accepts(seq[n - 1]) {
        return false;
    }
    fn place(seq: &[FunctionSymbol], els: &[PatternElement], from: usize, end: usize) -> bool {
        match els.split_first() {
            None => true,
            Some((e, rest)) => (from..end).any(|i| e.accepts(seq[i]) && place(seq, rest, i + 1, end)),
        }
    }
    place(seq, p.interior(), 1, n - 1)
}
