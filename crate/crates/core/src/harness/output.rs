//! Turning free-form model output into per-instance predictions.

use crate::annotation::{parse_inline, parse_sequence_string, ParseMode};
use crate::metrics::Prediction;
use crate::taxonomy::FunctionSymbol;

/// Symbols named by `text`: inline markers if there are any, otherwise a
/// hyphen sequence ending the last nonempty line.
pub fn extract_symbols(text: &str) -> Vec<FunctionSymbol> {
    let (_, annotations) = parse_inline(text, ParseMode::Lenient).expect("lenient parsing never fails");
    if !annotations.is_empty() {
        return annotations.iter().map(|a| a.symbol).collect();
    }
    let Some(line) = text.lines().rev().find(|l| !l.trim().is_empty()) else {
        return Vec::new();
    };
    let line = line.trim();
    let tail = line
        .rsplit(|c: char| c.is_whitespace() || c == ':' || c == '：')
        .next()
        .unwrap_or(line)
        .trim_end_matches(['.', '。', ',', '，', ';', '!']);
    // a lone word only counts when it is the whole line
    if !tail.contains('-') && tail != line {
        return Vec::new();
    }
    parse_sequence_string(tail, ParseMode::Strict)
        .map(|s| s.symbols)
        .unwrap_or_default()
}

/// Aligns extracted symbols to `expected_instances` gold slots by order.
pub fn parse_model_output(text: &str, expected_instances: usize) -> Prediction {
    let symbols = extract_symbols(text);
    let mut slots: Vec<Option<FunctionSymbol>> = symbols.iter().copied().map(Some).take(expected_instances).collect();
    let extra_predictions = symbols.len().saturating_sub(expected_instances);
    slots.resize(expected_instances, None);
    Prediction {
        symbols: slots,
        extra_predictions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use FunctionSymbol as F;

    #[test]
    fn markers_first() {
        let p = parse_model_output("He looked for a way out. (K) A sound. (J)", 2);
        assert_eq!(p.symbols, [Some(F::Counteraction), Some(F::Mediation)]);
        assert_eq!(p.extra_predictions, 0);
    }

    #[test]
    fn trailing_sequence() {
        let p = parse_model_output("Here is my analysis.\n\nA-Lo-E-Q-P-S\n", 6);
        assert_eq!(p.symbols.len(), 6);
        assert!(p.symbols.iter().all(Option::is_some));
        assert_eq!(p.symbols[1], Some(F::MemoryLoss));
        let p = parse_model_output("Sequence: A-Lo-E.", 2);
        assert_eq!(p.symbols, [Some(F::InitialSituation), Some(F::MemoryLoss)]);
        assert_eq!(p.extra_predictions, 1);
    }

    #[test]
    fn prose_is_absent() {
        let p = parse_model_output("The night was long and nobody came.", 3);
        assert_eq!(p.symbols, [None, None, None]);
        assert_eq!(p.extra_predictions, 0);
        assert_eq!(parse_model_output("I saw A", 1).symbols, [None]);
        assert_eq!(parse_model_output("", 2).symbols, [None, None]);
        assert_eq!(parse_model_output("K", 1).symbols, [Some(F::Counteraction)]);
        assert_eq!(parse_model_output("well-known facts", 1).symbols, [None]);
    }

    #[test]
    fn padding_and_surplus() {
        let p = parse_model_output("(A)(B)(C)", 5);
        assert_eq!(p.symbols[3..], [None, None]);
        let p = parse_model_output("(A)(B)(C)", 1);
        assert_eq!(p.extra_predictions, 2);
    }
}
