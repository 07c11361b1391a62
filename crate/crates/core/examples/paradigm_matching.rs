//! Matching plot samples against the six built-in paradigms.

use proppkit::fixtures::{plot_samples, PLOT_LABELS};
use proppkit::paradigm::{builtin_paradigms, classify, matches, paradigm_table, parse_pattern, support, ParadigmRow};

fn main() {
    let battle = parse_pattern("(A)->(Q)->{O/S}").unwrap();
    let seq = "A-F-H-K-Q-S".parse().unwrap();
    let m = matches(&seq, &battle).unwrap();
    println!("{seq} ~ {battle}: {} at {:?}", m.matched, m.bindings);

    let all = builtin_paradigms();
    println!("labels for Em-A-K-E-Ch: {:?}", classify(&"Em-A-K-E-Ch".parse().unwrap(), &all).unwrap());

    let rows: Vec<ParadigmRow> = all
        .into_iter()
        .zip(PLOT_LABELS)
        .map(|(p, label)| {
            let sup = support(&plot_samples(label).unwrap(), &p).unwrap();
            ParadigmRow {
                plot: label.to_string(),
                note: sup.to_string(),
                pattern: p,
            }
        })
        .collect();
    print!("\n{}", paradigm_table(&rows, "Support"));
}
