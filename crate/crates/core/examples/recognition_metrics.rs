//! Instance-level scoring with common/rare splits, aggregation and kappa.

use proppkit::fixtures;
use proppkit::metrics::{aggregate, cohen_kappa, gold_instances, recognition_table, score_instances, to_f64, Prediction, SplitAssignment};

fn main() {
    let symbols: Vec<_> = fixtures::passages().iter().flat_map(|s| s.sequence().symbols).collect();
    let gold = gold_instances(&symbols, &SplitAssignment::default());

    // correct on K, K, E and Re; silent elsewhere
    let mut pred = Prediction::absent(gold.len());
    for i in [0, 2, 4, 8] {
        pred.symbols[i] = Some(gold[i].symbol);
    }
    let scores = score_instances(&gold, &pred).unwrap();
    println!(
        "sum ACC {:.3}  common recall {}  rare recall {}",
        to_f64(scores.sum.accuracy),
        scores.common.recall,
        scores.rare.recall
    );

    let perfect = score_instances(&gold, &Prediction::exact(&symbols)).unwrap();
    let report = aggregate(&[vec![scores; 5], vec![perfect; 5]]).unwrap();
    print!("\n{}", recognition_table(&[("two rounds".into(), &report)]));

    let a = ["A", "A", "B", "B", "C", "C", "A", "B", "C", "A"];
    let b = ["A", "A", "B", "B", "C", "C", "A", "B", "A", "B"];
    println!("\nkappa = {:.6}", cohen_kappa(&a, &b).unwrap());
}
