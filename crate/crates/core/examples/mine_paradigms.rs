//! Inducing a paradigm per plot type from its 60 samples.

use proppkit::fixtures::{plot_samples, PLOT_LABELS};
use proppkit::paradigm::{mine, parse_fraction, MineOptions};

fn main() {
    let options = MineOptions {
        min_support: parse_fraction("0.6").unwrap(),
        max_alt: 2,
    };
    for label in PLOT_LABELS {
        let seqs = plot_samples(label).unwrap();
        match mine(&seqs, options) {
            Ok(m) => {
                let kept: Vec<_> = m.candidates.iter().filter(|c| c.ordered).map(|c| c.symbol.token()).collect();
                println!("{label:<15} {:<24} {}  ordered interiors: {kept:?}", m.pattern.to_string(), m.support);
            }
            Err(e) => println!("{label:<15} {e}"),
        }
    }

    // a stricter threshold leaves some plot types without a paradigm
    let strict = MineOptions {
        min_support: parse_fraction("0.9").unwrap(),
        max_alt: 1,
    };
    println!("\nbattle at 0.9: {:?}", mine(&plot_samples("battle").unwrap(), strict).map(|m| m.pattern.to_string()));
}
