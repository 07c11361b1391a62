//! Homogenization of continuation episodes against a random baseline.

use proppkit::fixtures::{continuation_sequences, CONTINUATION_MODELS};
use proppkit::homogenization::{analyze_episodes, random_episodes, seq_similarity, EpisodeSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    for model in CONTINUATION_MODELS {
        let set = EpisodeSet::new(continuation_sequences(model).unwrap()).unwrap();
        let r = analyze_episodes(&set).unwrap();
        println!(
            "{model:<12} mean sim {:.3}  first {}  last {}  entropy {:.2} bits",
            r.mean_similarity, r.first_marker_consistency, r.last_marker_consistency, r.entropy_bits
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let baseline = analyze_episodes(&EpisodeSet::new(random_episodes(5, 7, &mut rng)).unwrap()).unwrap();
    println!("{:<12} mean sim {:.3}", "random", baseline.mean_similarity);

    let a = "A-J-E-Lo-M-N-O".parse().unwrap();
    let b = "A-J-E-Q-M-N-O".parse().unwrap();
    println!("\nsim({a}, {b}) = {}", seq_similarity(&a, &b).unwrap());
}
