//! Frequency profiles, the common/rare threshold and window sampling.

use proppkit::annotation::{AnnotatedSegment, FunctionSequence};
use proppkit::fixtures::{plot_samples, PLOT_LABELS};
use proppkit::homogenization::{frequency_profile, sample_windows, SampleOptions};

fn main() {
    let seqs: Vec<FunctionSequence> = PLOT_LABELS.iter().flat_map(|l| plot_samples(l).unwrap()).collect();
    let profile = frequency_profile(&seqs);
    println!("total {} mean {:.2}", profile.total, *profile.mean().numer() as f64 / *profile.mean().denom() as f64);
    println!("common: {:?}", profile.common_set.iter().map(|s| s.token()).collect::<Vec<_>>());
    print!("{}", &profile.to_csv()[..80]);
    println!("...");

    // a toy corpus of 20 novels, one window of 40 characters each
    let corpus: Vec<AnnotatedSegment> = (0..20)
        .map(|i| {
            let text = "天色渐暗(A)，他拔剑迎敌(Q)，终于获胜(S)。".repeat(4 + i % 3);
            let mut seg = AnnotatedSegment::from_inline(format!("novel-{i}"), proppkit::annotation::Genre::Xianxia, &text, Default::default()).unwrap();
            seg.novel = Some(seg.id.clone());
            seg
        })
        .collect();
    let windows = sample_windows(&corpus, SampleOptions { chars: 40, seed: 3, ..SampleOptions::default() }).unwrap();
    for w in windows.iter().take(4) {
        println!("{:<14} {} chars  {}", w.id, w.char_len(), w.sequence());
    }
    println!("{} windows", windows.len());
}
