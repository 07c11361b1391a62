//! Inline-marker parsing, round trips and corpus loading.

use proppkit::annotation::{emit_inline, parse_inline, validate_coverage, AnnotatedSegment, Genre, ParseMode};
use proppkit::fixtures;

fn main() {
    let text = "他动作敏捷，显然不是一个普通人（E)。突然，黑衣人脱下黑外套(Fa)。";
    let (clean, anns) = parse_inline(text, ParseMode::Strict).unwrap();
    println!("clean: {clean}");
    for a in &anns {
        println!("  {:>3}  {}", a.offset, a.symbol);
    }

    let seg = AnnotatedSegment::from_inline("demo", Genre::Fantasy, text, ParseMode::Strict).unwrap();
    // markers re-emitted with ASCII brackets
    println!("emitted: {}", emit_inline(&seg));

    // strict mode rejects short unknown tokens; lenient keeps them as text
    let bad = "他来了(Qx)。";
    println!("strict: {}", parse_inline(bad, ParseMode::Strict).unwrap_err());
    println!("lenient: {:?}", parse_inline(bad, ParseMode::Lenient).unwrap().0);

    let corpus = fixtures::passages();
    for s in &corpus {
        println!("{} [{}] {}", s.id, s.genre, s.sequence());
    }
    let coverage = validate_coverage(&corpus);
    println!("under-covered functions: {}", coverage.under_covered.len());
}
