//! Structural homogenization of continuation episodes and corpus frequency
//! profiles.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::annotation::{AnnotatedSegment, Annotation, FunctionSequence};
use crate::metrics::SplitAssignment;
use crate::taxonomy::{FunctionSymbol, FUNCTION_COUNT};

pub type Fraction = Ratio<u64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HomogenizationError {
    #[error("empty sequence")]
    EmptySequence,
    #[error("need at least 2 episodes, got {0}")]
    TooFewEpisodes(usize),
    #[error("group {group} has {available} novels, {needed} needed")]
    InsufficientNovels {
        group: usize,
        available: usize,
        needed: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

fn to_f64(f: Fraction) -> f64 {
    *f.numer() as f64 / *f.denom() as f64
}

fn ser_frac<S: Serializer>(f: &Fraction, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(to_f64(*f))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityKind {
    /// 1 - edit distance / longer length.
    #[default]
    EditDistance,
    /// Longest common subsequence / longer length.
    LcsRatio,
}

pub fn edit_distance(a: &[FunctionSymbol], b: &[FunctionSymbol]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn lcs_length(a: &[FunctionSymbol], b: &[FunctionSymbol]) -> usize {
    let mut prev = vec![0; b.len() + 1];
    let mut cur = vec![0; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Edit-distance similarity of two sequences.
pub fn seq_similarity(a: &FunctionSequence, b: &FunctionSequence) -> Result<Fraction, HomogenizationError> {
    seq_similarity_with(a, b, SimilarityKind::EditDistance)
}

pub fn seq_similarity_with(
    a: &FunctionSequence,
    b: &FunctionSequence,
    kind: SimilarityKind,
) -> Result<Fraction, HomogenizationError> {
    if a.is_empty() || b.is_empty() {
        return Err(HomogenizationError::EmptySequence);
    }
    let longest = a.len().max(b.len()) as u64;
    let shared = match kind {
        SimilarityKind::EditDistance => longest - edit_distance(&a.symbols, &b.symbols) as u64,
        SimilarityKind::LcsRatio => lcs_length(&a.symbols, &b.symbols) as u64,
    };
    Ok(Fraction::new(shared, longest))
}

/// Continuations generated from one preface.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EpisodeSet {
    pub episodes: Vec<FunctionSequence>,
    pub source_model: Option<String>,
    pub preface_id: Option<String>,
}

impl EpisodeSet {
    pub fn new(episodes: Vec<FunctionSequence>) -> Result<Self, HomogenizationError> {
        if episodes.len() < 2 {
            return Err(HomogenizationError::TooFewEpisodes(episodes.len()));
        }
        if episodes.iter().any(FunctionSequence::is_empty) {
            return Err(HomogenizationError::EmptySequence);
        }
        Ok(EpisodeSet {
            episodes,
            source_model: None,
            preface_id: None,
        })
    }

    pub fn with_model(mut self, model: impl Into<String>) -> Self {
        self.source_model = Some(model.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomogeneityReport {
    pub similarity: SimilarityKind,
    pub pairwise_matrix: Vec<Vec<f64>>,
    pub mean_similarity: f64,
    #[serde(serialize_with = "ser_frac")]
    pub first_marker_consistency: Fraction,
    #[serde(serialize_with = "ser_frac")]
    pub last_marker_consistency: Fraction,
    #[serde(serialize_with = "ser_frac")]
    pub distinct_ratio: Fraction,
    pub entropy_bits: f64,
}

impl HomogeneityReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("similarity: {:?}\n", self.similarity));
        out.push_str(&format!("mean pairwise similarity: {:.4}\n", self.mean_similarity));
        out.push_str(&format!(
            "first marker consistency: {:.3}\n",
            to_f64(self.first_marker_consistency)
        ));
        out.push_str(&format!(
            "last marker consistency: {:.3}\n",
            to_f64(self.last_marker_consistency)
        ));
        out.push_str(&format!("distinct ratio: {:.3}\n", to_f64(self.distinct_ratio)));
        out.push_str(&format!("entropy (bits): {:.4}\n", self.entropy_bits));
        out.push_str("pairwise matrix:\n");
        for row in &self.pairwise_matrix {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.3}")).collect();
            out.push_str(&format!("  {}\n", cells.join(" ")));
        }
        out
    }
}

/// Largest share of episodes agreeing on the symbol picked by `key`.
fn consistency(episodes: &[FunctionSequence], key: impl Fn(&FunctionSequence) -> FunctionSymbol) -> Fraction {
    let mut counts: HashMap<FunctionSymbol, u64> = HashMap::new();
    for e in episodes {
        *counts.entry(key(e)).or_default() += 1;
    }
    let best = counts.values().copied().max().unwrap_or(0);
    Fraction::new(best, episodes.len() as u64)
}

pub fn entropy_bits(counts: impl IntoIterator<Item = usize>) -> f64 {
    let counts: Vec<usize> = counts.into_iter().filter(|&c| c > 0).collect();
    let total: usize = counts.iter().sum();
    counts
        .iter()
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * p.log2()
        })
        .sum::<f64>()
        + 0.0
}

pub fn analyze_episodes(e: &EpisodeSet) -> Result<HomogeneityReport, HomogenizationError> {
    analyze_episodes_with(e, SimilarityKind::EditDistance)
}

pub fn analyze_episodes_with(e: &EpisodeSet, kind: SimilarityKind) -> Result<HomogeneityReport, HomogenizationError> {
    let eps = &e.episodes;
    let n = eps.len();
    if n < 2 {
        return Err(HomogenizationError::TooFewEpisodes(n));
    }
    let mut matrix = vec![vec![1.0; n]; n];
    let mut upper = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let s = seq_similarity_with(&eps[i], &eps[j], kind)?;
            matrix[i][j] = to_f64(s);
            matrix[j][i] = to_f64(s);
            upper.push(s);
        }
    }
    let mean = upper.iter().fold(Fraction::from_integer(0), |a, b| a + b) / upper.len() as u64;

    let mut pooled = [0usize; FUNCTION_COUNT];
    for sym in eps.iter().flat_map(|s| &s.symbols) {
        pooled[sym.index()] += 1;
    }
    let length: usize = pooled.iter().sum();
    let distinct = pooled.iter().filter(|&&c| c > 0).count();

    Ok(HomogeneityReport {
        similarity: kind,
        pairwise_matrix: matrix,
        mean_similarity: to_f64(mean),
        first_marker_consistency: consistency(eps, |s| s.symbols[0]),
        last_marker_consistency: consistency(eps, |s| s.symbols[s.len() - 1]),
        distinct_ratio: Fraction::new(distinct as u64, length as u64),
        entropy_bits: entropy_bits(pooled),
    })
}

/// `n` sequences of length `len` drawn uniformly over all functions.
pub fn random_episodes(n: usize, len: usize, rng: &mut impl Rng) -> Vec<FunctionSequence> {
    (0..n)
        .map(|_| {
            FunctionSequence::new(
                (0..len)
                    .map(|_| FunctionSymbol::ALL[rng.random_range(0..FUNCTION_COUNT)])
                    .collect(),
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyProfile {
    /// Registry order, one entry per function.
    pub counts: [usize; FUNCTION_COUNT],
    pub total: usize,
    pub common_set: BTreeSet<FunctionSymbol>,
    pub rare_set: BTreeSet<FunctionSymbol>,
}

impl FrequencyProfile {
    pub fn from_counts(counts: [usize; FUNCTION_COUNT]) -> Self {
        let total: usize = counts.iter().sum();
        let (common_set, rare_set) = FunctionSymbol::ALL
            .iter()
            .copied()
            // count > total / 34, without division
            .partition(|s| (counts[s.index()] as u128) * (FUNCTION_COUNT as u128) > total as u128);
        FrequencyProfile {
            counts,
            total,
            common_set,
            rare_set,
        }
    }

    /// Mean occurrences per function.
    pub fn mean(&self) -> Fraction {
        Fraction::new(self.total as u64, FUNCTION_COUNT as u64)
    }

    pub fn count(&self, symbol: FunctionSymbol) -> usize {
        self.counts[symbol.index()]
    }

    pub fn is_common(&self, symbol: FunctionSymbol) -> bool {
        self.common_set.contains(&symbol)
    }

    pub fn splits(&self) -> SplitAssignment {
        SplitAssignment::from_common(self.common_set.iter().copied())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("symbol,count,class\n");
        for s in FunctionSymbol::ALL {
            let class = if self.is_common(s) { "common" } else { "rare" };
            out.push_str(&format!("{},{},{}\n", s.token(), self.count(s), class));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "total: {}\nmean: {:.2} ({}/{})\ncommon: {}\n",
            self.total,
            to_f64(self.mean()),
            self.total,
            FUNCTION_COUNT,
            self.common_set.len()
        );
        out.push_str("symbol  count  class\n");
        for s in FunctionSymbol::ALL {
            let class = if self.is_common(s) { "common" } else { "rare" };
            out.push_str(&format!("{:<6}  {:>5}  {}\n", s.token(), self.count(s), class));
        }
        out
    }
}

impl Serialize for FrequencyProfile {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            counts: BTreeMap<FunctionSymbol, usize>,
            total: usize,
            mean: f64,
            common_set: &'a BTreeSet<FunctionSymbol>,
            rare_set: &'a BTreeSet<FunctionSymbol>,
        }
        Repr {
            counts: FunctionSymbol::ALL.iter().map(|&s| (s, self.count(s))).collect(),
            total: self.total,
            mean: to_f64(self.mean()),
            common_set: &self.common_set,
            rare_set: &self.rare_set,
        }
        .serialize(serializer)
    }
}

pub fn frequency_profile(seqs: &[FunctionSequence]) -> FrequencyProfile {
    let mut counts = [0usize; FUNCTION_COUNT];
    for sym in seqs.iter().flat_map(|s| &s.symbols) {
        counts[sym.index()] += 1;
    }
    FrequencyProfile::from_counts(counts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SampleOptions {
    pub groups: usize,
    pub novels_per_group: usize,
    pub chars: usize,
    pub seed: u64,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions {
            groups: 5,
            novels_per_group: 4,
            chars: 2000,
            seed: 0,
        }
    }
}

struct Novel<'a> {
    key: &'a str,
    first: &'a AnnotatedSegment,
    text: Vec<char>,
    annotations: Vec<Annotation>,
}

/// Draws one contiguous window per sampled novel.
///
/// Segments sharing a novel key are concatenated in input order. Novels are
/// shuffled under `seed` and dealt round-robin into `groups` groups, and the
/// first `novels_per_group` of each group are sampled. Windows keep the
/// annotations whose offsets fall inside them, rebased to the window start.
pub fn sample_windows(
    corpus: &[AnnotatedSegment],
    options: SampleOptions,
) -> Result<Vec<AnnotatedSegment>, HomogenizationError> {
    let SampleOptions {
        groups,
        novels_per_group,
        chars,
        seed,
    } = options;
    if groups == 0 || novels_per_group == 0 || chars == 0 {
        return Err(HomogenizationError::InvalidParameter(
            "groups, novels_per_group and chars must be positive".into(),
        ));
    }
    let mut novels: Vec<Novel> = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    for seg in corpus {
        let i = *index.entry(seg.novel_key()).or_insert_with(|| {
            novels.push(Novel {
                key: seg.novel_key(),
                first: seg,
                text: Vec::new(),
                annotations: Vec::new(),
            });
            novels.len() - 1
        });
        let novel = &mut novels[i];
        let base = novel.text.len();
        novel.text.extend(seg.clean_text.chars());
        novel.annotations.extend(seg.annotations.iter().map(|a| Annotation {
            offset: a.offset + base,
            symbol: a.symbol,
        }));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..novels.len()).collect();
    order.shuffle(&mut rng);
    let mut dealt: Vec<Vec<usize>> = vec![Vec::new(); groups];
    for (i, n) in order.into_iter().enumerate() {
        dealt[i % groups].push(n);
    }
    for (group, members) in dealt.iter().enumerate() {
        if members.len() < novels_per_group {
            return Err(HomogenizationError::InsufficientNovels {
                group,
                available: members.len(),
                needed: novels_per_group,
            });
        }
    }

    let mut out = Vec::with_capacity(groups * novels_per_group);
    for members in &dealt {
        for &n in &members[..novels_per_group] {
            let novel = &novels[n];
            let len = novel.text.len();
            let (start, end) = if len <= chars {
                (0, len)
            } else {
                let start = rng.random_range(0..=len - chars);
                (start, start + chars)
            };
            let annotations = novel
                .annotations
                .iter()
                .filter(|a| (a.offset > start && a.offset <= end) || (start == 0 && a.offset == 0))
                .map(|a| Annotation {
                    offset: a.offset - start,
                    symbol: a.symbol,
                })
                .collect();
            out.push(AnnotatedSegment {
                id: format!("{}@{start}", novel.key),
                genre: novel.first.genre,
                clean_text: novel.text[start..end].iter().collect(),
                annotations,
                rationale: None,
                annotator_id: novel.first.annotator_id.clone(),
                novel: Some(novel.key.to_string()),
            });
        }
    }
    Ok(out)
}
