//! Instance-level recognition scoring, round aggregation and Cohen's kappa.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::Hash;

use num_rational::Ratio;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::annotation::AnnotatedSegment;
use crate::taxonomy::FunctionSymbol;

pub type Fraction = Ratio<u64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("segment {0:?} has no counterpart in the second annotation set")]
    UnpairedSegment(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Common,
    Rare,
}

/// Which functions count as common; everything else is rare.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitAssignment {
    common: BTreeSet<FunctionSymbol>,
}

impl SplitAssignment {
    pub fn from_common(common: impl IntoIterator<Item = FunctionSymbol>) -> Self {
        SplitAssignment {
            common: common.into_iter().collect(),
        }
    }

    pub fn split_of(&self, symbol: FunctionSymbol) -> Split {
        if self.common.contains(&symbol) {
            Split::Common
        } else {
            Split::Rare
        }
    }

    pub fn common(&self) -> impl Iterator<Item = FunctionSymbol> + '_ {
        self.common.iter().copied()
    }
}

impl Default for SplitAssignment {
    /// K, E, F and A are common.
    fn default() -> Self {
        use FunctionSymbol::*;
        SplitAssignment::from_common([Counteraction, Delivery, Trickery, InitialSituation])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GoldInstance {
    pub index: usize,
    pub symbol: FunctionSymbol,
    pub split: Split,
}

/// Gold instances for symbols in order, split by `splits`.
pub fn gold_instances(symbols: &[FunctionSymbol], splits: &SplitAssignment) -> Vec<GoldInstance> {
    symbols
        .iter()
        .enumerate()
        .map(|(index, &symbol)| GoldInstance {
            index,
            symbol,
            split: splits.split_of(symbol),
        })
        .collect()
}

/// Per-instance predictions (`None` is Absent) plus unaligned surplus.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Prediction {
    pub symbols: Vec<Option<FunctionSymbol>>,
    pub extra_predictions: usize,
}

impl Prediction {
    pub fn absent(n: usize) -> Self {
        Prediction {
            symbols: vec![None; n],
            extra_predictions: 0,
        }
    }

    pub fn exact(symbols: &[FunctionSymbol]) -> Self {
        Prediction {
            symbols: symbols.iter().copied().map(Some).collect(),
            extra_predictions: 0,
        }
    }

    /// Concatenates per-segment predictions in order.
    pub fn concat(parts: impl IntoIterator<Item = Prediction>) -> Self {
        parts.into_iter().fold(Prediction::default(), |mut acc, p| {
            acc.symbols.extend(p.symbols);
            acc.extra_predictions += p.extra_predictions;
            acc
        })
    }
}

/// Raw counts behind one split's metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct SplitCounts {
    pub gold: usize,
    pub matched: usize,
    /// Non-Absent predictions on this split's instances.
    pub predicted: usize,
    pub extras: usize,
}

fn ratio(n: usize, d: usize) -> Fraction {
    if d == 0 {
        Fraction::from_integer(0)
    } else {
        Fraction::new(n as u64, d as u64)
    }
}

impl SplitCounts {
    pub fn metrics(&self) -> SplitMetrics {
        let recall = ratio(self.matched, self.gold);
        let precision = ratio(self.matched, self.predicted + self.extras);
        let accuracy = ratio(self.matched, self.gold + self.extras);
        let denom = precision + recall;
        let f1 = if denom == Fraction::from_integer(0) {
            denom
        } else {
            precision * recall * 2 / denom
        };
        SplitMetrics {
            accuracy,
            precision,
            recall,
            f1,
            counts: *self,
        }
    }
}

fn ser_frac<S: Serializer>(f: &Fraction, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(to_f64(*f))
}

pub fn to_f64(f: Fraction) -> f64 {
    *f.numer() as f64 / *f.denom() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SplitMetrics {
    #[serde(serialize_with = "ser_frac")]
    pub accuracy: Fraction,
    #[serde(serialize_with = "ser_frac")]
    pub precision: Fraction,
    #[serde(serialize_with = "ser_frac")]
    pub recall: Fraction,
    #[serde(serialize_with = "ser_frac")]
    pub f1: Fraction,
    pub counts: SplitCounts,
}

impl SplitMetrics {
    pub fn values(&self) -> [f64; 4] {
        [self.accuracy, self.precision, self.recall, self.f1].map(to_f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InstanceScores {
    pub common: SplitMetrics,
    pub rare: SplitMetrics,
    pub sum: SplitMetrics,
}

pub fn score_instances(gold: &[GoldInstance], pred: &Prediction) -> Result<InstanceScores, MetricsError> {
    if gold.len() != pred.symbols.len() {
        return Err(MetricsError::LengthMismatch {
            left: gold.len(),
            right: pred.symbols.len(),
        });
    }
    let mut common = SplitCounts::default();
    let mut rare = SplitCounts::default();
    for (g, p) in gold.iter().zip(&pred.symbols) {
        let c = match g.split {
            Split::Common => &mut common,
            Split::Rare => &mut rare,
        };
        c.gold += 1;
        c.predicted += usize::from(p.is_some());
        c.matched += usize::from(*p == Some(g.symbol));
    }
    let sum = SplitCounts {
        gold: common.gold + rare.gold,
        matched: common.matched + rare.matched,
        predicted: common.predicted + rare.predicted,
        extras: pred.extra_predictions,
    };
    Ok(InstanceScores {
        common: common.metrics(),
        rare: rare.metrics(),
        sum: sum.metrics(),
    })
}

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricStat {
    pub mean: f64,
    pub std: f64,
}

impl MetricStat {
    pub fn of(values: &[f64]) -> MetricStat {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        MetricStat { mean, std: var.sqrt() }
    }
}

impl fmt::Display for MetricStat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // avoid printing -0.0 and rounding noise
        let std = (self.std * 10.0).round() / 10.0;
        write!(f, "{:.3}(±{:.1})", self.mean + 0.0, std + 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitValues {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl SplitValues {
    fn from_array([accuracy, precision, recall, f1]: [f64; 4]) -> Self {
        SplitValues {
            accuracy,
            precision,
            recall,
            f1,
        }
    }

    fn to_array(self) -> [f64; 4] {
        [self.accuracy, self.precision, self.recall, self.f1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundMeans {
    pub common: SplitValues,
    pub rare: SplitValues,
    pub sum: SplitValues,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitSummary {
    pub accuracy: MetricStat,
    pub precision: MetricStat,
    pub recall: MetricStat,
    pub f1: MetricStat,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub common: SplitSummary,
    pub rare: SplitSummary,
    pub sum: SplitSummary,
    pub per_round: Vec<RoundMeans>,
}

fn mean_values(items: impl Iterator<Item = [f64; 4]>) -> [f64; 4] {
    let mut acc = [0.0; 4];
    let mut n = 0usize;
    for v in items {
        for (a, x) in acc.iter_mut().zip(v) {
            *a += x;
        }
        n += 1;
    }
    acc.map(|a| a / n as f64)
}

fn summarize(values: impl Fn(&RoundMeans) -> SplitValues, rounds: &[RoundMeans]) -> SplitSummary {
    let stat = |k: usize| {
        let xs: Vec<f64> = rounds.iter().map(|r| values(r).to_array()[k]).collect();
        MetricStat::of(&xs)
    };
    SplitSummary {
        accuracy: stat(0),
        precision: stat(1),
        recall: stat(2),
        f1: stat(3),
    }
}

/// Averages each round over its predictions, then reports mean and
/// population standard deviation across round means.
pub fn aggregate(rounds: &[Vec<InstanceScores>]) -> Result<EvaluationReport, MetricsError> {
    if rounds.is_empty() || rounds.iter().any(Vec::is_empty) {
        return Err(MetricsError::EmptyInput);
    }
    let per_round: Vec<RoundMeans> = rounds
        .iter()
        .map(|preds| RoundMeans {
            common: SplitValues::from_array(mean_values(preds.iter().map(|s| s.common.values()))),
            rare: SplitValues::from_array(mean_values(preds.iter().map(|s| s.rare.values()))),
            sum: SplitValues::from_array(mean_values(preds.iter().map(|s| s.sum.values()))),
        })
        .collect();
    Ok(EvaluationReport {
        common: summarize(|r| r.common, &per_round),
        rare: summarize(|r| r.rare, &per_round),
        sum: summarize(|r| r.sum, &per_round),
        per_round,
    })
}

/// Text table with ACC/Recall/F1 (Common/Rare) and ACC/F1 (Sum) columns.
pub fn recognition_table(rows: &[(String, &EvaluationReport)]) -> String {
    let header = [
        "Model".to_string(),
        "ACC (Common/Rare)".to_string(),
        "Recall (Common/Rare)".to_string(),
        "F1 (Common/Rare)".to_string(),
        "ACC (Sum)".to_string(),
        "F1 (Sum)".to_string(),
    ];
    let cells: Vec<[String; 6]> = rows
        .iter()
        .map(|(name, r)| {
            [
                name.clone(),
                format!("{}/{}", r.common.accuracy, r.rare.accuracy),
                format!("{}/{}", r.common.recall, r.rare.recall),
                format!("{}/{}", r.common.f1, r.rare.f1),
                r.sum.accuracy.to_string(),
                r.sum.f1.to_string(),
            ]
        })
        .collect();
    let widths: Vec<usize> = (0..6)
        .map(|i| {
            cells
                .iter()
                .map(|c| c[i].chars().count())
                .chain([header[i].chars().count()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |c: &[String; 6]| {
        let mut s = String::new();
        for (i, cell) in c.iter().enumerate() {
            if i > 0 {
                s.push_str(if i == 4 { " || " } else { " | " });
            }
            let pad = widths[i] - cell.chars().count();
            s.push_str(cell);
            if i < 5 {
                s.push_str(&" ".repeat(pad));
            }
        }
        s.push('\n');
        s
    };
    let mut out = line(&header);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&format!(
        "{}-+-{}-+-{}-+-{}-++-{}-+-{}\n",
        rule[0], rule[1], rule[2], rule[3], rule[4], rule[5]
    ));
    for c in &cells {
        out.push_str(&line(c));
    }
    out
}

/// Cohen's kappa from observed agreement and per-annotator marginals.
pub fn cohen_kappa<T: Eq + Hash>(labels_a: &[T], labels_b: &[T]) -> Result<f64, MetricsError> {
    if labels_a.len() != labels_b.len() {
        return Err(MetricsError::LengthMismatch {
            left: labels_a.len(),
            right: labels_b.len(),
        });
    }
    if labels_a.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let n = labels_a.len() as i128;
    let mut agree = 0i128;
    let mut marg: HashMap<&T, (i128, i128)> = HashMap::new();
    for (a, b) in labels_a.iter().zip(labels_b) {
        agree += i128::from(a == b);
        marg.entry(a).or_default().0 += 1;
        marg.entry(b).or_default().1 += 1;
    }
    let chance: i128 = marg.values().map(|(x, y)| x * y).sum();
    // kappa = (agree*n - chance) / (n^2 - chance), all scaled by n^2
    let den = n * n - chance;
    if den == 0 {
        return Ok(if agree == n { 1.0 } else { 0.0 });
    }
    Ok((agree * n - chance) as f64 / den as f64)
}

/// One annotator's label at an offset; `None` where only the other marked it.
pub type Label = Option<FunctionSymbol>;

/// Label pairs from two annotations of the same segments: both annotators'
/// markers are aligned by offset, and an offset marked by only one of them
/// pairs with `None` on the other side.
pub fn pair_dual_annotations(
    a: &[AnnotatedSegment],
    b: &[AnnotatedSegment],
) -> Result<(Vec<Label>, Vec<Label>), MetricsError> {
    let by_id: HashMap<&str, &AnnotatedSegment> = b.iter().map(|s| (s.id.as_str(), s)).collect();
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let (mut la, mut lb) = (Vec::new(), Vec::new());
    for seg in a {
        let other = by_id
            .get(seg.id.as_str())
            .ok_or_else(|| MetricsError::UnpairedSegment(seg.id.clone()))?;
        let mut at: BTreeMap<usize, (Vec<FunctionSymbol>, Vec<FunctionSymbol>)> = BTreeMap::new();
        for ann in &seg.annotations {
            at.entry(ann.offset).or_default().0.push(ann.symbol);
        }
        for ann in &other.annotations {
            at.entry(ann.offset).or_default().1.push(ann.symbol);
        }
        for (xs, ys) in at.into_values() {
            for i in 0..xs.len().max(ys.len()) {
                la.push(xs.get(i).copied());
                lb.push(ys.get(i).copied());
            }
        }
    }
    Ok((la, lb))
}

/// Kappa over a dual-annotated corpus, paired as in [`pair_dual_annotations`].
pub fn corpus_kappa(a: &[AnnotatedSegment], b: &[AnnotatedSegment]) -> Result<f64, MetricsError> {
    let (la, lb) = pair_dual_annotations(a, b)?;
    cohen_kappa(&la, &lb)
}
