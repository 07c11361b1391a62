//! Storyline paradigms: anchored patterns over function sequences.
//!
//! A pattern such as `(A)->(Q)->{O/S}` is a list of elements joined by
//! linear (`->`) or nonlinear (`~>`) connectors. A sequence matches when its
//! first symbol satisfies the first element, its last symbol satisfies the
//! last element, and every interior element occurs, in order, strictly
//! between them. Both connector kinds match identically; the kind records
//! whether the interior progression is stable (linear) or only the two
//! anchors are shared (nonlinear).

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::annotation::FunctionSequence;
use crate::taxonomy::{parse_symbol, FunctionSymbol, FUNCTION_COUNT};

/// Exact fraction used for support values and thresholds.
pub type Fraction = Ratio<u64>;

/// Default support threshold for accepting a paradigm.
pub fn default_min_support() -> Fraction {
    Fraction::new(3, 5)
}

pub const DEFAULT_MAX_ALT: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParadigmError {
    #[error("syntax error at character {position}: {message}")]
    SyntaxError { position: usize, message: String },
    #[error("unknown symbol {token:?} at character {position}")]
    UnknownSymbol { token: String, position: usize },
    #[error("a pattern needs at least two elements")]
    TooFewElements,
    #[error("alternation set needs at least two distinct symbols")]
    InvalidAltSet,
    #[error("empty sequence")]
    EmptySequence,
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("no anchor reaches the support threshold within {max_alt} alternatives")]
    MiningFailed { max_alt: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Parses a decimal such as `0.6` or a ratio such as `3/5` exactly.
pub fn parse_fraction(s: &str) -> Result<Fraction, ParadigmError> {
    let bad = || ParadigmError::InvalidParameter(format!("not a fraction: {s:?}"));
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: u64 = n.trim().parse().map_err(|_| bad())?;
        let d: u64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Fraction::new(n, d));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if (int.is_empty() && frac.is_empty())
        || !int.chars().all(|c| c.is_ascii_digit())
        || !frac.chars().all(|c| c.is_ascii_digit())
        || frac.len() > 12
    {
        return Err(bad());
    }
    let scale = 10u64.pow(frac.len() as u32);
    let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
    let frac_v: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    Ok(Fraction::new(int * scale + frac_v, scale))
}

pub fn fraction_to_f64(f: Fraction) -> f64 {
    *f.numer() as f64 / *f.denom() as f64
}

/// `count / total >= threshold`, exactly.
fn meets(count: usize, total: usize, threshold: Fraction) -> bool {
    total > 0 && (count as u128) * (*threshold.denom() as u128) >= (*threshold.numer() as u128) * (total as u128)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PatternElement {
    Symbol(FunctionSymbol),
    /// Two or more distinct symbols, kept in registry order.
    AltSet(Vec<FunctionSymbol>),
}

impl PatternElement {
    pub fn alt(members: impl IntoIterator<Item = FunctionSymbol>) -> Result<Self, ParadigmError> {
        let set: BTreeSet<_> = members.into_iter().collect();
        if set.len() < 2 {
            return Err(ParadigmError::InvalidAltSet);
        }
        Ok(PatternElement::AltSet(set.into_iter().collect()))
    }

    /// A single symbol for one member, an alternation set otherwise.
    fn from_members(members: &[FunctionSymbol]) -> Self {
        match members {
            [one] => PatternElement::Symbol(*one),
            many => PatternElement::alt(many.iter().copied()).expect("distinct anchor members"),
        }
    }

    pub fn accepts(&self, symbol: FunctionSymbol) -> bool {
        match self {
            PatternElement::Symbol(s) => *s == symbol,
            PatternElement::AltSet(members) => members.contains(&symbol),
        }
    }

    pub fn members(&self) -> &[FunctionSymbol] {
        match self {
            PatternElement::Symbol(s) => std::slice::from_ref(s),
            PatternElement::AltSet(members) => members,
        }
    }
}

impl fmt::Display for PatternElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternElement::Symbol(s) => write!(f, "({s})"),
            PatternElement::AltSet(members) => {
                f.write_str("{")?;
                for (i, m) in members.iter().enumerate() {
                    if i > 0 {
                        f.write_str("/")?;
                    }
                    f.write_str(m.token())?;
                }
                f.write_str("}")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Connector {
    Linear,
    Nonlinear,
}

impl Connector {
    pub fn as_str(self) -> &'static str {
        match self {
            Connector::Linear => "->",
            Connector::Nonlinear => "~>",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParadigmPattern {
    elements: Vec<PatternElement>,
    connectors: Vec<Connector>,
    pub plot_label: Option<String>,
    pub explanation: Option<String>,
}

impl ParadigmPattern {
    pub fn new(elements: Vec<PatternElement>, connectors: Vec<Connector>) -> Result<Self, ParadigmError> {
        if elements.len() < 2 {
            return Err(ParadigmError::TooFewElements);
        }
        if connectors.len() + 1 != elements.len() {
            return Err(ParadigmError::InvalidParameter(format!(
                "{} elements need {} connectors, got {}",
                elements.len(),
                elements.len() - 1,
                connectors.len()
            )));
        }
        Ok(ParadigmPattern {
            elements,
            connectors,
            plot_label: None,
            explanation: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.plot_label = Some(label.into());
        self
    }

    pub fn with_explanation(mut self, text: impl Into<String>) -> Self {
        self.explanation = Some(text.into());
        self
    }

    pub fn elements(&self) -> &[PatternElement] {
        &self.elements
    }

    pub fn connectors(&self) -> &[Connector] {
        &self.connectors
    }

    pub fn start(&self) -> &PatternElement {
        &self.elements[0]
    }

    pub fn end(&self) -> &PatternElement {
        self.elements.last().expect("at least two elements")
    }

    pub fn interior(&self) -> &[PatternElement] {
        &self.elements[1..self.elements.len() - 1]
    }

    /// Label if present, canonical pattern text otherwise.
    pub fn name(&self) -> String {
        self.plot_label.clone().unwrap_or_else(|| self.to_string())
    }

    /// Same elements and connectors, ignoring label and explanation.
    pub fn same_shape(&self, other: &ParadigmPattern) -> bool {
        self.elements == other.elements && self.connectors == other.connectors
    }

    /// Removes the interior element at `index` (0-based among interiors),
    /// keeping the connector that led into it.
    pub fn without_interior(&self, index: usize) -> ParadigmPattern {
        let mut out = self.clone();
        out.elements.remove(index + 1);
        out.connectors.remove(index + 1);
        out
    }

    /// Replaces element `index` with an alternation set widened by `extra`.
    pub fn widened(&self, index: usize, extra: FunctionSymbol) -> ParadigmPattern {
        let mut out = self.clone();
        let mut members: Vec<_> = out.elements[index].members().to_vec();
        members.push(extra);
        members.sort();
        members.dedup();
        out.elements[index] = PatternElement::from_members(&members);
        out
    }
}

impl fmt::Display for ParadigmPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.elements[0])?;
        for (c, e) in self.connectors.iter().zip(&self.elements[1..]) {
            write!(f, "{}{}", c.as_str(), e)?;
        }
        Ok(())
    }
}

impl FromStr for ParadigmPattern {
    type Err = ParadigmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_pattern(s)
    }
}

impl Serialize for ParadigmPattern {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            pattern: String,
            #[serde(skip_serializing_if = "Option::is_none")]
            label: Option<&'a str>,
            elements: Vec<Vec<&'static str>>,
            connectors: &'a [Connector],
        }
        Repr {
            pattern: self.to_string(),
            label: self.plot_label.as_deref(),
            elements: self
                .elements
                .iter()
                .map(|e| e.members().iter().map(|m| m.token()).collect())
                .collect(),
            connectors: &self.connectors,
        }
        .serialize(serializer)
    }
}

struct PatternParser<'a> {
    chars: Vec<(usize, char)>,
    src: &'a str,
    pos: usize,
}

impl PatternParser<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn error(&self, message: impl Into<String>) -> ParadigmError {
        ParadigmError::SyntaxError {
            position: self.pos,
            message: message.into(),
        }
    }

    fn token(&mut self) -> Result<FunctionSymbol, ParadigmError> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_alphanumeric()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a function symbol"));
        }
        let byte_start = self.chars[start].0;
        let byte_end = self.chars.get(self.pos).map_or(self.src.len(), |&(b, _)| b);
        let token = &self.src[byte_start..byte_end];
        let symbol = parse_symbol(token).map_err(|_| ParadigmError::UnknownSymbol {
            token: token.to_string(),
            position: start,
        })?;
        self.skip_ws();
        Ok(symbol)
    }

    fn expect(&mut self, c: char) -> Result<(), ParadigmError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {c:?}")))
        }
    }

    fn element(&mut self) -> Result<PatternElement, ParadigmError> {
        self.skip_ws();
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let s = self.token()?;
                self.expect(')')?;
                Ok(PatternElement::Symbol(s))
            }
            Some('{') => {
                let open = self.pos;
                self.pos += 1;
                let mut members = vec![self.token()?];
                while self.peek() == Some('/') {
                    self.pos += 1;
                    members.push(self.token()?);
                }
                self.expect('}')?;
                let distinct: BTreeSet<_> = members.iter().collect();
                if distinct.len() != members.len() || members.len() < 2 {
                    return Err(ParadigmError::SyntaxError {
                        position: open,
                        message: "alternation set needs two or more distinct symbols".into(),
                    });
                }
                PatternElement::alt(members)
            }
            Some(_) => Err(self.error("expected '(' or '{'")),
            None => Err(self.error("expected an element")),
        }
    }

    fn connector(&mut self) -> Result<Option<Connector>, ParadigmError> {
        self.skip_ws();
        let kind = match self.peek() {
            None => return Ok(None),
            Some('-') => Connector::Linear,
            Some('~') => Connector::Nonlinear,
            Some(_) => return Err(self.error("expected '->' or '~>'")),
        };
        self.pos += 1;
        self.expect('>')?;
        Ok(Some(kind))
    }
}

/// Parses the ASCII pattern grammar: elements `(A)` or `{O/S}` joined by
/// `->` or `~>`, with optional whitespace.
pub fn parse_pattern(s: &str) -> Result<ParadigmPattern, ParadigmError> {
    let mut p = PatternParser {
        chars: s.char_indices().collect(),
        src: s,
        pos: 0,
    };
    p.skip_ws();
    if p.peek().is_none() {
        return Err(ParadigmError::TooFewElements);
    }
    let mut elements = vec![p.element()?];
    let mut connectors = Vec::new();
    while let Some(c) = p.connector()? {
        connectors.push(c);
        elements.push(p.element()?);
    }
    ParadigmPattern::new(elements, connectors)
}

fn builtin(label: &str, pattern: &str, explanation: &str) -> ParadigmPattern {
    parse_pattern(pattern)
        .expect("builtin patterns parse")
        .with_label(label)
        .with_explanation(explanation)
}

/// The six common plot paradigms of web fiction.
pub fn builtin_paradigms() -> Vec<ParadigmPattern> {
    vec![
        builtin("battle", "(A)->(Q)->{O/S}", "Probing to victory/defeat."),
        builtin("emotional", "(Em)~>(Ch)", "Emotion-driven change."),
        builtin("difficult_task", "(Y)~>(Z)", "Task appears/completed."),
        builtin("adventure", "(P)~>{M/O}", "Acquires main ability."),
        builtin("pretending", "(W)->(De)~>(S)", "Underestimating to crush."),
        builtin("daily_life", "(A)~>(Ch)", "Scene-driven change."),
    ]
}

pub fn builtin_paradigm(label: &str) -> Option<ParadigmPattern> {
    builtin_paradigms().into_iter().find(|p| p.plot_label.as_deref() == Some(label))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchResult {
    pub matched: bool,
    /// One sequence index per pattern element when matched, empty otherwise.
    pub bindings: Vec<usize>,
}

impl MatchResult {
    fn no() -> Self {
        MatchResult {
            matched: false,
            bindings: Vec::new(),
        }
    }
}

fn match_symbols(seq: &[FunctionSymbol], pattern: &ParadigmPattern) -> MatchResult {
    let n = seq.len();
    // anchors must sit on distinct positions
    if n < 2 || !pattern.start().accepts(seq[0]) || !pattern.end().accepts(seq[n - 1]) {
        return MatchResult::no();
    }
    let mut bindings = Vec::with_capacity(pattern.elements.len());
    bindings.push(0);
    let mut cursor = 0;
    for element in pattern.interior() {
        match (cursor + 1..n - 1).find(|&i| element.accepts(seq[i])) {
            Some(i) => {
                bindings.push(i);
                cursor = i;
            }
            None => return MatchResult::no(),
        }
    }
    bindings.push(n - 1);
    MatchResult {
        matched: true,
        bindings,
    }
}

pub fn matches(seq: &FunctionSequence, pattern: &ParadigmPattern) -> Result<MatchResult, ParadigmError> {
    if seq.is_empty() {
        return Err(ParadigmError::EmptySequence);
    }
    Ok(match_symbols(&seq.symbols, pattern))
}

/// Labels of every pattern the sequence matches, in input order.
pub fn classify(seq: &FunctionSequence, patterns: &[ParadigmPattern]) -> Result<Vec<String>, ParadigmError> {
    if seq.is_empty() {
        return Err(ParadigmError::EmptySequence);
    }
    Ok(patterns
        .iter()
        .filter(|p| match_symbols(&seq.symbols, p).matched)
        .map(ParadigmPattern::name)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Support {
    pub matched: usize,
    pub total: usize,
}

impl Support {
    pub fn fraction(&self) -> Fraction {
        Fraction::new(self.matched as u64, self.total as u64)
    }

    pub fn value(&self) -> f64 {
        self.matched as f64 / self.total as f64
    }

    pub fn meets(&self, threshold: Fraction) -> bool {
        meets(self.matched, self.total, threshold)
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{} ({:.3})", self.matched, self.total, self.value())
    }
}

impl Serialize for Support {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            matched: usize,
            total: usize,
            fraction: String,
            value: f64,
        }
        let f = self.fraction();
        Repr {
            matched: self.matched,
            total: self.total,
            fraction: format!("{}/{}", f.numer(), f.denom()),
            value: self.value(),
        }
        .serialize(serializer)
    }
}

/// Fraction of sequences matched; empty sequences count as non-matching.
pub fn support(seqs: &[FunctionSequence], pattern: &ParadigmPattern) -> Result<Support, ParadigmError> {
    if seqs.is_empty() {
        return Err(ParadigmError::EmptyCorpus);
    }
    let matched = seqs
        .iter()
        .filter(|s| match_symbols(&s.symbols, pattern).matched)
        .count();
    Ok(Support {
        matched,
        total: seqs.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MineOptions {
    pub min_support: Fraction,
    pub max_alt: usize,
}

impl Default for MineOptions {
    fn default() -> Self {
        MineOptions {
            min_support: default_min_support(),
            max_alt: DEFAULT_MAX_ALT,
        }
    }
}

/// Frequency and placement of a candidate interior symbol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InteriorCandidate {
    pub symbol: FunctionSymbol,
    /// Anchor-conforming sequences containing the symbol between the anchors.
    pub occurrences: usize,
    #[serde(serialize_with = "ser_fraction")]
    pub median_position: Fraction,
    /// Whether its order against every other candidate is stable.
    pub ordered: bool,
}

fn ser_fraction<S: Serializer>(f: &Fraction, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(fraction_to_f64(*f))
}

#[derive(Debug, Clone, Serialize)]
pub struct MinedParadigm {
    pub pattern: ParadigmPattern,
    pub support: Support,
    /// Sequences whose first and last symbols satisfy the mined anchors.
    pub anchor_conforming: usize,
    pub candidates: Vec<InteriorCandidate>,
}

/// Ranks symbols by count (descending), breaking ties by registry order.
fn ranked(counts: &[usize; FUNCTION_COUNT]) -> Vec<FunctionSymbol> {
    let mut order: Vec<_> = FunctionSymbol::ALL.iter().copied().filter(|s| counts[s.index()] > 0).collect();
    order.sort_by(|a, b| counts[b.index()].cmp(&counts[a.index()]).then(a.cmp(b)));
    order
}

fn median(mut values: Vec<Fraction>) -> Fraction {
    values.sort();
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2
    }
}

/// Induces a paradigm from a corpus of sequences of one plot type.
///
/// The start anchor is the most frequent first symbol, widened into an
/// alternation set with the next most frequent first symbols (at most
/// `max_alt` members) until the share of sequences starting with it reaches
/// `min_support`. The end anchor is chosen the same way among last symbols
/// of start-conforming sequences, measured as the share of all sequences
/// that satisfy both anchors.
///
/// Interior candidates are symbols occurring strictly between the anchors in
/// at least `min_support` of the anchor-conforming sequences. A candidate is
/// kept only if, against every other candidate, one relative order (by first
/// interior occurrence) holds in at least `min_support` of the conforming
/// sequences containing both. Kept symbols are ordered by median relative
/// position and joined with linear connectors; without any, the two anchors
/// are joined by a single nonlinear connector. Kept interiors are dropped,
/// least frequent first, until the pattern's own support reaches
/// `min_support`.
pub fn mine(seqs: &[FunctionSequence], options: MineOptions) -> Result<MinedParadigm, ParadigmError> {
    let MineOptions { min_support, max_alt } = options;
    if seqs.is_empty() {
        return Err(ParadigmError::EmptyCorpus);
    }
    if *min_support.numer() == 0 || min_support > Fraction::from_integer(1) {
        return Err(ParadigmError::InvalidParameter("min_support must lie in (0, 1]".into()));
    }
    if max_alt == 0 {
        return Err(ParadigmError::InvalidParameter("max_alt must be at least 1".into()));
    }
    let total = seqs.len();
    let usable: Vec<&[FunctionSymbol]> = seqs
        .iter()
        .map(|s| s.symbols.as_slice())
        .filter(|s| s.len() >= 2)
        .collect();

    let mut first_counts = [0usize; FUNCTION_COUNT];
    for s in &usable {
        first_counts[s[0].index()] += 1;
    }
    let start = grow_anchor(&ranked(&first_counts), max_alt, |members| {
        usable.iter().filter(|s| members.contains(&s[0])).count()
    }, total, min_support)?;

    let starting: Vec<&[FunctionSymbol]> = usable.iter().copied().filter(|s| start.contains(&s[0])).collect();
    let mut last_counts = [0usize; FUNCTION_COUNT];
    for s in &starting {
        last_counts[s[s.len() - 1].index()] += 1;
    }
    let end = grow_anchor(&ranked(&last_counts), max_alt, |members| {
        starting.iter().filter(|s| members.contains(&s[s.len() - 1])).count()
    }, total, min_support)?;

    let conforming: Vec<&[FunctionSymbol]> = starting
        .iter()
        .copied()
        .filter(|s| end.contains(&s[s.len() - 1]))
        .collect();

    // first interior occurrence of every symbol, per conforming sequence
    let first_pos: Vec<[Option<usize>; FUNCTION_COUNT]> = conforming
        .iter()
        .map(|s| {
            let mut pos = [None; FUNCTION_COUNT];
            for (i, sym) in s.iter().enumerate().take(s.len() - 1).skip(1) {
                pos[sym.index()].get_or_insert(i);
            }
            pos
        })
        .collect();

    let frequent: Vec<FunctionSymbol> = FunctionSymbol::ALL
        .iter()
        .copied()
        .filter(|sym| {
            let n = first_pos.iter().filter(|p| p[sym.index()].is_some()).count();
            meets(n, conforming.len(), min_support)
        })
        .collect();

    let ordered_pair = |a: FunctionSymbol, b: FunctionSymbol| {
        let (mut both, mut before) = (0usize, 0usize);
        for p in &first_pos {
            if let (Some(x), Some(y)) = (p[a.index()], p[b.index()]) {
                both += 1;
                before += usize::from(x < y);
            }
        }
        meets(before.max(both - before), both, min_support)
    };

    let mut candidates: Vec<InteriorCandidate> = frequent
        .iter()
        .map(|&sym| {
            let occurrences = first_pos.iter().filter(|p| p[sym.index()].is_some()).count();
            let positions = conforming
                .iter()
                .zip(&first_pos)
                .filter_map(|(s, p)| p[sym.index()].map(|i| Fraction::new(i as u64, (s.len() - 1) as u64)))
                .collect();
            InteriorCandidate {
                symbol: sym,
                occurrences,
                median_position: median(positions),
                ordered: frequent.iter().all(|&other| other == sym || ordered_pair(sym, other)),
            }
        })
        .collect();
    candidates.sort_by(|a, b| a.median_position.cmp(&b.median_position).then(a.symbol.cmp(&b.symbol)));

    let mut interior: Vec<&InteriorCandidate> = candidates.iter().filter(|c| c.ordered).collect();
    let start_el = PatternElement::from_members(&start);
    let end_el = PatternElement::from_members(&end);
    loop {
        let pattern = build_mined(&start_el, &interior, &end_el);
        let sup = support(seqs, &pattern)?;
        if sup.meets(min_support) || interior.is_empty() {
            if !sup.meets(min_support) {
                return Err(ParadigmError::MiningFailed { max_alt });
            }
            return Ok(MinedParadigm {
                pattern,
                support: sup,
                anchor_conforming: conforming.len(),
                candidates,
            });
        }
        let weakest = interior
            .iter()
            .enumerate()
            .min_by(|(ia, a), (ib, b)| a.occurrences.cmp(&b.occurrences).then(ib.cmp(ia)))
            .map(|(i, _)| i)
            .expect("nonempty interior");
        interior.remove(weakest);
    }
}

fn grow_anchor(
    ranking: &[FunctionSymbol],
    max_alt: usize,
    count: impl Fn(&[FunctionSymbol]) -> usize,
    total: usize,
    min_support: Fraction,
) -> Result<Vec<FunctionSymbol>, ParadigmError> {
    let mut members = Vec::new();
    for &sym in ranking.iter().take(max_alt) {
        members.push(sym);
        if meets(count(&members), total, min_support) {
            members.sort();
            return Ok(members);
        }
    }
    Err(ParadigmError::MiningFailed { max_alt })
}

fn build_mined(start: &PatternElement, interior: &[&InteriorCandidate], end: &PatternElement) -> ParadigmPattern {
    let mut elements = vec![start.clone()];
    elements.extend(interior.iter().map(|c| PatternElement::Symbol(c.symbol)));
    elements.push(end.clone());
    let connectors = if interior.is_empty() {
        vec![Connector::Nonlinear]
    } else {
        vec![Connector::Linear; elements.len() - 1]
    };
    ParadigmPattern::new(elements, connectors).expect("anchors give two elements")
}

/// One row of a paradigm table.
#[derive(Debug, Clone)]
pub struct ParadigmRow {
    pub plot: String,
    pub pattern: ParadigmPattern,
    pub note: String,
}

/// Renders rows as a `Plots | Path paradigm | ...` text table.
pub fn paradigm_table(rows: &[ParadigmRow], note_header: &str) -> String {
    let cells: Vec<[String; 3]> = rows
        .iter()
        .map(|r| [r.plot.clone(), r.pattern.to_string(), r.note.clone()])
        .collect();
    let header = ["Plots".to_string(), "Path paradigm".to_string(), note_header.to_string()];
    let width = |i: usize| {
        cells
            .iter()
            .map(|c| c[i].chars().count())
            .chain([header[i].chars().count()])
            .max()
            .unwrap_or(0)
    };
    let widths = [width(0), width(1), width(2)];
    let line = |c: &[String; 3]| {
        format!(
            "{:<w0$} | {:<w1$} | {}\n",
            c[0],
            c[1],
            c[2],
            w0 = widths[0],
            w1 = widths[1]
        )
    };
    let mut out = line(&header);
    out.push_str(&format!(
        "{}-+-{}-+-{}\n",
        "-".repeat(widths[0]),
        "-".repeat(widths[1]),
        "-".repeat(widths[2])
    ));
    for c in &cells {
        out.push_str(&line(c));
    }
    out
}

impl PartialOrd for Support {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.fraction().cmp(&other.fraction()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::FunctionSymbol as F;

    fn seq(s: &str) -> FunctionSequence {
        s.parse().unwrap()
    }

    fn pat(s: &str) -> ParadigmPattern {
        parse_pattern(s).unwrap()
    }

    #[test]
    fn parse_examples() {
        let battle = pat("(A)->(Q)->{O/S}");
        assert_eq!(battle.elements().len(), 3);
        assert_eq!(battle.connectors(), [Connector::Linear, Connector::Linear]);
        assert_eq!(
            battle.end(),
            &PatternElement::AltSet(vec![F::GetPromoted, F::VictoryOrDefeat])
        );
        let emo = pat("(Em)~>(Ch)");
        assert_eq!(emo.connectors(), [Connector::Nonlinear]);
        assert!(matches!(parse_pattern("(W)->"), Err(ParadigmError::SyntaxError { .. })));
        assert_eq!(parse_pattern("(W)"), Err(ParadigmError::TooFewElements));
        assert_eq!(parse_pattern(""), Err(ParadigmError::TooFewElements));
    }

    #[test]
    fn parse_errors_carry_positions() {
        assert_eq!(
            parse_pattern("(A)->(Qx)"),
            Err(ParadigmError::UnknownSymbol { token: "Qx".into(), position: 6 })
        );
        assert!(matches!(parse_pattern("(A)=>(Q)"), Err(ParadigmError::SyntaxError { position: 3, .. })));
        assert!(matches!(parse_pattern("(A)->{O}"), Err(ParadigmError::SyntaxError { .. })));
        assert!(matches!(parse_pattern("(A)->{O/O}"), Err(ParadigmError::SyntaxError { .. })));
        assert!(matches!(parse_pattern("(A->(Q)"), Err(ParadigmError::SyntaxError { .. })));
    }

    #[test]
    fn canonical_form() {
        let p = pat("  ( A ) ->{ S / O }~> (Ch) ");
        assert_eq!(p.to_string(), "(A)->{O/S}~>(Ch)");
        assert_eq!(pat(&p.to_string()), p);
    }

    #[test]
    fn builtins() {
        let all = builtin_paradigms();
        assert_eq!(all.len(), 6);
        let labels: Vec<_> = all.iter().map(|p| p.plot_label.clone().unwrap()).collect();
        assert_eq!(
            labels,
            ["battle", "emotional", "difficult_task", "adventure", "pretending", "daily_life"]
        );
        assert_eq!(
            builtin_paradigm("battle").unwrap().end(),
            &PatternElement::AltSet(vec![F::GetPromoted, F::VictoryOrDefeat])
        );
        assert_eq!(
            builtin_paradigm("pretending").unwrap().connectors(),
            [Connector::Linear, Connector::Nonlinear]
        );
        assert_eq!(builtin_paradigm("adventure").unwrap().to_string(), "(P)~>{M/O}");
    }

    #[test]
    fn match_examples() {
        let battle = builtin_paradigm("battle").unwrap();
        let r = matches(&seq("A-F-H-K-Q-S"), &battle).unwrap();
        assert!(r.matched);
        assert_eq!(r.bindings, [0, 4, 5]);
        assert!(!matches(&seq("A-E-H-Q"), &battle).unwrap().matched);
        let emo = builtin_paradigm("emotional").unwrap();
        assert!(matches(&seq("Em-A-K-E-Ch"), &emo).unwrap().matched);
        assert_eq!(matches(&FunctionSequence::default(), &emo), Err(ParadigmError::EmptySequence));
    }

    #[test]
    fn interior_must_be_strictly_between_anchors() {
        let p = pat("(A)->(Q)->(S)");
        assert!(!matches(&seq("A-S"), &p).unwrap().matched);
        assert!(!matches(&seq("A-Q"), &p).unwrap().matched);
        // Q bound at the end position cannot count as interior
        assert!(!matches(&seq("A-K-Q"), &pat("(A)->(Q)->(Q)")).unwrap().matched);
        assert!(matches(&seq("A-Q-Q"), &pat("(A)->(Q)->(Q)")).unwrap().matched);
        // greedy leftmost binding
        assert_eq!(matches(&seq("A-Q-K-Q-S"), &p).unwrap().bindings, [0, 1, 4]);
    }

    #[test]
    fn single_symbol_never_matches() {
        assert!(!matches(&seq("A"), &pat("(A)~>(A)")).unwrap().matched);
        assert!(matches(&seq("A-A"), &pat("(A)~>(A)")).unwrap().matched);
    }

    #[test]
    fn classify_examples() {
        let all = builtin_paradigms();
        assert_eq!(classify(&seq("A-Q-S"), &all).unwrap(), ["battle"]);
        assert_eq!(classify(&seq("Em-Ch"), &all).unwrap(), ["emotional"]);
        assert!(classify(&seq("K-F"), &all).unwrap().is_empty());
        // several labels when anchors overlap
        assert_eq!(classify(&seq("A-Em-Ch"), &all).unwrap(), ["daily_life"]);
        let multi = classify(&seq("A-Q-S"), &[pat("(A)~>(S)"), builtin_paradigm("battle").unwrap()]).unwrap();
        assert_eq!(multi, ["(A)~>(S)", "battle"]);
    }

    #[test]
    fn support_examples() {
        let p = pat("(A)~>(S)");
        let seqs = vec![seq("A-S"), seq("A-Q-S"), seq("A-K")];
        let s = support(&seqs, &p).unwrap();
        assert_eq!((s.matched, s.total), (2, 3));
        assert_eq!(s.fraction(), Fraction::new(2, 3));
        assert!(s.meets(Fraction::new(3, 5)));
        assert!(!s.meets(Fraction::new(7, 10)));
        assert_eq!(support(&[], &p), Err(ParadigmError::EmptyCorpus));
        let toy = vec![seq("A-S"); 4];
        assert_eq!(support(&toy, &p).unwrap().fraction(), Fraction::from_integer(1));
    }

    #[test]
    fn fraction_parsing_is_exact() {
        assert_eq!(parse_fraction("0.6").unwrap(), Fraction::new(3, 5));
        assert_eq!(parse_fraction("3/5").unwrap(), Fraction::new(3, 5));
        assert_eq!(parse_fraction("1").unwrap(), Fraction::from_integer(1));
        assert_eq!(parse_fraction(".25").unwrap(), Fraction::new(1, 4));
        assert!(parse_fraction("x").is_err());
        assert!(parse_fraction("1/0").is_err());
        assert!(parse_fraction("-0.5").is_err());
        // 36 of 60 is exactly on the threshold
        assert!(meets(36, 60, parse_fraction("0.6").unwrap()));
        assert!(!meets(35, 60, parse_fraction("0.6").unwrap()));
    }

    #[test]
    fn mine_uniform_corpus() {
        let seqs = vec![seq("A-B-C"); 5];
        let mined = mine(&seqs, MineOptions { min_support: Fraction::from_integer(1), max_alt: 1 }).unwrap();
        assert_eq!(mined.pattern.to_string(), "(A)->(B)->(C)");
        assert_eq!(mined.support.fraction(), Fraction::from_integer(1));
    }

    #[test]
    fn mine_widens_anchors() {
        let seqs = vec![seq("A-K-S"), seq("A-K-O"), seq("E-K-S"), seq("A-K-S"), seq("A-Q-O")];
        let mined = mine(&seqs, MineOptions { min_support: Fraction::new(4, 5), max_alt: 2 }).unwrap();
        assert_eq!(mined.pattern.start(), &PatternElement::Symbol(F::InitialSituation));
        assert_eq!(mined.pattern.end().members(), [F::GetPromoted, F::VictoryOrDefeat]);
        assert!(mined.support.meets(Fraction::new(4, 5)));
    }

    #[test]
    fn mine_drops_unordered_interiors() {
        let seqs = vec![seq("Em-K-E-Ch"), seq("Em-E-K-Ch"), seq("Em-K-E-Ch"), seq("Em-E-K-Ch")];
        let mined = mine(&seqs, MineOptions::default()).unwrap();
        assert_eq!(mined.pattern.to_string(), "(Em)~>(Ch)");
        assert!(mined.candidates.iter().all(|c| !c.ordered));
    }

    #[test]
    fn mine_failures() {
        let seqs = vec![seq("A-S"), seq("B-S"), seq("C-S")];
        assert_eq!(
            mine(&seqs, MineOptions { min_support: Fraction::new(3, 5), max_alt: 1 }).unwrap_err(),
            ParadigmError::MiningFailed { max_alt: 1 }
        );
        assert_eq!(mine(&[], MineOptions::default()).unwrap_err(), ParadigmError::EmptyCorpus);
        assert!(matches!(
            mine(&seqs, MineOptions { min_support: Fraction::from_integer(0), max_alt: 1 }),
            Err(ParadigmError::InvalidParameter(_))
        ));
        assert!(matches!(
            mine(&[seq("A")], MineOptions::default()),
            Err(ParadigmError::MiningFailed { .. })
        ));
    }

    #[test]
    fn table_layout() {
        let rows: Vec<_> = builtin_paradigms()
            .into_iter()
            .map(|p| ParadigmRow {
                plot: p.name(),
                note: p.explanation.clone().unwrap(),
                pattern: p,
            })
            .collect();
        let t = paradigm_table(&rows, "Explanation");
        let lines: Vec<_> = t.lines().collect();
        assert_eq!(lines.len(), 8);
        assert!(lines[0].starts_with("Plots"));
        assert!(lines[2].contains("(A)->(Q)->{O/S}"));
    }
}
