//! Inline annotation markers, hyphen sequences and corpus records.
//!
//! Annotated prose marks each narrative function with its symbol in
//! brackets directly after the text that realizes it, e.g.
//! `...continue to look for a way out.(K)`. Both ASCII `( )` and full-width
//! `（ ）` brackets are recognized, in any combination. Offsets are counted in
//! Unicode scalar values of the marker-free text.

use std::collections::HashSet;
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::taxonomy::{parse_symbol, FunctionSymbol, FUNCTION_COUNT};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnnotationError {
    #[error("unknown symbol {token:?} at position {position}")]
    UnknownSymbol { token: String, position: usize },
    #[error("unknown parenthesized token {token:?} at character {offset}")]
    ParenthesizedUnknownToken { offset: usize, token: String },
    #[error("empty input")]
    EmptyInput,
    #[error("line {line}: malformed record: {message}")]
    MalformedRecord { line: usize, message: String },
    #[error("line {line}: invalid genre {genre:?}")]
    InvalidGenre { line: usize, genre: String },
    #[error("line {line}: duplicate segment id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: {source}")]
    Line {
        line: usize,
        #[source]
        source: Box<AnnotationError>,
    },
    #[error("read error: {0}")]
    Io(String),
}

impl AnnotationError {
    fn at_line(self, line: usize) -> Self {
        match self {
            e @ (AnnotationError::MalformedRecord { .. }
            | AnnotationError::InvalidGenre { .. }
            | AnnotationError::DuplicateId { .. }
            | AnnotationError::Line { .. }) => e,
            other => AnnotationError::Line {
                line,
                source: Box::new(other),
            },
        }
    }
}

/// Unknown parenthesized tokens are prose in lenient mode and errors in
/// strict mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    #[default]
    Lenient,
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Genre {
    Fantasy,
    Xianxia,
    Romance,
    TimeTravel,
    Urban,
}

impl Genre {
    pub const ALL: [Genre; 5] = [
        Genre::Fantasy,
        Genre::Xianxia,
        Genre::Romance,
        Genre::TimeTravel,
        Genre::Urban,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Genre::Fantasy => "Fantasy",
            Genre::Xianxia => "Xianxia",
            Genre::Romance => "Romance",
            Genre::TimeTravel => "TimeTravel",
            Genre::Urban => "Urban",
        }
    }
}

impl FromStr for Genre {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "Fantasy" => Ok(Genre::Fantasy),
            "Xianxia" => Ok(Genre::Xianxia),
            "Romance" => Ok(Genre::Romance),
            "TimeTravel" | "Time travel" | "Time Travel" => Ok(Genre::TimeTravel),
            "Urban" | "City" => Ok(Genre::Urban),
            other => Err(other.to_string()),
        }
    }
}

impl fmt::Display for Genre {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Annotation {
    /// Character offset into the clean text where the marker stood.
    pub offset: usize,
    pub symbol: FunctionSymbol,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedSegment {
    pub id: String,
    pub genre: Genre,
    pub clean_text: String,
    /// Sorted ascending by offset.
    pub annotations: Vec<Annotation>,
    pub rationale: Option<String>,
    pub annotator_id: Option<String>,
    /// Source novel, used to group segments when sampling windows.
    pub novel: Option<String>,
}

impl AnnotatedSegment {
    /// Builds a segment from inline-annotated text.
    pub fn from_inline(
        id: impl Into<String>,
        genre: Genre,
        text: &str,
        mode: ParseMode,
    ) -> Result<Self, AnnotationError> {
        let (clean_text, annotations) = parse_inline(text, mode)?;
        Ok(AnnotatedSegment {
            id: id.into(),
            genre,
            clean_text,
            annotations,
            rationale: None,
            annotator_id: None,
            novel: None,
        })
    }

    pub fn char_len(&self) -> usize {
        self.clean_text.chars().count()
    }

    pub fn sequence(&self) -> FunctionSequence {
        sequence_of(self)
    }

    /// Group key for sampling: the novel if known, else the segment id.
    pub fn novel_key(&self) -> &str {
        self.novel.as_deref().unwrap_or(&self.id)
    }

    /// The corpus-file record for this segment (explicit annotation form).
    pub fn to_record(&self) -> CorpusRecord {
        CorpusRecord {
            id: self.id.clone(),
            genre: self.genre.as_str().to_string(),
            text: None,
            clean_text: Some(self.clean_text.clone()),
            annotations: Some(
                self.annotations
                    .iter()
                    .map(|a| RecordAnnotation {
                        offset: a.offset,
                        symbol: a.symbol.token().to_string(),
                    })
                    .collect(),
            ),
            rationale: self.rationale.clone(),
            annotator: self.annotator_id.clone(),
            novel: self.novel.clone(),
        }
    }
}

/// An ordered run of function symbols; repeats are allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct FunctionSequence {
    pub symbols: Vec<FunctionSymbol>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_id: Option<String>,
}

impl FunctionSequence {
    pub fn new(symbols: Vec<FunctionSymbol>) -> Self {
        FunctionSequence {
            symbols,
            source_id: None,
        }
    }

    pub fn with_source(mut self, id: impl Into<String>) -> Self {
        self.source_id = Some(id.into());
        self
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn first(&self) -> Option<FunctionSymbol> {
        self.symbols.first().copied()
    }

    pub fn last(&self) -> Option<FunctionSymbol> {
        self.symbols.last().copied()
    }
}

impl fmt::Display for FunctionSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.symbols.iter().enumerate() {
            if i > 0 {
                f.write_str("-")?;
            }
            f.write_str(s.token())?;
        }
        Ok(())
    }
}

impl FromStr for FunctionSequence {
    type Err = AnnotationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_sequence_string(s, ParseMode::Strict)
    }
}

impl From<Vec<FunctionSymbol>> for FunctionSequence {
    fn from(symbols: Vec<FunctionSymbol>) -> Self {
        FunctionSequence::new(symbols)
    }
}

fn is_open(c: char) -> bool {
    c == '(' || c == '（'
}

fn is_close(c: char) -> bool {
    c == ')' || c == '）'
}

/// Strips recognized function markers from `text`.
///
/// A marker is an opening bracket, a registry token and a closing bracket
/// with nothing in between. Every other parenthetical is kept verbatim. In
/// strict mode a parenthesized single token of at most two characters that
/// is not a registry symbol is an error; its offset is the character
/// position of the opening bracket in the input.
pub fn parse_inline(
    text: &str,
    mode: ParseMode,
) -> Result<(String, Vec<Annotation>), AnnotationError> {
    let chars: Vec<char> = text.chars().collect();
    let mut clean = String::with_capacity(text.len());
    let mut clean_len = 0usize;
    let mut annotations = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if is_open(c) {
            let close = chars[i + 1..]
                .iter()
                .position(|&ch| is_close(ch) || is_open(ch))
                .map(|p| i + 1 + p)
                .filter(|&j| is_close(chars[j]));
            if let Some(j) = close {
                let token: String = chars[i + 1..j].iter().collect();
                if let Ok(symbol) = parse_symbol(&token) {
                    annotations.push(Annotation {
                        offset: clean_len,
                        symbol,
                    });
                    i = j + 1;
                    continue;
                }
                let len = j - i - 1;
                if mode == ParseMode::Strict
                    && (1..=2).contains(&len)
                    && !token.chars().any(char::is_whitespace)
                {
                    return Err(AnnotationError::ParenthesizedUnknownToken { offset: i, token });
                }
            }
        }
        clean.push(c);
        clean_len += 1;
        i += 1;
    }
    Ok((clean, annotations))
}

/// Re-inserts every annotation as an ASCII `(TOK)` marker.
pub fn emit_inline(segment: &AnnotatedSegment) -> String {
    let mut out = String::with_capacity(segment.clean_text.len() + 4 * segment.annotations.len());
    let mut pending = segment.annotations.iter().peekable();
    for (idx, c) in segment.clean_text.chars().enumerate() {
        while let Some(a) = pending.next_if(|a| a.offset <= idx) {
            push_marker(&mut out, a.symbol);
        }
        out.push(c);
    }
    for a in pending {
        push_marker(&mut out, a.symbol);
    }
    out
}

fn push_marker(out: &mut String, symbol: FunctionSymbol) {
    out.push('(');
    out.push_str(symbol.token());
    out.push(')');
}

pub fn sequence_of(segment: &AnnotatedSegment) -> FunctionSequence {
    FunctionSequence {
        symbols: segment.annotations.iter().map(|a| a.symbol).collect(),
        source_id: Some(segment.id.clone()),
    }
}

/// Parses hyphen notation such as `A-Lo-E-Q-P-S`.
///
/// Whitespace around tokens is ignored. A blank input is [`EmptyInput`]
/// in strict mode and an empty sequence in lenient mode, which also skips
/// empty tokens.
///
/// [`EmptyInput`]: AnnotationError::EmptyInput
pub fn parse_sequence_string(s: &str, mode: ParseMode) -> Result<FunctionSequence, AnnotationError> {
    if s.trim().is_empty() {
        return match mode {
            ParseMode::Strict => Err(AnnotationError::EmptyInput),
            ParseMode::Lenient => Ok(FunctionSequence::default()),
        };
    }
    let mut symbols = Vec::new();
    for (position, raw) in s.split('-').enumerate() {
        let token = raw.trim();
        if token.is_empty() && mode == ParseMode::Lenient {
            continue;
        }
        let symbol = parse_symbol(token).map_err(|_| AnnotationError::UnknownSymbol {
            token: token.to_string(),
            position,
        })?;
        symbols.push(symbol);
    }
    Ok(FunctionSequence::new(symbols))
}

/// Reads a sequence file: one hyphen sequence per line, `#` comments and
/// blank lines ignored. Each sequence's `source_id` is `line:<n>`.
pub fn parse_sequence_file(text: &str) -> Result<Vec<FunctionSequence>, AnnotationError> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let content = match line.find('#') {
            Some(p) => &line[..p],
            None => line,
        };
        if content.trim().is_empty() {
            continue;
        }
        let seq = parse_sequence_string(content, ParseMode::Strict)
            .map_err(|e| e.at_line(idx + 1))?;
        out.push(seq.with_source(format!("line:{}", idx + 1)));
    }
    Ok(out)
}

/// Renders sequences back into the sequence-file format.
pub fn emit_sequence_file(seqs: &[FunctionSequence]) -> String {
    let mut out = String::new();
    for s in seqs {
        out.push_str(&s.to_string());
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordAnnotation {
    pub offset: usize,
    pub symbol: String,
}

/// One line of a corpus file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: String,
    pub genre: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clean_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotations: Option<Vec<RecordAnnotation>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rationale: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub novel: Option<String>,
}

impl CorpusRecord {
    fn into_segment(self, line: usize, mode: ParseMode) -> Result<AnnotatedSegment, AnnotationError> {
        let malformed = |message: &str| AnnotationError::MalformedRecord {
            line,
            message: message.to_string(),
        };
        if self.id.trim().is_empty() {
            return Err(malformed("empty id"));
        }
        let genre = self
            .genre
            .parse::<Genre>()
            .map_err(|genre| AnnotationError::InvalidGenre { line, genre })?;
        let (clean_text, annotations) = match (self.text, self.clean_text, self.annotations) {
            (Some(text), None, None) => parse_inline(&text, mode).map_err(|e| e.at_line(line))?,
            (None, Some(clean), annotations) => {
                let len = clean.chars().count();
                let mut out = Vec::new();
                for (position, a) in annotations.unwrap_or_default().into_iter().enumerate() {
                    let symbol = parse_symbol(&a.symbol).map_err(|_| {
                        AnnotationError::UnknownSymbol {
                            token: a.symbol.clone(),
                            position,
                        }
                        .at_line(line)
                    })?;
                    if a.offset > len {
                        return Err(malformed(&format!(
                            "annotation offset {} beyond text length {len}",
                            a.offset
                        )));
                    }
                    out.push(Annotation {
                        offset: a.offset,
                        symbol,
                    });
                }
                out.sort_by_key(|a| a.offset);
                (clean, out)
            }
            (Some(_), Some(_), _) | (Some(_), None, Some(_)) => {
                return Err(malformed("give either `text` or `clean_text`, not both"))
            }
            (None, None, _) => return Err(malformed("missing `text` or `clean_text`")),
        };
        Ok(AnnotatedSegment {
            id: self.id,
            genre,
            clean_text,
            annotations,
            rationale: self.rationale,
            annotator_id: self.annotator,
            novel: self.novel,
        })
    }
}

/// Loads a line-delimited JSON corpus. Blank lines are skipped.
pub fn load_corpus<R: BufRead>(reader: R, mode: ParseMode) -> Result<Vec<AnnotatedSegment>, AnnotationError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| AnnotationError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: CorpusRecord =
            serde_json::from_str(&line).map_err(|e| AnnotationError::MalformedRecord {
                line: line_no,
                message: e.to_string(),
            })?;
        let segment = record.into_segment(line_no, mode)?;
        if !seen.insert(segment.id.clone()) {
            return Err(AnnotationError::DuplicateId {
                line: line_no,
                id: segment.id,
            });
        }
        out.push(segment);
    }
    Ok(out)
}

pub fn load_corpus_str(text: &str, mode: ParseMode) -> Result<Vec<AnnotatedSegment>, AnnotationError> {
    load_corpus(text.as_bytes(), mode)
}

/// Loads a corpus annotated twice: every record names one of exactly two
/// annotators, and ids are unique per annotator. Returns each annotator's
/// segments in first-seen order.
pub fn load_dual_corpus(
    text: &str,
    mode: ParseMode,
) -> Result<(Vec<AnnotatedSegment>, Vec<AnnotatedSegment>), AnnotationError> {
    let mut annotators: Vec<String> = Vec::new();
    let mut sides: [Vec<AnnotatedSegment>; 2] = [Vec::new(), Vec::new()];
    let mut seen = HashSet::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: CorpusRecord =
            serde_json::from_str(line).map_err(|e| AnnotationError::MalformedRecord {
                line: line_no,
                message: e.to_string(),
            })?;
        let Some(who) = record.annotator.clone() else {
            return Err(AnnotationError::MalformedRecord {
                line: line_no,
                message: "missing `annotator`".into(),
            });
        };
        let side = match annotators.iter().position(|a| *a == who) {
            Some(i) => i,
            None if annotators.len() < 2 => {
                annotators.push(who.clone());
                annotators.len() - 1
            }
            None => {
                return Err(AnnotationError::MalformedRecord {
                    line: line_no,
                    message: format!("third annotator {who:?}"),
                })
            }
        };
        let segment = record.into_segment(line_no, mode)?;
        if !seen.insert((side, segment.id.clone())) {
            return Err(AnnotationError::DuplicateId {
                line: line_no,
                id: segment.id,
            });
        }
        sides[side].push(segment);
    }
    let [a, b] = sides;
    Ok((a, b))
}

/// Serializes segments as corpus lines (explicit annotation form).
pub fn emit_corpus(segments: &[AnnotatedSegment]) -> String {
    let mut out = String::new();
    for s in segments {
        out.push_str(&serde_json::to_string(&s.to_record()).expect("record serializes"));
        out.push('\n');
    }
    out
}

/// Minimum number of segments each function must appear in.
pub const MIN_SEGMENTS_PER_FUNCTION: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverageReport {
    /// Segments containing each symbol, in registry order.
    pub segment_counts: Vec<(FunctionSymbol, usize)>,
    pub under_covered: Vec<FunctionSymbol>,
    pub pass: bool,
}

impl CoverageReport {
    pub fn count(&self, symbol: FunctionSymbol) -> usize {
        self.segment_counts[symbol.index()].1
    }
}

pub fn validate_coverage(corpus: &[AnnotatedSegment]) -> CoverageReport {
    let mut counts = [0usize; FUNCTION_COUNT];
    for seg in corpus {
        let mut present = [false; FUNCTION_COUNT];
        for a in &seg.annotations {
            present[a.symbol.index()] = true;
        }
        for (c, p) in counts.iter_mut().zip(present) {
            *c += usize::from(p);
        }
    }
    let segment_counts: Vec<_> = FunctionSymbol::ALL.iter().map(|&s| (s, counts[s.index()])).collect();
    let under_covered: Vec<_> = segment_counts
        .iter()
        .filter(|(_, c)| *c < MIN_SEGMENTS_PER_FUNCTION)
        .map(|(s, _)| *s)
        .collect();
    CoverageReport {
        pass: under_covered.is_empty(),
        segment_counts,
        under_covered,
    }
}
