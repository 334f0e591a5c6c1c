//! Token streams over whitespace-delimited text, the corpus transforms
//! (pair merging, name masking) and vocabulary construction.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lexicon::{NameSet, PairLexicon};

pub const DEFAULT_MASK_TOKEN: &str = "<ent>";

/// Lowercases a raw token and strips every character outside `[a-z0-9_<>]`.
/// Returns `None` when nothing is left.
pub fn normalize_token(raw: &str) -> Option<String> {
    let mut out = String::with_capacity(raw.len());
    for c in raw.chars().flat_map(char::to_lowercase) {
        if c.is_ascii_lowercase() || c.is_ascii_digit() || matches!(c, '_' | '<' | '>') {
            out.push(c);
        }
    }
    (!out.is_empty()).then_some(out)
}

/// Splits raw UTF-8 text on whitespace and normalizes every token.
pub fn tokenize_str(text: &str) -> Vec<String> {
    text.split_whitespace().filter_map(normalize_token).collect()
}

/// Streaming tokenizer over a byte source. Memory use is bounded by the
/// longest token, not by line length.
pub struct Tokens<R> {
    reader: R,
    buf: Box<[u8]>,
    pos: usize,
    len: usize,
    token: Vec<u8>,
    pending: VecDeque<String>,
    done: bool,
}

impl<R: Read> Tokens<R> {
    pub fn new(reader: R) -> Self {
        Tokens {
            reader,
            buf: vec![0; 64 * 1024].into_boxed_slice(),
            pos: 0,
            len: 0,
            token: Vec::new(),
            pending: VecDeque::new(),
            done: false,
        }
    }

    fn next_raw(&mut self) -> io::Result<Option<Vec<u8>>> {
        loop {
            if self.pos == self.len {
                if self.done {
                    return Ok(None);
                }
                self.len = loop {
                    match self.reader.read(&mut self.buf) {
                        Ok(n) => break n,
                        Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                        Err(e) => return Err(e),
                    }
                };
                self.pos = 0;
                if self.len == 0 {
                    self.done = true;
                    if !self.token.is_empty() {
                        return Ok(Some(std::mem::take(&mut self.token)));
                    }
                    return Ok(None);
                }
            }
            while self.pos < self.len {
                let b = self.buf[self.pos];
                self.pos += 1;
                if b.is_ascii_whitespace() {
                    if !self.token.is_empty() {
                        return Ok(Some(std::mem::take(&mut self.token)));
                    }
                } else {
                    self.token.push(b);
                }
            }
        }
    }
}

impl<R: Read> Iterator for Tokens<R> {
    type Item = io::Result<String>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(tok) = self.pending.pop_front() {
                return Some(Ok(tok));
            }
            let raw = match self.next_raw() {
                Ok(Some(raw)) => raw,
                Ok(None) => return None,
                Err(e) => return Some(Err(e)),
            };
            let s = match std::str::from_utf8(&raw) {
                Ok(s) => s,
                Err(e) => return Some(Err(io::Error::new(io::ErrorKind::InvalidData, e))),
            };
            // The byte scanner only splits on ASCII whitespace.
            self.pending.extend(s.split_whitespace().filter_map(normalize_token));
        }
    }
}

#[derive(Debug, Clone)]
enum Source {
    File(PathBuf),
    Memory(Arc<Vec<String>>),
}

#[derive(Debug, Clone)]
enum Transform {
    Replace(Arc<HashMap<String, String>>),
    Mask(Arc<HashSet<String>>, Arc<str>),
}

impl Transform {
    fn apply(&self, tok: String) -> String {
        match self {
            Transform::Replace(map) => map.get(&tok).cloned().unwrap_or(tok),
            Transform::Mask(names, mask) => {
                if names.contains(&tok) {
                    mask.to_string()
                } else {
                    tok
                }
            }
        }
    }
}

/// A replayable sequence of normalized tokens. Transforms are applied lazily
/// on every pass, so memory stays constant in corpus length.
#[derive(Debug, Clone)]
pub struct TokenStream {
    source: Source,
    transforms: Vec<Transform>,
}

impl TokenStream {
    /// Stream over a text file; tokenization happens on every pass.
    pub fn from_file(path: impl Into<PathBuf>) -> Self {
        TokenStream {
            source: Source::File(path.into()),
            transforms: Vec::new(),
        }
    }

    /// Stream over already-split text; each token is normalized.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let tokens = tokens.into_iter().filter_map(|t| normalize_token(t.as_ref())).collect();
        TokenStream {
            source: Source::Memory(Arc::new(tokens)),
            transforms: Vec::new(),
        }
    }

    pub fn from_text(text: &str) -> Self {
        Self::from_tokens(text.split_whitespace())
    }

    pub fn source_path(&self) -> Option<&Path> {
        match &self.source {
            Source::File(p) => Some(p),
            Source::Memory(_) => None,
        }
    }

    pub fn iter(&self) -> Result<Box<dyn Iterator<Item = Result<String>> + '_>> {
        let base: Box<dyn Iterator<Item = Result<String>>> = match &self.source {
            Source::File(path) => {
                let file = File::open(path).map_err(|e| Error::file(path, e))?;
                Box::new(Tokens::new(BufReader::new(file)).map(|r| r.map_err(Error::from)))
            }
            Source::Memory(tokens) => {
                let tokens = Arc::clone(tokens);
                Box::new((0..tokens.len()).map(move |i| Ok(tokens[i].clone())))
            }
        };
        Ok(Box::new(base.map(move |r| {
            r.map(|tok| self.transforms.iter().fold(tok, |t, tr| tr.apply(t)))
        })))
    }

    pub fn collect_tokens(&self) -> Result<Vec<String>> {
        self.iter()?.collect()
    }

    /// Replaces both words of every pair with the merged "male_female" token.
    pub fn merge_gender_pairs(mut self, lex: &PairLexicon) -> Self {
        let mut map = HashMap::new();
        for (i, (m, f)) in lex.pairs().iter().enumerate() {
            let merged = lex.merged_token(i);
            map.insert(m.clone(), merged.clone());
            map.insert(f.clone(), merged);
        }
        self.transforms.push(Transform::Replace(Arc::new(map)));
        self
    }

    /// Replaces every token in `names` with `mask_token`.
    pub fn mask_names(mut self, names: &NameSet, mask_token: &str) -> Self {
        let set: HashSet<String> = names.names().iter().cloned().collect();
        self.transforms
            .push(Transform::Mask(Arc::new(set), Arc::from(mask_token)));
        self
    }

    /// Writes the stream as space-separated tokens, wrapping lines every
    /// `per_line` tokens. Returns the token count.
    pub fn write_to(&self, path: impl AsRef<Path>, per_line: usize) -> Result<u64> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::file(path, e))?;
        let mut out = BufWriter::new(file);
        let mut n = 0u64;
        let per_line = per_line.max(1) as u64;
        for tok in self.iter()? {
            let tok = tok?;
            if n > 0 {
                out.write_all(if n.is_multiple_of(per_line) { b"\n" } else { b" " })?;
            }
            out.write_all(tok.as_bytes())?;
            n += 1;
        }
        if n > 0 {
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(n)
    }
}

/// Token counts over a stream, in no particular order.
pub fn count_tokens(stream: &TokenStream) -> Result<(HashMap<String, u64>, u64)> {
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut total = 0;
    for tok in stream.iter()? {
        *counts.entry(tok?).or_default() += 1;
        total += 1;
    }
    Ok((counts, total))
}

/// Token to index map with frequencies. Indices are assigned by descending
/// count, ties broken lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
    total_tokens: u64,
    min_count: u64,
}

impl Vocabulary {
    pub fn build(stream: &TokenStream, min_count: u64) -> Result<Self> {
        let (counts, total) = count_tokens(stream)?;
        Self::from_counts(counts, total, min_count)
    }

    pub fn from_counts(counts: HashMap<String, u64>, total_tokens: u64, min_count: u64) -> Result<Self> {
        if min_count == 0 {
            return Err(Error::Config("min_count must be at least 1".into()));
        }
        let mut kept: Vec<(String, u64)> = counts.into_iter().filter(|(_, c)| *c >= min_count).collect();
        if kept.is_empty() {
            return Err(Error::EmptyVocab);
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let index = kept.iter().enumerate().map(|(i, (w, _))| (w.clone(), i)).collect();
        let (words, counts) = kept.into_iter().unzip();
        Ok(Vocabulary {
            words,
            counts,
            index,
            total_tokens,
            min_count,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, idx: usize) -> &str {
        &self.words[idx]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn count(&self, idx: usize) -> u64 {
        self.counts[idx]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Tokens in the stream the vocabulary was built from, including dropped ones.
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    /// Sum of counts over kept tokens.
    pub fn retained_tokens(&self) -> u64 {
        self.counts.iter().sum()
    }
}
