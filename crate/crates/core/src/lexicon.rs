//! Word lists that parameterize preprocessing, training and evaluation.
//!
//! Every list has a canonical text form; `parse(to_text(x))` reproduces `x`
//! and `to_text` of the result is byte-identical to the input.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Canonical form of a word: trimmed and lowercased.
pub fn normalize(word: &str) -> String {
    word.trim().to_lowercase()
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::file(path, e))
}

/// Ordered list of (male, female) gendered word pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairLexicon {
    pairs: Vec<(String, String)>,
}

impl PairLexicon {
    pub fn new(pairs: Vec<(String, String)>) -> Result<Self> {
        let pairs: Vec<_> = pairs.into_iter().map(|(m, f)| (normalize(&m), normalize(&f))).collect();
        if pairs.is_empty() {
            return Err(Error::Spec("pair lexicon is empty".into()));
        }
        let mut seen = HashSet::new();
        for (m, f) in &pairs {
            if m.is_empty() || f.is_empty() {
                return Err(Error::Spec("empty token in pair lexicon".into()));
            }
            if m == f {
                return Err(Error::DuplicateToken(m.clone()));
            }
            for t in [m, f] {
                if !seen.insert(t.clone()) {
                    return Err(Error::DuplicateToken(t.clone()));
                }
            }
        }
        Ok(PairLexicon { pairs })
    }

    /// Parses "male female" lines; blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                [m, f] => pairs.push((m.to_string(), f.to_string())),
                _ => return Err(Error::parse(i + 1, format!("expected two tokens, got {line:?}"))),
            }
        }
        Self::new(pairs)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&read_text(path.as_ref())?)
    }

    pub fn to_text(&self) -> String {
        self.pairs.iter().fold(String::new(), |mut s, (m, f)| {
            let _ = writeln!(s, "{m} {f}");
            s
        })
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// All tokens, male then female per pair, in file order.
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.pairs.iter().flat_map(|(m, f)| [m.as_str(), f.as_str()])
    }

    /// The merged "male_female" token for pair `i`.
    pub fn merged_token(&self, i: usize) -> String {
        let (m, f) = &self.pairs[i];
        format!("{m}_{f}")
    }
}

/// Given names frequent enough to be masked.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NameSet {
    names: BTreeSet<String>,
    threshold: u64,
    exclusions: BTreeSet<String>,
}

fn is_name_token(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_lowercase())
}

impl NameSet {
    pub fn new(names: impl IntoIterator<Item = String>, threshold: u64, exclusions: BTreeSet<String>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for n in names {
            let n = normalize(&n);
            if !is_name_token(&n) {
                return Err(Error::Spec(format!("name {n:?} is not alphabetic")));
            }
            if !exclusions.contains(&n) {
                set.insert(n);
            }
        }
        Ok(NameSet {
            names: set,
            threshold,
            exclusions,
        })
    }

    /// Aggregates SSA `yobYYYY.txt` files ("Name,Sex,Count" lines) and keeps
    /// every name whose total count over all years and both sexes is strictly
    /// above `threshold`, minus `exclusions`.
    pub fn build(ssa_dir: impl AsRef<Path>, threshold: u64, exclusions: BTreeSet<String>) -> Result<Self> {
        let dir = ssa_dir.as_ref();
        let mut files: Vec<_> = fs::read_dir(dir)
            .map_err(|e| Error::file(dir, e))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(is_ssa_file_name))
            .collect();
        files.sort();

        let mut totals: BTreeMap<String, u64> = BTreeMap::new();
        for path in &files {
            let text = read_text(path)?;
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let (name, count) = parse_ssa_line(line)
                    .ok_or_else(|| Error::parse(i + 1, format!("{}: malformed SSA line {line:?}", path.display())))?;
                *totals.entry(name).or_default() += count;
            }
        }

        let exclusions: BTreeSet<String> = exclusions.iter().map(|e| normalize(e)).collect();
        let names = totals
            .into_iter()
            .filter(|(_, total)| *total > threshold)
            .map(|(name, _)| name);
        Self::new(names, threshold, exclusions)
    }

    /// Parses the canonical names file: an optional "# threshold=N" header
    /// followed by one name per line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut threshold = 0;
        let mut names = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("threshold=") {
                    threshold = v
                        .trim()
                        .parse()
                        .map_err(|_| Error::parse(i + 1, format!("bad threshold {v:?}")))?;
                }
                continue;
            }
            let name = normalize(line);
            if !is_name_token(&name) {
                return Err(Error::parse(i + 1, format!("name {line:?} is not alphabetic")));
            }
            names.push(name);
        }
        Self::new(names, threshold, BTreeSet::new())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&read_text(path.as_ref())?)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("# threshold={}\n", self.threshold);
        for n in &self.names {
            s.push_str(n);
            s.push('\n');
        }
        s
    }

    pub fn contains(&self, word: &str) -> bool {
        self.names.contains(word)
    }

    pub fn names(&self) -> &BTreeSet<String> {
        &self.names
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn exclusions(&self) -> &BTreeSet<String> {
        &self.exclusions
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

fn is_ssa_file_name(name: &str) -> bool {
    name.strip_prefix("yob")
        .and_then(|r| r.strip_suffix(".txt"))
        .is_some_and(|y| y.len() == 4 && y.bytes().all(|b| b.is_ascii_digit()))
}

fn parse_ssa_line(line: &str) -> Option<(String, u64)> {
    let mut fields = line.split(',');
    let name = normalize(fields.next()?);
    let sex = fields.next()?.trim();
    let count = fields.next()?.trim().parse().ok()?;
    if fields.next().is_some() || !matches!(sex, "M" | "F") || !is_name_token(&name) {
        return None;
    }
    Some((name, count))
}

/// Default exclusions for name masking: every gendered pair token, every
/// profession, and a user stoplist. Keeps homographs like "will" unmasked.
pub fn default_name_exclusions(
    pairs: Option<&PairLexicon>,
    professions: Option<&ProfessionSet>,
    stoplist: impl IntoIterator<Item = String>,
) -> BTreeSet<String> {
    let mut out: BTreeSet<String> = stoplist.into_iter().map(|w| normalize(&w)).collect();
    if let Some(p) = pairs {
        out.extend(p.tokens().map(str::to_owned));
    }
    if let Some(p) = professions {
        out.extend(p.entries().iter().map(|(t, _)| t.clone()));
    }
    out
}

/// Reads a plain word list, one word per line, blank lines and `#` comments
/// ignored.
pub fn load_word_list(path: impl AsRef<Path>) -> Result<Vec<String>> {
    Ok(read_text(path.as_ref())?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(normalize)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stereotype {
    Male,
    Female,
}

impl Stereotype {
    pub fn code(self) -> &'static str {
        match self {
            Stereotype::Male => "m",
            Stereotype::Female => "f",
        }
    }
}

/// Professions labeled with the gender they are stereotypically associated with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfessionSet {
    entries: Vec<(String, Stereotype)>,
}

impl ProfessionSet {
    pub fn new(entries: Vec<(String, Stereotype)>) -> Result<Self> {
        let mut seen = HashSet::new();
        let entries: Vec<_> = entries.into_iter().map(|(t, s)| (normalize(&t), s)).collect();
        for (t, _) in &entries {
            if !seen.insert(t.clone()) {
                return Err(Error::DuplicateToken(t.clone()));
            }
        }
        for class in [Stereotype::Male, Stereotype::Female] {
            if !entries.iter().any(|(_, s)| *s == class) {
                return Err(Error::Spec(format!("profession list has no {:?} entries", class)));
            }
        }
        Ok(ProfessionSet { entries })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let stereotype = match fields.as_slice() {
                [_, "m"] => Stereotype::Male,
                [_, "f"] => Stereotype::Female,
                _ => return Err(Error::parse(i + 1, format!("expected \"token m|f\", got {line:?}"))),
            };
            entries.push((fields[0].to_string(), stereotype));
        }
        Self::new(entries)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&read_text(path.as_ref())?)
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().fold(String::new(), |mut s, (t, st)| {
            let _ = writeln!(s, "{t} {}", st.code());
            s
        })
    }

    pub fn entries(&self) -> &[(String, Stereotype)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn stereotype(&self, token: &str) -> Option<Stereotype> {
        self.entries.iter().find(|(t, _)| t == token).map(|(_, s)| *s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SemBiasTag {
    Definition,
    Stereotype,
    None,
}

impl SemBiasTag {
    pub fn as_str(self) -> &'static str {
        match self {
            SemBiasTag::Definition => "definition",
            SemBiasTag::Stereotype => "stereotype",
            SemBiasTag::None => "none",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "definition" => Some(SemBiasTag::Definition),
            "stereotype" => Some(SemBiasTag::Stereotype),
            "none" => Some(SemBiasTag::None),
            _ => None,
        }
    }
}

/// One analogy question: four candidate (male-side, female-side) pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemBiasInstance {
    pub candidates: [(String, String, SemBiasTag); 4],
}

impl SemBiasInstance {
    pub fn new(candidates: [(String, String, SemBiasTag); 4]) -> Result<Self> {
        let count = |tag| candidates.iter().filter(|c| c.2 == tag).count();
        if count(SemBiasTag::Definition) != 1 || count(SemBiasTag::Stereotype) != 1 || count(SemBiasTag::None) != 2 {
            return Err(Error::Spec(
                "instance needs one definition, one stereotype and two none pairs".into(),
            ));
        }
        Ok(SemBiasInstance { candidates })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemBiasSet {
    instances: Vec<SemBiasInstance>,
}

impl SemBiasSet {
    pub fn new(instances: Vec<SemBiasInstance>) -> Self {
        SemBiasSet { instances }
    }

    /// Parses blocks of four "male<TAB>female<TAB>tag" lines separated by
    /// blank lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut instances = Vec::new();
        let mut block: Vec<(String, String, SemBiasTag)> = Vec::new();
        let mut block_start = 0;
        let lines: Vec<&str> = text.lines().collect();
        for (i, line) in lines.iter().enumerate() {
            if line.trim().is_empty() {
                if !block.is_empty() {
                    instances.push(finish_block(&mut block, block_start)?);
                }
                continue;
            }
            if block.is_empty() {
                block_start = i + 1;
            }
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            let (m, f, tag) = match fields.as_slice() {
                [m, f, tag] if !m.is_empty() && !f.is_empty() => (m, f, tag),
                _ => {
                    return Err(Error::parse(
                        i + 1,
                        format!("expected three tab-separated fields, got {line:?}"),
                    ))
                }
            };
            let tag = SemBiasTag::parse(tag).ok_or_else(|| Error::parse(i + 1, format!("unknown tag {tag:?}")))?;
            block.push((normalize(m), normalize(f), tag));
            if block.len() > 4 {
                return Err(Error::parse(i + 1, "block has more than four lines"));
            }
        }
        if !block.is_empty() {
            instances.push(finish_block(&mut block, block_start)?);
        }
        Ok(SemBiasSet { instances })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&read_text(path.as_ref())?)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (i, inst) in self.instances.iter().enumerate() {
            if i > 0 {
                s.push('\n');
            }
            for (m, f, tag) in &inst.candidates {
                let _ = writeln!(s, "{m}\t{f}\t{}", tag.as_str());
            }
        }
        s
    }

    pub fn instances(&self) -> &[SemBiasInstance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }
}

fn finish_block(block: &mut Vec<(String, String, SemBiasTag)>, line: usize) -> Result<SemBiasInstance> {
    let lines = std::mem::take(block);
    let candidates: [(String, String, SemBiasTag); 4] = lines
        .try_into()
        .map_err(|v: Vec<_>| Error::parse(line, format!("block has {} lines, expected 4", v.len())))?;
    SemBiasInstance::new(candidates).map_err(|e| Error::parse(line, e.to_string()))
}

/// Target sets X, Y and attribute sets A, B of an association test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeatSpec {
    pub name: String,
    #[serde(rename = "X")]
    pub x: Vec<String>,
    #[serde(rename = "Y")]
    pub y: Vec<String>,
    #[serde(rename = "A")]
    pub a: Vec<String>,
    #[serde(rename = "B")]
    pub b: Vec<String>,
}

impl WeatSpec {
    pub fn new(
        name: impl Into<String>,
        x: Vec<String>,
        y: Vec<String>,
        a: Vec<String>,
        b: Vec<String>,
    ) -> Result<Self> {
        let norm = |v: Vec<String>| v.iter().map(|w| normalize(w)).collect::<Vec<_>>();
        let spec = WeatSpec {
            name: name.into(),
            x: norm(x),
            y: norm(y),
            a: norm(a),
            b: norm(b),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.x.len() != self.y.len() {
            return Err(Error::Spec(format!(
                "target sets differ in size: |X|={}, |Y|={}",
                self.x.len(),
                self.y.len()
            )));
        }
        if self.x.len() < 2 {
            return Err(Error::Spec("target sets need at least two words".into()));
        }
        if self.a.is_empty() || self.b.is_empty() {
            return Err(Error::Spec("attribute sets must be non-empty".into()));
        }
        let xs: HashSet<&String> = self.x.iter().collect();
        if let Some(w) = self.y.iter().find(|w| xs.contains(w)) {
            return Err(Error::Spec(format!("{w:?} is in both X and Y")));
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: WeatSpec = serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))?;
        WeatSpec::new(raw.name, raw.x, raw.y, raw.a, raw.b)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&read_text(path.as_ref())?)
    }

    pub fn to_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("spec serializes");
        s.push('\n');
        s
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.x
            .iter()
            .chain(&self.y)
            .chain(&self.a)
            .chain(&self.b)
            .map(String::as_str)
    }
}
