//! Word vectors and the word2vec text format.
//!
//! The file starts with a "<rows> <dim>" header followed by one
//! "<word> <v1> ... <vdim>" line per row. Values are printed with nine
//! significant digits, which makes save/load/save byte-stable.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView1, Axis};

use crate::error::{Error, Result};

/// An exported embedding: one row per word.
#[derive(Debug, Clone, PartialEq)]
pub struct Embeddings {
    words: Vec<String>,
    index: HashMap<String, usize>,
    matrix: Array2<f64>,
}

impl Embeddings {
    pub fn new(words: Vec<String>, matrix: Array2<f64>) -> Result<Self> {
        if words.len() != matrix.nrows() {
            return Err(Error::Spec(format!(
                "{} words for {} rows",
                words.len(),
                matrix.nrows()
            )));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if w.is_empty() || w.chars().any(char::is_whitespace) {
                return Err(Error::Spec(format!("invalid word {w:?}")));
            }
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::DuplicateToken(w.clone()));
            }
        }
        Ok(Embeddings { words, index, matrix })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word(&self, i: usize) -> &str {
        &self.words[i]
    }

    pub fn index(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn require(&self, word: &str) -> Result<usize> {
        self.index(word).ok_or_else(|| Error::Oov(word.to_string()))
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn matrix_mut(&mut self) -> &mut Array2<f64> {
        &mut self.matrix
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.matrix.row(i)
    }

    pub fn vector(&self, word: &str) -> Result<ArrayView1<'_, f64>> {
        Ok(self.row(self.require(word)?))
    }

    /// Copy with every nonzero row scaled to unit length.
    pub fn normalized(&self) -> Embeddings {
        let mut out = self.clone();
        for mut row in out.matrix.axis_iter_mut(Axis(0)) {
            let n = row.dot(&row).sqrt();
            if n > 0.0 {
                row /= n;
            }
        }
        out
    }

    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {}", self.len(), self.dim())?;
        let mut line = String::new();
        for (word, row) in self.words.iter().zip(self.matrix.rows()) {
            line.clear();
            line.push_str(word);
            for &v in row {
                line.push(' ');
                line.push_str(&format_sig9(v));
            }
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::file(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_text(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines.next().ok_or_else(|| Error::parse(1, "missing header"))??;
        let mut h = header.split_whitespace();
        let (rows, dim) = match (h.next(), h.next(), h.next()) {
            (Some(r), Some(d), None) => (
                r.parse::<usize>().map_err(|_| Error::parse(1, "bad row count"))?,
                d.parse::<usize>().map_err(|_| Error::parse(1, "bad dimension"))?,
            ),
            _ => return Err(Error::parse(1, format!("bad header {header:?}"))),
        };
        let mut words = Vec::with_capacity(rows);
        let mut data = Vec::with_capacity(rows * dim);
        for (i, line) in lines.enumerate() {
            let line = line?;
            let lineno = i + 2;
            if line.trim().is_empty() {
                continue;
            }
            if words.len() == rows {
                return Err(Error::parse(lineno, "more rows than the header declares"));
            }
            let mut fields = line.split_whitespace();
            let word = fields.next().expect("non-empty line");
            let before = data.len();
            for f in fields {
                let v: f64 = f
                    .parse()
                    .map_err(|_| Error::parse(lineno, format!("bad value {f:?}")))?;
                data.push(v);
            }
            if data.len() - before != dim {
                return Err(Error::parse(
                    lineno,
                    format!("expected {dim} values, got {}", data.len() - before),
                ));
            }
            words.push(word.to_string());
        }
        if words.len() != rows {
            return Err(Error::parse(
                rows + 1,
                format!("expected {rows} rows, got {}", words.len()),
            ));
        }
        let matrix = Array2::from_shape_vec((rows, dim), data).expect("shape checked");
        Embeddings::new(words, matrix)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::file(path, e))?;
        Self::read_text(BufReader::new(file))
    }
}

/// Formats like C's `%.9g`: nine significant digits, trailing zeros removed,
/// scientific notation outside [1e-4, 1e9).
pub fn format_sig9(v: f64) -> String {
    const PRECISION: i32 = 9;
    if !v.is_finite() {
        return format!("{v}");
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (PRECISION - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..PRECISION).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (PRECISION - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
