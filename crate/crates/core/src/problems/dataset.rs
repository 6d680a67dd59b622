//! Row-sparse labelled datasets and their text loaders (LIBSVM, dense CSV).

use std::io::{BufRead, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::aux_rng;

/// Compressed sparse rows with 0-based column indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseRows {
    pub n_cols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseRows {
    pub fn n_rows(&self) -> usize {
        self.indptr.len().saturating_sub(1)
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    /// Dense copy of the rows; handy for small test problems.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n_rows())
            .map(|i| {
                let mut row = vec![0.0; self.n_cols];
                let (idx, val) = self.row(i);
                for (j, v) in idx.iter().zip(val) {
                    row[*j] += v;
                }
                row
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub features: SparseRows,
    pub labels: Vec<f64>,
}

/// Truncation applied while loading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LoadOptions {
    /// Keep only features with 1-based index `<= max_features`.
    pub max_features: Option<usize>,
    /// Keep only the first `max_samples` rows.
    pub max_samples: Option<usize>,
}

impl LoadOptions {
    /// First 10,000 features and first 1,000 samples.
    pub fn standard_truncation() -> Self {
        Self {
            max_features: Some(10_000),
            max_samples: Some(1_000),
        }
    }
}

/// Whitespace-separated tokens with their 1-based starting columns.
pub(crate) fn tokens_with_columns(line: &str) -> Vec<(&str, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((&line[s..i], s + 1));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((&line[s..], s + 1));
    }
    out
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

impl Dataset {
    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.n_cols
    }

    /// Sorted distinct label values.
    pub fn classes(&self) -> Vec<f64> {
        let mut c = self.labels.clone();
        c.sort_by(f64::total_cmp);
        c.dedup();
        c
    }

    /// LIBSVM text: `label idx:val idx:val ...` with 1-based indices.
    /// Blank lines and `#` comments are skipped.
    pub fn parse_libsvm(reader: impl BufRead, opts: LoadOptions) -> Result<Self> {
        let mut features = SparseRows {
            indptr: vec![0],
            ..Default::default()
        };
        let mut labels = Vec::new();
        let mut max_col = 0usize;
        for (ln, line) in reader.lines().enumerate() {
            let line_no = ln + 1;
            let line = line?;
            let content = line.split('#').next().unwrap_or("");
            let toks = tokens_with_columns(content);
            if toks.is_empty() {
                continue;
            }
            if opts.max_samples.is_some_and(|m| labels.len() >= m) {
                break;
            }
            let (lab, lc) = toks[0];
            let label: f64 = lab
                .parse()
                .map_err(|_| parse_err(line_no, lc, format!("bad label `{lab}`")))?;
            let mut row: Vec<(usize, f64)> = Vec::with_capacity(toks.len() - 1);
            for &(tok, col) in &toks[1..] {
                let (idx, val) = tok
                    .split_once(':')
                    .ok_or_else(|| parse_err(line_no, col, format!("expected `index:value`, got `{tok}`")))?;
                let idx: usize = idx
                    .parse()
                    .ok()
                    .filter(|i| *i >= 1)
                    .ok_or_else(|| parse_err(line_no, col, format!("bad feature index `{idx}`")))?;
                let val: f64 = val
                    .parse()
                    .map_err(|_| parse_err(line_no, col + tok.find(':').unwrap() + 1, format!("bad feature value `{val}`")))?;
                if opts.max_features.is_some_and(|m| idx > m) {
                    continue;
                }
                max_col = max_col.max(idx);
                row.push((idx - 1, val));
            }
            row.sort_by_key(|(i, _)| *i);
            for (i, v) in row {
                features.indices.push(i);
                features.values.push(v);
            }
            features.indptr.push(features.indices.len());
            labels.push(label);
        }
        features.n_cols = max_col;
        Ok(Self { features, labels })
    }

    pub fn load_libsvm(path: impl AsRef<Path>, opts: LoadOptions) -> Result<Self> {
        let f = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::parse_libsvm(f, opts)
    }

    pub fn write_libsvm(&self, w: &mut impl Write) -> Result<()> {
        for (i, label) in self.labels.iter().enumerate() {
            write!(w, "{label}")?;
            let (idx, val) = self.features.row(i);
            for (j, v) in idx.iter().zip(val) {
                write!(w, " {}:{}", j + 1, v)?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Dense CSV with a header row. The label is the column named `label`
    /// (case-insensitive) if present, else the first column.
    pub fn parse_dense_csv(reader: impl std::io::Read, opts: LoadOptions) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| parse_err(1, 1, e.to_string()))?
            .clone();
        let label_col = headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case("label"))
            .unwrap_or(0);
        let n_feat_all = headers.len().saturating_sub(1);
        let n_feat = opts.max_features.map_or(n_feat_all, |m| m.min(n_feat_all));
        let mut features = SparseRows {
            n_cols: n_feat,
            indptr: vec![0],
            ..Default::default()
        };
        let mut labels = Vec::new();
        for (r, rec) in rdr.records().enumerate() {
            let line_no = r + 2;
            if opts.max_samples.is_some_and(|m| labels.len() >= m) {
                break;
            }
            let rec = rec.map_err(|e| parse_err(line_no, 1, e.to_string()))?;
            if rec.len() != headers.len() {
                return Err(parse_err(line_no, 1, format!("expected {} fields, got {}", headers.len(), rec.len())));
            }
            let mut col_pos = 1;
            let mut feat = 0;
            for (c, field) in rec.iter().enumerate() {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(line_no, col_pos, format!("bad number `{field}`")))?;
                col_pos += field.len() + 1;
                if c == label_col {
                    labels.push(v);
                    continue;
                }
                if feat < n_feat && v != 0.0 {
                    features.indices.push(feat);
                    features.values.push(v);
                }
                feat += 1;
            }
            features.indptr.push(features.indices.len());
        }
        Ok(Self { features, labels })
    }

    pub fn load_dense_csv(path: impl AsRef<Path>, opts: LoadOptions) -> Result<Self> {
        Self::parse_dense_csv(std::fs::File::open(path)?, opts)
    }

    /// Random sparse dataset with labels from a planted linear model
    /// (`n_classes` classes, labels `0..n_classes`).
    pub fn synthetic(seed: u64, n_samples: usize, n_features: usize, density: f64, n_classes: usize) -> Self {
        let mut rng = aux_rng(seed, u64::MAX / 13);
        let planted: Vec<Vec<f64>> = (0..n_classes.max(2))
            .map(|_| (0..n_features).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        let mut features = SparseRows {
            n_cols: n_features,
            indptr: vec![0],
            ..Default::default()
        };
        let mut labels = Vec::with_capacity(n_samples);
        for _ in 0..n_samples {
            let mut scores = vec![0.0; planted.len()];
            for j in 0..n_features {
                if rng.random::<f64>() < density {
                    let v: f64 = StandardNormal.sample(&mut rng);
                    features.indices.push(j);
                    features.values.push(v);
                    for (s, w) in scores.iter_mut().zip(&planted) {
                        *s += w[j] * v;
                    }
                }
            }
            features.indptr.push(features.indices.len());
            let noise: Vec<f64> = (0..scores.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
            let label = scores
                .iter()
                .zip(&noise)
                .map(|(s, e)| s + 0.5 * e)
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(i, _)| i)
                .unwrap_or(0);
            labels.push(label.min(n_classes.max(1) - 1) as f64);
        }
        Self { features, labels }
    }
}
