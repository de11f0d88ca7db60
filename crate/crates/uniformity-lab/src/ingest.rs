//! Dataset loading, deterministic text embedding, and vector-file round trips.
//!
//! Input records arrive either as JSONL (one object per line with an `id`,
//! optional `instruction`/`input`/`output` text fields, and an optional
//! `vector`) or as a vector CSV previously written by [`write_vectors`].
//! Records that carry only text are embedded by a deterministic fallback:
//! each token is mapped to a hash-seeded unit-variance pseudo-random vector
//! and the record embedding is the token mean. This stands in for a trained
//! word-embedding model while keeping every run bit-reproducible; selection
//! downstream is embedding-agnostic.
//!
//! Vector files are CSV with header `id,dim=<d>` followed by one row per
//! record whose components are C99-style hex floats (`0x1.999999999999ap-4`),
//! so a write/read round trip is bit-exact.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance used when comparing embedded points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// ‖x − y‖₂.
    Euclidean,
    /// 1 − ⟨x, y⟩ / (‖x‖‖y‖). Zero vectors are rejected by the operations
    /// that accept this metric; the raw formula here assumes nonzero inputs.
    Cosine,
}

impl Metric {
    /// Reference distance computation (no caching of norms).
    #[must_use]
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => crate::linalg::euclidean_dist(a, b),
            Metric::Cosine => {
                let na = crate::linalg::norm(a);
                let nb = crate::linalg::norm(b);
                1.0 - crate::linalg::dot(a, b) / (na * nb)
            }
        }
    }
}

/// One input record: a unique id plus text and/or a precomputed vector.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    pub id: String,
    pub text: Option<String>,
    pub vector: Option<Vec<f64>>,
}

/// One embedded point.
#[derive(Debug, Clone, PartialEq)]
pub struct DataPoint {
    pub id: String,
    pub vector: Vec<f64>,
}

/// The selection universe X = (x_1, …, x_N): an ordered list of embedded
/// points sharing one dimension, with no duplicate ids and finite components.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedDataset {
    dim: usize,
    points: Vec<DataPoint>,
    metric_hint: Metric,
}

impl EmbeddedDataset {
    /// Validates and assembles a dataset. Rejects `dim == 0`, vectors whose
    /// length disagrees with `dim`, non-finite components, and duplicate ids.
    pub fn new(dim: usize, points: Vec<DataPoint>, metric_hint: Metric) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        let mut seen = HashSet::new();
        for p in &points {
            if p.vector.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.vector.len() });
            }
            if p.vector.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { id: p.id.clone() });
            }
            if !seen.insert(p.id.clone()) {
                return Err(Error::DuplicateId { id: p.id.clone() });
            }
        }
        Ok(Self { dim, points, metric_hint })
    }

    #[must_use]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of points N.
    #[must_use]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[must_use]
    pub fn metric_hint(&self) -> Metric {
        self.metric_hint
    }

    /// Replaces the metric hint (e.g. from a CLI flag).
    #[must_use]
    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric_hint = metric;
        self
    }

    #[must_use]
    pub fn point(&self, i: usize) -> &DataPoint {
        &self.points[i]
    }

    #[must_use]
    pub fn points(&self) -> &[DataPoint] {
        &self.points
    }

    /// Vector of point `i`.
    #[must_use]
    pub fn vector(&self, i: usize) -> &[f64] {
        &self.points[i].vector
    }
}

/// Pairwise-distance helper caching per-point norms for the cosine metric.
///
/// Construction rejects zero vectors under cosine (no direction), naming the
/// offending id, so downstream distance evaluations are total.
pub(crate) struct DistanceCtx<'a> {
    ds: &'a EmbeddedDataset,
    metric: Metric,
    norms: Vec<f64>,
}

impl<'a> DistanceCtx<'a> {
    pub fn new(ds: &'a EmbeddedDataset, metric: Metric) -> Result<Self> {
        let norms = match metric {
            Metric::Euclidean => Vec::new(),
            Metric::Cosine => {
                let mut norms = Vec::with_capacity(ds.len());
                for p in ds.points() {
                    let n = crate::linalg::norm(&p.vector);
                    if n == 0.0 {
                        return Err(Error::Record {
                            id: p.id.clone(),
                            msg: "zero vector has no cosine direction".into(),
                        });
                    }
                    norms.push(n);
                }
                norms
            }
        };
        Ok(Self { ds, metric, norms })
    }

    /// Number of points in the underlying dataset.
    pub fn dataset_len(&self) -> usize {
        self.ds.len()
    }

    /// Distance between points `i` and `j` of the dataset.
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match self.metric {
            Metric::Euclidean => {
                crate::linalg::euclidean_dist(self.ds.vector(i), self.ds.vector(j))
            }
            Metric::Cosine => {
                1.0 - crate::linalg::dot(self.ds.vector(i), self.ds.vector(j))
                    / (self.norms[i] * self.norms[j])
            }
        }
    }
}

#[derive(Deserialize)]
struct JsonlLine {
    id: String,
    instruction: Option<String>,
    input: Option<String>,
    output: Option<String>,
    vector: Option<Vec<f64>>,
}

/// Loads a JSONL file into raw records, preserving file order.
///
/// Each line must parse and carry at least one of text
/// (`instruction`/`input`/`output`, concatenated with single spaces) or
/// `vector`; all vectors in one file must share a dimension, and ids must be
/// unique. Unknown keys are ignored.
pub fn load_jsonl(path: impl AsRef<Path>) -> Result<Vec<RawRecord>> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    let mut dim: Option<usize> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let parsed: JsonlLine = serde_json::from_str(&line)
            .map_err(|e| Error::Parse { line: line_no, msg: e.to_string() })?;
        let parts: Vec<&str> = [&parsed.instruction, &parsed.input, &parsed.output]
            .into_iter()
            .flatten()
            .map(String::as_str)
            .collect();
        let text = if parts.is_empty() { None } else { Some(parts.join(" ")) };
        if text.is_none() && parsed.vector.is_none() {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("record `{}` has neither text nor vector", parsed.id),
            });
        }
        if let Some(v) = &parsed.vector {
            match dim {
                None => dim = Some(v.len()),
                Some(d) if d != v.len() => {
                    return Err(Error::DimensionMismatch { expected: d, got: v.len() })
                }
                Some(_) => {}
            }
        }
        if !seen.insert(parsed.id.clone()) {
            return Err(Error::DuplicateId { id: parsed.id });
        }
        records.push(RawRecord { id: parsed.id, text, vector: parsed.vector });
    }
    Ok(records)
}

/// FNV-1a 64-bit hash; pinned here so token seeds never move between builds.
#[must_use]
fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Deterministic unit-variance token vector: the token's FNV-1a hash, mixed
/// with the dataset seed, seeds a ChaCha8 stream of standard normals.
fn token_vector(token: &str, dim: usize, seed: u64) -> Vec<f64> {
    let mixed = fnv1a64(token.as_bytes()) ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    let mut rng = ChaCha8Rng::seed_from_u64(mixed);
    (0..dim).map(|_| rand_distr::StandardNormal.sample(&mut rng)).collect()
}

/// Embeds records: precomputed vectors pass through bitwise unchanged;
/// text records get the mean of their per-token vectors.
///
/// Tokenization is lowercasing followed by a Unicode-whitespace split. The
/// result is a pure function of `(records, dim, seed)`. The metric hint is
/// set to cosine, the usual choice for averaged text embeddings; callers can
/// override it with [`EmbeddedDataset::with_metric`].
pub fn embed_average(records: &[RawRecord], dim: usize, seed: u64) -> Result<EmbeddedDataset> {
    if dim == 0 {
        return Err(Error::InvalidInput("embedding dimension must be at least 1".into()));
    }
    let mut points = Vec::with_capacity(records.len());
    for rec in records {
        let vector = if let Some(v) = &rec.vector {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
            }
            v.clone()
        } else {
            let text = rec.text.as_deref().unwrap_or_default();
            let lowered = text.to_lowercase();
            let tokens: Vec<&str> = lowered.split_whitespace().collect();
            if tokens.is_empty() {
                return Err(Error::Record {
                    id: rec.id.clone(),
                    msg: "empty token list after whitespace tokenization".into(),
                });
            }
            let mut mean = vec![0.0; dim];
            for tok in &tokens {
                let tv = token_vector(tok, dim, seed);
                for (m, t) in mean.iter_mut().zip(&tv) {
                    *m += t;
                }
            }
            let inv = 1.0 / tokens.len() as f64;
            mean.iter_mut().for_each(|m| *m *= inv);
            mean
        };
        points.push(DataPoint { id: rec.id.clone(), vector });
    }
    EmbeddedDataset::new(dim, points, Metric::Cosine)
}

/// Encodes a finite f64 as a canonical C99-style hex float
/// (`0x1.<13 hex digits>p<exp>`, subnormals as `0x0.<13 hex digits>p-1022`,
/// zero as `0x0p+0`), preserving the sign bit.
#[must_use]
pub fn f64_to_hex(x: f64) -> String {
    assert!(x.is_finite(), "hex encoding is defined for finite values only");
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let biased = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & 0x000f_ffff_ffff_ffff;
    if biased == 0 {
        if frac == 0 {
            return format!("{sign}0x0p+0");
        }
        return format!("{sign}0x0.{frac:013x}p-1022");
    }
    format!("{}0x1.{:013x}p{:+}", sign, frac, biased - 1023)
}

/// Inverse of [`f64_to_hex`]; accepts exactly the canonical form.
pub fn hex_to_f64(s: &str) -> Result<f64> {
    let err = || Error::InvalidInput(format!("malformed hex float `{s}`"));
    let (neg, rest) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s),
    };
    let rest = rest.strip_prefix("0x").ok_or_else(err)?;
    let bits = if rest == "0p+0" {
        0u64
    } else {
        let (lead, rest) = rest.split_at(1);
        let rest = rest.strip_prefix('.').ok_or_else(err)?;
        let (frac_s, exp_s) = rest.split_once('p').ok_or_else(err)?;
        if frac_s.len() != 13 {
            return Err(err());
        }
        let frac = u64::from_str_radix(frac_s, 16).map_err(|_| err())?;
        let exp: i64 = exp_s.parse().map_err(|_| err())?;
        match lead {
            "1" => {
                let biased = exp + 1023;
                if !(1..=2046).contains(&biased) {
                    return Err(err());
                }
                ((biased as u64) << 52) | frac
            }
            "0" => {
                if exp != -1022 || frac == 0 {
                    return Err(err());
                }
                frac
            }
            _ => return Err(err()),
        }
    };
    let bits = if neg { bits | (1 << 63) } else { bits };
    Ok(f64::from_bits(bits))
}

/// Writes a dataset as `id,dim=<d>` header plus one hex-float row per point.
/// The round trip through [`read_vectors`] is lossless on ids, order, and
/// bits.
pub fn write_vectors(ds: &EmbeddedDataset, writer: impl Write) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(writer);
    w.write_record(["id", &format!("dim={}", ds.dim())])?;
    for p in ds.points() {
        let mut rec = Vec::with_capacity(1 + ds.dim());
        rec.push(p.id.clone());
        rec.extend(p.vector.iter().map(|&c| f64_to_hex(c)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Convenience wrapper writing to a file path.
pub fn write_vectors_path(ds: &EmbeddedDataset, path: impl AsRef<Path>) -> Result<()> {
    write_vectors(ds, std::fs::File::create(path)?)
}

/// Reads a vector CSV produced by [`write_vectors`]. The metric hint of the
/// returned dataset is euclidean; callers may override it.
pub fn read_vectors(reader: impl Read) -> Result<EmbeddedDataset> {
    let mut r = csv::ReaderBuilder::new().flexible(true).has_headers(false).from_reader(reader);
    let mut rows = r.records();
    let header = rows
        .next()
        .ok_or_else(|| Error::InvalidInput("empty vector file".into()))??;
    if header.len() != 2 || header.get(0) != Some("id") {
        return Err(Error::InvalidInput("vector file must start with `id,dim=<d>`".into()));
    }
    let dim: usize = header
        .get(1)
        .and_then(|f| f.strip_prefix("dim="))
        .and_then(|d| d.parse().ok())
        .ok_or_else(|| Error::InvalidInput("vector file must start with `id,dim=<d>`".into()))?;
    let mut points = Vec::new();
    for rec in rows {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != dim + 1 {
            return Err(Error::DimensionMismatch { expected: dim, got: rec.len() - 1 });
        }
        let id = rec.get(0).expect("length checked").to_string();
        let mut vector = Vec::with_capacity(dim);
        for field in rec.iter().skip(1) {
            vector.push(
                hex_to_f64(field).map_err(|e| Error::Parse { line, msg: e.to_string() })?,
            );
        }
        points.push(DataPoint { id, vector });
    }
    EmbeddedDataset::new(dim, points, Metric::Euclidean)
}

/// Convenience wrapper reading from a file path.
pub fn read_vectors_path(path: impl AsRef<Path>) -> Result<EmbeddedDataset> {
    read_vectors(std::fs::File::open(path)?)
}
