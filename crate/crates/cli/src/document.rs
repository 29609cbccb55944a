//! Operator documents and sequence files.
//!
//! ```json
//! {"algebra": {"blocks": [2, 1]},
//!  "map": {"kind": "matrix" | "kraus" | "stochastic", "data": ...},
//!  "metadata": {...}}
//! ```
//!
//! `matrix` data is the `N²` entries of the coordinate matrix, row-major,
//! where `N = Σ n_k²`; `kraus` data is a list of operators, each a list of
//! per-block matrices given as rows; `stochastic` data is a real `n×n` matrix
//! acting on `ℂⁿ`, and the algebra may be omitted. Complex entries are
//! `[re, im]` pairs; a bare number is read as real.

use nalgebra::DMatrix;
use posinv::algebra::CMatrix;
use posinv::exact::{parse_rational, rational_from_f64};
use posinv::{Algebra, Element, Superoperator, C64};
use serde::Deserialize;
use serde_json::Value;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    #[serde(default)]
    algebra: Option<RawAlgebra>,
    map: RawMap,
    #[serde(default)]
    metadata: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAlgebra {
    blocks: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "lowercase")]
enum RawMap {
    Matrix(Vec<Entry>),
    Kraus(Vec<Vec<Vec<Vec<Entry>>>>),
    Stochastic(Vec<Vec<f64>>),
}

#[derive(Deserialize, Clone, Copy)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> C64 {
        match self {
            Entry::Real(re) => C64::new(re, 0.0),
            Entry::Complex([re, im]) => C64::new(re, im),
        }
    }
}

/// A parsed operator together with what its form guarantees.
#[derive(Debug)]
pub struct Operator {
    pub map: Superoperator,
    pub kind: &'static str,
    /// Properties that hold by construction, e.g. CP for a Kraus form.
    pub certificates: Vec<String>,
    pub metadata: Value,
}

/// Deserializes JSON, reporting the failing field path and the line/column.
pub fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, String> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        // Syntax errors already carry line and column; the path is partial.
        if path == "." || inner.is_syntax() || inner.is_eof() {
            inner.to_string()
        } else {
            format!("at {path}: {inner}")
        }
    })
}

fn algebra(raw: Option<RawAlgebra>) -> Result<Algebra, String> {
    let raw = raw.ok_or("at algebra: missing field (required for matrix and kraus maps)")?;
    Algebra::new(&raw.blocks).map_err(|e| format!("at algebra.blocks: {e}"))
}

fn block(rows: &[Vec<Entry>], n: usize, at: &str) -> Result<CMatrix, String> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        let cols: Vec<usize> = rows.iter().map(Vec::len).collect();
        return Err(format!("at {at}: expected a {n}×{n} block, got {} rows of lengths {cols:?}", rows.len()));
    }
    Ok(CMatrix::from_fn(n, n, |r, c| rows[r][c].value()))
}

pub fn parse_operator(text: &str) -> Result<Operator, String> {
    let raw: RawDocument = from_json(text)?;
    let mut certificates = Vec::new();
    let (map, kind) = match raw.map {
        RawMap::Matrix(data) => {
            let alg = algebra(raw.algebra)?;
            let d = alg.total_dim();
            if data.len() != d * d {
                return Err(format!(
                    "at map.data: expected {} entries ({d}² for blocks {:?}), got {}",
                    d * d,
                    alg.block_dims(),
                    data.len()
                ));
            }
            let m = CMatrix::from_fn(d, d, |r, c| data[r * d + c].value());
            (Superoperator::new(alg, m).map_err(|e| format!("at map.data: {e}"))?, "matrix")
        }
        RawMap::Kraus(ops) => {
            let alg = algebra(raw.algebra)?;
            if ops.is_empty() {
                return Err("at map.data: a Kraus form needs at least one operator".into());
            }
            let mut elements = Vec::with_capacity(ops.len());
            for (i, op) in ops.iter().enumerate() {
                if op.len() != alg.num_blocks() {
                    return Err(format!("at map.data[{i}]: expected {} blocks, got {}", alg.num_blocks(), op.len()));
                }
                let blocks = op
                    .iter()
                    .zip(alg.block_dims())
                    .enumerate()
                    .map(|(k, (rows, &n))| block(rows, n, &format!("map.data[{i}][{k}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                elements.push(Element::from_blocks(blocks).map_err(|e| format!("at map.data[{i}]: {e}"))?);
            }
            certificates.push("completely_positive".to_string());
            (Superoperator::kraus(&alg, &elements).map_err(|e| format!("at map.data: {e}"))?, "kraus")
        }
        RawMap::Stochastic(rows) => {
            let n = rows.len();
            if n == 0 {
                return Err("at map.data: empty matrix".into());
            }
            if let Some(i) = rows.iter().position(|r| r.len() != n) {
                return Err(format!("at map.data[{i}]: expected {n} entries, got {}", rows[i].len()));
            }
            if let Some(raw) = raw.algebra {
                if raw.blocks != vec![1; n] {
                    return Err(format!("at algebra.blocks: a stochastic map on ℂ^{n} needs {n} blocks of size 1"));
                }
            }
            let s = DMatrix::from_fn(n, n, |r, c| rows[r][c]);
            (Superoperator::stochastic(&s).map_err(|e| format!("at map.data: {e}"))?, "stochastic")
        }
    };
    Ok(Operator { map, kind, certificates, metadata: raw.metadata })
}

/// Reads a finite sequence: a JSON array of numbers or `"p/q"` strings, or
/// plain text with entries separated by whitespace or commas.
pub fn parse_sequence(text: &str) -> Result<Vec<num_rational::BigRational>, String> {
    if text.trim_start().starts_with('[') {
        let raw: Vec<Value> = from_json(text)?;
        return raw
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let r = match v {
                    Value::String(s) => parse_rational(s).map_err(|e| e.to_string()),
                    Value::Number(n) => match n.as_i64() {
                        Some(k) => Ok(num_rational::BigRational::from_integer(k.into())),
                        None => rational_from_f64(n.as_f64().unwrap_or(f64::NAN)).map_err(|e| e.to_string()),
                    },
                    other => Err(format!("expected a number or \"p/q\" string, got {other}")),
                };
                r.map_err(|e| format!("at [{i}]: {e}"))
            })
            .collect();
    }
    let mut out = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let mut col = 0;
        for token in line.split(|c: char| c.is_whitespace() || c == ',') {
            if !token.is_empty() {
                let column = line[col..].find(token).map_or(col, |p| col + p) + 1;
                let r = parse_rational(token).map_err(|e| format!("at line {} column {column}: {e}", line_no + 1))?;
                out.push(r);
            }
            col += token.len() + 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_document() {
        let text = r#"{"algebra": {"blocks": [1, 1]}, "map": {"kind": "matrix", "data": [0, 1, [1, 0], 0]}}"#;
        let op = parse_operator(text).unwrap();
        assert_eq!(op.kind, "matrix");
        assert_eq!(op.map.matrix()[(0, 1)], C64::new(1.0, 0.0));
        assert!(op.metadata.is_null());
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_operator(r#"{"algebra": {"blocks": [2]}, "map": {"kind": "matrix", "data": [1, 2]}}"#).unwrap_err();
        assert!(err.contains("map.data") && err.contains("16"), "{err}");
        let err = parse_operator("{\"algebra\": {\"blocks\": [2]},\n \"map\": {\"kind\": \"matrix\", \"data\": [1, ").unwrap_err();
        assert!(err.contains("line 2"), "{err}");
        let err = parse_operator(r#"{"map": {"kind": "kraus", "data": [[[[1]]]]}}"#).unwrap_err();
        assert!(err.contains("algebra"), "{err}");
        let err = parse_operator(r#"{"algebra": {"blocks": [2]}, "map": {"kind": "kraus", "data": [[[[1, 0]]]]}}"#).unwrap_err();
        assert!(err.contains("map.data[0][0]"), "{err}");
        let err = parse_operator(r#"{"map": {"kind": "wavelet", "data": []}}"#).unwrap_err();
        assert!(err.contains("map"), "{err}");
    }

    #[test]
    fn sequences() {
        let x = parse_sequence("1/2 0.25, 3\n# comment\n1/8").unwrap();
        assert_eq!(x.len(), 4);
        assert_eq!(x[1], posinv::exact::rational(1, 4));
        assert_eq!(parse_sequence(r#"[1, "1/3", 0.5]"#).unwrap()[1], posinv::exact::rational(1, 3));
        let err = parse_sequence("1 2\n3 x4").unwrap_err();
        assert!(err.contains("line 2 column 3"), "{err}");
        assert!(parse_sequence(r#"[1, true]"#).unwrap_err().contains("[1]"));
    }
}
