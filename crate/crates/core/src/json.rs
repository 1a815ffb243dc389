//! Parsing and serialization of the pmf JSON document:
//!
//! ```json
//! {"variables":[{"name":"S","symbols":["0","1"]}],
//!  "mass":[{"index":["0"],"p":"7/20"}]}
//! ```
//!
//! Omitted cells are zero. Mass values may be JSON numbers, decimal strings,
//! or exact rational strings like "7/20"; they are converted to binary
//! floating point once at parse time.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::probability::{encode_index, Alphabet, DistortionMeasure, JointPmf};

#[derive(Deserialize)]
struct PmfDoc {
    variables: Vec<VarDoc>,
    mass: Vec<CellDoc>,
}

#[derive(Deserialize)]
struct VarDoc {
    name: String,
    symbols: Vec<String>,
}

#[derive(Deserialize)]
struct CellDoc {
    index: Vec<String>,
    p: serde_json::Value,
}

/// Parses a mass value: a non-negative decimal string, an "a/b" rational
/// string over non-negative integers, or a JSON number.
pub fn parse_mass_value(v: &serde_json::Value) -> Result<f64> {
    match v {
        serde_json::Value::Number(n) => {
            let x = n
                .as_f64()
                .ok_or_else(|| Error::Parse(format!("mass `{n}` is not representable")))?;
            check_mass(x)
        }
        serde_json::Value::String(s) => parse_mass_str(s),
        other => Err(Error::Parse(format!("mass must be a number or string, got {other}"))),
    }
}

pub fn parse_mass_str(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: u64 = num
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad rational numerator in `{s}`")))?;
        let den: u64 = den
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad rational denominator in `{s}`")))?;
        if den == 0 {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        return check_mass(num as f64 / den as f64);
    }
    let x: f64 = s
        .parse()
        .map_err(|_| Error::Parse(format!("bad mass value `{s}`")))?;
    check_mass(x)
}

fn check_mass(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Parse(format!("mass {x} is not a probability")));
    }
    Ok(x)
}

/// Upper bound on dense tensor cells accepted from a document; a small
/// document can otherwise declare alphabets whose product exhausts memory.
pub const MAX_DOCUMENT_CELLS: usize = 1 << 22;

/// Parses a pmf document from JSON text.
pub fn parse_pmf_json(text: &str) -> Result<JointPmf> {
    let doc: PmfDoc =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if doc.variables.is_empty() {
        return Err(Error::Parse("document declares no variables".into()));
    }
    let mut variables = Vec::with_capacity(doc.variables.len());
    for v in &doc.variables {
        variables.push(
            Alphabet::new(v.name.clone(), v.symbols.clone())
                .map_err(|e| Error::Parse(e.to_string()))?,
        );
    }
    let dims: Vec<usize> = variables.iter().map(|a| a.len()).collect();
    let n: usize = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .filter(|&n| n <= MAX_DOCUMENT_CELLS)
        .ok_or_else(|| {
            Error::Parse(format!("joint alphabet exceeds {MAX_DOCUMENT_CELLS} cells"))
        })?;
    let mut mass = vec![0.0; n];
    let mut seen = vec![false; n];
    for cell in &doc.mass {
        if cell.index.len() != variables.len() {
            return Err(Error::Parse(format!(
                "index {:?} has {} entries, expected {}",
                cell.index,
                cell.index.len(),
                variables.len()
            )));
        }
        let mut idx = Vec::with_capacity(variables.len());
        for (sym, alpha) in cell.index.iter().zip(&variables) {
            let i = alpha.index_of(sym).ok_or_else(|| {
                Error::Parse(format!(
                    "symbol `{sym}` is not in alphabet `{}`",
                    alpha.name()
                ))
            })?;
            idx.push(i);
        }
        let off = encode_index(&idx, &dims);
        if seen[off] {
            return Err(Error::Parse(format!("duplicate cell {:?}", cell.index)));
        }
        seen[off] = true;
        mass[off] = parse_mass_value(&cell.p)?;
    }
    JointPmf::new(variables, mass).map_err(|e| Error::Parse(e.to_string()))
}

#[derive(Deserialize)]
struct DistortionDoc {
    recon: Vec<String>,
    dbar: f64,
    /// one row per source symbol, one column per reconstruction symbol
    values: Vec<Vec<f64>>,
}

/// Parses a distortion-measure document
/// `{"recon":["0","1"],"dbar":1.0,"values":[[0,1],[1,0]]}` against a source
/// alphabet; rows follow the source symbol order.
pub fn parse_distortion_json(text: &str, source: &Alphabet) -> Result<DistortionMeasure> {
    let doc: DistortionDoc =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let recon = Alphabet::new(format!("{}hat", source.name()), doc.recon)
        .map_err(|e| Error::Parse(e.to_string()))?;
    if doc.values.len() != source.len() {
        return Err(Error::Parse(format!(
            "distortion has {} rows, expected {}",
            doc.values.len(),
            source.len()
        )));
    }
    let mut values = Vec::with_capacity(source.len() * recon.len());
    for row in &doc.values {
        if row.len() != recon.len() {
            return Err(Error::Parse(format!(
                "distortion row has {} entries, expected {}",
                row.len(),
                recon.len()
            )));
        }
        values.extend_from_slice(row);
    }
    DistortionMeasure::new(source.clone(), recon, values, doc.dbar)
        .map_err(|e| Error::Parse(e.to_string()))
}

/// Serializes a pmf to the document format, listing positive cells only.
pub fn pmf_to_json(p: &JointPmf) -> serde_json::Value {
    let variables: Vec<serde_json::Value> = p
        .variables()
        .iter()
        .map(|a| {
            serde_json::json!({
                "name": a.name(),
                "symbols": a.symbols(),
            })
        })
        .collect();
    let dims = p.dims().to_vec();
    let mut cells = Vec::new();
    let mut idx = vec![0usize; dims.len()];
    for (off, &m) in p.mass().iter().enumerate() {
        if m <= 0.0 {
            continue;
        }
        crate::probability::decode_index(off, &dims, &mut idx);
        let labels: Vec<&str> = idx
            .iter()
            .enumerate()
            .map(|(ax, &i)| p.variables()[ax].symbols()[i].as_str())
            .collect();
        cells.push(serde_json::json!({ "index": labels, "p": m }));
    }
    serde_json::json!({ "variables": variables, "mass": cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals_decimals_and_numbers() {
        let text = r#"{
            "variables":[{"name":"S","symbols":["0","1"]},{"name":"U","symbols":["0","1"]}],
            "mass":[
                {"index":["0","0"],"p":"7/20"},
                {"index":["0","1"],"p":"0.15"},
                {"index":["1","0"],"p":0.1},
                {"index":["1","1"],"p":"2/5"}
            ]
        }"#;
        let p = parse_pmf_json(text).unwrap();
        assert!((p.prob(&[0, 0]) - 0.35).abs() < 1e-15);
        assert!((p.prob(&[0, 1]) - 0.15).abs() < 1e-15);
        assert!((p.prob(&[1, 1]) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn omitted_cells_are_zero() {
        let text = r#"{
            "variables":[{"name":"X","symbols":["a","b"]}],
            "mass":[{"index":["a"],"p":1}]
        }"#;
        let p = parse_pmf_json(text).unwrap();
        assert_eq!(p.prob(&[1]), 0.0);
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(parse_pmf_json("not json").is_err());
        assert!(parse_pmf_json(r#"{"variables":[],"mass":[]}"#).is_err());
        // duplicate cell
        let dup = r#"{
            "variables":[{"name":"X","symbols":["a","b"]}],
            "mass":[{"index":["a"],"p":0.5},{"index":["a"],"p":0.5}]
        }"#;
        assert!(parse_pmf_json(dup).is_err());
        // unknown symbol
        let unk = r#"{
            "variables":[{"name":"X","symbols":["a","b"]}],
            "mass":[{"index":["c"],"p":1}]
        }"#;
        assert!(parse_pmf_json(unk).is_err());
        // mass does not sum to 1
        let bad_sum = r#"{
            "variables":[{"name":"X","symbols":["a","b"]}],
            "mass":[{"index":["a"],"p":0.5}]
        }"#;
        assert!(parse_pmf_json(bad_sum).is_err());
        // zero denominator
        assert!(parse_mass_str("1/0").is_err());
        // negative
        assert!(parse_mass_str("-0.5").is_err());
    }

    #[test]
    fn parses_distortion_documents() {
        let s = Alphabet::binary("S");
        let d = parse_distortion_json(
            r#"{"recon":["0","1"],"dbar":3.0,"values":[[0.0,1.0],[3.0,0.0]]}"#,
            &s,
        )
        .unwrap();
        assert_eq!(d.recon().len(), 2);
        assert_eq!(d.d(1, 0), 3.0);
        assert_eq!(d.dbar(), 3.0);
        // wrong row count
        assert!(parse_distortion_json(
            r#"{"recon":["0"],"dbar":1.0,"values":[[0.0]]}"#,
            &s
        )
        .is_err());
        // value above dbar
        assert!(parse_distortion_json(
            r#"{"recon":["0","1"],"dbar":1.0,"values":[[0.0,2.0],[1.0,0.0]]}"#,
            &s
        )
        .is_err());
    }

    #[test]
    fn round_trip() {
        let text = r#"{
            "variables":[{"name":"X","symbols":["a","b"]},{"name":"Y","symbols":["0","1"]}],
            "mass":[
                {"index":["a","0"],"p":"1/4"},
                {"index":["b","1"],"p":"3/4"}
            ]
        }"#;
        let p = parse_pmf_json(text).unwrap();
        let doc = pmf_to_json(&p).to_string();
        let q = parse_pmf_json(&doc).unwrap();
        assert_eq!(p, q);
    }
}
