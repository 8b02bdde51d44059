//! Plain-text model files.
//!
//! A model file is a JSON document:
//!
//! ```json
//! {
//!   "N": 2,
//!   "R": 1,
//!   "hoppings": [
//!     { "offset": 1, "matrix": [[[0, 0], [0, 0]], [[1, 0], [0, 0]]] }
//!   ],
//!   "symmetries": {
//!     "S": { "matrix": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]], "antiunitary": false }
//!   }
//! }
//! ```
//!
//! Matrices are lists of rows and every entry is an `[re, im]` pair. Offsets
//! whose partner `−j` is missing get `A_{−j} = A_j†`. Symmetry entries `T`, `C`
//! and `S` are optional; their energy and momentum signs follow from the label.

use std::fmt;
use std::path::Path;

use serde::de::{self, DeserializeSeed, SeqAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use crate::model::HoppingModel;
use crate::symmetry::{SymmetryLabel, SymmetryOperator, SymmetrySet};
use crate::{CMatrix, Error, Result, C64};

/// Row-major `[re, im]` entries of a complex matrix.
pub fn matrix_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

/// Square matrix parsed from `[re, im]` rows; rejects ragged or non-square input.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixRows(pub CMatrix);

impl Serialize for MatrixRows {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_rows(&self.0).serialize(s)
    }
}

/// One matrix row; rows after the first must match its length, so that a
/// ragged row is reported at its own position in the document.
struct RowSeed {
    index: usize,
    expected: Option<usize>,
}

impl<'de> DeserializeSeed<'de> for RowSeed {
    type Value = Vec<[f64; 2]>;

    fn deserialize<D: Deserializer<'de>>(self, d: D) -> std::result::Result<Self::Value, D::Error> {
        d.deserialize_seq(self)
    }
}

impl<'de> Visitor<'de> for RowSeed {
    type Value = Vec<[f64; 2]>;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a matrix row of [re, im] pairs")
    }

    fn visit_seq<A: SeqAccess<'de>>(
        self,
        mut seq: A,
    ) -> std::result::Result<Self::Value, A::Error> {
        let mut row = Vec::new();
        while let Some(entry) = seq.next_element::<[f64; 2]>()? {
            row.push(entry);
            if let Some(n) = self.expected {
                if row.len() > n {
                    return Err(de::Error::custom(format!(
                        "matrix row {} has more than {n} entries",
                        self.index
                    )));
                }
            }
        }
        match self.expected {
            Some(n) if row.len() != n => Err(de::Error::custom(format!(
                "matrix row {} has {} entries, expected {n}",
                self.index,
                row.len()
            ))),
            _ => Ok(row),
        }
    }
}

impl<'de> Deserialize<'de> for MatrixRows {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct RowsVisitor;

        impl<'de> Visitor<'de> for RowsVisitor {
            type Value = MatrixRows;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a square matrix given as a list of rows of [re, im] pairs")
            }

            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<MatrixRows, A::Error> {
                let mut rows: Vec<Vec<[f64; 2]>> = Vec::new();
                loop {
                    let seed = RowSeed {
                        index: rows.len(),
                        expected: rows.first().map(Vec::len),
                    };
                    match seq.next_element_seed(seed)? {
                        Some(row) => rows.push(row),
                        None => break,
                    }
                }
                let n = rows.len();
                if n == 0 {
                    return Err(de::Error::custom("matrix has no rows"));
                }
                if rows[0].len() != n {
                    return Err(de::Error::custom(format!(
                        "matrix is {n}x{}, expected a square matrix",
                        rows[0].len()
                    )));
                }
                Ok(MatrixRows(CMatrix::from_fn(n, n, |i, j| {
                    C64::new(rows[i][j][0], rows[i][j][1])
                })))
            }
        }

        d.deserialize_seq(RowsVisitor)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoppingEntry {
    pub offset: i64,
    pub matrix: MatrixRows,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorEntry {
    pub matrix: MatrixRows,
    pub antiunitary: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetryBlock {
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub t: Option<OperatorEntry>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<OperatorEntry>,
    #[serde(rename = "S", default, skip_serializing_if = "Option::is_none")]
    pub s: Option<OperatorEntry>,
}

impl SymmetryBlock {
    fn is_empty(&self) -> bool {
        self.t.is_none() && self.c.is_none() && self.s.is_none()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "R")]
    pub r: usize,
    pub hoppings: Vec<HoppingEntry>,
    #[serde(default, skip_serializing_if = "SymmetryBlock::is_empty")]
    pub symmetries: SymmetryBlock,
}

impl ModelDocument {
    pub fn from_model(model: &HoppingModel, set: &SymmetrySet) -> Self {
        let entry = |op: &SymmetryOperator| OperatorEntry {
            matrix: MatrixRows(op.matrix().clone()),
            antiunitary: op.antiunitary(),
        };
        let declared = |label| set.declared().contains(&label);
        Self {
            n: model.dim(),
            r: model.range(),
            hoppings: model
                .hoppings()
                .iter()
                .map(|(&offset, a)| HoppingEntry {
                    offset,
                    matrix: MatrixRows(a.clone()),
                })
                .collect(),
            symmetries: SymmetryBlock {
                t: set.t().filter(|_| declared(SymmetryLabel::T)).map(entry),
                c: set.c().filter(|_| declared(SymmetryLabel::C)).map(entry),
                s: set.s().filter(|_| declared(SymmetryLabel::S)).map(entry),
            },
        }
    }

    pub fn into_model(self) -> Result<(HoppingModel, SymmetrySet)> {
        for h in &self.hoppings {
            if h.matrix.0.nrows() != self.n {
                return Err(Error::Parse(format!(
                    "hopping at offset {} is {}x{}, expected N = {}",
                    h.offset,
                    h.matrix.0.nrows(),
                    h.matrix.0.nrows(),
                    self.n
                )));
            }
        }
        let model = HoppingModel::new(
            self.n,
            self.r,
            self.hoppings.into_iter().map(|h| (h.offset, h.matrix.0)),
        )?;
        let op = |entry: Option<OperatorEntry>,
                  label: SymmetryLabel|
         -> Result<Option<SymmetryOperator>> {
            entry
                .map(|e| {
                    let sign = if label == SymmetryLabel::T {
                        crate::symmetry::Sign::Plus
                    } else {
                        crate::symmetry::Sign::Minus
                    };
                    SymmetryOperator::new(label, e.matrix.0, e.antiunitary, sign)
                })
                .transpose()
        };
        let set = SymmetrySet::new(
            op(self.symmetries.t, SymmetryLabel::T)?,
            op(self.symmetries.c, SymmetryLabel::C)?,
            op(self.symmetries.s, SymmetryLabel::S)?,
        )?;
        if let Some(d) = set.dim() {
            if d != model.dim() {
                return Err(Error::DimensionMismatch {
                    expected: model.dim(),
                    found: d,
                });
            }
        }
        Ok((model, set))
    }
}

/// Parses a model file. Syntax errors carry line and column.
pub fn parse_model(text: &str) -> Result<(HoppingModel, SymmetrySet)> {
    let doc: ModelDocument = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    doc.into_model()
}

pub fn load_model(path: impl AsRef<Path>) -> Result<(HoppingModel, SymmetrySet)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_model(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Serialises a model with one matrix row per line. Entries use the shortest
/// representation that parses back to the same `f64`.
pub fn model_to_string(model: &HoppingModel, set: &SymmetrySet) -> String {
    let doc = ModelDocument::from_model(model, set);
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!(
        "  \"N\": {},\n  \"R\": {},\n  \"hoppings\": [\n",
        doc.n, doc.r
    ));
    let count = doc.hoppings.len();
    for (i, h) in doc.hoppings.iter().enumerate() {
        out.push_str(&format!(
            "    {{\n      \"offset\": {},\n      \"matrix\": ",
            h.offset
        ));
        write_matrix(&mut out, &h.matrix.0, 6);
        out.push_str("\n    }");
        out.push_str(if i + 1 < count { ",\n" } else { "\n" });
    }
    out.push_str("  ]");
    let ops: Vec<(&str, &OperatorEntry)> = [
        ("T", &doc.symmetries.t),
        ("C", &doc.symmetries.c),
        ("S", &doc.symmetries.s),
    ]
    .into_iter()
    .filter_map(|(name, e)| e.as_ref().map(|e| (name, e)))
    .collect();
    if !ops.is_empty() {
        out.push_str(",\n  \"symmetries\": {\n");
        for (i, (name, e)) in ops.iter().enumerate() {
            out.push_str(&format!(
                "    \"{name}\": {{\n      \"antiunitary\": {},\n      \"matrix\": ",
                e.antiunitary
            ));
            write_matrix(&mut out, &e.matrix.0, 6);
            out.push_str("\n    }");
            out.push_str(if i + 1 < ops.len() { ",\n" } else { "\n" });
        }
        out.push_str("  }");
    }
    out.push_str("\n}\n");
    out
}

fn write_matrix(out: &mut String, m: &CMatrix, indent: usize) {
    let pad = " ".repeat(indent + 2);
    out.push_str("[\n");
    let rows = matrix_rows(m);
    for (i, row) in rows.iter().enumerate() {
        out.push_str(&pad);
        out.push_str(&serde_json::to_string(row).expect("finite entries serialise"));
        out.push_str(if i + 1 < rows.len() { ",\n" } else { "\n" });
    }
    out.push_str(&" ".repeat(indent));
    out.push(']');
}

pub fn save_model(path: impl AsRef<Path>, model: &HoppingModel, set: &SymmetrySet) -> Result<()> {
    std::fs::write(path, model_to_string(model, set))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{kitaev_chain, representative};
    use crate::AzcClass;

    #[test]
    fn kitaev_round_trip_is_exact() {
        let (m, set) = kitaev_chain(&"0:0.3,1:1,2:-0.1".parse().unwrap()).unwrap();
        let text = model_to_string(&m, &set);
        let (back, set2) = parse_model(&text).unwrap();
        assert_eq!(back.hoppings(), m.hoppings());
        assert_eq!(set2.classify().unwrap(), AzcClass::BDI);
        assert_eq!(model_to_string(&back, &set2), text);
    }

    #[test]
    fn awkward_floats_survive() {
        for class in AzcClass::ALL {
            let (m, set) = representative(class).unwrap();
            let (back, _) = parse_model(&model_to_string(&m, &set)).unwrap();
            for (j, a) in m.hoppings() {
                let b = back.hopping(*j).unwrap();
                for (x, y) in a.iter().zip(b.iter()) {
                    assert_eq!(x.re.to_bits(), y.re.to_bits());
                    assert_eq!(x.im.to_bits(), y.im.to_bits());
                }
            }
        }
    }

    #[test]
    fn partner_is_filled_in() {
        let text = r#"{"N": 1, "R": 1, "hoppings": [
            {"offset": 0, "matrix": [[[0.5, 0]]]},
            {"offset": 1, "matrix": [[[0, 2]]]}
        ]}"#;
        let (m, set) = parse_model(text).unwrap();
        assert_eq!(m.hopping(-1).unwrap()[(0, 0)], C64::new(0.0, -2.0));
        assert!(set.operators().is_empty());
    }

    #[test]
    fn ragged_row_reports_line() {
        let text = "{\n  \"N\": 2,\n  \"R\": 0,\n  \"hoppings\": [\n    {\"offset\": 0, \"matrix\": [\n      [[1, 0], [0, 0]],\n      [[0, 0]]\n    ]}\n  ]\n}";
        let err = parse_model(text).unwrap_err().to_string();
        assert!(err.contains("line 7"), "{err}");
        assert!(err.contains("row 1"), "{err}");
    }

    #[test]
    fn malformed_entry_reports_line() {
        let text = "{\"N\": 1, \"R\": 0,\n\"hoppings\": [{\"offset\": 0,\n\"matrix\": [[[1]]]}]}";
        let err = parse_model(text).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn unknown_field_rejected() {
        let text = r#"{"N": 1, "R": 0, "hoppings": [], "mu": 0}"#;
        assert!(matches!(parse_model(text), Err(Error::Parse(_))));
    }

    #[test]
    fn offset_beyond_range_rejected() {
        let text = r#"{"N": 1, "R": 0, "hoppings": [{"offset": 1, "matrix": [[[1, 0]]]}]}"#;
        assert!(matches!(parse_model(text), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn inconsistent_partner_rejected() {
        let text = r#"{"N": 1, "R": 1, "hoppings": [
            {"offset": 1, "matrix": [[[1, 0]]]},
            {"offset": -1, "matrix": [[[2, 0]]]}
        ]}"#;
        assert!(parse_model(text).is_err());
    }

    #[test]
    fn wrong_conjugation_flag_rejected() {
        let text = r#"{"N": 1, "R": 0, "hoppings": [{"offset": 0, "matrix": [[[1, 0]]]}],
            "symmetries": {"T": {"matrix": [[[1, 0]]], "antiunitary": false}}}"#;
        assert!(matches!(
            parse_model(text),
            Err(Error::InvalidSymmetry { .. })
        ));
    }
}
