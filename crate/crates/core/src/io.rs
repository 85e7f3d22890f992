//! Delimited-text formats for matrices, CSMFs, constraints and truth files.
//!
//! Readers autodetect comma or tab separation from the first non-blank line.
//! Numbers are written with Rust's shortest round-trip formatting, so a
//! numeric matrix survives a load/save cycle bit for bit.

use std::io::{Read, Write};

use crate::data::{CondProbMatrix, Csmf, Indicator, SymptomMatrix};
use crate::error::{Error, Result};
use crate::grade::{decode_letter, LetterGrade};
use crate::validate::{Constraint, ConstraintSet};

/// How cells of a conditional-probability file are written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellMode {
    Letters,
    Numeric,
}

impl std::str::FromStr for CellMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "letters" | "letter" => Ok(CellMode::Letters),
            "numeric" | "number" => Ok(CellMode::Numeric),
            other => Err(Error::Invalid(format!("unknown cell mode `{other}`"))),
        }
    }
}

struct Table {
    rows: Vec<(usize, Vec<String>)>,
}

fn read_table<R: Read>(mut source: R) -> Result<Table> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    let first = text.lines().find(|l| !l.trim().is_empty());
    let Some(first) = first else {
        return Err(Error::parse(1, 1, "empty input"));
    };
    let delimiter = if first.contains('\t') { b'\t' } else { b',' };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(line, 1, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        rows.push((line, record.iter().map(str::to_string).collect()));
    }
    Ok(Table { rows })
}

/// A body row with its 1-based line number.
type Row = (usize, Vec<String>);

impl Table {
    /// Splits into header names (skipping the corner cell) and body rows,
    /// checking every body row has one label plus `width` cells.
    fn split_header(self) -> Result<(Vec<String>, Vec<Row>)> {
        let mut iter = self.rows.into_iter();
        let (_, header) = iter
            .next()
            .ok_or_else(|| Error::parse(1, 1, "empty input"))?;
        let names: Vec<String> = header.into_iter().skip(1).collect();
        if names.is_empty() {
            return Err(Error::parse(1, 2, "header has no columns"));
        }
        let body: Vec<_> = iter.collect();
        for (line, row) in &body {
            if row.len() != names.len() + 1 {
                return Err(Error::parse(
                    *line,
                    row.len().min(names.len() + 1),
                    format!("expected {} fields, found {}", names.len() + 1, row.len()),
                ));
            }
        }
        Ok((names, body))
    }
}

/// Reads a symptom × cause matrix of grade symbols or decimal probabilities.
pub fn load_cond_prob_matrix<R: Read>(source: R, mode: CellMode) -> Result<CondProbMatrix> {
    let (cause_names, body) = read_table(source)?.split_header()?;
    if body.is_empty() {
        return Err(Error::parse(2, 1, "matrix has no symptom rows"));
    }
    let mut symptom_names = Vec::with_capacity(body.len());
    let mut entries = Vec::with_capacity(body.len() * cause_names.len());
    for (line, row) in body {
        let mut cells = row.into_iter();
        symptom_names.push(cells.next().unwrap_or_default());
        for (col, cell) in cells.enumerate() {
            let value = match mode {
                CellMode::Letters => decode_letter(&cell)
                    .map_err(|_| Error::parse(line, col + 2, format!("unknown grade `{cell}`")))?,
                CellMode::Numeric => cell
                    .parse::<f64>()
                    .map_err(|_| Error::parse(line, col + 2, format!("not a number: `{cell}`")))?,
            };
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::OutOfRange {
                    value,
                    location: format!("line {line}, column {}", col + 2),
                });
            }
            entries.push(value);
        }
    }
    CondProbMatrix::new(entries, symptom_names, cause_names)
}

pub fn write_cond_prob_matrix<W: Write>(p: &CondProbMatrix, mode: CellMode, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["symptom".to_string()];
    header.extend(p.cause_names().iter().cloned());
    w.write_record(&header).map_err(csv_err)?;
    for (k, name) in p.symptom_names().iter().enumerate() {
        let mut rec = vec![name.clone()];
        for &v in p.row(k) {
            rec.push(match mode {
                CellMode::Numeric => v.to_string(),
                CellMode::Letters => LetterGrade::from_value(v)
                    .ok_or_else(|| Error::Invalid(format!("value {v} has no letter grade")))?
                    .label()
                    .to_string(),
            });
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads deaths × symptoms with cells `0`, `1` or `.` (missing).
pub fn load_symptoms<R: Read>(source: R) -> Result<SymptomMatrix> {
    let (symptom_names, body) = read_table(source)?.split_header()?;
    if body.is_empty() {
        return Err(Error::parse(2, 1, "no deaths in symptom file"));
    }
    let mut ids = Vec::with_capacity(body.len());
    let mut entries = Vec::with_capacity(body.len() * symptom_names.len());
    for (line, row) in body {
        let mut cells = row.into_iter();
        ids.push(cells.next().unwrap_or_default());
        for (col, cell) in cells.enumerate() {
            entries.push(match cell.as_str() {
                "0" => Indicator::Absent,
                "1" => Indicator::Present,
                "." | "" => Indicator::Missing,
                other => {
                    return Err(Error::parse(
                        line,
                        col + 2,
                        format!("expected 0, 1 or `.`, found `{other}`"),
                    ))
                }
            });
        }
    }
    SymptomMatrix::new(entries, ids, symptom_names)
}

pub fn write_symptoms<W: Write>(s: &SymptomMatrix, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["death_id".to_string()];
    header.extend(s.symptom_names().iter().cloned());
    w.write_record(&header).map_err(csv_err)?;
    for (j, id) in s.death_ids().iter().enumerate() {
        let rec = std::iter::once(id.as_str()).chain(s.row(j).iter().map(|v| v.symbol()));
        w.write_record(rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `cause,fraction` pairs; a non-numeric first row is taken as a header.
pub fn load_csmf<R: Read>(source: R) -> Result<Csmf> {
    let table = read_table(source)?;
    let mut names = Vec::new();
    let mut fractions = Vec::new();
    for (i, (line, row)) in table.rows.into_iter().enumerate() {
        if row.len() != 2 {
            return Err(Error::parse(
                line,
                1,
                format!("expected 2 fields, found {}", row.len()),
            ));
        }
        match row[1].parse::<f64>() {
            Ok(v) => {
                names.push(row[0].clone());
                fractions.push(v);
            }
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(Error::parse(line, 2, format!("not a number: `{}`", row[1])));
            }
        }
    }
    if names.is_empty() {
        return Err(Error::parse(1, 1, "no CSMF entries"));
    }
    Csmf::new(fractions, names)
}

pub fn write_csmf<W: Write>(c: &Csmf, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["cause", "fraction"]).map_err(csv_err)?;
    for (name, f) in c.cause_names().iter().zip(c.fractions()) {
        w.write_record([name.as_str(), &f.to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses `SUM a b = d` and `LEQ a d` lines. `#` starts a comment.
pub fn parse_constraints<R: Read>(mut source: R) -> Result<ConstraintSet> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    let mut constraints = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let lineno = i + 1;
        let constraint = match tokens[0].to_ascii_uppercase().as_str() {
            "SUM" => {
                let eq = tokens
                    .iter()
                    .position(|&t| t == "=")
                    .ok_or_else(|| Error::parse(lineno, 1, "SUM constraint needs `=`"))?;
                if eq < 2 || eq + 2 != tokens.len() {
                    return Err(Error::parse(lineno, 1, "expected `SUM a b ... = d`"));
                }
                Constraint::SumEquals {
                    parts: tokens[1..eq].iter().map(|s| s.to_string()).collect(),
                    total: tokens[eq + 1].to_string(),
                }
            }
            "LEQ" => {
                if tokens.len() != 3 {
                    return Err(Error::parse(lineno, 1, "expected `LEQ a d`"));
                }
                Constraint::LessEq {
                    lesser: tokens[1].to_string(),
                    greater: tokens[2].to_string(),
                }
            }
            other => {
                return Err(Error::parse(
                    lineno,
                    1,
                    format!("unknown constraint `{other}`"),
                ));
            }
        };
        constraints.push(constraint);
    }
    Ok(ConstraintSet::new(constraints))
}

/// Reads `death_id,cause` pairs after a header row.
pub fn load_truth<R: Read>(source: R) -> Result<Vec<(String, String)>> {
    let table = read_table(source)?;
    let mut out = Vec::new();
    for (line, row) in table.rows.into_iter().skip(1) {
        if row.len() != 2 {
            return Err(Error::parse(line, 1, "expected `death_id,cause`"));
        }
        let mut it = row.into_iter();
        out.push((it.next().unwrap(), it.next().unwrap()));
    }
    Ok(out)
}

pub fn write_truth<W: Write>(
    death_ids: &[String],
    causes: &[usize],
    cause_names: &[String],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["death_id", "cause"]).map_err(csv_err)?;
    for (id, &c) in death_ids.iter().zip(causes) {
        w.write_record([id.as_str(), cause_names[c].as_str()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a header and rows of pre-formatted cells.
pub fn write_table<W: Write>(header: &[&str], rows: &[Vec<String>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Invalid(format!("{other:?}")),
    }
}
