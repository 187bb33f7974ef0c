//! Long-format CSV interchange and report table writers.
//!
//! * `predictions.csv`: `model_id,case_id,finding,probability`
//! * `labels.csv`: `case_id,finding,label`
//! * `hist_<name>.csv`: `bin_low,bin_high,count`
//!
//! Identifiers are ordered by first appearance. Floats are written in Rust's
//! shortest round-trip form, so a load/write cycle is bit-exact.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{FindingSet, LabelTable, PredictionTensor};
use crate::variability::{CaseVariabilityRecord, Histogram};

pub const PREDICTIONS_HEADER: [&str; 4] = ["model_id", "case_id", "finding", "probability"];
pub const LABELS_HEADER: [&str; 3] = ["case_id", "finding", "label"];
pub const HISTOGRAM_HEADER: [&str; 3] = ["bin_low", "bin_high", "count"];

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    Error::Parse {
        line,
        column: String::new(),
        message: e.to_string(),
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(r)
}

fn check_header(rdr: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let mut rec = csv::StringRecord::new();
    if !rdr.read_record(&mut rec).map_err(csv_err)? {
        return Err(Error::Parse {
            line: 1,
            column: String::new(),
            message: "file is empty; a header row is required".into(),
        });
    }
    let got: Vec<&str> = rec.iter().collect();
    // tolerate a UTF-8 byte order mark on the first field
    let first_ok =
        got.first().map(|f| f.trim_start_matches('\u{feff}')) == expected.first().copied();
    if got.len() != expected.len() || !first_ok || got[1..] != expected[1..] {
        return Err(Error::Parse {
            line: 1,
            column: String::new(),
            message: format!(
                "expected header `{}`, got `{}`",
                expected.join(","),
                got.join(",")
            ),
        });
    }
    Ok(())
}

fn field<'a>(rec: &'a csv::StringRecord, i: usize, name: &str, line: u64) -> Result<&'a str> {
    match rec.get(i) {
        Some(v) if !v.is_empty() => Ok(v),
        _ => Err(Error::Parse {
            line,
            column: name.to_string(),
            message: "missing value".into(),
        }),
    }
}

fn check_width(rec: &csv::StringRecord, width: usize, line: u64) -> Result<()> {
    if rec.len() != width {
        return Err(Error::Parse {
            line,
            column: String::new(),
            message: format!("expected {width} fields, got {}", rec.len()),
        });
    }
    Ok(())
}

/// Interns identifiers in order of first appearance.
#[derive(Default)]
struct Interner {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl Interner {
    fn intern(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.ids.len();
        self.ids.push(id.to_string());
        self.index.insert(id.to_string(), i);
        i
    }
}

pub fn read_predictions<R: Read>(input: R) -> Result<PredictionTensor> {
    let mut rdr = reader(input);
    check_header(&mut rdr, &PREDICTIONS_HEADER)?;
    let (mut models, mut cases, mut findings) = (
        Interner::default(),
        Interner::default(),
        Interner::default(),
    );
    let mut rows: Vec<(u32, u32, u32, f64)> = Vec::new();
    let mut rec = csv::StringRecord::new();
    while rdr.read_record(&mut rec).map_err(csv_err)? {
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        check_width(&rec, 4, line)?;
        let m = models.intern(field(&rec, 0, "model_id", line)?);
        let c = cases.intern(field(&rec, 1, "case_id", line)?);
        let f = findings.intern(field(&rec, 2, "finding", line)?);
        let raw = field(&rec, 3, "probability", line)?;
        let value: f64 = raw.trim().parse().map_err(|_| Error::Parse {
            line,
            column: "probability".into(),
            message: format!("`{raw}` is not a decimal number"),
        })?;
        if !(value > 0.0 && value < 1.0) {
            return Err(Error::OutOfRangeProbability {
                model_id: models.ids[m].clone(),
                case_id: cases.ids[c].clone(),
                finding: findings.ids[f].clone(),
                value,
            });
        }
        rows.push((m as u32, c as u32, f as u32, value));
    }
    let (nm, nc, nf) = (models.ids.len(), cases.ids.len(), findings.ids.len());
    if rows.is_empty() {
        return Err(Error::IncompleteTensor {
            expected: 1,
            actual: 0,
        });
    }
    let mut values = vec![f64::NAN; nm * nc * nf];
    let mut seen = vec![false; values.len()];
    for &(m, c, f, v) in &rows {
        let pos = (c as usize * nm + m as usize) * nf + f as usize;
        if seen[pos] {
            return Err(Error::DuplicateEntry(format!(
                "(model `{}`, case `{}`, finding `{}`)",
                models.ids[m as usize], cases.ids[c as usize], findings.ids[f as usize]
            )));
        }
        seen[pos] = true;
        values[pos] = v;
    }
    if rows.len() != values.len() {
        return Err(Error::IncompleteTensor {
            expected: values.len(),
            actual: rows.len(),
        });
    }
    PredictionTensor::from_case_major(
        models.ids,
        cases.ids,
        FindingSet::new(findings.ids)?,
        values,
    )
}

pub fn load_predictions(path: impl AsRef<Path>) -> Result<PredictionTensor> {
    read_predictions(open(path.as_ref())?)
}

pub fn read_labels<R: Read>(input: R) -> Result<LabelTable> {
    let mut rdr = reader(input);
    check_header(&mut rdr, &LABELS_HEADER)?;
    let (mut cases, mut findings) = (Interner::default(), Interner::default());
    let mut rows: Vec<(u32, u32, bool)> = Vec::new();
    let mut rec = csv::StringRecord::new();
    while rdr.read_record(&mut rec).map_err(csv_err)? {
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        check_width(&rec, 3, line)?;
        let c = cases.intern(field(&rec, 0, "case_id", line)?);
        let f = findings.intern(field(&rec, 1, "finding", line)?);
        let label = match rec.get(2).map(str::trim) {
            Some("0") => false,
            Some("1") => true,
            other => {
                return Err(Error::InvalidLabel {
                    line,
                    value: other.unwrap_or("").to_string(),
                })
            }
        };
        rows.push((c as u32, f as u32, label));
    }
    let (nc, nf) = (cases.ids.len(), findings.ids.len());
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            column: String::new(),
            message: "no label rows".into(),
        });
    }
    let mut labels = vec![None; nc * nf];
    for &(c, f, l) in &rows {
        let slot = &mut labels[c as usize * nf + f as usize];
        if slot.is_some() {
            return Err(Error::DuplicateEntry(format!(
                "(case `{}`, finding `{}`)",
                cases.ids[c as usize], findings.ids[f as usize]
            )));
        }
        *slot = Some(l);
    }
    if let Some(pos) = labels.iter().position(Option::is_none) {
        return Err(Error::MissingPair {
            case_id: cases.ids[pos / nf].clone(),
            finding: findings.ids[pos % nf].clone(),
        });
    }
    let labels = labels.into_iter().map(|l| l.unwrap_or_default()).collect();
    LabelTable::new(cases.ids, FindingSet::new(findings.ids)?, labels)
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<LabelTable> {
    read_labels(open(path.as_ref())?)
}

/// Writes `data` to `path` through a temporary file in the same directory,
/// renamed into place once complete.
pub fn write_atomic(path: &Path, data: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        data(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn csv_writer(w: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

fn write_err(e: csv::Error) -> Error {
    Error::Serialize(e.to_string())
}

/// Long format, one row per (model, case, finding) in model, case, finding order.
pub fn write_predictions(preds: &PredictionTensor, w: &mut dyn Write) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(PREDICTIONS_HEADER).map_err(write_err)?;
    let names = preds.findings().names();
    let mut buf = String::new();
    for (m, model_id) in preds.model_ids().iter().enumerate() {
        for (c, case_id) in preds.case_ids().iter().enumerate() {
            for (f, finding) in names.iter().enumerate() {
                buf.clear();
                use std::fmt::Write as _;
                let _ = write!(buf, "{}", preds.get(m, c, f));
                out.write_record([model_id.as_str(), case_id, finding, &buf])
                    .map_err(write_err)?;
            }
        }
    }
    out.flush().map_err(|e| Error::Serialize(e.to_string()))
}

/// Wide convenience export: `case_id,model_id,<finding...>`.
pub fn write_predictions_wide(preds: &PredictionTensor, w: &mut dyn Write) -> Result<()> {
    let mut out = csv_writer(w);
    let mut header = vec!["case_id".to_string(), "model_id".to_string()];
    header.extend(preds.findings().names().iter().cloned());
    out.write_record(&header).map_err(write_err)?;
    for (c, case_id) in preds.case_ids().iter().enumerate() {
        for (m, model_id) in preds.model_ids().iter().enumerate() {
            let mut row = vec![case_id.clone(), model_id.clone()];
            row.extend((0..preds.n_findings()).map(|f| preds.get(m, c, f).to_string()));
            out.write_record(&row).map_err(write_err)?;
        }
    }
    out.flush().map_err(|e| Error::Serialize(e.to_string()))
}

pub fn write_labels(labels: &LabelTable, w: &mut dyn Write) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(LABELS_HEADER).map_err(write_err)?;
    for (c, case_id) in labels.case_ids().iter().enumerate() {
        for (f, finding) in labels.findings().names().iter().enumerate() {
            let l = if labels.get(c, f) { "1" } else { "0" };
            out.write_record([case_id.as_str(), finding, l])
                .map_err(write_err)?;
        }
    }
    out.flush().map_err(|e| Error::Serialize(e.to_string()))
}

pub fn write_records(records: &[CaseVariabilityRecord], w: &mut dyn Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in records {
        out.serialize(r).map_err(write_err)?;
    }
    out.flush().map_err(|e| Error::Serialize(e.to_string()))
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<CaseVariabilityRecord>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(csv_err))
        .collect()
}

pub fn write_histogram(hist: &Histogram, w: &mut dyn Write) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(HISTOGRAM_HEADER).map_err(write_err)?;
    for (lo, hi, count) in hist.bins() {
        out.write_record([lo.to_string(), hi.to_string(), count.to_string()])
            .map_err(write_err)?;
    }
    out.flush().map_err(|e| Error::Serialize(e.to_string()))
}

/// Plain single-column list of case identifiers.
pub fn write_case_list(case_ids: &[&str], w: &mut dyn Write) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["case_id"]).map_err(write_err)?;
    for id in case_ids {
        out.write_record([id]).map_err(write_err)?;
    }
    out.flush().map_err(|e| Error::Serialize(e.to_string()))
}
