//! On-disk formats: symbolic objects (JSON lines), leaders with their
//! aggregates (JSON lines), merge lists and label tables (CSV).
//!
//! Reals are written with 17 significant digits, so a write followed by a
//! read reproduces every `f64` exactly.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::Deserialize;
use symclust_core::{
    validate_object, ClusterAggregates, Leader, MergeRecord, ModalValue, Schema, SymbolicObject,
};

use crate::error::{Error, Result};

/// Scientific notation with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn push_array(out: &mut String, xs: impl IntoIterator<Item = f64>) {
    out.push('[');
    for (i, x) in xs.into_iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&fmt_real(x));
    }
    out.push(']');
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

pub fn object_line(x: &SymbolicObject) -> String {
    let mut out = format!("{{\"id\":{},\"vars\":[", quote(&x.id));
    for (i, v) in x.vars.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{{\"n\":{},\"f\":", fmt_real(v.n));
        push_array(&mut out, v.f.iter().copied());
        out.push_str(",\"w\":");
        push_array(&mut out, v.w.iter().copied());
        out.push('}');
    }
    out.push_str("]}");
    out
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VarRecord {
    n: f64,
    f: Vec<f64>,
    w: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectRecord {
    id: String,
    vars: Vec<VarRecord>,
}

pub fn parse_object_line(line: &str) -> std::result::Result<SymbolicObject, String> {
    let rec: ObjectRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let vars = rec
        .vars
        .into_iter()
        .map(|v| {
            if v.f.len() != v.w.len() {
                return Err(format!(
                    "f has {} components but w has {}",
                    v.f.len(),
                    v.w.len()
                ));
            }
            Ok(ModalValue::with_count(v.f, v.n, v.w))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(SymbolicObject::new(rec.id, vars))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_objects(path: &Path, units: &[SymbolicObject]) -> Result<()> {
    let mut w = create(path)?;
    for x in units {
        writeln!(w, "{}", object_line(x)).map_err(|e| Error::io(path, e))?;
    }
    finish(w, path)
}

/// Reads symbolic objects; with a schema, every object is validated.
pub fn read_objects(path: &Path, schema: Option<&Schema>) -> Result<Vec<SymbolicObject>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let at = |msg: String| Error::Data(format!("{}: line {}: {msg}", path.display(), i + 1));
        let x = parse_object_line(&line).map_err(at)?;
        if let Some(schema) = schema {
            if let Some(v) = validate_object(&x, schema).first() {
                return Err(at(format!("object '{}': {v}", x.id)));
            }
        }
        out.push(x);
    }
    Ok(out)
}

/// One line per cluster: its leader and the per-component sums.
pub fn write_leaders(
    path: &Path,
    leaders: &[Leader],
    aggregates: &[ClusterAggregates],
    errors: &[f64],
) -> Result<()> {
    let mut w = create(path)?;
    for (c, (t, agg)) in leaders.iter().zip(aggregates).enumerate() {
        let mut line = format!(
            "{{\"cluster\":{c},\"members\":{},\"error\":{},\"vars\":[",
            agg.count,
            fmt_real(errors.get(c).copied().unwrap_or(0.0))
        );
        for (i, (ti, sums)) in t.vars.iter().zip(&agg.vars).enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str("{\"t\":");
            push_array(&mut line, ti.iter().copied());
            for (key, get) in [
                (
                    "w",
                    (|s: &symclust_core::ComponentSums| s.w) as fn(&_) -> f64,
                ),
                ("w_pos", |s| s.w_pos),
                ("P", |s| s.p),
                ("Q", |s| s.q),
                ("H", |s| s.h),
                ("G", |s| s.g),
            ] {
                let _ = write!(line, ",\"{key}\":");
                push_array(&mut line, sums.iter().map(get));
            }
            line.push('}');
        }
        line.push_str("]}");
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    finish(w, path)
}

pub fn write_merges(path: &Path, merges: &[MergeRecord]) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "left,right,height,new_id").map_err(io)?;
    for m in merges {
        writeln!(
            w,
            "{},{},{},{}",
            m.left,
            m.right,
            fmt_real(m.height),
            m.new_node
        )
        .map_err(io)?;
    }
    finish(w, path)
}

/// Parses and checks a merge list: node ids refer to earlier nodes, each
/// node is merged at most once, and new ids are consecutive.
pub fn parse_merges(text: &str, path: &Path) -> Result<Vec<MergeRecord>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut raw = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::parse(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 4 {
            return Err(Error::parse(
                path,
                format!("line {line}: expected 4 fields, found {}", rec.len()),
            ));
        }
        let int = |k: usize| {
            rec[k].trim().parse::<usize>().map_err(|_| {
                Error::parse(path, format!("line {line}: '{}' is not a node id", &rec[k]))
            })
        };
        let height: f64 = rec[2]
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, format!("line {line}: bad height '{}'", &rec[2])))?;
        raw.push((int(0)?, int(1)?, height, int(3)?, line));
    }
    let n = raw.len() + 1;
    let mut used = vec![false; 2 * n - 1];
    let mut merges = Vec::with_capacity(raw.len());
    for (s, (left, right, height, new_node, line)) in raw.into_iter().enumerate() {
        let bad = |msg: &str| Error::parse(path, format!("line {line}: {msg}"));
        if new_node != n + s {
            return Err(bad("new ids must be consecutive after the leaves"));
        }
        for c in [left, right] {
            if c >= new_node || left == right {
                return Err(bad("merge refers to an unknown node"));
            }
            if std::mem::replace(&mut used[c], true) {
                return Err(bad("node merged twice"));
            }
        }
        merges.push(MergeRecord {
            left,
            right,
            height,
            new_node,
        });
    }
    Ok(merges)
}

pub fn read_merges(path: &Path) -> Result<Vec<MergeRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_merges(&text, path)
}

/// A label table: one row per id, one integer column per name.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelTable {
    pub ids: Vec<String>,
    pub columns: Vec<(String, Vec<usize>)>,
}

impl LabelTable {
    pub fn new(ids: Vec<String>) -> Self {
        LabelTable {
            ids,
            columns: Vec::new(),
        }
    }

    pub fn with(mut self, name: &str, labels: Vec<usize>) -> Self {
        self.columns.push((name.to_string(), labels));
        self
    }

    pub fn column(&self, name: &str) -> Option<&[usize]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    /// First column present among `names`.
    pub fn first_of<'a>(&self, names: &[&'a str]) -> Option<(&'a str, &[usize])> {
        names.iter().find_map(|n| self.column(n).map(|c| (*n, c)))
    }

    pub fn to_csv(&self, id_header: &str) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::Data(e.to_string());
        let mut header = vec![id_header.to_string()];
        header.extend(self.columns.iter().map(|(n, _)| n.clone()));
        w.write_record(&header).map_err(err)?;
        for (r, id) in self.ids.iter().enumerate() {
            let mut rec = vec![id.clone()];
            rec.extend(self.columns.iter().map(|(_, v)| v[r].to_string()));
            w.write_record(&rec).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Data(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("utf-8 fields"))
    }

    pub fn write(&self, path: &Path, id_header: &str) -> Result<()> {
        std::fs::write(path, self.to_csv(id_header)?).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<LabelTable> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| Error::parse(path, e))?;
        let headers = reader.headers().map_err(|e| Error::parse(path, e))?.clone();
        if headers.is_empty() {
            return Err(Error::parse(path, "empty header"));
        }
        let mut table = LabelTable::new(Vec::new());
        for name in headers.iter().skip(1) {
            table.columns.push((name.trim().to_string(), Vec::new()));
        }
        for rec in reader.records() {
            let rec = rec.map_err(|e| Error::parse(path, e))?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.len() != headers.len() {
                return Err(Error::parse(
                    path,
                    format!("line {line}: wrong field count"),
                ));
            }
            table.ids.push(rec[0].to_string());
            for (k, (_, col)) in table.columns.iter_mut().enumerate() {
                let v = rec[k + 1].trim().parse().map_err(|_| {
                    Error::parse(
                        path,
                        format!("line {line}: '{}' is not a label", &rec[k + 1]),
                    )
                })?;
                col.push(v);
            }
        }
        Ok(table)
    }
}
