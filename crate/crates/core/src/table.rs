//! CSV persistence for feature tables and cluster assignments.
//!
//! `features.csv`: `image_id,label,method,f1,..,fN` with N = 9 or 18.
//! `assignments.csv`: `image_id,label,cluster`.
//! An empty label field means "unlabeled". Floats are written in Rust's
//! shortest round-trip form, so reading back reproduces every bit.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::{FeatureVector, Method};

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub method: Method,
    pub rows: Vec<FeatureVector>,
}

impl FeatureTable {
    /// Checks row dimensions, row methods and id uniqueness.
    pub fn new(method: Method, rows: Vec<FeatureVector>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (i, r) in rows.iter().enumerate() {
            if r.method != method || r.values.len() != method.dimension() {
                return Err(Error::Input(format!(
                    "row {i} ({}) is {} with {} values, table is {method} with {}",
                    r.image_id,
                    r.method,
                    r.values.len(),
                    method.dimension()
                )));
            }
            if !seen.insert(r.image_id.as_str()) {
                return Err(Error::Input(format!("duplicate image_id {}", r.image_id)));
            }
        }
        Ok(Self { method, rows })
    }

    pub fn dimension(&self) -> usize {
        self.method.dimension()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Z-score every dimension in place (population standard deviation).
    /// Dimensions with zero variance become 0.
    pub fn normalize(&mut self) {
        if self.rows.is_empty() {
            return;
        }
        let n = self.rows.len() as f64;
        for d in 0..self.dimension() {
            let mean = self.rows.iter().map(|r| r.values[d]).sum::<f64>() / n;
            let var = self
                .rows
                .iter()
                .map(|r| (r.values[d] - mean).powi(2))
                .sum::<f64>()
                / n;
            let sd = var.sqrt();
            for r in &mut self.rows {
                r.values[d] = if sd > 0.0 {
                    (r.values[d] - mean) / sd
                } else {
                    0.0
                };
            }
        }
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![
            "image_id".to_owned(),
            "label".to_owned(),
            "method".to_owned(),
        ];
        header.extend((1..=self.dimension()).map(|i| format!("f{i}")));
        w.write_record(&header).map_err(csv_io)?;
        for r in &self.rows {
            let mut rec = vec![
                r.image_id.clone(),
                r.label.clone().unwrap_or_default(),
                r.method.to_string(),
            ];
            rec.extend(r.values.iter().map(f64::to_string));
            w.write_record(&rec).map_err(csv_io)?;
        }
        w.flush().map_err(|e| Error::io("<features>", e))
    }

    /// Parse a feature CSV. `origin` names the source in error messages.
    pub fn read_from<R: Read>(input: R, origin: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(input);
        let header = rdr
            .headers()
            .map_err(|e| Error::format(origin, 1, e.to_string()))?
            .clone();
        let dim = header.len().saturating_sub(3);
        let fixed = header.iter().take(3).eq(["image_id", "label", "method"]);
        let numbered = header
            .iter()
            .skip(3)
            .enumerate()
            .all(|(i, h)| h == format!("f{}", i + 1));
        if !fixed || !numbered || !(dim == 9 || dim == 18) {
            return Err(Error::format(
                origin,
                1,
                "header must be image_id,label,method,f1..f9 or f1..f18",
            ));
        }

        let mut method: Option<Method> = None;
        let mut rows = Vec::new();
        let mut seen = HashSet::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                Error::format(origin, line, e.to_string())
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            let fail = |reason: String| Error::format(origin, line, reason);
            if rec.len() != 3 + dim {
                return Err(fail(format!(
                    "expected {} fields, found {}",
                    3 + dim,
                    rec.len()
                )));
            }
            let m: Method = rec[2].parse().map_err(|e: Error| fail(e.to_string()))?;
            if m.dimension() != dim {
                return Err(fail(format!(
                    "method {m} needs {} values but the header declares {dim}",
                    m.dimension()
                )));
            }
            if method.is_some_and(|prev| prev != m) {
                return Err(fail(format!("mixed methods in one table ({m})")));
            }
            method = Some(m);
            let values = rec
                .iter()
                .skip(3)
                .map(|s| match s.trim().parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(fail(format!("bad feature value {s:?}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            let image_id = rec[0].to_owned();
            if image_id.is_empty() {
                return Err(fail("empty image_id".into()));
            }
            if !seen.insert(image_id.clone()) {
                return Err(fail(format!("duplicate image_id {image_id}")));
            }
            rows.push(FeatureVector {
                image_id,
                label: Some(rec[1].to_owned()).filter(|l| !l.is_empty()),
                method: m,
                values,
            });
        }
        let method = method.unwrap_or(if dim == 9 {
            Method::Moments
        } else {
            Method::Btc
        });
        Ok(Self { method, rows })
    }
}

fn csv_io(e: csv::Error) -> Error {
    Error::io("<csv>", std::io::Error::other(e))
}

/// Write `bytes` to a sibling temp file, then rename it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Input(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    let result = std::fs::File::create(&tmp)
        .and_then(|mut f| {
            f.write_all(bytes)?;
            f.sync_all()
        })
        .and_then(|_| std::fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

pub fn write_features(table: &FeatureTable, path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    table.write_to(&mut buf)?;
    write_atomic(path.as_ref(), &buf)
}

pub fn read_features(path: impl AsRef<Path>) -> Result<FeatureTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    FeatureTable::read_from(std::io::BufReader::new(file), path)
}

/// One line of `assignments.csv`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentRow {
    pub image_id: String,
    pub label: Option<String>,
    pub cluster: usize,
}

pub fn assignments_to_csv(rows: &[AssignmentRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["image_id", "label", "cluster"])
        .expect("in-memory write");
    for r in rows {
        w.write_record([
            r.image_id.as_str(),
            r.label.as_deref().unwrap_or(""),
            &r.cluster.to_string(),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn write_assignments(rows: &[AssignmentRow], path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &assignments_to_csv(rows))
}

pub fn read_assignments(path: impl AsRef<Path>) -> Result<Vec<AssignmentRow>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(std::io::BufReader::new(file));
    let header = rdr
        .headers()
        .map_err(|e| Error::format(path, 1, e.to_string()))?;
    if header.iter().ne(["image_id", "label", "cluster"]) {
        return Err(Error::format(
            path,
            1,
            "header must be image_id,label,cluster",
        ));
    }
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::format(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let cluster = rec[2]
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::format(path, line, format!("bad cluster index {:?}", &rec[2])))?;
        if !seen.insert(rec[0].to_owned()) {
            return Err(Error::format(
                path,
                line,
                format!("duplicate image_id {}", &rec[0]),
            ));
        }
        out.push(AssignmentRow {
            image_id: rec[0].to_owned(),
            label: Some(rec[1].to_owned()).filter(|l| !l.is_empty()),
            cluster,
        });
    }
    Ok(out)
}
