//! End-to-end run: ingest, extract, cluster, evaluate, write artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::dataset::{ingest, DatasetManifest, Labeling, WANG_CLASSES};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate, EvaluationReport, LabeledAssignment};
use crate::features::{extract, Method};
use crate::imagery::load_image;
use crate::kmeans::{kmeans, KMeansConfig, KMeansModel};
use crate::table::{assignments_to_csv, write_atomic, AssignmentRow, FeatureTable};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const FEATURES_FILE: &str = "features.csv";
pub const ASSIGNMENTS_FILE: &str = "assignments.csv";
pub const REPORT_FILE: &str = "report.csv";
pub const REPORT_TABLE_FILE: &str = "report.txt";
pub const METADATA_FILE: &str = "run.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub labeling: Labeling,
    pub method: Method,
    pub normalize: bool,
    pub kmeans: KMeansConfig,
    pub out_dir: PathBuf,
}

impl PipelineConfig {
    pub fn new(input: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            labeling: Labeling::Subdirs,
            method: Method::Btc,
            normalize: false,
            kmeans: KMeansConfig::new(10, 0),
            out_dir: out_dir.into(),
        }
    }

    /// Parse flat `key = value` text. Blank lines and `#` comments are
    /// ignored; `-` and `_` in keys are interchangeable. Relative paths are
    /// resolved against `base`.
    ///
    /// Keys: `input`, `out` (or `out_dir`), `labeling`, `method`,
    /// `normalize`, `k`, `seed`, `init`, `max_iter`. `input` and `out` are
    /// required.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut input = None;
        let mut out_dir = None;
        let mut cfg = Self::new("", "");
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split_once('#').map_or(raw, |(l, _)| l).trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", n + 1)))?;
            let key = key.trim().replace('-', "_");
            let value = value.trim();
            let bad = |what: &str| Error::Config(format!("line {}: bad {what} {value:?}", n + 1));
            match key.as_str() {
                "input" => input = Some(base.join(value)),
                "out" | "out_dir" => out_dir = Some(base.join(value)),
                "labeling" => cfg.labeling = value.parse().map_err(|_| bad("labeling"))?,
                "method" => cfg.method = value.parse().map_err(|_| bad("method"))?,
                "normalize" => cfg.normalize = value.parse().map_err(|_| bad("normalize"))?,
                "k" => cfg.kmeans.k = value.parse().map_err(|_| bad("k"))?,
                "seed" => cfg.kmeans.seed = value.parse().map_err(|_| bad("seed"))?,
                "init" => cfg.kmeans.init = value.parse().map_err(|_| bad("init"))?,
                "max_iter" | "max_iterations" => {
                    cfg.kmeans.max_iterations = value.parse().map_err(|_| bad("max_iter"))?
                }
                other => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key {other:?}",
                        n + 1
                    )))
                }
            }
        }
        cfg.input = input.ok_or_else(|| Error::Config("missing key: input".into()))?;
        cfg.out_dir = out_dir.ok_or_else(|| Error::Config("missing key: out".into()))?;
        Ok(cfg)
    }

    /// Read a config file; relative paths are taken from the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, base)
    }

    /// Every config value plus the tool version, as `key=value` lines.
    pub fn metadata(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "version={VERSION}");
        let _ = writeln!(s, "input={}", self.input.display());
        let _ = writeln!(s, "labeling={}", self.labeling);
        let _ = writeln!(s, "method={}", self.method);
        let _ = writeln!(s, "normalize={}", self.normalize);
        let _ = writeln!(s, "k={}", self.kmeans.k);
        let _ = writeln!(s, "seed={}", self.kmeans.seed);
        let _ = writeln!(s, "init={}", self.kmeans.init);
        let _ = writeln!(s, "max_iter={}", self.kmeans.max_iterations);
        let _ = writeln!(s, "out={}", self.out_dir.display());
        s
    }
}

/// Decode every manifest entry and extract `method` features, in manifest
/// order. Images are processed in parallel.
pub fn extract_features(
    manifest: &DatasetManifest,
    method: Method,
    normalize: bool,
) -> Result<FeatureTable> {
    let rows = manifest
        .entries
        .par_iter()
        .map(|e| {
            let image = load_image(&e.path)?;
            Ok(extract(method, &image, e.image_id.clone(), e.label.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = FeatureTable::new(method, rows)?;
    if normalize {
        table.normalize();
    }
    Ok(table)
}

/// Run k-means over a feature table and pair each row with its cluster.
pub fn cluster_table(
    table: &FeatureTable,
    config: &KMeansConfig,
) -> Result<(KMeansModel, Vec<AssignmentRow>)> {
    let model = kmeans(&table.rows, config)?;
    if model.assignments.len() != table.len() {
        return Err(Error::Invariant(format!(
            "{} assignments for {} rows",
            model.assignments.len(),
            table.len()
        )));
    }
    if let Some(j) = model.cluster_sizes().iter().position(|&s| s == 0) {
        return Err(Error::Invariant(format!(
            "cluster {j} is empty after k-means"
        )));
    }
    let rows = table
        .rows
        .iter()
        .zip(&model.assignments)
        .map(|(r, &cluster)| AssignmentRow {
            image_id: r.image_id.clone(),
            label: r.label.clone(),
            cluster,
        })
        .collect();
    Ok((model, rows))
}

/// Majority-vote mapping and per-class scores. Every row needs a label.
pub fn evaluate_assignments(rows: &[AssignmentRow]) -> Result<EvaluationReport> {
    let unlabeled: Vec<&str> = rows
        .iter()
        .filter(|r| r.label.is_none())
        .map(|r| r.image_id.as_str())
        .take(5)
        .collect();
    if !unlabeled.is_empty() {
        return Err(Error::Input(format!(
            "cannot evaluate unlabeled images (e.g. {})",
            unlabeled.join(", ")
        )));
    }
    let labeled: Vec<LabeledAssignment> = rows
        .iter()
        .map(|r| LabeledAssignment::new(r.image_id.clone(), r.label.clone().unwrap(), r.cluster))
        .collect();
    let report = evaluate(&labeled)?;
    let retrieved: usize = report.per_class.values().map(|s| s.retrieved_count).sum();
    if retrieved != rows.len() {
        return Err(Error::Invariant(format!(
            "{retrieved} images retrieved across classes, expected {}",
            rows.len()
        )));
    }
    Ok(report)
}

/// Report rows follow the benchmark corpus class order, then alphabetical.
pub fn report_csv(report: &EvaluationReport) -> String {
    report.to_csv(&WANG_CLASSES)
}

pub fn report_table(report: &EvaluationReport) -> String {
    report.to_table(&WANG_CLASSES)
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub table: FeatureTable,
    pub model: KMeansModel,
    pub assignments: Vec<AssignmentRow>,
    pub report: EvaluationReport,
}

/// Run every stage and write all artifacts under `config.out_dir`.
///
/// Features and assignments are written before evaluation, so an unlabeled
/// corpus still leaves both files behind when evaluation refuses to run.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineOutput> {
    let manifest = ingest(&config.input, config.labeling).map_err(|e| e.in_stage("ingest"))?;
    let table = extract_features(&manifest, config.method, config.normalize)
        .map_err(|e| e.in_stage("extract"))?;
    let (model, assignments) =
        cluster_table(&table, &config.kmeans).map_err(|e| e.in_stage("cluster"))?;
    if assignments.len() != manifest.len() {
        return Err(Error::Invariant(format!(
            "{} assignment rows for {} manifest entries",
            assignments.len(),
            manifest.len()
        )));
    }

    let out = &config.out_dir;
    let write_tables = || -> Result<()> {
        std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        let mut features = Vec::new();
        table.write_to(&mut features)?;
        write_atomic(&out.join(FEATURES_FILE), &features)?;
        write_atomic(
            &out.join(ASSIGNMENTS_FILE),
            &assignments_to_csv(&assignments),
        )?;
        let mut meta = config.metadata();
        let _ = writeln!(meta, "images={}", manifest.len());
        let _ = writeln!(meta, "iterations_run={}", model.iterations_run);
        let _ = writeln!(meta, "converged={}", model.converged);
        write_atomic(&out.join(METADATA_FILE), meta.as_bytes())
    };
    write_tables().map_err(|e| e.in_stage("write"))?;

    let report = evaluate_assignments(&assignments).map_err(|e| e.in_stage("evaluate"))?;
    write_atomic(&out.join(REPORT_FILE), report_csv(&report).as_bytes())
        .and_then(|_| {
            write_atomic(
                &out.join(REPORT_TABLE_FILE),
                report_table(&report).as_bytes(),
            )
        })
        .map_err(|e| e.in_stage("write"))?;

    Ok(PipelineOutput {
        table,
        model,
        assignments,
        report,
    })
}

/// Cluster-to-class mapping as `cluster=class` lines, for logs.
pub fn describe_mapping(mapping: &BTreeMap<usize, String>) -> String {
    mapping
        .iter()
        .map(|(c, class)| format!("{c}={class}\n"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kmeans::Init;

    #[test]
    fn parse_config() {
        let text =
            "# run\ninput = data\nout=results  # trailing\nlabeling=wang_numeric\nmethod=moments\n\
                    normalize=true\nk=4\nseed=9\ninit=random_points\nmax-iter=7\n";
        let c = PipelineConfig::parse(text, Path::new("/base")).unwrap();
        assert_eq!(c.input, PathBuf::from("/base/data"));
        assert_eq!(c.out_dir, PathBuf::from("/base/results"));
        assert_eq!(c.labeling, Labeling::WangNumeric);
        assert_eq!(c.method, Method::Moments);
        assert!(c.normalize);
        assert_eq!(
            c.kmeans,
            KMeansConfig::new(4, 9)
                .with_init(Init::RandomPoints)
                .with_max_iterations(7)
        );
    }

    #[test]
    fn config_defaults_and_errors() {
        let c = PipelineConfig::parse("input=/d\nout=/o\n", Path::new("")).unwrap();
        assert_eq!(c.kmeans.k, 10);
        assert_eq!(c.kmeans.init, Init::KMeansPlusPlus);
        assert_eq!(c.kmeans.max_iterations, 100);
        assert!(!c.normalize);
        assert!(PipelineConfig::parse("out=/o\n", Path::new("")).is_err());
        assert!(PipelineConfig::parse("input=/d\nout=/o\nk=ten\n", Path::new("")).is_err());
        assert!(PipelineConfig::parse("input=/d\nout=/o\ncolor=red\n", Path::new("")).is_err());
        assert!(PipelineConfig::parse("input\n", Path::new("")).is_err());
    }

    #[test]
    fn evaluate_refuses_unlabeled() {
        let rows = vec![AssignmentRow {
            image_id: "a".into(),
            label: None,
            cluster: 0,
        }];
        assert!(matches!(evaluate_assignments(&rows), Err(Error::Input(_))));
    }
}
