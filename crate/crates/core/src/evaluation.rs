//! Per-class recall and precision for a clustering.
//!
//! Each cluster is labeled with the majority class of its members. A class
//! then "retrieves" every image in the clusters labeled with it:
//!
//! * recall    = relevant retrieved / class population
//! * precision = relevant retrieved / total retrieved
//!
//! Both are reported as percentages.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledAssignment {
    pub image_id: String,
    pub true_class: String,
    pub cluster: usize,
}

impl LabeledAssignment {
    pub fn new(image_id: impl Into<String>, true_class: impl Into<String>, cluster: usize) -> Self {
        Self {
            image_id: image_id.into(),
            true_class: true_class.into(),
            cluster,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassScore {
    pub recall: f64,
    pub precision: f64,
    pub population: usize,
    pub retrieved_count: usize,
    pub relevant_retrieved: usize,
    /// No cluster maps to this class; precision is reported as 0.
    pub empty_retrieval: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub cluster_to_class: BTreeMap<usize, String>,
    pub per_class: BTreeMap<String, ClassScore>,
    pub macro_recall: f64,
    pub macro_precision: f64,
}

/// Label each cluster with its majority class; ties go to the
/// lexicographically smallest class name.
pub fn map_clusters(assignments: &[LabeledAssignment]) -> BTreeMap<usize, String> {
    let mut votes: BTreeMap<usize, BTreeMap<&str, usize>> = BTreeMap::new();
    for a in assignments {
        *votes
            .entry(a.cluster)
            .or_default()
            .entry(a.true_class.as_str())
            .or_default() += 1;
    }
    votes
        .into_iter()
        .map(|(cluster, counts)| {
            // BTreeMap iterates names in ascending order; keep the first maximum
            let mut best: Option<(&str, usize)> = None;
            for (class, n) in counts {
                if best.is_none_or(|(_, m)| n > m) {
                    best = Some((class, n));
                }
            }
            (cluster, best.expect("cluster with no votes").0.to_owned())
        })
        .collect()
}

/// Score `assignments` under `mapping`.
pub fn score(
    assignments: &[LabeledAssignment],
    mapping: &BTreeMap<usize, String>,
) -> Result<EvaluationReport> {
    let mut population: BTreeMap<&str, usize> = BTreeMap::new();
    let mut retrieved: BTreeMap<&str, usize> = BTreeMap::new();
    let mut relevant: BTreeMap<&str, usize> = BTreeMap::new();
    for a in assignments {
        let owner = mapping.get(&a.cluster).ok_or_else(|| {
            Error::Input(format!(
                "image {} is in cluster {} which has no class mapping",
                a.image_id, a.cluster
            ))
        })?;
        *population.entry(&a.true_class).or_default() += 1;
        *retrieved.entry(owner).or_default() += 1;
        if *owner == a.true_class {
            *relevant.entry(owner).or_default() += 1;
        }
    }
    if let Some(stray) = retrieved.keys().find(|c| !population.contains_key(*c)) {
        return Err(Error::Input(format!(
            "mapping names class {stray:?} which has no images"
        )));
    }

    let per_class: BTreeMap<String, ClassScore> = population
        .iter()
        .map(|(&class, &pop)| {
            let got = retrieved.get(class).copied().unwrap_or(0);
            let hit = relevant.get(class).copied().unwrap_or(0);
            let score = ClassScore {
                recall: percent(hit, pop),
                precision: if got == 0 { 0.0 } else { percent(hit, got) },
                population: pop,
                retrieved_count: got,
                relevant_retrieved: hit,
                empty_retrieval: got == 0,
            };
            (class.to_owned(), score)
        })
        .collect();

    let n = per_class.len().max(1) as f64;
    let macro_recall = per_class.values().map(|s| s.recall).sum::<f64>() / n;
    let macro_precision = per_class.values().map(|s| s.precision).sum::<f64>() / n;
    Ok(EvaluationReport {
        cluster_to_class: mapping.clone(),
        per_class,
        macro_recall,
        macro_precision,
    })
}

/// [`map_clusters`] followed by [`score`].
pub fn evaluate(assignments: &[LabeledAssignment]) -> Result<EvaluationReport> {
    if assignments.is_empty() {
        return Err(Error::Input("nothing to evaluate".into()));
    }
    score(assignments, &map_clusters(assignments))
}

fn percent(num: usize, den: usize) -> f64 {
    100.0 * num as f64 / den as f64
}

/// Two-decimal percentage, as printed in reports.
pub fn fmt_percent(v: f64) -> String {
    format!("{v:.2}")
}

impl EvaluationReport {
    /// Classes in the order rows are printed: `order` first (those present),
    /// then any remaining classes alphabetically.
    pub fn class_order<'a>(&'a self, order: &[&'a str]) -> Vec<&'a str> {
        let mut out: Vec<&str> = order
            .iter()
            .copied()
            .filter(|c| self.per_class.contains_key(*c))
            .collect();
        let listed: BTreeSet<&str> = out.iter().copied().collect();
        out.extend(
            self.per_class
                .keys()
                .map(String::as_str)
                .filter(|c| !listed.contains(c)),
        );
        out
    }

    /// `class,recall,precision,retrieved,relevant_retrieved`, one row per class.
    pub fn to_csv(&self, order: &[&str]) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "class",
            "recall",
            "precision",
            "retrieved",
            "relevant_retrieved",
        ])
        .expect("in-memory write");
        for class in self.class_order(order) {
            let s = &self.per_class[class];
            w.write_record([
                class.to_owned(),
                fmt_percent(s.recall),
                fmt_percent(s.precision),
                s.retrieved_count.to_string(),
                s.relevant_retrieved.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }

    /// Aligned text table with a macro-average footer.
    pub fn to_table(&self, order: &[&str]) -> String {
        let classes = self.class_order(order);
        let width = classes
            .iter()
            .map(|c| c.len())
            .chain(["Classes".len(), "Macro average".len()])
            .max()
            .unwrap_or(0);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:>9}  {:>9}",
            "Classes", "Recall", "Precision"
        );
        for class in classes {
            let s = &self.per_class[class];
            let flag = if s.empty_retrieval {
                "  (no cluster)"
            } else {
                ""
            };
            let _ = writeln!(
                out,
                "{:<width$}  {:>9}  {:>9}{flag}",
                class,
                fmt_percent(s.recall),
                fmt_percent(s.precision)
            );
        }
        let _ = writeln!(
            out,
            "{:<width$}  {:>9}  {:>9}",
            "Macro average",
            fmt_percent(self.macro_recall),
            fmt_percent(self.macro_precision)
        );
        out
    }
}
