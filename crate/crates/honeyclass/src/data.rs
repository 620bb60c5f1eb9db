//! Domain data model: mineral profiles, samples, datasets and task tables.
//!
//! Everything in this module is immutable after construction and safe to
//! share across threads.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Number of mineral element features.
pub const ELEMENT_COUNT: usize = 12;

/// The twelve profiled mineral elements, in canonical feature order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Element {
    Al,
    B,
    Ba,
    Ca,
    Fe,
    K,
    Mg,
    Mn,
    Na,
    P,
    Sr,
    Zn,
}

impl Element {
    /// All elements in canonical order. Feature column `i` of every task
    /// table is `ALL[i]` unless a feature filter is applied.
    pub const ALL: [Element; ELEMENT_COUNT] = [
        Element::Al,
        Element::B,
        Element::Ba,
        Element::Ca,
        Element::Fe,
        Element::K,
        Element::Mg,
        Element::Mn,
        Element::Na,
        Element::P,
        Element::Sr,
        Element::Zn,
    ];

    /// Position in the canonical order.
    pub fn index(self) -> usize {
        Element::ALL.iter().position(|&e| e == self).unwrap()
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Element::Al => "Al",
            Element::B => "B",
            Element::Ba => "Ba",
            Element::Ca => "Ca",
            Element::Fe => "Fe",
            Element::K => "K",
            Element::Mg => "Mg",
            Element::Mn => "Mn",
            Element::Na => "Na",
            Element::P => "P",
            Element::Sr => "Sr",
            Element::Zn => "Zn",
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Element {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Element::ALL
            .iter()
            .copied()
            .find(|e| e.symbol().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownLabel {
                label: s.to_string(),
            })
    }
}

/// One sample's twelve concentrations; `None` marks a value the source
/// instrument reported as not detected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MineralVector {
    values: [Option<f64>; ELEMENT_COUNT],
}

impl MineralVector {
    /// Builds a vector, validating that present values are finite and ≥ 0.
    pub fn new(values: [Option<f64>; ELEMENT_COUNT]) -> Result<Self> {
        for (i, v) in values.iter().enumerate() {
            if let Some(x) = v {
                if !x.is_finite() || *x < 0.0 {
                    return Err(Error::MalformedCell {
                        row: 0,
                        column: Element::ALL[i].symbol().to_string(),
                        value: x.to_string(),
                    });
                }
            }
        }
        Ok(MineralVector { values })
    }

    pub fn get(&self, e: Element) -> Option<f64> {
        self.values[e.index()]
    }

    pub fn values(&self) -> &[Option<f64>; ELEMENT_COUNT] {
        &self.values
    }

    /// Count of not-detected slots.
    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }
}

/// The three kinds of rows in the source data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SampleType {
    PureHoney,
    AdulteratedHoney,
    Syrup,
}

impl fmt::Display for SampleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SampleType::PureHoney => "pure",
            SampleType::AdulteratedHoney => "adulterated",
            SampleType::Syrup => "syrup",
        };
        f.write_str(s)
    }
}

/// A single profiled sample and its metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub sample_type: SampleType,
    /// Floral source; present for honey, absent for syrup.
    pub botanical: Option<String>,
    /// Geographical origin; present for pure honey only.
    pub region: Option<String>,
    /// Adulteration level tag, carried as metadata and never used as a feature.
    pub level: Option<String>,
    pub minerals: MineralVector,
}

impl Sample {
    /// Validates the metadata invariants tied to the sample type.
    pub fn validate(&self) -> std::result::Result<(), String> {
        match self.sample_type {
            SampleType::PureHoney => {
                if self.botanical.is_none() {
                    return Err("pure honey sample lacks a botanical origin".into());
                }
                if self.region.is_none() {
                    return Err("pure honey sample lacks a region".into());
                }
            }
            SampleType::AdulteratedHoney => {
                if self.botanical.is_none() {
                    return Err("adulterated honey sample lacks a botanical origin".into());
                }
            }
            SampleType::Syrup => {
                if self.botanical.is_some() || self.region.is_some() {
                    return Err("syrup sample carries botanical/region labels".into());
                }
            }
        }
        Ok(())
    }
}

/// Where a dataset came from and what has been done to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// Source file path as given to the parser.
    pub source: String,
    /// Human-readable summary of the column mapping used.
    pub mapping: String,
    /// Subset filters applied after parsing, in order.
    pub filters: Vec<String>,
}

/// Immutable, ordered collection of samples.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dataset {
    samples: Vec<Sample>,
    provenance: Provenance,
}

impl Dataset {
    /// Builds a dataset, enforcing id uniqueness.
    pub fn new(samples: Vec<Sample>, provenance: Provenance) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut seen = std::collections::HashSet::new();
        for (i, s) in samples.iter().enumerate() {
            if !seen.insert(s.id.as_str()) {
                return Err(Error::InvalidSample {
                    row: i + 1,
                    reason: format!("duplicate sample id {:?}", s.id),
                });
            }
        }
        Ok(Dataset {
            samples,
            provenance,
        })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Total not-detected cells across all samples.
    pub fn missing_cells(&self) -> usize {
        self.samples.iter().map(|s| s.minerals.missing_count()).sum()
    }

    pub(crate) fn with_filter_note(mut self, note: &str) -> Self {
        self.provenance.filters.push(note.to_string());
        self
    }
}

/// Which origin question a task table answers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaskKind {
    Botanical,
    Geographical,
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaskKind::Botanical => f.write_str("botanical"),
            TaskKind::Geographical => f.write_str("geographical"),
        }
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "botanical" => Ok(TaskKind::Botanical),
            "geographical" => Ok(TaskKind::Geographical),
            other => Err(Error::Config {
                reason: format!("unknown task kind {other:?}"),
            }),
        }
    }
}

/// Returns the sorted, deduplicated canonical class list for a label set.
///
/// The lexicographic order is the tie-breaking order used everywhere
/// downstream, so the same label set always maps to the same indices.
pub fn canonical_classes<I, S>(labels: I) -> Vec<String>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut classes: Vec<String> = labels.into_iter().map(|s| s.as_ref().to_string()).collect();
    classes.sort();
    classes.dedup();
    classes
}

/// Materialized feature matrix and label vector for one classification task.
///
/// Cells hold `None` where the source reported a value as not detected;
/// [`crate::preprocess::impute_missing`] clears those before model fitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskTable {
    cells: Vec<Option<f64>>,
    n: usize,
    d: usize,
    labels: Vec<usize>,
    classes: Vec<String>,
    task_kind: TaskKind,
    feature_names: Vec<String>,
    /// Row ids copied from the dataset, for report provenance.
    row_ids: Vec<String>,
}

impl TaskTable {
    pub(crate) fn new(
        cells: Vec<Option<f64>>,
        n: usize,
        d: usize,
        labels: Vec<usize>,
        classes: Vec<String>,
        task_kind: TaskKind,
        feature_names: Vec<String>,
        row_ids: Vec<String>,
    ) -> Result<Self> {
        assert_eq!(cells.len(), n * d);
        assert_eq!(labels.len(), n);
        assert_eq!(feature_names.len(), d);
        assert_eq!(row_ids.len(), n);
        let distinct = {
            let mut seen = vec![false; classes.len()];
            for &l in &labels {
                assert!(l < classes.len(), "label index out of range");
                seen[l] = true;
            }
            seen.iter().filter(|&&s| s).count()
        };
        if n < 2 || distinct < 2 {
            return Err(Error::SingleClass);
        }
        Ok(TaskTable {
            cells,
            n,
            d,
            labels,
            classes,
            task_kind,
            feature_names,
            row_ids,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_features(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn cell(&self, row: usize, col: usize) -> Option<f64> {
        self.cells[row * self.d + col]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn class_name(&self, index: usize) -> &str {
        &self.classes[index]
    }

    pub fn task_kind(&self) -> TaskKind {
        self.task_kind
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    /// Count of not-detected cells still present.
    pub fn missing_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_none()).count()
    }

    /// Per-class row counts, indexed like `classes()`.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.classes.len()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Dense feature matrix; fails while not-detected cells remain.
    pub fn dense(&self) -> Result<Matrix> {
        let missing = self.missing_count();
        if missing > 0 {
            return Err(Error::MissingValues { count: missing });
        }
        let data: Vec<f64> = self.cells.iter().map(|c| c.unwrap()).collect();
        Ok(Matrix::from_vec(self.n, self.d, data))
    }

    /// Maps every cell through `f`, leaving missing cells missing.
    pub(crate) fn map_cells(&self, f: impl Fn(usize, f64) -> f64) -> TaskTable {
        let mut out = self.clone();
        for row in 0..self.n {
            for col in 0..self.d {
                if let Some(v) = out.cells[row * self.d + col] {
                    out.cells[row * self.d + col] = Some(f(col, v));
                }
            }
        }
        out
    }

    /// Replaces missing cells with `value`.
    pub(crate) fn fill_missing(&self, value: f64) -> TaskTable {
        let mut out = self.clone();
        for c in out.cells.iter_mut() {
            if c.is_none() {
                *c = Some(value);
            }
        }
        out
    }

    /// Restriction to the given rows; classes are re-canonicalized to the
    /// labels actually present (order preserved, indices remapped).
    pub fn subtable(&self, rows: &[usize]) -> Result<TaskTable> {
        let mut present = vec![false; self.classes.len()];
        for &r in rows {
            present[self.labels[r]] = true;
        }
        let kept: Vec<usize> = (0..self.classes.len()).filter(|&c| present[c]).collect();
        let remap: Vec<Option<usize>> = {
            let mut m = vec![None; self.classes.len()];
            for (new, &old) in kept.iter().enumerate() {
                m[old] = Some(new);
            }
            m
        };
        let mut cells = Vec::with_capacity(rows.len() * self.d);
        let mut labels = Vec::with_capacity(rows.len());
        let mut row_ids = Vec::with_capacity(rows.len());
        for &r in rows {
            cells.extend_from_slice(&self.cells[r * self.d..(r + 1) * self.d]);
            labels.push(remap[self.labels[r]].unwrap());
            row_ids.push(self.row_ids[r].clone());
        }
        TaskTable::new(
            cells,
            rows.len(),
            self.d,
            labels,
            kept.iter().map(|&c| self.classes[c].clone()).collect(),
            self.task_kind,
            self.feature_names.clone(),
            row_ids,
        )
    }
}
