//! Parsing of delimited source files into [`Dataset`]s, subset filtering,
//! and task-table materialization.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{
    canonical_classes, Dataset, Element, MineralVector, Provenance, Sample, SampleType, TaskKind,
    TaskTable, ELEMENT_COUNT,
};
use crate::error::{Error, Result};

/// Class name assigned to syrup rows in botanical tasks.
pub const SYRUP_CLASS: &str = "Syrup";

/// Maps logical fields to source-file column names.
///
/// The defaults match the fixture shipped with this crate; real files with
/// other headers are handled by loading a mapping config
/// (see [`ColumnMapping::from_config`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMapping {
    /// Column holding a unique row id; when `None`, ids are 1-based row numbers.
    pub id: Option<String>,
    pub sample_type: String,
    pub botanical: String,
    pub region: String,
    pub level: String,
    /// Source column per element, indexed in canonical element order.
    pub elements: [String; ELEMENT_COUNT],
    /// Token marking a not-detected measurement.
    pub missing_token: String,
    pub delimiter: char,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        ColumnMapping {
            id: Some("id".to_string()),
            sample_type: "type".to_string(),
            botanical: "botanical".to_string(),
            region: "region".to_string(),
            level: "level".to_string(),
            elements: Element::ALL.map(|e| e.symbol().to_string()),
            missing_token: "ND".to_string(),
            delimiter: ',',
        }
    }
}

impl ColumnMapping {
    /// Loads a mapping from a flat `key = value` config file.
    ///
    /// Recognized keys: `id`, `sample_type`, `botanical`, `region`, `level`,
    /// `missing_token`, `delimiter`, and `element.<Symbol>` for each of the
    /// twelve elements. Lines starting with `#` are comments. Unset keys
    /// keep their defaults.
    pub fn from_config(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_config_str(&text)
    }

    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut mapping = ColumnMapping::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                reason: format!("mapping line {} is not `key = value`", lineno + 1),
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "id" => {
                    mapping.id = if value.is_empty() {
                        None
                    } else {
                        Some(value.to_string())
                    }
                }
                "sample_type" => mapping.sample_type = value.to_string(),
                "botanical" => mapping.botanical = value.to_string(),
                "region" => mapping.region = value.to_string(),
                "level" => mapping.level = value.to_string(),
                "missing_token" => mapping.missing_token = value.to_string(),
                "delimiter" => {
                    let mut chars = value.chars();
                    match (chars.next(), chars.next()) {
                        (Some(c), None) => mapping.delimiter = c,
                        _ => {
                            return Err(Error::Config {
                                reason: format!("delimiter must be a single character: {value:?}"),
                            })
                        }
                    }
                }
                other => match other.strip_prefix("element.") {
                    Some(sym) => {
                        let element: Element = sym.parse().map_err(|_| Error::Config {
                            reason: format!("unknown element key {other:?}"),
                        })?;
                        mapping.elements[element.index()] = value.to_string();
                    }
                    None => {
                        return Err(Error::Config {
                            reason: format!("unknown mapping key {other:?}"),
                        })
                    }
                },
            }
        }
        mapping.validate()?;
        Ok(mapping)
    }

    /// Renders the mapping in the same config format `from_config` accepts.
    pub fn to_config_string(&self) -> String {
        let mut out = String::from("# column mapping\n");
        if let Some(id) = &self.id {
            out.push_str(&format!("id = {id}\n"));
        }
        out.push_str(&format!("sample_type = {}\n", self.sample_type));
        out.push_str(&format!("botanical = {}\n", self.botanical));
        out.push_str(&format!("region = {}\n", self.region));
        out.push_str(&format!("level = {}\n", self.level));
        out.push_str(&format!("missing_token = {}\n", self.missing_token));
        out.push_str(&format!("delimiter = {}\n", self.delimiter));
        for e in Element::ALL {
            out.push_str(&format!("element.{} = {}\n", e, self.elements[e.index()]));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.missing_token.is_empty() {
            return Err(Error::Config {
                reason: "missing_token must be nonempty".into(),
            });
        }
        let mut seen = std::collections::HashSet::new();
        for col in &self.elements {
            if !seen.insert(col.as_str()) {
                return Err(Error::Config {
                    reason: format!("element column {col:?} mapped twice"),
                });
            }
        }
        Ok(())
    }

    fn summary(&self) -> String {
        format!(
            "id={:?} type={:?} elements=[{}] missing_token={:?}",
            self.id,
            self.sample_type,
            self.elements.join(","),
            self.missing_token
        )
    }
}

/// Row filters corresponding to the three experiment subsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubsetFilter {
    /// Keep every row, including syrup.
    Original,
    PureHoney,
    AdulteratedHoney,
}

impl SubsetFilter {
    fn retains(self, t: SampleType) -> bool {
        match self {
            SubsetFilter::Original => true,
            SubsetFilter::PureHoney => t == SampleType::PureHoney,
            SubsetFilter::AdulteratedHoney => t == SampleType::AdulteratedHoney,
        }
    }
}

impl fmt::Display for SubsetFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubsetFilter::Original => f.write_str("original"),
            SubsetFilter::PureHoney => f.write_str("pure"),
            SubsetFilter::AdulteratedHoney => f.write_str("adulterated"),
        }
    }
}

impl FromStr for SubsetFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "original" => Ok(SubsetFilter::Original),
            "pure" | "purehoney" => Ok(SubsetFilter::PureHoney),
            "adulterated" | "adulteratedhoney" | "impure" => Ok(SubsetFilter::AdulteratedHoney),
            other => Err(Error::Config {
                reason: format!("unknown subset {other:?}"),
            }),
        }
    }
}

fn parse_sample_type(raw: &str) -> Option<SampleType> {
    let norm: String = raw
        .chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .collect::<String>()
        .to_ascii_lowercase();
    match norm.as_str() {
        "pure" | "purehoney" | "honey" => Some(SampleType::PureHoney),
        "adulterated" | "adulteratedhoney" | "impure" | "impurehoney" | "fake" => {
            Some(SampleType::AdulteratedHoney)
        }
        "syrup" | "sugarsyrup" => Some(SampleType::Syrup),
        _ => None,
    }
}

/// Parses a delimited file into a [`Dataset`] using the given mapping.
///
/// Element cells equal to the missing token become not-detected markers;
/// anything else must parse as a finite number ≥ 0. Blank element cells are
/// rejected rather than treated as missing, so dirty files fail loudly.
pub fn parse_dataset(path: impl AsRef<Path>, mapping: &ColumnMapping) -> Result<Dataset> {
    let path = path.as_ref();
    mapping.validate()?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(mapping.delimiter as u8)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_path(path)?;

    let headers = reader.headers()?.clone();
    let index_of = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::UnmappedColumn {
                column: name.to_string(),
            })
    };

    let id_col = mapping.id.as_deref().map(index_of).transpose()?;
    let type_col = index_of(&mapping.sample_type)?;
    let botanical_col = index_of(&mapping.botanical)?;
    let region_col = index_of(&mapping.region)?;
    let level_col = index_of(&mapping.level)?;
    let mut element_cols = [0usize; ELEMENT_COUNT];
    for (i, col) in mapping.elements.iter().enumerate() {
        element_cols[i] = index_of(col)?;
    }

    let mut samples = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        let row = row_idx + 1; // 1-based data-row number

        let field = |i: usize| record.get(i).unwrap_or("");
        let text_field = |i: usize| -> Option<String> {
            let v = field(i);
            if v.is_empty() || v == mapping.missing_token {
                None
            } else {
                Some(v.to_string())
            }
        };

        let type_raw = field(type_col);
        let sample_type = parse_sample_type(type_raw).ok_or_else(|| Error::MalformedCell {
            row,
            column: mapping.sample_type.clone(),
            value: type_raw.to_string(),
        })?;

        let mut values = [None; ELEMENT_COUNT];
        for (i, &col) in element_cols.iter().enumerate() {
            let cell = field(col);
            if cell == mapping.missing_token {
                continue;
            }
            let parsed: f64 = cell.parse().map_err(|_| Error::MalformedCell {
                row,
                column: mapping.elements[i].clone(),
                value: cell.to_string(),
            })?;
            if !parsed.is_finite() || parsed < 0.0 {
                return Err(Error::MalformedCell {
                    row,
                    column: mapping.elements[i].clone(),
                    value: cell.to_string(),
                });
            }
            values[i] = Some(parsed);
        }

        let id = match id_col {
            Some(c) => {
                let v = field(c);
                if v.is_empty() {
                    return Err(Error::InvalidSample {
                        row,
                        reason: "empty id cell".into(),
                    });
                }
                v.to_string()
            }
            None => row.to_string(),
        };

        // Syrup rows carry no origin labels; whatever sits in those columns
        // is a type marker, not a class, so it is dropped.
        let (botanical, region) = match sample_type {
            SampleType::Syrup => (None, None),
            _ => (text_field(botanical_col), text_field(region_col)),
        };

        let sample = Sample {
            id,
            sample_type,
            botanical,
            region,
            level: text_field(level_col),
            minerals: MineralVector::new(values).map_err(|e| match e {
                Error::MalformedCell { column, value, .. } => {
                    Error::MalformedCell { row, column, value }
                }
                other => other,
            })?,
        };
        sample
            .validate()
            .map_err(|reason| Error::InvalidSample { row, reason })?;
        samples.push(sample);
    }

    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }

    Dataset::new(
        samples,
        Provenance {
            source: path.display().to_string(),
            mapping: mapping.summary(),
            filters: vec![],
        },
    )
}

/// Writes a dataset back out in the mapped column layout.
///
/// Together with [`parse_dataset`] this round-trips: re-parsing the emitted
/// file yields sample-identical data. Present values are written with
/// shortest-round-trip float formatting.
pub fn write_dataset(
    ds: &Dataset,
    path: impl AsRef<Path>,
    mapping: &ColumnMapping,
) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .delimiter(mapping.delimiter as u8)
        .from_path(path.as_ref())
        .map_err(|e| Error::UnwritablePath {
            path: path.as_ref().to_path_buf(),
            source: std::io::Error::other(e),
        })?;

    let mut header: Vec<&str> = Vec::new();
    if let Some(id) = &mapping.id {
        header.push(id);
    }
    header.push(&mapping.sample_type);
    header.push(&mapping.botanical);
    header.push(&mapping.region);
    header.push(&mapping.level);
    for col in &mapping.elements {
        header.push(col);
    }
    writer.write_record(&header)?;

    for sample in ds.samples() {
        let mut record: Vec<String> = Vec::with_capacity(header.len());
        if mapping.id.is_some() {
            record.push(sample.id.clone());
        }
        record.push(sample.sample_type.to_string());
        record.push(sample.botanical.clone().unwrap_or_default());
        record.push(sample.region.clone().unwrap_or_default());
        record.push(sample.level.clone().unwrap_or_default());
        for v in sample.minerals.values() {
            record.push(match v {
                Some(x) => format!("{x}"),
                None => mapping.missing_token.clone(),
            });
        }
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Retains exactly the rows matching the filter, preserving order.
pub fn filter_subset(ds: &Dataset, filter: SubsetFilter) -> Result<Dataset> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let samples: Vec<Sample> = ds
        .samples()
        .iter()
        .filter(|s| filter.retains(s.sample_type))
        .cloned()
        .collect();
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let out = Dataset::new(samples, ds.provenance().clone())?;
    Ok(out.with_filter_note(&format!("subset={filter}")))
}

/// Materializes the feature matrix and labels for a task.
///
/// Botanical tasks label honey rows with their floral source and syrup rows
/// with the literal class [`SYRUP_CLASS`]; geographical tasks label rows
/// with their region and fail if any retained row lacks one. The feature
/// columns are the canonical elements, optionally restricted (in canonical
/// order) to `feature_filter`.
pub fn build_task(
    ds: &Dataset,
    kind: TaskKind,
    feature_filter: Option<&[Element]>,
) -> Result<TaskTable> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let elements: Vec<Element> = match feature_filter {
        Some(subset) => Element::ALL
            .iter()
            .copied()
            .filter(|e| subset.contains(e))
            .collect(),
        None => Element::ALL.to_vec(),
    };
    if elements.is_empty() {
        return Err(Error::Config {
            reason: "feature filter removes every element".into(),
        });
    }

    let mut label_names = Vec::with_capacity(ds.len());
    for sample in ds.samples() {
        let label = match kind {
            TaskKind::Botanical => match sample.sample_type {
                SampleType::Syrup => SYRUP_CLASS.to_string(),
                _ => sample
                    .botanical
                    .clone()
                    .ok_or_else(|| Error::MissingLabel {
                        id: sample.id.clone(),
                        what: "botanical".into(),
                    })?,
            },
            TaskKind::Geographical => {
                sample.region.clone().ok_or_else(|| Error::MissingLabel {
                    id: sample.id.clone(),
                    what: "region".into(),
                })?
            }
        };
        label_names.push(label);
    }

    let classes = canonical_classes(label_names.iter());
    let class_index: HashMap<&str, usize> = classes
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    if classes.len() < 2 {
        return Err(Error::SingleClass);
    }

    let n = ds.len();
    let d = elements.len();
    let mut cells = Vec::with_capacity(n * d);
    for sample in ds.samples() {
        for &e in &elements {
            cells.push(sample.minerals.get(e));
        }
    }
    let labels = label_names
        .iter()
        .map(|name| class_index[name.as_str()])
        .collect();

    TaskTable::new(
        cells,
        n,
        d,
        labels,
        classes,
        kind,
        elements.iter().map(|e| e.symbol().to_string()).collect(),
        ds.samples().iter().map(|s| s.id.clone()).collect(),
    )
}
