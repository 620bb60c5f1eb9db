//! Missing-value imputation and min-max normalization.
//!
//! Not-detected readings mean the element was absent, so they impute to
//! zero. Features are then rescaled to [0, 1] via per-feature min-max.
//! The scaler can be fitted on the whole table (the reproduction default)
//! or refitted per training fold (leakage-free); see [`PreprocessMode`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::TaskTable;
use crate::error::{Error, Result};

/// Scope on which the min-max scaler statistics are fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PreprocessMode {
    /// Fit on the full task table before cross-validation. Test folds then
    /// share the training statistics, which mirrors the usual workbench
    /// workflow and keeps every normalized value inside [0, 1].
    GlobalFit,
    /// Fit on each training fold only. Held-out values may fall outside
    /// [0, 1]; they are deliberately not clamped.
    PerFoldFit,
}

impl fmt::Display for PreprocessMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PreprocessMode::GlobalFit => f.write_str("global"),
            PreprocessMode::PerFoldFit => f.write_str("per-fold"),
        }
    }
}

impl FromStr for PreprocessMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "global" | "globalfit" => Ok(PreprocessMode::GlobalFit),
            "per-fold" | "perfold" | "perfoldfit" => Ok(PreprocessMode::PerFoldFit),
            other => Err(Error::Config {
                reason: format!("unknown preprocess mode {other:?}"),
            }),
        }
    }
}

/// Replaces every not-detected cell with 0.0 and leaves the rest untouched.
pub fn impute_missing(table: &TaskTable) -> TaskTable {
    table.fill_missing(0.0)
}

/// Per-feature min/max statistics for normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    mins: Vec<f64>,
    maxs: Vec<f64>,
    /// Row indices the statistics were computed over, for provenance.
    fitted_on: Vec<usize>,
}

impl MinMaxScaler {
    /// Computes per-feature min/max over the selected rows.
    ///
    /// The table must already be imputed; `rows` must be nonempty.
    pub fn fit(table: &TaskTable, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyRowSet);
        }
        let missing = table.missing_count();
        if missing > 0 {
            return Err(Error::MissingValues { count: missing });
        }
        let d = table.n_features();
        let mut mins = vec![f64::INFINITY; d];
        let mut maxs = vec![f64::NEG_INFINITY; d];
        for &r in rows {
            for c in 0..d {
                let v = table.cell(r, c).unwrap();
                mins[c] = mins[c].min(v);
                maxs[c] = maxs[c].max(v);
            }
        }
        Ok(MinMaxScaler {
            mins,
            maxs,
            fitted_on: rows.to_vec(),
        })
    }

    /// Fits over every row of the table.
    pub fn fit_all(table: &TaskTable) -> Result<Self> {
        let rows: Vec<usize> = (0..table.n_rows()).collect();
        Self::fit(table, &rows)
    }

    pub fn mins(&self) -> &[f64] {
        &self.mins
    }

    pub fn maxs(&self) -> &[f64] {
        &self.maxs
    }

    pub fn fitted_on(&self) -> &[usize] {
        &self.fitted_on
    }

    /// Maps a single raw value through feature `c`'s affine rescaling.
    ///
    /// A constant feature (max = min) maps to 0.0. Values outside the
    /// fitted range are not clamped and so can leave [0, 1].
    #[inline]
    pub fn scale_value(&self, c: usize, x: f64) -> f64 {
        let (min, max) = (self.mins[c], self.maxs[c]);
        if max == min {
            0.0
        } else {
            (x - min) / (max - min)
        }
    }

    /// Applies the rescaling to every present cell of the table.
    pub fn apply(&self, table: &TaskTable) -> TaskTable {
        assert_eq!(table.n_features(), self.mins.len(), "feature count mismatch");
        table.map_cells(|c, x| self.scale_value(c, x))
    }

    /// Serializes to the small `key = value` artifact embedded in reports.
    pub fn to_kv_string(&self) -> String {
        let mut out = String::from("# min-max scaler\n");
        out.push_str(&format!("features = {}\n", self.mins.len()));
        out.push_str(&format!("fitted_rows = {}\n", self.fitted_on.len()));
        for (i, (min, max)) in self.mins.iter().zip(&self.maxs).enumerate() {
            out.push_str(&format!("min.{i} = {min}\nmax.{i} = {max}\n"));
        }
        out
    }

    /// Parses the artifact produced by [`MinMaxScaler::to_kv_string`].
    pub fn from_kv_string(text: &str) -> Result<Self> {
        let mut pairs = std::collections::HashMap::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some((k, v)) = line.split_once('=') {
                pairs.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        let features: usize = pairs
            .get("features")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Config {
                reason: "scaler artifact lacks a features count".into(),
            })?;
        let mut mins = Vec::with_capacity(features);
        let mut maxs = Vec::with_capacity(features);
        for i in 0..features {
            let get = |key: String| -> Result<f64> {
                pairs
                    .get(&key)
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| Error::Config {
                        reason: format!("scaler artifact lacks {key}"),
                    })
            };
            mins.push(get(format!("min.{i}"))?);
            maxs.push(get(format!("max.{i}"))?);
        }
        Ok(MinMaxScaler {
            mins,
            maxs,
            fitted_on: vec![],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{TaskKind, TaskTable};
    use approx::assert_relative_eq;

    fn table(cells: Vec<Option<f64>>, labels: Vec<usize>, d: usize) -> TaskTable {
        let n = labels.len();
        let classes = vec!["A".to_string(), "B".to_string()];
        TaskTable::new(
            cells,
            n,
            d,
            labels,
            classes,
            TaskKind::Botanical,
            (0..d).map(|i| format!("f{i}")).collect(),
            (0..n).map(|i| format!("r{i}")).collect(),
        )
        .unwrap()
    }

    #[test]
    fn imputation_replaces_only_missing() {
        let t = table(
            vec![Some(2.0), None, None, Some(5.0)],
            vec![0, 1],
            2,
        );
        let imputed = impute_missing(&t);
        assert_eq!(imputed.missing_count(), 0);
        assert_eq!(imputed.cell(0, 0), Some(2.0));
        assert_eq!(imputed.cell(0, 1), Some(0.0));
        assert_eq!(imputed.cell(1, 0), Some(0.0));
        assert_eq!(imputed.cell(1, 1), Some(5.0));
    }

    #[test]
    fn imputation_is_identity_without_missing() {
        let t = table(vec![Some(1.0), Some(2.0)], vec![0, 1], 1);
        assert_eq!(impute_missing(&t), t);
    }

    #[test]
    fn fully_missing_feature_becomes_zero_column() {
        let t = table(vec![None, None], vec![0, 1], 1);
        let imputed = impute_missing(&t);
        assert_eq!(imputed.cell(0, 0), Some(0.0));
        assert_eq!(imputed.cell(1, 0), Some(0.0));
    }

    #[test]
    fn fit_computes_exact_min_max() {
        let t = table(
            vec![Some(2.0), Some(4.0), Some(6.0)],
            vec![0, 1, 0],
            1,
        );
        let scaler = MinMaxScaler::fit_all(&t).unwrap();
        assert_eq!(scaler.mins(), &[2.0]);
        assert_eq!(scaler.maxs(), &[6.0]);
    }

    #[test]
    fn fit_single_row_degenerates_to_that_row() {
        let t = table(vec![Some(3.0), Some(9.0)], vec![0, 1], 1);
        let scaler = MinMaxScaler::fit(&t, &[1]).unwrap();
        assert_eq!(scaler.mins(), &[9.0]);
        assert_eq!(scaler.maxs(), &[9.0]);
    }

    #[test]
    fn imputed_zeros_participate_in_min() {
        let t = impute_missing(&table(vec![None, Some(5.0)], vec![0, 1], 1));
        let scaler = MinMaxScaler::fit_all(&t).unwrap();
        assert_eq!(scaler.mins(), &[0.0]);
        assert_eq!(scaler.maxs(), &[5.0]);
    }

    #[test]
    fn fit_requires_rows_and_imputation() {
        let t = table(vec![Some(1.0), Some(2.0)], vec![0, 1], 1);
        assert!(matches!(
            MinMaxScaler::fit(&t, &[]),
            Err(Error::EmptyRowSet)
        ));
        let with_missing = table(vec![None, Some(2.0)], vec![0, 1], 1);
        assert!(matches!(
            MinMaxScaler::fit_all(&with_missing),
            Err(Error::MissingValues { count: 1 })
        ));
    }

    #[test]
    fn eq1_arithmetic_and_boundaries() {
        let t = table(
            vec![Some(2.0), Some(4.0), Some(6.0)],
            vec![0, 1, 0],
            1,
        );
        let scaler = MinMaxScaler::fit_all(&t).unwrap();
        assert_relative_eq!(scaler.scale_value(0, 4.0), 0.5);
        assert_relative_eq!(scaler.scale_value(0, 2.0), 0.0);
        assert_relative_eq!(scaler.scale_value(0, 6.0), 1.0);
    }

    #[test]
    fn constant_feature_maps_to_zero() {
        let t = table(vec![Some(7.0), Some(7.0)], vec![0, 1], 1);
        let scaler = MinMaxScaler::fit_all(&t).unwrap();
        assert_eq!(scaler.scale_value(0, 7.0), 0.0);
        // even off-range inputs collapse to 0.0 for a constant feature
        assert_eq!(scaler.scale_value(0, 123.0), 0.0);
    }

    #[test]
    fn no_clamping_outside_fitted_range() {
        let t = table(vec![Some(0.0), Some(10.0)], vec![0, 1], 1);
        let scaler = MinMaxScaler::fit(&t, &[0, 1]).unwrap();
        assert_relative_eq!(scaler.scale_value(0, 20.0), 2.0);
        assert_relative_eq!(scaler.scale_value(0, -10.0), -1.0);
    }

    #[test]
    fn kv_artifact_roundtrip() {
        let t = table(
            vec![Some(2.0), Some(4.5), Some(0.125), Some(9.0)],
            vec![0, 1],
            2,
        );
        let scaler = MinMaxScaler::fit_all(&t).unwrap();
        let text = scaler.to_kv_string();
        let back = MinMaxScaler::from_kv_string(&text).unwrap();
        assert_eq!(scaler.mins(), back.mins());
        assert_eq!(scaler.maxs(), back.maxs());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn global_fit_output_in_unit_interval(
                raw in proptest::collection::vec(
                    proptest::option::weighted(0.8, 0.0f64..1e4), 8..60)
            ) {
                let d = 4;
                let n = raw.len() / d;
                prop_assume!(n >= 2);
                let cells = raw[..n * d].to_vec();
                let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
                let t = impute_missing(&table(cells, labels, d));
                let scaler = MinMaxScaler::fit_all(&t).unwrap();
                let scaled = scaler.apply(&t);
                for r in 0..n {
                    for c in 0..d {
                        let v = scaled.cell(r, c).unwrap();
                        prop_assert!((0.0..=1.0).contains(&v), "out of range: {v}");
                    }
                }
            }

            #[test]
            fn normalization_invariant_to_positive_affine_rescaling(
                base in proptest::collection::vec(0.0f64..100.0, 6),
                scale in 0.01f64..50.0,
                shift in -100.0f64..100.0,
            ) {
                let cells: Vec<Option<f64>> = base.iter().map(|&v| Some(v)).collect();
                let t = table(cells, vec![0, 1, 0, 1, 0, 1], 1);
                let scaler = MinMaxScaler::fit_all(&t).unwrap();
                let reference = scaler.apply(&t);

                let rescaled_cells: Vec<Option<f64>> =
                    base.iter().map(|&v| Some(v * scale + shift)).collect();
                let rt = table(rescaled_cells, vec![0, 1, 0, 1, 0, 1], 1);
                let rescaler = MinMaxScaler::fit_all(&rt).unwrap();
                let out = rescaler.apply(&rt);

                for r in 0..6 {
                    let a = reference.cell(r, 0).unwrap();
                    let b = out.cell(r, 0).unwrap();
                    prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
                }
            }

            #[test]
            fn refit_on_normalized_data_is_idempotent(
                base in proptest::collection::vec(0.0f64..100.0, 8)
            ) {
                let cells: Vec<Option<f64>> = base.iter().map(|&v| Some(v)).collect();
                let t = table(cells, vec![0, 1, 0, 1, 0, 1, 0, 1], 1);
                let first = MinMaxScaler::fit_all(&t).unwrap().apply(&t);
                let second = MinMaxScaler::fit_all(&first).unwrap().apply(&first);
                for r in 0..8 {
                    let a = first.cell(r, 0).unwrap();
                    let b = second.cell(r, 0).unwrap();
                    prop_assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }
}
