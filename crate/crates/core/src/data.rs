//! Dataset ingestion, synthetic blob generation and min-max normalization.

use std::collections::HashMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use rand::SeedableRng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::DataError;

/// A set of `n` points in `d` dimensions with optional ground-truth labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    points: Array2<f64>,
    labels: Option<Vec<usize>>,
    label_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset, checking shape and finiteness.
    pub fn new(
        name: impl Into<String>,
        points: Array2<f64>,
        labels: Option<Vec<usize>>,
    ) -> Result<Self, DataError> {
        let (n, d) = points.dim();
        if n == 0 || d == 0 {
            return Err(DataError::Empty);
        }
        if let Some((idx, _)) = points.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(DataError::NonFinite {
                row: idx / d,
                col: idx % d,
            });
        }
        let label_names = match &labels {
            Some(l) => {
                if l.len() != n {
                    return Err(DataError::LabelLength {
                        expected: n,
                        found: l.len(),
                    });
                }
                let classes = l.iter().max().map_or(0, |m| m + 1);
                (0..classes).map(|c| c.to_string()).collect()
            }
            None => Vec::new(),
        };
        // standard layout lets `point` hand out plain slices
        let points = if points.is_standard_layout() {
            points
        } else {
            points.as_standard_layout().to_owned()
        };
        Ok(Self {
            name: name.into(),
            points,
            labels,
            label_names,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn points(&self) -> &Array2<f64> {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.points.as_slice().expect("standard layout")[i * d..(i + 1) * d]
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    /// Original label strings indexed by label id.
    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    /// Number of distinct classes, if labelled.
    pub fn num_classes(&self) -> Option<usize> {
        self.labels.as_ref().map(|_| self.label_names.len())
    }

    /// Per-feature minimum and maximum over all points.
    pub fn bounding_box(&self) -> BoundingBox {
        let min = self
            .points
            .columns()
            .into_iter()
            .map(|c| c.fold(f64::INFINITY, |a, &b| a.min(b)))
            .collect();
        let max = self
            .points
            .columns()
            .into_iter()
            .map(|c| c.fold(f64::NEG_INFINITY, |a, &b| a.max(b)))
            .collect();
        BoundingBox { min, max }
    }

    /// Writes the dataset as CSV with a header row. Labels, when present,
    /// go into a trailing `label` column using their original names.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<(), DataError> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|source| DataError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut out = std::io::BufWriter::new(file);
        let io_err = |source| DataError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut header: Vec<String> = (0..self.dim()).map(|j| format!("x{j}")).collect();
        if self.labels.is_some() {
            header.push("label".into());
        }
        writeln!(out, "{}", header.join(",")).map_err(io_err)?;
        for (i, row) in self.points.rows().into_iter().enumerate() {
            // `{}` on f64 prints the shortest representation that round-trips
            let mut cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            if let Some(labels) = &self.labels {
                cells.push(self.label_names[labels[i]].clone());
            }
            writeln!(out, "{}", cells.join(",")).map_err(io_err)?;
        }
        out.flush().map_err(io_err)
    }
}

/// Per-dimension search-space bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl BoundingBox {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Self {
        assert_eq!(min.len(), max.len(), "bounding box dimension mismatch");
        assert!(
            min.iter().zip(&max).all(|(lo, hi)| lo <= hi),
            "bounding box has min > max"
        );
        Self { min, max }
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn extent(&self, j: usize) -> f64 {
        self.max[j] - self.min[j]
    }

    /// Repeats the box `times` times, for flat encodings of several
    /// centroids laid out one after another.
    pub fn tile(&self, times: usize) -> BoundingBox {
        BoundingBox {
            min: self.min.repeat(times),
            max: self.max.repeat(times),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.min.iter().zip(&self.max))
                .all(|(v, (lo, hi))| lo <= v && v <= hi)
    }
}

/// Which column of a CSV file holds the class labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    /// Zero-based column index.
    Index(usize),
    /// Header name; requires a header row. `"last"` selects the last column.
    Name(String),
}

impl Default for LabelColumn {
    fn default() -> Self {
        Self::last()
    }
}

impl LabelColumn {
    pub fn last() -> Self {
        LabelColumn::Name("last".into())
    }

    fn resolve(&self, header: Option<&csv::StringRecord>, width: usize) -> Result<usize, DataError> {
        match self {
            LabelColumn::Index(i) if *i < width => Ok(*i),
            LabelColumn::Index(i) => Err(DataError::LabelColumn(format!(
                "index {i} out of range for {width} columns"
            ))),
            LabelColumn::Name(name) if name == "last" => Ok(width - 1),
            LabelColumn::Name(name) => header
                .and_then(|h| h.iter().position(|c| c.trim() == name))
                .ok_or_else(|| DataError::LabelColumn(format!("no column named {name:?}"))),
        }
    }
}

/// Reads a comma-separated file. Every non-label cell must parse as a
/// finite real. Label strings are mapped to dense ids in first-occurrence
/// order.
pub fn load_csv(
    path: impl AsRef<Path>,
    label_column: Option<&LabelColumn>,
    has_header: bool,
) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let header = if has_header {
        Some(reader.headers()?.clone())
    } else {
        None
    };

    let mut width: Option<usize> = None;
    let mut label_idx: Option<usize> = None;
    let mut values: Vec<f64> = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    let mut rows = 0usize;

    for (r, record) in reader.records().enumerate() {
        let record = record?;
        // 1-based line number in the file, for error messages
        let line = r + 1 + usize::from(has_header);
        if record.len() == 1 && record.get(0).is_some_and(str::is_empty) {
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(DataError::Ragged {
                line,
                expected: w,
                found: record.len(),
            });
        }
        if label_idx.is_none() {
            if let Some(lc) = label_column {
                label_idx = Some(lc.resolve(header.as_ref(), w)?);
            }
        }
        for (c, cell) in record.iter().enumerate() {
            if Some(c) == label_idx {
                raw_labels.push(cell.to_string());
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| DataError::NotNumeric {
                line,
                col: c + 1,
                cell: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(DataError::NotNumeric {
                    line,
                    col: c + 1,
                    cell: cell.to_string(),
                });
            }
            values.push(v);
        }
        rows += 1;
    }

    let width = width.ok_or(DataError::Empty)?;
    let d = width - usize::from(label_idx.is_some());
    if rows == 0 || d == 0 {
        return Err(DataError::Empty);
    }
    let points = Array2::from_shape_vec((rows, d), values).expect("row widths checked");

    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());

    if label_idx.is_none() {
        return Dataset::new(name, points, None);
    }

    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut names = Vec::new();
    let labels = raw_labels
        .into_iter()
        .map(|s| {
            let next = ids.len();
            *ids.entry(s.clone()).or_insert_with(|| {
                names.push(s);
                next
            })
        })
        .collect();
    let mut ds = Dataset::new(name, points, Some(labels))?;
    ds.label_names = names;
    Ok(ds)
}

/// Rescales every feature linearly onto [0, 1]. Constant features map to 0.
/// Returns the original per-feature bounds.
pub fn normalize_minmax(ds: &Dataset) -> (Dataset, BoundingBox) {
    let bounds = ds.bounding_box();
    let mut points = ds.points.clone();
    for (j, mut col) in points.columns_mut().into_iter().enumerate() {
        let lo = bounds.min[j];
        let extent = bounds.extent(j);
        col.mapv_inplace(|v| if extent > 0.0 { (v - lo) / extent } else { 0.0 });
    }
    let out = Dataset {
        name: ds.name.clone(),
        points,
        labels: ds.labels.clone(),
        label_names: ds.label_names.clone(),
    };
    (out, bounds)
}

/// Isotropic Gaussian blobs. Centers are uniform in [0,1]^d and points are
/// emitted cluster by cluster, labelled with their generating component.
pub fn generate_blobs(
    k: usize,
    per_cluster: usize,
    d: usize,
    spread: f64,
    seed: u64,
) -> Result<Dataset, DataError> {
    if k == 0 || per_cluster == 0 || d == 0 {
        return Err(DataError::InvalidGenerator(format!(
            "k, per_cluster and d must be >= 1 (got k={k}, per_cluster={per_cluster}, d={d})"
        )));
    }
    if !(spread > 0.0 && spread.is_finite()) {
        return Err(DataError::InvalidGenerator(format!(
            "spread must be positive and finite, got {spread}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
        .collect();
    let noise = Normal::new(0.0, spread).expect("spread validated");
    let n = k * per_cluster;
    let mut values = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..per_cluster {
            values.extend(center.iter().map(|m| m + noise.sample(&mut rng)));
            labels.push(c);
        }
    }
    let points = Array2::from_shape_vec((n, d), values).expect("shape");
    Dataset::new(format!("blobs-k{k}-d{d}-s{seed}"), points, Some(labels))
}
