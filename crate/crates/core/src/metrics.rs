//! Hard partitions, clustering objectives and the Adjusted Rand Index.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::MetricsError;

/// Assignment of each of `n` points to exactly one of `k` clusters.
///
/// A single id per point makes clusters pairwise disjoint, and the
/// assignment vector covering every point makes their union the whole
/// dataset. Non-emptiness is not guaranteed by construction; see
/// [`Partition::no_empty`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    assignment: Vec<usize>,
    k: usize,
}

impl Partition {
    pub fn new(assignment: Vec<usize>, k: usize) -> Result<Self, MetricsError> {
        if let Some((point, &id)) = assignment.iter().enumerate().find(|(_, &id)| id >= k) {
            return Err(MetricsError::OutOfRange { point, id, k });
        }
        Ok(Self { assignment, k })
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }

    /// True when every cluster id in `0..k` has at least one member.
    pub fn no_empty(&self) -> bool {
        self.cluster_sizes().iter().all(|&s| s > 0)
    }

    /// Checks that this is a valid hard partition of `n` points with no
    /// empty cluster.
    pub fn validate(&self, n: usize) -> Result<(), MetricsError> {
        if self.assignment.len() != n {
            return Err(MetricsError::LengthMismatch(self.assignment.len(), n));
        }
        if let Some((point, &id)) = self.assignment.iter().enumerate().find(|(_, &id)| id >= self.k) {
            return Err(MetricsError::OutOfRange { point, id, k: self.k });
        }
        match self.cluster_sizes().iter().position(|&s| s == 0) {
            Some(c) => Err(MetricsError::EmptyCluster(c)),
            None => Ok(()),
        }
    }

    pub(crate) fn set(&mut self, point: usize, cluster: usize) {
        debug_assert!(cluster < self.k);
        self.assignment[point] = cluster;
    }
}

impl AsRef<[usize]> for Partition {
    fn as_ref(&self) -> &[usize] {
        &self.assignment
    }
}

/// Point-to-centroid distance. Only Euclidean is provided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distance {
    #[default]
    Euclidean,
}

impl Distance {
    pub fn eval(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Distance::Euclidean => squared_euclidean(a, b).sqrt(),
        }
    }
}

#[inline]
pub fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    squared_euclidean(a, b).sqrt()
}

/// Index of the nearest centroid; ties go to the lowest index.
pub fn nearest_centroid(point: &[f64], centroids: ArrayView2<'_, f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.rows().into_iter().enumerate() {
        let dist = squared_euclidean(point, c.as_slice().expect("contiguous centroid row"));
        if dist < best.1 {
            best = (j, dist);
        }
    }
    best
}

/// Assigns every point to its nearest centroid, ties to the lowest index.
pub fn assign_nearest(
    points: ArrayView2<'_, f64>,
    centroids: ArrayView2<'_, f64>,
    distance: Distance,
) -> Partition {
    assert!(centroids.nrows() >= 1, "need at least one centroid");
    assert_eq!(points.ncols(), centroids.ncols(), "dimension mismatch");
    let centroids = centroids.as_standard_layout();
    let points = points.as_standard_layout();
    let assignment = match distance {
        // squared distance preserves the ordering and skips the sqrt
        Distance::Euclidean => points
            .rows()
            .into_iter()
            .map(|p| nearest_centroid(p.as_slice().expect("contiguous"), centroids.view()).0)
            .collect(),
    };
    Partition {
        assignment,
        k: centroids.nrows(),
    }
}

/// Mean over non-empty clusters of the mean Euclidean distance between each
/// member and its centroid.
pub fn quantization_error(
    points: ArrayView2<'_, f64>,
    centroids: ArrayView2<'_, f64>,
    partition: &Partition,
) -> Result<f64, MetricsError> {
    assert_eq!(partition.k(), centroids.nrows(), "partition k != centroid count");
    let k = partition.k();
    let mut sums = vec![0.0; k];
    let mut counts = vec![0usize; k];
    for (p, &c) in points.rows().into_iter().zip(partition.assignment()) {
        sums[c] += p
            .iter()
            .zip(centroids.row(c).iter())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        counts[c] += 1;
    }
    let (total, used) = sums
        .iter()
        .zip(&counts)
        .filter(|(_, &n)| n > 0)
        .fold((0.0, 0usize), |(t, u), (s, &n)| (t + s / n as f64, u + 1));
    if used == 0 {
        return Err(MetricsError::AllEmpty);
    }
    Ok(total / used as f64)
}

/// Sum of squared Euclidean distances from each point to its centroid.
pub fn sse(points: ArrayView2<'_, f64>, centroids: ArrayView2<'_, f64>, partition: &Partition) -> f64 {
    points
        .rows()
        .into_iter()
        .zip(partition.assignment())
        .map(|(p, &c)| {
            p.iter()
                .zip(centroids.row(c).iter())
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
        })
        .sum()
}

/// Mean of each cluster's members. Empty clusters keep the row from
/// `fallback`.
pub fn cluster_means(
    points: ArrayView2<'_, f64>,
    partition: &Partition,
    fallback: ArrayView2<'_, f64>,
) -> Array2<f64> {
    let k = partition.k();
    let d = points.ncols();
    let mut sums = Array2::<f64>::zeros((k, d));
    let mut counts = vec![0usize; k];
    for (p, &c) in points.rows().into_iter().zip(partition.assignment()) {
        let mut row = sums.row_mut(c);
        row += &p;
        counts[c] += 1;
    }
    for (c, mut row) in sums.rows_mut().into_iter().enumerate() {
        if counts[c] == 0 {
            row.assign(&fallback.row(c));
        } else {
            row /= counts[c] as f64;
        }
    }
    sums
}

/// Cross-tabulation of two labelings of the same points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contingency {
    pub table: Vec<Vec<u64>>,
    pub row_sums: Vec<u64>,
    pub col_sums: Vec<u64>,
    pub n: u64,
}

impl Contingency {
    pub fn new(a: &[usize], b: &[usize]) -> Result<Self, MetricsError> {
        if a.len() != b.len() {
            return Err(MetricsError::LengthMismatch(a.len(), b.len()));
        }
        // relabel densely so sparse ids don't blow up the table
        let a = densify(a);
        let b = densify(b);
        let rows = a.iter().max().map_or(0, |m| m + 1);
        let cols = b.iter().max().map_or(0, |m| m + 1);
        let mut table = vec![vec![0u64; cols]; rows];
        let mut row_sums = vec![0u64; rows];
        let mut col_sums = vec![0u64; cols];
        for (&i, &j) in a.iter().zip(&b) {
            table[i][j] += 1;
            row_sums[i] += 1;
            col_sums[j] += 1;
        }
        Ok(Self {
            table,
            row_sums,
            col_sums,
            n: a.len() as u64,
        })
    }
}

fn densify(labels: &[usize]) -> Vec<usize> {
    let mut ids = std::collections::HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = ids.len();
            *ids.entry(*l).or_insert(next)
        })
        .collect()
}

fn pairs(m: u64) -> u128 {
    let m = m as u128;
    m * m.saturating_sub(1) / 2
}

/// Adjusted Rand Index (Hubert–Arabie) between two labelings.
///
/// Computed in exact integer arithmetic up to a single final division, so
/// the result is exactly symmetric and invariant to relabeling. When the
/// maximum and expected indices coincide (both labelings trivial) the
/// labelings are identical and 1 is returned.
pub fn adjusted_rand_index(a: impl AsRef<[usize]>, b: impl AsRef<[usize]>) -> Result<f64, MetricsError> {
    let (a, b) = (a.as_ref(), b.as_ref());
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(MetricsError::TooFewPoints(a.len()));
    }
    let ct = Contingency::new(a, b)?;
    let index: u128 = ct.table.iter().flatten().map(|&c| pairs(c)).sum();
    let sum_a: u128 = ct.row_sums.iter().map(|&c| pairs(c)).sum();
    let sum_b: u128 = ct.col_sums.iter().map(|&c| pairs(c)).sum();
    let total = pairs(ct.n);

    // (index - a*b/N) / ((a+b)/2 - a*b/N), scaled by 2N
    let num = 2 * index as i128 * total as i128 - 2 * (sum_a * sum_b) as i128;
    let den = ((sum_a + sum_b) * total) as i128 - 2 * (sum_a * sum_b) as i128;
    if den == 0 {
        return Ok(1.0);
    }
    Ok(num as f64 / den as f64)
}
