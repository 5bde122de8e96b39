//! Finite metric spaces with exact distances, and the metric-axiom checker.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;

/// Index of a point within one space. Labels live on the space itself;
/// two ids are the same point exactly when their indices agree.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct PointId(pub usize);

impl PointId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One violated metric axiom together with the witnessing indices.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum MetricViolation {
    /// d(i,i) != 0
    Diagonal { i: usize, value: Scalar },
    /// d(i,j) != d(j,i)
    Symmetry { i: usize, j: usize },
    /// d(i,j) <= 0 with i != j
    Positivity { i: usize, j: usize, value: Scalar },
    /// d(i,k) > d(i,j) + d(j,k)
    Triangle { i: usize, j: usize, k: usize },
}

impl fmt::Display for MetricViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricViolation::Diagonal { i, value } => {
                write!(f, "(zero-diagonal) at ({i}): d({i},{i}) = {value}")
            }
            MetricViolation::Symmetry { i, j } => {
                write!(f, "(symmetry) at ({i},{j})")
            }
            MetricViolation::Positivity { i, j, value } => {
                write!(f, "(positivity) at ({i},{j}): d({i},{j}) = {value}")
            }
            MetricViolation::Triangle { i, j, k } => {
                write!(f, "(triangle) at ({i},{j},{k}): d({i},{k}) > d({i},{j}) + d({j},{k})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("distance matrix is not square: row {row} has {got} entries, expected {expected}")]
    NotSquare {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("{points} points but {rows} matrix rows")]
    DimensionMismatch { points: usize, rows: usize },
    #[error("a metric space needs at least one point")]
    Empty,
    #[error("duplicate point label `{0}`")]
    DuplicateLabel(String),
    #[error("metric axioms violated: {}", render_violations(.0))]
    Metric(Vec<MetricViolation>),
}

fn render_violations(violations: &[MetricViolation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Checks the four metric axioms on a raw square matrix.
///
/// Returns the full violation list in a deterministic order: diagonal,
/// symmetry, positivity, then triangle, each scanned in index order.
pub fn check_metric_axioms(dist: &[Vec<Scalar>]) -> Result<Vec<MetricViolation>, SpaceError> {
    let n = dist.len();
    for (row, entries) in dist.iter().enumerate() {
        if entries.len() != n {
            return Err(SpaceError::NotSquare {
                row,
                got: entries.len(),
                expected: n,
            });
        }
    }

    let mut violations = Vec::new();
    for i in 0..n {
        if !dist[i][i].is_zero() {
            violations.push(MetricViolation::Diagonal {
                i,
                value: dist[i][i].clone(),
            });
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if dist[i][j] != dist[j][i] {
                violations.push(MetricViolation::Symmetry { i, j });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && !dist[i][j].is_positive() {
                violations.push(MetricViolation::Positivity {
                    i,
                    j,
                    value: dist[i][j].clone(),
                });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if &dist[i][k] > &(&dist[i][j] + &dist[j][k]) {
                    violations.push(MetricViolation::Triangle { i, j, k });
                }
            }
        }
    }
    Ok(violations)
}

/// A nonempty finite metric space: labeled points plus an exact,
/// axiom-checked distance matrix. Immutable after construction.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    dist: Vec<Vec<Scalar>>,
}

impl FiniteMetricSpace {
    /// Validates the matrix against all four metric axioms; degenerate
    /// pseudo-metrics (zero distance between distinct points) are
    /// rejected here rather than merged.
    pub fn new(labels: Vec<String>, dist: Vec<Vec<Scalar>>) -> Result<Self, SpaceError> {
        if labels.is_empty() {
            return Err(SpaceError::Empty);
        }
        if labels.len() != dist.len() {
            return Err(SpaceError::DimensionMismatch {
                points: labels.len(),
                rows: dist.len(),
            });
        }
        let mut seen = BTreeSet::new();
        for label in &labels {
            if !seen.insert(label.clone()) {
                return Err(SpaceError::DuplicateLabel(label.clone()));
            }
        }
        let violations = check_metric_axioms(&dist)?;
        if !violations.is_empty() {
            return Err(SpaceError::Metric(violations));
        }
        Ok(FiniteMetricSpace { labels, dist })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> impl Iterator<Item = PointId> {
        (0..self.labels.len()).map(PointId)
    }

    pub fn dist(&self, x: PointId, y: PointId) -> &Scalar {
        &self.dist[x.0][y.0]
    }

    pub fn label(&self, x: PointId) -> &str {
        &self.labels[x.0]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn point_by_label(&self, label: &str) -> Option<PointId> {
        self.labels.iter().position(|l| l == label).map(PointId)
    }

    /// The induced metric space on a subset of points, labels preserved.
    /// Returns the subspace and the map from subspace index to original id.
    pub fn subspace(&self, members: &BTreeSet<PointId>) -> (FiniteMetricSpace, Vec<PointId>) {
        assert!(!members.is_empty(), "subspace of no points");
        let back: Vec<PointId> = members.iter().copied().collect();
        let labels = back.iter().map(|p| self.labels[p.0].clone()).collect();
        let dist = back
            .iter()
            .map(|a| back.iter().map(|b| self.dist(*a, *b).clone()).collect())
            .collect();
        // Submatrices of a metric satisfy the axioms; no re-check needed.
        (FiniteMetricSpace { labels, dist }, back)
    }

    /// Formats a point set as `{a, b, c}` using this space's labels.
    pub fn render_set(&self, set: &BTreeSet<PointId>) -> String {
        let inner = set
            .iter()
            .map(|p| self.label(*p))
            .collect::<Vec<_>>()
            .join(", ");
        format!("{{{inner}}}")
    }
}
