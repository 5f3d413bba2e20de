//! Point storage and the three supported norms.
//!
//! Every other module reaches the geometry through [`PointCloud`]. Points are
//! stored row-major in one flat buffer; a point is borrowed as a `&[f64]`.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Radius sentinel for the empty ball. Any containment test against it fails.
pub const EMPTY_RADIUS: f64 = f64::NEG_INFINITY;

/// The norm used to measure distances. All three are convex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MetricKind {
    #[default]
    L2,
    L1,
    Linf,
}

impl MetricKind {
    /// Distance between two coordinate slices of equal length.
    #[inline]
    pub fn dist(self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        let diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs());
        match self {
            MetricKind::L2 => diffs.map(|d| d * d).sum::<f64>().sqrt(),
            MetricKind::L1 => diffs.sum(),
            MetricKind::Linf => diffs.fold(0.0, f64::max),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::L2 => "l2",
            MetricKind::L1 => "l1",
            MetricKind::Linf => "linf",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l2" | "euclidean" => Ok(MetricKind::L2),
            "l1" | "manhattan" => Ok(MetricKind::L1),
            "linf" | "max" => Ok(MetricKind::Linf),
            other => Err(Error::usage(format!("unknown metric `{other}`"))),
        }
    }
}

/// A finite, non-empty set of points in `R^dim` together with a metric.
///
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    coords: Vec<f64>,
    dim: usize,
    metric: MetricKind,
}

impl PointCloud {
    /// Builds a cloud from rows. Fails on an empty input, ragged rows, a zero
    /// dimension or a non-finite coordinate.
    pub fn new(points: Vec<Vec<f64>>, metric: MetricKind) -> Result<Self> {
        let dim = match points.first() {
            Some(p) => p.len(),
            None => return Err(Error::usage("a point cloud needs at least one point")),
        };
        if dim == 0 {
            return Err(Error::usage("points must have at least one coordinate"));
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::usage(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            if let Some(x) = p.iter().find(|x| !x.is_finite()) {
                return Err(Error::usage(format!("point {i} has non-finite coordinate {x}")));
            }
            coords.extend_from_slice(p);
        }
        Ok(PointCloud { coords, dim, metric })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    /// Always false: a cloud holds at least one point.
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> MetricKind {
        self.metric
    }

    /// Same points measured with another metric.
    pub fn with_metric(&self, metric: MetricKind) -> PointCloud {
        PointCloud { metric, ..self.clone() }
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    /// Distance between points `i` and `j`. Panics on out-of-range indices;
    /// use [`PointCloud::try_distance`] for checked access.
    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.metric.dist(self.point(i), self.point(j))
    }

    pub fn try_distance(&self, i: usize, j: usize) -> Result<f64> {
        let n = self.len();
        if i >= n || j >= n {
            return Err(Error::usage(format!("index out of range: ({i}, {j}) with n = {n}")));
        }
        Ok(self.distance(i, j))
    }

    /// Distance from an arbitrary location to point `i`.
    #[inline]
    pub fn distance_to(&self, i: usize, x: &[f64]) -> f64 {
        self.metric.dist(self.point(i), x)
    }

    /// Closed-ball membership `d(x, p_center) <= radius`. The [`EMPTY_RADIUS`]
    /// sentinel never contains anything.
    pub fn ball_contains(&self, center: usize, radius: f64, x: &[f64]) -> Result<bool> {
        if center >= self.len() {
            return Err(Error::usage(format!("center index {center} out of range")));
        }
        if x.len() != self.dim {
            return Err(Error::usage(format!(
                "query point has {} coordinates, expected {}",
                x.len(),
                self.dim
            )));
        }
        Ok(radius != EMPTY_RADIUS && self.distance_to(center, x) <= radius)
    }

    /// Largest pairwise distance. Quadratic.
    pub fn diameter(&self) -> f64 {
        let n = self.len();
        let mut best = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                best = best.max(self.distance(i, j));
            }
        }
        best
    }

    /// A copy with the points rearranged so that position `k` holds the
    /// original point `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> PointCloud {
        let mut coords = Vec::with_capacity(order.len() * self.dim);
        for &i in order {
            coords.extend_from_slice(self.point(i));
        }
        PointCloud { coords, dim: self.dim, metric: self.metric }
    }

    /// Parses the point file format: one point per line, whitespace separated
    /// coordinates, `#` comment lines and blank lines skipped.
    pub fn read<R: BufRead>(reader: R, metric: MetricKind) -> Result<Self> {
        let mut rows = Vec::new();
        let mut arity = None;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let row = trimmed
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|e| Error::Parse {
                        line: lineno + 1,
                        msg: format!("bad coordinate `{tok}`: {e}"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            match arity {
                None => arity = Some(row.len()),
                Some(a) if a != row.len() => {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        msg: format!("expected {a} coordinates, found {}", row.len()),
                    })
                }
                _ => {}
            }
            rows.push(row);
        }
        PointCloud::new(rows, metric)
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        for p in self.points() {
            let line = p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}
