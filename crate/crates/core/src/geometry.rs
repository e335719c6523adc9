//! Points, datasets, random projection lines and point perturbation.

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Relative tolerance on the unit-norm invariant of [`RandomLine`].
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// A single observation with a stable id.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub id: usize,
    pub coords: Vec<f64>,
}

/// An immutable collection of `n` points in `R^d`, ids `0..n-1`.
///
/// Coordinates are stored row-major; `coords(id)` is the row for `id`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    d: usize,
    coords: Vec<f64>,
}

impl Dataset {
    /// Builds a dataset from rows; row order defines ids `0..n-1`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let d = rows[0].len();
        if d == 0 {
            return Err(Error::InvalidDimension);
        }
        let n = rows.len();
        let mut coords = Vec::with_capacity(n * d);
        for (id, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: row.len(),
                });
            }
            for (dim, &x) in row.iter().enumerate() {
                if !x.is_finite() {
                    return Err(Error::NonFiniteCoordinate { id, dim });
                }
                coords.push(x);
            }
        }
        Ok(Self { n, d, coords })
    }

    /// Builds a dataset from points whose ids must cover `0..n-1` exactly.
    pub fn from_points(mut points: Vec<Point>) -> Result<Self> {
        points.sort_by_key(|p| p.id);
        for (i, p) in points.iter().enumerate() {
            if p.id != i {
                return Err(Error::InvalidIds(format!(
                    "ids must cover 0..{} exactly, found id {} at rank {}",
                    points.len(),
                    p.id,
                    i
                )));
            }
        }
        Self::from_rows(points.into_iter().map(|p| p.coords).collect())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Coordinate row of point `id`.
    #[inline]
    pub fn coords(&self, id: usize) -> &[f64] {
        &self.coords[id * self.d..(id + 1) * self.d]
    }

    /// Euclidean distance between points `a` and `b`.
    #[inline]
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        self.distance_sq(a, b).sqrt()
    }

    /// Squared Euclidean distance between points `a` and `b`.
    #[inline]
    pub fn distance_sq(&self, a: usize, b: usize) -> f64 {
        let (pa, pb) = (self.coords(a), self.coords(b));
        let mut acc = 0.0;
        for i in 0..self.d {
            let diff = pa[i] - pb[i];
            acc += diff * diff;
        }
        acc
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.d)
    }
}

/// A direction on the unit sphere used for projections.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomLine {
    direction: Vec<f64>,
}

impl RandomLine {
    /// Wraps a direction vector, enforcing the unit-norm invariant.
    pub fn new(direction: Vec<f64>) -> Result<Self> {
        if direction.is_empty() {
            return Err(Error::InvalidDimension);
        }
        let norm = norm(&direction);
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::InvalidLength(norm));
        }
        Ok(Self { direction })
    }

    #[inline]
    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.direction.len()
    }
}

#[inline]
fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

/// Samples a rotation-invariant direction on the `d`-dimensional unit sphere
/// (normalized Gaussian vector).
pub fn sample_unit_vector(d: usize, rng: &mut RngStream) -> Result<RandomLine> {
    if d == 0 {
        return Err(Error::InvalidDimension);
    }
    let mut v = vec![0.0; d];
    loop {
        for x in v.iter_mut() {
            *x = rng.standard_normal();
        }
        let n = norm(&v);
        // A norm this small cannot be normalized accurately; resample.
        if n > 1e-100 {
            for x in v.iter_mut() {
                *x /= n;
            }
            // One renormalization pass keeps the norm within 1e-12 even for
            // large d, where the first division can be half an ulp off per
            // coordinate.
            let n2 = norm(&v);
            for x in v.iter_mut() {
                *x /= n2;
            }
            return RandomLine::new(v);
        }
    }
}

/// Projects a point onto a line: the dot product `coords . direction`.
pub fn project(coords: &[f64], line: &RandomLine) -> Result<f64> {
    if coords.len() != line.dim() {
        return Err(Error::DimensionMismatch {
            expected: line.dim(),
            got: coords.len(),
        });
    }
    Ok(dot(coords, line.direction()))
}

/// Displaces every point by an independent uniformly-directed vector of
/// exact length `l_per`. Ids are preserved positionally; `l_per == 0`
/// returns coordinates bit-identical to the input.
pub fn perturb(ds: &Dataset, l_per: f64, rng: &mut RngStream) -> Result<Dataset> {
    if !l_per.is_finite() || l_per < 0.0 {
        return Err(Error::InvalidLength(l_per));
    }
    if l_per == 0.0 {
        return Ok(ds.clone());
    }
    let d = ds.dim();
    let mut out = Vec::with_capacity(ds.len() * d);
    for id in 0..ds.len() {
        let dir = sample_unit_vector(d, rng)?;
        let p = ds.coords(id);
        for (x, u) in p.iter().zip(dir.direction()) {
            out.push(x + l_per * u);
        }
    }
    Ok(Dataset {
        n: ds.len(),
        d,
        coords: out,
    })
}
