use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::Rat;

/// Fixed-length vector of rationals, indexed by element or variable id.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RatVec(Vec<Rat>);

impl RatVec {
    pub fn new(entries: Vec<Rat>) -> Self {
        RatVec(entries)
    }

    pub fn zeros(len: usize) -> Self {
        RatVec(vec![Rat::zero(); len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rat> {
        self.0.iter()
    }

    pub fn entries(&self) -> &[Rat] {
        &self.0
    }

    pub fn get(&self, i: usize) -> Option<&Rat> {
        self.0.get(i)
    }

    pub fn set(&mut self, i: usize, value: Rat) {
        self.0[i] = value;
    }

    fn check_len(&self, other: &RatVec) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(())
    }

    /// Exact inner product. Errors on length mismatch.
    pub fn dot(&self, other: &RatVec) -> Result<Rat> {
        self.check_len(other)?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum())
    }

    pub fn add(&self, other: &RatVec) -> Result<RatVec> {
        self.check_len(other)?;
        Ok(RatVec(
            self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn sub(&self, other: &RatVec) -> Result<RatVec> {
        self.check_len(other)?;
        Ok(RatVec(
            self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect(),
        ))
    }

    pub fn scale(&self, factor: &Rat) -> RatVec {
        RatVec(self.0.iter().map(|a| a * factor).collect())
    }

    pub fn sum(&self) -> Rat {
        self.0.iter().sum()
    }

    /// Sum of the entries at `ids`. Errors on an out-of-range id.
    pub fn sum_at(&self, ids: impl IntoIterator<Item = usize>) -> Result<Rat> {
        let mut total = Rat::zero();
        for id in ids {
            let entry = self.0.get(id).ok_or(Error::ElementOutOfRange {
                id,
                universe: self.0.len(),
            })?;
            total += entry;
        }
        Ok(total)
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(Rat::is_integer)
    }
}

impl Index<usize> for RatVec {
    type Output = Rat;
    fn index(&self, i: usize) -> &Rat {
        &self.0[i]
    }
}

impl fmt::Debug for RatVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl FromIterator<Rat> for RatVec {
    fn from_iter<I: IntoIterator<Item = Rat>>(iter: I) -> Self {
        RatVec(iter.into_iter().collect())
    }
}

impl IntoIterator for RatVec {
    type Item = Rat;
    type IntoIter = std::vec::IntoIter<Rat>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl<'a> IntoIterator for &'a RatVec {
    type Item = &'a Rat;
    type IntoIter = std::slice::Iter<'a, Rat>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Rectangular dense matrix of rationals, stored row-major. The column
/// count is explicit so zero-row matrices stay well-typed.
#[derive(Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: Vec<RatVec>,
    cols: usize,
}

impl RatMatrix {
    pub fn new(rows: Vec<RatVec>, cols: usize) -> Result<Self> {
        for row in &rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
        }
        Ok(RatMatrix { rows, cols })
    }

    pub fn zeros(nrows: usize, cols: usize) -> Self {
        RatMatrix {
            rows: vec![RatVec::zeros(cols); nrows],
            cols,
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &RatVec {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[RatVec] {
        &self.rows
    }

    pub fn entry(&self, i: usize, j: usize) -> &Rat {
        &self.rows[i][j]
    }

    pub fn column(&self, j: usize) -> RatVec {
        self.rows.iter().map(|r| r[j].clone()).collect()
    }

    /// `Mᵀ x`: one entry per column, `sum_i M[i][j] * x[i]`.
    pub fn transpose_mul(&self, x: &RatVec) -> Result<RatVec> {
        if x.len() != self.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.nrows(),
                found: x.len(),
            });
        }
        let mut out = vec![Rat::zero(); self.cols];
        for (row, xi) in self.rows.iter().zip(x.iter()) {
            if xi.is_zero() {
                continue;
            }
            for (j, entry) in row.iter().enumerate() {
                out[j] += &(entry * xi);
            }
        }
        Ok(RatVec::new(out))
    }

    /// Column sums over the rows indexed by `ids`.
    pub fn sum_rows_at(&self, ids: impl IntoIterator<Item = usize>) -> Result<RatVec> {
        let mut out = vec![Rat::zero(); self.cols];
        for id in ids {
            let row = self.rows.get(id).ok_or(Error::ElementOutOfRange {
                id,
                universe: self.rows.len(),
            })?;
            for (j, entry) in row.iter().enumerate() {
                out[j] += entry;
            }
        }
        Ok(RatVec::new(out))
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows.iter()).finish()
    }
}

// JSON form is the bare row list; the column count is recovered from the
// first row (zero-row matrices deserialize with zero columns).
impl Serialize for RatMatrix {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        self.rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RatMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<RatVec>::deserialize(deserializer)?;
        let cols = rows.first().map_or(0, RatVec::len);
        RatMatrix::new(rows, cols).map_err(serde::de::Error::custom)
    }
}
