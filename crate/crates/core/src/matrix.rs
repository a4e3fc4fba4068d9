use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Unitarity tolerance for matrices built inside the crate.
pub const INTERNAL_UNITARITY_TOL: f64 = 1e-10;

/// Unitarity tolerance for matrices loaded from user files, which arrive with
/// limited printed precision.
pub const EXTERNAL_UNITARITY_TOL: f64 = 1e-8;

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::ModeMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(CMatrix { dim, data })
    }

    pub fn zeros(dim: usize) -> Self {
        CMatrix {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        CMatrix { dim, data }
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::ModeMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(CMatrix { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        self.data.chunks(self.dim.max(1)).map(<[_]>::to_vec).collect()
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch in matrix product");
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.dim, |r, c| self.get(c, r).conj())
    }

    pub fn transpose(&self) -> CMatrix {
        CMatrix::from_fn(self.dim, |r, c| self.get(c, r))
    }

    /// Largest entry magnitude of `M M^† - I`.
    pub fn unitarity_deviation(&self) -> f64 {
        let p = self.mul(&self.adjoint());
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for c in 0..self.dim {
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((p.get(r, c) - target).norm());
            }
        }
        worst
    }

    /// Submatrix with the given (possibly repeated) row and column indices.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> CMatrix {
        assert_eq!(rows.len(), cols.len());
        CMatrix::from_fn(rows.len(), |r, c| self.get(rows[r], cols[c]))
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Serialized as a row-major array of rows, each entry an `[re, im]` pair.
impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = self
            .rows()
            .into_iter()
            .map(|row| row.into_iter().map(|z| [z.re, z.im]).collect())
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(deserializer)?;
        let rows: Vec<Vec<Complex64>> = rows
            .into_iter()
            .map(|row| row.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
            .collect();
        CMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// A unitary acting on `dim` optical modes.
///
/// Column `j` is the output distribution of a photon entering mode `j`:
/// `a_j^† → Σ_i U[i][j] a_i^†`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ModeUnitary(CMatrix);

impl ModeUnitary {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, INTERNAL_UNITARITY_TOL)
    }

    pub fn with_tolerance(matrix: CMatrix, tolerance: f64) -> Result<Self> {
        let deviation = matrix.unitarity_deviation();
        if !(deviation <= tolerance) {
            return Err(Error::NotUnitary {
                deviation,
                tolerance,
            });
        }
        Ok(ModeUnitary(matrix))
    }

    pub fn identity(dim: usize) -> Self {
        ModeUnitary(CMatrix::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.0.get(r, c)
    }

    pub fn adjoint(&self) -> ModeUnitary {
        ModeUnitary(self.0.adjoint())
    }

    /// `self · other`: `other` acts first.
    pub fn then_after(&self, other: &ModeUnitary) -> ModeUnitary {
        ModeUnitary(self.0.mul(&other.0))
    }

    /// Embeds this `k`-mode unitary into `n` modes, acting on `targets` and as
    /// the identity elsewhere.
    pub fn embed(&self, targets: &[usize], n: usize) -> Result<ModeUnitary> {
        if targets.len() != self.dim() {
            return Err(Error::ModeMismatch {
                expected: self.dim(),
                found: targets.len(),
            });
        }
        check_targets(targets, n)?;
        let mut full = CMatrix::identity(n);
        for &t in targets {
            full.set(t, t, Complex64::new(0.0, 0.0));
        }
        for (r, &tr) in targets.iter().enumerate() {
            for (c, &tc) in targets.iter().enumerate() {
                full.set(tr, tc, self.get(r, c));
            }
        }
        Ok(ModeUnitary(full))
    }
}

impl<'de> Deserialize<'de> for ModeUnitary {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let m = CMatrix::deserialize(deserializer)?;
        ModeUnitary::with_tolerance(m, EXTERNAL_UNITARITY_TOL).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn check_targets(targets: &[usize], n: usize) -> Result<()> {
    for (i, &t) in targets.iter().enumerate() {
        if t >= n {
            return Err(Error::ModeIndex { index: t, modes: n });
        }
        if targets[..i].contains(&t) {
            return Err(Error::DuplicateMode(t));
        }
    }
    Ok(())
}
