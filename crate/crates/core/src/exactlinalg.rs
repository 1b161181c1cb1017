//! Exact linear algebra over small prime fields.
//!
//! Matrices are dense with entries stored as reduced residues. Subspaces are
//! kept in reduced row echelon form, so equal subspaces compare equal
//! structurally. Row reduction over `F_2` packs rows into `u64` words when the
//! width allows it.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::partitions::Partition;

/// Exclusive upper bound on the characteristic.
pub const MAX_CHARACTERISTIC: u32 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("{0} is not a prime below {MAX_CHARACTERISTIC}")]
    NotPrime(u32),
    #[error("characteristics differ: {0} vs {1}")]
    FieldMismatch(u32, u32),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("rows have unequal lengths")]
    Ragged,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not nilpotent")]
    NotNilpotent,
    #[error("subspace is not invariant under the operator")]
    NotInvariant,
    #[error("subspace is not contained in the given ambient subspace")]
    NotContained,
    #[error("flag step {step} has dimension {found}, expected {step}")]
    FlagDimension { step: usize, found: usize },
    #[error("flag step {step} does not contain step {prev}", prev = step - 1)]
    FlagNotNested { step: usize },
    #[error("column {column} of {shape} is empty")]
    EmptyColumn { shape: Partition, column: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct PrimeField {
    p: u32,
}

impl Default for PrimeField {
    fn default() -> Self {
        PrimeField { p: 2 }
    }
}

impl PrimeField {
    pub fn new(p: u32) -> Result<Self, LinalgError> {
        if !(2..MAX_CHARACTERISTIC).contains(&p)
            || !(2..p)
                .take_while(|d| d * d <= p)
                .all(|d| !p.is_multiple_of(d))
        {
            return Err(LinalgError::NotPrime(p));
        }
        Ok(PrimeField { p })
    }

    pub fn characteristic(self) -> u32 {
        self.p
    }

    #[inline]
    pub fn reduce(self, x: u64) -> u32 {
        (x % self.p as u64) as u32
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    /// Multiplicative inverse of a nonzero element.
    pub fn inv(self, a: u32) -> u32 {
        debug_assert!(a != 0);
        let (mut t, mut new_t) = (0i64, 1i64);
        let (mut r, mut new_r) = (self.p as i64, a as i64);
        while new_r != 0 {
            let q = r / new_r;
            (t, new_t) = (new_t, t - q * new_t);
            (r, new_r) = (new_r, r - q * new_r);
        }
        t.rem_euclid(self.p as i64) as u32
    }

    /// Number of elements of `F_p^dim`, saturating.
    pub fn points(self, dim: usize) -> u64 {
        (self.p as u64).saturating_pow(dim as u32)
    }
}

impl<'de> Deserialize<'de> for PrimeField {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        PrimeField::new(u32::deserialize(deserializer)?).map_err(serde::de::Error::custom)
    }
}

/// A dense `rows x cols` matrix over `F_p`. Vectors act as columns.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    p: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cols: Option<usize>,
    rows: Vec<Vec<u32>>,
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MatrixJson {
            p: self.field.p,
            cols: (self.rows == 0).then_some(self.cols),
            rows: self.to_rows(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(deserializer)?;
        let field = PrimeField::new(raw.p).map_err(serde::de::Error::custom)?;
        let cols = raw
            .cols
            .unwrap_or_else(|| raw.rows.first().map_or(0, Vec::len));
        let mut m = Matrix::from_rows(field, raw.rows).map_err(serde::de::Error::custom)?;
        if m.rows == 0 {
            m.cols = cols;
        } else if m.cols != cols {
            return Err(serde::de::Error::custom(LinalgError::Ragged));
        }
        Ok(m)
    }
}

impl Matrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Matrix {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from rows of integers, reducing every entry mod `p`.
    pub fn from_rows(field: PrimeField, rows: Vec<Vec<u32>>) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(LinalgError::Ragged);
        }
        let data = rows
            .iter()
            .flatten()
            .map(|&x| field.reduce(x as u64))
            .collect();
        Ok(Matrix {
            field,
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// The matrix whose columns are `vectors`.
    pub fn from_columns(field: PrimeField, dim: usize, vectors: &[Vec<u32>]) -> Self {
        let mut m = Matrix::zeros(field, dim, vectors.len());
        for (c, v) in vectors.iter().enumerate() {
            for (r, &x) in v.iter().enumerate().take(dim) {
                m.data[r * m.cols + c] = x;
            }
        }
        m
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn num_rows(&self) -> usize {
        self.rows
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: u32) {
        self.data[r * self.cols + c] = self.field.reduce(value as u64);
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn column(&self, c: usize) -> Vec<u32> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    fn check_field(&self, other: &Matrix) -> Result<(), LinalgError> {
        if self.field != other.field {
            return Err(LinalgError::FieldMismatch(self.field.p, other.field.p));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        self.check_field(other)?;
        if self.cols != other.rows {
            return Err(LinalgError::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = self.field;
        let mut out = Matrix::zeros(f, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0 {
                    continue;
                }
                for c in 0..other.cols {
                    let idx = r * out.cols + c;
                    out.data[idx] = f.add(out.data[idx], f.mul(a, other.get(k, c)));
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        self.check_field(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(LinalgError::Dimension(format!(
                "{}x{} plus {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = self.field;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f.add(a, b))
            .collect();
        Ok(Matrix { data, ..*self })
    }

    pub fn pow(&self, k: u32) -> Result<Matrix, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut acc = Matrix::identity(self.field, self.rows);
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// `M v` for a column vector `v`.
    pub fn apply(&self, v: &[u32]) -> Result<Vec<u32>, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::Dimension(format!(
                "{}x{} applied to a vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok(self.apply_unchecked(v))
    }

    fn apply_unchecked(&self, v: &[u32]) -> Vec<u32> {
        let f = self.field;
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
            })
            .collect()
    }

    /// Reduced row echelon form.
    pub fn rref(&self) -> Echelon {
        let (rows, pivots) = rref_rows(self.field, self.cols, self.to_rows());
        Echelon {
            matrix: Matrix::from_rows(self.field, rows)
                .map(|mut m| {
                    m.cols = self.cols;
                    m
                })
                .expect("echelon rows are rectangular"),
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        rref_rows(self.field, self.cols, self.to_rows()).1.len()
    }

    /// `{v : M v = 0}`.
    pub fn kernel(&self) -> Subspace {
        let (rows, pivots) = rref_rows(self.field, self.cols, self.to_rows());
        let f = self.field;
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let basis: Vec<Vec<u32>> = (0..self.cols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = vec![0; self.cols];
                v[free] = 1;
                for (row, &p) in rows.iter().zip(&pivots) {
                    v[p] = f.neg(row[free]);
                }
                v
            })
            .collect();
        Subspace::span_unchecked(f, self.cols, basis)
    }

    /// The column space.
    pub fn image(&self) -> Subspace {
        let cols: Vec<Vec<u32>> = (0..self.cols).map(|c| self.column(c)).collect();
        Subspace::span_unchecked(self.field, self.rows, cols)
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let f = self.field;
        let augmented: Vec<Vec<u32>> = (0..n)
            .map(|r| {
                let mut row = self.row(r).to_vec();
                row.extend((0..n).map(|c| u32::from(c == r)));
                row
            })
            .collect();
        let (rows, pivots) = rref_rows(f, 2 * n, augmented);
        if n == 0 {
            return Some(Matrix::zeros(f, 0, 0));
        }
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let inv_rows = rows.into_iter().map(|r| r[n..].to_vec()).collect();
        Matrix::from_rows(f, inv_rows).ok()
    }

    /// Checks `M^n = 0` for an `n x n` matrix.
    pub fn is_nilpotent(&self) -> bool {
        self.is_square() && nilpotent_kernel_dims(self).is_ok()
    }

    /// `g M g^{-1}`.
    pub fn conjugate_by(&self, g: &Matrix, g_inv: &Matrix) -> Result<Matrix, LinalgError> {
        g.mul(self)?.mul(g_inv)
    }
}

/// A matrix in reduced row echelon form together with its pivot columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Echelon {
    pub matrix: Matrix,
    pub pivots: Vec<usize>,
}

/// Gauss-Jordan elimination; returns the nonzero rows and their pivot columns.
fn rref_rows(field: PrimeField, cols: usize, rows: Vec<Vec<u32>>) -> (Vec<Vec<u32>>, Vec<usize>) {
    if field.p == 2 && cols <= 64 {
        return rref_rows_gf2(cols, &rows);
    }
    let f = field;
    let mut rows = rows;
    let mut pivots = Vec::new();
    let mut rank = 0;
    for c in 0..cols {
        let Some(found) = (rank..rows.len()).find(|&r| rows[r][c] != 0) else {
            continue;
        };
        rows.swap(rank, found);
        let inv = f.inv(rows[rank][c]);
        if inv != 1 {
            for x in rows[rank].iter_mut() {
                *x = f.mul(*x, inv);
            }
        }
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == rank || row[c] == 0 {
                continue;
            }
            let factor = row[c];
            for (x, &y) in row.iter_mut().zip(&pivot_row).skip(c) {
                *x = f.sub(*x, f.mul(factor, y));
            }
        }
        pivots.push(c);
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rows.truncate(rank);
    (rows, pivots)
}

/// Bit-packed elimination over `F_2`; column `c` is bit `c`.
fn rref_rows_gf2(cols: usize, rows: &[Vec<u32>]) -> (Vec<Vec<u32>>, Vec<usize>) {
    let mut packed: Vec<u64> = rows
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .fold(0u64, |acc, (c, &x)| acc | (u64::from(x & 1) << c))
        })
        .collect();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for c in 0..cols {
        let bit = 1u64 << c;
        let Some(found) = (rank..packed.len()).find(|&r| packed[r] & bit != 0) else {
            continue;
        };
        packed.swap(rank, found);
        let pivot = packed[rank];
        for (r, row) in packed.iter_mut().enumerate() {
            if r != rank && *row & bit != 0 {
                *row ^= pivot;
            }
        }
        pivots.push(c);
        rank += 1;
        if rank == packed.len() {
            break;
        }
    }
    let out = packed[..rank]
        .iter()
        .map(|&w| (0..cols).map(|c| ((w >> c) & 1) as u32).collect())
        .collect();
    (out, pivots)
}

/// A subspace of `F_p^n`, stored by its reduced echelon basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    field: PrimeField,
    ambient: usize,
    basis: Vec<Vec<u32>>,
    pivots: Vec<usize>,
}

impl Serialize for Subspace {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.as_matrix().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Subspace {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let m = Matrix::deserialize(deserializer)?;
        Ok(Subspace::span_unchecked(m.field, m.cols, m.to_rows()))
    }
}

impl Subspace {
    pub fn zero(field: PrimeField, ambient: usize) -> Self {
        Subspace {
            field,
            ambient,
            basis: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(field: PrimeField, ambient: usize) -> Self {
        Subspace {
            field,
            ambient,
            basis: (0..ambient)
                .map(|i| (0..ambient).map(|c| u32::from(c == i)).collect())
                .collect(),
            pivots: (0..ambient).collect(),
        }
    }

    /// Span of the given vectors.
    pub fn span(
        field: PrimeField,
        ambient: usize,
        vectors: Vec<Vec<u32>>,
    ) -> Result<Self, LinalgError> {
        if let Some(v) = vectors.iter().find(|v| v.len() != ambient) {
            return Err(LinalgError::Dimension(format!(
                "vector of length {} in F_p^{ambient}",
                v.len()
            )));
        }
        let vectors = vectors
            .into_iter()
            .map(|v| v.into_iter().map(|x| field.reduce(x as u64)).collect())
            .collect();
        Ok(Subspace::span_unchecked(field, ambient, vectors))
    }

    pub(crate) fn span_unchecked(
        field: PrimeField,
        ambient: usize,
        vectors: Vec<Vec<u32>>,
    ) -> Self {
        let (basis, pivots) = rref_rows(field, ambient, vectors);
        Subspace {
            field,
            ambient,
            basis,
            pivots,
        }
    }

    /// Span of the standard basis vectors with the given 0-based indices.
    pub fn coordinate(
        field: PrimeField,
        ambient: usize,
        indices: impl IntoIterator<Item = usize>,
    ) -> Self {
        let vectors = indices
            .into_iter()
            .map(|i| (0..ambient).map(|c| u32::from(c == i)).collect())
            .collect();
        Subspace::span_unchecked(field, ambient, vectors)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Canonical basis rows (reduced echelon form).
    pub fn basis(&self) -> &[Vec<u32>] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn as_matrix(&self) -> Matrix {
        let mut m = Matrix::from_rows(self.field, self.basis.clone()).expect("rectangular basis");
        m.cols = self.ambient;
        m
    }

    /// `v` minus its component along the basis; zero iff `v` lies in the subspace.
    pub fn reduce(&self, v: &[u32]) -> Vec<u32> {
        let f = self.field;
        let mut out = v.to_vec();
        for (row, &p) in self.basis.iter().zip(&self.pivots) {
            let c = out[p];
            if c != 0 {
                for (x, &y) in out.iter_mut().zip(row) {
                    *x = f.sub(*x, f.mul(c, y));
                }
            }
        }
        out
    }

    pub fn contains_vector(&self, v: &[u32]) -> bool {
        v.len() == self.ambient && self.reduce(v).iter().all(|&x| x == 0)
    }

    pub fn contains(&self, other: &Subspace) -> bool {
        self.ambient == other.ambient
            && other.dim() <= self.dim()
            && other.basis.iter().all(|v| self.contains_vector(v))
    }

    /// Coordinates of `v` in the canonical basis, if `v` lies in the subspace.
    pub fn coordinates(&self, v: &[u32]) -> Option<Vec<u32>> {
        if !self.contains_vector(v) {
            return None;
        }
        Some(self.pivots.iter().map(|&p| v[p]).collect())
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace, LinalgError> {
        if self.field != other.field {
            return Err(LinalgError::FieldMismatch(self.field.p, other.field.p));
        }
        if self.ambient != other.ambient {
            return Err(LinalgError::Dimension(format!(
                "sum of subspaces of F_p^{} and F_p^{}",
                self.ambient, other.ambient
            )));
        }
        let mut vectors = self.basis.clone();
        vectors.extend(other.basis.iter().cloned());
        Ok(Subspace::span_unchecked(self.field, self.ambient, vectors))
    }

    /// Adds one vector to the spanning set.
    pub fn extend_by(&self, v: &[u32]) -> Subspace {
        let mut vectors = self.basis.clone();
        vectors.push(v.to_vec());
        Subspace::span_unchecked(self.field, self.ambient, vectors)
    }

    /// `g(W)` for a linear map `g` from the ambient space.
    pub fn image_under(&self, g: &Matrix) -> Result<Subspace, LinalgError> {
        if g.cols != self.ambient {
            return Err(LinalgError::Dimension(format!(
                "{}x{} applied to a subspace of F_p^{}",
                g.rows, g.cols, self.ambient
            )));
        }
        let vectors = self.basis.iter().map(|v| g.apply_unchecked(v)).collect();
        Ok(Subspace::span_unchecked(self.field, g.rows, vectors))
    }

    /// Places the subspace into `F_p^ambient` at coordinates `offset..offset + self.ambient`.
    pub fn embed(&self, ambient: usize, offset: usize) -> Subspace {
        assert!(offset + self.ambient <= ambient, "embedding does not fit");
        let basis = self
            .basis
            .iter()
            .map(|v| {
                let mut w = vec![0; ambient];
                w[offset..offset + self.ambient].copy_from_slice(v);
                w
            })
            .collect();
        Subspace {
            field: self.field,
            ambient,
            basis,
            pivots: self.pivots.iter().map(|p| p + offset).collect(),
        }
    }
}

/// A complete flag `0 = F_0 ⊊ F_1 ⊊ … ⊊ F_N = F_p^N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Flag {
    field: PrimeField,
    ambient: usize,
    // F_0 through F_N
    spaces: Vec<Subspace>,
}

impl Serialize for Flag {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.proper_spaces().serialize(serializer)
    }
}

#[derive(Deserialize)]
struct FlagJson {
    p: u32,
    ambient: usize,
    spaces: Vec<Subspace>,
}

impl Flag {
    /// Builds a flag from its proper steps `F_1, …, F_{N-1}`.
    pub fn new(
        field: PrimeField,
        ambient: usize,
        proper: Vec<Subspace>,
    ) -> Result<Self, LinalgError> {
        if proper.len() + 1 != ambient.max(1) {
            return Err(LinalgError::Dimension(format!(
                "{} proper steps for a flag of F_p^{ambient}",
                proper.len()
            )));
        }
        let mut spaces = Vec::with_capacity(ambient + 1);
        spaces.push(Subspace::zero(field, ambient));
        spaces.extend(proper);
        if ambient > 0 {
            spaces.push(Subspace::full(field, ambient));
        }
        for (step, w) in spaces.windows(2).enumerate() {
            let step = step + 1;
            if w[1].field != field || w[1].ambient != ambient {
                return Err(LinalgError::Dimension(format!(
                    "step {step} lives in another space"
                )));
            }
            if w[1].dim() != step {
                return Err(LinalgError::FlagDimension {
                    step,
                    found: w[1].dim(),
                });
            }
            if !w[1].contains(&w[0]) {
                return Err(LinalgError::FlagNotNested { step });
            }
        }
        Ok(Flag {
            field,
            ambient,
            spaces,
        })
    }

    /// Reads the JSON form `{p, ambient, spaces: [F_1, …, F_{N-1}]}`.
    pub fn from_json(value: serde_json::Value) -> Result<Self, String> {
        let raw: FlagJson = serde_json::from_value(value).map_err(|e| e.to_string())?;
        let field = PrimeField::new(raw.p).map_err(|e| e.to_string())?;
        Flag::new(field, raw.ambient, raw.spaces).map_err(|e| e.to_string())
    }

    pub(crate) fn from_chain_unchecked(
        field: PrimeField,
        ambient: usize,
        spaces: Vec<Subspace>,
    ) -> Self {
        debug_assert_eq!(spaces.len(), ambient + 1);
        Flag {
            field,
            ambient,
            spaces,
        }
    }

    /// `F_i = span(v_1, …, v_i)` for an ordered basis.
    pub fn from_basis(
        field: PrimeField,
        ambient: usize,
        vectors: &[Vec<u32>],
    ) -> Result<Self, LinalgError> {
        let mut spaces = vec![Subspace::zero(field, ambient)];
        for (i, v) in vectors.iter().enumerate() {
            let next = spaces[i].extend_by(v);
            if next.dim() != i + 1 {
                return Err(LinalgError::FlagDimension {
                    step: i + 1,
                    found: next.dim(),
                });
            }
            spaces.push(next);
        }
        if spaces.len() != ambient + 1 {
            return Err(LinalgError::Dimension(format!(
                "{} vectors for a flag of F_p^{ambient}",
                vectors.len()
            )));
        }
        Ok(Flag {
            field,
            ambient,
            spaces,
        })
    }

    /// The coordinate flag `F_i = span(e_1, …, e_i)`.
    pub fn standard(field: PrimeField, ambient: usize) -> Self {
        let spaces = (0..=ambient)
            .map(|i| Subspace::coordinate(field, ambient, 0..i))
            .collect();
        Flag {
            field,
            ambient,
            spaces,
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    /// `F_i` for `0 <= i <= N`.
    pub fn space(&self, i: usize) -> &Subspace {
        &self.spaces[i]
    }

    /// `F_1, …, F_{N-1}`.
    pub fn proper_spaces(&self) -> &[Subspace] {
        if self.ambient == 0 {
            &[]
        } else {
            &self.spaces[1..self.ambient]
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "p": self.field.p,
            "ambient": self.ambient,
            "spaces": self.proper_spaces(),
        })
    }

    /// `g F_•`.
    pub fn image_under(&self, g: &Matrix) -> Result<Flag, LinalgError> {
        if !g.is_square() || g.rows != self.ambient {
            return Err(LinalgError::Dimension(
                "flag moved by a non-square map".into(),
            ));
        }
        let spaces = self
            .spaces
            .iter()
            .map(|s| s.image_under(g))
            .collect::<Result<Vec<_>, _>>()?;
        if spaces.iter().enumerate().any(|(i, s)| s.dim() != i) {
            return Err(LinalgError::Dimension("map is not invertible".into()));
        }
        Ok(Flag {
            field: self.field,
            ambient: self.ambient,
            spaces,
        })
    }

    /// Whether `e F_i ⊆ F_{i-1}` for every `i`.
    pub fn is_in_fibre(&self, e: &Matrix) -> bool {
        (1..=self.ambient).all(|i| {
            self.spaces[i]
                .basis()
                .iter()
                .all(|v| self.spaces[i - 1].contains_vector(&e.apply_unchecked(v)))
        })
    }
}

/// `d_j = dim ker(e^j)` for `j = 0, 1, …` until `d_j = n`.
fn nilpotent_kernel_dims(e: &Matrix) -> Result<Vec<usize>, LinalgError> {
    let n = e.rows;
    let mut dims = vec![0];
    let mut power = Matrix::identity(e.field, n);
    while *dims.last().unwrap() < n {
        if dims.len() > n {
            return Err(LinalgError::NotNilpotent);
        }
        power = power.mul(e)?;
        dims.push(n - power.rank());
    }
    Ok(dims)
}

/// Jordan type of a nilpotent matrix: the partition whose transpose is
/// `(d_1 − d_0, d_2 − d_1, …)` with `d_j = dim ker(e^j)`.
pub fn jordan_type(e: &Matrix) -> Result<Partition, LinalgError> {
    if !e.is_square() {
        return Err(LinalgError::NotSquare {
            rows: e.rows,
            cols: e.cols,
        });
    }
    let dims = nilpotent_kernel_dims(e)?;
    let columns: Vec<usize> = dims.windows(2).map(|w| w[1] - w[0]).collect();
    let transpose =
        Partition::new(columns).expect("kernel increments of a nilpotent are decreasing");
    Ok(transpose.transpose())
}

/// The matrix of `e|_W` in the canonical basis of `W`.
pub fn restrict(e: &Matrix, w: &Subspace) -> Result<Matrix, LinalgError> {
    if !e.is_square() || e.rows != w.ambient {
        return Err(LinalgError::Dimension(format!(
            "{}x{} restricted to a subspace of F_p^{}",
            e.rows, e.cols, w.ambient
        )));
    }
    let k = w.dim();
    let mut out = Matrix::zeros(e.field, k, k);
    for (c, b) in w.basis.iter().enumerate() {
        let image = e.apply_unchecked(b);
        let coords = w.coordinates(&image).ok_or(LinalgError::NotInvariant)?;
        for (r, x) in coords.into_iter().enumerate() {
            out.data[r * k + c] = x;
        }
    }
    Ok(out)
}

/// `e^{-1}(W) = {v : e v ∈ W}`.
pub fn preimage(e: &Matrix, w: &Subspace) -> Result<Subspace, LinalgError> {
    if e.rows != w.ambient {
        return Err(LinalgError::Dimension(format!(
            "preimage under a {}x{} matrix of a subspace of F_p^{}",
            e.rows, e.cols, w.ambient
        )));
    }
    // kernel of (projection away from W) ∘ e
    let reduced: Vec<Vec<u32>> = (0..e.cols).map(|c| w.reduce(&e.column(c))).collect();
    Ok(Matrix::from_columns(e.field, e.rows, &reduced).kernel())
}

/// Every `W'` with `W ⊂ W' ⊆ U` and `dim W' = dim W + 1`, one per line of `U/W`.
///
/// Lines are enumerated by coefficient vectors over a fixed complement of `W`
/// in `U`, normalized so the first nonzero coefficient is 1, in lexicographic
/// order.
pub fn enumerate_extensions(w: &Subspace, u: &Subspace) -> Result<Vec<Subspace>, LinalgError> {
    let complement = complement_in(w, u)?;
    let f = w.field;
    let r = complement.len();
    let mut out = Vec::with_capacity(line_count(f, r) as usize);
    for_each_line(f, r, |coeffs| {
        let mut v = vec![0u32; w.ambient];
        for (&c, basis) in coeffs.iter().zip(&complement) {
            if c != 0 {
                for (x, &y) in v.iter_mut().zip(basis) {
                    *x = f.add(*x, f.mul(c, y));
                }
            }
        }
        out.push(w.extend_by(&v));
    });
    Ok(out)
}

/// Vectors of `U` reduced modulo `W` spanning a complement of `W` in `U`.
pub(crate) fn complement_in(w: &Subspace, u: &Subspace) -> Result<Vec<Vec<u32>>, LinalgError> {
    if !u.contains(w) {
        return Err(LinalgError::NotContained);
    }
    let reduced: Vec<Vec<u32>> = u.basis.iter().map(|v| w.reduce(v)).collect();
    let (rows, _) = rref_rows(w.field, w.ambient, reduced);
    Ok(rows)
}

/// Number of lines in `F_p^r`.
pub fn line_count(field: PrimeField, r: usize) -> u64 {
    if r == 0 {
        0
    } else {
        (field.points(r) - 1) / (field.p as u64 - 1)
    }
}

/// Calls `visit` with each normalized coefficient vector of length `r`.
pub(crate) fn for_each_line(field: PrimeField, r: usize, mut visit: impl FnMut(&[u32])) {
    let p = field.p;
    let mut coeffs = vec![0u32; r];
    for lead in 0..r {
        coeffs.iter_mut().for_each(|c| *c = 0);
        coeffs[lead] = 1;
        // odometer over the entries after the leading 1
        loop {
            visit(&coeffs);
            let mut pos = r;
            loop {
                if pos == lead + 1 {
                    pos = usize::MAX;
                    break;
                }
                pos -= 1;
                coeffs[pos] += 1;
                if coeffs[pos] < p {
                    break;
                }
                coeffs[pos] = 0;
            }
            if pos == usize::MAX {
                break;
            }
        }
    }
}

/// All hyperplanes of `F_p^n`, as kernels of normalized nonzero functionals.
pub fn all_hyperplanes(field: PrimeField, n: usize) -> Vec<Subspace> {
    let mut out = Vec::new();
    for_each_line(field, n, |functional| {
        let m = Matrix::from_rows(field, vec![functional.to_vec()]).expect("single row");
        out.push(m.kernel());
    });
    out
}

/// Largest `j` with `ker(e^{j-1}) ⊆ H`.
pub fn maximal_kernel_index(e: &Matrix, h: &Subspace) -> Result<usize, LinalgError> {
    let n = e.rows;
    let mut power = Matrix::identity(e.field, n);
    let mut j = 1;
    // ker(e^0) = 0 is always contained
    loop {
        power = power.mul(e)?;
        if !h.contains(&power.kernel()) {
            return Ok(j);
        }
        j += 1;
        if j > n + 1 {
            return Err(LinalgError::NotNilpotent);
        }
    }
}

/// Removes the bottom box of column `j` (1-based) of `λ`, i.e. decrements `λ^⊤_j`.
///
/// When column `j + 1` has the same height the decremented column word is
/// re-sorted, which amounts to removing the corner at the end of that run of
/// equal columns.
pub fn hyperplane_restriction_type(lambda: &Partition, j: usize) -> Result<Partition, LinalgError> {
    let mut columns = lambda.transpose().parts().to_vec();
    if j == 0 || j > columns.len() {
        return Err(LinalgError::EmptyColumn {
            shape: lambda.clone(),
            column: j,
        });
    }
    columns[j - 1] -= 1;
    Ok(Partition::from_unsorted(columns).transpose())
}

/// A single nilpotent Jordan block: `e v_1 = 0`, `e v_k = v_{k-1}`.
pub fn jordan_block(field: PrimeField, n: usize) -> Matrix {
    let mut m = Matrix::zeros(field, n, n);
    for k in 1..n {
        m.data[(k - 1) * n + k] = 1;
    }
    m
}

/// Block-diagonal nilpotent in Jordan form with blocks of sizes `λ_1, λ_2, …`.
pub fn jordan_form(field: PrimeField, lambda: &Partition) -> Matrix {
    let n = lambda.weight();
    let mut m = Matrix::zeros(field, n, n);
    let mut offset = 0;
    for &size in lambda.parts() {
        for k in 1..size {
            m.data[(offset + k - 1) * n + offset + k] = 1;
        }
        offset += size;
    }
    m
}
