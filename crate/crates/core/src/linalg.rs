//! Dense linear algebra over a small prime field `F_p`.
//!
//! Vectors are `Vec<u32>` with entries in `0..p`. Elimination accumulates row
//! operations without reducing and only reduces a row when it becomes a pivot,
//! which keeps the inner loop a plain multiply-add.

use serde::{Deserialize, Serialize};

use crate::arith::inv_mod;
use crate::error::{Error, Result};

/// Row-major export form of a matrix or subspace basis, entries `0..p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonMatrix {
    pub p: u32,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<u32>>,
}

pub type FpVector = Vec<u32>;

/// Largest prime accepted by the field routines; keeps lazy accumulation inside `u32`.
pub const MAX_FIELD_PRIME: u32 = 1 << 10;

fn check_prime(p: u32) {
    assert!(
        (2..=MAX_FIELD_PRIME).contains(&p),
        "field prime {p} outside the supported range"
    );
}

fn inv(x: u32, p: u32) -> u32 {
    inv_mod(x as u64, p as u64).expect("nonzero element of F_p") as u32
}

/// A row-major dense matrix over `F_p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpMatrix {
    p: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl FpMatrix {
    pub fn zeros(p: u32, rows: usize, cols: usize) -> Self {
        check_prime(p);
        FpMatrix {
            p,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(p: u32, n: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from rows, reducing entries mod `p`.
    pub fn from_rows(p: u32, cols: usize, rows: &[FpVector]) -> Self {
        let mut m = Self::zeros(p, rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "row length mismatch");
            for (j, &x) in r.iter().enumerate() {
                m.data[i * cols + j] = x % p;
            }
        }
        m
    }

    /// Matrix of a permutation: column `i` is the basis vector `perm[i]`, so the
    /// matrix sends `e_i` to `e_{perm[i]}`.
    pub fn permutation(p: u32, perm: &[usize]) -> Self {
        let n = perm.len();
        let mut m = Self::zeros(p, n, n);
        for (i, &j) in perm.iter().enumerate() {
            m.data[j * n + i] = 1;
        }
        m
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: u32) {
        self.data[i * self.cols + j] = x % self.p;
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vectors(&self) -> Vec<FpVector> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> FpVector {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn to_json_matrix(&self) -> JsonMatrix {
        JsonMatrix {
            p: self.p,
            rows: self.rows,
            cols: self.cols,
            entries: self.row_vectors(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..self.cols).all(|j| self.get(i, j) == (i == j) as u32))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.p, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn mul(&self, other: &FpMatrix) -> Result<FpMatrix> {
        if self.p != other.p {
            return Err(Error::Context(format!(
                "matrix primes differ ({} vs {})",
                self.p, other.p
            )));
        }
        if self.cols != other.rows {
            return Err(Error::Parameter(format!(
                "shape mismatch {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let p = self.p as u64;
        let mut out = Self::zeros(self.p, self.rows, other.cols);
        let mut acc = vec![0u64; other.cols];
        for i in 0..self.rows {
            acc.iter_mut().for_each(|x| *x = 0);
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k] as u64;
                if a == 0 {
                    continue;
                }
                let row = other.row(k);
                for (x, &b) in acc.iter_mut().zip(row) {
                    *x += a * b as u64;
                }
            }
            for (j, x) in acc.iter().enumerate() {
                out.data[i * other.cols + j] = (x % p) as u32;
            }
        }
        Ok(out)
    }

    /// `A v` for a column vector `v`.
    pub fn apply(&self, v: &[u32]) -> FpVector {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        let p = self.p as u64;
        (0..self.rows)
            .map(|i| {
                let s: u64 = self
                    .row(i)
                    .iter()
                    .zip(v)
                    .map(|(&a, &b)| a as u64 * b as u64)
                    .sum();
                (s % p) as u32
            })
            .collect()
    }

    /// `self - I`.
    pub fn minus_identity(&self) -> FpMatrix {
        assert_eq!(self.rows, self.cols);
        let mut m = self.clone();
        for i in 0..self.rows {
            let x = &mut m.data[i * self.cols + i];
            *x = (*x + self.p - 1) % self.p;
        }
        m
    }

    pub fn kron(&self, other: &FpMatrix) -> FpMatrix {
        let p = self.p as u64;
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        let mut out = Self::zeros(self.p, r, c);
        for i1 in 0..self.rows {
            for j1 in 0..self.cols {
                let a = self.get(i1, j1) as u64;
                if a == 0 {
                    continue;
                }
                for i2 in 0..other.rows {
                    for j2 in 0..other.cols {
                        let v = (a * other.get(i2, j2) as u64 % p) as u32;
                        out.data[(i1 * other.rows + i2) * c + j1 * other.cols + j2] = v;
                    }
                }
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        eliminate(m.p, &mut m.data, m.rows, m.cols, false).len()
    }

    /// Reduced row echelon form together with its pivot columns.
    pub fn rref(&self) -> (FpMatrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = eliminate(m.p, &mut m.data, m.rows, m.cols, true);
        (m, pivots)
    }

    /// Basis of `{ v : A v = 0 }`.
    pub fn kernel(&self) -> Vec<FpVector> {
        let (r, pivots) = self.rref();
        let p = self.p;
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let mut out = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![0u32; self.cols];
            v[free] = 1;
            for (i, &pc) in pivots.iter().enumerate() {
                let x = r.get(i, free);
                v[pc] = (p - x) % p;
            }
            out.push(v);
        }
        out
    }

    pub fn inverse(&self) -> Result<FpMatrix> {
        if self.rows != self.cols {
            return Err(Error::Parameter("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut aug = Self::zeros(self.p, n, 2 * n);
        for i in 0..n {
            aug.data[i * 2 * n..i * 2 * n + n].copy_from_slice(self.row(i));
            aug.data[i * 2 * n + n + i] = 1;
        }
        let pivots = eliminate(self.p, &mut aug.data, n, 2 * n, true);
        if pivots.len() < n || pivots[n - 1] >= n {
            return Err(Error::Structural("matrix is singular".into()));
        }
        let mut out = Self::zeros(self.p, n, n);
        for i in 0..n {
            out.data[i * n..(i + 1) * n].copy_from_slice(&aug.data[i * 2 * n + n..(i + 1) * 2 * n]);
        }
        Ok(out)
    }
}

/// In-place Gaussian elimination on a row-major block. Returns pivot columns;
/// with `full` the result is the reduced row echelon form, otherwise only the
/// leading `len()` rows are meaningful.
fn eliminate(p: u32, data: &mut [u32], rows: usize, cols: usize, full: bool) -> Vec<usize> {
    check_prime(p);
    // Each row absorbs at most min(rows, cols) updates of size < p^2.
    let bound = (p as u64 - 1).pow(2) * rows.min(cols) as u64 + p as u64;
    assert!(
        bound < u32::MAX as u64,
        "matrix too large for lazy accumulation"
    );
    let mut pivots = Vec::new();
    let mut prow = 0usize;
    for col in 0..cols {
        if prow == rows {
            break;
        }
        let Some(found) = (prow..rows).find(|&i| !data[i * cols + col].is_multiple_of(p)) else {
            continue;
        };
        if found != prow {
            let (a, b) = data.split_at_mut(found * cols);
            a[prow * cols..(prow + 1) * cols].swap_with_slice(&mut b[..cols]);
        }
        // normalize the pivot row
        let pivot = &mut data[prow * cols..(prow + 1) * cols];
        for x in pivot[col..].iter_mut() {
            *x %= p;
        }
        let s = inv(pivot[col], p);
        if s != 1 {
            for x in pivot[col..].iter_mut() {
                *x = *x * s % p;
            }
        }
        let (head, rest) = data.split_at_mut(prow * cols);
        let (pivot, tail) = rest.split_at_mut(cols);
        let pivot = &pivot[col..];
        let update = |row: &mut [u32]| {
            let x = row[col] % p;
            if x == 0 {
                row[col] = 0;
                return;
            }
            let f = p - x;
            for (r, &b) in row[col..].iter_mut().zip(pivot) {
                *r += f * b;
            }
        };
        for row in tail.chunks_exact_mut(cols) {
            update(row);
        }
        if full {
            for row in head.chunks_exact_mut(cols) {
                update(row);
            }
        }
        pivots.push(col);
        prow += 1;
    }
    for x in data.iter_mut() {
        *x %= p;
    }
    pivots
}

/// A subspace of `F_p^n` stored as its unique reduced row echelon basis, so two
/// subspaces are equal exactly when their representations are.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    p: u32,
    ambient: usize,
    basis: Vec<FpVector>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(p: u32, ambient: usize) -> Self {
        check_prime(p);
        Subspace {
            p,
            ambient,
            basis: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(p: u32, ambient: usize) -> Self {
        Self::span(p, ambient, (0..ambient).map(|i| unit(ambient, i)))
    }

    pub fn span<I>(p: u32, ambient: usize, vectors: I) -> Self
    where
        I: IntoIterator<Item = FpVector>,
    {
        check_prime(p);
        let mut data = Vec::new();
        let mut rows = 0;
        for v in vectors {
            assert_eq!(v.len(), ambient, "vector length mismatch");
            if v.iter().all(|&x| x % p == 0) {
                continue;
            }
            data.extend(v.iter().map(|&x| x % p));
            rows += 1;
        }
        let pivots = eliminate(p, &mut data, rows, ambient, true);
        let basis = (0..pivots.len())
            .map(|i| data[i * ambient..(i + 1) * ambient].to_vec())
            .collect();
        Subspace {
            p,
            ambient,
            basis,
            pivots,
        }
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn codim(&self) -> usize {
        self.ambient - self.basis.len()
    }

    pub fn basis(&self) -> &[FpVector] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Residue of `v` after clearing every pivot coordinate.
    pub fn reduce(&self, v: &[u32]) -> FpVector {
        let p = self.p;
        let mut r: FpVector = v.iter().map(|&x| x % p).collect();
        for (b, &c) in self.basis.iter().zip(&self.pivots) {
            let x = r[c];
            if x != 0 {
                let f = p - x;
                for (ri, &bi) in r.iter_mut().zip(b) {
                    *ri = (*ri + f * bi) % p;
                }
            }
        }
        r
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.basis.iter().all(|v| self.contains(v))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient);
        Subspace::span(
            self.p,
            self.ambient,
            self.basis.iter().chain(&other.basis).cloned(),
        )
    }

    /// Coordinates of `v` in the quotient `F_p^n / self`, read off the non-pivot columns.
    pub fn quotient_coordinates(&self, v: &[u32]) -> FpVector {
        let r = self.reduce(v);
        let mut is_pivot = vec![false; self.ambient];
        for &c in &self.pivots {
            is_pivot[c] = true;
        }
        r.into_iter()
            .enumerate()
            .filter(|(i, _)| !is_pivot[*i])
            .map(|(_, x)| x)
            .collect()
    }

    /// Non-pivot columns; the standard basis vectors there project to a basis of the quotient.
    pub fn free_columns(&self) -> Vec<usize> {
        let mut is_pivot = vec![false; self.ambient];
        for &c in &self.pivots {
            is_pivot[c] = true;
        }
        (0..self.ambient).filter(|&i| !is_pivot[i]).collect()
    }

    /// Image of the subspace under a linear map given as a function on vectors.
    pub fn map<F>(&self, ambient: usize, f: F) -> Subspace
    where
        F: Fn(&[u32]) -> FpVector,
    {
        Subspace::span(self.p, ambient, self.basis.iter().map(|b| f(b)))
    }

    /// Whether `f` maps the subspace into itself.
    pub fn is_invariant_under<F>(&self, f: F) -> bool
    where
        F: Fn(&[u32]) -> FpVector,
    {
        self.basis.iter().all(|b| self.contains(&f(b)))
    }

    /// Row-major matrix of the basis, entries `0..p`.
    pub fn to_rows(&self) -> Vec<FpVector> {
        self.basis.clone()
    }

    pub fn to_json_matrix(&self) -> JsonMatrix {
        JsonMatrix {
            p: self.p,
            rows: self.basis.len(),
            cols: self.ambient,
            entries: self.basis.clone(),
        }
    }
}

pub fn unit(n: usize, i: usize) -> FpVector {
    let mut v = vec![0; n];
    v[i] = 1;
    v
}

pub fn add_scaled(acc: &mut [u32], v: &[u32], scale: u32, p: u32) {
    if scale.is_multiple_of(p) {
        return;
    }
    for (a, &b) in acc.iter_mut().zip(v) {
        *a = (*a + scale * b) % p;
    }
}

pub fn sub(a: &[u32], b: &[u32], p: u32) -> FpVector {
    a.iter().zip(b).map(|(&x, &y)| (x + p - y) % p).collect()
}

/// Rank of a set of vectors.
pub fn rank_of(p: u32, cols: usize, rows: Vec<FpVector>) -> usize {
    let n = rows.len();
    let mut data: Vec<u32> = rows.into_iter().flatten().collect();
    eliminate(p, &mut data, n, cols, false).len()
}
