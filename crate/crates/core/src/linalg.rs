//! Dense linear algebra over a prime field `F_p` with `p < 2^32`.

use rand::Rng;
use thiserror::Error;

use crate::rng;

/// `2^31 - 1`, the default evaluation modulus.
pub const MERSENNE_31: u64 = (1 << 31) - 1;
/// `2^31 - 19`, the second modulus used for integer rank checks.
pub const SECOND_PRIME: u64 = (1 << 31) - 19;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("modulus {0} is not a prime below 2^32")]
    NotPrime(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u64,
}

impl Default for PrimeField {
    fn default() -> Self {
        PrimeField { p: MERSENNE_31 }
    }
}

fn is_prime_u32(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if p >= 1 << 32 || !is_prime_u32(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(PrimeField { p })
    }

    pub fn modulus(self) -> u64 {
        self.p
    }

    #[inline]
    pub fn reduce(self, a: u64) -> u64 {
        a % self.p
    }

    pub fn from_i128(self, a: i128) -> u64 {
        a.rem_euclid(self.p as i128) as u64
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        (a * b) % self.p
    }

    pub fn neg(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    pub fn pow(self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.p;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `a` must be nonzero.
    pub fn inv(self, a: u64) -> u64 {
        debug_assert!(!a.is_multiple_of(self.p));
        self.pow(a, self.p - 2)
    }

    /// Field element from a signed exponent power, `a^k` with `k` possibly
    /// negative. `a` must be nonzero when `k < 0`.
    pub fn pow_signed(self, a: u64, k: i64) -> u64 {
        if k >= 0 {
            self.pow(a, k as u64)
        } else {
            self.inv(self.pow(a, k.unsigned_abs()))
        }
    }
}

/// Row-major matrix with entries in `[0, p)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixModP {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
    field: PrimeField,
}

impl MatrixModP {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        MatrixModP {
            rows,
            cols,
            data: vec![0; rows * cols],
            field,
        }
    }

    pub fn from_fn(
        field: PrimeField,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> u64,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(field.reduce(f(i, j)));
            }
        }
        MatrixModP {
            rows,
            cols,
            data,
            field,
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        Self::from_fn(field, n, n, |i, j| u64::from(i == j))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = self.field.reduce(v);
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.field, self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Self::from_fn(self.field, self.rows, cols.len(), |i, j| {
            self.get(i, cols[j])
        })
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self::from_fn(self.field, rows.len(), self.cols, |i, j| {
            self.get(rows[i], j)
        })
    }

    /// Forward elimination without division: each target row is replaced by
    /// `pivot * row - factor * pivot_row`. Returns the rank, the pivots in
    /// order, the number of row swaps, and the product of all row scalings.
    fn eliminate(&self) -> (usize, Vec<u64>, usize, u64) {
        let f = self.field;
        let (rows, cols) = (self.rows, self.cols);
        let mut a = self.data.clone();
        let mut rank = 0;
        let mut pivots = Vec::new();
        let mut swaps = 0usize;
        let mut scaling = 1;
        for col in 0..cols {
            if rank == rows {
                break;
            }
            let Some(pr) = (rank..rows).find(|&r| a[r * cols + col] != 0) else {
                continue;
            };
            if pr != rank {
                for j in 0..cols {
                    a.swap(pr * cols + j, rank * cols + j);
                }
                swaps += 1;
            }
            let pivot = a[rank * cols + col];
            for r in rank + 1..rows {
                let factor = a[r * cols + col];
                if factor == 0 {
                    continue;
                }
                scaling = f.mul(scaling, pivot);
                for j in col..cols {
                    let lhs = f.mul(pivot, a[r * cols + j]);
                    let rhs = f.mul(factor, a[rank * cols + j]);
                    a[r * cols + j] = f.sub(lhs, rhs);
                }
            }
            pivots.push(pivot);
            rank += 1;
        }
        (rank, pivots, swaps, scaling)
    }

    /// Rank over `F_p`.
    pub fn rank(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        self.eliminate().0
    }

    /// Determinant over `F_p`; `None` unless the matrix is square.
    pub fn determinant(&self) -> Option<u64> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        if n == 0 {
            return Some(1 % self.field.modulus());
        }
        let f = self.field;
        let (rank, pivots, swaps, scaling) = self.eliminate();
        if rank < n {
            return Some(0);
        }
        // The diagonal product equals det * scaling, up to the swap sign.
        let diag = pivots.iter().fold(1, |acc, &p| f.mul(acc, p));
        let mut det = f.mul(diag, f.inv(scaling));
        if swaps % 2 == 1 {
            det = f.neg(det);
        }
        Some(det)
    }
}

/// `2 * count` field elements, uniform in `[1, p)`, from the given seed.
pub fn seeded_points(field: PrimeField, seed: u64, count: usize) -> Vec<u64> {
    let mut rng = rng::stream(seed, 0);
    (0..2 * count)
        .map(|_| rng.random_range(1..field.modulus()))
        .collect()
}
