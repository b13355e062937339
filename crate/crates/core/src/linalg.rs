//! Dense rational matrices and exact integer lattice elimination.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::{format_rational, int, parse_rational, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    /// The matrix unit with a single 1 at `(i, j)` (0-based).
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m.set(i, j, Rational::one());
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged matrix rows".into()));
        }
        Ok(QMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect())
            .expect("ragged literal matrix")
    }

    pub fn from_flat(rows: usize, cols: usize, data: Vec<Rational>) -> Self {
        assert_eq!(data.len(), rows * cols);
        QMatrix { rows, cols, data }
    }

    pub fn diagonal(d: &[Rational]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, x) in d.iter().enumerate() {
            m.set(i, i, x.clone());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "matrix product dimension mismatch");
        let mut m = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        m.data[i * o.cols + j] += a * b;
                    }
                }
            }
        }
        m
    }

    fn zip(&self, o: &Self, f: impl Fn(&Rational, &Rational) -> Rational) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "shape mismatch");
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a - b)
    }

    pub fn scale(&self, s: &Rational) -> Self {
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// `AᵀA`.
    pub fn gram(&self) -> Self {
        self.transpose().mul(self)
    }

    pub fn trace(&self) -> Rational {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i).clone()).sum()
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.rows)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|x| x.is_integer())
    }

    pub fn max_abs_entry(&self) -> Rational {
        self.data.iter().map(|x| x.abs()).max().unwrap_or_else(Rational::zero)
    }

    pub fn max_row_abs_sum(&self) -> Rational {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<Rational>())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn max_col_abs_sum(&self) -> Rational {
        self.transpose().max_row_abs_sum()
    }

    pub fn det(&self) -> Rational {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Rational::one();
        for k in 0..n {
            let Some(piv) = (k..n).find(|&i| !a.get(i, k).is_zero()) else {
                return Rational::zero();
            };
            if piv != k {
                for j in 0..n {
                    a.data.swap(k * n + j, piv * n + j);
                }
                det = -det;
            }
            let d = a.get(k, k).clone();
            det *= &d;
            for i in k + 1..n {
                let f = a.get(i, k) / &d;
                if f.is_zero() {
                    continue;
                }
                for j in k..n {
                    let v = a.get(i, j) - &f * a.get(k, j);
                    a.set(i, j, v);
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square(), "inverse of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for k in 0..n {
            let piv = (k..n).find(|&i| !a.get(i, k).is_zero())?;
            if piv != k {
                for j in 0..n {
                    a.data.swap(k * n + j, piv * n + j);
                    inv.data.swap(k * n + j, piv * n + j);
                }
            }
            let d = a.get(k, k).recip();
            for j in 0..n {
                let (x, y) = (a.get(k, j) * &d, inv.get(k, j) * &d);
                a.set(k, j, x);
                inv.set(k, j, y);
            }
            for i in 0..n {
                if i == k || a.get(i, k).is_zero() {
                    continue;
                }
                let f = a.get(i, k).clone();
                for j in 0..n {
                    let x = a.get(i, j) - &f * a.get(k, j);
                    let y = inv.get(i, j) - &f * inv.get(k, j);
                    a.set(i, j, x);
                    inv.set(i, j, y);
                }
            }
        }
        Some(inv)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            (0..self.rows)
                .map(|i| {
                    Value::Array(
                        self.row(i)
                            .iter()
                            .map(|x| Value::String(format_rational(x)))
                            .collect(),
                    )
                })
                .collect(),
        )
    }

    /// Reads a JSON array of rows; entries are `"num/den"` strings or integers.
    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = || Error::Config(format!("expected a matrix, got {v}"));
        let rows = v.as_array().ok_or_else(bad)?;
        let rows = rows
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(bad)?
                    .iter()
                    .map(rational_from_json)
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }
}

pub fn rational_from_json(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) if n.is_i64() => Ok(int(n.as_i64().unwrap())),
        _ => Err(Error::ParseRational(v.to_string())),
    }
}

impl fmt::Display for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, x) in self.row(i).iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Exact PSD test by symmetric elimination: a negative pivot, or a zero
/// pivot with a nonzero row, certifies a negative direction.
pub fn is_positive_semidefinite(m: &QMatrix) -> Result<bool> {
    if !m.is_symmetric() {
        return Err(Error::NonSymmetric);
    }
    let n = m.rows();
    let mut a = m.clone();
    for k in 0..n {
        let d = a.get(k, k).clone();
        if d.is_negative() {
            return Ok(false);
        }
        if d.is_zero() {
            if (k + 1..n).any(|j| !a.get(k, j).is_zero()) {
                return Ok(false);
            }
            continue;
        }
        for i in k + 1..n {
            let f = a.get(i, k) / &d;
            if f.is_zero() {
                continue;
            }
            for j in k + 1..n {
                let v = a.get(i, j) - &f * a.get(k, j);
                a.set(i, j, v);
            }
        }
    }
    Ok(true)
}

/// Solution set of an integer linear system `P x = c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerSolutions {
    pub particular: Vec<BigInt>,
    /// A ℤ-basis of the kernel of `P`.
    pub kernel: Vec<Vec<BigInt>>,
}

/// Solves `P x = c` over ℤ by unimodular column reduction of `P`.
pub fn solve_integer(p: &[Vec<BigInt>], ncols: usize, c: &[BigInt]) -> Result<IntegerSolutions> {
    let m = p.len();
    if c.len() != m || p.iter().any(|r| r.len() != ncols) {
        return Err(Error::Dimension("integer system shape".into()));
    }
    let mut h: Vec<Vec<BigInt>> = p.to_vec();
    let mut u: Vec<Vec<BigInt>> = (0..ncols)
        .map(|i| (0..ncols).map(|j| BigInt::from((i == j) as i32)).collect())
        .collect();
    // column operation on both h (m rows) and u (ncols rows)
    let colop = |h: &mut Vec<Vec<BigInt>>, u: &mut Vec<Vec<BigInt>>, a: usize, b: usize, k: [&BigInt; 4]| {
        for row in h.iter_mut().chain(u.iter_mut()) {
            let (x, y) = (row[a].clone(), row[b].clone());
            row[a] = k[0] * &x + k[1] * &y;
            row[b] = k[2] * &x + k[3] * &y;
        }
    };
    let mut rank = 0;
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    for r in 0..m {
        if rank == ncols {
            break;
        }
        for j in rank + 1..ncols {
            if h[r][j].is_zero() {
                continue;
            }
            let a = h[r][rank].clone();
            let b = h[r][j].clone();
            let eg = a.extended_gcd(&b);
            let (g, s, t) = (eg.gcd, eg.x, eg.y);
            let (na, nb) = (-(&b / &g), &a / &g);
            colop(&mut h, &mut u, rank, j, [&s, &t, &na, &nb]);
        }
        if !h[r][rank].is_zero() {
            pivots.push((r, rank));
            rank += 1;
        }
    }
    // forward substitution through the echelon form
    let mut y: Vec<BigInt> = Vec::with_capacity(rank);
    let mut next = 0;
    for r in 0..m {
        let acc: BigInt = (0..y.len()).map(|j| &h[r][j] * &y[j]).sum();
        if next < pivots.len() && pivots[next].0 == r {
            let rem = &c[r] - acc;
            let (q, rr) = rem.div_rem(&h[r][next]);
            if !rr.is_zero() {
                return Err(Error::NoPreimage);
            }
            y.push(q);
            next += 1;
        } else if acc != c[r] {
            return Err(Error::NoPreimage);
        }
    }
    let particular = (0..ncols)
        .map(|i| (0..rank).map(|j| &u[i][j] * &y[j]).sum())
        .collect();
    let kernel = (rank..ncols)
        .map(|j| (0..ncols).map(|i| u[i][j].clone()).collect())
        .collect();
    Ok(IntegerSolutions { particular, kernel })
}
