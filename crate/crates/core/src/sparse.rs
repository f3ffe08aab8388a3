//! Coordinate-format assembly buffers and sparse direct solves.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Square matrix in coordinate form. Duplicate entries are summed.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Triplets<T> {
    pub n: usize,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<T>,
}

impl<T: Copy + std::ops::AddAssign + Default> Triplets<T> {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            rows: Vec::new(),
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn with_capacity(n: usize, cap: usize) -> Self {
        Self {
            n,
            rows: Vec::with_capacity(cap),
            cols: Vec::with_capacity(cap),
            vals: Vec::with_capacity(cap),
        }
    }

    #[inline]
    pub fn push(&mut self, i: usize, j: usize, v: T) {
        debug_assert!(i < self.n && j < self.n);
        self.rows.push(i);
        self.cols.push(j);
        self.vals.push(v);
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    /// Dense copy, for tests and small problems.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::default(); self.n]; self.n];
        for k in 0..self.len() {
            d[self.rows[k]][self.cols[k]] += self.vals[k];
        }
        d
    }

    /// Summed entries keyed by `(row, col)`.
    pub fn to_map(&self) -> std::collections::BTreeMap<(usize, usize), T> {
        let mut m = std::collections::BTreeMap::new();
        for k in 0..self.len() {
            *m.entry((self.rows[k], self.cols[k])).or_default() += self.vals[k];
        }
        m
    }
}

impl Triplets<f64> {
    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for k in 0..self.len() {
            y[self.rows[k]] += self.vals[k] * x[self.cols[k]];
        }
        y
    }

    /// Largest absolute entry of every row, duplicates summed first.
    pub fn row_max_abs(&self) -> Vec<f64> {
        let mut m = vec![0.0f64; self.n];
        for ((i, _), v) in self.to_map() {
            m[i] = m[i].max(v.abs());
        }
        m
    }

    /// Solves `A x = b` by sparse LU.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        solve_generic(self, b, |v| v).and_then(|x| check_finite(x, |v| v.is_finite()))
    }
}

impl Triplets<Complex64> {
    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::default(); self.n];
        for k in 0..self.len() {
            y[self.rows[k]] += self.vals[k] * x[self.cols[k]];
        }
        y
    }

    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        solve_generic(self, b, |v| faer::c64::new(v.re, v.im))
            .and_then(|x| check_finite(x.into_iter().map(|v| Complex64::new(v.re, v.im)).collect(), |v| v.is_finite()))
    }
}

fn solve_generic<T, U>(a: &Triplets<T>, b: &[T], conv: impl Fn(T) -> U) -> Result<Vec<U>>
where
    T: Copy,
    U: faer::traits::ComplexField + Copy,
{
    if b.len() != a.n {
        return Err(Error::InvalidArgument(format!(
            "right-hand side has {} entries for a {}x{} matrix",
            b.len(),
            a.n,
            a.n
        )));
    }
    let trips: Vec<Triplet<usize, usize, U>> = (0..a.vals.len())
        .map(|k| Triplet::new(a.rows[k], a.cols[k], conv(a.vals[k])))
        .collect();
    let m = SparseColMat::<usize, U>::try_new_from_triplets(a.n, a.n, &trips)
        .map_err(|e| Error::LinearSolve(format!("{e:?}")))?;
    let lu = m.sp_lu().map_err(|e| Error::LinearSolve(format!("{e:?}")))?;
    let rhs = Mat::<U>::from_fn(a.n, 1, |i, _| conv(b[i]));
    let x = lu.solve(&rhs);
    Ok((0..a.n).map(|i| x[(i, 0)]).collect())
}

fn check_finite<T>(x: Vec<T>, finite: impl Fn(&T) -> bool) -> Result<Vec<T>> {
    if x.iter().all(finite) {
        Ok(x)
    } else {
        Err(Error::LinearSolve("singular matrix".into()))
    }
}

/// Pins the solver to one thread so repeated runs are bit-identical.
pub fn set_single_threaded() {
    faer::set_global_parallelism(faer::Par::Seq);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let mut a = Triplets::new(2);
        a.push(0, 0, 1.0);
        a.push(0, 0, 1.0);
        a.push(1, 1, 4.0);
        a.push(0, 1, 1.0);
        let x = a.solve(&[4.0, 8.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn complex_solve() {
        let mut a = Triplets::new(2);
        let i = Complex64::i();
        a.push(0, 0, 1.0 + i);
        a.push(1, 0, i);
        a.push(1, 1, Complex64::new(2.0, 0.0));
        let x = a.solve(&[Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0)]).unwrap();
        let r = a.mul_vec(&x);
        assert!((r[0] - 2.0).norm() < 1e-14 && r[1].norm() < 1e-14);
    }

    #[test]
    fn singular_matrix_reports_error() {
        let mut a = Triplets::new(2);
        a.push(0, 0, 1.0);
        a.push(1, 0, 1.0);
        assert!(a.solve(&[1.0, 1.0]).is_err());
    }
}
