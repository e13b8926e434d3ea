//! Dense matrices over a [`Scalar`], with deterministic Gaussian elimination.

use std::ops::{Index, IndexMut};

use crate::scalar::{Mode, Scalar, CHOLESKY_TOL};

#[derive(Clone, Debug, PartialEq)]
pub struct Mat<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn diag(d: &[S]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, x) in d.iter().enumerate() {
            m[(i, i)] = x.clone();
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_cols(rows: usize, cols: &[Vec<S>]) -> Self {
        Self::from_fn(rows, cols.len(), |i, j| cols[j][i].clone())
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

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul(&self, o: &Mat<S>) -> Mat<S> {
        assert_eq!(self.cols, o.rows, "matrix product dimension mismatch");
        let mut out = Mat::<S>::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = &o[(k, j)];
                    out.data[i * o.cols + j].add_mul(a, b);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = S::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    acc.add_mul(a, b);
                }
                acc
            })
            .collect()
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.rows, v.len());
        let mut out = vec![S::zero(); self.cols];
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for j in 0..self.cols {
                out[j].add_mul(vi, &self[(i, j)]);
            }
        }
        out
    }

    pub fn add(&self, o: &Mat<S>) -> Mat<S> {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Self::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].clone() + o[(i, j)].clone()
        })
    }

    pub fn sub(&self, o: &Mat<S>) -> Mat<S> {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Self::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].clone() - o[(i, j)].clone()
        })
    }

    pub fn scale(&self, s: &S) -> Mat<S> {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].mul_ref(s))
    }

    pub fn trace(&self) -> S {
        let mut t = S::zero();
        for i in 0..self.rows.min(self.cols) {
            t.add_ref(&self[(i, i)]);
        }
        t
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..i).all(|j| (self[(i, j)].clone() - self[(j, i)].clone()).near_zero(tol))
            })
    }

    /// Largest absolute entry and its position, first occurrence in row-major order.
    pub fn max_abs(&self) -> (S, Option<(usize, usize)>) {
        let mut best = S::zero();
        let mut at = None;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)].abs();
                if a > best {
                    best = a;
                    at = Some((i, j));
                }
            }
        }
        (best, at)
    }

    pub fn map(&self, f: impl Fn(&S) -> S) -> Mat<S> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    fn pivot_row(&self, col: usize, from: usize, tol: f64) -> Option<usize> {
        match S::MODE {
            Mode::Exact => (from..self.rows).find(|&r| !self[(r, col)].is_zero()),
            Mode::Float => {
                let mut best: Option<(usize, S)> = None;
                for r in from..self.rows {
                    let a = self[(r, col)].abs();
                    if a.near_zero(tol) {
                        continue;
                    }
                    if best.as_ref().map_or(true, |(_, b)| a > *b) {
                        best = Some((r, a));
                    }
                }
                best.map(|(r, _)| r)
            }
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Reduced row echelon form and pivot columns.
    ///
    /// Exact mode pivots on the lowest-index nonzero row; float mode uses partial
    /// pivoting with ties broken by the lowest index.
    pub fn rref(&self, tol: f64) -> (Mat<S>, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = m.pivot_row(c, r, tol) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = S::one() / m[(r, c)].clone();
            for j in 0..m.cols {
                let v = m[(r, j)].mul_ref(&inv);
                m[(r, j)] = v;
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let f = m[(i, c)].clone();
                if f.is_zero() {
                    continue;
                }
                for j in 0..m.cols {
                    let t = f.mul_ref(&m[(r, j)]);
                    m.data[i * m.cols + j].sub_ref(&t);
                }
            }
            if S::MODE == Mode::Float {
                for i in 0..m.rows {
                    if i != r && m[(i, c)].near_zero(tol) {
                        m[(i, c)] = S::zero();
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.rref(tol).1.len()
    }

    /// Basis of the right kernel, one vector per free column, in column order.
    pub fn kernel(&self, tol: f64) -> Vec<Vec<S>> {
        let (r, pivots) = self.rref(tol);
        let mut out = Vec::new();
        for free in 0..self.cols {
            if pivots.contains(&free) {
                continue;
            }
            let mut v = vec![S::zero(); self.cols];
            v[free] = S::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -r[(row, free)].clone();
            }
            out.push(v);
        }
        out
    }

    pub fn inverse(&self, tol: f64) -> Option<Mat<S>> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let aug = Mat::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self[(i, j)].clone()
            } else if j - n == i {
                S::one()
            } else {
                S::zero()
            }
        });
        let (r, pivots) = aug.rref(tol);
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(Mat::from_fn(n, n, |i, j| r[(i, j + n)].clone()))
    }

    /// Solves `self * x = b` for a square nonsingular matrix.
    pub fn solve(&self, b: &[S], tol: f64) -> Option<Vec<S>> {
        self.inverse(tol).map(|inv| inv.mul_vec(b))
    }

    /// Positive-definiteness test. On failure returns the 1-based size of the
    /// first non-positive leading principal minor (exact mode) or failing
    /// Cholesky pivot (float mode).
    pub fn positive_definite(&self) -> Result<(), usize> {
        if !self.is_square() {
            return Err(0);
        }
        let n = self.rows;
        match S::MODE {
            Mode::Exact => {
                // Elimination without pivoting: the k-th pivot is the ratio of
                // consecutive leading minors, so all minors are positive iff all pivots are.
                let mut m = self.clone();
                for k in 0..n {
                    let p = m[(k, k)].clone();
                    if !p.is_positive() {
                        return Err(k + 1);
                    }
                    for i in k + 1..n {
                        let f = m[(i, k)].clone() / p.clone();
                        if f.is_zero() {
                            continue;
                        }
                        for j in k..n {
                            let t = f.mul_ref(&m[(k, j)]);
                            m.data[i * n + j].sub_ref(&t);
                        }
                    }
                }
                Ok(())
            }
            Mode::Float => {
                let mut l = vec![0.0f64; n * n];
                for j in 0..n {
                    let mut d = self[(j, j)].to_f64();
                    for k in 0..j {
                        d -= l[j * n + k] * l[j * n + k];
                    }
                    if d <= CHOLESKY_TOL {
                        return Err(j + 1);
                    }
                    let d = d.sqrt();
                    l[j * n + j] = d;
                    for i in j + 1..n {
                        let mut s = self[(i, j)].to_f64();
                        for k in 0..j {
                            s -= l[i * n + k] * l[j * n + k];
                        }
                        l[i * n + j] = s / d;
                    }
                }
                Ok(())
            }
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self[(i, j)] = v;
    }

    pub fn to_nested(&self) -> Vec<Vec<S>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }
}

impl<S> Index<(usize, usize)> for Mat<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for Mat<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot<S: Scalar>(u: &[S], v: &[S]) -> S {
    let mut acc = S::zero();
    for (a, b) in u.iter().zip(v) {
        acc.add_mul(a, b);
    }
    acc
}

/// Bilinear form `uᵀ G v`.
pub fn gdot<S: Scalar>(g: &Mat<S>, u: &[S], v: &[S]) -> S {
    let mut acc = S::zero();
    for (i, ui) in u.iter().enumerate() {
        if ui.is_zero() {
            continue;
        }
        for (j, vj) in v.iter().enumerate() {
            if vj.is_zero() {
                continue;
            }
            let t = ui.mul_ref(vj);
            acc.add_mul(&t, &g[(i, j)]);
        }
    }
    acc
}

pub fn vadd<S: Scalar>(u: &[S], v: &[S]) -> Vec<S> {
    u.iter().zip(v).map(|(a, b)| a.clone() + b.clone()).collect()
}

pub fn vsub<S: Scalar>(u: &[S], v: &[S]) -> Vec<S> {
    u.iter().zip(v).map(|(a, b)| a.clone() - b.clone()).collect()
}

pub fn vscale<S: Scalar>(s: &S, v: &[S]) -> Vec<S> {
    v.iter().map(|a| a.mul_ref(s)).collect()
}

/// `u += s * v`.
pub fn axpy<S: Scalar>(u: &mut [S], s: &S, v: &[S]) {
    if s.is_zero() {
        return;
    }
    for (a, b) in u.iter_mut().zip(v) {
        a.add_mul(s, b);
    }
}

pub fn unit<S: Scalar>(n: usize, i: usize) -> Vec<S> {
    let mut v = vec![S::zero(); n];
    v[i] = S::one();
    v
}

/// Largest absolute component and its index.
pub fn vmax_abs<S: Scalar>(v: &[S]) -> (S, Option<usize>) {
    let mut best = S::zero();
    let mut at = None;
    for (i, x) in v.iter().enumerate() {
        let a = x.abs();
        if a > best {
            best = a;
            at = Some(i);
        }
    }
    (best, at)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Scalar, Q};
    use num::Zero;

    fn q(n: i64, d: i64) -> Q {
        Q::ratio(n, d)
    }

    #[test]
    fn inverse_roundtrip_exact() {
        let m = Mat::from_fn(3, 3, |i, j| q((i * 3 + j) as i64 % 5 + (i == j) as i64 * 4, 1));
        let inv = m.inverse(0.0).unwrap();
        assert_eq!(m.mul(&inv), Mat::identity(3));
    }

    #[test]
    fn kernel_of_rank_one() {
        let m = Mat::from_fn(2, 3, |i, j| q(((i + 1) * (j + 1)) as i64, 1));
        let k = m.kernel(0.0);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(m.mul_vec(v).iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn leading_minor_reports_index() {
        let m = Mat::from_fn(2, 2, |i, j| if i == j { q(1, 1) } else { q(2, 1) });
        assert_eq!(m.positive_definite(), Err(2));
        assert_eq!(Mat::<Q>::identity(4).positive_definite(), Ok(()));
        let f = Mat::from_fn(2, 2, |i, j| if i == j { 1.0 } else { 2.0 });
        assert_eq!(f.positive_definite(), Err(2));
    }
}
