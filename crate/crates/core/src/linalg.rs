//! Small dense linear algebra over [`Real`].
//!
//! Everything here is sized for image-space work (q <= 6) and desk-scale
//! scalar programs (a few hundred variables), so plain row-major storage and
//! textbook factorizations are sufficient.

use std::ops::{Index, IndexMut};

use crate::scalar::Real;

#[inline]
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

#[inline]
pub fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

#[inline]
pub fn norm_inf<T: Real>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}

#[inline]
pub fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

#[inline]
pub fn add<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

#[inline]
pub fn scale<T: Real>(a: &[T], s: T) -> Vec<T> {
    a.iter().map(|&x| x * s).collect()
}

/// `y += alpha * x`
#[inline]
pub fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}

pub fn dist<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>().sqrt()
}

/// Returns `a / ||a||`, or `None` for a (numerically) zero vector.
pub fn normalized<T: Real>(a: &[T]) -> Option<Vec<T>> {
    let n = norm(a);
    if n <= T::min_positive_value() * T::lit(1e4) || !n.is_finite() {
        None
    } else {
        Some(scale(a, T::one() / n))
    }
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn diag(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    /// Builds from a list of rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix");
            data.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, data }
    }

    pub fn from_cols(cols: &[Vec<T>]) -> Self {
        Self::from_rows(cols).transpose()
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `selfᵀ x`
    pub fn tr_mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.rows);
        let mut y = vec![T::zero(); self.cols];
        for (i, &xi) in x.iter().enumerate() {
            if xi != T::zero() {
                axpy(xi, self.row(i), &mut y);
            }
        }
        y
    }

    pub fn mul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let orow = other.row(k).to_vec();
                axpy(a, &orow, out.row_mut(i));
            }
        }
        out
    }

    /// `selfᵀ self`
    pub fn gram(&self) -> Mat<T> {
        let mut g = Mat::zeros(self.cols, self.cols);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..self.cols {
                if row[i] == T::zero() {
                    continue;
                }
                for j in 0..self.cols {
                    g[(i, j)] = g[(i, j)] + row[i] * row[j];
                }
            }
        }
        g
    }

    pub fn scaled(&self, s: T) -> Mat<T> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    /// `self += s * other`
    pub fn add_scaled(&mut self, s: T, other: &Mat<T>) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        axpy(s, &other.data, &mut self.data);
    }

    /// `xᵀ self x`
    pub fn quad_form(&self, x: &[T]) -> T {
        dot(x, &self.mul_vec(x))
    }

    pub fn max_abs(&self) -> T {
        norm_inf(&self.data)
    }

    pub fn asymmetry(&self) -> T {
        let mut m = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols.min(self.rows) {
                m = m.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        m
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization with partial pivoting.
pub struct Lu<T> {
    lu: Mat<T>,
    perm: Vec<usize>,
}

impl<T: Real> Lu<T> {
    /// Factors a square matrix; returns `None` if a pivot falls below
    /// `tol * max|a|`.
    pub fn new(a: &Mat<T>, tol: T) -> Option<Self> {
        assert!(a.is_square());
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs().max(T::min_positive_value());
        for k in 0..n {
            let (p, pv) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, -T::one()), |b, c| if c.1 > b.1 { c } else { b });
            if pv <= tol * scale || !pv.is_finite() {
                return None;
            }
            if p != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
                perm.swap(k, p);
            }
            let piv = lu[(k, k)];
            for i in (k + 1)..n {
                let f = lu[(i, k)] / piv;
                lu[(i, k)] = f;
                if f != T::zero() {
                    for j in (k + 1)..n {
                        lu[(i, j)] = lu[(i, j)] - f * lu[(k, j)];
                    }
                }
            }
        }
        Some(Lu { lu, perm })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.lu.rows();
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s = s - self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s = s - self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }
}

/// Solves `a x = b`; `None` when `a` is numerically singular.
pub fn solve<T: Real>(a: &Mat<T>, b: &[T]) -> Option<Vec<T>> {
    Lu::new(a, T::epsilon() * T::lit(16.0)).map(|lu| lu.solve(b))
}

/// Solves `a x = b` for a symmetric (near) positive semidefinite `a`,
/// regularizing the diagonal if the plain factorization fails.
pub fn solve_sym_regularized<T: Real>(a: &Mat<T>, b: &[T]) -> Option<Vec<T>> {
    if let Some(x) = solve(a, b) {
        return Some(x);
    }
    let scale = a.max_abs().max(T::one());
    let mut reg = T::epsilon().sqrt() * scale;
    for _ in 0..6 {
        let mut ar = a.clone();
        for i in 0..a.rows() {
            ar[(i, i)] = ar[(i, i)] + reg;
        }
        if let Some(x) = solve(&ar, b) {
            return Some(x);
        }
        reg = reg * T::lit(100.0);
    }
    None
}

/// Numerical rank of the matrix whose rows are `rows`, by Gaussian
/// elimination with complete pivoting. Entries below `tol * max|a|` count as
/// zero.
pub fn rank<T: Real>(rows: &[&[T]], tol: T) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    let mut m: Vec<Vec<T>> = rows.iter().map(|r| r.to_vec()).collect();
    let scale = m
        .iter()
        .map(|r| norm_inf(r))
        .fold(T::zero(), T::max)
        .max(T::min_positive_value());
    let thresh = tol * scale;
    let mut r = 0;
    let mut col_used = vec![false; cols];
    while r < m.len() {
        let mut best = (usize::MAX, usize::MAX, thresh);
        for (i, row) in m.iter().enumerate().skip(r) {
            for (j, &v) in row.iter().enumerate() {
                if !col_used[j] && v.abs() > best.2 {
                    best = (i, j, v.abs());
                }
            }
        }
        if best.0 == usize::MAX {
            break;
        }
        let (pi, pj, _) = best;
        m.swap(r, pi);
        col_used[pj] = true;
        let pivot_row = m[r].clone();
        for row in m.iter_mut().skip(r + 1) {
            let f = row[pj] / pivot_row[pj];
            if f != T::zero() {
                axpy(-f, &pivot_row, row);
                row[pj] = T::zero();
            }
        }
        r += 1;
    }
    r
}

/// Positive semidefiniteness test: Cholesky of `a + shift I` with
/// `shift = tol * (1 + max|a|)`.
pub fn is_psd<T: Real>(a: &Mat<T>, tol: T) -> bool {
    if !a.is_square() {
        return false;
    }
    let n = a.rows();
    let shift = tol * (T::one() + a.max_abs());
    let mut l = Mat::<T>::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)] + shift;
        for k in 0..j {
            d = d - l[(j, k)] * l[(j, k)];
        }
        if d <= T::zero() || !d.is_finite() {
            return false;
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in (j + 1)..n {
            let mut s = (a[(i, j)] + a[(j, i)]) / T::lit(2.0);
            for k in 0..j {
                s = s - l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    true
}

/// Minimum-norm solution of the consistent system `e x = f`.
/// Returns `None` if the system is inconsistent beyond `tol`.
pub fn least_norm<T: Real>(e: &Mat<T>, f: &[T], tol: T) -> Option<Vec<T>> {
    let n = e.cols();
    if e.rows() == 0 {
        return Some(vec![T::zero(); n]);
    }
    let eet = e.mul(&e.transpose());
    let y = solve_sym_regularized(&eet, f)?;
    let x = e.tr_mul_vec(&y);
    let res = sub(&e.mul_vec(&x), f);
    if norm_inf(&res) <= tol * (T::one() + norm_inf(f)) {
        Some(x)
    } else {
        None
    }
}
