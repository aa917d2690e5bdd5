//! Dense matrices over a [`Field`], with elimination routines that work in
//! both arithmetic modes. Singular values and QR for the float mode go
//! through `nalgebra`.

use std::fmt;
use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Field;

/// Default relative pivot tolerance for float elimination.
pub const PIVOT_TOL: f64 = 1e-12;

#[derive(Clone, PartialEq)]
pub struct Mat<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: fmt::Debug> fmt::Debug for Mat<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[r * self.cols..(r + 1) * self.cols])?;
        }
        write!(f, "]")
    }
}

impl<F> Index<(usize, usize)> for Mat<F> {
    type Output = F;
    fn index(&self, (r, c): (usize, usize)) -> &F {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl<F> IndexMut<(usize, usize)> for Mat<F> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut F {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl<F> Mat<F> {
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
    pub fn as_slice(&self) -> &[F] {
        &self.data
    }
    pub fn row(&self, r: usize) -> &[F] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
    pub fn map<G, M: FnMut(&F) -> G>(&self, f: M) -> Mat<G> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

/// Result of reducing a matrix to reduced row echelon form.
#[derive(Clone, Debug)]
pub struct Echelon<F> {
    pub rref: Mat<F>,
    pub pivots: Vec<usize>,
}

impl<F: Field> Mat<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = F::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<F>>) -> Result<Self> {
        let nr = rows.len();
        let nc = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != nc) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Mat {
            rows: nr,
            cols: nc,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<F>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Mat { rows, cols, data })
    }

    pub fn to_rows(&self) -> Vec<Vec<F>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn adjoint(&self) -> Self {
        Mat::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn matmul(&self, other: &Mat<F>) -> Mat<F> {
        assert_eq!(
            self.cols, other.rows,
            "matmul: {}x{} times {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out: Mat<F> = Mat::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = &other[(k, c)];
                    if b.is_zero() {
                        continue;
                    }
                    let prod = a.mul_ref(b);
                    out.data[r * other.cols + c].add_assign_ref(&prod);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Mat<F>) -> Mat<F> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (o, b) in out.data.iter_mut().zip(&other.data) {
            o.add_assign_ref(b);
        }
        out
    }

    pub fn sub(&self, other: &Mat<F>) -> Mat<F> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (o, b) in out.data.iter_mut().zip(&other.data) {
            o.sub_assign_ref(b);
        }
        out
    }

    pub fn scale(&self, s: &F) -> Mat<F> {
        self.map(|x| x.mul_ref(s))
    }

    pub fn neg(&self) -> Mat<F> {
        self.map(|x| -x.clone())
    }

    /// Copy of the `nr x nc` sub-block whose top-left corner is `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Mat<F> {
        assert!(r0 + nr <= self.rows && c0 + nc <= self.cols);
        Mat::from_fn(nr, nc, |r, c| self[(r0 + r, c0 + c)].clone())
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Mat<F>) {
        assert!(r0 + b.rows <= self.rows && c0 + b.cols <= self.cols);
        for r in 0..b.rows {
            for c in 0..b.cols {
                self[(r0 + r, c0 + c)] = b[(r, c)].clone();
            }
        }
    }

    /// Kronecker product `self ⊗ other`: entry `((i,k),(j,l)) = self[i,j]·other[k,l]`.
    pub fn kron(&self, other: &Mat<F>) -> Mat<F> {
        let (p, q) = (other.rows, other.cols);
        Mat::from_fn(self.rows * p, self.cols * q, |r, c| {
            self[(r / p, c / q)].mul_ref(&other[(r % p, c % q)])
        })
    }

    /// Block-diagonal matrix with the given blocks.
    pub fn direct_sum(blocks: &[&Mat<F>]) -> Mat<F> {
        let nr = blocks.iter().map(|b| b.rows).sum();
        let nc = blocks.iter().map(|b| b.cols).sum();
        let mut out = Mat::zeros(nr, nc);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            out.set_block(r0, c0, b);
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    pub fn hstack(&self, other: &Mat<F>) -> Mat<F> {
        assert_eq!(self.rows, other.rows);
        let mut out = Mat::zeros(self.rows, self.cols + other.cols);
        out.set_block(0, 0, self);
        out.set_block(0, self.cols, other);
        out
    }

    pub fn vstack(&self, other: &Mat<F>) -> Mat<F> {
        assert_eq!(self.cols, other.cols);
        let mut out = Mat::zeros(self.rows + other.rows, self.cols);
        out.set_block(0, 0, self);
        out.set_block(self.rows, 0, other);
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(F::modulus).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(F::is_zero)
    }

    pub fn trace(&self) -> F {
        assert!(self.is_square());
        let mut t = F::zero();
        for i in 0..self.rows {
            t.add_assign_ref(&self[(i, i)]);
        }
        t
    }

    /// Row index of the pivot for column `c` among rows `from..`.
    fn choose_pivot(&self, c: usize, from: usize, tol: f64, scale: f64) -> Option<usize> {
        if F::is_exact() {
            return (from..self.rows).find(|&r| !self[(r, c)].is_zero());
        }
        let (best, val) = (from..self.rows)
            .map(|r| (r, self[(r, c)].modulus()))
            .fold((None, 0.0), |acc, (r, v)| if v > acc.1 { (Some(r), v) } else { acc });
        match best {
            Some(r) if !self[(r, c)].negligible(tol, scale) && val > 0.0 => Some(r),
            _ => None,
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Determinant by Gaussian elimination (partial pivoting in float mode).
    pub fn det(&self) -> F {
        assert!(self.is_square(), "det of non-square matrix");
        let n = self.rows;
        let mut m = self.clone();
        let mut det = F::one();
        for c in 0..n {
            let Some(p) = m.choose_pivot(c, c, 0.0, 0.0) else {
                return F::zero();
            };
            if p != c {
                m.swap_rows(p, c);
                det = -det;
            }
            let piv = m[(c, c)].clone();
            det = det.mul_ref(&piv);
            for r in c + 1..n {
                if m[(r, c)].is_zero() {
                    continue;
                }
                let f = m[(r, c)].clone() / piv.clone();
                for k in c..n {
                    let t = f.mul_ref(&m[(c, k)]);
                    m[(r, k)].sub_assign_ref(&t);
                }
            }
        }
        det
    }

    /// Reduced row echelon form. In float mode entries with modulus
    /// `<= tol * max_abs` are treated as zero.
    pub fn echelon(&self, tol: f64) -> Echelon<F> {
        let mut m = self.clone();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut pivots = Vec::new();
        let mut row = 0;
        for c in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = m.choose_pivot(c, row, tol, scale) else {
                if !F::is_exact() {
                    for r in row..m.rows {
                        m[(r, c)] = F::zero();
                    }
                }
                continue;
            };
            m.swap_rows(p, row);
            let inv = F::one() / m[(row, c)].clone();
            for k in c..m.cols {
                m[(row, k)] = m[(row, k)].mul_ref(&inv);
            }
            for r in 0..m.rows {
                if r == row || m[(r, c)].is_zero() {
                    continue;
                }
                let f = m[(r, c)].clone();
                for k in c..m.cols {
                    let t = f.mul_ref(&m[(row, k)]);
                    m[(r, k)].sub_assign_ref(&t);
                }
                m[(r, c)] = F::zero();
            }
            pivots.push(c);
            row += 1;
        }
        if !F::is_exact() {
            for r in row..m.rows {
                for c in 0..m.cols {
                    m[(r, c)] = F::zero();
                }
            }
        }
        Echelon { rref: m, pivots }
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.echelon(tol).pivots.len()
    }

    /// Basis of the right null space, one vector per column.
    pub fn nullspace(&self, tol: f64) -> Mat<F> {
        let Echelon { rref, pivots } = self.echelon(tol);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Mat::zeros(self.cols, free.len());
        for (k, &f) in free.iter().enumerate() {
            basis[(f, k)] = F::one();
            for (i, &p) in pivots.iter().enumerate() {
                basis[(p, k)] = -rref[(i, f)].clone();
            }
        }
        basis
    }

    /// Solves `self · X = rhs` for square nonsingular `self`.
    pub fn solve(&self, rhs: &Mat<F>) -> Result<Mat<F>> {
        if !self.is_square() || rhs.rows != self.rows {
            return Err(Error::Dimension(format!(
                "solve {}x{} with rhs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut b = rhs.clone();
        for c in 0..n {
            let p = a.choose_pivot(c, c, 0.0, 0.0).ok_or(Error::Singular)?;
            a.swap_rows(p, c);
            b.swap_rows(p, c);
            let piv = a[(c, c)].clone();
            for r in c + 1..n {
                if a[(r, c)].is_zero() {
                    continue;
                }
                let f = a[(r, c)].clone() / piv.clone();
                for k in c..n {
                    let t = f.mul_ref(&a[(c, k)]);
                    a[(r, k)].sub_assign_ref(&t);
                }
                for k in 0..b.cols {
                    let t = f.mul_ref(&b[(c, k)]);
                    b[(r, k)].sub_assign_ref(&t);
                }
            }
        }
        let mut x = Mat::zeros(n, b.cols);
        for k in 0..b.cols {
            for r in (0..n).rev() {
                let mut acc = b[(r, k)].clone();
                for c in r + 1..n {
                    let t = a[(r, c)].mul_ref(&x[(c, k)]);
                    acc.sub_assign_ref(&t);
                }
                x[(r, k)] = acc / a[(r, r)].clone();
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Mat<F>> {
        self.solve(&Mat::identity(self.rows))
    }

    /// Entrywise closeness (exact equality in exact mode).
    pub fn close_to(&self, other: &Mat<F>, tol: f64) -> bool {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return false;
        }
        if F::is_exact() {
            return self == other;
        }
        let scale = 1f64.max(self.max_abs()).max(other.max_abs());
        self.sub(other).max_abs() <= tol * scale
    }
}

impl Mat<Complex64> {
    pub fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<Complex64>) -> Self {
        Mat::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Vec<f64> {
        if self.rows == 0 || self.cols == 0 {
            return Vec::new();
        }
        let mut sv: Vec<f64> = self.to_nalgebra().singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    pub fn spectral_norm(&self) -> f64 {
        self.singular_values().first().copied().unwrap_or(0.0)
    }

    /// Haar-distributed unitary: QR of a complex Gaussian matrix with the
    /// phases of `R`'s diagonal moved into `Q`.
    pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        if n == 0 {
            return Mat::zeros(0, 0);
        }
        let g = Mat::from_fn(n, n, |_, _| Complex64::sample(rng));
        let qr = g.to_nalgebra().qr();
        let (q, r) = (qr.q(), qr.r());
        Mat::from_fn(n, n, |i, j| {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
            q[(i, j)] * phase
        })
    }

    /// `max |(A*A - 1)_{ij}|`.
    pub fn unitarity_defect(&self) -> f64 {
        self.adjoint()
            .matmul(self)
            .sub(&Mat::identity(self.cols))
            .max_abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::GaussRat;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(v: i64) -> GaussRat {
        GaussRat::from_i64(v)
    }

    #[test]
    fn exact_det_and_inverse() {
        let m = Mat::from_rows(vec![
            vec![q(2), q(1), q(0)],
            vec![q(1), q(3), q(1)],
            vec![q(0), q(1), q(4)],
        ])
        .unwrap();
        // 2(12-1) - 1(4-0) = 18
        assert_eq!(m.det(), q(18));
        let inv = m.inverse().unwrap();
        assert_eq!(m.matmul(&inv), Mat::identity(3));
    }

    #[test]
    fn singular_detection() {
        let m = Mat::from_rows(vec![vec![q(1), q(2)], vec![q(2), q(4)]]).unwrap();
        assert_eq!(m.det(), q(0));
        assert!(matches!(m.inverse(), Err(Error::Singular)));
        assert_eq!(m.rank(0.0), 1);
        let ns = m.nullspace(0.0);
        assert_eq!(ns.cols(), 1);
        assert!(m.matmul(&ns).is_zero());
    }

    #[test]
    fn kron_layout() {
        let a = Mat::from_rows(vec![vec![q(1), q(2)], vec![q(3), q(4)]]).unwrap();
        let k = a.kron(&Mat::identity(2));
        assert_eq!(k[(0, 2)], q(2));
        assert_eq!(k[(1, 3)], q(2));
        assert_eq!(k[(0, 3)], q(0));
        assert_eq!(k[(3, 1)], q(3));
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..6 {
            let u = Mat::haar_unitary(n, &mut rng);
            assert!(u.unitarity_defect() < 1e-12);
        }
    }

    #[test]
    fn float_det_matches_product_of_singular_values_modulus() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = Mat::from_fn(4, 4, |_, _| Complex64::sample(&mut rng));
        let prod: f64 = m.singular_values().iter().product();
        assert!((m.det().norm() - prod).abs() < 1e-10 * prod.max(1.0));
    }
}
