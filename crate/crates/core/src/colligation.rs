//! Block matrices of size `α + mN` considered up to conjugation by
//! `ι(u) = diag(1_α, u, …, u)`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::{Field, Mode};

/// Max-entry defect tolerated by the float unitarity check.
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Shape {
    pub alpha: usize,
    pub m: usize,
    pub n: usize,
}

impl Shape {
    pub fn new(alpha: usize, m: usize, n: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Shape("m must be at least 1".into()));
        }
        Ok(Shape { alpha, m, n })
    }

    /// `α + mN`.
    pub fn size(&self) -> usize {
        self.alpha + self.m * self.n
    }

    /// First row/column of the large block with zero-based index `beta`.
    pub fn offset(&self, beta: usize) -> usize {
        self.alpha + beta * self.n
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(alpha={}, m={}, N={})", self.alpha, self.m, self.n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Flavor {
    General,
    Invertible,
    Unitary,
}

impl Flavor {
    pub fn as_str(self) -> &'static str {
        match self {
            Flavor::General => "general",
            Flavor::Invertible => "invertible",
            Flavor::Unitary => "unitary",
        }
    }

    /// Flavor of a product: the weaker of the two.
    pub fn meet(self, other: Flavor) -> Flavor {
        use Flavor::*;
        match (self, other) {
            (Unitary, Unitary) => Unitary,
            (General, _) | (_, General) => General,
            _ => Invertible,
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Flavor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(Flavor::General),
            "invertible" => Ok(Flavor::Invertible),
            "unitary" => Ok(Flavor::Unitary),
            other => Err(Error::Parse(format!("unknown flavor {other:?}"))),
        }
    }
}

/// Addresses one block of a colligation. Indices are zero-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Selector {
    A,
    B(usize),
    C(usize),
    D(usize, usize),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Size { expected: usize, rows: usize, cols: usize },
    NotUnitary { defect: f64 },
    Singular,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupKind {
    GeneralLinear,
    Unitary,
}

/// An element `u` of `GL(N)` or `U(N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct InnerGroupElement<F> {
    u: Mat<F>,
    kind: GroupKind,
}

fn is_unitary<F: Field>(m: &Mat<F>) -> (bool, f64) {
    let defect = m.adjoint().matmul(m).sub(&Mat::identity(m.cols()));
    if F::is_exact() {
        (defect.is_zero(), if defect.is_zero() { 0.0 } else { defect.max_abs() })
    } else {
        let d = defect.max_abs();
        (d <= UNITARY_TOL, d)
    }
}

fn is_singular<F: Field>(m: &Mat<F>) -> bool {
    if m.rows() == 0 {
        return false;
    }
    if F::is_exact() {
        m.det().is_zero()
    } else {
        let c = m.map(F::to_c64);
        let sv = c.singular_values();
        sv.last().copied().unwrap_or(0.0) <= 1e-12 * sv[0].max(f64::MIN_POSITIVE)
    }
}

impl<F: Field> InnerGroupElement<F> {
    pub fn new(u: Mat<F>, kind: GroupKind) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::Dimension("inner group element must be square".into()));
        }
        if is_singular(&u) {
            return Err(Error::Singular);
        }
        if kind == GroupKind::Unitary {
            let (ok, defect) = is_unitary(&u);
            if !ok {
                return Err(Error::Precondition(format!("u is not unitary (defect {defect:e})")));
            }
        }
        Ok(InnerGroupElement { u, kind })
    }

    pub fn identity(n: usize) -> Self {
        InnerGroupElement {
            u: Mat::identity(n),
            kind: GroupKind::Unitary,
        }
    }

    /// Random invertible element with entries from [`Field::sample`].
    pub fn random_gl(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let u = Mat::from_fn(n, n, |_, _| F::sample(&mut rng));
            if !is_singular(&u) {
                return InnerGroupElement {
                    u,
                    kind: GroupKind::GeneralLinear,
                };
            }
        }
    }

    pub fn matrix(&self) -> &Mat<F> {
        &self.u
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.u.rows()
    }

    pub fn inverse(&self) -> Result<Self> {
        Ok(InnerGroupElement {
            u: self.u.inverse()?,
            kind: self.kind,
        })
    }
}

impl InnerGroupElement<Complex64> {
    pub fn random_unitary(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        InnerGroupElement {
            u: Mat::haar_unitary(n, &mut rng),
            kind: GroupKind::Unitary,
        }
    }
}

/// `ι(u) = diag(1_α, u, …, u)` with `m` copies of `u`.
pub fn iota<F: Field>(u: &Mat<F>, alpha: usize, m: usize) -> Mat<F> {
    let id = Mat::identity(alpha);
    let mut blocks: Vec<&Mat<F>> = vec![&id];
    blocks.extend(std::iter::repeat_n(u, m));
    Mat::direct_sum(&blocks)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Colligation<F> {
    shape: Shape,
    flavor: Flavor,
    matrix: Mat<F>,
}

impl<F: Field> Colligation<F> {
    /// Builds a colligation and checks every invariant.
    pub fn new(shape: Shape, flavor: Flavor, matrix: Mat<F>) -> Result<Self> {
        let c = Colligation::new_unchecked(shape, flavor, matrix);
        match c.validate().first() {
            None => Ok(c),
            Some(Violation::Size { expected, rows, cols }) => Err(Error::Shape(format!(
                "{rows}x{cols} matrix for shape {shape} (expected {expected}x{expected})"
            ))),
            Some(Violation::NotUnitary { defect }) => {
                Err(Error::Precondition(format!("not unitary (defect {defect:e})")))
            }
            Some(Violation::Singular) => Err(Error::Singular),
        }
    }

    /// No checks; see [`Colligation::validate`].
    pub fn new_unchecked(shape: Shape, flavor: Flavor, matrix: Mat<F>) -> Self {
        Colligation { shape, flavor, matrix }
    }

    pub fn identity(shape: Shape) -> Self {
        Colligation {
            shape,
            flavor: Flavor::Unitary,
            matrix: Mat::identity(shape.size()),
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }
    pub fn flavor(&self) -> Flavor {
        self.flavor
    }
    pub fn matrix(&self) -> &Mat<F> {
        &self.matrix
    }
    pub fn mode(&self) -> Mode {
        F::MODE
    }

    pub fn with_flavor(mut self, flavor: Flavor) -> Self {
        self.flavor = flavor;
        self
    }

    pub fn validate(&self) -> Vec<Violation> {
        let expected = self.shape.size();
        let (rows, cols) = (self.matrix.rows(), self.matrix.cols());
        if rows != expected || cols != expected {
            return vec![Violation::Size { expected, rows, cols }];
        }
        let mut out = Vec::new();
        match self.flavor {
            Flavor::General => {}
            Flavor::Invertible => {
                if is_singular(&self.matrix) {
                    out.push(Violation::Singular);
                }
            }
            Flavor::Unitary => {
                let (ok, defect) = is_unitary(&self.matrix);
                if !ok {
                    out.push(Violation::NotUnitary { defect });
                }
            }
        }
        out
    }

    pub fn block(&self, sel: Selector) -> Result<Mat<F>> {
        let Shape { alpha, m, n } = self.shape;
        let check = |i: usize| {
            if i < m {
                Ok(())
            } else {
                Err(Error::Index(format!("block index {} with m = {m}", i + 1)))
            }
        };
        Ok(match sel {
            Selector::A => self.matrix.block(0, 0, alpha, alpha),
            Selector::B(beta) => {
                check(beta)?;
                self.matrix.block(0, self.shape.offset(beta), alpha, n)
            }
            Selector::C(gamma) => {
                check(gamma)?;
                self.matrix.block(self.shape.offset(gamma), 0, n, alpha)
            }
            Selector::D(phi, psi) => {
                check(phi)?;
                check(psi)?;
                self.matrix
                    .block(self.shape.offset(phi), self.shape.offset(psi), n, n)
            }
        })
    }

    pub fn a(&self) -> Mat<F> {
        self.matrix.block(0, 0, self.shape.alpha, self.shape.alpha)
    }

    /// `b = (b_1 … b_m)`, of size `α × mN`.
    pub fn b(&self) -> Mat<F> {
        let s = self.shape;
        self.matrix.block(0, s.alpha, s.alpha, s.m * s.n)
    }

    /// `c`, of size `mN × α`.
    pub fn c(&self) -> Mat<F> {
        let s = self.shape;
        self.matrix.block(s.alpha, 0, s.m * s.n, s.alpha)
    }

    /// `d = (d_{φψ})`, of size `mN × mN`.
    pub fn d(&self) -> Mat<F> {
        let s = self.shape;
        self.matrix.block(s.alpha, s.alpha, s.m * s.n, s.m * s.n)
    }

    pub fn d_block(&self, phi: usize, psi: usize) -> Result<Mat<F>> {
        self.block(Selector::D(phi, psi))
    }

    /// `ι(u)·g·ι(u)⁻¹`.
    pub fn conjugate(&self, u: &InnerGroupElement<F>) -> Result<Self> {
        if u.n() != self.shape.n {
            return Err(Error::Dimension(format!(
                "u of size {} for N = {}",
                u.n(),
                self.shape.n
            )));
        }
        if self.flavor == Flavor::Unitary && u.kind() != GroupKind::Unitary {
            return Err(Error::Precondition(
                "unitary colligations are conjugated by unitary elements only".into(),
            ));
        }
        let Shape { alpha, m, .. } = self.shape;
        let left = iota(u.matrix(), alpha, m);
        let right = iota(&u.matrix().inverse()?, alpha, m);
        Ok(Colligation {
            shape: self.shape,
            flavor: self.flavor,
            matrix: left.matmul(&self.matrix).matmul(&right),
        })
    }

    /// The embedding `N → N + 1`: zero padding for `b`, `c` and off-diagonal
    /// `d` blocks, a trailing `1` on each diagonal `d_{φφ}`.
    pub fn embed(&self) -> Self {
        let Shape { alpha, m, n } = self.shape;
        let shape = Shape { alpha, m, n: n + 1 };
        let map = |i: usize| {
            if i < alpha {
                i
            } else {
                let (beta, r) = ((i - alpha) / n, (i - alpha) % n);
                shape.offset(beta) + r
            }
        };
        let mut out = Mat::zeros(shape.size(), shape.size());
        let size = self.shape.size();
        for r in 0..size {
            for c in 0..size {
                out[(map(r), map(c))] = self.matrix[(r, c)].clone();
            }
        }
        for beta in 0..m {
            let k = shape.offset(beta) + n;
            out[(k, k)] = F::one();
        }
        Colligation {
            shape,
            flavor: self.flavor,
            matrix: out,
        }
    }

    /// Position of coordinate `i` of copy `copy` in the amplified colligation
    /// with shape `(jα, jm, N)`, using the copy-major ordering.
    pub fn amplified_index(shape: Shape, j: usize, copy: usize, i: usize) -> usize {
        let Shape { alpha, m, n } = shape;
        if i < alpha {
            copy * alpha + i
        } else {
            let (beta, r) = ((i - alpha) / n, (i - alpha) % n);
            j * alpha + (copy * m + beta) * n + r
        }
    }

    /// The direct sum of `j` copies, re-indexed to shape `(jα, jm, N)`.
    pub fn amplify(&self, j: usize) -> Result<Self> {
        if j == 0 {
            return Err(Error::Precondition("amplification level must be at least 1".into()));
        }
        let Shape { alpha, m, n } = self.shape;
        let shape = Shape::new(j * alpha, j * m, n)?;
        let size = self.shape.size();
        let mut out = Mat::zeros(shape.size(), shape.size());
        for copy in 0..j {
            for r in 0..size {
                for c in 0..size {
                    let v = &self.matrix[(r, c)];
                    if v.is_zero() {
                        continue;
                    }
                    out[(
                        Self::amplified_index(self.shape, j, copy, r),
                        Self::amplified_index(self.shape, j, copy, c),
                    )] = v.clone();
                }
            }
        }
        Ok(Colligation {
            shape,
            flavor: self.flavor,
            matrix: out,
        })
    }

    /// Deterministic in `seed`. Exact mode supports the general and
    /// invertible flavors; unitary colligations are Haar-distributed.
    pub fn random(shape: Shape, flavor: Flavor, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let size = shape.size();
        let matrix = match flavor {
            Flavor::Unitary if F::is_exact() => {
                return Err(Error::Unsupported(
                    "exact mode cannot sample unitary colligations".into(),
                ))
            }
            Flavor::Unitary => Mat::haar_unitary(size, &mut rng).map(|z| F::from_c64(*z)),
            Flavor::General => Mat::from_fn(size, size, |_, _| F::sample(&mut rng)),
            Flavor::Invertible => loop {
                let m = Mat::from_fn(size, size, |_, _| F::sample(&mut rng));
                if !is_singular(&m) {
                    break m;
                }
            },
        };
        Ok(Colligation { shape, flavor, matrix })
    }
}
