//! Sparse multivariate polynomials over a [`Field`].
//!
//! Terms are stored in a `BTreeMap` keyed by exponent vectors, so the
//! representation is canonical: no zero coefficients, every exponent vector
//! has one slot per variable. Optional [`Truncation`] turns multiplication
//! into arithmetic in a quotient ring, which is how Taylor jets at `S = 0`
//! are computed.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::{close, Field};

/// Identifier of a polynomial variable. Indices are zero-based; display is
/// one-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Flat(usize),
    /// The entry `s_{φψ}^{μν}` of a matrix on `V ⊗ C^j`.
    Entry {
        phi: usize,
        psi: usize,
        mu: usize,
        nu: usize,
    },
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Var::Flat(i) => write!(f, "s{}", i + 1),
            Var::Entry { phi, psi, mu, nu } => {
                write!(f, "s[{}{}|{}{}]", phi + 1, psi + 1, mu + 1, nu + 1)
            }
        }
    }
}

pub type Vars = Arc<Vec<Var>>;

pub fn flat_vars(n: usize) -> Vars {
    Arc::new((0..n).map(Var::Flat).collect())
}

/// Which monomials survive multiplication.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum Truncation {
    #[default]
    None,
    /// Every exponent at most 1.
    Multilinear,
    /// Multilinear, and at most one variable from each group; `groups[i]` is
    /// the group of variable `i`.
    OnePerGroup(Arc<Vec<usize>>),
}

impl Truncation {
    pub fn keeps(&self, exps: &[u32]) -> bool {
        match self {
            Truncation::None => true,
            Truncation::Multilinear => exps.iter().all(|&e| e <= 1),
            Truncation::OnePerGroup(groups) => {
                let mut seen: u64 = 0;
                for (i, &e) in exps.iter().enumerate() {
                    if e == 0 {
                        continue;
                    }
                    if e > 1 {
                        return false;
                    }
                    let bit = 1u64 << groups[i];
                    if seen & bit != 0 {
                        return false;
                    }
                    seen |= bit;
                }
                true
            }
        }
    }

    /// Nilpotent truncations make `1 + x` series terminate.
    pub fn is_nilpotent(&self) -> bool {
        !matches!(self, Truncation::None)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparsePoly<F> {
    vars: Vars,
    terms: BTreeMap<Vec<u32>, F>,
}

/// Outcome of [`SparsePoly::divide_exact`].
#[derive(Clone, Debug, PartialEq)]
pub enum Division<F> {
    Quotient(SparsePoly<F>),
    NotDivisible,
}

impl<F> Division<F> {
    pub fn quotient(self) -> Option<SparsePoly<F>> {
        match self {
            Division::Quotient(q) => Some(q),
            Division::NotDivisible => None,
        }
    }
}

fn same_vars(a: &Vars, b: &Vars) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// Graded lexicographic comparison key.
fn grlex(e: &[u32]) -> (u32, &[u32]) {
    (e.iter().sum(), e)
}

impl<F: Field> SparsePoly<F> {
    pub fn zero(vars: Vars) -> Self {
        SparsePoly {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: Vars, c: F) -> Self {
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            let n = p.vars.len();
            p.terms.insert(vec![0; n], c);
        }
        p
    }

    pub fn one(vars: Vars) -> Self {
        Self::constant(vars, F::one())
    }

    /// The variable with index `i`.
    pub fn var(vars: Vars, i: usize) -> Self {
        assert!(i < vars.len(), "variable index out of range");
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        let mut p = Self::zero(vars);
        p.terms.insert(e, F::one());
        p
    }

    pub fn from_terms(vars: Vars, terms: impl IntoIterator<Item = (Vec<u32>, F)>) -> Result<Self> {
        let mut p = Self::zero(vars);
        for (e, c) in terms {
            if e.len() != p.vars.len() {
                return Err(Error::Dimension(format!(
                    "exponent vector of length {} for {} variables",
                    e.len(),
                    p.vars.len()
                )));
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, e: Vec<u32>, c: F) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                o.get_mut().add_assign_ref(&c);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &F)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Maximum total degree over stored terms; 0 for the zero polynomial.
    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn coeff(&self, exps: &[u32]) -> F {
        self.terms.get(exps).cloned().unwrap_or_else(F::zero)
    }

    pub fn constant_term(&self) -> F {
        self.coeff(&vec![0; self.nvars()])
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    fn check_vars(&self, other: &Self) -> Result<()> {
        if same_vars(&self.vars, &other.vars) {
            Ok(())
        } else {
            Err(Error::VariableMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(|c| -c.clone())
    }

    pub fn scale(&self, s: &F) -> Self {
        if s.is_zero() {
            return Self::zero(self.vars.clone());
        }
        self.map_coeffs(|c| c.mul_ref(s))
    }

    fn map_coeffs(&self, mut f: impl FnMut(&F) -> F) -> Self {
        let mut out = Self::zero(self.vars.clone());
        for (e, c) in &self.terms {
            out.add_term(e.clone(), f(c));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.mul_trunc(other, &Truncation::None)
    }

    /// Product with monomials outside the truncation dropped.
    pub fn mul_trunc(&self, other: &Self, trunc: &Truncation) -> Result<Self> {
        self.check_vars(other)?;
        let mut out = Self::zero(self.vars.clone());
        let mut e = vec![0u32; self.nvars()];
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                for (k, slot) in e.iter_mut().enumerate() {
                    *slot = ea[k] + eb[k];
                }
                if !trunc.keeps(&e) {
                    continue;
                }
                out.add_term(e.clone(), ca.mul_ref(cb));
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Result<Self> {
        let mut acc = Self::one(self.vars.clone());
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Drops the monomials a truncation does not keep.
    pub fn truncate(&self, trunc: &Truncation) -> Self {
        let mut out = Self::zero(self.vars.clone());
        for (e, c) in &self.terms {
            if trunc.keeps(e) {
                out.terms.insert(e.clone(), c.clone());
            }
        }
        out
    }

    /// Direct evaluation: sum over terms of coefficient times monomial.
    pub fn eval(&self, point: &[F]) -> Result<F> {
        if point.len() != self.nvars() {
            return Err(Error::Dimension(format!(
                "point of length {} for {} variables",
                point.len(),
                self.nvars()
            )));
        }
        let mut acc = F::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(e) {
                for _ in 0..k {
                    t = t.mul_ref(x);
                }
            }
            acc.add_assign_ref(&t);
        }
        Ok(acc)
    }

    /// Leading term in graded lexicographic order.
    pub fn leading_term(&self) -> Option<(&Vec<u32>, &F)> {
        self.terms.iter().max_by(|a, b| grlex(a.0).cmp(&grlex(b.0)))
    }

    /// Multivariate long division by a single divisor in graded lex order.
    /// Succeeds iff the remainder is zero.
    pub fn divide_exact(&self, den: &Self) -> Result<Division<F>> {
        self.check_vars(den)?;
        let (lt_e, lt_c) = match den.leading_term() {
            Some((e, c)) => (e.clone(), c.clone()),
            None => return Err(Error::DivisionByZero),
        };
        let mut rem = self.clone();
        let mut quot = Self::zero(self.vars.clone());
        while let Some((e, c)) = rem.leading_term() {
            if e.iter().zip(&lt_e).any(|(a, b)| a < b) {
                return Ok(Division::NotDivisible);
            }
            let qe: Vec<u32> = e.iter().zip(&lt_e).map(|(a, b)| a - b).collect();
            let qc = c.clone() / lt_c.clone();
            let mut t = Self::zero(self.vars.clone());
            t.terms.insert(qe.clone(), qc.clone());
            rem = rem.sub(&den.mul(&t)?)?;
            quot.add_term(qe, qc);
            if !F::is_exact() {
                // Cancellation in float mode is not exact; drop what should
                // have vanished.
                let scale = 1f64.max(self.max_coeff());
                rem.terms.retain(|_, v| v.modulus() > 1e-12 * scale);
            }
        }
        Ok(Division::Quotient(quot))
    }

    /// Drops terms with modulus at most `rel` times the largest.
    pub fn pruned(&self, rel: f64) -> Self {
        let cut = rel * self.max_coeff();
        let mut out = self.clone();
        out.terms.retain(|_, v| v.modulus() > cut);
        out
    }

    pub fn max_coeff(&self) -> f64 {
        self.terms.values().map(F::modulus).fold(0.0, f64::max)
    }

    /// Inverse of a unit (nonzero constant term) in a nilpotent quotient ring.
    pub fn inv_unit(&self, trunc: &Truncation) -> Result<Self> {
        if !trunc.is_nilpotent() {
            return Err(Error::Precondition("series inverse needs a nilpotent truncation".into()));
        }
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let inv0 = F::one() / c0.clone();
        // u = c0 (1 + x), u^{-1} = c0^{-1} Σ (-x)^k
        let x = self
            .sub(&Self::constant(self.vars.clone(), c0))?
            .scale(&inv0);
        let neg_x = x.neg();
        let mut term = Self::one(self.vars.clone());
        let mut acc = term.clone();
        loop {
            term = term.mul_trunc(&neg_x, trunc)?;
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term)?;
        }
        Ok(acc.scale(&inv0))
    }

    /// `ln(self)` for `self` with constant term 1, in a nilpotent quotient ring.
    pub fn log_unit(&self, trunc: &Truncation) -> Result<Self> {
        if !trunc.is_nilpotent() {
            return Err(Error::Precondition("series logarithm needs a nilpotent truncation".into()));
        }
        if self.constant_term() != F::one() {
            return Err(Error::Precondition("log series needs constant term 1".into()));
        }
        let x = self.sub(&Self::one(self.vars.clone()))?;
        let mut power = Self::one(self.vars.clone());
        let mut acc = Self::zero(self.vars.clone());
        let mut k: i64 = 1;
        loop {
            power = power.mul_trunc(&x, trunc)?;
            if power.is_zero() {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            acc = acc.add(&power.scale(&F::from_frac(sign, k)))?;
            k += 1;
        }
        Ok(acc)
    }

    /// Coefficients `c_0, c_1, …` of a univariate polynomial.
    pub fn univariate_coeffs(&self) -> Result<Vec<F>> {
        if self.nvars() != 1 {
            return Err(Error::Precondition("univariate polynomial expected".into()));
        }
        let deg = self.total_degree() as usize;
        let mut out = vec![F::zero(); deg + 1];
        for (e, c) in &self.terms {
            out[e[0] as usize] = c.clone();
        }
        Ok(out)
    }

    pub fn from_univariate(vars: Vars, coeffs: &[F]) -> Result<Self> {
        if vars.len() != 1 {
            return Err(Error::Precondition("univariate polynomial expected".into()));
        }
        Self::from_terms(
            vars,
            coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| (vec![k as u32], c.clone())),
        )
    }

    /// Leading coefficient scaled to 1 (zero stays zero).
    pub fn monic(&self) -> Self {
        match self.leading_term() {
            Some((_, c)) => self.scale(&(F::one() / c.clone())),
            None => self.clone(),
        }
    }

    /// Monic gcd of two univariate polynomials (Euclid over the field).
    pub fn gcd_univariate(&self, other: &Self) -> Result<Self> {
        self.check_vars(other)?;
        let mut a = self.univariate_coeffs()?;
        let mut b = other.univariate_coeffs()?;
        trim(&mut a);
        trim(&mut b);
        while !b.is_empty() {
            let r = poly_rem(&a, &b);
            a = b;
            b = r;
        }
        Ok(Self::from_univariate(self.vars.clone(), &a)?.monic())
    }
}

fn trim<F: Field>(v: &mut Vec<F>) {
    while v.last().is_some_and(F::is_zero) {
        v.pop();
    }
}

/// Remainder of dense univariate division, trimmed.
fn poly_rem<F: Field>(a: &[F], b: &[F]) -> Vec<F> {
    let mut r = a.to_vec();
    trim(&mut r);
    let lb = b.last().expect("nonzero divisor").clone();
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let f = r.last().unwrap().clone() / lb.clone();
        for (i, bi) in b.iter().enumerate() {
            let t = f.mul_ref(bi);
            r[shift + i].sub_assign_ref(&t);
        }
        r.pop();
        trim(&mut r);
    }
    r
}

impl<F: Field + fmt::Display> fmt::Display for SparsePoly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for (v, &k) in self.vars.iter().zip(e) {
                match k {
                    0 => {}
                    1 => write!(f, "*{v}")?,
                    _ => write!(f, "*{v}^{k}")?,
                }
            }
        }
        Ok(())
    }
}

/// Integer sample points in the box `[-2d, 2d]`, deterministic in `seed`.
fn pit_points<F: Field>(nvars: usize, deg_bound: u32, trials: usize, seed: u64) -> Vec<Vec<F>> {
    let half = 2 * i64::from(deg_bound.max(1));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .map(|_| {
            (0..nvars)
                .map(|_| F::from_i64(rng.random_range(-half..=half)))
                .collect()
        })
        .collect()
}

/// Schwartz–Zippel identity test on two evaluators over `nvars` variables.
/// In float mode values agree when `|f - g| <= tol * max(1, |f|, |g|)`.
pub fn pit_equal_fn<F, A, B>(
    nvars: usize,
    deg_bound: u32,
    trials: usize,
    seed: u64,
    tol: f64,
    f: A,
    g: B,
) -> Result<bool>
where
    F: Field,
    A: Fn(&[F]) -> Result<F>,
    B: Fn(&[F]) -> Result<F>,
{
    for point in pit_points::<F>(nvars, deg_bound, trials, seed) {
        if !close(&f(&point)?, &g(&point)?, tol) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Probabilistic polynomial identity test. The degree bound is the larger
/// total degree of the two inputs.
pub fn poly_equal_pit<F: Field>(
    p: &SparsePoly<F>,
    q: &SparsePoly<F>,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<bool> {
    p.check_vars(q)?;
    let d = p.total_degree().max(q.total_degree());
    pit_equal_fn(p.nvars(), d, trials, seed, tol, |x| p.eval(x), |x| q.eval(x))
}

/// Default cap on the side of a polynomial determinant.
pub const DEFAULT_DET_CAP: usize = 12;

/// Matrix of polynomials over one shared variable list.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMatrix<F> {
    rows: usize,
    cols: usize,
    vars: Vars,
    entries: Vec<SparsePoly<F>>,
}

impl<F: Field> PolyMatrix<F> {
    pub fn zeros(rows: usize, cols: usize, vars: Vars) -> Self {
        PolyMatrix {
            rows,
            cols,
            entries: vec![SparsePoly::zero(vars.clone()); rows * cols],
            vars,
        }
    }

    pub fn identity(n: usize, vars: Vars) -> Self {
        let mut m = Self::zeros(n, n, vars.clone());
        for i in 0..n {
            m.set(i, i, SparsePoly::one(vars.clone()));
        }
        m
    }

    pub fn from_constant(m: &Mat<F>, vars: Vars) -> Self {
        let mut out = Self::zeros(m.rows(), m.cols(), vars.clone());
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                out.entries[r * m.cols() + c] = SparsePoly::constant(vars.clone(), m[(r, c)].clone());
            }
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn get(&self, r: usize, c: usize) -> &SparsePoly<F> {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, p: SparsePoly<F>) {
        assert!(same_vars(&self.vars, p.vars()), "entry over a different variable list");
        self.entries[r * self.cols + c] = p;
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.binary(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.binary(other, |a, b| a.sub(b))
    }

    fn binary(
        &self,
        other: &Self,
        op: impl Fn(&SparsePoly<F>, &SparsePoly<F>) -> Result<SparsePoly<F>>,
    ) -> Result<Self> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::Dimension("poly matrix shapes differ".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| op(a, b))
            .collect::<Result<_>>()?;
        Ok(PolyMatrix {
            rows: self.rows,
            cols: self.cols,
            vars: self.vars.clone(),
            entries,
        })
    }

    pub fn matmul_trunc(&self, other: &Self, trunc: &Truncation) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension("poly matmul".into()));
        }
        let mut out = Self::zeros(self.rows, other.cols, self.vars.clone());
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = r * other.cols + c;
                    out.entries[idx] = out.entries[idx].add(&a.mul_trunc(b, trunc)?)?;
                }
            }
        }
        Ok(out)
    }

    /// Constant matrix times polynomial matrix.
    pub fn left_mul_const(&self, m: &Mat<F>) -> Result<Self> {
        PolyMatrix::from_constant(m, self.vars.clone()).matmul_trunc(self, &Truncation::None)
    }

    pub fn eval(&self, point: &[F]) -> Result<Mat<F>> {
        let vals = self
            .entries
            .iter()
            .map(|p| p.eval(point))
            .collect::<Result<Vec<_>>>()?;
        Mat::from_vec(self.rows, self.cols, vals)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(SparsePoly::is_zero)
    }

    /// Exact determinant by Laplace expansion with memoisation over column
    /// subsets: `D[T]` is the minor on the first `|T|` rows and columns `T`.
    pub fn det(&self, cap: usize) -> Result<SparsePoly<F>> {
        self.det_trunc(cap, &Truncation::None)
    }

    pub fn det_trunc(&self, cap: usize, trunc: &Truncation) -> Result<SparsePoly<F>> {
        if self.rows != self.cols {
            return Err(Error::Dimension(format!(
                "determinant of a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        if n > cap || n > 24 {
            return Err(Error::CapExceeded { size: n, cap });
        }
        let full = 1usize << n;
        let mut minors: Vec<Option<SparsePoly<F>>> = vec![None; full];
        minors[0] = Some(SparsePoly::one(self.vars.clone()));
        for mask in 1..full {
            let row = mask.count_ones() as usize - 1;
            let mut acc = SparsePoly::zero(self.vars.clone());
            let mut above = 0;
            for c in (0..n).rev() {
                if mask & (1 << c) == 0 {
                    continue;
                }
                let entry = self.get(row, c);
                let rest = &minors[mask & !(1 << c)];
                if let (false, Some(minor)) = (entry.is_zero(), rest) {
                    let t = entry.mul_trunc(minor, trunc)?;
                    acc = if above % 2 == 0 { acc.add(&t)? } else { acc.sub(&t)? };
                }
                above += 1;
            }
            if !acc.is_zero() {
                minors[mask] = Some(acc);
            }
        }
        Ok(minors[full - 1]
            .take()
            .unwrap_or_else(|| SparsePoly::zero(self.vars.clone())))
    }

    /// Determinant by elimination in a nilpotent quotient ring, where a
    /// polynomial is a unit iff its constant term is nonzero. Pivots must be
    /// found among units.
    pub fn det_local(&self, trunc: &Truncation) -> Result<SparsePoly<F>> {
        if self.rows != self.cols {
            return Err(Error::Dimension("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut m = self.entries.clone();
        let mut det = SparsePoly::one(self.vars.clone());
        for c in 0..n {
            let p = (c..n)
                .find(|&r| !m[r * n + c].constant_term().is_zero())
                .ok_or(Error::Singular)?;
            if p != c {
                for k in 0..n {
                    m.swap(p * n + k, c * n + k);
                }
                det = det.neg();
            }
            let piv_inv = m[c * n + c].inv_unit(trunc)?;
            det = det.mul_trunc(&m[c * n + c], trunc)?;
            for r in c + 1..n {
                if m[r * n + c].is_zero() {
                    continue;
                }
                let f = m[r * n + c].mul_trunc(&piv_inv, trunc)?;
                for k in c..n {
                    if m[c * n + k].is_zero() {
                        continue;
                    }
                    let t = f.mul_trunc(&m[c * n + k], trunc)?;
                    m[r * n + k] = m[r * n + k].sub(&t)?;
                }
            }
        }
        Ok(det)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::GaussRat;
    use num_complex::Complex64;

    type P = SparsePoly<GaussRat>;

    fn q(v: i64) -> GaussRat {
        GaussRat::from_i64(v)
    }

    fn vars2() -> (Vars, P, P) {
        let vars = flat_vars(2);
        let s1 = P::var(vars.clone(), 0);
        let s2 = P::var(vars.clone(), 1);
        (vars, s1, s2)
    }

    #[test]
    fn difference_of_squares() {
        let (vars, s1, _) = vars2();
        let one = P::one(vars.clone());
        let p = s1.add(&one).unwrap().mul(&s1.sub(&one).unwrap()).unwrap();
        let expected = P::from_terms(vars, [(vec![2, 0], q(1)), (vec![0, 0], q(-1))]).unwrap();
        assert_eq!(p, expected);
        assert_eq!(p.add(&P::zero(p.vars().clone())).unwrap(), p);
    }

    #[test]
    fn square_of_sum_by_coefficient_collection() {
        // Oracle: enumerate the four products of (s1 + s2)(s1 + s2) by hand.
        let (vars, s1, s2) = vars2();
        let sum = s1.add(&s2).unwrap();
        let sq = sum.mul(&sum).unwrap();
        let mut oracle = BTreeMap::new();
        for a in [[1u32, 0], [0, 1]] {
            for b in [[1u32, 0], [0, 1]] {
                *oracle.entry(vec![a[0] + b[0], a[1] + b[1]]).or_insert(0) += 1;
            }
        }
        let expected = P::from_terms(vars, oracle.into_iter().map(|(e, c)| (e, q(c)))).unwrap();
        assert_eq!(sq, expected);
        assert_eq!(sq.coeff(&[1, 1]), q(2));
    }

    #[test]
    fn mismatched_variables_are_rejected() {
        let a = P::var(flat_vars(2), 0);
        let b = P::var(flat_vars(3), 0);
        assert!(matches!(a.add(&b), Err(Error::VariableMismatch)));
    }

    #[test]
    fn det_base_cases() {
        let (vars, s1, s2) = vars2();
        let one = P::one(vars.clone());
        let mut m1 = PolyMatrix::zeros(1, 1, vars.clone());
        m1.set(0, 0, s1.clone());
        assert_eq!(m1.det(12).unwrap(), s1);

        let one_minus_s = one.sub(&s1).unwrap();
        let mut d = PolyMatrix::zeros(2, 2, vars.clone());
        d.set(0, 0, one_minus_s.clone());
        d.set(1, 1, one_minus_s.clone());
        assert_eq!(d.det(12).unwrap(), one_minus_s.pow(2).unwrap());

        // [[1-s11, -s12], [-s21, 1-s22]]
        let v4 = flat_vars(4);
        let s = |i| P::var(v4.clone(), i);
        let one4 = P::one(v4.clone());
        let mut m = PolyMatrix::zeros(2, 2, v4.clone());
        m.set(0, 0, one4.sub(&s(0)).unwrap());
        m.set(0, 1, s(1).neg());
        m.set(1, 0, s(2).neg());
        m.set(1, 1, one4.sub(&s(3)).unwrap());
        let expected = one4
            .sub(&s(0))
            .unwrap()
            .mul(&one4.sub(&s(3)).unwrap())
            .unwrap()
            .sub(&s(1).mul(&s(2)).unwrap())
            .unwrap();
        assert_eq!(m.det(12).unwrap(), expected);
        let _ = s2;
    }

    #[test]
    fn det_errors() {
        let vars = flat_vars(1);
        assert!(matches!(
            PolyMatrix::<GaussRat>::zeros(2, 3, vars.clone()).det(12),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            PolyMatrix::<GaussRat>::identity(13, vars).det(12),
            Err(Error::CapExceeded { size: 13, cap: 12 })
        ));
    }

    #[test]
    fn exact_division() {
        let (vars, s1, s2) = vars2();
        let one = P::one(vars.clone());
        let a = one.sub(&s1).unwrap();
        assert_eq!(
            a.pow(2).unwrap().divide_exact(&a).unwrap(),
            Division::Quotient(a.clone())
        );
        let num = s1.pow(2).unwrap().sub(&s2.pow(2).unwrap()).unwrap();
        let den = s1.sub(&s2).unwrap();
        assert_eq!(
            num.divide_exact(&den).unwrap().quotient().unwrap(),
            s1.add(&s2).unwrap()
        );
        assert_eq!(s1.divide_exact(&s2).unwrap(), Division::NotDivisible);
        assert_eq!(
            s1.add(&one).unwrap().divide_exact(&s1).unwrap(),
            Division::NotDivisible
        );
        assert!(matches!(s1.divide_exact(&P::zero(vars)), Err(Error::DivisionByZero)));
    }

    #[test]
    fn pit_basics() {
        let (_, s1, s2) = vars2();
        assert!(poly_equal_pit(&s1, &s1, 10, 1, 1e-9).unwrap());
        assert!(!poly_equal_pit(&s1, &s2, 10, 1, 1e-9).unwrap());
    }

    #[test]
    fn eval_examples() {
        let (vars, s1, _) = vars2();
        let one = P::one(vars.clone());
        assert_eq!(one.sub(&s1).unwrap().eval(&[q(1), q(5)]).unwrap(), q(0));
        let c = P::constant(vars, q(7));
        assert_eq!(c.eval(&[q(-3), q(11)]).unwrap(), q(7));
        assert!(c.eval(&[q(1)]).is_err());
    }

    #[test]
    fn float_poly_eval_and_pit() {
        let vars = flat_vars(1);
        let s = SparsePoly::<Complex64>::var(vars.clone(), 0);
        let p = s.mul(&s).unwrap();
        let v = p.eval(&[Complex64::new(0.0, 1.0)]).unwrap();
        assert!((v + 1.0).norm() < 1e-15);
        assert!(poly_equal_pit(&p, &p, 5, 2, 1e-9).unwrap());
    }

    #[test]
    fn truncated_series() {
        let vars = flat_vars(2);
        let s = |i| P::var(vars.clone(), i);
        let one = P::one(vars.clone());
        let trunc = Truncation::Multilinear;
        // ln(1 + s1 + s2 + s1 s2) = ln(1+s1) + ln(1+s2) → s1 + s2 mod squares
        let u = one.add(&s(0)).unwrap().mul(&one.add(&s(1)).unwrap()).unwrap();
        let l = u.log_unit(&trunc).unwrap();
        assert_eq!(l, s(0).add(&s(1)).unwrap());
        let inv = u.inv_unit(&trunc).unwrap();
        assert_eq!(u.mul_trunc(&inv, &trunc).unwrap(), one);
        assert!(u.log_unit(&Truncation::None).is_err());
    }

    #[test]
    fn univariate_gcd() {
        let vars = flat_vars(1);
        let s = P::var(vars.clone(), 0);
        let one = P::one(vars.clone());
        let a = s.sub(&one).unwrap().mul(&s.add(&one).unwrap()).unwrap();
        let b = s.sub(&one).unwrap().scale(&q(3));
        assert_eq!(a.gcd_univariate(&b).unwrap(), s.sub(&one).unwrap());
        let c = s.add(&P::constant(vars, q(2))).unwrap();
        assert_eq!(a.gcd_univariate(&c).unwrap(), one);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn small() -> impl Strategy<Value = GaussRat> {
            (-5i64..=5, 1i64..=3, -5i64..=5).prop_map(|(a, b, c)| GaussRat::from_ints(a, b, c, 1))
        }

        fn poly(nvars: usize) -> impl Strategy<Value = P> {
            proptest::collection::vec((proptest::collection::vec(0u32..3, nvars), small()), 1..5)
                .prop_map(move |terms| P::from_terms(flat_vars(nvars), terms).unwrap())
        }

        fn poly_matrix(n: usize) -> impl Strategy<Value = PolyMatrix<GaussRat>> {
            proptest::collection::vec(poly(2), n * n).prop_map(move |es| {
                let vars = es[0].vars().clone();
                let mut m = PolyMatrix::zeros(n, n, vars.clone());
                for (i, e) in es.into_iter().enumerate() {
                    let e = P::from_terms(vars.clone(), e.terms().map(|(k, v)| (k.clone(), v.clone()))).unwrap();
                    m.set(i / n, i % n, e);
                }
                m
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn det_commutes_with_evaluation(
                n in 1usize..=4,
                m in (1usize..=4).prop_flat_map(poly_matrix),
                pts in proptest::collection::vec(proptest::collection::vec(-4i64..=4, 2), 20),
            ) {
                let _ = n;
                let det = m.det(12).unwrap();
                for pt in pts {
                    let x: Vec<GaussRat> = pt.into_iter().map(GaussRat::from_i64).collect();
                    prop_assert_eq!(det.eval(&x).unwrap(), m.eval(&x).unwrap().det());
                }
            }

            #[test]
            fn divide_product_recovers_factor(p in poly(3), q0 in poly(3)) {
                let vars = p.vars().clone();
                let qv = P::from_terms(vars, q0.terms().map(|(k, v)| (k.clone(), v.clone()))).unwrap();
                prop_assume!(!qv.is_zero());
                let prod = p.mul(&qv).unwrap();
                prop_assert_eq!(prod.divide_exact(&qv).unwrap(), Division::Quotient(p));
            }

            #[test]
            fn pit_reflexive_symmetric(p in poly(2), q0 in poly(2), seed in 0u64..1000) {
                let qv = P::from_terms(p.vars().clone(), q0.terms().map(|(k, v)| (k.clone(), v.clone()))).unwrap();
                prop_assert!(poly_equal_pit(&p, &p, 8, seed, 1e-9).unwrap());
                prop_assert_eq!(
                    poly_equal_pit(&p, &qv, 8, seed, 1e-9).unwrap(),
                    poly_equal_pit(&qv, &p, 8, seed, 1e-9).unwrap()
                );
            }

            #[test]
            fn local_det_agrees_with_subset_dp(m in poly_matrix(3)) {
                // Shift to units so elimination without fallbacks applies.
                let vars = m.vars().clone();
                let shifted = m.add(&PolyMatrix::identity(3, vars).left_mul_const(&Mat::identity(3).scale(&GaussRat::from_i64(7))).unwrap()).unwrap();
                let mut sh = shifted.clone();
                for i in 0..3 {
                    let e = sh.get(i, i).clone();
                    if e.constant_term().is_zero() {
                        sh.set(i, i, e.add(&P::one(e.vars().clone())).unwrap());
                    }
                }
                let trunc = Truncation::Multilinear;
                let local = sh.det_local(&trunc);
                if let Ok(local) = local {
                    prop_assert_eq!(local, sh.det(12).unwrap().truncate(&trunc));
                }
            }
        }
    }
}
