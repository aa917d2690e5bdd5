//! Conjugation invariants: trace words in the `d` blocks, `b·word·c`
//! pairings, the corner `a`, and determinants of `N`-plets of rows of `b` or
//! columns of `c`. Also the reconstruction of these values from Taylor data
//! of amplified divisors and characteristic functions, and an independent
//! conjugacy test.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::rc::Rc;
use std::sync::Arc;

use itertools::Itertools;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::charfn::{charfn_eval, charfn_taylor, symbolic_s};
use crate::colligation::{Colligation, GroupKind, InnerGroupElement, Selector};
use crate::divisor::{p_eval, p_taylor};
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::poly::{PolyMatrix, SparsePoly, Truncation, Var, Vars};
use crate::scalar::Field;

/// Relative tolerance for float fingerprint entries.
pub const FINGERPRINT_RTOL: f64 = 1e-8;
/// Absolute floor for float fingerprint entries.
pub const FINGERPRINT_ATOL: f64 = 1e-10;

/// A sequence of zero-based block indices `(φ, ψ)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<(usize, usize)>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[(usize, usize)] {
        &self.0
    }

    /// The lexicographically smallest cyclic rotation.
    pub fn canonical_rotation(&self) -> Word {
        (0..self.len().max(1))
            .map(|k| self.rotate(k))
            .min()
            .unwrap_or_default()
    }

    pub fn rotate(&self, k: usize) -> Word {
        let mut v = self.0.clone();
        let len = v.len();
        if len > 0 {
            v.rotate_left(k % len);
        }
        Word(v)
    }

    pub fn is_canonical(&self) -> bool {
        (1..self.len()).all(|k| self.0[k..].iter().chain(&self.0[..k]).ge(self.0.iter()))
    }

    /// All `m^{2n}` words of length `n`, in lexicographic order.
    pub fn all(m: usize, n: usize) -> impl Iterator<Item = Word> {
        let letters: Vec<(usize, usize)> = (0..m).cartesian_product(0..m).collect();
        std::iter::repeat_n(letters, n)
            .multi_cartesian_product()
            .map(Word)
    }

    fn check(&self, m: usize) -> Result<()> {
        match self.0.iter().find(|&&(p, q)| p >= m || q >= m) {
            Some((p, q)) => Err(Error::Index(format!("letter ({}, {}) with m = {m}", p + 1, q + 1))),
            None => Ok(()),
        }
    }
}

impl fmt::Display for Word {
    /// One-based, letters joined by dots: `12.21`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self
            .0
            .iter()
            .map(|&(p, q)| {
                if p < 9 && q < 9 {
                    format!("{}{}", p + 1, q + 1)
                } else {
                    format!("{}:{}", p + 1, q + 1)
                }
            })
            .join(".");
        f.write_str(&s)
    }
}

impl FromStr for Word {
    type Err = Error;
    fn from_str(s: &str) -> Result<Word> {
        if s.is_empty() {
            return Ok(Word::default());
        }
        let bad = || Error::Parse(format!("bad word {s:?}"));
        let idx = |t: &str| -> Result<usize> {
            match t.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(bad()),
            }
        };
        s.split('.')
            .map(|tok| match tok.split_once(':') {
                Some((a, b)) => Ok((idx(a)?, idx(b)?)),
                None if tok.len() == 2 => Ok((idx(&tok[..1])?, idx(&tok[1..])?)),
                None => Err(bad()),
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

fn d_blocks<F: Field>(c: &Colligation<F>) -> Vec<Vec<Mat<F>>> {
    let m = c.shape().m;
    (0..m)
        .map(|p| (0..m).map(|q| c.block(Selector::D(p, q)).unwrap()).collect())
        .collect()
}

/// `d_{φ₁ψ₁}⋯d_{φₙψₙ}`; the identity for the empty word.
pub fn word_product<F: Field>(c: &Colligation<F>, w: &Word) -> Result<Mat<F>> {
    w.check(c.shape().m)?;
    let mut p = Mat::identity(c.shape().n);
    for &(a, b) in w.letters() {
        p = p.matmul(&c.block(Selector::D(a, b))?);
    }
    Ok(p)
}

pub fn trace_word<F: Field>(c: &Colligation<F>, w: &Word) -> Result<F> {
    if w.is_empty() {
        return Err(Error::Precondition("trace words are nonempty".into()));
    }
    Ok(word_product(c, w)?.trace())
}

/// Row `k` of `b_β`, times the word, times column `l` of `c_γ`.
pub fn cwb_invariant<F: Field>(
    c: &Colligation<F>,
    gamma: usize,
    l: usize,
    w: &Word,
    beta: usize,
    k: usize,
) -> Result<F> {
    let alpha = c.shape().alpha;
    if k >= alpha || l >= alpha {
        return Err(Error::Index(format!("corner index beyond α = {alpha}")));
    }
    let row = c.block(Selector::B(beta))?.block(k, 0, 1, c.shape().n);
    let col = c.block(Selector::C(gamma))?.block(0, l, c.shape().n, 1);
    Ok(row.matmul(&word_product(c, w)?).matmul(&col)[(0, 0)].clone())
}

/// Key of a `b·word·c` value.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CwbKey {
    pub beta: usize,
    pub k: usize,
    pub word: Word,
    pub gamma: usize,
    pub l: usize,
}

impl fmt::Display for CwbKey {
    /// `b1[2]/12.21/c2[1]`, one-based.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "b{}[{}]/{}/c{}[{}]",
            self.beta + 1,
            self.k + 1,
            self.word,
            self.gamma + 1,
            self.l + 1
        )
    }
}

/// Which vectors an SL determinant is built from: `(block, index)` pairs,
/// rows `b_β[k]` or columns `c_γ[l]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SlKey {
    Rows(Vec<(usize, usize)>),
    Cols(Vec<(usize, usize)>),
}

impl fmt::Display for SlKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (tag, letter, v) = match self {
            SlKey::Rows(v) => ("rows", 'b', v),
            SlKey::Cols(v) => ("cols", 'c', v),
        };
        let parts = v.iter().map(|(blk, i)| format!("{letter}{}[{}]", blk + 1, i + 1)).join(",");
        write!(f, "{tag}:{parts}")
    }
}

/// Determinants of `N`-plets of rows of `b` and of columns of `c`. These are
/// invariant under `SL(N)` only; empty when `N > αm` or `N = 0`.
pub fn sl_det_invariants<F: Field>(c: &Colligation<F>) -> BTreeMap<SlKey, F> {
    let s = c.shape();
    let mut out = BTreeMap::new();
    if s.n == 0 || s.n > s.alpha * s.m {
        return out;
    }
    let labels: Vec<(usize, usize)> = (0..s.m).cartesian_product(0..s.alpha).collect();
    let b = c.b();
    let cc = c.c();
    for plet in labels.iter().copied().combinations(s.n) {
        let rows = Mat::from_fn(s.n, s.n, |i, j| {
            let (blk, k) = plet[i];
            b[(k, blk * s.n + j)].clone()
        });
        let cols = Mat::from_fn(s.n, s.n, |i, j| {
            let (blk, l) = plet[j];
            cc[(blk * s.n + i, l)].clone()
        });
        out.insert(SlKey::Rows(plet.clone()), rows.det());
        out.insert(SlKey::Cols(plet), cols.det());
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fingerprint<F> {
    pub max_len: usize,
    /// One entry per cyclic class, keyed by its canonical rotation.
    pub trace_words: BTreeMap<Word, F>,
    pub cwb: BTreeMap<CwbKey, F>,
    pub a: Mat<F>,
    pub sl_dets: BTreeMap<SlKey, F>,
}

fn entry_close<F: Field>(x: &F, y: &F) -> bool {
    if F::is_exact() {
        return x == y;
    }
    let diff = (x.clone() - y.clone()).modulus();
    diff <= FINGERPRINT_ATOL.max(FINGERPRINT_RTOL * x.modulus().max(y.modulus()))
}

fn map_mismatches<K: Ord + fmt::Display, F: Field>(
    a: &BTreeMap<K, F>,
    b: &BTreeMap<K, F>,
    tag: &str,
    out: &mut Vec<String>,
) {
    for key in a.keys().chain(b.keys().filter(|k| !a.contains_key(*k))) {
        match (a.get(key), b.get(key)) {
            (Some(x), Some(y)) if entry_close(x, y) => {}
            _ => out.push(format!("{tag} {key}")),
        }
    }
}

impl<F: Field> Fingerprint<F> {
    /// Keys whose values differ, ignoring the SL determinants.
    pub fn mismatches(&self, other: &Self) -> Vec<String> {
        let mut out = Vec::new();
        if self.max_len != other.max_len {
            out.push("maxWordLength".into());
        }
        map_mismatches(&self.trace_words, &other.trace_words, "trace", &mut out);
        map_mismatches(&self.cwb, &other.cwb, "cwb", &mut out);
        if self.a.rows() != other.a.rows() {
            out.push("a".into());
        } else {
            for (i, (x, y)) in self.a.as_slice().iter().zip(other.a.as_slice()).enumerate() {
                if !entry_close(x, y) {
                    out.push(format!("a[{}][{}]", i / self.a.cols() + 1, i % self.a.cols() + 1));
                }
            }
        }
        out
    }

    /// Equality of the `GL(N)` invariants.
    pub fn matches(&self, other: &Self) -> bool {
        self.mismatches(other).is_empty()
    }

    /// Equality of the `SL(N)` invariants, which adds the determinants.
    pub fn matches_sl(&self, other: &Self) -> bool {
        let mut out = self.mismatches(other);
        map_mismatches(&self.sl_dets, &other.sl_dets, "sl", &mut out);
        out.is_empty()
    }
}

/// Depth-first walk over words up to `max_len`, carrying prefix products.
fn walk_words<F: Field>(
    d: &[Vec<Mat<F>>],
    word: &mut Vec<(usize, usize)>,
    prod: &Mat<F>,
    max_len: usize,
    visit: &mut impl FnMut(&[(usize, usize)], &Mat<F>),
) {
    visit(word, prod);
    if word.len() == max_len {
        return;
    }
    let m = d.len();
    for p in 0..m {
        for q in 0..m {
            word.push((p, q));
            let next = prod.matmul(&d[p][q]);
            walk_words(d, word, &next, max_len, visit);
            word.pop();
        }
    }
}

pub fn fingerprint<F: Field>(c: &Colligation<F>, max_len: usize) -> Result<Fingerprint<F>> {
    if max_len == 0 {
        return Err(Error::Precondition("maximal word length must be at least 1".into()));
    }
    let s = c.shape();
    let d = d_blocks(c);
    let bs: Vec<Mat<F>> = (0..s.m).map(|i| c.block(Selector::B(i)).unwrap()).collect();
    let cs: Vec<Mat<F>> = (0..s.m).map(|i| c.block(Selector::C(i)).unwrap()).collect();
    let mut trace_words = BTreeMap::new();
    let mut cwb = BTreeMap::new();
    let mut word = Vec::new();
    walk_words(&d, &mut word, &Mat::identity(s.n), max_len, &mut |w, prod| {
        let word = Word(w.to_vec());
        if !w.is_empty() && word.is_canonical() {
            trace_words.insert(word.clone(), prod.trace());
        }
        if w.len() < max_len {
            for (beta, b) in bs.iter().enumerate() {
                let bp = b.matmul(prod);
                for (gamma, cg) in cs.iter().enumerate() {
                    let v = bp.matmul(cg);
                    for k in 0..s.alpha {
                        for l in 0..s.alpha {
                            let key = CwbKey { beta, k, word: word.clone(), gamma, l };
                            cwb.insert(key, v[(k, l)].clone());
                        }
                    }
                }
            }
        }
    });
    Ok(Fingerprint {
        max_len,
        trace_words,
        cwb,
        a: c.a(),
        sl_dets: sl_det_invariants(c),
    })
}

/// The variable `s_{φψ}^{μν}` and its position in the `jm × jm` matrix.
fn position(v: &Var, m: usize) -> (usize, usize) {
    match *v {
        Var::Entry { phi, psi, mu, nu } => (mu * m + phi, nu * m + psi),
        Var::Flat(_) => unreachable!("entry variables only"),
    }
}

/// All variables on the edges `μ → ν` listed, grouped by edge.
fn edge_vars(m: usize, edges: &[(usize, usize)]) -> (Vars, Truncation) {
    let mut vars = Vec::new();
    let mut groups = Vec::new();
    for (g, &(mu, nu)) in edges.iter().enumerate() {
        for phi in 0..m {
            for psi in 0..m {
                vars.push(Var::Entry { phi, psi, mu, nu });
                groups.push(g);
            }
        }
    }
    (Arc::new(vars), Truncation::OnePerGroup(Arc::new(groups)))
}

/// Index of `v` in an [`edge_vars`] list.
fn var_index(m: usize, edge: usize, phi: usize, psi: usize) -> usize {
    edge * m * m + phi * m + psi
}

fn cycle_edges(n: usize) -> Vec<(usize, usize)> {
    (0..n).map(|i| (i, (i + 1) % n)).collect()
}

fn path_edges(n_edges: usize) -> Vec<(usize, usize)> {
    (0..n_edges).map(|i| (i, i + 1)).collect()
}

/// For the trace of `w` read from the cycle `0 → 1 → … → 0`: the `(φ, ψ)`
/// of the variable on each edge.
fn cycle_letters(w: &Word) -> Vec<(usize, usize)> {
    let l = w.letters();
    let n = l.len();
    (0..n).map(|i| (l[(i + n - 1) % n].1, l[i].0)).collect()
}

/// For `b_β[k]·w·c_γ[l]` read from the path `0 → 1 → … → n + 1`.
fn path_letters(beta: usize, w: &Word, gamma: usize) -> Vec<(usize, usize)> {
    let mut phis = vec![beta];
    let mut psis = Vec::new();
    for &(p, q) in w.letters() {
        psis.push(p);
        phis.push(q);
    }
    psis.push(gamma);
    phis.into_iter().zip(psis).collect()
}

fn monomial(m: usize, letters: &[(usize, usize)]) -> Vec<u32> {
    let mut e = vec![0u32; letters.len() * m * m];
    for (edge, &(phi, psi)) in letters.iter().enumerate() {
        e[var_index(m, edge, phi, psi)] = 1;
    }
    e
}

/// Trace words of length `1..=max_len` (canonical rotations only) from jets
/// of amplified divisors. `p_jet(j, vars, trunc)` must return the jet of
/// `p_{g^{[j]}}` in `vars` modulo `trunc`.
///
/// On the cycle `μ₁ → μ₂ → … → μ₁` through distinct copies, the coefficient
/// of `s_{φ₁ψ₁}^{μ₁μ₂}⋯s_{φₙψₙ}^{μₙμ₁}` in `ln p` is `−tr d_{ψ₁φ₂}⋯d_{ψₙφ₁}`.
pub fn reconstruct_trace_words<F: Field>(
    m: usize,
    max_len: usize,
    p_jet: impl Fn(usize, &Vars, &Truncation) -> Result<SparsePoly<F>>,
) -> Result<BTreeMap<Word, F>> {
    let mut out = BTreeMap::new();
    for n in 1..=max_len {
        let (vars, trunc) = edge_vars(m, &cycle_edges(n));
        let log = p_jet(n, &vars, &trunc)?.log_unit(&trunc)?;
        for w in Word::all(m, n).filter(Word::is_canonical) {
            let v = -log.coeff(&monomial(m, &cycle_letters(&w)));
            out.insert(w, v);
        }
    }
    Ok(out)
}

/// Corner values and `b·word·c` values for words of length `0..=max_len`,
/// from jets of amplified characteristic functions. `chi_jet(j, vars, trunc)`
/// must return the jet of `χ_{g^{[j]}}`.
pub fn reconstruct_cwb<F: Field>(
    m: usize,
    alpha: usize,
    max_len: usize,
    chi_jet: impl Fn(usize, &Vars, &Truncation) -> Result<PolyMatrix<F>>,
) -> Result<(Mat<F>, BTreeMap<CwbKey, F>)> {
    let mut out = BTreeMap::new();
    let mut a = Mat::zeros(alpha, alpha);
    for n in 0..=max_len {
        let j = n + 2;
        let (vars, trunc) = edge_vars(m, &path_edges(n + 1));
        let jet = chi_jet(j, &vars, &trunc)?;
        if jet.rows() != j * alpha || jet.cols() != j * alpha {
            return Err(Error::Dimension("jet of the wrong size".into()));
        }
        if n == 0 {
            a = Mat::from_fn(alpha, alpha, |r, c| jet.get(r, c).constant_term());
        }
        for w in Word::all(m, n) {
            for beta in 0..m {
                for gamma in 0..m {
                    let e = monomial(m, &path_letters(beta, &w, gamma));
                    for k in 0..alpha {
                        for l in 0..alpha {
                            let v = jet.get(k, (n + 1) * alpha + l).coeff(&e);
                            out.insert(CwbKey { beta, k, word: w.clone(), gamma, l }, v);
                        }
                    }
                }
            }
        }
    }
    Ok((a, out))
}

/// Exact jets of `p_{g^{[j]}}` straight from the colligation.
pub fn divisor_jets<F: Field>(c: &Colligation<F>) -> impl Fn(usize, &Vars, &Truncation) -> Result<SparsePoly<F>> + '_ {
    move |j, vars, trunc| p_taylor(c, j, vars, trunc)
}

/// Exact jets of `χ_{g^{[j]}}` straight from the colligation.
pub fn charfn_jets<F: Field>(c: &Colligation<F>) -> impl Fn(usize, &Vars, &Truncation) -> Result<PolyMatrix<F>> + '_ {
    move |j, vars, trunc| {
        let s = symbolic_s::<F>(c.shape().m, j, vars)?;
        charfn_taylor(&c.amplify(j)?, &s, trunc)
    }
}

/// Settings for extracting multilinear Taylor coefficients from function
/// values by the Cauchy formula on small circles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Contour {
    pub radius: f64,
    /// Sample points per circle.
    pub points: usize,
    /// Largest accepted change when the radius is halved.
    pub tol: f64,
}

impl Default for Contour {
    fn default() -> Self {
        Contour {
            radius: 1e-2,
            points: 4,
            tol: 1e-7,
        }
    }
}

impl Contour {
    /// Coefficient of `x₁⋯xₙ` in `f(S)` where `S` carries `xᵢ` at
    /// `positions[i]` and zeros elsewhere.
    fn coefficient_at(
        &self,
        radius: f64,
        size: usize,
        positions: &[(usize, usize)],
        f: &dyn Fn(&Mat<Complex64>) -> Result<Mat<Complex64>>,
    ) -> Result<Mat<Complex64>> {
        let mm = self.points;
        let n = positions.len();
        let roots: Vec<Complex64> = (0..mm)
            .map(|k| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / mm as f64))
            .collect();
        let mut acc: Option<Mat<Complex64>> = None;
        for ks in std::iter::repeat_n(0..mm, n).multi_cartesian_product() {
            let mut s = Mat::zeros(size, size);
            let mut weight = Complex64::new(1.0, 0.0);
            for (&(r, c), &k) in positions.iter().zip(&ks) {
                s[(r, c)] = roots[k];
                weight /= roots[k];
            }
            let v = f(&s)?.scale(&weight);
            acc = Some(match acc {
                None => v,
                Some(a) => a.add(&v),
            });
        }
        let total = (mm as f64).powi(n as i32);
        Ok(acc.expect("at least one sample").scale(&Complex64::new(1.0 / total, 0.0)))
    }

    /// As [`Contour::coefficient_at`], cross-checked at half the radius.
    pub fn coefficient(
        &self,
        size: usize,
        positions: &[(usize, usize)],
        f: &dyn Fn(&Mat<Complex64>) -> Result<Mat<Complex64>>,
    ) -> Result<Mat<Complex64>> {
        let v = self.coefficient_at(self.radius, size, positions, f)?;
        let w = self.coefficient_at(self.radius / 2.0, size, positions, f)?;
        let residual = v.sub(&w).max_abs() / 1f64.max(v.max_abs());
        if residual > self.tol {
            return Err(Error::Conditioning { residual });
        }
        Ok(v)
    }
}

/// Float counterpart of [`reconstruct_trace_words`] from values of
/// `p_{g^{[j]}}`: `p_at(j, S)`.
pub fn reconstruct_trace_words_float(
    m: usize,
    max_len: usize,
    contour: &Contour,
    p_at: impl Fn(usize, &Mat<Complex64>) -> Result<Complex64>,
) -> Result<BTreeMap<Word, Complex64>> {
    let mut out = BTreeMap::new();
    for n in 1..=max_len {
        let (vars, _) = edge_vars(m, &cycle_edges(n));
        let log_p = |s: &Mat<Complex64>| -> Result<Mat<Complex64>> {
            Mat::from_vec(1, 1, vec![p_at(n, s)?.ln()])
        };
        for w in Word::all(m, n).filter(Word::is_canonical) {
            let positions: Vec<(usize, usize)> = cycle_letters(&w)
                .iter()
                .enumerate()
                .map(|(e, &(phi, psi))| position(&vars[var_index(m, e, phi, psi)], m))
                .collect();
            let v = contour.coefficient(n * m, &positions, &log_p)?;
            out.insert(w, -v[(0, 0)]);
        }
    }
    Ok(out)
}

/// Float counterpart of [`reconstruct_cwb`] from values of `χ_{g^{[j]}}`:
/// `chi_at(j, S)`.
pub fn reconstruct_cwb_float(
    m: usize,
    alpha: usize,
    max_len: usize,
    contour: &Contour,
    chi_at: impl Fn(usize, &Mat<Complex64>) -> Result<Mat<Complex64>>,
) -> Result<(Mat<Complex64>, BTreeMap<CwbKey, Complex64>)> {
    let a = chi_at(1, &Mat::zeros(m, m))?;
    let mut out = BTreeMap::new();
    for n in 0..=max_len {
        let j = n + 2;
        let (vars, _) = edge_vars(m, &path_edges(n + 1));
        let f = |s: &Mat<Complex64>| chi_at(j, s);
        for w in Word::all(m, n) {
            for beta in 0..m {
                for gamma in 0..m {
                    let positions: Vec<(usize, usize)> = path_letters(beta, &w, gamma)
                        .iter()
                        .enumerate()
                        .map(|(e, &(phi, psi))| position(&vars[var_index(m, e, phi, psi)], m))
                        .collect();
                    let v = contour.coefficient(j * m, &positions, &f)?;
                    for k in 0..alpha {
                        for l in 0..alpha {
                            let key = CwbKey { beta, k, word: w.clone(), gamma, l };
                            out.insert(key, v[(k, (n + 1) * alpha + l)]);
                        }
                    }
                }
            }
        }
    }
    Ok((a, out))
}

/// Amplifications of one colligation, built on first use.
struct Amplified<'a> {
    base: &'a Colligation<Complex64>,
    cache: RefCell<BTreeMap<usize, Rc<Colligation<Complex64>>>>,
}

impl<'a> Amplified<'a> {
    fn new(base: &'a Colligation<Complex64>) -> Self {
        Amplified {
            base,
            cache: RefCell::new(BTreeMap::new()),
        }
    }

    fn get(&self, j: usize) -> Result<Rc<Colligation<Complex64>>> {
        if let Some(c) = self.cache.borrow().get(&j) {
            return Ok(c.clone());
        }
        let c = Rc::new(self.base.amplify(j)?);
        self.cache.borrow_mut().insert(j, c.clone());
        Ok(c)
    }
}

/// Values of `p_{g^{[j]}}` straight from a float colligation.
pub fn divisor_values(c: &Colligation<Complex64>) -> impl Fn(usize, &Mat<Complex64>) -> Result<Complex64> + '_ {
    let amp = Amplified::new(c);
    move |j, s| p_eval(amp.get(j)?.as_ref(), s)
}

/// Values of `χ_{g^{[j]}}` straight from a float colligation.
pub fn charfn_values(c: &Colligation<Complex64>) -> impl Fn(usize, &Mat<Complex64>) -> Result<Mat<Complex64>> + '_ {
    let amp = Amplified::new(c);
    move |j, s| charfn_eval(amp.get(j)?.as_ref(), s)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict<F> {
    Conjugate { witness: Mat<F> },
    NotConjugate,
    Inconclusive,
}

impl<F> Verdict<F> {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Conjugate { .. } => "conjugate",
            Verdict::NotConjugate => "not-conjugate",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    pub fn is_conjugate(&self) -> bool {
        matches!(self, Verdict::Conjugate { .. })
    }
}

/// Number of random combinations tried when the solution space is not a point.
pub const ORACLE_TRIALS: usize = 20;

const ORACLE_TOL: f64 = 1e-9;

fn invertible<F: Field>(u: &Mat<F>) -> bool {
    if F::is_exact() {
        !u.det().is_zero()
    } else {
        let sv = u.map(F::to_c64).singular_values();
        sv.last().is_some_and(|&lo| lo > 1e-8 * sv[0])
    }
}

/// Decides whether `g₂ = ι(u)·g₁·ι(u)⁻¹` for some invertible `u`, by solving
/// the linear conditions `b₁ = b₂u`, `u c₁ = c₂`, `u d₁ = d₂ u` on the
/// entries of `u` and then looking for an invertible point of the solution
/// set.
pub fn conjugacy_oracle<F: Field>(g1: &Colligation<F>, g2: &Colligation<F>, seed: u64) -> Result<Verdict<F>> {
    let s = g1.shape();
    if s != g2.shape() {
        return Err(Error::Shape(format!("{} vs {}", s, g2.shape())));
    }
    let tol = if F::is_exact() { 0.0 } else { ORACLE_TOL };
    let a_close = if F::is_exact() {
        g1.a() == g2.a()
    } else {
        g1.a().close_to(&g2.a(), ORACLE_TOL)
    };
    if !a_close {
        return Ok(Verdict::NotConjugate);
    }
    let n = s.n;
    if n == 0 {
        return Ok(Verdict::Conjugate { witness: Mat::identity(0) });
    }
    let unknown = |i: usize, j: usize| i * n + j;
    let mut rows: Vec<Vec<F>> = Vec::new();
    let mut push = |coeffs: Vec<(usize, F)>, rhs: F| {
        let mut row = vec![F::zero(); n * n + 1];
        for (idx, v) in coeffs {
            row[idx].add_assign_ref(&v);
        }
        row[n * n] = rhs;
        rows.push(row);
    };
    for beta in 0..s.m {
        let b1 = g1.block(Selector::B(beta))?;
        let b2 = g2.block(Selector::B(beta))?;
        for k in 0..s.alpha {
            for j in 0..n {
                let coeffs = (0..n).map(|i| (unknown(i, j), b2[(k, i)].clone())).collect();
                push(coeffs, b1[(k, j)].clone());
            }
        }
        let c1 = g1.block(Selector::C(beta))?;
        let c2 = g2.block(Selector::C(beta))?;
        for i in 0..n {
            for l in 0..s.alpha {
                let coeffs = (0..n).map(|k| (unknown(i, k), c1[(k, l)].clone())).collect();
                push(coeffs, c2[(i, l)].clone());
            }
        }
    }
    for phi in 0..s.m {
        for psi in 0..s.m {
            let d1 = g1.block(Selector::D(phi, psi))?;
            let d2 = g2.block(Selector::D(phi, psi))?;
            for i in 0..n {
                for j in 0..n {
                    // (u d₁)[i, j] − (d₂ u)[i, j] = 0
                    let mut coeffs: Vec<(usize, F)> = (0..n).map(|k| (unknown(i, k), d1[(k, j)].clone())).collect();
                    coeffs.extend((0..n).map(|k| (unknown(k, j), -d2[(i, k)].clone())));
                    push(coeffs, F::zero());
                }
            }
        }
    }
    let nrows = rows.len();
    let system = Mat::from_vec(nrows, n * n + 1, rows.into_iter().flatten().collect())?;
    let ech = system.echelon(tol);
    if ech.pivots.last() == Some(&(n * n)) {
        return Ok(Verdict::NotConjugate);
    }
    let mut u0 = vec![F::zero(); n * n];
    for (i, &p) in ech.pivots.iter().enumerate() {
        u0[p] = ech.rref[(i, n * n)].clone();
    }
    let kernel = system.block(0, 0, nrows, n * n).nullspace(tol);
    let candidate = |t: &[F]| {
        Mat::from_fn(n, n, |i, j| {
            let mut v = u0[unknown(i, j)].clone();
            for (col, ti) in t.iter().enumerate() {
                v.add_assign_ref(&kernel[(unknown(i, j), col)].mul_ref(ti));
            }
            v
        })
    };
    let base = candidate(&[]);
    if invertible(&base) {
        return Ok(Verdict::Conjugate { witness: base });
    }
    if kernel.cols() == 0 {
        return Ok(Verdict::NotConjugate);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..ORACLE_TRIALS {
        let t: Vec<F> = (0..kernel.cols()).map(|_| F::from_i64(rng.random_range(-10..=10))).collect();
        let u = candidate(&t);
        if invertible(&u) {
            return Ok(Verdict::Conjugate { witness: u });
        }
    }
    Ok(Verdict::Inconclusive)
}

/// Whether `ι(u)·g₁·ι(u)⁻¹` reproduces `g₂` (exactly, or within `tol`).
pub fn check_witness<F: Field>(g1: &Colligation<F>, g2: &Colligation<F>, u: &Mat<F>, tol: f64) -> Result<bool> {
    let u = InnerGroupElement::new(u.clone(), GroupKind::GeneralLinear)?;
    let conj = g1.clone().with_flavor(crate::colligation::Flavor::General).conjugate(&u)?;
    Ok(if F::is_exact() {
        conj.matrix() == g2.matrix()
    } else {
        conj.matrix().close_to(g2.matrix(), tol)
    })
}
