//! The divisor polynomial `p_g(S) = det(1 − dS̃)` and the bookkeeping of its
//! distinguished components.

use std::sync::Arc;

use crate::charfn::{one_minus_d_s, poly_s_tilde, symbolic_s};
use crate::colligation::Colligation;
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::poly::{PolyMatrix, SparsePoly, Truncation, Var, Vars};
use crate::scalar::Field;

/// All `(jm)²` entry variables, in row-major order of the `jm × jm` matrix.
pub fn entry_vars(m: usize, j: usize) -> Vars {
    let jm = j * m;
    Arc::new(
        (0..jm * jm)
            .map(|i| {
                let (r, c) = (i / jm, i % jm);
                Var::Entry {
                    phi: r % m,
                    psi: c % m,
                    mu: r / m,
                    nu: c / m,
                }
            })
            .collect(),
    )
}

/// `1 − d^{[j]}S̃` with `S` symbolic in `vars` (other entries zero).
pub fn one_minus_d_s_poly<F: Field>(c: &Colligation<F>, j: usize, vars: &Vars) -> Result<PolyMatrix<F>> {
    let amp = c.amplify(j)?;
    let shape = c.shape();
    let s = symbolic_s::<F>(shape.m, j, vars)?;
    let ds = poly_s_tilde(&s, shape.n).left_mul_const(&amp.d())?;
    PolyMatrix::identity(ds.rows(), vars.clone()).sub(&ds)
}

/// Relative size below which float coefficients of `p` count as cancelled.
pub const COEFF_TOL: f64 = 1e-10;

/// `p_{g^{[j]}}` as a polynomial in all `(jm)²` variables. In float mode,
/// coefficients below [`COEFF_TOL`] relative to the largest are dropped.
pub fn p_poly<F: Field>(c: &Colligation<F>, j: usize, cap: usize) -> Result<SparsePoly<F>> {
    let shape = c.shape();
    let size = j * shape.m * shape.n;
    if size > cap {
        return Err(Error::CapExceeded { size, cap });
    }
    let p = one_minus_d_s_poly(c, j, &entry_vars(shape.m, j))?.det(cap)?;
    Ok(if F::is_exact() { p } else { p.pruned(COEFF_TOL) })
}

/// Jet of `p_{g^{[j]}}` in the given variables, modulo `trunc`.
pub fn p_taylor<F: Field>(c: &Colligation<F>, j: usize, vars: &Vars, trunc: &Truncation) -> Result<SparsePoly<F>> {
    one_minus_d_s_poly(c, j, vars)?.det_local(trunc)
}

pub fn p_eval<F: Field>(c: &Colligation<F>, s: &Mat<F>) -> Result<F> {
    Ok(one_minus_d_s(c, s)?.det())
}

/// `det(d − Λ⊗1_N)`.
pub fn lambda_chart_eval<F: Field>(c: &Colligation<F>, lambda: &Mat<F>) -> Result<F> {
    let shape = c.shape();
    if lambda.rows() != shape.m || lambda.cols() != shape.m {
        return Err(Error::Dimension("Λ has the wrong size".into()));
    }
    Ok(c.d().sub(&lambda.kron(&Mat::identity(shape.n))).det())
}

/// `det(1 − S)` over the variables of [`entry_vars`]`(m, 1)`.
pub fn det_one_minus_s<F: Field>(m: usize) -> Result<SparsePoly<F>> {
    let vars = entry_vars(m, 1);
    let s = symbolic_s::<F>(m, 1, &vars)?;
    PolyMatrix::identity(m, vars).sub(&s)?.det(m.max(1))
}

/// How often `det(1 − S)` divides `p`.
pub fn delta_multiplicity_of<F: Field>(p: &SparsePoly<F>, m: usize) -> Result<usize> {
    let delta = det_one_minus_s::<F>(m)?;
    let mut rest = p.clone();
    let mut k = 0;
    while !rest.is_constant() {
        match rest.divide_exact(&delta)?.quotient() {
            Some(q) => {
                rest = q;
                k += 1;
            }
            None => break,
        }
    }
    Ok(k)
}

pub fn delta_multiplicity<F: Field>(c: &Colligation<F>, cap: usize) -> Result<usize> {
    delta_multiplicity_of(&p_poly(c, 1, cap)?, c.shape().m)
}

/// Multiplicity of the `det Λ = 0` component read off from the degree drop.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DegreeAccounting {
    Multiplicity(usize),
    /// The deficiency `mN − degree` is not a multiple of `m`.
    Inapplicable { degree: usize, deficiency: usize },
}

pub fn degree_accounting(degree: usize, m: usize, n: usize) -> DegreeAccounting {
    let deficiency = m * n - degree.min(m * n);
    if deficiency.is_multiple_of(m) {
        DegreeAccounting::Multiplicity(deficiency / m)
    } else {
        DegreeAccounting::Inapplicable { degree, deficiency }
    }
}

pub fn det_lambda_multiplicity<F: Field>(c: &Colligation<F>, cap: usize) -> Result<DegreeAccounting> {
    let s = c.shape();
    let p = p_poly(c, 1, cap)?;
    Ok(degree_accounting(p.total_degree() as usize, s.m, s.n))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DivisorSummary<F> {
    pub p: SparsePoly<F>,
    pub total_degree: usize,
    pub delta_multiplicity: usize,
    pub det_lambda: DegreeAccounting,
    /// Degree left after removing the `δ` factors.
    pub residual_degree: usize,
}

pub fn divisor_summary<F: Field>(c: &Colligation<F>, cap: usize) -> Result<DivisorSummary<F>> {
    let s = c.shape();
    let p = p_poly(c, 1, cap)?;
    let total_degree = p.total_degree() as usize;
    let delta = delta_multiplicity_of(&p, s.m)?;
    Ok(DivisorSummary {
        det_lambda: degree_accounting(total_degree, s.m, s.n),
        residual_degree: total_degree - delta * s.m,
        delta_multiplicity: delta,
        total_degree,
        p,
    })
}

/// A reduced quotient of univariate polynomials with monic denominator.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFunction1D<F> {
    pub numerator: SparsePoly<F>,
    pub denominator: SparsePoly<F>,
}

impl<F: Field> RationalFunction1D<F> {
    pub fn new(numerator: SparsePoly<F>, denominator: SparsePoly<F>) -> Result<Self> {
        if denominator.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let g = numerator.gcd_univariate(&denominator)?;
        let num = numerator.divide_exact(&g)?.quotient().ok_or(Error::NotUnique)?;
        let den = denominator.divide_exact(&g)?.quotient().ok_or(Error::NotUnique)?;
        let lead = den.leading_term().map(|(_, c)| c.clone()).unwrap_or_else(F::one);
        let inv = F::one() / lead;
        Ok(RationalFunction1D {
            numerator: num.scale(&inv),
            denominator: den.scale(&inv),
        })
    }

    pub fn is_polynomial(&self) -> bool {
        self.denominator.is_constant()
    }
}

/// `P_g`, `π_g` and `det χ_g` for `m = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedDenominator<F> {
    pub p: SparsePoly<F>,
    /// Monic denominator of `det χ_g` in lowest terms.
    pub reduced: SparsePoly<F>,
    /// `p / reduced`.
    pub ratio: SparsePoly<F>,
    pub det_chi: RationalFunction1D<F>,
}

fn require_m1_exact<F: Field>(c: &Colligation<F>) -> Result<()> {
    if c.shape().m != 1 {
        return Err(Error::Precondition("this computation needs m = 1".into()));
    }
    if !F::is_exact() {
        return Err(Error::Unsupported("this computation needs exact mode".into()));
    }
    Ok(())
}

pub fn reduced_denominator_m1<F: Field>(c: &Colligation<F>, cap: usize) -> Result<ReducedDenominator<F>> {
    require_m1_exact(c)?;
    let shape = c.shape();
    let vars = entry_vars(1, 1);
    let s = SparsePoly::var(vars.clone(), 0);
    // [[a, −bs], [c, 1 − ds]] = [[a, 0], [c, 1]] − [[0, b], [0, d]]·s
    let size = shape.size();
    let mut fixed = c.matrix().clone();
    let mut moving = Mat::zeros(size, size);
    for r in 0..size {
        for col in shape.alpha..size {
            moving[(r, col)] = fixed[(r, col)].clone();
            fixed[(r, col)] = if r == col { F::one() } else { F::zero() };
        }
    }
    let mut num_m = PolyMatrix::from_constant(&fixed, vars.clone());
    for r in 0..size {
        for col in shape.alpha..size {
            let t = s.scale(&moving[(r, col)]);
            num_m.set(r, col, num_m.get(r, col).sub(&t)?);
        }
    }
    let num = num_m.det(cap)?;
    let p = p_poly(c, 1, cap)?;
    let det_chi = RationalFunction1D::new(num, p.clone())?;
    let reduced = det_chi.denominator.clone();
    let ratio = p.divide_exact(&reduced)?.quotient().ok_or(Error::NotUnique)?;
    Ok(ReducedDenominator {
        p,
        reduced,
        ratio,
        det_chi,
    })
}

/// `P_g·P_h / P_{g∘h}` for `m = 1`, in lowest terms.
pub fn cocycle_m1<F: Field>(g: &Colligation<F>, h: &Colligation<F>, cap: usize) -> Result<RationalFunction1D<F>> {
    require_m1_exact(g)?;
    require_m1_exact(h)?;
    let gh = crate::semigroup::circ(g, h)?;
    let pg = reduced_denominator_m1(g, cap)?.reduced;
    let ph = reduced_denominator_m1(h, cap)?.reduced;
    let pgh = reduced_denominator_m1(&gh, cap)?.reduced;
    RationalFunction1D::new(pg.mul(&ph)?, pgh)
}
