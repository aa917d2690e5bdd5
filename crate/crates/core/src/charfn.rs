//! Characteristic functions `χ_g(S) = a + bS̃(1 − dS̃)⁻¹c` and their
//! Grassmannian form.

use crate::colligation::Colligation;
use crate::error::{Error, Result};
use crate::matrix::{Mat, PIVOT_TOL};
use crate::poly::{PolyMatrix, SparsePoly, Truncation, Var, Vars};
use crate::scalar::Field;

/// Relative threshold on the smallest singular value of `1 − dS̃`.
pub const POLE_TOL: f64 = 1e-12;

/// `S̃ = S ⊗ 1_N`.
pub fn s_tilde<F: Field>(s: &Mat<F>, n: usize) -> Mat<F> {
    s.kron(&Mat::identity(n))
}

/// `1 − dS̃` for a colligation and a point.
pub fn one_minus_d_s<F: Field>(c: &Colligation<F>, s: &Mat<F>) -> Result<Mat<F>> {
    let shape = c.shape();
    if s.rows() != shape.m || s.cols() != shape.m {
        return Err(Error::Dimension(format!(
            "S is {}x{}, expected {}x{}",
            s.rows(),
            s.cols(),
            shape.m,
            shape.m
        )));
    }
    let st = s_tilde(s, shape.n);
    Ok(Mat::identity(st.rows()).sub(&c.d().matmul(&st)))
}

fn check_pole<F: Field>(k: &Mat<F>) -> Result<()> {
    if k.rows() == 0 {
        return Ok(());
    }
    if F::is_exact() {
        if k.det().is_zero() {
            return Err(Error::Pole { det_modulus: 0.0 });
        }
    } else {
        let kc = k.map(F::to_c64);
        let sv = kc.singular_values();
        if sv[sv.len() - 1] <= POLE_TOL * sv[0] {
            return Err(Error::Pole {
                det_modulus: kc.det().norm(),
            });
        }
    }
    Ok(())
}

pub fn charfn_eval<F: Field>(c: &Colligation<F>, s: &Mat<F>) -> Result<Mat<F>> {
    let k = one_minus_d_s(c, s)?;
    check_pole(&k)?;
    let x = k.solve(&c.c())?;
    let st = s_tilde(s, c.shape().n);
    Ok(c.a().add(&c.b().matmul(&st).matmul(&x)))
}

/// Solves `(q, x) = g·(p, S̃x)` for `(q, x)` as one linear system, one unit
/// vector `p` at a time, and collects `q`.
pub fn charfn_oracle<F: Field>(c: &Colligation<F>, s: &Mat<F>) -> Result<Mat<F>> {
    let shape = c.shape();
    if s.rows() != shape.m || s.cols() != shape.m {
        return Err(Error::Dimension("S has the wrong size".into()));
    }
    let size = shape.size();
    let mut inflate = Mat::zeros(size, size);
    inflate.set_block(shape.alpha, shape.alpha, &s_tilde(s, shape.n));
    let g = c.matrix();
    let system = Mat::identity(size).sub(&g.matmul(&inflate));
    let mut out = Mat::zeros(shape.alpha, shape.alpha);
    for col in 0..shape.alpha {
        let mut p = Mat::zeros(size, 1);
        p[(col, 0)] = F::one();
        let z = system.solve(&g.matmul(&p)).map_err(|e| match e {
            Error::Singular => Error::NotUnique,
            other => other,
        })?;
        for row in 0..shape.alpha {
            out[(row, col)] = z[(row, 0)].clone();
        }
    }
    Ok(out)
}

/// `χ` of the `j`-fold amplification, evaluated at a `jm × jm` point.
pub fn charfn_eval_amplified<F: Field>(c: &Colligation<F>, j: usize, s: &Mat<F>) -> Result<Mat<F>> {
    charfn_eval(&c.amplify(j)?, s)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetIdentity<F> {
    /// `det χ(S)·det(1 − dS̃) − det[[a, −bS̃], [c, 1 − dS̃]]`.
    pub residual: F,
    /// Magnitude of the terms, for relative comparisons.
    pub scale: f64,
}

pub fn det_identity_residual<F: Field>(c: &Colligation<F>, s: &Mat<F>) -> Result<DetIdentity<F>> {
    let chi = charfn_eval(c, s)?;
    let k = one_minus_d_s(c, s)?;
    let st = s_tilde(s, c.shape().n);
    let top = c.a().hstack(&c.b().matmul(&st).neg());
    let bottom = c.c().hstack(&k);
    let rhs = top.vstack(&bottom).det();
    let lhs = chi.det() * k.det();
    let scale = 1f64.max(lhs.modulus()).max(rhs.modulus());
    Ok(DetIdentity {
        residual: lhs - rhs,
        scale,
    })
}

/// A linear subspace stored by a basis in column-reduced echelon form, so
/// that equal subspaces have equal bases.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace<F> {
    basis: Mat<F>,
}

impl<F: Field> Subspace<F> {
    /// The span of the columns of `m`.
    pub fn span(m: &Mat<F>, tol: f64) -> Self {
        let ech = m.transpose().echelon(tol);
        let r = ech.pivots.len();
        Subspace {
            basis: ech.rref.block(0, 0, r, m.rows()).transpose(),
        }
    }

    /// `{(v, op·v)}`.
    pub fn graph(op: &Mat<F>) -> Self {
        Self::span(&Mat::identity(op.cols()).vstack(op), PIVOT_TOL)
    }

    /// `{(op·v, v)}`.
    pub fn cograph(op: &Mat<F>) -> Self {
        Self::span(&op.vstack(&Mat::identity(op.cols())), PIVOT_TOL)
    }

    pub fn ambient(&self) -> usize {
        self.basis.rows()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &Mat<F> {
        &self.basis
    }

    /// Equal dimension and reduced bases equal within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.ambient() == other.ambient()
            && self.dim() == other.dim()
            && self.basis.close_to(&other.basis, tol)
    }
}

/// The set of `(q, p)` for which some `(x, y) ∈ L ⊗ Z_N` satisfies
/// `(q, x) = g·(p, y)`. `L` lives in `V_x ⊕ V_y`, so the graph of `S` is
/// `{(x, Sx)}`, and the result is `{(χ(S)p, p)}` at regular points.
pub fn grassmann_map<F: Field>(c: &Colligation<F>, l: &Subspace<F>, tol: f64) -> Result<Subspace<F>> {
    let shape = c.shape();
    let (alpha, m, n) = (shape.alpha, shape.m, shape.n);
    if l.ambient() != 2 * m {
        return Err(Error::Dimension(format!(
            "L lives in dimension {}, expected {}",
            l.ambient(),
            2 * m
        )));
    }
    let k = l.dim();
    let id_n = Mat::identity(n);
    let xt = l.basis().block(0, 0, m, k).kron(&id_n);
    let yt = l.basis().block(m, 0, m, k).kron(&id_n);
    let unknowns = 2 * alpha + k * n;
    let mut sys = Mat::zeros(alpha + m * n, unknowns);
    sys.set_block(0, 0, &Mat::identity(alpha));
    sys.set_block(0, alpha, &c.a().neg());
    sys.set_block(0, 2 * alpha, &c.b().matmul(&yt).neg());
    sys.set_block(alpha, alpha, &c.c().neg());
    sys.set_block(alpha, 2 * alpha, &xt.sub(&c.d().matmul(&yt)));
    let null = sys.nullspace(tol);
    let proj = null.block(0, 0, 2 * alpha, null.cols());
    Ok(Subspace::span(&proj, tol))
}

/// A `jm × jm` matrix with the listed `Var::Entry` variables in place and
/// zeros elsewhere. Entry `s_{φψ}^{μν}` sits at row `μm + φ`, column `νm + ψ`.
pub fn symbolic_s<F: Field>(m: usize, j: usize, vars: &Vars) -> Result<PolyMatrix<F>> {
    let mut s = PolyMatrix::zeros(j * m, j * m, vars.clone());
    for (i, v) in vars.iter().enumerate() {
        match *v {
            Var::Entry { phi, psi, mu, nu } if phi < m && psi < m && mu < j && nu < j => {
                s.set(mu * m + phi, nu * m + psi, SparsePoly::var(vars.clone(), i));
            }
            _ => return Err(Error::Index(format!("variable {v} does not address a {j}x{j} block of m = {m}"))),
        }
    }
    Ok(s)
}

/// `S ⊗ 1_N` for a polynomial matrix.
pub fn poly_s_tilde<F: Field>(s: &PolyMatrix<F>, n: usize) -> PolyMatrix<F> {
    let mut out = PolyMatrix::zeros(s.rows() * n, s.cols() * n, s.vars().clone());
    for r in 0..s.rows() {
        for c in 0..s.cols() {
            let p = s.get(r, c);
            if p.is_zero() {
                continue;
            }
            for k in 0..n {
                out.set(r * n + k, c * n + k, p.clone());
            }
        }
    }
    out
}

/// Taylor jet of `χ_g` at `S = 0` in a nilpotent truncation: the Neumann
/// series `a + bS̃ Σ (dS̃)^k c` terminates.
pub fn charfn_taylor<F: Field>(
    c: &Colligation<F>,
    s: &PolyMatrix<F>,
    trunc: &Truncation,
) -> Result<PolyMatrix<F>> {
    if !trunc.is_nilpotent() {
        return Err(Error::Precondition("Taylor jets need a nilpotent truncation".into()));
    }
    let shape = c.shape();
    if s.rows() != shape.m || s.cols() != shape.m {
        return Err(Error::Dimension("S has the wrong size".into()));
    }
    let vars = s.vars().clone();
    let st = poly_s_tilde(s, shape.n);
    let d = PolyMatrix::from_constant(&c.d(), vars.clone());
    let mut term = st.matmul_trunc(&PolyMatrix::from_constant(&c.c(), vars.clone()), trunc)?;
    let mut acc = term.clone();
    while !term.is_zero() {
        term = st.matmul_trunc(&d.matmul_trunc(&term, trunc)?, trunc)?;
        acc = acc.add(&term)?;
    }
    let tail = PolyMatrix::from_constant(&c.b(), vars.clone()).matmul_trunc(&acc, trunc)?;
    PolyMatrix::from_constant(&c.a(), vars).add(&tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colligation::{Flavor, Shape};
    use crate::poly::flat_vars;
    use crate::scalar::GaussRat;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    type Q = GaussRat;

    fn q(v: i64) -> Q {
        Q::from_i64(v)
    }

    fn shape(alpha: usize, m: usize, n: usize) -> Shape {
        Shape::new(alpha, m, n).unwrap()
    }

    #[test]
    fn identity_and_zero_point() {
        let id = Colligation::<Q>::identity(shape(2, 2, 2));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = Mat::from_fn(2, 2, |_, _| Q::sample(&mut rng));
        assert_eq!(charfn_eval(&id, &s).unwrap(), Mat::identity(2));
        assert_eq!(charfn_oracle(&id, &s).unwrap(), Mat::identity(2));
        let g = Colligation::<Q>::random(shape(2, 2, 2), Flavor::General, 2).unwrap();
        assert_eq!(charfn_eval(&g, &Mat::zeros(2, 2)).unwrap(), g.a());
    }

    #[test]
    fn empty_inner_space() {
        let g = Colligation::<Q>::random(shape(2, 3, 0), Flavor::General, 2).unwrap();
        assert_eq!(charfn_eval(&g, &Mat::identity(3)).unwrap(), g.a());
    }

    #[test]
    fn scalar_example_by_hand() {
        // α = m = N = 1, g = [[1, 1], [1, 2]]: χ(s) = 1 + s/(1 − 2s).
        let g = Colligation::new(
            shape(1, 1, 1),
            Flavor::General,
            Mat::from_rows(vec![vec![q(1), q(1)], vec![q(1), q(2)]]).unwrap(),
        )
        .unwrap();
        let s = Mat::from_rows(vec![vec![q(3)]]).unwrap();
        // 1 + 3/(1 − 6) = 2/5
        assert_eq!(charfn_eval(&g, &s).unwrap()[(0, 0)], Q::from_frac(2, 5));
        let pole = Mat::from_rows(vec![vec![Q::from_frac(1, 2)]]).unwrap();
        assert!(matches!(charfn_eval(&g, &pole), Err(Error::Pole { .. })));
        assert!(matches!(charfn_oracle(&g, &pole), Err(Error::NotUnique)));
    }

    #[test]
    fn eval_matches_oracle_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for seed in 0..20 {
            let g = Colligation::<Q>::random(shape(2, 2, 2), Flavor::General, seed).unwrap();
            let s = Mat::from_fn(2, 2, |_, _| Q::sample(&mut rng));
            assert_eq!(charfn_eval(&g, &s).unwrap(), charfn_oracle(&g, &s).unwrap());
        }
    }

    #[test]
    fn float_pole_detection() {
        let d = Mat::from_rows(vec![vec![Complex64::new(2.0, 0.0)]]).unwrap();
        let mut m = Mat::identity(2);
        m.set_block(1, 1, &d);
        let g = Colligation::new(shape(1, 1, 1), Flavor::General, m).unwrap();
        let s = Mat::from_rows(vec![vec![Complex64::new(0.5, 0.0)]]).unwrap();
        assert!(matches!(charfn_eval(&g, &s), Err(Error::Pole { .. })));
    }

    #[test]
    fn det_identity_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for seed in 0..10 {
            let g = Colligation::<Q>::random(shape(2, 2, 1), Flavor::General, seed).unwrap();
            let s = Mat::from_fn(2, 2, |_, _| Q::sample(&mut rng));
            assert!(det_identity_residual(&g, &s).unwrap().residual.is_zero());
        }
        let id = Colligation::<Q>::identity(shape(1, 2, 2));
        let s = Mat::from_fn(2, 2, |_, _| Q::sample(&mut rng));
        assert!(det_identity_residual(&id, &s).unwrap().residual.is_zero());
    }

    #[test]
    fn subspace_canonical_form() {
        let m = Mat::from_rows(vec![vec![q(1), q(2)], vec![q(2), q(4)], vec![q(0), q(1)]]).unwrap();
        let mixed = Mat::from_rows(vec![vec![q(3), q(1)], vec![q(6), q(2)], vec![q(1), q(1)]]).unwrap();
        let a = Subspace::span(&m, PIVOT_TOL);
        assert_eq!(a.dim(), 2);
        assert_eq!(a, Subspace::span(&mixed, PIVOT_TOL));
        let op = Mat::from_rows(vec![vec![q(2)]]).unwrap();
        assert_eq!(
            Subspace::graph(&op).basis(),
            &Mat::from_rows(vec![vec![q(1)], vec![q(2)]]).unwrap()
        );
        assert_eq!(
            Subspace::cograph(&op).basis(),
            &Mat::from_rows(vec![vec![q(1)], vec![Q::from_frac(1, 2)]]).unwrap()
        );
    }

    #[test]
    fn grassmann_graph_and_lambda_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = Colligation::<Q>::random(shape(2, 2, 1), Flavor::General, 9).unwrap();
        let s = Mat::from_fn(2, 2, |_, _| Q::sample(&mut rng));
        let image = grassmann_map(&g, &Subspace::graph(&s), PIVOT_TOL).unwrap();
        assert_eq!(image, Subspace::cograph(&charfn_eval(&g, &s).unwrap()));
        let vertical = Subspace::span(&Mat::<Q>::zeros(2, 2).vstack(&Mat::identity(2)), PIVOT_TOL);
        let image = grassmann_map(&g, &vertical, PIVOT_TOL).unwrap();
        let d_inv = g.d().inverse().unwrap();
        let expect = g.a().sub(&g.b().matmul(&d_inv).matmul(&g.c()));
        assert_eq!(image, Subspace::cograph(&expect));
        let id = Colligation::<Q>::identity(shape(2, 2, 1));
        let image = grassmann_map(&id, &Subspace::graph(&s), PIVOT_TOL).unwrap();
        assert_eq!(image, Subspace::cograph(&Mat::identity(2)));
    }

    #[test]
    fn taylor_jet_matches_evaluation_on_multilinear_part() {
        // m = 1, one variable, truncated at degree one: χ ≈ a + b c s.
        let g = Colligation::<Q>::random(shape(1, 1, 2), Flavor::General, 6).unwrap();
        let vars: Vars = Arc::new(vec![Var::Entry { phi: 0, psi: 0, mu: 0, nu: 0 }]);
        let s = symbolic_s::<Q>(1, 1, &vars).unwrap();
        let jet = charfn_taylor(&g, &s, &Truncation::Multilinear).unwrap();
        let lin = g.b().matmul(&g.c())[(0, 0)].clone();
        assert_eq!(jet.get(0, 0).coeff(&[1]), lin);
        assert_eq!(jet.get(0, 0).coeff(&[0]), g.a()[(0, 0)]);
        assert!(charfn_taylor(&g, &s, &Truncation::None).is_err());
        assert!(symbolic_s::<Q>(1, 1, &flat_vars(1)).is_err());
    }
}
