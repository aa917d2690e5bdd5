//! Named property suites run at a configurable scale, with machine-readable
//! reports.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::charfn::{charfn_eval, charfn_eval_amplified, det_identity_residual, grassmann_map, Subspace};
use crate::colligation::{Colligation, Flavor, InnerGroupElement, Shape};
use crate::divisor::{self, det_one_minus_s, p_eval, p_poly};
use crate::error::{Error, Result};
use crate::invariants::{self, fingerprint, Contour, Verdict};
use crate::matrix::{Mat, PIVOT_TOL};
use crate::poly::DEFAULT_DET_CAP;
use crate::scalar::{Field, GaussRat, Mode};
use crate::semigroup::circ;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub seed: u64,
    /// Relative tolerance for float comparisons.
    pub tol: f64,
    pub trials: usize,
    /// Word-length cap; `None` means `N²`.
    pub max_word_len: Option<usize>,
    pub det_cap: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::Exact,
            seed: 0,
            tol: 1e-9,
            trials: 20,
            max_word_len: None,
            det_cap: DEFAULT_DET_CAP,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::Precondition("tol must be positive".into()));
        }
        if self.trials == 0 {
            return Err(Error::Precondition("trials must be at least 1".into()));
        }
        if self.det_cap == 0 {
            return Err(Error::Precondition("det cap must be at least 1".into()));
        }
        Ok(())
    }

    fn rng(&self, tag: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ tag)
    }

    fn seed_for(&self, tag: u64, i: usize) -> u64 {
        self.seed
            .wrapping_mul(1_000_003)
            .wrapping_add(tag.wrapping_mul(10_007))
            .wrapping_add(i as u64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CaseResult {
    pub name: String,
    pub status: Status,
    pub residual: Option<f64>,
    pub details: String,
}

impl CaseResult {
    fn check(name: impl Into<String>, ok: bool, residual: Option<f64>, details: impl Into<String>) -> Self {
        CaseResult {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            residual,
            details: details.into(),
        }
    }

    fn error(name: impl Into<String>, e: &Error) -> Self {
        CaseResult {
            name: name.into(),
            status: Status::Fail,
            residual: None,
            details: e.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub suite: String,
    pub cases: Vec<CaseResult>,
}

impl Report {
    fn new(suite: Suite, mut cases: Vec<CaseResult>) -> Self {
        cases.sort_by(|a, b| a.name.cmp(&b.name));
        Report {
            suite: suite.to_string(),
            cases,
        }
    }

    pub fn count(&self, status: Status) -> usize {
        self.cases.iter().filter(|c| c.status == status).count()
    }

    /// No case failed.
    pub fn ok(&self) -> bool {
        self.count(Status::Fail) == 0
    }

    pub fn to_json(&self) -> Value {
        let cases: Vec<Value> = self
            .cases
            .iter()
            .map(|c| {
                let mut v = json!({"name": c.name, "status": c.status.as_str(), "details": c.details});
                if let Some(r) = c.residual {
                    v["residual"] = json!(r);
                }
                v
            })
            .collect();
        json!({
            "suite": self.suite,
            "cases": cases,
            "summary": {
                "pass": self.count(Status::Pass),
                "fail": self.count(Status::Fail),
                "inconclusive": self.count(Status::Inconclusive),
            },
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Multiplicativity,
    Unitarity,
    Divisor,
    Relations,
    Reconstruction,
    Separation,
    All,
}

impl Suite {
    pub const EACH: [Suite; 6] = [
        Suite::Multiplicativity,
        Suite::Unitarity,
        Suite::Divisor,
        Suite::Relations,
        Suite::Reconstruction,
        Suite::Separation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Multiplicativity => "multiplicativity",
            Suite::Unitarity => "unitarity",
            Suite::Divisor => "divisor",
            Suite::Relations => "relations",
            Suite::Reconstruction => "reconstruction",
            Suite::Separation => "separation",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .iter()
            .chain(&[Suite::All])
            .find(|x| x.as_str() == s)
            .copied()
            .ok_or_else(|| Error::Parse(format!("unknown suite {s:?}")))
    }
}

/// Runs one suite, or every suite for [`Suite::All`]. Unitarity needs float
/// scalars; inside `all` it runs in float mode whatever the configured mode.
pub fn run(suite: Suite, cfg: &RunConfig) -> Result<Vec<Report>> {
    cfg.validate()?;
    match suite {
        Suite::All => Suite::EACH
            .iter()
            .map(|&s| {
                if s == Suite::Unitarity {
                    let float = RunConfig { mode: Mode::Float, ..cfg.clone() };
                    run_one(s, &float)
                } else {
                    run_one(s, cfg)
                }
            })
            .collect(),
        s => Ok(vec![run_one(s, cfg)?]),
    }
}

fn run_one(suite: Suite, cfg: &RunConfig) -> Result<Report> {
    let cases = match (suite, cfg.mode) {
        (Suite::Unitarity, Mode::Exact) => {
            return Err(Error::Unsupported("the unitarity suite needs float mode".into()))
        }
        (Suite::Unitarity, Mode::Float) => unitarity(cfg),
        (Suite::Multiplicativity, Mode::Exact) => multiplicativity::<GaussRat>(cfg),
        (Suite::Multiplicativity, Mode::Float) => multiplicativity::<Complex64>(cfg),
        (Suite::Divisor, Mode::Exact) => divisor_exact(cfg),
        (Suite::Divisor, Mode::Float) => divisor_float(cfg),
        (Suite::Relations, Mode::Exact) => relations::<GaussRat>(cfg),
        (Suite::Relations, Mode::Float) => relations::<Complex64>(cfg),
        (Suite::Reconstruction, Mode::Exact) => reconstruction_exact(cfg),
        (Suite::Reconstruction, Mode::Float) => reconstruction_float(cfg),
        (Suite::Separation, Mode::Exact) => separation::<GaussRat>(cfg),
        (Suite::Separation, Mode::Float) => separation::<Complex64>(cfg),
        (Suite::All, _) => unreachable!("expanded by run"),
    };
    Ok(Report::new(suite, cases))
}

/// `max|x − y| / max(1, max|x|, max|y|)`.
pub fn rel_error<F: Field>(x: &Mat<F>, y: &Mat<F>) -> f64 {
    let scale = 1f64.max(x.max_abs()).max(y.max_abs());
    x.sub(y).max_abs() / scale
}

fn agree<F: Field>(x: &Mat<F>, y: &Mat<F>, tol: f64) -> (bool, f64) {
    let r = rel_error(x, y);
    if F::is_exact() {
        (x == y, r)
    } else {
        (r <= tol, r)
    }
}

fn agree_scalar<F: Field>(x: &F, y: &F, tol: f64) -> (bool, f64) {
    let scale = 1f64.max(x.modulus()).max(y.modulus());
    let r = (x.clone() - y.clone()).modulus() / scale;
    if F::is_exact() {
        (x == y, r)
    } else {
        (r <= tol, r)
    }
}

pub fn random_point<F: Field, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Mat<F> {
    Mat::from_fn(n, n, |_, _| F::sample(rng))
}

/// Random matrix with spectral norm at most 1.
pub fn random_contraction<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Mat<Complex64> {
    let g: Mat<Complex64> = random_point(n, rng);
    let r: f64 = rng.random_range(0.0..=1.0);
    g.scale(&Complex64::new(r / g.spectral_norm().max(f64::MIN_POSITIVE), 0.0))
}

fn shape(alpha: usize, m: usize, n: usize) -> Shape {
    Shape::new(alpha, m, n).expect("m >= 1")
}

fn multiplicativity<F: Field>(cfg: &RunConfig) -> Vec<CaseResult> {
    let mut rng = cfg.rng(1);
    (0..cfg.trials)
        .map(|i| {
            let (alpha, m) = (1 + i % 2, 1 + (i / 2) % 2);
            let (n1, n2) = (1 + (i / 4) % 2, 1 + (i / 8) % 2);
            let name = format!("pair-{i:03}");
            let mut run = || -> Result<CaseResult> {
                let g = Colligation::<F>::random(shape(alpha, m, n1), Flavor::General, cfg.seed_for(1, 2 * i))?;
                let h = Colligation::<F>::random(shape(alpha, m, n2), Flavor::General, cfg.seed_for(1, 2 * i + 1))?;
                let gh = circ(&g, &h)?;
                let (mut worst, mut ok, mut skipped) = (0f64, true, 0);
                for _ in 0..cfg.trials {
                    let s: Mat<F> = random_point(m, &mut rng);
                    let vals = (charfn_eval(&gh, &s), charfn_eval(&g, &s), charfn_eval(&h, &s));
                    let (Ok(x), Ok(y), Ok(z)) = vals else {
                        skipped += 1;
                        continue;
                    };
                    let (good, r) = agree(&x, &y.matmul(&z), cfg.tol);
                    let (good_p, rp) = agree_scalar(&p_eval(&gh, &s)?, &(p_eval(&g, &s)? * p_eval(&h, &s)?), cfg.tol);
                    ok &= good && good_p;
                    worst = worst.max(r).max(rp);
                }
                Ok(CaseResult::check(
                    &name,
                    ok,
                    Some(worst),
                    format!("alpha={alpha} m={m} N=({n1},{n2}); {skipped} points on poles skipped"),
                ))
            };
            run().unwrap_or_else(|e| CaseResult::error(&name, &e))
        })
        .collect()
}

fn unitarity(cfg: &RunConfig) -> Vec<CaseResult> {
    let mut rng = cfg.rng(2);
    let points = 5 * cfg.trials;
    (0..cfg.trials)
        .map(|i| {
            let name = format!("unitary-{i:03}");
            let mut run = || -> Result<CaseResult> {
                let g = Colligation::<Complex64>::random(shape(1, 2, 3), Flavor::Unitary, cfg.seed_for(2, i))?;
                let (mut norm_excess, mut defect) = (0f64, 0f64);
                for _ in 0..points {
                    let s = random_contraction(2, &mut rng);
                    let chi = charfn_eval(&g, &s)?;
                    norm_excess = norm_excess.max(chi.spectral_norm() - 1.0);
                    let u = Mat::haar_unitary(2, &mut rng);
                    let chi = charfn_eval(&g, &u)?;
                    defect = defect.max(chi.unitarity_defect());
                }
                Ok(CaseResult::check(
                    &name,
                    norm_excess <= 1e-10 && defect <= 1e-9,
                    Some(defect.max(norm_excess)),
                    format!("max(|chi|-1)={norm_excess:e}, max unitarity defect={defect:e}"),
                ))
            };
            run().unwrap_or_else(|e| CaseResult::error(&name, &e))
        })
        .collect()
}

fn det_identity_cases<F: Field>(cfg: &RunConfig, rng: &mut ChaCha8Rng) -> Vec<CaseResult> {
    (0..cfg.trials)
        .map(|i| {
            let name = format!("det-identity-{i:03}");
            let mut run = || -> Result<CaseResult> {
                let (alpha, m, n) = (1 + i % 2, 1 + (i / 2) % 2, 1 + (i / 4) % 2);
                let g = Colligation::<F>::random(shape(alpha, m, n), Flavor::General, cfg.seed_for(3, i))?;
                let s: Mat<F> = random_point(m, rng);
                let d = det_identity_residual(&g, &s)?;
                let r = d.residual.modulus() / d.scale;
                let ok = if F::is_exact() { d.residual.is_zero() } else { r <= cfg.tol };
                Ok(CaseResult::check(&name, ok, Some(r), ""))
            };
            run().unwrap_or_else(|e| CaseResult::error(&name, &e))
        })
        .collect()
}

fn divisor_exact(cfg: &RunConfig) -> Vec<CaseResult> {
    type Q = GaussRat;
    let cap = cfg.det_cap;
    let mut rng = cfg.rng(3);
    let mut cases = det_identity_cases::<Q>(cfg, &mut rng);
    for i in 0..cfg.trials {
        let name = format!("additivity-{i:03}");
        let run = || -> Result<CaseResult> {
            let g = Colligation::<Q>::random(shape(1, 2, 1), Flavor::General, cfg.seed_for(4, 2 * i))?;
            let h = Colligation::<Q>::random(shape(1, 2, 1), Flavor::General, cfg.seed_for(4, 2 * i + 1))?;
            let lhs = p_poly(&circ(&g, &h)?, 1, cap)?;
            let rhs = p_poly(&g, 1, cap)?.mul(&p_poly(&h, 1, cap)?)?;
            let u = InnerGroupElement::random_gl(1, cfg.seed_for(4, i));
            let conj = p_poly(&g.conjugate(&u)?, 1, cap)? == p_poly(&g, 1, cap)?;
            Ok(CaseResult::check(&name, lhs == rhs && conj, None, "p of a product and of a conjugate"))
        };
        cases.push(run().unwrap_or_else(|e| CaseResult::error(&name, &e)));
    }
    for i in 0..cfg.trials.min(3) {
        let name = format!("embedding-{i:03}");
        let run = || -> Result<CaseResult> {
            let g = Colligation::<Q>::random(shape(1, 2, 1), Flavor::General, cfg.seed_for(5, i))?;
            let pg = p_poly(&g, 1, cap)?;
            let pe = p_poly(&g.embed(), 1, cap)?;
            let quotient = pe.divide_exact(&det_one_minus_s(2)?)?.quotient();
            let base = divisor::delta_multiplicity(&g, cap)?;
            let mut e = g.clone();
            let mut steps_ok = true;
            for k in 1..=3 {
                e = e.embed();
                steps_ok &= divisor::delta_multiplicity(&e, cap)? == base + k;
            }
            Ok(CaseResult::check(
                &name,
                quotient.as_ref() == Some(&pg) && steps_ok,
                None,
                format!("delta multiplicity {base} grows by one per embedding"),
            ))
        };
        cases.push(run().unwrap_or_else(|e| CaseResult::error(&name, &e)));
    }
    cases.push(cocycle_case(cap));
    cases
}

/// The pole of one factor meets the zero of the other, `m = 1`.
pub fn cancellation_pair() -> (Colligation<GaussRat>, Colligation<GaussRat>) {
    let q = GaussRat::from_i64;
    let mk = |rows: [[i64; 2]; 2]| {
        let m = Mat::from_fn(2, 2, |r, c| q(rows[r][c]));
        Colligation::new(shape(1, 1, 1), Flavor::General, m).expect("2x2")
    };
    (mk([[1, 1], [1, 2]]), mk([[1, 1], [-2, 0]]))
}

fn cocycle_case(cap: usize) -> CaseResult {
    let name = "cocycle";
    let run = || -> Result<CaseResult> {
        let (g, h) = cancellation_pair();
        let c = divisor::cocycle_m1(&g, &h, cap)?;
        let pi = |x: &Colligation<GaussRat>| divisor::reduced_denominator_m1(x, cap).map(|r| r.ratio);
        let lhs = pi(&circ(&g, &h)?)?;
        let rhs = pi(&g)?.mul(&pi(&h)?)?.mul(&c.numerator)?;
        let ok = c.is_polynomial() && c.numerator.total_degree() >= 1 && lhs == rhs;
        Ok(CaseResult::check(name, ok, None, format!("cocycle = {}", c.numerator)))
    };
    run().unwrap_or_else(|e| CaseResult::error(name, &e))
}

fn divisor_float(cfg: &RunConfig) -> Vec<CaseResult> {
    type C = Complex64;
    let mut rng = cfg.rng(3);
    let mut cases = det_identity_cases::<C>(cfg, &mut rng);
    for i in 0..cfg.trials {
        let name = format!("additivity-{i:03}");
        let mut run = || -> Result<CaseResult> {
            let g = Colligation::<C>::random(shape(1, 2, 1), Flavor::General, cfg.seed_for(4, 2 * i))?;
            let h = Colligation::<C>::random(shape(1, 2, 1), Flavor::General, cfg.seed_for(4, 2 * i + 1))?;
            let gh = circ(&g, &h)?;
            let e = g.embed();
            let (mut ok, mut worst) = (true, 0f64);
            for _ in 0..cfg.trials {
                let s: Mat<C> = random_point(2, &mut rng);
                let (a, r1) = agree_scalar(&p_eval(&gh, &s)?, &(p_eval(&g, &s)? * p_eval(&h, &s)?), cfg.tol);
                let delta = Mat::identity(2).sub(&s).det();
                let (b, r2) = agree_scalar(&p_eval(&e, &s)?, &(p_eval(&g, &s)? * delta), cfg.tol);
                ok &= a && b;
                worst = worst.max(r1).max(r2);
            }
            Ok(CaseResult::check(&name, ok, Some(worst), "p of a product and of an embedding, pointwise"))
        };
        cases.push(run().unwrap_or_else(|e| CaseResult::error(&name, &e)));
    }
    cases
}

fn relations<F: Field>(cfg: &RunConfig) -> Vec<CaseResult> {
    let mut rng = cfg.rng(6);
    let mut cases = Vec::new();
    for i in 0..cfg.trials {
        let name = format!("relations-{i:03}");
        let mut run = || -> Result<CaseResult> {
            let (alpha, m) = (1 + i % 2, 2);
            let g = Colligation::<F>::random(shape(alpha, m, 2), Flavor::General, cfg.seed_for(6, i))?;
            let (s1, s2): (Mat<F>, Mat<F>) = (random_point(m, &mut rng), random_point(m, &mut rng));
            let s = Mat::direct_sum(&[&s1, &s2]);
            let split = Mat::direct_sum(&[&charfn_eval(&g, &s1)?, &charfn_eval(&g, &s2)?]);
            let (a, r1) = agree(&charfn_eval_amplified(&g, 2, &s)?, &split, cfg.tol);
            let amp = g.amplify(2)?;
            let (d, r4) = agree_scalar(&p_eval(&amp, &s)?, &(p_eval(&g, &s1)? * p_eval(&g, &s2)?), cfg.tol);

            let h = InnerGroupElement::<F>::random_gl(2, cfg.seed_for(7, i)).matrix().clone();
            let hs = h.kron(&Mat::identity(m));
            let ha = h.kron(&Mat::identity(alpha));
            let t: Mat<F> = random_point(2 * m, &mut rng);
            let moved = hs.matmul(&t).matmul(&hs.inverse()?);
            let lhs = charfn_eval(&amp, &moved)?;
            let rhs = ha.matmul(&charfn_eval(&amp, &t)?).matmul(&ha.inverse()?);
            let (b, r2) = agree(&lhs, &rhs, cfg.tol);
            let (c, r3) = agree_scalar(&p_eval(&amp, &moved)?, &p_eval(&amp, &t)?, cfg.tol);

            let image = grassmann_map(&g, &Subspace::graph(&s1), PIVOT_TOL)?;
            let expect = Subspace::cograph(&charfn_eval(&g, &s1)?);
            let e = image.approx_eq(&expect, 1e-9);
            let ok = a && b && c && d && e;
            let detail = format!(
                "split={a} equivariance={b} divisor-invariance={c} divisor-split={d} grassmann={e}"
            );
            Ok(CaseResult::check(&name, ok, Some(r1.max(r2).max(r3).max(r4)), detail))
        };
        cases.push(run().unwrap_or_else(|e| CaseResult::error(&name, &e)));
    }
    cases
}

fn max_len_or(cfg: &RunConfig, default: usize) -> usize {
    cfg.max_word_len.unwrap_or(default)
}

fn reconstruction_exact(cfg: &RunConfig) -> Vec<CaseResult> {
    let len = max_len_or(cfg, 3);
    (0..cfg.trials)
        .map(|i| {
            let name = format!("reconstruct-{i:03}");
            let run = || -> Result<CaseResult> {
                let g = Colligation::<GaussRat>::random(shape(1, 2, 2), Flavor::General, cfg.seed_for(8, i))?;
                let words = invariants::reconstruct_trace_words(2, len, invariants::divisor_jets(&g))?;
                let mut bad = 0;
                for (w, v) in &words {
                    bad += usize::from(*v != invariants::trace_word(&g, w)?);
                }
                let (a, cwb) = invariants::reconstruct_cwb(2, 1, len.saturating_sub(1), invariants::charfn_jets(&g))?;
                bad += usize::from(a != g.a());
                for (k, v) in &cwb {
                    bad += usize::from(*v != invariants::cwb_invariant(&g, k.gamma, k.l, &k.word, k.beta, k.k)?);
                }
                Ok(CaseResult::check(
                    &name,
                    bad == 0,
                    None,
                    format!("{} trace words, {} cwb values, {bad} mismatches", words.len(), cwb.len()),
                ))
            };
            run().unwrap_or_else(|e| CaseResult::error(&name, &e))
        })
        .collect()
}

fn reconstruction_float(cfg: &RunConfig) -> Vec<CaseResult> {
    let len = max_len_or(cfg, 3);
    let contour = Contour::default();
    let tol = 1e-6;
    (0..cfg.trials)
        .map(|i| {
            let name = format!("reconstruct-{i:03}");
            let run = || -> Result<CaseResult> {
                let g = Colligation::<Complex64>::random(shape(1, 2, 2), Flavor::General, cfg.seed_for(8, i))?;
                let words =
                    invariants::reconstruct_trace_words_float(2, len, &contour, invariants::divisor_values(&g))?;
                let mut worst = 0f64;
                for (w, v) in &words {
                    worst = worst.max(agree_scalar(v, &invariants::trace_word(&g, w)?, tol).1);
                }
                let (a, cwb) = invariants::reconstruct_cwb_float(
                    2,
                    1,
                    len.saturating_sub(1),
                    &contour,
                    invariants::charfn_values(&g),
                )?;
                worst = worst.max(rel_error(&a, &g.a()));
                for (k, v) in &cwb {
                    let direct = invariants::cwb_invariant(&g, k.gamma, k.l, &k.word, k.beta, k.k)?;
                    worst = worst.max(agree_scalar(v, &direct, tol).1);
                }
                Ok(CaseResult::check(&name, worst <= tol, Some(worst), ""))
            };
            run().unwrap_or_else(|e| CaseResult::error(&name, &e))
        })
        .collect()
}

/// Shapes used for separation experiments: `N ≤ 3`, with `m = 1` at `N = 3`
/// to keep the number of words small.
pub fn separation_shape(i: usize) -> Shape {
    match i % 4 {
        0 => shape(1, 2, 1),
        1 => shape(1, 2, 2),
        2 => shape(2, 1, 2),
        _ => shape(1, 1, 3),
    }
}

fn separation<F: Field>(cfg: &RunConfig) -> Vec<CaseResult> {
    let tol: f64 = if F::is_exact() { 0.0 } else { 1e-8 };
    (0..cfg.trials)
        .map(|i| {
            let name = format!("pair-{i:03}");
            let run = || -> Result<CaseResult> {
                let s = separation_shape(i);
                let len = max_len_or(cfg, (s.n * s.n).max(1));
                let g = Colligation::<F>::random(s, Flavor::General, cfg.seed_for(9, 2 * i))?;
                let conjugate_pair = i % 2 == 1;
                let h = if conjugate_pair {
                    g.conjugate(&InnerGroupElement::random_gl(s.n, cfg.seed_for(9, 2 * i + 1)))?
                } else {
                    Colligation::<F>::random(s, Flavor::General, cfg.seed_for(9, 2 * i + 1))?
                };
                let same = fingerprint(&g, len)?.matches(&fingerprint(&h, len)?);
                let verdict = invariants::conjugacy_oracle(&g, &h, cfg.seed_for(10, i))?;
                let witness_ok = match &verdict {
                    Verdict::Conjugate { witness } => invariants::check_witness(&g, &h, witness, tol.max(1e-8))?,
                    _ => true,
                };
                let detail = format!(
                    "{s}: verdict={}, fingerprints {}",
                    verdict.as_str(),
                    if same { "equal" } else { "differ" }
                );
                if verdict == Verdict::Inconclusive {
                    return Ok(CaseResult {
                        name: name.clone(),
                        status: Status::Inconclusive,
                        residual: None,
                        details: detail,
                    });
                }
                let ok = verdict.is_conjugate() == same && witness_ok && verdict.is_conjugate() == conjugate_pair;
                Ok(CaseResult::check(&name, ok, None, detail))
            };
            run().unwrap_or_else(|e| CaseResult::error(&name, &e))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(mode: Mode) -> RunConfig {
        RunConfig {
            mode,
            trials: 3,
            seed: 5,
            ..RunConfig::default()
        }
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::EACH.iter().chain(&[Suite::All]) {
            assert_eq!(s.as_str().parse::<Suite>().unwrap(), *s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn unitarity_rejects_exact_mode() {
        assert!(matches!(
            run(Suite::Unitarity, &small(Mode::Exact)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn bad_config() {
        let cfg = RunConfig { trials: 0, ..RunConfig::default() };
        assert!(run(Suite::Multiplicativity, &cfg).is_err());
    }

    #[test]
    fn small_suites_pass() {
        for mode in [Mode::Exact, Mode::Float] {
            for suite in [Suite::Multiplicativity, Suite::Divisor, Suite::Relations, Suite::Separation] {
                let reports = run(suite, &small(mode)).unwrap();
                for r in reports {
                    assert!(r.ok(), "{mode} {suite}: {:#?}", r.cases);
                }
            }
        }
        let r = &run(Suite::Unitarity, &small(Mode::Float)).unwrap()[0];
        assert!(r.ok(), "{:#?}", r.cases);
    }

    #[test]
    fn report_json_shape() {
        let r = &run(Suite::Multiplicativity, &small(Mode::Exact)).unwrap()[0];
        let v = r.to_json();
        assert_eq!(v["suite"], "multiplicativity");
        assert_eq!(v["summary"]["pass"], 3);
        assert_eq!(v["cases"].as_array().unwrap().len(), 3);
    }
}
