//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::time::{Duration, Instant};

use colligation::charfn::{charfn_eval, charfn_oracle, grassmann_map, one_minus_d_s, s_tilde, Subspace};
use colligation::colligation::iota;
use colligation::divisor::{cocycle_m1, delta_multiplicity, det_one_minus_s, p_eval, p_poly, reduced_denominator_m1};
use colligation::invariants::{
    charfn_jets, conjugacy_oracle, divisor_jets, fingerprint, reconstruct_cwb, reconstruct_trace_words, Verdict, Word,
};
use colligation::matrix::PIVOT_TOL;
use colligation::semigroup::circ;
use colligation::verify::{cancellation_pair, random_contraction, random_point, rel_error, separation_shape};
use colligation::{Colligation, Field, Flavor, GaussRat, InnerGroupElement, Mat, Shape};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Q = GaussRat;
type C = Complex64;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    ok: bool,
    note: String,
}

fn shape(alpha: usize, m: usize, n: usize) -> Shape {
    Shape::new(alpha, m, n).unwrap()
}

fn fail(note: impl Into<String>) -> Outcome {
    Outcome { ok: false, note: note.into() }
}

fn pass(note: impl Into<String>) -> Outcome {
    Outcome { ok: true, note: note.into() }
}

fn within(elapsed: Duration, limit: u64, o: Outcome) -> Outcome {
    if o.ok && elapsed > Duration::from_secs(limit) {
        return fail(format!("{}; took {:.1}s, limit {limit}s", o.note, elapsed.as_secs_f64()));
    }
    o
}

/// Point away from the poles of every listed colligation.
fn regular_point<F: Field>(m: usize, cs: &[&Colligation<F>], rng: &mut ChaCha8Rng) -> Mat<F> {
    loop {
        let s: Mat<F> = random_point(m, rng);
        if cs.iter().all(|c| charfn_eval(c, &s).is_ok()) {
            return s;
        }
    }
}

fn multiplicativity<F: Field>(seed: u64) -> Result<(usize, f64), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0f64;
    let mut checked = 0;
    for i in 0..20u64 {
        let alpha = rng.random_range(1..=2);
        let m = rng.random_range(1..=2);
        let g = Colligation::<F>::random(shape(alpha, m, rng.random_range(1..=2)), Flavor::General, seed + 2 * i)
            .map_err(|e| e.to_string())?;
        let h = Colligation::<F>::random(shape(alpha, m, rng.random_range(1..=2)), Flavor::General, seed + 2 * i + 1)
            .map_err(|e| e.to_string())?;
        let gh = circ(&g, &h).map_err(|e| e.to_string())?;
        let mut points = 0;
        while points < 20 {
            let s: Mat<F> = random_point(m, &mut rng);
            let (Ok(x), Ok(y), Ok(z)) = (charfn_eval(&g, &s), charfn_eval(&h, &s), charfn_oracle(&gh, &s)) else {
                continue;
            };
            points += 1;
            let (lhs, rhs) = (z, x.matmul(&y));
            if F::is_exact() && lhs != rhs {
                return Err(format!("pair {i}: exact mismatch"));
            }
            worst = worst.max(rel_error(&lhs, &rhs));
            checked += 1;
        }
    }
    Ok((checked, worst))
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let exact = multiplicativity::<Q>(100);
    let float = multiplicativity::<C>(200);
    let o = match (exact, float) {
        (Ok((n, _)), Ok((k, r))) if r <= 1e-9 => pass(format!("{n} exact points equal, {k} float points, max rel err {r:.1e}")),
        (Ok(_), Ok((_, r))) => fail(format!("float rel err {r:.1e}")),
        (Err(e), _) | (_, Err(e)) => fail(e),
    };
    within(t.elapsed(), 10, o)
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut excess, mut defect) = (f64::MIN, 0f64);
    for i in 0..20 {
        let g = Colligation::<C>::random(shape(1, 2, 3), Flavor::Unitary, 300 + i).unwrap();
        for _ in 0..100 {
            let s = random_contraction(2, &mut rng);
            match charfn_eval(&g, &s) {
                Ok(chi) => excess = excess.max(chi.spectral_norm() - 1.0),
                Err(e) => return fail(format!("contraction point: {e}")),
            }
        }
        for _ in 0..100 {
            let u = Mat::haar_unitary(2, &mut rng);
            match charfn_eval(&g, &u) {
                Ok(chi) => {
                    let gram = chi.adjoint().matmul(&chi).sub(&Mat::identity(1));
                    defect = defect.max(gram.spectral_norm());
                }
                Err(e) => return fail(format!("unitary point: {e}")),
            }
        }
    }
    let o = if excess <= 1e-10 && defect <= 1e-9 {
        pass(format!("max |chi|-1 = {excess:.1e}, max |chi*chi-1| = {defect:.1e}"))
    } else {
        fail(format!("max |chi|-1 = {excess:.1e}, max |chi*chi-1| = {defect:.1e}"))
    };
    within(t.elapsed(), 20, o)
}

fn criterion_3() -> Outcome {
    let t = Instant::now();
    let cap = 12;
    let run = || -> colligation::Result<Outcome> {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = Colligation::<Q>::random(shape(1, 2, 1), Flavor::General, 31)?;
        let h = Colligation::<Q>::random(shape(1, 2, 1), Flavor::General, 32)?;
        let (pg, ph) = (p_poly(&g, 1, cap)?, p_poly(&h, 1, cap)?);
        let pgh = p_poly(&circ(&g, &h)?, 1, cap)?;
        if pgh != pg.mul(&ph)? {
            return Ok(fail("p of the product differs from the product of p"));
        }
        // The polynomial agrees with a direct determinant.
        for _ in 0..5 {
            let s: Mat<Q> = random_point(2, &mut rng);
            let direct = one_minus_d_s(&g, &s)?.det();
            if pg.eval(&[s[(0, 0)].clone(), s[(0, 1)].clone(), s[(1, 0)].clone(), s[(1, 1)].clone()])? != direct {
                return Ok(fail("p disagrees with det(1 - dS)"));
            }
        }
        let division = p_poly(&g.embed(), 1, cap)?.divide_exact(&det_one_minus_s(2)?)?;
        if division.quotient().as_ref() != Some(&pg) {
            return Ok(fail("p of the embedding is not p times det(1 - S)"));
        }
        let base = delta_multiplicity(&g, cap)?;
        let thrice = delta_multiplicity(&g.embed().embed().embed(), cap)?;
        Ok(if thrice == base + 3 {
            pass(format!("delta multiplicity {base} -> {thrice} after three embeddings"))
        } else {
            fail(format!("delta multiplicity {base} -> {thrice}"))
        })
    };
    let o = run().unwrap_or_else(|e| fail(e.to_string()));
    within(t.elapsed(), 10, o)
}

/// `det χ(S)·det(1 − dS̃)` against the block determinant, with χ from the
/// linear-system oracle.
fn det_identity<F: Field>(seed: u64) -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0f64;
    for i in 0..50 {
        let sh = shape(rng.random_range(1..=2), rng.random_range(1..=2), rng.random_range(1..=2));
        let g = Colligation::<F>::random(sh, Flavor::General, seed + i).map_err(|e| e.to_string())?;
        let s = regular_point(sh.m, &[&g], &mut rng);
        let chi = charfn_oracle(&g, &s).map_err(|e| e.to_string())?;
        let st = s_tilde(&s, sh.n);
        let k = Mat::identity(sh.m * sh.n).sub(&g.d().matmul(&st));
        let lhs = chi.det() * k.det();
        let block = g.a().hstack(&g.b().matmul(&st).neg()).vstack(&g.c().hstack(&k));
        let rhs = block.det();
        if F::is_exact() && lhs != rhs {
            return Err(format!("instance {i}: nonzero exact residual"));
        }
        let scale = 1f64.max(lhs.modulus()).max(rhs.modulus());
        worst = worst.max((lhs - rhs).modulus() / scale);
    }
    Ok(worst)
}

fn criterion_4() -> Outcome {
    match (det_identity::<Q>(400), det_identity::<C>(500)) {
        (Ok(_), Ok(r)) if r <= 1e-9 => pass(format!("50 exact residuals zero, 50 float max rel {r:.1e}")),
        (Ok(_), Ok(r)) => fail(format!("float residual {r:.1e}")),
        (Err(e), _) | (_, Err(e)) => fail(e),
    }
}

fn criterion_5() -> Outcome {
    let run = || -> colligation::Result<Outcome> {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = Colligation::<Q>::random(shape(2, 2, 2), Flavor::General, 51)?;
        let g2 = g.amplify(2)?;
        let id2 = Mat::<Q>::identity(2);
        for i in 0..20 {
            let s1 = regular_point(2, &[&g], &mut rng);
            let s2 = regular_point(2, &[&g], &mut rng);
            let split = Mat::direct_sum(&[&charfn_eval(&g, &s1)?, &charfn_eval(&g, &s2)?]);
            if charfn_oracle(&g2, &Mat::direct_sum(&[&s1, &s2]))? != split {
                return Ok(fail(format!("block splitting fails at point {i}")));
            }
        }
        for i in 0..20 {
            let h = InnerGroupElement::<Q>::random_gl(2, 500 + i).matrix().clone();
            let (hs, ha) = (h.kron(&id2), h.kron(&id2));
            let s = regular_point(4, &[&g2], &mut rng);
            let moved = hs.matmul(&s).matmul(&hs.inverse()?);
            let lhs = charfn_oracle(&g2, &moved)?;
            let rhs = ha.matmul(&charfn_eval(&g2, &s)?).matmul(&ha.inverse()?);
            if lhs != rhs {
                return Ok(fail(format!("equivariance fails at point {i}")));
            }
            if p_eval(&g2, &moved)? != p_eval(&g2, &s)? {
                return Ok(fail(format!("divisor invariance fails at point {i}")));
            }
        }
        Ok(pass("splitting, equivariance and divisor invariance exact at 20 points each"))
    };
    run().unwrap_or_else(|e| fail(e.to_string()))
}

fn criterion_6() -> Outcome {
    let run = || -> colligation::Result<Outcome> {
        let mut words_checked = 0;
        let mut cwb_checked = 0;
        for i in 0..10 {
            let g = Colligation::<Q>::random(shape(1, 2, 2), Flavor::General, 600 + i)?;
            let d = |p: usize, q: usize| g.d_block(p, q).unwrap();
            let words = reconstruct_trace_words(2, 3, divisor_jets(&g))?;
            let expected: usize = (1..=3).map(|n| Word::all(2, n).filter(Word::is_canonical).count()).sum();
            if words.len() != expected {
                return Ok(fail(format!("{} trace words recovered, expected {expected}", words.len())));
            }
            for (w, v) in &words {
                let mut prod = Mat::<Q>::identity(2);
                for &(p, q) in w.letters() {
                    prod = prod.matmul(&d(p, q));
                }
                if *v != prod.trace() {
                    return Ok(fail(format!("colligation {i}: trace word {w} differs")));
                }
                words_checked += 1;
            }
            let (a, cwb) = reconstruct_cwb(2, 1, 2, charfn_jets(&g))?;
            if a != g.a() {
                return Ok(fail(format!("colligation {i}: corner a differs")));
            }
            let b = g.b();
            let c = g.c();
            for (key, v) in &cwb {
                let mut prod = b.block(key.k, 2 * key.beta, 1, 2);
                for &(p, q) in key.word.letters() {
                    prod = prod.matmul(&d(p, q));
                }
                let direct = prod.matmul(&c.block(2 * key.gamma, key.l, 2, 1))[(0, 0)].clone();
                if *v != direct {
                    return Ok(fail(format!("colligation {i}: cwb {key} differs")));
                }
                cwb_checked += 1;
            }
        }
        Ok(pass(format!("{words_checked} trace words and {cwb_checked} cwb values exact")))
    };
    run().unwrap_or_else(|e| fail(e.to_string()))
}

fn witness_reproduces(g: &Colligation<Q>, h: &Colligation<Q>, u: &Mat<Q>) -> bool {
    let s = g.shape();
    let Ok(u_inv) = u.inverse() else { return false };
    let lhs = iota(u, s.alpha, s.m).matmul(g.matrix()).matmul(&iota(&u_inv, s.alpha, s.m));
    &lhs == h.matrix()
}

fn criterion_7() -> Outcome {
    let run = || -> colligation::Result<Outcome> {
        let mut disagreements = Vec::new();
        let mut inconclusive = 0;
        for i in 0..50 {
            let sh = separation_shape(i);
            let max_len = sh.n * sh.n;
            let g = Colligation::<Q>::random(sh, Flavor::General, 700 + 2 * i as u64)?;
            let h = Colligation::<Q>::random(sh, Flavor::General, 701 + 2 * i as u64)?;
            let same = fingerprint(&g, max_len)?.matches(&fingerprint(&h, max_len)?);
            match conjugacy_oracle(&g, &h, i as u64)? {
                Verdict::Inconclusive => inconclusive += 1,
                v if v.is_conjugate() != same => disagreements.push(i),
                _ => {}
            }
        }
        let mut detected = 0;
        for i in 0..10 {
            let sh = separation_shape(i);
            let max_len = sh.n * sh.n;
            let g = Colligation::<Q>::random(sh, Flavor::General, 800 + i as u64)?;
            let h = g.conjugate(&InnerGroupElement::random_gl(sh.n, 900 + i as u64))?;
            if !fingerprint(&g, max_len)?.matches(&fingerprint(&h, max_len)?) {
                disagreements.push(100 + i);
            }
            if let Verdict::Conjugate { witness } = conjugacy_oracle(&g, &h, i as u64)? {
                if witness_reproduces(&g, &h, &witness) {
                    detected += 1;
                }
            }
        }
        let note = format!(
            "{} disagreements, {inconclusive} inconclusive, {detected}/10 conjugate pairs with valid witnesses",
            disagreements.len()
        );
        Ok(if disagreements.is_empty() && inconclusive == 0 && detected == 10 {
            pass(note)
        } else {
            fail(format!("{note}; pairs {disagreements:?}"))
        })
    };
    run().unwrap_or_else(|e| fail(e.to_string()))
}

fn criterion_8() -> Outcome {
    let run = || -> colligation::Result<Outcome> {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for i in 0..50 {
            let sh = shape(rng.random_range(1..=2), rng.random_range(1..=2), rng.random_range(1..=2));
            let g = Colligation::<C>::random(sh, Flavor::General, 1000 + i)?;
            let s = regular_point(sh.m, &[&g], &mut rng);
            let image = grassmann_map(&g, &Subspace::graph(&s), PIVOT_TOL)?;
            let expected = Subspace::cograph(&charfn_oracle(&g, &s)?);
            if !image.approx_eq(&expected, 1e-9) {
                return Ok(fail(format!("instance {i}: subspaces differ")));
            }
        }
        for i in 0..10 {
            let g = Colligation::<C>::random(shape(2, 2, 1), Flavor::General, 1100 + i)?;
            let vertical = Subspace::span(&Mat::<C>::zeros(2, 2).vstack(&Mat::identity(2)), PIVOT_TOL);
            let image = grassmann_map(&g, &vertical, PIVOT_TOL)?;
            let schur = g.a().sub(&g.b().matmul(&g.d().inverse()?).matmul(&g.c()));
            if !image.approx_eq(&Subspace::cograph(&schur), 1e-9) {
                return Ok(fail(format!("Lambda = 0 point {i} differs")));
            }
        }
        Ok(pass("50 graph points and 10 Lambda = 0 points agree within 1e-9"))
    };
    run().unwrap_or_else(|e| fail(e.to_string()))
}

fn criterion_9() -> Outcome {
    let run = || -> colligation::Result<Outcome> {
        let cap = 12;
        let (g, h) = cancellation_pair();
        let gh = circ(&g, &h)?;
        let (rg, rh, rgh) = (
            reduced_denominator_m1(&g, cap)?,
            reduced_denominator_m1(&h, cap)?,
            reduced_denominator_m1(&gh, cap)?,
        );
        let division = rg.reduced.mul(&rh.reduced)?.divide_exact(&rgh.reduced)?;
        let Some(c) = division.quotient() else {
            return Ok(fail("P_g P_h is not divisible by P_gh"));
        };
        if c.total_degree() < 1 {
            return Ok(fail("cocycle is constant"));
        }
        let lib = cocycle_m1(&g, &h, cap)?;
        if !lib.is_polynomial() || lib.numerator != c {
            return Ok(fail("library cocycle disagrees with direct division"));
        }
        let rhs = rg.ratio.mul(&rh.ratio)?.mul(&c)?;
        Ok(if rgh.ratio == rhs {
            pass(format!("cocycle {c} of degree {}", c.total_degree()))
        } else {
            fail("pi of the product is not pi_g pi_h c")
        })
    };
    run().unwrap_or_else(|e| fail(e.to_string()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("multiplicativity", criterion_1),
        ("unitarity", criterion_2),
        ("divisor additivity and embedding", criterion_3),
        ("determinant identity", criterion_4),
        ("relations", criterion_5),
        ("reconstruction", criterion_6),
        ("separation", criterion_7),
        ("grassmannian consistency", criterion_8),
        ("m=1 cocycle", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = f();
        failed += usize::from(!o.ok);
        let secs = t.elapsed().as_secs_f64();
        println!(
            "{} criterion {} ({name}): {} [{secs:.1}s]",
            if o.ok { "PASS" } else { "FAIL" },
            i + 1,
            o.note
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
