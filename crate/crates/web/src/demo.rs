//! Computations behind the demo page.

use colligation::charfn::charfn_eval;
use colligation::divisor::p_eval;
use colligation::io::{matrix_to_json, to_canonical_string};
use colligation::semigroup::circ;
use colligation::verify::{random_point, rel_error};
use colligation::{Colligation, Complex64, Flavor, Mat, Result, Shape};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

/// Sample coordinates `-extent..extent` on a `res`-point axis.
fn axis(res: usize, extent: f64) -> impl Iterator<Item = f64> + Clone {
    let step = if res > 1 { 2.0 * extent / (res - 1) as f64 } else { 0.0 };
    (0..res).map(move |i| -extent + step * i as f64)
}

/// `|χ_g(s)|` for a random unitary colligation with `α = m = 1`, on a
/// `res × res` grid over the square `[-extent, extent]²` of the complex
/// plane, row-major with the imaginary part decreasing down the rows.
/// Poles give `NaN`.
pub fn charfn_modulus_grid(seed: u32, inner_dim: usize, res: usize, extent: f64) -> Result<Vec<f64>> {
    let g = Colligation::<Complex64>::random(Shape::new(1, 1, inner_dim)?, Flavor::Unitary, seed as u64)?;
    let mut out = Vec::with_capacity(res * res);
    let ys: Vec<f64> = axis(res, extent).collect();
    for &y in ys.iter().rev() {
        for x in axis(res, extent) {
            let s = Mat::from_vec(1, 1, vec![Complex64::new(x, y)])?;
            out.push(charfn_eval(&g, &s).map(|v| v[(0, 0)].norm()).unwrap_or(f64::NAN));
        }
    }
    Ok(out)
}

/// `log10 |p_g(diag(x, y))|` for a random colligation with `α = 1, m = 2`,
/// over real `x, y ∈ [-extent, extent]`, rows running from large `y` down.
/// With `embedded`, `g` is replaced by its embedding, whose divisor gains the
/// lines `x = 1` and `y = 1`.
pub fn divisor_slice(seed: u32, inner_dim: usize, embedded: bool, res: usize, extent: f64) -> Result<Vec<f64>> {
    let mut g = Colligation::<Complex64>::random(Shape::new(1, 2, inner_dim)?, Flavor::General, seed as u64)?;
    if embedded {
        g = g.embed();
    }
    let mut out = Vec::with_capacity(res * res);
    let ys: Vec<f64> = axis(res, extent).collect();
    for &y in ys.iter().rev() {
        for x in axis(res, extent) {
            let s = Mat::from_vec(2, 2, vec![Complex64::new(x, 0.0), Complex64::ZERO, Complex64::ZERO, Complex64::new(y, 0.0)])
                ?;
            out.push(p_eval(&g, &s)?.norm().log10());
        }
    }
    Ok(out)
}

/// Checks `χ_{g∘h}(S) = χ_g(S) χ_h(S)` at a random point and returns a JSON
/// report.
pub fn multiplicativity_check(seed: u32, alpha: usize, m: usize, n1: usize, n2: usize) -> Result<String> {
    let seed = seed as u64;
    let g = Colligation::<Complex64>::random(Shape::new(alpha, m, n1)?, Flavor::General, 2 * seed)?;
    let h = Colligation::<Complex64>::random(Shape::new(alpha, m, n2)?, Flavor::General, 2 * seed + 1)?;
    let gh = circ(&g, &h)?;
    let s: Mat<Complex64> = random_point(m, &mut ChaCha8Rng::seed_from_u64(seed));
    let lhs = charfn_eval(&gh, &s)?;
    let rhs = charfn_eval(&g, &s)?.matmul(&charfn_eval(&h, &s)?);
    let report = json!({
        "S": matrix_to_json(&s),
        "product": matrix_to_json(&lhs),
        "factors": matrix_to_json(&rhs),
        "relError": rel_error(&lhs, &rhs),
        "innerDim": gh.shape().n,
    });
    Ok(to_canonical_string(&report))
}
