//! The ∘-product `ℳ_{N₁} × ℳ_{N₂} → ℳ_{N₁+N₂}`.

use crate::colligation::{Colligation, Shape};
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::Field;

/// Places `g` inside a larger colligation of shape `target`, where inner
/// coordinate `r` of each block lands at `shift + r`; identity elsewhere.
fn extend<F: Field>(g: &Colligation<F>, target: Shape, shift: usize) -> Mat<F> {
    let s = g.shape();
    let map = |i: usize| {
        if i < s.alpha {
            i
        } else {
            let (beta, r) = ((i - s.alpha) / s.n, (i - s.alpha) % s.n);
            target.offset(beta) + shift + r
        }
    };
    let mut out = Mat::identity(target.size());
    for r in 0..s.size() {
        for c in 0..s.size() {
            out[(map(r), map(c))] = g.matrix()[(r, c)].clone();
        }
    }
    out
}

/// `g ∘ h = g̃·ĥ`. Inside each large block the inner space of `g` comes first.
pub fn circ<F: Field>(g: &Colligation<F>, h: &Colligation<F>) -> Result<Colligation<F>> {
    let (sg, sh) = (g.shape(), h.shape());
    if sg.alpha != sh.alpha || sg.m != sh.m {
        return Err(Error::Shape(format!("cannot multiply {sg} by {sh}")));
    }
    let target = Shape::new(sg.alpha, sg.m, sg.n + sh.n)?;
    let gt = extend(g, target, 0);
    let hh = extend(h, target, sg.n);
    Ok(Colligation::new_unchecked(
        target,
        g.flavor().meet(h.flavor()),
        gt.matmul(&hh),
    ))
}

/// Left fold of [`circ`].
pub fn circ_chain<F: Field>(items: &[Colligation<F>]) -> Result<Colligation<F>> {
    let (first, rest) = items
        .split_first()
        .ok_or_else(|| Error::Precondition("empty product".into()))?;
    rest.iter().try_fold(first.clone(), |acc, x| circ(&acc, x))
}
