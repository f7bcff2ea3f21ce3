//! Seeded random diagrams for property checks.

use rand::seq::SliceRandom;
use rand::Rng;

use super::moves::{arrangements, hang, placements, Geometry};
use super::{invert, multiply, Context, Diagram, DiagramError};
use crate::presentation::Letter;

fn random_twist<R: Rng + ?Sized>(rng: &mut R, d: &Diagram) -> Option<Diagram> {
    let n = d.bottom_ports().len();
    let i = rng.gen_range(0..n);
    let letter = d.wires()[d.bottom_ports()[i]].label;
    let spec = d.coeffs().spec(letter);
    if spec.order() == Some(1) {
        return None;
    }
    for _ in 0..8 {
        let g = spec.random_element(rng, 2);
        if !g.is_identity() {
            return d.twist_bottom(i, &g).ok();
        }
    }
    None
}

/// Random unitary steps from `base`, reducing after each step. Linear steps
/// are taken with probability `linear` where the letter's group is nontrivial.
pub fn random_walk<R: Rng + ?Sized>(rng: &mut R, base: &Diagram, geom: Geometry, steps: usize, linear: f64) -> Diagram {
    let mut d = base.reduce();
    for _ in 0..steps {
        if rng.gen_bool(linear) {
            if let Some(t) = random_twist(rng, &d) {
                d = t;
                continue;
            }
        }
        let options = placements(&d, geom);
        let Some(p) = options.choose(rng) else { break };
        d = hang(&d, p).expect("placement from the list").reduce();
    }
    d
}

/// A random reduced `(w,w)`-diagram in the geometry: two walks of equal step
/// count joined through a matching rearrangement of their bottom boundaries.
pub fn random_element<R: Rng + ?Sized>(
    rng: &mut R,
    ctx: &Context,
    w: &[Letter],
    geom: Geometry,
    steps: usize,
    linear: f64,
) -> Result<Diagram, DiagramError> {
    let base = ctx.eps_word(w)?;
    let mut steps = steps;
    loop {
        for _ in 0..64 {
            let a = random_walk(rng, &base, geom, steps, linear);
            let b = random_walk(rng, &base, geom, steps, linear);
            let options = arrangements(&a.bottom_word(), &b.bottom_word(), geom);
            if let Some(perm) = options.choose(rng) {
                return multiply(&a.permute_bottom(perm)?, &invert(&b));
            }
        }
        if steps == 0 {
            return Ok(base);
        }
        steps -= 1;
    }
}

/// A random unreduced diagram with `(w, *)` boundary built from up to
/// `transistors` hung transistors, with the occasional bottom twist.
pub fn random_unreduced<R: Rng + ?Sized>(
    rng: &mut R,
    ctx: &Context,
    w: &[Letter],
    geom: Geometry,
    transistors: usize,
    linear: f64,
) -> Result<Diagram, DiagramError> {
    let mut d = ctx.eps_word(w)?;
    while d.transistor_count() < transistors {
        if rng.gen_bool(linear) {
            if let Some(t) = random_twist(rng, &d) {
                d = t;
                continue;
            }
        }
        let options = placements(&d, geom);
        let Some(p) = options.choose(rng) else { break };
        d = hang(&d, p)?;
    }
    Ok(d)
}
