//! Embedding diagram groups into the picture group over `<x | x=x²>` with
//! free coefficients, and the projection that forgets those coefficients.
//!
//! Relation `i` of the source presentation becomes the free generator
//! `R{i+1}`; a transistor labelled by it is replaced by a block, a ladder
//! collapsing its top wires onto one labelled wire and a ladder fanning that
//! wire out to its bottom length.

use thiserror::Error;

use crate::coeff::GroupSpec;
use crate::picture::{concat, diagram_length, factorize, length, reduce, sum, Context, Diagram, DiagramError};
use crate::presentation::{builtin_presentation, Direction, Letter, SemigroupPresentation};
use crate::thompson::{diagram_to_tree_pair, Membership, ThompsonError, TreePair};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EmbedError {
    #[error("source diagram has nontrivial coefficients")]
    NontrivialCoefficients,
    #[error("ladder sizes must be at least 1")]
    EmptySide,
    #[error("not a diagram over <x | x=x.x>: {0}")]
    WrongTarget(String),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Thompson(#[from] ThompsonError),
}

const X: Letter = Letter(0);

/// `<x | x=x²>` with the free group on `R1..Rκ` on the letter `x`.
pub fn target_context(kappa: usize) -> Context {
    let (p, _) = builtin_presentation("thompson", &[]).expect("builtin");
    let coeffs = crate::coeff::CoefficientSystem::uniform(&p, GroupSpec::free_rank(kappa));
    Context::new(p, coeffs)
}

/// The planar `(x, x^{n+1})`-ladder: each step hangs a positive transistor
/// under the leftmost bottom wire.
pub fn gamma_in(ctx: &Context, n: usize) -> Result<Diagram, EmbedError> {
    let mut d = ctx.eps_word(&[X])?;
    for i in 0..n {
        d = concat(&d, &ctx.atom_transistor(&[], 0, Direction::Positive, &vec![X; i])?)?;
    }
    Ok(d)
}

/// [`gamma_in`] without coefficients.
pub fn gamma(n: usize) -> Diagram {
    gamma_in(&target_context(0), n).expect("ladders are well formed")
}

/// `ε(x^left) + ladder(top−1)⁻¹ · ε(x, R^{±1}) · ladder(bottom−1) + ε(x^right)`.
pub fn make_block(
    ctx: &Context,
    left: usize,
    top: usize,
    rel: usize,
    dir: Direction,
    bottom: usize,
    right: usize,
) -> Result<Diagram, EmbedError> {
    if top == 0 || bottom == 0 {
        return Err(EmbedError::EmptySide);
    }
    let spec = ctx.coeffs().spec(X);
    let label = spec.free_generator(rel, dir == Direction::Negative).map_err(DiagramError::from)?;
    let collapse = crate::picture::invert(&gamma_in(ctx, top - 1)?);
    let wire = ctx.atom_linear(&[X], 0, label)?;
    let fan = gamma_in(ctx, bottom - 1)?;
    let mut core = concat(&concat(&collapse, &wire)?, &fan)?;
    if left > 0 {
        core = sum(&ctx.eps_word(&vec![X; left])?, &core)?;
    }
    if right > 0 {
        core = sum(&core, &ctx.eps_word(&vec![X; right])?)?;
    }
    Ok(core)
}

/// Image of a diagram with trivial coefficients, reduced.
pub fn psi(d: &Diagram) -> Result<Diagram, EmbedError> {
    if !d.all_coefficients_trivial() {
        return Err(EmbedError::NontrivialCoefficients);
    }
    let pres = d.pres();
    let ctx = target_context(pres.relations().len());
    let d = reduce(d);
    let f = factorize(&d)?;
    let to_x = |p: &Diagram| p.relabelled(&ctx, |_| X, |r, dir| (r, dir));
    let mut img = to_x(&f.lead);
    for (u, p) in &f.steps {
        let tr = &u.transistors()[0];
        let top = pres.top_side(tr.relation, tr.dir).len();
        let bottom = pres.bottom_side(tr.relation, tr.dir).len();
        let crate::picture::End::Frame(left) = u.wires()[tr.top[0]].top else { unreachable!("factor hangs from the frame") };
        let right = u.top_ports().len() - left - top;
        img = concat(&img, &make_block(&ctx, left, top, tr.relation, tr.dir, bottom, right)?)?;
        img = concat(&img, &to_x(p))?;
    }
    Ok(reduce(&img).with_annular(d.is_annular()))
}

fn check_target(d: &Diagram) -> Result<(), EmbedError> {
    let (thompson, _) = builtin_presentation("thompson", &[]).expect("builtin");
    if *d.pres() != thompson {
        return Err(EmbedError::WrongTarget(d.pres().to_string()));
    }
    Ok(())
}

/// Kills every coefficient, reduces, and reads off the tree pair.
pub fn project_to_thompson(d: &Diagram) -> Result<(TreePair, Membership), EmbedError> {
    check_target(d)?;
    let plain = reduce(&d.with_trivial_coefficients(&d.context().forget_coefficients())?);
    let tp = diagram_to_tree_pair(&plain)?;
    let m = tp.membership();
    Ok((tp, m))
}

/// `max(|lhs| + |rhs| − 1)`, the largest block length.
pub fn block_constant(p: &SemigroupPresentation) -> usize {
    p.relations().iter().map(|r| r.lhs.len() + r.rhs.len() - 1).max().unwrap_or(1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LengthReport {
    pub len: usize,
    pub len_psi: usize,
    pub lower_ok: bool,
    pub upper_constant: usize,
    pub upper_ok: bool,
    /// Whether `max side length + 1` would also bound the ratio. Reported only.
    pub side_plus_one_ok: bool,
}

pub fn check_length_bounds(d: &Diagram) -> Result<LengthReport, EmbedError> {
    let len = length(d);
    let len_psi = diagram_length(&psi(d)?);
    let c = block_constant(d.pres());
    let k1 = d.pres().max_side_len() + 1;
    Ok(LengthReport {
        len,
        len_psi,
        lower_ok: len_psi >= len,
        upper_constant: c,
        upper_ok: len_psi <= c * len,
        side_plus_one_ok: len_psi <= k1 * len,
    })
}
