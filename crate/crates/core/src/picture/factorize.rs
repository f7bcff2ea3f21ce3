//! Splitting a reduced diagram into unitary factors separated by permutations.

use super::geometry::topmost;
use super::{concat, Diagram, DiagramError, End, WireId};

/// `lead · U₁ · P₁ · U₂ · P₂ ⋯ Uₙ · Pₙ`, each `Uᵢ` a transistor or linear
/// diagram and each `Pᵢ` (and `lead`) a permutation diagram.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub lead: Diagram,
    pub steps: Vec<(Diagram, Diagram)>,
}

impl Factorization {
    /// Concatenation of all factors.
    pub fn product(&self) -> Result<Diagram, DiagramError> {
        let mut acc = self.lead.clone();
        for (u, p) in &self.steps {
            acc = concat(&concat(&acc, u)?, p)?;
        }
        Ok(acc)
    }

    /// `lead · U₁ · P₁ ⋯ Uₖ`, the diagram after `k` unitary factors.
    pub fn prefix(&self, k: usize) -> Result<Diagram, DiagramError> {
        let mut acc = self.lead.clone();
        for (i, (u, p)) in self.steps.iter().take(k).enumerate() {
            acc = concat(&acc, u)?;
            if i + 1 < k {
                acc = concat(&acc, p)?;
            }
        }
        Ok(acc)
    }
}

fn absorb(f: &mut Factorization, perm: Diagram) -> Result<(), DiagramError> {
    match f.steps.last_mut() {
        Some((_, p)) => *p = concat(p, &perm)?,
        None => f.lead = concat(&f.lead, &perm)?,
    }
    Ok(())
}

/// Peels unitary factors off the top of a reduced diagram. Linear factors for
/// labelled top wires come first, then transistors whose top wires already
/// sit side by side at the top; otherwise a permutation gathers the top wires
/// of some topmost transistor.
pub fn factorize(d: &Diagram) -> Result<Factorization, DiagramError> {
    if !d.is_reduced() {
        return Err(DiagramError::NotReduced);
    }
    let ctx = d.ctx.clone();
    let mut rest = d.clone();
    let mut f = Factorization { lead: ctx.eps_word(&d.top_word())?, steps: Vec::new() };
    loop {
        let top = rest.top_word();
        if let Some(i) = rest.top_ports.iter().position(|&w| !rest.wires[w].coeff.is_identity()) {
            let w = rest.top_ports[i];
            let unit = ctx.coeffs.identity(rest.wires[w].label);
            let g = std::mem::replace(&mut rest.wires[w].coeff, unit);
            f.steps.push((ctx.atom_linear(&top, i, g)?, ctx.eps_word(&top)?));
            continue;
        }
        let heads = topmost(&rest);
        if heads.is_empty() {
            absorb(&mut f, rest)?;
            return Ok(f);
        }
        let in_place = heads.iter().copied().find(|&t| {
            let tr = &rest.transistors[t];
            let End::Frame(s) = rest.wires[tr.top[0]].top else { return false };
            tr.top.iter().enumerate().all(|(j, &w)| rest.wires[w].top == End::Frame(s + j))
        });
        match in_place {
            Some(t) => {
                let tr = rest.transistors[t].clone();
                let End::Frame(s) = rest.wires[tr.top[0]].top else { unreachable!() };
                let k = tr.top.len();
                let u = ctx.atom_transistor(&top[..s], tr.relation, tr.dir, &top[s + k..])?;
                let after = ctx.eps_word(&u.bottom_word())?;
                f.steps.push((u, after));
                rest = peel_transistor(&rest, t, s);
            }
            None => {
                let t = heads[0];
                let block = rest.transistors[t].top.clone();
                let mut order: Vec<WireId> = Vec::with_capacity(rest.top_ports.len());
                let first = rest.top_ports.iter().position(|w| block.contains(w)).expect("block on top");
                for (i, &w) in rest.top_ports.iter().enumerate() {
                    if i == first {
                        order.extend(block.iter().copied());
                    }
                    if !block.contains(&w) {
                        order.push(w);
                    }
                }
                // Wire at old top position i moves to position perm[i].
                let perm: Vec<usize> = rest
                    .top_ports
                    .iter()
                    .map(|w| order.iter().position(|x| x == w).expect("same wires"))
                    .collect();
                absorb(&mut f, ctx.atom_permutation(&top, &perm)?)?;
                for (p, &w) in order.iter().enumerate() {
                    rest.wires[w].top = End::Frame(p);
                }
                rest.top_ports = order;
                rest = rest.canonical();
            }
        }
    }
}

/// Removes transistor `t`, whose top wires occupy top ports `s..`, letting
/// its bottom wires hang from the frame.
fn peel_transistor(d: &Diagram, t: usize, s: usize) -> Diagram {
    let mut r = d.clone();
    let tr = r.transistors[t].clone();
    let mut ports: Vec<WireId> = r.top_ports[..s].to_vec();
    ports.extend(tr.bottom.iter().copied());
    ports.extend(r.top_ports[s + tr.top.len()..].iter().copied());
    for (p, &w) in ports.iter().enumerate() {
        r.wires[w].top = End::Frame(p);
    }
    r.top_ports = ports;
    r.transistors[t].top.clear();
    r.transistors[t].bottom.clear();
    r.canonical()
}

#[cfg(test)]
mod tests {
    use super::super::tests::{thompson, thompson_cyclic};
    use super::super::*;
    use crate::coeff::GroupElement;
    use crate::presentation::{Direction, Letter};

    const X: Letter = Letter(0);

    #[test]
    fn eps_has_no_factors() {
        let ctx = thompson();
        let e = ctx.eps_word(&[X, X]).unwrap();
        let f = factorize(&e).unwrap();
        assert!(f.steps.is_empty());
        assert_eq!(f.product().unwrap(), e);
    }

    #[test]
    fn refuses_unreduced() {
        let ctx = thompson();
        let t = ctx.atom_transistor(&[], 0, Direction::Positive, &[]).unwrap();
        let d = concat(&t, &invert(&t)).unwrap();
        assert!(matches!(factorize(&d), Err(DiagramError::NotReduced)));
    }

    #[test]
    fn twisted_and_labelled() {
        let ctx = thompson_cyclic(2);
        let g = GroupElement::Residue { modulus: 2, value: 1 };
        let t = ctx.atom_transistor(&[], 0, Direction::Positive, &[]).unwrap();
        let swap = ctx.atom_permutation(&[X, X], &[1, 0]).unwrap();
        let lin = ctx.atom_linear(&[X, X], 1, g).unwrap();
        let d = reduce(&concat(&concat(&concat(&t, &lin).unwrap(), &swap).unwrap(), &invert(&t)).unwrap());
        let f = factorize(&d).unwrap();
        assert_eq!(f.steps.len(), length(&d));
        assert_eq!(f.product().unwrap(), d);
        for (u, _) in &f.steps {
            assert_ne!(classify_kind(u), DiagramKind::General);
            assert_ne!(classify_kind(u), DiagramKind::Permutation);
        }
    }
}
