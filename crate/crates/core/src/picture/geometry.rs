//! Planar / annular / braided classification and the unitary kinds.

use super::{Diagram, End, TransistorId, WireId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GeometryClass {
    Planar,
    AnnularNotPlanar,
    BraidedOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DiagramKind {
    Permutation,
    Transistor,
    Linear,
    General,
}

/// Position at which `block` sits in `seq` as a run of consecutive entries,
/// read cyclically when `cyclic` is set.
fn run_start(seq: &[WireId], block: &[WireId], cyclic: bool) -> Option<usize> {
    let n = seq.len();
    if block.len() > n {
        return None;
    }
    let start = seq.iter().position(|&w| w == block[0])?;
    for (j, &w) in block.iter().enumerate() {
        let p = start + j;
        let p = if cyclic { p % n } else { p };
        if seq.get(p) != Some(&w) {
            return None;
        }
    }
    Some(start)
}

/// Replaces the run of `len` entries starting at `start` by `with`.
fn fire(seq: &mut Vec<WireId>, start: usize, len: usize, with: &[WireId], cyclic: bool) {
    if cyclic && start + len > seq.len() {
        seq.rotate_left(start);
        seq.splice(0..len, with.iter().copied());
    } else {
        seq.splice(start..start + len, with.iter().copied());
    }
}

/// Moves the boundary down through the diagram, firing any transistor whose
/// top wires form a run of the current boundary. Returns the final boundary
/// when every transistor fired.
pub(crate) fn sweep(d: &Diagram, cyclic: bool) -> Option<Vec<WireId>> {
    let mut seq = d.top_ports.clone();
    let mut fired = vec![false; d.transistors.len()];
    let mut remaining = d.transistors.len();
    let mut progress = true;
    while remaining > 0 && progress {
        progress = false;
        for t in 0..d.transistors.len() {
            if fired[t] {
                continue;
            }
            let tr = &d.transistors[t];
            if let Some(start) = run_start(&seq, &tr.top, cyclic) {
                fire(&mut seq, start, tr.top.len(), &tr.bottom, cyclic);
                fired[t] = true;
                remaining -= 1;
                progress = true;
            }
        }
    }
    (remaining == 0).then_some(seq)
}

fn is_rotation(a: &[WireId], b: &[WireId]) -> bool {
    a.len() == b.len() && (a.is_empty() || (0..a.len()).any(|r| a.iter().cycle().skip(r).take(a.len()).eq(b.iter())))
}

pub fn is_planar(d: &Diagram) -> bool {
    sweep(d, false).is_some_and(|s| s == d.bottom_ports)
}

pub fn is_annular(d: &Diagram) -> bool {
    sweep(d, true).is_some_and(|s| is_rotation(&s, &d.bottom_ports))
}

pub fn classify_geometry(d: &Diagram) -> GeometryClass {
    if is_planar(d) {
        GeometryClass::Planar
    } else if is_annular(d) {
        GeometryClass::AnnularNotPlanar
    } else {
        GeometryClass::BraidedOnly
    }
}

pub fn classify_kind(d: &Diagram) -> DiagramKind {
    let nontrivial = d.nontrivial_wires();
    match (d.transistors.len(), nontrivial) {
        (0, 0) => DiagramKind::Permutation,
        (1, 0) if is_planar(d) => DiagramKind::Transistor,
        (0, 1) if d.top_ports == d.bottom_ports => DiagramKind::Linear,
        _ => DiagramKind::General,
    }
}

/// Transistors whose top wires all hang from the top frame.
pub(crate) fn topmost(d: &Diagram) -> Vec<TransistorId> {
    (0..d.transistors.len())
        .filter(|&t| d.transistors[t].top.iter().all(|&w| matches!(d.wires[w].top, End::Frame(_))))
        .collect()
}


#[cfg(test)]
mod tests {
    use super::super::tests::{thompson, thompson_cyclic};
    use super::super::*;
    use super::*;
    use crate::coeff::GroupElement;
    use crate::presentation::{Direction, Letter};

    const X: Letter = Letter(0);

    #[test]
    fn simple_geometries() {
        let ctx = thompson();
        let e = ctx.eps_word(&[X, X, X]).unwrap();
        assert_eq!(classify_geometry(&e), GeometryClass::Planar);
        let t = ctx.atom_transistor(&[], 0, Direction::Positive, &[]).unwrap();
        assert_eq!(classify_geometry(&t), GeometryClass::Planar);
        let rot = ctx.atom_permutation(&[X, X, X], &[1, 2, 0]).unwrap();
        assert_eq!(classify_geometry(&rot), GeometryClass::AnnularNotPlanar);
        let swap = ctx.atom_permutation(&[X, X, X], &[1, 0, 2]).unwrap();
        assert_eq!(classify_geometry(&swap), GeometryClass::BraidedOnly);
        for d in [&e, &t, &rot, &swap] {
            assert_eq!(oracle::embeds(d, false), is_planar(d));
            assert_eq!(oracle::embeds(d, true), is_annular(d));
        }
    }

    #[test]
    fn twisted_expansion_is_annular() {
        let ctx = thompson();
        let t = ctx.atom_transistor(&[], 0, Direction::Positive, &[]).unwrap();
        let swap = ctx.atom_permutation(&[X, X], &[1, 0]).unwrap();
        let d = concat(&concat(&t, &swap).unwrap(), &invert(&t)).unwrap();
        assert_eq!(classify_geometry(&d), GeometryClass::AnnularNotPlanar);
    }

    #[test]
    fn kinds() {
        let ctx = thompson_cyclic(2);
        let w = [X, X];
        assert_eq!(classify_kind(&ctx.atom_permutation(&w, &[1, 0]).unwrap()), DiagramKind::Permutation);
        let t = ctx.atom_transistor(&[X], 0, Direction::Negative, &[]).unwrap();
        assert_eq!(classify_kind(&ctx.atom_transistor(&[X], 0, Direction::Positive, &[]).unwrap()), DiagramKind::Transistor);
        let g = GroupElement::Residue { modulus: 2, value: 1 };
        assert_eq!(classify_kind(&ctx.atom_linear(&w, 1, g).unwrap()), DiagramKind::Linear);
        let tt = concat(&ctx.atom_transistor(&[], 0, Direction::Positive, &[]).unwrap(), &ctx.atom_transistor(&[], 0, Direction::Positive, &[X]).unwrap()).unwrap();
        assert_eq!(classify_kind(&tt), DiagramKind::General);
        assert_eq!(classify_kind(&t), DiagramKind::Transistor);
    }
}
