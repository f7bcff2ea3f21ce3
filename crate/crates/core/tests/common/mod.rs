//! Brute-force oracles shared by the integration and acceptance targets.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet, VecDeque};

use picturecalc_core::coeff::{coeff_multiply, GraphProduct, GraphProductWord, GroupSpec, Syllable};
use picturecalc_core::picture::{canonical_key, Diagram, KeyMode};

pub fn key(d: &Diagram) -> Vec<u8> {
    canonical_key(d, KeyMode::Exact)
}

/// Normal forms reachable by cancelling dipoles in every possible order.
pub fn all_normal_forms(d: &Diagram, out: &mut BTreeSet<Vec<u8>>) {
    let dipoles = d.dipoles();
    if dipoles.is_empty() {
        out.insert(key(d));
        return;
    }
    for dip in dipoles {
        all_normal_forms(&d.reduce_dipole(dip).unwrap(), out);
    }
}

/// Square 0-1-2-3-0 with `cyclic(2)` on the even vertices and `free(1)` on the odd ones.
pub fn square_graph_product() -> GraphProduct {
    let c2 = GroupSpec::Cyclic(2);
    let f1 = GroupSpec::Free(vec!["c".into()]);
    GraphProduct::new(vec![c2.clone(), f1.clone(), c2, f1], &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap()
}

/// Nontrivial generators of each vertex group, one syllable each.
pub fn letters(gp: &GraphProduct) -> Vec<Syllable> {
    let mut out = Vec::new();
    for v in 0..gp.vertex_count() {
        match gp.spec(v) {
            GroupSpec::Trivial => {}
            GroupSpec::Cyclic(k) => {
                for value in 1..*k {
                    out.push(Syllable { vertex: v, element: picturecalc_core::coeff::GroupElement::Residue { modulus: *k, value } });
                }
            }
            spec @ GroupSpec::Free(g) => {
                for i in 0..g.len() {
                    for inverse in [false, true] {
                        out.push(Syllable { vertex: v, element: spec.free_generator(i, inverse).unwrap() });
                    }
                }
            }
        }
    }
    out
}

/// Every word with at most `max` syllables drawn from `alphabet`.
pub fn all_words(alphabet: &[Syllable], max: usize) -> Vec<GraphProductWord> {
    let mut out = vec![GraphProductWord::default()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max {
        let mut next = Vec::new();
        for w in &layer {
            for s in alphabet {
                let mut v: Vec<Syllable> = w.clone();
                v.push(s.clone());
                next.push(v);
            }
        }
        out.extend(next.iter().cloned().map(GraphProductWord::new));
        layer = next;
    }
    out
}

/// Closes `w` under merging equal-vertex neighbours and swapping commuting
/// neighbours, then returns the lexicographically least shortest word.
pub fn move_closure_normal_form(gp: &GraphProduct, w: &GraphProductWord) -> GraphProductWord {
    let start: Vec<Syllable> = w.syllables.iter().filter(|s| !s.element.is_identity()).cloned().collect();
    let mut seen: HashSet<Vec<Syllable>> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(word) = queue.pop_front() {
        for i in 0..word.len().saturating_sub(1) {
            let (a, b) = (&word[i], &word[i + 1]);
            let mut next = Vec::new();
            if a.vertex == b.vertex {
                let g = coeff_multiply(&a.element, &b.element).unwrap();
                let mut v = word[..i].to_vec();
                if !g.is_identity() {
                    v.push(Syllable { vertex: a.vertex, element: g });
                }
                v.extend_from_slice(&word[i + 2..]);
                next.push(v);
            } else if gp.commute(a.vertex, b.vertex) {
                let mut v = word.clone();
                v.swap(i, i + 1);
                next.push(v);
            }
            for v in next {
                if seen.insert(v.clone()) {
                    queue.push_back(v);
                }
            }
        }
    }
    let shortest = seen.iter().map(Vec::len).min().unwrap();
    let best = seen
        .into_iter()
        .filter(|v| v.len() == shortest)
        .min_by(|x, y| {
            let kx: Vec<_> = x.iter().map(|s| gp.syllable_key(s)).collect();
            let ky: Vec<_> = y.iter().map(|s| gp.syllable_key(s)).collect();
            kx.cmp(&ky)
        })
        .unwrap();
    GraphProductWord::new(best)
}
