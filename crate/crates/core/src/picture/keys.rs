//! Byte-string keys for diagrams and diagram classes.

use super::{Diagram, End, WireId};
use crate::coeff::GroupElement;
use crate::presentation::Direction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KeyMode {
    /// Equal iff the diagrams are equivalent.
    Exact,
    /// Equal iff the diagrams differ by a permutation of the bottom ports.
    Class,
}

fn varint(out: &mut Vec<u8>, mut v: usize) {
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

fn element(out: &mut Vec<u8>, g: &GroupElement) {
    match g {
        GroupElement::Unit => out.push(0),
        GroupElement::Residue { value, .. } => {
            out.push(1);
            varint(out, *value as usize);
        }
        GroupElement::Free(w) => {
            out.push(2);
            varint(out, w.len());
            for l in w {
                varint(out, 2 * l.generator as usize + l.inverse as usize);
            }
        }
    }
}

fn encode(d: &Diagram, mode: KeyMode, marked: Option<WireId>) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 * d.wires.len() + 8 * d.transistors.len());
    out.push(match (mode, d.annular) {
        (KeyMode::Exact, true) => 1,
        _ => 0,
    });
    varint(&mut out, d.top_ports.len());
    varint(&mut out, d.bottom_ports.len());
    varint(&mut out, d.transistors.len());
    for t in &d.transistors {
        varint(&mut out, t.relation);
        out.push(match t.dir {
            Direction::Positive => 0,
            Direction::Negative => 1,
        });
    }
    varint(&mut out, d.wires.len());
    for (id, w) in d.wires.iter().enumerate() {
        varint(&mut out, w.label.index());
        if marked == Some(id) {
            out.push(0xff);
        } else {
            element(&mut out, &w.coeff);
        }
        match w.top {
            End::Frame(i) => {
                out.push(0);
                varint(&mut out, i);
            }
            End::Transistor(t, i) => {
                out.push(1);
                varint(&mut out, t);
                varint(&mut out, i);
            }
        }
        match (w.bottom, mode) {
            (End::Frame(_), KeyMode::Class) => out.push(2),
            (End::Frame(i), KeyMode::Exact) => {
                out.push(0);
                varint(&mut out, i);
            }
            (End::Transistor(t, i), _) => {
                out.push(1);
                varint(&mut out, t);
                varint(&mut out, i);
            }
        }
    }
    out
}

/// Deterministic serialization of the canonical traversal. The class mode
/// forgets the order of the bottom ports and the annular flag.
pub fn canonical_key(d: &Diagram, mode: KeyMode) -> Vec<u8> {
    encode(d, mode, None)
}

/// Class key with one wire marked and its coefficient forgotten. Two diagrams
/// share this key iff they lie in the same class after changing the marked
/// wire's coefficient.
pub fn marked_class_key(d: &Diagram, wire: WireId) -> Vec<u8> {
    encode(d, KeyMode::Class, Some(wire))
}
