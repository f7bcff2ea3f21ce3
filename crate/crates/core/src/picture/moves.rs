//! Unitary moves on the bottom boundary, class balls and enumeration.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::geometry::{is_annular, is_planar};
use super::keys::{canonical_key, KeyMode};
use super::{Context, Diagram, DiagramError, End, Transistor, Wire};
use crate::coeff::GroupElement;
use crate::presentation::{Direction, Letter, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Geometry {
    Braided,
    Annular,
    Planar,
}

impl Geometry {
    pub fn admits(self, d: &Diagram) -> bool {
        match self {
            Geometry::Braided => true,
            Geometry::Annular => is_annular(d),
            Geometry::Planar => is_planar(d),
        }
    }
}

impl FromStr for Geometry {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "braided" => Ok(Geometry::Braided),
            "annular" => Ok(Geometry::Annular),
            "planar" => Ok(Geometry::Planar),
            other => Err(format!("unknown geometry `{other}`")),
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Geometry::Braided => "braided",
            Geometry::Annular => "annular",
            Geometry::Planar => "planar",
        })
    }
}

/// A new transistor hung under the bottom wires at `positions` (in order).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Placement {
    pub positions: Vec<usize>,
    pub relation: usize,
    pub dir: Direction,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MoveKind {
    Transistor(Placement),
    /// The coefficient of the wire at bottom `position` is multiplied by `delta`.
    Linear { position: usize, letter: Letter, delta: GroupElement },
}

#[derive(Clone, Debug)]
pub struct Move {
    pub kind: MoveKind,
    /// The reduced result of the move.
    pub result: Diagram,
}

fn tuples(bottom: &[Letter], side: &[Letter], acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if acc.len() == side.len() {
        out.push(acc.clone());
        return;
    }
    let want = side[acc.len()];
    for (i, &l) in bottom.iter().enumerate() {
        if l == want && !acc.contains(&i) {
            acc.push(i);
            tuples(bottom, side, acc, out);
            acc.pop();
        }
    }
}

/// Ways to hang one transistor under the bottom boundary. Braided placements
/// use any ordered tuple of distinct wires, annular ones cyclic runs, planar
/// ones runs.
pub fn placements(d: &Diagram, geom: Geometry) -> Vec<Placement> {
    let bottom = d.bottom_word();
    let n = bottom.len();
    let pres = d.pres();
    let mut out = Vec::new();
    for rel in 0..pres.relations().len() {
        for dir in [Direction::Positive, Direction::Negative] {
            let side = pres.top_side(rel, dir);
            let k = side.len();
            if k > n {
                continue;
            }
            let mut found = Vec::new();
            match geom {
                Geometry::Planar => {
                    for s in 0..=n - k {
                        if bottom[s..s + k] == side[..] {
                            found.push((s..s + k).collect());
                        }
                    }
                }
                Geometry::Annular => {
                    for s in 0..n {
                        let pos: Vec<usize> = (0..k).map(|j| (s + j) % n).collect();
                        if pos.iter().zip(side.iter()).all(|(&p, &l)| bottom[p] == l) {
                            found.push(pos);
                        }
                    }
                }
                Geometry::Braided => tuples(&bottom, side, &mut Vec::new(), &mut found),
            }
            out.extend(found.into_iter().map(|positions| Placement { positions, relation: rel, dir }));
        }
    }
    out
}

/// Hangs the transistor and reduces.
pub fn apply_placement(d: &Diagram, p: &Placement) -> Result<Diagram, DiagramError> {
    Ok(hang(d, p)?.reduce())
}

/// Hangs the transistor without reducing. Runs keep their place; a run that
/// wraps around the basepoint is first rotated to the front.
pub fn hang(d: &Diagram, p: &Placement) -> Result<Diagram, DiagramError> {
    let pres = d.pres();
    if p.relation >= pres.relations().len() {
        return Err(DiagramError::InvalidRelation(p.relation));
    }
    let side = pres.top_side(p.relation, p.dir);
    let n = d.bottom_ports.len();
    if side.len() != p.positions.len()
        || p.positions.iter().zip(side.iter()).any(|(&i, &l)| i >= n || d.wires[d.bottom_ports[i]].label != l)
    {
        return Err(DiagramError::BadPlacement);
    }
    let mut r = d.clone();
    let t = r.transistors.len();
    let upper: Vec<usize> = p.positions.iter().map(|&i| d.bottom_ports[i]).collect();
    for (j, &w) in upper.iter().enumerate() {
        r.wires[w].bottom = End::Transistor(t, j);
    }
    let mut lower = Vec::new();
    for &l in pres.bottom_side(p.relation, p.dir) {
        r.wires.push(Wire { label: l, coeff: r.ctx.coeffs.identity(l), top: End::Transistor(t, lower.len()), bottom: End::Frame(0) });
        lower.push(r.wires.len() - 1);
    }
    r.transistors.push(Transistor { relation: p.relation, dir: p.dir, top: upper.clone(), bottom: lower.clone() });

    let run = p.positions.windows(2).all(|w| w[1] == w[0] + 1);
    let mut ports = d.bottom_ports.clone();
    if run {
        let s = p.positions[0];
        ports.splice(s..s + upper.len(), lower.iter().copied());
    } else if p.positions.windows(2).all(|w| w[1] == (w[0] + 1) % n) {
        ports.rotate_left(p.positions[0]);
        ports.splice(0..upper.len(), lower.iter().copied());
    } else {
        let first = p.positions[0];
        let before = (0..first).filter(|i| !p.positions.contains(i)).count();
        ports.retain(|w| !upper.contains(w));
        ports.splice(before..before, lower.iter().copied());
    }
    for (i, &w) in ports.iter().enumerate() {
        r.wires[w].bottom = End::Frame(i);
    }
    r.bottom_ports = ports;
    Ok(r.canonical())
}

/// Coefficient changes on single bottom wires (finite groups only).
pub fn linear_moves(d: &Diagram) -> Result<Vec<Move>, DiagramError> {
    let mut out = Vec::new();
    for (i, &w) in d.bottom_ports.iter().enumerate() {
        let letter = d.wires[w].label;
        let elements = d.coeffs().spec(letter).elements().ok_or(DiagramError::InfiniteCoefficients)?;
        for g in elements.into_iter().filter(|g| !g.is_identity()) {
            let result = d.twist_bottom(i, &g)?;
            out.push(Move { kind: MoveKind::Linear { position: i, letter, delta: g }, result });
        }
    }
    Ok(out)
}

/// Every unitary move from `d` within the geometry, results reduced. The
/// same class may appear several times.
pub fn unitary_moves(d: &Diagram, geom: Geometry) -> Result<Vec<Move>, DiagramError> {
    let mut out = Vec::new();
    for p in placements(d, geom) {
        let result = apply_placement(d, &p)?;
        out.push(Move { kind: MoveKind::Transistor(p), result });
    }
    out.extend(linear_moves(d)?);
    Ok(out)
}

/// Breadth-first search over classes. Returns `(class key, representative,
/// distance)` in BFS order, each layer sorted by key.
pub fn class_ball(base: &Diagram, geom: Geometry, radius: usize) -> Result<Vec<(Vec<u8>, Diagram, usize)>, DiagramError> {
    let base = base.reduce();
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    let k0 = canonical_key(&base, KeyMode::Class);
    seen.insert(k0.clone());
    let mut out = vec![(k0, base, 0)];
    let mut layer_start = 0;
    for dist in 1..=radius {
        let frontier: Vec<&Diagram> = out[layer_start..].iter().map(|e| &e.1).collect();
        let expanded: Vec<Vec<Move>> =
            frontier.par_iter().map(|d| unitary_moves(d, geom)).collect::<Result<_, _>>()?;
        let mut next: BTreeMap<Vec<u8>, Diagram> = BTreeMap::new();
        for m in expanded.into_iter().flatten() {
            let k = canonical_key(&m.result, KeyMode::Class);
            if !seen.contains(&k) {
                next.entry(k).or_insert(m.result);
            }
        }
        layer_start = out.len();
        if next.is_empty() {
            break;
        }
        for (k, d) in next {
            seen.insert(k.clone());
            out.push((k, d, dist));
        }
    }
    Ok(out)
}

fn bijections(from: &[Letter], to: &[Letter], acc: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
    let i = acc.len();
    if i == from.len() {
        out.push(acc.clone());
        return;
    }
    for j in 0..to.len() {
        if !used[j] && to[j] == from[i] {
            used[j] = true;
            acc.push(j);
            bijections(from, to, acc, used, out);
            acc.pop();
            used[j] = false;
        }
    }
}

/// Letter-preserving reorderings taking `from` to `to`, allowed by the geometry.
pub(crate) fn arrangements(from: &[Letter], to: &[Letter], geom: Geometry) -> Vec<Vec<usize>> {
    let n = from.len();
    if to.len() != n {
        return Vec::new();
    }
    match geom {
        Geometry::Planar => {
            if from == to {
                vec![(0..n).collect()]
            } else {
                Vec::new()
            }
        }
        Geometry::Annular => (0..n)
            .filter(|&r| (0..n).all(|i| to[(i + n - r) % n] == from[i]))
            .map(|r| (0..n).map(|i| (i + n - r) % n).collect())
            .collect(),
        Geometry::Braided => {
            let mut out = Vec::new();
            bijections(from, to, &mut Vec::new(), &mut vec![false; n], &mut out);
            out
        }
    }
}

/// All reduced `(w,w)`-diagrams of length at most `budget` in the geometry,
/// sorted by length and exact key.
pub fn enumerate_reduced(ctx: &Context, w: &Word, budget: usize, geom: Geometry) -> Result<Vec<Diagram>, DiagramError> {
    if !ctx.coeffs().all_finite() {
        return Err(DiagramError::InfiniteCoefficients);
    }
    let base = ctx.eps_word(w)?;
    let ball = class_ball(&base, geom, budget)?;
    let mut found: BTreeMap<(usize, Vec<u8>), Diagram> = BTreeMap::new();
    for (_, rep, dist) in &ball {
        for perm in arrangements(&rep.bottom_word(), w, geom) {
            let d = rep.permute_bottom(&perm)?;
            if geom.admits(&d) {
                found.entry((*dist, canonical_key(&d, KeyMode::Exact))).or_insert(d);
            }
        }
    }
    Ok(found.into_values().collect())
}
