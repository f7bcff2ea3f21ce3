//! Diagrams over a semigroup presentation with group-labelled wires.
//!
//! A [`Diagram`] is stored in canonical numbering: wires and transistors are
//! numbered in the order a breadth-first walk from the top ports discovers
//! them. Every public constructor and operation returns canonical diagrams, so
//! structural equality is diagram equivalence.

mod factorize;
mod geometry;
mod json;
mod keys;
mod moves;
mod reduce;
pub mod sample;

use std::sync::Arc;

use thiserror::Error;

use crate::coeff::{coeff_invert, coeff_multiply, CoeffError, CoefficientSystem, GroupElement};
use crate::presentation::{Direction, Letter, SemigroupPresentation, Word};

pub use factorize::{factorize, Factorization};
pub use geometry::{classify_geometry, classify_kind, is_annular, is_planar, DiagramKind, GeometryClass};
pub use json::{diagram_from_json, diagram_to_json};
pub use keys::{canonical_key, marked_class_key, KeyMode};
pub use moves::{
    apply_placement, class_ball, enumerate_reduced, hang, linear_moves, placements, unitary_moves, Geometry, Move, MoveKind, Placement,
};
pub use reduce::Dipole;

pub type WireId = usize;
pub type TransistorId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    #[error("empty word")]
    EmptyWord,
    #[error("boundary mismatch: {0}")]
    BoundaryMismatch(String),
    #[error("diagrams live over different presentations or coefficient systems")]
    ContextMismatch,
    #[error("relation {0} does not exist")]
    InvalidRelation(usize),
    #[error("placement does not match the relation side")]
    BadPlacement,
    #[error("not a bijection on {0} positions")]
    NotBijective(usize),
    #[error("coefficient must be nontrivial")]
    TrivialCoefficient,
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error("coefficient not in the group of its letter")]
    ForeignCoefficient,
    #[error("sum is undefined for annular diagrams")]
    AnnularSum,
    #[error("diagram is not reduced")]
    NotReduced,
    #[error("free coefficient groups make the search infinite")]
    InfiniteCoefficients,
    #[error("malformed diagram: {0}")]
    Malformed(String),
}

/// Where one end of a wire is attached. The side of a transistor is implied by
/// which end of the wire is meant: the top end of a wire sits on a bottom side
/// (or the top frame), the bottom end on a top side (or the bottom frame).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum End {
    Frame(usize),
    Transistor(TransistorId, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Top,
    Bottom,
}

/// Explicit attachment site, as used in the file format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Attachment {
    FrameTop(usize),
    FrameBottom(usize),
    Transistor { id: TransistorId, side: Side, index: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Wire {
    pub label: Letter,
    pub coeff: GroupElement,
    pub top: End,
    pub bottom: End,
}

impl Wire {
    pub fn top_attachment(&self) -> Attachment {
        match self.top {
            End::Frame(i) => Attachment::FrameTop(i),
            End::Transistor(id, index) => Attachment::Transistor { id, side: Side::Bottom, index },
        }
    }

    pub fn bottom_attachment(&self) -> Attachment {
        match self.bottom {
            End::Frame(i) => Attachment::FrameBottom(i),
            End::Transistor(id, index) => Attachment::Transistor { id, side: Side::Top, index },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Transistor {
    pub relation: usize,
    pub dir: Direction,
    /// Wires hanging above the transistor, left to right.
    pub top: Vec<WireId>,
    /// Wires leaving below the transistor, left to right.
    pub bottom: Vec<WireId>,
}

/// Presentation plus coefficient system shared by a family of diagrams.
#[derive(Clone, Debug)]
pub struct Context {
    pres: Arc<SemigroupPresentation>,
    coeffs: Arc<CoefficientSystem>,
}

impl PartialEq for Context {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.pres, &other.pres) || self.pres == other.pres)
            && (Arc::ptr_eq(&self.coeffs, &other.coeffs) || self.coeffs == other.coeffs)
    }
}

impl Eq for Context {}

pub type LabelledWord = Vec<(Letter, GroupElement)>;

impl Context {
    pub fn new(pres: SemigroupPresentation, coeffs: CoefficientSystem) -> Self {
        Context { pres: Arc::new(pres), coeffs: Arc::new(coeffs) }
    }

    /// All coefficient groups trivial.
    pub fn plain(pres: SemigroupPresentation) -> Self {
        let coeffs = CoefficientSystem::trivial(&pres);
        Self::new(pres, coeffs)
    }

    pub fn from_arcs(pres: Arc<SemigroupPresentation>, coeffs: Arc<CoefficientSystem>) -> Self {
        Context { pres, coeffs }
    }

    pub fn pres(&self) -> &SemigroupPresentation {
        &self.pres
    }

    pub fn coeffs(&self) -> &CoefficientSystem {
        &self.coeffs
    }

    pub fn pres_arc(&self) -> &Arc<SemigroupPresentation> {
        &self.pres
    }

    /// Same presentation, all coefficients trivial.
    pub fn forget_coefficients(&self) -> Context {
        Context { pres: self.pres.clone(), coeffs: Arc::new(CoefficientSystem::trivial(&self.pres)) }
    }

    fn plain_word(&self, w: &[Letter]) -> LabelledWord {
        w.iter().map(|&l| (l, self.coeffs.identity(l))).collect()
    }

    fn check_letters(&self, w: &[Letter]) -> Result<(), DiagramError> {
        if w.iter().any(|l| l.index() >= self.pres.alphabet().len()) {
            return Err(DiagramError::Malformed("letter outside the alphabet".into()));
        }
        Ok(())
    }

    /// `n` parallel wires with the given labels.
    pub fn eps(&self, word: &[(Letter, GroupElement)]) -> Result<Diagram, DiagramError> {
        if word.is_empty() {
            return Err(DiagramError::EmptyWord);
        }
        self.check_letters(&word.iter().map(|p| p.0).collect::<Vec<_>>())?;
        for (l, g) in word {
            if !self.coeffs.spec(*l).contains(g) {
                return Err(DiagramError::ForeignCoefficient);
            }
        }
        let wires = word
            .iter()
            .enumerate()
            .map(|(i, (l, g))| Wire { label: *l, coeff: g.clone(), top: End::Frame(i), bottom: End::Frame(i) })
            .collect();
        let ports: Vec<WireId> = (0..word.len()).collect();
        Ok(Diagram {
            ctx: self.clone(),
            wires,
            transistors: Vec::new(),
            top_ports: ports.clone(),
            bottom_ports: ports,
            annular: false,
        })
    }

    /// `eps` with identity coefficients.
    pub fn eps_word(&self, w: &[Letter]) -> Result<Diagram, DiagramError> {
        self.eps(&self.plain_word(w))
    }

    /// The planar diagram `ε(a) + T + ε(b)` with `T` labelled by `rel` in direction `dir`.
    pub fn atom_transistor(
        &self,
        a: &[Letter],
        rel: usize,
        dir: Direction,
        b: &[Letter],
    ) -> Result<Diagram, DiagramError> {
        if rel >= self.pres.relations().len() {
            return Err(DiagramError::InvalidRelation(rel));
        }
        self.check_letters(a)?;
        self.check_letters(b)?;
        let top_side = self.pres.top_side(rel, dir).clone();
        let bottom_side = self.pres.bottom_side(rel, dir).clone();
        let mut wires = Vec::new();
        let mut top_ports = Vec::new();
        let mut bottom_ports = Vec::new();
        let mut t = Transistor { relation: rel, dir, top: Vec::new(), bottom: Vec::new() };
        let straight = |wires: &mut Vec<Wire>, l: Letter, top: usize, bottom: usize| {
            wires.push(Wire { label: l, coeff: self.coeffs.identity(l), top: End::Frame(top), bottom: End::Frame(bottom) });
            wires.len() - 1
        };
        for (i, &l) in a.iter().enumerate() {
            let w = straight(&mut wires, l, i, i);
            top_ports.push(w);
            bottom_ports.push(w);
        }
        for (j, &l) in top_side.iter().enumerate() {
            wires.push(Wire {
                label: l,
                coeff: self.coeffs.identity(l),
                top: End::Frame(a.len() + j),
                bottom: End::Transistor(0, j),
            });
            top_ports.push(wires.len() - 1);
            t.top.push(wires.len() - 1);
        }
        for (j, &l) in bottom_side.iter().enumerate() {
            wires.push(Wire {
                label: l,
                coeff: self.coeffs.identity(l),
                top: End::Transistor(0, j),
                bottom: End::Frame(a.len() + j),
            });
            bottom_ports.push(wires.len() - 1);
            t.bottom.push(wires.len() - 1);
        }
        for (i, &l) in b.iter().enumerate() {
            let w = straight(&mut wires, l, a.len() + top_side.len() + i, a.len() + bottom_side.len() + i);
            top_ports.push(w);
            bottom_ports.push(w);
        }
        Ok(Diagram { ctx: self.clone(), wires, transistors: vec![t], top_ports, bottom_ports, annular: false }
            .canonical())
    }

    /// Wire `i` runs from top port `i` to bottom port `perm[i]`.
    pub fn atom_permutation(&self, w: &[Letter], perm: &[usize]) -> Result<Diagram, DiagramError> {
        self.labelled_permutation(&self.plain_word(w), perm)
    }

    pub fn labelled_permutation(&self, word: &[(Letter, GroupElement)], perm: &[usize]) -> Result<Diagram, DiagramError> {
        let n = word.len();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(DiagramError::NotBijective(n));
        }
        let mut d = self.eps(word)?;
        for (i, &p) in perm.iter().enumerate() {
            d.wires[i].bottom = End::Frame(p);
            d.bottom_ports[p] = i;
        }
        Ok(d.canonical())
    }

    /// `eps(w)` with coefficient `g` on wire `i`.
    pub fn atom_linear(&self, w: &[Letter], i: usize, g: GroupElement) -> Result<Diagram, DiagramError> {
        if i >= w.len() {
            return Err(DiagramError::BoundaryMismatch(format!("position {i} outside word of length {}", w.len())));
        }
        if g.is_identity() {
            return Err(DiagramError::TrivialCoefficient);
        }
        let mut word = self.plain_word(w);
        word[i].1 = g;
        self.eps(&word)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagram {
    ctx: Context,
    wires: Vec<Wire>,
    transistors: Vec<Transistor>,
    top_ports: Vec<WireId>,
    bottom_ports: Vec<WireId>,
    annular: bool,
}

impl std::hash::Hash for Diagram {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        canonical_key(self, KeyMode::Exact).hash(state);
    }
}

/// Top and bottom boundary words, with and without coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Boundaries {
    pub top: LabelledWord,
    pub bottom: LabelledWord,
    pub top_word: Word,
    pub bottom_word: Word,
}

impl Diagram {
    pub fn context(&self) -> &Context {
        &self.ctx
    }

    pub fn pres(&self) -> &SemigroupPresentation {
        &self.ctx.pres
    }

    pub fn coeffs(&self) -> &CoefficientSystem {
        &self.ctx.coeffs
    }

    pub fn wires(&self) -> &[Wire] {
        &self.wires
    }

    pub fn transistors(&self) -> &[Transistor] {
        &self.transistors
    }

    pub fn top_ports(&self) -> &[WireId] {
        &self.top_ports
    }

    pub fn bottom_ports(&self) -> &[WireId] {
        &self.bottom_ports
    }

    pub fn is_annular(&self) -> bool {
        self.annular
    }

    pub fn with_annular(mut self, annular: bool) -> Self {
        self.annular = annular;
        self
    }

    pub fn transistor_count(&self) -> usize {
        self.transistors.len()
    }

    pub fn top_word(&self) -> Word {
        self.top_ports.iter().map(|&w| self.wires[w].label).collect()
    }

    pub fn bottom_word(&self) -> Word {
        self.bottom_ports.iter().map(|&w| self.wires[w].label).collect()
    }

    pub fn nontrivial_wires(&self) -> usize {
        self.wires.iter().filter(|w| !w.coeff.is_identity()).count()
    }

    pub fn all_coefficients_trivial(&self) -> bool {
        self.nontrivial_wires() == 0
    }

    /// Replaces the coefficient system; every coefficient becomes the identity.
    pub fn with_trivial_coefficients(&self, ctx: &Context) -> Result<Diagram, DiagramError> {
        if ctx.pres != self.ctx.pres && *ctx.pres != *self.ctx.pres {
            return Err(DiagramError::ContextMismatch);
        }
        let mut d = self.clone();
        d.ctx = ctx.clone();
        for w in &mut d.wires {
            w.coeff = ctx.coeffs.identity(w.label);
        }
        Ok(d)
    }

    /// Same combinatorics in a different context, relabelling letters and relations.
    pub(crate) fn relabelled(
        &self,
        ctx: &Context,
        letter: impl Fn(Letter) -> Letter,
        relation: impl Fn(usize, Direction) -> (usize, Direction),
    ) -> Diagram {
        let mut d = self.clone();
        d.ctx = ctx.clone();
        for w in &mut d.wires {
            w.label = letter(w.label);
            w.coeff = ctx.coeffs.identity(w.label);
        }
        for t in &mut d.transistors {
            let (r, dir) = relation(t.relation, t.dir);
            t.relation = r;
            t.dir = dir;
        }
        d.canonical()
    }

    /// Renumbers wires and transistors in traversal order, dropping anything
    /// unreachable from the frame.
    pub(crate) fn canonical(self) -> Diagram {
        let nw = self.wires.len();
        let nt = self.transistors.len();
        let mut wmap = vec![usize::MAX; nw];
        let mut tmap = vec![usize::MAX; nt];
        let mut worder: Vec<WireId> = Vec::with_capacity(nw);
        let mut torder: Vec<TransistorId> = Vec::with_capacity(nt);
        for &w in &self.top_ports {
            if wmap[w] == usize::MAX {
                wmap[w] = worder.len();
                worder.push(w);
            }
        }
        let mut head = 0;
        loop {
            while head < worder.len() {
                let w = worder[head];
                head += 1;
                for end in [self.wires[w].bottom, self.wires[w].top] {
                    if let End::Transistor(t, _) = end {
                        if tmap[t] == usize::MAX {
                            tmap[t] = torder.len();
                            torder.push(t);
                            let tr = &self.transistors[t];
                            for &x in tr.top.iter().chain(tr.bottom.iter()) {
                                if wmap[x] == usize::MAX {
                                    wmap[x] = worder.len();
                                    worder.push(x);
                                }
                            }
                        }
                    }
                }
            }
            // Unreachable material cannot occur in valid diagrams; bottom ports
            // are swept up anyway so malformed input stays total.
            match self.bottom_ports.iter().find(|&&w| wmap[w] == usize::MAX) {
                Some(&w) => {
                    wmap[w] = worder.len();
                    worder.push(w);
                }
                None => break,
            }
        }
        let remap_end = |e: End| match e {
            End::Frame(i) => End::Frame(i),
            End::Transistor(t, i) => End::Transistor(tmap[t], i),
        };
        let wires = worder
            .iter()
            .map(|&w| {
                let old = &self.wires[w];
                Wire { label: old.label, coeff: old.coeff.clone(), top: remap_end(old.top), bottom: remap_end(old.bottom) }
            })
            .collect();
        let transistors = torder
            .iter()
            .map(|&t| {
                let old = &self.transistors[t];
                Transistor {
                    relation: old.relation,
                    dir: old.dir,
                    top: old.top.iter().map(|&w| wmap[w]).collect(),
                    bottom: old.bottom.iter().map(|&w| wmap[w]).collect(),
                }
            })
            .collect();
        Diagram {
            ctx: self.ctx,
            wires,
            transistors,
            top_ports: self.top_ports.iter().map(|&w| wmap[w]).collect(),
            bottom_ports: self.bottom_ports.iter().map(|&w| wmap[w]).collect(),
            annular: self.annular,
        }
    }

    /// Reorders the bottom ports: the wire at bottom position `i` moves to
    /// position `perm[i]`. Equal to concatenation with a permutation diagram.
    pub fn permute_bottom(&self, perm: &[usize]) -> Result<Diagram, DiagramError> {
        let n = self.bottom_ports.len();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(DiagramError::NotBijective(n));
        }
        let mut d = self.clone();
        for (i, &p) in perm.iter().enumerate() {
            let w = self.bottom_ports[i];
            d.bottom_ports[p] = w;
            d.wires[w].bottom = End::Frame(p);
        }
        Ok(d)
    }

    /// Multiplies the coefficient of the wire at bottom port `i` by `g` on the right.
    pub fn twist_bottom(&self, i: usize, g: &GroupElement) -> Result<Diagram, DiagramError> {
        let w = *self
            .bottom_ports
            .get(i)
            .ok_or_else(|| DiagramError::BoundaryMismatch(format!("no bottom port {i}")))?;
        let mut d = self.clone();
        d.wires[w].coeff = coeff_multiply(&d.wires[w].coeff, g)?;
        Ok(d)
    }

    /// Checks every structural invariant of the model.
    pub fn validate(&self) -> Result<(), DiagramError> {
        let bad = |s: String| Err(DiagramError::Malformed(s));
        let pres = self.pres();
        if self.wires.is_empty() {
            return bad("no wires".into());
        }
        for (i, w) in self.wires.iter().enumerate() {
            if w.label.index() >= pres.alphabet().len() {
                return bad(format!("wire {i} has an unknown label"));
            }
            if !self.coeffs().spec(w.label).contains(&w.coeff) {
                return bad(format!("wire {i} carries a coefficient outside its group"));
            }
            match w.top {
                End::Frame(p) if self.top_ports.get(p) != Some(&i) => return bad(format!("wire {i} top port {p}")),
                End::Transistor(t, k) if self.transistors.get(t).and_then(|t| t.bottom.get(k)) != Some(&i) => {
                    return bad(format!("wire {i} top end"))
                }
                _ => {}
            }
            match w.bottom {
                End::Frame(p) if self.bottom_ports.get(p) != Some(&i) => {
                    return bad(format!("wire {i} bottom port {p}"))
                }
                End::Transistor(t, k) if self.transistors.get(t).and_then(|t| t.top.get(k)) != Some(&i) => {
                    return bad(format!("wire {i} bottom end"))
                }
                _ => {}
            }
        }
        for (p, &w) in self.top_ports.iter().enumerate() {
            if self.wires.get(w).map(|x| x.top) != Some(End::Frame(p)) {
                return bad(format!("top port {p}"));
            }
        }
        for (p, &w) in self.bottom_ports.iter().enumerate() {
            if self.wires.get(w).map(|x| x.bottom) != Some(End::Frame(p)) {
                return bad(format!("bottom port {p}"));
            }
        }
        for (id, t) in self.transistors.iter().enumerate() {
            if t.relation >= pres.relations().len() {
                return bad(format!("transistor {id} has unknown relation {}", t.relation));
            }
            let top: Word = t.top.iter().map(|&w| self.wires[w].label).collect();
            let bottom: Word = t.bottom.iter().map(|&w| self.wires[w].label).collect();
            if &top != pres.top_side(t.relation, t.dir) || &bottom != pres.bottom_side(t.relation, t.dir) {
                return bad(format!("transistor {id} labels do not spell its relation"));
            }
            for (k, &w) in t.top.iter().enumerate() {
                if self.wires[w].bottom != End::Transistor(id, k) {
                    return bad(format!("transistor {id} top {k}"));
                }
            }
            for (k, &w) in t.bottom.iter().enumerate() {
                if self.wires[w].top != End::Transistor(id, k) {
                    return bad(format!("transistor {id} bottom {k}"));
                }
            }
        }
        if self.topological_order().is_none() {
            return bad("transistor order has a cycle".into());
        }
        Ok(())
    }

    /// Transistors sorted so that every transistor comes after those above it.
    pub fn topological_order(&self) -> Option<Vec<TransistorId>> {
        let n = self.transistors.len();
        let mut pending: Vec<usize> = self
            .transistors
            .iter()
            .map(|t| t.top.iter().filter(|&&w| matches!(self.wires[w].top, End::Transistor(..))).count())
            .collect();
        let mut ready: Vec<TransistorId> = (0..n).filter(|&t| pending[t] == 0).collect();
        let mut out = Vec::with_capacity(n);
        while let Some(t) = ready.pop() {
            out.push(t);
            for &w in &self.transistors[t].bottom {
                if let End::Transistor(s, _) = self.wires[w].bottom {
                    pending[s] -= 1;
                    if pending[s] == 0 {
                        ready.push(s);
                    }
                }
            }
        }
        (out.len() == n).then_some(out)
    }
}

/// Reads the frame boundaries.
pub fn boundaries(d: &Diagram) -> Boundaries {
    let read = |ports: &[WireId]| -> LabelledWord {
        ports.iter().map(|&w| (d.wires[w].label, d.wires[w].coeff.clone())).collect()
    };
    Boundaries {
        top: read(&d.top_ports),
        bottom: read(&d.bottom_ports),
        top_word: d.top_word(),
        bottom_word: d.bottom_word(),
    }
}

/// Glues `d1` on top of `d2`; merged wires carry `g·h` with `g` from `d1`.
pub fn concat(d1: &Diagram, d2: &Diagram) -> Result<Diagram, DiagramError> {
    if d1.ctx != d2.ctx {
        return Err(DiagramError::ContextMismatch);
    }
    let (b1, t2) = (d1.bottom_word(), d2.top_word());
    if b1 != t2 {
        return Err(DiagramError::BoundaryMismatch(format!(
            "bottom {} vs top {}",
            d1.pres().format_word(&b1),
            d1.pres().format_word(&t2)
        )));
    }
    let wo = d1.wires.len();
    let to = d1.transistors.len();
    let shift = |e: End| match e {
        End::Frame(i) => End::Frame(i),
        End::Transistor(t, i) => End::Transistor(t + to, i),
    };
    let mut wires = d1.wires.clone();
    wires.extend(d2.wires.iter().map(|w| Wire { top: shift(w.top), bottom: shift(w.bottom), ..w.clone() }));
    let mut transistors = d1.transistors.clone();
    transistors.extend(d2.transistors.iter().map(|t| Transistor {
        relation: t.relation,
        dir: t.dir,
        top: t.top.iter().map(|w| w + wo).collect(),
        bottom: t.bottom.iter().map(|w| w + wo).collect(),
    }));
    let mut bottom_ports: Vec<WireId> = d2.bottom_ports.iter().map(|w| w + wo).collect();
    for (i, &upper) in d1.bottom_ports.iter().enumerate() {
        let lower = d2.top_ports[i] + wo;
        let end = wires[lower].bottom;
        wires[upper].coeff = coeff_multiply(&wires[upper].coeff, &wires[lower].coeff)?;
        wires[upper].bottom = end;
        match end {
            End::Frame(p) => bottom_ports[p] = upper,
            End::Transistor(t, k) => transistors[t].top[k] = upper,
        }
    }
    Ok(Diagram {
        ctx: d1.ctx.clone(),
        wires,
        transistors,
        top_ports: d1.top_ports.clone(),
        bottom_ports,
        annular: d1.annular || d2.annular,
    }
    .canonical())
}

/// Places `d2` to the right of `d1`.
pub fn sum(d1: &Diagram, d2: &Diagram) -> Result<Diagram, DiagramError> {
    if d1.ctx != d2.ctx {
        return Err(DiagramError::ContextMismatch);
    }
    if d1.annular || d2.annular {
        return Err(DiagramError::AnnularSum);
    }
    let wo = d1.wires.len();
    let to = d1.transistors.len();
    let (nt, nb) = (d1.top_ports.len(), d1.bottom_ports.len());
    let mut wires = d1.wires.clone();
    wires.extend(d2.wires.iter().map(|w| Wire {
        top: match w.top {
            End::Frame(i) => End::Frame(i + nt),
            End::Transistor(t, i) => End::Transistor(t + to, i),
        },
        bottom: match w.bottom {
            End::Frame(i) => End::Frame(i + nb),
            End::Transistor(t, i) => End::Transistor(t + to, i),
        },
        ..w.clone()
    }));
    let mut transistors = d1.transistors.clone();
    transistors.extend(d2.transistors.iter().map(|t| Transistor {
        relation: t.relation,
        dir: t.dir,
        top: t.top.iter().map(|w| w + wo).collect(),
        bottom: t.bottom.iter().map(|w| w + wo).collect(),
    }));
    let mut top_ports = d1.top_ports.clone();
    top_ports.extend(d2.top_ports.iter().map(|w| w + wo));
    let mut bottom_ports = d1.bottom_ports.clone();
    bottom_ports.extend(d2.bottom_ports.iter().map(|w| w + wo));
    Ok(Diagram { ctx: d1.ctx.clone(), wires, transistors, top_ports, bottom_ports, annular: false }.canonical())
}

/// Vertical mirror image with inverted coefficients.
pub fn invert(d: &Diagram) -> Diagram {
    let wires = d
        .wires
        .iter()
        .map(|w| Wire { label: w.label, coeff: coeff_invert(&w.coeff), top: w.bottom, bottom: w.top })
        .collect();
    let transistors = d
        .transistors
        .iter()
        .map(|t| Transistor { relation: t.relation, dir: t.dir.flip(), top: t.bottom.clone(), bottom: t.top.clone() })
        .collect();
    Diagram {
        ctx: d.ctx.clone(),
        wires,
        transistors,
        top_ports: d.bottom_ports.clone(),
        bottom_ports: d.top_ports.clone(),
        annular: d.annular,
    }
    .canonical()
}

/// Reduced concatenation.
pub fn multiply(d1: &Diagram, d2: &Diagram) -> Result<Diagram, DiagramError> {
    Ok(reduce(&concat(d1, d2)?))
}

pub fn reduce(d: &Diagram) -> Diagram {
    d.reduce()
}

/// Number of transistors plus number of nontrivially labelled wires of the reduction.
pub fn length(d: &Diagram) -> usize {
    let r = d.reduce();
    r.transistors.len() + r.nontrivial_wires()
}

/// Transistors plus total coefficient word length of the reduction (the length
/// used for pictures over free coefficient groups).
pub fn diagram_length(d: &Diagram) -> usize {
    let r = d.reduce();
    r.transistors.len() + r.wires.iter().map(|w| w.coeff.word_length()).sum::<usize>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{coeff_parse, GroupSpec};
    use crate::presentation::parse_presentation;

    pub(crate) fn thompson() -> Context {
        Context::plain(parse_presentation("<x | x=x.x>").unwrap())
    }

    pub(crate) fn thompson_cyclic(k: u32) -> Context {
        let p = parse_presentation("<x | x=x.x>").unwrap();
        let c = CoefficientSystem::uniform(&p, GroupSpec::Cyclic(k));
        Context::new(p, c)
    }

    fn x() -> Letter {
        Letter(0)
    }

    #[test]
    fn eps_basics() {
        let ctx = thompson();
        let e = ctx.eps_word(&[x()]).unwrap();
        assert_eq!(length(&e), 0);
        assert_eq!(e.top_word(), vec![x()]);
        assert_eq!(e.bottom_word(), vec![x()]);
        assert!(matches!(ctx.eps_word(&[]), Err(DiagramError::EmptyWord)));
        e.validate().unwrap();
    }

    #[test]
    fn eps_foreign_coefficient_rejected() {
        let ctx = thompson();
        let g = GroupElement::Residue { modulus: 2, value: 1 };
        assert!(matches!(ctx.eps(&[(x(), g)]), Err(DiagramError::ForeignCoefficient)));
    }

    #[test]
    fn transistor_atom_boundaries() {
        let ctx = thompson();
        let t = ctx.atom_transistor(&[], 0, Direction::Positive, &[]).unwrap();
        let b = boundaries(&t);
        assert_eq!(b.top_word, vec![x()]);
        assert_eq!(b.bottom_word, vec![x(), x()]);
        assert_eq!(length(&t), 1);
        t.validate().unwrap();
        let padded = ctx.atom_transistor(&[x()], 0, Direction::Positive, &[]).unwrap();
        assert_eq!(padded.top_word().len(), 2);
        assert_eq!(padded.bottom_word().len(), 3);
        assert_eq!(padded.wires()[padded.transistors()[0].top[0]].top, End::Frame(1));
        assert!(matches!(ctx.atom_transistor(&[], 3, Direction::Positive, &[]), Err(DiagramError::InvalidRelation(3))));
    }

    #[test]
    fn invert_transistor_is_negative_atom() {
        let ctx = thompson();
        let t = ctx.atom_transistor(&[], 0, Direction::Positive, &[]).unwrap();
        let n = ctx.atom_transistor(&[], 0, Direction::Negative, &[]).unwrap();
        assert_eq!(invert(&t), n);
        assert_eq!(invert(&invert(&t)), t);
        let e = ctx.eps_word(&[x(), x()]).unwrap();
        assert_eq!(invert(&e), e);
    }

    #[test]
    fn permutation_atoms() {
        let ctx = thompson();
        let w = [x(), x(), x()];
        assert_eq!(ctx.atom_permutation(&w, &[0, 1, 2]).unwrap(), ctx.eps_word(&w).unwrap());
        assert!(matches!(ctx.atom_permutation(&w, &[0, 0, 1]), Err(DiagramError::NotBijective(3))));
        let p = ctx.atom_permutation(&w, &[1, 2, 0]).unwrap();
        assert_eq!(length(&p), 0);
        p.validate().unwrap();
    }

    #[test]
    fn concat_merges_coefficients() {
        let ctx = thompson_cyclic(3);
        let spec = GroupSpec::Cyclic(3);
        let g = coeff_parse(&spec, "c").unwrap();
        let h = coeff_parse(&spec, "c.c").unwrap();
        let a = ctx.atom_linear(&[x()], 0, g.clone()).unwrap();
        let b = ctx.eps(&[(x(), g.clone())]).unwrap();
        let ab = concat(&a, &b).unwrap();
        assert_eq!(ab, ctx.eps(&[(x(), h.clone())]).unwrap());
        let back = concat(&ab, &ctx.atom_linear(&[x()], 0, g).unwrap()).unwrap();
        assert_eq!(back, ctx.eps_word(&[x()]).unwrap());
    }

    #[test]
    fn concat_boundary_mismatch() {
        let ctx = thompson();
        let t = ctx.atom_transistor(&[], 0, Direction::Positive, &[]).unwrap();
        assert!(matches!(concat(&t, &t), Err(DiagramError::BoundaryMismatch(_))));
        let other = Context::plain(parse_presentation("<x | x=x.x.x>").unwrap());
        let e = other.eps_word(&[x(), x()]).unwrap();
        assert!(matches!(concat(&t, &e), Err(DiagramError::ContextMismatch)));
    }

    #[test]
    fn concat_with_identity() {
        let ctx = thompson();
        let t = ctx.atom_transistor(&[x()], 0, Direction::Positive, &[]).unwrap();
        let e = ctx.eps_word(&[x(), x()]).unwrap();
        assert_eq!(concat(&e, &t).unwrap(), t);
        let e3 = ctx.eps_word(&[x(), x(), x()]).unwrap();
        assert_eq!(concat(&t, &e3).unwrap(), t);
    }

    #[test]
    fn sum_basics() {
        let ctx = thompson();
        let e1 = ctx.eps_word(&[x()]).unwrap();
        let e2 = ctx.eps_word(&[x(), x()]).unwrap();
        assert_eq!(sum(&e1, &e1).unwrap(), e2);
        let t = ctx.atom_transistor(&[], 0, Direction::Positive, &[]).unwrap();
        assert_eq!(sum(&t, &e1).unwrap(), ctx.atom_transistor(&[], 0, Direction::Positive, &[x()]).unwrap());
        assert_eq!(length(&sum(&t, &t).unwrap()), 2);
        assert!(matches!(sum(&t.clone().with_annular(true), &e1), Err(DiagramError::AnnularSum)));
    }

    #[test]
    fn linear_atoms() {
        let ctx = thompson_cyclic(2);
        let g = GroupElement::Residue { modulus: 2, value: 1 };
        let l = ctx.atom_linear(&[x(), x()], 1, g.clone()).unwrap();
        assert_eq!(length(&l), 1);
        assert_eq!(multiply(&l, &l).unwrap(), ctx.eps_word(&[x(), x()]).unwrap());
        assert!(matches!(
            ctx.atom_linear(&[x()], 0, GroupElement::Residue { modulus: 2, value: 0 }),
            Err(DiagramError::TrivialCoefficient)
        ));
    }

    #[test]
    fn permute_and_twist_bottom() {
        let ctx = thompson_cyclic(2);
        let t = ctx.atom_transistor(&[], 0, Direction::Positive, &[]).unwrap();
        let swapped = t.permute_bottom(&[1, 0]).unwrap();
        let swap = ctx.atom_permutation(&[x(), x()], &[1, 0]).unwrap();
        assert_eq!(swapped.canonical(), concat(&t, &swap).unwrap());
        let g = GroupElement::Residue { modulus: 2, value: 1 };
        let twisted = t.twist_bottom(0, &g).unwrap();
        let lin = ctx.atom_linear(&[x(), x()], 0, g).unwrap();
        assert_eq!(twisted.canonical(), concat(&t, &lin).unwrap());
    }
}
