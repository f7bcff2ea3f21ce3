//! Thompson-type groups as numbered forest pairs.
//!
//! A [`TreePair`] is a pair of `n`-ary forests with the same number of
//! leaves and a bijection between the leaves. Forests may have several roots,
//! and the two sides may have different root counts, which makes pairs
//! morphisms between powers `xʳ → xˢ` and lets every factor of a diagram be
//! written as a pair. Pairs act on the right: `tp_multiply(a, b)` is "first
//! `a`, then `b`", the same order as diagram concatenation.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::picture::{classify_kind, factorize, Context, Diagram, DiagramError, DiagramKind, End};
use crate::presentation::{builtin_presentation, Direction, Letter};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ThompsonError {
    #[error("arity mismatch: {0} vs {1}")]
    ArityMismatch(usize, usize),
    #[error("root mismatch: {0} image roots vs {1} domain roots")]
    RootMismatch(usize, usize),
    #[error("arity must be at least 2")]
    BadArity,
    #[error("malformed tree pair: {0}")]
    Malformed(String),
    #[error("not a diagram over <x | x=x^n>: {0}")]
    WrongPresentation(String),
    #[error("diagram has nontrivial coefficients")]
    NontrivialCoefficients,
    #[error("malformed n-adic number: {0}")]
    BadNumber(String),
    #[error("point {0} outside [0, {1})")]
    OutOfRange(String, usize),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

/// Position of a leaf: a root index followed by child indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Address {
    pub root: usize,
    pub path: Vec<u8>,
}

impl Address {
    fn root(r: usize) -> Self {
        Address { root: r, path: Vec::new() }
    }

    fn child(&self, c: usize) -> Self {
        let mut path = self.path.clone();
        path.push(c as u8);
        Address { root: self.root, path }
    }

    fn is_prefix_of(&self, other: &Address) -> bool {
        self.root == other.root && other.path.starts_with(&self.path)
    }

    /// Left end of the leaf interval as a numerator over `n^depth`.
    fn start(&self, n: usize) -> u128 {
        self.path.iter().fold(self.root as u128, |acc, &c| acc * n as u128 + c as u128)
    }

    fn depth(&self) -> u32 {
        self.path.len() as u32
    }
}

/// A complete `n`-ary forest given by its leaves in left-to-right order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Forest {
    roots: usize,
    leaves: Vec<Address>,
}

impl Forest {
    pub fn trivial(roots: usize) -> Self {
        Forest { roots, leaves: (0..roots).map(Address::root).collect() }
    }

    /// Checks completeness and sorts the leaves.
    pub fn from_leaves(arity: usize, roots: usize, mut leaves: Vec<Address>) -> Result<Self, ThompsonError> {
        leaves.sort();
        let mut at = 0;
        for r in 0..roots {
            if !consume(arity, &leaves, &mut at, &Address::root(r)) {
                return Err(ThompsonError::Malformed(format!("leaves do not form a complete forest under root {r}")));
            }
        }
        if at != leaves.len() {
            return Err(ThompsonError::Malformed("leaves outside the forest".into()));
        }
        Ok(Forest { roots, leaves })
    }

    pub fn roots(&self) -> usize {
        self.roots
    }

    pub fn leaves(&self) -> &[Address] {
        &self.leaves
    }

    pub fn carets(&self, arity: usize) -> usize {
        (self.leaves.len() - self.roots) / (arity - 1)
    }

    /// Internal nodes in preorder.
    fn internal_nodes(&self) -> Vec<Address> {
        let mut out: Vec<Address> = Vec::new();
        for leaf in &self.leaves {
            for k in 0..leaf.path.len() {
                let a = Address { root: leaf.root, path: leaf.path[..k].to_vec() };
                if leaf.path[k..].iter().all(|&c| c == 0) {
                    out.push(a);
                }
            }
        }
        out.sort();
        out
    }

    fn write(&self, arity: usize, f: &mut impl fmt::Write) -> fmt::Result {
        let mut at = 0;
        for r in 0..self.roots {
            write_node(arity, &self.leaves, &mut at, &Address::root(r), f)?;
        }
        Ok(())
    }

    fn parse(arity: usize, text: &str) -> Result<Self, ThompsonError> {
        let bytes = text.as_bytes();
        let mut leaves = Vec::new();
        let mut at = 0;
        let mut roots = 0;
        while at < bytes.len() {
            parse_node(arity, bytes, &mut at, Address::root(roots), &mut leaves)?;
            roots += 1;
        }
        if roots == 0 {
            return Err(ThompsonError::Malformed("empty forest".into()));
        }
        Forest::from_leaves(arity, roots, leaves)
    }
}

fn consume(arity: usize, leaves: &[Address], at: &mut usize, node: &Address) -> bool {
    match leaves.get(*at) {
        Some(l) if l == node => {
            *at += 1;
            true
        }
        Some(l) if node.is_prefix_of(l) => (0..arity).all(|c| consume(arity, leaves, at, &node.child(c))),
        _ => false,
    }
}

fn write_node(arity: usize, leaves: &[Address], at: &mut usize, node: &Address, f: &mut impl fmt::Write) -> fmt::Result {
    if leaves[*at] == *node {
        *at += 1;
        return f.write_char('.');
    }
    f.write_char('(')?;
    for c in 0..arity {
        write_node(arity, leaves, at, &node.child(c), f)?;
    }
    f.write_char(')')
}

fn parse_node(arity: usize, s: &[u8], at: &mut usize, node: Address, out: &mut Vec<Address>) -> Result<(), ThompsonError> {
    match s.get(*at) {
        Some(b'.') => {
            *at += 1;
            out.push(node);
            Ok(())
        }
        Some(b'(') => {
            *at += 1;
            for c in 0..arity {
                parse_node(arity, s, at, node.child(c), out)?;
            }
            if s.get(*at) != Some(&b')') {
                return Err(ThompsonError::Malformed(format!("expected `)` at offset {}", *at)));
            }
            *at += 1;
            Ok(())
        }
        _ => Err(ThompsonError::Malformed(format!("unexpected input at offset {}", *at))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Membership {
    F,
    TNotF,
    VNotT,
}

impl fmt::Display for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Membership::F => "F",
            Membership::TNotF => "T_not_F",
            Membership::VNotT => "V_not_T",
        })
    }
}

/// Domain leaf `i` is matched with image leaf `perm[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TreePair {
    arity: usize,
    domain: Forest,
    image: Forest,
    perm: Vec<usize>,
}

impl TreePair {
    pub fn new(arity: usize, domain: Forest, image: Forest, perm: Vec<usize>) -> Result<Self, ThompsonError> {
        if arity < 2 {
            return Err(ThompsonError::BadArity);
        }
        let n = domain.leaves.len();
        if image.leaves.len() != n {
            return Err(ThompsonError::Malformed(format!("{n} domain leaves vs {} image leaves", image.leaves.len())));
        }
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(ThompsonError::Malformed("leaf matching is not a bijection".into()));
        }
        for f in [&domain, &image] {
            Forest::from_leaves(arity, f.roots, f.leaves.clone())?;
        }
        Ok(TreePair { arity, domain, image, perm })
    }

    pub fn identity(arity: usize, roots: usize) -> Self {
        TreePair { arity, domain: Forest::trivial(roots), image: Forest::trivial(roots), perm: (0..roots).collect() }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn domain(&self) -> &Forest {
        &self.domain
    }

    pub fn image(&self) -> &Forest {
        &self.image
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn leaf_count(&self) -> usize {
        self.perm.len()
    }

    pub fn is_identity(&self) -> bool {
        let r = self.reduced();
        r.domain.roots == r.image.roots && r.perm.len() == r.domain.roots && r.domain.leaves.iter().all(|l| l.path.is_empty())
    }

    fn from_matching(arity: usize, droots: usize, iroots: usize, pairs: Vec<(Address, Address)>) -> Self {
        let mut pairs = pairs;
        pairs.sort();
        let mut image: Vec<Address> = pairs.iter().map(|p| p.1.clone()).collect();
        image.sort();
        let index: HashMap<&Address, usize> = image.iter().enumerate().map(|(i, a)| (a, i)).collect();
        let perm = pairs.iter().map(|p| index[&p.1]).collect();
        let domain = pairs.iter().map(|p| p.0.clone()).collect();
        TreePair { arity, domain: Forest { roots: droots, leaves: domain }, image: Forest { roots: iroots, leaves: image }, perm }
    }

    /// Position of a removable caret pair: `arity` sibling domain leaves sent
    /// in order to `arity` sibling image leaves.
    fn removable(&self) -> Option<usize> {
        let n = self.arity;
        let d = &self.domain.leaves;
        (0..d.len().saturating_sub(n - 1)).find(|&i| {
            let head = &d[i];
            if head.path.last() != Some(&0) {
                return false;
            }
            let j0 = self.perm[i];
            let ih = &self.image.leaves[j0];
            if ih.path.last() != Some(&0) {
                return false;
            }
            (1..n).all(|c| {
                let dl = &d[i + c];
                let il = self.image.leaves.get(j0 + c);
                self.perm[i + c] == j0 + c
                    && dl.path.len() == head.path.len()
                    && dl.path[..head.path.len() - 1] == head.path[..head.path.len() - 1]
                    && dl.root == head.root
                    && il.is_some_and(|il| {
                        il.root == ih.root && il.path.len() == ih.path.len() && il.path[..ih.path.len() - 1] == ih.path[..ih.path.len() - 1]
                    })
            })
        })
    }

    pub fn is_reduced(&self) -> bool {
        self.removable().is_none()
    }

    /// Removes caret pairs until none is left. The result is the unique
    /// reduced pair of the element.
    pub fn reduced(&self) -> TreePair {
        let mut tp = self.clone();
        while let Some(i) = tp.removable() {
            let n = tp.arity;
            let j = tp.perm[i];
            let mut dparent = tp.domain.leaves[i].clone();
            dparent.path.pop();
            let mut iparent = tp.image.leaves[j].clone();
            iparent.path.pop();
            tp.domain.leaves.splice(i..i + n, [dparent]);
            tp.image.leaves.splice(j..j + n, [iparent]);
            let perm: Vec<usize> = tp.perm[..i]
                .iter()
                .chain(std::iter::once(&j))
                .chain(tp.perm[i + n..].iter())
                .map(|&p| match p.cmp(&j) {
                    Ordering::Greater => p - (n - 1),
                    _ => p,
                })
                .collect();
            tp.perm = perm;
        }
        tp
    }

    pub fn membership(&self) -> Membership {
        membership(self)
    }
}

impl fmt::Display for TreePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.domain.write(self.arity, f)?;
        f.write_str("|")?;
        self.image.write(self.arity, f)?;
        let perm: Vec<String> = self.perm.iter().map(|p| p.to_string()).collect();
        write!(f, "@perm={}", perm.join(","))?;
        if self.arity != 2 {
            write!(f, "@arity={}", self.arity)?;
        }
        Ok(())
    }
}

impl FromStr for TreePair {
    type Err = ThompsonError;

    /// `domain|image[@perm=p0,p1,...][@arity=n]`; a missing perm means the identity matching.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut parts = s.split('@');
        let trees = parts.next().unwrap_or_default();
        let mut perm = None;
        let mut arity = 2;
        for opt in parts {
            match opt.split_once('=') {
                Some(("perm", v)) => {
                    let p = v
                        .split(',')
                        .filter(|t| !t.is_empty())
                        .map(|t| t.parse::<usize>().map_err(|_| ThompsonError::Malformed(format!("perm entry `{t}`"))))
                        .collect::<Result<Vec<_>, _>>()?;
                    perm = Some(p);
                }
                Some(("arity", v)) => {
                    arity = v.parse().map_err(|_| ThompsonError::Malformed(format!("arity `{v}`")))?;
                }
                _ => return Err(ThompsonError::Malformed(format!("unknown option `{opt}`"))),
            }
        }
        if arity < 2 {
            return Err(ThompsonError::BadArity);
        }
        let (d, i) = trees.split_once('|').ok_or_else(|| ThompsonError::Malformed("missing `|`".into()))?;
        let domain = Forest::parse(arity, d)?;
        let image = Forest::parse(arity, i)?;
        let perm = perm.unwrap_or_else(|| (0..domain.leaves.len()).collect());
        TreePair::new(arity, domain, image, perm)
    }
}

/// `numerator / arityᵉˣᵖᵒⁿᵉⁿᵗ`, kept normalized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NAdic {
    arity: u32,
    numerator: u128,
    exponent: u32,
}

impl NAdic {
    pub fn new(arity: usize, numerator: u128, exponent: u32) -> Self {
        let mut q = NAdic { arity: arity as u32, numerator, exponent };
        q.normalize();
        q
    }

    fn normalize(&mut self) {
        let n = self.arity as u128;
        if self.numerator == 0 {
            self.exponent = 0;
        }
        while self.exponent > 0 && self.numerator.is_multiple_of(n) {
            self.numerator /= n;
            self.exponent -= 1;
        }
    }

    pub fn arity(&self) -> usize {
        self.arity as usize
    }

    pub fn numerator(&self) -> u128 {
        self.numerator
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    /// Numerator over `arity^e` for `e ≥ exponent`.
    fn at(&self, e: u32) -> u128 {
        self.numerator * (self.arity as u128).pow(e - self.exponent)
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator as f64 / (self.arity as f64).powi(self.exponent as i32)
    }
}

impl fmt::Display for NAdic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 0 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/{}^{}", self.numerator, self.arity, self.exponent)
        }
    }
}

impl FromStr for NAdic {
    type Err = ThompsonError;

    /// `k`, `k/n^m` or `k/d` with `d` a power of two.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ThompsonError::BadNumber(s.to_string());
        let s = s.trim();
        let Some((num, den)) = s.split_once('/') else {
            return Ok(NAdic::new(2, s.parse().map_err(|_| bad())?, 0));
        };
        let num: u128 = num.trim().parse().map_err(|_| bad())?;
        if let Some((base, exp)) = den.split_once('^') {
            let base: usize = base.trim().parse().map_err(|_| bad())?;
            let exp: u32 = exp.trim().parse().map_err(|_| bad())?;
            if base < 2 {
                return Err(bad());
            }
            return Ok(NAdic::new(base, num, exp));
        }
        let den: u128 = den.trim().parse().map_err(|_| bad())?;
        if !den.is_power_of_two() {
            return Err(bad());
        }
        Ok(NAdic::new(2, num, den.trailing_zeros()))
    }
}

/// Composite "first `a`, then `b`" as a reduced pair.
pub fn tp_multiply(a: &TreePair, b: &TreePair) -> Result<TreePair, ThompsonError> {
    if a.arity != b.arity {
        return Err(ThompsonError::ArityMismatch(a.arity, b.arity));
    }
    if a.image.roots != b.domain.roots {
        return Err(ThompsonError::RootMismatch(a.image.roots, b.domain.roots));
    }
    // Common refinement of a's image forest and b's domain forest.
    let mut all: Vec<&Address> = a.image.leaves.iter().chain(b.domain.leaves.iter()).collect();
    all.sort();
    all.dedup();
    let finest: Vec<&Address> =
        all.iter().enumerate().filter(|(i, x)| all.get(i + 1).is_none_or(|y| !x.is_prefix_of(y))).map(|(_, x)| *x).collect();
    let a_inv: HashMap<&Address, &Address> =
        a.perm.iter().enumerate().map(|(i, &p)| (&a.image.leaves[p], &a.domain.leaves[i])).collect();
    let b_map: HashMap<&Address, &Address> =
        b.domain.leaves.iter().zip(b.perm.iter().map(|&p| &b.image.leaves[p])).collect();
    let owner = |leaves: &[Address], x: &Address| -> usize {
        // The leaf of `leaves` that is a prefix of `x`.
        let i = leaves.partition_point(|l| l <= x);
        i - 1
    };
    let mut pairs = Vec::with_capacity(finest.len());
    for x in finest {
        let ia = &a.image.leaves[owner(&a.image.leaves, x)];
        let db = &b.domain.leaves[owner(&b.domain.leaves, x)];
        debug_assert!(ia.is_prefix_of(x) && db.is_prefix_of(x));
        let mut from = a_inv[ia].clone();
        from.path.extend_from_slice(&x.path[ia.path.len()..]);
        let mut to = b_map[db].clone();
        to.path.extend_from_slice(&x.path[db.path.len()..]);
        pairs.push((from, to));
    }
    Ok(TreePair::from_matching(a.arity, a.domain.roots, b.image.roots, pairs).reduced())
}

pub fn tp_invert(a: &TreePair) -> TreePair {
    let mut perm = vec![0; a.perm.len()];
    for (i, &p) in a.perm.iter().enumerate() {
        perm[p] = i;
    }
    TreePair { arity: a.arity, domain: a.image.clone(), image: a.domain.clone(), perm }
}

/// Image of `q ∈ [0, roots)` under the piecewise affine map of the pair.
pub fn evaluate_map(tp: &TreePair, q: &NAdic) -> Result<NAdic, ThompsonError> {
    if q.arity() != tp.arity && q.numerator != 0 {
        return Err(ThompsonError::ArityMismatch(tp.arity, q.arity()));
    }
    let n = tp.arity as u128;
    let leaves = &tp.domain.leaves;
    let depth = leaves.iter().map(Address::depth).max().unwrap_or(0).max(q.exponent);
    let qd = NAdic { arity: tp.arity as u32, ..*q }.at(depth);
    if qd >= tp.domain.roots as u128 * n.pow(depth) {
        return Err(ThompsonError::OutOfRange(q.to_string(), tp.domain.roots));
    }
    let i = leaves.partition_point(|l| l.start(tp.arity) * n.pow(depth - l.depth()) <= qd) - 1;
    let from = &leaves[i];
    let to = &tp.image.leaves[tp.perm[i]];
    // q = from.start/n^df + off/n^depth  ↦  to.start/n^dt + off/n^(depth - df + dt)
    let off = qd - from.start(tp.arity) * n.pow(depth - from.depth());
    let e = depth - from.depth() + to.depth();
    let num = to.start(tp.arity) * n.pow(e - to.depth()) + off;
    Ok(NAdic::new(tp.arity, num, e))
}

pub fn membership(tp: &TreePair) -> Membership {
    let r = tp.reduced();
    let len = r.perm.len();
    if r.perm.iter().enumerate().all(|(i, &p)| p == i) {
        Membership::F
    } else if (0..len).any(|s| r.perm.iter().enumerate().all(|(i, &p)| p == (i + s) % len)) {
        Membership::TNotF
    } else {
        Membership::VNotT
    }
}

/// Diagrams over `<x | x=xⁿ>` with trivial coefficients.
pub fn thompson_context(arity: usize) -> Result<Context, ThompsonError> {
    if arity < 2 {
        return Err(ThompsonError::BadArity);
    }
    let (p, _) = builtin_presentation("higman", &[arity as i64, 1]).map_err(|e| ThompsonError::Malformed(e.to_string()))?;
    Ok(Context::plain(p))
}

/// The planar diagram `xʳ → x^leaves` with one positive transistor per caret.
fn forest_diagram(ctx: &Context, arity: usize, forest: &Forest) -> Result<Diagram, ThompsonError> {
    let x = Letter(0);
    let mut current: Vec<Address> = (0..forest.roots).map(Address::root).collect();
    let mut d = ctx.eps_word(&vec![x; forest.roots])?;
    for node in forest.internal_nodes() {
        let i = current.iter().position(|a| *a == node).expect("preorder reaches the node as a leaf");
        let t = ctx.atom_transistor(&vec![x; i], 0, Direction::Positive, &vec![x; current.len() - i - 1])?;
        d = crate::picture::concat(&d, &t)?;
        current.splice(i..=i, (0..arity).map(|c| node.child(c)));
    }
    debug_assert_eq!(current, forest.leaves);
    Ok(d)
}

/// Domain carets as positive transistors on top, the matching as a
/// permutation, image carets as negative transistors at the bottom. No
/// reduction takes place, so unreduced pairs give unreduced diagrams.
pub fn tree_pair_to_diagram(tp: &TreePair) -> Result<Diagram, ThompsonError> {
    let ctx = thompson_context(tp.arity)?;
    let top = forest_diagram(&ctx, tp.arity, &tp.domain)?;
    let mid = ctx.atom_permutation(&vec![Letter(0); tp.perm.len()], &tp.perm)?;
    let bottom = crate::picture::invert(&forest_diagram(&ctx, tp.arity, &tp.image)?);
    Ok(crate::picture::concat(&crate::picture::concat(&top, &mid)?, &bottom)?)
}

/// Arity of a presentation of the form `<x | x=xⁿ>`.
fn thompson_arity(d: &Diagram) -> Result<usize, ThompsonError> {
    let p = d.pres();
    let bad = || ThompsonError::WrongPresentation(p.to_string());
    if p.alphabet().len() != 1 || p.relations().len() != 1 {
        return Err(bad());
    }
    let r = &p.relations()[0];
    if r.lhs.len() != 1 || r.rhs.len() < 2 {
        return Err(bad());
    }
    Ok(r.rhs.len())
}

fn permutation_of(d: &Diagram) -> Vec<usize> {
    d.top_ports()
        .iter()
        .map(|&w| match d.wires()[w].bottom {
            End::Frame(p) => p,
            End::Transistor(..) => unreachable!("permutation diagram"),
        })
        .collect()
}

/// Pair of a single-transistor factor on a word of length `len`.
fn transistor_pair(arity: usize, len: usize, at: usize, dir: Direction) -> TreePair {
    let split = |roots: usize| {
        let mut leaves: Vec<Address> = (0..roots).filter(|&r| r != at).map(Address::root).collect();
        leaves.extend((0..arity).map(|c| Address::root(at).child(c)));
        leaves.sort();
        Forest { roots, leaves }
    };
    let leaves = len + if dir == Direction::Positive { arity - 1 } else { 0 };
    let (domain, image) = match dir {
        Direction::Positive => (split(len), Forest::trivial(leaves)),
        Direction::Negative => (Forest::trivial(len), split(len - arity + 1)),
    };
    TreePair { arity, domain, image, perm: (0..leaves).collect() }
}

/// Inverse of [`tree_pair_to_diagram`] on reduced diagrams. Positive and
/// negative transistors may interleave; the factors are composed as pairs.
pub fn diagram_to_tree_pair(d: &Diagram) -> Result<TreePair, ThompsonError> {
    let arity = thompson_arity(d)?;
    if !d.all_coefficients_trivial() {
        return Err(ThompsonError::NontrivialCoefficients);
    }
    let d = crate::picture::reduce(d);
    let f = factorize(&d)?;
    let lead = f.lead.top_ports().len();
    let mut acc = TreePair { arity, domain: Forest::trivial(lead), image: Forest::trivial(lead), perm: permutation_of(&f.lead) };
    for (u, p) in &f.steps {
        if classify_kind(u) != DiagramKind::Transistor {
            return Err(ThompsonError::NontrivialCoefficients);
        }
        let tr = &u.transistors()[0];
        let End::Frame(at) = u.wires()[tr.top[0]].top else { unreachable!("transistor factor hangs from the frame") };
        let len = u.top_ports().len();
        acc = tp_multiply(&acc, &transistor_pair(arity, len, at, tr.dir))?;
        let pl = p.top_ports().len();
        let step = TreePair { arity, domain: Forest::trivial(pl), image: Forest::trivial(pl), perm: permutation_of(p) };
        acc = tp_multiply(&acc, &step)?;
    }
    Ok(acc.reduced())
}

/// A random forest with `carets` carets on `roots` roots.
pub fn random_forest<R: Rng + ?Sized>(rng: &mut R, arity: usize, roots: usize, carets: usize) -> Forest {
    let mut leaves: Vec<Address> = (0..roots).map(Address::root).collect();
    for _ in 0..carets {
        let i = rng.gen_range(0..leaves.len());
        let node = leaves[i].clone();
        leaves.splice(i..=i, (0..arity).map(|c| node.child(c)));
    }
    Forest { roots, leaves }
}

/// A random reduced pair with at most `carets` carets per side, whose
/// matching is drawn from the given subgroup.
pub fn random_tree_pair<R: Rng + ?Sized>(rng: &mut R, arity: usize, roots: usize, carets: usize, kind: Membership) -> TreePair {
    let c = rng.gen_range(0..=carets);
    let domain = random_forest(rng, arity, roots, c);
    let image = random_forest(rng, arity, roots, c);
    let n = domain.leaves.len();
    let perm: Vec<usize> = match kind {
        Membership::F => (0..n).collect(),
        Membership::TNotF => {
            let s = rng.gen_range(0..n);
            (0..n).map(|i| (i + s) % n).collect()
        }
        Membership::VNotT => {
            let mut p: Vec<usize> = (0..n).collect();
            p.shuffle(rng);
            p
        }
    };
    TreePair { arity, domain, image, perm }.reduced()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::picture::{classify_geometry, concat, invert, multiply, GeometryClass};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tp(s: &str) -> TreePair {
        s.parse().unwrap()
    }

    fn q(s: &str) -> NAdic {
        s.parse().unwrap()
    }

    #[test]
    fn text_round_trip() {
        for s in [".|.@perm=0", "((..).)|(.(..))@perm=0,1,2", "(...)(...).|(..(...))..@perm=6,5,4,3,2,1,0@arity=3"] {
            assert_eq!(tp(s).to_string(), s);
        }
        assert_eq!(tp("(..)|(..)"), tp("(..)|(..)@perm=0,1"));
        for bad in ["(..|..", ".|..", "(.)|(.)", "(..)|(..)@perm=0,0", "..|..@color=1", "(..)|(..)@arity=1"] {
            assert!(bad.parse::<TreePair>().is_err(), "{bad}");
        }
    }

    #[test]
    fn reduction_removes_caret_pairs() {
        let a = tp("((..).)|((..).)@perm=0,1,2");
        assert!(!a.is_reduced());
        assert_eq!(a.reduced(), TreePair::identity(2, 1));
        let b = tp("((..).)|(.(..))@perm=0,1,2");
        assert!(b.is_reduced());
        // Sibling leaves matched out of order cannot be removed.
        assert!(tp("(..)|(..)@perm=1,0").is_reduced());
    }

    #[test]
    fn f_generator_halves_one_half() {
        let x0 = tp("(.(..))|((..).)");
        assert_eq!(evaluate_map(&x0, &q("1/2")).unwrap(), q("1/4"));
        assert_eq!(evaluate_map(&x0, &q("3/4")).unwrap(), q("1/2"));
        assert_eq!(evaluate_map(&x0, &q("0")).unwrap(), q("0"));
        assert!(evaluate_map(&x0, &q("1")).is_err());
    }

    #[test]
    fn nadic_parsing() {
        assert_eq!(q("4/16"), q("1/4"));
        assert_eq!(q("2/2^3").to_string(), "1/2^2");
        assert_eq!(q("3/3^2"), NAdic::new(3, 1, 1));
        assert!("1/6".parse::<NAdic>().is_err());
        assert!("x".parse::<NAdic>().is_err());
    }

    #[test]
    fn inverse_and_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for kind in [Membership::F, Membership::TNotF, Membership::VNotT] {
            for _ in 0..30 {
                let a = random_tree_pair(&mut rng, 2, 1, 6, kind);
                assert!(tp_multiply(&a, &tp_invert(&a)).unwrap().is_identity());
                assert_eq!(tp_multiply(&a, &TreePair::identity(2, 1)).unwrap(), a);
            }
        }
    }

    #[test]
    fn composition_matches_functions() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for arity in [2, 3] {
            for _ in 0..40 {
                let a = random_tree_pair(&mut rng, arity, 1, 5, Membership::VNotT);
                let b = random_tree_pair(&mut rng, arity, 1, 5, Membership::VNotT);
                let ab = tp_multiply(&a, &b).unwrap();
                for k in 0..(arity as u128).pow(4) {
                    let p = NAdic::new(arity, k, 4);
                    let direct = evaluate_map(&b, &evaluate_map(&a, &p).unwrap()).unwrap();
                    assert_eq!(evaluate_map(&ab, &p).unwrap(), direct);
                }
            }
        }
    }

    #[test]
    fn membership_tags() {
        assert_eq!(membership(&TreePair::identity(2, 1)), Membership::F);
        assert_eq!(membership(&tp("((..).)|(.(..))@perm=1,2,0")), Membership::TNotF);
        assert_eq!(membership(&tp("((..).)|(.(..))@perm=1,0,2")), Membership::VNotT);
        let d = tree_pair_to_diagram(&tp("((..).)|(.(..))@perm=1,0,2")).unwrap();
        assert_eq!(classify_geometry(&d), GeometryClass::BraidedOnly);
    }

    #[test]
    fn bridge_basics() {
        let id = tree_pair_to_diagram(&TreePair::identity(2, 1)).unwrap();
        let ctx = thompson_context(2).unwrap();
        assert_eq!(id, ctx.eps_word(&[Letter(0)]).unwrap());
        assert_eq!(diagram_to_tree_pair(&id).unwrap(), TreePair::identity(2, 1));
        let unreduced = tree_pair_to_diagram(&tp("((..).)|((..).)")).unwrap();
        assert_eq!(unreduced.dipoles().len(), 1);
    }

    #[test]
    fn bridge_round_trip_and_multiplicativity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for arity in [2, 3] {
            for _ in 0..40 {
                let a = random_tree_pair(&mut rng, arity, 1, 5, Membership::VNotT);
                let b = random_tree_pair(&mut rng, arity, 1, 5, Membership::TNotF);
                let da = tree_pair_to_diagram(&a).unwrap();
                let db = tree_pair_to_diagram(&b).unwrap();
                assert!(da.is_reduced());
                assert_eq!(diagram_to_tree_pair(&da).unwrap(), a);
                let ab = tp_multiply(&a, &b).unwrap();
                assert_eq!(tree_pair_to_diagram(&ab).unwrap(), multiply(&da, &db).unwrap());
                assert_eq!(diagram_to_tree_pair(&concat(&da, &invert(&db)).unwrap()).unwrap(), tp_multiply(&a, &tp_invert(&b)).unwrap());
            }
        }
    }

    #[test]
    fn forest_pairs_with_several_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let a = random_tree_pair(&mut rng, 2, 3, 4, Membership::VNotT);
            let d = tree_pair_to_diagram(&a).unwrap();
            assert_eq!(d.top_word().len(), 3);
            assert_eq!(diagram_to_tree_pair(&d).unwrap(), a);
            for k in 0..48u128 {
                let p = NAdic::new(2, k, 4);
                let y = evaluate_map(&a, &p).unwrap();
                assert_eq!(evaluate_map(&tp_invert(&a), &y).unwrap(), p);
            }
        }
    }

    #[test]
    fn mismatches_rejected() {
        let a = TreePair::identity(2, 1);
        assert!(matches!(tp_multiply(&a, &TreePair::identity(3, 1)), Err(ThompsonError::ArityMismatch(2, 3))));
        assert!(matches!(tp_multiply(&a, &TreePair::identity(2, 2)), Err(ThompsonError::RootMismatch(1, 2))));
        let p = crate::presentation::parse_presentation("<a,b | a=b>").unwrap();
        let d = Context::plain(p).eps_word(&[Letter(0)]).unwrap();
        assert!(matches!(diagram_to_tree_pair(&d), Err(ThompsonError::WrongPresentation(_))));
    }
}
